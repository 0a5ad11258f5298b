//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use ndarray::{Array1, Array2, Array3, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratewarp_core::eval::{median, validate_report_line};
use ratewarp_core::vocoder::{conv1d, transposed_conv1d};
use ratewarp_core::{
    dtw_align, mcd, resample_bandlimited, wsola, AudioBuffer, Generator, GeneratorConfig,
    InsertionPoint, InterpolationMethod, KaiserResampleParams, MelConfig, MelSpectrogram, Method,
    RateConversionSpec, WavFormat, WeightStore, WsolaConfig, STANDARD_FACTORS,
};
use rustfft::{num_complex::Complex, FftPlanner};

type Check = Result<String, String>;

const RATE: u32 = 22050;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn round_len(n: usize, f: f64) -> usize {
    ((n as f64 / f).round() as usize).max(1)
}

fn random_mel(frames: usize, seed: u64) -> MelSpectrogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = Array2::from_shape_fn((80, frames), |_| rng.random_range(-6.0f32..1.0));
    MelSpectrogram::new(data, MelConfig::default()).unwrap()
}

fn default_generator(seed: u64) -> Generator {
    let store = WeightStore::init_random(&GeneratorConfig::default(), seed).unwrap();
    Generator::new(store).unwrap()
}

fn sine(freq: f64, rate: u32, n: usize) -> Vec<f32> {
    (0..n)
        .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin() as f32)
        .collect()
}

fn peak_bin(x: &[f32]) -> usize {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v as f64, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    (1..buf.len() / 2)
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .unwrap()
}

fn peak_near(x: &[f32], rate: f64, freq: f64) -> Result<(), String> {
    let expected = freq * x.len() as f64 / rate;
    let got = peak_bin(x);
    ensure((got as f64 - expected).abs() <= 1.0 + 1e-9, || {
        format!("peak at bin {got}, expected {expected:.2}")
    })
}

fn snr_db(reference: &[f32], test: &[f32]) -> f64 {
    let (mut sig, mut noise) = (0.0f64, 0.0f64);
    for (&r, &t) in reference.iter().zip(test) {
        sig += (r as f64).powi(2);
        noise += (r as f64 - t as f64).powi(2);
    }
    10.0 * (sig / noise.max(1e-300)).log10()
}

fn length_matrix() -> Check {
    let g = default_generator(11);
    let hop = 256usize;
    let ups = [8usize, 8, 2, 2];
    let start = Instant::now();
    let mut cases = 0;
    for frames in [1usize, 13, 87] {
        let mel = random_mel(frames, frames as u64);
        for spec in STANDARD_FACTORS
            .iter()
            .flat_map(|&f| RateConversionSpec::all_proposed(f))
        {
            let up: usize = ups[..spec.insertion.blocks_before()].iter().product();
            let expected = round_len(frames * up, spec.factor) * (hop / up);
            let got = g.forward_with_rate(&mel, &spec).map_err(err)?.len();
            ensure(got == expected, || {
                format!(
                    "T={frames} f={} {}:{} gave {got}, expected {expected}",
                    spec.factor,
                    spec.insertion.as_str(),
                    spec.method
                )
            })?;
            cases += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(cases == 210, || format!("ran {cases} cases"))?;
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{cases} cases in {secs:.1} s"))
}

fn identity_factor() -> Check {
    let g = default_generator(5);
    let mel = random_mel(24, 9);
    let base = g.forward(&mel).map_err(err)?;
    let mut worst = 0.0f32;
    for spec in RateConversionSpec::all_proposed(1.0) {
        let out = g.forward_with_rate(&mel, &spec).map_err(err)?;
        ensure(out.len() == base.len(), || "length changed".into())?;
        for (a, b) in out.samples().iter().zip(base.samples()) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("max abs error {worst:e}"))?;
    Ok(format!("max abs error {worst:e}"))
}

fn conv_oracle(
    x: &Array2<f32>,
    w: &Array3<f32>,
    b: &Array1<f32>,
    s: usize,
    d: usize,
    p: usize,
) -> Array2<f32> {
    let (cin, t) = x.dim();
    let (cout, _, k) = w.dim();
    let span = d * (k - 1) + 1;
    let out_len = (t + 2 * p - span) / s + 1;
    let mut y = Array2::zeros((cout, out_len));
    for o in 0..cout {
        for n in 0..out_len {
            let mut acc = b[o] as f64;
            for i in 0..cin {
                for j in 0..k {
                    let pos = (n * s + j * d) as isize - p as isize;
                    if pos >= 0 && (pos as usize) < t {
                        acc += w[[o, i, j]] as f64 * x[[i, pos as usize]] as f64;
                    }
                }
            }
            y[[o, n]] = acc as f32;
        }
    }
    y
}

fn tconv_oracle(
    x: &Array2<f32>,
    w: &Array3<f32>,
    b: &Array1<f32>,
    s: usize,
    p: usize,
) -> Array2<f32> {
    let (cin, t) = x.dim();
    let (_, cout, k) = w.dim();
    let full = (t - 1) * s + k;
    let mut acc = Array2::<f64>::zeros((cout, full));
    for i in 0..cin {
        for n in 0..t {
            for o in 0..cout {
                for j in 0..k {
                    acc[[o, n * s + j]] += x[[i, n]] as f64 * w[[i, o, j]] as f64;
                }
            }
        }
    }
    let len = full - 2 * p;
    Array2::from_shape_fn((cout, len), |(o, n)| (acc[[o, n + p]] + b[o] as f64) as f32)
}

fn max_diff(a: ArrayView2<'_, f32>, b: ArrayView2<'_, f32>) -> Result<f32, String> {
    ensure(a.dim() == b.dim(), || {
        format!("shape {:?} vs {:?}", a.dim(), b.dim())
    })?;
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f32::max))
}

fn conv_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f32;
    for _ in 0..200 {
        let cin = rng.random_range(1..5);
        let cout = rng.random_range(1..5);
        let k: usize = rng.random_range(1..6);
        let d = rng.random_range(1..4);
        let s = rng.random_range(1..4);
        let p = rng.random_range(0..4);
        let span = d * (k - 1) + 1;
        let t = rng.random_range(span.saturating_sub(2 * p).max(1)..span + 12);
        let x = Array2::from_shape_fn((cin, t), |_| rng.random_range(-1.0f32..1.0));
        let w = Array3::from_shape_fn((cout, cin, k), |_| rng.random_range(-1.0f32..1.0));
        let b = Array1::from_shape_fn(cout, |_| rng.random_range(-1.0f32..1.0));
        let got = conv1d(x.view(), w.view(), Some(b.view()), s, d, p).map_err(err)?;
        worst = worst.max(max_diff(
            got.view(),
            conv_oracle(&x, &w, &b, s, d, p).view(),
        )?);
    }
    ensure(worst <= 1e-6, || format!("conv1d max error {worst:e}"))?;
    let mut worst_t = 0.0f32;
    for _ in 0..200 {
        let cin = rng.random_range(1..5);
        let cout = rng.random_range(1..5);
        let k = rng.random_range(1..9);
        let s = rng.random_range(1..5);
        let t = rng.random_range(1..12);
        let full = (t - 1) * s + k;
        let p = rng.random_range(0..=(full - 1) / 2);
        let x = Array2::from_shape_fn((cin, t), |_| rng.random_range(-1.0f32..1.0));
        let w = Array3::from_shape_fn((cin, cout, k), |_| rng.random_range(-1.0f32..1.0));
        let b = Array1::from_shape_fn(cout, |_| rng.random_range(-1.0f32..1.0));
        let got = transposed_conv1d(x.view(), w.view(), Some(b.view()), s, p).map_err(err)?;
        worst_t = worst_t.max(max_diff(got.view(), tconv_oracle(&x, &w, &b, s, p).view())?);
    }
    ensure(worst_t <= 1e-6, || {
        format!("transposed max error {worst_t:e}")
    })?;
    Ok(format!("max errors {worst:e} / {worst_t:e}"))
}

fn resampler_fidelity() -> Check {
    let params = KaiserResampleParams::default();
    let input = sine(440.0, RATE, RATE as usize);
    let mut notes = Vec::new();
    for out_rate in [16000u32, 44100] {
        let out =
            resample_bandlimited(&input, RATE as f64, out_rate as f64, &params).map_err(err)?;
        let reference = sine(440.0, out_rate, out.len());
        let cutoff = params.rolloff * (out_rate as f64 / RATE as f64).min(1.0);
        let edge = (params.zero_crossings as f64 / cutoff * out_rate as f64 / RATE as f64).ceil()
            as usize
            + 1;
        let snr = snr_db(
            &reference[edge..out.len() - edge],
            &out[edge..out.len() - edge],
        );
        ensure(snr >= 60.0, || format!("{out_rate} Hz: SNR {snr:.1} dB"))?;
        peak_near(&out, out_rate as f64, 440.0)?;
        notes.push(format!("{out_rate} Hz SNR {snr:.1} dB"));
    }
    Ok(notes.join(", "))
}

fn wsola_pitch() -> Check {
    let n = RATE as usize;
    let input = AudioBuffer::new(sine(220.0, RATE, n), RATE).map_err(err)?;
    for f in [0.5, 0.7, 1.5, 2.0] {
        let out = wsola(&input, f, &WsolaConfig::default()).map_err(err)?;
        ensure(out.len() == round_len(n, f), || {
            format!("f={f}: length {} vs {}", out.len(), round_len(n, f))
        })?;
        peak_near(out.samples(), RATE as f64, 220.0).map_err(|e| format!("f={f}: {e}"))?;
    }
    Ok("220 Hz kept at 4 factors".into())
}

fn wsola_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = RATE as usize;
    let x: Vec<f32> = (0..n)
        .map(|i| {
            let t = i as f64 / RATE as f64;
            ((2.0 * std::f64::consts::PI * 180.0 * t).sin() * 0.5
                + (2.0 * std::f64::consts::PI * 730.0 * t).sin() * 0.3
                + rng.random_range(-0.1..0.1)) as f32
        })
        .collect();
    let input = AudioBuffer::new(x.clone(), RATE).map_err(err)?;
    let cfg = WsolaConfig {
        tolerance: 0,
        ..WsolaConfig::default()
    };
    let out = wsola(&input, 1.0, &cfg).map_err(err)?;
    ensure(out.len() == n, || format!("length {}", out.len()))?;
    let edge = cfg.frame_length;
    let snr = snr_db(&x[edge..n - edge], &out.samples()[edge..n - edge]);
    ensure(snr >= 40.0, || format!("SNR {snr:.1} dB"))?;
    Ok(format!("interior SNR {snr:.1} dB"))
}

/// Minimum path cost by enumerating every monotone path.
fn brute_force(a: &Array2<f32>, b: &Array2<f32>) -> f64 {
    fn dist(a: &Array2<f32>, b: &Array2<f32>, i: usize, j: usize) -> f64 {
        a.column(i)
            .iter()
            .zip(b.column(j))
            .map(|(x, y)| (*x as f64 - *y as f64).powi(2))
            .sum::<f64>()
            .sqrt()
    }
    fn walk(a: &Array2<f32>, b: &Array2<f32>, i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + dist(a, b, i, j);
        let (n, m) = (a.ncols(), b.ncols());
        if i + 1 == n && j + 1 == m {
            *best = best.min(acc);
            return;
        }
        if i + 1 < n && j + 1 < m {
            walk(a, b, i + 1, j + 1, acc, best);
        }
        if i + 1 < n {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < m {
            walk(a, b, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

fn mcd_fixtures() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let x = Array2::from_shape_fn((13, 30), |_| rng.random_range(-4.0f32..4.0));
    let self_d = mcd(x.view(), x.view()).map_err(err)?;
    ensure(self_d == 0.0, || format!("mcd(x, x) = {self_d}"))?;

    let a = Array2::<f32>::zeros((13, 1));
    let mut b = a.clone();
    b[[0, 0]] = 1.0;
    let unit = mcd(a.view(), b.view()).map_err(err)?;
    ensure((unit - 6.1421).abs() <= 1e-3, || {
        format!("unit case {unit}")
    })?;

    for trial in 0..500 {
        let dim = rng.random_range(1..5);
        let a = Array2::from_shape_fn((dim, rng.random_range(1..=6)), |_| {
            rng.random_range(-2.0f32..2.0)
        });
        let b = Array2::from_shape_fn((dim, rng.random_range(1..=6)), |_| {
            rng.random_range(-2.0f32..2.0)
        });
        let path = dtw_align(a.view(), b.view()).map_err(err)?;
        let best = brute_force(&a, &b);
        ensure(
            (path.total_cost - best).abs() <= 1e-9 * best.max(1.0),
            || {
                format!(
                    "trial {trial}: dtw {} vs brute force {best}",
                    path.total_cost
                )
            },
        )?;
    }
    Ok(format!("unit case {unit:.4} dB, 500 DTW trials"))
}

fn relative_variation(v: &[u64]) -> f64 {
    let max = *v.iter().max().unwrap() as f64;
    let min = *v.iter().min().unwrap() as f64;
    (max - min) / max
}

fn rtf_trend() -> Check {
    let g = default_generator(2);
    let mel = random_mel(40, 4);
    let factors = [0.5, 1.0, 2.0];
    let mut notes = Vec::new();
    for method in InterpolationMethod::ALL {
        let macs_at = |ins: InsertionPoint| -> Result<Vec<u64>, String> {
            factors
                .iter()
                .map(|&f| {
                    let spec = RateConversionSpec::new(f, ins, method);
                    g.synthesize(&mel, Some(&spec)).map(|s| s.macs).map_err(err)
                })
                .collect()
        };
        let mel_macs = macs_at(InsertionPoint::Mel)?;
        ensure(mel_macs.windows(2).all(|w| w[0] > w[1]), || {
            format!("{method}: Mel MACs not decreasing {mel_macs:?}")
        })?;
        let late_macs = macs_at(InsertionPoint::AfterBlock4)?;
        let (rv_mel, rv_late) = (
            relative_variation(&mel_macs),
            relative_variation(&late_macs),
        );
        ensure(rv_late < rv_mel, || {
            format!("{method}: AfterBlock4 variation {rv_late:.3} not below Mel {rv_mel:.3}")
        })?;

        let mut medians = Vec::new();
        for &f in &factors {
            let spec = RateConversionSpec::new(f, InsertionPoint::Mel, method);
            g.forward_with_rate(&mel, &spec).map_err(err)?;
            let mut times = Vec::new();
            for _ in 0..20 {
                let start = Instant::now();
                g.forward_with_rate(&mel, &spec).map_err(err)?;
                times.push(start.elapsed().as_secs_f64());
            }
            medians.push(median(&times));
        }
        ensure(medians.windows(2).all(|w| w[0] > w[1]), || {
            format!("{method}: wall clock not decreasing {medians:?}")
        })?;
        let spread = medians[0] / medians[2];
        ensure(spread >= 1.5, || format!("{method}: spread {spread:.2}"))?;
        notes.push(format!(
            "{method}: spread {spread:.2}x, MAC variation {rv_mel:.3} vs {rv_late:.3}"
        ));
    }
    Ok(notes.join("; "))
}

fn cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ratewarp"))
        .args(args)
        .output()
        .map_err(err)?;
    if !out.status.success() {
        return Err(format!(
            "ratewarp {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    String::from_utf8(out.stdout).map_err(err)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn mora_rate(path: &Path) -> Result<f64, String> {
    let line = cli(&["eval-rate", "--mora", "12", p(path)])?;
    let v: serde_json::Value = serde_json::from_str(line.trim()).map_err(err)?;
    v["mora_per_s"]
        .as_f64()
        .ok_or_else(|| format!("no rate in {line}"))
}

/// Vowel-like fixture: a gliding harmonic tone with a slow amplitude swell,
/// voiced from start to end.
fn voiced_fixture(seconds: f64) -> Vec<f32> {
    let n = (seconds * RATE as f64) as usize;
    let mut phase = 0.0f64;
    (0..n)
        .map(|i| {
            let t = i as f64 / RATE as f64;
            phase += 2.0 * std::f64::consts::PI * (140.0 + 30.0 * (3.0 * t).sin()) / RATE as f64;
            let env = 0.6 + 0.3 * (2.0 * std::f64::consts::PI * 2.0 * t).sin();
            let s: f64 = (1..=5).map(|h| (h as f64 * phase).sin() / h as f64).sum();
            (0.4 * env * s) as f32
        })
        .collect()
}

fn rate_after_warp() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let input = dir.path().join("in.wav");
    let fast = dir.path().join("fast.wav");
    let weights = dir.path().join("w.rwv");
    AudioBuffer::new(voiced_fixture(1.5), RATE)
        .and_then(|a| a.save_wav(&input, WavFormat::Float32))
        .map_err(err)?;
    cli(&["gen-init", "--seed", "1", "--out", p(&weights)])?;
    cli(&[
        "warp",
        "--factor",
        "2.0",
        "--insertion",
        "mel",
        "--method",
        "linear",
        "--weights",
        p(&weights),
        p(&input),
        p(&fast),
    ])?;
    let ratio = mora_rate(&fast)? / mora_rate(&input)?;
    ensure((ratio - 2.0).abs() <= 0.2, || {
        format!("rate ratio {ratio:.3}")
    })?;
    Ok(format!("rate ratio {ratio:.3}"))
}

fn cli_matrix() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let input = dir.path().join("utt.wav");
    let report = dir.path().join("report.jsonl");
    AudioBuffer::new(voiced_fixture(0.4), RATE)
        .and_then(|a| a.save_wav(&input, WavFormat::Pcm16))
        .map_err(err)?;
    cli(&["matrix", "--mora", "5", p(&input), "--out", p(&report)])?;
    let text = std::fs::read_to_string(&report).map_err(err)?;
    let lines: Vec<&str> = text.lines().collect();
    ensure(lines.len() == 77, || format!("{} lines", lines.len()))?;
    let mut seen = std::collections::BTreeSet::new();
    for line in &lines {
        let r = validate_report_line(line).map_err(|e| format!("{e}: {line}"))?;
        seen.insert((r.insertion, r.method, (r.factor * 100.0).round() as i64));
    }
    let expected = Method::all().len() * STANDARD_FACTORS.len();
    ensure(seen.len() == expected, || {
        format!("{} distinct cells", seen.len())
    })?;
    Ok("77 schema-valid lines".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("length contract matrix", length_matrix),
        ("identity factor", identity_factor),
        ("convolution oracles", conv_oracles),
        ("resampler fidelity", resampler_fidelity),
        ("wsola pitch preservation", wsola_pitch),
        ("wsola identity", wsola_identity),
        ("mcd fixtures", mcd_fixtures),
        ("cost trend over factor", rtf_trend),
        ("speaking rate after warp", rate_after_warp),
        ("cli matrix", cli_matrix),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(note) => println!("PASS {:>2} {name}: {note} ({secs:.1} s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {e} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
