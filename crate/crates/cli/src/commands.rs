use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use ratewarp_core::eval::{measure_rtf, speaking_rate, EvalReport, RtfReport, VadConfig};
use ratewarp_core::pipeline::{self, cepstral_distortion, mel_config_for, Method, MCD_COEFFS};
use ratewarp_core::{
    mcd, mel_cepstrum, resample_bandlimited, voiced_duration, wsola, AudioBuffer, Generator,
    GeneratorConfig, KaiserResampleParams, MelConfig, RateConversionSpec, WeightStore, WsolaConfig,
};
use rayon::prelude::*;
use serde_json::json;

use crate::args::*;
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

pub fn check_factor(f: f64) -> Result<f64> {
    let (lo, hi) = FACTOR_RANGE;
    if f.is_finite() && (lo..=hi).contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!(
            "factor {f} is outside [{lo}, {hi}]"
        )))
    }
}

fn generator(args: &WeightsArgs) -> Result<Generator> {
    let store = match &args.weights {
        Some(path) => WeightStore::load(path)?,
        None => WeightStore::init_random(&GeneratorConfig::default(), args.seed)?,
    };
    Ok(Generator::new(store)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })
}

/// Writes lines to `path`, or to standard output.
fn emit_lines(path: Option<&Path>, lines: &[String]) -> Result<()> {
    let write = |w: &mut dyn Write| -> io::Result<()> {
        for l in lines {
            writeln!(w, "{l}")?;
        }
        w.flush()
    };
    match path {
        Some(p) => write(&mut create(p)?).map_err(|e| CliError::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => write(&mut io::stdout().lock()).map_err(|e| CliError::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

pub fn wsola_cmd(a: WsolaArgs) -> Result<()> {
    let factor = check_factor(a.factor)?;
    let cfg = WsolaConfig {
        frame_length: a.frame_length,
        synthesis_hop: a.synthesis_hop.unwrap_or(a.frame_length / 2),
        tolerance: a.tolerance,
    };
    let input = AudioBuffer::load_wav(&a.input)?;
    let out = wsola(&input, factor, &cfg)?;
    out.save_wav(&a.output, a.format.into())?;
    Ok(())
}

pub fn warp_cmd(a: WarpArgs) -> Result<()> {
    let factor = check_factor(a.factor)?;
    let g = generator(&a.weights)?;
    let input = AudioBuffer::load_wav(&a.input)?;
    let mel = pipeline::analyze(&input, &mel_config_for(g.config()))?;
    let spec = RateConversionSpec::new(factor, a.insertion, a.method);
    let out = g.forward_with_rate(&mel, &spec)?;
    out.save_wav(&a.output, a.format.into())?;
    Ok(())
}

pub fn resample_cmd(a: ResampleArgs) -> Result<()> {
    if a.rate == 0 {
        return Err(CliError::Usage("target rate must be positive".into()));
    }
    let input = AudioBuffer::load_wav(&a.input)?;
    let samples = resample_bandlimited(
        input.samples(),
        input.sample_rate_hz() as f64,
        a.rate as f64,
        &KaiserResampleParams::default(),
    )?;
    AudioBuffer::new(samples, a.rate)?.save_wav(&a.output, a.format.into())?;
    Ok(())
}

pub fn mel_cmd(a: MelArgs) -> Result<()> {
    let cfg = MelConfig::default();
    let input = AudioBuffer::load_wav(&a.input)?;
    let mel = pipeline::analyze(&input, &cfg)?;
    let rows: Vec<Vec<f32>> = mel.data().rows().into_iter().map(|r| r.to_vec()).collect();
    let doc = json!({
        "sample_rate_hz": mel.config().sample_rate_hz,
        "hop_length": mel.config().hop_length,
        "n_mels": mel.n_mels(),
        "n_frames": mel.n_frames(),
        "data": rows,
    });
    emit_lines(a.out.as_deref(), &[doc.to_string()])
}

pub fn gen_init_cmd(a: GenInitArgs) -> Result<()> {
    let cfg = GeneratorConfig {
        base_channels: a.base_channels,
        ..GeneratorConfig::default()
    };
    WeightStore::init_random(&cfg, a.seed)?.save(&a.out)?;
    Ok(())
}

pub fn eval_mcd_cmd(a: EvalMcdArgs) -> Result<()> {
    let r = AudioBuffer::load_wav(&a.reference)?;
    let c = AudioBuffer::load_wav(&a.converted)?;
    let v = cepstral_distortion(&r, &c, &MelConfig::default())?;
    emit_lines(None, &[json!({ "mcd_db": v }).to_string()])
}

fn rtf_for(
    g: &Generator,
    mel: &ratewarp_core::MelSpectrogram,
    method: Method,
    factor: f64,
    repeats: usize,
) -> Result<(RtfReport, AudioBuffer)> {
    let len = pipeline::output_len(g.config(), mel.n_frames(), method, factor);
    let seconds = len as f64 / mel.config().sample_rate_hz as f64;
    let wsola_cfg = WsolaConfig::default();
    Ok(measure_rtf(
        || pipeline::convert(g, mel, method, factor, &wsola_cfg),
        seconds,
        repeats,
    )?)
}

pub fn eval_rtf_cmd(a: EvalRtfArgs) -> Result<()> {
    let factor = check_factor(a.factor)?;
    let g = generator(&a.weights)?;
    let input = AudioBuffer::load_wav(&a.input)?;
    let mel = pipeline::analyze(&input, &mel_config_for(g.config()))?;
    let mut lines = Vec::new();
    for method in Method::all() {
        let (r, _) = rtf_for(&g, &mel, method, factor, a.repeats)?;
        lines.push(
            json!({
                "factor": factor,
                "insertion": method.insertion_label(),
                "method": method.method_label(),
                "rtf": r.rtf,
                "generation_s": r.generation_seconds,
                "conversion_s": r.conversion_seconds,
                "audio_s": r.audio_seconds,
            })
            .to_string(),
        );
    }
    emit_lines(None, &lines)
}

fn read_mora(path: &Path) -> Result<u32> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.trim().parse().map_err(|_| {
        CliError::Data(format!(
            "{}: mora count is not a positive integer",
            path.display()
        ))
    })
}

fn sidecar(wav: &Path) -> PathBuf {
    wav.with_extension("mora")
}

fn rate_line(wav: &Path, mora: u32, extra: serde_json::Value) -> Result<String> {
    let audio = AudioBuffer::load_wav(wav)?;
    let r = speaking_rate(mora, &audio, &VadConfig::default())?;
    let mut v = json!({
        "path": wav.display().to_string(),
        "mora_count": r.mora_count,
        "voiced_s": r.voiced_seconds,
        "mora_per_s": r.mora_per_second,
    });
    if let (Some(obj), Some(more)) = (v.as_object_mut(), extra.as_object()) {
        obj.extend(more.clone());
    }
    Ok(v.to_string())
}

fn sorted_dir(path: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    v.sort();
    Ok(v)
}

pub fn eval_rate_cmd(a: EvalRateArgs) -> Result<()> {
    if !a.path.is_dir() {
        let mora = match a.mora {
            Some(m) => m,
            None => read_mora(&sidecar(&a.path))?,
        };
        return emit_lines(None, &[rate_line(&a.path, mora, json!({}))?]);
    }
    // <root>/<speaker>/<slow|normal|fast>/<utt>.wav
    let mut lines = Vec::new();
    for speaker in sorted_dir(&a.path)?.into_iter().filter(|p| p.is_dir()) {
        for rate in ["slow", "normal", "fast"] {
            let dir = speaker.join(rate);
            if !dir.is_dir() {
                continue;
            }
            for wav in sorted_dir(&dir)?
                .into_iter()
                .filter(|p| p.extension().is_some_and(|e| e == "wav"))
            {
                let mora = read_mora(&sidecar(&wav))?;
                let extra = json!({
                    "speaker": speaker.file_name().map(|s| s.to_string_lossy().into_owned()),
                    "rate": rate,
                    "utterance": wav.file_stem().map(|s| s.to_string_lossy().into_owned()),
                });
                lines.push(rate_line(&wav, mora, extra)?);
            }
        }
    }
    emit_lines(None, &lines)
}

fn matrix_threads() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var("RATEWARP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .map_or(available, |n| n.min(available).max(1))
}

pub fn matrix_cmd(a: MatrixArgs) -> Result<()> {
    if a.factors.is_empty() {
        return Err(CliError::Usage("at least one factor is required".into()));
    }
    let factors = a
        .factors
        .iter()
        .map(|&f| check_factor(f))
        .collect::<Result<Vec<_>>>()?;
    if a.repeats == 0 {
        return Err(CliError::Usage("repeats must be at least 1".into()));
    }
    let g = generator(&a.weights)?;
    let mel_cfg = mel_config_for(g.config());
    let input = AudioBuffer::load_wav(&a.input)?;
    let reference = match &a.reference {
        Some(p) => AudioBuffer::load_wav(p)?,
        None => input.clone(),
    };
    let mora = match a.mora {
        Some(m) => Some(m),
        None => {
            let side = sidecar(&a.input);
            if side.exists() {
                Some(read_mora(&side)?)
            } else {
                None
            }
        }
    };
    let mel = pipeline::analyze(&input, &mel_cfg)?;
    let ref_cep = mel_cepstrum(&pipeline::analyze(&reference, &mel_cfg)?, MCD_COEFFS)?;

    // Timing runs one job at a time.
    let mut timed = Vec::new();
    for method in Method::all() {
        for &factor in &factors {
            let (report, audio) = rtf_for(&g, &mel, method, factor, a.repeats)?;
            timed.push((method, factor, report, audio));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(matrix_threads())
        .build()
        .map_err(|e| CliError::Data(format!("thread pool: {e}")))?;
    let vad = VadConfig::default();
    let lines: Vec<String> = pool.install(|| {
        timed
            .par_iter()
            .map(|(method, factor, r, audio)| -> Result<String> {
                let cep = mel_cepstrum(&pipeline::analyze(audio, &mel_cfg)?, MCD_COEFFS)?;
                let mcd_db = mcd(cep.view(), ref_cep.view())?;
                let mora_per_s = match mora {
                    Some(m) if voiced_duration(audio, &vad)? > 0.0 => {
                        Some(speaking_rate(m, audio, &vad)?.mora_per_second)
                    }
                    _ => None,
                };
                Ok(EvalReport {
                    mcd_db,
                    rtf: r.rtf,
                    generation_s: r.generation_seconds,
                    conversion_s: r.conversion_seconds,
                    mora_per_s,
                    factor: *factor,
                    insertion: method.insertion_label().to_string(),
                    method: method.method_label().to_string(),
                }
                .to_json_line())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    emit_lines(a.out.as_deref(), &lines)
}
