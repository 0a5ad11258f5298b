use std::f64::consts::LN_10;

use ndarray::ArrayView2;

use super::dtw::{dtw_align, euclidean};
use crate::error::{Error, Result};

/// `(10 / ln 10) * sqrt(2)`, the dB scaling of mel-cepstral distortion.
pub const MCD_SCALE: f64 = 10.0 / LN_10 * std::f64::consts::SQRT_2;

/// Mel-cepstral distortion in dB between two `(coeffs, frames)` cepstra,
/// averaged over the DTW alignment path.
pub fn mcd(cep_a: ArrayView2<'_, f32>, cep_b: ArrayView2<'_, f32>) -> Result<f64> {
    if cep_a.is_empty() || cep_b.is_empty() {
        return Err(Error::Empty("MCD needs non-empty cepstra".into()));
    }
    let path = dtw_align(cep_a, cep_b)?;
    let total: f64 = path
        .pairs
        .iter()
        .map(|&(i, j)| euclidean(cep_a.column(i), cep_b.column(j)))
        .sum();
    Ok(MCD_SCALE * total / path.pairs.len() as f64)
}

/// Conversion factor `t_src / t_tgt`.
pub fn conversion_factor(t_src_seconds: f64, t_tgt_seconds: f64) -> Result<f64> {
    if !(t_src_seconds > 0.0 && t_tgt_seconds > 0.0)
        || !t_src_seconds.is_finite()
        || !t_tgt_seconds.is_finite()
    {
        return Err(Error::InvalidArgument(format!(
            "durations must be positive, got {t_src_seconds} and {t_tgt_seconds}"
        )));
    }
    Ok(t_src_seconds / t_tgt_seconds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};

    #[test]
    fn self_distance_is_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_fn((13, 20), |_| rng.random_range(-3.0f32..3.0));
        assert_eq!(mcd(x.view(), x.view()).unwrap(), 0.0);
    }

    #[test]
    fn unit_difference_in_one_coefficient() {
        let a = array![[0.0f32], [0.0], [0.0]];
        let b = array![[0.0f32], [1.0], [0.0]];
        let v = mcd(a.view(), b.view()).unwrap();
        // (10 / ln 10) * sqrt(2 * 1) evaluated by hand: 4.342944819 * 1.414213562
        assert!((v - 6.1421).abs() < 1e-3, "{v}");
    }

    #[test]
    fn symmetric_and_nonnegative() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = Array2::from_shape_fn((4, rng.random_range(1..8)), |_| {
                rng.random_range(-1.0f32..1.0)
            });
            let b = Array2::from_shape_fn((4, rng.random_range(1..8)), |_| {
                rng.random_range(-1.0f32..1.0)
            });
            let ab = mcd(a.view(), b.view()).unwrap();
            let ba = mcd(b.view(), a.view()).unwrap();
            assert!(ab > 0.0);
            assert!((ab - ba).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        let a = Array2::<f32>::zeros((3, 0));
        let b = Array2::<f32>::zeros((3, 2));
        assert!(mcd(a.view(), b.view()).is_err());
    }

    #[test]
    fn conversion_factor_examples() {
        assert_eq!(conversion_factor(3.0, 2.0).unwrap(), 1.5);
        assert_eq!(conversion_factor(2.0, 2.0).unwrap(), 1.0);
        assert_eq!(conversion_factor(1.0, 4.0).unwrap(), 0.25);
        assert!(conversion_factor(0.0, 1.0).is_err());
        assert!(conversion_factor(1.0, -1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn equal_durations_give_unit_factor(t in 1e-3f64..1e4) {
            proptest::prop_assert_eq!(conversion_factor(t, t).unwrap(), 1.0);
        }
    }
}
