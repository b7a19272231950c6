//! Additive complex white noise for robustness experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::forward::FarFieldTensor;
use crate::Complex;

/// Adds circular complex Gaussian noise whose power is the tensor's mean
/// power divided by `10^(snr_db/10)`. Entries are perturbed in storage order
/// from a ChaCha8 stream seeded with `seed`.
pub fn add_noise(tensor: &FarFieldTensor, snr_db: f64, seed: u64) -> Result<FarFieldTensor> {
    if !snr_db.is_finite() {
        return invalid("SNR must be finite");
    }
    let values = tensor.values();
    let power = values.iter().map(|v| v.norm_sqr()).sum::<f64>() / values.len() as f64;
    let sigma = (0.5 * power / 10f64.powf(snr_db / 10.0)).sqrt();
    if sigma == 0.0 {
        return Ok(tensor.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| crate::DsmError::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = values
        .iter()
        .map(|v| v + Complex::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    FarFieldTensor::from_values(tensor.config().clone(), noisy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::AcquisitionConfig;

    fn tensor() -> FarFieldTensor {
        let c = AcquisitionConfig::new(vec![2.0], 4000, vec![0.0]).unwrap();
        let v = (0..4000).map(|i| Complex::from_polar(2.0, i as f64)).collect();
        FarFieldTensor::from_values(c, v).unwrap()
    }

    #[test]
    fn noise_power_matches_snr() {
        let t = tensor();
        let noisy = add_noise(&t, 10.0, 7).unwrap();
        let p: f64 = noisy
            .values()
            .iter()
            .zip(t.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / 4000.0;
        // signal power 4, so noise power 0.4 up to sampling error
        assert!((p - 0.4).abs() < 0.04, "{p}");
    }

    #[test]
    fn seeded_and_deterministic() {
        let t = tensor();
        assert_eq!(add_noise(&t, 20.0, 3).unwrap(), add_noise(&t, 20.0, 3).unwrap());
        assert_ne!(add_noise(&t, 20.0, 3).unwrap(), add_noise(&t, 20.0, 4).unwrap());
        let zero = FarFieldTensor::zeros(t.config().clone());
        assert_eq!(add_noise(&zero, 20.0, 3).unwrap(), zero);
        assert!(add_noise(&t, f64::NAN, 3).is_err());
    }
}
