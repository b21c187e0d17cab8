use super::RadioConfig;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_1_SQRT_2;

/// One unit-power Rician coefficient with line-of-sight phase `los_phase`.
pub fn rician_sample<R: Rng + ?Sized>(cfg: &RadioConfig, rng: &mut R, los_phase: f64) -> Complex64 {
    let k = cfg.rician_k_linear();
    let (los_w, nlos_w) = if k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k / (1.0 + k)).sqrt(), (1.0 / (1.0 + k)).sqrt())
    };
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let scattered = Complex64::new(re, im) * FRAC_1_SQRT_2;
    Complex64::from_polar(los_w, los_phase) + scattered * nlos_w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn mean_power(k_db: f64, n: usize) -> f64 {
        let cfg = RadioConfig {
            rician_k_db: k_db,
            ..RadioConfig::default()
        };
        let mut rng = stream(21, Stream::Fading);
        (0..n)
            .map(|i| rician_sample(&cfg, &mut rng, i as f64 * 0.37).norm_sqr())
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn pure_los_has_unit_modulus() {
        let cfg = RadioConfig {
            rician_k_db: f64::INFINITY,
            ..RadioConfig::default()
        };
        let mut rng = stream(1, Stream::Fading);
        for i in 0..100 {
            let h = rician_sample(&cfg, &mut rng, i as f64);
            assert!((h.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_power_for_rayleigh_and_rician() {
        for k_db in [f64::NEG_INFINITY, 10.0] {
            let p = mean_power(k_db, 1_000_000);
            assert!((p - 1.0).abs() < 0.01, "k={k_db} p={p}");
        }
    }
}
