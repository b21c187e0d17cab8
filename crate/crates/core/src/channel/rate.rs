use super::RadioConfig;

/// Log10 of the throughput floor (1 kbit/s expressed in Mbit/s).
pub const RATE_FLOOR_LOG10_MBPS: f64 = -3.0;

/// Capacity-based effective SINR: the SINR whose Shannon capacity equals
/// the mean per-RB capacity.
pub fn effective_sinr(per_rb: &[f64]) -> f64 {
    debug_assert!(!per_rb.is_empty());
    let mean_bits = per_rb.iter().map(|g| g.ln_1p()).sum::<f64>() / per_rb.len() as f64 / std::f64::consts::LN_2;
    mean_bits.exp2() - 1.0
}

/// Round-robin full-buffer throughput of one UE (bit/s).
pub fn ue_throughput(effective: f64, cfg: &RadioConfig, n_ue_sched: usize) -> f64 {
    debug_assert!(n_ue_sched >= 1);
    let rbs = cfg.num_rb as f64;
    rbs * cfg.rb_bandwidth_hz() / n_ue_sched as f64 * effective.ln_1p() / std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairRate {
    pub value: f64,
    /// UEs whose non-positive rate was replaced by the floor.
    pub floored: usize,
}

/// Sum of log10 throughputs in Mbit/s over every serving group.
pub fn fair_rate<'a, I>(groups: I) -> FairRate
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut value = 0.0;
    let mut floored = 0;
    for rate in groups.into_iter().flatten() {
        if *rate > 0.0 {
            value += (rate / 1e6).log10();
        } else {
            value += RATE_FLOOR_LOG10_MBPS;
            floored += 1;
        }
    }
    FairRate { value, floored }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn esm_fixed_point_and_closed_form() {
        assert!((effective_sinr(&[7.0; 5]) - 7.0).abs() < 1e-12);
        assert!((effective_sinr(&[0.0, 3.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn throughput_examples() {
        let cfg = RadioConfig {
            num_rb: 1,
            total_bw_hz: 1.0,
            ..RadioConfig::default()
        };
        assert!((ue_throughput(3.0, &cfg, 1) - 2.0).abs() < 1e-12);
        assert_eq!(ue_throughput(0.0, &cfg, 1), 0.0);
        let full = RadioConfig::default();
        let r10 = ue_throughput(5.0, &full, 10);
        let r5 = ue_throughput(5.0, &full, 5);
        assert!((r5 - 2.0 * r10).abs() < 1e-6);
    }

    #[test]
    fn fair_rate_examples() {
        let two = [10e6, 100e6];
        assert!((fair_rate([&two[..]]).value - 3.0).abs() < 1e-12);
        assert!(fair_rate([&[1e6][..]]).value.abs() < 1e-12);
        let thirty = vec![46.4e6; 30];
        let v = fair_rate([&thirty[..10], &thirty[10..20], &thirty[20..]]).value;
        assert!((v - 50.0).abs() < 0.01, "{v}");
    }

    #[test]
    fn non_positive_rate_hits_floor() {
        let f = fair_rate([&[0.0, 1e6][..]]);
        assert_eq!(f.value, -3.0);
        assert_eq!(f.floored, 1);
    }

    proptest! {
        #[test]
        fn esm_sandwich(v in prop::collection::vec(0.0f64..1e4, 1..30)) {
            let eff = effective_sinr(&v);
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(0.0, f64::max);
            prop_assert!(eff >= lo * (1.0 - 1e-12) - 1e-12 && eff <= hi * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn fair_rate_increases_with_any_rate(v in prop::collection::vec(1e3f64..1e9, 1..30), idx in 0usize..30, bump in 1e-3f64..10.0) {
            let i = idx % v.len();
            let mut w = v.clone();
            w[i] *= 1.0 + bump;
            prop_assert!(fair_rate([&w[..]]).value > fair_rate([&v[..]]).value);
        }
    }
}
