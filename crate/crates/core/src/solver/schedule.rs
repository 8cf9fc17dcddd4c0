use super::SolverConfig;

/// `γ_k = γ0 · β^⌊k/κ1⌋`.
pub fn lr_schedule(k: usize, cfg: &SolverConfig) -> f64 {
    cfg.gamma0 * cfg.beta.powi((k / cfg.kappa1) as i32)
}

/// `l_k = round(l0 · ζ^⌊k/κ2⌋)`, rounding half away from zero.
pub fn loop_schedule(k: usize, cfg: &SolverConfig) -> usize {
    (cfg.l0 as f64 * cfg.zeta.powi((k / cfg.kappa2) as i32)).round() as usize
}

/// `μ_k = exp(−(max{0, k − κ3}/λ)²)`.
pub fn weight_schedule(k: usize, cfg: &SolverConfig) -> f64 {
    let excess = k.saturating_sub(cfg.kappa3) as f64 / cfg.lambda;
    (-(excess * excess)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_schedules() {
        let c = SolverConfig::default();
        assert_eq!(lr_schedule(0, &c), 0.005);
        assert_eq!(lr_schedule(499, &c), 0.005);
        assert_eq!(lr_schedule(500, &c), 0.0025);
        assert_eq!(lr_schedule(1234, &c), 0.00125);
        assert_eq!(loop_schedule(0, &c), 5);
        assert_eq!(loop_schedule(500, &c), 6);
        assert_eq!(loop_schedule(1000, &c), 7);
        assert_eq!(weight_schedule(0, &c), 1.0);
        assert_eq!(weight_schedule(1000, &c), 1.0);
        assert!((weight_schedule(1010, &c) - 0.367_879_44).abs() < 1e-8);
        assert!((weight_schedule(1020, &c) - 0.018_315_64).abs() < 1e-8);
    }

    #[test]
    fn schedules_are_monotone() {
        let c = SolverConfig::default();
        for k in 0..3000 {
            assert!(lr_schedule(k + 1, &c) <= lr_schedule(k, &c));
            assert!(loop_schedule(k + 1, &c) >= loop_schedule(k, &c));
            let (a, b) = (weight_schedule(k, &c), weight_schedule(k + 1, &c));
            if k >= c.kappa3 && b > 0.0 {
                assert!(b < a);
            } else {
                assert!(b <= a);
            }
        }
    }
}
