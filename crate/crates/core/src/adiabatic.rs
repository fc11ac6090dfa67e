//! Closed-form adiabatic dissipation: switching plus leakage losses.

use crate::error::{contract, Result};

/// Timescale ratio `τ_e/τ_r` below which the efficiency bound is flagged.
pub const REGIME_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticParams {
    e_sig: f64,
    tau_r: f64,
    tau_e: f64,
    c_sw: f64,
    c_lk: f64,
}

impl AdiabaticParams {
    pub fn new(e_sig: f64, tau_r: f64, tau_e: f64, c_sw: f64, c_lk: f64) -> Result<Self> {
        for (name, v) in [("e_sig", e_sig), ("tau_r", tau_r), ("tau_e", tau_e), ("c_sw", c_sw), ("c_lk", c_lk)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(contract(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { e_sig, tau_r, tau_e, c_sw, c_lk })
    }

    pub fn e_sig(&self) -> f64 {
        self.e_sig
    }

    pub fn tau_r(&self) -> f64 {
        self.tau_r
    }

    pub fn tau_e(&self) -> f64 {
        self.tau_e
    }

    /// `τ'_r = c_sw·τ_r`.
    pub fn adjusted_tau_r(&self) -> f64 {
        self.c_sw * self.tau_r
    }

    /// `τ'_e = τ_e/c_lk`.
    pub fn adjusted_tau_e(&self) -> f64 {
        self.tau_e / self.c_lk
    }

    /// Whether `τ'_r < τ'_e`, the regime where slowing down helps.
    pub fn in_asymptotic_regime(&self) -> bool {
        self.adjusted_tau_r() < self.adjusted_tau_e()
    }

    /// Whether `t_tr` lies outside `(τ_r, τ_e)`, where the model is extrapolated.
    pub fn outside_validity(&self, t_tr: f64) -> bool {
        !(self.tau_r < t_tr && t_tr < self.tau_e)
    }
}

fn check_time(t_tr: f64) -> Result<()> {
    if !t_tr.is_finite() || t_tr <= 0.0 {
        return Err(contract(format!("transition time must be finite and > 0, got {t_tr}")));
    }
    Ok(())
}

/// `E_sig·τ'_r/t_tr`.
pub fn e_switch(p: &AdiabaticParams, t_tr: f64) -> Result<f64> {
    check_time(t_tr)?;
    Ok(p.e_sig * p.adjusted_tau_r() / t_tr)
}

/// `E_sig·t_tr/τ'_e`.
pub fn e_leak(p: &AdiabaticParams, t_tr: f64) -> Result<f64> {
    check_time(t_tr)?;
    Ok(p.e_sig * t_tr / p.adjusted_tau_e())
}

pub fn e_diss(p: &AdiabaticParams, t_tr: f64) -> Result<f64> {
    Ok(e_switch(p, t_tr)? + e_leak(p, t_tr)?)
}

/// `√(τ'_r τ'_e)`.
pub fn optimal_ttr(p: &AdiabaticParams) -> f64 {
    (p.adjusted_tau_r() * p.adjusted_tau_e()).sqrt()
}

/// `2·E_sig·√(τ'_r/τ'_e)`.
pub fn min_e_diss(p: &AdiabaticParams) -> f64 {
    2.0 * p.e_sig * (p.adjusted_tau_r() / p.adjusted_tau_e()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyBound {
    pub value: f64,
    /// `τ_e/τ_r < 10`: outside the regime the bound describes.
    pub flagged: bool,
}

/// `1 − c·√(τ_r/τ_e)`.
pub fn efficiency_bound(p: &AdiabaticParams, c: f64) -> EfficiencyBound {
    EfficiencyBound { value: 1.0 - c * (p.tau_r / p.tau_e).sqrt(), flagged: p.tau_e / p.tau_r < REGIME_RATIO }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub t_tr: f64,
    pub e_sw: f64,
    pub e_lk: f64,
    pub e_diss: f64,
}

/// Log-spaced grid from `t_min` to `t_max` inclusive.
pub fn sweep(p: &AdiabaticParams, t_min: f64, t_max: f64, n_points: usize) -> Result<Vec<SweepRow>> {
    check_time(t_min)?;
    check_time(t_max)?;
    if t_min >= t_max && n_points > 1 {
        return Err(contract(format!("sweep needs t_min < t_max, got {t_min} and {t_max}")));
    }
    if n_points == 0 {
        return Err(contract("sweep needs at least one point"));
    }
    let (lo, hi) = (t_min.ln(), t_max.ln());
    (0..n_points)
        .map(|k| {
            let t_tr = if n_points == 1 { t_min } else { (lo + (hi - lo) * k as f64 / (n_points - 1) as f64).exp() };
            let e_sw = e_switch(p, t_tr)?;
            let e_lk = e_leak(p, t_tr)?;
            Ok(SweepRow { t_tr, e_sw, e_lk, e_diss: e_sw + e_lk })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_params(rng: &mut impl Rng) -> AdiabaticParams {
        let log = |rng: &mut dyn rand::RngCore, lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
        let tau_r = log(rng, -3.0, 0.0);
        AdiabaticParams::new(
            log(rng, -2.0, 2.0),
            tau_r,
            tau_r * log(rng, 1.0, 4.0),
            rng.random_range(0.2..5.0),
            rng.random_range(0.2..5.0),
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(AdiabaticParams::new(1.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(AdiabaticParams::new(1.0, 1.0, 1.0, f64::NAN, 1.0).is_err());
        let p = AdiabaticParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(e_diss(&p, 0.0).is_err());
        assert!(e_diss(&p, -1.0).is_err());
        assert!(sweep(&p, 2.0, 1.0, 5).is_err());
    }

    #[test]
    fn symmetric_point() {
        let p = AdiabaticParams::new(3.0, 2.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(e_diss(&p, 2.0).unwrap(), 6.0);
        assert_eq!(optimal_ttr(&p), 2.0);
        assert_eq!(min_e_diss(&p), 6.0);
        assert!(!p.in_asymptotic_regime());
        let far = e_diss(&p, 1e6).unwrap();
        assert!((far / 1e6 - 3.0 / 2.0).abs() < 1e-6);
    }

    #[test]
    fn adjusted_timescales() {
        let p = AdiabaticParams::new(1.0, 2.0, 30.0, 1.5, 3.0).unwrap();
        assert_eq!(p.adjusted_tau_r(), 3.0);
        assert_eq!(p.adjusted_tau_e(), 10.0);
        assert!(p.in_asymptotic_regime());
        assert!(p.outside_validity(1.0) && !p.outside_validity(5.0) && p.outside_validity(40.0));
    }

    #[test]
    fn direct_formula_and_optimum() {
        let mut rng = crate::testutil::rng(101);
        for _ in 0..100 {
            let p = random_params(&mut rng);
            let t = 10f64.powf(rng.random_range(-4.0..2.0));
            let (r, e) = (p.c_sw * p.tau_r, p.tau_e / p.c_lk);
            let oracle = p.e_sig * r / t + p.e_sig * t / e;
            assert!((e_diss(&p, t).unwrap() - oracle).abs() <= 1e-12 * oracle);
            let opt = optimal_ttr(&p);
            let (sw, lk) = (e_switch(&p, opt).unwrap(), e_leak(&p, opt).unwrap());
            assert!((sw - lk).abs() <= 1e-12 * sw);
            assert!((e_diss(&p, opt).unwrap() - min_e_diss(&p)).abs() <= 1e-12 * min_e_diss(&p));
        }
    }

    #[test]
    fn grid_search_brackets_optimum() {
        let mut rng = crate::testutil::rng(102);
        for _ in 0..20 {
            let p = random_params(&mut rng);
            let opt = optimal_ttr(&p);
            let rows = sweep(&p, opt * 1e-3, opt * 1e3, 10_000).unwrap();
            let best = rows.iter().min_by(|a, b| a.e_diss.total_cmp(&b.e_diss)).unwrap();
            assert!((best.t_tr - opt).abs() <= 0.005 * opt);
            assert!(best.e_diss >= min_e_diss(&p) * (1.0 - 1e-12));
            for r in &rows {
                assert_eq!(r.e_diss, r.e_sw + r.e_lk);
            }
        }
    }

    #[test]
    fn square_root_scaling() {
        let p = AdiabaticParams::new(1.0, 1.0, 100.0, 1.0, 1.0).unwrap();
        let q = AdiabaticParams::new(1.0, 1.0, 400.0, 1.0, 1.0).unwrap();
        assert!((optimal_ttr(&q) - 2.0 * optimal_ttr(&p)).abs() < 1e-12);
        assert!((min_e_diss(&q) - 0.5 * min_e_diss(&p)).abs() < 1e-15);
    }

    #[test]
    fn convex_in_log_time() {
        let p = AdiabaticParams::new(1.0, 0.01, 10.0, 1.0, 1.0).unwrap();
        let rows = sweep(&p, 1e-4, 1e3, 200).unwrap();
        for w in rows.windows(3) {
            assert!(w[0].e_diss - 2.0 * w[1].e_diss + w[2].e_diss >= -1e-12 * w[1].e_diss);
        }
    }

    #[test]
    fn efficiency_examples() {
        let p = AdiabaticParams::new(1.0, 1e-6, 1.0, 1.0, 1.0).unwrap();
        let b = efficiency_bound(&p, 1.0);
        assert!((b.value - 0.999).abs() < 1e-12);
        assert!(!b.flagged);
        assert_eq!(efficiency_bound(&p, 0.0).value, 1.0);
        let near = AdiabaticParams::new(1.0, 1e-30, 1.0, 1.0, 1.0).unwrap();
        assert!((efficiency_bound(&near, 1.0).value - 1.0).abs() < 1e-14);
        assert!(efficiency_bound(&AdiabaticParams::new(1.0, 1.0, 5.0, 1.0, 1.0).unwrap(), 1.0).flagged);
    }

    #[test]
    fn single_point_sweep() {
        let p = AdiabaticParams::new(1.0, 1.0, 4.0, 1.0, 1.0).unwrap();
        let rows = sweep(&p, 2.0, 8.0, 1).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].t_tr, 2.0);
        let rows = sweep(&p, 1.0, 100.0, 3).unwrap();
        assert!((rows[1].t_tr - 10.0).abs() < 1e-12 && (rows[2].t_tr - 100.0).abs() < 1e-12);
    }
}
