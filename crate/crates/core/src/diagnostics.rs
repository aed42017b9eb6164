//! Finite-difference verification of the field equations.
//!
//! The four posterior fields satisfy, on `(0,∞) × ℝ` (respectively the
//! support interval for `Ψ`):
//!
//! - `∂F + ½ D²F = 0` — backwards heat equation;
//! - `∂G + ½ D²G + G·DG = 0` — backwards Burgers equation;
//! - `∂H + ½ D²H + G·DH + H² = 0`;
//! - `∂Ψ + Ψ²(1 + ½ D²Ψ) = 0`, with `∂Ψ ≤ 0` and hence `D²Ψ ≥ −2`.
//!
//! (`∂` is the time derivative, `D` the spatial one.)  This module measures
//! the residuals of central finite differences on an evaluation grid; the
//! implementation being checked only supplies point values of `F`, `G`, `H`,
//! `Ψ`, so the differential operators act as an independent oracle.

use serde::{Deserialize, Serialize};

use crate::prior::PriorMeasure;
use crate::widder::{self, WidderError, WidderPoint};

/// Evaluation window used by the verification suites.
pub const THETA_RANGE: (f64, f64) = (0.1, 3.0);
pub const ZETA_RANGE: (f64, f64) = (-2.0, 2.0);

/// Worst-case residuals over the evaluation grid.
///
/// `max_rel_*` are residuals normalized by the largest participating term
/// (floored at one).  The two sign fields report the extremes of the
/// monotonicity constraints on `Ψ`; `min_g_increment` is the smallest forward
/// difference of `ζ ↦ G` (strict monotonicity), and `max_h_vs_dg_rel` the
/// worst relative gap between `H` and the finite-difference `DG`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PdeResidualReport {
    pub max_rel_heat: f64,
    pub max_rel_burgers: f64,
    pub max_rel_variance: f64,
    pub max_rel_psi: f64,
    pub max_dtheta_psi: f64,
    pub min_d2x_psi: f64,
    pub min_g_increment: f64,
    pub max_h_vs_dg_rel: f64,
}

fn rel_residual(terms: &[f64]) -> f64 {
    let sum: f64 = terms.iter().sum();
    let scale = terms.iter().fold(1.0_f64, |m, t| m.max(t.abs()));
    sum.abs() / scale
}

/// Evaluates all residuals for `mu` on an `n_theta × n_zeta` grid of
/// [`THETA_RANGE`] × [`ZETA_RANGE`], with finite-difference step `step`.
pub fn pde_residual_report(
    mu: &PriorMeasure,
    n_theta: usize,
    n_zeta: usize,
    step: f64,
) -> Result<PdeResidualReport, WidderError> {
    let h = step;
    let f = |theta: f64, zeta: f64| widder::transform_f(mu, WidderPoint { theta, zeta });
    let g = |theta: f64, zeta: f64| widder::posterior_mean_g(mu, WidderPoint { theta, zeta });
    let hh = |theta: f64, zeta: f64| widder::posterior_var_h(mu, WidderPoint { theta, zeta });
    let psi = |theta: f64, x: f64| widder::psi(mu, theta, x);

    let mut report = PdeResidualReport {
        max_rel_heat: 0.0,
        max_rel_burgers: 0.0,
        max_rel_variance: 0.0,
        max_rel_psi: 0.0,
        max_dtheta_psi: f64::NEG_INFINITY,
        min_d2x_psi: f64::INFINITY,
        min_g_increment: f64::INFINITY,
        max_h_vs_dg_rel: 0.0,
    };

    for i in 0..n_theta {
        let theta =
            THETA_RANGE.0 + (THETA_RANGE.1 - THETA_RANGE.0) * i as f64 / (n_theta - 1) as f64;
        for j in 0..n_zeta {
            let zeta =
                ZETA_RANGE.0 + (ZETA_RANGE.1 - ZETA_RANGE.0) * j as f64 / (n_zeta - 1) as f64;

            // backwards heat equation for F
            let (fc, fp, fm) = (f(theta, zeta)?, f(theta + h, zeta)?, f(theta - h, zeta)?);
            let (fzp, fzm) = (f(theta, zeta + h)?, f(theta, zeta - h)?);
            let df_dt = (fp - fm) / (2.0 * h);
            let d2f = (fzp - 2.0 * fc + fzm) / (h * h);
            report.max_rel_heat = report.max_rel_heat.max(rel_residual(&[df_dt, 0.5 * d2f]));

            // backwards Burgers equation for G
            let (gc, gp, gm) = (g(theta, zeta)?, g(theta + h, zeta)?, g(theta - h, zeta)?);
            let (gzp, gzm) = (g(theta, zeta + h)?, g(theta, zeta - h)?);
            let dg_dt = (gp - gm) / (2.0 * h);
            let d2g = (gzp - 2.0 * gc + gzm) / (h * h);
            let dg_dz = (gzp - gzm) / (2.0 * h);
            report.max_rel_burgers = report
                .max_rel_burgers
                .max(rel_residual(&[dg_dt, 0.5 * d2g, gc * dg_dz]));

            // the variance field equation
            let (hc, hp, hm) = (hh(theta, zeta)?, hh(theta + h, zeta)?, hh(theta - h, zeta)?);
            let (hzp, hzm) = (hh(theta, zeta + h)?, hh(theta, zeta - h)?);
            let dh_dt = (hp - hm) / (2.0 * h);
            let d2h = (hzp - 2.0 * hc + hzm) / (h * h);
            let dh_dz = (hzp - hzm) / (2.0 * h);
            report.max_rel_variance = report
                .max_rel_variance
                .max(rel_residual(&[dh_dt, 0.5 * d2h, gc * dh_dz, hc * hc]));

            // H = DG at the quadrature level
            let rel_gap = (dg_dz - hc).abs() / hc.abs().max(1e-30);
            report.max_h_vs_dg_rel = report.max_h_vs_dg_rel.max(rel_gap);

            // strict monotonicity of ζ ↦ G
            let g_fwd = g(theta, zeta + 1e-3)?;
            report.min_g_increment = report.min_g_increment.min(g_fwd - gc);

            // Ψ equation at x = G(θ,ζ), which stays strictly inside the support
            let x = gc;
            let (pc, pp, pm) = (psi(theta, x)?, psi(theta + h, x)?, psi(theta - h, x)?);
            let (pxp, pxm) = (psi(theta, x + h)?, psi(theta, x - h)?);
            let dpsi_dt = (pp - pm) / (2.0 * h);
            let d2psi = (pxp - 2.0 * pc + pxm) / (h * h);
            report.max_rel_psi = report
                .max_rel_psi
                .max(rel_residual(&[dpsi_dt, pc * pc * (1.0 + 0.5 * d2psi)]));
            report.max_dtheta_psi = report.max_dtheta_psi.max(dpsi_dt);
            report.min_d2x_psi = report.min_d2x_psi.min(d2psi);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_fields_satisfy_their_equations() {
        let mu = PriorMeasure::gaussian(0.3, 1.7).unwrap();
        let r = pde_residual_report(&mu, 6, 9, 1e-4).unwrap();
        assert!(r.max_rel_heat < 1e-4, "heat: {}", r.max_rel_heat);
        assert!(r.max_rel_burgers < 1e-4, "burgers: {}", r.max_rel_burgers);
        assert!(r.max_rel_variance < 1e-4, "variance: {}", r.max_rel_variance);
        assert!(r.max_rel_psi < 1e-4, "psi: {}", r.max_rel_psi);
    }
}
