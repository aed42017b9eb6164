//! The Widder transform of the prior and its derived posterior fields.
//!
//! Observing the hidden draw `X ~ 𝛍` through `dY = X u dt + dW` makes the
//! conditional law of `X` an exponential tilt of the prior: with the clock
//! `θ = ∫u² ds` and the coordinate `ζ = ∫u dY`, the posterior is
//! `𝛍_{θ,ζ}(db) ∝ exp(bζ − b²θ/2) 𝛍(db)`.  This module evaluates
//!
//! - `F(θ,ζ) = ∫ exp(bζ − b²θ/2) 𝛍(db)` — the tilt normalizer (the Widder
//!   transform of `𝛍`), which solves the backwards heat equation;
//! - `G = ∂ζ log F` — the posterior mean, solving the backwards Burgers
//!   equation; `ζ ↦ G(θ,ζ)` is a strictly increasing bijection onto the
//!   support interval;
//! - `H = ∂ζ G` — the posterior variance;
//! - `Ψ(θ,x) = H(θ, G_θ⁻¹(x))` — the posterior variance as a function of the
//!   clock and the posterior mean;
//! - the tilted measure itself, returned in the same family as the prior.
//!
//! All tilted integrals are computed in log space with max-exponent
//! subtraction.  Every map extends continuously to `θ = 0` (a pure
//! exponential tilt), which is how the filter is initialized.
//!
//! All functions here are pure; concurrent callers need no synchronization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prior::{PriorError, PriorMeasure};

/// Maximum bracket doublings / refinement iterations for the inversion of
/// the posterior mean.  The map is a bijection onto the support interval, so
/// a bracket always exists; hitting the cap converts endpoint pathologies
/// into a clean [`WidderError::NoConvergence`].
const INVERT_MAX_ITER: usize = 200;

/// Guaranteed relative accuracy of [`invert_g`]: `|G(θ,ζ) − x| ≤ 1e-10·max(1,|x|)`.
pub const INVERT_TOLERANCE: f64 = 1e-10;

/// Accuracy actually targeted by the iteration (finite-difference consumers
/// of `Ψ` need much better than the contractual 1e-10).
const INVERT_TARGET: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WidderError {
    #[error("invalid evaluation point: {0}")]
    InvalidPoint(String),
    #[error("normalizer overflow: log F = {log_f:.3e}")]
    Overflow { log_f: f64 },
    #[error("x = {x} lies outside the support interval ({lower}, {upper})")]
    OutOfSupport { x: f64, lower: f64, upper: f64 },
    #[error("posterior-mean inversion did not converge; x is too close to a support endpoint for the tolerance")]
    NoConvergence,
    #[error(transparent)]
    Prior(#[from] PriorError),
}

/// Evaluation point of the tilt: accumulated observation clock `θ ≥ 0`
/// (units of time) and weighted observation coordinate `ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidderPoint {
    pub theta: f64,
    pub zeta: f64,
}

impl WidderPoint {
    pub fn new(theta: f64, zeta: f64) -> Result<Self, WidderError> {
        let pt = Self { theta, zeta };
        pt.validate()?;
        Ok(pt)
    }

    fn validate(&self) -> Result<(), WidderError> {
        if !(self.theta >= 0.0) || !self.theta.is_finite() || !self.zeta.is_finite() {
            return Err(WidderError::InvalidPoint(format!(
                "need finite theta >= 0 and finite zeta, got ({}, {})",
                self.theta, self.zeta
            )));
        }
        Ok(())
    }
}

/// Normalizer, posterior mean and posterior variance at one tilt point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PosteriorSummary {
    /// Tilt normalizer `F(θ,ζ) > 0`.
    #[serde(rename = "F")]
    pub f: f64,
    /// Posterior mean `G(θ,ζ)`, strictly inside the support interval.
    #[serde(rename = "G")]
    pub g: f64,
    /// Posterior variance `H(θ,ζ) > 0`.
    #[serde(rename = "H")]
    pub h: f64,
}

struct TiltedMoments {
    log_f: f64,
    mean: f64,
    var: f64,
}

/// log-sum-exp of two terms.
fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Tilted log-normalizer, mean and central variance for weighted point masses
/// `(b_i, log w_i)`; weights need not be normalized.
fn weighted_tilt(points: impl Iterator<Item = (f64, f64)> + Clone, theta: f64, zeta: f64) -> TiltedMoments {
    let log_term = |b: f64, log_w: f64| log_w + b * zeta - 0.5 * b * b * theta;
    let max = points
        .clone()
        .map(|(b, lw)| log_term(b, lw))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for (b, lw) in points.clone() {
        let w = (log_term(b, lw) - max).exp();
        s0 += w;
        s1 += b * w;
    }
    let mean = s1 / s0;
    let mut s2c = 0.0;
    for (b, lw) in points {
        let w = (log_term(b, lw) - max).exp();
        s2c += (b - mean) * (b - mean) * w;
    }
    TiltedMoments {
        log_f: max + s0.ln(),
        mean,
        var: s2c / s0,
    }
}

fn tilted_moments(mu: &PriorMeasure, theta: f64, zeta: f64) -> TiltedMoments {
    match mu {
        PriorMeasure::Gaussian { mean: m, var: v } => {
            let denom = 1.0 + v * theta;
            let shifted = m + v * zeta;
            TiltedMoments {
                log_f: -0.5 * denom.ln() + (shifted * shifted / denom - m * m) / (2.0 * v),
                mean: shifted / denom,
                var: v / denom,
            }
        }
        PriorMeasure::TwoPoint { p, beta } => {
            let q = 1.0 - p;
            let b = *beta;
            // Tilted odds: weight of +β is p e^{βζ}, of −β is q e^{−βζ};
            // the common factor e^{−β²θ/2} only enters the normalizer.
            let lp = p.ln() + b * zeta;
            let lq = q.ln() - b * zeta;
            let ell = 0.5 * (lp - lq);
            let g = b * ell.tanh();
            // β² − g² computed as β² sech²(ℓ) to survive large |ζ|.
            let e = (-2.0 * ell.abs()).exp();
            let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
            TiltedMoments {
                log_f: -0.5 * b * b * theta + log_add_exp(lp, lq),
                mean: g,
                var: b * b * sech2,
            }
        }
        PriorMeasure::Discrete { atoms } => {
            weighted_tilt(atoms.iter().map(|&(b, w)| (b, w.ln())), theta, zeta)
        }
        PriorMeasure::GridDensity { nodes, density } => {
            let n = nodes.len();
            let weights = (0..n).map(move |i| {
                // trapezoid weight of node i
                let left = if i > 0 { nodes[i] - nodes[i - 1] } else { 0.0 };
                let right = if i + 1 < n { nodes[i + 1] - nodes[i] } else { 0.0 };
                let w = 0.5 * (left + right) * density[i];
                (nodes[i], w.ln()) // ln(0) = -inf is harmless below the max shift
            });
            weighted_tilt(weights, theta, zeta)
        }
    }
}

/// `log F(θ,ζ)` — always representable, even when `F` itself overflows.
pub fn log_transform_f(mu: &PriorMeasure, pt: WidderPoint) -> Result<f64, WidderError> {
    pt.validate()?;
    Ok(tilted_moments(mu, pt.theta, pt.zeta).log_f)
}

/// The Widder transform `F(θ,ζ) = ∫ exp(bζ − b²θ/2) 𝛍(db)`.
pub fn transform_f(mu: &PriorMeasure, pt: WidderPoint) -> Result<f64, WidderError> {
    let log_f = log_transform_f(mu, pt)?;
    let f = log_f.exp();
    if !f.is_finite() {
        return Err(WidderError::Overflow { log_f });
    }
    Ok(f)
}

/// Posterior mean `G(θ,ζ) = ∂ζ log F`, the center of gravity of the tilted
/// measure.  Always strictly inside the support interval.
pub fn posterior_mean_g(mu: &PriorMeasure, pt: WidderPoint) -> Result<f64, WidderError> {
    pt.validate()?;
    Ok(tilted_moments(mu, pt.theta, pt.zeta).mean)
}

/// Posterior variance `H(θ,ζ) = ∂ζ G`, the second central moment of the
/// tilted measure.
pub fn posterior_var_h(mu: &PriorMeasure, pt: WidderPoint) -> Result<f64, WidderError> {
    pt.validate()?;
    Ok(tilted_moments(mu, pt.theta, pt.zeta).var)
}

/// Posterior mean and variance in one pass (the filter hot path).
pub fn posterior_mean_and_var(
    mu: &PriorMeasure,
    theta: f64,
    zeta: f64,
) -> Result<(f64, f64), WidderError> {
    WidderPoint { theta, zeta }.validate()?;
    let t = tilted_moments(mu, theta, zeta);
    Ok((t.mean, t.var))
}

/// `F`, `G`, `H` together.
pub fn summary(mu: &PriorMeasure, pt: WidderPoint) -> Result<PosteriorSummary, WidderError> {
    pt.validate()?;
    let t = tilted_moments(mu, pt.theta, pt.zeta);
    let f = t.log_f.exp();
    if !f.is_finite() {
        return Err(WidderError::Overflow { log_f: t.log_f });
    }
    Ok(PosteriorSummary {
        f,
        g: t.mean,
        h: t.var,
    })
}

/// Inverts `ζ ↦ G(θ,ζ)` at a point `x` strictly inside the support interval.
///
/// Returns `ζ` with `|G(θ,ζ) − x| ≤ 1e-10·max(1,|x|)` (and in practice close
/// to machine accuracy).  Gaussian and two-point priors invert in closed
/// form; otherwise the bracket `ζ ∈ [−1,1]` is doubled until it straddles
/// `x` (at most 200 doublings) and refined by bisection-guarded Newton steps.
pub fn invert_g(mu: &PriorMeasure, theta: f64, x: f64) -> Result<f64, WidderError> {
    WidderPoint { theta, zeta: 0.0 }.validate()?;
    let support = mu.support_interval();
    if !x.is_finite() || !support.contains(x) {
        return Err(WidderError::OutOfSupport {
            x,
            lower: support.lower,
            upper: support.upper,
        });
    }
    match mu {
        PriorMeasure::Gaussian { mean: m, var: v } => Ok((x * (1.0 + v * theta) - m) / v),
        PriorMeasure::TwoPoint { p, beta } => {
            // G = β tanh(βζ + ½ ln(p/q))  ⇒  ζ = (artanh(x/β) − ½ ln(p/q)) / β
            let q = 1.0 - p;
            Ok((0.5 * ((beta + x) / (beta - x)).ln() - 0.5 * (p / q).ln()) / beta)
        }
        _ => invert_g_numeric(mu, theta, x),
    }
}

fn invert_g_numeric(mu: &PriorMeasure, theta: f64, x: f64) -> Result<f64, WidderError> {
    let scale = x.abs().max(1.0);
    let target = INVERT_TARGET * scale;
    let moments = |z: f64| {
        let t = tilted_moments(mu, theta, z);
        (t.mean, t.var)
    };

    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    let mut iters = 0usize;
    while moments(lo).0 > x {
        lo *= 2.0;
        iters += 1;
        if iters > INVERT_MAX_ITER {
            return Err(WidderError::NoConvergence);
        }
    }
    iters = 0;
    while moments(hi).0 < x {
        hi *= 2.0;
        iters += 1;
        if iters > INVERT_MAX_ITER {
            return Err(WidderError::NoConvergence);
        }
    }

    let mut z = 0.5 * (lo + hi);
    for _ in 0..INVERT_MAX_ITER {
        let (g, h) = moments(z);
        if (g - x).abs() <= target {
            return Ok(z);
        }
        if g < x {
            lo = z;
        } else {
            hi = z;
        }
        if hi - lo <= 4.0 * f64::EPSILON * z.abs().max(1.0) {
            break; // bracket exhausted at floating-point resolution
        }
        let newton = z + (x - g) / h.max(f64::MIN_POSITIVE);
        z = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let (g, _) = moments(z);
    if (g - x).abs() <= INVERT_TOLERANCE * scale {
        Ok(z)
    } else {
        Err(WidderError::NoConvergence)
    }
}

/// Posterior variance as a function of the clock and the posterior mean:
/// `Ψ(s,x) = H(s, G_s⁻¹(x))`.
///
/// Closed forms short-circuit the inversion: for a Gaussian prior
/// `Ψ = σ²/(1+σ²s)` (independent of `x`); for a two-point prior
/// `Ψ = β² − x²` (independent of `s`).
pub fn psi(mu: &PriorMeasure, s: f64, x: f64) -> Result<f64, WidderError> {
    match mu {
        PriorMeasure::Gaussian { var, .. } => {
            WidderPoint { theta: s, zeta: 0.0 }.validate()?;
            if !x.is_finite() {
                return Err(WidderError::OutOfSupport {
                    x,
                    lower: f64::NEG_INFINITY,
                    upper: f64::INFINITY,
                });
            }
            Ok(var / (1.0 + var * s))
        }
        PriorMeasure::TwoPoint { beta, .. } => {
            WidderPoint { theta: s, zeta: 0.0 }.validate()?;
            if !(x.abs() < *beta) {
                return Err(WidderError::OutOfSupport {
                    x,
                    lower: -beta,
                    upper: *beta,
                });
            }
            Ok(beta * beta - x * x)
        }
        _ => {
            let zeta = invert_g(mu, s, x)?;
            Ok(tilted_moments(mu, s, zeta).var)
        }
    }
}

/// The tilted posterior measure `𝛍_{θ,ζ}`, in the same family as the prior.
///
/// Its mean and variance coincide with `G(θ,ζ)` and `H(θ,ζ)`.
pub fn posterior_measure(mu: &PriorMeasure, pt: WidderPoint) -> Result<PriorMeasure, WidderError> {
    pt.validate()?;
    let (theta, zeta) = (pt.theta, pt.zeta);
    match mu {
        PriorMeasure::Gaussian { mean: m, var: v } => {
            let denom = 1.0 + v * theta;
            Ok(PriorMeasure::gaussian((m + v * zeta) / denom, v / denom)?)
        }
        PriorMeasure::TwoPoint { p, beta } => {
            // Logistic update of the odds of the +β atom.
            let lp = p.ln() + beta * zeta;
            let lq = (1.0 - p).ln() - beta * zeta;
            let p_new = (lp - log_add_exp(lp, lq)).exp();
            Ok(PriorMeasure::two_point(p_new, *beta)?)
        }
        PriorMeasure::Discrete { atoms } => {
            let max = atoms
                .iter()
                .map(|&(b, w)| w.ln() + b * zeta - 0.5 * b * b * theta)
                .fold(f64::NEG_INFINITY, f64::max);
            let tilted: Vec<(f64, f64)> = atoms
                .iter()
                .map(|&(b, w)| {
                    (b, (w.ln() + b * zeta - 0.5 * b * b * theta - max).exp())
                })
                .collect();
            Ok(PriorMeasure::discrete(tilted)?)
        }
        PriorMeasure::GridDensity { nodes, density } => {
            let max = nodes
                .iter()
                .map(|&b| b * zeta - 0.5 * b * b * theta)
                .fold(f64::NEG_INFINITY, f64::max);
            let tilted: Vec<f64> = nodes
                .iter()
                .zip(density)
                .map(|(&b, &f)| f * (b * zeta - 0.5 * b * b * theta - max).exp())
                .collect();
            Ok(PriorMeasure::grid_density(nodes.clone(), tilted)?)
        }
    }
}
