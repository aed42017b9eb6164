//! Observation cost functions, reduction to a constant intensity, and Monte
//! Carlo comparison of (policy, stop-rule) pairs.
//!
//! A running cost `h` on `(0,1]` reduces to the constant-intensity problem
//! with rate `c = h(u₀)/u₀²`, where `u₀` minimizes `h(u)/u²`: along any
//! path, `∫ h(u) dt ≥ c ∫ u² dt`, with equality for `u ≡ u₀`.  The
//! comparison harness simulates every policy of a pinned suite on common
//! random numbers (same hidden draw and Brownian increments per path index)
//! so that cost differences and survival-curve gaps are sharp at desk scale.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{
    par_map_indexed, path_rng, ControlPolicy, FilterError, FilterState, FilterStepper, NoiseDraw,
};
use crate::prior::PriorMeasure;
use crate::stats::{binomial_se, survival_curve, MonteCarloEstimate};
use crate::stopping::{StoppingError, StoppingSolution};

/// Tolerance for cost-ratio ties and monotonicity slack.
const COST_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("cost function decreases at u = {at}")]
    MonotonicityViolation { at: f64 },
    #[error("no interior minimizer of h(u)/u²: {0}")]
    AssumptionFailed(String),
    #[error("invalid cost function: {0}")]
    InvalidCost(String),
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Stopping(#[from] StoppingError),
}

/// Named control-cost families on `(0,1]`, all positive, continuous and
/// non-decreasing, plus a tabulated form interpolated linearly between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CostFunction {
    /// `h(u) = c u²`
    Quadratic { c: f64 },
    /// `h(u) = c u`
    Linear { c: f64 },
    /// `h(u) = c u^p`, `p > 0`
    Power { c: f64, p: f64 },
    /// `h(u) = c`
    Constant { c: f64 },
    /// Piecewise-linear table of `(u, h)` nodes; evaluation clamps flat
    /// outside the tabulated range.
    Tabulated { points: Vec<(f64, f64)> },
}

impl CostFunction {
    pub fn validate(&self) -> Result<(), ControlError> {
        let pos = |c: f64| c.is_finite() && c > 0.0;
        match self {
            Self::Quadratic { c } | Self::Linear { c } | Self::Constant { c } => {
                if pos(*c) {
                    Ok(())
                } else {
                    Err(ControlError::InvalidCost(format!("rate must be positive, got {c}")))
                }
            }
            Self::Power { c, p } => {
                if !pos(*c) {
                    return Err(ControlError::InvalidCost(format!(
                        "rate must be positive, got {c}"
                    )));
                }
                if !(p.is_finite() && *p > 0.0) {
                    return Err(ControlError::InvalidCost(format!(
                        "exponent must be positive, got {p}"
                    )));
                }
                Ok(())
            }
            Self::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(ControlError::InvalidCost("table needs at least 2 nodes".into()));
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(ControlError::InvalidCost(
                            "table abscissae must be strictly increasing".into(),
                        ));
                    }
                    if w[1].1 < w[0].1 - COST_TIE_TOL {
                        return Err(ControlError::MonotonicityViolation { at: w[1].0 });
                    }
                }
                for &(u, h) in points {
                    if !(u > 0.0 && u <= 1.0) {
                        return Err(ControlError::InvalidCost(format!(
                            "table abscissa {u} outside (0,1]"
                        )));
                    }
                    if !(h.is_finite() && h > 0.0) {
                        return Err(ControlError::InvalidCost(format!(
                            "table value {h} not positive"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Cost per unit time at intensity `u`.
    pub fn rate(&self, u: f64) -> f64 {
        match self {
            Self::Quadratic { c } => c * u * u,
            Self::Linear { c } => c * u,
            Self::Power { c, p } => c * u.powf(*p),
            Self::Constant { c } => *c,
            Self::Tabulated { points } => {
                if u <= points[0].0 {
                    return points[0].1;
                }
                if u >= points[points.len() - 1].0 {
                    return points[points.len() - 1].1;
                }
                let i = points.partition_point(|&(g, _)| g < u);
                let (u0, h0) = points[i - 1];
                let (u1, h1) = points[i];
                h0 + (u - u0) / (u1 - u0) * (h1 - h0)
            }
        }
    }
}

/// A cost function together with its constant-control reduction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostSpec {
    pub h: CostFunction,
    /// Minimizer of `h(u)/u²` over `(0,1]` (largest in case of ties).
    pub u0: f64,
    /// Reduced clock-cost rate `c = h(u₀)/u₀²`.
    pub c_reduced: f64,
}

impl CostSpec {
    pub fn from_cost(h: CostFunction) -> Result<Self, ControlError> {
        let (u0, c_reduced) = find_u0(&h, 1e-6)?;
        Ok(Self { h, u0, c_reduced })
    }

    pub fn rate(&self, u: f64) -> f64 {
        self.h.rate(u)
    }
}

/// Minimizes `h(u)/u²` over a grid of `(0,1]` refined to `resolution`,
/// breaking ties toward the largest `u` (faster observation at equal reduced
/// cost).  See [`find_u0_fn`] for the generic version.
pub fn find_u0(h: &CostFunction, resolution: f64) -> Result<(f64, f64), ControlError> {
    h.validate()?;
    find_u0_fn(|u| h.rate(u), resolution)
}

/// Grid search for the minimizer of `h(u)/u²` over `(0,1]`.
///
/// Checks that `h` is non-decreasing on the coarse grid, and reports
/// `AssumptionFailed` when the minimizer sits at the smallest grid point —
/// the ratio then has no interior minimizer (e.g. `h(u) = u³`) and the
/// reduction hypothesis fails; extrapolating toward `u → 0` would be a guess.
pub fn find_u0_fn(h: impl Fn(f64) -> f64, resolution: f64) -> Result<(f64, f64), ControlError> {
    const COARSE: usize = 1000;
    let grid = |lo: f64, hi: f64, n: usize| (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64);

    // coarse pass over (0,1], with the monotonicity check
    let mut prev_h = f64::NEG_INFINITY;
    let mut best_u = f64::NAN;
    let mut best_r = f64::INFINITY;
    let mut first = true;
    let mut best_is_first = false;
    for u in grid(1.0 / COARSE as f64, 1.0, COARSE - 1) {
        let hu = h(u);
        if hu < prev_h - COST_TIE_TOL {
            return Err(ControlError::MonotonicityViolation { at: u });
        }
        prev_h = hu;
        let r = hu / (u * u);
        let tie = COST_TIE_TOL * best_r.abs().max(1.0);
        if r < best_r - tie {
            best_r = r;
            best_u = u;
            best_is_first = first;
        } else if r <= best_r + tie && u > best_u {
            best_r = best_r.min(r);
            best_u = u;
            best_is_first = false;
        }
        first = false;
    }
    if best_is_first {
        return Err(ControlError::AssumptionFailed(format!(
            "h(u)/u² is minimized at the smallest grid point u = {best_u}; \
             no minimizer exists on (0,1]"
        )));
    }

    // local refinement around the coarse argmin down to `resolution`
    let mut spacing = 1.0 / COARSE as f64;
    while spacing > resolution {
        let lo = (best_u - spacing).max(spacing.min(1e-9));
        let hi = (best_u + spacing).min(1.0);
        spacing = (hi - lo) / COARSE as f64;
        for u in grid(lo, hi, COARSE) {
            let r = h(u) / (u * u);
            let tie = COST_TIE_TOL * best_r.abs().max(1.0);
            if r < best_r - tie || (r <= best_r + tie && u > best_u) {
                best_r = best_r.min(r);
                best_u = u;
            }
        }
    }

    debug_assert!(
        grid(1.0 / COARSE as f64, 1.0, COARSE - 1)
            .all(|u| h(u) / (u * u) >= best_r - COST_TIE_TOL * best_r.abs().max(1.0)),
        "argmin violates the reduced-cost inequality on its own grid"
    );
    Ok((best_u, h(best_u) / (best_u * best_u)))
}

/// Whether `h(u) ≥ c u²` holds on a grid of `(0,1]` (the `u₀ = 1` special
/// case of the reduction inequality).
pub fn check_superquadratic(h: &CostFunction, c: f64) -> bool {
    const N: usize = 1000;
    (1..=N).all(|i| {
        let u = i as f64 / N as f64;
        h.rate(u) >= c * u * u - COST_TIE_TOL
    })
}

/// When to terminate a simulated path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StopRule {
    /// Stop at the fixed time `t` (rounded to the grid).
    FixedTime { t: f64 },
    /// Stop at first entry of `(A(t), X̂(t))` into the solved stopping region.
    FirstEntry,
    /// Stop once the posterior mean leaves `(lower, upper)`.
    Threshold { lower: f64, upper: f64 },
}

/// One (policy, stop-rule) pair of a comparison suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEntry {
    pub id: String,
    pub policy: ControlPolicy,
    pub stop: StopRule,
}

/// Simulation sizes for a comparison run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    /// Survival-curve checkpoints in the original clock.
    pub checkpoints: Vec<f64>,
}

/// Per-path outcome of one policy.
#[derive(Debug, Clone, Copy)]
pub struct PathOutcome {
    pub stop_step: usize,
    pub stop_time: f64,
    /// `(X − X̂(τ))² + ∫₀^τ h(u) dt`
    pub total_cost: f64,
    pub sq_error: f64,
    pub running_cost: f64,
    pub a_at_stop: f64,
    /// False when the rule did not trigger before the horizon (the cost is
    /// then the value at the horizon, and the row's `never_stopped` counts it).
    pub stopped: bool,
}

/// Summary row for one policy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyRow {
    pub id: String,
    pub stop: StopRule,
    pub mean_cost: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub never_stopped: usize,
    pub mean_stop_time: f64,
    /// `P(τ > t)` at the configured checkpoints.
    pub survival: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub checkpoints: Vec<f64>,
    pub n_paths: usize,
    pub rows: Vec<PolicyRow>,
}

impl ComparisonReport {
    pub fn row(&self, id: &str) -> Option<&PolicyRow> {
        self.rows.iter().find(|r| r.id == id)
    }
}

/// Full comparison result: the serializable report plus per-path outcomes
/// (policy-major), which paired statistics and identity checks need.
#[derive(Debug)]
pub struct ComparisonOutcome {
    pub report: ComparisonReport,
    pub outcomes: Vec<Vec<PathOutcome>>,
}

impl ComparisonOutcome {
    /// Mean and standard error of the paired per-path cost difference
    /// `cost[comp] − cost[ref]` (the sharp comparison under common random
    /// numbers).
    pub fn paired_cost_difference(&self, ref_idx: usize, comp_idx: usize) -> MonteCarloEstimate {
        let diffs: Vec<f64> = self.outcomes[comp_idx]
            .iter()
            .zip(&self.outcomes[ref_idx])
            .map(|(c, r)| c.total_cost - r.total_cost)
            .collect();
        MonteCarloEstimate::from_samples(&diffs)
    }
}

/// Runs every `(policy, stop-rule)` entry over `n_paths` simulated paths
/// under common random numbers: path `p` uses the same hidden draw and
/// Brownian increments for all entries.
///
/// Entries with [`StopRule::FirstEntry`] need `sol`; it must have been solved
/// for the same prior and for `c = cost.c_reduced`, otherwise
/// [`ControlError::ConfigMismatch`].
pub fn compare_policies(
    mu: &PriorMeasure,
    cost: &CostSpec,
    entries: &[PolicyEntry],
    sol: Option<&StoppingSolution>,
    cfg: &CompareConfig,
) -> Result<ComparisonOutcome, ControlError> {
    if entries.is_empty() {
        return Err(ControlError::ConfigMismatch("no policies to compare".into()));
    }
    if !(cfg.dt > 0.0 && cfg.horizon >= cfg.dt && cfg.n_paths > 0) {
        return Err(ControlError::ConfigMismatch(format!(
            "need 0 < dt <= horizon and n_paths > 0, got dt={}, horizon={}, n_paths={}",
            cfg.dt, cfg.horizon, cfg.n_paths
        )));
    }
    cost.h.validate()?;
    for e in entries {
        e.policy.validate().map_err(ControlError::from)?;
        match &e.stop {
            StopRule::FixedTime { t } => {
                if !(*t >= 0.0 && *t <= cfg.horizon + 0.5 * cfg.dt) {
                    return Err(ControlError::ConfigMismatch(format!(
                        "fixed stop time {t} outside [0, horizon] for policy '{}'",
                        e.id
                    )));
                }
            }
            StopRule::FirstEntry => {
                let sol = sol.ok_or_else(|| {
                    ControlError::ConfigMismatch(format!(
                        "policy '{}' uses a first-entry rule but no stopping solution was given",
                        e.id
                    ))
                })?;
                if sol.prior != *mu {
                    return Err(ControlError::ConfigMismatch(
                        "stopping solution was solved for a different prior".into(),
                    ));
                }
                if (sol.c - cost.c_reduced).abs() > 1e-9 * cost.c_reduced.max(1.0) {
                    return Err(ControlError::ConfigMismatch(format!(
                        "stopping solution cost rate {} != reduced cost {}",
                        sol.c, cost.c_reduced
                    )));
                }
            }
            StopRule::Threshold { lower, upper } => {
                if !(lower < upper) {
                    return Err(ControlError::ConfigMismatch(format!(
                        "threshold interval ({lower}, {upper}) is empty"
                    )));
                }
            }
        }
    }

    let n_steps = (cfg.horizon / cfg.dt).round() as usize;
    let per_path = |p: u64| -> Result<Vec<PathOutcome>, ControlError> {
        let mut rng = path_rng(cfg.seed, p);
        let draw = NoiseDraw::draw(mu, n_steps, cfg.dt, &mut rng);
        entries
            .iter()
            .map(|e| run_streaming(mu, &e.policy, &e.stop, sol, cost, cfg.dt, n_steps, &draw))
            .collect()
    };
    let per_path_outcomes: Result<Vec<Vec<PathOutcome>>, ControlError> =
        par_map_indexed(cfg.n_paths, per_path).into_iter().collect();
    let per_path_outcomes = per_path_outcomes?;

    // transpose to policy-major
    let outcomes: Vec<Vec<PathOutcome>> = (0..entries.len())
        .map(|i| per_path_outcomes.iter().map(|row| row[i]).collect())
        .collect();

    let rows: Vec<PolicyRow> = entries
        .iter()
        .zip(&outcomes)
        .map(|(e, outs)| {
            let costs: Vec<f64> = outs.iter().map(|o| o.total_cost).collect();
            let est = MonteCarloEstimate::from_samples(&costs);
            let taus: Vec<f64> = outs
                .iter()
                .map(|o| if o.stopped { o.stop_time } else { f64::INFINITY })
                .collect();
            PolicyRow {
                id: e.id.clone(),
                stop: e.stop.clone(),
                mean_cost: est.mean,
                std_error: est.std_error,
                n_paths: cfg.n_paths,
                never_stopped: outs.iter().filter(|o| !o.stopped).count(),
                mean_stop_time: outs.iter().map(|o| o.stop_time).sum::<f64>() / outs.len() as f64,
                survival: survival_curve(&taus, &cfg.checkpoints),
            }
        })
        .collect();

    Ok(ComparisonOutcome {
        report: ComparisonReport {
            checkpoints: cfg.checkpoints.clone(),
            n_paths: cfg.n_paths,
            rows,
        },
        outcomes,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_streaming(
    mu: &PriorMeasure,
    policy: &ControlPolicy,
    stop: &StopRule,
    sol: Option<&StoppingSolution>,
    cost: &CostSpec,
    dt: f64,
    n_steps: usize,
    draw: &NoiseDraw,
) -> Result<PathOutcome, ControlError> {
    let fixed_step = match stop {
        StopRule::FixedTime { t } => Some(((t / dt).round() as usize).min(n_steps)),
        _ => None,
    };
    let mut stepper = FilterStepper::new(mu, dt);
    let mut running = 0.0;
    let mut out_of_range = false;
    let outcome = |state: &FilterState, k: usize, running: f64, stopped: bool| {
        let err = draw.x - state.xhat;
        PathOutcome {
            stop_step: k,
            stop_time: state.t,
            total_cost: err * err + running,
            sq_error: err * err,
            running_cost: running,
            a_at_stop: state.a,
            stopped,
        }
    };
    for k in 0..=n_steps {
        let state = stepper.state;
        let stop_now = match stop {
            StopRule::FixedTime { .. } => Some(k) == fixed_step,
            StopRule::Threshold { lower, upper } => state.xhat <= *lower || state.xhat >= *upper,
            StopRule::FirstEntry => {
                if out_of_range {
                    false
                } else {
                    match sol.expect("validated above").in_stop_region(state.a, state.xhat) {
                        Some(hit) => hit,
                        None => {
                            out_of_range = true;
                            false
                        }
                    }
                }
            }
        };
        if stop_now {
            return Ok(outcome(&state, k, running, true));
        }
        if k == n_steps {
            return Ok(outcome(&state, k, running, false));
        }
        let u = policy.rate(state.t, &state);
        let dy = draw.x * u * dt + draw.dw[k];
        stepper.step(k, u, dy)?;
        running += cost.rate(u) * dt;
    }
    unreachable!("loop returns at k == n_steps")
}

/// Per-checkpoint survival comparison against a reference policy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointVerdict {
    pub t: f64,
    pub surv_ref: f64,
    pub surv_comp: f64,
    pub std_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyDominance {
    pub id: String,
    pub checkpoints: Vec<CheckpointVerdict>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominanceReport {
    pub reference: String,
    pub per_policy: Vec<PolicyDominance>,
    pub pass: bool,
}

/// Verifies the stochastic-dominance relation: at each checkpoint the
/// reference survival probability must not exceed any competitor's by more
/// than three binomial standard errors.
pub fn dominance_check(report: &ComparisonReport, reference: &str) -> Result<DominanceReport, ControlError> {
    let ref_row = report.row(reference).ok_or_else(|| {
        ControlError::ConfigMismatch(format!("reference policy '{reference}' not in report"))
    })?;
    let mut per_policy = Vec::new();
    for row in report.rows.iter().filter(|r| r.id != reference) {
        let checkpoints: Vec<CheckpointVerdict> = report
            .checkpoints
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let (sr, sc) = (ref_row.survival[i], row.survival[i]);
                let se = (binomial_se(sr, ref_row.n_paths).powi(2)
                    + binomial_se(sc, row.n_paths).powi(2))
                .sqrt();
                CheckpointVerdict {
                    t,
                    surv_ref: sr,
                    surv_comp: sc,
                    std_error: se,
                    pass: sr <= sc + 3.0 * se,
                }
            })
            .collect();
        let pass = checkpoints.iter().all(|c| c.pass);
        per_policy.push(PolicyDominance {
            id: row.id.clone(),
            checkpoints,
            pass,
        });
    }
    let pass = per_policy.iter().all(|p| p.pass);
    Ok(DominanceReport {
        reference: reference.into(),
        per_policy,
        pass,
    })
}

/// The pinned adversarial suite used by the optimality checks: fixed stop
/// times around `τ*` under full intensity, constant intensities with their
/// time-changed first-entry rules, a piecewise schedule and a feedback rule.
/// The reference pair is `full_bang`.
pub fn adversarial_suite(tau_star: f64) -> Vec<PolicyEntry> {
    let entry = |id: &str, policy: ControlPolicy, stop: StopRule| PolicyEntry {
        id: id.into(),
        policy,
        stop,
    };
    vec![
        entry("full_bang", ControlPolicy::FullBang, StopRule::FirstEntry),
        entry(
            "fixed_zero",
            ControlPolicy::FullBang,
            StopRule::FixedTime { t: 0.0 },
        ),
        entry(
            "fixed_half_tau",
            ControlPolicy::FullBang,
            StopRule::FixedTime { t: 0.5 * tau_star },
        ),
        entry(
            "fixed_tau",
            ControlPolicy::FullBang,
            StopRule::FixedTime { t: tau_star },
        ),
        entry(
            "fixed_two_tau",
            ControlPolicy::FullBang,
            StopRule::FixedTime { t: 2.0 * tau_star },
        ),
        entry(
            "const_quarter",
            ControlPolicy::Constant { u: 0.25 },
            StopRule::FirstEntry,
        ),
        entry(
            "const_half",
            ControlPolicy::Constant { u: 0.5 },
            StopRule::FirstEntry,
        ),
        entry(
            "piecewise",
            ControlPolicy::Piecewise {
                steps: vec![(0.0, 1.0), (0.5 * tau_star.max(0.1), 0.4), (2.0 * tau_star.max(0.1), 0.8)],
            },
            StopRule::FirstEntry,
        ),
        entry(
            "feedback",
            ControlPolicy::Feedback {
                floor: 0.3,
                gain: 0.8,
            },
            StopRule::FirstEntry,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_cost_ties_break_to_full_intensity() {
        let (u0, c_red) = find_u0(&CostFunction::Quadratic { c: 0.3 }, 1e-6).unwrap();
        assert_eq!(u0, 1.0);
        assert!((c_red - 0.3).abs() < 1e-12);
    }

    #[test]
    fn linear_cost_reduces_at_full_intensity() {
        let (u0, c_red) = find_u0(&CostFunction::Linear { c: 0.7 }, 1e-6).unwrap();
        assert_eq!(u0, 1.0);
        assert!((c_red - 0.7).abs() < 1e-12);
    }

    #[test]
    fn cubic_plus_offset_has_interior_minimizer() {
        // minimize u + 0.1/u²: stationary at u = 0.2^{1/3}
        let (u0, c_red) = find_u0_fn(|u| u * u * u + 0.1, 1e-6).unwrap();
        assert!((u0 - 0.5848035476425733).abs() < 1e-5, "u0 = {u0}");
        assert!((c_red - 0.8772053214638598).abs() < 1e-6, "c = {c_red}");
    }

    #[test]
    fn pure_cubic_has_no_minimizer() {
        let err = find_u0(&CostFunction::Power { c: 1.0, p: 3.0 }, 1e-6).unwrap_err();
        assert!(matches!(err, ControlError::AssumptionFailed(_)));
    }

    #[test]
    fn decreasing_table_is_rejected() {
        let h = CostFunction::Tabulated {
            points: vec![(0.1, 1.0), (0.5, 0.5), (1.0, 2.0)],
        };
        assert!(matches!(
            h.validate(),
            Err(ControlError::MonotonicityViolation { .. })
        ));
    }

    #[test]
    fn superquadratic_checks() {
        assert!(check_superquadratic(
            &CostFunction::Power { c: 0.4, p: 0.5 },
            0.4
        ));
        assert!(!check_superquadratic(
            &CostFunction::Power { c: 0.4, p: 3.0 },
            0.4
        ));
        assert!(check_superquadratic(
            &CostFunction::Quadratic { c: 0.4 },
            0.4
        ));
    }

    #[test]
    fn tabulated_cost_interpolates() {
        let h = CostFunction::Tabulated {
            points: vec![(0.25, 1.0), (0.75, 2.0)],
        };
        h.validate().unwrap();
        assert_eq!(h.rate(0.5), 1.5);
        assert_eq!(h.rate(0.1), 1.0);
        assert_eq!(h.rate(1.0), 2.0);
    }

    #[test]
    fn suite_contains_reference_and_fixed_times() {
        let suite = adversarial_suite(1.0);
        assert!(suite.iter().any(|e| e.id == "full_bang" && e.stop == StopRule::FirstEntry));
        let fixed: Vec<f64> = suite
            .iter()
            .filter_map(|e| match e.stop {
                StopRule::FixedTime { t } => Some(t),
                _ => None,
            })
            .collect();
        assert_eq!(fixed, vec![0.0, 0.5, 1.0, 2.0]);
    }
}
