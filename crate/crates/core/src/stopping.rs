//! Optimal stopping of the time-changed posterior mean.
//!
//! In the intrinsic clock `s = A(t)` the posterior mean is a diffusion
//! `dQ = Ψ(s,Q) dB`, and stopping to minimize
//! `E[∫₀^τ (c − Ψ²(s, Q(s))) ds]` is a free-boundary problem for the value
//! function `v(s,x)`: inside the continuation region
//! `∂v/∂s + ½Ψ²(s,x) ∂²v/∂x² + (c − Ψ²(s,x)) = 0`, with `v = 0` on the
//! stopping region.  The solver discretizes backward in `s` with one
//! implicit (backward Euler) step per level, a tridiagonal solve, and the
//! projection `v ← min(v, 0)`; the projected implicit scheme is
//! unconditionally stable and the obstacle is the constant zero.
//!
//! When `Ψ` does not depend on `s` (two-point priors) the same implicit step
//! is iterated to its fixed point, which solves the stationary variational
//! inequality exactly at the x-grid resolution; the result is stored as a
//! single row with `stationary = true`.
//!
//! A solved [`StoppingSolution`] is immutable and safe to share across
//! concurrent path evaluators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::PathRecord;
use crate::prior::PriorMeasure;
use crate::widder::{self, WidderError};

/// Grid values with `v ≥ −EPSILON_STOP` count as the stopping region;
/// this separates the obstacle-active set from roundoff.
pub const EPSILON_STOP: f64 = 1e-9;

/// Two `Ψ` rows closer than this (sup-norm) switch the solver to the
/// stationary fixed-point iteration.
const HOMOGENEITY_TOL: f64 = 1e-12;

/// Sup-norm change below which the stationary iteration is converged.
const STATIONARY_TOL: f64 = 1e-9;

const STATIONARY_MAX_ITERS: usize = 400_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoppingError {
    #[error("horizon too short: max Ψ²(s_max,·) = {max_psi_sq:.6} > c = {c}; increase s_max")]
    HorizonTooShort { max_psi_sq: f64, c: f64 },
    #[error("implicit solve failed to converge: {0}")]
    GridUnstable(String),
    #[error("path left the solved clock range (s = {s:.6} > s_max = {s_max:.6}) without entering the stopping region; increase s_max")]
    NeverStops { s: f64, s_max: f64 },
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Widder(#[from] WidderError),
}

/// Free-boundary location at one clock level; `None` on a side where the
/// continuation region is absent (or runs into the grid edge).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub s: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Solved value function `v(s,x)`, its stopping region and boundary curves.
///
/// `values` is row-major: `values[i * x_grid.len() + j] = v(s_grid[i], x_grid[j])`.
/// Stationary solutions store a single row valid for every `s ≥ 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoppingSolution {
    pub prior: PriorMeasure,
    pub c: f64,
    pub s_max: f64,
    pub stationary: bool,
    pub s_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub stop_mask: Vec<bool>,
    pub boundary: Vec<BoundaryRow>,
    /// Value at clock zero and the prior mean.
    pub v0: f64,
}

impl StoppingSolution {
    fn row(&self, i: usize) -> &[f64] {
        let nx = self.x_grid.len();
        &self.values[i * nx..(i + 1) * nx]
    }

    /// Linear interpolation of one row; `x` outside the grid clamps to the
    /// edge, whose value is the stopping value zero.
    fn row_value_at(&self, i: usize, x: f64) -> f64 {
        let xs = &self.x_grid;
        let row = self.row(i);
        if x <= xs[0] {
            return row[0];
        }
        if x >= xs[xs.len() - 1] {
            return row[xs.len() - 1];
        }
        let j = xs.partition_point(|&g| g < x).max(1);
        let (x0, x1) = (xs[j - 1], xs[j]);
        let w = (x - x0) / (x1 - x0);
        row[j - 1] + w * (row[j] - row[j - 1])
    }

    /// Bilinear value lookup.  Returns `None` when `s` lies beyond the solved
    /// range of a non-stationary solution.
    pub fn value_at(&self, s: f64, x: f64) -> Option<f64> {
        if self.stationary {
            return Some(self.row_value_at(0, x));
        }
        if s < 0.0 || s > self.s_max * (1.0 + 1e-12) + 1e-300 {
            return None;
        }
        let sg = &self.s_grid;
        let i = sg.partition_point(|&g| g < s);
        if i == 0 {
            return Some(self.row_value_at(0, x));
        }
        if i >= sg.len() {
            return Some(self.row_value_at(sg.len() - 1, x));
        }
        let (s0, s1) = (sg[i - 1], sg[i]);
        let w = (s - s0) / (s1 - s0);
        let v0 = self.row_value_at(i - 1, x);
        let v1 = self.row_value_at(i, x);
        Some(v0 + w * (v1 - v0))
    }

    /// Stopping-region membership with sub-cell resolution (interpolated
    /// value against the obstacle tolerance).
    pub fn in_stop_region(&self, s: f64, x: f64) -> Option<bool> {
        self.value_at(s, x).map(|v| v >= -EPSILON_STOP)
    }

    /// First grid clock `s` at which `(s, x)` belongs to the stopping region,
    /// scanning solved levels in order.  `None` if the region is never
    /// reached at this `x` within the solved range.
    pub fn entry_time_in_s(&self, x: f64) -> Option<f64> {
        for (i, &s) in self.s_grid.iter().enumerate() {
            if self.row_value_at(i, x) >= -EPSILON_STOP {
                return Some(s);
            }
        }
        None
    }
}

fn build_x_grid(mu: &PriorMeasure, nx: usize) -> Vec<f64> {
    let support = mu.support_interval();
    let (lo, hi) = if support.is_bounded() {
        // inset so every node is strictly inside; Ψ² is tiny near the
        // endpoints, hence the edges sit in the stopping region
        let inset = 1e-6 * 0.5 * (support.upper - support.lower);
        (support.lower + inset, support.upper - inset)
    } else {
        // Dirichlet truncation of an unbounded support; for x-independent Ψ
        // (the Gaussian family) the edge data is irrelevant, otherwise it is
        // an approximation controlled by the 8-standard-deviation width
        let m = mu.mean();
        let sd = mu.variance().sqrt();
        (m - 8.0 * sd, m + 8.0 * sd)
    };
    (0..nx)
        .map(|j| lo + (hi - lo) * j as f64 / (nx - 1) as f64)
        .collect()
}

/// Thomas algorithm for a tridiagonal system with constant structure
/// `(-alpha[j]) v[j-1] + (1 + 2 alpha[j]) v[j] + (-alpha[j]) v[j+1] = rhs[j]`
/// over interior nodes, Dirichlet zero at both ends.
fn implicit_step(
    alpha: &[f64],
    rhs: &[f64],
    out: &mut [f64],
    scratch: &mut Vec<f64>,
) -> Result<(), StoppingError> {
    let n = rhs.len();
    debug_assert_eq!(alpha.len(), n);
    scratch.clear();
    scratch.resize(2 * n, 0.0);
    let (c_star, d_star) = scratch.split_at_mut(n);
    let mut beta = 1.0 + 2.0 * alpha[0];
    c_star[0] = -alpha[0] / beta;
    d_star[0] = rhs[0] / beta;
    for j in 1..n {
        beta = 1.0 + 2.0 * alpha[j] + alpha[j] * c_star[j - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(StoppingError::GridUnstable("singular tridiagonal pivot".into()));
        }
        c_star[j] = -alpha[j] / beta;
        d_star[j] = (rhs[j] + alpha[j] * d_star[j - 1]) / beta;
    }
    out[n - 1] = d_star[n - 1];
    for j in (0..n - 1).rev() {
        out[j] = d_star[j] - c_star[j] * out[j + 1];
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(StoppingError::GridUnstable("non-finite solution values".into()));
    }
    Ok(())
}

fn extract_boundary(s: f64, x_grid: &[f64], row: &[f64]) -> BoundaryRow {
    let nx = x_grid.len();
    let mut j_min = None;
    let mut j_max = None;
    for (j, &v) in row.iter().enumerate() {
        if v < -EPSILON_STOP {
            if j_min.is_none() {
                j_min = Some(j);
            }
            j_max = Some(j);
        }
    }
    let crossing = |inside: usize, outside: usize| -> Option<f64> {
        let (vi, vo) = (row[inside], row[outside]);
        let denom = vo - vi;
        if denom.abs() < f64::MIN_POSITIVE {
            return Some(x_grid[outside]);
        }
        let t = ((-EPSILON_STOP) - vi) / denom;
        Some(x_grid[inside] + t.clamp(0.0, 1.0) * (x_grid[outside] - x_grid[inside]))
    };
    match (j_min, j_max) {
        (Some(jn), Some(jx)) => BoundaryRow {
            s,
            lower: if jn > 0 { crossing(jn, jn - 1) } else { None },
            upper: if jx + 1 < nx { crossing(jx, jx + 1) } else { None },
        },
        _ => BoundaryRow {
            s,
            lower: None,
            upper: None,
        },
    }
}

/// Solves the stopping value function on `[0, s_max] × (x-grid)` for prior
/// `mu` and observation cost rate `c`.
///
/// `ns` is the number of clock steps (levels are `ns + 1`), `nx` the number
/// of spatial nodes.  Non-stationary solves require immediate stopping to be
/// optimal at the terminal level: `Ψ²(s_max, x) ≤ c` on the grid, otherwise
/// [`StoppingError::HorizonTooShort`].  Time-homogeneous `Ψ` switches to the
/// stationary fixed-point iteration, for which no terminal condition is
/// needed (the result is an infinite-horizon value independent of `s_max`).
pub fn solve_value_function(
    mu: &PriorMeasure,
    c: f64,
    s_max: f64,
    nx: usize,
    ns: usize,
) -> Result<StoppingSolution, StoppingError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(StoppingError::InvalidConfig(format!("c must be positive, got {c}")));
    }
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(StoppingError::InvalidConfig(format!(
            "s_max must be positive, got {s_max}"
        )));
    }
    if nx < 3 || ns < 1 {
        return Err(StoppingError::InvalidConfig(format!(
            "need nx >= 3 and ns >= 1, got nx={nx}, ns={ns}"
        )));
    }
    let x_grid = build_x_grid(mu, nx);
    let dx = x_grid[1] - x_grid[0];
    let ds = s_max / ns as f64;
    let psi_row = |s: f64| -> Result<Vec<f64>, StoppingError> {
        x_grid
            .iter()
            .map(|&x| widder::psi(mu, s, x).map_err(StoppingError::from))
            .collect()
    };

    let psi_first = psi_row(0.0)?;
    let psi_last = psi_row(s_max)?;
    let homogeneous = psi_first
        .iter()
        .zip(&psi_last)
        .all(|(a, b)| (a - b).abs() < HOMOGENEITY_TOL);

    let mean = mu.mean();
    let interior = nx - 2;
    let mut scratch = Vec::new();
    let mut rhs = vec![0.0; interior];
    let mut sol = vec![0.0; interior];

    if homogeneous {
        let alpha: Vec<f64> = (1..nx - 1)
            .map(|j| 0.5 * ds * psi_first[j] * psi_first[j] / (dx * dx))
            .collect();
        let source: Vec<f64> = (1..nx - 1)
            .map(|j| ds * (c - psi_first[j] * psi_first[j]))
            .collect();
        let mut v = vec![0.0; nx];
        let mut converged = false;
        for _ in 0..STATIONARY_MAX_ITERS {
            for j in 0..interior {
                rhs[j] = v[j + 1] + source[j];
            }
            implicit_step(&alpha, &rhs, &mut sol, &mut scratch)?;
            let mut change: f64 = 0.0;
            for j in 0..interior {
                let new = sol[j].min(0.0);
                change = change.max((new - v[j + 1]).abs());
                v[j + 1] = new;
            }
            if change < STATIONARY_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(StoppingError::GridUnstable(format!(
                "stationary iteration still changing after {STATIONARY_MAX_ITERS} sweeps"
            )));
        }
        let stop_mask: Vec<bool> = v.iter().map(|&x| x >= -EPSILON_STOP).collect();
        let boundary = vec![extract_boundary(0.0, &x_grid, &v)];
        let solution = StoppingSolution {
            prior: mu.clone(),
            c,
            s_max,
            stationary: true,
            s_grid: vec![0.0],
            x_grid,
            values: v,
            stop_mask,
            boundary,
            v0: 0.0,
        };
        let v0 = solution.row_value_at(0, mean);
        return Ok(StoppingSolution { v0, ..solution });
    }

    let max_psi_sq = psi_last.iter().map(|p| p * p).fold(0.0, f64::max);
    if max_psi_sq > c {
        return Err(StoppingError::HorizonTooShort { max_psi_sq, c });
    }

    let s_grid: Vec<f64> = (0..=ns).map(|i| s_max * i as f64 / ns as f64).collect();
    let nx_f = x_grid.len();
    let mut values = vec![0.0; (ns + 1) * nx_f];
    let mut v_next = vec![0.0; nx_f]; // terminal level: stop everywhere
    let mut alpha = vec![0.0; interior];
    for i in (0..ns).rev() {
        let psi = psi_row(s_grid[i])?;
        for j in 0..interior {
            let p2 = psi[j + 1] * psi[j + 1];
            alpha[j] = 0.5 * ds * p2 / (dx * dx);
            rhs[j] = v_next[j + 1] + ds * (c - p2);
        }
        implicit_step(&alpha, &rhs, &mut sol, &mut scratch)?;
        let row = &mut values[i * nx_f..(i + 1) * nx_f];
        row[0] = 0.0;
        row[nx_f - 1] = 0.0;
        for j in 0..interior {
            row[j + 1] = sol[j].min(0.0);
        }
        v_next.copy_from_slice(row);
    }

    let stop_mask: Vec<bool> = values.iter().map(|&v| v >= -EPSILON_STOP).collect();
    let boundary: Vec<BoundaryRow> = (0..=ns)
        .map(|i| extract_boundary(s_grid[i], &x_grid, &values[i * nx_f..(i + 1) * nx_f]))
        .collect();
    let solution = StoppingSolution {
        prior: mu.clone(),
        c,
        s_max,
        stationary: false,
        s_grid,
        x_grid,
        values,
        stop_mask,
        boundary,
        v0: 0.0,
    };
    let v0 = solution.row_value_at(0, mean);
    Ok(StoppingSolution { v0, ..solution })
}

/// Closed-form optimal stopping time for a Gaussian prior under full
/// observation intensity: `τ* = (1/√c − 1/σ²)⁺`, a deterministic time.
pub fn gaussian_tau_star(sigma2: f64, c: f64) -> f64 {
    (1.0 / c.sqrt() - 1.0 / sigma2).max(0.0)
}

/// Stop time of the reduced constant-intensity problem in the original
/// clock: `t₀ = τ*/u₀²` (clock scaling of the Gaussian closed form).
pub fn gaussian_reduced_stop_time(sigma2: f64, c: f64, u0: f64) -> f64 {
    gaussian_tau_star(sigma2, c) / (u0 * u0)
}

/// Symmetric-interval stopping threshold for a two-point prior: the value
/// function solver's boundary at clock zero.
///
/// Returns `a` such that stopping is optimal once the posterior mean leaves
/// `(−a, a)`; `a = 0` means stop at once (running cost never negative at the
/// start value).
pub fn bernoulli_threshold(p: f64, beta: f64, c: f64, nx: usize) -> Result<f64, StoppingError> {
    let mu = PriorMeasure::two_point(p, beta)
        .map_err(|e| StoppingError::InvalidConfig(e.to_string()))?;
    // the stationary fixed point does not depend on the pseudo-step
    let sol = solve_value_function(&mu, c, 4.0, nx, 80)?;
    Ok(sol.boundary[0].upper.unwrap_or(0.0))
}

/// Independent oracle for the symmetric two-point threshold (`p = 1/2`):
/// shooting on the stationary obstacle ODE.
///
/// In the continuation interval `(−a, a)` the value solves
/// `½ψ²(x) v″ + (c − ψ²(x)) = 0` with `ψ(x) = β² − x²`, so
/// `v″ = 2 − 2c/ψ²` explicitly; symmetry gives `v′(0) = 0` and smooth fit at
/// the boundary requires `v′(a) = ∫₀^a (2 − 2c/ψ²(y)) dy = 0`.  The root is
/// bracketed between the stationary point of `v′` and `β` and found by
/// bisection, with the inner integral evaluated by Simpson quadrature.
pub fn smooth_fit_shoot(beta: f64, c: f64) -> Result<f64, StoppingError> {
    if !(beta > 0.0 && c > 0.0) {
        return Err(StoppingError::InvalidConfig(format!(
            "need beta > 0 and c > 0, got beta={beta}, c={c}"
        )));
    }
    let b2 = beta * beta;
    if c >= b2 * b2 {
        return Ok(0.0); // running cost nonnegative everywhere: stop at once
    }
    let integrand = |y: f64| {
        let p = b2 - y * y;
        1.0 / (p * p)
    };
    let smooth_fit_defect = |a: f64| 2.0 * a - 2.0 * c * simpson(integrand, 0.0, a, 2000);
    let mut lo = (b2 - c.sqrt()).sqrt(); // v′ increases up to here, so defect > 0
    let mut hi = beta * (1.0 - 1e-12);
    if smooth_fit_defect(hi) >= 0.0 {
        return Err(StoppingError::GridUnstable(
            "smooth-fit defect does not change sign before the support endpoint".into(),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if smooth_fit_defect(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2) & !1; // even
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// First grid index at which the path's `(A(t), X̂(t))` enters the stopping
/// region.  This is a legitimate stopping rule in the original clock: the
/// clock change maps stopping times of the time-changed filtration back to
/// observation stopping times.
pub fn first_entry_time(path: &PathRecord, sol: &StoppingSolution) -> Result<usize, StoppingError> {
    for (k, st) in path.states.iter().enumerate() {
        match sol.in_stop_region(st.a, st.xhat) {
            Some(true) => return Ok(k),
            Some(false) => {}
            None => {
                return Err(StoppingError::NeverStops {
                    s: st.a,
                    s_max: sol.s_max,
                })
            }
        }
    }
    Err(StoppingError::NeverStops {
        s: path.states.last().map(|s| s.a).unwrap_or(0.0),
        s_max: sol.s_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{simulate_path, path_rng, ControlPolicy};

    #[test]
    fn tau_star_closed_form() {
        assert_eq!(gaussian_tau_star(1.0, 0.25), 1.0);
        assert_eq!(gaussian_tau_star(1.0, 4.0), 0.0);
        assert!((gaussian_tau_star(2.0, 0.25) - 1.5).abs() < 1e-15);
        assert!((gaussian_reduced_stop_time(2.0, 0.25, 0.5) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn cheap_observation_never_stops_early_gaussian() {
        // c >= Ψ²(0): running cost nonnegative from the start, v ≡ 0.
        let mu = PriorMeasure::gaussian(0.0, 1.0).unwrap();
        let sol = solve_value_function(&mu, 4.0, 1.0, 41, 50).unwrap();
        assert!(sol.values.iter().all(|&v| v == 0.0));
        assert!(sol.stop_mask.iter().all(|&m| m));
        assert_eq!(sol.entry_time_in_s(0.0), Some(0.0));
        assert!(sol.boundary.iter().all(|b| b.lower.is_none() && b.upper.is_none()));
    }

    #[test]
    fn gaussian_value_at_origin_matches_analytic_integral() {
        let mu = PriorMeasure::gaussian(0.0, 1.0).unwrap();
        let sol = solve_value_function(&mu, 0.25, 2.0, 201, 2000).unwrap();
        assert!((sol.v0 - (-0.25)).abs() < 1e-3, "v0 = {}", sol.v0);
        let s_star = sol.entry_time_in_s(0.0).unwrap();
        assert!((s_star - 1.0).abs() <= 2.0 * 2.0 / 2000.0, "s* = {s_star}");
    }

    #[test]
    fn short_horizon_is_rejected() {
        let mu = PriorMeasure::gaussian(0.0, 1.0).unwrap();
        let err = solve_value_function(&mu, 0.25, 0.5, 41, 50).unwrap_err();
        assert!(matches!(err, StoppingError::HorizonTooShort { .. }));
    }

    #[test]
    fn smooth_fit_immediate_stop_cases() {
        assert_eq!(smooth_fit_shoot(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(smooth_fit_shoot(1.0, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn smooth_fit_matches_closed_form_antiderivative_root() {
        // Root of 2a = 2c [ a/(2β²(β²−a²)) + ln((β+a)/(β−a))/(4β³) ],
        // computed independently to full precision.
        let a = smooth_fit_shoot(1.0, 0.1).unwrap();
        assert!((a - 0.971534889508487).abs() < 1e-6, "a = {a}");
        assert!(a < 1.0);
    }

    #[test]
    fn solver_and_shooting_agree_on_threshold() {
        let nx = 2001;
        let cell = 2.0 / (nx - 1) as f64;
        let a_solver = bernoulli_threshold(0.5, 1.0, 0.1, nx).unwrap();
        let a_shoot = smooth_fit_shoot(1.0, 0.1).unwrap();
        assert!(
            (a_solver - a_shoot).abs() <= 2.0 * cell,
            "solver {a_solver} vs shooting {a_shoot} (cell {cell})"
        );
        assert!((0.0..1.0).contains(&a_solver));
    }

    #[test]
    fn symmetric_prior_gives_symmetric_boundaries() {
        let mu = PriorMeasure::two_point(0.5, 1.0).unwrap();
        let sol = solve_value_function(&mu, 0.1, 4.0, 2001, 80).unwrap();
        assert!(sol.stationary);
        let b = &sol.boundary[0];
        let (lo, hi) = (b.lower.unwrap(), b.upper.unwrap());
        let cell = sol.x_grid[1] - sol.x_grid[0];
        assert!((lo + hi).abs() < cell, "asymmetry {lo} + {hi}");
    }

    #[test]
    fn expensive_observation_stops_at_once_two_point() {
        // c >= β⁴ = 1 and m = 0
        let a = bernoulli_threshold(0.5, 1.0, 1.5, 201).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn first_entry_is_deterministic_for_gaussian() {
        let mu = PriorMeasure::gaussian(0.0, 1.0).unwrap();
        let sol = solve_value_function(&mu, 0.25, 2.0, 201, 2000).unwrap();
        let mut indices = Vec::new();
        for p in 0..5 {
            let mut rng = path_rng(21, p);
            let path = simulate_path(&mu, &ControlPolicy::FullBang, 1e-3, 2.0, &mut rng).unwrap();
            indices.push(first_entry_time(&path, &sol).unwrap());
        }
        assert!(indices.windows(2).all(|w| w[0] == w[1]), "{indices:?}");
        let t_stop = indices[0] as f64 * 1e-3;
        assert!((t_stop - 1.0).abs() <= 1e-3, "t* = {t_stop}");
    }

    #[test]
    fn start_inside_stop_region_stops_immediately() {
        let mu = PriorMeasure::gaussian(0.0, 1.0).unwrap();
        let sol = solve_value_function(&mu, 4.0, 1.0, 41, 50).unwrap();
        let mut rng = path_rng(22, 0);
        let path = simulate_path(&mu, &ControlPolicy::FullBang, 1e-3, 0.5, &mut rng).unwrap();
        assert_eq!(first_entry_time(&path, &sol).unwrap(), 0);
    }

    #[test]
    fn two_point_first_entry_is_threshold_exit() {
        let mu = PriorMeasure::two_point(0.5, 1.0).unwrap();
        let sol = solve_value_function(&mu, 0.1, 4.0, 2001, 80).unwrap();
        let a = sol.boundary[0].upper.unwrap();
        let mut rng = path_rng(23, 4);
        let path = simulate_path(&mu, &ControlPolicy::FullBang, 1e-3, 30.0, &mut rng).unwrap();
        let k = first_entry_time(&path, &sol).unwrap();
        assert!(path.states[k].xhat.abs() >= a - 1e-6, "xhat at entry");
        for st in &path.states[..k] {
            assert!(st.xhat.abs() < a + 1e-9);
        }
    }

    #[test]
    fn never_stopping_is_reported_for_short_solved_range() {
        let mu = PriorMeasure::gaussian(0.0, 1.0).unwrap();
        // stopping boundary at s = 3 but path clock only solved to s_max = 4;
        // simulate far enough that a(t) overruns s_max before entry
        let sol = solve_value_function(&mu, 1.0 / 16.0, 4.0, 41, 400).unwrap();
        let mut rng = path_rng(24, 0);
        let path = simulate_path(&mu, &ControlPolicy::FullBang, 1e-2, 2.0, &mut rng).unwrap();
        // horizon 2 < boundary 3: path ends before entering
        assert!(matches!(
            first_entry_time(&path, &sol),
            Err(StoppingError::NeverStops { .. })
        ));
    }
}
