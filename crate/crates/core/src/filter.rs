//! Exact filtering along simulated observation paths.
//!
//! The hidden draw `X ~ 𝛍` is observed through `dY = X u dt + dW` with a
//! controllable intensity `u ∈ (0,1]`.  The filter state is the sufficient
//! statistic `(A, Z) = (∫u² ds, ∫u dY)`; the conditional mean and variance
//! are read off exactly as `X̂ = G(A, Z)` and `V = H(A, Z)` at every step —
//! there is no Euler discretization of the conditional-mean dynamics.  The
//! only discretization is the piecewise-constant control (frozen over each
//! `dt` cell, sampled at the cell's left endpoint) and the Brownian step
//! itself, which keeps the `A` and `Z` updates exact and reproducible.
//!
//! Reproducibility contract: path `p` of a run with seed `s` draws from
//! [`path_rng`]`(s, p)`, an independent substream, so identical
//! `(seed, path-index)` yields an identical path regardless of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prior::PriorMeasure;
use crate::stats::MonteCarloEstimate;
use crate::widder::{self, WidderError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("control value {u} outside (0, 1]")]
    PolicyRange { u: f64 },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("observation clock stalled for longer than one dt cell")]
    ClockStall,
    #[error(transparent)]
    Widder(#[from] WidderError),
}

/// Observation-intensity policy.  Every emitted value must lie in `(0,1]`;
/// all variants here are bounded below by a positive constant, which is the
/// (stronger, machine-checkable) sufficient condition for the long-run
/// average-intensity requirement on admissible controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControlPolicy {
    /// `u ≡ 1`: observe at maximal intensity.
    FullBang,
    /// `u ≡ u0` for a constant `u0 ∈ (0,1]`.
    Constant { u: f64 },
    /// Piecewise-constant schedule: `u(t) = u_k` for `t ∈ [t_k, t_{k+1})`.
    /// The first entry must start at `t = 0`.
    Piecewise { steps: Vec<(f64, f64)> },
    /// Markov feedback on the current filter state:
    /// `u = min(1, floor + gain · V(t))`, so `u ∈ [floor, 1]`.
    Feedback { floor: f64, gain: f64 },
}

impl ControlPolicy {
    pub fn validate(&self) -> Result<(), FilterError> {
        let ok_u = |u: f64| u.is_finite() && u > 0.0 && u <= 1.0;
        match self {
            Self::FullBang => Ok(()),
            Self::Constant { u } => {
                if ok_u(*u) {
                    Ok(())
                } else {
                    Err(FilterError::PolicyRange { u: *u })
                }
            }
            Self::Piecewise { steps } => {
                if steps.is_empty() {
                    return Err(FilterError::InvalidPolicy("empty schedule".into()));
                }
                if steps[0].0 != 0.0 {
                    return Err(FilterError::InvalidPolicy(
                        "schedule must start at t = 0".into(),
                    ));
                }
                for w in steps.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(FilterError::InvalidPolicy(
                            "schedule times must be strictly increasing".into(),
                        ));
                    }
                }
                for &(_, u) in steps {
                    if !ok_u(u) {
                        return Err(FilterError::PolicyRange { u });
                    }
                }
                Ok(())
            }
            Self::Feedback { floor, gain } => {
                if !ok_u(*floor) {
                    return Err(FilterError::PolicyRange { u: *floor });
                }
                if !gain.is_finite() || *gain < 0.0 {
                    return Err(FilterError::InvalidPolicy(format!(
                        "feedback gain must be finite and >= 0, got {gain}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Control value for the cell starting at `t` with filter state `state`.
    pub fn rate(&self, t: f64, state: &FilterState) -> f64 {
        match self {
            Self::FullBang => 1.0,
            Self::Constant { u } => *u,
            Self::Piecewise { steps } => {
                let idx = steps.partition_point(|&(tk, _)| tk <= t);
                steps[idx.saturating_sub(1)].1
            }
            Self::Feedback { floor, gain } => (floor + gain * state.v).min(1.0),
        }
    }
}

/// Filter state at one time point: the sufficient statistic `(a, z)` plus
/// the derived conditional mean `xhat` and conditional variance `v`.
///
/// Invariants maintained by the stepper: `a` is nondecreasing with `a ≤ t`,
/// `xhat` stays inside the support interval, and `v = Ψ(a, xhat)` up to the
/// accuracy of the mean inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterState {
    pub t: f64,
    pub a: f64,
    pub z: f64,
    pub xhat: f64,
    pub v: f64,
}

/// One simulated trajectory.
///
/// `states` has `n+1` entries (including `t = 0`); `controls` and
/// `innovations` have `n` (one per cell); `m_series` has `n+1` running values
/// of the martingale `M(t) = ∫ u dN` starting at zero.
#[derive(Debug, Clone)]
pub struct PathRecord {
    pub x_true: f64,
    pub dt: f64,
    pub states: Vec<FilterState>,
    pub controls: Vec<f64>,
    pub innovations: Vec<f64>,
    pub m_series: Vec<f64>,
}

impl PathRecord {
    pub fn n_steps(&self) -> usize {
        self.controls.len()
    }

    pub fn horizon(&self) -> f64 {
        self.states.last().map(|s| s.t).unwrap_or(0.0)
    }
}

/// The exogenous randomness of one path: the hidden draw and the Brownian
/// increments.  Sharing one draw across policies implements common random
/// numbers.
#[derive(Debug, Clone)]
pub struct NoiseDraw {
    pub x: f64,
    pub dw: Vec<f64>,
}

impl NoiseDraw {
    /// Draws `X ~ 𝛍` and `n` Brownian increments `ΔW ~ N(0, dt)`, in that
    /// order, from `rng`.
    pub fn draw<R: Rng + ?Sized>(mu: &PriorMeasure, n: usize, dt: f64, rng: &mut R) -> Self {
        let x = mu.sample(rng);
        let sqrt_dt = dt.sqrt();
        let dw = (0..n)
            .map(|_| sqrt_dt * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self { x, dw }
    }
}

/// Deterministic per-path generator: an independent ChaCha stream derived
/// from `(seed, path_index)`.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Incremental filter update shared by [`simulate_path_from_draw`] and the
/// streaming policy comparator.
pub(crate) struct FilterStepper<'a> {
    mu: &'a PriorMeasure,
    dt: f64,
    pub state: FilterState,
}

impl<'a> FilterStepper<'a> {
    pub fn new(mu: &'a PriorMeasure, dt: f64) -> Self {
        Self {
            mu,
            dt,
            state: FilterState {
                t: 0.0,
                a: 0.0,
                z: 0.0,
                xhat: mu.mean(),
                v: mu.variance(),
            },
        }
    }

    /// Advances one cell with control `u` and observation increment `dy`.
    /// Returns the innovation increment `ΔN = ΔY − X̂ u dt`.
    pub fn step(&mut self, step_index: usize, u: f64, dy: f64) -> Result<f64, FilterError> {
        if !(u.is_finite() && u > 0.0 && u <= 1.0) {
            return Err(FilterError::PolicyRange { u });
        }
        let dn = dy - self.state.xhat * u * self.dt;
        let a = self.state.a + u * u * self.dt;
        let z = self.state.z + u * dy;
        let (xhat, v) = widder::posterior_mean_and_var(self.mu, a, z)?;
        self.state = FilterState {
            t: (step_index + 1) as f64 * self.dt,
            a,
            z,
            xhat,
            v,
        };
        Ok(dn)
    }
}

/// Simulates one path on a given noise draw (the deterministic part of
/// [`simulate_path`]).
pub fn simulate_path_from_draw(
    mu: &PriorMeasure,
    policy: &ControlPolicy,
    dt: f64,
    draw: &NoiseDraw,
) -> Result<PathRecord, FilterError> {
    policy.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(FilterError::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let n = draw.dw.len();
    let mut stepper = FilterStepper::new(mu, dt);
    let mut states = Vec::with_capacity(n + 1);
    let mut controls = Vec::with_capacity(n);
    let mut innovations = Vec::with_capacity(n);
    let mut m_series = Vec::with_capacity(n + 1);
    states.push(stepper.state);
    m_series.push(0.0);
    let mut m = 0.0;
    for k in 0..n {
        let u = policy.rate(stepper.state.t, &stepper.state);
        let dy = draw.x * u * dt + draw.dw[k];
        let dn = stepper.step(k, u, dy)?;
        m += u * dn;
        states.push(stepper.state);
        controls.push(u);
        innovations.push(dn);
        m_series.push(m);
    }
    Ok(PathRecord {
        x_true: draw.x,
        dt,
        states,
        controls,
        innovations,
        m_series,
    })
}

/// Draws `X` and a Brownian path, then runs the filter under `policy` on a
/// uniform grid with `round(horizon/dt)` cells.
pub fn simulate_path<R: Rng + ?Sized>(
    mu: &PriorMeasure,
    policy: &ControlPolicy,
    dt: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<PathRecord, FilterError> {
    if !(dt > 0.0 && horizon >= dt) {
        return Err(FilterError::InvalidConfig(format!(
            "need 0 < dt <= horizon, got dt={dt}, horizon={horizon}"
        )));
    }
    let n = (horizon / dt).round() as usize;
    let draw = NoiseDraw::draw(mu, n, dt, rng);
    simulate_path_from_draw(mu, policy, dt, &draw)
}

/// A path re-parametrized by the intrinsic clock `s = A(t)`.
///
/// `q[j] = X̂(T(s_j))` and `b[j] = M(T(s_j))` where `T` is the inverse clock;
/// `t_of_s[j] = T(s_j)`.
#[derive(Debug, Clone)]
pub struct TimeChange {
    pub s: Vec<f64>,
    pub t_of_s: Vec<f64>,
    pub q: Vec<f64>,
    pub b: Vec<f64>,
}

/// Samples `(Q, B)` on a uniform grid of `n_out` points over `[0, A(horizon)]`
/// by monotone linear interpolation of the clock.
///
/// The clock is piecewise linear and strictly increasing for any admissible
/// control, so the round trip `A(T(s)) = s` holds within one cell.
pub fn time_change(path: &PathRecord, n_out: usize) -> Result<TimeChange, FilterError> {
    if n_out < 2 {
        return Err(FilterError::InvalidConfig("need at least 2 output samples".into()));
    }
    let states = &path.states;
    for w in states.windows(2) {
        if !(w[1].a > w[0].a) {
            return Err(FilterError::ClockStall);
        }
    }
    let a_end = states.last().expect("non-empty path").a;
    let mut s_grid = Vec::with_capacity(n_out);
    let mut t_of_s = Vec::with_capacity(n_out);
    let mut q = Vec::with_capacity(n_out);
    let mut b = Vec::with_capacity(n_out);
    for j in 0..n_out {
        let s = a_end * j as f64 / (n_out - 1) as f64;
        // first state index with a >= s
        let k = states.partition_point(|st| st.a < s);
        if k == 0 {
            t_of_s.push(0.0);
            q.push(states[0].xhat);
            b.push(path.m_series[0]);
        } else {
            let (lo, hi) = (&states[k - 1], &states[k]);
            let w = (s - lo.a) / (hi.a - lo.a);
            t_of_s.push(lo.t + w * (hi.t - lo.t));
            q.push(lo.xhat + w * (hi.xhat - lo.xhat));
            b.push(path.m_series[k - 1] + w * (path.m_series[k] - path.m_series[k - 1]));
        }
        s_grid.push(s);
    }
    Ok(TimeChange {
        s: s_grid,
        t_of_s,
        q,
        b,
    })
}

/// Realized total cost of stopping at grid index `stop_index`: squared
/// estimation error plus the accumulated control cost `Σ h(u_k) dt`.
///
/// For the quadratic cost `h(u) = c u²` this equals
/// `(X − X̂(τ))² + c·A(τ)` up to rounding.
///
/// # Panics
/// If `stop_index` exceeds the path horizon.
pub fn evaluate_cost(path: &PathRecord, stop_index: usize, h: impl Fn(f64) -> f64) -> f64 {
    assert!(
        stop_index < path.states.len(),
        "stop index {stop_index} beyond path horizon {}",
        path.states.len() - 1
    );
    let err = path.x_true - path.states[stop_index].xhat;
    let running: f64 = path.controls[..stop_index]
        .iter()
        .map(|&u| h(u) * path.dt)
        .sum();
    err * err + running
}

/// Monte Carlo estimate of `E[V(τ) + ∫₀^τ V² dA]`, which equals `Var(X)` for
/// every admissible policy and bounded stopping rule.
///
/// `stop_rule` maps a simulated path to a stop index (clamped to the
/// horizon).  Paths are simulated in parallel; the estimate accumulates in
/// path order, so results are independent of scheduling.
pub fn variance_identity_check<F>(
    mu: &PriorMeasure,
    policy: &ControlPolicy,
    stop_rule: F,
    n_paths: usize,
    dt: f64,
    horizon: f64,
    seed: u64,
) -> Result<MonteCarloEstimate, FilterError>
where
    F: Fn(&PathRecord) -> usize + Sync + Send,
{
    if n_paths == 0 {
        return Err(FilterError::InvalidConfig("n_paths must be positive".into()));
    }
    let per_path = |p: u64| -> Result<f64, FilterError> {
        let mut rng = path_rng(seed, p);
        let path = simulate_path(mu, policy, dt, horizon, &mut rng)?;
        let k = stop_rule(&path).min(path.n_steps());
        let mut integral = 0.0;
        for i in 0..k {
            let v = path.states[i].v;
            let u = path.controls[i];
            integral += v * v * u * u * dt;
        }
        Ok(path.states[k].v + integral)
    };
    let samples: Result<Vec<f64>, FilterError> =
        par_map_indexed(n_paths, per_path).into_iter().collect();
    Ok(MonteCarloEstimate::from_samples(&samples?))
}

/// Maps `f` over `0..n` (in parallel when the `parallel` feature is on),
/// returning results in index order.
pub(crate) fn par_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n as u64).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n as u64).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian01() -> PriorMeasure {
        PriorMeasure::gaussian(0.0, 1.0).unwrap()
    }

    fn null_noise(n: usize) -> NoiseDraw {
        NoiseDraw {
            x: 0.0,
            dw: vec![0.0; n],
        }
    }

    #[test]
    fn null_noise_path_tracks_closed_form_variance() {
        let mu = gaussian01();
        let path =
            simulate_path_from_draw(&mu, &ControlPolicy::FullBang, 1e-3, &null_noise(1000))
                .unwrap();
        for st in &path.states {
            assert_eq!(st.z, 0.0);
            assert_eq!(st.xhat, 0.0);
            assert!((st.v - 1.0 / (1.0 + st.a)).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_state_is_prior_moments() {
        let mu = PriorMeasure::two_point(0.3, 2.0).unwrap();
        let path = simulate_path_from_draw(
            &mu,
            &ControlPolicy::Constant { u: 0.5 },
            0.01,
            &NoiseDraw {
                x: 2.0,
                dw: vec![0.01; 10],
            },
        )
        .unwrap();
        assert_eq!(path.states[0].xhat, mu.mean());
        assert_eq!(path.states[0].v, mu.variance());
        assert_eq!(path.states[0].t, 0.0);
    }

    #[test]
    fn constant_policy_clock_is_linear() {
        let mu = gaussian01();
        let u0 = 0.5;
        let path = simulate_path_from_draw(
            &mu,
            &ControlPolicy::Constant { u: u0 },
            1e-3,
            &null_noise(2000),
        )
        .unwrap();
        for st in &path.states {
            assert!((st.a - u0 * u0 * st.t).abs() < 1e-9, "a={} t={}", st.a, st.t);
            assert!(st.a <= st.t + 1e-12);
        }
    }

    #[test]
    fn out_of_range_controls_are_rejected() {
        assert!(matches!(
            ControlPolicy::Constant { u: 1.2 }.validate(),
            Err(FilterError::PolicyRange { .. })
        ));
        assert!(matches!(
            ControlPolicy::Constant { u: 0.0 }.validate(),
            Err(FilterError::PolicyRange { .. })
        ));
        assert!(matches!(
            ControlPolicy::Piecewise {
                steps: vec![(0.0, 0.5), (1.0, 0.0)]
            }
            .validate(),
            Err(FilterError::PolicyRange { .. })
        ));
    }

    #[test]
    fn piecewise_schedule_lookup() {
        let policy = ControlPolicy::Piecewise {
            steps: vec![(0.0, 1.0), (0.5, 0.4), (2.0, 0.8)],
        };
        policy.validate().unwrap();
        let st = FilterState {
            t: 0.0,
            a: 0.0,
            z: 0.0,
            xhat: 0.0,
            v: 1.0,
        };
        assert_eq!(policy.rate(0.0, &st), 1.0);
        assert_eq!(policy.rate(0.49, &st), 1.0);
        assert_eq!(policy.rate(0.5, &st), 0.4);
        assert_eq!(policy.rate(3.0, &st), 0.8);
    }

    #[test]
    fn full_bang_time_change_is_identity() {
        let mu = gaussian01();
        let mut rng = path_rng(9, 0);
        let path = simulate_path(&mu, &ControlPolicy::FullBang, 1e-3, 1.0, &mut rng).unwrap();
        let tc = time_change(&path, path.states.len()).unwrap();
        for (j, st) in path.states.iter().enumerate() {
            assert!((tc.q[j] - st.xhat).abs() < 1e-9);
            assert!((tc.t_of_s[j] - st.t).abs() < 1e-9);
        }
        assert_eq!(tc.q[0], mu.mean());
    }

    #[test]
    fn constant_half_time_change_dilates_by_four() {
        let mu = gaussian01();
        let mut rng = path_rng(10, 0);
        let path = simulate_path(
            &mu,
            &ControlPolicy::Constant { u: 0.5 },
            1e-3,
            4.0,
            &mut rng,
        )
        .unwrap();
        let tc = time_change(&path, 101).unwrap();
        for (j, &s) in tc.s.iter().enumerate() {
            assert!((tc.t_of_s[j] - 4.0 * s).abs() < 1e-9, "s={s}");
        }
    }

    #[test]
    fn immediate_stop_cost_is_squared_prior_error() {
        let mu = PriorMeasure::two_point(0.5, 1.0).unwrap();
        let mut rng = path_rng(11, 3);
        let path = simulate_path(&mu, &ControlPolicy::FullBang, 0.01, 0.5, &mut rng).unwrap();
        let c0 = evaluate_cost(&path, 0, |_| 1.0);
        assert!((c0 - (path.x_true - mu.mean()).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn quadratic_cost_equals_clock_form() {
        let mu = gaussian01();
        let c = 0.25;
        let mut rng = path_rng(12, 7);
        let path = simulate_path(
            &mu,
            &ControlPolicy::Feedback {
                floor: 0.3,
                gain: 0.8,
            },
            1e-3,
            2.0,
            &mut rng,
        )
        .unwrap();
        let k = path.n_steps();
        let cost = evaluate_cost(&path, k, |u| c * u * u);
        let clock_form = (path.x_true - path.states[k].xhat).powi(2) + c * path.states[k].a;
        assert!(
            (cost - clock_form).abs() <= 1e-12 * cost.abs().max(1.0),
            "{cost} vs {clock_form}"
        );
    }

    #[test]
    fn constant_running_cost_accumulates_linearly() {
        let mu = gaussian01();
        let path =
            simulate_path_from_draw(&mu, &ControlPolicy::FullBang, 1e-3, &null_noise(500))
                .unwrap();
        let c = 0.1;
        let k = 400;
        let cost = evaluate_cost(&path, k, |_| c);
        let expect = path.states[k].xhat.powi(2) + c * path.states[k].t;
        assert!((cost - expect).abs() < 1e-12);
    }

    #[test]
    fn identical_seed_and_index_reproduce_paths() {
        let mu = PriorMeasure::discrete(vec![(-1.0, 0.3), (0.5, 0.4), (2.0, 0.3)]).unwrap();
        let policy = ControlPolicy::Constant { u: 0.7 };
        let run = |_: ()| {
            let mut rng = path_rng(42, 5);
            simulate_path(&mu, &policy, 0.01, 1.0, &mut rng).unwrap()
        };
        let (a, b) = (run(()), run(()));
        assert_eq!(a.x_true, b.x_true);
        assert_eq!(a.states, b.states);
        assert_eq!(a.innovations, b.innovations);
    }

    #[test]
    fn variance_identity_at_zero_is_prior_variance() {
        let mu = PriorMeasure::two_point(0.4, 1.5).unwrap();
        let est = variance_identity_check(
            &mu,
            &ControlPolicy::FullBang,
            |_| 0,
            64,
            0.01,
            0.1,
            3,
        )
        .unwrap();
        assert_eq!(est.mean, mu.variance());
        assert_eq!(est.std_error, 0.0);
    }
}
