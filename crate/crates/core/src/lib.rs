//! Sequential least-squares estimation of a hidden random quantity observed in
//! white noise, with a controllable observation intensity and discretionary
//! stopping.
//!
//! The library is organized around the sufficient statistic of the problem:
//! the accumulated observation clock `A(t) = ∫ u² ds` and the weighted
//! observation `Z(t) = ∫ u dY`.  Everything else derives from exponentially
//! tilting the prior by `exp(bζ − b²θ/2)`:
//!
//! - [`prior`] — the prior law of the hidden quantity (Gaussian, two-point,
//!   discrete, tabulated density), its moments, support and sampling;
//! - [`widder`] — the tilt normalizer `F(θ,ζ)` (the Widder transform), the
//!   posterior mean `G = ∂ζ log F`, the posterior variance `H = DG`, the
//!   variance field `Ψ(θ,x) = H(θ, G⁻¹(x))`, and the tilted posterior measure;
//! - [`filter`] — exact path simulation of the observation model under a
//!   feedback control policy, innovations, and the intrinsic-clock time change;
//! - [`stopping`] — the free-boundary solver for the optimal stopping value
//!   function of the time-changed posterior mean, plus closed forms for the
//!   Gaussian and symmetric two-point cases;
//! - [`control`] — observation cost functions, their reduction to an optimal
//!   constant intensity, and Monte Carlo policy comparison under common
//!   random numbers;
//! - [`diagnostics`] — residual checks of the PDEs satisfied by `F`, `G`,
//!   `H`, `Ψ` used by the verification suites;
//! - [`stats`] — small Monte Carlo summary helpers (means, standard errors,
//!   survival curves, two-sample Kolmogorov–Smirnov distance).

pub mod control;
pub mod diagnostics;
pub mod filter;
pub mod prior;
pub mod stats;
pub mod stopping;
pub mod widder;

pub use prior::{PriorError, PriorMeasure, SupportInterval};
pub use widder::{PosteriorSummary, WidderError, WidderPoint};
