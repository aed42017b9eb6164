//! Prior laws for the hidden quantity.
//!
//! A [`PriorMeasure`] is immutable after construction and safe to share across
//! threads.  Constructors validate and normalize their inputs; deserialized
//! values go through the same path, so a prior loaded from JSON satisfies the
//! same invariants as one built in code.  The wire format is tagged:
//!
//! ```json
//! {"type":"gaussian","mean":0.0,"var":1.0}
//! {"type":"two_point","p":0.5,"beta":1.0}
//! {"type":"discrete","atoms":[[-1.0,0.2],[0.0,0.3],[3.0,0.5]]}
//! {"type":"grid_density","nodes":[...],"density":[...]}
//! ```

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Variance below this cutoff is treated as a point mass, which the model
/// excludes: the posterior-variance field degenerates and the inversion of
/// the posterior mean loses its footing.
pub const DEGENERACY_CUTOFF: f64 = 1e-12;

/// Atom weights below this are dropped at construction so that they cannot
/// widen the support of a discrete prior spuriously.
pub const ATOM_WEIGHT_FLOOR: f64 = 1e-15;

/// Residual mass defect tolerated after normalization.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PriorError {
    #[error("invalid prior parameter: {0}")]
    InvalidParameter(String),
    /// The measure has (numerically) zero variance, i.e. it is a point mass.
    #[error("degenerate prior: variance {var:.3e} is below {DEGENERACY_CUTOFF:.0e}")]
    DegeneratePrior { var: f64 },
}

/// Interior of the smallest closed interval containing the support.
///
/// Bounds are `±f64::INFINITY` for full-line supports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportInterval {
    pub lower: f64,
    pub upper: f64,
}

impl SupportInterval {
    /// Whether `x` lies strictly inside the interval.
    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }
}

/// Wire representation; [`PriorMeasure`] validates on the way in.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum PriorSpec {
    Gaussian { mean: f64, var: f64 },
    TwoPoint { p: f64, beta: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
    GridDensity { nodes: Vec<f64>, density: Vec<f64> },
}

/// The prior distribution of the hidden quantity.
///
/// Supported families: Gaussian, a two-point law on `{−β, +β}` with
/// `P(+β) = p`, a finite discrete mixture, and a piecewise-linear density
/// tabulated on a strictly increasing node grid (trapezoid-normalized).
///
/// Use the constructors ([`PriorMeasure::gaussian`] etc.); they enforce unit
/// mass, strictly positive variance, and drop negligible atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PriorSpec", into = "PriorSpec")]
pub enum PriorMeasure {
    Gaussian { mean: f64, var: f64 },
    TwoPoint { p: f64, beta: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
    GridDensity { nodes: Vec<f64>, density: Vec<f64> },
}

impl TryFrom<PriorSpec> for PriorMeasure {
    type Error = PriorError;

    fn try_from(spec: PriorSpec) -> Result<Self, PriorError> {
        match spec {
            PriorSpec::Gaussian { mean, var } => Self::gaussian(mean, var),
            PriorSpec::TwoPoint { p, beta } => Self::two_point(p, beta),
            PriorSpec::Discrete { atoms } => Self::discrete(atoms),
            PriorSpec::GridDensity { nodes, density } => Self::grid_density(nodes, density),
        }
    }
}

impl From<PriorMeasure> for PriorSpec {
    fn from(mu: PriorMeasure) -> Self {
        match mu {
            PriorMeasure::Gaussian { mean, var } => PriorSpec::Gaussian { mean, var },
            PriorMeasure::TwoPoint { p, beta } => PriorSpec::TwoPoint { p, beta },
            PriorMeasure::Discrete { atoms } => PriorSpec::Discrete { atoms },
            PriorMeasure::GridDensity { nodes, density } => {
                PriorSpec::GridDensity { nodes, density }
            }
        }
    }
}

impl PriorMeasure {
    pub fn gaussian(mean: f64, var: f64) -> Result<Self, PriorError> {
        if !mean.is_finite() || !var.is_finite() {
            return Err(PriorError::InvalidParameter(
                "gaussian mean/var must be finite".into(),
            ));
        }
        if var <= DEGENERACY_CUTOFF {
            return Err(PriorError::DegeneratePrior { var });
        }
        Ok(Self::Gaussian { mean, var })
    }

    pub fn two_point(p: f64, beta: f64) -> Result<Self, PriorError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(PriorError::InvalidParameter(format!(
                "two-point p must lie in (0,1), got {p}"
            )));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(PriorError::InvalidParameter(format!(
                "two-point beta must be positive, got {beta}"
            )));
        }
        let var = 4.0 * beta * beta * p * (1.0 - p);
        if var <= DEGENERACY_CUTOFF {
            return Err(PriorError::DegeneratePrior { var });
        }
        Ok(Self::TwoPoint { p, beta })
    }

    /// Builds a discrete mixture from `(location, weight)` pairs.
    ///
    /// Weights are normalized to unit mass; atoms with normalized weight
    /// below [`ATOM_WEIGHT_FLOOR`] are dropped (and the rest renormalized).
    /// At least two distinct locations must survive.
    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self, PriorError> {
        if atoms.is_empty() {
            return Err(PriorError::InvalidParameter("discrete prior has no atoms".into()));
        }
        for &(b, w) in &atoms {
            if !b.is_finite() || !w.is_finite() {
                return Err(PriorError::InvalidParameter("atom entries must be finite".into()));
            }
            if w < 0.0 {
                return Err(PriorError::InvalidParameter(format!(
                    "atom weight must be nonnegative, got {w}"
                )));
            }
        }
        let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
        if total <= 0.0 {
            return Err(PriorError::InvalidParameter("atom weights sum to zero".into()));
        }
        let mut kept: Vec<(f64, f64)> = atoms
            .into_iter()
            .filter_map(|(b, w)| {
                let w = w / total;
                (w >= ATOM_WEIGHT_FLOOR).then_some((b, w))
            })
            .collect();
        // Merge duplicate locations so the distinctness check is honest.
        kept.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(kept.len());
        for (b, w) in kept {
            match merged.last_mut() {
                Some(last) if last.0 == b => last.1 += w,
                _ => merged.push((b, w)),
            }
        }
        let total: f64 = merged.iter().map(|&(_, w)| w).sum();
        for atom in &mut merged {
            atom.1 /= total;
        }
        if merged.len() < 2 {
            return Err(PriorError::DegeneratePrior { var: 0.0 });
        }
        let mu = Self::Discrete { atoms: merged };
        let var = mu.variance();
        if var <= DEGENERACY_CUTOFF {
            return Err(PriorError::DegeneratePrior { var });
        }
        Ok(mu)
    }

    /// Builds a piecewise-linear density on a strictly increasing node grid.
    ///
    /// The density is normalized so that its trapezoid integral is one; all
    /// moments are computed with the same rule on the same nodes, so no hidden
    /// re-gridding takes place.
    pub fn grid_density(nodes: Vec<f64>, density: Vec<f64>) -> Result<Self, PriorError> {
        if nodes.len() < 3 {
            return Err(PriorError::InvalidParameter(
                "grid density needs at least 3 nodes".into(),
            ));
        }
        if nodes.len() != density.len() {
            return Err(PriorError::InvalidParameter(format!(
                "{} nodes vs {} density values",
                nodes.len(),
                density.len()
            )));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(PriorError::InvalidParameter(
                    "grid nodes must be strictly increasing".into(),
                ));
            }
        }
        for &f in &density {
            if !f.is_finite() || f < 0.0 {
                return Err(PriorError::InvalidParameter(
                    "density values must be finite and nonnegative".into(),
                ));
            }
        }
        let mass = trapezoid(&nodes, &density, |_| 1.0);
        if mass <= 0.0 {
            return Err(PriorError::InvalidParameter("density has zero mass".into()));
        }
        let density: Vec<f64> = density.iter().map(|f| f / mass).collect();
        let mu = Self::GridDensity { nodes, density };
        let var = mu.variance();
        if var <= DEGENERACY_CUTOFF {
            return Err(PriorError::DegeneratePrior { var });
        }
        Ok(mu)
    }

    /// First moment `m = ∫ b 𝛍(db)`.
    ///
    /// Exact for the parametric families; trapezoid quadrature on the given
    /// nodes for a grid density.
    pub fn mean(&self) -> f64 {
        match self {
            Self::Gaussian { mean, .. } => *mean,
            Self::TwoPoint { p, beta } => beta * (2.0 * p - 1.0),
            Self::Discrete { atoms } => atoms.iter().map(|&(b, w)| b * w).sum(),
            Self::GridDensity { nodes, density } => trapezoid(nodes, density, |x| x),
        }
    }

    /// Central second moment, strictly positive by construction.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        match self {
            Self::Gaussian { var, .. } => *var,
            Self::TwoPoint { beta, .. } => beta * beta - m * m,
            Self::Discrete { atoms } => atoms.iter().map(|&(b, w)| w * (b - m) * (b - m)).sum(),
            Self::GridDensity { nodes, density } => {
                trapezoid(nodes, density, |x| (x - m) * (x - m))
            }
        }
    }

    /// Interior of the smallest closed interval containing the support.
    pub fn support_interval(&self) -> SupportInterval {
        match self {
            Self::Gaussian { .. } => SupportInterval {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            },
            Self::TwoPoint { beta, .. } => SupportInterval {
                lower: -beta,
                upper: *beta,
            },
            Self::Discrete { atoms } => SupportInterval {
                lower: atoms.first().map(|a| a.0).unwrap_or(f64::NEG_INFINITY),
                upper: atoms.last().map(|a| a.0).unwrap_or(f64::INFINITY),
            },
            Self::GridDensity { nodes, density } => {
                let first = density.iter().position(|&f| f > 0.0).unwrap_or(0);
                let last = density.iter().rposition(|&f| f > 0.0).unwrap_or(nodes.len() - 1);
                SupportInterval {
                    lower: nodes[first],
                    upper: nodes[last],
                }
            }
        }
    }

    /// Draws one sample.  Deterministic given the generator state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian { mean, var } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + var.sqrt() * z
            }
            Self::TwoPoint { p, beta } => {
                if rng.random::<f64>() < *p {
                    *beta
                } else {
                    -beta
                }
            }
            Self::Discrete { atoms } => {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                for &(b, w) in atoms {
                    acc += w;
                    if u < acc {
                        return b;
                    }
                }
                atoms.last().expect("non-empty by construction").0
            }
            Self::GridDensity { nodes, density } => sample_grid_density(nodes, density, rng),
        }
    }
}

/// Trapezoid rule for `∫ g(x) f(x) dx` over the tabulated density.
fn trapezoid(nodes: &[f64], density: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..nodes.len() - 1 {
        let dx = nodes[i + 1] - nodes[i];
        acc += 0.5 * dx * (g(nodes[i]) * density[i] + g(nodes[i + 1]) * density[i + 1]);
    }
    acc
}

/// Inverse-CDF sampling for a piecewise-linear density: the CDF is piecewise
/// quadratic, so each cell inverts with one stable quadratic solve.
fn sample_grid_density<R: Rng + ?Sized>(nodes: &[f64], density: &[f64], rng: &mut R) -> f64 {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    for i in 0..nodes.len() - 1 {
        let dx = nodes[i + 1] - nodes[i];
        let (f0, f1) = (density[i], density[i + 1]);
        let cell_mass = 0.5 * dx * (f0 + f1);
        if u < acc + cell_mass || i == nodes.len() - 2 {
            let r = (u - acc).clamp(0.0, cell_mass);
            // Solve f0*s + (f1-f0)/(2*dx) * s^2 = r for s in [0, dx].
            let slope = (f1 - f0) / dx;
            let s = if slope.abs() * dx < 1e-14 * (f0 + f1).max(1e-300) {
                if f0 > 0.0 {
                    r / f0
                } else {
                    dx
                }
            } else {
                let disc = (f0 * f0 + 2.0 * slope * r).max(0.0);
                (disc.sqrt() - f0) / slope
            };
            return nodes[i] + s.clamp(0.0, dx);
        }
        acc += cell_mass;
    }
    *nodes.last().expect("at least 3 nodes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn gaussian_moments_are_parameters() {
        let mu = PriorMeasure::gaussian(2.0, 1.0).unwrap();
        assert_eq!(mu.mean(), 2.0);
        let mu = PriorMeasure::gaussian(0.0, 4.0).unwrap();
        assert_eq!(mu.variance(), 4.0);
    }

    #[test]
    fn two_point_moments() {
        let mu = PriorMeasure::two_point(0.5, 1.0).unwrap();
        assert_eq!(mu.mean(), 0.0);
        assert!((mu.variance() - 1.0).abs() < 1e-15);

        // weighted sum of two atoms: 2*(0.75) - 2*(0.25) = 1.0
        let mu = PriorMeasure::two_point(0.75, 2.0).unwrap();
        assert!((mu.mean() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_atom_is_degenerate() {
        let err = PriorMeasure::discrete(vec![(1.0, 1.0)]).unwrap_err();
        assert!(matches!(err, PriorError::DegeneratePrior { .. }));
        // Two atoms at the same location merge and degenerate too.
        let err = PriorMeasure::discrete(vec![(1.0, 0.5), (1.0, 0.5)]).unwrap_err();
        assert!(matches!(err, PriorError::DegeneratePrior { .. }));
    }

    #[test]
    fn support_intervals() {
        let mu = PriorMeasure::two_point(0.3, 2.0).unwrap();
        assert_eq!(mu.support_interval(), SupportInterval { lower: -2.0, upper: 2.0 });

        let mu = PriorMeasure::gaussian(5.0, 0.1).unwrap();
        let s = mu.support_interval();
        assert!(s.lower.is_infinite() && s.upper.is_infinite());

        let mu = PriorMeasure::discrete(vec![(-1.0, 0.2), (0.0, 0.3), (3.0, 0.5)]).unwrap();
        assert_eq!(mu.support_interval(), SupportInterval { lower: -1.0, upper: 3.0 });
        assert!(mu.support_interval().contains(mu.mean()));
    }

    #[test]
    fn weights_normalize_and_tiny_atoms_drop() {
        let mu = PriorMeasure::discrete(vec![(0.0, 2.0), (1.0, 6.0), (50.0, 1e-17)]).unwrap();
        match &mu {
            PriorMeasure::Discrete { atoms } => {
                assert_eq!(atoms.len(), 2);
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                assert!((total - 1.0).abs() < MASS_TOLERANCE);
                assert!((atoms[0].1 - 0.25).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
        // The dropped atom must not widen the support.
        assert_eq!(mu.support_interval().upper, 1.0);
    }

    #[test]
    fn grid_density_normalizes_to_unit_mass() {
        let nodes = vec![-1.0, 0.0, 0.5, 2.0];
        let density = vec![1.0, 3.0, 2.0, 0.0];
        let mu = PriorMeasure::grid_density(nodes.clone(), density).unwrap();
        match &mu {
            PriorMeasure::GridDensity { density, .. } => {
                let mass = super::trapezoid(&nodes, density, |_| 1.0);
                assert!((mass - 1.0).abs() < MASS_TOLERANCE);
            }
            _ => unreachable!(),
        }
        assert!(mu.support_interval().contains(mu.mean()));
    }

    #[test]
    fn two_point_sampling_degenerate_limit() {
        let eps = 1e-12;
        let mu = PriorMeasure::two_point(1.0 - eps, 1.5).unwrap();
        let mut r = rng(1);
        for _ in 0..1000 {
            assert_eq!(mu.sample(&mut r), 1.5);
        }
    }

    #[test]
    fn gaussian_sample_mean_clt_bound() {
        let mu = PriorMeasure::gaussian(0.0, 1.0).unwrap();
        let mut r = rng(2);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| mu.sample(&mut r)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "sample mean {mean}");
    }

    #[test]
    fn discrete_frequencies_within_binomial_ci() {
        let atoms = vec![(-1.0, 0.2), (0.0, 0.3), (3.0, 0.5)];
        let mu = PriorMeasure::discrete(atoms.clone()).unwrap();
        let mut r = rng(3);
        let n = 100_000usize;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let x = mu.sample(&mut r);
            let idx = atoms.iter().position(|&(b, _)| b == x).unwrap();
            counts[idx] += 1;
        }
        for (i, &(_, w)) in atoms.iter().enumerate() {
            let phat = counts[i] as f64 / n as f64;
            let sigma = (w * (1.0 - w) / n as f64).sqrt();
            assert!(
                (phat - w).abs() < 3.0 * sigma,
                "atom {i}: {phat} vs {w} (3σ = {:.2e})",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn monte_carlo_moments_match_for_every_variant() {
        let variants = vec![
            PriorMeasure::gaussian(1.5, 2.0).unwrap(),
            PriorMeasure::two_point(0.3, 2.0).unwrap(),
            PriorMeasure::discrete(vec![(-2.0, 0.25), (0.5, 0.5), (4.0, 0.25)]).unwrap(),
            PriorMeasure::grid_density(
                vec![-2.0, -1.0, 0.0, 1.0, 2.0],
                vec![0.0, 1.0, 2.0, 1.0, 0.0],
            )
            .unwrap(),
        ];
        let n = 1_000_000usize;
        for (k, mu) in variants.iter().enumerate() {
            let mut r = rng(100 + k as u64);
            let xs: Vec<f64> = (0..n).map(|_| mu.sample(&mut r)).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0);
            let se_mean = (mu.variance() / n as f64).sqrt();
            assert!(
                (m - mu.mean()).abs() < 4.0 * se_mean,
                "variant {k}: mean {m} vs {} (4se = {:.2e})",
                mu.mean(),
                4.0 * se_mean
            );
            // SE of the sample variance ~ sqrt((mu4 - var^2)/n); bound mu4 crudely
            // by the sample fourth moment.
            let mu4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n as f64;
            let se_var = ((mu4 - v * v).max(0.0) / n as f64).sqrt();
            assert!(
                (v - mu.variance()).abs() < 4.0 * se_var + 1e-9,
                "variant {k}: var {v} vs {}",
                mu.variance()
            );
        }
    }

    #[test]
    fn json_round_trip_matches_schema() {
        let mu = PriorMeasure::gaussian(0.0, 1.0).unwrap();
        let s = serde_json::to_string(&mu).unwrap();
        assert_eq!(s, r#"{"type":"gaussian","mean":0.0,"var":1.0}"#);
        let back: PriorMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, mu);

        let mu: PriorMeasure =
            serde_json::from_str(r#"{"type":"two_point","p":0.5,"beta":1.0}"#).unwrap();
        assert_eq!(mu, PriorMeasure::two_point(0.5, 1.0).unwrap());

        // Deserialization validates: a point mass is rejected.
        let err = serde_json::from_str::<PriorMeasure>(r#"{"type":"gaussian","mean":0.0,"var":0.0}"#);
        assert!(err.is_err());
    }
}
