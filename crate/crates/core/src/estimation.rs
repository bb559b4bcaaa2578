//! Seeded Monte Carlo tomography: outcome sampling, linear and
//! maximum-likelihood estimators, and normalized MSE reports.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{check_copies, nhcrb_analytic_origin, nhcrb_sdp};
use crate::error::{Error, Result};
use crate::linalg::real::mat3_inverse;
use crate::linalg::{HermitianOperator, C64};
use crate::model::{
    equal_component_eigensystem, max_equal_component, model_point, pauli, BlochVector,
};
use crate::normalization::Normalization;
use crate::output::format_sig;
use crate::povm::{
    classical_fisher, outcome_probabilities, probability_derivatives, validate_probabilities, Povm,
    WeightSpec,
};
use crate::tol;
use crate::tradeoff::MsePoint;

/// Independent generator for stream `stream` of a seeded experiment.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for a sub-experiment identified by `tags`, mixed with the
/// SplitMix64 finalizer.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut z = seed;
    for &t in tags {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(t);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Multinomial draw of `shots` outcomes by sequential binomials.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    let probs = validate_probabilities(probs, tol::PROBABILITY_SUM)?;
    let mut counts = vec![0; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    for (j, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if j + 1 == probs.len() {
            counts[j] = remaining;
            break;
        }
        let q = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let n = if q >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q)
                .map_err(|e| Error::InvalidProbabilities(e.to_string()))?
                .sample(rng)
        };
        counts[j] = n;
        remaining -= n;
        mass -= p;
    }
    Ok(counts)
}

/// Pure two-copy state and the shots assigned to it.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub state: Vec<C64>,
    pub shots: u64,
}

/// Shots split over the eigenstates of `rho(t,t,t)^{(x)2}` in proportion to
/// the eigenvalues, with largest-remainder rounding.
pub fn mixed_sampling_plan(t: f64, shots: u64) -> Result<Vec<MixtureComponent>> {
    let system = equal_component_eigensystem(t)?;
    let weights: Vec<f64> = system.iter().map(|(w, _)| *w).collect();
    let alloc = largest_remainder(&weights, shots);
    Ok(system
        .into_iter()
        .zip(alloc)
        .map(|((weight, state), shots)| MixtureComponent {
            weight,
            state,
            shots,
        })
        .collect())
}

fn largest_remainder(weights: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut alloc: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = alloc.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take((total - assigned) as usize) {
        alloc[k] += 1;
    }
    alloc
}

/// Outcome probabilities of `povm` for the pure state `psi`.
pub fn pure_state_probabilities(psi: &[C64], povm: &Povm) -> Result<Vec<f64>> {
    if psi.len() != povm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {} but POVM acts on dimension {}",
            psi.len(),
            povm.dim()
        )));
    }
    let raw: Vec<f64> = povm.elements().iter().map(|e| e.expectation(psi)).collect();
    validate_probabilities(
        &raw,
        povm.completeness_tolerance().max(tol::PROBABILITY_SUM),
    )
}

/// Explicit linear estimator for the optimal two-copy measurement at the
/// origin, outcomes ordered `+x, -x, +y, -y, +z, -z, singlet`:
/// `theta_i = (n_{+i} - n_{-i}) / (2 c_i shots)` with
/// `c_i = sqrt(w_i / (w_i + sqrt(w_i w_j) + sqrt(w_i w_k) + sqrt(w_j w_k))) / 2`.
pub fn linear_estimator_origin(counts: &[u64], w: &WeightSpec, shots: u64) -> Result<BlochVector> {
    if counts.len() != 7 {
        return Err(Error::DimensionMismatch(format!(
            "expected 7 outcome counts, got {}",
            counts.len()
        )));
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let c = first_order_coefficients(w)?;
    let theta: [f64; 3] = std::array::from_fn(|i| {
        (counts[2 * i] as f64 - counts[2 * i + 1] as f64) / (2.0 * c[i] * shots as f64)
    });
    Ok(BlochVector::from(theta))
}

/// `c_i` such that `p_{+-i} = 1/8 ... +- c_i theta_i` to first order.
pub fn first_order_coefficients(w: &WeightSpec) -> Result<[f64; 3]> {
    w.require_positive()?;
    let a = w.as_array();
    let cross = (a[0] * a[1]).sqrt() + (a[0] * a[2]).sqrt() + (a[1] * a[2]).sqrt();
    Ok(a.map(|wi| 0.5 * (wi / (wi + cross)).sqrt()))
}

/// Locally unbiased estimator linear in the frequencies,
/// `theta0 + F^-1 grad p_j / p_j` for outcome `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearEstimator {
    values: Vec<[f64; 3]>,
}

impl LinearEstimator {
    pub fn new(theta0: BlochVector, copies: usize, povm: &Povm) -> Result<Self> {
        let m = model_point(theta0, copies)?;
        let p = outcome_probabilities(&m, povm)?;
        let d = probability_derivatives(&m, povm)?;
        let finv = mat3_inverse(&classical_fisher(&m, povm)?.entries)?;
        let t = theta0.as_array();
        let values = (0..povm.len())
            .map(|j| {
                if p[j] < tol::FISHER_CUTOFF {
                    return t;
                }
                std::array::from_fn(|a| {
                    t[a] + (0..3).map(|b| finv[a][b] * d[b][j]).sum::<f64>() / p[j]
                })
            })
            .collect();
        Ok(Self { values })
    }

    pub fn estimate(&self, counts: &[u64]) -> Result<BlochVector> {
        if counts.len() != self.values.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} outcome counts, got {}",
                self.values.len(),
                counts.len()
            )));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("no counts".into()));
        }
        let mut est = [0.0; 3];
        for (n, v) in counts.iter().zip(&self.values) {
            for a in 0..3 {
                est[a] += *n as f64 * v[a];
            }
        }
        Ok(BlochVector::from(est.map(|x| x / total as f64)))
    }
}

/// Outcome probabilities as polynomials in `theta`: with `theta_0 = 1`,
/// `p_j = sum T_j[mu, nu] theta_mu theta_nu` (two copies) or
/// `sum T_j[mu] theta_mu` (one copy).
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityModel {
    copies: usize,
    coefficients: Vec<Vec<f64>>,
}

impl ProbabilityModel {
    pub fn new(copies: usize, povm: &Povm) -> Result<Self> {
        check_copies(copies)?;
        if povm.dim() != 1 << copies {
            return Err(Error::DimensionMismatch(format!(
                "POVM acts on dimension {} but {copies} copies need {}",
                povm.dim(),
                1 << copies
            )));
        }
        let sigma: [HermitianOperator; 4] = std::array::from_fn(|mu| {
            if mu == 0 {
                HermitianOperator::identity(2)
            } else {
                pauli(mu - 1)
            }
        });
        let basis: Vec<HermitianOperator> = if copies == 1 {
            sigma.to_vec()
        } else {
            (0..16).map(|k| sigma[k / 4].kron(&sigma[k % 4])).collect()
        };
        let norm = 1.0 / povm.dim() as f64;
        let coefficients = povm
            .elements()
            .iter()
            .map(|e| basis.iter().map(|b| norm * b.trace_product(e)).collect())
            .collect();
        Ok(Self {
            copies,
            coefficients,
        })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn probability(&self, j: usize, theta: [f64; 3]) -> f64 {
        let t = [1.0, theta[0], theta[1], theta[2]];
        let c = &self.coefficients[j];
        if self.copies == 1 {
            (0..4).map(|mu| c[mu] * t[mu]).sum()
        } else {
            (0..4)
                .map(|mu| t[mu] * (0..4).map(|nu| c[4 * mu + nu] * t[nu]).sum::<f64>())
                .sum()
        }
    }

    pub fn gradient(&self, j: usize, theta: [f64; 3]) -> [f64; 3] {
        let t = [1.0, theta[0], theta[1], theta[2]];
        let c = &self.coefficients[j];
        std::array::from_fn(|i| {
            let a = i + 1;
            if self.copies == 1 {
                c[a]
            } else {
                (0..4)
                    .map(|nu| (c[4 * a + nu] + c[4 * nu + a]) * t[nu])
                    .sum()
            }
        })
    }

    pub fn probabilities(&self, theta: [f64; 3]) -> Vec<f64> {
        (0..self.len())
            .map(|j| self.probability(j, theta))
            .collect()
    }

    /// Mean log-likelihood per count, `sum_j (n_j / N) log p_j`.
    pub fn log_likelihood(&self, freqs: &[f64], theta: [f64; 3]) -> f64 {
        freqs
            .iter()
            .enumerate()
            .filter(|(_, &f)| f > 0.0)
            .map(|(j, &f)| {
                let p = self.probability(j, theta);
                if p > 0.0 {
                    f * p.ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .sum()
    }

    pub fn log_likelihood_gradient(&self, freqs: &[f64], theta: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (j, &f) in freqs.iter().enumerate() {
            if f > 0.0 {
                let p = self.probability(j, theta);
                let d = self.gradient(j, theta);
                for a in 0..3 {
                    g[a] += f * d[a] / p;
                }
            }
        }
        g
    }

    /// Second derivatives of `p_j`; constant in `theta`.
    pub fn hessian(&self, j: usize) -> [[f64; 3]; 3] {
        let c = &self.coefficients[j];
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                if self.copies == 1 {
                    0.0
                } else {
                    c[4 * (a + 1) + b + 1] + c[4 * (b + 1) + a + 1]
                }
            })
        })
    }

    pub fn log_likelihood_hessian(&self, freqs: &[f64], theta: [f64; 3]) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for (j, &f) in freqs.iter().enumerate() {
            if f > 0.0 {
                let p = self.probability(j, theta);
                let d = self.gradient(j, theta);
                let second = self.hessian(j);
                for a in 0..3 {
                    for b in 0..3 {
                        h[a][b] += f * (second[a][b] / p - d[a] * d[b] / (p * p));
                    }
                }
            }
        }
        h
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub radius: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: tol::MLE_MAX_ITERATIONS,
            gradient_tolerance: tol::MLE_GRADIENT,
            radius: tol::MLE_RADIUS,
        }
    }
}

fn project(v: [f64; 3], radius: f64) -> [f64; 3] {
    let n = norm(v);
    if n > radius {
        v.map(|x| x * radius / n)
    } else {
        v
    }
}

fn norm(v: [f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn axpy(a: f64, x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| y[i] + a * x[i])
}

fn diff(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| a[i] - b[i])
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|i| a[i] * b[i]).sum()
}

/// Maximum-likelihood Bloch vector over the ball of radius
/// `options.radius`, by Nesterov-accelerated projected gradient ascent with
/// backtracking and restarts.
pub fn mle_estimator(
    counts: &[u64],
    model: &ProbabilityModel,
    options: &MleOptions,
) -> Result<BlochVector> {
    if counts.len() != model.len() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} outcome counts, got {}",
            model.len(),
            counts.len()
        )));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("no counts".into()));
    }
    let freqs: Vec<f64> = counts.iter().map(|&n| n as f64 / total as f64).collect();
    let f = |t: [f64; 3]| model.log_likelihood(&freqs, t);
    let gradient_mapping =
        |t: [f64; 3], g: [f64; 3]| norm(diff(t, project(axpy(1.0, g, t), options.radius)));

    let mut theta = [0.0; 3];
    let mut value = f(theta);
    let mut damping = 1e-3;
    let mut last_norm = f64::INFINITY;
    for _ in 0..options.max_iterations {
        let g = model.log_likelihood_gradient(&freqs, theta);
        last_norm = gradient_mapping(theta, g);
        if last_norm <= options.gradient_tolerance {
            return Ok(BlochVector::from(theta));
        }
        let curvature = model
            .log_likelihood_hessian(&freqs, theta)
            .map(|row| row.map(|h| -h));
        loop {
            if damping > 1e16 {
                return Err(not_converged(options.max_iterations, theta, last_norm));
            }
            let Some(step) = constrained_newton_step(curvature, g, theta, damping, options.radius)
            else {
                damping *= 4.0;
                continue;
            };
            let candidate = project(axpy(1.0, step, theta), options.radius);
            let fc = f(candidate);
            if fc.is_finite() && fc >= value + tol::ARMIJO * dot(g, diff(candidate, theta)) {
                theta = candidate;
                value = fc;
                damping = (damping * 0.25).max(1e-12);
                break;
            }
            damping *= 4.0;
        }
    }
    Err(not_converged(options.max_iterations, theta, last_norm))
}

/// Damped Newton step for maximising the local quadratic model inside the
/// ball of the given radius. When the free step leaves the ball, the
/// multiplier `mu` of `(M + shift + mu) d = g - mu theta` is found by
/// bisection so that `theta + d` lands on the sphere.
fn constrained_newton_step(
    m: [[f64; 3]; 3],
    g: [f64; 3],
    theta: [f64; 3],
    damping: f64,
    radius: f64,
) -> Option<[f64; 3]> {
    let shift = damping * m[0][0].max(m[1][1]).max(m[2][2]).max(1.0);
    let step = |mu: f64| solve_shifted(m, shift + mu, axpy(-mu, theta, g));
    let free = step(0.0)?;
    if norm(axpy(1.0, free, theta)) <= radius {
        return Some(free);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while norm(axpy(1.0, step(hi)?, theta)) > radius {
        hi *= 2.0;
        if hi > 1e300 {
            return None;
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if norm(axpy(1.0, step(mid)?, theta)) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    step(hi)
}

/// Solves `(M + shift I) d = rhs` by Cholesky; `None` when not positive definite.
fn solve_shifted(m: [[f64; 3]; 3], shift: f64, rhs: [f64; 3]) -> Option<[f64; 3]> {
    let mut a = m;
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += shift;
    }
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = [0.0; 3];
    for i in 0..3 {
        y[i] = (rhs[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        x[i] = (y[i] - (i + 1..3).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    Some(x)
}

fn not_converged(iterations: usize, theta: [f64; 3], gradient_norm: f64) -> Error {
    Error::MleNotConverged {
        iterations,
        theta,
        gradient_norm,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Linear,
    Mle,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Linear => "linear",
            Estimator::Mle => "mle",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Estimator::Linear),
            "mle" => Ok(Estimator::Mle),
            other => Err(Error::InvalidArgument(format!(
                "unknown estimator '{other}'"
            ))),
        }
    }
}

/// How shots are split over eigenstates when the two-copy state is emulated
/// by mixing pure preparations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    /// Multinomial in the eigenvalues for every repeat; the pooled counts are
    /// then distributed exactly as for the mixed state.
    #[default]
    Multinomial,
    /// Fixed largest-remainder split, as in [`mixed_sampling_plan`].
    Proportional,
}

#[derive(Clone, Debug)]
pub struct ShotPlan {
    pub theta_true: BlochVector,
    pub copies: usize,
    pub povm: Povm,
    pub shots_per_repeat: u64,
    pub repeats: usize,
    pub seed: u64,
    /// Draw each repeat's shot count from a Poisson law with mean `shots_per_repeat`.
    pub poisson_shots: bool,
    pub allocation: Allocation,
    pub bootstrap_resamples: usize,
}

impl ShotPlan {
    pub fn new(
        theta_true: BlochVector,
        copies: usize,
        povm: Povm,
        shots_per_repeat: u64,
        repeats: usize,
        seed: u64,
    ) -> Self {
        Self {
            theta_true,
            copies,
            povm,
            shots_per_repeat,
            repeats,
            seed,
            poisson_shots: false,
            allocation: Allocation::default(),
            bootstrap_resamples: 50,
        }
    }

    fn validate(&self) -> Result<()> {
        check_copies(self.copies)?;
        self.theta_true.check_interior(tol::SDP_BLOCH_MARGIN)?;
        if self.shots_per_repeat == 0 || self.repeats == 0 {
            return Err(Error::InvalidArgument(
                "shots and repeats must be positive".into(),
            ));
        }
        if self.bootstrap_resamples < 2 {
            return Err(Error::InvalidArgument(
                "at least two bootstrap resamples are needed".into(),
            ));
        }
        if self.povm.dim() != 1 << self.copies {
            return Err(Error::DimensionMismatch(format!(
                "POVM '{}' acts on dimension {} but {} copies need {}",
                self.povm.label(),
                self.povm.dim(),
                self.copies,
                1 << self.copies
            )));
        }
        Ok(())
    }

    fn uses_mixing(&self) -> bool {
        self.copies == 2
            && self
                .theta_true
                .equal_component()
                .is_some_and(|t| t < max_equal_component())
    }
}

enum Source {
    Direct(Vec<f64>),
    Mixture {
        weights: Vec<f64>,
        probs: Vec<Vec<f64>>,
        plan: Vec<u64>,
    },
}

impl Source {
    fn sample(&self, shots: u64, allocation: Allocation, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
        match self {
            Source::Direct(p) => sample_counts(p, shots, rng),
            Source::Mixture {
                weights,
                probs,
                plan,
            } => {
                let split = match allocation {
                    Allocation::Multinomial => sample_counts(weights, shots, rng)?,
                    Allocation::Proportional if shots == plan.iter().sum::<u64>() => plan.clone(),
                    Allocation::Proportional => largest_remainder(weights, shots),
                };
                let mut pooled = vec![0; probs[0].len()];
                for (p, n) in probs.iter().zip(split) {
                    for (acc, c) in pooled.iter_mut().zip(sample_counts(p, n, rng)?) {
                        *acc += c;
                    }
                }
                Ok(pooled)
            }
        }
    }
}

/// Bounds the experiment is compared against, per qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub c1: f64,
    pub c2: f64,
    /// `(C1 - weighted_trace) / standard_error`.
    pub z_score_c1: f64,
    /// `(weighted_trace - C2) / standard_error`.
    pub z_score_c2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub theta: BlochVector,
    pub copies: usize,
    pub povm: String,
    pub estimator: Estimator,
    pub weights: WeightSpec,
    pub shots_per_repeat: u64,
    pub mean_shots: f64,
    pub repeats: usize,
    pub seed: u64,
    pub poisson_shots: bool,
    pub allocation: Option<Allocation>,
    pub mse: MsePoint,
    pub weighted_trace: f64,
    pub standard_error: f64,
    pub estimates_mean: BlochVector,
    pub bounds: BoundComparison,
}

/// CSV columns of [`ExperimentReport::write_csv`].
pub const REPORT_CSV_HEADER: [&str; 11] = [
    "wx",
    "wy",
    "wz",
    "vx",
    "vy",
    "vz",
    "weighted_trace",
    "stderr",
    "c1",
    "c2",
    "z_c1",
];

impl ExperimentReport {
    /// The same report with MSE, bounds and standard error rescaled to
    /// `normalization`; z-scores are unchanged.
    pub fn convert(&self, normalization: Normalization) -> Self {
        let f = normalization.factor(self.copies) / self.mse.normalization.factor(self.copies);
        let mut r = self.clone();
        r.mse = MsePoint::with_normalization(self.mse.as_array().map(|v| v * f), normalization);
        r.weighted_trace *= f;
        r.standard_error *= f;
        r.bounds.c1 *= f;
        r.bounds.c2 *= f;
        r
    }

    pub fn csv_row(&self) -> Vec<String> {
        let w = self.weights.as_array();
        let v = self.mse.as_array();
        [
            w[0],
            w[1],
            w[2],
            v[0],
            v[1],
            v[2],
            self.weighted_trace,
            self.standard_error,
            self.bounds.c1,
            self.bounds.c2,
            self.bounds.z_score_c1,
        ]
        .iter()
        .map(|&x| format_sig(x))
        .collect()
    }

    pub fn write_csv<W: Write>(reports: &[ExperimentReport], out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(REPORT_CSV_HEADER)?;
        for r in reports {
            wtr.write_record(r.csv_row())?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Per-qubit single- and two-copy NH bounds at `theta`.
pub fn reference_bounds(theta: BlochVector, w: &WeightSpec) -> Result<(f64, f64)> {
    let value = |copies| -> Result<f64> {
        if theta.is_origin() {
            Ok(nhcrb_analytic_origin(w, copies, Normalization::PerQubit)?.value)
        } else {
            Ok(
                nhcrb_sdp(&model_point(theta, copies)?, w, Normalization::PerQubit)?
                    .bound
                    .value,
            )
        }
    };
    Ok((value(1)?, value(2)?))
}

/// Runs the plan and reports the per-qubit normalized MSE
/// `V_i = copies N / repeats sum_k (theta_hat_ik - theta_i)^2`, with `N` the
/// mean number of measurements per estimate.
pub fn run_experiment(
    plan: &ShotPlan,
    w: &WeightSpec,
    estimator: Estimator,
) -> Result<ExperimentReport> {
    let (c1, c2) = reference_bounds(plan.theta_true, w)?;
    run_experiment_with_bounds(plan, w, estimator, (c1, c2))
}

/// As [`run_experiment`] with precomputed per-qubit `(C1, C2)`.
pub fn run_experiment_with_bounds(
    plan: &ShotPlan,
    w: &WeightSpec,
    estimator: Estimator,
    (c1, c2): (f64, f64),
) -> Result<ExperimentReport> {
    plan.validate()?;
    let theta = plan.theta_true.as_array();
    let m = model_point(plan.theta_true, plan.copies)?;
    let source = if plan.uses_mixing() {
        let t = plan.theta_true.x;
        let components = mixed_sampling_plan(t, plan.shots_per_repeat)?;
        Source::Mixture {
            weights: components.iter().map(|c| c.weight).collect(),
            probs: components
                .iter()
                .map(|c| pure_state_probabilities(&c.state, &plan.povm))
                .collect::<Result<_>>()?,
            plan: components.iter().map(|c| c.shots).collect(),
        }
    } else {
        Source::Direct(outcome_probabilities(&m, &plan.povm)?)
    };
    let linear = match estimator {
        Estimator::Linear => Some(LinearEstimator::new(
            plan.theta_true,
            plan.copies,
            &plan.povm,
        )?),
        Estimator::Mle => None,
    };
    let model = ProbabilityModel::new(plan.copies, &plan.povm)?;
    let mle_options = MleOptions::default();

    let outcomes: Vec<(u64, [f64; 3])> = (0..plan.repeats)
        .into_par_iter()
        .map(|k| {
            let wrap = |e: Error| Error::Repeat {
                repeat: k,
                source: Box::new(e),
            };
            let mut rng = stream_rng(plan.seed, k as u64);
            let shots = if plan.poisson_shots {
                let draw: f64 = Poisson::new(plan.shots_per_repeat as f64)
                    .map_err(|e| wrap(Error::InvalidArgument(e.to_string())))?
                    .sample(&mut rng);
                (draw as u64).max(1)
            } else {
                plan.shots_per_repeat
            };
            let counts = source
                .sample(shots, plan.allocation, &mut rng)
                .map_err(wrap)?;
            let est = match &linear {
                Some(l) => l.estimate(&counts),
                None => mle_estimator(&counts, &model, &mle_options),
            }
            .map_err(wrap)?;
            let e = est.as_array();
            Ok((shots, std::array::from_fn(|i| e[i] - theta[i])))
        })
        .collect::<Result<_>>()?;

    let mean_shots = outcomes.iter().map(|(n, _)| *n as f64).sum::<f64>() / plan.repeats as f64;
    let scale = plan.copies as f64 * mean_shots;
    let mse_of = |idx: &mut dyn Iterator<Item = usize>| -> [f64; 3] {
        let mut acc = [0.0; 3];
        let mut n = 0usize;
        for k in idx {
            for i in 0..3 {
                acc[i] += outcomes[k].1[i].powi(2);
            }
            n += 1;
        }
        acc.map(|a| scale * a / n as f64)
    };
    let v = mse_of(&mut (0..plan.repeats));
    let weighted_trace = w.dot(v);

    let boot: Vec<f64> = (0..plan.bootstrap_resamples)
        .map(|b| {
            let mut rng = stream_rng(plan.seed, (1u64 << 63) | b as u64);
            let picks: Vec<usize> = (0..plan.repeats)
                .map(|_| rng.random_range(0..plan.repeats))
                .collect();
            w.dot(mse_of(&mut picks.into_iter()))
        })
        .collect();
    let mean_boot = boot.iter().sum::<f64>() / boot.len() as f64;
    let standard_error = (boot.iter().map(|x| (x - mean_boot).powi(2)).sum::<f64>()
        / (boot.len() - 1) as f64)
        .sqrt();

    let mut mean = [0.0; 3];
    for (_, e) in &outcomes {
        for i in 0..3 {
            mean[i] += (e[i] + theta[i]) / plan.repeats as f64;
        }
    }

    Ok(ExperimentReport {
        theta: plan.theta_true,
        copies: plan.copies,
        povm: plan.povm.label().to_string(),
        estimator,
        weights: *w,
        shots_per_repeat: plan.shots_per_repeat,
        mean_shots,
        repeats: plan.repeats,
        seed: plan.seed,
        poisson_shots: plan.poisson_shots,
        allocation: plan.uses_mixing().then_some(plan.allocation),
        mse: MsePoint::new(v),
        weighted_trace,
        standard_error,
        estimates_mean: BlochVector::from(mean),
        bounds: BoundComparison {
            c1,
            c2,
            z_score_c1: (c1 - weighted_trace) / standard_error,
            z_score_c2: (weighted_trace - c2) / standard_error,
        },
    })
}
