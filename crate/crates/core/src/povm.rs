//! Measurements: optimal single- and two-copy POVMs for weighted tomography
//! of the maximally mixed qubit, the two-copy SIC-POVM, tabulated numerical
//! optima, outcome statistics and classical Fisher information.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::real::{mat3_inverse, mat3_scale, Mat3};
use crate::linalg::{kron_vec, ComplexMatrix, HermitianOperator, C64, ONE, ZERO};
use crate::model::{pauli_eigenvectors, ModelPoint};
use crate::normalization::Normalization;
use crate::tol;

/// Diagonal weight matrix `W = diag(wx, wy, wz)`; only ratios matter for the
/// optimal measurements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct WeightSpec {
    wx: f64,
    wy: f64,
    wz: f64,
}

impl WeightSpec {
    /// Nonnegative, finite, not all zero.
    pub fn new(wx: f64, wy: f64, wz: f64) -> Result<Self> {
        let w = [wx, wy, wz];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "weights must be finite and nonnegative, got ({wx}, {wy}, {wz})"
            )));
        }
        if w.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidWeights(
                "at least one weight must be positive".into(),
            ));
        }
        Ok(Self { wx, wy, wz })
    }

    pub fn equal() -> Self {
        Self {
            wx: 1.0,
            wy: 1.0,
            wz: 1.0,
        }
    }

    /// `W = diag(u^2) / sum(u^2)` from an integer-style grid triple.
    pub fn from_grid_triple(u: [f64; 3]) -> Result<Self> {
        let sq = u.map(|x| x * x);
        let total: f64 = sq.iter().sum();
        Self::new(sq[0] / total, sq[1] / total, sq[2] / total)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.wx, self.wy, self.wz]
    }

    pub fn sqrt(&self) -> [f64; 3] {
        self.as_array().map(f64::sqrt)
    }

    pub fn trace(&self) -> f64 {
        self.wx + self.wy + self.wz
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.wx * c, self.wy * c, self.wz * c)
    }

    pub fn normalized(&self) -> Self {
        let t = self.trace();
        Self {
            wx: self.wx / t,
            wy: self.wy / t,
            wz: self.wz / t,
        }
    }

    /// Rejects zero weights, for constructions that divide by them.
    pub fn require_positive(&self) -> Result<()> {
        if self.as_array().iter().any(|&x| x <= 0.0) {
            return Err(Error::DegenerateWeights(self.wx, self.wy, self.wz));
        }
        Ok(())
    }

    /// `sum_i w_i v_i`.
    pub fn dot(&self, v: [f64; 3]) -> f64 {
        self.wx * v[0] + self.wy * v[1] + self.wz * v[2]
    }

    /// `Tr[W M]` for a 3x3 matrix.
    pub fn weighted_trace(&self, m: &Mat3) -> f64 {
        self.dot([m[0][0], m[1][1], m[2][2]])
    }
}

impl TryFrom<[f64; 3]> for WeightSpec {
    type Error = Error;

    fn try_from(a: [f64; 3]) -> Result<Self> {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<WeightSpec> for [f64; 3] {
    fn from(w: WeightSpec) -> Self {
        w.as_array()
    }
}

/// A finite POVM: PSD elements summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    dim: usize,
    elements: Vec<HermitianOperator>,
    label: String,
    completeness_tolerance: f64,
}

impl Povm {
    /// Validates every element PSD and completeness within `tolerance`.
    pub fn new(
        label: impl Into<String>,
        elements: Vec<HermitianOperator>,
        tolerance: f64,
    ) -> Result<Self> {
        let dim = elements
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| Error::InvalidArgument("POVM needs at least one element".into()))?;
        if elements.iter().any(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "POVM elements differ in dimension".into(),
            ));
        }
        let povm = Self {
            dim,
            elements,
            label: label.into(),
            completeness_tolerance: tolerance,
        };
        for (k, e) in povm.elements.iter().enumerate() {
            if !e.is_psd(tol::PSD) {
                return Err(Error::InvalidArgument(format!(
                    "POVM element {k} is not positive semidefinite (min eigenvalue {:.3e})",
                    e.min_eigenvalue()
                )));
            }
        }
        let defect = povm.completeness_defect();
        if defect > tolerance {
            return Err(Error::InvalidArgument(format!(
                "POVM elements do not sum to the identity (max deviation {defect:.3e})"
            )));
        }
        Ok(povm)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn completeness_tolerance(&self) -> f64 {
        self.completeness_tolerance
    }

    /// Largest entry of `|sum(E) - I|`.
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.elements {
            sum = &sum + e.matrix();
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// Number of copies of a qubit the measurement acts on.
    pub fn copies(&self) -> usize {
        match self.dim {
            2 => 1,
            4 => 2,
            d => d.trailing_zeros() as usize,
        }
    }

    pub fn to_document(&self) -> PovmDocument {
        PovmDocument {
            label: Some(self.label.clone()),
            dim: self.dim,
            elements: self
                .elements
                .iter()
                .map(|e| {
                    (0..self.dim)
                        .map(|i| e.matrix().row(i).iter().map(|z| [z.re, z.im]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    /// Rebuilds a POVM from its JSON document, checking completeness to
    /// `tolerance`.
    pub fn from_document(doc: &PovmDocument, tolerance: f64) -> Result<Self> {
        let mut elements = Vec::with_capacity(doc.elements.len());
        for rows in &doc.elements {
            if rows.len() != doc.dim || rows.iter().any(|r| r.len() != doc.dim) {
                return Err(Error::DimensionMismatch(format!(
                    "POVM element is not {0}x{0}",
                    doc.dim
                )));
            }
            let data = rows
                .iter()
                .flatten()
                .map(|&[re, im]| C64::new(re, im))
                .collect();
            let m = ComplexMatrix::from_row_major(doc.dim, doc.dim, data)?;
            elements.push(HermitianOperator::with_tolerance(m, 1e-9)?);
        }
        Self::new(
            doc.label.clone().unwrap_or_else(|| "custom".into()),
            elements,
            tolerance,
        )
    }
}

/// JSON form of a POVM: `{dim, elements: [[[re, im], ...] rows]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub dim: usize,
    pub elements: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Six rank-one elements `a_i^2 |j_i><j_i|` with
/// `a_i^2 = sqrt(w_i) / (sqrt(wx) + sqrt(wy) + sqrt(wz))`.
pub fn single_copy_optimal(w: &WeightSpec) -> Result<Povm> {
    w.require_positive()?;
    let r = w.sqrt();
    let total: f64 = r.iter().sum();
    let mut elements = Vec::with_capacity(6);
    for axis in 0..3 {
        let a = (r[axis] / total).sqrt();
        let (up, down) = pauli_eigenvectors(axis);
        for v in [up, down] {
            elements.push(HermitianOperator::projector(&v.map(|z| z * a)));
        }
    }
    Povm::new("opt1", elements, tol::COMPLETENESS)
}

/// Coefficients `(alpha_+i, alpha_-i)` of the optimal two-copy POVM.
pub fn two_copy_alphas(w: &WeightSpec) -> Result<[(f64, f64); 3]> {
    w.require_positive()?;
    let [sx, sy, sz] = w.sqrt();
    let pair = |own: f64, a: f64, b: f64| {
        let u = (own / (own + a)).sqrt();
        let v = (own / (own + b)).sqrt();
        (u + v, u - v)
    };
    Ok([pair(sx, sz, sy), pair(sy, sz, sx), pair(sz, sx, sy)])
}

/// Singlet `(|01> - |10>)/sqrt(2)` in the computational basis.
pub fn singlet() -> [C64; 4] {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [ZERO, h, -h, ZERO]
}

/// Seven-outcome entangling POVM, ordered `+x, -x, +y, -y, +z, -z, singlet`,
/// with `|phi_+-i> = (alpha_+-i |0_i 0_i> + alpha_-+i |1_i 1_i>) / 2`.
pub fn two_copy_optimal(w: &WeightSpec) -> Result<Povm> {
    let alphas = two_copy_alphas(w)?;
    let mut elements = Vec::with_capacity(7);
    for (axis, &(ap, am)) in alphas.iter().enumerate() {
        let (up, down) = pauli_eigenvectors(axis);
        let uu = kron_vec(&up, &up);
        let dd = kron_vec(&down, &down);
        for (a, b) in [(ap, am), (am, ap)] {
            let v: Vec<C64> = uu
                .iter()
                .zip(&dd)
                .map(|(&x, &y)| (x * a + y * b) * 0.5)
                .collect();
            elements.push(HermitianOperator::projector(&v));
        }
    }
    elements.push(HermitianOperator::projector(&singlet()));
    Povm::new("opt2", elements, tol::COMPLETENESS)
}

/// Single-qubit SIC vectors `|0>`, `(|0> + sqrt2 e^{i phi}|1>)/sqrt3`.
pub fn sic_vectors() -> [[C64; 2]; 4] {
    let s3 = 3f64.sqrt();
    let amp = (2.0f64).sqrt() / s3;
    let first = C64::new(1.0 / s3, 0.0);
    let phase = |phi: f64| C64::from_polar(amp, phi);
    let third = 2.0 * std::f64::consts::PI / 3.0;
    [
        [ONE, ZERO],
        [first, phase(0.0)],
        [first, phase(third)],
        [first, phase(-third)],
    ]
}

/// Five-outcome two-copy SIC-POVM: `(3/4)(|psi_j><psi_j|)^{(x)2}` plus the
/// singlet projector.
pub fn sic_two_copy() -> Povm {
    let mut elements: Vec<HermitianOperator> = sic_vectors()
        .iter()
        .map(|v| {
            let p = HermitianOperator::projector(v);
            p.kron(&p).scale(0.75)
        })
        .collect();
    elements.push(HermitianOperator::projector(&singlet()));
    Povm::new("sic", elements, tol::COMPLETENESS).expect("SIC-POVM is complete")
}

type Literal = &'static [(f64, f64)];

const TABULATED_SINGLE: [Literal; 4] = [
    &[(0.1743, 0.0), (0.007, -0.7019)],
    &[(0.4374, 0.0), (-0.1208, 0.5850)],
    &[(0.6709, 0.0), (0.2631, -0.0472)],
    &[(0.5729, 0.0), (-0.2179, -0.1778)],
];

// The fourth vector's last amplitude is fixed by completeness; the
// four-decimal value would duplicate the third vector's entry.
#[allow(clippy::approx_constant)]
const TABULATED_TWO: [Literal; 6] = [
    &[
        (0.2806, 0.0),
        (0.3724, -0.0137),
        (0.3724, -0.0137),
        (0.3168, -0.0288),
    ],
    &[
        (0.3097, 0.0),
        (-0.0874, 0.4903),
        (-0.0874, 0.4903),
        (-0.3358, -0.1722),
    ],
    &[
        (0.1915, 0.0),
        (0.0467, -0.2655),
        (0.0467, -0.2655),
        (-0.2746, -0.0893),
    ],
    &[
        (0.8875, 0.0),
        (-0.0923, -0.1078),
        (-0.0923, -0.1078),
        (0.0689, 0.0591),
    ],
    &[
        (0.0330, 0.0),
        (-0.1351, -0.0438),
        (-0.1351, -0.0438),
        (0.1982, 0.7909),
    ],
    &[(0.0, 0.0), (0.7071, 0.0), (-0.7071, 0.0), (0.0, 0.0)],
];

/// The point at which the tabulated POVMs are optimal.
pub fn tabulated_theta() -> crate::model::BlochVector {
    crate::model::BlochVector::equal(0.3)
}

/// Weights for which the tabulated POVMs are optimal: `diag(1, 4, 9) / 14`.
pub fn tabulated_weights() -> WeightSpec {
    WeightSpec::new(1.0 / 14.0, 4.0 / 14.0, 9.0 / 14.0).expect("valid weights")
}

/// Numerically optimal POVMs at `theta = (0.3, 0.3, 0.3)` for
/// `W = diag(1, 4, 9)/14`: four rank-one elements on one copy or six on two.
/// Amplitudes carry four decimals, so completeness holds to
/// [`tol::LITERAL_COMPLETENESS`].
pub fn tabulated_povm(copies: usize) -> Result<Povm> {
    let table: &[Literal] = match copies {
        1 => &TABULATED_SINGLE,
        2 => &TABULATED_TWO,
        c => return Err(Error::UnsupportedCopies(c)),
    };
    let elements = table
        .iter()
        .map(|v| {
            let v: Vec<C64> = v.iter().map(|&(re, im)| C64::new(re, im)).collect();
            HermitianOperator::projector(&v)
        })
        .collect();
    Povm::new("supp6", elements, tol::LITERAL_COMPLETENESS)
}

fn check_dims(m: &ModelPoint, p: &Povm) -> Result<()> {
    if m.dim() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {} but POVM acts on dimension {}",
            m.dim(),
            p.dim()
        )));
    }
    Ok(())
}

/// `p_j = Tr[rho E_j]`, clipped to `[0, 1]`.
pub fn outcome_probabilities(m: &ModelPoint, p: &Povm) -> Result<Vec<f64>> {
    check_dims(m, p)?;
    let raw: Vec<f64> = p
        .elements()
        .iter()
        .map(|e| m.rho.trace_product(e))
        .collect();
    validate_probabilities(&raw, p.completeness_tolerance().max(tol::PROBABILITY_SUM))
}

pub(crate) fn validate_probabilities(raw: &[f64], sum_tolerance: f64) -> Result<Vec<f64>> {
    if let Some((k, &v)) = raw
        .iter()
        .enumerate()
        .find(|(_, v)| **v < -tol::NEGATIVE_PROBABILITY || !v.is_finite())
    {
        return Err(Error::InvalidProbabilities(format!(
            "outcome {k} has probability {v:.3e}"
        )));
    }
    let total: f64 = raw.iter().sum();
    if (total - 1.0).abs() > sum_tolerance {
        return Err(Error::InvalidProbabilities(format!(
            "probabilities sum to {total}"
        )));
    }
    Ok(raw.iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// `d p_j / d theta_i = Tr[(d_i rho) E_j]`, indexed `[i][j]`.
pub fn probability_derivatives(m: &ModelPoint, p: &Povm) -> Result<[Vec<f64>; 3]> {
    check_dims(m, p)?;
    Ok(std::array::from_fn(|i| {
        p.elements()
            .iter()
            .map(|e| m.derivatives[i].trace_product(e))
            .collect()
    }))
}

/// Classical Fisher information of one measurement outcome record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherMatrix {
    pub entries: Mat3,
    pub copies: usize,
}

/// `F_ab = sum_j (d_a p_j)(d_b p_j) / p_j`. Outcomes with negligible
/// probability and derivative are skipped; negligible probability with a
/// nonzero derivative is an error.
pub fn classical_fisher(m: &ModelPoint, p: &Povm) -> Result<FisherMatrix> {
    let probs = outcome_probabilities(m, p)?;
    let d = probability_derivatives(m, p)?;
    let mut f = [[0.0; 3]; 3];
    for (j, &pj) in probs.iter().enumerate() {
        let grad = [d[0][j], d[1][j], d[2][j]];
        if pj < tol::FISHER_CUTOFF {
            if grad.iter().all(|g| g.abs() < tol::FISHER_CUTOFF) {
                continue;
            }
            return Err(Error::SingularFisher {
                outcome: j,
                probability: pj,
            });
        }
        for a in 0..3 {
            for b in 0..3 {
                f[a][b] += grad[a] * grad[b] / pj;
            }
        }
    }
    for a in 0..3 {
        for b in (a + 1)..3 {
            let s = 0.5 * (f[a][b] + f[b][a]);
            f[a][b] = s;
            f[b][a] = s;
        }
    }
    Ok(FisherMatrix {
        entries: f,
        copies: m.copies,
    })
}

/// Asymptotic MSE matrix `F^-1`, scaled by the copy count in the per-qubit
/// convention.
pub fn mse_matrix_from_fisher(f: &FisherMatrix, normalization: Normalization) -> Result<Mat3> {
    let inv = mat3_inverse(&f.entries)?;
    Ok(mat3_scale(&inv, normalization.factor(f.copies)))
}
