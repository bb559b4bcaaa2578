//! Cramér-Rao-type lower bounds on the weighted mean squared error.
//!
//! Every [`BoundValue`] carries its [`Normalization`]: per-measurement values
//! bound the MSE times the number of measurements, per-qubit values bound the
//! MSE times the number of qubits consumed, which is `copies` times larger.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::real::{mat3_inverse, DenseMatrix};
use crate::linalg::{ComplexMatrix, HermitianOperator, C64, I, ONE};
use crate::model::{BlochVector, ModelPoint};
use crate::normalization::Normalization;
use crate::povm::{
    classical_fisher, outcome_probabilities, probability_derivatives, single_copy_optimal,
    two_copy_optimal, Povm, WeightSpec,
};
use crate::sdp::{self, IterateRecord, LmiProblem, SdpOptions, SparseSymmetric};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Analytic,
    Sdp,
    Holevo,
    Qcrb,
}

impl BoundMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundMethod::Analytic => "analytic",
            BoundMethod::Sdp => "sdp",
            BoundMethod::Holevo => "holevo",
            BoundMethod::Qcrb => "qcrb",
        }
    }
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub normalization: Normalization,
    pub method: BoundMethod,
    pub copies: usize,
}

impl BoundValue {
    fn from_per_measurement(
        value: f64,
        normalization: Normalization,
        method: BoundMethod,
        copies: usize,
    ) -> Self {
        Self {
            value: value * normalization.factor(copies),
            normalization,
            method,
            copies,
        }
    }

    /// The same bound expressed in another normalization.
    pub fn convert(&self, normalization: Normalization) -> Self {
        let per_measurement = self.value / self.normalization.factor(self.copies);
        Self::from_per_measurement(per_measurement, normalization, self.method, self.copies)
    }

    /// Orders two bounds, refusing to compare across normalizations.
    pub fn try_cmp(&self, other: &BoundValue) -> Result<Ordering> {
        if self.normalization != other.normalization {
            return Err(Error::NormalizationMismatch {
                expected: self.normalization.to_string(),
                found: other.normalization.to_string(),
            });
        }
        Ok(self.value.total_cmp(&other.value))
    }
}

/// Serialized bound: `{theta, weights, copies, normalization, method, value,
/// gap, iterations}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub theta: BlochVector,
    pub weights: WeightSpec,
    pub copies: usize,
    pub normalization: Normalization,
    pub method: BoundMethod,
    pub value: f64,
    pub gap: Option<f64>,
    pub iterations: Option<usize>,
}

impl BoundRecord {
    pub fn new(theta: BlochVector, weights: WeightSpec, bound: BoundValue) -> Self {
        Self {
            theta,
            weights,
            copies: bound.copies,
            normalization: bound.normalization,
            method: bound.method,
            value: bound.value,
            gap: None,
            iterations: None,
        }
    }
}

pub(crate) fn check_copies(copies: usize) -> Result<()> {
    if (1..=2).contains(&copies) {
        Ok(())
    } else {
        Err(Error::UnsupportedCopies(copies))
    }
}

/// Closed-form NH bound at the maximally mixed state:
/// `(sum sqrt(w_i))^2` for one copy and
/// `(sum w_i + sum_{i<j} sqrt(w_i w_j)) / 2` per two-copy measurement.
pub fn nhcrb_analytic_origin(
    w: &WeightSpec,
    copies: usize,
    normalization: Normalization,
) -> Result<BoundValue> {
    check_copies(copies)?;
    let [a, b, c] = w.as_array();
    let value = if copies == 1 {
        w.sqrt().iter().sum::<f64>().powi(2)
    } else {
        0.5 * (a + b + c + (a * b).sqrt() + (a * c).sqrt() + (b * c).sqrt())
    };
    Ok(BoundValue::from_per_measurement(
        value,
        normalization,
        BoundMethod::Analytic,
        copies,
    ))
}

/// Per-qubit single-copy bound at the origin.
pub fn c1_per_qubit(w: &WeightSpec) -> f64 {
    w.sqrt().iter().sum::<f64>().powi(2)
}

/// Per-qubit two-copy bound at the origin.
pub fn c2_per_qubit(w: &WeightSpec) -> f64 {
    let [a, b, c] = w.as_array();
    a + b + c + (a * b).sqrt() + (a * c).sqrt() + (b * c).sqrt()
}

/// Holevo bound at the origin, `Tr[W]` per qubit.
pub fn holevo_origin(
    w: &WeightSpec,
    copies: usize,
    normalization: Normalization,
) -> Result<BoundValue> {
    check_copies(copies)?;
    Ok(BoundValue::from_per_measurement(
        w.trace() / copies as f64,
        normalization,
        BoundMethod::Holevo,
        copies,
    ))
}

/// Quantum Cramér-Rao bound `Tr[W (copies J)^-1]` per measurement.
pub fn qcrb(m: &ModelPoint, w: &WeightSpec, normalization: Normalization) -> Result<BoundValue> {
    let j = m.qfi()?;
    let inv = mat3_inverse(&j)?;
    Ok(BoundValue::from_per_measurement(
        w.weighted_trace(&inv),
        normalization,
        BoundMethod::Qcrb,
        m.copies,
    ))
}

/// Feasible point of the NH program in its original form:
/// `Tr[rho X_i] = theta_i`, `Tr[d_j rho X_i] = delta_ij`, and
/// `L >= X X^T` with `L[j][k] = L[k][j]` Hermitian.
#[derive(Clone, Debug)]
pub struct NhCertificate {
    pub theta: BlochVector,
    pub copies: usize,
    pub l: [[HermitianOperator; 3]; 3],
    pub x: [HermitianOperator; 3],
}

impl NhCertificate {
    /// Weighted MSE certified by this point,
    /// `sum_i w_i (Tr[rho L_ii] - theta_i^2)`.
    pub fn objective(&self, m: &ModelPoint, w: &WeightSpec) -> f64 {
        let t = self.theta.as_array();
        let ws = w.as_array();
        (0..3)
            .map(|i| ws[i] * (m.rho.trace_product(&self.l[i][i]) - t[i] * t[i]))
            .sum()
    }

    /// Largest violation of the local unbiasedness conditions.
    pub fn unbiasedness_residual(&self, m: &ModelPoint) -> f64 {
        let t = self.theta.as_array();
        let mut worst = 0.0f64;
        for i in 0..3 {
            worst = worst.max((m.rho.trace_product(&self.x[i]) - t[i]).abs());
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((m.derivatives[j].trace_product(&self.x[i]) - target).abs());
            }
        }
        worst
    }

    /// Smallest eigenvalue of `[[L, X], [X^dagger, 1]]`.
    pub fn lifted_min_eigenvalue(&self) -> f64 {
        let d = self.x[0].dim();
        let n = 4 * d;
        let mut big = ComplexMatrix::zeros(n, n);
        for j in 0..3 {
            for k in 0..3 {
                place(&mut big, j * d, k * d, self.l[j][k].matrix());
            }
            place(&mut big, j * d, 3 * d, self.x[j].matrix());
            place(&mut big, 3 * d, j * d, self.x[j].matrix());
        }
        place(&mut big, 3 * d, 3 * d, &ComplexMatrix::identity(d));
        HermitianOperator::symmetrized(big).min_eigenvalue()
    }

    /// Sums of the diagonal entries of each `L_ii`.
    pub fn block_traces(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.l[i][i].trace())
    }
}

fn place(target: &mut ComplexMatrix, r0: usize, c0: usize, block: &ComplexMatrix) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            target[(r0 + i, c0 + j)] = block[(i, j)];
        }
    }
}

/// NH feasible point induced by a measurement and its locally unbiased
/// estimator `x(j) = theta + F^-1 grad p_j / p_j`; its objective equals
/// `Tr[W F^-1]`.
pub fn nh_certificate_from_povm(m: &ModelPoint, povm: &Povm) -> Result<NhCertificate> {
    let f = classical_fisher(m, povm)?;
    let finv = mat3_inverse(&f.entries)?;
    let probs = outcome_probabilities(m, povm)?;
    let d = probability_derivatives(m, povm)?;
    let t = m.theta.as_array();
    let dim = povm.dim();
    let mut x: [HermitianOperator; 3] = std::array::from_fn(|_| HermitianOperator::zeros(dim));
    let mut l: [[HermitianOperator; 3]; 3] =
        std::array::from_fn(|_| std::array::from_fn(|_| HermitianOperator::zeros(dim)));
    for (j, e) in povm.elements().iter().enumerate() {
        let mut est = t;
        if probs[j] >= tol::FISHER_CUTOFF {
            for (a, ea) in est.iter_mut().enumerate() {
                *ea += (0..3).map(|b| finv[a][b] * d[b][j]).sum::<f64>() / probs[j];
            }
        }
        for a in 0..3 {
            x[a] = x[a].add(&e.scale(est[a]));
            for b in 0..3 {
                l[a][b] = l[a][b].add(&e.scale(est[a] * est[b]));
            }
        }
    }
    Ok(NhCertificate {
        theta: m.theta,
        copies: m.copies,
        l,
        x,
    })
}

/// Analytic optimum at the maximally mixed state, realized by the optimal
/// one- or two-copy measurement.
pub fn nh_optimal_certificate_origin(w: &WeightSpec, copies: usize) -> Result<NhCertificate> {
    check_copies(copies)?;
    let m = ModelPoint::new(BlochVector::ORIGIN, copies)?;
    let povm = if copies == 1 {
        single_copy_optimal(w)?
    } else {
        two_copy_optimal(w)?
    };
    nh_certificate_from_povm(&m, &povm)
}

/// Result of the numerical NH bound.
#[derive(Clone, Debug)]
pub struct NhSdpSolution {
    pub bound: BoundValue,
    pub relative_gap: f64,
    pub iterations: usize,
    pub certificate: NhCertificate,
    /// Primal and dual weighted-MSE objectives per iterate.
    pub history: Vec<IterateRecord>,
}

impl NhSdpSolution {
    pub fn record(&self, weights: WeightSpec) -> BoundRecord {
        BoundRecord {
            gap: Some(self.relative_gap),
            iterations: Some(self.iterations),
            ..BoundRecord::new(self.certificate.theta, weights, self.bound)
        }
    }
}

/// Orthonormal basis of `d x d` Hermitian matrices under `Tr[A B]`.
fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d);
    for a in 0..d {
        let mut e = ComplexMatrix::zeros(d, d);
        e[(a, a)] = ONE;
        basis.push(e);
    }
    for a in 0..d {
        for b in (a + 1)..d {
            let mut re = ComplexMatrix::zeros(d, d);
            re[(a, b)] = C64::new(h, 0.0);
            re[(b, a)] = C64::new(h, 0.0);
            basis.push(re);
            let mut im = ComplexMatrix::zeros(d, d);
            im[(a, b)] = -I * h;
            im[(b, a)] = I * h;
            basis.push(im);
        }
    }
    basis
}

fn combine(basis: &[ComplexMatrix], coeffs: &[f64]) -> ComplexMatrix {
    let d = basis[0].rows();
    let mut out = ComplexMatrix::zeros(d, d);
    for (b, &c) in basis.iter().zip(coeffs) {
        if c != 0.0 {
            out = &out + &b.scale_real(c);
        }
    }
    out
}

/// Adds the real embedding `[[Re H, -Im H], [Im H, Re H]]` of the complex
/// block `h` placed at `(r0, c0)` of an `big x big` complex matrix.
fn embed_block(f: &mut SparseSymmetric, big: usize, r0: usize, c0: usize, h: &ComplexMatrix) {
    for i in 0..h.rows() {
        for j in 0..h.cols() {
            let z = h[(i, j)];
            let (r, c) = (r0 + i, c0 + j);
            f.push(r, c, z.re);
            f.push(big + r, big + c, z.re);
            f.push(r, big + c, -z.im);
            f.push(big + r, c, z.im);
        }
    }
}

fn embed_dense(target: &mut DenseMatrix, big: usize, r0: usize, c0: usize, h: &ComplexMatrix) {
    let mut f = SparseSymmetric::new();
    embed_block(&mut f, big, r0, c0, h);
    f.add_to(target, 1.0);
}

/// Parametrization of the centred unbiasedness constraints
/// `Tr[rho X_i] = 0`, `Tr[d_j rho X_i] = delta_ij`: a least-norm particular
/// solution per `i` and an orthonormal basis of the shared null space.
struct UnbiasedAffine {
    particular: [Vec<f64>; 3],
    null: Vec<Vec<f64>>,
}

fn unbiased_affine(m: &ModelPoint, basis: &[ComplexMatrix]) -> Result<UnbiasedAffine> {
    let nb = basis.len();
    let ops: Vec<&HermitianOperator> = std::iter::once(&m.rho)
        .chain(m.derivatives.iter())
        .collect();
    let a = DenseMatrix::from_fn(4, nb, |r, k| ops[r].matrix().trace_product(&basis[k]).re);
    let aat = a.matmul(&a.transpose());
    let particular = std::array::from_fn(|i| {
        let mut rhs = [0.0; 4];
        rhs[i + 1] = 1.0;
        aat.solve(&rhs).map(|u| a.transpose().mul_vec(&u))
    });
    let [p0, p1, p2] = particular;
    let particular = [p0?, p1?, p2?];

    let ata = a.transpose().matmul(&a);
    let eig = ata.to_hermitian().eig();
    let scale = eig.values[0].max(f64::MIN_POSITIVE);
    let null: Vec<Vec<f64>> = (0..nb)
        .filter(|&k| eig.values[k].abs() <= 1e-10 * scale)
        .map(|k| eig.vector(k).iter().map(|z| z.re).collect())
        .collect();
    if null.len() != nb - 4 {
        return Err(Error::Singular);
    }
    Ok(UnbiasedAffine { particular, null })
}

/// Nagaoka-Hayashi bound at a general point by semidefinite programming.
///
/// The program is solved in centred form (`Tr[rho X_i] = 0`), whose optimum is
/// the weighted MSE bound; the certificate is mapped back to
/// `Tr[rho X_i] = theta_i` by `X_i -> X_i + theta_i 1`, which leaves
/// `L - X X^T` unchanged.
pub fn nhcrb_sdp(
    m: &ModelPoint,
    w: &WeightSpec,
    normalization: Normalization,
) -> Result<NhSdpSolution> {
    nhcrb_sdp_with(m, w, normalization, &SdpOptions::default())
}

pub fn nhcrb_sdp_with(
    m: &ModelPoint,
    w: &WeightSpec,
    normalization: Normalization,
    options: &SdpOptions,
) -> Result<NhSdpSolution> {
    m.theta.check_interior(tol::SDP_BLOCH_MARGIN)?;
    w.require_positive()?;
    // Weights are taken relative to the largest one and snapped to 22
    // significant bits, so W and cW solve the same program; the snapping
    // offset is restored to first order through the gradient Tr[rho L_ii].
    let raw = w.as_array();
    let scale = raw.iter().copied().fold(0.0, f64::max);
    let ratios = raw.map(|x| x / scale);
    let w = &WeightSpec::try_from(ratios.map(snap_significand))?;
    let d = m.dim();
    let big = 4 * d;
    let n = 2 * big;
    let basis = hermitian_basis(d);
    let nb = basis.len();
    let affine = unbiased_affine(m, &basis)?;
    let ws = w.as_array();

    let mut c = Vec::new();
    let mut f = Vec::new();
    let mut l_index = Vec::new();
    for j in 0..3 {
        for k in j..3 {
            for (a, b) in basis.iter().enumerate() {
                let mut fk = SparseSymmetric::new();
                embed_block(&mut fk, big, j * d, k * d, b);
                if j != k {
                    embed_block(&mut fk, big, k * d, j * d, b);
                }
                f.push(fk);
                c.push(if j == k {
                    ws[j] * m.rho.matrix().trace_product(b).re
                } else {
                    0.0
                });
                l_index.push((j, k, a));
            }
        }
    }
    let num_l = f.len();
    let mut x_index = Vec::new();
    for i in 0..3 {
        for (v, nv) in affine.null.iter().enumerate() {
            let h = combine(&basis, nv);
            let mut fk = SparseSymmetric::new();
            embed_block(&mut fk, big, i * d, 3 * d, &h);
            embed_block(&mut fk, big, 3 * d, i * d, &h);
            f.push(fk);
            c.push(0.0);
            x_index.push((i, v));
        }
    }

    let mut f0 = DenseMatrix::zeros(n, n);
    let xp: [ComplexMatrix; 3] = std::array::from_fn(|i| combine(&basis, &affine.particular[i]));
    for (i, x) in xp.iter().enumerate() {
        embed_dense(&mut f0, big, i * d, 3 * d, x);
        embed_dense(&mut f0, big, 3 * d, i * d, x);
    }
    embed_dense(&mut f0, big, 3 * d, 3 * d, &ComplexMatrix::identity(d));

    let kappa = 1.0 + 2.0 * xp.iter().map(|x| x.frobenius_norm().powi(2)).sum::<f64>();
    let mut y0 = vec![0.0; f.len()];
    for (idx, &(j, k, a)) in l_index.iter().enumerate() {
        if j == k {
            y0[idx] = kappa * basis[a].trace().re;
        }
    }
    let mut z0 = DenseMatrix::zeros(n, n);
    for (i, wi) in ws.iter().enumerate() {
        embed_dense(
            &mut z0,
            big,
            i * d,
            i * d,
            &m.rho.matrix().scale_real(0.5 * wi),
        );
    }
    let tau = w.trace() / (6.0 * d as f64);
    embed_dense(
        &mut z0,
        big,
        3 * d,
        3 * d,
        &ComplexMatrix::identity(d).scale_real(tau),
    );

    let problem = LmiProblem { c, f0, f };
    let sol = sdp::solve(&problem, y0, z0, options)?;

    let mut l_mat: [[ComplexMatrix; 3]; 3] =
        std::array::from_fn(|_| std::array::from_fn(|_| ComplexMatrix::zeros(d, d)));
    let mut lc = vec![vec![vec![0.0; nb]; 3]; 3];
    for (idx, &(j, k, a)) in l_index.iter().enumerate() {
        lc[j][k][a] = sol.y[idx];
    }
    for j in 0..3 {
        for k in j..3 {
            let blk = combine(&basis, &lc[j][k]);
            l_mat[k][j] = blk.clone();
            l_mat[j][k] = blk;
        }
    }
    let mut xc = affine.particular.clone();
    for (off, &(i, v)) in x_index.iter().enumerate() {
        let yv = sol.y[num_l + off];
        for (acc, nv) in xc[i].iter_mut().zip(&affine.null[v]) {
            *acc += yv * nv;
        }
    }
    let x_centred: [ComplexMatrix; 3] = std::array::from_fn(|i| combine(&basis, &xc[i]));

    let t = m.theta.as_array();
    let id = ComplexMatrix::identity(d);
    let x = std::array::from_fn(|i| {
        HermitianOperator::symmetrized(&x_centred[i] + &id.scale_real(t[i]))
    });
    let l = std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            let shifted = &(&(&l_mat[j][k] + &x_centred[j].scale_real(t[k]))
                + &x_centred[k].scale_real(t[j]))
                + &id.scale_real(t[j] * t[k]);
            HermitianOperator::symmetrized(shifted)
        })
    });

    let offset: f64 = (0..3)
        .map(|i| (ratios[i] - ws[i]) * m.rho.matrix().trace_product(&l_mat[i][i]).re)
        .sum();

    Ok(NhSdpSolution {
        bound: BoundValue::from_per_measurement(
            scale * (sol.primal + offset),
            normalization,
            BoundMethod::Sdp,
            m.copies,
        ),
        relative_gap: sol.relative_gap,
        iterations: sol.iterations,
        certificate: NhCertificate {
            theta: m.theta,
            copies: m.copies,
            l,
            x,
        },
        history: sol
            .history
            .iter()
            .map(|h| IterateRecord {
                primal: scale * h.primal,
                dual: scale * h.dual,
            })
            .collect(),
    })
}

fn snap_significand(x: f64) -> f64 {
    let q = 2f64.powi(22 - x.log2().floor() as i32);
    (x * q).round() / q
}

/// Single-copy NH bound in closed form for a general point,
/// `(Tr sqrt(J^-1/2 W J^-1/2))^2` per measurement.
pub fn nhcrb_single_copy_closed_form(theta: BlochVector, w: &WeightSpec) -> Result<f64> {
    let j = crate::model::qfi(theta)?;
    let jinv = mat3_inverse(&j)?;
    let to_h = |m: &[[f64; 3]; 3]| {
        let data = m.iter().flatten().map(|&x| C64::new(x, 0.0)).collect();
        HermitianOperator::symmetrized(ComplexMatrix::from_row_major(3, 3, data).expect("3x3"))
    };
    let root = to_h(&jinv).eig().reconstruct_with(|l| l.max(0.0).sqrt());
    let wm = to_h(&crate::linalg::real::mat3_diag(w.as_array()));
    let inner = HermitianOperator::symmetrized(&(root.matrix() * wm.matrix()) * root.matrix());
    let tr: f64 = inner.eig().values.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(tr * tr)
}
