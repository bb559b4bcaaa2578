//! Dense primal-dual interior-point solver for small linear matrix
//! inequalities.
//!
//! Solves
//!
//! ```text
//! minimize    c^T y
//! subject to  S(y) = F0 + sum_k y_k F_k  >= 0
//! ```
//!
//! together with its dual `maximize -Tr[F0 Z]` over `Z >= 0` with
//! `Tr[F_k Z] = c_k`, using the HKM search direction and Mehrotra
//! predictor-corrector steps. The solver starts from a strictly feasible
//! pair, so every iterate is primal and dual feasible and the recorded
//! objectives obey weak duality.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::real::DenseMatrix;
use crate::tol;

/// Symmetric matrix stored as a list of `(row, col, value)` entries with both
/// triangles present.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseSymmetric {
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSymmetric {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v` at `(i, j)` and, off the diagonal, at `(j, i)`.
    pub fn push_symmetric(&mut self, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        self.entries.push((i, j, v));
        if i != j {
            self.entries.push((j, i, v));
        }
    }

    /// Adds a single entry; the caller keeps the matrix symmetric.
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `Tr[F X] = sum F_ij X_ji`.
    pub fn trace_product(&self, x: &DenseMatrix) -> f64 {
        self.entries.iter().map(|&(i, j, v)| v * x[(j, i)]).sum()
    }

    pub fn add_to(&self, target: &mut DenseMatrix, scale: f64) {
        for &(i, j, v) in &self.entries {
            target[(i, j)] += scale * v;
        }
    }

    pub fn to_dense(&self, n: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        self.add_to(&mut m, 1.0);
        m
    }
}

#[derive(Clone, Debug)]
pub struct LmiProblem {
    pub c: Vec<f64>,
    pub f0: DenseMatrix,
    pub f: Vec<SparseSymmetric>,
}

impl LmiProblem {
    pub fn dim(&self) -> usize {
        self.f0.rows()
    }

    pub fn num_variables(&self) -> usize {
        self.c.len()
    }

    /// `S(y)`.
    pub fn slack(&self, y: &[f64]) -> DenseMatrix {
        let mut s = self.f0.clone();
        for (fk, &yk) in self.f.iter().zip(y) {
            fk.add_to(&mut s, yk);
        }
        s
    }

    /// `(Tr[F_k X])_k`.
    pub fn adjoint_map(&self, x: &DenseMatrix) -> Vec<f64> {
        self.f.iter().map(|fk| fk.trace_product(x)).collect()
    }

    fn operator(&self, dy: &[f64]) -> DenseMatrix {
        let n = self.dim();
        let mut s = DenseMatrix::zeros(n, n);
        for (fk, &v) in self.f.iter().zip(dy) {
            fk.add_to(&mut s, v);
        }
        s
    }

    fn primal_objective(&self, y: &[f64]) -> f64 {
        self.c.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    fn dual_objective(&self, z: &DenseMatrix) -> f64 {
        -self.f0.trace_product(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub step_fraction: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tolerance: tol::SDP_GAP,
            max_iterations: tol::SDP_MAX_ITERATIONS,
            step_fraction: 0.95,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterateRecord {
    pub primal: f64,
    pub dual: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub y: Vec<f64>,
    pub z: DenseMatrix,
    pub primal: f64,
    pub dual: f64,
    /// `(primal - dual) / max(|primal|, |dual|)`.
    pub relative_gap: f64,
    /// `||A(Z) - c|| / ||c||`.
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<IterateRecord>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_gap(p: f64, d: f64) -> f64 {
    (p - d) / p.abs().max(d.abs()).max(f64::MIN_POSITIVE)
}

/// Largest `alpha <= 1` with `X + alpha dX` positive semidefinite, given the
/// Cholesky factor of `X`.
fn max_step(l_inv: &DenseMatrix, dx: &DenseMatrix) -> f64 {
    let mut t = l_inv.matmul(dx).matmul(&l_inv.transpose());
    t.symmetrize();
    let lam = t.min_sym_eigenvalue();
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

/// Solves the Schur system after symmetric diagonal scaling; near the
/// optimum the matrix loses definiteness numerically, and a growing ridge
/// keeps the factorization alive.
fn solve_schur(m: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.rows();
    let d: Vec<f64> = (0..n)
        .map(|i| 1.0 / m[(i, i)].abs().max(f64::MIN_POSITIVE).sqrt())
        .collect();
    let scaled = DenseMatrix::from_fn(n, n, |i, j| d[i] * m[(i, j)] * d[j]);
    let b: Vec<f64> = rhs.iter().zip(&d).map(|(r, di)| r * di).collect();
    for ridge in [0.0, 1e-14, 1e-12, 1e-10] {
        let mut a = scaled.clone();
        for i in 0..n {
            a[(i, i)] += ridge;
        }
        if let Ok(l) = a.cholesky() {
            let y = cholesky_solve(&l, &b);
            return Ok(y.iter().zip(&d).map(|(yi, di)| yi * di).collect());
        }
    }
    Err(Error::Singular)
}

struct Workspace<'a> {
    problem: &'a LmiProblem,
    s_inv: DenseMatrix,
    z: DenseMatrix,
}

impl Workspace<'_> {
    /// `M_kl = Tr[F_k Z F_l S^-1]`.
    fn schur(&self) -> DenseMatrix {
        let p = self.problem;
        let n = p.dim();
        let m = p.num_variables();
        let mut out = DenseMatrix::zeros(m, m);
        let mut zf = DenseMatrix::zeros(n, n);
        for l in 0..m {
            zf.as_mut_slice().iter_mut().for_each(|x| *x = 0.0);
            for &(a, b, v) in p.f[l].entries() {
                for r in 0..n {
                    zf[(r, b)] += self.z[(r, a)] * v;
                }
            }
            let g = zf.matmul(&self.s_inv);
            for k in l..m {
                let val = p.f[k].trace_product(&g);
                out[(k, l)] = val;
                out[(l, k)] = val;
            }
        }
        out
    }

    /// Dual direction `sym(sigma_mu S^-1 - Z - Z dS S^-1 - extra)`.
    fn dual_direction(
        &self,
        ds: &DenseMatrix,
        sigma_mu: f64,
        extra: Option<&DenseMatrix>,
    ) -> DenseMatrix {
        let mut dz = self.s_inv.scaled(sigma_mu);
        dz.add_scaled(&self.z, -1.0);
        dz.add_scaled(&self.z.matmul(ds).matmul(&self.s_inv), -1.0);
        if let Some(e) = extra {
            dz.add_scaled(e, -1.0);
        }
        dz.symmetrize();
        dz
    }
}

/// Cholesky factor of the Gram matrix `G_kl = Tr[F_k F_l]`, used to keep
/// dual directions on the affine set `Tr[F_k Z] = c_k`.
fn gram_factor(problem: &LmiProblem) -> Result<DenseMatrix> {
    let n = problem.dim();
    let m = problem.num_variables();
    let mut g = DenseMatrix::zeros(m, m);
    for l in 0..m {
        let fl = problem.f[l].to_dense(n);
        for k in l..m {
            let v = problem.f[k].trace_product(&fl);
            g[(k, l)] = v;
            g[(l, k)] = v;
        }
    }
    g.cholesky()
}

fn cholesky_solve(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

struct Iterate {
    y: Vec<f64>,
    z: DenseMatrix,
    s: DenseMatrix,
}

/// One predictor-corrector step; fails when a factorization breaks down.
fn step(
    problem: &LmiProblem,
    gram: &DenseMatrix,
    it: &mut Iterate,
    options: &SdpOptions,
) -> Result<()> {
    let n = problem.dim();
    let m = problem.num_variables();
    let s_linv = it.s.cholesky()?.lower_triangular_inverse();
    let z_linv = it.z.cholesky()?.lower_triangular_inverse();
    let mut s_inv = s_linv.transpose().matmul(&s_linv);
    s_inv.symmetrize();
    let ws = Workspace {
        problem,
        s_inv,
        z: it.z.clone(),
    };
    let residual: Vec<f64> = problem
        .c
        .iter()
        .zip(problem.adjoint_map(&it.z))
        .map(|(c, a)| c - a)
        .collect();
    let project = |dz: &mut DenseMatrix| {
        let r: Vec<f64> = residual
            .iter()
            .zip(problem.adjoint_map(dz))
            .map(|(r, a)| r - a)
            .collect();
        let u = cholesky_solve(gram, &r);
        for (fk, uk) in problem.f.iter().zip(u) {
            fk.add_to(dz, uk);
        }
    };
    let mu = it.s.trace_product(&it.z) / n as f64;
    let schur = ws.schur();
    let a_sinv = problem.adjoint_map(&ws.s_inv);

    // predictor
    let rhs: Vec<f64> = problem.c.iter().map(|c| -c).collect();
    let dy_a = solve_schur(&schur, &rhs)?;
    let ds_a = problem.operator(&dy_a);
    let mut dz_a = ws.dual_direction(&ds_a, 0.0, None);
    project(&mut dz_a);
    let ap = max_step(&s_linv, &ds_a).min(1.0);
    let ad = max_step(&z_linv, &dz_a).min(1.0);
    let mut s_pred = it.s.clone();
    s_pred.add_scaled(&ds_a, ap);
    let mut z_pred = it.z.clone();
    z_pred.add_scaled(&dz_a, ad);
    let sigma = (s_pred.trace_product(&z_pred) / (mu * n as f64))
        .clamp(0.0, 1.0)
        .powi(3);

    // corrector
    let second_order = dz_a.matmul(&ds_a).matmul(&ws.s_inv);
    let a_second = problem.adjoint_map(&second_order);
    let rhs: Vec<f64> = (0..m)
        .map(|k| sigma * mu * a_sinv[k] - problem.c[k] - a_second[k])
        .collect();
    let dy = solve_schur(&schur, &rhs)?;
    let ds = problem.operator(&dy);
    let mut dz = ws.dual_direction(&ds, sigma * mu, Some(&second_order));
    project(&mut dz);
    let ap = (options.step_fraction * max_step(&s_linv, &ds)).min(1.0);
    let ad = (options.step_fraction * max_step(&z_linv, &dz)).min(1.0);

    let mut y = it.y.clone();
    for (yk, d) in y.iter_mut().zip(&dy) {
        *yk += ap * d;
    }
    let s = problem.slack(&y);
    let mut z = it.z.clone();
    z.add_scaled(&dz, ad);
    z.symmetrize();
    s.cholesky()?;
    z.cholesky()?;
    *it = Iterate { y, z, s };
    Ok(())
}

/// Solves the LMI from the strictly feasible pair `(y0, z0)`; `z0` must
/// satisfy `Tr[F_k Z0] = c_k`.
///
/// Converges when the relative gap and residual fall below
/// `options.tolerance`. If a factorization breaks down first, the current
/// iterate is returned provided both are within [`tol::SDP_ACCEPT`].
pub fn solve(
    problem: &LmiProblem,
    y0: Vec<f64>,
    z0: DenseMatrix,
    options: &SdpOptions,
) -> Result<SdpSolution> {
    let n = problem.dim();
    let m = problem.num_variables();
    if y0.len() != m || problem.f.len() != m || z0.rows() != n || z0.cols() != n {
        return Err(Error::DimensionMismatch(
            "SDP start does not match problem size".into(),
        ));
    }
    let gram = gram_factor(problem)?;
    let c_norm = norm(&problem.c).max(f64::MIN_POSITIVE);
    let s0 = problem.slack(&y0);
    s0.cholesky()
        .map_err(|_| Error::InvalidArgument("SDP start is not strictly primal feasible".into()))?;
    z0.cholesky()
        .map_err(|_| Error::InvalidArgument("SDP start is not strictly dual feasible".into()))?;
    let mut it = Iterate {
        y: y0,
        z: z0,
        s: s0,
    };

    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let primal = problem.primal_objective(&it.y);
        let dual = problem.dual_objective(&it.z);
        history.push(IterateRecord { primal, dual });
        let gap = relative_gap(primal, dual);
        let az = problem.adjoint_map(&it.z);
        let residual = norm(
            &az.iter()
                .zip(&problem.c)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        ) / c_norm;
        let finish = move |it: Iterate, history: Vec<IterateRecord>| SdpSolution {
            y: it.y,
            z: it.z,
            primal,
            dual,
            relative_gap: gap,
            residual,
            iterations,
            history,
        };
        if gap.abs() < options.tolerance && residual < options.tolerance {
            return Ok(finish(it, history));
        }
        let failure = Error::SdpNotConverged {
            iterations,
            primal,
            dual,
            gap,
        };
        if iterations >= options.max_iterations {
            return Err(failure);
        }
        iterations += 1;
        if step(problem, &gram, &mut it, options).is_err() {
            if gap.abs() <= tol::SDP_ACCEPT && residual <= tol::SDP_ACCEPT {
                return Ok(finish(it, history));
            }
            return Err(failure);
        }
    }
}
