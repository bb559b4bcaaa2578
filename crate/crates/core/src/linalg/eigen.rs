use super::{ComplexMatrix, HermitianOperator, C64, ZERO};
use crate::tol;

/// Eigenvalues in descending order and the matching orthonormal eigenvectors
/// stored as columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let fl = f(lam);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        HermitianOperator::symmetrized(out)
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        self.reconstruct_with(|x| x)
    }
}

/// Cyclic complex Jacobi diagonalization.
///
/// Each rotation first removes the phase of the pivot `a[p][q]` with a
/// diagonal unitary, then applies the real symmetric Jacobi rotation. Sweeps
/// stop when the off-diagonal Frobenius norm is below
/// [`tol::JACOBI_OFF_DIAGONAL`] times the input norm. Ties in the final
/// descending sort keep sweep order.
pub fn eig_hermitian(op: &HermitianOperator) -> Eigen {
    let n = op.dim();
    let mut a = op.matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();
    let threshold = tol::JACOBI_OFF_DIAGONAL * norm;

    for _ in 0..tol::JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    Eigen { values, vectors }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let n = a.rows();
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Unitary acting on columns p, q:
    //   [ c          s        ]
    //   [ -s e*      c e*     ]   with e = phase
    let ec = phase.conj();
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = ec * (-s);
    let g_qq = ec * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, ONE};
    use proptest::prelude::*;

    fn residual(op: &HermitianOperator, e: &Eigen) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..op.dim() {
            let vk = e.vector(k);
            let av = op.matrix().mul_vec(&vk);
            for (x, y) in av.iter().zip(&vk) {
                worst = worst.max((x - y * e.values[k]).norm());
            }
        }
        worst
    }

    fn unitarity_defect(v: &ComplexMatrix) -> f64 {
        (&v.adjoint() * v).max_abs_diff(&ComplexMatrix::identity(v.rows()))
    }

    #[test]
    fn sigma_z_eigensystem() {
        let z = HermitianOperator::new(ComplexMatrix::from_real_diagonal(&[1.0, -1.0])).unwrap();
        let e = z.eig();
        assert_eq!(e.values, vec![1.0, -1.0]);
        assert!((e.vector(0)[0].norm() - 1.0).abs() < 1e-15);
        assert!((e.vector(1)[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_x_eigensystem() {
        let x =
            HermitianOperator::new(ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]])).unwrap();
        let e = x.eig();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vector(0);
        // eigenvector (1, 1)/sqrt(2) up to a global phase
        assert!(((v0[0].conj() * v0[1]).re - 0.5).abs() < 1e-14);
        assert!((v0[0].norm() - h).abs() < 1e-14);
        assert!(residual(&x, &e) < 1e-14);
    }

    #[test]
    fn sigma_x_kron_sigma_x_spectrum() {
        let sx = ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]]);
        let xx = HermitianOperator::new(kron(&sx, &sx)).unwrap();
        let e = xx.eig();
        for (got, want) in e.values.iter().zip([1.0, 1.0, -1.0, -1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(residual(&xx, &e) < 1e-12);
    }

    #[test]
    fn bloch_state_eigenvalues() {
        // theta = (0.3, 0.3, 0.3): eigenvalues (1 +- 0.3 sqrt 3) / 2
        let rho = ComplexMatrix::from_rows(&[
            [C64::new(0.65, 0.0), C64::new(0.15, -0.15)],
            [C64::new(0.15, 0.15), C64::new(0.35, 0.0)],
        ]);
        let e = HermitianOperator::new(rho).unwrap().eig();
        let r = 0.3 * 3f64.sqrt();
        assert!((e.values[0] - (1.0 + r) / 2.0).abs() < 1e-14);
        assert!((e.values[1] - (1.0 - r) / 2.0).abs() < 1e-14);
        assert!((e.values[0] - 0.7598).abs() < 1e-4);
        assert!((e.values[1] - 0.2402).abs() < 1e-4);
    }

    fn hermitian_strategy() -> impl Strategy<Value = HermitianOperator> {
        (1usize..=16).prop_flat_map(|n| {
            prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |xs| {
                let mut m = ComplexMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let k = 2 * (i * n + j);
                        m[(i, j)] = C64::new(xs[k], xs[k + 1]);
                    }
                }
                let mh = m.adjoint();
                HermitianOperator::symmetrized(&m + &mh)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reconstruction_and_orthonormality(a in hermitian_strategy()) {
            let e = a.eig();
            prop_assert!(e.reconstruct().matrix().max_abs_diff(a.matrix()) <= 1e-9);
            prop_assert!(unitarity_defect(&e.vectors) <= 1e-10);
            let scale = a.matrix().frobenius_norm().max(1.0);
            prop_assert!(residual(&a, &e) <= 1e-10 * scale);
            for w in e.values.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
        }

        #[test]
        fn kron_trace_factorizes(a in hermitian_strategy(), b in hermitian_strategy()) {
            let k = kron(a.matrix(), b.matrix());
            let want = a.matrix().trace() * b.matrix().trace();
            let got = k.trace();
            let scale = want.norm().max(1e-300);
            prop_assert!((got - want).norm() <= 1e-12 * scale.max(1.0));
        }
    }
}
