//! The qubit statistical model `rho(theta) = (I + theta . sigma) / 2`.
//!
//! Provides the Bloch parametrization, its derivatives, symmetric logarithmic
//! derivatives, the quantum Fisher information, and the two-copy state used by
//! collective measurements. The left Kronecker factor is copy one throughout.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::real::Mat3;
use crate::linalg::{kron_vec, ComplexMatrix, HermitianOperator, C64, I, ONE, ZERO};
use crate::tol;

/// Bloch vector `(theta_x, theta_y, theta_z)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// `(t, t, t)`.
    pub fn equal(t: f64) -> Self {
        Self::new(t, t, t)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_origin(&self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.z == 0.0
    }

    /// Common value when all three components agree.
    pub fn equal_component(&self) -> Option<f64> {
        (self.x == self.y && self.y == self.z).then_some(self.x)
    }

    /// Errors unless `|theta| <= 1`.
    pub fn check_physical(&self) -> Result<()> {
        let norm = self.norm();
        if !norm.is_finite() || norm > 1.0 + 1e-12 {
            return Err(Error::Unphysical { norm, limit: 1.0 });
        }
        Ok(())
    }

    /// Errors unless `|theta| < 1 - margin`, the domain of SLD and QFI
    /// closed forms.
    pub fn check_interior(&self, margin: f64) -> Result<()> {
        self.check_physical()?;
        let norm = self.norm();
        if norm >= 1.0 - margin {
            return Err(Error::Singularity(norm));
        }
        Ok(())
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(b: BlochVector) -> Self {
        b.as_array()
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Pauli matrices in the computational basis, `|0> = (1, 0)`.
pub fn pauli(axis: usize) -> HermitianOperator {
    let m = match axis {
        0 => ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]]),
        1 => ComplexMatrix::from_rows(&[[ZERO, -I], [I, ZERO]]),
        2 => ComplexMatrix::from_real_diagonal(&[1.0, -1.0]),
        _ => panic!("axis {axis} out of range"),
    };
    HermitianOperator::symmetrized(m)
}

pub fn paulis() -> [HermitianOperator; 3] {
    [pauli(0), pauli(1), pauli(2)]
}

/// Normalized eigenvectors `(|0_i>, |1_i>)` of `sigma_i` for eigenvalues +1
/// and -1. The `sigma_y` pair uses the `(1, +-i)/sqrt(2)` phase convention.
pub fn pauli_eigenvectors(axis: usize) -> ([C64; 2], [C64; 2]) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = C64::new(h, 0.0);
    match axis {
        0 => ([r, r], [r, -r]),
        1 => ([r, I * h], [r, -I * h]),
        2 => ([ONE, ZERO], [ZERO, ONE]),
        _ => panic!("axis {axis} out of range"),
    }
}

/// `(I + theta . sigma) / 2`.
pub fn density_from_bloch(theta: BlochVector) -> Result<HermitianOperator> {
    theta.check_physical()?;
    Ok(bloch_operator(theta))
}

fn bloch_operator(theta: BlochVector) -> HermitianOperator {
    let m = ComplexMatrix::from_rows(&[
        [
            C64::new(0.5 * (1.0 + theta.z), 0.0),
            C64::new(0.5 * theta.x, -0.5 * theta.y),
        ],
        [
            C64::new(0.5 * theta.x, 0.5 * theta.y),
            C64::new(0.5 * (1.0 - theta.z), 0.0),
        ],
    ]);
    HermitianOperator::symmetrized(m)
}

/// Closed-form symmetric logarithmic derivatives `(L_x, L_y, L_z)`.
pub fn sld_operators(theta: BlochVector) -> Result<[HermitianOperator; 3]> {
    theta.check_interior(tol::BLOCH_MARGIN)?;
    let (x, y, z) = (theta.x, theta.y, theta.z);
    let inv = 1.0 / (1.0 - theta.norm_sqr());
    let c = |re: f64, im: f64| C64::new(re * inv, im * inv);

    let lx = ComplexMatrix::from_rows(&[
        [c(x * (z - 1.0), 0.0), c(1.0 - y * y - z * z, -x * y)],
        [c(1.0 - y * y - z * z, x * y), c(-x * (z + 1.0), 0.0)],
    ]);
    // -i (a + i b) = b - i a  and  i (a - i b) = b + i a
    let a = 1.0 - x * x - z * z;
    let b = x * y;
    let ly = ComplexMatrix::from_rows(&[
        [c(y * (z - 1.0), 0.0), c(b, -a)],
        [c(b, a), c(-y * (z + 1.0), 0.0)],
    ]);
    let lz = ComplexMatrix::from_rows(&[
        [c(1.0 - x * x - y * y - z, 0.0), c(z * x, -z * y)],
        [c(z * x, z * y), c(-1.0 + x * x + y * y - z, 0.0)],
    ]);
    Ok([
        HermitianOperator::symmetrized(lx),
        HermitianOperator::symmetrized(ly),
        HermitianOperator::symmetrized(lz),
    ])
}

/// Closed-form quantum Fisher information of a single copy.
pub fn qfi(theta: BlochVector) -> Result<Mat3> {
    theta.check_interior(tol::BLOCH_MARGIN)?;
    let (x, y, z) = (theta.x, theta.y, theta.z);
    let inv = 1.0 / (1.0 - theta.norm_sqr());
    Ok([
        [(1.0 - y * y - z * z) * inv, x * y * inv, x * z * inv],
        [x * y * inv, (1.0 - x * x - z * z) * inv, y * z * inv],
        [x * z * inv, y * z * inv, (1.0 - x * x - y * y) * inv],
    ])
}

/// `J_ij = Tr[rho {L_i, L_j}] / 2` evaluated from operators.
pub fn qfi_from_slds(rho: &HermitianOperator, slds: &[HermitianOperator; 3]) -> Mat3 {
    let mut j = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            let v = rho.trace_product(&slds[a].jordan_product(&slds[b]));
            j[a][b] = v;
            j[b][a] = v;
        }
    }
    j
}

/// State and parameter derivatives of `rho(theta)^{(x) copies}`.
#[derive(Clone, Debug)]
pub struct ModelPoint {
    pub theta: BlochVector,
    pub copies: usize,
    pub rho: HermitianOperator,
    pub derivatives: [HermitianOperator; 3],
}

impl ModelPoint {
    pub fn new(theta: BlochVector, copies: usize) -> Result<Self> {
        model_point(theta, copies)
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// Per-measurement quantum Fisher information, `copies * J(theta)`.
    pub fn qfi(&self) -> Result<Mat3> {
        Ok(crate::linalg::real::mat3_scale(
            &qfi(self.theta)?,
            self.copies as f64,
        ))
    }
}

pub fn model_point(theta: BlochVector, copies: usize) -> Result<ModelPoint> {
    if !(1..=2).contains(&copies) {
        return Err(Error::UnsupportedCopies(copies));
    }
    let rho1 = density_from_bloch(theta)?;
    let d1 = paulis().map(|s| s.scale(0.5));
    if copies == 1 {
        return Ok(ModelPoint {
            theta,
            copies,
            rho: rho1,
            derivatives: d1,
        });
    }
    let rho = rho1.kron(&rho1);
    let derivatives = d1.map(|d| d.kron(&rho1).add(&rho1.kron(&d)));
    Ok(ModelPoint {
        theta,
        copies,
        rho,
        derivatives,
    })
}

/// Largest `t` for which `(t, t, t)` is a valid state.
pub fn max_equal_component() -> f64 {
    1.0 / 3f64.sqrt()
}

/// Four-decimal representatives of the degenerate eigenspace of
/// `rho(t,t,t)^{(x)2}`, four decimals.
const DEGENERATE_LITERALS: [[(f64, f64); 4]; 2] = [
    [
        (0.0, -0.4757),
        (0.1617, 0.2093),
        (-0.6375, 0.2665),
        (-0.4757, 0.0),
    ],
    [
        (0.0, -0.3271),
        (-0.7447, 0.2051),
        (0.4176, 0.1220),
        (-0.3271, 0.0),
    ],
];

/// The four eigenstates used to emulate the mixed two-copy state by mixing
/// pure preparations, with their weights.
///
/// Ordered as `lambda_-^2`, the degenerate
/// `lambda_+ lambda_-` pair, then `lambda_+^2`, where
/// `lambda_+- = (1 +- sqrt(3) t) / 2`. The non-degenerate vectors are
/// `-i|-n,-n>` and `i|+n,+n>` for `n = (1,1,1)/sqrt(3)`. The degenerate pair is
/// the four-decimal pair projected exactly onto `span{|+n,-n>, |-n,+n>}` and
/// orthonormalized, so every vector is an exact eigenvector for any `t`.
pub fn equal_component_eigensystem(t: f64) -> Result<[(f64, Vec<C64>); 4]> {
    let limit = max_equal_component();
    if !(0.0..limit).contains(&t) {
        return Err(Error::Unphysical {
            norm: t * 3f64.sqrt(),
            limit: 1.0,
        });
    }
    let r = t * 3f64.sqrt();
    let lp = 0.5 * (1.0 + r);
    let lm = 0.5 * (1.0 - r);

    let (plus, minus) = axis_eigenvectors();
    let pp = kron_vec(&plus, &plus);
    let mm = kron_vec(&minus, &minus);
    let pm = kron_vec(&plus, &minus);
    let mp = kron_vec(&minus, &plus);

    let phi1: Vec<C64> = mm.iter().map(|&z| -I * z).collect();
    let phi4: Vec<C64> = pp.iter().map(|&z| I * z).collect();

    let literal = |k: usize| -> Vec<C64> {
        DEGENERATE_LITERALS[k]
            .iter()
            .map(|&(re, im)| C64::new(re, im))
            .collect()
    };
    let project = |v: &[C64]| -> Vec<C64> {
        let a = inner(&pm, v);
        let b = inner(&mp, v);
        pm.iter().zip(&mp).map(|(&u, &w)| u * a + w * b).collect()
    };
    let phi2 = normalize(project(&literal(0)));
    let mut phi3 = project(&literal(1));
    let overlap = inner(&phi2, &phi3);
    for (z, &p) in phi3.iter_mut().zip(&phi2) {
        *z -= p * overlap;
    }
    let phi3 = normalize(phi3);

    Ok([
        (lm * lm, phi1),
        (lp * lm, phi2),
        (lp * lm, phi3),
        (lp * lp, phi4),
    ])
}

/// `|+n>` and `|-n>` for `n = (1,1,1)/sqrt(3)` with `<0|+n>` real positive
/// and `<0|-n>` real positive.
fn axis_eigenvectors() -> ([C64; 2], [C64; 2]) {
    let beta = (1.0 / 3f64.sqrt()).acos();
    let (s, c) = (0.5 * beta).sin_cos();
    let phase = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    (
        [C64::new(c, 0.0), phase * s],
        [C64::new(s, 0.0), -phase * c],
    )
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn normalize(v: Vec<C64>) -> Vec<C64> {
    let n = inner(&v, &v).re.sqrt();
    v.into_iter().map(|z| z / n).collect()
}
