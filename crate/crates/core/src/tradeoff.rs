//! Trade-off surfaces of the diagonal MSE `(Vx, Vy, Vz)`.
//!
//! All points are per-qubit normalized. At the maximally mixed state the
//! single- and two-copy surfaces are known in closed form; elsewhere the
//! attainable region is approximated by intersecting the halfspaces
//! `sum_i w_i V_i >= C(W)` over a grid of weights.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{check_copies, nhcrb_analytic_origin, nhcrb_sdp};
use crate::error::{Error, Result};
use crate::linalg::real::{mat3_det, mat3_inverse, Mat3};
use crate::model::{model_point, qfi, BlochVector};
use crate::normalization::Normalization;
use crate::povm::WeightSpec;
use crate::tol;

/// Diagonal of a normalized MSE matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsePoint {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub normalization: Normalization,
}

impl MsePoint {
    /// Per-qubit point.
    pub fn new(v: [f64; 3]) -> Self {
        Self::with_normalization(v, Normalization::PerQubit)
    }

    pub fn with_normalization(v: [f64; 3], normalization: Normalization) -> Self {
        Self {
            vx: v[0],
            vy: v[1],
            vz: v[2],
            normalization,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.vx, self.vy, self.vz]
    }

    fn per_qubit(&self) -> Result<[f64; 3]> {
        if self.normalization != Normalization::PerQubit {
            return Err(Error::NormalizationMismatch {
                expected: Normalization::PerQubit.to_string(),
                found: self.normalization.to_string(),
            });
        }
        Ok(self.as_array())
    }
}

/// Halfspace `w . V >= offset` forbidden-region boundary for one weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportingPlane {
    #[serde(rename = "w")]
    pub weights: WeightSpec,
    #[serde(rename = "C")]
    pub offset: f64,
}

impl SupportingPlane {
    pub fn slack(&self, v: [f64; 3]) -> f64 {
        self.weights.dot(v) - self.offset
    }
}

/// `VxVyVz - VxVy - VxVz - VyVz`, nonnegative on the single-copy attainable side.
pub fn single_copy_surface_residual(p: &MsePoint) -> Result<f64> {
    let [x, y, z] = p.per_qubit()?;
    Ok(single_residual(x, y, z))
}

/// Two-copy analogue with the extra `3/4 (Vx + Vy + Vz) - 1/2`.
pub fn two_copy_surface_residual(p: &MsePoint) -> Result<f64> {
    let [x, y, z] = p.per_qubit()?;
    Ok(single_residual(x, y, z) + 0.75 * (x + y + z) - 0.5)
}

/// Residual of the surface for the given number of copies.
pub fn surface_residual(p: &MsePoint, copies: usize) -> Result<f64> {
    check_copies(copies)?;
    if copies == 1 {
        single_copy_surface_residual(p)
    } else {
        two_copy_surface_residual(p)
    }
}

fn single_residual(x: f64, y: f64, z: f64) -> f64 {
    x * y * z - x * y - x * z - y * z
}

/// `(V_i - 1)(V_j - 1) - 1`.
pub fn pairwise_residual(p: &MsePoint, i: usize, j: usize) -> Result<f64> {
    if i == j || i > 2 || j > 2 {
        return Err(Error::InvalidArgument(format!(
            "pairwise residual needs two distinct axes, got {i} and {j}"
        )));
    }
    let v = p.per_qubit()?;
    Ok((v[i] - 1.0) * (v[j] - 1.0) - 1.0)
}

/// Per-qubit MSE of the optimal measurement for `w` at the origin, the point
/// where the plane `w . V = C(w)` touches the surface.
pub fn boundary_point_from_weights(w: &WeightSpec, copies: usize) -> Result<MsePoint> {
    check_copies(copies)?;
    w.require_positive()?;
    let s = w.sqrt();
    let total: f64 = s.iter().sum();
    let v = if copies == 1 {
        s.map(|si| total / si)
    } else {
        s.map(|si| (si + total) / (2.0 * si))
    };
    Ok(MsePoint::new(v))
}

/// Weights whose single-copy tangent point is `p`, as `(s^2, t^2, (1-s-t)^2)`.
pub fn weights_from_boundary_point(p: &MsePoint) -> Result<WeightSpec> {
    let residual = single_copy_surface_residual(p)?;
    let [x, y, z] = p.as_array();
    if !residual.is_finite()
        || residual.abs() > tol::ON_BOUNDARY
        || x <= 1.0
        || y <= 1.0
        || z <= 1.0
    {
        return Err(Error::OffBoundary(residual));
    }
    let denom = x * y + x * z + y * z;
    let s = y * z / denom;
    let t = x * z / denom;
    let r = 1.0 - s - t;
    WeightSpec::new(s * s, t * t, r * r)
}

/// Point of a weight grid: integer triple `u` and `W = diag(u^2) / |u|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub u: [u32; 3],
    pub weights: WeightSpec,
}

/// Triples `u_i in {1..n}` with proportional duplicates removed, in
/// lexicographic order of the first occurrence.
pub fn weight_grid(n: u32) -> Result<Vec<GridPoint>> {
    if n == 0 {
        return Err(Error::InvalidArgument("weight grid needs n >= 1".into()));
    }
    let mut out = Vec::new();
    for a in 1..=n {
        for b in 1..=n {
            for c in 1..=n {
                if gcd(gcd(a, b), c) != 1 {
                    continue;
                }
                let u = [a, b, c];
                out.push(GridPoint {
                    u,
                    weights: WeightSpec::from_grid_triple(u.map(f64::from))?,
                });
            }
        }
    }
    Ok(out)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Vertices with any coordinate above this are dropped.
    pub clip: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { clip: 50.0 }
    }
}

/// Halfspace approximation of the attainable region at one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceScan {
    pub theta: BlochVector,
    pub copies: usize,
    pub planes: Vec<SupportingPlane>,
    #[serde(with = "vertex_arrays")]
    pub vertices: Vec<MsePoint>,
    /// Surface residual of each vertex, at the origin only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residuals: Option<Vec<f64>>,
    /// Tangent point of each plane, at the origin only.
    #[serde(
        skip_serializing_if = "Option::is_none",
        default,
        with = "opt_vertex_arrays"
    )]
    pub tangent_points: Option<Vec<MsePoint>>,
    pub metadata: ScanMetadata,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub clip: f64,
    pub clipped_vertices: usize,
    pub qcrb_diagonal: [f64; 3],
    pub plane_method: String,
}

/// Per-qubit planes for every weight, then all feasible triple intersections.
pub fn surface_scan(theta: BlochVector, copies: usize, grid: &[WeightSpec]) -> Result<SurfaceScan> {
    surface_scan_with(theta, copies, grid, &ScanOptions::default())
}

pub fn surface_scan_with(
    theta: BlochVector,
    copies: usize,
    grid: &[WeightSpec],
    options: &ScanOptions,
) -> Result<SurfaceScan> {
    check_copies(copies)?;
    theta.check_physical()?;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("weight grid is empty".into()));
    }
    let origin = theta.is_origin();
    let m = model_point(theta, copies)?;
    let planes = grid
        .par_iter()
        .map(|w| {
            let bound = if origin {
                nhcrb_analytic_origin(w, copies, Normalization::PerQubit)?
            } else {
                nhcrb_sdp(&m, w, Normalization::PerQubit)?.bound
            };
            Ok(SupportingPlane {
                weights: *w,
                offset: bound.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let jinv = mat3_inverse(&qfi(theta)?)?;
    let qcrb_diagonal = [jinv[0][0], jinv[1][1], jinv[2][2]];
    let (vertices, clipped_vertices) = enumerate_vertices(&planes, qcrb_diagonal, options.clip);

    let (residuals, tangent_points) = if origin {
        let residuals = vertices
            .iter()
            .map(|v| surface_residual(v, copies))
            .collect::<Result<Vec<_>>>()?;
        let tangents = grid
            .iter()
            .map(|w| boundary_point_from_weights(w, copies))
            .collect::<Result<Vec<_>>>()?;
        (Some(residuals), Some(tangents))
    } else {
        (None, None)
    };

    Ok(SurfaceScan {
        theta,
        copies,
        planes,
        vertices,
        residuals,
        tangent_points,
        metadata: ScanMetadata {
            clip: options.clip,
            clipped_vertices,
            qcrb_diagonal,
            plane_method: if origin { "analytic" } else { "sdp" }.to_string(),
        },
    })
}

fn enumerate_vertices(
    planes: &[SupportingPlane],
    floor: [f64; 3],
    clip: f64,
) -> (Vec<MsePoint>, usize) {
    let n = planes.len();
    let candidates: Vec<([f64; 3], bool)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut local = Vec::new();
            for b in a + 1..n {
                for c in b + 1..n {
                    if let Some(v) = intersect(&planes[a], &planes[b], &planes[c]) {
                        let feasible = planes
                            .iter()
                            .all(|p| p.slack(v) >= -tol::VERTEX_FEASIBILITY)
                            && (0..3).all(|i| v[i] >= floor[i] - tol::VERTEX_FEASIBILITY);
                        if feasible {
                            local.push((v, v.iter().all(|&x| x <= clip)));
                        }
                    }
                }
            }
            local
        })
        .collect();

    let mut kept: Vec<[f64; 3]> = Vec::new();
    let mut dropped: Vec<[f64; 3]> = Vec::new();
    for (v, inside) in candidates {
        let bucket = if inside { &mut kept } else { &mut dropped };
        if !bucket.iter().any(|u| distance(u, &v) < tol::VERTEX_MERGE) {
            bucket.push(v);
        }
    }
    (kept.into_iter().map(MsePoint::new).collect(), dropped.len())
}

fn intersect(a: &SupportingPlane, b: &SupportingPlane, c: &SupportingPlane) -> Option<[f64; 3]> {
    let m: Mat3 = [
        a.weights.as_array(),
        b.weights.as_array(),
        c.weights.as_array(),
    ];
    let norms: f64 = m
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .product();
    if mat3_det(&m).abs() < tol::PARALLEL_NORMALS * norms {
        return None;
    }
    let inv = mat3_inverse(&m).ok()?;
    let rhs = [a.offset, b.offset, c.offset];
    Some(std::array::from_fn(|i| {
        (0..3).map(|k| inv[i][k] * rhs[k]).sum()
    }))
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

impl SurfaceScan {
    /// One vertex per row: `vx,vy,vz,residual` (residual empty away from the origin).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["vx", "vy", "vz", "residual"])?;
        for (k, v) in self.vertices.iter().enumerate() {
            let residual = self
                .residuals
                .as_ref()
                .map(|r| crate::output::format_sig(r[k]))
                .unwrap_or_default();
            let [x, y, z] = v.as_array().map(crate::output::format_sig);
            wtr.write_record([x, y, z, residual])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

mod vertex_arrays {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::MsePoint;

    pub fn serialize<S: Serializer>(v: &[MsePoint], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(MsePoint::as_array)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<MsePoint>, D::Error> {
        Ok(Vec::<[f64; 3]>::deserialize(d)?
            .into_iter()
            .map(MsePoint::new)
            .collect())
    }
}

mod opt_vertex_arrays {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::MsePoint;

    pub fn serialize<S: Serializer>(v: &Option<Vec<MsePoint>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|v| v.iter().map(MsePoint::as_array).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<MsePoint>>, D::Error> {
        Ok(Option::<Vec<[f64; 3]>>::deserialize(d)?
            .map(|v| v.into_iter().map(MsePoint::new).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{c1_per_qubit, c2_per_qubit};
    use proptest::prelude::*;

    fn p(v: [f64; 3]) -> MsePoint {
        MsePoint::new(v)
    }

    fn grid3() -> Vec<WeightSpec> {
        weight_grid(3)
            .unwrap()
            .into_iter()
            .map(|g| g.weights)
            .collect()
    }

    #[test]
    fn single_copy_residual_examples() {
        assert_eq!(
            single_copy_surface_residual(&p([3.0, 3.0, 3.0])).unwrap(),
            0.0
        );
        assert_eq!(
            single_copy_surface_residual(&p([2.0, 4.0, 4.0])).unwrap(),
            0.0
        );
        assert_eq!(
            single_copy_surface_residual(&p([1.0, 1.0, 1.0])).unwrap(),
            -2.0
        );
    }

    #[test]
    fn two_copy_residual_examples() {
        assert!(
            two_copy_surface_residual(&p([2.0, 2.0, 2.0]))
                .unwrap()
                .abs()
                < 1e-15
        );
        assert!((two_copy_surface_residual(&p([1.0, 1.0, 1.0])).unwrap() + 0.25).abs() < 1e-15);
        assert!((two_copy_surface_residual(&p([3.0, 3.0, 3.0])).unwrap() - 6.25).abs() < 1e-15);
    }

    #[test]
    fn pairwise_examples() {
        assert_eq!(pairwise_residual(&p([3.0, 3.0, 7.0]), 0, 1).unwrap(), 3.0);
        assert_eq!(pairwise_residual(&p([2.0, 2.0, 7.0]), 0, 1).unwrap(), 0.0);
        assert!(pairwise_residual(&p([2.0, 2.0, 2.0]), 1, 1).is_err());
    }

    #[test]
    fn per_measurement_points_rejected() {
        let q = MsePoint::with_normalization([3.0, 3.0, 3.0], Normalization::PerMeasurement);
        assert!(matches!(
            single_copy_surface_residual(&q),
            Err(Error::NormalizationMismatch { .. })
        ));
        assert!(two_copy_surface_residual(&q).is_err());
        assert!(pairwise_residual(&q, 0, 1).is_err());
        assert!(weights_from_boundary_point(&q).is_err());
    }

    #[test]
    fn boundary_point_examples() {
        let eq = WeightSpec::equal();
        assert_eq!(
            boundary_point_from_weights(&eq, 1).unwrap().as_array(),
            [3.0, 3.0, 3.0]
        );
        assert_eq!(
            boundary_point_from_weights(&eq, 2).unwrap().as_array(),
            [2.0, 2.0, 2.0]
        );
        let w = WeightSpec::new(4.0, 1.0, 1.0).unwrap();
        assert_eq!(
            boundary_point_from_weights(&w, 1).unwrap().as_array(),
            [2.0, 4.0, 4.0]
        );
        assert!(boundary_point_from_weights(&WeightSpec::new(1.0, 0.0, 1.0).unwrap(), 1).is_err());
        assert!(boundary_point_from_weights(&eq, 3).is_err());
    }

    #[test]
    fn weights_from_boundary_examples() {
        let w = weights_from_boundary_point(&p([3.0, 3.0, 3.0]))
            .unwrap()
            .as_array();
        for x in w {
            assert!((x - 1.0 / 9.0).abs() < 1e-15);
        }
        let w = weights_from_boundary_point(&p([2.0, 4.0, 4.0]))
            .unwrap()
            .as_array();
        assert!(
            (w[0] - 0.25).abs() < 1e-15
                && (w[1] - 1.0 / 16.0).abs() < 1e-15
                && (w[2] - 1.0 / 16.0).abs() < 1e-15
        );
        assert!(matches!(
            weights_from_boundary_point(&p([2.0, 2.0, 2.0])),
            Err(Error::OffBoundary(_))
        ));
    }

    #[test]
    fn default_grid_has_25_points() {
        let g = weight_grid(3).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0].u, [1, 1, 1]);
        assert!(!g.iter().any(|x| x.u == [2, 2, 2] || x.u == [3, 3, 3]));
        assert!(weight_grid(0).is_err());
        assert_eq!(weight_grid(1).unwrap().len(), 1);
    }

    #[test]
    fn degenerate_direction_limit() {
        let w = WeightSpec::new(1.0, 1e-8, 1e-8).unwrap();
        for copies in 1..=2 {
            let vx = boundary_point_from_weights(&w, copies).unwrap().vx;
            assert!(
                vx > 1.0 && vx - 1.0 <= 2.0 * 1e-4 + 1e-12,
                "copies {copies}: {vx}"
            );
        }
    }

    fn check_origin_scan(copies: usize) {
        let grid = grid3();
        let scan = surface_scan(BlochVector::ORIGIN, copies, &grid).unwrap();
        assert_eq!(scan.planes.len(), 25);
        assert!(!scan.vertices.is_empty());
        let residuals = scan.residuals.as_ref().unwrap();
        for (v, r) in scan.vertices.iter().zip(residuals) {
            for plane in &scan.planes {
                assert!(plane.slack(v.as_array()) >= -tol::VERTEX_FEASIBILITY);
            }
            assert!(v
                .as_array()
                .iter()
                .all(|&x| (1.0 - 1e-6..=50.0).contains(&x)));
            // Vertices of the halfspace intersection lie on supporting planes,
            // hence never strictly inside the attainable region.
            assert!(*r <= 1e-9, "vertex {v:?} residual {r}");
        }
        for t in scan.tangent_points.as_ref().unwrap() {
            assert!(surface_residual(t, copies).unwrap().abs() <= 1e-9);
            for plane in &scan.planes {
                assert!(plane.slack(t.as_array()) >= -1e-12);
            }
        }
    }

    #[test]
    fn origin_scan_single_copy() {
        check_origin_scan(1);
    }

    #[test]
    fn origin_scan_two_copy() {
        check_origin_scan(2);
    }

    #[test]
    fn origin_scan_refines_towards_surface() {
        for copies in 1..=2 {
            let closest: Vec<f64> = (3..=5)
                .map(|n| {
                    let grid: Vec<_> = weight_grid(n)
                        .unwrap()
                        .into_iter()
                        .map(|g| g.weights)
                        .collect();
                    let scan = surface_scan(BlochVector::ORIGIN, copies, &grid).unwrap();
                    scan.residuals
                        .unwrap()
                        .into_iter()
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            assert!(
                closest[0] < closest[1] && closest[1] < closest[2] && closest[2] < 0.0,
                "{closest:?}"
            );
        }
    }

    #[test]
    fn collective_planes_below_single_copy() {
        let theta = BlochVector::equal(0.3);
        let grid: Vec<_> = weight_grid(2)
            .unwrap()
            .into_iter()
            .map(|g| g.weights)
            .collect();
        let one = surface_scan(theta, 1, &grid).unwrap();
        let two = surface_scan(theta, 2, &grid).unwrap();
        assert!(one.residuals.is_none() && one.tangent_points.is_none());
        for (a, b) in one.planes.iter().zip(&two.planes) {
            assert_eq!(a.weights, b.weights);
            assert!(b.offset < a.offset, "{} vs {}", b.offset, a.offset);
        }
        for v in one.vertices.iter().chain(&two.vertices) {
            assert!(v
                .as_array()
                .iter()
                .zip(one.metadata.qcrb_diagonal)
                .all(|(x, q)| *x >= q - 1e-6));
        }
    }

    #[test]
    fn scan_rejects_bad_input() {
        assert!(surface_scan(BlochVector::ORIGIN, 1, &[]).is_err());
        assert!(surface_scan(BlochVector::new(0.0, 0.0, 2.0), 1, &grid3()).is_err());
        assert!(surface_scan(BlochVector::ORIGIN, 3, &grid3()).is_err());
    }

    #[test]
    fn fewer_than_three_planes_gives_no_vertices() {
        let grid = [WeightSpec::equal(), WeightSpec::new(1.0, 2.0, 3.0).unwrap()];
        let scan = surface_scan(BlochVector::ORIGIN, 1, &grid).unwrap();
        assert!(scan.vertices.is_empty());
    }

    #[test]
    fn clipping_is_recorded() {
        let scan = surface_scan_with(BlochVector::ORIGIN, 1, &grid3(), &ScanOptions { clip: 5.0 })
            .unwrap();
        assert!(scan.metadata.clipped_vertices > 0);
        assert!(scan
            .vertices
            .iter()
            .all(|v| v.as_array().iter().all(|&x| x <= 5.0)));
    }

    #[test]
    fn json_shape_and_csv() {
        let grid = grid3();
        let scan = surface_scan(BlochVector::ORIGIN, 2, &grid).unwrap();
        let value = serde_json::to_value(&scan).unwrap();
        assert!(value["planes"][0]["w"].is_array() && value["planes"][0]["C"].is_number());
        assert_eq!(value["vertices"][0].as_array().unwrap().len(), 3);
        let back: SurfaceScan = serde_json::from_value(value).unwrap();
        assert_eq!(back.vertices.len(), scan.vertices.len());
        let mut buf = Vec::new();
        scan.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("vx,vy,vz,residual\n"));
        assert_eq!(text.lines().count(), scan.vertices.len() + 1);
    }

    fn weights() -> impl Strategy<Value = WeightSpec> {
        (0.01f64..1.0, 0.01f64..1.0, 0.01f64..1.0)
            .prop_map(|(a, b, c)| WeightSpec::new(a, b, c).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn tangency(w in weights()) {
            for copies in 1..=2 {
                let b = boundary_point_from_weights(&w, copies).unwrap();
                let c = if copies == 1 { c1_per_qubit(&w) } else { c2_per_qubit(&w) };
                prop_assert!((w.dot(b.as_array()) - c).abs() <= 1e-9 * c);
                let scale = b.as_array().iter().product::<f64>();
                prop_assert!(surface_residual(&b, copies).unwrap().abs() <= 1e-9 * scale.max(1.0));
            }
        }

        #[test]
        fn pairwise_holds_on_single_copy_boundary(w in weights()) {
            let b = boundary_point_from_weights(&w, 1).unwrap();
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                prop_assert!(pairwise_residual(&b, i, j).unwrap() >= -1e-9);
            }
        }

        #[test]
        fn round_trip(w in weights()) {
            let b = boundary_point_from_weights(&w, 1).unwrap();
            let back = weights_from_boundary_point(&b).unwrap().normalized().as_array();
            let want = w.normalized().as_array();
            for k in 0..3 {
                prop_assert!((back[k] - want[k]).abs() <= 1e-6 * want[k]);
            }
        }

        #[test]
        fn two_copy_dominates(w in weights()) {
            let one = boundary_point_from_weights(&w, 1).unwrap().as_array();
            let two = boundary_point_from_weights(&w, 2).unwrap().as_array();
            for k in 0..3 {
                prop_assert!(two[k] < one[k]);
            }
        }
    }
}
