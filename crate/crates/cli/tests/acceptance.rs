//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qtradeoff::bounds::{c1_per_qubit, holevo_origin, nhcrb_analytic_origin, nhcrb_sdp};
use qtradeoff::estimation::derive_seed;
use qtradeoff::linalg::real::{mat3_identity, mat3_max_abs_diff};
use qtradeoff::model::pauli;
use qtradeoff::povm::{
    classical_fisher, mse_matrix_from_fisher, single_copy_optimal, tabulated_povm, tabulated_theta,
    tabulated_weights, two_copy_optimal,
};
use qtradeoff::reproduce::{reproduce, ReproduceConfig};
use qtradeoff::tradeoff::{pairwise_residual, surface_residual};
use qtradeoff::{
    eig_hermitian, equal_component_eigensystem, model_point, qfi, sld_operators, BlochVector,
    ComplexMatrix, HermitianOperator, MsePoint, Normalization, WeightSpec, C64,
};

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Uniform draw in `[0, 1)` from a fixed stream.
fn uniform(stream: u64, i: u64) -> f64 {
    (derive_seed(20240917, &[stream, i]) >> 11) as f64 / (1u64 << 53) as f64
}

fn random_theta(stream: u64, k: u64, radius: f64) -> BlochVector {
    let mut i = 0;
    loop {
        let v: [f64; 3] = std::array::from_fn(|a| {
            radius * (2.0 * uniform(stream, 3 * (64 * k + i) + a as u64) - 1.0)
        });
        i += 1;
        if v.iter().map(|x| x * x).sum::<f64>() <= radius * radius {
            return BlochVector::new(v[0], v[1], v[2]);
        }
    }
}

fn random_weights(stream: u64, k: u64) -> WeightSpec {
    let w: [f64; 3] = std::array::from_fn(|a| 0.05 + 0.95 * uniform(stream, 3 * k + a as u64));
    WeightSpec::new(w[0], w[1], w[2]).unwrap()
}

fn diag_point(m: &[[f64; 3]; 3]) -> MsePoint {
    MsePoint::new([m[0][0], m[1][1], m[2][2]])
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let j = qfi(BlochVector::new(0.0, 0.0, 0.0)).unwrap();
    let elapsed = start.elapsed();
    let err = mat3_max_abs_diff(&j, &mat3_identity());
    outcome(
        err <= 1e-12 && elapsed < Duration::from_millis(1),
        format!("max |J(0) - I| = {err:.1e}, {} us", elapsed.as_micros()),
    )
}

/// SLD by the eigenbasis solution of `(L rho + rho L)/2 = d rho`.
fn sld_eigenbasis(rho: &HermitianOperator, d: &HermitianOperator) -> ComplexMatrix {
    let e = eig_hermitian(rho);
    let u = &e.vectors;
    let dt = &(&u.adjoint() * d.matrix()) * u;
    let n = rho.dim();
    let data = (0..n * n)
        .map(|k| {
            let (r, c) = (k / n, k % n);
            dt.row(r)[c] * (2.0 / (e.values[r] + e.values[c]))
        })
        .collect();
    let l = ComplexMatrix::from_row_major(n, n, data).unwrap();
    &(u * &l) * &u.adjoint()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut defining: f64 = 0.0;
    let mut agreement: f64 = 0.0;
    for k in 0..100 {
        let theta = random_theta(2, k, 0.9);
        let rho = qtradeoff::density_from_bloch(theta).unwrap();
        let slds = sld_operators(theta).unwrap();
        for (axis, l) in slds.iter().enumerate() {
            let d = pauli(axis).scale(0.5);
            defining = defining.max(l.jordan_product(&rho).matrix().max_abs_diff(d.matrix()));
            agreement = agreement.max(l.matrix().max_abs_diff(&sld_eigenbasis(&rho, &d)));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        defining <= 1e-10 && agreement <= 1e-10 && elapsed < Duration::from_secs(1),
        format!(
            "defining residual {defining:.1e}, eigenbasis agreement {agreement:.1e}, {:.3} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let unit = WeightSpec::new(1.0, 1.0, 1.0).unwrap();
    let c1 = c1_per_qubit(&unit);
    let two_pm = nhcrb_analytic_origin(&unit, 2, Normalization::PerMeasurement)
        .unwrap()
        .value;
    let two_pq = nhcrb_analytic_origin(&unit, 2, Normalization::PerQubit)
        .unwrap()
        .value;
    let mut analytic_ok =
        (c1 - 9.0).abs() <= 1e-12 && (two_pm - 3.0).abs() <= 1e-12 && (two_pq - 6.0).abs() <= 1e-12;
    let origin = BlochVector::new(0.0, 0.0, 0.0);
    let mut worst_rel: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for k in 0..50 {
        let w = random_weights(3, k);
        for copies in [1, 2] {
            let m = model_point(origin, copies).unwrap();
            let sol = nhcrb_sdp(&m, &w, Normalization::PerMeasurement).unwrap();
            let exact = nhcrb_analytic_origin(&w, copies, Normalization::PerMeasurement)
                .unwrap()
                .value;
            worst_rel = worst_rel.max((sol.bound.value - exact).abs() / exact);
            worst_gap = worst_gap.max(sol.relative_gap);
        }
    }
    analytic_ok &= worst_rel <= 1e-5 && worst_gap <= 1e-6;
    let elapsed = start.elapsed();
    outcome(
        analytic_ok && elapsed < Duration::from_secs(30),
        format!(
            "C1(1,1,1) = {c1}, two-copy {two_pm}/{two_pq}; SDP worst relative error {worst_rel:.1e}, worst gap {worst_gap:.1e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let theta = tabulated_theta();
    let w = tabulated_weights();
    let mut diffs = Vec::new();
    for copies in [1, 2] {
        let m = model_point(theta, copies).unwrap();
        let povm = tabulated_povm(copies).unwrap();
        let f = classical_fisher(&m, &povm).unwrap();
        let v = mse_matrix_from_fisher(&f, Normalization::PerMeasurement).unwrap();
        let trace = w.weighted_trace(&v);
        let bound = nhcrb_sdp(&m, &w, Normalization::PerMeasurement)
            .unwrap()
            .bound
            .value;
        diffs.push((trace, bound));
    }
    let elapsed = start.elapsed();
    let pass =
        diffs.iter().all(|(t, b)| (t - b).abs() <= 2e-3) && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "one copy {:.6} vs {:.6}, two copies {:.6} vs {:.6}, {:.2} s",
            diffs[0].0,
            diffs[0].1,
            diffs[1].0,
            diffs[1].1,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_5() -> Outcome {
    let origin = BlochVector::new(0.0, 0.0, 0.0);
    let mut residual: f64 = 0.0;
    let mut saturation: f64 = 0.0;
    for k in 0..100 {
        let w = random_weights(5, k);
        for copies in [1, 2] {
            let povm = if copies == 1 {
                single_copy_optimal(&w)
            } else {
                two_copy_optimal(&w)
            }
            .unwrap();
            let m = model_point(origin, copies).unwrap();
            let f = classical_fisher(&m, &povm).unwrap();
            let v = mse_matrix_from_fisher(&f, Normalization::PerQubit).unwrap();
            residual = residual.max(surface_residual(&diag_point(&v), copies).unwrap().abs());
            let bound = nhcrb_analytic_origin(&w, copies, Normalization::PerQubit)
                .unwrap()
                .value;
            saturation = saturation.max((w.weighted_trace(&v) - bound).abs());
        }
    }
    outcome(
        residual <= 1e-9 && saturation <= 1e-10,
        format!("max surface residual {residual:.1e}, max |Tr[WV] - C| {saturation:.1e}"),
    )
}

fn criterion_6() -> Outcome {
    let on_single = surface_residual(&MsePoint::new([3.0; 3]), 1).unwrap();
    let on_double = surface_residual(&MsePoint::new([2.0; 3]), 2).unwrap();
    let unit_single = surface_residual(&MsePoint::new([1.0; 3]), 1).unwrap();
    let unit_double = surface_residual(&MsePoint::new([1.0; 3]), 2).unwrap();
    let unit = WeightSpec::new(1.0, 1.0, 1.0).unwrap();
    let holevo = holevo_origin(&unit, 1, Normalization::PerQubit)
        .unwrap()
        .value;
    let unit_trace = unit.dot([1.0; 3]);
    let mut pairwise = f64::INFINITY;
    let origin = BlochVector::new(0.0, 0.0, 0.0);
    for k in 0..100 {
        let w = random_weights(6, k);
        let m = model_point(origin, 1).unwrap();
        let f = classical_fisher(&m, &single_copy_optimal(&w).unwrap()).unwrap();
        let p = diag_point(&mse_matrix_from_fisher(&f, Normalization::PerQubit).unwrap());
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            pairwise = pairwise.min(pairwise_residual(&p, i, j).unwrap());
        }
    }
    let pass = on_single.abs() <= 1e-12
        && on_double.abs() <= 1e-12
        && unit_single.abs() > 1e-3
        && unit_double.abs() > 1e-3
        && (holevo - 3.0).abs() <= 1e-12
        && (unit_trace - 3.0).abs() <= 1e-12
        && pairwise >= -1e-9;
    outcome(
        pass,
        format!(
            "(3,3,3) {on_single:.1e}, (2,2,2) {on_double:.1e}, (1,1,1) {unit_single:.3}/{unit_double:.3}, Holevo {holevo}, min pairwise {pairwise:.1e}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let config = ReproduceConfig {
        sweep_thetas: vec![],
        sweep_shots: vec![],
        include_sic: false,
        ..ReproduceConfig::default()
    };
    let start = Instant::now();
    let run = reproduce(&config).unwrap();
    let elapsed = start.elapsed();
    let max_z_c2 = run
        .origin
        .iter()
        .map(|r| r.optimal.bounds.z_score_c2.abs())
        .fold(0.0, f64::max);
    let mean_z_c1 = run.summary.origin_mean_z_c1;
    outcome(
        run.origin.len() == 25
            && max_z_c2 <= 3.0
            && mean_z_c1 > 5.0
            && elapsed < Duration::from_secs(120),
        format!(
            "{} grid points, max |z| vs C2 {max_z_c2:.2}, mean z vs C1 {mean_z_c1:.2}, {:.2} s",
            run.origin.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let run = reproduce(&ReproduceConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let min_z_c2 = run
        .sweep
        .iter()
        .map(|r| r.optimal.bounds.z_score_c2)
        .fold(f64::INFINITY, f64::min);
    let equal: Vec<_> = run
        .sweep
        .iter()
        .filter(|r| r.t <= 0.3 + 1e-12 && r.u[0] == r.u[1] && r.u[1] == r.u[2])
        .collect();
    let below_c1 = equal
        .iter()
        .all(|r| r.optimal.weighted_trace < r.optimal.bounds.c1);
    outcome(
        run.sweep.len() == 125 && !equal.is_empty() && min_z_c2 >= -3.0 && below_c1 && elapsed < Duration::from_secs(600),
        format!(
            "{} sweep rows, min z vs SDP bound {min_z_c2:.2}, equal-weight rows below C1 for t <= 0.3: {below_c1}, {:.2} s",
            run.sweep.len(),
            elapsed.as_secs_f64()
        ),
    )
}

const LITERAL_STATES: [[(f64, f64); 4]; 4] = [
    [
        (0.0, -0.2113),
        (-0.2887, 0.2887),
        (-0.2887, 0.2887),
        (0.7887, 0.0),
    ],
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
    [
        (0.0, 0.7887),
        (-0.2887, 0.2887),
        (-0.2887, 0.2887),
        (-0.2113, 0.0),
    ],
];

fn criterion_9() -> Outcome {
    let expected = [0.0577, 0.1825, 0.1825, 0.5773];
    let system = equal_component_eigensystem(0.3).unwrap();
    let proportion_err = system
        .iter()
        .zip(expected)
        .map(|((l, _), p)| (l - p).abs())
        .fold(0.0, f64::max);
    let mut residual: f64 = 0.0;
    for t in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let rho2 = model_point(BlochVector::equal(t), 2).unwrap().rho;
        for state in LITERAL_STATES {
            let v: Vec<C64> = state.iter().map(|&(re, im)| C64::new(re, im)).collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let v: Vec<C64> = v.into_iter().map(|z| z / n).collect();
            let lambda = rho2.expectation(&v);
            let image = rho2.matrix().mul_vec(&v);
            let r = image
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * lambda).norm_sqr())
                .sum::<f64>()
                .sqrt();
            residual = residual.max(r);
        }
    }
    outcome(
        proportion_err <= 1e-3 && residual <= 1e-3,
        format!(
            "max proportion error {proportion_err:.1e}, max eigenvector residual {residual:.1e}"
        ),
    )
}

fn run_reproduce(dir: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_qtradeoff"))
        .args(["reproduce", "--seed", "42", "--out"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&status.stderr).into_owned())
    }
}

fn criterion_10() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    let start = Instant::now();
    if let Err(e) = run_reproduce(&a).and_then(|_| run_reproduce(&b)) {
        return outcome(false, format!("reproduce failed: {e}"));
    }
    let elapsed = start.elapsed();
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let identical = !names.is_empty()
        && names
            .iter()
            .all(|n| fs::read(a.join(n)).ok() == fs::read(b.join(n)).ok())
        && fs::read_dir(&b).unwrap().count() == names.len();
    outcome(
        identical,
        format!(
            "{} artifacts compared, two runs in {:.2} s",
            names.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Check; 10] = [
        ("QFI at the origin", criterion_1),
        ("SLD residuals", criterion_2),
        ("analytic bounds and SDP", criterion_3),
        ("tabulated measurements", criterion_4),
        ("tangency sweep", criterion_5),
        ("surface landmarks", criterion_6),
        ("violation at the origin", criterion_7),
        ("state sweep", criterion_8),
        ("eigenstate mixing", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        if !result.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({})",
            k + 1,
            if result.pass { "PASS" } else { "FAIL" },
            name,
            result.detail
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
