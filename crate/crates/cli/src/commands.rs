use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use qtradeoff::bounds::{holevo_origin, nhcrb_analytic_origin, nhcrb_sdp, qcrb, BoundRecord};
use qtradeoff::estimation::{derive_seed, run_experiment, ExperimentReport, ShotPlan};
use qtradeoff::output::{format_sig, to_rounded_json};
use qtradeoff::povm::{
    classical_fisher, mse_matrix_from_fisher, outcome_probabilities, probability_derivatives,
    sic_two_copy, single_copy_optimal, tabulated_povm, tabulated_theta, tabulated_weights,
    two_copy_optimal, Povm,
};
use qtradeoff::reproduce::{reproduce as run_reproduce, ReproduceConfig};
use qtradeoff::tradeoff::{surface_scan, weight_grid};
use qtradeoff::{model_point, BlochVector, Error, Estimator, Normalization, Result, WeightSpec};

use crate::{Common, EstimatorArg, Format, PovmArg};

/// Schema version written into every JSON artifact.
const SCHEMA_VERSION: u32 = 1;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn reject_unused(command: &str, flags: &[(&str, bool)]) -> Result<()> {
    match flags.iter().find(|(_, given)| *given) {
        Some((name, _)) => Err(invalid(format!("--{name} is not used by `{command}`"))),
        None => Ok(()),
    }
}

fn theta_or(c: &Common, default: BlochVector) -> Result<BlochVector> {
    let theta = c.theta.map(|t| BlochVector::from(t.0)).unwrap_or(default);
    theta.check_physical()?;
    Ok(theta)
}

fn weight_list(c: &Common) -> Result<Vec<WeightSpec>> {
    match (c.weights, c.grid) {
        (Some(w), _) => Ok(vec![WeightSpec::try_from(w.0)?]),
        (None, Some(n)) => Ok(weight_grid(n)?.into_iter().map(|g| g.weights).collect()),
        (None, None) => Ok(vec![WeightSpec::equal()]),
    }
}

fn normalizations(c: &Common) -> Vec<Normalization> {
    match c.normalization {
        Some(n) => vec![n.into()],
        None => vec![Normalization::PerMeasurement, Normalization::PerQubit],
    }
}

fn artifact(kind: &str, body: Value) -> Value {
    let mut v = json!({ "kind": kind, "schema_version": SCHEMA_VERSION });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    v
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header)?;
    for r in rows {
        wtr.write_record(r)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))
}

fn emit(
    c: &Common,
    json_value: impl FnOnce() -> Result<Value>,
    csv: impl FnOnce() -> Result<String>,
) -> Result<()> {
    let text = match c.format.unwrap_or_default() {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json_value()?)?;
            s.push('\n');
            s
        }
        Format::Csv => csv()?,
    };
    match &c.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn bounds(c: &Common) -> Result<()> {
    reject_unused(
        "bounds",
        &[
            ("shots", c.shots.is_some()),
            ("repeats", c.repeats.is_some()),
            ("seed", c.seed.is_some()),
            ("estimator", c.estimator.is_some()),
            ("povm", c.povm.is_some()),
        ],
    )?;
    let theta = theta_or(c, BlochVector::ORIGIN)?;
    let copies = usize::from(c.copies.unwrap_or(1));
    let m = model_point(theta, copies)?;
    let mut records = Vec::new();
    for w in weight_list(c)? {
        let q = qcrb(&m, &w, Normalization::PerMeasurement)?;
        let mut bounds = vec![(q, None)];
        if theta.is_origin() {
            bounds.push((
                holevo_origin(&w, copies, Normalization::PerMeasurement)?,
                None,
            ));
            bounds.push((
                nhcrb_analytic_origin(&w, copies, Normalization::PerMeasurement)?,
                None,
            ));
        }
        let sdp = nhcrb_sdp(&m, &w, Normalization::PerMeasurement)?;
        bounds.push((sdp.bound, Some((sdp.relative_gap, sdp.iterations))));
        for n in normalizations(c) {
            for (b, extra) in &bounds {
                let mut r = BoundRecord::new(theta, w, b.convert(n));
                if let Some((gap, it)) = extra {
                    r.gap = Some(*gap);
                    r.iterations = Some(*it);
                }
                records.push(r);
            }
        }
    }
    emit(
        c,
        || {
            Ok(artifact(
                "bounds",
                json!({ "records": to_rounded_json(&records)? }),
            ))
        },
        || {
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    let mut row: Vec<String> =
                        r.theta.as_array().iter().map(|&x| format_sig(x)).collect();
                    row.extend(r.weights.as_array().iter().map(|&x| format_sig(x)));
                    row.push(r.copies.to_string());
                    row.push(r.method.to_string());
                    row.push(r.normalization.to_string());
                    row.push(format_sig(r.value));
                    row.push(r.gap.map(format_sig).unwrap_or_default());
                    row.push(r.iterations.map(|i| i.to_string()).unwrap_or_default());
                    row
                })
                .collect();
            csv_text(&BOUNDS_CSV_HEADER, &rows)
        },
    )
}

/// Column order of `bounds --format csv`.
pub const BOUNDS_CSV_HEADER: [&str; 12] = [
    "theta_x",
    "theta_y",
    "theta_z",
    "wx",
    "wy",
    "wz",
    "copies",
    "method",
    "normalization",
    "value",
    "gap",
    "iterations",
];

fn build_povm(choice: PovmArg, copies: Option<u8>, w: &WeightSpec) -> Result<(Povm, usize)> {
    let need = |want: usize| -> Result<usize> {
        match copies.map(usize::from) {
            Some(c) if c != want => Err(invalid(format!(
                "this measurement acts on {want} copies, not {c}"
            ))),
            _ => Ok(want),
        }
    };
    Ok(match choice {
        PovmArg::Opt1 => (single_copy_optimal(w)?, need(1)?),
        PovmArg::Opt2 => (two_copy_optimal(w)?, need(2)?),
        PovmArg::Sic => (sic_two_copy(), need(2)?),
        PovmArg::Supp6 => {
            let copies = usize::from(copies.unwrap_or(1));
            (tabulated_povm(copies)?, copies)
        }
    })
}

fn default_povm(copies: Option<u8>) -> PovmArg {
    if copies == Some(1) {
        PovmArg::Opt1
    } else {
        PovmArg::Opt2
    }
}

pub fn povm(c: &Common) -> Result<()> {
    reject_unused(
        "povm",
        &[
            ("grid", c.grid.is_some()),
            ("shots", c.shots.is_some()),
            ("repeats", c.repeats.is_some()),
            ("seed", c.seed.is_some()),
            ("estimator", c.estimator.is_some()),
        ],
    )?;
    let choice = c.povm.unwrap_or_else(|| default_povm(c.copies));
    let w = if choice == PovmArg::Supp6 {
        if c.weights.is_some() {
            return Err(invalid(
                "the tabulated measurement has fixed weights diag(1,4,9)/14",
            ));
        }
        tabulated_weights()
    } else {
        weight_list(c)?[0]
    };
    let default_theta = if choice == PovmArg::Supp6 {
        tabulated_theta()
    } else {
        BlochVector::ORIGIN
    };
    let theta = theta_or(c, default_theta)?;
    let (p, copies) = build_povm(choice, c.copies, &w)?;
    let norm: Normalization = c
        .normalization
        .map(Into::into)
        .unwrap_or(Normalization::PerQubit);
    let m = model_point(theta, copies)?;
    let probs = outcome_probabilities(&m, &p)?;
    let derivs = probability_derivatives(&m, &p)?;
    let fisher = classical_fisher(&m, &p)?;
    let mse = mse_matrix_from_fisher(&fisher, norm)?;

    emit(
        c,
        || {
            Ok(artifact(
                "povm",
                to_rounded_json(&json!({
                    "label": p.label(),
                    "copies": copies,
                    "dim": p.dim(),
                    "elements": p.to_document().elements,
                    "completeness_defect": p.completeness_defect(),
                    "theta": theta,
                    "weights": w,
                    "probabilities": probs,
                    "fisher": fisher.entries,
                    "normalization": norm,
                    "mse_matrix": mse,
                    "weighted_trace": w.weighted_trace(&mse),
                }))?,
            ))
        },
        || {
            let rows: Vec<Vec<String>> = (0..p.len())
                .map(|j| {
                    vec![
                        j.to_string(),
                        format_sig(probs[j]),
                        format_sig(derivs[0][j]),
                        format_sig(derivs[1][j]),
                        format_sig(derivs[2][j]),
                    ]
                })
                .collect();
            csv_text(&["outcome", "probability", "dp_x", "dp_y", "dp_z"], &rows)
        },
    )
}

pub fn surface(c: &Common) -> Result<()> {
    reject_unused(
        "surface",
        &[
            ("weights", c.weights.is_some()),
            ("shots", c.shots.is_some()),
            ("repeats", c.repeats.is_some()),
            ("seed", c.seed.is_some()),
            ("estimator", c.estimator.is_some()),
            ("povm", c.povm.is_some()),
        ],
    )?;
    if c.normalization
        .is_some_and(|n| Normalization::from(n) != Normalization::PerQubit)
    {
        return Err(invalid("trade-off surfaces are per-qubit only"));
    }
    let theta = theta_or(c, BlochVector::ORIGIN)?;
    let copies = usize::from(c.copies.unwrap_or(1));
    let grid: Vec<WeightSpec> = weight_grid(c.grid.unwrap_or(3))?
        .into_iter()
        .map(|g| g.weights)
        .collect();
    let scan = surface_scan(theta, copies, &grid)?;
    emit(
        c,
        || Ok(artifact("surface", to_rounded_json(&scan)?)),
        || {
            let mut buf = Vec::new();
            scan.write_csv(&mut buf)?;
            String::from_utf8(buf).map_err(|e| invalid(e.to_string()))
        },
    )
}

pub fn simulate(c: &Common) -> Result<()> {
    let theta = theta_or(c, BlochVector::ORIGIN)?;
    let choice = c.povm.unwrap_or_else(|| default_povm(c.copies));
    let estimator = match c.estimator {
        Some(EstimatorArg::Linear) => Estimator::Linear,
        Some(EstimatorArg::Mle) => Estimator::Mle,
        None if theta.is_origin() => Estimator::Linear,
        None => Estimator::Mle,
    };
    let norm: Normalization = c
        .normalization
        .map(Into::into)
        .unwrap_or(Normalization::PerQubit);
    let seed = c.seed.unwrap_or(42);
    let weights = if choice == PovmArg::Supp6 && c.weights.is_none() && c.grid.is_none() {
        vec![tabulated_weights()]
    } else {
        weight_list(c)?
    };
    let mut reports = Vec::with_capacity(weights.len());
    for (k, w) in weights.iter().enumerate() {
        let (p, copies) = build_povm(choice, c.copies, w)?;
        let plan = ShotPlan::new(
            theta,
            copies,
            p,
            c.shots.unwrap_or(309),
            c.repeats.unwrap_or(1000),
            derive_seed(seed, &[k as u64]),
        );
        reports.push(run_experiment(&plan, w, estimator)?.convert(norm));
    }
    emit(
        c,
        || {
            Ok(artifact(
                "simulate",
                json!({ "reports": to_rounded_json(&reports)? }),
            ))
        },
        || {
            let mut buf = Vec::new();
            ExperimentReport::write_csv(&reports, &mut buf)?;
            String::from_utf8(buf).map_err(|e| invalid(e.to_string()))
        },
    )
}

pub fn reproduce(c: &Common) -> Result<()> {
    reject_unused(
        "reproduce",
        &[
            ("theta", c.theta.is_some()),
            ("copies", c.copies.is_some()),
            ("weights", c.weights.is_some()),
            ("estimator", c.estimator.is_some()),
            ("povm", c.povm.is_some()),
            ("normalization", c.normalization.is_some()),
            ("format", c.format.is_some()),
        ],
    )?;
    let defaults = ReproduceConfig::default();
    let config = ReproduceConfig {
        seed: c.seed.unwrap_or(defaults.seed),
        shots: c.shots.unwrap_or(defaults.shots),
        repeats: c.repeats.unwrap_or(defaults.repeats),
        grid: c.grid.unwrap_or(defaults.grid),
        ..defaults
    };
    let result = run_reproduce(&config)?;
    let dir = c
        .out
        .clone()
        .unwrap_or_else(|| Path::new("reproduce-out").to_path_buf());
    for path in result.write_dir(&dir)? {
        println!("{}", path.display());
    }
    Ok(())
}
