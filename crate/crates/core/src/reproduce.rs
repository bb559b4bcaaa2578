//! Desk-scale reproduction of the tomography experiments: the weight-grid
//! scan at the maximally mixed state and the sweep over `theta = (t,t,t)`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    derive_seed, reference_bounds, run_experiment_with_bounds, Estimator, ExperimentReport,
    ShotPlan,
};
use crate::model::{model_point, BlochVector};
use crate::normalization::Normalization;
use crate::output::{format_sig, to_rounded_json_string};
use crate::povm::{classical_fisher, mse_matrix_from_fisher, sic_two_copy, two_copy_optimal};
use crate::tradeoff::{weight_grid, GridPoint};

/// `theta = (t,t,t)` values of the sweep and the mean number of two-copy
/// measurements per estimate at each.
pub const SWEEP_THETAS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
pub const SWEEP_SHOTS: [u64; 5] = [309, 238, 196, 156, 131];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceConfig {
    pub seed: u64,
    pub shots: u64,
    pub repeats: usize,
    pub grid: u32,
    pub sweep_thetas: Vec<f64>,
    pub sweep_shots: Vec<u64>,
    pub include_sic: bool,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            shots: 309,
            repeats: 1000,
            grid: 3,
            sweep_thetas: SWEEP_THETAS.to_vec(),
            sweep_shots: SWEEP_SHOTS.to_vec(),
            include_sic: true,
        }
    }
}

impl ReproduceConfig {
    fn validate(&self) -> Result<()> {
        if self.sweep_thetas.len() != self.sweep_shots.len() {
            return Err(Error::InvalidArgument(format!(
                "{} sweep states but {} shot counts",
                self.sweep_thetas.len(),
                self.sweep_shots.len()
            )));
        }
        if self.shots == 0 || self.repeats == 0 || self.sweep_shots.contains(&0) {
            return Err(Error::InvalidArgument(
                "shots and repeats must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One weight of the maximally mixed scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub u: [u32; 3],
    pub optimal: ExperimentReport,
    pub sic: Option<ExperimentReport>,
}

/// One weight at one state of the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub u: [u32; 3],
    /// Per-qubit `Tr[W F^-1]` of the optimal-at-origin measurement.
    pub theory: f64,
    pub optimal: ExperimentReport,
    pub sic: Option<ExperimentReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceSummary {
    pub config: ReproduceConfig,
    pub grid_points: usize,
    /// Mean over the grid of `(C1 - weighted trace) / stderr` at the origin.
    pub origin_mean_z_c1: f64,
    pub origin_rows_below_c1: usize,
    /// Largest `|weighted trace - C2| / stderr` over the grid at the origin.
    pub origin_max_abs_z_c2: f64,
    pub sweep_mean_z_c1: Vec<f64>,
    /// Smallest `(weighted trace - C2) / stderr` over the grid, per state.
    pub sweep_min_z_c2: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub origin: Vec<GridRow>,
    pub sweep: Vec<SweepRow>,
    pub summary: ReproduceSummary,
}

/// Column order of the origin CSV.
pub const ORIGIN_CSV_HEADER: [&str; 16] = [
    "ux",
    "uy",
    "uz",
    "wx",
    "wy",
    "wz",
    "vx",
    "vy",
    "vz",
    "weighted_trace",
    "stderr",
    "sic_weighted_trace",
    "sic_stderr",
    "c1",
    "c2",
    "z_c1",
];

/// Column order of the sweep CSV.
pub const SWEEP_CSV_HEADER: [&str; 13] = [
    "t",
    "shots",
    "ux",
    "uy",
    "uz",
    "weighted_trace",
    "stderr",
    "sic_weighted_trace",
    "sic_stderr",
    "theory",
    "c1",
    "c2",
    "z_c1",
];

fn with_context(e: Error, what: String) -> Error {
    match e {
        Error::InvalidArgument(msg) => Error::InvalidArgument(format!("{what}: {msg}")),
        other if other.is_solver_failure() => other,
        other => Error::InvalidArgument(format!("{what}: {other}")),
    }
}

pub fn reproduce(config: &ReproduceConfig) -> Result<Reproduction> {
    config.validate()?;
    let grid = weight_grid(config.grid)?;
    let origin = grid
        .iter()
        .enumerate()
        .map(|(k, g)| {
            origin_row(config, k, g).map_err(|e| with_context(e, format!("grid point {:?}", g.u)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sweep = Vec::new();
    for (s, (&t, &shots)) in config
        .sweep_thetas
        .iter()
        .zip(&config.sweep_shots)
        .enumerate()
    {
        let theta = BlochVector::equal(t);
        let bounds = grid
            .par_iter()
            .map(|g| reference_bounds(theta, &g.weights))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| with_context(e, format!("bounds at t = {t}")))?;
        for (k, (g, b)) in grid.iter().zip(bounds).enumerate() {
            let row = sweep_row(config, s, t, shots, k, g, b)
                .map_err(|e| with_context(e, format!("t = {t}, grid point {:?}", g.u)))?;
            sweep.push(row);
        }
    }

    let n = origin.len() as f64;
    let summary = ReproduceSummary {
        config: config.clone(),
        grid_points: grid.len(),
        origin_mean_z_c1: origin
            .iter()
            .map(|r| r.optimal.bounds.z_score_c1)
            .sum::<f64>()
            / n,
        origin_rows_below_c1: origin
            .iter()
            .filter(|r| r.optimal.weighted_trace < r.optimal.bounds.c1)
            .count(),
        origin_max_abs_z_c2: origin
            .iter()
            .map(|r| r.optimal.bounds.z_score_c2.abs())
            .fold(0.0, f64::max),
        sweep_mean_z_c1: config
            .sweep_thetas
            .iter()
            .map(|&t| {
                let rows: Vec<_> = sweep.iter().filter(|r| r.t == t).collect();
                rows.iter()
                    .map(|r| r.optimal.bounds.z_score_c1)
                    .sum::<f64>()
                    / rows.len() as f64
            })
            .collect(),
        sweep_min_z_c2: config
            .sweep_thetas
            .iter()
            .map(|&t| {
                sweep
                    .iter()
                    .filter(|r| r.t == t)
                    .map(|r| r.optimal.bounds.z_score_c2)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect(),
    };
    Ok(Reproduction {
        origin,
        sweep,
        summary,
    })
}

fn origin_row(config: &ReproduceConfig, k: usize, g: &GridPoint) -> Result<GridRow> {
    let bounds = reference_bounds(BlochVector::ORIGIN, &g.weights)?;
    let plan = |povm, tag| {
        ShotPlan::new(
            BlochVector::ORIGIN,
            2,
            povm,
            config.shots,
            config.repeats,
            derive_seed(config.seed, &[0, k as u64, tag]),
        )
    };
    let optimal = run_experiment_with_bounds(
        &plan(two_copy_optimal(&g.weights)?, 0),
        &g.weights,
        Estimator::Linear,
        bounds,
    )?;
    let sic = if config.include_sic {
        Some(run_experiment_with_bounds(
            &plan(sic_two_copy(), 1),
            &g.weights,
            Estimator::Linear,
            bounds,
        )?)
    } else {
        None
    };
    Ok(GridRow {
        u: g.u,
        optimal,
        sic,
    })
}

fn sweep_row(
    config: &ReproduceConfig,
    s: usize,
    t: f64,
    shots: u64,
    k: usize,
    g: &GridPoint,
    bounds: (f64, f64),
) -> Result<SweepRow> {
    let theta = BlochVector::equal(t);
    let povm = two_copy_optimal(&g.weights)?;
    let fisher = classical_fisher(&model_point(theta, 2)?, &povm)?;
    let theory = g
        .weights
        .weighted_trace(&mse_matrix_from_fisher(&fisher, Normalization::PerQubit)?);
    let plan = |povm, tag| {
        ShotPlan::new(
            theta,
            2,
            povm,
            shots,
            config.repeats,
            derive_seed(config.seed, &[1 + s as u64, k as u64, tag]),
        )
    };
    let optimal = run_experiment_with_bounds(&plan(povm, 0), &g.weights, Estimator::Mle, bounds)?;
    let sic = if config.include_sic {
        Some(run_experiment_with_bounds(
            &plan(sic_two_copy(), 1),
            &g.weights,
            Estimator::Mle,
            bounds,
        )?)
    } else {
        None
    };
    Ok(SweepRow {
        t,
        u: g.u,
        theory,
        optimal,
        sic,
    })
}

fn sic_columns(sic: &Option<ExperimentReport>) -> [String; 2] {
    match sic {
        Some(r) => [format_sig(r.weighted_trace), format_sig(r.standard_error)],
        None => [String::new(), String::new()],
    }
}

impl Reproduction {
    pub fn origin_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(ORIGIN_CSV_HEADER)?;
        for row in &self.origin {
            let r = &row.optimal;
            let mut rec: Vec<String> = row.u.iter().map(u32::to_string).collect();
            rec.extend(r.weights.as_array().iter().map(|&x| format_sig(x)));
            rec.extend(r.mse.as_array().iter().map(|&x| format_sig(x)));
            rec.push(format_sig(r.weighted_trace));
            rec.push(format_sig(r.standard_error));
            rec.extend(sic_columns(&row.sic));
            rec.push(format_sig(r.bounds.c1));
            rec.push(format_sig(r.bounds.c2));
            rec.push(format_sig(r.bounds.z_score_c1));
            wtr.write_record(&rec)?;
        }
        finish(wtr)
    }

    pub fn sweep_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(SWEEP_CSV_HEADER)?;
        for row in &self.sweep {
            let r = &row.optimal;
            let mut rec = vec![format_sig(row.t), r.shots_per_repeat.to_string()];
            rec.extend(row.u.iter().map(u32::to_string));
            rec.push(format_sig(r.weighted_trace));
            rec.push(format_sig(r.standard_error));
            rec.extend(sic_columns(&row.sic));
            rec.push(format_sig(row.theory));
            rec.push(format_sig(r.bounds.c1));
            rec.push(format_sig(r.bounds.c2));
            rec.push(format_sig(r.bounds.z_score_c1));
            wtr.write_record(&rec)?;
        }
        finish(wtr)
    }

    /// Writes `origin.csv`, `sweep.csv` and `summary.json` into `dir`; files
    /// are rendered completely before any is written.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let files = [
            ("origin.csv", self.origin_csv()?),
            ("sweep.csv", self.sweep_csv()?),
            ("summary.json", to_rounded_json_string(&self.summary)?),
        ];
        fs::create_dir_all(dir)?;
        files
            .into_iter()
            .map(|(name, text)| {
                let path = dir.join(name);
                fs::write(&path, text)?;
                Ok(path)
            })
            .collect()
    }
}

fn finish(wtr: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ReproduceConfig {
        ReproduceConfig {
            repeats: 40,
            grid: 2,
            sweep_thetas: vec![0.2],
            sweep_shots: vec![238],
            ..ReproduceConfig::default()
        }
    }

    #[test]
    fn default_pairs_states_with_shots() {
        let c = ReproduceConfig::default();
        assert_eq!(c.sweep_thetas.len(), c.sweep_shots.len());
        assert_eq!(c.sweep_shots[0], 309);
        assert_eq!(c.sweep_thetas[4], 0.5);
    }

    #[test]
    fn mismatched_sweep_lists_rejected() {
        let c = ReproduceConfig {
            sweep_shots: vec![309, 238],
            ..small()
        };
        assert!(matches!(reproduce(&c), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn small_run_shapes_and_determinism() {
        let a = reproduce(&small()).unwrap();
        assert_eq!(a.origin.len(), 7);
        assert_eq!(a.sweep.len(), 7);
        let csv = a.origin_csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), ORIGIN_CSV_HEADER.join(","));
        assert_eq!(csv.lines().count(), 8);
        let sweep = a.sweep_csv().unwrap();
        assert_eq!(sweep.lines().next().unwrap(), SWEEP_CSV_HEADER.join(","));
        let b = reproduce(&small()).unwrap();
        assert_eq!(csv, b.origin_csv().unwrap());
        assert_eq!(sweep, b.sweep_csv().unwrap());
        assert_eq!(
            to_rounded_json_string(&a.summary).unwrap(),
            to_rounded_json_string(&b.summary).unwrap()
        );
    }

    #[test]
    fn seeds_differ_per_experiment() {
        assert_ne!(derive_seed(42, &[0, 1, 0]), derive_seed(42, &[0, 1, 1]));
        assert_ne!(derive_seed(42, &[0, 1, 0]), derive_seed(42, &[1, 1, 0]));
        assert_eq!(derive_seed(42, &[3, 4]), derive_seed(42, &[3, 4]));
    }
}
