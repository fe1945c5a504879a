//! Dataset generators for each figure, and the run driver that writes them.

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use irtr_core::measurement::sample_stream;
use irtr_core::{
    build_state_model, direct_imaging_fim, fim, gaussian_incompatibility,
    gaussian_overlap_integrals, incompatibility, irtr_frontier, irtr_residual, overlap_integrals,
    projective_model, qfim, regret_report, spade_model, Error, OverlapIntegrals64,
    PointSpreadFunction64, ProjectiveMeasurement4, QuadratureSpec, RegretReport64,
    SourceGeometry64, StateModel64, TradeoffPoint,
};
use nalgebra::Matrix2;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{ExperimentConfig, FigureId, MeasurementKind};
use crate::error::{LabError, LabResult};
use crate::output::{write_table, Cell, RunManifest, Table};

/// Emitted regret pairs must satisfy the IRTR to this slack.
pub const IRTR_TOLERANCE: f64 = 1e-9;
/// At or below this c̃ the IRTR is vacuous and no frontier is written.
pub const NO_CONSTRAINT_THRESHOLD: f64 = 1e-10;
/// Residual under which a random measurement counts as nearly attaining the IRTR.
pub const NEAR_FRONTIER: f64 = 0.1;
pub const THREADS_ENV: &str = "IRTR_LAB_THREADS";

/// Tables plus summary numbers recorded in the manifest.
#[derive(Debug, Clone, Default)]
pub struct FigureOutput {
    pub tables: Vec<Table>,
    pub statistics: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone)]
pub struct RegretRow {
    pub c_tilde: f64,
    pub report: RegretReport64,
    pub residual: f64,
}

/// Separation-only quantities shared by every row at one θ₂.
#[derive(Debug, Clone)]
struct Separation {
    overlaps: OverlapIntegrals64,
    c_tilde: f64,
}

impl Separation {
    fn new(psf: &PointSpreadFunction64, theta2: f64, quad: &QuadratureSpec) -> Result<Self, Error> {
        let overlaps = if psf.is_gaussian() {
            gaussian_overlap_integrals(psf.sigma(), theta2)?
        } else {
            overlap_integrals(psf, &SourceGeometry64::new(0.0, theta2)?, quad)?
        };
        let c_tilde = incompatibility(&overlaps)?.c_tilde;
        Ok(Self { overlaps, c_tilde })
    }

    fn assess(&self, f: &Matrix2<f64>) -> Result<RegretRow, Error> {
        let report = regret_report(f, &qfim(&self.overlaps))?;
        let residual = irtr_residual(
            &TradeoffPoint::new(report.delta1, report.delta2)?,
            self.c_tilde,
        );
        if residual < -IRTR_TOLERANCE {
            return Err(Error::BoundViolation {
                what: "IRTR residual",
                value: residual,
            });
        }
        Ok(RegretRow {
            c_tilde: self.c_tilde,
            report,
            residual,
        })
    }

    fn state(&self) -> Result<StateModel64, Error> {
        build_state_model(&self.overlaps)
    }
}

fn gaussian(cfg: &ExperimentConfig) -> Result<PointSpreadFunction64, Error> {
    PointSpreadFunction64::gaussian(cfg.sigma)
}

fn frontier_table(name: String, c_tilde: f64, theta2: f64, samples: usize) -> Result<Table, Error> {
    let no_constraint = c_tilde <= NO_CONSTRAINT_THRESHOLD;
    let mut t = Table::new(name, vec!["delta1", "delta2"])
        .meta("theta2_over_sigma", theta2)
        .meta("c_tilde", Cell::Float(c_tilde).render())
        .meta("no_constraint", no_constraint);
    if !no_constraint {
        for p in irtr_frontier(c_tilde, samples)? {
            t.push(vec![p.delta1.into(), p.delta2.into()]);
        }
    }
    Ok(t)
}

fn residual_range(rows: &[RegretRow]) -> serde_json::Value {
    let min = rows
        .iter()
        .map(|r| r.residual)
        .fold(f64::INFINITY, f64::min);
    let max = rows
        .iter()
        .map(|r| r.residual)
        .fold(f64::NEG_INFINITY, f64::max);
    json!({ "min": min, "max": max })
}

/// c̃ from the closed form and from quadrature over θ₂.
pub fn fig1(cfg: &ExperimentConfig) -> LabResult<FigureOutput> {
    let psf = gaussian(cfg)?;
    let quad = cfg.quadrature();
    let sigma = cfg.sigma;
    let rows: Vec<(f64, f64)> = cfg
        .theta2_grid
        .par_iter()
        .map(|&t| {
            let closed = gaussian_incompatibility(sigma, t * sigma)?;
            let o = overlap_integrals(&psf, &SourceGeometry64::new(0.0, t * sigma)?, &quad)?;
            Ok((closed, incompatibility(&o)?.c_tilde))
        })
        .collect::<Result<_, Error>>()?;
    let mut table = Table::new(
        "fig1.csv",
        vec![
            "theta2_over_sigma",
            "c_tilde_closed_form",
            "c_tilde_quadrature",
        ],
    )
    .meta("figure", "fig1")
    .meta("sigma", Cell::Float(sigma).render());
    let mut worst = 0.0f64;
    for (&t, &(closed, numeric)) in cfg.theta2_grid.iter().zip(&rows) {
        worst = worst.max((closed - numeric).abs());
        table.push(vec![t.into(), closed.into(), numeric.into()]);
    }
    let mut out = FigureOutput {
        tables: vec![table],
        ..Default::default()
    };
    out.statistics
        .insert("max_abs_closed_minus_quadrature".into(), json!(worst));
    Ok(out)
}

/// Direct-imaging regrets at θ₁ = 0 over θ₂.
pub fn fig2_rows(cfg: &ExperimentConfig) -> LabResult<Vec<RegretRow>> {
    let psf = gaussian(cfg)?;
    let quad = cfg.quadrature();
    let sigma = cfg.sigma;
    Ok(cfg
        .theta2_grid
        .par_iter()
        .map(|&t| {
            let sep = Separation::new(&psf, t * sigma, &quad)?;
            let f = direct_imaging_fim(&psf, &SourceGeometry64::new(0.0, t * sigma)?, &quad)?;
            sep.assess(&f)
        })
        .collect::<Result<_, Error>>()?)
}

pub fn fig2(cfg: &ExperimentConfig) -> LabResult<FigureOutput> {
    let rows = fig2_rows(cfg)?;
    let mut table = Table::new("fig2.csv", vec!["theta2_over_sigma", "delta1", "delta2"])
        .meta("figure", "fig2")
        .meta("measurement", "direct")
        .meta("theta1_over_sigma", 0.0)
        .meta("sigma", Cell::Float(cfg.sigma).render());
    for (&t, r) in cfg.theta2_grid.iter().zip(&rows) {
        table.push(vec![
            t.into(),
            r.report.delta1.into(),
            r.report.delta2.into(),
        ]);
    }
    let mut out = FigureOutput {
        tables: vec![table],
        ..Default::default()
    };
    out.statistics
        .insert("irtr_residual".into(), residual_range(&rows));
    Ok(out)
}

/// Per panel: direct-imaging point, c̃, and the IRTR frontier.
pub fn fig3(cfg: &ExperimentConfig) -> LabResult<FigureOutput> {
    let rows = fig2_rows(cfg)?;
    let mut points = Table::new(
        "fig3_points.csv",
        vec![
            "panel",
            "theta2_over_sigma",
            "c_tilde",
            "delta1",
            "delta2",
            "irtr_residual",
            "no_constraint",
        ],
    )
    .meta("figure", "fig3")
    .meta("measurement", "direct")
    .meta("theta1_over_sigma", 0.0)
    .meta("sigma", Cell::Float(cfg.sigma).render());
    let mut out = FigureOutput::default();
    for (k, (&t, r)) in cfg.theta2_grid.iter().zip(&rows).enumerate() {
        let panel = k + 1;
        let no_constraint = r.c_tilde <= NO_CONSTRAINT_THRESHOLD;
        points.push(vec![
            panel.into(),
            t.into(),
            r.c_tilde.into(),
            r.report.delta1.into(),
            r.report.delta2.into(),
            r.residual.into(),
            if no_constraint { "true" } else { "false" }.into(),
        ]);
        let name = format!("fig3_panel{panel}_frontier.csv");
        out.tables
            .push(frontier_table(name, r.c_tilde, t, cfg.frontier_samples)?);
    }
    out.tables.insert(0, points);
    out.statistics
        .insert("irtr_residual".into(), residual_range(&rows));
    Ok(out)
}

/// SPADE regrets at the configured θ₂ over θ₁.
pub fn fig4_rows(cfg: &ExperimentConfig) -> LabResult<Vec<RegretRow>> {
    let psf = gaussian(cfg)?;
    let sigma = cfg.sigma;
    let theta2 = cfg.theta2_grid[0] * sigma;
    let sep = Separation::new(&psf, theta2, &cfg.quadrature())?;
    let cutoff = cfg.mode_cutoff.mode_cutoff();
    Ok(cfg
        .theta1_grid
        .par_iter()
        .map(|&t1| {
            let model = spade_model(sigma, &SourceGeometry64::new(t1 * sigma, theta2)?, cutoff)?;
            sep.assess(&fim(&model)?)
        })
        .collect::<Result<_, Error>>()?)
}

pub fn fig4(cfg: &ExperimentConfig) -> LabResult<FigureOutput> {
    let rows = fig4_rows(cfg)?;
    let theta2 = cfg.theta2_grid[0];
    let mut table = Table::new("fig4.csv", vec!["theta1_over_sigma", "delta1", "delta2"])
        .meta("figure", "fig4")
        .meta("measurement", "spade")
        .meta("theta2_over_sigma", theta2)
        .meta("sigma", Cell::Float(cfg.sigma).render());
    for (&t, r) in cfg.theta1_grid.iter().zip(&rows) {
        table.push(vec![
            t.into(),
            r.report.delta1.into(),
            r.report.delta2.into(),
        ]);
    }
    let c_tilde = rows[0].c_tilde;
    let frontier = frontier_table(
        "fig4_frontier.csv".into(),
        c_tilde,
        theta2,
        cfg.frontier_samples,
    )?;
    let mut out = FigureOutput {
        tables: vec![table, frontier],
        ..Default::default()
    };
    out.statistics.insert("c_tilde".into(), json!(c_tilde));
    out.statistics
        .insert("irtr_residual".into(), residual_range(&rows));
    Ok(out)
}

fn haar_rows(
    sep: &Separation,
    state: &StateModel64,
    seed: u64,
    n: usize,
) -> Result<Vec<RegretRow>, Error> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_stream(seed, i);
            let m = ProjectiveMeasurement4::haar(&mut rng, seed);
            sep.assess(&fim(&projective_model(state, &m))?)
        })
        .collect()
}

/// Regrets of `n_random` Haar-random projective measurements on the relevant subspace.
pub fn fig5_rows(cfg: &ExperimentConfig) -> LabResult<Vec<RegretRow>> {
    let psf = gaussian(cfg)?;
    let sep = Separation::new(&psf, cfg.theta2_grid[0] * cfg.sigma, &cfg.quadrature())?;
    let state = sep.state()?;
    Ok(haar_rows(&sep, &state, cfg.seed, cfg.n_random)?)
}

pub fn fig5(cfg: &ExperimentConfig) -> LabResult<FigureOutput> {
    let rows = fig5_rows(cfg)?;
    let theta2 = cfg.theta2_grid[0];
    let mut samples = Table::new(
        "fig5_samples.csv",
        vec!["sample_index", "delta1", "delta2", "irtr_residual"],
    )
    .meta("figure", "fig5")
    .meta("measurement", "haar-random projective")
    .meta("theta1_over_sigma", cfg.theta1_grid[0])
    .meta("theta2_over_sigma", theta2)
    .meta("seed", cfg.seed)
    .meta("n_random", cfg.n_random);
    for (i, r) in rows.iter().enumerate() {
        samples.push(vec![
            i.into(),
            r.report.delta1.into(),
            r.report.delta2.into(),
            r.residual.into(),
        ]);
    }
    let c_tilde = rows[0].c_tilde;
    let frontier = frontier_table(
        "fig5_frontier.csv".into(),
        c_tilde,
        theta2,
        cfg.frontier_samples,
    )?;
    let near = rows.iter().filter(|r| r.residual < NEAR_FRONTIER).count();
    let mut out = FigureOutput {
        tables: vec![samples, frontier],
        ..Default::default()
    };
    out.statistics.insert("c_tilde".into(), json!(c_tilde));
    out.statistics
        .insert("irtr_residual".into(), residual_range(&rows));
    out.statistics.insert(
        "fraction_residual_below_0_1".into(),
        json!(near as f64 / rows.len() as f64),
    );
    Ok(out)
}

/// Sweep over (θ₁, θ₂) for each selected measurement.
pub fn custom(cfg: &ExperimentConfig) -> LabResult<FigureOutput> {
    let psf = match &cfg.psf_file {
        Some(path) => PointSpreadFunction64::from_file(cfg.sigma, path).map_err(|e| match e {
            Error::PsfFile { line, message } => {
                LabError::config(path.display().to_string(), Some(line), message)
            }
            other => LabError::Core(other),
        })?,
        None => gaussian(cfg)?,
    };
    let quad = cfg.quadrature();
    let sigma = cfg.sigma;
    let needs_state = cfg.measurements.contains(&MeasurementKind::Random);
    let separations: Vec<(Separation, Option<StateModel64>)> = cfg
        .theta2_grid
        .par_iter()
        .map(|&t| {
            let sep = Separation::new(&psf, t * sigma, &quad)?;
            let state = if needs_state {
                Some(sep.state()?)
            } else {
                None
            };
            Ok((sep, state))
        })
        .collect::<Result<_, Error>>()?;

    let mut jobs = Vec::new();
    for (j, _) in cfg.theta2_grid.iter().enumerate() {
        for (i, _) in cfg.theta1_grid.iter().enumerate() {
            for &m in &cfg.measurements {
                let draws = if m == MeasurementKind::Random {
                    cfg.n_random
                } else {
                    1
                };
                jobs.extend((0..draws).map(|s| (i, j, m, s)));
            }
        }
    }
    let cutoff = cfg.mode_cutoff.mode_cutoff();
    let rows: Vec<RegretRow> = jobs
        .par_iter()
        .map(|&(i, j, m, s)| {
            let (sep, state) = &separations[j];
            let geometry =
                SourceGeometry64::new(cfg.theta1_grid[i] * sigma, cfg.theta2_grid[j] * sigma)?;
            let f = match m {
                MeasurementKind::Direct => direct_imaging_fim(&psf, &geometry, &quad)?,
                MeasurementKind::Spade => fim(&spade_model(sigma, &geometry, cutoff)?)?,
                MeasurementKind::Random => {
                    let mut rng = sample_stream(cfg.seed, s as u64);
                    let meas = ProjectiveMeasurement4::haar(&mut rng, cfg.seed);
                    fim(&projective_model(
                        state.as_ref().expect("state built for random"),
                        &meas,
                    ))?
                }
            };
            sep.assess(&f)
        })
        .collect::<Result<_, Error>>()?;

    let mut table = Table::new(
        "custom.csv",
        vec![
            "theta1_over_sigma",
            "theta2_over_sigma",
            "measurement",
            "sample_index",
            "c_tilde",
            "f11",
            "f12",
            "f22",
            "qf11",
            "qf22",
            "delta1",
            "delta2",
            "irtr_residual",
            "min_regret_eigenvalue",
        ],
    )
    .meta("figure", "custom")
    .meta(
        "psf",
        if psf.is_gaussian() {
            "gaussian"
        } else {
            "user-defined"
        },
    )
    .meta("sigma", Cell::Float(sigma).render())
    .meta("seed", cfg.seed);
    for (&(i, j, m, s), r) in jobs.iter().zip(&rows) {
        let rep = &r.report;
        table.push(vec![
            cfg.theta1_grid[i].into(),
            cfg.theta2_grid[j].into(),
            m.as_str().into(),
            s.into(),
            r.c_tilde.into(),
            rep.fim[(0, 0)].into(),
            rep.fim[(0, 1)].into(),
            rep.fim[(1, 1)].into(),
            rep.qfim[(0, 0)].into(),
            rep.qfim[(1, 1)].into(),
            rep.delta1.into(),
            rep.delta2.into(),
            r.residual.into(),
            rep.min_regret_eigenvalue.into(),
        ]);
    }
    let mut out = FigureOutput {
        tables: vec![table],
        ..Default::default()
    };
    out.statistics
        .insert("irtr_residual".into(), residual_range(&rows));
    Ok(out)
}

pub fn compute(cfg: &ExperimentConfig) -> LabResult<FigureOutput> {
    match cfg.figure_id {
        FigureId::Fig1 => fig1(cfg),
        FigureId::Fig2 => fig2(cfg),
        FigureId::Fig3 => fig3(cfg),
        FigureId::Fig4 => fig4(cfg),
        FigureId::Fig5 => fig5(cfg),
        FigureId::Custom => custom(cfg),
    }
}

/// Worker count from `IRTR_LAB_THREADS`, else the available parallelism.
pub fn thread_count() -> LabResult<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                LabError::config(
                    THREADS_ENV,
                    None,
                    format!("expected a positive integer, got `{v}`"),
                )
            }),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Computes the configured figure, writes its CSVs and manifest, and returns the manifest.
pub fn run(cfg: &ExperimentConfig) -> LabResult<RunManifest> {
    let threads = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::config(THREADS_ENV, None, e.to_string()))?;
    let start = Instant::now();
    let output = pool.install(|| compute(cfg))?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| LabError::io(&cfg.output_dir, e))?;
    let files = output
        .tables
        .iter()
        .map(|t| write_table(&cfg.output_dir, t))
        .collect::<LabResult<Vec<_>>>()?;
    let manifest = RunManifest {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: cfg.clone(),
        threads,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        files,
        statistics: output.statistics,
    };
    manifest.write(&cfg.output_dir)?;
    Ok(manifest)
}
