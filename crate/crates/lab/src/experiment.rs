//! Continuum-limit experiment: lattice runs along an h-ladder compared with a
//! fine-grid continuum reference at sampled times.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{ensure, Context};
use latnls_core::dynamics::{evolve_continuum, evolve_discrete, EvolutionConfig, Trajectory};
use latnls_core::interp::{continuum_norm, p_linear, ContinuumFunction, ContinuumNorm};
use latnls_core::lattice::{LatticeField, PeriodicLattice, Sign};
use latnls_core::verify::{fitted_slope, median, strictly_decreasing, UNIFORM_SPREAD};
use rayon::prelude::*;

use crate::config::{sites_for, ExperimentConfig};
use crate::formats::{write_trajectory, ConservedSeries, CSV_SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub h: f64,
    pub n: usize,
    pub t: f64,
    pub l2_error: f64,
    /// `|<w_i, p_h u_h(t) - u(t)>|`, one per test function.
    pub weak_pairing_errors: Vec<f64>,
    pub h_alpha_norm: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderSummary {
    pub h_ladder: Vec<f64>,
    pub alpha: f64,
    pub c: f64,
    /// `||p_h v_h - v||_2` at `t = 0`.
    pub initial_l2: Vec<f64>,
    pub final_l2: Vec<f64>,
    /// Per test function, final-time pairing errors along the ladder.
    pub final_pairings: Vec<Vec<f64>>,
    /// `sup_t ||p_h u_h(t)||_{H^alpha}` per mesh.
    pub sup_h_alpha: Vec<f64>,
    pub l2_slope: f64,
    pub pairing_slopes: Vec<f64>,
    pub l2_monotone: bool,
    pub pairings_monotone: Vec<bool>,
    pub sup_bounded: bool,
    /// Error columns (per sampled time) that fail to decrease strictly.
    pub nonmonotone: Vec<String>,
}

impl LadderSummary {
    /// Final over coarsest-mesh `L^2` error at `t_final`.
    pub fn l2_reduction(&self) -> f64 {
        self.final_l2.last().unwrap_or(&f64::NAN) / self.final_l2.first().unwrap_or(&f64::NAN)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "alpha = {}, c = {}", self.alpha, self.c);
        let _ = writeln!(s, "h ladder: {:?}", self.h_ladder);
        let _ = writeln!(s, "t=0 interpolation error: {:?}", self.initial_l2);
        let _ = writeln!(s, "final l2 error: {:?}", self.final_l2);
        let _ = writeln!(
            s,
            "l2 slope {:.3}, final/initial {:.4}, decreasing: {}",
            self.l2_slope,
            self.l2_reduction(),
            self.l2_monotone
        );
        for (i, p) in self.final_pairings.iter().enumerate() {
            let _ = writeln!(
                s,
                "pairing {}: {:?} slope {:.3} decreasing: {}",
                i + 1,
                p,
                self.pairing_slopes[i],
                self.pairings_monotone[i]
            );
        }
        let _ = writeln!(s, "sup_t H^alpha norm: {:?} bounded: {}", self.sup_h_alpha, self.sup_bounded);
        if self.nonmonotone.is_empty() {
            let _ = writeln!(s, "all error columns decrease along the ladder");
        } else {
            let _ = writeln!(s, "non-monotone columns: {}", self.nonmonotone.join(", "));
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct ContinuumLimitReport {
    pub rows: Vec<ReportRow>,
    pub summary: LadderSummary,
    /// Conserved quantities and `H^alpha` norm of the reference run.
    pub reference: ConservedSeries,
    /// The same per ladder mesh, in ladder order.
    pub lattice: Vec<ConservedSeries>,
}

struct Prepared {
    kernel: latnls_core::Kernel,
    alpha: f64,
    c: f64,
    fine: PeriodicLattice,
    datum: crate::datum::Datum,
    v_ref: ContinuumFunction,
    tests: Vec<ContinuumFunction>,
    sign: Sign,
}

fn prepare(config: &ExperimentConfig, base_dir: &Path) -> anyhow::Result<Prepared> {
    config.validate()?;
    let kernel = config.kernel.build()?;
    let scaling = kernel.scaling()?;
    let c = kernel.limit_constant()?;
    let h_ref = config.h_min() / config.reference.refinement as f64;
    let n_ref = sites_for(config.lattice.box_length, h_ref)
        .with_context(|| format!("reference mesh {h_ref} does not fit the box"))?;
    let fine = PeriodicLattice::new(h_ref, n_ref)?;
    let datum = config.datum.resolve(base_dir)?;
    let v_ref = datum.on_grid(fine)?;
    v_ref.check_contained().context("datum must sit well inside the box")?;
    let tests = config
        .test_functions
        .iter()
        .map(|w| w.resolve(base_dir).and_then(|d| Ok(d.on_grid(fine)?)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(Prepared { kernel, alpha: scaling.alpha, c, fine, datum, v_ref, tests, sign: config.evolution.sign.into() })
}

fn reference_run(config: &ExperimentConfig, p: &Prepared) -> anyhow::Result<Trajectory<ContinuumFunction>> {
    let div = config.reference.dt_divisor;
    let steps = config.steps() * div;
    let dt = config.evolution.t_final / steps as f64;
    let every = steps / (config.evolution.samples - 1);
    let cfg = EvolutionConfig::new(dt, config.evolution.t_final, p.sign)?
        .with_scheme(config.evolution.scheme.into())
        .with_record_every(every)
        .with_states()
        .with_norms(&[p.alpha]);
    evolve_continuum(&p.v_ref, p.alpha, p.c, &cfg).context("continuum reference run")
}

fn lattice_run(
    config: &ExperimentConfig,
    p: &Prepared,
    h: f64,
) -> anyhow::Result<(PeriodicLattice, Trajectory<LatticeField>)> {
    let n = sites_for(config.lattice.box_length, h).with_context(|| format!("h = {h} does not fit the box"))?;
    let lattice = PeriodicLattice::new(h, n)?;
    let v_h = p.datum.discretize(lattice, &p.v_ref)?;
    let steps = config.steps();
    let cfg = EvolutionConfig::new(config.evolution.t_final / steps as f64, config.evolution.t_final, p.sign)?
        .with_scheme(config.evolution.scheme.into())
        .with_record_every(steps / (config.evolution.samples - 1))
        .with_states()
        .with_norms(&[p.alpha]);
    let traj = evolve_discrete(&v_h, &p.kernel, &cfg).with_context(|| format!("lattice run at h = {h}"))?;
    Ok((lattice, traj))
}

fn pointwise_drift(series: &[f64], i: usize) -> f64 {
    let first = series[0];
    let scale = if first != 0.0 { first.abs() } else { 1.0 };
    (series[i] - first).abs() / scale
}

fn rows_for(
    p: &Prepared,
    lattice: PeriodicLattice,
    traj: &Trajectory<LatticeField>,
    reference: &Trajectory<ContinuumFunction>,
) -> anyhow::Result<Vec<ReportRow>> {
    ensure!(
        traj.times.len() == reference.times.len(),
        "sample count mismatch: lattice {} vs reference {}",
        traj.times.len(),
        reference.times.len()
    );
    let mut rows = Vec::with_capacity(traj.times.len());
    for (i, (state, u)) in traj.states.iter().zip(&reference.states).enumerate() {
        let t = traj.times[i];
        ensure!((t - reference.times[i]).abs() <= 1e-12 * (1.0 + t), "sample times disagree at {t}");
        let pu = p_linear(state, p.fine)?;
        let diff = pu.sub(u)?;
        rows.push(ReportRow {
            h: lattice.h(),
            n: lattice.n_sites(),
            t,
            l2_error: diff.mass().sqrt(),
            weak_pairing_errors: p
                .tests
                .iter()
                .map(|w| Ok(w.inner(&diff)?.norm()))
                .collect::<latnls_core::Result<Vec<_>>>()?,
            h_alpha_norm: continuum_norm(&pu, ContinuumNorm::HSigma(p.alpha))?,
            mass_drift: pointwise_drift(&traj.mass_series, i),
            energy_drift: pointwise_drift(&traj.energy_series, i),
        });
    }
    Ok(rows)
}

fn summarize(config: &ExperimentConfig, p: &Prepared, per_h: &[Vec<ReportRow>]) -> LadderSummary {
    let ladder = config.lattice.h_ladder.clone();
    let n_tests = p.tests.len();
    let column = |i: usize, f: &dyn Fn(&ReportRow) -> f64| per_h.iter().map(|rows| f(&rows[i])).collect::<Vec<_>>();
    let last = per_h[0].len() - 1;
    let initial_l2 = column(0, &|r| r.l2_error);
    let final_l2 = column(last, &|r| r.l2_error);
    let final_pairings: Vec<Vec<f64>> =
        (0..n_tests).map(|j| column(last, &|r| r.weak_pairing_errors[j])).collect();
    let sup_h_alpha: Vec<f64> =
        per_h.iter().map(|rows| rows.iter().map(|r| r.h_alpha_norm).fold(0.0, f64::max)).collect();
    let mut nonmonotone = Vec::new();
    if ladder.len() > 1 {
        for (i, row) in per_h[0].iter().enumerate() {
            let t = row.t;
            if !strictly_decreasing(&column(i, &|r| r.l2_error)) {
                nonmonotone.push(format!("l2_error@t={t}"));
            }
            for j in 0..n_tests {
                if !strictly_decreasing(&column(i, &|r| r.weak_pairing_errors[j])) {
                    nonmonotone.push(format!("weak_pairing_error_{}@t={t}", j + 1));
                }
            }
        }
    }
    let max_sup = sup_h_alpha.iter().copied().fold(0.0, f64::max);
    LadderSummary {
        alpha: p.alpha,
        c: p.c,
        l2_slope: fitted_slope(&ladder, &final_l2),
        pairing_slopes: final_pairings.iter().map(|col| fitted_slope(&ladder, col)).collect(),
        l2_monotone: strictly_decreasing(&final_l2),
        pairings_monotone: final_pairings.iter().map(|col| strictly_decreasing(col)).collect(),
        sup_bounded: sup_h_alpha.iter().all(|v| v.is_finite()) && max_sup <= UNIFORM_SPREAD * median(&sup_h_alpha),
        h_ladder: ladder,
        initial_l2,
        final_l2,
        final_pairings,
        sup_h_alpha,
        nonmonotone,
    }
}

/// Runs the reference and all ladder members concurrently.
pub fn run_continuum_limit(config: &ExperimentConfig, base_dir: &Path) -> anyhow::Result<ContinuumLimitReport> {
    let p = prepare(config, base_dir)?;
    let (reference, runs) = rayon::join(
        || reference_run(config, &p),
        || {
            config
                .lattice
                .h_ladder
                .par_iter()
                .map(|&h| lattice_run(config, &p, h))
                .collect::<anyhow::Result<Vec<_>>>()
        },
    );
    let reference = reference?;
    let runs = runs?;
    let per_h = runs
        .par_iter()
        .map(|(lattice, traj)| rows_for(&p, *lattice, traj, &reference))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let summary = summarize(config, &p, &per_h);
    Ok(ContinuumLimitReport {
        rows: per_h.into_iter().flatten().collect(),
        summary,
        reference: ConservedSeries::from_trajectory(&reference),
        lattice: runs.iter().map(|(_, traj)| ConservedSeries::from_trajectory(traj)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSensitivity {
    /// Largest relative change of any `l2_error` entry.
    pub max_relative_change: f64,
    pub converged: bool,
}

/// Reruns with the reference grid refined twice as much and compares the
/// `l2_error` column; the reference counts as converged below 1% change.
pub fn reference_sensitivity(
    config: &ExperimentConfig,
    base_dir: &Path,
    baseline: &ContinuumLimitReport,
) -> anyhow::Result<ReferenceSensitivity> {
    let mut finer = config.clone();
    finer.reference.refinement *= 2;
    let other = run_continuum_limit(&finer, base_dir)?;
    let max_relative_change = baseline
        .rows
        .iter()
        .zip(&other.rows)
        .filter(|(a, _)| a.l2_error > 0.0)
        .map(|(a, b)| (a.l2_error - b.l2_error).abs() / a.l2_error)
        .fold(0.0, f64::max);
    Ok(ReferenceSensitivity { max_relative_change, converged: max_relative_change < 0.01 })
}

pub fn report_header(n_tests: usize) -> Vec<String> {
    let mut h: Vec<String> = ["h", "N", "t", "l2_error"].iter().map(|s| s.to_string()).collect();
    h.extend((1..=n_tests).map(|i| format!("weak_pairing_error_{i}")));
    h.extend(["h_alpha_norm", "mass_drift", "energy_drift"].iter().map(|s| s.to_string()));
    h
}

/// Writes one CSV row per `(h, t)` sample.
pub fn emit_report(rows: &[ReportRow], path: &Path) -> anyhow::Result<()> {
    let n_tests = rows.first().map_or(0, |r| r.weak_pairing_errors.len());
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(report_header(n_tests))?;
    for r in rows {
        ensure!(r.weak_pairing_errors.len() == n_tests, "rows disagree on the number of test functions");
        let mut rec = vec![r.h.to_string(), r.n.to_string(), r.t.to_string(), r.l2_error.to_string()];
        rec.extend(r.weak_pairing_errors.iter().map(|v| v.to_string()));
        rec.extend([r.h_alpha_norm.to_string(), r.mass_drift.to_string(), r.energy_drift.to_string()]);
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a report written by [`emit_report`].
pub fn read_report(path: &Path) -> anyhow::Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let n_cols = r.headers()?.len();
    ensure!(n_cols >= 7, "report has {n_cols} columns, expected at least 7");
    let n_tests = n_cols - 7;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> anyhow::Result<f64> { Ok(rec[i].parse()?) };
        rows.push(ReportRow {
            h: f(0)?,
            n: rec[1].parse()?,
            t: f(2)?,
            l2_error: f(3)?,
            weak_pairing_errors: (0..n_tests).map(|j| f(4 + j)).collect::<anyhow::Result<_>>()?,
            h_alpha_norm: f(4 + n_tests)?,
            mass_drift: f(5 + n_tests)?,
            energy_drift: f(6 + n_tests)?,
        });
    }
    Ok(rows)
}

/// Writes `report.csv`, `summary.txt`, `trajectory_reference.csv` and one
/// `trajectory_h<h>.csv` per mesh into `dir`.
pub fn write_outputs(report: &ContinuumLimitReport, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    emit_report(&report.rows, &dir.join("report.csv"))?;
    write_trajectory(&report.reference, &dir.join("trajectory_reference.csv"))?;
    for (h, series) in report.summary.h_ladder.iter().zip(&report.lattice) {
        write_trajectory(series, &dir.join(format!("trajectory_h{h}.csv")))?;
    }
    let text = format!("# latnls limit summary, csv schema v{CSV_SCHEMA_VERSION}\n{}", report.summary.to_text());
    std::fs::write(dir.join("summary.txt"), text)?;
    Ok(())
}
