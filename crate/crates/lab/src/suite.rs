//! Check-suite runner and symbol tables.

use std::path::Path;

use anyhow::Context;
use latnls_core::interp::ContinuumFunction;
use latnls_core::kernel::{Kernel, Regime};
use latnls_core::lattice::{LatticeField, PeriodicLattice};
use latnls_core::verify::{
    check_integration_by_parts, check_log_regime, check_multiplier_equivalence, check_operator_limit,
    check_symbol_asymptotics, check_uniform_inequality, default_h_ladder, default_k_grid, kernel_label,
    operator_h_ladder, standard_field_inequalities, standard_kernel_inequalities, CheckReport, FieldFamily,
    Verdict, DEFAULT_S1_SIGMA, IBP_TOLERANCE,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::KernelConfig;
use crate::formats::CSV_SCHEMA_VERSION;

/// The suite run when no kernels are named.
pub fn default_kernels() -> Vec<KernelConfig> {
    ["pure_power:s=0.75", "pure_power:s=1", "pure_power:s=1.5", "nearest_neighbor"]
        .iter()
        .map(|s| KernelConfig::parse_short(s).expect("built-in kernel spec"))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random fields per mesh for the inequality checks.
    pub samples: usize,
    pub ibp_pairs: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: FieldFamily::default().seed, samples: 200, ibp_pairs: 50 }
    }
}

/// A check outcome; checks that error out are recorded as failures.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub report: CheckReport,
    pub error: Option<String>,
}

impl SuiteEntry {
    fn from_result(name: &str, subject: &str, r: anyhow::Result<CheckReport>) -> Self {
        match r {
            Ok(report) => Self { report, error: None },
            Err(e) => Self {
                report: CheckReport {
                    name: name.to_string(),
                    subject: subject.to_string(),
                    h_ladder: Vec::new(),
                    measured: Vec::new(),
                    secondary: Vec::new(),
                    verdict: Verdict::Fail,
                    tolerance: f64::NAN,
                    metrics: Vec::new(),
                },
                error: Some(format!("{e:#}")),
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.report.passed()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteSummary {
    pub entries: Vec<SuiteEntry>,
}

impl SuiteSummary {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(SuiteEntry::passed)
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.passed()).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let status = if e.passed() { "PASS" } else { "FAIL" };
            s.push_str(&format!("{status} {:<40} {}", e.report.name, e.report.subject));
            if let Some(err) = &e.error {
                s.push_str(&format!("  error: {err}"));
            } else if !e.report.metrics.is_empty() {
                s.push_str(&format!("  {}", metrics_field(&e.report)));
            }
            s.push('\n');
        }
        s.push_str(&format!("{} checks, {} failed\n", self.entries.len(), self.failures()));
        s
    }
}

fn metrics_field(r: &CheckReport) -> String {
    r.metrics.iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(";")
}

/// Gaussian `exp(-x^2)` on the operator-limit fine grid (`L = 32`, `h = 2^-10`).
pub fn operator_test_function() -> latnls_core::Result<ContinuumFunction> {
    let fine = PeriodicLattice::with_length(32.0, 1.0 / 1024.0)?;
    ContinuumFunction::from_fn(fine, |x| Complex64::new((-x * x).exp(), 0.0))
}

/// Integration by parts on `pairs` random complex pairs (`N = 256`, `h = 1/8`).
pub fn integration_by_parts_suite(kernel: &Kernel, pairs: usize, seed: u64, stream: u64) -> anyhow::Result<CheckReport> {
    let lat = PeriodicLattice::new(0.125, 256)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut random = || -> latnls_core::Result<LatticeField> {
        let v = (0..lat.n_sites())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        LatticeField::new(lat, v)
    };
    let mut measured = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let w = random()?;
        let u = random()?;
        measured.push(check_integration_by_parts(&w, &u, kernel, 4)?.measured[0]);
    }
    let worst = measured.iter().copied().fold(0.0, f64::max);
    Ok(CheckReport {
        name: "integration_by_parts".into(),
        subject: kernel_label(kernel.spec()),
        h_ladder: vec![lat.h()],
        verdict: Verdict::from_bool(worst <= IBP_TOLERANCE),
        measured,
        secondary: Vec::new(),
        tolerance: IBP_TOLERANCE,
        metrics: vec![("worst_relative_difference".into(), worst)],
    })
}

type Job = Box<dyn Fn() -> SuiteEntry + Send + Sync>;

fn kernel_jobs(cfg: &KernelConfig, index: usize, opts: &SuiteOptions, family: &FieldFamily) -> Vec<Job> {
    let subject = cfg.to_string();
    let mut jobs: Vec<Job> = Vec::new();
    let build = {
        let cfg = cfg.clone();
        move || -> anyhow::Result<Kernel> { cfg.build().with_context(|| format!("building kernel {cfg}")) }
    };
    let log_regime = cfg.build().ok().and_then(|k| k.scaling().ok()).is_some_and(|s| s.regime == Regime::Log);
    macro_rules! job {
        ($name:expr, |$k:ident| $body:expr) => {{
            let build = build.clone();
            let subject = subject.clone();
            jobs.push(Box::new(move || {
                let r = build().and_then(|$k| -> anyhow::Result<CheckReport> { Ok($body?) });
                SuiteEntry::from_result($name, &subject, r)
            }));
        }};
    }
    job!("symbol_asymptotics", |k| check_symbol_asymptotics(&k));
    if log_regime {
        job!("log_regime", |k| check_log_regime(&k));
    }
    job!("multiplier_equivalence", |k| check_multiplier_equivalence(
        &k,
        &default_h_ladder(),
        &default_k_grid(),
        Some(DEFAULT_S1_SIGMA)
    ));
    job!("operator_limit", |k| check_operator_limit(&k, &operator_test_function()?, &operator_h_ladder()));
    let (pairs, seed) = (opts.ibp_pairs, opts.seed);
    job!("integration_by_parts", |k| integration_by_parts_suite(&k, pairs, seed, index as u64));
    for ineq in standard_kernel_inequalities() {
        let family = family.clone();
        job!(&ineq.name(), |k| check_uniform_inequality(ineq, Some(&k), &family, &default_h_ladder()));
    }
    jobs
}

/// Runs every check over the kernel list concurrently; the entry order is
/// fixed by the list, so output is identical for identical seeds.
pub fn run_check_suite(kernels: &[KernelConfig], opts: &SuiteOptions) -> SuiteSummary {
    if kernels.is_empty() {
        return SuiteSummary::default();
    }
    let family = FieldFamily { samples: opts.samples, seed: opts.seed, ..FieldFamily::default() };
    let mut jobs: Vec<Job> = Vec::new();
    for ineq in standard_field_inequalities() {
        let family = family.clone();
        let subject = format!("random(decay={}, n={})", family.decay, family.samples);
        jobs.push(Box::new(move || {
            let r = check_uniform_inequality(ineq, None, &family, &default_h_ladder()).map_err(Into::into);
            SuiteEntry::from_result(&ineq.name(), &subject, r)
        }));
    }
    for (i, cfg) in kernels.iter().enumerate() {
        jobs.extend(kernel_jobs(cfg, i, opts, &family));
    }
    SuiteSummary { entries: jobs.par_iter().map(|job| job()).collect() }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Writes `checks.csv` (one row per check), `check_values.csv` (one row per
/// ladder entry) and `summary.txt` into `dir`.
pub fn write_suite(summary: &SuiteSummary, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = csv::Writer::from_path(dir.join("checks.csv"))?;
    w.write_record(["check", "subject", "verdict", "tolerance", "h_ladder", "metrics", "error"])?;
    for e in &summary.entries {
        let r = &e.report;
        w.write_record([
            r.name.as_str(),
            r.subject.as_str(),
            if e.passed() { "pass" } else { "fail" },
            &r.tolerance.to_string(),
            &join(&r.h_ladder),
            &metrics_field(r),
            e.error.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("check_values.csv"))?;
    w.write_record(["check", "subject", "index", "h", "measured", "secondary"])?;
    for e in &summary.entries {
        let r = &e.report;
        for (i, m) in r.measured.iter().enumerate() {
            let h = r.h_ladder.get(i).map_or(String::new(), |h| h.to_string());
            let s = r.secondary.get(i).map_or(String::new(), |s| s.to_string());
            w.write_record([r.name.as_str(), r.subject.as_str(), &i.to_string(), &h, &m.to_string(), &s])?;
        }
    }
    w.flush()?;
    std::fs::write(
        dir.join("summary.txt"),
        format!("# latnls check summary, csv schema v{CSV_SCHEMA_VERSION}\n{}", summary.to_text()),
    )?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolRow {
    pub j: u32,
    pub k: f64,
    pub omega: f64,
    pub delta: f64,
    pub ratio: f64,
}

/// `omega`, `delta` and their ratio on `k = 2^-j`.
pub fn symbol_rows(kernel: &Kernel, ladder: std::ops::RangeInclusive<u32>) -> anyhow::Result<Vec<SymbolRow>> {
    let scaling = kernel.scaling()?;
    ladder
        .map(|j| {
            let k = (-(j as f64)).exp2();
            let omega = kernel.omega(k);
            let delta = scaling.delta(k)?;
            Ok(SymbolRow { j, k, omega, delta, ratio: omega / delta })
        })
        .collect()
}

pub fn write_symbol_table(rows: &[SymbolRow], path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["j", "k", "omega", "delta", "ratio"])?;
    for r in rows {
        w.write_record([r.j.to_string(), r.k.to_string(), r.omega.to_string(), r.delta.to_string(), r.ratio.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list_is_an_empty_pass() {
        let s = run_check_suite(&[], &SuiteOptions::default());
        assert!(s.entries.is_empty());
        assert_eq!(s.exit_code(), 0);
    }

    #[test]
    fn errors_become_failed_entries() {
        let e = SuiteEntry::from_result("x", "y", Err(anyhow::anyhow!("boom")));
        assert!(!e.passed());
        assert_eq!(e.error.as_deref(), Some("boom"));
    }

    #[test]
    fn symbol_rows_for_nearest_neighbor() {
        let k = KernelConfig::NearestNeighbor.build().unwrap();
        let rows = symbol_rows(&k, 1..=3).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].k, 0.5);
        let k3: f64 = 0.125;
        let exact = 4.0 * (0.5 * k3).sin().powi(2) / (k3 * k3);
        assert!((rows[2].ratio - exact).abs() < 1e-14);
    }
}
