use latnls_lab::config::KernelConfig;
use latnls_lab::suite::{run_check_suite, write_suite, SuiteOptions};

fn opts() -> SuiteOptions {
    SuiteOptions { samples: 8, ibp_pairs: 4, ..SuiteOptions::default() }
}

#[test]
fn fixed_seed_gives_identical_csvs() {
    let kernels = [KernelConfig::NearestNeighbor];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_suite(&run_check_suite(&kernels, &opts()), a.path()).unwrap();
    write_suite(&run_check_suite(&kernels, &opts()), b.path()).unwrap();
    for name in ["checks.csv", "check_values.csv", "summary.txt"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn nearest_neighbor_suite_passes() {
    let summary = run_check_suite(&[KernelConfig::NearestNeighbor], &opts());
    assert!(summary.all_passed(), "{}", summary.to_text());
    let names: Vec<&str> = summary.entries.iter().map(|e| e.report.name.as_str()).collect();
    for expected in ["symbol_asymptotics", "multiplier_equivalence", "operator_limit", "integration_by_parts"] {
        assert!(names.contains(&expected), "{names:?}");
    }
}

#[test]
fn log_kernel_adds_regime_check() {
    let k = KernelConfig::parse_short("pure_power:s=1").unwrap();
    let summary = run_check_suite(&[k], &SuiteOptions { samples: 4, ibp_pairs: 2, ..SuiteOptions::default() });
    assert!(summary.entries.iter().any(|e| e.report.name == "log_regime" && e.passed()));
}
