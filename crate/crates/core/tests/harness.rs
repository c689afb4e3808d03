use std::fs;
use std::path::{Path, PathBuf};

use asirk::harness::*;
use asirk::integrator::{InnerSolver, StepperConfig};
use asirk::problems::{InitialVariant, LinearRelaxationModel, ProblemSpec};
use asirk::tableau::catalog;
use sha2::{Digest, Sha256};

fn config_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn names(files: &[PathBuf]) -> Vec<String> {
    files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect()
}

const SMALL: &str = r#"
[[sweep]]
schemes = ["ASIRK-LSe(3,2)", "Zhong"]
problem = "prototype"
variants = ["WP_InVal"]
eps = ["1", "1e-2"]
h = "1/10"

[[efficiency]]
schemes = ["ASIRK-LSs(3,2)"]
problem = "van-der-pol"
eps = "1e-2"
variant = "C_InVal"
steps = [11, 22]

[[stiff_scaling]]
schemes = ["ASIRK-LS(3,2)"]
eps = ["1e-6", "1e-4"]
h = ["1e-2", "1e-3"]

[[verify]]
schemes = ["IMEX-SSP2(3,3,2)"]
"#;

#[test]
fn empty_config_gives_empty_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = run_suite_text("# nothing\n", "empty.toml", dir.path()).unwrap();
    assert!(bundle.files.is_empty());
    assert_eq!(bundle.summary["experiments"].as_array().unwrap().len(), 0);
    let written: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(written, bundle.summary);
}

#[test]
fn outputs_are_deterministic_and_carry_the_config_hash() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_suite_text(SMALL, "small.toml", a.path()).unwrap();
    let second = run_suite_text(SMALL, "small.toml", b.path()).unwrap();
    assert_eq!(names(&first.files), names(&second.files));
    assert_eq!(first.files.len(), 2 + 1 + 1 + 1);

    let digest: String = Sha256::digest(SMALL.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(first.config_hash, digest);
    for name in names(&first.files).into_iter().chain(["summary.json".to_string()]) {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
        if name.ends_with(".csv") {
            let text = String::from_utf8(x).unwrap();
            assert_eq!(text.lines().next().unwrap(), format!("# config-hash: {digest}"), "{name}");
        }
    }
}

#[test]
fn figure2_config_writes_one_sweep_per_scheme_and_variant() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = run_experiment_suite(&config_file("figure2.toml"), dir.path()).unwrap();
    let files = names(&bundle.files);
    assert_eq!(files.len(), 15, "{files:?}");
    assert!(files.contains(&"sweep_prototype_WP_InVal_ASIRK-LSe_3_2.csv".to_string()), "{files:?}");
    let text = fs::read_to_string(dir.path().join(&files[0])).unwrap();
    // Header, column names and seven ε rows.
    assert_eq!(text.lines().count(), 2 + 7);
}

#[test]
fn figure1_config_writes_nine_regions() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = run_experiment_suite(&config_file("figure1.toml"), dir.path()).unwrap();
    let files = names(&bundle.files);
    let regions = files.iter().filter(|f| f.starts_with("region_") && !f.ends_with("_boundary.csv")).count();
    let boundaries = files.iter().filter(|f| f.ends_with("_boundary.csv")).count();
    assert_eq!((regions, boundaries), (9, 9), "{files:?}");
}

#[test]
fn every_shipped_config_parses() {
    for entry in fs::read_dir(config_file("")).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let config = SuiteConfig::from_toml(&text, &path.display().to_string()).unwrap();
        assert!(!config.is_empty(), "{}", path.display());
    }
}

#[test]
fn config_errors_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "[[sweep]]\nschemes = [\"nope\"]\nproblem = \"prototype\"\neps = [\"1\"]\nh = \"0.1\"\n",
        "[[sweep]]\nschemes = [\"Zhong\"]\nproblem = \"prototype\"\neps = [\"1\"]\nh = \"0.3\"\n",
        "[[verify]]\nschemes = [\"Zhong\"]\nextra = 1\n",
        "[[verify]]\nschemes = [\"Zhong\"]\n[[verify]]\nschemes = [\"Zhong\"]\n",
        "[solver]\ntol = -1\n",
    ];
    for text in cases {
        let err = run_suite_text(text, "bad.toml", dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{text}: {err}");
    }
}

#[test]
fn mild_problems_converge_at_second_order() {
    let spec = ProblemSpec::named("prototype", 1.0, InitialVariant::WellPrepared).unwrap();
    for name in ["ASIRK-LSe(3,2)", "ASIRK-LSs(3,2)", "IMEX-SSP2(3,3,2)"] {
        let r = convergence_sweep(&catalog(name).unwrap(), &spec, &[1.0], 0.05, StepperConfig::default()).unwrap();
        let rate = r.min_rate().unwrap();
        assert!((rate - 2.0).abs() < 0.15, "{name}: {rate}");
        assert_eq!(r.failures().count(), 0);
        assert_eq!(r.records[0].rate.len(), 2);
    }
}

#[test]
fn efficiency_errors_shrink_with_steps() {
    let spec = ProblemSpec::named("prototype", 1e-2, InitialVariant::Consistent).unwrap();
    let hs = [0.1, 0.05, 0.025, 0.0125];
    let curve = efficiency_curve(&catalog("ASIRK-LSe(3,2)").unwrap(), &spec, &hs, StepperConfig::default()).unwrap();
    let steps: Vec<usize> = curve.records.iter().map(|r| r.steps).collect();
    assert_eq!(steps, vec![10, 20, 40, 80]);
    for w in curve.records.windows(2) {
        assert!(w[1].error[0] < w[0].error[0], "{:?}", curve.records);
    }
    assert!(efficiency_curve(&catalog("Zhong").unwrap(), &spec, &[0.3], StepperConfig::default()).is_err());
}

#[test]
fn stiff_scaling_sees_second_order_at_moderate_eps() {
    // With ε ≫ h the model is non-stiff and the one-step error is O(h³).
    let model = LinearRelaxationModel {
        delta1: 0.0,
        sigma1: 1.0,
        delta2: 1.0,
        sigma2: 0.0,
        c: 0.5,
        eps: 1.0,
    };
    let config = StepperConfig::default().with_solver(InnerSolver::LinearDirect);
    let t = stiff_scaling_table(&catalog("IMEX-SSP2(3,3,2)").unwrap(), model, &[1.0], &[1e-1, 5e-2, 2.5e-2], config)
        .unwrap();
    for c in 0..2 {
        let s = t.h_slope(0, c).unwrap();
        assert!((s - 3.0).abs() < 0.2, "component {c}: {s}");
    }
    assert!(t.to_csv("x").starts_with("# config-hash: x\n# predicted:"));
}
