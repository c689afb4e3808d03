//! TOML experiment files. Each top-level array (`[[sweep]]`,
//! `[[efficiency]]`, …) lists experiments of one kind; every experiment
//! expands over its scheme list (and variants) into one CSV per run.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{config_hash, convergence_sweep, efficiency_curve, eps_decades, stiff_scaling_table};
use crate::conditions;
use crate::error::{Error, Result};
use crate::integrator::{format_f64, integrate_quiet, step_count, Method, StepperConfig};
use crate::problems::{reference_solution, InitialVariant, LinearRelaxationModel, ProblemSpec};
use crate::rational::{self, Rational};
use crate::stability::{region_scan, BoundarySpec, GridSpec, ScanMethod};
use crate::tableau::{catalog, family_s2, family_s3, from_low_storage, CoefficientKind, Scheme};

/// A number written as a TOML float/integer or as a string holding an
/// exact rational such as "1/20".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    fn rational(&self) -> Result<Rational> {
        match self {
            Num::Int(n) => Ok(rational::int(*n)),
            Num::Float(x) => rational::from_f64_decimal(*x),
            Num::Text(s) => rational::parse(s),
        }
    }

    fn value(&self) -> Result<f64> {
        match self {
            Num::Int(n) => Ok(*n as f64),
            Num::Float(x) => Ok(*x),
            Num::Text(s) => rational::parse(s).map(|q| rational::to_f64(&q)),
        }
    }
}

fn values(path: &str, list: &[Num]) -> Result<Vec<f64>> {
    list.iter()
        .enumerate()
        .map(|(i, n)| n.value().map_err(|e| Error::config(format!("{path}[{i}]"), e.to_string())))
        .collect()
}

fn value(path: &str, n: &Num) -> Result<f64> {
    n.value().map_err(|e| Error::config(path, e.to_string()))
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Inner-solver settings shared by all experiments unless overridden.
    #[serde(default)]
    pub solver: Option<StepperConfig>,
    #[serde(default)]
    pub sweep: Vec<SweepConfig>,
    #[serde(default)]
    pub efficiency: Vec<EfficiencyConfig>,
    #[serde(default)]
    pub stiff_scaling: Vec<ScalingConfig>,
    #[serde(default)]
    pub region: Vec<RegionConfig>,
    #[serde(default)]
    pub verify: Vec<VerifyConfig>,
    #[serde(default)]
    pub snapshot: Vec<SnapshotConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schemes: Vec<String>,
    pub problem: String,
    #[serde(default)]
    pub variants: Vec<InitialVariant>,
    /// Explicit ε list; defaults to 10⁻ʲ for j in `eps_decades`.
    pub eps: Option<Vec<Num>>,
    pub eps_decades: Option<[i32; 2]>,
    /// Defaults to the problem's canonical step.
    pub h: Option<Num>,
    pub solver: Option<StepperConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyConfig {
    pub schemes: Vec<String>,
    pub problem: String,
    pub eps: Num,
    pub variant: Option<InitialVariant>,
    /// Step sizes, or step counts over the problem's interval.
    pub h: Option<Vec<Num>>,
    pub steps: Option<Vec<usize>>,
    pub solver: Option<StepperConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub schemes: Vec<String>,
    #[serde(default)]
    pub model: ModelConfig,
    pub eps: Vec<Num>,
    pub h: Vec<Num>,
    pub solver: Option<StepperConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub delta1: Num,
    pub sigma1: Num,
    pub delta2: Num,
    pub sigma2: Num,
    pub c: Num,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            delta1: Num::Int(0),
            sigma1: Num::Int(1),
            delta2: Num::Int(1),
            sigma2: Num::Int(0),
            c: Num::Text("1/2".into()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    /// Catalog schemes to scan.
    #[serde(default)]
    pub schemes: Vec<String>,
    /// Or members of a one-parameter family: "s2" or "s3" with ω₁ values.
    pub family: Option<String>,
    #[serde(default)]
    pub omega1: Vec<Num>,
    pub grid: Option<GridSpec>,
    pub boundary: Option<BoundarySpec>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub polyline: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub schemes: Vec<String>,
}

/// Final states of several schemes next to a fine-step reference.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotConfig {
    pub schemes: Vec<String>,
    pub problem: String,
    pub eps: Num,
    pub variant: Option<InitialVariant>,
    pub h: Option<Num>,
    pub solver: Option<StepperConfig>,
}

impl SuiteConfig {
    pub fn from_toml(text: &str, path: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let at = e
                .span()
                .map(|s| {
                    let line = text[..s.start.min(text.len())].lines().count().max(1);
                    format!("{path}:{line}")
                })
                .unwrap_or_else(|| path.to_string());
            Error::config(at, e.message().to_string())
        })
    }

    pub fn is_empty(&self) -> bool {
        self.sweep.is_empty()
            && self.efficiency.is_empty()
            && self.stiff_scaling.is_empty()
            && self.region.is_empty()
            && self.verify.is_empty()
            && self.snapshot.is_empty()
    }
}

/// What a suite run produced.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteBundle {
    pub config_hash: String,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

/// Scheme names become file-name fragments: "ASIRK-LSe(3,2)" → "ASIRK-LSe_3_2".
pub fn file_stem(name: &str) -> String {
    let mapped: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    let mut out = String::new();
    for c in mapped.chars() {
        if !(c == '_' && out.ends_with('_')) {
            out.push(c);
        }
    }
    out.trim_matches('_').to_string()
}

fn scheme(path: &str, name: &str) -> Result<Scheme> {
    catalog(name).map_err(|e| Error::config(path, e.to_string()))
}

fn problem_spec(path: &str, name: &str, eps: f64, variant: Option<InitialVariant>) -> Result<ProblemSpec> {
    let spec = ProblemSpec::named(name, eps, variant.unwrap_or(InitialVariant::Consistent))
        .map_err(|e| Error::config(format!("{path}.problem"), e.to_string()))?;
    if variant.is_some() && spec.variant().is_none() {
        return Err(Error::config(
            format!("{path}.variant"),
            format!("{} has no initial-value variants", spec.name()),
        ));
    }
    Ok(spec)
}

struct Writer<'a> {
    dir: &'a Path,
    hash: String,
    names: BTreeSet<String>,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, path: &str, name: String, body: &str) -> Result<()> {
        if !self.names.insert(name.clone()) {
            return Err(Error::config(path, format!("experiment writes `{name}` twice")));
        }
        let file = self.dir.join(&name);
        fs::write(&file, body)?;
        self.files.push(file);
        Ok(())
    }
}

/// Runs every experiment of a config file into `out_dir` and writes
/// `summary.json` there. Outputs depend only on the config.
pub fn run_experiment_suite(config_path: &Path, out_dir: &Path) -> Result<SuiteBundle> {
    let text = fs::read_to_string(config_path)?;
    run_suite_text(&text, &config_path.display().to_string(), out_dir)
}

pub fn run_suite_text(text: &str, path: &str, out_dir: &Path) -> Result<SuiteBundle> {
    run_suite_kinds(text, path, out_dir, None)
}

/// Experiment kinds as named in the config file.
pub const KINDS: [&str; 6] = ["sweep", "efficiency", "stiff_scaling", "region", "verify", "snapshot"];

/// Like [`run_suite_text`], restricted to the listed experiment kinds.
pub fn run_suite_kinds(text: &str, path: &str, out_dir: &Path, kinds: Option<&[&str]>) -> Result<SuiteBundle> {
    let mut config = SuiteConfig::from_toml(text, path)?;
    if let Some(kinds) = kinds {
        let keep = |k: &str| kinds.contains(&k);
        if !keep("sweep") {
            config.sweep.clear();
        }
        if !keep("efficiency") {
            config.efficiency.clear();
        }
        if !keep("stiff_scaling") {
            config.stiff_scaling.clear();
        }
        if !keep("region") {
            config.region.clear();
        }
        if !keep("verify") {
            config.verify.clear();
        }
        if !keep("snapshot") {
            config.snapshot.clear();
        }
    }
    let base = config.solver.unwrap_or_default();
    base.validate().map_err(|e| Error::config("solver", e.to_string()))?;
    fs::create_dir_all(out_dir)?;
    let mut w = Writer {
        dir: out_dir,
        hash: config_hash(text.as_bytes()),
        names: BTreeSet::new(),
        files: Vec::new(),
    };
    let mut summary = Vec::new();
    for (k, e) in config.sweep.iter().enumerate() {
        summary.extend(run_sweep(&format!("sweep[{k}]"), e, base, &mut w)?);
    }
    for (k, e) in config.efficiency.iter().enumerate() {
        summary.extend(run_efficiency(&format!("efficiency[{k}]"), e, base, &mut w)?);
    }
    for (k, e) in config.stiff_scaling.iter().enumerate() {
        summary.extend(run_scaling(&format!("stiff_scaling[{k}]"), e, base, &mut w)?);
    }
    for (k, e) in config.region.iter().enumerate() {
        summary.extend(run_region(&format!("region[{k}]"), e, &mut w)?);
    }
    for (k, e) in config.verify.iter().enumerate() {
        summary.extend(run_verify(&format!("verify[{k}]"), e, &mut w)?);
    }
    for (k, e) in config.snapshot.iter().enumerate() {
        summary.extend(run_snapshot(&format!("snapshot[{k}]"), e, base, &mut w)?);
    }
    let summary = json!({ "config_hash": w.hash, "experiments": summary });
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    fs::write(out_dir.join("summary.json"), text)?;
    Ok(SuiteBundle {
        config_hash: w.hash,
        files: w.files,
        summary,
    })
}

fn solver_for(path: &str, own: Option<StepperConfig>, base: StepperConfig) -> Result<StepperConfig> {
    let c = own.unwrap_or(base);
    c.validate().map_err(|e| Error::config(format!("{path}.solver"), e.to_string()))?;
    Ok(c)
}

fn run_sweep(path: &str, e: &SweepConfig, base: StepperConfig, w: &mut Writer) -> Result<Vec<Value>> {
    let config = solver_for(path, e.solver, base)?;
    let eps = match (&e.eps, e.eps_decades) {
        (Some(_), Some(_)) => {
            return Err(Error::config(path, "give either `eps` or `eps_decades`, not both"));
        }
        (Some(list), None) => values(&format!("{path}.eps"), list)?,
        (None, Some([a, b])) => eps_decades(a, b),
        (None, None) => eps_decades(0, 6),
    };
    let variants: Vec<Option<InitialVariant>> = if e.variants.is_empty() {
        vec![None]
    } else {
        e.variants.iter().copied().map(Some).collect()
    };
    let mut out = Vec::new();
    for v in variants {
        let family = problem_spec(path, &e.problem, eps.first().copied().unwrap_or(1.0), v)?;
        let h = match &e.h {
            Some(h) => value(&format!("{path}.h"), h)?,
            None => family.build()?.run.h,
        };
        for name in &e.schemes {
            let s = scheme(&format!("{path}.schemes"), name)?;
            let result = convergence_sweep(&s, &family, &eps, h, config)?;
            let tag = v.map_or(String::new(), |v| format!("_{}", v.tag()));
            let file = format!("sweep_{}{tag}_{}.csv", file_stem(family.name()), file_stem(name));
            w.write(path, file.clone(), &result.to_csv(&w.hash))?;
            out.push(json!({
                "kind": "sweep",
                "file": file,
                "scheme": name,
                "problem": family.name(),
                "variant": v.map(InitialVariant::tag),
                "min_rate": result.min_rate(),
                "failures": result.failures().count(),
            }));
        }
    }
    Ok(out)
}

fn run_efficiency(path: &str, e: &EfficiencyConfig, base: StepperConfig, w: &mut Writer) -> Result<Vec<Value>> {
    let config = solver_for(path, e.solver, base)?;
    let eps = value(&format!("{path}.eps"), &e.eps)?;
    let spec = problem_spec(path, &e.problem, eps, e.variant)?;
    let run = spec.build()?.run;
    let hs = match (&e.h, &e.steps) {
        (Some(h), None) => values(&format!("{path}.h"), h)?,
        (None, Some(steps)) => {
            if let Some(i) = steps.iter().position(|&n| n == 0) {
                return Err(Error::config(format!("{path}.steps[{i}]"), "step counts must be positive"));
            }
            steps.iter().map(|&n| (run.t_end - run.t0) / n as f64).collect()
        }
        _ => return Err(Error::config(path, "give exactly one of `h` and `steps`")),
    };
    for (i, h) in hs.iter().enumerate() {
        step_count(run.t0, run.t_end, *h).map_err(|err| Error::config(format!("{path}.h[{i}]"), err.to_string()))?;
    }
    let mut out = Vec::new();
    for name in &e.schemes {
        let s = scheme(&format!("{path}.schemes"), name)?;
        let curve = efficiency_curve(&s, &spec, &hs, config)?;
        let tag = e.variant.map_or(String::new(), |v| format!("_{}", v.tag()));
        let file = format!(
            "efficiency_{}{tag}_eps{}_{}.csv",
            file_stem(spec.name()),
            file_stem(&format!("{eps:e}")),
            file_stem(name)
        );
        w.write(path, file.clone(), &curve.to_csv(&w.hash))?;
        out.push(json!({
            "kind": "efficiency",
            "file": file,
            "scheme": name,
            "problem": spec.name(),
            "eps": eps,
            "steps": curve.records.iter().map(|r| r.steps).collect::<Vec<_>>(),
        }));
    }
    Ok(out)
}

fn run_scaling(path: &str, e: &ScalingConfig, base: StepperConfig, w: &mut Writer) -> Result<Vec<Value>> {
    let config = solver_for(path, e.solver, base)?;
    let m = &e.model;
    let p = |field: &str, n: &Num| value(&format!("{path}.model.{field}"), n);
    let model = LinearRelaxationModel {
        delta1: p("delta1", &m.delta1)?,
        sigma1: p("sigma1", &m.sigma1)?,
        delta2: p("delta2", &m.delta2)?,
        sigma2: p("sigma2", &m.sigma2)?,
        c: p("c", &m.c)?,
        eps: 1.0,
    };
    let eps = values(&format!("{path}.eps"), &e.eps)?;
    let hs = values(&format!("{path}.h"), &e.h)?;
    if let Some(i) = eps.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::config(format!("{path}.eps[{i}]"), "ε must be positive"));
    }
    if let Some(i) = hs.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::config(format!("{path}.h[{i}]"), "h must be positive"));
    }
    let mut out = Vec::new();
    for name in &e.schemes {
        let s = scheme(&format!("{path}.schemes"), name)?;
        let table = stiff_scaling_table(&s, model, &eps, &hs, config)?;
        let file = format!("stiff_scaling_{}.csv", file_stem(name));
        w.write(path, file.clone(), &table.to_csv(&w.hash))?;
        let v_slopes: Vec<Option<f64>> = (0..eps.len()).map(|i| table.h_slope(i, 1)).collect();
        out.push(json!({
            "kind": "stiff_scaling",
            "file": file,
            "scheme": name,
            "predicted": table.predicted.as_ref().map(ToString::to_string),
            "v_h_slope_per_eps": v_slopes,
        }));
    }
    Ok(out)
}

fn run_region(path: &str, e: &RegionConfig, w: &mut Writer) -> Result<Vec<Value>> {
    let grid = e.grid.clone().unwrap_or_else(GridSpec::canonical);
    if grid.nx == 0 || grid.ny == 0 || !(grid.re_max > grid.re_min && grid.im_max > grid.im_min) {
        return Err(Error::config(format!("{path}.grid"), "empty window"));
    }
    let boundary = e.boundary.clone().unwrap_or_default();
    let tol = e.tol.unwrap_or(1e-9);
    let mut members: Vec<(String, crate::tableau::AsirkScheme)> = Vec::new();
    for name in &e.schemes {
        match scheme(&format!("{path}.schemes"), name)? {
            Scheme::Asirk(s) => members.push((name.clone(), s)),
            Scheme::Imex { .. } => {
                return Err(Error::config(
                    format!("{path}.schemes"),
                    format!("{name} has no ASIRK form; its S1 region is not defined here"),
                ))
            }
        }
    }
    match (e.family.as_deref(), e.omega1.is_empty()) {
        (None, true) => {}
        (Some(f @ ("s2" | "s3")), false) => {
            for (i, n) in e.omega1.iter().enumerate() {
                let at = format!("{path}.omega1[{i}]");
                let q = n.rational().map_err(|err| Error::config(&at, err.to_string()))?;
                let params = if f == "s2" { family_s2(&q) } else { family_s3(&q) }
                    .map_err(|err| Error::config(&at, err.to_string()))?;
                let label = format!("{f}_omega1_{}", rational::format(&q).replace('/', "over"));
                let s = from_low_storage(label.clone(), &params, CoefficientKind::ExactRational)?;
                members.push((label, s));
            }
        }
        (Some(other), _) if other != "s2" && other != "s3" => {
            return Err(Error::config(format!("{path}.family"), format!("unknown family `{other}`, expected s2 or s3")))
        }
        _ => return Err(Error::config(path, "`family` and `omega1` go together")),
    }
    let mut out = Vec::new();
    for (label, s) in members {
        let scan = region_scan(&s, &grid, &boundary, tol, ScanMethod::FloodFill);
        let file = format!("region_{}.csv", file_stem(&label));
        w.write(path, file.clone(), &(super::header_line(&w.hash) + &scan.to_csv()))?;
        if e.polyline {
            let poly = format!("region_{}_boundary.csv", file_stem(&label));
            w.write(path, poly, &(super::header_line(&w.hash) + &scan.boundary_csv()))?;
        }
        out.push(json!({ "kind": "region", "file": file, "scheme": label, "area": scan.area }));
    }
    Ok(out)
}

fn run_verify(path: &str, e: &VerifyConfig, w: &mut Writer) -> Result<Vec<Value>> {
    let mut out = Vec::new();
    for name in &e.schemes {
        let s = scheme(&format!("{path}.schemes"), name)?;
        let report = conditions::analyze(&s)?;
        let row = conditions::classify(&s)?;
        let file = format!("verify_{}.json", file_stem(name));
        w.write(path, file.clone(), &(report.to_json() + "\n"))?;
        out.push(json!({
            "kind": "verify",
            "file": file,
            "scheme": name,
            "order": row.order_label(),
            "additional_conditions": row.additional_conditions,
            "stiff_error": row.stiff_error.to_string(),
            "registers": row.registers.to_string(),
        }));
    }
    Ok(out)
}

fn run_snapshot(path: &str, e: &SnapshotConfig, base: StepperConfig, w: &mut Writer) -> Result<Vec<Value>> {
    let config = solver_for(path, e.solver, base)?;
    let eps = value(&format!("{path}.eps"), &e.eps)?;
    let spec = problem_spec(path, &e.problem, eps, e.variant)?;
    let problem = spec.build()?;
    let h = match &e.h {
        Some(h) => value(&format!("{path}.h"), h)?,
        None => problem.run.h,
    };
    step_count(problem.run.t0, problem.run.t_end, h).map_err(|err| Error::config(format!("{path}.h"), err.to_string()))?;
    let reference = reference_solution(&problem, h)?;
    let y_ref = reference.states.last().expect("reference has samples");
    let mut columns = Vec::new();
    let mut out = Vec::new();
    for name in &e.schemes {
        let s = scheme(&format!("{path}.schemes"), name)?;
        let mut st = Method::from_scheme(&s).stepper(problem.ode.dim(), config)?;
        let result = integrate_quiet(st.as_mut(), problem.ode.as_ref(), &problem.y0, problem.run.t0, problem.run.t_end, h);
        let (y, deviation, failure) = match result {
            Ok(r) => {
                let dev = r.y.iter().zip(y_ref).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                (r.y, Some(dev), None)
            }
            Err(err) if err.is_numerical() => (vec![f64::NAN; problem.ode.dim()], None, Some(err.to_string())),
            Err(err) => return Err(err),
        };
        out.push(json!({ "scheme": name, "max_deviation": deviation, "failure": failure }));
        columns.push((name.clone(), y));
    }
    let mut body = super::header_line(&w.hash);
    body.push_str("index,reference");
    for (name, _) in &columns {
        body.push(',');
        body.push_str(&super::csv_field(name));
    }
    body.push('\n');
    for i in 0..problem.ode.dim() {
        body.push_str(&format!("{i},{}", format_f64(y_ref[i])));
        for (_, y) in &columns {
            body.push(',');
            body.push_str(&format_f64(y[i]));
        }
        body.push('\n');
    }
    let file = format!(
        "snapshot_{}_{}_t{}.csv",
        file_stem(spec.name()),
        file_stem(&format!("eps{eps}")),
        file_stem(&format!("{}", problem.run.t_end))
    );
    w.write(path, file.clone(), &body)?;
    Ok(vec![json!({
        "kind": "snapshot",
        "file": file,
        "problem": spec.name(),
        "eps": eps,
        "h": h,
        "t_end": problem.run.t_end,
        "runs": out,
    })])
}
