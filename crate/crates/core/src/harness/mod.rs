//! Experiment driver: ε-sweeps of convergence rates, error-vs-steps
//! curves, one-step error tables on the linear relaxation model, and a
//! TOML-configured suite runner that writes CSV/JSON bundles.

mod suite;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::conditions::{self, StiffErrorForm};
use crate::error::{Error, Result};
use crate::integrator::{format_f64, integrate_quiet, step_count, Method, StepperConfig};
use crate::problems::{
    linear_relaxation, reference_solution, relative_component_errors, sampled_run, Component, InitialVariant,
    LinearRelaxationModel, Problem, ProblemSpec,
};
use crate::tableau::Scheme;

pub use suite::{file_stem, run_experiment_suite, run_suite_kinds, run_suite_text, Num, SuiteBundle, SuiteConfig, KINDS};

/// Hex SHA-256 of a byte string, used to stamp outputs with their config.
pub fn config_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// ε = 10⁻ʲ for j in `from..=to`.
pub fn eps_decades(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|j| 10f64.powi(-j)).collect()
}

fn csv_field(text: &str) -> String {
    text.replace([',', '\n', '\r'], ";")
}

fn header_line(hash: &str) -> String {
    format!("# config-hash: {hash}\n")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

/// log₂(E_h / E_{h/2}) when both errors are positive and finite.
pub fn rate(e_h: f64, e_h2: f64) -> Option<f64> {
    let ok = |e: f64| e > 0.0 && e.is_finite();
    (ok(e_h) && ok(e_h2)).then(|| (e_h / e_h2).log2())
}

/// Least-squares slope of log y against log x; points with y below `floor`
/// (roundoff level) are dropped. Needs two surviving points.
pub fn fit_log_slope(xs: &[f64], ys: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.is_finite() && **y > floor)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetadata {
    pub h: f64,
    pub t0: f64,
    pub t_end: f64,
    pub inner_tol: f64,
    pub reference_tol: f64,
    pub reference_refinement: usize,
    pub seed: Option<u64>,
}

// ---------------------------------------------------------------------------
// Convergence sweeps

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub eps: f64,
    pub error_h: Vec<f64>,
    pub error_h2: Vec<f64>,
    pub rate: Vec<Option<f64>>,
    /// Why this ε has no usable rates (reference unreliable, blowup, …).
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub scheme: String,
    pub problem: String,
    pub variant: Option<InitialVariant>,
    pub components: Vec<String>,
    pub records: Vec<SweepRecord>,
    pub meta: RunMetadata,
}

impl SweepResult {
    /// Smallest rate over all ε and components.
    pub fn min_rate(&self) -> Option<f64> {
        self.records
            .iter()
            .flat_map(|r| r.rate.iter().flatten().copied())
            .min_by(f64::total_cmp)
    }

    pub fn min_rate_of(&self, component: usize) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.rate.get(component).copied().flatten())
            .min_by(f64::total_cmp)
    }

    pub fn rate_at(&self, eps: f64) -> Option<&[Option<f64>]> {
        self.records.iter().find(|r| r.eps == eps).map(|r| r.rate.as_slice())
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(|r| r.failure.is_some())
    }

    pub fn to_csv(&self, hash: &str) -> String {
        let mut out = header_line(hash);
        out.push_str("eps");
        for c in &self.components {
            let _ = write!(out, ",E_h[{c}],E_h2[{c}],rate[{c}]");
        }
        out.push_str(",status\n");
        for r in &self.records {
            out.push_str(&format_f64(r.eps));
            for c in 0..self.components.len() {
                let _ = write!(
                    out,
                    ",{},{},{}",
                    format_f64(r.error_h[c]),
                    format_f64(r.error_h2[c]),
                    opt(r.rate[c])
                );
            }
            let status = r.failure.as_deref().map_or("ok".to_string(), csv_field);
            let _ = writeln!(out, ",{status}");
        }
        out
    }
}

fn component_names(components: &[Component]) -> Vec<String> {
    components.iter().map(|c| c.name.clone()).collect()
}

/// Errors of runs at h and h/2 against one reference computed at
/// (h/2)/2⁸ and sampled on the h/2 grid. Each run is measured at every
/// one of its own grid times.
fn sweep_point(method: &Method, problem: &Problem, h: f64, config: StepperConfig) -> Result<SweepRecord> {
    let n = problem.components.len();
    let eps = problem.spec.eps();
    let failed = |e: Error| -> Result<SweepRecord> {
        if e.is_numerical() {
            Ok(SweepRecord {
                eps,
                error_h: vec![f64::NAN; n],
                error_h2: vec![f64::NAN; n],
                rate: vec![None; n],
                failure: Some(e.to_string()),
            })
        } else {
            Err(e)
        }
    };
    let reference = match reference_solution(problem, h / 2.0) {
        Ok(r) => r,
        Err(e) => return failed(e),
    };
    let runs = sampled_run(method, problem, h, 1, config)
        .and_then(|a| sampled_run(method, problem, h / 2.0, 1, config).map(|b| (a, b)));
    let (coarse, fine) = match runs {
        Ok(r) => r,
        Err(e) => return failed(e),
    };
    let on_coarse: Vec<Vec<f64>> = reference.states.iter().step_by(2).cloned().collect();
    let error_h = relative_component_errors(&coarse, &on_coarse, &problem.components);
    let error_h2 = relative_component_errors(&fine, &reference.states, &problem.components);
    let check = reference.check(&error_h).and_then(|_| reference.check(&error_h2));
    let rates = match &check {
        Ok(()) => error_h.iter().zip(&error_h2).map(|(a, b)| rate(*a, *b)).collect(),
        Err(_) => vec![None; n],
    };
    Ok(SweepRecord {
        eps,
        error_h,
        error_h2,
        rate: rates,
        failure: check.err().map(|e| e.to_string()),
    })
}

/// Rates log₂(E_h/E_{h/2}) for every ε in `eps_list`, where E is the
/// max-over-grid deviation from a fine reference divided by the max
/// reference magnitude, per component. Numerical failures at one ε are
/// recorded and the sweep continues.
pub fn convergence_sweep(
    scheme: &Scheme,
    family: &ProblemSpec,
    eps_list: &[f64],
    h: f64,
    config: StepperConfig,
) -> Result<SweepResult> {
    config.validate()?;
    let method = Method::from_scheme(scheme);
    let template = family.build()?;
    step_count(template.run.t0, template.run.t_end, h / 2.0)?;
    let problems = eps_list
        .iter()
        .map(|&e| family.with_eps(e).build())
        .collect::<Result<Vec<_>>>()?;
    let mut records = problems
        .par_iter()
        .map(|p| sweep_point(&method, p, h, config))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    Ok(SweepResult {
        scheme: scheme.name().to_string(),
        problem: family.name().to_string(),
        variant: family.variant(),
        components: component_names(&template.components),
        records,
        meta: RunMetadata {
            h,
            t0: template.run.t0,
            t_end: template.run.t_end,
            inner_tol: config.tol,
            reference_tol: 1e-13,
            reference_refinement: 256,
            seed: seed_of(family),
        },
    })
}

fn seed_of(spec: &ProblemSpec) -> Option<u64> {
    match spec {
        ProblemSpec::Population { seed, .. } => Some(*seed),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Efficiency curves

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfficiencyRecord {
    pub h: f64,
    pub steps: usize,
    /// Relative error at t_end per component.
    pub error: Vec<f64>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfficiencyCurve {
    pub scheme: String,
    pub problem: String,
    pub eps: f64,
    pub variant: Option<InitialVariant>,
    pub components: Vec<String>,
    /// Sorted by increasing step count.
    pub records: Vec<EfficiencyRecord>,
    pub reference_self_error: Vec<f64>,
}

impl EfficiencyCurve {
    pub fn error_at_steps(&self, steps: usize, component: usize) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.steps == steps && r.failure.is_none())
            .map(|r| r.error[component])
    }

    pub fn to_csv(&self, hash: &str) -> String {
        let mut out = header_line(hash);
        out.push_str("h,steps");
        for c in &self.components {
            let _ = write!(out, ",error[{c}]");
        }
        out.push_str(",status\n");
        for r in &self.records {
            let _ = write!(out, "{},{}", format_f64(r.h), r.steps);
            for e in &r.error {
                let _ = write!(out, ",{}", format_f64(*e));
            }
            let status = r.failure.as_deref().map_or("ok".to_string(), csv_field);
            let _ = writeln!(out, ",{status}");
        }
        out
    }
}

fn final_time_errors(y: &[f64], reference: &[f64], comps: &[Component]) -> Vec<f64> {
    relative_component_errors(&[y.to_vec()], &[reference.to_vec()], comps)
}

/// Relative error at t_end for each step size, against a reference at
/// min(h)/2⁸. The reference must be two digits better than every error
/// it measures, otherwise the curve is rejected.
pub fn efficiency_curve(
    scheme: &Scheme,
    spec: &ProblemSpec,
    h_list: &[f64],
    config: StepperConfig,
) -> Result<EfficiencyCurve> {
    config.validate()?;
    let problem = spec.build()?;
    let (t0, t_end) = (problem.run.t0, problem.run.t_end);
    let mut hs: Vec<(f64, usize)> = h_list
        .iter()
        .map(|&h| step_count(t0, t_end, h).map(|n| (h, n)))
        .collect::<Result<_>>()?;
    hs.sort_by_key(|&(_, n)| n);
    hs.dedup_by_key(|&mut (_, n)| n);
    let base = EfficiencyCurve {
        scheme: scheme.name().to_string(),
        problem: problem.name().to_string(),
        eps: spec.eps(),
        variant: spec.variant(),
        components: component_names(&problem.components),
        records: Vec::new(),
        reference_self_error: vec![0.0; problem.components.len()],
    };
    let Some(h_min) = hs.iter().map(|p| p.0).min_by(f64::total_cmp) else {
        return Ok(base);
    };
    // Only the final time is needed, so sample the reference once per run.
    let mut whole = spec.build()?;
    whole.run.h = t_end - t0;
    let refine = ((t_end - t0) / h_min * 256.0).round() as usize;
    let reference = crate::problems::reference_with(
        &whole,
        t_end - t0,
        &crate::tableau::catalog("ASIRK-LSe(3,2)")?,
        refine,
    )?;
    let y_ref = reference.states.last().expect("reference has samples").clone();
    let method = Method::from_scheme(scheme);
    let records: Vec<EfficiencyRecord> = hs
        .par_iter()
        .map(|&(h, steps)| {
            let n = problem.components.len();
            let outcome = method
                .stepper(problem.ode.dim(), config)
                .and_then(|mut st| integrate_quiet(st.as_mut(), problem.ode.as_ref(), &problem.y0, t0, t_end, h));
            match outcome {
                Ok(out) => Ok(EfficiencyRecord {
                    h,
                    steps,
                    error: final_time_errors(&out.y, &y_ref, &problem.components),
                    failure: None,
                }),
                Err(e) if e.is_numerical() => Ok(EfficiencyRecord {
                    h,
                    steps,
                    error: vec![f64::NAN; n],
                    failure: Some(e.to_string()),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    for r in records.iter().filter(|r| r.failure.is_none()) {
        reference.check(&r.error)?;
    }
    Ok(EfficiencyCurve {
        records,
        reference_self_error: reference.self_error,
        ..base
    })
}

// ---------------------------------------------------------------------------
// One-step errors on the linear relaxation model

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StiffScalingTable {
    pub scheme: String,
    pub model: LinearRelaxationModel,
    pub predicted: Option<StiffErrorForm>,
    pub eps: Vec<f64>,
    pub h: Vec<f64>,
    /// `errors[i][j]` = (|u₁ − u|, |v₁ − v|) at eps[i], h[j].
    pub errors: Vec<Vec<[f64; 2]>>,
}

/// Errors below this are treated as roundoff and left out of fits.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

impl StiffScalingTable {
    /// Slope of log error against log h at eps[i].
    pub fn h_slope(&self, i: usize, component: usize) -> Option<f64> {
        let ys: Vec<f64> = self.errors[i].iter().map(|e| e[component]).collect();
        fit_log_slope(&self.h, &ys, ROUNDOFF_FLOOR)
    }

    /// Slope of log error against log ε at h[j], over eps in [lo, hi].
    pub fn eps_slope(&self, j: usize, component: usize, lo: f64, hi: f64) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .eps
            .iter()
            .zip(&self.errors)
            .filter(|(e, _)| **e >= lo * (1.0 - 1e-12) && **e <= hi * (1.0 + 1e-12))
            .map(|(e, row)| (*e, row[j][component]))
            .unzip();
        fit_log_slope(&xs, &ys, ROUNDOFF_FLOOR)
    }

    /// error(h_small) / error(h_large) at eps[i]; above 1 means the error
    /// grows as the step shrinks.
    pub fn growth(&self, i: usize, component: usize, h_large: usize, h_small: usize) -> f64 {
        self.errors[i][h_small][component] / self.errors[i][h_large][component]
    }

    pub fn to_csv(&self, hash: &str) -> String {
        let mut out = header_line(hash);
        if let Some(form) = &self.predicted {
            let _ = writeln!(out, "# predicted: {form}");
        }
        out.push_str("eps,h,error_u,error_v\n");
        for (i, e) in self.eps.iter().enumerate() {
            for (j, h) in self.h.iter().enumerate() {
                let [eu, ev] = self.errors[i][j];
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    format_f64(*e),
                    format_f64(*h),
                    format_f64(eu),
                    format_f64(ev)
                );
            }
        }
        out
    }
}

/// One step from consistent data (1, c) compared with exp(hA)(1, c).
pub fn stiff_scaling_table(
    scheme: &Scheme,
    model: LinearRelaxationModel,
    eps_grid: &[f64],
    h_grid: &[f64],
    config: StepperConfig,
) -> Result<StiffScalingTable> {
    config.validate()?;
    let method = Method::from_scheme(scheme);
    let cells: Vec<(usize, usize)> = (0..eps_grid.len())
        .flat_map(|i| (0..h_grid.len()).map(move |j| (i, j)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(i, j)| {
            let m = LinearRelaxationModel {
                eps: eps_grid[i],
                ..model
            };
            let h = h_grid[j];
            let p = linear_relaxation(m, h)?;
            let mut st = method.stepper(2, config)?;
            let out = integrate_quiet(st.as_mut(), p.ode.as_ref(), &p.y0, 0.0, h, h)?;
            let exact = m.exact(h, [p.y0[0], p.y0[1]]);
            Ok([(out.y[0] - exact[0]).abs(), (out.y[1] - exact[1]).abs()])
        })
        .collect::<Result<Vec<[f64; 2]>>>()?;
    let errors = values.chunks(h_grid.len().max(1)).map(<[_]>::to_vec).collect();
    Ok(StiffScalingTable {
        scheme: scheme.name().to_string(),
        model,
        predicted: conditions::classify(scheme).ok().map(|r| r.stiff_error),
        eps: eps_grid.to_vec(),
        h: h_grid.to_vec(),
        errors,
    })
}
