//! Time stepping for split problems y' = f(t, y) + g(t, y).
//!
//! Every stepper owns its state and allocates its N-vectors through a
//! counting allocator, so the register usage reported in [`MemoryReport`] is
//! what was actually allocated, not a declared constant.

mod solver;
mod steppers;

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::tableau::{is_low_storage, ImexTableau, LowStorageParams, Scheme};

pub use solver::StageSolver;
pub use steppers::{AsirkReference, DirkTwoRegister, ImexReference, LowStorageStepper, VanDerHouwen};

/// An additive problem. `f` is integrated explicitly, `g` implicitly.
///
/// Evaluators write into `out`, which never aliases `y`, and must be
/// deterministic and callable from several threads on distinct vectors.
pub trait SplitOde: Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn f(&self, t: f64, y: &[f64], out: &mut [f64]);
    fn g(&self, t: f64, y: &[f64], out: &mut [f64]);

    /// False when g vanishes identically; steppers then skip the implicit
    /// solves altogether.
    fn has_stiff_part(&self) -> bool {
        true
    }

    /// Writes ∂g/∂y at (t, y) into `jac`. Returns false when no analytic
    /// Jacobian is available, in which case finite differences are used.
    fn g_jacobian(&self, _t: f64, _y: &[f64], _jac: &mut DMatrix<f64>) -> bool {
        false
    }

    /// The matrix M when g is affine, g(t, y) = M y + q(t).
    fn g_linear(&self) -> Option<&DMatrix<f64>> {
        None
    }
}

/// How the implicit stage equations K = L + h g(Y + λK) are solved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerSolver {
    #[default]
    FixedPoint,
    Newton,
    LinearDirect,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperConfig {
    pub solver: InnerSolver,
    /// Stop when ‖ΔK‖∞ ≤ tol (1 + ‖K‖∞).
    pub tol: f64,
    pub max_iter: usize,
    /// Let fixed point hand over to Newton once it stops contracting.
    pub escalate: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            solver: InnerSolver::FixedPoint,
            tol: 1e-12,
            max_iter: 100,
            escalate: true,
        }
    }
}

impl StepperConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_solver(mut self, solver: InnerSolver) -> Self {
        self.solver = solver;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Domain(format!("inner tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max inner iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Memory and work accounting for one stepper.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryReport {
    /// Persistent N-vectors owned by the stepping loop itself.
    pub core_registers: usize,
    /// N-vectors owned by the inner solver (argument buffer, Newton work).
    pub scratch_vectors: usize,
    /// N×N matrices owned by the inner solver.
    pub scratch_matrices: usize,
    pub inner_iterations: usize,
    pub steps: usize,
    pub factorizations: usize,
    pub escalations: usize,
}

/// Hands out N-vectors and N×N matrices and counts them.
#[derive(Debug, Default)]
pub(crate) struct Allocator {
    pub(crate) vectors: usize,
    pub(crate) matrices: usize,
}

impl Allocator {
    pub(crate) fn vector(&mut self, n: usize) -> Vec<f64> {
        self.vectors += 1;
        vec![0.0; n]
    }

    pub(crate) fn matrix(&mut self, n: usize) -> DMatrix<f64> {
        self.matrices += 1;
        DMatrix::zeros(n, n)
    }
}

pub trait Stepper: Send {
    fn name(&self) -> &str;
    fn state(&self) -> &[f64];
    fn set_state(&mut self, y: &[f64]);
    /// Advances the state from t to t + h.
    fn step(&mut self, ode: &dyn SplitOde, t: f64, h: f64) -> Result<()>;
    fn report(&self) -> MemoryReport;
}

/// A scheme ready to be turned into a stepper.
#[derive(Clone, Debug)]
pub enum Method {
    LowStorage { name: String, params: LowStorageParams },
    Asirk(crate::tableau::AsirkScheme),
    Imex { name: String, tableau: ImexTableau },
}

impl Method {
    /// Uses the three-register form whenever the coefficients follow its
    /// pattern (within the scheme's printing tolerance), and the all-stages
    /// form otherwise.
    pub fn from_scheme(scheme: &Scheme) -> Method {
        match scheme {
            Scheme::Asirk(s) => match is_low_storage(s, s.kind.tolerance()) {
                Some(params) => Method::LowStorage {
                    name: s.name.clone(),
                    params,
                },
                None => Method::Asirk(s.clone()),
            },
            Scheme::Imex { name, tableau, .. } => Method::Imex {
                name: name.clone(),
                tableau: tableau.clone(),
            },
        }
    }

    /// Forces the all-stages reference form.
    pub fn reference(scheme: &Scheme) -> Method {
        match scheme {
            Scheme::Asirk(s) => Method::Asirk(s.clone()),
            Scheme::Imex { name, tableau, .. } => Method::Imex {
                name: name.clone(),
                tableau: tableau.clone(),
            },
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Method::LowStorage { name, .. } | Method::Imex { name, .. } => name,
            Method::Asirk(s) => &s.name,
        }
    }

    pub fn stepper(&self, dim: usize, config: StepperConfig) -> Result<Box<dyn Stepper>> {
        config.validate()?;
        Ok(match self {
            Method::LowStorage { name, params } => Box::new(LowStorageStepper::new(name, params, dim, config)),
            Method::Asirk(s) => Box::new(AsirkReference::new(s, dim, config)),
            Method::Imex { name, tableau } => Box::new(ImexReference::new(
                name,
                &linalg::to_f64_matrix(&tableau.a_tilde),
                &linalg::to_f64_vector(&tableau.b_tilde),
                &linalg::to_f64_matrix(&tableau.a),
                &linalg::to_f64_vector(&tableau.b),
                dim,
                config,
            )),
        })
    }
}

/// Number of steps of size h from t0 to t_end; the ratio must be an integer
/// to within 1e-9 relative.
pub fn step_count(t0: f64, t_end: f64, h: f64) -> Result<usize> {
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(0);
    }
    if !(h > 0.0 && h.is_finite()) || !(span > 0.0 && span.is_finite()) {
        return Err(Error::Domain(format!(
            "need h > 0 and t_end ≥ t0, got h = {h}, [{t0}, {t_end}]"
        )));
    }
    let n = span / h;
    let rounded = n.round();
    if rounded < 1.0 || (n - rounded).abs() > 1e-9 * rounded {
        return Err(Error::NonIntegerSteps { span, h });
    }
    Ok(rounded as usize)
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub y: Vec<f64>,
    pub report: MemoryReport,
}

/// Integrates from y0 at t0 to t_end with fixed steps. The observer sees
/// (step index, t_n, y_n) for n = 0..=steps; nothing is stored otherwise.
pub fn integrate(
    stepper: &mut dyn Stepper,
    ode: &dyn SplitOde,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    h: f64,
    observer: &mut dyn FnMut(usize, f64, &[f64]),
) -> Result<RunOutput> {
    if y0.len() != ode.dim() {
        return Err(Error::Domain(format!(
            "initial value has length {} but {} has dimension {}",
            y0.len(),
            ode.name(),
            ode.dim()
        )));
    }
    let steps = step_count(t0, t_end, h)?;
    stepper.set_state(y0);
    observer(0, t0, stepper.state());
    for n in 0..steps {
        // Times are recomputed from t0 rather than accumulated.
        let t = t0 + n as f64 * h;
        stepper.step(ode, t, h).map_err(|e| Error::StepFailed {
            step: n,
            source: Box::new(e),
        })?;
        observer(n + 1, t0 + (n + 1) as f64 * h, stepper.state());
    }
    Ok(RunOutput {
        y: stepper.state().to_vec(),
        report: stepper.report(),
    })
}

/// Same as [`integrate`] without an observer.
pub fn integrate_quiet(
    stepper: &mut dyn Stepper,
    ode: &dyn SplitOde,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    h: f64,
) -> Result<RunOutput> {
    integrate(stepper, ode, y0, t0, t_end, h, &mut |_, _, _| {})
}

/// Formats a value with 17 significant digits, enough to round-trip f64.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Observer that streams `t,y1,…,yN` rows as CSV.
pub struct CsvTrajectory<W: Write> {
    out: W,
    error: Option<std::io::Error>,
}

impl<W: Write> CsvTrajectory<W> {
    pub fn new(mut out: W, dim: usize) -> std::io::Result<Self> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=dim).map(|i| format!("y{i}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvTrajectory { out, error: None })
    }

    pub fn observe(&mut self, _n: usize, t: f64, y: &[f64]) {
        if self.error.is_some() {
            return;
        }
        let mut row = format_f64(t);
        for v in y {
            row.push(',');
            row.push_str(&format_f64(*v));
        }
        if let Err(e) = writeln!(self.out, "{row}") {
            self.error = Some(e);
        }
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

pub(crate) fn check_finite(y: &[f64], t: f64) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Blowup { t })
    }
}

pub(crate) fn max_norm(y: &[f64]) -> f64 {
    y.iter().fold(0.0, |m, v| m.max(v.abs()))
}
