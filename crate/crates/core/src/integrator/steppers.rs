use super::{check_finite, Allocator, MemoryReport, SplitOde, StageSolver, Stepper, StepperConfig};
use crate::error::{Error, Result};
use crate::tableau::{AsirkScheme, LowStorageParams};

fn report(core: &Allocator, solver: Option<&StageSolver>, extra_scratch: usize, steps: usize) -> MemoryReport {
    let mut r = MemoryReport {
        core_registers: core.vectors,
        scratch_vectors: extra_scratch,
        steps,
        ..MemoryReport::default()
    };
    if let Some(s) = solver {
        r.scratch_vectors += s.scratch_vectors();
        r.scratch_matrices = s.scratch_matrices();
        r.inner_iterations = s.iterations;
        r.factorizations = s.factorizations;
        r.escalations = s.escalations;
    }
    r
}

fn scale(v: &mut [f64], h: f64) {
    for x in v {
        *x *= h;
    }
}

/// The three-register ASIRK step:
///
/// ```text
/// R1: Y_i = Y_{i−1} + ω_{i−1} K_{i−1}
/// R2: L_i = h f(Y_i + γ_{i−1} K_{i−1})
/// R3: K_i = L_i + h g(Y_i + λ_i K_i)
/// ```
///
/// R1 holds y_n on entry and y_{n+1} = Y_s + ω_s K_s on exit.
pub struct LowStorageStepper {
    name: String,
    omega: Vec<f64>,
    gamma: Vec<f64>,
    lambda: Vec<f64>,
    // Stage abscissae of the f and g arguments.
    c_f: Vec<f64>,
    c_g: Vec<f64>,
    core: Allocator,
    y: Vec<f64>,
    l: Vec<f64>,
    k: Vec<f64>,
    solver: StageSolver,
    steps: usize,
}

impl LowStorageStepper {
    pub fn new(name: &str, params: &LowStorageParams, dim: usize, config: StepperConfig) -> Self {
        let p = params.numeric();
        let s = p.omega.len();
        let mut c_f = vec![0.0; s];
        let mut c_g = vec![0.0; s];
        let mut partial = 0.0;
        for i in 0..s {
            if i > 0 {
                c_f[i] = partial + p.omega[i - 1] + p.gamma[i - 1];
                partial += p.omega[i - 1];
            }
            c_g[i] = partial + p.lambda[i];
        }
        let mut core = Allocator::default();
        let y = core.vector(dim);
        let l = core.vector(dim);
        let k = core.vector(dim);
        LowStorageStepper {
            name: name.to_string(),
            omega: p.omega,
            gamma: p.gamma,
            lambda: p.lambda,
            c_f,
            c_g,
            core,
            y,
            l,
            k,
            solver: StageSolver::new(dim, config),
            steps: 0,
        }
    }
}

impl Stepper for LowStorageStepper {
    fn name(&self) -> &str {
        &self.name
    }

    fn state(&self) -> &[f64] {
        &self.y
    }

    fn set_state(&mut self, y: &[f64]) {
        self.y.copy_from_slice(y);
    }

    fn step(&mut self, ode: &dyn SplitOde, t: f64, h: f64) -> Result<()> {
        let stiff = ode.has_stiff_part();
        let n = self.y.len();
        for i in 0..self.omega.len() {
            if i > 0 {
                let w = self.omega[i - 1];
                for j in 0..n {
                    self.y[j] += w * self.k[j];
                }
            }
            let arg = self.solver.scratch();
            if i > 0 {
                let g = self.gamma[i - 1];
                for j in 0..n {
                    arg[j] = self.y[j] + g * self.k[j];
                }
            } else {
                arg.copy_from_slice(&self.y);
            }
            ode.f(t + self.c_f[i] * h, arg, &mut self.l);
            scale(&mut self.l, h);
            self.k.copy_from_slice(&self.l);
            if stiff {
                self.solver
                    .solve(ode, t + self.c_g[i] * h, &self.y, h, self.lambda[i], Some(&self.l), &mut self.k)?;
            }
        }
        let w = self.omega[self.omega.len() - 1];
        for j in 0..n {
            self.y[j] += w * self.k[j];
        }
        self.steps += 1;
        check_finite(&self.y, t + h)
    }

    fn report(&self) -> MemoryReport {
        report(&self.core, Some(&self.solver), 0, self.steps)
    }
}

/// Two-register explicit Runge-Kutta in van der Houwen form:
/// Y_i = Y_{i−1} + b_{i−1} K_{i−1}, K_i = h f(Y_i + γ_{i−1} K_{i−1}).
pub struct VanDerHouwen {
    name: String,
    weights: Vec<f64>,
    gamma: Vec<f64>,
    c_f: Vec<f64>,
    core: Allocator,
    y: Vec<f64>,
    k: Vec<f64>,
    // Argument buffer for f; not needed when f can be evaluated in place.
    arg: Vec<f64>,
    steps: usize,
}

impl VanDerHouwen {
    pub fn new(name: &str, weights: &[f64], gamma: &[f64], dim: usize) -> Result<Self> {
        if weights.is_empty() || gamma.len() + 1 != weights.len() {
            return Err(Error::InvalidScheme(format!(
                "van der Houwen form needs |gamma| = |b| − 1, got {} and {}",
                gamma.len(),
                weights.len()
            )));
        }
        let mut c_f = vec![0.0; weights.len()];
        let mut partial = 0.0;
        for i in 1..weights.len() {
            c_f[i] = partial + weights[i - 1] + gamma[i - 1];
            partial += weights[i - 1];
        }
        let mut core = Allocator::default();
        let y = core.vector(dim);
        let k = core.vector(dim);
        Ok(VanDerHouwen {
            name: name.to_string(),
            weights: weights.to_vec(),
            gamma: gamma.to_vec(),
            c_f,
            core,
            y,
            k,
            arg: vec![0.0; dim],
            steps: 0,
        })
    }

    /// The explicit part of a three-register scheme: b = ω, same γ.
    pub fn from_params(name: &str, params: &LowStorageParams, dim: usize) -> Self {
        let p = params.numeric();
        Self::new(name, &p.omega, &p.gamma, dim).expect("parameter lengths validated")
    }
}

impl Stepper for VanDerHouwen {
    fn name(&self) -> &str {
        &self.name
    }

    fn state(&self) -> &[f64] {
        &self.y
    }

    fn set_state(&mut self, y: &[f64]) {
        self.y.copy_from_slice(y);
    }

    fn step(&mut self, ode: &dyn SplitOde, t: f64, h: f64) -> Result<()> {
        let n = self.y.len();
        for i in 0..self.weights.len() {
            if i > 0 {
                let w = self.weights[i - 1];
                for j in 0..n {
                    self.y[j] += w * self.k[j];
                }
                let g = self.gamma[i - 1];
                for j in 0..n {
                    self.arg[j] = self.y[j] + g * self.k[j];
                }
            } else {
                self.arg.copy_from_slice(&self.y);
            }
            ode.f(t + self.c_f[i] * h, &self.arg, &mut self.k);
            scale(&mut self.k, h);
        }
        let w = self.weights[self.weights.len() - 1];
        for j in 0..n {
            self.y[j] += w * self.k[j];
        }
        self.steps += 1;
        check_finite(&self.y, t + h)
    }

    fn report(&self) -> MemoryReport {
        report(&self.core, None, 1, self.steps)
    }
}

/// Two-register DIRK: Y_i = W_{i−1} + h a_ii g(Y_i), W_i = α_i Y_i + β_i W_{i−1},
/// β_i = 1 − α_i, with W_0 = y_n and W_s = y_{n+1}.
pub struct DirkTwoRegister {
    name: String,
    diag: Vec<f64>,
    alpha: Vec<f64>,
    c: Vec<f64>,
    core: Allocator,
    w: Vec<f64>,
    stage: Vec<f64>,
    solver: StageSolver,
    steps: usize,
}

impl DirkTwoRegister {
    /// From the diagonal a_ii and the ratios α_i; no pattern check is made.
    pub fn new(name: &str, diag: &[f64], alpha: &[f64], dim: usize, config: StepperConfig) -> Result<Self> {
        if diag.is_empty() || diag.len() != alpha.len() || diag.iter().any(|d| *d == 0.0) {
            return Err(Error::InvalidScheme(
                "two-register DIRK needs matching nonzero diagonal and α of equal length".into(),
            ));
        }
        // b_j = α_j a_jj, and c_i = Σ_{j<i} b_j + a_ii.
        let mut c = vec![0.0; diag.len()];
        let mut partial = 0.0;
        for i in 0..diag.len() {
            c[i] = partial + diag[i];
            partial += alpha[i] * diag[i];
        }
        let mut core = Allocator::default();
        let w = core.vector(dim);
        let stage = core.vector(dim);
        Ok(DirkTwoRegister {
            name: name.to_string(),
            diag: diag.to_vec(),
            alpha: alpha.to_vec(),
            c,
            core,
            w,
            stage,
            solver: StageSolver::new(dim, config),
            steps: 0,
        })
    }

    /// Checks that (A, b) has the two-register pattern a_{k,i} = b_i for all
    /// k > i, within `tol`, and returns (diag, α) with α_i = b_i / a_ii.
    pub fn pattern(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let s = b.len();
        if a.len() != s || a.iter().any(|r| r.len() != s) {
            return None;
        }
        for i in 0..s {
            if a[i][i] == 0.0 || a[i][i + 1..].iter().any(|x| *x != 0.0) {
                return None;
            }
            if (i + 1..s).any(|k| (a[k][i] - b[i]).abs() > tol) {
                return None;
            }
        }
        let diag: Vec<f64> = (0..s).map(|i| a[i][i]).collect();
        let alpha = (0..s).map(|i| b[i] / diag[i]).collect();
        Some((diag, alpha))
    }

    pub fn from_tableau(
        name: &str,
        a: &[Vec<f64>],
        b: &[f64],
        tol: f64,
        dim: usize,
        config: StepperConfig,
    ) -> Result<Self> {
        let (diag, alpha) = Self::pattern(a, b, tol).ok_or_else(|| {
            Error::InvalidScheme(format!("{name}: DIRK tableau lacks the two-register pattern"))
        })?;
        Self::new(name, &diag, &alpha, dim, config)
    }

    /// The implicit part of a three-register scheme: a_ii = λ_i, b = ω.
    pub fn from_params(name: &str, params: &LowStorageParams, dim: usize, config: StepperConfig) -> Result<Self> {
        let p = params.numeric();
        let alpha: Vec<f64> = p.omega.iter().zip(&p.lambda).map(|(w, l)| w / l).collect();
        Self::new(name, &p.lambda, &alpha, dim, config)
    }
}

impl Stepper for DirkTwoRegister {
    fn name(&self) -> &str {
        &self.name
    }

    fn state(&self) -> &[f64] {
        &self.w
    }

    fn set_state(&mut self, y: &[f64]) {
        self.w.copy_from_slice(y);
    }

    fn step(&mut self, ode: &dyn SplitOde, t: f64, h: f64) -> Result<()> {
        let n = self.w.len();
        for i in 0..self.diag.len() {
            // The stage register first holds K_i = h g(Y_i), then Y_i itself.
            self.stage.fill(0.0);
            if ode.has_stiff_part() {
                self.solver
                    .solve(ode, t + self.c[i] * h, &self.w, h, self.diag[i], None, &mut self.stage)?;
            }
            let (d, a) = (self.diag[i], self.alpha[i]);
            for j in 0..n {
                let y = self.w[j] + d * self.stage[j];
                self.w[j] = a * y + (1.0 - a) * self.w[j];
            }
        }
        self.steps += 1;
        check_finite(&self.w, t + h)
    }

    fn report(&self) -> MemoryReport {
        report(&self.core, Some(&self.solver), 0, self.steps)
    }
}

/// All-stages ASIRK step: stores every K_i and uses the full (ℬ, 𝒞, ω).
pub struct AsirkReference {
    name: String,
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    omega: Vec<f64>,
    c_f: Vec<f64>,
    c_g: Vec<f64>,
    core: Allocator,
    y: Vec<f64>,
    ks: Vec<Vec<f64>>,
    l: Vec<f64>,
    arg: Vec<f64>,
    solver: StageSolver,
    steps: usize,
}

impl AsirkReference {
    pub fn new(scheme: &AsirkScheme, dim: usize, config: StepperConfig) -> Self {
        let num = scheme.numeric();
        let s = num.omega.len();
        let c_f = num.b.iter().map(|r| r.iter().sum()).collect();
        let c_g = num.c.iter().map(|r| r.iter().sum()).collect();
        let mut core = Allocator::default();
        let y = core.vector(dim);
        let ks = (0..s).map(|_| core.vector(dim)).collect();
        let l = core.vector(dim);
        let arg = core.vector(dim);
        AsirkReference {
            name: scheme.name.clone(),
            b: num.b,
            c: num.c,
            omega: num.omega,
            c_f,
            c_g,
            core,
            y,
            ks,
            l,
            arg,
            solver: StageSolver::new(dim, config),
            steps: 0,
        }
    }

    /// K_1 … K_s of the last step.
    pub fn stage_derivatives(&self) -> &[Vec<f64>] {
        &self.ks
    }
}

impl Stepper for AsirkReference {
    fn name(&self) -> &str {
        &self.name
    }

    fn state(&self) -> &[f64] {
        &self.y
    }

    fn set_state(&mut self, y: &[f64]) {
        self.y.copy_from_slice(y);
    }

    fn step(&mut self, ode: &dyn SplitOde, t: f64, h: f64) -> Result<()> {
        let n = self.y.len();
        let s = self.omega.len();
        for i in 0..s {
            let (done, rest) = self.ks.split_at_mut(i);
            let ki = &mut rest[0];
            self.arg.copy_from_slice(&self.y);
            for (j, kj) in done.iter().enumerate() {
                let bij = self.b[i][j];
                for m in 0..n {
                    self.arg[m] += bij * kj[m];
                }
            }
            ode.f(t + self.c_f[i] * h, &self.arg, &mut self.l);
            scale(&mut self.l, h);
            self.arg.copy_from_slice(&self.y);
            for (j, kj) in done.iter().enumerate() {
                let cij = self.c[i][j];
                for m in 0..n {
                    self.arg[m] += cij * kj[m];
                }
            }
            ki.copy_from_slice(&self.l);
            if ode.has_stiff_part() {
                self.solver
                    .solve(ode, t + self.c_g[i] * h, &self.arg, h, self.c[i][i], Some(&self.l), ki)?;
            }
        }
        for (w, k) in self.omega.iter().zip(&self.ks) {
            for m in 0..n {
                self.y[m] += w * k[m];
            }
        }
        self.steps += 1;
        check_finite(&self.y, t + h)
    }

    fn report(&self) -> MemoryReport {
        report(&self.core, Some(&self.solver), 0, self.steps)
    }
}

/// Standard IMEX step with explicit Ã and diagonally implicit A:
/// Y_i = y + Σ_{j<i} ã_ij hf(Y_j) + Σ_{j≤i} a_ij hg(Y_j).
pub struct ImexReference {
    name: String,
    a_tilde: Vec<Vec<f64>>,
    b_tilde: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c_tilde: Vec<f64>,
    c: Vec<f64>,
    // Stages whose f or g value is never read again are not evaluated.
    need_f: Vec<bool>,
    need_g: Vec<bool>,
    core: Allocator,
    y: Vec<f64>,
    hf: Vec<Vec<f64>>,
    hg: Vec<Vec<f64>>,
    stage: Vec<f64>,
    solver: StageSolver,
    steps: usize,
}

impl ImexReference {
    pub fn new(
        name: &str,
        a_tilde: &[Vec<f64>],
        b_tilde: &[f64],
        a: &[Vec<f64>],
        b: &[f64],
        dim: usize,
        config: StepperConfig,
    ) -> Self {
        let s = b.len();
        let need_f = (0..s).map(|j| b_tilde[j] != 0.0 || (j + 1..s).any(|i| a_tilde[i][j] != 0.0)).collect();
        let need_g = (0..s).map(|j| b[j] != 0.0 || (j + 1..s).any(|i| a[i][j] != 0.0)).collect();
        let mut core = Allocator::default();
        let y = core.vector(dim);
        let hf = (0..s).map(|_| core.vector(dim)).collect();
        let hg = (0..s).map(|_| core.vector(dim)).collect();
        let stage = core.vector(dim);
        ImexReference {
            name: name.to_string(),
            a_tilde: a_tilde.to_vec(),
            b_tilde: b_tilde.to_vec(),
            a: a.to_vec(),
            b: b.to_vec(),
            c_tilde: a_tilde.iter().map(|r| r.iter().sum()).collect(),
            c: a.iter().map(|r| r.iter().sum()).collect(),
            need_f,
            need_g,
            core,
            y,
            hf,
            hg,
            stage,
            solver: StageSolver::new(dim, config),
            steps: 0,
        }
    }
}

impl Stepper for ImexReference {
    fn name(&self) -> &str {
        &self.name
    }

    fn state(&self) -> &[f64] {
        &self.y
    }

    fn set_state(&mut self, y: &[f64]) {
        self.y.copy_from_slice(y);
    }

    fn step(&mut self, ode: &dyn SplitOde, t: f64, h: f64) -> Result<()> {
        let n = self.y.len();
        let s = self.b.len();
        let stiff = ode.has_stiff_part();
        for i in 0..s {
            self.stage.copy_from_slice(&self.y);
            for j in 0..i {
                let (at, a) = (self.a_tilde[i][j], self.a[i][j]);
                for m in 0..n {
                    self.stage[m] += at * self.hf[j][m] + a * self.hg[j][m];
                }
            }
            let aii = self.a[i][i];
            let kg = &mut self.hg[i];
            if !stiff {
                kg.fill(0.0);
            } else if aii == 0.0 {
                if self.need_g[i] {
                    ode.g(t + self.c[i] * h, &self.stage, kg);
                    scale(kg, h);
                }
            } else {
                // Y_i = base + a_ii K with K = h g(base + a_ii K).
                kg.fill(0.0);
                self.solver.solve(ode, t + self.c[i] * h, &self.stage, h, aii, None, kg)?;
                for m in 0..n {
                    self.stage[m] += aii * kg[m];
                }
            }
            if self.need_f[i] {
                ode.f(t + self.c_tilde[i] * h, &self.stage, &mut self.hf[i]);
                scale(&mut self.hf[i], h);
            }
        }
        for i in 0..s {
            let (bt, b) = (self.b_tilde[i], self.b[i]);
            for m in 0..n {
                self.y[m] += bt * self.hf[i][m] + b * self.hg[i][m];
            }
        }
        self.steps += 1;
        check_finite(&self.y, t + h)
    }

    fn report(&self) -> MemoryReport {
        report(&self.core, Some(&self.solver), 0, self.steps)
    }
}
