//! Benchmark problems: a stiff prototype, van der Pol, the Broadwell
//! relaxation model, a population model with diffusion, and a linear
//! relaxation model with closed-form solution.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, step_count, Method, SplitOde, StepperConfig};
use crate::tableau::{catalog, Scheme};

pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 42;

/// Initial data relative to the slow manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InitialVariant {
    /// Off the manifold by δ: the solution has an initial layer.
    #[serde(rename = "IC_InVal")]
    Inconsistent,
    /// On the leading-order manifold.
    #[serde(rename = "C_InVal")]
    Consistent,
    /// Expanded in ε so that no layer forms.
    #[serde(rename = "WP_InVal")]
    WellPrepared,
}

impl InitialVariant {
    pub const ALL: [InitialVariant; 3] = [
        InitialVariant::Inconsistent,
        InitialVariant::Consistent,
        InitialVariant::WellPrepared,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            InitialVariant::Inconsistent => "IC_InVal",
            InitialVariant::Consistent => "C_InVal",
            InitialVariant::WellPrepared => "WP_InVal",
        }
    }
}

impl fmt::Display for InitialVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for InitialVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
        match key.as_str() {
            "icinval" | "ic" | "inconsistent" => Ok(InitialVariant::Inconsistent),
            "cinval" | "c" | "consistent" => Ok(InitialVariant::Consistent),
            "wpinval" | "wp" | "wellprepared" => Ok(InitialVariant::WellPrepared),
            _ => Err(Error::Parse {
                input: s.to_string(),
                message: "expected IC_InVal, C_InVal or WP_InVal".into(),
            }),
        }
    }
}

/// Interval and step of a problem's canonical run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub t0: f64,
    pub t_end: f64,
    pub h: f64,
}

/// A named slice of the state used for per-component error reporting.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub name: String,
    pub range: Range<usize>,
}

fn components(names: &[&str], block: usize) -> Vec<Component> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| Component {
            name: n.to_string(),
            range: i * block..(i + 1) * block,
        })
        .collect()
}

/// A problem instance: right-hand side, initial value and canonical run.
pub struct Problem {
    pub spec: ProblemSpec,
    pub ode: Box<dyn SplitOde + Send>,
    pub y0: Vec<f64>,
    pub run: RunSpec,
    pub components: Vec<Component>,
}

impl Problem {
    pub fn name(&self) -> &str {
        self.ode.name()
    }
}

// ---------------------------------------------------------------------------
// u' = −v, v' = u + (sin u − v)/ε

pub struct Prototype {
    pub eps: f64,
}

impl SplitOde for Prototype {
    fn name(&self) -> &str {
        "prototype"
    }

    fn dim(&self) -> usize {
        2
    }

    fn f(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        out[0] = -y[1];
        out[1] = y[0];
    }

    fn g(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        out[1] = (y[0].sin() - y[1]) / self.eps;
    }

    fn g_jacobian(&self, _t: f64, y: &[f64], jac: &mut DMatrix<f64>) -> bool {
        jac[(1, 0)] = y[0].cos() / self.eps;
        jac[(1, 1)] = -1.0 / self.eps;
        true
    }
}

pub fn prototype(eps: f64, variant: InitialVariant, delta: f64) -> Result<Problem> {
    positive("eps", eps)?;
    let u0 = PI / 2.0;
    let v0 = match variant {
        InitialVariant::Consistent => 1.0,
        InitialVariant::Inconsistent => 1.0 + delta,
        InitialVariant::WellPrepared => 1.0 + u0 * eps - u0 * eps.powi(3),
    };
    Ok(Problem {
        spec: ProblemSpec::Prototype { eps, variant, delta },
        ode: Box::new(Prototype { eps }),
        y0: vec![u0, v0],
        run: RunSpec {
            t0: 0.0,
            t_end: 1.0,
            h: 0.05,
        },
        components: components(&["u", "v"], 1),
    })
}

// ---------------------------------------------------------------------------
// y' = z, z' = ((1 − y²) z − y)/ε

pub struct VanDerPol {
    pub eps: f64,
}

impl SplitOde for VanDerPol {
    fn name(&self) -> &str {
        "van-der-pol"
    }

    fn dim(&self) -> usize {
        2
    }

    fn f(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        out[0] = y[1];
        out[1] = 0.0;
    }

    fn g(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        out[1] = ((1.0 - y[0] * y[0]) * y[1] - y[0]) / self.eps;
    }

    fn g_jacobian(&self, _t: f64, y: &[f64], jac: &mut DMatrix<f64>) -> bool {
        jac[(1, 0)] = (-2.0 * y[0] * y[1] - 1.0) / self.eps;
        jac[(1, 1)] = (1.0 - y[0] * y[0]) / self.eps;
        true
    }
}

/// The printed endpoint 0.55139 is not a multiple of h = 0.05; the
/// canonical run stops at 0.55 (11 steps).
pub fn van_der_pol(eps: f64, variant: InitialVariant, delta: f64) -> Result<Problem> {
    positive("eps", eps)?;
    let z0 = match variant {
        InitialVariant::Consistent => -2.0 / 3.0,
        InitialVariant::Inconsistent => -2.0 / 3.0 + delta,
        InitialVariant::WellPrepared => {
            -2.0 / 3.0 + 10.0 / 81.0 * eps - 292.0 / 2187.0 * eps.powi(2) - 1814.0 / 19683.0 * eps.powi(3)
        }
    };
    Ok(Problem {
        spec: ProblemSpec::VanDerPol { eps, variant, delta },
        ode: Box::new(VanDerPol { eps }),
        y0: vec![2.0, z0],
        run: RunSpec {
            t0: 0.0,
            t_end: 0.55,
            h: 0.05,
        },
        components: components(&["y", "z"], 1),
    })
}

// ---------------------------------------------------------------------------
// Broadwell moment equations on a periodic grid; state [ρ…, m…, z…].

pub struct Broadwell {
    pub eps: f64,
    pub dx: f64,
    pub points: usize,
}

impl SplitOde for Broadwell {
    fn name(&self) -> &str {
        "broadwell"
    }

    fn dim(&self) -> usize {
        3 * self.points
    }

    fn f(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.points;
        let (m, z) = y[n..].split_at(n);
        let c = 1.0 / (2.0 * self.dx);
        for j in 0..n {
            let (jp, jm) = ((j + 1) % n, (j + n - 1) % n);
            let dm = m[jp] - m[jm];
            let dz = z[jp] - z[jm];
            let lm = m[jp] - 2.0 * m[j] + m[jm];
            let lz = z[jp] - 2.0 * z[j] + z[jm];
            out[j] = c * (lz - dm);
            out[n + j] = c * (lm - dz);
            out[2 * n + j] = c * (lz - dm);
        }
    }

    fn g(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.points;
        out[..2 * n].fill(0.0);
        for j in 0..n {
            let (rho, m, z) = (y[j], y[n + j], y[2 * n + j]);
            out[2 * n + j] = (rho * rho + m * m - 2.0 * rho * z) / (2.0 * self.eps);
        }
    }

    fn g_jacobian(&self, _t: f64, y: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let n = self.points;
        for j in 0..n {
            let (rho, m, z) = (y[j], y[n + j], y[2 * n + j]);
            let r = 2 * n + j;
            jac[(r, j)] = (rho - z) / self.eps;
            jac[(r, n + j)] = m / self.eps;
            jac[(r, r)] = -rho / self.eps;
        }
        true
    }
}

/// Amplitudes of the sinusoidal initial profiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BroadwellProfile {
    pub a_p: f64,
    pub a_u: f64,
}

impl Default for BroadwellProfile {
    fn default() -> Self {
        BroadwellProfile { a_p: 0.3, a_u: 0.1 }
    }
}

/// Local equilibrium z_E = (ρ² + m²)/(2ρ).
pub fn broadwell_equilibrium(rho: f64, m: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("density must be positive, got {rho}")));
    }
    Ok((rho * rho + m * m) / (2.0 * rho))
}

/// Grid on [−1, 1] at cell centres x_j = −1 + (j + ½)Δx.
pub fn broadwell(
    eps: f64,
    variant: InitialVariant,
    delta: f64,
    dx: f64,
    profile: BroadwellProfile,
) -> Result<Problem> {
    positive("eps", eps)?;
    positive("dx", dx)?;
    let length = 2.0;
    let ratio = length / dx;
    let points = ratio.round();
    if points < 3.0 || (ratio - points).abs() > 1e-9 * points {
        return Err(Error::Domain(format!("dx = {dx} must divide the domain length 2 into at least 3 cells")));
    }
    let points = points as usize;
    let k = 2.0 * PI / length;
    let mut y0 = vec![0.0; 3 * points];
    for j in 0..points {
        let x = -1.0 + (j as f64 + 0.5) * dx;
        let (s, c) = (k * x).sin_cos();
        let rho = 1.0 + profile.a_p * s;
        let u = 0.5 + profile.a_u * s;
        let m = rho * u;
        let zeq = broadwell_equilibrium(rho, m)?;
        let z = match variant {
            InitialVariant::Consistent => zeq,
            InitialVariant::Inconsistent => zeq + delta,
            InitialVariant::WellPrepared => {
                let drho_dx = profile.a_p * k * c;
                let dm_dx = drho_dx * u + rho * profile.a_u * k * c;
                let dz_drho = 0.5 - m * m / (2.0 * rho * rho);
                let dz_dm = m / rho;
                let big_h = (-1.0 + dz_drho + dz_dm * dz_dm) * dm_dx + dz_drho * dz_dm * drho_dx;
                zeq + eps * big_h / (2.0 * rho)
            }
        };
        y0[j] = rho;
        y0[points + j] = m;
        y0[2 * points + j] = z;
    }
    Ok(Problem {
        spec: ProblemSpec::Broadwell {
            eps,
            variant,
            delta,
            dx,
            profile,
        },
        ode: Box::new(Broadwell { eps, dx, points }),
        y0,
        run: RunSpec {
            t0: 0.0,
            t_end: 0.5,
            h: 0.05,
        },
        components: components(&["rho", "m", "z"], points),
    })
}

// ---------------------------------------------------------------------------
// Population density with saturating birth rate and periodic diffusion.

pub const POPULATION_POINTS: usize = 100;
const BIRTH_SATURATION: f64 = 0.005;
const DEATH_RATE: f64 = 1.0;

pub struct Population {
    pub d: f64,
    birth: Vec<f64>,
    laplacian: DMatrix<f64>,
}

impl Population {
    pub fn new(d: f64) -> Self {
        let n = POPULATION_POINTS;
        let dx = 1.0 / n as f64;
        let c = d / (dx * dx);
        let mut laplacian = DMatrix::zeros(n, n);
        for i in 0..n {
            laplacian[(i, i)] = -2.0 * c;
            laplacian[(i, (i + 1) % n)] += c;
            laplacian[(i, (i + n - 1) % n)] += c;
        }
        // x_i = i/100; r_b = 1 on [0, 1/2], 100 on (1/2, 1].
        let birth = (0..n).map(|i| if 2 * i <= n { 1.0 } else { 100.0 }).collect();
        Population { d, birth, laplacian }
    }

    pub fn birth_rate(&self, i: usize) -> f64 {
        self.birth[i]
    }
}

/// b(x, P) = r_b(x) ε_b / (ε_b + P).
pub fn birth(rb: f64, p: f64) -> f64 {
    rb * BIRTH_SATURATION / (BIRTH_SATURATION + p)
}

impl SplitOde for Population {
    fn name(&self) -> &str {
        "population"
    }

    fn dim(&self) -> usize {
        POPULATION_POINTS
    }

    fn f(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        for i in 0..y.len() {
            out[i] = birth(self.birth[i], y[i]) - DEATH_RATE * y[i];
        }
    }

    fn g(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        let n = y.len();
        let c = self.laplacian[(0, 1)];
        for i in 0..n {
            out[i] = c * (y[(i + 1) % n] - 2.0 * y[i] + y[(i + n - 1) % n]);
        }
    }

    fn g_jacobian(&self, _t: f64, _y: &[f64], jac: &mut DMatrix<f64>) -> bool {
        jac.copy_from(&self.laplacian);
        true
    }

    fn g_linear(&self) -> Option<&DMatrix<f64>> {
        Some(&self.laplacian)
    }
}

/// Values 0.8 + 0.4u per grid point, u = (next_u64 >> 11)·2⁻⁵³ from
/// SplitMix64 seeded with `seed`.
pub fn population_forcing(seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..POPULATION_POINTS)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            0.8 + 0.4 * u
        })
        .collect()
}

/// The forcing acts only at t = 0 on a zero initial density; it enters as a
/// unit impulse, i.e. as the initial value. The interval [0, 20] holds nine
/// steps of h = 20/9.
pub fn population(d: f64, seed: u64) -> Result<Problem> {
    positive("d", d)?;
    Ok(Problem {
        spec: ProblemSpec::Population { d, seed },
        ode: Box::new(Population::new(d)),
        y0: population_forcing(seed),
        run: RunSpec {
            t0: 0.0,
            t_end: 20.0,
            h: 20.0 / 9.0,
        },
        components: components(&["P"], POPULATION_POINTS),
    })
}

// ---------------------------------------------------------------------------
// u' = δ₁u + σ₁v, v' = δ₂u + σ₂v + (cu − v)/ε

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRelaxationModel {
    pub delta1: f64,
    pub sigma1: f64,
    pub delta2: f64,
    pub sigma2: f64,
    pub c: f64,
    pub eps: f64,
}

impl LinearRelaxationModel {
    pub fn a_hat(&self) -> f64 {
        self.delta1 + self.sigma1 * self.c
    }

    pub fn b_hat(&self) -> f64 {
        self.delta2 + (self.sigma2 - self.delta1) * self.c - self.sigma1 * self.c * self.c
    }

    /// Full system matrix of the unsplit problem.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [
            [self.delta1, self.sigma1],
            [self.delta2 + self.c / self.eps, self.sigma2 - 1.0 / self.eps],
        ]
    }

    /// exp(hA) y0 in closed form.
    pub fn exact(&self, h: f64, y0: [f64; 2]) -> [f64; 2] {
        let e = expm2(self.matrix(), h);
        [e[0][0] * y0[0] + e[0][1] * y0[1], e[1][0] * y0[0] + e[1][1] * y0[1]]
    }

    /// One-step expansion of the exact solution for consistent data
    /// v0 = c u0, valid up to O(h³, hε²).
    pub fn expansion(&self, h: f64, u0: f64) -> [f64; 2] {
        let (a, b, eps) = (self.a_hat(), self.b_hat(), self.eps);
        let grow = 1.0 + a * h + 0.5 * a * a * h * h;
        [
            u0 * (grow + self.sigma1 * b * h * eps),
            u0 * (grow * self.c + b * eps + (a + self.sigma1 * self.c) * b * h * eps),
        ]
    }
}

/// exp(hA) for a 2×2 matrix. With m = tr/2, B = A − mI and w = h²(m² − det)
/// one has B² = (m² − det) I, so exp(hA) = e^{hm}(C(w) I + h S(w) B) with
/// C = cosh √w, S = sinh √w / √w. Real distinct eigenvalues use Sylvester's
/// formula instead, which avoids e^{hm}·cosh overflow when A is stiff.
pub fn expm2(a: [[f64; 2]; 2], h: f64) -> [[f64; 2]; 2] {
    let m = 0.5 * (a[0][0] + a[1][1]);
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = m * m - det;
    let w = h * h * disc;
    let b = [[a[0][0] - m, a[0][1]], [a[1][0], a[1][1] - m]];
    let combine = |scale: f64, cc: f64, ss: f64| {
        [
            [scale * (cc + h * ss * b[0][0]), scale * h * ss * b[0][1]],
            [scale * h * ss * b[1][0], scale * (cc + h * ss * b[1][1])],
        ]
    };
    if w.abs() < 1e-2 {
        // Series in w; 8 terms leave a remainder below 1e-20.
        let (mut cc, mut ss) = (0.0, 0.0);
        let mut term = 1.0;
        for k in 0..8 {
            cc += term / factorial(2 * k);
            ss += term / factorial(2 * k + 1);
            term *= w;
        }
        combine((h * m).exp(), cc, ss)
    } else if w < 0.0 {
        let omega = (-disc).sqrt();
        combine((h * m).exp(), (h * omega).cos(), (h * omega).sin() / (h * omega))
    } else {
        let q = disc.sqrt();
        // The eigenvalue of larger magnitude is computed directly, the other
        // from the product so that neither suffers cancellation.
        let big = if m >= 0.0 { m + q } else { m - q };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (e_big, e_small) = ((h * big).exp(), (h * small).exp());
        let span = big - small;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                *v = (e_big * (a[i][j] - small * id) - e_small * (a[i][j] - big * id)) / span;
            }
        }
        out
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub struct LinearRelaxation {
    pub model: LinearRelaxationModel,
    stiff: DMatrix<f64>,
}

impl LinearRelaxation {
    pub fn new(model: LinearRelaxationModel) -> Self {
        let mut stiff = DMatrix::zeros(2, 2);
        stiff[(1, 0)] = model.c / model.eps;
        stiff[(1, 1)] = -1.0 / model.eps;
        LinearRelaxation { model, stiff }
    }
}

impl SplitOde for LinearRelaxation {
    fn name(&self) -> &str {
        "linear-relaxation"
    }

    fn dim(&self) -> usize {
        2
    }

    fn f(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        let p = &self.model;
        out[0] = p.delta1 * y[0] + p.sigma1 * y[1];
        out[1] = p.delta2 * y[0] + p.sigma2 * y[1];
    }

    fn g(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        out[1] = (self.model.c * y[0] - y[1]) / self.model.eps;
    }

    fn g_jacobian(&self, _t: f64, _y: &[f64], jac: &mut DMatrix<f64>) -> bool {
        jac.copy_from(&self.stiff);
        true
    }

    fn g_linear(&self) -> Option<&DMatrix<f64>> {
        Some(&self.stiff)
    }
}

/// Consistent data u0 = 1, v0 = c on [0, h].
pub fn linear_relaxation(model: LinearRelaxationModel, h: f64) -> Result<Problem> {
    positive("eps", model.eps)?;
    Ok(Problem {
        spec: ProblemSpec::LinearRelaxation(model),
        ode: Box::new(LinearRelaxation::new(model)),
        y0: vec![1.0, model.c],
        run: RunSpec { t0: 0.0, t_end: h, h },
        components: components(&["u", "v"], 1),
    })
}

fn positive(what: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive and finite, got {x}")))
    }
}

// ---------------------------------------------------------------------------
// Registry

/// Everything needed to rebuild a problem, e.g. at another ε.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum ProblemSpec {
    Prototype {
        eps: f64,
        variant: InitialVariant,
        delta: f64,
    },
    VanDerPol {
        eps: f64,
        variant: InitialVariant,
        delta: f64,
    },
    Broadwell {
        eps: f64,
        variant: InitialVariant,
        delta: f64,
        dx: f64,
        profile: BroadwellProfile,
    },
    Population {
        d: f64,
        seed: u64,
    },
    LinearRelaxation(LinearRelaxationModel),
}

pub const PROBLEM_NAMES: [&str; 5] = ["prototype", "van-der-pol", "broadwell", "population", "linear-relaxation"];

impl ProblemSpec {
    /// Default instance of a named problem with stiffness ε (or diffusion d
    /// for the population model) and the given initial variant.
    pub fn named(name: &str, eps: f64, variant: InitialVariant) -> Result<Self> {
        let key = name.to_ascii_lowercase().replace(['_', ' '], "-");
        Ok(match key.as_str() {
            "prototype" => ProblemSpec::Prototype {
                eps,
                variant,
                delta: DEFAULT_DELTA,
            },
            "van-der-pol" | "vanderpol" | "vdp" => ProblemSpec::VanDerPol {
                eps,
                variant,
                delta: DEFAULT_DELTA,
            },
            "broadwell" => ProblemSpec::Broadwell {
                eps,
                variant,
                delta: DEFAULT_DELTA,
                dx: 0.2,
                profile: BroadwellProfile::default(),
            },
            "population" => ProblemSpec::Population {
                d: eps,
                seed: DEFAULT_SEED,
            },
            "linear-relaxation" | "relaxation" => ProblemSpec::LinearRelaxation(LinearRelaxationModel {
                delta1: 0.0,
                sigma1: 1.0,
                delta2: 1.0,
                sigma2: 0.0,
                c: 0.5,
                eps,
            }),
            _ => {
                return Err(Error::Parse {
                    input: name.to_string(),
                    message: format!("unknown problem; expected one of {}", PROBLEM_NAMES.join(", ")),
                })
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Prototype { .. } => "prototype",
            ProblemSpec::VanDerPol { .. } => "van-der-pol",
            ProblemSpec::Broadwell { .. } => "broadwell",
            ProblemSpec::Population { .. } => "population",
            ProblemSpec::LinearRelaxation(_) => "linear-relaxation",
        }
    }

    /// Stiffness parameter (diffusion coefficient for the population model).
    pub fn eps(&self) -> f64 {
        match *self {
            ProblemSpec::Prototype { eps, .. }
            | ProblemSpec::VanDerPol { eps, .. }
            | ProblemSpec::Broadwell { eps, .. } => eps,
            ProblemSpec::Population { d, .. } => d,
            ProblemSpec::LinearRelaxation(m) => m.eps,
        }
    }

    pub fn variant(&self) -> Option<InitialVariant> {
        match *self {
            ProblemSpec::Prototype { variant, .. }
            | ProblemSpec::VanDerPol { variant, .. }
            | ProblemSpec::Broadwell { variant, .. } => Some(variant),
            _ => None,
        }
    }

    pub fn with_eps(mut self, value: f64) -> Self {
        match &mut self {
            ProblemSpec::Prototype { eps, .. }
            | ProblemSpec::VanDerPol { eps, .. }
            | ProblemSpec::Broadwell { eps, .. } => *eps = value,
            ProblemSpec::Population { d, .. } => *d = value,
            ProblemSpec::LinearRelaxation(m) => m.eps = value,
        }
        self
    }

    pub fn build(&self) -> Result<Problem> {
        match *self {
            ProblemSpec::Prototype { eps, variant, delta } => prototype(eps, variant, delta),
            ProblemSpec::VanDerPol { eps, variant, delta } => van_der_pol(eps, variant, delta),
            ProblemSpec::Broadwell {
                eps,
                variant,
                delta,
                dx,
                profile,
            } => broadwell(eps, variant, delta, dx, profile),
            ProblemSpec::Population { d, seed } => population(d, seed),
            ProblemSpec::LinearRelaxation(m) => linear_relaxation(m, 1e-2),
        }
    }
}

// ---------------------------------------------------------------------------
// Reference solutions

/// Fine-step solution sampled on a coarse grid, with an estimate of its own
/// error from a second run at half the fine step.
#[derive(Clone, Debug)]
pub struct Reference {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub h_ref: f64,
    /// Per component: max over sample times of |y(h_ref) − y(h_ref/2)|,
    /// divided by the max reference magnitude of that component.
    pub self_error: Vec<f64>,
}

impl Reference {
    /// The reference must be at least two digits more accurate than the
    /// errors it is used to measure. Components whose measured error is at
    /// roundoff level are not checked.
    pub fn check(&self, measured: &[f64]) -> Result<()> {
        for (c, (&own, &e)) in self.self_error.iter().zip(measured).enumerate() {
            if e > 1e-12 && own > 1e-2 * e {
                return Err(Error::ReferenceUnreliable(format!(
                    "component {c}: reference self-difference {own:.3e} is not 100x below the measured error {e:.3e}"
                )));
            }
        }
        Ok(())
    }
}

/// Runs `method` from y0 and samples the state every `stride` steps.
pub fn sampled_run(
    method: &Method,
    problem: &Problem,
    h: f64,
    stride: usize,
    config: StepperConfig,
) -> Result<Vec<Vec<f64>>> {
    let mut stepper = method.stepper(problem.ode.dim(), config)?;
    let mut samples = Vec::new();
    integrate(
        stepper.as_mut(),
        problem.ode.as_ref(),
        &problem.y0,
        problem.run.t0,
        problem.run.t_end,
        h,
        &mut |n, _, y| {
            if n % stride == 0 {
                samples.push(y.to_vec());
            }
        },
    )?;
    Ok(samples)
}

/// Relative max-norm deviation per component: max over samples of |a − b|
/// divided by max over samples of |b|.
pub fn relative_component_errors(a: &[Vec<f64>], b: &[Vec<f64>], comps: &[Component]) -> Vec<f64> {
    comps
        .iter()
        .map(|c| {
            let mut dev = 0.0f64;
            let mut mag = 0.0f64;
            for (ya, yb) in a.iter().zip(b) {
                for i in c.range.clone() {
                    dev = dev.max((ya[i] - yb[i]).abs());
                    mag = mag.max(yb[i].abs());
                }
            }
            if mag > 0.0 {
                dev / mag
            } else {
                dev
            }
        })
        .collect()
}

/// Reference with ASIRK-LSe(3,2) at h_ref = h/2⁸ and inner tolerance 1e-13,
/// sampled at the multiples of `coarse_h`.
pub fn reference_solution(problem: &Problem, coarse_h: f64) -> Result<Reference> {
    let scheme = catalog("ASIRK-LSe(3,2)")?;
    reference_with(problem, coarse_h, &scheme, 256)
}

pub fn reference_with(problem: &Problem, coarse_h: f64, scheme: &Scheme, refine: usize) -> Result<Reference> {
    let coarse = step_count(problem.run.t0, problem.run.t_end, coarse_h)?;
    let times = (0..=coarse).map(|n| problem.run.t0 + n as f64 * coarse_h).collect();
    if coarse == 0 {
        return Ok(Reference {
            times,
            states: vec![problem.y0.clone()],
            h_ref: coarse_h,
            self_error: vec![0.0; problem.components.len()],
        });
    }
    let method = Method::from_scheme(scheme);
    let config = StepperConfig::default().with_tol(1e-13);
    let h_ref = coarse_h / refine as f64;
    let states = sampled_run(&method, problem, h_ref, refine, config)?;
    let finer = sampled_run(&method, problem, h_ref / 2.0, 2 * refine, config)?;
    let self_error = relative_component_errors(&states, &finer, &problem.components);
    Ok(Reference {
        times,
        states,
        h_ref,
        self_error,
    })
}
