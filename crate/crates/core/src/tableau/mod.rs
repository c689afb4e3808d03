//! Scheme coefficients: the ASIRK triple (ℬ, 𝒞, ω), its low-storage
//! parameterization, and the equivalent 2s-stage IMEX tableau.

mod catalog;
mod family;
mod json;

pub use catalog::{catalog, catalog_asirk, CATALOG_NAMES};
pub use family::{family_s2, family_s3, leading_error_objective};
pub use json::{scheme_from_json, scheme_to_json};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, QMatrix, QVector};
use crate::rational::{self, Rational};

/// How the coefficients were published; decides verification tolerances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientKind {
    ExactRational,
    DecimalPrinted,
}

impl CoefficientKind {
    /// Printed decimals carry six significant digits.
    pub fn tolerance(self) -> f64 {
        match self {
            CoefficientKind::ExactRational => 0.0,
            CoefficientKind::DecimalPrinted => 1e-5,
        }
    }

    pub fn accepts(self, residual: &Rational) -> bool {
        match self {
            CoefficientKind::ExactRational => residual.is_zero(),
            CoefficientKind::DecimalPrinted => rational::abs_f64(residual) <= self.tolerance(),
        }
    }
}

/// An s-stage ASIRK-sA scheme: ℬ strictly lower triangular, 𝒞 lower
/// triangular with nonzero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct AsirkScheme {
    pub name: String,
    pub b: QMatrix,
    pub c: QMatrix,
    pub omega: QVector,
    pub kind: CoefficientKind,
}

impl AsirkScheme {
    pub fn new(
        name: impl Into<String>,
        b: QMatrix,
        c: QMatrix,
        omega: QVector,
        kind: CoefficientKind,
    ) -> Result<Self> {
        let name = name.into();
        let s = omega.len();
        let bad = |msg: String| Err(Error::InvalidScheme(format!("{name}: {msg}")));
        if s == 0 {
            return bad("no stages".into());
        }
        if b.len() != s || c.len() != s || b.iter().chain(&c).any(|row| row.len() != s) {
            return bad(format!("coefficient matrices must be {s}x{s}"));
        }
        for i in 0..s {
            if let Some(j) = (i..s).find(|&j| !b[i][j].is_zero()) {
                return bad(format!("B[{i}][{j}] must vanish (explicit part is strictly lower)"));
            }
            if let Some(j) = (i + 1..s).find(|&j| !c[i][j].is_zero()) {
                return bad(format!("C[{i}][{j}] must vanish (implicit part is lower triangular)"));
            }
            if c[i][i].is_zero() {
                return bad(format!("C[{i}][{i}] is zero"));
            }
        }
        Ok(AsirkScheme { name, b, c, omega, kind })
    }

    pub fn stages(&self) -> usize {
        self.omega.len()
    }

    /// The last row of 𝒞 equals ω (implicit part stiffly accurate).
    pub fn last_row_is_omega(&self) -> bool {
        let last = &self.c[self.stages() - 1];
        match self.kind {
            CoefficientKind::ExactRational => last == &self.omega,
            CoefficientKind::DecimalPrinted => {
                rational::to_f64(&linalg::max_abs_diff(last, &self.omega)) <= self.kind.tolerance()
            }
        }
    }

    pub fn numeric(&self) -> NumericScheme {
        NumericScheme {
            b: linalg::to_f64_matrix(&self.b),
            c: linalg::to_f64_matrix(&self.c),
            omega: linalg::to_f64_vector(&self.omega),
        }
    }
}

/// Floating-point copy of a scheme for the steppers.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericScheme {
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub omega: Vec<f64>,
}

/// The (ω, γ, λ) parameters of the three-register form.
#[derive(Clone, Debug, PartialEq)]
pub struct LowStorageParams {
    pub omega: QVector,
    pub gamma: QVector,
    pub lambda: QVector,
}

impl LowStorageParams {
    pub fn new(omega: QVector, gamma: QVector, lambda: QVector) -> Result<Self> {
        let s = omega.len();
        if s == 0 || lambda.len() != s || gamma.len() + 1 != s {
            return Err(Error::InvalidScheme(format!(
                "low-storage parameters need |omega| = |lambda| = |gamma| + 1, got {}, {}, {}",
                s,
                lambda.len(),
                gamma.len()
            )));
        }
        Ok(LowStorageParams { omega, gamma, lambda })
    }

    pub fn stages(&self) -> usize {
        self.omega.len()
    }

    pub fn numeric(&self) -> NumericParams {
        NumericParams {
            omega: linalg::to_f64_vector(&self.omega),
            gamma: linalg::to_f64_vector(&self.gamma),
            lambda: linalg::to_f64_vector(&self.lambda),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericParams {
    pub omega: Vec<f64>,
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Expands the register parameters: row i of ℬ is
/// (ω₁, …, ω_{i−2}, ω_{i−1}+γ_{i−1}, 0, …), row i of 𝒞 is (ω₁, …, ω_{i−1}, λ_i, 0, …).
pub fn from_low_storage(
    name: impl Into<String>,
    params: &LowStorageParams,
    kind: CoefficientKind,
) -> Result<AsirkScheme> {
    let (b, c) = expand_low_storage(params);
    AsirkScheme::new(name, b, c, params.omega.clone(), kind)
}

pub(crate) fn expand_low_storage(params: &LowStorageParams) -> (QMatrix, QMatrix) {
    let s = params.stages();
    let mut b = linalg::zeros(s, s);
    let mut c = linalg::zeros(s, s);
    for i in 0..s {
        for j in 0..i {
            c[i][j] = params.omega[j].clone();
            b[i][j] = params.omega[j].clone();
        }
        if i > 0 {
            b[i][i - 1] = &params.omega[i - 1] + &params.gamma[i - 1];
        }
        c[i][i] = params.lambda[i].clone();
    }
    (b, c)
}

/// Recognizes the three-register pattern. Rational schemes must match
/// exactly; decimal-printed ones within `tol`.
pub fn is_low_storage(scheme: &AsirkScheme, tol: f64) -> Option<LowStorageParams> {
    let s = scheme.stages();
    let close = |a: &Rational, b: &Rational| match scheme.kind {
        CoefficientKind::ExactRational => a == b,
        CoefficientKind::DecimalPrinted => rational::to_f64(&(a - b).abs()) <= tol,
    };
    for i in 0..s {
        for j in 0..i {
            if !close(&scheme.c[i][j], &scheme.omega[j]) {
                return None;
            }
            if j + 1 < i && !close(&scheme.b[i][j], &scheme.omega[j]) {
                return None;
            }
        }
    }
    let gamma = (1..s)
        .map(|i| &scheme.b[i][i - 1] - &scheme.omega[i - 1])
        .collect();
    let lambda = (0..s).map(|i| scheme.c[i][i].clone()).collect();
    Some(LowStorageParams {
        omega: scheme.omega.clone(),
        gamma,
        lambda,
    })
}

/// Double Butcher tableau (Ã, b̃; A, b).
#[derive(Clone, Debug, PartialEq)]
pub struct ImexTableau {
    pub a_tilde: QMatrix,
    pub b_tilde: QVector,
    pub a: QMatrix,
    pub b: QVector,
    pub c_tilde: QVector,
    pub c: QVector,
}

impl ImexTableau {
    pub fn new(a_tilde: QMatrix, b_tilde: QVector, a: QMatrix, b: QVector) -> Result<Self> {
        let n = b.len();
        let square = |m: &QMatrix| m.len() == n && m.iter().all(|r| r.len() == n);
        if b_tilde.len() != n || !square(&a_tilde) || !square(&a) {
            return Err(Error::InvalidScheme("IMEX tableau dimensions disagree".into()));
        }
        for i in 0..n {
            if (i..n).any(|j| !a_tilde[i][j].is_zero()) {
                return Err(Error::InvalidScheme("explicit tableau must be strictly lower".into()));
            }
            if (i + 1..n).any(|j| !a[i][j].is_zero()) {
                return Err(Error::InvalidScheme("implicit tableau must be lower triangular".into()));
            }
        }
        let c_tilde = linalg::row_sums(&a_tilde);
        let c = linalg::row_sums(&a);
        Ok(ImexTableau { a_tilde, b_tilde, a, b, c_tilde, c })
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

/// Interleaves explicit stages Y_i and implicit stages Ŷ_i as
/// (Y₁, Ŷ₁, Y₂, Ŷ₂, …). Y_i reads f at Y_j through b_ij and g at Ŷ_j
/// through b_ij; Ŷ_i does the same through c_ij (j ≤ i).
pub fn to_imex(scheme: &AsirkScheme) -> ImexTableau {
    let s = scheme.stages();
    let n = 2 * s;
    let mut a_tilde = linalg::zeros(n, n);
    let mut a = linalg::zeros(n, n);
    let mut b_tilde = vec![rational::zero(); n];
    let mut b = vec![rational::zero(); n];
    for i in 0..s {
        let (y, yh) = (2 * i, 2 * i + 1);
        for j in 0..s {
            a_tilde[y][2 * j] = scheme.b[i][j].clone();
            a[y][2 * j + 1] = scheme.b[i][j].clone();
            a_tilde[yh][2 * j] = scheme.c[i][j].clone();
            a[yh][2 * j + 1] = scheme.c[i][j].clone();
        }
        b_tilde[y] = scheme.omega[i].clone();
        b[yh] = scheme.omega[i].clone();
    }
    ImexTableau::new(a_tilde, b_tilde, a, b).expect("block structure is triangular by construction")
}

/// A scheme from the catalog: either an ASIRK-sA triple or a general IMEX
/// tableau that has no ASIRK form.
#[derive(Clone, Debug, PartialEq)]
pub enum Scheme {
    Asirk(AsirkScheme),
    Imex {
        name: String,
        tableau: ImexTableau,
        kind: CoefficientKind,
    },
}

impl Scheme {
    pub fn name(&self) -> &str {
        match self {
            Scheme::Asirk(s) => &s.name,
            Scheme::Imex { name, .. } => name,
        }
    }

    pub fn kind(&self) -> CoefficientKind {
        match self {
            Scheme::Asirk(s) => s.kind,
            Scheme::Imex { kind, .. } => *kind,
        }
    }

    pub fn as_asirk(&self) -> Option<&AsirkScheme> {
        match self {
            Scheme::Asirk(s) => Some(s),
            Scheme::Imex { .. } => None,
        }
    }

    pub fn imex_tableau(&self) -> ImexTableau {
        match self {
            Scheme::Asirk(s) => to_imex(s),
            Scheme::Imex { tableau, .. } => tableau.clone(),
        }
    }
}
