//! Algebraic conditions on a scheme: classical and coupling order
//! conditions up to order three, the stiff-limit conditions, and the
//! cancellation conditions of the linear relaxation model
//!
//! ```text
//! u' = δ₁u + σ₁v,   v' = δ₂u + σ₂v + (cu − v)/ε
//! ```
//!
//! whose one-step error, for consistent data, is expanded for ε ≪ h.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, QMatrix};
use crate::rational::{self, one, ratio, Rational};
use crate::tableau::{self, AsirkScheme, CoefficientKind, ImexTableau, LowStorageParams, Scheme};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionRecord {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Exact residual as `p/q`, for rational schemes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_residual: Option<String>,
    pub satisfied: bool,
}

impl ConditionRecord {
    fn new(id: impl Into<String>, lhs: Rational, rhs: Rational, kind: CoefficientKind) -> Self {
        let residual = &lhs - &rhs;
        ConditionRecord {
            id: id.into(),
            lhs: rational::to_f64(&lhs),
            rhs: rational::to_f64(&rhs),
            residual: rational::to_f64(&residual),
            exact_residual: (kind == CoefficientKind::ExactRational)
                .then(|| rational::format(&residual)),
            satisfied: kind.accepts(&residual),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub scheme: String,
    pub coefficient_kind: CoefficientKind,
    pub records: Vec<ConditionRecord>,
    pub classified_order: u32,
    pub commuting_order: u32,
    pub additional_conditions_met: bool,
    pub stiff_cancellation_met: bool,
}

impl ConditionReport {
    pub fn get(&self, id: &str) -> Option<&ConditionRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

const ORDER_IDS: [&str; 9] = [
    "Eq14", "Eq15", "Eq16", "Eq17", "Eq18", "Eq19", "Eq20", "Eq21", "Eq22",
];

fn order_rhs() -> [Rational; 9] {
    [
        one(),
        ratio(1, 2),
        ratio(1, 2),
        ratio(1, 6),
        ratio(1, 3),
        ratio(1, 6),
        ratio(1, 3),
        ratio(1, 6),
        ratio(1, 6),
    ]
}

/// Left-hand sides ωᵗe, ωᵗℬe, ωᵗ𝒞e, ωᵗℬ²e, ωᵗ(ℬe)², ωᵗ𝒞²e, ωᵗ(𝒞e)²,
/// ωᵗℬ𝒞e, ωᵗ𝒞ℬe.
pub(crate) fn order_lhs(b: &QMatrix, c: &QMatrix, omega: &[Rational]) -> [Rational; 9] {
    let e = linalg::ones(omega.len());
    let be = linalg::mat_vec(b, &e);
    let ce = linalg::mat_vec(c, &e);
    let w = |v: &[Rational]| linalg::dot(omega, v);
    [
        w(&e),
        w(&be),
        w(&ce),
        w(&linalg::mat_vec(b, &be)),
        w(&linalg::hadamard(&be, &be)),
        w(&linalg::mat_vec(c, &ce)),
        w(&linalg::hadamard(&ce, &ce)),
        w(&linalg::mat_vec(b, &ce)),
        w(&linalg::mat_vec(c, &be)),
    ]
}

/// Exact residuals of the nine order conditions, in the order Eq14..Eq22.
pub fn order_residual_values(scheme: &AsirkScheme) -> [Rational; 9] {
    let lhs = order_lhs(&scheme.b, &scheme.c, &scheme.omega);
    let rhs = order_rhs();
    std::array::from_fn(|k| &lhs[k] - &rhs[k])
}

fn order_from(records: &[ConditionRecord], groups: &[&[&str]]) -> u32 {
    let ok = |id: &&str| records.iter().any(|r| r.id == *id && r.satisfied);
    groups
        .iter()
        .take_while(|group| group.iter().all(ok))
        .count() as u32
}

/// ωᵗℬ𝒞e + ωᵗ𝒞ℬe − 1/3: the single coupling condition left when f_y and
/// g_y commute.
pub fn commuting_third_order(scheme: &AsirkScheme) -> Rational {
    let r = order_residual_values(scheme);
    &r[7] + &r[8]
}

/// Conditions (in the stiff limit) evaluated on an ASIRK triple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdditionalConditions {
    pub records: Vec<ConditionRecord>,
    /// For an ASIRK scheme: last row of 𝒞 equals ω. For an IMEX tableau:
    /// last row of A equals b.
    pub stiffly_accurate: bool,
    pub met: bool,
}

/// ωᵗe = 1, ωᵗ𝒞⁻¹(𝒞e)² = 1, ωᵗℬe = 1/2.
pub fn additional_conditions_asirk(scheme: &AsirkScheme) -> Result<AdditionalConditions> {
    let omega = &scheme.omega;
    let e = linalg::ones(omega.len());
    let w_cinv = linalg::solve_transposed(&scheme.c, omega)
        .ok_or_else(|| Error::SingularMatrix(format!("{}: C is singular", scheme.name)))?;
    let ce = linalg::mat_vec(&scheme.c, &e);
    let kind = scheme.kind;
    let records = vec![
        ConditionRecord::new("Eq29a", linalg::dot(omega, &e), one(), kind),
        ConditionRecord::new("Eq29b", linalg::dot(&w_cinv, &linalg::hadamard(&ce, &ce)), one(), kind),
        ConditionRecord::new(
            "Eq29c",
            linalg::dot(omega, &linalg::mat_vec(&scheme.b, &e)),
            ratio(1, 2),
            kind,
        ),
    ];
    let met = records.iter().all(|r| r.satisfied);
    Ok(AdditionalConditions {
        records,
        stiffly_accurate: scheme.last_row_is_omega(),
        met,
    })
}

/// bᵗA⁻¹c̃ = 1, bᵗA⁻¹c̃² = 1, bᵗA⁻¹Ãc̃ = 1/2. Requires an invertible A;
/// tableaus produced from ASIRK schemes have singular A and are handled by
/// [`additional_conditions_asirk`] instead.
pub fn additional_conditions_imex(
    tableau: &ImexTableau,
    kind: CoefficientKind,
) -> Result<AdditionalConditions> {
    let b_ainv = linalg::solve_transposed(&tableau.a, &tableau.b).ok_or_else(|| {
        Error::SingularMatrix("implicit matrix A is singular; use the ASIRK form".into())
    })?;
    let ct = &tableau.c_tilde;
    let records = vec![
        ConditionRecord::new("Eq28a", linalg::dot(&b_ainv, ct), one(), kind),
        ConditionRecord::new("Eq28b", linalg::dot(&b_ainv, &linalg::hadamard(ct, ct)), one(), kind),
        ConditionRecord::new(
            "Eq28c",
            linalg::dot(&b_ainv, &linalg::mat_vec(&tableau.a_tilde, ct)),
            ratio(1, 2),
            kind,
        ),
    ];
    let met = records.iter().all(|r| r.satisfied);
    let n = tableau.stages();
    Ok(AdditionalConditions {
        records,
        stiffly_accurate: tableau.a[n - 1] == tableau.b,
        met,
    })
}

/// Residuals (r48, r49) of the two cancellation conditions for the
/// three-stage family with λ₁ = λ₂ = λ: r48 = lhs − 1 cancels the hε term in
/// u, r49 = lhs cancels the ε²/h term in v.
pub fn stiff_model_residuals(params: &LowStorageParams) -> Result<(Rational, Rational)> {
    if params.stages() != 3 {
        return Err(Error::InvalidScheme(
            "cancellation conditions are stated for three stages".into(),
        ));
    }
    let (w, g, l) = (&params.omega, &params.gamma, &params.lambda);
    if l[0] != l[1] {
        return Err(Error::InvalidScheme("expected lambda1 = lambda2".into()));
    }
    let lambda = &l[0];
    let lam2 = lambda * lambda;
    let s12 = &w[0] + &w[1] - one();
    if lam2.is_zero() || s12.is_zero() {
        return Err(Error::SingularParameter(
            "lambda = 0 or omega1 + omega2 = 1".into(),
        ));
    }
    let r48 = (&w[1] * lambda * (&w[0] + &g[0])
        + &s12 * (&w[0] * (&w[1] + &g[1]) - lambda * (&w[0] + &w[1] + &g[1])))
        / &lam2
        - one();
    let r49 = (&w[0] - lambda) * (&w[1] - lambda) / (lam2 * s12);
    Ok((r48, r49))
}

/// Leading error terms of one step on the linear relaxation model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ErrorTerm {
    H,
    H2,
    H3,
    Eps,
    HEps,
    H2Eps,
    Eps2OverH,
}

impl fmt::Display for ErrorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorTerm::H => "h",
            ErrorTerm::H2 => "h^2",
            ErrorTerm::H3 => "h^3",
            ErrorTerm::Eps => "eps",
            ErrorTerm::HEps => "h eps",
            ErrorTerm::H2Eps => "h^2 eps",
            ErrorTerm::Eps2OverH => "eps^2/h",
        })
    }
}

/// Predicted leading terms of u₁ − u(ε,h) and v₁ − v(ε,h).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StiffErrorForm {
    pub u: Vec<ErrorTerm>,
    pub v: Vec<ErrorTerm>,
}

fn big_o(terms: &[ErrorTerm]) -> String {
    let inner: Vec<String> = terms.iter().map(ToString::to_string).collect();
    format!("O({})", inner.join(", "))
}

impl fmt::Display for StiffErrorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", big_o(&self.u), big_o(&self.v))
    }
}

/// Coefficients of the ε ≪ h expansion that decide which terms survive.
/// For an ASIRK scheme, with w = v − cu and consistent data, the stage
/// increments of w are (𝒞/κ + I − h(σ₂ − cσ₁)ℬ)⁻¹ h b̂ X with κ = ε/h, and
/// expanding in κ gives:
///   u, hε:     ωᵗℬ𝒞⁻¹e = 1
///   v, ε:      ωᵗ𝒞⁻¹e = 1
///   v, hε:     ωᵗ𝒞⁻¹ℬe = 1 (and the u condition)
///   v, ε²/h:   ωᵗ𝒞⁻²e = 0
fn asirk_cancellations(scheme: &AsirkScheme) -> Result<Vec<ConditionRecord>> {
    let kind = scheme.kind;
    let singular = || Error::SingularMatrix(format!("{}: C is singular", scheme.name));
    let e = linalg::ones(scheme.stages());
    let w_cinv = linalg::solve_transposed(&scheme.c, &scheme.omega).ok_or_else(singular)?;
    let w_cinv2 = linalg::solve_transposed(&scheme.c, &w_cinv).ok_or_else(singular)?;
    let w_b = linalg::mat_vec(&transpose(&scheme.b), &scheme.omega);
    let w_b_cinv = linalg::solve_transposed(&scheme.c, &w_b).ok_or_else(singular)?;
    let be = linalg::mat_vec(&scheme.b, &e);
    Ok(vec![
        ConditionRecord::new("Eq48", linalg::dot(&w_b_cinv, &e), one(), kind),
        ConditionRecord::new("Eq49", linalg::dot(&w_cinv2, &e), rational::zero(), kind),
        ConditionRecord::new("Eq27", linalg::dot(&w_cinv, &e), one(), kind),
        ConditionRecord::new("v-h-eps", linalg::dot(&w_cinv, &be), one(), kind),
    ])
}

/// Same expansion for an IMEX tableau with invertible A. Here the w-update
/// also carries O(h) and O(h²) terms, which vanish exactly under the
/// stiff-limit conditions bᵗA⁻¹c̃ = 1 and bᵗA⁻¹Ãc̃ = 1/2.
fn imex_cancellations(t: &ImexTableau, kind: CoefficientKind) -> Result<Vec<ConditionRecord>> {
    let singular = || Error::SingularMatrix("implicit matrix A is singular".into());
    let b_ainv = linalg::solve_transposed(&t.a, &t.b).ok_or_else(singular)?;
    let b_ainv2 = linalg::solve_transposed(&t.a, &b_ainv).ok_or_else(singular)?;
    let b_ainv3 = linalg::solve_transposed(&t.a, &b_ainv2).ok_or_else(singular)?;
    let bt_ainv = linalg::solve_transposed(&t.a, &t.b_tilde).ok_or_else(singular)?;
    let ainv_ct = linalg::solve(&t.a, &t.c_tilde).ok_or_else(singular)?;
    let at_ct = linalg::mat_vec(&t.a_tilde, &t.c_tilde);
    let ct = &t.c_tilde;
    Ok(vec![
        ConditionRecord::new("Eq48", linalg::dot(&bt_ainv, ct), one(), kind),
        ConditionRecord::new("Eq49", linalg::dot(&b_ainv3, ct), rational::zero(), kind),
        ConditionRecord::new("Eq27", linalg::dot(&b_ainv2, ct), one(), kind),
        ConditionRecord::new("v-h-eps", linalg::dot(&b_ainv2, &at_ct), one(), kind),
        ConditionRecord::new(
            "v-h-eps-coupling",
            linalg::dot(&t.b_tilde, &ainv_ct),
            linalg::dot(&b_ainv, &linalg::mat_vec(&t.a_tilde, &ainv_ct)),
            kind,
        ),
        ConditionRecord::new("v-h", linalg::dot(&b_ainv, ct), linalg::dot(&t.b_tilde, &linalg::ones(t.stages())), kind),
        ConditionRecord::new(
            "v-h2",
            linalg::dot(&b_ainv, &at_ct),
            linalg::dot(&t.b_tilde, ct),
            kind,
        ),
    ])
}

fn transpose(m: &QMatrix) -> QMatrix {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i].clone()).collect()).collect()
}

fn form_from(records: &[ConditionRecord], order: u32) -> StiffErrorForm {
    let holds = |id: &str| records.iter().any(|r| r.id == id && r.satisfied);
    let present = |id: &str| records.iter().any(|r| r.id == id) && !holds(id);
    let h_term = match order {
        0 | 1 => ErrorTerm::H2,
        _ => ErrorTerm::H3,
    };
    let mut u = vec![h_term];
    u.push(if holds("Eq48") { ErrorTerm::H2Eps } else { ErrorTerm::HEps });

    let mut v = Vec::new();
    if present("v-h") {
        v.push(ErrorTerm::H);
    } else if present("v-h2") || order < 2 {
        v.push(ErrorTerm::H2);
    } else {
        v.push(h_term);
    }
    if present("Eq27") {
        v.push(ErrorTerm::Eps);
    }
    if present("Eq48") || present("v-h-eps") || present("v-h-eps-coupling") {
        v.push(ErrorTerm::HEps);
    }
    if present("Eq49") {
        v.push(ErrorTerm::Eps2OverH);
    }
    StiffErrorForm { u, v }
}

/// Full report for an ASIRK triple.
pub fn order_residuals(scheme: &AsirkScheme) -> ConditionReport {
    let kind = scheme.kind;
    let lhs = order_lhs(&scheme.b, &scheme.c, &scheme.omega);
    let coupling = &lhs[7] + &lhs[8];
    let mut records: Vec<ConditionRecord> = ORDER_IDS
        .iter()
        .zip(lhs)
        .zip(order_rhs())
        .map(|((id, l), r)| ConditionRecord::new(*id, l, r, kind))
        .collect();
    records.push(ConditionRecord::new("Eq23", coupling, ratio(1, 3), kind));
    let groups: [&[&str]; 3] = [
        &["Eq14"],
        &["Eq15", "Eq16"],
        &["Eq17", "Eq18", "Eq19", "Eq20", "Eq21", "Eq22"],
    ];
    let classified_order = order_from(&records, &groups);
    let commuting: [&[&str]; 3] = [
        &["Eq14"],
        &["Eq15", "Eq16"],
        &["Eq17", "Eq18", "Eq19", "Eq20", "Eq23"],
    ];
    let commuting_order = order_from(&records, &commuting);

    // 𝒞 has a nonzero diagonal by construction, so these cannot fail.
    let additional = additional_conditions_asirk(scheme).expect("C is invertible");
    records.extend(additional.records);
    let cancellations = asirk_cancellations(scheme).expect("C is invertible");
    let stiff_cancellation_met = ["Eq48", "Eq49"]
        .iter()
        .all(|id| cancellations.iter().any(|r| r.id == *id && r.satisfied));
    records.extend(cancellations);
    ConditionReport {
        scheme: scheme.name.clone(),
        coefficient_kind: kind,
        records,
        classified_order,
        commuting_order,
        additional_conditions_met: additional.met,
        stiff_cancellation_met,
    }
}

fn color_label(explicit: bool) -> &'static str {
    if explicit {
        "e"
    } else {
        "i"
    }
}

/// Order conditions of a general IMEX tableau (bicoloured trees up to
/// order three); no assumption c̃ = c.
pub fn imex_order_residuals(
    name: &str,
    t: &ImexTableau,
    kind: CoefficientKind,
) -> Result<ConditionReport> {
    let e = linalg::ones(t.stages());
    let weights = [(true, &t.b_tilde), (false, &t.b)];
    let mats = [(true, &t.a_tilde), (false, &t.a)];
    let absc = [(true, &t.c_tilde), (false, &t.c)];
    let mut records = Vec::new();
    let mut groups: Vec<Vec<String>> = vec![vec![], vec![], vec![]];
    for (we, w) in weights {
        let id = format!("p1-{}", color_label(we));
        records.push(ConditionRecord::new(&id, linalg::dot(w, &e), one(), kind));
        groups[0].push(id);
        for (ce, c) in absc {
            let id = format!("p2-{}{}", color_label(we), color_label(ce));
            records.push(ConditionRecord::new(&id, linalg::dot(w, c), ratio(1, 2), kind));
            groups[1].push(id);
            for (de, d) in absc {
                if (ce as u8) < (de as u8) {
                    continue;
                }
                let id = format!("p3-bushy-{}{}{}", color_label(we), color_label(ce), color_label(de));
                records.push(ConditionRecord::new(
                    &id,
                    linalg::dot(w, &linalg::hadamard(c, d)),
                    ratio(1, 3),
                    kind,
                ));
                groups[2].push(id);
            }
            for (me, m) in mats {
                let id = format!("p3-tall-{}{}{}", color_label(we), color_label(me), color_label(ce));
                records.push(ConditionRecord::new(
                    &id,
                    linalg::dot(w, &linalg::mat_vec(m, c)),
                    ratio(1, 6),
                    kind,
                ));
                groups[2].push(id);
            }
        }
    }
    let group_refs: Vec<Vec<&str>> = groups
        .iter()
        .map(|g| g.iter().map(String::as_str).collect())
        .collect();
    let group_slices: Vec<&[&str]> = group_refs.iter().map(Vec::as_slice).collect();
    let classified_order = order_from(&records, &group_slices);
    let additional = additional_conditions_imex(t, kind)?;
    records.extend(additional.records);
    let cancellations = imex_cancellations(t, kind)?;
    let stiff_cancellation_met = ["Eq48", "Eq49"]
        .iter()
        .all(|id| cancellations.iter().any(|r| r.id == *id && r.satisfied));
    records.extend(cancellations);
    Ok(ConditionReport {
        scheme: name.to_string(),
        coefficient_kind: kind,
        records,
        classified_order,
        commuting_order: classified_order,
        additional_conditions_met: additional.met,
        stiff_cancellation_met,
    })
}

/// Dispatches on the scheme representation.
pub fn analyze(scheme: &Scheme) -> Result<ConditionReport> {
    match scheme {
        Scheme::Asirk(s) => Ok(order_residuals(s)),
        Scheme::Imex { name, tableau, kind } => imex_order_residuals(name, tableau, *kind),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Registers {
    Exactly(usize),
    AtLeast(usize),
}

impl fmt::Display for Registers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Registers::Exactly(n) => write!(f, "{n}"),
            Registers::AtLeast(n) => write!(f, ">= {n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Row {
    pub method: String,
    pub order: u32,
    pub commuting_order: u32,
    pub additional_conditions: bool,
    pub stiff_error: StiffErrorForm,
    pub registers: Registers,
}

impl Table1Row {
    pub fn order_label(&self) -> String {
        if self.commuting_order > self.order {
            format!("{} ({})", self.order, self.commuting_order)
        } else {
            self.order.to_string()
        }
    }
}

pub fn classify(scheme: &Scheme) -> Result<Table1Row> {
    let report = analyze(scheme)?;
    let registers = match scheme {
        Scheme::Asirk(s) => match tableau::is_low_storage(s, s.kind.tolerance()) {
            Some(_) => Registers::Exactly(3),
            None => Registers::AtLeast(s.stages() + 1),
        },
        Scheme::Imex { tableau, .. } => Registers::AtLeast(tableau.stages() + 1),
    };
    Ok(Table1Row {
        method: scheme.name().to_string(),
        order: report.classified_order,
        commuting_order: report.commuting_order,
        additional_conditions: report.additional_conditions_met,
        stiff_error: form_from(&report.records, report.classified_order),
        registers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::tableau::{catalog, catalog_asirk, is_low_storage};

    #[test]
    fn lse_is_second_order_exactly() {
        let s = catalog_asirk("ASIRK-LSe(3,2)").unwrap();
        let r = order_residual_values(&s);
        assert!(r[..3].iter().all(Zero::is_zero));
        assert!(r[3..].iter().any(|x| !x.is_zero()));
        assert_eq!(order_residuals(&s).classified_order, 2);
    }

    #[test]
    fn commuting_residual_is_sum_of_couplings() {
        let s = catalog_asirk("ASIRK-LSe(3,2)").unwrap();
        let r = order_residual_values(&s);
        assert_eq!(commuting_third_order(&s), &r[7] + &r[8]);
    }

    #[test]
    fn implicit_midpoint_like_single_stage() {
        let s = AsirkScheme::new(
            "mid",
            vec![vec![int(0)]],
            vec![vec![ratio(1, 2)]],
            vec![one()],
            CoefficientKind::ExactRational,
        )
        .unwrap();
        let rep = order_residuals(&s);
        assert!(rep.get("Eq14").unwrap().satisfied);
        assert!(rep.get("Eq16").unwrap().satisfied);
        assert!(!rep.get("Eq15").unwrap().satisfied);
        assert_eq!(rep.classified_order, 1);
    }

    #[test]
    fn general_cancellations_match_family_formulas() {
        // The family formulas assume Σω = 1; the printed decimals miss it by
        // 1e-6, amplified by 1/λ² = 100.
        for (name, tol) in [("ASIRK-LSe(3,2)", 1e-12), ("ASIRK-LS(3,2)", 1e-3)] {
            let s = catalog_asirk(name).unwrap();
            let p = is_low_storage(&s, 1e-5).unwrap();
            let (r48, r49) = stiff_model_residuals(&p).unwrap();
            let recs = asirk_cancellations(&s).unwrap();
            let g48 = recs.iter().find(|r| r.id == "Eq48").unwrap();
            let g49 = recs.iter().find(|r| r.id == "Eq49").unwrap();
            assert!((g48.residual - rational::to_f64(&r48)).abs() < tol, "{name}");
            assert!((g49.residual + rational::to_f64(&r49)).abs() < tol, "{name}");
        }
    }

    #[test]
    fn ssp2_stiff_limit_values() {
        let Scheme::Imex { tableau, .. } = catalog("ssp2").unwrap() else {
            panic!()
        };
        let add = additional_conditions_imex(&tableau, CoefficientKind::ExactRational).unwrap();
        let lhs: Vec<f64> = add.records.iter().map(|r| r.lhs).collect();
        assert_eq!(lhs, vec![1.0, 1.0, 0.25]);
        assert!(!add.met);
    }

    #[test]
    fn singular_imex_matrix_is_reported() {
        let t = tableau::to_imex(&catalog_asirk("lse").unwrap());
        assert!(matches!(
            additional_conditions_imex(&t, CoefficientKind::ExactRational),
            Err(Error::SingularMatrix(_))
        ));
    }
}
