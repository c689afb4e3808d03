//! JSON import/export. Rationals are written as `"p/q"` strings so rational
//! schemes round-trip bit-exactly; on input, decimal strings and plain JSON
//! numbers are also accepted.

use serde::{Deserialize, Serialize};

use super::{AsirkScheme, CoefficientKind, ImexTableau, Scheme};
use crate::error::{Error, Result};
use crate::rational::{serde_str, Rational};

#[derive(Clone, Serialize, Deserialize)]
#[serde(transparent)]
struct Coef(#[serde(with = "serde_str")] Rational);

fn wrap(m: &[Vec<Rational>]) -> Vec<Vec<Coef>> {
    m.iter().map(|r| r.iter().cloned().map(Coef).collect()).collect()
}

fn wrap_v(v: &[Rational]) -> Vec<Coef> {
    v.iter().cloned().map(Coef).collect()
}

fn unwrap(m: Vec<Vec<Coef>>) -> Vec<Vec<Rational>> {
    m.into_iter().map(|r| r.into_iter().map(|c| c.0).collect()).collect()
}

fn unwrap_v(v: Vec<Coef>) -> Vec<Rational> {
    v.into_iter().map(|c| c.0).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AsirkDoc {
    name: String,
    s: usize,
    #[serde(rename = "B")]
    b: Vec<Vec<Coef>>,
    #[serde(rename = "C")]
    c: Vec<Vec<Coef>>,
    omega: Vec<Coef>,
    coefficient_kind: CoefficientKind,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImexDoc {
    name: String,
    s: usize,
    #[serde(rename = "A_tilde")]
    a_tilde: Vec<Vec<Coef>>,
    b_tilde: Vec<Coef>,
    #[serde(rename = "A")]
    a: Vec<Vec<Coef>>,
    b: Vec<Coef>,
    coefficient_kind: CoefficientKind,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Doc {
    Asirk(AsirkDoc),
    Imex(ImexDoc),
}

pub fn scheme_to_json(scheme: &Scheme) -> String {
    let value = match scheme {
        Scheme::Asirk(s) => serde_json::to_value(AsirkDoc {
            name: s.name.clone(),
            s: s.stages(),
            b: wrap(&s.b),
            c: wrap(&s.c),
            omega: wrap_v(&s.omega),
            coefficient_kind: s.kind,
        }),
        Scheme::Imex { name, tableau, kind } => serde_json::to_value(ImexDoc {
            name: name.clone(),
            s: tableau.stages(),
            a_tilde: wrap(&tableau.a_tilde),
            b_tilde: wrap_v(&tableau.b_tilde),
            a: wrap(&tableau.a),
            b: wrap_v(&tableau.b),
            coefficient_kind: *kind,
        }),
    }
    .expect("scheme document serializes");
    serde_json::to_string_pretty(&value).expect("scheme document serializes")
}

pub fn scheme_from_json(text: &str) -> Result<Scheme> {
    let doc: Doc = serde_json::from_str(text).map_err(|e| {
        Error::InvalidScheme(format!(
            "not a scheme document (expected name, s, B, C, omega, coefficient_kind or the IMEX form): {e}"
        ))
    })?;
    let check_s = |declared: usize, actual: usize| {
        if declared == actual {
            Ok(())
        } else {
            Err(Error::InvalidScheme(format!(
                "declared s = {declared} but weights have length {actual}"
            )))
        }
    };
    match doc {
        Doc::Asirk(d) => {
            check_s(d.s, d.omega.len())?;
            let s = AsirkScheme::new(d.name, unwrap(d.b), unwrap(d.c), unwrap_v(d.omega), d.coefficient_kind)?;
            Ok(Scheme::Asirk(s))
        }
        Doc::Imex(d) => {
            check_s(d.s, d.b.len())?;
            let tableau = ImexTableau::new(unwrap(d.a_tilde), unwrap_v(d.b_tilde), unwrap(d.a), unwrap_v(d.b))?;
            Ok(Scheme::Imex {
                name: d.name,
                tableau,
                kind: d.coefficient_kind,
            })
        }
    }
}
