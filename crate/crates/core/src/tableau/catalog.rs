use super::{AsirkScheme, CoefficientKind, ImexTableau, Scheme};
use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational::{self, Rational};

pub const CATALOG_NAMES: [&str; 5] = [
    "ASIRK-LSe(3,2)",
    "ASIRK-LSs(3,2)",
    "ASIRK-LS(3,2)",
    "Zhong",
    "IMEX-SSP2(3,3,2)",
];

fn q(text: &str) -> Rational {
    rational::parse(text).expect("catalog literal")
}

fn mat(rows: &[&[&str]]) -> QMatrix {
    rows.iter().map(|r| r.iter().map(|t| q(t)).collect()).collect()
}

fn vector(entries: &[&str]) -> Vec<Rational> {
    entries.iter().map(|t| q(t)).collect()
}

fn canonical(name: &str) -> Option<&'static str> {
    let key: String = name
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_ascii_lowercase();
    let hit = match key.as_str() {
        "asirk-lse(3,2)" | "lse" => 0,
        "asirk-lss(3,2)" | "lss" => 1,
        "asirk-ls(3,2)" | "ls" => 2,
        "zhong" | "asirk-3a" => 3,
        "imex-ssp2(3,3,2)" | "ssp2" => 4,
        _ => return None,
    };
    Some(CATALOG_NAMES[hit])
}

/// Looks up a built-in scheme by name (case-insensitive; short aliases
/// `lse`, `lss`, `ls`, `zhong`, `ssp2` are accepted).
pub fn catalog(name: &str) -> Result<Scheme> {
    let Some(name) = canonical(name) else {
        return Err(Error::NotFound(name.to_string()));
    };
    let exact = CoefficientKind::ExactRational;
    let printed = CoefficientKind::DecimalPrinted;
    let asirk = |b, c, w, kind| AsirkScheme::new(name, b, c, w, kind).map(Scheme::Asirk);
    match name {
        "ASIRK-LSe(3,2)" => asirk(
            mat(&[&["0", "0", "0"], &["573/2980", "0", "0"], &["3/20", "98/89", "0"]]),
            mat(&[
                &["3/20", "0", "0"],
                &["3/20", "3/20", "0"],
                &["3/20", "149/280", "89/280"],
            ]),
            vector(&["3/20", "149/280", "89/280"]),
            exact,
        ),
        // ω₂ is the last row of 𝒞; the value sometimes printed alongside
        // (149/280) belongs to the previous scheme and breaks Σω = 1.
        "ASIRK-LSs(3,2)" => asirk(
            mat(&[&["0", "0", "0"], &["8407/47450", "0", "0"], &["7/50", "648/599", "0"]]),
            mat(&[
                &["7/50", "0", "0"],
                &["7/50", "7/50", "0"],
                &["7/50", "949/1800", "599/1800"],
            ]),
            vector(&["7/50", "949/1800", "599/1800"]),
            exact,
        ),
        "ASIRK-LS(3,2)" => asirk(
            mat(&[
                &["0", "0", "0"],
                &["0.679529", "0", "0"],
                &["0.429529", "0.591085", "0"],
            ]),
            mat(&[
                &["0.1", "0", "0"],
                &["0.429529", "0.1", "0"],
                &["0.429529", "0.241085", "0.329385"],
            ]),
            vector(&["0.429529", "0.241085", "0.329385"]),
            printed,
        ),
        "Zhong" => asirk(
            mat(&[&["0", "0", "0"], &["8/7", "0", "0"], &["71/252", "7/36", "0"]]),
            mat(&[
                &["0.485561", "0", "0"],
                &["0.306727", "0.951130", "0"],
                &["0.45", "-0.263111", "0.189208"],
            ]),
            vector(&["1/8", "1/8", "3/4"]),
            printed,
        ),
        "IMEX-SSP2(3,3,2)" => {
            let tableau = ImexTableau::new(
                mat(&[&["0", "0", "0"], &["1/2", "0", "0"], &["1/2", "1/2", "0"]]),
                vector(&["1/3", "1/3", "1/3"]),
                mat(&[&["1/4", "0", "0"], &["0", "1/4", "0"], &["1/3", "1/3", "1/3"]]),
                vector(&["1/3", "1/3", "1/3"]),
            )?;
            Ok(Scheme::Imex {
                name: name.to_string(),
                tableau,
                kind: exact,
            })
        }
        _ => unreachable!("canonical() only yields catalog names"),
    }
}

/// Like [`catalog`] but insists on an ASIRK-sA scheme.
pub fn catalog_asirk(name: &str) -> Result<AsirkScheme> {
    match catalog(name)? {
        Scheme::Asirk(s) => Ok(s),
        Scheme::Imex { name, .. } => Err(Error::InvalidScheme(format!(
            "{name} is an IMEX tableau without an ASIRK form"
        ))),
    }
}
