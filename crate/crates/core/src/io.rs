//! File formats: groupoid tables with an optional cocycle, algebra
//! elements, and bisection bases. All are JSON; parse errors carry the
//! line and column.

use std::path::Path;

use indexmap::IndexMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, Context, ContextExt, TwistedGroupoid};
use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::groupoid::{validate_groupoid, FiniteGroupoid, GroupoidTables, ValidationReport};
use crate::semigroup::BisectionBasis;

pub fn parse_tables(text: &str) -> Result<GroupoidTables> {
    Ok(serde_json::from_str(text)?)
}

/// Groupoid axioms first; the cocycle is checked only on a valid groupoid.
pub fn validate_tables(t: &GroupoidTables) -> ValidationReport {
    let report = validate_groupoid(t);
    if !report.is_valid() {
        return report;
    }
    let g = FiniteGroupoid::from_tables(t).expect("validated");
    match Cocycle::from_tables(&g, &t.cocycle) {
        Ok(_) => ValidationReport::default(),
        Err(violations) => ValidationReport { violations },
    }
}

pub fn parse_context(text: &str) -> Result<Context> {
    TwistedGroupoid::from_tables(&parse_tables(text)?)
}

pub fn read_context(path: &Path) -> Result<Context> {
    parse_context(&std::fs::read_to_string(path)?)
}

pub fn context_to_json(ctx: &TwistedGroupoid) -> String {
    to_json(&ctx.to_tables())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializes");
    s.push('\n');
    s
}

/// `{"coeffs": {"<element>": [re, im], ...}}`; absent elements are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementFile {
    pub coeffs: IndexMap<String, [f64; 2]>,
}

pub fn parse_element(ctx: &Context, text: &str) -> Result<AlgebraElement> {
    let f: ElementFile = serde_json::from_str(text)?;
    let mut a = ctx.zero();
    for (name, [re, im]) in &f.coeffs {
        a.set_coeff(ctx.groupoid().index_of(name)?, Complex64::new(*re, *im));
    }
    Ok(a)
}

pub fn element_to_json(a: &AlgebraElement) -> String {
    let g = a.ctx().groupoid();
    to_json(&ElementFile {
        coeffs: a.support().into_iter().map(|e| (g.name(e).to_string(), [a.coeff(e).re, a.coeff(e).im])).collect(),
    })
}

/// `{"bisections": [["g", "h"], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisFile {
    pub bisections: Vec<Vec<String>>,
}

pub fn parse_basis(g: &FiniteGroupoid, text: &str) -> Result<BisectionBasis> {
    let f: BasisFile = serde_json::from_str(text)?;
    BisectionBasis::from_names(g, &f.bisections)
}

pub fn read_basis(g: &FiniteGroupoid, path: &Path) -> Result<BisectionBasis> {
    parse_basis(g, &std::fs::read_to_string(path)?)
}

pub fn basis_to_json(b: &BisectionBasis, g: &FiniteGroupoid) -> String {
    to_json(&BasisFile { bisections: b.to_names(g) })
}

/// Parse errors with position, for messages that name the file.
pub fn describe(path: &Path, e: &Error) -> String {
    format!("{}: {e}", path.display())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::semigroup::off_diagonal_singletons_basis;

    #[test]
    fn groupoid_round_trip() {
        for (name, ctx) in fixtures::standard_fixtures() {
            let text = context_to_json(&ctx);
            let back = parse_context(&text).unwrap();
            assert_eq!(back.to_tables(), ctx.to_tables(), "{name}");
            assert!(validate_tables(&parse_tables(&text).unwrap()).is_valid());
        }
    }

    #[test]
    fn truncated_file_reports_position() {
        let text = context_to_json(&fixtures::full_equivalence(2));
        let cut = &text[..text.len() / 2];
        match parse_tables(cut) {
            Err(Error::Parse { line, .. }) => assert!(line > 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn broken_cocycle_names_the_triple() {
        let mut t = fixtures::klein_four_pauli().to_tables();
        let key = t.cocycle.keys().next().unwrap().clone();
        t.cocycle.shift_remove(&key);
        let report = validate_tables(&t);
        assert!(!report.is_valid());
        assert!(report.to_string().contains("cocycle identity fails on"));
    }

    #[test]
    fn element_and_basis_round_trip() {
        let r2 = fixtures::full_equivalence(2);
        let a = r2.from_named(&[("(1,2)", Complex64::new(0.5, -1.0)), ("(2,2)", Complex64::new(2.0, 0.0))]).unwrap();
        let back = parse_element(&r2, &element_to_json(&a)).unwrap();
        assert!(back.approx_eq(&a, 0.0));
        assert!(matches!(parse_element(&r2, r#"{"coeffs": {"(3,3)": [1, 0]}}"#), Err(Error::UnknownElement(_))));
        let b = off_diagonal_singletons_basis(r2.groupoid()).unwrap();
        let text = basis_to_json(&b, r2.groupoid());
        assert_eq!(parse_basis(r2.groupoid(), &text).unwrap(), b);
        assert!(parse_basis(r2.groupoid(), r#"{"bisections": [["(1,2)", "(1,1)"]]}"#).is_err());
    }
}
