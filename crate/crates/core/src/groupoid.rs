//! Finite groupoids as explicit partial composition tables.
//!
//! A [`GroupoidTables`] is the raw, string-keyed form read from disk. It is
//! checked by [`validate_groupoid`], which reports every violated axiom, and
//! only then turned into an index-based [`FiniteGroupoid`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::PhaseRepr;

/// Index of an element inside a [`FiniteGroupoid`].
pub type Elem = usize;

/// String-keyed groupoid tables, exactly as stored in a groupoid file.
///
/// `compose` keys are `"g|h"`; `cocycle` maps the same keys to phases and
/// missing entries mean phase one.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupoidTables {
    pub elements: Vec<String>,
    pub units: Vec<String>,
    pub source: IndexMap<String, String>,
    pub range: IndexMap<String, String>,
    pub inverse: IndexMap<String, String>,
    pub compose: IndexMap<String, String>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub cocycle: IndexMap<String, PhaseRepr>,
}

pub fn pair_key(g: &str, h: &str) -> String {
    format!("{g}|{h}")
}

pub fn split_pair_key(key: &str) -> Option<(&str, &str)> {
    let (g, h) = key.split_once('|')?;
    if h.contains('|') {
        return None;
    }
    Some((g, h))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateElement(String),
    UnknownElement { table: &'static str, name: String },
    MissingEntry { table: &'static str, element: String },
    MalformedKey { table: &'static str, key: String },
    SourceNotUnit { element: String, source: String },
    RangeNotUnit { element: String, range: String },
    UnitNotFixed { unit: String },
    NonInvolutiveInverse { element: String },
    InverseEnds { element: String },
    NonComposableComposed { g: String, h: String },
    MissingComposition { g: String, h: String },
    ProductEnds { g: String, h: String, product: String },
    NonAssociative { g: String, h: String, k: String },
    InverseLaw { element: String },
    UnitLaw { element: String },
    CocycleOnNonComposable { g: String, h: String },
    CocycleBadPhase { key: String },
    CocycleNotNormalized { element: String },
    CocycleIdentity { g: String, h: String, k: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateElement(e) => write!(f, "duplicate element `{e}`"),
            UnknownElement { table, name } => write!(f, "unknown element `{name}` in `{table}`"),
            MissingEntry { table, element } => write!(f, "missing `{table}` entry for `{element}`"),
            MalformedKey { table, key } => write!(f, "malformed key `{key}` in `{table}`"),
            SourceNotUnit { element, source } => {
                write!(f, "source of `{element}` is `{source}`, which is not a unit")
            }
            RangeNotUnit { element, range } => {
                write!(f, "range of `{element}` is `{range}`, which is not a unit")
            }
            UnitNotFixed { unit } => {
                write!(f, "unit `{unit}` is not its own source, range and inverse")
            }
            NonInvolutiveInverse { element } => write!(f, "non-involutive inverse at `{element}`"),
            InverseEnds { element } => {
                write!(f, "inverse of `{element}` does not swap source and range")
            }
            NonComposableComposed { g, h } => write!(f, "non-composable pair composed: ({g}, {h})"),
            MissingComposition { g, h } => write!(f, "composable pair not composed: ({g}, {h})"),
            ProductEnds { g, h, product } => {
                write!(f, "product {g}·{h} = {product} has the wrong source or range")
            }
            NonAssociative { g, h, k } => write!(f, "associativity fails on ({g}, {h}, {k})"),
            InverseLaw { element } => write!(f, "inverse law fails at `{element}`"),
            UnitLaw { element } => write!(f, "unit law fails at `{element}`"),
            CocycleOnNonComposable { g, h } => {
                write!(f, "cocycle defined on non-composable pair ({g}, {h})")
            }
            CocycleBadPhase { key } => write!(f, "cocycle entry `{key}` has a zero denominator"),
            CocycleNotNormalized { element } => write!(f, "cocycle not normalized at `{element}`"),
            CocycleIdentity { g, h, k } => write!(f, "cocycle identity fails on ({g}, {h}, {k})"),
        }
    }
}

/// Every axiom violation found in a set of tables. Empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// A validated finite (discrete, hence étale) groupoid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupoid {
    names: Vec<String>,
    index: HashMap<String, Elem>,
    units: Vec<Elem>,
    is_unit: Vec<bool>,
    source: Vec<Elem>,
    range: Vec<Elem>,
    inverse: Vec<Elem>,
    compose: Vec<Option<Elem>>,
}

/// Checks the groupoid axioms (and the cocycle, if present) on raw tables.
///
/// Never panics: table-level problems are reported and the deeper checks
/// that depend on complete tables are skipped.
pub fn validate_groupoid(t: &GroupoidTables) -> ValidationReport {
    let mut v = Vec::new();
    let mut index = HashMap::new();
    for (i, e) in t.elements.iter().enumerate() {
        if index.insert(e.as_str(), i).is_some() {
            v.push(Violation::DuplicateElement(e.clone()));
        }
    }
    let lookup = |table: &'static str, name: &str, v: &mut Vec<Violation>| -> Option<Elem> {
        let found = index.get(name).copied();
        if found.is_none() {
            v.push(Violation::UnknownElement { table, name: name.to_string() });
        }
        found
    };

    let n = t.elements.len();
    let mut is_unit = vec![false; n];
    for u in &t.units {
        if let Some(i) = lookup("units", u, &mut v) {
            is_unit[i] = true;
        }
    }

    let read_map = |table: &'static str, map: &IndexMap<String, String>, v: &mut Vec<Violation>| {
        let mut out: Vec<Option<Elem>> = vec![None; n];
        for (k, val) in map {
            let (Some(ki), Some(vi)) = (lookup(table, k, v), lookup(table, val, v)) else {
                continue;
            };
            out[ki] = Some(vi);
        }
        for (i, slot) in out.iter().enumerate() {
            if slot.is_none() {
                v.push(Violation::MissingEntry { table, element: t.elements[i].clone() });
            }
        }
        out
    };
    let source = read_map("source", &t.source, &mut v);
    let range = read_map("range", &t.range, &mut v);
    let inverse = read_map("inverse", &t.inverse, &mut v);

    let mut compose: HashMap<(Elem, Elem), Elem> = HashMap::new();
    for (key, val) in &t.compose {
        let Some((g, h)) = split_pair_key(key) else {
            v.push(Violation::MalformedKey { table: "compose", key: key.clone() });
            continue;
        };
        let (Some(gi), Some(hi), Some(pi)) =
            (lookup("compose", g, &mut v), lookup("compose", h, &mut v), lookup("compose", val, &mut v))
        else {
            continue;
        };
        compose.insert((gi, hi), pi);
    }

    if !v.is_empty() {
        return ValidationReport { violations: v };
    }
    let source: Vec<Elem> = source.into_iter().map(Option::unwrap).collect();
    let range: Vec<Elem> = range.into_iter().map(Option::unwrap).collect();
    let inverse: Vec<Elem> = inverse.into_iter().map(Option::unwrap).collect();
    let name = |i: Elem| t.elements[i].clone();

    for g in 0..n {
        if !is_unit[source[g]] {
            v.push(Violation::SourceNotUnit { element: name(g), source: name(source[g]) });
        }
        if !is_unit[range[g]] {
            v.push(Violation::RangeNotUnit { element: name(g), range: name(range[g]) });
        }
        if is_unit[g] && (source[g] != g || range[g] != g || inverse[g] != g) {
            v.push(Violation::UnitNotFixed { unit: name(g) });
        }
        if inverse[inverse[g]] != g {
            v.push(Violation::NonInvolutiveInverse { element: name(g) });
        }
        if source[inverse[g]] != range[g] || range[inverse[g]] != source[g] {
            v.push(Violation::InverseEnds { element: name(g) });
        }
    }
    for g in 0..n {
        for h in 0..n {
            let composable = source[g] == range[h];
            match (composable, compose.get(&(g, h))) {
                (false, Some(_)) => v.push(Violation::NonComposableComposed { g: name(g), h: name(h) }),
                (true, None) => v.push(Violation::MissingComposition { g: name(g), h: name(h) }),
                (true, Some(&p)) if source[p] != source[h] || range[p] != range[g] => {
                    v.push(Violation::ProductEnds { g: name(g), h: name(h), product: name(p) })
                }
                _ => {}
            }
        }
    }
    if !v.is_empty() {
        return ValidationReport { violations: v };
    }

    for g in 0..n {
        if compose[&(range[g], g)] != g || compose[&(g, source[g])] != g {
            v.push(Violation::UnitLaw { element: name(g) });
        }
        if compose[&(inverse[g], g)] != source[g] || compose[&(g, inverse[g])] != range[g] {
            v.push(Violation::InverseLaw { element: name(g) });
        }
    }
    for g in 0..n {
        for h in (0..n).filter(|&h| source[g] == range[h]) {
            let gh = compose[&(g, h)];
            for k in (0..n).filter(|&k| source[h] == range[k]) {
                if compose[&(gh, k)] != compose[&(g, compose[&(h, k)])] {
                    v.push(Violation::NonAssociative { g: name(g), h: name(h), k: name(k) });
                }
            }
        }
    }
    if !v.is_empty() {
        return ValidationReport { violations: v };
    }

    let groupoid = FiniteGroupoid::assemble(t, &is_unit, source, range, inverse, &compose);
    if let Err(mut cv) = crate::cocycle::Cocycle::from_tables(&groupoid, &t.cocycle) {
        v.append(&mut cv);
    }
    ValidationReport { violations: v }
}

impl FiniteGroupoid {
    fn assemble(
        t: &GroupoidTables,
        is_unit: &[bool],
        source: Vec<Elem>,
        range: Vec<Elem>,
        inverse: Vec<Elem>,
        compose: &HashMap<(Elem, Elem), Elem>,
    ) -> Self {
        let n = t.elements.len();
        let mut table = vec![None; n * n];
        for (&(g, h), &p) in compose {
            table[g * n + h] = Some(p);
        }
        FiniteGroupoid {
            names: t.elements.clone(),
            index: t.elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect(),
            units: (0..n).filter(|&i| is_unit[i]).collect(),
            is_unit: is_unit.to_vec(),
            source,
            range,
            inverse,
            compose: table,
        }
    }

    /// Validates the tables and builds the groupoid (ignoring any cocycle).
    pub fn from_tables(t: &GroupoidTables) -> Result<Self> {
        let report = validate_groupoid(t);
        if !report.is_valid() {
            return Err(Error::Invalid(report));
        }
        let idx = |s: &String| t.elements.iter().position(|e| e == s).unwrap();
        let n = t.elements.len();
        let mut is_unit = vec![false; n];
        for u in &t.units {
            is_unit[idx(u)] = true;
        }
        let map = |m: &IndexMap<String, String>| {
            let mut out = vec![0; n];
            for (k, v) in m {
                out[idx(k)] = idx(v);
            }
            out
        };
        let compose = t
            .compose
            .iter()
            .map(|(k, v)| {
                let (g, h) = split_pair_key(k).unwrap();
                ((idx(&g.to_string()), idx(&h.to_string())), idx(v))
            })
            .collect();
        Ok(Self::assemble(t, &is_unit, map(&t.source), map(&t.range), map(&t.inverse), &compose))
    }

    /// Builds a groupoid from closures over element indices `0..n`.
    ///
    /// `compose(g, h)` is only called on pairs with `source(g) == range(h)`.
    /// The result is validated.
    pub fn from_fn(
        names: Vec<String>,
        source: impl Fn(Elem) -> Elem,
        range: impl Fn(Elem) -> Elem,
        inverse: impl Fn(Elem) -> Elem,
        compose: impl Fn(Elem, Elem) -> Elem,
    ) -> Result<Self> {
        let n = names.len();
        let src: Vec<Elem> = (0..n).map(&source).collect();
        let rng: Vec<Elem> = (0..n).map(&range).collect();
        let units: BTreeSet<Elem> = src.iter().chain(rng.iter()).copied().collect();
        let mut t = GroupoidTables {
            elements: names.clone(),
            units: units.iter().map(|&u| names[u].clone()).collect(),
            ..Default::default()
        };
        for g in 0..n {
            t.source.insert(names[g].clone(), names[src[g]].clone());
            t.range.insert(names[g].clone(), names[rng[g]].clone());
            t.inverse.insert(names[g].clone(), names[inverse(g)].clone());
        }
        for g in 0..n {
            for h in 0..n {
                if src[g] == rng[h] {
                    t.compose.insert(pair_key(&names[g], &names[h]), names[compose(g, h)].clone());
                }
            }
        }
        Self::from_tables(&t)
    }

    /// The string-keyed tables for this groupoid (without cocycle).
    pub fn to_tables(&self) -> GroupoidTables {
        let mut t = GroupoidTables {
            elements: self.names.clone(),
            units: self.units.iter().map(|&u| self.names[u].clone()).collect(),
            ..Default::default()
        };
        for g in self.elements() {
            t.source.insert(self.names[g].clone(), self.names[self.source[g]].clone());
            t.range.insert(self.names[g].clone(), self.names[self.range[g]].clone());
            t.inverse.insert(self.names[g].clone(), self.names[self.inverse[g]].clone());
        }
        for g in self.elements() {
            for h in self.elements() {
                if let Some(p) = self.compose(g, h) {
                    t.compose.insert(pair_key(&self.names[g], &self.names[h]), self.names[p].clone());
                }
            }
        }
        t
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, g: Elem) -> &str {
        &self.names[g]
    }

    pub fn index_of(&self, name: &str) -> Result<Elem> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn units(&self) -> &[Elem] {
        &self.units
    }

    pub fn is_unit(&self, g: Elem) -> bool {
        self.is_unit[g]
    }

    pub fn source(&self, g: Elem) -> Elem {
        self.source[g]
    }

    pub fn range(&self, g: Elem) -> Elem {
        self.range[g]
    }

    pub fn inverse(&self, g: Elem) -> Elem {
        self.inverse[g]
    }

    pub fn composable(&self, g: Elem, h: Elem) -> bool {
        self.source[g] == self.range[h]
    }

    /// `gh`, defined exactly when `source(g) == range(h)`.
    pub fn compose(&self, g: Elem, h: Elem) -> Option<Elem> {
        self.compose[g * self.len() + h]
    }

    /// All composable pairs in element order.
    pub fn composable_pairs(&self) -> impl Iterator<Item = (Elem, Elem)> + '_ {
        self.elements()
            .flat_map(move |g| self.elements().map(move |h| (g, h)))
            .filter(move |&(g, h)| self.composable(g, h))
    }

    /// Elements with `source == range`.
    pub fn isotropy(&self) -> Vec<Elem> {
        self.elements().filter(|&g| self.source[g] == self.range[g]).collect()
    }

    /// Isotropy group at unit `u`.
    pub fn isotropy_at(&self, u: Elem) -> Vec<Elem> {
        self.elements().filter(|&g| self.source[g] == u && self.range[g] == u).collect()
    }

    /// Effective ⟺ the only isotropy is the unit space (finite discrete case).
    pub fn is_effective(&self) -> bool {
        self.isotropy().into_iter().all(|g| self.is_unit[g])
    }

    /// Smallest `k ≥ 1` with `g^k` a unit, or `None` when `g` is not isotropy.
    pub fn order(&self, g: Elem) -> Option<usize> {
        if self.source[g] != self.range[g] {
            return None;
        }
        let mut p = g;
        let mut k = 1;
        while !self.is_unit[p] {
            p = self.compose(p, g)?;
            k += 1;
        }
        Some(k)
    }

    /// At most one element per source fiber and per range fiber.
    pub fn is_bisection(&self, set: &[Elem]) -> bool {
        let mut sources = BTreeSet::new();
        let mut ranges = BTreeSet::new();
        let distinct: BTreeSet<Elem> = set.iter().copied().collect();
        distinct.iter().all(|&g| sources.insert(self.source[g]) && ranges.insert(self.range[g]))
    }

    /// [`is_bisection`](Self::is_bisection) on element names.
    pub fn is_bisection_named<S: AsRef<str>>(&self, set: &[S]) -> Result<bool> {
        let idx = set.iter().map(|s| self.index_of(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Ok(self.is_bisection(&idx))
    }

    /// `OU = {gh : g ∈ O, h ∈ U, composable}`.
    pub fn product_set(&self, o: &[Elem], u: &[Elem]) -> Vec<Elem> {
        let set: BTreeSet<Elem> = o.iter().flat_map(|&g| u.iter().filter_map(move |&h| self.compose(g, h))).collect();
        set.into_iter().collect()
    }

    pub fn inverse_set(&self, o: &[Elem]) -> Vec<Elem> {
        let set: BTreeSet<Elem> = o.iter().map(|&g| self.inverse[g]).collect();
        set.into_iter().collect()
    }

    /// Every bisection (including the empty one), as sorted element lists.
    pub fn bisections(&self) -> Vec<Vec<Elem>> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        let mut used_src = vec![false; self.len()];
        let mut used_rng = vec![false; self.len()];
        self.extend_bisections(0, &mut current, &mut used_src, &mut used_rng, &mut out);
        out
    }

    fn extend_bisections(
        &self,
        next: Elem,
        current: &mut Vec<Elem>,
        used_src: &mut [bool],
        used_rng: &mut [bool],
        out: &mut Vec<Vec<Elem>>,
    ) {
        if next == self.len() {
            out.push(current.clone());
            return;
        }
        self.extend_bisections(next + 1, current, used_src, used_rng, out);
        let (s, r) = (self.source[next], self.range[next]);
        if !used_src[s] && !used_rng[r] {
            used_src[s] = true;
            used_rng[r] = true;
            current.push(next);
            self.extend_bisections(next + 1, current, used_src, used_rng, out);
            current.pop();
            used_src[s] = false;
            used_rng[r] = false;
        }
    }

    /// Units sharing an orbit with `u` (units `v` with some `g: u → v`).
    pub fn orbit(&self, u: Elem) -> Vec<Elem> {
        let set: BTreeSet<Elem> = self.elements().filter(|&g| self.source[g] == u).map(|g| self.range[g]).collect();
        set.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixtures_validate() {
        for (name, ctx) in fixtures::standard_fixtures() {
            let report = validate_groupoid(&ctx.to_tables());
            assert!(report.is_valid(), "{name}: {report}");
        }
    }

    #[test]
    fn trivial_groupoid_is_valid() {
        let t = GroupoidTables {
            elements: vec!["e".into()],
            units: vec!["e".into()],
            source: [("e".into(), "e".into())].into_iter().collect(),
            range: [("e".into(), "e".into())].into_iter().collect(),
            inverse: [("e".into(), "e".into())].into_iter().collect(),
            compose: [("e|e".into(), "e".into())].into_iter().collect(),
            cocycle: IndexMap::new(),
        };
        assert!(validate_groupoid(&t).is_valid());
    }

    #[test]
    fn wrong_composition_is_reported() {
        let mut t = fixtures::full_equivalence(2).groupoid().to_tables();
        t.compose.insert("(1,2)|(1,2)".into(), "(1,1)".into());
        let report = validate_groupoid(&t);
        assert!(report.violations.contains(&Violation::NonComposableComposed { g: "(1,2)".into(), h: "(1,2)".into() }));
        assert!(report.to_string().contains("non-composable pair composed"));
    }

    #[test]
    fn malformed_tables_do_not_panic() {
        let mut t = fixtures::full_equivalence(2).groupoid().to_tables();
        t.source.shift_remove("(1,2)");
        t.inverse.insert("(2,1)".into(), "(2,2)".into());
        t.compose.insert("nope".into(), "(1,1)".into());
        t.compose.insert("(1,1)|ghost".into(), "(1,1)".into());
        let report = validate_groupoid(&t);
        assert!(report.violations.contains(&Violation::MissingEntry { table: "source", element: "(1,2)".into() }));
        assert!(report.violations.iter().any(|v| matches!(v, Violation::MalformedKey { .. })));
        assert!(report.violations.iter().any(|v| matches!(v, Violation::UnknownElement { .. })));

        let mut t = fixtures::full_equivalence(2).groupoid().to_tables();
        t.inverse.insert("(2,1)".into(), "(2,2)".into());
        let report = validate_groupoid(&t);
        assert!(report.violations.contains(&Violation::NonInvolutiveInverse { element: "(2,1)".into() }));
    }

    #[test]
    fn bisection_examples() {
        let r2 = fixtures::full_equivalence(2);
        let g = r2.groupoid();
        assert!(g.is_bisection_named(&["(1,2)"]).unwrap());
        assert!(g.is_bisection_named(&["(1,1)", "(2,2)"]).unwrap());
        assert!(!g.is_bisection_named(&["(1,2)", "(2,2)"]).unwrap());
        assert!(matches!(g.is_bisection_named(&["(3,3)"]), Err(Error::UnknownElement(_))));
    }

    /// Brute-force fiber counting, independent of `is_bisection`.
    fn bisection_oracle(g: &FiniteGroupoid, set: &[Elem]) -> bool {
        set.iter().all(|&a| {
            set.iter().filter(|&&b| g.source(b) == g.source(a)).count() == 1
                && set.iter().filter(|&&b| g.range(b) == g.range(a)).count() == 1
        })
    }

    #[test]
    fn bisection_enumeration_matches_subset_sweep() {
        for (name, ctx) in fixtures::standard_fixtures() {
            let g = ctx.groupoid();
            if g.len() > 9 {
                continue;
            }
            let mut count = 0;
            for mask in 0u32..(1 << g.len()) {
                let set: Vec<Elem> = g.elements().filter(|&i| mask & (1 << i) != 0).collect();
                assert_eq!(g.is_bisection(&set), bisection_oracle(g, &set), "{name} {set:?}");
                count += bisection_oracle(g, &set) as usize;
            }
            assert_eq!(g.bisections().len(), count, "{name}");
        }
    }

    #[test]
    fn bisections_form_an_inverse_semigroup() {
        for (name, ctx) in fixtures::standard_fixtures() {
            let g = ctx.groupoid();
            let all = g.bisections();
            for o in &all {
                assert!(g.is_bisection(&g.inverse_set(o)), "{name}");
                for u in &all {
                    assert!(g.is_bisection(&g.product_set(o, u)), "{name}");
                }
            }
        }
    }

    #[test]
    fn effectiveness() {
        assert!(fixtures::full_equivalence(2).groupoid().is_effective());
        assert!(!fixtures::cyclic(4).groupoid().is_effective());
        assert!(!fixtures::r2_disjoint_z2().groupoid().is_effective());
        assert!(fixtures::swap_transformation().groupoid().is_effective());
    }

    #[test]
    fn element_orders() {
        let z4 = fixtures::cyclic(4);
        let g = z4.groupoid();
        let orders: Vec<_> = g.elements().map(|e| g.order(e).unwrap()).collect();
        assert_eq!(orders, vec![1, 4, 2, 4]);
        let r2 = fixtures::full_equivalence(2);
        assert_eq!(r2.groupoid().order(r2.groupoid().index_of("(1,2)").unwrap()), None);
    }
}
