//! Groupoid isomorphism by pruned backtracking.
//!
//! Units are matched first (by orbit size and isotropy signature), then
//! every non-unit is placed inside the hom-set fixed by its endpoints.
//! Every tentative assignment counts as one node visit against the budget.

use std::collections::BTreeMap;

use crate::groupoid::{Elem, FiniteGroupoid};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoOutcome {
    /// `map[g]` is the image of `g`.
    Isomorphic(Vec<Elem>),
    NotIsomorphic,
    /// The budget ran out before the search finished.
    Inconclusive {
        visited: u64,
    },
}

impl IsoOutcome {
    pub fn bijection(&self) -> Option<&[Elem]> {
        match self {
            IsoOutcome::Isomorphic(m) => Some(m),
            _ => None,
        }
    }
}

/// Per-element invariant: endpoint orbit data plus order for isotropy.
fn element_signature(g: &FiniteGroupoid, e: Elem) -> (bool, Option<usize>, usize, usize) {
    (g.is_unit(e), g.order(e), unit_signature(g, g.source(e)).0, unit_signature(g, g.range(e)).1)
}

/// (orbit size, isotropy group order) for a unit.
fn unit_signature(g: &FiniteGroupoid, u: Elem) -> (usize, usize) {
    (g.orbit(u).len(), g.isotropy_at(u).len())
}

fn isotropy_orders(g: &FiniteGroupoid, u: Elem) -> Vec<usize> {
    let mut v: Vec<usize> = g.isotropy_at(u).into_iter().filter_map(|e| g.order(e)).collect();
    v.sort_unstable();
    v
}

fn global_invariants(g: &FiniteGroupoid) -> (usize, usize, BTreeMap<(usize, usize, Vec<usize>), usize>) {
    let mut units = BTreeMap::new();
    for &u in g.units() {
        let (o, i) = unit_signature(g, u);
        *units.entry((o, i, isotropy_orders(g, u))).or_insert(0) += 1;
    }
    (g.len(), g.units().len(), units)
}

/// Structure-preserving bijection from `a` to `b`, if one exists.
pub fn groupoids_isomorphic(a: &FiniteGroupoid, b: &FiniteGroupoid, budget: u64) -> IsoOutcome {
    find_isomorphism_with(a, b, budget, |_| true)
}

/// Like [`groupoids_isomorphic`], but only accepts complete bijections for
/// which `accept` returns true (e.g. cocycle compatibility).
pub fn find_isomorphism_with(
    a: &FiniteGroupoid,
    b: &FiniteGroupoid,
    budget: u64,
    mut accept: impl FnMut(&[Elem]) -> bool,
) -> IsoOutcome {
    if global_invariants(a) != global_invariants(b) {
        return IsoOutcome::NotIsomorphic;
    }
    let mut order: Vec<Elem> = a.units().to_vec();
    order.extend(a.elements().filter(|&e| !a.is_unit(e)));
    let sig_b: Vec<_> = b.elements().map(|e| element_signature(b, e)).collect();
    let mut search = Search {
        a,
        b,
        order,
        sig_a: a.elements().map(|e| element_signature(a, e)).collect(),
        sig_b,
        map: vec![None; a.len()],
        used: vec![false; b.len()],
        visited: 0,
        budget,
    };
    match search.run(0, &mut accept) {
        Ok(Some(m)) => IsoOutcome::Isomorphic(m),
        Ok(None) => IsoOutcome::NotIsomorphic,
        Err(()) => IsoOutcome::Inconclusive { visited: search.visited },
    }
}

type Signature = (bool, Option<usize>, usize, usize);

struct Search<'a> {
    a: &'a FiniteGroupoid,
    b: &'a FiniteGroupoid,
    order: Vec<Elem>,
    sig_a: Vec<Signature>,
    sig_b: Vec<Signature>,
    map: Vec<Option<Elem>>,
    used: Vec<bool>,
    visited: u64,
    budget: u64,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, accept: &mut impl FnMut(&[Elem]) -> bool) -> Result<Option<Vec<Elem>>, ()> {
        if depth == self.order.len() {
            let m: Vec<Elem> = self.map.iter().map(|x| x.unwrap()).collect();
            return Ok(accept(&m).then_some(m));
        }
        let e = self.order[depth];
        let candidates: Vec<Elem> = self.candidates(e);
        for c in candidates {
            self.visited += 1;
            if self.visited > self.budget {
                return Err(());
            }
            self.map[e] = Some(c);
            self.used[c] = true;
            if self.consistent(e) {
                if let Some(m) = self.run(depth + 1, accept)? {
                    return Ok(Some(m));
                }
            }
            self.map[e] = None;
            self.used[c] = false;
        }
        Ok(None)
    }

    fn candidates(&self, e: Elem) -> Vec<Elem> {
        let (a, b) = (self.a, self.b);
        b.elements()
            .filter(|&c| !self.used[c] && self.sig_a[e] == self.sig_b[c])
            .filter(|&c| {
                if a.is_unit(e) {
                    return true;
                }
                let s = self.map[a.source(e)];
                let r = self.map[a.range(e)];
                s == Some(b.source(c)) && r == Some(b.range(c))
            })
            .collect()
    }

    /// Products and inverses among assigned elements involving `e`.
    fn consistent(&self, e: Elem) -> bool {
        let (a, b) = (self.a, self.b);
        let fe = self.map[e].unwrap();
        if let Some(fi) = self.map[a.inverse(e)] {
            if b.inverse(fe) != fi {
                return false;
            }
        }
        for x in a.elements() {
            let Some(fx) = self.map[x] else { continue };
            for (l, r, fl, fr) in [(e, x, fe, fx), (x, e, fx, fe)] {
                if let Some(p) = a.compose(l, r) {
                    if let Some(fp) = self.map[p] {
                        if b.compose(fl, fr) != Some(fp) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Checks that `map` is a groupoid isomorphism `a → b`.
pub fn is_isomorphism(a: &FiniteGroupoid, b: &FiniteGroupoid, map: &[Elem]) -> bool {
    if map.len() != a.len() || a.len() != b.len() {
        return false;
    }
    let mut seen = vec![false; b.len()];
    for &x in map {
        if x >= b.len() || std::mem::replace(&mut seen[x], true) {
            return false;
        }
    }
    a.elements().all(|g| {
        a.is_unit(g) == b.is_unit(map[g])
            && b.inverse(map[g]) == map[a.inverse(g)]
            && a.elements().all(|h| a.compose(g, h).map(|p| map[p]) == b.compose(map[g], map[h]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    /// Exhaustive search over all permutations, independent of the pruning.
    fn brute_force(a: &FiniteGroupoid, b: &FiniteGroupoid) -> bool {
        fn perms(n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
            if cur.len() == n {
                return f(cur);
            }
            for i in 0..n {
                if !used[i] {
                    used[i] = true;
                    cur.push(i);
                    if perms(n, cur, used, f) {
                        return true;
                    }
                    cur.pop();
                    used[i] = false;
                }
            }
            false
        }
        a.len() == b.len()
            && perms(a.len(), &mut Vec::new(), &mut vec![false; a.len()], &mut |m| is_isomorphism(a, b, m))
    }

    #[test]
    fn r2_is_the_swap_groupoid() {
        let r2 = fixtures::full_equivalence(2);
        let sw = fixtures::swap_transformation();
        assert!(brute_force(r2.groupoid(), sw.groupoid()));
        let m = groupoids_isomorphic(r2.groupoid(), sw.groupoid(), DEFAULT_BUDGET);
        assert!(is_isomorphism(r2.groupoid(), sw.groupoid(), m.bijection().unwrap()));
    }

    #[test]
    fn z4_is_not_klein() {
        let z4 = fixtures::cyclic(4);
        let v4 = fixtures::klein_four();
        assert!(!brute_force(z4.groupoid(), v4.groupoid()));
        assert_eq!(groupoids_isomorphic(z4.groupoid(), v4.groupoid(), DEFAULT_BUDGET), IsoOutcome::NotIsomorphic);
    }

    #[test]
    fn pruned_search_agrees_with_brute_force_on_small_fixtures() {
        let small: Vec<_> = fixtures::standard_fixtures().into_iter().filter(|(_, c)| c.len() <= 6).collect();
        for (na, a) in &small {
            for (nb, b) in &small {
                let found = groupoids_isomorphic(a.groupoid(), b.groupoid(), DEFAULT_BUDGET);
                assert_eq!(found.bijection().is_some(), brute_force(a.groupoid(), b.groupoid()), "{na} vs {nb}");
                if let Some(m) = found.bijection() {
                    assert!(is_isomorphism(a.groupoid(), b.groupoid(), m));
                }
            }
        }
    }

    #[test]
    fn reflexive_and_symmetric() {
        let all = fixtures::standard_fixtures();
        for (na, a) in &all {
            let m = groupoids_isomorphic(a.groupoid(), a.groupoid(), DEFAULT_BUDGET);
            assert!(is_isomorphism(a.groupoid(), a.groupoid(), m.bijection().unwrap()), "{na}");
            for (nb, b) in &all {
                let ab = groupoids_isomorphic(a.groupoid(), b.groupoid(), DEFAULT_BUDGET).bijection().is_some();
                let ba = groupoids_isomorphic(b.groupoid(), a.groupoid(), DEFAULT_BUDGET).bijection().is_some();
                assert_eq!(ab, ba, "{na} vs {nb}");
            }
        }
    }

    #[test]
    fn tiny_budget_is_inconclusive() {
        let r4 = fixtures::full_equivalence(4);
        assert!(matches!(groupoids_isomorphic(r4.groupoid(), r4.groupoid(), 3), IsoOutcome::Inconclusive { .. }));
    }

    #[test]
    fn accept_predicate_filters() {
        let r2 = fixtures::full_equivalence(2);
        let g = r2.groupoid();
        let u1 = g.index_of("(1,1)").unwrap();
        // Only accept the automorphism that swaps the two units.
        let m = find_isomorphism_with(g, g, DEFAULT_BUDGET, |m| m[u1] != u1);
        assert_ne!(m.bijection().unwrap()[u1], u1);
        let none = find_isomorphism_with(g, g, DEFAULT_BUDGET, |_| false);
        assert_eq!(none, IsoOutcome::NotIsomorphic);
    }
}
