//! Normalized 𝕋-valued 2-cocycles on a finite groupoid.

use indexmap::IndexMap;

use crate::groupoid::{pair_key, split_pair_key, Elem, FiniteGroupoid, Violation};
use crate::phase::{Phase, PhaseRepr};

/// Dense table of phases on composable pairs; non-composable slots hold one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle {
    n: usize,
    values: Vec<Phase>,
}

impl Cocycle {
    pub fn trivial(g: &FiniteGroupoid) -> Self {
        Cocycle { n: g.len(), values: vec![Phase::ONE; g.len() * g.len()] }
    }

    /// Tabulates `f` on composable pairs and validates the result.
    pub fn from_fn(g: &FiniteGroupoid, f: impl Fn(Elem, Elem) -> Phase) -> Result<Self, Vec<Violation>> {
        let mut c = Cocycle::trivial(g);
        for (a, b) in g.composable_pairs() {
            c.values[a * c.n + b] = f(a, b);
        }
        let v = c.violations(g);
        if v.is_empty() {
            Ok(c)
        } else {
            Err(v)
        }
    }

    /// Reads `"g|h" → {"turns": [p, q]}` entries; absent entries are one.
    pub fn from_tables(g: &FiniteGroupoid, entries: &IndexMap<String, PhaseRepr>) -> Result<Self, Vec<Violation>> {
        let mut c = Cocycle::trivial(g);
        let mut v = Vec::new();
        for (key, repr) in entries {
            let Some((a, b)) = split_pair_key(key) else {
                v.push(Violation::MalformedKey { table: "cocycle", key: key.clone() });
                continue;
            };
            let (Ok(ai), Ok(bi)) = (g.index_of(a), g.index_of(b)) else {
                v.push(Violation::MalformedKey { table: "cocycle", key: key.clone() });
                continue;
            };
            if !g.composable(ai, bi) {
                v.push(Violation::CocycleOnNonComposable { g: a.to_string(), h: b.to_string() });
                continue;
            }
            match Phase::try_from(*repr) {
                Ok(p) => c.values[ai * c.n + bi] = p,
                Err(_) => v.push(Violation::CocycleBadPhase { key: key.clone() }),
            }
        }
        if v.is_empty() {
            v = c.violations(g);
        }
        if v.is_empty() {
            Ok(c)
        } else {
            Err(v)
        }
    }

    /// Non-trivial entries in `"g|h"` form.
    pub fn to_tables(&self, g: &FiniteGroupoid) -> IndexMap<String, PhaseRepr> {
        g.composable_pairs()
            .filter(|&(a, b)| !self.get(a, b).is_one())
            .map(|(a, b)| (pair_key(g.name(a), g.name(b)), self.get(a, b).into()))
            .collect()
    }

    pub fn get(&self, g: Elem, h: Elem) -> Phase {
        self.values[g * self.n + h]
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(Phase::is_one)
    }

    /// Normalization and the 2-cocycle identity
    /// `σ(g,h)σ(gh,k) = σ(h,k)σ(g,hk)`, checked exactly.
    pub fn violations(&self, g: &FiniteGroupoid) -> Vec<Violation> {
        let mut v = Vec::new();
        for a in g.elements() {
            if !self.get(g.range(a), a).is_one() || !self.get(a, g.source(a)).is_one() {
                v.push(Violation::CocycleNotNormalized { element: g.name(a).to_string() });
            }
        }
        for (a, b) in g.composable_pairs() {
            let ab = g.compose(a, b).unwrap();
            for k in g.elements().filter(|&k| g.composable(b, k)) {
                let bk = g.compose(b, k).unwrap();
                let lhs = self.get(a, b) * self.get(ab, k);
                let rhs = self.get(b, k) * self.get(a, bk);
                if lhs != rhs {
                    v.push(Violation::CocycleIdentity {
                        g: g.name(a).to_string(),
                        h: g.name(b).to_string(),
                        k: g.name(k).to_string(),
                    });
                }
            }
        }
        v
    }

    /// `(g, h) ↦ self(φ(g), φ(h))` for a bijection `φ` from another groupoid.
    pub fn pull_back(&self, domain: &FiniteGroupoid, phi: &[Elem]) -> Cocycle {
        let mut c = Cocycle::trivial(domain);
        for (a, b) in domain.composable_pairs() {
            c.values[a * c.n + b] = self.get(phi[a], phi[b]);
        }
        c
    }
}

/// Whether `a` and `b` differ by a coboundary `d(g)d(h)/d(gh)` with `d`
/// valued in 𝕋.
///
/// Writing the quotient as integers modulo `L` (the common denominator),
/// the quotient is a coboundary over ℝ/ℤ exactly when it pairs to zero
/// modulo `L` with every integer vector in the left kernel of the
/// coboundary matrix. That kernel is read off an integer row-echelon form.
pub fn cohomologous(g: &FiniteGroupoid, a: &Cocycle, b: &Cocycle) -> bool {
    let pairs: Vec<(Elem, Elem)> = g.composable_pairs().collect();
    let diffs: Vec<Phase> = pairs.iter().map(|&(x, y)| b.get(x, y) * a.get(x, y).conj()).collect();
    if diffs.iter().all(Phase::is_one) {
        return true;
    }
    let l = Phase::common_denominator(diffs.iter()) as i128;
    let rhs: Vec<i128> = diffs.iter().map(|p| (p.numer() as i128) * (l / p.denom() as i128)).collect();

    let m = pairs.len();
    let n = g.len();
    let mut h: Vec<Vec<i128>> = pairs
        .iter()
        .map(|&(x, y)| {
            let mut row = vec![0i128; n];
            row[x] += 1;
            row[y] += 1;
            row[g.compose(x, y).unwrap()] -= 1;
            row
        })
        .collect();
    // Row operations are mirrored on `u` modulo `l`; only `w·rhs mod l` matters.
    let mut u: Vec<Vec<i128>> = (0..m)
        .map(|i| {
            let mut row = vec![0i128; m];
            row[i] = 1;
            row
        })
        .collect();

    let mut rank = 0;
    for col in 0..n {
        loop {
            let pivot = (rank..m).filter(|&i| h[i][col] != 0).min_by_key(|&i| h[i][col].abs());
            let Some(p) = pivot else { break };
            h.swap(rank, p);
            u.swap(rank, p);
            let mut done = true;
            for i in rank + 1..m {
                if h[i][col] != 0 {
                    let q = h[i][col] / h[rank][col];
                    for j in 0..n {
                        h[i][j] -= q * h[rank][j];
                    }
                    for j in 0..m {
                        u[i][j] = (u[i][j] - q * u[rank][j]).rem_euclid(l);
                    }
                    if h[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                rank += 1;
                break;
            }
        }
        if rank == m {
            break;
        }
    }
    u[rank..].iter().all(|w| w.iter().zip(&rhs).map(|(x, y)| x * y).sum::<i128>().rem_euclid(l) == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn pauli_cocycle_is_valid_and_nontrivial() {
        let ctx = fixtures::klein_four_pauli();
        assert!(ctx.cocycle().violations(ctx.groupoid()).is_empty());
        assert!(!ctx.cocycle().is_trivial());
        let triv = Cocycle::trivial(ctx.groupoid());
        assert!(!cohomologous(ctx.groupoid(), ctx.cocycle(), &triv));
    }

    #[test]
    fn broken_identity_is_rejected() {
        let g = fixtures::klein_four().groupoid().clone();
        let x = g.index_of("(1,0)").unwrap();
        let y = g.index_of("(0,1)").unwrap();
        let bad = Cocycle::from_fn(&g, |a, b| if a == x && b == y { Phase::i() } else { Phase::ONE });
        let v = bad.unwrap_err();
        assert!(v.iter().any(|v| matches!(v, Violation::CocycleIdentity { .. })));
    }

    #[test]
    fn unnormalized_is_rejected() {
        let g = fixtures::cyclic(2).groupoid().clone();
        let bad = Cocycle::from_fn(&g, |_, _| Phase::minus_one());
        assert!(bad.unwrap_err().iter().any(|v| matches!(v, Violation::CocycleNotNormalized { .. })));
    }

    fn coboundary(g: &FiniteGroupoid, d: &[Phase]) -> Cocycle {
        Cocycle::from_fn(g, |a, b| d[a] * d[b] * d[g.compose(a, b).unwrap()].conj()).unwrap()
    }

    #[test]
    fn coboundaries_are_trivial_in_cohomology() {
        for (name, ctx) in fixtures::standard_fixtures() {
            let g = ctx.groupoid();
            let d: Vec<Phase> = g
                .elements()
                .map(|e| if g.is_unit(e) { Phase::ONE } else { Phase::from_turns(e as i64 + 1, 7) })
                .collect();
            let cb = coboundary(g, &d);
            let triv = Cocycle::trivial(g);
            assert!(cohomologous(g, &triv, &cb), "{name}");
            let twisted = Cocycle::from_fn(g, |a, b| ctx.cocycle().get(a, b) * cb.get(a, b)).unwrap();
            assert!(cohomologous(g, ctx.cocycle(), &twisted), "{name}");
        }
    }

    #[test]
    fn z4_cocycles_with_quarter_turns_are_coboundaries() {
        // H²(ℤ_n, 𝕋) = 0, so every normalized cocycle on a cyclic group is trivial.
        let g = fixtures::cyclic(4).groupoid().clone();
        let carry = Cocycle::from_fn(&g, |a, b| if a + b >= 4 { Phase::from_turns(1, 3) } else { Phase::ONE }).unwrap();
        assert!(cohomologous(&g, &Cocycle::trivial(&g), &carry));
    }

    #[test]
    fn tables_round_trip() {
        let ctx = fixtures::klein_four_pauli();
        let t = ctx.cocycle().to_tables(ctx.groupoid());
        let back = Cocycle::from_tables(ctx.groupoid(), &t).unwrap();
        assert_eq!(&back, ctx.cocycle());
    }
}
