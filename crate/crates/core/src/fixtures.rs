//! Small named groupoids (with cocycles) used throughout the tests and CLI.

use crate::algebra::{Context, TwistedGroupoid};
use crate::cocycle::Cocycle;
use crate::groupoid::FiniteGroupoid;
use crate::phase::Phase;

/// Full equivalence relation on `k` points: elements `(i,j)`, units `(i,i)`.
pub fn full_equivalence(k: usize) -> Context {
    TwistedGroupoid::untwisted(pair_groupoid(k, ""))
}

fn pair_groupoid(k: usize, prefix: &str) -> FiniteGroupoid {
    let idx = |i: usize, j: usize| i * k + j;
    let names = (0..k * k).map(|e| format!("{prefix}({},{})", e / k + 1, e % k + 1)).collect();
    FiniteGroupoid::from_fn(
        names,
        |e| idx(e % k, e % k),
        |e| idx(e / k, e / k),
        |e| idx(e % k, e / k),
        |a, b| idx(a / k, b % k),
    )
    .expect("pair groupoid is valid")
}

/// Cyclic group ℤ_n with elements `"0"`, …, `"n-1"`.
pub fn cyclic(n: usize) -> Context {
    TwistedGroupoid::untwisted(cyclic_group(n, ""))
}

fn cyclic_group(n: usize, prefix: &str) -> FiniteGroupoid {
    FiniteGroupoid::from_fn(
        (0..n).map(|i| format!("{prefix}{i}")).collect(),
        |_| 0,
        |_| 0,
        |a| (n - a) % n,
        |a, b| (a + b) % n,
    )
    .expect("cyclic group is valid")
}

/// ℤ₂×ℤ₂ ordered `(0,0), (1,0), (0,1), (1,1)`; element `e` is `(e&1, e>>1)`.
fn klein_group() -> FiniteGroupoid {
    FiniteGroupoid::from_fn(
        vec!["(0,0)".into(), "(1,0)".into(), "(0,1)".into(), "(1,1)".into()],
        |_| 0,
        |_| 0,
        |a| a,
        |a, b| a ^ b,
    )
    .expect("Klein four-group is valid")
}

pub fn klein_four() -> Context {
    TwistedGroupoid::untwisted(klein_group())
}

/// ℤ₂×ℤ₂ twisted by `σ((a,b),(c,d)) = (−1)^{bc}`; its algebra is `M₂`.
pub fn klein_four_pauli() -> Context {
    let g = klein_group();
    let cocycle = Cocycle::from_fn(&g, |x, y| {
        let b = x >> 1;
        let c = y & 1;
        if b * c == 1 {
            Phase::minus_one()
        } else {
            Phase::ONE
        }
    })
    .expect("Pauli cocycle is valid");
    TwistedGroupoid::new(g, cocycle)
}

/// ℤ₂ acting on two points by the swap: elements `(γ,x)` with
/// `s = (e,x)`, `r = (e,γx)`.
pub fn swap_transformation() -> Context {
    let names = vec!["(e,1)".into(), "(e,2)".into(), "(s,1)".into(), "(s,2)".into()];
    let act = |gamma: usize, x: usize| if gamma == 0 { x } else { 1 - x };
    let elem = |gamma: usize, x: usize| gamma * 2 + x;
    let g = FiniteGroupoid::from_fn(
        names,
        |e| elem(0, e % 2),
        move |e| elem(0, act(e / 2, e % 2)),
        move |e| elem(e / 2, act(e / 2, e % 2)),
        move |a, b| elem((a / 2) ^ (b / 2), b % 2),
    )
    .expect("swap transformation groupoid is valid");
    TwistedGroupoid::untwisted(g)
}

/// Disjoint union of `R₂` (elements `R(i,j)`) and `ℤ₂` (elements `Z0`, `Z1`).
pub fn r2_disjoint_z2() -> Context {
    let r = pair_groupoid(2, "R");
    let z = cyclic_group(2, "Z");
    let nr = r.len();
    let names: Vec<String> = r.names().iter().chain(z.names()).cloned().collect();
    let lift = |e: usize, f: &dyn Fn(&FiniteGroupoid, usize) -> usize| {
        if e < nr {
            f(&r, e)
        } else {
            nr + f(&z, e - nr)
        }
    };
    let g = FiniteGroupoid::from_fn(
        names,
        |e| lift(e, &|g, x| g.source(x)),
        |e| lift(e, &|g, x| g.range(x)),
        |e| lift(e, &|g, x| g.inverse(x)),
        |a, b| {
            if a < nr {
                r.compose(a, b).unwrap()
            } else {
                nr + z.compose(a - nr, b - nr).unwrap()
            }
        },
    )
    .expect("disjoint union is valid");
    TwistedGroupoid::untwisted(g)
}

/// Look up a fixture by name.
pub fn by_name(name: &str) -> Option<Context> {
    Some(match name {
        "R2" => full_equivalence(2),
        "R3" => full_equivalence(3),
        "R4" => full_equivalence(4),
        "Z2" => cyclic(2),
        "Z3" => cyclic(3),
        "Z4" => cyclic(4),
        "V4" => klein_four(),
        "V4_pauli" => klein_four_pauli(),
        "swap" => swap_transformation(),
        "R2_disj_Z2" => r2_disjoint_z2(),
        _ => return None,
    })
}

pub const FIXTURE_NAMES: [&str; 10] = ["R2", "R3", "R4", "Z2", "Z3", "Z4", "V4", "V4_pauli", "swap", "R2_disj_Z2"];

/// Every named fixture, in a fixed order.
pub fn standard_fixtures() -> Vec<(&'static str, Context)> {
    FIXTURE_NAMES.iter().map(|&n| (n, by_name(n).expect("listed fixture exists"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let sizes: Vec<(usize, usize)> =
            standard_fixtures().iter().map(|(_, c)| (c.groupoid().len(), c.groupoid().units().len())).collect();
        assert_eq!(sizes, vec![(4, 2), (9, 3), (16, 4), (2, 1), (3, 1), (4, 1), (4, 1), (4, 1), (4, 2), (6, 3)]);
    }

    #[test]
    fn all_at_most_sixteen_elements() {
        assert!(standard_fixtures().iter().all(|(_, c)| c.len() <= 16));
    }

    #[test]
    fn unknown_name() {
        assert!(by_name("nope").is_none());
    }
}
