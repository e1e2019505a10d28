//! The expectation `E` recovered from restriction alone, and the identities
//! it satisfies against the monomial semigroup.

use crate::algebra::{AlgebraElement, ContextExt};
use crate::error::Result;
use crate::groupoid::Elem;
use crate::relations::restriction_le;

/// `max{b ∈ B : b ⊑ n}` among the candidates `n·χ_S` for subsets `S` of
/// the unit space, found without reading coefficients directly.
pub fn max_diagonal_restriction(n: &AlgebraElement) -> Result<AlgebraElement> {
    let ctx = n.ctx();
    let units = ctx.groupoid().units();
    let mut below: Vec<AlgebraElement> = Vec::new();
    for mask in 0u64..(1 << units.len()) {
        let set: Vec<Elem> = units.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &u)| u).collect();
        let b = n * &ctx.indicator(&set);
        if b.is_diagonal() && restriction_le(&b, n)? {
            below.push(b);
        }
    }
    for b in &below {
        let mut is_max = true;
        for c in &below {
            if !restriction_le(c, b)? {
                is_max = false;
                break;
            }
        }
        if is_max {
            return Ok(b.clone());
        }
    }
    Ok(ctx.zero())
}

/// `‖E(n*an) − n*E(a)n‖`.
pub fn normal_residual(n: &AlgebraElement, a: &AlgebraElement) -> f64 {
    let ns = n.star();
    (&(&ns * a) * n).diagonal().distance(&(&(&ns * &a.diagonal()) * n))
}

/// `‖E(na)n − nE(an)‖`.
pub fn shiftable_residual(n: &AlgebraElement, a: &AlgebraElement) -> f64 {
    (&(n * a).diagonal() * n).distance(&(n * &(a * n).diagonal()))
}

/// Off-diagonal size of `E(m)n` (zero when `mn` being diagonal forces
/// `E(m)n ∈ B`); `None` when `mn` is not diagonal.
pub fn bistable_residual(m: &AlgebraElement, n: &AlgebraElement) -> Option<f64> {
    if !(m * n).is_diagonal() {
        return None;
    }
    let x = &m.diagonal() * n;
    Some((&x - &x.diagonal()).sup_norm())
}

/// `|ψ(E(mn)) − ψ(E(m)E(n))|` at every unit `u` with `ψ_u(E(m)) ≠ 0`.
pub fn character_residuals(m: &AlgebraElement, n: &AlgebraElement) -> Vec<f64> {
    let ctx = m.ctx();
    let em = m.diagonal();
    let lhs = (m * n).diagonal();
    let rhs = &em * &n.diagonal();
    ctx.groupoid()
        .units()
        .iter()
        .filter(|&&u| em.in_support(u))
        .map(|&u| (lhs.eval_at(u) - rhs.eval_at(u)).norm())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sampling::{self, Streams};

    #[test]
    fn max_restriction_is_the_diagonal() {
        let s = Streams::new(21);
        for (name, ctx) in fixtures::standard_fixtures() {
            let mut rng = s.rng(name);
            for pattern in ctx.groupoid().bisections() {
                let n = sampling::on_support(&ctx, &pattern, &mut rng);
                let e = max_diagonal_restriction(&n).unwrap();
                assert!(e.approx_eq(&n.diagonal(), 0.0), "{name} {pattern:?}");
            }
        }
    }

    #[test]
    fn identities_on_random_samples() {
        let s = Streams::new(4);
        for (name, ctx) in fixtures::standard_fixtures() {
            let mut rng = s.rng(name);
            let bis = ctx.groupoid().bisections();
            for _ in 0..30 {
                let n = sampling::monomial(&ctx, &bis, &mut rng);
                let m = sampling::monomial(&ctx, &bis, &mut rng);
                let a = sampling::element(&ctx, &mut rng);
                assert!(normal_residual(&n, &a) < 1e-10, "{name}");
                assert!(shiftable_residual(&n, &a) < 1e-10, "{name}");
                if let Some(r) = bistable_residual(&m, &n) {
                    assert!(r < 1e-10, "{name}");
                }
                assert!(character_residuals(&m, &n).iter().all(|&r| r < 1e-10), "{name}");
            }
        }
    }

    #[test]
    fn normality_fails_off_the_semigroup() {
        // A non-normalizer breaks E(n*an) = n*E(a)n.
        let r2 = fixtures::full_equivalence(2);
        let one = num_complex::Complex64::new(1.0, 0.0);
        let n = r2.from_named(&[("(1,1)", one), ("(1,2)", one)]).unwrap();
        let a = r2.delta_named("(1,1)").unwrap();
        assert!(normal_residual(&n, &a) > 0.5);
    }
}
