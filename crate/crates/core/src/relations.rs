//! Restriction (`⊑`) and domination (`<`) on monomial elements.
//!
//! Witnesses are built by exact diagonal functional calculus and then
//! re-certified; support-level oracles are kept alongside for
//! cross-checking.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::{AlgebraElement, ContextExt};
use crate::error::{Error, Result};
use crate::groupoid::Elem;
use crate::repr::cstar_norm;

fn require_monomial(a: &AlgebraElement) -> Result<()> {
    if a.is_monomial() {
        Ok(())
    } else {
        Err(Error::NotMonomial)
    }
}

/// Equality threshold scaled to the size of the operands.
fn tol_for(a: &AlgebraElement, b: &AlgebraElement) -> f64 {
    a.ctx().zero_tol() * (1.0 + a.sup_norm().max(b.sup_norm()))
}

fn close(a: &AlgebraElement, b: &AlgebraElement) -> bool {
    a.distance(b) <= tol_for(a, b)
}

/// Largest off-diagonal coefficient.
fn off_diagonal(a: &AlgebraElement) -> f64 {
    (a - &a.diagonal()).sup_norm()
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Reciprocal on the support, zero elsewhere (threshold `tol²` since the
/// argument is a squared modulus).
fn pinv(tol: f64) -> impl Fn(f64) -> f64 {
    move |x| if x > tol * tol { 1.0 / x } else { 0.0 }
}

/// Indicator of the sources of `supp(m)`.
pub fn source_indicator(m: &AlgebraElement) -> AlgebraElement {
    let ctx = m.ctx();
    let g = ctx.groupoid();
    let units: Vec<Elem> = m.support().iter().map(|&e| g.source(e)).collect();
    ctx.indicator(&units)
}

/// `m` agrees with `n` on `supp(m)`.
pub fn restricts_pointwise(m: &AlgebraElement, n: &AlgebraElement) -> bool {
    let tol = tol_for(m, n);
    m.support().iter().all(|&g| (m.coeff(g) - n.coeff(g)).norm() <= tol)
}

/// Witness route: with `b` the indicator of `s(supp m)`, `m = mb = nb`.
pub fn restricts_by_witness(m: &AlgebraElement, n: &AlgebraElement) -> bool {
    let b = source_indicator(m);
    close(m, &(m * &b)) && close(m, &(n * &b))
}

/// `m ⊑ n`; both routes are evaluated and must agree.
pub fn restriction_le(m: &AlgebraElement, n: &AlgebraElement) -> Result<bool> {
    require_monomial(m)?;
    require_monomial(n)?;
    let w = restricts_by_witness(m, n);
    if w != restricts_pointwise(m, n) {
        return Err(Error::OracleDisagreement("restriction".into()));
    }
    Ok(w)
}

/// Diagonal `b` with `m = mb = nb` for arbitrary (not necessarily
/// monomial) elements, by an exact per-unit least-squares solve.
pub fn general_restriction(m: &AlgebraElement, n: &AlgebraElement) -> Option<AlgebraElement> {
    let ctx = m.ctx();
    let g = ctx.groupoid();
    let mut b = ctx.zero();
    // (xb)(h) = x(h)·b(s(h)); collect the scalar equations per unit.
    for &u in g.units() {
        let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
        for h in g.elements().filter(|&h| g.source(h) == u) {
            for (a, c) in [(m.coeff(h), m.coeff(h)), (n.coeff(h), m.coeff(h))] {
                num += a.conj() * c;
                den += a.norm_sqr();
            }
        }
        if den > 0.0 {
            b.set_coeff(u, num / den);
        }
    }
    (close(m, &(m * &b)) && close(m, &(n * &b))).then_some(b)
}

/// A certified `s` with `m <_s n`, plus the worst residual seen.
#[derive(Clone, Debug)]
pub struct DominationWitness {
    pub s: AlgebraElement,
    pub residual: f64,
}

/// Residual of `m <_s n`: off-diagonal parts of `sm, ms, sn, ns` and the
/// errors in `nsm = m = msn`.
pub fn witness_residual(m: &AlgebraElement, n: &AlgebraElement, s: &AlgebraElement) -> f64 {
    let sm = s * m;
    let ms = m * s;
    let sn = s * n;
    let ns = n * s;
    [
        off_diagonal(&sm),
        off_diagonal(&ms),
        off_diagonal(&sn),
        off_diagonal(&ns),
        (&ns * m).distance(m),
        (&ms * n).distance(m),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Checks `m <_s n`.
pub fn certify(m: &AlgebraElement, n: &AlgebraElement, s: &AlgebraElement) -> Option<DominationWitness> {
    let residual = witness_residual(m, n, s);
    let scale = 1.0 + cstar_norm(s) * (1.0 + m.sup_norm().max(n.sup_norm()));
    (residual <= m.ctx().zero_tol() * scale * scale).then(|| DominationWitness { s: s.clone(), residual })
}

/// The canonical candidate `s = f(n*n)n*` with `f(x) = 1/x` off zero.
pub fn canonical_witness(n: &AlgebraElement) -> AlgebraElement {
    let tol = n.ctx().zero_tol();
    let f = (&n.star() * n).map_positive(pinv(tol)).expect("n*n is diagonal for monomial n");
    &f * &n.star()
}

/// `m < n`, certified algebraically.
pub fn dominates(m: &AlgebraElement, n: &AlgebraElement) -> Result<Option<DominationWitness>> {
    require_monomial(m)?;
    require_monomial(n)?;
    Ok(certify(m, n, &canonical_witness(n)))
}

/// Support-level oracle: `supp(m) ⊆ supp(n)`.
pub fn dominates_by_support(m: &AlgebraElement, n: &AlgebraElement) -> bool {
    m.support().iter().all(|&g| n.in_support(g))
}

/// Support inclusion together with pointwise agreement (`m ⊑ n`); strictly
/// stronger than `<`.
pub fn dominates_and_restricts(m: &AlgebraElement, n: &AlgebraElement) -> bool {
    dominates_by_support(m, n) && restricts_pointwise(m, n)
}

/// Blind search for any witness: every bisection pattern for `s` whose
/// product patterns are diagonal, followed by a linear solve for the
/// coefficients. Exponential; intended for `|G| ≤ 6`.
pub fn dominates_brute_force(m: &AlgebraElement, n: &AlgebraElement) -> bool {
    let ctx = m.ctx();
    let g = ctx.groupoid();
    for pattern in g.bisections() {
        let ones = ctx.indicator(&pattern);
        let diag = [&ones * m, m * &ones, &ones * n, n * &ones];
        if !diag.iter().all(AlgebraElement::is_diagonal) {
            continue;
        }
        let cols: Vec<(AlgebraElement, AlgebraElement)> = pattern
            .iter()
            .map(|&k| {
                let d = ctx.delta(k);
                (&(n * &d) * m, &(m * &d) * n)
            })
            .collect();
        let rows = 2 * g.len();
        let rhs = DVector::from_fn(rows, |r, _| m.coeff(r % g.len()));
        if cols.is_empty() {
            if m.is_zero() {
                return true;
            }
            continue;
        }
        let a = DMatrix::from_fn(rows, cols.len(), |r, c| {
            let (x, y) = &cols[c];
            if r < g.len() {
                x.coeff(r)
            } else {
                y.coeff(r - g.len())
            }
        });
        let Ok(x) = a.clone().svd(true, true).solve(&rhs, 1e-12) else {
            continue;
        };
        let err = (&a * &x - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if err <= tol_for(m, n) {
            return true;
        }
    }
    false
}

/// Output of [`interpolate`]: `m <_s l` and `l <_t n`.
#[derive(Clone, Debug)]
pub struct Interpolant {
    pub l: AlgebraElement,
    pub inner: DominationWitness,
    pub outer: DominationWitness,
}

fn g_interp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x.min(1.0 / x)
    }
}

/// Replaces `s` by `ss*n*`, which keeps `m <_· n` and makes `sn`, `ns`
/// positive.
fn positive_witness(s: &AlgebraElement, n: &AlgebraElement) -> AlgebraElement {
    &(s * &s.star()) * &n.star()
}

/// An `l ∈ nB₊ ∩ B₊n` with `m <_s l < n`.
pub fn interpolate(m: &AlgebraElement, n: &AlgebraElement, w: &DominationWitness) -> Result<Interpolant> {
    let inner_check = certify(m, n, &w.s).ok_or_else(|| Error::InvalidWitness("m <_s n fails".into()))?;
    let sp = positive_witness(&inner_check.s, n);
    let sn = &sp * n;
    let l = n * &sn.map_positive(g_interp)?;
    let tol = n.ctx().zero_tol();
    let t = &sn.map_positive(pinv(tol.sqrt()))? * &sp;
    let inner = certify(m, &l, &w.s).ok_or_else(|| Error::InvalidWitness("m <_s l fails".into()))?;
    let outer = certify(&l, n, &t).ok_or_else(|| Error::InvalidWitness("l <_t n fails".into()))?;
    Ok(Interpolant { l, inner, outer })
}

/// `n_j = n·f_j(n*n)` for `j = 1..=k`, with `f_j(x) = min(1, jx)`.
#[derive(Clone, Debug)]
pub struct Approximation {
    pub terms: Vec<(AlgebraElement, DominationWitness)>,
    /// Least `j` with `n_j = n`.
    pub stabilization: usize,
    /// `‖n − n_j‖` for each term.
    pub errors: Vec<f64>,
}

pub fn dominated_approximation(n: &AlgebraElement, k: usize) -> Result<Approximation> {
    require_monomial(n)?;
    let tol = n.ctx().zero_tol();
    let nn = &n.star() * n;
    let min = n.support().iter().map(|&g| n.coeff(g).norm_sqr()).fold(f64::INFINITY, f64::min);
    let stabilization = if min.is_finite() { (1..).find(|&j| j as f64 * min >= 1.0 - 1e-12).unwrap() } else { 1 };
    let s = &nn.map_positive(pinv(tol))? * &n.star();
    let mut terms = Vec::with_capacity(k);
    let mut errors = Vec::with_capacity(k);
    for j in 1..=k {
        let nj = n * &nn.map_positive(|x| (j as f64 * x).min(1.0))?;
        let w = certify(&nj, n, &s).ok_or_else(|| Error::InvalidWitness(format!("n_{j} < n fails")))?;
        errors.push(cstar_norm(&(n - &nj)));
        terms.push((nj, w));
    }
    Ok(Approximation { terms, stabilization, errors })
}

/// Residual of `m <¹_t n`: the domination residual together with the
/// failure of `tn`, `nt` to be positive contractions.
pub fn ball_residual(m: &AlgebraElement, n: &AlgebraElement, t: &AlgebraElement) -> f64 {
    let mut worst = witness_residual(m, n, t);
    for x in [t * n, n * t] {
        let d = x.diagonal();
        let neg =
            d.ctx().groupoid().units().iter().map(|&u| (-d.coeff(u).re).max(d.coeff(u).im.abs())).fold(0.0, f64::max);
        worst = worst.max(neg).max(d.sup_norm() - 1.0);
    }
    worst
}

/// A witness with `tm, mt ∈ B`, `tn, nt ∈ B¹₊` and `ntm = m = mtn`.
#[derive(Clone, Debug)]
pub struct BallWitness {
    pub t: AlgebraElement,
    /// The diagonal `b` with `t = b·n*`.
    pub b: AlgebraElement,
    pub residual: f64,
}

/// The construction from an arbitrary certified `s`.
pub fn ball_witness_from(m: &AlgebraElement, n: &AlgebraElement, s: &AlgebraElement) -> Result<BallWitness> {
    certify(m, n, s).ok_or_else(|| Error::InvalidWitness("m <_s n fails".into()))?;
    let tol = n.ctx().zero_tol();
    let s1 = positive_witness(s, n);
    let f = (n * &s1).map_positive(|x| if x <= 0.0 { 0.0 } else { x.min(1.0 / x) })?;
    let s2 = &s1 * &f;
    let r = 16.0 * cstar_norm(&s2).powi(4) + 1.0;
    let g = (&s2 * n).map_positive(|x| (2.0 * x - 1.0).max(0.0))?;
    let h = (&n.star() * n).map_positive(|x| if x > tol * tol { (1.0 / x).min(r * x) } else { 0.0 })?;
    let b = &g * &h;
    let t = &b * &n.star();
    let residual = ball_residual(m, n, &t);
    let scale = 1.0 + cstar_norm(&t) * (1.0 + m.sup_norm().max(n.sup_norm()));
    if residual > tol * scale * scale {
        return Err(Error::InvalidWitness(format!("ball certificate residual {residual:e}")));
    }
    Ok(BallWitness { t, b, residual })
}

pub fn ball_witness(m: &AlgebraElement, n: &AlgebraElement) -> Result<BallWitness> {
    let w = dominates(m, n)?.ok_or_else(|| Error::NotDominated("support of m is not inside support of n".into()))?;
    ball_witness_from(m, n, &w.s)
}

/// An `l ∈ nB₊ ∩ B₊n` with every `mᵢ <_{l*} l` and `l < n`.
pub fn predomain_interpolant(ms: &[AlgebraElement], n: &AlgebraElement) -> Result<AlgebraElement> {
    let ctx = n.ctx();
    let mut b = ctx.zero();
    for m in ms {
        let bw = ball_witness(m, n)?;
        for &u in ctx.groupoid().units() {
            let v = bw.b.coeff(u).re.max(b.coeff(u).re);
            b.set_coeff(u, real(v));
        }
    }
    let s = &b * &n.star();
    let e = (&s * n).map_positive(g_interp)?;
    let l = n * &(&b * &e).map_positive(f64::sqrt)?;
    let ls = l.star();
    for m in ms {
        certify(m, &l, &ls).ok_or_else(|| Error::InvalidWitness("m <_{l*} l fails".into()))?;
    }
    if dominates(&l, n)?.is_none() {
        return Err(Error::InvalidWitness("l < n fails".into()));
    }
    Ok(l)
}
