//! The twisted convolution *-algebra of a finite groupoid.
//!
//! Elements are functions on the groupoid (one complex coefficient per
//! element). With the canonical section `g ↦ (1, g)` these are exactly the
//! 𝕋-contravariant functions on the twist, so no separate twist object is
//! ever built: the cocycle enters only through convolution and involution.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::groupoid::{Elem, FiniteGroupoid, GroupoidTables};

/// Default threshold below which a coefficient counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// A finite groupoid together with a normalized 2-cocycle.
#[derive(Debug)]
pub struct TwistedGroupoid {
    groupoid: FiniteGroupoid,
    cocycle: Cocycle,
    phases: Vec<Complex64>,
    zero_tol: f64,
}

impl PartialEq for TwistedGroupoid {
    fn eq(&self, other: &Self) -> bool {
        self.groupoid == other.groupoid && self.cocycle == other.cocycle && self.zero_tol == other.zero_tol
    }
}

/// Shared handle to an algebra context.
pub type Context = Arc<TwistedGroupoid>;

impl TwistedGroupoid {
    pub fn new(groupoid: FiniteGroupoid, cocycle: Cocycle) -> Context {
        Self::with_tolerance(groupoid, cocycle, DEFAULT_ZERO_TOL)
    }

    pub fn with_tolerance(groupoid: FiniteGroupoid, cocycle: Cocycle, zero_tol: f64) -> Context {
        let n = groupoid.len();
        let mut phases = vec![Complex64::new(1.0, 0.0); n * n];
        for (g, h) in groupoid.composable_pairs() {
            phases[g * n + h] = cocycle.get(g, h).to_complex();
        }
        Arc::new(TwistedGroupoid { groupoid, cocycle, phases, zero_tol })
    }

    pub fn untwisted(groupoid: FiniteGroupoid) -> Context {
        let c = Cocycle::trivial(&groupoid);
        Self::new(groupoid, c)
    }

    /// Validates groupoid and cocycle tables together.
    pub fn from_tables(t: &GroupoidTables) -> Result<Context> {
        let groupoid = FiniteGroupoid::from_tables(t)?;
        let cocycle = Cocycle::from_tables(&groupoid, &t.cocycle)
            .map_err(|violations| Error::Invalid(crate::groupoid::ValidationReport { violations }))?;
        Ok(Self::new(groupoid, cocycle))
    }

    pub fn to_tables(&self) -> GroupoidTables {
        let mut t = self.groupoid.to_tables();
        t.cocycle = self.cocycle.to_tables(&self.groupoid);
        t
    }

    /// Same groupoid and cocycle, different zero threshold.
    pub fn retolerance(&self, zero_tol: f64) -> Context {
        Self::with_tolerance(self.groupoid.clone(), self.cocycle.clone(), zero_tol)
    }

    pub fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.cocycle
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn len(&self) -> usize {
        self.groupoid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groupoid.is_empty()
    }

    /// `σ(g, h)` as a complex number (one off composable pairs).
    #[inline]
    pub fn sigma(&self, g: Elem, h: Elem) -> Complex64 {
        self.phases[g * self.len() + h]
    }
}

/// Element constructors that need the shared handle.
pub trait ContextExt {
    fn zero(&self) -> AlgebraElement;
    fn delta(&self, g: Elem) -> AlgebraElement;
    fn delta_named(&self, name: &str) -> Result<AlgebraElement>;
    fn identity(&self) -> AlgebraElement;
    fn element(&self, coeffs: Vec<Complex64>) -> AlgebraElement;
    fn from_named(&self, entries: &[(&str, Complex64)]) -> Result<AlgebraElement>;
    fn indicator(&self, set: &[Elem]) -> AlgebraElement;
}

impl ContextExt for Context {
    fn zero(&self) -> AlgebraElement {
        AlgebraElement { ctx: self.clone(), coeffs: vec![Complex64::new(0.0, 0.0); self.len()] }
    }

    fn delta(&self, g: Elem) -> AlgebraElement {
        let mut a = self.zero();
        a.coeffs[g] = Complex64::new(1.0, 0.0);
        a
    }

    fn delta_named(&self, name: &str) -> Result<AlgebraElement> {
        Ok(self.delta(self.groupoid.index_of(name)?))
    }

    /// `Σ_u δ_u`, the unit of the algebra.
    fn identity(&self) -> AlgebraElement {
        self.indicator(self.groupoid.units())
    }

    fn element(&self, coeffs: Vec<Complex64>) -> AlgebraElement {
        assert_eq!(coeffs.len(), self.len(), "coefficient vector has the wrong length");
        AlgebraElement { ctx: self.clone(), coeffs }
    }

    fn from_named(&self, entries: &[(&str, Complex64)]) -> Result<AlgebraElement> {
        let mut a = self.zero();
        for (name, z) in entries {
            a.coeffs[self.groupoid.index_of(name)?] += z;
        }
        Ok(a)
    }

    fn indicator(&self, set: &[Elem]) -> AlgebraElement {
        let mut a = self.zero();
        for &g in set {
            a.coeffs[g] = Complex64::new(1.0, 0.0);
        }
        a
    }
}

/// A finitely supported function on the groupoid, read as an element of
/// the twisted convolution algebra.
#[derive(Clone)]
pub struct AlgebraElement {
    ctx: Context,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.ctx.groupoid();
        let mut m = f.debug_map();
        for (i, z) in self.coeffs.iter().enumerate() {
            if *z != Complex64::new(0.0, 0.0) {
                m.entry(&g.name(i), z);
            }
        }
        m.finish()
    }
}

pub fn same_context(a: &Context, b: &Context) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl AlgebraElement {
    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, g: Elem) -> Complex64 {
        self.coeffs[g]
    }

    pub fn set_coeff(&mut self, g: Elem, z: Complex64) {
        self.coeffs[g] = z;
    }

    fn check(&self, other: &AlgebraElement) -> Result<()> {
        if same_context(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    /// Elements whose coefficient exceeds the context's zero threshold.
    pub fn support(&self) -> Vec<Elem> {
        let tol = self.ctx.zero_tol;
        (0..self.coeffs.len()).filter(|&g| self.coeffs[g].norm() > tol).collect()
    }

    pub fn in_support(&self, g: Elem) -> bool {
        self.coeffs[g].norm() > self.ctx.zero_tol
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_empty()
    }

    /// Support inside the unit space, i.e. membership of `B`.
    pub fn is_diagonal(&self) -> bool {
        let g = self.ctx.groupoid();
        self.support().into_iter().all(|e| g.is_unit(e))
    }

    /// Support is a bisection.
    pub fn is_monomial(&self) -> bool {
        self.ctx.groupoid().is_bisection(&self.support())
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference.
    pub fn distance(&self, other: &AlgebraElement) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &AlgebraElement, tol: f64) -> bool {
        same_context(&self.ctx, &other.ctx) && self.distance(other) <= tol
    }

    pub fn scale(&self, z: Complex64) -> AlgebraElement {
        AlgebraElement { ctx: self.ctx.clone(), coeffs: self.coeffs.iter().map(|c| c * z).collect() }
    }

    pub fn try_add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(other)?;
        Ok(AlgebraElement {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    /// Twisted convolution `(ab)(g) = Σ_{hk=g} σ(h,k) a(h) b(k)`.
    pub fn convolve(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(other)?;
        let ctx = &self.ctx;
        let g = ctx.groupoid();
        let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
        for h in g.elements() {
            let ah = self.coeffs[h];
            if ah == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in g.elements() {
                let bk = other.coeffs[k];
                if bk == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if let Some(hk) = g.compose(h, k) {
                    out[hk] += ctx.sigma(h, k) * ah * bk;
                }
            }
        }
        Ok(AlgebraElement { ctx: ctx.clone(), coeffs: out })
    }

    /// `a*(g) = conj(σ(g, g⁻¹)) · conj(a(g⁻¹))`.
    pub fn star(&self) -> AlgebraElement {
        let g = self.ctx.groupoid();
        let coeffs = g
            .elements()
            .map(|e| {
                let inv = g.inverse(e);
                (self.ctx.sigma(e, inv) * self.coeffs[inv]).conj()
            })
            .collect();
        AlgebraElement { ctx: self.ctx.clone(), coeffs }
    }

    /// The diagonal map (restriction of coefficients to units); this is the
    /// expectation `E` onto `B`.
    pub fn diagonal(&self) -> AlgebraElement {
        let g = self.ctx.groupoid();
        let coeffs =
            g.elements().map(|e| if g.is_unit(e) { self.coeffs[e] } else { Complex64::new(0.0, 0.0) }).collect();
        AlgebraElement { ctx: self.ctx.clone(), coeffs }
    }

    /// Coefficients outside `set` zeroed.
    pub fn restrict(&self, set: &[Elem]) -> AlgebraElement {
        let mut out = self.ctx.zero();
        for &g in set {
            out.coeffs[g] = self.coeffs[g];
        }
        out
    }

    /// Functional calculus on a diagonal element: `f` is applied to the
    /// value at every unit (zero values included, so `f(0)` should be 0).
    pub fn map_diagonal(&self, f: impl Fn(Complex64) -> Complex64) -> Result<AlgebraElement> {
        if !self.is_diagonal() {
            return Err(Error::NotDiagonal);
        }
        let mut out = self.ctx.zero();
        for &u in self.ctx.groupoid().units() {
            out.coeffs[u] = f(self.coeffs[u]);
        }
        Ok(out)
    }

    /// [`map_diagonal`](Self::map_diagonal) for positive elements: `f` sees
    /// the real part of each value, clamped at zero.
    pub fn map_positive(&self, f: impl Fn(f64) -> f64) -> Result<AlgebraElement> {
        self.map_diagonal(|z| Complex64::new(f(z.re.max(0.0)), 0.0))
    }

    /// Diagonal with nonnegative real values (to tolerance).
    pub fn is_positive_diagonal(&self) -> bool {
        let tol = self.ctx.zero_tol;
        self.is_diagonal()
            && self.ctx.groupoid().units().iter().all(|&u| self.coeffs[u].re >= -tol && self.coeffs[u].im.abs() <= tol)
    }

    /// Value of a diagonal element at unit `u` (the evaluation character).
    pub fn eval_at(&self, u: Elem) -> Complex64 {
        self.coeffs[u]
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.try_add(rhs).expect("context mismatch in addition")
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.try_add(&rhs.scale(Complex64::new(-1.0, 0.0))).expect("context mismatch in subtraction")
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// Convolution; panics on mismatched contexts (use
/// [`AlgebraElement::convolve`] to get an error instead).
impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.convolve(rhs).expect("context mismatch in convolution")
    }
}

impl Mul<Complex64> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: Complex64) -> AlgebraElement {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::twist::TwistPoint;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn units_are_idempotent() {
        for (_, ctx) in fixtures::standard_fixtures() {
            for &u in ctx.groupoid().units() {
                let d = ctx.delta(u);
                assert!((&d * &d).approx_eq(&d, 0.0));
            }
        }
    }

    #[test]
    fn matrix_units_multiply() {
        let r2 = fixtures::full_equivalence(2);
        let e12 = r2.delta_named("(1,2)").unwrap();
        let e21 = r2.delta_named("(2,1)").unwrap();
        let e11 = r2.delta_named("(1,1)").unwrap();
        assert!((&e12 * &e21).approx_eq(&e11, 0.0));
        assert!((&e12 * &e12).is_zero());
    }

    #[test]
    fn pauli_twist_anticommutes() {
        let v = fixtures::klein_four_pauli();
        let x = v.delta_named("(1,0)").unwrap();
        let z = v.delta_named("(0,1)").unwrap();
        let xz = v.delta_named("(1,1)").unwrap();
        assert!((&z * &x).approx_eq(&(-&xz), 0.0));
        assert!((&x * &z).approx_eq(&xz, 0.0));
    }

    #[test]
    fn context_mismatch_is_an_error() {
        let a = fixtures::full_equivalence(2).identity();
        let b = fixtures::cyclic(4).identity();
        assert!(matches!(a.convolve(&b), Err(Error::ContextMismatch)));
        assert!(matches!(a.try_add(&b), Err(Error::ContextMismatch)));
    }

    #[test]
    fn involution_examples() {
        let r2 = fixtures::full_equivalence(2);
        let u = r2.delta_named("(1,1)").unwrap().scale(c(2.0, 3.0));
        assert!(u.star().approx_eq(&r2.delta_named("(1,1)").unwrap().scale(c(2.0, -3.0)), 0.0));
        let e12 = r2.delta_named("(1,2)").unwrap();
        assert!(e12.star().approx_eq(&r2.delta_named("(2,1)").unwrap(), 0.0));
    }

    #[test]
    fn diagonal_examples() {
        let z4 = fixtures::cyclic(4);
        let a = z4.from_named(&[("0", c(3.0, 0.0)), ("1", c(0.0, 1.0))]).unwrap();
        assert!(a.diagonal().approx_eq(&z4.delta_named("0").unwrap().scale(c(3.0, 0.0)), 0.0));
        let r2 = fixtures::full_equivalence(2);
        assert!(r2.delta_named("(1,2)").unwrap().diagonal().is_zero());
    }

    /// Basis products and adjoints agree with exact twist-point arithmetic
    /// on every fixture, so associativity and `(ab)* = b*a*` hold exactly.
    #[test]
    fn basis_products_match_exact_phases() {
        for (name, ctx) in fixtures::standard_fixtures() {
            let g = ctx.groupoid();
            for a in g.elements() {
                let pa = TwistPoint::canonical(a);
                let star = pa.inverse(&ctx);
                let sa = ctx.delta(a).star();
                assert!(sa.approx_eq(&ctx.delta(star.g).scale(star.phase.to_complex()), 1e-15), "{name}");
                for b in g.elements() {
                    let prod = &ctx.delta(a) * &ctx.delta(b);
                    match pa.mul(&TwistPoint::canonical(b), &ctx) {
                        Some(p) => {
                            assert!(prod.approx_eq(&ctx.delta(p.g).scale(p.phase.to_complex()), 1e-15))
                        }
                        None => assert!(prod.is_zero()),
                    }
                }
            }
        }
    }

    #[test]
    fn functional_calculus_requires_diagonal() {
        let r2 = fixtures::full_equivalence(2);
        assert!(matches!(r2.delta_named("(1,2)").unwrap().map_diagonal(|z| z), Err(Error::NotDiagonal)));
        let b = r2.from_named(&[("(1,1)", c(4.0, 0.0))]).unwrap();
        let root = b.map_positive(f64::sqrt).unwrap();
        assert!(root.approx_eq(&r2.from_named(&[("(1,1)", c(2.0, 0.0))]).unwrap(), 1e-15));
    }
}
