//! The commutant of the diagonal, MASA detection, and the theorems tying
//! maximal abelianness to normalizers and to the restriction criterion.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{AlgebraElement, Context, ContextExt};
use crate::error::{Error, Result};
use crate::groupoid::Elem;
use crate::relations::general_restriction;
use crate::report::Check;
use crate::repr::regular_representation;
use crate::sampling::{self, SampleRng};
use crate::semigroup::{csum_closure, is_normalizer, sample_normalizer, unitary_exp, SemigroupSpec};

/// Largest groupoid on which every support pattern is swept.
pub const SWEEP_LIMIT: usize = 6;

/// A linear basis of `C(B) = {a : ab = ba for all b ∈ B}`.
#[derive(Clone, Debug)]
pub struct CommutantBasis {
    pub vectors: Vec<AlgebraElement>,
}

impl CommutantBasis {
    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }

    /// Largest `|δ_u a − a δ_u|` over basis vectors and units.
    pub fn commutation_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.vectors {
            let ctx = a.ctx();
            for &u in ctx.groupoid().units() {
                let d = ctx.delta(u);
                worst = worst.max((&d * a).distance(&(a * &d)));
            }
        }
        worst
    }
}

/// Null space of `a ↦ (π(δ_u a − a δ_u))_u`, solved in the regular
/// representation and pulled back along the (injective) coefficient map.
pub fn commutant_basis(ctx: &Context) -> CommutantBasis {
    let g = ctx.groupoid();
    let columns: Vec<Vec<Complex64>> = g
        .elements()
        .map(|e| {
            let de = ctx.delta(e);
            g.units()
                .iter()
                .flat_map(|&u| {
                    let du = ctx.delta(u);
                    let img = regular_representation(&(&(&du * &de) - &(&de * &du)));
                    img.blocks.into_iter().flat_map(|b| b.matrix.iter().copied().collect::<Vec<_>>())
                })
                .collect()
        })
        .collect();
    let rows = columns[0].len();
    let m = DMatrix::from_fn(rows, g.len(), |r, c| columns[c][r]);
    // Pad to square so the SVD exposes the full right null space.
    let square = if rows < g.len() { m.clone().resize_vertically(g.len(), Complex64::new(0.0, 0.0)) } else { m };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let vectors = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < 1e-10)
        .map(|(i, _)| {
            let coeffs: Vec<Complex64> = v_t.row(i).iter().map(|z| z.conj()).collect();
            ctx.element(coeffs)
        })
        .collect();
    CommutantBasis { vectors }
}

/// Commutant-based and combinatorial MASA tests side by side.
#[derive(Clone, Debug)]
pub struct MasaDecision {
    pub commutant_dimension: usize,
    pub isotropy_count: usize,
    pub commutant_is_diagonal: bool,
    pub effective: bool,
    /// `δ_k ∈ C(B) ∖ B` for the first isotropy element in the support of a
    /// non-diagonal commutant vector.
    pub witness: Option<Elem>,
}

pub fn masa_decision(ctx: &Context) -> MasaDecision {
    let g = ctx.groupoid();
    let basis = commutant_basis(ctx);
    let units = g.units().len();
    let tol = 1e-9;
    let witness =
        g.elements().filter(|&k| !g.is_unit(k)).find(|&k| basis.vectors.iter().any(|a| a.coeff(k).norm() > tol));
    MasaDecision {
        commutant_dimension: basis.dimension(),
        isotropy_count: g.isotropy().len(),
        commutant_is_diagonal: basis.dimension() == units && witness.is_none(),
        effective: g.is_effective(),
        witness,
    }
}

/// `C(B) = B`; errors if the commutant and effectiveness disagree.
pub fn is_masa(ctx: &Context) -> Result<bool> {
    let d = masa_decision(ctx);
    if d.commutant_is_diagonal != d.effective {
        return Err(Error::OracleDisagreement("commutant vs effectiveness".into()));
    }
    Ok(d.commutant_is_diagonal)
}

/// Elements drawn to compare membership predicates: every bisection
/// pattern, random normalizers, random elements and, for small groupoids,
/// one draw on every support pattern.
fn probe_elements(ctx: &Context, random: usize, rng: &mut SampleRng) -> Vec<AlgebraElement> {
    let g = ctx.groupoid();
    let mut out: Vec<AlgebraElement> = g.bisections().iter().map(|p| sampling::on_support(ctx, p, rng)).collect();
    out.push(ctx.identity());
    for _ in 0..random {
        out.push(match rng.random_range(0..3) {
            0 => sampling::element(ctx, rng),
            1 => sample_normalizer(ctx, rng),
            _ => sampling::monomial(ctx, &g.bisections(), rng),
        });
    }
    if g.len() <= SWEEP_LIMIT {
        let all: Vec<Elem> = g.elements().collect();
        for mask in 0u64..(1 << all.len()) {
            let set: Vec<Elem> = all.iter().copied().filter(|&e| mask & (1 << e) != 0).collect();
            out.push(sampling::on_support(ctx, &set, rng));
        }
    }
    out
}

/// `csum(N) = N(B)` extensionally when `B` is a MASA; `None` (skipped)
/// otherwise.
pub fn masa_implies_normalisers(ctx: &Context, rng: &mut SampleRng) -> Result<Option<Check>> {
    if !is_masa(ctx)? {
        return Ok(None);
    }
    let closure = csum_closure(&SemigroupSpec::monomial(ctx));
    let mut c = Check::new("MASA implies csum(N) = N(B)", 0.0);
    for a in probe_elements(ctx, 200, rng) {
        c.truth(closure.membership(&a) == is_normalizer(&a), || format!("{:?}", a.support()));
    }
    Ok(Some(c))
}

/// The witness structure for a non-MASA diagonal.
#[derive(Clone, Debug)]
pub struct ContrapositiveWitness {
    /// `c = δ_k` with `k` a non-unit isotropy element.
    pub c: AlgebraElement,
    pub k: Elem,
    /// Least `K ≥ 1` with `E(c^K) ≠ 0`.
    pub order: usize,
    /// `ba − E(ba)` for the commutant vector `a` and `b = δ_{s(k)}`.
    pub shifted: AlgebraElement,
    /// A normalizer outside `csum(N)`: `exp(i t (c + c*))`.
    pub normalizer: AlgebraElement,
    pub checks: Check,
}

pub fn normalisers_imply_masa_contrapositive(ctx: &Context) -> Result<Option<ContrapositiveWitness>> {
    let g = ctx.groupoid();
    let d = masa_decision(ctx);
    if d.effective && d.commutant_is_diagonal {
        return Ok(None);
    }
    let k = d.witness.ok_or_else(|| Error::OracleDisagreement("no isotropy witness in a non-MASA commutant".into()))?;
    let basis = commutant_basis(ctx);
    let a = basis.vectors.iter().find(|a| a.coeff(k).norm() > 1e-9).expect("witness came from a basis vector");
    let b = ctx.delta(g.source(k));
    let ba = &b * a;
    let shifted = &ba - &ba.diagonal();
    let c = ctx.delta(k);

    let mut checks = Check::new("non-MASA witness", 1e-10);
    let commutes = CommutantBasis { vectors: vec![c.clone(), shifted.clone()] }.commutation_residual();
    checks.residual(commutes, || "c does not commute with B".into());
    checks.truth(!c.is_zero() && c.diagonal().is_zero(), || "E(c) ≠ 0".into());
    checks.truth(shifted.diagonal().is_zero() && !shifted.is_zero(), || "ba − E(ba) vanishes".into());
    let cc = &c.star() * &c;
    checks.residual(cc.distance(&(&c * &c.star())), || "c*c ≠ cc*".into());
    checks.truth(cc.is_diagonal(), || "c*c not diagonal".into());
    let mut power = c.clone();
    let mut order = 1;
    while power.diagonal().is_zero() {
        if order > g.len() {
            checks.truth(false, || "c has no diagonal power".into());
            break;
        }
        power = &power * &c;
        order += 1;
    }

    let h = (&c + &c.star()).scale(Complex64::new(0.7, 0.0));
    let normalizer = unitary_exp(&h);
    let closure = csum_closure(&SemigroupSpec::monomial(ctx));
    checks.truth(is_normalizer(&normalizer), || "exp(i t (c + c*)) is not a normalizer".into());
    checks.truth(!closure.membership(&normalizer), || "normalizer lies in csum(N)".into());
    Ok(Some(ContrapositiveWitness { c, k, order, shifted, normalizer, checks }))
}

/// Faithfulness of `E` and `E(n) ⊑ n` over normalizers.
#[derive(Clone, Debug)]
pub struct CartanCriterion {
    /// Least eigenvalue of the Gram matrix of `(a, b) ↦ τ(E(a*b))`.
    pub faithfulness_margin: f64,
    pub restriction: Check,
    pub counterexample: Option<AlgebraElement>,
}

impl CartanCriterion {
    pub fn faithful(&self) -> bool {
        self.faithfulness_margin > 1e-9
    }

    pub fn holds(&self) -> bool {
        self.faithful() && self.restriction.passed
    }
}

pub fn cartan_criterion(ctx: &Context, rng: &mut SampleRng) -> CartanCriterion {
    let g = ctx.groupoid();
    let trace = |a: &AlgebraElement| -> Complex64 { g.units().iter().map(|&u| a.eval_at(u)).sum() };
    let gram = DMatrix::from_fn(g.len(), g.len(), |i, j| trace(&(&ctx.delta(i).star() * &ctx.delta(j)).diagonal()));
    let faithfulness_margin = gram.symmetric_eigenvalues().min();

    let mut restriction = Check::new("E(n) restricts n for every normalizer", 0.0);
    let mut counterexample = None;
    for n in probe_elements(ctx, 100, rng).into_iter().filter(is_normalizer) {
        let ok = general_restriction(&n.diagonal(), &n).is_some();
        if !ok && counterexample.is_none() {
            counterexample = Some(n.clone());
        }
        restriction.truth(ok, || format!("{:?}", n.support()));
    }
    CartanCriterion { faithfulness_margin, restriction, counterexample }
}
