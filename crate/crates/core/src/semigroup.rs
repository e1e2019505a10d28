//! Cartan semigroups inside a finite twisted groupoid algebra.
//!
//! Semigroups are predicates plus generator/sample enumerations; none of
//! them is ever materialized as a set.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{AlgebraElement, Context, ContextExt};
use crate::error::{Error, Result};
use crate::groupoid::{Elem, FiniteGroupoid};
use crate::repr::cstar_norm;
use crate::sampling::{self, SampleRng};

/// A family of bisections closed under subsets, products and inverses and
/// containing the unit space. The empty bisection is always implied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisectionBasis {
    sets: BTreeSet<Vec<Elem>>,
}

fn normalized(set: &[Elem]) -> Vec<Elem> {
    let s: BTreeSet<Elem> = set.iter().copied().collect();
    s.into_iter().collect()
}

fn subsets(set: &[Elem]) -> impl Iterator<Item = Vec<Elem>> + '_ {
    (0u32..(1 << set.len()))
        .map(move |mask| set.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &e)| e).collect())
}

impl BisectionBasis {
    /// Validates the closure conditions on an explicit list of sets.
    pub fn new(g: &FiniteGroupoid, sets: impl IntoIterator<Item = Vec<Elem>>) -> Result<Self> {
        let mut all: BTreeSet<Vec<Elem>> = sets.into_iter().map(|s| normalized(&s)).collect();
        all.insert(Vec::new());
        let basis = BisectionBasis { sets: all };
        basis.validate(g)?;
        Ok(basis)
    }

    /// Adds every subset of the given sets, then validates.
    pub fn downward_closure(g: &FiniteGroupoid, sets: impl IntoIterator<Item = Vec<Elem>>) -> Result<Self> {
        let mut all = BTreeSet::new();
        for s in sets {
            let s = normalized(&s);
            all.extend(subsets(&s));
        }
        Self::new(g, all)
    }

    pub fn from_names(g: &FiniteGroupoid, sets: &[Vec<String>]) -> Result<Self> {
        let idx = sets
            .iter()
            .map(|s| s.iter().map(|n| g.index_of(n)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(g, idx)
    }

    pub fn to_names(&self, g: &FiniteGroupoid) -> Vec<Vec<String>> {
        self.sets.iter().filter(|s| !s.is_empty()).map(|s| s.iter().map(|&e| g.name(e).to_string()).collect()).collect()
    }

    fn validate(&self, g: &FiniteGroupoid) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidBasis(msg));
        for s in &self.sets {
            if let Some(&bad) = s.iter().find(|&&e| e >= g.len()) {
                return Err(Error::ElementOutOfRange(bad));
            }
            if !g.is_bisection(s) {
                return fail(format!("{:?} is not a bisection", names(g, s)));
            }
        }
        if !self.contains(g.units()) {
            return fail("the unit space is missing".into());
        }
        for s in &self.sets {
            for sub in subsets(s) {
                if !self.contains(&sub) {
                    return fail(format!("subset {:?} of {:?} is missing", names(g, &sub), names(g, s)));
                }
            }
            if !self.contains(&g.inverse_set(s)) {
                return fail(format!("inverse of {:?} is missing", names(g, s)));
            }
            for t in &self.sets {
                let p = g.product_set(s, t);
                if !self.contains(&p) {
                    return fail(format!("product {:?}·{:?} is missing", names(g, s), names(g, t)));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, set: &[Elem]) -> bool {
        self.sets.contains(&normalized(set))
    }

    pub fn sets(&self) -> impl Iterator<Item = &Vec<Elem>> {
        self.sets.iter()
    }

    /// Union of all basis sets.
    pub fn cover(&self) -> Vec<Elem> {
        let u: BTreeSet<Elem> = self.sets.iter().flatten().copied().collect();
        u.into_iter().collect()
    }
}

fn names(g: &FiniteGroupoid, s: &[Elem]) -> Vec<String> {
    s.iter().map(|&e| g.name(e).to_string()).collect()
}

/// The non-summable basis on `R₂`: all subsets of the unit space plus the
/// two off-diagonal singletons.
pub fn off_diagonal_singletons_basis(r2: &FiniteGroupoid) -> Result<BisectionBasis> {
    let e12 = r2.index_of("(1,2)")?;
    let e21 = r2.index_of("(2,1)")?;
    BisectionBasis::downward_closure(r2, [r2.units().to_vec(), vec![e12], vec![e21]])
}

#[derive(Clone, Debug)]
pub enum SemigroupKind {
    /// Elements supported on bisections.
    Monomial,
    /// Elements whose support belongs to the basis.
    BasisRestricted(BisectionBasis),
    /// `N(B) = {n : n*Bn ∪ nBn* ⊆ B}`.
    Normalizers,
    /// `{b·e : b ∈ B, e ∈ list}`.
    Explicit(Vec<AlgebraElement>),
    /// Closure of the inner semigroup under finite compatible sums.
    CompatibleSums(Box<SemigroupKind>),
}

impl fmt::Display for SemigroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemigroupKind::Monomial => write!(f, "monomial"),
            SemigroupKind::BasisRestricted(_) => write!(f, "basis-restricted"),
            SemigroupKind::Normalizers => write!(f, "normalizers"),
            SemigroupKind::Explicit(l) => write!(f, "explicit({})", l.len()),
            SemigroupKind::CompatibleSums(k) => write!(f, "csum({k})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SemigroupSpec {
    ctx: Context,
    kind: SemigroupKind,
}

/// `m*n` and `mn*` both diagonal.
pub fn compatible(m: &AlgebraElement, n: &AlgebraElement) -> bool {
    (&m.star() * n).is_diagonal() && (m * &n.star()).is_diagonal()
}

/// `n δ_u n*` and `n* δ_u n` diagonal for every unit `u`.
pub fn is_normalizer(n: &AlgebraElement) -> bool {
    let ctx = n.ctx();
    let ns = n.star();
    ctx.groupoid().units().iter().all(|&u| {
        let d = ctx.delta(u);
        (&(n * &d) * &ns).is_diagonal() && (&(&ns * &d) * n).is_diagonal()
    })
}

/// Solves `a = Σ_e b_e·e` for diagonal `b_e`; returns the pieces `b_e·e`
/// when the least-squares residual is within tolerance.
fn diagonal_combination(a: &AlgebraElement, es: &[&AlgebraElement]) -> Option<Vec<AlgebraElement>> {
    let ctx = a.ctx();
    let g = ctx.groupoid();
    let units = g.units();
    let cols: Vec<AlgebraElement> = es.iter().flat_map(|e| units.iter().map(move |&u| &ctx.delta(u) * *e)).collect();
    if cols.is_empty() {
        return a.is_zero().then(Vec::new);
    }
    let m = DMatrix::from_fn(g.len(), cols.len(), |r, c| cols[c].coeff(r));
    let rhs = DVector::from_iterator(g.len(), a.coeffs().iter().copied());
    let svd = m.clone().svd(true, true);
    let x = svd.solve(&rhs, 1e-12).ok()?;
    let residual = (&m * &x - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residual > ctx.zero_tol() {
        return None;
    }
    Some(
        es.iter()
            .enumerate()
            .map(|(i, e)| {
                let mut b = ctx.zero();
                for (j, &u) in units.iter().enumerate() {
                    b.set_coeff(u, x[i * units.len() + j]);
                }
                &b * *e
            })
            .collect(),
    )
}

impl SemigroupSpec {
    pub fn new(ctx: &Context, kind: SemigroupKind) -> Self {
        SemigroupSpec { ctx: ctx.clone(), kind }
    }

    pub fn monomial(ctx: &Context) -> Self {
        Self::new(ctx, SemigroupKind::Monomial)
    }

    pub fn basis_restricted(ctx: &Context, basis: BisectionBasis) -> Self {
        Self::new(ctx, SemigroupKind::BasisRestricted(basis))
    }

    pub fn explicit(ctx: &Context, list: Vec<AlgebraElement>) -> Self {
        Self::new(ctx, SemigroupKind::Explicit(list))
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn kind(&self) -> &SemigroupKind {
        &self.kind
    }

    pub fn membership(&self, a: &AlgebraElement) -> bool {
        member(&self.kind, a)
    }

    /// Pairwise-compatible members of the underlying semigroup summing to
    /// `a`, when `a` lies in the compatible-sum closure.
    pub fn csum_decomposition(&self, a: &AlgebraElement) -> Option<Vec<AlgebraElement>> {
        let inner = match &self.kind {
            SemigroupKind::CompatibleSums(k) => k.as_ref(),
            k => k,
        };
        decompose(inner, a)
    }

    /// Generators used for span and closure checks.
    pub fn generators(&self) -> Vec<AlgebraElement> {
        generators(&self.ctx, &self.kind)
    }

    /// A random member.
    pub fn sample(&self, rng: &mut SampleRng) -> AlgebraElement {
        sample(&self.ctx, &self.kind, rng)
    }
}

fn member(kind: &SemigroupKind, a: &AlgebraElement) -> bool {
    match kind {
        SemigroupKind::Monomial => a.is_monomial(),
        SemigroupKind::BasisRestricted(b) => b.contains(&a.support()),
        SemigroupKind::Normalizers => is_normalizer(a),
        SemigroupKind::Explicit(list) => a.is_zero() || list.iter().any(|e| diagonal_combination(a, &[e]).is_some()),
        SemigroupKind::CompatibleSums(inner) => decompose(inner, a).is_some(),
    }
}

fn decompose(kind: &SemigroupKind, a: &AlgebraElement) -> Option<Vec<AlgebraElement>> {
    let pieces = match kind {
        SemigroupKind::Monomial | SemigroupKind::Normalizers => member(kind, a).then(|| vec![a.clone()])?,
        SemigroupKind::BasisRestricted(b) => {
            let supp = a.support();
            if !a.is_monomial() {
                return None;
            }
            let cover = b.cover();
            if !supp.iter().all(|e| cover.contains(e)) {
                return None;
            }
            supp.iter().map(|&e| a.restrict(&[e])).collect()
        }
        SemigroupKind::Explicit(list) => decompose_explicit(list, a)?,
        SemigroupKind::CompatibleSums(inner) => decompose(inner, a)?,
    };
    // Certify: members, pairwise compatible, summing to `a`.
    let ctx = a.ctx();
    let total = pieces.iter().fold(ctx.zero(), |acc, p| &acc + p);
    let ok = total.approx_eq(a, ctx.zero_tol())
        && pieces.iter().all(|p| member(kind, p))
        && pieces.iter().enumerate().all(|(i, p)| pieces[i + 1..].iter().all(|q| compatible(p, q)));
    ok.then_some(pieces)
}

fn decompose_explicit(list: &[AlgebraElement], a: &AlgebraElement) -> Option<Vec<AlgebraElement>> {
    if a.is_zero() {
        return Some(Vec::new());
    }
    // Maximal pairwise-compatible subfamilies, by backtracking.
    let n = list.len();
    let compat: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| compatible(&list[i], &list[j])).collect()).collect();
    let mut stack = vec![(0usize, Vec::<usize>::new())];
    while let Some((next, chosen)) = stack.pop() {
        if next == n {
            if chosen.is_empty() {
                continue;
            }
            let es: Vec<&AlgebraElement> = chosen.iter().map(|&i| &list[i]).collect();
            if let Some(pieces) = diagonal_combination(a, &es) {
                let pieces: Vec<AlgebraElement> = pieces.into_iter().filter(|p| !p.is_zero()).collect();
                let pairwise = pieces.iter().enumerate().all(|(i, p)| pieces[i + 1..].iter().all(|q| compatible(p, q)));
                if pairwise {
                    return Some(pieces);
                }
            }
            continue;
        }
        stack.push((next + 1, chosen.clone()));
        if chosen.iter().all(|&c| compat[c][next]) {
            let mut with = chosen;
            with.push(next);
            stack.push((next + 1, with));
        }
    }
    None
}

fn generators(ctx: &Context, kind: &SemigroupKind) -> Vec<AlgebraElement> {
    let g = ctx.groupoid();
    match kind {
        SemigroupKind::Monomial | SemigroupKind::Normalizers => g.elements().map(|e| ctx.delta(e)).collect(),
        SemigroupKind::BasisRestricted(b) => b.cover().into_iter().map(|e| ctx.delta(e)).collect(),
        SemigroupKind::Explicit(list) => list.clone(),
        SemigroupKind::CompatibleSums(inner) => {
            let base = generators(ctx, inner);
            let mut out = base.clone();
            for (i, m) in base.iter().enumerate() {
                for n in &base[i + 1..] {
                    if compatible(m, n) {
                        out.push(m + n);
                    }
                }
            }
            out
        }
    }
}

/// `exp(i·h)` for self-adjoint `h`, by scaling and squaring.
pub fn unitary_exp(h: &AlgebraElement) -> AlgebraElement {
    let ctx = h.ctx();
    let norm = cstar_norm(h);
    let mut squarings = 0;
    while norm / f64::powi(2.0, squarings) > 0.5 {
        squarings += 1;
    }
    let x = h.scale(Complex64::new(0.0, 1.0 / f64::powi(2.0, squarings)));
    let mut term = ctx.identity();
    let mut sum = ctx.identity();
    for k in 1..30 {
        term = (&term * &x).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// A random element of `N(B)`: a monomial times a unitary supported on
/// the isotropy bundle.
pub fn sample_normalizer(ctx: &Context, rng: &mut SampleRng) -> AlgebraElement {
    let g = ctx.groupoid();
    let iso = g.isotropy();
    let x = sampling::on_support(ctx, &iso, rng);
    let h = &x + &x.star();
    let u = unitary_exp(&h);
    let m = sampling::monomial(ctx, &g.bisections(), rng);
    &m * &u
}

fn sample(ctx: &Context, kind: &SemigroupKind, rng: &mut SampleRng) -> AlgebraElement {
    let g = ctx.groupoid();
    match kind {
        SemigroupKind::Monomial => sampling::monomial(ctx, &g.bisections(), rng),
        SemigroupKind::BasisRestricted(b) => {
            let sets: Vec<Vec<Elem>> = b.sets().cloned().collect();
            sampling::monomial(ctx, &sets, rng)
        }
        SemigroupKind::Normalizers => sample_normalizer(ctx, rng),
        SemigroupKind::Explicit(list) => {
            if list.is_empty() {
                return ctx.zero();
            }
            let e = &list[rng.random_range(0..list.len())];
            &sampling::diagonal(ctx, rng) * e
        }
        SemigroupKind::CompatibleSums(inner) => {
            let mut acc: Vec<AlgebraElement> = Vec::new();
            for _ in 0..4 {
                let s = sample(ctx, inner, rng);
                if acc.iter().all(|p| compatible(p, &s)) {
                    acc.push(s);
                }
            }
            acc.iter().fold(ctx.zero(), |x, y| &x + y)
        }
    }
}

/// Result of one axiom check.
#[derive(Clone, Debug)]
pub struct AxiomCheck {
    pub holds: bool,
    pub cases: usize,
    /// Elements exhibiting the failure.
    pub counterexample: Vec<AlgebraElement>,
}

impl AxiomCheck {
    fn new() -> Self {
        AxiomCheck { holds: true, cases: 0, counterexample: Vec::new() }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Vec<AlgebraElement>) {
        self.cases += 1;
        if !ok && self.holds {
            self.holds = false;
            self.counterexample = witness();
        }
    }
}

#[derive(Clone, Debug)]
pub struct CartanReport {
    pub star_closed: AxiomCheck,
    pub product_closed: AxiomCheck,
    /// Closed under scalars and multiplication by `B` on both sides.
    pub module_closed: AxiomCheck,
    /// Rank of the generators versus `|G|`.
    pub dense_span: AxiomCheck,
    pub span_rank: usize,
    /// `n*n ∈ B₊` for every sampled `n` (so `N₊ ⊆ B₊`).
    pub positive_cone_diagonal: AxiomCheck,
    pub b_commutative: AxiomCheck,
    pub b_contained: AxiomCheck,
    /// `E(n)n* ∈ B`.
    pub stable: AxiomCheck,
    pub summable: AxiomCheck,
}

impl CartanReport {
    pub fn is_cartan(&self) -> bool {
        self.axioms().iter().all(|(_, a)| a.holds)
    }

    pub fn is_summable(&self) -> bool {
        self.summable.holds
    }

    /// The Cartan axioms (summability excluded), named.
    pub fn axioms(&self) -> Vec<(&'static str, &AxiomCheck)> {
        vec![
            ("star-closed", &self.star_closed),
            ("product-closed", &self.product_closed),
            ("B-module", &self.module_closed),
            ("dense span", &self.dense_span),
            ("N+ in B+", &self.positive_cone_diagonal),
            ("B commutative", &self.b_commutative),
            ("B in N", &self.b_contained),
            ("stable", &self.stable),
        ]
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        self.axioms().into_iter().find(|(_, a)| !a.holds).map(|(n, _)| n)
    }
}

fn rank(elements: &[AlgebraElement]) -> usize {
    if elements.is_empty() {
        return 0;
    }
    let n = elements[0].ctx().len();
    DMatrix::from_fn(n, elements.len(), |r, c| elements[c].coeff(r)).rank(1e-9)
}

/// Checks each Cartan-semigroup axiom and summability.
///
/// Support patterns are swept exhaustively (every bisection whose
/// random-coefficient element is a member), coefficients are drawn at
/// random (`draws` extra samples).
pub fn check_cartan(spec: &SemigroupSpec, draws: usize, rng: &mut SampleRng) -> CartanReport {
    let ctx = spec.ctx();
    let g = ctx.groupoid();
    let gens = spec.generators();
    let mut members: Vec<AlgebraElement> = gens.clone();
    for pattern in g.bisections() {
        let a = sampling::on_support(ctx, &pattern, rng);
        if spec.membership(&a) {
            members.push(a);
        }
    }
    for _ in 0..draws {
        members.push(spec.sample(rng));
    }

    let mut star_closed = AxiomCheck::new();
    let mut product_closed = AxiomCheck::new();
    let mut module_closed = AxiomCheck::new();
    let mut positive = AxiomCheck::new();
    let mut stable = AxiomCheck::new();
    let mut positives: Vec<AlgebraElement> = Vec::new();
    for (i, n) in members.iter().enumerate() {
        let ns = n.star();
        star_closed.record(spec.membership(&ns), || vec![n.clone()]);
        let m = &members[(i * 7 + 3) % members.len()];
        let p = n * m;
        product_closed.record(spec.membership(&p), || vec![n.clone(), m.clone()]);
        let b = sampling::diagonal(ctx, rng);
        let z = sampling::complex(rng);
        let scaled = &(&b * n) * &sampling::diagonal(ctx, rng);
        module_closed.record(spec.membership(&scaled.scale(z)), || vec![n.clone(), b.clone()]);
        let nn = &ns * n;
        positive.record(nn.is_positive_diagonal(), || vec![n.clone()]);
        positives.push(nn);
        let en = &n.diagonal() * &ns;
        stable.record(en.is_diagonal(), || vec![n.clone()]);
    }
    for (i, m) in members.iter().enumerate() {
        for n in &members[i + 1..members.len().min(i + 12)] {
            product_closed.record(spec.membership(&(m * n)), || vec![m.clone(), n.clone()]);
        }
    }

    let span_rank = rank(&gens);
    let mut dense_span = AxiomCheck::new();
    dense_span.record(span_rank == g.len(), || gens.clone());

    let mut b_commutative = AxiomCheck::new();
    for (i, p) in positives.iter().enumerate() {
        for q in &positives[i + 1..positives.len().min(i + 8)] {
            b_commutative.record((p * q).approx_eq(&(q * p), ctx.zero_tol() * 10.0), || vec![p.clone(), q.clone()]);
        }
    }
    // B = C*(N₊): at finite scale the diagonal functions on the units
    // reached by the positive cone.
    let reached: BTreeSet<Elem> = positives.iter().flat_map(|p| p.support()).collect();
    let reached: Vec<Elem> = reached.into_iter().collect();
    let mut b_contained = AxiomCheck::new();
    for _ in 0..draws.max(10) {
        let mut b = ctx.zero();
        for &u in &reached {
            b.set_coeff(u, sampling::complex(rng));
        }
        b_contained.record(spec.membership(&b), || vec![b.clone()]);
    }

    let mut summable = AxiomCheck::new();
    for (i, m) in gens.iter().enumerate() {
        for n in &gens[i + 1..] {
            if compatible(m, n) {
                summable.record(spec.membership(&(m + n)), || vec![m.clone(), n.clone()]);
            }
        }
    }
    for w in members.windows(2) {
        if compatible(&w[0], &w[1]) {
            summable.record(spec.membership(&(&w[0] + &w[1])), || vec![w[0].clone(), w[1].clone()]);
        }
    }

    CartanReport {
        star_closed,
        product_closed,
        module_closed,
        dense_span,
        span_rank,
        positive_cone_diagonal: positive,
        b_commutative,
        b_contained,
        stable,
        summable,
    }
}

/// Closure under finite compatible sums (idempotent).
pub fn csum_closure(spec: &SemigroupSpec) -> SemigroupSpec {
    let kind = match spec.kind() {
        k @ SemigroupKind::CompatibleSums(_) => k.clone(),
        k => SemigroupKind::CompatibleSums(Box::new(k.clone())),
    };
    SemigroupSpec::new(spec.ctx(), kind)
}

pub fn normalizer_semigroup(ctx: &Context) -> SemigroupSpec {
    SemigroupSpec::new(ctx, SemigroupKind::Normalizers)
}
