//! The ultrafilter groupoid of a Cartan semigroup, its twist, and the hat
//! map back onto the reconstructed twisted groupoid algebra.
//!
//! Ultrafilters are represented by the groupoid element they correspond to
//! (`n ∈ U_g ⟺ n(g) ≠ 0`), but the reconstructed structure maps are
//! derived from algebraic data only: products of representatives, adjoints
//! and domination.

use indexmap::IndexMap;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, Context, ContextExt, TwistedGroupoid};
use crate::cocycle::{cohomologous, Cocycle};
use crate::error::{Error, Result};
use crate::groupoid::{Elem, FiniteGroupoid, GroupoidTables};
use crate::iso::{find_isomorphism_with, IsoOutcome};
use crate::phase::Phase;
use crate::relations::dominates;
use crate::report::{all_passed, Check, ReportHeader, RunConfig};
use crate::repr::cstar_norm;
use crate::sampling::{self, SampleRng, Streams};
use crate::semigroup::{check_cartan, compatible, csum_closure, SemigroupSpec};
use crate::twist::{discrete_limit, TwistPoint};

/// Largest denominator tried when reading a phase as a root of unity.
pub const MAX_PHASE_DENOM: i64 = 5040;

/// The ultrafilter at a groupoid element.
#[derive(Clone, Debug)]
pub struct Ultrafilter {
    ctx: Context,
    g: Elem,
}

impl PartialEq for Ultrafilter {
    fn eq(&self, other: &Self) -> bool {
        self.g == other.g && crate::algebra::same_context(&self.ctx, &other.ctx)
    }
}

pub fn ultrafilter_at(ctx: &Context, g: Elem) -> Result<Ultrafilter> {
    if g >= ctx.len() {
        return Err(Error::ElementOutOfRange(g));
    }
    Ok(Ultrafilter { ctx: ctx.clone(), g })
}

/// `T·U`, defined iff `s(T) = r(U)`.
pub fn ultrafilter_product(t: &Ultrafilter, u: &Ultrafilter) -> Option<Ultrafilter> {
    let gh = t.ctx.groupoid().compose(t.g, u.g)?;
    Some(Ultrafilter { ctx: t.ctx.clone(), g: gh })
}

impl Ultrafilter {
    pub fn element(&self) -> Elem {
        self.g
    }

    pub fn name(&self) -> &str {
        self.ctx.groupoid().name(self.g)
    }

    pub fn contains(&self, n: &AlgebraElement) -> bool {
        n.in_support(self.g)
    }

    fn require(&self, n: &AlgebraElement) -> Result<()> {
        if self.contains(n) {
            Ok(())
        } else {
            Err(Error::NotInUltrafilter(self.name().to_string()))
        }
    }

    pub fn is_unit(&self) -> bool {
        self.ctx.groupoid().is_unit(self.g)
    }

    /// `U* = {n* : n ∈ U}`.
    pub fn star(&self) -> Ultrafilter {
        Ultrafilter { ctx: self.ctx.clone(), g: self.ctx.groupoid().inverse(self.g) }
    }

    /// `𝗌(U)`.
    pub fn source(&self) -> Ultrafilter {
        Ultrafilter { ctx: self.ctx.clone(), g: self.ctx.groupoid().source(self.g) }
    }

    /// `𝗋(U)`.
    pub fn range(&self) -> Ultrafilter {
        Ultrafilter { ctx: self.ctx.clone(), g: self.ctx.groupoid().range(self.g) }
    }

    /// `ψ_U(b)`: evaluation at the source unit.
    pub fn source_state(&self, b: &AlgebraElement) -> Result<Complex64> {
        if !b.is_diagonal() {
            return Err(Error::NotDiagonal);
        }
        Ok(b.eval_at(self.ctx.groupoid().source(self.g)))
    }

    /// `ψ^U(b)`: evaluation at the range unit.
    pub fn range_state(&self, b: &AlgebraElement) -> Result<Complex64> {
        if !b.is_diagonal() {
            return Err(Error::NotDiagonal);
        }
        Ok(b.eval_at(self.ctx.groupoid().range(self.g)))
    }

    /// `|n|_U = √ψ_U(n*n)`.
    pub fn magnitude(&self, n: &AlgebraElement) -> Result<f64> {
        self.require(n)?;
        Ok(self.source_state(&(&n.star() * n))?.re.max(0.0).sqrt())
    }

    /// `⟨m,n⟩_U = ψ_U(E(n*m)) / (|m|_U |n|_U)`.
    pub fn angle(&self, m: &AlgebraElement, n: &AlgebraElement) -> Result<Complex64> {
        let z = self.source_state(&(&n.star() * m).diagonal())?;
        Ok(z / (self.magnitude(m)? * self.magnitude(n)?))
    }

    /// The same angle read directly off the coefficients at `g`.
    pub fn angle_oracle(&self, m: &AlgebraElement, n: &AlgebraElement) -> Complex64 {
        let z = m.coeff(self.g) * n.coeff(self.g).conj();
        z / z.norm()
    }

    /// `m ~_U n`, i.e. `⟨m,n⟩_U = 1`.
    pub fn equivalent(&self, m: &AlgebraElement, n: &AlgebraElement) -> Result<bool> {
        Ok((self.angle(m, n)? - 1.0).norm() <= 1e-9)
    }

    /// `[n]_U` as `(⟨n, δ_g⟩_U, g)`.
    pub fn twist_point(&self, n: &AlgebraElement) -> Result<TwistPoint> {
        let z = self.angle(n, &self.ctx.delta(self.g))?;
        let phase = Phase::approximate(z, MAX_PHASE_DENOM, 1e-9)
            .ok_or_else(|| Error::Format(format!("phase {z} at `{}` is not a root of unity", self.name())))?;
        Ok(TwistPoint::new(phase, self.g))
    }
}

/// Down-directedness, up-closure, properness and additive primeness of
/// `U` on a finite sample of monomials.
pub fn check_filter_axioms(u: &Ultrafilter, sample: &[AlgebraElement]) -> Check {
    let mut c = Check::new(format!("filter axioms at {}", u.name()), 0.0);
    let g = u.ctx.groupoid();
    let zero = u.ctx.zero();
    c.truth(!u.contains(&zero), || "0 ∈ U".into());
    let inside: Vec<&AlgebraElement> = sample.iter().filter(|n| u.contains(n)).collect();
    let at = u.ctx.delta(g.source(u.g));
    let dom = |a: &AlgebraElement, b: &AlgebraElement| matches!(dominates(a, b), Ok(Some(_)));
    for m in &inside {
        for n in &inside {
            let l = *m * &at;
            c.truth(u.contains(&l) && dom(&l, m) && dom(&l, n), || "no common lower bound".into());
        }
        for n in sample {
            if dom(m, n) {
                c.truth(u.contains(n), || "not up-closed".into());
            }
        }
    }
    for (i, m) in sample.iter().enumerate() {
        for n in &sample[i + 1..] {
            let sum = m + n;
            if compatible(m, n) && sum.is_monomial() && u.contains(&sum) {
                c.truth(u.contains(m) || u.contains(n), || "m + n ∈ U with m, n ∉ U".into());
            }
        }
    }
    c
}

/// The groupoid and twist rebuilt from a Cartan semigroup.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    spec: SemigroupSpec,
    /// A member of the semigroup supported at exactly the i-th point.
    pub reps: Vec<AlgebraElement>,
    pub groupoid: FiniteGroupoid,
    pub cocycle: Cocycle,
    /// The reconstructed twisted groupoid; element `i` is the ultrafilter
    /// at element `i` of the input.
    pub context: Context,
    /// Member support patterns through each point.
    patterns: Vec<Vec<Vec<Elem>>>,
    all_patterns: Vec<Vec<Elem>>,
}

impl Reconstruction {
    pub fn build(spec: &SemigroupSpec) -> Result<Self> {
        let ctx = spec.ctx();
        let g = ctx.groupoid();
        let gens = spec.generators();
        let mut reps = Vec::with_capacity(g.len());
        for e in g.elements() {
            let cut = ctx.delta(g.source(e));
            let rep = std::iter::once(ctx.delta(e))
                .chain(gens.iter().cloned())
                .filter(|x| x.in_support(e) && spec.membership(x))
                .map(|x| &x * &cut)
                .find(|x| spec.membership(x) && x.support() == [e])
                .ok_or_else(|| {
                    Error::NotCartan(format!("no member of the semigroup is supported at `{}`", g.name(e)))
                })?;
            reps.push(rep);
        }

        // Structure maps from algebra alone.
        let find = |x: &AlgebraElement| -> Result<Elem> {
            let hits: Vec<Elem> = (0..reps.len()).filter(|&i| matches!(dominates(&reps[i], x), Ok(Some(_)))).collect();
            match hits.as_slice() {
                [i] => Ok(*i),
                _ => Err(Error::OracleDisagreement(format!("element lies in {} ultrafilters", hits.len()))),
            }
        };
        let n = reps.len();
        let mut source = vec![0; n];
        let mut range = vec![0; n];
        let mut inverse = vec![0; n];
        let mut compose = vec![None; n * n];
        for i in 0..n {
            let r = &reps[i];
            source[i] = find(&(&r.star() * r))?;
            range[i] = find(&(r * &r.star()))?;
            inverse[i] = find(&r.star())?;
            for j in 0..n {
                let p = r * &reps[j];
                if !p.is_zero() {
                    compose[i * n + j] = Some(find(&p)?);
                }
            }
        }
        // Units are the ultrafilters meeting B.
        for i in 0..n {
            let meets_b = matches!(dominates(&reps[i], &reps[i].diagonal()), Ok(Some(_)));
            if meets_b != (source[i] == i) {
                return Err(Error::OracleDisagreement(format!("unit test at point {i}")));
            }
        }
        let names: Vec<String> = g.names().iter().map(|s| format!("U[{s}]")).collect();
        let groupoid = FiniteGroupoid::from_fn(
            names,
            |i| source[i],
            |i| range[i],
            |i| inverse[i],
            |i, j| compose[i * n + j].expect("composable pair has a nonzero product"),
        )?;
        for i in 0..n {
            for j in 0..n {
                if groupoid.composable(i, j) != compose[i * n + j].is_some() {
                    return Err(Error::OracleDisagreement("product defined without matching endpoints".into()));
                }
            }
        }

        // σ'(g,h) = ⟨r_g r_h, r_gh⟩ at U_gh.
        let mut phases = Vec::new();
        for (i, j) in groupoid.composable_pairs() {
            let k = groupoid.compose(i, j).unwrap();
            let u = ultrafilter_at(ctx, k)?;
            let z = u.angle(&(&reps[i] * &reps[j]), &reps[k])?;
            let p = Phase::approximate(z, MAX_PHASE_DENOM, 1e-9)
                .ok_or_else(|| Error::Format(format!("recovered phase {z} is not a root of unity")))?;
            phases.push(((i, j), p));
        }
        let lookup: std::collections::HashMap<(Elem, Elem), Phase> = phases.into_iter().collect();
        let cocycle = Cocycle::from_fn(&groupoid, |i, j| lookup[&(i, j)])
            .map_err(|v| Error::OracleDisagreement(format!("recovered cocycle invalid: {}", v[0])))?;
        let context = TwistedGroupoid::with_tolerance(groupoid.clone(), cocycle.clone(), ctx.zero_tol());

        let mut rng = Streams::new(0).rng("patterns");
        let all_patterns: Vec<Vec<Elem>> = g
            .bisections()
            .into_iter()
            .filter(|p| spec.membership(&sampling::rational_on_support(ctx, p, &mut rng)))
            .collect();
        let patterns =
            g.elements().map(|e| all_patterns.iter().filter(|p| p.contains(&e)).cloned().collect()).collect();
        Ok(Reconstruction { spec: spec.clone(), reps, groupoid, cocycle, context, patterns, all_patterns })
    }

    pub fn spec(&self) -> &SemigroupSpec {
        &self.spec
    }

    pub fn point(&self, i: Elem) -> Ultrafilter {
        Ultrafilter { ctx: self.spec.ctx().clone(), g: i }
    }

    /// `â` on the canonical points `(1, U_i)`, as an element of the
    /// reconstructed algebra.
    pub fn hat(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        let mut out = self.context.zero();
        for (i, r) in self.reps.iter().enumerate() {
            let u = self.point(i);
            let v = u.source_state(&(&r.star() * a).diagonal())? / u.magnitude(r)?;
            out.set_coeff(i, v);
        }
        Ok(out)
    }

    /// A random member through point `i`, with rational phases.
    pub fn draw_member(&self, i: Elem, rng: &mut SampleRng) -> AlgebraElement {
        let ctx = self.spec.ctx();
        let pats = &self.patterns[i];
        if !pats.is_empty() {
            let x = sampling::rational_on_support(ctx, &pats[rng.random_range(0..pats.len())], rng);
            if self.spec.membership(&x) {
                return x;
            }
        }
        let z = sampling::rational_on_support(ctx, &[i], rng).coeff(i);
        self.reps[i].scale(z)
    }

    /// A random member supported on an arbitrary member pattern.
    pub fn draw_any(&self, rng: &mut SampleRng) -> AlgebraElement {
        let p = &self.all_patterns[rng.random_range(0..self.all_patterns.len())];
        sampling::rational_on_support(self.spec.ctx(), p, rng)
    }
}

/// `σ'` recovered from the monomial semigroup, with `max |σ' − σ|`.
pub fn recover_cocycle(ctx: &Context) -> Result<(Cocycle, f64)> {
    let r = Reconstruction::build(&SemigroupSpec::monomial(ctx))?;
    let residual = cocycle_residual(ctx, &r.cocycle);
    Ok((r.cocycle, residual))
}

fn cocycle_residual(ctx: &Context, recovered: &Cocycle) -> f64 {
    ctx.groupoid()
        .composable_pairs()
        .map(|(i, j)| (recovered.get(i, j).to_complex() - ctx.cocycle().get(i, j).to_complex()).norm())
        .fold(0.0, f64::max)
}

/// Outcome of the isomorphism search between the reconstructed and the
/// input twisted groupoids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoSummary {
    /// `isomorphic`, `not-isomorphic` or `inconclusive`.
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visited: Option<u64>,
    /// Reconstructed element name → input element name.
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub bijection: IndexMap<String, String>,
}

impl IsoSummary {
    pub fn from_outcome(o: &IsoOutcome, a: &FiniteGroupoid, b: &FiniteGroupoid) -> Self {
        match o {
            IsoOutcome::Isomorphic(map) => IsoSummary {
                outcome: "isomorphic".into(),
                visited: None,
                bijection: map
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| (a.name(i).to_string(), b.name(j).to_string()))
                    .collect(),
            },
            IsoOutcome::NotIsomorphic => {
                IsoSummary { outcome: "not-isomorphic".into(), visited: None, bijection: IndexMap::new() }
            }
            IsoOutcome::Inconclusive { visited } => {
                IsoSummary { outcome: "inconclusive".into(), visited: Some(*visited), bijection: IndexMap::new() }
            }
        }
    }

    pub fn is_inconclusive(&self) -> bool {
        self.outcome == "inconclusive"
    }
}

/// Isomorphism of twisted groupoids: a groupoid isomorphism along which
/// the cocycles are cohomologous.
pub fn twisted_isomorphism(a: &TwistedGroupoid, b: &TwistedGroupoid, budget: u64) -> IsoOutcome {
    find_isomorphism_with(a.groupoid(), b.groupoid(), budget, |phi| {
        cohomologous(a.groupoid(), a.cocycle(), &b.cocycle().pull_back(a.groupoid(), phi))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub header: ReportHeader,
    pub passed: bool,
    pub reconstructed: GroupoidTables,
    pub isomorphism: IsoSummary,
    pub cocycle_residual: f64,
    pub checks: Vec<Check>,
}

impl ReconstructionReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn context(&self) -> Result<Context> {
        TwistedGroupoid::from_tables(&self.reconstructed)
    }
}

/// Sample size per property.
const CASES: usize = 100;

/// Runs the full pipeline: Cartan check, reconstruction, isomorphism
/// search, cocycle recovery and every per-theorem property.
pub fn reconstruct(spec: &SemigroupSpec, config: &RunConfig) -> Result<ReconstructionReport> {
    let ctx = spec.ctx().retolerance(config.tolerance);
    let spec = SemigroupSpec::new(&ctx, spec.kind().clone());
    let streams = Streams::new(config.seed);
    let cartan = check_cartan(&spec, 20, &mut streams.rng("reconstruct/cartan"));
    if let Some(failure) = cartan.first_failure() {
        return Err(Error::NotCartan(failure.into()));
    }
    let r = Reconstruction::build(&spec)?;
    let iso = twisted_isomorphism(&r.context, &ctx, config.iso_budget);
    let isomorphism = IsoSummary::from_outcome(&iso, &r.groupoid, ctx.groupoid());
    let cocycle_residual = cocycle_residual(&ctx, &r.cocycle);

    let mut checks = Vec::new();
    let mut iso_check = Check::new("twisted groupoid isomorphism", 0.0);
    iso_check.truth(iso.bijection().is_some(), || isomorphism.outcome.clone());
    checks.push(iso_check);
    let mut cc = Check::new("recovered cocycle", config.tolerance);
    for (i, j) in ctx.groupoid().composable_pairs() {
        let d = (r.cocycle.get(i, j).to_complex() - ctx.cocycle().get(i, j).to_complex()).norm();
        cc.residual(d, || format!("σ'({}, {})", ctx.groupoid().name(i), ctx.groupoid().name(j)));
    }
    checks.push(cc);
    checks.extend(ultrafilter_checks(&r, &mut streams.rng("reconstruct/ultrafilters")));
    checks.extend(state_checks(&r, &mut streams.rng("reconstruct/states")));
    checks.extend(twist_checks(&r, &mut streams.rng("reconstruct/twist")));
    checks.extend(hat_checks(&r, cartan.is_summable(), &mut streams.rng("reconstruct/hat")));

    let passed = iso.bijection().is_some() && cocycle_residual < config.tolerance && all_passed(&checks);
    let mut reconstructed = r.groupoid.to_tables();
    reconstructed.cocycle = r.cocycle.to_tables(&r.groupoid);
    Ok(ReconstructionReport {
        header: ReportHeader::new(&ctx, config, &spec.kind().to_string()),
        passed,
        reconstructed,
        isomorphism,
        cocycle_residual,
        checks,
    })
}

fn name(r: &Reconstruction, i: Elem) -> String {
    r.spec.ctx().groupoid().name(i).to_string()
}

fn points_of(r: &Reconstruction, x: &AlgebraElement) -> Vec<Elem> {
    (0..r.reps.len()).filter(|&i| r.point(i).contains(x)).collect()
}

/// Filter axioms, products, units, the complement map and containment of
/// basic sets.
pub fn ultrafilter_checks(r: &Reconstruction, rng: &mut SampleRng) -> Vec<Check> {
    let ctx = r.spec.ctx();
    let g = ctx.groupoid();
    let n = g.len();
    let samples: Vec<Vec<AlgebraElement>> = (0..n)
        .map(|i| {
            let mut s = vec![r.reps[i].clone()];
            s.extend((0..6).map(|_| r.draw_member(i, rng)));
            s
        })
        .collect();
    let mut out = Vec::new();

    let mut filt = Check::new("filter axioms", 0.0);
    for i in 0..n {
        let mut sample: Vec<AlgebraElement> = samples[i].clone();
        sample.extend(samples[(i + 1) % n].iter().take(3).cloned());
        let c = check_filter_axioms(&r.point(i), &sample);
        filt.cases += c.cases;
        if !c.passed {
            filt.truth(false, || c.witness.clone().unwrap_or_default());
        }
    }
    out.push(filt);

    // T·U defined ⟺ 0 ∉ TU; when defined, TU ⊆ T·U.
    let mut prod = Check::new("product defined iff 0 not in TU", 0.0);
    for i in 0..n {
        for j in 0..n {
            let defined = ultrafilter_product(&r.point(i), &r.point(j));
            let mut zero = false;
            for a in &samples[i] {
                for b in &samples[j] {
                    let p = a * b;
                    if p.is_zero() {
                        zero = true;
                    } else if let Some(k) = &defined {
                        prod.truth(k.contains(&p), || format!("TU ⊄ T·U at ({}, {})", name(r, i), name(r, j)));
                    }
                }
            }
            prod.truth(defined.is_some() != zero, || format!("({}, {})", name(r, i), name(r, j)));
            prod.truth(defined.as_ref().map(|u| u.element()) == r.groupoid.compose(i, j), || {
                format!("reconstructed product at ({}, {})", name(r, i), name(r, j))
            });
        }
    }
    out.push(prod);

    // Basic sets: exhaustive over member patterns.
    let members: Vec<AlgebraElement> =
        r.all_patterns.iter().map(|p| sampling::rational_on_support(ctx, p, rng)).collect();
    let mut basic = Check::new("U_mn = U_m U_n", 0.0);
    for a in &members {
        let ua = points_of(r, a);
        for b in &members {
            let lhs = points_of(r, &(a * b));
            let mut rhs = r.groupoid.product_set(&ua, &points_of(r, b));
            rhs.sort_unstable();
            basic.truth(lhs == rhs, || format!("{lhs:?} vs {rhs:?}"));
        }
    }
    out.push(basic);

    let units: Vec<Elem> = r.groupoid.units().to_vec();
    let mut ue = Check::new("U_E(n) = U_n ∩ G0", 0.0);
    let mut bg0 = Check::new("U_n ⊆ G0 iff n ∈ B", 0.0);
    for a in &members {
        let un = points_of(r, a);
        let cut: Vec<Elem> = un.iter().copied().filter(|i| units.contains(i)).collect();
        ue.truth(points_of(r, &a.diagonal()) == cut, || format!("{un:?}"));
        bg0.truth(un.iter().all(|i| units.contains(i)) == a.is_diagonal(), || format!("{un:?}"));
    }
    out.push(ue);

    let mut unit = Check::new("unit ultrafilters meet B", 0.0);
    for i in 0..n {
        let meets_b = r.point(i).contains(&r.reps[i].diagonal());
        unit.truth(meets_b == units.contains(&i) && meets_b == g.is_unit(i), || name(r, i));
        bg0.truth(meets_b == r.reps[i].is_diagonal(), || name(r, i));
        if !meets_b {
            // The complement of the unit space is covered by E(n) = 0.
            unit.truth(r.reps[i].diagonal().is_zero(), || format!("E(n) ≠ 0 at {}", name(r, i)));
        }
    }
    out.push(unit);
    out.push(bg0);

    // h(U) = B∖U onto the kernels of the characters of B.
    let mut h = Check::new("h(U) = B minus U is a bijection onto character kernels", 0.0);
    let characters: Vec<Vec<Elem>> = g
        .units()
        .iter()
        .map(|&v| g.units().iter().copied().filter(|&w| ctx.delta(w).eval_at(v).norm() == 0.0).collect())
        .collect();
    let mut hit = vec![false; characters.len()];
    for &u in &units {
        let kernel: Vec<Elem> = g.units().iter().copied().filter(|&w| !r.point(u).contains(&ctx.delta(w))).collect();
        let matches: Vec<usize> = (0..characters.len()).filter(|&c| characters[c] == kernel).collect();
        h.truth(matches.len() == 1, || format!("kernel of {} matches {} characters", name(r, u), matches.len()));
        for c in matches {
            h.truth(!hit[c], || "two ultrafilters share a kernel".into());
            hit[c] = true;
        }
        for _ in 0..10 {
            let b = sampling::diagonal(ctx, rng);
            let psi = r.point(u).source_state(&b).unwrap();
            h.truth((psi.norm() > ctx.zero_tol()) == r.point(u).contains(&b), || "ψ kernel".into());
        }
    }
    h.truth(hit.iter().all(|&x| x), || "a character is missed".into());
    out.push(h);

    let mut dom = Check::new("m < n iff U_m ⊆ U_n", 0.0);
    for _ in 0..2 * CASES {
        let a = r.draw_any(rng);
        let b = if rng.random_bool(0.5) { r.draw_any(rng) } else { a.restrict(&sampling::subset(&a.support(), rng)) };
        let (x, y) = if rng.random_bool(0.5) { (b, a) } else { (a, b) };
        let contained = points_of(r, &x).iter().all(|i| points_of(r, &y).contains(i));
        dom.truth(matches!(dominates(&x, &y), Ok(Some(_))) == contained, || "domination vs containment".into());
    }
    out.push(dom);
    out
}

/// Source/range states, magnitudes and angles.
pub fn state_checks(r: &Reconstruction, rng: &mut SampleRng) -> Vec<Check> {
    let ctx = r.spec.ctx();
    let g = ctx.groupoid();
    let n = g.len();
    let tight = 1e-12;
    let mut quotient = Check::new("range state quotient identity", tight);
    let mut kernel = Check::new("ψ_U(b) ≠ 0 iff b ∈ s(U)", 0.0);
    let mut mag = Check::new("magnitude is |n(g)|", tight);
    let mut mult = Check::new("|mn|_TU = |m|_T |n|_U", tight);
    let mut star = Check::new("|n*|_U* = |n|_U and homogeneity", tight);
    let mut emn = Check::new("|ψ_U(E(m*n))| = |m|_U |n|_U", tight);
    let mut oracle = Check::new("angle formula vs direct phase", 1e-9);
    let mut unit = Check::new("⟨n,n⟩ = 1 and ⟨m,n⟩ = conj ⟨n,m⟩", tight);
    let mut stars = Check::new("⟨m*,n*⟩_U* = ⟨n,m⟩_U", tight);
    let mut chain = Check::new("angle chain rule", tight);
    let mut product = Check::new("angle product rule", tight);
    let pairs: Vec<(Elem, Elem)> = g.composable_pairs().collect();
    for _ in 0..CASES {
        let i = rng.random_range(0..n);
        let u = r.point(i);
        let [l, m, x] = [0, 1, 2].map(|_| r.draw_member(i, rng));
        let b = sampling::diagonal(ctx, rng);
        let lhs = u.range_state(&b).unwrap();
        let rhs = u.source_state(&(&(&x.star() * &b) * &x)).unwrap() / u.source_state(&(&x.star() * &x)).unwrap();
        quotient.residual((lhs - rhs).norm(), || name(r, i));
        let su = u.source();
        kernel.truth((u.source_state(&b).unwrap().norm() > ctx.zero_tol()) == su.contains(&b), || name(r, i));

        let mm = u.magnitude(&m).unwrap();
        mag.residual((mm - m.coeff(i).norm()).abs(), || name(r, i));
        star.residual((u.star().magnitude(&m.star()).unwrap() - mm).abs(), || name(r, i));
        let z = sampling::nonzero_complex(rng);
        star.residual((u.magnitude(&m.scale(z)).unwrap() - z.norm() * mm).abs(), || name(r, i));
        let e = u.source_state(&(&m.star() * &x).diagonal()).unwrap().norm();
        emn.residual((e - mm * u.magnitude(&x).unwrap()).abs(), || name(r, i));

        let a = u.angle(&m, &x).unwrap();
        oracle.residual((a - u.angle_oracle(&m, &x)).norm(), || name(r, i));
        unit.residual((u.angle(&m, &m).unwrap() - 1.0).norm(), || name(r, i));
        unit.residual((a - u.angle(&x, &m).unwrap().conj()).norm(), || name(r, i));
        stars
            .residual((u.star().angle(&m.star(), &x.star()).unwrap() - u.angle(&x, &m).unwrap()).norm(), || name(r, i));
        let ch = u.angle(&l, &x).unwrap() - u.angle(&l, &m).unwrap() * a;
        chain.residual(ch.norm(), || name(r, i));

        let (p, q) = pairs[rng.random_range(0..pairs.len())];
        let (t, v) = (r.point(p), r.point(q));
        let tv = ultrafilter_product(&t, &v).expect("composable");
        let [m1, n1] = [0, 1].map(|_| r.draw_member(p, rng));
        let [r1, s1] = [0, 1].map(|_| r.draw_member(q, rng));
        let mr = &m1 * &r1;
        let ns = &n1 * &s1;
        mult.residual(
            (tv.magnitude(&mr).unwrap() - t.magnitude(&m1).unwrap() * v.magnitude(&r1).unwrap()).abs(),
            || format!("({}, {})", name(r, p), name(r, q)),
        );
        let lhs = tv.angle(&mr, &ns).unwrap();
        let rhs = t.angle(&m1, &n1).unwrap() * v.angle(&r1, &s1).unwrap();
        product.residual((lhs - rhs).norm(), || format!("({}, {})", name(r, p), name(r, q)));
    }
    vec![quotient, kernel, mag, mult, star, emn, oracle, unit, stars, chain, product]
}

/// Twist points: `~_U` classes, class arithmetic, `U = [n]_U^<`, the unit
/// ball, and limits in the discrete twist.
pub fn twist_checks(r: &Reconstruction, rng: &mut SampleRng) -> Vec<Check> {
    let ctx = r.spec.ctx();
    let g = ctx.groupoid();
    let n = g.len();
    let rc = &r.context;
    let mut equiv = Check::new("m ~_U n iff equal twist points", 0.0);
    let mut arith = Check::new("twist point product, inverse and T-action", 0.0);
    let mut below = Check::new("U = [n]_U^<", 0.0);
    let mut ball = Check::new("U_1 meets the unit ball", 1e-9);
    let mut limits = Check::new("limits in the discrete twist", 0.0);
    let pairs: Vec<(Elem, Elem)> = g.composable_pairs().collect();
    for _ in 0..2 * CASES {
        let i = rng.random_range(0..n);
        let u = r.point(i);
        let m = r.draw_member(i, rng);
        let x = if rng.random_bool(0.5) {
            // Same class: positive rescaling plus noise off the point.
            let mut y = m.scale(Complex64::new(rng.random_range(0.5..2.0), 0.0));
            for j in m.support().into_iter().filter(|&j| j != i) {
                y.set_coeff(j, sampling::rational_on_support(ctx, &[j], rng).coeff(j));
            }
            y
        } else {
            r.draw_member(i, rng)
        };
        let same = u.equivalent(&m, &x).unwrap();
        equiv.truth(same == (u.twist_point(&m).unwrap() == u.twist_point(&x).unwrap()), || name(r, i));

        let (p, q) = pairs[rng.random_range(0..pairs.len())];
        let (a, b) = (r.draw_member(p, rng), r.draw_member(q, rng));
        let (tp, tq) = (r.point(p).twist_point(&a).unwrap(), r.point(q).twist_point(&b).unwrap());
        let pq = ultrafilter_product(&r.point(p), &r.point(q)).unwrap();
        let class = pq.twist_point(&(&a * &b)).unwrap();
        arith.truth(tp.mul(&tq, rc) == Some(class), || format!("({}, {})", name(r, p), name(r, q)));
        arith.truth(r.point(p).star().twist_point(&a.star()).unwrap() == tp.inverse(rc), || {
            format!("inverse at {}", name(r, p))
        });
        let t = Phase::from_turns(rng.random_range(0..12), 12);
        arith.truth(r.point(p).twist_point(&a.scale(t.to_complex())).unwrap() == tp.act(t), || {
            format!("T-action at {}", name(r, p))
        });

        // Every member of U lies above a restriction of n equivalent to n.
        let l = &m * &ctx.delta(g.source(i));
        below.truth(u.equivalent(&l, &m).unwrap() && matches!(dominates(&l, &x), Ok(Some(_))), || name(r, i));
    }
    for i in 0..n {
        let u = r.point(i);
        let x = r.reps[i].scale(Complex64::new(1.0 / r.reps[i].coeff(i).norm(), 0.0));
        ball.residual((cstar_norm(&x) - 1.0).max(0.0), || name(r, i));
        ball.residual((u.magnitude(&x).unwrap() - 1.0).abs(), || name(r, i));
        ball.truth(u.contains(&x), || name(r, i));
        let p = TwistPoint::canonical(i);
        let q = p.act(Phase::i());
        limits.truth(discrete_limit(&[q, p, p, p], 1) == Some(p), || name(r, i));
        limits.truth(discrete_limit(&[p, q, p, q], 1).is_none(), || name(r, i));
    }
    vec![equiv, arith, below, ball, limits]
}

/// The hat map and the image of the semigroup.
pub fn hat_checks(r: &Reconstruction, summable: bool, rng: &mut SampleRng) -> Vec<Check> {
    let ctx = r.spec.ctx();
    let rc = &r.context;
    let tol = 1e-9;
    let transport = |a: &AlgebraElement| rc.element(a.coeffs().to_vec());
    let mut round = Check::new("hat round trip", tol);
    let mut lin = Check::new("hat is linear", tol);
    let mut mult = Check::new("hat is multiplicative", tol);
    let mut inv = Check::new("hat preserves the involution", tol);
    let mut exp = Check::new("E hat = hat E", tol);
    let mut supp = Check::new("supp hat(n) = q^-1(U_n)", 0.0);
    let mut image = Check::new("hat(csum N) is the monomial semigroup", 0.0);
    for _ in 0..CASES {
        let a = sampling::element(ctx, rng);
        let b = sampling::element(ctx, rng);
        let ha = r.hat(&a).unwrap();
        let hb = r.hat(&b).unwrap();
        round.residual(ha.distance(&transport(&a)), || "round trip".into());
        let z = sampling::complex(rng);
        lin.residual(r.hat(&(&a.scale(z) + &b)).unwrap().distance(&(&ha.scale(z) + &hb)), || "linearity".into());
        mult.residual(r.hat(&(&a * &b)).unwrap().distance(&(&ha * &hb)), || "product".into());
        inv.residual(r.hat(&a.star()).unwrap().distance(&ha.star()), || "involution".into());
        exp.residual(r.hat(&a.diagonal()).unwrap().distance(&ha.diagonal()), || "expectation".into());
        let n = r.draw_any(rng);
        supp.truth(r.hat(&n).unwrap().support() == points_of(r, &n), || "support".into());
    }
    // Ψ(csum N) = monomial, extensionally.
    let closure = csum_closure(&r.spec);
    let all: Vec<Elem> = ctx.groupoid().elements().collect();
    let mut sets: Vec<Vec<Elem>> = r.all_patterns.clone();
    sets.extend(ctx.groupoid().bisections());
    for _ in 0..CASES {
        sets.push(sampling::subset(&all, rng));
    }
    sets.shuffle(rng);
    for set in sets.iter().take(4 * CASES) {
        let a = sampling::on_support(ctx, set, rng);
        let monomial = r.hat(&a).unwrap().is_monomial();
        image.truth(closure.membership(&a) == monomial, || format!("{set:?}"));
        if summable {
            image.truth(r.spec.membership(&a) == monomial, || format!("{set:?}"));
        }
    }
    vec![round, lin, mult, inv, exp, supp, image]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::semigroup::off_diagonal_singletons_basis;

    #[test]
    fn ultrafilter_examples() {
        let r2 = fixtures::full_equivalence(2);
        let g = r2.groupoid();
        let e12 = g.index_of("(1,2)").unwrap();
        let e21 = g.index_of("(2,1)").unwrap();
        let u = ultrafilter_at(&r2, e12).unwrap();
        assert!(u.contains(&r2.delta(e12)));
        assert!(!u.contains(&r2.delta(e21)));
        assert!(!u.contains(&r2.zero()));
        let flip = &r2.delta(e12) + &r2.delta(e21);
        assert!(u.contains(&flip) && ultrafilter_at(&r2, e21).unwrap().contains(&flip));
        let p = ultrafilter_product(&u, &ultrafilter_at(&r2, e21).unwrap()).unwrap();
        assert_eq!(p.name(), "(1,1)");
        assert!(ultrafilter_product(&u, &u).is_none());
        assert!((&r2.delta(e12) * &r2.delta(e12)).is_zero());
        assert!(ultrafilter_at(&r2, 9).is_err());
    }

    #[test]
    fn filter_axioms_on_small_samples() {
        let r2 = fixtures::full_equivalence(2);
        let e12 = r2.delta_named("(1,2)").unwrap();
        let e21 = r2.delta_named("(2,1)").unwrap();
        let u = ultrafilter_at(&r2, r2.groupoid().index_of("(1,2)").unwrap()).unwrap();
        let sample = vec![e12.clone(), e12.scale(Complex64::new(2.0, 0.0)), &e12 + &e21, e21.clone()];
        let c = check_filter_axioms(&u, &sample);
        assert!(c.passed, "{:?}", c.witness);
        assert!(c.cases > 10);
    }

    #[test]
    fn states_magnitudes_angles() {
        let z4 = fixtures::cyclic(4);
        let g = z4.groupoid().index_of("1").unwrap();
        let u = ultrafilter_at(&z4, g).unwrap();
        let d = z4.delta(g);
        assert_eq!(u.source_state(&z4.identity()).unwrap(), Complex64::new(1.0, 0.0));
        assert!(u.source_state(&d).is_err());
        assert!((u.magnitude(&d).unwrap() - 1.0).abs() < 1e-15);
        let i3 = d.scale(Complex64::new(0.0, 3.0));
        assert!((u.magnitude(&i3).unwrap() - 3.0).abs() < 1e-15);
        let id = d.scale(Complex64::i());
        assert!((u.angle(&id, &d).unwrap() - Complex64::i()).norm() < 1e-15);
        assert!((u.angle(&d, &d).unwrap() - 1.0).norm() < 1e-15);
        assert!(u.magnitude(&z4.delta(0)).is_err());
        assert_eq!(u.twist_point(&d).unwrap(), TwistPoint::canonical(g));
        assert_eq!(u.twist_point(&id).unwrap(), TwistPoint::new(Phase::i(), g));
    }

    #[test]
    fn cocycle_recovery() {
        let (c, res) = recover_cocycle(&fixtures::full_equivalence(2)).unwrap();
        assert!(c.is_trivial() && res == 0.0);
        let pauli = fixtures::klein_four_pauli();
        let (c, res) = recover_cocycle(&pauli).unwrap();
        assert_eq!(&c, pauli.cocycle());
        assert_eq!(res, 0.0);
    }

    #[test]
    fn hat_on_deltas() {
        let r3 = fixtures::full_equivalence(3);
        let r = Reconstruction::build(&SemigroupSpec::monomial(&r3)).unwrap();
        for e in r3.groupoid().elements() {
            let h = r.hat(&r3.delta(e)).unwrap();
            assert_eq!(h.support(), vec![e]);
            assert!((h.coeff(e) - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn monomial_round_trip_on_all_fixtures() {
        for (name, ctx) in fixtures::standard_fixtures() {
            let rep = reconstruct(&SemigroupSpec::monomial(&ctx), &RunConfig::default()).unwrap();
            for c in &rep.checks {
                assert!(c.passed, "{name}: {}", c.line());
            }
            assert!(rep.passed, "{name}");
            assert!(rep.cocycle_residual < 1e-9);
        }
    }

    #[test]
    fn basis_restricted_round_trip() {
        let r2 = fixtures::full_equivalence(2);
        let spec = SemigroupSpec::basis_restricted(&r2, off_diagonal_singletons_basis(r2.groupoid()).unwrap());
        let rep = reconstruct(&spec, &RunConfig::default()).unwrap();
        for c in &rep.checks {
            assert!(c.passed, "{}", c.line());
        }
        assert!(rep.passed);
    }

    #[test]
    fn non_cartan_spec_is_refused() {
        let r2 = fixtures::full_equivalence(2);
        let list = r2.groupoid().units().iter().map(|&u| r2.delta(u)).collect();
        let err = reconstruct(&SemigroupSpec::explicit(&r2, list), &RunConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NotCartan(_)));
    }

    #[test]
    fn reports_are_deterministic_and_round_trip() {
        let ctx = fixtures::klein_four_pauli();
        let spec = SemigroupSpec::monomial(&ctx);
        let a = reconstruct(&spec, &RunConfig::default()).unwrap().to_json();
        let b = reconstruct(&spec, &RunConfig::default()).unwrap().to_json();
        assert_eq!(a, b);
        let back = ReconstructionReport::from_json(&a).unwrap();
        assert_eq!(back.to_json(), a);
        let rc = back.context().unwrap();
        assert!(!rc.cocycle().is_trivial());
    }

    #[test]
    fn z4_and_v4_reconstructions_differ() {
        let cfg = RunConfig::default();
        let a = reconstruct(&SemigroupSpec::monomial(&fixtures::cyclic(4)), &cfg).unwrap();
        let b = reconstruct(&SemigroupSpec::monomial(&fixtures::klein_four()), &cfg).unwrap();
        let out = twisted_isomorphism(&a.context().unwrap(), &b.context().unwrap(), cfg.iso_budget);
        assert_eq!(out, IsoOutcome::NotIsomorphic);
    }
}
