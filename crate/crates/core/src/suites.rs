//! Property suites run by the command line tool and the acceptance tests.
//!
//! Each suite draws from its own named random stream, so adding or
//! changing one never perturbs another.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, Context, ContextExt};
use crate::error::{Error, Result};
use crate::expectation::{
    bistable_residual, character_residuals, max_diagonal_restriction, normal_residual, shiftable_residual,
};
use crate::groupoid::Elem;
use crate::masa::{
    cartan_criterion, is_masa, masa_decision, masa_implies_normalisers, normalisers_imply_masa_contrapositive,
};
use crate::reconstruction::{state_checks, twist_checks, ultrafilter_checks, Reconstruction};
use crate::relations::{
    ball_witness, certify, dominated_approximation, dominates, dominates_brute_force, dominates_by_support,
    interpolate, predomain_interpolant, restriction_le, restricts_pointwise,
};
use crate::report::{all_passed, Check, ReportHeader, RunConfig};
use crate::repr::{check_reduced_norm_formula, cstar_norm};
use crate::sampling::{self, SampleRng, Streams};
use crate::semigroup::{
    check_cartan, compatible, csum_closure, is_normalizer, sample_normalizer, AxiomCheck, SemigroupSpec,
};

/// Largest groupoid on which support patterns are swept exhaustively.
pub const SWEEP_LIMIT: usize = 6;
/// Random pairs per fixture for the oracle comparisons.
pub const ORACLE_PAIRS: usize = 200;
/// Constructed cases per law.
pub const LAW_CASES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Cartan,
    Relations,
    States,
    Masa,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Cartan, Suite::Relations, Suite::States, Suite::Masa];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Cartan => "cartan",
            Suite::Relations => "relations",
            Suite::States => "states",
            Suite::Masa => "masa",
        }
    }

    /// `all` or a single suite name.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            Ok(Suite::ALL.to_vec())
        } else {
            Ok(vec![s.parse()?])
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            Error::Format(format!("unknown suite `{s}` (expected cartan, relations, states, masa or all)"))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SuiteResult {
    fn new(checks: Vec<Check>, notes: Vec<String>) -> Self {
        SuiteResult { passed: all_passed(&checks), checks, notes }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub header: ReportHeader,
    pub passed: bool,
    pub suites: IndexMap<String, SuiteResult>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Runs the selected suites in their fixed order.
pub fn run_suites(spec: &SemigroupSpec, suites: &[Suite], config: &RunConfig) -> Result<SuiteReport> {
    let ctx = spec.ctx().retolerance(config.tolerance);
    let spec = SemigroupSpec::new(&ctx, spec.kind().clone());
    let streams = Streams::new(config.seed);
    let mut out = IndexMap::new();
    for suite in Suite::ALL.into_iter().filter(|s| suites.contains(s)) {
        let mut rng = streams.rng(&format!("suite/{suite}"));
        let result = match suite {
            Suite::Cartan => cartan_suite(&spec, &mut rng),
            Suite::Relations => SuiteResult::new(relations_suite(&ctx, &mut rng), Vec::new()),
            Suite::States => SuiteResult::new(states_suite(&spec, &mut rng)?, Vec::new()),
            Suite::Masa => masa_suite(&ctx, &mut rng)?,
        };
        out.insert(suite.name().to_string(), result);
    }
    Ok(SuiteReport {
        header: ReportHeader::new(&ctx, config, &spec.kind().to_string()),
        passed: out.values().all(|r| r.passed),
        suites: out,
    })
}

fn axiom_check(name: &str, a: &AxiomCheck) -> Check {
    let mut c = Check::new(name, 0.0);
    c.cases = a.cases;
    if !a.holds {
        c.passed = false;
        c.witness = Some(describe(&a.counterexample));
    }
    c
}

fn describe(xs: &[AlgebraElement]) -> String {
    xs.iter()
        .map(|x| {
            let g = x.ctx().groupoid();
            let terms: Vec<String> = x.support().iter().map(|&e| format!("δ{}", g.name(e))).collect();
            if terms.is_empty() {
                "0".into()
            } else {
                terms.join("+")
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Support patterns to sweep: all subsets for small groupoids, otherwise
/// every bisection plus random subsets.
fn support_patterns(ctx: &Context, rng: &mut SampleRng) -> Vec<Vec<Elem>> {
    let g = ctx.groupoid();
    let all: Vec<Elem> = g.elements().collect();
    if g.len() <= SWEEP_LIMIT {
        (0u64..(1 << all.len())).map(|mask| all.iter().copied().filter(|&e| mask & (1 << e) != 0).collect()).collect()
    } else {
        let mut out = g.bisections();
        out.extend((0..ORACLE_PAIRS).map(|_| sampling::subset(&all, rng)));
        out
    }
}

/// The Cartan axioms, summability of the closure, and the norm identities.
pub fn cartan_suite(spec: &SemigroupSpec, rng: &mut SampleRng) -> SuiteResult {
    let ctx = spec.ctx();
    let report = check_cartan(spec, 20, rng);
    let mut checks: Vec<Check> = report.axioms().into_iter().map(|(n, a)| axiom_check(n, a)).collect();
    let mut notes = Vec::new();
    if report.is_summable() {
        notes.push("summable".into());
    } else {
        notes.push(format!("not summable, witness ({})", describe(&report.summable.counterexample)));
    }

    let closure = csum_closure(spec);
    let cr = check_cartan(&closure, 20, rng);
    checks.push(axiom_check("csum closure is summable", &cr.summable));
    let mut ext = Check::new("csum closure is the monomial semigroup", 0.0);
    for set in support_patterns(ctx, rng) {
        let a = sampling::on_support(ctx, &set, rng);
        ext.truth(closure.membership(&a) == a.is_monomial(), || format!("{set:?}"));
    }
    checks.push(ext);

    let mut sum = Check::new("N(B) is closed under compatible sums", 1e-9);
    for _ in 0..LAW_CASES {
        let m = sample_normalizer(ctx, rng);
        let n = sample_normalizer(ctx, rng);
        if compatible(&m, &n) {
            sum.truth(is_normalizer(&(&m + &n)), || describe(&[m.clone(), n.clone()]));
        }
        sum.truth(is_normalizer(&m), || describe(std::slice::from_ref(&m)));
    }
    checks.push(sum);
    checks.extend(norm_checks(ctx, rng));
    SuiteResult::new(checks, notes)
}

/// `‖δ_g‖ = 1`, the C*-identity, and the reduced-norm formula bounds.
pub fn norm_checks(ctx: &Context, rng: &mut SampleRng) -> Vec<Check> {
    let g = ctx.groupoid();
    let mut deltas = Check::new("norm of each delta is 1", 1e-12);
    for e in g.elements() {
        deltas.residual((cstar_norm(&ctx.delta(e)) - 1.0).abs(), || g.name(e).to_string());
    }
    let mut cstar = Check::new("C*-identity", 1e-9);
    let mut formula = Check::new("reduced-norm formula bounded by the norm", 1e-9);
    // Power iteration approaches the supremum only geometrically.
    let mut attained = Check::new("reduced-norm formula attains the norm", 1e-3);
    for _ in 0..LAW_CASES {
        let a = sampling::element(ctx, rng);
        let n = cstar_norm(&a);
        cstar.residual((cstar_norm(&(&a.star() * &a)) - n * n).abs() / (1.0 + n * n), || "random element".into());
    }
    for _ in 0..10 {
        let a = sampling::element(ctx, rng);
        let rep = check_reduced_norm_formula(&a, 50, rng);
        formula.residual(rep.upper_violation.max(0.0), || "formula exceeds the norm".into());
        attained.residual(rep.structured_gap.max(0.0), || "structured supremum misses the norm".into());
    }
    vec![deltas, cstar, formula, attained]
}

/// Restriction and domination against their oracles, order laws, the
/// expectation, and the ball-witness forms of domination.
pub fn relations_suite(ctx: &Context, rng: &mut SampleRng) -> Vec<Check> {
    let g = ctx.groupoid();
    let bis = g.bisections();
    let draw = |rng: &mut SampleRng| sampling::monomial(ctx, &bis, rng);
    let dom = |m: &AlgebraElement, n: &AlgebraElement| matches!(dominates(m, n), Ok(Some(_)));
    let le = |m: &AlgebraElement, n: &AlgebraElement| restriction_le(m, n).unwrap_or(false);
    let mut out = Vec::new();

    let mut oracle = Check::new("restriction and domination match their oracles", 0.0);
    for _ in 0..ORACLE_PAIRS {
        let (m, n) = sampling::monomial_pair(ctx, &bis, rng);
        match restriction_le(&m, &n) {
            Ok(r) => oracle.truth(r == restricts_pointwise(&m, &n), || describe(&[m.clone(), n.clone()])),
            Err(e) => oracle.truth(false, || e.to_string()),
        }
        let algebraic = dom(&m, &n);
        oracle.truth(algebraic == dominates_by_support(&m, &n), || describe(&[m.clone(), n.clone()]));
        if g.len() <= SWEEP_LIMIT {
            oracle.truth(algebraic == dominates_brute_force(&m, &n), || describe(&[m.clone(), n.clone()]));
        }
    }
    out.push(oracle);

    let mut order = Check::new("restriction is a partial order", 0.0);
    let mut diff = Check::new("n - m restricts n", 0.0);
    let mut aux = Check::new("auxiliarity", 0.0);
    let mut einv = Check::new("E-invariance of domination", 0.0);
    let mut sinv = Check::new("star-invariance of domination", 0.0);
    let mut sums = Check::new("sum closure of domination", 0.0);
    let mut interp = Check::new("interpolation", 0.0);
    let mut approx = Check::new("dominated approximation", 1e-9);
    for _ in 0..LAW_CASES {
        let n = draw(rng);
        let m = n.restrict(&sampling::subset(&n.support(), rng));
        let k = m.restrict(&sampling::subset(&m.support(), rng));
        let other = draw(rng);
        order.truth(le(&n, &n), || "reflexivity".into());
        order.truth(!(le(&m, &n) && le(&k, &m)) || le(&k, &n), || "transitivity".into());
        for (a, b) in [(&m, &n), (&other, &n), (&n, &other)] {
            order.truth(!(le(a, b) && le(b, a)) || a.approx_eq(b, 0.0), || "antisymmetry".into());
        }
        diff.truth(le(&(&n - &m), &n), || describe(&[m.clone(), n.clone()]));

        // k ⊑ l < m' ⊑ n' with l a fresh element inside m'.
        let m2 = n.restrict(&sampling::subset(&n.support(), rng));
        let l = sampling::on_support(ctx, &sampling::subset(&m2.support(), rng), rng);
        let k2 = l.restrict(&sampling::subset(&l.support(), rng));
        aux.truth(le(&k2, &l) && dom(&l, &m2) && le(&m2, &n), || "chain construction".into());
        aux.truth(dom(&k2, &n), || describe(&[k2.clone(), n.clone()]));

        if let Ok(Some(w)) = dominates(&l, &n) {
            einv.truth(certify(&l.diagonal(), &n.diagonal(), &w.s.diagonal()).is_some(), || {
                describe(&[l.clone(), n.clone()])
            });
            sinv.truth(certify(&l.star(), &n.star(), &w.s.star()).is_some(), || describe(&[l.clone(), n.clone()]));
            match interpolate(&l, &n, &w) {
                Ok(i) => interp
                    .truth(certify(&l, &i.l, &i.inner.s).is_some() && certify(&i.l, &n, &i.outer.s).is_some(), || {
                        describe(&[l.clone(), n.clone()])
                    }),
                Err(e) => interp.truth(false, || e.to_string()),
            }
        }
        let l2 = sampling::on_support(ctx, &sampling::subset(&n.support(), rng), rng);
        let total = &l + &l2;
        if dom(&l, &n) && dom(&l2, &n) && total.is_monomial() {
            sums.truth(dom(&total, &n), || describe(&[l.clone(), l2.clone(), n.clone()]));
        }
        match dominated_approximation(&n, 20) {
            Ok(a) => {
                for (nj, w) in &a.terms {
                    approx.truth(certify(nj, &n, &w.s).is_some(), || describe(std::slice::from_ref(&n)));
                }
                let last = a.terms.last().map(|(x, _)| x.distance(&n)).unwrap_or(0.0);
                let min_sq = n.support().iter().map(|&e| n.coeff(e).norm_sqr()).fold(f64::INFINITY, f64::min);
                if n.is_zero() || min_sq * 20.0 >= 1.0 {
                    approx.residual(last, || "approximation does not reach n".into());
                }
            }
            Err(e) => approx.truth(false, || e.to_string()),
        }
    }
    out.extend([order, diff, aux, einv, sinv, sums, interp, approx]);
    out.extend(expectation_checks(ctx, rng));
    out.extend(ball_checks(ctx, rng));
    out
}

/// `E(n) = max{b ∈ B : b ⊑ n}` and the Normal / Shiftable / Bistable
/// identities.
pub fn expectation_checks(ctx: &Context, rng: &mut SampleRng) -> Vec<Check> {
    let g = ctx.groupoid();
    let bis = g.bisections();
    let mut emax = Check::new("E(n) is the largest diagonal restriction of n", 0.0);
    let samples: Vec<AlgebraElement> = if g.len() <= SWEEP_LIMIT {
        bis.iter().map(|p| sampling::on_support(ctx, p, rng)).collect()
    } else {
        (0..ORACLE_PAIRS).map(|_| sampling::monomial(ctx, &bis, rng)).collect()
    };
    for n in &samples {
        match max_diagonal_restriction(n) {
            Ok(e) => emax.truth(e.approx_eq(&n.diagonal(), 0.0), || describe(std::slice::from_ref(n))),
            Err(e) => emax.truth(false, || e.to_string()),
        }
    }
    let tight = 1e-10;
    let mut normal = Check::new("normal", tight);
    let mut shift = Check::new("shiftable", tight);
    let mut bistable = Check::new("bistable", tight);
    let mut chars = Check::new("character identity", tight);
    for _ in 0..LAW_CASES {
        let n = sampling::monomial(ctx, &bis, rng);
        let m = if rng.random_bool(0.5) {
            sampling::monomial(ctx, &bis, rng)
        } else {
            // A partner making mn diagonal.
            sampling::on_support(ctx, &g.inverse_set(&n.support()), rng)
        };
        let a = sampling::element(ctx, rng);
        normal.residual(normal_residual(&n, &a), || describe(std::slice::from_ref(&n)));
        shift.residual(shiftable_residual(&n, &a), || describe(std::slice::from_ref(&n)));
        if let Some(r) = bistable_residual(&m, &n) {
            bistable.residual(r, || describe(&[m.clone(), n.clone()]));
        }
        for r in character_residuals(&m, &n) {
            chars.residual(r, || describe(&[m.clone(), n.clone()]));
        }
    }
    vec![emax, normal, shift, bistable, chars]
}

/// Ball-witness domination and predomain interpolation on certified
/// pairs and families.
pub fn ball_checks(ctx: &Context, rng: &mut SampleRng) -> Vec<Check> {
    let bis = ctx.groupoid().bisections();
    let mut ball = Check::new("ball witness certificates", 1e-9);
    let mut pre = Check::new("predomain interpolant certificates", 0.0);
    let mut pairs = 0;
    while pairs < LAW_CASES {
        let n = sampling::monomial(ctx, &bis, rng);
        let m = sampling::on_support(ctx, &sampling::subset(&n.support(), rng), rng);
        match ball_witness(&m, &n) {
            Ok(w) => {
                let tn = (&w.t * &n).diagonal();
                ball.residual(w.residual, || describe(&[m.clone(), n.clone()]));
                ball.residual((cstar_norm(&tn) - 1.0).max(0.0), || "‖tn‖ > 1".into());
            }
            Err(e) => ball.truth(false, || e.to_string()),
        }
        let k = rng.random_range(1..=3);
        let ms: Vec<AlgebraElement> =
            (0..k).map(|_| sampling::on_support(ctx, &sampling::subset(&n.support(), rng), rng)).collect();
        match predomain_interpolant(&ms, &n) {
            Ok(l) => {
                let ls = l.star();
                let ok = ms.iter().all(|m| certify(m, &l, &ls).is_some()) && matches!(dominates(&l, &n), Ok(Some(_)));
                pre.truth(ok, || describe(&ms));
            }
            Err(e) => pre.truth(false, || e.to_string()),
        }
        pairs += 1;
    }
    vec![ball, pre]
}

/// Ultrafilters, states, angles and twist points of the reconstruction.
pub fn states_suite(spec: &SemigroupSpec, rng: &mut SampleRng) -> Result<Vec<Check>> {
    let r = Reconstruction::build(spec)?;
    let mut out = ultrafilter_checks(&r, rng);
    out.extend(state_checks(&r, rng));
    out.extend(twist_checks(&r, rng));
    Ok(out)
}

/// The commutant, MASA detection and the normalizer theorems.
pub fn masa_suite(ctx: &Context, rng: &mut SampleRng) -> Result<SuiteResult> {
    let g = ctx.groupoid();
    let d = masa_decision(ctx);
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let mut agree = Check::new("MASA iff effective", 0.0);
    agree.truth(d.commutant_is_diagonal == d.effective, || "commutant and isotropy disagree".into());
    agree.truth(d.commutant_dimension == d.isotropy_count, || {
        format!("dim C(B) = {} but {} isotropy elements", d.commutant_dimension, d.isotropy_count)
    });
    checks.push(agree);
    let masa = is_masa(ctx)?;
    if masa {
        notes.push("MASA".into());
        if let Some(c) = masa_implies_normalisers(ctx, rng)? {
            checks.push(c);
        }
    } else {
        match normalisers_imply_masa_contrapositive(ctx)? {
            Some(w) => {
                notes.push(format!("not MASA, witness δ_{}", g.name(w.k)));
                notes.push(format!("E(c^j) = 0 for j < {}", w.order));
                checks.push(w.checks);
            }
            None => {
                let mut c = Check::new("non-MASA witness", 0.0);
                c.truth(false, || "no witness found".into());
                checks.push(c);
            }
        }
    }
    let crit = cartan_criterion(ctx, rng);
    let mut cc = Check::new("Cartan criterion matches MASA", 0.0);
    cc.truth(crit.faithful(), || format!("E not faithful (margin {:e})", crit.faithfulness_margin));
    cc.truth(crit.holds() == masa, || format!("criterion {} but MASA {}", crit.holds(), masa));
    cc.cases += crit.restriction.cases;
    if let Some(n) = &crit.counterexample {
        notes.push(format!("E(n) does not restrict n for normalizer n on {}", describe(std::slice::from_ref(n))));
    }
    checks.push(cc);
    Ok(SuiteResult::new(checks, notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn suite_names() {
        assert_eq!(Suite::parse_selection("all").unwrap().len(), 4);
        assert_eq!(Suite::parse_selection("masa").unwrap(), vec![Suite::Masa]);
        assert!(Suite::parse_selection("bogus").is_err());
    }

    #[test]
    fn every_suite_passes_on_small_fixtures() {
        for name in ["R2", "Z4", "V4_pauli"] {
            let ctx = fixtures::by_name(name).unwrap();
            let rep = run_suites(&SemigroupSpec::monomial(&ctx), &Suite::ALL, &RunConfig::default()).unwrap();
            for (suite, r) in &rep.suites {
                for c in &r.checks {
                    assert!(c.passed, "{name}/{suite}: {}", c.line());
                }
            }
            assert!(rep.passed);
        }
    }

    #[test]
    fn masa_notes_on_z4() {
        let rep =
            run_suites(&SemigroupSpec::monomial(&fixtures::cyclic(4)), &[Suite::Masa], &RunConfig::default()).unwrap();
        assert!(rep.passed);
        assert!(rep.suites["masa"].notes.iter().any(|n| n == "not MASA, witness δ_1"));
    }
}
