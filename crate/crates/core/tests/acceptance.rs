//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use cartan::fixtures::{self, standard_fixtures};
use cartan::iso::IsoOutcome;
use cartan::masa::{cartan_criterion, is_masa, masa_implies_normalisers, normalisers_imply_masa_contrapositive};
use cartan::reconstruction::{reconstruct, state_checks, twisted_isomorphism, ultrafilter_checks, Reconstruction};
use cartan::report::{Check, RunConfig};
use cartan::repr::{check_reduced_norm_formula, joint_spectrum};
use cartan::sampling::Streams;
use cartan::semigroup::{check_cartan, csum_closure, off_diagonal_singletons_basis, SemigroupSpec};
use cartan::suites::{ball_checks, expectation_checks, norm_checks, relations_suite, ORACLE_PAIRS};
use cartan::{AlgebraElement, Context, ContextExt};
use nalgebra::DMatrix;
use num_complex::Complex64;

const SEED: u64 = 42;
const TIME_LIMIT: Duration = Duration::from_secs(5);

struct Criterion {
    failures: Vec<String>,
    cases: usize,
}

impl Criterion {
    fn new() -> Self {
        Criterion { failures: Vec::new(), cases: 0 }
    }

    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        self.cases += 1;
        if !ok {
            self.failures.push(what.into());
        }
    }

    /// A named check from a suite, with a minimum case count and, where
    /// given, a pinned threshold.
    fn check(&mut self, fixture: &str, checks: &[Check], name: &str, min_cases: usize, threshold: Option<f64>) {
        match checks.iter().find(|c| c.name == name) {
            None => self.expect(false, format!("{fixture}: missing check `{name}`")),
            Some(c) => {
                let mut c = c.clone();
                c.require_cases(min_cases);
                if let Some(t) = threshold {
                    let pinned = c.threshold;
                    c.truth(pinned <= t, || format!("threshold {pinned} looser than {t}"));
                }
                self.expect(c.passed, format!("{fixture}: {}", c.line()));
            }
        }
    }

    fn report(&self, number: usize, title: &str) -> bool {
        let ok = self.failures.is_empty();
        println!("{} {number}. {title} ({} checks)", if ok { "PASS" } else { "FAIL" }, self.cases);
        for f in &self.failures {
            println!("    {f}");
        }
        ok
    }
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::new();
    for (name, ctx) in standard_fixtures() {
        let start = Instant::now();
        let rep = reconstruct(&SemigroupSpec::monomial(&ctx), &RunConfig::default());
        let elapsed = start.elapsed();
        match rep {
            Ok(r) => {
                c.expect(r.isomorphism.outcome == "isomorphic", format!("{name}: {}", r.isomorphism.outcome));
                c.expect(r.cocycle_residual < 1e-9, format!("{name}: cocycle residual {:e}", r.cocycle_residual));
                c.expect(r.passed, format!("{name}: report did not pass"));
            }
            Err(e) => c.expect(false, format!("{name}: {e}")),
        }
        c.expect(elapsed < TIME_LIMIT, format!("{name}: took {elapsed:?}"));
    }
    c
}

/// Characters of a commutative algebra that separate points and are
/// multiplicative *-characters; their number is the dimension.
fn spectrum_size(ctx: &Context, c: &mut Criterion) -> usize {
    let chars = joint_spectrum(ctx, &mut Streams::new(SEED).rng("spectrum")).unwrap_or_default();
    let g = ctx.groupoid();
    for chi in &chars {
        for (a, b) in g.composable_pairs() {
            let ab = &ctx.delta(a) * &ctx.delta(b);
            let lhs: Complex64 = g.elements().map(|e| ab.coeff(e) * chi[e]).sum();
            c.expect((lhs - chi[a] * chi[b]).norm() < 1e-9, "character not multiplicative");
        }
        for e in g.elements() {
            let s = ctx.delta(e).star();
            let lhs: Complex64 = g.elements().map(|k| s.coeff(k) * chi[k]).sum();
            c.expect((lhs - chi[e].conj()).norm() < 1e-9, "character not a *-map");
        }
    }
    let m = DMatrix::from_fn(chars.len(), g.len(), |i, j| chars[i][j]);
    if m.is_empty() {
        0
    } else {
        m.rank(1e-9)
    }
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::new();
    let z4 = fixtures::cyclic(4);
    let v4 = fixtures::klein_four();
    let sz = spectrum_size(&z4, &mut c);
    let sv = spectrum_size(&v4, &mut c);
    c.expect(sz == 4 && sv == 4, format!("spectra of sizes {sz} and {sv}"));
    c.expect(z4.groupoid().units().len() == 1 && v4.groupoid().units().len() == 1, "diagonals not 1-dimensional");
    let cfg = RunConfig::default();
    let a = reconstruct(&SemigroupSpec::monomial(&z4), &cfg).unwrap();
    let b = reconstruct(&SemigroupSpec::monomial(&v4), &cfg).unwrap();
    let out = twisted_isomorphism(&a.context().unwrap(), &b.context().unwrap(), cfg.iso_budget);
    c.expect(out == IsoOutcome::NotIsomorphic, format!("compare gave {out:?}"));
    c
}

fn criterion_3() -> Criterion {
    let mut c = Criterion::new();
    let s = Streams::new(SEED);
    for (name, ctx) in standard_fixtures() {
        let rep = check_cartan(&SemigroupSpec::monomial(&ctx), 20, &mut s.rng(name));
        c.expect(rep.is_cartan(), format!("{name}: {:?}", rep.first_failure()));
        c.expect(rep.is_summable(), format!("{name}: monomial not summable"));
    }
    let r2 = fixtures::full_equivalence(2);
    let spec = SemigroupSpec::basis_restricted(&r2, off_diagonal_singletons_basis(r2.groupoid()).unwrap());
    let rep = check_cartan(&spec, 20, &mut s.rng("remark"));
    c.expect(rep.is_cartan(), format!("basis semigroup: {:?}", rep.first_failure()));
    c.expect(!rep.is_summable(), "basis semigroup is summable");
    let names: Vec<Vec<String>> = rep
        .summable
        .counterexample
        .iter()
        .map(|x| x.support().iter().map(|&e| r2.groupoid().name(e).to_string()).collect())
        .collect();
    c.expect(
        names == vec![vec!["(1,2)".to_string()], vec!["(2,1)".to_string()]],
        format!("summability witness {names:?}"),
    );
    let closure = csum_closure(&spec);
    let mut rng = s.rng("sweep");
    for mask in 0u32..16 {
        let set: Vec<usize> = (0..4).filter(|e| mask & (1 << e) != 0).collect();
        let a = cartan::sampling::on_support(&r2, &set, &mut rng);
        c.expect(closure.membership(&a) == a.is_monomial(), format!("csum sweep at {set:?}"));
    }
    c
}

fn criterion_4() -> Criterion {
    let mut c = Criterion::new();
    let s = Streams::new(SEED);
    for (name, ctx) in standard_fixtures() {
        let checks = relations_suite(&ctx, &mut s.rng(name));
        c.check(name, &checks, "restriction and domination match their oracles", 2 * ORACLE_PAIRS, Some(0.0));
        for law in [
            "restriction is a partial order",
            "auxiliarity",
            "E-invariance of domination",
            "star-invariance of domination",
            "sum closure of domination",
        ] {
            c.check(name, &checks, law, 100, None);
        }
    }
    c
}

fn criterion_5() -> Criterion {
    let mut c = Criterion::new();
    let s = Streams::new(SEED);
    for (name, ctx) in standard_fixtures() {
        let checks = expectation_checks(&ctx, &mut s.rng(name));
        let sweep = if ctx.groupoid().len() <= 6 { ctx.groupoid().bisections().len() } else { 200 };
        c.check(name, &checks, "E(n) is the largest diagonal restriction of n", sweep, Some(0.0));
        for law in ["normal", "shiftable", "bistable"] {
            c.check(name, &checks, law, 1, Some(1e-10));
        }
    }
    c
}

fn reconstruction(ctx: &Context) -> Reconstruction {
    Reconstruction::build(&SemigroupSpec::monomial(ctx)).unwrap()
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::new();
    let s = Streams::new(SEED);
    for (name, ctx) in standard_fixtures() {
        let checks = state_checks(&reconstruction(&ctx), &mut s.rng(name));
        for law in [
            "range state quotient identity",
            "|mn|_TU = |m|_T |n|_U",
            "|ψ_U(E(m*n))| = |m|_U |n|_U",
            "angle chain rule",
            "angle product rule",
        ] {
            c.check(name, &checks, law, 100, Some(1e-12));
        }
        c.check(name, &checks, "angle formula vs direct phase", 100, Some(1e-9));
    }
    c
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::new();
    let s = Streams::new(SEED);
    for (name, ctx) in standard_fixtures() {
        let n = ctx.groupoid().len();
        let checks = ultrafilter_checks(&reconstruction(&ctx), &mut s.rng(name));
        c.check(name, &checks, "product defined iff 0 not in TU", 2 * n * n, Some(0.0));
        let patterns = ctx.groupoid().bisections().len();
        c.check(name, &checks, "U_mn = U_m U_n", patterns * patterns, Some(0.0));
        c.check(name, &checks, "U_E(n) = U_n ∩ G0", patterns, Some(0.0));
        c.check(name, &checks, "U_n ⊆ G0 iff n ∈ B", patterns, Some(0.0));
        c.check(name, &checks, "filter axioms", n, Some(0.0));
        c.check(name, &checks, "h(U) = B minus U is a bijection onto character kernels", 1, Some(0.0));
    }
    c
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::new();
    let s = Streams::new(SEED);
    for (name, ctx) in standard_fixtures() {
        let checks = norm_checks(&ctx, &mut s.rng(name));
        c.check(name, &checks, "norm of each delta is 1", ctx.groupoid().len(), Some(1e-12));
        c.check(name, &checks, "C*-identity", 100, Some(1e-9));
    }
    let r3 = fixtures::full_equivalence(3);
    let mut rng = s.rng("reduced-norm");
    let a: AlgebraElement = cartan::sampling::element(&r3, &mut rng);
    let rep = check_reduced_norm_formula(&a, 500, &mut rng);
    c.expect(rep.upper_violation <= 1e-9, format!("formula exceeds the norm by {:e}", rep.upper_violation));
    c.expect(rep.monte_carlo_gap <= 0.05, format!("Monte-Carlo gap {:.3}", rep.monte_carlo_gap));
    c
}

fn criterion_9() -> Criterion {
    let mut c = Criterion::new();
    let s = Streams::new(SEED);
    for (name, ctx) in standard_fixtures() {
        let effective = ctx.groupoid().is_effective();
        let masa = match is_masa(&ctx) {
            Ok(m) => m,
            Err(e) => {
                c.expect(false, format!("{name}: {e}"));
                continue;
            }
        };
        c.expect(masa == effective, format!("{name}: MASA {masa}, effective {effective}"));
        let mut rng = s.rng(name);
        match masa_implies_normalisers(&ctx, &mut rng).unwrap() {
            Some(chk) => c.expect(chk.passed, format!("{name}: {}", chk.line())),
            None => c.expect(!masa, format!("{name}: normalizer sweep skipped on a MASA")),
        }
        match normalisers_imply_masa_contrapositive(&ctx).unwrap() {
            Some(w) => c.expect(
                !masa && w.checks.passed && w.c.diagonal().is_zero() && !w.c.is_zero(),
                format!("{name}: {}", w.checks.line()),
            ),
            None => c.expect(masa, format!("{name}: no witness on a non-effective groupoid")),
        }
        let crit = cartan_criterion(&ctx, &mut rng);
        c.expect(crit.holds() == masa, format!("{name}: criterion {} vs MASA {masa}", crit.holds()));
    }
    c
}

fn criterion_10() -> Criterion {
    let mut c = Criterion::new();
    let s = Streams::new(SEED);
    for (name, ctx) in standard_fixtures() {
        let checks = ball_checks(&ctx, &mut s.rng(name));
        c.check(name, &checks, "ball witness certificates", 100, Some(1e-9));
        c.check(name, &checks, "predomain interpolant certificates", 100, None);
    }
    c
}

#[test]
fn acceptance() {
    let results = [
        criterion_1().report(1, "round-trip reconstruction"),
        criterion_2().report(2, "distinguishing power"),
        criterion_3().report(3, "Cartan axiom suite"),
        criterion_4().report(4, "relation oracles"),
        criterion_5().report(5, "expectation characterization"),
        criterion_6().report(6, "states and angles"),
        criterion_7().report(7, "ultrafilter groupoid laws"),
        criterion_8().report(8, "norms"),
        criterion_9().report(9, "MASA theorems"),
        criterion_10().report(10, "ball-witness and predomain certificates"),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, &ok)| !ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
