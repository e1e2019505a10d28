//! The regular representation, the C*-norm, and spectral checks.
//!
//! For each unit `u` the block `π_u(a)` acts on `ℓ²(s⁻¹(u))` by
//! `π_u(a)ξ_h = Σ_{s(g)=r(h)} σ(g,h) a(g) ξ_{gh}`. The direct sum of the
//! blocks is faithful, so its operator norm is the (reduced = full) norm.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{AlgebraElement, Context, ContextExt};
use crate::groupoid::Elem;
use crate::sampling::{self, SampleRng};

#[derive(Clone, Debug)]
pub struct Block {
    pub unit: Elem,
    /// Basis `{ξ_h : s(h) = unit}` in element order.
    pub basis: Vec<Elem>,
    pub matrix: DMatrix<Complex64>,
}

/// Per-unit operator blocks of `π(a)`.
#[derive(Clone, Debug)]
pub struct MatrixImage {
    pub blocks: Vec<Block>,
}

impl MatrixImage {
    pub fn block(&self, unit: Elem) -> Option<&Block> {
        self.blocks.iter().find(|b| b.unit == unit)
    }

    /// Largest singular value over all blocks.
    pub fn operator_norm(&self) -> f64 {
        self.blocks.iter().map(|b| spectral_norm(&b.matrix)).fold(0.0, f64::max)
    }

    /// Largest entrywise difference between two images of the same context.
    pub fn distance(&self, other: &MatrixImage) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (&a.matrix - &b.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn regular_representation(a: &AlgebraElement) -> MatrixImage {
    let ctx = a.ctx();
    let g = ctx.groupoid();
    let blocks = g
        .units()
        .iter()
        .map(|&u| {
            let basis: Vec<Elem> = g.elements().filter(|&h| g.source(h) == u).collect();
            let pos = |e: Elem| basis.iter().position(|&b| b == e).unwrap();
            let d = basis.len();
            let mut matrix = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
            for (col, &h) in basis.iter().enumerate() {
                for x in g.elements() {
                    let ax = a.coeff(x);
                    if ax == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    if let Some(xh) = g.compose(x, h) {
                        matrix[(pos(xh), col)] += ctx.sigma(x, h) * ax;
                    }
                }
            }
            Block { unit: u, basis, matrix }
        })
        .collect();
    MatrixImage { blocks }
}

/// Operator norm of the regular representation.
pub fn cstar_norm(a: &AlgebraElement) -> f64 {
    regular_representation(a).operator_norm()
}

/// Outcome of comparing the supremum formula
/// `sup{‖D(c*a*ac)‖∞^{1/2} : ‖D(c*c)‖∞ ≤ 1}` with the operator norm.
#[derive(Clone, Debug)]
pub struct ReducedNormReport {
    pub operator_norm: f64,
    /// Best value over random `c`.
    pub monte_carlo_sup: f64,
    /// Best value over sums of monomials in one source fiber, refined by
    /// power iteration carried out with convolution.
    pub structured_sup: f64,
    /// `max(0, sup − ‖a‖)` over every trial; should be ~0.
    pub upper_violation: f64,
    /// `(‖a‖ − monte_carlo_sup)/‖a‖` (0 when `a = 0`).
    pub monte_carlo_gap: f64,
    /// `(‖a‖ − structured_sup)/‖a‖`.
    pub structured_gap: f64,
    pub trials: usize,
}

fn formula_value(a: &AlgebraElement, c: &AlgebraElement) -> Option<f64> {
    let denom = (&c.star() * c).diagonal().sup_norm();
    if denom <= 1e-300 {
        return None;
    }
    let ac = a * c;
    let num = (&ac.star() * &ac).diagonal().sup_norm();
    Some((num / denom).sqrt())
}

pub fn check_reduced_norm_formula(a: &AlgebraElement, trials: usize, rng: &mut SampleRng) -> ReducedNormReport {
    let ctx = a.ctx();
    let g = ctx.groupoid();
    let norm = cstar_norm(a);
    let mut upper_violation: f64 = 0.0;
    let mut mc: f64 = 0.0;
    for _ in 0..trials {
        let c = sampling::element(ctx, rng);
        if let Some(v) = formula_value(a, &c) {
            mc = mc.max(v);
            upper_violation = upper_violation.max(v - norm);
        }
    }

    let mut structured: f64 = 0.0;
    let a_star_a = &a.star() * a;
    for &u in g.units() {
        let fiber: Vec<Elem> = g.elements().filter(|&h| g.source(h) == u).collect();
        for &h in &fiber {
            if let Some(v) = formula_value(a, &ctx.delta(h)) {
                structured = structured.max(v);
            }
        }
        let mut c = sampling::on_support(ctx, &fiber, rng);
        for _ in 0..200 {
            if let Some(v) = formula_value(a, &c) {
                structured = structured.max(v);
                upper_violation = upper_violation.max(v - norm);
            }
            let next = &a_star_a * &c;
            let scale = next.sup_norm();
            if scale <= 1e-300 {
                break;
            }
            c = next.scale(Complex64::new(1.0 / scale, 0.0));
        }
    }
    let gap = |s: f64| if norm > 0.0 { (norm - s) / norm } else { 0.0 };
    ReducedNormReport {
        operator_norm: norm,
        monte_carlo_sup: mc,
        structured_sup: structured,
        upper_violation,
        monte_carlo_gap: gap(mc),
        structured_gap: gap(structured),
        trials,
    }
}

/// Characters of a commutative algebra, found by simultaneously
/// diagonalizing the regular representation. `None` if not commutative.
///
/// Each character is returned as its values on the `δ_g`.
pub fn joint_spectrum(ctx: &Context, rng: &mut SampleRng) -> Option<Vec<Vec<Complex64>>> {
    let g = ctx.groupoid();
    let deltas: Vec<AlgebraElement> = g.elements().map(|e| ctx.delta(e)).collect();
    let tol = ctx.zero_tol();
    for a in &deltas {
        for b in &deltas {
            if !(a * b).approx_eq(&(b * a), tol) {
                return None;
            }
        }
    }
    let images: Vec<MatrixImage> = deltas.iter().map(regular_representation).collect();
    let mut chars: Vec<Vec<Complex64>> = Vec::new();
    for (bi, block) in images[0].blocks.iter().enumerate() {
        let d = block.basis.len();
        let mut h = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for img in &images {
            let x = &img.blocks[bi].matrix;
            let re = sampling::complex(rng).re;
            let im = sampling::complex(rng).re;
            h += (x + x.adjoint()) * Complex64::new(re, 0.0);
            h += (x - x.adjoint()) * Complex64::new(0.0, im);
        }
        let eig = h.symmetric_eigen();
        for k in 0..d {
            let v = eig.eigenvectors.column(k);
            let values: Vec<Complex64> =
                images.iter().map(|img| (v.adjoint() * &img.blocks[bi].matrix * v)[(0, 0)]).collect();
            let seen = chars.iter().any(|c| c.iter().zip(&values).all(|(x, y)| (x - y).norm() < 1e-8));
            if !seen {
                chars.push(values);
            }
        }
    }
    Some(chars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sampling::Streams;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_projections() {
        let r2 = fixtures::full_equivalence(2);
        let g = r2.groupoid();
        for &u in g.units() {
            let img = regular_representation(&r2.delta(u));
            for b in &img.blocks {
                for (i, &h) in b.basis.iter().enumerate() {
                    for j in 0..b.basis.len() {
                        let expected = if i == j && g.range(h) == u { 1.0 } else { 0.0 };
                        assert_eq!(b.matrix[(i, j)], c(expected, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn r2_matrix_unit() {
        let r2 = fixtures::full_equivalence(2);
        let g = r2.groupoid();
        let u1 = g.index_of("(1,1)").unwrap();
        let img = regular_representation(&r2.delta_named("(2,1)").unwrap());
        let b = img.block(u1).unwrap();
        let from = b.basis.iter().position(|&h| h == u1).unwrap();
        let to = b.basis.iter().position(|&h| h == g.index_of("(2,1)").unwrap()).unwrap();
        assert_eq!(b.matrix[(to, from)], c(1.0, 0.0));
        assert_eq!(b.matrix.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    /// The twisted ℤ₂×ℤ₂ algebra is `M₂`: four linearly independent
    /// images, each a scalar multiple of a unitary; centre is the scalars.
    #[test]
    fn pauli_image_is_full_matrix_algebra() {
        let v = fixtures::klein_four_pauli();
        let imgs: Vec<DMatrix<Complex64>> =
            v.groupoid().elements().map(|e| regular_representation(&v.delta(e)).blocks[0].matrix.clone()).collect();
        let stacked = DMatrix::from_fn(16, 4, |r, col| imgs[col][(r % 4, r / 4)]);
        assert_eq!(stacked.rank(1e-10), 4);
        // Anticommutation of the generators, as for Pauli X and Z.
        let (x, z) = (&imgs[1], &imgs[2]);
        assert!(((x * z) + (z * x)).norm() < 1e-12);
        // Centre of the image is one-dimensional.
        let sys = DMatrix::from_fn(16 * 16, 4, |r, col| {
            let (k, e) = (r / 16, r % 16);
            let a = &imgs[k % 4];
            let comm = &imgs[col] * a - a * &imgs[col];
            comm[(e % 4, e / 4)]
        });
        assert_eq!(4 - sys.rank(1e-10), 1);
    }

    #[test]
    fn deltas_have_norm_one() {
        for (name, ctx) in fixtures::standard_fixtures() {
            for e in ctx.groupoid().elements() {
                assert!((cstar_norm(&ctx.delta(e)) - 1.0).abs() < 1e-12, "{name}");
            }
        }
    }

    #[test]
    fn permutation_matrix_norm() {
        let r2 = fixtures::full_equivalence(2);
        let a = &r2.delta_named("(1,2)").unwrap() + &r2.delta_named("(2,1)").unwrap();
        assert!((cstar_norm(&a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn representation_is_a_star_homomorphism() {
        let s = Streams::new(7);
        for (name, ctx) in fixtures::standard_fixtures() {
            let mut rng = s.rng(name);
            for _ in 0..20 {
                let a = sampling::element(&ctx, &mut rng);
                let b = sampling::element(&ctx, &mut rng);
                let pa = regular_representation(&a);
                let pb = regular_representation(&b);
                let pab = regular_representation(&(&a * &b));
                let pstar = regular_representation(&a.star());
                for i in 0..pa.blocks.len() {
                    let prod = &pa.blocks[i].matrix * &pb.blocks[i].matrix;
                    assert!((prod - &pab.blocks[i].matrix).norm() < 1e-10, "{name}");
                    assert!((pa.blocks[i].matrix.adjoint() - &pstar.blocks[i].matrix).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn reduced_norm_formula_examples() {
        let s = Streams::new(3);
        let r2 = fixtures::full_equivalence(2);
        let u = r2.delta_named("(1,1)").unwrap();
        let rep = check_reduced_norm_formula(&u, 20, &mut s.rng("u"));
        assert!((rep.structured_sup - 1.0).abs() < 1e-12);
        let rep = check_reduced_norm_formula(&r2.zero(), 20, &mut s.rng("0"));
        assert_eq!(rep.operator_norm, 0.0);
        assert_eq!(rep.monte_carlo_sup, 0.0);
    }

    #[test]
    fn z4_and_v4_spectra() {
        let s = Streams::new(11);
        for name in ["Z4", "V4"] {
            let ctx = fixtures::by_name(name).unwrap();
            let chars = joint_spectrum(&ctx, &mut s.rng(name)).unwrap();
            assert_eq!(chars.len(), 4, "{name}");
        }
        assert!(joint_spectrum(&fixtures::klein_four_pauli(), &mut s.rng("p")).is_none());
    }
}
