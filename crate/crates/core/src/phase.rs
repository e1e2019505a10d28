//! Unit-modulus scalars stored exactly as rational numbers of turns.

use std::fmt;
use std::ops::{Mul, MulAssign};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// `e^{2πi·p/q}` with `0 ≤ p/q < 1` kept in lowest terms.
///
/// Multiplication adds turns modulo one and conjugation negates them, so
/// every product of phases is exact.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase(Ratio<i64>);

impl Phase {
    pub const ONE: Phase = Phase(Ratio::new_raw(0, 1));

    /// Phase of `p/q` turns, reduced modulo one.
    ///
    /// Panics if `q == 0`.
    pub fn from_turns(p: i64, q: i64) -> Self {
        Phase::wrap(Ratio::new(p, q))
    }

    fn wrap(r: Ratio<i64>) -> Self {
        let frac = r - r.floor();
        Phase(frac)
    }

    /// A primitive-root style constructor: `e^{2πi·k/n}`.
    pub fn root_of_unity(k: i64, n: i64) -> Self {
        Phase::from_turns(k, n)
    }

    /// `-1`.
    pub fn minus_one() -> Self {
        Phase::from_turns(1, 2)
    }

    /// `i`.
    pub fn i() -> Self {
        Phase::from_turns(1, 4)
    }

    pub fn turns(&self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_zero()
    }

    pub fn conj(&self) -> Self {
        Phase::wrap(-self.0)
    }

    pub fn pow(&self, k: i64) -> Self {
        Phase::wrap(self.0 * Ratio::from_integer(k))
    }

    /// One `k`-th root: `p/q` turns ↦ `p/(qk)` turns.
    pub fn root(&self, k: i64) -> Self {
        Phase::wrap(self.0 / Ratio::from_integer(k))
    }

    /// Float view `cos 2πθ + i sin 2πθ`, exact on quarter turns.
    pub fn to_complex(&self) -> Complex64 {
        let (p, q) = (self.numer(), self.denom());
        if 4 % q == 0 {
            match (p * (4 / q)).rem_euclid(4) {
                0 => return Complex64::new(1.0, 0.0),
                1 => return Complex64::new(0.0, 1.0),
                2 => return Complex64::new(-1.0, 0.0),
                _ => return Complex64::new(0.0, -1.0),
            }
        }
        let theta = 2.0 * std::f64::consts::PI * (p as f64) / (q as f64);
        Complex64::new(theta.cos(), theta.sin())
    }

    /// Nearest phase with denominator at most `max_denom`, provided it lies
    /// within `tol` of `z / |z|`.
    pub fn approximate(z: Complex64, max_denom: i64, tol: f64) -> Option<Self> {
        if z.norm() == 0.0 {
            return None;
        }
        let unit = z / z.norm();
        let turns = unit.arg() / (2.0 * std::f64::consts::PI);
        for q in 1..=max_denom {
            let p = (turns * q as f64).round() as i64;
            let candidate = Phase::from_turns(p, q);
            if (candidate.to_complex() - unit).norm() <= tol {
                return Some(candidate);
            }
        }
        None
    }

    /// Least common multiple of the denominators of `phases`.
    pub fn common_denominator<'a>(phases: impl IntoIterator<Item = &'a Phase>) -> i64 {
        phases.into_iter().fold(1, |acc, p| acc.lcm(&p.denom()))
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::ONE
    }
}

impl One for Phase {
    fn one() -> Self {
        Phase::ONE
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase::wrap(self.0 + rhs.0)
    }
}

impl MulAssign for Phase {
    fn mul_assign(&mut self, rhs: Phase) {
        *self = *self * rhs;
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phase({}/{})", self.numer(), self.denom())
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e^(2πi·{}/{})", self.numer(), self.denom())
    }
}

/// On-disk form: `{"turns": [p, q]}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRepr {
    pub turns: [i64; 2],
}

impl From<Phase> for PhaseRepr {
    fn from(p: Phase) -> Self {
        PhaseRepr { turns: [p.numer(), p.denom()] }
    }
}

impl TryFrom<PhaseRepr> for Phase {
    type Error = String;
    fn try_from(r: PhaseRepr) -> Result<Self, Self::Error> {
        if r.turns[1] == 0 {
            return Err("phase with zero denominator".into());
        }
        Ok(Phase::from_turns(r.turns[0], r.turns[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(Phase::i().to_complex(), Complex64::new(0.0, 1.0));
        assert_eq!(Phase::minus_one().to_complex(), Complex64::new(-1.0, 0.0));
        assert_eq!((Phase::i() * Phase::i()), Phase::minus_one());
        assert!((Phase::i().pow(4)).is_one());
    }

    #[test]
    fn reduction_and_wrapping() {
        assert_eq!(Phase::from_turns(5, 4), Phase::from_turns(1, 4));
        assert_eq!(Phase::from_turns(-1, 4), Phase::from_turns(3, 4));
        assert_eq!(Phase::from_turns(2, 4).denom(), 2);
    }

    #[test]
    fn approximate_recovers_small_denominators() {
        let z = Phase::from_turns(2, 3).to_complex() * 3.5;
        assert_eq!(Phase::approximate(z, 100, 1e-9), Some(Phase::from_turns(2, 3)));
        assert_eq!(Phase::approximate(Complex64::new(0.0, 0.0), 10, 1e-9), None);
    }

    #[test]
    fn roots() {
        let p = Phase::from_turns(1, 3);
        assert_eq!(p.root(4).pow(4), p);
    }

    proptest! {
        #[test]
        fn mul_is_a_group(a in -50i64..50, b in 1i64..13, c in -50i64..50, d in 1i64..13) {
            let x = Phase::from_turns(a, b);
            let y = Phase::from_turns(c, d);
            prop_assert_eq!(x * y, y * x);
            prop_assert!((x * x.conj()).is_one());
            let float = x.to_complex() * y.to_complex();
            prop_assert!((float - (x * y).to_complex()).norm() < 1e-12);
            prop_assert!((x.to_complex().norm() - 1.0).abs() < 1e-12);
        }
    }
}
