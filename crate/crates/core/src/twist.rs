//! Points of the twist, modelled as `(phase, element)` pairs.
//!
//! A twist point `(t, g)` stands for the class `[n]_U` of any `n` in the
//! ultrafilter at `g` with `n(g)/|n(g)| = t`. Products follow
//! `(t,g)(u,h) = (t·u·σ(g,h), gh)`.

use serde::{Deserialize, Serialize};

use crate::algebra::TwistedGroupoid;
use crate::groupoid::Elem;
use crate::phase::Phase;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwistPoint {
    #[serde(with = "phase_serde")]
    pub phase: Phase,
    pub g: Elem,
}

impl TwistPoint {
    pub fn new(phase: Phase, g: Elem) -> Self {
        TwistPoint { phase, g }
    }

    /// The canonical section `g ↦ (1, g)`.
    pub fn canonical(g: Elem) -> Self {
        TwistPoint { phase: Phase::ONE, g }
    }

    /// Product, defined iff `source(self.g) == range(other.g)`.
    pub fn mul(&self, other: &TwistPoint, ctx: &TwistedGroupoid) -> Option<TwistPoint> {
        let gh = ctx.groupoid().compose(self.g, other.g)?;
        Some(TwistPoint { phase: self.phase * other.phase * ctx.cocycle().get(self.g, other.g), g: gh })
    }

    pub fn inverse(&self, ctx: &TwistedGroupoid) -> TwistPoint {
        let inv = ctx.groupoid().inverse(self.g);
        TwistPoint { phase: (self.phase * ctx.cocycle().get(self.g, inv)).conj(), g: inv }
    }

    /// The 𝕋-action `t·[n] = [tn]`.
    pub fn act(&self, t: Phase) -> TwistPoint {
        TwistPoint { phase: t * self.phase, g: self.g }
    }

    /// The quotient map onto the groupoid.
    pub fn q(&self) -> Elem {
        self.g
    }
}

/// Limit of a sequence in the (discrete) twist: the eventual constant value,
/// when the sequence is eventually constant from index `from`.
pub fn discrete_limit(seq: &[TwistPoint], from: usize) -> Option<TwistPoint> {
    let tail = seq.get(from..)?;
    let first = *tail.first()?;
    tail.iter().all(|p| *p == first).then_some(first)
}

mod phase_serde {
    use super::Phase;
    use crate::phase::PhaseRepr;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &Phase, s: S) -> Result<S::Ok, S::Error> {
        PhaseRepr::from(*p).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Phase, D::Error> {
        let r = PhaseRepr::deserialize(d)?;
        Phase::try_from(r).map_err(serde::de::Error::custom)
    }
}
