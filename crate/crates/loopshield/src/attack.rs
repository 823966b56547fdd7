//! Forward-channel man-in-the-middle models: a gain or an LTI filter that
//! activates at a configured onset time.

use crate::error::{Error, Result};
use crate::lti::{LtiSimState, TransferFunction};

/// What the attacker does to the control signal once active.
#[derive(Debug, Clone, PartialEq)]
pub enum AttackKind {
    /// Identity channel; the loop runs unmodified.
    None,
    /// u' = g * u.
    Gain(f64),
    /// u' = filter output of u; the filter state starts from zero at onset,
    /// pre-onset samples never enter it.
    Lti(TransferFunction),
}

/// Attack kind plus activation time in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackModel {
    pub kind: AttackKind,
    pub onset: f64,
}

impl AttackModel {
    pub fn none() -> Self {
        Self {
            kind: AttackKind::None,
            onset: 0.0,
        }
    }

    pub fn gain(g: f64, onset: f64) -> Self {
        Self {
            kind: AttackKind::Gain(g),
            onset,
        }
    }

    pub fn lti(m: TransferFunction, onset: f64) -> Self {
        Self {
            kind: AttackKind::Lti(m),
            onset,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self.kind, AttackKind::None)
    }
}

/// Per-run channel state. Onset is snapped to the nearest sample index at
/// construction so activation is exact sample-grid arithmetic.
#[derive(Debug, Clone)]
pub struct AttackChannel {
    kind: AttackKind,
    onset_index: usize,
    filter: Option<LtiSimState>,
}

impl AttackChannel {
    pub fn new(model: &AttackModel, ts: f64) -> Result<Self> {
        if model.onset < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "attack onset must be >= 0, got {}",
                model.onset
            )));
        }
        let filter = match &model.kind {
            AttackKind::Lti(m) => {
                if m.ts() != ts {
                    return Err(Error::SampleTimeMismatch(m.ts(), ts));
                }
                Some(LtiSimState::new(m))
            }
            _ => None,
        };
        Ok(Self {
            kind: model.kind.clone(),
            onset_index: (model.onset / ts).round() as usize,
            filter,
        })
    }

    pub fn onset_index(&self) -> usize {
        self.onset_index
    }

    /// Transform the control signal for sample `k`. Identity before onset;
    /// the filter only starts accumulating input at onset.
    pub fn apply(&mut self, u: f64, k: usize) -> f64 {
        if k < self.onset_index {
            return u;
        }
        match &self.kind {
            AttackKind::None => u,
            AttackKind::Gain(g) => g * u,
            AttackKind::Lti(_) => self.filter.as_mut().expect("lti filter allocated").step(u),
        }
    }
}
