use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::{CurrentProfile, ProfileError};
use crate::model::VoltageTrace;

/// Part of a pulse response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Samples right after the current switches on or off.
    Instantaneous,
    /// The remainder of the excitation.
    Excitation,
    /// The remainder of the rest.
    Rest,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Instantaneous, Regime::Excitation, Regime::Rest];

    pub fn short(&self) -> &'static str {
        match self {
            Regime::Instantaneous => "I",
            Regime::Excitation => "E",
            Regime::Rest => "R",
        }
    }
}

/// Sample indices (0-based) splitting one pulse response.
///
/// `n1` ends the instantaneous window after the excitation edge, `n2` is the
/// last excitation sample, `n3` ends the instantaneous window after the
/// release and `n` is the last sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPoints {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub n: usize,
}

impl CutPoints {
    /// Index ranges of a regime; the instantaneous regime has two parts.
    pub fn ranges(&self, regime: Regime) -> Vec<RangeInclusive<usize>> {
        match regime {
            Regime::Instantaneous => vec![0..=self.n1, self.n2..=self.n3],
            Regime::Excitation => vec![self.n1..=self.n2],
            Regime::Rest => vec![self.n3..=self.n],
        }
    }

    /// Last sample a regime needs.
    pub fn last_index(&self, regime: Regime) -> usize {
        match regime {
            Regime::Instantaneous => self.n3,
            Regime::Excitation => self.n2,
            Regime::Rest => self.n,
        }
    }
}

/// A pulse profile, its measured response and the cut points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedTrace {
    pub profile: CurrentProfile,
    pub trace: VoltageTrace,
    pub cuts: CutPoints,
}

/// One segment of a pulse set, numbered 1.. in regime-major order: the
/// instantaneous segments of every pulse first, then excitation, then rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegmentId(pub usize);

impl SegmentId {
    pub fn new(pulse: usize, regime: Regime, pulses: usize) -> Self {
        let r = match regime {
            Regime::Instantaneous => 0,
            Regime::Excitation => 1,
            Regime::Rest => 2,
        };
        SegmentId(r * pulses + pulse + 1)
    }

    pub fn pulse(&self, pulses: usize) -> usize {
        (self.0 - 1) % pulses
    }

    pub fn regime(&self, pulses: usize) -> Regime {
        Regime::ALL[(self.0 - 1) / pulses]
    }
}

impl std::fmt::Display for SegmentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "zeta{}", self.0)
    }
}

/// The segmented responses of every pulse in a test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSet {
    pub pulses: Vec<SegmentedTrace>,
}

impl PulseSet {
    pub fn segment_count(&self) -> usize {
        3 * self.pulses.len()
    }

    pub fn segments(&self) -> impl Iterator<Item = SegmentId> {
        (1..=self.segment_count()).map(SegmentId)
    }

    /// Segments of a regime, in pulse order.
    pub fn segments_of(&self, regime: Regime) -> Vec<SegmentId> {
        let p = self.pulses.len();
        (0..p).map(|k| SegmentId::new(k, regime, p)).collect()
    }
}

/// Locates the excitation and release edges of a single-pulse profile.
pub fn segment_trace(
    profile: &CurrentProfile,
    trace: &VoltageTrace,
    inst_window: f64,
) -> Result<SegmentedTrace, ProfileError> {
    if trace.len() != profile.len() || trace.current.len() != profile.len() {
        return Err(ProfileError::Alignment(format!(
            "profile has {} samples, trace {}",
            profile.len(),
            trace.len()
        )));
    }
    let cuts = find_cuts(profile, inst_window)?;
    Ok(SegmentedTrace {
        profile: profile.clone(),
        trace: trace.clone(),
        cuts,
    })
}

pub(crate) fn find_cuts(profile: &CurrentProfile, inst_window: f64) -> Result<CutPoints, ProfileError> {
    let s = &profile.samples;
    let mut edges = Vec::new();
    for k in 1..s.len() {
        if s[k] != s[k - 1] {
            edges.push(k);
        }
    }
    if s.first().is_some_and(|&v| v != 0.0) {
        return Err(ProfileError::Shape("profile must start at rest".into()));
    }
    match edges.as_slice() {
        [on, off] if s[*off] == 0.0 => {
            let w = (inst_window / profile.dt).round() as usize;
            let cuts = CutPoints {
                n1: on - 1 + w,
                n2: off - 1,
                n3: off - 1 + w,
                n: s.len() - 1,
            };
            if !(0 < cuts.n1 && cuts.n1 < cuts.n2 && cuts.n2 < cuts.n3 && cuts.n3 < cuts.n) {
                return Err(ProfileError::Shape(format!(
                    "segments collapse with a {inst_window} s window: {cuts:?}"
                )));
            }
            Ok(cuts)
        }
        [] => Err(ProfileError::Shape("no current step found".into())),
        e => Err(ProfileError::Shape(format!(
            "expected one excitation and one release edge, found {} edges",
            e.len()
        ))),
    }
}
