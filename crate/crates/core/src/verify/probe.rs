use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gridfn::{CorpusMember, Family, FamilySpec, GridSpec};

use super::eval::{evaluate_check, ratio, EvalInput};
use super::registry::find;

pub const OPEN_QUESTION_LABEL: &str = "OPEN QUESTION: no asserted direction";
const MAX_PROBE_POINTS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeQuestion {
    #[serde(rename = "embed32_n2_p1")]
    Embed32PlaneL1,
    #[serde(rename = "obertype_n2")]
    ObertypePlane,
}

impl ProbeQuestion {
    pub const ALL: [ProbeQuestion; 2] = [ProbeQuestion::Embed32PlaneL1, ProbeQuestion::ObertypePlane];

    pub fn id(self) -> &'static str {
        match self {
            ProbeQuestion::Embed32PlaneL1 => "embed32_n2_p1",
            ProbeQuestion::ObertypePlane => "obertype_n2",
        }
    }
}

impl FromStr for ProbeQuestion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProbeQuestion::ALL
            .into_iter()
            .find(|q| q.id() == s)
            .ok_or_else(|| Error::UnknownEntry(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub family: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeLevel {
    pub level: usize,
    pub grid: GridSpec,
    /// Multiplier applied to the trigonometric frequencies; the indicator
    /// smoothing widths are divided by it.
    pub sharpness: f64,
    pub samples: Vec<ProbeSample>,
    pub max_ratio: f64,
    /// Running maximum of `max_ratio` over levels up to this one.
    pub running_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub question: ProbeQuestion,
    pub label: String,
    pub title: String,
    pub depth: usize,
    pub levels: Vec<ProbeLevel>,
    /// `max_ratio` is nondecreasing over the levels.
    pub monotone: bool,
    /// Last level's max ratio over the first level's.
    pub growth: f64,
    pub diagnostic: String,
}

fn probe_grid(level: usize) -> Result<GridSpec> {
    let pts = (64usize << (level - 1).min(8)).min(MAX_PROBE_POINTS);
    GridSpec::cube(2, 4.0, pts)
}

/// Fixed adversarial families at a given sharpness on the `[-4, 4]²` box.
fn level_families(sharpness: f64) -> Vec<FamilySpec> {
    let fam = |family| FamilySpec { family, seed: None };
    let mut out = vec![
        fam(Family::Gaussian {
            amplitude: 1.0,
            center: vec![0.0, 0.0],
            width: 1.2,
        }),
        fam(Family::Gaussian {
            amplitude: 1.0,
            center: vec![0.2, -0.1],
            width: 1.4,
        }),
    ];
    for (i, (fx, fy)) in [(0.3, 0.0), (0.2, 0.2), (0.0, 0.35)].into_iter().enumerate() {
        out.push(fam(Family::WindowedTrig {
            amplitude: 1.0,
            center: vec![0.0, 0.0],
            radii: vec![3.0, 3.0],
            frequency: vec![fx * sharpness, fy * sharpness],
            phase: 0.4 * i as f64,
        }));
    }
    for (radius, eps) in [(1.2, 1.2), (1.6, 0.9)] {
        out.push(fam(Family::MollifiedIndicator {
            amplitude: 1.0,
            center: vec![0.0, 0.0],
            radius,
            smoothing: eps / sharpness,
        }));
    }
    out
}

/// Ratio sequence of an open-question entry over `depth` escalation levels.
/// Level 1 uses smooth functions; each further level doubles frequencies and
/// halves mollification widths, and refines the grid up to 256 points/axis.
pub fn probe(question: ProbeQuestion, depth: usize) -> Result<ProbeReport> {
    if depth == 0 {
        return Err(invalid("probe depth must be at least 1"));
    }
    let spec = find(question.id()).ok_or_else(|| Error::UnknownEntry(question.id().into()))?;
    let inst = &spec.instances[0];
    let mut levels: Vec<ProbeLevel> = Vec::new();
    let mut running = 0.0f64;
    for level in 1..=depth {
        let grid = probe_grid(level)?;
        let sharpness = 2f64.powi(level as i32 - 1);
        let samples = level_families(sharpness)
            .par_iter()
            .map(|fam| -> Result<ProbeSample> {
                let m = CorpusMember::build(fam, &grid)?;
                let ctx = EvalInput {
                    f: &m.f,
                    derivatives: &m.derivatives,
                };
                let (lhs, rhs) = evaluate_check(&inst.check, &ctx)?;
                Ok(ProbeSample {
                    family: fam.family.id().name().to_string(),
                    lhs,
                    rhs,
                    ratio: ratio(lhs, rhs),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let max_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
        running = running.max(max_ratio);
        levels.push(ProbeLevel {
            level,
            grid,
            sharpness,
            samples,
            max_ratio,
            running_max: running,
        });
    }
    let monotone = levels.windows(2).all(|w| w[1].max_ratio >= w[0].max_ratio);
    let growth = ratio(levels.last().unwrap().max_ratio, levels[0].max_ratio);
    let diagnostic = if levels.len() == 1 {
        "single level: no escalation trend".to_string()
    } else if monotone {
        format!("max ratio nondecreasing across levels (last/first = {growth:.4})")
    } else {
        format!("max ratio not monotone across levels (last/first = {growth:.4}); see running_max")
    };
    Ok(ProbeReport {
        question,
        label: OPEN_QUESTION_LABEL.to_string(),
        title: spec.title.clone(),
        depth,
        levels,
        monotone,
        growth,
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_roundtrip() {
        for q in ProbeQuestion::ALL {
            assert_eq!(q.id().parse::<ProbeQuestion>().unwrap(), q);
            assert_eq!(serde_json::to_value(q).unwrap(), q.id());
        }
        assert!("embed32".parse::<ProbeQuestion>().is_err());
    }

    #[test]
    fn zero_depth_is_rejected() {
        assert!(probe(ProbeQuestion::ObertypePlane, 0).is_err());
    }

    #[test]
    fn grid_escalation_is_capped() {
        let pts: Vec<usize> = (1..=5).map(|l| probe_grid(l).unwrap().points()[0]).collect();
        assert_eq!(pts, [64, 128, 256, 256, 256]);
    }

    #[test]
    fn running_max_bookkeeping() {
        let r = probe(ProbeQuestion::ObertypePlane, 2).unwrap();
        assert_eq!(r.label, OPEN_QUESTION_LABEL);
        assert_eq!(r.levels.len(), 2);
        assert_eq!(r.levels[1].running_max, r.levels[0].max_ratio.max(r.levels[1].max_ratio));
        assert_eq!(r.monotone, r.levels[1].max_ratio >= r.levels[0].max_ratio);
    }
}
