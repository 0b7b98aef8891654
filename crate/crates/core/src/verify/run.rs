use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gridfn::{CorpusFile, CorpusMember, CorpusSet, GridSpec};
use crate::norms::lp_norm;

use super::eval::{evaluate_check, ratio, EvalInput};
use super::{registry, InequalitySpec, Instance, Kind, Params};

/// Allowed relative drift of the empirical constant under refinement.
pub const STABILITY_DRIFT: f64 = 0.10;
/// Allowed relative change of `lhs/rhs` under dilation.
pub const DILATION_TOLERANCE: f64 = 0.05;
pub const DEFAULT_CORPUS_SEED: u64 = 20_240_601;
pub const DEFAULT_CORPUS_COUNT: usize = 20;
const DILATION_MEMBERS: usize = 10;

/// Default coarse grid per dimension.
pub fn default_grid(n: usize) -> Result<GridSpec> {
    match n {
        1 => GridSpec::cube(1, 8.0, 512),
        2 => GridSpec::cube(2, 4.0, 64),
        3 => GridSpec::cube(3, 3.0, 32),
        _ => Err(invalid(format!("no default grid for n = {n}"))),
    }
}

/// One set per dimension on the default grids.
pub fn default_corpus(seed: u64, count: usize) -> Result<CorpusFile> {
    let sets = (1..=3)
        .map(|n| CorpusSet::generate(seed.wrapping_add(n as u64), count, default_grid(n)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(CorpusFile::new(sets))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Use only the first `members` functions of each set.
    pub members: Option<usize>,
    /// Also evaluate on the refined grid.
    pub refine: bool,
    /// Run the dilation sweep on entries that carry one.
    pub dilation: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            members: None,
            refine: true,
            dilation: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideValues {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl SideValues {
    fn new(lhs: f64, rhs: f64) -> Self {
        SideValues {
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
        }
    }

    fn finite(&self) -> bool {
        self.lhs.is_finite() && self.rhs.is_finite() && self.ratio.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberResult {
    pub index: usize,
    pub family: String,
    pub coarse: Option<SideValues>,
    pub fine: Option<SideValues>,
    /// `(lhs_fine / lhs_coarse, rhs_fine / rhs_coarse)`.
    pub refinement: Option<(f64, f64)>,
    /// `|∫g| / ‖g‖_1` of the derivative inputs, for mean-zero entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_ratio: Option<f64>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub lambdas: Vec<f64>,
    pub grid: GridSpec,
    /// Per member: `ratio(λ)/ratio(1) - 1` for each λ.
    pub deviations: Vec<Vec<f64>>,
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub n: usize,
    pub params: Params,
    pub coarse_grid: GridSpec,
    pub fine_grid: Option<GridSpec>,
    pub members: Vec<MemberResult>,
    pub max_ratio_coarse: f64,
    pub max_ratio_fine: Option<f64>,
    pub empirical_constant: f64,
    /// `|max_fine / max_coarse - 1|`.
    pub drift: Option<f64>,
    pub stable: Option<bool>,
    pub dilation: Option<DilationReport>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub title: String,
    pub kind: Kind,
    pub constant: Option<f64>,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub instances: Vec<InstanceReport>,
    pub passed: bool,
    /// Wall time; kept out of the serialized report.
    #[serde(skip)]
    pub runtime_ms: u128,
}

impl InequalityReport {
    pub fn instance(&self, n: usize) -> Option<&InstanceReport> {
        self.instances.iter().find(|i| i.n == n)
    }
}

fn mean_ratio(m: &CorpusMember) -> f64 {
    m.derivatives
        .iter()
        .map(|d| {
            let l1 = lp_norm(d, 1.0);
            if l1 == 0.0 {
                0.0
            } else {
                d.integral().norm() / l1
            }
        })
        .fold(0.0, f64::max)
}

fn eval_member(inst: &Instance, m: &CorpusMember) -> std::result::Result<SideValues, String> {
    let ctx = EvalInput {
        f: &m.f,
        derivatives: &m.derivatives,
    };
    evaluate_check(&inst.check, &ctx)
        .map(|(l, r)| SideValues::new(l, r))
        .map_err(|e| e.to_string())
}

fn side_ok(spec: &InequalitySpec, v: &SideValues) -> bool {
    match spec.kind {
        Kind::Assert => {
            let c = spec.constant.unwrap_or(f64::INFINITY);
            v.finite() && v.ratio <= c * (1.0 + spec.tolerance)
        }
        Kind::Report => v.finite(),
        Kind::Probe => true,
    }
}

fn run_member(
    spec: &InequalitySpec,
    inst: &Instance,
    index: usize,
    family: &crate::gridfn::FamilySpec,
    coarse: &GridSpec,
    fine: Option<&GridSpec>,
) -> MemberResult {
    let mut diagnostics = Vec::new();
    let mut mean = None;
    let mut evaluate = |grid: &GridSpec, tag: &str| -> Option<SideValues> {
        match CorpusMember::build(family, grid) {
            Ok(m) => {
                if spec.mean_zero && tag == "coarse" {
                    let r = mean_ratio(&m);
                    if r > 1e-6 {
                        diagnostics.push(format!("derivative input not mean-zero: |mean|/L1 = {r:.3e}"));
                    }
                    mean = Some(r);
                }
                match eval_member(inst, &m) {
                    Ok(v) => {
                        if !v.finite() {
                            diagnostics.push(format!(
                                "{tag}: non-finite value (lhs = {}, rhs = {})",
                                v.lhs, v.rhs
                            ));
                        }
                        Some(v)
                    }
                    Err(e) => {
                        diagnostics.push(format!("{tag}: {e}"));
                        None
                    }
                }
            }
            Err(e) => {
                diagnostics.push(format!("{tag}: {e}"));
                None
            }
        }
    };
    let c = evaluate(coarse, "coarse");
    let f = fine.and_then(|g| evaluate(g, "fine"));
    let mut passed = c.as_ref().is_some_and(|v| side_ok(spec, v));
    if fine.is_some() {
        passed &= f.as_ref().is_some_and(|v| side_ok(spec, v));
    }
    if spec.kind == Kind::Probe {
        passed = true;
    }
    let refinement = match (&c, &f) {
        (Some(a), Some(b)) => Some((ratio(b.lhs, a.lhs), ratio(b.rhs, a.rhs))),
        _ => None,
    };
    MemberResult {
        index,
        family: family.family.id().name().to_string(),
        coarse: c,
        fine: f,
        refinement,
        mean_ratio: mean,
        passed,
        diagnostics,
    }
}

fn max_ratio<'a>(it: impl Iterator<Item = Option<&'a SideValues>>) -> f64 {
    it.flatten().map(|v| v.ratio).fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

fn dilation_sweep(inst: &Instance, set: &CorpusSet, members: usize) -> Result<DilationReport> {
    // Spacing h/2 resolves f(2x) as well as the coarse grid resolves f.
    let grid = set.grid.refined();
    let lambdas = vec![2.0];
    let take = members.min(DILATION_MEMBERS);
    let deviations = set.members[..take]
        .par_iter()
        .map(|fam| -> Result<Vec<f64>> {
            let at = |lambda: f64| -> Result<f64> {
                let m = CorpusMember::build(&fam.dilated(lambda), &grid)?;
                let ctx = EvalInput {
                    f: &m.f,
                    derivatives: &m.derivatives,
                };
                let (l, r) = evaluate_check(&inst.check, &ctx)?;
                Ok(ratio(l, r))
            };
            let base = at(1.0)?;
            lambdas.iter().map(|&l| Ok(at(l)? / base - 1.0)).collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = deviations
        .iter()
        .flatten()
        .map(|d| d.abs())
        .fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    Ok(DilationReport {
        lambdas,
        grid,
        deviations,
        passed: max_deviation <= DILATION_TOLERANCE,
        max_deviation,
    })
}

/// Runs one instance of `spec` on a corpus set at `coarse` and optionally
/// its refinement.
pub fn run_set(spec: &InequalitySpec, inst: &Instance, set: &CorpusSet, opts: &RunOptions) -> Result<InstanceReport> {
    spec.validate(&inst.params)
        .map_err(|e| invalid(format!("{}: parameters outside the validity window: {e}", spec.id)))?;
    if set.dim() != inst.params.n {
        return Err(invalid(format!(
            "{}: corpus dimension {} does not match n = {}",
            spec.id,
            set.dim(),
            inst.params.n
        )));
    }
    let count = opts.members.unwrap_or(set.members.len()).min(set.members.len());
    let coarse = set.grid.clone();
    let fine = opts.refine.then(|| coarse.refined());
    let members: Vec<MemberResult> = set.members[..count]
        .par_iter()
        .enumerate()
        .map(|(i, fam)| run_member(spec, inst, i, fam, &coarse, fine.as_ref()))
        .collect();
    let max_ratio_coarse = max_ratio(members.iter().map(|m| m.coarse.as_ref()));
    let max_ratio_fine = fine
        .as_ref()
        .map(|_| max_ratio(members.iter().map(|m| m.fine.as_ref())));
    let empirical_constant = max_ratio_fine.map_or(max_ratio_coarse, |f| f.max(max_ratio_coarse));
    let drift = max_ratio_fine.map(|f| (ratio(f, max_ratio_coarse) - 1.0).abs());
    let stable = drift.map(|d| d <= STABILITY_DRIFT);
    let dilation = if spec.dilation && opts.dilation {
        Some(dilation_sweep(inst, set, count)?)
    } else {
        None
    };
    let passed = members.iter().all(|m| m.passed);
    Ok(InstanceReport {
        n: inst.params.n,
        params: inst.params.clone(),
        coarse_grid: coarse,
        fine_grid: fine,
        members,
        max_ratio_coarse,
        max_ratio_fine,
        empirical_constant,
        drift,
        stable,
        dilation,
        passed,
    })
}

/// Runs every instance of `spec` whose dimension has a set in `corpus`.
pub fn run(spec: &InequalitySpec, corpus: &CorpusFile, opts: &RunOptions) -> Result<InequalityReport> {
    let start = Instant::now();
    let mut instances = Vec::new();
    for inst in &spec.instances {
        if let Some(set) = corpus.set_for_dim(inst.params.n) {
            instances.push(run_set(spec, inst, set, opts)?);
        }
    }
    if instances.is_empty() {
        return Err(invalid(format!(
            "{}: the corpus has no set for any of the dimensions {:?}",
            spec.id,
            spec.dims()
        )));
    }
    let passed = instances.iter().all(|i| i.passed);
    Ok(InequalityReport {
        id: spec.id.clone(),
        title: spec.title.clone(),
        kind: spec.kind,
        constant: spec.constant,
        tolerance: spec.tolerance,
        label: (spec.kind == Kind::Probe).then(|| super::OPEN_QUESTION_LABEL.to_string()),
        instances,
        passed,
        runtime_ms: start.elapsed().as_millis(),
    })
}

/// Every registry entry with at least one dimension present in `corpus`,
/// sorted by id.
pub fn run_all(corpus: &CorpusFile, opts: &RunOptions) -> Result<Vec<InequalityReport>> {
    let mut out = Vec::new();
    for spec in registry() {
        if spec.dims().iter().any(|&n| corpus.set_for_dim(n).is_some()) {
            out.push(run(&spec, corpus, opts)?);
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::find;

    fn small_corpus() -> CorpusFile {
        let set = CorpusSet::generate(5, 3, GridSpec::cube(1, 8.0, 256).unwrap()).unwrap();
        CorpusFile::new(vec![set])
    }

    fn quick() -> RunOptions {
        RunOptions {
            members: None,
            refine: false,
            dilation: false,
        }
    }

    #[test]
    fn assert_entry_fails_when_constant_is_too_small() {
        let corpus = small_corpus();
        let mut spec = find("hardy").unwrap();
        let ok = run(&spec, &corpus, &quick()).unwrap();
        assert!(ok.passed);
        assert_eq!(ok.instances[0].members.len(), 3);
        spec.constant = Some(0.1);
        let bad = run(&spec, &corpus, &quick()).unwrap();
        assert!(!bad.passed);
        assert_eq!(bad.instances[0].max_ratio_coarse, ok.instances[0].max_ratio_coarse);
    }

    #[test]
    fn refinement_reports_drift() {
        let corpus = small_corpus();
        let spec = find("Ulyanov2").unwrap();
        let r = run(
            &spec,
            &corpus,
            &RunOptions {
                refine: true,
                ..quick()
            },
        )
        .unwrap();
        let inst = &r.instances[0];
        assert_eq!(inst.fine_grid.as_ref().unwrap().points(), &[512]);
        assert!(inst.drift.unwrap() < STABILITY_DRIFT);
        assert_eq!(inst.stable, Some(true));
    }

    #[test]
    fn missing_dimension_is_an_error() {
        assert!(run(&find("sup111").unwrap(), &small_corpus(), &quick()).is_err());
    }

    #[test]
    fn run_all_is_sorted_and_skips_absent_dimensions() {
        let reports = run_all(&small_corpus(), &RunOptions { members: Some(1), ..quick() }).unwrap();
        assert!(reports.windows(2).all(|w| w[0].id < w[1].id));
        assert!(reports.iter().all(|r| r.instances.iter().all(|i| i.n == 1)));
        assert!(reports.iter().any(|r| r.id == "omega1"));
    }
}
