use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::FORMAT_VERSION;

use super::run::InequalityReport;
use super::Kind;

/// Run metadata that may differ between otherwise identical runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub runtime_ms: BTreeMap<String, u128>,
}

/// The `report.json` document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format_version: u32,
    pub metadata: Metadata,
    pub corpus_seed: Option<u64>,
    pub entries: Vec<InequalityReport>,
    /// False iff some assert entry failed.
    pub passed: bool,
}

impl ReportDocument {
    pub fn new(entries: Vec<InequalityReport>, corpus_seed: Option<u64>) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let runtime_ms = entries.iter().map(|e| (e.id.clone(), e.runtime_ms)).collect();
        let passed = entries.iter().all(|e| e.kind != Kind::Assert || e.passed);
        ReportDocument {
            format_version: FORMAT_VERSION,
            metadata: Metadata { timestamp, runtime_ms },
            corpus_seed,
            entries,
            passed,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ReportDocument = serde_json::from_str(text)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported report format_version {}",
                doc.format_version
            )));
        }
        Ok(doc)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// One row per (entry, dimension, member).
pub fn render_csv(doc: &ReportDocument) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "id",
        "kind",
        "n",
        "member",
        "family",
        "lhs_coarse",
        "rhs_coarse",
        "ratio_coarse",
        "lhs_fine",
        "rhs_fine",
        "ratio_fine",
        "passed",
    ])
    .map_err(csv_err)?;
    for e in &doc.entries {
        let kind = serde_json::to_value(e.kind)?.as_str().unwrap_or_default().to_string();
        for inst in &e.instances {
            for m in &inst.members {
                let (c, f) = (m.coarse.as_ref(), m.fine.as_ref());
                w.write_record([
                    e.id.clone(),
                    kind.clone(),
                    inst.n.to_string(),
                    m.index.to_string(),
                    m.family.clone(),
                    opt(c.map(|v| v.lhs)),
                    opt(c.map(|v| v.rhs)),
                    opt(c.map(|v| v.ratio)),
                    opt(f.map(|v| v.lhs)),
                    opt(f.map(|v| v.rhs)),
                    opt(f.map(|v| v.ratio)),
                    m.passed.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvgPlot {
    /// File stem, e.g. `embed32_n3_members`.
    pub name: String,
    pub content: String,
}

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0).max(1e-300) * (W - 2.0 * PAD)
    }
    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0).max(1e-300) * (H - 2.0 * PAD)
    }
}

fn frame(title: &str, xlabel: &str, ax: &Axes) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>
<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="{PAD}" y="{}" text-anchor="end">{:.3}</text>
<text x="{PAD}" y="{}" text-anchor="end">{:.3}</text>
"#,
        W / 2.0,
        escape(title),
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD,
        W / 2.0,
        H - 12.0,
        escape(xlabel),
        H - PAD,
        ax.y0,
        PAD + 4.0,
        ax.y1,
    );
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn y_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = 0.05 * (hi - lo).max(1e-3 * hi.abs().max(1e-12));
    ((lo - pad).max(0.0), hi + pad)
}

/// Ratio-vs-member and ratio-vs-resolution plots for every entry instance.
pub fn render_svg(doc: &ReportDocument) -> Vec<SvgPlot> {
    let mut out = Vec::new();
    for e in &doc.entries {
        for inst in &e.instances {
            let coarse: Vec<f64> = inst.members.iter().map(|m| m.coarse.as_ref().map_or(f64::NAN, |v| v.ratio)).collect();
            let fine: Vec<f64> = inst.members.iter().map(|m| m.fine.as_ref().map_or(f64::NAN, |v| v.ratio)).collect();
            let (y0, y1) = y_range(coarse.iter().chain(&fine).cloned());
            let ax = Axes {
                x0: -0.5,
                x1: inst.members.len() as f64 - 0.5,
                y0,
                y1,
            };
            let mut s = frame(&format!("{} (n = {}): lhs/rhs per member", e.id, inst.n), "member", &ax);
            for (i, v) in coarse.iter().enumerate().filter(|(_, v)| v.is_finite()) {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#, ax.px(i as f64), ax.py(*v));
            }
            for (i, v) in fine.iter().enumerate().filter(|(_, v)| v.is_finite()) {
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="6" height="6" fill="none" stroke="darkred"/>"#,
                    ax.px(i as f64) - 3.0,
                    ax.py(*v) - 3.0
                );
            }
            let _ = writeln!(s, r#"<text x="{}" y="36" text-anchor="end">circles: coarse grid, squares: refined grid</text>"#, W - PAD);
            s.push_str("</svg>\n");
            out.push(SvgPlot {
                name: format!("{}_n{}_members", e.id, inst.n),
                content: s,
            });

            if let Some(fine_max) = inst.max_ratio_fine {
                let pts = [
                    (inst.coarse_grid.points()[0] as f64, inst.max_ratio_coarse),
                    (inst.fine_grid.as_ref().map_or(0.0, |g| g.points()[0] as f64), fine_max),
                ];
                let (y0, y1) = y_range(pts.iter().map(|p| p.1));
                let ax = Axes {
                    x0: pts[0].0 * 0.8,
                    x1: pts[1].0 * 1.1,
                    y0,
                    y1,
                };
                let mut s = frame(
                    &format!("{} (n = {}): max lhs/rhs against points per axis", e.id, inst.n),
                    "points per axis",
                    &ax,
                );
                let _ = writeln!(
                    s,
                    r#"<polyline points="{:.2},{:.2} {:.2},{:.2}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
                    ax.px(pts[0].0),
                    ax.py(pts[0].1),
                    ax.px(pts[1].0),
                    ax.py(pts[1].1)
                );
                for (x, y) in pts.iter().filter(|p| p.1.is_finite()) {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, ax.px(*x), ax.py(*y));
                    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">N = {x}</text>"#, ax.px(*x) + 6.0, ax.py(*y) - 6.0);
                }
                s.push_str("</svg>\n");
                out.push(SvgPlot {
                    name: format!("{}_n{}_resolution", e.id, inst.n),
                    content: s,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridfn::{CorpusFile, CorpusSet, GridSpec};
    use crate::verify::{find, run, RunOptions};

    fn doc() -> ReportDocument {
        let set = CorpusSet::generate(9, 2, GridSpec::cube(1, 8.0, 128).unwrap()).unwrap();
        let corpus = CorpusFile::new(vec![set]);
        let r = run(&find("bound").unwrap(), &corpus, &RunOptions::default()).unwrap();
        ReportDocument::new(vec![r], Some(9))
    }

    #[test]
    fn json_roundtrip_keeps_timestamp_in_metadata() {
        let d = doc();
        let text = d.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["metadata"]["timestamp"].is_u64());
        assert!(v["entries"][0].get("runtime_ms").is_none());
        assert_eq!(v["format_version"], FORMAT_VERSION);
        assert_eq!(ReportDocument::from_json(&text).unwrap().entries, d.entries);
        assert!(ReportDocument::from_json(&text.replacen("\"format_version\": 1", "\"format_version\": 99", 1)).is_err());
    }

    #[test]
    fn csv_has_one_row_per_member() {
        let csv = render_csv(&doc()).unwrap();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].starts_with("id,kind,n,member"));
        assert!(rows[1].starts_with("bound,assert,1,0,"));
    }

    #[test]
    fn svg_plots_per_instance() {
        let plots = render_svg(&doc());
        let names: Vec<&str> = plots.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["bound_n1_members", "bound_n1_resolution"]);
        assert!(plots.iter().all(|p| p.content.starts_with("<svg") && p.content.trim_end().ends_with("</svg>")));
    }
}
