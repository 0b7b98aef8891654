//! Inequality registry, corpus runner, empirical-constant reports and
//! open-question probes.
//!
//! Each [`InequalitySpec`] pairs two functionals (or one joint check that
//! produces both sides at once) with a validity window over its parameters.
//! `assert` entries carry an explicit constant and fail when
//! `lhs > C·(1 + tolerance)·rhs`; `report` entries record the empirical
//! maximum of `lhs/rhs` together with its drift between a grid and its
//! refinement; `probe` entries are evidence only.

mod eval;
mod probe;
mod registry;
mod render;
mod run;

use serde::{Deserialize, Serialize};

use crate::norms::NormSpec;

pub use eval::{evaluate_check, evaluate_functional, ratio, EvalInput};
pub use probe::{probe, ProbeLevel, ProbeQuestion, ProbeReport, OPEN_QUESTION_LABEL};
pub use registry::{find, registry};
pub use render::{render_csv, render_svg, ReportDocument, SvgPlot};
pub use run::{
    default_corpus, default_grid, run, run_all, run_set, DilationReport, InequalityReport, InstanceReport,
    MemberResult, RunOptions, SideValues, DEFAULT_CORPUS_COUNT, DEFAULT_CORPUS_SEED, STABILITY_DRIFT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Assert,
    Report,
    Probe,
}

/// Parameter values of one registry instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl Params {
    pub fn n(n: usize) -> Self {
        Params {
            n,
            ..Default::default()
        }
    }

    fn get(&self, name: &str, v: Option<f64>) -> std::result::Result<f64, String> {
        match v {
            Some(x) if x.is_finite() => Ok(x),
            Some(x) => Err(format!("{name} = {x} is not finite")),
            None => Err(format!("missing parameter {name}")),
        }
    }

    pub fn p(&self) -> std::result::Result<f64, String> {
        self.get("p", self.p)
    }
    pub fn q(&self) -> std::result::Result<f64, String> {
        self.get("q", self.q)
    }
    pub fn r(&self) -> std::result::Result<f64, String> {
        self.get("r", self.r)
    }
    pub fn nu(&self) -> std::result::Result<f64, String> {
        self.get("nu", self.nu)
    }
    pub fn theta(&self) -> std::result::Result<f64, String> {
        self.get("theta", self.theta)
    }
    pub fn alpha(&self) -> std::result::Result<f64, String> {
        self.get("alpha", self.alpha)
    }
    pub fn beta(&self) -> std::result::Result<f64, String> {
        self.get("beta", self.beta)
    }
    pub fn lambda(&self) -> std::result::Result<f64, String> {
        self.get("lambda", self.lambda)
    }
    pub fn delta(&self) -> std::result::Result<f64, String> {
        self.get("delta", self.delta)
    }
}

/// Hölder conjugate `p/(p-1)`, `∞` at `p = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// Parameter windows in which an inequality is claimed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// `n ≥ 2`, `1 ≤ p < n`.
    Sobolev,
    /// `p < q < ∞`, `s = 1 - n(1/p - 1/q) > 0`, and `p > 1` or `n ≥ 2`.
    Embed1,
    /// `p < q < ∞`, `α = 1 - (n-1)(1/p - 1/q) > 0`, and `p > 1, n ≥ 2` or `p = 1, n ≥ 3`.
    Embed32,
    /// The unresolved case `n = 2`, `p = 1`, `1 < q < ∞`.
    Embed32Open,
    /// `n ≥ 2`, `1 < q < (n-1)/(n-2)`.
    Embed321,
    /// `1 < q < n'`.
    HardyH1,
    /// `n ≥ 2`, `1 < q < (n-1)'`.
    HardyRefined,
    /// Comparison of the two embeddings: both windows at the same `(n, p, q)`.
    EmbedComparison,
    /// `n = 1`, `1 ≤ p < q < ∞`, `δ > 0` when given.
    Ulyanov,
    /// `1 ≤ p < q < ∞`, `θ ≥ 1`, `α > n(1/p - 1/q)`, `0 < α < 1`.
    DifferentNorm,
    /// `n ≥ 2`, `θ ≥ 1`, `1 ≤ r < p < ∞`, `1/r - 1/p < α < 1`.
    MixedBesov,
    /// [`Window::MixedBesov`] plus `1 ≤ ν ≤ p`.
    MixedLorentzBesov,
    /// `n ≥ 2`, `1 ≤ ν ≤ p < ∞`.
    IteratedBelow,
    /// `n ≥ 2`, `1 ≤ p ≤ ν < ∞`.
    IteratedAbove,
    /// `n = 1`, `λ < 1`, `1 ≤ p < ∞`.
    HardyOperator,
    /// `n = 1`, `α > 0`, `β > -1`, `0 < p < 1`.
    QuasiDecreasing,
    /// `1 < p < ∞`.
    DoubleStar,
    /// `n = 1`, `1 ≤ p < ∞`.
    OneDimensional,
    /// `1 ≤ p < ∞`, `0 < α < 1`, `θ ≥ 1`.
    BesovPair,
    /// Any `n`.
    Any,
    /// `n ≥ 2`.
    AtLeastTwo,
    /// `n ≥ 3`.
    AtLeastThree,
    /// `n = 2`.
    Plane,
    /// `n ≤ 2` (cone maximal functions).
    AtMostTwo,
}

impl Window {
    pub fn check(self, pr: &Params) -> std::result::Result<(), String> {
        let n = pr.n;
        if !(1..=3).contains(&n) {
            return Err(format!("dimension {n} outside 1..=3"));
        }
        let nf = n as f64;
        let need = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(msg.to_string()) };
        match self {
            Window::Sobolev => {
                let p = pr.p()?;
                need(n >= 2 && p >= 1.0 && p < nf, "need n >= 2 and 1 <= p < n")
            }
            Window::Embed1 => {
                let (p, q) = (pr.p()?, pr.q()?);
                need(p >= 1.0 && p < q, "need 1 <= p < q")?;
                need(p > 1.0 || n >= 2, "p = 1 needs n >= 2")?;
                need(1.0 - nf * (1.0 / p - 1.0 / q) > 0.0, "need s = 1 - n(1/p - 1/q) > 0")
            }
            Window::Embed32 | Window::Embed32Open => {
                let (p, q) = (pr.p()?, pr.q()?);
                need(p >= 1.0 && p < q, "need 1 <= p < q")?;
                need(1.0 - (nf - 1.0) * (1.0 / p - 1.0 / q) > 0.0, "need alpha = 1 - (n-1)(1/p - 1/q) > 0")?;
                if self == Window::Embed32 {
                    need((p > 1.0 && n >= 2) || (p == 1.0 && n >= 3), "need p > 1, n >= 2 or p = 1, n >= 3")
                } else {
                    need(n == 2 && p == 1.0, "the open case is n = 2, p = 1")
                }
            }
            Window::Embed321 => {
                let q = pr.q()?;
                let top = if n == 2 { f64::INFINITY } else { (nf - 1.0) / (nf - 2.0) };
                need(n >= 2 && q > 1.0 && q < top, "need n >= 2 and 1 < q < (n-1)/(n-2)")
            }
            Window::HardyH1 => {
                let q = pr.q()?;
                need(q > 1.0 && q < conjugate(nf), "need 1 < q < n'")
            }
            Window::HardyRefined => {
                let q = pr.q()?;
                need(n >= 2 && q > 1.0 && q < conjugate(nf - 1.0), "need n >= 2 and 1 < q < (n-1)'")
            }
            Window::EmbedComparison => {
                Window::Embed1.check(pr)?;
                Window::Embed32.check(pr)
            }
            Window::Ulyanov => {
                let (p, q) = (pr.p()?, pr.q()?);
                need(n == 1 && p >= 1.0 && p < q, "need n = 1 and 1 <= p < q")?;
                match pr.delta {
                    Some(d) => need(d > 0.0 && d.is_finite(), "need delta > 0"),
                    None => Ok(()),
                }
            }
            Window::DifferentNorm => {
                let (p, q, th, a) = (pr.p()?, pr.q()?, pr.theta()?, pr.alpha()?);
                need(p >= 1.0 && p < q && th >= 1.0, "need 1 <= p < q and theta >= 1")?;
                need(a > nf * (1.0 / p - 1.0 / q) && a < 1.0, "need n(1/p - 1/q) < alpha < 1")
            }
            Window::MixedBesov | Window::MixedLorentzBesov => {
                let (p, r, th, a) = (pr.p()?, pr.r()?, pr.theta()?, pr.alpha()?);
                need(n >= 2 && th >= 1.0, "need n >= 2 and theta >= 1")?;
                need(r >= 1.0 && r < p, "need 1 <= r < p")?;
                need(a > 1.0 / r - 1.0 / p && a < 1.0, "need 1/r - 1/p < alpha < 1")?;
                if self == Window::MixedLorentzBesov {
                    let nu = pr.nu()?;
                    need(nu >= 1.0 && nu <= p, "need 1 <= nu <= p")
                } else {
                    Ok(())
                }
            }
            Window::IteratedBelow => {
                let (p, nu) = (pr.p()?, pr.nu()?);
                need(n >= 2 && nu >= 1.0 && nu <= p, "need n >= 2 and 1 <= nu <= p")
            }
            Window::IteratedAbove => {
                let (p, nu) = (pr.p()?, pr.nu()?);
                need(n >= 2 && p >= 1.0 && p <= nu, "need n >= 2 and 1 <= p <= nu")
            }
            Window::HardyOperator => {
                let (l, p) = (pr.lambda()?, pr.p()?);
                need(n == 1 && l < 1.0 && p >= 1.0, "need n = 1, lambda < 1 and p >= 1")
            }
            Window::QuasiDecreasing => {
                let (a, b, p) = (pr.alpha()?, pr.beta()?, pr.p()?);
                need(n == 1 && a > 0.0 && b > -1.0 && p > 0.0 && p < 1.0, "need alpha > 0, beta > -1, 0 < p < 1")
            }
            Window::DoubleStar => need(pr.p()? > 1.0, "need p > 1"),
            Window::OneDimensional => need(n == 1 && pr.p()? >= 1.0, "need n = 1 and p >= 1"),
            Window::BesovPair => {
                let (p, a, th) = (pr.p()?, pr.alpha()?, pr.theta()?);
                need(p >= 1.0 && a > 0.0 && a < 1.0 && th >= 1.0, "need p >= 1, 0 < alpha < 1, theta >= 1")
            }
            Window::Any => Ok(()),
            Window::AtLeastTwo => need(n >= 2, "need n >= 2"),
            Window::AtLeastThree => need(n >= 3, "need n >= 3"),
            Window::Plane => need(n == 2, "need n = 2"),
            Window::AtMostTwo => need(n <= 2, "need n <= 2"),
        }
    }
}

/// Which function of a corpus member a functional is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Input {
    /// The member itself (or `D_k f` inside [`Functional::DerivativeSum`]).
    F,
    /// The exact partial derivative along an axis (0-based).
    D(usize),
}

/// Norm used along axis `k` of a Besov-type functional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisNorm {
    Fixed(NormSpec),
    /// `Mix(k; inner; outer)` for the axis `k` being differenced.
    Along { inner: NormSpec, outer: NormSpec },
}

impl AxisNorm {
    pub fn for_axis(&self, k: usize) -> NormSpec {
        match self {
            AxisNorm::Fixed(s) => s.clone(),
            AxisNorm::Along { inner, outer } => NormSpec::mixed(k, inner.clone(), outer.clone()),
        }
    }
}

/// One side of an inequality, as a composition of module operations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Functional {
    Norm { input: Input, norm: NormSpec },
    /// `‖ |∇f| ‖_p`.
    GradientNorm { p: f64 },
    /// `Σ_k F(D_k f)`.
    DerivativeSum { of: Box<Functional> },
    /// `‖g‖_1 + Σ_j ‖R_j g‖_1`.
    H1 { input: Input },
    /// `Σ_k (∫ (h^{-α} ‖Δ_k(h) g‖_{V_k})^θ dh/h)^{1/θ}` over `axes`
    /// (all axes when `None`); `ω_k` replaces `‖Δ_k‖` when `modulus` is set.
    Besov {
        input: Input,
        alpha: f64,
        theta: f64,
        base: AxisNorm,
        axis: Option<usize>,
        modulus: bool,
    },
    /// `(∫_0^δ t^{-q/p} ‖Δ(t) g‖_p^q dt)^{1/q}` (1-D, `δ = ∞` when `None`).
    UlyanovIntegral { p: f64, q: f64, delta: Option<f64> },
    /// `ω(g; δ)_p` along the first axis.
    Modulus { p: f64, delta: f64 },
    /// `∫ |ĝ(ξ)| |ξ|^γ dξ` over the punctured dual grid.
    WeightedFourier { input: Input, gamma: f64 },
    /// `Σ_k 2^{kw} sup_{2^k ≤ r ≤ 2^{k+1}} ∫_{S_r} |ĝ| dσ`.
    ShellSum { input: Input, weight: f64 },
    /// Cube-face version of the shell sum.
    CubeShellSum { input: Input },
    /// `Σ_j ∫_0^∞ F**_{t,j}(t^{n-1}) dt`.
    SupIntegral { input: Input },
    /// `Σ_{j=0}^n ‖N_v g_j‖_1`, `g_0 = g`, `g_j = R_j g`.
    VerticalSum { input: Input },
    Sum { terms: Vec<Functional> },
}

/// Checks that produce both sides at once, typically maximized over a
/// parameter or over grid nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum JointCheck {
    /// Hardy operator inequality on `φ = f*`; rhs excludes `1/(1-λ)`.
    Hardy { lambda: f64, p: f64 },
    /// `‖f**‖_p` against `‖f‖_p`.
    DoubleStar { p: f64 },
    /// `φ**(t) - φ*(t)` against `t^{-1/p} ω(φ; t)_p`, worst `t`.
    UlyanovPointwise { p: f64 },
    /// `φ*(t)` against `∫_t^∞ s^{-1/p} ω(φ; s)_p ds/s`, worst `t`.
    UlyanovTail { p: f64 },
    /// `ω_1(f; δ)_p` against `δ^{-1} ∫_0^δ ‖Δ_1(h) f‖_p dh`, worst `δ`.
    Omega1 { p: f64 },
    /// Hardy-type inequality with `ψ(t) = ω(f; t)_v / t`.
    QuasiDecreasing { v: f64, alpha: f64, beta: f64, p: f64 },
    /// `sup_Γ |∂_t u|` against `Σ_j N(R_j D_j f)` at every node, worst node.
    ConeDerivative,
    /// `‖N_v f‖_1` against `‖N f‖_1`.
    VerticalCone,
    /// `∫_{P_k} |f̂| / |band|` against `Σ_j sup ∫_{Q_k^{(j)}} |f̂|`, worst `k`.
    CubeAnnulus { input: Input },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Pair { lhs: Functional, rhs: Functional },
    Joint(JointCheck),
}

/// A parameter choice at which an entry is run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub params: Params,
    pub check: Check,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalitySpec {
    pub id: String,
    pub title: String,
    pub kind: Kind,
    /// Explicit constant for assert entries; `None` means empirical.
    pub constant: Option<f64>,
    /// Relative slack `ε_quad` allowed on top of the constant.
    pub tolerance: f64,
    pub window: Window,
    pub instances: Vec<Instance>,
    /// Attach the `f(λx)` sweep.
    pub dilation: bool,
    /// Inputs are expected to have mean zero (H¹-based entries).
    pub mean_zero: bool,
}

impl InequalitySpec {
    pub fn dims(&self) -> Vec<usize> {
        self.instances.iter().map(|i| i.params.n).collect()
    }

    pub fn instance(&self, n: usize) -> Option<&Instance> {
        self.instances.iter().find(|i| i.params.n == n)
    }

    pub fn validate(&self, params: &Params) -> std::result::Result<(), String> {
        self.window.check(params)
    }
}
