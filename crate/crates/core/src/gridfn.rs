//! Uniform grids, sampled functions, smooth analytic test families and
//! seeded corpora.
//!
//! A [`GridSpec`] covers `[-L_a, L_a)` along every axis `a` with an even
//! number of nodes `x_i = -L_a + i·h_a`, `h_a = 2L_a/N_a`. Each node owns one
//! cell of volume `∏ h_a`, so a [`GridFunction`] is read as a step function.
//! Node `N_a/2` sits exactly at the origin, which keeps the discrete Fourier
//! transform aligned with the continuous one.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::FORMAT_VERSION;

/// Default bound on the fraction of a family's L¹ mass lying outside the grid.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_extent: Vec<f64>,
    points: Vec<usize>,
}

impl GridSpec {
    pub fn new(half_extent: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        let grid = GridSpec {
            half_extent,
            points,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Same half extent and node count along every axis.
    pub fn cube(dim: usize, half_extent: f64, points: usize) -> Result<Self> {
        Self::new(vec![half_extent; dim], vec![points; dim])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if n == 0 || n > 3 {
            return Err(Error::InvalidGrid(format!("dimension {n} not in 1..=3")));
        }
        if self.half_extent.len() != n {
            return Err(Error::InvalidGrid("half_extent/points length mismatch".into()));
        }
        for (&l, &p) in self.half_extent.iter().zip(&self.points) {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("half extent {l} must be positive")));
            }
            if p == 0 || p % 2 != 0 {
                return Err(Error::InvalidGrid(format!("point count {p} must be positive and even")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn half_extents(&self) -> &[f64] {
        &self.half_extent
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_extent[axis] / self.points[axis] as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.spacing(a)).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacings().iter().product()
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lebesgue measure of the whole box.
    pub fn measure(&self) -> f64 {
        self.half_extent.iter().map(|l| 2.0 * l).product()
    }

    pub fn node(&self, axis: usize, i: usize) -> f64 {
        -self.half_extent[axis] + i as f64 * self.spacing(axis)
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        strides(&self.points)
    }

    pub fn coords(&self, linear: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        let mut rem = linear;
        for a in (0..self.dim()).rev() {
            let i = rem % self.points[a];
            rem /= self.points[a];
            out[a] = self.node(a, i);
        }
        out
    }

    /// Twice as many nodes per axis over the same box.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            half_extent: self.half_extent.clone(),
            points: self.points.iter().map(|p| p * 2).collect(),
        }
    }

    /// Same node counts over a box scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> GridSpec {
        GridSpec {
            half_extent: self.half_extent.iter().map(|l| l * factor).collect(),
            points: self.points.clone(),
        }
    }

    /// The grid with `axis` removed (dimension n-1).
    pub fn without_axis(&self, axis: usize) -> Result<GridSpec> {
        if self.dim() < 2 {
            return Err(invalid("cannot remove an axis from a 1-D grid"));
        }
        let mut g = self.clone();
        g.half_extent.remove(axis);
        g.points.remove(axis);
        Ok(g)
    }

    /// Frequency grid dual to this one: spacing 1/(2L), half extent N/(4L).
    pub fn dual(&self) -> GridSpec {
        GridSpec {
            half_extent: self
                .half_extent
                .iter()
                .zip(&self.points)
                .map(|(l, &n)| n as f64 / (4.0 * l))
                .collect(),
            points: self.points.clone(),
        }
    }
}

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Values {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Real(v) => v.len(),
            Values::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Real,
    Complex,
}

/// Samples of a function on a [`GridSpec`], read as a step function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: GridSpec,
    values: Values,
}

impl GridFunction {
    pub fn real(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, Values::Real(values))
    }

    pub fn complex(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        Self::new(grid, Values::Complex(values))
    }

    pub fn new(grid: GridSpec, values: Values) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let finite = match &values {
            Values::Real(v) => v.iter().all(|x| x.is_finite()),
            Values::Complex(v) => v.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        };
        if !finite {
            return Err(invalid("non-finite sample"));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        GridFunction {
            grid,
            values: Values::Real(vec![0.0; n]),
        }
    }

    /// Evaluate `g` at every node.
    pub fn from_fn(grid: GridSpec, mut g: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let vals = (0..grid.len()).map(|i| g(&grid.coords(i))).collect();
        Self::real(grid, vals)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn kind(&self) -> Kind {
        match self.values {
            Values::Real(_) => Kind::Real,
            Values::Complex(_) => Kind::Complex,
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match &self.values {
            Values::Real(v) => Some(v),
            Values::Complex(_) => None,
        }
    }

    /// Samples as complex numbers (real samples get zero imaginary part).
    pub fn to_complex_vec(&self) -> Vec<Complex64> {
        match &self.values {
            Values::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Values::Complex(v) => v.clone(),
        }
    }

    pub fn abs_values(&self) -> Vec<f64> {
        match &self.values {
            Values::Real(v) => v.iter().map(|x| x.abs()).collect(),
            Values::Complex(v) => v.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.abs_values().into_iter().fold(0.0, f64::max)
    }

    /// ∫ f as a step function.
    pub fn integral(&self) -> Complex64 {
        let cell = self.grid.cell_volume();
        match &self.values {
            Values::Real(v) => Complex64::new(v.iter().sum::<f64>() * cell, 0.0),
            Values::Complex(v) => v.iter().sum::<Complex64>() * cell,
        }
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        let values = match &self.values {
            Values::Real(v) => Values::Real(v.iter().map(|x| x * c).collect()),
            Values::Complex(v) => Values::Complex(v.iter().map(|z| z * c).collect()),
        };
        GridFunction {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Pointwise combination `self + c·other` on the same grid.
    pub fn add_scaled(&self, other: &GridFunction, c: f64) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(invalid("grid mismatch"));
        }
        let values = match (&self.values, &other.values) {
            (Values::Real(a), Values::Real(b)) => {
                Values::Real(a.iter().zip(b).map(|(x, y)| x + c * y).collect())
            }
            _ => {
                let a = self.to_complex_vec();
                let b = other.to_complex_vec();
                Values::Complex(a.iter().zip(&b).map(|(x, y)| x + y * c).collect())
            }
        };
        Ok(GridFunction {
            grid: self.grid.clone(),
            values,
        })
    }
}

// ---------------------------------------------------------------------------
// Analytic families

/// Smooth test families with closed-form partial derivatives.
///
/// All lengths are in the same units as the grid. `bump(u) = exp(1 - 1/(1-u²))`
/// on `|u| < 1` (peak value 1); `S` is the C^∞ smooth step that is 0 on
/// `u ≤ 0` and 1 on `u ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `a·exp(-π|x-c|²/w²)`
    Gaussian {
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
    },
    /// `a·exp(-π Σ (x_i-c_i)²/w_i²)`
    AnisotropicGaussian {
        amplitude: f64,
        center: Vec<f64>,
        widths: Vec<f64>,
    },
    /// `a·∏ bump((x_i-c_i)/r_i)`
    TensorBump {
        amplitude: f64,
        center: Vec<f64>,
        radii: Vec<f64>,
    },
    /// `a·sin(2π ω·(x-c) + phase)·∏ bump((x_i-c_i)/r_i)`
    WindowedTrig {
        amplitude: f64,
        center: Vec<f64>,
        radii: Vec<f64>,
        frequency: Vec<f64>,
        phase: f64,
    },
    /// Cone `a·(1-ρ/R)` with a rounded apex `ρ = sqrt(r²+ε²)-ε` and a smooth
    /// cutoff `1 - S((ρ-R+ε)/ε)`; vanishes for `ρ ≥ R`.
    MollifiedCone {
        amplitude: f64,
        center: Vec<f64>,
        radius: f64,
        smoothing: f64,
    },
    /// Smoothed ball indicator `a·(1 - S((|x-c|-R)/ε))`, equal to `a` on the
    /// ball of radius R and 0 beyond R+ε.
    MollifiedIndicator {
        amplitude: f64,
        center: Vec<f64>,
        radius: f64,
        smoothing: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyId {
    Gaussian,
    AnisotropicGaussian,
    TensorBump,
    WindowedTrig,
    MollifiedCone,
    MollifiedIndicator,
}

impl FamilyId {
    pub const ALL: [FamilyId; 6] = [
        FamilyId::Gaussian,
        FamilyId::AnisotropicGaussian,
        FamilyId::TensorBump,
        FamilyId::WindowedTrig,
        FamilyId::MollifiedCone,
        FamilyId::MollifiedIndicator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::Gaussian => "gaussian",
            FamilyId::AnisotropicGaussian => "anisotropic_gaussian",
            FamilyId::TensorBump => "tensor_bump",
            FamilyId::WindowedTrig => "windowed_trig",
            FamilyId::MollifiedCone => "mollified_cone",
            FamilyId::MollifiedIndicator => "mollified_indicator",
        }
    }
}

/// A family together with the seed its parameters were drawn from, if any.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl From<Family> for FamilySpec {
    fn from(family: Family) -> Self {
        FamilySpec { family, seed: None }
    }
}

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

fn bump_prime(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        let d = 1.0 - u * u;
        bump(u) * (-2.0 * u / (d * d))
    }
}

fn psi(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

fn psi_prime(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        psi(u) / (u * u)
    }
}

/// C^∞ step: 0 for u ≤ 0, 1 for u ≥ 1.
pub(crate) fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = psi(u);
        a / (a + psi(1.0 - u))
    }
}

pub(crate) fn smooth_step_prime(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        let (a, b) = (psi(u), psi(1.0 - u));
        let d = a + b;
        (psi_prime(u) * b + a * psi_prime(1.0 - u)) / (d * d)
    }
}

impl Family {
    pub fn id(&self) -> FamilyId {
        match self {
            Family::Gaussian { .. } => FamilyId::Gaussian,
            Family::AnisotropicGaussian { .. } => FamilyId::AnisotropicGaussian,
            Family::TensorBump { .. } => FamilyId::TensorBump,
            Family::WindowedTrig { .. } => FamilyId::WindowedTrig,
            Family::MollifiedCone { .. } => FamilyId::MollifiedCone,
            Family::MollifiedIndicator { .. } => FamilyId::MollifiedIndicator,
        }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            Family::Gaussian { center, .. }
            | Family::AnisotropicGaussian { center, .. }
            | Family::TensorBump { center, .. }
            | Family::WindowedTrig { center, .. }
            | Family::MollifiedCone { center, .. }
            | Family::MollifiedIndicator { center, .. } => center,
        }
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    pub fn amplitude(&self) -> f64 {
        match self {
            Family::Gaussian { amplitude, .. }
            | Family::AnisotropicGaussian { amplitude, .. }
            | Family::TensorBump { amplitude, .. }
            | Family::WindowedTrig { amplitude, .. }
            | Family::MollifiedCone { amplitude, .. }
            | Family::MollifiedIndicator { amplitude, .. } => *amplitude,
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 || n > 3 {
            return Err(invalid(format!("family dimension {n} not in 1..=3")));
        }
        let positive = |v: &[f64]| v.len() == n && v.iter().all(|x| x.is_finite() && *x > 0.0);
        let ok = match self {
            Family::Gaussian { width, .. } => *width > 0.0,
            Family::AnisotropicGaussian { widths, .. } => positive(widths),
            Family::TensorBump { radii, .. } => positive(radii),
            Family::WindowedTrig {
                radii, frequency, ..
            } => positive(radii) && frequency.len() == n,
            Family::MollifiedCone {
                radius, smoothing, ..
            } => *radius > 0.0 && *smoothing > 0.0 && *smoothing < *radius,
            Family::MollifiedIndicator {
                radius, smoothing, ..
            } => *radius > 0.0 && *smoothing > 0.0,
        };
        if !ok || !self.amplitude().is_finite() {
            return Err(invalid(format!("malformed {} parameters", self.id().name())));
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let c = self.center();
        match self {
            Family::Gaussian {
                amplitude, width, ..
            } => {
                let r2: f64 = x.iter().zip(c).map(|(x, c)| (x - c).powi(2)).sum();
                amplitude * (-PI * r2 / (width * width)).exp()
            }
            Family::AnisotropicGaussian {
                amplitude, widths, ..
            } => {
                let e: f64 = x
                    .iter()
                    .zip(c)
                    .zip(widths)
                    .map(|((x, c), w)| ((x - c) / w).powi(2))
                    .sum();
                amplitude * (-PI * e).exp()
            }
            Family::TensorBump {
                amplitude, radii, ..
            } => {
                amplitude
                    * x.iter()
                        .zip(c)
                        .zip(radii)
                        .map(|((x, c), r)| bump((x - c) / r))
                        .product::<f64>()
            }
            Family::WindowedTrig {
                amplitude,
                radii,
                frequency,
                phase,
                ..
            } => {
                let window: f64 = x
                    .iter()
                    .zip(c)
                    .zip(radii)
                    .map(|((x, c), r)| bump((x - c) / r))
                    .product();
                if window == 0.0 {
                    return 0.0;
                }
                let arg: f64 = x.iter().zip(c).zip(frequency).map(|((x, c), w)| w * (x - c)).sum();
                amplitude * (2.0 * PI * arg + phase).sin() * window
            }
            Family::MollifiedCone {
                amplitude,
                radius,
                smoothing,
                ..
            } => {
                let r2: f64 = x.iter().zip(c).map(|(x, c)| (x - c).powi(2)).sum();
                let rho = (r2 + smoothing * smoothing).sqrt() - smoothing;
                if rho >= *radius {
                    return 0.0;
                }
                let v = (rho - radius + smoothing) / smoothing;
                amplitude * (1.0 - rho / radius) * (1.0 - smooth_step(v))
            }
            Family::MollifiedIndicator {
                amplitude,
                radius,
                smoothing,
                ..
            } => {
                let r = x.iter().zip(c).map(|(x, c)| (x - c).powi(2)).sum::<f64>().sqrt();
                amplitude * (1.0 - smooth_step((r - radius) / smoothing))
            }
        }
    }

    /// Closed-form partial derivative ∂f/∂x_axis.
    pub fn partial(&self, axis: usize, x: &[f64]) -> f64 {
        let c = self.center();
        match self {
            Family::Gaussian { width, .. } => {
                -2.0 * PI * (x[axis] - c[axis]) / (width * width) * self.value(x)
            }
            Family::AnisotropicGaussian { widths, .. } => {
                -2.0 * PI * (x[axis] - c[axis]) / (widths[axis] * widths[axis]) * self.value(x)
            }
            Family::TensorBump {
                amplitude, radii, ..
            } => {
                let mut prod = *amplitude;
                for (i, ((x, c), r)) in x.iter().zip(c).zip(radii).enumerate() {
                    let u = (x - c) / r;
                    prod *= if i == axis { bump_prime(u) / r } else { bump(u) };
                }
                prod
            }
            Family::WindowedTrig {
                amplitude,
                radii,
                frequency,
                phase,
                ..
            } => {
                let us: Vec<f64> = x.iter().zip(c).zip(radii).map(|((x, c), r)| (x - c) / r).collect();
                let window: f64 = us.iter().map(|&u| bump(u)).product();
                let dwindow: f64 = us
                    .iter()
                    .enumerate()
                    .map(|(i, &u)| if i == axis { bump_prime(u) / radii[i] } else { bump(u) })
                    .product();
                let arg: f64 = x.iter().zip(c).zip(frequency).map(|((x, c), w)| w * (x - c)).sum();
                let theta = 2.0 * PI * arg + phase;
                amplitude
                    * (2.0 * PI * frequency[axis] * theta.cos() * window + theta.sin() * dwindow)
            }
            Family::MollifiedCone {
                amplitude,
                radius,
                smoothing,
                ..
            } => {
                let r2: f64 = x.iter().zip(c).map(|(x, c)| (x - c).powi(2)).sum();
                let s = (r2 + smoothing * smoothing).sqrt();
                let rho = s - smoothing;
                if rho >= *radius {
                    return 0.0;
                }
                let v = (rho - radius + smoothing) / smoothing;
                let df_drho = amplitude
                    * (-(1.0 - smooth_step(v)) / radius
                        - (1.0 - rho / radius) * smooth_step_prime(v) / smoothing);
                df_drho * (x[axis] - c[axis]) / s
            }
            Family::MollifiedIndicator {
                amplitude,
                radius,
                smoothing,
                ..
            } => {
                let r = x.iter().zip(c).map(|(x, c)| (x - c).powi(2)).sum::<f64>().sqrt();
                if r == 0.0 {
                    return 0.0;
                }
                -amplitude * smooth_step_prime((r - radius) / smoothing) / smoothing
                    * (x[axis] - c[axis])
                    / r
            }
        }
    }

    /// Radius of a ball around the center containing the support, for the
    /// compactly supported families.
    fn support_radius(&self) -> Option<Vec<f64>> {
        let n = self.dim();
        match self {
            Family::Gaussian { .. } | Family::AnisotropicGaussian { .. } => None,
            Family::TensorBump { radii, .. } | Family::WindowedTrig { radii, .. } => {
                Some(radii.clone())
            }
            Family::MollifiedCone {
                radius, smoothing, ..
            } => {
                let r = ((radius + smoothing).powi(2) - smoothing * smoothing).sqrt();
                Some(vec![r; n])
            }
            Family::MollifiedIndicator {
                radius, smoothing, ..
            } => Some(vec![radius + smoothing; n]),
        }
    }

    /// Fraction of the L¹ mass lying outside the grid box: closed form for
    /// gaussians, 0 or 1 (support check) for compact families.
    pub fn tail_mass_fraction(&self, grid: &GridSpec) -> f64 {
        if self.amplitude() == 0.0 {
            return 0.0;
        }
        let c = self.center();
        let widths: Vec<f64> = match self {
            Family::Gaussian { width, .. } => vec![*width; self.dim()],
            Family::AnisotropicGaussian { widths, .. } => widths.clone(),
            _ => {
                let radii = self.support_radius().unwrap_or_default();
                let inside = c
                    .iter()
                    .zip(&radii)
                    .zip(grid.half_extents())
                    .all(|((c, r), l)| c - r >= -l && c + r <= *l);
                return if inside { 0.0 } else { 1.0 };
            }
        };
        let root_pi = PI.sqrt();
        let log_inside: f64 = c
            .iter()
            .zip(&widths)
            .zip(grid.half_extents())
            .map(|((c, w), l)| {
                let out = 0.5
                    * (libm::erfc(root_pi * (l - c) / w) + libm::erfc(root_pi * (l + c) / w));
                (-out).ln_1p()
            })
            .sum();
        -log_inside.exp_m1()
    }

    /// Parameters of `x ↦ f(λx)`.
    pub fn dilated(&self, lambda: f64) -> Family {
        let sc = |v: &[f64]| v.iter().map(|x| x / lambda).collect::<Vec<_>>();
        match self {
            Family::Gaussian {
                amplitude,
                center,
                width,
            } => Family::Gaussian {
                amplitude: *amplitude,
                center: sc(center),
                width: width / lambda,
            },
            Family::AnisotropicGaussian {
                amplitude,
                center,
                widths,
            } => Family::AnisotropicGaussian {
                amplitude: *amplitude,
                center: sc(center),
                widths: sc(widths),
            },
            Family::TensorBump {
                amplitude,
                center,
                radii,
            } => Family::TensorBump {
                amplitude: *amplitude,
                center: sc(center),
                radii: sc(radii),
            },
            Family::WindowedTrig {
                amplitude,
                center,
                radii,
                frequency,
                phase,
            } => Family::WindowedTrig {
                amplitude: *amplitude,
                center: sc(center),
                radii: sc(radii),
                frequency: frequency.iter().map(|w| w * lambda).collect(),
                phase: *phase,
            },
            Family::MollifiedCone {
                amplitude,
                center,
                radius,
                smoothing,
            } => Family::MollifiedCone {
                amplitude: *amplitude,
                center: sc(center),
                radius: radius / lambda,
                smoothing: smoothing / lambda,
            },
            Family::MollifiedIndicator {
                amplitude,
                center,
                radius,
                smoothing,
            } => Family::MollifiedIndicator {
                amplitude: *amplitude,
                center: sc(center),
                radius: radius / lambda,
                smoothing: smoothing / lambda,
            },
        }
    }

    /// Parameters of `c·f`.
    pub fn scaled(&self, c: f64) -> Family {
        let mut out = self.clone();
        match &mut out {
            Family::Gaussian { amplitude, .. }
            | Family::AnisotropicGaussian { amplitude, .. }
            | Family::TensorBump { amplitude, .. }
            | Family::WindowedTrig { amplitude, .. }
            | Family::MollifiedCone { amplitude, .. }
            | Family::MollifiedIndicator { amplitude, .. } => *amplitude *= c,
        }
        out
    }
}

impl FamilySpec {
    pub fn dilated(&self, lambda: f64) -> FamilySpec {
        FamilySpec {
            family: self.family.dilated(lambda),
            seed: self.seed,
        }
    }

    pub fn scaled(&self, c: f64) -> FamilySpec {
        FamilySpec {
            family: self.family.scaled(c),
            seed: self.seed,
        }
    }
}

fn check_dims(family: &Family, grid: &GridSpec) -> Result<()> {
    family.check()?;
    grid.validate()?;
    if family.dim() != grid.dim() {
        return Err(Error::Dimension {
            expected: format!("{}-D grid", family.dim()),
            got: grid.dim(),
        });
    }
    Ok(())
}

/// Sample a family at the grid nodes after checking its tail mass.
pub fn sample(family: &FamilySpec, grid: &GridSpec) -> Result<GridFunction> {
    sample_with_tolerance(family, grid, DEFAULT_TAIL_TOLERANCE)
}

pub fn sample_with_tolerance(
    family: &FamilySpec,
    grid: &GridSpec,
    tail_tolerance: f64,
) -> Result<GridFunction> {
    let f = &family.family;
    check_dims(f, grid)?;
    let tail = f.tail_mass_fraction(grid);
    if tail > tail_tolerance {
        return Err(Error::TailMass {
            family: f.id().name().into(),
            tail,
            tolerance: tail_tolerance,
        });
    }
    GridFunction::from_fn(grid.clone(), |x| f.value(x))
}

/// Exact partial derivative `D_axis f` sampled on the grid.
pub fn derivative(family: &FamilySpec, axis: usize, grid: &GridSpec) -> Result<GridFunction> {
    let f = &family.family;
    check_dims(f, grid)?;
    if axis >= grid.dim() {
        return Err(invalid(format!("axis {axis} out of range")));
    }
    GridFunction::from_fn(grid.clone(), |x| f.partial(axis, x))
}

/// All partial derivatives.
pub fn gradient(family: &FamilySpec, grid: &GridSpec) -> Result<Vec<GridFunction>> {
    (0..grid.dim()).map(|a| derivative(family, a, grid)).collect()
}

/// Second-order centered differences along `axis`, with second-order
/// one-sided stencils at both ends.
pub fn finite_difference_derivative(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    let grid = f.grid();
    if axis >= grid.dim() {
        return Err(invalid(format!("axis {axis} out of range")));
    }
    let n = grid.points()[axis];
    if n < 4 {
        return Err(invalid("finite differences need at least 4 points per axis"));
    }
    let h = grid.spacing(axis);
    let stride = grid.strides()[axis];
    let len = grid.len();
    let apply = |src: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (idx, o) in out.iter_mut().enumerate() {
            let i = (idx / stride) % n;
            let at = |k: usize| src[idx - i * stride + k * stride];
            *o = if i == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
            } else {
                (at(i + 1) - at(i - 1)) / (2.0 * h)
            };
        }
        out
    };
    match f.values() {
        Values::Real(v) => GridFunction::real(grid.clone(), apply(v)),
        Values::Complex(v) => {
            let re: Vec<f64> = v.iter().map(|z| z.re).collect();
            let im: Vec<f64> = v.iter().map(|z| z.im).collect();
            let (dre, dim) = (apply(&re), apply(&im));
            GridFunction::complex(
                grid.clone(),
                dre.into_iter().zip(dim).map(|(a, b)| Complex64::new(a, b)).collect(),
            )
        }
    }
}

// ---------------------------------------------------------------------------
// Corpus

/// One corpus member: its family, samples, and exact derivative samples.
#[derive(Clone, Debug)]
pub struct CorpusMember {
    pub spec: FamilySpec,
    pub f: GridFunction,
    pub derivatives: Vec<GridFunction>,
}

impl CorpusMember {
    pub fn build(spec: &FamilySpec, grid: &GridSpec) -> Result<Self> {
        Ok(CorpusMember {
            spec: spec.clone(),
            f: sample(spec, grid)?,
            derivatives: gradient(spec, grid)?,
        })
    }
}

/// Random parameters for one family, scaled to the grid box.
pub fn random_family(id: FamilyId, half_extent: &[f64], seed: u64) -> FamilySpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = half_extent.len();
    let lmin = half_extent.iter().cloned().fold(f64::INFINITY, f64::min);
    let amplitude = rng.gen_range(0.5..2.0);
    let center = |rng: &mut ChaCha8Rng, frac: f64| -> Vec<f64> {
        half_extent.iter().map(|l| rng.gen_range(-frac..frac) * l).collect()
    };
    let family = match id {
        FamilyId::Gaussian => Family::Gaussian {
            amplitude,
            center: center(&mut rng, 0.08),
            width: rng.gen_range(0.3..0.38) * lmin,
        },
        FamilyId::AnisotropicGaussian => {
            let c = center(&mut rng, 0.08);
            Family::AnisotropicGaussian {
                amplitude,
                center: c,
                widths: half_extent.iter().map(|l| rng.gen_range(0.26..0.38) * l).collect(),
            }
        }
        FamilyId::TensorBump => {
            let c = center(&mut rng, 0.08);
            Family::TensorBump {
                amplitude,
                center: c,
                radii: half_extent.iter().map(|l| rng.gen_range(0.6..0.8) * l).collect(),
            }
        }
        FamilyId::WindowedTrig => {
            let c = center(&mut rng, 0.08);
            let radii: Vec<f64> = half_extent.iter().map(|l| rng.gen_range(0.65..0.8) * l).collect();
            let frequency = half_extent
                .iter()
                .map(|l| rng.gen_range(-1.0..1.0) * 1.2 / l)
                .collect();
            Family::WindowedTrig {
                amplitude,
                center: c,
                radii,
                frequency,
                phase: rng.gen_range(0.0..2.0 * PI),
            }
        }
        FamilyId::MollifiedCone => {
            let c = center(&mut rng, 0.05);
            let radius = rng.gen_range(0.55..0.7) * lmin;
            Family::MollifiedCone {
                amplitude,
                center: c,
                radius,
                smoothing: rng.gen_range(0.18..0.25) * radius,
            }
        }
        FamilyId::MollifiedIndicator => {
            let c = center(&mut rng, 0.05);
            Family::MollifiedIndicator {
                amplitude,
                center: c,
                radius: rng.gen_range(0.3..0.45) * lmin,
                smoothing: rng.gen_range(0.28..0.38) * lmin,
            }
        }
    };
    debug_assert_eq!(family.dim(), n);
    FamilySpec {
        family,
        seed: Some(seed),
    }
}

/// Deterministic family list cycling through every family id.
pub fn corpus_families(seed: u64, count: usize, half_extent: &[f64]) -> Result<Vec<FamilySpec>> {
    if count == 0 {
        return Err(invalid("corpus count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|i| {
            let id = FamilyId::ALL[i % FamilyId::ALL.len()];
            random_family(id, half_extent, rng.gen())
        })
        .collect())
}

/// Sampled corpus with exact derivatives, reproducible from `seed`.
pub fn corpus_generate(seed: u64, count: usize, grid: &GridSpec) -> Result<Vec<CorpusMember>> {
    corpus_families(seed, count, grid.half_extents())?
        .iter()
        .map(|s| CorpusMember::build(s, grid))
        .collect()
}

/// One grid plus its member families; `samples` is filled for dumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSet {
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub members: Vec<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<GridFunction>>,
}

impl CorpusSet {
    pub fn generate(seed: u64, count: usize, grid: GridSpec) -> Result<Self> {
        let members = corpus_families(seed, count, grid.half_extents())?;
        Ok(CorpusSet {
            grid,
            seed: Some(seed),
            members,
            samples: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn with_samples(mut self) -> Result<Self> {
        let samples = self
            .members
            .iter()
            .map(|m| sample(m, &self.grid))
            .collect::<Result<Vec<_>>>()?;
        self.samples = Some(samples);
        Ok(self)
    }

    pub fn build(&self, grid: &GridSpec) -> Result<Vec<CorpusMember>> {
        self.members.iter().map(|m| CorpusMember::build(m, grid)).collect()
    }
}

/// Versioned corpus file: one [`CorpusSet`] per dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusFile {
    pub format_version: u32,
    pub sets: Vec<CorpusSet>,
}

impl CorpusFile {
    pub fn new(sets: Vec<CorpusSet>) -> Self {
        CorpusFile {
            format_version: FORMAT_VERSION,
            sets,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CorpusFile = serde_json::from_str(text)?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported corpus format_version {}",
                file.format_version
            )));
        }
        for set in &file.sets {
            set.grid.validate()?;
            for m in &set.members {
                check_dims(&m.family, &set.grid)?;
            }
        }
        Ok(file)
    }

    pub fn set_for_dim(&self, dim: usize) -> Option<&CorpusSet> {
        self.sets.iter().find(|s| s.dim() == dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(width: f64) -> FamilySpec {
        Family::Gaussian {
            amplitude: 1.0,
            center: vec![0.0],
            width,
        }
        .into()
    }

    #[test]
    fn grid_geometry() {
        let g = GridSpec::cube(2, 8.0, 1024).unwrap();
        assert_eq!(g.spacing(0), 16.0 / 1024.0);
        assert_eq!(g.node(0, 512), 0.0);
        assert_eq!(g.len(), 1024 * 1024);
        assert!((g.cell_volume() - (1.0 / 64.0f64).powi(2)).abs() < 1e-18);
        assert!(GridSpec::cube(1, 1.0, 7).is_err());
        assert!(GridSpec::cube(4, 1.0, 8).is_err());
        assert!(GridSpec::cube(1, -1.0, 8).is_err());
    }

    #[test]
    fn gaussian_samples() {
        let grid = GridSpec::cube(1, 8.0, 1024).unwrap();
        let f = sample(&g1(1.0), &grid).unwrap();
        let v = f.as_real().unwrap();
        for i in [0, 100, 512, 700] {
            let x = grid.node(0, i);
            assert_eq!(v[i], (-PI * x * x).exp());
        }
    }

    #[test]
    fn zero_amplitude_is_zero() {
        let grid = GridSpec::cube(2, 2.0, 16).unwrap();
        let spec = g1(1.0).family.scaled(0.0);
        let spec = Family::Gaussian {
            amplitude: spec.amplitude(),
            center: vec![0.0, 0.0],
            width: 1.0,
        };
        let f = sample(&spec.into(), &grid).unwrap();
        assert!(f.as_real().unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn tail_check_rejects_wide_gaussian() {
        let grid = GridSpec::cube(1, 2.0, 64).unwrap();
        assert!(matches!(sample(&g1(2.0), &grid), Err(Error::TailMass { .. })));
        let bump: FamilySpec = Family::TensorBump {
            amplitude: 1.0,
            center: vec![1.5],
            radii: vec![1.0],
        }
        .into();
        assert!(sample(&bump, &grid).is_err());
    }

    #[test]
    fn gaussian_derivative_closed_form() {
        let grid = GridSpec::cube(1, 8.0, 256).unwrap();
        let d = derivative(&g1(1.0), 0, &grid).unwrap();
        for (i, v) in d.as_real().unwrap().iter().enumerate() {
            let x = grid.node(0, i);
            assert!((v - (-2.0 * PI * x * (-PI * x * x).exp())).abs() < 1e-15);
        }
    }

    #[test]
    fn finite_difference_exact_on_linear() {
        let grid = GridSpec::cube(2, 1.0, 8).unwrap();
        let f = GridFunction::from_fn(grid.clone(), |x| 3.0 * x[0] - 2.0 * x[1] + 1.0).unwrap();
        let d0 = finite_difference_derivative(&f, 0).unwrap();
        let d1 = finite_difference_derivative(&f, 1).unwrap();
        assert!(d0.as_real().unwrap().iter().all(|v| (v - 3.0).abs() < 1e-12));
        assert!(d1.as_real().unwrap().iter().all(|v| (v + 2.0).abs() < 1e-12));
        let c = GridFunction::from_fn(grid, |_| 4.0).unwrap();
        let dc = finite_difference_derivative(&c, 1).unwrap();
        assert!(dc.as_real().unwrap().iter().all(|v| v.abs() < 1e-12));
        let tiny = GridFunction::zeros(GridSpec::cube(1, 1.0, 2).unwrap());
        assert!(finite_difference_derivative(&tiny, 0).is_err());
    }

    #[test]
    fn dilation_matches_pointwise() {
        let grid = GridSpec::cube(2, 4.0, 16).unwrap();
        for (i, id) in FamilyId::ALL.iter().enumerate() {
            let spec = random_family(*id, grid.half_extents(), 100 + i as u64);
            let d = spec.family.dilated(2.0);
            for k in (0..grid.len()).step_by(7) {
                let x = grid.coords(k);
                let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
                assert!((d.value(&x) - spec.family.value(&x2)).abs() < 1e-12, "{id:?}");
            }
        }
    }

    #[test]
    fn corpus_is_deterministic_and_mixed() {
        let grid = GridSpec::cube(2, 4.0, 32).unwrap();
        let a = corpus_generate(7, 10, &grid).unwrap();
        let b = corpus_generate(7, 10, &grid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.spec, y.spec);
            assert_eq!(x.f, y.f);
            assert_eq!(x.derivatives, y.derivatives);
        }
        let ids: std::collections::HashSet<_> = a.iter().map(|m| m.spec.family.id()).collect();
        assert_eq!(ids.len(), 6);
        assert!(corpus_generate(7, 0, &grid).is_err());
    }

    #[test]
    fn corpus_file_roundtrip() {
        let set = CorpusSet::generate(3, 4, GridSpec::cube(1, 8.0, 64).unwrap()).unwrap();
        let file = CorpusFile::new(vec![set.with_samples().unwrap()]);
        let text = serde_json::to_string(&file).unwrap();
        let back = CorpusFile::from_json(&text).unwrap();
        assert_eq!(back, file);
    }
}
