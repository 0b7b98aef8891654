//! Fourier transform with `f̂(ξ) = ∫ f(x) e^{-2πi x·ξ} dx`, spectral
//! multipliers (Riesz, Poisson), maximal functions, and the frequency-side
//! functionals: slab suprema, spherical and cubic shell sums, weighted
//! integrals of `|f̂|`.
//!
//! Nodes `x_j = -L + jh` pair with dual nodes `ξ_k = k/(2L)`,
//! `k = -N/2, …, N/2 - 1`, and the dual grid is itself a centered
//! [`GridSpec`] with half extent `N/(4L)`. Then
//! `f̂(ξ_k) = h^n ∏(-1)^{k_a} DFT[(-1)^j f](k + N/2)` is the rectangle rule for
//! the continuous transform, and the inverse uses `Δξ = 1/(2L)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gridfn::{strides, GridFunction, GridSpec, Kind, Values};
use crate::quad;
use crate::rearrange::DecreasingProfile;

/// Samples of `f̂` on the dual grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFunction {
    grid: GridSpec,
    values: Vec<Complex64>,
}

fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let st = strides(shape);
    for (axis, &n) in shape.iter().enumerate() {
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let stride = st[axis];
        let outer = data.len() / (n * stride);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * n * stride + inner;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

/// `∏_a (-1)^{i_a}` for the multi-index of `linear`.
fn checker(shape: &[usize], linear: usize) -> f64 {
    let mut rem = linear;
    let mut parity = 0;
    for &n in shape.iter().rev() {
        parity += rem % n;
        rem /= n;
    }
    if parity % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `∏_a (-1)^{N_a/2}`.
fn half_sign(shape: &[usize]) -> f64 {
    if shape.iter().map(|n| n / 2).sum::<usize>() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl SpectralFunction {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(invalid("spectral sample count does not match the dual grid"));
        }
        Ok(SpectralFunction { grid, values })
    }

    /// Synthetic spectrum `g(ξ)` on the grid dual to `spatial`.
    pub fn from_fn(spatial: &GridSpec, mut g: impl FnMut(&[f64]) -> Complex64) -> Self {
        let grid = spatial.dual();
        let values = (0..grid.len()).map(|i| g(&grid.coords(i))).collect();
        SpectralFunction { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// The spatial grid this spectrum belongs to.
    pub fn spatial_grid(&self) -> GridSpec {
        self.grid.dual()
    }

    /// Dual spacing `1/(2L)` along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.grid.spacing(axis)
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        SpectralFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    /// Value at `ξ = 0`.
    pub fn at_origin(&self) -> Complex64 {
        let idx: usize = self
            .grid
            .points()
            .iter()
            .zip(self.grid.strides())
            .map(|(n, s)| n / 2 * s)
            .sum();
        self.values[idx]
    }

    /// Multiplies by `m(ξ)`.
    pub fn multiplied(&self, m: impl Fn(&[f64]) -> Complex64 + Sync) -> Self {
        let values = self
            .values
            .par_iter()
            .enumerate()
            .map(|(i, z)| z * m(&self.grid.coords(i)))
            .collect();
        SpectralFunction {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Inverse transform back to the spatial grid.
    pub fn inverse(&self) -> GridFunction {
        let spatial = self.spatial_grid();
        let shape = self.grid.points().to_vec();
        let hs = half_sign(&shape);
        let mut data: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| z * (checker(&shape, i) * hs))
            .collect();
        fft_nd(&mut data, &shape, true);
        let dxi: f64 = self.grid.cell_volume();
        for (i, z) in data.iter_mut().enumerate() {
            *z *= dxi * checker(&shape, i);
        }
        GridFunction::complex(spatial, data).expect("finite inverse transform")
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_real(&self) -> GridFunction {
        let g = self.inverse();
        let re = match g.values() {
            Values::Complex(v) => v.iter().map(|z| z.re).collect(),
            Values::Real(v) => v.clone(),
        };
        GridFunction::real(g.grid().clone(), re).expect("finite")
    }

    /// Multilinear interpolation of `|f̂|`; 0 outside the sampled box.
    pub fn abs_interpolator(&self) -> AbsInterpolator {
        AbsInterpolator {
            grid: self.grid.clone(),
            abs: self.abs(),
        }
    }
}

/// `|f̂|` with multilinear interpolation between dual nodes.
#[derive(Clone, Debug)]
pub struct AbsInterpolator {
    grid: GridSpec,
    abs: Vec<f64>,
}

impl AbsInterpolator {
    pub fn from_fn(spatial: &GridSpec, g: impl Fn(&[f64]) -> f64) -> Self {
        let grid = spatial.dual();
        let abs = (0..grid.len()).map(|i| g(&grid.coords(i)).abs()).collect();
        AbsInterpolator { grid, abs }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.abs
    }

    pub fn scaled(&self, c: f64) -> Self {
        AbsInterpolator {
            grid: self.grid.clone(),
            abs: self.abs.iter().map(|v| v * c.abs()).collect(),
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        let n = self.grid.dim();
        let st = self.grid.strides();
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..n {
            let u = (xi[a] + self.grid.half_extents()[a]) / self.grid.spacing(a);
            let pts = self.grid.points()[a];
            if !(u >= 0.0) || u > (pts - 1) as f64 {
                return 0.0;
            }
            let i = (u.floor() as usize).min(pts - 2);
            base[a] = i;
            frac[a] = u - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = 0;
            for a in 0..n {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                idx += (base[a] + bit) * st[a];
            }
            if w != 0.0 {
                acc += w * self.abs[idx];
            }
        }
        acc
    }

    /// Largest radius fully covered by the sampled box.
    pub fn max_radius(&self) -> f64 {
        (0..self.grid.dim())
            .map(|a| (self.grid.points()[a] / 2 - 1) as f64 * self.grid.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.grid.dim()).map(|a| self.grid.spacing(a)).fold(f64::INFINITY, f64::min)
    }
}

/// `f̂` on the dual grid.
pub fn transform(f: &GridFunction) -> SpectralFunction {
    let grid = f.grid();
    let shape = grid.points().to_vec();
    let mut data: Vec<Complex64> = f
        .to_complex_vec()
        .into_iter()
        .enumerate()
        .map(|(i, z)| z * checker(&shape, i))
        .collect();
    fft_nd(&mut data, &shape, false);
    let scale = grid.cell_volume() * half_sign(&shape);
    for (i, z) in data.iter_mut().enumerate() {
        *z *= scale * checker(&shape, i);
    }
    SpectralFunction {
        grid: grid.dual(),
        values: data,
    }
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn keep_kind(kind: Kind, g: &SpectralFunction) -> GridFunction {
    match kind {
        Kind::Real => g.inverse_real(),
        Kind::Complex => g.inverse(),
    }
}

/// Riesz multiplier `-iξ_j/|ξ|`, 0 at the origin.
pub fn riesz_multiplier(xi: &[f64], j: usize) -> Complex64 {
    let r = norm(xi);
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, -xi[j] / r)
    }
}

/// `R_j f`. Real input gives the real part of the inverse transform.
pub fn riesz(f: &GridFunction, j: usize) -> Result<GridFunction> {
    if j >= f.dim() {
        return Err(invalid(format!("Riesz index {j} out of range")));
    }
    Ok(keep_kind(f.kind(), &transform(f).multiplied(|xi| riesz_multiplier(xi, j))))
}

/// `D_j f` through the multiplier `2πiξ_j`.
pub fn spectral_derivative(f: &GridFunction, j: usize) -> Result<GridFunction> {
    if j >= f.dim() {
        return Err(invalid(format!("axis {j} out of range")));
    }
    Ok(keep_kind(
        f.kind(),
        &transform(f).multiplied(|xi| Complex64::new(0.0, 2.0 * PI * xi[j])),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Value {
    pub value: f64,
    /// `|∫f| / ‖f‖_1`.
    pub mean_ratio: f64,
    /// Set when `mean_ratio` exceeds 1e-6.
    pub not_mean_zero: bool,
}

/// `‖f‖_1 + Σ_j ‖R_j f‖_1` on the truncated domain.
pub fn h1_norm(f: &GridFunction) -> Result<H1Value> {
    let l1 = crate::norms::lp_norm(f, 1.0);
    let spec = transform(f);
    let mut value = l1;
    for j in 0..f.dim() {
        let r = keep_kind(f.kind(), &spec.multiplied(|xi| riesz_multiplier(xi, j)));
        value += crate::norms::lp_norm(&r, 1.0);
    }
    let mean_ratio = if l1 == 0.0 { 0.0 } else { f.integral().norm() / l1 };
    Ok(H1Value {
        value,
        mean_ratio,
        not_mean_zero: mean_ratio > 1e-6,
    })
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("Poisson parameter t = {t} must be positive")))
    }
}

/// `P_t ∗ f`.
pub fn poisson(f: &GridFunction, t: f64) -> Result<GridFunction> {
    check_t(t)?;
    Ok(keep_kind(
        f.kind(),
        &transform(f).multiplied(|xi| Complex64::new((-2.0 * PI * norm(xi) * t).exp(), 0.0)),
    ))
}

/// `∂_t (P_t ∗ f)`.
pub fn poisson_t_derivative(f: &GridFunction, t: f64) -> Result<GridFunction> {
    check_t(t)?;
    Ok(keep_kind(
        f.kind(),
        &transform(f).multiplied(|xi| {
            let r = norm(xi);
            Complex64::new(-2.0 * PI * r * (-2.0 * PI * r * t).exp(), 0.0)
        }),
    ))
}

/// 64-level geometric grid on `[h_min/4, 8 L_max]`.
pub fn default_t_grid(grid: &GridSpec) -> Vec<f64> {
    let h = grid.spacings().into_iter().fold(f64::INFINITY, f64::min);
    let l = grid.half_extents().iter().cloned().fold(0.0, f64::max);
    geometric_grid(h / 4.0, 8.0 * l, 64)
}

pub fn geometric_grid(a: f64, b: f64, levels: usize) -> Vec<f64> {
    if levels == 1 {
        return vec![a];
    }
    (0..levels)
        .map(|i| a * (b / a).powf(i as f64 / (levels - 1) as f64))
        .collect()
}

/// Which harmonic extension a maximal function is taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    /// `u(x,t) = P_t ∗ f`.
    Poisson,
    /// `∂u/∂t`.
    TimeDerivative,
}

/// `|u(·, t)|` at every level of `t_grid`.
pub fn extension_levels(f: &GridFunction, t_grid: &[f64], ext: Extension) -> Result<Vec<Vec<f64>>> {
    if t_grid.is_empty() {
        return Err(invalid("empty t-grid"));
    }
    for &t in t_grid {
        check_t(t)?;
    }
    let spec = transform(f);
    let real = f.kind() == Kind::Real;
    Ok(t_grid
        .par_iter()
        .map(|&t| {
            let g = spec.multiplied(|xi| {
                let r = norm(xi);
                let decay = (-2.0 * PI * r * t).exp();
                match ext {
                    Extension::Poisson => Complex64::new(decay, 0.0),
                    Extension::TimeDerivative => Complex64::new(-2.0 * PI * r * decay, 0.0),
                }
            });
            let u = g.inverse();
            match u.values() {
                Values::Complex(v) if real => v.iter().map(|z| z.re.abs()).collect(),
                _ => u.abs_values(),
            }
        })
        .collect())
}

/// `N_v f(x) = max_t |P_t ∗ f(x)|` over the t-grid.
pub fn vertical_maximal(f: &GridFunction, t_grid: &[f64]) -> Result<GridFunction> {
    let levels = extension_levels(f, t_grid, Extension::Poisson)?;
    GridFunction::real(f.grid().clone(), vertical_from_levels(&levels))
}

pub fn vertical_from_levels(levels: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0f64; levels[0].len()];
    for lv in levels {
        for (o, v) in out.iter_mut().zip(lv) {
            *o = o.max(*v);
        }
    }
    out
}

/// Max over `[i-w, i+w]` along each row of length `n` (rows contiguous).
fn sliding_max_rows(data: &[f64], n: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    let mut dq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for (row, orow) in data.chunks(n).zip(out.chunks_mut(n)) {
        dq.clear();
        let mut next = 0usize;
        for i in 0..n {
            let hi = (i + w).min(n - 1);
            while next <= hi {
                while dq.back().is_some_and(|&b| row[b] <= row[next]) {
                    dq.pop_back();
                }
                dq.push_back(next);
                next += 1;
            }
            while dq.front().is_some_and(|&f| f + w < i) {
                dq.pop_front();
            }
            orow[i] = row[*dq.front().unwrap()];
        }
    }
    out
}

/// `max_{|y-x| ≤ r} v(y)` over grid nodes `y`, for n = 1 or 2.
pub fn disk_max(grid: &GridSpec, v: &[f64], r: f64) -> Result<Vec<f64>> {
    let n = grid.dim();
    let sp = grid.spacings();
    let diag = grid.half_extents().iter().map(|l| 4.0 * l * l).sum::<f64>().sqrt();
    if r >= diag {
        let m = v.iter().cloned().fold(0.0, f64::max);
        return Ok(vec![m; v.len()]);
    }
    match n {
        1 => Ok(sliding_max_rows(v, grid.points()[0], (r / sp[0] + 1e-9).floor() as usize)),
        2 => {
            let (ny, nx) = (grid.points()[0], grid.points()[1]);
            let mut cache: HashMap<usize, Vec<f64>> = HashMap::new();
            let mut out = vec![0.0f64; v.len()];
            let dmax = ((r / sp[0] + 1e-9).floor() as usize).min(ny - 1);
            for d in 0..=dmax {
                let rem = r * r - (d as f64 * sp[0]).powi(2);
                let w = ((rem.max(0.0).sqrt() / sp[1] + 1e-9).floor() as usize).min(nx - 1);
                let rows = cache.entry(w).or_insert_with(|| sliding_max_rows(v, nx, w));
                for y in 0..ny {
                    for src in [y.checked_sub(d), (y + d < ny).then_some(y + d)].into_iter().flatten() {
                        let (o, s) = (&mut out[y * nx..(y + 1) * nx], &rows[src * nx..(src + 1) * nx]);
                        for (a, b) in o.iter_mut().zip(s) {
                            *a = a.max(*b);
                        }
                    }
                }
            }
            Ok(out)
        }
        _ => Err(Error::Dimension {
            expected: "n <= 2 (non-tangential maximal function)".into(),
            got: n,
        }),
    }
}

/// `max_{t ∈ t_grid} max_{|y - x| ≤ t} level_t(y)`.
pub fn nontangential_from_levels(grid: &GridSpec, t_grid: &[f64], levels: &[Vec<f64>]) -> Result<Vec<f64>> {
    let per_level = t_grid
        .par_iter()
        .zip(levels)
        .map(|(&t, lv)| disk_max(grid, lv, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(vertical_from_levels(&per_level))
}

/// Non-tangential maximal function over the cone `|x - y| ≤ t` (n ≤ 2).
pub fn nontangential_maximal(f: &GridFunction, t_grid: &[f64]) -> Result<GridFunction> {
    let levels = extension_levels(f, t_grid, Extension::Poisson)?;
    GridFunction::real(f.grid().clone(), nontangential_from_levels(f.grid(), t_grid, &levels)?)
}

/// `Ñf(x) = sup_{Γ(x)} |∂u/∂t|` on the sampled cone (n ≤ 2).
pub fn nontangential_maximal_dt(f: &GridFunction, t_grid: &[f64]) -> Result<GridFunction> {
    let levels = extension_levels(f, t_grid, Extension::TimeDerivative)?;
    GridFunction::real(f.grid().clone(), nontangential_from_levels(f.grid(), t_grid, &levels)?)
}

// ---------------------------------------------------------------------------
// Slab suprema

#[derive(Clone, Debug, PartialEq)]
pub struct SlabSup {
    pub values: GridFunction,
    /// True when no dual node satisfies `|ξ_j| ≥ t`.
    pub empty: bool,
}

fn dual_line_index(spec: &SpectralFunction, axis: usize) -> (usize, usize, usize) {
    let n = spec.grid.points()[axis];
    let stride = spec.grid.strides()[axis];
    (n, stride, spec.values.len() / (n * stride))
}

/// `F_{t,j}(ξ̂_j) = max_{|ξ_j| ≥ t} |f̂(ξ)|` over dual nodes.
pub fn slab_sup(spec: &SpectralFunction, axis: usize, t: f64) -> Result<SlabSup> {
    let dim = spec.dim();
    if dim < 2 || axis >= dim {
        return Err(invalid("slab suprema need n >= 2 and a valid axis"));
    }
    if !(t >= 0.0) {
        return Err(invalid("t must be >= 0"));
    }
    let (n, stride, outer) = dual_line_index(spec, axis);
    let dxi = spec.spacing(axis);
    let keep: Vec<usize> = (0..n)
        .filter(|&i| ((i as f64 - (n / 2) as f64) * dxi).abs() >= t * (1.0 - 1e-12))
        .collect();
    let abs = spec.abs();
    let mut out = vec![0.0f64; outer * stride];
    for o in 0..outer {
        for inner in 0..stride {
            let mut m = 0.0f64;
            for &i in &keep {
                m = m.max(abs[o * n * stride + i * stride + inner]);
            }
            out[o * stride + inner] = m;
        }
    }
    Ok(SlabSup {
        values: GridFunction::real(spec.grid.without_axis(axis)?, out)?,
        empty: keep.is_empty(),
    })
}

/// `∫_0^∞ F**_{t,j}(t^{n-1}) dt` from the spectrum.
///
/// `F_{t,j}` only changes when `t` crosses `m·Δξ`, so the integral is split
/// into the intervals `((m-1)Δξ, mΔξ]`, each integrated by Gauss–Legendre;
/// beyond the last dual node the slab supremum vanishes.
pub fn sup_integral_spectral(spec: &SpectralFunction, axis: usize) -> Result<f64> {
    let dim = spec.dim();
    if dim < 2 || axis >= dim {
        return Err(invalid("the slab-supremum functional needs n >= 2 and a valid axis"));
    }
    let (n, stride, outer) = dual_line_index(spec, axis);
    let dxi = spec.spacing(axis);
    let abs = spec.abs();
    let cell = spec.grid.cell_volume() / dxi;
    let half = n / 2;
    let mut running = vec![0.0f64; outer * stride];
    let mut total = 0.0;
    let exponent = (dim - 1) as i32;
    // From the outermost shell inward: index i and its mirror share |ξ_j|.
    for m in (1..=half).rev() {
        for idx in [half + m, half.wrapping_sub(m)] {
            if idx >= n {
                continue;
            }
            for o in 0..outer {
                for inner in 0..stride {
                    let v = abs[o * n * stride + idx * stride + inner];
                    let r = &mut running[o * stride + inner];
                    *r = r.max(v);
                }
            }
        }
        let prof = DecreasingProfile::from_samples(running.clone(), cell);
        if prof.is_zero() {
            continue;
        }
        let (a, b) = ((m - 1) as f64 * dxi, m as f64 * dxi);
        let g = |t: f64| prof.double_star(t.powi(exponent)).unwrap_or(0.0);
        let mid = 0.5 * (a + b);
        total += quad::integrate(a, mid, g) + quad::integrate(mid, b, g);
    }
    Ok(total)
}

pub fn sup_integral_functional(f: &GridFunction, axis: usize) -> Result<f64> {
    sup_integral_spectral(&transform(f), axis)
}

// ---------------------------------------------------------------------------
// Spheres and shells

/// Angular rule for spheres `S_r` plus the number of radii per dyadic shell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellQuadrature {
    pub dim: usize,
    /// Unit-sphere nodes and weights (weights sum to `|S^{n-1}|`).
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    pub radii_per_shell: usize,
}

impl ShellQuadrature {
    /// Trapezoid with `a` points (n = 2) or Gauss–Legendre in `cos θ` times a
    /// trapezoid in `φ` (n = 3); n = 1 uses the two points `±1`.
    pub fn new(dim: usize, a_theta: usize, a_phi: usize, radii_per_shell: usize) -> Result<Self> {
        if radii_per_shell < 8 {
            return Err(invalid("need at least 8 radii per shell"));
        }
        let (nodes, weights) = match dim {
            1 => (vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]),
            2 => {
                if a_theta < 8 {
                    return Err(invalid("need at least 8 angular points"));
                }
                let w = 2.0 * PI / a_theta as f64;
                let nodes = (0..a_theta)
                    .map(|i| {
                        let th = w * (i as f64 + 0.5);
                        vec![th.cos(), th.sin()]
                    })
                    .collect();
                (nodes, vec![w; a_theta])
            }
            3 => {
                if a_theta < 8 || a_phi < 8 {
                    return Err(invalid("need at least 8 points per angular direction"));
                }
                let (x, wx) = quad::gauss_legendre(a_theta);
                let wp = 2.0 * PI / a_phi as f64;
                let mut nodes = Vec::new();
                let mut weights = Vec::new();
                for (c, w) in x.iter().zip(&wx) {
                    let s = (1.0 - c * c).max(0.0).sqrt();
                    for k in 0..a_phi {
                        let ph = wp * (k as f64 + 0.5);
                        nodes.push(vec![s * ph.cos(), s * ph.sin(), *c]);
                        weights.push(w * wp);
                    }
                }
                (nodes, weights)
            }
            _ => return Err(invalid(format!("no sphere rule for dimension {dim}"))),
        };
        Ok(ShellQuadrature {
            dim,
            nodes,
            weights,
            radii_per_shell,
        })
    }

    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            3 => Self::new(3, 24, 48, 16),
            d => Self::new(d, 96, 0, 16),
        }
    }

    /// Sum of the weights of `S_r`.
    pub fn surface_measure(&self, r: f64) -> f64 {
        self.weights.iter().sum::<f64>() * r.powi(self.dim as i32 - 1)
    }
}

/// `∫_{S_r} |f̂| dσ`.
pub fn sphere_integral(f: &AbsInterpolator, r: f64, quad: &ShellQuadrature) -> Result<f64> {
    if quad.dim != f.grid().dim() {
        return Err(Error::Dimension {
            expected: format!("{}-D spectrum", quad.dim),
            got: f.grid().dim(),
        });
    }
    if !(r >= 0.0) || r > f.max_radius() * (1.0 + 1e-12) {
        return Err(invalid(format!("radius {r} outside the dual grid")));
    }
    let scale = r.powi(quad.dim as i32 - 1);
    let mut xi = vec![0.0; quad.dim];
    let mut s = 0.0;
    for (u, w) in quad.nodes.iter().zip(&quad.weights) {
        for (x, c) in xi.iter_mut().zip(u) {
            *x = r * c;
        }
        s += w * f.eval(&xi);
    }
    Ok(s * scale)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellSum {
    pub value: f64,
    pub shells_used: Vec<i32>,
    /// Shells between one dual cell/4 and the grid extent that are not fully
    /// resolvable and were left out.
    pub shells_skipped: usize,
}

/// Dyadic shells `k` with `2^k ≥ Δξ` and `2^{k+1} ≤ r_max`.
pub fn resolvable_shells(f: &AbsInterpolator) -> (Vec<i32>, usize) {
    let dxi = f.min_spacing();
    let rmax = f.max_radius();
    let lo = (dxi / 4.0).log2().floor() as i32;
    let hi = rmax.log2().ceil() as i32;
    let mut used = Vec::new();
    let mut skipped = 0;
    for k in lo..=hi {
        let a = 2f64.powi(k);
        if a >= dxi * (1.0 - 1e-12) && 2.0 * a <= rmax * (1.0 + 1e-12) {
            used.push(k);
        } else if a <= rmax {
            skipped += 1;
        }
    }
    (used, skipped)
}

/// `max` of the sphere integral over `M` geometric radii in `[2^k, 2^{k+1}]`.
pub fn shell_sup(f: &AbsInterpolator, k: i32, quad: &ShellQuadrature) -> Result<f64> {
    let a = 2f64.powi(k);
    let m = quad.radii_per_shell;
    let mut best = 0.0f64;
    for i in 0..m {
        let r = a * 2f64.powf(i as f64 / (m - 1) as f64);
        best = best.max(sphere_integral(f, r.min(f.max_radius()), quad)?);
    }
    Ok(best)
}

/// `Σ_k 2^{kw} sup_{2^k ≤ r ≤ 2^{k+1}} ∫_{S_r} |f̂| dσ` over resolvable shells.
pub fn dyadic_shell_sum(f: &AbsInterpolator, w: f64, quad: &ShellQuadrature) -> Result<ShellSum> {
    let (used, skipped) = resolvable_shells(f);
    let terms = used
        .par_iter()
        .map(|&k| Ok(2f64.powf(k as f64 * w) * shell_sup(f, k, quad)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ShellSum {
        value: terms.iter().sum(),
        shells_used: used,
        shells_skipped: skipped,
    })
}

/// Per-axis data for cube-face integrals: for each dual node index along
/// `axis`, the rectangle-rule integral of `|f̂|` over the face
/// `{|ξ_m| ≤ c, m ≠ axis}`.
fn face_integrals(abs: &[f64], grid: &GridSpec, axis: usize, c: f64) -> Vec<f64> {
    let n = grid.dim();
    let st = grid.strides();
    let pts = grid.points();
    let face_cell = grid.cell_volume() / grid.spacing(axis);
    let mut out = vec![0.0; pts[axis]];
    for (lin, v) in abs.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let mut inside = true;
        let mut ia = 0;
        for a in 0..n {
            let i = (lin / st[a]) % pts[a];
            if a == axis {
                ia = i;
            } else if grid.node(a, i).abs() > c * (1.0 + 1e-12) {
                inside = false;
                break;
            }
        }
        if inside {
            out[ia] += v * face_cell;
        }
    }
    out
}

fn nodes_in_band(grid: &GridSpec, axis: usize, lo: f64, hi: f64) -> Vec<usize> {
    (0..grid.points()[axis])
        .filter(|&i| {
            let x = grid.node(axis, i).abs();
            x >= lo * (1.0 - 1e-12) && x <= hi * (1.0 + 1e-12)
        })
        .collect()
}

/// Range of `k` for cube shells on this dual grid.
fn cube_k_range(grid: &GridSpec) -> (i32, i32) {
    let dxi = (0..grid.dim()).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
    let top = (0..grid.dim())
        .map(|a| (grid.points()[a] / 2) as f64 * grid.spacing(a))
        .fold(0.0, f64::max);
    ((dxi / 2.0).log2().floor() as i32, top.log2().ceil() as i32)
}

/// `Σ_j Σ_k 2^{k(2-n)} sup_{2^k ≤ |ξ_j| ≤ 2^{k+1}} ∫_{Q_k^{(j)}} |f̂| dξ̂_j`.
pub fn cube_shell_sum(spec: &SpectralFunction) -> Result<f64> {
    let grid = spec.grid();
    let n = grid.dim();
    if n < 2 {
        return Err(invalid("cube shells need n >= 2"));
    }
    let abs = spec.abs();
    let (k0, k1) = cube_k_range(grid);
    let mut total = 0.0;
    for k in k0..=k1 {
        let c = 2f64.powi(k);
        for j in 0..n {
            let band = nodes_in_band(grid, j, c, 2.0 * c);
            if band.is_empty() {
                continue;
            }
            let faces = face_integrals(&abs, grid, j, c);
            let sup = band.iter().map(|&i| faces[i]).fold(0.0, f64::max);
            total += 2f64.powf(k as f64 * (2.0 - n as f64)) * sup;
        }
    }
    Ok(total)
}

/// One shell of the comparison between cube-face suprema and `∫_{P_k}|f̂|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeShellTerm {
    pub k: i32,
    /// `Σ_j sup_{2^{k-1} ≤ |ξ_j| ≤ 2^k} ∫_{Q_k^{(j)}} |f̂|`.
    pub face_sup_sum: f64,
    /// `∫_{P_k} |f̂|`, `P_k = Q_k \ Q_{k-1}`.
    pub annulus_integral: f64,
    /// Largest dual measure of a band `{2^{k-1} ≤ |ξ_j| ≤ 2^k}`; tends to `2^k`.
    pub band_measure: f64,
}

impl CubeShellTerm {
    /// `face_sup_sum ≥ annulus_integral / band_measure` always holds.
    pub fn lower_bound(&self) -> f64 {
        if self.band_measure == 0.0 {
            0.0
        } else {
            self.annulus_integral / self.band_measure
        }
    }
}

/// Per-shell terms of the cube/annulus comparison.
pub fn cube_shell_terms(spec: &SpectralFunction) -> Result<Vec<CubeShellTerm>> {
    let grid = spec.grid();
    let n = grid.dim();
    if n < 2 {
        return Err(invalid("cube shells need n >= 2"));
    }
    let abs = spec.abs();
    let st = grid.strides();
    let (k0, k1) = cube_k_range(grid);
    let mut out = Vec::new();
    for k in (k0 + 1)..=k1 {
        let c = 2f64.powi(k);
        let mut face_sup_sum = 0.0;
        let mut band_measure = 0.0f64;
        for j in 0..n {
            let band = nodes_in_band(grid, j, c / 2.0, c);
            band_measure = band_measure.max(band.len() as f64 * grid.spacing(j));
            if band.is_empty() {
                continue;
            }
            let faces = face_integrals(&abs, grid, j, c);
            face_sup_sum += band.iter().map(|&i| faces[i]).fold(0.0, f64::max);
        }
        let cell = grid.cell_volume();
        let annulus_integral: f64 = abs
            .iter()
            .enumerate()
            .filter(|(lin, _)| {
                let m = (0..n)
                    .map(|a| grid.node(a, (lin / st[a]) % grid.points()[a]).abs())
                    .fold(0.0, f64::max);
                m > (c / 2.0) * (1.0 + 1e-12) && m <= c * (1.0 + 1e-12)
            })
            .map(|(_, v)| v * cell)
            .sum();
        out.push(CubeShellTerm {
            k,
            face_sup_sum,
            annulus_integral,
            band_measure,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedIntegral {
    pub value: f64,
    /// Part of `value` from nodes with `|ξ| ≤ 2Δξ`.
    pub near_origin: f64,
}

/// `Σ_{ξ ≠ 0} |f̂(ξ)| |ξ|^γ Δξ^n` over the punctured dual grid.
pub fn weighted_fourier_integral(spec: &SpectralFunction, gamma: f64) -> WeightedIntegral {
    let grid = spec.grid();
    let cell = grid.cell_volume();
    let dxi = (0..grid.dim()).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
    let mut value = 0.0;
    let mut near = 0.0;
    for (i, z) in spec.values().iter().enumerate() {
        let r = norm(&grid.coords(i));
        if r == 0.0 {
            continue;
        }
        let term = z.norm() * r.powf(gamma) * cell;
        value += term;
        if r <= 2.0 * dxi * (1.0 + 1e-12) {
            near += term;
        }
    }
    WeightedIntegral {
        value,
        near_origin: near,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(dim: usize, l: f64, n: usize) -> GridFunction {
        GridFunction::from_fn(GridSpec::cube(dim, l, n).unwrap(), |x| {
            (-PI * x.iter().map(|v| v * v).sum::<f64>()).exp()
        })
        .unwrap()
    }

    #[test]
    fn gaussian_is_self_dual() {
        let f = gauss(1, 8.0, 512);
        let s = transform(&f);
        let err = (0..s.grid().len())
            .map(|i| {
                let xi = s.grid().coords(i)[0];
                (s.values()[i] - Complex64::new((-PI * xi * xi).exp(), 0.0)).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!((s.at_origin() - f.integral()).norm() < 1e-10);
    }

    #[test]
    fn inverse_roundtrip_and_parseval() {
        let grid = GridSpec::cube(2, 3.0, 16).unwrap();
        let f = GridFunction::from_fn(grid, |x| (-(x[0] - 0.3).powi(2) - 2.0 * x[1] * x[1]).exp() * (1.0 + x[0])).unwrap();
        let s = transform(&f);
        let back = s.inverse_real();
        for (a, b) in back.as_real().unwrap().iter().zip(f.as_real().unwrap()) {
            assert!((a - b).abs() < 1e-13);
        }
        let e: f64 = s.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * s.grid().cell_volume();
        let l2 = crate::norms::lp_norm(&f, 2.0).powi(2);
        assert!((e / l2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn translation_phase() {
        let grid = GridSpec::cube(1, 8.0, 256).unwrap();
        let a = 5.0 * grid.spacing(0);
        let f = GridFunction::from_fn(grid.clone(), |x| (-PI * x[0] * x[0]).exp()).unwrap();
        let g = GridFunction::from_fn(grid, |x| (-PI * (x[0] - a).powi(2)).exp()).unwrap();
        let (sf, sg) = (transform(&f), transform(&g));
        for i in 0..sf.grid().len() {
            let xi = sf.grid().coords(i)[0];
            let want = sf.values()[i] * Complex64::from_polar(1.0, -2.0 * PI * a * xi);
            assert!((sg.values()[i] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn sliding_max_matches_brute_force() {
        let v: Vec<f64> = (0..37).map(|i| ((i * 7919) % 31) as f64).collect();
        for w in [0, 1, 3, 40] {
            let got = sliding_max_rows(&v, 37, w);
            for i in 0..37usize {
                let lo = i.saturating_sub(w);
                let hi = (i + w).min(36);
                let want = v[lo..=hi].iter().cloned().fold(f64::MIN, f64::max);
                assert_eq!(got[i], want);
            }
        }
    }

    #[test]
    fn disk_max_matches_brute_force() {
        let grid = GridSpec::cube(2, 1.0, 12).unwrap();
        let v: Vec<f64> = (0..144).map(|i| ((i * 37) % 23) as f64).collect();
        let r = 0.41;
        let got = disk_max(&grid, &v, r).unwrap();
        let h = grid.spacing(0);
        for y in 0..12i64 {
            for x in 0..12i64 {
                let mut m = 0.0f64;
                for yy in 0..12i64 {
                    for xx in 0..12i64 {
                        let d = (((yy - y) as f64 * h).powi(2) + ((xx - x) as f64 * h).powi(2)).sqrt();
                        if d <= r + 1e-12 {
                            m = m.max(v[(yy * 12 + xx) as usize]);
                        }
                    }
                }
                assert_eq!(got[(y * 12 + x) as usize], m);
            }
        }
    }

    #[test]
    fn sphere_weights() {
        let q3 = ShellQuadrature::default_for(3).unwrap();
        assert!((q3.surface_measure(1.0) - 4.0 * PI).abs() < 1e-12);
        let q2 = ShellQuadrature::default_for(2).unwrap();
        assert!((q2.surface_measure(2.0) - 4.0 * PI).abs() < 1e-12);
        let grid = GridSpec::cube(3, 2.0, 32).unwrap();
        let one = AbsInterpolator::from_fn(&grid, |_| 1.0);
        let v = sphere_integral(&one, 1.0, &q3).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-6);
        assert!(sphere_integral(&one, 100.0, &q3).is_err());
    }

    #[test]
    fn slab_sup_separable() {
        let grid = GridSpec::cube(2, 2.0, 16).unwrap();
        let a = |x: f64| 1.0 / (1.0 + x * x);
        let b = |y: f64| (-y * y).exp();
        let s = SpectralFunction::from_fn(&grid, |xi| Complex64::new(a(xi[0]) * b(xi[1]), 0.0));
        let t = 0.5;
        let got = slab_sup(&s, 0, t).unwrap();
        let dual = s.grid();
        let amax = (0..16)
            .map(|i| dual.node(0, i))
            .filter(|x| x.abs() >= t)
            .map(a)
            .fold(0.0, f64::max);
        for (i, v) in got.values.as_real().unwrap().iter().enumerate() {
            assert!((v - amax * b(dual.node(1, i))).abs() < 1e-15);
        }
        assert!(slab_sup(&s, 0, 100.0).unwrap().empty);
    }
}
