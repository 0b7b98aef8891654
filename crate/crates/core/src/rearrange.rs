//! Nonincreasing rearrangements of step functions.
//!
//! A grid function is a step function whose samples each occupy one cell, so
//! its rearrangement is obtained exactly by sorting `|f|` in descending order
//! and laying the cells end to end on `(0, ∞)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gridfn::GridFunction;

/// Right-continuous nonincreasing step function on `(0, ∞)`:
/// `f*(t) = values[m]` on `[breaks[m-1], breaks[m])` (with `breaks[-1] = 0`),
/// and 0 for `t ≥ breaks.last()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct DecreasingProfile {
    breaks: Vec<f64>,
    values: Vec<f64>,
    /// `prefix[m] = ∫_0^{breaks[m]} f*`.
    prefix: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawProfile> for DecreasingProfile {
    type Error = Error;
    fn try_from(raw: RawProfile) -> Result<Self> {
        DecreasingProfile::from_runs(raw.breakpoints, raw.values)
    }
}

impl From<DecreasingProfile> for RawProfile {
    fn from(p: DecreasingProfile) -> Self {
        RawProfile {
            breakpoints: p.breaks,
            values: p.values,
        }
    }
}

impl DecreasingProfile {
    /// Profile from explicit runs. Adjacent runs with equal values are merged
    /// and zero-valued runs dropped.
    pub fn from_runs(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() {
            return Err(invalid("breakpoints and values differ in length"));
        }
        let mut prev_t = 0.0;
        let mut prev_v = f64::INFINITY;
        for (&t, &v) in breaks.iter().zip(&values) {
            if !(t > prev_t && t.is_finite()) {
                return Err(invalid("breakpoints must be finite and strictly increasing from 0"));
            }
            if !(v >= 0.0 && v <= prev_v && v.is_finite()) {
                return Err(invalid("values must be finite, nonnegative and nonincreasing"));
            }
            prev_t = t;
            prev_v = v;
        }
        Ok(Self::merged(breaks.into_iter().zip(values)))
    }

    fn merged(runs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut breaks: Vec<f64> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        for (t, v) in runs {
            if v == 0.0 {
                break;
            }
            match values.last() {
                Some(&last) if last == v => *breaks.last_mut().unwrap() = t,
                _ => {
                    breaks.push(t);
                    values.push(v);
                }
            }
        }
        let mut prefix = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        let mut t0 = 0.0;
        for (&t, &v) in breaks.iter().zip(&values) {
            acc += v * (t - t0);
            prefix.push(acc);
            t0 = t;
        }
        DecreasingProfile {
            breaks,
            values,
            prefix,
        }
    }

    /// Rearrangement of nonnegative samples that each occupy `cell` measure.
    pub fn from_samples(mut samples: Vec<f64>, cell: f64) -> Self {
        samples.sort_unstable_by(|a, b| b.total_cmp(a));
        let mut runs: Vec<(f64, f64)> = Vec::new();
        for (i, v) in samples.iter().enumerate() {
            let t = (i + 1) as f64 * cell;
            match runs.last_mut() {
                Some(last) if last.1 == *v => last.0 = t,
                _ => runs.push((t, *v)),
            }
        }
        Self::merged(runs)
    }

    pub fn zero() -> Self {
        Self::merged(std::iter::empty())
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of runs.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Measure of the support of `f*`.
    pub fn support(&self) -> f64 {
        self.breaks.last().copied().unwrap_or(0.0)
    }

    /// Runs as `(t_{m-1}, t_m, v_m)`.
    pub fn runs(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breaks
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(move |(m, (&t, &v))| (if m == 0 { 0.0 } else { self.breaks[m - 1] }, t, v))
    }

    /// Index of the run containing `t` (right-continuous), or `len()` beyond
    /// the support.
    fn run_index(&self, t: f64) -> usize {
        self.breaks.partition_point(|&b| b <= t)
    }

    /// `f*(t)`.
    pub fn value(&self, t: f64) -> f64 {
        self.values.get(self.run_index(t)).copied().unwrap_or(0.0)
    }

    /// `∫_0^t f*`.
    pub fn integral_to(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let m = self.run_index(t);
        let (base, t0) = if m == 0 {
            (0.0, 0.0)
        } else {
            (self.prefix[m - 1], self.breaks[m - 1])
        };
        match self.values.get(m) {
            Some(v) => base + v * (t - t0),
            None => base,
        }
    }

    /// `∫_0^∞ f* = ‖f‖_1`.
    pub fn mass(&self) -> f64 {
        self.prefix.last().copied().unwrap_or(0.0)
    }

    /// `f**(t) = (1/t) ∫_0^t f*`.
    pub fn double_star(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(invalid(format!("f** needs t > 0, got {t}")));
        }
        Ok(self.integral_to(t) / t)
    }

    /// `|{t : f*(t) > y}|`.
    pub fn level_measure(&self, y: f64) -> f64 {
        let m = self.values.partition_point(|&v| v > y);
        if m == 0 {
            0.0
        } else {
            self.breaks[m - 1]
        }
    }

    /// Pointwise `c·f*` for `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::merged(
            self.breaks
                .iter()
                .zip(&self.values)
                .map(|(&t, &v)| (t, v * c.abs())),
        )
    }
}

/// `f*` of a grid function (|f| for complex samples).
pub fn decreasing_rearrangement(f: &GridFunction) -> DecreasingProfile {
    DecreasingProfile::from_samples(f.abs_values(), f.grid().cell_volume())
}

/// `λ_f(y) = |{|f| > y}|` counted cell by cell.
pub fn distribution_function(f: &GridFunction, y: f64) -> f64 {
    let count = f.abs_values().into_iter().filter(|&v| v > y).count();
    count as f64 * f.grid().cell_volume()
}

/// Table of `𝓡₁,₂g(s, t)` on the cells `[i·ds, (i+1)·ds) × [j·dt, (j+1)·dt)`,
/// nonincreasing in both indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IteratedProfile {
    /// Cell length along the distinguished axis.
    pub ds: f64,
    /// Cell measure of the complementary (n-1)-D variables.
    pub dt: f64,
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `table[i * cols + j]`.
    pub table: Vec<f64>,
}

impl IteratedProfile {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.table[i * self.cols + j]
    }

    pub fn mass(&self) -> f64 {
        self.table.iter().sum::<f64>() * self.ds * self.dt
    }

    /// `|{(s,t) : 𝓡₁,₂g(s,t) > y}|`.
    pub fn level_measure(&self, y: f64) -> f64 {
        self.table.iter().filter(|&&v| v > y).count() as f64 * self.ds * self.dt
    }
}

/// Rearrange `|f|` along `axis` in every line, then rearrange the result in
/// the remaining variables at every level `s`.
pub fn iterated_rearrangement(f: &GridFunction, axis: usize) -> Result<IteratedProfile> {
    let grid = f.grid();
    let n = grid.dim();
    if n < 2 {
        return Err(Error::Dimension {
            expected: "n >= 2".into(),
            got: n,
        });
    }
    if axis >= n {
        return Err(invalid(format!("axis {axis} out of range")));
    }
    let rows = grid.points()[axis];
    let cols = grid.len() / rows;
    let stride = grid.strides()[axis];
    let abs = f.abs_values();
    // Lines along `axis`: linear index = outer * rows * stride + i * stride + inner.
    let mut table = vec![0.0; rows * cols];
    let mut line = vec![0.0; rows];
    for c in 0..cols {
        let (outer, inner) = (c / stride, c % stride);
        let base = outer * rows * stride + inner;
        for (i, v) in line.iter_mut().enumerate() {
            *v = abs[base + i * stride];
        }
        line.sort_unstable_by(|a, b| b.total_cmp(a));
        for (i, v) in line.iter().enumerate() {
            table[i * cols + c] = *v;
        }
    }
    for row in table.chunks_mut(cols) {
        row.sort_unstable_by(|a, b| b.total_cmp(a));
    }
    let ds = grid.spacing(axis);
    Ok(IteratedProfile {
        ds,
        dt: grid.cell_volume() / ds,
        rows,
        cols,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridfn::GridSpec;

    fn line(points: usize, l: f64, g: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_fn(GridSpec::cube(1, l, points).unwrap(), |x| g(x[0])).unwrap()
    }

    #[test]
    fn indicator_profile() {
        let f = line(1024, 4.0, |x| if (0.0..2.0).contains(&x) { 1.0 } else { 0.0 });
        let p = decreasing_rearrangement(&f);
        assert_eq!(p.len(), 1);
        assert!((p.support() - 2.0).abs() <= 8.0 / 1024.0);
        assert_eq!(p.value(1.0), 1.0);
        assert_eq!(p.value(2.5), 0.0);
    }

    #[test]
    fn hat_profile() {
        let n = 2048;
        let f = line(n, 2.0, |x| (1.0 - x.abs()).max(0.0));
        let p = decreasing_rearrangement(&f);
        let h = 4.0 / n as f64;
        for k in 1..200 {
            let t = k as f64 * 0.01;
            assert!((p.value(t) - (1.0 - t / 2.0)).abs() <= h, "t={t}");
        }
    }

    #[test]
    fn zero_profile() {
        let f = GridFunction::zeros(GridSpec::cube(2, 1.0, 8).unwrap());
        let p = decreasing_rearrangement(&f);
        assert!(p.is_zero());
        assert_eq!(p.double_star(3.0).unwrap(), 0.0);
        assert_eq!(p.mass(), 0.0);
    }

    #[test]
    fn double_star_of_indicator() {
        let p = DecreasingProfile::from_runs(vec![1.0], vec![1.0]).unwrap();
        assert_eq!(p.double_star(0.5).unwrap(), 1.0);
        assert_eq!(p.double_star(1.0).unwrap(), 1.0);
        assert_eq!(p.double_star(2.0).unwrap(), 0.5);
        assert!(p.double_star(0.0).is_err());
        assert!(p.double_star(-1.0).is_err());
    }

    #[test]
    fn runs_are_merged() {
        let p = DecreasingProfile::from_runs(vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 2.0, 1.0, 0.0]).unwrap();
        assert_eq!(p.breakpoints(), &[2.0, 3.0]);
        assert_eq!(p.values(), &[2.0, 1.0]);
        assert!(DecreasingProfile::from_runs(vec![1.0, 2.0], vec![1.0, 2.0]).is_err());
        assert!(DecreasingProfile::from_runs(vec![2.0, 1.0], vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn profile_json_roundtrip() {
        let p = DecreasingProfile::from_runs(vec![0.5, 2.0], vec![3.0, 1.0]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("breakpoints"));
        let q: DecreasingProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn distribution_extremes() {
        let grid = GridSpec::cube(2, 1.0, 8).unwrap();
        let f = GridFunction::from_fn(grid.clone(), |x| 1.0 + x[0] * x[0]).unwrap();
        assert!((distribution_function(&f, 0.0) - grid.measure()).abs() < 1e-12);
        assert_eq!(distribution_function(&f, 10.0), 0.0);
    }

    #[test]
    fn separable_iterated() {
        let grid = GridSpec::cube(2, 3.0, 32).unwrap();
        let a = |x: f64| (-PI_ * x * x).exp();
        let b = |y: f64| (-2.0 * (y - 0.3).powi(2)).exp();
        let f = GridFunction::from_fn(grid.clone(), |x| a(x[0]) * b(x[1])).unwrap();
        let r = iterated_rearrangement(&f, 0).unwrap();
        let mut av: Vec<f64> = (0..32).map(|i| a(grid.node(0, i))).collect();
        let mut bv: Vec<f64> = (0..32).map(|i| b(grid.node(1, i))).collect();
        av.sort_by(|x, y| y.total_cmp(x));
        bv.sort_by(|x, y| y.total_cmp(x));
        for i in 0..32 {
            for j in 0..32 {
                assert!((r.get(i, j) - av[i] * bv[j]).abs() < 1e-15);
            }
        }
        assert!(iterated_rearrangement(&line(8, 1.0, |x| x), 0).is_err());
    }

    const PI_: f64 = std::f64::consts::PI;
}
