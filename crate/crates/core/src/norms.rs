//! Lebesgue, Lorentz, mixed and iterated-rearrangement Lorentz norms.
//!
//! Every integral against `dt/t` over a step profile is evaluated in closed
//! form run by run.
//!
//! # String grammar
//!
//! ```text
//! spec   := leb | lor | mix | ilor
//! leb    := "Leb(" num ")"
//! lor    := "Lor(" num sep num ")"            e.g. Lor(3,1), Lor(q=3,r=1)
//! mix    := "Mix(" [k=]int ";" spec ";" spec ")"
//! ilor   := "ILor(" num sep num [sep [k=]int] ")"
//! num    := [name=] float | int "/" int        e.g. 1.5, 3/2, p=2
//! sep    := "," | ";"
//! ```
//!
//! Axes in the grammar are 1-based (`k=1` is the first coordinate); the Rust
//! API is 0-based. In `Mix(k;inner;outer)` the inner norm acts on the 1-D
//! lines along axis `k` and the outer norm on the resulting function of the
//! remaining variables, whose axes are renumbered in order. Mixed specs nest
//! at most two deep.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gridfn::{GridFunction, GridSpec};
use crate::rearrange::{decreasing_rearrangement, iterated_rearrangement, DecreasingProfile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NormSpec {
    Lebesgue { p: f64 },
    Lorentz { p: f64, r: f64 },
    Mixed {
        axis: usize,
        inner: Box<NormSpec>,
        outer: Box<NormSpec>,
    },
    IteratedLorentz { p: f64, nu: f64, axis: usize },
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("exponent {name}={v} must be finite and >= 1")))
    }
}

impl NormSpec {
    pub fn leb(p: f64) -> Self {
        NormSpec::Lebesgue { p }
    }

    pub fn lor(p: f64, r: f64) -> Self {
        NormSpec::Lorentz { p, r }
    }

    pub fn mixed(axis: usize, inner: NormSpec, outer: NormSpec) -> Self {
        NormSpec::Mixed {
            axis,
            inner: Box::new(inner),
            outer: Box::new(outer),
        }
    }

    pub fn ilor(p: f64, nu: f64, axis: usize) -> Self {
        NormSpec::IteratedLorentz { p, nu, axis }
    }

    /// Mixed nesting depth (0 for a plain norm).
    pub fn depth(&self) -> usize {
        match self {
            NormSpec::Mixed { outer, .. } => 1 + outer.depth(),
            _ => 0,
        }
    }

    /// Checks exponents and structure for functions of `dim` variables.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            NormSpec::Lebesgue { p } => check_exponent("p", *p),
            NormSpec::Lorentz { p, r } => {
                check_exponent("p", *p)?;
                check_exponent("r", *r)
            }
            NormSpec::IteratedLorentz { p, nu, axis } => {
                check_exponent("p", *p)?;
                check_exponent("nu", *nu)?;
                if dim != 2 {
                    return Err(Error::Dimension {
                        expected: "2 (iterated Lorentz norm)".into(),
                        got: dim,
                    });
                }
                if *axis >= dim {
                    return Err(invalid(format!("axis {axis} out of range")));
                }
                Ok(())
            }
            NormSpec::Mixed { axis, inner, outer } => {
                if dim < 2 {
                    return Err(Error::Dimension {
                        expected: ">= 2 (mixed norm)".into(),
                        got: dim,
                    });
                }
                if *axis >= dim {
                    return Err(invalid(format!("axis {axis} out of range for dimension {dim}")));
                }
                if self.depth() > 2 {
                    return Err(invalid("mixed norms nest at most two deep"));
                }
                match **inner {
                    NormSpec::Lebesgue { .. } | NormSpec::Lorentz { .. } => inner.validate(1)?,
                    _ => return Err(invalid("inner norm of a mixed norm must be Leb or Lor")),
                }
                outer.validate(dim - 1)
            }
        }
    }

    /// Homogeneity degree under `f ↦ f(λ·)`: the norm scales by `λ^{-degree}`.
    pub fn dilation_degree(&self, dim: usize) -> f64 {
        match self {
            NormSpec::Lebesgue { p } | NormSpec::Lorentz { p, .. } => dim as f64 / p,
            NormSpec::IteratedLorentz { p, .. } => dim as f64 / p,
            NormSpec::Mixed { inner, outer, .. } => inner.dilation_degree(1) + outer.dilation_degree(dim - 1),
        }
    }

    pub fn eval(&self, f: &GridFunction) -> Result<f64> {
        self.validate(f.dim())?;
        Ok(self.eval_unchecked(f))
    }

    fn eval_unchecked(&self, f: &GridFunction) -> f64 {
        match self {
            NormSpec::Lebesgue { p } => lp_norm(f, *p),
            NormSpec::Lorentz { p, r } => lorentz_norm_profile(&decreasing_rearrangement(f), *p, *r),
            NormSpec::Mixed { axis, inner, outer } => {
                let reduced = reduce_axis(f, *axis, inner).expect("validated");
                outer.eval_unchecked(&reduced)
            }
            NormSpec::IteratedLorentz { p, nu, axis } => {
                iterated_lorentz_norm(f, *p, *nu, *axis).expect("validated")
            }
        }
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Lebesgue { p } => write!(f, "Leb({})", fmt_num(*p)),
            NormSpec::Lorentz { p, r } => write!(f, "Lor({},{})", fmt_num(*p), fmt_num(*r)),
            NormSpec::Mixed { axis, inner, outer } => {
                write!(f, "Mix(k={};{};{})", axis + 1, inner, outer)
            }
            NormSpec::IteratedLorentz { p, nu, axis } => {
                write!(f, "ILor({},{},k={})", fmt_num(*p), fmt_num(*nu), axis + 1)
            }
        }
    }
}

impl From<NormSpec> for String {
    fn from(s: NormSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for NormSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Splits `Name(args)` into the name and top-level arguments separated by
/// `,` or `;`.
pub(crate) fn split_call(s: &str) -> Result<(&str, Vec<&str>)> {
    let s = s.trim();
    let open = s
        .find('(')
        .ok_or_else(|| Error::Parse(format!("expected `Name(...)`, got `{s}`")))?;
    if !s.ends_with(')') {
        return Err(Error::Parse(format!("missing `)` in `{s}`")));
    }
    let name = s[..open].trim();
    let body = &s[open + 1..s.len() - 1];
    let mut args = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in body.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced `)` in `{s}`")));
                }
            }
            ',' | ';' if depth == 0 => {
                args.push(body[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced `(` in `{s}`")));
    }
    if !body.trim().is_empty() {
        args.push(body[start..].trim());
    }
    Ok((name, args))
}

/// Strips an optional `name=` prefix, returning `(name, value)`.
pub(crate) fn split_named(arg: &str) -> (Option<&str>, &str) {
    match arg.split_once('=') {
        Some((k, v)) if !k.contains('(') => (Some(k.trim()), v.trim()),
        _ => (None, arg.trim()),
    }
}

/// Parses a float or a fraction `a/b`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad number `{s}`"));
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn parse_axis(s: &str) -> Result<usize> {
    let k: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad axis `{s}`")))?;
    if k == 0 {
        return Err(Error::Parse("axes are numbered from 1".into()));
    }
    Ok(k - 1)
}

fn expect_args(name: &str, args: &[&str], range: std::ops::RangeInclusive<usize>) -> Result<()> {
    if range.contains(&args.len()) {
        Ok(())
    } else {
        Err(Error::Parse(format!(
            "{name} takes {}..={} arguments, got {}",
            range.start(),
            range.end(),
            args.len()
        )))
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = split_call(s)?;
        let num = |a: &str| parse_number(split_named(a).1);
        let spec = match name {
            "Leb" => {
                expect_args(name, &args, 1..=1)?;
                NormSpec::leb(num(args[0])?)
            }
            "Lor" => {
                expect_args(name, &args, 2..=2)?;
                NormSpec::lor(num(args[0])?, num(args[1])?)
            }
            "Mix" => {
                expect_args(name, &args, 3..=3)?;
                let axis = parse_axis(split_named(args[0]).1)?;
                NormSpec::mixed(axis, args[1].parse()?, args[2].parse()?)
            }
            "ILor" => {
                expect_args(name, &args, 2..=3)?;
                let axis = match args.get(2) {
                    Some(a) => parse_axis(split_named(a).1)?,
                    None => 0,
                };
                NormSpec::ilor(num(args[0])?, num(args[1])?, axis)
            }
            other => return Err(Error::Parse(format!("unknown norm `{other}`"))),
        };
        if spec.depth() > 2 {
            return Err(Error::Parse("mixed norms nest at most two deep".into()));
        }
        Ok(spec)
    }
}

/// `(Σ |f|^p · cellvol)^{1/p}`.
pub fn lp_norm(f: &GridFunction, p: f64) -> f64 {
    lp_of_samples(&f.abs_values(), f.grid().cell_volume(), p)
}

fn lp_of_samples(abs: &[f64], cell: f64, p: f64) -> f64 {
    // Scale by the max to avoid overflow/underflow for large p.
    let m = abs.iter().cloned().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = if p == 1.0 {
        abs.iter().sum::<f64>() / m
    } else if p == 2.0 {
        abs.iter().map(|v| (v / m) * (v / m)).sum()
    } else {
        abs.iter().map(|v| (v / m).powf(p)).sum()
    };
    m * (s * cell).powf(1.0 / p)
}

/// `(∫ (t^{1/p} f*(t))^r dt/t)^{1/r}`, one closed-form term per run.
pub fn lorentz_norm_profile(profile: &DecreasingProfile, p: f64, r: f64) -> f64 {
    let Some(&top) = profile.values().first() else {
        return 0.0;
    };
    let e = r / p;
    let s: f64 = profile
        .runs()
        .map(|(t0, t1, v)| (v / top).powf(r) * (t1.powf(e) - t0.powf(e)))
        .sum();
    top * (s * p / r).powf(1.0 / r)
}

pub fn lorentz_norm(f: &GridFunction, p: f64, r: f64) -> f64 {
    lorentz_norm_profile(&decreasing_rearrangement(f), p, r)
}

fn norm_1d(abs: &[f64], h: f64, spec: &NormSpec) -> f64 {
    match spec {
        NormSpec::Lebesgue { p } => lp_of_samples(abs, h, *p),
        NormSpec::Lorentz { p, r } => {
            lorentz_norm_profile(&DecreasingProfile::from_samples(abs.to_vec(), h), *p, *r)
        }
        _ => unreachable!("validated inner norm"),
    }
}

/// Applies the 1-D norm `inner` along `axis` on every line, giving a function
/// of the remaining variables.
pub fn reduce_axis(f: &GridFunction, axis: usize, inner: &NormSpec) -> Result<GridFunction> {
    let grid = f.grid();
    if axis >= grid.dim() {
        return Err(invalid(format!("axis {axis} out of range")));
    }
    match inner {
        NormSpec::Lebesgue { .. } | NormSpec::Lorentz { .. } => inner.validate(1)?,
        _ => return Err(invalid("inner norm must be Leb or Lor")),
    }
    let reduced_grid: GridSpec = grid.without_axis(axis)?;
    let n = grid.points()[axis];
    let stride = grid.strides()[axis];
    let h = grid.spacing(axis);
    let abs = f.abs_values();
    let mut line = vec![0.0; n];
    let out: Vec<f64> = (0..reduced_grid.len())
        .map(|c| {
            let base = (c / stride) * n * stride + c % stride;
            for (i, v) in line.iter_mut().enumerate() {
                *v = abs[base + i * stride];
            }
            norm_1d(&line, h, inner)
        })
        .collect();
    GridFunction::real(reduced_grid, out)
}

/// Mixed norm `outer[inner]_axis`.
pub fn mixed_norm(f: &GridFunction, axis: usize, inner: &NormSpec, outer: &NormSpec) -> Result<f64> {
    NormSpec::mixed(axis, inner.clone(), outer.clone()).eval(f)
}

/// `(∫∫ (st)^{ν/p-1} 𝓡₁,₂g(s,t)^ν ds dt)^{1/ν}` for n = 2, with the iterated
/// rearrangement taken along `axis` first.
pub fn iterated_lorentz_norm(f: &GridFunction, p: f64, nu: f64, axis: usize) -> Result<f64> {
    NormSpec::ilor(p, nu, axis).validate(f.dim())?;
    let r = iterated_rearrangement(f, axis)?;
    let top = r.table.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0.0);
    }
    let e = nu / p;
    // ∫_{a}^{b} s^{e-1} ds = (b^e - a^e)/e on consecutive cells.
    let weights = |count: usize, d: f64| -> Vec<f64> {
        (0..count)
            .map(|i| (((i + 1) as f64 * d).powf(e) - (i as f64 * d).powf(e)) / e)
            .collect()
    };
    let ws = weights(r.rows, r.ds);
    let wt = weights(r.cols, r.dt);
    let mut s = 0.0;
    for (i, wsi) in ws.iter().enumerate() {
        let row = &r.table[i * r.cols..(i + 1) * r.cols];
        let mut acc = 0.0;
        for (v, w) in row.iter().zip(&wt) {
            if *v == 0.0 {
                break;
            }
            acc += (v / top).powf(nu) * w;
        }
        s += wsi * acc;
    }
    Ok(top * s.powf(1.0 / nu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gauss1(points: usize) -> GridFunction {
        GridFunction::from_fn(GridSpec::cube(1, 8.0, points).unwrap(), |x| (-PI * x[0] * x[0]).exp()).unwrap()
    }

    #[test]
    fn gaussian_l2() {
        let f = gauss1(1024);
        assert!((lp_norm(&f, 2.0) - 2f64.powf(-0.25)).abs() < 1e-6);
    }

    #[test]
    fn lorentz_diagonal_is_lebesgue() {
        let f = gauss1(256);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let a = lorentz_norm(&f, p, p);
            let b = lp_norm(&f, p);
            assert!((a / b - 1.0).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn lorentz_of_unit_indicator() {
        let grid = GridSpec::cube(1, 2.0, 64).unwrap();
        let f = GridFunction::from_fn(grid, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        for (p, r) in [(2.0, 1.0), (3.0, 1.5), (1.5, 4.0)] {
            let want = (p / r as f64).powf(1.0 / r);
            assert!((lorentz_norm(&f, p, r) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn grammar_roundtrip() {
        for s in [
            "Leb(2)",
            "Lor(3,1)",
            "Mix(k=1;Leb(1);Lor(3,1))",
            "Mix(k=2;Lor(1.5,1);Mix(k=1;Leb(1);Leb(2)))",
            "ILor(2,1,k=1)",
        ] {
            let spec: NormSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        let a: NormSpec = "Lor(q=3/2, r=1)".parse().unwrap();
        assert_eq!(a, NormSpec::lor(1.5, 1.0));
        let b: NormSpec = "ILor(p=2;nu=1)".parse().unwrap();
        assert_eq!(b, NormSpec::ilor(2.0, 1.0, 0));
        assert!("Mix(k=1;Leb(1);Mix(k=1;Leb(1);Mix(k=1;Leb(1);Leb(1))))".parse::<NormSpec>().is_err());
        assert!("Leb(2".parse::<NormSpec>().is_err());
        assert!("Foo(2)".parse::<NormSpec>().is_err());
        assert!("Mix(k=0;Leb(1);Leb(1))".parse::<NormSpec>().is_err());
        let json = serde_json::to_string(&NormSpec::lor(3.0, 1.0)).unwrap();
        assert_eq!(json, "\"Lor(3,1)\"");
    }

    #[test]
    fn validation() {
        assert!(NormSpec::leb(0.5).validate(1).is_err());
        assert!(NormSpec::ilor(2.0, 1.0, 0).validate(3).is_err());
        assert!(NormSpec::mixed(2, NormSpec::leb(1.0), NormSpec::leb(1.0)).validate(2).is_err());
        assert!(NormSpec::mixed(0, NormSpec::ilor(1.0, 1.0, 0), NormSpec::leb(1.0))
            .validate(2)
            .is_err());
    }

    #[test]
    fn separable_mixed() {
        let grid = GridSpec::cube(2, 4.0, 64).unwrap();
        let a = |x: f64| (-PI * x * x).exp();
        let b = |y: f64| (-3.0 * y * y).exp();
        let f = GridFunction::from_fn(grid.clone(), |x| a(x[0]) * b(x[1])).unwrap();
        let g1 = GridSpec::cube(1, 4.0, 64).unwrap();
        let fa = GridFunction::from_fn(g1.clone(), |x| a(x[0])).unwrap();
        let fb = GridFunction::from_fn(g1, |x| b(x[0])).unwrap();
        let v = mixed_norm(&f, 0, &NormSpec::leb(1.0), &NormSpec::lor(1.5, 1.0)).unwrap();
        let want = lp_norm(&fa, 1.0) * lorentz_norm(&fb, 1.5, 1.0);
        assert!((v / want - 1.0).abs() < 1e-12);
        let w = mixed_norm(&f, 1, &NormSpec::leb(2.0), &NormSpec::leb(2.0)).unwrap();
        assert!((w / lp_norm(&f, 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iterated_diagonal() {
        let grid = GridSpec::cube(2, 3.0, 32).unwrap();
        let f = GridFunction::from_fn(grid, |x| (-PI * (x[0] * x[0] + 2.0 * x[1] * x[1])).exp() * (1.0 + x[0])).unwrap();
        for p in [1.0, 2.0, 3.0] {
            let a = iterated_lorentz_norm(&f, p, p, 0).unwrap();
            assert!((a / lp_norm(&f, p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneity() {
        let f = gauss1(128);
        let g = f.scaled(-3.5);
        for spec in [NormSpec::leb(1.3), NormSpec::lor(2.0, 1.0)] {
            let a = spec.eval(&f).unwrap();
            let b = spec.eval(&g).unwrap();
            assert!((b / a - 3.5).abs() < 1e-13);
        }
    }
}
