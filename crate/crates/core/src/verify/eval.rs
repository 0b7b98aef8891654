use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fourier::{self, ShellQuadrature};
use crate::gridfn::{GridFunction, Values};
use crate::hardyops::{self, HalfLineFunction};
use crate::norms::lp_norm;
use crate::rearrange::decreasing_rearrangement;
use crate::smoothness::{self, BesovSpec, StepModulus};

use super::{Check, Functional, Input, JointCheck};

/// A function together with its exact partial derivatives.
#[derive(Clone, Copy, Debug)]
pub struct EvalInput<'a> {
    pub f: &'a GridFunction,
    pub derivatives: &'a [GridFunction],
}

/// `lhs/rhs`, with `0/0 = 1`-style conventions: both zero gives 1, a
/// positive lhs over a zero rhs gives `+∞`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        1.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

fn pick<'a>(input: Input, target: &'a GridFunction, ctx: &EvalInput<'a>) -> Result<&'a GridFunction> {
    match input {
        Input::F => Ok(target),
        Input::D(k) => ctx
            .derivatives
            .get(k)
            .ok_or_else(|| invalid(format!("no derivative along axis {k}"))),
    }
}

fn gradient_magnitude(ders: &[GridFunction]) -> Result<GridFunction> {
    let first = ders.first().ok_or_else(|| invalid("no derivatives"))?;
    let mut acc = vec![0.0; first.grid().len()];
    for d in ders {
        for (a, v) in acc.iter_mut().zip(d.abs_values()) {
            *a += v * v;
        }
    }
    GridFunction::real(first.grid().clone(), acc.into_iter().map(f64::sqrt).collect())
}

fn eval_on(func: &Functional, target: &GridFunction, ctx: &EvalInput) -> Result<f64> {
    Ok(match func {
        Functional::Norm { input, norm } => norm.eval(pick(*input, target, ctx)?)?,
        Functional::GradientNorm { p } => lp_norm(&gradient_magnitude(ctx.derivatives)?, *p),
        Functional::DerivativeSum { of } => {
            let mut s = 0.0;
            for d in ctx.derivatives {
                s += eval_on(of, d, ctx)?;
            }
            s
        }
        Functional::H1 { input } => fourier::h1_norm(pick(*input, target, ctx)?)?.value,
        Functional::Besov {
            input,
            alpha,
            theta,
            base,
            axis,
            modulus,
        } => {
            let g = pick(*input, target, ctx)?;
            let axes: Vec<usize> = match axis {
                Some(k) => vec![*k],
                None => (0..g.dim()).collect(),
            };
            let mut s = 0.0;
            for k in axes {
                let spec = BesovSpec::new(*alpha, *theta, k, base.for_axis(k));
                let v = if *modulus {
                    smoothness::besov_modulus_seminorm(g, &spec)?
                } else {
                    smoothness::besov_seminorm(g, &spec)?
                };
                s += v.value;
            }
            s
        }
        Functional::UlyanovIntegral { p, q, delta } => {
            let sm = StepModulus::new(target, 0, *p)?;
            smoothness::ulyanov_integral(&sm, *q, delta.unwrap_or(f64::INFINITY))
        }
        Functional::Modulus { p, delta } => StepModulus::new(target, 0, *p)?.omega(*delta),
        Functional::WeightedFourier { input, gamma } => {
            fourier::weighted_fourier_integral(&fourier::transform(pick(*input, target, ctx)?), *gamma).value
        }
        Functional::ShellSum { input, weight } => {
            let g = pick(*input, target, ctx)?;
            let interp = fourier::transform(g).abs_interpolator();
            let quad = ShellQuadrature::default_for(g.dim())?;
            fourier::dyadic_shell_sum(&interp, *weight, &quad)?.value
        }
        Functional::CubeShellSum { input } => fourier::cube_shell_sum(&fourier::transform(pick(*input, target, ctx)?))?,
        Functional::SupIntegral { input } => {
            let spec = fourier::transform(pick(*input, target, ctx)?);
            let mut s = 0.0;
            for j in 0..spec.dim() {
                s += fourier::sup_integral_spectral(&spec, j)?;
            }
            s
        }
        Functional::VerticalSum { input } => {
            let g = pick(*input, target, ctx)?;
            let tg = fourier::default_t_grid(g.grid());
            let mut s = lp_norm(&fourier::vertical_maximal(g, &tg)?, 1.0);
            for j in 0..g.dim() {
                s += lp_norm(&fourier::vertical_maximal(&fourier::riesz(g, j)?, &tg)?, 1.0);
            }
            s
        }
        Functional::Sum { terms } => {
            let mut s = 0.0;
            for t in terms {
                s += eval_on(t, target, ctx)?;
            }
            s
        }
    })
}

/// Value of one functional on a corpus member.
pub fn evaluate_functional(func: &Functional, ctx: &EvalInput) -> Result<f64> {
    eval_on(func, ctx.f, ctx)
}

/// Geometric sample of `t` covering one cell to beyond the box.
fn t_samples(f: &GridFunction, per_octave: usize) -> Vec<f64> {
    let h = f.grid().spacing(0);
    let top = 4.0 * f.grid().half_extents()[0];
    let count = ((top / (h / 4.0)).log2() * per_octave as f64).ceil() as usize + 1;
    fourier::geometric_grid(h / 4.0, top, count)
}

/// Keeps the `(lhs, rhs)` pair with the largest ratio.
fn worst(pairs: impl IntoIterator<Item = (f64, f64)>) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    let mut best_ratio = f64::NEG_INFINITY;
    for (l, r) in pairs {
        let q = ratio(l, r);
        if q > best_ratio || q.is_nan() {
            best_ratio = q;
            best = (l, r);
        }
    }
    best
}

fn real_part(g: GridFunction) -> Result<GridFunction> {
    match g.values() {
        Values::Real(_) => Ok(g),
        Values::Complex(v) => GridFunction::real(g.grid().clone(), v.iter().map(|z| z.re).collect()),
    }
}

/// `(lhs, rhs)` of a check on one member. For joint checks the rhs excludes
/// the explicit constant, so that `lhs/rhs ≤ C` is the claim.
pub fn evaluate_check(check: &Check, ctx: &EvalInput) -> Result<(f64, f64)> {
    match check {
        Check::Pair { lhs, rhs } => Ok((evaluate_functional(lhs, ctx)?, evaluate_functional(rhs, ctx)?)),
        Check::Joint(j) => joint(j, ctx),
    }
}

fn joint(check: &JointCheck, ctx: &EvalInput) -> Result<(f64, f64)> {
    let f = ctx.f;
    match check {
        JointCheck::Hardy { lambda, p } => {
            let phi = HalfLineFunction::from_profile(&decreasing_rearrangement(f));
            let (l, r) = hardyops::hardy_check(&phi, *lambda, *p)?;
            Ok((l, r * (1.0 - lambda)))
        }
        JointCheck::DoubleStar { p } => {
            let (l, r) = hardyops::doublestar_bound_check(f, *p)?;
            Ok((l, r * (p - 1.0) / p))
        }
        JointCheck::UlyanovPointwise { p } => {
            let prof = decreasing_rearrangement(f);
            let sm = StepModulus::new(f, 0, *p)?;
            Ok(worst(t_samples(f, 8).into_iter().map(|t| {
                let (l, r) = smoothness::ulyanov_pointwise_with(&prof, &sm, t);
                (l, r / 2.0)
            })))
        }
        JointCheck::UlyanovTail { p } => {
            let prof = decreasing_rearrangement(f);
            let sm = StepModulus::new(f, 0, *p)?;
            Ok(worst(t_samples(f, 4).into_iter().map(|t| {
                let (l, r) = smoothness::ulyanov_tail_with(&prof, &sm, t);
                (l, r / 2.0)
            })))
        }
        JointCheck::Omega1 { p } => {
            let sm = StepModulus::new(f, 0, *p)?;
            Ok(worst(
                t_samples(f, 8)
                    .into_iter()
                    .map(|d| (sm.omega(d), sm.integral_of_diff_norm(d) / d)),
            ))
        }
        JointCheck::QuasiDecreasing { v, alpha, beta, p } => {
            let sm = StepModulus::new(f, 0, *v)?;
            let h = sm.spacing();
            let top = 4.0 * sm.saturation();
            let count = ((top / (h / 16.0)).log2() * 16.0).ceil() as usize + 1;
            let t = fourier::geometric_grid(h / 16.0, top, count);
            let psi: Vec<f64> = t.iter().map(|&s| sm.omega(s) / s).collect();
            if psi.iter().all(|&x| x == 0.0) {
                return Ok((0.0, 0.0));
            }
            let psi = HalfLineFunction::from_samples(&t, &psi, true, true)?;
            let chk = hardyops::quasi_decreasing_hardy_check(&psi, *alpha, *beta, *p, 16.0)?;
            Ok((chk.lhs, chk.rhs))
        }
        JointCheck::ConeDerivative => {
            if f.dim() > 2 {
                return Err(invalid("cone maximal functions are implemented for n <= 2"));
            }
            let tg = fourier::default_t_grid(f.grid());
            let lhs = fourier::nontangential_maximal_dt(f, &tg)?;
            // R_j D_j f of the same sampled f, multiplier 2πξ_j²/|ξ|; the
            // multipliers sum to that of -∂_t at t = 0.
            let spec = fourier::transform(f);
            let mut rhs = vec![0.0; f.grid().len()];
            for j in 0..f.dim() {
                let g = spec.multiplied(|xi| fourier::riesz_multiplier(xi, j) * Complex64::new(0.0, 2.0 * PI * xi[j]));
                let g = real_part(g.inverse())?;
                let ng = fourier::nontangential_maximal(&g, &tg)?;
                for (a, b) in rhs.iter_mut().zip(ng.as_real().unwrap()) {
                    *a += b;
                }
            }
            let lhs = lhs.as_real().unwrap();
            let scale = lhs.iter().cloned().fold(0.0, f64::max);
            let tol = 1e-6 * scale;
            Ok(worst(lhs.iter().zip(&rhs).map(|(l, r)| (*l, r + tol))))
        }
        JointCheck::VerticalCone => {
            let tg = fourier::default_t_grid(f.grid());
            Ok((
                lp_norm(&fourier::vertical_maximal(f, &tg)?, 1.0),
                lp_norm(&fourier::nontangential_maximal(f, &tg)?, 1.0),
            ))
        }
        JointCheck::CubeAnnulus { input } => {
            let g = pick(*input, f, ctx)?;
            let terms = fourier::cube_shell_terms(&fourier::transform(g))?;
            Ok(worst(terms.iter().map(|t| (t.lower_bound(), t.face_sup_sum))))
        }
    }
}
