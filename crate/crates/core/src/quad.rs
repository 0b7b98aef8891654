//! Small quadrature helpers shared across modules.

use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached 16-point rule.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// ∫_a^b g(t) dt with the 16-point rule.
pub fn integrate(a: f64, b: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    let (x, w) = gl16();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(w).map(|(xi, wi)| wi * g(mid + half * xi)).sum::<f64>() * half
}

/// ∫_a^b g(t) dt/t for 0 < a < b, integrating in log t and splitting the
/// range into chunks whose endpoint ratio is at most `max_ratio`.
pub fn integrate_dt_over_t(a: f64, b: f64, max_ratio: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    debug_assert!(a > 0.0 && b >= a);
    if b <= a {
        return 0.0;
    }
    let (la, lb) = (a.ln(), b.ln());
    let chunks = ((lb - la) / max_ratio.ln()).ceil().max(1.0) as usize;
    let step = (lb - la) / chunks as f64;
    (0..chunks)
        .map(|c| {
            let u0 = la + c as f64 * step;
            integrate(u0, u0 + step, |u| g(u.exp()))
        })
        .sum()
}

/// ∫ over [ln a, ln b] of the log-linear interpolant of positive samples, i.e.
/// the exact integral ∫_a^b G dh/h when G is a power law through both ends.
pub fn loglog_segment(a: f64, ga: f64, b: f64, gb: f64) -> f64 {
    let du = (b / a).ln();
    if ga <= 0.0 || gb <= 0.0 {
        return 0.5 * (ga + gb) * du;
    }
    let ratio = gb / ga;
    let lr = ratio.ln();
    if lr.abs() < 1e-9 {
        ga * du * (1.0 + 0.5 * lr)
    } else {
        (gb - ga) * du / lr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((i - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn odd_rule_has_center_node() {
        let (x, w) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-15);
        assert!((w[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn loglog_is_exact_for_power_laws() {
        // ∫_1^4 h^{1/2} dh/h = 2(2 - 1)
        let v = loglog_segment(1.0, 1.0, 4.0, 2.0);
        assert!((v - 2.0).abs() < 1e-14);
        let c = loglog_segment(1.0, 3.0, 2.0, 3.0);
        assert!((c - 3.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn dt_over_t_matches_log() {
        let v = integrate_dt_over_t(1e-3, 1e3, 2.0, |_| 1.0);
        assert!((v - (1e6f64).ln()).abs() < 1e-12);
    }
}
