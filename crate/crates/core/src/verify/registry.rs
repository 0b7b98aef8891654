use crate::norms::NormSpec;

use super::{
    conjugate, AxisNorm, Check, Functional, InequalitySpec, Input, Instance, JointCheck, Kind, Params, Window,
};

/// Relative slack for checks evaluated in closed form.
const CLOSED_FORM_TOL: f64 = 1e-4;
/// Relative slack for checks that go through quadrature.
const QUAD_TOL: f64 = 0.05;

fn leb(p: f64) -> NormSpec {
    NormSpec::leb(p)
}

fn norm(input: Input, norm: NormSpec) -> Functional {
    Functional::Norm { input, norm }
}

fn grad(p: f64) -> Functional {
    Functional::GradientNorm { p }
}

fn deriv_sum(of: Functional) -> Functional {
    Functional::DerivativeSum { of: Box::new(of) }
}

fn h1_of_derivatives() -> Functional {
    deriv_sum(Functional::H1 { input: Input::F })
}

fn besov(alpha: f64, theta: f64, base: AxisNorm, axis: Option<usize>, modulus: bool) -> Functional {
    Functional::Besov {
        input: Input::F,
        alpha,
        theta,
        base,
        axis,
        modulus,
    }
}

fn along(inner: NormSpec, outer: NormSpec) -> AxisNorm {
    AxisNorm::Along { inner, outer }
}

fn pair(lhs: Functional, rhs: Functional) -> Check {
    Check::Pair { lhs, rhs }
}

struct Entry {
    id: &'static str,
    title: &'static str,
    kind: Kind,
    constant: Option<f64>,
    tolerance: f64,
    window: Window,
    dilation: bool,
    mean_zero: bool,
}

impl Entry {
    fn report(id: &'static str, title: &'static str, window: Window) -> Self {
        Entry {
            id,
            title,
            kind: Kind::Report,
            constant: None,
            tolerance: 0.0,
            window,
            dilation: false,
            mean_zero: false,
        }
    }

    fn assert(id: &'static str, title: &'static str, window: Window, constant: f64, tolerance: f64) -> Self {
        Entry {
            kind: Kind::Assert,
            constant: Some(constant),
            tolerance,
            ..Entry::report(id, title, window)
        }
    }

    fn probe(id: &'static str, title: &'static str, window: Window) -> Self {
        Entry {
            kind: Kind::Probe,
            ..Entry::report(id, title, window)
        }
    }

    fn dilation(mut self) -> Self {
        self.dilation = true;
        self
    }

    fn mean_zero(mut self) -> Self {
        self.mean_zero = true;
        self
    }

    fn with(self, instances: Vec<(Params, Check)>) -> InequalitySpec {
        InequalitySpec {
            id: self.id.into(),
            title: self.title.into(),
            kind: self.kind,
            constant: self.constant,
            tolerance: self.tolerance,
            window: self.window,
            instances: instances
                .into_iter()
                .map(|(params, check)| Instance { params, check })
                .collect(),
            dilation: self.dilation,
            mean_zero: self.mean_zero,
        }
    }
}

fn pq(n: usize, p: f64, q: f64) -> Params {
    Params {
        p: Some(p),
        q: Some(q),
        ..Params::n(n)
    }
}

fn with_p(n: usize, p: f64) -> Params {
    Params { p: Some(p), ..Params::n(n) }
}

fn sobolev_star(n: usize, p: f64) -> f64 {
    n as f64 * p / (n as f64 - p)
}

fn embed1_lhs(n: usize, p: f64, q: f64) -> Functional {
    let s = 1.0 - n as f64 * (1.0 / p - 1.0 / q);
    besov(s, p, AxisNorm::Fixed(NormSpec::lor(q, p)), None, false)
}

fn embed32_lhs(n: usize, p: f64, q: f64) -> Functional {
    let a = 1.0 - (n as f64 - 1.0) * (1.0 / p - 1.0 / q);
    besov(a, p, along(leb(p), NormSpec::lor(q, p)), None, false)
}

/// `Σ_k ∫ h^{-α} ‖Δ_k(h) f‖_{L^{q,1}[L^1]_k} dh/h` with `α = 1 - (n-1)/q'`.
fn refined_h1_lhs(n: usize, q: f64) -> Functional {
    let a = 1.0 - (n as f64 - 1.0) / conjugate(q);
    besov(a, 1.0, along(leb(1.0), NormSpec::lor(q, 1.0)), None, false)
}

fn simple_params(n: usize) -> Params {
    Params {
        p: Some(2.0),
        r: Some(1.0),
        theta: Some(1.0),
        alpha: Some(0.75),
        ..Params::n(n)
    }
}

fn strong_params(n: usize) -> Params {
    Params {
        nu: Some(1.0),
        ..simple_params(n)
    }
}

fn simple_v(pr: &Params) -> NormSpec {
    NormSpec::mixed(0, leb(pr.r.unwrap()), leb(pr.p.unwrap()))
}

fn strong_v(pr: &Params) -> NormSpec {
    NormSpec::mixed(0, leb(pr.r.unwrap()), NormSpec::lor(pr.p.unwrap(), pr.nu.unwrap()))
}

fn mixed_beta(pr: &Params) -> f64 {
    pr.alpha.unwrap() - 1.0 / pr.r.unwrap() + 1.0 / pr.p.unwrap()
}

/// Full `B^α_{θ;1}(V)` norm: `‖f‖_V` plus the modulus seminorm along `x_1`.
fn mixed_besov_norm(v: NormSpec, alpha: f64, theta: f64) -> Functional {
    Functional::Sum {
        terms: vec![
            norm(Input::F, v.clone()),
            besov(alpha, theta, AxisNorm::Fixed(v), Some(0), true),
        ],
    }
}

fn diff_params(n: usize, p: f64, q: f64, alpha: f64, theta: f64) -> Params {
    Params {
        theta: Some(theta),
        alpha: Some(alpha),
        ..pq(n, p, q)
    }
}

fn diff_check(pr: &Params) -> Check {
    let (p, q, a, th) = (pr.p.unwrap(), pr.q.unwrap(), pr.alpha.unwrap(), pr.theta.unwrap());
    let b = a - pr.n as f64 * (1.0 / p - 1.0 / q);
    let full = |r: f64, s: f64| Functional::Sum {
        terms: vec![
            norm(Input::F, leb(r)),
            besov(s, th, AxisNorm::Fixed(leb(r)), None, false),
        ],
    };
    pair(full(q, b), full(p, a))
}

/// The inequality registry, sorted by id.
pub fn registry() -> Vec<InequalitySpec> {
    let mut out = vec![
        Entry::report("sob1", "Sobolev embedding ||f||_{p*} <= c ||grad f||_p", Window::Sobolev).with(
            [(2, 1.0), (3, 1.0)]
                .into_iter()
                .map(|(n, p)| (with_p(n, p), pair(norm(Input::F, leb(sobolev_star(n, p))), grad(p))))
                .collect(),
        ),
        Entry::report("embed0", "Lorentz-Sobolev ||f||_{p*,p} <= c ||grad f||_p", Window::Sobolev)
            .dilation()
            .with(
                [(2, 1.0), (3, 1.0)]
                    .into_iter()
                    .map(|(n, p)| {
                        (
                            with_p(n, p),
                            pair(norm(Input::F, NormSpec::lor(sobolev_star(n, p), p)), grad(p)),
                        )
                    })
                    .collect(),
            ),
        Entry::report(
            "embed1",
            "sum_k (int h^{-sp} ||D_k(h)f||_{q,p}^p dh/h)^{1/p} <= c sum_k ||D_k f||_p",
            Window::Embed1,
        )
        .dilation()
        .with(
            [(1, 2.0, 4.0), (2, 1.0, 1.5), (3, 1.0, 1.25)]
                .into_iter()
                .map(|(n, p, q)| (pq(n, p, q), pair(embed1_lhs(n, p, q), deriv_sum(norm(Input::F, leb(p))))))
                .collect(),
        ),
        Entry::report(
            "embed32",
            "sum_k (int h^{-ap} ||D_k(h)f||_{L^{q,p}[L^p]_k}^p dh/h)^{1/p} <= c sum_k ||D_k f||_p",
            Window::Embed32,
        )
        .dilation()
        .with(
            [(2, 2.0, 4.0), (3, 1.0, 1.5)]
                .into_iter()
                .map(|(n, p, q)| (pq(n, p, q), pair(embed32_lhs(n, p, q), deriv_sum(norm(Input::F, leb(p))))))
                .collect(),
        ),
        Entry::report(
            "embed1_vs_embed32",
            "left side of the Lorentz difference embedding against its mixed-norm refinement",
            Window::EmbedComparison,
        )
        .with(
            [(2, 2.0, 4.0), (3, 1.0, 1.25)]
                .into_iter()
                .map(|(n, p, q)| (pq(n, p, q), pair(embed1_lhs(n, p, q), embed32_lhs(n, p, q))))
                .collect(),
        ),
        Entry::report(
            "embed321",
            "sum_k int h^{(n-1)/q'-1} ||D_k(h)f||_{L^{q,1}[L^1]_k} dh/h <= c sum_k ||D_k f||_{H^1}",
            Window::Embed321,
        )
        .mean_zero()
        .with(
            [(2, 2.0), (3, 1.5)]
                .into_iter()
                .map(|(n, q)| (Params { q: Some(q), ..Params::n(n) }, pair(refined_h1_lhs(n, q), h1_of_derivatives())))
                .collect(),
        ),
        Entry::report(
            "hardy1",
            "sum_k int h^{-a} ||D_k(h)f||_{V_{q,k}} dh/h <= c sum_k ||D_k f||_{H^1}, a = 1-(n-1)/q'",
            Window::HardyRefined,
        )
        .mean_zero()
        .with(
            [(2, 3.0), (3, 1.5)]
                .into_iter()
                .map(|(n, q)| (Params { q: Some(q), ..Params::n(n) }, pair(refined_h1_lhs(n, q), h1_of_derivatives())))
                .collect(),
        ),
        Entry::report(
            "hardy53",
            "sum_k int h^{n/q'-1} ||D_k(h)f||_q dh/h <= c sum_k ||D_k f||_{H^1}",
            Window::HardyH1,
        )
        .mean_zero()
        .with(
            [(1, 2.0), (2, 1.5), (3, 1.25)]
                .into_iter()
                .map(|(n, q)| {
                    let a = 1.0 - n as f64 / conjugate(q);
                    (
                        Params { q: Some(q), ..Params::n(n) },
                        pair(besov(a, 1.0, AxisNorm::Fixed(leb(q)), None, false), h1_of_derivatives()),
                    )
                })
                .collect(),
        ),
        Entry::assert(
            "Ulyanov1",
            "phi*(t) <= 2 int_t^inf s^{-1/p} w(phi;s)_p ds/s",
            Window::OneDimensional,
            2.0,
            QUAD_TOL,
        )
        .with(vec![(with_p(1, 1.0), Check::Joint(JointCheck::UlyanovTail { p: 1.0 }))]),
        Entry::assert(
            "ulyanov_pointwise",
            "phi**(t) - phi*(t) <= 2 t^{-1/p} w(phi;t)_p",
            Window::OneDimensional,
            2.0,
            CLOSED_FORM_TOL,
        )
        .with(vec![(with_p(1, 2.0), Check::Joint(JointCheck::UlyanovPointwise { p: 2.0 }))]),
        Entry::report(
            "Ulyanov2",
            "||phi||_q <= c (int t^{-q/p} ||D(t)phi||_p^q dt)^{1/q}",
            Window::Ulyanov,
        )
        .with(vec![(
            pq(1, 1.0, 2.0),
            pair(
                norm(Input::F, leb(2.0)),
                Functional::UlyanovIntegral {
                    p: 1.0,
                    q: 2.0,
                    delta: None,
                },
            ),
        )]),
        Entry::report(
            "Ulyanov3",
            "w(phi;d)_q <= c (int_0^d t^{-q/p} ||D(t)phi||_p^q dt)^{1/q}",
            Window::Ulyanov,
        )
        .with(vec![(
            Params {
                delta: Some(1.0),
                ..pq(1, 1.0, 2.0)
            },
            pair(
                Functional::Modulus { p: 2.0, delta: 1.0 },
                Functional::UlyanovIntegral {
                    p: 1.0,
                    q: 2.0,
                    delta: Some(1.0),
                },
            ),
        )]),
        Entry::assert(
            "omega1",
            "w_1(f;d)_V <= (3/d) int_0^d ||D_1(h)f||_V dh",
            Window::Any,
            3.0,
            CLOSED_FORM_TOL,
        )
        .with(
            [(1, 1.0), (2, 2.0)]
                .into_iter()
                .map(|(n, p)| (with_p(n, p), Check::Joint(JointCheck::Omega1 { p })))
                .collect(),
        ),
        Entry::report(
            "equivalence",
            "Besov integral of w_1 against the one of ||D_1(h)f||",
            Window::BesovPair,
        )
        .with(
            [(1, 1.0, 0.5, 2.0), (2, 2.0, 0.5, 1.0)]
                .into_iter()
                .map(|(n, p, a, th)| {
                    (
                        Params {
                            p: Some(p),
                            alpha: Some(a),
                            theta: Some(th),
                            ..Params::n(n)
                        },
                        pair(
                            besov(a, th, AxisNorm::Fixed(leb(p)), Some(0), true),
                            besov(a, th, AxisNorm::Fixed(leb(p)), Some(0), false),
                        ),
                    )
                })
                .collect(),
        ),
        Entry::report(
            "diff",
            "||f||_{B^b_{q,t}} <= c ||f||_{B^a_{p,t}}, b = a - n(1/p - 1/q)",
            Window::DifferentNorm,
        )
        .with(
            [diff_params(1, 1.0, 2.0, 0.75, 1.0), diff_params(2, 2.0, 4.0, 0.8, 2.0)]
                .into_iter()
                .map(|pr| {
                    let c = diff_check(&pr);
                    (pr, c)
                })
                .collect(),
        ),
        Entry::report("simple1", "||f||_p <= c ||f||_{B^a_{t;1}(L^p[L^r])}", Window::MixedBesov).with(vec![{
            let pr = simple_params(2);
            let c = pair(
                norm(Input::F, leb(pr.p.unwrap())),
                mixed_besov_norm(simple_v(&pr), pr.alpha.unwrap(), pr.theta.unwrap()),
            );
            (pr, c)
        }]),
        Entry::report(
            "simple2",
            "int h^{-tb} ||D_1(h)f||_p^t dh/h <= c int h^{-ta} ||D_1(h)f||_{L^p[L^r]}^t dh/h",
            Window::MixedBesov,
        )
        .with(vec![{
            let pr = simple_params(2);
            let th = pr.theta.unwrap();
            let c = pair(
                besov(mixed_beta(&pr), th, AxisNorm::Fixed(leb(pr.p.unwrap())), Some(0), false),
                besov(pr.alpha.unwrap(), th, AxisNorm::Fixed(simple_v(&pr)), Some(0), false),
            );
            (pr, c)
        }]),
        Entry::report(
            "strong1",
            "||f||_{L^{p,nu}} <= c ||f||_{B^a_{t;1}(L^{p,nu}[L^r])}",
            Window::MixedLorentzBesov,
        )
        .with(vec![{
            let pr = strong_params(2);
            let c = pair(
                norm(Input::F, NormSpec::lor(pr.p.unwrap(), pr.nu.unwrap())),
                mixed_besov_norm(strong_v(&pr), pr.alpha.unwrap(), pr.theta.unwrap()),
            );
            (pr, c)
        }]),
        Entry::report(
            "strong10",
            "int h^{-tb} ||D_1(h)f||_{L^{p,nu}}^t dh/h <= c int h^{-ta} ||D_1(h)f||_{L^{p,nu}[L^r]}^t dh/h",
            Window::MixedLorentzBesov,
        )
        .with(vec![{
            let pr = strong_params(2);
            let th = pr.theta.unwrap();
            let c = pair(
                besov(
                    mixed_beta(&pr),
                    th,
                    AxisNorm::Fixed(NormSpec::lor(pr.p.unwrap(), pr.nu.unwrap())),
                    Some(0),
                    false,
                ),
                besov(pr.alpha.unwrap(), th, AxisNorm::Fixed(strong_v(&pr)), Some(0), false),
            );
            (pr, c)
        }]),
        Entry::report("const1", "||g||_{p,nu} <= c ||g||_{L^{p,nu}} (iterated), nu <= p", Window::IteratedBelow).with(
            [2]
                .into_iter()
                .map(|n| {
                    (
                        Params {
                            p: Some(2.0),
                            nu: Some(1.0),
                            ..Params::n(n)
                        },
                        pair(
                            norm(Input::F, NormSpec::lor(2.0, 1.0)),
                            norm(Input::F, NormSpec::ilor(2.0, 1.0, 0)),
                        ),
                    )
                })
                .collect(),
        ),
        Entry::report("const2", "||g||_{L^{p,nu}} (iterated) <= c ||g||_{p,nu}, p <= nu", Window::IteratedAbove).with(
            [2]
                .into_iter()
                .map(|n| {
                    (
                        Params {
                            p: Some(2.0),
                            nu: Some(4.0),
                            ..Params::n(n)
                        },
                        pair(
                            norm(Input::F, NormSpec::ilor(2.0, 4.0, 0)),
                            norm(Input::F, NormSpec::lor(2.0, 4.0)),
                        ),
                    )
                })
                .collect(),
        ),
        Entry::assert(
            "hardy",
            "(int (t^{l-1} int_0^t phi)^p dt/t)^{1/p} <= (1/(1-l)) (int (t^l phi)^p dt/t)^{1/p}",
            Window::HardyOperator,
            2.0,
            QUAD_TOL,
        )
        .with(vec![(
            Params {
                lambda: Some(0.5),
                p: Some(2.0),
                ..Params::n(1)
            },
            Check::Joint(JointCheck::Hardy { lambda: 0.5, p: 2.0 }),
        )]),
        Entry::assert("bound", "||f**||_p <= p/(p-1) ||f||_p", Window::DoubleStar, 2.0, CLOSED_FORM_TOL).with(vec![(
            with_p(1, 2.0),
            Check::Joint(JointCheck::DoubleStar { p: 2.0 }),
        )]),
        Entry::assert("bound_p3", "||f**||_p <= p/(p-1) ||f||_p at p = 3", Window::DoubleStar, 1.5, CLOSED_FORM_TOL)
            .with(vec![(with_p(2, 3.0), Check::Joint(JointCheck::DoubleStar { p: 3.0 }))]),
        Entry::report(
            "hardy_type",
            "int u^{-a-1} (int_0^u psi t^b dt)^p du <= c int u^{-a-1} (psi(u) u^{b+1})^p du, psi = w(f;t)_1/t",
            Window::QuasiDecreasing,
        )
        .with(vec![(
            Params {
                alpha: Some(0.25),
                beta: Some(0.0),
                p: Some(0.5),
                ..Params::n(1)
            },
            Check::Joint(JointCheck::QuasiDecreasing {
                v: 1.0,
                alpha: 0.25,
                beta: 0.0,
                p: 0.5,
            }),
        )]),
        Entry::report("H_ineq", "int |f^(xi)| |xi|^{-n} dxi <= c ||f||_{H^1}, f = D_1 g", Window::Any)
            .mean_zero()
            .with(
                (1..=3)
                    .map(|n| {
                        (
                            Params::n(n),
                            pair(
                                Functional::WeightedFourier {
                                    input: Input::D(0),
                                    gamma: -(n as f64),
                                },
                                Functional::H1 { input: Input::D(0) },
                            ),
                        )
                    })
                    .collect(),
            ),
        Entry::report("pelcz", "int |f^(xi)| |xi|^{1-n} dxi <= c ||grad f||_1", Window::AtLeastTwo).with(
            [2, 3]
                .into_iter()
                .map(|n| {
                    (
                        Params::n(n),
                        pair(
                            Functional::WeightedFourier {
                                input: Input::F,
                                gamma: 1.0 - n as f64,
                            },
                            grad(1.0),
                        ),
                    )
                })
                .collect(),
        ),
        Entry::report(
            "pelcz1",
            "sum_k int |(D_k f)^(xi)| |xi|^{-n} dxi <= c sum_k ||D_k f||_1",
            Window::AtLeastTwo,
        )
        .with(
            [2, 3]
                .into_iter()
                .map(|n| {
                    (
                        Params::n(n),
                        pair(
                            deriv_sum(Functional::WeightedFourier {
                                input: Input::F,
                                gamma: -(n as f64),
                            }),
                            deriv_sum(norm(Input::F, leb(1.0))),
                        ),
                    )
                })
                .collect(),
        ),
        Entry::report(
            "oberlin",
            "sum_k 2^{k(1-n)} sup_{2^k<=r<=2^{k+1}} int_{S_r} |f^| <= c ||f||_{H^1}, f = D_1 g",
            Window::AtLeastTwo,
        )
        .mean_zero()
        .with(
            [2, 3]
                .into_iter()
                .map(|n| {
                    (
                        Params::n(n),
                        pair(
                            Functional::ShellSum {
                                input: Input::D(0),
                                weight: 1.0 - n as f64,
                            },
                            Functional::H1 { input: Input::D(0) },
                        ),
                    )
                })
                .collect(),
        ),
        Entry::report(
            "sup111",
            "sum_j int_0^inf F**_{t,j}(t^{n-1}) dt <= c ||grad f||_1",
            Window::AtLeastThree,
        )
        .with(vec![(
            Params::n(3),
            pair(Functional::SupIntegral { input: Input::F }, grad(1.0)),
        )]),
        Entry::report(
            "thm64",
            "int [F**_{t,1}(t) + F**_{t,2}(t)] dt <= c (||D_1 f||_{H^1} + ||D_2 f||_{H^1})",
            Window::Plane,
        )
        .mean_zero()
        .with(vec![(
            Params::n(2),
            pair(Functional::SupIntegral { input: Input::F }, h1_of_derivatives()),
        )]),
        Entry::report(
            "obertype1",
            "sum_k 2^{k(2-n)} sup_{2^k<=r<=2^{k+1}} int_{S_r} |f^| <= c ||grad f||_1",
            Window::AtLeastThree,
        )
        .with(vec![(
            Params::n(3),
            pair(
                Functional::ShellSum {
                    input: Input::F,
                    weight: -1.0,
                },
                grad(1.0),
            ),
        )]),
        Entry::report(
            "obertype33",
            "sum_j sum_k 2^{k(2-n)} sup_{2^k<=|xi_j|<=2^{k+1}} int_{Q_k^(j)} |f^| <= c ||grad f||_1",
            Window::AtLeastThree,
        )
        .with(vec![(
            Params::n(3),
            pair(Functional::CubeShellSum { input: Input::F }, grad(1.0)),
        )]),
        Entry::assert(
            "cube_annulus",
            "int_{P_k} |f^| <= |band_k| sum_j sup_{2^{k-1}<=|xi_j|<=2^k} int_{Q_k^(j)} |f^|",
            Window::AtLeastTwo,
            1.0,
            1e-9,
        )
        .with(
            [2, 3]
                .into_iter()
                .map(|n| (Params::n(n), Check::Joint(JointCheck::CubeAnnulus { input: Input::F })))
                .collect(),
        ),
        Entry::assert(
            "sup0",
            "sup_{cone} |du/dt| <= sum_j N(R_j(D_j f)) at every node",
            Window::AtMostTwo,
            1.0,
            0.0,
        )
        .with(
            [1, 2]
                .into_iter()
                .map(|n| (Params::n(n), Check::Joint(JointCheck::ConeDerivative)))
                .collect(),
        ),
        Entry::assert("vert", "||N_v f||_1 <= ||N f||_1", Window::AtMostTwo, 1.0, 1e-12).with(
            [1, 2]
                .into_iter()
                .map(|n| (Params::n(n), Check::Joint(JointCheck::VerticalCone)))
                .collect(),
        ),
        Entry::report(
            "vert2",
            "sum_{j=0}^n ||N_v f_j||_1 against ||f||_{H^1}, f = D_1 g",
            Window::AtMostTwo,
        )
        .mean_zero()
        .with(
            [1, 2]
                .into_iter()
                .map(|n| {
                    (
                        Params::n(n),
                        pair(
                            Functional::VerticalSum { input: Input::D(0) },
                            Functional::H1 { input: Input::D(0) },
                        ),
                    )
                })
                .collect(),
        ),
        Entry::probe(
            "embed32_n2_p1",
            "mixed-norm difference embedding at n = 2, p = 1",
            Window::Embed32Open,
        )
        .with(vec![(
            pq(2, 1.0, 2.0),
            pair(embed32_lhs(2, 1.0, 2.0), deriv_sum(norm(Input::F, leb(1.0)))),
        )]),
        Entry::probe(
            "obertype_n2",
            "sum_k sup_{2^k<=r<=2^{k+1}} int_{S_r} |f^| <= c ||grad f||_1 at n = 2",
            Window::Plane,
        )
        .with(vec![(
            Params::n(2),
            pair(
                Functional::ShellSum {
                    input: Input::F,
                    weight: 0.0,
                },
                grad(1.0),
            ),
        )]),
    ];
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// Registry entry by id.
pub fn find(id: &str) -> Option<InequalitySpec> {
    registry().into_iter().find(|s| s.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn ids_unique_and_enough() {
        let reg = registry();
        assert!(reg.len() >= 20);
        let ids: HashSet<_> = reg.iter().map(|s| s.id.clone()).collect();
        assert_eq!(ids.len(), reg.len());
    }

    #[test]
    fn instances_inside_their_windows() {
        for s in registry() {
            for i in &s.instances {
                s.validate(&i.params).unwrap_or_else(|e| panic!("{}: {e}", s.id));
            }
            if s.kind == Kind::Assert {
                assert!(s.constant.is_some(), "{}", s.id);
            }
        }
    }

    #[test]
    fn windows_reject_outside_parameters() {
        for s in registry() {
            let mut pr = s.instances[0].params.clone();
            pr.n = 7;
            assert!(s.validate(&pr).is_err(), "{}", s.id);
        }
        let e32 = find("embed32").unwrap();
        assert!(e32.validate(&pq(3, 1.0, 3.0)).is_err());
        assert!(e32.validate(&pq(2, 1.0, 2.0)).is_err());
        assert!(find("embed1").unwrap().validate(&pq(1, 1.0, 2.0)).is_err());
        assert!(find("embed321").unwrap().validate(&Params { q: Some(2.0), ..Params::n(3) }).is_err());
        assert!(find("sup111").unwrap().validate(&Params::n(2)).is_err());
        let mut pr = simple_params(2);
        pr.alpha = Some(0.4);
        assert!(find("simple2").unwrap().validate(&pr).is_err());
        let mut pr = strong_params(2);
        pr.nu = Some(3.0);
        assert!(find("strong10").unwrap().validate(&pr).is_err());
        assert!(find("const2")
            .unwrap()
            .validate(&Params {
                p: Some(3.0),
                nu: Some(2.0),
                ..Params::n(2)
            })
            .is_err());
    }
}
