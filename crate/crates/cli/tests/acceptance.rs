//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test -p ineqlab-cli --test acceptance`.

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use ineqlab::fourier::{self, AbsInterpolator, ShellQuadrature};
use ineqlab::gridfn::{sample, CorpusFile, CorpusSet, GridFunction, GridSpec};
use ineqlab::norms::{mixed_norm, NormSpec};
use ineqlab::rearrange::{decreasing_rearrangement, distribution_function, iterated_rearrangement};
use ineqlab::verify::{
    self, default_corpus, default_grid, find, probe, run_set, ProbeQuestion, RunOptions, DEFAULT_CORPUS_COUNT,
    DEFAULT_CORPUS_SEED, OPEN_QUESTION_LABEL, STABILITY_DRIFT,
};

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn corpus() -> CorpusFile {
    default_corpus(DEFAULT_CORPUS_SEED, DEFAULT_CORPUS_COUNT).expect("default corpus")
}

fn time_limit(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("{what} took {:.1} s, limit {} s", t.as_secs_f64(), limit.as_secs()))
    } else {
        Ok(())
    }
}

fn rearrangement_exactness() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut worst_mass = 0.0f64;
    for (n, seed) in [(1usize, 11u64), (2, 12)] {
        let set = CorpusSet::generate(seed, 50, default_grid(n).unwrap()).unwrap();
        for spec in &set.members {
            let f = sample(spec, &set.grid).map_err(|e| e.to_string())?;
            let prof = decreasing_rearrangement(&f);
            let mut levels = f.abs_values();
            levels.push(0.0);
            levels.sort_unstable_by(f64::total_cmp);
            levels.dedup();
            for &y in &levels {
                let a = distribution_function(&f, y);
                let b = prof.level_measure(y);
                if a != b {
                    return Err(format!("n={n} {}: λ({y:e}) = {a} but profile gives {b}", spec.family.id().name()));
                }
            }
            let l1: f64 = f.abs_values().iter().sum::<f64>() * f.grid().cell_volume();
            worst_mass = worst_mass.max(rel(prof.mass(), l1));
            checked += 1;
        }
    }
    if worst_mass > 1e-12 {
        return Err(format!("∫f* vs ‖f‖₁ relative error {worst_mass:e}"));
    }
    time_limit(start, Duration::from_secs(10), "rearrangement check")?;
    Ok(format!(
        "{checked} members, all levels exact, mass error {worst_mass:.1e}, {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

fn explicit_constants() -> Outcome {
    let start = Instant::now();
    let c = corpus();
    let set = c.set_for_dim(1).unwrap();
    let opts = RunOptions {
        members: None,
        refine: true,
        dilation: false,
    };
    let mut parts = Vec::new();
    for id in ["hardy", "bound", "ulyanov_pointwise", "Ulyanov1", "omega1"] {
        let spec = find(id).ok_or(format!("{id} missing"))?;
        let inst = spec.instance(1).ok_or(format!("{id} has no n = 1 instance"))?;
        let r = run_set(&spec, inst, set, &opts).map_err(|e| e.to_string())?;
        let bound = spec.constant.unwrap() * (1.0 + spec.tolerance);
        if !r.passed || r.members.len() != set.members.len() {
            let bad: Vec<_> = r.members.iter().filter(|m| !m.passed).map(|m| m.index).collect();
            return Err(format!("{id}: members {bad:?} exceed {bound}"));
        }
        parts.push(format!("{id} {:.4}/{}", r.empirical_constant, spec.constant.unwrap()));
    }
    time_limit(start, Duration::from_secs(30), "explicit-constant suite")?;
    Ok(format!("{} ({:.1} s)", parts.join(", "), start.elapsed().as_secs_f64()))
}

fn gaussian_error(n: usize, l: f64, pts: usize) -> f64 {
    let grid = GridSpec::cube(n, l, pts).unwrap();
    let f = GridFunction::from_fn(grid, |x| (-PI * x.iter().map(|v| v * v).sum::<f64>()).exp()).unwrap();
    let spec = fourier::transform(&f);
    let g = spec.grid().clone();
    spec.values()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let xi = g.coords(i);
            (*z - (-PI * xi.iter().map(|v| v * v).sum::<f64>()).exp()).norm()
        })
        .fold(0.0, f64::max)
}

fn fourier_self_duality() -> Outcome {
    let e1 = gaussian_error(1, 8.0, 512);
    let e2 = gaussian_error(2, 8.0, 256);
    if e1 > 1e-8 || e2 > 1e-6 {
        return Err(format!("gaussian errors n=1 {e1:e}, n=2 {e2:e}"));
    }
    let c = corpus();
    let mut worst = 0.0f64;
    for n in [2, 3] {
        let set = c.set_for_dim(n).unwrap();
        for spec in set.members.iter().take(5) {
            let f = sample(spec, &set.grid).unwrap();
            let v = f.as_real().unwrap();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            // Complex samples keep the unpaired Nyquist modes that a real
            // part would drop.
            let f0 = GridFunction::complex(
                set.grid.clone(),
                v.iter().map(|x| Complex64::new(x - mean, 0.0)).collect(),
            )
            .unwrap();
            let scale = f0.abs_values().into_iter().fold(0.0, f64::max);
            let mut acc = vec![Complex64::new(0.0, 0.0); f0.grid().len()];
            for j in 0..n {
                let r = fourier::riesz(&fourier::riesz(&f0, j).unwrap(), j).unwrap();
                for (a, b) in acc.iter_mut().zip(r.to_complex_vec()) {
                    *a += b;
                }
            }
            for (a, b) in acc.iter().zip(f0.to_complex_vec()) {
                worst = worst.max((a + b).norm() / scale);
            }
        }
    }
    if worst > 1e-8 {
        return Err(format!("Σ R_j² + Id relative error {worst:e}"));
    }
    Ok(format!("gaussian n=1 {e1:.1e}, n=2 {e2:.1e}; Σ R_j² = -Id to {worst:.1e}"))
}

fn cone_derivative_pointwise() -> Outcome {
    let c = corpus();
    let set = c.set_for_dim(2).unwrap();
    let spec = find("sup0").unwrap();
    let inst = spec.instance(2).unwrap();
    let r = run_set(
        &spec,
        inst,
        set,
        &RunOptions {
            members: Some(20),
            refine: false,
            dilation: false,
        },
    )
    .map_err(|e| e.to_string())?;
    if r.members.len() < 20 {
        return Err(format!("only {} members", r.members.len()));
    }
    if !r.passed {
        let bad: Vec<_> = r
            .members
            .iter()
            .filter(|m| !m.passed)
            .map(|m| format!("{}: {:?}", m.index, m.coarse.as_ref().map(|s| s.ratio)))
            .collect();
        return Err(format!("violations at members {bad:?}"));
    }
    Ok(format!("20 members, worst lhs/(rhs + tol) = {:.6}", r.max_ratio_coarse))
}

fn dilation_homogeneity() -> Outcome {
    let c = corpus();
    let opts = RunOptions {
        members: Some(10),
        refine: false,
        dilation: true,
    };
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    for id in ["embed0", "embed1", "embed32"] {
        let spec = find(id).unwrap();
        for inst in &spec.instances {
            let set = c.set_for_dim(inst.params.n).unwrap();
            let r = run_set(&spec, inst, set, &opts).map_err(|e| e.to_string())?;
            let d = r.dilation.as_ref().ok_or(format!("{id}: no dilation sweep"))?;
            let label = format!("{id}/n{} {:.2}%", inst.params.n, 100.0 * d.max_deviation);
            if !d.passed || d.deviations.len() < 10 {
                failures.push(label.clone());
            }
            parts.push(label);
        }
    }
    if failures.is_empty() {
        Ok(parts.join(", "))
    } else {
        Err(format!("over 5%: {}", failures.join(", ")))
    }
}

fn constant_stability() -> Outcome {
    let c = corpus();
    let opts = RunOptions {
        members: Some(20),
        refine: true,
        dilation: false,
    };
    let selected: [(&str, &[usize]); 12] = [
        ("embed32", &[3]),
        ("sup111", &[3]),
        ("obertype1", &[3]),
        ("pelcz", &[2, 3]),
        ("oberlin", &[2, 3]),
        ("const1", &[2]),
        ("const2", &[2]),
        ("strong10", &[2]),
        ("simple2", &[2]),
        ("Ulyanov2", &[1]),
        ("Ulyanov3", &[1]),
        ("diff", &[1, 2]),
    ];
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    let mut n3_time = Duration::ZERO;
    for (id, dims) in selected.iter() {
        let spec = find(id).unwrap();
        for &n in dims.iter() {
            let inst = spec.instance(n).ok_or(format!("{id}: no n = {n} instance"))?;
            let start = Instant::now();
            let r = run_set(&spec, inst, c.set_for_dim(n).unwrap(), &opts).map_err(|e| e.to_string())?;
            if n == 3 {
                n3_time += start.elapsed();
            }
            let drift = r.drift.unwrap_or(f64::NAN);
            let label = format!("{id}/n{n} {:.2}%", 100.0 * drift);
            if !(drift <= STABILITY_DRIFT) || !r.passed {
                failures.push(label.clone());
            }
            parts.push(label);
        }
    }
    let mut msg = format!("{} (n=3 at N=64: {:.0} s)", parts.join(", "), n3_time.as_secs_f64());
    if n3_time > Duration::from_secs(600) {
        failures.push("n=3 runtime over 10 min".into());
    }
    if failures.is_empty() {
        Ok(msg)
    } else {
        msg = format!("drift over 10% or invalid: {}; all: {msg}", failures.join(", "));
        Err(msg)
    }
}

/// `‖g‖_{q,r}` of a nonnegative step function with equal cells.
fn lorentz_oracle(mut v: Vec<f64>, cell: f64, q: f64, r: f64) -> f64 {
    v.sort_by(|a, b| b.total_cmp(a));
    let e = r / q;
    let s: f64 = v
        .iter()
        .enumerate()
        .map(|(i, x)| x.powf(r) * (((i + 1) as f64 * cell).powf(e) - (i as f64 * cell).powf(e)))
        .sum();
    (s * q / r).powf(1.0 / r)
}

fn mixed_oracle(f: &GridFunction, axis: usize, p: f64, q: f64) -> f64 {
    let g = f.grid();
    let pts = g.points().to_vec();
    let h = g.spacing(axis);
    let abs = f.abs_values();
    let strides = g.strides().to_vec();
    let mut slices = std::collections::BTreeMap::<Vec<usize>, f64>::new();
    for (lin, v) in abs.iter().enumerate() {
        let key: Vec<usize> = (0..pts.len())
            .filter(|&a| a != axis)
            .map(|a| (lin / strides[a]) % pts[a])
            .collect();
        *slices.entry(key).or_insert(0.0) += v.powf(p) * h;
    }
    let cell = g.cell_volume() / h;
    let values: Vec<f64> = slices.values().map(|s| s.powf(1.0 / p)).collect();
    lorentz_oracle(values, cell, q, p)
}

fn radial_sweep_oracle(interp: &AbsInterpolator, g: &dyn Fn(f64) -> f64, n: usize, w: f64) -> (f64, usize) {
    let sigma = if n == 2 { 2.0 * PI } else { 4.0 * PI };
    let dxi = interp.min_spacing();
    let rmax = interp.max_radius();
    let mut total = 0.0;
    let mut shells = 0;
    for k in -40..40 {
        let a = 2f64.powi(k);
        if a < dxi * (1.0 - 1e-12) || 2.0 * a > rmax * (1.0 + 1e-12) {
            continue;
        }
        shells += 1;
        let sup = (0..=4000)
            .map(|i| {
                let r = a * (1.0 + i as f64 / 4000.0);
                sigma * r.powi(n as i32 - 1) * g(r)
            })
            .fold(0.0, f64::max);
        total += 2f64.powf(k as f64 * w) * sup;
    }
    (total, shells)
}

fn oracle_equivalences() -> Outcome {
    let c = corpus();
    let mut mixed_err = 0.0f64;
    for n in [2, 3] {
        let set = c.set_for_dim(n).unwrap();
        for spec in set.members.iter().take(8) {
            let f = sample(spec, &set.grid).unwrap();
            for axis in 0..n {
                for (p, q) in [(1.0, 1.5), (2.0, 3.0), (1.5, 1.5)] {
                    let got = mixed_norm(&f, axis, &NormSpec::leb(p), &NormSpec::lor(q, p)).map_err(|e| e.to_string())?;
                    mixed_err = mixed_err.max(rel(got, mixed_oracle(&f, axis, p, q)));
                }
            }
        }
    }
    if mixed_err > 1e-12 {
        return Err(format!("mixed_norm vs slice oracle {mixed_err:e}"));
    }

    let mut shell_err = 0.0f64;
    for (n, pts) in [(2usize, 256usize), (3, 64)] {
        let grid = GridSpec::cube(n, 4.0, pts).unwrap();
        let spectra: [(&str, Box<dyn Fn(f64) -> f64>); 3] = [
            ("gauss", Box::new(|r: f64| (-r * r / 18.0).exp())),
            ("bump", Box::new(|r: f64| r * r * (-r / 2.0).exp())),
            ("decay", Box::new(|r: f64| 1.0 / (1.0 + r * r).powf(1.5))),
        ];
        for (_, g) in &spectra {
            let interp = AbsInterpolator::from_fn(&grid, |xi| g(xi.iter().map(|v| v * v).sum::<f64>().sqrt()));
            let quad = ShellQuadrature::default_for(n).unwrap();
            for w in [0.0, 1.0 - n as f64, -1.0] {
                let got = fourier::dyadic_shell_sum(&interp, w, &quad).map_err(|e| e.to_string())?;
                let (want, shells) = radial_sweep_oracle(&interp, g.as_ref(), n, w);
                if got.shells_used.len() != shells {
                    return Err(format!("shell count {} vs oracle {shells}", got.shells_used.len()));
                }
                shell_err = shell_err.max(rel(got.value, want));
            }
        }
    }
    if shell_err > 0.02 {
        return Err(format!("dyadic_shell_sum vs sweep oracle {:.2}%", 100.0 * shell_err));
    }

    let mut sep_err = 0.0f64;
    let line = GridSpec::cube(1, 4.0, 64).unwrap();
    let set = CorpusSet::generate(77, 12, line.clone()).unwrap();
    for pair in set.members.chunks(2) {
        let a = sample(&pair[0], &line).unwrap().abs_values();
        let b = sample(&pair[1], &line).unwrap().abs_values();
        let plane = GridSpec::cube(2, 4.0, 64).unwrap();
        let st = plane.strides().to_vec();
        for axis in 0..2 {
            let f = GridFunction::from_fn(plane.clone(), |_| 0.0).unwrap();
            let vals: Vec<f64> = (0..plane.len())
                .map(|lin| {
                    let (i0, i1) = ((lin / st[0]) % 64, (lin / st[1]) % 64);
                    a[i0] * b[i1]
                })
                .collect();
            let f = GridFunction::real(f.grid().clone(), vals).unwrap();
            let table = iterated_rearrangement(&f, axis).map_err(|e| e.to_string())?;
            let (mut s, mut t) = if axis == 0 { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            s.sort_by(|x, y| y.total_cmp(x));
            t.sort_by(|x, y| y.total_cmp(x));
            let top = s[0] * t[0];
            for (i, si) in s.iter().enumerate() {
                for (j, tj) in t.iter().enumerate() {
                    sep_err = sep_err.max((table.get(i, j) - si * tj).abs() / top);
                }
            }
        }
    }
    if sep_err > 1e-10 {
        return Err(format!("separability identity error {sep_err:e}"));
    }
    Ok(format!(
        "mixed {mixed_err:.1e}, shell sum {:.2}%, separability {sep_err:.1e}",
        100.0 * shell_err
    ))
}

fn ineqlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ineqlab"))
}

fn probe_outputs() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let depth = 3;
    let mut parts = Vec::new();
    for q in ProbeQuestion::ALL {
        let o = ineqlab()
            .args(["probe", "--question", q.id(), "--depth", &depth.to_string(), "--out"])
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(format!("{}: {}", q.id(), String::from_utf8_lossy(&o.stderr)));
        }
        let text = fs::read_to_string(dir.path().join(format!("probe_{}.json", q.id()))).map_err(|e| e.to_string())?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        if v["label"] != OPEN_QUESTION_LABEL || !v["label"].as_str().unwrap_or("").contains("OPEN QUESTION") {
            return Err(format!("{}: label {}", q.id(), v["label"]));
        }
        let levels = v["levels"].as_array().ok_or("no levels")?;
        if levels.len() != depth {
            return Err(format!("{}: {} levels", q.id(), levels.len()));
        }
        let mut prev = f64::NEG_INFINITY;
        for l in levels {
            let (m, run) = (l["max_ratio"].as_f64().ok_or("max_ratio")?, l["running_max"].as_f64().ok_or("running_max")?);
            if run < prev || run < m || run != prev.max(m) {
                return Err(format!("{}: running max bookkeeping broken at level {}", q.id(), l["level"]));
            }
            prev = run;
        }
        if v.get("monotone").and_then(|m| m.as_bool()).is_none() || v.get("passed").is_some() {
            return Err(format!("{}: missing trend flag or carries a verdict", q.id()));
        }
        let direct = probe(q, 1).map_err(|e| e.to_string())?;
        if (direct.levels[0].max_ratio - levels[0]["max_ratio"].as_f64().unwrap()).abs() > 0.0 {
            return Err(format!("{}: probe not reproducible", q.id()));
        }
        parts.push(format!("{} growth {:.3}", q.id(), v["growth"].as_f64().unwrap_or(f64::NAN)));
    }
    Ok(parts.join(", "))
}

fn strip_metadata(text: &str) -> Result<String, String> {
    let mut v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    v.as_object_mut().ok_or("not an object")?.remove("metadata").ok_or("no metadata key")?;
    serde_json::to_string_pretty(&v).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = ineqlab()
            .args(["verify", "all", "--members", "2", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if o.status.code() != Some(0) {
            return Err(format!("verify all exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
        }
        reports.push(fs::read_to_string(out.join("report.json")).map_err(|e| e.to_string())?);
    }
    let (a, b) = (strip_metadata(&reports[0])?, strip_metadata(&reports[1])?);
    let entries = verify::ReportDocument::from_json(&reports[0]).map_err(|e| e.to_string())?.entries.len();
    // The raw files must also agree line by line outside the metadata block.
    let body = |t: &str| -> Vec<String> {
        let mut out = Vec::new();
        let mut skip = false;
        for line in t.lines() {
            if line.starts_with("  \"metadata\"") {
                skip = true;
            }
            if !skip {
                out.push(line.to_string());
            }
            if skip && line.starts_with("  }") {
                skip = false;
            }
        }
        out
    };
    if a != b || body(&reports[0]) != body(&reports[1]) {
        return Err("reports differ outside metadata".into());
    }
    Ok(format!("{entries} entries, {} bytes, identical outside metadata", reports[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 rearrangement exactness", rearrangement_exactness),
        ("2 explicit-constant suite", explicit_constants),
        ("3 Fourier self-duality and Riesz identity", fourier_self_duality),
        ("4 pointwise cone derivative bound (sup0)", cone_derivative_pointwise),
        ("5 dilation homogeneity", dilation_homogeneity),
        ("6 empirical-constant stability", constant_stability),
        ("7 oracle equivalences", oracle_equivalences),
        ("8 open-question probes", probe_outputs),
        ("9 determinism of verify all", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {name}: PASS ({secs:.1} s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.1} s) {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
