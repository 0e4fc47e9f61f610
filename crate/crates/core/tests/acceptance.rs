//! One pass/fail line per acceptance criterion, written straight to stderr so
//! the lines survive output capture.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rudin_wandering::blaschke::{blaschke_factor, blaschke_product};
use rudin_wandering::cli::{rudin_prefix, verify};
use rudin_wandering::model::{
    compressed_matrix_analytic, compressed_matrix_numeric, model_basis, suggested_cap, szego,
};
use rudin_wandering::rudin::{
    generation_defect, recommended_caps, wandering_via_blocks, wandering_via_bruteforce,
    DEFAULT_MARGIN,
};
use rudin_wandering::{BlaschkePoint, Caps, RudinSpec, Series1, Series2, DEFAULT_TOL};

const BIN: &str = env!("CARGO_BIN_EXE_rudin-wandering");

type Check<'a> = (&'static str, Duration, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(name: &str, elapsed: Duration, outcome: &Outcome) {
    let status = if outcome.pass { "PASS" } else { "FAIL" };
    let text = format!(
        "[{status}] {name}: {} ({:.2} s)\n",
        outcome.detail,
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(text.as_bytes());
}

fn grid() -> Vec<Complex64> {
    [0.0, 0.2, 0.5, 0.8]
        .iter()
        .map(|&r| Complex64::new(r, 0.0))
        .chain([Complex64::new(0.3, 0.4)])
        .collect()
}

fn matrix_agreement() -> Outcome {
    let theta2 = [
        BlaschkePoint::real(0.2, 1).unwrap(),
        BlaschkePoint::real(0.6, 1).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    let mut worst_theta: f64 = 0.0;
    for alpha in grid() {
        for m in 1..=6 {
            let cap = suggested_cap(alpha, m, &theta2).max(300);
            let analytic = compressed_matrix_analytic(alpha, m).unwrap();
            let plain = compressed_matrix_numeric(alpha, m, cap, &[]).unwrap();
            let twisted = compressed_matrix_numeric(alpha, m, cap, &theta2).unwrap();
            worst = worst.max(analytic.max_abs_diff(&plain).unwrap());
            worst_theta = worst_theta.max(plain.max_abs_diff(&twisted).unwrap());
        }
    }
    Outcome {
        pass: worst < 1e-8 && worst_theta < 1e-8,
        detail: format!("max |analytic - numeric| = {worst:.2e}, theta2 effect = {worst_theta:.2e} (limit 1e-8)"),
    }
}

fn model_orthogonality() -> Outcome {
    let mut off: f64 = 0.0;
    let mut norm_err: f64 = 0.0;
    for alpha in grid() {
        for m in 1..=6 {
            let basis = model_basis(alpha, m, suggested_cap(alpha, m, &[]), &[]).unwrap();
            let target = (1.0 - alpha.norm_sqr()).sqrt();
            for (i, u) in basis.vectors.iter().enumerate() {
                norm_err = norm_err.max((u.norm() - target).abs());
                for v in &basis.vectors[i + 1..] {
                    off = off.max(u.inner_product(v).unwrap().norm());
                }
            }
        }
    }
    Outcome {
        pass: off < 1e-9 && norm_err < 1e-9,
        detail: format!(
            "max |<v_i, v_j>| = {off:.2e}, max norm error = {norm_err:.2e} (limit 1e-9)"
        ),
    }
}

fn random_agreement() -> Outcome {
    let summary = verify(50, 2024, DEFAULT_TOL);
    Outcome {
        pass: summary.agreed == 50,
        detail: format!(
            "{}/50 specs with three-way agreement and stable dims",
            summary.agreed
        ),
    }
}

fn corollary() -> Outcome {
    let spec = rudin_prefix(3).unwrap();
    let caps = recommended_caps(&spec, DEFAULT_TOL, DEFAULT_MARGIN).unwrap();
    let blocks = wandering_via_blocks(&spec, caps).unwrap();
    let brute = wandering_via_bruteforce(&spec, caps, DEFAULT_MARGIN, DEFAULT_TOL).unwrap();
    let full = blaschke_product(&spec.points, caps.z2).unwrap();
    let tail = blaschke_product(&spec.points[1..], caps.z2).unwrap();
    let first = Series2::tensor(&Series1::one(caps.z1), &full, caps).unwrap();
    let z1 = Series1::monomial(1, caps.z1).unwrap();
    let second = Series2::tensor(&z1, &tail, caps).unwrap();
    let residual = [first, second]
        .iter()
        .map(|v| {
            brute
                .residual(&v.scale(Complex64::new(1.0 / v.norm(), 0.0)))
                .unwrap()
        })
        .fold(0.0f64, f64::max);
    Outcome {
        pass: blocks.dim == 2 && brute.dim() == 2 && residual < 1e-7,
        detail: format!(
            "dims block {} brute force {} at caps ({}, {}), tag residual {residual:.2e} (limit 1e-7)",
            blocks.dim,
            brute.dim(),
            caps.z1,
            caps.z2
        ),
    }
}

fn generation() -> Outcome {
    let spec = RudinSpec::new(
        vec![
            BlaschkePoint::real(0.3, 1).unwrap(),
            BlaschkePoint::real(0.5, 1).unwrap(),
        ],
        Caps::new(0, 0),
    );
    let small = generation_defect(&spec, Caps::new(4, 40), DEFAULT_TOL).unwrap();
    let large = generation_defect(&spec, Caps::new(6, 48), DEFAULT_TOL).unwrap();
    let empty = generation_defect(
        &RudinSpec::new(vec![], Caps::new(0, 0)),
        Caps::new(4, 6),
        DEFAULT_TOL,
    )
    .unwrap();
    Outcome {
        pass: small.defect > 0 && large.defect >= small.defect && empty.defect == 0,
        detail: format!(
            "defects {} -> {} for {{0.3, 0.5}}, {} for the empty sequence",
            small.defect, large.defect, empty.defect
        ),
    }
}

fn factors() -> Outcome {
    let mut norm_err: f64 = 0.0;
    let mut shift_err: f64 = 0.0;
    for r in [0.0, 0.1, 0.3, 0.5, 0.7, 0.9] {
        for t in [0.0, 1.0, 2.5, 4.0] {
            let alpha = Complex64::from_polar(r, t);
            let cap = 600;
            let b = blaschke_factor(alpha, cap).unwrap();
            norm_err = norm_err.max((b.norm() - 1.0).abs());
            if r > 0.0 {
                let scale = -(alpha.conj() / r) * (1.0 - r * r);
                let expected = szego(alpha, cap - 1).unwrap().scale(scale);
                let shifted = b.shift_down().with_cap(cap - 1);
                shift_err = shift_err.max(shifted.max_abs_diff(&expected).unwrap());
            }
        }
    }
    Outcome {
        pass: norm_err < 1e-10 && shift_err < 1e-12,
        detail: format!("max | ||b|| - 1 | = {norm_err:.2e} (1e-10), shift identity error = {shift_err:.2e} (1e-12)"),
    }
}

fn run(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn cli(dir: &Path) -> Outcome {
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{"alphas": [[0, 0], [0.5, 0]], "mults": [1, 1], "deg1": 8, "deg2": 60}"#,
    )
    .unwrap();
    let config = config.to_str().unwrap();
    let wandering = ["wandering", config, "--json"];
    let verify = ["verify", "--samples", "5", "--seed", "7", "--json"];
    let (w1, a) = run(&wandering);
    let (_, b) = run(&wandering);
    let (v1, c) = run(&verify);
    let (_, d) = run(&verify);
    let identical = a == b && c == d && !a.is_empty() && !c.is_empty();
    let (disagree, _) = run(&["verify", "--samples", "5", "--seed", "1", "--tol", "1e-1"]);
    let (input, _) = run(&["factor", "--alpha", "1.0"]);
    let (guard, _) = run(&["corollary-rudin", "--n-points", "6"]);
    Outcome {
        pass: identical && (w1, v1, disagree, input, guard) == (0, 0, 1, 2, 3),
        detail: format!(
            "byte-identical reruns {identical}, exit codes ok {w1}/{v1}, disagreement {disagree}, input {input}, guard {guard}"
        ),
    }
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<Check> = vec![
        (
            "1 compressed matrix",
            Duration::from_secs(u64::MAX),
            Box::new(matrix_agreement),
        ),
        (
            "2 model basis",
            Duration::from_secs(u64::MAX),
            Box::new(model_orthogonality),
        ),
        (
            "3 random three-way agreement",
            Duration::from_secs(60),
            Box::new(random_agreement),
        ),
        (
            "4 corollary prefix M = 3",
            Duration::from_secs(10),
            Box::new(corollary),
        ),
        (
            "5 generation defect",
            Duration::from_secs(u64::MAX),
            Box::new(generation),
        ),
        (
            "6 Blaschke factor identities",
            Duration::from_secs(u64::MAX),
            Box::new(factors),
        ),
        (
            "7 CLI determinism and exit codes",
            Duration::from_secs(5),
            Box::new(|| cli(dir.path())),
        ),
    ];
    let mut failed = Vec::new();
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if elapsed > *budget {
            outcome.pass = false;
            outcome.detail += &format!(", over the {} s budget", budget.as_secs());
        }
        line(name, elapsed, &outcome);
        if !outcome.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
