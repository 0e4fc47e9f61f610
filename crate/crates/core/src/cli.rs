//! Command-line front end.
//!
//! Exit codes: 0 success or agreement, 1 numerical disagreement, 2 input or
//! schema error, 3 conditioning guard.

use std::f64::consts::TAU;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::blaschke::{blaschke_factor, BlaschkePoint, RudinSpec, DEFAULT_TOL};
use crate::error::Error;
use crate::model::{
    compressed_matrix_analytic, compressed_matrix_numeric, model_basis, suggested_cap,
};
use crate::rudin::{
    recommended_caps, report, BlockSummary, WanderingReport, DEFAULT_CAP_STEP, DEFAULT_MARGIN,
};
use crate::series::{Caps, Series2};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DISAGREEMENT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONDITIONING: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "rudin-wandering",
    version,
    about = "Wandering subspaces of Rudin submodules of H^2(D^2)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Taylor coefficients of the Blaschke factor b_alpha
    Factor {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha_im: f64,
        #[arg(long, default_value_t = 16)]
        cap: usize,
        #[arg(long)]
        json: bool,
    },
    /// Analytic and numeric matrices of the compressed adjoint shift
    Matrix {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha_im: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Orthogonal basis of theta2 * (H^2 ⊖ b_alpha^m H^2)
    ModelBasis {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha_im: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        cap: Option<usize>,
        /// Zero of theta2 as RE,IM,MULT; repeatable
        #[arg(long, allow_hyphen_values = true)]
        theta2: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Wandering subspace of the Rudin submodule described by a JSON config
    Wandering {
        config: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Three-way agreement on seeded random specs
    Verify {
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite prefix of Rudin's sequence alpha_i = 1 - i^-3 with multiplicity i
    CorollaryRudin {
        #[arg(long)]
        n_points: usize,
        #[arg(long)]
        deg1: Option<usize>,
        #[arg(long)]
        deg2: Option<usize>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_margin() -> usize {
    DEFAULT_MARGIN
}

fn default_cap_step() -> usize {
    DEFAULT_CAP_STEP
}

/// JSON description of a Rudin sequence and its truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub alphas: Vec<[f64; 2]>,
    pub mults: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deg1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deg2: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_margin")]
    pub margin: usize,
    #[serde(default = "default_cap_step")]
    pub cap_step: usize,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) => EXIT_DISAGREEMENT,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

impl Config {
    /// Parses and validates a config document.
    pub fn from_json(text: &str) -> std::result::Result<Config, Failure> {
        let config: Config =
            serde_json::from_str(text).map_err(|e| Failure::input(format!("schema error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> std::result::Result<(), Failure> {
        if self.alphas.len() != self.mults.len() {
            return Err(Failure::input(format!(
                "schema error: {} alphas but {} mults",
                self.alphas.len(),
                self.mults.len()
            )));
        }
        if self.deg1 == Some(0) || self.deg2 == Some(0) {
            return Err(Failure::input("schema error: degree caps must be positive"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Failure::input(format!(
                "schema error: tol {} outside (0, 1)",
                self.tol
            )));
        }
        Ok(())
    }

    /// The point sequence; fails on points outside the open disc.
    pub fn spec(&self) -> std::result::Result<RudinSpec, Failure> {
        let points = self
            .alphas
            .iter()
            .zip(&self.mults)
            .map(|(&[re, im], &l)| BlaschkePoint::new(Complex64::new(re, im), l))
            .collect::<crate::Result<Vec<_>>>()?;
        Ok(RudinSpec::new(points, Caps::new(0, 0)).with_tol(self.tol))
    }

    /// Caps from `deg1`/`deg2`, with missing entries taken from
    /// [`recommended_caps`].
    pub fn caps(&self, spec: &RudinSpec) -> crate::Result<Caps> {
        match (self.deg1, self.deg2) {
            (Some(z1), Some(z2)) => Ok(Caps::new(z1, z2)),
            (d1, d2) => {
                let r = recommended_caps(spec, self.tol, self.margin)?;
                Ok(Caps::new(d1.unwrap_or(r.z1), d2.unwrap_or(r.z2)))
            }
        }
    }
}

/// Formatter printing every float with 17 significant digits.
struct Precise<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for Precise<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Pretty JSON with fixed 17-significant-digit floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        Precise {
            inner: PrettyFormatter::with_indent(b"  "),
        },
    );
    value
        .serialize(&mut ser)
        .expect("report types serialize without error");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// One nonzero `z1` row of a basis vector.
#[derive(Debug, Clone, Serialize)]
pub struct BasisRow {
    pub z1_degree: usize,
    pub z2_coefficients: Vec<Complex64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisEntry {
    pub tag: String,
    pub rows: Vec<BasisRow>,
}

fn basis_entry(tag: String, v: &Series2) -> BasisEntry {
    let caps = v.caps();
    let rows = (0..=caps.z1)
        .map(|a| (a, v.row(a)))
        .filter(|(_, row)| row.norm() > 0.0)
        .map(|(a, row)| BasisRow {
            z1_degree: a,
            z2_coefficients: row.into_coeffs(),
        })
        .collect();
    BasisEntry { tag, rows }
}

/// Serializable form of a [`WanderingReport`].
#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub formula_dim: usize,
    pub block_dim: usize,
    pub bruteforce_dim: usize,
    pub agreement_ok: bool,
    pub stabilization_ok: bool,
    pub caps: Caps,
    pub grown_caps: Caps,
    pub tol: f64,
    pub margin: usize,
    pub cap_step: usize,
    pub grown_block_dim: usize,
    pub grown_bruteforce_dim: usize,
    pub blocks: Vec<BlockSummary>,
    pub basis_residual: f64,
    pub basis_orthonormality_defect: f64,
    pub blaschke_sum: f64,
    pub warnings: Vec<String>,
    pub basis: Vec<BasisEntry>,
}

impl ReportJson {
    fn new(r: &WanderingReport, tags: &[String]) -> Self {
        let d = &r.diagnostics;
        ReportJson {
            formula_dim: r.formula_dim,
            block_dim: r.block_dim,
            bruteforce_dim: r.bruteforce_dim,
            agreement_ok: r.agreement_ok,
            stabilization_ok: r.stabilization_ok,
            caps: d.caps,
            grown_caps: d.grown_caps,
            tol: d.tol,
            margin: d.margin,
            cap_step: d.cap_step,
            grown_block_dim: d.grown_block_dim,
            grown_bruteforce_dim: d.grown_bruteforce_dim,
            blocks: d.blocks.clone(),
            basis_residual: d.basis_residual,
            basis_orthonormality_defect: d.basis_orthonormality_defect,
            blaschke_sum: d.blaschke_sum,
            warnings: d.warnings.clone(),
            basis: r
                .basis
                .iter()
                .zip(tags)
                .map(|(v, t)| basis_entry(t.clone(), v))
                .collect(),
        }
    }
}

/// Tags `phi_0`, then `z1^n * phi_n` for every `alpha_{n-1} = 0`.
fn wandering_tags(spec: &RudinSpec) -> Vec<String> {
    let mut tags = vec!["phi_0".to_string()];
    for (k, p) in spec.points.iter().enumerate() {
        if p.is_origin() {
            tags.push(format!("z1^{} * phi_{}", k + 1, k + 1));
        }
    }
    tags
}

fn summary_lines(r: &WanderingReport) -> String {
    let d = &r.diagnostics;
    let flag = |ok: bool| if ok { "ok" } else { "FAILED" };
    let mut s = format!(
        "formula dim      {}\nblock dim        {} (grown caps: {})\nbrute-force dim  {} (grown caps: {})\n",
        r.formula_dim, r.block_dim, d.grown_block_dim, r.bruteforce_dim, d.grown_bruteforce_dim
    );
    s += &format!(
        "caps             ({}, {}) -> ({}, {}), tol {:e}, margin {}\n",
        d.caps.z1, d.caps.z2, d.grown_caps.z1, d.grown_caps.z2, d.tol, d.margin
    );
    s += &format!(
        "agreement {}, stabilization {}\n",
        flag(r.agreement_ok),
        flag(r.stabilization_ok)
    );
    for w in &d.warnings {
        s += &format!("warning: {w}\n");
    }
    s
}

fn emit(
    json: &str,
    human: &str,
    as_json: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> io::Result<()> {
    if let Some(path) = out {
        std::fs::write(path, json)?;
    }
    if as_json {
        stdout.write_all(json.as_bytes())
    } else {
        stdout.write_all(human.as_bytes())
    }
}

fn guard(spec: &RudinSpec, stderr: &mut dyn Write) -> io::Result<bool> {
    let warnings = spec.conditioning_warnings();
    for w in &warnings {
        writeln!(stderr, "conditioning guard: {w}")?;
    }
    Ok(warnings.is_empty())
}

#[derive(Serialize)]
struct FactorJson {
    alpha: Complex64,
    cap: usize,
    coefficients: Vec<Complex64>,
    norm: f64,
}

fn cmd_factor(alpha: Complex64, cap: usize, as_json: bool, stdout: &mut dyn Write) -> Outcome {
    let b = blaschke_factor(alpha, cap)?;
    let report = FactorJson {
        alpha,
        cap,
        norm: b.norm(),
        coefficients: b.into_coeffs(),
    };
    if as_json {
        stdout.write_all(to_json(&report).as_bytes())?;
    } else {
        for (k, c) in report.coefficients.iter().enumerate() {
            writeln!(stdout, "{k:>4}  {:+.17e} {:+.17e}i", c.re, c.im)?;
        }
        writeln!(stdout, "norm  {:.17e}", report.norm)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct MatrixJson {
    alpha: Complex64,
    m: usize,
    cap: usize,
    analytic: Vec<Vec<Complex64>>,
    numeric: Vec<Vec<Complex64>>,
    max_abs_diff: f64,
}

fn cmd_matrix(
    alpha: Complex64,
    m: usize,
    cap: Option<usize>,
    as_json: bool,
    stdout: &mut dyn Write,
) -> Outcome {
    let analytic = compressed_matrix_analytic(alpha, m)?;
    let cap = cap.unwrap_or_else(|| suggested_cap(alpha, m, &[]));
    let numeric = compressed_matrix_numeric(alpha, m, cap, &[])?;
    let report = MatrixJson {
        alpha,
        m,
        cap,
        max_abs_diff: analytic.max_abs_diff(&numeric)?,
        analytic: analytic.rows(),
        numeric: numeric.rows(),
    };
    if as_json {
        stdout.write_all(to_json(&report).as_bytes())?;
    } else {
        writeln!(stdout, "analytic matrix (m = {m}):")?;
        for row in &report.analytic {
            let cells: Vec<String> = row
                .iter()
                .map(|c| format!("{:+.6}{:+.6}i", c.re, c.im))
                .collect();
            writeln!(stdout, "  {}", cells.join("  "))?;
        }
        writeln!(
            stdout,
            "max |analytic - numeric| at cap {cap}: {:.3e}",
            report.max_abs_diff
        )?;
    }
    Ok(EXIT_OK)
}

fn parse_theta2(items: &[String]) -> std::result::Result<Vec<BlaschkePoint>, Failure> {
    items
        .iter()
        .map(|item| {
            let parts: Vec<&str> = item.split(',').map(str::trim).collect();
            let [re, im, mult] = parts.as_slice() else {
                return Err(Failure::input(format!(
                    "theta2 entry {item:?} is not RE,IM,MULT"
                )));
            };
            let bad = |_| Failure::input(format!("theta2 entry {item:?} is not RE,IM,MULT"));
            let re: f64 = re.parse().map_err(bad)?;
            let im: f64 = im.parse().map_err(bad)?;
            let mult: u32 = mult.parse().map_err(|_| {
                Failure::input(format!("theta2 entry {item:?} has a bad multiplicity"))
            })?;
            Ok(BlaschkePoint::new(Complex64::new(re, im), mult)?)
        })
        .collect()
}

#[derive(Serialize)]
struct ModelBasisJson {
    alpha: Complex64,
    m: usize,
    cap: usize,
    theta2: Vec<BlaschkePoint>,
    vector_norm: f64,
    defect: f64,
    vectors: Vec<Vec<Complex64>>,
}

fn cmd_model_basis(
    alpha: Complex64,
    m: usize,
    cap: Option<usize>,
    theta2: &[String],
    as_json: bool,
    stdout: &mut dyn Write,
) -> Outcome {
    let theta2 = parse_theta2(theta2)?;
    let cap = cap.unwrap_or_else(|| suggested_cap(alpha, m, &theta2));
    let basis = model_basis(alpha, m, cap, &theta2)?;
    let report = ModelBasisJson {
        alpha,
        m,
        cap,
        theta2,
        vector_norm: basis.vector_norm,
        defect: basis.defect,
        vectors: basis.vectors.iter().map(|v| v.coeffs().to_vec()).collect(),
    };
    if as_json {
        stdout.write_all(to_json(&report).as_bytes())?;
    } else {
        writeln!(stdout, "{m} basis vectors at cap {cap}")?;
        writeln!(stdout, "common norm  {:.17e}", report.vector_norm)?;
        writeln!(stdout, "defect       {:.3e}", report.defect)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct WanderingJson {
    command: &'static str,
    config: Config,
    report: ReportJson,
}

fn cmd_wandering(
    path: &Path,
    as_json: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Outcome {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let config = Config::from_json(&text)?;
    let spec = config.spec()?;
    if !guard(&spec, stderr)? {
        return Ok(EXIT_CONDITIONING);
    }
    let caps = config.caps(&spec)?;
    let r = report(&spec, caps, config.tol, config.margin, config.cap_step)?;
    let doc = WanderingJson {
        command: "wandering",
        config: config.clone(),
        report: ReportJson::new(&r, &wandering_tags(&spec)),
    };
    emit(&to_json(&doc), &summary_lines(&r), as_json, out, stdout)?;
    Ok(if r.agreement_ok && r.stabilization_ok {
        EXIT_OK
    } else {
        EXIT_DISAGREEMENT
    })
}

/// A random sequence with `M` uniform in `0..=5`, multiplicities uniform in
/// `1..=3`, and each point `0` with probability 1/3, otherwise of modulus
/// uniform in `[0.05, 0.7]` and uniform argument.
pub fn sample_spec<R: Rng>(rng: &mut R) -> RudinSpec {
    let last = rng.gen_range(0..=5usize);
    let points = (0..=last)
        .map(|_| {
            let mult = rng.gen_range(1..=3u32);
            let alpha = if rng.gen_bool(1.0 / 3.0) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(rng.gen_range(0.05..=0.7), rng.gen_range(0.0..TAU))
            };
            BlaschkePoint::new(alpha, mult).expect("sampled points lie in the disc")
        })
        .collect();
    RudinSpec::new(points, Caps::new(0, 0))
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRun {
    pub index: usize,
    pub points: Vec<BlaschkePoint>,
    pub caps: Option<Caps>,
    pub formula_dim: usize,
    pub block_dim: Option<usize>,
    pub bruteforce_dim: Option<usize>,
    pub agreement_ok: bool,
    pub stabilization_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyJson {
    pub command: &'static str,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub margin: usize,
    pub cap_step: usize,
    pub agreed: usize,
    pub runs: Vec<VerifyRun>,
}

/// Runs the three routes on `samples` specs drawn from `seed`.
pub fn verify(samples: usize, seed: u64, tol: f64) -> VerifyJson {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = Vec::with_capacity(samples);
    for index in 0..samples {
        let spec = sample_spec(&mut rng).with_tol(tol);
        let formula_dim = crate::rudin::wandering_dim_formula(&spec);
        let outcome = recommended_caps(&spec, tol, DEFAULT_MARGIN).and_then(|caps| {
            report(&spec, caps, tol, DEFAULT_MARGIN, DEFAULT_CAP_STEP).map(|r| (caps, r))
        });
        runs.push(match outcome {
            Ok((caps, r)) => VerifyRun {
                index,
                points: spec.points.clone(),
                caps: Some(caps),
                formula_dim,
                block_dim: Some(r.block_dim),
                bruteforce_dim: Some(r.bruteforce_dim),
                agreement_ok: r.agreement_ok,
                stabilization_ok: r.stabilization_ok,
                error: None,
            },
            Err(e) => VerifyRun {
                index,
                points: spec.points.clone(),
                caps: None,
                formula_dim,
                block_dim: None,
                bruteforce_dim: None,
                agreement_ok: false,
                stabilization_ok: false,
                error: Some(e.to_string()),
            },
        });
    }
    VerifyJson {
        command: "verify",
        seed,
        samples,
        tol,
        margin: DEFAULT_MARGIN,
        cap_step: DEFAULT_CAP_STEP,
        agreed: runs
            .iter()
            .filter(|r| r.agreement_ok && r.stabilization_ok)
            .count(),
        runs,
    }
}

fn cmd_verify(
    samples: usize,
    seed: u64,
    tol: f64,
    as_json: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Outcome {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Failure::input(format!("tol {tol} outside (0, 1)")));
    }
    let summary = verify(samples, seed, tol);
    let mut human = format!("seed {seed}: {}/{samples} agree\n", summary.agreed);
    for r in summary
        .runs
        .iter()
        .filter(|r| !(r.agreement_ok && r.stabilization_ok))
    {
        human += &format!(
            "  sample {}: formula {}, block {:?}, brute force {:?}, stabilization {}{}\n",
            r.index,
            r.formula_dim,
            r.block_dim,
            r.bruteforce_dim,
            r.stabilization_ok,
            r.error
                .as_deref()
                .map(|e| format!(", error: {e}"))
                .unwrap_or_default()
        );
    }
    emit(&to_json(&summary), &human, as_json, out, stdout)?;
    Ok(if summary.agreed == samples {
        EXIT_OK
    } else {
        EXIT_DISAGREEMENT
    })
}

/// Points `alpha_i = 1 - i^-3` with multiplicity `i` for `i = 1..=n`;
/// `points[k]` holds `alpha_{k+1}`.
pub fn rudin_prefix(n: usize) -> crate::Result<RudinSpec> {
    let points = (1..=n)
        .map(|i| BlaschkePoint::real(1.0 - (i as f64).powi(-3), i as u32))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(RudinSpec::new(points, Caps::new(0, 0)))
}

/// Tags in the 1-based indexing of the sequence.
fn prefix_tags(spec: &RudinSpec) -> Vec<String> {
    let mut tags = vec!["prod_{i>=1} b_{alpha_i}^i".to_string()];
    for (k, p) in spec.points.iter().enumerate() {
        if p.is_origin() {
            let n = k + 1;
            tags.push(format!("z1^{n} * prod_{{i>={}}} b_{{alpha_i}}^i", n + 1));
        }
    }
    tags
}

#[derive(Serialize)]
struct CorollaryJson {
    command: &'static str,
    n_points: usize,
    index_note: &'static str,
    points: Vec<BlaschkePoint>,
    report: ReportJson,
}

fn cmd_corollary(
    n: usize,
    deg1: Option<usize>,
    deg2: Option<usize>,
    as_json: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Outcome {
    let spec = rudin_prefix(n)?;
    if !guard(&spec, stderr)? {
        return Ok(EXIT_CONDITIONING);
    }
    let config = Config {
        alphas: vec![],
        mults: vec![],
        deg1,
        deg2,
        tol: DEFAULT_TOL,
        margin: DEFAULT_MARGIN,
        cap_step: DEFAULT_CAP_STEP,
    };
    let caps = config.caps(&spec)?;
    let r = report(&spec, caps, DEFAULT_TOL, DEFAULT_MARGIN, DEFAULT_CAP_STEP)?;
    let doc = CorollaryJson {
        command: "corollary-rudin",
        n_points: n,
        index_note: "points[k] holds alpha_{k+1} = 1 - (k+1)^-3 with multiplicity k+1",
        points: spec.points.clone(),
        report: ReportJson::new(&r, &prefix_tags(&spec)),
    };
    let mut human = summary_lines(&r);
    for t in prefix_tags(&spec) {
        human += &format!("basis: {t}\n");
    }
    emit(&to_json(&doc), &human, as_json, out, stdout)?;
    Ok(if r.agreement_ok && r.stabilization_ok {
        EXIT_OK
    } else {
        EXIT_DISAGREEMENT
    })
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    match command {
        Command::Factor {
            alpha,
            alpha_im,
            cap,
            json,
        } => cmd_factor(Complex64::new(alpha, alpha_im), cap, json, stdout),
        Command::Matrix {
            alpha,
            alpha_im,
            m,
            cap,
            json,
        } => cmd_matrix(Complex64::new(alpha, alpha_im), m, cap, json, stdout),
        Command::ModelBasis {
            alpha,
            alpha_im,
            m,
            cap,
            theta2,
            json,
        } => cmd_model_basis(
            Complex64::new(alpha, alpha_im),
            m,
            cap,
            &theta2,
            json,
            stdout,
        ),
        Command::Wandering { config, json, out } => {
            cmd_wandering(&config, json, out.as_deref(), stdout, stderr)
        }
        Command::Verify {
            samples,
            seed,
            tol,
            json,
            out,
        } => cmd_verify(samples, seed, tol, json, out.as_deref(), stdout),
        Command::CorollaryRudin {
            n_points,
            deg1,
            deg2,
            json,
            out,
        } => cmd_corollary(n_points, deg1, deg2, json, out.as_deref(), stdout, stderr),
    }
}

/// Parses `args` (program name first) and runs the subcommand; returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_INPUT
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
