//! Rudin submodules `S = span_n z1^n phi_n H^2(D^2)` of a finite point
//! sequence, and their wandering subspace `S ⊖ (z1 S + z2 S)`.
//!
//! Three routes are provided: the closed count `1 + #{alpha_n = 0}`, the block
//! route (model-space blocks and their compressed adjoint shifts), and a
//! brute-force route working directly in the truncated ambient space. The
//! generalized chains `span_n psi_n(z1) phi_n(z2) H^2` get their own route and
//! oracle.

use faer::{Mat, MatRef};
use num_complex::Complex64;
use serde::Serialize;

use crate::blaschke::{blaschke_sum, geometric_cap, phi_tail, BlaschkePoint, RudinSpec};
use crate::error::{Error, Result};
use crate::model::{compressed_matrix_analytic, kernel_dim, model_basis_unchecked, ModelBasis};
use crate::series::{Caps, Series1, Series2};
use crate::subspace::{left_svd, numerical_rank, singular_values, Subspace};

pub const DEFAULT_MARGIN: usize = 2;
pub const DEFAULT_CAP_STEP: usize = 8;

/// Upper bound for the `z2` cap search in [`recommended_caps`].
pub const MAX_Z2_CAP: usize = 4096;

/// Lower-triangular Toeplitz matrix of multiplication by `f` on polynomials
/// of degree at most `cap`.
fn toeplitz(f: &Series1, cap: usize) -> Mat<Complex64> {
    Mat::from_fn(cap + 1, cap + 1, |i, j| {
        if i >= j {
            f.coeff(i - j)
        } else {
            Complex64::default()
        }
    })
}

/// Truncated `M_z^*` applied to every column.
fn shift_rows_down(f: MatRef<'_, Complex64>) -> Mat<Complex64> {
    let last = f.nrows().saturating_sub(1);
    Mat::from_fn(f.nrows(), f.ncols(), |i, j| {
        if i == last {
            Complex64::default()
        } else {
            f[(i + 1, j)]
        }
    })
}

/// Truncated `M_z` applied to every column.
fn shift_rows_up(f: MatRef<'_, Complex64>) -> Mat<Complex64> {
    Mat::from_fn(f.nrows(), f.ncols(), |i, j| {
        if i == 0 {
            Complex64::default()
        } else {
            f[(i - 1, j)]
        }
    })
}

fn hcat(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> Mat<Complex64> {
    let split = a.ncols();
    Mat::from_fn(a.nrows(), split + b.ncols(), |i, j| {
        if j < split {
            a[(i, j)]
        } else {
            b[(i, j - split)]
        }
    })
}

/// `(I - Q Q^H) G` for a matrix `Q` with orthonormal columns.
fn project_out(q: MatRef<'_, Complex64>, g: MatRef<'_, Complex64>) -> Mat<Complex64> {
    let along = q * (q.adjoint() * g);
    Mat::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] - along[(i, j)])
}

fn vstack(blocks: &[MatRef<'_, Complex64>]) -> Mat<Complex64> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        for j in 0..cols {
            for i in 0..b.nrows() {
                out[(offset + i, j)] = b[(i, j)];
            }
        }
        offset += b.nrows();
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the numerical range of
/// the truncated Toeplitz operator of `phi_n` (empty once `phi_n = 1`).
fn tail_complement(spec: &RudinSpec, n: usize, cap2: usize, tol: f64) -> Result<Mat<Complex64>> {
    if n >= spec.points.len() {
        return Ok(Mat::zeros(cap2 + 1, 0));
    }
    let phi = phi_tail(spec, n, cap2)?;
    let (values, u) = left_svd(toeplitz(&phi, cap2).as_ref(), true)?;
    let rank = numerical_rank(&values, tol);
    Ok(u.subcols(rank, cap2 + 1 - rank).to_owned())
}

fn normalized(v: Series2) -> Series2 {
    let norm = v.norm();
    if norm == 0.0 {
        v
    } else {
        v.scale(Complex64::new(1.0 / norm, 0.0))
    }
}

/// `1 + #{n : alpha_n = 0}`, with the zero test on the stored values.
pub fn wandering_dim_formula(spec: &RudinSpec) -> usize {
    1 + spec.points.iter().filter(|p| p.is_origin()).count()
}

/// Factor by which the discarded singular values must undercut `tol`.
pub const GAP_HEADROOM: f64 = 1e-3;

/// Largest singular value at or below `sqrt(tol) * s_max`, relative to `s_max`,
/// or `None` when all of them are zero.
fn largest_small(values: &[f64], tol: f64) -> Option<f64> {
    let smax = values.iter().copied().fold(0.0, f64::max);
    let small = values
        .iter()
        .copied()
        .filter(|&s| s <= tol.sqrt() * smax)
        .fold(0.0, f64::max);
    (smax > 0.0 && small > 0.0).then(|| small / smax)
}

/// Caps for which the rank decisions of `spec` are unambiguous.
///
/// `z1` is `M + 2 + margin`. `z2` is the smallest cap found at which every
/// singular value of the truncated Toeplitz operator of `phi_0` is either
/// above `sqrt(tol)` or below `GAP_HEADROOM * tol` (relative to the largest).
/// The search starts from the geometric estimate for `tol * GAP_HEADROOM`
/// and extrapolates the decay of the largest small singular value.
pub fn recommended_caps(spec: &RudinSpec, tol: f64, margin: usize) -> Result<Caps> {
    let z1 = spec.points.len() + 1 + margin;
    let floor = (spec.origin_degree() + margin).max(2 * margin + 2);
    let small_at = |z2: usize| -> Result<Option<f64>> {
        let phi = phi_tail(spec, 0, z2)?;
        Ok(largest_small(
            &singular_values(toeplitz(&phi, z2).as_ref())?,
            tol,
        ))
    };
    let target = GAP_HEADROOM * tol;
    let mut z2 = (geometric_cap(spec, target) + margin).max(floor);
    let mut previous: Option<(usize, f64)> = None;
    loop {
        let small = small_at(z2)?;
        let Some(s) = small.filter(|&s| s > target) else {
            return Ok(Caps::new(z1, z2));
        };
        if z2 >= MAX_Z2_CAP {
            return Err(Error::CapTooSmall {
                cap: z2,
                detail: format!("largest small singular value {s:.3e} still above {target:.3e}"),
            });
        }
        let step = (z2 / 8).max(8);
        let next = match previous {
            Some((z_prev, s_prev)) if s < s_prev => {
                let slope = (s.ln() - s_prev.ln()) / (z2 - z_prev) as f64;
                let predicted = z2 as f64 + ((target / 2.0).ln() - s.ln()) / slope;
                (predicted.ceil() as usize).clamp(z2 + 4, z2 + 8 * step)
            }
            _ => z2 + step,
        };
        previous = Some((z2, s));
        z2 = next.min(MAX_Z2_CAP);
    }
}

/// One summand of the orthogonal decomposition of `S`.
#[derive(Debug, Clone)]
pub enum BlockKind {
    /// Block 0: the whole of `H^2 ⊗ S_{phi_0}`, not enumerated.
    Full,
    /// Block `n >= 1`: `phi_n Q_{b^l}` with `alpha = alpha_{n-1}`, `l = l_{n-1}`.
    Model(ModelBasis),
}

#[derive(Debug, Clone)]
pub struct Block {
    pub n: usize,
    /// Zeros of the multiplier `phi_n`.
    pub theta2: Vec<BlaschkePoint>,
    pub kind: BlockKind,
}

/// Blocks `0..=M+1` of `S`; blocks beyond `M + 1` are empty and omitted.
/// Truncation defects are stored in each model basis, not raised.
pub fn build_blocks(spec: &RudinSpec, cap2: usize) -> Result<Vec<Block>> {
    let mut blocks = vec![Block {
        n: 0,
        theta2: spec.points.clone(),
        kind: BlockKind::Full,
    }];
    for n in 1..=spec.points.len() {
        let p = spec.points[n - 1];
        let theta2 = spec.points[n..].to_vec();
        let basis = model_basis_unchecked(p.alpha(), p.mult() as usize, cap2, &theta2)?;
        blocks.push(Block {
            n,
            theta2,
            kind: BlockKind::Model(basis),
        });
    }
    Ok(blocks)
}

/// Per-block data kept in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSummary {
    pub n: usize,
    pub alpha: Complex64,
    pub mult: u32,
    pub kernel_dim: usize,
    pub basis_defect: f64,
}

#[derive(Debug, Clone)]
pub struct BlockWandering {
    pub dim: usize,
    /// Orthonormal: `1 ⊗ phi_0`, then `z1^n ⊗ phi_n` for each `alpha_{n-1} = 0`.
    pub basis: Vec<Series2>,
    pub blocks: Vec<BlockSummary>,
}

/// Wandering subspace from the block decomposition.
pub fn wandering_via_blocks(spec: &RudinSpec, caps: Caps) -> Result<BlockWandering> {
    if caps.z1 < spec.points.len() {
        return Err(Error::CapTooSmall {
            cap: caps.z1,
            detail: format!(
                "z1 cap must reach the last block index {}",
                spec.points.len()
            ),
        });
    }
    let phi0 = phi_tail(spec, 0, caps.z2)?;
    let mut basis = vec![normalized(Series2::tensor(
        &Series1::one(caps.z1),
        &phi0,
        caps,
    )?)];
    let mut summaries = Vec::new();
    let mut dim = 1;
    for block in build_blocks(spec, caps.z2)? {
        let BlockKind::Model(model) = block.kind else {
            continue;
        };
        let k = kernel_dim(&compressed_matrix_analytic(model.alpha, model.m)?, spec.tol);
        dim += k;
        if spec.points[block.n - 1].is_origin() {
            let z1n = Series1::monomial(block.n, caps.z1)?;
            basis.push(normalized(Series2::tensor(&z1n, &model.vectors[0], caps)?));
        }
        summaries.push(BlockSummary {
            n: block.n,
            alpha: model.alpha,
            mult: model.m as u32,
            kernel_dim: k,
            basis_defect: model.defect,
        });
    }
    Ok(BlockWandering {
        dim,
        basis,
        blocks: summaries,
    })
}

fn check_margin(spec: &RudinSpec, caps: Caps, margin: usize) -> Result<()> {
    if margin < 2 {
        return Err(Error::Precondition(format!(
            "margin must be at least 2, got {margin}"
        )));
    }
    let need1 = spec.points.len() + 1 + margin;
    if caps.z1 < need1 {
        return Err(Error::Precondition(format!(
            "z1 cap {} below {need1} (last grade plus margin)",
            caps.z1
        )));
    }
    let need2 = spec.origin_degree() + margin;
    if caps.z2 < need2 {
        return Err(Error::Precondition(format!(
            "z2 cap {} below {need2} (polynomial degree plus margin)",
            caps.z2
        )));
    }
    Ok(())
}

/// Result of the brute-force route, split by `z1` degree.
#[derive(Debug, Clone)]
pub struct BruteForce {
    pub caps: Caps,
    pub margin: usize,
    /// `(a, W_a)` for every grade with a nonzero wandering piece; `W_a` lives in
    /// the `z2` coefficient space of grade `a`.
    pub grades: Vec<(usize, Subspace)>,
}

impl BruteForce {
    pub fn dim(&self) -> usize {
        self.grades.iter().map(|(_, w)| w.dim()).sum()
    }

    /// Orthonormal basis of the wandering space as two-variable series.
    pub fn basis(&self) -> Vec<Series2> {
        let mut out = Vec::new();
        for (a, w) in &self.grades {
            for v in w.basis_vectors() {
                let mut s = Series2::zeros(self.caps);
                for (b, c) in v.into_iter().enumerate() {
                    *s.coeff_mut(*a, b) = c;
                }
                out.push(s);
            }
        }
        out
    }

    /// Distance from `v` to the wandering space.
    pub fn residual(&self, v: &Series2) -> Result<f64> {
        if v.caps() != self.caps {
            return Err(Error::Dimension(format!(
                "series caps {:?} differ from {:?}",
                v.caps(),
                self.caps
            )));
        }
        let mut total = 0.0;
        for a in 0..=self.caps.z1 {
            let row = v.row(a);
            let r = match self.grades.iter().find(|(g, _)| *g == a) {
                Some((_, w)) => w.residual(row.coeffs())?,
                None => row.norm(),
            };
            total += r * r;
        }
        Ok(total.sqrt())
    }
}

/// Wandering subspace computed in the truncated ambient space, one `z1`
/// degree at a time.
///
/// Grade `a` of `S_N` is `R_a`, the numerical range of the truncated Toeplitz
/// operator of `phi_min(a, M+1)`, and the wandering piece is
/// `W_a = R_a ∩ R_{a-1}^⊥ ∩ (z2 R_a)^⊥`. Each range enters only through its
/// orthogonal complement `Q_a`. Since `R_0 ⊆ R_a`, every `x` in `W_a` has
/// `M_z^* x ⊥ R_0`, and `M_z M_z^* = I - e_0 e_0^*` on the truncation places
/// `x` in `span(M_z Q_0, e_0)`; the three conditions are imposed there.
///
/// Only grades `a <= N1 - margin` are examined, and each piece is cut down to
/// directions of `z2` degree at most `N2 - margin`.
pub fn wandering_via_bruteforce(
    spec: &RudinSpec,
    caps: Caps,
    margin: usize,
    tol: f64,
) -> Result<BruteForce> {
    check_margin(spec, caps, margin)?;
    let len = spec.points.len();
    let ambient = caps.z2 + 1;
    let complements = (0..=len)
        .map(|n| tail_complement(spec, n, caps.z2, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut e0 = Mat::zeros(ambient, 1);
    e0[(0, 0)] = Complex64::new(1.0, 0.0);
    let seed = hcat(shift_rows_up(complements[0].as_ref()).as_ref(), e0.as_ref());
    let candidates = Subspace::from_matrix(seed.as_ref(), tol)?;
    let g = candidates.frame();
    let z_star_g = shift_rows_down(g);

    let axes: Vec<usize> = (0..=caps.z2 - margin).collect();
    let window = Subspace::coordinate(ambient, &axes, tol)?;
    let mut grades = Vec::new();
    for a in 0..=caps.z1 - margin {
        let q = complements[a.min(len)].as_ref();
        let in_range = q.adjoint() * g;
        let off_shift = project_out(q, z_star_g.as_ref());
        let conditions = if a == 0 {
            vstack(&[in_range.as_ref(), off_shift.as_ref()])
        } else {
            let below = project_out(complements[(a - 1).min(len)].as_ref(), g);
            vstack(&[in_range.as_ref(), below.as_ref(), off_shift.as_ref()])
        };
        let (values, u) = left_svd(conditions.adjoint().to_owned().as_ref(), true)?;
        let rank = numerical_rank(&values, tol);
        let frame = g * u.subcols(rank, g.ncols() - rank);
        let w = Subspace::from_matrix(frame.as_ref(), tol)?.intersect(&window, tol)?;
        if w.dim() > 0 {
            grades.push((a, w));
        }
    }
    Ok(BruteForce {
        caps,
        margin,
        grades,
    })
}

/// Truncations of `z1^a z2^b g` for every generator `g` and all shifts
/// inside the caps.
fn shifted_generators(generators: &[Series2], caps: Caps) -> Vec<Series2> {
    let mut out = Vec::new();
    for g in generators {
        let lead1 = (0..=caps.z1).find(|&a| g.row(a).norm() > 0.0);
        let Some(lead1) = lead1 else { continue };
        for a in 0..=caps.z1 - lead1 {
            for b in 0..=caps.z2 {
                out.push(g.shift_up(a, b));
            }
        }
    }
    out
}

/// `S ∩ (z1 S + z2 S)^⊥` in the flat ambient space, cut to the margin window.
fn flat_wandering(generators: &[Series2], caps: Caps, margin: usize, tol: f64) -> Result<Subspace> {
    let ambient = caps.ambient_dim();
    let spanning = shifted_generators(generators, caps);
    let s = Subspace::from_spanning(ambient, &spanning, tol)?;
    let shifted: Vec<Series2> = spanning
        .iter()
        .flat_map(|g| [g.mul_z1(), g.mul_z2()])
        .collect();
    let w = s.orthogonal_to(&shifted, tol)?;
    let axes: Vec<usize> = (0..=caps.z1.saturating_sub(margin))
        .flat_map(|a| (0..=caps.z2.saturating_sub(margin)).map(move |b| a * (caps.z2 + 1) + b))
        .collect();
    w.intersect(&Subspace::coordinate(ambient, &axes, tol)?, tol)
}

/// Brute force over the whole flat ambient space. Meant for small caps; the
/// graded [`wandering_via_bruteforce`] scales much better.
pub fn wandering_via_bruteforce_flat(
    spec: &RudinSpec,
    caps: Caps,
    margin: usize,
    tol: f64,
) -> Result<Subspace> {
    check_margin(spec, caps, margin)?;
    let chain = GeneralizedSpec::from_rudin(spec, caps)?;
    flat_wandering(&chain.generators()?, caps, margin, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenerationDefect {
    /// `dim S_N - dim(module span of the wandering basis)`.
    pub defect: usize,
    pub submodule_dim: usize,
    pub generated_dim: usize,
}

/// How far the shifts of the wandering basis fall short of spanning `S_N`.
pub fn generation_defect(spec: &RudinSpec, caps: Caps, tol: f64) -> Result<GenerationDefect> {
    let ambient = caps.ambient_dim();
    let chain = GeneralizedSpec::from_rudin(spec, caps)?;
    let s = Subspace::from_spanning(
        ambient,
        &shifted_generators(&chain.generators()?, caps),
        tol,
    )?;
    let basis = wandering_via_blocks(spec, caps)?.basis;
    let generated = Subspace::from_spanning(ambient, &shifted_generators(&basis, caps), tol)?;
    Ok(GenerationDefect {
        defect: s.dim().saturating_sub(generated.dim()),
        submodule_dim: s.dim(),
        generated_dim: generated.dim(),
    })
}

/// A submodule `span_n psi_n(z1) phi_n(z2) H^2` given by an increasing inner
/// chain `psi` and a decreasing inner chain `phi` of the same length.
#[derive(Debug, Clone)]
pub struct GeneralizedSpec {
    pub psi: Vec<Series1>,
    pub phi: Vec<Series1>,
    pub caps: Caps,
    pub tol: f64,
}

/// Checks that `dividend = q * divisor` with `q` of unit norm.
fn check_divides(divisor: &Series1, dividend: &Series1, position: usize, tol: f64) -> Result<()> {
    let cap = dividend.cap();
    let q = dividend.div(divisor, cap)?;
    let residual = q.mul(divisor, cap).series.sub(dividend)?.norm();
    if residual > tol {
        return Err(Error::Chain {
            position,
            detail: format!("division residual {residual:.3e}"),
        });
    }
    let norm = q.norm();
    if (norm - 1.0).abs() > tol.sqrt() {
        return Err(Error::Chain {
            position,
            detail: format!("quotient norm {norm:.6} is not 1"),
        });
    }
    Ok(())
}

impl GeneralizedSpec {
    /// Validates lengths and both chains.
    pub fn new(psi: Vec<Series1>, phi: Vec<Series1>, caps: Caps, tol: f64) -> Result<Self> {
        if psi.is_empty() || psi.len() != phi.len() {
            return Err(Error::Dimension(format!(
                "chains need equal nonzero lengths, got {} and {}",
                psi.len(),
                phi.len()
            )));
        }
        let spec = GeneralizedSpec {
            psi: psi.iter().map(|f| f.with_cap(caps.z1)).collect(),
            phi: phi.iter().map(|f| f.with_cap(caps.z2)).collect(),
            caps,
            tol,
        };
        spec.check_chain()?;
        Ok(spec)
    }

    /// `psi_n = z^n`, `phi_n` the tails of `spec`, for `n = 0..=M+1`.
    pub fn from_rudin(spec: &RudinSpec, caps: Caps) -> Result<Self> {
        let len = spec.points.len();
        if caps.z1 < len {
            return Err(Error::CapTooSmall {
                cap: caps.z1,
                detail: format!("z1 cap must reach {len}"),
            });
        }
        let psi = (0..=len)
            .map(|n| Series1::monomial(n, caps.z1))
            .collect::<Result<Vec<_>>>()?;
        let phi = (0..=len)
            .map(|n| phi_tail(spec, n, caps.z2))
            .collect::<Result<Vec<_>>>()?;
        Ok(GeneralizedSpec {
            psi,
            phi,
            caps,
            tol: spec.tol,
        })
    }

    /// `psi_n | psi_{n+1}` and `phi_{n+1} | phi_n` with inner quotients.
    pub fn check_chain(&self) -> Result<()> {
        for n in 0..self.psi.len().saturating_sub(1) {
            check_divides(&self.psi[n], &self.psi[n + 1], n, self.tol)?;
            check_divides(&self.phi[n + 1], &self.phi[n], n, self.tol)?;
        }
        Ok(())
    }

    /// The products `psi_n ⊗ phi_n`.
    pub fn generators(&self) -> Result<Vec<Series2>> {
        self.psi
            .iter()
            .zip(&self.phi)
            .map(|(p, f)| Series2::tensor(p, f, self.caps))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct GeneralWandering {
    pub dim: usize,
    pub basis: Vec<Series2>,
}

/// Wandering subspace of a generalized chain: `S ⊖ z1 S` is assembled as
/// `⊕ psi_n ⊗ (R(phi_n) ⊖ R(phi_{n-1}))` and then restricted to `(z2 S)^⊥`
/// and to the margin window.
pub fn wandering_general(spec: &GeneralizedSpec, margin: usize) -> Result<GeneralWandering> {
    spec.check_chain()?;
    let caps = spec.caps;
    let tol = spec.tol;
    let ambient2 = caps.z2 + 1;
    let mut pieces = Vec::new();
    let mut previous = Subspace::zero(ambient2, tol);
    for (psi, phi) in spec.psi.iter().zip(&spec.phi) {
        let range = Subspace::from_matrix(toeplitz(phi, caps.z2).as_ref(), tol)?;
        let block = range.complement_within(&previous, tol.sqrt())?;
        for v in block.basis_vectors() {
            pieces.push(Series2::tensor(psi, &Series1::new(v)?, caps)?);
        }
        previous = range;
    }
    let ambient = caps.ambient_dim();
    let e = Subspace::from_spanning(ambient, &pieces, tol)?;
    let z2_image: Vec<Series2> = shifted_generators(&spec.generators()?, caps)
        .iter()
        .map(Series2::mul_z2)
        .collect();
    let w = e.orthogonal_to(&z2_image, tol)?;
    let axes: Vec<usize> = (0..=caps.z1.saturating_sub(margin))
        .flat_map(|a| (0..=caps.z2.saturating_sub(margin)).map(move |b| a * (caps.z2 + 1) + b))
        .collect();
    let w = w.intersect(&Subspace::coordinate(ambient, &axes, tol)?, tol)?;
    let basis = w
        .basis_vectors()
        .into_iter()
        .map(|v| Series2::from_flat(caps, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneralWandering {
        dim: w.dim(),
        basis,
    })
}

/// Flat brute force for a generalized chain.
pub fn wandering_general_bruteforce(spec: &GeneralizedSpec, margin: usize) -> Result<Subspace> {
    flat_wandering(&spec.generators()?, spec.caps, margin, spec.tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub caps: Caps,
    pub grown_caps: Caps,
    pub tol: f64,
    pub margin: usize,
    pub cap_step: usize,
    pub blocks: Vec<BlockSummary>,
    pub grown_block_dim: usize,
    pub grown_bruteforce_dim: usize,
    /// Largest distance from a block basis vector to the brute-force space.
    pub basis_residual: f64,
    pub basis_orthonormality_defect: f64,
    pub blaschke_sum: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct WanderingReport {
    pub formula_dim: usize,
    pub block_dim: usize,
    pub bruteforce_dim: usize,
    /// Orthonormal wandering basis from the block route.
    pub basis: Vec<Series2>,
    pub stabilization_ok: bool,
    pub agreement_ok: bool,
    pub diagnostics: Diagnostics,
}

fn run_level(
    spec: &RudinSpec,
    caps: Caps,
    margin: usize,
    tol: f64,
) -> Result<(BlockWandering, BruteForce)> {
    let spec = spec.clone().with_tol(tol);
    let (blocks, brute) = rayon::join(
        || wandering_via_blocks(&spec, caps),
        || wandering_via_bruteforce(&spec, caps, margin, tol),
    );
    Ok((blocks?, brute?))
}

/// Runs all three routes at `caps` and at `caps.grow(step)`. Disagreement is
/// recorded in the flags, never raised.
pub fn report(
    spec: &RudinSpec,
    caps: Caps,
    tol: f64,
    margin: usize,
    step: usize,
) -> Result<WanderingReport> {
    let grown_caps = caps.grow(step);
    let (base, grown) = rayon::join(
        || run_level(spec, caps, margin, tol),
        || run_level(spec, grown_caps, margin, tol),
    );
    let (blocks, brute) = base?;
    let (grown_blocks, grown_brute) = grown?;

    let formula_dim = wandering_dim_formula(spec);
    let mut warnings = spec.conditioning_warnings();
    for b in &blocks.blocks {
        if b.basis_defect > tol {
            warnings.push(format!(
                "block {}: model basis defect {:.3e} exceeds tol at z2 cap {}",
                b.n, b.basis_defect, caps.z2
            ));
        }
    }
    let mut basis_residual: f64 = 0.0;
    for v in &blocks.basis {
        basis_residual = basis_residual.max(brute.residual(v)?);
    }
    if basis_residual > tol.sqrt() {
        warnings.push(format!(
            "block basis lies {basis_residual:.3e} away from the brute-force wandering space"
        ));
    }
    let basis_orthonormality_defect = {
        let frame = Subspace::from_spanning(caps.ambient_dim(), &blocks.basis, 0.0)?;
        let mut worst: f64 = if frame.dim() == blocks.basis.len() {
            0.0
        } else {
            1.0
        };
        for (i, u) in blocks.basis.iter().enumerate() {
            for (j, v) in blocks.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((u.inner_product(v)? - target).norm());
            }
        }
        worst
    };

    let block_dim = blocks.dim;
    let bruteforce_dim = brute.dim();
    Ok(WanderingReport {
        formula_dim,
        block_dim,
        bruteforce_dim,
        agreement_ok: formula_dim == block_dim && block_dim == bruteforce_dim,
        stabilization_ok: grown_blocks.dim == block_dim && grown_brute.dim() == bruteforce_dim,
        basis: blocks.basis,
        diagnostics: Diagnostics {
            caps,
            grown_caps,
            tol,
            margin,
            cap_step: step,
            blocks: blocks.blocks,
            grown_block_dim: grown_blocks.dim,
            grown_bruteforce_dim: grown_brute.dim(),
            basis_residual,
            basis_orthonormality_defect,
            blaschke_sum: blaschke_sum(spec),
            warnings,
        },
    })
}
