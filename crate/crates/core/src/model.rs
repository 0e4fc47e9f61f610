//! Model spaces `Q = H^2 ⊖ b_alpha^m H^2`, their orthogonal basis
//! `v_j = theta2 b_alpha^j (M_z^* b_alpha)`, and the matrix of the compressed
//! adjoint shift in the normalized basis `v_j / sqrt(1 - |alpha|^2)`.

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::blaschke::{blaschke_factor, blaschke_product, BlaschkePoint, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::series::Series1;
use crate::subspace::{numerical_rank, singular_values};

/// Largest strictly-lower entry tolerated in a numerically computed matrix.
pub const TRIANGULARITY_TOL: f64 = 1e-8;

fn check_alpha(alpha: Complex64) -> Result<()> {
    let modulus = alpha.norm();
    if !modulus.is_finite() || modulus >= 1.0 {
        return Err(Error::Domain { modulus });
    }
    Ok(())
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Precondition(
            "model space order m must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Szegő kernel `S(z, alpha) = 1 / (1 - conj(alpha) z)`; coefficient `k` is
/// `conj(alpha)^k`.
pub fn szego(alpha: Complex64, cap: usize) -> Result<Series1> {
    check_alpha(alpha)?;
    let mut coeffs = Vec::with_capacity(cap + 1);
    let mut power = Complex64::new(1.0, 0.0);
    for _ in 0..=cap {
        coeffs.push(power);
        power *= alpha.conj();
    }
    Series1::new(coeffs)
}

/// Orthogonal basis of `theta2 Q_{b_alpha^m}`.
#[derive(Debug, Clone)]
pub struct ModelBasis {
    pub alpha: Complex64,
    pub m: usize,
    pub kernel_at_alpha: Series1,
    pub vectors: Vec<Series1>,
    /// Common norm `sqrt(1 - |alpha|^2)`.
    pub vector_norm: f64,
    /// Worst deviation from orthogonality or from the common norm.
    pub defect: f64,
}

impl ModelBasis {
    /// `v_j / ||v||`.
    pub fn normalized(&self, j: usize) -> Series1 {
        self.vectors[j].scale(Complex64::new(1.0 / self.vector_norm, 0.0))
    }

    pub fn cap(&self) -> usize {
        self.kernel_at_alpha.cap()
    }
}

pub(crate) fn model_basis_unchecked(
    alpha: Complex64,
    m: usize,
    cap: usize,
    theta2: &[BlaschkePoint],
) -> Result<ModelBasis> {
    check_alpha(alpha)?;
    check_order(m)?;
    let b = blaschke_factor(alpha, cap)?;
    let theta = blaschke_product(theta2, cap)?;
    let mut w = b.shift_down();
    let mut vectors = Vec::with_capacity(m);
    for j in 0..m {
        if j > 0 {
            w = w.mul(&b, cap).series;
        }
        vectors.push(theta.mul(&w, cap).series);
    }
    let vector_norm = (1.0 - alpha.norm_sqr()).sqrt();
    let mut defect: f64 = 0.0;
    for (i, vi) in vectors.iter().enumerate() {
        defect = defect.max((vi.norm() - vector_norm).abs());
        for vj in &vectors[..i] {
            defect = defect.max(vi.inner_product(vj)?.norm());
        }
    }
    Ok(ModelBasis {
        alpha,
        m,
        kernel_at_alpha: szego(alpha, cap)?,
        vectors,
        vector_norm,
        defect,
    })
}

/// The basis `theta2 b_alpha^j M_z^* b_alpha`, `j = 0..m`, truncated at `cap`.
///
/// `theta2` lists the zeros of a finite Blaschke multiplier (empty for 1).
/// Fails with [`Error::CapTooSmall`] when truncation spoils orthogonality or
/// the common norm beyond [`DEFAULT_TOL`].
pub fn model_basis(
    alpha: Complex64,
    m: usize,
    cap: usize,
    theta2: &[BlaschkePoint],
) -> Result<ModelBasis> {
    let basis = model_basis_unchecked(alpha, m, cap, theta2)?;
    if basis.defect > DEFAULT_TOL {
        return Err(Error::CapTooSmall {
            cap,
            detail: format!("model basis defect {:.3e}", basis.defect),
        });
    }
    Ok(basis)
}

/// Matrix of `P M_z^*` restricted to a model block, in the normalized basis.
/// `entries[i * m + j] = <T v̂_j, v̂_i>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressedMatrix {
    pub alpha: Complex64,
    pub m: usize,
    pub entries: Vec<Complex64>,
}

impl CompressedMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.m + j]
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.entries.chunks(self.m).map(|r| r.to_vec()).collect()
    }

    pub fn max_abs_diff(&self, other: &CompressedMatrix) -> Result<f64> {
        if self.m != other.m {
            return Err(Error::Dimension(format!(
                "matrix orders differ: {} vs {}",
                self.m, other.m
            )));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest modulus strictly below the diagonal.
    pub fn lower_max(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.m {
            for j in 0..i {
                worst = worst.max(self.get(i, j).norm());
            }
        }
        worst
    }
}

/// Closed form of the compressed adjoint shift on `Q_{b_alpha^m}`.
///
/// With `u = -conj(alpha)/|alpha|` (taken as 1 at the origin) the entries are
/// `conj(alpha)` on the diagonal, `u |alpha|^(j-i-1) (1 - |alpha|^2)` above it
/// and 0 below, using `0^0 = 1`. The phase `u` comes from the normalization
/// `b_alpha(0) = |alpha|`; for the unnormalized factor `(z - a)/(1 - conj(a) z)`
/// the same matrix reads `(-alpha)^(j-i-1) (1 - |alpha|^2)` above the diagonal.
pub fn compressed_matrix_analytic(alpha: Complex64, m: usize) -> Result<CompressedMatrix> {
    check_alpha(alpha)?;
    check_order(m)?;
    let r = alpha.norm();
    let phase = if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        -alpha.conj() / r
    };
    let weight = 1.0 - r * r;
    let mut entries = vec![Complex64::default(); m * m];
    for i in 0..m {
        entries[i * m + i] = alpha.conj();
        for j in i + 1..m {
            let gap = (j - i - 1) as i32;
            let radial = if gap == 0 { 1.0 } else { r.powi(gap) };
            entries[i * m + j] = phase * radial * weight;
        }
    }
    Ok(CompressedMatrix { alpha, m, entries })
}

/// The same matrix computed from the truncated basis vectors:
/// `<M_z^* v_j, v_i> / (1 - |alpha|^2)`.
pub fn compressed_matrix_numeric(
    alpha: Complex64,
    m: usize,
    cap: usize,
    theta2: &[BlaschkePoint],
) -> Result<CompressedMatrix> {
    let basis = model_basis_unchecked(alpha, m, cap, theta2)?;
    let weight = 1.0 - alpha.norm_sqr();
    let shifted: Vec<Series1> = basis.vectors.iter().map(Series1::shift_down).collect();
    let mut entries = vec![Complex64::default(); m * m];
    for i in 0..m {
        for j in 0..m {
            entries[i * m + j] = shifted[j].inner_product(&basis.vectors[i])? / weight;
        }
    }
    let matrix = CompressedMatrix { alpha, m, entries };
    let lower = matrix.lower_max();
    if lower > TRIANGULARITY_TOL {
        return Err(Error::CapTooSmall {
            cap,
            detail: format!("strictly lower entries reach {lower:.3e}"),
        });
    }
    Ok(matrix)
}

/// Numerical nullity of the matrix under the shared rank rule.
pub fn kernel_dim(a: &CompressedMatrix, tol: f64) -> usize {
    let mat = Mat::from_fn(a.m, a.m, |i, j| a.get(i, j));
    // the SVD of an m x m matrix with m <= a few dozen does not fail in practice
    let values = singular_values(mat.as_ref()).unwrap_or_default();
    a.m - numerical_rank(&values, tol)
}

/// A cap large enough for the basis of `Q_{b_alpha^m}` times `theta2` to meet
/// [`DEFAULT_TOL`].
pub fn suggested_cap(alpha: Complex64, m: usize, theta2: &[BlaschkePoint]) -> usize {
    let r = theta2
        .iter()
        .map(|p| p.alpha().norm())
        .fold(alpha.norm(), f64::max);
    let degree = m + theta2.iter().map(|p| p.mult() as usize).sum::<usize>();
    let geometric = if r > 0.0 {
        (1e-13f64.ln() / r.ln()).ceil() as usize
    } else {
        0
    };
    (2 * geometric + 4 * degree).max(32)
}
