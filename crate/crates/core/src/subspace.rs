//! Finite-dimensional subspaces of a coefficient space, represented by an
//! orthonormal frame.
//!
//! Every rank decision in the crate goes through [`numerical_rank`]: a
//! singular value counts when it exceeds `tol * sigma_max`, and nothing counts
//! when `sigma_max <= tol`.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::svd::{self, ComputeSvdVectors};
use faer::{Mat, MatRef, Par};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::{Series1, Series2};

impl AsRef<[Complex64]> for Series1 {
    fn as_ref(&self) -> &[Complex64] {
        self.coeffs()
    }
}

impl AsRef<[Complex64]> for Series2 {
    fn as_ref(&self) -> &[Complex64] {
        self.as_slice()
    }
}

/// Number of singular values above the relative threshold `tol * sigma_max`,
/// or zero when `sigma_max <= tol`.
pub fn numerical_rank(singular_values: &[f64], tol: f64) -> usize {
    let sigma_max = singular_values.iter().copied().fold(0.0, f64::max);
    if sigma_max <= tol {
        return 0;
    }
    singular_values
        .iter()
        .filter(|&&s| s > tol * sigma_max)
        .count()
}

/// Singular values with optional left and right factors.
type SvdParts = (Vec<f64>, Option<Mat<Complex64>>, Option<Mat<Complex64>>);

fn svd_call(
    a: MatRef<'_, Complex64>,
    compute_u: ComputeSvdVectors,
    compute_v: ComputeSvdVectors,
) -> Option<SvdParts> {
    let (m, n) = a.shape();
    let size = m.min(n);
    let width = |c: ComputeSvdVectors, rows: usize| match c {
        ComputeSvdVectors::No => None,
        ComputeSvdVectors::Thin => Some(Mat::<Complex64>::zeros(rows, size)),
        ComputeSvdVectors::Full => Some(Mat::<Complex64>::zeros(rows, rows)),
    };
    let mut u = width(compute_u, m);
    let mut v = width(compute_v, n);
    let mut s = Diag::<Complex64>::zeros(size);
    let mut buf = MemBuffer::new(svd::svd_scratch::<Complex64>(
        m,
        n,
        compute_u,
        compute_v,
        Par::Seq,
        Default::default(),
    ));
    svd::svd(
        a,
        s.as_mut(),
        u.as_mut().map(|u| u.as_mut()),
        v.as_mut().map(|v| v.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .ok()?;
    Some((s.column_vector().iter().map(|x| x.re).collect(), u, v))
}

fn left_svd_once(
    a: MatRef<'_, Complex64>,
    compute: ComputeSvdVectors,
) -> Option<(Vec<f64>, Mat<Complex64>)> {
    let (m, n) = a.shape();
    let outcome = if m < n {
        let b = a.adjoint().to_owned();
        svd_call(b.as_ref(), ComputeSvdVectors::No, ComputeSvdVectors::Full)
            .or_else(|| svd_call(b.as_ref(), ComputeSvdVectors::Thin, ComputeSvdVectors::Full))
            .map(|(s, _, v)| (s, v))
    } else {
        svd_call(a, compute, ComputeSvdVectors::No)
            .or_else(|| svd_call(a, compute, ComputeSvdVectors::Thin))
            .map(|(s, u, _)| (s, u))
    };
    match outcome {
        Some((values, Some(u))) => Some((values, u)),
        _ => None,
    }
}

/// `a` times a unitary: columns reversed and given distinct phases. Leaves
/// the singular values and left singular vectors unchanged.
fn scrambled(a: MatRef<'_, Complex64>, round: usize) -> Mat<Complex64> {
    let n = a.ncols();
    let theta = 0.618_033_988_749_895 * round as f64;
    Mat::from_fn(a.nrows(), n, |i, j| {
        a[(i, n - 1 - j)] * Complex64::from_polar(1.0, theta * j as f64)
    })
}

/// Singular values and left singular vectors. With `full` the left factor is
/// square; otherwise it has `min(rows, cols)` columns.
///
/// Wide matrices go through the adjoint. When the iteration fails to
/// converge the call is repeated two-sided, then on scrambled copies of `a`.
pub(crate) fn left_svd(a: MatRef<'_, Complex64>, full: bool) -> Result<(Vec<f64>, Mat<Complex64>)> {
    let (m, n) = a.shape();
    if m.min(n) == 0 {
        let u = if full {
            Mat::identity(m, m)
        } else {
            Mat::zeros(m, 0)
        };
        return Ok((Vec::new(), u));
    }
    let compute = if full {
        ComputeSvdVectors::Full
    } else {
        ComputeSvdVectors::Thin
    };
    if let Some(found) = left_svd_once(a, compute) {
        return Ok(found);
    }
    for round in 1..=3 {
        if let Some(found) = left_svd_once(scrambled(a, round).as_ref(), compute) {
            return Ok(found);
        }
    }
    Err(Error::Numerical(format!(
        "svd of a {m}x{n} matrix did not converge"
    )))
}

/// Singular values of a dense matrix, largest first.
pub(crate) fn singular_values(a: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    if a.nrows().min(a.ncols()) == 0 {
        return Ok(Vec::new());
    }
    match a.singular_values() {
        Ok(values) => Ok(values),
        Err(_) => left_svd(a, false).map(|(values, _)| values),
    }
}

pub(crate) fn columns_to_mat<V: AsRef<[Complex64]>>(
    ambient_dim: usize,
    vectors: &[V],
) -> Result<Mat<Complex64>> {
    for (j, v) in vectors.iter().enumerate() {
        if v.as_ref().len() != ambient_dim {
            return Err(Error::Dimension(format!(
                "vector {j} has length {}, ambient dimension is {ambient_dim}",
                v.as_ref().len()
            )));
        }
    }
    Ok(Mat::from_fn(ambient_dim, vectors.len(), |i, j| {
        vectors[j].as_ref()[i]
    }))
}

/// A subspace of `C^ambient_dim` with an orthonormal frame.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    frame: Mat<Complex64>,
    tol: f64,
}

impl Subspace {
    pub fn zero(ambient_dim: usize, tol: f64) -> Self {
        Subspace {
            ambient_dim,
            frame: Mat::zeros(ambient_dim, 0),
            tol,
        }
    }

    /// The whole ambient space.
    pub fn full(ambient_dim: usize, tol: f64) -> Self {
        Subspace {
            ambient_dim,
            frame: Mat::identity(ambient_dim, ambient_dim),
            tol,
        }
    }

    /// Span of the given coordinate axes.
    pub fn coordinate(ambient_dim: usize, axes: &[usize], tol: f64) -> Result<Self> {
        if let Some(&bad) = axes.iter().find(|&&i| i >= ambient_dim) {
            return Err(Error::Index {
                index: bad,
                max: ambient_dim.saturating_sub(1),
            });
        }
        let mut frame = Mat::zeros(ambient_dim, axes.len());
        for (j, &i) in axes.iter().enumerate() {
            frame[(i, j)] = Complex64::new(1.0, 0.0);
        }
        Ok(Subspace {
            ambient_dim,
            frame,
            tol,
        })
    }

    /// Numerical span of `vectors`.
    pub fn from_spanning<V: AsRef<[Complex64]>>(
        ambient_dim: usize,
        vectors: &[V],
        tol: f64,
    ) -> Result<Self> {
        let a = columns_to_mat(ambient_dim, vectors)?;
        Subspace::from_matrix(a.as_ref(), tol)
    }

    /// Numerical column space of `a`.
    pub(crate) fn from_matrix(a: MatRef<'_, Complex64>, tol: f64) -> Result<Self> {
        let ambient_dim = a.nrows();
        if a.ncols() == 0 || ambient_dim == 0 {
            return Ok(Subspace::zero(ambient_dim, tol));
        }
        let (values, u) = left_svd(a, false)?;
        let rank = numerical_rank(&values, tol);
        Ok(Subspace {
            ambient_dim,
            frame: u.subcols(0, rank).to_owned(),
            tol,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn frame(&self) -> MatRef<'_, Complex64> {
        self.frame.as_ref()
    }

    /// Frame columns as plain coefficient vectors.
    pub fn basis_vectors(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|j| self.frame.col(j).iter().copied().collect())
            .collect()
    }

    fn check_ambient(&self, other_dim: usize) -> Result<()> {
        if self.ambient_dim != other_dim {
            return Err(Error::Dimension(format!(
                "ambient dimensions differ: {} vs {other_dim}",
                self.ambient_dim
            )));
        }
        Ok(())
    }

    /// Orthogonal projection `F (F^H v)`.
    pub fn project(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_ambient(v.len())?;
        let coords: Vec<Complex64> = (0..self.dim())
            .map(|j| {
                self.frame
                    .col(j)
                    .iter()
                    .zip(v)
                    .map(|(f, x)| f.conj() * x)
                    .sum()
            })
            .collect();
        let mut out = vec![Complex64::default(); self.ambient_dim];
        for (j, cj) in coords.iter().enumerate() {
            for (o, f) in out.iter_mut().zip(self.frame.col(j).iter()) {
                *o += f * cj;
            }
        }
        Ok(out)
    }

    /// `|| v - P v ||`.
    pub fn residual(&self, v: &[Complex64]) -> Result<f64> {
        let p = self.project(v)?;
        Ok(v.iter()
            .zip(&p)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Largest residual of `other`'s frame against `self`.
    pub fn containment_residual(&self, other: &Subspace) -> Result<f64> {
        self.check_ambient(other.ambient_dim)?;
        let mut worst: f64 = 0.0;
        for v in other.basis_vectors() {
            worst = worst.max(self.residual(&v)?);
        }
        Ok(worst)
    }

    /// Same span: equal dimension and mutual projection residual below `tol`.
    pub fn approx_eq(&self, other: &Subspace, tol: f64) -> Result<bool> {
        Ok(self.dim() == other.dim()
            && self.containment_residual(other)? < tol
            && other.containment_residual(self)? < tol)
    }

    /// Cosines of the principal angles with `other`, largest first.
    pub fn principal_cosines(&self, other: &Subspace) -> Result<Vec<f64>> {
        self.check_ambient(other.ambient_dim)?;
        let c = self.frame.adjoint() * other.frame.as_ref();
        singular_values(c.as_ref())
    }

    /// Directions whose principal-angle cosine with `other` exceeds `1 - tol`.
    pub fn intersect(&self, other: &Subspace, tol: f64) -> Result<Subspace> {
        self.check_ambient(other.ambient_dim)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Subspace::zero(self.ambient_dim, tol));
        }
        let c = self.frame.adjoint() * other.frame.as_ref();
        let (cosines, u) = left_svd(c.as_ref(), false)?;
        let k = cosines.iter().filter(|&&s| s > 1.0 - tol).count();
        let frame = self.frame.as_ref() * u.subcols(0, k);
        Ok(Subspace {
            ambient_dim: self.ambient_dim,
            frame,
            tol,
        })
    }

    /// Orthogonal complement in the ambient space.
    pub fn orthogonal_complement(&self) -> Result<Subspace> {
        if self.dim() == 0 {
            return Ok(Subspace::full(self.ambient_dim, self.tol));
        }
        let (_, u) = left_svd(self.frame.as_ref(), true)?;
        Ok(Subspace {
            ambient_dim: self.ambient_dim,
            frame: u
                .subcols(self.dim(), self.ambient_dim - self.dim())
                .to_owned(),
            tol: self.tol,
        })
    }

    /// `self ⊖ small`, provided `small` is numerically contained in `self`.
    pub fn complement_within(&self, small: &Subspace, tol: f64) -> Result<Subspace> {
        self.check_ambient(small.ambient_dim)?;
        let residual = self.containment_residual(small)?;
        if residual >= tol {
            return Err(Error::Precondition(format!(
                "subspace not contained: residual {residual:.3e} >= {tol:.3e}"
            )));
        }
        if small.dim() == 0 {
            return Ok(Subspace {
                tol,
                ..self.clone()
            });
        }
        let c = self.frame.adjoint() * small.frame.as_ref();
        let (_, u) = left_svd(c.as_ref(), true)?;
        let keep = self.dim().saturating_sub(small.dim());
        let frame = self.frame.as_ref() * u.subcols(small.dim(), keep);
        Ok(Subspace {
            ambient_dim: self.ambient_dim,
            frame,
            tol,
        })
    }

    /// Vectors of `self` orthogonal to every column of `constraints`.
    ///
    /// The constraint columns need not be orthonormal; the rank of
    /// `F^H constraints` is decided with [`numerical_rank`].
    pub(crate) fn orthogonal_to_columns(
        &self,
        constraints: MatRef<'_, Complex64>,
        tol: f64,
    ) -> Result<Subspace> {
        self.check_ambient(constraints.nrows())?;
        if self.dim() == 0 || constraints.ncols() == 0 {
            return Ok(Subspace {
                tol,
                ..self.clone()
            });
        }
        let g = self.frame.adjoint() * constraints;
        let (values, u) = left_svd(g.as_ref(), true)?;
        let rank = numerical_rank(&values, tol);
        let frame = self.frame.as_ref() * u.subcols(rank, self.dim() - rank);
        Ok(Subspace {
            ambient_dim: self.ambient_dim,
            frame,
            tol,
        })
    }

    /// Vectors of `self` orthogonal to all of `vectors`.
    pub fn orthogonal_to<V: AsRef<[Complex64]>>(
        &self,
        vectors: &[V],
        tol: f64,
    ) -> Result<Subspace> {
        let m = columns_to_mat(self.ambient_dim, vectors)?;
        self.orthogonal_to_columns(m.as_ref(), tol)
    }

    /// Largest entrywise deviation of `F^H F` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.frame.adjoint() * self.frame.as_ref();
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, n: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::default(); n];
        v[i] = Complex64::new(1.0, 0.0);
        v
    }

    fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    #[test]
    fn scrambling_keeps_left_factor() {
        let a = Mat::from_fn(3, 5, |i, j| {
            Complex64::new((i * 5 + j) as f64, (i as f64) - (j as f64))
        });
        let (values, u) = left_svd(a.as_ref(), false).unwrap();
        let (values2, u2) = left_svd(scrambled(a.as_ref(), 2).as_ref(), false).unwrap();
        for (x, y) in values.iter().zip(&values2) {
            assert!((x - y).abs() < 1e-10);
        }
        let s = Subspace::from_matrix(u.as_ref(), 1e-9).unwrap();
        let t = Subspace::from_matrix(u2.subcols(0, 2), 1e-9).unwrap();
        assert!(s.containment_residual(&t).unwrap() < 1e-10);
    }

    #[test]
    fn rank_rule() {
        assert_eq!(numerical_rank(&[1.0, 0.5, 1e-12], 1e-9), 2);
        assert_eq!(numerical_rank(&[1e-10, 1e-11], 1e-9), 0);
        assert_eq!(numerical_rank(&[], 1e-9), 0);
    }

    #[test]
    fn duplicates_collapse() {
        let s = Subspace::from_spanning(4, &[e(0, 4), e(0, 4), e(1, 4)], 1e-9).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn tiny_perturbation_is_ignored() {
        let perturbed: Vec<_> = add(
            &e(0, 3),
            &e(1, 3).iter().map(|x| x * 1e-15).collect::<Vec<_>>(),
        );
        let s = Subspace::from_spanning(3, &[e(0, 3), perturbed], 1e-9).unwrap();
        assert_eq!(s.dim(), 1);
    }

    #[test]
    fn empty_spanning_set_is_zero_subspace() {
        let s = Subspace::from_spanning::<Vec<Complex64>>(5, &[], 1e-9).unwrap();
        assert_eq!(s.dim(), 0);
        assert_eq!(s.ambient_dim(), 5);
    }

    #[test]
    fn ambient_mismatch_errors() {
        assert!(Subspace::from_spanning(3, &[e(0, 4)], 1e-9).is_err());
        let s = Subspace::full(3, 1e-9);
        assert!(s.project(&e(0, 4)).is_err());
    }

    #[test]
    fn projection_onto_axis() {
        let s = Subspace::from_spanning(3, &[e(0, 3)], 1e-9).unwrap();
        let p = s.project(&add(&e(0, 3), &e(1, 3))).unwrap();
        for (x, y) in p.iter().zip(&e(0, 3)) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn intersection_of_coordinate_planes() {
        let a = Subspace::from_spanning(4, &[e(0, 4), e(1, 4)], 1e-9).unwrap();
        let b = Subspace::from_spanning(4, &[e(1, 4), e(2, 4)], 1e-9).unwrap();
        let i = a.intersect(&b, 1e-9).unwrap();
        assert_eq!(i.dim(), 1);
        assert!(i.residual(&e(1, 4)).unwrap() < 1e-12);
        assert!(a.intersect(&a, 1e-9).unwrap().approx_eq(&a, 1e-9).unwrap());
    }

    #[test]
    fn complement_of_an_axis() {
        let big = Subspace::from_spanning(3, &[e(0, 3), e(1, 3)], 1e-9).unwrap();
        let small = Subspace::from_spanning(3, &[e(0, 3)], 1e-9).unwrap();
        let c = big.complement_within(&small, 1e-9).unwrap();
        assert_eq!(c.dim(), 1);
        assert!(c.residual(&e(1, 3)).unwrap() < 1e-12);
        let same = big
            .complement_within(&Subspace::zero(3, 1e-9), 1e-9)
            .unwrap();
        assert!(same.approx_eq(&big, 1e-12).unwrap());
    }

    #[test]
    fn complement_requires_containment() {
        let big = Subspace::from_spanning(3, &[e(0, 3)], 1e-9).unwrap();
        let small = Subspace::from_spanning(3, &[e(1, 3)], 1e-9).unwrap();
        assert!(matches!(
            big.complement_within(&small, 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn orthogonal_complement_dimension() {
        let s = Subspace::from_spanning(5, &[e(0, 5), e(3, 5)], 1e-9).unwrap();
        let c = s.orthogonal_complement().unwrap();
        assert_eq!(c.dim(), 3);
        assert_eq!(s.intersect(&c, 1e-9).unwrap().dim(), 0);
    }

    #[test]
    fn orthogonal_to_constraints() {
        let s = Subspace::full(3, 1e-9);
        let w = s
            .orthogonal_to(&[e(0, 3), add(&e(0, 3), &e(1, 3))], 1e-9)
            .unwrap();
        assert_eq!(w.dim(), 1);
        assert!(w.residual(&e(2, 3)).unwrap() < 1e-12);
    }

    mod props {
        use super::*;
        use crate::blaschke::DEFAULT_TOL;
        use proptest::prelude::*;

        fn vectors(n: usize, k: usize) -> impl Strategy<Value = Vec<Vec<Complex64>>> {
            prop::collection::vec(
                prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n).prop_map(|v| {
                    v.into_iter()
                        .map(|(re, im)| Complex64::new(re, im))
                        .collect::<Vec<_>>()
                }),
                k,
            )
        }

        fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
            u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
        }

        proptest! {
            #[test]
            fn complement_dims_add_up(vs in vectors(8, 5), keep in 0usize..=5) {
                let big = Subspace::from_spanning(8, &vs, DEFAULT_TOL).unwrap();
                let small = Subspace::from_spanning(8, &vs[..keep], DEFAULT_TOL).unwrap();
                let rest = big.complement_within(&small, DEFAULT_TOL).unwrap();
                prop_assert_eq!(rest.dim() + small.dim(), big.dim());
            }

            #[test]
            fn projection_is_self_adjoint(vs in vectors(7, 3), pair in vectors(7, 2)) {
                let s = Subspace::from_spanning(7, &vs, DEFAULT_TOL).unwrap();
                let pv = s.project(&pair[0]).unwrap();
                let pw = s.project(&pair[1]).unwrap();
                prop_assert!((inner(&pv, &pair[1]) - inner(&pair[0], &pw)).norm() < 1e-10);
            }

            #[test]
            fn intersection_is_symmetric(shared in vectors(9, 2), a in vectors(9, 2), b in vectors(9, 2)) {
                let sa: Vec<_> = shared.iter().chain(&a).cloned().collect();
                let sb: Vec<_> = shared.iter().chain(&b).cloned().collect();
                let a = Subspace::from_spanning(9, &sa, DEFAULT_TOL).unwrap();
                let b = Subspace::from_spanning(9, &sb, DEFAULT_TOL).unwrap();
                let ab = a.intersect(&b, 1e-8).unwrap();
                let ba = b.intersect(&a, 1e-8).unwrap();
                prop_assert_eq!(ab.dim(), 2);
                prop_assert!(ab.approx_eq(&ba, 1e-8).unwrap());
            }
        }
    }
}
