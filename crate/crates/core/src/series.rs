//! Dense truncated power series in one and two variables.
//!
//! A [`Series1`] with cap `N` stores the Taylor coefficients `c_0..c_N` of an
//! element of `H^2(D)`; a [`Series2`] with caps `(N1, N2)` stores `c[a][b]` for
//! the monomial `z1^a z2^b`. The inner product is the l2 pairing of
//! coefficients, which is the Hardy-space inner product restricted to the
//! truncation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation degrees in the `z1` and `z2` directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Caps {
    pub z1: usize,
    pub z2: usize,
}

impl Caps {
    pub fn new(z1: usize, z2: usize) -> Self {
        Caps { z1, z2 }
    }

    /// Both caps increased by `step`.
    pub fn grow(self, step: usize) -> Self {
        Caps::new(self.z1 + step, self.z2 + step)
    }

    /// Number of coefficients of a [`Series2`] with these caps.
    pub fn ambient_dim(self) -> usize {
        (self.z1 + 1) * (self.z2 + 1)
    }
}

fn check_finite(coeffs: &[Complex64]) -> Result<()> {
    match coeffs
        .iter()
        .position(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Truncated one-variable power series `c_0 + c_1 z + ... + c_N z^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series1 {
    coeffs: Vec<Complex64>,
}

/// Result of a truncated multiplication together with the l2 mass that the
/// truncation threw away.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub series: Series1,
    pub discarded_norm: f64,
}

impl Product {
    /// True when no nonzero coefficient was dropped above the cap.
    pub fn is_exact(&self) -> bool {
        self.discarded_norm == 0.0
    }
}

impl Series1 {
    /// Builds a series from `c_0..c_N`; the cap is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Dimension(
                "a series needs at least the constant coefficient".into(),
            ));
        }
        check_finite(&coeffs)?;
        Ok(Series1 { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Series1::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(cap: usize) -> Self {
        Series1 {
            coeffs: vec![Complex64::new(0.0, 0.0); cap + 1],
        }
    }

    pub fn constant(c: Complex64, cap: usize) -> Self {
        let mut s = Series1::zeros(cap);
        s.coeffs[0] = c;
        s
    }

    pub fn one(cap: usize) -> Self {
        Series1::constant(Complex64::new(1.0, 0.0), cap)
    }

    /// `z^k` truncated at `cap`.
    pub fn monomial(k: usize, cap: usize) -> Result<Self> {
        if k > cap {
            return Err(Error::Index { index: k, max: cap });
        }
        let mut s = Series1::zeros(cap);
        s.coeffs[k] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the cap.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    fn check_same_cap(&self, other: &Series1) -> Result<()> {
        if self.cap() != other.cap() {
            return Err(Error::Dimension(format!(
                "series caps differ: {} vs {}",
                self.cap(),
                other.cap()
            )));
        }
        Ok(())
    }

    /// `sum_k f_k conj(g_k)`.
    pub fn inner_product(&self, other: &Series1) -> Result<Complex64> {
        self.check_same_cap(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(f, g)| f * g.conj())
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Cauchy product truncated at `cap`.
    pub fn mul(&self, other: &Series1, cap: usize) -> Product {
        let full = self.cap() + other.cap();
        let mut out = vec![Complex64::new(0.0, 0.0); full.max(cap) + 1];
        for (i, f) in self.coeffs.iter().enumerate() {
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            for (j, g) in other.coeffs.iter().enumerate() {
                out[i + j] += f * g;
            }
        }
        let discarded_norm = out[cap + 1..]
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        out.truncate(cap + 1);
        Product {
            series: Series1 { coeffs: out },
            discarded_norm,
        }
    }

    /// `self^k` truncated at `cap`; `k = 0` gives the constant 1.
    pub fn pow(&self, k: u32, cap: usize) -> Series1 {
        let mut acc = Series1::one(cap);
        for _ in 0..k {
            acc = acc.mul(self, cap).series;
        }
        acc
    }

    /// Formal quotient `q` with `q * divisor = self`, after cancelling the
    /// power of `z` that leads `divisor`. The low coefficients of `self` that
    /// this cancels are ignored; callers check the product residual.
    pub fn div(&self, divisor: &Series1, cap: usize) -> Result<Series1> {
        let k = divisor
            .coeffs
            .iter()
            .position(|c| c.re != 0.0 || c.im != 0.0)
            .ok_or_else(|| Error::Precondition("division by the zero series".into()))?;
        let d = &divisor.coeffs[k..];
        let s = |n: usize| self.coeffs.get(n + k).copied().unwrap_or_default();
        let mut q: Vec<Complex64> = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let mut acc = s(n);
            for (j, dj) in d.iter().enumerate().take(n + 1).skip(1) {
                acc -= dj * q[n - j];
            }
            q.push(acc / d[0]);
        }
        Series1::new(q)
    }

    /// Adjoint of multiplication by `z`: coefficient `k` becomes `f_{k+1}`.
    pub fn shift_down(&self) -> Series1 {
        let mut coeffs = self.coeffs[1..].to_vec();
        coeffs.push(Complex64::new(0.0, 0.0));
        Series1 { coeffs }
    }

    /// Multiplication by `z`, dropping the top coefficient.
    pub fn mul_z(&self) -> Series1 {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend_from_slice(&self.coeffs[..self.cap()]);
        Series1 { coeffs }
    }

    pub fn scale(&self, c: Complex64) -> Series1 {
        Series1 {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Series1) -> Result<Series1> {
        self.check_same_cap(other)?;
        Ok(Series1 {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Series1) -> Result<Series1> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Re-truncates (or zero-pads) to a new cap.
    pub fn with_cap(&self, cap: usize) -> Series1 {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(cap + 1, Complex64::new(0.0, 0.0));
        Series1 { coeffs }
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn max_abs_diff(&self, other: &Series1) -> Result<f64> {
        self.check_same_cap(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Index of the first coefficient with modulus above `tol`.
    pub fn leading_order(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().position(|c| c.norm() > tol)
    }

    /// l2 norm of the coefficients strictly above degree `degree`.
    pub fn tail_norm(&self, degree: usize) -> f64 {
        self.coeffs
            .iter()
            .skip(degree + 1)
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Truncated two-variable power series, stored row-major by `z1` degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Series2 {
    coeffs: Vec<Complex64>,
    caps: Caps,
}

impl Series2 {
    pub fn zeros(caps: Caps) -> Self {
        Series2 {
            coeffs: vec![Complex64::new(0.0, 0.0); caps.ambient_dim()],
            caps,
        }
    }

    /// Wraps a flat row-major coefficient vector of length `(N1+1)(N2+1)`.
    pub fn from_flat(caps: Caps, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != caps.ambient_dim() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients for caps ({}, {}), got {}",
                caps.ambient_dim(),
                caps.z1,
                caps.z2,
                coeffs.len()
            )));
        }
        check_finite(&coeffs)?;
        Ok(Series2 { coeffs, caps })
    }

    /// Monomial `z1^a z2^b`.
    pub fn monomial(a: usize, b: usize, caps: Caps) -> Result<Self> {
        if a > caps.z1 || b > caps.z2 {
            return Err(Error::Dimension(format!(
                "monomial z1^{a} z2^{b} exceeds caps ({}, {})",
                caps.z1, caps.z2
            )));
        }
        let mut s = Series2::zeros(caps);
        *s.coeff_mut(a, b) = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_flat(self) -> Vec<Complex64> {
        self.coeffs
    }

    fn index(&self, a: usize, b: usize) -> usize {
        a * (self.caps.z2 + 1) + b
    }

    pub fn coeff(&self, a: usize, b: usize) -> Complex64 {
        if a > self.caps.z1 || b > self.caps.z2 {
            return Complex64::default();
        }
        self.coeffs[self.index(a, b)]
    }

    pub fn coeff_mut(&mut self, a: usize, b: usize) -> &mut Complex64 {
        let i = self.index(a, b);
        &mut self.coeffs[i]
    }

    /// The `z2` series multiplying `z1^a`.
    pub fn row(&self, a: usize) -> Series1 {
        let start = self.index(a, 0);
        Series1 {
            coeffs: self.coeffs[start..start + self.caps.z2 + 1].to_vec(),
        }
    }

    fn check_same_caps(&self, other: &Series2) -> Result<()> {
        if self.caps != other.caps {
            return Err(Error::Dimension(format!(
                "series caps differ: ({}, {}) vs ({}, {})",
                self.caps.z1, self.caps.z2, other.caps.z1, other.caps.z2
            )));
        }
        Ok(())
    }

    pub fn inner_product(&self, other: &Series2) -> Result<Complex64> {
        self.check_same_caps(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(f, g)| f * g.conj())
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplication by `z1^da z2^db`, dropping everything beyond the caps.
    pub fn shift_up(&self, da: usize, db: usize) -> Series2 {
        let mut out = Series2::zeros(self.caps);
        for a in 0..=self.caps.z1 {
            if a + da > self.caps.z1 {
                break;
            }
            for b in 0..=self.caps.z2 {
                if b + db > self.caps.z2 {
                    break;
                }
                *out.coeff_mut(a + da, b + db) = self.coeff(a, b);
            }
        }
        out
    }

    pub fn mul_z1(&self) -> Series2 {
        self.shift_up(1, 0)
    }

    pub fn mul_z2(&self) -> Series2 {
        self.shift_up(0, 1)
    }

    /// Adjoint of multiplication by `z1`.
    pub fn shift_down_z1(&self) -> Series2 {
        let mut out = Series2::zeros(self.caps);
        for a in 1..=self.caps.z1 {
            for b in 0..=self.caps.z2 {
                *out.coeff_mut(a - 1, b) = self.coeff(a, b);
            }
        }
        out
    }

    /// Adjoint of multiplication by `z2`.
    pub fn shift_down_z2(&self) -> Series2 {
        let mut out = Series2::zeros(self.caps);
        for a in 0..=self.caps.z1 {
            for b in 1..=self.caps.z2 {
                *out.coeff_mut(a, b - 1) = self.coeff(a, b);
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Series2 {
        Series2 {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            caps: self.caps,
        }
    }

    pub fn add(&self, other: &Series2) -> Result<Series2> {
        self.check_same_caps(other)?;
        Ok(Series2 {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            caps: self.caps,
        })
    }

    /// `f(z1) g(z2)` placed in an ambient with the given caps.
    pub fn tensor(f: &Series1, g: &Series1, caps: Caps) -> Result<Series2> {
        if f.cap() > caps.z1 || g.cap() > caps.z2 {
            return Err(Error::Dimension(format!(
                "tensor factors with caps ({}, {}) overflow ambient caps ({}, {})",
                f.cap(),
                g.cap(),
                caps.z1,
                caps.z2
            )));
        }
        let mut out = Series2::zeros(caps);
        for (a, fa) in f.coeffs().iter().enumerate() {
            for (b, gb) in g.coeffs().iter().enumerate() {
                *out.coeff_mut(a, b) = fa * gb;
            }
        }
        Ok(out)
    }

    /// Evaluation of the truncated polynomial at `(z1, z2)`.
    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        (0..=self.caps.z1)
            .rev()
            .fold(Complex64::default(), |acc, a| {
                acc * z1 + self.row(a).eval(z2)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn unit_constant_has_unit_norm() {
        let one = Series1::one(5);
        assert_eq!(one.inner_product(&one).unwrap(), c(1.0));
    }

    #[test]
    fn distinct_monomials_are_orthogonal() {
        let z = Series1::monomial(1, 3).unwrap();
        let one = Series1::one(3);
        assert_eq!(z.inner_product(&one).unwrap(), c(0.0));
    }

    #[test]
    fn cap_mismatch_is_a_dimension_error() {
        let a = Series1::one(3);
        let b = Series1::one(4);
        assert!(matches!(a.inner_product(&b), Err(Error::Dimension(_))));
    }

    #[test]
    fn polynomial_product() {
        let f = Series1::from_real(&[1.0, 1.0]).unwrap();
        let g = Series1::from_real(&[1.0, -1.0]).unwrap();
        let p = f.mul(&g, 2);
        assert_eq!(p.series.coeffs(), &[c(1.0), c(0.0), c(-1.0)]);
        assert!(p.is_exact());
    }

    #[test]
    fn truncated_product_reports_discarded_mass() {
        let f = Series1::from_real(&[1.0, 1.0]).unwrap();
        let p = f.mul(&f, 1);
        assert_eq!(p.series.coeffs(), &[c(1.0), c(2.0)]);
        assert!((p.discarded_norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shift_down_decrements_indices() {
        let f = Series1::from_real(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.shift_down().coeffs(), &[c(2.0), c(3.0), c(0.0)]);
        assert_eq!(Series1::one(4).shift_down().norm(), 0.0);
    }

    #[test]
    fn non_finite_coefficients_rejected() {
        let bad = Series1::new(vec![c(1.0), Complex64::new(f64::NAN, 0.0)]);
        assert_eq!(bad, Err(Error::NonFinite(1)));
    }

    #[test]
    fn tensor_of_monomials() {
        let caps = Caps::new(2, 2);
        let one = Series1::one(2);
        let z = Series1::monomial(1, 2).unwrap();
        assert_eq!(
            Series2::tensor(&one, &one, caps).unwrap(),
            Series2::monomial(0, 0, caps).unwrap()
        );
        assert_eq!(
            Series2::tensor(&z, &one, caps).unwrap(),
            Series2::monomial(1, 0, caps).unwrap()
        );
        assert!(Series2::tensor(&Series1::one(3), &one, caps).is_err());
    }

    #[test]
    fn two_variable_shifts() {
        let caps = Caps::new(2, 3);
        let m = Series2::monomial(1, 2, caps).unwrap();
        assert_eq!(m.shift_down_z1(), Series2::monomial(0, 2, caps).unwrap());
        assert_eq!(m.shift_down_z2(), Series2::monomial(1, 1, caps).unwrap());
        assert_eq!(m.mul_z2(), Series2::monomial(1, 3, caps).unwrap());
        assert_eq!(m.mul_z1(), Series2::monomial(2, 2, caps).unwrap());
        assert_eq!(m.mul_z1().mul_z1().norm(), 0.0);
    }

    #[test]
    fn evaluation_matches_horner() {
        let f = Series1::from_real(&[1.0, 2.0, 3.0]).unwrap();
        let z = Complex64::new(0.5, -0.25);
        assert!((f.eval(z) - (c(1.0) + z * 2.0 + z * z * 3.0)).norm() < 1e-15);
    }

    #[test]
    fn division_undoes_multiplication() {
        let f = Series1::from_real(&[0.0, 0.0, 1.0, -0.5]).unwrap();
        let g = Series1::from_real(&[0.0, 2.0, 1.0]).unwrap();
        let q = f.div(&g, 6).unwrap();
        let back = q.mul(&g, 6).series;
        assert!(back.max_abs_diff(&f.with_cap(6)).unwrap() < 1e-15);
        assert!(f.div(&Series1::zeros(3), 3).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn coeffs(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
            prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len).prop_map(|v| {
                v.into_iter()
                    .map(|(re, im)| Complex64::new(re, im))
                    .collect()
            })
        }

        fn pair() -> impl Strategy<Value = (Series1, Series1)> {
            (1usize..12)
                .prop_flat_map(|n| (coeffs(n + 1), coeffs(n + 1)))
                .prop_map(|(f, g)| (Series1::new(f).unwrap(), Series1::new(g).unwrap()))
        }

        proptest! {
            #[test]
            fn inner_product_is_hermitian((f, g) in pair()) {
                let fg = f.inner_product(&g).unwrap();
                let gf = g.inner_product(&f).unwrap();
                prop_assert!((fg - gf.conj()).norm() < 1e-12);
                prop_assert!(f.norm() >= 0.0);
                prop_assert_eq!(f.norm() == 0.0, f.coeffs().iter().all(|c| c.norm() == 0.0));
            }

            #[test]
            fn shift_down_is_adjoint_of_z((f, g) in pair()) {
                let cap = f.cap();
                let mut low = f.coeffs().to_vec();
                low[cap] = Complex64::default();
                let f = Series1::new(low).unwrap();
                let lhs = f.mul_z().inner_product(&g).unwrap();
                let rhs = f.inner_product(&g.shift_down()).unwrap();
                prop_assert!((lhs - rhs).norm() < 1e-12);
            }

            #[test]
            fn tensor_factorizes_inner_products((f1, f2) in pair(), (g1, g2) in pair()) {
                let caps = Caps::new(f1.cap(), g1.cap());
                let a = Series2::tensor(&f1, &g1, caps).unwrap();
                let b = Series2::tensor(&f2, &g2, caps).unwrap();
                let lhs = a.inner_product(&b).unwrap();
                let rhs = f1.inner_product(&f2).unwrap() * g1.inner_product(&g2).unwrap();
                prop_assert!((lhs - rhs).norm() < 1e-11);
            }

            #[test]
            fn products_flag_truncation((f, g) in pair()) {
                let full = f.cap() + g.cap();
                let exact = f.mul(&g, full);
                prop_assert!(exact.is_exact());
                let cut = f.mul(&g, f.cap());
                let tail = exact.series.tail_norm(f.cap());
                prop_assert!((cut.discarded_norm - tail).abs() < 1e-12);
                prop_assert!(exact.series.max_abs_diff(&g.mul(&f, full).series).unwrap() < 1e-12);
            }
        }
    }
}
