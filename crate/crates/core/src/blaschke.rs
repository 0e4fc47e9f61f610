//! Blaschke factors, finite Blaschke products and the tail products of a
//! finite Rudin sequence.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Caps, Series1};

/// Default relative rank threshold used across the crate.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Zeros with modulus above this are flagged as ill-conditioned.
pub const CONDITIONING_LIMIT: f64 = 0.99;

/// A zero `alpha` of the unit disc carried with multiplicity `mult`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlaschkePoint {
    alpha: Complex64,
    mult: u32,
}

fn check_alpha(alpha: Complex64) -> Result<()> {
    let modulus = alpha.norm();
    if !modulus.is_finite() || modulus >= 1.0 {
        return Err(Error::Domain { modulus });
    }
    Ok(())
}

impl BlaschkePoint {
    pub fn new(alpha: Complex64, mult: u32) -> Result<Self> {
        check_alpha(alpha)?;
        if mult == 0 {
            return Err(Error::ZeroMultiplicity);
        }
        Ok(BlaschkePoint { alpha, mult })
    }

    pub fn real(alpha: f64, mult: u32) -> Result<Self> {
        BlaschkePoint::new(Complex64::new(alpha, 0.0), mult)
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn mult(&self) -> u32 {
        self.mult
    }

    /// Exact test on the stored value, never on a computed float.
    pub fn is_origin(&self) -> bool {
        self.alpha.re == 0.0 && self.alpha.im == 0.0
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.alpha.norm() > CONDITIONING_LIMIT
    }
}

/// A finite Rudin sequence: points `0..=M`, with tails
/// `phi_n = prod_{k >= n} b_{alpha_k}^{l_k}` and `phi_{M+1} = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RudinSpec {
    pub points: Vec<BlaschkePoint>,
    pub caps: Caps,
    pub tol: f64,
}

impl RudinSpec {
    pub fn new(points: Vec<BlaschkePoint>, caps: Caps) -> Self {
        RudinSpec {
            points,
            caps,
            tol: DEFAULT_TOL,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Index of the last point, `None` for the empty sequence.
    pub fn last_index(&self) -> Option<usize> {
        self.points.len().checked_sub(1)
    }

    /// Number of tail products `phi_0..=phi_{M+1}`.
    pub fn tail_count(&self) -> usize {
        self.points.len() + 1
    }

    /// Sum of the multiplicities of the zeros at the origin.
    pub fn origin_degree(&self) -> usize {
        self.points
            .iter()
            .filter(|p| p.is_origin())
            .map(|p| p.mult as usize)
            .sum()
    }

    pub fn total_degree(&self) -> usize {
        self.points.iter().map(|p| p.mult as usize).sum()
    }

    /// Largest modulus among the nonzero points.
    pub fn max_nonzero_modulus(&self) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| !p.is_origin())
            .map(|p| p.alpha.norm())
            .fold(None, |acc, r| Some(acc.map_or(r, |m: f64| m.max(r))))
    }

    pub fn conditioning_warnings(&self) -> Vec<String> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_ill_conditioned())
            .map(|(n, p)| {
                format!(
                    "point {n}: |alpha| = {:.6} exceeds {CONDITIONING_LIMIT}; truncation needs very large caps",
                    p.alpha.norm()
                )
            })
            .collect()
    }
}

/// Taylor coefficients of `b_alpha(z) = (-conj(a)/|a|) (z - a)/(1 - conj(a) z)`,
/// with `b_0(z) = z`.
pub fn blaschke_factor(alpha: Complex64, cap: usize) -> Result<Series1> {
    check_alpha(alpha)?;
    let mut out = Series1::zeros(cap).into_coeffs();
    let r = alpha.norm();
    if r == 0.0 {
        if cap >= 1 {
            out[1] = Complex64::new(1.0, 0.0);
        }
        return Series1::new(out);
    }
    out[0] = Complex64::new(r, 0.0);
    // c_k = -(1 - r^2) conj(a)^k / r, written with the unit phase conj(a)/r
    let phase = alpha.conj() / r;
    let mut power = Complex64::new(1.0, 0.0);
    for c in out.iter_mut().skip(1) {
        *c = -(1.0 - r * r) * phase * power;
        power *= alpha.conj();
    }
    Series1::new(out)
}

/// Truncated expansion of `prod b_{alpha}^{l}`; the empty product is 1.
pub fn blaschke_product(points: &[BlaschkePoint], cap: usize) -> Result<Series1> {
    let mut acc = Series1::one(cap);
    for p in points {
        let factor = blaschke_factor(p.alpha, cap)?;
        acc = acc.mul(&factor.pow(p.mult, cap), cap).series;
    }
    Ok(acc)
}

/// `phi_n = prod_{k=n}^{M} b_{alpha_k}^{l_k}`, with `phi_{M+1} = 1`.
pub fn phi_tail(spec: &RudinSpec, n: usize, cap: usize) -> Result<Series1> {
    if n > spec.points.len() {
        return Err(Error::Index {
            index: n,
            max: spec.points.len(),
        });
    }
    blaschke_product(&spec.points[n..], cap)
}

/// Partial Blaschke sum `sum_k (1 - l_k |alpha_k|)`. Diagnostic only.
pub fn blaschke_sum(spec: &RudinSpec) -> f64 {
    spec.points
        .iter()
        .map(|p| 1.0 - p.mult as f64 * p.alpha.norm())
        .sum()
}

/// Cap suggested by geometric decay: the polynomial degree of the zeros at
/// the origin plus `ceil(log(tol) / log(max |alpha|))` when a nonzero point
/// exists.
pub fn geometric_cap(spec: &RudinSpec, tol: f64) -> usize {
    let tail = match spec.max_nonzero_modulus() {
        Some(r) if r > 0.0 => (tol.ln() / r.ln()).ceil().max(0.0) as usize,
        _ => 0,
    };
    spec.origin_degree() + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn spec(points: &[(f64, u32)]) -> RudinSpec {
        RudinSpec::new(
            points
                .iter()
                .map(|&(a, l)| BlaschkePoint::real(a, l).unwrap())
                .collect(),
            Caps::new(8, 40),
        )
    }

    #[test]
    fn factor_at_origin_is_z() {
        let b = blaschke_factor(c(0.0), 5).unwrap();
        assert_eq!(b, Series1::monomial(1, 5).unwrap());
    }

    #[test]
    fn factor_rejects_boundary() {
        assert_eq!(
            blaschke_factor(c(1.0), 3),
            Err(Error::Domain { modulus: 1.0 })
        );
        assert!(blaschke_factor(Complex64::new(0.6, 0.8), 3).is_err());
    }

    #[test]
    fn zero_multiplicity_rejected() {
        assert_eq!(BlaschkePoint::real(0.3, 0), Err(Error::ZeroMultiplicity));
    }

    #[test]
    fn empty_and_monomial_products() {
        assert_eq!(blaschke_product(&[], 6).unwrap(), Series1::one(6));
        let z2 = blaschke_product(&[BlaschkePoint::real(0.0, 2).unwrap()], 4).unwrap();
        assert_eq!(z2, Series1::monomial(2, 4).unwrap());
    }

    #[test]
    fn tails_of_a_two_point_sequence() {
        let s = spec(&[(0.0, 1), (0.5, 2)]);
        assert_eq!(phi_tail(&s, 2, 30).unwrap(), Series1::one(30));
        let b = blaschke_factor(c(0.5), 30).unwrap();
        let expected = b.mul(&b, 30).series;
        assert!(
            phi_tail(&s, 1, 30)
                .unwrap()
                .max_abs_diff(&expected)
                .unwrap()
                < 1e-15
        );
        let phi1 = phi_tail(&s, 1, 30).unwrap();
        assert_eq!(phi_tail(&s, 0, 30).unwrap(), phi1.mul_z());
        assert!(matches!(phi_tail(&s, 3, 30), Err(Error::Index { .. })));
    }

    #[test]
    fn partial_blaschke_sums() {
        assert_eq!(blaschke_sum(&spec(&[])), 0.0);
        assert_eq!(blaschke_sum(&spec(&[(0.0, 1)])), 1.0);
        assert_eq!(blaschke_sum(&spec(&[(0.5, 2)])), 0.0);
    }

    #[test]
    fn conditioning_guard() {
        let s = spec(&[(0.5, 1), (0.995, 1)]);
        let w = s.conditioning_warnings();
        assert_eq!(w.len(), 1);
        assert!(w[0].starts_with("point 1"));
    }

    #[test]
    fn geometric_cap_counts_origin_degree() {
        assert_eq!(geometric_cap(&spec(&[(0.0, 3)]), 1e-9), 3);
        // log(1e-9)/log(0.5) = 29.897...
        assert_eq!(geometric_cap(&spec(&[(0.0, 1), (0.5, 1)]), 1e-9), 31);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point(max_modulus: f64) -> impl Strategy<Value = BlaschkePoint> {
            (
                prop::bool::weighted(0.25),
                0.0..max_modulus,
                0.0..std::f64::consts::TAU,
                1u32..=3,
            )
                .prop_map(|(zero, r, t, l)| {
                    let alpha = if zero {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::from_polar(r, t)
                    };
                    BlaschkePoint::new(alpha, l).unwrap()
                })
        }

        proptest! {
            #[test]
            fn factors_have_unit_norm(r in 0.0..0.9f64, t in 0.0..std::f64::consts::TAU) {
                let alpha = Complex64::from_polar(r, t);
                let b = blaschke_factor(alpha, 400).unwrap();
                prop_assert!((b.norm() - 1.0).abs() < 1e-10);
            }

            #[test]
            fn truncation_mass_decays_geometrically(r in 0.1..0.8f64, n in 4usize..20) {
                let alpha = Complex64::new(r, 0.0);
                let long = blaschke_factor(alpha, 4 * n).unwrap();
                let tail_n = long.tail_norm(n + 1);
                let tail_2n = long.tail_norm(2 * n + 1);
                prop_assert!(tail_2n <= tail_n * r.powi(n as i32) * (1.0 + 1e-9) + 1e-300);
            }

            #[test]
            fn products_concatenate(
                a in prop::collection::vec(point(0.7), 0..3),
                b in prop::collection::vec(point(0.7), 0..3),
            ) {
                let cap = 48;
                let joined: Vec<_> = a.iter().chain(&b).copied().collect();
                let lhs = blaschke_product(&joined, cap).unwrap();
                let rhs = blaschke_product(&a, cap).unwrap().mul(&blaschke_product(&b, cap).unwrap(), cap).series;
                prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
            }

            #[test]
            fn tails_form_a_divisibility_chain(points in prop::collection::vec(point(0.7), 1..5)) {
                let cap = 60;
                let spec = RudinSpec::new(points.clone(), Caps::new(0, cap));
                for (n, p) in points.iter().enumerate() {
                    let head = blaschke_factor(p.alpha(), cap).unwrap().pow(p.mult(), cap);
                    let rebuilt = head.mul(&phi_tail(&spec, n + 1, cap).unwrap(), cap).series;
                    prop_assert!(phi_tail(&spec, n, cap).unwrap().max_abs_diff(&rebuilt).unwrap() < 1e-12);
                }
            }
        }
    }
}
