//! Exact-rational spline kernels.
//!
//! A [`SplineKernel`] of order `m` is a finite combination
//! `sum_l c_l * B_m(x / h - s_l) / h`, where `B_m` is the centered cardinal
//! B-spline of order `m` (the `m`-fold self-convolution of the unit box).
//! Shifts `s_l` and coefficients `c_l` are exact rationals in units of the
//! scale `h`; `h` itself is only bound at evaluation time, so one symbolic
//! kernel serves every scale.
//!
//! The central object is the smoothing kernel
//! `Lambda_{2k} = 2 sum_{j=1}^k (-1)^{j+1} a_{j,k} chi_{jh}^2`, together with
//! its rewriting as a combination of equal-width shifted hats
//! `sum_{|l| < k} alpha_{l,k} chi_{lh,h}^2` and its convolution powers.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// One shifted B-spline with its weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelTerm {
    pub shift: BigRational,
    pub coeff: BigRational,
}

/// A sample of a kernel at a concrete scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub x: f64,
    pub value: f64,
}

/// Linear combination of shifted centered cardinal B-splines of one order.
#[derive(Clone)]
pub struct SplineKernel {
    order: u32,
    terms: Vec<KernelTerm>,
    // f64 copies for fast evaluation
    shifts: Vec<f64>,
    coeffs: Vec<f64>,
}

impl PartialEq for SplineKernel {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.terms == other.terms
    }
}

impl Eq for SplineKernel {}

impl fmt::Debug for SplineKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("({}, {})", t.shift, t.coeff))
            .collect();
        write!(f, "SplineKernel(order {}; {})", self.order, terms.join(", "))
    }
}

impl SplineKernel {
    /// Builds a kernel, merging equal shifts and dropping zero coefficients.
    pub fn from_terms(
        order: u32,
        terms: impl IntoIterator<Item = (BigRational, BigRational)>,
    ) -> Self {
        assert!(order >= 1, "kernel order must be positive");
        let mut merged: BTreeMap<BigRational, BigRational> = BTreeMap::new();
        for (shift, coeff) in terms {
            *merged.entry(shift).or_insert_with(BigRational::zero) += coeff;
        }
        let terms: Vec<KernelTerm> = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(shift, coeff)| KernelTerm { shift, coeff })
            .collect();
        let shifts = terms.iter().map(|t| t.shift.to_f64().unwrap()).collect();
        let coeffs = terms.iter().map(|t| t.coeff.to_f64().unwrap()).collect();
        Self {
            order,
            terms,
            shifts,
            coeffs,
        }
    }

    /// The unit-mass box of width `h` centered at `shift * h`.
    pub fn shifted_box(shift: BigRational) -> Self {
        Self::from_terms(1, [(shift, BigRational::one())])
    }

    /// `chi_h`, the unit-mass box of width `h`.
    pub fn unit_box() -> Self {
        Self::shifted_box(BigRational::zero())
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    /// Coefficient at `shift`, zero when absent.
    pub fn coefficient(&self, shift: &BigRational) -> BigRational {
        self.terms
            .iter()
            .find(|t| &t.shift == shift)
            .map(|t| t.coeff.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// Total integral; every B-spline has unit mass.
    pub fn mass(&self) -> BigRational {
        self.terms.iter().map(|t| t.coeff.clone()).sum()
    }

    pub fn abs_coeff_sum(&self) -> BigRational {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// Support `[lo, hi]` in units of `h`.
    pub fn support(&self) -> (BigRational, BigRational) {
        let half = rat(self.order as i64, 2);
        match (self.terms.first(), self.terms.last()) {
            (Some(a), Some(b)) => (&a.shift - &half, &b.shift + &half),
            _ => (BigRational::zero(), BigRational::zero()),
        }
    }

    pub fn scaled(&self, factor: &BigRational) -> Self {
        Self::from_terms(
            self.order,
            self.terms
                .iter()
                .map(|t| (t.shift.clone(), &t.coeff * factor)),
        )
    }

    /// Sum of two kernels of the same order.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order, "cannot add kernels of different order");
        Self::from_terms(
            self.order,
            self.terms
                .iter()
                .chain(&other.terms)
                .map(|t| (t.shift.clone(), t.coeff.clone())),
        )
    }

    /// Exact convolution: orders add, shifts add pairwise, coefficients
    /// multiply.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push((&a.shift + &b.shift, &a.coeff * &b.coeff));
            }
        }
        Self::from_terms(self.order + other.order, terms)
    }

    /// Value at `x` for scale `h > 0`.
    pub fn eval(&self, h: f64, x: f64) -> f64 {
        let u = x / h;
        let half = self.order as f64 / 2.0;
        let mut acc = 0.0;
        for (s, c) in self.shifts.iter().zip(&self.coeffs) {
            let v = u - s;
            if v.abs() < half {
                acc += c * cardinal_bspline(self.order, v);
            } else if self.order == 1 && v.abs() == half {
                acc += c;
            }
        }
        acc / h
    }

    /// All knots (in units of `h`) where the kernel may lose smoothness.
    pub fn knots(&self) -> Vec<f64> {
        let half = self.order as f64 / 2.0;
        let mut k: Vec<f64> = self
            .shifts
            .iter()
            .flat_map(|s| (0..=self.order).map(move |i| s - half + i as f64))
            .collect();
        k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        k.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        k
    }

    /// `n + 1` equispaced samples across the support.
    pub fn samples(&self, h: f64, n: usize) -> Vec<KernelValue> {
        let (lo, hi) = self.support();
        let lo = lo.to_f64().unwrap() * h;
        let hi = hi.to_f64().unwrap() * h;
        let n = n.max(1);
        (0..=n)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / n as f64;
                KernelValue {
                    x,
                    value: self.eval(h, x),
                }
            })
            .collect()
    }

    /// `int |K(x)| dx`.
    ///
    /// Order 2 kernels are piecewise linear with rational breakpoints, so the
    /// integral is computed exactly. Higher orders use adaptive quadrature
    /// between knots with absolute tolerance `1e-10`.
    pub fn l1_norm(&self, h: f64) -> L1Norm {
        if self.order == 2 {
            let exact = self.exact_l1_order2();
            L1Norm {
                value: exact.to_f64().unwrap(),
                exact: Some(exact),
            }
        } else {
            let knots = self.knots();
            let pieces = knots.len().saturating_sub(1).max(1);
            let tol = 1e-10 / pieces as f64;
            let f = |x: f64| self.eval(h, x).abs();
            let value = knots
                .windows(2)
                .map(|w| adaptive_simpson(&f, w[0] * h, w[1] * h, tol))
                .sum();
            L1Norm { value, exact: None }
        }
    }

    fn exact_l1_order2(&self) -> BigRational {
        let one = BigRational::one();
        let mut breaks: Vec<BigRational> = self
            .terms
            .iter()
            .flat_map(|t| [&t.shift - &one, t.shift.clone(), &t.shift + &one])
            .collect();
        breaks.sort();
        breaks.dedup();
        // K_1(u) = sum c * max(0, 1 - |u - s|); the integral is h-independent.
        let value_at = |u: &BigRational| -> BigRational {
            self.terms
                .iter()
                .map(|t| {
                    let d = (u - &t.shift).abs();
                    if d < one {
                        &t.coeff * (&one - d)
                    } else {
                        BigRational::zero()
                    }
                })
                .sum()
        };
        let values: Vec<BigRational> = breaks.iter().map(value_at).collect();
        let two = rat_int(2);
        let mut total = BigRational::zero();
        for i in 0..breaks.len().saturating_sub(1) {
            let width = &breaks[i + 1] - &breaks[i];
            let (v0, v1) = (&values[i], &values[i + 1]);
            let piece = if v0.is_negative() == v1.is_negative() || v0.is_zero() || v1.is_zero() {
                (v0 + v1).abs() / &two
            } else {
                (v0 * v0 + v1 * v1) / (&two * (v0.abs() + v1.abs()))
            };
            total += piece * width;
        }
        total
    }
}

/// `int |K|`, with the exact value when it is available.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Norm {
    pub value: f64,
    pub exact: Option<BigRational>,
}

/// Centered cardinal B-spline of order `m` (support `[-m/2, m/2]`), by the
/// order-raising recurrence on the uniform knot sequence.
pub fn cardinal_bspline(m: u32, u: f64) -> f64 {
    let m_us = m as usize;
    let x = u + m as f64 / 2.0;
    if m == 1 {
        return if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 };
    }
    if !(x > 0.0 && x < m as f64) {
        return 0.0;
    }
    let j = (x.floor() as usize).min(m_us - 1);
    // vals[i] holds N_r(x - i) for the current order r.
    let mut vals = vec![0.0; m_us + 1];
    vals[j] = 1.0;
    for r in 2..=m_us {
        let lo = (j + 1).saturating_sub(r);
        let denom = (r - 1) as f64;
        for i in lo..=j {
            let t = x - i as f64;
            vals[i] = (t * vals[i] + (r as f64 - t) * vals[i + 1]) / denom;
        }
    }
    vals[0]
}

/// `a_{j,k} = C(2k, k+j) / C(2k, k)`.
pub fn a_coeff(j: u32, k: u32) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::out_of_range("k", 0.0, "k >= 1"));
    }
    if j > k {
        return Err(Error::out_of_range("j", j as f64, format!("0 <= j <= {k}")));
    }
    let n = BigInt::from(2 * k);
    Ok(BigRational::new(
        binomial(n.clone(), BigInt::from(k + j)),
        binomial(n, BigInt::from(k)),
    ))
}

/// `chi_{jh}^2` rewritten over hats of width `h`, obtained by splitting
/// `chi_{jh}` into `j` boxes of width `h` and convolving exactly.
pub fn decompose_chi_square(j: u32) -> Result<SplineKernel> {
    if j == 0 {
        return Err(Error::out_of_range("j", 0.0, "j >= 1"));
    }
    let weight = rat(1, j as i64);
    let first = rat(-(j as i64 - 1), 2);
    let boxes = SplineKernel::from_terms(
        1,
        (0..j).map(|i| (&first + rat_int(i as i64), weight.clone())),
    );
    Ok(boxes.convolve(&boxes))
}

/// `Lambda_{2k}` as a combination of shifted hats of width `h`.
pub fn lambda_hat(k: u32) -> Result<SplineKernel> {
    if k == 0 {
        return Err(Error::out_of_range("k", 0.0, "k >= 1"));
    }
    let mut acc = SplineKernel::from_terms(2, std::iter::empty());
    for j in 1..=k {
        let sign = if j % 2 == 1 { 2 } else { -2 };
        let w = rat_int(sign) * a_coeff(j, k)?;
        acc = acc.add(&decompose_chi_square(j)?.scaled(&w));
    }
    Ok(acc)
}

/// Closed form `alpha_{l,k} = 2 sum_{j=|l|+1}^k (-1)^{j+1} (j-|l|) a_{j,k} / j^2`.
pub fn alpha_coeff(l: i32, k: u32) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::out_of_range("k", 0.0, "k >= 1"));
    }
    let al = l.unsigned_abs();
    if al >= k {
        return Err(Error::out_of_range("l", l as f64, format!("|l| <= {}", k - 1)));
    }
    let mut acc = BigRational::zero();
    for j in al + 1..=k {
        let sign = if j % 2 == 1 { 1 } else { -1 };
        acc += rat(sign * (j - al) as i64, (j * j) as i64) * a_coeff(j, k)?;
    }
    Ok(acc * rat_int(2))
}

/// `gamma_k = 2 sum_{odd j <= k} a_{j,k} / j^2`.
///
/// For `k = 1` this gives `1`, the single hat coefficient of `Lambda_2`.
pub fn gamma(k: u32) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::out_of_range("k", 0.0, "k >= 1"));
    }
    let mut acc = BigRational::zero();
    for j in (1..=k).step_by(2) {
        acc += a_coeff(j, k)? * rat(1, (j * j) as i64);
    }
    Ok(acc * rat_int(2))
}

/// `sum_{|l| < k} |alpha_{l,k}|`, the other route to `gamma_k`.
pub fn gamma_abs_sum(k: u32) -> Result<BigRational> {
    let k_i = k as i32;
    let mut acc = BigRational::zero();
    for l in -(k_i - 1)..k_i {
        acc += alpha_coeff(l, k)?.abs();
    }
    Ok(acc)
}

/// `j`-fold convolution power of `Lambda_{2k}`.
pub fn lambda_power(k: u32, j: u32) -> Result<SplineKernel> {
    if j == 0 {
        return Err(Error::out_of_range("j", 0.0, "j >= 1"));
    }
    let base = lambda_hat(k)?;
    let mut acc = base.clone();
    for _ in 1..j {
        acc = acc.convolve(&base);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{simpson, GaussLegendre};
    use proptest::prelude::*;

    fn coeffs(k: &SplineKernel) -> Vec<(BigRational, BigRational)> {
        k.terms()
            .iter()
            .map(|t| (t.shift.clone(), t.coeff.clone()))
            .collect()
    }

    #[test]
    fn binomial_ratios() {
        assert_eq!(a_coeff(1, 1).unwrap(), rat(1, 2));
        assert_eq!(a_coeff(1, 2).unwrap(), rat(2, 3));
        for k in 1..10 {
            assert_eq!(a_coeff(0, k).unwrap(), BigRational::one());
        }
        assert!(a_coeff(3, 2).is_err());
    }

    #[test]
    fn chi_square_decomposition_matches_fejer_weights() {
        assert_eq!(
            coeffs(&decompose_chi_square(1).unwrap()),
            vec![(rat_int(0), rat_int(1))]
        );
        let two = decompose_chi_square(2).unwrap();
        assert_eq!(
            coeffs(&two),
            vec![
                (rat_int(-1), rat(1, 4)),
                (rat_int(0), rat(1, 2)),
                (rat_int(1), rat(1, 4))
            ]
        );
        let three = decompose_chi_square(3).unwrap();
        let expect: Vec<_> = [1, 2, 3, 2, 1]
            .iter()
            .zip(-2..=2)
            .map(|(&c, l)| (rat_int(l), rat(c, 9)))
            .collect();
        assert_eq!(coeffs(&three), expect);
        // (1/j)(1 - |l|/j) for every j up to 10
        for j in 1..=10u32 {
            let d = decompose_chi_square(j).unwrap();
            assert_eq!(d.order(), 2);
            for l in -(j as i64 - 1)..=(j as i64 - 1) {
                let formula = rat(1, j as i64) * (rat_int(1) - rat(l.abs(), j as i64));
                assert_eq!(d.coefficient(&rat_int(l)), formula, "j={j} l={l}");
            }
            assert_eq!(d.terms().len(), 2 * j as usize - 1);
        }
    }

    #[test]
    fn lambda_small_cases() {
        assert_eq!(
            coeffs(&lambda_hat(1).unwrap()),
            vec![(rat_int(0), rat_int(1))]
        );
        assert_eq!(
            coeffs(&lambda_hat(2).unwrap()),
            vec![
                (rat_int(-1), rat(-1, 12)),
                (rat_int(0), rat(7, 6)),
                (rat_int(1), rat(-1, 12))
            ]
        );
    }

    #[test]
    fn alpha_closed_form_values() {
        assert_eq!(alpha_coeff(0, 2).unwrap(), rat(7, 6));
        assert_eq!(alpha_coeff(1, 2).unwrap(), rat(-1, 12));
        assert_eq!(alpha_coeff(-1, 2).unwrap(), rat(-1, 12));
        assert!(alpha_coeff(2, 2).is_err());
    }

    #[test]
    fn hat_decomposition_agrees_with_closed_form() {
        for k in 1..=12u32 {
            let lam = lambda_hat(k).unwrap();
            assert_eq!(lam.terms().len(), 2 * k as usize - 1);
            for l in -(k as i32 - 1)..k as i32 {
                assert_eq!(
                    lam.coefficient(&rat_int(l as i64)),
                    alpha_coeff(l, k).unwrap(),
                    "k={k} l={l}"
                );
            }
            assert_eq!(lam.mass(), BigRational::one(), "mass k={k}");
        }
    }

    #[test]
    fn gamma_values_and_routes() {
        assert_eq!(gamma(1).unwrap(), BigRational::one());
        assert_eq!(gamma(2).unwrap(), rat(4, 3));
        assert_eq!(gamma(3).unwrap(), rat(68, 45));
        assert_eq!(gamma(4).unwrap(), rat(512, 315));
        let quarter_pi_sq = std::f64::consts::PI.powi(2) / 4.0;
        for k in 2..=12 {
            let g = gamma(k).unwrap();
            assert_eq!(g, gamma_abs_sum(k).unwrap(), "k={k}");
            assert_eq!(g, lambda_hat(k).unwrap().abs_coeff_sum());
            assert!(g.to_f64().unwrap() < quarter_pi_sq);
        }
    }

    #[test]
    fn alternating_signs() {
        for k in 2..=12u32 {
            for l in -(k as i32 - 1)..k as i32 {
                let a = alpha_coeff(l, k).unwrap();
                if l % 2 == 0 {
                    assert!(a.is_positive(), "k={k} l={l}");
                } else {
                    assert!(a.is_negative(), "k={k} l={l}");
                }
            }
        }
    }

    #[test]
    fn box_squared_is_hat() {
        let b = SplineKernel::unit_box();
        let hat = b.convolve(&b);
        assert_eq!(hat, lambda_hat(1).unwrap());
        assert_eq!(hat.order(), 2);
    }

    #[test]
    fn lambda_square() {
        let l2 = lambda_hat(2).unwrap();
        let sq = l2.convolve(&l2);
        assert_eq!(sq.order(), 4);
        assert_eq!(sq.terms().len(), 5);
        assert_eq!(sq.terms()[0].shift, rat_int(-2));
        assert!(sq.abs_coeff_sum() <= rat(16, 9));
        assert_eq!(sq, lambda_power(2, 2).unwrap());
    }

    #[test]
    fn powers_of_lambda() {
        let p = lambda_power(1, 3).unwrap();
        assert_eq!(p.order(), 6);
        assert_eq!(coeffs(&p), vec![(rat_int(0), rat_int(1))]);
        for k in 2..=5u32 {
            let g = gamma(k).unwrap();
            let mut gp = g.clone();
            for j in 1..=k {
                let lp = lambda_power(k, j).unwrap();
                assert_eq!(lp.order(), 2 * j);
                assert!(lp.abs_coeff_sum() <= gp, "k={k} j={j}");
                let (lo, hi) = lp.support();
                let radius = rat_int((j * (k - 1) + j) as i64);
                assert_eq!(hi, radius.clone());
                assert_eq!(lo, -radius);
                assert_eq!(lp.mass(), BigRational::one());
                gp *= &g;
            }
        }
    }

    #[test]
    fn power_support_checked_by_evaluation() {
        let lp = lambda_power(3, 2).unwrap();
        let h = 0.1;
        // half-width j(k-1)h + jh = 6h
        for x in [6.0 * h + 1e-9, 6.5 * h, -6.0 * h - 1e-9, 7.0 * h] {
            assert_eq!(lp.eval(h, x), 0.0, "x={x}");
        }
        assert!(lp.eval(h, 5.5 * h).abs() > 0.0);
        assert!(lp.eval(h, -5.9 * h).abs() > 0.0);
    }

    #[test]
    fn hat_evaluation() {
        let lam = lambda_hat(1).unwrap();
        assert_eq!(lam.eval(0.5, 0.0), 2.0);
        assert_eq!(lam.eval(0.5, 0.6), 0.0);
        assert!((lam.eval(0.5, 0.25) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bspline_recurrence_matches_explicit_forms() {
        // order 3: 3/4 - u^2 on |u| <= 1/2, (3/2 - |u|)^2 / 2 on 1/2 <= |u| <= 3/2
        for &u in &[-1.4, -0.7, -0.2, 0.0, 0.3, 0.5, 1.1] {
            let a: f64 = u;
            let explicit = if a.abs() <= 0.5 {
                0.75 - a * a
            } else {
                0.5 * (1.5 - a.abs()).powi(2)
            };
            assert!((cardinal_bspline(3, u) - explicit).abs() < 1e-15);
        }
        // order 4 at 0 is 2/3, and the integer translates sum to one
        assert!((cardinal_bspline(4, 0.0) - 2.0 / 3.0).abs() < 1e-15);
        for m in 2..=24u32 {
            for &u in &[0.0, 0.13, 0.5, 0.77] {
                let s: f64 = (-30..=30).map(|i| cardinal_bspline(m, u + i as f64)).sum();
                assert!((s - 1.0).abs() < 1e-12, "m={m} u={u} sum={s}");
            }
        }
    }

    fn piecewise_simpson(k: &SplineKernel, h: f64, panels: usize) -> f64 {
        let knots = k.knots();
        let per = panels / (knots.len() - 1);
        knots
            .windows(2)
            .map(|w| simpson(|x| k.eval(h, x), w[0] * h, w[1] * h, per))
            .sum()
    }

    #[test]
    fn quadrature_mass_is_one() {
        for k in 1..=6 {
            let lam = lambda_hat(k).unwrap();
            for h in [0.05, 0.3] {
                let m = piecewise_simpson(&lam, h, 10_000);
                assert!((m - 1.0).abs() < 1e-10, "k={k} h={h} m={m}");
            }
        }
    }

    #[test]
    fn l1_norms() {
        let one = lambda_hat(1).unwrap().l1_norm(0.37);
        assert_eq!(one.exact, Some(BigRational::one()));
        assert!(lambda_hat(2).unwrap().l1_norm(1.0).value < 1.18);
        assert!(lambda_hat(4).unwrap().l1_norm(1.0).value < 1.31);
    }

    #[test]
    fn exact_l1_matches_adaptive_quadrature() {
        for k in 2..=6 {
            let lam = lambda_hat(k).unwrap();
            let exact = lam.l1_norm(0.2).value;
            let knots = lam.knots();
            let quad: f64 = knots
                .windows(2)
                .map(|w| adaptive_simpson(&|x: f64| lam.eval(0.2, x).abs(), w[0] * 0.2, w[1] * 0.2, 1e-13))
                .sum();
            assert!((exact - quad).abs() < 1e-10, "k={k}: {exact} vs {quad}");
        }
    }

    #[test]
    fn higher_order_l1_uses_quadrature() {
        let p = lambda_power(2, 2).unwrap();
        let n = p.l1_norm(0.5);
        assert!(n.exact.is_none());
        assert!(n.value >= 1.0 - 1e-10);
        assert!(n.value <= 16.0 / 9.0);
    }

    fn numeric_convolution(a: &SplineKernel, b: &SplineKernel, h: f64, x: f64) -> f64 {
        let gl = GaussLegendre::new(12);
        let mut pts: Vec<f64> = a.knots().iter().map(|t| t * h).collect();
        pts.extend(b.knots().iter().map(|t| x - t * h));
        pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        pts.dedup();
        pts.windows(2)
            .map(|w| gl.integrate(|t| a.eval(h, t) * b.eval(h, x - t), w[0], w[1]))
            .sum()
    }

    #[test]
    fn symbolic_convolution_matches_numeric() {
        let a = lambda_hat(3).unwrap();
        let b = decompose_chi_square(2).unwrap().convolve(&SplineKernel::unit_box());
        let c = a.convolve(&b);
        let h = 0.3;
        let (lo, hi) = c.support();
        let (lo, hi) = (lo.to_f64().unwrap() * h, hi.to_f64().unwrap() * h);
        for i in 0..50 {
            let x = lo - 0.1 + (hi - lo + 0.2) * (i as f64 + 0.5) / 50.0;
            let sym = c.eval(h, x);
            let num = numeric_convolution(&a, &b, h, x);
            assert!((sym - num).abs() < 1e-8, "x={x}: {sym} vs {num}");
        }
    }

    fn small_kernel() -> impl Strategy<Value = SplineKernel> {
        (
            1u32..=3,
            prop::collection::vec((-4i64..=4, 1i64..=3, -5i64..=5, 1i64..=4), 1..4),
        )
            .prop_map(|(order, raw)| {
                SplineKernel::from_terms(
                    order,
                    raw.into_iter()
                        .map(|(sn, sd, cn, cd)| (rat(sn, sd), rat(cn, cd))),
                )
            })
    }

    proptest! {
        #[test]
        fn convolution_is_associative(a in small_kernel(), b in small_kernel(), c in small_kernel()) {
            prop_assert_eq!(a.convolve(&b).convolve(&c), a.convolve(&b.convolve(&c)));
        }

        #[test]
        fn convolution_multiplies_mass(a in small_kernel(), b in small_kernel()) {
            prop_assert_eq!(a.convolve(&b).mass(), a.mass() * b.mass());
            prop_assert_eq!(a.convolve(&b), b.convolve(&a));
        }
    }
}
