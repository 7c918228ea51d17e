//! Best uniform polynomial approximation on an interval.
//!
//! [`remez`] runs the classical exchange iteration in an interval-adapted
//! Chebyshev basis and stops once the de la Vallée Poussin bracket
//! `[min |r| on the reference, max |r| on the sample grid]` is tight.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bounds::constant_tables;
use crate::corpus::{Interval, RealFunction, Restricted};
use crate::error::{Error, Result};
use crate::moduli::{modulus, ModulusGrid, ModulusResult};
use crate::numeric::brent_max;

/// Relative bracket width requested by [`best_error`] and [`whitney_poly`].
pub const DEFAULT_CERTIFY_TOL: f64 = 1e-10;

/// Maximum number of exchange steps.
pub const MAX_ITERATIONS: usize = 100;

/// Omega below this marks a Whitney check as degenerate.
pub const DEGENERATE_OMEGA: f64 = 1e-13;

/// A polynomial stored by its coefficients in `T_j((2x - a - b)/(b - a))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub interval: Interval,
    pub cheb_coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(interval: Interval, cheb_coeffs: Vec<f64>) -> Self {
        assert!(!cheb_coeffs.is_empty(), "a polynomial needs at least one coefficient");
        Self {
            interval,
            cheb_coeffs,
        }
    }

    pub fn degree(&self) -> usize {
        self.cheb_coeffs.len() - 1
    }

    fn to_t(&self, x: f64) -> f64 {
        let Interval { lo, hi } = self.interval;
        (2.0 * x - lo - hi) / (hi - lo)
    }

    /// Clenshaw evaluation. Valid for any real `x`, not only inside the
    /// interval.
    pub fn eval(&self, x: f64) -> f64 {
        let t = self.to_t(x);
        let c = &self.cheb_coeffs;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &cj in c[1..].iter().rev() {
            let b0 = cj + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        c[0] + t * b1 - b2
    }

    /// Exact evaluation of the stored polynomial at a rational point, with
    /// every coefficient and interval end taken as the exact value of its
    /// double.
    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        let q = |v: f64| BigRational::from_float(v).expect("finite");
        let (lo, hi) = (q(self.interval.lo), q(self.interval.hi));
        let two = BigRational::from_integer(2.into());
        let t = (&two * x - &lo - &hi) / (&hi - &lo);
        let c: Vec<BigRational> = self.cheb_coeffs.iter().map(|&v| q(v)).collect();
        let (mut b1, mut b2) = (BigRational::zero(), BigRational::zero());
        for cj in c[1..].iter().rev() {
            let b0 = cj + &two * &t * &b1 - &b2;
            b2 = std::mem::replace(&mut b1, b0);
        }
        &c[0] + t * b1 - b2
    }

    /// Coefficients in the monomial basis of `x`, lowest degree first.
    /// Meant for display; large intervals or degrees lose accuracy.
    pub fn monomial_coeffs(&self) -> Vec<f64> {
        let n = self.cheb_coeffs.len();
        // T_j as polynomials in t
        let mut t_prev = vec![1.0];
        let mut t_cur = vec![0.0, 1.0];
        let mut in_t = vec![0.0; n];
        in_t[0] += self.cheb_coeffs[0];
        if n > 1 {
            in_t[1] += self.cheb_coeffs[1];
        }
        for j in 2..n {
            let mut next = vec![0.0; j + 1];
            for (i, c) in t_cur.iter().enumerate() {
                next[i + 1] += 2.0 * c;
            }
            for (i, c) in t_prev.iter().enumerate() {
                next[i] -= c;
            }
            for (i, c) in next.iter().enumerate() {
                in_t[i] += self.cheb_coeffs[j] * c;
            }
            t_prev = std::mem::replace(&mut t_cur, next);
        }
        // t = s x + c0, expand by Horner in x
        let Interval { lo, hi } = self.interval;
        let s = 2.0 / (hi - lo);
        let c0 = -(lo + hi) / (hi - lo);
        let mut out = vec![0.0; n];
        for &a in in_t.iter().rev() {
            let mut next = vec![0.0; n];
            for (i, v) in out.iter().enumerate() {
                next[i] += c0 * v;
                if i + 1 < n {
                    next[i + 1] += s * v;
                }
            }
            next[0] += a;
            out = next;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemezResult {
    pub poly: Polynomial,
    pub error_lo: f64,
    pub error_hi: f64,
    pub reference: Vec<f64>,
    pub iterations: usize,
    pub certified: bool,
}

impl RemezResult {
    pub fn error(&self) -> f64 {
        0.5 * (self.error_lo + self.error_hi)
    }
}

fn cheb_row(t: f64, n: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(n);
    let (mut a, mut b) = (1.0, t);
    for j in 0..n {
        row.push(if j == 0 { 1.0 } else { b });
        if j > 0 {
            let c = 2.0 * t * b - a;
            a = b;
            b = c;
        }
    }
    row
}

/// Chebyshev-Lobatto points of `interval`, increasing.
fn lobatto(interval: Interval, n: usize) -> Vec<f64> {
    let (m, r) = (interval.mid(), 0.5 * interval.len());
    let mut pts: Vec<f64> = (0..=n)
        .map(|i| m - r * (std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect();
    pts[0] = interval.lo;
    pts[n] = interval.hi;
    pts
}

fn solve_levelled(f: &impl Fn(f64) -> f64, interval: Interval, reference: &[f64]) -> Result<(Polynomial, f64)> {
    let m = reference.len();
    let n = m - 1;
    let poly0 = Polynomial::new(interval, vec![0.0]);
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (i, &x) in reference.iter().enumerate() {
        for (j, v) in cheb_row(poly0.to_t(x), n).into_iter().enumerate() {
            a[(i, j)] = v;
        }
        a[(i, n)] = if i % 2 == 0 { 1.0 } else { -1.0 };
        rhs[i] = f(x);
    }
    let sol = a.lu().solve(&rhs).ok_or(Error::SingularReference)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularReference);
    }
    let coeffs = sol.iter().take(n).copied().collect();
    Ok((Polynomial::new(interval, coeffs), sol[n]))
}

#[derive(Debug, Clone, Copy)]
struct Extremum {
    x: f64,
    r: f64,
}

/// One signed extremum of `r` per maximal run of constant sign on `pts`,
/// each refined by a local maximization of `sign * r`.
fn signed_extrema(r: &impl Fn(f64) -> f64, pts: &[f64]) -> Vec<Extremum> {
    let vals: Vec<f64> = pts.iter().map(|&x| r(x)).collect();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    let mut sign = 0.0f64;
    for (i, &v) in vals.iter().enumerate() {
        if v == 0.0 || v.signum() == sign {
            continue;
        }
        if let Some(st) = start {
            runs.push((st, i));
        }
        start = Some(i);
        sign = v.signum();
    }
    if let Some(st) = start {
        runs.push((st, vals.len()));
    }
    let mut out = Vec::with_capacity(runs.len());
    for &(st, en) in &runs {
        let mut g = st;
        for i in st..en {
            if vals[i].abs() > vals[g].abs() {
                g = i;
            }
        }
        let s = vals[g].signum();
        let mut best = Extremum { x: pts[g], r: vals[g] };
        if g > 0 && g + 1 < pts.len() {
            let (a, b) = (pts[g - 1], pts[g + 1]);
            let xtol = 1e-15 * (1.0 + pts[g].abs()) + 1e-13 * (b - a);
            let (x, v) = brent_max(|x| s * r(x), a, b, xtol);
            if v > s * best.r {
                best = Extremum { x, r: s * v };
            }
        }
        out.push(best);
    }
    // refinement must not reorder
    for i in 1..out.len() {
        if out[i].x <= out[i - 1].x {
            return runs
                .iter()
                .map(|&(st, en)| {
                    let g = (st..en)
                        .max_by(|&i, &j| vals[i].abs().partial_cmp(&vals[j].abs()).unwrap().then(j.cmp(&i)))
                        .unwrap();
                    Extremum { x: pts[g], r: vals[g] }
                })
                .collect();
        }
    }
    out
}

/// Reduces an alternating list to `m` points while keeping alternation and
/// the global maximum.
fn trim(mut ext: Vec<Extremum>, m: usize) -> Vec<Extremum> {
    while ext.len() > m {
        let len = ext.len();
        let i = (0..len)
            .min_by(|&i, &j| ext[i].r.abs().partial_cmp(&ext[j].r.abs()).unwrap().then(i.cmp(&j)))
            .unwrap();
        if i == 0 || i == len - 1 || len - m == 1 {
            if ext[0].r.abs() <= ext[len - 1].r.abs() {
                ext.remove(0);
            } else {
                ext.pop();
            }
        } else {
            let j = if ext[i - 1].r.abs() <= ext[i + 1].r.abs() { i - 1 } else { i + 1 };
            let lo = i.min(j);
            ext.drain(lo..lo + 2);
        }
    }
    ext
}

/// Minimax polynomial of the given degree for `f` on `interval`.
///
/// The result is certified when the bracket satisfies
/// `error_hi - error_lo <= max(certify_tol * error_hi, floor)` where `floor`
/// is a rounding allowance proportional to `max |f|`.
pub fn remez(
    f: &(impl RealFunction + ?Sized),
    interval: Interval,
    degree: usize,
    certify_tol: f64,
) -> Result<RemezResult> {
    if !(certify_tol > 1e-14 && certify_tol < 1e-2) {
        return Err(Error::out_of_range("certify_tol", certify_tol, "1e-14 < certify_tol < 1e-2"));
    }
    let dom = f.domain();
    if !(dom.contains_approx(interval.lo) && dom.contains_approx(interval.hi)) {
        return Err(Error::out_of_range(
            "interval",
            interval.lo,
            format!("{interval} must lie inside the domain {dom}"),
        ));
    }
    let fe = |x: f64| f.eval(interval.clamp(x));
    let m = degree + 2;

    let mut grid = lobatto(interval, (32 * m).max(256));
    grid.extend(f.breakpoints().into_iter().filter(|b| interval.contains(*b)));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let fscale = grid.iter().fold(0.0f64, |acc, &x| acc.max(fe(x).abs()));
    let floor = 1e3 * f64::EPSILON * fscale.max(f64::MIN_POSITIVE);

    let mut reference = lobatto(interval, m - 1);
    let mut last = None;
    for it in 1..=MAX_ITERATIONS {
        let (poly, e) = solve_levelled(&fe, interval, &reference)?;
        let r = |x: f64| fe(x) - poly.eval(x);

        let mut pts = grid.clone();
        pts.extend_from_slice(&reference);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let ext = signed_extrema(&r, &pts);
        let hi = ext
            .iter()
            .map(|p| p.r.abs())
            .fold(0.0f64, f64::max)
            .max(e.abs());

        if ext.len() < m {
            let res = RemezResult {
                poly,
                error_lo: 0.0,
                error_hi: hi,
                reference: reference.clone(),
                iterations: it,
                certified: hi <= floor,
            };
            if res.certified {
                return Ok(res);
            }
            // levelled error vanished without reproducing f: swap the worst
            // point into the reference
            let worst = ext
                .iter()
                .max_by(|a, b| a.r.abs().partial_cmp(&b.r.abs()).unwrap())
                .unwrap()
                .x;
            let near = (0..m)
                .min_by(|&i, &j| {
                    (reference[i] - worst)
                        .abs()
                        .partial_cmp(&(reference[j] - worst).abs())
                        .unwrap()
                })
                .unwrap();
            reference[near] = worst;
            reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
            reference.dedup();
            last = Some(res);
            if reference.len() < m {
                break;
            }
            continue;
        }
        let next = trim(ext, m);
        let lo = next
            .iter()
            .map(|p| p.r.abs())
            .fold(f64::INFINITY, f64::min)
            .max(e.abs())
            .min(hi);
        let new_ref: Vec<f64> = next.iter().map(|p| p.x).collect();
        let res = RemezResult {
            poly,
            error_lo: lo,
            error_hi: hi,
            reference: new_ref.clone(),
            iterations: it,
            certified: hi - lo <= (certify_tol * hi).max(floor),
        };
        if res.certified {
            return Ok(res);
        }
        let stalled = new_ref == reference;
        last = Some(res);
        if stalled {
            break;
        }
        reference = new_ref;
    }
    Ok(last.expect("at least one iteration"))
}

/// `E_{n-1}(f)` on `interval`: the midpoint of a certified bracket for the
/// best approximation by polynomials of degree `n - 1`.
pub fn best_error(f: &(impl RealFunction + ?Sized), interval: Interval, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::out_of_range("n", 0.0, "n >= 1"));
    }
    let res = remez(f, interval, n - 1, DEFAULT_CERTIFY_TOL)?;
    if !res.certified {
        return Err(Error::NotCertified {
            lo: res.error_lo,
            hi: res.error_hi,
        });
    }
    Ok(res.error())
}

/// The degree `2k - 1` minimax fit used for the boundary pieces of an
/// extension.
pub fn whitney_fit(f: &(impl RealFunction + ?Sized), interval: Interval, k: u32) -> Result<RemezResult> {
    if k == 0 {
        return Err(Error::out_of_range("k", 0.0, "k >= 1"));
    }
    let res = remez(f, interval, 2 * k as usize - 1, DEFAULT_CERTIFY_TOL)?;
    if !res.certified {
        return Err(Error::NotCertified {
            lo: res.error_lo,
            hi: res.error_hi,
        });
    }
    Ok(res)
}

pub fn whitney_poly(f: &(impl RealFunction + ?Sized), interval: Interval, k: u32) -> Result<Polynomial> {
    whitney_fit(f, interval, k).map(|r| r.poly)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCheck {
    pub interval: Interval,
    pub k: u32,
    #[serde(rename = "E")]
    pub e: f64,
    pub omega: f64,
    pub ratio: f64,
    pub bound_wk: f64,
    pub pass: bool,
    pub degenerate: bool,
}

/// `E_{k-1}(f)` on `interval` against `w_k omega_k(f, (b - a)/k)`.
pub fn whitney_check(f: &(impl RealFunction + ?Sized), interval: Interval, k: u32) -> Result<WhitneyCheck> {
    whitney_check_with(f, interval, k, ModulusGrid::default())
}

/// Relative roundoff allowed in the Whitney comparison.
pub const WHITNEY_ROUNDOFF: f64 = 1e-12;

pub fn whitney_check_with(
    f: &(impl RealFunction + ?Sized),
    interval: Interval,
    k: u32,
    grid: ModulusGrid,
) -> Result<WhitneyCheck> {
    if k == 0 {
        return Err(Error::out_of_range("k", 0.0, "k >= 1"));
    }
    let fit = remez(f, interval, k as usize - 1, DEFAULT_CERTIFY_TOL)?;
    if !fit.certified {
        return Err(Error::NotCertified {
            lo: fit.error_lo,
            hi: fit.error_hi,
        });
    }
    let e = fit.error();
    let sub = Restricted::new(f, interval)?;
    let ModulusResult { value: omega, .. } = modulus(&sub, k, interval.len() / k as f64, grid)?;
    let bound_wk = constant_tables().w(k);
    let degenerate = omega < DEGENERATE_OMEGA;
    let ratio = if degenerate { 0.0 } else { e / omega };
    Ok(WhitneyCheck {
        interval,
        k,
        e,
        omega,
        ratio,
        bound_wk,
        // k = 1 is an identity (E_0 is half the oscillation), so only a
        // certified excess beyond roundoff counts as a violation
        pass: degenerate || fit.error_lo <= bound_wk * omega * (1.0 + WHITNEY_ROUNDOFF),
        degenerate,
    })
}
