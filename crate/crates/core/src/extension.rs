//! Continuation of a function on `[-1, 1]` by its boundary minimax
//! polynomials, and the measured constants of that continuation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::best_approx::{whitney_fit, Polynomial};
use crate::bounds::constant_tables;
use crate::corpus::{Interval, RealFunction, TestFunction};
use crate::error::{Error, Result};
use crate::moduli::{central_diff, grid_sup_with, modulus, w2k_diff, ModulusGrid, DEFAULT_QUAD_PANELS};

/// `g_f`: `f` on `[-1, 1]`, and the degree `2k - 1` best approximations of
/// `f` on `[-1, -1 + 2kh]` and `[1 - 2kh, 1]` outside.
#[derive(Debug, Clone)]
pub struct ExtendedFunction {
    core: TestFunction,
    pub p_minus: Polynomial,
    pub p_plus: Polynomial,
    /// `|f(-1) - p_minus(-1)|` and `|f(1) - p_plus(1)|`.
    pub jump_minus: f64,
    pub jump_plus: f64,
    pub k: u32,
    pub h: f64,
}

impl ExtendedFunction {
    /// Requires `0 < h < 1/(2k)`.
    pub fn new(f: &TestFunction, k: u32, h: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::out_of_range("k", 0.0, "k >= 1"));
        }
        let top = 1.0 / (2 * k) as f64;
        if !(h > 0.0 && h < top) {
            return Err(Error::out_of_range("h", h, format!("0 < h < 1/(2k) = {top}")));
        }
        Self::build(f, k, h)
    }

    /// As [`ExtendedFunction::new`] but allows `1/(2k) <= h <= 1/k`, where the
    /// two fitting intervals overlap.
    pub fn with_overlap(f: &TestFunction, k: u32, h: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::out_of_range("k", 0.0, "k >= 1"));
        }
        let top = 1.0 / k as f64;
        if !(h > 0.0 && h <= top) {
            return Err(Error::out_of_range("h", h, format!("0 < h <= 1/k = {top}")));
        }
        Self::build(f, k, h)
    }

    fn build(f: &TestFunction, k: u32, h: f64) -> Result<Self> {
        let unit = Interval::unit();
        let core = f.restrict(unit)?;
        let reach = (2 * k) as f64 * h;
        let minus = Interval::new(-1.0, -1.0 + reach)?;
        let plus = Interval::new(1.0 - reach, 1.0)?;
        let fit_minus = whitney_fit(&core, minus, k)?;
        let fit_plus = whitney_fit(&core, plus, k)?;
        Ok(Self {
            jump_minus: (core.eval(-1.0) - fit_minus.poly.eval(-1.0)).abs(),
            jump_plus: (core.eval(1.0) - fit_plus.poly.eval(1.0)).abs(),
            p_minus: fit_minus.poly,
            p_plus: fit_plus.poly,
            core,
            k,
            h,
        })
    }

    pub fn core(&self) -> &TestFunction {
        &self.core
    }

    /// `Delta_h^{2k} g_f(x)` in exact rational arithmetic when every node lies
    /// strictly beyond `-1` or `+1` (so only one boundary polynomial is
    /// involved); `None` otherwise.
    pub fn outer_difference_exact(&self, x: f64) -> Option<BigRational> {
        let k = self.k as i64;
        let q = |v: f64| BigRational::from_float(v).expect("finite");
        let (xq, hq) = (q(x), q(self.h));
        let nodes: Vec<BigRational> = (0..=2 * k)
            .map(|j| &xq + &hq * BigRational::from_integer((j - k).into()))
            .collect();
        let one = BigRational::one();
        let piece = if nodes.iter().all(|t| *t > one) {
            &self.p_plus
        } else if nodes.iter().all(|t| *t < -one.clone()) {
            &self.p_minus
        } else {
            return None;
        };
        let mut acc = BigRational::zero();
        let mut c = BigInt::one();
        for (j, t) in nodes.iter().enumerate() {
            let term = BigRational::from_integer(c.clone()) * piece.eval_exact(t);
            if (2 * k - j as i64) % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
            c = c * BigInt::from(2 * k - j as i64) / BigInt::from(j as i64 + 1);
        }
        Some(acc)
    }

    /// Half-width of the region on which every measured quantity can be
    /// nonzero, `1 + 2kh`.
    pub fn support_radius(&self) -> f64 {
        1.0 + (2 * self.k) as f64 * self.h
    }
}

impl RealFunction for ExtendedFunction {
    fn eval(&self, x: f64) -> f64 {
        if x < -1.0 {
            self.p_minus.eval(x)
        } else if x > 1.0 {
            self.p_plus.eval(x)
        } else {
            self.core.eval(x)
        }
    }

    fn domain(&self) -> Interval {
        let r = 1.0 + (3 * self.k + 6) as f64 * self.h;
        Interval { lo: -r, hi: r }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![-1.0];
        b.extend(self.core.breakpoints().into_iter().filter(|x| *x > -1.0 && *x < 1.0));
        b.push(1.0);
        b
    }
}

/// `g_f` for `0 < h < 1/(2k)`.
pub fn extend(f: &TestFunction, k: u32, h: f64) -> Result<ExtendedFunction> {
    ExtendedFunction::new(f, k, h)
}

/// Sampling parameters for [`extension_report_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionGrid {
    pub modulus: ModulusGrid,
    /// Grid intervals for the sup norms over `[-1 - 2kh, 1 + 2kh]`.
    pub sup_n: usize,
    pub quad_panels: usize,
}

impl Default for ExtensionGrid {
    fn default() -> Self {
        Self {
            modulus: ModulusGrid::default(),
            sup_n: 2048,
            quad_panels: DEFAULT_QUAD_PANELS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub function_id: String,
    pub k: u32,
    pub h: f64,
    pub omega: f64,
    pub w_norm: f64,
    pub d_norm: f64,
    #[serde(rename = "W_ratio")]
    pub w_ratio: f64,
    #[serde(rename = "D_ratio")]
    pub d_ratio: f64,
    pub d_k_bound: f64,
    pub d_k_star_bound: f64,
    pub w_pass: bool,
    pub d_pass: bool,
    pub degenerate: bool,
}

/// Norms of the extension's `W_{2k}` and `2k`-th difference, each divided by
/// `omega_{2k}(f, h)`, against the `d_k` and `d_k^*` tables.
pub fn extension_report(f: &TestFunction, k: u32, h: f64) -> Result<ExtensionReport> {
    extension_report_with(f, k, h, ExtensionGrid::default())
}

pub fn extension_report_with(f: &TestFunction, k: u32, h: f64, grid: ExtensionGrid) -> Result<ExtensionReport> {
    let g = extend(f, k, h)?;
    report_for(&g, grid)
}

/// [`extension_report_with`] for an already built extension.
pub fn report_for(g: &ExtendedFunction, grid: ExtensionGrid) -> Result<ExtensionReport> {
    let (k, h) = (g.k, g.h);
    let omega = modulus(g.core(), 2 * k, h, grid.modulus)?.value;
    let (w_norm, d_norm) = extension_norms(g, grid)?;
    let tables = constant_tables();
    let (d_k_bound, d_k_star_bound) = (tables.d(k), tables.d_star(k));
    let degenerate = omega < crate::best_approx::DEGENERATE_OMEGA;
    let (w_ratio, d_ratio) = if degenerate {
        (0.0, 0.0)
    } else {
        (w_norm / omega, d_norm / omega)
    };
    Ok(ExtensionReport {
        function_id: g.core().id().to_string(),
        k,
        h,
        omega,
        w_norm,
        d_norm,
        w_ratio,
        d_ratio,
        d_k_bound,
        d_k_star_bound,
        w_pass: w_ratio <= d_k_bound,
        d_pass: d_ratio <= d_k_star_bound,
        degenerate,
    })
}

/// `(||W_{2k}(g_f, ., chi_h^2)||, ||Delta_h^{2k} g_f||)` as grid sups over
/// `[-1 - 2kh, 1 + 2kh]`.
pub fn extension_norms(g: &ExtendedFunction, grid: ExtensionGrid) -> Result<(f64, f64)> {
    let (k, h) = (g.k, g.h);
    let r = g.support_radius();
    let span = Interval::new(-r, r)?;
    let kf = k as f64;
    // points where a difference node sits on a breakpoint
    let mut aligned = Vec::new();
    for b in g.breakpoints() {
        for j in 0..=2 * k {
            aligned.push(b + (j as f64 - kf) * h);
        }
    }
    let w = grid_sup_with(
        |x| w2k_diff(g, k, h, x, grid.quad_panels).unwrap_or(f64::NAN),
        span,
        grid.sup_n,
        &aligned,
    );
    let d = grid_sup_with(
        |x| central_diff(g, 2 * k, h, x).unwrap_or(f64::NAN),
        span,
        grid.sup_n,
        &aligned,
    );
    if !(w.value.is_finite() && d.value.is_finite()) {
        return Err(Error::out_of_range("h", h, "difference nodes left the extension's domain"));
    }
    Ok((w.value, d.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::builtin_corpus;

    fn corpus_fn(id: &str) -> TestFunction {
        builtin_corpus().get(id).unwrap().clone()
    }

    #[test]
    fn rejects_large_steps() {
        let f = corpus_fn("runge");
        assert!(extend(&f, 2, 0.25).is_err());
        assert!(extend(&f, 2, 0.0).is_err());
        assert!(ExtendedFunction::with_overlap(&f, 2, 0.4).is_ok());
        assert!(ExtendedFunction::with_overlap(&f, 2, 0.51).is_err());
    }

    #[test]
    fn polynomials_extend_to_themselves() {
        let f = corpus_fn("x3");
        for k in 2..=3 {
            let g = extend(&f, k, 0.05).unwrap();
            assert!(g.jump_minus < 1e-12 && g.jump_plus < 1e-12);
            for x in [-1.6, -1.1, 0.3, 1.05, 1.5] {
                assert!((g.eval(x) - x.powi(3)).abs() < 1e-11, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn abs_right_piece_is_identity() {
        let g = extend(&corpus_fn("abs"), 2, 0.1).unwrap();
        assert!(g.jump_plus < 1e-12);
        for x in [0.6, 1.0, 1.3] {
            assert!((g.p_plus.eval(x) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn routing() {
        let g = extend(&corpus_fn("runge"), 1, 0.2).unwrap();
        assert_eq!(g.eval(1.05), g.p_plus.eval(1.05));
        assert_eq!(g.eval(-1.05), g.p_minus.eval(-1.05));
        for i in 0..=1000 {
            let x = -1.0 + 2.0 * i as f64 / 1000.0;
            assert_eq!(g.eval(x), g.core().eval(x));
        }
    }

    #[test]
    fn difference_vanishes_beyond_reach() {
        for id in ["runge", "sin16", "abs_pow_1.5"] {
            let f = corpus_fn(id);
            for k in 1..=4 {
                let h = 0.1;
                let g = extend(&f, k, h).unwrap();
                let stencil = crate::moduli::CentralStencil::new(2 * k);
                for m in 1..=5 {
                    let x = 1.0 + (k + m) as f64 * h;
                    for s in [-1.0, 1.0] {
                        let exact = g.outer_difference_exact(s * x).unwrap();
                        assert!(exact.is_zero(), "{id} k={k} x={}", s * x);
                        // rounding floor: the operands grow with the
                        // extrapolation distance
                        let d = central_diff(&g, 2 * k, h, s * x).unwrap();
                        let mag: f64 = stencil
                            .offsets()
                            .iter()
                            .map(|o| g.eval(s * x + o * h).abs())
                            .sum::<f64>()
                            * 2f64.powi(2 * k as i32);
                        assert!(d.abs() <= 1e-10 * mag.max(1.0), "{id} k={k} x={}: {d}", s * x);
                    }
                }
                assert!(g.outer_difference_exact(1.0).is_none());
            }
        }
    }

    #[test]
    fn boundary_polynomial_is_annihilated() {
        let f = corpus_fn("sin4");
        for k in 1..=3 {
            let h = 0.05;
            let g = extend(&f, k, h).unwrap();
            let p = g.p_plus.clone();
            let shifted = TestFunction::new("g-p", g.domain(), {
                let g = g.clone();
                move |x| g.eval(x) - p.eval(x)
            })
            .with_breakpoints(g.breakpoints());
            for i in 0..10 {
                let x = 1.0 - k as f64 * h + (i as f64 + 0.5) * k as f64 * h / 10.0;
                let a = w2k_diff(&g, k, h, x, 512).unwrap();
                let b = w2k_diff(&shifted, k, h, x, 512).unwrap();
                assert!((a - b).abs() < 1e-9, "k={k} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn report_examples() {
        let grid = ExtensionGrid {
            modulus: ModulusGrid::new(1024, 256),
            sup_n: 1024,
            quad_panels: DEFAULT_QUAD_PANELS,
        };
        let r = extension_report_with(&corpus_fn("x2"), 1, 0.2, grid).unwrap();
        assert!(r.w_ratio <= 1.0 && r.w_pass, "{r:?}");
        let r = extension_report_with(&corpus_fn("abs_pow_1.5"), 2, 0.1, grid).unwrap();
        assert!(r.w_ratio <= 2.18 && r.w_pass, "{r:?}");
        let r = extension_report_with(&corpus_fn("runge"), 1, 0.2, grid).unwrap();
        assert!(r.d_ratio <= 1.5 && r.d_pass, "{r:?}");
        let r = extension_report_with(&corpus_fn("x1"), 2, 0.1, grid).unwrap();
        assert!(r.degenerate);
    }
}
