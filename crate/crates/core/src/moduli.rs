//! Finite differences, moduli of smoothness and the special difference
//! `W_{2k}`.
//!
//! Suprema are taken over finite grids followed by one local refinement pass.
//! Every grid search also visits the points at which a difference node lands
//! exactly on a breakpoint of the function, so kinks and spikes are never
//! straddled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Interval, RealFunction};
use crate::error::{Error, Result};
use crate::kernel::{lambda_hat, SplineKernel};
use crate::numeric::{binomial_row, brent_max, simpson, GaussLegendre};

/// Default number of Simpson panels for `W_{2k}`.
pub const DEFAULT_QUAD_PANELS: usize = 256;

/// Grid resolution for [`modulus`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusGrid {
    pub nx: usize,
    pub nh: usize,
    pub refine: bool,
}

impl Default for ModulusGrid {
    fn default() -> Self {
        Self {
            nx: 2048,
            nh: 512,
            refine: true,
        }
    }
}

impl ModulusGrid {
    pub fn new(nx: usize, nh: usize) -> Self {
        Self {
            nx,
            nh,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusResult {
    pub value: f64,
    pub argmax_x: f64,
    pub argmax_h: f64,
    pub grid_nx: usize,
    pub grid_nh: usize,
    pub refined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridNorm {
    pub value: f64,
    pub grid_n: usize,
    pub interval: Interval,
}

/// Precomputed signed weights of the `k`-th central difference.
#[derive(Debug, Clone)]
pub struct CentralStencil {
    k: u32,
    weights: Vec<f64>,
    offsets: Vec<f64>,
}

impl CentralStencil {
    pub fn new(k: u32) -> Self {
        let row = binomial_row(k);
        let weights = row
            .iter()
            .enumerate()
            .map(|(j, c)| if (k as usize - j) % 2 == 0 { *c } else { -*c })
            .collect();
        let offsets = (0..=k).map(|j| j as f64 - k as f64 / 2.0).collect();
        Self { k, weights, offsets }
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    /// Relative node positions `j - k/2` in units of the step.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// `sum_j (-1)^{k-j} C(k,j) f(x + (j - k/2) h)`, nodes clamped into `dom`.
    #[inline]
    pub fn apply(&self, f: &(impl RealFunction + ?Sized), dom: Interval, h: f64, x: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.offsets)
            .map(|(w, o)| w * f.eval(dom.clamp(x + o * h)))
            .sum()
    }
}

fn check_nodes(dom: Interval, lo_node: f64, hi_node: f64) -> Result<()> {
    for node in [lo_node, hi_node] {
        if !dom.contains_approx(node) {
            return Err(Error::NodeOutsideDomain {
                node,
                lo: dom.lo,
                hi: dom.hi,
            });
        }
    }
    Ok(())
}

/// The `k`-th central difference of `f` with step `h` at `x`.
pub fn central_diff(f: &(impl RealFunction + ?Sized), k: u32, h: f64, x: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::out_of_range("k", 0.0, "k >= 1"));
    }
    let dom = f.domain();
    let half = k as f64 * h / 2.0;
    check_nodes(dom, x - half, x + half)?;
    Ok(CentralStencil::new(k).apply(f, dom, h, x))
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    x: f64,
    h: f64,
}

impl Candidate {
    const NONE: Candidate = Candidate {
        value: -1.0,
        x: f64::INFINITY,
        h: f64::INFINITY,
    };

    // Larger value wins; exact ties go to the smaller x, then the smaller h.
    fn better(self, other: Candidate) -> Candidate {
        use std::cmp::Ordering::*;
        match self.value.partial_cmp(&other.value).unwrap_or(Equal) {
            Greater => self,
            Less => other,
            Equal => {
                if (self.x, self.h) <= (other.x, other.h) {
                    self
                } else {
                    other
                }
            }
        }
    }
}

struct DiffScan<'a, F: RealFunction + ?Sized> {
    f: &'a F,
    dom: Interval,
    stencil: CentralStencil,
    breakpoints: Vec<f64>,
}

impl<'a, F: RealFunction + ?Sized> DiffScan<'a, F> {
    fn admissible(&self, h: f64) -> (f64, f64) {
        let half = self.stencil.order() as f64 * h / 2.0;
        let lo = self.dom.lo + half;
        let hi = (self.dom.hi - half).max(lo);
        (lo, hi)
    }

    fn at(&self, x: f64, h: f64) -> Candidate {
        Candidate {
            value: self.stencil.apply(self.f, self.dom, h, x).abs(),
            x,
            h,
        }
    }

    fn at_left(&self, u: f64, h: f64) -> Candidate {
        self.at(u + self.stencil.order() as f64 * h / 2.0, h)
    }

    fn line_max(&self, lo: f64, hi: f64, eval: impl Fn(f64) -> Candidate) -> Candidate {
        if !(hi > lo) {
            return Candidate::NONE;
        }
        let tol = 1e-14 * (1.0 + lo.abs().max(hi.abs()));
        let (t, _) = brent_max(|t| eval(t).value, lo, hi, tol);
        eval(lo).better(eval(hi)).better(eval(t))
    }

    /// Coordinate ascent from `best`, moving the step with the left or right
    /// node pinned, or sliding the stencil. Catches maxima at kinks and at
    /// the edge of the admissible set that the grids only approach.
    fn polish(&self, mut best: Candidate, delta: f64, dh: f64, dx: f64) -> Candidate {
        let k = self.stencil.order() as f64;
        let (lo, hi) = (self.dom.lo, self.dom.hi);
        for _ in 0..64 {
            let start = best;
            let h = best.h;
            let u = best.x - k * h / 2.0;
            let r = best.x + k * h / 2.0;
            let hmax = delta.min((hi - u) / k).min(h + dh);
            best = best.better(self.line_max((h - dh).max(dh * 1e-3), hmax, |t| self.at_left(u, t)));
            let hmax = delta.min((r - lo) / k).min(h + dh);
            best = best.better(self.line_max((h - dh).max(dh * 1e-3), hmax, |t| self.at_left(r - k * t, t)));
            let h = best.h;
            let u = best.x - k * h / 2.0;
            best = best.better(self.line_max((u - dx).max(lo), (u + dx).min(hi - k * h), |s| self.at_left(s, h)));
            if best.value <= start.value {
                break;
            }
        }
        best
    }

    fn row(&self, h: f64, nx: usize) -> Candidate {
        let (xl, xr) = self.admissible(h);
        let mut best = Candidate::NONE;
        for j in 0..=nx {
            let x = if j == nx {
                xr
            } else {
                xl + (xr - xl) * j as f64 / nx as f64
            };
            best = best.better(self.at(x, h));
        }
        for &b in &self.breakpoints {
            for o in self.stencil.offsets() {
                let x = b - o * h;
                if x >= xl && x <= xr {
                    best = best.better(self.at(x, h));
                }
            }
        }
        best
    }
}

/// `omega_k(f, delta)`: supremum of `|central_diff(f, k, h, x)|` over
/// `0 < h <= delta` and admissible `x`.
pub fn modulus(
    f: &(impl RealFunction + ?Sized),
    k: u32,
    delta: f64,
    grid: ModulusGrid,
) -> Result<ModulusResult> {
    if k == 0 {
        return Err(Error::out_of_range("k", 0.0, "k >= 1"));
    }
    let dom = f.domain();
    let max_delta = dom.len() / k as f64;
    if !(delta > 0.0 && delta <= max_delta * (1.0 + 1e-12)) {
        return Err(Error::out_of_range(
            "delta",
            delta,
            format!("0 < delta <= (hi - lo)/k = {max_delta}"),
        ));
    }
    if grid.nx < 64 || grid.nh < 64 {
        return Err(Error::out_of_range(
            "grid",
            grid.nx.min(grid.nh) as f64,
            "nx, nh >= 64",
        ));
    }
    let delta = delta.min(max_delta);
    let scan = DiffScan {
        f,
        dom,
        stencil: CentralStencil::new(k),
        breakpoints: f.breakpoints(),
    };
    let dh = delta / grid.nh as f64;
    let mut best = (1..=grid.nh)
        .into_par_iter()
        .map(|i| {
            let h = if i == grid.nh { delta } else { dh * i as f64 };
            scan.row(h, grid.nx)
        })
        .reduce(|| Candidate::NONE, Candidate::better);

    if grid.refine {
        const FINE: usize = 16;
        let h0 = best.h;
        let (xl0, xr0) = scan.admissible(h0);
        let dx = (xr0 - xl0) / grid.nx as f64;
        let refined = (0..=2 * FINE)
            .into_par_iter()
            .map(|i| {
                let h = h0 + dh * (i as f64 - FINE as f64) / FINE as f64;
                if !(h > 0.0 && h <= delta) {
                    return Candidate::NONE;
                }
                let (xl, xr) = scan.admissible(h);
                let mut row = Candidate::NONE;
                for j in 0..=2 * FINE {
                    let x = best.x + dx * (j as f64 - FINE as f64) / FINE as f64;
                    if x >= xl && x <= xr {
                        row = row.better(scan.at(x, h));
                    }
                }
                row
            })
            .reduce(|| Candidate::NONE, Candidate::better);
        best = best.better(refined);
        best = scan.polish(best, delta, dh, dx);
    }

    Ok(ModulusResult {
        value: best.value.max(0.0),
        argmax_x: best.x,
        argmax_h: best.h,
        grid_nx: grid.nx,
        grid_nh: grid.nh,
        refined: grid.refine,
    })
}

/// `max |f|` over `n + 1` equispaced points of `interval` (plus `extra`
/// points inside it), then one local refinement around the grid maximizer.
/// `n` is raised to at least 256.
pub fn grid_sup_with(
    f: impl Fn(f64) -> f64,
    interval: Interval,
    n: usize,
    extra: &[f64],
) -> GridNorm {
    let n = n.max(256);
    let pts = interval.linspace(n);
    let mut best = (0.0f64, interval.lo, usize::MAX);
    for (i, &x) in pts.iter().enumerate() {
        let v = f(x).abs();
        if v > best.0 {
            best = (v, x, i);
        }
    }
    for &x in extra.iter().filter(|x| interval.contains(**x)) {
        let v = f(x).abs();
        if v > best.0 {
            best = (v, x, usize::MAX);
        }
    }
    let (mut value, x0, idx) = best;
    let step = interval.len() / n as f64;
    let (a, b) = if idx == usize::MAX {
        (x0 - step, x0 + step)
    } else {
        (pts[idx.saturating_sub(1)], pts[(idx + 1).min(n)])
    };
    let (a, b) = (interval.clamp(a), interval.clamp(b));
    if b > a {
        let (_, v) = brent_max(|x| f(x).abs(), a, b, 1e-13 * (1.0 + x0.abs()));
        value = value.max(v);
    }
    GridNorm {
        value,
        grid_n: n,
        interval,
    }
}

/// [`grid_sup_with`] without extra points.
pub fn grid_sup(f: impl Fn(f64) -> f64, interval: Interval, n: usize) -> GridNorm {
    grid_sup_with(f, interval, n, &[])
}

/// `W_{2k}(f, x, chi_h^2) = (-1)^k C(2k,k)^{-1} int Delta_t^{2k} f(x) chi_h^2(t) dt`
/// by composite Simpson on `t in [0, h]` (the integrand is even in `t`).
///
/// The `t`-range is split wherever a node crosses a breakpoint of `f`, and
/// `quad_n` panels are spread over the pieces in proportion to their length.
pub fn w2k_diff(
    f: &(impl RealFunction + ?Sized),
    k: u32,
    h: f64,
    x: f64,
    quad_n: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::out_of_range("k", 0.0, "k >= 1"));
    }
    if h <= 0.0 {
        return Err(Error::out_of_range("h", h, "h > 0"));
    }
    let dom = f.domain();
    let reach = k as f64 * h;
    check_nodes(dom, x - reach, x + reach)?;
    let stencil = CentralStencil::new(2 * k);
    let central = binomial_row(2 * k)[k as usize];
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };

    let mut cuts = vec![0.0, h];
    for b in f.breakpoints() {
        for o in stencil.offsets() {
            if *o != 0.0 {
                let t = (b - x) / o;
                if t > 0.0 && t < h {
                    cuts.push(t);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * h);

    let integrand = |t: f64| stencil.apply(f, dom, t, x) * (1.0 - t / h) / h;
    let panels = quad_n.max(2);
    let integral: f64 = cuts
        .windows(2)
        .map(|w| {
            let share = ((w[1] - w[0]) / h * panels as f64).ceil() as usize;
            simpson(integrand, w[0], w[1], share.max(2))
        })
        .sum();
    Ok(sign * 2.0 * integral / central)
}

/// `(f - Lambda_{2k} * f)(x)` with the convolution done by quadrature over
/// each hat of the kernel.
pub fn w2k_via_kernel(f: &(impl RealFunction + ?Sized), k: u32, h: f64, x: f64) -> Result<f64> {
    let lam = lambda_hat(k)?;
    w2k_via_kernel_with(&lam, f, h, x)
}

/// As [`w2k_via_kernel`] with a precomputed kernel.
pub fn w2k_via_kernel_with(
    lambda: &SplineKernel,
    f: &(impl RealFunction + ?Sized),
    h: f64,
    x: f64,
) -> Result<f64> {
    if h <= 0.0 {
        return Err(Error::out_of_range("h", h, "h > 0"));
    }
    let dom = f.domain();
    let (lo, hi) = lambda.support();
    use num_traits::ToPrimitive;
    let (lo, hi) = (lo.to_f64().unwrap() * h, hi.to_f64().unwrap() * h);
    check_nodes(dom, x - hi, x - lo)?;
    Ok(f.eval(x) - convolve_at(lambda, f, h, x))
}

/// `int f(x - t) K(t) dt` for a spline kernel, split at kernel knots and at
/// the points where `x - t` crosses a breakpoint of `f`.
pub fn convolve_at(
    kernel: &SplineKernel,
    f: &(impl RealFunction + ?Sized),
    h: f64,
    x: f64,
) -> f64 {
    let dom = f.domain();
    let gl = GaussLegendre::new(16);
    let mut cuts: Vec<f64> = kernel.knots().iter().map(|u| u * h).collect();
    let (t_lo, t_hi) = (cuts[0], cuts[cuts.len() - 1]);
    for b in f.breakpoints() {
        let t = x - b;
        if t > t_lo && t < t_hi {
            cuts.push(t);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * h);
    cuts.windows(2)
        .map(|w| {
            // two Gauss panels per piece
            let m = 0.5 * (w[0] + w[1]);
            let g = |t: f64| f.eval(dom.clamp(x - t)) * kernel.eval(h, t);
            gl.integrate(g, w[0], m) + gl.integrate(g, m, w[1])
        })
        .sum()
}
