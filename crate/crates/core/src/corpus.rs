//! Evaluable test functions and the default corpus.
//!
//! Every function carries its domain, an optional smoothness hint and the
//! list of points where it is not smooth. The breakpoints are used by the
//! grid searches in [`crate::moduli`] and [`crate::best_approx`] so that
//! kinks and spikes are sampled exactly instead of being straddled.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed, bounded interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    /// The reference interval `[-1, 1]`.
    pub const fn unit() -> Self {
        Self { lo: -1.0, hi: 1.0 }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Containment up to a relative slack of a few ulps of the interval scale.
    pub fn contains_approx(&self, x: f64) -> bool {
        let slack = 1e-12 * (1.0 + self.lo.abs().max(self.hi.abs()));
        x >= self.lo - slack && x <= self.hi + slack
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// `n + 1` equispaced points from `lo` to `hi` inclusive.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        let n = n.max(1);
        (0..=n)
            .map(|i| {
                if i == n {
                    self.hi
                } else {
                    self.lo + self.len() * i as f64 / n as f64
                }
            })
            .collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A real function that can be sampled on a bounded domain.
pub trait RealFunction: Send + Sync {
    fn eval(&self, x: f64) -> f64;

    fn domain(&self) -> Interval;

    /// Points where the function (or one of its derivatives) jumps.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: RealFunction + ?Sized> RealFunction for &F {
    fn eval(&self, x: f64) -> f64 {
        (**self).eval(x)
    }
    fn domain(&self) -> Interval {
        (**self).domain()
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}

impl<F: RealFunction + ?Sized> RealFunction for Arc<F> {
    fn eval(&self, x: f64) -> f64 {
        (**self).eval(x)
    }
    fn domain(&self) -> Interval {
        (**self).domain()
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A named corpus element.
#[derive(Clone)]
pub struct TestFunction {
    id: String,
    domain: Interval,
    evaluator: Evaluator,
    /// For polynomials, the degree: every modulus of higher order vanishes.
    /// `None` when every order is worth probing.
    smoothness_hint: Option<u32>,
    breakpoints: Vec<f64>,
    continuous: bool,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .field("smoothness_hint", &self.smoothness_hint)
            .field("breakpoints", &self.breakpoints)
            .field("continuous", &self.continuous)
            .finish()
    }
}

impl TestFunction {
    pub fn new(
        id: impl Into<String>,
        domain: Interval,
        evaluator: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            domain,
            evaluator: Arc::new(evaluator),
            smoothness_hint: None,
            breakpoints: Vec::new(),
            continuous: true,
        }
    }

    pub fn with_smoothness_hint(mut self, hint: u32) -> Self {
        self.smoothness_hint = Some(hint);
        self
    }

    pub fn with_breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints = points
            .into_iter()
            .filter(|p| self.domain.contains(*p))
            .collect();
        self
    }

    pub fn discontinuous(mut self) -> Self {
        self.continuous = false;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn smoothness_hint(&self) -> Option<u32> {
        self.smoothness_hint
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    /// The same function viewed on a subinterval of its domain.
    pub fn restrict(&self, to: Interval) -> Result<TestFunction> {
        if !(self.domain.contains(to.lo) && self.domain.contains(to.hi)) {
            return Err(Error::out_of_range(
                "subinterval",
                to.lo,
                format!("{to} must lie inside {}", self.domain),
            ));
        }
        let mut out = self.clone();
        out.domain = to;
        out.breakpoints.retain(|p| to.contains(*p));
        Ok(out)
    }
}

impl RealFunction for TestFunction {
    fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
}

/// Any [`RealFunction`] viewed on a subinterval of its domain.
#[derive(Debug, Clone)]
pub struct Restricted<F> {
    inner: F,
    domain: Interval,
}

impl<F: RealFunction> Restricted<F> {
    pub fn new(inner: F, to: Interval) -> Result<Self> {
        let dom = inner.domain();
        if !(dom.contains_approx(to.lo) && dom.contains_approx(to.hi)) {
            return Err(Error::out_of_range(
                "subinterval",
                to.lo,
                format!("{to} must lie inside {dom}"),
            ));
        }
        Ok(Self { inner, domain: to })
    }
}

impl<F: RealFunction> RealFunction for Restricted<F> {
    fn eval(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.inner.breakpoints();
        b.retain(|p| self.domain.contains(*p));
        b
    }
}

/// A non-empty list of test functions with distinct ids.
#[derive(Debug, Clone)]
pub struct Corpus {
    entries: Vec<TestFunction>,
}

impl Corpus {
    pub fn new(entries: Vec<TestFunction>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.id.clone()) {
                return Err(Error::DuplicateFunction(e.id.clone()));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[TestFunction] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Result<&TestFunction> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownFunction(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.id.as_str())
    }

    /// Sub-corpus with the given ids, in the order given.
    pub fn select<S: AsRef<str>>(&self, ids: &[S]) -> Result<Corpus> {
        let picked = ids
            .iter()
            .map(|id| self.get(id.as_ref()).cloned())
            .collect::<Result<Vec<_>>>()?;
        Corpus::new(picked)
    }
}

fn truncated_power(a: f64, m: i32) -> TestFunction {
    TestFunction::new(format!("trunc_pow_a{a}_m{m}"), Interval::unit(), move |x| {
        (x - a).max(0.0).powi(m)
    })
    .with_breakpoints([a])
}

fn monomial(j: u32) -> TestFunction {
    TestFunction::new(format!("x{j}"), Interval::unit(), move |x| x.powi(j as i32))
        .with_smoothness_hint(j)
}

fn sine(freq: f64) -> TestFunction {
    TestFunction::new(format!("sin{freq}"), Interval::unit(), move |x| (freq * x).sin())
}

/// The default corpus on `[-1, 1]`.
///
/// Ids: `abs`, `abs_pow_1.5`, `runge`, `sin4`, `sin16`, `trunc_pow_a0_m1`,
/// `trunc_pow_a0.3_m2`, `x0` ... `x6`.
pub fn builtin_corpus() -> Corpus {
    let mut entries = vec![
        TestFunction::new("abs", Interval::unit(), f64::abs).with_breakpoints([0.0]),
        TestFunction::new("abs_pow_1.5", Interval::unit(), |x: f64| x.abs().powf(1.5))
            .with_breakpoints([0.0]),
        TestFunction::new("runge", Interval::unit(), |x: f64| 1.0 / (1.0 + 25.0 * x * x)),
        sine(4.0),
        sine(16.0),
        truncated_power(0.0, 1),
        truncated_power(0.3, 2),
    ];
    entries.extend((0..=6).map(monomial));
    Corpus::new(entries).expect("builtin ids are distinct")
}

/// The regularized spike: a degree `k - 1` polynomial piece of height 1 at
/// `x = -1` that vanishes from `-1 + eps` on.
pub fn f_eps(k: u32, eps: f64) -> Result<TestFunction> {
    if k < 2 {
        return Err(Error::out_of_range("k", k as f64, "k >= 2"));
    }
    if !(eps > 0.0 && eps < 1.0 / k as f64) {
        return Err(Error::out_of_range("eps", eps, format!("0 < eps < 1/{k}")));
    }
    let p = (k - 1) as i32;
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    let scale = sign / eps.powi(p);
    let cut = -1.0 + eps;
    Ok(TestFunction::new(format!("f_eps_k{k}_e{eps:e}"), Interval::unit(), move |x| {
        if x <= cut {
            scale * (1.0 + x - eps).powi(p)
        } else {
            0.0
        }
    })
    .with_breakpoints([-1.0, cut]))
}

/// The indicator of `{-1}`. Discontinuous; kept for documentation only.
pub fn spike_f0() -> TestFunction {
    TestFunction::new("spike_f0", Interval::unit(), |x| if x == -1.0 { 1.0 } else { 0.0 })
        .with_breakpoints([-1.0])
        .discontinuous()
}
