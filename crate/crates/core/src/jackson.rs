//! Empirical Jackson ratios `E_{n-1}(f) / omega_{2k}(f, alpha pi / n)`
//! against the closed-form bounds, the spike experiment that bounds the
//! constant from below, and the term-by-term Neumann majorant.

use std::f64::consts::PI;
use std::time::{SystemTime, UNIX_EPOCH};

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::best_approx::{best_error, DEFAULT_CERTIFY_TOL, DEGENERATE_OMEGA};
use crate::bounds::{jackson_bound, n_threshold, FavardTable, PRINTED_SLACK};
use crate::corpus::{builtin_corpus, f_eps, Interval, RealFunction, TestFunction};
use crate::error::{Error, Result};
use crate::extension::{extension_norms, ExtendedFunction, ExtensionGrid};
use crate::kernel::gamma;
use crate::moduli::{modulus, ModulusGrid};

/// One Jackson ratio. Field names are the CSV/JSON column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacksonRecord {
    pub function_id: String,
    pub k: u32,
    pub n: u32,
    pub alpha: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub omega: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
    pub degenerate: bool,
}

fn check_threshold(k: u32, n: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::out_of_range("k", 0.0, "k >= 1"));
    }
    let min = n_threshold(k);
    if n < min {
        let rule = if k <= 4 {
            format!("n >= {min} for k = {k}")
        } else {
            format!("n >= 2k(2k-1) = {min}")
        };
        return Err(Error::out_of_range("n", n as f64, rule));
    }
    Ok(())
}

/// `omega_{2k}(f, delta)` with `delta` capped at `|I|/(2k)`, beyond which
/// no step has an admissible centre.
fn omega_2k(f: &(impl RealFunction + ?Sized), k: u32, delta: f64, grid: ModulusGrid) -> Result<f64> {
    let cap = f.domain().len() / (2 * k) as f64;
    Ok(modulus(f, 2 * k, delta.min(cap), grid)?.value)
}

fn record(id: &str, k: u32, n: u32, alpha: f64, e: f64, omega: f64) -> Result<JacksonRecord> {
    let bound = jackson_bound(k, alpha)?;
    let degenerate = omega < DEGENERATE_OMEGA;
    let ratio = if degenerate { 0.0 } else { e / omega };
    Ok(JacksonRecord {
        function_id: id.to_string(),
        k,
        n,
        alpha,
        e,
        omega,
        ratio,
        bound,
        pass: ratio <= bound + PRINTED_SLACK,
        degenerate,
    })
}

/// `E_{n-1}(f)` on `[-1, 1]` over `omega_{2k}(f, alpha pi / n)`.
pub fn jackson_ratio(f: &TestFunction, k: u32, n: u32, alpha: f64) -> Result<JacksonRecord> {
    jackson_ratio_with(f, k, n, alpha, ModulusGrid::default())
}

pub fn jackson_ratio_with(
    f: &TestFunction,
    k: u32,
    n: u32,
    alpha: f64,
    grid: ModulusGrid,
) -> Result<JacksonRecord> {
    check_threshold(k, n)?;
    if !(alpha > 0.0) {
        return Err(Error::out_of_range("alpha", alpha, "alpha > 0"));
    }
    // fail on an out-of-window alpha before the expensive parts
    jackson_bound(k, alpha)?;
    let e = best_error(f, Interval::unit(), n as usize)?;
    let omega = omega_2k(f, k, alpha * PI / n as f64, grid)?;
    record(f.id(), k, n, alpha, e, omega)
}

/// Jackson ratios of the spikes `f_eps` of order `2k`, for which the
/// constant cannot be below `1/2` as `eps -> 0`.
pub fn lower_bound_experiment(k: u32, n: u32, eps_list: &[f64], alpha: f64) -> Result<Vec<JacksonRecord>> {
    lower_bound_experiment_with(k, n, eps_list, alpha, ModulusGrid::default())
}

pub fn lower_bound_experiment_with(
    k: u32,
    n: u32,
    eps_list: &[f64],
    alpha: f64,
    grid: ModulusGrid,
) -> Result<Vec<JacksonRecord>> {
    check_threshold(k, n)?;
    let top = 1.0 / (2 * k) as f64;
    if let Some(&bad) = eps_list.iter().find(|e| !(**e > 0.0 && **e < top)) {
        return Err(Error::out_of_range("eps", bad, format!("0 < eps < 1/(2k) = {top}")));
    }
    jackson_bound(k, alpha)?;
    eps_list
        .par_iter()
        .map(|&eps| {
            let f = f_eps(2 * k, eps)?;
            let e = best_error(&f, Interval::unit(), n as usize)?;
            let delta = alpha * PI / n as f64;
            let coarse = omega_2k(&f, k, delta, grid)?;
            // steps comparable to eps need their own h-grid
            let fine = omega_2k(&f, k, delta.min(4.0 * eps), grid)?;
            record(f.id(), k, n, alpha, e, coarse.max(fine))
        })
        .collect()
}

/// Term-by-term Neumann majorant of `E_{n-1}(f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannDiagnostic {
    pub function_id: String,
    pub k: u32,
    pub n: u32,
    pub h: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// `||W_{2k}(g_f, ., chi_h^2)||`.
    pub w_norm: f64,
    /// `||Delta_h^{2k} g_f||`.
    pub d_norm: f64,
    /// Terms `j = 0 .. k - 1` on `w_norm`, then the last term on `d_norm`.
    pub terms: Vec<f64>,
    pub majorant: f64,
    pub pass: bool,
}

/// Measured `E_{n-1}(f)` against
/// `sum_j c_j K_{2j} n^{-2j} (4 gamma_k)^j h^{-2j} ||W||
///  + 2 K_{2k} n^{-2k} gamma_k^k h^{-2k} ||Delta_h^{2k} g_f||`
/// with `c_0 = c_1 = 1` and `c_j = 2` for `2 <= j < k`.
///
/// Any continuation of `f` gives a valid majorant, so `h` may go up to
/// `1/k`; from `1/(2k)` on the two boundary fits overlap.
pub fn neumann_diagnostic(f: &TestFunction, k: u32, n: u32, h: f64) -> Result<NeumannDiagnostic> {
    neumann_diagnostic_with(f, k, n, h, ExtensionGrid::default())
}

pub fn neumann_diagnostic_with(
    f: &TestFunction,
    k: u32,
    n: u32,
    h: f64,
    grid: ExtensionGrid,
) -> Result<NeumannDiagnostic> {
    if k < 2 {
        return Err(Error::out_of_range("k", k as f64, "k >= 2"));
    }
    let min_n = 2 * k * (2 * k - 1);
    if n < min_n {
        return Err(Error::out_of_range("n", n as f64, format!("n >= 2k(2k-1) = {min_n}")));
    }
    let g = ExtendedFunction::with_overlap(f, k, h)?;
    let (w_norm, d_norm) = extension_norms(&g, grid)?;
    let e = best_error(f, Interval::unit(), n as usize)?;

    let gam = gamma(k)?.to_f64().unwrap();
    let fav = FavardTable::even(k);
    let nf = n as f64;
    let mut terms = Vec::with_capacity(k as usize + 1);
    for j in 0..k {
        let c = if j < 2 { 1.0 } else { 2.0 };
        let jj = j as i32;
        terms.push(c * fav.get(2 * j) * nf.powi(-2 * jj) * (4.0 * gam).powi(jj) * h.powi(-2 * jj) * w_norm);
    }
    let kk = k as i32;
    terms.push(2.0 * fav.get(2 * k) * nf.powi(-2 * kk) * gam.powi(kk) * h.powi(-2 * kk) * d_norm);
    let majorant = terms.iter().sum();
    Ok(NeumannDiagnostic {
        function_id: f.id().to_string(),
        k,
        n,
        h,
        e,
        w_norm,
        d_norm,
        terms,
        majorant,
        pass: e <= majorant,
    })
}

/// Parameters of a Jackson suite run. Missing fields take their defaults
/// when read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Corpus ids; the builtin corpus when empty in the default config.
    pub functions: Vec<String>,
    pub ks: Vec<u32>,
    /// `n` values; those below the threshold for a given `k` are skipped.
    pub ns: Vec<u32>,
    pub alphas: Vec<f64>,
    pub grid: ModulusGrid,
    pub timestamp: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            functions: builtin_corpus().ids().map(String::from).collect(),
            ks: vec![1, 2, 3, 4],
            ns: vec![2, 4, 8, 12, 16, 24, 30, 32, 48, 56, 64],
            alphas: vec![1.0, 2.0],
            grid: ModulusGrid::new(1024, 256),
            timestamp: false,
        }
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub k: u32,
    pub alpha: f64,
    pub records: usize,
    pub max_ratio: f64,
    pub argmax_function: Option<String>,
    pub argmax_n: Option<u32>,
    pub bound: f64,
    pub all_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub grid: ModulusGrid,
    pub certify_tol: f64,
    pub slack: f64,
    pub timestamp: Option<u64>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<JacksonRecord>,
    pub summary: Vec<SummaryRow>,
    pub metadata: Metadata,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }
}

/// Every admissible `(f, k, n, alpha)` of the config, ordered by
/// `(function_id, k, n, alpha)`.
pub fn run_suite(config: &SuiteConfig) -> Result<Report> {
    if config.functions.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if config.ks.is_empty() || config.ns.is_empty() || config.alphas.is_empty() {
        return Err(Error::Config("ks, ns and alphas must be non-empty".into()));
    }
    let corpus = builtin_corpus().select(&config.functions)?;
    let mut jobs = Vec::new();
    for f in corpus.entries() {
        for &k in &config.ks {
            for &n in &config.ns {
                if n < n_threshold(k) {
                    continue;
                }
                for &alpha in &config.alphas {
                    jobs.push((f, k, n, alpha));
                }
            }
        }
    }
    let mut records = jobs
        .par_iter()
        .map(|&(f, k, n, alpha)| jackson_ratio_with(f, k, n, alpha, config.grid))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| {
        a.function_id
            .cmp(&b.function_id)
            .then(a.k.cmp(&b.k))
            .then(a.n.cmp(&b.n))
            .then(a.alpha.total_cmp(&b.alpha))
    });
    let summary = summarize(&records);
    let timestamp = config
        .timestamp
        .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
    Ok(Report {
        records,
        summary,
        metadata: Metadata {
            grid: config.grid,
            certify_tol: DEFAULT_CERTIFY_TOL,
            slack: PRINTED_SLACK,
            timestamp,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

/// Per `(k, alpha)` maxima, in increasing `(k, alpha)` order.
pub fn summarize(records: &[JacksonRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(u32, f64)> = records.iter().map(|r| (r.k, r.alpha)).collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    keys.into_iter()
        .map(|(k, alpha)| {
            let group: Vec<&JacksonRecord> = records.iter().filter(|r| r.k == k && r.alpha == alpha).collect();
            let best = group
                .iter()
                .filter(|r| !r.degenerate)
                .fold(None::<&JacksonRecord>, |acc, r| match acc {
                    Some(a) if a.ratio >= r.ratio => Some(a),
                    _ => Some(r),
                });
            SummaryRow {
                k,
                alpha,
                records: group.len(),
                max_ratio: best.map_or(0.0, |r| r.ratio),
                argmax_function: best.map(|r| r.function_id.clone()),
                argmax_n: best.map(|r| r.n),
                bound: group[0].bound,
                all_pass: group.iter().all(|r| r.pass),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format `{other}` (json or csv)"))),
        }
    }
}

/// JSON is the whole report; CSV is the record table only.
pub fn emit(report: &Report, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => serde_json::to_vec_pretty(report).map_err(|e| Error::Serialization(e.to_string())),
        Format::Csv => records_to_csv(&report.records),
    }
}

pub fn records_to_csv(records: &[JacksonRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::Serialization(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Serialization(e.to_string()))
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<JacksonRecord>> {
    csv::Reader::from_reader(bytes)
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Serialization(e.to_string()))
}
