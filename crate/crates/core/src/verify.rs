//! The identity and inequality checks behind `japprox verify`.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::best_approx::{best_error, whitney_check_with};
use crate::bounds::{
    check_in2, favard, favard_closed_form, sec_series, sigma, theorem1_bound, theorem2_bound, PRINTED_SLACK,
};
use crate::corpus::{builtin_corpus, Interval, TestFunction};
use crate::error::Result;
use crate::extension::{extension_report_with, ExtensionGrid};
use crate::jackson::{lower_bound_experiment, neumann_diagnostic, run_suite, SuiteConfig};
use crate::kernel::{alpha_coeff, decompose_chi_square, gamma, gamma_abs_sum, lambda_hat};
use crate::moduli::ModulusGrid;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn outcome(name: &'static str, run: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    match run() {
        Ok((pass, detail)) => CheckOutcome { name, pass, detail },
        Err(e) => CheckOutcome {
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn q(p: i64, r: i64) -> BigRational {
    BigRational::new(p.into(), r.into())
}

/// Every check, in a fixed order. With `quick`, the Jackson suite is run on
/// a reduced grid.
pub fn run_verification(quick: bool) -> Vec<CheckOutcome> {
    let mut out = vec![
        outcome("kernel identities", kernel_identities),
        outcome("sigma parity", || {
            let bad = (1..=10_000u64).filter(|&j| sigma(j) != (j % 2) as i64).count();
            Ok((bad == 0, format!("{bad} mismatches for j <= 10000")))
        }),
        outcome("kernel l1 bounds", l1_bounds),
        outcome("favard constants", favard_check),
        outcome("bound values", bound_values),
        outcome("in2 inequality", in2_check),
        outcome("remez classical values", remez_classical),
        outcome("whitney sample", whitney_sample),
        outcome("extension sample", extension_sample),
    ];
    out.push(outcome("jackson suite", || {
        let mut cfg = SuiteConfig::default();
        if quick {
            cfg.grid = ModulusGrid::new(256, 64);
            cfg.ns = vec![2, 8, 16, 30, 56];
        }
        let rep = run_suite(&cfg)?;
        let worst = rep
            .summary
            .iter()
            .map(|s| s.max_ratio / s.bound)
            .fold(0.0, f64::max);
        Ok((
            rep.all_pass(),
            format!("{} records, max ratio/bound {worst:.4}", rep.records.len()),
        ))
    }));
    out.push(outcome("spike lower bound", || {
        let a = lower_bound_experiment(1, 8, &[1e-2, 1e-3], 2.0)?;
        let b = lower_bound_experiment(2, 12, &[1e-2, 1e-3], 2.0)?;
        let pass = [&a, &b]
            .iter()
            .all(|r| r[1].ratio >= 0.45 && r[1].ratio > r[0].ratio);
        Ok((pass, format!("k=1: {:.4}, k=2: {:.4} at eps=1e-3", a[1].ratio, b[1].ratio)))
    }));
    out.push(outcome("neumann majorant", || {
        let corpus = builtin_corpus();
        let mut worst = 0.0f64;
        let mut pass = true;
        for id in ["sin4", "runge", "abs", "abs_pow_1.5", "trunc_pow_a0.3_m2"] {
            for n in [16u32, 24] {
                let d = neumann_diagnostic(corpus.get(id)?, 2, n, std::f64::consts::PI / n as f64)?;
                pass &= d.pass;
                worst = worst.max(d.e / d.majorant);
            }
        }
        Ok((pass, format!("max E/majorant {worst:.4}")))
    }));
    out
}

fn kernel_identities() -> Result<(bool, String)> {
    let mut pass = gamma(2)? == q(4, 3) && gamma(3)? == q(68, 45) && gamma(4)? == q(512, 315);
    for k in 2..=12u32 {
        let lam = lambda_hat(k)?;
        pass &= lam.mass() == BigRational::one();
        pass &= gamma_abs_sum(k)? == gamma(k)?;
        for l in -(k as i32 - 1)..k as i32 {
            let a = alpha_coeff(l, k)?;
            pass &= lam.coefficient(&q(l as i64, 1)) == a;
            pass &= if l % 2 == 0 { a.is_positive() } else { a.is_negative() };
        }
    }
    for j in 1..=10u32 {
        let d = decompose_chi_square(j)?;
        for l in -(j as i64 - 1)..=(j as i64 - 1) {
            pass &= d.coefficient(&q(l, 1)) == q(1, j as i64) * (BigRational::one() - q(l.abs(), j as i64));
        }
    }
    Ok((pass, "gamma_2..4, mass, alternation, closed forms k <= 12, chi^2 split j <= 10".into()))
}

fn l1_bounds() -> Result<(bool, String)> {
    let mut pass = true;
    let mut detail = Vec::new();
    for k in 2..=12u32 {
        let l1 = lambda_hat(k)?.l1_norm(1.0);
        let exact = l1.exact.expect("hat kernels integrate exactly");
        let bound = match k {
            2 => q(118, 100),
            3 => q(126, 100),
            4 => q(131, 100),
            _ => q(2, 1),
        };
        pass &= if k <= 4 { exact <= bound } else { exact < bound };
        if k <= 4 {
            detail.push(format!("k={k}: {:.5}", exact.to_f64().unwrap()));
        }
    }
    Ok((pass, detail.join(", ")))
}

fn favard_check() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for m in [1u32, 2, 3, 4, 6, 8] {
        let terms = match m {
            1 => 100_000_000,
            2 => 100_000,
            _ => 10_000,
        };
        worst = worst.max((favard(m, terms).value - favard_closed_form(m).unwrap()).abs());
    }
    let mut sec_worst = 0.0f64;
    for rho in [1.5, 2.0, 4.0] {
        let s = sec_series(rho, 40)?;
        sec_worst = sec_worst.max((s.value - 1.0 / (std::f64::consts::PI / (2.0 * rho)).cos()).abs());
    }
    Ok((
        worst <= 1e-8 && sec_worst <= 1e-9,
        format!("max |series - closed form| {worst:.2e}, sec identity {sec_worst:.2e}"),
    ))
}

fn bound_values() -> Result<(bool, String)> {
    let printed = [(1, 1.0, 0.94), (1, 2.0, 0.8), (2, 2.0, 2.59), (3, 2.0, 2.84), (4, 2.0, 2.97)];
    let mut pass = theorem2_bound(1, 1.0)? == 0.9375;
    for (k, a, p) in printed {
        pass &= theorem2_bound(k, a)? <= p + PRINTED_SLACK;
    }
    for k in 5..=12 {
        pass &= theorem1_bound(k, 2.0)? <= 9.74 + PRINTED_SLACK;
    }
    Ok((pass, format!("J(10, 2) <= {:.4}", theorem1_bound(5, 2.0)?)))
}

fn in2_check() -> Result<(bool, String)> {
    let mut count = 0usize;
    let mut pass = true;
    for m in 4..=12u32 {
        for n in (m * (m - 1)) as u64..=2000 {
            pass &= check_in2(m, n)?.passes;
            count += 1;
        }
    }
    Ok((pass, format!("{count} pairs")))
}

fn remez_classical() -> Result<(bool, String)> {
    let sq = TestFunction::new("x2", Interval::unit(), |x| x * x);
    let e1 = best_error(&sq, Interval::unit(), 2)?;
    let mut pass = (e1 - 0.5).abs() <= 1e-9;
    // E_{n-1}(x^n) = 2^{1-n}
    for n in 2..=10 {
        let f = TestFunction::new("xn", Interval::unit(), move |x| x.powi(n));
        let e = best_error(&f, Interval::unit(), n as usize)?;
        pass &= (e - 2f64.powi(1 - n)).abs() <= 1e-9;
    }
    Ok((pass, format!("E_1(x^2) = {e1:.12}")))
}

fn whitney_sample() -> Result<(bool, String)> {
    let corpus = builtin_corpus();
    let subs = [(-1.0, 1.0), (-0.3, 0.5), (0.1, 0.9)];
    let mut jobs = Vec::new();
    for f in corpus.entries() {
        for k in 1..=8u32 {
            jobs.extend(subs.iter().map(|&s| (f, k, s)));
        }
    }
    let res = jobs
        .par_iter()
        .map(|&(f, k, (a, b))| whitney_check_with(f, Interval::new(a, b)?, k, ModulusGrid::new(512, 128)))
        .collect::<Result<Vec<_>>>()?;
    let worst = res.iter().map(|w| w.ratio / w.bound_wk).fold(0.0, f64::max);
    Ok((res.iter().all(|w| w.pass), format!("{} checks, max ratio/w_k {worst:.4}", res.len())))
}

fn extension_sample() -> Result<(bool, String)> {
    let corpus = builtin_corpus();
    let grid = ExtensionGrid {
        modulus: ModulusGrid::new(512, 128),
        sup_n: 512,
        quad_panels: 128,
    };
    let jobs: Vec<_> = corpus
        .entries()
        .iter()
        .flat_map(|f| (1..=4u32).map(move |k| (f, k)))
        .collect();
    let res = jobs
        .par_iter()
        .map(|&(f, k)| extension_report_with(f, k, 0.05, grid))
        .collect::<Result<Vec<_>>>()?;
    let pass = res.iter().all(|r| r.w_pass && r.d_pass);
    Ok((pass, format!("{} reports at h = 0.05", res.len())))
}
