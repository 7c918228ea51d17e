use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use japprox::best_approx::remez;
use japprox::bounds::{jackson_bound, n_threshold, BoundParams};
use japprox::corpus::{builtin_corpus, Interval, RealFunction};
use japprox::extension::{extend, report_for, ExtensionGrid};
use japprox::jackson::{emit, lower_bound_experiment_with, run_suite, Format, SuiteConfig};
use japprox::kernel::{gamma, lambda_hat, rational_string};
use japprox::moduli::{modulus, ModulusGrid};
use japprox::verify::run_verification;

#[derive(Parser)]
#[command(name = "japprox", version, about = "Jackson-constant experiments for algebraic approximation on [-1, 1]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact hat decomposition of the kernel Lambda_{2k}.
    ///
    /// Prints a JSON summary, or CSV with `--emit-coeffs` / `--h`.
    Kernel {
        #[arg(long)]
        k: u32,
        /// `shift,coeff` rows as exact `p/q` strings.
        #[arg(long)]
        emit_coeffs: bool,
        /// Sample the kernel at this scale as `x,value` rows.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = 64)]
        sample: usize,
    },
    /// Modulus of smoothness omega_order(f, delta) of a corpus function.
    Modulus {
        #[arg(long)]
        function: String,
        /// Order of the difference.
        #[arg(long, alias = "order")]
        k: u32,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 2048)]
        nx: usize,
        #[arg(long, default_value_t = 512)]
        nh: usize,
    },
    /// Minimax polynomial of a corpus function.
    Remez {
        #[arg(long)]
        function: String,
        #[arg(long)]
        degree: usize,
        /// `a,b`; defaults to the function's domain.
        #[arg(long)]
        interval: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Boundary continuation g_f of a corpus function.
    Extend {
        #[arg(long)]
        function: String,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        h: f64,
        /// Measure the continuation against the d_k and d_k^* tables.
        #[arg(long)]
        report: bool,
    },
    /// The applicable Jackson bound with its intermediate quantities.
    Bounds {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: Option<u32>,
    },
    /// Empirical Jackson ratios over the corpus.
    Jackson {
        /// `1..4` or a comma list.
        #[arg(long, default_value = "1..4")]
        k: String,
        #[arg(long, default_value = "1,2")]
        alpha: String,
        #[arg(long, default_value = "8,16,32,64")]
        n: String,
        /// `default` or a comma list of ids.
        #[arg(long, default_value = "default")]
        corpus: String,
        /// JSON config; replaces the list options.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timestamp: bool,
    },
    /// Run every identity and inequality check. Exits 1 on any violation.
    Verify {
        /// Smaller Jackson grid.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        json: bool,
    },
    /// Jackson ratios of the spikes f_eps.
    LowerBound {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "1e-2,1e-3,1e-4")]
        eps: String,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
}

fn list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| anyhow::anyhow!("bad {what} `{p}`: {e}")))
        .collect()
}

fn k_range(s: &str) -> Result<Vec<u32>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u32, u32) = (a.trim().parse()?, b.trim_start_matches('=').trim().parse()?);
        if a > b {
            bail!("empty k range `{s}`");
        }
        return Ok((a..=b).collect());
    }
    list(s, "k")
}

fn print(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn kernel_csv(k: u32, emit_coeffs: bool, h: Option<f64>, sample: usize) -> Result<String> {
    let lam = lambda_hat(k)?;
    let mut out = String::new();
    if emit_coeffs {
        out.push_str("shift,coeff\n");
        for t in lam.terms() {
            out.push_str(&format!("{},{}\n", rational_string(&t.shift), rational_string(&t.coeff)));
        }
    }
    if let Some(h) = h {
        if !(h > 0.0) {
            bail!("--h must be positive, got {h}");
        }
        if emit_coeffs {
            out.push('\n');
        }
        out.push_str("x,value\n");
        for v in lam.samples(h, sample) {
            out.push_str(&format!("{},{}\n", v.x, v.value));
        }
    }
    Ok(out)
}

fn kernel_cmd(k: u32) -> Result<Value> {
    let lam = lambda_hat(k)?;
    let terms: Vec<Value> = lam
        .terms()
        .iter()
        .map(|t| json!({"shift": rational_string(&t.shift), "coeff": rational_string(&t.coeff)}))
        .collect();
    let l1 = lam.l1_norm(1.0);
    let (lo, hi) = lam.support();
    Ok(json!({
        "k": k,
        "order": lam.order(),
        "terms": terms,
        "mass": rational_string(&lam.mass()),
        "gamma": rational_string(&gamma(k)?),
        "abs_coeff_sum": rational_string(&lam.abs_coeff_sum()),
        "l1_norm": l1.value,
        "l1_norm_exact": l1.exact.as_ref().map(rational_string),
        "support": [rational_string(&lo), rational_string(&hi)],
    }))
}

fn jackson_config(
    k: &str,
    alpha: &str,
    n: &str,
    corpus: &str,
    config: Option<PathBuf>,
    timestamp: bool,
) -> Result<SuiteConfig> {
    let mut cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            SuiteConfig::from_json(&text)?
        }
        None => SuiteConfig {
            ks: k_range(k)?,
            alphas: list(alpha, "alpha")?,
            ns: list(n, "n")?,
            ..SuiteConfig::default()
        },
    };
    if corpus != "default" {
        cfg.functions = corpus.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    cfg.timestamp |= timestamp;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let corpus = builtin_corpus();
    match cli.command {
        Command::Kernel {
            k,
            emit_coeffs,
            h,
            sample,
        } => {
            if emit_coeffs || h.is_some() {
                print!("{}", kernel_csv(k, emit_coeffs, h, sample)?);
            } else {
                print(&kernel_cmd(k)?)?;
            }
        }
        Command::Modulus {
            function,
            k,
            delta,
            nx,
            nh,
        } => {
            let f = corpus.get(&function)?;
            let m = modulus(f, k, delta, ModulusGrid::new(nx, nh))?;
            print(&json!({"function_id": function, "k": k, "delta": delta, "result": m}))?;
        }
        Command::Remez {
            function,
            degree,
            interval,
            tol,
        } => {
            let f = corpus.get(&function)?;
            let iv = match interval {
                Some(s) => {
                    let v: Vec<f64> = list(&s, "interval end")?;
                    if v.len() != 2 {
                        bail!("--interval takes `a,b`");
                    }
                    Interval::new(v[0], v[1])?
                }
                None => f.domain(),
            };
            let r = remez(f, iv, degree, tol)?;
            let mut out = serde_json::to_value(&r)?;
            out["monomial_coeffs"] = json!(r.poly.monomial_coeffs());
            print(&out)?;
        }
        Command::Extend { function, k, h, report } => {
            let f = corpus.get(&function)?;
            let g = extend(f, k, h)?;
            let mut out = json!({
                "function_id": function,
                "k": k,
                "h": h,
                "p_minus": g.p_minus,
                "p_plus": g.p_plus,
                "jump_minus": g.jump_minus,
                "jump_plus": g.jump_plus,
            });
            if report {
                out["report"] = serde_json::to_value(report_for(&g, ExtensionGrid::default())?)?;
            }
            print(&out)?;
        }
        Command::Bounds { k, alpha, n } => {
            let n = n.unwrap_or_else(|| n_threshold(k));
            let p = BoundParams::new(k, alpha, n)?;
            let form = if k <= 4 { "small-k closed form" } else { "secant bound" };
            print(&json!({
                "k": k,
                "alpha": alpha,
                "bound": jackson_bound(k, alpha)?,
                "form": form,
                "n_threshold": n_threshold(k),
                "gamma_k": rational_string(&gamma(k)?),
                "params": p,
            }))?;
        }
        Command::Jackson {
            k,
            alpha,
            n,
            corpus: which,
            config,
            format,
            out,
            timestamp,
        } => {
            let cfg = jackson_config(&k, &alpha, &n, &which, config, timestamp)?;
            let format: Format = format.parse()?;
            let report = run_suite(&cfg)?;
            let bytes = emit(&report, format)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
                    for s in &report.summary {
                        eprintln!(
                            "k={} alpha={} records={} max_ratio={:.6} ({}) bound={:.6} pass={}",
                            s.k,
                            s.alpha,
                            s.records,
                            s.max_ratio,
                            s.argmax_function.as_deref().unwrap_or("-"),
                            s.bound,
                            s.all_pass
                        );
                    }
                }
                None => print!("{}", String::from_utf8(bytes)?),
            }
            if !report.all_pass() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Verify { quick, json } => {
            let outcomes = run_verification(quick);
            if json {
                print(&serde_json::to_value(&outcomes)?)?;
            } else {
                for o in &outcomes {
                    println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
                }
            }
            if outcomes.iter().any(|o| !o.pass) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::LowerBound { k, n, eps, alpha } => {
            let eps: Vec<f64> = list(&eps, "eps")?;
            let recs = lower_bound_experiment_with(k, n, &eps, alpha, ModulusGrid::default())?;
            print(&serde_json::to_value(&recs)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
