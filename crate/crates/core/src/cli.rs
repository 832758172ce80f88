//! The `rodpade` command line.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, every check passed |
//! | 1 | a verification or bound check failed |
//! | 2 | invalid arguments or configuration (including `β` too small) |
//! | 3 | criterion hypotheses not met (`V` not positive, or `β` too small) |

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::criterion::{self, Place};
use crate::error::{Error, Result};
use crate::logpow::{self, LogPowConfig};
use crate::mpl::{self, MplConfig};
use crate::poly::Poly;
use crate::rational::{self, Rational};
use crate::transform::{self, PadeTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CRITERION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "rodpade",
    version,
    about = "Exact Rodrigues-type Padé approximants and the height criterion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and verify Padé tables.
    Pade {
        #[command(flatten)]
        common: Common,
        /// Use the powers-of-logarithm family instead of polylogarithms.
        #[arg(long)]
        appendix_logpow: bool,
    },
    /// Determinant of the full table and its factorization.
    Det {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        appendix_logpow: bool,
    },
    /// Evaluate the linear-independence criterion.
    Criterion {
        #[command(flatten)]
        common: Common,
        /// Also list products of values.
        #[arg(long)]
        products: bool,
    },
    /// Audit the norm bounds and remainder decay, or with `--lcm` the growth of lcm(1..n).
    Audit {
        #[command(flatten)]
        common: Common,
        /// Only report the growth of lcm(1..N).
        #[arg(long, value_name = "N")]
        lcm: Option<usize>,
    },
    /// Check the operator identities for the logarithm family up to `--n`.
    LogpowIdentities {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON or TOML file with any of m, r, alphas, n, beta, place.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Comma-separated rationals.
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    /// `inf` or `p<prime>`.
    #[arg(long)]
    pub place: Option<String>,
    /// A single value or an inclusive range `a..b`.
    #[arg(long)]
    pub n: Option<String>,
    /// Inclusive range `a..b`; same as a range passed to `--n`.
    #[arg(long)]
    pub n_range: Option<String>,
    /// Truncation depth for the membership check of `pade`.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Contents of a `--config` file. Command-line flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    m: Option<usize>,
    r: Option<usize>,
    alphas: Option<Vec<String>>,
    n: Option<NSpec>,
    beta: Option<String>,
    place: Option<String>,
    depth: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NSpec {
    One(usize),
    Text(String),
}

/// Fully validated settings shared by the subcommands.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    pub place: Place,
    pub ns: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip)]
    alpha_values: Option<Vec<Rational>>,
    #[serde(skip)]
    beta_value: Option<Rational>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn parse_ns(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("bad value for n: {s:?}")))
    };
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(invalid(format!("empty range {s:?}")));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![num(s)?]),
    }
}

fn parse_alphas(s: &str) -> Result<Vec<Rational>> {
    s.split(',').map(|a| rational::parse(a.trim())).collect()
}

fn read_file_config(path: &PathBuf) -> Result<FileConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let is_toml = path.extension().is_some_and(|e| e == "toml");
    if is_toml {
        toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }
}

impl RunConfig {
    pub fn from_common(c: &Common) -> Result<RunConfig> {
        let file = match &c.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let alphas = match (&c.alphas, file.alphas) {
            (Some(s), _) => Some(parse_alphas(s)?),
            (None, Some(v)) => Some(
                v.iter()
                    .map(|a| rational::parse(a))
                    .collect::<Result<Vec<_>>>()?,
            ),
            (None, None) => None,
        };
        let ns = match (&c.n_range, &c.n, file.n) {
            (Some(s), _, _) | (None, Some(s), _) => parse_ns(s)?,
            (None, None, Some(NSpec::One(n))) => vec![n],
            (None, None, Some(NSpec::Text(s))) => parse_ns(&s)?,
            (None, None, None) => Vec::new(),
        };
        let beta_text = c.beta.clone().or(file.beta);
        let beta = beta_text.as_deref().map(rational::parse).transpose()?;
        let place = match c.place.as_deref().or(file.place.as_deref()) {
            Some(p) => p.parse()?,
            None => Place::Archimedean,
        };
        Ok(RunConfig {
            m: c.m.or(file.m),
            r: c.r.or(file.r),
            alphas: alphas
                .as_ref()
                .map(|v| v.iter().map(rational::to_string).collect()),
            beta: beta.as_ref().map(rational::to_string),
            place,
            ns,
            depth: c.depth.or(file.depth),
            alpha_values: alphas,
            beta_value: beta,
        })
    }

    fn require_m(&self) -> Result<usize> {
        self.m.ok_or_else(|| invalid("--m is required"))
    }

    fn require_ns(&self) -> Result<&[usize]> {
        if self.ns.is_empty() {
            return Err(invalid("--n is required"));
        }
        if self.ns.contains(&0) {
            return Err(invalid("n must be at least 1"));
        }
        Ok(&self.ns)
    }

    fn require_beta(&self) -> Result<&Rational> {
        self.beta_value
            .as_ref()
            .ok_or_else(|| invalid("--beta is required"))
    }

    /// `m` defaults to the number of alphas, `r` to 1.
    pub fn mpl(&self) -> Result<MplConfig> {
        let alphas = self
            .alpha_values
            .clone()
            .ok_or_else(|| invalid("--alphas is required"))?;
        let m = self.m.unwrap_or(alphas.len());
        MplConfig::new(m, self.r.unwrap_or(1), alphas)
    }
}

/// A command's result in both output formats, with its exit code.
struct Output {
    json: Value,
    csv: Vec<Vec<String>>,
    code: i32,
}

fn poly_json(p: &Poly) -> Value {
    json!(p.to_strings())
}

fn table_csv(n: usize, t: &PadeTable, rows: &mut Vec<Vec<String>>) {
    for (l, p) in t.p.iter().enumerate() {
        rows.push(vec![
            n.to_string(),
            l.to_string(),
            "P".into(),
            String::new(),
            p.to_strings().join(" "),
        ]);
        for row in &t.rows {
            rows.push(vec![
                n.to_string(),
                l.to_string(),
                "Q".into(),
                row.label.clone(),
                row.q[l].to_strings().join(" "),
            ]);
        }
    }
}

fn cmd_pade(cfg: &RunConfig, logpow_family: bool) -> Result<Output> {
    let ns = cfg.require_ns()?.to_vec();
    let mut tables = Vec::new();
    let mut csv = vec![vec![
        "n".into(),
        "column".into(),
        "kind".into(),
        "row".into(),
        "coefficients".into(),
    ]];
    let mut ok = true;
    for n in ns {
        let (table, fs, rn, depth) = if logpow_family {
            let lc = LogPowConfig::new(cfg.require_m()?, n)?;
            let depth = cfg.depth.unwrap_or(40.max(2 * lc.m * n + lc.m + 5));
            (
                logpow::logpow_table(&lc),
                logpow::moment_seqs(lc.m),
                logpow::build_rn_log(n, lc.m),
                depth,
            )
        } else {
            let mc = cfg.mpl()?;
            let depth = cfg.depth.unwrap_or_else(|| mpl::default_depth(&mc, n));
            (
                mpl::pade_table(&mc, n)?,
                mpl::moment_seqs(&mc),
                mpl::build_rn(n, &mc),
                depth,
            )
        };
        let mut report = match table.verify(&fs) {
            Ok(r) => serde_json::to_value(&r).expect("report serializes"),
            Err(e) => json!({ "ok": false, "error": e.to_string() }),
        };
        // The operator must send z^k f to a polynomial for every row and k < n.
        let mut membership = true;
        for f in &fs {
            for k in 0..n {
                membership &= transform::annihilates(&rn, f, k, depth)?;
            }
        }
        report["rodrigues_membership"] = json!({ "depth": depth, "ok": membership });
        ok &= report["ok"] == json!(true) && membership;
        let delta = transform::require_nonzero_constant(&transform::delta_det(&table));
        ok &= delta.is_ok();
        table_csv(n, &table, &mut csv);
        tables.push(json!({
            "n": n,
            "table": table,
            "verification": report,
            "summary": {
                "delta": match &delta {
                    Ok(d) => json!(rational::to_string(d)),
                    Err(e) => json!({ "error": e.to_string() }),
                },
            },
        }));
    }
    Ok(Output {
        json: json!({
            "family": if logpow_family { "logpow" } else { "mpl" },
            "config": cfg,
            "tables": tables,
            "ok": ok,
        }),
        csv,
        code: if ok { EXIT_OK } else { EXIT_VERIFY },
    })
}

fn cmd_det(cfg: &RunConfig, logpow_family: bool) -> Result<Output> {
    let ns = cfg.require_ns()?.to_vec();
    let mut out = Vec::new();
    let mut csv = vec![vec![
        "n".into(),
        "delta".into(),
        "theta".into(),
        "leading_coeff".into(),
    ]];
    let mut ok = true;
    for n in ns {
        let (table, fs, rstar) = if logpow_family {
            let lc = LogPowConfig::new(cfg.require_m()?, n)?;
            (
                logpow::logpow_table(&lc),
                logpow::moment_seqs(lc.m),
                logpow::build_rn_log(n, lc.m).adjoint(),
            )
        } else {
            let mc = cfg.mpl()?;
            (
                mpl::pade_table(&mc, n)?,
                mpl::moment_seqs(&mc),
                mpl::build_rn(n, &mc).adjoint(),
            )
        };
        let det = transform::delta_det(&table);
        let theta = transform::theta_det(&fs, &rstar, n);
        let lc = table.p[table.d].leading_coeff();
        let delta = transform::require_nonzero_constant(&det);
        ok &= delta.is_ok();
        let show = |d: &Result<Rational>| match d {
            Ok(d) => rational::to_string(d),
            Err(e) => e.to_string(),
        };
        csv.push(vec![
            n.to_string(),
            show(&delta),
            rational::to_string(&theta),
            rational::to_string(&lc),
        ]);
        out.push(json!({
            "n": n,
            "determinant": poly_json(&det),
            "delta": show(&delta),
            "constant": delta.is_ok(),
            "theta": rational::to_string(&theta),
            "leading_coeff": rational::to_string(&lc),
        }));
    }
    Ok(Output {
        json: json!({ "config": cfg, "determinants": out, "ok": ok }),
        csv,
        code: if ok { EXIT_OK } else { EXIT_VERIFY },
    })
}

fn cmd_criterion(cfg: &RunConfig, products: bool) -> Result<Output> {
    let mc = cfg.mpl()?;
    let beta = cfg.require_beta()?;
    let report = criterion::evaluate_criterion(&mc.alphas, beta, mc.m, mc.r, cfg.place, products)?;
    let code = if report.passes() {
        EXIT_OK
    } else {
        EXIT_CRITERION
    };
    let json = serde_json::to_value(&report).expect("report serializes");
    let mut csv = vec![vec!["field".into(), "value".into()]];
    let mut push = |k: &str, v: String| csv.push(vec![k.into(), v]);
    push("beta", rational::to_string(beta));
    push("place", cfg.place.to_string());
    push("V", json["V"]["value"].to_string());
    push("V_error_bound", json["V"]["error_bound"].to_string());
    push(
        "beta_dominates_alpha",
        report.hypothesis_checks.beta_dominates_alpha.to_string(),
    );
    push(
        "v_positive",
        json["hypothesis_checks"]["v_positive"]
            .as_str()
            .unwrap_or("")
            .into(),
    );
    for c in &report.conclusion {
        push("conclusion", c.clone());
    }
    Ok(Output { json, csv, code })
}

fn cmd_lcm(n: usize) -> Output {
    let d = criterion::lcm_upto(n.max(1));
    let log = rational::ln_biguint(&d);
    let ratio = log / n.max(1) as f64;
    let holds = (0.95..=1.05).contains(&ratio);
    let ratio = criterion::round_sig(ratio);
    let log = criterion::round_sig(log);
    Output {
        json: json!({ "lcm": { "n": n, "log_lcm": log, "ratio": ratio, "holds": holds } }),
        csv: vec![
            vec!["n".into(), "log_lcm".into(), "ratio".into(), "holds".into()],
            vec![
                n.to_string(),
                log.to_string(),
                ratio.to_string(),
                holds.to_string(),
            ],
        ],
        code: if holds { EXIT_OK } else { EXIT_VERIFY },
    }
}

fn cmd_audit(cfg: &RunConfig, lcm: Option<usize>) -> Result<Output> {
    if let Some(n) = lcm {
        return Ok(cmd_lcm(n));
    }
    let mc = cfg.mpl()?;
    let beta = cfg.beta_value.as_ref();
    if let Some(b) = beta {
        let h = cfg.place.height_factor(&mc.alphas);
        let a = cfg.place.abs(b);
        if a <= h {
            return Err(Error::BadBeta {
                beta_abs: rational::to_string(&a),
                height: rational::to_string(&h),
            });
        }
    }
    let ns = cfg.require_ns()?.to_vec();
    let audits = ns
        .iter()
        .map(|&n| criterion::bounds_audit(&mc, &mpl::pade_table(&mc, n)?, cfg.place, beta))
        .collect::<Result<Vec<_>>>()?;
    let decay = match beta {
        Some(b) if ns.len() >= 2 => Some(criterion::remainder_decay(&mc, b, cfg.place, &ns)?),
        _ => None,
    };
    let all_hold = audits.iter().all(|a| a.all_hold) && decay.as_ref().map_or(true, |d| d.holds);
    let mut csv = vec![[
        "n", "column", "row", "step", "check", "measured", "bound", "slack", "holds",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect::<Vec<_>>()];
    let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
    for a in &audits {
        for e in &a.entries {
            csv.push(vec![
                a.n.to_string(),
                e.column.to_string(),
                e.row.clone().unwrap_or_default(),
                e.step.map_or_else(String::new, |s| s.to_string()),
                e.check.into(),
                opt(e.measured),
                e.bound.to_string(),
                opt(e.slack),
                e.holds.to_string(),
            ]);
        }
    }
    Ok(Output {
        json: json!({ "config": cfg, "audits": audits, "remainder_decay": decay, "all_hold": all_hold }),
        csv,
        code: if all_hold { EXIT_OK } else { EXIT_VERIFY },
    })
}

fn cmd_logpow_identities(cfg: &RunConfig) -> Result<Output> {
    let n_max = *cfg.require_ns()?.iter().max().expect("nonempty");
    let ok = logpow::verify_en_identities(n_max);
    Ok(Output {
        json: json!({ "n_max": n_max, "ok": ok }),
        csv: vec![
            vec!["n_max".into(), "ok".into()],
            vec![n_max.to_string(), ok.to_string()],
        ],
        code: if ok { EXIT_OK } else { EXIT_VERIFY },
    })
}

fn render(out: &Output, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(&out.json).expect("json serializes");
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &out.csv {
                w.write_record(row).map_err(|e| invalid(e.to_string()))?;
            }
            w.into_inner().map_err(|e| invalid(e.to_string()))
        }
    }
}

fn execute(cli: &Cli) -> Result<(Vec<u8>, Option<PathBuf>, i32)> {
    let (common, out) = match &cli.command {
        Command::Pade {
            common,
            appendix_logpow,
        } => {
            let cfg = RunConfig::from_common(common)?;
            (common, cmd_pade(&cfg, *appendix_logpow)?)
        }
        Command::Det {
            common,
            appendix_logpow,
        } => {
            let cfg = RunConfig::from_common(common)?;
            (common, cmd_det(&cfg, *appendix_logpow)?)
        }
        Command::Criterion { common, products } => {
            let cfg = RunConfig::from_common(common)?;
            (common, cmd_criterion(&cfg, *products)?)
        }
        Command::Audit { common, lcm } => {
            let cfg = RunConfig::from_common(common)?;
            (common, cmd_audit(&cfg, *lcm)?)
        }
        Command::LogpowIdentities { common } => {
            let cfg = RunConfig::from_common(common)?;
            (common, cmd_logpow_identities(&cfg)?)
        }
    };
    Ok((render(&out, common.format)?, common.out.clone(), out.code))
}

/// Runs the command line given by `args` and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match execute(&cli) {
        Ok((bytes, path, code)) => {
            let written = match path {
                Some(p) => std::fs::write(&p, &bytes).map_err(|e| e.to_string()),
                None => std::io::stdout()
                    .write_all(&bytes)
                    .map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return EXIT_INVALID;
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NonConstantDeterminant(_)
                | Error::ZeroDeterminant
                | Error::RouteMismatch(_) => EXIT_VERIFY,
                _ => EXIT_INVALID,
            }
        }
    }
}
