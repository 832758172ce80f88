//! Exact audits of the norm bounds behind the criterion, and the measured
//! decay of the Padé remainders at `β`.
//!
//! All comparisons are made between exact rationals; logarithms are only
//! computed for reporting.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{
    growth_constant, lcm_valuation, local_height, local_height_vec, round_sig, ser_round, Place,
};
use crate::error::{Error, Result};
use crate::mpl::{moment_seqs, MplConfig};
use crate::poly::{Degree, Poly};
use crate::rational::{self, Rational};
use crate::transform::{phi, MomentSeq, PadeTable};

#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub check: &'static str,
    pub column: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<String>,
    /// Chain step, or the power of `t` for functional checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    /// `log` of the measured quantity; `None` when it is exactly zero.
    pub measured: Option<f64>,
    pub bound: f64,
    pub slack: Option<f64>,
    pub holds: bool,
}

/// Leading-order growth rate of the approximants, reported alongside the
/// measured size. Not asserted: it only holds up to `o(n)`.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticEntry {
    pub column: usize,
    #[serde(serialize_with = "ser_round")]
    pub measured: f64,
    #[serde(serialize_with = "ser_round")]
    pub leading_order: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub place: Place,
    pub n: usize,
    /// Evaluation point for the `P(β)`, `Q(β)` checks, when one was given.
    pub beta: Option<String>,
    /// Whether the chain `±𝓛_n 𝓛_{(m+1)n} ... z^ℓ` reproduces every column.
    pub chain_matches_table: bool,
    pub entries: Vec<AuditEntry>,
    pub asymptotic: Vec<AsymptoticEntry>,
    pub all_hold: bool,
}

fn log_opt(x: &Rational) -> Option<f64> {
    (!x.is_zero()).then(|| round_sig(rational::ln_abs(x)))
}

fn entry(
    check: &'static str,
    column: usize,
    row: Option<String>,
    step: Option<usize>,
    measured: &Rational,
    bound: &Rational,
) -> AuditEntry {
    let m = log_opt(measured);
    let b = round_sig(rational::ln_abs(bound));
    AuditEntry {
        check,
        column,
        row,
        step,
        measured: m,
        bound: b,
        slack: m.map(|m| round_sig(b - m)),
        holds: measured <= bound,
    }
}

fn big(n: impl Into<BigUint>) -> Rational {
    rational::from_biguint(&n.into())
}

fn pow_u(base: u64, e: usize) -> Rational {
    big(BigUint::from(base).pow(e as u32))
}

fn deg(p: &Poly) -> usize {
    match p.degree() {
        Degree::Finite(d) => d,
        Degree::NegInfinity => 0,
    }
}

/// `|d_{N+1}^r|_v^{ε-1}`: 1 at the archimedean place, `p^{r v_p(d_{N+1})}` at `p`.
fn lcm_factor(v: Place, n_plus_1: usize, r: usize) -> Rational {
    match v {
        Place::Archimedean => Rational::one(),
        Place::Prime(p) => pow_u(p, r * lcm_valuation(n_plus_1, p) as usize),
    }
}

/// Bound on `|φ(P)|_v` and `‖Q‖_v` for a polynomial of degree `N`.
fn functional_bound(
    v: Place,
    big_n: usize,
    r: usize,
    h_alpha: &Rational,
    norm: &Rational,
) -> Rational {
    let eps = v.epsilon() as usize;
    pow_u(big_n as u64 + 1, (r + 1) * eps)
        * lcm_factor(v, big_n + 1, r)
        * rational::pow(h_alpha, big_n + 1)
        * norm
}

struct Ctx<'a> {
    cfg: &'a MplConfig,
    v: Place,
    eps: usize,
    h_alphas: Rational,
    h_alpha: Rational,
}

impl Ctx<'_> {
    /// Applies `𝓛_N` to `p`, checking the three step bounds. Returns the
    /// image and the explicit operator-norm factor.
    fn step(
        &self,
        big_n: usize,
        p: &Poly,
        column: usize,
        step: usize,
        out: &mut Vec<AuditEntry>,
    ) -> (Poly, Rational) {
        let (v, eps, m) = (self.v, self.eps, self.cfg.m);
        let a = self
            .cfg
            .alphas
            .iter()
            .fold(Poly::one(), |acc, al| &acc * &Poly::linear_root(al))
            .pow(big_n);
        let hn = rational::pow(&self.h_alphas, big_n);
        let bound = pow_u(big_n as u64 + 1, m * eps) * pow_u(2, m * big_n * eps) * &hn;
        out.push(entry(
            "product_norm",
            column,
            None,
            Some(step),
            &v.norm(a.coeffs()),
            &bound,
        ));

        let ap = &a * p;
        let bound =
            pow_u((deg(&a) + deg(p) + 1) as u64, eps) * v.norm(a.coeffs()) * v.norm(p.coeffs());
        out.push(entry(
            "norm_of_product",
            column,
            None,
            Some(step),
            &v.norm(ap.coeffs()),
            &bound,
        ));

        let inv = Rational::new(BigInt::one(), rational::factorial(big_n as u64).into());
        let image = ap.shift(big_n).derive(big_n).scale(&inv);
        let bound = rational::pow(
            &big(rational::binomial((big_n + deg(&ap)) as u64, big_n as u64)),
            eps,
        ) * v.norm(ap.coeffs());
        out.push(entry(
            "derivative_norm",
            column,
            None,
            Some(step),
            &v.norm(image.coeffs()),
            &bound,
        ));

        let d = deg(p);
        let factor = pow_u((m * big_n + d + 1) as u64, (m + 1) * eps)
            * rational::pow(
                &(pow_u(2, m * big_n)
                    * big(rational::binomial(
                        ((m + 1) * big_n + d) as u64,
                        big_n as u64,
                    ))),
                eps,
            )
            * hn;
        let bound = &factor * v.norm(p.coeffs());
        out.push(entry(
            "operator_norm",
            column,
            None,
            Some(step),
            &v.norm(image.coeffs()),
            &bound,
        ));
        (image, factor)
    }
}

/// Checks every norm inequality used to bound the approximants of a table
/// at the place `v`, exactly, and reports `{measured, bound, slack}` in logs.
///
/// Each step of the operator chain `𝓛_N` is checked on its own. The
/// functional bounds on `φ(t^k P)` and `‖Q‖` are checked per row. `P(β)`
/// and `Q(β)` are compared with the bound obtained by chaining the step
/// factors, which is the explicit finite-`n` form of the asymptotic
/// growth estimate.
pub fn bounds_audit(
    cfg: &MplConfig,
    table: &PadeTable,
    v: Place,
    beta: Option<&Rational>,
) -> Result<AuditReport> {
    cfg.validate()?;
    let n = table.n;
    let (m, r) = (cfg.m, cfg.r);
    let big_m = cfg.big_m();
    let ctx = Ctx {
        cfg,
        v,
        eps: v.epsilon() as usize,
        h_alphas: cfg.alphas.iter().map(|a| v.height_factor([a])).product(),
        h_alpha: v.height_factor(&cfg.alphas),
    };
    let fs = moment_seqs(cfg);
    let sign_odd = (n * big_m / m) % 2 == 1;

    let per_column: Vec<(bool, Vec<AuditEntry>, Option<AsymptoticEntry>)> = table
        .columns
        .par_iter()
        .map(|&col| {
            let mut out = Vec::new();
            let mut p = Poly::monomial(Rational::one(), col);
            let mut chain_bound = Rational::one();
            for (step, e) in (0..r).rev().enumerate() {
                let (img, factor) = ctx.step((m + 1).pow(e as u32) * n, &p, col, step, &mut out);
                p = img;
                chain_bound *= factor;
            }
            if sign_odd {
                p = -p;
            }
            let matches = p == table.p[col];
            let p = &table.p[col];
            let dp = deg(p);
            let norm_p = v.norm(p.coeffs());
            let mut biggest = Rational::zero();
            if let Some(beta) = beta {
                let h_beta = v.height_factor([beta]);
                let p_at = v.abs(&p.eval(beta));
                let bound =
                    pow_u(dp as u64 + 1, ctx.eps) * &chain_bound * rational::pow(&h_beta, dp);
                out.push(entry("p_at_beta", col, None, None, &p_at, &bound));
                biggest = p_at;
            }

            for (row, f) in table.rows.iter().zip(&fs) {
                for k in 0..=n + 1 {
                    let tp = p.shift(k);
                    let bound = functional_bound(v, dp + k, r, &ctx.h_alpha, &norm_p);
                    let measured = v.abs(&phi(f, &tp));
                    out.push(entry(
                        "functional_value",
                        col,
                        Some(row.label.clone()),
                        Some(k),
                        &measured,
                        &bound,
                    ));
                }
                let q = &row.q[col];
                let q_bound = functional_bound(v, dp, r, &ctx.h_alpha, &norm_p);
                out.push(entry(
                    "q_norm",
                    col,
                    Some(row.label.clone()),
                    None,
                    &v.norm(q.coeffs()),
                    &q_bound,
                ));
                if let Some(beta) = beta {
                    let h_beta = v.height_factor([beta]);
                    let q_at = v.abs(&q.eval(beta));
                    let chained = functional_bound(v, dp, r, &ctx.h_alpha, &chain_bound);
                    let bound = pow_u(deg(q) as u64 + 1, ctx.eps)
                        * chained
                        * rational::pow(&h_beta, deg(q));
                    out.push(entry(
                        "q_at_beta",
                        col,
                        Some(row.label.clone()),
                        None,
                        &q_at,
                        &bound,
                    ));
                    if q_at > biggest {
                        biggest = q_at;
                    }
                }
            }

            let asym = beta.map(|beta| {
                let rate = big_m as f64 * local_height(beta, v)
                    + ctx.eps as f64 * growth_constant(m, r)
                    + big_m as f64 * local_height_vec(&cfg.alphas, v)
                    + big_m as f64 / m as f64
                        * cfg.alphas.iter().map(|a| local_height(a, v)).sum::<f64>();
                let lcm_term = rational::ln_abs(&lcm_factor(v, big_m * n + big_m, r));
                AsymptoticEntry {
                    column: col,
                    measured: if biggest.is_zero() {
                        f64::NEG_INFINITY
                    } else {
                        rational::ln_abs(&biggest)
                    },
                    leading_order: n as f64 * rate + lcm_term,
                }
            });
            (matches, out, asym)
        })
        .collect();

    let chain_matches_table = per_column.iter().all(|(ok, _, _)| *ok);
    let mut entries = Vec::new();
    let mut asymptotic = Vec::new();
    for (_, e, a) in per_column {
        entries.extend(e);
        asymptotic.extend(a);
    }
    let all_hold = chain_matches_table && entries.iter().all(|e| e.holds);
    let beta = beta.map(rational::to_string);
    Ok(AuditReport {
        place: v,
        n,
        beta,
        chain_matches_table,
        entries,
        asymptotic,
        all_hold,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayPoint {
    pub n: usize,
    /// `log max |𝔑_{n,row,ℓ}(β)|_v` over rows and columns.
    #[serde(serialize_with = "ser_round")]
    pub log_remainder: f64,
    /// Largest number of series terms summed for any cell.
    pub terms: usize,
    /// Every cell met the stopping rule within the term limit.
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub place: Place,
    #[serde(serialize_with = "rational::serde_str::serialize")]
    pub beta: Rational,
    pub points: Vec<DecayPoint>,
    /// Least-squares slope of `log_remainder` against `n`.
    #[serde(serialize_with = "ser_round")]
    pub slope: f64,
    /// The predicted per-`n` decay rate.
    #[serde(serialize_with = "ser_round")]
    pub coefficient: f64,
    pub holds: bool,
}

/// Allowed excess of the measured slope over the predicted rate.
pub const SLOPE_TOLERANCE: f64 = 0.1;

const MAX_TERMS: usize = 1_500;

/// `𝔑(β) = Σ_{k≥0} φ(t^{k+n} P) / β^{k+n+1}` for one cell, summed exactly
/// until the tail is certified small. Returns `(|𝔑|_v as a log, terms, certified)`.
///
/// Tail control: `|φ(t^j P)|_v ≤ (j+D'+1)^e H^{j+D'+1} ‖P‖_v` with
/// `e = r+1` at the archimedean place and `e = r` at primes (using
/// `p^{⌊log_p N⌋} ≤ N`). Once consecutive majorants shrink by `ρ < 1`,
/// the archimedean tail is at most `T/(1-ρ)` and we stop when that is
/// below `10^{-3}` of the partial sum; at a prime the tail is at most `T`,
/// and once `T < |S|_p` the sum has exactly the absolute value of `S`.
fn remainder_at(
    f: &MomentSeq,
    p: &Poly,
    n: usize,
    beta: &Rational,
    v: Place,
    r: usize,
    h_alpha: &Rational,
) -> (f64, usize, bool) {
    let d0 = deg(p) + n;
    let e = match v {
        Place::Archimedean => r + 1,
        Place::Prime(_) => r,
    };
    let norm_p = v.norm(p.coeffs());
    let abs_beta = v.abs(beta);
    let ratio = h_alpha / &abs_beta;
    let inv_beta = beta.recip();
    let mut scale = rational::pow(&inv_beta, n + 1);
    let mut sum = Rational::zero();
    let tolerance = Rational::new(BigInt::one(), BigInt::from(1000));
    for k in 0..MAX_TERMS {
        // Majorant for the tail starting at term k.
        let top = (d0 + k + 1) as u64;
        let grow = Rational::new(
            BigInt::from(top + 1).pow(e as u32),
            BigInt::from(top).pow(e as u32),
        );
        let rho = &grow * &ratio;
        if rho < Rational::one() && !sum.is_zero() {
            let t = pow_u(top, e) * rational::pow(h_alpha, d0 + k + 1) * &norm_p
                / rational::pow(&abs_beta, k + n + 1);
            let abs_sum = v.abs(&sum);
            let done = match v {
                Place::Archimedean => t / (Rational::one() - rho) <= &tolerance * &abs_sum,
                Place::Prime(_) => t < abs_sum,
            };
            if done {
                return (rational::ln_abs(&abs_sum), k, true);
            }
        }
        sum += phi(f, &p.shift(k + n)) * &scale;
        scale *= &inv_beta;
    }
    let abs_sum = v.abs(&sum);
    let log = if abs_sum.is_zero() {
        f64::NEG_INFINITY
    } else {
        rational::ln_abs(&abs_sum)
    };
    (log, MAX_TERMS, false)
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// The predicted decay rate
/// `-h_v(β) + (M/m) Σ h_v(α_i) + (M+1) h_v(α) + ε (M log 2 + (r(r+1)/2) log(m+1) + r)`.
pub fn decay_coefficient(cfg: &MplConfig, beta: &Rational, v: Place) -> f64 {
    let big_m = cfg.big_m() as f64;
    -local_height(beta, v)
        + big_m / cfg.m as f64 * cfg.alphas.iter().map(|a| local_height(a, v)).sum::<f64>()
        + (big_m + 1.0) * local_height_vec(&cfg.alphas, v)
        + v.epsilon() as f64 * growth_constant(cfg.m, cfg.r)
}

/// Measures `log max |𝔑(β)|_v` for each `n` and fits a slope, which must not
/// exceed the predicted rate by more than [`SLOPE_TOLERANCE`].
pub fn remainder_decay(
    cfg: &MplConfig,
    beta: &Rational,
    v: Place,
    ns: &[usize],
) -> Result<DecayReport> {
    cfg.validate()?;
    let h_alpha = v.height_factor(&cfg.alphas);
    let abs_beta = v.abs(beta);
    if abs_beta <= h_alpha {
        return Err(Error::BadBeta {
            beta_abs: rational::to_string(&abs_beta),
            height: rational::to_string(&h_alpha),
        });
    }
    if ns.len() < 2 {
        return Err(Error::InvalidConfig("need at least two values of n".into()));
    }
    let fs = moment_seqs(cfg);
    let points: Vec<DecayPoint> = ns
        .iter()
        .map(|&n| {
            let table = crate::mpl::pade_table(cfg, n)?;
            let cells: Vec<(f64, usize, bool)> = table
                .p
                .par_iter()
                .flat_map_iter(|p| fs.iter().map(move |f| (f, p)))
                .map(|(f, p)| remainder_at(f, p, n, beta, v, cfg.r, &h_alpha))
                .collect();
            Ok(DecayPoint {
                n,
                log_remainder: cells.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max),
                terms: cells.iter().map(|c| c.1).max().unwrap_or(0),
                certified: cells.iter().all(|c| c.2),
            })
        })
        .collect::<Result<_>>()?;
    let finite: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.log_remainder.is_finite())
        .map(|p| (p.n as f64, p.log_remainder))
        .collect();
    let slope = if finite.len() >= 2 {
        fit_slope(&finite)
    } else {
        f64::NAN
    };
    let coefficient = decay_coefficient(cfg, beta, v);
    let holds = points.iter().all(|p| p.certified) && slope <= coefficient + SLOPE_TOLERANCE;
    Ok(DecayReport {
        place: v,
        beta: beta.clone(),
        points,
        slope,
        coefficient,
        holds,
    })
}
