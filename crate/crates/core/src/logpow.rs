//! Powers of `log(1 - 1/z)`: moments, the operators `E_n = z^n (z-1)^n ∂^n`
//! and `R_n = (1/(n!)^m) E_n^m`, and the resulting Padé tables.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rational::{self, Rational};
use crate::transform::{self, shifted_tail, MomentSeq, PadeCell, PadeTable};
use crate::weyl::DiffOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogPowConfig {
    /// Highest power of the logarithm.
    pub m: usize,
    pub n: usize,
}

impl LogPowConfig {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidConfig("m and n must be at least 1".into()));
        }
        Ok(LogPowConfig { m, n })
    }
}

/// Product of two power series in `w`, truncated to `len` terms.
fn mul_trunc(a: &[Rational], b: &[Rational], len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Moments `f_0, ..., f_{len-1}` of `log^s(1 - 1/z)`, i.e. the coefficients
/// of `w^{j+1}` in `(-Σ_{k≥1} w^k / k)^s`.
pub fn logpow_moments(s: usize, len: usize) -> Vec<Rational> {
    assert!(s >= 1);
    let terms = len + 1;
    let base: Vec<Rational> = (0..terms)
        .map(|k| {
            if k == 0 {
                Rational::zero()
            } else {
                -Rational::new(BigInt::one(), BigInt::from(k))
            }
        })
        .collect();
    let mut acc = base.clone();
    for _ in 1..s {
        acc = mul_trunc(&acc, &base, terms);
    }
    acc.split_off(1)
}

pub fn logpow_moment(s: usize, j: usize) -> Rational {
    logpow_moments(s, j + 1).pop().expect("nonempty")
}

pub fn moment_seq(s: usize) -> MomentSeq {
    MomentSeq::from_prefix_fn(format!("log^{s}"), move |n| logpow_moments(s, n))
}

/// `E_n = z^n (z-1)^n ∂^n`
pub fn build_en(n: usize) -> DiffOp {
    DiffOp::monomial(Poly::from_ints(&[0, -1, 1]).pow(n), n)
}

/// `R_n = (1/(n!)^m) E_n^m`
pub fn build_rn_log(n: usize, m: usize) -> DiffOp {
    let c = Rational::new(
        BigInt::one(),
        BigInt::from(rational::factorial(n as u64).pow(m as u32)),
    );
    build_en(n).pow(m).scale(&c)
}

/// Checks, for `n = 1..=n_max`,
/// `E_n = (E_1 - (n-1)(2z-1)) ... (E_1 - (2z-1)) E_1` and
/// `E_{n+1} z = z (E_1 - (n-1) z - 1) E_n`.
pub fn verify_en_identities(n_max: usize) -> bool {
    let e1 = build_en(1);
    let z = DiffOp::multiplication(Poly::z());
    (1..=n_max).all(|n| {
        let product = (1..n).fold(e1.clone(), |acc, i| {
            let shift = Poly::from_ints(&[-(i as i64), 2 * i as i64]);
            e1.sub(&DiffOp::multiplication(shift)).compose(&acc)
        });
        let first = product == build_en(n);

        let inner = e1.sub(&DiffOp::multiplication(Poly::from_ints(&[1, n as i64 - 1])));
        let second = build_en(n + 1).compose(&z) == z.compose(&inner).compose(&build_en(n));
        first && second
    })
}

pub fn moment_seqs(m: usize) -> Vec<MomentSeq> {
    (1..=m).map(moment_seq).collect()
}

pub fn logpow_table(config: &LogPowConfig) -> PadeTable {
    let rstar = build_rn_log(config.n, config.m).adjoint();
    PadeTable::build(&rstar, &moment_seqs(config.m), config.n)
}

pub fn logpow_pade(config: &LogPowConfig, column: usize) -> Result<PadeCell> {
    if column > config.m {
        return Err(Error::InvalidConfig(format!(
            "column {column} exceeds m = {}",
            config.m
        )));
    }
    Ok(logpow_table(config).cell(column))
}

pub fn logpow_delta(config: &LogPowConfig) -> Result<Rational> {
    transform::require_nonzero_constant(&transform::delta_det(&logpow_table(config)))
}

/// `E_n · z^{n-1} log^s(1-1/z)` lies in polynomials plus
/// `Σ_{j<s} K[z]_{≤n-1} log^j(1-1/z)`, checked by exact solve at `depth`.
pub fn basic_relation_check(n: usize, s: usize, depth: usize) -> Result<bool> {
    let (_, target) = build_en(n).apply_laurent(&shifted_tail(&moment_seq(s), n - 1, depth))?;
    Ok(transform::in_span_mod_poly(&target, &moment_seqs(s - 1), n))
}
