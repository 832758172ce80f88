//! Places and heights over the rationals, `lcm(1..n)`, the quantity `V`
//! that decides the linear-independence criterion, and bound audits.

mod audit;

pub use audit::{bounds_audit, remainder_decay, AuditEntry, AuditReport, DecayPoint, DecayReport};

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mpl::{index_set, validate_alphas};
use crate::rational::{self, Rational};

/// A place of the rationals. Over `Q` every local degree is 1, so the
/// normalized absolute values are the usual ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    Archimedean,
    Prime(u64),
}

impl Place {
    /// 1 at the archimedean place, 0 at primes.
    pub fn epsilon(self) -> u32 {
        match self {
            Place::Archimedean => 1,
            Place::Prime(_) => 0,
        }
    }

    pub fn is_archimedean(self) -> bool {
        self == Place::Archimedean
    }

    /// `|x|_v` as an exact rational.
    pub fn abs(self, x: &Rational) -> Rational {
        match self {
            Place::Archimedean => x.abs(),
            Place::Prime(p) => {
                if x.is_zero() {
                    return Rational::zero();
                }
                let v = rational::valuation(x, p);
                let pp = BigInt::from(p).pow(v.unsigned_abs() as u32);
                if v >= 0 {
                    Rational::new(BigInt::one(), pp)
                } else {
                    Rational::from_integer(pp)
                }
            }
        }
    }

    /// `max(1, |x_1|_v, ..., |x_k|_v)`
    pub fn height_factor<'a>(self, xs: impl IntoIterator<Item = &'a Rational>) -> Rational {
        xs.into_iter()
            .map(|x| self.abs(x))
            .fold(Rational::one(), |a, b| if b > a { b } else { a })
    }

    /// `max_k |p_k|_v` over the coefficients of a polynomial.
    pub fn norm(self, coeffs: &[Rational]) -> Rational {
        coeffs
            .iter()
            .map(|c| self.abs(c))
            .fold(Rational::zero(), |a, b| if b > a { b } else { a })
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean => write!(f, "inf"),
            Place::Prime(p) => write!(f, "p{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" || s == "∞" {
            return Ok(Place::Archimedean);
        }
        let bad = || Error::InvalidConfig(format!("place must be `inf` or `p<prime>`, got {s:?}"));
        let p: u64 = s
            .strip_prefix('p')
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        if !is_prime(p) {
            return Err(bad());
        }
        Ok(Place::Prime(p))
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// `h_v(x) = log max(1, |x|_v)`
pub fn local_height(x: &Rational, v: Place) -> f64 {
    rational::ln_abs(&v.height_factor([x]))
}

/// `h_v` of a vector.
pub fn local_height_vec(xs: &[Rational], v: Place) -> f64 {
    rational::ln_abs(&v.height_factor(xs))
}

/// Absolute height of a vector: with `D` the lcm of the denominators,
/// `H(x) = max(D, |D x_1|, ..., |D x_k|)`.
pub fn height_vec(xs: &[Rational]) -> f64 {
    let d = xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let dq = Rational::from_integer(d.clone());
    let top = xs
        .iter()
        .map(|x| (x * &dq).abs())
        .fold(dq.clone(), |a, b| if b > a { b } else { a });
    rational::ln_abs(&top)
}

/// `h(x) = log max(|num|, |den|)`
pub fn height(x: &Rational) -> f64 {
    height_vec(std::slice::from_ref(x))
}

/// Local heights of a rational at every place where they are nonzero.
#[derive(Debug, Clone, Serialize)]
pub struct HeightProfile {
    #[serde(serialize_with = "rational::serde_str::serialize")]
    pub value: Rational,
    /// `(place, h_v)` for the archimedean place and each prime of the
    /// denominator.
    pub local: Vec<(Place, f64)>,
    pub global: f64,
}

pub fn height_profile(x: &Rational) -> Result<HeightProfile> {
    let den = x
        .denom()
        .to_u64()
        .ok_or_else(|| Error::InvalidConfig("denominator too large to factor".into()))?;
    let mut local = vec![(Place::Archimedean, local_height(x, Place::Archimedean))];
    for p in prime_factors(den) {
        local.push((Place::Prime(p), local_height(x, Place::Prime(p))));
    }
    Ok(HeightProfile {
        value: x.clone(),
        local,
        global: height(x),
    })
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Primes up to `n` by the sieve of Eratosthenes.
pub fn primes_upto(n: usize) -> Vec<usize> {
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

/// `lcm(1, ..., n) = Π_{p ≤ n} p^{⌊log_p n⌋}`
pub fn lcm_upto(n: usize) -> BigUint {
    let factors: Vec<BigUint> = primes_upto(n)
        .into_iter()
        .map(|p| {
            let mut q = p;
            while q <= n / p {
                q *= p;
            }
            BigUint::from(q)
        })
        .collect();
    product_tree(&factors)
}

fn product_tree(xs: &[BigUint]) -> BigUint {
    match xs.len() {
        0 => BigUint::one(),
        1 => xs[0].clone(),
        n => product_tree(&xs[..n / 2]) * product_tree(&xs[n / 2..]),
    }
}

/// Exponent of `p` in `lcm(1..n)`.
pub fn lcm_valuation(n: usize, p: u64) -> u32 {
    let mut e = 0;
    let mut q = p as u128;
    while q <= n as u128 {
        e += 1;
        q *= p as u128;
    }
    e
}

/// Rounds to 15 significant digits so printed reals are reproducible.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().expect("formatted float parses")
}

fn ser_round<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x))
}

/// The constant part `M log 2 + (r(r+1)/2) log(m+1) + r`.
pub fn growth_constant(m: usize, r: usize) -> f64 {
    let big_m = ((m + 1).pow(r as u32) - 1) as f64;
    big_m * 2f64.ln() + (r * (r + 1)) as f64 / 2.0 * ((m + 1) as f64).ln() + r as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct VValue {
    #[serde(serialize_with = "ser_round")]
    pub value: f64,
    #[serde(serialize_with = "ser_round")]
    pub error_bound: f64,
}

fn check_shape(alphas: &[Rational], m: usize, r: usize) -> Result<()> {
    if m == 0 || r == 0 {
        return Err(Error::InvalidConfig("m and r must be at least 1".into()));
    }
    if alphas.len() != m {
        return Err(Error::InvalidConfig(format!(
            "expected {m} alphas, got {}",
            alphas.len()
        )));
    }
    validate_alphas(alphas)
}

/// `V = (M+1) h_v(β) - h_v(α) - M (h(β) + (1/m) Σ h(α_i) + h(α))
///      - (M log 2 + (r(r+1)/2) log(m+1) + r + r M)`
pub fn v_value(
    alphas: &[Rational],
    beta: &Rational,
    m: usize,
    r: usize,
    v0: Place,
) -> Result<VValue> {
    check_shape(alphas, m, r)?;
    let big_m = ((m + 1).pow(r as u32) - 1) as f64;
    let terms = [
        (big_m + 1.0) * local_height(beta, v0),
        -local_height_vec(alphas, v0),
        -big_m * height(beta),
        -big_m / m as f64 * alphas.iter().map(height).sum::<f64>(),
        -big_m * height_vec(alphas),
        -(growth_constant(m, r) + r as f64 * big_m),
    ];
    let value: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    Ok(VValue {
        value,
        error_bound: 1e-14 * scale.max(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    NonPositive,
    Indeterminate,
}

/// Values of `|V|` below this are reported as indeterminate.
pub const V_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionConfig {
    pub m: usize,
    pub r: usize,
    #[serde(serialize_with = "rational::serde_vec::serialize")]
    pub alphas: Vec<Rational>,
    #[serde(serialize_with = "rational::serde_str::serialize")]
    pub beta: Rational,
    pub place: Place,
}

#[derive(Debug, Clone, Serialize)]
pub struct Heights {
    #[serde(serialize_with = "ser_round")]
    pub beta_local: f64,
    #[serde(serialize_with = "ser_round")]
    pub alpha_local: f64,
    #[serde(serialize_with = "ser_round")]
    pub beta_global: f64,
    pub alpha_i_global: Vec<f64>,
    #[serde(serialize_with = "ser_round")]
    pub alpha_global: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisChecks {
    /// `|β|_{v0} > H_{v0}(α)`
    pub beta_dominates_alpha: bool,
    pub v_positive: Sign,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub config: CriterionConfig,
    pub heights: Heights,
    #[serde(rename = "V")]
    pub v: VValue,
    pub hypothesis_checks: HypothesisChecks,
    /// Values declared linearly independent together with 1; empty unless
    /// both hypotheses hold.
    pub conclusion: Vec<String>,
    /// Products `Li_{s_1}(α_{i_1}/β) ... Li_{s_k}(α_{i_k}/β)`, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product_conclusion: Option<Vec<String>>,
}

impl CriterionReport {
    pub fn passes(&self) -> bool {
        self.hypothesis_checks.beta_dominates_alpha
            && self.hypothesis_checks.v_positive == Sign::Positive
    }
}

pub fn evaluate_criterion(
    alphas: &[Rational],
    beta: &Rational,
    m: usize,
    r: usize,
    v0: Place,
    with_products: bool,
) -> Result<CriterionReport> {
    let v = v_value(alphas, beta, m, r, v0)?;
    let dominates = v0.abs(beta) > v0.height_factor(alphas);
    let sign = if v.value.abs() < V_TOLERANCE.max(v.error_bound) {
        Sign::Indeterminate
    } else if v.value > 0.0 {
        Sign::Positive
    } else {
        Sign::NonPositive
    };
    let heights = Heights {
        beta_local: local_height(beta, v0),
        alpha_local: local_height_vec(alphas, v0),
        beta_global: height(beta),
        alpha_i_global: alphas.iter().map(|a| round_sig(height(a))).collect(),
        alpha_global: height_vec(alphas),
    };
    let ok = dominates && sign == Sign::Positive;
    let indices = index_set(m, r);
    let conclusion = if ok {
        indices
            .iter()
            .map(|i| i.value_label(alphas, beta))
            .collect()
    } else {
        Vec::new()
    };
    let product_conclusion = with_products.then(|| {
        if !ok {
            return Vec::new();
        }
        indices
            .iter()
            .map(|i| {
                i.s.iter()
                    .zip(&i.a)
                    .map(|(s, a)| {
                        format!("Li_{s}({})", rational::to_string(&(&alphas[a - 1] / beta)))
                    })
                    .collect::<Vec<_>>()
                    .join("*")
            })
            .collect()
    });
    Ok(CriterionReport {
        config: CriterionConfig {
            m,
            r,
            alphas: alphas.to_vec(),
            beta: beta.clone(),
            place: v0,
        },
        heights,
        v,
        hypothesis_checks: HypothesisChecks {
            beta_dominates_alpha: dominates,
            v_positive: sign,
        },
        conclusion,
        product_conclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn absolute_values_and_local_heights() {
        assert!((local_height(&int(30), Place::Archimedean) - 30f64.ln()).abs() < 1e-15);
        assert!((local_height(&rat(1, 2), Place::Prime(2)) - 2f64.ln()).abs() < 1e-15);
        for v in [Place::Archimedean, Place::Prime(2), Place::Prime(7)] {
            assert_eq!(local_height(&int(1), v), 0.0);
        }
        assert_eq!(Place::Prime(3).abs(&rat(18, 5)), rat(1, 9));
        assert_eq!(Place::Prime(5).abs(&rat(18, 5)), int(5));
        assert_eq!("p3".parse::<Place>().unwrap(), Place::Prime(3));
        assert_eq!("inf".parse::<Place>().unwrap(), Place::Archimedean);
        assert!("p4".parse::<Place>().is_err());
        assert!("x".parse::<Place>().is_err());
    }

    #[test]
    fn lcm_values() {
        assert_eq!(lcm_upto(5), BigUint::from(60u32));
        assert_eq!(lcm_upto(1), BigUint::one());
        assert_eq!(lcm_upto(10), BigUint::from(2520u32));
        assert_eq!(lcm_valuation(10, 2), 3);
        assert_eq!(lcm_valuation(10, 11), 0);
        let brute = (1..=30u32).fold(BigUint::one(), |acc, k| acc.lcm(&BigUint::from(k)));
        assert_eq!(lcm_upto(30), brute);
    }

    #[test]
    fn v_examples() {
        let a = [int(1)];
        let v30 = v_value(&a, &int(30), 1, 1, Place::Archimedean)
            .unwrap()
            .value;
        assert!((v30 - (30f64.ln() - 2.0 * 2f64.ln() - 2.0)).abs() < 1e-12);
        assert!((v30 - 0.0149).abs() < 1e-4);
        let v29 = v_value(&a, &int(29), 1, 1, Place::Archimedean)
            .unwrap()
            .value;
        assert!((v29 + 0.0190).abs() < 1e-4);
        let v1 = v_value(&a, &int(1), 1, 1, Place::Archimedean)
            .unwrap()
            .value;
        assert!((v1 + 2.0 * 2f64.ln() + 2.0).abs() < 1e-12);
        assert_eq!(
            v_value(&[int(1), int(1)], &int(3), 2, 1, Place::Archimedean).unwrap_err(),
            Error::DegenerateAlphas
        );
    }

    #[test]
    fn threshold_is_thirty() {
        let a = [int(1)];
        let vs: Vec<f64> = (2..=60)
            .map(|b| {
                v_value(&a, &int(b), 1, 1, Place::Archimedean)
                    .unwrap()
                    .value
            })
            .collect();
        assert!(vs.windows(2).all(|w| w[1] > w[0]));
        let first = (2..=60).find(|&b| vs[(b - 2) as usize] > 0.0).unwrap();
        assert_eq!(first, 30);
    }

    #[test]
    fn criterion_reports() {
        let r = evaluate_criterion(&[int(1)], &int(30), 1, 1, Place::Archimedean, false).unwrap();
        assert!(r.passes());
        assert_eq!(r.conclusion, vec!["Li_1(1/30)".to_string()]);

        let r = evaluate_criterion(&[int(1)], &int(2), 1, 1, Place::Archimedean, false).unwrap();
        assert_eq!(r.hypothesis_checks.v_positive, Sign::NonPositive);
        assert!(r.conclusion.is_empty());

        let r =
            evaluate_criterion(&[int(1), int(2)], &int(3), 2, 1, Place::Archimedean, true).unwrap();
        assert!(r.hypothesis_checks.beta_dominates_alpha);
        assert_eq!(r.conclusion.is_empty(), r.v.value <= 0.0);
    }

    #[test]
    fn profile_of_fraction() {
        let p = height_profile(&rat(-45, 28)).unwrap();
        let places: Vec<Place> = p.local.iter().map(|(v, _)| *v).collect();
        assert_eq!(
            places,
            vec![Place::Archimedean, Place::Prime(2), Place::Prime(7)]
        );
        let sum: f64 = p.local.iter().map(|(_, h)| h).sum();
        assert!((sum - 45f64.ln()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn product_formula(num in -100000i64..100000, den in 1i64..100000) {
            prop_assume!(num != 0);
            let x = rat(num, den);
            // exact: the product of max(1, |x|_v) over all places is max(|a|, |b|)
            let mut prod = Place::Archimedean.height_factor([&x]);
            for p in prime_factors(x.denom().to_u64().unwrap()) {
                prod *= Place::Prime(p).height_factor([&x]);
            }
            let expect = std::cmp::max(x.numer().abs(), x.denom().clone());
            prop_assert_eq!(prod, Rational::from_integer(expect));
            let p = height_profile(&x).unwrap();
            let sum: f64 = p.local.iter().map(|(_, h)| h).sum();
            prop_assert!((sum - p.global).abs() <= 1e-12 * p.global.max(1.0));
        }
    }
}
