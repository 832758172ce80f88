//! Differential operators with polynomial coefficients (the Weyl algebra
//! `Q[z, ∂]`), kept in the normal form `Σ_j b_j(z) ∂^j`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::laurent::LaurentTail;
use crate::poly::{Degree, Poly};
use crate::rational::{self, Rational};

/// `Σ_j terms[j](z) ∂^j`, coefficients to the left of the derivatives.
/// The highest stored term is nonzero, so the zero operator has no terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiffOp {
    terms: Vec<Poly>,
}

impl DiffOp {
    pub fn new(mut terms: Vec<Poly>) -> Self {
        while terms.last().is_some_and(|p| p.is_zero()) {
            terms.pop();
        }
        DiffOp { terms }
    }

    pub fn zero() -> Self {
        DiffOp { terms: Vec::new() }
    }

    pub fn identity() -> Self {
        DiffOp::multiplication(Poly::one())
    }

    /// The order-zero operator "multiply by `p`".
    pub fn multiplication(p: Poly) -> Self {
        DiffOp::new(vec![p])
    }

    /// `p(z) ∂^j`
    pub fn monomial(p: Poly, j: usize) -> Self {
        let mut terms = vec![Poly::zero(); j + 1];
        terms[j] = p;
        DiffOp::new(terms)
    }

    /// `∂`
    pub fn d() -> Self {
        DiffOp::monomial(Poly::one(), 1)
    }

    pub fn terms(&self) -> &[Poly] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest power of `∂` (`None` for the zero operator).
    pub fn order(&self) -> Option<usize> {
        self.terms.len().checked_sub(1)
    }

    /// Coefficient `b_j` of `∂^j` in normal form.
    pub fn coeff(&self, j: usize) -> Poly {
        self.terms.get(j).cloned().unwrap_or_default()
    }

    /// `a_j` in the alternating convention `L = Σ (-1)^j a_j(z) ∂^j`.
    pub fn signed_coeff(&self, j: usize) -> Poly {
        let b = self.coeff(j);
        if j % 2 == 0 {
            b
        } else {
            -b
        }
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let n = self.terms.len().max(other.terms.len());
        DiffOp::new((0..n).map(|j| &self.coeff(j) + &other.coeff(j)).collect())
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> DiffOp {
        DiffOp::new(self.terms.iter().map(|p| p.scale(c)).collect())
    }

    /// Normal form of `self ∘ other`, using
    /// `∂^i b(z) = Σ_l C(i, l) b^(l)(z) ∂^(i-l)`.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        if self.is_zero() || other.is_zero() {
            return DiffOp::zero();
        }
        let mut out = vec![Poly::zero(); self.terms.len() + other.terms.len() - 1];
        for (i, a) in self.terms.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.terms.iter().enumerate() {
                for l in 0..=i {
                    let db = b.derive(l);
                    if db.is_zero() {
                        break;
                    }
                    let c = Rational::from_integer(BigInt::from(rational::binomial(
                        i as u64, l as u64,
                    )));
                    let term = (a * &db).scale(&c);
                    out[i - l + j] = &out[i - l + j] + &term;
                }
            }
        }
        DiffOp::new(out)
    }

    /// `L^n`
    pub fn pow(&self, n: usize) -> DiffOp {
        let mut acc = DiffOp::identity();
        for _ in 0..n {
            acc = acc.compose(self);
        }
        acc
    }

    /// `L · P = Σ_j b_j P^(j)`
    pub fn apply(&self, p: &Poly) -> Poly {
        self.terms
            .iter()
            .enumerate()
            .fold(Poly::zero(), |acc, (j, b)| &acc + &(b * &p.derive(j)))
    }

    /// `L · f` for a tail `f`, split as (polynomial part, tail). The tail is
    /// the projection that drops polynomials; it is as deep as `f` allows.
    pub fn apply_laurent(&self, f: &LaurentTail) -> Result<(Poly, LaurentTail)> {
        let mut poly = Poly::zero();
        let mut tail = LaurentTail::zero();
        for (j, b) in self.terms.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            let (p, t) = f.derive(j).mul_poly(b)?;
            poly = &poly + &p;
            tail = tail.add(&t);
        }
        Ok((poly, tail))
    }

    /// [`DiffOp::apply_laurent`] with the tail truncated to `depth`
    /// coefficients; fails when `f` cannot determine that many.
    pub fn apply_laurent_to_depth(
        &self,
        f: &LaurentTail,
        depth: usize,
    ) -> Result<(Poly, LaurentTail)> {
        let (p, t) = self.apply_laurent(f)?;
        if let Some(k) = t.known_through() {
            if k < depth {
                return Err(Error::InsufficientDepth {
                    needed: depth,
                    available: k,
                });
            }
        }
        Ok((p, t.truncate_through(depth)))
    }

    /// The formal adjoint `Σ_j (-1)^j ∂^j b_j(t)`, normal-ordered.
    pub fn adjoint(&self) -> DiffOp {
        let n = self.terms.len();
        let mut out = vec![Poly::zero(); n];
        for (j, b) in self.terms.iter().enumerate() {
            let sign = if j % 2 == 0 {
                Rational::one()
            } else {
                -Rational::one()
            };
            for l in 0..=j {
                let db = b.derive(l);
                if db.is_zero() {
                    break;
                }
                let c =
                    Rational::from_integer(BigInt::from(rational::binomial(j as u64, l as u64)));
                out[j - l] = &out[j - l] + &db.scale(&(c * &sign));
            }
        }
        DiffOp::new(out)
    }

    /// Order with weights `+1` on `z` and `-1` on `∂`: `max_j (deg b_j - j)`.
    pub fn ord_weight(&self) -> Result<i64> {
        self.terms
            .iter()
            .enumerate()
            .filter_map(|(j, b)| b.degree().finite().map(|d| d as i64 - j as i64))
            .max()
            .ok_or(Error::ZeroOperator)
    }

    /// Leading coefficient in `t` of `L* · t^k`, as a polynomial in `k`:
    /// `S(k) = Σ_{deg a_j - j = d} lc(a_j) (k + d + 1)_j`.
    pub fn leading_symbol(&self) -> Result<Poly> {
        let d = self.ord_weight()?;
        let mut s = Poly::zero();
        for j in 0..self.terms.len() {
            let a = self.signed_coeff(j);
            if let Degree::Finite(deg) = a.degree() {
                if deg as i64 - j as i64 == d {
                    s = &s + &rising_in_k(d + 1, j).scale(&a.leading_coeff());
                }
            }
        }
        Ok(s)
    }

    /// Property (P): the leading symbol has no root among `k = 0, 1, 2, ...`.
    pub fn property_p(&self) -> Result<PropertyP> {
        let d = self.ord_weight()?;
        if d < 1 {
            return Err(Error::WeightOrderTooSmall(d));
        }
        let symbol = self.leading_symbol()?;
        let root = first_nonnegative_integer_root(&symbol);
        Ok(PropertyP {
            holds: root.is_none(),
            weight_order: d,
            symbol,
            root,
        })
    }
}

/// Outcome of the property (P) test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyP {
    pub holds: bool,
    pub weight_order: i64,
    pub symbol: Poly,
    /// Smallest nonnegative integer root of the symbol, if any.
    pub root: Option<u64>,
}

/// `(k + c)_j = (k + c)(k + c + 1)...(k + c + j - 1)` as a polynomial in `k`.
pub(crate) fn rising_in_k(c: i64, j: usize) -> Poly {
    (0..j as i64).fold(Poly::one(), |acc, i| {
        &acc * &Poly::new(vec![rational::int(c + i), Rational::one()])
    })
}

/// Smallest root in `{0, 1, 2, ...}` of a nonzero polynomial.
///
/// Real roots lie below the Cauchy bound `1 + max |a_i / a_n|`; that range is
/// bisected over integer endpoints with exact Sturm counts, so only
/// intervals that contain a root are ever refined.
pub fn first_nonnegative_integer_root(p: &Poly) -> Option<u64> {
    assert!(!p.is_zero());
    if p.eval(&Rational::zero()).is_zero() {
        return Some(0);
    }
    if p.degree() == Degree::Finite(0) {
        return None;
    }
    let lc = p.leading_coeff();
    let n = p.coeffs().len() - 1;
    let bound = p.coeffs()[..n]
        .iter()
        .map(|c| (c / &lc).abs())
        .fold(Rational::zero(), |a, b| if b > a { b } else { a })
        + Rational::one();
    let hi = bound.ceil().to_integer();
    let sturm = Sturm::new(p);
    sturm
        .first_integer_root(BigInt::zero(), hi)
        .map(|k| k.to_u64().expect("root fits in u64"))
}

/// Sturm sequence of the squarefree part of a polynomial.
struct Sturm {
    seq: Vec<Poly>,
}

impl Sturm {
    fn new(p: &Poly) -> Self {
        let sf = p.div_rem(&p.gcd(&p.derive(1))).0;
        let mut seq = vec![sf.clone(), sf.derive(1)];
        loop {
            let len = seq.len();
            let r = seq[len - 2].div_rem(&seq[len - 1]).1;
            if r.is_zero() {
                break;
            }
            seq.push(-r);
        }
        Sturm { seq }
    }

    fn variations(&self, x: &BigInt) -> usize {
        let x = Rational::from_integer(x.clone());
        let signs: Vec<bool> = self
            .seq
            .iter()
            .map(|q| q.eval(&x))
            .filter(|v| !v.is_zero())
            .map(|v| v.is_positive())
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct roots in `(a, b]`.
    fn count(&self, a: &BigInt, b: &BigInt) -> usize {
        self.variations(a) - self.variations(b)
    }

    /// Smallest integer root in `(lo, hi]`.
    fn first_integer_root(&self, lo: BigInt, hi: BigInt) -> Option<BigInt> {
        if self.count(&lo, &hi) == 0 {
            return None;
        }
        if &hi - &lo == BigInt::one() {
            let h = Rational::from_integer(hi.clone());
            return self.seq[0].eval(&h).is_zero().then_some(hi);
        }
        let mid: BigInt = (&lo + &hi) / 2;
        self.first_integer_root(lo, mid.clone())
            .or_else(|| self.first_integer_root(mid, hi))
    }
}

/// Free-function forms of the operator API.
pub fn op_compose(l1: &DiffOp, l2: &DiffOp) -> DiffOp {
    l1.compose(l2)
}

pub fn op_apply(l: &DiffOp, p: &Poly) -> Poly {
    l.apply(p)
}

pub fn adjoint(l: &DiffOp) -> DiffOp {
    l.adjoint()
}

pub fn ord_weight(l: &DiffOp) -> Result<i64> {
    l.ord_weight()
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, b) in self.terms.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "[{b}]")?,
                1 => write!(f, "[{b}]∂")?,
                _ => write!(f, "[{b}]∂^{j}")?,
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    order: usize,
    coeff: Poly,
}

impl Serialize for DiffOp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nonzero: Vec<_> = self
            .terms
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.is_zero())
            .collect();
        let mut seq = s.serialize_seq(Some(nonzero.len()))?;
        for (j, b) in nonzero {
            seq.serialize_element(&TermJson {
                order: j,
                coeff: b.clone(),
            })?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for DiffOp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<TermJson>::deserialize(d)?;
        let n = terms.iter().map(|t| t.order + 1).max().unwrap_or(0);
        let mut out = vec![Poly::zero(); n];
        for t in terms {
            out[t.order] = &out[t.order] + &t.coeff;
        }
        Ok(DiffOp::new(out))
    }
}
