//! Truncated Laurent series in `1/z` with no polynomial part.
//!
//! A [`LaurentTail`] stores the coefficients of `z^-start, z^-(start+1), ...`
//! that are provably correct. Every operation tracks how far its output is
//! determined by its inputs and never reports a coefficient past that point.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Degree, Poly};
use crate::rational::{self, Rational};

/// Order at infinity of a (possibly truncated) tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// The first nonzero coefficient is at `z^-k`.
    Finite(usize),
    /// The tail is exactly zero.
    Infinity,
    /// All known coefficients vanish; the order is at least this value.
    AtLeast(usize),
}

impl Order {
    /// Whether the order is provably at least `bound`.
    pub fn at_least(self, bound: usize) -> bool {
        match self {
            Order::Finite(k) | Order::AtLeast(k) => k >= bound,
            Order::Infinity => true,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::Infinity => write!(f, "inf"),
            Order::AtLeast(k) => write!(f, ">={k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentTail {
    start: usize,
    #[serde(with = "rational::serde_vec")]
    coeffs: Vec<Rational>,
    /// Every coefficient past the stored ones is zero.
    #[serde(default)]
    exact: bool,
}

impl LaurentTail {
    /// Tail `Σ coeffs[i] z^-(start+i)`; `exact` asserts the series stops there.
    pub fn new(start: usize, coeffs: Vec<Rational>, exact: bool) -> Self {
        assert!(start >= 1, "a tail starts at z^-1 or later");
        LaurentTail {
            start,
            coeffs,
            exact,
        }
    }

    /// `Σ_k f_k z^-(k+1)` from the moment sequence `f_0, f_1, ...`.
    pub fn from_moments(moments: Vec<Rational>) -> Self {
        LaurentTail::new(1, moments, false)
    }

    pub fn zero() -> Self {
        LaurentTail::new(1, Vec::new(), true)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn depth(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Largest `k` whose coefficient of `z^-k` is known (`None` when exact).
    pub fn known_through(&self) -> Option<usize> {
        if self.exact {
            None
        } else {
            Some(self.start + self.coeffs.len() - 1)
        }
    }

    fn last_stored(&self) -> usize {
        self.start + self.coeffs.len() - 1
    }

    /// Coefficient of `z^-k`, or `None` when it is not determined.
    pub fn coeff(&self, k: usize) -> Option<Rational> {
        assert!(k >= 1);
        if k < self.start {
            return Some(Rational::zero());
        }
        match self.coeffs.get(k - self.start) {
            Some(c) => Some(c.clone()),
            None if self.exact => Some(Rational::zero()),
            None => None,
        }
    }

    /// The coefficients of `z^-1 .. z^-upto`; panics if any is undetermined.
    pub fn dense(&self, upto: usize) -> Vec<Rational> {
        (1..=upto)
            .map(|k| self.coeff(k).expect("coefficient beyond known depth"))
            .collect()
    }

    /// Coefficients from `z^-1` through the last known one: the moment
    /// sequence `f_0, f_1, ...` of the tail.
    pub fn moments(&self) -> Vec<Rational> {
        self.dense(self.last_stored())
    }

    pub fn ord_inf(&self) -> Order {
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                return Order::Finite(self.start + i);
            }
        }
        if self.exact {
            Order::Infinity
        } else {
            Order::AtLeast(self.start + self.coeffs.len())
        }
    }

    /// Keep the coefficients through `z^-k` only.
    pub fn truncate_through(&self, k: usize) -> LaurentTail {
        if k < self.start {
            return LaurentTail::new(self.start, Vec::new(), false);
        }
        let keep = (k + 1 - self.start).min(self.coeffs.len());
        let exact = self.exact && keep == self.coeffs.len();
        LaurentTail::new(self.start, self.coeffs[..keep].to_vec(), exact)
    }

    pub fn scale(&self, c: &Rational) -> LaurentTail {
        LaurentTail::new(
            self.start,
            self.coeffs.iter().map(|a| a * c).collect(),
            self.exact,
        )
    }

    pub fn add(&self, other: &LaurentTail) -> LaurentTail {
        let start = self.start.min(other.start);
        let end = match (self.known_through(), other.known_through()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => self.last_stored().max(other.last_stored()),
        };
        let coeffs = (start..=end)
            .map(|k| self.coeff(k).unwrap() + other.coeff(k).unwrap())
            .collect::<Vec<_>>();
        LaurentTail::new(start, coeffs, self.exact && other.exact)
    }

    pub fn sub(&self, other: &LaurentTail) -> LaurentTail {
        self.add(&other.scale(&-Rational::one()))
    }

    /// `j`-th derivative in `z`.
    pub fn derive(&self, j: usize) -> LaurentTail {
        let sign = if j % 2 == 0 {
            Rational::one()
        } else {
            -Rational::one()
        };
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let rising = rational::pochhammer((self.start + i) as i64, j);
                c * Rational::from_integer(rising) * &sign
            })
            .collect();
        LaurentTail::new(self.start + j, coeffs, self.exact)
    }

    /// `P(z) · f(z)` split into its polynomial part and its tail. The tail is
    /// reported only as deep as the known coefficients of `f` determine it.
    pub fn mul_poly(&self, p: &Poly) -> Result<(Poly, LaurentTail)> {
        let e = match p.degree() {
            Degree::NegInfinity => return Ok((Poly::zero(), LaurentTail::zero())),
            Degree::Finite(e) => e,
        };
        let last = self.last_stored();
        // The constant term already needs f's coefficient of z^-e.
        if !self.exact && e > last {
            return Err(Error::InsufficientDepth {
                needed: e,
                available: last,
            });
        }
        let coeff_at = |x: i64| -> Rational {
            // coefficient of z^x in the product: Σ_u p_u f_{u - x}
            let mut acc = Rational::zero();
            for (u, pu) in p.coeffs().iter().enumerate() {
                let k = u as i64 - x;
                if k >= 1 && !pu.is_zero() {
                    acc += pu * self.coeff(k as usize).expect("depth checked");
                }
            }
            acc
        };
        let poly = Poly::new((0..e as i64).map(coeff_at).collect());
        let tail_end = if self.exact { last } else { last - e };
        let tail = (1..=tail_end as i64).map(|k| coeff_at(-k)).collect();
        Ok((poly, LaurentTail::new(1, tail, self.exact)))
    }
}

/// Free-function form of [`LaurentTail::ord_inf`].
pub fn ord_inf(f: &LaurentTail) -> Order {
    f.ord_inf()
}

/// Free-function form of [`LaurentTail::mul_poly`].
pub fn laurent_mul_poly(f: &LaurentTail, p: &Poly) -> Result<(Poly, LaurentTail)> {
    f.mul_poly(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn li1(depth: usize) -> LaurentTail {
        LaurentTail::from_moments((0..depth).map(|k| rat(1, k as i64 + 1)).collect())
    }

    #[test]
    fn ord_inf_cases() {
        let t = LaurentTail::new(2, vec![rat(-1, 6), rat(-1, 6)], false);
        assert_eq!(t.ord_inf(), Order::Finite(2));
        assert_eq!(LaurentTail::zero().ord_inf(), Order::Infinity);
        assert_eq!(
            LaurentTail::new(1, vec![int(1)], false).ord_inf(),
            Order::Finite(1)
        );
        let unknown = LaurentTail::new(3, vec![int(0), int(0)], false);
        assert_eq!(unknown.ord_inf(), Order::AtLeast(5));
        assert!(unknown.ord_inf().at_least(5));
        assert!(!unknown.ord_inf().at_least(6));
    }

    #[test]
    fn multiply_by_one_and_z() {
        let f = li1(10);
        let (p, t) = f.mul_poly(&Poly::one()).unwrap();
        assert!(p.is_zero());
        assert_eq!(t, f);

        let (p, t) = f.mul_poly(&Poly::z()).unwrap();
        assert_eq!(p, Poly::one());
        assert_eq!(t.depth(), 9);
        for k in 1..=9 {
            assert_eq!(t.coeff(k).unwrap(), rat(1, k as i64 + 1));
        }
        assert_eq!(t.coeff(10), None);
    }

    #[test]
    fn legendre_remainder_by_multiplication() {
        // (1 - 2z) Li_1(1/z): polynomial part -2, tail -1/6 z^-2 + ...
        let (p, t) = li1(12).mul_poly(&Poly::from_ints(&[1, -2])).unwrap();
        assert_eq!(p, Poly::from_ints(&[-2]));
        assert_eq!(t.coeff(1).unwrap(), int(0));
        assert_eq!(t.coeff(2).unwrap(), rat(-1, 6));
        assert_eq!(t.coeff(3).unwrap(), rat(-1, 6));
        assert_eq!(t.ord_inf(), Order::Finite(2));
    }

    #[test]
    fn insufficient_depth_for_polynomial_part() {
        let f = li1(2);
        assert!(matches!(
            f.mul_poly(&Poly::from_ints(&[0, 0, 0, 1])),
            Err(Error::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn derivative_of_inverse_z() {
        let t = LaurentTail::new(1, vec![int(1)], true);
        let d = t.derive(1);
        assert_eq!(d.coeff(2).unwrap(), int(-1));
        assert_eq!(d.ord_inf(), Order::Finite(2));
        assert_eq!(d.coeff(7).unwrap(), int(0));
    }

    #[test]
    fn exact_tails_stay_exact() {
        let t = LaurentTail::new(1, vec![int(1), int(2)], true);
        let (p, tail) = t.mul_poly(&Poly::from_ints(&[0, 1])).unwrap();
        assert_eq!(p, Poly::from_ints(&[1]));
        assert!(tail.is_exact());
        assert_eq!(tail.coeff(1).unwrap(), int(2));
        assert_eq!(tail.coeff(2).unwrap(), int(0));
    }

    fn arb_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
        prop::collection::vec(-9i64..9, 0..=max_deg + 1).prop_map(|v| Poly::from_ints(&v))
    }

    fn arb_tail() -> impl Strategy<Value = Vec<Rational>> {
        prop::collection::vec((-9i64..9, 1i64..5), 30..40)
            .prop_map(|v| v.into_iter().map(|(p, q)| rat(p, q)).collect())
    }

    proptest! {
        #[test]
        fn order_drops_by_at_most_degree(m in arb_tail(), p in arb_poly(6)) {
            prop_assume!(!p.is_zero());
            let f = LaurentTail::from_moments(m);
            let e = p.degree().finite().unwrap() as i64;
            let (poly, tail) = f.mul_poly(&p).unwrap();
            // ord_inf(P f) >= ord_inf(f) - deg P, on the full product
            let ord_f = match f.ord_inf() { Order::Finite(k) => k as i64, _ => return Ok(()) };
            let ord_prod = match poly.degree() {
                Degree::Finite(d) => -(d as i64),
                Degree::NegInfinity => match tail.ord_inf() {
                    Order::Finite(k) | Order::AtLeast(k) => k as i64,
                    Order::Infinity => i64::MAX,
                },
            };
            prop_assert!(ord_prod >= ord_f - e);
        }

        #[test]
        fn depth_never_overreports(m in arb_tail(), p in arb_poly(6)) {
            // A deeper copy of the same series must agree on every reported coefficient.
            let shallow = LaurentTail::from_moments(m[..20].to_vec());
            let deep = LaurentTail::from_moments(m.clone());
            let (ps, ts) = shallow.mul_poly(&p).unwrap();
            let (pd, td) = deep.mul_poly(&p).unwrap();
            prop_assert_eq!(ps, pd);
            for k in 1..=ts.depth() {
                prop_assert_eq!(ts.coeff(k), td.coeff(k));
            }
            let dz = deep.derive(2);
            let sz = shallow.derive(2);
            for k in 1..=sz.known_through().unwrap() {
                prop_assert_eq!(sz.coeff(k), dz.coeff(k));
            }
        }
    }
}
