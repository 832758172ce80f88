//! Exact dense linear algebra: fraction-free (Bareiss) determinants over an
//! integral domain with exact division, plus rank and linear solves over the
//! rationals.

use num_traits::{One, Zero};

use crate::poly::Poly;
use crate::rational::Rational;

/// A commutative ring without zero divisors in which `exact_div(a, b)` is
/// only ever called when `b` divides `a`.
pub trait Domain: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn mul(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn exact_div(&self, rhs: &Self) -> Self;
}

impl Domain for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exact_div(&self, rhs: &Self) -> Self {
        self / rhs
    }
}

impl Domain for Poly {
    fn zero() -> Self {
        Poly::zero()
    }
    fn one() -> Self {
        Poly::one()
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exact_div(&self, rhs: &Self) -> Self {
        let (q, r) = self.div_rem(rhs);
        debug_assert!(r.is_zero(), "Bareiss division must be exact");
        q
    }
}

/// Determinant by Bareiss elimination. Every intermediate entry is a minor
/// of the input, so the divisions are exact.
pub fn det_bareiss<T: Domain>(matrix: &[Vec<T>]) -> T {
    let n = matrix.len();
    if n == 0 {
        return T::one();
    }
    assert!(matrix.iter().all(|r| r.len() == n), "matrix must be square");
    let mut a: Vec<Vec<T>> = matrix.to_vec();
    let mut prev = T::one();
    let mut negate = false;
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return T::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = t.exact_div(&prev);
            }
            a[i][k] = T::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        d.neg()
    } else {
        d
    }
}

/// Row echelon form over the rationals; returns the pivot columns.
fn echelon(a: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !Zero::is_zero(&a[i][c])) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !Zero::is_zero(&a[i][c]) {
                let f = a[i][c].clone();
                for j in c..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(matrix: &[Vec<Rational>]) -> usize {
    let mut a = matrix.to_vec();
    echelon(&mut a).len()
}

/// Some solution `x` of `A x = b`, or `None` when the system is inconsistent.
/// Free variables are set to zero.
pub fn solve(matrix: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(matrix.len(), rhs.len());
    let cols = matrix.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<Rational>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = echelon(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![<Rational as Zero>::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
        let n = m.len();
        if n == 0 {
            return int(1);
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<Rational>> = m[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let s = if j % 2 == 0 { int(1) } else { int(-1) };
                s * &m[0][j] * cofactor_det(&minor)
            })
            .sum()
    }

    #[test]
    fn small_determinants() {
        let m = vec![vec![int(1), int(2)], vec![int(3), int(4)]];
        assert_eq!(det_bareiss(&m), int(-2));
        let zero_pivot = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert_eq!(det_bareiss(&zero_pivot), int(-1));
        let singular = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert_eq!(det_bareiss(&singular), int(0));
    }

    #[test]
    fn polynomial_determinant() {
        // det [[1-2z, 2z-3z^2], [-2, 1/2-3z]] = 1/2
        let m = vec![
            vec![Poly::from_ints(&[1, -2]), Poly::from_ints(&[0, 2, -3])],
            vec![Poly::from_ints(&[-2]), Poly::new(vec![rat(1, 2), int(-3)])],
        ];
        assert_eq!(det_bareiss(&m), Poly::constant(rat(1, 2)));
    }

    #[test]
    fn solve_and_rank() {
        let a = vec![
            vec![int(1), int(1)],
            vec![int(1), int(-1)],
            vec![int(2), int(0)],
        ];
        assert_eq!(rank(&a), 2);
        let x = solve(&a, &[int(3), int(1), int(4)]).unwrap();
        assert_eq!(x, vec![int(2), int(1)]);
        assert!(solve(&a, &[int(3), int(1), int(5)]).is_none());
    }

    proptest! {
        #[test]
        fn bareiss_matches_cofactor_expansion(
            n in 1usize..5,
            entries in prop::collection::vec((-6i64..6, 1i64..4), 16)
        ) {
            let m: Vec<Vec<Rational>> = (0..n)
                .map(|i| (0..n).map(|j| { let (p, q) = entries[i * 4 + j]; rat(p, q) }).collect())
                .collect();
            prop_assert_eq!(det_bareiss(&m), cofactor_det(&m));
        }
    }
}
