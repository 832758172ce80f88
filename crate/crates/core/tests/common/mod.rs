//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rodpade::mpl::MplIndex;
use rodpade::Rational;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn z(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Coefficient of `z^{-(j+1)}` in `Li_s(x_1, ..., x_{k-1}, α_{i_k}/z)` with
/// `x_i = α_{a_i}/α_{a_{i+1}}`, by enumerating every chain
/// `0 < n_1 < ... < n_k = j+1` and multiplying `Π x_i^{n_i} / n_i^{s_i}`
/// term by term.
pub fn mpl_moment_by_chains(idx: &MplIndex, alphas: &[Rational], j: usize) -> Rational {
    let k = idx.s.len();
    let top = j + 1;
    let mut x: Vec<Rational> = (0..k - 1)
        .map(|i| &alphas[idx.a[i] - 1] / &alphas[idx.a[i + 1] - 1])
        .collect();
    x.push(alphas[idx.a[k - 1] - 1].clone());
    let mut total = Rational::zero();
    let mut chain = vec![0usize; k];
    chain[k - 1] = top;
    fn rec(
        level: usize,
        lo: usize,
        chain: &mut Vec<usize>,
        idx: &MplIndex,
        x: &[Rational],
        total: &mut Rational,
    ) {
        let k = chain.len();
        if level == k - 1 {
            if chain[k - 1] <= lo {
                return;
            }
            let mut term = Rational::one();
            for i in 0..k {
                let n = chain[i];
                term *= num_traits::pow(x[i].clone(), n);
                term /= Rational::from_integer(BigInt::from(n).pow(idx.s[i]));
            }
            *total += term;
            return;
        }
        for n in lo + 1..chain[k - 1] {
            chain[level] = n;
            rec(level + 1, n, chain, idx, x, total);
        }
    }
    rec(0, 0, &mut chain, idx, &x, &mut total);
    total
}

/// Unsigned Stirling numbers of the first kind `c(n, k)` for `n <= max`.
pub fn stirling_cycle(max: usize) -> Vec<Vec<BigUint>> {
    let mut c = vec![vec![BigUint::zero(); max + 1]; max + 1];
    c[0][0] = BigUint::one();
    for n in 1..=max {
        for k in 1..=n {
            c[n][k] = &c[n - 1][k - 1] + BigUint::from(n - 1) * &c[n - 1][k];
        }
    }
    c
}

/// Moment `j` of `log^s(1 - 1/z)` from
/// `(-log(1-w))^s / s! = Σ_n c(n, s) w^n / n!`.
pub fn logpow_moment_by_stirling(c: &[Vec<BigUint>], s: usize, j: usize) -> Rational {
    let n = j + 1;
    let fact = |k: usize| (1..=k).fold(BigUint::one(), |a, b| a * BigUint::from(b));
    let sign = if s % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    Rational::new(
        sign * BigInt::from(fact(s) * &c[n][s]),
        BigInt::from(fact(n)),
    )
}

/// The grid of configurations used by the acceptance criteria:
/// `(m, r, alphas, largest n)`.
pub fn grid() -> Vec<(usize, usize, Vec<Rational>, usize)> {
    vec![
        (1, 1, vec![z(1)], 4),
        (1, 2, vec![z(1)], 4),
        (2, 1, vec![z(1), z(2)], 4),
        (2, 2, vec![z(1), z(2)], 2),
    ]
}
