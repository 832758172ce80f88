//! Multiple polylogarithms `Li_s(α_{i_1}/α_{i_2}, ..., α_{i_k}/z)`, the
//! operators that annihilate them modulo polynomials, and their Padé tables.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rational::{self, Rational};
use crate::transform::{self, shifted_tail, MomentSeq, PadeTable};
use crate::weyl::DiffOp;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MplConfig {
    pub m: usize,
    pub r: usize,
    #[serde(with = "rational::serde_vec")]
    pub alphas: Vec<Rational>,
}

impl MplConfig {
    pub fn new(m: usize, r: usize, alphas: Vec<Rational>) -> Result<Self> {
        let cfg = MplConfig { m, r, alphas };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.r == 0 {
            return Err(Error::InvalidConfig("m and r must be at least 1".into()));
        }
        if self.alphas.len() != self.m {
            return Err(Error::InvalidConfig(format!(
                "expected {} alphas, got {}",
                self.m,
                self.alphas.len()
            )));
        }
        validate_alphas(&self.alphas)
    }

    /// Number of functions, `(m+1)^r - 1`.
    pub fn big_m(&self) -> usize {
        (self.m + 1).pow(self.r as u32) - 1
    }
}

/// Alphas must be nonzero and pairwise distinct.
pub fn validate_alphas(alphas: &[Rational]) -> Result<()> {
    for (i, a) in alphas.iter().enumerate() {
        if a.is_zero() || alphas[..i].contains(a) {
            return Err(Error::DegenerateAlphas);
        }
    }
    Ok(())
}

/// A depth-`k` index: weights `s` and 1-based alpha indices `a`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MplIndex {
    pub s: Vec<u32>,
    pub a: Vec<usize>,
}

impl MplIndex {
    pub fn depth(&self) -> usize {
        self.s.len()
    }

    pub fn weight(&self) -> u32 {
        self.s.iter().sum()
    }

    /// Row label used in tables, e.g. `s=(1,1);a=(1,2)`.
    pub fn label(&self) -> String {
        format!("s=({});a=({})", join(&self.s), join(&self.a))
    }

    /// The series evaluated at `z = beta`, with the ratios written out,
    /// e.g. `Li_1(1/30)` or `Li_(1,1)(1/2,2/3)`.
    pub fn value_label(&self, alphas: &[Rational], beta: &Rational) -> String {
        let args: Vec<String> = (0..self.depth())
            .map(|i| {
                let num = &alphas[self.a[i] - 1];
                let den = if i + 1 < self.depth() {
                    &alphas[self.a[i + 1] - 1]
                } else {
                    beta
                };
                rational::to_string(&(num / den))
            })
            .collect();
        let s = if self.depth() == 1 {
            self.s[0].to_string()
        } else {
            format!("({})", join(&self.s))
        };
        format!("Li_{s}({})", args.join(","))
    }
}

impl fmt::Display for MplIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// All indices with `1 <= k <= r` and `|s| <= r`, ordered by depth, then
/// `s` lexicographically, then `a` lexicographically.
pub fn index_set(m: usize, r: usize) -> Vec<MplIndex> {
    let mut out = Vec::new();
    for k in 1..=r {
        let mut comps = Vec::new();
        compositions(k, r, &mut Vec::new(), &mut comps);
        comps.sort();
        let words = words(m, k);
        for s in &comps {
            for a in &words {
                out.push(MplIndex {
                    s: s.clone(),
                    a: a.clone(),
                });
            }
        }
    }
    out
}

/// Sequences of `k` positive integers with sum at most `budget`.
fn compositions(k: usize, budget: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() == k {
        out.push(prefix.clone());
        return;
    }
    let left = k - prefix.len() - 1;
    for v in 1..=budget.saturating_sub(left) {
        prefix.push(v as u32);
        compositions(k, budget - v, prefix, out);
        prefix.pop();
    }
}

/// `[1, m]^k` in lexicographic order.
fn words(m: usize, k: usize) -> Vec<Vec<usize>> {
    (0..k).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|w| {
                (1..=m).map(move |i| {
                    let mut w = w.clone();
                    w.push(i);
                    w
                })
            })
            .collect()
    })
}

/// Moments `f_0, ..., f_{len-1}` of `Li_s(α_{i_1}/α_{i_2}, ..., α_{i_k}/z)`.
///
/// The coefficient of `z^{-N}` is the sum over `0 < n_1 < ... < n_k = N`
/// of `α_{i_1}^{n_1} α_{i_2}^{n_2 - n_1} ... α_{i_k}^{n_k - n_{k-1}} / Π n_i^{s_i}`,
/// accumulated level by level: `A_1(n) = α_{i_1}^n / n^{s_1}` and
/// `A_j(n) = B_j(n) / n^{s_j}` with `B_j(n) = α_{i_j} (B_j(n-1) + A_{j-1}(n-1))`.
pub fn mpl_moments(idx: &MplIndex, alphas: &[Rational], len: usize) -> Vec<Rational> {
    let top = len + 1;
    let alpha = |level: usize| &alphas[idx.a[level] - 1];
    let inv_pow = |n: usize, s: u32| Rational::new(BigInt::one(), BigInt::from(n).pow(s));
    let mut prev: Vec<Rational> = vec![Rational::zero(); top];
    let mut pw = Rational::one();
    for n in 1..top {
        pw *= alpha(0);
        prev[n] = &pw * inv_pow(n, idx.s[0]);
    }
    for level in 1..idx.depth() {
        let a = alpha(level);
        let mut cur = vec![Rational::zero(); top];
        let mut b = Rational::zero();
        for n in 1..top {
            b = a * (&b + &prev[n - 1]);
            cur[n] = &b * inv_pow(n, idx.s[level]);
        }
        prev = cur;
    }
    prev.into_iter().skip(1).collect()
}

/// The single moment `f_j`.
pub fn mpl_moment(idx: &MplIndex, j: usize, config: &MplConfig) -> Rational {
    mpl_moments(idx, &config.alphas, j + 1)
        .pop()
        .expect("nonempty")
}

/// Memoized moment sequence of one row, labelled by [`MplIndex::label`].
pub fn moment_seq(idx: &MplIndex, config: &MplConfig) -> MomentSeq {
    let idx2 = idx.clone();
    let alphas = config.alphas.clone();
    MomentSeq::from_prefix_fn(idx.label(), move |n| mpl_moments(&idx2, &alphas, n))
}

pub fn moment_seqs(config: &MplConfig) -> Vec<MomentSeq> {
    index_set(config.m, config.r)
        .iter()
        .map(|i| moment_seq(i, config))
        .collect()
}

/// `a(z) = z Π (z - α_i)`
fn base_poly(config: &MplConfig) -> Poly {
    config
        .alphas
        .iter()
        .fold(Poly::z(), |acc, a| &acc * &Poly::linear_root(a))
}

/// `L_N = (1/N!) z^N Π (z - α_i)^N ∂^N`
pub fn build_ln(big_n: usize, config: &MplConfig) -> DiffOp {
    let c = Rational::new(BigInt::one(), rational::factorial(big_n as u64).into());
    DiffOp::monomial(base_poly(config).pow(big_n).scale(&c), big_n)
}

/// `R_n = L_{(m+1)^{r-1} n} ∘ ... ∘ L_{(m+1) n} ∘ L_n`
pub fn build_rn(n: usize, config: &MplConfig) -> DiffOp {
    (0..config.r).fold(DiffOp::identity(), |acc, e| {
        build_ln((config.m + 1).pow(e as u32) * n, config).compose(&acc)
    })
}

/// The operator whose solution space is spanned by the rows.
pub fn build_l(config: &MplConfig) -> DiffOp {
    build_rn(1, config)
}

pub fn pade_table(config: &MplConfig, n: usize) -> Result<PadeTable> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    config.validate()?;
    let rstar = build_rn(n, config).adjoint();
    Ok(PadeTable::build(&rstar, &moment_seqs(config), n))
}

/// The determinant of the full table, which must be a nonzero constant.
pub fn delta_constant(config: &MplConfig, n: usize) -> Result<Rational> {
    transform::require_nonzero_constant(&transform::delta_det(&pade_table(config, n)?))
}

/// Default truncation depth for membership checks.
pub fn default_depth(config: &MplConfig, n: usize) -> usize {
    let big_m = config.big_m();
    40usize.max(2 * big_m * n + big_m + 5)
}

/// Checks that `L_n · z^k f_idx` lies in polynomials plus
/// `Σ_{idx' of weight < r} K[z]_{<(m+1)n} f_idx'`, by an exact linear solve
/// on the first `depth` moments.
pub fn cascade_check(
    config: &MplConfig,
    n: usize,
    k: usize,
    idx: &MplIndex,
    depth: usize,
) -> Result<bool> {
    let f = moment_seq(idx, config);
    let (_, target) = build_ln(n, config).apply_laurent(&shifted_tail(&f, k, depth))?;
    let lower: Vec<MomentSeq> = if config.r > 1 {
        index_set(config.m, config.r - 1)
            .iter()
            .map(|i| moment_seq(i, config))
            .collect()
    } else {
        Vec::new()
    };
    Ok(transform::in_span_mod_poly(
        &target,
        &lower,
        (config.m + 1) * n,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomic;
    use crate::linalg;
    use crate::rational::{int, rat};
    use crate::transform::annihilates;

    fn cfg(m: usize, r: usize, alphas: &[i64]) -> MplConfig {
        MplConfig::new(m, r, alphas.iter().map(|&a| int(a)).collect()).unwrap()
    }

    fn idx(s: &[u32], a: &[usize]) -> MplIndex {
        MplIndex {
            s: s.to_vec(),
            a: a.to_vec(),
        }
    }

    /// Direct enumeration of `0 < n_1 < ... < n_k = j + 1` with the ratio
    /// arguments raised to their own powers.
    fn oracle(ix: &MplIndex, alphas: &[Rational], j: usize) -> Rational {
        let k = ix.depth();
        let top = j + 1;
        let args: Vec<Rational> = (0..k - 1)
            .map(|i| &alphas[ix.a[i] - 1] / &alphas[ix.a[i + 1] - 1])
            .collect();
        fn go(
            level: usize,
            lo: usize,
            ns: &mut Vec<usize>,
            k: usize,
            top: usize,
            out: &mut Vec<Vec<usize>>,
        ) {
            if level == k - 1 {
                ns.push(top);
                out.push(ns.clone());
                ns.pop();
                return;
            }
            for n in lo..top {
                ns.push(n);
                go(level + 1, n + 1, ns, k, top, out);
                ns.pop();
            }
        }
        let mut chains = Vec::new();
        go(0, 1, &mut Vec::new(), k, top, &mut chains);
        let last = &alphas[ix.a[k - 1] - 1];
        chains
            .iter()
            .map(|ns| {
                let mut term = rational::pow(last, top);
                for (i, &n) in ns.iter().enumerate() {
                    if i + 1 < k {
                        term *= rational::pow(&args[i], n);
                    }
                    term /= int(n as i64).pow(ix.s[i] as i32);
                }
                term
            })
            .sum()
    }

    #[test]
    fn index_sets() {
        assert_eq!(index_set(1, 1), vec![idx(&[1], &[1])]);
        assert_eq!(
            index_set(1, 2),
            vec![idx(&[1], &[1]), idx(&[2], &[1]), idx(&[1, 1], &[1, 1])]
        );
        for (m, r) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 2), (1, 3), (2, 3)] {
            assert_eq!(index_set(m, r).len(), (m + 1).pow(r as u32) - 1);
        }
    }

    #[test]
    fn moment_examples() {
        let c1 = cfg(1, 2, &[1]);
        for j in 0..10 {
            assert_eq!(mpl_moment(&idx(&[1], &[1]), j, &c1), rat(1, j as i64 + 1));
            assert_eq!(
                mpl_moment(&idx(&[2], &[1]), j, &c1),
                rat(1, (j as i64 + 1).pow(2))
            );
        }
        let c2 = cfg(2, 2, &[1, 2]);
        assert_eq!(mpl_moment(&idx(&[1, 1], &[1, 2]), 1, &c2), int(1));
        // Depth-2 moments start at j = 1, one step before `j >= k`.
        assert_eq!(mpl_moment(&idx(&[1, 1], &[1, 1]), 0, &c1), int(0));
        assert_ne!(mpl_moment(&idx(&[1, 1], &[1, 1]), 1, &c1), int(0));
    }

    #[test]
    fn moments_match_enumeration() {
        for alphas in [vec![int(1)], vec![int(1), int(2)], vec![rat(-1, 2), int(3)]] {
            let m = alphas.len();
            for ix in index_set(m, 2) {
                let fast = mpl_moments(&ix, &alphas, 25);
                for (j, v) in fast.iter().enumerate() {
                    assert_eq!(*v, oracle(&ix, &alphas, j), "{ix} j={j}");
                }
            }
        }
    }

    #[test]
    fn operators() {
        let c = cfg(1, 1, &[1]);
        assert_eq!(
            build_ln(1, &c),
            DiffOp::monomial(Poly::from_ints(&[0, -1, 1]), 1)
        );
        assert_eq!(
            build_ln(2, &c),
            DiffOp::monomial(
                Poly::new(vec![int(0), int(0), rat(1, 2), int(-1), rat(1, 2)]),
                2
            )
        );
        assert_eq!(build_rn(1, &c), build_ln(1, &c));
        let c2 = cfg(1, 2, &[1]);
        assert_eq!(
            build_rn(1, &c2),
            build_ln(2, &c2).compose(&build_ln(1, &c2))
        );
        for (m, r, al) in [
            (1, 1, vec![1]),
            (2, 1, vec![1, 2]),
            (1, 2, vec![1]),
            (2, 2, vec![1, 2]),
        ] {
            let c = cfg(m, r, &al);
            for n in 1..=3 {
                let ln = build_ln(n, &c);
                assert_eq!(ln.ord_weight().unwrap(), (m * n) as i64);
                assert!(ln.property_p().unwrap().holds);
                let rn = build_rn(n, &c);
                assert_eq!(rn.ord_weight().unwrap(), (c.big_m() * n) as i64);
                assert!(rn.property_p().unwrap().holds);
            }
        }
    }

    #[test]
    fn legendre_table() {
        let c = cfg(1, 1, &[1]);
        let t = pade_table(&c, 1).unwrap();
        assert_eq!(t.p[0], Poly::from_ints(&[1, -2]));
        assert_eq!(t.rows[0].q[0], Poly::from_ints(&[-2]));
        assert_eq!(t.p[1], Poly::from_ints(&[0, 2, -3]));
        assert_eq!(t.rows[0].q[1], Poly::new(vec![rat(1, 2), int(-3)]));
        assert_eq!(delta_constant(&c, 1).unwrap(), rat(1, 2));
        assert!(matches!(pade_table(&c, 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn column_degrees() {
        let c = cfg(1, 2, &[1]);
        let t = pade_table(&c, 2).unwrap();
        assert_eq!(t.p[3].degree().finite(), Some(9));
        assert!(t.verify(&moment_seqs(&c)).unwrap().ok);
    }

    #[test]
    fn rows_span_solution_space() {
        let c = cfg(2, 2, &[1, 2]);
        let l = build_l(&c);
        let fs = moment_seqs(&c);
        for f in &fs {
            assert!(
                holonomic::check_membership(&l, f, 40).unwrap(),
                "{}",
                f.label()
            );
            assert!(holonomic::coordinates(&l, f).unwrap().is_some());
        }
        let d = c.big_m();
        let m: Vec<Vec<Rational>> = fs.iter().map(|f| f.prefix(2 * d)).collect();
        assert_eq!(linalg::rank(&m), d);
    }

    #[test]
    fn rodrigues_membership_and_cascade() {
        let c = cfg(1, 2, &[1]);
        for n in 1..=2 {
            let rn = build_rn(n, &c);
            for ix in index_set(1, 2) {
                let f = moment_seq(&ix, &c);
                for k in 0..n {
                    assert!(annihilates(&rn, &f, k, default_depth(&c, n)).unwrap());
                    assert!(cascade_check(&c, n, k, &ix, 40).unwrap());
                }
            }
        }
    }

    #[test]
    fn labels() {
        let alphas = vec![int(1), int(2)];
        assert_eq!(idx(&[1], &[1]).value_label(&alphas, &int(30)), "Li_1(1/30)");
        assert_eq!(
            idx(&[1, 2], &[1, 2]).value_label(&alphas, &int(3)),
            "Li_(1,2)(1/2,2/3)"
        );
        assert_eq!(idx(&[1, 2], &[2, 1]).label(), "s=(1,2);a=(2,1)");
    }

    #[test]
    fn degenerate_alphas_rejected() {
        assert_eq!(
            MplConfig::new(2, 1, vec![int(1), int(1)]),
            Err(Error::DegenerateAlphas)
        );
        assert_eq!(
            MplConfig::new(1, 1, vec![int(0)]),
            Err(Error::DegenerateAlphas)
        );
        assert!(matches!(
            MplConfig::new(2, 1, vec![int(1)]),
            Err(Error::InvalidConfig(_))
        ));
    }
}
