//! Linear recurrences satisfied by the moments of series `f` with
//! `L·f` polynomial, and solving them.
//!
//! For `f = Σ x_k z^{-(k+1)}` and `L = Σ (-1)^j a_{i,j} z^i ∂^j`, the
//! coefficient of `z^{-(k+1)}` in `L·f` is
//! `Σ_δ c_δ(k) x_{k+δ}` with `c_δ(k) = Σ_{i-j=δ} a_{i,j} (k+δ+1)_j`,
//! where terms with `k + δ < 0` are absent.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::Poly;
use crate::rational::{self, Rational};
use crate::transform::MomentSeq;
use crate::weyl::{rising_in_k, DiffOp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Shift {
    pub delta: i64,
    pub coeff_poly_in_k: Poly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecurrenceSystem {
    /// Weight order of the source operator; also the largest shift.
    pub d: i64,
    /// Nonzero shifts in increasing order of `delta`.
    pub shifts: Vec<Shift>,
    pub boundary_rules: Vec<String>,
}

pub fn recurrence_coeffs(l: &DiffOp) -> Result<RecurrenceSystem> {
    let d = l.ord_weight()?;
    let mut by_delta: std::collections::BTreeMap<i64, Poly> = Default::default();
    for j in 0..l.terms().len() {
        let a = l.signed_coeff(j);
        for (i, c) in a.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let delta = i as i64 - j as i64;
            let term = rising_in_k(delta + 1, j).scale(c);
            let e = by_delta.entry(delta).or_default();
            *e = &*e + &term;
        }
    }
    let shifts: Vec<Shift> = by_delta
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(delta, coeff_poly_in_k)| Shift {
            delta,
            coeff_poly_in_k,
        })
        .collect();
    let boundary_rules = shifts
        .iter()
        .filter(|s| s.delta < 0)
        .map(|s| format!("shift {} is absent for k < {}", s.delta, -s.delta))
        .collect();
    Ok(RecurrenceSystem {
        d,
        shifts,
        boundary_rules,
    })
}

impl RecurrenceSystem {
    /// Coefficient polynomial of the largest shift.
    pub fn leading(&self) -> Poly {
        self.shifts
            .iter()
            .find(|s| s.delta == self.d)
            .map(|s| s.coeff_poly_in_k.clone())
            .unwrap_or_default()
    }

    /// `Σ_δ c_δ(k) x_{k+δ}`; `x` must reach index `k + d`.
    pub fn residual(&self, k: usize, x: &[Rational]) -> Rational {
        let kr = rational::int(k as i64);
        self.shifts
            .iter()
            .filter(|s| k as i64 + s.delta >= 0)
            .map(|s| s.coeff_poly_in_k.eval(&kr) * &x[(k as i64 + s.delta) as usize])
            .sum()
    }

    /// Extends `init` (the first `d` terms) to `len` terms. The leading
    /// coefficient must not vanish at any `k` that is reached.
    fn extend(&self, init: &[Rational], len: usize) -> Vec<Rational> {
        let d = self.d as usize;
        let lead = self.leading();
        let mut x: Vec<Rational> = init.to_vec();
        x.resize(len.max(d), Rational::zero());
        x.truncate(len.max(d));
        let mut k = 0;
        while k + d < len {
            let kr = rational::int(k as i64);
            let rest: Rational = self
                .shifts
                .iter()
                .filter(|s| s.delta < self.d && k as i64 + s.delta >= 0)
                .map(|s| s.coeff_poly_in_k.eval(&kr) * &x[(k as i64 + s.delta) as usize])
                .sum();
            x[k + d] = -rest / lead.eval(&kr);
            k += 1;
        }
        x.truncate(len);
        x
    }
}

/// The element of `V_1(L)` whose first `d` moments are `init`.
pub fn solve_v1(l: &DiffOp, init: &[Rational], label: impl Into<String>) -> Result<MomentSeq> {
    let pp = l.property_p()?;
    if let Some(k) = pp.root {
        return Err(Error::PropertyPFailure(k));
    }
    if init.len() != pp.weight_order as usize {
        return Err(Error::InvalidConfig(format!(
            "expected {} initial moments, got {}",
            pp.weight_order,
            init.len()
        )));
    }
    let system = recurrence_coeffs(l)?;
    let init = init.to_vec();
    Ok(MomentSeq::from_prefix_fn(label, move |n| {
        system.extend(&init, n)
    }))
}

/// Whether the recurrence residual vanishes for `k < depth`.
pub fn check_membership(l: &DiffOp, f: &MomentSeq, depth: usize) -> Result<bool> {
    let system = recurrence_coeffs(l)?;
    let reach = (depth as i64 + system.d.max(0)) as usize;
    let x = f.prefix(reach);
    Ok((0..depth).all(|k| system.residual(k, &x).is_zero()))
}

/// Coordinates of `f` in the basis of `V_1(L)` obtained from unit seeds,
/// found by an exact solve on the first `2d` moments. `None` when `f` is
/// not in the span there.
pub fn coordinates(l: &DiffOp, f: &MomentSeq) -> Result<Option<Vec<Rational>>> {
    let d = l.ord_weight()?.max(0) as usize;
    let basis = unit_basis(l)?;
    let rows = 2 * d;
    let matrix: Vec<Vec<Rational>> = (0..rows)
        .map(|k| basis.iter().map(|b| b.get(k)).collect())
        .collect();
    Ok(linalg::solve(&matrix, &f.prefix(rows)))
}

/// Solutions seeded with the unit vectors `e_0, ..., e_{d-1}`.
pub fn unit_basis(l: &DiffOp) -> Result<Vec<MomentSeq>> {
    let d = l.ord_weight()?.max(0) as usize;
    (0..d)
        .map(|i| {
            let seed: Vec<Rational> = (0..d)
                .map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            solve_v1(l, &seed, format!("e{i}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::LaurentTail;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn e1() -> DiffOp {
        DiffOp::monomial(Poly::from_ints(&[0, -1, 1]), 1)
    }

    fn li(s: u32) -> MomentSeq {
        MomentSeq::from_fn(format!("Li_{s}"), move |k| rat(1, (k as i64 + 1).pow(s)))
    }

    #[test]
    fn e1_recurrence() {
        let sys = recurrence_coeffs(&e1()).unwrap();
        assert_eq!(sys.d, 1);
        // c_0(k) = k + 1, c_1(k) = -(k + 2)
        assert_eq!(
            sys.shifts,
            vec![
                Shift {
                    delta: 0,
                    coeff_poly_in_k: Poly::from_ints(&[1, 1])
                },
                Shift {
                    delta: 1,
                    coeff_poly_in_k: Poly::from_ints(&[-2, -1])
                },
            ]
        );
        assert_eq!(sys.leading(), e1().leading_symbol().unwrap());
        assert!(sys.boundary_rules.is_empty());
    }

    #[test]
    fn derivative_and_identity_force_zero() {
        let sys = recurrence_coeffs(&DiffOp::d()).unwrap();
        assert_eq!(sys.d, -1);
        assert_eq!(sys.shifts.len(), 1);
        assert_eq!(
            sys.boundary_rules,
            vec!["shift -1 is absent for k < 1".to_string()]
        );
        // -k x_{k-1} = 0 for all k forces x = 0; any nonzero x fails.
        let x = vec![int(0), int(1)];
        assert!(sys.residual(0, &x).is_zero());
        assert!(!sys.residual(2, &[int(0), int(1), int(0)]).is_zero());

        let sys = recurrence_coeffs(&DiffOp::identity()).unwrap();
        assert_eq!(sys.residual(0, &[int(3)]), int(3));
        assert!(matches!(
            recurrence_coeffs(&DiffOp::zero()),
            Err(Error::ZeroOperator)
        ));
    }

    #[test]
    fn solve_examples() {
        let f = solve_v1(&e1(), &[int(1)], "s").unwrap();
        assert_eq!(f.prefix(6), (1..=6).map(|k| rat(1, k)).collect::<Vec<_>>());
        let z = solve_v1(&e1(), &[int(0)], "z").unwrap();
        assert!(z.prefix(10).iter().all(|x| x.is_zero()));

        let bad = DiffOp::new(vec![Poly::from_ints(&[0, 2]), Poly::from_ints(&[0, 0, 1])]);
        assert!(matches!(
            solve_v1(&bad, &[int(1)], "b"),
            Err(Error::PropertyPFailure(0))
        ));
    }

    #[test]
    fn membership_examples() {
        assert!(check_membership(&e1(), &li(1), 50).unwrap());
        assert!(!check_membership(&e1(), &li(2), 50).unwrap());
        assert!(check_membership(&e1(), &MomentSeq::zero("0"), 50).unwrap());
    }

    #[test]
    fn second_order_space_has_full_rank() {
        let l = e1().compose(&e1());
        assert!(l.property_p().unwrap().holds);
        assert!(check_membership(&l, &li(1), 60).unwrap());
        assert!(!check_membership(&l, &li(2), 60).unwrap());
        let basis = unit_basis(&l).unwrap();
        let m: Vec<Vec<Rational>> = basis.iter().map(|b| b.prefix(4)).collect();
        assert_eq!(linalg::rank(&m), 2);
        let c = coordinates(&l, &li(1)).unwrap().unwrap();
        assert_eq!(c, vec![int(1), rat(1, 2)]);
        assert_eq!(coordinates(&l, &li(2)).unwrap(), None);
    }

    fn arb_op() -> impl Strategy<Value = DiffOp> {
        prop::collection::vec(prop::collection::vec(-4i64..5, 0..=4), 1..=3)
            .prop_map(|ts| DiffOp::new(ts.iter().map(|c| Poly::from_ints(c)).collect()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(80))]

        /// The residuals are exactly the tail coefficients of `L·f`
        /// computed by the series route.
        #[test]
        fn residuals_match_series_route(
            l in arb_op(),
            m in prop::collection::vec(-6i64..7, 40),
        ) {
            prop_assume!(!l.is_zero());
            let sys = recurrence_coeffs(&l).unwrap();
            let x: Vec<Rational> = m.iter().map(|&v| int(v)).collect();
            let (_, tail) = l.apply_laurent(&LaurentTail::from_moments(x.clone())).unwrap();
            let known = tail.known_through().unwrap();
            for k in 0..known {
                if (k as i64 + sys.d) < x.len() as i64 {
                    prop_assert_eq!(sys.residual(k, &x), tail.coeff(k + 1).unwrap());
                }
            }
        }

        #[test]
        fn solutions_are_members(l in arb_op(), seed in prop::collection::vec(-5i64..6, 4)) {
            prop_assume!(!l.is_zero());
            if let Ok(pp) = l.property_p() {
                if pp.holds {
                    let d = pp.weight_order as usize;
                    let init: Vec<Rational> = seed.iter().cycle().take(d).map(|&v| int(v)).collect();
                    let f = solve_v1(&l, &init, "x").unwrap();
                    prop_assert!(check_membership(&l, &f, 30).unwrap());
                    let (_, tail) = l.apply_laurent(&f.tail(30 + d + 4)).unwrap();
                    let k = tail.known_through().unwrap();
                    prop_assert!((1..=k).all(|i| tail.coeff(i).unwrap().is_zero()));
                }
            }
        }
    }
}
