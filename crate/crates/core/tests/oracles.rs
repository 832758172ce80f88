mod common;

use common::*;
use rodpade::logpow;
use rodpade::mpl::{self, index_set, MplConfig};

#[test]
fn mpl_moments_match_chain_enumeration() {
    for alphas in [
        vec![z(1)],
        vec![z(1), z(2)],
        vec![q(-1, 2), z(3)],
        vec![q(2, 3), q(-5, 7), z(4)],
    ] {
        let m = alphas.len();
        let cfg = MplConfig::new(m, 2, alphas.clone()).unwrap();
        for idx in index_set(m, 2) {
            let fast = mpl::mpl_moments(&idx, &alphas, 30);
            for (j, v) in fast.iter().enumerate() {
                assert_eq!(*v, mpl_moment_by_chains(&idx, &alphas, j), "{idx} j={j}");
            }
            assert_eq!(mpl::mpl_moment(&idx, 17, &cfg), fast[17]);
        }
    }
}

#[test]
fn depth_three_moments() {
    let alphas = vec![z(1), q(1, 2)];
    for idx in index_set(2, 3).into_iter().filter(|i| i.s.len() == 3) {
        let fast = mpl::mpl_moments(&idx, &alphas, 15);
        for (j, v) in fast.iter().enumerate() {
            assert_eq!(*v, mpl_moment_by_chains(&idx, &alphas, j));
        }
    }
}

#[test]
fn logpow_moments_match_stirling_numbers() {
    let c = stirling_cycle(42);
    for s in 1..=4 {
        let series = logpow::logpow_moments(s, 41);
        for (j, v) in series.iter().enumerate() {
            assert_eq!(*v, logpow_moment_by_stirling(&c, s, j), "s={s} j={j}");
        }
    }
}
