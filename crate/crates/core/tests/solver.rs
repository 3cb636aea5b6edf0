mod oracles;

use fusloc::abelian::{abelianization, transfer};
use fusloc::smith::{smith_solve, smith_solve_ext};
use fusloc::Error;
use oracles::{check_all_pairs, d8, s4, search};
use proptest::prelude::*;

fn system() -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<i64>, Vec<u64>, Vec<u64>)> {
    // at most 2^8 candidate vectors: unknowns in ℤ/2, ℤ/4 or ℤ/8 with total ≤ 256
    (1usize..=3, 1usize..=3)
        .prop_flat_map(|(m, n)| {
            (
                prop::collection::vec(prop::collection::vec(-9i64..9, n), m),
                prop::collection::vec(-9i64..9, m),
                prop::collection::vec(prop::sample::select(vec![2u64, 4, 8]), m),
                prop::collection::vec(prop::sample::select(vec![2u64, 4]), n),
            )
        })
        .prop_filter("≤ 2^8 candidates", |(_, _, _, c)| c.iter().product::<u64>() <= 256)
}

proptest! {
    #[test]
    fn solve_matches_exhaustive_search((a, b, rows, _cols) in system()) {
        // unknowns ranging over [0, N), N the lcm of the row moduli
        let n = rows.iter().copied().max().unwrap();
        let box_ = vec![n; a[0].len()];
        prop_assume!(box_.iter().product::<u64>() <= 256);
        let got = smith_solve(&a, &b, &rows);
        let want = search(&a, &b, &rows, &box_);
        match want {
            Some(x) => prop_assert_eq!(got.unwrap(), x),
            None => prop_assert_eq!(got, Err(Error::NoSolution)),
        }
    }

    #[test]
    fn column_moduli_match_search((a, b, rows, cols) in system()) {
        // make the map well defined on ⊕ ℤ/cols[j] by scaling columns
        let a: Vec<Vec<i64>> = a
            .iter()
            .zip(&rows)
            .map(|(r, &m)| r.iter().zip(&cols).map(|(&x, &c)| x * (m / std::cmp::min(m, c)) as i64).collect())
            .collect();
        let got = smith_solve_ext(&a, &b, &rows, &cols);
        let want = search(&a, &b, &rows, &cols);
        match want {
            Some(x) => prop_assert_eq!(got.unwrap(), x),
            None => prop_assert_eq!(got, Err(Error::NoSolution)),
        }
    }
}

#[test]
fn transfer_against_coset_products_d8() {
    check_all_pairs(&d8());
}

#[test]
fn transfer_against_coset_products_s4() {
    check_all_pairs(&s4());
}

#[test]
fn transfer_is_transitive() {
    for g in [d8(), s4()] {
        let subs = g.subgroups();
        for h in &subs {
            let abh = abelianization(&g, h);
            for k in subs.iter().filter(|k| k.is_subset(h)) {
                let abk = abelianization(&g, k);
                let hk = transfer(&g, h, k, &abh, &abk);
                for l in subs.iter().filter(|l| l.is_subset(k)) {
                    let abl = abelianization(&g, l);
                    let kl = transfer(&g, k, l, &abk, &abl);
                    assert_eq!(kl.compose(&hk), transfer(&g, h, l, &abh, &abl));
                }
            }
        }
    }
}
