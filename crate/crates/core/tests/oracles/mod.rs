//! Independent oracles shared by the solver tests and the acceptance target.

use fusloc::abelian::{abelianization, transfer, transfer_with_reps};
use fusloc::group::{FiniteGroup, Subgroup};
use fusloc::perm::Perm;

pub fn group(n: usize, gens: &[Vec<Vec<usize>>]) -> FiniteGroup {
    let gs: Vec<Perm> = gens.iter().map(|cs| Perm::from_cycles(n, cs).unwrap()).collect();
    FiniteGroup::generate(n, &gs).unwrap()
}

pub fn s4() -> FiniteGroup {
    group(4, &[vec![vec![0, 1]], vec![vec![0, 1, 2, 3]]])
}

pub fn d8() -> FiniteGroup {
    group(4, &[vec![vec![0, 1, 2, 3]], vec![vec![0, 2]]])
}

/// Lexicographically least solution by exhaustive search over the box.
pub fn search(a: &[Vec<i64>], b: &[i64], rows: &[u64], box_: &[u64]) -> Option<Vec<u64>> {
    let total: u64 = box_.iter().product();
    (0..total)
        .map(|code| {
            let mut c = code;
            let mut x = Vec::new();
            for &r in box_ {
                x.push(c % r);
                c /= r;
            }
            x
        })
        .filter(|x| {
            a.iter().zip(b).zip(rows).all(|((row, &bi), &m)| {
                let s: i64 = row.iter().zip(x).map(|(&p, &q)| p * q as i64).sum();
                (s - bi).rem_euclid(m as i64) == 0
            })
        })
        .min()
}

/// Transfer through right cosets `H = ⊔ K t_i`, `t_i h = k_i t_{σ(i)}`,
/// multiplying the `k_i` as group elements before projecting.
fn right_coset_transfer(g: &FiniteGroup, h: &Subgroup, k: &Subgroup, x: usize) -> usize {
    let mut reps: Vec<usize> = Vec::new();
    let mut covered = vec![false; g.order()];
    for t in h.ones().rev() {
        if covered[t] {
            continue;
        }
        reps.push(t);
        for y in k.ones() {
            covered[g.mul(y, t)] = true;
        }
    }
    let mut acc = 0;
    for &t in &reps {
        let th = g.mul(t, x);
        let s = reps.iter().copied().find(|&s| k.contains(g.mul(th, g.inv(s)))).unwrap();
        acc = g.mul(acc, g.mul(th, g.inv(s)));
    }
    acc
}

/// Checks the transfer of every pair `K ≤ H` against coset products and
/// against a second transversal; returns the number of pairs.
pub fn check_all_pairs(g: &FiniteGroup) -> usize {
    let mut pairs = 0;
    let subs = g.subgroups();
    for h in &subs {
        let abh = abelianization(g, h);
        for k in subs.iter().filter(|k| k.is_subset(h)) {
            let abk = abelianization(g, k);
            let t = transfer(g, h, k, &abh, &abk);
            assert!(t.is_well_defined());
            for x in h.ones() {
                let want = abk.project(right_coset_transfer(g, h, k, x)).to_vec();
                assert_eq!(t.apply(abh.project(x)), want);
            }
            // independent of the transversal: take greatest elements instead
            let mut reps = Vec::new();
            let mut covered = vec![false; g.order()];
            for r in h.ones().collect::<Vec<_>>().into_iter().rev() {
                if !covered[r] {
                    reps.push(r);
                    for y in k.ones() {
                        covered[g.mul(r, y)] = true;
                    }
                }
            }
            assert_eq!(transfer_with_reps(g, k, &reps, &abh, &abk), t);
            pairs += 1;
        }
    }
    pairs
}

