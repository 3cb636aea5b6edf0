//! Fully enumerated permutation groups and their subgroups.
//!
//! Elements are sorted lexicographically by image array, so the identity is
//! always index 0. Subgroups are bitsets over element indices.

use std::collections::{HashMap, HashSet, VecDeque};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::perm::Perm;

pub const DEFAULT_CAP: usize = 50_000;
const TABLE_LIMIT: usize = 2048;

pub type Subgroup = FixedBitSet;

#[derive(Clone, Debug)]
pub struct FiniteGroup {
    degree: usize,
    gens: Vec<Perm>,
    elems: Vec<Perm>,
    index: HashMap<Perm, usize>,
    table: Option<Vec<u32>>,
    inv: Vec<usize>,
}

impl FiniteGroup {
    pub fn generate(degree: usize, gens: &[Perm]) -> Result<Self> {
        Self::generate_capped(degree, gens, DEFAULT_CAP)
    }

    pub fn generate_capped(degree: usize, gens: &[Perm], cap: usize) -> Result<Self> {
        for g in gens {
            if g.degree() != degree {
                return Err(Error::Parse(format!(
                    "generator {g:?} has degree {} but {degree} was declared",
                    g.degree()
                )));
            }
        }
        let id = Perm::identity(degree);
        let mut seen: HashSet<Perm> = HashSet::new();
        seen.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = x.compose(g);
                if !seen.contains(&y) {
                    if seen.len() >= cap {
                        return Err(Error::ClosureTooLarge { cap });
                    }
                    seen.insert(y.clone());
                    queue.push_back(y);
                }
            }
        }
        let mut elems: Vec<Perm> = seen.into_iter().collect();
        elems.sort();
        Ok(Self::from_sorted(degree, gens.to_vec(), elems))
    }

    fn from_sorted(degree: usize, gens: Vec<Perm>, elems: Vec<Perm>) -> Self {
        let n = elems.len();
        let index: HashMap<Perm, usize> =
            elems.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let table = (n <= TABLE_LIMIT).then(|| {
            let mut t = vec![0u32; n * n];
            for a in 0..n {
                for b in 0..n {
                    t[a * n + b] = index[&elems[a].compose(&elems[b])] as u32;
                }
            }
            t
        });
        let inv = elems.iter().map(|p| index[&p.inverse()]).collect();
        FiniteGroup { degree, gens, elems, index, table, inv }
    }

    /// The subgroup of `self` on the given element set, as a group in its own right.
    pub fn subgroup_as_group(&self, h: &Subgroup) -> FiniteGroup {
        let gens = self.generators_of(h).into_iter().map(|i| self.elems[i].clone()).collect();
        let mut elems: Vec<Perm> = h.ones().map(|i| self.elems[i].clone()).collect();
        elems.sort();
        Self::from_sorted(self.degree, gens, elems)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn generators(&self) -> &[Perm] {
        &self.gens
    }

    pub fn generator_indices(&self) -> Vec<usize> {
        self.gens.iter().map(|g| self.index[g]).collect()
    }

    pub fn elem(&self, i: usize) -> &Perm {
        &self.elems[i]
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elems
    }

    pub fn index_of(&self, p: &Perm) -> Option<usize> {
        self.index.get(p).copied()
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.elems.len() + b] as usize,
            None => self.index[&self.elems[a].compose(&self.elems[b])],
        }
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// `g x g⁻¹`.
    #[inline]
    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv[g])
    }

    pub fn pow(&self, a: usize, mut e: u64) -> usize {
        let mut base = a;
        let mut acc = 0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn elem_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn whole(&self) -> Subgroup {
        let mut s = FixedBitSet::with_capacity(self.order());
        s.insert_range(..);
        s
    }

    pub fn trivial(&self) -> Subgroup {
        self.set_of(&[0])
    }

    pub fn set_of(&self, xs: &[usize]) -> Subgroup {
        let mut s = FixedBitSet::with_capacity(self.order());
        for &x in xs {
            s.insert(x);
        }
        s
    }

    /// Subgroup generated by the given elements.
    pub fn closure(&self, gens: &[usize]) -> Subgroup {
        let mut s = self.trivial();
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !s.contains(y) {
                    s.insert(y);
                    queue.push_back(y);
                }
            }
        }
        s
    }

    pub fn is_subgroup(&self, h: &Subgroup) -> bool {
        if !h.contains(0) {
            return false;
        }
        let xs: Vec<usize> = h.ones().collect();
        xs.iter().all(|&a| xs.iter().all(|&b| h.contains(self.mul(a, b))))
    }

    /// A small generating set: greedily adds the least element not yet covered.
    pub fn generators_of(&self, h: &Subgroup) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut cur = self.trivial();
        for x in h.ones() {
            if !cur.contains(x) {
                gens.push(x);
                cur = self.closure(&gens);
            }
        }
        gens
    }

    pub fn conj_subgroup(&self, g: usize, h: &Subgroup) -> Subgroup {
        let mut s = FixedBitSet::with_capacity(self.order());
        for x in h.ones() {
            s.insert(self.conj(g, x));
        }
        s
    }

    pub fn normalizer(&self, within: &Subgroup, h: &Subgroup) -> Subgroup {
        let mut s = FixedBitSet::with_capacity(self.order());
        for g in within.ones() {
            if h.ones().all(|x| h.contains(self.conj(g, x))) {
                s.insert(g);
            }
        }
        s
    }

    pub fn centralizer(&self, within: &Subgroup, h: &Subgroup) -> Subgroup {
        let mut s = FixedBitSet::with_capacity(self.order());
        for g in within.ones() {
            if h.ones().all(|x| self.mul(g, x) == self.mul(x, g)) {
                s.insert(g);
            }
        }
        s
    }

    pub fn center(&self, h: &Subgroup) -> Subgroup {
        self.centralizer(h, h)
    }

    /// `{g ∈ within : g R g⁻¹ ⊆ Q}`.
    pub fn transporter(&self, within: &Subgroup, q: &Subgroup, r: &Subgroup) -> Vec<usize> {
        within.ones().filter(|&g| r.ones().all(|x| q.contains(self.conj(g, x)))).collect()
    }

    /// All subgroups of `h`, each exactly once, sorted by order then by element list.
    pub fn subgroups_of(&self, h: &Subgroup) -> Vec<Subgroup> {
        let mut cyclic: Vec<Subgroup> = Vec::new();
        let mut seen: HashSet<Subgroup> = HashSet::new();
        for x in h.ones() {
            let c = self.closure(&[x]);
            if seen.insert(c.clone()) {
                cyclic.push(c);
            }
        }
        let mut all: Vec<Subgroup> = cyclic.clone();
        let mut frontier = cyclic.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for a in &frontier {
                for c in &cyclic {
                    if c.is_subset(a) {
                        continue;
                    }
                    let gens: Vec<usize> = a.ones().chain(c.ones()).collect();
                    let j = self.closure(&self.generators_of_set(&gens));
                    if seen.insert(j.clone()) {
                        next.push(j.clone());
                        all.push(j);
                    }
                }
            }
            frontier = next;
        }
        all.sort_by_cached_key(|s| (s.count_ones(..), s.ones().collect::<Vec<_>>()));
        all
    }

    fn generators_of_set(&self, xs: &[usize]) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut cur = self.trivial();
        for &x in xs {
            if !cur.contains(x) {
                gens.push(x);
                cur = self.closure(&gens);
            }
        }
        gens
    }

    pub fn subgroups(&self) -> Vec<Subgroup> {
        self.subgroups_of(&self.whole())
    }

    /// Left cosets `g H` of `h` inside `within`, each given by its least element.
    pub fn left_transversal(&self, within: &Subgroup, h: &Subgroup) -> Vec<usize> {
        let mut covered = FixedBitSet::with_capacity(self.order());
        let mut reps = Vec::new();
        for g in within.ones() {
            if covered.contains(g) {
                continue;
            }
            reps.push(g);
            for x in h.ones() {
                covered.insert(self.mul(g, x));
            }
        }
        reps
    }

    /// Subgroup generated by all elements of order prime to `p`.
    pub fn o_p_prime_generated(&self, within: &Subgroup, p: u64) -> Subgroup {
        let gens: Vec<usize> =
            within.ones().filter(|&x| self.elem_order(x) as u64 % p != 0).collect();
        self.closure(&self.generators_of_set(&gens))
    }

    /// `O^p(H)`: generated by the `p′`-elements.
    pub fn o_upper_p(&self, within: &Subgroup, p: u64) -> Subgroup {
        self.o_p_prime_generated(within, p)
    }

    /// Derived subgroup by commutator closure.
    pub fn derived(&self, within: &Subgroup) -> Subgroup {
        let xs: Vec<usize> = within.ones().collect();
        let mut comms = Vec::new();
        let mut seen = FixedBitSet::with_capacity(self.order());
        for &a in &xs {
            for &b in &xs {
                let c = self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b));
                if !seen.contains(c) {
                    seen.insert(c);
                    comms.push(c);
                }
            }
        }
        self.closure(&self.generators_of_set(&comms))
    }

    /// Verifies associativity and the identity law on the full table.
    pub fn check_table(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| self.mul(0, a) == a && self.mul(a, 0) == a && self.mul(a, self.inv(a)) == 0)
            && (0..n).all(|a| {
                (0..n).all(|b| {
                    let ab = self.mul(a, b);
                    (0..n).all(|c| self.mul(ab, c) == self.mul(a, self.mul(b, c)))
                })
            })
    }
}

pub fn order_of(s: &Subgroup) -> usize {
    s.count_ones(..)
}
