//! Stable cochain complexes of the exterior quotient `F̃` (or of `F̃_P`) with
//! coefficients in a contravariant functor `𝔞`.
//!
//! An `n`-chain is `q(0) → q(1) → … → q(n)`; its cochain value lies in
//! `𝔞(q(0))`. A cochain is stable when, for every natural isomorphism
//! `ν: q ≅ q'` of chains, `γ(q') = 𝔞(ν_0⁻¹)(γ(q))`. Every chain is
//! isomorphic to one on class representatives, and isomorphisms between
//! those are the tuples `α ∈ Π_i Aut(q(i))` acting by
//! `q(i•i+1) ↦ α_{i+1}∘q(i•i+1)∘α_i⁻¹`. So a stable cochain is a value at
//! one representative chain per orbit, fixed by the stabilizer, and the
//! differential
//! `dγ(q) = 𝔞(q(0•1))γ(d_0q) + Σ_{i≥1} (−1)^i γ(d_iq)`
//! transports face values back to their representatives.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::abelian::{quotient_group, AbHom, AbSubgroup, FinAb};
use crate::error::{Error, Result};
use crate::functor::{AbFunctor, Variance};
use crate::fusion::{FusionSystem, MorId, SubId};
use crate::smith::LinearSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CategoryKind {
    /// `F̃`, stable under all `F̃`-isomorphisms.
    Exterior,
    /// `F̃_P`, stable under `F̃_P`-isomorphisms.
    ExteriorP,
}

/// Class representatives with the morphisms and automorphisms between them.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub kind: CategoryKind,
    pub objects: Vec<SubId>,
    /// `mors[a][b]`: exterior classes `objects[b] → objects[a]`.
    pub mors: Vec<Vec<Vec<MorId>>>,
    inverse: HashMap<MorId, MorId>,
}

impl Skeleton {
    pub fn new(f: &FusionSystem, kind: CategoryKind) -> Self {
        let objects = match kind {
            CategoryKind::Exterior => f.f_class_reps(),
            CategoryKind::ExteriorP => f.p_class_reps(),
        };
        let hom = |q: SubId, r: SubId| -> Vec<MorId> {
            match kind {
                CategoryKind::Exterior => f.ext_classes(q, r),
                CategoryKind::ExteriorP => {
                    let mut v: Vec<MorId> = (0..f.order_p())
                        .filter(|&u| f.is_subset(f.conj_sub(u, r), q))
                        .map(|u| f.ext_rep[f.conj_mor(u, q, r)])
                        .collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                }
            }
        };
        let mors: Vec<Vec<Vec<MorId>>> =
            objects.iter().map(|&q| objects.iter().map(|&r| hom(q, r)).collect()).collect();
        let mut inverse = HashMap::new();
        for (a, row) in mors.iter().enumerate() {
            for &m in &row[a] {
                inverse.insert(m, f.ext_rep[f.inverse_on_image(m)]);
            }
        }
        Skeleton { kind, objects, mors, inverse }
    }

    pub fn auts(&self, a: usize) -> &[MorId] {
        &self.mors[a][a]
    }
}

/// `q(0) → … → q(n)` on skeleton objects; `mors[i]: q(i) → q(i+1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain {
    pub objs: Vec<u8>,
    pub mors: Vec<MorId>,
}

impl Chain {
    pub fn degree(&self) -> usize {
        self.mors.len()
    }

    /// Has an isomorphism edge, i.e. is isomorphic to a chain with an
    /// identity edge. Invariant under chain isomorphisms.
    pub fn is_degenerate(&self, f: &FusionSystem) -> bool {
        self.mors.iter().any(|&m| f.is_iso(m))
    }

    /// `d_i`: drop object `i`, composing across it when it is interior.
    pub fn face(&self, f: &FusionSystem, i: usize) -> Chain {
        let n = self.degree();
        let mut objs = self.objs.clone();
        objs.remove(i);
        let mut mors = self.mors.clone();
        if i == 0 {
            mors.remove(0);
        } else if i == n {
            mors.pop();
        } else {
            let c = f.ext_compose(mors[i], mors[i - 1]);
            mors.splice(i - 1..=i, [c]);
        }
        Chain { objs, mors }
    }
}

/// Isomorphism classes of `n`-chains and the stable cochain group.
#[derive(Clone, Debug)]
pub struct Degree {
    pub n: usize,
    /// Each chain's orbit and the `α_0` with `chain = α·rep`.
    pub orbit_of: HashMap<Chain, (usize, MorId)>,
    pub reps: Vec<Chain>,
    /// `α_0` components of the stabilizer of each representative.
    pub stabilizers: Vec<Vec<MorId>>,
    pub offsets: Vec<usize>,
    /// `⊕_{orbits} 𝔞(q(0))`, one summand per representative.
    pub group: FinAb,
    /// Stable cochains: each summand fixed by its stabilizer.
    pub stable: AbSubgroup,
}

impl Degree {
    pub fn range(&self, o: usize) -> std::ops::Range<usize> {
        self.offsets[o]..self.offsets.get(o + 1).copied().unwrap_or(self.group.rank())
    }
}

fn all_chains(sk: &Skeleton, n: usize) -> Vec<Chain> {
    let k = sk.objects.len();
    let mut cur: Vec<Chain> = (0..k).map(|a| Chain { objs: vec![a as u8], mors: vec![] }).collect();
    for _ in 0..n {
        let mut next = Vec::new();
        for c in &cur {
            let last = *c.objs.last().unwrap() as usize;
            for b in 0..k {
                for &m in &sk.mors[b][last] {
                    let mut d = c.clone();
                    d.objs.push(b as u8);
                    d.mors.push(m);
                    next.push(d);
                }
            }
        }
        cur = next;
    }
    cur.sort();
    cur
}

/// `α·q` for `α` the automorphism `a` of `q(i)`, identity elsewhere.
fn act(f: &FusionSystem, sk: &Skeleton, q: &Chain, i: usize, a: MorId) -> Chain {
    let mut c = q.clone();
    if i > 0 {
        c.mors[i - 1] = f.ext_compose(a, c.mors[i - 1]);
    }
    if i < q.degree() {
        c.mors[i] = f.ext_compose(c.mors[i], sk.inverse[&a]);
    }
    c
}

/// The stable cochain complex in degrees `0..=top`, with `d_n` for `n < top`.
pub struct Complex<'a> {
    pub f: &'a FusionSystem,
    pub skeleton: Skeleton,
    pub coeff: &'a AbFunctor,
    pub normalized: bool,
    pub degrees: Vec<Degree>,
    /// `d_n: C^n → C^{n+1}` on representative values.
    pub diffs: Vec<AbHom>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepOrder {
    /// The least chain of each orbit is its representative.
    Least,
    /// The greatest chain; used to check independence of the choice.
    Greatest,
}

impl<'a> Complex<'a> {
    pub fn new(
        f: &'a FusionSystem,
        kind: CategoryKind,
        coeff: &'a AbFunctor,
        top: usize,
        normalized: bool,
        order: RepOrder,
    ) -> Self {
        assert_eq!(coeff.variance, Variance::Contravariant);
        let skeleton = Skeleton::new(f, kind);
        let degrees: Vec<Degree> =
            (0..=top).map(|n| Self::degree(f, &skeleton, coeff, n, normalized, order)).collect();
        let mut cx = Complex { f, skeleton, coeff, normalized, degrees, diffs: Vec::new() };
        cx.diffs = (0..top).map(|n| cx.differential(n)).collect();
        cx
    }

    fn degree(f: &FusionSystem, sk: &Skeleton, coeff: &AbFunctor, n: usize, normalized: bool, order: RepOrder) -> Degree {
        let mut chains = all_chains(sk, n);
        if normalized {
            chains.retain(|c| !c.is_degenerate(f));
        }
        if order == RepOrder::Greatest {
            chains.reverse();
        }
        let mut orbit_of: HashMap<Chain, (usize, MorId)> = HashMap::new();
        let mut reps = Vec::new();
        let mut stabilizers = Vec::new();
        for c in chains {
            if orbit_of.contains_key(&c) {
                continue;
            }
            let o = reps.len();
            let id0 = f.ext_rep[f.identity(sk.objects[c.objs[0] as usize])];
            let mut stab: HashSet<MorId> = HashSet::from([id0]);
            orbit_of.insert(c.clone(), (o, id0));
            let mut queue = VecDeque::from([c.clone()]);
            while let Some(x) = queue.pop_front() {
                let tx = orbit_of[&x].1;
                for i in 0..=n {
                    for &a in sk.auts(x.objs[i] as usize) {
                        let y = act(f, sk, &x, i, a);
                        let g0 = if i == 0 { a } else { id0 };
                        let ty = f.ext_compose(g0, tx);
                        match orbit_of.get(&y) {
                            None => {
                                orbit_of.insert(y.clone(), (o, ty));
                                queue.push_back(y);
                            }
                            Some(&(_, t)) => {
                                // Schreier generator t(y)⁻¹·g·t(x)
                                stab.insert(f.ext_compose(sk.inverse[&t], ty));
                            }
                        }
                    }
                }
            }
            let mut st: Vec<MorId> = stab.into_iter().collect();
            st.sort_unstable();
            reps.push(c);
            stabilizers.push(st);
        }
        let mut offsets = Vec::new();
        let mut parts = Vec::new();
        let mut acc = 0;
        for r in &reps {
            offsets.push(acc);
            let v = &coeff.values[sk.objects[r.objs[0] as usize]];
            acc += v.rank();
            parts.push(v.clone());
        }
        let group = FinAb::direct_sum(&parts);
        let mut gens = Vec::new();
        for (o, r) in reps.iter().enumerate() {
            let v = &parts[o];
            if v.rank() == 0 {
                continue;
            }
            let q0 = sk.objects[r.objs[0] as usize];
            let mut rows = Vec::new();
            let mut moduli = Vec::new();
            for &s in &stabilizers[o] {
                let h = coeff.map(f, s);
                debug_assert_eq!(f.mors[s].tgt, q0);
                for i in 0..v.rank() {
                    rows.push((0..v.rank()).map(|j| h.mat[i][j] as i64 - i64::from(i == j)).collect());
                    moduli.push(v.orders[i]);
                }
            }
            let sys = LinearSystem::new(&rows, &moduli, Some(&v.orders), v.rank());
            for k in sys.kernel() {
                let mut g = group.zero();
                for (j, x) in k.into_iter().enumerate() {
                    g[offsets[o] + j] = x % v.orders[j];
                }
                gens.push(g);
            }
        }
        let stable = AbSubgroup::new(&group, gens);
        Degree { n, orbit_of, reps, stabilizers, offsets, group, stable }
    }

    fn differential(&self, n: usize) -> AbHom {
        let f = self.f;
        let sk = &self.skeleton;
        let (src, tgt) = (&self.degrees[n], &self.degrees[n + 1]);
        let mut d = AbHom::zero(&src.group, &tgt.group);
        for (o2, q) in tgt.reps.iter().enumerate() {
            let rows = tgt.range(o2);
            if rows.is_empty() {
                continue;
            }
            for i in 0..=n + 1 {
                let face = q.face(f, i);
                let Some(&(o, t0)) = src.orbit_of.get(&face) else {
                    debug_assert!(self.normalized, "missing face");
                    continue;
                };
                let mut block = self.coeff.map(f, sk.inverse[&t0]).clone();
                if i == 0 {
                    block = self.coeff.map(f, q.mors[0]).compose(&block);
                } else if i % 2 == 1 {
                    block = neg(&block);
                }
                for (bi, r) in rows.clone().enumerate() {
                    for (bj, c) in src.range(o).enumerate() {
                        d.mat[r][c] = (d.mat[r][c] + block.mat[bi][bj]) % d.tgt.orders[r];
                    }
                }
            }
        }
        d
    }

    /// Generators of the stable `n`-cocycles.
    pub fn cocycles(&self, n: usize) -> Vec<Vec<u64>> {
        let deg = &self.degrees[n];
        let s = &deg.stable.gens;
        if s.is_empty() || n >= self.diffs.len() || self.degrees[n + 1].group.rank() == 0 {
            return s.clone();
        }
        let d = &self.diffs[n];
        let imgs: Vec<Vec<u64>> = s.iter().map(|x| d.apply(x)).collect();
        let a: Vec<Vec<i64>> = (0..d.tgt.rank()).map(|i| imgs.iter().map(|c| c[i] as i64).collect()).collect();
        let sys = LinearSystem::new(&a, &d.tgt.orders, None, s.len());
        sys.kernel()
            .into_iter()
            .map(|c| {
                let mut z = deg.group.zero();
                for (k, x) in c.iter().enumerate() {
                    z = deg.group.add(&z, &deg.group.scale(*x, &s[k]));
                }
                z
            })
            .collect()
    }

    /// Generators of `d_{n−1}` of the stable `(n−1)`-cochains.
    pub fn coboundaries(&self, n: usize) -> Vec<Vec<u64>> {
        if n == 0 {
            return vec![];
        }
        let d = &self.diffs[n - 1];
        self.degrees[n - 1].stable.gens.iter().map(|x| d.apply(x)).collect()
    }

    /// `ℍⁿ`, for `n < top`.
    pub fn cohomology(&self, n: usize) -> FinAb {
        assert!(n < self.diffs.len(), "degree {n} needs the next differential");
        quotient_group(&self.degrees[n].group, &self.cocycles(n), &self.coboundaries(n))
    }

    /// `d_{n+1}∘d_n = 0` on stable cochains and `d_n` keeps stability.
    pub fn check_complex(&self) -> bool {
        (0..self.diffs.len()).all(|n| {
            self.degrees[n].stable.gens.iter().all(|x| {
                let y = self.diffs[n].apply(x);
                let stable = self.degrees[n + 1].stable.contains(&y);
                let closed = n + 1 >= self.diffs.len() || self.degrees[n + 2].group.is_zero(&self.diffs[n + 1].apply(&y));
                stable && closed
            })
        })
    }

    /// A stable `β` with `d_{n−1}β = target`, for a stable `n`-cocycle.
    pub fn solve_coboundary(&self, n: usize, target: &[u64]) -> Result<Vec<u64>> {
        let deg = &self.degrees[n];
        if !deg.stable.contains(target) {
            return Err(Error::CocycleNotClosed(format!("degree {n} target is not stable")));
        }
        if n < self.diffs.len() && !self.degrees[n + 1].group.is_zero(&self.diffs[n].apply(target)) {
            return Err(Error::CocycleNotClosed(format!("degree {n} target is not a cocycle")));
        }
        if n == 0 {
            return if deg.group.is_zero(target) { Ok(vec![]) } else { Err(Error::NoSolution) };
        }
        let prev = &self.degrees[n - 1];
        let s = &prev.stable.gens;
        if s.is_empty() {
            return if deg.group.is_zero(target) { Ok(prev.group.zero()) } else { Err(Error::NoSolution) };
        }
        let imgs: Vec<Vec<u64>> = s.iter().map(|x| self.diffs[n - 1].apply(x)).collect();
        let a: Vec<Vec<i64>> = (0..deg.group.rank()).map(|i| imgs.iter().map(|c| c[i] as i64).collect()).collect();
        let c = LinearSystem::new(&a, &deg.group.orders, None, s.len()).solve_u(target)?;
        let mut beta = prev.group.zero();
        for (k, x) in c.iter().enumerate() {
            beta = prev.group.add(&beta, &prev.group.scale(*x, &s[k]));
        }
        Ok(beta)
    }

    /// Value of a cochain at an arbitrary skeleton chain, by transport.
    pub fn value_at(&self, gamma: &[u64], q: &Chain) -> Option<Vec<u64>> {
        let deg = &self.degrees[q.degree()];
        let &(o, t0) = deg.orbit_of.get(q)?;
        let v = &gamma[deg.range(o)];
        Some(self.coeff.map(self.f, self.skeleton.inverse[&t0]).apply(v))
    }

    /// The stable cochain with the given values at representatives, or
    /// `None` when they are not stabilizer-invariant.
    pub fn from_rep_values(&self, n: usize, vals: &[Vec<u64>]) -> Option<Vec<u64>> {
        let deg = &self.degrees[n];
        let mut g = deg.group.zero();
        for (o, v) in vals.iter().enumerate() {
            g[deg.range(o)].copy_from_slice(v);
        }
        deg.stable.contains(&g).then_some(g)
    }
}

fn neg(h: &AbHom) -> AbHom {
    let cols: Vec<Vec<u64>> = (0..h.src.rank()).map(|j| h.tgt.neg(&h.column(j))).collect();
    AbHom::from_columns(&h.src, &h.tgt, &cols)
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologyCertificate {
    pub category: CategoryKind,
    pub coefficients: String,
    pub degree: usize,
    pub invariant_factors: Vec<u64>,
    pub cochain_ranks: Vec<usize>,
    pub orbits: Vec<usize>,
}

/// `ℍⁿ` for `n ∈ 1..=top_degree` with a certificate per degree.
pub fn stable_cohomology(
    f: &FusionSystem,
    kind: CategoryKind,
    coeff: &AbFunctor,
    name: &str,
    top_degree: usize,
) -> Vec<CohomologyCertificate> {
    let cx = Complex::new(f, kind, coeff, top_degree + 1, false, RepOrder::Least);
    (1..=top_degree)
        .map(|n| CohomologyCertificate {
            category: kind,
            coefficients: name.to_string(),
            degree: n,
            invariant_factors: cx.cohomology(n).orders,
            cochain_ranks: cx.degrees.iter().map(|d| d.group.rank()).collect(),
            orbits: cx.degrees.iter().map(|d| d.reps.len()).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::functor::{kernel_functor_from_fusion, r_functors, NU};
    use crate::locality::KernelLayout;

    fn kernel_coeff(f: &FusionSystem) -> AbFunctor {
        let layouts: Vec<KernelLayout> = (0..f.num_subs()).map(|q| KernelLayout::new(f, q)).collect();
        kernel_functor_from_fusion(f, &layouts)
    }

    /// Stable cohomology computed without a skeleton: chains over every
    /// subgroup, stability imposed as linear constraints for every
    /// single-object isomorphism, full differential.
    fn brute_cohomology(f: &FusionSystem, coeff: &AbFunctor, n: usize) -> FinAb {
        let objs: Vec<SubId> = (0..f.num_subs()).collect();
        let chains = |k: usize| -> Vec<(Vec<SubId>, Vec<MorId>)> {
            let mut cur: Vec<(Vec<SubId>, Vec<MorId>)> = objs.iter().map(|&o| (vec![o], vec![])).collect();
            for _ in 0..k {
                let mut next = Vec::new();
                for (os, ms) in &cur {
                    for &b in &objs {
                        for m in f.ext_classes(b, *os.last().unwrap()) {
                            let (mut o2, mut m2) = (os.clone(), ms.clone());
                            o2.push(b);
                            m2.push(m);
                            next.push((o2, m2));
                        }
                    }
                }
                cur = next;
            }
            cur
        };
        struct Level {
            index: HashMap<(Vec<SubId>, Vec<MorId>), usize>,
            list: Vec<(Vec<SubId>, Vec<MorId>)>,
            off: Vec<usize>,
            group: FinAb,
            stable: Vec<Vec<u64>>,
        }
        let level = |k: usize| -> Level {
            let list = chains(k);
            let index: HashMap<_, _> = list.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
            let mut off = vec![];
            let mut parts = vec![];
            let mut acc = 0;
            for (os, _) in &list {
                off.push(acc);
                acc += coeff.values[os[0]].rank();
                parts.push(coeff.values[os[0]].clone());
            }
            let group = FinAb::direct_sum(&parts);
            // constraints γ(α·q) − 𝔞(α_0⁻¹)γ(q) = 0
            let mut rows: Vec<Vec<i64>> = vec![];
            let mut moduli = vec![];
            for (ci, (os, ms)) in list.iter().enumerate() {
                for i in 0..=k {
                    for &o in &objs {
                        for a in f.ext_classes(o, os[i]) {
                            if !f.is_iso(a) {
                                continue;
                            }
                            let ainv = f.ext_rep[f.inverse_on_image(a)];
                            let (mut o2, mut m2) = (os.clone(), ms.clone());
                            o2[i] = o;
                            if i > 0 {
                                m2[i - 1] = f.ext_compose(a, m2[i - 1]);
                            }
                            if i < k {
                                m2[i] = f.ext_compose(m2[i], ainv);
                            }
                            let cj = index[&(o2.clone(), m2)];
                            let t = if i == 0 { coeff.map(f, ainv).clone() } else { AbHom::identity(&coeff.values[os[0]]) };
                            let tgt = &coeff.values[o2[0]];
                            for r in 0..tgt.rank() {
                                let mut row = vec![0i64; group.rank()];
                                row[off[cj] + r] += 1;
                                for c in 0..t.src.rank() {
                                    row[off[ci] + c] -= t.mat[r][c] as i64;
                                }
                                rows.push(row);
                                moduli.push(tgt.orders[r]);
                            }
                        }
                    }
                }
            }
            let stable = if group.rank() == 0 {
                vec![]
            } else {
                LinearSystem::new(&rows, &moduli, Some(&group.orders), group.rank())
                    .kernel()
                    .into_iter()
                    .map(|v| v.iter().zip(&group.orders).map(|(x, d)| x % d).collect())
                    .collect()
            };
            Level { index, list, off, group, stable }
        };
        let d = |a: &Level, b: &Level, k: usize, x: &[u64]| -> Vec<u64> {
            let mut y = b.group.zero();
            for (qi, (os, ms)) in b.list.iter().enumerate() {
                let tgt = &coeff.values[os[0]];
                let mut acc = tgt.zero();
                for i in 0..=k + 1 {
                    let (mut o2, mut m2) = (os.clone(), ms.clone());
                    o2.remove(i);
                    if i == 0 {
                        m2.remove(0);
                    } else if i == k + 1 {
                        m2.pop();
                    } else {
                        let c = f.ext_compose(m2[i], m2[i - 1]);
                        m2.splice(i - 1..=i, [c]);
                    }
                    let fi = a.index[&(o2.clone(), m2)];
                    let v = &x[a.off[fi]..a.off[fi] + coeff.values[o2[0]].rank()];
                    let v = if i == 0 { coeff.map(f, ms[0]).apply(v) } else { v.to_vec() };
                    acc = if i % 2 == 1 { tgt.sub(&acc, &v) } else { tgt.add(&acc, &v) };
                }
                y[b.off[qi]..b.off[qi] + tgt.rank()].copy_from_slice(&acc);
            }
            y
        };
        let lv: Vec<Level> = (n.saturating_sub(1)..=n + 1).map(level).collect();
        let (prev, cur, next) = if n == 0 { (None, &lv[0], &lv[1]) } else { (Some(&lv[0]), &lv[1], &lv[2]) };
        let s = &cur.stable;
        let cocycles: Vec<Vec<u64>> = if s.is_empty() || next.group.rank() == 0 {
            s.clone()
        } else {
            let imgs: Vec<Vec<u64>> = s.iter().map(|x| d(cur, next, n, x)).collect();
            let a: Vec<Vec<i64>> = (0..next.group.rank()).map(|i| imgs.iter().map(|c| c[i] as i64).collect()).collect();
            LinearSystem::new(&a, &next.group.orders, None, s.len())
                .kernel()
                .into_iter()
                .map(|c| c.iter().zip(s).fold(cur.group.zero(), |z, (&k, g)| cur.group.add(&z, &cur.group.scale(k, g))))
                .collect()
        };
        let bounds: Vec<Vec<u64>> = prev.map_or(vec![], |p| p.stable.iter().map(|x| d(p, cur, n - 1, x)).collect());
        quotient_group(&cur.group, &cocycles, &bounds)
    }

    #[test]
    fn chain_counts_are_small() {
        let f = &examples::s4_d8().fusion;
        let sk = Skeleton::new(f, CategoryKind::Exterior);
        assert_eq!(sk.objects.len(), f.f_class_reps().len());
        let counts: Vec<usize> = (0..5).map(|n| all_chains(&sk, n).len()).collect();
        assert!(counts[4] < 10_000, "{counts:?}");
    }

    #[test]
    fn zero_coefficients_give_zero() {
        let f = &examples::a4_v4().fusion;
        let z = AbFunctor::zero(f, Variance::Contravariant);
        for c in stable_cohomology(f, CategoryKind::Exterior, &z, "zero", 3) {
            assert!(c.invariant_factors.is_empty());
        }
    }

    #[test]
    fn differential_squares_to_zero_and_keeps_stability() {
        for inst in [examples::c2xc2(), examples::d8(), examples::s4_d8(), examples::a4_v4()] {
            let f = &inst.fusion;
            let kf = kernel_coeff(f);
            for kind in [CategoryKind::Exterior, CategoryKind::ExteriorP] {
                let cx = Complex::new(f, kind, &kf, 4, false, RepOrder::Least);
                assert!(cx.check_complex(), "{} {kind:?}", inst.name);
            }
        }
    }

    #[test]
    fn skeleton_matches_brute_force() {
        for inst in [examples::c2(), examples::c2xc2(), examples::a4_v4()] {
            let f = &inst.fusion;
            let kf = kernel_coeff(f);
            let cx = Complex::new(f, CategoryKind::Exterior, &kf, 3, false, RepOrder::Least);
            for n in 0..3 {
                let a = cx.cohomology(n);
                let b = brute_cohomology(f, &kf, n);
                assert_eq!(a, b, "{} n={n}", inst.name);
            }
        }
    }

    #[test]
    fn representative_order_and_normalization_do_not_matter() {
        for inst in [examples::s4_d8(), examples::a4_v4()] {
            let f = &inst.fusion;
            let kf = kernel_coeff(f);
            let base = Complex::new(f, CategoryKind::Exterior, &kf, 4, false, RepOrder::Least);
            let rev = Complex::new(f, CategoryKind::Exterior, &kf, 4, false, RepOrder::Greatest);
            let norm = Complex::new(f, CategoryKind::Exterior, &kf, 4, true, RepOrder::Least);
            for n in 0..4 {
                let h = base.cohomology(n);
                assert_eq!(h, rev.cohomology(n), "{} n={n}", inst.name);
                assert_eq!(h, norm.cohomology(n), "{} n={n}", inst.name);
            }
        }
    }

    #[test]
    fn transport_is_involutive() {
        let f = &examples::s4_d8().fusion;
        let kf = kernel_coeff(f);
        let cx = Complex::new(f, CategoryKind::Exterior, &kf, 2, false, RepOrder::Least);
        let deg = &cx.degrees[2];
        for g in &deg.stable.gens {
            for (q, &(o, t0)) in &deg.orbit_of {
                // back along t0 lands on the stored representative value
                let v = cx.value_at(g, q).unwrap();
                let back = kf.map(f, t0).apply(&v);
                assert_eq!(back, g[deg.range(o)].to_vec());
            }
        }
    }

    #[test]
    fn exterior_p_is_acyclic() {
        for inst in examples::desk() {
            let f = &inst.fusion;
            let kf = kernel_coeff(f);
            let cx = Complex::new(f, CategoryKind::ExteriorP, &kf, 4, false, RepOrder::Least);
            for n in 1..4 {
                assert!(cx.cohomology(n).is_trivial(), "{} n={n}", inst.name);
            }
            // every 1-cocycle is a coboundary of a stable 0-cochain
            for z in cx.cocycles(1) {
                let beta = cx.solve_coboundary(1, &z).unwrap();
                assert_eq!(cx.diffs[0].apply(&beta), z);
            }
        }
    }

    #[test]
    fn r_functor_cohomology_vanishes() {
        for inst in [examples::s4_d8(), examples::a4_v4()] {
            let f = &inst.fusion;
            for u in f.p_class_reps() {
                let nu = NU::new(f, u);
                for m in 0..2 {
                    let rf = r_functors(&nu, m).unwrap();
                    let cx = Complex::new(f, CategoryKind::Exterior, &rf.fixed, 4, false, RepOrder::Least);
                    for n in 1..4 {
                        assert!(cx.cohomology(n).is_trivial(), "{} U={u} m={m} n={n}", inst.name);
                    }
                    for z in cx.cocycles(2) {
                        let beta = cx.solve_coboundary(2, &z).unwrap();
                        assert_eq!(cx.diffs[1].apply(&beta), z);
                    }
                }
            }
        }
    }

    #[test]
    fn solve_rejects_non_cocycles() {
        let f = &examples::s4_d8().fusion;
        let kf = kernel_coeff(f);
        let cx = Complex::new(f, CategoryKind::Exterior, &kf, 3, false, RepOrder::Least);
        let zero = cx.degrees[1].group.zero();
        assert_eq!(cx.solve_coboundary(1, &zero).map(|b| cx.degrees[0].group.is_zero(&b)), Ok(true));
        let bad = cx.degrees[1].stable.gens.iter().find(|g| !cx.degrees[2].group.is_zero(&cx.diffs[1].apply(g)));
        if let Some(b) = bad {
            assert!(matches!(cx.solve_coboundary(1, b), Err(Error::CocycleNotClosed(_))));
        }
    }

    /// Constant `ℤ/2`: `F̃` has the initial object `1`, so its nerve is
    /// contractible and only `ℍ⁰ = ℤ/2` survives.
    #[test]
    fn constant_coefficients() {
        for inst in [examples::d8(), examples::s4_d8()] {
            let f = &inst.fusion;
            let z2 = FinAb::new(vec![2]);
            let c = AbFunctor::build(f, Variance::Contravariant, vec![z2.clone(); f.num_subs()], |_| AbHom::identity(&z2));
            let cx = Complex::new(f, CategoryKind::Exterior, &c, 3, false, RepOrder::Least);
            assert_eq!(cx.cohomology(0), z2);
            assert!(cx.cohomology(1).is_trivial() && cx.cohomology(2).is_trivial());
            let one = cx.cocycles(0).into_iter().find(|z| !cx.degrees[0].group.is_zero(z)).unwrap();
            assert_eq!(cx.solve_coboundary(0, &one), Err(Error::NoSolution));
        }
    }
}
