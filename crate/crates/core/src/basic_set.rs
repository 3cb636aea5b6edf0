//! `F`-basic `P×P`-sets: multiplicity tables over twisted-diagonal orbit
//! types and their point models `Ω ≅ [k]×P`.
//!
//! A type `(T,η)` stands for the transitive set `(P×P)/Δ_η(T)` with
//! `Δ_η(T) = {(η(t),t)}`, `T` a `P`-class representative and `η` the least
//! representative of `P\F(P,T)/N_P(T)`. In the point model the right factor
//! acts by `(1,w)·(i,u) = (i, u w⁻¹)` and the left factor through the table
//! `act[v][i] = (σ_v(i), λ_v(i))`, that is `(v,1)·(i,u) = (σ_v(i), λ_v(i) u)`.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fusion::{FusionSystem, MorId, SubId, NONE};

pub type OrbitType = (SubId, MorId);

/// Stabilizer label of a `Q×P`-orbit: a subgroup `S ≤ P` and the injective
/// map `ψ: S → Q` whose graph `{(ψ(s),s)}` is the stabilizer. Minimal over
/// the orbit, hence an isomorphism invariant.
pub type Label = (SubId, Vec<u8>);

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct Biset {
    pub mult: BTreeMap<OrbitType, u32>,
}

impl Biset {
    /// `|Ω|/|P|`, the number of free right `P`-orbits.
    pub fn blocks(&self, f: &FusionSystem) -> usize {
        self.mult.iter().map(|(&(t, _), &m)| m as usize * f.order_p() / f.sub_order(t)).sum()
    }

    /// Multiplicities with the two factors exchanged.
    pub fn dual(&self, f: &FusionSystem) -> Biset {
        let mut mult = BTreeMap::new();
        for (&ty, &m) in &self.mult {
            *mult.entry(dual_type(f, ty)).or_insert(0) += m;
        }
        Biset { mult }
    }

    pub fn entries(&self) -> Vec<BisetEntry> {
        self.mult.iter().map(|(&(t, eta), &mult)| BisetEntry { t, eta, mult }).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BisetEntry {
    pub t: SubId,
    pub eta: MorId,
    pub mult: u32,
}

/// All orbit types `(T,η)`: `T ∈ 𝒞_P`, `η ∈ P\F(P,T)/N_P(T)`.
pub fn orbit_types(f: &FusionSystem) -> Vec<OrbitType> {
    let pw = f.whole();
    f.p_class_reps()
        .into_iter()
        .flat_map(|t| f.double_class_reps(pw, t).into_iter().map(move |e| (t, e)))
        .collect()
}

/// Canonical type of `Δ_ψ(S) ≤ Q×P` up to `Q×P`-conjugacy, if `ψ ∈ F(Q,S)`.
pub fn canonical_type(f: &FusionSystem, q: SubId, s: SubId, psi: &[u8]) -> Option<OrbitType> {
    let rep = f.p_class_rep(s);
    let b = (0..f.order_p()).find(|&b| f.conj_sub(b, s) == rep).unwrap();
    let bi = f.pg.inv(b);
    let mut img = vec![NONE; f.order_p()];
    for x in f.sub_elems(rep) {
        img[x] = psi[f.pg.conj(bi, x)];
    }
    let m = f.find(q, &img)?;
    Some((rep, f.double_class_rep(m)))
}

/// `(T,η) ↦ (η(T), η⁻¹)`, canonicalized.
pub fn dual_type(f: &FusionSystem, (t, eta): OrbitType) -> OrbitType {
    let inv = f.inverse_on_image(eta);
    let et = f.mors[eta].image;
    let inv_p = f.corestrict(inv, f.whole()).unwrap();
    debug_assert_eq!(f.sub_order(et), f.sub_order(t));
    canonical_type(f, f.whole(), et, &f.mors[inv_p].img).expect("dual of an F-type is an F-type")
}

/// Number of cosets of `Δ_η(T)` in `P×P` fixed by `Δ_ψ(S)`:
/// `#{(a,b) : b⁻¹Sb ⊆ T, η(b⁻¹sb) = a⁻¹ψ(s)a}/|T|`.
pub fn mark(f: &FusionSystem, (t, eta): OrbitType, s: SubId, psi: &[u8]) -> usize {
    let n = f.order_p();
    let se = f.sub_elems(s);
    let mut count = 0;
    for b in 0..n {
        let bi = f.pg.inv(b);
        if !se.iter().all(|&x| f.contains(t, f.pg.conj(bi, x))) {
            continue;
        }
        for a in 0..n {
            let ai = f.pg.inv(a);
            if se.iter().all(|&x| f.apply(eta, f.pg.conj(bi, x)) == f.pg.conj(ai, psi[x] as usize)) {
                count += 1;
            }
        }
    }
    count / f.sub_order(t)
}

#[derive(Clone, Debug)]
pub struct ConcreteBiset {
    pub order_p: usize,
    pub k: usize,
    /// Orbit type and block representative `a_i` of each block.
    pub blocks: Vec<(OrbitType, usize)>,
    /// `act[v][i] = (σ_v(i), λ_v(i))`.
    pub act: Vec<Vec<(u32, u8)>>,
}

impl ConcreteBiset {
    /// Point model of a multiplicity table: the orbit `(P×P)/Δ_η(T)` has one
    /// block per coset `a η(T)` and `(i,u) ↔ (a_i, u⁻¹)Δ_η(T)`.
    pub fn realize(f: &FusionSystem, b: &Biset) -> ConcreteBiset {
        let n = f.order_p();
        let mut blocks = Vec::new();
        let mut act: Vec<Vec<(u32, u8)>> = vec![Vec::new(); n];
        for (&(t, eta), &m) in &b.mult {
            let et = f.mors[eta].image;
            let reps = f.pg.left_transversal(&f.pg.whole(), &f.pg.set_of(&f.sub_elems(et)));
            let inv = f.inverse_on_image(eta);
            for _ in 0..m {
                let base = blocks.len();
                for &a in &reps {
                    blocks.push(((t, eta), a));
                }
                for (v, row) in act.iter_mut().enumerate() {
                    for &a in &reps {
                        let va = f.pg.mul(v, a);
                        let j = reps.iter().position(|&aj| f.contains(et, f.pg.mul(f.pg.inv(aj), va))).unwrap();
                        let y = f.pg.mul(f.pg.inv(reps[j]), va);
                        row.push(((base + j) as u32, f.apply(inv, y) as u8));
                    }
                }
            }
        }
        ConcreteBiset { order_p: n, k: blocks.len(), blocks, act }
    }

    pub fn points(&self) -> usize {
        self.k * self.order_p
    }

    pub fn point(&self, i: usize, u: usize) -> usize {
        i * self.order_p + u
    }

    /// `(v,w)·(i,u) = (σ_v(i), λ_v(i)·u·w⁻¹)`.
    pub fn act_pair(&self, f: &FusionSystem, v: usize, w: usize, pt: usize) -> usize {
        let (i, u) = (pt / self.order_p, pt % self.order_p);
        let (j, l) = self.act[v][i];
        self.point(j as usize, f.pg.mul(f.pg.mul(l as usize, u), f.pg.inv(w)))
    }

    /// The left action is a homomorphism `P → Sym(Ω)` commuting with the right one.
    pub fn check_action(&self, f: &FusionSystem) -> bool {
        let n = self.order_p;
        (0..n).all(|v| {
            (0..n).all(|w| {
                (0..self.k).all(|i| {
                    let (j, l) = self.act[w][i];
                    let (k2, l2) = self.act[v][j as usize];
                    self.act[f.pg.mul(v, w)][i] == (k2, f.pg.mul(l2 as usize, l as usize) as u8)
                })
            })
        }) && (0..self.k).all(|i| self.act[0][i] == (i as u32, 0))
    }

    /// `Q×P`-orbits of `Res_{φ×id}Ω` with their stabilizer labels; `phi` is
    /// an image table defined on `Q` (the inclusion when `None`).
    pub fn orbits(&self, f: &FusionSystem, q: SubId, phi: Option<&[u8]>) -> Vec<(Label, Vec<usize>)> {
        let qe = f.sub_elems(q);
        let map = |v: usize| phi.map_or(v, |t| t[v] as usize);
        let qgens: Vec<usize> = f.pg.generators_of(&f.pg.set_of(&qe));
        let pgens = f.pg.generator_indices();
        let mut seen = vec![false; self.points()];
        let mut out = Vec::new();
        for start in 0..self.points() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut orbit = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                let nexts = qgens
                    .iter()
                    .map(|&v| self.act_pair(f, map(v), 0, x))
                    .chain(pgens.iter().map(|&w| self.act_pair(f, 0, w, x)));
                for y in nexts.collect::<Vec<_>>() {
                    if !seen[y] {
                        seen[y] = true;
                        orbit.push(y);
                        queue.push_back(y);
                    }
                }
            }
            let label = orbit.iter().map(|&x| self.stabilizer_label(f, q, phi, x)).min().unwrap();
            orbit.sort();
            out.push((label, orbit));
        }
        out
    }

    /// `(S, ψ)` with `Stab_{Q×P}(x) = {(ψ(w), w) : w ∈ S}`, `Q` acting through `phi`.
    pub fn stabilizer_label(&self, f: &FusionSystem, q: SubId, phi: Option<&[u8]>, x: usize) -> Label {
        let n = self.order_p;
        let (i, u) = (x / n, x % n);
        let ui = f.pg.inv(u);
        let mut psi = vec![NONE; n];
        let mut smask = 0u64;
        for v in f.sub_elems(q) {
            let (j, l) = self.act[phi.map_or(v, |t| t[v] as usize)][i];
            if j as usize == i {
                let w = f.pg.mul(f.pg.mul(ui, l as usize), u);
                psi[w] = v as u8;
                smask |= 1 << w;
            }
        }
        (f.sub_id(smask), psi)
    }

    pub fn orbit_labels(&self, f: &FusionSystem, q: SubId, phi: Option<&[u8]>) -> BTreeMap<Label, usize> {
        let mut m = BTreeMap::new();
        for (l, _) in self.orbits(f, q, phi) {
            *m.entry(l).or_insert(0) += 1;
        }
        m
    }

    /// Orbit types of the `P×P`-set, with multiplicities.
    pub fn decompose(&self, f: &FusionSystem) -> Result<Biset> {
        let mut mult = BTreeMap::new();
        for ((s, psi), c) in self.orbit_labels(f, f.whole(), None) {
            let ty = canonical_type(f, f.whole(), s, &psi)
                .ok_or_else(|| Error::ConstructionFailed(format!("orbit stabilizer over {} is not an F-type", f.describe_sub(s))))?;
            *mult.entry(ty).or_insert(0) += c as u32;
        }
        Ok(Biset { mult })
    }

    /// Number of points fixed by `Δ_ψ(S)`.
    pub fn fixed_points(&self, f: &FusionSystem, s: SubId, psi: &[u8]) -> usize {
        let se = f.sub_elems(s);
        (0..self.points())
            .filter(|&pt| se.iter().all(|&x| self.act_pair(f, psi[x] as usize, x, pt) == pt))
            .count()
    }

    /// `Ω°` as a table of orbit types: exchanging the factors turns the
    /// stabilizer `{(η(t),t)}` into `{(t,η(t))}`.
    pub fn dualize(&self, f: &FusionSystem) -> Result<ConcreteBiset> {
        Ok(ConcreteBiset::realize(f, &self.decompose(f)?.dual(f)))
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BasicReport {
    pub right_free: bool,
    pub self_dual: bool,
    pub blocks: usize,
    pub blocks_mod_p: u64,
    pub p_prime_cardinality: bool,
    pub stable: bool,
    pub twisted_diagonal_orbits: bool,
    pub thick: bool,
    pub witnesses: Vec<String>,
}

impl BasicReport {
    pub fn basic(&self) -> bool {
        self.right_free && self.self_dual && self.p_prime_cardinality && self.stable && self.twisted_diagonal_orbits
    }

    pub fn thick_basic(&self) -> bool {
        self.basic() && self.thick
    }
}

/// Verifies basicness and thickness by orbit computations on the point model.
pub fn check_basic(omega: &ConcreteBiset, f: &FusionSystem) -> BasicReport {
    let mut rep = BasicReport { right_free: omega.check_action(f), ..Default::default() };
    // right freeness holds in the point model once the left action is a
    // well-defined action commuting with right multiplication
    let labels = omega.orbit_labels(f, f.whole(), None);
    let mut decomposition = BTreeMap::new();
    rep.twisted_diagonal_orbits = true;
    for ((s, psi), c) in &labels {
        match canonical_type(f, f.whole(), *s, psi) {
            Some(ty) => *decomposition.entry(ty).or_insert(0u32) += *c as u32,
            None => {
                rep.twisted_diagonal_orbits = false;
                rep.witnesses.push(format!("orbit with stabilizer over {} outside F", f.describe_sub(*s)));
            }
        }
    }
    let b = Biset { mult: decomposition };
    rep.self_dual = b.dual(f) == b;
    if !rep.self_dual {
        rep.witnesses.push("Ω° and Ω have different orbit types".into());
    }
    rep.blocks = omega.k;
    rep.blocks_mod_p = omega.k as u64 % f.p;
    rep.p_prime_cardinality = rep.blocks_mod_p != 0;
    if !rep.p_prime_cardinality {
        rep.witnesses.push(format!("|Ω|/|P| = {} ≡ 0 mod {}", omega.k, f.p));
    }
    rep.stable = true;
    'outer: for q in 0..f.num_subs() {
        let base = omega.orbit_labels(f, q, None);
        for &phi in &f.hom[f.whole()][q] {
            if omega.orbit_labels(f, q, Some(&f.mors[phi].img)) != base {
                rep.stable = false;
                rep.witnesses.push(format!(
                    "Res along φ ≇ Res along inclusion for Q = {}, φ = morphism {phi}",
                    f.describe_sub(q)
                ));
                break 'outer;
            }
        }
    }
    rep.thick = orbit_types(f).into_iter().all(|ty| b.mult.get(&ty).copied().unwrap_or(0) >= 2);
    if !rep.thick {
        rep.witnesses.push("some orbit type has multiplicity below two".into());
    }
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct Construction {
    pub biset: Biset,
    /// No single orbit can be removed without breaking a condition.
    pub minimal: bool,
}

/// Thick basic set by marks bookkeeping, from the largest subgroups down.
///
/// The marks `|Ω^{Δ_ψ(S)}|` of an `F`-stable self-dual set depend only on
/// the `F`-class of `S`. Going down by order, each `F`-class gets the least
/// common mark value that the types at that level can reach with
/// multiplicity at least `min_mult`; the type `(S,η)` contributes
/// `|N̄_{P×P}(Δ_η(S))|` to its own mark. At `S = P` the multiplicity is also
/// kept prime to `p`, which makes `|Ω|/|P|` prime to `p` because `F(P)/F_P(P)`
/// is a `p′`-group.
pub fn construct_thick_basic(f: &FusionSystem, min_mult: u32) -> Result<Construction> {
    let types = orbit_types(f);
    let mut mult: BTreeMap<OrbitType, u32> = BTreeMap::new();
    let reps = f.p_class_reps();
    let mut orders: Vec<usize> = reps.iter().map(|&t| f.sub_order(t)).collect();
    orders.sort_unstable();
    orders.dedup();
    for &ord in orders.iter().rev() {
        let level: Vec<SubId> = reps.iter().copied().filter(|&t| f.sub_order(t) == ord).collect();
        let mut classes: Vec<Vec<SubId>> = Vec::new();
        for &t in &level {
            match classes.iter_mut().find(|c| f.f_isomorphic(c[0], t)) {
                Some(c) => c.push(t),
                None => classes.push(vec![t]),
            }
        }
        for class in classes {
            let here: Vec<OrbitType> = types.iter().copied().filter(|ty| class.contains(&ty.0)).collect();
            let current: Vec<(usize, usize)> = here
                .iter()
                .map(|&(s, eta)| {
                    let psi = &f.mors[eta].img;
                    let e: usize = mult.iter().map(|(&ty, &m)| m as usize * mark(f, ty, s, psi)).sum();
                    (e, mark(f, (s, eta), s, psi))
                })
                .collect();
            let lo = current.iter().map(|&(e, d)| e + min_mult as usize * d).max().unwrap();
            let span = current.iter().map(|&(_, d)| d).max().unwrap() * f.p as usize;
            let top = ord == f.order_p();
            let c = (lo..lo + span)
                .find(|&c| {
                    current.iter().all(|&(e, d)| (c - e) % d == 0) && {
                        let total: usize = current.iter().map(|&(e, d)| (c - e) / d).sum();
                        !top || total as u64 % f.p != 0
                    }
                })
                .ok_or_else(|| {
                    Error::ConstructionFailed(format!(
                        "incompatible mark congruences at the class of {}",
                        f.describe_sub(class[0])
                    ))
                })?;
            for (&ty, &(e, d)) in here.iter().zip(&current) {
                mult.insert(ty, ((c - e) / d) as u32);
            }
        }
    }
    let biset = Biset { mult };
    let omega = ConcreteBiset::realize(f, &biset);
    let rep = check_basic(&omega, f);
    if !rep.thick_basic() {
        return Err(Error::ConstructionFailed(format!("{:?}", rep.witnesses)));
    }
    let minimal = is_minimal(f, &biset, min_mult);
    Ok(Construction { biset, minimal })
}

/// Removing one orbit breaks thickness, stability or the cardinality condition.
fn is_minimal(f: &FusionSystem, b: &Biset, min_mult: u32) -> bool {
    b.mult.keys().all(|&ty| {
        let mut smaller = b.clone();
        let m = smaller.mult.get_mut(&ty).unwrap();
        if *m <= min_mult {
            return true;
        }
        *m -= 1;
        !check_basic(&ConcreteBiset::realize(f, &smaller), f).thick_basic()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    fn single(f: &FusionSystem, parts: &[(SubId, u32)]) -> Biset {
        let pw = f.whole();
        let mut mult = BTreeMap::new();
        for &(t, m) in parts {
            mult.insert((t, f.double_class_rep(f.inclusion(pw, t))), m);
        }
        Biset { mult }
    }

    #[test]
    fn c2_examples() {
        let f = examples::c2().fusion;
        let b = single(&f, &[(f.whole(), 3), (0, 2)]);
        let omega = ConcreteBiset::realize(&f, &b);
        assert_eq!(omega.k, 7);
        let rep = check_basic(&omega, &f);
        assert!(rep.thick_basic(), "{rep:?}");
        // decomposition under 1×P: seven free orbits
        let l = omega.orbit_labels(&f, 0, None);
        assert_eq!(l.values().sum::<usize>(), 7);
        assert_eq!(l.len(), 1);
        // Q = P: the Δ(P) orbits and the free orbits split into two types
        assert_eq!(omega.orbit_labels(&f, f.whole(), None).len(), 2);
        // a single free orbit: |Ω|/|P| = |P| is divisible by p
        let free = ConcreteBiset::realize(&f, &single(&f, &[(0, 1)]));
        let rep = check_basic(&free, &f);
        assert!(rep.twisted_diagonal_orbits && !rep.p_prime_cardinality);
        assert_eq!(construct_thick_basic(&f, 2).unwrap().biset, construct_thick_basic(&f, 2).unwrap().biset);
    }

    #[test]
    fn marks_match_point_counts() {
        let inst = examples::s4_d8();
        let f = &inst.fusion;
        let c = construct_thick_basic(f, 2).unwrap();
        let omega = ConcreteBiset::realize(f, &c.biset);
        for s in 0..f.num_subs() {
            for &psi in &f.hom[f.whole()][s] {
                let img = &f.mors[psi].img;
                let by_marks: usize = c.biset.mult.iter().map(|(&ty, &m)| m as usize * mark(f, ty, s, img)).sum();
                assert_eq!(by_marks, omega.fixed_points(f, s, img), "S = {}", f.describe_sub(s));
            }
        }
    }

    #[test]
    fn constructions_are_thick_basic() {
        for inst in examples::desk() {
            let f = &inst.fusion;
            let c = construct_thick_basic(f, 2).unwrap();
            let omega = ConcreteBiset::realize(f, &c.biset);
            let rep = check_basic(&omega, f);
            assert!(rep.thick_basic(), "{}: {rep:?}", inst.name);
            assert_eq!(omega.decompose(f).unwrap(), c.biset);
            assert!(c.minimal, "{}", inst.name);
        }
    }

    #[test]
    fn missing_identity_diagonal_is_unstable() {
        // Out_F(P) ≅ C3 permutes the three diagonal types at P; without
        // Δ(P) the restrictions along the automorphisms differ
        let f = examples::a4_v4().fusion;
        let mut b = construct_thick_basic(&f, 2).unwrap().biset;
        let id = (f.whole(), f.identity(f.whole()));
        assert!(b.mult.remove(&id).is_some());
        let rep = check_basic(&ConcreteBiset::realize(&f, &b), &f);
        assert!(!rep.stable && !rep.witnesses.is_empty());
    }

    #[test]
    fn dual_types() {
        let f = examples::s4_d8().fusion;
        for ty in orbit_types(&f) {
            let d = dual_type(&f, ty);
            assert_eq!(dual_type(&f, d), ty);
            assert_eq!(f.sub_order(d.0), f.sub_order(ty.0));
        }
        let free = single(&f, &[(0, 1)]);
        assert_eq!(free.dual(&f), free);
    }
}
