//! Fusion systems `F_{G,P}` on the subgroups of a finite `p`-group `P`.
//!
//! Subgroups of `P` are `u64` masks over the element indices of `P` (so
//! `|P| ≤ 64`) and are numbered in canonical order: by order, then by element
//! list. A morphism `R → Q` is stored as its image table on `P` and every
//! morphism has a global id; hom-sets are deduplicated as functions.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;

pub const NONE: u8 = u8::MAX;

pub type SubId = usize;
pub type MorId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mor {
    pub src: SubId,
    pub tgt: SubId,
    /// `img[x]` for `x` in the source, `NONE` elsewhere.
    pub img: Vec<u8>,
    /// The subgroup `φ(src)`.
    pub image: SubId,
}

#[derive(Clone, Debug)]
pub struct FusionSystem {
    pub p: u64,
    /// `P` as a group in its own right; element indices are `P`-indices.
    pub pg: FiniteGroup,
    /// Realizing group and the embedding of `P` into it, when known.
    pub g: Option<FiniteGroup>,
    pub p_in_g: Vec<usize>,
    pub subs: Vec<u64>,
    sub_index: HashMap<u64, SubId>,
    pub mors: Vec<Mor>,
    mor_index: HashMap<(SubId, Vec<u8>), MorId>,
    /// `hom[q][r]`: ids of `F(Q,R)`, sorted.
    pub hom: Vec<Vec<Vec<MorId>>>,
    /// Least element of `G` (or `P`) inducing each morphism.
    pub witness: Vec<usize>,
    /// Exterior class representative (least id in `{κ_Q(u)∘φ}`).
    pub ext_rep: Vec<MorId>,
}

fn mask_elems(m: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&i| m >> i & 1 == 1)
}

impl FusionSystem {
    /// `F_{G,P}` for `P ≤ G` given by the indices of its elements in `G`.
    pub fn from_group(g: &FiniteGroup, p_elems: &[usize], p: u64) -> Result<Self> {
        let pset = g.set_of(p_elems);
        if !g.is_subgroup(&pset) {
            return Err(Error::NotSubgroup("P is not a subgroup of G".into()));
        }
        let pg = g.subgroup_as_group(&pset);
        let order = pg.order();
        if order > 64 {
            return Err(Error::CapExceeded(format!("|P| = {order} exceeds 64")));
        }
        let mut o = order as u64;
        while o % p == 0 {
            o /= p;
        }
        if o != 1 {
            return Err(Error::NotPGroup { order, p });
        }
        let p_in_g: Vec<usize> = (0..order).map(|i| g.index_of(pg.elem(i)).unwrap()).collect();
        let g_to_p: HashMap<usize, usize> = p_in_g.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let conj_tables: Vec<Vec<u8>> = (0..g.order())
            .map(|h| {
                (0..order)
                    .map(|x| g_to_p.get(&g.conj(h, p_in_g[x])).map_or(NONE, |&y| y as u8))
                    .collect()
            })
            .collect();
        Ok(Self::build(p, pg, Some(g.clone()), p_in_g, &conj_tables))
    }

    /// Trivial fusion `F_P`.
    pub fn of_p_group(pg: &FiniteGroup, p: u64) -> Result<Self> {
        let all: Vec<usize> = (0..pg.order()).collect();
        let mut f = Self::from_group(pg, &all, p)?;
        f.g = None;
        Ok(f)
    }

    fn build(p: u64, pg: FiniteGroup, g: Option<FiniteGroup>, p_in_g: Vec<usize>, conj: &[Vec<u8>]) -> Self {
        let n = pg.order();
        let mut subs: Vec<u64> = pg
            .subgroups()
            .into_iter()
            .map(|s| s.ones().fold(0u64, |m, i| m | 1 << i))
            .collect();
        subs.sort_by_key(|&m| (m.count_ones(), mask_elems(m).collect::<Vec<_>>()));
        let sub_index: HashMap<u64, SubId> = subs.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let ns = subs.len();
        let mut mors: Vec<Mor> = Vec::new();
        let mut mor_index = HashMap::new();
        let mut witness = Vec::new();
        let mut hom = vec![vec![Vec::new(); ns]; ns];
        for q in 0..ns {
            for r in 0..ns {
                if subs[r].count_ones() > subs[q].count_ones() {
                    continue;
                }
                let mut found: BTreeSet<(Vec<u8>, usize)> = BTreeSet::new();
                let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
                for (h, table) in conj.iter().enumerate() {
                    let mut img = vec![NONE; n];
                    let mut ok = true;
                    for x in mask_elems(subs[r]) {
                        let y = table[x];
                        if y == NONE || subs[q] >> y & 1 == 0 {
                            ok = false;
                            break;
                        }
                        img[x] = y;
                    }
                    if ok {
                        seen.entry(img).or_insert(h);
                    }
                }
                for (img, h) in seen {
                    found.insert((img, h));
                }
                for (img, h) in found {
                    let im = mask_elems(subs[r]).fold(0u64, |m, x| m | 1 << img[x]);
                    let id = mors.len();
                    mor_index.insert((q, img.clone()), id);
                    mors.push(Mor { src: r, tgt: q, img, image: sub_index[&im] });
                    witness.push(h);
                    hom[q][r].push(id);
                }
            }
        }
        let mut f = FusionSystem {
            p,
            pg,
            g,
            p_in_g,
            subs,
            sub_index,
            mors,
            mor_index,
            hom,
            witness,
            ext_rep: vec![],
        };
        f.ext_rep = (0..f.mors.len())
            .map(|m| {
                let q = f.mors[m].tgt;
                mask_elems(f.subs[q])
                    .map(|u| f.compose(f.conj_mor(u, q, q), m))
                    .min()
                    .unwrap()
            })
            .collect();
        f
    }

    pub fn order_p(&self) -> usize {
        self.pg.order()
    }

    pub fn num_subs(&self) -> usize {
        self.subs.len()
    }

    pub fn sub_order(&self, q: SubId) -> usize {
        self.subs[q].count_ones() as usize
    }

    pub fn sub_elems(&self, q: SubId) -> Vec<usize> {
        mask_elems(self.subs[q]).collect()
    }

    pub fn sub_id(&self, mask: u64) -> SubId {
        self.sub_index[&mask]
    }

    pub fn try_sub_id(&self, mask: u64) -> Option<SubId> {
        self.sub_index.get(&mask).copied()
    }

    pub fn whole(&self) -> SubId {
        self.subs.len() - 1
    }

    pub fn trivial(&self) -> SubId {
        0
    }

    pub fn contains(&self, q: SubId, x: usize) -> bool {
        self.subs[q] >> x & 1 == 1
    }

    pub fn is_subset(&self, r: SubId, q: SubId) -> bool {
        self.subs[r] & !self.subs[q] == 0
    }

    /// Subgroup generated by a mask of elements.
    pub fn generated(&self, mask: u64) -> SubId {
        let gens: Vec<usize> = mask_elems(mask).collect();
        let s = self.pg.closure(&gens);
        self.sub_id(s.ones().fold(0, |m, i| m | 1 << i))
    }

    pub fn join(&self, a: SubId, b: SubId) -> SubId {
        self.generated(self.subs[a] | self.subs[b])
    }

    pub fn meet(&self, a: SubId, b: SubId) -> SubId {
        self.sub_id(self.subs[a] & self.subs[b])
    }

    pub fn conj_sub(&self, u: usize, q: SubId) -> SubId {
        self.sub_id(mask_elems(self.subs[q]).fold(0, |m, x| m | 1 << self.pg.conj(u, x)))
    }

    pub fn normalizer(&self, q: SubId) -> SubId {
        let m = (0..self.order_p())
            .filter(|&u| self.conj_sub(u, q) == q)
            .fold(0u64, |m, u| m | 1 << u);
        self.sub_id(m)
    }

    pub fn centralizer(&self, q: SubId) -> SubId {
        let m = (0..self.order_p())
            .filter(|&u| mask_elems(self.subs[q]).all(|x| self.pg.mul(u, x) == self.pg.mul(x, u)))
            .fold(0u64, |m, u| m | 1 << u);
        self.sub_id(m)
    }

    pub fn center(&self, q: SubId) -> SubId {
        self.meet(self.centralizer(q), q)
    }

    /// Least-id representative of the `P`-conjugacy class.
    pub fn p_class_rep(&self, q: SubId) -> SubId {
        (0..self.order_p()).map(|u| self.conj_sub(u, q)).min().unwrap()
    }

    /// Representatives `𝒞_P` of the `P`-conjugacy classes, in id order.
    pub fn p_class_reps(&self) -> Vec<SubId> {
        (0..self.num_subs()).filter(|&q| self.p_class_rep(q) == q).collect()
    }

    pub fn mor(&self, m: MorId) -> &Mor {
        &self.mors[m]
    }

    pub fn find(&self, tgt: SubId, img: &[u8]) -> Option<MorId> {
        self.mor_index.get(&(tgt, img.to_vec())).copied()
    }

    pub fn apply(&self, m: MorId, x: usize) -> usize {
        let y = self.mors[m].img[x];
        debug_assert!(y != NONE);
        y as usize
    }

    /// `a ∘ b`.
    pub fn compose(&self, a: MorId, b: MorId) -> MorId {
        let (ma, mb) = (&self.mors[a], &self.mors[b]);
        assert_eq!(ma.src, mb.tgt, "not composable");
        let img: Vec<u8> = mb.img.iter().map(|&y| if y == NONE { NONE } else { ma.img[y as usize] }).collect();
        self.find(ma.tgt, &img).expect("composition left the fusion system")
    }

    /// Composition as raw tables, without the membership lookup.
    pub fn compose_raw(&self, a: &[u8], b: &[u8]) -> Vec<u8> {
        b.iter().map(|&y| if y == NONE { NONE } else { a[y as usize] }).collect()
    }

    pub fn identity(&self, q: SubId) -> MorId {
        self.inclusion(q, q)
    }

    pub fn inclusion(&self, q: SubId, r: SubId) -> MorId {
        let mut img = vec![NONE; self.order_p()];
        for x in mask_elems(self.subs[r]) {
            img[x] = x as u8;
        }
        self.find(q, &img).expect("inclusion missing")
    }

    /// `κ_{Q,R}(u)`: conjugation by `u ∈ P`, requiring `u R u⁻¹ ⊆ Q`.
    pub fn conj_mor(&self, u: usize, q: SubId, r: SubId) -> MorId {
        let mut img = vec![NONE; self.order_p()];
        for x in mask_elems(self.subs[r]) {
            img[x] = self.pg.conj(u, x) as u8;
        }
        self.find(q, &img).expect("conjugation missing")
    }

    pub fn is_iso(&self, m: MorId) -> bool {
        self.mors[m].image == self.mors[m].tgt
    }

    /// Corestriction to the image followed by inversion: `φ(R) → R`.
    pub fn inverse_on_image(&self, m: MorId) -> MorId {
        let mm = &self.mors[m];
        let mut img = vec![NONE; self.order_p()];
        for x in mask_elems(self.subs[mm.src]) {
            img[mm.img[x] as usize] = x as u8;
        }
        self.find(mm.src, &img).expect("inverse missing")
    }

    /// `φ` with target changed to any `Q'` containing its image.
    pub fn corestrict(&self, m: MorId, q: SubId) -> Option<MorId> {
        let mm = &self.mors[m];
        if !self.is_subset(mm.image, q) {
            return None;
        }
        self.find(q, &mm.img)
    }

    /// Restriction of `φ` to `R' ≤ R`, with the same target.
    pub fn restrict(&self, m: MorId, r: SubId) -> MorId {
        let mm = &self.mors[m];
        assert!(self.is_subset(r, mm.src));
        let img: Vec<u8> = (0..self.order_p())
            .map(|x| if self.contains(r, x) { mm.img[x] } else { NONE })
            .collect();
        self.find(mm.tgt, &img).expect("restriction missing")
    }

    /// Least id in the double class `Q·η·N_P(T)` of `η ∈ F(Q,T)`, where
    /// `(u,n)·η = κ_u∘η∘κ_n⁻¹`.
    pub fn double_class_rep(&self, eta: MorId) -> MorId {
        let (q, t) = (self.mors[eta].tgt, self.mors[eta].src);
        let nt = self.sub_elems(self.normalizer(t));
        let te = self.sub_elems(t);
        let mut best = eta;
        for a in self.sub_elems(q) {
            for &b in &nt {
                let bi = self.pg.inv(b);
                let mut img = vec![NONE; self.order_p()];
                for &x in &te {
                    let y = self.apply(eta, self.pg.conj(bi, x));
                    img[x] = self.pg.conj(a, y) as u8;
                }
                let m = self.find(q, &img).expect("double class left F(Q,T)");
                best = best.min(m);
            }
        }
        best
    }

    /// Representatives of `Q\F(Q,T)/N_P(T)`, in id order.
    pub fn double_class_reps(&self, q: SubId, t: SubId) -> Vec<MorId> {
        let mut v: Vec<MorId> = self.hom[q][t].iter().map(|&m| self.double_class_rep(m)).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn aut(&self, q: SubId) -> &[MorId] {
        &self.hom[q][q]
    }

    /// `F_P(Q) = {κ_u : u ∈ N_P(Q)}` as a sorted id list.
    pub fn fp_aut(&self, q: SubId) -> Vec<MorId> {
        let n = self.normalizer(q);
        let mut v: Vec<MorId> = self.sub_elems(n).into_iter().map(|u| self.conj_mor(u, q, q)).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn inn(&self, q: SubId) -> Vec<MorId> {
        let mut v: Vec<MorId> = self.sub_elems(q).into_iter().map(|u| self.conj_mor(u, q, q)).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn mor_order(&self, m: MorId) -> usize {
        let q = self.mors[m].tgt;
        let id = self.identity(q);
        let mut x = m;
        let mut k = 1;
        while x != id {
            x = self.compose(x, m);
            k += 1;
        }
        k
    }

    /// Whether `Q` and `R` are `F`-isomorphic.
    pub fn f_isomorphic(&self, q: SubId, r: SubId) -> bool {
        self.sub_order(q) == self.sub_order(r) && !self.hom[q][r].is_empty()
    }

    /// `F`-isomorphism class of `Q`, in id order.
    pub fn f_class(&self, q: SubId) -> Vec<SubId> {
        (0..self.num_subs()).filter(|&r| self.f_isomorphic(r, q)).collect()
    }

    /// `𝒞_F` representative: maximizes `|N_P|`, then `|C_P|`, then least id.
    pub fn f_class_rep(&self, q: SubId) -> SubId {
        self.f_class(q)
            .into_iter()
            .max_by_key(|&r| {
                (self.sub_order(self.normalizer(r)), self.sub_order(self.centralizer(r)), std::cmp::Reverse(r))
            })
            .unwrap()
    }

    pub fn f_class_reps(&self) -> Vec<SubId> {
        (0..self.num_subs()).filter(|&q| self.f_class_rep(q) == q).collect()
    }

    /// The least-id isomorphism `Q → Q̂` onto the class representative.
    pub fn iso_to_rep(&self, q: SubId) -> MorId {
        let rep = self.f_class_rep(q);
        self.hom[rep][q][0]
    }

    /// Exterior classes in `F̃(Q,R)`, as representative ids.
    pub fn ext_classes(&self, q: SubId, r: SubId) -> Vec<MorId> {
        let mut v: Vec<MorId> = self.hom[q][r].iter().map(|&m| self.ext_rep[m]).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn ext_compose(&self, a: MorId, b: MorId) -> MorId {
        self.ext_rep[self.compose(a, b)]
    }

    pub fn fully_centralized(&self, q: SubId) -> bool {
        let c = self.centralizer(q);
        let qc = self.join(q, c);
        self.hom[self.whole()][qc].iter().all(|&xi| {
            let xq = self.image_of_sub(xi, q);
            self.image_of_sub(xi, c) == self.centralizer(xq)
        })
    }

    pub fn fully_normalized(&self, q: SubId) -> bool {
        let nq = self.normalizer(q);
        self.hom[self.whole()][nq].iter().all(|&xi| {
            let xq = self.image_of_sub(xi, q);
            self.image_of_sub(xi, nq) == self.normalizer(xq)
        })
    }

    /// `φ(S)` for a subgroup `S` of the source.
    pub fn image_of_sub(&self, m: MorId, s: SubId) -> SubId {
        let mm = &self.mors[m];
        self.sub_id(mask_elems(self.subs[s]).fold(0u64, |a, x| a | 1 << mm.img[x]))
    }

    /// `F`-selfcentralizing: `C_P(Q') ⊆ Q'` for every `F`-conjugate `Q'`.
    pub fn is_selfcentralizing(&self, q: SubId) -> bool {
        self.f_class(q).into_iter().all(|r| self.is_subset(self.centralizer(r), r))
    }

    pub fn selfcentralizing_objects(&self) -> Vec<SubId> {
        (0..self.num_subs()).filter(|&q| self.is_selfcentralizing(q)).collect()
    }

    /// Hyperfocal subgroup: generated by `u⁻¹σ(u)` for `p′`-elements `σ ∈ F(Q)`.
    pub fn hyperfocal(&self) -> SubId {
        let mut mask = 1u64;
        for q in 0..self.num_subs() {
            for &s in self.aut(q) {
                if self.mor_order(s) as u64 % self.p == 0 {
                    continue;
                }
                for u in self.sub_elems(q) {
                    mask |= 1 << self.pg.mul(self.pg.inv(u), self.apply(s, u));
                }
            }
        }
        self.generated(mask)
    }

    pub fn check_frobenius(&self) -> FrobeniusReport {
        frobenius_report(self)
    }

    /// Subgroups of `P` as element index lists, for reports.
    pub fn describe_sub(&self, q: SubId) -> String {
        let gens = self.pg.generators_of(&self.pg.set_of(&self.sub_elems(q)));
        let parts: Vec<String> = gens.iter().map(|&x| format!("{:?}", self.pg.elem(x))).collect();
        format!("⟨{}⟩", parts.join(", "))
    }

    /// Focal subgroup of `C_P(Q)` for the fusion of `C_G(Q)`: generated by
    /// `u⁻¹·h u h⁻¹` with `u` and `h u h⁻¹` in `C_P(Q)`, `h ∈ C_G(Q)`.
    pub fn centralizer_focal(&self, q: SubId) -> Result<SubId> {
        let g = self
            .g
            .as_ref()
            .map_or_else(|| Ok(&self.pg), Ok::<&FiniteGroup, Error>)?;
        let p_in_g: Vec<usize> = if self.g.is_some() { self.p_in_g.clone() } else { (0..self.order_p()).collect() };
        let g_to_p: HashMap<usize, usize> = p_in_g.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let c = self.centralizer(q);
        let qg: Vec<usize> = self.sub_elems(q).into_iter().map(|x| p_in_g[x]).collect();
        let mut mask = 1u64;
        for h in 0..g.order() {
            if !qg.iter().all(|&x| g.mul(h, x) == g.mul(x, h)) {
                continue;
            }
            for u in self.sub_elems(c) {
                if let Some(&v) = g_to_p.get(&g.conj(h, p_in_g[u])) {
                    if self.contains(c, v) {
                        mask |= 1 << self.pg.mul(self.pg.inv(u), v);
                    }
                }
            }
        }
        Ok(self.generated(mask))
    }

    /// The hom-set cardinalities `|F(Q,R)|` and `|F̃(Q,R)|` keyed by ids.
    pub fn hom_table(&self) -> Vec<HomCount> {
        let mut out = Vec::new();
        for q in 0..self.num_subs() {
            for r in 0..self.num_subs() {
                if !self.hom[q][r].is_empty() {
                    out.push(HomCount {
                        q,
                        r,
                        morphisms: self.hom[q][r].len(),
                        exterior_classes: self.ext_classes(q, r).len(),
                    });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HomCount {
    pub q: SubId,
    pub r: SubId,
    pub morphisms: usize,
    pub exterior_classes: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FrobeniusReport {
    pub contains_fp: bool,
    pub closed_under_composition: bool,
    pub divisibility: bool,
    pub sylow: bool,
    pub extension: bool,
    pub witnesses: Vec<String>,
}

impl FrobeniusReport {
    pub fn passed(&self) -> bool {
        self.contains_fp && self.closed_under_composition && self.divisibility && self.sylow && self.extension
    }
}

fn frobenius_report(f: &FusionSystem) -> FrobeniusReport {
    let mut rep = FrobeniusReport { witnesses: vec![], ..Default::default() };
    let ns = f.num_subs();
    let n = f.order_p();
    // category containing F_P
    rep.contains_fp = (0..ns).all(|q| {
        (0..ns).all(|r| {
            (0..n).all(|u| {
                let ur = f.conj_sub(u, r);
                !f.is_subset(ur, q) || {
                    let mut img = vec![NONE; n];
                    for x in f.sub_elems(r) {
                        img[x] = f.pg.conj(u, x) as u8;
                    }
                    f.find(q, &img).is_some()
                }
            })
        })
    });
    rep.closed_under_composition = true;
    'comp: for a in 0..f.mors.len() {
        let src = f.mors[a].src;
        for r in 0..ns {
            for &b in &f.hom[src][r] {
                let img = f.compose_raw(&f.mors[a].img, &f.mors[b].img);
                if f.find(f.mors[a].tgt, &img).is_none() {
                    rep.closed_under_composition = false;
                    rep.witnesses.push(format!("composition of morphisms {a} and {b} is missing"));
                    break 'comp;
                }
            }
        }
    }
    // fullness of (F)_Q → (iGr)_Q
    rep.divisibility = true;
    'div: for q in 0..ns {
        for r in 0..ns {
            for &phi in &f.hom[q][r] {
                for r2 in 0..ns {
                    for &phi2 in &f.hom[q][r2] {
                        if !f.is_subset(f.mors[phi].image, f.mors[phi2].image) {
                            continue;
                        }
                        let inv2 = &f.mors[f.inverse_on_image(phi2)].img;
                        let img = f.compose_raw(inv2, &f.mors[phi].img);
                        if f.find(r2, &img).is_none() {
                            rep.divisibility = false;
                            rep.witnesses.push(format!(
                                "divisibility: φ'⁻¹∘φ ∉ F({},{}) for φ = {phi}, φ' = {phi2}",
                                f.describe_sub(r2),
                                f.describe_sub(r)
                            ));
                            break 'div;
                        }
                    }
                }
            }
        }
    }
    // F_P(P) Sylow in F(P)
    let pw = f.whole();
    let aut = f.aut(pw).len();
    let inn = f.fp_aut(pw).len();
    rep.sylow = aut % inn == 0 && (aut / inn) as u64 % f.p != 0;
    if !rep.sylow {
        rep.witnesses.push(format!("Sylow: |F(P)| = {aut}, |F_P(P)| = {inn}"));
    }
    // extension axiom, literal containment form
    rep.extension = true;
    'ext: for q in 0..ns {
        if !f.fully_centralized(q) {
            continue;
        }
        let fpq: BTreeSet<MorId> = f.fp_aut(q).into_iter().collect();
        for &phi in &f.hom[pw][q] {
            let fq = f.mors[phi].image;
            let inv = f.inverse_on_image(phi);
            let nfq = f.normalizer(fq);
            for r in 0..ns {
                if !f.is_subset(r, nfq) || !f.is_subset(fq, r) {
                    continue;
                }
                // action of F_R(φ(Q)) on Q through φ
                let acts = f.sub_elems(r).into_iter().all(|v| {
                    let k = f.conj_mor(v, fq, fq);
                    let phi_q = f.corestrict(phi, fq).unwrap();
                    let t = f.compose(inv, f.compose(k, phi_q));
                    fpq.contains(&t)
                });
                if !acts {
                    continue;
                }
                let exists = f.hom[pw][r].iter().any(|&z| {
                    f.sub_elems(q).into_iter().all(|u| f.apply(z, f.apply(phi, u)) == u)
                });
                if !exists {
                    rep.extension = false;
                    rep.witnesses.push(format!(
                        "extension: no ζ: {} → P inverting φ on {}",
                        f.describe_sub(r),
                        f.describe_sub(q)
                    ));
                    break 'ext;
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use crate::examples;

    #[test]
    fn s4_d8_counts() {
        let f = examples::s4_d8().fusion;
        assert_eq!(f.num_subs(), 10);
        assert_eq!(f.aut(f.whole()).len(), 4);
        assert_eq!(f.ext_classes(f.whole(), f.whole()).len(), 1);
        let z = f.center(f.whole());
        assert_eq!(f.sub_order(z), 2);
        assert!(!f.is_selfcentralizing(z));
        for q in 0..f.num_subs() {
            if f.sub_order(q) == 4 {
                assert!(f.is_selfcentralizing(q), "{}", f.describe_sub(q));
                assert!(f.fully_normalized(q));
            }
        }
    }

    #[test]
    fn transporter_scan_examples() {
        let inst = examples::s4_d8();
        let f = &inst.fusion;
        let find = |cycles: &[usize]| {
            let x = crate::perm::Perm::from_cycles(4, &[cycles[..2].to_vec(), cycles[2..].to_vec()]).unwrap();
            let gi = inst.g.index_of(&x).unwrap();
            f.p_in_g.iter().position(|&y| y == gi).unwrap()
        };
        let dt = find(&[0, 1, 2, 3]); // (0 1)(2 3)
        let q = f.generated(1 << dt);
        let tr = crate::perm::Perm::from_cycles(4, &[vec![0, 2]]).unwrap();
        let tr = f.p_in_g.iter().position(|&y| y == inst.g.index_of(&tr).unwrap()).unwrap();
        let r = f.generated(1 << tr);
        // (0 2) and (0 1)(2 3) are not conjugate in S4
        assert!(f.hom[q][r].is_empty());
        let z = f.center(f.whole());
        assert_eq!(f.hom[q][z].len(), 1);
    }

    #[test]
    fn frobenius_axioms() {
        for inst in examples::desk() {
            let rep = inst.fusion.check_frobenius();
            assert!(rep.passed(), "{}: {:?}", inst.name, rep);
        }
        let rep = examples::s4_v4().fusion.check_frobenius();
        assert!(!rep.sylow);
        assert!(!rep.witnesses.is_empty());
        // Aut(C2) = 1, so a non-Sylow C2 still yields a Frobenius category
        assert!(examples::s4_c2().fusion.check_frobenius().passed());
    }

    /// `P ∩ O^p(G)`, computed from the group.
    fn hyperfocal_oracle(inst: &examples::Instance) -> u64 {
        let g = &inst.g;
        let op = g.o_upper_p(&g.whole(), inst.p);
        let f = &inst.fusion;
        (0..f.order_p()).filter(|&x| op.contains(f.p_in_g[x])).fold(0, |m, x| m | 1 << x)
    }

    #[test]
    fn hyperfocal_matches_group_oracle() {
        for inst in examples::desk() {
            let f = &inst.fusion;
            assert_eq!(f.subs[f.hyperfocal()], hyperfocal_oracle(&inst), "{}", inst.name);
        }
        let f = examples::s4_d8().fusion;
        assert_eq!(f.sub_order(f.hyperfocal()), 4);
        assert!(f.fully_normalized(f.hyperfocal()));
        let f = examples::a4_v4().fusion;
        assert_eq!(f.hyperfocal(), f.whole());
        assert_eq!(examples::c2xc2().fusion.hyperfocal(), 0);
    }

    #[test]
    fn fully_centralized_representatives() {
        for inst in examples::desk() {
            let f = &inst.fusion;
            assert!(f.fully_normalized(f.whole()));
            for q in f.f_class_reps() {
                assert!(f.fully_normalized(q) && f.fully_centralized(q), "{}", inst.name);
            }
        }
    }

    #[test]
    fn exterior_classes_respect_composition() {
        let f = examples::s4_d8().fusion;
        for a in 0..f.mors.len() {
            for r in 0..f.num_subs() {
                for &b in &f.hom[f.mors[a].src][r] {
                    let c = f.ext_compose(a, b);
                    assert_eq!(c, f.ext_compose(f.ext_rep[a], f.ext_rep[b]));
                }
            }
        }
    }
}
