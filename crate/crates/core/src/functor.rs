//! Functors from the exterior quotient `F̃` to finite abelian groups.
//!
//! The kernel functor of a basic locality is a coordinate direct sum over
//! types `(T,η)`, so its filtration by closed sets of types and the layers of
//! that filtration are coordinate selections. For a fixed `U ∈ 𝒞_P` the layer
//! is also described through `n^U(Q) = Π_{η∈F(Q,U)} N̄_{Q×P}(Δ_η(U))`: it is
//! the fixed part of `V(Q) = ⊕_η ab(N̄_η)` under `Q×N_P(U)`. The `𝔰_m`
//! layers of the fixed and cofixed parts, matched by the trace, carry the
//! compatible complement.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::abelian::{abelianization, induced_hom, inverse, transfer, AbHom, AbSubgroup, FinAb, FpLayer};
use crate::error::{Error, Result};
use crate::fusion::{FusionSystem, MorId, SubId, NONE};
use crate::group::Subgroup;
use crate::locality::{kernel_action_formula, pair, pair_inv, pair_mul, KernelLayout, Locality, NBar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variance {
    Contravariant,
    Covariant,
}

/// A functor `F̃ → 𝔄𝔟` (or to its opposite). For `φ: R → Q` a contravariant
/// map goes `values[Q] → values[R]`, a covariant one `values[R] → values[Q]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbFunctor {
    pub variance: Variance,
    /// Indexed by `SubId`.
    pub values: Vec<FinAb>,
    /// Keyed by exterior class representative.
    pub maps: BTreeMap<MorId, AbHom>,
}

/// Representatives of all exterior classes, in id order.
pub fn exterior_morphisms(f: &FusionSystem) -> Vec<MorId> {
    (0..f.mors.len()).filter(|&m| f.ext_rep[m] == m).collect()
}

impl AbFunctor {
    pub fn build(f: &FusionSystem, variance: Variance, values: Vec<FinAb>, mut g: impl FnMut(MorId) -> AbHom) -> Self {
        let maps = exterior_morphisms(f).into_iter().map(|m| (m, g(m))).collect();
        AbFunctor { variance, values, maps }
    }

    pub fn zero(f: &FusionSystem, variance: Variance) -> Self {
        let values = vec![FinAb::zero_group(); f.num_subs()];
        Self::build(f, variance, values, |_| AbHom::zero(&FinAb::zero_group(), &FinAb::zero_group()))
    }

    /// The map of the exterior class of `φ`.
    pub fn map(&self, f: &FusionSystem, phi: MorId) -> &AbHom {
        &self.maps[&f.ext_rep[phi]]
    }

    /// Identities go to identities and composition is respected, on every
    /// composable pair of exterior classes. Returns the number of pairs.
    pub fn check_functorial(&self, f: &FusionSystem) -> Result<usize> {
        let fail = |s: String| Err(Error::FunctorialityFailure(s));
        for q in 0..f.num_subs() {
            let h = self.map(f, f.identity(q));
            if *h != AbHom::identity(&self.values[q]) {
                return fail(format!("identity of {} is not sent to the identity", f.describe_sub(q)));
            }
        }
        for (&m, h) in &self.maps {
            let (q, r) = (f.mors[m].tgt, f.mors[m].src);
            let (from, to) = match self.variance {
                Variance::Contravariant => (q, r),
                Variance::Covariant => (r, q),
            };
            if h.src != self.values[from] || h.tgt != self.values[to] {
                return fail(format!("map of morphism {m} has the wrong shape"));
            }
        }
        let mut pairs = 0;
        for (&a, ha) in &self.maps {
            let r = f.mors[a].src;
            for t in 0..f.num_subs() {
                for &b in f.ext_classes(r, t).iter() {
                    let hb = &self.maps[&b];
                    let ab = &self.maps[&f.ext_compose(a, b)];
                    let composed = match self.variance {
                        Variance::Contravariant => hb.compose(ha),
                        Variance::Covariant => ha.compose(hb),
                    };
                    if composed != *ab {
                        return fail(format!("composition of morphisms {a} and {b}"));
                    }
                    pairs += 1;
                }
            }
        }
        Ok(pairs)
    }
}

/// `𝔨̃^b`: values `Ker(Q)`, maps from the conjugation route of the locality.
pub fn kernel_functor(loc: &Locality) -> AbFunctor {
    let values = loc.layouts.iter().map(|l| l.group.clone()).collect();
    AbFunctor::build(loc.f, Variance::Contravariant, values, |m| loc.kernel_action(m))
}

/// Checks that `θ_Q: a(Q) → b(Q)` are isomorphisms commuting with the maps
/// of every exterior class. Returns the number of classes checked.
pub fn check_natural_iso(f: &FusionSystem, a: &AbFunctor, b: &AbFunctor, theta: &[AbHom]) -> Result<usize> {
    let fail = |s: String| Err(Error::NaturalityFailure(s));
    if a.variance != b.variance {
        return fail("functors of different variance".into());
    }
    for (q, t) in theta.iter().enumerate() {
        if t.src != a.values[q] || t.tgt != b.values[q] || !t.is_bijective() {
            return fail(format!("component at {} is not an isomorphism", f.describe_sub(q)));
        }
    }
    for (&m, ha) in &a.maps {
        let (q, r) = (f.mors[m].tgt, f.mors[m].src);
        let (from, to) = match a.variance {
            Variance::Contravariant => (q, r),
            Variance::Covariant => (r, q),
        };
        if b.maps[&m].compose(&theta[from]) != theta[to].compose(ha) {
            return fail(format!("square for morphism {m} does not commute"));
        }
    }
    Ok(a.maps.len())
}

/// A natural isomorphism between the kernel functors of two basic
/// localities over the same `F`. Kernel coordinates are indexed by orbit
/// types and their `N̄` abelianizations, which depend on `F` alone, so the
/// candidate is the identity in coordinates; it is then verified.
pub fn kernel_functor_iso(la: &Locality, lb: &Locality) -> Result<Vec<AbHom>> {
    let f = la.f;
    let (a, b) = (kernel_functor(la), kernel_functor(lb));
    if a.values != b.values {
        return Err(Error::NaturalityFailure("kernel groups differ in coordinates".into()));
    }
    let theta: Vec<AbHom> = a.values.iter().map(AbHom::identity).collect();
    check_natural_iso(f, &a, &b, &theta)?;
    Ok(theta)
}

/// `𝔨̃^b` computed from `F` alone, through the transfer formula.
pub fn kernel_functor_from_fusion(f: &FusionSystem, layouts: &[KernelLayout]) -> AbFunctor {
    let values = layouts.iter().map(|l| l.group.clone()).collect();
    AbFunctor::build(f, Variance::Contravariant, values, |m| {
        let (q, r) = (f.mors[m].tgt, f.mors[m].src);
        kernel_action_formula(f, &layouts[q], &layouts[r], m)
    })
}

/// `U ≤_P T`: some `P`-conjugate of `T` contains `U`.
pub fn p_subconjugate(f: &FusionSystem, u: SubId, t: SubId) -> bool {
    (0..f.order_p()).any(|x| f.is_subset(u, f.conj_sub(x, t)))
}

/// `N ⊆ 𝒞_P` is closed when it contains every `U ∈ 𝒞_P` with `U ≤_P T` for
/// some `T ∈ N`.
pub fn is_closed(f: &FusionSystem, n: &[SubId]) -> bool {
    let reps = f.p_class_reps();
    n.iter().all(|&t| reps.iter().all(|&u| !p_subconjugate(f, u, t) || n.contains(&u)))
}

/// Coordinates of `Ker(Q)` in summands whose subgroup satisfies `keep`.
fn type_coords(lay: &KernelLayout, keep: impl Fn(SubId) -> bool) -> Vec<usize> {
    (0..lay.types.len()).filter(|&ti| keep(lay.types[ti].t)).flat_map(|ti| lay.range(ti)).collect()
}

fn select(g: &FinAb, coords: &[usize]) -> FinAb {
    FinAb { orders: coords.iter().map(|&i| g.orders[i]).collect() }
}

fn submatrix(h: &AbHom, rows: &[usize], cols: &[usize]) -> AbHom {
    let src = select(&h.src, cols);
    let tgt = select(&h.tgt, rows);
    let mat = rows.iter().map(|&i| cols.iter().map(|&j| h.mat[i][j]).collect()).collect();
    AbHom { src, tgt, mat }
}

/// `𝔨̃^N`: the summands `(T,η)` with `T ∈ N`.
pub fn filtration_subfunctor(
    f: &FusionSystem,
    kf: &AbFunctor,
    layouts: &[KernelLayout],
    n: &[SubId],
) -> Result<AbFunctor> {
    if !is_closed(f, n) {
        return Err(Error::NotClosed(format!("{n:?} is not downward closed")));
    }
    let inside: Vec<Vec<usize>> = layouts.iter().map(|l| type_coords(l, |t| n.contains(&t))).collect();
    let outside: Vec<Vec<usize>> = layouts.iter().map(|l| type_coords(l, |t| !n.contains(&t))).collect();
    let mut maps = BTreeMap::new();
    for (&m, h) in &kf.maps {
        let (q, r) = (f.mors[m].tgt, f.mors[m].src);
        if !submatrix(h, &outside[r], &inside[q]).is_zero() {
            return Err(Error::NotClosed(format!("morphism {m} leaves the subfunctor")));
        }
        maps.insert(m, submatrix(h, &inside[r], &inside[q]));
    }
    let values = layouts.iter().zip(&inside).map(|(l, c)| select(&l.group, c)).collect();
    Ok(AbFunctor { variance: Variance::Contravariant, values, maps })
}

/// `𝔨̃^U = 𝔨̃^{N∪{U}}/𝔨̃^N` for `U` minimal in `𝒞_P − N`.
pub fn layer_functor(
    f: &FusionSystem,
    kf: &AbFunctor,
    layouts: &[KernelLayout],
    n: &[SubId],
    u: SubId,
) -> Result<AbFunctor> {
    let mut m_set = n.to_vec();
    m_set.push(u);
    if f.p_class_rep(u) != u || n.contains(&u) || !is_closed(f, n) || !is_closed(f, &m_set) {
        return Err(Error::NotMinimal(format!("{} over {n:?}", f.describe_sub(u))));
    }
    let big = filtration_subfunctor(f, kf, layouts, &m_set)?;
    let coords: Vec<Vec<usize>> = layouts
        .iter()
        .map(|l| {
            let kept: Vec<usize> = (0..l.types.len()).filter(|&ti| m_set.contains(&l.types[ti].t)).collect();
            let mut pos = 0;
            let mut out = Vec::new();
            for ti in kept {
                let w = l.range(ti).len();
                if l.types[ti].t == u {
                    out.extend(pos..pos + w);
                }
                pos += w;
            }
            out
        })
        .collect();
    let mut maps = BTreeMap::new();
    for (&m, h) in &big.maps {
        let (q, r) = (f.mors[m].tgt, f.mors[m].src);
        maps.insert(m, submatrix(h, &coords[r], &coords[q]));
    }
    let values = big.values.iter().zip(&coords).map(|(g, c)| select(g, c)).collect();
    Ok(AbFunctor { variance: Variance::Contravariant, values, maps })
}

/// `V(Q) = ⊕_{η∈F(Q,U)} ab(N̄_{Q×P}(Δ_η(U)))`, summands in id order of `η`.
#[derive(Clone, Debug)]
pub struct UFamily {
    pub q: SubId,
    pub etas: Vec<MorId>,
    pub nbars: Vec<NBar>,
    pub offsets: Vec<usize>,
    pub group: FinAb,
}

impl UFamily {
    fn new(f: &FusionSystem, q: SubId, u: SubId) -> Self {
        let etas = f.hom[q][u].clone();
        let nbars: Vec<NBar> = etas.iter().map(|&e| NBar::new(f, q, u, e)).collect();
        let mut offsets = Vec::new();
        let mut acc = 0;
        for nb in &nbars {
            offsets.push(acc);
            acc += nb.ab.group.rank();
        }
        let group = FinAb::direct_sum(&nbars.iter().map(|nb| nb.ab.group.clone()).collect::<Vec<_>>());
        UFamily { q, etas, nbars, offsets, group }
    }

    pub fn index(&self, eta: MorId) -> usize {
        self.etas.binary_search(&eta).expect("morphism outside F(Q,U)")
    }

    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i] + self.nbars[i].ab.group.rank()
    }
}

/// Adds `h` as the block from summand range `cols` to summand range `rows`.
fn add_block(out: &mut AbHom, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>, h: &AbHom) {
    for (hi, i) in rows.enumerate() {
        for (hj, j) in cols.clone().enumerate() {
            out.mat[i][j] = (out.mat[i][j] + h.mat[hi][hj]) % out.tgt.orders[i];
        }
    }
}

/// The functor `n^U` with its actions, for a fixed `U ∈ 𝒞_P`.
pub struct NU<'a> {
    pub f: &'a FusionSystem,
    pub u: SubId,
    pub fams: Vec<UFamily>,
    normalizer: Vec<usize>,
}

impl<'a> NU<'a> {
    pub fn new(f: &'a FusionSystem, u: SubId) -> Self {
        let fams = (0..f.num_subs()).map(|q| UFamily::new(f, q, u)).collect();
        let normalizer = f.sub_elems(f.normalizer(u));
        NU { f, u, fams, normalizer }
    }

    /// `(v,n)·η = κ_v∘η∘κ_n⁻¹` for `v ∈ Q` and `n ∈ N_P(U)`.
    pub fn act_eta(&self, q: SubId, v: usize, n: usize, eta: MorId) -> MorId {
        let f = self.f;
        let ni = f.pg.inv(n);
        let mut img = vec![NONE; f.order_p()];
        for x in f.sub_elems(self.u) {
            img[x] = f.pg.conj(v, f.apply(eta, f.pg.conj(ni, x))) as u8;
        }
        f.find(q, &img).expect("F(Q,U) is stable under Q×N_P(U)")
    }

    /// Conjugation by `(v,n)`: `ab(N̄_η) ≅ ab(N̄_{(v,n)·η})` for summand `i` of
    /// `V(Q)`. Returns the target summand with the isomorphism.
    pub fn conj_iso(&self, q: SubId, i: usize, v: usize, n: usize) -> (usize, AbHom) {
        let fam = &self.fams[q];
        let j = fam.index(self.act_eta(q, v, n, fam.etas[i]));
        let (src, tgt) = (&fam.nbars[i], &fam.nbars[j]);
        let pg = &self.f.pg;
        let c = pair(self.f.order_p(), v, n);
        let ci = pair_inv(pg, c);
        let h = induced_hom(&src.ab, &tgt.ab, |e| {
            let g = pair_mul(pg, pair_mul(pg, c, src.rep[e]), ci);
            tgt.elem(g).expect("conjugate normalizes the conjugate diagonal")
        });
        (j, h)
    }

    /// The action of `(v,n) ∈ Q×N_P(U)` on `V(Q)`.
    pub fn action(&self, q: SubId, v: usize, n: usize) -> AbHom {
        let fam = &self.fams[q];
        let mut out = AbHom::zero(&fam.group, &fam.group);
        for i in 0..fam.etas.len() {
            let (j, h) = self.conj_iso(q, i, v, n);
            add_block(&mut out, fam.range(j), fam.range(i), &h);
        }
        out
    }

    fn acting_pairs(&self, q: SubId) -> Vec<(usize, usize)> {
        let qe = self.f.sub_elems(q);
        qe.iter().map(|&v| (v, 0)).chain(self.normalizer.iter().map(|&n| (0, n))).collect()
    }

    /// The fixed subgroup `V(Q)^{Q×N_P(U)}`.
    pub fn fixed(&self, q: SubId) -> AbSubgroup {
        let g = &self.fams[q].group;
        if g.rank() == 0 {
            return AbSubgroup::new(g, vec![]);
        }
        let mut rows: Vec<Vec<i64>> = Vec::new();
        let mut moduli = Vec::new();
        for (v, n) in self.acting_pairs(q) {
            let a = self.action(q, v, n);
            for i in 0..g.rank() {
                rows.push((0..g.rank()).map(|j| a.mat[i][j] as i64 - i64::from(i == j)).collect());
                moduli.push(g.orders[i]);
            }
        }
        let sys = crate::smith::LinearSystem::new(&rows, &moduli, Some(&g.orders), g.rank());
        let gens = sys.kernel().into_iter().map(|mut x| {
            g.reduce(&mut x);
            x
        });
        AbSubgroup::new(g, gens.collect())
    }

    /// `I(Q) = ⟨g·a − a⟩`, so that `V(Q)/I(Q)` is the cofixed quotient.
    pub fn cofixed_relations(&self, q: SubId) -> AbSubgroup {
        let g = &self.fams[q].group;
        let mut gens = Vec::new();
        for (v, n) in self.acting_pairs(q) {
            let a = self.action(q, v, n);
            for j in 0..g.rank() {
                gens.push(g.sub(&a.column(j), &g.basis(j)));
            }
        }
        AbSubgroup::new(g, gens)
    }

    /// `tr_Q`: on summand `η`, the sum of the conjugates `(v,n)·a_η` over a
    /// transversal of the stabilizer `N_{Q×P}(Δ_η(U))` in `Q×N_P(U)`.
    pub fn trace(&self, q: SubId) -> AbHom {
        let fam = &self.fams[q];
        let mut out = AbHom::zero(&fam.group, &fam.group);
        for i in 0..fam.etas.len() {
            let mut seen = vec![false; fam.etas.len()];
            for v in self.f.sub_elems(q) {
                for &n in &self.normalizer {
                    let (j, h) = self.conj_iso(q, i, v, n);
                    if !seen[j] {
                        seen[j] = true;
                        add_block(&mut out, fam.range(j), fam.range(i), &h);
                    }
                }
            }
        }
        out
    }

    /// `φ_θ: N̄_{R×P}(Δ_θ(U)) → N̄_{Q×P}(Δ_{φθ}(U))`, induced by `φ×id`, as
    /// the target summand and an element table.
    fn phi_theta(&self, phi: MorId, ti: usize) -> (usize, Vec<usize>) {
        let f = self.f;
        let n = f.order_p();
        let (q, r) = (f.mors[phi].tgt, f.mors[phi].src);
        let (fr, fq) = (&self.fams[r], &self.fams[q]);
        let j = fq.index(f.compose(phi, fr.etas[ti]));
        let nr = &fr.nbars[ti];
        let table = (0..nr.order())
            .map(|e| {
                let g = nr.rep[e];
                fq.nbars[j].elem(pair(n, f.apply(phi, g / n), g % n)).expect("φ×id normalizes Δ_{φθ}")
            })
            .collect();
        (j, table)
    }

    /// `ab(φ_θ)`.
    fn ab_phi_theta(&self, phi: MorId, ti: usize) -> (usize, AbHom) {
        let f = self.f;
        let (q, r) = (f.mors[phi].tgt, f.mors[phi].src);
        let (j, table) = self.phi_theta(phi, ti);
        (j, induced_hom(&self.fams[r].nbars[ti].ab, &self.fams[q].nbars[j].ab, |e| table[e]))
    }

    /// `ab^c(φ_θ)`: transfer to the image of the injective `φ_θ`, then back.
    fn abc_phi_theta(&self, phi: MorId, ti: usize) -> (usize, AbHom) {
        let f = self.f;
        let (q, r) = (f.mors[phi].tgt, f.mors[phi].src);
        let (j, table) = self.phi_theta(phi, ti);
        let (nr, nq) = (&self.fams[r].nbars[ti], &self.fams[q].nbars[j]);
        let mut img = Subgroup::with_capacity(nq.order());
        let mut back = HashMap::new();
        for (e, &x) in table.iter().enumerate() {
            img.insert(x);
            back.insert(x, e);
        }
        debug_assert_eq!(back.len(), nr.order(), "φ_θ is injective");
        let ab_img = abelianization(&nq.group, &img);
        let tr = transfer(&nq.group, &nq.group.whole(), &img, &nq.ab, &ab_img);
        (j, induced_hom(&ab_img, &nr.ab, |x| back[&x]).compose(&tr))
    }

    /// `(ab^c∘n^U)(φ): V(Q) → V(R)`, `a ↦ Σ_θ ab^c(φ_θ)(a_{φθ})`.
    pub fn contravariant_map(&self, phi: MorId) -> AbHom {
        let f = self.f;
        let (q, r) = (f.mors[phi].tgt, f.mors[phi].src);
        let mut out = AbHom::zero(&self.fams[q].group, &self.fams[r].group);
        for ti in 0..self.fams[r].etas.len() {
            let (j, h) = self.abc_phi_theta(phi, ti);
            add_block(&mut out, self.fams[r].range(ti), self.fams[q].range(j), &h);
        }
        out
    }

    /// `(ab∘n^U)(φ): V(R) → V(Q)`, `b_θ ↦ ab(φ_θ)(b_θ)` in summand `φθ`.
    pub fn covariant_map(&self, phi: MorId) -> AbHom {
        let f = self.f;
        let (q, r) = (f.mors[phi].tgt, f.mors[phi].src);
        let mut out = AbHom::zero(&self.fams[r].group, &self.fams[q].group);
        for ti in 0..self.fams[r].etas.len() {
            let (j, h) = self.ab_phi_theta(phi, ti);
            add_block(&mut out, self.fams[q].range(j), self.fams[r].range(ti), &h);
        }
        out
    }

    /// Coordinates of the `U`-summands of `Ker(Q)` and their `η`.
    fn u_types(&self, lay: &KernelLayout) -> Vec<(usize, MorId)> {
        (0..lay.types.len()).filter(|&ti| lay.types[ti].t == self.u).map(|ti| (ti, lay.types[ti].eta)).collect()
    }

    /// The identification `𝔨̃^U(Q) ≅ V(Q)^{Q×N_P(U)}`: a representative
    /// summand `a_η` goes to the sum of its conjugates.
    pub fn layer_iso(&self, lay: &KernelLayout) -> AbHom {
        let q = lay.q;
        let fam = &self.fams[q];
        let types = self.u_types(lay);
        let src = FinAb::direct_sum(&types.iter().map(|&(ti, _)| lay.types[ti].ab.group.clone()).collect::<Vec<_>>());
        let tr = self.trace(q);
        let mut out = AbHom::zero(&src, &fam.group);
        let mut col = 0;
        for (ti, eta) in types {
            let i = fam.index(eta);
            debug_assert_eq!(lay.types[ti].ab.group, fam.nbars[i].ab.group);
            for (k, c) in fam.range(i).enumerate() {
                for row in 0..fam.group.rank() {
                    out.mat[row][col + k] = tr.mat[row][c];
                }
            }
            col += fam.range(i).len();
        }
        out
    }

    /// `𝔨̃^U(φ) = Σ_θ ab^c(φ_θ)∘ab(κ_{(v,n)})`, with `(U,θ)` running over the
    /// `U`-types of `R` and `(v,n)·η = φθ` for the type `(U,η)` of `Q`.
    pub fn layer_formula(&self, phi: MorId, lay_q: &KernelLayout, lay_r: &KernelLayout) -> AbHom {
        let f = self.f;
        let (q, r) = (lay_q.q, lay_r.q);
        let tq = self.u_types(lay_q);
        let tr = self.u_types(lay_r);
        let gq = FinAb::direct_sum(&tq.iter().map(|&(ti, _)| lay_q.types[ti].ab.group.clone()).collect::<Vec<_>>());
        let gr = FinAb::direct_sum(&tr.iter().map(|&(ti, _)| lay_r.types[ti].ab.group.clone()).collect::<Vec<_>>());
        let mut out = AbHom::zero(&gq, &gr);
        let start = |types: &[(usize, MorId)], lay: &KernelLayout, k: usize| -> usize {
            types[..k].iter().map(|&(ti, _)| lay.range(ti).len()).sum()
        };
        for (k, &(rti, theta)) in tr.iter().enumerate() {
            let ft = f.compose(phi, theta);
            let eta = f.double_class_rep(ft);
            let qk = tq.iter().position(|&(_, e)| e == eta).expect("U-type of Q");
            let fam_q = &self.fams[q];
            let i = fam_q.index(eta);
            let (v, n) = f
                .sub_elems(q)
                .into_iter()
                .flat_map(|v| self.normalizer.iter().map(move |&n| (v, n)))
                .find(|&(v, n)| self.act_eta(q, v, n, eta) == ft)
                .expect("φθ lies in the double class of its representative");
            let (j, conj) = self.conj_iso(q, i, v, n);
            debug_assert_eq!(fam_q.etas[j], ft);
            let (j2, abc) = self.abc_phi_theta(phi, self.fams[r].index(theta));
            debug_assert_eq!(j, j2);
            let block = abc.compose(&conj);
            let rs = start(&tr, lay_r, k);
            let cs = start(&tq, lay_q, qk);
            add_block(&mut out, rs..rs + lay_r.range(rti).len(), cs..cs + lay_q.range(tq[qk].0).len(), &block);
        }
        out
    }
}

/// Checks that `tr_Q` induces an isomorphism from the cofixed quotient onto
/// the fixed subgroup, for every `Q`.
pub fn check_trace_iso(nu: &NU) -> Result<()> {
    for q in 0..nu.fams.len() {
        let g = &nu.fams[q].group;
        let tr = nu.trace(q);
        let fixed = nu.fixed(q);
        let rel = nu.cofixed_relations(q);
        let fail = |s: &str| Err(Error::TraceNotIso(format!("{} at {}", s, nu.f.describe_sub(q))));
        if rel.gens.iter().any(|x| !g.is_zero(&tr.apply(x))) {
            return fail("trace does not vanish on the relations");
        }
        let image = AbSubgroup::new(g, (0..g.rank()).map(|j| tr.column(j)).collect());
        if !image.is_subgroup_of(&fixed) || !fixed.is_subgroup_of(&image) {
            return fail("trace image is not the fixed subgroup");
        }
        if g.order().div(&rel.order()) != fixed.order() {
            return fail("cofixed and fixed orders differ");
        }
    }
    Ok(())
}

/// The `𝔰_m` layers of the fixed (contravariant) and cofixed (covariant)
/// functors, the trace isomorphisms between them, and the complement
/// `φ ↦ tr^m_Q ∘ 𝔯_∘(φ) ∘ (tr^m_R)⁻¹`.
#[derive(Clone, Debug)]
pub struct RFunctors {
    pub u: SubId,
    pub m: u32,
    pub fixed: AbFunctor,
    pub cofixed: AbFunctor,
    /// `tr^m_Q: cofixed(Q) → fixed(Q)`.
    pub trace: Vec<AbHom>,
    pub complement: AbFunctor,
    /// Layers inside `V(Q)` realizing `fixed(Q)`.
    pub fixed_layers: Vec<FpLayer>,
}

pub fn r_functors(nu: &NU, m: u32) -> Result<RFunctors> {
    let f = nu.f;
    let p = f.p;
    let pm = p.pow(m);
    let mut fixed_layers = Vec::new();
    let mut cofixed_layers = Vec::new();
    let mut trace = Vec::new();
    for q in 0..f.num_subs() {
        let g = &nu.fams[q].group;
        let fix = nu.fixed(q);
        let fl = FpLayer::new(&fix.multiple(pm), &fix.multiple(pm * p), p);
        let rel = nu.cofixed_relations(q);
        let whole = AbSubgroup::whole(g);
        let cl = FpLayer::new(&whole.multiple(pm).sum(&rel), &whole.multiple(pm * p).sum(&rel), p);
        let t = cl.induced(&fl, &nu.trace(q)).expect("trace lands in the fixed layer");
        if !t.is_bijective() {
            return Err(Error::TraceNotIso(format!("layer {m} at {}", f.describe_sub(q))));
        }
        fixed_layers.push(fl);
        cofixed_layers.push(cl);
        trace.push(t);
    }
    let values: Vec<FinAb> = fixed_layers.iter().map(|l| l.space.clone()).collect();
    let co_values: Vec<FinAb> = cofixed_layers.iter().map(|l| l.space.clone()).collect();
    let mut err = None;
    let fixed = AbFunctor::build(f, Variance::Contravariant, values.clone(), |phi| {
        let (q, r) = (f.mors[phi].tgt, f.mors[phi].src);
        fixed_layers[q].induced(&fixed_layers[r], &nu.contravariant_map(phi)).unwrap_or_else(|| {
            err = Some(phi);
            AbHom::zero(&values[q], &values[r])
        })
    });
    let cofixed = AbFunctor::build(f, Variance::Covariant, co_values.clone(), |phi| {
        let (q, r) = (f.mors[phi].tgt, f.mors[phi].src);
        cofixed_layers[r].induced(&cofixed_layers[q], &nu.covariant_map(phi)).unwrap_or_else(|| {
            err = Some(phi);
            AbHom::zero(&co_values[r], &co_values[q])
        })
    });
    if let Some(phi) = err {
        return Err(Error::FunctorialityFailure(format!("morphism {phi} does not preserve the layers")));
    }
    let inv: Vec<AbHom> = trace.iter().map(|t| inverse(t).expect("trace layer is bijective")).collect();
    let complement = AbFunctor::build(f, Variance::Covariant, values, |phi| {
        let (q, r) = (f.mors[phi].tgt, f.mors[phi].src);
        trace[q].compose(cofixed.map(f, phi)).compose(&inv[r])
    });
    Ok(RFunctors { u: nu.u, m, fixed, cofixed, trace, complement, fixed_layers })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ComplementReport {
    pub u: SubId,
    pub m: u32,
    /// Non-isomorphisms `φ` with `𝔯^c(φ)∘𝔯(φ) = 0` checked.
    pub annihilation: usize,
    /// Isomorphisms `φ` with `𝔯^c(φ)∘𝔯(φ) = id` checked.
    pub isomorphisms: usize,
    /// Pairs `(φ,ψ)` with a common target for the double coset formula.
    pub mackey: usize,
    pub witnesses: Vec<String>,
}

impl ComplementReport {
    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// Representatives of `A\Q/B` for subgroups `A, B ≤ Q`.
fn double_cosets(f: &FusionSystem, q: SubId, a: SubId, b: SubId) -> Vec<usize> {
    let pg = &f.pg;
    let (ae, be) = (f.sub_elems(a), f.sub_elems(b));
    let mut covered = vec![false; f.order_p()];
    let mut reps = Vec::new();
    for w in f.sub_elems(q) {
        if covered[w] {
            continue;
        }
        reps.push(w);
        for &x in &ae {
            for &y in &be {
                covered[pg.mul(pg.mul(x, w), y)] = true;
            }
        }
    }
    reps
}

/// Annihilation and the double coset (Mackey) formula for the complement:
/// `𝔯(ψ)∘𝔯^c(φ) = Σ_{w ∈ φ(R)\Q/ψ(T)} 𝔯^c(ψ_w)∘𝔯(φ_w)` with
/// `S_w = φ(R)^w ∩ ψ(T)`, `φ(φ_w(s)) = wsw⁻¹` and `ψ(ψ_w(s)) = s`.
pub fn check_complement_identities(f: &FusionSystem, rf: &RFunctors) -> ComplementReport {
    let pg = &f.pg;
    let mut rep = ComplementReport { u: rf.u, m: rf.m, ..Default::default() };
    let (r_, c_) = (&rf.fixed, &rf.complement);
    let mut into: Vec<Vec<MorId>> = vec![Vec::new(); f.num_subs()];
    for &phi in r_.maps.keys() {
        into[f.mors[phi].tgt].push(phi);
    }
    for (&phi, h) in &r_.maps {
        let q = f.mors[phi].tgt;
        let both = c_.maps[&phi].compose(h);
        if f.is_iso(phi) {
            rep.isomorphisms += 1;
            if both != AbHom::identity(&rf.fixed.values[q]) {
                rep.witnesses.push(format!("isomorphism {phi}: complement is not inverse"));
            }
        } else {
            rep.annihilation += 1;
            if !both.is_zero() {
                rep.witnesses.push(format!("annihilation fails for morphism {phi}"));
            }
        }
    }
    for (q, list) in into.iter().enumerate() {
        for &phi in list {
            let r = f.mors[phi].src;
            let phi_r = f.mors[phi].image;
            let phi_inv = f.inverse_on_image(phi);
            for &psi in list {
                let t = f.mors[psi].src;
                let psi_t = f.mors[psi].image;
                let psi_inv = f.inverse_on_image(psi);
                let lhs = r_.maps[&psi].compose(&c_.maps[&phi]);
                let mut rhs = AbHom::zero(&lhs.src, &lhs.tgt);
                for w in double_cosets(f, q, phi_r, psi_t) {
                    let wi = pg.inv(w);
                    let s = f.meet(f.conj_sub(wi, phi_r), psi_t);
                    let mut img_phi = vec![NONE; f.order_p()];
                    let mut img_psi = vec![NONE; f.order_p()];
                    for x in f.sub_elems(s) {
                        img_phi[x] = f.apply(phi_inv, pg.conj(w, x)) as u8;
                        img_psi[x] = f.apply(psi_inv, x) as u8;
                    }
                    let phi_w = f.find(r, &img_phi).expect("φ_w ∈ F(R,S_w)");
                    let psi_w = f.find(t, &img_psi).expect("ψ_w ∈ F(T,S_w)");
                    rhs = rhs.add(&c_.map(f, psi_w).compose(r_.map(f, phi_w)));
                }
                rep.mackey += 1;
                if lhs != rhs {
                    rep.witnesses.push(format!("double coset formula fails for ({phi}, {psi})"));
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic_set::{construct_thick_basic, ConcreteBiset};
    use crate::examples;

    fn locality_of(f: &FusionSystem) -> Locality<'_> {
        let b = construct_thick_basic(f, 2).unwrap().biset;
        Locality::new(f, ConcreteBiset::realize(f, &b)).unwrap()
    }

    #[test]
    fn kernel_functor_routes_agree() {
        for inst in examples::desk() {
            let f = &inst.fusion;
            let loc = locality_of(f);
            let kf = kernel_functor(&loc);
            kf.check_functorial(f).unwrap();
            assert_eq!(kf, kernel_functor_from_fusion(f, &loc.layouts), "{}", inst.name);
            // value at the trivial subgroup is ab(P)
            let abp = abelianization(&f.pg, &f.pg.whole()).group;
            assert!(kf.values[f.trivial()].is_isomorphic(&abp), "{}", inst.name);
        }
    }

    #[test]
    fn filtration_and_layers() {
        for inst in [examples::c2(), examples::s4_d8(), examples::a4_v4()] {
            let f = &inst.fusion;
            let layouts: Vec<KernelLayout> = (0..f.num_subs()).map(|q| KernelLayout::new(f, q)).collect();
            let kf = kernel_functor_from_fusion(f, &layouts);
            let empty = filtration_subfunctor(f, &kf, &layouts, &[]).unwrap();
            assert!(empty.values.iter().all(|g| g.is_trivial()));
            let reps = f.p_class_reps();
            let all = filtration_subfunctor(f, &kf, &layouts, &reps).unwrap();
            assert_eq!(all, kf);
            let ones = filtration_subfunctor(f, &kf, &layouts, &[f.trivial()]).unwrap();
            for q in 0..f.num_subs() {
                let ti = layouts[q].type_index(f.trivial(), f.hom[q][f.trivial()][0]).unwrap();
                assert_eq!(ones.values[q], layouts[q].types[ti].ab.group);
            }
            if reps.len() > 2 {
                assert!(matches!(
                    filtration_subfunctor(f, &kf, &layouts, &[*reps.last().unwrap()]),
                    Err(Error::NotClosed(_))
                ));
            }
            // walk a linear extension of the closure order; each step is exact
            let mut n: Vec<SubId> = Vec::new();
            for &u in &reps {
                let sub = filtration_subfunctor(f, &kf, &layouts, &n).unwrap();
                let layer = layer_functor(f, &kf, &layouts, &n, u).unwrap();
                layer.check_functorial(f).unwrap();
                n.push(u);
                let big = filtration_subfunctor(f, &kf, &layouts, &n).unwrap();
                for q in 0..f.num_subs() {
                    assert_eq!(sub.values[q].order().mul(&layer.values[q].order()), big.values[q].order());
                }
                let nu = NU::new(f, u);
                for (&phi, h) in &layer.maps {
                    let (q, r) = (f.mors[phi].tgt, f.mors[phi].src);
                    assert_eq!(*h, nu.layer_formula(phi, &layouts[q], &layouts[r]), "{} U={u} φ={phi}", inst.name);
                }
            }
        }
    }

    #[test]
    fn non_minimal_layer_is_rejected() {
        let f = &examples::s4_d8().fusion;
        let layouts: Vec<KernelLayout> = (0..f.num_subs()).map(|q| KernelLayout::new(f, q)).collect();
        let kf = kernel_functor_from_fusion(f, &layouts);
        assert!(matches!(layer_functor(f, &kf, &layouts, &[], f.whole()), Err(Error::NotMinimal(_))));
    }

    /// The fixed part of `V` is the layer, naturally in `φ`, and the trace
    /// identifies cofixed with fixed elements.
    #[test]
    fn fixed_points_realize_the_layer() {
        for inst in [examples::c2(), examples::c2xc2(), examples::s4_d8(), examples::a4_v4()] {
            let f = &inst.fusion;
            let layouts: Vec<KernelLayout> = (0..f.num_subs()).map(|q| KernelLayout::new(f, q)).collect();
            for u in f.p_class_reps() {
                let nu = NU::new(f, u);
                check_trace_iso(&nu).unwrap();
                let isos: Vec<AbHom> = layouts.iter().map(|l| nu.layer_iso(l)).collect();
                for q in 0..f.num_subs() {
                    let fixed = nu.fixed(q);
                    assert_eq!(isos[q].image_order(), fixed.order());
                    assert!(isos[q].is_injective());
                }
                for phi in exterior_morphisms(f) {
                    let (q, r) = (f.mors[phi].tgt, f.mors[phi].src);
                    let lhs = nu.contravariant_map(phi).compose(&isos[q]);
                    let rhs = isos[r].compose(&nu.layer_formula(phi, &layouts[q], &layouts[r]));
                    assert_eq!(lhs, rhs, "{} U={u} φ={phi}", inst.name);
                }
            }
        }
    }

    #[test]
    fn complement_identities_c2() {
        let f = &examples::c2().fusion;
        let nu = NU::new(f, f.trivial());
        let rf = r_functors(&nu, 0).unwrap();
        rf.fixed.check_functorial(f).unwrap();
        rf.cofixed.check_functorial(f).unwrap();
        rf.complement.check_functorial(f).unwrap();
        let rep = check_complement_identities(f, &rf);
        assert!(rep.passed(), "{:?}", rep.witnesses);
        assert!(rep.annihilation > 0 && rep.mackey > 0);
    }

    #[test]
    fn complement_identities_all_instances() {
        for inst in examples::desk() {
            let f = &inst.fusion;
            for u in f.p_class_reps() {
                let nu = NU::new(f, u);
                for m in 0..2 {
                    let rf = r_functors(&nu, m).unwrap();
                    rf.fixed.check_functorial(f).unwrap();
                    rf.complement.check_functorial(f).unwrap();
                    let rep = check_complement_identities(f, &rf);
                    assert!(rep.passed(), "{} U={u} m={m}: {:?}", inst.name, rep.witnesses);
                }
            }
        }
    }

    #[test]
    fn large_m_gives_zero_functors() {
        let f = &examples::s4_d8().fusion;
        for u in f.p_class_reps() {
            let nu = NU::new(f, u);
            let rf = r_functors(&nu, 8).unwrap();
            assert!(rf.fixed.values.iter().all(|g| g.is_trivial()));
            assert!(check_complement_identities(f, &rf).passed());
        }
    }

    #[test]
    fn kernel_functor_does_not_depend_on_the_basic_set() {
        for inst in examples::desk() {
            let f = &inst.fusion;
            let b3 = construct_thick_basic(f, 3).unwrap().biset;
            let l2 = locality_of(f);
            let l3 = Locality::new(f, ConcreteBiset::realize(f, &b3)).unwrap();
            assert_ne!(l2.k(), l3.k());
            kernel_functor_iso(&l2, &l3).unwrap();
        }
    }

    #[test]
    fn natural_iso_check_detects_a_broken_square() {
        let inst = examples::s4_d8();
        let f = &inst.fusion;
        let k = kernel_functor(&locality_of(f));
        let theta: Vec<AbHom> = k.values.iter().map(AbHom::identity).collect();
        let mut bad = k.clone();
        let (&m, h) = k.maps.iter().find(|(_, h)| !h.is_zero()).unwrap();
        bad.maps.insert(m, AbHom::zero(&h.src, &h.tgt));
        assert!(check_natural_iso(f, &k, &k, &theta).is_ok());
        assert!(matches!(check_natural_iso(f, &k, &bad, &theta), Err(Error::NaturalityFailure(_))));
    }
}
