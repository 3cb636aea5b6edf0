//! Finite abelian groups, their homomorphisms, abelianization and transfer.

use serde::{Deserialize, Serialize};

use crate::group::{FiniteGroup, Subgroup};
use crate::smith::{self, diagonalize, factor, Howell, LinearSystem, Order};

/// `⊕ ℤ/orders[i]`. Canonical form (as produced by [`FinAb::canonical`]):
/// prime-power orders sorted by prime ascending, then power descending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinAb {
    pub orders: Vec<u64>,
}

impl FinAb {
    pub fn new(orders: Vec<u64>) -> Self {
        debug_assert!(orders.iter().all(|&d| d > 1));
        FinAb { orders }
    }

    pub fn zero_group() -> Self {
        FinAb { orders: vec![] }
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn order(&self) -> Order {
        let mut o = Order::one();
        for &d in &self.orders {
            o.mul_by(d);
        }
        o
    }

    /// Cardinality when it fits; desk-scale callers use it for enumeration.
    pub fn size(&self) -> Option<u64> {
        self.orders.iter().try_fold(1u64, |acc, &d| acc.checked_mul(d))
    }

    pub fn exponent(&self) -> u64 {
        self.orders.iter().fold(1, |a, &d| smith::lcm(a, d))
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.rank()]
    }

    pub fn reduce(&self, x: &mut [u64]) {
        for (v, &d) in x.iter_mut().zip(&self.orders) {
            *v %= d;
        }
    }

    pub fn reduce_i(&self, x: &[i64]) -> Vec<u64> {
        x.iter().zip(&self.orders).map(|(&v, &d)| v.rem_euclid(d as i64) as u64).collect()
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).zip(&self.orders).map(|((x, y), d)| (x + y) % d).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).zip(&self.orders).map(|((x, y), d)| (x + d - y) % d).collect()
    }

    pub fn neg(&self, a: &[u64]) -> Vec<u64> {
        a.iter().zip(&self.orders).map(|(x, d)| (d - x) % d).collect()
    }

    pub fn scale(&self, k: u64, a: &[u64]) -> Vec<u64> {
        a.iter().zip(&self.orders).map(|(x, d)| (x * (k % d)) % d).collect()
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    pub fn basis(&self, i: usize) -> Vec<u64> {
        let mut v = self.zero();
        v[i] = 1 % self.orders[i];
        v
    }

    /// Enumerates all elements in mixed-radix order.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let n = self.size().expect("group too large to enumerate") as usize;
        let mut out = Vec::with_capacity(n);
        let mut cur = self.zero();
        for _ in 0..n {
            out.push(cur.clone());
            for (c, &d) in cur.iter_mut().zip(&self.orders) {
                *c += 1;
                if *c < d {
                    break;
                }
                *c = 0;
            }
        }
        out
    }

    pub fn direct_sum(parts: &[FinAb]) -> FinAb {
        FinAb { orders: parts.iter().flat_map(|g| g.orders.iter().copied()).collect() }
    }

    /// The isomorphism type as a sorted list of prime-power orders.
    pub fn canonical(&self) -> FinAb {
        let mut pp: Vec<(u64, u64)> = Vec::new();
        for &d in &self.orders {
            for (p, e) in factor(d) {
                pp.push((p, p.pow(e)));
            }
        }
        pp.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        FinAb { orders: pp.into_iter().map(|(_, q)| q).collect() }
    }

    pub fn is_isomorphic(&self, other: &FinAb) -> bool {
        self.canonical() == other.canonical()
    }

    /// Generators of the subgroup `k·A`.
    pub fn multiple_gens(&self, k: u64) -> Vec<Vec<u64>> {
        (0..self.rank()).map(|i| self.scale(k, &self.basis(i))).collect()
    }

    /// Whether every element has `p`-power order.
    pub fn is_p_group(&self, p: u64) -> bool {
        self.orders.iter().all(|&d| factor(d).iter().all(|&(q, _)| q == p))
    }
}

/// A homomorphism `src → tgt`; column `j` is the image of the `j`-th generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbHom {
    pub src: FinAb,
    pub tgt: FinAb,
    /// `tgt.rank()` rows by `src.rank()` columns.
    pub mat: Vec<Vec<u64>>,
}

impl AbHom {
    pub fn zero(src: &FinAb, tgt: &FinAb) -> Self {
        AbHom { src: src.clone(), tgt: tgt.clone(), mat: vec![vec![0; src.rank()]; tgt.rank()] }
    }

    pub fn identity(a: &FinAb) -> Self {
        let mut h = AbHom::zero(a, a);
        for i in 0..a.rank() {
            h.mat[i][i] = 1 % a.orders[i];
        }
        h
    }

    pub fn from_columns(src: &FinAb, tgt: &FinAb, cols: &[Vec<u64>]) -> Self {
        let mut h = AbHom::zero(src, tgt);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..tgt.rank() {
                h.mat[i][j] = c[i] % tgt.orders[i];
            }
        }
        h
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.tgt.rank()).map(|i| self.mat[i][j]).collect()
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.tgt.rank()];
        for (i, row) in self.mat.iter().enumerate() {
            let d = self.tgt.orders[i] as u128;
            let mut s: u128 = 0;
            for (a, b) in row.iter().zip(x) {
                s += *a as u128 * *b as u128;
            }
            out[i] = (s % d) as u64;
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AbHom) -> AbHom {
        debug_assert_eq!(self.src, other.tgt);
        let cols: Vec<Vec<u64>> =
            (0..other.src.rank()).map(|j| self.apply(&other.column(j))).collect();
        AbHom::from_columns(&other.src, &self.tgt, &cols)
    }

    pub fn add(&self, other: &AbHom) -> AbHom {
        let cols: Vec<Vec<u64>> = (0..self.src.rank())
            .map(|j| self.tgt.add(&self.column(j), &other.column(j)))
            .collect();
        AbHom::from_columns(&self.src, &self.tgt, &cols)
    }

    pub fn is_zero(&self) -> bool {
        self.mat.iter().all(|r| r.iter().all(|&x| x == 0))
    }

    /// `order_j · column_j ≡ 0` for every source generator.
    pub fn is_well_defined(&self) -> bool {
        (0..self.src.rank()).all(|j| {
            let c = self.column(j);
            self.tgt.is_zero(&self.tgt.scale(self.src.orders[j], &c))
        })
    }

    /// Integer matrix and row moduli for use with the linear solvers.
    pub fn as_system(&self) -> (Vec<Vec<i64>>, Vec<u64>) {
        let a = self.mat.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
        (a, self.tgt.orders.clone())
    }

    pub fn kernel_order(&self) -> Order {
        let (a, rm) = self.as_system();
        if self.src.rank() == 0 {
            return Order::one();
        }
        if self.tgt.rank() == 0 {
            return self.src.order();
        }
        smith::kernel_order(&a, &rm, &self.src.orders)
    }

    pub fn image_order(&self) -> Order {
        self.src.order().div(&self.kernel_order())
    }

    pub fn is_injective(&self) -> bool {
        self.kernel_order().is_one()
    }

    pub fn is_bijective(&self) -> bool {
        self.is_injective() && self.src.order() == self.tgt.order()
    }

    /// Generators of the kernel, with the Howell property.
    pub fn kernel_gens(&self) -> Vec<Vec<u64>> {
        if self.src.rank() == 0 {
            return vec![];
        }
        let (a, rm) = self.as_system();
        let sys = LinearSystem::new(&a, &rm, Some(&self.src.orders), self.src.rank());
        sys.kernel().into_iter().map(|mut v| {
            self.src.reduce(&mut v);
            v
        }).collect()
    }
}

/// A subgroup of `A` given by generators. Membership uses the Howell form of
/// its image under the embedding `A ↪ (ℤ/N)^r`, `x_i ↦ x_i·N/d_i`, with `N`
/// the exponent of `A`.
#[derive(Clone, Debug)]
pub struct AbSubgroup {
    pub ambient: FinAb,
    pub gens: Vec<Vec<u64>>,
    howell: Howell,
}

impl AbSubgroup {
    pub fn new(ambient: &FinAb, gens: Vec<Vec<u64>>) -> Self {
        let n = ambient.exponent();
        let scaled: Vec<Vec<u64>> = gens.iter().map(|g| Self::scale_up(ambient, g)).collect();
        let howell = Howell::new(scaled, ambient.rank(), n);
        AbSubgroup { ambient: ambient.clone(), gens, howell }
    }

    pub fn whole(ambient: &FinAb) -> Self {
        Self::new(ambient, (0..ambient.rank()).map(|i| ambient.basis(i)).collect())
    }

    fn scale_up(a: &FinAb, x: &[u64]) -> Vec<u64> {
        let n = a.exponent();
        x.iter().zip(&a.orders).map(|(&v, &d)| (v % d) * (n / d)).collect()
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        let mut v = Self::scale_up(&self.ambient, x);
        self.howell.reduce(&mut v);
        v.iter().all(|&c| c == 0)
    }

    pub fn order(&self) -> Order {
        smith::subgroup_order(&self.gens, &self.ambient.orders)
    }

    /// `k·S`.
    pub fn multiple(&self, k: u64) -> Self {
        Self::new(&self.ambient, self.gens.iter().map(|g| self.ambient.scale(k, g)).collect())
    }

    pub fn sum(&self, other: &AbSubgroup) -> Self {
        Self::new(&self.ambient, self.gens.iter().chain(&other.gens).cloned().collect())
    }

    pub fn is_subgroup_of(&self, other: &AbSubgroup) -> bool {
        self.gens.iter().all(|g| other.contains(g))
    }
}

/// The `𝔽_p`-space `top/bottom` for subgroups `p·top ⊆ bottom ⊆ top`, with a
/// basis of representatives in `top`.
#[derive(Clone, Debug)]
pub struct FpLayer {
    pub p: u64,
    pub ambient: FinAb,
    pub basis: Vec<Vec<u64>>,
    /// `(ℤ/p)^dim`.
    pub space: FinAb,
    top: AbSubgroup,
    solver: Option<LinearSystem>,
}

impl FpLayer {
    pub fn new(top: &AbSubgroup, bottom: &AbSubgroup, p: u64) -> Self {
        debug_assert!(bottom.is_subgroup_of(top));
        debug_assert!(top.multiple(p).is_subgroup_of(bottom));
        let ambient = top.ambient.clone();
        let mut basis: Vec<Vec<u64>> = Vec::new();
        let mut cur = bottom.clone();
        for g in &top.gens {
            if !cur.contains(g) {
                basis.push(g.clone());
                cur = AbSubgroup::new(&ambient, cur.gens.iter().chain([g]).cloned().collect());
            }
        }
        let cols: Vec<&Vec<u64>> = basis.iter().chain(&bottom.gens).collect();
        let solver = (ambient.rank() > 0 && !cols.is_empty()).then(|| {
            let a: Vec<Vec<i64>> =
                (0..ambient.rank()).map(|i| cols.iter().map(|c| c[i] as i64).collect()).collect();
            LinearSystem::new(&a, &ambient.orders, None, cols.len())
        });
        let space = FinAb::new(vec![p; basis.len()]);
        FpLayer { p, ambient, basis, space, top: top.clone(), solver }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of the class of `x ∈ top`; `None` when `x ∉ top`.
    pub fn coords(&self, x: &[u64]) -> Option<Vec<u64>> {
        if !self.top.contains(x) {
            return None;
        }
        let Some(s) = &self.solver else {
            return Some(vec![]);
        };
        let sol = s.solve_u(x).expect("element of top has coordinates");
        Some(sol[..self.dim()].iter().map(|&c| c % self.p).collect())
    }

    /// A representative in `top` of the class with the given coordinates.
    pub fn lift(&self, c: &[u64]) -> Vec<u64> {
        let mut acc = self.ambient.zero();
        for (b, &k) in self.basis.iter().zip(c) {
            acc = self.ambient.add(&acc, &self.ambient.scale(k, b));
        }
        acc
    }

    /// The map `self → tgt` induced by `h` on the ambient groups; `None` when
    /// `h` does not carry `top` into `tgt.top`.
    pub fn induced(&self, tgt: &FpLayer, h: &AbHom) -> Option<AbHom> {
        let cols: Option<Vec<Vec<u64>>> = self.basis.iter().map(|b| tgt.coords(&h.apply(b))).collect();
        Some(AbHom::from_columns(&self.space, &tgt.space, &cols?))
    }
}

/// Inverse of a bijective homomorphism between groups of the same type.
pub fn inverse(h: &AbHom) -> Option<AbHom> {
    if !h.is_bijective() {
        return None;
    }
    if h.tgt.rank() == 0 {
        return Some(AbHom::zero(&h.tgt, &h.src));
    }
    let (a, rm) = h.as_system();
    let sys = LinearSystem::new(&a, &rm, Some(&h.src.orders), h.src.rank());
    let cols: Option<Vec<Vec<u64>>> = (0..h.tgt.rank()).map(|i| sys.solve_u(&h.tgt.basis(i)).ok()).collect();
    Some(AbHom::from_columns(&h.tgt, &h.src, &cols?))
}

/// `span(num)/span(den)` for subgroups `den ⊆ num` of `A`, as invariant factors.
pub fn quotient_group(a: &FinAb, num: &[Vec<u64>], den: &[Vec<u64>]) -> FinAb {
    let k = num.len();
    if k == 0 || a.rank() == 0 {
        return FinAb::zero_group();
    }
    let n = a.exponent();
    // relations: c with Σ c_i z_i ∈ span(den)
    let cols: Vec<&Vec<u64>> = num.iter().chain(den).collect();
    let m: Vec<Vec<i64>> = (0..a.rank()).map(|i| cols.iter().map(|c| c[i] as i64).collect()).collect();
    let sys = LinearSystem::new(&m, &a.orders, None, cols.len());
    let rels: Vec<Vec<u64>> = sys.kernel().into_iter().map(|v| v[..k].to_vec()).collect();
    FinAb::new(smith::quotient_invariants(rels, k, n)).canonical()
}

/// `ab(H) = H/[H,H]` with the projection tabulated on the elements of `H`.
#[derive(Clone, Debug)]
pub struct Abelianization {
    pub group: FinAb,
    /// Indexed by element of the ambient group; `None` outside `H`.
    pub proj: Vec<Option<Vec<u64>>>,
    /// For each basis vector of `group`, the least element of `H` projecting to it.
    pub basis_preimage: Vec<usize>,
}

impl Abelianization {
    pub fn project(&self, x: usize) -> &[u64] {
        self.proj[x].as_deref().expect("element outside the abelianized subgroup")
    }
}

/// Abelianization of the subgroup `h` of `g`.
pub fn abelianization(g: &FiniteGroup, h: &Subgroup) -> Abelianization {
    let gens = g.generators_of(h);
    let r = gens.len();
    let n = h.count_ones(..) as u64;
    let mut vec_of: Vec<Option<Vec<u64>>> = vec![None; g.order()];
    vec_of[0] = Some(vec![0; r]);
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut order = Vec::new();
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for (i, &gi) in gens.iter().enumerate() {
            let y = g.mul(x, gi);
            if vec_of[y].is_none() {
                let mut v = vec_of[x].clone().unwrap();
                v[i] = (v[i] + 1) % n;
                vec_of[y] = Some(v);
                queue.push_back(y);
            }
        }
    }
    // relations v_x + e_i − v_{x g_i}
    let mut rels = Vec::new();
    for &x in &order {
        for (i, &gi) in gens.iter().enumerate() {
            let y = g.mul(x, gi);
            let vx = vec_of[x].as_ref().unwrap();
            let vy = vec_of[y].as_ref().unwrap();
            let row: Vec<u64> = (0..r)
                .map(|k| (vx[k] + u64::from(k == i) + n - vy[k]) % n)
                .collect();
            if row.iter().any(|&c| c != 0) {
                rels.push(row);
            }
        }
    }
    let hw = Howell::new(rels, r, n.max(1));
    let rows: Vec<Vec<u64>> = hw.rows.into_iter().map(|(_, row)| row).collect();
    let (diag, v) = if n <= 1 || r == 0 {
        (vec![], vec![])
    } else {
        let d = diagonalize(rows, r, n, true);
        let mut diag = d.diag;
        let missing = r - diag.len();
        diag.extend(std::iter::repeat_n(n, missing));
        (diag, d.v.unwrap())
    };
    // cyclic factor t of order diag[t] splits into prime powers by CRT
    let mut comps: Vec<(u64, u64, usize)> = Vec::new(); // (prime, prime power, t)
    for (t, &d) in diag.iter().enumerate() {
        for (p, e) in factor(d) {
            comps.push((p, p.pow(e), t));
        }
    }
    comps.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    let group = FinAb::new(comps.iter().map(|c| c.1).collect());
    let mut proj: Vec<Option<Vec<u64>>> = vec![None; g.order()];
    for x in h.ones() {
        let vx = vec_of[x].as_ref().unwrap();
        let y: Vec<u64> = (0..diag.len())
            .map(|t| {
                let s: u128 = (0..r).map(|i| vx[i] as u128 * v[i][t] as u128).sum();
                (s % n as u128) as u64
            })
            .collect();
        proj[x] = Some(comps.iter().map(|&(_, q, t)| y[t] % q).collect());
    }
    let mut basis_preimage = vec![usize::MAX; group.rank()];
    for x in h.ones() {
        let px = proj[x].as_ref().unwrap();
        for (j, slot) in basis_preimage.iter_mut().enumerate() {
            if *slot == usize::MAX && px[j] == 1 && px.iter().enumerate().all(|(k, &c)| k == j || c == 0) {
                *slot = x;
            }
        }
    }
    debug_assert!(basis_preimage.iter().all(|&x| x != usize::MAX));
    Abelianization { group, proj, basis_preimage }
}

/// The homomorphism `ab(H) → ab(K)` induced by a group homomorphism `f: H → K`.
pub fn induced_hom(src: &Abelianization, tgt: &Abelianization, f: impl Fn(usize) -> usize) -> AbHom {
    let cols: Vec<Vec<u64>> =
        src.basis_preimage.iter().map(|&x| tgt.project(f(x)).to_vec()).collect();
    AbHom::from_columns(&src.group, &tgt.group, &cols)
}

/// Transfer `ab(H) → ab(K)` for `K ≤ H`, from left coset representatives:
/// `h g_i = g_{π(i)} k_i` and `V(h) = Σ_i ab(k_i)`.
pub fn transfer(g: &FiniteGroup, h: &Subgroup, k: &Subgroup, ab_h: &Abelianization, ab_k: &Abelianization) -> AbHom {
    let reps = g.left_transversal(h, k);
    transfer_with_reps(g, k, &reps, ab_h, ab_k)
}

pub fn transfer_with_reps(
    g: &FiniteGroup,
    k: &Subgroup,
    reps: &[usize],
    ab_h: &Abelianization,
    ab_k: &Abelianization,
) -> AbHom {
    let mut coset_of = std::collections::HashMap::new();
    for (i, &r) in reps.iter().enumerate() {
        for x in k.ones() {
            coset_of.insert(g.mul(r, x), i);
        }
    }
    let cols: Vec<Vec<u64>> = ab_h
        .basis_preimage
        .iter()
        .map(|&hx| {
            let mut acc = ab_k.group.zero();
            for &gi in reps {
                let y = g.mul(hx, gi);
                let j = coset_of[&y];
                let kk = g.mul(g.inv(reps[j]), y);
                acc = ab_k.group.add(&acc, ab_k.project(kk));
            }
            acc
        })
        .collect();
    AbHom::from_columns(&ab_h.group, &ab_k.group, &cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Perm;

    fn grp(n: usize, gens: &[&[&[usize]]]) -> FiniteGroup {
        let gs: Vec<Perm> = gens
            .iter()
            .map(|cs| Perm::from_cycles(n, &cs.iter().map(|c| c.to_vec()).collect::<Vec<_>>()).unwrap())
            .collect();
        FiniteGroup::generate(n, &gs).unwrap()
    }

    fn q8() -> FiniteGroup {
        // regular representation of Q8 on 8 points
        grp(8, &[&[&[0, 1, 4, 5], &[2, 3, 6, 7]], &[&[0, 2, 4, 6], &[1, 7, 5, 3]]])
    }

    #[test]
    fn examples() {
        let c4 = grp(4, &[&[&[0, 1, 2, 3]]]);
        assert_eq!(abelianization(&c4, &c4.whole()).group, FinAb::new(vec![4]));
        let s3 = grp(3, &[&[&[0, 1]], &[&[0, 1, 2]]]);
        assert_eq!(abelianization(&s3, &s3.whole()).group, FinAb::new(vec![2]));
        let q = q8();
        assert_eq!(q.order(), 8);
        assert_eq!(abelianization(&q, &q.whole()).group, FinAb::new(vec![2, 2]));
    }

    /// The projection kills exactly the derived subgroup and is a homomorphism.
    #[test]
    fn projection_kernel_is_derived_subgroup() {
        let s4 = grp(4, &[&[&[0, 1]], &[&[0, 1, 2, 3]]]);
        for h in s4.subgroups() {
            let ab = abelianization(&s4, &h);
            let der = s4.derived(&h);
            for x in h.ones() {
                assert_eq!(ab.group.is_zero(ab.project(x)), der.contains(x));
                for y in h.ones() {
                    let lhs = ab.project(s4.mul(x, y)).to_vec();
                    assert_eq!(lhs, ab.group.add(ab.project(x), ab.project(y)));
                }
            }
            let idx = h.count_ones(..) / der.count_ones(..);
            assert_eq!(ab.group.size().unwrap() as usize, idx);
        }
    }

    #[test]
    fn transfer_examples() {
        let c4 = grp(4, &[&[&[0, 1, 2, 3]]]);
        let sub = c4.closure(&[c4.index_of(&Perm::from_cycles(4, &[vec![0, 2], vec![1, 3]]).unwrap()).unwrap()]);
        let abh = abelianization(&c4, &c4.whole());
        let abk = abelianization(&c4, &sub);
        let t = transfer(&c4, &c4.whole(), &sub, &abh, &abk);
        assert!(!t.is_zero());
        // generator x ↦ x²
        let x = abh.basis_preimage[0];
        assert_eq!(t.apply(abh.project(x)), abk.project(c4.mul(x, x)).to_vec());
        let id = transfer(&c4, &c4.whole(), &c4.whole(), &abh, &abh);
        assert_eq!(id, AbHom::identity(&abh.group));
        let s3 = grp(3, &[&[&[0, 1]], &[&[0, 1, 2]]]);
        let c3 = s3.closure(&[s3.index_of(&Perm::from_cycles(3, &[vec![0, 1, 2]]).unwrap()).unwrap()]);
        let t = transfer(&s3, &s3.whole(), &c3, &abelianization(&s3, &s3.whole()), &abelianization(&s3, &c3));
        assert!(t.is_zero());
    }

    #[test]
    fn hom_kernel_and_image() {
        let a = FinAb::new(vec![2, 4]);
        let b = FinAb::new(vec![2]);
        let f = AbHom::from_columns(&a, &b, &[vec![1], vec![1]]);
        assert!(f.is_well_defined());
        assert_eq!(f.kernel_order(), Order::of(4));
        assert_eq!(f.image_order(), Order::of(2));
        for v in f.kernel_gens() {
            assert!(b.is_zero(&f.apply(&v)));
        }
        let bad = AbHom::from_columns(&b, &a, &[vec![0, 1]]);
        assert!(!bad.is_well_defined());
    }
}
