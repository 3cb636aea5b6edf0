//! Linear algebra over `ℤ/N` for systems with mixed prime-power moduli.
//!
//! Every system is first brought to a uniform modulus `N` (the lcm of all
//! row and column moduli) by scaling row `i` by `N / m_i`. Solving and kernel
//! computations run on the Howell form of the augmented transpose `[Aᵀ | I]`,
//! which gives canonical lexicographically least solutions. Diagonal Smith
//! forms with optional transforms back the finite abelian group structure.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 { 0 } else { a / gcd(a, b) * b }
}

/// Extended gcd on nonnegative inputs: returns `(g, s, t)` with `s a + t b = g`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, s, t) = ext_gcd(b, a % b);
        (g, t, s - (a / b) * t)
    }
}

pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime_power(n: u64) -> bool {
    factor(n).len() == 1
}

/// Exact group orders as prime factorizations; they easily exceed `u128`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Order(pub BTreeMap<u64, i64>);

impl Order {
    pub fn one() -> Self {
        Order(BTreeMap::new())
    }

    pub fn of(n: u64) -> Self {
        let mut o = Order::one();
        o.mul_by(n);
        o
    }

    pub fn mul_by(&mut self, n: u64) {
        for (p, e) in factor(n) {
            *self.0.entry(p).or_insert(0) += e as i64;
        }
        self.0.retain(|_, e| *e != 0);
    }

    pub fn div_by(&mut self, n: u64) {
        for (p, e) in factor(n) {
            *self.0.entry(p).or_insert(0) -= e as i64;
        }
        self.0.retain(|_, e| *e != 0);
    }

    pub fn mul(&self, o: &Order) -> Order {
        let mut r = self.clone();
        for (p, e) in &o.0 {
            *r.0.entry(*p).or_insert(0) += e;
        }
        r.0.retain(|_, e| *e != 0);
        r
    }

    pub fn div(&self, o: &Order) -> Order {
        let mut r = self.clone();
        for (p, e) in &o.0 {
            *r.0.entry(*p).or_insert(0) -= e;
        }
        r.0.retain(|_, e| *e != 0);
        r
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_u128(&self) -> Option<u128> {
        let mut acc: u128 = 1;
        for (&p, &e) in &self.0 {
            if e < 0 {
                return None;
            }
            for _ in 0..e {
                acc = acc.checked_mul(p as u128)?;
            }
        }
        Some(acc)
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|(p, e)| format!("{p}^{e}")).collect();
        write!(f, "{}", parts.join("·"))
    }
}

#[inline]
fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

#[inline]
fn red(x: i128, n: u64) -> u64 {
    x.rem_euclid(n as i128) as u64
}

/// A unit `u` of `ℤ/n` with `u·a ≡ gcd(a, n)`.
fn normalizing_unit(a: u64, n: u64) -> u64 {
    let d = gcd(a, n);
    let nd = n / d;
    if nd == 1 {
        return 1;
    }
    let (_, s, _) = ext_gcd((a / d) as i128, nd as i128);
    let u0 = red(s, nd);
    let mut u = u0;
    while gcd(u, n) != 1 {
        u += nd;
    }
    u % n
}

/// Rows in echelon form over `ℤ/n` with the Howell property: the rows whose
/// leading column is at least `j` span every vector of the row module whose
/// first `j` coordinates vanish. Leading entries divide `n`.
#[derive(Clone, Debug)]
pub struct Howell {
    pub modulus: u64,
    pub ncols: usize,
    /// `(leading column, row)` sorted by leading column.
    pub rows: Vec<(usize, Vec<u64>)>,
}

impl Howell {
    pub fn new(gens: Vec<Vec<u64>>, ncols: usize, n: u64) -> Howell {
        assert!(n >= 1);
        let mut work: Vec<Vec<u64>> = gens
            .into_iter()
            .map(|r| r.into_iter().map(|x| x % n).collect::<Vec<_>>())
            .filter(|r: &Vec<u64>| r.iter().any(|&x| x != 0))
            .collect();
        let mut rows = Vec::new();
        if n == 1 {
            return Howell { modulus: n, ncols, rows };
        }
        for col in 0..ncols {
            let mut pivot: Option<Vec<u64>> = None;
            let mut rest = Vec::with_capacity(work.len());
            for mut r in work.drain(..) {
                if r[col] == 0 {
                    rest.push(r);
                    continue;
                }
                match pivot.take() {
                    None => pivot = Some(r),
                    Some(mut pv) => {
                        let a = pv[col];
                        let b = r[col];
                        if b % a == 0 {
                            let q = b / a;
                            for j in col..ncols {
                                r[j] = (r[j] + n - mulmod(q, pv[j], n)) % n;
                            }
                        } else {
                            let (g, s, t) = ext_gcd(a as i128, b as i128);
                            let (ag, bg) = ((a as i128) / g, (b as i128) / g);
                            let (s, t) = (red(s, n), red(t, n));
                            let (ag, bg) = (red(ag, n), red(bg, n));
                            for j in col..ncols {
                                let (x, y) = (pv[j], r[j]);
                                pv[j] = (mulmod(s, x, n) + mulmod(t, y, n)) % n;
                                r[j] = (mulmod(bg, x, n) + n - mulmod(ag, y, n)) % n;
                            }
                        }
                        pivot = Some(pv);
                        if r.iter().any(|&x| x != 0) {
                            rest.push(r);
                        }
                    }
                }
            }
            work = rest;
            if let Some(mut pv) = pivot {
                let u = normalizing_unit(pv[col], n);
                if u != 1 {
                    for x in pv.iter_mut().skip(col) {
                        *x = mulmod(*x, u, n);
                    }
                }
                let g = pv[col];
                let ann = n / g;
                if ann != n {
                    let extra: Vec<u64> = pv.iter().map(|&x| mulmod(x, ann, n)).collect();
                    if extra.iter().any(|&x| x != 0) {
                        work.push(extra);
                    }
                }
                rows.push((col, pv));
            }
        }
        Howell { modulus: n, ncols, rows }
    }

    /// Greedy reduction to the lexicographically least vector in `x + span`.
    pub fn reduce(&self, x: &mut [u64]) {
        let n = self.modulus;
        for (c, row) in &self.rows {
            let g = row[*c];
            let q = x[*c] / g;
            if q != 0 {
                for j in *c..self.ncols {
                    x[j] = (x[j] + n - mulmod(q, row[j], n)) % n;
                }
            }
        }
    }

    /// Index of the row module in `(ℤ/n)^ncols`, as the product of pivots.
    pub fn index(&self) -> Order {
        let mut o = Order::one();
        let mut have = vec![false; self.ncols];
        for (c, row) in &self.rows {
            have[*c] = true;
            o.mul_by(row[*c]);
        }
        for h in have {
            if !h {
                o.mul_by(self.modulus);
            }
        }
        o
    }
}

fn uniform_modulus(row_moduli: &[u64], col_moduli: Option<&[u64]>) -> u64 {
    let mut n = row_moduli.iter().fold(1, |acc, &m| lcm(acc, m));
    if let Some(cm) = col_moduli {
        n = cm.iter().fold(n, |acc, &m| lcm(acc, m));
    }
    n.max(1)
}

/// Solves `A x ≡ b (mod m_i on row i)` and returns the lexicographically least
/// solution with entries in `[0, N)`, `N` the lcm of the moduli.
pub fn smith_solve(a: &[Vec<i64>], b: &[i64], moduli: &[u64]) -> Result<Vec<u64>> {
    let ncols = a.first().map_or(0, |r| r.len());
    LinearSystem::new(a, moduli, None, ncols).solve(b)
}

/// As [`smith_solve`], with each unknown `x_j` also taken modulo `col_moduli[j]`
/// (the map must be well defined on `⊕ ℤ/col_moduli[j]`).
pub fn smith_solve_ext(
    a: &[Vec<i64>],
    b: &[i64],
    row_moduli: &[u64],
    col_moduli: &[u64],
) -> Result<Vec<u64>> {
    LinearSystem::new(a, row_moduli, Some(col_moduli), col_moduli.len()).solve(b)
}

/// A prepared system: the Howell form of `[Aᵀ | I]` supports repeated solves
/// against different right-hand sides and yields the solution kernel.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub nrows: usize,
    pub ncols: usize,
    pub modulus: u64,
    scale: Vec<u64>,
    howell: Howell,
}

impl LinearSystem {
    pub fn new(a: &[Vec<i64>], row_moduli: &[u64], col_moduli: Option<&[u64]>, ncols: usize) -> Self {
        let nrows = a.len();
        assert_eq!(row_moduli.len(), nrows);
        let n = uniform_modulus(row_moduli, col_moduli);
        assert!(n < (1u64 << 40), "modulus {n} too large");
        let scale: Vec<u64> = row_moduli.iter().map(|&m| n / m.max(1)).collect();
        let width = nrows + ncols;
        let mut gens = Vec::with_capacity(ncols + 1);
        for j in 0..ncols {
            let mut r = vec![0u64; width];
            for i in 0..nrows {
                r[i] = mulmod(red(a[i][j] as i128, n), scale[i], n);
            }
            r[nrows + j] = 1;
            gens.push(r);
        }
        if let Some(cm) = col_moduli {
            for (j, &d) in cm.iter().enumerate() {
                if d % n == 0 {
                    continue;
                }
                let mut r = vec![0u64; width];
                for i in 0..nrows {
                    r[i] = mulmod(mulmod(red(a[i][j] as i128, n), scale[i], n), d, n);
                }
                r[nrows + j] = d;
                gens.push(r);
            }
        }
        let howell = Howell::new(gens, width, n);
        LinearSystem { nrows, ncols, modulus: n, scale, howell }
    }

    pub fn solve(&self, b: &[i64]) -> Result<Vec<u64>> {
        let n = self.modulus;
        let mut v = vec![0u64; self.nrows + self.ncols];
        for i in 0..self.nrows {
            v[i] = mulmod(red(-(b[i] as i128), n), self.scale[i], n);
        }
        self.howell.reduce(&mut v);
        if v[..self.nrows].iter().any(|&x| x != 0) {
            return Err(Error::NoSolution);
        }
        Ok(v[self.nrows..].to_vec())
    }

    pub fn solve_u(&self, b: &[u64]) -> Result<Vec<u64>> {
        let n = self.modulus;
        let mut v = vec![0u64; self.nrows + self.ncols];
        for i in 0..self.nrows {
            v[i] = mulmod((n - b[i] % n) % n, self.scale[i], n);
        }
        self.howell.reduce(&mut v);
        if v[..self.nrows].iter().any(|&x| x != 0) {
            return Err(Error::NoSolution);
        }
        Ok(v[self.nrows..].to_vec())
    }

    /// Echelon generators (Howell property) of the solution module of `A x ≡ 0`.
    pub fn kernel(&self) -> Vec<Vec<u64>> {
        self.howell
            .rows
            .iter()
            .filter(|(c, _)| *c >= self.nrows)
            .map(|(_, r)| r[self.nrows..].to_vec())
            .collect()
    }
}

/// Diagonalizes a matrix over `ℤ/n` by unimodular row and column operations.
/// Returns the diagonal entries normalized to `gcd(d_i, n)`, one per row
/// position up to `min(rows, cols)`, and optionally the column transform `V`
/// together with its inverse, so that `U A V = D`.
pub struct Diagonal {
    pub diag: Vec<u64>,
    pub v: Option<Vec<Vec<u64>>>,
    pub v_inv: Option<Vec<Vec<u64>>>,
}

pub fn diagonalize(mut a: Vec<Vec<u64>>, ncols: usize, n: u64, transforms: bool) -> Diagonal {
    let nrows = a.len();
    for r in a.iter_mut() {
        for x in r.iter_mut() {
            *x %= n;
        }
    }
    let ident = |k: usize| -> Vec<Vec<u64>> {
        (0..k).map(|i| (0..k).map(|j| u64::from(i == j) % n).collect()).collect()
    };
    let mut v = transforms.then(|| ident(ncols));
    let mut vi = transforms.then(|| ident(ncols));
    let mut diag = Vec::new();
    let rank_bound = nrows.min(ncols);
    for t in 0..rank_bound {
        // pick the nonzero entry of least gcd with n
        let mut best: Option<(u64, usize, usize)> = None;
        for i in t..nrows {
            for j in t..ncols {
                if a[i][j] != 0 {
                    let g = gcd(a[i][j], n);
                    if best.is_none_or(|(bg, _, _)| g < bg) {
                        best = Some((g, i, j));
                    }
                }
            }
        }
        let Some((_, bi, bj)) = best else { break };
        a.swap(t, bi);
        if bj != t {
            for r in a.iter_mut() {
                r.swap(t, bj);
            }
            if let (Some(v), Some(vi)) = (v.as_mut(), vi.as_mut()) {
                for r in v.iter_mut() {
                    r.swap(t, bj);
                }
                vi.swap(t, bj);
            }
        }
        loop {
            let mut dirty = false;
            for i in t + 1..nrows {
                if a[i][t] == 0 {
                    continue;
                }
                let (x, y) = (a[t][t], a[i][t]);
                if x != 0 && y % x == 0 {
                    let q = y / x;
                    for j in t..ncols {
                        a[i][j] = (a[i][j] + n - mulmod(q, a[t][j], n)) % n;
                    }
                } else {
                    let (g, s, tt) = ext_gcd(x as i128, y as i128);
                    let (xg, yg) = (red((x as i128) / g, n), red((y as i128) / g, n));
                    let (s, tt) = (red(s, n), red(tt, n));
                    for j in t..ncols {
                        let (p, q) = (a[t][j], a[i][j]);
                        a[t][j] = (mulmod(s, p, n) + mulmod(tt, q, n)) % n;
                        a[i][j] = (mulmod(yg, p, n) + n - mulmod(xg, q, n)) % n;
                    }
                }
            }
            for j in t + 1..ncols {
                if a[t][j] == 0 {
                    continue;
                }
                dirty = true;
                let (x, y) = (a[t][t], a[t][j]);
                // column ops: col_t, col_j ← col_t·s + col_j·tt, col_t·yg − col_j·xg
                let (s, tt, yg, xg) = if x != 0 && y % x == 0 {
                    (1u64, 0u64, y / x % n, 1u64)
                } else {
                    let (g, s, tt) = ext_gcd(x as i128, y as i128);
                    (red(s, n), red(tt, n), red((y as i128) / g, n), red((x as i128) / g, n))
                };
                let simple = x != 0 && y % x == 0;
                for r in a.iter_mut() {
                    let (p, q) = (r[t], r[j]);
                    if simple {
                        r[j] = (q + n - mulmod(yg, p, n)) % n;
                    } else {
                        r[t] = (mulmod(s, p, n) + mulmod(tt, q, n)) % n;
                        r[j] = (mulmod(yg, p, n) + n - mulmod(xg, q, n)) % n;
                    }
                }
                if let (Some(v), Some(vi)) = (v.as_mut(), vi.as_mut()) {
                    if simple {
                        // V ← V·E with E = I − yg·e_t e_jᵀ; V⁻¹ ← E⁻¹·V⁻¹, E⁻¹ = I + yg·e_t e_jᵀ
                        for r in v.iter_mut() {
                            r[j] = (r[j] + n - mulmod(yg, r[t], n)) % n;
                        }
                        for c in 0..ncols {
                            vi[t][c] = (vi[t][c] + mulmod(yg, vi[j][c], n)) % n;
                        }
                    } else {
                        // E = [[s, yg], [tt, −xg]] acting on (col_t, col_j);
                        // det E = −(s·xg + tt·yg) = −1, so E⁻¹ = [[xg, yg], [tt, −s]].
                        for r in v.iter_mut() {
                            let (p, q) = (r[t], r[j]);
                            r[t] = (mulmod(s, p, n) + mulmod(tt, q, n)) % n;
                            r[j] = (mulmod(yg, p, n) + n - mulmod(xg, q, n)) % n;
                        }
                        for c in 0..ncols {
                            let (p, q) = (vi[t][c], vi[j][c]);
                            vi[t][c] = (mulmod(xg, p, n) + mulmod(yg, q, n)) % n;
                            vi[j][c] = (mulmod(tt, p, n) + n - mulmod(s, q, n)) % n;
                        }
                    }
                }
            }
            if !dirty && (t + 1..nrows).all(|i| a[i][t] == 0) {
                break;
            }
        }
        diag.push(gcd(a[t][t], n));
    }
    Diagonal { diag, v, v_inv: vi }
}

/// Order of the subgroup of `⊕ ℤ/m_j` generated by the given vectors.
pub fn subgroup_order(gens: &[Vec<u64>], moduli: &[u64]) -> Order {
    let n = uniform_modulus(moduli, None);
    let k = moduli.len();
    let mut rows: Vec<Vec<u64>> = gens.to_vec();
    for (j, &m) in moduli.iter().enumerate() {
        let mut r = vec![0u64; k];
        r[j] = m % n;
        rows.push(r);
    }
    let h = Howell::new(rows, k, n);
    let mut total = Order::one();
    for &m in moduli {
        total.mul_by(m);
    }
    total.div(&h.index())
}

/// Order of the kernel of `x ↦ A x` from `⊕ ℤ/col_moduli` to `⊕ ℤ/row_moduli`.
pub fn kernel_order(a: &[Vec<i64>], row_moduli: &[u64], col_moduli: &[u64]) -> Order {
    let sys = LinearSystem::new(a, row_moduli, Some(col_moduli), col_moduli.len());
    let gens = sys.kernel();
    subgroup_order(&gens, col_moduli)
}

/// Invariant factors (each `> 1`) of `ℤ^r` modulo the given relation rows
/// together with `n·ℤ^r`.
pub fn quotient_invariants(relations: Vec<Vec<u64>>, r: usize, n: u64) -> Vec<u64> {
    let d = diagonalize(relations, r, n, false);
    let mut out: Vec<u64> = d.diag.iter().copied().filter(|&x| x != 1).collect();
    for _ in d.diag.len()..r {
        out.push(n);
    }
    out.retain(|&x| x != 1);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(a: &[Vec<i64>], b: &[i64], moduli: &[u64], ranges: &[u64]) -> Option<Vec<u64>> {
        let total: u64 = ranges.iter().product();
        let mut best: Option<Vec<u64>> = None;
        for code in 0..total {
            let mut x = Vec::new();
            let mut c = code;
            for &r in ranges {
                x.push(c % r);
                c /= r;
            }
            let ok = a.iter().zip(b).zip(moduli).all(|((row, &bi), &m)| {
                let s: i128 = row.iter().zip(&x).map(|(&p, &q)| p as i128 * q as i128).sum();
                (s - bi as i128).rem_euclid(m as i128) == 0
            });
            if ok && best.as_ref().is_none_or(|bst| x < *bst) {
                best = Some(x);
            }
        }
        best
    }

    #[test]
    fn documented_examples() {
        assert_eq!(smith_solve(&[vec![2]], &[0], &[4]).unwrap(), vec![0]);
        assert_eq!(smith_solve(&[vec![2]], &[1], &[4]), Err(Error::NoSolution));
        assert_eq!(
            smith_solve(&[vec![1, 1], vec![0, 2]], &[1, 2], &[4, 4]).unwrap(),
            vec![0, 1]
        );
    }

    #[test]
    fn mixed_moduli_against_search() {
        // rows mod 4 and mod 2, unknowns in [0,4)
        let a = vec![vec![1, 3, 2], vec![1, 1, 1]];
        for b0 in 0..4 {
            for b1 in 0..2 {
                let got = smith_solve(&a, &[b0, b1], &[4, 2]).ok();
                assert_eq!(got, brute(&a, &[b0, b1], &[4, 2], &[4, 4, 4]), "b = {b0},{b1}");
            }
        }
    }

    #[test]
    fn column_moduli() {
        // x0 ∈ ℤ/2, x1 ∈ ℤ/4, 2x0 + x1 ≡ 3 mod 4
        let x = smith_solve_ext(&[vec![2, 1]], &[3], &[4], &[2, 4]).unwrap();
        assert_eq!(x, vec![0, 3]);
    }

    #[test]
    fn orders() {
        // ⟨(1,2)⟩ in ℤ/2 ⊕ ℤ/4 has order 4
        assert_eq!(subgroup_order(&[vec![1, 2]], &[2, 4]), Order::of(2));
        assert_eq!(subgroup_order(&[vec![1, 1]], &[2, 4]), Order::of(4));
        // kernel of (x,y) ↦ x + y mod 2 on ℤ/2 ⊕ ℤ/4 has order 4
        assert_eq!(kernel_order(&[vec![1, 1]], &[2], &[2, 4]), Order::of(4));
    }

    #[test]
    fn diagonal_with_transforms() {
        let a = vec![vec![2, 4, 4], vec![6, 6, 12]];
        let n = 24;
        let d = diagonalize(a.clone(), 3, n, true);
        let v = d.v.unwrap();
        let vi = d.v_inv.unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: u64 = (0..3).map(|k| v[i][k] * vi[k][j]).sum::<u64>() % n;
                assert_eq!(s, u64::from(i == j));
            }
        }
        let mut inv = d.diag.clone();
        inv.sort();
        assert_eq!(inv, vec![2, 6]);
        assert_eq!(quotient_invariants(vec![vec![2, 0], vec![0, 3]], 2, 6), vec![2, 3]);
    }
}
