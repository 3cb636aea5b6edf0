//! Permutations of `{0, .., n-1}`.
//!
//! Products compose right to left: `(a * b)(x) = a(b(x))`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm {
    img: Vec<u32>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm { img: (0..n as u32).collect() }
    }

    pub fn from_images(img: Vec<u32>) -> Result<Self> {
        let n = img.len();
        let mut seen = vec![false; n];
        for &x in &img {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::Parse(format!("image list {img:?} is not a bijection")));
            }
            seen[x] = true;
        }
        Ok(Perm { img })
    }

    /// Builds a permutation of degree `n` from disjoint or overlapping cycles,
    /// applied right to left as written.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut acc = Perm::identity(n);
        for c in cycles {
            let mut seen = std::collections::HashSet::new();
            for &x in c {
                if x >= n {
                    return Err(Error::Parse(format!("point {x} out of range for degree {n}")));
                }
                if !seen.insert(x) {
                    return Err(Error::Parse(format!("cycle {c:?} repeats point {x}")));
                }
            }
            let mut img: Vec<u32> = (0..n as u32).collect();
            for (i, &x) in c.iter().enumerate() {
                img[x] = c[(i + 1) % c.len()] as u32;
            }
            acc = Perm { img }.compose(&acc);
        }
        Ok(acc)
    }

    pub fn degree(&self) -> usize {
        self.img.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.img
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.img[x] as usize
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm { img: other.img.iter().map(|&x| self.img[x as usize]).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut img = vec![0u32; self.img.len()];
        for (i, &x) in self.img.iter().enumerate() {
            img[x as usize] = i as u32;
        }
        Perm { img }
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] || self.apply(s) == s {
                seen[s] = true;
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut x = self.apply(s);
            while x != s {
                seen[x] = true;
                c.push(x);
                x = self.apply(x);
            }
            out.push(c);
        }
        out
    }

    /// Direct product action on `{0..n} ⊔ {n..n+m}`.
    pub fn direct_sum(&self, other: &Perm) -> Perm {
        let n = self.degree() as u32;
        let mut img = self.img.clone();
        img.extend(other.img.iter().map(|&x| x + n));
        Perm { img }
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs = self.cycles();
        if cs.is_empty() {
            return write!(f, "()");
        }
        for c in cs {
            write!(f, "(")?;
            for (i, x) in c.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_is_right_to_left() {
        let a = Perm::from_cycles(3, &[vec![0, 1]]).unwrap();
        let b = Perm::from_cycles(3, &[vec![1, 2]]).unwrap();
        // (a∘b)(1) = a(2) = 2, (a∘b)(2) = a(1) = 0
        let ab = a.compose(&b);
        assert_eq!(ab.apply(1), 2);
        assert_eq!(ab.apply(2), 0);
        assert_eq!(ab.apply(0), 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Perm::from_images(vec![0, 0]).is_err());
        assert!(Perm::from_cycles(3, &[vec![0, 3]]).is_err());
        assert!(Perm::from_cycles(3, &[vec![0, 1, 0]]).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let a = Perm::from_cycles(5, &[vec![0, 3, 1], vec![2, 4]]).unwrap();
        assert!(a.compose(&a.inverse()).is_identity());
        assert_eq!(format!("{a:?}"), "(0 3 1)(2 4)");
    }
}
