use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::localfield::{FieldElement, LocalSet, Tri};

use super::group::GroupElt;
use super::matrix::Mat;

/// A compact open subgroup of `GL_m(F)` cut out by valuation bounds.
///
/// Membership: `v(g_ij) >= bound(i,j)` off the diagonal; on the diagonal the
/// entry is integral (`depth 0`) or congruent to 1 modulo `w^depth`; and
/// `det g` is a unit. All the named groups and their conjugates by diagonal
/// powers of `w` have this shape, and the shape is stable under intersection.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    m: usize,
    bound: Vec<i64>,
    depth: Vec<u32>,
}

impl Pattern {
    fn from_fn(m: usize, f: impl Fn(usize, usize) -> i64, depth: u32) -> Self {
        let mut bound = vec![0; m * m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    bound[i * m + j] = f(i, j);
                }
            }
        }
        Pattern { m, bound, depth: vec![depth; m] }
    }

    /// Pattern from explicit off-diagonal bounds (row-major, diagonal slots
    /// ignored) and diagonal depths. Rejects data not closed under products.
    pub fn from_parts(m: usize, bounds: &[i64], depth: &[u32]) -> Result<Self> {
        if bounds.len() != m * m || depth.len() != m {
            return Err(Error::InvalidInput("pattern data has wrong length".into()));
        }
        let mut bound = bounds.to_vec();
        for i in 0..m {
            bound[i * m + i] = 0;
        }
        let b = |i: usize, j: usize| bound[i * m + j];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if i != j && k != i && k != j && b(i, j) > b(i, k) + b(k, j) {
                        return Err(Error::InvalidInput(format!("pattern not closed at ({i},{j}) via {k}")));
                    }
                }
                if i != j && b(i, j) + b(j, i) < depth[i] as i64 {
                    return Err(Error::InvalidInput(format!("pattern not closed on diagonal {i}")));
                }
            }
        }
        Ok(Pattern { m, bound, depth: depth.to_vec() })
    }

    /// `GL_m(O)`.
    pub fn hyperspecial(m: usize) -> Self {
        Pattern::from_fn(m, |_, _| 0, 0)
    }

    /// Kernel of reduction modulo `w^level` (`level >= 1`).
    pub fn congruence(m: usize, level: u32) -> Self {
        assert!(level >= 1);
        Pattern::from_fn(m, |_, _| level as i64, level)
    }

    /// Matrices in `GL_m(O)` that are upper triangular modulo `w`.
    pub fn iwahori(m: usize) -> Self {
        Pattern::from_fn(m, |i, j| (i > j) as i64, 0)
    }

    /// `v(k_ij) > i - j` below the diagonal.
    pub fn iwahori_phi(m: usize) -> Self {
        Pattern::from_fn(m, |i, j| if i > j { (i - j) as i64 + 1 } else { 0 }, 0)
    }

    /// The pro-`ell` part of [`Pattern::iwahori_phi`]: diagonal entries `= 1 mod w`.
    pub fn iwahori_phi_1(m: usize) -> Self {
        Pattern::from_fn(m, |i, j| if i > j { (i - j) as i64 + 1 } else { 0 }, 1)
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// Lower bound on `v(g_ij)`, `i != j`.
    pub fn bound(&self, i: usize, j: usize) -> i64 {
        self.bound[i * self.m + j]
    }

    /// Congruence depth of the diagonal entry `i`.
    pub fn depth(&self, i: usize) -> u32 {
        self.depth[i]
    }

    /// Whether `v(g_ij) + v(g_ji) >= 1` is forced for all `i != j`; then the
    /// determinant is automatically a unit.
    pub fn is_iwahori_type(&self) -> bool {
        (0..self.m).all(|i| (0..self.m).all(|j| i == j || self.bound(i, j) + self.bound(j, i) >= 1))
    }

    /// `h P h^{-1}` for `h = diag(w^c)`.
    pub fn conjugate_by_diag(&self, c: &[i64]) -> Pattern {
        let mut p = self.clone();
        for i in 0..self.m {
            for j in 0..self.m {
                if i != j {
                    p.bound[i * self.m + j] += c[i] - c[j];
                }
            }
        }
        p
    }

    pub fn intersect(&self, o: &Pattern) -> Pattern {
        Pattern {
            m: self.m,
            bound: self.bound.iter().zip(&o.bound).map(|(a, b)| *a.max(b)).collect(),
            depth: self.depth.iter().zip(&o.depth).map(|(a, b)| *a.max(b)).collect(),
        }
    }

    /// Pattern inclusion `o <= self`.
    pub fn contains(&self, o: &Pattern) -> bool {
        self.bound.iter().zip(&o.bound).all(|(a, b)| a <= b)
            && self.depth.iter().zip(&o.depth).all(|(a, b)| a <= b)
    }

    pub fn member_tri(&self, g: &Mat) -> Tri {
        let m = self.m;
        let iw = self.is_iwahori_type();
        let mut acc = Tri::Yes;
        for i in 0..m {
            for j in 0..m {
                let x = g.get(i, j);
                let t = if i != j {
                    x.member_tri(LocalSet::Ideal(self.bound(i, j)))
                } else {
                    match self.depth[i] {
                        0 if iw => x.member_tri(LocalSet::Units),
                        0 => x.member_tri(LocalSet::Integers),
                        d => x.member_tri(LocalSet::PrincipalUnits(d)),
                    }
                };
                acc = acc.and(t);
                if acc == Tri::No {
                    return acc;
                }
            }
        }
        if !iw {
            acc = acc.and(g.det().member_tri(LocalSet::Units));
        }
        acc
    }

    pub fn member(&self, g: &Mat) -> Result<bool> {
        self.member_tri(g).certain("pattern membership")
    }

    /// Haar volume with `GL_m(O)` of volume 1.
    pub fn volume(&self, ell: u32) -> BigRational {
        let m = self.m;
        let l = BigInt::from(ell);
        let lq = BigRational::from_integer(l.clone());
        let pow = |k: i64| -> BigRational {
            if k >= 0 {
                BigRational::from_integer(num_traits::pow(l.clone(), k as usize))
            } else {
                BigRational::new(BigInt::one(), num_traits::pow(l.clone(), (-k) as usize))
            }
        };
        let mut vol = BigRational::one();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    vol *= pow(-self.bound(i, j));
                }
            }
        }
        // blocks of indices linked by bound(i,j) + bound(j,i) <= 0
        let mut block = vec![usize::MAX; m];
        for i in 0..m {
            if block[i] != usize::MAX {
                continue;
            }
            block[i] = i;
            for j in i + 1..m {
                if self.bound(i, j) + self.bound(j, i) <= 0 {
                    block[j] = i;
                }
            }
        }
        for root in 0..m {
            let b = block.iter().filter(|&&x| x == root).count();
            if b == 0 {
                continue;
            }
            if b == 1 {
                vol *= match self.depth[root] {
                    0 => BigRational::one() - BigRational::one() / lq.clone(),
                    d => pow(-(d as i64)),
                };
            } else {
                vol *= gl_fraction(ell, b);
            }
        }
        vol / gl_fraction(ell, m)
    }
}

/// `|GL_b(F_ell)| / ell^(b^2)`.
pub fn gl_fraction(ell: u32, b: usize) -> BigRational {
    let l = BigRational::from_integer(BigInt::from(ell));
    let mut acc = BigRational::one();
    let mut p = BigRational::one();
    for _ in 0..b {
        p /= l.clone();
        acc *= BigRational::one() - p.clone();
    }
    if b == 0 {
        return BigRational::one();
    }
    acc
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern[")?;
        for i in 0..self.m {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.m {
                if j > 0 {
                    write!(f, " ")?;
                }
                if i == j {
                    write!(f, "d{}", self.depth[i])?;
                } else {
                    write!(f, "{}", self.bound(i, j))?;
                }
            }
        }
        write!(f, "]")
    }
}

/// Compact open subgroup of `GL_n x GL_{n+1} x F^x`: one pattern per matrix
/// factor and `J_t` on the last factor.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SubgroupDesc {
    pub small: Pattern,
    pub big: Pattern,
    pub j: u32,
}

impl SubgroupDesc {
    pub fn new(small: Pattern, big: Pattern, j: u32) -> Self {
        assert_eq!(small.size() + 1, big.size());
        SubgroupDesc { small, big, j }
    }

    /// `GL_n(O) x GL_{n+1}(O) x J_t`.
    pub fn hyperspecial(n: usize, j: u32) -> Self {
        SubgroupDesc::new(Pattern::hyperspecial(n), Pattern::hyperspecial(n + 1), j)
    }

    /// Iwahori subgroups in both matrix factors and `J_t`.
    pub fn iwahori(n: usize, j: u32) -> Self {
        SubgroupDesc::new(Pattern::iwahori(n), Pattern::iwahori(n + 1), j)
    }

    pub fn n(&self) -> usize {
        self.small.size()
    }

    pub fn with_j(&self, j: u32) -> Self {
        SubgroupDesc { j, ..self.clone() }
    }

    pub fn conjugate_by_diag(&self, cs: &[i64], cb: &[i64]) -> Self {
        SubgroupDesc {
            small: self.small.conjugate_by_diag(cs),
            big: self.big.conjugate_by_diag(cb),
            j: self.j,
        }
    }

    pub fn intersect(&self, o: &SubgroupDesc) -> Self {
        SubgroupDesc {
            small: self.small.intersect(&o.small),
            big: self.big.intersect(&o.big),
            j: self.j.max(o.j),
        }
    }

    pub fn contains(&self, o: &SubgroupDesc) -> bool {
        self.small.contains(&o.small) && self.big.contains(&o.big) && self.j <= o.j
    }

    pub fn member_tri(&self, g: &GroupElt) -> Tri {
        self.small
            .member_tri(&g.small)
            .and(self.big.member_tri(&g.big))
            .and(g.u.member_tri(LocalSet::PrincipalUnits(self.j)))
    }

    pub fn member(&self, g: &GroupElt) -> Result<bool> {
        self.member_tri(g).certain("subgroup membership")
    }

    /// Volume with `GL_n(O) x GL_{n+1}(O) x O^x` of volume 1.
    pub fn volume(&self, ell: u32) -> BigRational {
        self.small.volume(ell) * self.big.volume(ell) * j_volume(ell, self.j)
    }
}

/// Volume of `J_t` with `O^x` of volume 1.
pub fn j_volume(ell: u32, t: u32) -> BigRational {
    if t == 0 {
        return BigRational::one();
    }
    let l = BigInt::from(ell);
    BigRational::new(BigInt::one(), (l.clone() - 1) * num_traits::pow(l, t as usize - 1))
}

/// Field element membership in `J_t`.
pub fn in_j(x: &FieldElement, t: u32) -> Result<bool> {
    x.member(LocalSet::PrincipalUnits(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn named_volumes() {
        // [GL_2(Z_3) : Iwahori] = ell + 1
        assert_eq!(Pattern::iwahori(2).volume(3), r(1, 4));
        assert_eq!(Pattern::hyperspecial(3).volume(2), r(1, 1));
        // |GL_2(F_2)| = 6, congruence kernel mod w has volume 1/6
        assert_eq!(Pattern::congruence(2, 1).volume(2), r(1, 6));
        // index of K^phi in Iwahori is ell^{n(n-1)(n+1)/6}, here n = 3
        let ratio = Pattern::iwahori(3).volume(2) / Pattern::iwahori_phi(3).volume(2);
        assert_eq!(ratio, r(16, 1));
        let ratio1 = Pattern::iwahori_phi(2).volume(5) / Pattern::iwahori_phi_1(2).volume(5);
        assert_eq!(ratio1, r(16, 1));
        assert_eq!(j_volume(3, 2), r(1, 6));
    }

    #[test]
    fn conjugation_preserves_volume() {
        let p = Pattern::iwahori(3);
        let q = p.conjugate_by_diag(&[2, 0, -1]);
        assert_eq!(p.volume(3), q.volume(3));
        let h = Pattern::hyperspecial(2).conjugate_by_diag(&[1, 0]);
        assert_eq!(h.volume(3), r(1, 1));
        // GL_2(O) cap its conjugate is the Iwahori
        let i = Pattern::hyperspecial(2).intersect(&h);
        assert_eq!(i.volume(3), r(1, 4));
    }

    #[test]
    fn membership_examples() {
        let ell = 3;
        let g = Mat::parse(ell, "1 + w, 0; 0, 1").unwrap();
        assert!(Pattern::congruence(2, 1).member(&g).unwrap());
        assert!(!Pattern::congruence(2, 2).member(&g).unwrap());
        let l = Mat::parse(ell, "1, 0; w, 1").unwrap();
        assert!(Pattern::iwahori(2).member(&l).unwrap());
        assert!(!Pattern::iwahori_phi(2).member(&l).unwrap());
        let l2 = Mat::parse(ell, "1, 0; w^2, 1").unwrap();
        assert!(Pattern::iwahori_phi(2).member(&l2).unwrap());
        let sing = Mat::parse(ell, "1, 1; 1, 1").unwrap();
        assert!(!Pattern::hyperspecial(2).member(&sing).unwrap());
        let vague = Mat::parse(ell, "1, 0; O(w^1), 1").unwrap();
        assert!(Pattern::iwahori(2).member(&vague).unwrap());
        assert!(Pattern::iwahori_phi(2).member(&vague).is_err());
    }

    #[test]
    fn phi_conjugates_of_unipotents() {
        // phi^{-1} n phi scales entry (i,j) by w^{j-i}; with n integral upper
        // unipotent the result lies in the conjugated Iwahori.
        let ell = 2;
        let n = Mat::parse(ell, "1, 1, 1; 0, 1, 1; 0, 0, 1").unwrap();
        let phi = Mat::diag_pi(ell, &[-1, -2, -3]);
        let x = phi.inverse().unwrap().mul(&n).mul(&phi);
        assert_eq!(x.get(0, 2).valuation().unwrap(), -2);
        let p = Pattern::iwahori(3).conjugate_by_diag(&[1, 2, 3]);
        assert!(p.member(&x).unwrap());
        assert!(!Pattern::iwahori_phi(3).member(&x).unwrap());
    }
}
