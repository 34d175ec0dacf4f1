use std::fmt;

use crate::error::{Error, Result};
use crate::localfield::{FieldElement, Tri, DEFAULT_PRECISION};

use super::matrix::Mat;

/// Element `(g_n, g_{n+1}, u)` of `GL_n(F) x GL_{n+1}(F) x F^x`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupElt {
    pub small: Mat,
    pub big: Mat,
    pub u: FieldElement,
}

impl GroupElt {
    pub fn new(small: Mat, big: Mat, u: FieldElement) -> Result<Self> {
        if small.size() + 1 != big.size() {
            return Err(Error::InvalidInput("factor sizes must be n and n+1".into()));
        }
        Ok(GroupElt { small, big, u })
    }

    pub fn identity(ell: u32, n: usize) -> Self {
        GroupElt { small: Mat::identity(ell, n), big: Mat::identity(ell, n + 1), u: FieldElement::one(ell) }
    }

    pub fn n(&self) -> usize {
        self.small.size()
    }

    pub fn ell(&self) -> u32 {
        self.small.ell()
    }

    pub fn mul(&self, o: &GroupElt) -> GroupElt {
        GroupElt { small: self.small.mul(&o.small), big: self.big.mul(&o.big), u: self.u.mul(&o.u) }
    }

    pub fn inverse_prec(&self, rel_prec: u32) -> Result<GroupElt> {
        Ok(GroupElt {
            small: self.small.inverse_prec(rel_prec)?,
            big: self.big.inverse_prec(rel_prec)?,
            u: self.u.inv_prec(rel_prec)?,
        })
    }

    pub fn inverse(&self) -> Result<GroupElt> {
        self.inverse_prec(DEFAULT_PRECISION)
    }

    pub fn is_exact(&self) -> bool {
        self.small.is_exact() && self.big.is_exact() && self.u.is_exact()
    }

    pub fn eq_tri(&self, o: &GroupElt) -> Tri {
        let du = self.u.sub(&o.u);
        let tu = if du.is_exact_zero() {
            Tri::Yes
        } else if du.is_apparent_zero() {
            Tri::Unknown
        } else {
            Tri::No
        };
        self.small.eq_tri(&o.small).and(self.big.eq_tri(&o.big)).and(tu)
    }

    /// Exponent vectors when every factor is diagonal with monomial entries.
    pub fn diagonal_monomial_exponents(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let a = self.small.diagonal_monomial_exponents()?;
        let b = self.big.diagonal_monomial_exponents()?;
        self.u.valuation().ok()?;
        Some((a, b))
    }

    /// Coordinates on the quotient by the diagonal `GL_n`: the pair
    /// `(embed(g_n)^{-1} g_{n+1}, u / det g_n)`.
    pub fn quotient_coords(&self, rel_prec: u32) -> Result<(Mat, FieldElement)> {
        let si = self.small.inverse_prec(rel_prec)?;
        let y = si.embed().mul(&self.big);
        let c = self.u.mul(&self.small.det().inv_prec(rel_prec)?);
        Ok((y, c))
    }

    /// Whether `o` lies in the same coset for the diagonal `GL_n` acting on
    /// the left. The candidate `h = o_n g_n^{-1}` is forced by the first
    /// factor; the other two factors are compared after clearing the
    /// denominator `det g_n`, so exact inputs give an exact verdict.
    pub fn same_h_coset(&self, o: &GroupElt) -> Result<bool> {
        let n = self.n();
        let d = self.small.det();
        if d.is_exact_zero() {
            return Err(Error::Singular);
        }
        // d * h = o_n adj(g_n)
        let dh = o.small.mul(&self.small.adjugate());
        let lhs = dh.embed().mul(&self.big);
        let mut acc = Tri::Yes;
        for i in 0..=n {
            for j in 0..=n {
                let want = if i < n { o.big.get(i, j).mul(&d) } else { o.big.get(i, j).clone() };
                let have = if i < n { lhs.get(i, j).clone() } else { self.big.get(i, j).clone() };
                acc = acc.and(zero_tri(&have.sub(&want)));
            }
        }
        acc = acc.and(zero_tri(&self.u.mul(&o.small.det()).sub(&o.u.mul(&d))));
        acc.certain("same coset test")
    }

    /// Parses `small | big | u` with matrices in matrix text syntax.
    pub fn parse(ell: u32, s: &str) -> Result<GroupElt> {
        let parts: Vec<&str> = s.split('|').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected three factors in {s:?}")));
        }
        GroupElt::new(
            Mat::parse(ell, parts[0])?,
            Mat::parse(ell, parts[1])?,
            FieldElement::parse(ell, parts[2].trim())?,
        )
    }
}

impl fmt::Display for GroupElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {} | {}", self.small, self.big, self.u)
    }
}

impl fmt::Debug for GroupElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

fn zero_tri(x: &FieldElement) -> Tri {
    if x.is_exact_zero() {
        Tri::Yes
    } else if x.is_apparent_zero() {
        Tri::Unknown
    } else {
        Tri::No
    }
}

/// `h -> (h, diag(h, 1), det h)`.
pub fn embed_delta_tilde(h: &Mat) -> Result<GroupElt> {
    let d = h.det();
    if d.is_exact_zero() {
        return Err(Error::Singular);
    }
    Ok(GroupElt { small: h.clone(), big: h.embed(), u: d })
}

/// `(1, x, 1)`.
pub fn embed_big(x: &Mat) -> GroupElt {
    let ell = x.ell();
    let n = x.size() - 1;
    GroupElt { small: Mat::identity(ell, n), big: x.clone(), u: FieldElement::one(ell) }
}

/// `(1, 1, c)`.
pub fn embed_scalar(ell: u32, n: usize, c: FieldElement) -> GroupElt {
    GroupElt { small: Mat::identity(ell, n), big: Mat::identity(ell, n + 1), u: c }
}

/// The anti-diagonal matrix with ones.
pub fn long_weyl(ell: u32, n: usize) -> Mat {
    Mat::antidiagonal(ell, n)
}

/// `diag(w^-1, ..., w^-n)`.
pub fn phi(ell: u32, n: usize) -> Mat {
    let a: Vec<i64> = (1..=n as i64).map(|i| -i).collect();
    Mat::diag_pi(ell, &a)
}

/// The element with open orbit: `(1, [[w_n, e],[0, 1]], 1)` where `e` is the
/// all-ones column.
pub fn xi_open_orbit(ell: u32, n: usize) -> GroupElt {
    let w = long_weyl(ell, n);
    let big = Mat::from_fn(ell, n + 1, |i, j| {
        if i < n && j < n {
            w.get(i, j).clone()
        } else if j == n && i <= n {
            FieldElement::one(ell)
        } else {
            FieldElement::zero(ell)
        }
    });
    embed_big(&big)
}

/// Image of `diag(w^n, ..., w)` under the diagonal embedding.
pub fn tau(ell: u32, n: usize) -> GroupElt {
    let a: Vec<i64> = (1..=n as i64).rev().collect();
    embed_delta_tilde(&Mat::diag_pi(ell, &a)).expect("diagonal power is invertible")
}

/// `tau^t` for any integer `t`.
pub fn tau_pow(ell: u32, n: usize, t: i64) -> GroupElt {
    let a: Vec<i64> = (1..=n as i64).rev().map(|k| k * t).collect();
    embed_delta_tilde(&Mat::diag_pi(ell, &a)).expect("diagonal power is invertible")
}
