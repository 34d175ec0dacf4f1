use std::fmt;

use crate::error::{Error, Result};
use crate::localfield::{FieldElement, Tri, DEFAULT_PRECISION, EXACT};

/// Square matrix over the local field, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    ell: u32,
    m: usize,
    e: Vec<FieldElement>,
}

impl Mat {
    pub fn from_fn(ell: u32, m: usize, mut f: impl FnMut(usize, usize) -> FieldElement) -> Self {
        let mut e = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                e.push(f(i, j));
            }
        }
        Mat { ell, m, e }
    }

    pub fn zeros(ell: u32, m: usize) -> Self {
        Mat::from_fn(ell, m, |_, _| FieldElement::zero(ell))
    }

    pub fn identity(ell: u32, m: usize) -> Self {
        Mat::from_fn(ell, m, |i, j| {
            if i == j {
                FieldElement::one(ell)
            } else {
                FieldElement::zero(ell)
            }
        })
    }

    pub fn from_rows(ell: u32, rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidInput("matrix must be square".into()));
        }
        Ok(Mat { ell, m, e: rows.into_iter().flatten().collect() })
    }

    pub fn diag(ell: u32, d: &[FieldElement]) -> Self {
        Mat::from_fn(ell, d.len(), |i, j| {
            if i == j {
                d[i].clone()
            } else {
                FieldElement::zero(ell)
            }
        })
    }

    /// `diag(w^a_1, ..., w^a_m)`.
    pub fn diag_pi(ell: u32, a: &[i64]) -> Self {
        let d: Vec<FieldElement> = a.iter().map(|&k| FieldElement::pi_pow(ell, k)).collect();
        Mat::diag(ell, &d)
    }

    /// The antidiagonal permutation matrix.
    pub fn antidiagonal(ell: u32, m: usize) -> Self {
        Mat::from_fn(ell, m, |i, j| {
            if i + j + 1 == m {
                FieldElement::one(ell)
            } else {
                FieldElement::zero(ell)
            }
        })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.e[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: FieldElement) {
        self.e[i * self.m + j] = x;
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.e
    }

    pub fn is_exact(&self) -> bool {
        self.e.iter().all(|x| x.is_exact())
    }

    /// Smallest absolute precision among the entries.
    pub fn precision(&self) -> i64 {
        self.e.iter().map(|x| x.precision()).min().unwrap_or(EXACT)
    }

    pub fn truncate(&self, prec: i64) -> Self {
        Mat { ell: self.ell, m: self.m, e: self.e.iter().map(|x| x.truncate(prec)).collect() }
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        assert_eq!(self.m, o.m, "dimension mismatch");
        let m = self.m;
        Mat::from_fn(self.ell, m, |i, j| {
            let mut acc = FieldElement::zero(self.ell);
            for k in 0..m {
                let a = self.get(i, k);
                let b = o.get(k, j);
                if a.is_exact_zero() || b.is_exact_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(b));
            }
            acc
        })
    }

    pub fn add(&self, o: &Mat) -> Mat {
        Mat::from_fn(self.ell, self.m, |i, j| self.get(i, j).add(o.get(i, j)))
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        Mat::from_fn(self.ell, self.m, |i, j| self.get(i, j).sub(o.get(i, j)))
    }

    pub fn scale(&self, c: &FieldElement) -> Mat {
        Mat::from_fn(self.ell, self.m, |i, j| self.get(i, j).mul(c))
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.ell, self.m, |i, j| self.get(j, i).clone())
    }

    /// Determinant of the submatrix on the given rows and columns, by cofactor
    /// expansion (no division, so exact inputs give exact output).
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> FieldElement {
        let k = rows.len();
        if k == 0 {
            return FieldElement::one(self.ell);
        }
        if k == 1 {
            return self.get(rows[0], cols[0]).clone();
        }
        let mut acc = FieldElement::zero(self.ell);
        let sub_rows = &rows[1..];
        let mut sub_cols: Vec<usize> = Vec::with_capacity(k - 1);
        for (idx, &c) in cols.iter().enumerate() {
            let a = self.get(rows[0], c);
            if a.is_exact_zero() {
                continue;
            }
            sub_cols.clear();
            sub_cols.extend(cols.iter().enumerate().filter(|&(t, _)| t != idx).map(|(_, &x)| x));
            let t = a.mul(&self.minor(sub_rows, &sub_cols));
            acc = if idx % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
        }
        acc
    }

    pub fn det(&self) -> FieldElement {
        let idx: Vec<usize> = (0..self.m).collect();
        self.minor(&idx, &idx)
    }

    pub fn adjugate(&self) -> Mat {
        let m = self.m;
        if m == 1 {
            return Mat::identity(self.ell, 1);
        }
        Mat::from_fn(self.ell, m, |i, j| {
            // (adj)_{ij} = (-1)^{i+j} minor with row j and column i removed
            let rows: Vec<usize> = (0..m).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..m).filter(|&c| c != i).collect();
            let x = self.minor(&rows, &cols);
            if (i + j) % 2 == 0 {
                x
            } else {
                x.neg()
            }
        })
    }

    /// Inverse via the adjugate; series in `1/det` are cut at `rel_prec`.
    pub fn inverse_prec(&self, rel_prec: u32) -> Result<Mat> {
        let d = self.det();
        if d.is_exact_zero() {
            return Err(Error::Singular);
        }
        let dinv = d.inv_prec(rel_prec)?;
        Ok(self.adjugate().scale(&dinv))
    }

    pub fn inverse(&self) -> Result<Mat> {
        self.inverse_prec(DEFAULT_PRECISION)
    }

    /// Block embedding `g -> diag(g, 1)` into one size larger.
    pub fn embed(&self) -> Mat {
        let m = self.m;
        Mat::from_fn(self.ell, m + 1, |i, j| {
            if i < m && j < m {
                self.get(i, j).clone()
            } else if i == j {
                FieldElement::one(self.ell)
            } else {
                FieldElement::zero(self.ell)
            }
        })
    }

    /// `diag(s * self, 1)`.
    pub fn embed_scaled(&self, s: &FieldElement) -> Mat {
        let m = self.m;
        Mat::from_fn(self.ell, m + 1, |i, j| {
            if i < m && j < m {
                self.get(i, j).mul(s)
            } else if i == j {
                FieldElement::one(self.ell)
            } else {
                FieldElement::zero(self.ell)
            }
        })
    }

    /// Entrywise equality at the available precision.
    pub fn eq_tri(&self, o: &Mat) -> Tri {
        let mut acc = Tri::Yes;
        for (a, b) in self.e.iter().zip(&o.e) {
            let d = a.sub(b);
            let t = if d.is_exact_zero() {
                Tri::Yes
            } else if d.is_apparent_zero() {
                Tri::Unknown
            } else {
                Tri::No
            };
            acc = acc.and(t);
            if acc == Tri::No {
                return acc;
            }
        }
        acc
    }

    /// Equality up to the precision actually known on both sides.
    pub fn agrees_with(&self, o: &Mat) -> bool {
        self.eq_tri(o) != Tri::No
    }

    /// Smallest certified valuation of the entries; `None` for the zero matrix
    /// when nothing is certified.
    pub fn min_valuation(&self) -> Option<i64> {
        self.e.iter().filter_map(|x| x.valuation().ok()).min()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.m).all(|i| (0..self.m).all(|j| i == j || self.get(i, j).is_exact_zero()))
    }

    /// Exponents `a` when the matrix is diagonal with exact monomial entries.
    pub fn diagonal_monomial_exponents(&self) -> Option<Vec<i64>> {
        if !self.is_diagonal() {
            return None;
        }
        (0..self.m)
            .map(|i| {
                let x = self.get(i, i);
                let v = x.valuation().ok()?;
                x.is_monomial().then_some(v)
            })
            .collect()
    }

    /// Parses `a, b; c, d` with entries in field-element syntax.
    pub fn parse(ell: u32, s: &str) -> Result<Mat> {
        let rows = s
            .split(';')
            .map(|r| r.split(',').map(|x| FieldElement::parse(ell, x.trim())).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        Mat::from_rows(ell, rows)
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.m)
            .map(|i| {
                (0..self.m)
                    .map(|j| self.get(i, j).to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .collect();
        write!(f, "{}", rows.join("; "))
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}
