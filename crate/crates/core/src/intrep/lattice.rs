use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;

use super::branching::{character, HighestWeight};
use crate::error::{Error, Result};

type Q = BigRational;
type QMat = Vec<Vec<Q>>;

fn q(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

/// `p`-adic valuation; `None` for zero.
pub fn valuation(x: &Q, p: u32) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let count = |mut n: BigInt| {
        let mut v = 0;
        while n.is_multiple_of(&pb) {
            n /= &pb;
            v += 1;
        }
        v
    };
    Some(count(x.numer().abs()) - count(x.denom().abs()))
}

fn p_pow(p: u32, e: i64) -> Q {
    let base = Q::from_integer(BigInt::from(p));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base.recip(), (-e) as usize)
    }
}

fn det(m: &QMat) -> Q {
    let k = m.len();
    let mut a = m.clone();
    let mut d = Q::one();
    for c in 0..k {
        let Some(r) = (c..k).find(|&r| !a[r][c].is_zero()) else { return Q::zero() };
        if r != c {
            a.swap(r, c);
            d = -d;
        }
        d *= &a[c][c];
        for r in c + 1..k {
            let f = &a[r][c] / &a[c][c];
            if !f.is_zero() {
                for j in c..k {
                    let t = &f * &a[c][j];
                    a[r][j] -= t;
                }
            }
        }
    }
    d
}

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize == k {
            out.push((0..m).filter(|i| mask >> i & 1 == 1).collect());
        }
    }
    out
}

/// `Lambda^k g` on the basis `e_I`, `I` a `k`-subset: entry `(I, J)` is the minor `g[I, J]`.
fn wedge(g: &QMat, k: usize) -> QMat {
    let subs = subsets(g.len(), k);
    subs.iter()
        .map(|rows| subs.iter().map(|cols| det(&rows.iter().map(|&r| cols.iter().map(|&c| g[r][c].clone()).collect()).collect())).collect())
        .collect()
}

fn apply(m: &QMat, v: &[Q]) -> Vec<Q> {
    m.iter().map(|row| row.iter().zip(v).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum()).collect()
}

/// Row-echelon span used to grow a submodule.
struct Echelon {
    rows: Vec<(usize, Vec<Q>)>,
}

impl Echelon {
    /// Reduces `v`; returns the residue if it is new.
    fn insert(&mut self, mut v: Vec<Q>) -> Option<Vec<Q>> {
        for (piv, row) in &self.rows {
            if !v[*piv].is_zero() {
                let f = v[*piv].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        let piv = v.iter().position(|x| !x.is_zero())?;
        let lead = v[piv].clone();
        let row: Vec<Q> = v.iter().map(|x| x / &lead).collect();
        for (_, r) in self.rows.iter_mut() {
            if !r[piv].is_zero() {
                let f = r[piv].clone();
                for (x, y) in r.iter_mut().zip(&row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        self.rows.push((piv, row));
        Some(v)
    }
}

fn residue(x: &Q, p: u32) -> u64 {
    let pb = BigInt::from(p);
    let n = x.numer().mod_floor(&pb);
    let d = x.denom().mod_floor(&pb);
    let inv = d.modpow(&BigInt::from(p - 2), &pb);
    (n * inv).mod_floor(&pb).to_u64().expect("residue fits")
}

/// A dependency `sum c_i r_i = 0 mod p` among `p`-integral rows, if any.
fn dependency_mod_p(rows: &[Vec<Q>], p: u32) -> Option<Vec<u64>> {
    let pp = p as u64;
    let inv = |a: u64| (1..pp).find(|b| a * b % pp == 1).expect("unit mod p");
    let r = rows.len();
    let mut m: Vec<Vec<u64>> = rows.iter().map(|row| row.iter().map(|x| residue(x, p)).collect()).collect();
    let mut comb: Vec<Vec<u64>> = (0..r).map(|i| (0..r).map(|j| (i == j) as u64).collect()).collect();
    let mut used = vec![false; r];
    for c in 0..m.first().map_or(0, |x| x.len()) {
        let Some(piv) = (0..r).find(|&i| !used[i] && m[i][c] != 0) else { continue };
        used[piv] = true;
        let s = inv(m[piv][c]);
        for i in 0..r {
            if i != piv && m[i][c] != 0 {
                let f = m[i][c] * s % pp;
                for j in 0..m[i].len() {
                    m[i][j] = (m[i][j] + pp * pp - f * m[piv][j] % pp) % pp;
                }
                for j in 0..r {
                    comb[i][j] = (comb[i][j] + pp * pp - f * comb[piv][j] % pp) % pp;
                }
            }
        }
    }
    (0..r).find(|&i| !used[i]).map(|i| comb[i].clone())
}

/// The irreducible representation `V_mu` of `GL_m` over `Q`, realized in
/// `det^s (x) Lambda^{k_1} (x) ... (x) Lambda^{k_r}` (column lengths of
/// `mu - s`), with a basis of the `p`-local lattice `V_mu cap Z_(p)^d`.
pub struct WeylModule {
    pub weight: HighestWeight,
    pub p: u32,
    shift: i64,
    columns: Vec<usize>,
    basis: Vec<Vec<Q>>,
    pivots: Vec<usize>,
    pivot_inverse: QMat,
}

impl WeylModule {
    pub fn new(weight: &HighestWeight, p: u32, budget: u64) -> Result<Self> {
        let m = weight.rank();
        let shift = *weight.entries().last().expect("nonempty weight");
        let top = weight.entries()[0] - shift;
        let columns: Vec<usize> = (1..=top).map(|c| weight.entries().iter().filter(|&&x| x - shift >= c).count()).collect();
        let ambient: u64 = columns.iter().map(|&k| subsets(m, k).len() as u64).product();
        if ambient * weight.dimension() > budget {
            return Err(Error::BudgetExceeded(format!("ambient dimension {ambient}")));
        }
        let mut module = WeylModule {
            weight: weight.clone(),
            p,
            shift,
            columns,
            basis: vec![],
            pivots: vec![],
            pivot_inverse: vec![],
        };
        let highest: Vec<Q> = (0..ambient as usize).map(|i| if i == 0 { Q::one() } else { Q::zero() }).collect();
        let lowering: Vec<QMat> = (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .map(|(i, j)| {
                let mut g = identity(m);
                g[j][i] = Q::one();
                g
            })
            .collect();
        let mut span = Echelon { rows: vec![] };
        let mut queue = vec![span.insert(highest).expect("nonzero vector")];
        let mut found = queue.clone();
        while let Some(v) = queue.pop() {
            for l in &lowering {
                let image = module.ambient_apply(l, std::slice::from_ref(&v)).pop().expect("one image");
                if let Some(w) = span.insert(image) {
                    queue.push(w.clone());
                    found.push(w);
                }
            }
        }
        if found.len() as u64 != weight.dimension() {
            return Err(Error::Inconsistent(format!("spanned {} vectors, expected {}", found.len(), weight.dimension())));
        }
        module.basis = saturate(found, p);
        let pivots: Vec<usize> = {
            let mut e = Echelon { rows: vec![] };
            let mut cols = Vec::new();
            for b in &module.basis {
                e.insert(b.clone());
            }
            for (piv, _) in &e.rows {
                cols.push(*piv);
            }
            cols
        };
        let square: QMat = pivots.iter().map(|&c| module.basis.iter().map(|b| b[c].clone()).collect()).collect();
        module.pivot_inverse = invert(&square)?;
        module.pivots = pivots;
        Ok(module)
    }

    /// Images of [`iwahori_generators`] in the lattice basis.
    pub fn iwahori_images(&self) -> Vec<QMat> {
        iwahori_generators(self.p, self.weight.rank()).iter().map(|g| self.action(g)).collect()
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// `g` acting on the ambient tensor product, one factor at a time.
    fn ambient_apply(&self, g: &QMat, vs: &[Vec<Q>]) -> Vec<Vec<Q>> {
        let scale = det(g);
        let scale = if self.shift >= 0 {
            num_traits::pow(scale, self.shift as usize)
        } else {
            num_traits::pow(scale.recip(), (-self.shift) as usize)
        };
        let factors: Vec<QMat> = self.columns.iter().map(|&k| wedge(g, k)).collect();
        let dims: Vec<usize> = factors.iter().map(|f| f.len()).collect();
        vs.iter()
            .map(|v| {
                let mut cur: Vec<Q> = v.iter().map(|x| x * &scale).collect();
                for (t, f) in factors.iter().enumerate() {
                    let s = dims[t];
                    let inner: usize = dims[t + 1..].iter().product();
                    let outer: usize = dims[..t].iter().product();
                    let mut next = vec![Q::zero(); cur.len()];
                    for o in 0..outer {
                        for r in 0..inner {
                            let at = |j: usize| o * s * inner + j * inner + r;
                            for j in 0..s {
                                let x = &cur[at(j)];
                                if x.is_zero() {
                                    continue;
                                }
                                for i in 0..s {
                                    if !f[i][j].is_zero() {
                                        next[at(i)] += &f[i][j] * x;
                                    }
                                }
                            }
                        }
                    }
                    cur = next;
                }
                cur
            })
            .collect()
    }

    /// Matrix of `g` in the lattice basis (column `i` holds the coordinates of `g b_i`).
    pub fn action(&self, g: &QMat) -> QMat {
        let images = self.ambient_apply(g, &self.basis);
        let r = self.dimension();
        let mut out = vec![vec![Q::zero(); r]; r];
        for (i, w) in images.iter().enumerate() {
            let restricted: Vec<Q> = self.pivots.iter().map(|&c| w[c].clone()).collect();
            let coords = apply(&self.pivot_inverse, &restricted);
            for (j, x) in coords.into_iter().enumerate() {
                out[j][i] = x;
            }
        }
        out
    }
}

fn identity(m: usize) -> QMat {
    (0..m).map(|i| (0..m).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

fn invert(a: &QMat) -> Result<QMat> {
    let k = a.len();
    let mut m: QMat = a.iter().zip(identity(k)).map(|(r, e)| r.iter().cloned().chain(e).collect()).collect();
    for c in 0..k {
        let r = (c..k).find(|&r| !m[r][c].is_zero()).ok_or_else(|| Error::Inconsistent("singular pivot block".into()))?;
        m.swap(r, c);
        let lead = m[c][c].clone();
        for x in m[c].iter_mut() {
            *x /= &lead;
        }
        for r in 0..k {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for j in 0..2 * k {
                    let t = &f * &m[c][j];
                    m[r][j] -= t;
                }
            }
        }
    }
    Ok(m.into_iter().map(|r| r[k..].to_vec()).collect())
}

/// Basis of `span(rows) cap Z_(p)^d`: rows are made primitive, then any
/// dependency modulo `p` is divided out until the reductions are independent.
fn saturate(mut rows: Vec<Vec<Q>>, p: u32) -> Vec<Vec<Q>> {
    let primitive = |v: &mut Vec<Q>| {
        let min = v.iter().filter_map(|x| valuation(x, p)).min().unwrap_or(0);
        let s = p_pow(p, -min);
        for x in v.iter_mut() {
            *x *= &s;
        }
    };
    rows.iter_mut().for_each(primitive);
    while let Some(c) = dependency_mod_p(&rows, p) {
        let j = c.iter().position(|&x| x != 0).expect("nontrivial dependency");
        let d = rows[0].len();
        let mut v = vec![Q::zero(); d];
        for (ci, r) in c.iter().zip(&rows) {
            if *ci != 0 {
                for (x, y) in v.iter_mut().zip(r) {
                    *x += q(*ci as i64) * y;
                }
            }
        }
        let pinv = p_pow(p, -1);
        rows[j] = v.into_iter().map(|x| x * &pinv).collect();
        primitive(&mut rows[j]);
    }
    rows
}

fn kron(a: &QMat, b: &QMat) -> QMat {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![Q::zero(); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            if a[i][j].is_zero() {
                continue;
            }
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = &a[i][j] * &b[k][l];
                }
            }
        }
    }
    out
}

/// Basis of the `GL_n`-invariants in `Lambda_{-a} (x) Lambda_b`, `GL_n`
/// acting on `V_b` through `h -> diag(h, 1)`, each vector scaled to be
/// primitive at `p`. Invariance is imposed under the elementary unipotents
/// (which generate `SL_n`) and under `diag(2, 1, ..., 1)`.
pub fn invariant_vectors(a: &HighestWeight, b: &HighestWeight, p: u32, budget: u64) -> Result<Vec<Vec<Q>>> {
    let n = a.rank();
    if b.rank() != n + 1 {
        return Err(Error::InvalidInput("ranks must be n and n + 1".into()));
    }
    let (ma, mb) = (WeylModule::new(&a.dual(), p, budget)?, WeylModule::new(b, p, budget)?);
    let d = ma.dimension() * mb.dimension();
    if (d * d) as u64 > budget {
        return Err(Error::BudgetExceeded(format!("invariants in dimension {d}")));
    }
    let mut gens = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut g = identity(n);
                g[i][j] = Q::one();
                gens.push(g);
            }
        }
    }
    let mut t = identity(n);
    t[0][0] = q(2);
    gens.push(t);
    let mut eq = Echelon { rows: vec![] };
    for g in &gens {
        let mut big = identity(n + 1);
        for i in 0..n {
            for j in 0..n {
                big[i][j] = g[i][j].clone();
            }
        }
        let mut m = kron(&ma.action(g), &mb.action(&big));
        for (i, row) in m.iter_mut().enumerate() {
            row[i] -= Q::one();
        }
        for row in m {
            eq.insert(row);
        }
    }
    let pivots: Vec<usize> = eq.rows.iter().map(|(c, _)| *c).collect();
    let mut out = Vec::new();
    for free in (0..d).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); d];
        v[free] = Q::one();
        for (piv, row) in &eq.rows {
            v[*piv] = -row[free].clone();
        }
        let min = v.iter().filter_map(|x| valuation(x, p)).min().unwrap_or(0);
        let s = p_pow(p, -min);
        out.push(v.into_iter().map(|x| x * &s).collect());
    }
    Ok(out)
}

/// `diag(p^{c_1}, ..., p^{c_m})`.
pub fn torus(p: u32, c: &[i64]) -> QMat {
    let mut g = identity(c.len());
    for (i, &e) in c.iter().enumerate() {
        g[i][i] = p_pow(p, e);
    }
    g
}

/// `v_p(alpha(a)) <= 0` for the positive roots: exponents non-decreasing.
pub fn is_antidominant(c: &[i64]) -> bool {
    c.windows(2).all(|w| w[0] <= w[1])
}

/// Generators of the Iwahori subgroup at `p`: upper unipotents, lower
/// unipotents with entry `p`, and a diagonal unit.
pub fn iwahori_generators(p: u32, m: usize) -> Vec<QMat> {
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let mut g = identity(m);
                g[i][j] = if i < j { Q::one() } else { q(p as i64) };
                out.push(g);
            }
        }
        let mut g = identity(m);
        g[i][i] = q(-1 - p as i64);
        out.push(g);
    }
    out
}

fn matmul(a: &QMat, b: &QMat) -> QMat {
    a.iter().map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, r)| x * &r[j]).sum()).collect()).collect()
}

/// First entry of negative valuation, if any.
fn non_integral(m: &QMat, p: u32) -> Option<(usize, usize, i64)> {
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if let Some(v) = valuation(x, p) {
                if v < 0 {
                    return Some((i, j, v));
                }
            }
        }
    }
    None
}

/// Outcome of the integrality test for one module and torus element.
pub(crate) fn integrality_verdict(module: &WeylModule, gens: &[QMat], c: &[i64], budget: u64) -> Result<std::result::Result<(), serde_json::Value>> {
    let p = module.p;
    let mu = module.weight.entries();
    let top: i64 = mu.iter().zip(c).map(|(a, b)| a * b).sum();
    let rescale = p_pow(p, -top);
    let a = torus(p, c);
    let scaled: QMat = module.action(&a).into_iter().map(|r| r.into_iter().map(|x| x * &rescale).collect()).collect();

    // weight by weight: exponent <mu' - mu, c>, and the trace matches the character
    let mut trace = Q::zero();
    for (w, k) in character(&module.weight, budget)? {
        let e: i64 = w.iter().zip(c).map(|(a, b)| a * b).sum::<i64>() - top;
        if e < 0 && is_antidominant(c) {
            return Ok(Err(json!({ "comparison": "weight exponent", "weight": w, "exponent": e })));
        }
        trace += q(k as i64) * p_pow(p, e);
    }
    let got: Q = (0..scaled.len()).map(|i| scaled[i][i].clone()).sum();
    if got != trace {
        return Ok(Err(json!({ "comparison": "trace against character", "lhs": got.to_string(), "rhs": trace.to_string() })));
    }
    if let Some((i, j, v)) = non_integral(&scaled, p) {
        return Ok(Err(json!({ "comparison": "rescaled torus element", "entry": [i, j], "valuation": v })));
    }
    for (k, g) in gens.iter().enumerate() {
        if let Some((i, j, v)) = non_integral(g, p) {
            return Ok(Err(json!({ "comparison": "Iwahori generator", "generator": k, "entry": [i, j], "valuation": v })));
        }
    }
    // k a k' with k = 1 + p E_21 and k' = 1 + E_12
    let (lower, upper) = (&gens[c.len()], &gens[0]);
    let prod = matmul(&matmul(lower, &scaled), upper);
    if let Some((i, j, v)) = non_integral(&prod, p) {
        return Ok(Err(json!({ "comparison": "k a k'", "entry": [i, j], "valuation": v })));
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn module(v: &[i64], p: u32) -> WeylModule {
        WeylModule::new(&HighestWeight::new(v).unwrap(), p, 1 << 20).unwrap()
    }

    #[test]
    fn invariant_line() {
        let hw = |v: &[i64]| HighestWeight::new(v).unwrap();
        let inv = invariant_vectors(&hw(&[1]), &hw(&[2, 0]), 3, 1 << 20).unwrap();
        assert_eq!(inv.len(), 1);
        assert_eq!(inv[0].iter().filter_map(|x| valuation(x, 3)).min(), Some(0));
        assert!(invariant_vectors(&hw(&[2, 0]), &hw(&[1, 1, 0]), 3, 1 << 20).unwrap().is_empty());
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation(&Q::new(12.into(), 5.into()), 2), Some(2));
        assert_eq!(valuation(&Q::new(3.into(), 8.into()), 2), Some(-3));
        assert_eq!(valuation(&Q::zero(), 2), None);
    }

    #[test]
    fn dimensions_match_weyl() {
        for v in [&[1, 0][..], &[2, 0], &[2, 1, 0], &[1, 1, 0], &[0, 0, -2], &[3, 3]] {
            assert_eq!(module(v, 3).dimension() as u64, HighestWeight::new(v).unwrap().dimension());
        }
    }

    #[test]
    fn standard_and_symmetric_square() {
        let p = 3;
        let std = module(&[1, 0], p);
        let m = std.action(&torus(p, &[0, 1]));
        let diag: Vec<Option<i64>> = (0..2).map(|i| valuation(&m[i][i], p)).collect();
        let mut sorted = diag.clone();
        sorted.sort();
        assert_eq!(sorted, vec![Some(0), Some(1)]);
        let sym2 = module(&[2, 0], p);
        assert!(integrality_verdict(&sym2, &sym2.iwahori_images(), &[0, 2], 100).unwrap().is_ok());
    }

    #[test]
    fn trivial_weight_is_identity() {
        let m = module(&[0, 0], 2);
        assert_eq!(m.action(&torus(2, &[0, 3])), vec![vec![Q::one()]]);
    }

    #[test]
    fn non_antidominant_fails() {
        let m = module(&[1, 0], 2);
        let v = integrality_verdict(&m, &m.iwahori_images(), &[1, 0], 100).unwrap();
        assert!(v.is_err());
    }

    #[test]
    fn lattice_is_group_stable_with_small_prime() {
        // p = 2 divides the binomial coefficients of Sym^2, so the lattice must be saturated
        let m = module(&[2, 0], 2);
        for g in iwahori_generators(2, 2) {
            assert!(non_integral(&m.action(&g), 2).is_none());
        }
    }
}
