use std::collections::HashSet;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::localfield::{FieldElement, Tri};
use crate::matgrp::{hnf_right, GroupElt, Mat, Pattern, SubgroupDesc};
use crate::scalars::Scalar;

use super::reps::coset_reps;
use super::solver::{member_translate, solve, Mode, SolverConfig};
use super::sum::{quotient_key, CosetSum, HeckeTerm, Piece, Space, Term};

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub solver: SolverConfig,
    /// Largest transversal that may be enumerated.
    pub rep_budget: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { solver: SolverConfig::default(), rep_budget: 1 << 22 }
    }
}

/// Outcome of [`x_equal`]; `witness` holds a point and both values when the
/// functions differ.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub equal: bool,
    pub points: usize,
    pub witness: Option<(GroupElt, Scalar, Scalar)>,
}

/// `mu_H(H cap g K g^{-1})` with `mu_H(GL_n(O)) = 1`.
pub fn volume_h(g: &GroupElt, k: &SubgroupDesc, cfg: &SolverConfig) -> Result<BigRational> {
    let id = GroupElt::identity(g.ell(), g.n());
    solve(g, g, k, &id, Mode::Measure, cfg)
}

impl Term {
    fn eval(&self, space: Space, x: &GroupElt, cfg: &SolverConfig) -> Result<bool> {
        match space {
            Space::Group => member_translate(x, &self.base, &self.group, &self.right_inv, cfg.rel_prec),
            Space::Quotient => {
                let r = solve(x, &self.base, &self.group, &self.right_inv, Mode::Exists, cfg)?;
                Ok(!num_traits::Zero::is_zero(&r))
            }
        }
    }

    /// Points `p` with `supp(1[b P g]) subset of the union of p K`.
    fn test_points(&self, k: &SubgroupDesc, budget: u64) -> Result<Vec<GroupElt>> {
        let p = &self.group;
        if self.has_trivial_translate()
            || self.group.member_tri(&self.right_inv) == Tri::Yes
            || k.member_tri(&self.right_inv) == Tri::Yes
        {
            // b P g lies in b P K when g is in P or in K
            let reps = coset_reps(self.base.ell(), p, &p.intersect(k), budget)?;
            return Ok(reps.iter().map(|r| self.base.mul(r)).collect());
        }
        if let Some((a, b)) = self.right_inv.diagonal_monomial_exponents() {
            let g = self.right_inv.inverse()?;
            let na: Vec<i64> = a.iter().map(|x| -x).collect();
            let nb: Vec<i64> = b.iter().map(|x| -x).collect();
            let conj = k.conjugate_by_diag(&na, &nb);
            let reps = coset_reps(self.base.ell(), p, &p.intersect(&conj), budget)?;
            return Ok(reps.iter().map(|r| self.base.mul(r).mul(&g)).collect());
        }
        if SubgroupDesc::hyperspecial(k.n(), 0).member_tri(&self.right_inv) == Tri::Yes {
            // g normalizes the congruence subgroup L inside K, so
            // b P g = union of b kappa g L over kappa in P / (P cap L)
            let g = self.right_inv.inverse_prec(SolverConfig::default().rel_prec)?;
            let l = congruence_inside(k);
            let reps = coset_reps(self.base.ell(), p, &p.intersect(&l), budget)?;
            return Ok(reps.iter().map(|r| self.base.mul(r).mul(&g)).collect());
        }
        Err(Error::InvalidInput(format!("no test points for a term translated by {}", self.right_inv)))
    }
}

/// The largest principal congruence subgroup contained in `k`.
fn congruence_inside(k: &SubgroupDesc) -> SubgroupDesc {
    let level = |p: &Pattern| {
        let m = p.size();
        let mut lvl = 1i64;
        for i in 0..m {
            for j in 0..m {
                lvl = lvl.max(if i == j { p.depth(i) as i64 } else { p.bound(i, j) });
            }
        }
        lvl
    };
    let m = level(&k.small).max(level(&k.big)).max(k.j as i64) as u32;
    SubgroupDesc::new(Pattern::congruence(k.n(), m), Pattern::congruence(k.n() + 1, m), m)
}

fn is_delta_zero(s: &CosetSum) -> bool {
    match s.pieces.as_slice() {
        [Piece::Coset(t)] => {
            s.space == Space::Quotient
                && t.coeff.is_one()
                && t.has_trivial_translate()
                && t.base == GroupElt::identity(s.ell, s.n)
                && t.group == SubgroupDesc::hyperspecial(s.n, 0)
        }
        _ => false,
    }
}

impl HeckeTerm {
    fn translates(&self, ell: u32) -> impl Iterator<Item = GroupElt> + '_ {
        let u = FieldElement::pi_pow(ell, self.label.2);
        self.small_reps.iter().flat_map(move |s| {
            let u = u.clone();
            self.big_reps.iter().map(move |b| GroupElt { small: s.clone(), big: b.clone(), u: u.clone() })
        })
    }

    /// Number of cosets `u_j` with `x u_j in H K` when the inner sum is the
    /// unit indicator: `x u_j` lies in `H K` exactly when the lattices of
    /// `embed(s)` and `y b` agree and the valuations balance.
    fn count_delta_zero(&self, x: &GroupElt, rel_prec: u32) -> Result<u64> {
        let (y, c) = x.quotient_coords(rel_prec)?;
        let weight: i64 = self.label.0.iter().sum();
        if c.valuation()? + self.label.2 != weight {
            return Ok(0);
        }
        let mut total = 0u64;
        for b in self.big_reps.iter() {
            let h = hnf_right(&y.mul(b))?;
            total += *self.small_lattices.get(&h).unwrap_or(&0) as u64;
        }
        Ok(total)
    }

    fn eval(&self, ell: u32, x: &GroupElt, cfg: &SolverConfig) -> Result<Scalar> {
        if is_delta_zero(&self.inner) {
            let c = self.count_delta_zero(x, cfg.rel_prec)?;
            return Ok(&self.coeff * &Scalar::from_int(ell, c as i64));
        }
        let mut acc = Scalar::zero(ell);
        for u in self.translates(ell) {
            acc = &acc + &self.inner.eval_with(&x.mul(&u), cfg)?;
        }
        Ok(&self.coeff * &acc)
    }

    fn test_points(&self, ell: u32, n: usize, k: &SubgroupDesc, budget: u64) -> Result<Vec<GroupElt>> {
        let hyp = SubgroupDesc::hyperspecial(n, 0);
        if !hyp.contains(k) {
            return Err(Error::NotContained("common subgroup must lie in the hyperspecial one".into()));
        }
        let inner_points = self.inner.test_points(&hyp, budget)?;
        let u = FieldElement::pi_pow(ell, -self.label.2);
        let extra = coset_reps(ell, &hyp, k, budget)?;
        let total = inner_points.len() as u128
            * self.small_point_reps.len() as u128
            * self.big_point_reps.len() as u128
            * extra.len() as u128;
        if total > budget as u128 {
            return Err(Error::BudgetExceeded(format!("{total} test points for a Hecke image")));
        }
        let mut out = Vec::new();
        for p in &inner_points {
            for s in self.small_point_reps.iter() {
                for b in self.big_point_reps.iter() {
                    let v = GroupElt { small: s.clone(), big: b.clone(), u: u.clone() };
                    let pv = p.mul(&v);
                    for e in &extra {
                        out.push(pv.mul(e));
                    }
                }
            }
        }
        Ok(out)
    }
}

impl CosetSum {
    /// Value at a point of the group, or at the coset `H x` of the quotient.
    pub fn eval(&self, x: &GroupElt) -> Result<Scalar> {
        self.eval_with(x, &SolverConfig::default())
    }

    pub fn eval_with(&self, x: &GroupElt, cfg: &SolverConfig) -> Result<Scalar> {
        let mut acc = Scalar::zero(self.ell);
        for p in &self.pieces {
            match p {
                Piece::Coset(t) => {
                    if t.eval(self.space, x, cfg)? {
                        acc = &acc + &t.coeff;
                    }
                }
                Piece::Hecke(h) => {
                    if self.space != Space::Quotient {
                        return Err(Error::InvalidInput("Hecke images live on the quotient".into()));
                    }
                    acc = &acc + &h.eval(self.ell, x, cfg)?;
                }
            }
        }
        Ok(acc)
    }

    /// `int_H f(h x) dh` for a sum on the group.
    pub fn h_average(&self, x: &GroupElt, cfg: &SolverConfig) -> Result<Scalar> {
        self.require_group()?;
        let mut acc = Scalar::zero(self.ell);
        for t in self.terms() {
            let m = solve(x, &t.base, &t.group, &t.right_inv, Mode::Measure, cfg)?;
            acc = &acc + &(&t.coeff * &Scalar::from_rational(self.ell, m));
        }
        Ok(acc)
    }

    /// The coinvariant map: `1[b P g] -> mu_H(H cap b P b^{-1}) 1[H b P g]`.
    pub fn coinvariants(&self, cfg: &SolverConfig) -> Result<CosetSum> {
        self.require_group()?;
        let id = GroupElt::identity(self.ell, self.n);
        let mut out = CosetSum::zero(self.ell, self.n, Space::Quotient);
        for t in self.terms() {
            let m = solve(&t.base, &t.base, &t.group, &id, Mode::Measure, cfg)?;
            let coeff = &t.coeff * &Scalar::from_rational(self.ell, m);
            out.push(Piece::Coset(Term { coeff, ..t.clone() }));
        }
        Ok(out.simplify())
    }

    /// `sum_{gamma in K / K'} gamma . f` for `f` invariant under `K'`.
    pub fn trace(&self, k: &SubgroupDesc, kp: &SubgroupDesc, budget: u64) -> Result<CosetSum> {
        if !k.contains(kp) {
            return Err(Error::NotContained(format!("{kp:?} is not inside {k:?}")));
        }
        for p in &self.pieces {
            match p {
                Piece::Coset(t) if t.is_invariant_under(kp) => {}
                Piece::Coset(t) => return Err(Error::NotInvariant(format!("term {t} under {kp:?}"))),
                Piece::Hecke(_) => return Err(Error::NotInvariant("trace of a Hecke image".into())),
            }
        }
        let reps = coset_reps(self.ell, k, kp, budget)?;
        let images: Vec<CosetSum> = reps.par_iter().map(|g| self.act(g)).collect::<Result<_>>()?;
        let mut out = CosetSum::zero(self.ell, self.n, self.space);
        for img in images {
            out.pieces.extend(img.pieces);
        }
        Ok(out.simplify())
    }

    /// Finite set of points meeting every right `K`-coset in the support.
    pub fn test_points(&self, k: &SubgroupDesc, budget: u64) -> Result<Vec<GroupElt>> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let pts = match p {
                Piece::Coset(t) => t.test_points(k, budget)?,
                Piece::Hecke(h) => h.test_points(self.ell, self.n, k, budget)?,
            };
            out.extend(pts);
            if out.len() as u64 > budget {
                return Err(Error::BudgetExceeded(format!("{} test points", out.len())));
            }
        }
        Ok(out)
    }

    fn require_group(&self) -> Result<()> {
        if self.space != Space::Group {
            return Err(Error::InvalidInput("expected a sum on the group".into()));
        }
        Ok(())
    }
}

/// Drops points in the same `H`-orbit times `1 x GL_{n+1}(O) x J_t` as an
/// earlier point; only valid when `K` contains that group.
fn dedupe(points: Vec<GroupElt>, k: &SubgroupDesc, rel_prec: u32) -> Result<Vec<GroupElt>> {
    if k.big != Pattern::hyperspecial(k.n() + 1) {
        return Ok(points);
    }
    let keys: Vec<_> = points.par_iter().map(|p| quotient_key(p, k.j, rel_prec)).collect::<Result<_>>()?;
    let mut seen = HashSet::new();
    Ok(points
        .into_iter()
        .zip(keys)
        .filter_map(|(p, key)| seen.insert(key).then_some(p))
        .collect())
}

/// Decides `f = g` on the quotient for sums invariant under `k` on the right.
pub fn x_equal(f: &CosetSum, g: &CosetSum, k: &SubgroupDesc, cfg: &EvalConfig) -> Result<Comparison> {
    if f.space != Space::Quotient || g.space != Space::Quotient {
        return Err(Error::InvalidInput("equality is decided on the quotient".into()));
    }
    let mut points = f.test_points(k, cfg.rep_budget)?;
    points.extend(g.test_points(k, cfg.rep_budget)?);
    let mut seen = HashSet::new();
    points.retain(|p| seen.insert(p.clone()));
    let points = dedupe(points, k, cfg.solver.rel_prec)?;
    let values: Vec<(Scalar, Scalar)> = points
        .par_iter()
        .map(|x| Ok((f.eval_with(x, &cfg.solver)?, g.eval_with(x, &cfg.solver)?)))
        .collect::<Result<_>>()?;
    let witness = points
        .iter()
        .zip(values)
        .find(|(_, (a, b))| a != b)
        .map(|(x, (a, b))| (x.clone(), a, b));
    Ok(Comparison { equal: witness.is_none(), points: points.len(), witness })
}

/// Multiplicities of the lattices `embed(s) O^{n+1}` over a list of matrices.
pub fn lattice_multiplicities(reps: &[Mat]) -> Result<std::collections::HashMap<crate::matgrp::Hnf, u32>> {
    let mut out = std::collections::HashMap::new();
    for s in reps {
        *out.entry(hnf_right(&s.embed())?).or_insert(0) += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgrp::{embed_delta_tilde, Pattern};
    use num_traits::One;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn h_volumes() {
        let cfg = SolverConfig::default();
        let id = GroupElt::identity(2, 2);
        assert_eq!(volume_h(&id, &SubgroupDesc::hyperspecial(2, 0), &cfg).unwrap(), BigRational::one());
        assert_eq!(volume_h(&id, &SubgroupDesc::iwahori(2, 0), &cfg).unwrap(), rat(1, 3));
        for (ell, n) in [(3u32, 1usize), (3, 2), (5, 1)] {
            let id = GroupElt::identity(ell, n);
            let big = Pattern::hyperspecial(n + 1);
            let a = volume_h(&id, &SubgroupDesc::new(Pattern::iwahori_phi(n), big.clone(), 0), &cfg).unwrap();
            let b = volume_h(&id, &SubgroupDesc::new(Pattern::iwahori_phi_1(n), big, 0), &cfg).unwrap();
            assert_eq!(a, b * rat((ell as i64 - 1).pow(n as u32), 1));
        }
    }

    #[test]
    fn coinvariants_of_unit_indicator() {
        let ell = 3;
        let f = CosetSum::single(
            Space::Group,
            Term::new(Scalar::one(ell), GroupElt::identity(ell, 1), SubgroupDesc::hyperspecial(1, 0)),
        );
        let i = f.coinvariants(&SolverConfig::default()).unwrap();
        let k = SubgroupDesc::hyperspecial(1, 0);
        assert!(x_equal(&i, &CosetSum::delta_zero(ell, 1), &k, &EvalConfig::default()).unwrap().equal);
        assert_eq!(f.h_average(&GroupElt::identity(ell, 1), &SolverConfig::default()).unwrap(), Scalar::one(ell));
    }

    #[test]
    fn equality_and_invariance() {
        let ell = 2;
        let n = 2;
        let k = SubgroupDesc::iwahori(n, 0);
        let base = crate::matgrp::xi_open_orbit(ell, n);
        let f = CosetSum::single(Space::Quotient, Term::new(Scalar::one(ell), base, k.clone()));
        let cfg = EvalConfig::default();
        assert!(x_equal(&f, &f, &k, &cfg).unwrap().equal);
        let g = GroupElt::parse(ell, "1, w; 0, 1 | 1, 0, 0; w, 1, 0; 0, w, 1 | 1 + w").unwrap();
        assert!(k.member(&g).unwrap());
        let fg = f.act(&g).unwrap();
        assert!(x_equal(&f, &fg, &k, &cfg).unwrap().equal);
        let twice = f.scale(&Scalar::from_int(ell, 2));
        let c = x_equal(&f, &twice, &k, &cfg).unwrap();
        assert!(!c.equal);
        let (_, a, b) = c.witness.unwrap();
        assert_eq!(&a + &a, b);
    }

    #[test]
    fn action_law_on_group() {
        let ell = 3;
        let t = Term::new(Scalar::one(ell), GroupElt::identity(ell, 1), SubgroupDesc::iwahori(1, 1));
        let f = CosetSum::single(Space::Group, t);
        let g1 = GroupElt::parse(ell, "w | 1, w^-1; 0, 1 | 2").unwrap();
        let g2 = crate::matgrp::tau(ell, 1);
        let lhs = f.act(&g2).unwrap().act(&g1).unwrap();
        let rhs = f.act(&g1.mul(&g2)).unwrap();
        assert_eq!(f.act(&GroupElt::identity(ell, 1)).unwrap().to_string(), f.to_string());
        let pts = [
            GroupElt::identity(ell, 1),
            g1.inverse().unwrap(),
            g1.mul(&g2).inverse().unwrap(),
            GroupElt::parse(ell, "w^-1 | 1, 0; w, 1 | w^-1").unwrap().mul(&g2.inverse().unwrap()),
        ];
        for x in &pts {
            assert_eq!(lhs.eval(x).unwrap(), rhs.eval(x).unwrap());
        }
        assert_eq!(lhs.eval(&g1.mul(&g2).inverse().unwrap()).unwrap(), Scalar::one(ell));
    }

    #[test]
    fn trace_over_units() {
        let ell = 3;
        let n = 1;
        let k0 = SubgroupDesc::hyperspecial(n, 0);
        let k1 = SubgroupDesc::hyperspecial(n, 1);
        let f = CosetSum::single(Space::Quotient, Term::new(Scalar::one(ell), GroupElt::identity(ell, n), k1.clone()));
        assert_eq!(f.trace(&k1, &k1, 100).unwrap().to_string(), f.to_string());
        let tr = f.trace(&k0, &k1, 100).unwrap();
        let want = CosetSum::delta_zero(ell, n).scale(&Scalar::from_int(ell, 2));
        assert!(x_equal(&tr, &want, &k1, &EvalConfig::default()).unwrap().equal);
        assert!(matches!(f.trace(&k1, &k0, 100), Err(Error::NotContained(_))));
    }

    #[test]
    fn trace_requires_invariance() {
        let ell = 2;
        let k = SubgroupDesc::hyperspecial(1, 0);
        let iw = SubgroupDesc::iwahori(1, 0);
        let f = CosetSum::single(Space::Group, Term::new(Scalar::one(ell), GroupElt::identity(ell, 1), iw));
        assert!(matches!(f.trace(&k, &k, 100), Err(Error::NotInvariant(_))));
    }

    #[test]
    fn h_average_depends_on_orbit() {
        let ell = 2;
        let f = CosetSum::single(
            Space::Group,
            Term::new(Scalar::one(ell), crate::matgrp::xi_open_orbit(ell, 1), SubgroupDesc::iwahori(1, 0)),
        );
        let x = GroupElt::parse(ell, "1 | 1, 1; 0, 1 | 1").unwrap();
        let h = embed_delta_tilde(&Mat::parse(ell, "1 + w^2").unwrap()).unwrap();
        let cfg = SolverConfig::default();
        let a = f.h_average(&x, &cfg).unwrap();
        assert_eq!(a, f.h_average(&h.mul(&x), &cfg).unwrap());
        assert_eq!(a, Scalar::one(ell));
    }

    #[test]
    fn text_round_trip() {
        let ell = 3;
        let mut f = CosetSum::delta_zero(ell, 2);
        let t = Term::new(
            Scalar::from_ratio(ell, -2, 3),
            crate::matgrp::tau(ell, 2),
            SubgroupDesc::new(Pattern::iwahori_phi_1(2), Pattern::congruence(3, 2), 1),
        )
        .act(&GroupElt::parse(ell, "1, 1; 0, 1 | 1, 0, 0; 0, 1, 0; w, 0, 1 | 1").unwrap())
        .unwrap();
        f.push(Piece::Coset(t));
        let s = f.to_string();
        let g = CosetSum::parse(ell, 2, Space::Quotient, &s).unwrap();
        assert_eq!(g.to_string(), s);
        let odd = "1 | [1] [1, 0; 0, 1] 1 | K x P(d0,1,0,d1) x J0";
        assert!(CosetSum::parse(ell, 1, Space::Quotient, odd).is_ok());
        let bad = "1 | [1] [1, 0; 0, 1] 1 | K x P(d0,-1,0,d1) x J0";
        assert!(CosetSum::parse(ell, 1, Space::Quotient, bad).is_err());
    }
}
