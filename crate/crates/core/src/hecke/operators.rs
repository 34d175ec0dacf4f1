use std::collections::HashMap;

use crate::cosetfun::CosetSum;
use crate::error::{Error, Result};
use crate::matgrp::{tau_pow, SubgroupDesc};
use crate::scalars::{Monomial, Scalar, Var};

use super::algebra::{HeckeElt, SatakeConfig};

/// `prod_{i,j} (1 - A_i B_j T l^{-1/2})`.
pub fn l_factor_polynomial(ell: u32, n: usize) -> Scalar {
    let c = Scalar::ell_half_power(ell, -1);
    let t = Scalar::var(ell, Var::T);
    let mut acc = Scalar::one(ell);
    for i in 1..=n as u8 {
        for j in 1..=n as u8 + 1 {
            let x = &(&Scalar::var(ell, Var::A(i)) * &Scalar::var(ell, Var::B(j))) * &(&t * &c);
            acc = &acc * &(&Scalar::one(ell) - &x);
        }
    }
    acc
}

/// The Hecke operator whose Satake image is the inverse L-factor at 1/2.
pub fn ell_operator(ell: u32, n: usize, cfg: &SatakeConfig) -> Result<HeckeElt> {
    HeckeElt::inverse_satake(ell, n, &l_factor_polynomial(ell, n), cfg)
}

/// Parameters must be invertible: nonzero constants or single monomials.
fn check_units(params: &[Scalar]) -> Result<()> {
    for p in params {
        if p.inverse().is_err() {
            return Err(Error::InvalidInput(format!("Satake parameter {p} is not a unit")));
        }
    }
    Ok(())
}

/// Coefficients (constant term first) of `prod (1 - a_i^{-1} b_j^{-1} l^{-1/2} X)`.
pub fn euler_factor(ell: u32, alpha: &[Scalar], beta: &[Scalar]) -> Result<Vec<Scalar>> {
    check_units(alpha)?;
    check_units(beta)?;
    let c = Scalar::ell_half_power(ell, -1);
    let mut poly = vec![Scalar::one(ell)];
    for a in alpha {
        for b in beta {
            let r = &(&a.inverse()? * &b.inverse()?) * &c;
            let mut next = vec![Scalar::zero(ell); poly.len() + 1];
            for (d, x) in poly.iter().enumerate() {
                next[d] = &next[d] + x;
                next[d + 1] = &next[d + 1] - &(x * &r);
            }
            poly = next;
        }
    }
    Ok(poly)
}

/// Specializes a Satake image at `(alpha, beta)` and reads the coefficient of
/// `T^{-d}` as the coefficient of `X^d`. Parameters may themselves be
/// variables, which gives the symbolic comparison.
pub fn euler_factor_from_satake(sat: &Scalar, alpha: &[Scalar], beta: &[Scalar]) -> Result<Vec<Scalar>> {
    check_units(alpha)?;
    check_units(beta)?;
    let ell = sat.ell();
    let mut assignment: HashMap<Var, Scalar> = HashMap::new();
    for (i, a) in alpha.iter().enumerate() {
        assignment.insert(Var::A(i as u8 + 1), a.clone());
    }
    for (j, b) in beta.iter().enumerate() {
        assignment.insert(Var::B(j as u8 + 1), b.clone());
    }
    assignment.insert(Var::T, Scalar::var(ell, Var::T));
    let specialized = sat.substitute(&assignment)?;
    let mut poly: Vec<Scalar> = Vec::new();
    for (m, c) in specialized.terms() {
        let d = -m.exponent(Var::T);
        if d < 0 {
            return Err(Error::InvalidInput(format!("monomial {m} has a positive power of T")));
        }
        let rest = Monomial::from_pairs(m.pairs().iter().copied().filter(|(v, _)| *v != Var::T));
        let d = d as usize;
        if poly.len() <= d {
            poly.resize(d + 1, Scalar::zero(ell));
        }
        poly[d] = &poly[d] + &(&c * &Scalar::monomial(ell, rest));
    }
    while poly.len() > 1 && poly.last().is_some_and(|c| c.is_zero()) {
        poly.pop();
    }
    Ok(poly)
}

/// `phi -> Tr (tau^{-1} . phi)` from `K^Iw cap tau^{-1} K^Iw tau` up to the
/// Iwahori subgroup `K^Iw x J_t`.
pub fn u_operator(phi: &CosetSum, t: u32, budget: u64) -> Result<CosetSum> {
    let n = phi.n;
    let k = SubgroupDesc::iwahori(n, t);
    let tau = tau_pow(phi.ell, n, 1);
    let (a, b) = tau.diagonal_monomial_exponents().expect("tau is a diagonal power");
    let na: Vec<i64> = a.iter().map(|x| -x).collect();
    let nb: Vec<i64> = b.iter().map(|x| -x).collect();
    let kp = k.intersect(&k.conjugate_by_diag(&na, &nb));
    phi.act(&tau_pow(phi.ell, n, -1))?.trace(&k, &kp, budget)
}
