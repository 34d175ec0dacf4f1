use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matgrp::{hnf_right, GroupElt, Hnf, Mat, Pattern, SubgroupDesc};
use crate::scalars::Scalar;

/// Whether a sum lives on the group or on the quotient by the diagonal `GL_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Group,
    Quotient,
}

/// `coeff * 1[base P g]`, or `coeff * 1[H base P g]` on the quotient.
/// The right translate is stored through its inverse `right_inv = g^{-1}`.
#[derive(Clone, Debug)]
pub struct Term {
    pub coeff: Scalar,
    pub base: GroupElt,
    pub group: SubgroupDesc,
    pub right_inv: GroupElt,
}

/// `coeff * sum_j act(u_j, inner)` where `u_j` runs over
/// `small_reps x big_reps x {w^k}`, the right cosets of a double coset of
/// the hyperspecial subgroup.
#[derive(Clone, Debug)]
pub struct HeckeTerm {
    pub coeff: Scalar,
    pub label: (Vec<i64>, Vec<i64>, i64),
    pub small_reps: Arc<Vec<Mat>>,
    pub big_reps: Arc<Vec<Mat>>,
    /// Right cosets of the inverse double coset, used for test points.
    pub small_point_reps: Arc<Vec<Mat>>,
    pub big_point_reps: Arc<Vec<Mat>>,
    /// Multiplicities of `hnf(embed(a))` over `small_reps`.
    pub small_lattices: Arc<HashMap<Hnf, u32>>,
    pub inner: Arc<CosetSum>,
}

#[derive(Clone, Debug)]
pub enum Piece {
    Coset(Term),
    Hecke(HeckeTerm),
}

/// Finite formal sum of coset indicators.
#[derive(Clone, Debug)]
pub struct CosetSum {
    pub ell: u32,
    pub n: usize,
    pub space: Space,
    pub pieces: Vec<Piece>,
}

impl Term {
    pub fn new(coeff: Scalar, base: GroupElt, group: SubgroupDesc) -> Self {
        let right_inv = GroupElt::identity(base.ell(), base.n());
        Term { coeff, base, group, right_inv }
    }

    pub fn has_trivial_translate(&self) -> bool {
        self.right_inv == GroupElt::identity(self.base.ell(), self.base.n())
    }

    /// Right translation of the function: `x -> f(x h)`.
    pub fn act(&self, h: &GroupElt) -> Result<Term> {
        if self.has_trivial_translate() && self.group.member_tri(h) == crate::localfield::Tri::Yes {
            return Ok(self.clone());
        }
        if let Some((a, b)) = h.diagonal_monomial_exponents() {
            // b P g h^{-1} = (b h^{-1}) (h P h^{-1}) (h g h^{-1})
            let hinv = h.inverse()?;
            return Ok(Term {
                coeff: self.coeff.clone(),
                base: self.base.mul(&hinv),
                group: self.group.conjugate_by_diag(&a, &b),
                right_inv: h.mul(&self.right_inv).mul(&hinv),
            });
        }
        Ok(Term {
            coeff: self.coeff.clone(),
            base: self.base.clone(),
            group: self.group.clone(),
            right_inv: h.mul(&self.right_inv),
        })
    }

    /// Sufficient test for right invariance under `k`: `g k g^{-1} in P`.
    pub fn is_invariant_under(&self, k: &SubgroupDesc) -> bool {
        if self.has_trivial_translate() {
            return self.group.contains(k);
        }
        if let Some((a, b)) = self.right_inv.diagonal_monomial_exponents() {
            // g = right_inv^{-1}, so g K g^{-1} is the conjugate by -exponents
            let na: Vec<i64> = a.iter().map(|x| -x).collect();
            let nb: Vec<i64> = b.iter().map(|x| -x).collect();
            return self.group.contains(&k.conjugate_by_diag(&na, &nb));
        }
        false
    }
}

impl CosetSum {
    pub fn zero(ell: u32, n: usize, space: Space) -> Self {
        CosetSum { ell, n, space, pieces: Vec::new() }
    }

    pub fn single(space: Space, term: Term) -> Self {
        CosetSum { ell: term.base.ell(), n: term.base.n(), space, pieces: vec![Piece::Coset(term)] }
    }

    /// `1[H K]` on the quotient for `K = GL_n(O) x GL_{n+1}(O) x J_t`.
    pub fn delta_zero(ell: u32, n: usize) -> Self {
        CosetSum::single(
            Space::Quotient,
            Term::new(Scalar::one(ell), GroupElt::identity(ell, n), SubgroupDesc::hyperspecial(n, 0)),
        )
    }

    pub fn push(&mut self, p: Piece) {
        self.pieces.push(p);
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Coset(t) => Some(t),
            Piece::Hecke(_) => None,
        })
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn scale(&self, c: &Scalar) -> CosetSum {
        let pieces = self
            .pieces
            .iter()
            .map(|p| match p {
                Piece::Coset(t) => Piece::Coset(Term { coeff: &t.coeff * c, ..t.clone() }),
                Piece::Hecke(h) => Piece::Hecke(HeckeTerm { coeff: &h.coeff * c, ..h.clone() }),
            })
            .collect();
        CosetSum { pieces, ..self.clone() }
    }

    pub fn add(&self, o: &CosetSum) -> Result<CosetSum> {
        if self.space != o.space || self.n != o.n || self.ell != o.ell {
            return Err(Error::InvalidInput("adding sums on different spaces".into()));
        }
        let mut out = self.clone();
        out.pieces.extend(o.pieces.iter().cloned());
        Ok(out)
    }

    pub fn sub(&self, o: &CosetSum) -> Result<CosetSum> {
        self.add(&o.scale(&Scalar::from_int(self.ell, -1)))
    }

    /// `g . f`, i.e. `x -> f(x g)`.
    pub fn act(&self, g: &GroupElt) -> Result<CosetSum> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| match p {
                Piece::Coset(t) => Ok(Piece::Coset(t.act(g)?)),
                Piece::Hecke(_) => Err(Error::InvalidInput("translating a Hecke image is not supported".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CosetSum { pieces, ..self.clone() })
    }

    /// Merges terms with identical support data and drops zero coefficients.
    pub fn simplify(&self) -> CosetSum {
        let mut order: Vec<(GroupElt, SubgroupDesc, GroupElt)> = Vec::new();
        let mut coeffs: HashMap<(GroupElt, SubgroupDesc, GroupElt), Scalar> = HashMap::new();
        let mut others = Vec::new();
        for p in &self.pieces {
            match p {
                Piece::Coset(t) => {
                    let key = (t.base.clone(), t.group.clone(), t.right_inv.clone());
                    match coeffs.get_mut(&key) {
                        Some(c) => *c = &*c + &t.coeff,
                        None => {
                            order.push(key.clone());
                            coeffs.insert(key, t.coeff.clone());
                        }
                    }
                }
                Piece::Hecke(h) => others.push(Piece::Hecke(h.clone())),
            }
        }
        let mut pieces: Vec<Piece> = order
            .into_iter()
            .filter_map(|key| {
                let c = coeffs.remove(&key).expect("key recorded");
                (!c.is_zero()).then(|| {
                    Piece::Coset(Term { coeff: c, base: key.0, group: key.1, right_inv: key.2 })
                })
            })
            .collect();
        pieces.extend(others);
        CosetSum { pieces, ..self.clone() }
    }

    /// Parses the line format written by `Display`.
    pub fn parse(ell: u32, n: usize, space: Space, s: &str) -> Result<CosetSum> {
        let mut out = CosetSum::zero(ell, n, space);
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let fields: Vec<&str> = line.split(" | ").collect();
            if fields.len() != 3 && fields.len() != 4 {
                return Err(Error::Parse(format!("expected 3 or 4 fields in {line:?}")));
            }
            let coeff = parse_rational_scalar(ell, fields[0])?;
            let base = parse_bracketed(ell, fields[1])?;
            let group = parse_subgroup(n, fields[2])?;
            let right_inv = match fields.get(3) {
                Some(f) => parse_bracketed(ell, f.trim_start_matches("right ").trim())?,
                None => GroupElt::identity(ell, n),
            };
            out.push(Piece::Coset(Term { coeff, base, group, right_inv }));
        }
        Ok(out)
    }
}

fn parse_rational_scalar(ell: u32, s: &str) -> Result<Scalar> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let p: i64 = num.parse().map_err(|_| Error::Parse(format!("bad coefficient {s:?}")))?;
    let q: i64 = den.parse().map_err(|_| Error::Parse(format!("bad coefficient {s:?}")))?;
    if q == 0 {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(Scalar::from_ratio(ell, p, q))
}

fn parse_bracketed(ell: u32, s: &str) -> Result<GroupElt> {
    let s = s.trim();
    let mut mats = Vec::new();
    let mut rest = s;
    for _ in 0..2 {
        let open = rest.find('[').ok_or_else(|| Error::Parse(format!("missing '[' in {s:?}")))?;
        let close = rest.find(']').ok_or_else(|| Error::Parse(format!("missing ']' in {s:?}")))?;
        mats.push(Mat::parse(ell, &rest[open + 1..close])?);
        rest = &rest[close + 1..];
    }
    let u = crate::localfield::FieldElement::parse(ell, rest.trim())?;
    let big = mats.pop().expect("two matrices");
    let small = mats.pop().expect("two matrices");
    GroupElt::new(small, big, u)
}

fn pattern_tag(p: &Pattern) -> String {
    let m = p.size();
    let named = [
        ("K", Pattern::hyperspecial(m)),
        ("Iw", Pattern::iwahori(m)),
        ("Kphi", Pattern::iwahori_phi(m)),
        ("Kphi1", Pattern::iwahori_phi_1(m)),
    ];
    for (name, q) in &named {
        if q == p {
            return name.to_string();
        }
    }
    for lvl in 1..6 {
        if *p == Pattern::congruence(m, lvl) {
            return format!("C{lvl}");
        }
    }
    let bounds: Vec<String> = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| if i == j { format!("d{}", p.depth(i)) } else { p.bound(i, j).to_string() })
        .collect();
    format!("P({})", bounds.join(","))
}

fn parse_pattern(m: usize, s: &str) -> Result<Pattern> {
    match s {
        "K" => return Ok(Pattern::hyperspecial(m)),
        "Iw" => return Ok(Pattern::iwahori(m)),
        "Kphi" => return Ok(Pattern::iwahori_phi(m)),
        "Kphi1" => return Ok(Pattern::iwahori_phi_1(m)),
        _ => {}
    }
    if let Some(l) = s.strip_prefix('C') {
        let lvl: u32 = l.parse().map_err(|_| Error::Parse(format!("bad level in {s:?}")))?;
        if lvl == 0 {
            return Err(Error::Parse("congruence level must be positive".into()));
        }
        return Ok(Pattern::congruence(m, lvl));
    }
    let inner = s
        .strip_prefix("P(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("unknown subgroup tag {s:?}")))?;
    let items: Vec<&str> = inner.split(',').collect();
    if items.len() != m * m {
        return Err(Error::Parse(format!("pattern {s:?} has wrong size")));
    }
    let mut bounds = vec![0i64; m * m];
    let mut depth = vec![0u32; m];
    for (idx, it) in items.iter().enumerate() {
        let (i, j) = (idx / m, idx % m);
        if i == j {
            depth[i] = it
                .strip_prefix('d')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad depth {it:?}")))?;
        } else {
            bounds[idx] = it.parse().map_err(|_| Error::Parse(format!("bad bound {it:?}")))?;
        }
    }
    Pattern::from_parts(m, &bounds, &depth).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_subgroup(n: usize, s: &str) -> Result<SubgroupDesc> {
    let parts: Vec<&str> = s.trim().split(" x ").collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("subgroup tag needs three factors: {s:?}")));
    }
    let j: u32 = parts[2]
        .strip_prefix('J')
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad J factor in {s:?}")))?;
    Ok(SubgroupDesc::new(parse_pattern(n, parts[0])?, parse_pattern(n + 1, parts[1])?, j))
}

pub fn subgroup_tag(k: &SubgroupDesc) -> String {
    format!("{} x {} x J{}", pattern_tag(&k.small), pattern_tag(&k.big), k.j)
}

fn bracketed(g: &GroupElt) -> String {
    format!("[{}] [{}] {}", g.small, g.big, g.u)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {} | {}", self.coeff, bracketed(&self.base), subgroup_tag(&self.group))?;
        if !self.has_trivial_translate() {
            write!(f, " | right {}", bracketed(&self.right_inv))?;
        }
        Ok(())
    }
}

impl fmt::Display for CosetSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.pieces {
            match p {
                Piece::Coset(t) => writeln!(f, "{t}")?,
                Piece::Hecke(h) => writeln!(
                    f,
                    "{} | hecke {:?} {:?} {} | {} inner terms",
                    h.coeff,
                    h.label.0,
                    h.label.1,
                    h.label.2,
                    h.inner.len()
                )?,
            }
        }
        Ok(())
    }
}

/// Key identifying a point of the quotient up to the right action of
/// `1 x GL_{n+1}(O) x J_t`.
pub fn quotient_key(x: &GroupElt, t: u32, rel_prec: u32) -> Result<(Hnf, (i64, Vec<u32>))> {
    let (y, c) = x.quotient_coords(rel_prec)?;
    Ok((hnf_right(&y)?, super::reps::unit_class(&c, t)?))
}
