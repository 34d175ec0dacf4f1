use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Weight multiset of an irreducible representation.
pub type Character = BTreeMap<Vec<i64>, u64>;

/// Non-increasing integer tuple labelling an irreducible representation of `GL_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HighestWeight(Vec<i64>);

impl HighestWeight {
    pub fn new(v: &[i64]) -> Result<Self> {
        if v.is_empty() || v.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!("{v:?} is not a non-increasing tuple")));
        }
        Ok(HighestWeight(v.to_vec()))
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// `-a = (-a_m, ..., -a_1)`, the contragredient.
    pub fn dual(&self) -> HighestWeight {
        HighestWeight(self.0.iter().rev().map(|x| -x).collect())
    }

    /// Dimension by the Weyl dimension formula.
    pub fn dimension(&self) -> u64 {
        let m = self.0.len();
        let (mut num, mut den) = (1i128, 1i128);
        for i in 0..m {
            for j in i + 1..m {
                num *= (self.0[i] - self.0[j] + (j - i) as i64) as i128;
                den *= (j - i) as i128;
            }
        }
        (num / den) as u64
    }
}

/// `b_1 >= a_1 >= b_2 >= ... >= a_n >= b_{n+1}`.
pub fn interlaces(a: &HighestWeight, b: &HighestWeight) -> bool {
    let (a, b) = (&a.0, &b.0);
    b.len() == a.len() + 1 && (0..a.len()).all(|i| b[i] >= a[i] && a[i] >= b[i + 1])
}

fn below(row: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for i in 0..row.len() - 1 {
        let mut next = Vec::new();
        for v in &out {
            for x in row[i + 1]..=row[i] {
                let mut w = v.clone();
                w.push(x);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Weights of `V_b` from its Gelfand-Tsetlin patterns: the `k`-th weight
/// coordinate is the difference of the sums of rows `k` and `k - 1`.
pub fn character(b: &HighestWeight, budget: u64) -> Result<Character> {
    if b.dimension() > budget {
        return Err(Error::BudgetExceeded(format!("representation of dimension {}", b.dimension())));
    }
    let m = b.rank();
    let mut out = Character::new();
    let mut stack: Vec<(Vec<i64>, Vec<i64>)> = vec![(b.0.clone(), vec![])];
    while let Some((row, mut sums)) = stack.pop() {
        sums.push(row.iter().sum());
        if row.len() == 1 {
            let w: Vec<i64> = (0..m).map(|k| sums[m - 1 - k] - sums.get(m - k).copied().unwrap_or(0)).collect();
            *out.entry(w).or_insert(0) += 1;
            continue;
        }
        for next in below(&row) {
            stack.push((next, sums.clone()));
        }
    }
    Ok(out)
}

/// Decomposes a `GL_m` character into irreducibles by repeatedly removing
/// the character of its lexicographically largest weight.
pub fn decompose(mut ch: Character, budget: u64) -> Result<BTreeMap<HighestWeight, u64>> {
    let mut out = BTreeMap::new();
    while let Some((top, &mult)) = ch.iter().next_back() {
        let hw = HighestWeight::new(top).map_err(|_| Error::Inconsistent(format!("top weight {top:?} is not dominant")))?;
        for (w, k) in character(&hw, budget)? {
            let slot = ch.get_mut(&w).ok_or_else(|| Error::Inconsistent(format!("weight {w:?} missing")))?;
            *slot = slot.checked_sub(k * mult).ok_or_else(|| Error::Inconsistent(format!("weight {w:?} overdrawn")))?;
            if *slot == 0 {
                ch.remove(&w);
            }
        }
        out.insert(hw, mult);
    }
    Ok(out)
}

/// `dim Hom_{GL_n}(1, V_{-a} (x) V_b)`: the multiplicity of `V_a` in the
/// restriction of `V_b` to `GL_n` (last diagonal coordinate set to 1).
pub fn branching_multiplicity(a: &HighestWeight, b: &HighestWeight, budget: u64) -> Result<u64> {
    if b.rank() != a.rank() + 1 {
        return Err(Error::InvalidInput("ranks must be n and n + 1".into()));
    }
    let mut restricted = Character::new();
    for (w, k) in character(b, budget)? {
        *restricted.entry(w[..a.rank()].to_vec()).or_insert(0) += k;
    }
    Ok(decompose(restricted, budget)?.get(a).copied().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hw(v: &[i64]) -> HighestWeight {
        HighestWeight::new(v).unwrap()
    }

    #[test]
    fn interlacing_examples() {
        assert!(interlaces(&hw(&[2, 0]), &hw(&[2, 1, 0])));
        assert!(!interlaces(&hw(&[2, 0]), &hw(&[1, 1, 0])));
        assert!(interlaces(&hw(&[1]), &hw(&[3, 0])));
        assert!(interlaces(&hw(&[4]), &hw(&[4, 3])));
    }

    #[test]
    fn characters_have_weyl_dimension() {
        for v in [&[2, 1, 0][..], &[3, 3, -1], &[4, 0], &[1, 1, 1]] {
            let ch = character(&hw(v), 1000).unwrap();
            assert_eq!(ch.values().sum::<u64>(), hw(v).dimension());
        }
        let sym2 = character(&hw(&[2, 0]), 10).unwrap();
        assert_eq!(sym2.len(), 3);
        assert!(sym2.values().all(|&k| k == 1));
    }

    #[test]
    fn branching_examples() {
        assert_eq!(branching_multiplicity(&hw(&[2, 0]), &hw(&[2, 1, 0]), 1000).unwrap(), 1);
        assert_eq!(branching_multiplicity(&hw(&[2, 0]), &hw(&[1, 1, 0]), 1000).unwrap(), 0);
        assert_eq!(branching_multiplicity(&hw(&[1]), &hw(&[3, 0]), 1000).unwrap(), 1);
        assert!(HighestWeight::new(&[0, 1]).is_err());
    }
}
