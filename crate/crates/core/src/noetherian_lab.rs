//! Brute-force oracles for well-partial-order combinatorics at desk scale.
//!
//! A bad sequence is one with no `i < j` such that `u_i ≤ u_j`. Searches are
//! bounded by an explicit length and are deterministic: candidates are
//! explored in lexicographic order of their positions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::error::{KernelError, Result};
use crate::monomials::Monomial;

pub const DEFAULT_MAX_LEN: usize = 6;
pub const DEFAULT_DEPTH: usize = 5;

const SEARCH_NODES: usize = 1_000_000;

/// A finite strict partial order on labelled elements.
#[derive(Clone, Debug)]
pub struct FinitePoset {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    less: HashSet<(usize, usize)>,
}

impl FinitePoset {
    /// Builds the poset from its strict relation, given as pairs `(a, b)`
    /// meaning `a < b`.
    pub fn new(labels: &[&str], relation: &[(&str, &str)]) -> Result<FinitePoset> {
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.to_string(), i).is_some() {
                return Err(KernelError::InvalidInput(format!("duplicate label {l}")));
            }
        }
        let lookup = |l: &str| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| KernelError::InvalidInput(format!("unknown label {l}")))
        };
        let mut less = HashSet::new();
        for (a, b) in relation {
            let (i, j) = (lookup(a)?, lookup(b)?);
            if i == j {
                return Err(KernelError::InvalidInput(format!("relation is not irreflexive at {a}")));
            }
            less.insert((i, j));
        }
        for &(i, j) in &less {
            for &(k, l) in &less {
                if j == k && !less.contains(&(i, l)) {
                    return Err(KernelError::InvalidInput(format!(
                        "relation is not transitive: {} < {} < {}",
                        labels[i], labels[j], labels[l]
                    )));
                }
            }
        }
        Ok(FinitePoset { labels: labels.iter().map(|s| s.to_string()).collect(), index, less })
    }

    /// `a_0 < a_1 < ...`.
    pub fn chain(labels: &[&str]) -> Result<FinitePoset> {
        let mut rel = Vec::new();
        for i in 0..labels.len() {
            for j in i + 1..labels.len() {
                rel.push((labels[i], labels[j]));
            }
        }
        FinitePoset::new(labels, &rel)
    }

    pub fn antichain(labels: &[&str]) -> Result<FinitePoset> {
        FinitePoset::new(labels, &[])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// `a ≤ b` on element positions.
    pub fn le(&self, a: usize, b: usize) -> bool {
        a == b || self.less.contains(&(a, b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceVerdict {
    BadSequenceFound,
    NoneUpToBound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceWitness {
    /// Positions in the searched list; empty when nothing was found.
    pub indices: Vec<usize>,
    pub verdict: SequenceVerdict,
}

impl SequenceWitness {
    pub fn found(&self) -> bool {
        self.verdict == SequenceVerdict::BadSequenceFound
    }
}

impl fmt::Display for SequenceWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.verdict {
            SequenceVerdict::BadSequenceFound => write!(f, "bad_sequence_found {:?}", self.indices),
            SequenceVerdict::NoneUpToBound => write!(f, "none_up_to_bound"),
        }
    }
}

/// The first maximal bad subsequence of `items` (increasing positions, at
/// least two elements, at most `max_len`) in lexicographic order.
pub fn find_bad_sequence_by<T>(items: &[T], le: impl Fn(&T, &T) -> bool, max_len: usize) -> Result<SequenceWitness> {
    if max_len == 0 {
        return Err(KernelError::InvalidInput("max_len must be at least 1".into()));
    }
    let mut nodes = 0usize;
    let mut path = Vec::new();
    for start in 0..items.len() {
        path.clear();
        path.push(start);
        if let Some(found) = extend(items, &le, max_len, &mut path, &mut nodes)? {
            return Ok(SequenceWitness { indices: found, verdict: SequenceVerdict::BadSequenceFound });
        }
    }
    Ok(SequenceWitness { indices: Vec::new(), verdict: SequenceVerdict::NoneUpToBound })
}

fn extend<T>(
    items: &[T],
    le: &impl Fn(&T, &T) -> bool,
    max_len: usize,
    path: &mut Vec<usize>,
    nodes: &mut usize,
) -> Result<Option<Vec<usize>>> {
    *nodes += 1;
    if *nodes > SEARCH_NODES {
        return Err(KernelError::Resource("bad-sequence search exceeded its node budget".into()));
    }
    if path.len() < max_len {
        let last = *path.last().expect("nonempty path");
        for j in last + 1..items.len() {
            if path.iter().all(|&i| !le(&items[i], &items[j])) {
                path.push(j);
                let r = extend(items, le, max_len, path, nodes)?;
                path.pop();
                if r.is_some() {
                    return Ok(r);
                }
            }
        }
    }
    Ok(if path.len() >= 2 { Some(path.clone()) } else { None })
}

pub fn find_bad_sequence(p: &FinitePoset, multiset: &[&str], max_len: usize) -> Result<SequenceWitness> {
    let positions = multiset
        .iter()
        .map(|l| p.position(l).ok_or_else(|| KernelError::InvalidInput(format!("{l} is not in the poset"))))
        .collect::<Result<Vec<_>>>()?;
    find_bad_sequence_by(&positions, |a, b| p.le(*a, *b), max_len)
}

/// A partial comparator on monomials; `None` means incomparable.
pub type Comparator<'a> = &'a dyn Fn(&Monomial, &Monomial) -> Option<Ordering>;

/// The asymptotic ordering `≺` of the monomial group.
pub fn asymptotic_order(a: &Monomial, b: &Monomial) -> Option<Ordering> {
    Some(a.cmp(b))
}

fn validate(items: &[Monomial], cmp: Comparator) -> Result<()> {
    for a in items {
        if cmp(a, a) != Some(Ordering::Equal) {
            return Err(KernelError::InvalidInput(format!("comparator is not reflexive at {a}")));
        }
        for b in items {
            if cmp(a, b).map(Ordering::reverse) != cmp(b, a) {
                return Err(KernelError::InvalidInput(format!("comparator is not antisymmetric on {a}, {b}")));
            }
            for c in items {
                if cmp(a, b) == Some(Ordering::Less) && cmp(b, c) == Some(Ordering::Less) && cmp(a, c) != Some(Ordering::Less) {
                    return Err(KernelError::InvalidInput(format!("comparator is not transitive on {a}, {b}, {c}")));
                }
            }
        }
    }
    Ok(())
}

/// `u ≤ v` for the reverse ordering, i.e. `u ≽ v`.
fn reverse_le(cmp: Comparator<'_>) -> impl Fn(&Monomial, &Monomial) -> bool + '_ {
    move |u, v| matches!(cmp(u, v), Some(Ordering::Greater | Ordering::Equal))
}

#[derive(Clone, Debug)]
pub struct ProductReport {
    /// Distinct products in decreasing order.
    pub products: Vec<Monomial>,
    /// For each product, the pairs `(𝔲, 𝔳)` with `𝔲𝔳 = 𝔪`.
    pub fibers: Vec<(Monomial, Vec<(Monomial, Monomial)>)>,
    /// Bad-sequence search over the products in enumeration order, for the
    /// reverse ordering.
    pub witness: SequenceWitness,
    /// No bad sequence reaches the length bound.
    pub ok: bool,
}

impl ProductReport {
    pub fn fiber(&self, m: &Monomial) -> Option<&[(Monomial, Monomial)]> {
        self.fibers.iter().find(|(p, _)| p == m).map(|(_, f)| f.as_slice())
    }
}

pub fn check_product_noetherian(s: &[Monomial], t: &[Monomial], cmp: Comparator, max_len: usize) -> Result<ProductReport> {
    let mut all: Vec<Monomial> = s.to_vec();
    all.extend(t.iter().cloned());
    validate(&all, cmp)?;
    let mut enumerated = Vec::new();
    let mut fibers: BTreeMap<Monomial, Vec<(Monomial, Monomial)>> = BTreeMap::new();
    for u in s {
        for v in t {
            let m = u.mul(v);
            let fiber = fibers.entry(m.clone()).or_default();
            if !fiber.contains(&(u.clone(), v.clone())) {
                fiber.push((u.clone(), v.clone()));
            }
            enumerated.push(m);
        }
    }
    let witness = find_bad_sequence_by(&enumerated, reverse_le(cmp), max_len)?;
    let ok = witness.indices.len() < max_len;
    let fibers: Vec<_> = fibers.into_iter().rev().collect();
    Ok(ProductReport { products: fibers.iter().map(|(m, _)| m.clone()).collect(), fibers, witness, ok })
}

#[derive(Clone, Debug)]
pub struct StarReport {
    /// `𝔖ⁿ` for `n ≤ depth`, each in decreasing order.
    pub levels: Vec<Vec<Monomial>>,
    /// Distinct elements of `𝔖⁰ ∪ … ∪ 𝔖^depth`, level by level.
    pub elements: Vec<Monomial>,
    /// For each element, the pairs `(n, count)` where `count` is the number
    /// of ordered factorizations as a product of `n` elements of `𝔖`.
    pub occurrences: Vec<(Monomial, Vec<(usize, usize)>)>,
    pub witness: SequenceWitness,
    pub ok: bool,
}

impl StarReport {
    pub fn occurrences_of(&self, m: &Monomial) -> Option<&[(usize, usize)]> {
        self.occurrences.iter().find(|(p, _)| p == m).map(|(_, o)| o.as_slice())
    }
}

pub fn check_star_closure(s: &[Monomial], cmp: Comparator, depth: usize, max_len: usize) -> Result<StarReport> {
    let mut all = s.to_vec();
    all.push(Monomial::one());
    validate(&all, cmp)?;
    if let Some(m) = s.iter().find(|m| cmp(m, &Monomial::one()) != Some(Ordering::Less)) {
        return Err(KernelError::Precondition(format!("{m} is not infinitesimal")));
    }
    let mut counts: Vec<BTreeMap<Monomial, usize>> = vec![BTreeMap::from([(Monomial::one(), 1)])];
    for n in 0..depth {
        let mut next = BTreeMap::new();
        for (m, c) in &counts[n] {
            for g in s {
                *next.entry(m.mul(g)).or_insert(0) += c;
            }
        }
        counts.push(next);
    }
    let levels: Vec<Vec<Monomial>> = counts.iter().map(|l| l.keys().rev().cloned().collect()).collect();
    let mut elements: Vec<Monomial> = Vec::new();
    let mut occurrences: Vec<(Monomial, Vec<(usize, usize)>)> = Vec::new();
    for (n, level) in counts.iter().enumerate() {
        for (m, c) in level.iter().rev() {
            match occurrences.iter_mut().find(|(p, _)| p == m) {
                Some((_, occ)) => occ.push((n, *c)),
                None => {
                    elements.push(m.clone());
                    occurrences.push((m.clone(), vec![(n, *c)]));
                }
            }
        }
    }
    let witness = find_bad_sequence_by(&elements, reverse_le(cmp), max_len)?;
    let ok = witness.indices.len() < max_len;
    Ok(StarReport { levels, elements, occurrences, witness, ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn xp(n: i64) -> Monomial {
        Monomial::x_pow(n)
    }

    #[test]
    fn bad_sequences() {
        let anti = FinitePoset::antichain(&["a", "b"]).unwrap();
        let w = find_bad_sequence(&anti, &["a", "b", "a"], 2).unwrap();
        assert_eq!(w.indices, vec![0, 1]);
        assert!(w.found());

        let chain = FinitePoset::chain(&["a", "b", "c"]).unwrap();
        assert!(!find_bad_sequence(&chain, &["a", "b", "b", "c"], 3).unwrap().found());
        assert_eq!(find_bad_sequence(&chain, &["c", "a"], 3).unwrap().indices, vec![0, 1]);

        let single = FinitePoset::antichain(&["a"]).unwrap();
        assert!(!find_bad_sequence(&single, &["a", "a"], 2).unwrap().found());

        assert!(find_bad_sequence(&single, &["z"], 2).is_err());
        assert!(FinitePoset::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).is_err());
        assert!(FinitePoset::new(&["a"], &[("a", "a")]).is_err());
    }

    #[test]
    fn products() {
        let r = check_product_noetherian(&[xp(-1)], &[xp(-1), xp(-2)], &asymptotic_order, 6).unwrap();
        assert_eq!(r.products, vec![xp(-2), xp(-3)]);
        assert!(r.fibers.iter().all(|(_, f)| f.len() == 1));
        assert!(r.ok);

        let s = [xp(-1), xp(-2)];
        let r = check_product_noetherian(&s, &s, &asymptotic_order, 6).unwrap();
        assert_eq!(r.fiber(&xp(-3)).unwrap().len(), 2);

        let one = [Monomial::one()];
        let r = check_product_noetherian(&one, &one, &asymptotic_order, 6).unwrap();
        assert_eq!(r.products, vec![Monomial::one()]);
        assert_eq!(r.fiber(&Monomial::one()).unwrap().len(), 1);
    }

    #[test]
    fn star_closures() {
        let r = check_star_closure(&[xp(-1)], &asymptotic_order, 4, 6).unwrap();
        assert_eq!(r.elements, (0..=4).map(|n| xp(-n)).collect::<Vec<_>>());
        assert!(r.occurrences.iter().all(|(_, o)| o.len() == 1));
        assert!(r.ok);

        let l1 = Monomial::log_iter(1).unwrap();
        let r = check_star_closure(&[xp(-1), xp(-1).mul(&l1)], &asymptotic_order, 3, 6).unwrap();
        assert!(r.ok);
        for a in &r.elements {
            for b in &r.elements {
                assert!(asymptotic_order(a, b).is_some());
            }
        }

        let e = Monomial::exp_of(vec![(BigRational::from_integer((-1).into()), Monomial::x())]).unwrap();
        let r = check_star_closure(&[xp(-1), e.clone()], &asymptotic_order, 3, 6).unwrap();
        assert!(r.ok);
        assert_eq!(r.occurrences_of(&xp(-1).mul(&e)).unwrap(), &[(2, 2)]);

        assert!(matches!(
            check_star_closure(&[xp(1)], &asymptotic_order, 2, 6),
            Err(KernelError::Precondition(_))
        ));
    }
}
