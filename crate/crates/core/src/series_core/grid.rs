use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet, VecDeque};

use crate::error::{KernelError, Result};
use crate::monomials::Monomial;

/// Number of bases kept before a certificate is coarsened.
pub const MAX_BASES: usize = 16;

const GENERATOR_NODE_CAP: usize = 4096;

/// A finite description `{ b·z₁^v₁⋯zₙ^vₙ }` of a superset of a support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridCertificate {
    bases: Vec<Monomial>,
    ratios: Vec<Monomial>,
}

fn sorted_unique(mut v: Vec<Monomial>) -> Vec<Monomial> {
    v.sort_by(|a, b| b.cmp(a));
    v.dedup();
    v
}

impl GridCertificate {
    /// Checked constructor: every ratio must be `≺ 1`.
    pub fn new(bases: Vec<Monomial>, ratios: Vec<Monomial>) -> Result<GridCertificate> {
        let one = Monomial::one();
        if let Some(z) = ratios.iter().find(|z| **z >= one) {
            return Err(KernelError::Certificate(format!("ratio {z} is not infinitesimal")));
        }
        Ok(GridCertificate::unchecked(bases, ratios))
    }

    pub(crate) fn unchecked(bases: Vec<Monomial>, ratios: Vec<Monomial>) -> GridCertificate {
        GridCertificate { bases: sorted_unique(bases), ratios: sorted_unique(ratios) }
    }

    pub fn empty() -> GridCertificate {
        GridCertificate { bases: Vec::new(), ratios: Vec::new() }
    }

    /// A finite support, exactly.
    pub fn from_support(monos: Vec<Monomial>) -> GridCertificate {
        GridCertificate::unchecked(monos, Vec::new())
    }

    pub fn bases(&self) -> &[Monomial] {
        &self.bases
    }

    pub fn ratios(&self) -> &[Monomial] {
        &self.ratios
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// Bases followed by ratios.
    pub fn generators(&self) -> Vec<Monomial> {
        self.bases.iter().chain(self.ratios.iter()).cloned().collect()
    }

    pub fn max_base(&self) -> Option<&Monomial> {
        self.bases.first()
    }

    pub fn max_ratio(&self) -> Option<&Monomial> {
        self.ratios.first()
    }

    fn coarsened(self) -> GridCertificate {
        if self.bases.len() <= MAX_BASES {
            return self;
        }
        let top = self.bases[0].clone();
        let mut ratios = self.ratios;
        ratios.extend(self.bases[1..].iter().map(|b| b.div(&top)));
        GridCertificate::unchecked(vec![top], ratios)
    }

    pub fn union(&self, other: &GridCertificate) -> GridCertificate {
        let bases = self.bases.iter().chain(other.bases.iter()).cloned().collect();
        let ratios = self.ratios.iter().chain(other.ratios.iter()).cloned().collect();
        GridCertificate::unchecked(bases, ratios).coarsened()
    }

    pub fn product(&self, other: &GridCertificate) -> GridCertificate {
        let mut bases = Vec::with_capacity(self.bases.len() * other.bases.len());
        for a in &self.bases {
            for b in &other.bases {
                bases.push(a.mul(b));
            }
        }
        let ratios = self.ratios.iter().chain(other.ratios.iter()).cloned().collect();
        GridCertificate::unchecked(bases, ratios).coarsened()
    }

    pub fn scale(&self, m: &Monomial) -> GridCertificate {
        GridCertificate {
            bases: self.bases.iter().map(|b| b.mul(m)).collect(),
            ratios: self.ratios.clone(),
        }
    }

    pub fn with_ratios(&self, extra: &[Monomial]) -> GridCertificate {
        let ratios = self.ratios.iter().chain(extra.iter()).cloned().collect();
        GridCertificate::unchecked(self.bases.clone(), ratios)
    }

    /// Finitely many infinitesimal monomials `G` such that every grid
    /// monomial `≺ 1` is a nonempty product of elements of `G`.
    ///
    /// Walks each base `≽ 1` down the lattice until it first drops below 1.
    /// A ratio is not applied at a node that it can never bring below 1 on
    /// its own, since some other ratio must then be used first anyway.
    pub fn infinitesimal_generators(&self) -> Result<Vec<Monomial>> {
        let one = Monomial::one();
        let mut gens: Vec<Monomial> = self.ratios.clone();
        let mut seen: HashSet<Monomial> = HashSet::new();
        for b in &self.bases {
            if *b < one {
                gens.push(b.clone());
                continue;
            }
            let mut queue = VecDeque::from([b.clone()]);
            seen.insert(b.clone());
            while let Some(m) = queue.pop_front() {
                let m_lead = m.pre_log_leading();
                for z in &self.ratios {
                    if let (Some((_, ml)), Some((_, zl))) = (&m_lead, z.pre_log_leading()) {
                        if m > one && *ml > zl {
                            continue;
                        }
                    }
                    let n = m.mul(z);
                    if !seen.insert(n.clone()) {
                        continue;
                    }
                    if seen.len() > GENERATOR_NODE_CAP {
                        return Err(KernelError::Certificate(format!(
                            "generator search from {b} exceeded {GENERATOR_NODE_CAP} nodes"
                        )));
                    }
                    if n < one {
                        gens.push(n);
                    } else {
                        queue.push_back(n);
                    }
                }
            }
        }
        Ok(sorted_unique(gens))
    }

    /// Enumerates the grid in decreasing order.
    pub fn iter(&self) -> GridIter {
        GridIter::new(self)
    }

    /// Whether `m` occurs among the first grid monomials, within `budget` steps.
    pub fn contains_within(&self, m: &Monomial, budget: usize) -> Option<bool> {
        let mut it = self.iter();
        for _ in 0..budget {
            match it.next() {
                None => return Some(false),
                Some(n) => match n.cmp(m) {
                    Ordering::Greater => continue,
                    Ordering::Equal => return Some(true),
                    Ordering::Less => return Some(false),
                },
            }
        }
        None
    }
}

#[derive(PartialEq, Eq)]
struct Node {
    mono: Monomial,
    base: usize,
    exps: Vec<u32>,
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mono
            .cmp(&other.mono)
            .then_with(|| other.base.cmp(&self.base))
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Decreasing enumeration of a grid; equal monomials from distinct lattice
/// points are reported once.
pub struct GridIter {
    ratios: Vec<Monomial>,
    heap: BinaryHeap<Node>,
    seen: HashSet<(usize, Vec<u32>)>,
    last: Option<Monomial>,
    peeked: Option<Option<Monomial>>,
    steps: usize,
}

impl GridIter {
    fn new(cert: &GridCertificate) -> GridIter {
        let n = cert.ratios.len();
        let mut heap = BinaryHeap::new();
        let mut seen = HashSet::new();
        for (i, b) in cert.bases.iter().enumerate() {
            seen.insert((i, vec![0; n]));
            heap.push(Node { mono: b.clone(), base: i, exps: vec![0; n] });
        }
        GridIter {
            ratios: cert.ratios.clone(),
            heap,
            seen,
            last: None,
            peeked: None,
            steps: 0,
        }
    }

    /// Lattice points popped so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    fn advance(&mut self) -> Option<Monomial> {
        while let Some(node) = self.heap.pop() {
            self.steps += 1;
            for (i, z) in self.ratios.iter().enumerate() {
                let mut exps = node.exps.clone();
                exps[i] += 1;
                if self.seen.insert((node.base, exps.clone())) {
                    self.heap.push(Node { mono: node.mono.mul(z), base: node.base, exps });
                }
            }
            if self.last.as_ref() == Some(&node.mono) {
                continue;
            }
            self.last = Some(node.mono.clone());
            return Some(node.mono);
        }
        None
    }

    pub fn peek(&mut self) -> Option<&Monomial> {
        if self.peeked.is_none() {
            let next = self.advance();
            self.peeked = Some(next);
        }
        self.peeked.as_ref().and_then(|m| m.as_ref())
    }
}

impl Iterator for GridIter {
    type Item = Monomial;

    fn next(&mut self) -> Option<Monomial> {
        match self.peeked.take() {
            Some(m) => m,
            None => self.advance(),
        }
    }
}
