//! Merging summation of a (possibly infinite) family of series.
//!
//! Members arrive in order with an optional tail bound: a monomial that
//! dominates the head of the member and of every later member. A member is
//! activated once its bound reaches the current maximum of the merge heap, so
//! the output is final as soon as it is emitted.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Constant, Fuel, Term, TermSource, TransSeries};
use crate::error::{KernelError, Result};
use crate::monomials::Monomial;

/// A summand: a series, or a series scaled by a term.
#[derive(Clone)]
pub(crate) enum Member {
    Series(TransSeries),
    Scaled { coeff: Constant, mono: Monomial, base: TransSeries },
}

impl Member {
    fn term(&self, i: usize, fuel: &Fuel) -> Result<Option<Term>> {
        match self {
            Member::Series(s) => s.term_at_with(i, fuel),
            Member::Scaled { coeff, mono, base } => Ok(base
                .term_at_with(i, fuel)?
                .map(|t| Term::new(coeff * &t.coeff, mono.mul(&t.mono)))),
        }
    }

    fn frontier(&self) -> Option<Monomial> {
        match self {
            Member::Series(s) => s.stalled_frontier(),
            Member::Scaled { mono, base, .. } => base.stalled_frontier().map(|f| mono.mul(&f)),
        }
    }
}

pub(crate) struct MemberSpec {
    pub member: Member,
    pub bound: Option<Monomial>,
}

impl MemberSpec {
    pub fn unbounded(member: Member) -> MemberSpec {
        MemberSpec { member, bound: None }
    }
}

/// An ordered family of summands.
///
/// `next_member` must only advance its state when it succeeds.
pub(crate) trait Family: Send {
    fn next_member(&mut self, fuel: &Fuel) -> Result<Option<MemberSpec>>;
}

/// A finite family without bounds.
pub(crate) struct VecFamily {
    members: std::vec::IntoIter<Member>,
}

impl VecFamily {
    pub fn new(members: Vec<Member>) -> VecFamily {
        VecFamily { members: members.into_iter() }
    }
}

impl Family for VecFamily {
    fn next_member(&mut self, _fuel: &Fuel) -> Result<Option<MemberSpec>> {
        Ok(self.members.next().map(MemberSpec::unbounded))
    }
}

#[derive(PartialEq, Eq)]
struct Head {
    mono: Monomial,
    idx: usize,
}

impl Ord for Head {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mono.cmp(&other.mono).then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Head {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Active {
    member: Member,
    pos: usize,
    head: Option<Term>,
}

pub(crate) struct SumSource {
    family: Box<dyn Family>,
    family_done: bool,
    pending: Option<MemberSpec>,
    active: Vec<Active>,
    heap: BinaryHeap<Head>,
    last_bound: Option<Monomial>,
    frontier: Option<Monomial>,
    refill: Vec<usize>,
}

fn violation(witness: &Monomial, reason: String) -> KernelError {
    KernelError::SummabilityViolation { witness: witness.to_string(), reason }
}

impl SumSource {
    pub fn new(family: Box<dyn Family>) -> SumSource {
        SumSource {
            family,
            family_done: false,
            pending: None,
            active: Vec::new(),
            heap: BinaryHeap::new(),
            last_bound: None,
            frontier: None,
            refill: Vec::new(),
        }
    }

    fn activate(&mut self, fuel: &Fuel) -> Result<()> {
        let spec = self.pending.as_ref().expect("pending member");
        let head = spec.member.term(0, fuel)?;
        if let Some(h) = &head {
            if let Some(b) = spec.bound.as_ref().or(self.last_bound.as_ref()) {
                if h.mono > *b {
                    return Err(violation(&h.mono, format!("summand head above its bound {b}")));
                }
            }
            if let Some(f) = &self.frontier {
                if h.mono >= *f {
                    return Err(violation(
                        &h.mono,
                        format!("summand reaches above already emitted monomial {f}"),
                    ));
                }
            }
        }
        let spec = self.pending.take().expect("pending member");
        if spec.bound.is_some() {
            self.last_bound = spec.bound;
        }
        let idx = self.active.len();
        if let Some(h) = &head {
            self.heap.push(Head { mono: h.mono.clone(), idx });
        }
        self.active.push(Active { member: spec.member, pos: 0, head });
        Ok(())
    }
}

impl TermSource for SumSource {
    fn next_term(&mut self, fuel: &Fuel) -> Result<Option<Term>> {
        loop {
            fuel.spend(1)?;
            while let Some(&idx) = self.refill.last() {
                let a = &mut self.active[idx];
                let next = a.member.term(a.pos, fuel)?;
                if let Some(t) = &next {
                    self.heap.push(Head { mono: t.mono.clone(), idx });
                }
                a.head = next;
                self.refill.pop();
            }
            if self.pending.is_none() && !self.family_done {
                match self.family.next_member(fuel)? {
                    Some(spec) => {
                        if let (Some(prev), Some(b)) = (&self.last_bound, &spec.bound) {
                            if b > prev {
                                return Err(violation(
                                    b,
                                    format!("tail bound increased past {prev}"),
                                ));
                            }
                        }
                        self.pending = Some(spec);
                    }
                    None => self.family_done = true,
                }
            }
            if let Some(spec) = &self.pending {
                let ready = match (&spec.bound, self.heap.peek()) {
                    (None, _) | (_, None) => true,
                    (Some(b), Some(top)) => *b >= top.mono,
                };
                if ready {
                    self.activate(fuel)?;
                    continue;
                }
            } else if self.heap.is_empty() {
                if self.family_done {
                    return Ok(None);
                }
                continue;
            }

            let top = self.heap.peek().expect("nonempty heap").mono.clone();
            let mut group = Vec::new();
            while self.heap.peek().map(|h| h.mono == top).unwrap_or(false) {
                group.push(self.heap.pop().expect("peeked").idx);
            }
            if group.len() > 1 {
                if let Err(e) = fuel.spend(group.len() as u64 - 1) {
                    for &idx in &group {
                        self.heap.push(Head { mono: top.clone(), idx });
                    }
                    return Err(e);
                }
            }
            let mut sum = Constant::zero();
            for &idx in &group {
                let a = &mut self.active[idx];
                let head = a.head.take().expect("active head");
                sum = &sum + &head.coeff;
                a.pos += 1;
            }
            self.refill.extend(group);
            self.frontier = Some(top.clone());
            if !sum.is_zero() {
                return Ok(Some(Term::new(sum, top)));
            }
        }
    }

    fn frontier(&self) -> Option<Monomial> {
        let mut bound: Option<Monomial> = None;
        let mut raise = |m: Option<Monomial>| -> bool {
            match m {
                Some(m) => {
                    if bound.as_ref().map(|b| m > *b).unwrap_or(true) {
                        bound = Some(m);
                    }
                    true
                }
                None => false,
            }
        };
        let mut known = self.refill.iter().all(|&idx| raise(self.active[idx].member.frontier()));
        raise(self.heap.peek().map(|h| h.mono.clone()));
        known &= match &self.pending {
            Some(spec) => raise(spec.bound.clone()),
            None => self.family_done || raise(self.last_bound.clone()),
        };
        match (known, bound, &self.frontier) {
            (true, Some(b), Some(f)) => Some(if b < *f { b } else { f.clone() }),
            (true, Some(b), None) => Some(b),
            _ => self.frontier.clone(),
        }
    }
}

/// Re-checks a stream against a grid by co-enumeration, within a budget.
pub(crate) struct Verified {
    inner: Box<dyn TermSource>,
    grid: super::GridIter,
    budget: usize,
}

impl Verified {
    pub fn new(inner: Box<dyn TermSource>, grid: super::GridIter, budget: usize) -> Verified {
        Verified { inner, grid, budget }
    }
}

impl TermSource for Verified {
    fn next_term(&mut self, fuel: &Fuel) -> Result<Option<Term>> {
        let t = self.inner.next_term(fuel)?;
        if let Some(t) = &t {
            if self.grid.steps() < self.budget {
                loop {
                    match self.grid.peek() {
                        Some(g) if *g > t.mono => {
                            self.grid.next();
                            if self.grid.steps() >= self.budget {
                                break;
                            }
                        }
                        Some(g) if *g == t.mono => {
                            self.grid.next();
                            break;
                        }
                        _ => {
                            return Err(violation(&t.mono, "monomial outside the certified grid".into()))
                        }
                    }
                }
            }
        }
        Ok(t)
    }

    fn frontier(&self) -> Option<Monomial> {
        self.inner.frontier()
    }
}
