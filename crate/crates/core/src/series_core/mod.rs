//! Well-based series as lazy, strictly decreasing term streams carrying a
//! finite grid certificate.
//!
//! A [`TransSeries`] is cheap to clone and safe to share between threads.
//! Terms are produced on demand and memoized; every pull is charged against
//! a [`Fuel`] budget so that questions such as "is this series zero?" always
//! return, possibly with [`Tail::Stalled`].

mod constant;
mod engine;
mod grid;
mod linear;
mod ops;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, MutexGuard};

pub use constant::{format_float, Constant, FLOAT_ZERO};
pub(crate) use engine::{Family, Member, MemberSpec, SumSource, VecFamily};
pub use grid::{GridCertificate, GridIter, MAX_BASES};
pub use linear::{
    extend_strongly_linear, iterate_contracting, ContractingMap, FnMap, IdentityMap, MonomialMap,
};
pub(crate) use ops::sum_bounded;
pub use ops::{
    geometric_substitute, sum_family, sum_lazy, CoeffSeq, DominanceVerdict, Relation,
};

use crate::error::{KernelError, Result};
use crate::monomials::Monomial;

/// A nonzero coefficient attached to a monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Constant,
    pub mono: Monomial,
}

impl Term {
    pub fn new(coeff: Constant, mono: Monomial) -> Term {
        Term { coeff, mono }
    }
}

static DEFAULT_FUEL: AtomicU64 = AtomicU64::new(500_000);

/// Sets the step budget used by calls that do not take an explicit [`Fuel`].
pub fn set_default_fuel(steps: u64) {
    DEFAULT_FUEL.store(steps, AtomicOrdering::SeqCst);
}

pub fn default_fuel() -> u64 {
    DEFAULT_FUEL.load(AtomicOrdering::SeqCst)
}

/// A shared step counter for lazy enumeration.
#[derive(Debug)]
pub struct Fuel(AtomicU64);

impl Fuel {
    pub fn new(steps: u64) -> Fuel {
        Fuel(AtomicU64::new(steps))
    }

    pub fn standard() -> Fuel {
        Fuel::new(default_fuel())
    }

    pub fn spend(&self, steps: u64) -> Result<()> {
        let mut cur = self.0.load(AtomicOrdering::Relaxed);
        loop {
            if cur < steps {
                return Err(KernelError::OutOfFuel);
            }
            match self.0.compare_exchange_weak(
                cur,
                cur - steps,
                AtomicOrdering::Relaxed,
                AtomicOrdering::Relaxed,
            ) {
                Ok(_) => return Ok(()),
                Err(actual) => cur = actual,
            }
        }
    }

    pub fn remaining(&self) -> u64 {
        self.0.load(AtomicOrdering::Relaxed)
    }
}

/// Producer of terms in strictly decreasing monomial order.
///
/// Implementations must be restartable: if `next_term` fails with
/// [`KernelError::OutOfFuel`], a later call resumes without losing terms.
pub(crate) trait TermSource: Send {
    fn next_term(&mut self, fuel: &Fuel) -> Result<Option<Term>>;

    /// A monomial such that every term not yet produced lies at or below it.
    fn frontier(&self) -> Option<Monomial> {
        None
    }
}

const FRONTIER_CALLS: usize = 4096;

thread_local! {
    static FRONTIER_BUDGET: std::cell::Cell<Option<usize>> = const { std::cell::Cell::new(None) };
}

enum Source {
    Live(Box<dyn TermSource>),
    Done,
    Failed(KernelError),
}

struct State {
    terms: Vec<Term>,
    source: Source,
}

struct SeriesInner {
    state: Mutex<State>,
}

/// A well-based series with a lazy decreasing term stream.
#[derive(Clone)]
pub struct TransSeries {
    cert: Arc<GridCertificate>,
    inner: Arc<SeriesInner>,
}

/// How a prefix ends.
#[derive(Clone, Debug, PartialEq)]
pub enum Tail {
    /// The series has no further terms.
    Exact,
    /// At least one more term exists; this is its monomial.
    More(Monomial),
    /// The budget ran out; every unseen term lies strictly below the monomial.
    Stalled(Option<Monomial>),
}

/// A finite view of the head of a series.
#[derive(Clone, Debug, PartialEq)]
pub struct Prefix {
    pub terms: Vec<Term>,
    pub tail: Tail,
}

impl Prefix {
    pub fn is_exact(&self) -> bool {
        self.tail == Tail::Exact
    }
}

impl TransSeries {
    pub(crate) fn from_source(cert: GridCertificate, source: Box<dyn TermSource>) -> TransSeries {
        TransSeries {
            cert: Arc::new(cert),
            inner: Arc::new(SeriesInner {
                state: Mutex::new(State { terms: Vec::new(), source: Source::Live(source) }),
            }),
        }
    }

    fn from_sorted(terms: Vec<Term>) -> TransSeries {
        let cert = GridCertificate::from_support(terms.iter().map(|t| t.mono.clone()).collect());
        TransSeries {
            cert: Arc::new(cert),
            inner: Arc::new(SeriesInner {
                state: Mutex::new(State { terms, source: Source::Done }),
            }),
        }
    }

    /// Collapses equal monomials, drops zero coefficients and sorts.
    pub fn from_terms(ts: Vec<Term>) -> TransSeries {
        let mut ts = ts;
        ts.sort_by(|a, b| b.mono.cmp(&a.mono));
        let mut out: Vec<Term> = Vec::with_capacity(ts.len());
        for t in ts {
            match out.last_mut() {
                Some(last) if last.mono == t.mono => last.coeff = &last.coeff + &t.coeff,
                _ => out.push(t),
            }
        }
        out.retain(|t| !t.coeff.is_zero());
        TransSeries::from_sorted(out)
    }

    pub fn zero() -> TransSeries {
        TransSeries::from_sorted(Vec::new())
    }

    pub fn one() -> TransSeries {
        TransSeries::constant(Constant::one())
    }

    pub fn constant(c: Constant) -> TransSeries {
        TransSeries::term(c, Monomial::one())
    }

    pub fn monomial(m: Monomial) -> TransSeries {
        TransSeries::term(Constant::one(), m)
    }

    pub fn term(c: Constant, m: Monomial) -> TransSeries {
        TransSeries::from_terms(vec![Term::new(c, m)])
    }

    pub fn x() -> TransSeries {
        TransSeries::monomial(Monomial::x())
    }

    pub fn certificate(&self) -> &GridCertificate {
        &self.cert
    }

    /// The same stream under a different (caller-justified) certificate.
    pub(crate) fn with_certificate(&self, cert: GridCertificate) -> TransSeries {
        TransSeries { cert: Arc::new(cert), inner: self.inner.clone() }
    }

    pub fn ptr_eq(&self, other: &TransSeries) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.inner.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// The `i`-th term, pulling the stream as needed.
    pub fn term_at_with(&self, i: usize, fuel: &Fuel) -> Result<Option<Term>> {
        let mut st = self.lock();
        while st.terms.len() <= i {
            let State { terms, source } = &mut *st;
            let src = match source {
                Source::Live(src) => src,
                Source::Done => return Ok(None),
                Source::Failed(e) => return Err(e.clone()),
            };
            match src.next_term(fuel) {
                Ok(Some(t)) => {
                    if let Some(last) = terms.last() {
                        if t.mono >= last.mono {
                            let e = KernelError::SummabilityViolation {
                                witness: t.mono.to_string(),
                                reason: format!("stream not decreasing after {}", last.mono),
                            };
                            *source = Source::Failed(e.clone());
                            return Err(e);
                        }
                    }
                    terms.push(t);
                }
                Ok(None) => *source = Source::Done,
                Err(KernelError::OutOfFuel) => return Err(KernelError::OutOfFuel),
                Err(e) => {
                    *source = Source::Failed(e.clone());
                    return Err(e);
                }
            }
        }
        Ok(Some(st.terms[i].clone()))
    }

    pub fn term_at(&self, i: usize) -> Result<Option<Term>> {
        self.term_at_with(i, &Fuel::standard())
    }

    pub fn leading_with(&self, fuel: &Fuel) -> Result<Option<Term>> {
        self.term_at_with(0, fuel)
    }

    /// The dominant term, `None` for the zero series.
    pub fn leading(&self) -> Result<Option<Term>> {
        self.term_at(0)
    }

    pub fn dominant_monomial(&self) -> Result<Option<Monomial>> {
        Ok(self.leading()?.map(|t| t.mono))
    }

    pub fn is_zero(&self) -> Result<bool> {
        Ok(self.leading()?.is_none())
    }

    /// Terms already materialized, without pulling.
    pub fn known_terms(&self) -> Vec<Term> {
        self.lock().terms.clone()
    }

    /// A monomial at or above every term not yet materialized.
    ///
    /// Nested sources are consulted within a per-query budget, since shared
    /// subseries make the source graph a DAG with many paths.
    fn stalled_frontier(&self) -> Option<Monomial> {
        let top = FRONTIER_BUDGET.with(|b| b.get().is_none());
        if top {
            FRONTIER_BUDGET.with(|b| b.set(Some(FRONTIER_CALLS)));
        }
        let allowed = FRONTIER_BUDGET.with(|b| match b.get() {
            Some(n) if n > 0 => {
                b.set(Some(n - 1));
                true
            }
            _ => false,
        });
        let st = self.lock();
        let from_source = match &st.source {
            Source::Live(src) if allowed => src.frontier(),
            _ => None,
        };
        drop(st);
        if top {
            FRONTIER_BUDGET.with(|b| b.set(None));
        }
        let st = self.lock();
        match (from_source, st.terms.last()) {
            (Some(f), Some(t)) => Some(if f < t.mono { f } else { t.mono.clone() }),
            (Some(f), None) => Some(f),
            (None, t) => t.map(|t| t.mono.clone()),
        }
    }

    /// Up to `n` terms together with a description of what follows.
    pub fn prefix_with(&self, n: usize, fuel: &Fuel) -> Result<Prefix> {
        let mut terms = Vec::with_capacity(n);
        for i in 0..=n {
            match self.term_at_with(i, fuel) {
                Ok(Some(t)) => {
                    if i == n {
                        return Ok(Prefix { terms, tail: Tail::More(t.mono) });
                    }
                    terms.push(t);
                }
                Ok(None) => return Ok(Prefix { terms, tail: Tail::Exact }),
                Err(KernelError::OutOfFuel) => {
                    let frontier = self.stalled_frontier();
                    return Ok(Prefix { terms, tail: Tail::Stalled(frontier) });
                }
                Err(e) => return Err(e),
            }
        }
        unreachable!()
    }

    pub fn prefix(&self, n: usize) -> Result<Prefix> {
        self.prefix_with(n, &Fuel::standard())
    }

    /// Up to `n` terms; fails with `OutOfFuel` rather than stalling.
    pub fn take(&self, n: usize) -> Result<Vec<Term>> {
        let fuel = Fuel::standard();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            match self.term_at_with(i, &fuel)? {
                Some(t) => out.push(t),
                None => break,
            }
        }
        Ok(out)
    }

    /// Compares the first `n` terms.
    ///
    /// A side whose enumeration stalls (for instance on an infinite run of
    /// cancellations) is compared only above its frontier.
    pub fn agrees_with(&self, other: &TransSeries, n: usize) -> Result<bool> {
        Ok(self.first_difference(other, n)?.is_none())
    }

    /// Index and both terms at the first position where the prefixes differ.
    #[allow(clippy::type_complexity)]
    pub fn first_difference(
        &self,
        other: &TransSeries,
        n: usize,
    ) -> Result<Option<(usize, Option<Term>, Option<Term>)>> {
        let (a, b, floor) = self.compared_prefixes(other, n)?;
        let visible = |p: &Prefix| -> Vec<Term> {
            p.terms
                .iter()
                .filter(|t| match &floor {
                    Floor::Above(f) => t.mono > *f,
                    _ => true,
                })
                .cloned()
                .collect()
        };
        if matches!(floor, Floor::Nothing) {
            return Err(KernelError::OutOfFuel);
        }
        let (xa, xb) = (visible(&a), visible(&b));
        for i in 0..xa.len().max(xb.len()) {
            let (x, y) = (xa.get(i), xb.get(i));
            let same = match (x, y) {
                (Some(s), Some(t)) => s.mono == t.mono && s.coeff == t.coeff,
                _ => false,
            };
            if !same {
                return Ok(Some((i, x.cloned(), y.cloned())));
            }
        }
        Ok(None)
    }

    /// Prefixes of both sides, deepening the budget until a stalled side is
    /// known at least as far down as the other side's prefix.
    fn compared_prefixes(&self, other: &TransSeries, n: usize) -> Result<(Prefix, Prefix, Floor)> {
        let mut budget = COMPARE_FUEL / 50;
        loop {
            let cap = default_fuel().min(budget);
            let a = self.prefix_with(n, &Fuel::new(cap))?;
            let b = other.prefix_with(n, &Fuel::new(cap))?;
            let floor = match (known_floor(&a), known_floor(&b)) {
                (Floor::Nothing, _) | (_, Floor::Nothing) => Floor::Nothing,
                (Floor::All, f) | (f, Floor::All) => f,
                (Floor::Above(x), Floor::Above(y)) => Floor::Above(if x > y { x } else { y }),
            };
            let covered = |p: &Prefix| match (&floor, p.terms.last()) {
                (Floor::Above(f), Some(t)) => t.mono > *f,
                (Floor::Nothing, _) => false,
                _ => true,
            };
            let stalled = matches!(a.tail, Tail::Stalled(_)) || matches!(b.tail, Tail::Stalled(_));
            if !stalled || (covered(&a) && covered(&b)) || cap >= COMPARE_FUEL.min(default_fuel()) {
                return Ok((a, b, floor));
            }
            budget *= 5;
        }
    }

    /// `c1*m1 + c2*m2 + ... + O(mK)` for the first `n` terms.
    pub fn render(&self, n: usize) -> Result<String> {
        Ok(render_prefix(&self.prefix(n)?))
    }
}

/// Step budget for one side of an equality check.
pub const COMPARE_FUEL: u64 = 100_000;

enum Floor {
    /// Every term is known.
    All,
    /// Every term strictly above the monomial is known.
    Above(Monomial),
    Nothing,
}

fn known_floor(p: &Prefix) -> Floor {
    match &p.tail {
        Tail::Exact => Floor::All,
        Tail::More(m) => Floor::Above(m.clone()),
        Tail::Stalled(Some(f)) => Floor::Above(f.clone()),
        Tail::Stalled(None) => Floor::Nothing,
    }
}

fn render_term(t: &Term, first: bool, out: &mut String) {
    let neg = t.coeff.signum() < 0;
    let abs = if neg { -&t.coeff } else { t.coeff.clone() };
    if first {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    if t.mono.is_one() {
        out.push_str(&abs.to_string());
    } else if abs.is_one() && abs.is_exact() {
        out.push_str(&t.mono.to_string());
    } else {
        out.push_str(&format!("{abs}*{}", t.mono));
    }
}

/// Renders a prefix in the truncated text format.
pub fn render_prefix(p: &Prefix) -> String {
    let mut out = String::new();
    for (i, t) in p.terms.iter().enumerate() {
        render_term(t, i == 0, &mut out);
    }
    let tail = match &p.tail {
        Tail::Exact => None,
        Tail::More(m) => Some(m.to_string()),
        Tail::Stalled(Some(m)) => Some(m.to_string()),
        Tail::Stalled(None) => Some("?".to_string()),
    };
    match (out.is_empty(), tail) {
        (true, None) => "0".into(),
        (true, Some(m)) => format!("O({m})"),
        (false, None) => out,
        (false, Some(m)) => format!("{out} + O({m})"),
    }
}

impl fmt::Display for TransSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.render(8) {
            Ok(s) => f.write_str(&s),
            Err(e) => write!(f, "<{e}>"),
        }
    }
}

impl fmt::Debug for TransSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
