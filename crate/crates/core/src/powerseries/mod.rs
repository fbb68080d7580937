//! Formal power series `Σ P_k X^k` with transseries coefficients.
//!
//! Each power series carries a [`PsSupport`] descriptor bounding the
//! supports of all coefficients at once. Convergence, cut membership and
//! evaluation are decided from that descriptor, with spot checks against the
//! computed coefficients.

mod cut;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num::{BigInt, BigRational, One, ToPrimitive};

use crate::error::{KernelError, Result};
use crate::monomials::Monomial;
use crate::series_core::{
    sum_bounded, sum_family, Constant, Fuel, GridCertificate, TransSeries,
};

pub use cut::{
    cut_compare, cut_eval, cut_member, lift_coefficientwise, CoefficientOp, CutOrder, CutReport,
    CutSpec, CutVerdict,
};

/// Default truncation order for rendering and coefficientwise comparisons.
pub const DEFAULT_ORDER: usize = 12;

/// Consecutive degrees inspected before divergence is reported.
pub const DIVERGENCE_WINDOW: usize = 5;

const LACUNARY_SCAN: usize = 10_000;
const LACUNARY_CHECK: usize = 16;

fn one() -> Monomial {
    Monomial::one()
}

fn sorted_ratios(mut v: Vec<Monomial>) -> Vec<Monomial> {
    let one = one();
    v.retain(|z| *z != one);
    v.sort_by(|a, b| b.cmp(a));
    v.dedup();
    v
}

/// `supp P_k ⊆ base·weight^k·⟨ratios⟩` for every `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub base: Monomial,
    pub weight: Monomial,
    pub ratios: Vec<Monomial>,
}

impl Envelope {
    pub fn new(base: Monomial, weight: Monomial, ratios: Vec<Monomial>) -> Result<Envelope> {
        if let Some(z) = ratios.iter().find(|z| **z >= one()) {
            return Err(KernelError::Certificate(format!("envelope ratio {z} is not infinitesimal")));
        }
        Ok(Envelope { base, weight, ratios: sorted_ratios(ratios) })
    }

    /// Collapses several bases onto the largest one.
    fn from_bases(bases: Vec<Monomial>, weight: Monomial, mut ratios: Vec<Monomial>) -> Envelope {
        let top = bases.iter().max().cloned().unwrap_or_else(one);
        ratios.extend(bases.iter().filter(|b| **b != top).map(|b| b.div(&top)));
        Envelope { base: top, weight, ratios: sorted_ratios(ratios) }
    }

    /// `base·weight^k`.
    pub fn bound(&self, k: usize) -> Monomial {
        self.base.mul(&self.weight.powi(k as i64))
    }

    /// The same set, described with a weight `w ≽ self.weight`.
    fn reweighted(&self, w: &Monomial) -> Envelope {
        let mut ratios = self.ratios.clone();
        ratios.push(self.weight.div(w));
        Envelope { base: self.base.clone(), weight: w.clone(), ratios: sorted_ratios(ratios) }
    }

    fn union(&self, other: &Envelope) -> Envelope {
        let w = self.weight.clone().max(other.weight.clone());
        let (a, b) = (self.reweighted(&w), other.reweighted(&w));
        let ratios = a.ratios.iter().chain(b.ratios.iter()).cloned().collect();
        Envelope::from_bases(vec![a.base, b.base], w, ratios)
    }

    fn product(&self, other: &Envelope) -> Envelope {
        let w = self.weight.clone().max(other.weight.clone());
        let (a, b) = (self.reweighted(&w), other.reweighted(&w));
        let ratios = a.ratios.iter().chain(b.ratios.iter()).cloned().collect();
        Envelope { base: a.base.mul(&b.base), weight: w, ratios: sorted_ratios(ratios) }
    }
}

/// The dominant monomial of every coefficient is exactly `base·weight^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeadingLaw {
    pub base: Monomial,
    pub weight: Monomial,
}

/// Produces an envelope whose weight `w` satisfies `w·𝔟 ≺ 1`, if one exists.
pub type Tighten = Arc<dyn Fn(&Monomial) -> Option<Envelope> + Send + Sync>;

/// Envelope data for an infinite power series.
#[derive(Clone)]
pub struct BiGrid {
    pub envelope: Envelope,
    pub tighten: Option<Tighten>,
    pub leading: Option<LeadingLaw>,
    /// Infinitely many coefficients are known to be nonzero.
    pub infinite: bool,
}

impl BiGrid {
    pub fn new(envelope: Envelope) -> BiGrid {
        BiGrid { envelope, tighten: None, leading: None, infinite: false }
    }

    /// Candidate envelopes: the fixed one, then a tightened one for `b`.
    pub(crate) fn envelopes_for(&self, b: Option<&Monomial>) -> Vec<Envelope> {
        let mut out = vec![self.envelope.clone()];
        if let (Some(t), Some(b)) = (&self.tighten, b) {
            out.extend(t(b));
        }
        out
    }
}

impl fmt::Debug for BiGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BiGrid")
            .field("envelope", &self.envelope)
            .field("tighten", &self.tighten.is_some())
            .field("leading", &self.leading)
            .field("infinite", &self.infinite)
            .finish()
    }
}

/// What is known about the joint support of the coefficients.
#[derive(Clone, Debug)]
pub enum PsSupport {
    /// Coefficients above `degree` vanish.
    Polynomial { degree: usize },
    Grid(BiGrid),
    Unknown { infinite: bool },
}

impl PsSupport {
    pub fn is_infinite(&self) -> bool {
        match self {
            PsSupport::Polynomial { .. } => false,
            PsSupport::Grid(g) => g.infinite || g.leading.is_some(),
            PsSupport::Unknown { infinite } => *infinite,
        }
    }
}

type CoeffFn = dyn Fn(usize) -> Result<TransSeries> + Send + Sync;

struct PsInner {
    coeff: Box<CoeffFn>,
    cache: Mutex<HashMap<usize, TransSeries>>,
    support: PsSupport,
}

/// A formal power series with lazily computed, memoized coefficients.
#[derive(Clone)]
pub struct PowerSeries(Arc<PsInner>);

impl PowerSeries {
    pub fn from_fn(
        f: impl Fn(usize) -> Result<TransSeries> + Send + Sync + 'static,
        support: PsSupport,
    ) -> PowerSeries {
        PowerSeries(Arc::new(PsInner {
            coeff: Box::new(f),
            cache: Mutex::new(HashMap::new()),
            support,
        }))
    }

    pub fn polynomial(coeffs: Vec<TransSeries>) -> PowerSeries {
        let degree = coeffs.len().saturating_sub(1);
        PowerSeries::from_fn(
            move |k| Ok(coeffs.get(k).cloned().unwrap_or_else(TransSeries::zero)),
            PsSupport::Polynomial { degree },
        )
    }

    pub fn constant(s: TransSeries) -> PowerSeries {
        PowerSeries::polynomial(vec![s])
    }

    /// The indeterminate `X`.
    pub fn x() -> PowerSeries {
        PowerSeries::polynomial(vec![TransSeries::zero(), TransSeries::one()])
    }

    /// `Σ c_k w^k X^k`.
    pub fn with_coeffs(coeffs: crate::series_core::CoeffSeq, weight: Monomial) -> PowerSeries {
        let w = weight.clone();
        PowerSeries::from_fn(
            move |k| {
                Ok(match coeffs.get(k) {
                    Some(c) => TransSeries::term(c, w.powi(k as i64)),
                    None => TransSeries::zero(),
                })
            },
            PsSupport::Grid(BiGrid::new(Envelope { base: one(), weight, ratios: Vec::new() })),
        )
    }

    fn with_law(coeffs: crate::series_core::CoeffSeq, weight: Monomial) -> PowerSeries {
        let ps = PowerSeries::with_coeffs(coeffs, weight.clone());
        let mut grid = BiGrid::new(Envelope { base: one(), weight: weight.clone(), ratios: Vec::new() });
        grid.leading = Some(LeadingLaw { base: one(), weight });
        grid.infinite = true;
        PowerSeries::from_fn(move |k| ps.coeff(k), PsSupport::Grid(grid))
    }

    /// `Σ w^k X^k`.
    pub fn geometric(weight: Monomial) -> PowerSeries {
        PowerSeries::with_law(crate::series_core::CoeffSeq::ones(), weight)
    }

    /// `Σ w^k/k! X^k`.
    pub fn exponential(weight: Monomial) -> PowerSeries {
        PowerSeries::with_law(crate::series_core::CoeffSeq::exp(), weight)
    }

    /// `Σ x^{-e(k)} X^k` for an increasing convex `e` with unbounded
    /// increments.
    ///
    /// Such a series converges at every `δ` bounded by a power of `x`.
    pub fn lacunary(e: impl Fn(usize) -> i64 + Send + Sync + 'static) -> Result<PowerSeries> {
        let e: Arc<dyn Fn(usize) -> i64 + Send + Sync> = Arc::new(e);
        for k in 0..LACUNARY_CHECK {
            let (a, b, c) = (e(k), e(k + 1), e(k + 2));
            let convex = match (b.checked_sub(a), c.checked_sub(b)) {
                (Some(d1), Some(d2)) => d1 > 0 && d2 >= d1,
                _ => false,
            };
            if !convex {
                return Err(KernelError::InvalidInput(format!(
                    "exponent sequence is not increasing and convex at {k}"
                )));
            }
        }
        let x_inv = Monomial::x_pow(-1);
        let envelope = Envelope {
            base: Monomial::x_pow(-e(0)),
            weight: one(),
            ratios: vec![x_inv.clone()],
        };
        let et = e.clone();
        let tighten: Tighten = Arc::new(move |b: &Monomial| {
            if !b.exp_arg_terms().is_empty() {
                return None;
            }
            let c = b.log_power(0);
            let s = c.floor().to_integer().to_i64()? + 1;
            let s = s.max(0);
            let mut best = None::<i64>;
            for k in 0..LACUNARY_SCAN {
                let v = s.checked_mul(k as i64)?.checked_sub(et(k))?;
                best = Some(best.map_or(v, |m| m.max(v)));
                if et(k + 1) - et(k) > s {
                    let base = Monomial::x_pow(best?);
                    return Some(Envelope {
                        base,
                        weight: Monomial::x_pow(-s),
                        ratios: vec![Monomial::x_pow(-1)],
                    });
                }
            }
            None
        });
        let ec = e.clone();
        Ok(PowerSeries::from_fn(
            move |k| {
                let n = ec(k).checked_neg().ok_or_else(|| {
                    KernelError::Resource(format!("exponent of coefficient {k} overflows"))
                })?;
                Ok(TransSeries::monomial(Monomial::x_pow(n)))
            },
            PsSupport::Grid(BiGrid { envelope, tighten: Some(tighten), leading: None, infinite: true }),
        ))
    }

    pub fn support(&self) -> &PsSupport {
        &self.0.support
    }

    /// The degree bound, for polynomials.
    pub fn degree(&self) -> Option<usize> {
        match self.0.support {
            PsSupport::Polynomial { degree } => Some(degree),
            _ => None,
        }
    }

    /// The coefficient `P_k`.
    pub fn coeff(&self, k: usize) -> Result<TransSeries> {
        if let Some(d) = self.degree() {
            if k > d {
                return Ok(TransSeries::zero());
            }
        }
        if let Some(s) = self.0.cache.lock().expect("coefficient cache").get(&k) {
            return Ok(s.clone());
        }
        let s = (self.0.coeff)(k)?;
        let mut cache = self.0.cache.lock().expect("coefficient cache");
        Ok(cache.entry(k).or_insert(s).clone())
    }

    /// `P_0 + P_1*X + ... + O(X^order)`, each coefficient shown to `terms` terms.
    pub fn render(&self, order: usize, terms: usize) -> Result<String> {
        let mut parts: Vec<(bool, String)> = Vec::new();
        let top = self.degree().map(|d| d + 1).unwrap_or(order).min(order);
        for k in 0..top {
            let c = self.coeff(k)?;
            let p = c.prefix(terms)?;
            if p.terms.is_empty() && p.is_exact() {
                continue;
            }
            let body = crate::series_core::render_prefix(&p);
            let single = p.terms.len() == 1 && p.is_exact();
            let xk = match k {
                0 => String::new(),
                1 => "X".to_string(),
                _ => format!("X^{k}"),
            };
            let (neg, text) = if k == 0 {
                (false, body)
            } else if single {
                let t = &p.terms[0];
                let neg = t.coeff.signum() < 0;
                let mag = if neg { -&t.coeff } else { t.coeff.clone() };
                let coef = render_scalar(&mag, &t.mono);
                if coef.is_empty() {
                    (neg, xk)
                } else {
                    (neg, format!("{coef}*{xk}"))
                }
            } else {
                (false, format!("({body})*{xk}"))
            };
            parts.push((neg, text));
        }
        let mut out = String::new();
        for (i, (neg, text)) in parts.iter().enumerate() {
            match (i, neg) {
                (0, false) => out.push_str(text),
                (0, true) => {
                    out.push('-');
                    out.push_str(text);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(text);
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(text);
                }
            }
        }
        let exact = self.degree().map(|d| d < order).unwrap_or(false);
        if !exact {
            if !out.is_empty() {
                out.push_str(" + ");
            }
            out.push_str(&format!("O(X^{order})"));
        } else if out.is_empty() {
            out.push('0');
        }
        Ok(out)
    }
}

/// `c*m` without the sign, with unit factors omitted.
fn render_scalar(c: &Constant, m: &Monomial) -> String {
    let unit = c.is_one() && c.is_exact();
    match (unit, m.is_one()) {
        (true, true) => String::new(),
        (true, false) => m.to_string(),
        (false, true) => c.to_string(),
        (false, false) => format!("{c}*{m}"),
    }
}

impl fmt::Debug for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.render(4, 3) {
            Ok(s) => write!(f, "PowerSeries({s})"),
            Err(e) => write!(f, "PowerSeries(<{e}>)"),
        }
    }
}

/// An envelope of a polynomial with the given weight.
fn polynomial_envelope(p: &PowerSeries, degree: usize, weight: &Monomial) -> Result<Envelope> {
    let mut bases = Vec::new();
    let mut ratios = Vec::new();
    for k in 0..=degree {
        let c = p.coeff(k)?;
        let scale = weight.powi(-(k as i64));
        bases.extend(c.certificate().bases().iter().map(|b| b.mul(&scale)));
        ratios.extend(c.certificate().ratios().iter().cloned());
    }
    Ok(Envelope::from_bases(bases, weight.clone(), ratios))
}

/// The envelope data of `p`, if any; polynomials get weight `w`.
fn grid_of(p: &PowerSeries, w: &Monomial) -> Result<Option<BiGrid>> {
    Ok(match p.support() {
        PsSupport::Polynomial { degree } => {
            let env = polynomial_envelope(p, *degree, w)?;
            let (pc, d) = (p.clone(), *degree);
            let tighten: Tighten = Arc::new(move |b: &Monomial| {
                polynomial_envelope(&pc, d, &b.inv().mul(&Monomial::x_pow(-1))).ok()
            });
            let mut g = BiGrid::new(env);
            g.tighten = Some(tighten);
            Some(g)
        }
        PsSupport::Grid(g) => Some(g.clone()),
        PsSupport::Unknown { .. } => None,
    })
}

/// For a polynomial, the least `w` with `𝔡(P_k) ≼ w^k` for all `k ≥ 1`.
fn natural_weight(p: &PowerSeries) -> Result<Monomial> {
    let Some(degree) = p.degree() else {
        return Ok(weight_hint(p));
    };
    let mut best: Option<Monomial> = None;
    for k in 1..=degree {
        if let Some(d) = p.coeff(k)?.dominant_monomial()? {
            let root = d.pow(&BigRational::new(BigInt::one(), BigInt::from(k)));
            best = Some(best.map_or(root.clone(), |b| b.max(root)));
        }
    }
    Ok(best.unwrap_or_else(one))
}

fn weight_hint(p: &PowerSeries) -> Monomial {
    match p.support() {
        PsSupport::Grid(g) => g.envelope.weight.clone(),
        _ => one(),
    }
}

fn combine_tighten(
    a: Option<Tighten>,
    b: Option<Tighten>,
    f: fn(&Envelope, &Envelope) -> Envelope,
) -> Option<Tighten> {
    let (a, b) = (a?, b?);
    Some(Arc::new(move |m: &Monomial| Some(f(&a(m)?, &b(m)?))))
}

pub fn ps_add(p: &PowerSeries, q: &PowerSeries) -> Result<PowerSeries> {
    let support = match (p.support(), q.support()) {
        (PsSupport::Polynomial { degree: a }, PsSupport::Polynomial { degree: b }) => {
            PsSupport::Polynomial { degree: *a.max(b) }
        }
        (PsSupport::Unknown { .. }, _) | (_, PsSupport::Unknown { .. }) => {
            PsSupport::Unknown { infinite: false }
        }
        _ => {
            let w = weight_hint(p).max(weight_hint(q));
            let gp = grid_of(p, &w)?.expect("grid");
            let gq = grid_of(q, &w)?.expect("grid");
            let dominates = |law: &Option<LeadingLaw>, env: &Envelope| match law {
                Some(l) => l.base > env.base && l.weight >= env.weight,
                None => false,
            };
            let leading = if dominates(&gp.leading, &gq.envelope) {
                gp.leading.clone()
            } else if dominates(&gq.leading, &gp.envelope) {
                gq.leading.clone()
            } else {
                None
            };
            PsSupport::Grid(BiGrid {
                envelope: gp.envelope.union(&gq.envelope),
                tighten: combine_tighten(gp.tighten.clone(), gq.tighten.clone(), Envelope::union),
                infinite: leading.is_some(),
                leading,
            })
        }
    };
    let (a, b) = (p.clone(), q.clone());
    Ok(PowerSeries::from_fn(move |k| Ok(a.coeff(k)?.add(&b.coeff(k)?)), support))
}

pub fn ps_scale(p: &PowerSeries, c: &Constant) -> PowerSeries {
    let support = if c.is_zero() { PsSupport::Polynomial { degree: 0 } } else { p.support().clone() };
    let (a, c) = (p.clone(), c.clone());
    PowerSeries::from_fn(move |k| Ok(a.coeff(k)?.scale_const(&c)), support)
}

pub fn ps_sub(p: &PowerSeries, q: &PowerSeries) -> Result<PowerSeries> {
    ps_add(p, &ps_scale(q, &Constant::from_int(-1)))
}

pub fn ps_mul(p: &PowerSeries, q: &PowerSeries) -> Result<PowerSeries> {
    let support = match (p.support(), q.support()) {
        (PsSupport::Polynomial { degree: a }, PsSupport::Polynomial { degree: b }) => {
            PsSupport::Polynomial { degree: a + b }
        }
        (PsSupport::Unknown { .. }, _) | (_, PsSupport::Unknown { .. }) => {
            PsSupport::Unknown { infinite: false }
        }
        _ => {
            let w = weight_hint(p).max(weight_hint(q));
            let gp = grid_of(p, &w)?.expect("grid");
            let gq = grid_of(q, &w)?.expect("grid");
            PsSupport::Grid(BiGrid {
                envelope: gp.envelope.product(&gq.envelope),
                tighten: combine_tighten(gp.tighten.clone(), gq.tighten.clone(), Envelope::product),
                leading: None,
                infinite: false,
            })
        }
    };
    let (a, b) = (p.clone(), q.clone());
    Ok(PowerSeries::from_fn(
        move |k| {
            let parts = (0..=k)
                .map(|i| Ok(a.coeff(i)?.mul(&b.coeff(k - i)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(sum_family(parts))
        },
        support,
    ))
}

/// `P′ = Σ (k+1) P_{k+1} X^k`.
pub fn ps_derive(p: &PowerSeries) -> PowerSeries {
    let support = match p.support() {
        PsSupport::Polynomial { degree } => PsSupport::Polynomial { degree: degree.saturating_sub(1) },
        PsSupport::Unknown { infinite } => PsSupport::Unknown { infinite: *infinite },
        PsSupport::Grid(g) => {
            let shift = |e: &Envelope| Envelope {
                base: e.base.mul(&e.weight),
                weight: e.weight.clone(),
                ratios: e.ratios.clone(),
            };
            let tighten = g.tighten.clone().map(|t| -> Tighten {
                Arc::new(move |b: &Monomial| t(b).map(|e| shift(&e)))
            });
            PsSupport::Grid(BiGrid {
                envelope: shift(&g.envelope),
                tighten,
                leading: g.leading.as_ref().map(|l| LeadingLaw {
                    base: l.base.mul(&l.weight),
                    weight: l.weight.clone(),
                }),
                infinite: g.infinite,
            })
        }
    };
    let a = p.clone();
    PowerSeries::from_fn(
        move |k| Ok(a.coeff(k + 1)?.scale_const(&Constant::from_int(k as i64 + 1))),
        support,
    )
}

/// `P ∘ Q` for `Q_0 = 0`.
pub fn ps_compose(p: &PowerSeries, q: &PowerSeries) -> Result<PowerSeries> {
    if !q.coeff(0)?.is_zero()? {
        return Err(KernelError::Precondition(
            "the inner power series must have a zero constant coefficient".into(),
        ));
    }
    let support = match (p.support(), q.support()) {
        (PsSupport::Polynomial { degree: a }, PsSupport::Polynomial { degree: b }) => {
            PsSupport::Polynomial { degree: a * b }
        }
        (PsSupport::Unknown { .. }, _) | (_, PsSupport::Unknown { .. }) => {
            PsSupport::Unknown { infinite: false }
        }
        _ => {
            let ep = grid_of(p, &one())?.expect("grid").envelope;
            let eq = grid_of(q, &natural_weight(q)?)?.expect("grid").envelope;
            let wa = ep.weight.mul(&eq.base);
            let mut ratios: Vec<Monomial> = ep.ratios.iter().chain(eq.ratios.iter()).cloned().collect();
            // (P∘Q)_k ⊆ ⋃_{n ≤ k} base_P·wa^n·weight_Q^k, and n ≥ k/deg Q for
            // a polynomial Q.
            let weight = if wa <= one() {
                match q.degree() {
                    Some(d) if d > 0 && wa < one() => {
                        let root = wa.pow(&BigRational::new(BigInt::one(), BigInt::from(d)));
                        ratios.push(root.clone());
                        eq.weight.mul(&root)
                    }
                    _ => {
                        ratios.push(wa);
                        eq.weight.clone()
                    }
                }
            } else {
                ratios.push(wa.inv());
                wa.mul(&eq.weight)
            };
            PsSupport::Grid(BiGrid::new(Envelope { base: ep.base, weight, ratios: sorted_ratios(ratios) }))
        }
    };
    let powers: Arc<Mutex<HashMap<(usize, usize), TransSeries>>> = Arc::new(Mutex::new(HashMap::new()));
    let (a, b) = (p.clone(), q.clone());
    Ok(PowerSeries::from_fn(
        move |k| {
            let mut parts = Vec::new();
            for n in 0..=k {
                let pn = a.coeff(n)?;
                if pn.as_finite().map(|t| t.is_empty()).unwrap_or(false) {
                    continue;
                }
                parts.push(pn.mul(&power_coeff(&b, &powers, n, k)?));
            }
            Ok(sum_family(parts))
        },
        support,
    ))
}

/// `(Q^n)_k`, memoized.
fn power_coeff(
    q: &PowerSeries,
    memo: &Mutex<HashMap<(usize, usize), TransSeries>>,
    n: usize,
    k: usize,
) -> Result<TransSeries> {
    if n == 0 {
        return Ok(if k == 0 { TransSeries::one() } else { TransSeries::zero() });
    }
    if k < n {
        return Ok(TransSeries::zero());
    }
    if let Some(s) = memo.lock().expect("power memo").get(&(n, k)) {
        return Ok(s.clone());
    }
    let mut parts = Vec::new();
    for m in 1..=k + 1 - n {
        parts.push(q.coeff(m)?.mul(&power_coeff(q, memo, n - 1, k - m)?));
    }
    let s = sum_family(parts);
    memo.lock().expect("power memo").insert((n, k), s.clone());
    Ok(s)
}

/// Convergence verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvVerdict {
    CertifiedConvergent,
    CertifiedDivergent,
    Inconclusive,
}

impl fmt::Display for ConvVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvVerdict::CertifiedConvergent => "certified_convergent",
            ConvVerdict::CertifiedDivergent => "certified_divergent",
            ConvVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ConvReport {
    pub verdict: ConvVerdict,
    /// Certifying or offending monomials.
    pub witnesses: Vec<Monomial>,
    pub checked_prefix: usize,
    pub detail: String,
    /// The envelope that certified convergence.
    pub envelope: Option<Envelope>,
}

impl ConvReport {
    pub fn new(verdict: ConvVerdict, detail: impl Into<String>) -> ConvReport {
        ConvReport { verdict, witnesses: Vec::new(), checked_prefix: 0, detail: detail.into(), envelope: None }
    }

    pub fn is_convergent(&self) -> bool {
        self.verdict == ConvVerdict::CertifiedConvergent
    }

    pub(crate) fn refusal(&self) -> KernelError {
        KernelError::EvaluationRefused { verdict: self.verdict.to_string(), detail: self.detail.clone() }
    }
}

impl fmt::Display for ConvReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.verdict, self.detail)?;
        if !self.witnesses.is_empty() {
            let ws: Vec<String> = self.witnesses.iter().map(|m| m.to_string()).collect();
            write!(f, " witnesses: {}", ws.join(", "))?;
        }
        Ok(())
    }
}

/// Whether `Σ P_k δ^k` is summable.
///
/// Decided as membership of `P` in the cut algebra of `{𝔪 : 𝔪 ≻ δ}`.
pub fn conv_contains(p: &PowerSeries, delta: &TransSeries) -> Result<ConvReport> {
    let Some(d) = delta.dominant_monomial()? else {
        let mut r = ConvReport::new(ConvVerdict::CertifiedConvergent, "evaluation at zero");
        r.envelope = Some(Envelope { base: one(), weight: one(), ratios: Vec::new() });
        return Ok(r);
    };
    let cut = cut_member(p, &CutSpec::Above(d.clone()), DIVERGENCE_WINDOW)?;
    let verdict = match cut.verdict {
        CutVerdict::Member => ConvVerdict::CertifiedConvergent,
        CutVerdict::NonMember => ConvVerdict::CertifiedDivergent,
        CutVerdict::Inconclusive => ConvVerdict::Inconclusive,
    };
    let mut report = ConvReport::new(verdict, cut.detail.clone());
    report.checked_prefix = cut.checked_prefix;
    report.envelope = cut.envelope.clone();
    if verdict == ConvVerdict::CertifiedDivergent {
        for (m, k) in &cut.witnesses {
            let term = m.mul(&d.powi(*k as i64));
            if report.witnesses.last() != Some(&term) {
                report.witnesses.push(term);
            }
        }
    } else if let Some(env) = &report.envelope {
        report.witnesses.push(env.weight.mul(&d));
    }
    Ok(report)
}

/// `Σ P_k δ^k`, given an envelope with `weight·𝔡_δ ≺ 1`.
fn eval_with(p: &PowerSeries, delta: &TransSeries, env: &Envelope) -> Result<TransSeries> {
    if let Some(deg) = p.degree() {
        let mut parts = Vec::new();
        let mut power = TransSeries::one();
        for k in 0..=deg {
            parts.push(p.coeff(k)?.mul(&power));
            power = power.mul(delta);
        }
        return Ok(sum_family(parts));
    }
    let Some(d) = delta.dominant_monomial()? else {
        return p.coeff(0);
    };
    let (_, _, eps) = delta.dominant_decompose()?;
    let z = env.weight.mul(&d);
    if z >= one() {
        return Err(KernelError::Precondition(format!(
            "envelope weight {} does not shrink at {d}",
            env.weight
        )));
    }
    let mut ratios = env.ratios.clone();
    ratios.extend(eps.certificate().infinitesimal_generators()?);
    ratios.push(z.clone());
    let cert = GridCertificate::unchecked(vec![env.base.clone()], sorted_ratios(ratios));
    let (pc, dc, base) = (p.clone(), delta.clone(), env.base.clone());
    let mut power = TransSeries::one();
    Ok(sum_bounded(
        move |k, _fuel: &Fuel| {
            let member = pc.coeff(k)?.mul(&power);
            power = power.mul(&dc);
            Ok(Some((member, Some(base.mul(&z.powi(k as i64))))))
        },
        cert,
    ))
}

/// `P̃(δ) = Σ P_k δ^k`, refused unless convergence is certified.
pub fn ps_eval(p: &PowerSeries, delta: &TransSeries) -> Result<TransSeries> {
    let report = conv_contains(p, delta)?;
    if !report.is_convergent() {
        return Err(report.refusal());
    }
    match &report.envelope {
        Some(env) => eval_with(p, delta, env),
        None => eval_with(p, delta, &Envelope { base: one(), weight: one(), ratios: Vec::new() }),
    }
}

fn binom(n: usize, k: usize) -> Constant {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Constant::Exact(BigRational::from_integer(acc))
}

/// `P₊ε = Σ_k (Σ_i binom(k+i, k) P_{k+i} ε^i) X^k`.
pub fn ps_translate(p: &PowerSeries, eps: &TransSeries) -> Result<PowerSeries> {
    if let Some(deg) = p.degree() {
        let mut coeffs = Vec::with_capacity(deg + 1);
        for k in 0..=deg {
            let mut parts = Vec::new();
            let mut power = TransSeries::one();
            for i in 0..=deg - k {
                parts.push(p.coeff(k + i)?.mul(&power).scale_const(&binom(k + i, k)));
                power = power.mul(eps);
            }
            coeffs.push(sum_family(parts));
        }
        return Ok(PowerSeries::polynomial(coeffs));
    }
    let report = conv_contains(p, eps)?;
    if !report.is_convergent() {
        return Err(KernelError::Precondition(format!("translation needs convergence: {report}")));
    }
    let env = report.envelope.clone().expect("convergent reports carry an envelope");
    let Some(d) = eps.dominant_monomial()? else {
        return Ok(p.clone());
    };
    let (_, _, tail) = eps.dominant_decompose()?;
    let z = env.weight.mul(&d);
    let mut ratios = env.ratios.clone();
    ratios.extend(tail.certificate().infinitesimal_generators()?);
    ratios.push(z.clone());
    let ratios = sorted_ratios(ratios);
    let envelope = Envelope { base: env.base.clone(), weight: env.weight.clone(), ratios: ratios.clone() };
    let tighten: Option<Tighten> = match p.support() {
        PsSupport::Grid(g) => g.tighten.clone().map(|t| -> Tighten {
            let (d, gens) = (d.clone(), ratios.clone());
            Arc::new(move |b: &Monomial| {
                let top = if *b > d { b.clone() } else { d.clone() };
                let e = t(&top)?;
                let mut rs = e.ratios.clone();
                rs.extend(gens.iter().cloned());
                rs.push(e.weight.mul(&d));
                Some(Envelope { base: e.base, weight: e.weight, ratios: sorted_ratios(rs) })
            })
        }),
        _ => None,
    };
    let infinite = p.support().is_infinite();
    let support = PsSupport::Grid(BiGrid { envelope, tighten, leading: None, infinite });
    let powers: Arc<Mutex<Vec<TransSeries>>> = Arc::new(Mutex::new(vec![TransSeries::one()]));
    let (pc, ec) = (p.clone(), eps.clone());
    Ok(PowerSeries::from_fn(
        move |k| {
            let base = env.base.mul(&env.weight.powi(k as i64));
            let cert = GridCertificate::unchecked(vec![base.clone()], ratios.clone());
            let (pc, ec, powers, z) = (pc.clone(), ec.clone(), powers.clone(), z.clone());
            Ok(sum_bounded(
                move |i, _fuel: &Fuel| {
                    let power = {
                        let mut pw = powers.lock().expect("power cache");
                        while pw.len() <= i {
                            let next = pw.last().expect("nonempty").mul(&ec);
                            pw.push(next);
                        }
                        pw[i].clone()
                    };
                    let member = pc.coeff(k + i)?.mul(&power).scale_const(&binom(k + i, k));
                    Ok(Some((member, Some(base.mul(&z.powi(i as i64))))))
                },
                cert,
            ))
        },
        support,
    ))
}

/// Compares two power series coefficientwise up to `order`, each
/// coefficient to `terms` terms.
pub fn ps_agree(p: &PowerSeries, q: &PowerSeries, order: usize, terms: usize) -> Result<bool> {
    for k in 0..order {
        if !p.coeff(k)?.agrees_with(&q.coeff(k)?, terms)? {
            return Ok(false);
        }
    }
    Ok(true)
}


#[cfg(test)]
mod tests;
