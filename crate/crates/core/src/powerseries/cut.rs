//! Cut algebras `𝕊⟦X⟧_𝔖` indexed by final segments of the monomial group.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num::BigRational;

use super::{eval_with, one, sorted_ratios, BiGrid, Envelope, LeadingLaw, PowerSeries, PsSupport, Tighten};
use crate::calculus::{derive, OperatorHandle};
use crate::error::{KernelError, Result};
use crate::monomials::Monomial;
use crate::series_core::TransSeries;

/// A final segment `𝔖` of the monomials.
#[derive(Clone, Debug)]
pub enum CutSpec {
    All,
    Empty,
    /// `{𝔪 : 𝔪 ≻ b}`.
    Above(Monomial),
    /// `{𝔪 : 𝔪 ≽ b}`.
    AboveEq(Monomial),
    /// `△*(𝔗) = {𝔪 : 𝔡_{△(𝔪)} ∈ 𝔗}`.
    Pullback { op: OperatorHandle, target: Box<CutSpec> },
}

impl CutSpec {
    pub fn pullback(op: OperatorHandle, target: CutSpec) -> CutSpec {
        CutSpec::Pullback { op, target: Box::new(target) }
    }

    pub fn contains(&self, m: &Monomial) -> Result<bool> {
        Ok(match self {
            CutSpec::All => true,
            CutSpec::Empty => false,
            CutSpec::Above(b) => m > b,
            CutSpec::AboveEq(b) => m >= b,
            CutSpec::Pullback { op, target } => match op.apply_monomial(m)?.dominant_monomial()? {
                Some(d) => target.contains(&d)?,
                None => false,
            },
        })
    }

    /// The boundary monomial of a boundary-presented cut.
    pub fn boundary(&self) -> Option<&Monomial> {
        match self {
            CutSpec::Above(b) | CutSpec::AboveEq(b) => Some(b),
            _ => None,
        }
    }

    /// `δ ≺ 𝔖`: the dominant monomial of `δ` lies below the segment.
    pub fn is_below(&self, delta: &TransSeries) -> Result<bool> {
        match delta.dominant_monomial()? {
            None => Ok(true),
            Some(d) => Ok(!self.contains(&d)?),
        }
    }

    fn same_as(&self, other: &CutSpec) -> bool {
        match (self, other) {
            (CutSpec::All, CutSpec::All) | (CutSpec::Empty, CutSpec::Empty) => true,
            (CutSpec::Above(a), CutSpec::Above(b)) | (CutSpec::AboveEq(a), CutSpec::AboveEq(b)) => a == b,
            (CutSpec::Pullback { op: o1, target: t1 }, CutSpec::Pullback { op: o2, target: t2 }) => {
                same_op(o1, o2) && t1.same_as(t2)
            }
            _ => false,
        }
    }

    /// `𝔪X^j ≺_𝔖 1`.
    fn in_cone(&self, m: &Monomial, j: i64) -> Result<bool> {
        match j.cmp(&0) {
            Ordering::Less => Ok(false),
            Ordering::Equal => Ok(*m < one()),
            Ordering::Greater => self.contains(&m.pow(&BigRational::new((-1).into(), j.into()))),
        }
    }
}

fn same_op(a: &OperatorHandle, b: &OperatorHandle) -> bool {
    match (a, b) {
        (OperatorHandle::Identity, OperatorHandle::Identity) => true,
        (OperatorHandle::RightCompose(g), OperatorHandle::RightCompose(h)) => g.g().ptr_eq(h.g()),
        _ => false,
    }
}

impl fmt::Display for CutSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutSpec::All => write!(f, "all"),
            CutSpec::Empty => write!(f, "empty"),
            CutSpec::Above(b) => write!(f, "above({b})"),
            CutSpec::AboveEq(b) => write!(f, "above_eq({b})"),
            CutSpec::Pullback { op, target } => write!(f, "pullback({op}, {target})"),
        }
    }
}

/// Outcome of comparing `𝔪X^k` with `𝔫X^{k′}` under `≺_𝔖`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutOrder {
    Less,
    Greater,
    Equal,
    Incomparable,
}

impl fmt::Display for CutOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutOrder::Less => "≺",
            CutOrder::Greater => "≻",
            CutOrder::Equal => "=",
            CutOrder::Incomparable => "incomparable",
        })
    }
}

pub fn cut_compare(a: (&Monomial, usize), b: (&Monomial, usize), s: &CutSpec) -> Result<CutOrder> {
    let (ma, ka) = a;
    let (mb, kb) = b;
    if ma == mb && ka == kb {
        return Ok(CutOrder::Equal);
    }
    let j = ka as i64 - kb as i64;
    if s.in_cone(&ma.div(mb), j)? {
        Ok(CutOrder::Less)
    } else if s.in_cone(&mb.div(ma), -j)? {
        Ok(CutOrder::Greater)
    } else {
        Ok(CutOrder::Incomparable)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutVerdict {
    Member,
    NonMember,
    Inconclusive,
}

impl fmt::Display for CutVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutVerdict::Member => "member",
            CutVerdict::NonMember => "non-member",
            CutVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CutReport {
    pub verdict: CutVerdict,
    /// Pairs `(𝔪, k)` standing for `𝔪X^k`. For non-members, consecutive
    /// pairs form an infinite ascending chain under `≺_𝔖`.
    pub witnesses: Vec<(Monomial, usize)>,
    pub checked_prefix: usize,
    pub detail: String,
    /// The envelope certifying membership.
    pub envelope: Option<Envelope>,
}

impl CutReport {
    fn new(verdict: CutVerdict, detail: impl Into<String>) -> CutReport {
        CutReport { verdict, witnesses: Vec::new(), checked_prefix: 0, detail: detail.into(), envelope: None }
    }
}

impl fmt::Display for CutReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.verdict, self.detail)?;
        if !self.witnesses.is_empty() {
            let ws: Vec<String> = self
                .witnesses
                .iter()
                .map(|(m, k)| format!("({m}, {k})"))
                .collect();
            write!(f, " witnesses: {}", ws.join(", "))?;
        }
        Ok(())
    }
}

/// Leading monomials of the first `n` coefficients; `None` if a coefficient
/// could not be inspected.
fn leading_prefix(p: &PowerSeries, n: usize) -> Result<Option<Vec<Option<Monomial>>>> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        match p.coeff(k).and_then(|c| c.dominant_monomial()) {
            Ok(d) => out.push(d),
            Err(KernelError::OutOfFuel) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(out))
}

fn fits(leads: &[Option<Monomial>], env: &Envelope) -> bool {
    leads
        .iter()
        .enumerate()
        .all(|(k, d)| d.as_ref().is_none_or(|d| *d <= env.bound(k)))
}

/// Membership of `P` in `𝕊⟦X⟧_𝔖`, checked on the support descriptor and
/// spot-checked on the first `prefix` coefficients.
pub fn cut_member(p: &PowerSeries, s: &CutSpec, prefix: usize) -> Result<CutReport> {
    let prefix = prefix.max(2);
    let grid = match p.support() {
        PsSupport::Polynomial { degree } => {
            let mut r = CutReport::new(CutVerdict::Member, format!("polynomial of degree at most {degree}"));
            r.checked_prefix = degree + 1;
            return Ok(r);
        }
        PsSupport::Unknown { infinite } => {
            return Ok(if *infinite && matches!(s, CutSpec::Empty) {
                empty_witness(p, prefix)?
            } else {
                CutReport::new(CutVerdict::Inconclusive, "no joint support descriptor")
            });
        }
        PsSupport::Grid(g) => g.clone(),
    };
    let Some(leads) = leading_prefix(p, prefix)? else {
        return Ok(CutReport::new(CutVerdict::Inconclusive, "coefficient prefix out of fuel"));
    };
    for env in grid.envelopes_for(s.boundary()) {
        if matches!(s, CutSpec::All) || s.contains(&env.weight.inv())? {
            if !fits(&leads, &env) {
                let mut r = CutReport::new(CutVerdict::Inconclusive, "coefficient prefix escapes the envelope");
                r.checked_prefix = prefix;
                return Ok(r);
            }
            let mut r = CutReport::new(
                CutVerdict::Member,
                format!("supports lie in {}·({})^k·⟨{}⟩", env.base, env.weight, render_list(&env.ratios)),
            );
            r.checked_prefix = prefix;
            r.envelope = Some(env);
            return Ok(r);
        }
    }
    if let Some(law) = &grid.leading {
        if !s.contains(&law.weight.inv())? {
            return Ok(law_witness(&leads, law, s));
        }
    }
    if matches!(s, CutSpec::Empty) && grid.infinite {
        return empty_witness(p, prefix);
    }
    let mut r = CutReport::new(CutVerdict::Inconclusive, "no envelope shrinks below the cut");
    r.checked_prefix = prefix;
    Ok(r)
}

fn render_list(ms: &[Monomial]) -> String {
    ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", ")
}

fn law_witness(leads: &[Option<Monomial>], law: &LeadingLaw, s: &CutSpec) -> CutReport {
    let mut witnesses = Vec::new();
    for (k, d) in leads.iter().enumerate() {
        let expected = law.base.mul(&law.weight.powi(k as i64));
        if d.as_ref() != Some(&expected) {
            let mut r = CutReport::new(
                CutVerdict::Inconclusive,
                format!("coefficient {k} breaks the leading law"),
            );
            r.checked_prefix = leads.len();
            return r;
        }
        witnesses.push((expected, k));
    }
    let mut r = CutReport::new(
        CutVerdict::NonMember,
        format!("leading monomials grow by ({})^k and ({})^-1 is not in {s}", law.weight, law.weight),
    );
    r.checked_prefix = leads.len();
    r.witnesses = witnesses;
    r
}

/// Under `𝔖 = ∅` only polynomials are members.
fn empty_witness(p: &PowerSeries, prefix: usize) -> Result<CutReport> {
    let mut witnesses = Vec::new();
    for k in 0..prefix {
        if let Some(d) = p.coeff(k)?.dominant_monomial()? {
            witnesses.push((d, k));
        }
    }
    let mut r = CutReport::new(CutVerdict::NonMember, "infinitely many nonzero coefficients under the empty cut");
    r.checked_prefix = prefix;
    r.witnesses = witnesses;
    Ok(r)
}

/// `ev_δ(P)` for `P ∈ 𝕊⟦X⟧_𝔖` and `δ ≺ 𝔖`.
pub fn cut_eval(p: &PowerSeries, s: &CutSpec, delta: &TransSeries) -> Result<TransSeries> {
    if !s.is_below(delta)? {
        return Err(KernelError::Precondition(format!("the evaluation point does not lie below {s}")));
    }
    let report = cut_member(p, s, super::DIVERGENCE_WINDOW)?;
    if report.verdict != CutVerdict::Member {
        return Err(KernelError::Precondition(format!("not a member of the cut algebra: {report}")));
    }
    let env = match report.envelope {
        Some(env) => env,
        None => Envelope { base: one(), weight: one(), ratios: Vec::new() },
    };
    if p.degree().is_none() {
        if let Some(d) = delta.dominant_monomial()? {
            if env.weight.mul(&d) >= one() {
                let tightened = match p.support() {
                    PsSupport::Grid(g) => g.envelopes_for(Some(&d)).into_iter().find(|e| e.weight.mul(&d) < one()),
                    _ => None,
                };
                return match tightened {
                    Some(e) => eval_with(p, delta, &e),
                    None => Err(KernelError::Precondition(format!(
                        "no envelope of the member shrinks at {d}"
                    ))),
                };
            }
        }
    }
    eval_with(p, delta, &env)
}

/// A coefficientwise operator.
#[derive(Clone, Debug)]
pub enum CoefficientOp {
    Morphism(OperatorHandle),
    Derivation,
}

/// Applies `op` to every coefficient, mapping `𝕊⟦X⟧_source` into
/// `𝕊⟦X⟧_target`.
pub fn lift_coefficientwise(
    op: &CoefficientOp,
    p: &PowerSeries,
    source: &CutSpec,
    target: &CutSpec,
) -> Result<PowerSeries> {
    check_cuts(op, source, target)?;
    let report = cut_member(p, source, super::DIVERGENCE_WINDOW)?;
    if report.verdict != CutVerdict::Member {
        return Err(KernelError::Precondition(format!("source is not a member of {source}: {report}")));
    }
    let support = match (op, p.support()) {
        (_, PsSupport::Polynomial { degree }) => PsSupport::Polynomial { degree: *degree },
        (_, PsSupport::Unknown { infinite }) => PsSupport::Unknown { infinite: *infinite },
        (CoefficientOp::Morphism(h), PsSupport::Grid(g)) => PsSupport::Grid(map_grid(h, g)?),
        (CoefficientOp::Derivation, PsSupport::Grid(g)) => PsSupport::Grid(derive_grid(g)),
    };
    let (pc, opc) = (p.clone(), op.clone());
    let lifted = PowerSeries::from_fn(
        move |k| {
            let c = pc.coeff(k)?;
            match &opc {
                CoefficientOp::Morphism(h) => h.apply(&c),
                CoefficientOp::Derivation => derive(&c),
            }
        },
        support,
    );
    let check = cut_member(&lifted, target, super::DIVERGENCE_WINDOW)?;
    if check.verdict == CutVerdict::NonMember {
        let witness = check.witnesses.first().map(|(m, _)| m.to_string()).unwrap_or_default();
        return Err(KernelError::SummabilityViolation {
            witness,
            reason: format!("lifted series is not a member of {target}: {check}"),
        });
    }
    Ok(lifted)
}

fn check_cuts(op: &CoefficientOp, source: &CutSpec, target: &CutSpec) -> Result<()> {
    let h = match op {
        CoefficientOp::Derivation => {
            return if source.same_as(target) {
                Ok(())
            } else {
                Err(KernelError::Precondition("a derivation lifts within a single cut algebra".into()))
            };
        }
        CoefficientOp::Morphism(h) => h,
    };
    if let CutSpec::Pullback { op, target: t } = source {
        if same_op(op, h) && t.same_as(target) {
            return Ok(());
        }
    }
    if matches!(h, OperatorHandle::Identity) && source.same_as(target) {
        return Ok(());
    }
    let image = |b: &Monomial| -> Result<Option<Monomial>> { h.apply_monomial(b)?.dominant_monomial() };
    let ok = match (source, target) {
        (CutSpec::All, CutSpec::All) | (CutSpec::Empty, CutSpec::Empty) => true,
        (CutSpec::Above(a), CutSpec::Above(b)) | (CutSpec::AboveEq(a), CutSpec::AboveEq(b)) => {
            image(a)?.as_ref() == Some(b)
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(KernelError::Precondition(format!(
            "source cut {source} is not the pullback of {target} along {h}"
        )))
    }
}

/// Dominant monomial and infinitesimal generators of `△(𝔪)`.
fn image_parts(h: &OperatorHandle, m: &Monomial) -> Result<(Monomial, Vec<Monomial>)> {
    let img = h.apply_monomial(m)?;
    let (_, d, eps) = img.dominant_decompose()?;
    Ok((d, eps.certificate().infinitesimal_generators()?))
}

fn map_envelope(h: &OperatorHandle, env: &Envelope) -> Result<Envelope> {
    let (base, mut ratios) = image_parts(h, &env.base)?;
    let (weight, wr) = image_parts(h, &env.weight)?;
    ratios.extend(wr);
    for z in &env.ratios {
        let (dz, zr) = image_parts(h, z)?;
        ratios.push(dz);
        ratios.extend(zr);
    }
    Ok(Envelope { base, weight, ratios: sorted_ratios(ratios) })
}

fn map_grid(h: &OperatorHandle, g: &BiGrid) -> Result<BiGrid> {
    let envelope = map_envelope(h, &g.envelope)?;
    let leading = match &g.leading {
        Some(l) => Some(LeadingLaw { base: image_parts(h, &l.base)?.0, weight: image_parts(h, &l.weight)?.0 }),
        None => None,
    };
    let tighten = g.tighten.clone().map(|t| -> Tighten {
        let h = h.clone();
        Arc::new(move |b: &Monomial| {
            // Pull the boundary back through the dominant-monomial map of x^r.
            let pre = preimage_bound(&h, b)?;
            map_envelope(&h, &t(&pre)?).ok()
        })
    });
    Ok(BiGrid { envelope, tighten, leading, infinite: g.infinite })
}

/// A monomial `𝔫` with `𝔡_{△(𝔫)} ≽ b`, searched among powers of `x`.
fn preimage_bound(h: &OperatorHandle, b: &Monomial) -> Option<Monomial> {
    if matches!(h, OperatorHandle::Identity) {
        return Some(b.clone());
    }
    for e in -64i64..=64 {
        let m = Monomial::x_pow(e);
        let d = h.apply_monomial(&m).ok()?.dominant_monomial().ok()??;
        if d >= *b {
            return Some(m);
        }
    }
    None
}

fn derive_grid(g: &BiGrid) -> BiGrid {
    let shift = |env: &Envelope| -> Envelope {
        let mut gens = vec![env.base.clone(), env.weight.clone()];
        gens.extend(env.ratios.iter().cloned());
        let mut dagger_monos: Vec<Monomial> = Vec::new();
        for m in &gens {
            if m.is_one() {
                continue;
            }
            dagger_monos.extend(m.dagger_terms().iter().map(|(_, d)| d.clone()));
        }
        let top = dagger_monos.iter().max().cloned().unwrap_or_else(one);
        let mut ratios = env.ratios.clone();
        ratios.extend(dagger_monos.iter().filter(|m| **m != top).map(|m| m.div(&top)));
        Envelope { base: env.base.mul(&top), weight: env.weight.clone(), ratios: sorted_ratios(ratios) }
    };
    let tighten = g.tighten.clone().map(|t| -> Tighten { Arc::new(move |b: &Monomial| t(b).map(|e| shift(&e))) });
    BiGrid { envelope: shift(&g.envelope), tighten, leading: None, infinite: false }
}
