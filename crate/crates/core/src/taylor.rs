//! Taylor expansions `f(g + δ) = Σ f⁽ᵏ⁾(g)/k! δᵏ` and their convergence
//! locus.
//!
//! The deformation `T_δ(△)` is computed in three steps: the Taylor series
//! `Σ f⁽ᵏ⁾/k! Xᵏ`, the coefficientwise image under `△`, and evaluation at `δ`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::calculus::{compose, dagger, derive, log_series, CompositionHandle};
use crate::error::{KernelError, Result};
use crate::monomials::Monomial;
use crate::powerseries::{
    lift_coefficientwise, ps_eval, BiGrid, CoefficientOp, ConvReport, ConvVerdict, CutSpec, Envelope,
    PowerSeries, PsSupport,
};
use crate::series_core::{Constant, Term, TransSeries};

pub use crate::calculus::OperatorHandle;

/// Support monomials inspected when looking for a divergence witness.
pub const SUPPORT_SCAN: usize = 50;

const CLOSURE_LIMIT: usize = 256;
const POLYNOMIAL_SCAN: usize = 16;

/// A convergence locus `𝔐_{△,δ}`.
#[derive(Clone, Debug)]
pub struct LocusSpec {
    pub op: OperatorHandle,
    pub delta: TransSeries,
}

impl LocusSpec {
    pub fn new(op: OperatorHandle, delta: TransSeries) -> LocusSpec {
        LocusSpec { op, delta }
    }

    pub fn identity(delta: TransSeries) -> LocusSpec {
        LocusSpec::new(OperatorHandle::Identity, delta)
    }

    pub fn right_compose(g: TransSeries, delta: TransSeries) -> Result<LocusSpec> {
        Ok(LocusSpec::new(OperatorHandle::right_compose(g)?, delta))
    }
}

impl fmt::Display for LocusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at δ = {}", self.op, self.delta)
    }
}

fn x_inv() -> Monomial {
    Monomial::x_pow(-1)
}

/// Dominant monomial of `𝔪†`; `None` for `𝔪 = 1`.
fn dagger_dominant(m: &Monomial) -> Option<Monomial> {
    m.dagger_terms().iter().map(|(_, n)| n.clone()).max()
}

/// `𝔡_{△(𝔪)}`.
fn image_dominant(op: &OperatorHandle, m: &Monomial) -> Result<Monomial> {
    match op {
        OperatorHandle::Identity => Ok(m.clone()),
        _ => op
            .apply_monomial(m)?
            .dominant_monomial()?
            .ok_or_else(|| KernelError::Domain(format!("image of {m} vanishes"))),
    }
}

/// Outcome of the flatness test on a monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecCondition {
    pub pass: bool,
    /// `𝔪† ≼ x⁻¹`.
    pub flat: bool,
    /// Offending monomial of `supp 𝔪′` on failure.
    pub witness: Option<Monomial>,
    pub checked: usize,
}

/// Checks `(supp 𝔪′)† ≼ x⁻¹` for flat `𝔪` and `(supp 𝔪′)† ≍ 𝔪†` otherwise,
/// on the first `prefix` monomials of `𝔪′`.
pub fn spec_condition_check(m: &Monomial, prefix: usize) -> Result<SpecCondition> {
    let Some(dm) = dagger_dominant(m) else {
        return Err(KernelError::Precondition("the condition is not defined for 1".into()));
    };
    let flat = dm <= x_inv();
    let deriv = derive(&TransSeries::monomial(m.clone()))?;
    let terms = deriv.take(prefix)?;
    for t in &terms {
        let dn = dagger_dominant(&t.mono);
        let ok = match (&dn, flat) {
            (None, true) => true,
            (None, false) => false,
            (Some(d), true) => *d <= x_inv(),
            (Some(d), false) => *d == dm,
        };
        if !ok {
            return Ok(SpecCondition { pass: false, flat, witness: Some(t.mono.clone()), checked: terms.len() });
        }
    }
    Ok(SpecCondition { pass: true, flat, witness: None, checked: terms.len() })
}

/// Whether `f ∈ 𝕊_{△,δ}`, decided on the generators of the certificate of
/// `f`. Divergence is only claimed from a non-flat support monomial.
pub fn locus_contains(spec: &LocusSpec, f: &TransSeries) -> Result<ConvReport> {
    let Some(d) = spec.delta.dominant_monomial()? else {
        return Ok(ConvReport::new(ConvVerdict::CertifiedConvergent, "δ = 0"));
    };
    let ax = image_dominant(&spec.op, &Monomial::x())?;
    let below_x = d < ax;
    let mut gens: Vec<Monomial> = f.certificate().bases().to_vec();
    gens.extend(f.certificate().ratios().iter().cloned());
    let mut certified = below_x;
    let mut witnesses = Vec::new();
    let mut failing = None;
    for g in &gens {
        let Some(dd) = dagger_dominant(g) else { continue };
        let t = image_dominant(&spec.op, &dd)?.mul(&d);
        if t >= Monomial::one() {
            certified = false;
            failing.get_or_insert(g.clone());
        } else if !witnesses.contains(&t) {
            witnesses.push(t);
        }
    }
    if certified {
        let mut r = ConvReport::new(
            ConvVerdict::CertifiedConvergent,
            format!("δ ≺ {ax} and △(𝔤†)δ ≺ 1 for every certificate generator 𝔤"),
        );
        r.witnesses = witnesses;
        r.checked_prefix = gens.len();
        return Ok(r);
    }
    let support = f.take(SUPPORT_SCAN).or_else(|e| match e {
        KernelError::OutOfFuel => Ok(f.known_terms()),
        e => Err(e),
    })?;
    for t in &support {
        let Some(dd) = dagger_dominant(&t.mono) else { continue };
        if dd <= x_inv() {
            continue;
        }
        let v = image_dominant(&spec.op, &dd)?.mul(&d);
        if v >= Monomial::one() || !below_x {
            let mut r = ConvReport::new(
                ConvVerdict::CertifiedDivergent,
                if below_x {
                    format!("non-flat support monomial {} has △(𝔪†)δ = {v} ≽ 1", t.mono)
                } else {
                    format!("δ ≽ {ax} with non-flat support monomial {}", t.mono)
                },
            );
            r.witnesses = vec![t.mono.clone()];
            r.checked_prefix = support.len();
            return Ok(r);
        }
    }
    let mut r = ConvReport::new(
        ConvVerdict::Inconclusive,
        match failing {
            Some(g) if below_x => format!("generator {g} fails the dagger test but no support monomial diverges"),
            _ => format!("δ ≽ {ax} and every inspected support monomial is flat"),
        },
    );
    r.checked_prefix = support.len();
    Ok(r)
}

/// Monomials of `(e†)` for `e` in the generators, closed under daggers.
fn dagger_closure(gens: &[Monomial]) -> Option<Vec<Monomial>> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<Monomial> = VecDeque::new();
    for g in gens {
        for (_, m) in g.dagger_terms().iter() {
            if seen.insert(m.clone()) {
                queue.push_back(m.clone());
            }
        }
    }
    while let Some(e) = queue.pop_front() {
        if seen.len() > CLOSURE_LIMIT {
            return None;
        }
        for (_, m) in e.dagger_terms().iter() {
            if seen.insert(m.clone()) {
                queue.push_back(m.clone());
            }
        }
    }
    Some(seen.into_iter().collect())
}

/// A support envelope for `k ↦ f⁽ᵏ⁾/k!`.
fn taylor_support(f: &TransSeries) -> PsSupport {
    let cert = f.certificate();
    let mut gens = cert.bases().to_vec();
    gens.extend(cert.ratios().iter().cloned());
    let Some(closure) = dagger_closure(&gens) else {
        return PsSupport::Unknown { infinite: false };
    };
    let Some(w) = closure.iter().max().cloned() else {
        return PsSupport::Polynomial { degree: 0 };
    };
    let top = cert.bases().iter().max().cloned().unwrap_or_else(Monomial::one);
    let mut ratios: Vec<Monomial> = cert.ratios().to_vec();
    ratios.extend(cert.bases().iter().filter(|b| **b != top).map(|b| b.div(&top)));
    ratios.extend(closure.iter().filter(|e| **e != w).map(|e| e.div(&w)));
    match Envelope::new(top, w, ratios) {
        Ok(env) => PsSupport::Grid(BiGrid::new(env)),
        Err(_) => PsSupport::Unknown { infinite: false },
    }
}

/// `Σ f⁽ᵏ⁾/k! Xᵏ`, for `f` in the locus of `spec`.
pub fn taylor_series(f: &TransSeries, spec: &LocusSpec) -> Result<PowerSeries> {
    let report = locus_contains(spec, f)?;
    if !report.is_convergent() {
        return Err(KernelError::Precondition(format!("outside the convergence locus: {report}")));
    }
    Ok(taylor_series_unchecked(f))
}

fn taylor_series_unchecked(f: &TransSeries) -> PowerSeries {
    if let Some(p) = finite_taylor_series(f) {
        return p;
    }
    let derivs = Arc::new(Mutex::new(vec![f.clone()]));
    PowerSeries::from_fn(
        move |k| {
            loop {
                let last = {
                    let ds = derivs.lock().expect("derivative cache");
                    if let Some(s) = ds.get(k) {
                        return Ok(s.scale_const(&Constant::factorial(k).recip()?));
                    }
                    ds.last().cloned().expect("f is cached")
                };
                let next = derive(&last)?;
                derivs.lock().expect("derivative cache").push(next);
            }
        },
        taylor_support(f),
    )
}

/// The Taylor series of a finite `f` whose derivatives vanish, as a
/// polynomial.
fn finite_taylor_series(f: &TransSeries) -> Option<PowerSeries> {
    let mut coeffs = Vec::new();
    let mut d = f.clone();
    for k in 0..POLYNOMIAL_SCAN {
        let terms = d.as_finite()?;
        if terms.is_empty() {
            return Some(PowerSeries::polynomial(coeffs));
        }
        coeffs.push(d.scale_const(&Constant::factorial(k).recip().ok()?));
        d = derive(&d).ok()?;
    }
    None
}

/// `T_δ(△)(f) = Σ △(f⁽ᵏ⁾)/k! δᵏ`.
pub fn taylor_deform(f: &TransSeries, spec: &LocusSpec) -> Result<TransSeries> {
    let Some(d) = spec.delta.dominant_monomial()? else {
        return spec.op.apply(f);
    };
    let series = taylor_series(f, spec)?;
    let target = CutSpec::Above(d);
    let source = match spec.op {
        OperatorHandle::Identity => target.clone(),
        _ => CutSpec::pullback(spec.op.clone(), target.clone()),
    };
    let lifted = lift_coefficientwise(&CoefficientOp::Morphism(spec.op.clone()), &series, &source, &target)?;
    ps_eval(&lifted, &spec.delta)
}

/// Dominant monomials of `△(f⁽ᵏ⁾)δᵏ/k!` for `k < n`, skipping vanishing
/// terms; the deformation is valid only if they strictly decrease.
pub fn descent_chain(f: &TransSeries, spec: &LocusSpec, n: usize) -> Result<Vec<(usize, Monomial)>> {
    let d = spec.delta.dominant_monomial()?.unwrap_or_else(Monomial::one);
    let series = taylor_series_unchecked(f);
    let mut out = Vec::new();
    for k in 0..n {
        let c = spec.op.apply(&series.coeff(k)?)?;
        if let Some(m) = c.dominant_monomial()? {
            out.push((k, m.mul(&d.powi(k as i64))));
        }
    }
    Ok(out)
}

/// Outcome of an identity check.
#[derive(Clone, Debug, PartialEq)]
pub enum CheckOutcome {
    Equal,
    Unequal { index: usize, lhs: Option<Term>, rhs: Option<Term> },
    Skipped(String),
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckOutcome::Equal => write!(f, "EQUAL"),
            CheckOutcome::Unequal { index, lhs, rhs } => {
                let show = |t: &Option<Term>| match t {
                    Some(t) => format!("{}*{}", t.coeff, t.mono),
                    None => "nothing".to_string(),
                };
                write!(f, "UNEQUAL at term {index}: {} vs {}", show(lhs), show(rhs))
            }
            CheckOutcome::Skipped(reason) => write!(f, "SKIPPED: {reason}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub outcome: CheckOutcome,
    pub lhs: Option<TransSeries>,
    pub rhs: Option<TransSeries>,
    pub locus: Option<ConvReport>,
    pub depth: usize,
}

impl CheckReport {
    fn skipped(reason: impl Into<String>, locus: Option<ConvReport>, depth: usize) -> CheckReport {
        CheckReport { outcome: CheckOutcome::Skipped(reason.into()), lhs: None, rhs: None, locus, depth }
    }

    pub fn is_equal(&self) -> bool {
        self.outcome == CheckOutcome::Equal
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self.outcome, CheckOutcome::Skipped(_))
    }
}

fn compared(lhs: TransSeries, rhs: TransSeries, locus: Option<ConvReport>, depth: usize) -> Result<CheckReport> {
    let outcome = match lhs.first_difference(&rhs, depth) {
        Ok(None) => CheckOutcome::Equal,
        Ok(Some((index, l, r))) => CheckOutcome::Unequal { index, lhs: l, rhs: r },
        Err(KernelError::OutOfFuel) => CheckOutcome::Skipped("comparison ran out of fuel".into()),
        Err(e) => return Err(e),
    };
    Ok(CheckReport { outcome, lhs: Some(lhs), rhs: Some(rhs), locus, depth })
}

/// Errors that mean a precondition was not met rather than a failed identity.
fn skippable(e: &KernelError) -> bool {
    matches!(
        e,
        KernelError::Precondition(_)
            | KernelError::PartialConstant(_)
            | KernelError::Domain(_)
            | KernelError::EvaluationRefused { .. }
            | KernelError::OutOfFuel
            | KernelError::Resource(_)
            | KernelError::SummabilityViolation { .. }
    )
}

macro_rules! or_skip {
    ($e:expr, $locus:expr, $depth:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) if skippable(&err) => return Ok(CheckReport::skipped(err.to_string(), $locus, $depth)),
            Err(err) => return Err(err),
        }
    };
}

fn locus_or_skip(spec: &LocusSpec, f: &TransSeries, what: &str) -> Result<std::result::Result<ConvReport, String>> {
    let r = locus_contains(spec, f)?;
    Ok(if r.is_convergent() { Ok(r) } else { Err(format!("locus {} for {what}: {}", r.verdict, r.detail)) })
}

/// Compares `f ∘ (g + δ)` with `T_δ(∘g)(f)`.
pub fn taylor_identity_check(f: &TransSeries, g: &TransSeries, delta: &TransSeries, depth: usize) -> Result<CheckReport> {
    let spec = or_skip!(LocusSpec::right_compose(g.clone(), delta.clone()), None, depth);
    let locus = match locus_or_skip(&spec, f, "f")? {
        Ok(r) => r,
        Err(reason) => return Ok(CheckReport::skipped(reason, Some(locus_contains(&spec, f)?), depth)),
    };
    let shifted = or_skip!(CompositionHandle::new(g.add(delta)), Some(locus.clone()), depth);
    let lhs = or_skip!(compose(f, &shifted), Some(locus.clone()), depth);
    let rhs = or_skip!(taylor_deform(f, &spec), Some(locus.clone()), depth);
    compared(lhs, rhs, Some(locus), depth)
}

/// Compares `T_δ(△)(log f)` with `log T_δ(△)(f)`.
pub fn analytic_commutation_check(f: &TransSeries, spec: &LocusSpec, depth: usize) -> Result<CheckReport> {
    let locus = match locus_or_skip(spec, f, "f")? {
        Ok(r) => r,
        Err(reason) => return Ok(CheckReport::skipped(reason, Some(locus_contains(spec, f)?), depth)),
    };
    let lf = or_skip!(log_series(f), Some(locus.clone()), depth);
    if let Err(reason) = locus_or_skip(spec, &lf, "log f")? {
        return Ok(CheckReport::skipped(reason, Some(locus), depth));
    }
    let lhs = or_skip!(taylor_deform(&lf, spec), Some(locus.clone()), depth);
    let tf = or_skip!(taylor_deform(f, spec), Some(locus.clone()), depth);
    let rhs = or_skip!(log_series(&tf), Some(locus.clone()), depth);
    compared(lhs, rhs, Some(locus), depth)
}

/// Compares `(T_δ(△)f)′` with `(T_δ(△)x)′ · T_δ(△)(f′)`.
pub fn chain_rule_transport_check(f: &TransSeries, spec: &LocusSpec, depth: usize) -> Result<CheckReport> {
    let locus = match locus_or_skip(spec, f, "f")? {
        Ok(r) => r,
        Err(reason) => return Ok(CheckReport::skipped(reason, Some(locus_contains(spec, f)?), depth)),
    };
    let df = or_skip!(derive(f), Some(locus.clone()), depth);
    if let Err(reason) = locus_or_skip(spec, &df, "f′")? {
        return Ok(CheckReport::skipped(reason, Some(locus), depth));
    }
    let lhs = or_skip!(taylor_deform(f, spec).and_then(|s| derive(&s)), Some(locus.clone()), depth);
    let tx = or_skip!(taylor_deform(&TransSeries::x(), spec).and_then(|s| derive(&s)), Some(locus.clone()), depth);
    let tdf = or_skip!(taylor_deform(&df, spec), Some(locus.clone()), depth);
    compared(lhs, tx.mul(&tdf), Some(locus), depth)
}

/// Brute-force locus test on enumerated monomials of the certificate grid.
///
/// Returns the first enumerated monomial `𝔪` with `△(𝔪†)δ ≽ 1`.
pub fn locus_violation_by_enumeration(spec: &LocusSpec, f: &TransSeries, count: usize) -> Result<Option<Monomial>> {
    let Some(d) = spec.delta.dominant_monomial()? else {
        return Ok(None);
    };
    for m in f.certificate().iter().take(count) {
        let Some(dd) = dagger(&m).dominant_monomial()? else { continue };
        if image_dominant(&spec.op, &dd)?.mul(&d) >= Monomial::one() {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::exp_series;
    use num::BigRational;

    fn xp(n: i64) -> Monomial {
        Monomial::x_pow(n)
    }

    fn mono(n: i64) -> TransSeries {
        TransSeries::monomial(xp(n))
    }

    fn int(n: i64) -> Constant {
        Constant::from_int(n)
    }

    fn exp_x(c: i64, n: i64) -> Monomial {
        Monomial::exp_of(vec![(BigRational::from_integer(c.into()), xp(n))]).unwrap()
    }

    fn geometric_tail() -> TransSeries {
        TransSeries::one().sub(&mono(-1)).invert().unwrap()
    }

    fn same(a: &TransSeries, b: &TransSeries, n: usize) -> bool {
        a.agrees_with(b, n).unwrap()
    }

    #[test]
    fn spec_condition() {
        let r = spec_condition_check(&xp(2), 5).unwrap();
        assert!(r.flat && r.pass);
        let r = spec_condition_check(&exp_x(1, 2), 5).unwrap();
        assert!(!r.flat && r.pass);
        let r = spec_condition_check(&Monomial::log_iter(1).unwrap(), 8).unwrap();
        assert!(r.flat && r.pass);
        assert!(spec_condition_check(&Monomial::one(), 3).is_err());
    }

    #[test]
    fn locus_verdicts() {
        let id = LocusSpec::identity(TransSeries::one());
        assert!(locus_contains(&id, &geometric_tail()).unwrap().is_convergent());
        let ex = TransSeries::monomial(exp_x(1, 1));
        let r = locus_contains(&id, &ex).unwrap();
        assert_eq!(r.verdict, ConvVerdict::CertifiedDivergent);
        assert_eq!(r.witnesses, vec![exp_x(1, 1)]);
        let sq = LocusSpec::right_compose(mono(2), mono(-1)).unwrap();
        assert!(locus_contains(&sq, &ex).unwrap().is_convergent());
        let zero = LocusSpec::identity(TransSeries::zero());
        assert!(locus_contains(&zero, &ex).unwrap().is_convergent());
        // flat support never yields divergence
        let at_x = LocusSpec::identity(mono(1));
        assert_eq!(locus_contains(&at_x, &mono(1)).unwrap().verdict, ConvVerdict::Inconclusive);
    }

    #[test]
    fn taylor_series_of_powers() {
        let id = LocusSpec::identity(TransSeries::one());
        let p = taylor_series(&TransSeries::x(), &id).unwrap();
        assert!(same(&p.coeff(0).unwrap(), &TransSeries::x(), 2));
        assert!(same(&p.coeff(1).unwrap(), &TransSeries::one(), 2));
        assert!(p.coeff(2).unwrap().is_zero().unwrap());
        let q = taylor_series(&mono(2), &id).unwrap();
        assert!(same(&q.coeff(1).unwrap(), &TransSeries::term(int(2), xp(1)), 2));
        assert!(same(&q.coeff(2).unwrap(), &TransSeries::one(), 2));
        assert!(q.coeff(3).unwrap().is_zero().unwrap());
    }

    #[test]
    fn taylor_series_of_geometric_tail() {
        // f = 1 + (x-1)^{-1}, so f^(k)/k! = (-1)^k (x-1)^{-k-1} for k ≥ 1
        let id = LocusSpec::identity(TransSeries::one());
        let f = geometric_tail();
        let p = taylor_series(&f, &id).unwrap();
        let xm1 = TransSeries::x().sub(&TransSeries::one());
        for k in 1..=5u32 {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let expected = xm1.powi(k + 1).invert().unwrap().scale_const(&int(sign));
            assert!(same(&p.coeff(k as usize).unwrap(), &expected, 6), "k = {k}");
        }
    }

    #[test]
    fn deformations() {
        let id = LocusSpec::identity(TransSeries::one());
        let v = taylor_deform(&mono(-1), &id).unwrap();
        let oracle = TransSeries::x().add(&TransSeries::one()).invert().unwrap();
        assert!(same(&v, &oracle, 8));

        let sq = LocusSpec::right_compose(mono(2), mono(-1)).unwrap();
        let v = taylor_deform(&TransSeries::x(), &sq).unwrap();
        assert!(same(&v, &mono(2).add(&mono(-1)), 3));

        let ex = TransSeries::monomial(exp_x(1, 1));
        let v = taylor_deform(&ex, &sq).unwrap();
        let oracle = exp_series(&mono(2).add(&mono(-1))).unwrap();
        assert!(same(&v, &oracle, 6));

        let zero = LocusSpec::identity(TransSeries::zero());
        assert!(same(&taylor_deform(&ex, &zero).unwrap(), &ex, 1));
        assert!(taylor_deform(&ex, &id).is_err());
    }

    #[test]
    fn descent() {
        let id = LocusSpec::identity(TransSeries::one());
        let chain = descent_chain(&mono(-1), &id, 6).unwrap();
        assert_eq!(chain.len(), 6);
        assert!(chain.windows(2).all(|w| w[0].1 > w[1].1));
    }

    #[test]
    fn identity_checks() {
        let one = TransSeries::one();
        let r = taylor_identity_check(&mono(-1), &TransSeries::x(), &one, 8).unwrap();
        assert!(r.is_equal(), "{}", r.outcome);
        let ex = TransSeries::monomial(exp_x(1, 1));
        let r = taylor_identity_check(&ex, &TransSeries::x(), &one, 8).unwrap();
        assert!(r.is_skipped());
        assert_eq!(r.locus.unwrap().verdict, ConvVerdict::CertifiedDivergent);
    }

    #[test]
    fn commutation_and_chain_rule() {
        let id = LocusSpec::identity(TransSeries::one());
        let r = analytic_commutation_check(&mono(2), &id, 6).unwrap();
        assert!(r.is_equal(), "{}", r.outcome);
        let sq = LocusSpec::right_compose(mono(2), mono(-1)).unwrap();
        let r = chain_rule_transport_check(&mono(-1), &sq, 6).unwrap();
        assert!(r.is_equal(), "{}", r.outcome);
    }
}
