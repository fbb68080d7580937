use std::sync::Arc;

use num::{BigRational, Signed, ToPrimitive};

use super::engine::Verified;
use super::{
    Constant, Family, Fuel, GridCertificate, Member, MemberSpec, SumSource, Term, TermSource,
    TransSeries, VecFamily,
};
use crate::error::{KernelError, Result};
use crate::monomials::Monomial;

/// Lattice steps spent re-checking a lazily summed stream against its grid.
pub(crate) const VERIFY_BUDGET: usize = 10_000;

/// Reads `coeff·mono·base[offset + i]`.
struct MapSource {
    base: TransSeries,
    offset: usize,
    pos: usize,
    coeff: Constant,
    mono: Monomial,
}

impl TermSource for MapSource {
    fn next_term(&mut self, fuel: &Fuel) -> Result<Option<Term>> {
        let t = self.base.term_at_with(self.offset + self.pos, fuel)?;
        self.pos += 1;
        Ok(t.map(|t| Term::new(&self.coeff * &t.coeff, self.mono.mul(&t.mono))))
    }

    fn frontier(&self) -> Option<Monomial> {
        self.base.stalled_frontier().map(|f| self.mono.mul(&f))
    }
}

struct TruncSource {
    base: TransSeries,
    pos: usize,
    cutoff: Monomial,
}

impl TermSource for TruncSource {
    fn next_term(&mut self, fuel: &Fuel) -> Result<Option<Term>> {
        match self.base.term_at_with(self.pos, fuel)? {
            Some(t) if t.mono > self.cutoff => {
                self.pos += 1;
                Ok(Some(t))
            }
            _ => Ok(None),
        }
    }

    fn frontier(&self) -> Option<Monomial> {
        self.base.stalled_frontier()
    }
}

/// A coefficient sequence `k ↦ c_k`; `None` ends a finite sequence.
#[derive(Clone)]
pub struct CoeffSeq(Arc<dyn Fn(usize) -> Option<Constant> + Send + Sync>);

impl CoeffSeq {
    pub fn new(f: impl Fn(usize) -> Option<Constant> + Send + Sync + 'static) -> CoeffSeq {
        CoeffSeq(Arc::new(f))
    }

    pub fn ones() -> CoeffSeq {
        CoeffSeq::new(|_| Some(Constant::one()))
    }

    pub fn finite(cs: Vec<Constant>) -> CoeffSeq {
        CoeffSeq::new(move |k| cs.get(k).cloned())
    }

    /// `1/k!`.
    pub fn exp() -> CoeffSeq {
        CoeffSeq::new(|k| Some(Constant::factorial(k).recip().expect("nonzero factorial")))
    }

    /// `(-1)^{k-1}/k` for `k ≥ 1`, zero at `k = 0`.
    pub fn log1p() -> CoeffSeq {
        CoeffSeq::new(|k| {
            if k == 0 {
                Some(Constant::zero())
            } else {
                let sign = if k % 2 == 1 { 1 } else { -1 };
                Some(Constant::ratio(sign, k as i64))
            }
        })
    }

    /// `binom(r, k)`, finite when `r` is a nonnegative integer.
    pub fn binomial(r: BigRational) -> CoeffSeq {
        let finite = r.is_integer() && !r.is_negative();
        let top = r.to_integer().to_usize();
        let rc = Constant::Exact(r);
        CoeffSeq::new(move |k| {
            if finite && top.map(|t| k > t).unwrap_or(false) {
                None
            } else {
                Some(Constant::binomial(&rc, k))
            }
        })
    }

    pub fn get(&self, k: usize) -> Option<Constant> {
        (self.0)(k)
    }
}

/// Relation between dominant monomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `s ≺ t`.
    Prec,
    /// `s ≍ t` with distinct leading terms.
    Asymp,
    /// `s ∼ t`: equal leading terms.
    Sim,
    /// `s ≻ t`.
    Succ,
    /// Both operands are zero.
    BothZero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominanceVerdict {
    pub relation: Relation,
    pub lhs: Option<Term>,
    pub rhs: Option<Term>,
}

impl DominanceVerdict {
    pub fn prec(&self) -> bool {
        self.relation == Relation::Prec
    }

    pub fn preceq(&self) -> bool {
        matches!(self.relation, Relation::Prec | Relation::Asymp | Relation::Sim | Relation::BothZero)
    }

    pub fn asymp(&self) -> bool {
        matches!(self.relation, Relation::Asymp | Relation::Sim)
    }

    pub fn succ(&self) -> bool {
        self.relation == Relation::Succ
    }

    pub fn succeq(&self) -> bool {
        !self.prec()
    }

    pub fn symbol(&self) -> &'static str {
        match self.relation {
            Relation::Prec => "≺",
            Relation::Asymp => "≍",
            Relation::Sim => "∼",
            Relation::Succ => "≻",
            Relation::BothZero => "0=0",
        }
    }
}

struct MulFamily {
    s: TransSeries,
    t: TransSeries,
    t_lead: Option<Option<Monomial>>,
    i: usize,
}

impl Family for MulFamily {
    fn next_member(&mut self, fuel: &Fuel) -> Result<Option<MemberSpec>> {
        if self.t_lead.is_none() {
            self.t_lead = Some(self.t.leading_with(fuel)?.map(|t| t.mono));
        }
        let Some(dt) = self.t_lead.clone().expect("computed") else {
            return Ok(None);
        };
        let Some(term) = self.s.term_at_with(self.i, fuel)? else {
            return Ok(None);
        };
        self.i += 1;
        let bound = term.mono.mul(&dt);
        Ok(Some(MemberSpec {
            member: Member::Scaled { coeff: term.coeff, mono: term.mono, base: self.t.clone() },
            bound: Some(bound),
        }))
    }
}

struct GeomFamily {
    coeffs: CoeffSeq,
    eps: TransSeries,
    lead: Monomial,
    power_cert: GridCertificate,
    power: TransSeries,
    power_k: usize,
    k: usize,
}

impl Family for GeomFamily {
    fn next_member(&mut self, fuel: &Fuel) -> Result<Option<MemberSpec>> {
        loop {
            fuel.spend(1)?;
            let Some(c) = self.coeffs.get(self.k) else {
                return Ok(None);
            };
            if c.is_zero() {
                self.k += 1;
                continue;
            }
            while self.power_k < self.k {
                self.power = self.eps.mul(&self.power).with_certificate(self.power_cert.clone());
                self.power_k += 1;
            }
            let bound = self.lead.powi(self.k as i64);
            self.k += 1;
            return Ok(Some(MemberSpec {
                member: Member::Scaled { coeff: c, mono: Monomial::one(), base: self.power.clone() },
                bound: Some(bound),
            }));
        }
    }
}

struct LazyFamily {
    producer: Arc<dyn Fn(usize) -> Option<TransSeries> + Send + Sync>,
    level: Arc<dyn Fn(usize) -> usize + Send + Sync>,
    top: Option<Monomial>,
    ratio: Option<Monomial>,
    last_level: usize,
    k: usize,
}

impl Family for LazyFamily {
    fn next_member(&mut self, _fuel: &Fuel) -> Result<Option<MemberSpec>> {
        let Some(s) = (self.producer)(self.k) else {
            return Ok(None);
        };
        let lvl = (self.level)(self.k);
        if lvl < self.last_level {
            return Err(KernelError::SummabilityViolation {
                witness: format!("index {}", self.k),
                reason: "level map is not nondecreasing".into(),
            });
        }
        self.last_level = lvl;
        self.k += 1;
        let bound = self.top.as_ref().map(|b| match &self.ratio {
            Some(z) => b.mul(&z.powi(lvl as i64)),
            None => b.clone(),
        });
        Ok(Some(MemberSpec { member: Member::Series(s), bound }))
    }
}

type MemberFn = dyn FnMut(usize, &Fuel) -> Result<Option<(TransSeries, Option<Monomial>)>> + Send;

/// A family given by a closure returning each member with its tail bound.
struct FnFamily {
    f: Box<MemberFn>,
    k: usize,
}

impl Family for FnFamily {
    fn next_member(&mut self, fuel: &Fuel) -> Result<Option<MemberSpec>> {
        let Some((s, bound)) = (self.f)(self.k, fuel)? else {
            return Ok(None);
        };
        self.k += 1;
        Ok(Some(MemberSpec { member: Member::Series(s), bound }))
    }
}

/// Sum of the family `k ↦ f(k)`, where each member carries a bound that
/// dominates it and every later member.
pub(crate) fn sum_bounded(
    f: impl FnMut(usize, &Fuel) -> Result<Option<(TransSeries, Option<Monomial>)>> + Send + 'static,
    cert: GridCertificate,
) -> TransSeries {
    let family = FnFamily { f: Box::new(f), k: 0 };
    TransSeries::from_source(cert, Box::new(SumSource::new(Box::new(family))))
}

/// Sum of a finite family.
pub fn sum_family(fam: Vec<TransSeries>) -> TransSeries {
    let mut fam: Vec<TransSeries> = fam;
    fam.retain(|s| s.as_finite().map(|ts| !ts.is_empty()).unwrap_or(true));
    match fam.len() {
        0 => return TransSeries::zero(),
        1 => return fam.pop().expect("one member"),
        _ => {}
    }
    let cert = fam
        .iter()
        .skip(1)
        .fold(fam[0].certificate().clone(), |acc, s| acc.union(s.certificate()));
    let members = fam.into_iter().map(Member::Series).collect();
    TransSeries::from_source(cert, Box::new(SumSource::new(Box::new(VecFamily::new(members)))))
}

/// Sum of an infinite family `k ↦ s_k` with `supp s_k ⊆ max(B)·T^{level(k)}`
/// for the bases `B` and ratios `T` of `cert`.
///
/// Emitted terms are re-checked against `cert`; a term outside it is a
/// summability violation.
pub fn sum_lazy(
    producer: impl Fn(usize) -> Option<TransSeries> + Send + Sync + 'static,
    level: impl Fn(usize) -> usize + Send + Sync + 'static,
    cert: GridCertificate,
) -> TransSeries {
    let family = LazyFamily {
        producer: Arc::new(producer),
        level: Arc::new(level),
        top: cert.max_base().cloned(),
        ratio: cert.max_ratio().cloned(),
        last_level: 0,
        k: 0,
    };
    let src = SumSource::new(Box::new(family));
    let verified = Verified::new(Box::new(src), cert.iter(), VERIFY_BUDGET);
    TransSeries::from_source(cert, Box::new(verified))
}

/// `Σ c_k ε^k` for `ε ≺ 1`.
pub fn geometric_substitute(coeffs: CoeffSeq, eps: &TransSeries) -> Result<TransSeries> {
    let c0 = coeffs.get(0).unwrap_or_else(Constant::zero);
    let Some(lead) = eps.leading()? else {
        return Ok(TransSeries::constant(c0));
    };
    if lead.mono >= Monomial::one() {
        return Err(KernelError::Precondition(format!(
            "geometric substitution needs an infinitesimal argument, got dominant monomial {}",
            lead.mono
        )));
    }
    let gens = eps.certificate().infinitesimal_generators()?;
    let power_cert = GridCertificate::unchecked(vec![Monomial::one()], gens.clone());
    let eps_cert = GridCertificate::unchecked(gens.clone(), gens.clone());
    let cert = if c0.is_zero() { eps_cert.clone() } else { power_cert.clone() };
    let family = GeomFamily {
        coeffs,
        eps: eps.with_certificate(eps_cert),
        lead: lead.mono,
        power_cert,
        power: TransSeries::one(),
        power_k: 0,
        k: 0,
    };
    Ok(TransSeries::from_source(cert, Box::new(SumSource::new(Box::new(family)))))
}

impl TransSeries {
    /// All terms, if the stream is already known to be finished.
    pub fn as_finite(&self) -> Option<Vec<Term>> {
        let st = self.lock();
        match st.source {
            super::Source::Done => Some(st.terms.clone()),
            _ => None,
        }
    }

    pub fn add(&self, other: &TransSeries) -> TransSeries {
        sum_family(vec![self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &TransSeries) -> TransSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TransSeries {
        self.scale(&Constant::from_int(-1), &Monomial::one())
    }

    /// `c·m·s`.
    pub fn scale(&self, c: &Constant, m: &Monomial) -> TransSeries {
        if c.is_zero() {
            return TransSeries::zero();
        }
        if c.is_one() && c.is_exact() && m.is_one() {
            return self.clone();
        }
        let cert = self.certificate().scale(m);
        if let Some(ts) = self.as_finite() {
            let ts = ts
                .into_iter()
                .map(|t| Term::new(c * &t.coeff, m.mul(&t.mono)))
                .collect();
            return TransSeries::from_terms(ts).with_certificate(cert);
        }
        let src = MapSource { base: self.clone(), offset: 0, pos: 0, coeff: c.clone(), mono: m.clone() };
        TransSeries::from_source(cert, Box::new(src))
    }

    pub fn scale_const(&self, c: &Constant) -> TransSeries {
        self.scale(c, &Monomial::one())
    }

    pub fn mul(&self, other: &TransSeries) -> TransSeries {
        let cert = self.certificate().product(other.certificate());
        for (a, b) in [(self, other), (other, self)] {
            if let Some(ts) = a.as_finite() {
                match ts.len() {
                    0 => return TransSeries::zero(),
                    1 => return b.scale(&ts[0].coeff, &ts[0].mono).with_certificate(cert),
                    _ => {}
                }
            }
        }
        let family = MulFamily { s: self.clone(), t: other.clone(), t_lead: None, i: 0 };
        TransSeries::from_source(cert, Box::new(SumSource::new(Box::new(family))))
    }

    /// `s^n` by repeated squaring.
    pub fn powi(&self, n: u32) -> TransSeries {
        let mut acc = TransSeries::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `(c, 𝔡, ε)` with `s = c·𝔡·(1 + ε)` and `ε ≺ 1`.
    pub fn dominant_decompose(&self) -> Result<(Constant, Monomial, TransSeries)> {
        let Some(lead) = self.leading()? else {
            return Err(KernelError::Domain("the zero series has no dominant term".into()));
        };
        let inv_c = lead.coeff.recip()?;
        let inv_d = lead.mono.inv();
        let cert = self.certificate().scale(&inv_d);
        let eps = match self.as_finite() {
            Some(ts) => TransSeries::from_terms(
                ts[1..]
                    .iter()
                    .map(|t| Term::new(&inv_c * &t.coeff, inv_d.mul(&t.mono)))
                    .collect(),
            )
            .with_certificate(cert),
            None => {
                let src = MapSource { base: self.clone(), offset: 1, pos: 0, coeff: inv_c, mono: inv_d };
                TransSeries::from_source(cert, Box::new(src))
            }
        };
        Ok((lead.coeff, lead.mono, eps))
    }

    pub fn invert(&self) -> Result<TransSeries> {
        if self.is_zero()? {
            return Err(KernelError::DivisionByZero);
        }
        let (c, d, eps) = self.dominant_decompose()?;
        let alt = CoeffSeq::new(|k| Some(Constant::from_int(if k % 2 == 0 { 1 } else { -1 })));
        let g = geometric_substitute(alt, &eps)?;
        Ok(g.scale(&c.recip()?, &d.inv()))
    }

    pub fn div(&self, other: &TransSeries) -> Result<TransSeries> {
        Ok(self.mul(&other.invert()?))
    }

    /// `s^r = c^r·𝔡^r·Σ binom(r,k) ε^k`.
    pub fn pow(&self, r: &BigRational) -> Result<TransSeries> {
        if self.is_zero()? {
            return if r.is_positive() {
                Ok(TransSeries::zero())
            } else {
                Err(KernelError::DivisionByZero)
            };
        }
        let (c, d, eps) = self.dominant_decompose()?;
        let cr = c.pow_rational(r)?;
        let g = geometric_substitute(CoeffSeq::binomial(r.clone()), &eps)?;
        Ok(g.scale(&cr, &d.pow(r)))
    }

    pub fn dominance(&self, other: &TransSeries) -> Result<DominanceVerdict> {
        let lhs = self.leading()?;
        let rhs = other.leading()?;
        let relation = match (&lhs, &rhs) {
            (None, None) => Relation::BothZero,
            (None, Some(_)) => Relation::Prec,
            (Some(_), None) => Relation::Succ,
            (Some(a), Some(b)) => match a.mono.cmp(&b.mono) {
                std::cmp::Ordering::Less => Relation::Prec,
                std::cmp::Ordering::Greater => Relation::Succ,
                std::cmp::Ordering::Equal => {
                    if a.coeff == b.coeff {
                        Relation::Sim
                    } else {
                        Relation::Asymp
                    }
                }
            },
        };
        Ok(DominanceVerdict { relation, lhs, rhs })
    }

    /// The terms with monomial strictly above `cutoff`.
    pub fn truncate_initial(&self, cutoff: &Monomial) -> TransSeries {
        let src = TruncSource { base: self.clone(), pos: 0, cutoff: cutoff.clone() };
        TransSeries::from_source(self.certificate().clone(), Box::new(src))
    }

    pub fn coefficient_of(&self, m: &Monomial) -> Result<Constant> {
        let fuel = Fuel::standard();
        let mut i = 0;
        while let Some(t) = self.term_at_with(i, &fuel)? {
            match t.mono.cmp(m) {
                std::cmp::Ordering::Greater => i += 1,
                std::cmp::Ordering::Equal => return Ok(t.coeff),
                std::cmp::Ordering::Less => break,
            }
        }
        Ok(Constant::zero())
    }

    /// Splits `s = L + c + ε` into its purely large part (at most `cap`
    /// terms), constant term and infinitesimal part.
    pub fn split_large(&self, cap: usize) -> Result<(Vec<Term>, Constant, TransSeries)> {
        let one = Monomial::one();
        let fuel = Fuel::standard();
        let mut large = Vec::new();
        let mut i = 0;
        loop {
            match self.term_at_with(i, &fuel)? {
                Some(t) if t.mono > one => {
                    if large.len() == cap {
                        return Err(KernelError::Resource(format!(
                            "purely large part has more than {cap} terms"
                        )));
                    }
                    large.push(t);
                    i += 1;
                }
                _ => break,
            }
        }
        let mut c = Constant::zero();
        if let Some(t) = self.term_at_with(i, &fuel)? {
            if t.mono == one {
                c = t.coeff;
                i += 1;
            }
        }
        let cert = self.certificate().clone();
        let eps = match self.as_finite() {
            Some(ts) => TransSeries::from_terms(ts[i..].to_vec()),
            None => TransSeries::from_source(
                cert,
                Box::new(MapSource {
                    base: self.clone(),
                    offset: i,
                    pos: 0,
                    coeff: Constant::one(),
                    mono: Monomial::one(),
                }),
            ),
        };
        Ok((large, c, eps))
    }

    /// Converts every coefficient to the float backend.
    pub fn to_float(&self) -> TransSeries {
        let src = FloatSource { base: self.clone(), pos: 0 };
        TransSeries::from_source(self.certificate().clone(), Box::new(src))
    }
}

struct FloatSource {
    base: TransSeries,
    pos: usize,
}

impl TermSource for FloatSource {
    fn next_term(&mut self, fuel: &Fuel) -> Result<Option<Term>> {
        let t = self.base.term_at_with(self.pos, fuel)?;
        self.pos += 1;
        Ok(t.map(|t| Term::new(t.coeff.to_float(), t.mono)))
    }

    fn frontier(&self) -> Option<Monomial> {
        self.base.stalled_frontier()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xp(n: i64) -> Monomial {
        Monomial::x_pow(n)
    }

    fn c(n: i64) -> Constant {
        Constant::from_int(n)
    }

    fn poly(ts: &[(i64, i64)]) -> TransSeries {
        TransSeries::from_terms(ts.iter().map(|&(a, n)| Term::new(c(a), xp(n))).collect())
    }

    fn geometric(z: Monomial) -> TransSeries {
        geometric_substitute(CoeffSeq::ones(), &TransSeries::monomial(z)).unwrap()
    }

    fn coeffs_of(s: &TransSeries, n: usize) -> Vec<(Constant, Monomial)> {
        s.take(n).unwrap().into_iter().map(|t| (t.coeff, t.mono)).collect()
    }

    #[test]
    fn addition_merges() {
        let s = poly(&[(1, 1), (1, 0)]).add(&poly(&[(-1, 0)]));
        assert_eq!(coeffs_of(&s, 5), vec![(c(1), xp(1))]);
        let odd = geometric(xp(-1)).sub(&geometric(xp(-2)));
        let got: Vec<_> = odd.take(4).unwrap().into_iter().map(|t| t.mono).collect();
        assert_eq!(got, vec![xp(-1), xp(-3), xp(-5), xp(-7)]);
    }

    #[test]
    fn products() {
        let s = poly(&[(1, 0), (1, -1)]).mul(&poly(&[(1, 0), (-1, -1)]));
        assert_eq!(coeffs_of(&s, 5), vec![(c(1), xp(0)), (c(-1), xp(-2))]);
        let one = geometric(xp(-1)).mul(&poly(&[(1, 0), (-1, -1)]));
        let p = one.prefix_with(10, &Fuel::new(20_000)).unwrap();
        assert_eq!(p.terms, vec![Term::new(c(1), xp(0))]);
        assert!(matches!(p.tail, super::super::Tail::Stalled(_)));
    }

    #[test]
    fn decomposition() {
        let (k, d, eps) = poly(&[(2, 1), (1, 0)]).dominant_decompose().unwrap();
        assert_eq!((k, d), (c(2), xp(1)));
        assert_eq!(coeffs_of(&eps, 3), vec![(Constant::ratio(1, 2), xp(-1))]);
        assert!(TransSeries::zero().dominant_decompose().is_err());
    }

    #[test]
    fn inversion() {
        let g = poly(&[(1, 0), (-1, -1)]).invert().unwrap();
        assert_eq!(coeffs_of(&g, 4), (0..4).map(|k| (c(1), xp(-k))).collect::<Vec<_>>());
        assert_eq!(TransSeries::zero().invert().unwrap_err(), KernelError::DivisionByZero);
        let s = poly(&[(3, 2), (1, 1), (-2, -3)]);
        let prod = s.mul(&s.invert().unwrap());
        assert_eq!(coeffs_of(&prod, 1), vec![(c(1), xp(0))]);
        assert!(prod.agrees_with(&TransSeries::one(), 10).unwrap());
    }

    #[test]
    fn log_coefficients() {
        let s = geometric_substitute(CoeffSeq::log1p(), &TransSeries::monomial(xp(-1))).unwrap();
        assert_eq!(
            coeffs_of(&s, 3),
            vec![(c(1), xp(-1)), (Constant::ratio(-1, 2), xp(-2)), (Constant::ratio(1, 3), xp(-3))]
        );
    }

    #[test]
    fn dominance_relations() {
        assert!(TransSeries::x().dominance(&poly(&[(1, 2)])).unwrap().prec());
        let v = poly(&[(2, 1), (1, 0)]).dominance(&TransSeries::x()).unwrap();
        assert_eq!(v.relation, Relation::Asymp);
        assert_eq!(geometric(xp(-1)).dominance(&TransSeries::one()).unwrap().relation, Relation::Sim);
        assert_eq!(TransSeries::zero().dominance(&TransSeries::zero()).unwrap().relation, Relation::BothZero);
    }

    #[test]
    fn truncation() {
        let s = poly(&[(1, 1), (1, 0), (1, -1)]).truncate_initial(&Monomial::one());
        assert_eq!(coeffs_of(&s, 5), vec![(c(1), xp(1))]);
        let g = geometric(xp(-1)).truncate_initial(&xp(-3));
        assert_eq!(g.prefix(10).unwrap().terms.len(), 3);
        assert!(g.prefix(10).unwrap().is_exact());
    }

    #[test]
    fn lazy_sums() {
        let cert = GridCertificate::new(vec![Monomial::one()], vec![xp(-1)]).unwrap();
        let s = sum_lazy(|k| Some(TransSeries::monomial(xp(-(k as i64)))), |k| k, cert.clone());
        assert_eq!(coeffs_of(&s, 3), vec![(c(1), xp(0)), (c(1), xp(-1)), (c(1), xp(-2))]);
        let f = sum_lazy(
            |k| Some(TransSeries::term(Constant::factorial(k), xp(-(k as i64)))),
            |k| k,
            cert.clone(),
        );
        let got = coeffs_of(&f, 8);
        for (k, (a, _)) in got.iter().enumerate() {
            assert_eq!(*a, Constant::factorial(k));
        }
        let bad = sum_lazy(|k| Some(TransSeries::monomial(xp(1 - k as i64))), |k| k, cert);
        assert!(matches!(bad.take(3), Err(KernelError::SummabilityViolation { .. })));
    }

    #[test]
    fn rational_powers() {
        let s = poly(&[(1, 2), (1, 0)]);
        let r = BigRational::new(1.into(), 2.into());
        let root = s.pow(&r).unwrap();
        assert!(root.mul(&root).agrees_with(&s, 8).unwrap());
        let sq = s.pow(&BigRational::from_integer(2.into())).unwrap();
        assert!(sq.prefix(5).unwrap().is_exact());
        assert!(poly(&[(2, 1)]).pow(&r).is_err());
    }
}
