use std::sync::Arc;

use super::{
    CoeffSeq, Family, Fuel, GridCertificate, Member, MemberSpec, SumSource, TransSeries,
};
use crate::error::{KernelError, Result};
use crate::monomials::Monomial;

/// A map on monomials, extended to series by strong linearity.
pub trait MonomialMap: Send + Sync {
    fn image(&self, m: &Monomial) -> Result<TransSeries>;

    /// A monomial dominating the image of `m` and of every smaller monomial.
    fn image_bound(&self, _m: &Monomial, image: &TransSeries, fuel: &Fuel) -> Result<Option<Monomial>> {
        Ok(image.leading_with(fuel)?.map(|t| t.mono))
    }

    /// A grid containing the images of every monomial of `cert`, if known.
    fn image_certificate(&self, cert: &GridCertificate) -> Option<GridCertificate>;

    /// Whether `m ↦ image(m)` is a monoid morphism.
    fn is_multiplicative(&self) -> bool {
        false
    }
}

/// A monomial map with `image(m) ⊆ m·(shift ratios)⁺`.
pub trait ContractingMap: MonomialMap {
    fn shift_ratios(&self) -> Vec<Monomial>;
}

type ImageFn = dyn Fn(&Monomial) -> Result<TransSeries> + Send + Sync;
type CertFn = dyn Fn(&GridCertificate) -> Option<GridCertificate> + Send + Sync;

/// A monomial map given by closures.
#[derive(Clone)]
pub struct FnMap {
    image: Arc<ImageFn>,
    cert: Arc<CertFn>,
    multiplicative: bool,
    shift: Vec<Monomial>,
}

impl FnMap {
    pub fn new(
        image: impl Fn(&Monomial) -> Result<TransSeries> + Send + Sync + 'static,
        cert: impl Fn(&GridCertificate) -> Option<GridCertificate> + Send + Sync + 'static,
    ) -> FnMap {
        FnMap { image: Arc::new(image), cert: Arc::new(cert), multiplicative: false, shift: Vec::new() }
    }

    pub fn multiplicative(mut self) -> FnMap {
        self.multiplicative = true;
        self
    }

    /// `m ↦ m·t` for a fixed infinitesimal `t`.
    pub fn shift_by(t: Monomial) -> FnMap {
        let (a, b) = (t.clone(), t.clone());
        let mut map = FnMap::new(
            move |m| Ok(TransSeries::monomial(m.mul(&a))),
            move |c| Some(c.scale(&b).with_ratios(std::slice::from_ref(&b))),
        );
        map.shift = vec![t];
        map
    }

    /// The zero map.
    pub fn zero() -> FnMap {
        FnMap::new(|_| Ok(TransSeries::zero()), |_| Some(GridCertificate::empty()))
    }
}

impl MonomialMap for FnMap {
    fn image(&self, m: &Monomial) -> Result<TransSeries> {
        (self.image)(m)
    }

    fn image_certificate(&self, cert: &GridCertificate) -> Option<GridCertificate> {
        (self.cert)(cert)
    }

    fn is_multiplicative(&self) -> bool {
        self.multiplicative
    }
}

impl ContractingMap for FnMap {
    fn shift_ratios(&self) -> Vec<Monomial> {
        self.shift.clone()
    }
}

/// The identity on monomials.
pub struct IdentityMap;

impl MonomialMap for IdentityMap {
    fn image(&self, m: &Monomial) -> Result<TransSeries> {
        Ok(TransSeries::monomial(m.clone()))
    }

    fn image_certificate(&self, cert: &GridCertificate) -> Option<GridCertificate> {
        Some(cert.clone())
    }

    fn is_multiplicative(&self) -> bool {
        true
    }
}

struct ExtendFamily {
    map: Arc<dyn MonomialMap>,
    s: TransSeries,
    i: usize,
}

impl Family for ExtendFamily {
    fn next_member(&mut self, fuel: &Fuel) -> Result<Option<MemberSpec>> {
        let Some(t) = self.s.term_at_with(self.i, fuel)? else {
            return Ok(None);
        };
        let image = self.map.image(&t.mono)?;
        let bound = self.map.image_bound(&t.mono, &image, fuel)?;
        self.i += 1;
        Ok(Some(MemberSpec {
            member: Member::Scaled { coeff: t.coeff, mono: Monomial::one(), base: image },
            bound,
        }))
    }
}

const MULTIPLICATIVE_SAMPLES: usize = 3;
const MULTIPLICATIVE_DEPTH: usize = 8;

fn check_multiplicative(map: &dyn MonomialMap, s: &TransSeries) -> Result<()> {
    let fuel = Fuel::new(super::default_fuel() / 8);
    let mut sample = Vec::new();
    for i in 0..MULTIPLICATIVE_SAMPLES {
        match s.term_at_with(i, &fuel) {
            Ok(Some(t)) => sample.push(t.mono),
            Ok(None) | Err(KernelError::OutOfFuel) => break,
            Err(e) => return Err(e),
        }
    }
    for a in &sample {
        for b in &sample {
            let lhs = map.image(&a.mul(b))?;
            let rhs = map.image(a)?.mul(&map.image(b)?);
            if !lhs.agrees_with(&rhs, MULTIPLICATIVE_DEPTH)? {
                return Err(KernelError::Precondition(format!(
                    "map declared multiplicative fails on {a} and {b}"
                )));
            }
        }
    }
    Ok(())
}

/// `Σ_𝔪 s(𝔪)·map(𝔪)`.
///
/// The map must supply a grid for the images; multiplicative maps are
/// spot-checked on a few support pairs.
pub fn extend_strongly_linear(map: Arc<dyn MonomialMap>, s: &TransSeries) -> Result<TransSeries> {
    let cert = map.image_certificate(s.certificate()).ok_or_else(|| {
        KernelError::Precondition("no common grid for the images of the support".into())
    })?;
    if map.is_multiplicative() {
        check_multiplicative(map.as_ref(), s)?;
    }
    let family = ExtendFamily { map, s: s.clone(), i: 0 };
    Ok(TransSeries::from_source(cert, Box::new(SumSource::new(Box::new(family)))))
}

struct IterFamily {
    phi: Arc<dyn ContractingMap>,
    coeffs: CoeffSeq,
    current: TransSeries,
    last_head: Option<Monomial>,
    k: usize,
}

impl Family for IterFamily {
    fn next_member(&mut self, fuel: &Fuel) -> Result<Option<MemberSpec>> {
        loop {
            fuel.spend(1)?;
            let Some(c) = self.coeffs.get(self.k) else {
                return Ok(None);
            };
            let Some(head) = self.current.leading_with(fuel)? else {
                return Ok(None);
            };
            if let Some(prev) = &self.last_head {
                if head.mono >= *prev {
                    return Err(KernelError::ContractionViolation {
                        monomial: prev.to_string(),
                        image: head.mono.to_string(),
                    });
                }
            }
            let map: Arc<dyn MonomialMap> = Arc::new(Forward(self.phi.clone()));
            let next = extend_strongly_linear(map, &self.current)?;
            let member = self.current.clone();
            self.current = next;
            self.last_head = Some(head.mono.clone());
            self.k += 1;
            if c.is_zero() {
                continue;
            }
            return Ok(Some(MemberSpec {
                member: Member::Scaled { coeff: c, mono: Monomial::one(), base: member },
                bound: Some(head.mono),
            }));
        }
    }
}

struct Forward(Arc<dyn ContractingMap>);

impl MonomialMap for Forward {
    fn image(&self, m: &Monomial) -> Result<TransSeries> {
        self.0.image(m)
    }

    fn image_bound(&self, m: &Monomial, image: &TransSeries, fuel: &Fuel) -> Result<Option<Monomial>> {
        self.0.image_bound(m, image, fuel)
    }

    fn image_certificate(&self, cert: &GridCertificate) -> Option<GridCertificate> {
        self.0.image_certificate(cert)
    }
}

/// `Σ_k c_k·φ^k(s)` for a contracting `φ`.
pub fn iterate_contracting(
    phi: Arc<dyn ContractingMap>,
    coeffs: CoeffSeq,
    s: &TransSeries,
) -> Result<TransSeries> {
    for m in s.certificate().generators() {
        if let Some(t) = phi.image(&m)?.leading()? {
            let bad = if s.certificate().ratios().contains(&m) {
                t.mono >= Monomial::one()
            } else {
                t.mono >= m
            };
            if bad {
                return Err(KernelError::ContractionViolation {
                    monomial: m.to_string(),
                    image: t.mono.to_string(),
                });
            }
        }
    }
    let shift = phi.shift_ratios();
    let cert = s.certificate().with_ratios(&shift);
    let family = IterFamily { phi, coeffs, current: s.clone(), last_head: None, k: 0 };
    Ok(TransSeries::from_source(cert, Box::new(SumSource::new(Box::new(family)))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series_core::{Constant, Term};

    fn xp(n: i64) -> Monomial {
        Monomial::x_pow(n)
    }

    fn one_plus_inv() -> TransSeries {
        TransSeries::from_terms(vec![
            Term::new(Constant::one(), xp(0)),
            Term::new(Constant::one(), xp(-1)),
        ])
    }

    #[test]
    fn identity_extension() {
        let s = one_plus_inv().invert().unwrap();
        let e = extend_strongly_linear(Arc::new(IdentityMap), &s).unwrap();
        assert!(e.agrees_with(&s, 8).unwrap());
    }

    #[test]
    fn shifting_extension() {
        let e = extend_strongly_linear(Arc::new(FnMap::shift_by(xp(-1))), &one_plus_inv()).unwrap();
        let got: Vec<_> = e.take(5).unwrap().into_iter().map(|t| t.mono).collect();
        assert_eq!(got, vec![xp(-1), xp(-2)]);
    }

    #[test]
    fn squaring_is_multiplicative() {
        let sq = FnMap::new(
            |m| Ok(TransSeries::monomial(m.powi(2))),
            |c| {
                let b = c.bases().iter().map(|m| m.powi(2)).collect();
                let r = c.ratios().iter().map(|m| m.powi(2)).collect();
                GridCertificate::new(b, r).ok()
            },
        )
        .multiplicative();
        let map: Arc<dyn MonomialMap> = Arc::new(sq);
        let s = one_plus_inv();
        let lhs = extend_strongly_linear(map.clone(), &s.mul(&s)).unwrap();
        let img = extend_strongly_linear(map, &s).unwrap();
        assert!(lhs.agrees_with(&img.mul(&img), 8).unwrap());
    }

    #[test]
    fn missing_certificate_is_rejected() {
        let m = FnMap::new(|m| Ok(TransSeries::monomial(m.clone())), |_| None);
        assert!(matches!(
            extend_strongly_linear(Arc::new(m), &TransSeries::one()),
            Err(KernelError::Precondition(_))
        ));
    }

    #[test]
    fn contracting_iteration() {
        let phi: Arc<dyn ContractingMap> = Arc::new(FnMap::shift_by(xp(-1)));
        let g = iterate_contracting(phi.clone(), CoeffSeq::ones(), &TransSeries::one()).unwrap();
        let got: Vec<_> = g.take(4).unwrap().into_iter().map(|t| t.mono).collect();
        assert_eq!(got, (0..4).map(|k| xp(-k)).collect::<Vec<_>>());
        let e = iterate_contracting(phi, CoeffSeq::exp(), &TransSeries::one()).unwrap();
        for (k, t) in e.take(6).unwrap().into_iter().enumerate() {
            assert_eq!(t.coeff, Constant::factorial(k).recip().unwrap());
        }
        let z: Arc<dyn ContractingMap> = Arc::new(FnMap::zero());
        let s = one_plus_inv().scale_const(&Constant::from_int(3));
        let r = iterate_contracting(z, CoeffSeq::finite(vec![Constant::from_int(2)]), &s).unwrap();
        assert!(r.agrees_with(&s.scale_const(&Constant::from_int(2)), 5).unwrap());
    }

    #[test]
    fn expanding_maps_are_rejected() {
        let up: Arc<dyn ContractingMap> = Arc::new(FnMap::new(
            |m| Ok(TransSeries::monomial(m.mul(&Monomial::x()))),
            |c| Some(c.clone()),
        ));
        assert!(matches!(
            iterate_contracting(up, CoeffSeq::ones(), &TransSeries::one()),
            Err(KernelError::ContractionViolation { .. })
        ));
    }
}
