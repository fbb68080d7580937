use super::*;
use crate::calculus::{exp_series, OperatorHandle};
use crate::series_core::{CoeffSeq, Term};

fn xp(n: i64) -> Monomial {
    Monomial::x_pow(n)
}

fn int(n: i64) -> Constant {
    Constant::from_int(n)
}

fn mono(n: i64) -> TransSeries {
    TransSeries::monomial(xp(n))
}

fn poly(cs: &[i64]) -> PowerSeries {
    PowerSeries::polynomial(cs.iter().map(|c| TransSeries::constant(int(*c))).collect())
}

fn same(a: &TransSeries, b: &TransSeries, n: usize) -> bool {
    a.agrees_with(b, n).unwrap()
}

fn doubling() -> PowerSeries {
    PowerSeries::lacunary(|k| 1i64.checked_shl(k as u32).unwrap_or(i64::MAX)).unwrap()
}

#[test]
fn derivative_laws() {
    let p = ps_derive(&poly(&[1, 0, 1]));
    assert_eq!(p.degree(), Some(1));
    assert!(same(&p.coeff(0).unwrap(), &TransSeries::zero(), 2));
    assert!(same(&p.coeff(1).unwrap(), &TransSeries::constant(int(2)), 2));

    let g = ps_derive(&PowerSeries::geometric(Monomial::one()));
    for k in 0..6 {
        assert!(same(&g.coeff(k).unwrap(), &TransSeries::constant(int(k as i64 + 1)), 2));
    }
    let h = ps_derive(&PowerSeries::geometric(xp(-1)));
    for k in 0..6 {
        let expected = TransSeries::term(int(k as i64 + 1), xp(-(k as i64) - 1));
        assert!(same(&h.coeff(k).unwrap(), &expected, 2));
    }
}

#[test]
fn composition() {
    let x = PowerSeries::x();
    let p = poly(&[0, 0, 1]);
    let q = poly(&[0, 1, 1]);
    let c = ps_compose(&p, &q).unwrap();
    let expected = [0, 0, 1, 2, 1, 0];
    for (k, e) in expected.iter().enumerate() {
        assert!(same(&c.coeff(k).unwrap(), &TransSeries::constant(int(*e)), 2), "k = {k}");
    }
    let geo = PowerSeries::geometric(xp(-1));
    let id = ps_compose(&geo, &x).unwrap();
    assert!(ps_agree(&id, &geo, 8, 3).unwrap());

    let ones = PowerSeries::geometric(Monomial::one());
    let sq = ps_compose(&ones, &poly(&[0, 0, 1])).unwrap();
    for k in 0..=8 {
        let e = if k % 2 == 0 { 1 } else { 0 };
        assert!(same(&sq.coeff(k).unwrap(), &TransSeries::constant(int(e)), 2));
    }
    assert!(matches!(ps_compose(&p, &poly(&[1, 1])), Err(KernelError::Precondition(_))));
}

#[test]
fn composition_is_associative() {
    let p = PowerSeries::exponential(xp(-1));
    let q = poly(&[0, 1, 1]);
    let r = PowerSeries::polynomial(vec![TransSeries::zero(), TransSeries::one(), mono(-1)]);
    let left = ps_compose(&p, &ps_compose(&q, &r).unwrap()).unwrap();
    let right = ps_compose(&ps_compose(&p, &q).unwrap(), &r).unwrap();
    assert!(ps_agree(&left, &right, 7, 6).unwrap());
}

#[test]
fn convergence_verdicts() {
    let ones = PowerSeries::geometric(Monomial::one());
    assert_eq!(conv_contains(&ones, &mono(-1)).unwrap().verdict, ConvVerdict::CertifiedConvergent);
    let div = conv_contains(&ones, &TransSeries::one()).unwrap();
    assert_eq!(div.verdict, ConvVerdict::CertifiedDivergent);
    assert!(!div.witnesses.is_empty());
    assert_eq!(conv_contains(&ones, &mono(1)).unwrap().verdict, ConvVerdict::CertifiedDivergent);
    assert_eq!(conv_contains(&ones, &TransSeries::zero()).unwrap().verdict, ConvVerdict::CertifiedConvergent);
    assert_eq!(
        conv_contains(&poly(&[1, 2, 3]), &mono(5)).unwrap().verdict,
        ConvVerdict::CertifiedConvergent
    );
}

#[test]
fn lacunary_series_converges_everywhere_but_is_not_a_polynomial() {
    let p = doubling();
    for n in [-3, -1, 0, 1, 2, 5] {
        let r = conv_contains(&p, &mono(n)).unwrap();
        assert_eq!(r.verdict, ConvVerdict::CertifiedConvergent, "δ = x^{n}: {r}");
    }
    let r = cut_member(&p, &CutSpec::Empty, 6).unwrap();
    assert_eq!(r.verdict, CutVerdict::NonMember);

    // Σ x^{-2^k} x^k, summed directly.
    let v = ps_eval(&p, &mono(1)).unwrap();
    let direct = TransSeries::from_terms((0..6).map(|k| Term::new(int(1), xp(k - (1i64 << k)))).collect());
    assert!(same(&v, &direct, 5));
}

#[test]
fn evaluation() {
    let ones = PowerSeries::geometric(Monomial::one());
    let v = ps_eval(&ones, &mono(-1)).unwrap();
    let oracle = TransSeries::one().sub(&mono(-1)).invert().unwrap();
    assert!(same(&v, &oracle, 10));

    let e = ps_eval(&PowerSeries::exponential(Monomial::one()), &mono(-1)).unwrap();
    assert!(same(&e, &exp_series(&mono(-1)).unwrap(), 8));

    let s = TransSeries::from_terms(vec![Term::new(int(3), xp(2)), Term::new(int(-1), xp(-1))]);
    assert!(same(&ps_eval(&PowerSeries::x(), &s).unwrap(), &s, 4));

    assert!(matches!(
        ps_eval(&ones, &TransSeries::one()),
        Err(KernelError::EvaluationRefused { .. })
    ));
}

#[test]
fn translation() {
    let ones = PowerSeries::geometric(Monomial::one());
    let t0 = ps_translate(&ones, &TransSeries::zero()).unwrap();
    assert!(ps_agree(&t0, &ones, 6, 3).unwrap());

    let t = ps_translate(&ones, &mono(-1)).unwrap();
    let oracle = TransSeries::one().sub(&mono(-1)).invert().unwrap();
    assert!(same(&t.coeff(0).unwrap(), &oracle, 8));
    // (1 - ε)^{-2} for the first coefficient
    assert!(same(&t.coeff(1).unwrap(), &oracle.mul(&oracle), 8));

    let eps = TransSeries::from_terms(vec![Term::new(int(2), xp(3)), Term::new(int(1), xp(-1))]);
    let lin = ps_translate(&poly(&[1, 1]), &eps).unwrap();
    assert!(same(&lin.coeff(0).unwrap(), &TransSeries::one().add(&eps), 4));
    assert!(same(&lin.coeff(1).unwrap(), &TransSeries::one(), 2));

    assert!(matches!(ps_translate(&ones, &TransSeries::one()), Err(KernelError::Precondition(_))));
}

#[test]
fn translation_law() {
    let ones = PowerSeries::geometric(Monomial::one());
    let eps = mono(-1);
    let delta = TransSeries::term(int(3), xp(-2));
    let left = ps_eval(&ones, &eps.add(&delta)).unwrap();
    let right = ps_eval(&ps_translate(&ones, &eps).unwrap(), &delta).unwrap();
    let oracle = TransSeries::one().sub(&eps).sub(&delta).invert().unwrap();
    assert!(same(&left, &oracle, 8));
    assert!(same(&right, &oracle, 8));
}

#[test]
fn cut_ordering() {
    let all = CutSpec::All;
    assert_eq!(cut_compare((&xp(1), 1), (&xp(2), 0), &all).unwrap(), CutOrder::Less);
    assert_eq!(cut_compare((&xp(2), 0), (&xp(1), 1), &all).unwrap(), CutOrder::Greater);
    let one = Monomial::one();
    assert_eq!(cut_compare((&one, 1), (&one, 0), &CutSpec::Empty).unwrap(), CutOrder::Incomparable);
    assert_eq!(cut_compare((&xp(3), 2), (&xp(3), 2), &CutSpec::Empty).unwrap(), CutOrder::Equal);

    let u = xp(-1);
    let k = 3;
    let a = u.powi(-k);
    let b = u.powi(-k - 1);
    let small = CutSpec::Above(Monomial::one());
    assert!(!small.contains(&u).unwrap());
    assert_eq!(cut_compare((&a, 3), (&b, 4), &small).unwrap(), CutOrder::Incomparable);
    let large = CutSpec::Above(xp(-2));
    assert!(large.contains(&u).unwrap());
    assert_eq!(cut_compare((&a, 3), (&b, 4), &large).unwrap(), CutOrder::Greater);
}

#[test]
fn separating_series() {
    let u = xp(-1);
    let p = PowerSeries::geometric(u.inv());
    let below = cut_member(&p, &CutSpec::Above(Monomial::one()), 5).unwrap();
    assert_eq!(below.verdict, CutVerdict::NonMember);
    assert_eq!(below.witnesses.len(), 5);
    for w in below.witnesses.windows(2) {
        let order = cut_compare((&w[0].0, w[0].1), (&w[1].0, w[1].1), &CutSpec::Above(Monomial::one())).unwrap();
        assert_ne!(order, CutOrder::Greater);
    }
    let above = cut_member(&p, &CutSpec::Above(xp(-2)), 5).unwrap();
    assert_eq!(above.verdict, CutVerdict::Member);
    assert_eq!(cut_member(&p, &CutSpec::AboveEq(u.clone()), 5).unwrap().verdict, CutVerdict::Member);
    assert_eq!(cut_member(&p, &CutSpec::Above(u), 5).unwrap().verdict, CutVerdict::NonMember);
    assert_eq!(cut_member(&poly(&[1, 2]), &CutSpec::Empty, 5).unwrap().verdict, CutVerdict::Member);
    assert_eq!(cut_member(&p, &CutSpec::All, 5).unwrap().verdict, CutVerdict::Member);
}

#[test]
fn cut_evaluation() {
    let ones = PowerSeries::geometric(Monomial::one());
    let s = CutSpec::AboveEq(Monomial::one());
    let v = cut_eval(&ones, &s, &mono(-1)).unwrap();
    assert!(same(&v, &ps_eval(&ones, &mono(-1)).unwrap(), 8));
    assert!(cut_eval(&ones, &CutSpec::Above(Monomial::one()), &mono(-1)).is_err());
    assert!(matches!(cut_eval(&ones, &s, &TransSeries::one()), Err(KernelError::Precondition(_))));

    let p = PowerSeries::geometric(xp(1));
    let t = CutSpec::Above(xp(-2));
    let v = cut_eval(&p, &t, &mono(-2)).unwrap();
    let oracle = TransSeries::one().sub(&mono(-1)).invert().unwrap();
    assert!(same(&v, &oracle, 8));

    let d = TransSeries::term(int(5), xp(-3));
    assert!(same(&cut_eval(&PowerSeries::x(), &t, &d).unwrap(), &d, 2));

    let q = PowerSeries::exponential(Monomial::one());
    let pq = ps_mul(&ones, &q).unwrap();
    let lhs = cut_eval(&pq, &s, &mono(-1)).unwrap();
    let rhs = cut_eval(&ones, &s, &mono(-1)).unwrap().mul(&cut_eval(&q, &s, &mono(-1)).unwrap());
    assert!(same(&lhs, &rhs, 8));
}

#[test]
fn coefficientwise_lifts() {
    let p = PowerSeries::geometric(xp(-1));
    let s = CutSpec::Above(xp(-1));
    let id = lift_coefficientwise(&CoefficientOp::Morphism(OperatorHandle::Identity), &p, &s, &s).unwrap();
    assert!(ps_agree(&id, &p, 6, 2).unwrap());

    let d = lift_coefficientwise(&CoefficientOp::Derivation, &p, &s, &s).unwrap();
    for k in 0..6i64 {
        let expected = TransSeries::term(int(-k), xp(-k - 1));
        assert!(same(&d.coeff(k as usize).unwrap(), &expected, 2));
    }
    assert_eq!(cut_member(&d, &s, 6).unwrap().verdict, CutVerdict::Member);

    let h = OperatorHandle::right_compose(mono(2)).unwrap();
    let target = CutSpec::Above(xp(-2));
    let source = CutSpec::pullback(h.clone(), target.clone());
    let c = lift_coefficientwise(&CoefficientOp::Morphism(h.clone()), &p, &source, &target).unwrap();
    for k in 0..6i64 {
        assert!(same(&c.coeff(k as usize).unwrap(), &mono(-2 * k), 2));
    }
    let c2 = lift_coefficientwise(&CoefficientOp::Morphism(h.clone()), &p, &s, &target).unwrap();
    assert!(ps_agree(&c, &c2, 5, 2).unwrap());
    assert!(lift_coefficientwise(&CoefficientOp::Morphism(h), &p, &s, &s).is_err());
}

#[test]
fn rendering() {
    assert_eq!(poly(&[1, 0, 1]).render(6, 3).unwrap(), "1 + X^2");
    let p = PowerSeries::geometric(xp(-1));
    assert_eq!(p.render(3, 3).unwrap(), "1 + x^-1*X + x^-2*X^2 + O(X^3)");
    let q = PowerSeries::polynomial(vec![
        TransSeries::zero(),
        TransSeries::one().add(&mono(-1)),
        TransSeries::constant(int(-2)),
    ]);
    assert_eq!(q.render(6, 3).unwrap(), "(1 + x^-1)*X - 2*X^2");
    let _ = PowerSeries::with_coeffs(CoeffSeq::ones(), xp(-1));
}
