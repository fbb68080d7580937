#![allow(dead_code)]

use std::collections::BTreeMap;

use num::{BigInt, BigRational, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use transseries::series_core::{Prefix, Tail, Term};
use transseries::{Constant, Monomial, TransSeries};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Constant {
    Constant::from_int(n)
}

pub fn xp(n: i64) -> Monomial {
    Monomial::x_pow(n)
}

pub fn x_to(n: i64) -> TransSeries {
    TransSeries::monomial(xp(n))
}

pub fn c(n: i64) -> TransSeries {
    TransSeries::constant(int(n))
}

pub fn log_x() -> Monomial {
    Monomial::power_of_log(1, rat(1, 1)).unwrap()
}

pub fn log_pow(b: i64) -> Monomial {
    if b == 0 {
        Monomial::one()
    } else {
        Monomial::power_of_log(1, rat(b, 1)).unwrap()
    }
}

/// `e^{c·x^a}` for `a > 0`.
pub fn exp_x(c: i64, a: i64) -> Monomial {
    Monomial::exp_of(vec![(rat(c, 1), xp(a))]).unwrap()
}

/// `x^a ℓ^b e^{c x}`.
pub fn mono(a: i64, b: i64, c: i64) -> Monomial {
    let m = xp(a).mul(&log_pow(b));
    if c == 0 {
        m
    } else {
        m.mul(&exp_x(c, 1))
    }
}

pub fn random_monomial(r: &mut StdRng, with_exp: bool) -> Monomial {
    let c = if with_exp && r.gen_bool(0.25) { r.gen_range(-1..=1) } else { 0 };
    mono(r.gen_range(-3..=3), r.gen_range(-1..=1), c)
}

pub fn random_infinitesimal(r: &mut StdRng) -> Monomial {
    loop {
        let m = mono(r.gen_range(-3..=1), r.gen_range(-1..=1), 0);
        if m < Monomial::one() {
            return m;
        }
    }
}

pub fn random_finite(r: &mut StdRng, with_exp: bool) -> TransSeries {
    let n = r.gen_range(1..=4);
    let mut out = TransSeries::zero();
    for _ in 0..n {
        let mut k = r.gen_range(1..=5);
        if r.gen_bool(0.5) {
            k = -k;
        }
        out = out.add(&TransSeries::term(int(k), random_monomial(r, with_exp)));
    }
    out
}

/// A random grid series; about half have infinite support.
pub fn random_series(r: &mut StdRng, with_exp: bool) -> TransSeries {
    loop {
        let base = random_finite(r, with_exp);
        if base.is_zero().unwrap() {
            continue;
        }
        if r.gen_bool(0.5) {
            return base;
        }
        let eps = random_infinitesimal(r);
        // A tail whose ratio divides two base monomials can cancel down to
        // a finite series that is only known lazily; zero tests on such
        // series exhaust the fuel instead of terminating.
        let monos: Vec<Monomial> = base.take(8).unwrap().into_iter().map(|t| t.mono).collect();
        if monos.iter().any(|m| monos.iter().any(|n| m.div(n) == eps || n.div(m) == eps)) {
            continue;
        }
        let eps = TransSeries::monomial(eps);
        let tail = match r.gen_range(0..3) {
            0 => TransSeries::one().sub(&eps).invert().unwrap(),
            1 => transseries::calculus::exp_series(&eps).unwrap(),
            _ => TransSeries::one().add(&eps.scale_const(&int(2))).invert().unwrap(),
        };
        return base.mul(&tail);
    }
}

pub fn rational(c: &Constant) -> BigRational {
    c.as_rational().cloned().expect("exact coefficient")
}

/// Coefficients of the product of two finite term lists, computed pairwise.
pub fn brute_product(a: &[Term], b: &[Term]) -> BTreeMap<Monomial, BigRational> {
    let mut out: BTreeMap<Monomial, BigRational> = BTreeMap::new();
    for s in a {
        for t in b {
            *out.entry(s.mono.mul(&t.mono)).or_insert_with(BigRational::zero) += rational(&s.coeff) * rational(&t.coeff);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Product terms that no unseen term of either factor can reach, given
/// `k`-term prefixes of `a` and `b`, together with the floor below which
/// the brute-force product is incomplete.
pub fn exact_product_prefix(a: &TransSeries, b: &TransSeries, k: usize) -> (Vec<(Monomial, BigRational)>, Option<Monomial>) {
    let (pa, pb) = (a.prefix(k).unwrap(), b.prefix(k).unwrap());
    let full = brute_product(&pa.terms, &pb.terms);
    let unseen = |p: &Prefix| -> Option<Monomial> {
        match &p.tail {
            Tail::Exact => None,
            Tail::More(m) | Tail::Stalled(Some(m)) => Some(m.clone()),
            Tail::Stalled(None) => panic!("no bound on the unseen terms"),
        }
    };
    let reach = |p: &Prefix, q: &Prefix| Some(unseen(p)?.mul(&q.terms.first()?.mono));
    let floor = [reach(&pa, &pb), reach(&pb, &pa)].into_iter().flatten().max();
    let terms = full.into_iter().rev().filter(|(m, _)| floor.as_ref().is_none_or(|f| m > f)).collect();
    (terms, floor)
}
