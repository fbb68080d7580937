//! The log-exp monomial group.
//!
//! A monomial is `ℓ_0^{r_0} ℓ_1^{r_1} ⋯ exp(L)` where `ℓ_0 = x`,
//! `ℓ_{k+1} = log ℓ_k`, the exponents are rationals and `L` is a finite,
//! purely large sum of monomials. Monomials are ordered through their
//! pre-logarithm `ℓ(m) = Σ r_k ℓ_{k+1} + L`: `m ≺ n` iff `ℓ(m) < ℓ(n)`.
//!
//! Canonical form folds every `c·ℓ_j` (`j ≥ 1`) of the exponential part into
//! the power of `ℓ_{j-1}`, so equal monomials are structurally equal.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::{Arc, OnceLock};

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{KernelError, Result};

static HEIGHT_BOUND: AtomicUsize = AtomicUsize::new(4);
static DEPTH_BOUND: AtomicUsize = AtomicUsize::new(4);

/// Sets the process-wide exponential height and log depth bounds.
pub fn set_bounds(height: usize, depth: usize) {
    HEIGHT_BOUND.store(height, AtomicOrdering::SeqCst);
    DEPTH_BOUND.store(depth, AtomicOrdering::SeqCst);
}

/// Current `(height, depth)` bounds; both default to 4.
pub fn bounds() -> (usize, usize) {
    (
        HEIGHT_BOUND.load(AtomicOrdering::SeqCst),
        DEPTH_BOUND.load(AtomicOrdering::SeqCst),
    )
}

/// A rational linear combination of monomials, sorted by decreasing monomial.
pub type MonoSum = Vec<(BigRational, Monomial)>;

#[derive(Clone)]
pub struct Monomial(Arc<Inner>);

struct Inner {
    logs: Vec<(u32, BigRational)>,
    exp: MonoSum,
    height: u32,
    depth: u32,
    hash: u64,
    dagger: OnceLock<MonoSum>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Monomial {
    fn build(logs: Vec<(u32, BigRational)>, exp: MonoSum) -> Monomial {
        let height = exp.iter().map(|(_, m)| m.height() + 1).max().unwrap_or(0) as u32;
        let depth = logs
            .iter()
            .map(|(k, _)| *k as usize)
            .chain(exp.iter().map(|(_, m)| m.log_depth()))
            .max()
            .unwrap_or(0) as u32;
        let mut h = DefaultHasher::new();
        for (k, r) in &logs {
            k.hash(&mut h);
            r.hash(&mut h);
        }
        0xe5u8.hash(&mut h);
        for (c, m) in &exp {
            c.hash(&mut h);
            m.0.hash.hash(&mut h);
        }
        Monomial(Arc::new(Inner {
            logs,
            exp,
            height,
            depth,
            hash: h.finish(),
            dagger: OnceLock::new(),
        }))
    }

    /// The identity monomial `1`.
    pub fn one() -> Monomial {
        static ONE: OnceLock<Monomial> = OnceLock::new();
        ONE.get_or_init(|| Monomial::build(Vec::new(), Vec::new())).clone()
    }

    /// The variable `x = ℓ_0`.
    pub fn x() -> Monomial {
        Monomial::atom(0)
    }

    /// The iterated logarithm `ℓ_k`, without bound checks.
    pub(crate) fn atom(k: u32) -> Monomial {
        Monomial::build(vec![(k, BigRational::one())], Vec::new())
    }

    /// The iterated logarithm `ℓ_k`, checked against the depth bound.
    pub fn log_iter(k: u32) -> Result<Monomial> {
        let m = Monomial::atom(k);
        m.check_bounds()?;
        Ok(m)
    }

    /// `ℓ_k^r`.
    pub fn power_of_log(k: u32, r: BigRational) -> Result<Monomial> {
        Monomial::from_parts(vec![(k, r)], Vec::new())
    }

    /// `x^r` for an integer `r`.
    pub fn x_pow(r: i64) -> Monomial {
        if r == 0 {
            return Monomial::one();
        }
        Monomial::build(vec![(0, rat(r))], Vec::new())
    }

    /// `x^(n/d)`.
    pub fn x_pow_ratio(n: i64, d: i64) -> Monomial {
        let r = BigRational::new(BigInt::from(n), BigInt::from(d));
        if r.is_zero() {
            return Monomial::one();
        }
        Monomial::build(vec![(0, r)], Vec::new())
    }

    /// Builds a canonical monomial from log powers and an exponential part.
    ///
    /// Every monomial of `exp_terms` must be `≻ 1`; components `c·ℓ_j` with
    /// `j ≥ 1` are absorbed into the power of `ℓ_{j-1}`.
    pub fn from_parts(
        logs: Vec<(u32, BigRational)>,
        exp_terms: Vec<(BigRational, Monomial)>,
    ) -> Result<Monomial> {
        let mut log_acc: Vec<(u32, BigRational)> = Vec::new();
        let push_log = |k: u32, r: BigRational, acc: &mut Vec<(u32, BigRational)>| {
            match acc.iter_mut().find(|(j, _)| *j == k) {
                Some(slot) => slot.1 += r,
                None => acc.push((k, r)),
            }
        };
        for (k, r) in logs {
            push_log(k, r, &mut log_acc);
        }
        let mut exp: MonoSum = Vec::new();
        for (c, m) in exp_terms {
            if c.is_zero() {
                continue;
            }
            if let Some(j) = m.as_atom() {
                if j >= 1 {
                    push_log(j - 1, c, &mut log_acc);
                    continue;
                }
            }
            if mono_cmp(&m, &Monomial::one()) != Ordering::Greater {
                return Err(KernelError::Domain(format!(
                    "exponential part must be purely large, found {m}"
                )));
            }
            exp.push((c, m));
        }
        log_acc.retain(|(_, r)| !r.is_zero());
        log_acc.sort_by_key(|(k, _)| *k);
        let exp = normalize_sum(exp);
        let m = Monomial::build(log_acc, exp);
        m.check_bounds()?;
        Ok(m)
    }

    /// `exp(Σ c_i m_i)` for a finite purely large sum.
    pub fn exp_of(terms: Vec<(BigRational, Monomial)>) -> Result<Monomial> {
        Monomial::from_parts(Vec::new(), terms)
    }

    fn check_bounds(&self) -> Result<()> {
        let (hb, db) = bounds();
        if self.height() > hb {
            return Err(KernelError::Resource(format!(
                "exponential height {} exceeds bound {hb}",
                self.height()
            )));
        }
        if self.log_depth() > db {
            return Err(KernelError::Resource(format!(
                "log depth {} exceeds bound {db}",
                self.log_depth()
            )));
        }
        Ok(())
    }

    /// If this monomial is exactly `ℓ_k`, returns `k`.
    pub fn as_atom(&self) -> Option<u32> {
        if self.0.exp.is_empty() && self.0.logs.len() == 1 && self.0.logs[0].1.is_one() {
            Some(self.0.logs[0].0)
        } else {
            None
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.logs.is_empty() && self.0.exp.is_empty()
    }

    /// Exponents of the iterated logarithms, by increasing index.
    pub fn log_powers(&self) -> &[(u32, BigRational)] {
        &self.0.logs
    }

    /// Exponent of `ℓ_k`.
    pub fn log_power(&self, k: u32) -> BigRational {
        self.0
            .logs
            .iter()
            .find(|(j, _)| *j == k)
            .map(|(_, r)| r.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// The purely large exponent `L` as a decreasing sum.
    pub fn exp_arg_terms(&self) -> &[(BigRational, Monomial)] {
        &self.0.exp
    }

    pub fn height(&self) -> usize {
        self.0.height as usize
    }

    pub fn log_depth(&self) -> usize {
        self.0.depth as usize
    }

    /// Exponential height and maximal atom index used anywhere inside.
    pub fn height_depth(&self) -> (usize, usize) {
        (self.height(), self.log_depth())
    }

    /// The pre-logarithm `Σ r_k ℓ_{k+1} + L` as a decreasing finite sum.
    pub fn pre_log_terms(&self) -> MonoSum {
        let mut out: MonoSum = self
            .0
            .logs
            .iter()
            .map(|(k, r)| (r.clone(), Monomial::atom(k + 1)))
            .collect();
        out.extend(self.0.exp.iter().cloned());
        normalize_sum(out)
    }

    /// Dominant term of the pre-logarithm, `None` for the monomial 1.
    pub fn pre_log_leading(&self) -> Option<(BigRational, Monomial)> {
        let atom = self.0.logs.first().map(|(k, r)| (r.clone(), Monomial::atom(k + 1)));
        let exp = self.0.exp.first().cloned();
        match (atom, exp) {
            (None, e) => e,
            (a, None) => a,
            (Some(a), Some(e)) => {
                if mono_cmp(&a.1, &e.1) == Ordering::Greater {
                    Some(a)
                } else {
                    Some(e)
                }
            }
        }
    }

    /// The logarithmic derivative `m† = ℓ(m)′` as a finite decreasing sum.
    pub fn dagger_terms(&self) -> &MonoSum {
        self.0.dagger.get_or_init(|| {
            let mut out: MonoSum = Vec::new();
            for (k, r) in &self.0.logs {
                // ℓ_{k+1}′ = (ℓ_0 ℓ_1 ⋯ ℓ_k)^{-1}
                let logs = (0..=*k).map(|j| (j, rat(-1))).collect();
                out.push((r.clone(), Monomial::build(logs, Vec::new())));
            }
            for (c, n) in &self.0.exp {
                for (c2, t) in n.dagger_terms() {
                    out.push((c * c2, n.mul(t)));
                }
            }
            normalize_sum(out)
        })
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let logs = merge_logs(&self.0.logs, &other.0.logs, |a, b| a + b);
        let exp = merge_sums(&self.0.exp, &other.0.exp, false);
        Monomial::build(logs, exp)
    }

    pub fn inv(&self) -> Monomial {
        let logs = self.0.logs.iter().map(|(k, r)| (*k, -r)).collect();
        let exp = self.0.exp.iter().map(|(c, m)| (-c, m.clone())).collect();
        Monomial::build(logs, exp)
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        if other.is_one() {
            return self.clone();
        }
        let logs = merge_logs(&self.0.logs, &other.0.logs, |a, b| a - b);
        let exp = merge_sums(&self.0.exp, &other.0.exp, true);
        Monomial::build(logs, exp)
    }

    /// `m^r` for a rational `r` (the group is divisible).
    pub fn pow(&self, r: &BigRational) -> Monomial {
        if r.is_zero() {
            return Monomial::one();
        }
        let logs = self.0.logs.iter().map(|(k, e)| (*k, e * r)).collect();
        let exp = self.0.exp.iter().map(|(c, m)| (c * r, m.clone())).collect();
        Monomial::build(logs, exp)
    }

    pub fn powi(&self, n: i64) -> Monomial {
        self.pow(&rat(n))
    }

    fn structural_eq(&self, other: &Monomial) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash || self.0.height != other.0.height {
            return false;
        }
        self.0.logs == other.0.logs
            && self.0.exp.len() == other.0.exp.len()
            && self
                .0
                .exp
                .iter()
                .zip(other.0.exp.iter())
                .all(|((a, m), (b, n))| a == b && m.structural_eq(n))
    }
}

fn merge_logs(
    a: &[(u32, BigRational)],
    b: &[(u32, BigRational)],
    op: impl Fn(&BigRational, &BigRational) -> BigRational,
) -> Vec<(u32, BigRational)> {
    let zero = BigRational::zero();
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (k, r) = match (a.get(i), b.get(j)) {
            (Some((ka, ra)), Some((kb, rb))) if ka == kb => {
                i += 1;
                j += 1;
                (*ka, op(ra, rb))
            }
            (Some((ka, ra)), Some((kb, _))) if ka < kb => {
                i += 1;
                (*ka, op(ra, &zero))
            }
            (Some((ka, ra)), None) => {
                i += 1;
                (*ka, op(ra, &zero))
            }
            (_, Some((kb, rb))) => {
                j += 1;
                (*kb, op(&zero, rb))
            }
            (None, None) => unreachable!(),
        };
        if !r.is_zero() {
            out.push((k, r));
        }
    }
    out
}

/// Merges two decreasing sums, subtracting the second when `negate` is set.
fn merge_sums(a: &[(BigRational, Monomial)], b: &[(BigRational, Monomial)], negate: bool) -> MonoSum {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some((_, m)), Some((_, n))) => mono_cmp(m, n),
            (Some(_), None) => Ordering::Greater,
            _ => Ordering::Less,
        };
        match ord {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                let (c, n) = &b[j];
                out.push((if negate { -c } else { c.clone() }, n.clone()));
                j += 1;
            }
            Ordering::Equal => {
                let c = if negate { &a[i].0 - &b[j].0 } else { &a[i].0 + &b[j].0 };
                if !c.is_zero() {
                    out.push((c, a[i].1.clone()));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Collapses equal monomials, drops zero coefficients, sorts decreasingly.
pub fn normalize_sum(mut terms: MonoSum) -> MonoSum {
    terms.sort_by(|a, b| mono_cmp(&b.1, &a.1));
    let mut out: MonoSum = Vec::with_capacity(terms.len());
    for (c, m) in terms {
        match out.last_mut() {
            Some((acc, last)) if *last == m => *acc += c,
            _ => out.push((c, m)),
        }
    }
    out.retain(|(c, _)| !c.is_zero());
    out
}

fn cmp_logs(a: &[(u32, BigRational)], b: &[(u32, BigRational)]) -> Ordering {
    match first_log_difference(a, b) {
        None => Ordering::Equal,
        Some((_, d)) => {
            if d.is_positive() {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
    }
}

/// Smallest atom index whose exponents differ, with `r_a − r_b`.
fn first_log_difference(
    a: &[(u32, BigRational)],
    b: &[(u32, BigRational)],
) -> Option<(u32, BigRational)> {
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return None,
            (Some((ka, ra)), Some((kb, rb))) if ka == kb => {
                if ra != rb {
                    return Some((*ka, ra - rb));
                }
                i += 1;
                j += 1;
            }
            (Some((ka, ra)), Some((kb, _))) if ka < kb => return Some((*ka, ra.clone())),
            (Some((ka, ra)), None) => return Some((*ka, ra.clone())),
            (_, Some((kb, rb))) => return Some((*kb, -rb)),
        }
    }
}

/// Leading term of `La − Lb` for two decreasing exponential parts.
fn first_exp_difference(a: &MonoSum, b: &MonoSum) -> Option<(BigRational, Monomial)> {
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return None,
            (Some((ca, m)), None) => return Some((ca.clone(), m.clone())),
            (None, Some((cb, n))) => return Some((-cb, n.clone())),
            (Some((ca, m)), Some((cb, n))) => match mono_cmp(m, n) {
                Ordering::Greater => return Some((ca.clone(), m.clone())),
                Ordering::Less => return Some((-cb, n.clone())),
                Ordering::Equal => {
                    if ca != cb {
                        return Some((ca - cb, m.clone()));
                    }
                    i += 1;
                    j += 1;
                }
            },
        }
    }
}

fn sign_order(c: &BigRational) -> Ordering {
    if c.is_positive() {
        Ordering::Greater
    } else if c.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

/// The group order: `a ≺ b` iff `ℓ(a) < ℓ(b)`.
pub fn mono_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    if a.structural_eq(b) {
        return Ordering::Equal;
    }
    if a.0.exp.is_empty() && b.0.exp.is_empty() {
        return cmp_logs(&a.0.logs, &b.0.logs);
    }
    let atom = first_log_difference(&a.0.logs, &b.0.logs);
    let expd = first_exp_difference(&a.0.exp, &b.0.exp);
    match (atom, expd) {
        (None, None) => Ordering::Equal,
        (Some((_, c)), None) => sign_order(&c),
        (None, Some((c, _))) => sign_order(&c),
        (Some((k, c1)), Some((c2, n))) => match mono_cmp(&Monomial::atom(k + 1), &n) {
            Ordering::Greater => sign_order(&c1),
            Ordering::Less => sign_order(&c2),
            Ordering::Equal => sign_order(&(c1 + c2)),
        },
    }
}

/// Product checked against the configured bounds.
pub fn mono_mul(a: &Monomial, b: &Monomial) -> Result<Monomial> {
    let m = a.mul(b);
    m.check_bounds()?;
    Ok(m)
}

impl PartialEq for Monomial {
    fn eq(&self, other: &Self) -> bool {
        self.structural_eq(other)
    }
}

impl Eq for Monomial {}

impl Hash for Monomial {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state);
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        mono_cmp(self, other)
    }
}

fn atom_name(k: u32) -> String {
    let mut s = String::from("x");
    for _ in 0..k {
        s = format!("log({s})");
    }
    s
}

fn exponent_text(r: &BigRational) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

/// Renders a finite sum `c1*m1 + c2*m2 ...` with exact coefficients.
pub fn render_sum(terms: &[(BigRational, Monomial)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (c, m)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let coeff = if a.is_integer() {
            format!("{}", a.numer())
        } else {
            format!("{}/{}", a.numer(), a.denom())
        };
        if m.is_one() {
            out.push_str(&coeff);
        } else if a.is_one() {
            out.push_str(&m.to_string());
        } else {
            out.push_str(&format!("{coeff}*{m}"));
        }
    }
    out
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut parts: Vec<String> = Vec::new();
        for (k, r) in &self.0.logs {
            if r.is_one() {
                parts.push(atom_name(*k));
            } else {
                parts.push(format!("{}^{}", atom_name(*k), exponent_text(r)));
            }
        }
        if !self.0.exp.is_empty() {
            parts.push(format!("exp({})", render_sum(&self.0.exp)));
        }
        f.write_str(&parts.join("*"))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        rat(n)
    }

    fn e(terms: Vec<(i64, Monomial)>) -> Monomial {
        Monomial::exp_of(terms.into_iter().map(|(c, m)| (r(c), m)).collect()).unwrap()
    }

    #[test]
    fn products() {
        let x = Monomial::x();
        assert!(x.mul(&x.inv()).is_one());
        let m = Monomial::x_pow(2).mul(&e(vec![(1, x.clone())]));
        assert_eq!(m.log_power(0), r(2));
        assert_eq!(m.exp_arg_terms(), &[(r(1), x.clone())][..]);
        let a = e(vec![(1, Monomial::x_pow(2)), (1, x.clone())]);
        let b = e(vec![(-1, x.clone())]);
        assert_eq!(a.mul(&b), e(vec![(1, Monomial::x_pow(2))]));
    }

    #[test]
    fn ordering_examples() {
        let x = Monomial::x();
        let ex = e(vec![(1, x.clone())]);
        assert_eq!(mono_cmp(&ex, &Monomial::x_pow(100)), Ordering::Greater);
        assert_eq!(mono_cmp(&Monomial::atom(1), &x), Ordering::Less);
        assert_eq!(mono_cmp(&x.inv().mul(&ex), &ex), Ordering::Less);
        assert_eq!(mono_cmp(&x.inv(), &Monomial::one()), Ordering::Less);
        assert_eq!(mono_cmp(&e(vec![(-1, x.clone())]), &Monomial::x_pow(-50)), Ordering::Less);
    }

    #[test]
    fn pre_log_examples() {
        let x = Monomial::x();
        assert_eq!(x.pre_log_terms(), vec![(r(1), Monomial::atom(1))]);
        let ex2 = e(vec![(1, Monomial::x_pow(2))]);
        assert_eq!(ex2.pre_log_terms(), vec![(r(1), Monomial::x_pow(2))]);
        let m = Monomial::x_pow(3).mul(&e(vec![(1, x.clone())]));
        assert_eq!(m.pre_log_terms(), vec![(r(1), x.clone()), (r(3), Monomial::atom(1))]);
    }

    #[test]
    fn atoms_are_absorbed() {
        let m = e(vec![(2, Monomial::atom(1)), (1, Monomial::x())]);
        assert_eq!(m.log_power(0), r(2));
        assert_eq!(m.exp_arg_terms().len(), 1);
        assert_eq!(e(vec![(1, Monomial::atom(2))]), Monomial::atom(1));
    }

    #[test]
    fn heights_and_depths() {
        let x = Monomial::x();
        assert_eq!(x.height_depth(), (0, 0));
        assert_eq!(e(vec![(1, Monomial::x_pow(2))]).height_depth(), (1, 0));
        assert_eq!(e(vec![(1, x.mul(&Monomial::atom(1)))]).height_depth(), (1, 1));
    }

    #[test]
    fn exp_argument_must_be_large() {
        assert!(Monomial::exp_of(vec![(r(1), Monomial::x_pow(-1))]).is_err());
    }

    #[test]
    fn height_bound_is_enforced() {
        let mut m = Monomial::x();
        let mut failed = false;
        for _ in 0..6 {
            match Monomial::exp_of(vec![(r(1), m.clone())]) {
                Ok(next) => m = next,
                Err(KernelError::Resource(_)) => {
                    failed = true;
                    break;
                }
                Err(other) => panic!("unexpected {other}"),
            }
        }
        assert!(failed);
        assert_eq!(m.height(), 4);
    }

    #[test]
    fn daggers() {
        let x = Monomial::x();
        assert_eq!(e(vec![(1, x.clone())]).dagger_terms(), &vec![(r(1), Monomial::one())]);
        assert_eq!(x.dagger_terms(), &vec![(r(1), x.inv())]);
        let l1 = Monomial::atom(1);
        assert_eq!(l1.dagger_terms(), &vec![(r(1), x.mul(&l1).inv())]);
    }

    #[test]
    fn rendering() {
        let m = Monomial::x_pow_ratio(3, 2)
            .mul(&Monomial::atom(1).inv())
            .mul(&e(vec![(1, Monomial::x_pow(2)), (-3, Monomial::x())]));
        assert_eq!(m.to_string(), "x^(3/2)*log(x)^-1*exp(x^2 - 3*x)");
        assert_eq!(Monomial::atom(2).to_string(), "log(log(x))");
    }
}
