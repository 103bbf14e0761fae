//! Truncated multivariate power series with exact rational coefficients.
//!
//! A [`Jet`] stores the Taylor coefficients of a function-germ at the origin
//! up to total degree `order`. Everything above `order` is unknown, so binary
//! operations return the smaller of the two input orders and differentiation
//! lowers the order by one.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::Rat;

/// Largest supported number of variables.
pub const MAX_VARS: usize = 16;
/// Largest supported truncation order (exponents are stored in one byte).
pub const MAX_ORDER: u32 = 255;

/// Exponent vector packed one byte per variable, `x1` in the most significant byte.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    packed: u128,
    degree: u16,
}

#[inline]
fn shift(k: usize) -> u32 {
    8 * (MAX_VARS - 1 - k) as u32
}

impl Monomial {
    pub const ONE: Monomial = Monomial { packed: 0, degree: 0 };

    pub fn var(k: usize) -> Monomial {
        assert!(k < MAX_VARS, "variable index {k} exceeds {MAX_VARS}");
        Monomial { packed: 1u128 << shift(k), degree: 1 }
    }

    /// Panics if there are more than [`MAX_VARS`] entries or an exponent
    /// exceeds [`MAX_ORDER`].
    pub fn from_exponents(exps: &[u32]) -> Monomial {
        assert!(exps.len() <= MAX_VARS, "too many variables");
        let mut packed = 0u128;
        let mut degree = 0u32;
        for (k, &e) in exps.iter().enumerate() {
            assert!(e <= MAX_ORDER, "exponent {e} too large");
            packed |= (e as u128) << shift(k);
            degree += e;
        }
        assert!(degree <= u16::MAX as u32);
        Monomial { packed, degree: degree as u16 }
    }

    #[inline]
    pub fn exponent(&self, k: usize) -> u32 {
        ((self.packed >> shift(k)) & 0xff) as u32
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree as u32
    }

    pub fn exponents(&self, num_vars: usize) -> Vec<u32> {
        (0..num_vars).map(|k| self.exponent(k)).collect()
    }

    /// Highest variable index with a nonzero exponent.
    pub fn last_var(&self) -> Option<usize> {
        if self.packed == 0 {
            None
        } else {
            Some(MAX_VARS - 1 - (self.packed.trailing_zeros() / 8) as usize)
        }
    }

    /// Product; the caller guarantees no exponent exceeds 255.
    #[inline]
    fn times(self, other: Monomial) -> Monomial {
        Monomial { packed: self.packed + other.packed, degree: self.degree + other.degree }
    }

    #[inline]
    fn without_var(self, k: usize) -> Monomial {
        debug_assert!(self.exponent(k) > 0);
        Monomial { packed: self.packed - (1u128 << shift(k)), degree: self.degree - 1 }
    }
}

/// Graded order: total degree first, then `x1` before `x2` before ...
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then(other.packed.cmp(&self.packed))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = (0..MAX_VARS).rev().find(|&k| self.exponent(k) > 0).map_or(0, |k| k + 1);
        write!(f, "{:?}", self.exponents(n))
    }
}

/// Every exponent vector in `num_vars` variables of total degree exactly `degree`,
/// in the order of [`Monomial`].
pub fn monomials_of_degree(num_vars: usize, degree: u32) -> Vec<Monomial> {
    fn rec(k: usize, num_vars: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if k + 1 == num_vars {
            cur.push(left);
            out.push(Monomial::from_exponents(cur));
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(k + 1, num_vars, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if num_vars == 0 {
        if degree == 0 {
            out.push(Monomial::ONE);
        }
        return out;
    }
    rec(0, num_vars, degree, &mut Vec::with_capacity(num_vars), &mut out);
    out
}

/// A truncated power series in `num_vars` variables, exact up to total degree `order`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "JetRepr", into = "JetRepr")]
pub struct Jet {
    num_vars: usize,
    order: u32,
    // sorted by `Monomial` order, no zero coefficients, every degree <= order
    terms: Vec<(Monomial, Rat)>,
}

fn check_shape(num_vars: usize, order: u32) {
    assert!(num_vars <= MAX_VARS, "at most {MAX_VARS} variables are supported");
    assert!(order <= MAX_ORDER, "truncation order above {MAX_ORDER}");
}

impl Jet {
    pub fn zero(num_vars: usize, order: u32) -> Jet {
        check_shape(num_vars, order);
        Jet { num_vars, order, terms: Vec::new() }
    }

    pub fn constant(num_vars: usize, order: u32, c: Rat) -> Jet {
        let mut j = Jet::zero(num_vars, order);
        if !c.is_zero() {
            j.terms.push((Monomial::ONE, c));
        }
        j
    }

    pub fn one(num_vars: usize, order: u32) -> Jet {
        Jet::constant(num_vars, order, Rat::one())
    }

    /// The coordinate function `x_{k+1}` (0-based `k`).
    pub fn var(num_vars: usize, order: u32, k: usize) -> Result<Jet> {
        if k >= num_vars {
            return Err(Error::IndexOutOfRange { index: k, num_vars });
        }
        let mut j = Jet::zero(num_vars, order);
        if order >= 1 {
            j.terms.push((Monomial::var(k), Rat::one()));
        }
        Ok(j)
    }

    /// Builds a jet from (exponent vector, coefficient) pairs, summing repeats
    /// and dropping anything above `order`.
    pub fn from_terms<I>(num_vars: usize, order: u32, terms: I) -> Result<Jet>
    where
        I: IntoIterator<Item = (Vec<u32>, Rat)>,
    {
        check_shape(num_vars, order);
        let mut acc: FxHashMap<Monomial, Rat> = FxHashMap::default();
        for (exps, c) in terms {
            if exps.len() != num_vars {
                return Err(Error::Dimension(format!(
                    "exponent vector of length {} in a jet of {num_vars} variables",
                    exps.len()
                )));
            }
            if exps.iter().map(|&e| e as u64).sum::<u64>() > order as u64 {
                continue;
            }
            *acc.entry(Monomial::from_exponents(&exps)).or_default() += &c;
        }
        Ok(Jet::from_map(num_vars, order, acc))
    }

    fn from_map(num_vars: usize, order: u32, acc: FxHashMap<Monomial, Rat>) -> Jet {
        let mut terms: Vec<(Monomial, Rat)> =
            acc.into_iter().filter(|(m, c)| !c.is_zero() && m.degree() <= order).collect();
        terms.sort_unstable_by_key(|a| a.0);
        Jet { num_vars, order, terms }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&Monomial, &Rat)> + '_ {
        self.terms.iter().map(|(m, c)| (m, c))
    }

    /// Number of nonzero terms; emptiness is [`Jet::is_zero`].
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        match self.terms.binary_search_by(|(k, _)| k.cmp(m)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Rat::zero(),
        }
    }

    pub fn coeff_of(&self, exps: &[u32]) -> Rat {
        if exps.len() != self.num_vars {
            return Rat::zero();
        }
        self.coeff(&Monomial::from_exponents(exps))
    }

    /// Value at the origin.
    pub fn constant_term(&self) -> Rat {
        match self.terms.first() {
            Some((m, c)) if m.degree() == 0 => c.clone(),
            _ => Rat::zero(),
        }
    }

    /// Coefficient of `x_{k+1}`, i.e. the k-th partial derivative at the origin.
    pub fn linear_coeff(&self, k: usize) -> Rat {
        if k >= self.num_vars {
            return Rat::zero();
        }
        self.coeff(&Monomial::var(k))
    }

    /// Gradient at the origin.
    pub fn differential(&self) -> Vec<Rat> {
        (0..self.num_vars).map(|k| self.linear_coeff(k)).collect()
    }

    /// Lowest degree carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.terms.first().map(|(m, _)| m.degree())
    }

    pub fn truncate(&self, order: u32) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        let terms = self.terms.iter().take_while(|(m, _)| m.degree() <= order).cloned().collect();
        Jet { num_vars: self.num_vars, order, terms }
    }

    /// Declares a polynomial exact to a higher order. Only sound when the jet
    /// is known to be an honest polynomial (e.g. a linear change of coordinates).
    pub fn assume_polynomial(&self, order: u32) -> Jet {
        check_shape(self.num_vars, order);
        let mut j = self.truncate(order);
        j.order = order;
        j
    }

    fn assert_compatible(&self, other: &Jet) {
        assert_eq!(self.num_vars, other.num_vars, "jets in different numbers of variables");
    }

    pub fn scale(&self, c: &Rat) -> Jet {
        if c.is_zero() {
            return Jet::zero(self.num_vars, self.order);
        }
        let terms = self.terms.iter().map(|(m, v)| (*m, v * c)).collect();
        Jet { num_vars: self.num_vars, order: self.order, terms }
    }

    fn merge(&self, other: &Jet, negate_other: bool) -> Jet {
        self.assert_compatible(other);
        let order = self.order.min(other.order);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        let sign = |c: &Rat| if negate_other { -c } else { c.clone() };
        while i < a.len() || j < b.len() {
            let pick = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            let (m, c) = match pick {
                Ordering::Less => {
                    i += 1;
                    (a[i - 1].0, a[i - 1].1.clone())
                }
                Ordering::Greater => {
                    j += 1;
                    (b[j - 1].0, sign(&b[j - 1].1))
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (a[i - 1].0, &a[i - 1].1 + &sign(&b[j - 1].1))
                }
            };
            if m.degree() > order {
                break;
            }
            if !c.is_zero() {
                out.push((m, c));
            }
        }
        Jet { num_vars: self.num_vars, order, terms: out }
    }

    /// Truncated product; the order of the result is the smaller input order.
    pub fn checked_mul(&self, other: &Jet) -> Result<Jet> {
        if self.num_vars != other.num_vars {
            return Err(Error::Dimension(format!(
                "cannot multiply jets in {} and {} variables",
                self.num_vars, other.num_vars
            )));
        }
        Ok(self.mul_impl(other))
    }

    /// Product whose order uses the valuations of the factors: a factor
    /// known to order `p` times one of valuation `v` is exact to `p + v`.
    pub fn mul_sharp(&self, other: &Jet) -> Jet {
        self.assert_compatible(other);
        let (Some(va), Some(vb)) = (self.valuation(), other.valuation()) else {
            return Jet::zero(self.num_vars, self.order.min(other.order));
        };
        let order = (self.order + vb).min(other.order + va).min(MAX_ORDER);
        self.mul_to(other, order)
    }

    fn mul_impl(&self, other: &Jet) -> Jet {
        self.mul_to(other, self.order.min(other.order))
    }

    fn mul_to(&self, other: &Jet, order: u32) -> Jet {
        if self.is_zero() || other.is_zero() {
            return Jet::zero(self.num_vars, order);
        }
        // a scalar factor keeps the other side sorted
        if self.terms.len() == 1 && self.terms[0].0.degree() == 0 && order <= other.order {
            return other.truncate(order).scale(&self.terms[0].1);
        }
        if other.terms.len() == 1 && other.terms[0].0.degree() == 0 && order <= self.order {
            return self.truncate(order).scale(&other.terms[0].1);
        }
        let mut acc: FxHashMap<Monomial, Rat> =
            FxHashMap::with_capacity_and_hasher(self.terms.len().max(other.terms.len()) * 2, Default::default());
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            if da > order {
                break;
            }
            let budget = order - da;
            for (mb, cb) in &other.terms {
                if mb.degree() > budget {
                    break;
                }
                let p = ca * cb;
                match acc.entry(ma.times(*mb)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += &p,
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(p);
                    }
                }
            }
        }
        Jet::from_map(self.num_vars, order, acc)
    }

    pub fn pow(&self, exp: u32) -> Jet {
        let mut acc = Jet::one(self.num_vars, self.order);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative in `x_{k+1}`. The result is exact to one
    /// degree less than the input (clamped at zero).
    pub fn derive(&self, k: usize) -> Result<Jet> {
        if k >= self.num_vars {
            return Err(Error::IndexOutOfRange { index: k, num_vars: self.num_vars });
        }
        Ok(self.derive_unchecked(k))
    }

    pub(crate) fn derive_unchecked(&self, k: usize) -> Jet {
        let order = self.order.saturating_sub(1);
        let mut acc: FxHashMap<Monomial, Rat> = FxHashMap::default();
        for (m, c) in &self.terms {
            let e = m.exponent(k);
            if e == 0 || m.degree() - 1 > order {
                continue;
            }
            acc.insert(m.without_var(k), c * &Rat::from_int(e as i64));
        }
        Jet::from_map(self.num_vars, order, acc)
    }

    /// `1 / self` for a jet with nonzero constant term.
    pub fn recip(&self) -> Result<Jet> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::Singular);
        }
        let inv0 = c0.recip();
        // 1/(c0 (1 - w)) = inv0 * sum w^k with w = 1 - self/c0
        let w = &Jet::one(self.num_vars, self.order) - &self.scale(&inv0);
        let one = Jet::one(self.num_vars, self.order);
        let mut s = one.clone();
        for _ in 0..self.order {
            s = &one + &(&w * &s);
        }
        Ok(s.scale(&inv0))
    }

    /// Substitutes `subs[k]` for `x_{k+1}`. Every substituted jet must have
    /// zero constant term; the result is exact to the smallest order involved.
    pub fn compose(&self, subs: &[Jet]) -> Result<Jet> {
        if subs.len() != self.num_vars {
            return Err(Error::Dimension(format!(
                "composition needs {} inner components, got {}",
                self.num_vars,
                subs.len()
            )));
        }
        let Some(first) = subs.first() else {
            return Ok(self.clone());
        };
        let p = first.num_vars;
        let mut order = self.order;
        for (i, s) in subs.iter().enumerate() {
            if s.num_vars != p {
                return Err(Error::Dimension("inner components have different numbers of variables".into()));
            }
            if !s.constant_term().is_zero() {
                return Err(Error::NonzeroConstant { component: i + 1 });
            }
            order = order.min(s.order);
        }
        let subs: Vec<Jet> = subs.iter().map(|s| s.truncate(order)).collect();
        let mut memo = Composer::new(&subs, p, order);
        let mut acc: FxHashMap<Monomial, Rat> = FxHashMap::default();
        for (m, c) in &self.terms {
            if m.degree() > order {
                break;
            }
            let value = memo.value(*m);
            for (mm, cc) in &value.terms {
                *acc.entry(*mm).or_default() += &(c * cc);
            }
        }
        Ok(Jet::from_map(p, order, acc))
    }

    /// Re-expresses this jet in a ring with `num_vars` variables, sending
    /// `x_{k+1}` to `x_{mapping[k]+1}`.
    pub fn embed(&self, num_vars: usize, mapping: &[usize]) -> Result<Jet> {
        if mapping.len() != self.num_vars || mapping.iter().any(|&k| k >= num_vars) {
            return Err(Error::Dimension("invalid variable embedding".into()));
        }
        check_shape(num_vars, self.order);
        let mut acc: FxHashMap<Monomial, Rat> = FxHashMap::default();
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; num_vars];
            for (k, &target) in mapping.iter().enumerate() {
                exps[target] += m.exponent(k);
            }
            *acc.entry(Monomial::from_exponents(&exps)).or_default() += c;
        }
        Ok(Jet::from_map(num_vars, self.order, acc))
    }

    /// Evaluates the retained polynomial at a rational point.
    pub fn eval(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.num_vars);
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = c.clone();
                for (k, x) in point.iter().enumerate() {
                    let e = m.exponent(k);
                    if e > 0 {
                        v = &v * &x.pow(e);
                    }
                }
                v
            })
            .sum()
    }

    /// Formats with custom variable names.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        JetDisplay { jet: self, names }
    }
}

struct Composer<'a> {
    subs: &'a [Jet],
    memo: FxHashMap<Monomial, Jet>,
}

impl<'a> Composer<'a> {
    fn new(subs: &'a [Jet], p: usize, order: u32) -> Self {
        let mut memo = FxHashMap::default();
        memo.insert(Monomial::ONE, Jet::one(p, order));
        Composer { subs, memo }
    }

    fn value(&mut self, m: Monomial) -> &Jet {
        if !self.memo.contains_key(&m) {
            let k = m.last_var().expect("constant monomial is always memoized");
            let prev = m.without_var(k);
            self.value(prev);
            let v = &self.memo[&prev] * &self.subs[k];
            self.memo.insert(m, v);
        }
        &self.memo[&m]
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.merge(rhs, false)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.merge(rhs, true)
    }
}

/// Panics if the variable counts differ; use [`Jet::checked_mul`] otherwise.
impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.assert_compatible(rhs);
        self.mul_impl(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(&Rat::from_int(-1))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

struct JetDisplay<'a> {
    jet: &'a Jet,
    names: &'a [String],
}

impl fmt::Display for JetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.jet.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.jet.terms.iter().enumerate() {
            let negative = c.signum() < 0;
            let abs = c.abs();
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if m.degree() == 0 || !abs.is_one() {
                factors.push(abs.to_string());
            }
            for k in 0..self.jet.num_vars {
                match m.exponent(k) {
                    0 => {}
                    1 => factors.push(self.names[k].clone()),
                    e => factors.push(format!("{}^{e}", self.names[k])),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

pub(crate) fn default_names(num_vars: usize) -> Vec<String> {
    (1..=num_vars).map(|k| format!("x{k}")).collect()
}

/// Serialized form: exponent vectors with rational coefficients as strings.
#[derive(Serialize, Deserialize)]
struct JetRepr {
    num_vars: usize,
    order: u32,
    terms: Vec<(Vec<u32>, Rat)>,
}

impl From<Jet> for JetRepr {
    fn from(j: Jet) -> JetRepr {
        let terms = j.terms.iter().map(|(m, c)| (m.exponents(j.num_vars), c.clone())).collect();
        JetRepr { num_vars: j.num_vars, order: j.order, terms }
    }
}

impl TryFrom<JetRepr> for Jet {
    type Error = Error;

    fn try_from(r: JetRepr) -> Result<Jet> {
        if r.num_vars == 0 || r.num_vars > MAX_VARS || r.order > MAX_ORDER {
            return Err(Error::InvalidArgument("jet dimensions out of range".into()));
        }
        if r.terms.iter().any(|(e, _)| e.len() != r.num_vars || e.iter().map(|&x| x as u64).sum::<u64>() > r.order as u64) {
            return Err(Error::InvalidArgument("jet term outside the truncation".into()));
        }
        Jet::from_terms(r.num_vars, r.order, r.terms)
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names(self.num_vars);
        let shown = self.display_with(&names);
        write!(f, "{shown}")
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({})", self, self.order + 1)
    }
}
