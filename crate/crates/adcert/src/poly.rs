//! Univariate polynomials over exact rationals.
//!
//! Coefficients are stored dense in ascending order with no trailing zeros;
//! the zero polynomial is the empty vector. Root counting is exact: Sturm
//! sequences count distinct real roots in an interval, and rational roots
//! are recovered by divisor enumeration on the primitive integer form.

use crate::rat::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Extended real used for interval endpoints.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ext {
    NegInf,
    Fin(Rat),
    PosInf,
}

impl Ext {
    pub fn fin(&self) -> Option<&Rat> {
        match self {
            Ext::Fin(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::NegInf => write!(f, "-inf"),
            Ext::Fin(r) => write!(f, "{}", r),
            Ext::PosInf => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poly(Vec<Rat>);

impl Poly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Rat) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Poly(vec![Rat::zero(), Rat::one()])
    }

    /// `a + b*x`.
    pub fn linear(a: Rat, b: Rat) -> Self {
        Poly::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree of the polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.0.last()
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.0.iter().rev() {
            acc = &acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.0.iter().rev() {
            acc = acc * x + c.to_f64();
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Rat::from_int(i as i64) * c)
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.0.get(i).cloned().unwrap_or_default();
            let b = other.0.get(i).cloned().unwrap_or_default();
            out.push(a + b);
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rat::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Poly::new(out)
    }

    /// `self(inner(x))`, by Horner over polynomials.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.0.iter().rev() {
            acc = acc.mul(inner).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Exact euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let mut rem = self.0.clone();
        let dd = divisor.degree();
        let lead = divisor.leading().unwrap().clone();
        if rem.len() <= dd {
            return (Poly::zero(), Poly::new(rem));
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        while rem.len() > dd && !(rem.len() == 1 && rem[0].is_zero()) {
            let k = rem.len() - 1 - dd;
            let q = rem.last().unwrap() / &lead;
            if !q.is_zero() {
                for (i, c) in divisor.0.iter().enumerate() {
                    rem[k + i] -= &(&q * c);
                }
            }
            quot[k] = q;
            // The leading entry is now exactly zero.
            rem.pop();
            while rem.last().map_or(false, |c| c.is_zero()) {
                rem.pop();
            }
            if rem.len() <= dd {
                break;
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic gcd over the rationals.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        match a.leading() {
            Some(l) if !l.is_one() => a.scale(&l.recip()),
            _ => a,
        }
    }

    /// The squarefree part `p / gcd(p, p')`, monic up to the original sign.
    pub fn squarefree(&self) -> Poly {
        if self.is_zero() || self.degree() == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.clone();
        }
        self.div_rem(&g).0
    }

    /// Sign of `p(x)` as `x -> +inf`.
    fn sign_pos_inf(&self) -> i32 {
        self.leading().map_or(0, |c| c.signum())
    }

    /// Sign of `p(x)` as `x -> -inf`.
    fn sign_neg_inf(&self) -> i32 {
        match self.leading() {
            None => 0,
            Some(c) => {
                if self.degree() % 2 == 0 {
                    c.signum()
                } else {
                    -c.signum()
                }
            }
        }
    }

    fn sign_at_ext(&self, x: &Ext) -> i32 {
        match x {
            Ext::NegInf => self.sign_neg_inf(),
            Ext::Fin(r) => self.eval(r).signum(),
            Ext::PosInf => self.sign_pos_inf(),
        }
    }

    /// Number of distinct real roots in the open interval `(lo, hi)`.
    pub fn count_roots_open(&self, lo: &Ext, hi: &Ext) -> usize {
        if self.is_zero() {
            panic!("root counting on the zero polynomial");
        }
        let mut p = self.squarefree();
        // Divide out roots that sit exactly on a finite endpoint so the
        // classical Sturm bound applies.
        for end in [lo, hi] {
            if let Ext::Fin(r) = end {
                if p.eval(r).is_zero() {
                    let lin = Poly::linear(-r.clone(), Rat::one());
                    let (q, rem) = p.div_rem(&lin);
                    debug_assert!(rem.is_zero());
                    p = q;
                }
            }
        }
        if p.degree() == 0 {
            return 0;
        }
        let chain = sturm_chain(&p);
        let va = variations(&chain, lo);
        let vb = variations(&chain, hi);
        let in_half_open = va.saturating_sub(vb); // roots in (lo, hi]
        let hi_is_root = match hi {
            Ext::Fin(r) => p.eval(r).is_zero(),
            _ => false,
        };
        in_half_open - usize::from(hi_is_root)
    }

    /// All rational roots (distinct), or `None` if the coefficient
    /// factorization exceeds the enumeration budget.
    pub fn rational_roots(&self) -> Option<Vec<Rat>> {
        if self.is_zero() {
            panic!("rational roots of the zero polynomial");
        }
        let mut roots = Vec::new();
        // Integer primitive form: multiply by the lcm of denominators.
        let mut lcm = BigInt::one();
        for c in &self.0 {
            lcm = lcm.lcm(&c.denom());
        }
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        // Factor out x^k.
        let k = ints.iter().position(|c| !c.is_zero()).unwrap_or(0);
        if k > 0 {
            roots.push(Rat::zero());
        }
        let ints = &ints[k..];
        if ints.len() <= 1 {
            return Some(roots);
        }
        let trailing = ints.first().unwrap().abs();
        let leading = ints.last().unwrap().abs();
        let (ps, qs) = (divisors(&trailing)?, divisors(&leading)?);
        for p in &ps {
            for q in &qs {
                for sign in [1i64, -1] {
                    let cand = Rat::from_big(num_rational::BigRational::new(
                        BigInt::from(sign) * p,
                        q.clone(),
                    ));
                    if self.eval(&cand).is_zero() && !roots.contains(&cand) {
                        roots.push(cand);
                    }
                }
            }
        }
        roots.sort();
        Some(roots)
    }

    /// Sign of `p(t)` for `t -> 0^+`: the sign of the lowest nonzero
    /// coefficient (0 for the zero polynomial).
    pub fn sign_at_zero_plus(&self) -> i32 {
        self.0
            .iter()
            .find(|c| !c.is_zero())
            .map_or(0, |c| c.signum())
    }

    /// A positive rational `B` such that `p` has no root in `(0, B)`.
    /// Requires `p` nonzero.
    pub fn positive_root_gap(&self) -> Rat {
        assert!(!self.is_zero());
        let k = self.0.iter().position(|c| !c.is_zero()).unwrap();
        let reduced = &self.0[k..];
        if reduced.len() == 1 {
            return Rat::from_int(1);
        }
        // |root| >= |a0| / (|a0| + max_{i>=1} |a_i|) for a0 != 0.
        let a0 = reduced[0].abs();
        let mut m = Rat::zero();
        for c in &reduced[1..] {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        &a0 / &(&a0 + &m)
    }
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        if chain[n - 1].is_zero() {
            chain.pop();
            break;
        }
        if chain[n - 1].degree() == 0 {
            break;
        }
        let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
        if r.is_zero() {
            break;
        }
        chain.push(r.neg());
    }
    chain
}

fn variations(chain: &[Poly], x: &Ext) -> usize {
    let mut count = 0;
    let mut prev = 0;
    for p in chain {
        let s = p.sign_at_ext(x);
        if s != 0 {
            if prev != 0 && s != prev {
                count += 1;
            }
            prev = s;
        }
    }
    count
}

/// All positive divisors of `n > 0`, or `None` beyond the factoring budget.
fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let mut m = n.to_u128()?;
    if m == 0 {
        return None;
    }
    let mut primes: Vec<(u128, u32)> = Vec::new();
    let mut d = 2u128;
    while d * d <= m && d <= 2_000_000 {
        if m % d == 0 {
            let mut e = 0;
            while m % d == 0 {
                m /= d;
                e += 1;
            }
            primes.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        // Any remaining cofactor below (2e6)^2 is prime.
        if m > 4_000_000_000_000u128 {
            return None;
        }
        primes.push((m, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in primes {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut acc = d.clone();
            next.push(acc.clone());
            for _ in 0..e {
                acc *= BigInt::from(p);
                next.push(acc.clone());
            }
        }
        divs = next;
        if divs.len() > 100_000 {
            return None;
        }
    }
    Some(divs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn poly(cs: &[i64]) -> Poly {
        Poly::new(cs.iter().map(|&c| Rat::from_int(c)).collect())
    }

    #[test]
    fn eval_and_derivative() {
        // p = 1 - 3x + 2x^2
        let p = poly(&[1, -3, 2]);
        assert_eq!(p.eval(&rat(2, 1)), rat(3, 1));
        assert_eq!(p.derivative(), poly(&[-3, 4]));
        assert_eq!(p.eval(&rat(1, 2)), rat(0, 1));
    }

    #[test]
    fn division_exact() {
        let p = poly(&[-1, 0, 1]); // x^2 - 1
        let d = poly(&[1, 1]); // x + 1
        let (q, r) = p.div_rem(&d);
        assert_eq!(q, poly(&[-1, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn sturm_counts_known_roots() {
        // (x-1)(x-2)(x-3)
        let p = poly(&[-6, 11, -6, 1]);
        assert_eq!(p.count_roots_open(&Ext::NegInf, &Ext::PosInf), 3);
        assert_eq!(
            p.count_roots_open(&Ext::Fin(rat(1, 1)), &Ext::Fin(rat(3, 1))),
            1
        );
        assert_eq!(
            p.count_roots_open(&Ext::Fin(rat(0, 1)), &Ext::Fin(rat(10, 1))),
            3
        );
        // Multiple root: (x-1)^2 has one distinct root.
        let sq = poly(&[1, -2, 1]);
        assert_eq!(sq.count_roots_open(&Ext::NegInf, &Ext::PosInf), 1);
        // No real roots.
        let none = poly(&[1, 0, 1]);
        assert_eq!(none.count_roots_open(&Ext::NegInf, &Ext::PosInf), 0);
    }

    #[test]
    fn rational_root_extraction() {
        // 6x^3 - 5x^2 - 2x + 1 has roots 1, -1/2, 1/3.
        let p = poly(&[1, -2, -5, 6]);
        let roots = p.rational_roots().unwrap();
        assert_eq!(roots, vec![rat(-1, 2), rat(1, 3), rat(1, 1)]);
        // x^2 - 2 has no rational roots but two real ones.
        let irr = poly(&[-2, 0, 1]);
        assert!(irr.rational_roots().unwrap().is_empty());
        assert_eq!(irr.count_roots_open(&Ext::NegInf, &Ext::PosInf), 2);
        // x^2 * (x - 3)
        let zr = poly(&[0, 0, -3, 1]);
        assert_eq!(zr.rational_roots().unwrap(), vec![rat(0, 1), rat(3, 1)]);
    }

    #[test]
    fn positive_root_gap_excludes_roots() {
        // Roots at 1/10 and 5: gap must be <= 1/10 and positive.
        let p = poly(&[1, -51, 50]).scale(&rat(1, 10)); // (10x-1)(5x-... sanity below
        let gap = p.positive_root_gap();
        assert!(gap.is_positive());
        assert_eq!(p.count_roots_open(&Ext::Fin(rat(0, 1)), &Ext::Fin(gap)), 0);
    }

    #[test]
    fn compose_works() {
        // p(x) = x^2, inner = x + 1 -> x^2 + 2x + 1
        let p = poly(&[0, 0, 1]);
        let inner = poly(&[1, 1]);
        assert_eq!(p.compose(&inner), poly(&[1, 2, 1]));
    }

    #[test]
    fn sign_at_zero_plus() {
        assert_eq!(poly(&[0, -2, 5]).sign_at_zero_plus(), -1);
        assert_eq!(poly(&[0, 0, 5]).sign_at_zero_plus(), 1);
        assert_eq!(Poly::zero().sign_at_zero_plus(), 0);
    }
}
