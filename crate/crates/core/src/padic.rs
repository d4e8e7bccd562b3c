//! p-adic valuations, base-p digits, and the Legendre / Kummer / Lucas
//! criteria used throughout the bound engine.

use std::fmt;
use std::ops::Add;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A prime, checked once at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Smallest prime strictly greater than `n`.
    pub fn next_above(n: u64) -> Self {
        let mut c = n + 1;
        while !is_prime(c) {
            c += 1;
        }
        Prime(c)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `q = p^k` with `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PrimePower {
    p: Prime,
    k: u32,
    q: u64,
}

impl PrimePower {
    pub fn new(p: Prime, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::OutOfRange {
                value: "0".into(),
                range: "exponent >= 1".into(),
            });
        }
        let q = p
            .get()
            .checked_pow(k)
            .ok_or(Error::PrimePowerOverflow { p: p.get(), k })?;
        Ok(PrimePower { p, k, q })
    }

    pub fn prime(p: Prime) -> Self {
        PrimePower { p, k: 1, q: p.get() }
    }

    /// Decomposes `q` as `p^k`; fails unless `q` is a prime power.
    pub fn from_modulus(q: u64) -> Result<Self> {
        if is_prime(q) {
            return Ok(Self::prime(Prime(q)));
        }
        if q < 4 {
            return Err(Error::NotPrimePower(q));
        }
        for k in 2..64u32 {
            let r = integer_root(q, k);
            if r < 2 {
                break;
            }
            if r.checked_pow(k) == Some(q) && is_prime(r) {
                return Ok(PrimePower { p: Prime(r), k, q });
            }
        }
        Err(Error::NotPrimePower(q))
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

fn integer_root(n: u64, k: u32) -> u64 {
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && r.checked_pow(k).is_none_or(|v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

/// A p-adic valuation; `Infinity` is reserved for `v_p(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(u64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Valuation::Infinity
    }
}

impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinity,
        }
    }
}

impl Add<u64> for Valuation {
    type Output = Valuation;

    fn add(self, rhs: u64) -> Valuation {
        self + Valuation::Finite(rhs)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_u64(*v),
            Valuation::Infinity => s.serialize_str("inf"),
        }
    }
}

/// `v_p(n)`: the exponent of `p` in `n`, infinite for `n = 0`.
pub fn vp(p: Prime, n: impl Into<BigInt>) -> Valuation {
    let n: BigInt = n.into();
    if n.is_zero() {
        return Valuation::Infinity;
    }
    let mut m = n.magnitude().clone();
    if p.get() == 2 {
        return Valuation::Finite(m.trailing_zeros().unwrap_or(0));
    }
    if let Some(mut small) = m.to_u64() {
        let mut v = 0;
        while small % p.get() == 0 {
            small /= p.get();
            v += 1;
        }
        return Valuation::Finite(v);
    }
    let pb = BigUint::from(p.get());
    let mut v = 0;
    loop {
        let (quot, rem) = m.div_rem(&pb);
        if !rem.is_zero() {
            break;
        }
        m = quot;
        v += 1;
    }
    Valuation::Finite(v)
}

/// Legendre's formula: `v_p(s!) = sum_{j>=1} floor(s / p^j)`.
pub fn vp_factorial(p: Prime, s: impl Into<BigUint>) -> Valuation {
    let pb = BigUint::from(p.get());
    let mut s: BigUint = s.into();
    let mut total = BigUint::zero();
    while !s.is_zero() {
        s /= &pb;
        total += &s;
    }
    Valuation::Finite(total.to_u64().expect("valuation exceeds u64"))
}

/// Base-`p` digits of `n`, least significant first. Zero has no digits.
pub fn digits_lsf(p: Prime, n: &BigUint) -> Vec<u64> {
    let mut out = Vec::new();
    if let Some(mut small) = n.to_u64() {
        while small > 0 {
            out.push(small % p.get());
            small /= p.get();
        }
        return out;
    }
    let pb = BigUint::from(p.get());
    let mut m = n.clone();
    while !m.is_zero() {
        let (quot, rem) = m.div_rem(&pb);
        out.push(rem.to_u64().unwrap_or(0));
        m = quot;
    }
    out
}

/// Kummer's theorem: `v_p(C(a+b, a))` is the number of carries when adding
/// `a` and `b` in base `p`.
pub fn vp_binomial(p: Prime, a: impl Into<BigUint>, b: impl Into<BigUint>) -> Valuation {
    let da = digits_lsf(p, &a.into());
    let db = digits_lsf(p, &b.into());
    let mut carry = 0;
    let mut carries = 0;
    for i in 0..da.len().max(db.len()) {
        let sum = da.get(i).copied().unwrap_or(0) + db.get(i).copied().unwrap_or(0) + carry;
        carry = u64::from(sum >= p.get());
        carries += carry;
    }
    Valuation::Finite(carries)
}

/// Lucas: `p` does not divide `C(x, y)` iff every base-`p` digit of `y` is at
/// most the matching digit of `x`. False whenever `y > x`.
pub fn lucas_nondivisible(p: Prime, x: impl Into<BigUint>, y: impl Into<BigUint>) -> bool {
    let dx = digits_lsf(p, &x.into());
    let dy = digits_lsf(p, &y.into());
    (0..dx.len().max(dy.len()))
        .all(|i| dy.get(i).copied().unwrap_or(0) <= dx.get(i).copied().unwrap_or(0))
}

/// Fixed-width base-`p` expansion, most significant digit first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DigitVector {
    pub p: Prime,
    pub digits: Vec<u64>,
}

impl DigitVector {
    pub fn width(&self) -> usize {
        self.digits.len()
    }

    pub fn value(&self) -> u64 {
        self.digits.iter().fold(0, |acc, &d| acc * self.p.get() + d)
    }

    pub fn least_significant_first(&self) -> impl Iterator<Item = u64> + '_ {
        self.digits.iter().rev().copied()
    }

    /// Count of trailing (least significant) zero digits; equals `v_p` of the
    /// value when it is nonzero.
    pub fn trailing_zeros(&self) -> usize {
        self.digits.iter().rev().take_while(|&&d| d == 0).count()
    }
}

impl fmt::Display for DigitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        write!(f, "({})_{}", parts.join(","), self.p)
    }
}

/// Width-`k` digit vector of `s` for `0 <= s < q`.
pub fn to_digits(pp: &PrimePower, s: u64) -> Result<DigitVector> {
    if s >= pp.q() {
        return Err(Error::OutOfRange {
            value: s.to_string(),
            range: format!("[0, {})", pp.q()),
        });
    }
    let p = pp.p().get();
    let mut digits = vec![0; pp.k() as usize];
    let mut rest = s;
    for slot in digits.iter_mut().rev() {
        *slot = rest % p;
        rest /= p;
    }
    Ok(DigitVector { p: pp.p(), digits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    fn binomial(n: u64, k: u64) -> BigUint {
        let mut acc = BigUint::one();
        for i in 0..k {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    }

    // Independent oracle: strip factors of p by repeated division.
    fn strip(p: u64, n: &BigUint) -> u64 {
        let pb = BigUint::from(p);
        let mut m = n.clone();
        let mut v = 0;
        while (&m % &pb).is_zero() {
            m /= &pb;
            v += 1;
        }
        v
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(3_215_031_751));
        assert!(Prime::new(9).is_err());
        assert_eq!(Prime::next_above(7).get(), 11);
    }

    #[test]
    fn prime_power_decomposition() {
        let pp = PrimePower::from_modulus(27).unwrap();
        assert_eq!((pp.p().get(), pp.k(), pp.q()), (3, 3, 27));
        assert_eq!(PrimePower::from_modulus(2).unwrap().k(), 1);
        assert_eq!(PrimePower::from_modulus(1 << 40).unwrap().k(), 40);
        assert!(PrimePower::from_modulus(12).is_err());
        assert!(PrimePower::from_modulus(1).is_err());
        assert!(PrimePower::new(p(2), 64).is_err());
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(vp(p(2), 12), Valuation::Finite(2));
        assert_eq!(vp(p(3), 0), Valuation::Infinity);
        assert_eq!(vp(p(5), 250), Valuation::Finite(3));
        assert_eq!(vp(p(3), -18), Valuation::Finite(2));
        let big = BigInt::from(7).pow(40) * 11;
        assert_eq!(vp(p(7), big), Valuation::Finite(40));
    }

    #[test]
    fn valuation_order_and_sum() {
        assert!(Valuation::Infinity > Valuation::Finite(u64::MAX));
        assert_eq!(Valuation::Finite(2) + Valuation::Finite(3), Valuation::Finite(5));
        assert_eq!(Valuation::Finite(2) + Valuation::Infinity, Valuation::Infinity);
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(vp_factorial(p(2), 4u32), Valuation::Finite(3));
        assert_eq!(vp_factorial(p(3), 9u32), Valuation::Finite(4));
        assert_eq!(vp_factorial(p(5), 4u32), Valuation::Finite(0));
        // 9! = 2^7 3^4 5 7
        assert_eq!(strip(3, &(1..=9u32).map(BigUint::from).product()), 4);
    }

    #[test]
    fn kummer_examples() {
        assert_eq!(vp_binomial(p(2), 2u32, 2u32), Valuation::Finite(1));
        assert_eq!(vp_binomial(p(3), 2u32, 3u32), Valuation::Finite(0));
        assert_eq!(vp_binomial(p(2), 3u32, 3u32), Valuation::Finite(2));
    }

    #[test]
    fn kummer_matches_factorization_small() {
        for &pr in &[2u64, 3, 5, 7] {
            for a in 0..60u64 {
                for b in 0..60u64 {
                    let want = strip(pr, &binomial(a + b, a));
                    assert_eq!(vp_binomial(p(pr), a, b), Valuation::Finite(want));
                }
            }
        }
    }

    #[test]
    fn lucas_examples() {
        assert!(lucas_nondivisible(p(3), 5u32, 2u32));
        assert!(!lucas_nondivisible(p(2), 6u32, 3u32));
        for x in 0..50u32 {
            assert!(lucas_nondivisible(p(5), x, 0u32));
        }
        assert!(!lucas_nondivisible(p(5), 3u32, 4u32));
    }

    #[test]
    fn digit_examples() {
        let q8 = PrimePower::from_modulus(8).unwrap();
        assert_eq!(to_digits(&q8, 3).unwrap().digits, vec![0, 1, 1]);
        let q9 = PrimePower::from_modulus(9).unwrap();
        assert_eq!(to_digits(&q9, 2).unwrap().digits, vec![0, 2]);
        assert_eq!(to_digits(&q9, 0).unwrap().digits, vec![0, 0]);
        assert!(to_digits(&q9, 9).is_err());
        let d = to_digits(&PrimePower::from_modulus(27).unwrap(), 18).unwrap();
        assert_eq!(d.least_significant_first().collect::<Vec<_>>(), vec![0, 0, 2]);
        assert_eq!(d.trailing_zeros(), 2);
    }

    #[test]
    fn factorial_valuation_below_falling_factorials() {
        // v_p(s!) <= v_p(k(k-1)...(k-s+1)), strictly when q divides a factor.
        for q in 2..=32u64 {
            let Ok(pp) = PrimePower::from_modulus(q) else { continue };
            for s in 1..q {
                let lhs = vp_factorial(pp.p(), s);
                for k in 0..=200i64 {
                    let falling: BigInt = (0..s as i64).map(|i| BigInt::from(k - i)).product();
                    let rhs = vp(pp.p(), falling);
                    assert!(lhs <= rhs, "q={q} s={s} k={k}");
                    if (0..s as i64).any(|i| (k - i).rem_euclid(q as i64) == 0) {
                        assert!(lhs < rhs, "strict fails q={q} s={s} k={k}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn digits_round_trip(k in 1u32..5, idx in 0usize..4, s in 0u64..100_000) {
            let pr = [2u64, 3, 5, 7][idx];
            let pp = PrimePower::new(p(pr), k).unwrap();
            let s = s % pp.q();
            let d = to_digits(&pp, s).unwrap();
            prop_assert_eq!(d.value(), s);
            if s != 0 {
                prop_assert_eq!(Valuation::Finite(d.trailing_zeros() as u64), vp(pp.p(), s));
            }
        }

        #[test]
        fn valuation_is_multiplicative(a in -10_000i64..10_000, b in -10_000i64..10_000, idx in 0usize..4) {
            let pr = p([2u64, 3, 5, 7][idx]);
            prop_assert_eq!(vp(pr, a * b), vp(pr, a) + vp(pr, b));
        }

        #[test]
        fn ultrametric(ys in proptest::collection::vec(-5_000i64..5_000, 1..8), idx in 0usize..4) {
            let pr = p([2u64, 3, 5, 7][idx]);
            let vals: Vec<Valuation> = ys.iter().map(|&y| vp(pr, y)).collect();
            let min = *vals.iter().min().unwrap();
            let sum: i64 = ys.iter().sum();
            prop_assert!(vp(pr, sum) >= min);
            if vals.iter().filter(|&&v| v == min).count() == 1 {
                prop_assert_eq!(vp(pr, sum), min);
            }
        }

        #[test]
        fn lucas_iff_no_carries(x in 0u64..2_000, y in 0u64..2_000, idx in 0usize..4) {
            let pr = p([2u64, 3, 5, 7][idx]);
            if y <= x {
                prop_assert_eq!(
                    lucas_nondivisible(pr, x, y),
                    vp_binomial(pr, y, x - y) == Valuation::Finite(0)
                );
            } else {
                prop_assert!(!lucas_nondivisible(pr, x, y));
            }
        }
    }
}
