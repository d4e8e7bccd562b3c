//! q-closed intervals, `mu_q(s)`, shortest q-closures, and the census of
//! closed `(b, s)` pairs.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{lucas_nondivisible, to_digits, vp, PrimePower, Valuation};

/// The interval `{lo, ..., hi}`, a subset of `[q-1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IntervalL {
    pub lo: u64,
    pub hi: u64,
}

impl IntervalL {
    pub fn new(pp: &PrimePower, lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || lo > hi || hi >= pp.q() {
            return Err(Error::InvalidInterval { lo, hi, q: pp.q() });
        }
        Ok(IntervalL { lo, hi })
    }

    /// The interval `{b-s+1, ..., b}`.
    pub fn from_top(pp: &PrimePower, b: u64, s: u64) -> Result<Self> {
        if s == 0 || s > b {
            return Err(Error::InvalidInterval { lo: (b + 1).saturating_sub(s), hi: b, q: pp.q() });
        }
        Self::new(pp, b - s + 1, b)
    }

    pub fn size(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, other: &IntervalL) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> {
        self.lo..=self.hi
    }
}

impl fmt::Display for IntervalL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}..{}}}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClosureResult {
    pub interval: IntervalL,
    pub length: u64,
}

/// `{b-s+1..b}` is q-closed iff `p` does not divide `C(b, s)`.
pub fn is_q_closed(pp: &PrimePower, l: &IntervalL) -> bool {
    lucas_nondivisible(pp.p(), l.hi, l.size())
}

/// `mu_q(s) = s + q/p^j - p^{v_p(s)}`, `j` the first base-p digit of `s`
/// (most significant first) that is not `p-1`; `mu_q(q-1) = q-1`.
///
/// The added term is the digit sum `sum_{i=j+1}^{k-v_p(s)} (p-1) p^{k-i}`.
/// When `j > k - v_p(s)` that sum is empty and `mu_q(s) = s`; the closed
/// form alone would drop below `s` there (e.g. `q = 4, s = 2`).
pub fn mu(pp: &PrimePower, s: u64) -> Result<u64> {
    if s == 0 || s >= pp.q() {
        return Err(Error::OutOfRange {
            value: s.to_string(),
            range: format!("[1, {}]", pp.q() - 1),
        });
    }
    if s == pp.q() - 1 {
        return Ok(s);
    }
    let p = pp.p().get();
    let digits = to_digits(pp, s)?;
    // 1-indexed position of the first digit below p-1
    let j = digits
        .digits
        .iter()
        .position(|&d| d != p - 1)
        .expect("s < q-1 has a digit below p-1") as u32
        + 1;
    let v = match vp(pp.p(), s) {
        Valuation::Finite(v) => v as u32,
        Valuation::Infinity => unreachable!("s >= 1"),
    };
    if j > pp.k() - v {
        return Ok(s);
    }
    Ok(s + pp.q() / p.pow(j) - p.pow(v))
}

/// A shortest q-closed interval inside `[q-1]` containing `l`. Ties go to the
/// smallest `lo`.
pub fn q_closure(pp: &PrimePower, l: &IntervalL) -> Result<ClosureResult> {
    let q = pp.q();
    if l.lo == 0 || l.hi >= q {
        return Err(Error::InvalidInterval { lo: l.lo, hi: l.hi, q });
    }
    for len in l.size()..q {
        let first = (l.hi + 1).saturating_sub(len).max(1);
        let last = l.lo.min(q - len);
        for lo in first..=last {
            let cand = IntervalL { lo, hi: lo + len - 1 };
            if is_q_closed(pp, &cand) {
                return Ok(ClosureResult { interval: cand, length: len });
            }
        }
    }
    Err(Error::InvalidInterval { lo: l.lo, hi: l.hi, q })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Census {
    pub q: u64,
    /// Exhaustive count of `(b, s)` with `1 <= s <= b < q` and `p` not dividing `C(b, s)`.
    pub enumerated: BigUint,
    /// `(p(p+1)/2)^k - q`.
    pub closed_form: BigInt,
    /// `p^k (p-1)^k / 2^k - q`, kept for reference only.
    pub printed_form: BigInt,
}

impl Census {
    pub fn agrees(&self) -> bool {
        BigInt::from(self.enumerated.clone()) == self.closed_form
    }
}

pub fn count_closed_pairs(pp: &PrimePower) -> Census {
    let q = pp.q();
    let mut count = BigUint::default();
    for b in 1..q {
        for s in 1..=b {
            if lucas_nondivisible(pp.p(), b, s) {
                count += 1u32;
            }
        }
    }
    let p = BigInt::from(pp.p().get());
    let k = pp.k();
    let two_k = Pow::pow(BigInt::from(2), k);
    let closed_form =
        Pow::pow(&p * (&p + BigInt::one()) / 2, k) - BigInt::from(q);
    let printed_form =
        Pow::pow(&p, k) * Pow::pow(&p - BigInt::one(), k) / two_k - BigInt::from(q);
    let census = Census { q, enumerated: count, closed_form, printed_form };
    debug_assert!(census.agrees(), "census enumeration disagrees with closed form at q={q}");
    census
}
