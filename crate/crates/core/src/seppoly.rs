//! p-adically separating polynomials over residue classes.
//!
//! Polynomials are kept factored as `lead * prod (y - r)` with integer roots,
//! which makes `v_p(g(u))` a sum of per-root valuations and lets the minimum
//! over a whole residue class `u = residue + q t` be computed exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{vp, PrimePower, Valuation};

/// `lead * prod_{r in roots} (y - r)`; roots are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredIntPoly {
    lead: BigInt,
    roots: Vec<BigInt>,
}

impl FactoredIntPoly {
    pub fn new(lead: impl Into<BigInt>, roots: impl IntoIterator<Item = impl Into<BigInt>>) -> Result<Self> {
        let lead = lead.into();
        if lead.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let mut roots: Vec<BigInt> = roots.into_iter().map(Into::into).collect();
        roots.sort();
        Ok(FactoredIntPoly { lead, roots })
    }

    pub fn monic(roots: impl IntoIterator<Item = impl Into<BigInt>>) -> Self {
        Self::new(1, roots).expect("lead is one")
    }

    pub fn lead(&self) -> &BigInt {
        &self.lead
    }

    pub fn roots(&self) -> &[BigInt] {
        &self.roots
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn eval(&self, y: &BigInt) -> BigInt {
        self.roots.iter().fold(self.lead.clone(), |acc, r| acc * (y - r))
    }

    /// Coefficients in ascending degree order.
    pub fn coefficients(&self) -> Vec<BigInt> {
        let mut coeffs = vec![self.lead.clone()];
        for r in &self.roots {
            // multiply by (y - r)
            let mut next = vec![BigInt::zero(); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        coeffs
    }
}

impl fmt::Display for FactoredIntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.roots.is_empty() || !self.lead.is_one() {
            write!(f, "{}", self.lead)?;
        }
        for r in &self.roots {
            if r.is_zero() {
                write!(f, "(y)")?;
            } else if r.is_negative() {
                write!(f, "(y+{})", -r)?;
            } else {
                write!(f, "(y-{r})")?;
            }
        }
        Ok(())
    }
}

impl Serialize for FactoredIntPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("FactoredIntPoly", 3)?;
        st.serialize_field("lead", &self.lead.to_string())?;
        let roots: Vec<String> = self.roots.iter().map(|r| r.to_string()).collect();
        st.serialize_field("roots", &roots)?;
        st.serialize_field("degree", &self.degree())?;
        st.end()
    }
}

/// The canonical separating candidate `prod_{l in L} (y - l)`.
pub fn canonical_interval_poly(l: impl IntoIterator<Item = impl Into<BigInt>>) -> FactoredIntPoly {
    FactoredIntPoly::monic(l)
}

/// `min_{u = residue (mod q)} v_p(g(u))`, computed exactly.
pub fn min_valuation_over_class(pp: &PrimePower, g: &FactoredIntPoly, residue: u64) -> Valuation {
    let mut memo = HashMap::new();
    min_valuation_with_memo(pp, g, residue, &mut memo)
}

fn min_valuation_with_memo(
    pp: &PrimePower,
    g: &FactoredIntPoly,
    residue: u64,
    memo: &mut HashMap<Vec<BigInt>, u64>,
) -> Valuation {
    let q = BigInt::from(pp.q());
    let res = BigInt::from(residue).mod_floor(&q);
    let mut total = vp(pp.p(), g.lead.clone());
    let mut in_class = Vec::new();
    for r in &g.roots {
        let diff = &res - r;
        if diff.mod_floor(&q).is_zero() {
            // u - r = q (t - d_r)
            in_class.push((r - &res) / &q);
        } else {
            total = total + vp(pp.p(), diff);
        }
    }
    total = total + u64::from(pp.k()) * in_class.len() as u64;
    total + digit_min(&BigInt::from(pp.p().get()), in_class, memo)
}

/// `min_t sum_{d in D} v_p(t - d)` by recursion on the base-p digit of `t`.
fn digit_min(p: &BigInt, mut d: Vec<BigInt>, memo: &mut HashMap<Vec<BigInt>, u64>) -> u64 {
    if d.len() <= 1 {
        return 0;
    }
    d.sort();
    let base = d[0].clone();
    if d.last() == Some(&base) {
        return 0;
    }
    for x in d.iter_mut() {
        *x -= &base;
    }
    if let Some(&v) = memo.get(&d) {
        return v;
    }
    let mut classes: BTreeMap<BigInt, Vec<BigInt>> = BTreeMap::new();
    for x in &d {
        let (quo, rem) = x.div_mod_floor(p);
        classes.entry(rem).or_default().push(quo);
    }
    let p_small = p.to_usize().unwrap_or(usize::MAX);
    let best = if classes.len() < p_small {
        // some residue of t avoids every d
        0
    } else {
        classes
            .into_values()
            .map(|sub| sub.len() as u64 + digit_min(p, sub, memo))
            .min()
            .unwrap_or(0)
    };
    memo.insert(d, best);
    best
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationReport {
    pub separates: bool,
    pub v0: Valuation,
    pub class_minima: BTreeMap<u64, Valuation>,
    pub shifted_minus_ok: bool,
    pub shifted_plus_ok: bool,
}

impl SeparationReport {
    pub fn shifted_ok(&self) -> bool {
        self.shifted_minus_ok || self.shifted_plus_ok
    }

    /// First residue whose class minimum does not exceed `v0`.
    pub fn failing_class(&self) -> Option<u64> {
        self.class_minima.iter().find(|(_, &m)| m <= self.v0).map(|(&l, _)| l)
    }
}

fn reduce_residues(pp: &PrimePower, l: &[u64]) -> BTreeSet<u64> {
    l.iter().map(|&x| x % pp.q()).collect()
}

/// Checks whether `g` separates `alpha` from `L + qZ`, together with the two
/// shifted side conditions `v_p(g(alpha)) <= v_p(g(u -+ 1))`.
pub fn check_separation(
    pp: &PrimePower,
    g: &FactoredIntPoly,
    alpha: &BigInt,
    l: &[u64],
) -> Result<SeparationReport> {
    let q = pp.q();
    let residues = reduce_residues(pp, l);
    let alpha_res = alpha.mod_floor(&BigInt::from(q)).to_u64().expect("residue below q");
    if residues.contains(&alpha_res) {
        return Err(Error::AlphaInL { alpha: alpha.to_string(), q });
    }
    let mut memo = HashMap::new();
    let v0 = vp(pp.p(), g.eval(alpha));
    let mut class_minima = BTreeMap::new();
    let mut minus = Valuation::Infinity;
    let mut plus = Valuation::Infinity;
    for &r in &residues {
        class_minima.insert(r, min_valuation_with_memo(pp, g, r, &mut memo));
        minus = minus.min(min_valuation_with_memo(pp, g, (r + q - 1) % q, &mut memo));
        plus = plus.min(min_valuation_with_memo(pp, g, (r + 1) % q, &mut memo));
    }
    let separates = class_minima.values().all(|&m| v0 < m);
    Ok(SeparationReport {
        separates,
        v0,
        class_minima,
        shifted_minus_ok: !residues.is_empty() && v0 <= minus,
        shifted_plus_ok: !residues.is_empty() && v0 <= plus,
    })
}

/// Plain separation only, stopping at the first failing class.
pub fn separates(pp: &PrimePower, g: &FactoredIntPoly, alpha: &BigInt, l: &[u64]) -> bool {
    let v0 = vp(pp.p(), g.eval(alpha));
    let Valuation::Finite(_) = v0 else { return false };
    let mut memo = HashMap::new();
    reduce_residues(pp, l)
        .into_iter()
        .all(|r| v0 < min_valuation_with_memo(pp, g, r, &mut memo))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchHit {
    pub poly: FactoredIntPoly,
    pub degree: usize,
    pub candidates_checked: u64,
}

/// Lowest-degree monic polynomial with roots drawn (with repetition) from
/// `window` that separates `alpha` from `L + qZ`. Candidates are visited in
/// lexicographic order of their sorted root lists, so the result is
/// reproducible. The degree found is an upper bound on `D(L, alpha, q)`.
pub fn search_min_degree(
    pp: &PrimePower,
    alpha: &BigInt,
    l: &[u64],
    max_degree: usize,
    window: Range<i64>,
) -> Result<Option<SearchHit>> {
    let q = pp.q();
    let alpha_res = alpha.mod_floor(&BigInt::from(q)).to_u64().expect("residue below q");
    if reduce_residues(pp, l).contains(&alpha_res) {
        return Err(Error::AlphaInL { alpha: alpha.to_string(), q });
    }
    let values: Vec<i64> = window.collect();
    if values.is_empty() {
        return Ok(None);
    }
    let mut checked = 0u64;
    for degree in 1..=max_degree {
        let mut idx = vec![0usize; degree];
        loop {
            checked += 1;
            let g = FactoredIntPoly::monic(idx.iter().map(|&i| values[i]));
            if separates(pp, &g, alpha, l) {
                return Ok(Some(SearchHit { poly: g, degree, candidates_checked: checked }));
            }
            // next nondecreasing index vector
            let Some(pos) = idx.iter().rposition(|&i| i + 1 < values.len()) else { break };
            let next = idx[pos] + 1;
            for slot in idx[pos..].iter_mut() {
                *slot = next;
            }
        }
    }
    Ok(None)
}

/// `floor(min{2^(s-1), (1 + (s-1)/k)^k})`, evaluated exactly.
pub fn dsk_bound(s: u64, k: u64) -> BigUint {
    assert!(s >= 1 && k >= 1, "dsk_bound needs s, k >= 1");
    let pow2 = BigUint::one() << (s - 1) as usize;
    let k_u32 = u32::try_from(k).expect("k fits in u32");
    let num: BigUint = Pow::pow(BigUint::from(k + s - 1), k_u32);
    let den: BigUint = Pow::pow(BigUint::from(k), k_u32);
    pow2.min(num / den)
}
