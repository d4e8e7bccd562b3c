//! Polynomial-method proof systems, built exactly and checked by rank.
//!
//! A system is a list of multilinear polynomials in `x_1..x_n` split into
//! blocks (`P`, `F`, `H`). The proofs claim the union is linearly
//! independent; [`verify_independence`] checks that claim on coefficient
//! vectors and also reports the evaluation pattern the argument relies on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::families::{popcount, Mask, SetFamily};
use crate::padic::{vp, Prime, PrimePower, Valuation};
use crate::seppoly::FactoredIntPoly;

fn rat(x: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(x.into())
}

/// A multilinear polynomial: monomials are subsets of `[n]` (bit `i - 1`
/// for `x_i`) with exact rational coefficients. Zero coefficients are never
/// stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearPoly {
    n: usize,
    coeffs: BTreeMap<Mask, BigRational>,
}

impl MultilinearPoly {
    pub fn zero(n: usize) -> Self {
        MultilinearPoly { n, coeffs: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(0, c);
        p
    }

    /// The variable `x_i`, `1 <= i <= n`.
    pub fn var(n: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= n, "variable x_{i} outside 1..={n}");
        let mut p = Self::zero(n);
        p.add_term(1 << (i - 1), BigRational::one());
        p
    }

    /// `prod_{j in set} x_j`
    pub fn monomial(n: usize, set: Mask) -> Self {
        let mut p = Self::zero(n);
        p.add_term(set, BigRational::one());
        p
    }

    /// `c + sum_{j in set} w * x_j`
    pub fn affine(n: usize, c: BigRational, set: Mask, w: BigRational) -> Self {
        let mut p = Self::constant(n, c);
        for j in 0..n {
            if set >> j & 1 == 1 {
                p.add_term(1 << j, w.clone());
            }
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<Mask, BigRational> {
        &self.coeffs
    }

    pub fn coeff(&self, m: Mask) -> BigRational {
        self.coeffs.get(&m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest monomial size; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.keys().map(|&m| popcount(m)).max()
    }

    fn add_term(&mut self, m: Mask, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(m).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&m, c) in &other.coeffs {
            out.add_term(m, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.n);
        for (&m, a) in &self.coeffs {
            out.add_term(m, a * c);
        }
        out
    }

    /// Product followed by reduction: `x_i^2 = x_i`, so monomials multiply
    /// by union.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n.max(other.n));
        for (&a, ca) in &self.coeffs {
            for (&b, cb) in &other.coeffs {
                out.add_term(a | b, ca * cb);
            }
        }
        out
    }

    /// Value at the 0/1 vector with support `point`.
    pub fn eval(&self, point: Mask) -> BigRational {
        self.coeffs
            .iter()
            .filter(|(&m, _)| m & point == m)
            .fold(BigRational::zero(), |acc, (_, c)| acc + c)
    }

    /// Sets `x_i` to the constant `value` (0 or 1).
    pub fn substitute(&self, i: usize, value: bool) -> Self {
        let bit = 1 << (i - 1);
        let mut out = Self::zero(self.n);
        for (&m, c) in &self.coeffs {
            if m & bit == 0 {
                out.add_term(m, c.clone());
            } else if value {
                out.add_term(m & !bit, c.clone());
            }
        }
        out
    }
}

impl fmt::Display for MultilinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(&m, c)| {
                let vars: Vec<String> = (0..self.n).filter(|j| m >> j & 1 == 1).map(|j| format!("x{}", j + 1)).collect();
                match (vars.is_empty(), c.is_one()) {
                    (true, _) => c.to_string(),
                    (false, true) => vars.join("*"),
                    (false, false) => format!("{c}*{}", vars.join("*")),
                }
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

impl Serialize for MultilinearPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let terms: Vec<(Vec<usize>, String)> = self
            .coeffs
            .iter()
            .map(|(&m, c)| ((0..self.n).filter(|j| m >> j & 1 == 1).map(|j| j + 1).collect(), c.to_string()))
            .collect();
        let mut st = s.serialize_struct("MultilinearPoly", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("degree", &self.degree())?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

/// Polynomial expressions before reduction.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(BigRational),
    /// `x_i`, 1-indexed.
    Var(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn int(c: i64) -> Expr {
        Expr::Const(rat(c))
    }

    /// `c + sum w_j x_j`
    pub fn affine(c: i64, terms: &[(usize, i64)]) -> Expr {
        let mut parts = vec![Expr::int(c)];
        parts.extend(terms.iter().map(|&(j, w)| Expr::Product(vec![Expr::int(w), Expr::Var(j)])));
        Expr::Sum(parts)
    }

    /// Direct evaluation at a 0/1 point, without reducing.
    pub fn eval(&self, point: Mask) -> BigRational {
        match self {
            Expr::Const(c) => c.clone(),
            Expr::Var(i) => rat((point >> (i - 1) & 1) as i64),
            Expr::Sum(xs) => xs.iter().fold(BigRational::zero(), |a, e| a + e.eval(point)),
            Expr::Product(xs) => xs.iter().fold(BigRational::one(), |a, e| a * e.eval(point)),
            Expr::Pow(e, k) => num_traits::pow(e.eval(point), *k as usize),
        }
    }
}

/// Expands `expr` in `n` variables and replaces every `x_i^e` (`e >= 1`) by
/// `x_i`. Reduction commutes with products, so it is applied at every step.
pub fn multilinear_reduce(expr: &Expr, n: usize) -> MultilinearPoly {
    match expr {
        Expr::Const(c) => MultilinearPoly::constant(n, c.clone()),
        Expr::Var(i) => MultilinearPoly::var(n, *i),
        Expr::Sum(xs) => xs.iter().fold(MultilinearPoly::zero(n), |a, e| a.add(&multilinear_reduce(e, n))),
        Expr::Product(xs) => xs
            .iter()
            .fold(MultilinearPoly::constant(n, BigRational::one()), |a, e| a.mul(&multilinear_reduce(e, n))),
        Expr::Pow(e, k) => {
            let base = multilinear_reduce(e, n);
            (0..*k).fold(MultilinearPoly::constant(n, BigRational::one()), |a, _| a.mul(&base))
        }
    }
}

/// Reduction of `g(c - sum_{j in set} x_j)` for `g` in factored form.
fn compose_factored(n: usize, g: &FactoredIntPoly, c: i64, set: Mask) -> MultilinearPoly {
    compose_signed(n, g, c, 0, set)
}

/// Reduction of `g(c + sum_{j in plus} x_j - sum_{j in minus} x_j)`.
fn compose_signed(n: usize, g: &FactoredIntPoly, c: i64, plus: Mask, minus: Mask) -> MultilinearPoly {
    let mut acc = MultilinearPoly::constant(n, BigRational::from_integer(g.lead().clone()));
    for r in g.roots() {
        let shift = BigRational::from_integer(BigInt::from(c) - r);
        let factor = MultilinearPoly::affine(n, shift, minus, rat(-1)).add(&MultilinearPoly::affine(n, rat(0), plus, rat(1)));
        acc = acc.mul(&factor);
    }
    acc
}

/// Subsets of `[m]` of size at most `k`, ordered by size then value.
fn small_subsets(m: usize, k: i64) -> Vec<Mask> {
    if k < 0 {
        return Vec::new();
    }
    let mut out: Vec<Mask> = (0..1u32 << m).filter(|&b| popcount(b) as i64 <= k).collect();
    out.sort_by_key(|&b| (popcount(b), b));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FVariant {
    /// `f_j = (x_n - 1) I_j`, for `v_p(g(0)) <= v_p(g(u - 1))`.
    MinusOne,
    /// `f_j = x_n I_j`, for `v_p(g(0)) <= v_p(g(u + 1))`.
    Plain,
    /// No `F` block: only the plain degree-`d` count is claimed.
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MidbandVariant {
    /// `[s]`-differencing Sperner.
    Sym,
    /// `[s]`-close Sperner.
    Close,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub name: String,
    pub polys: Vec<MultilinearPoly>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub label: String,
    pub set: Vec<usize>,
    #[serde(skip)]
    pub mask: Mask,
}

fn probe(label: impl Into<String>, n: usize, mask: Mask) -> Probe {
    Probe { label: label.into(), set: (0..n).filter(|j| mask >> j & 1 == 1).map(|j| j + 1).collect(), mask }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Pattern {
    /// Diagonal of the `P` block has valuation `v_p(g(0))`, off-diagonal
    /// entries strictly more.
    Padic,
    /// `P` block is triangular on the members: nonzero diagonal, zero above.
    Triangular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofSystem {
    pub n: usize,
    /// Members in the order the proof uses.
    pub family: SetFamily,
    pub degree_cap: usize,
    pub blocks: Vec<Block>,
    pub probes: Vec<Probe>,
    /// Row per polynomial (blocks in order), column per probe.
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: Vec<Vec<BigRational>>,
    pub g: Option<FactoredIntPoly>,
    pub modulus: Option<PrimePower>,
    pattern: Pattern,
}

fn ser_matrix<S: Serializer>(m: &[Vec<BigRational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    rows.serialize(s)
}

impl ProofSystem {
    fn assemble(
        family: SetFamily,
        degree_cap: usize,
        blocks: Vec<Block>,
        probes: Vec<Probe>,
        g: Option<FactoredIntPoly>,
        modulus: Option<PrimePower>,
        pattern: Pattern,
    ) -> Self {
        let matrix = blocks
            .iter()
            .flat_map(|b| b.polys.iter())
            .map(|p| probes.iter().map(|pr| p.eval(pr.mask)).collect())
            .collect();
        ProofSystem { n: family.n(), family, degree_cap, blocks, probes, matrix, g, modulus, pattern }
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn total(&self) -> usize {
        self.blocks.iter().map(|b| b.polys.len()).sum()
    }

    pub fn polys(&self) -> impl Iterator<Item = &MultilinearPoly> {
        self.blocks.iter().flat_map(|b| b.polys.iter())
    }

    /// Entry `p_i(v^(j))` of the `P` block against the member probes.
    pub fn member_entry(&self, i: usize, j: usize) -> &BigRational {
        &self.matrix[i][j]
    }
}

/// Orders members so that those without `n` come first, keeping relative
/// order. Returns the reordered members and the count `r` without `n`.
fn split_on_last(fam: &SetFamily) -> (Vec<Mask>, usize) {
    let bit = 1 << (fam.n() - 1);
    let mut out: Vec<Mask> = fam.members().iter().copied().filter(|m| m & bit == 0).collect();
    let r = out.len();
    out.extend(fam.members().iter().copied().filter(|m| m & bit != 0));
    (out, r)
}

/// The system behind the separating-polynomial bound: `P` from
/// `g(|A_i| - v_i . x)`, `F` from `I_j` over small subsets of `[n-1]`.
pub fn build_diff_sperner_system(
    fam: &SetFamily,
    g: &FactoredIntPoly,
    q: PrimePower,
    variant: FVariant,
) -> Result<ProofSystem> {
    let n = fam.n();
    if n == 0 {
        return Err(Error::InvalidConstraint("the ground set must be nonempty".into()));
    }
    let d = g.degree();
    let (members, r) = split_on_last(fam);
    let family = SetFamily::new(n, members.clone())?;
    let p_block: Vec<MultilinearPoly> =
        members.iter().map(|&a| compose_factored(n, g, popcount(a) as i64, a)).collect();
    let last = MultilinearPoly::var(n, n);
    let bs = if variant == FVariant::Absent { Vec::new() } else { small_subsets(n - 1, d as i64 - 1) };
    let f_factor = match variant {
        FVariant::MinusOne => last.add(&MultilinearPoly::constant(n, rat(-1))),
        _ => last,
    };
    let f_block: Vec<MultilinearPoly> = bs.iter().map(|&b| f_factor.mul(&MultilinearPoly::monomial(n, b))).collect();

    let bit = 1 << (n - 1);
    let mut probes: Vec<Probe> =
        members.iter().enumerate().map(|(i, &a)| probe(format!("v{}", i + 1), n, a)).collect();
    match variant {
        FVariant::MinusOne => {
            probes.extend(members[..r].iter().enumerate().map(|(i, &a)| probe(format!("u{}", i + 1), n, a | bit)));
        }
        FVariant::Plain => {
            probes.extend(members[r..].iter().enumerate().map(|(i, &a)| probe(format!("u{}", r + i + 1), n, a & !bit)));
        }
        FVariant::Absent => {}
    }
    probes.extend(bs.iter().enumerate().map(|(j, &b)| probe(format!("w{}", j + 1), n, b)));

    let mut blocks = vec![Block { name: "P".into(), polys: p_block }];
    if !f_block.is_empty() {
        blocks.push(Block { name: "F".into(), polys: f_block });
    }
    Ok(ProofSystem::assemble(family, d, blocks, probes, Some(g.clone()), Some(q), Pattern::Padic))
}

/// The system for restricted Hamming distances: `p_i = g(|A_i| + 1 . x -
/// 2 v_i . x)`, whose value at `v_j` is `g(|A_i ^ A_j|)`. No `F` block.
pub fn build_hamming_system(fam: &SetFamily, g: &FactoredIntPoly, q: PrimePower) -> Result<ProofSystem> {
    let n = fam.n();
    let family = fam.clone();
    let full = (0..n).fold(0, |m, j| m | 1 << j);
    let p_block: Vec<MultilinearPoly> =
        fam.members().iter().map(|&a| compose_signed(n, g, popcount(a) as i64, full & !a, a)).collect();
    let probes = fam.members().iter().enumerate().map(|(i, &a)| probe(format!("v{}", i + 1), n, a)).collect();
    let blocks = vec![Block { name: "P".into(), polys: p_block }];
    Ok(ProofSystem::assemble(family, g.degree(), blocks, probes, Some(g.clone()), Some(q), Pattern::Padic))
}

/// The mid-band systems: `Sym` for `[s]`-differencing families (blocks
/// `P`, `F`, `H`), `Close` for `[s]`-close families (blocks `P`, `H`).
pub fn build_midband_system(fam: &SetFamily, s: usize, variant: MidbandVariant) -> Result<ProofSystem> {
    let n = fam.n();
    let (lo_num, range) = match variant {
        MidbandVariant::Sym => (n + 2, "(n+2)/3 <= s <= n/2"),
        MidbandVariant::Close => (n + 1, "(n+1)/3 <= s <= n/2"),
    };
    if n == 0 || 3 * s < lo_num || 2 * s > n {
        return Err(Error::InvalidConstraint(format!("need {range}, got n = {n}, s = {s}")));
    }
    if fam.members().iter().any(|&a| popcount(a) < s || popcount(a) > n - s) {
        return Err(Error::OutsideBand { lo: s, hi: n - s });
    }
    let g = FactoredIntPoly::monic(1..=s as i64);
    match variant {
        MidbandVariant::Sym => {
            let p = Prime::next_above(n as u64);
            let mut sys = build_diff_sperner_system(fam, &g, PrimePower::prime(p), FVariant::MinusOne)?;
            // Q = prod_{k=s-1}^{n-s} (x_1 + ... + x_{n-1} - k)
            let lower = (0..n - 1).fold(0, |m, j| m | 1 << j);
            let q = big_q(n, lower, s as i64 - 1, (n - s) as i64);
            let cs = small_subsets(n - 1, 3 * s as i64 - n as i64 - 2);
            let h: Vec<MultilinearPoly> = cs.iter().map(|&c| q.mul(&MultilinearPoly::monomial(n, c))).collect();
            let mut probes = std::mem::take(&mut sys.probes);
            probes.extend(cs.iter().enumerate().map(|(k, &c)| probe(format!("z{}", k + 1), n, c)));
            let mut blocks = std::mem::take(&mut sys.blocks);
            if !h.is_empty() {
                blocks.push(Block { name: "H".into(), polys: h });
            }
            let out = ProofSystem::assemble(sys.family, s, blocks, probes, Some(g), sys.modulus, Pattern::Padic);
            assert_degrees(&out, s);
            Ok(out)
        }
        MidbandVariant::Close => {
            let mut members = fam.members().to_vec();
            members.sort_by_key(|&a| std::cmp::Reverse(popcount(a)));
            let family = SetFamily::new(n, members.clone())?;
            let p_block: Vec<MultilinearPoly> =
                members.iter().map(|&a| compose_factored(n, &g, popcount(a) as i64, a)).collect();
            let all = (0..n).fold(0, |m, j| m | 1 << j);
            let q = big_q(n, all, s as i64, (n - s) as i64);
            let bs = small_subsets(n, 3 * s as i64 - n as i64 - 1);
            let h: Vec<MultilinearPoly> = bs.iter().map(|&b| q.mul(&MultilinearPoly::monomial(n, b))).collect();
            let mut probes: Vec<Probe> =
                members.iter().enumerate().map(|(i, &a)| probe(format!("v{}", i + 1), n, a)).collect();
            probes.extend(bs.iter().enumerate().map(|(k, &b)| probe(format!("w{}", k + 1), n, b)));
            let mut blocks = vec![Block { name: "P".into(), polys: p_block }];
            if !h.is_empty() {
                blocks.push(Block { name: "H".into(), polys: h });
            }
            let out = ProofSystem::assemble(family, s, blocks, probes, Some(g), None, Pattern::Triangular);
            assert_degrees(&out, s);
            Ok(out)
        }
    }
}

fn big_q(n: usize, vars: Mask, from: i64, to: i64) -> MultilinearPoly {
    (from..=to).fold(MultilinearPoly::constant(n, BigRational::one()), |acc, k| {
        acc.mul(&MultilinearPoly::affine(n, rat(-k), vars, BigRational::one()))
    })
}

fn assert_degrees(sys: &ProofSystem, cap: usize) {
    for p in sys.polys() {
        assert!(p.degree().unwrap_or(0) <= cap, "proof polynomial exceeds degree {cap}");
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Offense {
    pub row: usize,
    pub col: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternReport {
    pub kind: String,
    pub holds: bool,
    pub first_offense: Option<Offense>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMethod {
    /// Full rank modulo a 61-bit prime, which forces full rank over Q.
    ModularCertificate,
    /// Fraction-free elimination over the integers.
    Bareiss,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub total: usize,
    pub full_rank: bool,
    /// Number of distinct monomials spanned by the system.
    pub coefficient_columns: usize,
    pub method: RankMethod,
    pub pattern: PatternReport,
}

/// Rank over Q of the coefficient vectors, plus the evaluation pattern the
/// proof needs, checked `p`-adically against `g(0)` (or triangularly for the
/// close variant).
pub fn verify_independence(sys: &ProofSystem, p: Prime) -> RankReport {
    let monomials: BTreeSet<Mask> = sys.polys().flat_map(|q| q.coeffs().keys().copied()).collect();
    let cols: Vec<Mask> = monomials.into_iter().collect();
    let rows: Vec<Vec<BigInt>> = sys.polys().map(|poly| integer_row(poly, &cols)).collect();
    let total = rows.len();
    let (rank, method) = match rank_mod_prime(&rows) {
        Some(r) if r == total => (r, RankMethod::ModularCertificate),
        _ => (bareiss_rank(rows), RankMethod::Bareiss),
    };
    RankReport {
        rank,
        total,
        full_rank: rank == total,
        coefficient_columns: cols.len(),
        method,
        pattern: pattern_report(sys, p),
    }
}

fn integer_row(poly: &MultilinearPoly, cols: &[Mask]) -> Vec<BigInt> {
    let den = poly.coeffs().values().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    cols.iter().map(|&m| (poly.coeff(m) * BigRational::from_integer(den.clone())).to_integer()).collect()
}

const MOD_P: u64 = (1 << 61) - 1;

fn rank_mod_prime(rows: &[Vec<BigInt>]) -> Option<usize> {
    let modulus = BigInt::from(MOD_P);
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|x| x.mod_floor(&modulus).to_u64().expect("reduced")).collect())
        .collect();
    let width = m.first().map_or(0, |r| r.len());
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % MOD_P as u128) as u64;
    let inv = |a: u64| {
        let (mut base, mut e, mut acc) = (a, MOD_P - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            e >>= 1;
        }
        acc
    };
    let mut rank = 0;
    for c in 0..width {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, piv);
        let iv = inv(m[rank][c]);
        for r in rank + 1..m.len() {
            if m[r][c] != 0 {
                let f = mul(m[r][c], iv);
                let (top, bottom) = m.split_at_mut(r);
                for (x, &y) in bottom[0][c..].iter_mut().zip(&top[rank][c..]) {
                    *x = (*x + MOD_P - mul(f, y)) % MOD_P;
                }
            }
        }
        rank += 1;
    }
    Some(rank)
}

/// Exact rank by fraction-free Gaussian elimination; pivots are the first
/// nonzero entry in row-major order of the remaining submatrix.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let width = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..width {
        let Some(piv) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, piv);
        for r in rank + 1..m.len() {
            for k in c + 1..width {
                let v = &m[rank][c] * &m[r][k] - &m[r][c] * &m[rank][k];
                m[r][k] = v / &prev;
            }
            m[r][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
    }
    rank
}

fn pattern_report(sys: &ProofSystem, p: Prime) -> PatternReport {
    let m = sys.family.len();
    match sys.pattern {
        Pattern::Padic => {
            let g = sys.g.as_ref().expect("p-adic systems carry g");
            let v0 = vp(p, g.eval(&BigInt::zero()));
            let val = |x: &BigRational| -> Valuation {
                if x.is_zero() {
                    Valuation::Infinity
                } else {
                    vp(p, x.numer().abs())
                }
            };
            for i in 0..m {
                for j in 0..m {
                    let v = val(sys.member_entry(i, j));
                    let bad = if i == j { v != v0 } else { v <= v0 };
                    if bad {
                        let rel = if i == j { "=" } else { ">" };
                        return PatternReport {
                            kind: "p-adic".into(),
                            holds: false,
                            first_offense: Some(Offense {
                                row: i,
                                col: j,
                                detail: format!("v_{p}(M[{i}][{j}]) = {v}, need {rel} v_{p}(g(0)) = {v0}"),
                            }),
                        };
                    }
                }
            }
            PatternReport { kind: "p-adic".into(), holds: true, first_offense: None }
        }
        Pattern::Triangular => {
            for i in 0..m {
                for j in i..m {
                    let x = sys.member_entry(j, i);
                    let bad = if i == j { x.is_zero() } else { !x.is_zero() };
                    if bad {
                        let need = if i == j { "nonzero" } else { "zero" };
                        return PatternReport {
                            kind: "triangular".into(),
                            holds: false,
                            first_offense: Some(Offense {
                                row: j,
                                col: i,
                                detail: format!("p_{}(v_{}) = {x}, need {need}", j + 1, i + 1),
                            }),
                        };
                    }
                }
            }
            PatternReport { kind: "triangular".into(), holds: true, first_offense: None }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::set_from_elements;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(p: u64, k: u32) -> PrimePower {
        PrimePower::new(Prime::new(p).unwrap(), k).unwrap()
    }

    fn random_expr(rng: &mut ChaCha8Rng, n: usize, depth: u32) -> Expr {
        if depth == 0 || rng.gen_bool(0.3) {
            return if rng.gen_bool(0.5) { Expr::Var(rng.gen_range(1..=n)) } else { Expr::int(rng.gen_range(-3..=3)) };
        }
        let parts = (0..rng.gen_range(1..=3)).map(|_| random_expr(rng, n, depth - 1)).collect();
        match rng.gen_range(0..3) {
            0 => Expr::Sum(parts),
            1 => Expr::Product(parts),
            _ => Expr::Pow(Box::new(random_expr(rng, n, depth - 1)), rng.gen_range(0..4)),
        }
    }

    #[test]
    fn reduce_examples() {
        let x1sq_x2 = Expr::Product(vec![Expr::Pow(Box::new(Expr::Var(1)), 2), Expr::Var(2)]);
        assert_eq!(multilinear_reduce(&x1sq_x2, 2), MultilinearPoly::monomial(2, 0b11));
        let sq = Expr::Pow(Box::new(Expr::affine(0, &[(1, 1), (2, 1)])), 2);
        let r = multilinear_reduce(&sq, 2);
        assert_eq!(r.coeff(0b01), rat(1));
        assert_eq!(r.coeff(0b10), rat(1));
        assert_eq!(r.coeff(0b11), rat(2));
        assert_eq!(r.coeffs().len(), 3);
        assert_eq!(multilinear_reduce(&Expr::int(5), 3), MultilinearPoly::constant(3, rat(5)));
        assert!(multilinear_reduce(&Expr::int(0), 3).is_zero());
    }

    #[test]
    fn reduce_agrees_on_cube() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=10);
            let e = random_expr(&mut rng, n, 4);
            let r = multilinear_reduce(&e, n);
            for point in 0..1u32 << n {
                assert_eq!(r.eval(point), e.eval(point), "{e:?} at {point:b}");
            }
        }
    }

    #[test]
    fn diff_example_matrix() {
        let fam = SetFamily::new(2, vec![0b01, 0b10]).unwrap();
        let g = FactoredIntPoly::monic([1, 2]);
        let sys = build_diff_sperner_system(&fam, &g, q(3, 1), FVariant::MinusOne).unwrap();
        let m: Vec<Vec<BigRational>> = (0..2).map(|i| (0..2).map(|j| sys.member_entry(i, j).clone()).collect()).collect();
        assert_eq!(m, vec![vec![rat(2), rat(0)], vec![rat(0), rat(2)]]);
        // t = C(1,0) + C(1,1)
        assert_eq!(sys.block("F").unwrap().polys.len(), 2);
        let rep = verify_independence(&sys, Prime::new(3).unwrap());
        assert!(rep.full_rank && rep.pattern.holds);
        assert_eq!(rep.rank, 4);
    }

    #[test]
    fn members_without_last_element_come_first() {
        let fam = SetFamily::new(3, vec![0b100, 0b011, 0b110, 0b001]).unwrap();
        let g = FactoredIntPoly::monic([1]);
        let sys = build_diff_sperner_system(&fam, &g, q(2, 1), FVariant::Absent).unwrap();
        assert_eq!(sys.family.members(), &[0b011, 0b001, 0b100, 0b110]);
        assert!(sys.block("F").is_none());
    }

    #[test]
    fn violating_family_breaks_pattern() {
        // {1} and {1,2}: difference sizes 0 and 1, and 1 lies in L.
        let fam = SetFamily::new(3, vec![0b001, 0b011]).unwrap();
        let g = FactoredIntPoly::monic([1, 2]);
        let sys = build_diff_sperner_system(&fam, &g, q(3, 1), FVariant::MinusOne).unwrap();
        let rep = verify_independence(&sys, Prime::new(3).unwrap());
        assert!(!rep.pattern.holds);
        let off = rep.pattern.first_offense.unwrap();
        assert_ne!(off.row, off.col);
    }

    #[test]
    fn sym_count_fits_dimension() {
        let fam = SetFamily::new(4, [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]].iter().map(|s| set_from_elements(s)).collect()).unwrap();
        let sys = build_midband_system(&fam, 2, MidbandVariant::Sym).unwrap();
        assert_eq!(sys.block("F").unwrap().polys.len(), 4);
        assert_eq!(sys.block("H").unwrap().polys.len(), 1);
        assert!(sys.total() <= 11);
        let rep = verify_independence(&sys, Prime::new(5).unwrap());
        assert!(rep.full_rank && rep.pattern.holds, "{rep:?}");
    }

    #[test]
    fn close_system_on_middle_levels() {
        let fam = SetFamily::new(5, (0..32u32).filter(|&m| popcount(m) == 2).collect()).unwrap();
        let sys = build_midband_system(&fam, 2, MidbandVariant::Close).unwrap();
        let rep = verify_independence(&sys, Prime::new(7).unwrap());
        assert!(rep.full_rank && rep.pattern.holds, "{rep:?}");
        assert!(rep.total <= 16);
    }

    #[test]
    fn band_is_enforced() {
        let fam = SetFamily::new(4, vec![0b0001]).unwrap();
        assert!(matches!(build_midband_system(&fam, 2, MidbandVariant::Sym), Err(Error::OutsideBand { lo: 2, hi: 2 })));
        let fam = SetFamily::new(7, vec![0b111]).unwrap();
        assert!(build_midband_system(&fam, 2, MidbandVariant::Sym).is_err());
    }

    #[test]
    fn hamming_system_sees_symmetric_differences() {
        let fam = SetFamily::new(3, vec![0b000, 0b011, 0b101, 0b110]).unwrap();
        let g = FactoredIntPoly::monic([2]);
        let sys = build_hamming_system(&fam, &g, q(3, 1)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let d = popcount(fam.members()[i] ^ fam.members()[j]) as i64;
                assert_eq!(sys.member_entry(i, j), &rat(d - 2));
            }
        }
        let rep = verify_independence(&sys, Prime::new(3).unwrap());
        assert!(rep.pattern.holds);
        assert_eq!(rep.rank, 4);
    }

    #[test]
    fn bareiss_matches_known_ranks() {
        let m = |rows: &[&[i64]]| rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        assert_eq!(bareiss_rank(m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]])), 2);
        assert_eq!(bareiss_rank(m(&[&[0, 0], &[0, 5]])), 1);
        assert_eq!(bareiss_rank(m(&[&[2, 1, 0], &[1, 2, 1], &[0, 1, 2]])), 3);
        assert_eq!(bareiss_rank(Vec::new()), 0);
    }

    #[test]
    fn empty_family_keeps_f_block() {
        let fam = SetFamily::new(4, vec![]).unwrap();
        let g = FactoredIntPoly::monic([1, 2]);
        let sys = build_diff_sperner_system(&fam, &g, q(3, 1), FVariant::Plain).unwrap();
        let rep = verify_independence(&sys, Prime::new(3).unwrap());
        assert_eq!(rep.rank, 4);
        assert!(rep.full_rank);
    }
}
