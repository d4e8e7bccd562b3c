//! Set families over `[n]`, the constraint predicates for every family kind,
//! push-to-the-middle, and exact maximum-family search.

mod clique;
mod matching;
mod push;
mod search;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::PrimePower;

pub use clique::{CliqueGraph, CliqueOutcome};
pub use matching::max_bipartite_matching;
pub use push::push_to_middle;
pub use search::{max_family, max_family_with_limit, SearchResult, DEFAULT_MAX_N};

/// Largest ground set a bit-set member can hold.
pub const MAX_N: usize = 16;

/// Bit `i - 1` holds element `i`.
pub type Mask = u32;

pub fn popcount(m: Mask) -> usize {
    m.count_ones() as usize
}

pub fn format_set(m: Mask) -> String {
    let elems: Vec<String> = (0..32).filter(|i| m >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", elems.join(","))
}

pub fn set_from_elements(elems: &[usize]) -> Mask {
    elems.iter().fold(0, |m, &e| m | 1 << (e - 1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    n: usize,
    members: Vec<Mask>,
}

impl SetFamily {
    /// Keeps the given order; rejects duplicates and sets outside `[n]`.
    pub fn new(n: usize, members: Vec<Mask>) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::GroundSetTooLarge(n, MAX_N));
        }
        let full = full_mask(n);
        let mut seen = HashSet::new();
        for &m in &members {
            if m & !full != 0 {
                return Err(Error::NotASubset { set: format_set(m), n });
            }
            if !seen.insert(m) {
                return Err(Error::Parse(format!("duplicate member {}", format_set(m))));
            }
        }
        Ok(SetFamily { n, members })
    }

    pub fn empty(n: usize) -> Self {
        SetFamily { n, members: Vec::new() }
    }

    /// Every `k`-subset of `[n]`.
    pub fn uniform(n: usize, k: usize) -> Self {
        let members = (0..1u32 << n).filter(|&m| popcount(m) == k).collect();
        SetFamily { n, members }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[Mask] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, m: Mask) -> bool {
        self.members.contains(&m)
    }

    /// Sorted by numeric bit-set value.
    pub fn canonical(mut self) -> Self {
        self.members.sort_unstable();
        self
    }

    pub fn is_antichain(&self) -> bool {
        self.first_comparable_pair().is_none()
    }

    pub fn first_comparable_pair(&self) -> Option<(Mask, Mask)> {
        for (i, &a) in self.members.iter().enumerate() {
            for &b in &self.members[i + 1..] {
                if a & b == a || a & b == b {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Text form: one `{1,3,5}` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &m in &self.members {
            out.push_str(&format_set(m));
            out.push('\n');
        }
        out
    }

    /// Parses the text form. Blank lines and `#` comments are skipped; with
    /// `n = None` the ground set is the largest element seen.
    pub fn parse(text: &str, n: Option<usize>) -> Result<Self> {
        let mut members = Vec::new();
        let mut max_elem = 0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let inner = line
                .strip_prefix('{')
                .and_then(|l| l.strip_suffix('}'))
                .ok_or_else(|| Error::Parse(format!("line {}: expected {{...}}, got {line:?}", lineno + 1)))?;
            let mut m: Mask = 0;
            for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let e: usize = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad element {tok:?}", lineno + 1)))?;
                if e == 0 || e > MAX_N {
                    return Err(Error::Parse(format!("line {}: element {e} outside 1..={MAX_N}", lineno + 1)));
                }
                max_elem = max_elem.max(e);
                m |= 1 << (e - 1);
            }
            members.push(m);
        }
        SetFamily::new(n.unwrap_or(max_elem), members)
    }
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|&m| format_set(m)).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl Serialize for SetFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let sets: Vec<Vec<usize>> = self
            .members
            .iter()
            .map(|&m| (0..self.n).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect())
            .collect();
        let mut st = s.serialize_struct("SetFamily", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("members", &sets)?;
        st.end()
    }
}

pub(crate) fn full_mask(n: usize) -> Mask {
    if n >= 32 {
        Mask::MAX
    } else {
        (1 << n) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    /// `|A \ B| in L` for every ordered pair of distinct members.
    DiffSperner,
    /// `min(|A \ B|, |B \ A|) in L`.
    CloseSperner,
    /// `|A| not in L`, `|A & B| in L`.
    Intersecting,
    /// `|A| = k`, `|A & B| != k` (mod q).
    IntersectingUniform,
    /// `|A ^ B| in L`.
    Hamming,
    /// Plain Sperner system; `L` is ignored.
    Antichain,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::DiffSperner => "diff-sperner",
            Kind::CloseSperner => "close-sperner",
            Kind::Intersecting => "intersecting",
            Kind::IntersectingUniform => "intersecting-uniform",
            Kind::Hamming => "hamming",
            Kind::Antichain => "antichain",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "diff-sperner" | "diff" => Kind::DiffSperner,
            "close-sperner" | "close" => Kind::CloseSperner,
            "intersecting" => Kind::Intersecting,
            "intersecting-uniform" | "uniform" => Kind::IntersectingUniform,
            "hamming" => Kind::Hamming,
            "antichain" | "sperner" => Kind::Antichain,
            other => return Err(Error::Parse(format!("unknown family kind {other:?}"))),
        })
    }
}

/// What a family must satisfy: the kind, the set `L`, an optional prime-power
/// modulus, and the ground-set size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintSpec {
    pub kind: Kind,
    pub l: BTreeSet<u64>,
    pub modulus: Option<PrimePower>,
    pub n: usize,
    pub uniform_residue: Option<u64>,
}

impl ConstraintSpec {
    pub fn new(kind: Kind, n: usize, l: impl IntoIterator<Item = u64>, modulus: Option<PrimePower>) -> Result<Self> {
        let spec = ConstraintSpec { kind, l: l.into_iter().collect(), modulus, n, uniform_residue: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(n: usize, q: PrimePower, residue: u64) -> Result<Self> {
        let spec = ConstraintSpec {
            kind: Kind::IntersectingUniform,
            l: BTreeSet::new(),
            modulus: Some(q),
            n,
            uniform_residue: Some(residue % q.q()),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn antichain(n: usize) -> Self {
        ConstraintSpec { kind: Kind::Antichain, l: BTreeSet::new(), modulus: None, n, uniform_residue: None }
    }

    pub fn with_n(&self, n: usize) -> Self {
        ConstraintSpec { n, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConstraint(msg.to_string()));
        if self.n > MAX_N {
            return Err(Error::GroundSetTooLarge(self.n, MAX_N));
        }
        match self.kind {
            Kind::DiffSperner | Kind::Hamming => {
                if self.residues().contains(&0) {
                    return bad("L must avoid 0 (after reduction modulo q)");
                }
            }
            Kind::CloseSperner => {
                if self.modulus.is_some() {
                    return bad("close-sperner is non-modular");
                }
                if self.l.contains(&0) {
                    return bad("close-sperner needs positive L");
                }
            }
            Kind::IntersectingUniform => {
                if self.modulus.is_none() || self.uniform_residue.is_none() {
                    return bad("intersecting-uniform needs a modulus and a residue");
                }
            }
            Kind::Intersecting | Kind::Antichain => {}
        }
        Ok(())
    }

    /// `L` reduced modulo `q` when modular, else `L` itself.
    pub fn residues(&self) -> BTreeSet<u64> {
        match self.modulus {
            Some(pp) => self.l.iter().map(|&x| x % pp.q()).collect(),
            None => self.l.clone(),
        }
    }

    /// Whether the value `x` counts as lying in `L`.
    pub fn in_l(&self, x: u64) -> bool {
        match self.modulus {
            Some(pp) => self.l.iter().any(|&l| l % pp.q() == x % pp.q()),
            None => self.l.contains(&x),
        }
    }

    pub(crate) fn predicate(&self) -> Predicate {
        let table: Vec<bool> = (0..=self.n as u64).map(|x| self.in_l(x)).collect();
        let uniform = match (self.modulus, self.uniform_residue) {
            (Some(pp), Some(k)) => (0..=self.n as u64).map(|x| x % pp.q() == k % pp.q()).collect(),
            _ => Vec::new(),
        };
        Predicate { kind: self.kind, table, uniform }
    }
}

/// Lookup-table form of a [`ConstraintSpec`] for hot loops.
#[derive(Debug, Clone)]
pub(crate) struct Predicate {
    kind: Kind,
    table: Vec<bool>,
    uniform: Vec<bool>,
}

impl Predicate {
    pub fn member_ok(&self, a: Mask) -> bool {
        let size = popcount(a);
        match self.kind {
            Kind::Intersecting => !self.table[size],
            Kind::IntersectingUniform => self.uniform[size],
            _ => true,
        }
    }

    pub fn pair_ok(&self, a: Mask, b: Mask) -> bool {
        let ab = popcount(a & !b);
        let ba = popcount(b & !a);
        match self.kind {
            Kind::DiffSperner => self.table[ab] && self.table[ba],
            Kind::CloseSperner => self.table[ab.min(ba)],
            Kind::Intersecting => self.table[popcount(a & b)],
            Kind::IntersectingUniform => !self.uniform[popcount(a & b)],
            Kind::Hamming => self.table[ab + ba],
            Kind::Antichain => ab > 0 && ba > 0,
        }
    }
}

/// The first member or pair that breaks a constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub members: Vec<String>,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.members.join(" vs "), self.reason)
    }
}

fn pair_reason(spec: &ConstraintSpec, a: Mask, b: Mask) -> String {
    let ab = popcount(a & !b);
    let ba = popcount(b & !a);
    match spec.kind {
        Kind::DiffSperner => format!("|A\\B| = {ab}, |B\\A| = {ba}, not both in L"),
        Kind::CloseSperner => format!("sd = {} not in L", ab.min(ba)),
        Kind::Intersecting => format!("|A&B| = {} not in L", popcount(a & b)),
        Kind::IntersectingUniform => format!("|A&B| = {} is congruent to the uniform residue", popcount(a & b)),
        Kind::Hamming => format!("|A^B| = {} not in L", ab + ba),
        Kind::Antichain => "comparable pair".to_string(),
    }
}

pub fn first_violation(spec: &ConstraintSpec, fam: &SetFamily) -> Result<Option<Violation>> {
    if spec.n != fam.n() {
        return Err(Error::GroundSetMismatch { spec: spec.n, family: fam.n() });
    }
    let pred = spec.predicate();
    for &a in fam.members() {
        if !pred.member_ok(a) {
            let reason = match spec.kind {
                Kind::IntersectingUniform => format!("|A| = {} has the wrong residue", popcount(a)),
                _ => format!("|A| = {} lies in L", popcount(a)),
            };
            return Ok(Some(Violation { members: vec![format_set(a)], reason }));
        }
    }
    for (i, &a) in fam.members().iter().enumerate() {
        for &b in &fam.members()[i + 1..] {
            if !pred.pair_ok(a, b) {
                return Ok(Some(Violation {
                    members: vec![format_set(a), format_set(b)],
                    reason: pair_reason(spec, a, b),
                }));
            }
        }
    }
    Ok(None)
}

pub fn satisfies(spec: &ConstraintSpec, fam: &SetFamily) -> Result<bool> {
    Ok(first_violation(spec, fam)?.is_none())
}
