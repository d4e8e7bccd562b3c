//! The bound portfolio: every known bound is a rule whose hypotheses are checked
//! exactly against a [`ConstraintSpec`]; the engine reports the smallest
//! binomial sum together with the full audit trail.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::closure::{mu, q_closure, IntervalL};
use crate::error::{Error, Result};
use crate::families::{ConstraintSpec, Kind};
use crate::padic::{lucas_nondivisible, vp, vp_factorial, Prime, PrimePower, Valuation};
use crate::seppoly::{
    canonical_interval_poly, check_separation, dsk_bound, search_min_degree, FactoredIntPoly,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Column {
    /// `sum C(n, i)`
    N,
    /// `sum C(n-1, i)`
    NMinus1,
}

/// `sum_{i=lower}^{upper} C(m, i)` with `m` = `n` or `n - 1`. Indices are
/// clamped to `[0, m]`; an empty range sums to zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinomSum {
    pub n: usize,
    pub column: Column,
    pub lower: u64,
    pub upper: u64,
    #[serde(serialize_with = "number_or_string")]
    pub value: BigUint,
}

fn number_or_string<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(x) => s.serialize_u64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

pub fn binomial(m: u64, i: u64) -> BigUint {
    if i > m {
        return BigUint::zero();
    }
    let i = i.min(m - i);
    let mut acc = BigUint::one();
    for j in 0..i {
        acc = acc * (m - j) / (j + 1);
    }
    acc
}

impl BinomSum {
    pub fn new(n: usize, column: Column, lower: i64, upper: u64) -> Self {
        let m = match column {
            Column::N => n as u64,
            Column::NMinus1 => (n as u64).saturating_sub(1),
        };
        let lower = lower.max(0) as u64;
        let upper = upper.min(m);
        let value = (lower..=upper).map(|i| binomial(m, i)).sum();
        BinomSum { n, column, lower, upper, value }
    }

    /// The single term `C(n, k)`.
    pub fn single(n: usize, k: u64) -> Self {
        Self::new(n, Column::N, k as i64, k)
    }

    pub fn recompute(&self) -> bool {
        let again = BinomSum::new(self.n, self.column, self.lower as i64, self.upper);
        again.value == self.value
    }
}

impl fmt::Display for BinomSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let top = match self.column {
            Column::N => format!("{}", self.n),
            Column::NMinus1 => format!("{}", self.n.saturating_sub(1)),
        };
        write!(f, "sum_{{i={}..{}}} C({top},i) = {}", self.lower, self.upper, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hypothesis {
    pub text: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Auxiliary {
    Interval { lo: u64, hi: u64 },
    Closure { interval: IntervalL, length: u64, mu: u64 },
    Progression { a: u64, d: u64, valuation_sum: u64, threshold: u64 },
    Degree { d: u64 },
    Polynomial { poly: FactoredIntPoly, v0: Valuation, shifted_ok: bool },
    PerAlpha { polys: BTreeMap<u64, FactoredIntPoly>, d: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundCertificate {
    pub theorem_id: String,
    pub theorem: String,
    pub hypotheses: Vec<Hypothesis>,
    pub bound: BinomSum,
    pub auxiliary: Option<Auxiliary>,
    /// The prime a non-modular spec was lifted to.
    pub lifted_prime: Option<u64>,
}

impl fmt::Display for BoundCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.theorem_id, self.theorem, self.bound)?;
        if let Some(p) = self.lifted_prime {
            write!(f, " (lifted to p = {p})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub theorem_id: String,
    pub theorem: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub minimum: BoundCertificate,
    /// Every certificate attaining the minimum, best first.
    pub ties: Vec<BoundCertificate>,
    pub applicable: Vec<BoundCertificate>,
    pub rejected: Vec<Rejection>,
}

/// Where `bound_from_seppoly` gets its polynomials.
#[derive(Debug, Clone)]
pub enum SeppolySource {
    /// One polynomial, used for every `alpha` that needs separating.
    Single(FactoredIntPoly),
    /// One polynomial per `alpha` not in `L` (intersecting kinds).
    PerAlpha(BTreeMap<u64, FactoredIntPoly>),
    /// Minimal-degree search with monic roots from `window`.
    Search { max_degree: usize, window: Range<i64> },
}

/// The modular setting a rule is evaluated in.
#[derive(Debug, Clone)]
struct View {
    pp: PrimePower,
    res: Vec<u64>,
    lifted: Option<u64>,
}

impl View {
    fn of(spec: &ConstraintSpec, residues: BTreeSet<u64>) -> View {
        match spec.modulus {
            Some(pp) => View { pp, res: residues.into_iter().collect(), lifted: None },
            None => {
                let top = residues.iter().copied().max().unwrap_or(0).max(spec.n as u64);
                let p = Prime::next_above(top);
                View { pp: PrimePower::prime(p), res: residues.into_iter().collect(), lifted: Some(p.get()) }
            }
        }
    }

    fn q(&self) -> u64 {
        self.pp.q()
    }

    fn p(&self) -> u64 {
        self.pp.p().get()
    }

    fn s(&self) -> u64 {
        self.res.len() as u64
    }

    fn modulus_text(&self) -> String {
        match self.lifted {
            Some(p) => format!("lifted to p = {p}"),
            None => format!("q = {}", self.q()),
        }
    }

    /// `Some((lo, hi))` when the residues are `{lo, ..., hi}` as integers.
    fn plain_interval(&self) -> Option<(u64, u64)> {
        let (&lo, &hi) = (self.res.first()?, self.res.last()?);
        (hi - lo + 1 == self.s()).then_some((lo, hi))
    }

    /// Start of the residues as a cyclic interval modulo q, if they form one.
    fn cyclic_start(&self) -> Option<u64> {
        let q = self.q();
        let s = self.s();
        if s == 0 || s >= q {
            return None;
        }
        let set: BTreeSet<u64> = self.res.iter().copied().collect();
        let start = *self.res.iter().find(|&&r| !set.contains(&((r + q - 1) % q)))?;
        (0..s).all(|i| set.contains(&((start + i) % q))).then_some(start)
    }

    fn is_initial_segment(&self, from: u64) -> bool {
        self.res.iter().copied().eq(from..from + self.s())
    }

    fn valuation_sum(&self) -> u64 {
        self.res.iter().map(|&l| vp(self.pp.p(), l).finite().unwrap_or(u64::MAX)).sum()
    }
}

fn pow2_saturating(e: u64) -> u64 {
    if e >= 63 {
        u64::MAX
    } else {
        1 << e
    }
}

fn rule_number(id: &str) -> u32 {
    id.trim_start_matches('R').parse().unwrap_or(u32::MAX)
}

struct Ledger<'a> {
    spec: &'a ConstraintSpec,
    applicable: Vec<BoundCertificate>,
    rejected: Vec<Rejection>,
}

impl<'a> Ledger<'a> {
    fn new(spec: &'a ConstraintSpec) -> Self {
        Ledger { spec, applicable: Vec::new(), rejected: Vec::new() }
    }

    fn n(&self) -> usize {
        self.spec.n
    }

    /// Records a certificate when every check holds, else the first failure.
    fn rule(
        &mut self,
        id: &str,
        theorem: &str,
        view: Option<&View>,
        checks: Vec<(String, bool)>,
        make: impl FnOnce() -> (BinomSum, Option<Auxiliary>),
    ) {
        if let Some((text, _)) = checks.iter().find(|(_, ok)| !ok) {
            self.reject(id, theorem, format!("fails: {text}"));
            return;
        }
        let (bound, auxiliary) = make();
        self.applicable.push(BoundCertificate {
            theorem_id: id.to_string(),
            theorem: theorem.to_string(),
            hypotheses: checks.into_iter().map(|(text, holds)| Hypothesis { text, holds }).collect(),
            bound,
            auxiliary,
            lifted_prime: view.and_then(|v| v.lifted),
        });
    }

    fn reject(&mut self, id: &str, theorem: &str, reason: String) {
        self.rejected.push(Rejection { theorem_id: id.to_string(), theorem: theorem.to_string(), reason });
    }
}

/// Evaluates every rule for `spec` and returns the smallest bound first.
pub fn best_bound(spec: &ConstraintSpec) -> Result<BoundReport> {
    spec.validate()?;
    if spec.kind != Kind::IntersectingUniform && spec.l.is_empty() {
        return Err(Error::NoApplicableRule("L is empty".into()));
    }
    let mut led = Ledger::new(spec);
    match spec.kind {
        Kind::DiffSperner => diff_rules(&mut led)?,
        Kind::CloseSperner => close_rules(&mut led, &spec.l),
        Kind::Intersecting => {
            let view = View::of(spec, spec.residues());
            intersecting_rules(&mut led, &view)?
        }
        Kind::IntersectingUniform => uniform_rules(&mut led)?,
        Kind::Hamming => hamming_rules(&mut led)?,
        Kind::Antichain => {
            return Err(Error::NoApplicableRule("plain antichains have no rule in the portfolio".into()))
        }
    }
    let Ledger { mut applicable, rejected, .. } = led;
    if applicable.is_empty() {
        return Err(Error::NoApplicableRule(format!("no rule applies to {}", spec.kind)));
    }
    applicable.sort_by(|a, b| {
        a.bound
            .value
            .cmp(&b.bound.value)
            .then(a.hypotheses.len().cmp(&b.hypotheses.len()))
            .then(rule_number(&a.theorem_id).cmp(&rule_number(&b.theorem_id)))
    });
    let min_value = applicable[0].bound.value.clone();
    let ties: Vec<BoundCertificate> =
        applicable.iter().take_while(|c| c.bound.value == min_value).cloned().collect();
    Ok(BoundReport { minimum: ties[0].clone(), ties, applicable, rejected })
}

/// Re-derives `cert` from scratch: the rule must still produce an identical
/// certificate with every hypothesis true and a recomputable bound.
pub fn recheck(spec: &ConstraintSpec, cert: &BoundCertificate) -> Result<bool> {
    let report = best_bound(spec)?;
    Ok(cert.hypotheses.iter().all(|h| h.holds)
        && cert.bound.recompute()
        && report.applicable.iter().any(|c| c == cert))
}

fn diff_rules(led: &mut Ledger) -> Result<()> {
    let spec = led.spec;
    let n = spec.n;
    let v = View::of(spec, spec.residues());
    let (q, p, k, s) = (v.q(), v.p(), v.pp.k() as u64, v.s());
    let mt = v.modulus_text();
    let prime = k == 1;

    led.rule("R1", "Frankl", Some(&v), vec![(format!("modulus is prime ({mt})"), prime)], || {
        (BinomSum::new(n, Column::N, 0, s), None)
    });
    led.rule("R2", "Liu-Liu", Some(&v), vec![(format!("modulus is prime ({mt})"), prime)], || {
        (BinomSum::new(n, Column::NMinus1, 0, s), None)
    });
    led.rule(
        "R3",
        "Xu-Liu",
        Some(&v),
        vec![(format!("L = [{s}]"), v.is_initial_segment(1)), (format!("q > {s}"), q > s)],
        || (BinomSum::new(n, Column::N, 0, s), None),
    );

    let interval = v.plain_interval();
    match interval {
        Some((lo, hi)) => {
            led.rule(
                "R4",
                "interval with p not dividing C(b, s)",
                Some(&v),
                vec![
                    (format!("L = {{{lo}..{hi}}} is an interval"), true),
                    (format!("{p} does not divide C({hi}, {s})"), lucas_nondivisible(v.pp.p(), hi, s)),
                ],
                || (BinomSum::new(n, Column::NMinus1, 0, s), Some(Auxiliary::Interval { lo, hi })),
            );
        }
        None => led.reject("R4", "interval with p not dividing C(b, s)", "fails: L is an interval".into()),
    }

    led.rule("R5", "q-modular Sperner", Some(&v), vec![(format!("no difference is 0 mod {q}"), true)], || {
        (BinomSum::new(n, Column::NMinus1, 0, q - 1), None)
    });

    ap_rule(led, &v);

    let vsum = v.valuation_sum();
    led.rule("R7", "valuation sum below k", Some(&v), vec![(format!("sum v_p(l) = {vsum} < k = {k}"), vsum < k)], || {
        (BinomSum::new(n, Column::N, 0, s), None)
    });

    closure_rules(led, &v, interval)?;

    led.rule("R9", "trie bound for general L", Some(&v), vec![(format!("L within [{}]", q - 1), true)], || {
        (BinomSum::new(n, Column::N, 0, pow2_saturating(s - 1)), Some(Auxiliary::Degree { d: pow2_saturating(s - 1) }))
    });
    dsk_rule(led, &v);
    seppoly_rules(led, &v, true)?;

    if v.lifted.is_some() {
        let lower_ok = 3 * s >= n as u64 + 2;
        let upper_ok = 2 * s <= n as u64;
        led.rule(
            "R10",
            "[s]-differencing in the middle band",
            None,
            vec![
                (format!("L = [{s}]"), v.is_initial_segment(1)),
                (format!("(n+2)/3 <= {s} <= n/2"), lower_ok && upper_ok),
            ],
            || (BinomSum::new(n, Column::NMinus1, 3 * s as i64 - n as i64 - 1, s), None),
        );
        // an L-differencing Sperner system is L-close Sperner
        close_rules(led, &spec.l);
    }
    Ok(())
}

fn ap_rule(led: &mut Ledger, v: &View) {
    let n = led.n();
    let s = v.s();
    let a = v.res[0];
    let d = if s >= 2 { v.res[1] - v.res[0] } else { 0 };
    let is_ap = v.res.windows(2).all(|w| w[1] - w[0] == d);
    let p = v.pp.p();
    let k = v.pp.k() as u64;
    let vsum = v.valuation_sum();
    // for a single element only the first term is meaningful
    let threshold = if s >= 2 {
        let vd = vp(p, d).finite().expect("d > 0");
        let vfact = vp_factorial(p, s).finite().expect("finite");
        ((s - 1) * vd + k).max(s * vd + vfact + 1)
    } else {
        k
    };
    led.rule(
        "R6",
        "arithmetic progression",
        Some(v),
        vec![
            ("L is an arithmetic progression a, a+d, ...".to_string(), is_ap),
            (format!("sum v_p(l) = {vsum} < {threshold}"), is_ap && vsum < threshold),
        ],
        || {
            (
                BinomSum::new(n, Column::N, 0, s),
                Some(Auxiliary::Progression { a, d, valuation_sum: vsum, threshold }),
            )
        },
    );
}

fn closure_rules(led: &mut Ledger, v: &View, interval: Option<(u64, u64)>) -> Result<()> {
    let n = led.n();
    let name = "q-closure";
    let Some((lo, hi)) = interval else {
        led.reject("R8", name, "fails: L is an interval".into());
        return Ok(());
    };
    let s = v.s();
    let l = IntervalL::new(&v.pp, lo, hi)?;
    let m = mu(&v.pp, s)?;
    let cl = q_closure(&v.pp, &l)?;
    let hyp = || vec![(format!("L = {l} is an interval"), true)];
    let closure_aux = Auxiliary::Closure { interval: cl.interval, length: cl.length, mu: m };
    led.rule("R8", name, Some(v), hyp(), || (BinomSum::new(n, Column::NMinus1, 0, m), Some(closure_aux.clone())));
    led.rule("R8", name, Some(v), hyp(), || {
        (BinomSum::new(n, Column::N, 0, pow2_saturating(s - 1)), Some(Auxiliary::Degree { d: pow2_saturating(s - 1) }))
    });
    let mut exact = hyp();
    exact.push((format!("{} is q-closed", cl.interval), true));
    led.rule("R8", name, Some(v), exact, || {
        (BinomSum::new(n, Column::NMinus1, 0, cl.length), Some(closure_aux.clone()))
    });
    let mut sq = hyp();
    sq.push((format!("q = p^2 ({})", v.q()), v.pp.k() == 2));
    led.rule("R8", name, Some(v), sq, || (BinomSum::new(n, Column::N, 0, 2 * s - 1), None));
    Ok(())
}

fn dsk_rule(led: &mut Ledger, v: &View) {
    let n = led.n();
    let d = dsk_bound(v.s(), v.pp.k() as u64).to_u64().unwrap_or(u64::MAX);
    led.rule(
        "R14",
        "separating degree D(s, k)",
        Some(v),
        vec![(format!("|L| = {} residues modulo {}", v.s(), v.q()), true)],
        || (BinomSum::new(n, Column::N, 0, d), Some(Auxiliary::Degree { d })),
    );
}

/// Candidate separating polynomials for `0` against `L + qZ`: the canonical
/// product over `L` and over the q-closure of its hull.
fn zero_candidates(v: &View) -> Result<Vec<FactoredIntPoly>> {
    let mut out = vec![canonical_interval_poly(v.res.iter().copied())];
    if let (Some(&lo), Some(&hi)) = (v.res.first(), v.res.last()) {
        let cl = q_closure(&v.pp, &IntervalL::new(&v.pp, lo, hi)?)?;
        let g = canonical_interval_poly(cl.interval.elements());
        if g != out[0] {
            out.push(g);
        }
    }
    Ok(out)
}

fn seppoly_rules(led: &mut Ledger, v: &View, upgrade: bool) -> Result<()> {
    for g in zero_candidates(v)? {
        match zero_certificate(led.spec, v, &g, upgrade)? {
            Ok(c) => led.applicable.push(c),
            Err(r) => led.rejected.push(r),
        }
    }
    Ok(())
}

const SEPPOLY: &str = "separating polynomial";

/// Certificate from a polynomial separating 0 from `L + qZ`. The `n - 1`
/// column is only used when `upgrade` is set and a shifted condition holds.
fn zero_certificate(
    spec: &ConstraintSpec,
    v: &View,
    g: &FactoredIntPoly,
    upgrade: bool,
) -> Result<std::result::Result<BoundCertificate, Rejection>> {
    let rep = check_separation(&v.pp, g, &BigInt::zero(), &v.res)?;
    if !rep.separates {
        let class = rep.failing_class().map_or("?".to_string(), |c| c.to_string());
        return Ok(Err(Rejection {
            theorem_id: "R22".into(),
            theorem: SEPPOLY.into(),
            reason: format!("{g} does not separate 0 from L + {}Z (class {class})", v.q()),
        }));
    }
    let d = g.degree() as u64;
    let mut hypotheses = vec![Hypothesis { text: format!("{g} separates 0 from L + {}Z", v.q()), holds: true }];
    let column = if upgrade && rep.shifted_ok() {
        hypotheses.push(Hypothesis { text: "v_p(g(0)) <= v_p(g(u -+ 1)) on L + qZ".into(), holds: true });
        Column::NMinus1
    } else {
        Column::N
    };
    Ok(Ok(BoundCertificate {
        theorem_id: "R22".into(),
        theorem: SEPPOLY.into(),
        hypotheses,
        bound: BinomSum::new(spec.n, column, 0, d),
        auxiliary: Some(Auxiliary::Polynomial { poly: g.clone(), v0: rep.v0, shifted_ok: rep.shifted_ok() }),
        lifted_prime: v.lifted,
    }))
}

fn close_rules(led: &mut Ledger, l: &BTreeSet<u64>) {
    let n = led.n();
    let s = l.len() as u64;
    led.rule("R11", "L-close Sperner", None, vec![(format!("L is {s} positive integers"), !l.contains(&0))], || {
        (BinomSum::new(n, Column::N, 0, s), None)
    });
    led.rule("R11", "L-close Sperner", None, vec![("|L| = 1".to_string(), s == 1)], || {
        (BinomSum::new(n, Column::N, 1, 1), None)
    });
    let is_initial = l.iter().copied().eq(1..=s);
    led.rule(
        "R12",
        "[s]-close in the middle band",
        None,
        vec![
            (format!("L = [{s}]"), is_initial),
            (format!("(n+1)/3 <= {s} <= n/2"), 3 * s > n as u64 && 2 * s <= n as u64),
        ],
        || (BinomSum::new(n, Column::N, 3 * s as i64 - n as i64, s), None),
    );
}

fn intersecting_rules(led: &mut Ledger, v: &View) -> Result<()> {
    let n = led.n();
    let (q, s) = (v.q(), v.s());
    let mt = v.modulus_text();
    if s >= q {
        // every size is in L, so only the empty family qualifies
        led.rule("R19", "general L, degree q-1", Some(v), vec![(format!("L within {{0..{}}}", q - 1), true)], || {
            (BinomSum::new(n, Column::N, 0, q - 1), None)
        });
        return Ok(());
    }
    led.rule(
        "R13",
        "Snevily",
        None,
        vec![
            ("non-modular".to_string(), v.lifted.is_some()),
            ("L is positive integers".to_string(), !v.res.contains(&0)),
        ],
        || (BinomSum::new(n, Column::NMinus1, 0, s), None),
    );
    dsk_rule(led, v);
    led.rule(
        "R15",
        "initial segment {0..s-1}",
        Some(v),
        vec![(format!("L = {{0..{}}} ({mt})", s - 1), v.is_initial_segment(0)), (format!("{s} < q"), s < q)],
        || (BinomSum::new(n, Column::N, 0, 2 * s), None),
    );
    let cyclic = v.cyclic_start();
    let interval_text = format!("L is an interval modulo {q}");
    led.rule(
        "R17",
        "interval, upper tail",
        Some(v),
        vec![(interval_text.clone(), cyclic.is_some()), (format!("|L| = {s} <= n - q + 2"), s as i64 <= n as i64 - q as i64 + 2)],
        || (BinomSum::new(n, Column::N, s as i64, q - 1), None),
    );
    if cyclic.is_some() {
        let m = mu(&v.pp, s)?;
        led.rule("R18", "interval, mu_q(s)", Some(v), vec![(interval_text.clone(), true)], || {
            (BinomSum::new(n, Column::N, 0, m), Some(Auxiliary::Degree { d: m }))
        });
    } else {
        led.reject("R18", "interval, mu_q(s)", format!("fails: {interval_text}"));
    }
    led.rule("R19", "general L, degree q-1", Some(v), vec![(format!("L within {{0..{}}}", q - 1), true)], || {
        (BinomSum::new(n, Column::N, 0, q - 1), None)
    });
    led.rule(
        "R20",
        "interval, q = p^2",
        Some(v),
        vec![(format!("q = p^2 ({q})"), v.pp.k() == 2), (interval_text, cyclic.is_some())],
        || (BinomSum::new(n, Column::N, 0, 2 * s - 1), None),
    );
    match per_alpha_polys(v)? {
        Some(polys) => {
            let d = polys.values().map(|g| g.degree() as u64).max().unwrap_or(0);
            led.applicable.push(BoundCertificate {
                theorem_id: "R22".into(),
                theorem: SEPPOLY.into(),
                hypotheses: vec![Hypothesis {
                    text: format!("each alpha not in L is separated from L + {q}Z in degree <= {d}"),
                    holds: true,
                }],
                bound: BinomSum::new(n, Column::N, 0, d),
                auxiliary: Some(Auxiliary::PerAlpha { polys, d }),
                lifted_prime: v.lifted,
            });
        }
        None => led.reject("R22", SEPPOLY, "no candidate separates some alpha".into()),
    }
    Ok(())
}

/// `h(alpha - y)` written in factored form.
pub fn reflected(h: &FactoredIntPoly, alpha: &BigInt) -> FactoredIntPoly {
    let sign = if h.degree().is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    FactoredIntPoly::new(sign * h.lead(), h.roots().iter().map(|r| alpha - r)).expect("nonzero lead")
}

/// For each `alpha` outside `L`, the lowest-degree separating candidate among
/// the canonical product over `L` and the reflected closure of `alpha - L`.
fn per_alpha_polys(v: &View) -> Result<Option<BTreeMap<u64, FactoredIntPoly>>> {
    let q = v.q();
    let set: BTreeSet<u64> = v.res.iter().copied().collect();
    let canonical = canonical_interval_poly(v.res.iter().copied());
    let mut out = BTreeMap::new();
    for alpha in (0..q).filter(|a| !set.contains(a)) {
        let a = BigInt::from(alpha);
        let mut cands = Vec::new();
        let shifted: Vec<u64> = v.res.iter().map(|&l| (alpha + q - l) % q).collect();
        let (lo, hi) = (*shifted.iter().min().expect("L nonempty"), *shifted.iter().max().expect("L nonempty"));
        let cl = q_closure(&v.pp, &IntervalL::new(&v.pp, lo, hi)?)?;
        cands.push(reflected(&canonical_interval_poly(cl.interval.elements()), &a));
        cands.push(canonical.clone());
        cands.sort_by_key(|g| g.degree());
        let Some(g) = cands.into_iter().find(|g| crate::seppoly::separates(&v.pp, g, &a, &v.res)) else {
            return Ok(None);
        };
        out.insert(alpha, g);
    }
    Ok(Some(out))
}

fn uniform_rules(led: &mut Ledger) -> Result<()> {
    let spec = led.spec;
    let n = spec.n;
    let pp = spec.modulus.expect("validated");
    let q = pp.q();
    let k = spec.uniform_residue.expect("validated") % q;
    led.rule("R16", "uniform, C(n, q-1)", None, vec![(format!("2(q-1) <= n ({})", 2 * (q - 1)), 2 * (q - 1) <= n as u64)], || {
        (BinomSum::single(n, q - 1), None)
    });
    // sizes congruent to k, intersections avoiding k: L is every other residue
    let others: BTreeSet<u64> = (0..q).filter(|&r| r != k).collect();
    let view = View::of(spec, others);
    intersecting_rules(led, &view)
}

const HAMMING_UPGRADE: &str =
    "the n-1 column is unsound for distances: n = 3, L = {2} admits {}, {1,2}, {1,3}, {2,3}";

fn hamming_rules(led: &mut Ledger) -> Result<()> {
    let spec = led.spec;
    let n = spec.n;
    let v = View::of(spec, spec.residues());
    let (q, s) = (v.q(), v.s());
    led.rule("R21", "Delsarte", None, vec![("non-modular".into(), v.lifted.is_some())], || {
        (BinomSum::new(n, Column::N, 0, s), None)
    });
    led.rule("R21", "Frankl, prime modulus", Some(&v), vec![("modulus given and prime".into(), spec.modulus.is_some() && v.pp.k() == 1)], || {
        (BinomSum::new(n, Column::N, 0, s), None)
    });
    let initial = v.is_initial_segment(1);
    led.rule(
        "R21",
        "Xu-Liu for distances",
        Some(&v),
        vec![(format!("L = [{s}]"), initial), (format!("q > {s}"), q > s)],
        || (BinomSum::new(n, Column::N, 0, s), None),
    );
    if v.pp.k() == 1 || initial {
        led.reject("R21", "n-1 improvement for distances", HAMMING_UPGRADE.into());
    }
    dsk_rule(led, &v);
    seppoly_rules(led, &v, false)
}

/// Bound from explicitly supplied (or searched) separating polynomials.
pub fn bound_from_seppoly(spec: &ConstraintSpec, source: SeppolySource) -> Result<BoundCertificate> {
    spec.validate()?;
    match spec.kind {
        Kind::DiffSperner | Kind::Hamming => {
            let v = View::of(spec, spec.residues());
            let g = match source {
                SeppolySource::Single(g) => g,
                SeppolySource::PerAlpha(mut m) => m
                    .remove(&0)
                    .ok_or_else(|| Error::InvalidConstraint("need a polynomial for alpha = 0".into()))?,
                SeppolySource::Search { max_degree, window } => {
                    search_min_degree(&v.pp, &BigInt::zero(), &v.res, max_degree, window)?
                        .ok_or_else(|| Error::SeparationFailed("no polynomial found within the search limits".into()))?
                        .poly
                }
            };
            match zero_certificate(spec, &v, &g, spec.kind == Kind::DiffSperner)? {
                Ok(c) => Ok(c),
                Err(r) => Err(Error::SeparationFailed(r.reason)),
            }
        }
        Kind::Intersecting | Kind::IntersectingUniform => {
            let residues = match spec.kind {
                Kind::Intersecting => spec.residues(),
                _ => {
                    let q = spec.modulus.expect("validated").q();
                    let k = spec.uniform_residue.expect("validated") % q;
                    (0..q).filter(|&r| r != k).collect()
                }
            };
            let v = View::of(spec, residues);
            let q = v.q();
            let set: BTreeSet<u64> = v.res.iter().copied().collect();
            let mut polys = BTreeMap::new();
            for alpha in (0..q).filter(|a| !set.contains(a)) {
                let a = BigInt::from(alpha);
                let g = match &source {
                    SeppolySource::Single(g) => g.clone(),
                    SeppolySource::PerAlpha(m) => m
                        .get(&alpha)
                        .cloned()
                        .ok_or_else(|| Error::InvalidConstraint(format!("missing polynomial for alpha = {alpha}")))?,
                    SeppolySource::Search { max_degree, window } => {
                        search_min_degree(&v.pp, &a, &v.res, *max_degree, window.clone())?
                            .ok_or_else(|| Error::SeparationFailed(format!("alpha = {alpha}: nothing found")))?
                            .poly
                    }
                };
                let rep = check_separation(&v.pp, &g, &a, &v.res)?;
                if !rep.separates {
                    let class = rep.failing_class().map_or("?".to_string(), |c| c.to_string());
                    return Err(Error::SeparationFailed(format!("alpha = {alpha}: {g} fails on class {class}")));
                }
                polys.insert(alpha, g);
            }
            let d = polys.values().map(|g| g.degree() as u64).max().unwrap_or(0);
            Ok(BoundCertificate {
                theorem_id: "R22".into(),
                theorem: SEPPOLY.into(),
                hypotheses: vec![Hypothesis {
                    text: format!("each alpha not in L is separated from L + {q}Z in degree <= {d}"),
                    holds: true,
                }],
                bound: BinomSum::new(spec.n, Column::N, 0, d),
                auxiliary: Some(Auxiliary::PerAlpha { polys, d }),
                lifted_prime: v.lifted,
            })
        }
        Kind::CloseSperner | Kind::Antichain => {
            Err(Error::NoApplicableRule(format!("{} has no separating-polynomial bound", spec.kind)))
        }
    }
}
