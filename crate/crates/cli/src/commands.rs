//! Routing from parsed arguments to the core library.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use serde_json::{json, Value};
use sperner_core::bounds::{best_bound, binomial, BinomSum, Column};
use sperner_core::closure::{count_closed_pairs, is_q_closed, mu, q_closure, IntervalL};
use sperner_core::families::{
    first_violation, max_family_with_limit, push_to_middle, ConstraintSpec, Kind, SetFamily, MAX_N,
};
use sperner_core::padic::{lucas_nondivisible, to_digits, vp, vp_binomial, vp_factorial, Prime, PrimePower};
use sperner_core::polylab::{
    build_diff_sperner_system, build_hamming_system, build_midband_system, verify_independence, FVariant,
    MidbandVariant, ProofSystem,
};
use sperner_core::seppoly::{canonical_interval_poly, check_separation, search_min_degree, FactoredIntPoly};
use sperner_core::Error;

use crate::args::{parse_ints, parse_l, prime_power};
use crate::{Cli, Command, Failure, FileSpecArgs, Outcome, SeppolyCommand, SpecArgs, Status, Variant};

pub const DEFAULT_SEED: u64 = 20240601;

type Res = Result<Outcome, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Internal(e.to_string()))
}

/// Numbers that fit in 64 bits stay numbers; larger ones become strings.
fn big(v: &BigUint) -> Value {
    match u64::try_from(v) {
        Ok(x) => json!(x),
        Err(_) => json!(v.to_string()),
    }
}

fn signed(v: &BigInt) -> Value {
    match i64::try_from(v) {
        Ok(x) => json!(x),
        Err(_) => json!(v.to_string()),
    }
}

fn prime(p: u64) -> Result<Prime, Failure> {
    Prime::new(p).map_err(|e| usage(format!("--p {p}: {e}")))
}

pub fn dispatch(cli: &Cli) -> Res {
    match &cli.command {
        Command::Vp { p, n, factorial } => cmd_vp(*p, n, *factorial),
        Command::Binom { p, x, y } => cmd_binom(*p, *x, *y),
        Command::Digits { q, s } => {
            let pp = prime_power(*q).map_err(usage)?;
            let d = to_digits(&pp, *s)?;
            Ok(Outcome::ok(to_json(&d)?, d.to_string()))
        }
        Command::Closure { q, lo, hi } => cmd_closure(*q, *lo, *hi),
        Command::Mu { q, s } => {
            let pp = prime_power(*q).map_err(usage)?;
            let m = mu(&pp, *s)?;
            Ok(Outcome::ok(json!({ "q": q, "s": s, "mu": m }), m.to_string()))
        }
        Command::Census { q } => cmd_census(*q),
        Command::Seppoly(sub) => cmd_seppoly(sub),
        Command::Bound(a) => cmd_bound(a),
        Command::Table { kind, q, n, brute_max } => cmd_table(kind, *q, *n, *brute_max, cli.budget),
        Command::Search(a) => cmd_search(a, cli.budget),
        Command::Check { spec } => cmd_check(spec),
        Command::Push { file, s, n } => cmd_push(file, *s, *n),
        Command::Verify { spec, variant } => cmd_verify(spec, *variant),
    }
}

fn cmd_vp(p: u64, n: &str, factorial: bool) -> Res {
    let p = prime(p)?;
    let v = if factorial {
        let n: BigUint = n.parse().map_err(|_| usage(format!("--n {n:?} is not a non-negative integer")))?;
        vp_factorial(p, n)
    } else {
        let n: BigInt = n.parse().map_err(|_| usage(format!("--n {n:?} is not an integer")))?;
        vp(p, n)
    };
    Ok(Outcome::ok(json!({ "p": p, "n": n, "factorial": factorial, "valuation": v }), v.to_string()))
}

fn cmd_binom(p: u64, x: u64, y: u64) -> Res {
    let p = prime(p)?;
    let c = binomial(x, y);
    let v = if y > x { vp(p, 0) } else { vp_binomial(p, y, x - y) };
    let lucas = lucas_nondivisible(p, x, y);
    let text = format!("C({x},{y}) = {c}\nv_{p} = {v}\np divides C(x,y): {}", !lucas);
    Ok(Outcome::ok(
        json!({ "p": p, "x": x, "y": y, "binomial": big(&c), "valuation": v, "lucas_nondivisible": lucas }),
        text,
    ))
}

fn cmd_closure(q: u64, lo: u64, hi: u64) -> Res {
    let pp = prime_power(q).map_err(usage)?;
    let l = IntervalL::new(&pp, lo, hi)?;
    let closed = is_q_closed(&pp, &l);
    let c = q_closure(&pp, &l)?;
    let m = mu(&pp, l.size())?;
    let text = format!("L = {l}\nq-closed: {closed}\nclosure: {} (length {})\nmu_{q}({}) = {m}", c.interval, c.length, l.size());
    Ok(Outcome::ok(json!({ "q": q, "input": l, "closed": closed, "closure": c, "mu": m }), text))
}

fn cmd_census(q: u64) -> Res {
    let pp = prime_power(q).map_err(usage)?;
    let c = count_closed_pairs(&pp);
    let text = format!(
        "q = {q}: enumerated {}, closed form {}, printed form {} (reference only)",
        c.enumerated, c.closed_form, c.printed_form
    );
    let payload = json!({
        "q": q,
        "enumerated": big(&c.enumerated),
        "closed_form": signed(&c.closed_form),
        "printed_form": signed(&c.printed_form),
        "agrees": c.agrees(),
    });
    let mut out = Outcome::ok(payload, text);
    if BigInt::from(c.enumerated.clone()) != c.printed_form {
        out = out.note(format!("printed form {} differs from the enumeration {}", c.printed_form, c.enumerated));
    }
    if !c.agrees() {
        out = out.note("enumeration disagrees with the closed form").with_status(Status::Error);
    }
    Ok(out)
}

fn cmd_seppoly(sub: &SeppolyCommand) -> Res {
    match sub {
        SeppolyCommand::Check { q, alpha, l, roots, lead } => {
            let pp = prime_power(*q).map_err(usage)?;
            let l: Vec<u64> = parse_l(l, Some(*q)).map_err(usage)?.into_iter().collect();
            let g = FactoredIntPoly::new(*lead, parse_ints(roots).map_err(usage)?)?;
            let rep = check_separation(&pp, &g, &BigInt::from(*alpha), &l)?;
            let mut text = format!("separates: {}\nv0 = {}\n", rep.separates, rep.v0);
            for (r, m) in &rep.class_minima {
                let _ = writeln!(text, "class {r}: min valuation {m}");
            }
            let _ = write!(text, "shifted (u-1): {}\nshifted (u+1): {}", rep.shifted_minus_ok, rep.shifted_plus_ok);
            let status = if rep.separates { Status::Ok } else { Status::Infeasible };
            let mut payload = to_json(&rep)?;
            payload["poly"] = to_json(&g)?;
            payload["failing_class"] = json!(rep.failing_class());
            Ok(Outcome::ok(payload, text).with_status(status))
        }
        SeppolyCommand::Find { q, alpha, l, max_degree, window } => {
            let pp = prime_power(*q).map_err(usage)?;
            let l: Vec<u64> = parse_l(l, Some(*q)).map_err(usage)?.into_iter().collect();
            let w = window.unwrap_or(q.saturating_mul(*q) as i64);
            if w <= 0 {
                return Err(usage("--window must be positive"));
            }
            match search_min_degree(&pp, &BigInt::from(*alpha), &l, *max_degree, 0..w)? {
                Some(hit) => {
                    let roots: Vec<String> = hit.poly.roots().iter().map(|r| r.to_string()).collect();
                    let text = format!("degree {}: roots [{}] ({} candidates)", hit.degree, roots.join(", "), hit.candidates_checked);
                    Ok(Outcome::ok(to_json(&hit)?, text))
                }
                None => Ok(Outcome::ok(json!(null), format!("no separating polynomial of degree <= {max_degree}"))
                    .with_status(Status::Infeasible)),
            }
        }
    }
}

fn make_spec(kind: &str, n: usize, q: Option<u64>, l: &str, residue: Option<u64>) -> Result<ConstraintSpec, Failure> {
    let kind: Kind = kind.parse()?;
    let pp = q.map(prime_power).transpose().map_err(usage)?;
    let l: BTreeSet<u64> = parse_l(l, q).map_err(usage)?;
    Ok(match kind {
        Kind::Antichain => ConstraintSpec::antichain(n),
        Kind::IntersectingUniform => {
            let pp = pp.ok_or_else(|| usage("intersecting-uniform needs --q"))?;
            let k = residue.ok_or_else(|| usage("intersecting-uniform needs --residue"))?;
            ConstraintSpec::uniform(n, pp, k)?
        }
        _ => {
            if residue.is_some() {
                return Err(usage("--residue only applies to intersecting-uniform"));
            }
            ConstraintSpec::new(kind, n, l, pp)?
        }
    })
}

fn spec_json(spec: &ConstraintSpec) -> Value {
    json!({
        "kind": spec.kind,
        "n": spec.n,
        "q": spec.modulus.map(|m| m.q()),
        "L": spec.l,
        "residue": spec.uniform_residue,
    })
}

fn binom_json(b: &BinomSum) -> Value {
    json!({
        "value": big(&b.value),
        "column": b.column,
        "lower": b.lower,
        "upper": b.upper,
        "text": b.to_string(),
    })
}

fn cmd_bound(a: &SpecArgs) -> Res {
    let spec = make_spec(&a.kind, a.n, a.q, &a.l, a.residue)?;
    let report = match best_bound(&spec) {
        Ok(r) => r,
        Err(Error::NoApplicableRule(why)) => {
            return Ok(Outcome::ok(json!({ "spec": spec_json(&spec), "reason": why }), format!("no rule applies: {why}"))
                .with_status(Status::Infeasible));
        }
        Err(e) => return Err(e.into()),
    };
    let m = &report.minimum;
    let mut text = format!("bound {} via {} [{}]\n{}\n", m.bound.value, m.theorem_id, m.theorem, m.bound);
    for h in &m.hypotheses {
        let _ = writeln!(text, "  hypothesis: {} ({})", h.text, if h.holds { "holds" } else { "fails" });
    }
    if let Some(p) = m.lifted_prime {
        let _ = writeln!(text, "  lifted to p = {p}");
    }
    let ties: Vec<&str> = report.ties.iter().map(|c| c.theorem_id.as_str()).collect();
    let _ = writeln!(text, "ties: {}", ties.join(", "));
    for c in &report.applicable {
        let _ = writeln!(text, "applicable: {c}");
    }
    for r in &report.rejected {
        let _ = writeln!(text, "rejected: {} [{}]: {}", r.theorem_id, r.theorem, r.reason);
    }
    let payload = json!({
        "spec": spec_json(&spec),
        "bound": big(&m.bound.value),
        "theorem_id": m.theorem_id,
        "sum": binom_json(&m.bound),
        "certificate": to_json(m)?,
        "ties": ties,
        "applicable": to_json(&report.applicable)?,
        "rejected": to_json(&report.rejected)?,
    });
    Ok(Outcome::ok(payload, text))
}

fn cmd_table(kind: &str, q: u64, n: usize, brute_max: usize, budget: Option<u64>) -> Res {
    let kind: Kind = kind.parse()?;
    let pp = prime_power(q).map_err(usage)?;
    let specs: Vec<(String, ConstraintSpec)> = match kind {
        Kind::Antichain => return Err(usage("table needs a kind with a set L")),
        Kind::IntersectingUniform => (0..q)
            .map(|k| Ok((format!("k={k}"), ConstraintSpec::uniform(n, pp, k)?)))
            .collect::<Result<_, Error>>()?,
        _ => {
            let modulus = if kind == Kind::CloseSperner { None } else { Some(pp) };
            let mut out = Vec::new();
            for lo in 1..q {
                for hi in lo..q {
                    out.push((format!("{lo}..{hi}"), ConstraintSpec::new(kind, n, lo..=hi, modulus)?));
                }
            }
            out
        }
    };
    let mut rows = Vec::new();
    let mut text = format!("{:<10} {:>12} {:<6} {:>8}\n", "L", "bound", "rule", "brute");
    let mut exhausted = false;
    let mut unsound = Vec::new();
    for (label, spec) in specs {
        let (bound, rule) = match best_bound(&spec) {
            Ok(r) => (Some(r.minimum.bound.value.clone()), r.minimum.theorem_id.clone()),
            Err(Error::NoApplicableRule(_)) => (None, "-".to_string()),
            Err(e) => return Err(e.into()),
        };
        let brute = if n <= brute_max { Some(max_family_with_limit(&spec, budget, MAX_N)?) } else { None };
        exhausted |= brute.as_ref().is_some_and(|b| !b.exact);
        if let (Some(b), Some(r)) = (&bound, &brute) {
            if BigUint::from(r.max_size) > *b {
                unsound.push(label.clone());
            }
        }
        let bound_s = bound.as_ref().map_or("-".to_string(), |b| b.to_string());
        let brute_s = brute.as_ref().map_or("-".to_string(), |r| format!("{}{}", r.max_size, if r.exact { "" } else { "+" }));
        let _ = writeln!(text, "{label:<10} {bound_s:>12} {rule:<6} {brute_s:>8}");
        rows.push(json!({
            "L": label,
            "bound": bound.as_ref().map(big),
            "theorem_id": rule,
            "brute_force": brute.as_ref().map(|r| r.max_size),
            "exact": brute.as_ref().map(|r| r.exact),
        }));
    }
    let mut out = Outcome::ok(json!({ "kind": kind, "q": q, "n": n, "rows": rows }), text);
    if exhausted {
        out = out.note("node budget ran out on some rows; their brute-force value is a lower bound").with_status(Status::BudgetExhausted);
    }
    if !unsound.is_empty() {
        out = out.note(format!("brute force exceeds the bound for L = {}", unsound.join(", "))).with_status(Status::Error);
    }
    Ok(out)
}

fn cmd_search(a: &SpecArgs, budget: Option<u64>) -> Res {
    let spec = make_spec(&a.kind, a.n, a.q, &a.l, a.residue)?;
    let r = max_family_with_limit(&spec, budget, MAX_N)?;
    let text = format!(
        "max_size {}{}\nwitness: {}\nnodes: {}",
        r.max_size,
        if r.exact { "" } else { " (lower bound, budget exhausted)" },
        r.witness,
        r.nodes_explored
    );
    let mut payload = to_json(&r)?;
    payload["spec"] = spec_json(&spec);
    let out = Outcome::ok(payload, text);
    Ok(if r.exact { out } else { out.with_status(Status::BudgetExhausted) })
}

fn read_family(path: &str, n: Option<usize>) -> Result<SetFamily, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?;
    Ok(SetFamily::parse(&text, n)?)
}

fn cmd_check(a: &FileSpecArgs) -> Res {
    let fam = read_family(&a.file, a.n)?;
    let spec = make_spec(&a.kind, fam.n(), a.q, &a.l, a.residue)?;
    match first_violation(&spec, &fam)? {
        None => Ok(Outcome::ok(
            json!({ "spec": spec_json(&spec), "size": fam.len(), "satisfied": true }),
            format!("ok: {} members satisfy {}", fam.len(), spec.kind),
        )),
        Some(v) => Ok(Outcome::ok(
            json!({ "spec": spec_json(&spec), "size": fam.len(), "satisfied": false, "violation": to_json(&v)? }),
            format!("violation: {v}"),
        )
        .with_status(Status::Infeasible)),
    }
}

fn cmd_push(file: &str, s: usize, n: Option<usize>) -> Res {
    let fam = read_family(file, n)?;
    match push_to_middle(&fam, s) {
        Ok(out) => {
            let text = out.to_text();
            Ok(Outcome::ok(json!({ "s": s, "input": to_json(&fam)?, "output": to_json(&out)? }), text))
        }
        Err(e @ Error::NoMatching { .. }) => {
            Ok(Outcome::ok(json!({ "s": s, "reason": e.to_string() }), e.to_string()).with_status(Status::Infeasible))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_verify(a: &FileSpecArgs, variant: Option<Variant>) -> Res {
    let fam = read_family(&a.file, a.n)?;
    let n = fam.n();
    let kind: Kind = a.kind.parse()?;
    let l: BTreeSet<u64> = parse_l(&a.l, a.q).map_err(usage)?;
    let mut notes = Vec::new();
    let (sys, p): (ProofSystem, Prime) = match variant {
        Some(v @ (Variant::Sym | Variant::Close)) => {
            let s = l.len();
            if l != (1..=s as u64).collect() {
                return Err(usage("mid-band variants need L = 1..s"));
            }
            let mv = if v == Variant::Sym { MidbandVariant::Sym } else { MidbandVariant::Close };
            let sys = build_midband_system(&fam, s, mv)?;
            let p = sys.modulus.map_or_else(|| Prime::next_above(n as u64), |m| m.p());
            (sys, p)
        }
        _ => {
            let pp = match a.q {
                Some(q) => prime_power(q).map_err(usage)?,
                None => {
                    let top = l.iter().copied().max().unwrap_or(0).max(n as u64);
                    let p = Prime::next_above(top);
                    notes.push(format!("no --q given; working modulo p = {p}"));
                    PrimePower::prime(p)
                }
            };
            let lv: Vec<u64> = l.iter().copied().collect();
            let g = canonical_interval_poly(lv.iter().copied());
            let rep = check_separation(&pp, &g, &BigInt::from(0), &lv)?;
            if !rep.separates {
                notes.push(format!("prod (y - l) does not separate 0 from L modulo {}", pp.q()));
            }
            let sys = match kind {
                Kind::DiffSperner => {
                    let fv = match variant {
                        Some(Variant::MinusOne) => FVariant::MinusOne,
                        Some(Variant::Plain) => FVariant::Plain,
                        Some(Variant::Absent) => FVariant::Absent,
                        _ if rep.shifted_minus_ok => FVariant::MinusOne,
                        _ if rep.shifted_plus_ok => FVariant::Plain,
                        _ => FVariant::Absent,
                    };
                    build_diff_sperner_system(&fam, &g, pp, fv)?
                }
                Kind::Hamming => build_hamming_system(&fam, &g, pp)?,
                other => return Err(usage(format!("verify supports diff-sperner and hamming, not {other}"))),
            };
            if let Ok(spec) = ConstraintSpec::new(kind, n, l.iter().copied(), Some(pp)) {
                if let Some(v) = first_violation(&spec, &fam)? {
                    notes.push(format!("family violates the constraint: {v}"));
                }
            }
            (sys, pp.p())
        }
    };
    let rep = verify_independence(&sys, p);
    let blocks: Vec<Value> = sys.blocks.iter().map(|b| json!({ "name": b.name, "size": b.polys.len() })).collect();
    let dim = BinomSum::new(n, Column::N, 0, sys.degree_cap as u64);
    let mut text = String::new();
    for b in &sys.blocks {
        let _ = writeln!(text, "block {}: {} polynomials", b.name, b.polys.len());
    }
    let _ = writeln!(text, "rank {} of {} (space of degree <= {} has dimension {})", rep.rank, rep.total, sys.degree_cap, dim.value);
    let _ = write!(text, "{} pattern: {}", rep.pattern.kind, if rep.pattern.holds { "holds" } else { "fails" });
    if let Some(o) = &rep.pattern.first_offense {
        let _ = write!(text, " ({})", o.detail);
    }
    let payload = json!({
        "n": n,
        "members": sys.family.len(),
        "degree_cap": sys.degree_cap,
        "dimension": big(&dim.value),
        "blocks": blocks,
        "report": to_json(&rep)?,
    });
    let status = if rep.full_rank && rep.pattern.holds { Status::Ok } else { Status::Infeasible };
    let mut out = Outcome::ok(payload, text).with_status(status);
    for n in notes {
        out = out.note(n);
    }
    Ok(out)
}
