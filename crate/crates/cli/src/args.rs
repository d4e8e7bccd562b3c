//! Parsing of the shared flag values.

use std::collections::BTreeSet;

use sperner_core::padic::PrimePower;

/// Parses `L` from a comma list whose items are integers, inclusive ranges
/// `a..b`, or modulo-`q` wrap-around ranges `a..b@wrap` (`a, a+1, .., q-1,
/// 0, .., b`). The empty string is the empty set.
pub fn parse_l(text: &str, q: Option<u64>) -> Result<BTreeSet<u64>, String> {
    let mut out = BTreeSet::new();
    for item in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (range, wrap) = match item.strip_suffix("@wrap") {
            Some(r) => (r, true),
            None => (item, false),
        };
        let Some((a, b)) = range.split_once("..") else {
            if wrap {
                return Err(format!("{item:?}: @wrap needs a range a..b"));
            }
            out.insert(number(item)?);
            continue;
        };
        let (a, b) = (number(a)?, number(b)?);
        if wrap {
            let q = q.ok_or_else(|| format!("{item:?}: a wrap-around range needs --q"))?;
            if a >= q || b >= q {
                return Err(format!("{item:?}: wrap-around endpoints must be below q = {q}"));
            }
            if a <= b {
                out.extend(a..=b);
            } else {
                out.extend(a..q);
                out.extend(0..=b);
            }
        } else {
            if a > b {
                return Err(format!("{item:?}: empty range (use a..b@wrap for wrap-around)"));
            }
            out.extend(a..=b);
        }
    }
    Ok(out)
}

fn number(t: &str) -> Result<u64, String> {
    t.trim().parse().map_err(|_| format!("{t:?} is not a non-negative integer"))
}

/// Comma-separated signed integers.
pub fn parse_ints(text: &str) -> Result<Vec<i64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("{t:?} is not an integer")))
        .collect()
}

pub fn prime_power(q: u64) -> Result<PrimePower, String> {
    PrimePower::from_modulus(q).map_err(|e| format!("--q {q}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_l("1,3", None).unwrap(), BTreeSet::from([1, 3]));
        assert_eq!(parse_l("1..3", None).unwrap(), BTreeSet::from([1, 2, 3]));
        assert_eq!(parse_l("1..2, 5", None).unwrap(), BTreeSet::from([1, 2, 5]));
        assert_eq!(parse_l("", None).unwrap(), BTreeSet::new());
        assert_eq!(parse_l("7..1@wrap", Some(9)).unwrap(), BTreeSet::from([7, 8, 0, 1]));
    }

    #[test]
    fn malformed() {
        assert!(parse_l("3..1", None).is_err());
        assert!(parse_l("a", None).is_err());
        assert!(parse_l("7..1@wrap", None).is_err());
        assert!(parse_l("2@wrap", Some(5)).is_err());
        assert!(parse_l("1..9@wrap", Some(9)).is_err());
        assert!(parse_ints("1,x").is_err());
        assert_eq!(parse_ints("-1, 2").unwrap(), vec![-1, 2]);
    }
}
