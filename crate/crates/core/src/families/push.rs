//! Push an antichain into the band `[s, n-s]` one level at a time.

use std::collections::HashMap;

use super::matching::max_bipartite_matching;
use super::{format_set, full_mask, popcount, Mask, SetFamily};
use crate::error::{Error, Result};

/// Replaces the smallest members by one-larger supersets via a saturating
/// matching until every size is at least `s`, then does the same from the
/// top on complements. Member positions are kept.
pub fn push_to_middle(fam: &SetFamily, s: usize) -> Result<SetFamily> {
    let n = fam.n();
    if 2 * s > n {
        return Err(Error::PushRange { s, n });
    }
    if let Some((a, b)) = fam.first_comparable_pair() {
        return Err(Error::NotAntichain(format!("{} and {}", format_set(a), format_set(b))));
    }
    let mut members = fam.members().to_vec();
    push_up(&mut members, n, s)?;
    let full = full_mask(n);
    let mut comp: Vec<Mask> = members.iter().map(|&m| full & !m).collect();
    push_up(&mut comp, n, s)?;
    members = comp.iter().map(|&m| full & !m).collect();
    SetFamily::new(n, members)
}

fn push_up(members: &mut [Mask], n: usize, s: usize) -> Result<()> {
    loop {
        let Some(k) = members.iter().map(|&m| popcount(m)).min() else {
            return Ok(());
        };
        if k >= s {
            return Ok(());
        }
        let level: Vec<usize> = (0..members.len()).filter(|&i| popcount(members[i]) == k).collect();
        // right side: every (k+1)-superset of some level member, in first-seen order
        let mut right: Vec<Mask> = Vec::new();
        let mut index: HashMap<Mask, usize> = HashMap::new();
        let adj: Vec<Vec<usize>> = level
            .iter()
            .map(|&i| {
                let a = members[i];
                (0..n)
                    .filter(|x| a >> x & 1 == 0)
                    .map(|x| {
                        let sup = a | 1 << x;
                        *index.entry(sup).or_insert_with(|| {
                            right.push(sup);
                            right.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let matching = max_bipartite_matching(&adj, right.len());
        for (&i, m) in level.iter().zip(&matching) {
            match m {
                Some(j) => members[i] = right[*j],
                None => return Err(Error::NoMatching { from: k, to: k + 1 }),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::set_from_elements;

    fn fam(n: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::new(n, sets.iter().map(|s| set_from_elements(s)).collect()).unwrap()
    }

    #[test]
    fn single_point_goes_up() {
        let out = push_to_middle(&fam(4, &[&[1]]), 2).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(popcount(out.members()[0]), 2);
        assert!(out.members()[0] & 1 == 1);
    }

    #[test]
    fn middle_level_unchanged() {
        let f = SetFamily::uniform(4, 2);
        assert_eq!(push_to_middle(&f, 2).unwrap(), f);
    }

    #[test]
    fn both_ends() {
        let out = push_to_middle(&fam(4, &[&[1], &[2, 3, 4]]), 2).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.members().iter().all(|&m| popcount(m) == 2));
        assert!(out.is_antichain());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(push_to_middle(&fam(3, &[&[1]]), 2), Err(Error::PushRange { .. })));
        assert!(matches!(
            push_to_middle(&fam(4, &[&[1], &[1, 2]]), 2),
            Err(Error::NotAntichain(_))
        ));
    }

    #[test]
    fn whole_low_level_moves_together() {
        // all singletons of [6] must become 6 distinct pairs
        let f = SetFamily::uniform(6, 1);
        let out = push_to_middle(&f, 2).unwrap();
        assert_eq!(out.len(), 6);
        assert!(out.is_antichain());
        for (a, b) in f.members().iter().zip(out.members()) {
            assert_eq!(a & b, *a);
        }
    }
}
