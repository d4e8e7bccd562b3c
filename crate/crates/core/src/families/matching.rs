//! Maximum bipartite matching by augmenting paths.

/// `left_adj[u]` lists the right vertices adjacent to left vertex `u`.
/// Returns the partner of each left vertex. Neighbours are tried in the
/// order given, so the result is deterministic.
pub fn max_bipartite_matching(left_adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    let mut match_right: Vec<Option<usize>> = vec![None; n_right];
    let mut match_left: Vec<Option<usize>> = vec![None; left_adj.len()];
    let mut seen = vec![usize::MAX; n_right];
    for u in 0..left_adj.len() {
        augment(u, u, left_adj, &mut match_right, &mut seen);
    }
    for (r, l) in match_right.iter().enumerate() {
        if let Some(l) = *l {
            match_left[l] = Some(r);
        }
    }
    match_left
}

fn augment(
    u: usize,
    round: usize,
    adj: &[Vec<usize>],
    match_right: &mut [Option<usize>],
    seen: &mut [usize],
) -> bool {
    for &r in &adj[u] {
        if seen[r] == round {
            continue;
        }
        seen[r] = round;
        let free = match match_right[r] {
            None => true,
            Some(other) => augment(other, round, adj, match_right, seen),
        };
        if free {
            match_right[r] = Some(u);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(adj: &[Vec<usize>], n_right: usize) -> usize {
        fn go(i: usize, adj: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
            if i == adj.len() {
                return 0;
            }
            let mut best = go(i + 1, adj, used);
            for &r in &adj[i] {
                if !used[r] {
                    used[r] = true;
                    best = best.max(1 + go(i + 1, adj, used));
                    used[r] = false;
                }
            }
            best
        }
        go(0, adj, &mut vec![false; n_right])
    }

    #[test]
    fn needs_augmenting_path() {
        let adj = vec![vec![0, 1], vec![0]];
        assert_eq!(max_bipartite_matching(&adj, 2), vec![Some(1), Some(0)]);
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let nl = rng.gen_range(0..6);
            let nr = rng.gen_range(1..6);
            let adj: Vec<Vec<usize>> =
                (0..nl).map(|_| (0..nr).filter(|_| rng.gen_bool(0.4)).collect()).collect();
            let m = max_bipartite_matching(&adj, nr);
            let size = m.iter().flatten().count();
            assert_eq!(size, brute(&adj, nr));
            let mut used = vec![false; nr];
            for (u, r) in m.iter().enumerate() {
                if let Some(r) = *r {
                    assert!(adj[u].contains(&r));
                    assert!(!used[r]);
                    used[r] = true;
                }
            }
        }
    }
}
