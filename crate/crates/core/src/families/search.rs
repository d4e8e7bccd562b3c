//! Exact maximum families as maximum cliques of the compatibility graph.

use serde::Serialize;

use super::clique::CliqueGraph;
use super::{popcount, ConstraintSpec, Mask, SetFamily, MAX_N};
use crate::error::{Error, Result};

/// Ground-set limit used by [`max_family`].
pub const DEFAULT_MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub max_size: usize,
    pub witness: SetFamily,
    pub nodes_explored: u64,
    /// False when the node budget ran out; `max_size` is then only a lower bound.
    pub exact: bool,
}

pub fn max_family(spec: &ConstraintSpec, node_budget: Option<u64>) -> Result<SearchResult> {
    max_family_with_limit(spec, node_budget, DEFAULT_MAX_N)
}

/// Vertices are the admissible subsets ordered by size, then bit-set value.
/// The witness is the lexicographically first maximum clique in that order.
pub fn max_family_with_limit(spec: &ConstraintSpec, node_budget: Option<u64>, max_n: usize) -> Result<SearchResult> {
    spec.validate()?;
    let n = spec.n;
    if n > max_n.min(MAX_N) {
        return Err(Error::GroundSetTooLarge(n, max_n.min(MAX_N)));
    }
    let pred = spec.predicate();
    let mut vertices: Vec<Mask> = (0..1u32 << n).filter(|&m| pred.member_ok(m)).collect();
    vertices.sort_by_key(|&m| (popcount(m), m));
    let g = CliqueGraph::from_fn(vertices.len(), |u, v| pred.pair_ok(vertices[u], vertices[v]));

    let seed = greedy_clique(&g);
    let out = g.max_clique(&seed, node_budget);
    let mut nodes = out.nodes;
    let mut clique = out.clique;
    if out.exact {
        let remaining = node_budget.map(|b| b.saturating_sub(nodes));
        let (sweep, used) = lex_first(&g, clique.len(), remaining);
        nodes += used;
        // on a truncated sweep the branch-and-bound witness stands
        if let Some(sweep) = sweep {
            clique = sweep;
        }
    }
    let witness = SetFamily::new(n, clique.iter().map(|&i| vertices[i]).collect())?;
    Ok(SearchResult { max_size: witness.len(), witness, nodes_explored: nodes, exact: out.exact })
}

fn greedy_clique(g: &CliqueGraph) -> Vec<usize> {
    let mut c: Vec<usize> = Vec::new();
    for v in 0..g.len() {
        if c.iter().all(|&u| g.adjacent(u, v)) {
            c.push(v);
        }
    }
    c
}

/// Picks vertices in index order, keeping each one that still extends to a
/// clique of size `w`.
fn lex_first(g: &CliqueGraph, w: usize, budget: Option<u64>) -> (Option<Vec<usize>>, u64) {
    let mut chosen: Vec<usize> = Vec::new();
    let mut nodes = 0;
    for c in 0..g.len() {
        if chosen.len() == w {
            break;
        }
        if !chosen.iter().all(|&u| g.adjacent(u, c)) {
            continue;
        }
        let need = w - chosen.len() - 1;
        let cands: Vec<usize> =
            (c + 1..g.len()).filter(|&j| g.adjacent(c, j) && chosen.iter().all(|&u| g.adjacent(u, j))).collect();
        if cands.len() < need {
            continue;
        }
        let (hit, out) = g.clique_of_size(&cands, need, budget.map(|b| b.saturating_sub(nodes)));
        nodes += out.nodes;
        if !out.exact {
            return (None, nodes);
        }
        if hit.is_some() {
            chosen.push(c);
        }
    }
    ((chosen.len() == w).then_some(chosen), nodes)
}
