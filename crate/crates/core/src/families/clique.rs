//! Branch-and-bound maximum clique over bit-set adjacency rows, with greedy
//! colouring bounds.

type Bits = Vec<u64>;

fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

fn test_bit(b: &[u64], i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(b: &mut [u64], i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn clear_bit(b: &mut [u64], i: usize) {
    b[i / 64] &= !(1 << (i % 64));
}

fn is_empty(b: &[u64]) -> bool {
    b.iter().all(|&w| w == 0)
}

fn first_bit(b: &[u64]) -> Option<usize> {
    b.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn count(b: &[u64]) -> usize {
    b.iter().map(|w| w.count_ones() as usize).sum()
}

/// Undirected graph on `0..n` with one bit-set row per vertex.
#[derive(Debug, Clone)]
pub struct CliqueGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueOutcome {
    /// Vertices of the best clique found, ascending.
    pub clique: Vec<usize>,
    pub nodes: u64,
    /// False when the node budget ran out before the search finished.
    pub exact: bool,
}

impl CliqueGraph {
    pub fn new(n: usize) -> Self {
        let words = words_for(n);
        CliqueGraph { n, words, rows: vec![0; n * words] }
    }

    pub fn from_fn(n: usize, mut adjacent: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = CliqueGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if adjacent(u, v) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        let w = self.words;
        set_bit(&mut self.rows[u * w..(u + 1) * w], v);
        set_bit(&mut self.rows[v * w..(v + 1) * w], u);
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        test_bit(self.row(u), v)
    }

    pub fn degree(&self, u: usize) -> usize {
        count(self.row(u))
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }

    fn all(&self) -> Bits {
        let mut b = vec![0; self.words];
        for i in 0..self.n {
            set_bit(&mut b, i);
        }
        b
    }

    pub fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter().enumerate().all(|(i, &u)| vs[i + 1..].iter().all(|&v| self.adjacent(u, v)))
    }

    /// A maximum clique, or the best one found within `budget` nodes.
    /// `seed` is a known clique used as the starting incumbent.
    pub fn max_clique(&self, seed: &[usize], budget: Option<u64>) -> CliqueOutcome {
        let mut s = Search::new(self, usize::MAX, budget);
        if self.is_clique(seed) {
            s.best = seed.to_vec();
        }
        if self.n > 0 {
            s.expand(self.all());
        }
        s.finish()
    }

    /// A clique of size `target` inside `candidates`, if one exists. The
    /// outcome is exact unless the budget ran out before an answer.
    pub fn clique_of_size(&self, candidates: &[usize], target: usize, budget: Option<u64>) -> (Option<Vec<usize>>, CliqueOutcome) {
        let mut s = Search::new(self, target, budget);
        let mut p = vec![0; self.words];
        for &v in candidates {
            set_bit(&mut p, v);
        }
        if target == 0 {
            return (Some(Vec::new()), s.finish());
        }
        if count(&p) >= target {
            // the incumbent must be beaten, so start it one short of the target
            s.floor = target - 1;
            s.expand(p);
        }
        let out = s.finish();
        let hit = (out.clique.len() >= target).then(|| out.clique.clone());
        (hit, out)
    }
}

struct Search<'g> {
    g: &'g CliqueGraph,
    best: Vec<usize>,
    floor: usize,
    current: Vec<usize>,
    nodes: u64,
    budget: Option<u64>,
    target: usize,
    exhausted: bool,
    done: bool,
}

impl<'g> Search<'g> {
    fn new(g: &'g CliqueGraph, target: usize, budget: Option<u64>) -> Self {
        Search {
            g,
            best: Vec::new(),
            floor: 0,
            current: Vec::new(),
            nodes: 0,
            budget,
            target,
            exhausted: false,
            done: false,
        }
    }

    fn bound(&self) -> usize {
        self.best.len().max(self.floor)
    }

    /// Greedy sequential colouring of `p`. Returns the vertices whose colour
    /// could still beat the incumbent, with their colours, in colour order.
    fn colour(&self, p: &[u64]) -> (Vec<usize>, Vec<usize>) {
        let need = (self.bound() + 1).saturating_sub(self.current.len());
        let mut order = Vec::new();
        let mut colours = Vec::new();
        let mut uncoloured = p.to_vec();
        let mut k = 1;
        while !is_empty(&uncoloured) {
            let mut q = uncoloured.clone();
            while let Some(v) = first_bit(&q) {
                clear_bit(&mut uncoloured, v);
                clear_bit(&mut q, v);
                for (qw, rw) in q.iter_mut().zip(self.g.row(v)) {
                    *qw &= !rw;
                }
                if k >= need {
                    order.push(v);
                    colours.push(k);
                }
            }
            k += 1;
        }
        (order, colours)
    }

    fn expand(&mut self, mut p: Bits) {
        self.nodes += 1;
        if let Some(b) = self.budget {
            if self.nodes > b {
                self.exhausted = true;
                return;
            }
        }
        let (order, colours) = self.colour(&p);
        for i in (0..order.len()).rev() {
            if self.current.len() + colours[i] <= self.bound() {
                return;
            }
            let v = order[i];
            self.current.push(v);
            let next: Bits = p.iter().zip(self.g.row(v)).map(|(a, b)| a & b).collect();
            if is_empty(&next) {
                if self.current.len() > self.bound() {
                    self.best = self.current.clone();
                    if self.best.len() >= self.target {
                        self.done = true;
                    }
                }
            } else {
                self.expand(next);
            }
            self.current.pop();
            if self.done || self.exhausted {
                return;
            }
            clear_bit(&mut p, v);
        }
    }

    fn finish(mut self) -> CliqueOutcome {
        self.best.sort_unstable();
        CliqueOutcome { clique: self.best, nodes: self.nodes, exact: !self.exhausted }
    }
}
