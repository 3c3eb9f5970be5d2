use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::constellation::Constellation;
use crate::lattice::TriangularSystem;

/// Slack added on both sides of the real sphere interval before integer
/// tightening, so that points lying exactly on the sphere survive rounding.
const BOUND_SLACK: f64 = 1e-9;

/// Integer-coordinate view of a [`TriangularSystem`].
///
/// With an alphabet the search runs over shifted levels `u ∈ {0, …, √q-1}`
/// of the rescaled system `R' = 2R`, `z' = z + (√q-1) R 1`; without one it
/// runs over `Zⁿ` directly. Costs are identical in both coordinate systems.
#[derive(Debug, Clone)]
pub struct SearchProblem {
    n: usize,
    /// Row-major `R`.
    r: Vec<f64>,
    z: Vec<f64>,
    alphabet: Option<Constellation>,
}

impl SearchProblem {
    pub fn new(system: &TriangularSystem, alphabet: Option<&Constellation>) -> Self {
        let searched = match alphabet {
            Some(c) => system.shifted(c),
            None => system.clone(),
        };
        let n = searched.dimension();
        let mut r = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                r[i * n + j] = searched.r()[(i, j)];
            }
        }
        Self {
            n,
            r,
            z: searched.z().iter().copied().collect(),
            alphabet: alphabet.cloned(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> Option<&Constellation> {
        self.alphabet.as_ref()
    }

    /// Largest admissible level when the search is boxed.
    pub fn max_level(&self) -> Option<i64> {
        self.alphabet.as_ref().map(Constellation::max_level)
    }

    #[inline]
    pub(crate) fn r(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.n + j]
    }

    pub fn root(&self) -> SearchNode {
        SearchNode {
            path: Vec::new(),
            cost: 0.0,
            raw_cost: 0.0,
            residual: self.z.clone(),
            seq: 0,
        }
    }

    /// Builds the child of `parent` taking `value` at the next component.
    pub fn child(&self, parent: &SearchNode, value: i64, bias: f64) -> SearchNode {
        let row = parent.row(self.n);
        let (cost, raw_cost) = node_cost(parent, value, self, bias);
        let v = value as f64;
        let residual = (0..row)
            .map(|l| parent.residual[l] - self.r(l, row) * v)
            .collect();
        let mut path = Vec::with_capacity(parent.path.len() + 1);
        path.extend_from_slice(&parent.path);
        path.push(value);
        SearchNode {
            path,
            cost,
            raw_cost,
            residual,
            seq: 0,
        }
    }

    /// Converts a full path back to a point in the caller's coordinates.
    pub fn point(&self, path: &[i64]) -> Vec<i64> {
        debug_assert_eq!(path.len(), self.n);
        path.iter()
            .rev()
            .map(|&v| match &self.alphabet {
                Some(c) => c.unshift(v),
                None => v,
            })
            .collect()
    }

    /// Converts a point (amplitudes or integers) to search coordinates,
    /// component-indexed.
    pub fn coordinates(&self, point: &[i64]) -> Vec<i64> {
        point
            .iter()
            .map(|&x| match &self.alphabet {
                Some(c) => (x + c.max_level()).div_euclid(2),
                None => x,
            })
            .collect()
    }

    /// Tariff of evaluating one child of `node`.
    #[inline]
    pub(crate) fn child_mults(&self, node: &SearchNode) -> u64 {
        (self.n - node.row(self.n)) as u64
    }
}

/// A partial path in the decoding tree.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    /// Decided coordinates, `path[0]` being the last component `x_n`.
    pub path: Vec<i64>,
    /// Ordering cost: raw cost minus `bias · depth`.
    pub cost: f64,
    /// `Σ f_i`, the partial squared distance.
    pub raw_cost: f64,
    /// `z_l - Σ_{decided j} r_lj x_j` for the undecided rows `l`.
    pub(crate) residual: Vec<f64>,
    /// Insertion order, assigned by [`NodeStack::push`].
    pub seq: u64,
}

impl SearchNode {
    /// Number of decided components.
    pub fn depth(&self) -> usize {
        self.path.len()
    }

    /// 1-based tree level `k ∈ [1, n + 1]`; the root sits at `n + 1`.
    pub fn level(&self, n: usize) -> usize {
        n - self.depth() + 1
    }

    pub fn is_leaf(&self, n: usize) -> bool {
        self.depth() == n
    }

    /// 0-based index of the component decided by this node's children.
    #[inline]
    pub(crate) fn row(&self, n: usize) -> usize {
        n - self.path.len() - 1
    }

    /// Centre `S` of the next component's interval.
    pub(crate) fn centre(&self, problem: &SearchProblem) -> f64 {
        let row = self.row(problem.n);
        self.residual[row] / problem.r(row, row)
    }
}

/// Cost of the child of `parent` taking `symbol`: returns `(biased, raw)`
/// where `raw = parent.raw + (z̃_i - r_ii·symbol)²` and
/// `biased = raw - bias · depth(child)`.
pub fn node_cost(parent: &SearchNode, symbol: i64, problem: &SearchProblem, bias: f64) -> (f64, f64) {
    let row = parent.row(problem.n);
    let d = parent.residual[row] - problem.r(row, row) * symbol as f64;
    let raw = parent.raw_cost + d * d;
    (raw - bias * (parent.depth() + 1) as f64, raw)
}

/// Inclusive integer range of admissible values for one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub lo: i64,
    pub hi: i64,
}

impl Bounds {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo) as u64 + 1
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Sphere bounds on the next component of `node`:
/// `⌈S - √(T/r_ii²)⌉ ≤ x ≤ ⌊S + √(T/r_ii²)⌋` with `T = C² - raw(node)` the
/// radius budget left after the decided components.
pub fn level_bounds(node: &SearchNode, problem: &SearchProblem, c2: f64) -> Bounds {
    let row = node.row(problem.n);
    let diag = problem.r(row, row);
    let budget = c2 - node.raw_cost;
    debug_assert!(budget >= -1e-6 * c2.max(1.0), "node lies outside the sphere");
    let half_width = budget.max(0.0).sqrt() / diag;
    let centre = node.residual[row] / diag;
    // `as` saturates, which keeps infinite radii well defined.
    Bounds {
        lo: (centre - half_width - BOUND_SLACK).ceil() as i64,
        hi: (centre + half_width + BOUND_SLACK).floor() as i64,
    }
}

/// Intersects shifted-coordinate bounds with `[0, √q - 1]`.
pub fn clamp_bounds(bounds: Bounds, alphabet: &Constellation) -> Bounds {
    Bounds {
        lo: bounds.lo.max(0),
        hi: bounds.hi.min(alphabet.max_level()),
    }
}

struct Ranked(SearchNode);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    // BinaryHeap is a max-heap: invert so the cheapest, oldest node wins.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .cost
            .total_cmp(&self.0.cost)
            .then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}

/// Cost-ordered node store. The top is the cheapest node, ties going to the
/// earliest insertion.
#[derive(Default)]
pub struct NodeStack {
    heap: BinaryHeap<Ranked>,
    next_seq: u64,
}

impl NodeStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, mut node: SearchNode) {
        node.seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Ranked(node));
    }

    pub fn pop(&mut self) -> Option<SearchNode> {
        self.heap.pop().map(|r| r.0)
    }

    pub fn top(&self) -> Option<&SearchNode> {
        self.heap.peek().map(|r| &r.0)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Keeps only the `k` best nodes.
    pub fn retain_best(&mut self, k: usize) {
        if self.heap.len() <= k {
            return;
        }
        // into_sorted_vec is ascending in `Ranked` order, i.e. worst first.
        let mut sorted = std::mem::take(&mut self.heap).into_sorted_vec();
        let drop = sorted.len() - k;
        sorted.drain(..drop);
        self.heap = BinaryHeap::from(sorted);
    }
}
