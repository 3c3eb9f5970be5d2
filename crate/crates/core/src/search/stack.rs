//! Best-first (stack) decoders.

use super::node::{clamp_bounds, level_bounds, Bounds, NodeStack, SearchNode, SearchProblem};
use super::{
    grow_radius, initial_radius, Decoded, RadiusPolicy, SearchLimits, SearchStats, BOUND_MULTS,
};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::lattice::{babai_point, TriangularSystem};

/// Per-component half-widths `t` of the box `{u_i - t_i, …, u_i + t_i}`
/// around the Babai point `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchRegion {
    pub t: Vec<u32>,
}

impl SearchRegion {
    pub fn new(t: Vec<u32>) -> Self {
        Self { t }
    }

    pub fn uniform(n: usize, t: u32) -> Self {
        Self { t: vec![t; n] }
    }

    /// Number of branches at component `i`, `2 t_i + 1`.
    pub fn width(&self, i: usize) -> u64 {
        2 * self.t[i] as u64 + 1
    }
}

/// Which children a node has.
pub(crate) enum Branching<'a> {
    /// Integers inside the sphere of squared radius `c2`.
    Sphere { c2: f64 },
    /// Every level of the alphabet.
    Full,
    /// A box around `centre` (search coordinates, component-indexed).
    Region { centre: &'a [i64], half_widths: &'a [u32] },
}

pub(crate) enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Finish {
    /// The leaf callback asked to stop.
    Stopped,
    /// The stack ran empty.
    Exhausted,
    /// The top node exceeded the cost ceiling.
    AboveCeiling,
}

/// Generic stack search: pop the cheapest node, hand leaves to a callback,
/// expand everything else.
pub(crate) struct BestFirst<'a> {
    pub problem: &'a SearchProblem,
    pub branching: Branching<'a>,
    pub bias: f64,
    /// Keep only the `K` best nodes after every expansion.
    pub cap: Option<usize>,
    /// Stop once the top node costs more than this.
    pub ceiling: Option<f64>,
    pub limits: SearchLimits,
}

impl BestFirst<'_> {
    pub fn run(
        &self,
        stats: &mut SearchStats,
        mut on_leaf: impl FnMut(SearchNode) -> Flow,
    ) -> Result<Finish> {
        let n = self.problem.dimension();
        let mut stack = NodeStack::new();
        self.expand(&self.problem.root(), &mut stack, stats);
        self.trim(&mut stack)?;
        while let Some(top) = stack.pop() {
            if self.ceiling.is_some_and(|c| top.cost > c) {
                return Ok(Finish::AboveCeiling);
            }
            stats.nodes_visited += 1;
            if stats.nodes_visited > self.limits.max_visits {
                return Err(Error::VisitBudget(self.limits.max_visits));
            }
            if top.is_leaf(n) {
                match on_leaf(top) {
                    Flow::Stop => return Ok(Finish::Stopped),
                    Flow::Continue => continue,
                }
            }
            // A node without children simply leaves the stack.
            self.expand(&top, &mut stack, stats);
            self.trim(&mut stack)?;
        }
        Ok(Finish::Exhausted)
    }

    fn children(&self, node: &SearchNode, stats: &mut SearchStats) -> Bounds {
        let mut bounds = match &self.branching {
            Branching::Sphere { c2 } => {
                stats.real_mults += BOUND_MULTS;
                level_bounds(node, self.problem, *c2)
            }
            Branching::Full => Bounds::new(
                0,
                self.problem
                    .max_level()
                    .expect("full branching needs a finite alphabet"),
            ),
            Branching::Region {
                centre,
                half_widths,
            } => {
                let row = node.row(self.problem.dimension());
                let t = half_widths[row] as i64;
                Bounds::new(centre[row] - t, centre[row] + t)
            }
        };
        if let Some(c) = self.problem.alphabet() {
            bounds = clamp_bounds(bounds, c);
        }
        bounds
    }

    fn expand(&self, node: &SearchNode, stack: &mut NodeStack, stats: &mut SearchStats) {
        let bounds = self.children(node, stats);
        if bounds.is_empty() {
            return;
        }
        let mults = self.problem.child_mults(node);
        for v in bounds.lo..=bounds.hi {
            stats.nodes_generated += 1;
            stats.real_mults += mults;
            stack.push(self.problem.child(node, v, self.bias));
        }
    }

    fn trim(&self, stack: &mut NodeStack) -> Result<()> {
        match self.cap {
            Some(k) => stack.retain_best(k),
            None if stack.len() > self.limits.max_stack => {
                return Err(Error::StackCapacity(self.limits.max_stack))
            }
            None => {}
        }
        Ok(())
    }
}

pub(crate) fn validate_bias(bias: f64) -> Result<()> {
    if !(bias >= 0.0) || !bias.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bias must be finite and nonnegative, got {bias}"
        )));
    }
    Ok(())
}

/// Spherical-bound stack decoder.
///
/// Best-first search whose children are the integers inside the sphere of
/// fixed squared radius `C²` (clamped to the alphabet when one is given).
/// The first leaf reaching the top of the stack is returned. With
/// `bias = 0` it is the ML point; a positive bias rewards depth and trades
/// accuracy for fewer visited nodes. An empty stack means an empty sphere:
/// `C²` is enlarged and the search restarted.
pub fn sb_stack_decode(
    system: &TriangularSystem,
    policy: &RadiusPolicy,
    bias: f64,
    alphabet: Option<&Constellation>,
    limits: SearchLimits,
) -> Result<Decoded> {
    policy.validate()?;
    validate_bias(bias)?;
    let problem = SearchProblem::new(system, alphabet);
    let searched = alphabet.map_or_else(|| system.clone(), |c| system.shifted(c));
    let mut c2 = initial_radius(policy, &searched)?;
    let mut stats = SearchStats::default();
    loop {
        let engine = BestFirst {
            problem: &problem,
            branching: Branching::Sphere { c2 },
            bias,
            cap: None,
            ceiling: None,
            limits,
        };
        let mut found = None;
        engine.run(&mut stats, |leaf| {
            found = Some(leaf);
            Flow::Stop
        })?;
        if let Some(leaf) = found {
            return Ok(Decoded {
                point: problem.point(&leaf.path),
                cost: leaf.raw_cost,
                stats,
            });
        }
        c2 = grow_radius(c2, policy)?;
        stats.restarts += 1;
    }
}

/// Classical stack decoder over the full `√q`-ary tree, optionally keeping
/// only the `cap` best nodes after every expansion (K-best).
pub fn stack_decode(
    system: &TriangularSystem,
    alphabet: &Constellation,
    bias: f64,
    cap: Option<usize>,
    limits: SearchLimits,
) -> Result<Decoded> {
    validate_bias(bias)?;
    if cap == Some(0) {
        return Err(Error::InvalidParameter("K-best cap must be at least 1".into()));
    }
    let problem = SearchProblem::new(system, Some(alphabet));
    best_leaf(&problem, Branching::Full, bias, cap, limits)
}

/// Stack decoder restricted to a box around the Babai point of the
/// unbounded lattice. Sub-optimal whenever the ML point lies outside.
pub fn neighbor_stack_decode(
    system: &TriangularSystem,
    region: &SearchRegion,
    bias: f64,
    limits: SearchLimits,
) -> Result<Decoded> {
    validate_bias(bias)?;
    if region.t.len() != system.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "region has {} radii for dimension {}",
            region.t.len(),
            system.dimension()
        )));
    }
    let problem = SearchProblem::new(system, None);
    let centre = babai_point(system, None);
    let branching = Branching::Region {
        centre: &centre,
        half_widths: &region.t,
    };
    best_leaf(&problem, branching, bias, None, limits)
}

fn best_leaf(
    problem: &SearchProblem,
    branching: Branching<'_>,
    bias: f64,
    cap: Option<usize>,
    limits: SearchLimits,
) -> Result<Decoded> {
    let engine = BestFirst {
        problem,
        branching,
        bias,
        cap,
        ceiling: None,
        limits,
    };
    let mut stats = SearchStats::default();
    let mut found = None;
    engine.run(&mut stats, |leaf| {
        found = Some(leaf);
        Flow::Stop
    })?;
    let leaf = found.expect("a tree with nonempty branch sets always yields a leaf");
    Ok(Decoded {
        point: problem.point(&leaf.path),
        cost: leaf.raw_cost,
        stats,
    })
}
