//! Depth-first sphere decoding.

use super::node::{clamp_bounds, level_bounds, node_cost, SearchNode, SearchProblem};
use super::{
    grow_radius, initial_radius, Decoded, RadiusPolicy, SearchLimits, SearchStats, BOUND_MULTS,
};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::lattice::TriangularSystem;

/// Order in which a depth-first search visits the values of one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Enumeration {
    /// Ascending from the lower sphere bound.
    #[default]
    Pohst,
    /// Zig-zag outwards from the interval centre.
    SchnorrEuchner,
}

/// Depth-first enumerator of the points inside a sphere. The leaf callback
/// returns the squared radius to continue with, which lets the sphere
/// decoder shrink it and the list sphere decoder keep it.
pub(crate) struct Dfs<'a> {
    pub problem: &'a SearchProblem,
    pub order: Enumeration,
    pub c2: f64,
    pub limits: SearchLimits,
    pub stats: SearchStats,
}

impl<'a> Dfs<'a> {
    pub fn new(problem: &'a SearchProblem, order: Enumeration, c2: f64, limits: SearchLimits) -> Self {
        Self {
            problem,
            order,
            c2,
            limits,
            stats: SearchStats::default(),
        }
    }

    pub fn run(&mut self, on_leaf: &mut dyn FnMut(&SearchNode) -> f64) -> Result<()> {
        let root = self.problem.root();
        self.expand(&root, on_leaf)
    }

    fn expand(&mut self, node: &SearchNode, on_leaf: &mut dyn FnMut(&SearchNode) -> f64) -> Result<()> {
        let mut bounds = level_bounds(node, self.problem, self.c2);
        self.stats.real_mults += BOUND_MULTS;
        if let Some(c) = self.problem.alphabet() {
            bounds = clamp_bounds(bounds, c);
        }
        if bounds.is_empty() {
            return Ok(());
        }
        let centre = node.centre(self.problem);
        match self.order {
            Enumeration::Pohst => {
                for v in bounds.lo..=bounds.hi {
                    let inside = self.visit(node, v, on_leaf)?;
                    // Past the centre the branch cost only grows.
                    if !inside && v as f64 > centre {
                        break;
                    }
                }
            }
            Enumeration::SchnorrEuchner => {
                let start = (centre.round() as i64).clamp(bounds.lo, bounds.hi);
                let (mut left, mut right) = (start - 1, start + 1);
                if !self.visit(node, start, on_leaf)? {
                    return Ok(());
                }
                loop {
                    let next = match (left >= bounds.lo, right <= bounds.hi) {
                        (false, false) => break,
                        (true, false) => left,
                        (false, true) => right,
                        (true, true) => {
                            if centre - left as f64 <= right as f64 - centre {
                                left
                            } else {
                                right
                            }
                        }
                    };
                    if next == left {
                        left -= 1;
                    } else {
                        right += 1;
                    }
                    if !self.visit(node, next, on_leaf)? {
                        // The closest remaining value failed; so do the rest.
                        break;
                    }
                }
            }
        }
        Ok(())
    }

    /// Evaluates one child; returns whether it lies inside the sphere.
    fn visit(
        &mut self,
        node: &SearchNode,
        value: i64,
        on_leaf: &mut dyn FnMut(&SearchNode) -> f64,
    ) -> Result<bool> {
        self.stats.nodes_generated += 1;
        self.stats.real_mults += self.problem.child_mults(node);
        let (_, raw) = node_cost(node, value, self.problem, 0.0);
        if raw > self.c2 {
            return Ok(false);
        }
        self.stats.nodes_visited += 1;
        if self.stats.nodes_visited > self.limits.max_visits {
            return Err(Error::VisitBudget(self.limits.max_visits));
        }
        let child = self.problem.child(node, value, 0.0);
        if child.is_leaf(self.problem.dimension()) {
            self.c2 = on_leaf(&child);
        } else {
            self.expand(&child, on_leaf)?;
        }
        Ok(true)
    }
}

/// Sphere decoder with Pohst enumeration. See [`sphere_decode_with`].
pub fn sphere_decode(
    system: &TriangularSystem,
    policy: &RadiusPolicy,
    alphabet: Option<&Constellation>,
    limits: SearchLimits,
) -> Result<Decoded> {
    sphere_decode_with(system, policy, alphabet, Enumeration::Pohst, limits)
}

/// Depth-first ML search; every leaf found shrinks the radius to its cost.
/// An empty initial sphere is enlarged by the policy's growth factor and the
/// search restarted.
pub fn sphere_decode_with(
    system: &TriangularSystem,
    policy: &RadiusPolicy,
    alphabet: Option<&Constellation>,
    order: Enumeration,
    limits: SearchLimits,
) -> Result<Decoded> {
    policy.validate()?;
    let problem = SearchProblem::new(system, alphabet);
    let searched = alphabet.map_or_else(|| system.clone(), |c| system.shifted(c));
    let mut c2 = initial_radius(policy, &searched)?;
    let mut dfs = Dfs::new(&problem, order, c2, limits);
    loop {
        let mut best: Option<(Vec<i64>, f64)> = None;
        dfs.c2 = c2;
        dfs.run(&mut |leaf| {
            if best.as_ref().map_or(true, |b| leaf.raw_cost < b.1) {
                best = Some((leaf.path.clone(), leaf.raw_cost));
            }
            leaf.raw_cost
        })?;
        if let Some((path, cost)) = best {
            return Ok(Decoded {
                point: problem.point(&path),
                cost,
                stats: dfs.stats,
            });
        }
        c2 = grow_radius(c2, policy)?;
        dfs.stats.restarts += 1;
    }
}
