//! Communication neighborhoods and distance-based target assignment.
//!
//! Assignment is a pure distance comparison against communicating neighbors;
//! no explicit Voronoi cell geometry is ever built.

use crate::geom::{distance, Vec2};
use crate::model::TargetSet;

/// Agents within communication range of the owner, owner included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSet {
    pub owner: usize,
    /// Sorted ascending, always contains `owner`.
    pub members: Vec<usize>,
}

impl NeighborSet {
    pub fn contains(&self, id: usize) -> bool {
        self.members.binary_search(&id).is_ok()
    }
}

/// Targets at least as close to the owner as to any of its neighbors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignedTargets {
    pub owner: usize,
    /// Sorted ascending.
    pub targets: Vec<usize>,
}

/// All agents within `d_c` of agent `i`, including `i` itself (its own
/// distance is zero).
pub fn neighbor_set(i: usize, positions: &[Vec2], d_c: f64) -> NeighborSet {
    let members = (0..positions.len())
        .filter(|&j| distance(positions[j], positions[i]) <= d_c)
        .collect();
    NeighborSet { owner: i, members }
}

/// Targets for which agent `i` is no farther than every communicating
/// neighbor. The comparison is non-strict, so an exactly equidistant target
/// appears in both agents' sets.
pub fn assign_targets(
    i: usize,
    positions: &[Vec2],
    targets: &TargetSet,
    neighbors: &NeighborSet,
) -> AssignedTargets {
    let claimed = (0..targets.len())
        .filter(|&l| {
            let mu = targets.positions[l];
            let d_own = distance(mu, positions[i]);
            neighbors.members.iter().all(|&j| d_own <= distance(mu, positions[j]))
        })
        .collect();
    AssignedTargets {
        owner: i,
        targets: claimed,
    }
}

/// Assignment for every agent at once over a shared distance table.
/// Produces exactly the same sets as [`assign_targets`] per agent.
pub fn assign_all(
    positions: &[Vec2],
    targets: &TargetSet,
    neighbor_sets: &[NeighborSet],
) -> Vec<AssignedTargets> {
    let n = positions.len();
    let nt = targets.len();
    let mut dist = vec![0.0f64; nt * n];
    for l in 0..nt {
        let mu = targets.positions[l];
        for (j, &p) in positions.iter().enumerate() {
            dist[l * n + j] = distance(mu, p);
        }
    }
    (0..n)
        .map(|i| {
            let mut claimed = Vec::new();
            'next_target: for l in 0..nt {
                let d_own = dist[l * n + i];
                for &j in &neighbor_sets[i].members {
                    if dist[l * n + j] < d_own {
                        continue 'next_target;
                    }
                }
                claimed.push(l);
            }
            AssignedTargets {
                owner: i,
                targets: claimed,
            }
        })
        .collect()
}

/// The candidate nearest to `x`. Exact distance ties break to the lowest
/// target id. Returns `None` for an empty candidate set; callers branch to
/// their fallback tier first.
pub fn nearest_target(candidates: &[usize], targets: &TargetSet, x: Vec2) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &l in candidates {
        let d = distance(targets.positions[l], x);
        match best {
            Some((bd, _)) if d >= bd => {}
            _ => best = Some((d, l)),
        }
    }
    best.map(|(_, l)| l)
}
