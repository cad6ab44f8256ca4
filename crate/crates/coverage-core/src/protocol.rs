//! The coverage-sharing protocol: local coverage reports, per-agent memory,
//! uncovered/unknown sets, and reference selection for both the baseline
//! nearest-target rule and the cut-in rule that pursues remembered or
//! unknown targets when the agent owns none.

use crate::assignment::{nearest_target, AssignedTargets, NeighborSet};
use crate::geom::{covers, SensorFootprint, Vec2};
use crate::model::{AgentState, CoverageMark, TargetSet};
use serde::{Deserialize, Serialize};

/// Coverage bits one agent broadcasts for the targets it currently owns.
/// Targets absent from `entries` carry no information for the receiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub sender: usize,
    /// (target id, covered) for targets in the sender's assigned set only.
    pub entries: Vec<(usize, bool)>,
}

/// Which rule produced the reference target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Nearest target in the agent's own assigned set.
    Assigned,
    /// Nearest target remembered as uncovered.
    UncoveredMemory,
    /// Nearest target with no coverage information yet.
    Unknown,
    /// Nothing to pursue; the agent holds position.
    Hold,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Assigned => "assigned",
            Tier::UncoveredMemory => "uncovered",
            Tier::Unknown => "unknown",
            Tier::Hold => "hold",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceChoice {
    pub tier: Tier,
    pub target: Option<usize>,
}

impl ReferenceChoice {
    fn at(tier: Tier, target: usize) -> Self {
        ReferenceChoice {
            tier,
            target: Some(target),
        }
    }

    pub const HOLD: ReferenceChoice = ReferenceChoice {
        tier: Tier::Hold,
        target: None,
    };
}

/// Coverage bits for the sender's assigned targets, evaluated against every
/// footprint the sender can see: itself plus its communication neighbors.
pub fn evaluate_coverage(
    sender: usize,
    assigned: &AssignedTargets,
    positions: &[Vec2],
    neighbors: &NeighborSet,
    targets: &TargetSet,
    footprint: &SensorFootprint,
) -> CoverageReport {
    debug_assert!(neighbors.contains(sender));
    let entries = assigned
        .targets
        .iter()
        .map(|&l| {
            let mu = targets.positions[l];
            let hit = neighbors.members.iter().any(|&j| covers(positions[j], mu, footprint));
            (l, hit)
        })
        .collect();
    CoverageReport { sender, entries }
}

/// Fold one round of neighbor reports into the agent's memory. A target with
/// no report this round keeps its previous mark. When several reports carry
/// the same target, a covered bit wins over an uncovered one regardless of
/// report order.
pub fn update_memory(memory: &mut [CoverageMark], reports: &[&CoverageReport]) {
    // 0 = no report, 1 = uncovered, 2 = covered
    let mut verdict = vec![0u8; memory.len()];
    for report in reports {
        for &(l, hit) in &report.entries {
            if hit {
                verdict[l] = 2;
            } else if verdict[l] == 0 {
                verdict[l] = 1;
            }
        }
    }
    for (l, &v) in verdict.iter().enumerate() {
        match v {
            1 => memory[l] = CoverageMark::Uncovered,
            2 => memory[l] = CoverageMark::Covered,
            _ => {}
        }
    }
}

/// (targets remembered uncovered, targets with no information).
pub fn uncovered_sets(memory: &[CoverageMark]) -> (Vec<usize>, Vec<usize>) {
    let mut v = Vec::new();
    let mut w = Vec::new();
    for (l, &mark) in memory.iter().enumerate() {
        match mark {
            CoverageMark::Uncovered => v.push(l),
            CoverageMark::Null => w.push(l),
            CoverageMark::Covered => {}
        }
    }
    (v, w)
}

/// Cut-in reference selection: own assigned targets first, then remembered
/// uncovered targets, then unknown targets, otherwise hold.
pub fn select_reference_proposed(
    assigned: &AssignedTargets,
    v: &[usize],
    w: &[usize],
    targets: &TargetSet,
    x: Vec2,
) -> ReferenceChoice {
    if let Some(l) = nearest_target(&assigned.targets, targets, x) {
        return ReferenceChoice::at(Tier::Assigned, l);
    }
    if let Some(l) = nearest_target(v, targets, x) {
        return ReferenceChoice::at(Tier::UncoveredMemory, l);
    }
    if let Some(l) = nearest_target(w, targets, x) {
        return ReferenceChoice::at(Tier::Unknown, l);
    }
    ReferenceChoice::HOLD
}

/// Baseline selection: nearest target in the agent's own assigned set, or
/// hold when it owns none. Holding with an empty set is the local-optimum
/// trap the cut-in rule exists to escape.
pub fn select_reference_lloyd(
    assigned: &AssignedTargets,
    targets: &TargetSet,
    x: Vec2,
) -> ReferenceChoice {
    match nearest_target(&assigned.targets, targets, x) {
        Some(l) => ReferenceChoice::at(Tier::Assigned, l),
        None => ReferenceChoice::HOLD,
    }
}

/// Centralized coverage metric over every agent's footprint, plus the lower
/// bound that only counts targets currently in someone's assigned set.
/// Measurement only; never fed back to agents.
pub fn global_coverage(
    positions: &[Vec2],
    targets: &TargetSet,
    footprint: &SensorFootprint,
    assignments: &[AssignedTargets],
) -> (f64, f64) {
    let nt = targets.len();
    if nt == 0 {
        return (0.0, 0.0);
    }
    let mut assigned_any = vec![false; nt];
    for asg in assignments {
        for &l in &asg.targets {
            assigned_any[l] = true;
        }
    }
    let mut covered = 0usize;
    let mut covered_assigned = 0usize;
    for l in 0..nt {
        let mu = targets.positions[l];
        if positions.iter().any(|&p| covers(p, mu, footprint)) {
            covered += 1;
            if assigned_any[l] {
                covered_assigned += 1;
            }
        }
    }
    (covered as f64 / nt as f64, covered_assigned as f64 / nt as f64)
}

/// Convenience wrapper over agent states.
pub fn global_coverage_of_agents(
    agents: &[AgentState],
    targets: &TargetSet,
    footprint: &SensorFootprint,
    assignments: &[AssignedTargets],
) -> (f64, f64) {
    let positions: Vec<Vec2> = agents.iter().map(|a| a.pos).collect();
    global_coverage(&positions, targets, footprint, assignments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{assign_targets, neighbor_set};
    use proptest::prelude::*;

    fn ts(points: &[(f64, f64)]) -> TargetSet {
        TargetSet::new(points.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
    }

    fn pts(points: &[(f64, f64)]) -> Vec<Vec2> {
        points.iter().map(|&(x, y)| Vec2::new(x, y)).collect()
    }

    fn fp() -> SensorFootprint {
        SensorFootprint::new(1.0, 1.0)
    }

    #[test]
    fn own_covered_target_reports_one() {
        let positions = pts(&[(0.0, 0.0)]);
        let targets = ts(&[(0.2, 0.1)]);
        let ns = neighbor_set(0, &positions, 10.0);
        let assigned = assign_targets(0, &positions, &targets, &ns);
        let report = evaluate_coverage(0, &assigned, &positions, &ns, &targets, &fp());
        assert_eq!(report.entries, vec![(0, true)]);
    }

    #[test]
    fn empty_assignment_gives_empty_report() {
        let positions = pts(&[(0.0, 0.0), (4.0, 0.0)]);
        let targets = ts(&[(3.9, 0.0)]);
        let ns = neighbor_set(0, &positions, 10.0);
        let assigned = assign_targets(0, &positions, &targets, &ns);
        assert!(assigned.targets.is_empty());
        let report = evaluate_coverage(0, &assigned, &positions, &ns, &targets, &fp());
        assert!(report.entries.is_empty());
    }

    /// Four agents, four targets: the observing agent owns nothing, hears
    /// "uncovered" for the two targets owned by in-range neighbors, and never
    /// hears about the two targets owned by an out-of-range agent.
    #[test]
    fn two_hop_information_boundary() {
        let positions = pts(&[(0.0, 0.0), (3.0, 0.0), (0.0, 3.0), (6.0, 0.0)]);
        let targets = ts(&[(4.0, 1.0), (1.0, 2.5), (6.5, 1.0), (7.0, -1.0)]);
        let d_c = 4.0;
        let sets: Vec<_> = (0..4).map(|i| neighbor_set(i, &positions, d_c)).collect();
        assert_eq!(sets[0].members, vec![0, 1, 2]);
        assert_eq!(sets[1].members, vec![0, 1, 3]);
        let assignments: Vec<_> = (0..4)
            .map(|i| assign_targets(i, &positions, &targets, &sets[i]))
            .collect();
        assert!(assignments[0].targets.is_empty());
        assert_eq!(assignments[1].targets, vec![0]);
        assert_eq!(assignments[2].targets, vec![1]);
        assert_eq!(assignments[3].targets, vec![2, 3]);

        let reports: Vec<_> = (0..4)
            .map(|j| evaluate_coverage(j, &assignments[j], &positions, &sets[j], &targets, &fp()))
            .collect();
        // Both owned nearby targets are uncovered.
        assert_eq!(reports[1].entries, vec![(0, false)]);
        assert_eq!(reports[2].entries, vec![(1, false)]);

        let mut memory = vec![CoverageMark::Null; 4];
        let inbox: Vec<&CoverageReport> =
            sets[0].members.iter().map(|&j| &reports[j]).collect();
        update_memory(&mut memory, &inbox);
        let (v, w) = uncovered_sets(&memory);
        assert_eq!(v, vec![0, 1]);
        assert_eq!(w, vec![2, 3]);

        // Cut-in selection pursues the nearer remembered-uncovered target.
        let choice = select_reference_proposed(
            &assignments[0],
            &v,
            &w,
            &targets,
            positions[0],
        );
        assert_eq!(choice.tier, Tier::UncoveredMemory);
        assert_eq!(choice.target, Some(1));

        // The baseline holds instead.
        let lloyd = select_reference_lloyd(&assignments[0], &targets, positions[0]);
        assert_eq!(lloyd, ReferenceChoice::HOLD);
    }

    #[test]
    fn memory_takes_fresh_report() {
        let mut memory = vec![CoverageMark::Null; 4];
        let r = CoverageReport {
            sender: 1,
            entries: vec![(3, false)],
        };
        update_memory(&mut memory, &[&r]);
        assert_eq!(memory[3], CoverageMark::Uncovered);
    }

    #[test]
    fn memory_unchanged_without_report() {
        let mut memory = vec![CoverageMark::Covered; 4];
        update_memory(&mut memory, &[]);
        assert_eq!(memory[3], CoverageMark::Covered);
    }

    #[test]
    fn conflicting_reports_covered_wins_in_any_order() {
        let zero = CoverageReport {
            sender: 1,
            entries: vec![(3, false)],
        };
        let one = CoverageReport {
            sender: 2,
            entries: vec![(3, true)],
        };
        for inbox in [[&zero, &one], [&one, &zero]] {
            let mut memory = vec![CoverageMark::Uncovered; 4];
            update_memory(&mut memory, &inbox);
            assert_eq!(memory[3], CoverageMark::Covered);
        }
    }

    #[test]
    fn uncovered_sets_all_covered() {
        let memory = vec![CoverageMark::Covered; 3];
        let (v, w) = uncovered_sets(&memory);
        assert!(v.is_empty());
        assert!(w.is_empty());
    }

    #[test]
    fn uncovered_sets_initial_state() {
        let memory = vec![CoverageMark::Null; 3];
        let (v, w) = uncovered_sets(&memory);
        assert!(v.is_empty());
        assert_eq!(w, vec![0, 1, 2]);
    }

    #[test]
    fn assigned_tier_takes_priority() {
        let targets = ts(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        let assigned = AssignedTargets {
            owner: 0,
            targets: vec![2],
        };
        let choice =
            select_reference_proposed(&assigned, &[0], &[1], &targets, Vec2::ZERO);
        assert_eq!(choice.tier, Tier::Assigned);
        assert_eq!(choice.target, Some(2));
    }

    #[test]
    fn all_sets_empty_holds() {
        let targets = ts(&[(1.0, 0.0)]);
        let assigned = AssignedTargets {
            owner: 0,
            targets: vec![],
        };
        let choice = select_reference_proposed(&assigned, &[], &[], &targets, Vec2::ZERO);
        assert_eq!(choice, ReferenceChoice::HOLD);
    }

    #[test]
    fn lloyd_fixed_point_keeps_target() {
        let targets = ts(&[(0.0, 0.0), (2.0, 0.0), (5.0, 0.0)]);
        let assigned = AssignedTargets {
            owner: 0,
            targets: vec![1],
        };
        let choice = select_reference_lloyd(&assigned, &targets, Vec2::new(2.0, 0.0));
        assert_eq!(choice.target, Some(1));
    }

    #[test]
    fn global_coverage_fraction() {
        // 5 targets, 2 covered, 1 of the covered ones assigned.
        let positions = pts(&[(0.0, 0.0), (2.0, 0.0)]);
        let targets = ts(&[(0.1, 0.0), (2.1, 0.0), (5.0, 5.0), (6.0, 6.0), (7.0, 7.0)]);
        let assignments = vec![AssignedTargets {
            owner: 0,
            targets: vec![0],
        }];
        let (p, pl) = global_coverage(&positions, &targets, &fp(), &assignments);
        assert_eq!(p, 0.4);
        assert_eq!(pl, 0.2);
    }

    #[test]
    fn global_coverage_nothing_covered() {
        let positions = pts(&[(0.0, 0.0)]);
        let targets = ts(&[(5.0, 5.0), (6.0, 6.0)]);
        let (p, pl) = global_coverage(&positions, &targets, &fp(), &[]);
        assert_eq!((p, pl), (0.0, 0.0));
    }

    #[test]
    fn full_assigned_coverage_meets_lower_bound() {
        let positions = pts(&[(0.0, 0.0), (3.0, 0.0)]);
        let targets = ts(&[(0.1, 0.0), (3.1, 0.0)]);
        let assignments = vec![
            AssignedTargets {
                owner: 0,
                targets: vec![0],
            },
            AssignedTargets {
                owner: 1,
                targets: vec![1],
            },
        ];
        let (p, pl) = global_coverage(&positions, &targets, &fp(), &assignments);
        assert_eq!(p, 1.0);
        assert_eq!(pl, 1.0);
    }

    fn mark() -> impl Strategy<Value = CoverageMark> {
        prop_oneof![
            Just(CoverageMark::Null),
            Just(CoverageMark::Uncovered),
            Just(CoverageMark::Covered),
        ]
    }

    proptest! {
        // A mark never transitions back to Null, and order of reports within
        // a round does not matter.
        #[test]
        fn memory_refinement_is_monotonic_and_order_free(
            initial in proptest::collection::vec(mark(), 6),
            entries in proptest::collection::vec((0usize..6, any::<bool>()), 0..12),
        ) {
            let reports: Vec<CoverageReport> = entries
                .chunks(3)
                .enumerate()
                .map(|(s, chunk)| CoverageReport { sender: s, entries: chunk.to_vec() })
                .collect();

            let mut forward = initial.clone();
            let refs: Vec<&CoverageReport> = reports.iter().collect();
            update_memory(&mut forward, &refs);

            let mut reversed = initial.clone();
            let refs_rev: Vec<&CoverageReport> = reports.iter().rev().collect();
            update_memory(&mut reversed, &refs_rev);
            prop_assert_eq!(&forward, &reversed);

            for (before, after) in initial.iter().zip(forward.iter()) {
                if *before != CoverageMark::Null {
                    prop_assert_ne!(*after, CoverageMark::Null);
                }
            }
        }

        // Whenever the agent owns targets, cut-in and baseline selections agree.
        #[test]
        fn tier_priority_matches_baseline(
            owned in proptest::collection::vec(0usize..6, 1..4),
            v in proptest::collection::vec(0usize..6, 0..4),
            w in proptest::collection::vec(0usize..6, 0..4),
            x in (-5.0..5.0f64, -5.0..5.0f64),
        ) {
            let targets = TargetSet::new(
                (0..6).map(|k| Vec2::new(k as f64, (k * k) as f64 * 0.1)).collect(),
            );
            let mut owned = owned;
            owned.sort_unstable();
            owned.dedup();
            let assigned = AssignedTargets { owner: 0, targets: owned };
            let x = Vec2::new(x.0, x.1);
            let a = select_reference_proposed(&assigned, &v, &w, &targets, x);
            let b = select_reference_lloyd(&assigned, &targets, x);
            prop_assert_eq!(a, b);
        }
    }
}
