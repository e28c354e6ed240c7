use crate::error::{Error, Result};
use crate::network::{ConflictGraph, IndependentSetFamily};

/// Index of the set maximizing the sum of clamped link weights
/// `sum max(w, 0)`; ties go to the lowest index.
pub fn schedule_max_weight(weights: &[f64], family: &IndependentSetFamily) -> Result<usize> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (k, s) in family.sets().iter().enumerate() {
        let v: f64 = s.iter().map(|&l| weights[l].max(0.0)).sum();
        if v > best_val {
            best = k;
            best_val = v;
        }
    }
    Ok(best)
}

/// Exact maximum-weight independent set by branch and bound over the
/// positive-weight links; for networks with at most 128 links.
#[derive(Debug, Clone)]
pub struct MaxWeightSolver {
    conflict_masks: Vec<u128>,
}

/// Chosen links and their total weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub active: u128,
    pub value: f64,
}

impl Schedule {
    #[inline]
    pub fn is_active(&self, link: usize) -> bool {
        self.active >> link & 1 == 1
    }
}

impl MaxWeightSolver {
    pub const MAX_LINKS: usize = 128;

    pub fn new(conflicts: &ConflictGraph) -> Result<Self> {
        if conflicts.len() > Self::MAX_LINKS {
            return Err(Error::InvalidProblem(format!(
                "branch-and-bound scheduler supports at most {} links",
                Self::MAX_LINKS
            )));
        }
        let conflict_masks = (0..conflicts.len())
            .map(|a| conflicts.row(a).ones().fold(0u128, |m, b| m | 1 << b))
            .collect();
        Ok(Self { conflict_masks })
    }

    /// `scratch` is reused across calls to avoid allocation.
    pub fn solve(&self, weights: &[f64], scratch: &mut Vec<(usize, f64)>) -> Schedule {
        scratch.clear();
        scratch.extend(weights.iter().copied().enumerate().filter(|&(_, w)| w > 0.0));
        scratch.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut best = Schedule { active: 0, value: 0.0 };
        let remaining: f64 = scratch.iter().map(|x| x.1).sum();
        self.branch(scratch, 0, 0, 0.0, remaining, &mut best);
        best
    }

    fn branch(&self, order: &[(usize, f64)], k: usize, chosen: u128, value: f64, remaining: f64, best: &mut Schedule) {
        if value + remaining <= best.value {
            return;
        }
        let Some(&(link, w)) = order.get(k) else {
            if value > best.value {
                *best = Schedule { active: chosen, value };
            }
            return;
        };
        if chosen & self.conflict_masks[link] == 0 {
            self.branch(order, k + 1, chosen | 1 << link, value + w, remaining - w, best);
        }
        // remaining upper bound only counts links still compatible
        let rest: f64 = order[k + 1..]
            .iter()
            .filter(|(l, _)| chosen & self.conflict_masks[*l] == 0)
            .map(|x| x.1)
            .sum();
        self.branch(order, k + 1, chosen, value, rest, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::enumerate_maximal_independent_sets;

    fn path3() -> (ConflictGraph, IndependentSetFamily) {
        let c = ConflictGraph::from_pairs(3, &[(0, 1), (1, 2)]);
        let f = enumerate_maximal_independent_sets(&c, 10).unwrap();
        (c, f)
    }

    #[test]
    fn hand_cases() {
        let (_, f) = path3();
        // sets are [{0,2}, {1}]
        assert_eq!(f.set(schedule_max_weight(&[2.0, 5.0, 2.0], &f).unwrap()), &[1]);
        assert_eq!(f.set(schedule_max_weight(&[1.0, 1.0, 1.0], &f).unwrap()), &[0, 2]);
        assert_eq!(f.set(schedule_max_weight(&[-1.0, 3.0, -1.0], &f).unwrap()), &[1]);
        // tie: both sets score 4, lowest index wins
        assert_eq!(schedule_max_weight(&[2.0, 4.0, 2.0], &f).unwrap(), 0);
    }

    #[test]
    fn empty_family_is_an_error() {
        assert!(IndependentSetFamily::new(3, vec![]).is_err());
    }

    #[test]
    fn branch_and_bound_hand_cases() {
        let (c, _) = path3();
        let s = MaxWeightSolver::new(&c).unwrap();
        let mut scratch = Vec::new();
        let r = s.solve(&[2.0, 5.0, 2.0], &mut scratch);
        assert_eq!((r.active, r.value), (0b010, 5.0));
        let r = s.solve(&[-1.0, -3.0, -1.0], &mut scratch);
        assert_eq!((r.active, r.value), (0, 0.0));
    }
}
