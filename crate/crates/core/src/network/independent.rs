use fixedbitset::FixedBitSet;

use super::conflict::ConflictGraph;
use crate::error::{Error, Result};

pub const DEFAULT_FAMILY_CAP: usize = 1_000_000;

/// Independent sets of links in canonical order (lexicographic by sorted
/// member ids), with a per-link membership index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentSetFamily {
    sets: Vec<Vec<usize>>,
    membership: Vec<Vec<usize>>,
}

impl IndependentSetFamily {
    pub fn new(num_links: usize, mut sets: Vec<Vec<usize>>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for s in &mut sets {
            s.sort_unstable();
        }
        sets.sort();
        sets.dedup();
        let mut membership = vec![Vec::new(); num_links];
        for (k, s) in sets.iter().enumerate() {
            for &l in s {
                membership[l].push(k);
            }
        }
        Ok(Self { sets, membership })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn set(&self, k: usize) -> &[usize] {
        &self.sets[k]
    }

    pub fn num_links(&self) -> usize {
        self.membership.len()
    }

    /// Indices of the sets containing `link`.
    pub fn membership(&self, link: usize) -> &[usize] {
        &self.membership[link]
    }

    /// Fixed time share of each link when every set is active for an equal
    /// fraction of time: memberships divided by the family size.
    pub fn time_shares(&self) -> Vec<f64> {
        let total = self.len() as f64;
        self.membership.iter().map(|m| m.len() as f64 / total).collect()
    }

    pub fn is_sound(&self, conflicts: &ConflictGraph) -> bool {
        self.sets.iter().all(|s| conflicts.is_independent(s))
    }

    pub fn is_maximal(&self, conflicts: &ConflictGraph) -> bool {
        self.sets.iter().all(|s| {
            (0..conflicts.len())
                .filter(|l| s.binary_search(l).is_err())
                .all(|l| s.iter().any(|&m| conflicts.conflicts(l, m)))
        })
    }
}

/// All maximal independent sets, found as maximal cliques of the complement
/// of the conflict graph (Bron-Kerbosch with pivoting).
pub fn enumerate_maximal_independent_sets(conflicts: &ConflictGraph, cap: usize) -> Result<IndependentSetFamily> {
    let m = conflicts.len();
    let compat: Vec<FixedBitSet> = (0..m)
        .map(|a| {
            let mut row = conflicts.row(a).clone();
            row.grow(m);
            row.toggle_range(..);
            row.set(a, false);
            row
        })
        .collect();
    let mut out = Vec::new();
    let mut p = FixedBitSet::with_capacity(m);
    p.insert_range(..);
    let mut r = Vec::new();
    bron_kerbosch(&compat, &mut r, p, FixedBitSet::with_capacity(m), &mut out, cap)?;
    IndependentSetFamily::new(m, out)
}

fn bron_kerbosch(
    compat: &[FixedBitSet],
    r: &mut Vec<usize>,
    mut p: FixedBitSet,
    mut x: FixedBitSet,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) -> Result<()> {
    if p.is_clear() {
        if x.is_clear() {
            if out.len() >= cap {
                return Err(Error::EnumerationBlowup { cap });
            }
            out.push(r.clone());
        }
        return Ok(());
    }
    let pivot = p
        .ones()
        .chain(x.ones())
        .max_by_key(|&u| p.intersection_count(&compat[u]))
        .expect("p is non-empty");
    let candidates: Vec<usize> = p.difference(&compat[pivot]).collect();
    for v in candidates {
        r.push(v);
        let mut p_next = p.clone();
        p_next.intersect_with(&compat[v]);
        let mut x_next = x.clone();
        x_next.intersect_with(&compat[v]);
        bron_kerbosch(compat, r, p_next, x_next, out, cap)?;
        r.pop();
        p.set(v, false);
        x.insert(v);
    }
    Ok(())
}

/// Every non-empty independent set, maximal or not.
pub fn enumerate_independent_sets(conflicts: &ConflictGraph, cap: usize) -> Result<IndependentSetFamily> {
    fn extend(
        conflicts: &ConflictGraph,
        start: usize,
        r: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        for v in start..conflicts.len() {
            if r.iter().any(|&u| conflicts.conflicts(u, v)) {
                continue;
            }
            r.push(v);
            if out.len() >= cap {
                return Err(Error::EnumerationBlowup { cap });
            }
            out.push(r.clone());
            extend(conflicts, v + 1, r, out, cap)?;
            r.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    extend(conflicts, 0, &mut Vec::new(), &mut out, cap)?;
    IndependentSetFamily::new(conflicts.len(), out)
}

#[cfg(test)]
mod tests {
    use super::super::{build_grid, conflict_sets, InterferenceModel};
    use super::*;

    #[test]
    fn path_of_three() {
        let c = ConflictGraph::from_pairs(3, &[(0, 1), (1, 2)]);
        let f = enumerate_maximal_independent_sets(&c, 100).unwrap();
        assert_eq!(f.sets(), &[vec![0, 2], vec![1]]);
        assert_eq!(f.membership(0), &[0]);
        assert_eq!(f.time_shares(), vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn triangle() {
        let c = ConflictGraph::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]);
        let f = enumerate_maximal_independent_sets(&c, 100).unwrap();
        assert_eq!(f.sets(), &[vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn no_conflicts_gives_one_set() {
        let c = ConflictGraph::from_pairs(4, &[]);
        let f = enumerate_maximal_independent_sets(&c, 100).unwrap();
        assert_eq!(f.sets(), &[vec![0, 1, 2, 3]]);
        assert_eq!(enumerate_independent_sets(&c, 100).unwrap().len(), 15);
    }

    #[test]
    fn grid_family_sizes() {
        let g = build_grid(4, 4).unwrap();
        let c = conflict_sets(&g, InterferenceModel::TwoHop);
        let f = enumerate_maximal_independent_sets(&c, DEFAULT_FAMILY_CAP).unwrap();
        assert_eq!(f.len(), 1088);
        assert!(f.is_sound(&c) && f.is_maximal(&c));
        assert!((0..48).all(|l| !f.membership(l).is_empty()));
    }

    #[test]
    fn cap_is_enforced() {
        let g = build_grid(4, 4).unwrap();
        let c = conflict_sets(&g, InterferenceModel::TwoHop);
        assert!(matches!(
            enumerate_maximal_independent_sets(&c, 100),
            Err(Error::EnumerationBlowup { cap: 100 })
        ));
    }
}
