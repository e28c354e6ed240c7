use rand::Rng;
use stochnum::network::{
    build_grid, conflict_sets, enumerate_independent_sets, enumerate_maximal_independent_sets, ConflictGraph,
    InterferenceModel,
};
use stochnum::rng::seeded_rng;

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..1 << n).map(move |mask| (0..n).filter(|&e| mask >> e & 1 == 1).collect())
}

fn normalized(mut sets: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for s in &mut sets {
        s.sort_unstable();
    }
    sets.sort();
    sets
}

/// Independent sets and maximal independent sets by checking all `2^n`
/// subsets.
fn brute_force(g: &ConflictGraph) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let n = g.len();
    let all: Vec<Vec<usize>> = subsets(n).filter(|s| g.is_independent(s)).collect();
    let maximal = all
        .iter()
        .filter(|s| {
            (0..n).all(|v| {
                if s.contains(&v) {
                    return true;
                }
                let mut t = (*s).clone();
                t.push(v);
                !g.is_independent(&t)
            })
        })
        .cloned()
        .collect();
    (all, maximal)
}

#[test]
fn enumeration_matches_brute_force_on_random_graphs() {
    let mut rng = seeded_rng(2024, 7);
    for trial in 0..50 {
        let n = rng.random_range(1..=12);
        let density: f64 = rng.random_range(0.0..0.8);
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(density) {
                    pairs.push((a, b));
                }
            }
        }
        let g = ConflictGraph::from_pairs(n, &pairs);
        let (all, maximal) = brute_force(&g);
        let got_max = enumerate_maximal_independent_sets(&g, 1 << 12).unwrap();
        let got_all = enumerate_independent_sets(&g, 1 << 12).unwrap();
        assert_eq!(normalized(got_max.sets().to_vec()), normalized(maximal), "trial {trial}: maximal sets");
        assert_eq!(normalized(got_all.sets().to_vec()), normalized(all), "trial {trial}: all sets");
        assert!(got_max.is_sound(&g) && got_max.is_maximal(&g));
    }
}

#[test]
fn grid_family_is_sound_and_maximal() {
    let net = build_grid(4, 4).unwrap();
    let g = conflict_sets(&net, InterferenceModel::TwoHop);
    let family = enumerate_maximal_independent_sets(&g, 1 << 20).unwrap();
    assert_eq!(family.len(), 1088);
    assert!(family.is_sound(&g));
    assert!(family.is_maximal(&g));
    let shares = family.time_shares();
    assert!(shares.iter().all(|&z| z > 0.0 && z < 1.0));
}
