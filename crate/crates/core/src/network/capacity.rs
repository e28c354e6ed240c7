use std::collections::HashMap;

use super::conflict::ConflictGraph;
use super::Network;

/// Shannon capacity `B log2(1 + a P / N0)` in bits/s.
#[inline]
pub fn capacity_orthogonal(bandwidth: f64, gain: f64, power: f64, noise: f64) -> f64 {
    bandwidth * (gain * power / noise).ln_1p() / std::f64::consts::LN_2
}

/// Channel gains seen by every receiver: the direct gain of each link and,
/// for each conflicting link `(k, l)`, the gain from transmitter `k` to the
/// receiver of the link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub direct: Vec<f64>,
    /// `interference[e]` lists `(interfering link, cross gain)`.
    pub interference: Vec<Vec<(usize, f64)>>,
}

impl LinkGains {
    /// Gains with no cross terms.
    pub fn isolated(direct: Vec<f64>) -> Self {
        let n = direct.len();
        Self {
            direct,
            interference: vec![Vec::new(); n],
        }
    }

    /// Assembles gains from per-pair values laid out by [`SinrLayout`].
    pub fn from_pairs(layout: &SinrLayout, pair_gain: &[f64]) -> Self {
        Self {
            direct: pair_gain[..layout.num_links].to_vec(),
            interference: layout
                .terms
                .iter()
                .map(|t| t.iter().map(|&(k, p)| (k, pair_gain[p])).collect())
                .collect(),
        }
    }
}

/// Ordered `(transmitter, receiver)` pairs that appear in any SINR
/// expression. Pair `e` for `e < num_links` is link `e` itself; cross pairs
/// that coincide with a link reuse that link's channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrLayout {
    pub num_links: usize,
    pub pairs: Vec<(usize, usize)>,
    /// `terms[e]` lists `(interfering link, pair id)`.
    pub terms: Vec<Vec<(usize, usize)>>,
}

impl SinrLayout {
    pub fn new(net: &Network, conflicts: &ConflictGraph) -> Self {
        let mut pairs: Vec<(usize, usize)> = net.links().iter().map(|l| (l.from, l.to)).collect();
        let mut ids: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let mut terms = Vec::with_capacity(net.num_links());
        for e in 0..net.num_links() {
            let rx = net.link(e).to;
            let t = conflicts
                .of(e)
                .into_iter()
                .map(|k| {
                    let key = (net.link(k).from, rx);
                    let id = *ids.entry(key).or_insert_with(|| {
                        pairs.push(key);
                        pairs.len() - 1
                    });
                    (k, id)
                })
                .collect();
            terms.push(t);
        }
        Self {
            num_links: net.num_links(),
            pairs,
            terms,
        }
    }
}

/// SINR capacity of `link` under powers `p` of every link.
pub fn capacity_nonorthogonal(net: &Network, gains: &LinkGains, p: &[f64], link: usize) -> f64 {
    let interference: f64 = gains.interference[link].iter().map(|&(k, a)| a * p[k]).sum();
    let sinr = gains.direct[link] * p[link] / (net.params.noise + interference);
    net.params.bandwidth * sinr.ln_1p() / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::super::{build_grid, conflict_sets, InterferenceModel, Link};
    use super::*;

    #[test]
    fn orthogonal_values() {
        assert_eq!(capacity_orthogonal(1e6, 1e-7, 0.0, 0.1), 0.0);
        let c = capacity_orthogonal(1e6, 1e-7, 2.0, 0.1);
        let expected = 1e6 * (1.0f64 + 2e-6).ln() / 2f64.ln();
        assert!((c - expected).abs() < 1e-9 && (c - 2.885).abs() < 1e-3);
        assert!(capacity_orthogonal(1e6, 2e-7, 2.0, 0.1) > c);
    }

    fn pair() -> (Network, ConflictGraph) {
        let net = Network::from_links(4, vec![Link { from: 0, to: 1 }, Link { from: 2, to: 3 }]).unwrap();
        (net, ConflictGraph::from_pairs(2, &[(0, 1)]))
    }

    #[test]
    fn reduces_to_orthogonal_without_interferers() {
        let (net, c) = pair();
        let layout = SinrLayout::new(&net, &c);
        assert_eq!(layout.pairs, vec![(0, 1), (2, 3), (2, 1), (0, 3)]);
        let g = LinkGains::from_pairs(&layout, &[1e-7, 1e-7, 1e-7, 1e-7]);
        let c0 = capacity_nonorthogonal(&net, &g, &[2.0, 0.0], 0);
        assert_eq!(c0, capacity_orthogonal(1e6, 1e-7, 2.0, 0.1));
    }

    #[test]
    fn symmetric_sinr_and_limit() {
        let (net, c) = pair();
        let layout = SinrLayout::new(&net, &c);
        let g = LinkGains::from_pairs(&layout, &[1e-7; 4]);
        let sinr: f64 = 2e-7 / (0.1 + 2e-7);
        let expected = 1e6 * sinr.ln_1p() / 2f64.ln();
        assert!((capacity_nonorthogonal(&net, &g, &[2.0, 2.0], 0) - expected).abs() < 1e-9);
        assert!(capacity_nonorthogonal(&net, &g, &[2.0, 1e15], 0) < 1e-3);
    }

    #[test]
    fn grid_layout_reuses_link_channels() {
        let net = build_grid(2, 2).unwrap();
        let c = conflict_sets(&net, InterferenceModel::NodeExclusive);
        let layout = SinrLayout::new(&net, &c);
        for (e, terms) in layout.terms.iter().enumerate() {
            for &(k, p) in terms {
                assert_eq!(layout.pairs[p], (net.link(k).from, net.link(e).to));
                if let Some(id) = net.link_index(net.link(k).from, net.link(e).to) {
                    assert_eq!(p, id);
                }
            }
        }
    }
}
