use super::estimate::{DeterministicControls, ExpectationEstimates};
use super::multipliers::Multipliers;
use super::spec::ProblemSpec;

/// Constraint violations at the current controls, laid out like the
/// multipliers: flow conservation, link capacity, node power budget.
pub fn subgradients(spec: &ProblemSpec, est: &ExpectationEstimates, controls: &DeterministicControls) -> Multipliers {
    let mut g = Multipliers::filled(
        &spec.flows.destinations,
        spec.network.num_nodes(),
        spec.network.num_links(),
        0.0,
        0.0,
        0.0,
    );
    fill_subgradients(spec, est, controls, &mut g);
    g
}

pub(crate) fn fill_subgradients(
    spec: &ProblemSpec,
    est: &ExpectationEstimates,
    controls: &DeterministicControls,
    g: &mut Multipliers,
) {
    let net = &spec.network;
    let horizon = spec.grid.dt() * spec.grid.n() as f64;
    for row in &mut g.mu {
        row.iter_mut().for_each(|x| *x = 0.0);
    }
    g.ell.iter_mut().for_each(|x| *x = 0.0);
    for (f, li) in spec.flows.flows.iter().zip(&controls.lambda_int) {
        let d = spec.flows.destination_index(f.destination).expect("listed");
        g.mu[d][f.source] += li;
    }
    for (k, &d) in spec.flows.destinations.iter().enumerate() {
        let row = &controls.routing[k];
        let gm = &mut g.mu[k];
        for (e, l) in net.links().iter().enumerate() {
            let r = row[e];
            if r == 0.0 {
                continue;
            }
            let flow = r * horizon;
            gm[l.from] -= flow;
            if l.to != d {
                gm[l.to] += flow;
            }
            g.ell[e] += flow;
        }
    }
    for e in 0..net.num_links() {
        g.ell[e] -= est.capacity[e];
    }
    g.nu.iter_mut().for_each(|x| *x = -net.params.node_budget);
    for (e, l) in net.links().iter().enumerate() {
        g.nu[l.from] += est.power[e];
    }
}
