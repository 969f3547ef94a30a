use initseg::catalog;
use initseg::sim::{self, RequirementSchedule, Sigma2Oracle, SimConfig, SimContext};
use initseg::splitting::StringFunctional;

fn main() {
    let stages: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    let lat = catalog::two_chain();
    let config = SimConfig { stages, ..Default::default() };
    // Projection functional only: splittings exist, so the splitting-tree
    // pipeline (interpolation substeps) must run.
    let ctx = SimContext::for_constant_sequence(
        &lat, 8, vec![StringFunctional::Proj { k: 1 }], Sigma2Oracle::AlwaysCorrect, config,
    ).unwrap();
    let schedule = RequirementSchedule::seeded(1, 64, 1, &lat);
    let sim = sim::run_construction(&ctx, schedule).unwrap();
    let hard = sim::invariants::hard_violations(&sim.violations);
    println!("hard violations: {}", hard.len());
    for v in hard.iter().take(6) { println!("  {v}"); }
    // Did any sp node grow past its root (completed level)?
    let mut sp_grown = 0;
    let mut sp_states: Vec<(Vec<u32>, Vec<u32>, usize)> = vec![];
    for n in sim.nodes.values().filter(|n| !n.cancelled) {
        if n.designation.kind() == "sp" {
            sp_states.push((n.path.clone(), n.state.clone(), n.tree.len()));
            if n.tree.len() > 1 { sp_grown += 1; }
        }
    }
    println!("sp nodes with completed levels: {sp_grown}");
    for (p, st, len) in sp_states.iter().take(8) { println!("  sp {:?} state {:?} tree {}", p, st, len); }
    let g = sim::extract_g(&sim.trace);
    println!("path depth {}", g.gamma_approx.last().map(|p| p.len()).unwrap_or(0));
    for (p, k, l) in g.root_lengths.iter().take(10) { println!("  {p:?} ({k}) {l}"); }
}
