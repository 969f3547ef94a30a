//! A bounded checked run of the priority-tree construction on the
//! two-element-lattice presentation: strategies request, the initial tree
//! grows, outcomes redirect the path, and the trace is replayable.

use initseg::catalog;
use initseg::sim::{self, RequirementSchedule, Sigma2Oracle, SimConfig, SimContext};
use initseg::verify::standard_functionals;

fn main() {
    let lat = catalog::two_chain();
    let config = SimConfig { stages: 150, ..Default::default() };
    let ctx = SimContext::for_constant_sequence(
        &lat,
        8,
        standard_functionals(),
        Sigma2Oracle::AlwaysCorrect,
        config,
    )
    .unwrap();
    let schedule = RequirementSchedule::seeded(1, 64, 4, &lat);
    let run = sim::run_construction(&ctx, schedule).unwrap();
    let hard = sim::invariants::hard_violations(&run.violations);
    println!(
        "150 stages: {} designated nodes, {} hard violations",
        run.nodes.len(),
        hard.len()
    );
    let g = sim::extract_g(&run.trace);
    println!("true-path approximation depth: {}", g.gamma_approx.last().map(|p| p.len()).unwrap_or(0));
    println!("rooted strategies along it:");
    for (path, kind, len) in &g.root_lengths {
        println!("  {:?} ({kind}) root length {len}", path);
    }
    println!("limit prefix defined on {} coordinates", g.coords.len());
}
