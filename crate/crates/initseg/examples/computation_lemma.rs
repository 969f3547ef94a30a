//! On a weak e-splitting tree, the oracle computation and the signature
//! projection carry the same information: forward recovery from the
//! signature and backward recovery from the computed values.

use initseg::catalog;
use initseg::interp::project;
use initseg::pudlak::{pudlak_stage, PudlakTables, Variant, DEFAULT_VERTEX_BUDGET};
use initseg::splitting::{
    check_weak_e_splitting, computation_backward, computation_forward, StringFunctional,
};
use initseg::tree::{CappedCarriers, TreeMap};

fn main() {
    let t = PudlakTables::new(
        pudlak_stage(&catalog::two_chain(), 1, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap(),
    );
    let caps = CappedCarriers { sizes: vec![2, 3] };
    let stages: Vec<TreeMap> = (1..=6).map(|d| TreeMap::identity(&caps, d)).collect();
    let phi = StringFunctional::Proj { k: 1 };
    let report = check_weak_e_splitting(&t, &phi, &stages, 1, &caps, 8, 100);
    println!("weak e-splitting fixture: {}", report.passes());

    let g = vec![0usize, 2, 1, 0, 2, 1];
    let g_sig = project(&t, 1, &g);
    for x in 0..g.len() {
        let direct = phi.eval(&t, &g, x, 100).value().unwrap();
        let forward = computation_forward(&t, &phi, stages.last().unwrap(), 1, &g_sig, x, 100).unwrap();
        assert_eq!(direct, forward);
    }
    println!("forward recovery matches direct evaluation on all inputs");

    let phi_g = |x: usize| phi.eval(&t, &g, x, 100).value();
    let back = computation_backward(&t, &phi, &stages, 1, &phi_g, 5, 8, 100).unwrap();
    println!("backward recovery visited {} levels:", back.steps.len());
    for step in &back.steps {
        println!("  {:?}", step.sigma);
    }
}
