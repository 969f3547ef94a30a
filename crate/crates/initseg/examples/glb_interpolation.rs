//! Meet-directed interpolation: between any two strings related modulo
//! a∧b there is a chain alternating between the ∼_a and ∼_b relations,
//! one stage deeper.

use initseg::catalog;
use initseg::interp::glb_interpolate;
use initseg::pudlak::{pudlak_stage, PudlakTables, Variant, DEFAULT_VERTEX_BUDGET};

fn main() {
    let m3 = catalog::m3();
    let t = PudlakTables::new(
        pudlak_stage(&m3, 2, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap(),
    );
    // Atoms a=1, b=2 meet at 0; τ and ρ are ∼_0-related length-2 strings.
    let sigma = vec![0usize];
    let tau = vec![0usize, 1];
    let rho = vec![1usize, 0];
    let chain = glb_interpolate(&t, 1, 2, 0, &sigma, &tau, &rho).unwrap();
    println!("chain of {} strings:", chain.strings.len());
    for (i, s) in chain.strings.iter().enumerate() {
        let rel = if i == 0 { "   " } else if i % 2 == 1 { "~a " } else { "~b " };
        println!("  {rel}{s:?}");
    }
    assert!(chain.verify(&t, 1, 2, &sigma, &tau, &rho));
    println!("verified link by link");
}
