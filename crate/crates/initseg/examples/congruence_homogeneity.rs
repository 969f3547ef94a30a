//! Congruence lattices of unary algebras are homogeneous: every principal
//! table relation is generated by endomorphism images, witnessed by
//! replayable interpolant chains.

use initseg::partition::{
    con_table, end_principal, endomorphisms, homogeneity_interpolants, is_malcev_homogeneous,
    EndSource, UnaryAlgebra,
};

fn main() {
    // One unary operation collapsing 1 into 0 on a 3-point carrier.
    let algebra = UnaryAlgebra::new(3, vec![vec![0, 0, 2]]).unwrap();
    let table = con_table(&algebra).unwrap();
    println!(
        "Con A has {} congruences on carrier {}",
        table.lattice().size(),
        table.carrier()
    );
    let ends = endomorphisms(&table).unwrap();
    println!("End Θ has {} maps", ends.len());
    let report = is_malcev_homogeneous(&table, &ends, EndSource::Exhaustive);
    println!("homogeneous: {}", report.homogeneous);
    // Replay one interpolant chain.
    let (a, b) = (0, 1);
    let e_rel = end_principal(3, &ends, a, b);
    for c in 0..3 {
        for d in 0..3 {
            if e_rel.same(c, d) && c < d {
                let chain = homogeneity_interpolants(3, &ends, a, b, c, d).unwrap();
                assert!(chain.verify(&ends, a, b));
                println!("chain from {c} to {d}: {:?}", chain.points);
            }
        }
    }
}
