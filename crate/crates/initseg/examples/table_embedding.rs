//! Embed the staged graph of a target lattice into the staged graph of a
//! source lattice along a homomorphism, by adjoint recoloring, and check
//! the defining equivalence exhaustively.

use initseg::catalog;
use initseg::lattice::UslHomomorphism;
use initseg::limits::embed_table;
use initseg::pudlak::DEFAULT_VERTEX_BUDGET;

fn main() {
    let two = catalog::two_chain();
    let m3 = catalog::m3();
    let phi = UslHomomorphism::new(two, m3.clone(), vec![0, m3.top()]).unwrap();
    let emb = embed_table(&phi, 1, DEFAULT_VERTEX_BUDGET).unwrap();
    println!(
        "embedded {} vertices of the M3 graph into {} vertices of the 2-chain graph",
        emb.src_graph.vertex_count(),
        emb.dst_graph.vertex_count()
    );
    println!("stage map m = {:?}", emb.m);
    emb.verify_equivalence(&phi).unwrap();
    emb.verify_image_colors(&phi).unwrap();
    println!("equivalence x ~_phi(a) y  <=>  i(x) ~_a i(y) verified for all pairs");
}
