//! Build staged colored graphs for the fixture catalog, verify the
//! structural conditions, and render one stage as DOT.

use initseg::catalog;
use initseg::pudlak::{pudlak_stage, verify_pudlak_conditions, Variant, DEFAULT_VERTEX_BUDGET};

fn main() {
    for lat in catalog::all_fixtures() {
        let g = pudlak_stage(&lat, 2, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap();
        let report = verify_pudlak_conditions(&g, 12, 500_000).unwrap();
        println!(
            "{} elements: stage 2 has {} vertices, {} edges; {} pentagons and {} cycles checked",
            lat.size(),
            g.vertex_count(),
            g.edge_count(),
            report.pentagons_checked,
            report.cycles_checked,
        );
    }
    let g1 = pudlak_stage(&catalog::two_chain(), 1, Variant::Original, DEFAULT_VERTEX_BUDGET)
        .unwrap();
    println!("\nDOT of the 2-chain at stage 1:\n{}", g1.to_dot());
}
