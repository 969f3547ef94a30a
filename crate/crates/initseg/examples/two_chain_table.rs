//! The smallest staged representation: a single edge realizes the
//! two-element lattice, and its table is the classic 2×2 matrix.

use initseg::catalog;
use initseg::partition::format_table;
use initseg::pudlak::{pudlak_stage, table_from_graph, Variant, DEFAULT_VERTEX_BUDGET};

fn main() {
    let two = catalog::two_chain();
    let g = pudlak_stage(&two, 0, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap();
    let table = table_from_graph(&g).unwrap();
    println!("stage 0 of the 2-chain: {} vertices, {} edge", g.vertex_count(), g.edge_count());
    print!("{}", format_table(&table));
    assert_eq!(table.entry(0, 0), 0);
    assert_eq!(table.entry(0, 1), 0);
    assert_eq!(table.entry(1, 1), 1);
    assert_eq!(table.entry(1, 0), 0);
    println!("matches the reference matrix");
}
