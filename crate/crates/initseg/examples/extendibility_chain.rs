//! Extendibility interpolation: a two-point partial homomorphism extends
//! to a chain of strings whose consecutive pairs are images of the points
//! under full table homomorphisms.

use initseg::catalog;
use initseg::interp::{end_pairs, extendibility_interpolate};
use initseg::pudlak::{pudlak_stage, PudlakTables, Variant, DEFAULT_VERTEX_BUDGET};

fn main() {
    let m3 = catalog::m3();
    let t = PudlakTables::new(
        pudlak_stage(&m3, 2, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap(),
    );
    let g = t.graph();
    // u,v: endpoints of a chain edge in the (a,b)-pentagon.
    let p = g.pentagons().iter().find(|p| p.pair == (1, 2)).unwrap();
    let e = g.edge(p.edges[0]);
    let (u, v) = (e.a, e.b);
    // Targets come from a reachable endomorphism image pair.
    let pairs = end_pairs(&t, u, v, 2, 50_000);
    let wit = pairs
        .values()
        .find(|w| {
            let (a, b) = (w.eval(g, u), w.eval(g, v));
            a != b && a < t.stage_size(1) && b < t.stage_size(1)
        })
        .expect("reachable pair");
    let lambda = vec![0, wit.eval(g, u)];
    let lambda2 = vec![0, wit.eval(g, v)];
    let res = extendibility_interpolate(&t, 1, u, v, &lambda, &lambda2, 100_000).unwrap();
    println!("t = {} (multiple of 4), chain:", res.chain.len() - 1);
    for s in &res.chain {
        println!("  {s:?}");
    }
    assert!(res.verify(&t, 1, u, v, &lambda, &lambda2));
    println!("every link realized by a verified homomorphism");
}
