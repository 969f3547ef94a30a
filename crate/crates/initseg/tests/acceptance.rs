//! The acceptance suite: one test per criterion, each printing a pass/fail
//! line. Every threshold is pinned here; all checks are exact.

use std::time::Instant;

use initseg::verify;

fn gate(name: &str, report: &verify::Report) {
    println!("{}", report.summary(name));
    assert!(report.ok(), "{name}: {:?}", report.first_failure);
}

#[test]
fn criterion_01_golden_two_element_table() {
    let t0 = Instant::now();
    let r = verify::golden_table();
    gate("criterion 1 (golden table)", &r);
    assert!(t0.elapsed().as_secs() < 1, "golden table must be instant");
}

#[test]
fn criterion_02_malcev_homogeneity_sweep() {
    let t0 = Instant::now();
    let r = verify::malcev_sweep(4);
    gate("criterion 2 (homogeneity sweep, carrier ≤ 4, ≤ 2 ops)", &r);
    assert!(r.checked > 33_000, "sweep must cover all op multisets, saw {}", r.checked);
    assert!(t0.elapsed().as_secs() < 300, "sweep must finish within 5 minutes");
}

#[test]
fn criterion_03_pudlak_stage_soundness() {
    let t0 = Instant::now();
    let r = verify::pudlak_soundness(2);
    gate("criterion 3 (stage soundness, catalog ≤ stage 2)", &r);
    assert_eq!(r.checked, 6, "all six catalog fixtures must build");
    assert!(t0.elapsed().as_secs() < 600, "soundness sweep must finish within 10 minutes");
}

#[test]
fn criterion_04_stabilization() {
    let r = verify::stabilization(1);
    gate("criterion 4 (stabilization, stages ≤ 1)", &r);
}

#[test]
fn criterion_05_embedding_biconditional() {
    let r = verify::embedding(1);
    gate("criterion 5 (embedding biconditional)", &r);
    assert_eq!(r.checked, 2, "both named homomorphisms must embed");
}

#[test]
fn criterion_06_glb_interpolation() {
    let t0 = Instant::now();
    let r = verify::glb_random(100, 0xD1CE);
    gate("criterion 6 (meet-directed interpolation, 100 seeded instances)", &r);
    assert_eq!(r.checked, 100);
    assert!(t0.elapsed().as_secs() < 120, "interpolation sweep must finish within 2 minutes");
}

#[test]
fn criterion_07_extendibility_interpolation() {
    let t0 = Instant::now();
    let r = verify::extendibility_random(50, 0xFEED);
    gate("criterion 7 (extendibility interpolation, 50 seeded instances)", &r);
    assert_eq!(r.checked, 50);
    assert!(t0.elapsed().as_secs() < 300, "extendibility sweep must finish within 5 minutes");
}

#[test]
fn criterion_08_computation_procedures() {
    let r = verify::computation_fixtures();
    gate("criterion 8 (computation procedures on splitting fixtures)", &r);
    assert_eq!(r.checked, 3, "at least three fixtures");
}

#[test]
fn criterion_09_simulator_soundness() {
    let t0 = Instant::now();
    let out = verify::simulator_soundness(500, 1);
    println!("{}", out.report.summary("criterion 9 (500-stage checked construction run)"));
    for note in &out.report.notes {
        println!("  {note}");
    }
    assert!(out.report.ok(), "{:?}", out.report.first_failure);
    assert_eq!(out.hard_violations, 0);
    assert!(t0.elapsed().as_secs() < 600, "checked run must finish within 10 minutes");
}

#[test]
fn criterion_10_determinism() {
    let r = verify::determinism(80, 7);
    gate("criterion 10 (bytewise determinism of exports)", &r);
}

#[test]
fn golden_dot_fixtures() {
    // Committed byte-exact DOT renderings of the smallest stages.
    use initseg::catalog;
    use initseg::pudlak::{pudlak_stage, Variant, DEFAULT_VERTEX_BUDGET};
    for (stage, file) in [(0usize, "two_chain_stage0.dot"), (1, "two_chain_stage1.dot")] {
        let g = pudlak_stage(&catalog::two_chain(), stage, Variant::Original, DEFAULT_VERTEX_BUDGET)
            .unwrap();
        let want = std::fs::read_to_string(format!(
            "{}/tests/golden/{}",
            env!("CARGO_MANIFEST_DIR"),
            file
        ))
        .expect("golden file present");
        assert_eq!(g.to_dot(), want, "DOT output drifted from {file}");
    }
    println!("golden DOT fixtures: PASS");
}
