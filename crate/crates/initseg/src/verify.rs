//! Batch verifiers: the sweeps and seeded-instance checks behind the
//! `verify` subcommands and the acceptance suite. Every verifier returns a
//! report with counts and the first failure, never panicking on red.

use std::fmt::Write as _;

use crate::catalog;
use crate::interp::{
    end_pairs, extendibility_interpolate, glb_interpolate, is_table_string, project,
};
use crate::lattice::UslHomomorphism;
use crate::limits::embed_table;
use crate::partition::{
    all_partitions, con_table, endomorphisms, is_malcev_homogeneous, EndSource, Partition,
    UnaryAlgebra,
};
use crate::pudlak::{
    pudlak_stage, table_from_graph, verify_pudlak_conditions, PudlakTables, Variant,
    DEFAULT_VERTEX_BUDGET,
};
use crate::sim::{self, RequirementSchedule, Sigma2Oracle, SimConfig, SimContext};
use crate::splitting::{
    check_weak_e_splitting, computation_backward, computation_forward, same_mod,
    StringFunctional,
};
use crate::tree::{extend_type, CappedCarriers, Parent, TreeMap};
use crate::util::SplitMix64;

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub checked: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.failures == 0
    }

    fn fail(&mut self, msg: String) {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(msg);
        }
    }

    pub fn summary(&self, name: &str) -> String {
        let mut s = format!(
            "{}: {} — {} checked, {} failures",
            name,
            if self.ok() { "PASS" } else { "FAIL" },
            self.checked,
            self.failures
        );
        if let Some(f) = &self.first_failure {
            let _ = write!(s, " (first: {f})");
        }
        s
    }
}

/// The two-point golden table must match the reference matrix exactly.
pub fn golden_table() -> Report {
    let mut r = Report::default();
    let g = pudlak_stage(&catalog::two_chain(), 0, Variant::Original, DEFAULT_VERTEX_BUDGET)
        .expect("stage 0 fits any budget");
    match table_from_graph(&g) {
        Ok(t) => {
            r.checked = 4;
            let want = [((0, 0), 0), ((0, 1), 0), ((1, 1), 1), ((1, 0), 0)];
            for ((a, k), v) in want {
                if t.entry(a, k) != v {
                    r.fail(format!("entry {a}^[{k}] = {} (want {v})", t.entry(a, k)));
                }
            }
        }
        Err(e) => r.fail(format!("table extraction failed: {e}")),
    }
    r
}

/// Exhaustive Malcev homogeneity of congruence lattices over all unary
/// algebras with carrier ≤ `max_carrier` and at most two operations, up to
/// the op-multiset symmetry (operation order does not change Con A).
/// Interpolant chains are replay-verified for every generated pair.
pub fn malcev_sweep(max_carrier: usize) -> Report {
    let mut r = Report::default();
    for n in 1..=max_carrier {
        let parts = all_partitions(n);
        let ops: Vec<Vec<usize>> = {
            let mut out = Vec::new();
            let total = n.pow(n as u32);
            for code in 0..total {
                let mut f = Vec::with_capacity(n);
                let mut c = code;
                for _ in 0..n {
                    f.push(c % n);
                    c /= n;
                }
                out.push(f);
            }
            out
        };
        let mut op_sets: Vec<Vec<Vec<usize>>> = vec![vec![]];
        for f in &ops {
            op_sets.push(vec![f.clone()]);
        }
        for (i, f) in ops.iter().enumerate() {
            for g in ops.iter().skip(i) {
                op_sets.push(vec![f.clone(), g.clone()]);
            }
        }
        for set in op_sets {
            let algebra = UnaryAlgebra::new(n, set).unwrap();
            let congs: Vec<Partition> =
                parts.iter().filter(|p| algebra.preserves(p)).cloned().collect();
            let table = match con_table(&algebra) {
                Ok(t) => t,
                Err(e) => {
                    r.fail(format!("Con table failed on carrier {n}: {e}"));
                    continue;
                }
            };
            if table.lattice().size() != congs.len() {
                r.fail(format!("congruence count mismatch on carrier {n}"));
            }
            let ends = match endomorphisms(&table) {
                Ok(e) => e,
                Err(e) => {
                    r.fail(format!("End enumeration failed: {e}"));
                    continue;
                }
            };
            let rep = is_malcev_homogeneous(&table, &ends, EndSource::Exhaustive);
            r.checked += 1;
            if !rep.homogeneous {
                r.fail(format!(
                    "non-homogeneous Con A on carrier {n}: witness {:?}",
                    rep.witness
                ));
                continue;
            }
            // Replay interpolant chains: BFS once per (a,b) over deduped
            // endomorphism image pairs, then verify each derived chain.
            for a in 0..n {
                for b in 0..n {
                    let mut pair_wit: Vec<((usize, usize), usize)> = Vec::new();
                    for (w, f) in ends.iter().enumerate() {
                        let key = (f[a].min(f[b]), f[a].max(f[b]));
                        if !pair_wit.iter().any(|(k, _)| *k == key) {
                            pair_wit.push((key, w));
                        }
                    }
                    let e_rel = crate::partition::end_principal(n, &ends, a, b);
                    for c in 0..n {
                        for d in 0..n {
                            if !e_rel.same(c, d) {
                                continue;
                            }
                            match crate::partition::homogeneity_interpolants(n, &ends, a, b, c, d)
                            {
                                Ok(chain) => {
                                    if !chain.verify(&ends, a, b) {
                                        r.fail(format!(
                                            "chain replay failed on carrier {n} for ({a},{b},{c},{d})"
                                        ));
                                    }
                                }
                                Err(e) => {
                                    r.fail(format!("chain search failed: {e}"));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    r.notes.push("symmetry reduction: operation multisets of size ≤ 2".into());
    r
}

/// Graph-side soundness over the fixture catalog: the structural conditions
/// pass, color connectivity realizes joins as intersections at every stage,
/// and the deepest built stage separates all lattice elements.
pub fn pudlak_soundness(max_stage: usize) -> Report {
    let mut r = Report::default();
    for lat in catalog::all_fixtures() {
        let g = match pudlak_stage(&lat, max_stage, Variant::Original, DEFAULT_VERTEX_BUDGET) {
            Ok(g) => g,
            Err(e) => {
                r.fail(format!("build failed: {e}"));
                continue;
            }
        };
        r.checked += 1;
        if let Err(e) = verify_pudlak_conditions(&g, 12, 2_000_000) {
            r.fail(format!("conditions failed: {e}"));
        }
        for s in 0..=g.deepest_stage() {
            for a in lat.elements() {
                for b in lat.elements() {
                    let ra = g.color_equivalence_at(a, s);
                    let rb = g.color_equivalence_at(b, s);
                    let rj = g.color_equivalence_at(lat.join(a, b), s);
                    if rj != ra.meet(&rb).unwrap() {
                        r.fail(format!("join law fails at stage {s} for {a}∨{b}"));
                    }
                }
            }
        }
        if let Err(e) = table_from_graph(&g) {
            r.fail(format!("injectivity at deepest stage: {e}"));
        }
    }
    r
}

/// Stabilization: ∼_α on a stage equals the restriction of ∼_α one stage
/// deeper, for every catalog fixture and α.
pub fn stabilization(max_n: usize) -> Report {
    let mut r = Report::default();
    for lat in catalog::all_fixtures() {
        let g = match pudlak_stage(&lat, max_n + 1, Variant::Original, DEFAULT_VERTEX_BUDGET) {
            Ok(g) => g,
            Err(e) => {
                r.fail(format!("build failed: {e}"));
                continue;
            }
        };
        for alpha in lat.elements() {
            for n in 0..=max_n {
                r.checked += 1;
                let shallow = g.color_equivalence_at(alpha, n);
                let deep = g.color_equivalence_at(alpha, n + 1);
                if deep.restrict(g.vertices_at_stage(n)) != shallow {
                    r.fail(format!("stabilization fails for α={alpha} at stage {n}"));
                }
            }
        }
    }
    r
}

/// The embedding biconditional for the named homomorphism fixtures.
pub fn embedding(stages: usize) -> Report {
    let mut r = Report::default();
    for (phi, name) in catalog::hom_fixtures() {
        if name == "id: 2-chain" || name == "2-chain -> 3-chain" {
            continue;
        }
        match embed_table(&phi, stages, DEFAULT_VERTEX_BUDGET) {
            Ok(emb) => {
                r.checked += 1;
                if let Err(e) = emb.verify_equivalence(&phi) {
                    r.fail(format!("{name}: {e}"));
                }
                if let Err(e) = emb.verify_image_colors(&phi) {
                    r.fail(format!("{name} image colors: {e}"));
                }
            }
            Err(e) => r.fail(format!("{name}: embedding failed: {e}")),
        }
    }
    r
}

fn stage_tables(lat: &crate::lattice::FiniteLattice, stages: usize) -> PudlakTables {
    PudlakTables::new(
        pudlak_stage(lat, stages, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap(),
    )
}

/// Seeded GLB interpolation instances over the M3 and N5 tables; every
/// returned chain is link-checked and membership-checked.
pub fn glb_random(count: usize, seed: u64) -> Report {
    let mut r = Report::default();
    let mut rng = SplitMix64::new(seed);
    let tables = [stage_tables(&catalog::m3(), 2), stage_tables(&catalog::n5(), 2)];
    for i in 0..count {
        let t = &tables[i % 2];
        let lat = t.lattice().clone();
        // Random a,b with their meet as c.
        let a = rng.below(lat.size());
        let b = rng.below(lat.size());
        let c = lat.meet(a, b);
        let sig_len = 1 + rng.below(2);
        let sigma: Vec<usize> = (0..sig_len).map(|j| rng.below(t.stage_size(j))).collect();
        let tau_len = rng.below(4);
        let mut tau = Vec::new();
        let mut rho = Vec::new();
        for x in 0..tau_len {
            // Coordinates one stage shy of the built depth so interpolants
            // stay within it.
            let cap = t.stage_size(x.min(t.deepest_stage() - 1));
            let tv = rng.below(cap);
            let rel = t.rel(c);
            let class: Vec<usize> = (0..cap).filter(|&v| rel.same(v, tv)).collect();
            tau.push(tv);
            rho.push(*rng.pick(&class));
        }
        r.checked += 1;
        match glb_interpolate(t, a, b, c, &sigma, &tau, &rho) {
            Ok(chain) => {
                if !chain.verify(t, a, b, &sigma, &tau, &rho) {
                    r.fail(format!("instance {i}: chain fails verification"));
                }
            }
            Err(e) => r.fail(format!("instance {i}: {e}")),
        }
    }
    r
}

/// Seeded extendibility instances over the M3 and N5 tables: per-coordinate
/// targets are drawn from reachable endomorphism pairs so every instance is
/// honestly solvable; results are verified as full homomorphism chains with
/// t ≡ 0 mod 4.
pub fn extendibility_random(count: usize, seed: u64) -> Report {
    let mut r = Report::default();
    let mut rng = SplitMix64::new(seed);
    let tables = [stage_tables(&catalog::m3(), 2), stage_tables(&catalog::n5(), 2)];
    for i in 0..count {
        let t = &tables[i % 2];
        let g = t.graph();
        // u,v: endpoints of a random stage-1 chain edge.
        let stage1_pents: Vec<usize> = (0..g.pentagons().len())
            .filter(|&p| g.pentagon(p).stage == 1)
            .collect();
        let p = g.pentagon(*rng.pick(&stage1_pents));
        let edge = g.edge(p.edges[rng.below(4)]);
        let (u, v) = (edge.a, edge.b);
        let pairs = end_pairs(t, u, v, 2, 50_000);
        let lam_len = 1 + rng.below(2);
        let mut lambda = Vec::new();
        let mut lambda2 = Vec::new();
        for x in 0..lam_len {
            let cap = t.stage_size(x);
            // Reachable pairs inside the coordinate's carrier, else constant.
            let usable: Vec<(&(usize, usize), &crate::interp::WitnessMap)> =
                pairs.iter().filter(|((a, b), _)| *a < cap && *b < cap).collect();
            if !usable.is_empty() && rng.below(3) > 0 {
                let (_, wit) = usable[rng.below(usable.len())];
                lambda.push(wit.eval(g, u));
                lambda2.push(wit.eval(g, v));
            } else {
                let z = rng.below(cap);
                lambda.push(z);
                lambda2.push(z);
            }
        }
        if !is_table_string(t, &lambda) || !is_table_string(t, &lambda2) {
            r.fail(format!("instance {i}: generated strings leave the table"));
            continue;
        }
        r.checked += 1;
        match extendibility_interpolate(t, 1, u, v, &lambda, &lambda2, 100_000) {
            Ok(res) => {
                let tt = res.chain.len() - 1;
                if tt % 4 != 0 {
                    r.fail(format!("instance {i}: t = {tt} not divisible by 4"));
                }
                if !res.verify(t, 1, u, v, &lambda, &lambda2) {
                    r.fail(format!("instance {i}: verification failed"));
                }
            }
            Err(e) => r.fail(format!("instance {i}: {e}")),
        }
    }
    r
}

/// Hand-built weak e-splitting fixtures with planted branches: the forward
/// procedure matches direct evaluation everywhere, and the backward one
/// recovers the planted class at every step.
pub fn computation_fixtures() -> Report {
    let mut r = Report::default();
    struct Fixture {
        name: &'static str,
        tables: PudlakTables,
        stages: Vec<TreeMap>,
        k: usize,
        g: Vec<usize>,
    }
    fn tower(caps: &CappedCarriers, depth: usize) -> Vec<TreeMap> {
        let tr = TreeMap::rooted(vec![]);
        let mut cur = extend_type(&tr, &Parent::Identity, &[], 1, 1, caps).unwrap();
        let mut stages = vec![cur.clone()];
        for h in 2..=depth {
            let top = cur
                .iter()
                .filter(|(d, _)| d.len() == cur.max_dom_len())
                .map(|(_, v)| v.clone())
                .next()
                .unwrap();
            cur = extend_type(&cur, &Parent::Identity, &top, 1, h, caps).unwrap();
            stages.push(cur.clone());
        }
        stages
    }
    let mut fixtures: Vec<Fixture> = Vec::new();
    // 1: identity stages over a narrow cap of the 2-chain system.
    {
        let tables = stage_tables(&catalog::two_chain(), 1);
        let caps = CappedCarriers { sizes: vec![2, 3] };
        let stages: Vec<TreeMap> = (1..=6).map(|d| TreeMap::identity(&caps, d)).collect();
        let g = vec![0, 2, 1, 0, 2, 1];
        fixtures.push(Fixture { name: "identity/2-chain", tables, stages, k: 1, g });
    }
    // 2: extension-built tower over the wider 2-chain cap.
    {
        let tables = stage_tables(&catalog::two_chain(), 1);
        let caps = CappedCarriers { sizes: vec![2, 5] };
        let stages = tower(&caps, 7);
        let g = stages.last().unwrap().images().max_by_key(|v| v.len()).unwrap().clone();
        fixtures.push(Fixture { name: "tower/2-chain", tables, stages, k: 1, g });
    }
    // 3: tower over the capped 3-chain system; the cap reaches the pentagon
    // whose chain makes ∼_1 nontrivial on the carrier.
    {
        let tables = stage_tables(&catalog::chain(3), 1);
        let caps = CappedCarriers { sizes: vec![2, 8] };
        let stages = tower(&caps, 6);
        let g = stages.last().unwrap().images().max_by_key(|v| v.len()).unwrap().clone();
        fixtures.push(Fixture { name: "tower/3-chain", tables, stages, k: 1, g });
    }
    for f in fixtures {
        let phi = StringFunctional::Proj { k: f.k };
        let caps = CappedCarriers {
            sizes: (0..=f.tables.deepest_stage()).map(|j| f.tables.stage_size(j)).collect(),
        };
        let weak = check_weak_e_splitting(&f.tables, &phi, &f.stages, f.k, &caps, 10, 200);
        r.checked += 1;
        if !weak.passes() {
            r.fail(format!("{}: not a weak e-splitting fixture", f.name));
            continue;
        }
        let final_tree = f.stages.last().unwrap();
        let g_proj = project(&f.tables, f.k, &f.g);
        for x in 0..f.g.len() {
            let direct = phi.eval(&f.tables, &f.g, x, 200).value().unwrap();
            match computation_forward(&f.tables, &phi, final_tree, f.k, &g_proj, x, 200) {
                Ok(v) if v == direct => {}
                Ok(v) => r.fail(format!("{}: forward {v} ≠ direct {direct} at x={x}", f.name)),
                Err(e) => r.fail(format!("{}: forward failed at x={x}: {e}", f.name)),
            }
        }
        let phi_g = |x: usize| phi.eval(&f.tables, &f.g, x, 200).value();
        match computation_backward(&f.tables, &phi, &f.stages, f.k, &phi_g, 6, 10, 200) {
            Ok(back) => {
                if back.steps.len() < 6 {
                    r.fail(format!("{}: backward stalled at {} steps", f.name, back.steps.len()));
                }
                for (j, step) in back.steps.iter().enumerate() {
                    if step.arbitrary || !same_mod(&f.tables, f.k, &step.sigma, &f.g) {
                        r.fail(format!("{}: backward step {j} off the planted class", f.name));
                    }
                }
            }
            Err(e) => r.fail(format!("{}: backward failed: {e}", f.name)),
        }
    }
    r
}

pub fn standard_functionals() -> Vec<StringFunctional> {
    vec![
        StringFunctional::Proj { k: 1 },
        StringFunctional::Const(0),
        StringFunctional::Coord { j: 0 },
        StringFunctional::Diverge,
    ]
}

pub struct SimOutcome {
    pub report: Report,
    pub trace_export: String,
    pub hard_violations: usize,
    pub warnings: usize,
}

/// The checked construction run on the two-element-lattice presentation:
/// zero hard invariant violations, strictly increasing root lengths along
/// the true-path approximation, and stabilized low coordinates by the final
/// quarter of the trace.
pub fn simulator_soundness(stages: usize, seed: u64) -> SimOutcome {
    let mut r = Report::default();
    let lat = catalog::two_chain();
    let config = SimConfig { stages, checked: true, seed, ..Default::default() };
    let ctx = SimContext::for_constant_sequence(
        &lat,
        8,
        standard_functionals(),
        Sigma2Oracle::AlwaysCorrect,
        config,
    )
    .expect("context builds");
    let schedule = RequirementSchedule::seeded(seed, 64, 4, &lat);
    let simod = sim::run_construction(&ctx, schedule).expect("run completes");
    let hard = sim::invariants::hard_violations(&simod.violations).len();
    let warnings = simod.violations.len() - hard;
    r.checked += 1;
    if hard > 0 {
        let first = sim::invariants::hard_violations(&simod.violations)[0].to_string();
        r.fail(format!("{hard} hard invariant violations (first: {first})"));
    }
    let g = sim::extract_g(&simod.trace);
    // Roots never shrink along the path, and the Phase-1-origin nodes
    // (differentiating outcomes living as re-rooted subtrees, rooted
    // lattice-transition trees) strictly increase.
    let all: Vec<usize> = g.root_lengths.iter().map(|(_, _, l)| *l).collect();
    let p1: Vec<usize> = g
        .root_lengths
        .iter()
        .filter(|(_, kind, _)| kind == "ext" || kind == "ltree" || kind == "diff")
        .map(|(_, _, l)| *l)
        .collect();
    r.checked += 1;
    if p1.len() < 3 {
        r.fail(format!("too few rooted strategy outcomes on the path: {}", p1.len()));
    } else if !p1.windows(2).all(|w| w[0] < w[1]) {
        r.fail(format!("root lengths along the path's strategy nodes not strictly increasing: {p1:?}"));
    } else if !all.windows(2).all(|w| w[0] <= w[1]) {
        r.fail(format!("root lengths decreased along the path: {all:?}"));
    }
    r.checked += 1;
    let quarter = stages - stages / 4;
    for x in 0..5.min(g.coords.len()) {
        if g.coords[x].1 > quarter {
            r.fail(format!("coordinate {x} changed at stage {} (> {quarter})", g.coords[x].1));
        }
    }
    if g.coords.len() < 5 {
        r.fail(format!("only {} coordinates defined on the limit path", g.coords.len()));
    }
    r.notes.push(format!(
        "path depth {}, {} coords, {} warnings",
        g.gamma_approx.last().map(|p| p.len()).unwrap_or(0),
        g.coords.len(),
        warnings
    ));
    SimOutcome {
        report: r,
        trace_export: sim::trace::export_trace(&simod.trace),
        hard_violations: hard,
        warnings,
    }
}

/// Bytewise determinism of every exporter: identical inputs must give
/// identical traces, DOT renderings, and table files.
pub fn determinism(stages: usize, seed: u64) -> Report {
    let mut r = Report::default();
    let run = |_: usize| simulator_soundness(stages, seed).trace_export;
    r.checked += 1;
    if run(0) != run(1) {
        r.fail("simulator traces differ between identical runs".into());
    }
    let dot = |_: usize| {
        pudlak_stage(&catalog::two_chain(), 1, Variant::Original, DEFAULT_VERTEX_BUDGET)
            .unwrap()
            .to_dot()
    };
    r.checked += 1;
    if dot(0) != dot(1) {
        r.fail("DOT exports differ".into());
    }
    let tbl = |_: usize| {
        let g = pudlak_stage(&catalog::m3(), 1, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap();
        crate::partition::format_table(&table_from_graph(&g).unwrap())
    };
    r.checked += 1;
    if tbl(0) != tbl(1) {
        r.fail("table exports differ".into());
    }
    r
}

/// Homomorphism-fixture closure: every homomorphism fixture passes the
/// adjoint property checks (used by `verify homogeneity`'s sibling command).
pub fn adjoint_fixtures() -> Report {
    let mut r = Report::default();
    for (phi, name) in catalog::hom_fixtures() {
        r.checked += 1;
        if let Err(e) = crate::lattice::galois_adjoint(&phi) {
            r.fail(format!("{name}: {e}"));
        }
    }
    r
}

/// Rebuild a staged graph with a different base color and require the same
/// soundness profile (the base color choice carries no weight).
pub fn base_color_irrelevance() -> Report {
    let mut r = Report::default();
    let m3 = catalog::m3();
    for base in m3.below_top() {
        let g = match crate::pudlak::pudlak_graph_from(&m3, base, 1, 1, DEFAULT_VERTEX_BUDGET) {
            Ok(g) => g,
            Err(e) => {
                r.fail(format!("base {base}: {e}"));
                continue;
            }
        };
        r.checked += 1;
        if verify_pudlak_conditions(&g, 10, 500_000).is_err() {
            r.fail(format!("base {base}: conditions fail"));
        }
        for a in m3.elements() {
            for b in m3.elements() {
                let ra = g.color_equivalence(a);
                let rb = g.color_equivalence(b);
                if g.color_equivalence(m3.join(a, b)) != ra.meet(&rb).unwrap() {
                    r.fail(format!("base {base}: join law fails"));
                }
            }
        }
    }
    r
}

/// Embedding fixtures with senders other than UslHomomorphism identity:
/// checks Con A membership of the principal endomorphism relation.
pub fn end_principal_membership() -> Report {
    let mut r = Report::default();
    for ops in [vec![], vec![vec![0usize, 0, 2]], vec![vec![1usize, 1, 1]]] {
        let alg = UnaryAlgebra::new(3, ops).unwrap();
        let table = con_table(&alg).unwrap();
        let ends = endomorphisms(&table).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                r.checked += 1;
                let rel = crate::partition::end_principal(3, &ends, a, b);
                if !table.rels().contains(&rel) {
                    r.fail(format!("End({a},{b}) not a table relation"));
                }
            }
        }
    }
    r
}

/// Identity-homomorphism embedding sanity, used by `verify embedding`.
pub fn embedding_identity() -> Report {
    let mut r = Report::default();
    let two = catalog::two_chain();
    let phi = UslHomomorphism::identity(&two);
    match embed_table(&phi, 1, DEFAULT_VERTEX_BUDGET) {
        Ok(emb) => {
            r.checked += 1;
            if let Err(e) = emb.verify_equivalence(&phi) {
                r.fail(e.to_string());
            }
        }
        Err(e) => r.fail(e.to_string()),
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_table_passes() {
        assert!(golden_table().ok());
    }

    #[test]
    fn small_malcev_sweep_passes() {
        let r = malcev_sweep(3);
        assert!(r.ok(), "{:?}", r.first_failure);
        assert!(r.checked > 400);
    }

    #[test]
    fn glb_and_extendibility_samples() {
        let r = glb_random(10, 41);
        assert!(r.ok(), "{:?}", r.first_failure);
        let r = extendibility_random(6, 42);
        assert!(r.ok(), "{:?}", r.first_failure);
    }

    #[test]
    fn computation_fixture_report() {
        let r = computation_fixtures();
        assert!(r.ok(), "{:?}", r.first_failure);
        assert_eq!(r.checked, 3);
    }

    #[test]
    fn misc_verifiers() {
        assert!(adjoint_fixtures().ok());
        assert!(base_color_irrelevance().ok());
        assert!(end_principal_membership().ok());
        assert!(embedding_identity().ok());
    }
}
