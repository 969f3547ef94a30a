//! Command-line front door: batch builders and verifiers over the library.
//!
//! Exit status is 0 exactly when every requested check reports zero
//! violations.

use std::collections::BTreeMap;
use std::process::ExitCode;

use initseg::catalog;
use initseg::io::{format_tree, load_lattice};
use initseg::lattice::format_lattice;
use initseg::partition::format_table;
use initseg::pudlak::{pudlak_stage, table_from_graph, verify_pudlak_conditions, Variant};
use initseg::sim::{self, RequirementSchedule, Sigma2Oracle, SimConfig, SimContext};
use initseg::verify;

const USAGE: &str = "\
initseg — staged lattice representations and priority-tree runs

USAGE:
  initseg lattice check <file|fixture>
  initseg pudlak build <file|fixture> --stage N [--variant original|modified]
                       [--budget N] [--dot PATH]
  initseg table show <file|fixture> --stage N
  initseg tree id --depth N           (dump a small identity tree)
  initseg verify <kind> [--seed N] [--count N] [--stages N]
        kinds: homogeneity embedding glb extend conditions computation
               simulator determinism all
  initseg sim run [--stages N] [--seed N] [--checked] [--out DIR]
  initseg catalog [name]

Common flags: --stage N --stages N --budget N --seed N --dot PATH --checked
              --format dot|text|records
Output directory defaults to `.` or $INITSEG_OUT.
";

struct Args {
    positional: Vec<String>,
    flags: BTreeMap<String, String>,
    switches: Vec<String>,
}

fn parse_args(argv: &[String]) -> Args {
    let mut positional = Vec::new();
    let mut flags = BTreeMap::new();
    let mut switches = Vec::new();
    let mut it = argv.iter().peekable();
    while let Some(a) = it.next() {
        if let Some(name) = a.strip_prefix("--") {
            match it.peek() {
                Some(v) if !v.starts_with("--") => {
                    flags.insert(name.to_string(), it.next().unwrap().clone());
                }
                _ => switches.push(name.to_string()),
            }
        } else {
            positional.push(a.clone());
        }
    }
    Args { positional, flags, switches }
}

impl Args {
    fn flag_usize(&self, name: &str, default: usize) -> usize {
        self.flags.get(name).and_then(|v| v.parse().ok()).unwrap_or(default)
    }

    fn flag_u64(&self, name: &str, default: u64) -> u64 {
        self.flags.get(name).and_then(|v| v.parse().ok()).unwrap_or(default)
    }

    fn has(&self, name: &str) -> bool {
        self.switches.iter().any(|s| s == name)
    }
}

fn out_dir(args: &Args) -> String {
    args.flags
        .get("out")
        .cloned()
        .or_else(|| std::env::var("INITSEG_OUT").ok())
        .unwrap_or_else(|| ".".into())
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("{USAGE}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    if argv.is_empty() {
        return fail("missing subcommand");
    }
    let args = parse_args(&argv[1..]);
    match argv[0].as_str() {
        "lattice" => cmd_lattice(&args),
        "pudlak" => cmd_pudlak(&args),
        "table" => cmd_table(&args),
        "tree" => cmd_tree(&args),
        "verify" => cmd_verify(&args),
        "sim" => cmd_sim(&args),
        "catalog" => cmd_catalog(&args),
        other => fail(&format!("unknown subcommand `{other}`")),
    }
}

fn cmd_lattice(args: &Args) -> ExitCode {
    if args.positional.first().map(String::as_str) != Some("check") {
        return fail("expected `lattice check <file|fixture>`");
    }
    let Some(spec) = args.positional.get(1) else {
        return fail("missing lattice file or fixture name");
    };
    match load_lattice(spec) {
        Ok(lat) => match lat.verify() {
            Ok(()) => {
                println!(
                    "ok: bounded lattice on {} elements (bottom {}, top {})",
                    lat.size(),
                    lat.bottom(),
                    lat.top()
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                println!("invalid: {e}");
                ExitCode::FAILURE
            }
        },
        Err(e) => {
            println!("invalid: {e}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_pudlak(args: &Args) -> ExitCode {
    if args.positional.first().map(String::as_str) != Some("build") {
        return fail("expected `pudlak build <file|fixture> --stage N`");
    }
    let Some(spec) = args.positional.get(1) else {
        return fail("missing lattice file or fixture name");
    };
    let lat = match load_lattice(spec) {
        Ok(l) => l,
        Err(e) => return fail(&e.to_string()),
    };
    let stage = args.flag_usize("stage", 1);
    let budget = args.flag_usize("budget", initseg::pudlak::DEFAULT_VERTEX_BUDGET);
    let variant = match args.flags.get("variant").map(String::as_str) {
        None | Some("original") => Variant::Original,
        Some("modified") => Variant::Modified,
        Some(v) => return fail(&format!("unknown variant `{v}`")),
    };
    let g = match pudlak_stage(&lat, stage, variant, budget) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("build failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!(
        "built stage {}: {} vertices, {} edges, {} pentagons",
        g.deepest_stage(),
        g.vertex_count(),
        g.edge_count(),
        g.pentagons().len()
    );
    if let Some(path) = args.flags.get("dot") {
        if let Err(e) = std::fs::write(path, g.to_dot()) {
            eprintln!("cannot write {path}: {e}");
            return ExitCode::FAILURE;
        }
        println!("wrote {path}");
    }
    match verify_pudlak_conditions(&g, 12, 2_000_000) {
        Ok(rep) => {
            println!(
                "conditions ok ({} pentagons, {} cycles checked{})",
                rep.pentagons_checked,
                rep.cycles_checked,
                if rep.cycle_budget_hit { ", cycle budget hit" } else { "" }
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("conditions: {e}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_table(args: &Args) -> ExitCode {
    if args.positional.first().map(String::as_str) != Some("show") {
        return fail("expected `table show <file|fixture> --stage N`");
    }
    let Some(spec) = args.positional.get(1) else {
        return fail("missing lattice file or fixture name");
    };
    let lat = match load_lattice(spec) {
        Ok(l) => l,
        Err(e) => return fail(&e.to_string()),
    };
    let stage = args.flag_usize("stage", 0);
    let budget = args.flag_usize("budget", initseg::pudlak::DEFAULT_VERTEX_BUDGET);
    let g = match pudlak_stage(&lat, stage, Variant::Original, budget) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("build failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    match table_from_graph(&g) {
        Ok(t) => {
            print!("{}", format_table(&t));
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("no table: {e}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_tree(args: &Args) -> ExitCode {
    if args.positional.first().map(String::as_str) != Some("id") {
        return fail("expected `tree id --depth N`");
    }
    let depth = args.flag_usize("depth", 2);
    let caps = initseg::tree::CappedCarriers { sizes: vec![2, 3] };
    let t = initseg::tree::TreeMap::identity(&caps, depth.min(6));
    print!("{}", format_tree(&t));
    ExitCode::SUCCESS
}

fn cmd_verify(args: &Args) -> ExitCode {
    let Some(kind) = args.positional.first() else {
        return fail("missing verify kind");
    };
    let seed = args.flag_u64("seed", 1);
    let count = args.flag_usize("count", 0);
    let stages = args.flag_usize("stages", 500);
    let mut reports: Vec<(String, bool)> = Vec::new();
    let mut run = |name: &str| -> bool {
        let (summary, ok) = match name {
            "homogeneity" => {
                let carrier = args.flag_usize("carrier", 4);
                let r = verify::malcev_sweep(carrier);
                (r.summary("homogeneity"), r.ok())
            }
            "embedding" => {
                let r = verify::embedding(1);
                let r2 = verify::embedding_identity();
                (format!("{}; {}", r.summary("embedding"), r2.summary("identity")), r.ok() && r2.ok())
            }
            "glb" => {
                let n = if count == 0 { 100 } else { count };
                let r = verify::glb_random(n, seed);
                (r.summary("glb"), r.ok())
            }
            "extend" => {
                let n = if count == 0 { 50 } else { count };
                let r = verify::extendibility_random(n, seed);
                (r.summary("extend"), r.ok())
            }
            "conditions" => {
                let r = verify::pudlak_soundness(2);
                let r2 = verify::stabilization(1);
                (
                    format!("{}; {}", r.summary("conditions"), r2.summary("stabilization")),
                    r.ok() && r2.ok(),
                )
            }
            "computation" => {
                let r = verify::computation_fixtures();
                (r.summary("computation"), r.ok())
            }
            "simulator" => {
                let out = verify::simulator_soundness(stages, seed);
                (out.report.summary("simulator"), out.report.ok())
            }
            "determinism" => {
                let r = verify::determinism(60, seed);
                (r.summary("determinism"), r.ok())
            }
            other => (format!("unknown verify kind `{other}`"), false),
        };
        println!("{summary}");
        reports.push((name.to_string(), ok));
        ok
    };
    let ok = if kind == "all" {
        let kinds = [
            "homogeneity",
            "embedding",
            "glb",
            "extend",
            "conditions",
            "computation",
            "simulator",
            "determinism",
        ];
        kinds.iter().map(|k| run(k)).fold(true, |a, b| a && b)
    } else {
        run(kind)
    };
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_sim(args: &Args) -> ExitCode {
    if args.positional.first().map(String::as_str) != Some("run") {
        return fail("expected `sim run [--stages N]`");
    }
    let stages = args.flag_usize("stages", 200);
    let seed = args.flag_u64("seed", 1);
    let checked = args.has("checked") || !args.flags.contains_key("unchecked");
    let lat = catalog::two_chain();
    let config = SimConfig { stages, checked, seed, ..Default::default() };
    let ctx = match SimContext::for_constant_sequence(
        &lat,
        8,
        verify::standard_functionals(),
        Sigma2Oracle::AlwaysCorrect,
        config,
    ) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("context: {e}");
            return ExitCode::FAILURE;
        }
    };
    let schedule = RequirementSchedule::seeded(seed, 64, 4, &lat);
    let simod = match sim::run_construction(&ctx, schedule) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("run failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let dir = out_dir(args);
    let trace_path = format!("{dir}/trace.txt");
    if let Err(e) = std::fs::write(&trace_path, sim::trace::export_trace(&simod.trace)) {
        eprintln!("cannot write {trace_path}: {e}");
        return ExitCode::FAILURE;
    }
    let hard = sim::invariants::hard_violations(&simod.violations);
    let report_path = format!("{dir}/invariants.txt");
    let mut report = String::new();
    for v in &simod.violations {
        report.push_str(&format!("{v}\n"));
    }
    if report.is_empty() {
        report.push_str("no violations\n");
    }
    if let Err(e) = std::fs::write(&report_path, report) {
        eprintln!("cannot write {report_path}: {e}");
        return ExitCode::FAILURE;
    }
    let g = sim::extract_g(&simod.trace);
    println!(
        "ran {stages} stages: {} nodes, path depth {}, {} limit coordinates",
        simod.nodes.len(),
        g.gamma_approx.last().map(|p| p.len()).unwrap_or(0),
        g.coords.len()
    );
    println!("wrote {trace_path} and {report_path}");
    if hard.is_empty() {
        println!("invariants: clean");
        ExitCode::SUCCESS
    } else {
        println!("invariants: {} hard violations (first: {})", hard.len(), hard[0]);
        ExitCode::FAILURE
    }
}

fn cmd_catalog(args: &Args) -> ExitCode {
    match args.positional.first() {
        None => {
            for name in catalog::fixture_names() {
                let lat = catalog::fixture_by_name(name).unwrap();
                println!("{name}: {} elements", lat.size());
            }
            ExitCode::SUCCESS
        }
        Some(name) => match catalog::fixture_by_name(name) {
            Some(lat) => {
                print!("{}", format_lattice(&lat));
                ExitCode::SUCCESS
            }
            None => fail(&format!("unknown fixture `{name}`")),
        },
    }
}
