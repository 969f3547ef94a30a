//! Per-stage records of a construction run, the line-oriented export
//! format (versioned), and the limit-approximation report.

use std::fmt::Write as _;

use crate::tree::TreeMap;
use crate::util::fnv1a;

use super::Path;

#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub records: Vec<StageRecord>,
}

#[derive(Clone, Debug)]
pub struct StageRecord {
    pub stage: usize,
    pub gamma: Path,
    pub alpha: Vec<usize>,
    pub nodes: Vec<NodeRecord>,
    /// (δ, β, subcase) when a trigger resolved this stage.
    pub trigger: Option<(Path, Path, u8)>,
    pub cancellations: Vec<Path>,
}

#[derive(Clone, Debug)]
pub struct NodeRecord {
    pub path: Path,
    pub designation: String,
    pub state: Vec<u32>,
    pub transmitted: Vec<(Vec<usize>, u32)>,
    pub grew: bool,
    pub root_len: Option<usize>,
    pub tree_hash: u64,
}

pub fn tree_hash(tree: &TreeMap) -> u64 {
    let mut bytes: Vec<u8> = Vec::new();
    for (k, v) in tree.iter() {
        bytes.push(0xfe);
        for x in k {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
        bytes.push(0xff);
        for x in v {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    fnv1a(bytes)
}

pub fn path_str(p: &[u32]) -> String {
    if p.is_empty() {
        "e".into()
    } else {
        p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(".")
    }
}

pub fn string_str(s: &[usize]) -> String {
    if s.is_empty() {
        "-".into()
    } else {
        s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Line-delimited trace export, schema `trace v1`:
///
/// ```text
/// trace v1
/// stage <s> gamma <path> alpha <string>
/// node <path> <designation> state <state> tx <pairs|-> grew <0|1> root <len|-> hash <hex>
/// trigger delta <path> beta <path> subcase <n>
/// cancel <path>
/// ```
pub fn export_trace(trace: &Trace) -> String {
    let mut out = String::from("trace v1\n");
    for rec in &trace.records {
        let _ = writeln!(
            out,
            "stage {} gamma {} alpha {}",
            rec.stage,
            path_str(&rec.gamma),
            string_str(&rec.alpha)
        );
        for n in &rec.nodes {
            let tx = if n.transmitted.is_empty() {
                "-".to_string()
            } else {
                n.transmitted
                    .iter()
                    .map(|(s, i)| format!("({}:{})", string_str(s), i))
                    .collect::<Vec<_>>()
                    .join(";")
            };
            let state = if n.state.is_empty() {
                "-".to_string()
            } else {
                n.state.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(".")
            };
            let root = n.root_len.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "node {} {} state {} tx {} grew {} root {} hash {:016x}",
                path_str(&n.path),
                n.designation,
                state,
                tx,
                n.grew as u8,
                root,
                n.tree_hash
            );
        }
        if let Some((delta, beta, subcase)) = &rec.trigger {
            let _ = writeln!(
                out,
                "trigger delta {} beta {} subcase {}",
                path_str(delta),
                path_str(beta),
                subcase
            );
        }
        for c in &rec.cancellations {
            let _ = writeln!(out, "cancel {}", path_str(c));
        }
    }
    out
}

/// The limit approximation extracted from a trace.
#[derive(Clone, Debug)]
pub struct GReport {
    /// Final value and last-change stage per coordinate of α_s.
    pub coords: Vec<(usize, usize)>,
    /// The leftmost path visited after the final cancellation.
    pub gamma_approx: Vec<Path>,
    /// Root lengths of the nodes along the approximation, with their
    /// final designations.
    pub root_lengths: Vec<(Path, String, usize)>,
    /// Does every approximated-path root stay inside later α_t?
    pub containment_ok: bool,
}

/// For each coordinate x: the last value of α_s(x) with its last-change
/// stage; the true-path approximation as the leftmost path still visited in
/// the tail half of the records after the final cancellation (transient
/// early visits to dormant branches carry no weight), with designated root
/// lengths along it.
pub fn extract_g(trace: &Trace) -> GReport {
    let max_len = trace.records.iter().map(|r| r.alpha.len()).max().unwrap_or(0);
    let mut coords = Vec::new();
    for x in 0..max_len {
        let mut value = usize::MAX;
        let mut last_change = 0usize;
        for rec in &trace.records {
            let v = rec.alpha.get(x).copied();
            if let Some(v) = v {
                if v != value {
                    value = v;
                    last_change = rec.stage;
                }
            }
        }
        coords.push((value, last_change));
    }
    let last_cancel = trace
        .records
        .iter()
        .filter(|r| !r.cancellations.is_empty())
        .map(|r| r.stage)
        .max()
        .unwrap_or(0);
    let suffix: Vec<&StageRecord> =
        trace.records.iter().filter(|r| r.stage > last_cancel).collect();
    let tail_start = suffix.len() / 2;
    let suffix: Vec<&StageRecord> = suffix[tail_start..].to_vec();
    // Leftmost-visited path: extend digit by digit while visited.
    let mut gamma_approx: Vec<Path> = vec![Vec::new()];
    loop {
        let cur = gamma_approx.last().unwrap().clone();
        let mut next: Option<Path> = None;
        for digit in 0..16u32 {
            let mut cand = cur.clone();
            cand.push(digit);
            let visited = suffix
                .iter()
                .any(|r| r.gamma.len() >= cand.len() && r.gamma[..cand.len()] == cand[..]);
            if visited {
                next = Some(cand);
                break;
            }
        }
        match next {
            Some(p) => gamma_approx.push(p),
            None => break,
        }
    }
    let mut root_lengths = Vec::new();
    if let Some(last_rec) = trace.records.last() {
        for p in &gamma_approx {
            if let Some(n) = last_rec.nodes.iter().find(|n| &n.path == p) {
                if let Some(l) = n.root_len {
                    root_lengths.push((p.clone(), n.designation.clone(), l));
                }
            }
        }
    }
    // Containment: along the suffix, every recorded root on the
    // approximation is a prefix of the stage's α when α is long enough.
    let mut containment_ok = true;
    for rec in &suffix {
        for n in &rec.nodes {
            if !gamma_approx.contains(&n.path) || n.path.is_empty() {
                continue;
            }
            if let Some(l) = n.root_len {
                if l > 0 && rec.alpha.len() >= l && rec.gamma.len() >= n.path.len() {
                    // α_t must extend the root of every active approximated
                    // node below the current end.
                    if rec.gamma[..n.path.len()] == n.path[..] && rec.alpha.len() < l {
                        containment_ok = false;
                    }
                }
            }
        }
    }
    GReport { coords, gamma_approx, root_lengths, containment_ok }
}
