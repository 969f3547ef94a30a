//! Oracle functionals on table strings, e-splittings, weak e-splitting
//! trees, both directions of the computation procedure, and the signature
//! translation between a tree and its reshaped subtree.
//!
//! Divergence is approximated by use budgets: every negative verdict
//! carries the budget it was decided under.

use std::fmt;

use crate::interp::project;
use crate::pudlak::PudlakTables;
use crate::tree::{analyze_tree, signature, Carriers, TreeMap};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplitError {
    BudgetExhausted { budget: usize },
    NotAnLTree { detail: String },
    BadFixture(String),
}

impl fmt::Display for SplitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitError::BudgetExhausted { budget } => {
                write!(f, "search exhausted its budget ({budget})")
            }
            SplitError::NotAnLTree { detail } => write!(f, "not an L-tree: {detail}"),
            SplitError::BadFixture(msg) => write!(f, "bad fixture: {msg}"),
        }
    }
}

impl std::error::Error for SplitError {}

/// A monotone oracle functional: convergence depends only on a finite
/// oracle prefix, and the value is determined by that prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StringFunctional {
    Const(u64),
    Diverge,
    /// Read oracle coordinate j, whatever the input.
    Coord { j: usize },
    /// Read oracle coordinate x (the input itself).
    CoordAt,
    /// Read coordinate x through the table projection `^[k]`.
    Proj { k: usize },
    /// Finite monotone lookup table: (oracle prefix, input, value).
    Lookup(Vec<(Vec<usize>, usize, u64)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eval {
    Conv(u64),
    /// Divergent within the given use budget.
    Div { budget: usize },
}

impl Eval {
    pub fn value(self) -> Option<u64> {
        match self {
            Eval::Conv(v) => Some(v),
            Eval::Div { .. } => None,
        }
    }
}

impl StringFunctional {
    /// Validate a Lookup table for monotone consistency.
    pub fn lookup(entries: Vec<(Vec<usize>, usize, u64)>) -> Result<Self, SplitError> {
        for (i, (p1, x1, v1)) in entries.iter().enumerate() {
            for (p2, x2, v2) in entries.iter().skip(i + 1) {
                if x1 == x2 && v1 != v2 {
                    let comparable = (p1.len() <= p2.len() && p2[..p1.len()] == **p1)
                        || (p2.len() <= p1.len() && p1[..p2.len()] == **p2);
                    if comparable {
                        return Err(SplitError::BadFixture(format!(
                            "conflicting lookup entries at input {x1}"
                        )));
                    }
                }
            }
        }
        Ok(StringFunctional::Lookup(entries))
    }

    /// Evaluate on an oracle string with a use budget: the computation may
    /// inspect at most `budget` oracle coordinates.
    pub fn eval(&self, t: &PudlakTables, sigma: &[usize], x: usize, budget: usize) -> Eval {
        let avail = sigma.len().min(budget);
        match self {
            StringFunctional::Const(v) => Eval::Conv(*v),
            StringFunctional::Diverge => Eval::Div { budget },
            StringFunctional::Coord { j } => {
                if *j < avail {
                    Eval::Conv(sigma[*j] as u64)
                } else {
                    Eval::Div { budget }
                }
            }
            StringFunctional::CoordAt => {
                if x < avail {
                    Eval::Conv(sigma[x] as u64)
                } else {
                    Eval::Div { budget }
                }
            }
            StringFunctional::Proj { k } => {
                if x < avail {
                    Eval::Conv(t.proj(*k, sigma[x]) as u64)
                } else {
                    Eval::Div { budget }
                }
            }
            StringFunctional::Lookup(entries) => {
                for (prefix, x0, v) in entries {
                    if *x0 == x && prefix.len() <= avail && sigma[..prefix.len()] == **prefix {
                        return Eval::Conv(*v);
                    }
                }
                Eval::Div { budget }
            }
        }
    }
}

/// σ ∼_a τ on the common length (pointwise table relation).
pub fn same_mod(t: &PudlakTables, a: usize, sigma: &[usize], tau: &[usize]) -> bool {
    let n = sigma.len().min(tau.len());
    sigma[..n].iter().zip(tau[..n].iter()).all(|(&p, &q)| t.same(a, p, q))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splitting {
    pub sigma: Vec<usize>,
    pub tau: Vec<usize>,
    pub x: usize,
}

/// Search the finite extent of a tree for an e-splitting of ρ (mod a, when
/// given): σ,τ ⊃ ρ on T with Φ^σ(x)↓ ≠ Φ^τ(x)↓. Absence is a value, not an
/// error; the search is exhaustive within the budgets.
pub fn find_e_splitting(
    t: &PudlakTables,
    phi: &StringFunctional,
    tree: &TreeMap,
    rho: &[usize],
    mod_a: Option<usize>,
    x_range: usize,
    use_budget: usize,
) -> Option<Splitting> {
    let mut exts: Vec<&Vec<usize>> = tree
        .images()
        .filter(|v| v.len() > rho.len() && v[..rho.len()] == *rho)
        .collect();
    exts.sort_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
    for (i, sigma) in exts.iter().enumerate() {
        for tau in exts.iter().skip(i + 1) {
            if let Some(a) = mod_a {
                if !same_mod(t, a, sigma, tau) {
                    continue;
                }
            }
            for x in 0..x_range {
                let ev1 = phi.eval(t, sigma, x, use_budget);
                let ev2 = phi.eval(t, tau, x, use_budget);
                if let (Eval::Conv(v1), Eval::Conv(v2)) = (ev1, ev2) {
                    if v1 != v2 {
                        return Some(Splitting {
                            sigma: (*sigma).clone(),
                            tau: (*tau).clone(),
                            x,
                        });
                    }
                }
            }
        }
    }
    None
}

/// Level i of T is an e-splitting level for k if every pair of domain
/// strings of length i+1 that are ∼_k-inequivalent maps to an e-splitting
/// image pair.
pub fn is_e_splitting_level(
    t: &PudlakTables,
    phi: &StringFunctional,
    tree: &TreeMap,
    level: usize,
    k: usize,
    x_range: usize,
    use_budget: usize,
) -> bool {
    let doms: Vec<(&Vec<usize>, &Vec<usize>)> =
        tree.iter().filter(|(d, _)| d.len() == level + 1).collect();
    for (i, (xi, txi)) in doms.iter().enumerate() {
        for (eta, teta) in doms.iter().skip(i + 1) {
            if same_mod(t, k, xi, eta) {
                continue;
            }
            let mut split = false;
            'search: for x in 0..x_range {
                if let (Eval::Conv(v1), Eval::Conv(v2)) = (
                    phi.eval(t, txi, x, use_budget),
                    phi.eval(t, teta, x, use_budget),
                ) {
                    if v1 != v2 {
                        split = true;
                        break 'search;
                    }
                }
            }
            if !split {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug)]
pub struct WeakSplittingReport {
    pub no_splittings_mod_k: bool,
    pub splitting_witness: Option<Splitting>,
    pub levels_ok: bool,
    /// (stage index, level) of a plateau-final level that fails to split.
    pub level_witness: Option<(usize, usize)>,
    pub x_range: usize,
    pub use_budget: usize,
}

impl WeakSplittingReport {
    pub fn passes(&self) -> bool {
        self.no_splittings_mod_k && self.levels_ok
    }
}

/// Check the weak e-splitting property for k over an increasing stage
/// sequence: (1) no e-splittings mod k anywhere on the final tree, and
/// (2) the last level of every plateau of each stage e-splits every
/// ∼_k-inequivalent pair.
pub fn check_weak_e_splitting(
    t: &PudlakTables,
    phi: &StringFunctional,
    stages: &[TreeMap],
    k: usize,
    carriers: &dyn Carriers,
    x_range: usize,
    use_budget: usize,
) -> WeakSplittingReport {
    let mut report = WeakSplittingReport {
        no_splittings_mod_k: true,
        splitting_witness: None,
        levels_ok: true,
        level_witness: None,
        x_range,
        use_budget,
    };
    let final_tree = stages.last().cloned().unwrap_or_default();
    if let Some(root) = final_tree.root_image() {
        if let Some(split) =
            find_e_splitting(t, phi, &final_tree, &root.clone(), Some(k), x_range, use_budget)
        {
            report.no_splittings_mod_k = false;
            report.splitting_witness = Some(split);
        }
    }
    'stages: for (s, tree) in stages.iter().enumerate() {
        if tree.is_empty() {
            continue;
        }
        let analysis = analyze_tree(tree, carriers);
        for &(_, end) in &analysis.plateaus {
            // The level whose image interval ends at the plateau end.
            let mut lens: Vec<(usize, usize)> = tree
                .iter()
                .map(|(d, v)| (d.len(), v.len()))
                .collect();
            lens.sort_unstable();
            lens.dedup();
            let level = lens
                .iter()
                .find(|&&(_, img_len)| img_len == end)
                .map(|&(dom_len, _)| dom_len.saturating_sub(1));
            if let Some(level) = level {
                if !is_e_splitting_level(t, phi, tree, level, k, x_range, use_budget) {
                    report.levels_ok = false;
                    report.level_witness = Some((s, level));
                    break 'stages;
                }
            }
        }
    }
    report
}

/// First half of the computation procedure: recover Φ^g(x) from a prefix of
/// the signature g^⟨k⟩ by searching T for a ∼_k-matching convergent string.
pub fn computation_forward(
    t: &PudlakTables,
    phi: &StringFunctional,
    tree: &TreeMap,
    k: usize,
    g_k_prefix: &[usize],
    x: usize,
    use_budget: usize,
) -> Result<u64, SplitError> {
    let mut images: Vec<&Vec<usize>> = tree.images().collect();
    images.sort_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
    for sigma in images {
        if sigma.len() > g_k_prefix.len() {
            continue;
        }
        let matches = sigma
            .iter()
            .enumerate()
            .all(|(y, &v)| t.proj(k, v) == g_k_prefix[y]);
        if !matches {
            continue;
        }
        if let Eval::Conv(v) = phi.eval(t, sigma, x, use_budget) {
            return Ok(v);
        }
    }
    Err(SplitError::BudgetExhausted { budget: use_budget })
}

#[derive(Clone, Debug)]
pub struct BackwardStep {
    pub sigma: Vec<usize>,
    /// Survivor set was empty and the least candidate was chosen.
    pub arbitrary: bool,
}

#[derive(Clone, Debug)]
pub struct BackwardReport {
    pub steps: Vec<BackwardStep>,
}

/// Second half of the computation procedure: recover strings σ_j ∼_k g from
/// answers to Φ^g queries, by the elimination tournament over plateau-final
/// levels.
pub fn computation_backward(
    t: &PudlakTables,
    phi: &StringFunctional,
    stages: &[TreeMap],
    k: usize,
    phi_g: &dyn Fn(usize) -> Option<u64>,
    steps: usize,
    x_range: usize,
    use_budget: usize,
) -> Result<BackwardReport, SplitError> {
    let final_tree = stages.last().ok_or(SplitError::BadFixture("no stages".into()))?;
    let root = final_tree
        .root_image()
        .ok_or(SplitError::BadFixture("empty final tree".into()))?
        .clone();
    let mut report = BackwardReport { steps: vec![BackwardStep { sigma: root, arbitrary: false }] };
    for _j in 0..steps {
        let sigma_j = report.steps.last().unwrap().sigma.clone();
        // Least stage and smallest e-splitting level with end above |σ_j|,
        // holding a ∼_k-match for σ_j.
        let mut found: Option<(usize, usize, usize)> = None; // (stage, level, v)
        'outer: for (s, tree) in stages.iter().enumerate() {
            if tree.is_empty() {
                continue;
            }
            let mut lens: Vec<(usize, usize)> =
                tree.iter().map(|(d, v)| (d.len(), v.len())).collect();
            lens.sort_unstable();
            lens.dedup();
            for &(dom_len, img_len) in &lens {
                if dom_len == 0 || img_len <= sigma_j.len() {
                    continue;
                }
                let level = dom_len - 1;
                if !is_e_splitting_level(t, phi, tree, level, k, x_range, use_budget) {
                    continue;
                }
                let has_match = tree
                    .images()
                    .any(|v| v.len() == img_len && same_mod(t, k, v, &sigma_j));
                if has_match {
                    found = Some((s, level, img_len));
                    break 'outer;
                }
            }
        }
        let (s, _level, v) = match found {
            Some(f) => f,
            None => return Ok(report),
        };
        let tree = &stages[s];
        let tau = tree
            .images()
            .find(|w| w.len() == v && same_mod(t, k, w, &sigma_j))
            .unwrap()
            .clone();
        // ρ: the T-string below τ at σ_j's length.
        let rho = tree
            .images()
            .filter(|w| w.len() <= sigma_j.len() && tau[..w.len()] == **w)
            .max_by_key(|w| w.len())
            .cloned()
            .unwrap_or_default();
        let mut candidates: Vec<Vec<usize>> = tree
            .images()
            .filter(|w| w.len() == v && w.len() >= rho.len() && w[..rho.len()] == *rho)
            .cloned()
            .collect();
        candidates.sort();
        let mut alive = vec![true; candidates.len()];
        for i in 0..candidates.len() {
            for j2 in (i + 1)..candidates.len() {
                if !alive[i] && !alive[j2] {
                    continue;
                }
                if same_mod(t, k, &candidates[i], &candidates[j2]) {
                    continue;
                }
                // The pair e-splits somewhere; use Φ^g to kill wrong ones.
                for x in 0..x_range {
                    let e1 = phi.eval(t, &candidates[i], x, use_budget);
                    let e2 = phi.eval(t, &candidates[j2], x, use_budget);
                    if let (Eval::Conv(v1), Eval::Conv(v2)) = (e1, e2) {
                        if v1 != v2 {
                            match phi_g(x) {
                                Some(gv) => {
                                    if v1 != gv {
                                        alive[i] = false;
                                    }
                                    if v2 != gv {
                                        alive[j2] = false;
                                    }
                                }
                                None => {}
                            }
                            break;
                        }
                    }
                }
            }
        }
        let (mu, arbitrary) = match candidates.iter().zip(&alive).find(|(_, &a)| a) {
            Some((mu, _)) => (mu.clone(), false),
            None => (candidates[0].clone(), true),
        };
        report.steps.push(BackwardStep { sigma: mu, arbitrary });
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Signature translation between a tree and its reshaped subtree.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct LSubtreeReport {
    /// Signature on the coarse (reshaped) tree.
    pub sig_coarse: Vec<usize>,
    /// Signature on the fine tree.
    pub sig_fine: Vec<usize>,
    /// Repetition count per coarse coordinate.
    pub repetitions: Vec<usize>,
    pub translation_ok: bool,
    pub projection_ok: bool,
}

/// Verify the reshaped-subtree discipline: every coarse edge ζ → ζ*a rides
/// a fine route ξ → ξ*aⁿ, the fine signature of a branch is the coarse one
/// with coordinates repeated per level, and the two projections agree
/// after that translation.
pub fn l_subtree_transfer(
    t: &PudlakTables,
    coarse: &TreeMap,
    fine: &TreeMap,
    g_prefix: &[usize],
    b: usize,
    phi_b: usize,
) -> Result<LSubtreeReport, SplitError> {
    // Shape: each coarse image must appear on the fine tree, and each
    // coarse child must be a fine a-power extension of its parent.
    for (zeta, image) in coarse.iter() {
        let xi = fine.preimage(image).ok_or_else(|| SplitError::NotAnLTree {
            detail: format!("coarse image for {zeta:?} is not on the fine tree"),
        })?;
        if zeta.is_empty() {
            continue;
        }
        let a = *zeta.last().unwrap();
        let parent_image = coarse.get(&zeta[..zeta.len() - 1]).unwrap();
        let parent_xi = fine.preimage(parent_image).ok_or_else(|| SplitError::NotAnLTree {
            detail: "coarse parent image missing from the fine tree".into(),
        })?;
        let suffix = &xi[parent_xi.len()..];
        if suffix.is_empty() || suffix.iter().any(|&s| s != a) {
            return Err(SplitError::NotAnLTree {
                detail: format!("coarse step {zeta:?} is not an a-power fine route"),
            });
        }
    }
    let sig_coarse = signature(coarse, g_prefix);
    let sig_fine = signature(fine, g_prefix);
    // Repetitions along the coarse signature branch.
    let mut repetitions = Vec::with_capacity(sig_coarse.len());
    for p in 0..sig_coarse.len() {
        let parent = coarse.get(&sig_coarse[..p]).unwrap();
        let child = coarse.get(&sig_coarse[..p + 1]).unwrap();
        let pxi = fine.preimage(parent).unwrap();
        let cxi = fine.preimage(child).unwrap();
        repetitions.push(cxi.len() - pxi.len());
    }
    let mut expanded: Vec<usize> = Vec::new();
    for (p, &a) in sig_coarse.iter().enumerate() {
        for _ in 0..repetitions[p] {
            expanded.push(a);
        }
    }
    let translation_ok = expanded == sig_fine[..expanded.len().min(sig_fine.len())]
        && expanded.len() == sig_fine.len();
    let proj_coarse_expanded: Vec<usize> = {
        let pc = project(t, phi_b, &sig_coarse);
        let mut out = Vec::new();
        for (p, &val) in pc.iter().enumerate() {
            for _ in 0..repetitions[p] {
                out.push(val);
            }
        }
        out
    };
    let proj_fine = project(t, b, &sig_fine);
    let projection_ok = proj_coarse_expanded == proj_fine;
    Ok(LSubtreeReport { sig_coarse, sig_fine, repetitions, translation_ok, projection_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::pudlak::{pudlak_stage, Variant, DEFAULT_VERTEX_BUDGET};
    use crate::tree::{extend_type, CappedCarriers, Parent};

    fn chain2_tables() -> PudlakTables {
        PudlakTables::new(
            pudlak_stage(&catalog::two_chain(), 1, Variant::Original, DEFAULT_VERTEX_BUDGET)
                .unwrap(),
        )
    }

    fn capped(t: &PudlakTables, depth: usize) -> CappedCarriers {
        CappedCarriers {
            sizes: (0..=depth.min(t.deepest_stage())).map(|j| t.stage_size(j)).collect(),
        }
    }

    /// Identity trees over the capped 2-chain system, as stages Id_1..Id_d.
    fn id_stages(t: &PudlakTables, depth: usize) -> Vec<TreeMap> {
        let c = capped(t, 1);
        (1..=depth).map(|d| TreeMap::identity(&c, d)).collect()
    }

    #[test]
    fn functional_monotonicity() {
        let t = chain2_tables();
        let phi = StringFunctional::Proj { k: 1 };
        let sigma = vec![0usize, 2, 3];
        for x in 0..3 {
            if let Eval::Conv(v) = phi.eval(&t, &sigma, x, 100) {
                let mut longer = sigma.clone();
                longer.push(4);
                assert_eq!(phi.eval(&t, &longer, x, 100), Eval::Conv(v));
            }
        }
        // Budget cuts convergence off.
        assert!(matches!(phi.eval(&t, &sigma, 2, 1), Eval::Div { .. }));
    }

    #[test]
    fn constant_functional_never_splits() {
        let t = chain2_tables();
        let phi = StringFunctional::Const(7);
        let c = capped(&t, 1);
        let id = TreeMap::identity(&c, 3);
        assert!(find_e_splitting(&t, &phi, &id, &[], None, 5, 100).is_none());
    }

    #[test]
    fn coordinate_reader_splits_identity_tree() {
        let t = chain2_tables();
        let phi = StringFunctional::Coord { j: 0 };
        let c = capped(&t, 1);
        let id = TreeMap::identity(&c, 2);
        let split = find_e_splitting(&t, &phi, &id, &[], None, 3, 100).unwrap();
        assert_eq!(split.x, 0);
        assert_ne!(split.sigma[0], split.tau[0]);
    }

    #[test]
    fn no_splittings_mod_top() {
        // ∼_top is the identity relation: mod-1 equivalent strings are
        // equal on their common length, so no functional can split them.
        let t = chain2_tables();
        let c = capped(&t, 1);
        let id = TreeMap::identity(&c, 3);
        for phi in [
            StringFunctional::Coord { j: 0 },
            StringFunctional::CoordAt,
            StringFunctional::Proj { k: 0 },
        ] {
            assert!(find_e_splitting(&t, &phi, &id, &[], Some(1), 4, 100).is_none());
        }
    }

    #[test]
    fn weak_splitting_on_projection_fixture() {
        let t = chain2_tables();
        let c = capped(&t, 1);
        let stages = id_stages(&t, 4);
        let phi = StringFunctional::Proj { k: 1 };
        let report = check_weak_e_splitting(&t, &phi, &stages, 1, &c, 6, 100);
        assert!(report.passes(), "{report:?}");
        // Single-node tree: vacuously weak e-splitting.
        let single = vec![TreeMap::rooted(vec![])];
        let report = check_weak_e_splitting(&t, &phi, &single, 1, &c, 6, 100);
        assert!(report.passes());
    }

    #[test]
    fn weak_splitting_detects_faults() {
        let t = chain2_tables();
        let c = capped(&t, 1);
        // A divergent functional cannot realize the splitting levels once
        // inequivalent strings exist.
        let stages = id_stages(&t, 2);
        let report =
            check_weak_e_splitting(&t, &StringFunctional::Diverge, &stages, 1, &c, 6, 100);
        assert!(!report.levels_ok);
        assert!(report.level_witness.is_some());
    }

    #[test]
    fn forward_matches_direct_evaluation() {
        let t = chain2_tables();
        let stages = id_stages(&t, 6);
        let final_tree = stages.last().unwrap();
        let phi = StringFunctional::Proj { k: 1 };
        // Planted branch of depth 6.
        let g: Vec<usize> = vec![0, 2, 3, 4, 1, 0];
        let g_proj = project(&t, 1, &g);
        for x in 0..6 {
            let direct = phi.eval(&t, &g, x, 100).value().unwrap();
            let via_sig =
                computation_forward(&t, &phi, final_tree, 1, &g_proj, x, 100).unwrap();
            assert_eq!(direct, via_sig, "at x={x}");
        }
        // Constant functional forwards to its constant.
        let c7 = StringFunctional::Const(7);
        assert_eq!(computation_forward(&t, &c7, final_tree, 0, &[], 3, 100).unwrap(), 7);
    }

    #[test]
    fn backward_recovers_planted_class() {
        let t = chain2_tables();
        let stages = id_stages(&t, 6);
        let phi = StringFunctional::Proj { k: 1 };
        let g: Vec<usize> = vec![0, 2, 3, 4, 1, 0];
        let phi_g = |x: usize| phi.eval(&t, &g, x, 100).value();
        let report = computation_backward(&t, &phi, &stages, 1, &phi_g, 6, 8, 100).unwrap();
        assert!(report.steps.len() >= 6);
        for (j, step) in report.steps.iter().enumerate() {
            assert!(!step.arbitrary, "step {j} fell back to an arbitrary pick");
            assert!(
                same_mod(&t, 1, &step.sigma, &g),
                "step {j}: {:?} is not ∼_1 g",
                step.sigma
            );
        }
        // Step 0 is the root image.
        assert_eq!(report.steps[0].sigma, Vec::<usize>::new());
    }

    #[test]
    fn backward_mod_bottom_is_trivial() {
        // k = 0: everything is ∼_0-equivalent; any branch qualifies.
        let t = chain2_tables();
        let stages = id_stages(&t, 3);
        let phi = StringFunctional::Const(1);
        let phi_g = |_x: usize| Some(1);
        let report = computation_backward(&t, &phi, &stages, 0, &phi_g, 3, 4, 100).unwrap();
        let g = vec![0usize, 0, 0];
        for step in &report.steps {
            assert!(same_mod(&t, 0, &step.sigma, &g));
        }
    }

    #[test]
    fn l_subtree_identity_case() {
        let t = chain2_tables();
        let c = capped(&t, 1);
        let id = TreeMap::identity(&c, 3);
        let g = vec![1usize, 2, 0];
        let report = l_subtree_transfer(&t, &id, &id, &g, 1, 1).unwrap();
        assert!(report.translation_ok);
        assert!(report.projection_ok);
        assert_eq!(report.repetitions, vec![1, 1, 1]);
    }

    #[test]
    fn l_subtree_two_level_fixture() {
        // Fine tree: identity of depth 4. Coarse tree: each level rides two
        // fine levels (a ↦ aa).
        let t = chain2_tables();
        let c = capped(&t, 1);
        let fine = TreeMap::identity(&c, 4);
        let mut coarse = TreeMap::rooted(vec![]);
        for a in 0..2 {
            coarse.insert(vec![a], vec![a, a]);
            for b in 0..2 {
                coarse.insert(vec![a, b], vec![a, a, b, b]);
            }
        }
        let g = vec![1usize, 1, 0, 0];
        let report = l_subtree_transfer(&t, &coarse, &fine, &g, 1, 1).unwrap();
        assert_eq!(report.sig_coarse, vec![1, 0]);
        assert_eq!(report.sig_fine, vec![1, 1, 0, 0]);
        assert_eq!(report.repetitions, vec![2, 2]);
        assert!(report.translation_ok);
        assert!(report.projection_ok);
        // A tree breaking the a-power discipline is rejected.
        let mut bad = TreeMap::rooted(vec![]);
        bad.insert(vec![0], vec![0, 1]);
        let err = l_subtree_transfer(&t, &bad, &fine, &g, 1, 1).unwrap_err();
        assert!(matches!(err, SplitError::NotAnLTree { .. }));
    }

    #[test]
    fn splitting_fixture_via_extensions() {
        // A non-identity weak e-splitting fixture built by the extension
        // machinery: root, then a tall extension, then deepening.
        let t = chain2_tables();
        let c = capped(&t, 1);
        let tr = TreeMap::rooted(vec![]);
        let tr = extend_type(&tr, &Parent::Identity, &[], 1, 1, &c).unwrap();
        let mut stages = vec![tr.clone()];
        let mut cur = tr;
        for h in 2..=6 {
            let top = cur
                .iter()
                .filter(|(d, _)| d.len() == cur.max_dom_len())
                .map(|(_, v)| v.clone())
                .next()
                .unwrap();
            cur = extend_type(&cur, &Parent::Identity, &top, 1, h, &c).unwrap();
            stages.push(cur.clone());
        }
        let phi = StringFunctional::Proj { k: 1 };
        let report = check_weak_e_splitting(&t, &phi, &stages, 1, &c, 8, 100);
        assert!(report.passes(), "{report:?}");
        // Forward/backward agree on a branch of the fixture.
        let g = stages
            .last()
            .unwrap()
            .images()
            .max_by_key(|v| v.len())
            .unwrap()
            .clone();
        let phi_g = |x: usize| phi.eval(&t, &g, x, 100).value();
        let back =
            computation_backward(&t, &phi, &stages, 1, &phi_g, 4, 8, 100).unwrap();
        for step in &back.steps {
            assert!(same_mod(&t, 1, &step.sigma, &g));
        }
    }
}
