//! Per-designation state machines: the initial tree, extension trees,
//! differentiating trees, splitting trees with the full interpolation
//! pipeline, and lattice-transition trees.
//!
//! "Transmit ⟨α,i⟩" always means: record the pair, set the state naming the
//! current step, and end the node's stage. Unbounded searches carry a
//! per-stage budget that grows with the stage number, so divergent outcomes
//! show up as stable transmissions.

use std::fmt;
use std::rc::Rc;

use crate::interp::{extendibility_interpolate, glb_interpolate, InterpError};
use crate::splitting::{find_e_splitting, Eval};
use crate::tree::{
    analyze_tree, ext_subtree, extend_type, is_focal, is_potential_focal, transfer, Carriers,
    FocalInfo, Parent, TreeMap,
};

use super::{pair_key, GrowthEvent, Node, Path, SimContext};

#[derive(Clone, Debug)]
pub enum StrategyError {
    Internal(String),
}

impl fmt::Display for StrategyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyError::Internal(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for StrategyError {}

#[derive(Clone, Debug)]
pub struct ExtState {
    pub source: Path,
    pub xi: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct DiffState {
    pub e: usize,
    pub a: usize,
    pub b: usize,
    pub s_star: usize,
    /// The distinguished length-1 domain pair ⟨p⟩, ⟨q⟩ with p ∼_b q, p ≁_a q.
    pub p: usize,
    pub q: usize,
    pub x: Option<usize>,
    pub delta: Option<Vec<usize>>,
    /// τ and its domain, fixed when Step 3 is first entered.
    pub tau: Option<(Vec<usize>, Vec<usize>)>,
    /// The convergent σ and its domain η.
    pub sigma: Option<(Vec<usize>, Vec<usize>)>,
}

impl DiffState {
    pub fn new(e: usize, a: usize, b: usize, s_star: usize) -> DiffState {
        DiffState { e, a, b, s_star, p: 0, q: 1, x: None, delta: None, tau: None, sigma: None }
    }
}

#[derive(Clone, Debug)]
pub struct SpState {
    pub e: usize,
    pub k: usize,
    pub beta: Vec<usize>,
    pub s_star: usize,
    pub alpha_star: Option<Vec<usize>>,
    pub alpha_prime: Option<Vec<usize>>,
    /// The type-2 scaffold holding the level under construction.
    pub tprime: Option<TreeMap>,
    /// Domain strings η⁰_c in the parent tree starting the new level.
    pub eta0: Vec<Vec<usize>>,
    /// Corresponding own-tree domains for the final assembly.
    pub own_dom: Vec<Vec<usize>>,
    /// Current η^u_c (parent domains) per candidate.
    pub eta_arr: Vec<Vec<usize>>,
    /// Index pairs (i_u, j_u) still to be split.
    pub pairs: Vec<(usize, usize)>,
    pub u: usize,
    /// Scratch for the current pair.
    pub hat_eta: Option<Vec<usize>>,
    pub b_mod: Option<usize>,
    pub m_elem: Option<usize>,
    pub split_x: Option<usize>,
    /// GLB interpolation arrays: domain suffixes ν^j_i above η̂*0.
    pub nu: Vec<Vec<usize>>,
    pub glb_j: usize,
    /// Extendibility chain scratch: σ_r^{(cur)} parent domains.
    pub sigma_chain: Vec<Vec<usize>>,
    pub ext_r: usize,
    /// The pending mod for a type-3 transmission (the b of Subcase 2).
    pub pending_b: Option<usize>,
}

impl SpState {
    pub fn new(e: usize, k: usize, beta: Vec<usize>, s_star: usize) -> SpState {
        SpState {
            e,
            k,
            beta,
            s_star,
            alpha_star: None,
            alpha_prime: None,
            tprime: None,
            eta0: Vec::new(),
            own_dom: Vec::new(),
            eta_arr: Vec::new(),
            pairs: Vec::new(),
            u: 0,
            hat_eta: None,
            b_mod: None,
            m_elem: None,
            split_x: None,
            nu: Vec::new(),
            glb_j: 0,
            sigma_chain: Vec::new(),
            ext_r: 0,
            pending_b: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LTreeState {
    /// The lattice level this tree transitions to.
    pub i: usize,
    pub s_star: usize,
    pub phase2: bool,
    /// Current level index j within the ramification.
    pub j: usize,
    pub alpha_star: Option<Vec<usize>>,
    pub alpha_prime: Option<Vec<usize>>,
    pub tprime: Option<TreeMap>,
}

impl LTreeState {
    pub fn new(i: usize, s_star: usize) -> LTreeState {
        LTreeState { i, s_star, phase2: false, j: 0, alpha_star: None, alpha_prime: None, tprime: None }
    }
}

/// Outcome of one node-stage: the transmission, whether the tree grew, and
/// the new state label.
struct StageEnd {
    transmit: Option<(Vec<usize>, u32)>,
    state: Vec<u32>,
}

fn end(node: &mut Node, se: StageEnd) {
    if let Some(pair) = se.transmit {
        node.transmitted.push(pair);
    }
    node.state = se.state;
}

/// Def 23: appropriateness of a received pair for a tree.
pub fn appropriate(tree: &TreeMap, received: &[(Vec<usize>, u32)], prev_received: &[(Vec<usize>, u32)]) -> bool {
    for (alpha, i) in received {
        if !tree.on_tree(alpha) {
            return false;
        }
        let ht = tree.height().unwrap_or(0);
        if *i == 0 && alpha.len() >= ht {
            return false;
        }
        let pre = tree.preimage(alpha);
        if *i == 1 {
            match pre {
                Some(p) if is_potential_focal(tree, p) && !is_focal(tree, p) => {}
                _ => return false,
            }
        }
        if *i >= 2 && !prev_received.contains(&(alpha.clone(), *i)) {
            match pre {
                Some(p) if is_potential_focal(tree, p) => {}
                _ => return false,
            }
        }
    }
    for (a1, _) in received {
        for (a2, _) in received {
            let cmp = (a1.len() <= a2.len() && a2[..a1.len()] == **a1)
                || (a2.len() <= a1.len() && a1[..a2.len()] == **a2);
            if !cmp {
                return false;
            }
        }
    }
    true
}

/// Def 25: the preferred pair is the least received pair with i ≤ 1.
pub fn preferred_pair(received: &[(Vec<usize>, u32)]) -> Option<(Vec<usize>, u32)> {
    received
        .iter()
        .filter(|(_, i)| *i <= 1)
        .min_by_key(|p| pair_key(p))
        .cloned()
}

/// Is α in the last plateau of the tree, with the tree at the root height?
fn special_module_ok(
    ctx: &SimContext,
    parent: &TreeMap,
    root_tree: &TreeMap,
    alpha_star: &[usize],
) -> bool {
    if parent.is_empty() {
        return false;
    }
    let analysis = analyze_tree(parent, &ctx.carriers);
    let ht = parent.height().unwrap_or(0);
    if ht != root_tree.height().unwrap_or(0) {
        return false;
    }
    let last = analysis.plateaus.last().copied().unwrap_or((0, ht));
    last.0 <= alpha_star.len() && alpha_star.len() <= ht
}

pub fn act(
    ctx: &SimContext,
    node: &mut Node,
    ancestors: &[Rc<TreeMap>],
    parent_growth: Option<&GrowthEvent>,
    root_growth: Option<&GrowthEvent>,
    stage: usize,
) -> Result<(), StrategyError> {
    node.preferred = preferred_pair(&node.received);
    let designation = node.designation.clone();
    match designation {
        super::Designation::Init => act_init(ctx, node, stage),
        super::Designation::Ext(_) => act_ext(node),
        super::Designation::Diff(st) => act_diff(ctx, node, st, ancestors, parent_growth, stage),
        super::Designation::Sp(st) => act_sp(ctx, node, st, ancestors, parent_growth, stage),
        super::Designation::LTree(st) => act_ltree(ctx, node, st, ancestors, parent_growth, root_growth, stage),
    }
}

/// Initial tree: respond to the highest-priority appropriate low request
/// within the identity tree of the current height; transmit nothing.
fn act_init(ctx: &SimContext, node: &mut Node, stage: usize) -> Result<(), StrategyError> {
    let pref = node.preferred.clone();
    if let Some((alpha, i)) = pref {
        let ok = appropriate(&node.tree, &[(alpha.clone(), i)], &[]);
        if ok {
            match extend_type(&node.tree, &Parent::Identity, &alpha, i as u8, stage, &ctx.carriers)
            {
                Ok(newt) => {
                    if newt.len() <= ctx.config.tree_budget {
                        node.tree = Rc::new(newt);
                        node.grew = true;
                        node.growth_log.push(GrowthEvent { stage, ty: i as u8, alpha });
                    }
                }
                Err(_) => {}
            }
        }
    }
    end(node, StageEnd { transmit: None, state: vec![0] });
    Ok(())
}

/// Ext trees transmit exactly what they receive; the tree itself is
/// re-derived from the source after the source acts.
fn act_ext(node: &mut Node) -> Result<(), StrategyError> {
    let fwd = node.received.clone();
    for pair in fwd {
        node.transmitted.push(pair);
    }
    node.state = Vec::new();
    Ok(())
}

/// Was the parent's last growth a type-`ty` extension for `alpha`, with the
/// parent back at the root height?
fn parent_grew(
    parent_growth: Option<&GrowthEvent>,
    ty: u8,
    alpha: &[usize],
    stage: usize,
    parent: &TreeMap,
    root: &TreeMap,
) -> bool {
    match parent_growth {
        Some(g) => {
            g.ty == ty
                && g.alpha == alpha
                && g.stage + 1 == stage
                && parent.height().unwrap_or(0) == root.height().unwrap_or(0)
        }
        None => false,
    }
}

fn act_diff(
    ctx: &SimContext,
    node: &mut Node,
    mut st: DiffState,
    ancestors: &[Rc<TreeMap>],
    parent_growth: Option<&GrowthEvent>,
    stage: usize,
) -> Result<(), StrategyError> {
    let parent = ancestors.last().cloned().unwrap_or_default();
    let root = ancestors.first().cloned().unwrap_or_default();
    let (parent, root): (&TreeMap, &TreeMap) = (&parent, &root);
    let budget = ctx.budget_at(stage);
    let phi = ctx.functional(st.e).clone();
    let mut state = node.state.clone();
    let mut fuel = 64;
    loop {
        fuel -= 1;
        if fuel == 0 {
            end(node, StageEnd { transmit: None, state });
            node.designation = super::Designation::Diff(st);
            return Ok(());
        }
        match state.first().copied().unwrap_or(0) {
            0 => {
                let root_ok = parent.get(&[] as &[usize]).is_some()
                    && parent.height() == root.height();
                if !root_ok {
                    end(node, StageEnd { transmit: None, state: vec![0] });
                    node.designation = super::Designation::Diff(st);
                    return Ok(());
                }
                let p_dom = vec![st.p];
                if parent.get(&p_dom).is_none() {
                    state = vec![1];
                } else {
                    state = vec![2];
                }
            }
            1 => {
                let alpha = parent.get(&[] as &[usize]).cloned().unwrap_or_default();
                if parent_grew(parent_growth, 1, &alpha, stage, &parent, &root) {
                    st.delta = parent.get(&[st.p][..]).cloned();
                    state = vec![3];
                } else {
                    end(node, StageEnd { transmit: Some((alpha, 1)), state: vec![1] });
                    node.designation = super::Designation::Diff(st);
                    return Ok(());
                }
            }
            2 => {
                let alpha_star = parent.get(&[] as &[usize]).cloned().unwrap_or_default();
                if !special_module_ok(ctx, &parent, &root, &alpha_star) {
                    end(node, StageEnd { transmit: Some((alpha_star, 0)), state: vec![2] });
                    node.designation = super::Designation::Diff(st);
                    return Ok(());
                }
                st.delta = parent.get(&[st.p][..]).cloned();
                state = vec![3];
            }
            3 => {
                let delta = match st.delta.clone().or_else(|| parent.get(&[st.p][..]).cloned()) {
                    Some(d) => d,
                    None => {
                        state = vec![0];
                        continue;
                    }
                };
                st.delta = Some(delta.clone());
                if st.tau.is_none() {
                    // Least potential focal image extending δ.
                    let info = FocalInfo::new(&parent);
                    let mut cands: Vec<(&Vec<usize>, &Vec<usize>)> = parent
                        .iter()
                        .filter(|(d, v)| {
                            v.len() >= delta.len()
                                && v[..delta.len()] == delta[..]
                                && info.is_potential(d)
                        })
                        .collect();
                    cands.sort_by_key(|(_, v)| (v.len(), (*v).clone()));
                    match cands.first() {
                        Some((d, v)) => st.tau = Some(((*v).clone(), (*d).clone())),
                        None => {
                            end(node, StageEnd { transmit: None, state: vec![3] });
                            node.designation = super::Designation::Diff(st);
                            return Ok(());
                        }
                    }
                }
                let (tau, tau_dom) = st.tau.clone().unwrap();
                if st.x.is_none() {
                    let pimg = parent.get(&[st.p][..]).cloned().unwrap_or_default();
                    let qimg = parent.get(&[st.q][..]).cloned().unwrap_or_default();
                    st.x = (0..pimg.len().min(qimg.len()))
                        .find(|&x| !ctx.tables.same(st.a, pimg[x], qimg[x]));
                }
                let x = match st.x {
                    Some(x) => x,
                    None => {
                        end(node, StageEnd { transmit: Some((tau, 2)), state: vec![3] });
                        node.designation = super::Designation::Diff(st);
                        return Ok(());
                    }
                };
                // Search Ext(parent, dom(τ)) for σ ⊇ τ with the projected
                // computation converging at x.
                let ext = ext_subtree(&parent, &tau_dom).unwrap_or_default();
                let mut found: Option<(Vec<usize>, Vec<usize>)> = None;
                let mut images: Vec<(&Vec<usize>, &Vec<usize>)> = ext.iter().collect();
                images.sort_by_key(|(_, v)| (v.len(), (*v).clone()));
                for (d, v) in images {
                    if v.len() < tau.len() || v[..tau.len()] != tau[..] {
                        continue;
                    }
                    let proj = crate::interp::project(&ctx.tables, st.b, v);
                    if let Eval::Conv(_) = phi.eval(&ctx.tables, &proj, x, budget) {
                        let mut full_dom = tau_dom.clone();
                        full_dom.extend_from_slice(d);
                        found = Some((v.clone(), full_dom));
                        break;
                    }
                }
                match found {
                    None => {
                        end(node, StageEnd { transmit: Some((tau, 2)), state: vec![3] });
                        node.designation = super::Designation::Diff(st);
                        return Ok(());
                    }
                    Some(sig) => {
                        st.sigma = Some(sig);
                        state = vec![4, 0];
                    }
                }
            }
            4 if state.get(1) == Some(&0) => {
                let alpha_star = parent.get(&[] as &[usize]).cloned().unwrap_or_default();
                if !special_module_ok(ctx, &parent, &root, &alpha_star) {
                    end(node, StageEnd { transmit: Some((alpha_star, 0)), state: vec![4, 0] });
                    node.designation = super::Designation::Diff(st);
                    return Ok(());
                }
                state = vec![4, 1];
            }
            4 => {
                let (sigma, eta) = st.sigma.clone().unwrap();
                let x = st.x.unwrap();
                let proj = crate::interp::project(&ctx.tables, st.b, &sigma);
                let z = match phi.eval(&ctx.tables, &proj, x, budget) {
                    Eval::Conv(z) => z,
                    Eval::Div { .. } => {
                        state = vec![3];
                        continue;
                    }
                };
                let pimg = parent.get(&[st.p][..]).cloned().unwrap_or_default();
                let qimg = parent.get(&[st.q][..]).cloned().unwrap_or_default();
                let r_is_p = ctx.tables.proj(st.a, pimg[x]) as u64 != z;
                debug_assert!(r_is_p || ctx.tables.proj(st.a, qimg[x]) as u64 != z);
                let lam = if r_is_p {
                    eta.clone()
                } else {
                    transfer(&[st.p], &[st.q], &eta).map_err(|e| StrategyError::Internal(e.to_string()))?
                };
                // First top-height image above λ.
                let ht = parent.height().unwrap_or(0);
                let mut cands: Vec<(&Vec<usize>, &Vec<usize>)> = parent
                    .iter()
                    .filter(|(d, v)| {
                        v.len() == ht && d.len() >= lam.len() && d[..lam.len()] == lam[..]
                    })
                    .collect();
                cands.sort_by_key(|(d, _)| (*d).clone());
                match cands.first() {
                    Some((xi, rho)) => {
                        node.tree = Rc::new(TreeMap::rooted((*rho).clone()));
                        node.grew = true;
                        node.growth_log.push(GrowthEvent { stage, ty: 4, alpha: (*rho).clone() });
                        let parent_path = node.path[..node.path.len() - 1].to_vec();
                        node.designation = super::Designation::Ext(ExtState {
                            source: parent_path,
                            xi: (*xi).clone(),
                        });
                        end(node, StageEnd { transmit: None, state: Vec::new() });
                        return Ok(());
                    }
                    None => {
                        end(node, StageEnd { transmit: None, state: vec![4, 1] });
                        node.designation = super::Designation::Diff(st);
                        return Ok(());
                    }
                }
            }
            _ => {
                end(node, StageEnd { transmit: None, state });
                node.designation = super::Designation::Diff(st);
                return Ok(());
            }
        }
    }
}

/// Define the splitting tree's root at its start stage when the parent
/// already presents it at the root height.
pub fn bootstrap_sp_root(ctx: &SimContext, node: &mut Node, ancestors: &[Rc<TreeMap>], stage: usize) {
    let st = match &node.designation {
        super::Designation::Sp(st) => st.clone(),
        _ => return,
    };
    let parent = ancestors.last().cloned().unwrap_or_default();
    let root = ancestors.first().cloned().unwrap_or_default();
    let (parent, root): (&TreeMap, &TreeMap) = (&parent, &root);
    let _ = ctx;
    if parent.on_tree(&st.beta) && st.beta.len() == root.height().unwrap_or(0) {
        node.tree = Rc::new(TreeMap::rooted(st.beta.clone()));
        node.grew = true;
        node.growth_log.push(GrowthEvent { stage, ty: 5, alpha: st.beta.clone() });
        node.state = vec![0, 1];
    }
}

/// The greatest lattice element m with u ∼_m v (maximal in the lattice
/// order; least index among incomparable maxima).
fn greatest_related(ctx: &SimContext, u: usize, v: usize) -> usize {
    let lat = ctx.tables.lattice().clone();
    let mut best = lat.bottom();
    for m in lat.elements() {
        if ctx.tables.same(m, u, v) && lat.leq(best, m) {
            best = m;
        }
    }
    // Among incomparable maxima, prefer the least index: scan again.
    for m in lat.elements() {
        if ctx.tables.same(m, u, v) && !lat.leq(m, best) {
            // incomparable maximum; keep the least index
            if m < best {
                best = m;
            }
        }
    }
    best
}

fn act_sp(
    ctx: &SimContext,
    node: &mut Node,
    mut st: SpState,
    ancestors: &[Rc<TreeMap>],
    parent_growth: Option<&GrowthEvent>,
    stage: usize,
) -> Result<(), StrategyError> {
    let parent = ancestors.last().cloned().unwrap_or_default();
    let root = ancestors.first().cloned().unwrap_or_default();
    let (parent, root): (&TreeMap, &TreeMap) = (&parent, &root);
    let budget = ctx.budget_at(stage);
    let phi = ctx.functional(st.e).clone();
    let mut state = node.state.clone();
    let mut fuel = 128;
    macro_rules! finish {
        ($tx:expr, $state:expr) => {{
            end(node, StageEnd { transmit: $tx, state: $state });
            node.designation = super::Designation::Sp(st);
            return Ok(());
        }};
    }
    loop {
        fuel -= 1;
        if fuel == 0 {
            finish!(None, state);
        }
        let step = state.first().copied().unwrap_or(0);
        match step {
            // Step 0, Substep 0: the root forms only at the start stage.
            0 if state.get(1).is_none() || node.tree.is_empty() => {
                if node.tree.is_empty() {
                    if stage == st.s_star
                        && parent.on_tree(&st.beta)
                        && st.beta.len() == root.height().unwrap_or(0)
                    {
                        node.tree = Rc::new(TreeMap::rooted(st.beta.clone()));
                        node.grew = true;
                        node.growth_log.push(GrowthEvent { stage, ty: 5, alpha: st.beta.clone() });
                        state = vec![0, 1];
                        continue;
                    }
                    finish!(None, vec![0]);
                }
                state = vec![0, 1];
            }
            // Step 0, Substep 1: express preference.
            0 => {
                let ok = appropriate(&node.tree, &node.received, &[]);
                if !ok || node.preferred.is_none() {
                    finish!(None, vec![0, 1]);
                }
                state = vec![1];
            }
            // Step 1: require the parent extension, then scaffold the level.
            1 => {
                let (alpha, istar) = node.preferred.clone().unwrap_or_default();
                let alpha_star = if istar == 1 {
                    alpha.clone()
                } else {
                    match crate::tree::shortening(&parent, &alpha) {
                        Some((_, img)) => img.clone(),
                        None => alpha.clone(),
                    }
                };
                st.alpha_star = Some(alpha_star.clone());
                if !parent_grew(parent_growth, istar as u8, &alpha_star, stage, &parent, &root) {
                    finish!(Some((alpha_star, istar)), vec![1]);
                }
                // Scaffold: a combine extension of the own tree inside the
                // parent, then the candidate level start.
                let tprime = if node.tree.len() == 1 {
                    (*node.tree).clone()
                } else {
                    extend_type(
                        &node.tree,
                        &Parent::Tree(&parent),
                        &alpha_star,
                        2,
                        node.tree.height().unwrap_or(0),
                        &ctx.carriers,
                    )
                    .unwrap_or_else(|_| (*node.tree).clone())
                };
                let alpha_prime = {
                    let info = FocalInfo::new(&parent);
                    let mut cands: Vec<(&Vec<usize>, &Vec<usize>)> = parent
                        .iter()
                        .filter(|(d, v)| {
                            v.len() >= alpha.len()
                                && v[..alpha.len()] == alpha[..]
                                && info.is_potential(d)
                                && !info.is_focal(d)
                        })
                        .collect();
                    cands.sort_by_key(|(_, v)| (v.len(), (*v).clone()));
                    cands.first().map(|(_, v)| (*v).clone())
                };
                st.alpha_prime = alpha_prime;
                // Terminals of T′ above α*, their parent domains, and all
                // S-children as the level start.
                let mut eta0: Vec<Vec<usize>> = Vec::new();
                let mut own_dom: Vec<Vec<usize>> = Vec::new();
                let terminals: Vec<Vec<usize>> =
                    tprime.terminals().into_iter().cloned().collect();
                for term in &terminals {
                    let timg = tprime.get(term).unwrap().clone();
                    if timg.len() < alpha_star.len() || timg[..alpha_star.len()] != alpha_star[..] {
                        continue;
                    }
                    let xi_plus = match parent.preimage(&timg) {
                        Some(p) => p.clone(),
                        None => continue,
                    };
                    for b in 0..ctx.carriers.carrier_size(xi_plus.len()) {
                        let mut d = xi_plus.clone();
                        d.push(b);
                        let mut od = term.clone();
                        od.push(b);
                        eta0.push(d);
                        own_dom.push(od);
                    }
                }
                if eta0.is_empty() {
                    finish!(None, vec![1]);
                }
                let mut pairs = Vec::new();
                for i in 0..eta0.len() {
                    for j in (i + 1)..eta0.len() {
                        let same = eta0[i]
                            .iter()
                            .zip(eta0[j].iter())
                            .all(|(&a, &b)| ctx.tables.same(st.k, a, b));
                        if !same {
                            pairs.push((i, j));
                        }
                    }
                }
                st.tprime = Some(tprime);
                st.eta0 = eta0.clone();
                st.own_dom = own_dom;
                st.eta_arr = eta0;
                st.pairs = pairs;
                st.u = 0;
                if st.pairs.is_empty() {
                    state = vec![90];
                } else {
                    state = vec![2, 0];
                }
            }
            // Step u+2 pipeline, encoded [2, substate...].
            2 => {
                let sub = state.get(1).copied().unwrap_or(0);
                let (iu, ju) = st.pairs[st.u];
                match sub {
                    // Substep 0: special module, then pick the top extension.
                    0 => {
                        let astar = st.alpha_star.clone().unwrap_or_default();
                        if !special_module_ok(ctx, &parent, &root, &astar) {
                            finish!(Some((astar, 0)), vec![2, 0]);
                        }
                        let ht = root.height().unwrap_or(0);
                        let beta_u = match parent.get(&st.eta_arr[iu]) {
                            Some(v) => v.clone(),
                            None => finish!(None, vec![2, 0]),
                        };
                        let mut cands: Vec<(&Vec<usize>, &Vec<usize>)> = parent
                            .iter()
                            .filter(|(_, v)| {
                                v.len() == ht
                                    && v.len() >= beta_u.len()
                                    && v[..beta_u.len()] == beta_u[..]
                            })
                            .collect();
                        cands.sort_by_key(|(d, _)| (*d).clone());
                        match cands.first() {
                            Some((d, _)) => {
                                st.hat_eta = Some((*d).clone());
                                state = vec![2, 1];
                            }
                            None => finish!(None, vec![2, 0]),
                        }
                    }
                    // Substep 1: ask for a fresh focal point above β̂.
                    1 => {
                        let hat = st.hat_eta.clone().unwrap();
                        let hat_img = parent.get(&hat).cloned().unwrap_or_default();
                        if parent_grew(parent_growth, 1, &hat_img, stage, &parent, &root) {
                            // Lift every candidate to the hat level.
                            let suffix = hat[st.eta_arr[iu].len()..].to_vec();
                            for c in 0..st.eta_arr.len() {
                                let mut d = st.eta_arr[c].clone();
                                d.extend_from_slice(&suffix);
                                st.eta_arr[c] = d;
                            }
                            state = vec![2, 2];
                        } else {
                            finish!(Some((hat_img, 1)), vec![2, 1]);
                        }
                    }
                    // Substep 2: search an e-splitting mod b on the Ext tree.
                    2 => {
                        let y = (0..st.eta_arr[iu].len().min(st.eta_arr[ju].len()))
                            .find(|&y| !ctx.tables.same(st.k, st.eta_arr[iu][y], st.eta_arr[ju][y]));
                        let y = match y {
                            Some(y) => y,
                            None => {
                                // The pair became equivalent: skip it.
                                state = vec![80];
                                continue;
                            }
                        };
                        let m = greatest_related(ctx, st.eta_arr[iu][y], st.eta_arr[ju][y]);
                        let b = ctx.tables.lattice().meet(m, st.k);
                        st.m_elem = Some(m);
                        st.b_mod = Some(b);
                        let mut base = st.hat_eta.clone().unwrap();
                        base.push(0);
                        let ext = match ext_subtree(&parent, &base) {
                            Ok(e) => e,
                            Err(_) => finish!(None, vec![2, 2]),
                        };
                        let ext_root = ext.get(&[] as &[usize]).cloned().unwrap_or_default();
                        match find_e_splitting(
                            &ctx.tables,
                            &phi,
                            &ext,
                            &ext_root,
                            Some(b),
                            ctx.config.x_range,
                            budget,
                        ) {
                            None => {
                                st.pending_b = Some(b);
                                let timg = parent.get(&base).cloned().unwrap_or_default();
                                finish!(Some((timg, 3)), vec![2, 2]);
                            }
                            Some(split) => {
                                st.split_x = Some(split.x);
                                // Domain suffixes of the splitting pair
                                // above η̂*0.
                                let d0 = parent.preimage(&split.sigma).cloned();
                                let d1 = parent.preimage(&split.tau).cloned();
                                match (d0, d1) {
                                    (Some(d0), Some(d1)) => {
                                        st.nu = vec![
                                            d0[base.len()..].to_vec(),
                                            d1[base.len()..].to_vec(),
                                        ];
                                        state = vec![2, 3];
                                    }
                                    _ => finish!(None, vec![2, 2]),
                                }
                            }
                        }
                    }
                    // Substep 3: special module, lift the pair to the top
                    // preserving ∼_b, then interpolate.
                    3 => {
                        let astar = st.alpha_star.clone().unwrap_or_default();
                        if !special_module_ok(ctx, &parent, &root, &astar) {
                            finish!(Some((astar, 0)), vec![2, 3]);
                        }
                        let mut base = st.hat_eta.clone().unwrap();
                        base.push(0);
                        let ht = root.height().unwrap_or(0);
                        // Common suffix lifting both to the top.
                        let l0 = base.len() + st.nu[0].len();
                        let l1 = base.len() + st.nu[1].len();
                        let need = parent
                            .iter()
                            .find(|(d, v)| {
                                v.len() == ht && d.len() >= l0.max(l1) && d[..base.len()] == base[..]
                            })
                            .map(|(d, _)| d.len())
                            .unwrap_or(l0.max(l1));
                        let mut lifted: Vec<Vec<usize>> = Vec::new();
                        for nu in &st.nu {
                            let mut cands: Vec<&Vec<usize>> = parent
                                .iter()
                                .filter(|(d, v)| {
                                    v.len() == ht
                                        && d.len() == need
                                        && d.len() >= base.len() + nu.len()
                                        && d[..base.len()] == base[..]
                                        && d[base.len()..base.len() + nu.len()] == nu[..]
                                })
                                .map(|(d, _)| d)
                                .collect();
                            cands.sort();
                            match cands.first() {
                                Some(d) => lifted.push(d[base.len()..].to_vec()),
                                None => finish!(None, vec![2, 3]),
                            }
                        }
                        // GLB interpolation mod (m, k) between the lifted
                        // suffixes; c = b = m∧k.
                        let (m, b) = (st.m_elem.unwrap(), st.b_mod.unwrap());
                        let chain = glb_interpolate(
                            &ctx.tables,
                            m,
                            st.k,
                            b,
                            &base,
                            &lifted[0],
                            &lifted[1],
                        );
                        match chain {
                            Ok(ch) => {
                                st.nu = ch.strings;
                                st.glb_j = 1;
                                state = vec![2, 4, 1, 0];
                            }
                            Err(InterpError::NoMeetInterpolants { .. })
                            | Err(InterpError::NotFound { .. }) => {
                                // Honest stage-budget failure: stall.
                                finish!(None, vec![2, 3]);
                            }
                            Err(e) => {
                                return Err(StrategyError::Internal(format!(
                                    "glb interpolation: {e}"
                                )))
                            }
                        }
                    }
                    // Substep 4, subsubstep j: force convergence along the
                    // interpolant chain.
                    4 => {
                        let j = state.get(2).copied().unwrap_or(1) as usize;
                        let subsub = state.get(3).copied().unwrap_or(0);
                        let w = st.nu.len() - 1;
                        let mut base = st.hat_eta.clone().unwrap();
                        base.push(0);
                        if subsub == 0 {
                            // Search for a convergent extension of ν^{j-1}_j.
                            let mut d = base.clone();
                            d.extend_from_slice(&st.nu[j.min(w)]);
                            let ext = match ext_subtree(&parent, &d) {
                                Ok(e) => e,
                                Err(_) => finish!(None, vec![2, 4, j as u32, 0]),
                            };
                            let x = st.split_x.unwrap_or(0);
                            let mut found: Option<Vec<usize>> = None;
                            let mut images: Vec<(&Vec<usize>, &Vec<usize>)> = ext.iter().collect();
                            images.sort_by_key(|(dd, _)| (dd.len(), (*dd).clone()));
                            for (dd, v) in images {
                                if let Eval::Conv(_) = phi.eval(&ctx.tables, v, x, budget) {
                                    found = Some(dd.clone());
                                    break;
                                }
                            }
                            match found {
                                None => {
                                    let timg = parent.get(&d).cloned().unwrap_or_default();
                                    finish!(Some((timg, 2)), vec![2, 4, j as u32, 0]);
                                }
                                Some(nu_ext) => {
                                    for i in 0..st.nu.len() {
                                        let mut e = st.nu[i].clone();
                                        e.extend_from_slice(&nu_ext);
                                        st.nu[i] = e;
                                    }
                                    state = vec![2, 4, j as u32, 1];
                                }
                            }
                        } else {
                            // Lift everything back to the top, advance j.
                            let astar = st.alpha_star.clone().unwrap_or_default();
                            if !special_module_ok(ctx, &parent, &root, &astar) {
                                finish!(Some((astar, 0)), vec![2, 4, j as u32, 1]);
                            }
                            let ht = root.height().unwrap_or(0);
                            let mut dj = base.clone();
                            dj.extend_from_slice(&st.nu[j.min(w)]);
                            let mut ext_suffix: Option<Vec<usize>> = None;
                            let mut cands: Vec<&Vec<usize>> = parent
                                .iter()
                                .filter(|(d, v)| {
                                    v.len() == ht && d.len() >= dj.len() && d[..dj.len()] == dj[..]
                                })
                                .map(|(d, _)| d)
                                .collect();
                            cands.sort();
                            if let Some(d) = cands.first() {
                                ext_suffix = Some(d[dj.len()..].to_vec());
                            }
                            match ext_suffix {
                                None => finish!(None, vec![2, 4, j as u32, 1]),
                                Some(sfx) => {
                                    for i in 0..st.nu.len() {
                                        let mut e = st.nu[i].clone();
                                        e.extend_from_slice(&sfx);
                                        st.nu[i] = e;
                                    }
                                    if j < w.saturating_sub(1) {
                                        state = vec![2, 4, (j + 1) as u32, 0];
                                    } else {
                                        // Find the least adjacent e-splitting.
                                        let x = st.split_x.unwrap_or(0);
                                        let mut split_at: Option<usize> = None;
                                        for i in 0..w {
                                            let mut a = base.clone();
                                            a.extend_from_slice(&st.nu[i]);
                                            let mut b2 = base.clone();
                                            b2.extend_from_slice(&st.nu[i + 1]);
                                            let va = parent.get(&a).cloned().unwrap_or_default();
                                            let vb = parent.get(&b2).cloned().unwrap_or_default();
                                            if let (Eval::Conv(z1), Eval::Conv(z2)) = (
                                                phi.eval(&ctx.tables, &va, x, budget),
                                                phi.eval(&ctx.tables, &vb, x, budget),
                                            ) {
                                                if z1 != z2 {
                                                    split_at = Some(i);
                                                    break;
                                                }
                                            }
                                        }
                                        match split_at {
                                            None => finish!(None, vec![2, 4, j as u32, 1]),
                                            Some(i) if i % 2 == 1 => {
                                                // Splitting mod k exists on
                                                // the tree: terminate.
                                                state = vec![99];
                                            }
                                            Some(i) => {
                                                st.nu = vec![st.nu[i].clone(), st.nu[i + 1].clone()];
                                                st.ext_r = 1;
                                                st.sigma_chain = Vec::new();
                                                state = vec![2, 5, 0, 0];
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                    // Substep 5: extendibility interpolation and the
                    // convergence-forcing subsubsteps.
                    5 => {
                        let phase = state.get(2).copied().unwrap_or(0);
                        let mut base = st.hat_eta.clone().unwrap();
                        base.push(0);
                        if phase == 0 {
                            // Build the extendibility chain for the mod-m pair.
                            let lam0 = st.nu[0].clone();
                            let lam1 = st.nu[1].clone();
                            let eta_i = st.eta_arr[iu].clone();
                            let eta_j = st.eta_arr[ju].clone();
                            let y = (0..eta_i.len().min(eta_j.len()))
                                .find(|&y| eta_i[y] != eta_j[y])
                                .unwrap_or(0);
                            let (uu, vv) = (eta_i[y], eta_j[y]);
                            let mstage = y.min(ctx.tables.deepest_stage());
                            match extendibility_interpolate(
                                &ctx.tables,
                                mstage,
                                uu,
                                vv,
                                &lam0,
                                &lam1,
                                50_000,
                            ) {
                                Ok(res) => {
                                    // σ_r = alternating base followed by λ_r.
                                    let tt = res.chain.len() - 1;
                                    st.sigma_chain = (0..=tt)
                                        .map(|r| {
                                            let head =
                                                if r % 2 == 0 { &st.eta_arr[iu] } else { &st.eta_arr[ju] };
                                            let mut d = head.clone();
                                            d.extend_from_slice(&res.chain[r]);
                                            d
                                        })
                                        .collect();
                                    st.ext_r = 1;
                                    state = vec![2, 5, 1, 0];
                                }
                                Err(InterpError::NoHomogeneityInterpolants { .. }) => {
                                    finish!(None, vec![2, 5, 0, 0]);
                                }
                                Err(e) => {
                                    return Err(StrategyError::Internal(format!(
                                        "extendibility: {e}"
                                    )))
                                }
                            }
                        } else {
                            // Convergence forcing along the chain; then the
                            // final pick.
                            let r = st.ext_r;
                            if r < st.sigma_chain.len() {
                                let x = st.split_x.unwrap_or(0);
                                let dom_r = st.sigma_chain[r].clone();
                                // The chain strings need not be on the tree;
                                // force convergence on extensions when they
                                // are, else accept projection-convergence.
                                let conv = match parent.get(&dom_r) {
                                    Some(v) => {
                                        matches!(phi.eval(&ctx.tables, v, x, budget), Eval::Conv(_))
                                    }
                                    None => true,
                                };
                                if conv {
                                    st.ext_r = r + 1;
                                    state = vec![2, 5, 1, st.ext_r as u32];
                                    continue;
                                }
                                let img = parent.get(&dom_r).cloned().unwrap_or_default();
                                finish!(Some((img, 2)), vec![2, 5, 1, r as u32]);
                            } else {
                                // Final assembly for this pair: candidates
                                // advance by the winning suffix.
                                let win = st.nu[0].clone();
                                let hat_suffix =
                                    st.hat_eta.clone().unwrap()[st.eta_arr[iu].len()..].to_vec();
                                let _ = hat_suffix;
                                for c in 0..st.eta_arr.len() {
                                    let mut d = st.eta_arr[c].clone();
                                    d.push(0);
                                    d.extend_from_slice(&win);
                                    st.eta_arr[c] = d;
                                }
                                state = vec![80];
                            }
                        }
                    }
                    _ => finish!(None, state),
                }
            }
            // Pair completed: next pair or assembly.
            80 => {
                st.u += 1;
                if st.u < st.pairs.len() {
                    st.hat_eta = None;
                    st.b_mod = None;
                    st.m_elem = None;
                    st.split_x = None;
                    st.nu.clear();
                    state = vec![2, 0];
                } else {
                    state = vec![90];
                }
            }
            // Assemble the new level into the own tree.
            90 => {
                let tprime = st.tprime.clone().unwrap_or_else(|| (*node.tree).clone());
                let mut newt = tprime.clone();
                let mut ok = true;
                for (c, od) in st.own_dom.iter().enumerate() {
                    match parent.get(&st.eta_arr[c]) {
                        Some(img) => newt.insert(od.clone(), img.clone()),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok && newt.len() <= ctx.config.tree_budget {
                    let (alpha, istar) = node.preferred.clone().unwrap_or_default();
                    node.tree = Rc::new(newt);
                    node.grew = true;
                    node.growth_log.push(GrowthEvent {
                        stage,
                        ty: istar as u8,
                        alpha: st.alpha_star.clone().unwrap_or(alpha),
                    });
                }
                st.tprime = None;
                st.pairs.clear();
                st.eta0.clear();
                st.own_dom.clear();
                st.eta_arr.clear();
                st.u = 0;
                finish!(None, vec![0, 1]);
            }
            // Terminated: a splitting mod k appeared on the tree.
            99 => {
                finish!(None, vec![99]);
            }
            _ => finish!(None, state),
        }
    }
}

fn act_ltree(
    ctx: &SimContext,
    node: &mut Node,
    mut st: LTreeState,
    ancestors: &[Rc<TreeMap>],
    parent_growth: Option<&GrowthEvent>,
    _root_growth: Option<&GrowthEvent>,
    stage: usize,
) -> Result<(), StrategyError> {
    let parent = ancestors.last().cloned().unwrap_or_default();
    let root = ancestors.first().cloned().unwrap_or_default();
    let (parent, root): (&TreeMap, &TreeMap) = (&parent, &root);
    let mut state = node.state.clone();
    let m_fn = ctx.m_fns.get(st.i).cloned().unwrap_or_else(|| (0..64).collect());
    let mut fuel = 64;
    macro_rules! finish {
        ($tx:expr, $state:expr) => {{
            end(node, StageEnd { transmit: $tx, state: $state });
            node.designation = super::Designation::LTree(st);
            return Ok(());
        }};
    }
    loop {
        fuel -= 1;
        if fuel == 0 {
            finish!(None, state);
        }
        if !st.phase2 {
            match state.first().copied().unwrap_or(0) {
                // Phase 1, Step 0.
                0 => {
                    let root_ok = parent.get(&[] as &[usize]).is_some()
                        && parent.height() == root.height();
                    if !root_ok {
                        node.tree = Rc::new(TreeMap::empty());
                        finish!(None, vec![0]);
                    }
                    state = vec![1];
                }
                // Phase 1, Step 1: designate a new focal point below.
                1 => {
                    let alpha = parent.get(&[] as &[usize]).cloned().unwrap_or_default();
                    if parent_grew(parent_growth, 1, &alpha, stage, &parent, &root) {
                        state = vec![2, 0];
                    } else {
                        node.tree = Rc::new(TreeMap::empty());
                        finish!(Some((alpha, 1)), vec![1]);
                    }
                }
                // Phase 1, Step 2, substep j: deepen until m_i(0).
                2 => {
                    let j = state.get(1).copied().unwrap_or(0);
                    let proot = parent.get(&[] as &[usize]).cloned().unwrap_or_default();
                    if !special_module_ok(ctx, &parent, &root, &proot) {
                        finish!(Some((proot, 0)), vec![2, j]);
                    }
                    let d = parent.max_dom_len();
                    if d < m_fn.first().copied().unwrap_or(0) {
                        finish!(None, vec![2, j + 1]);
                    }
                    // Enter Phase 2: root at a depth-d node.
                    let mut cands: Vec<(&Vec<usize>, &Vec<usize>)> = parent
                        .iter()
                        .filter(|(dd, _)| dd.len() == d)
                        .collect();
                    cands.sort_by_key(|(dd, _)| (*dd).clone());
                    if let Some((_, v)) = cands.first() {
                        node.tree = Rc::new(TreeMap::rooted((*v).clone()));
                        node.grew = true;
                        node.growth_log.push(GrowthEvent { stage, ty: 5, alpha: (*v).clone() });
                        st.phase2 = true;
                        st.j = 1;
                        state = vec![0, 1];
                    } else {
                        finish!(None, vec![2, j]);
                    }
                }
                _ => finish!(None, state),
            }
        } else {
            match state.first().copied().unwrap_or(0) {
                // Phase 2, Step 0, Substep 1: preference gate.
                0 => {
                    let ok = appropriate(&node.tree, &node.received, &[]);
                    if !ok || node.preferred.is_none() {
                        finish!(None, vec![0, 1]);
                    }
                    state = vec![1];
                }
                // Phase 2, Step 1: require the parent extension.
                1 => {
                    let (alpha, istar) = node.preferred.clone().unwrap_or_default();
                    let alpha_star = if istar == 1 {
                        alpha.clone()
                    } else {
                        match crate::tree::shortening(&parent, &alpha) {
                            Some((_, img)) => img.clone(),
                            None => alpha.clone(),
                        }
                    };
                    st.alpha_star = Some(alpha_star.clone());
                    if !parent_grew(parent_growth, istar as u8, &alpha_star, stage, &parent, &root) {
                        finish!(Some((alpha_star, istar)), vec![1]);
                    }
                    let alpha_prime = {
                        let info = FocalInfo::new(&parent);
                        let mut cands: Vec<(&Vec<usize>, &Vec<usize>)> = parent
                            .iter()
                            .filter(|(d, v)| {
                                v.len() >= alpha.len()
                                    && v[..alpha.len()] == alpha[..]
                                    && info.is_potential(d)
                                    && !info.is_focal(d)
                            })
                            .collect();
                        cands.sort_by_key(|(_, v)| (v.len(), (*v).clone()));
                        cands.first().map(|(_, v)| (*v).clone())
                    };
                    st.alpha_prime = alpha_prime;
                    state = vec![2];
                }
                // Phase 2, Step 2: the Σ⁰₂-outcome gate.
                2 => {
                    if ctx.sigma2.looks_correct(stage, st.i) {
                        state = vec![3, 0];
                    } else {
                        let ap = st
                            .alpha_prime
                            .clone()
                            .or_else(|| st.alpha_star.clone())
                            .unwrap_or_default();
                        finish!(Some((ap, 4)), vec![2]);
                    }
                }
                // Phase 2, Step 3: build one level with repetitions.
                3 => {
                    let astar = st.alpha_star.clone().unwrap_or_default();
                    if !special_module_ok(ctx, &parent, &root, &astar) {
                        finish!(Some((astar, 0)), vec![3, state.get(1).copied().unwrap_or(0)]);
                    }
                    let astar_dom = match parent.preimage(&astar) {
                        Some(d) => d.clone(),
                        None => finish!(None, vec![3, 0]),
                    };
                    let d = parent.max_dom_len().saturating_sub(astar_dom.len());
                    let need = m_fn
                        .get(st.j)
                        .copied()
                        .unwrap_or(st.j)
                        .saturating_sub(m_fn.get(st.j - 1).copied().unwrap_or(st.j - 1));
                    if d < need.max(1) {
                        let sub = state.get(1).copied().unwrap_or(0);
                        finish!(None, vec![3, sub + 1]);
                    }
                    // Extend the own tree: new level with a^n repetitions.
                    let scaffold = if node.tree.len() == 1 {
                        (*node.tree).clone()
                    } else {
                        extend_type(
                            &node.tree,
                            &Parent::Tree(&parent),
                            &astar,
                            2,
                            node.tree.height().unwrap_or(0),
                            &ctx.carriers,
                        )
                        .unwrap_or_else(|_| (*node.tree).clone())
                    };
                    let mut newt = scaffold.clone();
                    let n_rep = need.max(1);
                    let mut ok = true;
                    let terminals: Vec<Vec<usize>> =
                        scaffold.terminals().into_iter().cloned().collect();
                    for term in &terminals {
                        let timg = scaffold.get(term).unwrap().clone();
                        if timg.len() < astar.len() || timg[..astar.len()] != astar[..] {
                            continue;
                        }
                        let xi = match parent.preimage(&timg) {
                            Some(p) => p.clone(),
                            None => {
                                ok = false;
                                break;
                            }
                        };
                        for a in 0..ctx.carriers.carrier_size(term.len()) {
                            let mut fine = xi.clone();
                            for _ in 0..n_rep {
                                fine.push(a);
                            }
                            match parent.get(&fine) {
                                Some(img) => {
                                    let mut od = term.clone();
                                    od.push(a);
                                    newt.insert(od, img.clone());
                                }
                                None => {
                                    ok = false;
                                }
                            }
                        }
                    }
                    if ok && newt.len() > node.tree.len() && newt.len() <= ctx.config.tree_budget {
                        let (_, istar) = node.preferred.clone().unwrap_or_default();
                        node.tree = Rc::new(newt);
                        node.grew = true;
                        node.growth_log.push(GrowthEvent {
                            stage,
                            ty: istar as u8,
                            alpha: astar,
                        });
                        st.j += 1;
                        finish!(None, vec![0, 1]);
                    }
                    finish!(None, vec![3, 0]);
                }
                _ => finish!(None, state),
            }
        }
    }
}
