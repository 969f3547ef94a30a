//! Staged colored-graph representations of finite lattices.
//!
//! A stage-0 graph is a single edge; each later stage attaches, to every
//! edge of color α, one or more α-cells (bundles of pentagons, one per pair
//! (α₁,α₂) with α₁∧α₂ ≤ α). Color-connectivity equivalences of the result
//! realize the dual of the lattice as a congruence lattice; this module
//! builds the stages, extracts the tables, and verifies the structural
//! conditions that extraction relies on at finite stages.

use std::collections::BTreeMap;
use std::fmt;

use crate::lattice::FiniteLattice;
use crate::partition::{LatticeTable, Partition};
use crate::util::UnionFind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphError {
    EdgeNotFound { edge: usize },
    BudgetExceeded { projected: usize, budget: usize },
    NotInjectiveAtStage { left: usize, right: usize },
    ConditionViolated { condition: u8, witness: String },
    NotAChainEdge { edge: usize },
    NotStable { detail: String },
    NotAPath { detail: String },
    Table(String),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::EdgeNotFound { edge } => write!(f, "edge {edge} not in graph"),
            GraphError::BudgetExceeded { projected, budget } => {
                write!(f, "projected {projected} vertices exceeds budget {budget}")
            }
            GraphError::NotInjectiveAtStage { left, right } => write!(
                f,
                "lattice elements {left} and {right} induce equal partitions at this stage (stage too small)"
            ),
            GraphError::ConditionViolated { condition, witness } => {
                write!(f, "condition ({condition}) violated: {witness}")
            }
            GraphError::NotAChainEdge { edge } => write!(f, "edge {edge} is not on a pentagon chain"),
            GraphError::NotStable { detail } => write!(f, "map is not stable: {detail}"),
            GraphError::NotAPath { detail } => write!(f, "not a path: {detail}"),
            GraphError::Table(msg) => write!(f, "table extraction failed: {msg}"),
        }
    }
}

impl std::error::Error for GraphError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// One cell per edge per stage.
    Original,
    /// `n` cells per edge per stage for an n-stage build.
    Modified,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub color: usize,
    pub stage: usize,
    /// For chain edges: (pentagon id, chain position 1..=4).
    pub provenance: Option<(usize, u8)>,
}

#[derive(Clone, Debug)]
pub struct Pentagon {
    pub base_edge: usize,
    pub copy: usize,
    pub pair: (usize, usize),
    pub stage: usize,
    /// Interior chain vertices u1, u2, u3; u0 and u4 are the base endpoints.
    pub verts: [usize; 3],
    /// Chain edges x1..x4, colored pair.0, pair.1, pair.0, pair.1.
    pub edges: [usize; 4],
}

pub const DEFAULT_VERTEX_BUDGET: usize = 50_000;

#[derive(Clone)]
pub struct ColoredGraph {
    lattice: FiniteLattice,
    vertex_stage: Vec<usize>,
    edges: Vec<Edge>,
    pentagons: Vec<Pentagon>,
    /// Cumulative vertex/edge counts per stage.
    stage_v: Vec<usize>,
    stage_e: Vec<usize>,
    edge_at: BTreeMap<(usize, usize), usize>,
    pent_at: BTreeMap<(usize, usize, usize, (usize, usize)), usize>,
    adj: Vec<Vec<usize>>,
    /// For chain-interior vertices: (pentagon id, position 0..=2).
    interior_of: Vec<Option<(usize, usize)>>,
    base_color: usize,
}

impl fmt::Debug for ColoredGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ColoredGraph(stages={}, vertices={}, edges={})",
            self.deepest_stage(),
            self.vertex_count(),
            self.edge_count()
        )
    }
}

impl ColoredGraph {
    /// The stage-0 graph: a single edge on two vertices. The base color
    /// defaults to the lattice bottom; the choice has no impact on the
    /// later checks (and a test rebuilds with another color to confirm).
    pub fn base(lattice: FiniteLattice, base_color: usize) -> ColoredGraph {
        assert!(base_color != lattice.top(), "edge colors live below the top");
        let edge = Edge { a: 0, b: 1, color: base_color, stage: 0, provenance: None };
        let mut edge_at = BTreeMap::new();
        edge_at.insert((0, 1), 0);
        ColoredGraph {
            lattice,
            vertex_stage: vec![0, 0],
            edges: vec![edge],
            pentagons: Vec::new(),
            stage_v: vec![2],
            stage_e: vec![1],
            edge_at,
            pent_at: BTreeMap::new(),
            adj: vec![vec![0], vec![0]],
            interior_of: vec![None, None],
            base_color,
        }
    }

    pub fn lattice(&self) -> &FiniteLattice {
        &self.lattice
    }

    pub fn base_color(&self) -> usize {
        self.base_color
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_stage.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn deepest_stage(&self) -> usize {
        self.stage_v.len() - 1
    }

    pub fn vertices_at_stage(&self, s: usize) -> usize {
        self.stage_v[s.min(self.deepest_stage())]
    }

    pub fn edges_at_stage(&self, s: usize) -> usize {
        self.stage_e[s.min(self.deepest_stage())]
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn pentagon(&self, id: usize) -> &Pentagon {
        &self.pentagons[id]
    }

    pub fn pentagons(&self) -> &[Pentagon] {
        &self.pentagons
    }

    pub fn vertex_stage(&self, v: usize) -> usize {
        self.vertex_stage[v]
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edge_at.get(&key).copied()
    }

    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// If `v` is a chain-interior vertex: its pentagon and position 0..=2.
    pub fn interior_of(&self, v: usize) -> Option<(usize, usize)> {
        self.interior_of[v]
    }

    /// Pentagon attached to `base` at `stage` with the given copy and pair.
    pub fn pentagon_on(
        &self,
        base: usize,
        stage: usize,
        copy: usize,
        pair: (usize, usize),
    ) -> Option<usize> {
        self.pent_at.get(&(base, stage, copy, pair)).copied()
    }

    /// Ordered pairs (α₁,α₂) with α₁∧α₂ ≤ α, drawn from L−{1}.
    pub fn cell_pairs(&self, alpha: usize) -> Vec<(usize, usize)> {
        let k = self.lattice.below_top();
        let mut out = Vec::new();
        for &a1 in &k {
            for &a2 in &k {
                if self.lattice.leq(self.lattice.meet(a1, a2), alpha) {
                    out.push((a1, a2));
                }
            }
        }
        out
    }

    fn add_pentagon(&mut self, base: usize, copy: usize, pair: (usize, usize), stage: usize) {
        let (u0, u4) = (self.edges[base].a, self.edges[base].b);
        let v0 = self.vertex_stage.len();
        self.vertex_stage.extend([stage, stage, stage]);
        self.adj.extend([Vec::new(), Vec::new(), Vec::new()]);
        let verts = [v0, v0 + 1, v0 + 2];
        let pent_id = self.pentagons.len();
        for (i, &v) in verts.iter().enumerate() {
            debug_assert_eq!(v, self.interior_of.len());
            let _ = v;
            self.interior_of.push(Some((pent_id, i)));
        }
        let chain = [
            (u0, verts[0], pair.0),
            (verts[0], verts[1], pair.1),
            (verts[1], verts[2], pair.0),
            (verts[2], u4, pair.1),
        ];
        let mut edge_ids = [0usize; 4];
        for (i, &(x, y, color)) in chain.iter().enumerate() {
            let id = self.edges.len();
            self.edges.push(Edge {
                a: x.min(y),
                b: x.max(y),
                color,
                stage,
                provenance: Some((pent_id, (i + 1) as u8)),
            });
            self.edge_at.insert((x.min(y), x.max(y)), id);
            self.adj[x].push(id);
            self.adj[y].push(id);
            edge_ids[i] = id;
        }
        self.pentagons.push(Pentagon {
            base_edge: base,
            copy,
            pair,
            stage,
            verts,
            edges: edge_ids,
        });
        self.pent_at.insert((base, stage, copy, pair), pent_id);
    }

    /// One new stage attaching `copies` cells to each listed edge.
    pub fn attach_cells(
        &self,
        targets: &[(usize, usize)],
        budget: usize,
    ) -> Result<ColoredGraph, GraphError> {
        for &(e, _) in targets {
            if e >= self.edges.len() {
                return Err(GraphError::EdgeNotFound { edge: e });
            }
        }
        let mut projected = self.vertex_count();
        for &(e, copies) in targets {
            projected += 3 * copies * self.cell_pairs(self.edges[e].color).len();
        }
        if projected > budget {
            return Err(GraphError::BudgetExceeded { projected, budget });
        }
        let mut g = self.clone();
        let stage = g.deepest_stage() + 1;
        for &(e, copies) in targets {
            let pairs = g.cell_pairs(g.edges[e].color);
            for copy in 0..copies {
                for &pair in &pairs {
                    g.add_pentagon(e, copy, pair, stage);
                }
            }
        }
        g.stage_v.push(g.vertex_count());
        g.stage_e.push(g.edge_count());
        Ok(g)
    }

    /// Attach `copies` α-cells to one edge, as a new stage.
    pub fn attach_cell(&self, e: usize, copies: usize) -> Result<ColoredGraph, GraphError> {
        if copies == 0 {
            if e >= self.edges.len() {
                return Err(GraphError::EdgeNotFound { edge: e });
            }
            return Ok(self.clone());
        }
        self.attach_cells(&[(e, copies)], DEFAULT_VERTEX_BUDGET)
    }

    /// Union-find over edges of color ≥ α, restricted to a stage prefix.
    pub fn color_equivalence_at(&self, alpha: usize, stage: usize) -> Partition {
        let nv = self.vertices_at_stage(stage);
        let ne = self.edges_at_stage(stage);
        let mut uf = UnionFind::new(nv);
        for e in &self.edges[..ne] {
            if self.lattice.leq(alpha, e.color) {
                uf.union(e.a, e.b);
            }
        }
        Partition::from_union_find(uf)
    }

    pub fn color_equivalence(&self, alpha: usize) -> Partition {
        self.color_equivalence_at(alpha, self.deepest_stage())
    }

    /// DOT rendering: vertex name = index, edge label = color label,
    /// pentagon provenance as edge attributes.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph theta {\n");
        for v in 0..self.vertex_count() {
            out.push_str(&format!("  {v} [stage={}];\n", self.vertex_stage[v]));
        }
        for e in &self.edges {
            let mut attrs = format!("label=\"{}\" stage={}", self.lattice.label(e.color), e.stage);
            if let Some((pent, pos)) = e.provenance {
                let p = &self.pentagons[pent];
                attrs.push_str(&format!(
                    " pentagon=\"base{}copy{}pair({},{})pos{}\"",
                    p.base_edge, p.copy, p.pair.0, p.pair.1, pos
                ));
            }
            out.push_str(&format!("  {} -- {} [{}];\n", e.a, e.b, attrs));
        }
        out.push_str("}\n");
        out
    }
}

/// Build a staged graph with a fixed number of cells per edge per stage.
pub fn pudlak_graph(
    lattice: &FiniteLattice,
    stages: usize,
    copies: usize,
    budget: usize,
) -> Result<ColoredGraph, GraphError> {
    pudlak_graph_from(lattice, lattice.bottom(), stages, copies, budget)
}

pub fn pudlak_graph_from(
    lattice: &FiniteLattice,
    base_color: usize,
    stages: usize,
    copies: usize,
    budget: usize,
) -> Result<ColoredGraph, GraphError> {
    let mut g = ColoredGraph::base(lattice.clone(), base_color);
    for _ in 0..stages {
        let targets: Vec<(usize, usize)> = (0..g.edge_count()).map(|e| (e, copies)).collect();
        g = g.attach_cells(&targets, budget)?;
    }
    Ok(g)
}

/// The spec'd stage builders: `Original` attaches one cell per edge per
/// stage; `Modified` attaches `n` cells per edge per stage for an n-stage
/// build.
pub fn pudlak_stage(
    lattice: &FiniteLattice,
    n: usize,
    variant: Variant,
    budget: usize,
) -> Result<ColoredGraph, GraphError> {
    let copies = match variant {
        Variant::Original => 1,
        Variant::Modified => n.max(1),
    };
    pudlak_graph(lattice, n, copies, budget)
}

/// Extract the lattice table at the graph's deepest stage: rel(k) is the
/// color-≥-k connectivity relation. Fails if two lattice elements are not
/// yet separated (stage too small, not a math error).
pub fn table_from_graph(graph: &ColoredGraph) -> Result<LatticeTable, GraphError> {
    let lat = graph.lattice().clone();
    let rels: Vec<Partition> = lat.elements().map(|k| graph.color_equivalence(k)).collect();
    for i in lat.elements() {
        for j in lat.elements() {
            if i < j && rels[i] == rels[j] {
                return Err(GraphError::NotInjectiveAtStage { left: i, right: j });
            }
        }
    }
    LatticeTable::new(lat, rels).map_err(|e| GraphError::Table(e.to_string()))
}

/// A staged table context: the graph plus per-element relations at the
/// deepest stage. Stage prefixes of the relations agree with the relations
/// computed on the prefix graphs (path contraction), which a test checks.
#[derive(Clone, Debug)]
pub struct PudlakTables {
    graph: ColoredGraph,
    rels: Vec<Partition>,
}

impl PudlakTables {
    pub fn new(graph: ColoredGraph) -> PudlakTables {
        let rels = graph
            .lattice()
            .elements()
            .map(|k| graph.color_equivalence(k))
            .collect();
        PudlakTables { graph, rels }
    }

    pub fn graph(&self) -> &ColoredGraph {
        &self.graph
    }

    pub fn lattice(&self) -> &FiniteLattice {
        self.graph.lattice()
    }

    pub fn deepest_stage(&self) -> usize {
        self.graph.deepest_stage()
    }

    /// Carrier size at stage j; beyond the built depth the carriers repeat
    /// (the padding rule for ramified stage arrays).
    pub fn stage_size(&self, j: usize) -> usize {
        self.graph.vertices_at_stage(j)
    }

    pub fn rel(&self, k: usize) -> &Partition {
        &self.rels[k]
    }

    pub fn same(&self, k: usize, a: usize, b: usize) -> bool {
        self.rels[k].same(a, b)
    }

    /// `a^[k]`: least element of a's ∼_k-block. Stable as stages deepen
    /// because vertex indices are birth-ordered.
    pub fn proj(&self, k: usize, a: usize) -> usize {
        self.rels[k].block_min(a)
    }

    pub fn rel_at_stage(&self, k: usize, s: usize) -> Partition {
        self.graph.color_equivalence_at(k, s)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConditionsReport {
    pub stages_checked: usize,
    pub pentagons_checked: usize,
    pub cycles_checked: usize,
    pub cycle_budget_hit: bool,
}

/// Verify the graph-side conditions the table extraction relies on:
///
/// 1. colors cover L−{1} from stage 1 on,
/// 2. every non-final-stage edge carries a pentagon for each pair
///    (α₁,α₂) with α₁∧α₂ ≤ its color, each pentagon well-formed,
/// 3. the cycle meet inequality, via bounded simple-cycle enumeration plus
///    the structural chain check (a new edge's cycles contain its chain).
pub fn verify_pudlak_conditions(
    graph: &ColoredGraph,
    cycle_len_cap: usize,
    cycle_step_budget: usize,
) -> Result<ConditionsReport, GraphError> {
    let lat = graph.lattice();
    let mut report = ConditionsReport::default();
    let deepest = graph.deepest_stage();

    // (1) surjectivity onto L−{1} from stage 1 on.
    for s in 1..=deepest {
        let ne = graph.edges_at_stage(s);
        let mut seen = vec![false; lat.size()];
        for e in &graph.edges()[..ne] {
            seen[e.color] = true;
        }
        for k in lat.below_top() {
            if !seen[k] {
                return Err(GraphError::ConditionViolated {
                    condition: 1,
                    witness: format!("color {k} missing at stage {s}"),
                });
            }
        }
        report.stages_checked += 1;
    }

    // (2) pentagon completeness via provenance + pentagon well-formedness.
    for p in graph.pentagons() {
        let base = graph.edge(p.base_edge);
        let (a1, a2) = p.pair;
        if !lat.leq(lat.meet(a1, a2), base.color) {
            return Err(GraphError::ConditionViolated {
                condition: 2,
                witness: format!("pentagon on edge {} has pair ({a1},{a2}) above its base color", p.base_edge),
            });
        }
        let mut points = vec![base.a, base.b, p.verts[0], p.verts[1], p.verts[2]];
        points.sort_unstable();
        points.dedup();
        if points.len() != 5 {
            return Err(GraphError::ConditionViolated {
                condition: 2,
                witness: format!("pentagon on edge {} has coincident points", p.base_edge),
            });
        }
        let want = [a1, a2, a1, a2];
        for (i, &eid) in p.edges.iter().enumerate() {
            if graph.edge(eid).color != want[i] {
                return Err(GraphError::ConditionViolated {
                    condition: 2,
                    witness: format!("pentagon on edge {} chain color mismatch at x{}", p.base_edge, i + 1),
                });
            }
        }
        report.pentagons_checked += 1;
    }
    for (eid, e) in graph.edges().iter().enumerate() {
        if e.stage == deepest {
            continue;
        }
        for pair in graph.cell_pairs(e.color) {
            if graph.pentagon_on(eid, e.stage + 1, 0, pair).is_none() {
                return Err(GraphError::ConditionViolated {
                    condition: 2,
                    witness: format!("edge {eid} lacks a ({},{}) pentagon", pair.0, pair.1),
                });
            }
        }
    }

    // (3a) structural: chain interiors are degree-2 within their pentagon at
    // birth, so every cycle through a chain edge traverses the whole chain.
    for p in graph.pentagons() {
        for &v in &p.verts {
            let born: Vec<usize> = graph
                .incident_edges(v)
                .iter()
                .copied()
                .filter(|&e| graph.edge(e).stage == p.stage)
                .collect();
            if born.len() != 2 || born.iter().any(|e| !p.edges.contains(e)) {
                return Err(GraphError::ConditionViolated {
                    condition: 3,
                    witness: format!("chain vertex {v} is not interior to its pentagon"),
                });
            }
        }
    }

    // (3b) bounded simple-cycle enumeration: for each cycle and each edge x
    // in it, the meet of the other colors must be ≤ color(x).
    let mut steps = 0usize;
    let ne = graph.edge_count();
    'outer: for start in 0..ne {
        let e0 = graph.edge(start);
        // Cycles are counted once: only walk edges with id > start.
        let mut path_v = vec![e0.a];
        let mut path_e: Vec<usize> = Vec::new();
        let target = e0.b;
        // Iterative DFS stack: (vertex, next adjacency index).
        let mut stack: Vec<(usize, usize)> = vec![(e0.a, 0)];
        while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
            if steps >= cycle_step_budget {
                report.cycle_budget_hit = true;
                break 'outer;
            }
            steps += 1;
            if *idx >= graph.incident_edges(v).len() {
                stack.pop();
                path_v.pop();
                path_e.pop();
                continue;
            }
            let eid = graph.incident_edges(v)[*idx];
            *idx += 1;
            if eid <= start || path_e.contains(&eid) {
                continue;
            }
            let e = graph.edge(eid);
            let w = if e.a == v { e.b } else { e.a };
            if path_e.len() + 2 > cycle_len_cap {
                continue;
            }
            if w == target && !path_e.is_empty() {
                // Found a cycle: start, path_e..., eid.
                let mut cyc = vec![start];
                cyc.extend(&path_e);
                cyc.push(eid);
                report.cycles_checked += 1;
                for &x in &cyc {
                    let mut rest_meet = lat.top();
                    for &y in &cyc {
                        if y != x {
                            rest_meet = lat.meet(rest_meet, graph.edge(y).color);
                        }
                    }
                    if !lat.leq(rest_meet, graph.edge(x).color) {
                        return Err(GraphError::ConditionViolated {
                            condition: 3,
                            witness: format!("cycle {cyc:?} violates the meet inequality at edge {x}"),
                        });
                    }
                }
                continue;
            }
            if w != target && !path_v.contains(&w) {
                path_v.push(w);
                path_e.push(eid);
                stack.push((w, 0));
            }
        }
    }
    Ok(report)
}

/// The collapse map f_x for a chain edge x: its image is exactly x's
/// endpoints, and it is stable. Stage-0 edges get the identity map.
pub fn stable_map_fx(graph: &ColoredGraph, x: usize) -> Result<Vec<usize>, GraphError> {
    if x >= graph.edge_count() {
        return Err(GraphError::EdgeNotFound { edge: x });
    }
    let e = graph.edge(x);
    let n = graph.vertex_count();
    if e.stage == 0 {
        return Ok((0..n).collect());
    }
    let (pent, pos) = e.provenance.ok_or(GraphError::NotAChainEdge { edge: x })?;
    let p = graph.pentagon(pent);
    let base = graph.edge(p.base_edge);
    let u = [base.a, p.verts[0], p.verts[1], p.verts[2], base.b];
    // pos k in 1..=4; k=1,2 from the paper's formula, k=3,4 mirrored.
    let (kept, kept_to, other_to) = match pos {
        1 => ([u[1], u[2]], u[1], u[0]),
        2 => ([u[2], u[3]], u[2], u[1]),
        3 => ([u[1], u[2]], u[2], u[3]),
        4 => ([u[2], u[3]], u[3], u[4]),
        _ => unreachable!(),
    };
    let mut f = vec![other_to; n];
    f[kept[0]] = kept_to;
    f[kept[1]] = kept_to;
    Ok(f)
}

/// Apply `eval` pointwise to check stability of `f` from the stage-n part
/// of `src` into `tgt`: every src edge maps to an equal-colored tgt edge or
/// collapses.
pub fn check_stable(
    src: &ColoredGraph,
    src_stage: usize,
    tgt: &ColoredGraph,
    f: &dyn Fn(usize) -> usize,
) -> Result<(), GraphError> {
    let ne = src.edges_at_stage(src_stage);
    for (eid, e) in src.edges()[..ne].iter().enumerate() {
        let (fa, fb) = (f(e.a), f(e.b));
        if fa == fb {
            continue;
        }
        match tgt.edge_between(fa, fb) {
            Some(te) if tgt.edge(te).color == e.color => {}
            Some(te) => {
                return Err(GraphError::NotStable {
                    detail: format!(
                        "edge {eid} maps to edge {te} of color {} (want {})",
                        tgt.edge(te).color,
                        e.color
                    ),
                })
            }
            None => {
                return Err(GraphError::NotStable {
                    detail: format!("edge {eid} maps to non-edge ({fa},{fb})"),
                })
            }
        }
    }
    Ok(())
}

/// Extend a stable map on the stage-n carrier of `src` (into the stage-m
/// carrier of `tgt`) to the stage-(n+1) carrier: cells over collapsed bases
/// collapse, cells over preserved bases copy bijectively with orientation
/// fixed by the base images.
pub fn extend_stable(
    src: &ColoredGraph,
    n: usize,
    tgt: &ColoredGraph,
    m: usize,
    f: &[usize],
) -> Result<Vec<usize>, GraphError> {
    let src_n = src.vertices_at_stage(n);
    if f.len() < src_n {
        return Err(GraphError::NotStable { detail: "map does not cover the stage carrier".into() });
    }
    if n >= src.deepest_stage() || m >= tgt.deepest_stage() {
        return Err(GraphError::NotStable { detail: "stages n+1 / m+1 not built".into() });
    }
    check_stable(src, n, tgt, &|v| f[v])?;
    let src_n1 = src.vertices_at_stage(n + 1);
    let mut out = f[..src_n].to_vec();
    out.resize(src_n1, usize::MAX);
    for p in src.pentagons() {
        if p.stage != n + 1 {
            continue;
        }
        let base = src.edge(p.base_edge);
        let (fa, fb) = (out[base.a], out[base.b]);
        if fa == fb {
            for &v in &p.verts {
                out[v] = fa;
            }
            continue;
        }
        let te = tgt
            .edge_between(fa, fb)
            .ok_or_else(|| GraphError::NotStable { detail: "base image is not an edge".into() })?;
        let straight = tgt.edge(te).a == fa;
        let pair = if straight { p.pair } else { (p.pair.1, p.pair.0) };
        let q_id = tgt.pentagon_on(te, m + 1, 0, pair).ok_or_else(|| GraphError::NotStable {
            detail: format!("target edge {te} lacks a ({},{}) pentagon at stage {}", pair.0, pair.1, m + 1),
        })?;
        let q = tgt.pentagon(q_id);
        if straight {
            for i in 0..3 {
                out[p.verts[i]] = q.verts[i];
            }
        } else {
            for i in 0..3 {
                out[p.verts[i]] = q.verts[2 - i];
            }
        }
    }
    check_stable(src, n + 1, tgt, &|v| out[v])?;
    Ok(out)
}

/// Contract a ≥α-colored path to one inside the smallest stage containing
/// its endpoints, by loop excision and pentagon shortcuts.
pub fn contract_path(
    graph: &ColoredGraph,
    path: &[usize],
    alpha: usize,
) -> Result<Vec<usize>, GraphError> {
    if path.is_empty() {
        return Err(GraphError::NotAPath { detail: "empty path".into() });
    }
    let lat = graph.lattice();
    for w in path.windows(2) {
        match graph.edge_between(w[0], w[1]) {
            Some(e) if lat.leq(alpha, graph.edge(e).color) => {}
            Some(e) => {
                return Err(GraphError::NotAPath {
                    detail: format!("edge {} has color below {alpha}", e),
                })
            }
            None => {
                return Err(GraphError::NotAPath {
                    detail: format!("no edge between {} and {}", w[0], w[1]),
                })
            }
        }
    }
    let target = graph.vertex_stage(path[0]).max(graph.vertex_stage(*path.last().unwrap()));
    let mut cur: Vec<usize> = path.to_vec();
    loop {
        // Excise loops: cut between repeated occurrences of a vertex.
        'excise: loop {
            for i in 0..cur.len() {
                for j in ((i + 1)..cur.len()).rev() {
                    if cur[i] == cur[j] {
                        cur.drain(i..j);
                        continue 'excise;
                    }
                }
            }
            break;
        }
        let max_stage = cur.iter().map(|&v| graph.vertex_stage(v)).max().unwrap();
        if max_stage <= target {
            break;
        }
        // Pentagon shortcut: a full chain crossing at maximal stage becomes
        // its base edge.
        let mut replaced = false;
        for i in 0..cur.len().saturating_sub(4) {
            let win = &cur[i..i + 5];
            let interior = &win[1..4];
            if interior.iter().any(|&v| graph.vertex_stage(v) != max_stage) {
                continue;
            }
            // All three interiors in one pentagon, traversed in order.
            let pent = graph.pentagons().iter().find(|p| {
                (p.verts == [interior[0], interior[1], interior[2]]
                    || p.verts == [interior[2], interior[1], interior[0]])
                    && {
                        let b = graph.edge(p.base_edge);
                        (b.a == win[0] && b.b == win[4]) || (b.a == win[4] && b.b == win[0])
                    }
            });
            if let Some(p) = pent {
                debug_assert!(lat.leq(alpha, graph.edge(p.base_edge).color));
                cur.splice(i + 1..i + 4, std::iter::empty());
                replaced = true;
                break;
            }
        }
        if !replaced {
            return Err(GraphError::NotAPath {
                detail: format!("cannot contract below stage {max_stage}"),
            });
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn two_chain_stage(n: usize) -> ColoredGraph {
        pudlak_stage(&catalog::two_chain(), n, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap()
    }

    #[test]
    fn stage_zero_single_edge() {
        let g = two_chain_stage(0);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge(0).color, 0);
    }

    #[test]
    fn two_chain_stage_one_is_a_pentagon() {
        let g = two_chain_stage(1);
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edge_count(), 5);
        assert_eq!(g.pentagons().len(), 1);
    }

    #[test]
    fn attach_cell_cases() {
        let g = two_chain_stage(0);
        // copies=0 leaves the graph unchanged.
        let same = g.attach_cell(0, 0).unwrap();
        assert_eq!(same.vertex_count(), g.vertex_count());
        // one 0-cell on the 2-chain: |αC(0)| = 1 pentagon.
        let g1 = g.attach_cell(0, 1).unwrap();
        assert_eq!(g1.vertex_count(), 5);
        assert_eq!(g1.edge_count(), 5);
        assert!(g.attach_cell(7, 1).is_err());
        // pentagon count per cell = |αC|.
        let m3 = catalog::m3();
        let base = ColoredGraph::base(m3.clone(), 0);
        assert_eq!(base.cell_pairs(0).len(), 13);
        let g1 = base.attach_cell(0, 1).unwrap();
        assert_eq!(g1.pentagons().len(), 13);
    }

    #[test]
    fn color_equivalence_cases() {
        let g = two_chain_stage(1);
        // α = top: nothing identifies.
        assert_eq!(g.color_equivalence(1), Partition::identity(5));
        // α = 0: the whole connected graph collapses.
        assert_eq!(g.color_equivalence(0), Partition::all(5));
    }

    #[test]
    fn golden_table_two_chain_stage0() {
        let g = two_chain_stage(0);
        let t = table_from_graph(&g).unwrap();
        assert_eq!(t.entry(0, 0), 0);
        assert_eq!(t.entry(0, 1), 0);
        assert_eq!(t.entry(1, 1), 1);
        assert_eq!(t.entry(1, 0), 0);
    }

    #[test]
    fn m3_not_injective_at_stage_zero() {
        let g = pudlak_stage(&catalog::m3(), 0, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap();
        assert!(matches!(
            table_from_graph(&g),
            Err(GraphError::NotInjectiveAtStage { .. })
        ));
    }

    #[test]
    fn m3_injective_at_stages_one_and_two() {
        for n in [1, 2] {
            let g = pudlak_stage(&catalog::m3(), n, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap();
            let t = table_from_graph(&g).unwrap();
            assert_eq!(t.carrier(), g.vertex_count());
        }
    }

    #[test]
    fn join_respected_per_stage() {
        for lat in catalog::all_fixtures() {
            let g = pudlak_stage(&lat, 1, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap();
            for s in 0..=1 {
                for a in lat.elements() {
                    for b in lat.elements() {
                        let ra = g.color_equivalence_at(a, s);
                        let rb = g.color_equivalence_at(b, s);
                        let rj = g.color_equivalence_at(lat.join(a, b), s);
                        assert_eq!(rj, ra.meet(&rb).unwrap(), "{a}∨{b} at stage {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn conditions_pass_on_small_stages() {
        for lat in catalog::all_fixtures() {
            let g = pudlak_stage(&lat, 1, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap();
            let report = verify_pudlak_conditions(&g, 12, 200_000).unwrap();
            assert!(report.pentagons_checked > 0);
        }
    }

    #[test]
    fn recolored_edge_breaks_conditions() {
        // The 2-chain has a single color below top, so recolor inside the
        // 3-chain instead: bump one chain edge of a (0,0) pentagon to 1.
        let lat = catalog::chain(3);
        let g = pudlak_stage(&lat, 1, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap();
        let p00 = g
            .pentagons()
            .iter()
            .find(|p| p.pair == (0, 0))
            .expect("there is a (0,0) pentagon")
            .clone();
        let mut g2 = g.clone();
        g2.edges[p00.edges[0]].color = 1;
        let err = verify_pudlak_conditions(&g2, 12, 200_000).unwrap_err();
        assert!(matches!(err, GraphError::ConditionViolated { condition: 2..=3, .. }));
    }

    #[test]
    fn base_color_choice_passes_same_checks() {
        let m3 = catalog::m3();
        for base in [0usize, 1] {
            let g = pudlak_graph_from(&m3, base, 1, 1, DEFAULT_VERTEX_BUDGET).unwrap();
            verify_pudlak_conditions(&g, 10, 100_000).unwrap();
            for a in m3.elements() {
                for b in m3.elements() {
                    let ra = g.color_equivalence(a);
                    let rb = g.color_equivalence(b);
                    assert_eq!(g.color_equivalence(m3.join(a, b)), ra.meet(&rb).unwrap());
                }
            }
        }
    }

    #[test]
    fn fx_is_identity_on_stage_zero_and_collapses_chains() {
        let g = two_chain_stage(1);
        let f0 = stable_map_fx(&g, 0).unwrap();
        assert_eq!(f0, (0..5).collect::<Vec<_>>());
        for x in 1..g.edge_count() {
            let f = stable_map_fx(&g, x).unwrap();
            check_stable(&g, 1, &g, &|v| f[v]).unwrap();
            // image is exactly x's endpoints
            let e = g.edge(x);
            let mut image: Vec<usize> = f.iter().copied().collect();
            image.sort_unstable();
            image.dedup();
            assert_eq!(image, vec![e.a.min(e.b), e.a.max(e.b)]);
        }
    }

    #[test]
    fn fx_stable_on_every_edge_of_m3_stage1() {
        let g = pudlak_stage(&catalog::m3(), 1, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap();
        for x in 0..g.edge_count() {
            let f = stable_map_fx(&g, x).unwrap();
            check_stable(&g, 1, &g, &|v| f[v]).unwrap();
        }
    }

    #[test]
    fn extend_identity_is_identity() {
        let g = two_chain_stage(2);
        let id: Vec<usize> = (0..g.vertices_at_stage(1)).collect();
        let ext = extend_stable(&g, 1, &g, 1, &id).unwrap();
        assert_eq!(ext, (0..g.vertices_at_stage(2)).collect::<Vec<_>>());
    }

    #[test]
    fn extend_fx_stays_stable() {
        let g = two_chain_stage(2);
        // f_x for a stage-1 chain edge, on the stage-1 carrier.
        let f = stable_map_fx(&two_chain_stage(1), 1).unwrap();
        let ext = extend_stable(&g, 1, &g, 1, &f).unwrap();
        check_stable(&g, 2, &g, &|v| ext[v]).unwrap();
    }

    #[test]
    fn extend_collapsing_base_collapses_cell() {
        let g = two_chain_stage(2);
        // Constant map collapses everything; every new cell lands on one point.
        let f = vec![0usize; g.vertices_at_stage(1)];
        let ext = extend_stable(&g, 1, &g, 1, &f).unwrap();
        assert!(ext.iter().all(|&v| v == 0));
    }

    #[test]
    fn contract_backtrack_and_pentagon() {
        let g = two_chain_stage(1);
        let p = g.pentagons()[0].clone();
        let base = g.edge(p.base_edge);
        // immediate backtrack a,c,a,b -> a,b
        let path = vec![base.a, p.verts[0], base.a, base.b];
        assert_eq!(contract_path(&g, &path, 0).unwrap(), vec![base.a, base.b]);
        // full pentagon crossing contracts to the base edge
        let path = vec![base.a, p.verts[0], p.verts[1], p.verts[2], base.b];
        assert_eq!(contract_path(&g, &path, 0).unwrap(), vec![base.a, base.b]);
    }

    #[test]
    fn stabilization_small_stages() {
        for lat in [catalog::two_chain(), catalog::chain(3), catalog::m3()] {
            let g = pudlak_stage(&lat, 2, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap();
            for alpha in lat.elements() {
                for n in 0..2 {
                    let shallow = g.color_equivalence_at(alpha, n);
                    let deep = g.color_equivalence_at(alpha, n + 1);
                    assert_eq!(
                        deep.restrict(g.vertices_at_stage(n)),
                        shallow,
                        "stabilization for α={alpha} at stage {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn stable_maps_are_table_endomorphisms() {
        let g = two_chain_stage(1);
        let t = table_from_graph(&g).unwrap();
        for x in 0..g.edge_count() {
            let f = stable_map_fx(&g, x).unwrap();
            assert!(t.is_endomorphism(&f), "f_{x} must preserve the table");
        }
    }

    #[test]
    fn dual_embedding_properties() {
        // k ↦ e(k) is order-reversing into Part and injective at depth.
        let lat = catalog::m3();
        let g = pudlak_stage(&lat, 1, Variant::Original, DEFAULT_VERTEX_BUDGET).unwrap();
        for a in lat.elements() {
            for b in lat.elements() {
                if lat.leq(a, b) {
                    assert!(g.color_equivalence(b).subset_of(&g.color_equivalence(a)));
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let err = pudlak_stage(&catalog::m3(), 4, Variant::Original, 2_000).unwrap_err();
        assert!(matches!(err, GraphError::BudgetExceeded { .. }));
    }
}
