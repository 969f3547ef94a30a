//! Embeddings of staged tables along `<0,1,∨>`-homomorphisms via the Galois
//! adjoint, direct limits of finite lattice sequences, the two-case
//! permissibility machine, and composed sequential table arrays.

use std::collections::BTreeMap;
use std::fmt;

use crate::lattice::{galois_adjoint, FiniteLattice, LatticeError, UslHomomorphism};
use crate::pudlak::{pudlak_graph, ColoredGraph, GraphError};
use crate::util::{cantor_pair4, cantor_unpair3, cantor_unpair4, UnionFind};

#[derive(Clone, Debug)]
pub enum LimitsError {
    StageTooSmall { needed: usize },
    RecolorCollapse { color: usize },
    EmbeddingCheckFailed { x: usize, y: usize, alpha: usize },
    NotUsl(String),
    MalformedTable(String),
    Lattice(LatticeError),
    Graph(GraphError),
}

impl fmt::Display for LimitsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitsError::StageTooSmall { needed } => {
                write!(f, "target graph cannot host the recolored graph (needs stage {needed})")
            }
            LimitsError::RecolorCollapse { color } => {
                write!(f, "recoloring sent non-top color {color} to the top; source map was invalid")
            }
            LimitsError::EmbeddingCheckFailed { x, y, alpha } => {
                write!(f, "embedding equivalence fails at pair ({x},{y}) for α={alpha}")
            }
            LimitsError::NotUsl(msg) => write!(f, "quotient is not an upper semilattice: {msg}"),
            LimitsError::MalformedTable(msg) => write!(f, "malformed presentation table: {msg}"),
            LimitsError::Lattice(e) => write!(f, "{e}"),
            LimitsError::Graph(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LimitsError {}

impl From<LatticeError> for LimitsError {
    fn from(e: LatticeError) -> Self {
        LimitsError::Lattice(e)
    }
}

impl From<GraphError> for LimitsError {
    fn from(e: GraphError) -> Self {
        LimitsError::Graph(e)
    }
}

// ---------------------------------------------------------------------------
// Table embeddings along a homomorphism.
// ---------------------------------------------------------------------------

/// An embedding of the staged graph of the target lattice into the staged
/// graph of the source lattice: each edge color α is replaced by φ*α and
/// pentagons are replayed into matching cells, using extra cell copies where
/// the recoloring merges pentagon kinds.
#[derive(Clone, Debug)]
pub struct TableEmbedding {
    pub src_graph: ColoredGraph,
    pub dst_graph: ColoredGraph,
    /// Vertex injection src → dst.
    pub vertex_map: Vec<usize>,
    /// Edge injection src → dst.
    pub edge_map: Vec<usize>,
    /// m(j): the least dst stage containing the image of the src stage-j
    /// carrier.
    pub m: Vec<usize>,
    /// Stage of the start edge in the dst graph.
    pub start_stage: usize,
}

/// How many cell copies per pentagon kind the destination needs: the max
/// number of source pentagon kinds that recolor onto one destination kind.
fn recolor_multiplicity(phi: &UslHomomorphism) -> Result<usize, LimitsError> {
    let adj = galois_adjoint(phi)?;
    let l1 = &phi.target;
    let mut mu = 1usize;
    for alpha in l1.below_top() {
        let mut buckets: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for a1 in l1.below_top() {
            for a2 in l1.below_top() {
                if l1.leq(l1.meet(a1, a2), alpha) {
                    *buckets.entry((adj.apply(a1), adj.apply(a2))).or_insert(0) += 1;
                }
            }
        }
        for count in buckets.values() {
            mu = mu.max(*count);
        }
    }
    Ok(mu)
}

/// Embed the staged graph of `phi.target` (built with `src_copies` cells per
/// edge per stage, to `stages` stages) into a staged graph of `phi.source`.
pub fn embed_table_with(
    phi: &UslHomomorphism,
    stages: usize,
    src_copies: usize,
    budget: usize,
) -> Result<TableEmbedding, LimitsError> {
    let adj = galois_adjoint(phi)?;
    let l0 = &phi.source;
    let l1 = &phi.target;
    for x in l1.elements() {
        if x != l1.top() && adj.apply(x) == l0.top() {
            return Err(LimitsError::RecolorCollapse { color: x });
        }
    }
    let src = pudlak_graph(l1, stages, src_copies, budget)?;
    let mu = recolor_multiplicity(phi)?;
    let dst_copies = mu * src_copies;
    let start_color = adj.apply(src.base_color());
    let start_stage = if start_color == l0.bottom() { 0 } else { 1 };
    let dst = pudlak_graph(l0, stages + start_stage, dst_copies, budget)?;
    let start_edge = dst
        .edges()
        .iter()
        .position(|e| e.color == start_color)
        .ok_or(LimitsError::StageTooSmall { needed: 1 })?;

    let mut vertex_map = vec![usize::MAX; src.vertex_count()];
    let mut edge_map = vec![usize::MAX; src.edge_count()];
    let se = dst.edge(start_edge);
    vertex_map[0] = se.a;
    vertex_map[1] = se.b;
    edge_map[0] = start_edge;
    // Copy slots per (dst edge, dst stage, oriented recolored pair).
    let mut slots: BTreeMap<(usize, usize, (usize, usize)), usize> = BTreeMap::new();
    for (pid, p) in src.pentagons().iter().enumerate() {
        let _ = pid;
        let dst_stage = p.stage + start_stage;
        if dst_stage > dst.deepest_stage() {
            return Err(LimitsError::StageTooSmall { needed: dst_stage });
        }
        let base = src.edge(p.base_edge);
        let de = edge_map[p.base_edge];
        let (ia, ib) = (vertex_map[base.a], vertex_map[base.b]);
        let straight = dst.edge(de).a == ia;
        debug_assert!(straight || dst.edge(de).b == ia);
        let _ = ib;
        let rp = (adj.apply(p.pair.0), adj.apply(p.pair.1));
        let pair = if straight { rp } else { (rp.1, rp.0) };
        let slot = slots.entry((de, dst_stage, pair)).or_insert(0);
        let copy = *slot;
        *slot += 1;
        let q_id = dst
            .pentagon_on(de, dst_stage, copy, pair)
            .ok_or(LimitsError::StageTooSmall { needed: dst_stage })?;
        let q = dst.pentagon(q_id);
        for i in 0..3 {
            let (vi, qi) = if straight { (i, i) } else { (i, 2 - i) };
            vertex_map[p.verts[vi]] = q.verts[qi];
        }
        for i in 0..4 {
            let (ei, qi) = if straight { (i, i) } else { (i, 3 - i) };
            edge_map[p.edges[ei]] = q.edges[qi];
        }
    }
    let mut m = Vec::with_capacity(src.deepest_stage() + 1);
    for j in 0..=src.deepest_stage() {
        let worst = (0..src.vertices_at_stage(j))
            .map(|v| dst.vertex_stage(vertex_map[v]))
            .max()
            .unwrap_or(0);
        m.push(worst);
    }
    Ok(TableEmbedding { src_graph: src, dst_graph: dst, vertex_map, edge_map, m, start_stage })
}

/// The single-homomorphism embedding with a plain (one copy per cell)
/// source build.
pub fn embed_table(
    phi: &UslHomomorphism,
    stages: usize,
    budget: usize,
) -> Result<TableEmbedding, LimitsError> {
    embed_table_with(phi, stages, 1, budget)
}

impl TableEmbedding {
    /// The defining equivalence of the embedding, checked exhaustively:
    /// `x ∼_{φα} y ⟺ ι(x) ∼_α ι(y)` for all source vertex pairs and all α
    /// in the source-side lattice of φ.
    pub fn verify_equivalence(&self, phi: &UslHomomorphism) -> Result<(), LimitsError> {
        let nv = self.src_graph.vertex_count();
        for alpha in phi.source.elements() {
            let src_rel = self.src_graph.color_equivalence(phi.apply(alpha));
            let dst_rel = self.dst_graph.color_equivalence(alpha);
            for x in 0..nv {
                for y in (x + 1)..nv {
                    let lhs = src_rel.same(x, y);
                    let rhs = dst_rel.same(self.vertex_map[x], self.vertex_map[y]);
                    if lhs != rhs {
                        return Err(LimitsError::EmbeddingCheckFailed { x, y, alpha });
                    }
                }
            }
        }
        // The injection really is injective.
        let mut seen = std::collections::BTreeSet::new();
        for &v in &self.vertex_map {
            if !seen.insert(v) {
                return Err(LimitsError::EmbeddingCheckFailed { x: v, y: v, alpha: usize::MAX });
            }
        }
        Ok(())
    }

    /// Image colors are always of the form φ*φγ.
    pub fn verify_image_colors(&self, phi: &UslHomomorphism) -> Result<(), LimitsError> {
        let adj = galois_adjoint(phi)?;
        for &de in &self.edge_map {
            let c = self.dst_graph.edge(de).color;
            let ok = phi
                .source
                .elements()
                .any(|gamma| adj.apply(phi.apply(gamma)) == c);
            if !ok {
                return Err(LimitsError::EmbeddingCheckFailed { x: de, y: de, alpha: c });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Lattice sequences and direct limits.
// ---------------------------------------------------------------------------

/// A finite prefix of a sequence i ↦ ⟨L^i, φ_i⟩ with disjoint element
/// namespaces (level, index).
#[derive(Clone, Debug)]
pub struct LatticeSequence {
    lattices: Vec<FiniteLattice>,
    homs: Vec<UslHomomorphism>,
}

impl LatticeSequence {
    pub fn new(
        lattices: Vec<FiniteLattice>,
        homs: Vec<UslHomomorphism>,
    ) -> Result<Self, LimitsError> {
        if lattices.is_empty() {
            return Err(LimitsError::MalformedTable("empty sequence".into()));
        }
        if homs.len() + 1 != lattices.len() {
            return Err(LimitsError::MalformedTable("need one hom per adjacent pair".into()));
        }
        for (i, h) in homs.iter().enumerate() {
            if h.source != lattices[i] || h.target != lattices[i + 1] {
                return Err(LimitsError::MalformedTable(format!("hom {i} endpoints mismatch")));
            }
        }
        Ok(LatticeSequence { lattices, homs })
    }

    /// The constant sequence on one lattice with identity homs.
    pub fn constant(lat: &FiniteLattice, levels: usize) -> LatticeSequence {
        let lattices = vec![lat.clone(); levels.max(1)];
        let homs = (1..levels.max(1)).map(|_| UslHomomorphism::identity(lat)).collect();
        LatticeSequence { lattices, homs }
    }

    pub fn levels(&self) -> usize {
        self.lattices.len()
    }

    pub fn lattice(&self, i: usize) -> &FiniteLattice {
        &self.lattices[i.min(self.lattices.len() - 1)]
    }

    pub fn hom(&self, i: usize) -> &UslHomomorphism {
        &self.homs[i]
    }

    pub fn homs(&self) -> &[UslHomomorphism] {
        &self.homs
    }
}

/// The quotient usl of a sequence prefix: ≈-classes with the induced order
/// and pre-join.
#[derive(Clone, Debug)]
pub struct LimitUsl {
    /// Sorted members (level, index) per class.
    pub classes: Vec<Vec<(usize, usize)>>,
    class_of: BTreeMap<(usize, usize), usize>,
    leq: Vec<bool>,
    join: Vec<usize>,
    pub bottom: usize,
    pub top: usize,
}

impl LimitUsl {
    pub fn class_of(&self, level: usize, index: usize) -> usize {
        self.class_of[&(level, index)]
    }

    pub fn size(&self) -> usize {
        self.classes.len()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.classes.len() + b]
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.classes.len() + b]
    }
}

/// Compute the direct-limit quotient of the sequence prefix: ≈ is generated
/// by a ≈ φ_i(a); ≲ holds when some level has comparable representatives;
/// the pre-join picks the first level with representatives of both classes.
pub fn direct_limit_prefix(seq: &LatticeSequence) -> Result<LimitUsl, LimitsError> {
    let levels = seq.levels();
    let offsets: Vec<usize> = {
        let mut off = vec![0usize];
        for i in 0..levels {
            off.push(off[i] + seq.lattice(i).size());
        }
        off
    };
    let total = offsets[levels];
    let mut uf = UnionFind::new(total);
    for i in 0..levels - 1 {
        for a in seq.lattice(i).elements() {
            uf.union(offsets[i] + a, offsets[i + 1] + seq.hom(i).apply(a));
        }
    }
    let mut class_ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut classes: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut class_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for i in 0..levels {
        for a in seq.lattice(i).elements() {
            let root = uf.find(offsets[i] + a);
            let id = *class_ids.entry(root).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[id].push((i, a));
            class_of.insert((i, a), id);
        }
    }
    let n = classes.len();
    // ≲ on classes.
    let mut leq = vec![false; n * n];
    for i in 0..levels {
        let lat = seq.lattice(i);
        for a in lat.elements() {
            for b in lat.elements() {
                if lat.leq(a, b) {
                    let (ca, cb) = (class_of[&(i, a)], class_of[&(i, b)]);
                    leq[ca * n + cb] = true;
                }
            }
        }
    }
    // Transitive closure (≲ composes across levels through ≈).
    for k in 0..n {
        for a in 0..n {
            if leq[a * n + k] {
                for b in 0..n {
                    if leq[k * n + b] {
                        leq[a * n + b] = true;
                    }
                }
            }
        }
    }
    for a in 0..n {
        if !leq[a * n + a] {
            leq[a * n + a] = true;
        }
        for b in 0..n {
            if a != b && leq[a * n + b] && leq[b * n + a] {
                return Err(LimitsError::NotUsl(format!(
                    "classes {a} and {b} are ≲-equivalent but not ≈-merged in this prefix"
                )));
            }
        }
    }
    // Pre-join: first level holding representatives of both classes.
    let mut join = vec![usize::MAX; n * n];
    for ca in 0..n {
        for cb in 0..n {
            'level: for i in 0..levels {
                let lat = seq.lattice(i);
                for &(la, a0) in &classes[ca] {
                    if la != i {
                        continue;
                    }
                    for &(lb, b0) in &classes[cb] {
                        if lb != i {
                            continue;
                        }
                        join[ca * n + cb] = class_of[&(i, lat.join(a0, b0))];
                        break 'level;
                    }
                }
            }
            if join[ca * n + cb] == usize::MAX {
                return Err(LimitsError::NotUsl(format!(
                    "classes {ca},{cb} never share a level in this prefix"
                )));
            }
        }
    }
    // The quotient pre-join must be the least upper bound, exhaustively.
    for a in 0..n {
        for b in 0..n {
            let j = join[a * n + b];
            if !leq[a * n + j] || !leq[b * n + j] {
                return Err(LimitsError::NotUsl(format!("{a}∨*{b} is not an upper bound")));
            }
            for c in 0..n {
                if leq[a * n + c] && leq[b * n + c] && !leq[j * n + c] {
                    return Err(LimitsError::NotUsl(format!("{a}∨*{b} is not least")));
                }
            }
        }
    }
    let bottom = class_of[&(0, seq.lattice(0).bottom())];
    let top = class_of[&(0, seq.lattice(0).top())];
    for c in 0..n {
        if !leq[bottom * n + c] || !leq[c * n + top] {
            return Err(LimitsError::NotUsl("prefix quotient is not bounded".into()));
        }
    }
    Ok(LimitUsl { classes, class_of, leq, join, bottom, top })
}

// ---------------------------------------------------------------------------
// The permissibility machine.
// ---------------------------------------------------------------------------

/// Finite approximation of a Σ⁰₂ join presentation: the set of (x,y,z,n)
/// for which the universal inner condition holds.
#[derive(Clone, Debug, Default)]
pub struct JoinTable {
    pub entries: Vec<(usize, usize, usize, u64)>,
}

/// Finite approximation of a Σ⁰₂ order presentation: the set of (x,y,n)
/// for which the universal inner condition holds.
#[derive(Clone, Debug, Default)]
pub struct LeqTable {
    pub entries: Vec<(usize, usize, u64)>,
}

/// One step of the two-case machine, decoded from the step code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MachineEvent {
    /// Case 1: carrier grew by the named elements.
    Extend { x: usize, y: usize, z: usize },
    /// Case 2: the relation x ≤ y was imposed (a quotient step).
    Quotient { x: usize, y: usize },
    /// The step made no change.
    Idle,
}

#[derive(Clone, Debug)]
pub struct MachineRun {
    pub sequence: LatticeSequence,
    pub events: Vec<MachineEvent>,
    /// Presentation names per lattice element, per level.
    pub names: Vec<Vec<Vec<usize>>>,
}

fn case1_code(x: usize, y: usize, z: usize, n: u64) -> u64 {
    2 * cantor_pair4(x as u64, y as u64, z as u64, n)
}

/// Run the two-case machine for `steps` codes starting from the 2-element
/// lattice on names {0,1}. Even codes decode to Case 1 (candidate carrier
/// extension once all pairwise joins are witnessed below the code), odd
/// codes to Case 2 (quotient by a confirmed x ≤ y).
pub fn permissibility_machine(
    u: &JoinTable,
    v: &LeqTable,
    steps: usize,
) -> Result<MachineRun, LimitsError> {
    let mut lattices: Vec<FiniteLattice> = Vec::new();
    let mut homs: Vec<UslHomomorphism> = Vec::new();
    let mut names_per_level: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut events = Vec::new();

    // L⁰: the 2-element lattice on names {0 (bottom), 1 (top)}.
    let mut lat = FiniteLattice::build(2, &[(0, 1)])?;
    let mut names: Vec<Vec<usize>> = vec![vec![0], vec![1]];
    lattices.push(lat.clone());
    names_per_level.push(names.clone());

    let has_name = |names: &Vec<Vec<usize>>, n: usize| names.iter().position(|ns| ns.contains(&n));

    for step in 0..steps as u64 {
        let mut event = MachineEvent::Idle;
        if step % 2 == 0 {
            // Case 1: i = ⟨x,y,z,n⟩.
            let (x, y, z, _n) = cantor_unpair4(step / 2);
            let (x, y, z) = (x as usize, y as usize, z as usize);
            let mut known: Vec<usize> = names.iter().flatten().copied().collect();
            for extra in [x, y, z] {
                if !known.contains(&extra) {
                    known.push(extra);
                }
            }
            known.sort_unstable();
            let all_witnessed = known.iter().all(|&x0| {
                known.iter().all(|&y0| {
                    u.entries.iter().any(|&(a, b, c, n0)| {
                        a == x0 && b == y0 && case1_code(a, b, c, n0) < step
                    })
                })
            });
            if all_witnessed && known.iter().any(|k| has_name(&names, *k).is_none()) {
                // Build the extended lattice from least-witnessed joins.
                let join_of = |a: usize, b: usize| -> Option<usize> {
                    u.entries
                        .iter()
                        .filter(|&&(x0, y0, z0, n0)| {
                            x0 == a && y0 == b && case1_code(x0, y0, z0, n0) < step
                        })
                        .min_by_key(|&&(x0, y0, z0, n0)| case1_code(x0, y0, z0, n0))
                        .map(|&(_, _, z0, _)| z0)
                };
                // Quotient existing classes to their canonical names, keep
                // new names as fresh singleton elements.
                let mut elem_names: Vec<Vec<usize>> = names.clone();
                for &k in &known {
                    if has_name(&elem_names, k).is_none() {
                        elem_names.push(vec![k]);
                    }
                }
                let canon = |elem_names: &Vec<Vec<usize>>, n: usize| -> usize {
                    elem_names.iter().position(|ns| ns.contains(&n)).unwrap()
                };
                let m = elem_names.len();
                let mut join_idx = vec![usize::MAX; m * m];
                let mut ok = true;
                'pairs: for a in 0..m {
                    for b in 0..m {
                        let (na, nb) = (elem_names[a][0], elem_names[b][0]);
                        match join_of(na, nb) {
                            Some(z0) if has_name(&elem_names, z0).is_some() || true => {
                                if has_name(&elem_names, z0).is_none() {
                                    ok = false;
                                    break 'pairs;
                                }
                                join_idx[a * m + b] = canon(&elem_names, z0);
                            }
                            _ => {
                                ok = false;
                                break 'pairs;
                            }
                        }
                    }
                }
                if ok {
                    // Order from the witnessed joins: a ≤ b iff a∨b = b.
                    let mut pairs = Vec::new();
                    for a in 0..m {
                        for b in 0..m {
                            if join_idx[a * m + b] == b {
                                pairs.push((a, b));
                            }
                        }
                    }
                    // Bottom must stay at index 0 so names stay aligned
                    // through canonicalization: the old bottom keeps name 0.
                    match FiniteLattice::build(m, &pairs) {
                        Ok(new_lat) if new_lat.bottom() == 0 || elem_names[new_lat.bottom()].contains(&0) => {
                            // Verify witnessed joins agree with the computed
                            // lattice joins; reject incoherent tables.
                            let consistent = (0..m).all(|a| {
                                (0..m).all(|b| new_lat.join(a, b) == join_idx[a * m + b])
                            });
                            // Canonicalization may have swapped 0 and the
                            // bottom; realign names if so.
                            if consistent {
                                let mut new_names = elem_names.clone();
                                if new_lat.bottom() == 0 && !elem_names[0].contains(&0) {
                                    // indices were swapped inside build
                                    let b = elem_names
                                        .iter()
                                        .position(|ns| ns.contains(&0))
                                        .unwrap_or(0);
                                    new_names.swap(0, b);
                                }
                                let map: Vec<usize> = (0..lat.size())
                                    .map(|a| {
                                        let name = names[a][0];
                                        new_names.iter().position(|ns| ns.contains(&name)).unwrap()
                                    })
                                    .collect();
                                if let Ok(hom) = UslHomomorphism::new(lat.clone(), new_lat.clone(), map) {
                                    event = MachineEvent::Extend { x, y, z };
                                    lat = new_lat;
                                    names = new_names;
                                    homs.push(hom);
                                    lattices.push(lat.clone());
                                    names_per_level.push(names.clone());
                                }
                            }
                        }
                        _ => {}
                    }
                }
            }
        } else {
            // Case 2: i = ⟨x,y,n⟩.
            let (x, y, n) = cantor_unpair3((step - 1) / 2);
            let (x, y) = (x as usize, y as usize);
            let confirmed = v.entries.contains(&(x, y, n));
            if confirmed {
                if let (Some(xi), Some(yi)) = (has_name(&names, x), has_name(&names, y)) {
                    if !lat.leq(xi, yi) {
                        let (new_lat, class_map, new_names) = quotient_below(&lat, &names, xi, yi)?;
                        if let Ok(hom) = UslHomomorphism::new(lat.clone(), new_lat.clone(), class_map)
                        {
                            event = MachineEvent::Quotient { x, y };
                            lat = new_lat;
                            names = new_names;
                            homs.push(hom);
                            lattices.push(lat.clone());
                            names_per_level.push(names.clone());
                        }
                    }
                }
            }
        }
        if event == MachineEvent::Idle {
            homs.push(UslHomomorphism::identity(&lat));
            lattices.push(lat.clone());
            names_per_level.push(names.clone());
        }
        events.push(event);
    }
    let sequence = LatticeSequence::new(lattices, homs)?;
    Ok(MachineRun { sequence, events, names: names_per_level })
}

/// The homomorphic image of a lattice under the smallest join-compatible
/// congruence forcing x ≤ y (i.e. identifying x∨y with y).
fn quotient_below(
    lat: &FiniteLattice,
    names: &[Vec<usize>],
    x: usize,
    y: usize,
) -> Result<(FiniteLattice, Vec<usize>, Vec<Vec<usize>>), LimitsError> {
    let n = lat.size();
    let mut uf = UnionFind::new(n);
    uf.union(lat.join(x, y), y);
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in 0..n {
                if uf.same(a, b) {
                    for c in 0..n {
                        if !uf.same(lat.join(a, c), lat.join(b, c)) {
                            uf.union(lat.join(a, c), lat.join(b, c));
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    // Classes in canonical order, bottom's class first.
    let mut reps: Vec<usize> = (0..n).map(|a| uf.find(a)).collect();
    let mut class_list: Vec<usize> = reps.clone();
    class_list.sort_unstable();
    class_list.dedup();
    let bottom_rep = uf.find(lat.bottom());
    class_list.retain(|&r| r != bottom_rep);
    class_list.insert(0, bottom_rep);
    let class_idx: BTreeMap<usize, usize> =
        class_list.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let class_map: Vec<usize> = reps.drain(..).map(|r| class_idx[&r]).collect();
    let m = class_list.len();
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if class_map[lat.join(a, b)] == class_map[b] {
                pairs.push((class_map[a], class_map[b]));
            }
        }
    }
    let new_lat = FiniteLattice::build(m, &pairs)
        .map_err(|e| LimitsError::MalformedTable(format!("quotient failed: {e}")))?;
    if new_lat.bottom() != 0 {
        return Err(LimitsError::MalformedTable("quotient bottom misplaced".into()));
    }
    let mut new_names: Vec<Vec<usize>> = vec![Vec::new(); m];
    for a in 0..n {
        for &nm in &names[a] {
            new_names[class_map[a]].push(nm);
        }
    }
    for ns in &mut new_names {
        ns.sort_unstable();
        ns.dedup();
    }
    Ok((new_lat, class_map, new_names))
}

// ---------------------------------------------------------------------------
// Sequential table arrays.
// ---------------------------------------------------------------------------

/// One level of a composed array: the staged graph of L^i injected all the
/// way down into the level-0 graph.
#[derive(Clone, Debug)]
pub struct ArrayLevel {
    /// Injection of this level's graph vertices into the level-0 graph.
    pub into_theta0: Vec<usize>,
    /// Stage-size profile of this level's own graph.
    pub stage_sizes: Vec<usize>,
    /// m(j): stage of the next level down hosting this level's stage j.
    pub m_down: Vec<usize>,
    /// Absolute ramification: level-0 stage hosting this level's stage j.
    pub m_abs: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SequentialTableArray {
    pub levels: Vec<ArrayLevel>,
    /// h(i) = m_i(0): the offset stage of each level inside level 0.
    pub h: Vec<usize>,
    /// The level-0 graph hosting every deeper level.
    pub theta0: ColoredGraph,
}

impl SequentialTableArray {
    /// The padding rule: the level-i carrier visible at level-0 stage k is
    /// the one for the largest j with m_abs(j) ≤ k.
    pub fn carrier_at(&self, level: usize, k: usize) -> usize {
        let lv = &self.levels[level];
        let mut size = 0;
        for (j, &mj) in lv.m_abs.iter().enumerate() {
            if mj <= k {
                size = lv.stage_sizes[j];
            }
        }
        size
    }
}

/// Compose embeddings along the sequence: Θ⁰ hosts Θ¹ hosts Θ² …; each
/// level's vertices are injected down to level 0, with ramification
/// functions recording which stages host which.
pub fn sequential_array(
    seq: &LatticeSequence,
    stages: usize,
    budget: usize,
) -> Result<SequentialTableArray, LimitsError> {
    let levels = seq.levels();
    // Copy counts multiply bottom-up.
    let mut copies = vec![1usize; levels];
    for i in (0..levels - 1).rev() {
        copies[i] = copies[i + 1] * recolor_multiplicity(seq.hom(i))?;
    }
    // Embeddings per hom, with matching copy counts.
    let mut embeds: Vec<TableEmbedding> = Vec::new();
    for i in 0..levels - 1 {
        let emb = embed_table_with(seq.hom(i), stages, copies[i + 1], budget)?;
        embeds.push(emb);
    }
    let theta0 = if levels == 1 {
        pudlak_graph(seq.lattice(0), stages, copies[0], budget)?
    } else {
        embeds[0].dst_graph.clone()
    };
    let mut out_levels: Vec<ArrayLevel> = Vec::new();
    // Level 0: identity.
    let sizes0: Vec<usize> = (0..=theta0.deepest_stage())
        .map(|j| theta0.vertices_at_stage(j))
        .collect();
    out_levels.push(ArrayLevel {
        into_theta0: (0..theta0.vertex_count()).collect(),
        stage_sizes: sizes0.clone(),
        m_down: (0..sizes0.len()).collect(),
        m_abs: (0..sizes0.len()).collect(),
    });
    for i in 1..levels {
        let emb = &embeds[i - 1];
        // emb maps level-i graph into level-(i-1) graph; compose injections.
        // For i > 1 the two builds of the level-(i-1) graph must agree; the
        // copy bookkeeping above makes emb[i-1].dst_graph the same build as
        // emb[i-2].src_graph.
        let below = &out_levels[i - 1];
        if i >= 2 {
            let upper_src = &embeds[i - 2].src_graph;
            if upper_src.vertex_count() != emb.dst_graph.vertex_count() {
                return Err(LimitsError::MalformedTable(
                    "level graphs misaligned in composition".into(),
                ));
            }
        }
        let into_theta0: Vec<usize> = emb
            .vertex_map
            .iter()
            .map(|&v| below.into_theta0[v])
            .collect();
        let sizes: Vec<usize> = (0..=emb.src_graph.deepest_stage())
            .map(|j| emb.src_graph.vertices_at_stage(j))
            .collect();
        let m_abs: Vec<usize> = emb
            .m
            .iter()
            .map(|&mj| below.m_abs[mj.min(below.m_abs.len() - 1)])
            .collect();
        out_levels.push(ArrayLevel {
            into_theta0,
            stage_sizes: sizes,
            m_down: emb.m.clone(),
            m_abs,
        });
    }
    let h = out_levels.iter().map(|lv| lv.m_abs[0]).collect();
    Ok(SequentialTableArray { levels: out_levels, h, theta0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::pudlak::DEFAULT_VERTEX_BUDGET;
    use crate::util::cantor_pair3;

    #[test]
    fn embed_identity_is_identity_injection() {
        let two = catalog::two_chain();
        let phi = UslHomomorphism::identity(&two);
        let emb = embed_table(&phi, 1, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(emb.vertex_map, (0..emb.src_graph.vertex_count()).collect::<Vec<_>>());
        emb.verify_equivalence(&phi).unwrap();
    }

    #[test]
    fn embed_two_chain_into_m3() {
        let (phi, _) = catalog::hom_fixtures().remove(1);
        let emb = embed_table(&phi, 1, DEFAULT_VERTEX_BUDGET).unwrap();
        emb.verify_equivalence(&phi).unwrap();
        emb.verify_image_colors(&phi).unwrap();
        // Recoloring sends every M3 color to 0, so every image edge is
        // 0-colored in the 2-chain graph.
        for &de in &emb.edge_map {
            assert_eq!(emb.dst_graph.edge(de).color, 0);
        }
    }

    #[test]
    fn embed_two_chain_into_square() {
        let (phi, _) = catalog::hom_fixtures().remove(2);
        let emb = embed_table(&phi, 1, DEFAULT_VERTEX_BUDGET).unwrap();
        emb.verify_equivalence(&phi).unwrap();
    }

    #[test]
    fn limit_of_constant_sequence() {
        let seq = LatticeSequence::constant(&catalog::m3(), 3);
        let lim = direct_limit_prefix(&seq).unwrap();
        assert_eq!(lim.size(), 5);
        // a ≈ φ(a): every class has one member per level.
        for c in &lim.classes {
            assert_eq!(c.len(), 3);
        }
    }

    #[test]
    fn limit_two_chain_m3_three_chain() {
        // 2-chain → M3 → 3-chain (atoms b,c forced to the top) ≅ 3-chain.
        let two = catalog::two_chain();
        let m3 = catalog::m3();
        let three = catalog::chain(3);
        let phi0 = UslHomomorphism::new(two, m3.clone(), vec![0, 4]).unwrap();
        let phi1 = UslHomomorphism::new(m3.clone(), three.clone(), vec![0, 1, 2, 2, 2]).unwrap();
        let seq = LatticeSequence::new(vec![phi0.source.clone(), m3, three], vec![phi0, phi1]).unwrap();
        let lim = direct_limit_prefix(&seq).unwrap();
        assert_eq!(lim.size(), 3);
        let chain_len = (0..3).filter(|&a| (0..3).all(|b| lim.leq(a, b) || lim.leq(b, a))).count();
        assert_eq!(chain_len, 3);
    }

    #[test]
    fn machine_with_empty_tables_is_constant() {
        let run = permissibility_machine(&JoinTable::default(), &LeqTable::default(), 20).unwrap();
        assert!(run.events.iter().all(|e| *e == MachineEvent::Idle));
        for i in 0..run.sequence.levels() {
            assert_eq!(run.sequence.lattice(i).size(), 2);
        }
    }

    #[test]
    fn machine_quotient_merges_named_classes() {
        // V asserts 1 ≤ 0 at witness n=0: the two classes collapse.
        let v = LeqTable { entries: vec![(1, 0, 0)] };
        let steps = (2 * cantor_pair3(1, 0, 0) + 1) as usize + 1;
        let run = permissibility_machine(&JoinTable::default(), &v, steps).unwrap();
        assert!(run
            .events
            .iter()
            .any(|e| matches!(e, MachineEvent::Quotient { x: 1, y: 0 })));
        let last = run.sequence.lattice(run.sequence.levels() - 1);
        assert_eq!(last.size(), 1);
        // Determinism: identical tables give identical event traces.
        let run2 = permissibility_machine(&JoinTable::default(), &v, steps).unwrap();
        assert_eq!(run.events, run2.events);
    }

    #[test]
    fn machine_case1_adds_witnessed_elements() {
        // Witness joins making {0,1,2} a 3-chain 0 < 2 < 1... joins:
        // 0∨0=0, 0∨1=1, 1∨1=1, 0∨2=2, 2∨2=2, 1∨2=1, and symmetric.
        let mut entries = Vec::new();
        for &(a, b, c) in &[
            (0, 0, 0),
            (0, 1, 1),
            (1, 0, 1),
            (1, 1, 1),
            (0, 2, 2),
            (2, 0, 2),
            (2, 2, 2),
            (1, 2, 1),
            (2, 1, 1),
        ] {
            entries.push((a, b, c, 0u64));
        }
        let u = JoinTable { entries };
        // Run just past the first Case-1 code that mentions element 2 and
        // exceeds every witness code.
        let max_witness = u
            .entries
            .iter()
            .map(|&(a, b, c, n)| case1_code(a, b, c, n))
            .max()
            .unwrap();
        let trigger = (0..)
            .map(|n| case1_code(2, 1, 1, n))
            .find(|&c| c > max_witness)
            .unwrap();
        let run = permissibility_machine(&u, &LeqTable::default(), trigger as usize + 1).unwrap();
        let grew = run
            .events
            .iter()
            .any(|e| matches!(e, MachineEvent::Extend { .. }));
        assert!(grew, "machine should eventually admit element 2");
        let last = run.sequence.lattice(run.sequence.levels() - 1);
        assert_eq!(last.size(), 3);
        last.verify().unwrap();
    }

    #[test]
    fn sequential_array_single_level() {
        let seq = LatticeSequence::new(vec![catalog::two_chain()], vec![]).unwrap();
        let arr = sequential_array(&seq, 2, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(arr.levels.len(), 1);
        assert_eq!(arr.h, vec![0]);
        assert_eq!(arr.carrier_at(0, 1), 5);
    }

    #[test]
    fn sequential_array_two_levels() {
        // 2-chain hosting M3 along 0↦0, 1↦1.
        let two = catalog::two_chain();
        let m3 = catalog::m3();
        let phi = UslHomomorphism::new(two.clone(), m3.clone(), vec![0, 4]).unwrap();
        let seq = LatticeSequence::new(vec![two, m3], vec![phi.clone()]).unwrap();
        let arr = sequential_array(&seq, 1, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(arr.levels.len(), 2);
        // Θ¹ ⊆ Θ⁰ as vertex sets.
        let img: std::collections::BTreeSet<usize> =
            arr.levels[1].into_theta0.iter().copied().collect();
        assert_eq!(img.len(), arr.levels[1].into_theta0.len());
        assert!(img.iter().all(|&v| v < arr.theta0.vertex_count()));
        // m is monotone with m(0) = h(1).
        assert_eq!(arr.levels[1].m_abs[0], arr.h[1]);
        assert!(arr.levels[1].m_abs.windows(2).all(|w| w[0] <= w[1]));
        // Relations transfer per the embedding biconditional at built stages.
        let emb = embed_table_with(&phi, 1, 1, DEFAULT_VERTEX_BUDGET).unwrap();
        emb.verify_equivalence(&phi).unwrap();
    }

    #[test]
    fn padding_rule_repeats_carriers() {
        let two = catalog::two_chain();
        let m3 = catalog::m3();
        let phi = UslHomomorphism::new(two.clone(), m3.clone(), vec![0, 4]).unwrap();
        let seq = LatticeSequence::new(vec![two, m3], vec![phi]).unwrap();
        let arr = sequential_array(&seq, 1, DEFAULT_VERTEX_BUDGET).unwrap();
        // Between m(j) and m(j+1) the visible carrier stays constant.
        let lv = &arr.levels[1];
        for k in 0..*lv.m_abs.last().unwrap() {
            let size = arr.carrier_at(1, k);
            if let Some(j) = lv.m_abs.iter().rposition(|&mj| mj <= k) {
                assert_eq!(size, lv.stage_sizes[j]);
            }
        }
    }
}
