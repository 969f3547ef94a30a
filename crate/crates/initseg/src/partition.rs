//! Equivalence relations on finite carriers, congruence lattices of unary
//! algebras, endomorphism monoids of lattice tables, and Malcev homogeneity.

use std::collections::BTreeMap;
use std::fmt;

use crate::lattice::FiniteLattice;
use crate::util::UnionFind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraError {
    CarrierMismatch { left: usize, right: usize },
    CarrierTooLarge { carrier: usize, cap: usize },
    BadTable(String),
    NoPath { a: usize, b: usize, c: usize, d: usize },
}

impl fmt::Display for AlgebraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraError::CarrierMismatch { left, right } => {
                write!(f, "carrier mismatch: {left} vs {right}")
            }
            AlgebraError::CarrierTooLarge { carrier, cap } => {
                write!(f, "carrier {carrier} exceeds brute-force cap {cap}")
            }
            AlgebraError::BadTable(msg) => write!(f, "invalid lattice table: {msg}"),
            AlgebraError::NoPath { a, b, c, d } => {
                write!(f, "({c},{d}) is not in the endomorphism closure of ({a},{b})")
            }
        }
    }
}

impl std::error::Error for AlgebraError {}

/// A partition of `0..n`, frozen in canonical form: `repr[x]` is the least
/// element of x's block. Equality and ordering are on the canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    repr: Vec<usize>,
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition{:?}", self.blocks())
    }
}

impl Partition {
    pub fn identity(n: usize) -> Partition {
        Partition { repr: (0..n).collect() }
    }

    /// The all relation X×X (a single block).
    pub fn all(n: usize) -> Partition {
        Partition { repr: vec![0; n] }
    }

    pub fn from_union_find(mut uf: UnionFind) -> Partition {
        let n = uf.len();
        let repr = (0..n).map(|x| uf.find(x)).collect();
        Partition { repr }
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Partition {
        let mut uf = UnionFind::new(n);
        for &(a, b) in pairs {
            uf.union(a, b);
        }
        Partition::from_union_find(uf)
    }

    /// Partition from a restricted-growth string (block index per element).
    pub fn from_rgs(rgs: &[usize]) -> Partition {
        let mut first: BTreeMap<usize, usize> = BTreeMap::new();
        let mut repr = vec![0; rgs.len()];
        for (x, &b) in rgs.iter().enumerate() {
            let r = *first.entry(b).or_insert(x);
            repr[x] = r;
        }
        Partition { repr }
    }

    pub fn size(&self) -> usize {
        self.repr.len()
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.repr[a] == self.repr[b]
    }

    /// Least element of a's block; this is the `a^[k]` of table rendering.
    pub fn block_min(&self, a: usize) -> usize {
        self.repr[a]
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut by_repr: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (x, &r) in self.repr.iter().enumerate() {
            by_repr.entry(r).or_default().push(x);
        }
        by_repr.into_values().collect()
    }

    pub fn block_count(&self) -> usize {
        self.blocks().len()
    }

    /// Pairwise intersection of relations (the finer common refinement).
    pub fn meet(&self, other: &Partition) -> Result<Partition, AlgebraError> {
        self.check_carrier(other)?;
        let n = self.size();
        let mut first: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut repr = vec![0; n];
        for x in 0..n {
            let key = (self.repr[x], other.repr[x]);
            let r = *first.entry(key).or_insert(x);
            repr[x] = r;
        }
        Ok(Partition { repr })
    }

    /// Equivalence closure of the union of relations.
    pub fn join(&self, other: &Partition) -> Result<Partition, AlgebraError> {
        self.check_carrier(other)?;
        let n = self.size();
        let mut uf = UnionFind::new(n);
        for x in 0..n {
            uf.union(x, self.repr[x]);
            uf.union(x, other.repr[x]);
        }
        Ok(Partition::from_union_find(uf))
    }

    /// True if self ⊆ other as sets of pairs (self refines other).
    pub fn subset_of(&self, other: &Partition) -> bool {
        self.size() == other.size()
            && (0..self.size()).all(|x| other.same(x, self.repr[x]))
    }

    /// Restriction to the prefix carrier `0..m`.
    pub fn restrict(&self, m: usize) -> Partition {
        assert!(m <= self.size());
        let mut first: BTreeMap<usize, usize> = BTreeMap::new();
        let mut repr = vec![0; m];
        for x in 0..m {
            let r = *first.entry(self.repr[x]).or_insert(x);
            repr[x] = r;
        }
        Partition { repr }
    }

    fn check_carrier(&self, other: &Partition) -> Result<(), AlgebraError> {
        if self.size() != other.size() {
            return Err(AlgebraError::CarrierMismatch { left: self.size(), right: other.size() });
        }
        Ok(())
    }
}

/// The partition merging exactly {a,b} (the principal equivalence C(a,b)).
pub fn principal_equivalence(n: usize, a: usize, b: usize) -> Partition {
    Partition::from_pairs(n, &[(a, b)])
}

/// A unary algebra: a carrier together with total unary operations.
#[derive(Clone, Debug)]
pub struct UnaryAlgebra {
    n: usize,
    ops: Vec<Vec<usize>>,
}

impl UnaryAlgebra {
    pub fn new(n: usize, ops: Vec<Vec<usize>>) -> Result<Self, AlgebraError> {
        for op in &ops {
            if op.len() != n || op.iter().any(|&v| v >= n) {
                return Err(AlgebraError::BadTable(format!("operation not total on carrier {n}")));
            }
        }
        Ok(UnaryAlgebra { n, ops })
    }

    pub fn carrier(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[Vec<usize>] {
        &self.ops
    }

    pub fn preserves(&self, p: &Partition) -> bool {
        self.ops.iter().all(|f| {
            (0..self.n).all(|x| {
                let r = p.block_min(x);
                p.same(f[x], f[r])
            })
        })
    }
}

/// Enumerate all partitions of `0..n` via restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(rgs: &mut Vec<usize>, pos: usize, maxb: usize, out: &mut Vec<Partition>) {
        if pos == rgs.len() {
            out.push(Partition::from_rgs(rgs));
            return;
        }
        for b in 0..=maxb {
            rgs[pos] = b;
            rec(rgs, pos + 1, maxb.max(b + 1), out);
        }
    }
    if n == 0 {
        return vec![Partition::identity(0)];
    }
    rec(&mut rgs, 1, 1, &mut out);
    out.sort();
    out
}

pub const CONGRUENCE_BRUTE_FORCE_CAP: usize = 7;

/// All congruences of a unary algebra, by brute force over all partitions.
pub fn congruence_lattice(algebra: &UnaryAlgebra) -> Result<Vec<Partition>, AlgebraError> {
    congruence_lattice_capped(algebra, CONGRUENCE_BRUTE_FORCE_CAP)
}

pub fn congruence_lattice_capped(
    algebra: &UnaryAlgebra,
    cap: usize,
) -> Result<Vec<Partition>, AlgebraError> {
    if algebra.carrier() > cap {
        return Err(AlgebraError::CarrierTooLarge { carrier: algebra.carrier(), cap });
    }
    Ok(all_partitions(algebra.carrier())
        .into_iter()
        .filter(|p| algebra.preserves(p))
        .collect())
}

/// Least congruence of `algebra` containing (a,b): worklist closure that
/// merges (a,b) and propagates (f(x),f(y)) for every merged (x,y).
pub fn principal_congruence(algebra: &UnaryAlgebra, a: usize, b: usize) -> Partition {
    let n = algebra.carrier();
    let mut uf = UnionFind::new(n);
    let mut work = vec![(a, b)];
    while let Some((x, y)) = work.pop() {
        if uf.same(x, y) {
            continue;
        }
        uf.union(x, y);
        for f in algebra.ops() {
            work.push((f[x], f[y]));
        }
        // Merging two blocks can create new op-images to propagate; the
        // naive rescan keeps this correct on small carriers.
        for u in 0..n {
            for v in (u + 1)..n {
                if uf.same(u, v) {
                    for f in algebra.ops() {
                        if !uf.same(f[u], f[v]) {
                            work.push((f[u], f[v]));
                        }
                    }
                }
            }
        }
    }
    Partition::from_union_find(uf)
}

/// A lattice table: an isomorphic copy of a lattice inside Part(X), with
/// `rel(top)` the identity and `rel(bottom)` the all relation, and join
/// realized as intersection of relations.
#[derive(Clone, Debug)]
pub struct LatticeTable {
    lattice: FiniteLattice,
    carrier: usize,
    rels: Vec<Partition>,
}

impl LatticeTable {
    pub fn new(
        lattice: FiniteLattice,
        rels: Vec<Partition>,
    ) -> Result<Self, AlgebraError> {
        if rels.len() != lattice.size() {
            return Err(AlgebraError::BadTable(format!(
                "expected {} relations, got {}",
                lattice.size(),
                rels.len()
            )));
        }
        let carrier = rels[0].size();
        if rels.iter().any(|p| p.size() != carrier) {
            return Err(AlgebraError::BadTable("relations on different carriers".into()));
        }
        if rels[lattice.top()] != Partition::identity(carrier) {
            return Err(AlgebraError::BadTable("rel(top) must be the identity relation".into()));
        }
        if rels[lattice.bottom()] != Partition::all(carrier) {
            return Err(AlgebraError::BadTable("rel(bottom) must be the all relation".into()));
        }
        for a in lattice.elements() {
            for b in lattice.elements() {
                let want = rels[a].meet(&rels[b])?;
                if rels[lattice.join(a, b)] != want {
                    return Err(AlgebraError::BadTable(format!(
                        "rel({}∨{}) is not the intersection of rel({}) and rel({})",
                        a, b, a, b
                    )));
                }
            }
        }
        for a in lattice.elements() {
            for b in lattice.elements() {
                if a != b && rels[a] == rels[b] {
                    return Err(AlgebraError::BadTable(format!(
                        "relations for {a} and {b} coincide (table not injective)"
                    )));
                }
            }
        }
        Ok(LatticeTable { lattice, carrier, rels })
    }

    pub fn lattice(&self) -> &FiniteLattice {
        &self.lattice
    }

    pub fn carrier(&self) -> usize {
        self.carrier
    }

    pub fn rel(&self, k: usize) -> &Partition {
        &self.rels[k]
    }

    pub fn rels(&self) -> &[Partition] {
        &self.rels
    }

    pub fn same(&self, k: usize, a: usize, b: usize) -> bool {
        self.rels[k].same(a, b)
    }

    /// The matrix entry `a^[k] = μb(a ∼_k b)`.
    pub fn entry(&self, a: usize, k: usize) -> usize {
        self.rels[k].block_min(a)
    }

    /// Matrix rows per carrier element, columns per lattice element.
    pub fn matrix(&self) -> Vec<Vec<usize>> {
        (0..self.carrier)
            .map(|a| self.lattice.elements().map(|k| self.entry(a, k)).collect())
            .collect()
    }

    /// Does `g` preserve every relation of the table?
    pub fn is_endomorphism(&self, g: &[usize]) -> bool {
        if g.len() != self.carrier || g.iter().any(|&v| v >= self.carrier) {
            return false;
        }
        self.rels.iter().all(|p| {
            (0..self.carrier).all(|a| {
                let r = p.block_min(a);
                p.same(g[a], g[r])
            })
        })
    }
}

/// Build the lattice-table form of Con A: congruences ordered by reverse
/// inclusion (the all relation is the table's 0, the identity its 1).
pub fn con_table(algebra: &UnaryAlgebra) -> Result<LatticeTable, AlgebraError> {
    let congs = congruence_lattice(algebra)?;
    let n = congs.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            // Table order: A ≤ B iff A ⊇ B as sets of pairs.
            if congs[j].subset_of(&congs[i]) {
                pairs.push((i, j));
            }
        }
    }
    let lattice = FiniteLattice::build(n, &pairs)
        .map_err(|e| AlgebraError::BadTable(format!("congruence set is not a lattice: {e}")))?;
    // Re-align relations with the canonicalized element order.
    let mut rels = vec![Partition::identity(0); n];
    // FiniteLattice::build may have swapped index 0 with the bottom; recover
    // the permutation by matching the order profile.
    // The all relation must sit at the lattice bottom and the identity at top.
    // Since build only ever swaps 0 with the bottom, apply the same swap.
    let bottom_idx = congs
        .iter()
        .position(|p| *p == Partition::all(algebra.carrier()))
        .ok_or_else(|| AlgebraError::BadTable("all relation missing from Con A".into()))?;
    for (i, p) in congs.into_iter().enumerate() {
        let slot = if i == bottom_idx {
            0
        } else if i == 0 {
            bottom_idx
        } else {
            i
        };
        rels[slot] = p;
    }
    LatticeTable::new(lattice, rels)
}

pub const ENDOMORPHISM_BRUTE_FORCE_CAP: usize = 7;

/// How an endomorphism set was obtained; homogeneity reports carry this.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndSource {
    Exhaustive,
    GeneratedSubmonoid,
}

/// All endomorphisms of a lattice table, by incremental-constraint search.
/// Fails with `CarrierTooLarge` beyond the cap; callers with generators use
/// [`end_monoid_from_generators`] instead.
pub fn endomorphisms(table: &LatticeTable) -> Result<Vec<Vec<usize>>, AlgebraError> {
    endomorphisms_capped(table, ENDOMORPHISM_BRUTE_FORCE_CAP)
}

pub fn endomorphisms_capped(
    table: &LatticeTable,
    cap: usize,
) -> Result<Vec<Vec<usize>>, AlgebraError> {
    let n = table.carrier();
    if n > cap {
        return Err(AlgebraError::CarrierTooLarge { carrier: n, cap });
    }
    let mut out = Vec::new();
    let mut g = vec![0usize; n];
    fn consistent(table: &LatticeTable, g: &[usize], pos: usize) -> bool {
        for k in table.lattice().elements() {
            for x in 0..pos {
                if table.same(k, x, pos) && !table.same(k, g[x], g[pos]) {
                    return false;
                }
            }
        }
        true
    }
    fn rec(table: &LatticeTable, g: &mut Vec<usize>, pos: usize, out: &mut Vec<Vec<usize>>) {
        let n = table.carrier();
        if pos == n {
            out.push(g.clone());
            return;
        }
        for v in 0..n {
            g[pos] = v;
            if consistent(table, g, pos) {
                rec(table, g, pos + 1, out);
            }
        }
    }
    rec(table, &mut g, 0, &mut out);
    out.sort();
    Ok(out)
}

/// Close a generator set (plus the identity) under composition, up to a size
/// cap; the result is a submonoid of End Θ when the generators preserve Θ.
pub fn end_monoid_from_generators(
    carrier: usize,
    generators: &[Vec<usize>],
    max_size: usize,
) -> Vec<Vec<usize>> {
    let mut seen: std::collections::BTreeSet<Vec<usize>> = std::collections::BTreeSet::new();
    seen.insert((0..carrier).collect());
    for g in generators {
        seen.insert(g.clone());
    }
    let mut frontier: Vec<Vec<usize>> = seen.iter().cloned().collect();
    while !frontier.is_empty() && seen.len() < max_size {
        let mut next = Vec::new();
        for f in &frontier {
            for g in generators {
                let comp: Vec<usize> = (0..carrier).map(|x| g[f[x]]).collect();
                if seen.insert(comp.clone()) {
                    next.push(comp);
                    if seen.len() >= max_size {
                        break;
                    }
                }
            }
            if seen.len() >= max_size {
                break;
            }
        }
        frontier = next;
    }
    seen.into_iter().collect()
}

/// End_Θ(a,b): the equivalence generated by all ⟨f(a),f(b)⟩ for f in `ends`.
pub fn end_principal(carrier: usize, ends: &[Vec<usize>], a: usize, b: usize) -> Partition {
    let mut uf = UnionFind::new(carrier);
    for f in ends {
        uf.union(f[a], f[b]);
    }
    Partition::from_union_find(uf)
}

/// C_Θ(a,b): the intersection of all table relations containing ⟨a,b⟩.
pub fn c_theta(table: &LatticeTable, a: usize, b: usize) -> Partition {
    let mut acc = Partition::all(table.carrier());
    for k in table.lattice().elements() {
        if table.same(k, a, b) {
            acc = acc.meet(table.rel(k)).expect("same carrier");
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct MalcevReport {
    pub homogeneous: bool,
    pub source: EndSource,
    /// On failure: (a, b, c, d) with (c,d) in C_Θ(a,b) − End_Θ(a,b).
    pub witness: Option<(usize, usize, usize, usize)>,
}

/// Malcev homogeneity: C_Θ(a,b) ⊆ End_Θ(a,b) for all pairs.
pub fn is_malcev_homogeneous(
    table: &LatticeTable,
    ends: &[Vec<usize>],
    source: EndSource,
) -> MalcevReport {
    let n = table.carrier();
    for a in 0..n {
        for b in 0..n {
            let c_rel = c_theta(table, a, b);
            let e_rel = end_principal(n, ends, a, b);
            if !c_rel.subset_of(&e_rel) {
                for c in 0..n {
                    for d in 0..n {
                        if c_rel.same(c, d) && !e_rel.same(c, d) {
                            return MalcevReport {
                                homogeneous: false,
                                source,
                                witness: Some((a, b, c, d)),
                            };
                        }
                    }
                }
            }
        }
    }
    MalcevReport { homogeneous: true, source, witness: None }
}

/// A homogeneity interpolant chain: z_0 = c, z_{n+1} = d, with a witnessing
/// endomorphism per step such that {f_i(a), f_i(b)} = {z_i, z_{i+1}}.
#[derive(Clone, Debug)]
pub struct InterpolantChain {
    pub points: Vec<usize>,
    /// Index into the `ends` slice used for the search, one per step.
    pub witnesses: Vec<usize>,
}

impl InterpolantChain {
    /// Replay every step against the endomorphism list.
    pub fn verify(&self, ends: &[Vec<usize>], a: usize, b: usize) -> bool {
        if self.points.len() != self.witnesses.len() + 1 {
            return false;
        }
        self.witnesses.iter().enumerate().all(|(i, &w)| {
            let f = &ends[w];
            let (zi, zj) = (self.points[i], self.points[i + 1]);
            (f[a] == zi && f[b] == zj) || (f[a] == zj && f[b] == zi)
        })
    }
}

/// BFS over the graph on X whose edges are the unordered images {f(a),f(b)}.
pub fn homogeneity_interpolants(
    carrier: usize,
    ends: &[Vec<usize>],
    a: usize,
    b: usize,
    c: usize,
    d: usize,
) -> Result<InterpolantChain, AlgebraError> {
    if c == d {
        return Ok(InterpolantChain { points: vec![c], witnesses: vec![] });
    }
    // prev[x] = (predecessor point, witness index)
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; carrier];
    let mut queue = std::collections::VecDeque::new();
    prev[c] = Some((c, usize::MAX));
    queue.push_back(c);
    while let Some(z) = queue.pop_front() {
        if z == d {
            break;
        }
        for (w, f) in ends.iter().enumerate() {
            let (p, q) = (f[a], f[b]);
            let next = if p == z {
                Some(q)
            } else if q == z {
                Some(p)
            } else {
                None
            };
            if let Some(nz) = next {
                if prev[nz].is_none() {
                    prev[nz] = Some((z, w));
                    queue.push_back(nz);
                }
            }
        }
    }
    if prev[d].is_none() {
        return Err(AlgebraError::NoPath { a, b, c, d });
    }
    let mut points = vec![d];
    let mut witnesses = Vec::new();
    let mut cur = d;
    while cur != c {
        let (p, w) = prev[cur].unwrap();
        witnesses.push(w);
        points.push(p);
        cur = p;
    }
    points.reverse();
    witnesses.reverse();
    Ok(InterpolantChain { points, witnesses })
}

/// Serialize the `a^[k]` matrix: header line, then one row per carrier
/// element with columns per lattice element.
pub fn format_table(table: &LatticeTable) -> String {
    let mut out = format!("table carrier={} lattice={}\n", table.carrier(), table.lattice().size());
    for (a, row) in table.matrix().into_iter().enumerate() {
        let cells: Vec<String> = row.into_iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("{a}: {}\n", cells.join(" ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn partition_meet_and_join() {
        let p = Partition::from_pairs(3, &[(0, 1)]);
        let q = Partition::from_pairs(3, &[(1, 2)]);
        assert_eq!(p.join(&q).unwrap(), Partition::all(3));
        let r = Partition::from_pairs(4, &[(0, 1), (2, 3)]);
        let s = Partition::from_pairs(4, &[(0, 2), (1, 3)]);
        assert_eq!(r.meet(&s).unwrap(), Partition::identity(4));
        let id = Partition::identity(4);
        assert_eq!(r.meet(&id).unwrap(), id);
    }

    #[test]
    fn principal_equivalence_cases() {
        assert_eq!(principal_equivalence(4, 1, 1), Partition::identity(4));
        let p = principal_equivalence(4, 0, 3);
        assert!(p.same(0, 3) && !p.same(1, 2) && !p.same(0, 1));
    }

    #[test]
    fn all_partitions_bell_numbers() {
        assert_eq!(all_partitions(3).len(), 5);
        assert_eq!(all_partitions(4).len(), 15);
        assert_eq!(all_partitions(5).len(), 52);
    }

    #[test]
    fn congruences_of_free_algebra() {
        // No operations: every partition is a congruence.
        let alg = UnaryAlgebra::new(3, vec![]).unwrap();
        assert_eq!(congruence_lattice(&alg).unwrap().len(), 5);
    }

    #[test]
    fn congruences_of_constant_algebra() {
        let alg = UnaryAlgebra::new(2, vec![vec![0, 0]]).unwrap();
        let congs = congruence_lattice(&alg).unwrap();
        assert_eq!(congs.len(), 2);
    }

    #[test]
    fn more_ops_fewer_congruences() {
        // A ⊆ B (more ops) implies Con A ⊇ Con B.
        let f = vec![1, 2, 0];
        let g = vec![0, 0, 2];
        let a = UnaryAlgebra::new(3, vec![f.clone()]).unwrap();
        let b = UnaryAlgebra::new(3, vec![f, g]).unwrap();
        let con_a = congruence_lattice(&a).unwrap();
        let con_b = congruence_lattice(&b).unwrap();
        for p in &con_b {
            assert!(con_a.contains(p));
        }
    }

    #[test]
    fn principal_congruence_cases() {
        let free = UnaryAlgebra::new(4, vec![]).unwrap();
        assert_eq!(principal_congruence(&free, 0, 3), principal_equivalence(4, 0, 3));
        // successor mod 3: closing (0,1) forces the all relation.
        let succ = UnaryAlgebra::new(3, vec![vec![1, 2, 0]]).unwrap();
        assert_eq!(principal_congruence(&succ, 0, 1), Partition::all(3));
        // Result is always a congruence containing (a,b).
        let alg = UnaryAlgebra::new(4, vec![vec![1, 1, 3, 3]]).unwrap();
        let p = principal_congruence(&alg, 0, 2);
        assert!(p.same(0, 2));
        assert!(alg.preserves(&p));
    }

    fn part_x2_table() -> LatticeTable {
        // Part({0,1}) as a table for the 2-element lattice.
        let two = catalog::two_chain();
        LatticeTable::new(two, vec![Partition::all(2), Partition::identity(2)]).unwrap()
    }

    #[test]
    fn golden_two_element_table() {
        let t = part_x2_table();
        assert_eq!(t.entry(0, 0), 0);
        assert_eq!(t.entry(0, 1), 0);
        assert_eq!(t.entry(1, 1), 1);
        assert_eq!(t.entry(1, 0), 0);
    }

    #[test]
    fn endomorphisms_of_part_x2() {
        let t = part_x2_table();
        let ends = endomorphisms(&t).unwrap();
        assert_eq!(ends.len(), 4);
        assert!(ends.contains(&vec![0, 1]));
        // Closed under composition.
        for f in &ends {
            for g in &ends {
                let comp: Vec<usize> = (0..2).map(|x| g[f[x]]).collect();
                assert!(ends.contains(&comp));
            }
        }
    }

    #[test]
    fn end_principal_with_identity_only() {
        let id = vec![0, 1, 2, 3];
        assert_eq!(end_principal(4, &[id.clone()], 1, 3), principal_equivalence(4, 1, 3));
        assert_eq!(end_principal(4, &[id], 2, 2), Partition::identity(4));
    }

    #[test]
    fn end_principal_subset_of_c_theta() {
        let alg = UnaryAlgebra::new(4, vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]]).unwrap();
        let t = con_table(&alg).unwrap();
        let ends = endomorphisms(&t).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let e = end_principal(4, &ends, a, b);
                let c = c_theta(&t, a, b);
                assert!(e.subset_of(&c), "End({a},{b}) must sit inside C({a},{b})");
            }
        }
    }

    #[test]
    fn c_theta_cases() {
        let t = part_x2_table();
        assert_eq!(c_theta(&t, 0, 0), Partition::identity(2));
        assert_eq!(c_theta(&t, 0, 1), Partition::all(2));
        let p = c_theta(&t, 0, 1);
        assert!(principal_equivalence(2, 0, 1).subset_of(&p));
    }

    #[test]
    fn part_x2_is_malcev_homogeneous() {
        let t = part_x2_table();
        let ends = endomorphisms(&t).unwrap();
        let report = is_malcev_homogeneous(&t, &ends, EndSource::Exhaustive);
        assert!(report.homogeneous);
    }

    #[test]
    fn single_point_carrier_vacuous() {
        let one = crate::lattice::FiniteLattice::build(1, &[]).unwrap();
        let t = LatticeTable::new(one, vec![Partition::identity(1)]);
        // rel(0) must be both identity and all on one point: fine.
        let t = t.unwrap();
        let ends = endomorphisms(&t).unwrap();
        assert!(is_malcev_homogeneous(&t, &ends, EndSource::Exhaustive).homogeneous);
    }

    #[test]
    fn con_a_homogeneous_with_verified_chains() {
        let alg = UnaryAlgebra::new(3, vec![vec![0, 0, 2]]).unwrap();
        let t = con_table(&alg).unwrap();
        let ends = endomorphisms(&t).unwrap();
        let report = is_malcev_homogeneous(&t, &ends, EndSource::Exhaustive);
        assert!(report.homogeneous);
        let n = t.carrier();
        for a in 0..n {
            for b in 0..n {
                let e = end_principal(n, &ends, a, b);
                for c in 0..n {
                    for d in 0..n {
                        if e.same(c, d) {
                            let chain = homogeneity_interpolants(n, &ends, a, b, c, d).unwrap();
                            assert!(chain.verify(&ends, a, b));
                            assert_eq!(*chain.points.first().unwrap(), c);
                            assert_eq!(*chain.points.last().unwrap(), d);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn interpolants_trivial_cases() {
        let ends = vec![vec![0usize, 1, 2]];
        let chain = homogeneity_interpolants(3, &ends, 0, 1, 2, 2).unwrap();
        assert_eq!(chain.points, vec![2]);
        let chain = homogeneity_interpolants(3, &ends, 0, 1, 0, 1).unwrap();
        assert!(chain.verify(&ends, 0, 1));
        assert!(homogeneity_interpolants(3, &ends, 0, 1, 0, 2).is_err());
    }

    #[test]
    fn con_table_respects_join_law() {
        let alg = UnaryAlgebra::new(4, vec![vec![0, 0, 2, 2]]).unwrap();
        let t = con_table(&alg).unwrap();
        let lat = t.lattice();
        for a in lat.elements() {
            for b in lat.elements() {
                assert_eq!(*t.rel(lat.join(a, b)), t.rel(a).meet(t.rel(b)).unwrap());
            }
        }
        // Congruence set closed under meet and join of partitions.
        let congs = congruence_lattice(&alg).unwrap();
        for p in &congs {
            for q in &congs {
                assert!(congs.contains(&p.meet(q).unwrap()));
                assert!(congs.contains(&p.join(q).unwrap()));
            }
        }
    }
}
