//! Finite bounded lattices on indexed carriers, `<0,1,∨>`-homomorphisms
//! between them, duals, and the Galois adjoint of a homomorphism.
//!
//! Lattices are stored with full order/join/meet tables precomputed at build
//! time; carriers are small (n ≤ ~12) throughout, so every downstream check
//! is a table lookup.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeError {
    NotAPartialOrder { a: usize, b: usize, reason: &'static str },
    NotALattice { a: usize, b: usize, kind: BoundKind },
    Unbounded { missing: BoundKind },
    IndexOutOfRange { index: usize, carrier: usize },
    NotAHomomorphism { a: usize, b: usize, reason: &'static str },
    AdjointPropertyFailed(u8),
    Parse { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Lub,
    Glb,
    Bottom,
    Top,
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::NotAPartialOrder { a, b, reason } => {
                write!(f, "not a partial order at ({a},{b}): {reason}")
            }
            LatticeError::NotALattice { a, b, kind } => {
                let what = match kind {
                    BoundKind::Lub => "least upper bound",
                    BoundKind::Glb => "greatest lower bound",
                    _ => "bound",
                };
                write!(f, "pair ({a},{b}) has no unique {what}")
            }
            LatticeError::Unbounded { missing } => {
                let what = match missing {
                    BoundKind::Bottom => "least element",
                    _ => "greatest element",
                };
                write!(f, "order has no {what}")
            }
            LatticeError::IndexOutOfRange { index, carrier } => {
                write!(f, "index {index} out of range for carrier {carrier}")
            }
            LatticeError::NotAHomomorphism { a, b, reason } => {
                write!(f, "map is not a <0,1,∨>-homomorphism at ({a},{b}): {reason}")
            }
            LatticeError::AdjointPropertyFailed(k) => {
                write!(f, "adjoint property ({k}) failed; source map is not a <0,1,∨>-homomorphism")
            }
            LatticeError::Parse { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl std::error::Error for LatticeError {}

/// A finite bounded lattice on carrier `0..n`.
///
/// After [`FiniteLattice::build`] the bottom element is always index 0
/// (inputs are re-indexed if needed) so serialized fixtures are stable.
/// [`FiniteLattice::dual`] does not re-canonicalize, so `dual(dual(L)) == L`
/// holds table-for-table.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteLattice {
    n: usize,
    leq: Vec<bool>,
    join: Vec<usize>,
    meet: Vec<usize>,
    bottom: usize,
    top: usize,
    labels: Option<Vec<String>>,
}

impl fmt::Debug for FiniteLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteLattice(n={}, bottom={}, top={})", self.n, self.bottom, self.top)
    }
}

impl FiniteLattice {
    /// Build a lattice from order pairs (covers or the full order; the
    /// relation is reflexively and transitively closed internally).
    pub fn build(n: usize, order_pairs: &[(usize, usize)]) -> Result<Self, LatticeError> {
        if n == 0 {
            return Err(LatticeError::Unbounded { missing: BoundKind::Bottom });
        }
        for &(a, b) in order_pairs {
            let bad = if a >= n { a } else { b };
            if a >= n || b >= n {
                return Err(LatticeError::IndexOutOfRange { index: bad, carrier: n });
            }
        }
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(a, b) in order_pairs {
            leq[a * n + b] = true;
        }
        // Warshall closure.
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a != b && leq[a * n + b] && leq[b * n + a] {
                    return Err(LatticeError::NotAPartialOrder {
                        a,
                        b,
                        reason: "antisymmetry fails",
                    });
                }
            }
        }
        let mut lat = FiniteLattice {
            n,
            leq,
            join: vec![0; n * n],
            meet: vec![0; n * n],
            bottom: 0,
            top: 0,
            labels: None,
        };
        lat.bottom = lat
            .find_bound(BoundKind::Bottom)
            .ok_or(LatticeError::Unbounded { missing: BoundKind::Bottom })?;
        lat.top = lat
            .find_bound(BoundKind::Top)
            .ok_or(LatticeError::Unbounded { missing: BoundKind::Top })?;
        lat.fill_tables()?;
        if lat.bottom != 0 {
            lat = lat.swapped(0, lat.bottom);
        }
        Ok(lat)
    }

    fn find_bound(&self, kind: BoundKind) -> Option<usize> {
        (0..self.n).find(|&c| {
            (0..self.n).all(|x| match kind {
                BoundKind::Bottom => self.leq_raw(c, x),
                _ => self.leq_raw(x, c),
            })
        })
    }

    fn leq_raw(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.n + b]
    }

    fn fill_tables(&mut self) -> Result<(), LatticeError> {
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                let ubs: Vec<usize> = (0..n)
                    .filter(|&c| self.leq_raw(a, c) && self.leq_raw(b, c))
                    .collect();
                let lub = ubs
                    .iter()
                    .copied()
                    .find(|&u| ubs.iter().all(|&c| self.leq_raw(u, c)));
                match lub {
                    Some(u) => self.join[a * n + b] = u,
                    None => return Err(LatticeError::NotALattice { a, b, kind: BoundKind::Lub }),
                }
                let lbs: Vec<usize> = (0..n)
                    .filter(|&c| self.leq_raw(c, a) && self.leq_raw(c, b))
                    .collect();
                let glb = lbs
                    .iter()
                    .copied()
                    .find(|&g| lbs.iter().all(|&c| self.leq_raw(c, g)));
                match glb {
                    Some(g) => self.meet[a * n + b] = g,
                    None => return Err(LatticeError::NotALattice { a, b, kind: BoundKind::Glb }),
                }
            }
        }
        Ok(())
    }

    /// Relabel by swapping two indices; tables are rebuilt accordingly.
    fn swapped(&self, i: usize, j: usize) -> FiniteLattice {
        let n = self.n;
        let map = |x: usize| {
            if x == i {
                j
            } else if x == j {
                i
            } else {
                x
            }
        };
        let mut out = FiniteLattice {
            n,
            leq: vec![false; n * n],
            join: vec![0; n * n],
            meet: vec![0; n * n],
            bottom: map(self.bottom),
            top: map(self.top),
            labels: self.labels.as_ref().map(|ls| {
                let mut ls2 = ls.clone();
                ls2.swap(i, j);
                ls2
            }),
        };
        for a in 0..n {
            for b in 0..n {
                out.leq[map(a) * n + map(b)] = self.leq_raw(a, b);
                out.join[map(a) * n + map(b)] = map(self.join[a * n + b]);
                out.meet[map(a) * n + map(b)] = map(self.meet[a * n + b]);
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq_raw(a, b)
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.n + b]
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.n + b]
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.n
    }

    /// Elements other than the top; edge colors of Pudlák graphs live here.
    pub fn below_top(&self) -> Vec<usize> {
        (0..self.n).filter(|&x| x != self.top).collect()
    }

    pub fn set_labels(&mut self, labels: Vec<String>) {
        assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
    }

    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(ls) => ls[x].clone(),
            None => x.to_string(),
        }
    }

    /// The dual lattice: order reversed, join/meet swapped, bounds swapped.
    pub fn dual(&self) -> FiniteLattice {
        let n = self.n;
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = self.leq_raw(b, a);
            }
        }
        FiniteLattice {
            n,
            leq,
            join: self.meet.clone(),
            meet: self.join.clone(),
            bottom: self.top,
            top: self.bottom,
            labels: self.labels.clone(),
        }
    }

    /// Exhaustive re-check of all lattice invariants; used by tests and by
    /// the `lattice check` command.
    pub fn verify(&self) -> Result<(), LatticeError> {
        let n = self.n;
        for a in 0..n {
            if !self.leq_raw(a, a) {
                return Err(LatticeError::NotAPartialOrder { a, b: a, reason: "not reflexive" });
            }
            if !self.leq_raw(self.bottom, a) || !self.leq_raw(a, self.top) {
                return Err(LatticeError::Unbounded { missing: BoundKind::Bottom });
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a != b && self.leq_raw(a, b) && self.leq_raw(b, a) {
                    return Err(LatticeError::NotAPartialOrder { a, b, reason: "antisymmetry fails" });
                }
                for c in 0..n {
                    if self.leq_raw(a, b) && self.leq_raw(b, c) && !self.leq_raw(a, c) {
                        return Err(LatticeError::NotAPartialOrder { a, b, reason: "not transitive" });
                    }
                }
                let j = self.join(a, b);
                if !self.leq_raw(a, j) || !self.leq_raw(b, j) {
                    return Err(LatticeError::NotALattice { a, b, kind: BoundKind::Lub });
                }
                for c in 0..n {
                    if self.leq_raw(a, c) && self.leq_raw(b, c) && !self.leq_raw(j, c) {
                        return Err(LatticeError::NotALattice { a, b, kind: BoundKind::Lub });
                    }
                }
                let m = self.meet(a, b);
                if !self.leq_raw(m, a) || !self.leq_raw(m, b) {
                    return Err(LatticeError::NotALattice { a, b, kind: BoundKind::Glb });
                }
                for c in 0..n {
                    if self.leq_raw(c, a) && self.leq_raw(c, b) && !self.leq_raw(c, m) {
                        return Err(LatticeError::NotALattice { a, b, kind: BoundKind::Glb });
                    }
                }
            }
        }
        Ok(())
    }
}

/// A `<0,1,∨>`-homomorphism between finite lattices, validated exhaustively
/// at construction.
#[derive(Clone, Debug)]
pub struct UslHomomorphism {
    pub source: FiniteLattice,
    pub target: FiniteLattice,
    map: Vec<usize>,
}

impl UslHomomorphism {
    pub fn new(
        source: FiniteLattice,
        target: FiniteLattice,
        map: Vec<usize>,
    ) -> Result<Self, LatticeError> {
        if map.len() != source.size() {
            return Err(LatticeError::IndexOutOfRange { index: map.len(), carrier: source.size() });
        }
        for &v in &map {
            if v >= target.size() {
                return Err(LatticeError::IndexOutOfRange { index: v, carrier: target.size() });
            }
        }
        if map[source.bottom()] != target.bottom() {
            return Err(LatticeError::NotAHomomorphism {
                a: source.bottom(),
                b: source.bottom(),
                reason: "bottom not preserved",
            });
        }
        if map[source.top()] != target.top() {
            return Err(LatticeError::NotAHomomorphism {
                a: source.top(),
                b: source.top(),
                reason: "top not preserved",
            });
        }
        for a in source.elements() {
            for b in source.elements() {
                if map[source.join(a, b)] != target.join(map[a], map[b]) {
                    return Err(LatticeError::NotAHomomorphism { a, b, reason: "join not preserved" });
                }
            }
        }
        Ok(UslHomomorphism { source, target, map })
    }

    pub fn identity(lat: &FiniteLattice) -> UslHomomorphism {
        UslHomomorphism {
            source: lat.clone(),
            target: lat.clone(),
            map: (0..lat.size()).collect(),
        }
    }

    pub fn apply(&self, a: usize) -> usize {
        self.map[a]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }
}

/// The Galois adjoint `φ* x = ⋁{a ∈ L⁰ | φ(a) ≤ x}` of a homomorphism,
/// together with the verified properties that downstream recoloring relies
/// on:
///
/// 1. `φ*` is a `<∧,1>`-homomorphism,
/// 2. `x < 1` implies `φ*x < 1`,
/// 3. `φ*` is injective on `φL⁰`,
/// 4. `a ≤ φ*x ⟺ φ*φa ≤ φ*x`.
#[derive(Clone, Debug)]
pub struct GaloisAdjoint {
    map: Vec<usize>,
}

impl GaloisAdjoint {
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }
}

pub fn galois_adjoint(phi: &UslHomomorphism) -> Result<GaloisAdjoint, LatticeError> {
    let l0 = &phi.source;
    let l1 = &phi.target;
    let mut map = vec![0usize; l1.size()];
    for x in l1.elements() {
        let mut acc = l0.bottom();
        for a in l0.elements() {
            if l1.leq(phi.apply(a), x) {
                acc = l0.join(acc, a);
            }
        }
        map[x] = acc;
    }
    // (1) <∧,1>-homomorphism.
    if map[l1.top()] != l0.top() {
        return Err(LatticeError::AdjointPropertyFailed(1));
    }
    for x in l1.elements() {
        for y in l1.elements() {
            if map[l1.meet(x, y)] != l0.meet(map[x], map[y]) {
                return Err(LatticeError::AdjointPropertyFailed(1));
            }
        }
    }
    // (2) x < 1 implies φ*x < 1.
    for x in l1.elements() {
        if x != l1.top() && map[x] == l0.top() {
            return Err(LatticeError::AdjointPropertyFailed(2));
        }
    }
    // (3) injective on φL⁰.
    for a in l0.elements() {
        for b in l0.elements() {
            if map[phi.apply(a)] == map[phi.apply(b)] && phi.apply(a) != phi.apply(b) {
                return Err(LatticeError::AdjointPropertyFailed(3));
            }
        }
    }
    // (4) a ≤ φ*x ⟺ φ*φa ≤ φ*x.
    for a in l0.elements() {
        for x in l1.elements() {
            let lhs = l0.leq(a, map[x]);
            let rhs = l0.leq(map[phi.apply(a)], map[x]);
            if lhs != rhs {
                return Err(LatticeError::AdjointPropertyFailed(4));
            }
        }
    }
    Ok(GaloisAdjoint { map })
}

/// Parse the lattice text format:
///
/// ```text
/// # comment
/// 5
/// 0 <= 1
/// 0 <= 2
/// label 0 bottom
/// ```
///
/// First non-comment line is the carrier size, then `i <= j` order lines
/// (covers or full order) and optional `label i name` lines.
pub fn parse_lattice(text: &str) -> Result<FiniteLattice, LatticeError> {
    let mut n: Option<usize> = None;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut labels: Vec<(usize, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if n.is_none() {
            let v = line.parse::<usize>().map_err(|_| LatticeError::Parse {
                line: lineno,
                message: format!("expected carrier size, got `{line}`"),
            })?;
            n = Some(v);
            continue;
        }
        if let Some(rest) = line.strip_prefix("label ") {
            let mut it = rest.splitn(2, ' ');
            let i = it
                .next()
                .and_then(|s| s.trim().parse::<usize>().ok())
                .ok_or_else(|| LatticeError::Parse {
                    line: lineno,
                    message: "expected `label <index> <name>`".into(),
                })?;
            let name = it.next().unwrap_or("").trim().to_string();
            labels.push((i, name));
            continue;
        }
        let mut it = line.split("<=");
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a.trim(), b.trim()),
            _ => {
                return Err(LatticeError::Parse {
                    line: lineno,
                    message: format!("expected `i <= j`, got `{line}`"),
                })
            }
        };
        let a = a.parse::<usize>().map_err(|_| LatticeError::Parse {
            line: lineno,
            message: format!("bad index `{a}`"),
        })?;
        let b = b.parse::<usize>().map_err(|_| LatticeError::Parse {
            line: lineno,
            message: format!("bad index `{b}`"),
        })?;
        pairs.push((a, b));
    }
    let n = n.ok_or(LatticeError::Parse { line: 0, message: "empty lattice file".into() })?;
    let mut lat = FiniteLattice::build(n, &pairs)?;
    if !labels.is_empty() {
        let mut ls: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        for (i, name) in labels {
            if i >= n {
                return Err(LatticeError::IndexOutOfRange { index: i, carrier: n });
            }
            ls[i] = name;
        }
        lat.set_labels(ls);
    }
    Ok(lat)
}

pub fn format_lattice(lat: &FiniteLattice) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n", lat.size()));
    for a in lat.elements() {
        for b in lat.elements() {
            if a != b && lat.leq(a, b) {
                // Emit covers only: keep files short.
                let is_cover = lat
                    .elements()
                    .all(|c| c == a || c == b || !(lat.leq(a, c) && lat.leq(c, b)));
                if is_cover {
                    out.push_str(&format!("{a} <= {b}\n"));
                }
            }
        }
    }
    if lat.labels.is_some() {
        for x in lat.elements() {
            out.push_str(&format!("label {x} {}\n", lat.label(x)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn two_chain() {
        let lat = FiniteLattice::build(2, &[(0, 1)]).unwrap();
        assert_eq!(lat.bottom(), 0);
        assert_eq!(lat.top(), 1);
        assert!(lat.leq(0, 1));
        assert!(!lat.leq(1, 0));
        lat.verify().unwrap();
    }

    #[test]
    fn m3_from_covers() {
        // n=5: 0 < a,b,c < 1 with the diamond covers; brute-force lub/glb
        // gives a∨b=1 and a∧b=0 for distinct atoms.
        let lat = catalog::m3();
        lat.verify().unwrap();
        for a in 1..4 {
            for b in 1..4 {
                if a != b {
                    assert_eq!(lat.join(a, b), lat.top());
                    assert_eq!(lat.meet(a, b), lat.bottom());
                }
            }
        }
    }

    #[test]
    fn missing_lub_is_rejected() {
        let err = FiniteLattice::build(3, &[(0, 1), (0, 2)]).unwrap_err();
        assert!(matches!(err, LatticeError::NotALattice { kind: BoundKind::Lub, .. } | LatticeError::Unbounded { .. }));
    }

    #[test]
    fn canonicalization_moves_bottom_to_zero() {
        // 2-chain given upside down: 1 < 0.
        let lat = FiniteLattice::build(2, &[(1, 0)]).unwrap();
        assert_eq!(lat.bottom(), 0);
        assert_eq!(lat.top(), 1);
    }

    #[test]
    fn dual_swaps_roles_and_is_involutive() {
        let two = FiniteLattice::build(2, &[(0, 1)]).unwrap();
        let d = two.dual();
        assert_eq!(d.bottom(), 1);
        assert_eq!(d.top(), 0);
        assert_eq!(d.dual(), two);

        let m3 = catalog::m3();
        assert_eq!(m3.dual().dual(), m3);
        // M3 is self-dual: same order profile after reindexing bottom/top.
        let dm3 = m3.dual();
        dm3.verify().unwrap();

        let n5 = catalog::n5();
        let dn5 = n5.dual();
        dn5.verify().unwrap();
        assert_eq!(dn5.dual(), n5);
    }

    #[test]
    fn join_law_exhaustive_on_catalog() {
        for lat in catalog::all_fixtures() {
            for a in lat.elements() {
                for b in lat.elements() {
                    let j = lat.join(a, b);
                    assert!(lat.leq(a, j) && lat.leq(b, j));
                    for c in lat.elements() {
                        if lat.leq(a, c) && lat.leq(b, c) {
                            assert!(lat.leq(j, c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_of_identity_is_identity() {
        let two = FiniteLattice::build(2, &[(0, 1)]).unwrap();
        let phi = UslHomomorphism::identity(&two);
        let adj = galois_adjoint(&phi).unwrap();
        assert_eq!(adj.map(), &[0, 1]);
    }

    #[test]
    fn adjoint_two_chain_into_m3() {
        let two = FiniteLattice::build(2, &[(0, 1)]).unwrap();
        let m3 = catalog::m3();
        let phi = UslHomomorphism::new(two, m3.clone(), vec![0, m3.top()]).unwrap();
        let adj = galois_adjoint(&phi).unwrap();
        // Every atom pulls back to 0; only the top pulls back to 1.
        for x in m3.elements() {
            if x == m3.top() {
                assert_eq!(adj.apply(x), 1);
            } else {
                assert_eq!(adj.apply(x), 0);
            }
        }
    }

    #[test]
    fn constant_to_top_is_not_a_homomorphism() {
        let two = FiniteLattice::build(2, &[(0, 1)]).unwrap();
        let err = UslHomomorphism::new(two.clone(), two, vec![1, 1]).unwrap_err();
        assert!(matches!(err, LatticeError::NotAHomomorphism { .. }));
    }

    #[test]
    fn adjoint_meet_law_small_carriers() {
        // φ*(x∧y) = φ*x ∧ φ*y exhaustively for every catalog hom fixture.
        for (phi, _) in catalog::hom_fixtures() {
            let adj = galois_adjoint(&phi).unwrap();
            let l1 = &phi.target;
            for x in l1.elements() {
                for y in l1.elements() {
                    assert_eq!(
                        adj.apply(l1.meet(x, y)),
                        phi.source.meet(adj.apply(x), adj.apply(y))
                    );
                }
            }
        }
    }

    #[test]
    fn lattice_file_roundtrip() {
        let m3 = catalog::m3();
        let text = format_lattice(&m3);
        let back = parse_lattice(&text).unwrap();
        assert_eq!(back, m3);
    }
}
