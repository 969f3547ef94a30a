//! Finite trees between string spaces: partial order-isomorphic maps with
//! level-uniform lengths, their focal/plateau structure, and the three
//! extension types (grow / create / combine plateaus) used by every
//! strategy in the construction.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeError {
    NotInDomain { string: Vec<usize> },
    LengthMismatch,
    PreconditionFailed { ty: u8, detail: String },
    Malformed(String),
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::NotInDomain { string } => write!(f, "string {string:?} not in domain"),
            TreeError::LengthMismatch => write!(f, "length mismatch"),
            TreeError::PreconditionFailed { ty, detail } => {
                write!(f, "type {ty} extension precondition failed: {detail}")
            }
            TreeError::Malformed(msg) => write!(f, "malformed tree: {msg}"),
        }
    }
}

impl std::error::Error for TreeError {}

/// Stage carrier sizes for string membership; levels beyond the profile
/// repeat the last carrier (ramified arrays pad the same way).
pub trait Carriers {
    fn carrier_size(&self, level: usize) -> usize;

    fn admits(&self, s: &[usize]) -> bool {
        s.iter().enumerate().all(|(j, &v)| v < self.carrier_size(j))
    }
}

/// Explicit carrier profile with repeat-last padding.
#[derive(Clone, Debug)]
pub struct CappedCarriers {
    pub sizes: Vec<usize>,
}

impl Carriers for CappedCarriers {
    fn carrier_size(&self, level: usize) -> usize {
        self.sizes[level.min(self.sizes.len() - 1)]
    }
}

impl Carriers for crate::pudlak::PudlakTables {
    fn carrier_size(&self, level: usize) -> usize {
        self.stage_size(level)
    }
}

/// Carriers shifted by an offset: the string space seen by an Ext subtree
/// re-rooted at a length-`offset` string.
#[derive(Clone, Debug)]
pub struct Shifted<C> {
    pub inner: C,
    pub offset: usize,
}

impl<C: Carriers> Carriers for Shifted<C> {
    fn carrier_size(&self, level: usize) -> usize {
        self.inner.carrier_size(level + self.offset)
    }
}

/// A finite tree: an explicit domain → image map over interned strings,
/// with an inverse index for image lookups.
#[derive(Clone, Default)]
pub struct TreeMap {
    map: BTreeMap<Vec<usize>, Vec<usize>>,
    inv: BTreeMap<Vec<usize>, Vec<usize>>,
}

impl PartialEq for TreeMap {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map
    }
}

impl Eq for TreeMap {}

impl fmt::Debug for TreeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreeMap({} nodes", self.map.len())?;
        if let Some(h) = self.height() {
            write!(f, ", ht={h}")?;
        }
        write!(f, ")")
    }
}

impl TreeMap {
    pub fn empty() -> TreeMap {
        TreeMap::default()
    }

    pub fn rooted(image: Vec<usize>) -> TreeMap {
        let mut t = TreeMap::default();
        t.insert(Vec::new(), image);
        t
    }

    /// The full identity tree on strings of length ≤ depth.
    pub fn identity(carriers: &dyn Carriers, depth: usize) -> TreeMap {
        let mut out = TreeMap::default();
        let mut frontier = vec![Vec::new()];
        out.insert(Vec::new(), Vec::new());
        for level in 0..depth {
            let mut next = Vec::new();
            for s in frontier {
                for a in 0..carriers.carrier_size(level) {
                    let mut t: Vec<usize> = s.clone();
                    t.push(a);
                    out.insert(t.clone(), t.clone());
                    next.push(t);
                }
            }
            frontier = next;
        }
        out
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, dom: &[usize]) -> Option<&Vec<usize>> {
        self.map.get(dom)
    }

    pub fn insert(&mut self, dom: Vec<usize>, image: Vec<usize>) {
        if let Some(old) = self.map.insert(dom.clone(), image.clone()) {
            self.inv.remove(&old);
        }
        self.inv.insert(image, dom);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &Vec<usize>)> {
        self.map.iter()
    }

    pub fn root_image(&self) -> Option<&Vec<usize>> {
        self.map.get(&Vec::new() as &[usize] as &[usize] as _)
    }

    pub fn max_dom_len(&self) -> usize {
        self.map.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    /// Height: the largest image length (undefined on the empty tree).
    pub fn height(&self) -> Option<usize> {
        self.map.values().map(|v| v.len()).max()
    }

    /// σ ⊂ T: σ is an image string of T.
    pub fn on_tree(&self, s: &[usize]) -> bool {
        self.inv.contains_key(s)
    }

    /// σ is compatible with T: some image extends σ.
    pub fn compatible(&self, s: &[usize]) -> bool {
        self.map.values().any(|v| v.len() >= s.len() && v[..s.len()] == *s)
    }

    pub fn preimage(&self, image: &[usize]) -> Option<&Vec<usize>> {
        self.inv.get(image)
    }

    pub fn images(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.map.values()
    }

    /// Terminal domain strings (no proper extension in the domain).
    pub fn terminals(&self) -> Vec<&Vec<usize>> {
        self.map
            .keys()
            .filter(|k| {
                let mut lo = (*k).clone();
                lo.push(0);
                !matches!(
                    self.map.range(lo..).next(),
                    Some((next, _)) if next.len() > k.len() && next[..k.len()] == ***k
                )
            })
            .collect()
    }

    /// T ⊆ other as subtree: every image of T is an image of other.
    pub fn subtree_of(&self, other: &TreeMap) -> bool {
        self.map.values().all(|v| other.on_tree(v))
    }

    /// Structural validity: prefix-closed domain, level-uniform image
    /// lengths, and ⟨dom,⊆⟩ ≅ ⟨ran,⊆⟩.
    pub fn validate(&self, dom_carriers: &dyn Carriers) -> Result<(), TreeError> {
        for k in self.map.keys() {
            if !k.is_empty() {
                let parent = &k[..k.len() - 1];
                if !self.map.contains_key(parent) {
                    return Err(TreeError::Malformed(format!("domain not prefix-closed at {k:?}")));
                }
            }
            if !dom_carriers.admits(k) {
                return Err(TreeError::Malformed(format!("{k:?} outside the string space")));
            }
        }
        let mut level_len: BTreeMap<usize, usize> = BTreeMap::new();
        for (k, v) in &self.map {
            match level_len.get(&k.len()) {
                Some(&l) if l != v.len() => {
                    return Err(TreeError::Malformed(format!(
                        "level {} has mixed image lengths",
                        k.len()
                    )))
                }
                None => {
                    level_len.insert(k.len(), v.len());
                }
                _ => {}
            }
        }
        let entries: Vec<(&Vec<usize>, &Vec<usize>)> = self.map.iter().collect();
        for (i, (k1, v1)) in entries.iter().enumerate() {
            for (k2, v2) in entries.iter().skip(i + 1) {
                let dom_sub = k1.len() <= k2.len() && k2[..k1.len()] == ***k1;
                let ran_sub = v1.len() <= v2.len() && v2[..v1.len()] == ***v1;
                let dom_sup = k2.len() <= k1.len() && k1[..k2.len()] == ***k2;
                let ran_sup = v2.len() <= v1.len() && v1[..v2.len()] == ***v2;
                if dom_sub != ran_sub || dom_sup != ran_sup {
                    return Err(TreeError::Malformed(format!(
                        "order isomorphism fails at {k1:?}/{k2:?}"
                    )));
                }
                if v1 == v2 {
                    return Err(TreeError::Malformed("image strings repeat".into()));
                }
            }
        }
        Ok(())
    }
}

/// Structural analysis of a tree: levels, focal structure, plateaus, and
/// weak uniformity.
#[derive(Clone, Debug, Default)]
pub struct TreeAnalysis {
    /// Image-length interval per domain level, including level -1 when the
    /// root image is nonempty (stored first as (0, |T(∅)|)).
    pub levels: Vec<(usize, usize)>,
    /// Preimages of potential focal points, by length.
    pub potential_focal: Vec<Vec<usize>>,
    /// Preimages of focal points (potential + properly extended).
    pub focal: Vec<Vec<usize>>,
    /// Image lengths of the focal points.
    pub focal_lengths: Vec<usize>,
    /// Image-length intervals of the plateaus; the last one ends at ht(T).
    pub plateaus: Vec<(usize, usize)>,
    pub height: Option<usize>,
    pub weakly_uniform: bool,
    /// A missing string witnessing a non-full plateau.
    pub uniformity_witness: Option<Vec<usize>>,
    /// Is the region above the last focal preimage full to the top?
    pub last_plateau_full: bool,
}

/// Focal structure, computed in one descending-length sweep: for each
/// length L, the longest common prefix of all domain strings longer than L.
pub struct FocalInfo {
    lcp_above: Vec<Option<Vec<usize>>>,
}

impl FocalInfo {
    pub fn new(tree: &TreeMap) -> FocalInfo {
        let max_len = tree.max_dom_len();
        let mut lcp_above: Vec<Option<Vec<usize>>> = vec![None; max_len + 1];
        let mut running: Option<Vec<usize>> = None;
        for len in (0..max_len).rev() {
            for (k, _) in tree.iter() {
                if k.len() == len + 1 {
                    running = Some(match running.take() {
                        None => k.clone(),
                        Some(r) => {
                            let common =
                                r.iter().zip(k.iter()).take_while(|(a, b)| a == b).count();
                            r[..common].to_vec()
                        }
                    });
                }
            }
            lcp_above[len] = running.clone();
        }
        FocalInfo { lcp_above }
    }

    /// Every strictly longer domain string passes through `dom`.
    /// (Terminal strings qualify vacuously.)
    pub fn is_potential(&self, dom: &[usize]) -> bool {
        match self.lcp_above.get(dom.len()) {
            None | Some(None) => true,
            Some(Some(lcp)) => lcp.len() >= dom.len() && lcp[..dom.len()] == *dom,
        }
    }

    pub fn is_focal(&self, dom: &[usize]) -> bool {
        matches!(self.lcp_above.get(dom.len()), Some(Some(_))) && self.is_potential(dom)
    }
}

/// A potential focal point: every strictly longer domain string passes
/// through it. (Terminal strings qualify vacuously.)
pub fn is_potential_focal(tree: &TreeMap, dom: &[usize]) -> bool {
    tree.iter().all(|(k, _)| {
        k.len() <= dom.len() || (k.len() > dom.len() && k[..dom.len()] == *dom)
    })
}

pub fn is_focal(tree: &TreeMap, dom: &[usize]) -> bool {
    is_potential_focal(tree, dom)
        && tree.iter().any(|(k, _)| k.len() > dom.len() && k[..dom.len()] == *dom)
}

pub fn analyze_tree(tree: &TreeMap, dom_carriers: &dyn Carriers) -> TreeAnalysis {
    let mut out = TreeAnalysis::default();
    if tree.is_empty() {
        out.weakly_uniform = true;
        out.last_plateau_full = true;
        return out;
    }
    out.height = tree.height();
    // Levels.
    let mut by_len: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, v) in tree.iter() {
        by_len.insert(k.len(), v.len());
    }
    let root_len = by_len[&0];
    if root_len > 0 {
        out.levels.push((0, root_len));
    }
    let lens: Vec<(usize, usize)> = by_len.into_iter().collect();
    for w in lens.windows(2) {
        out.levels.push((w[0].1, w[1].1));
    }
    let info = FocalInfo::new(tree);
    for (k, v) in tree.iter() {
        if info.is_potential(k) {
            out.potential_focal.push(k.clone());
            if info.is_focal(k) {
                out.focal.push(k.clone());
                out.focal_lengths.push(v.len());
            }
        }
    }
    out.focal.sort_by_key(|k| k.len());
    out.focal_lengths.sort_unstable();
    out.focal_lengths.dedup();
    // Plateaus.
    let ht = out.height.unwrap();
    if out.focal_lengths.is_empty() {
        out.plateaus.push((0, ht));
    } else {
        for w in out.focal_lengths.windows(2) {
            out.plateaus.push((w[0], w[1]));
        }
        out.plateaus.push((*out.focal_lengths.last().unwrap(), ht));
    }
    // Weak uniformity: full branching between consecutive focal preimages
    // and above the last one.
    out.weakly_uniform = true;
    out.last_plateau_full = true;
    let mut anchors: Vec<Vec<usize>> = out.focal.clone();
    if anchors.is_empty() {
        anchors.push(Vec::new());
    }
    let max_len = tree.max_dom_len();
    for (i, anchor) in anchors.iter().enumerate() {
        let upper = if i + 1 < anchors.len() {
            anchors[i + 1].len()
        } else {
            max_len
        };
        // Every S-string above the anchor up to `upper` must be present.
        let mut frontier = vec![anchor.clone()];
        'region: while let Some(s) = frontier.pop() {
            if s.len() >= upper {
                continue;
            }
            for a in 0..dom_carriers.carrier_size(s.len()) {
                let mut t = s.clone();
                t.push(a);
                if tree.get(&t).is_none() {
                    out.weakly_uniform = false;
                    out.uniformity_witness = Some(t);
                    if i + 1 == anchors.len() {
                        out.last_plateau_full = false;
                    }
                    break 'region;
                }
                frontier.push(t);
            }
        }
    }
    out
}

/// The shortening of α on T: the longest focal point of T contained in α
/// (falling back to the root when T has no focal point yet).
pub fn shortening<'a>(tree: &'a TreeMap, alpha: &[usize]) -> Option<(&'a Vec<usize>, &'a Vec<usize>)> {
    let info = FocalInfo::new(tree);
    let mut best: Option<(&Vec<usize>, &Vec<usize>)> = None;
    for (k, v) in tree.iter() {
        let is_prefix = v.len() <= alpha.len() && alpha[..v.len()] == **v;
        if is_prefix && (info.is_focal(k) || k.is_empty()) {
            if best.map_or(true, |(bk, _)| k.len() > bk.len() || (k.len() == bk.len() && info.is_focal(k))) {
                if info.is_focal(k) || best.is_none() {
                    best = Some((k, v));
                }
            }
        }
    }
    best
}

/// The parent a tree extends inside: an explicit tree, or the identity
/// tree (never materialized).
pub enum Parent<'a> {
    Tree(&'a TreeMap),
    Identity,
}

impl Parent<'_> {
    fn preimage_of(&self, image: &[usize]) -> Option<Vec<usize>> {
        match self {
            Parent::Tree(t) => t.preimage(image).cloned(),
            Parent::Identity => Some(image.to_vec()),
        }
    }

    fn image_of(&self, dom: &[usize]) -> Option<Vec<usize>> {
        match self {
            Parent::Tree(t) => t.get(dom).cloned(),
            Parent::Identity => Some(dom.to_vec()),
        }
    }
}

/// A type 0/1/2 extension of `tree` for the image string `alpha` inside
/// `parent`:
///
/// * type 0 (grow plateau, deep and tall): full branching above α's
///   shortening, one level deeper than the current domain, stretched to
///   `target_height`;
/// * type 1 (create plateau, tall): the same above α itself, which must be
///   merely potential focal (terminal);
/// * type 2 (combine plateaus, deep): full branching above the shortening
///   at the current domain depth, no new level.
pub fn extend_type(
    tree: &TreeMap,
    parent: &Parent<'_>,
    alpha: &[usize],
    ty: u8,
    target_height: usize,
    dom_carriers: &dyn Carriers,
) -> Result<TreeMap, TreeError> {
    if tree.is_empty() {
        return Err(TreeError::PreconditionFailed { ty, detail: "tree is empty".into() });
    }
    let eta = tree
        .preimage(alpha)
        .ok_or(TreeError::NotInDomain { string: alpha.to_vec() })?
        .clone();
    let ht = tree.height().unwrap();
    let m = tree.max_dom_len();
    let base: Vec<usize> = match ty {
        0 | 2 => {
            if ty == 0 && alpha.len() >= ht {
                return Err(TreeError::PreconditionFailed {
                    ty,
                    detail: format!("|α|={} not below ht(T)={}", alpha.len(), ht),
                });
            }
            let (bk, _) = shortening(tree, alpha).ok_or(TreeError::PreconditionFailed {
                ty,
                detail: "no shortening".into(),
            })?;
            bk.clone()
        }
        1 => {
            if !is_potential_focal(tree, &eta) || is_focal(tree, &eta) {
                return Err(TreeError::PreconditionFailed {
                    ty,
                    detail: "α is not a merely potential focal point".into(),
                });
            }
            eta.clone()
        }
        _ => return Err(TreeError::PreconditionFailed { ty, detail: "unknown type".into() }),
    };
    if ty != 2 && target_height <= ht {
        return Err(TreeError::PreconditionFailed {
            ty,
            detail: format!("target height {target_height} not above ht(T)={ht}"),
        });
    }
    let depth = match ty {
        0 | 1 => m + 1,
        _ => m,
    };
    let mut out = tree.clone();
    // Fill lengths ascending, copying routes from siblings where they
    // exist and stretching terminals to the target height otherwise.
    for len in (base.len() + 1)..=depth {
        // Strings above `base` of this length, in S, not yet present.
        let mut todo: Vec<Vec<usize>> = Vec::new();
        let mut frontier = vec![base.clone()];
        while let Some(s) = frontier.pop() {
            if s.len() == len {
                if out.get(&s).is_none() {
                    todo.push(s);
                }
                continue;
            }
            if out.get(&s).is_none() {
                continue; // parent string missing: filled later in order
            }
            for a in (0..dom_carriers.carrier_size(s.len())).rev() {
                let mut t = s.clone();
                t.push(a);
                frontier.push(t);
            }
        }
        todo.sort();
        for lam in todo {
            let (lam_parent, a) = (lam[..lam.len() - 1].to_vec(), *lam.last().unwrap());
            let parent_image = match out.get(&lam_parent) {
                Some(v) => v.clone(),
                None => continue,
            };
            let xi = parent
                .preimage_of(&parent_image)
                .ok_or_else(|| TreeError::Malformed("tree not inside parent".into()))?;
            // Sibling route: least original-domain σ of the same length
            // with an a-child.
            let sibling = tree
                .iter()
                .filter(|(k, _)| k.len() == lam_parent.len())
                .find(|(k, _)| {
                    let mut ka = (*k).clone();
                    ka.push(a);
                    tree.get(&ka).is_some()
                })
                .map(|(k, v)| (k.clone(), v.clone()));
            let image = match sibling {
                Some((sib, sib_image)) => {
                    let mut sib_a = sib.clone();
                    sib_a.push(a);
                    let child_image = tree.get(&sib_a).unwrap();
                    let sib_xi = parent
                        .preimage_of(&sib_image)
                        .ok_or_else(|| TreeError::Malformed("sibling not inside parent".into()))?;
                    let child_xi = parent
                        .preimage_of(child_image)
                        .ok_or_else(|| TreeError::Malformed("sibling child not inside parent".into()))?;
                    let gamma = child_xi[sib_xi.len()..].to_vec();
                    let mut target = xi.clone();
                    target.extend_from_slice(&gamma);
                    parent.image_of(&target).ok_or_else(|| TreeError::PreconditionFailed {
                        ty,
                        detail: "parent plateau not full along the copied route".into(),
                    })?
                }
                None => {
                    // Stretch: ξ * a^n up to the target height.
                    let mut target = xi.clone();
                    let mut image;
                    loop {
                        target.push(a);
                        image = parent.image_of(&target).ok_or_else(|| {
                            TreeError::PreconditionFailed {
                                ty,
                                detail: "parent too short to stretch into".into(),
                            }
                        })?;
                        if image.len() >= target_height {
                            break;
                        }
                    }
                    if image.len() != target_height {
                        return Err(TreeError::PreconditionFailed {
                            ty,
                            detail: "parent levels overshoot the target height".into(),
                        });
                    }
                    image
                }
            };
            out.insert(lam, image);
        }
    }
    Ok(out)
}

/// Ext(T, ξ): the subtree of strings above the domain string ξ, re-rooted.
pub fn ext_subtree(tree: &TreeMap, xi: &[usize]) -> Result<TreeMap, TreeError> {
    if tree.get(xi).is_none() {
        return Err(TreeError::NotInDomain { string: xi.to_vec() });
    }
    let mut out = TreeMap::empty();
    for (k, v) in tree.iter() {
        if k.len() >= xi.len() && k[..xi.len()] == *xi {
            out.insert(k[xi.len()..].to_vec(), v.clone());
        }
    }
    Ok(out)
}

/// tr(σ→τ;ρ): τ on |τ| coordinates, then ρ up to |ρ|.
pub fn transfer(sigma: &[usize], tau: &[usize], rho: &[usize]) -> Result<Vec<usize>, TreeError> {
    if sigma.len() != tau.len() {
        return Err(TreeError::LengthMismatch);
    }
    if rho.len() < sigma.len() || rho[..sigma.len()] != *sigma {
        return Err(TreeError::PreconditionFailed { ty: 0, detail: "σ is not a prefix of ρ".into() });
    }
    let mut out = tau.to_vec();
    out.extend_from_slice(&rho[tau.len()..]);
    Ok(out)
}

/// T⁻¹(g): the longest domain string whose image is a prefix of g.
pub fn signature(tree: &TreeMap, g_prefix: &[usize]) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    let mut have = tree.get(&[] as &[usize]).is_some()
        && tree.get(&[] as &[usize]).map_or(false, |v| {
            v.len() <= g_prefix.len() && g_prefix[..v.len()] == **v
        });
    if !have {
        return best;
    }
    loop {
        let cur = best.clone();
        have = false;
        // At most one child continues along g.
        for (k, v) in tree.iter() {
            if k.len() == cur.len() + 1
                && k[..cur.len()] == cur
                && v.len() <= g_prefix.len()
                && g_prefix[..v.len()] == **v
            {
                best = k.clone();
                have = true;
                break;
            }
        }
        if !have {
            return best;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps(sizes: &[usize]) -> CappedCarriers {
        CappedCarriers { sizes: sizes.to_vec() }
    }

    #[test]
    fn identity_tree_structure() {
        let c = caps(&[2, 3]);
        let id3 = TreeMap::identity(&c, 3);
        id3.validate(&c).unwrap();
        let a = analyze_tree(&id3, &c);
        // Only the root path is focal; one plateau spanning the whole tree.
        assert_eq!(a.focal, vec![Vec::<usize>::new()]);
        assert_eq!(a.plateaus, vec![(0, 3)]);
        assert!(a.weakly_uniform);
        // Terminal nodes are merely potential focal points.
        assert!(is_potential_focal(&id3, &[0, 0, 0]));
        assert!(!is_focal(&id3, &[0, 0, 0]));
        assert!(!is_potential_focal(&id3, &[0]));
    }

    #[test]
    fn single_branch_tree() {
        let c = caps(&[3]);
        let mut t = TreeMap::rooted(vec![]);
        t.insert(vec![1], vec![1]);
        t.insert(vec![1, 1], vec![1, 1]);
        // Every node is a potential focal point; internal ones are focal.
        for (k, _) in t.iter() {
            assert!(is_potential_focal(&t, k));
        }
        assert!(is_focal(&t, &[]));
        assert!(is_focal(&t, &[1]));
        assert!(!is_focal(&t, &[1, 1]));
        // But the tree is not weakly uniform: level 0 and 1 are not full.
        let a = analyze_tree(&t, &c);
        assert!(!a.weakly_uniform);
        assert!(a.uniformity_witness.is_some());
    }

    #[test]
    fn deleted_node_breaks_uniformity() {
        let c = caps(&[2, 2]);
        let full = TreeMap::identity(&c, 2);
        let a = analyze_tree(&full, &c);
        assert!(a.weakly_uniform);
        let mut broken = TreeMap::empty();
        for (k, v) in full.iter() {
            if k.as_slice() != [1, 0] {
                broken.insert(k.clone(), v.clone());
            }
        }
        let a = analyze_tree(&broken, &c);
        assert!(!a.weakly_uniform);
        assert_eq!(a.uniformity_witness, Some(vec![1, 0]));
    }

    #[test]
    fn type1_extension_on_root_only_tree() {
        // The first growth of an Init-style tree: tall extension for the
        // root image inside the identity parent.
        let c = caps(&[2, 5, 5]);
        let t = TreeMap::rooted(vec![]);
        let out = extend_type(&t, &Parent::Identity, &[], 1, 3, &c).unwrap();
        out.validate(&c).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out.get(&[0]).unwrap(), &vec![0, 0, 0]);
        assert_eq!(out.get(&[1]).unwrap(), &vec![1, 1, 1]);
        assert_eq!(out.height(), Some(3));
        // The root became focal; the new strings are merely potential.
        assert!(is_focal(&out, &[]));
        assert!(is_potential_focal(&out, &[0]) && !is_focal(&out, &[0]));
        let a = analyze_tree(&out, &c);
        assert!(a.weakly_uniform);
    }

    #[test]
    fn type1_then_type1_narrows() {
        let c = caps(&[2, 3, 3, 3]);
        let t = TreeMap::rooted(vec![]);
        let t = extend_type(&t, &Parent::Identity, &[], 1, 2, &c).unwrap();
        // Extend above image [0,0] = T(⟨0⟩): a merely potential focal point.
        let t2 = extend_type(&t, &Parent::Identity, &[0, 0], 1, 4, &c).unwrap();
        t2.validate(&c).unwrap();
        // ⟨0⟩ became focal; ⟨1⟩ stays terminal at its old level and, being
        // off the active branch, stops being potential focal.
        assert!(is_focal(&t2, &[0]));
        assert!(!is_potential_focal(&t2, &[1]));
        assert_eq!(t2.get(&[0, 2]).unwrap(), &vec![0, 0, 2, 2]);
        assert_eq!(t2.get(&[1]).unwrap(), &vec![1, 1]);
        let a = analyze_tree(&t2, &c);
        assert!(a.weakly_uniform, "witness: {:?}", a.uniformity_witness);
        assert_eq!(a.focal_lengths, vec![0, 2]);
        assert_eq!(a.plateaus, vec![(0, 2), (2, 4)]);
    }

    #[test]
    fn type1_requires_merely_potential() {
        let c = caps(&[2, 3]);
        let t = TreeMap::rooted(vec![]);
        let t = extend_type(&t, &Parent::Identity, &[], 1, 2, &c).unwrap();
        // The root is now focal: re-extending it as type 1 must fail.
        let err = extend_type(&t, &Parent::Identity, &[], 1, 3, &c).unwrap_err();
        assert!(matches!(err, TreeError::PreconditionFailed { ty: 1, .. }));
    }

    #[test]
    fn type0_deepens_and_stretches() {
        let c = caps(&[2, 3, 3, 3, 3]);
        let t = TreeMap::rooted(vec![]);
        let t = extend_type(&t, &Parent::Identity, &[], 1, 2, &c).unwrap();
        let t = extend_type(&t, &Parent::Identity, &[0, 0], 1, 3, &c).unwrap();
        // Deep-and-tall for α = image of ⟨0⟩ (below the top), whose
        // shortening is ⟨0⟩ itself.
        let alpha = t.get(&[0]).unwrap().clone();
        assert!(alpha.len() < t.height().unwrap());
        let t0 = extend_type(&t, &Parent::Identity, &alpha, 0, 5, &c).unwrap();
        t0.validate(&c).unwrap();
        assert_eq!(t0.height(), Some(5));
        // The ⟨1⟩ branch is untouched; a new level appears above ⟨0⟩.
        assert_eq!(t0.get(&[1]).unwrap(), &vec![1, 1]);
        assert!(t0.get(&[0, 1, 2]).is_some());
        assert_eq!(t0.get(&[0, 1, 2]).unwrap().len(), 5);
        let a = analyze_tree(&t0, &c);
        assert!(a.weakly_uniform, "witness: {:?}", a.uniformity_witness);
    }

    #[test]
    fn type0_rejects_top_strings() {
        let c = caps(&[2, 3]);
        let t = TreeMap::rooted(vec![]);
        let t = extend_type(&t, &Parent::Identity, &[], 1, 2, &c).unwrap();
        let top = t.get(&[0]).unwrap().clone();
        // |α| = ht(T): Def 23(ii) forbids a deep-and-tall request here.
        let err = extend_type(&t, &Parent::Identity, &top, 0, 3, &c).unwrap_err();
        assert!(matches!(err, TreeError::PreconditionFailed { ty: 0, .. }));
    }

    #[test]
    fn type2_combines_without_new_level() {
        let c = caps(&[2, 3, 3, 3]);
        let t = TreeMap::rooted(vec![]);
        let t = extend_type(&t, &Parent::Identity, &[], 1, 2, &c).unwrap();
        let t = extend_type(&t, &Parent::Identity, &[0, 0], 1, 4, &c).unwrap();
        // α on the stale ⟨1⟩ branch: its shortening is the root, so the
        // combine fills sideways above ∅ up to the current depth.
        let alpha = t.get(&[1]).unwrap().clone();
        let before_max = t.max_dom_len();
        let t2 = extend_type(&t, &Parent::Identity, &alpha, 2, 4, &c).unwrap();
        t2.validate(&c).unwrap();
        assert_eq!(t2.max_dom_len(), before_max);
        // Sideways fullness: ⟨1,a⟩ now exist, copied along sibling routes.
        assert!(t2.get(&[1, 0]).is_some() && t2.get(&[1, 2]).is_some());
        assert_eq!(t2.get(&[1, 2]).unwrap(), &vec![1, 1, 2, 2]);
        // The old focal point ⟨0⟩ is no longer focal: plateaus combined.
        assert!(!is_focal(&t2, &[0]));
        let a = analyze_tree(&t2, &c);
        assert!(a.weakly_uniform, "witness: {:?}", a.uniformity_witness);
    }

    #[test]
    fn extend_within_tree_parent() {
        // Subtree growth inside an explicit parent: copy routes sideways.
        let c = caps(&[2, 3, 3, 3]);
        let parent = {
            let t = TreeMap::rooted(vec![]);
            let t = extend_type(&t, &Parent::Identity, &[], 1, 2, &c).unwrap();
            extend_type(&t, &Parent::Identity, &[0, 0], 1, 4, &c).unwrap()
        };
        let sub = TreeMap::rooted(vec![0, 0]);
        // Tall extension of the subtree for its root image within parent.
        let out = extend_type(&sub, &Parent::Tree(&parent), &[0, 0], 1, 4, &c).unwrap();
        out.validate(&c).unwrap();
        assert!(out.subtree_of(&parent));
        assert_eq!(out.height(), Some(4));
    }

    #[test]
    fn ext_transfer_signature() {
        let c = caps(&[2, 3, 3]);
        let id = TreeMap::identity(&c, 3);
        // Ext at the root is the tree itself.
        assert_eq!(ext_subtree(&id, &[]).unwrap(), id);
        let sub = ext_subtree(&id, &[1]).unwrap();
        assert_eq!(sub.get(&[] as &[usize]).unwrap(), &vec![1]);
        assert_eq!(sub.get(&[2]).unwrap(), &vec![1, 2]);
        // tr(σ→σ;ρ) = ρ.
        assert_eq!(transfer(&[1], &[1], &[1, 2, 0]).unwrap(), vec![1, 2, 0]);
        let tr = transfer(&[0], &[1], &[0, 2, 2]).unwrap();
        assert_eq!(tr, vec![1, 2, 2]);
        assert!(tr.len() == 3 && tr[..1] == [1]);
        // signature on the identity tree returns the prefix itself.
        assert_eq!(signature(&id, &[1, 2, 0, 0]), vec![1, 2, 0]);
    }
}
