//! File formats beyond the lattice text format: lattice sequences, tree
//! dumps, and helpers shared by the command-line front end.
//!
//! Sequence format (`sequence v1`): concatenated lattice blocks, then one
//! `hom i: a->b` line per mapped element:
//!
//! ```text
//! sequence v1
//! lattice
//! 2
//! 0 <= 1
//! endlattice
//! lattice
//! 5
//! 0 <= 1
//! ...
//! endlattice
//! hom 0: 0->0
//! hom 0: 1->4
//! ```

use crate::lattice::{format_lattice, parse_lattice, LatticeError, UslHomomorphism};
use crate::limits::{LatticeSequence, LimitsError};
use crate::tree::TreeMap;

pub fn format_sequence(seq: &LatticeSequence) -> String {
    let mut out = String::from("sequence v1\n");
    for i in 0..seq.levels() {
        out.push_str("lattice\n");
        out.push_str(&format_lattice(seq.lattice(i)));
        out.push_str("endlattice\n");
    }
    for (i, hom) in seq.homs().iter().enumerate() {
        for a in hom.source.elements() {
            out.push_str(&format!("hom {i}: {a}->{}\n", hom.apply(a)));
        }
    }
    out
}

pub fn parse_sequence(text: &str) -> Result<LatticeSequence, LimitsError> {
    let mut lattices = Vec::new();
    let mut hom_pairs: Vec<(usize, usize, usize)> = Vec::new();
    let mut block: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') || line == "sequence v1" {
            continue;
        }
        if line == "lattice" {
            block = Some(String::new());
            continue;
        }
        if line == "endlattice" {
            let body = block.take().ok_or_else(|| {
                LimitsError::MalformedTable(format!("line {lineno}: endlattice without lattice"))
            })?;
            lattices.push(parse_lattice(&body).map_err(LimitsError::Lattice)?);
            continue;
        }
        if let Some(b) = &mut block {
            b.push_str(line);
            b.push('\n');
            continue;
        }
        if let Some(rest) = line.strip_prefix("hom ") {
            let (i, pair) = rest.split_once(':').ok_or_else(|| {
                LimitsError::MalformedTable(format!("line {lineno}: expected `hom i: a->b`"))
            })?;
            let i: usize = i.trim().parse().map_err(|_| {
                LimitsError::MalformedTable(format!("line {lineno}: bad hom index"))
            })?;
            let (a, b) = pair.trim().split_once("->").ok_or_else(|| {
                LimitsError::MalformedTable(format!("line {lineno}: expected `a->b`"))
            })?;
            let a: usize = a.trim().parse().map_err(|_| {
                LimitsError::MalformedTable(format!("line {lineno}: bad element"))
            })?;
            let b: usize = b.trim().parse().map_err(|_| {
                LimitsError::MalformedTable(format!("line {lineno}: bad element"))
            })?;
            hom_pairs.push((i, a, b));
            continue;
        }
        return Err(LimitsError::MalformedTable(format!("line {lineno}: unrecognized `{line}`")));
    }
    if lattices.is_empty() {
        return Err(LimitsError::MalformedTable("no lattice blocks".into()));
    }
    let mut homs = Vec::new();
    for i in 0..lattices.len().saturating_sub(1) {
        let src = &lattices[i];
        let mut map = vec![usize::MAX; src.size()];
        for &(hi, a, b) in &hom_pairs {
            if hi == i {
                if a >= src.size() {
                    return Err(LimitsError::MalformedTable(format!(
                        "hom {i} maps element {a} outside its source"
                    )));
                }
                map[a] = b;
            }
        }
        if map.iter().any(|&v| v == usize::MAX) {
            return Err(LimitsError::MalformedTable(format!("hom {i} is not total")));
        }
        homs.push(
            UslHomomorphism::new(src.clone(), lattices[i + 1].clone(), map)
                .map_err(LimitsError::Lattice)?,
        );
    }
    LatticeSequence::new(lattices, homs)
}

fn string_str(s: &[usize]) -> String {
    if s.is_empty() {
        "e".into()
    } else {
        s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// Tree dump: one `dom -> image` line per entry, sorted by domain.
pub fn format_tree(tree: &TreeMap) -> String {
    let mut out = String::new();
    for (k, v) in tree.iter() {
        out.push_str(&format!("{} -> {}\n", string_str(k), string_str(v)));
    }
    out
}

/// Parse a lattice either from a fixture name or from a file path.
pub fn load_lattice(spec: &str) -> Result<crate::lattice::FiniteLattice, LatticeError> {
    if let Some(lat) = crate::catalog::fixture_by_name(spec) {
        return Ok(lat);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| LatticeError::Parse {
        line: 0,
        message: format!("cannot read {spec}: {e}"),
    })?;
    parse_lattice(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn sequence_roundtrip() {
        let two = catalog::two_chain();
        let m3 = catalog::m3();
        let phi = UslHomomorphism::new(two.clone(), m3.clone(), vec![0, 4]).unwrap();
        let seq = LatticeSequence::new(vec![two, m3], vec![phi]).unwrap();
        let text = format_sequence(&seq);
        let back = parse_sequence(&text).unwrap();
        assert_eq!(back.levels(), 2);
        assert_eq!(back.hom(0).apply(1), 4);
        assert_eq!(format_sequence(&back), text);
    }

    #[test]
    fn tree_dump_is_sorted_and_stable() {
        let mut t = TreeMap::rooted(vec![]);
        t.insert(vec![1], vec![1, 1]);
        t.insert(vec![0], vec![0, 0]);
        let dump = format_tree(&t);
        assert_eq!(dump, "e -> e\n0 -> 0.0\n1 -> 1.1\n");
    }

    #[test]
    fn load_lattice_accepts_fixture_names() {
        assert!(load_lattice("m3").is_ok());
        assert!(load_lattice("no-such-fixture").is_err());
    }
}
