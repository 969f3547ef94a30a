//! Fixture lattices, homomorphisms, and presentations used across tests,
//! examples, and the acceptance suite.

use crate::lattice::{FiniteLattice, UslHomomorphism};

/// The n-element chain 0 < 1 < … < n-1.
pub fn chain(n: usize) -> FiniteLattice {
    let pairs: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    FiniteLattice::build(n, &pairs).expect("chain is a lattice")
}

pub fn two_chain() -> FiniteLattice {
    chain(2)
}

/// The four-element Boolean lattice 2×2: 0 < p,q < 1.
pub fn boolean_square() -> FiniteLattice {
    let mut lat = FiniteLattice::build(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
    lat.set_labels(vec!["0".into(), "p".into(), "q".into(), "1".into()]);
    lat
}

/// The diamond M3: 0 < a,b,c < 1, three incomparable atoms.
pub fn m3() -> FiniteLattice {
    let mut lat =
        FiniteLattice::build(5, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]).unwrap();
    lat.set_labels(vec!["0".into(), "a".into(), "b".into(), "c".into(), "1".into()]);
    lat
}

/// The pentagon N5: 0 < a < b < 1 and 0 < c < 1, c incomparable to a,b.
pub fn n5() -> FiniteLattice {
    let mut lat = FiniteLattice::build(5, &[(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)]).unwrap();
    lat.set_labels(vec!["0".into(), "a".into(), "b".into(), "c".into(), "1".into()]);
    lat
}

/// The fixture catalog used by the stage-soundness and stabilization sweeps.
pub fn all_fixtures() -> Vec<FiniteLattice> {
    vec![chain(2), chain(3), chain(4), boolean_square(), m3(), n5()]
}

pub fn fixture_by_name(name: &str) -> Option<FiniteLattice> {
    match name {
        "2-chain" | "chain2" => Some(chain(2)),
        "3-chain" | "chain3" => Some(chain(3)),
        "4-chain" | "chain4" => Some(chain(4)),
        "2x2" | "square" | "boolean" => Some(boolean_square()),
        "m3" | "M3" => Some(m3()),
        "n5" | "N5" => Some(n5()),
        _ => None,
    }
}

pub fn fixture_names() -> Vec<&'static str> {
    vec!["2-chain", "3-chain", "4-chain", "2x2", "m3", "n5"]
}

/// Bound-preserving homomorphism fixtures `(φ, name)` used by the embedding
/// and adjoint checks.
pub fn hom_fixtures() -> Vec<(UslHomomorphism, &'static str)> {
    let two = two_chain();
    let mut out = Vec::new();
    out.push((UslHomomorphism::identity(&two), "id: 2-chain"));
    let m3 = m3();
    out.push((
        UslHomomorphism::new(two.clone(), m3.clone(), vec![0, m3.top()]).unwrap(),
        "2-chain -> M3",
    ));
    let sq = boolean_square();
    out.push((
        UslHomomorphism::new(two.clone(), sq.clone(), vec![0, sq.top()]).unwrap(),
        "2-chain -> 2x2",
    ));
    let three = chain(3);
    out.push((
        UslHomomorphism::new(two, three, vec![0, 2]).unwrap(),
        "2-chain -> 3-chain",
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n5_shape() {
        let lat = n5();
        lat.verify().unwrap();
        // c is incomparable to both a and b.
        assert!(!lat.leq(3, 1) && !lat.leq(1, 3));
        assert!(!lat.leq(3, 2) && !lat.leq(2, 3));
        assert_eq!(lat.join(1, 3), lat.top());
        assert_eq!(lat.meet(2, 3), lat.bottom());
    }

    #[test]
    fn catalog_is_well_formed() {
        for lat in all_fixtures() {
            lat.verify().unwrap();
            assert_eq!(lat.bottom(), 0);
        }
    }
}
