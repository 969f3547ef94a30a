//! Direct limits of finite lattice sequences, and the two-case machine that
//! grows a sequence from finite presentation tables.

use initseg::catalog;
use initseg::lattice::UslHomomorphism;
use initseg::limits::{direct_limit_prefix, permissibility_machine, LatticeSequence, LeqTable, JoinTable, MachineEvent};

fn main() {
    // 2-chain -> M3 -> 3-chain: the limit is a 3-chain.
    let two = catalog::two_chain();
    let m3 = catalog::m3();
    let three = catalog::chain(3);
    let phi0 = UslHomomorphism::new(two.clone(), m3.clone(), vec![0, 4]).unwrap();
    let phi1 = UslHomomorphism::new(m3.clone(), three.clone(), vec![0, 1, 2, 2, 2]).unwrap();
    let seq = LatticeSequence::new(vec![two, m3, three], vec![phi0, phi1]).unwrap();
    let lim = direct_limit_prefix(&seq).unwrap();
    println!("limit of the prefix has {} classes (bottom {}, top {})", lim.size(), lim.bottom, lim.top);

    // The machine run on a table that confirms 1 <= 0 collapses everything.
    let v = LeqTable { entries: vec![(1, 0, 0)] };
    let run = permissibility_machine(&JoinTable::default(), &v, 40).unwrap();
    let quotients = run.events.iter().filter(|e| matches!(e, MachineEvent::Quotient { .. })).count();
    println!(
        "machine ran {} steps with {} quotient events; final lattice has {} elements",
        run.events.len(),
        quotients,
        run.sequence.lattice(run.sequence.levels() - 1).size()
    );
}
