//! Small named instances shared by tests, benches and the CLI docs.

use crate::automata::{Nfa, Pa};
use crate::lmc::{InitialDistribution, Lmc, LmcBuilder};
use crate::rational::{int, ratio};

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// One state `q1`: `a` loop 1/2, `b` loop 1/4, stop 1/4.
pub fn single_loop_chain() -> (Lmc, InitialDistribution) {
    let mut b = LmcBuilder::new(names(&["q1"]), names(&["a", "b"])).unwrap();
    b.transition("q1", "a", "q1", ratio(1, 2)).unwrap();
    b.transition("q1", "b", "q1", ratio(1, 4)).unwrap();
    b.eow("q1", ratio(1, 4)).unwrap();
    let lmc = b.build();
    let pi = lmc.dirac("q1").unwrap();
    (lmc, pi)
}

/// `q2` loops on `a` and `b` (1/3 each) and moves to `q3` on `a` (1/3);
/// `q3` loops on `a` (1/2) and stops (1/2).
pub fn two_phase_chain() -> (Lmc, InitialDistribution) {
    let mut b = LmcBuilder::new(names(&["q2", "q3"]), names(&["a", "b"])).unwrap();
    b.transition("q2", "a", "q2", ratio(1, 3)).unwrap();
    b.transition("q2", "b", "q2", ratio(1, 3)).unwrap();
    b.transition("q2", "a", "q3", ratio(1, 3)).unwrap();
    b.transition("q3", "a", "q3", ratio(1, 2)).unwrap();
    b.eow("q3", ratio(1, 2)).unwrap();
    let lmc = b.build();
    let pi = lmc.dirac("q2").unwrap();
    (lmc, pi)
}

/// Disjoint union of [`single_loop_chain`] and [`two_phase_chain`], started
/// from `q1` and `q2` respectively. Cyclic.
pub fn looping_pair() -> (Lmc, InitialDistribution, InitialDistribution) {
    let (a, pa) = single_loop_chain();
    let (b, pb) = two_phase_chain();
    Lmc::disjoint_union(&a, &pa, &b, &pb).unwrap()
}

/// `s` emits `a` or `b` with probability 1/2 each, `u` emits `a` surely; both
/// then stop in `t`. Distance 1/2.
pub fn split_vs_point() -> (Lmc, InitialDistribution, InitialDistribution) {
    let mut b = LmcBuilder::new(names(&["s", "u", "t"]), names(&["a", "b"])).unwrap();
    b.transition("s", "a", "t", ratio(1, 2)).unwrap();
    b.transition("s", "b", "t", ratio(1, 2)).unwrap();
    b.transition("u", "a", "t", int(1)).unwrap();
    b.eow("t", int(1)).unwrap();
    let lmc = b.build();
    let p1 = lmc.dirac("s").unwrap();
    let p2 = lmc.dirac("u").unwrap();
    (lmc, p1, p2)
}

/// NFA over `{a1, a2}` accepting exactly the words that end in `a2`:
/// `q1` loops on both letters and also moves to the accepting `q2` on `a2`,
/// which loops on `a2`.
pub fn suffix_nfa() -> Nfa {
    let mut nfa = Nfa::new(names(&["q1", "q2"]), names(&["a1", "a2"]), 0, &[1]).unwrap();
    nfa.add_transition(0, 0, 0);
    nfa.add_transition(0, 1, 0);
    nfa.add_transition(0, 1, 1);
    nfa.add_transition(1, 1, 1);
    nfa
}

/// Two-state PA over `{x, y}` starting in the accepting state `acc_state`:
/// the empty word is accepted with probability 1.
pub fn accepting_start_pa() -> Pa {
    let mut pa = Pa::new(
        names(&["acc_state", "other"]),
        names(&["x", "y"]),
        vec![int(1), int(0)],
        &[0],
    )
    .unwrap();
    pa.set_transition(0, 0, 1, ratio(1, 2));
    pa.set_transition(0, 0, 0, ratio(1, 2));
    pa.set_transition(0, 1, 1, int(1));
    pa.set_transition(1, 0, 0, ratio(1, 3));
    pa.set_transition(1, 0, 1, ratio(2, 3));
    pa.set_transition(1, 1, 1, int(1));
    pa
}
