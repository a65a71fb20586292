//! Workloads shared by the benchmarks.

use tvd_core::automata::{reduce_nfa, Nfa, ReductionOutput};
use tvd_core::fixtures;

/// The suffix automaton's chain pair at word length `n`; its support grows
/// like `2^n`.
pub fn nfa_instance(n: u32) -> ReductionOutput {
    reduce_nfa(&fixtures::suffix_nfa(), n).expect("valid construction")
}

/// Automaton over `{a1, a2}` on `s` states in a ring, every state
/// accepting, with nondeterministic jumps on `a2`.
pub fn ring_nfa(s: usize) -> Nfa {
    let states = (0..s).map(|i| format!("x{i}")).collect();
    let labels = vec!["a1".to_string(), "a2".to_string()];
    let accepting: Vec<usize> = (0..s).step_by(2).collect();
    let mut nfa = Nfa::new(states, labels, 0, &accepting).expect("valid automaton");
    for q in 0..s {
        nfa.add_transition(q, 0, (q + 1) % s);
        nfa.add_transition(q, 1, q);
        nfa.add_transition(q, 1, (q + 2) % s);
    }
    nfa
}
