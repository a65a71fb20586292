//! Nondeterministic and probabilistic automata, and the constructions that
//! turn them into pairs of labelled Markov chains with a known distance.

mod nfa;
mod pa;

pub use nfa::{count_accepted, extract_count, nacc, reduce_nfa, run_sum, Nfa, DEFAULT_SUBSET_CAP};
pub use pa::{emptiness_witness_search, pa_accept_prob, reduce_pa, witness_event_gap, Pa};

use num_bigint::BigUint;

use crate::lmc::{InitialDistribution, Lmc};
use crate::rational::{from_biguint, Rational};

/// Fresh labels added by both constructions.
pub const LABEL_B: &str = "b";
pub const LABEL_ACC: &str = "acc";
pub const LABEL_REJ: &str = "rej";

#[derive(Clone, Debug, PartialEq)]
pub enum ReductionKind {
    /// `d(pi1, pi2) = y + |Σ^n \ L(A)| / (k^n s^n)`.
    Nfa {
        y: Rational,
        /// `Σ_{w ∈ Σ^n} nacc(w)`.
        run_sum: BigUint,
        n: u32,
        k: u64,
        s: u64,
    },
    /// `d(pi1, pi2) > bound` iff some word is accepted with probability
    /// above 1/2.
    Pa {
        bound: Rational,
        /// `pi2(Σ*{b, acc})`, the probability that the second chain ever
        /// emits `acc`.
        accept_mass: Rational,
    },
}

#[derive(Clone, Debug)]
pub struct ReductionOutput {
    pub lmc: Lmc,
    pub pi1: InitialDistribution,
    pub pi2: InitialDistribution,
    pub kind: ReductionKind,
}

impl ReductionOutput {
    /// For the NFA construction, the distance implied by `accepted` words of
    /// length `n`. `None` for the PA construction.
    pub fn certified_distance(&self, accepted: &BigUint) -> Option<Rational> {
        match &self.kind {
            ReductionKind::Nfa { y, n, k, s, .. } => {
                let kn = BigUint::from(*k).pow(*n);
                let sn = BigUint::from(*s).pow(*n);
                let missing = from_biguint(kn.clone()) - from_biguint(accepted.clone());
                Some(y + missing / from_biguint(kn * sn))
            }
            ReductionKind::Pa { .. } => None,
        }
    }
}

/// Fails when one of the fresh labels already belongs to `alphabet`.
fn check_fresh_labels(alphabet: &[String]) -> crate::Result<()> {
    for l in [LABEL_B, LABEL_ACC, LABEL_REJ] {
        if alphabet.iter().any(|a| a == l) {
            return Err(crate::Error::Input(format!(
                "alphabet already contains the reserved label {l:?}"
            )));
        }
    }
    Ok(())
}
