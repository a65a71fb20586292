use std::collections::{BTreeSet, HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{check_fresh_labels, ReductionKind, ReductionOutput, LABEL_ACC, LABEL_B, LABEL_REJ};
use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::lmc::{dot, InitialDistribution, LmcBuilder, SparseMatrix};
use crate::rational::{fraction_string, int, Rational};

/// Probabilistic automaton: stochastic matrices per label, an initial
/// distribution and a set of accepting states.
#[derive(Clone, Debug, PartialEq)]
pub struct Pa {
    states: Vec<String>,
    alphabet: Vec<String>,
    trans: Vec<SparseMatrix>,
    initial: InitialDistribution,
    accepting: BTreeSet<usize>,
}

impl Pa {
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<String>,
        initial: Vec<Rational>,
        accepting: &[usize],
    ) -> Result<Self> {
        let s = states.len();
        if s == 0 {
            return Err(Error::input("a probabilistic automaton needs at least one state"));
        }
        for (names, what) in [(&states, "state"), (&alphabet, "label")] {
            let mut seen = HashSet::new();
            if let Some(n) = names.iter().find(|n| !seen.insert(n.as_str())) {
                return Err(Error::input(format!("duplicate {what} name {n:?}")));
            }
        }
        if initial.len() != s {
            return Err(Error::input("initial distribution length differs from state count"));
        }
        if accepting.iter().any(|&q| q >= s) {
            return Err(Error::input("accepting state index out of range"));
        }
        Ok(Self {
            trans: vec![SparseMatrix::zeros(s); alphabet.len()],
            states,
            alphabet,
            initial: InitialDistribution::new(initial)?,
            accepting: accepting.iter().copied().collect(),
        })
    }

    pub fn set_transition(&mut self, from: usize, label: usize, to: usize, p: Rational) -> &mut Self {
        self.trans[label].set(from, to, p);
        self
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn matrix(&self, label: usize) -> &SparseMatrix {
        &self.trans[label]
    }

    pub fn initial(&self) -> &InitialDistribution {
        &self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::input(format!("unknown state {name:?}")))
    }

    pub fn label_index(&self, name: &str) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::input(format!("unknown label {name:?}")))
    }

    pub fn parse_word(&self, text: &str) -> Result<Vec<usize>> {
        text.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty() && *t != "ε")
            .map(|t| self.label_index(t))
            .collect()
    }

    /// Every row of every matrix must be a probability vector.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (a, m) in self.trans.iter().enumerate() {
            for q in 0..self.states.len() {
                let row = m.row(q);
                if let Some((_, v)) = row.iter().find(|(_, v)| v.is_negative() || *v > Rational::one()) {
                    out.push(format!(
                        "entry {} outside [0,1] at state {} label {}",
                        fraction_string(v),
                        self.states[q],
                        self.alphabet[a]
                    ));
                }
                let sum = m.row_sum(q);
                if !sum.is_one() {
                    out.push(format!(
                        "row sum {} != 1 at state {} label {}",
                        fraction_string(&sum),
                        self.states[q],
                        self.alphabet[a]
                    ));
                }
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::Input(v)),
        }
    }

    fn accept_vector(&self) -> Vec<Rational> {
        (0..self.states.len())
            .map(|q| if self.accepting.contains(&q) { Rational::one() } else { Rational::zero() })
            .collect()
    }
}

/// `alpha M(w) eta_F^T`.
pub fn pa_accept_prob(pa: &Pa, w: &[usize]) -> Result<Rational> {
    let k = pa.alphabet.len();
    if let Some(&a) = w.iter().find(|&&a| a >= k) {
        return Err(Error::input(format!("label index {a} outside the alphabet")));
    }
    let mut v = pa.initial.weights().to_vec();
    for &a in w {
        v = pa.trans[a].left_mul(&v);
    }
    Ok(dot(&v, &pa.accept_vector()))
}

/// Builds the chain pair whose distance exceeds the returned bound exactly
/// when some word is accepted with probability above 1/2.
///
/// A fresh state `q_1` emits letters with `1/(2k)` each and then `b` or
/// `acc` with 1/4 each; each automaton state emits letters with half its
/// transition weight spread over `k` letters, and `acc` (accepting) or `rej`
/// with 1/2. Both stop only in the fresh sink `q_eow`.
pub fn reduce_pa(pa: &Pa) -> Result<ReductionOutput> {
    pa.check()?;
    check_fresh_labels(&pa.alphabet)?;
    let k = pa.alphabet.len();
    if k == 0 {
        return Err(Error::input("the automaton alphabet is empty"));
    }
    let s = pa.states.len();

    let mut names = pa.states.clone();
    let q1 = s;
    let eow = s + 1;
    names.push(fresh_name(&pa.states, "q_1"));
    names.push(fresh_name(&pa.states, "q_eow"));
    let mut labels = pa.alphabet.clone();
    labels.extend([LABEL_B, LABEL_ACC, LABEL_REJ].map(String::from));
    let (lb, lacc, lrej) = (k, k + 1, k + 2);

    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let quarter = Rational::new(BigInt::one(), BigInt::from(4));
    let scale = Rational::new(BigInt::one(), BigInt::from(2 * k));

    let mut b = LmcBuilder::new(names, labels)?;
    for a in 0..k {
        b.set_transition(q1, a, q1, scale.clone());
        for (q, r, p) in pa.trans[a].entries() {
            b.set_transition(q, a, r, &scale * p);
        }
    }
    b.set_transition(q1, lb, eow, quarter.clone());
    b.set_transition(q1, lacc, eow, quarter);
    for q in 0..s {
        let label = if pa.accepting.contains(&q) { lacc } else { lrej };
        b.set_transition(q, label, eow, half.clone());
    }
    b.set_eow(eow, Rational::one());
    let lmc = b.build();

    // x = (1/2) 1_F + (1/(2k)) Σ_a M(a) x, the probability of ever emitting acc.
    let mut a = vec![vec![Rational::zero(); s]; s];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = Rational::one();
    }
    for m in &pa.trans {
        for (q, r, p) in m.entries() {
            a[q][r] -= &scale * p;
        }
    }
    let rhs: Vec<Rational> = pa.accept_vector().iter().map(|f| f * &half).collect();
    let x = solve(&a, &rhs)
        .ok_or_else(|| Error::Internal("singular acceptance system".into()))?;
    let accept_mass = dot(pa.initial.weights(), &x);

    let mut alpha = pa.initial.weights().to_vec();
    alpha.extend([Rational::zero(), Rational::zero()]);
    Ok(ReductionOutput {
        pi1: InitialDistribution::dirac(s + 2, q1),
        pi2: InitialDistribution::new(alpha)?,
        lmc,
        kind: ReductionKind::Pa {
            bound: Rational::one() - &accept_mass,
            accept_mass,
        },
    })
}

fn fresh_name(taken: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// Shortest word accepted with probability above 1/2 among words of length
/// at most `max_len`, by breadth-first search over reachable state
/// distributions. The emptiness question is undecidable in general, so
/// `None` says nothing about longer words.
pub fn emptiness_witness_search(pa: &Pa, max_len: usize) -> Option<Vec<usize>> {
    let f = pa.accept_vector();
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let start = pa.initial.weights().to_vec();
    let mut seen: HashSet<Vec<Rational>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(Vec::new(), start)]);
    while let Some((w, v)) = queue.pop_front() {
        if dot(&v, &f) > half {
            return Some(w);
        }
        if w.len() == max_len {
            continue;
        }
        for a in 0..pa.alphabet.len() {
            let next = pa.trans[a].left_mul(&v);
            if seen.insert(next.clone()) {
                let mut w2 = w.clone();
                w2.push(a);
                queue.push_back((w2, next));
            }
        }
    }
    None
}

/// `pi1(L') - pi2(L')` for `L' = Σ*{b, acc} \ {w acc}` on a [`reduce_pa`]
/// output, given its bound: `bound - pi1(w acc) + pi2(w acc)`.
pub fn witness_event_gap(pa: &Pa, bound: &Rational, w: &[usize]) -> Result<Rational> {
    let k = pa.alphabet.len() as i64;
    let len = i32::try_from(w.len()).map_err(|_| Error::input("word too long"))?;
    let step = num_traits::pow(Rational::new(BigInt::one(), BigInt::from(2 * k)), len as usize);
    let p1 = &step / int(4);
    let p2 = &step * pa_accept_prob(pa, w)? / int(2);
    Ok(bound - p1 + p2)
}
