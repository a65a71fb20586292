//! Labelled Markov chains over finite words.
//!
//! A chain in state `q` emits label `a` and moves to `q'` with probability
//! `M(a)(q, q')`, or stops with probability `eow(q)`. An initial
//! distribution `pi` induces `Pr_pi(w) = pi M(w) eow^T` on finite words.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fraction_string, Rational};

/// A word as a sequence of label indices into [`Lmc::alphabet`].
pub type Word = Vec<usize>;

/// Row-major sparse matrix; each row keeps its entries sorted by column.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseMatrix {
    rows: Vec<Vec<(usize, Rational)>>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            rows: vec![Vec::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Sets entry `(i, j)`; a zero value removes it.
    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        let row = &mut self.rows[i];
        match row.binary_search_by_key(&j, |(c, _)| *c) {
            Ok(pos) if value.is_zero() => {
                row.remove(pos);
            }
            Ok(pos) => row[pos].1 = value,
            Err(_) if value.is_zero() => {}
            Err(pos) => row.insert(pos, (j, value)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.rows[i]
            .binary_search_by_key(&j, |(c, _)| *c)
            .map(|pos| self.rows[i][pos].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn row(&self, i: usize) -> &[(usize, Rational)] {
        &self.rows[i]
    }

    pub fn row_sum(&self, i: usize) -> Rational {
        self.rows[i].iter().map(|(_, v)| v).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, v)| (i, *j, v)))
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim()];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, m) in &self.rows[i] {
                out[*j] += vi * m;
            }
        }
        out
    }

    fn add_assign(&mut self, other: &SparseMatrix) {
        for (i, j, v) in other.entries() {
            let cur = self.get(i, j);
            self.set(i, j, cur + v);
        }
    }
}

pub fn dot(u: &[Rational], v: &[Rational]) -> Rational {
    u.iter()
        .zip(v)
        .filter(|(a, b)| !a.is_zero() && !b.is_zero())
        .map(|(a, b)| a * b)
        .sum()
}

pub(crate) fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// A probability vector over the states of a chain.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialDistribution(Vec<Rational>);

impl InitialDistribution {
    /// Entries must lie in `[0, 1]` and sum to exactly 1.
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if let Some(w) = weights
            .iter()
            .find(|w| w.is_negative() || **w > Rational::one())
        {
            return Err(Error::input(format!(
                "distribution weight {} outside [0,1]",
                fraction_string(w)
            )));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::input(format!(
                "distribution weights sum to {}, not 1",
                fraction_string(&total)
            )));
        }
        Ok(Self(weights))
    }

    pub fn dirac(len: usize, state: usize) -> Self {
        let mut w = vec![Rational::zero(); len];
        w[state] = Rational::one();
        Self(w)
    }

    pub fn weights(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn padded(&self, before: usize, after: usize) -> Self {
        let mut w = vec![Rational::zero(); before];
        w.extend(self.0.iter().cloned());
        w.extend(std::iter::repeat_n(Rational::zero(), after));
        Self(w)
    }
}

/// A violated well-formedness condition, reported by [`Lmc::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    OutOfRange {
        state: String,
        entry: String,
        value: Rational,
    },
    RowSum {
        state: String,
        sum: Rational,
    },
    NoEndOfWordPath {
        state: String,
    },
}

impl Violation {
    pub fn state(&self) -> &str {
        match self {
            Violation::OutOfRange { state, .. }
            | Violation::RowSum { state, .. }
            | Violation::NoEndOfWordPath { state } => state,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutOfRange {
                state,
                entry,
                value,
            } => write!(
                f,
                "probability {} of {entry} at state {state} outside [0,1]",
                fraction_string(value)
            ),
            Violation::RowSum { state, sum } => write!(
                f,
                "row sum {} != 1 at state {state}",
                fraction_string(sum)
            ),
            Violation::NoEndOfWordPath { state } => {
                write!(f, "no end-of-word path from state {state}")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Lmc {
    states: Vec<String>,
    alphabet: Vec<String>,
    trans: Vec<SparseMatrix>,
    eow: Vec<Rational>,
    state_index: HashMap<String, usize>,
    label_index: HashMap<String, usize>,
}

impl PartialEq for Lmc {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.alphabet == other.alphabet
            && self.trans == other.trans
            && self.eow == other.eow
    }
}

impl Lmc {
    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Transition matrix of the label with index `label`.
    pub fn matrix(&self, label: usize) -> &SparseMatrix {
        &self.trans[label]
    }

    pub fn matrices(&self) -> &[SparseMatrix] {
        &self.trans
    }

    pub fn eow(&self) -> &[Rational] {
        &self.eow
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.label_index.get(name).copied()
    }

    pub fn dirac(&self, state: &str) -> Result<InitialDistribution> {
        let q = self
            .state_index(state)
            .ok_or_else(|| Error::input(format!("unknown state {state:?}")))?;
        Ok(InitialDistribution::dirac(self.num_states(), q))
    }

    /// Maps label names to indices.
    pub fn word<S: AsRef<str>>(&self, labels: &[S]) -> Result<Word> {
        labels
            .iter()
            .map(|l| {
                self.label_index(l.as_ref())
                    .ok_or_else(|| Error::input(format!("unknown label {:?}", l.as_ref())))
            })
            .collect()
    }

    /// Parses a word written as labels separated by whitespace or commas.
    /// The empty string (or `ε`) is the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let labels: Vec<&str> = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty() && *s != "ε")
            .collect();
        self.word(&labels)
    }

    pub fn format_word(&self, w: &[usize]) -> String {
        if w.is_empty() {
            "ε".to_string()
        } else {
            w.iter()
                .map(|&a| self.alphabet[a].as_str())
                .collect::<Vec<_>>()
                .join(" ")
        }
    }

    /// Every violated well-formedness condition; empty iff the chain is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let unit = |v: &Rational| !v.is_negative() && *v <= Rational::one();
        for (q, name) in self.states.iter().enumerate() {
            if !unit(&self.eow[q]) {
                out.push(Violation::OutOfRange {
                    state: name.clone(),
                    entry: "end-of-word".into(),
                    value: self.eow[q].clone(),
                });
            }
            for (a, m) in self.trans.iter().enumerate() {
                for (r, v) in m.row(q) {
                    if !unit(v) {
                        out.push(Violation::OutOfRange {
                            state: name.clone(),
                            entry: format!("transition {} to {}", self.alphabet[a], self.states[*r]),
                            value: v.clone(),
                        });
                    }
                }
            }
            let sum = &self.eow[q] + self.trans.iter().map(|m| m.row_sum(q)).sum::<Rational>();
            if !sum.is_one() {
                out.push(Violation::RowSum {
                    state: name.clone(),
                    sum,
                });
            }
        }

        // Backward search from stopping states over positive edges.
        let mut preds = vec![Vec::new(); self.num_states()];
        for m in &self.trans {
            for (i, j, v) in m.entries() {
                if v.is_positive() {
                    preds[j].push(i);
                }
            }
        }
        let mut seen = vec![false; self.num_states()];
        let mut queue: VecDeque<usize> = (0..self.num_states())
            .filter(|&q| self.eow[q].is_positive())
            .collect();
        for &q in &queue {
            seen[q] = true;
        }
        while let Some(q) = queue.pop_front() {
            for &p in &preds[q] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        for (q, ok) in seen.iter().enumerate() {
            if !ok {
                out.push(Violation::NoEndOfWordPath {
                    state: self.states[q].clone(),
                });
            }
        }
        out
    }

    fn check_distribution(&self, pi: &InitialDistribution) -> Result<()> {
        if pi.len() != self.num_states() {
            return Err(Error::input(format!(
                "distribution has {} entries but the chain has {} states",
                pi.len(),
                self.num_states()
            )));
        }
        Ok(())
    }

    fn check_word(&self, w: &[usize]) -> Result<()> {
        match w.iter().find(|&&a| a >= self.alphabet.len()) {
            Some(a) => Err(Error::input(format!("unknown label index {a}"))),
            None => Ok(()),
        }
    }

    /// `pi M(w)`: the sub-distribution over states after emitting `w`.
    pub fn forward(&self, pi: &InitialDistribution, w: &[usize]) -> Result<Vec<Rational>> {
        self.check_distribution(pi)?;
        self.check_word(w)?;
        Ok(w
            .iter()
            .fold(pi.weights().to_vec(), |v, &a| self.trans[a].left_mul(&v)))
    }

    /// Exact `Pr_pi(w) = pi M(w) eow^T`.
    pub fn word_probability(&self, pi: &InitialDistribution, w: &[usize]) -> Result<Rational> {
        Ok(dot(&self.forward(pi, w)?, &self.eow))
    }

    /// Distinct positive-probability successors of each state.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); self.num_states()];
        for m in &self.trans {
            for (i, j, v) in m.entries() {
                if v.is_positive() {
                    succ[i].push(j);
                }
            }
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        succ
    }

    /// Topological order of the transition graph, or `None` if it has a cycle.
    fn topological_order(&self) -> Option<Vec<usize>> {
        let succ = self.successors();
        let mut indeg = vec![0usize; self.num_states()];
        for s in &succ {
            for &j in s {
                indeg[j] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..self.num_states()).filter(|&q| indeg[q] == 0).collect();
        let mut order = Vec::with_capacity(self.num_states());
        while let Some(q) = queue.pop_front() {
            order.push(q);
            for &j in &succ[q] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
        (order.len() == self.num_states()).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    pub(crate) fn require_acyclic(&self) -> Result<()> {
        if self.is_acyclic() {
            Ok(())
        } else {
            Err(Error::Precondition(
                "the transition graph has a cycle; this operation needs an acyclic chain".into(),
            ))
        }
    }

    /// Length of the longest word with positive probability from any state.
    pub fn max_support_length(&self) -> Result<usize> {
        let order = self.topological_order().ok_or_else(|| {
            Error::Precondition("max_support_length needs an acyclic chain".into())
        })?;
        let succ = self.successors();
        let mut longest: Vec<Option<usize>> = vec![None; self.num_states()];
        for &q in order.iter().rev() {
            let here = self.eow[q].is_positive().then_some(0);
            let via = succ[q].iter().filter_map(|&r| longest[r].map(|l| l + 1)).max();
            longest[q] = here.max(via);
        }
        Ok(longest.into_iter().flatten().max().unwrap_or(0))
    }

    /// `sum_a M(a)`.
    pub fn step_matrix(&self) -> SparseMatrix {
        let mut s = SparseMatrix::zeros(self.num_states());
        for m in &self.trans {
            s.add_assign(m);
        }
        s
    }

    /// Exact `Pr_pi(words longer than n)`, by `n + 1` vector-matrix products.
    pub fn tail_mass(&self, pi: &InitialDistribution, n: usize) -> Result<Rational> {
        let mut tails = self.tail_masses(pi)?;
        Ok(tails.nth(n).expect("tail iterator is infinite"))
    }

    /// Iterator over `Pr_pi(Σ^{>n})` for `n = 0, 1, 2, ...`.
    pub fn tail_masses(&self, pi: &InitialDistribution) -> Result<TailMasses<'_>> {
        self.check_distribution(pi)?;
        Ok(TailMasses {
            lmc: self,
            step: self.step_matrix(),
            current: pi.weights().to_vec(),
            stopped: Rational::zero(),
        })
    }

    /// Smallest nonzero probability among transitions and end-of-word entries.
    pub fn min_positive_probability(&self) -> Option<Rational> {
        self.trans
            .iter()
            .flat_map(|m| m.entries().map(|(_, _, v)| v))
            .chain(self.eow.iter())
            .filter(|v| v.is_positive())
            .min()
            .cloned()
    }

    /// Disjoint union of two chains over the same alphabet, with both initial
    /// distributions lifted. State names are kept when they do not collide and
    /// are prefixed with `1.` / `2.` otherwise.
    pub fn disjoint_union(
        m1: &Lmc,
        pi1: &InitialDistribution,
        m2: &Lmc,
        pi2: &InitialDistribution,
    ) -> Result<(Lmc, InitialDistribution, InitialDistribution)> {
        m1.check_distribution(pi1)?;
        m2.check_distribution(pi2)?;
        let s1: HashSet<&String> = m1.alphabet.iter().collect();
        let s2: HashSet<&String> = m2.alphabet.iter().collect();
        if s1 != s2 {
            return Err(Error::input(
                "disjoint union needs both chains over the same alphabet",
            ));
        }
        let collide = m2.states.iter().any(|s| m1.state_index.contains_key(s));
        let rename = |prefix: &str, s: &String| {
            if collide {
                format!("{prefix}.{s}")
            } else {
                s.clone()
            }
        };
        let offset = m1.num_states();
        let states: Vec<String> = m1
            .states
            .iter()
            .map(|s| rename("1", s))
            .chain(m2.states.iter().map(|s| rename("2", s)))
            .collect();
        let mut b = LmcBuilder::new(states, m1.alphabet.clone())?;
        for (a, m) in m1.trans.iter().enumerate() {
            for (i, j, v) in m.entries() {
                b.set_transition(i, a, j, v.clone());
            }
        }
        for (a2, m) in m2.trans.iter().enumerate() {
            let a = m1.label_index[&m2.alphabet[a2]];
            for (i, j, v) in m.entries() {
                b.set_transition(offset + i, a, offset + j, v.clone());
            }
        }
        for (q, v) in m1.eow.iter().enumerate() {
            b.set_eow(q, v.clone());
        }
        for (q, v) in m2.eow.iter().enumerate() {
            b.set_eow(offset + q, v.clone());
        }
        let lmc = b.build();
        Ok((
            lmc,
            pi1.padded(0, m2.num_states()),
            pi2.padded(offset, 0),
        ))
    }
}

pub struct TailMasses<'a> {
    lmc: &'a Lmc,
    step: SparseMatrix,
    current: Vec<Rational>,
    stopped: Rational,
}

impl Iterator for TailMasses<'_> {
    type Item = Rational;

    fn next(&mut self) -> Option<Rational> {
        self.stopped += dot(&self.current, &self.lmc.eow);
        self.current = self.step.left_mul(&self.current);
        Some(Rational::one() - &self.stopped)
    }
}

/// Incremental construction of an [`Lmc`] by name or by index.
#[derive(Clone, Debug)]
pub struct LmcBuilder {
    lmc: Lmc,
}

impl LmcBuilder {
    /// Fails when state or label names repeat.
    pub fn new(states: Vec<String>, alphabet: Vec<String>) -> Result<Self> {
        let state_index = index_names(&states, "state")?;
        let label_index = index_names(&alphabet, "label")?;
        let n = states.len();
        let trans = vec![SparseMatrix::zeros(n); alphabet.len()];
        Ok(Self {
            lmc: Lmc {
                states,
                alphabet,
                trans,
                eow: vec![Rational::zero(); n],
                state_index,
                label_index,
            },
        })
    }

    pub fn set_transition(&mut self, from: usize, label: usize, to: usize, p: Rational) -> &mut Self {
        self.lmc.trans[label].set(from, to, p);
        self
    }

    pub fn set_eow(&mut self, state: usize, p: Rational) -> &mut Self {
        self.lmc.eow[state] = p;
        self
    }

    pub fn transition(&mut self, from: &str, label: &str, to: &str, p: Rational) -> Result<&mut Self> {
        let (f, a, t) = (self.state(from)?, self.label(label)?, self.state(to)?);
        Ok(self.set_transition(f, a, t, p))
    }

    pub fn eow(&mut self, state: &str, p: Rational) -> Result<&mut Self> {
        let q = self.state(state)?;
        Ok(self.set_eow(q, p))
    }

    pub fn state(&self, name: &str) -> Result<usize> {
        self.lmc
            .state_index(name)
            .ok_or_else(|| Error::input(format!("unknown state {name:?}")))
    }

    pub fn label(&self, name: &str) -> Result<usize> {
        self.lmc
            .label_index(name)
            .ok_or_else(|| Error::input(format!("unknown label {name:?}")))
    }

    pub fn transition_value(&self, from: usize, label: usize, to: usize) -> Rational {
        self.lmc.trans[label].get(from, to)
    }

    pub fn build(self) -> Lmc {
        self.lmc
    }
}

fn index_names(names: &[String], what: &str) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return Err(Error::input(format!("duplicate {what} name {n:?}")));
        }
    }
    Ok(index)
}
