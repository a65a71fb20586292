//! JSON file formats for chains, distributions and automata.
//!
//! Probabilities are written as exact fractions (`"1/3"`); the integers 0
//! and 1 may also appear as bare JSON numbers.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::automata::{Nfa, Pa};
use crate::error::{Error, Result};
use crate::lmc::{InitialDistribution, Lmc, LmcBuilder};
use crate::rational::{fraction_string, parse_probability, Rational};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Prob {
    Text(String),
    Int(u64),
}

impl Prob {
    fn parse(&self, context: &dyn Fn() -> String) -> Result<Rational> {
        let r = match self {
            Prob::Text(t) => parse_probability(t),
            Prob::Int(i) => parse_probability(&i.to_string()),
        };
        r.map_err(|e| Error::parse(format!("{}: {e}", context())))
    }

    fn of(r: &Rational) -> Self {
        Prob::Text(fraction_string(r))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LmcFile {
    states: Vec<String>,
    alphabet: Vec<String>,
    transitions: Vec<ProbEdge>,
    #[serde(default)]
    eow: BTreeMap<String, Prob>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbEdge {
    from: String,
    label: String,
    to: String,
    prob: Prob,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NfaFile {
    states: Vec<String>,
    alphabet: Vec<String>,
    initial: String,
    accepting: Vec<String>,
    transitions: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Edge {
    from: String,
    label: String,
    to: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PaFile {
    states: Vec<String>,
    alphabet: Vec<String>,
    transitions: Vec<ProbEdge>,
    initial_dist: BTreeMap<String, Prob>,
    accepting: Vec<String>,
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(format!("{what}: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn lookup(names: &[String], name: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::parse(format!("unknown {what} {name:?}")))
}

/// Parses a chain without checking the well-formedness conditions.
pub fn read_lmc_unchecked(text: &str) -> Result<Lmc> {
    let file: LmcFile = from_json(text, "chain file")?;
    let mut b = LmcBuilder::new(file.states.clone(), file.alphabet.clone())
        .map_err(|e| Error::parse(e.to_string()))?;
    let mut seen = HashSet::new();
    for e in &file.transitions {
        let from = lookup(&file.states, &e.from, "state")?;
        let label = lookup(&file.alphabet, &e.label, "label")?;
        let to = lookup(&file.states, &e.to, "state")?;
        if !seen.insert((from, label, to)) {
            return Err(Error::parse(format!(
                "duplicate transition {} -{}-> {}",
                e.from, e.label, e.to
            )));
        }
        let p = e
            .prob
            .parse(&|| format!("transition {} -{}-> {}", e.from, e.label, e.to))?;
        b.set_transition(from, label, to, p);
    }
    for (state, p) in &file.eow {
        let q = lookup(&file.states, state, "state")?;
        let p = p.parse(&|| format!("end-of-word probability of {state}"))?;
        b.set_eow(q, p);
    }
    Ok(b.build())
}

/// Parses a chain and rejects it unless [`Lmc::validate`] finds nothing.
pub fn read_lmc(text: &str) -> Result<Lmc> {
    let lmc = read_lmc_unchecked(text)?;
    match lmc.validate().first() {
        None => Ok(lmc),
        Some(v) => Err(Error::parse(format!("invalid chain: {v}"))),
    }
}

pub fn write_lmc(lmc: &Lmc) -> String {
    let mut transitions = Vec::new();
    for q in 0..lmc.num_states() {
        for (a, m) in lmc.matrices().iter().enumerate() {
            for (r, p) in m.row(q) {
                transitions.push(ProbEdge {
                    from: lmc.states()[q].clone(),
                    label: lmc.alphabet()[a].clone(),
                    to: lmc.states()[*r].clone(),
                    prob: Prob::of(p),
                });
            }
        }
    }
    let eow = lmc
        .eow()
        .iter()
        .enumerate()
        .filter(|(_, p)| !num_traits::Zero::is_zero(*p))
        .map(|(q, p)| (lmc.states()[q].clone(), Prob::of(p)))
        .collect();
    to_json(&LmcFile {
        states: lmc.states().to_vec(),
        alphabet: lmc.alphabet().to_vec(),
        transitions,
        eow,
    })
}

fn read_weights(
    states: &[String],
    map: &BTreeMap<String, Prob>,
    what: &str,
) -> Result<Vec<Rational>> {
    let mut w = vec![Rational::from_integer(0.into()); states.len()];
    for (name, p) in map {
        let q = lookup(states, name, "state")?;
        w[q] = p.parse(&|| format!("{what} weight of {name}"))?;
    }
    Ok(w)
}

/// Parses an initial distribution given as a JSON object from state names
/// to probabilities; unlisted states get 0.
pub fn read_distribution(lmc: &Lmc, text: &str) -> Result<InitialDistribution> {
    let map: BTreeMap<String, Prob> = from_json(text, "distribution file")?;
    let w = read_weights(lmc.states(), &map, "distribution")?;
    InitialDistribution::new(w).map_err(|e| Error::parse(e.to_string()))
}

pub fn write_distribution(lmc: &Lmc, pi: &InitialDistribution) -> String {
    let map: BTreeMap<String, Prob> = pi
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, p)| !num_traits::Zero::is_zero(*p))
        .map(|(q, p)| (lmc.states()[q].clone(), Prob::of(p)))
        .collect();
    to_json(&map)
}

pub fn read_nfa(text: &str) -> Result<Nfa> {
    let file: NfaFile = from_json(text, "NFA file")?;
    let initial = lookup(&file.states, &file.initial, "state")?;
    let accepting = file
        .accepting
        .iter()
        .map(|s| lookup(&file.states, s, "state"))
        .collect::<Result<Vec<_>>>()?;
    let mut nfa = Nfa::new(file.states.clone(), file.alphabet.clone(), initial, &accepting)
        .map_err(|e| Error::parse(e.to_string()))?;
    for e in &file.transitions {
        let from = lookup(&file.states, &e.from, "state")?;
        let label = lookup(&file.alphabet, &e.label, "label")?;
        let to = lookup(&file.states, &e.to, "state")?;
        nfa.add_transition(from, label, to);
    }
    Ok(nfa)
}

pub fn write_nfa(nfa: &Nfa) -> String {
    let mut transitions = Vec::new();
    for q in 0..nfa.states().len() {
        for a in 0..nfa.alphabet().len() {
            for &r in nfa.delta(q, a) {
                transitions.push(Edge {
                    from: nfa.states()[q].clone(),
                    label: nfa.alphabet()[a].clone(),
                    to: nfa.states()[r].clone(),
                });
            }
        }
    }
    to_json(&NfaFile {
        states: nfa.states().to_vec(),
        alphabet: nfa.alphabet().to_vec(),
        initial: nfa.states()[nfa.initial()].clone(),
        accepting: nfa.accepting().iter().map(|&q| nfa.states()[q].clone()).collect(),
        transitions,
    })
}

/// Parses a probabilistic automaton and rejects rows that are not exactly
/// stochastic.
pub fn read_pa(text: &str) -> Result<Pa> {
    let file: PaFile = from_json(text, "automaton file")?;
    let alpha = read_weights(&file.states, &file.initial_dist, "initial")?;
    let accepting = file
        .accepting
        .iter()
        .map(|s| lookup(&file.states, s, "state"))
        .collect::<Result<Vec<_>>>()?;
    let mut pa = Pa::new(file.states.clone(), file.alphabet.clone(), alpha, &accepting)
        .map_err(|e| Error::parse(e.to_string()))?;
    let mut seen = HashSet::new();
    for e in &file.transitions {
        let from = lookup(&file.states, &e.from, "state")?;
        let label = lookup(&file.alphabet, &e.label, "label")?;
        let to = lookup(&file.states, &e.to, "state")?;
        if !seen.insert((from, label, to)) {
            return Err(Error::parse(format!(
                "duplicate transition {} -{}-> {}",
                e.from, e.label, e.to
            )));
        }
        let p = e
            .prob
            .parse(&|| format!("transition {} -{}-> {}", e.from, e.label, e.to))?;
        pa.set_transition(from, label, to, p);
    }
    if let Some(v) = pa.violations().first() {
        return Err(Error::parse(format!("invalid automaton: {v}")));
    }
    Ok(pa)
}

pub fn write_pa(pa: &Pa) -> String {
    let mut transitions = Vec::new();
    for q in 0..pa.states().len() {
        for a in 0..pa.alphabet().len() {
            for (r, p) in pa.matrix(a).row(q) {
                transitions.push(ProbEdge {
                    from: pa.states()[q].clone(),
                    label: pa.alphabet()[a].clone(),
                    to: pa.states()[*r].clone(),
                    prob: Prob::of(p),
                });
            }
        }
    }
    let initial_dist = pa
        .initial()
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, p)| !num_traits::Zero::is_zero(*p))
        .map(|(q, p)| (pa.states()[q].clone(), Prob::of(p)))
        .collect();
    to_json(&PaFile {
        states: pa.states().to_vec(),
        alphabet: pa.alphabet().to_vec(),
        transitions,
        initial_dist,
        accepting: pa.accepting().iter().map(|&q| pa.states()[q].clone()).collect(),
    })
}
