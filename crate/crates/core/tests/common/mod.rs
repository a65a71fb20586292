//! Random instance generators and brute-force oracles shared by the
//! integration tests. The oracles walk paths state by state and never call
//! the library's vector routines.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use tvd_core::automata::{Nfa, Pa};
use tvd_core::rational::{int, ratio};
use tvd_core::{InitialDistribution, Lmc, LmcBuilder, Rational, Word};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn letters(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("a{i}")).collect()
}

/// Integer weights in `0..=max` normalized to a probability vector; at
/// least `forced` gets a positive weight.
fn normalized(rng: &mut ChaCha8Rng, len: usize, max: u32, forced: usize) -> Vec<Rational> {
    let mut w: Vec<u32> = (0..len).map(|_| rng.random_range(0..=max)).collect();
    if w[forced] == 0 {
        w[forced] = 1;
    }
    let total: u32 = w.iter().sum();
    w.into_iter().map(|x| ratio(x as i64, total as i64)).collect()
}

/// Random chain whose transitions only go to higher-indexed states, so it
/// is acyclic. The last state stops surely.
pub fn random_acyclic(rng: &mut ChaCha8Rng, states: usize, k: usize, fanout: usize) -> Lmc {
    let mut b = LmcBuilder::new(names("s", states), letters(k)).unwrap();
    for q in 0..states {
        let mut options: Vec<(usize, usize)> = Vec::new();
        if q + 1 < states {
            for _ in 0..fanout {
                let a = rng.random_range(0..k);
                let r = rng.random_range(q + 1..states);
                if !options.contains(&(a, r)) {
                    options.push((a, r));
                }
            }
        }
        // Slot 0 is the end-of-word weight.
        let stop_forced = options.is_empty() || rng.random_bool(0.3);
        let forced = if stop_forced { 0 } else { 1 };
        let p = normalized(rng, options.len() + 1, 3, forced);
        b.set_eow(q, p[0].clone());
        for ((a, r), p) in options.iter().zip(&p[1..]) {
            b.set_transition(q, *a, *r, p.clone());
        }
    }
    b.build()
}

/// Random chain with arbitrary transitions; every state stops with positive
/// probability.
pub fn random_cyclic(rng: &mut ChaCha8Rng, states: usize, k: usize, fanout: usize) -> Lmc {
    let mut b = LmcBuilder::new(names("c", states), letters(k)).unwrap();
    for q in 0..states {
        let mut options: Vec<(usize, usize)> = Vec::new();
        for _ in 0..fanout {
            let a = rng.random_range(0..k);
            let r = rng.random_range(0..states);
            if !options.contains(&(a, r)) {
                options.push((a, r));
            }
        }
        let p = normalized(rng, options.len() + 1, 3, 0);
        b.set_eow(q, p[0].clone());
        for ((a, r), p) in options.iter().zip(&p[1..]) {
            b.set_transition(q, *a, *r, p.clone());
        }
    }
    b.build()
}

pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> InitialDistribution {
    if rng.random_bool(0.5) {
        return InitialDistribution::dirac(n, rng.random_range(0..n));
    }
    let forced = rng.random_range(0..n);
    InitialDistribution::new(normalized(rng, n, 2, forced)).unwrap()
}

/// Word distribution over words of length `<= max_len` by explicit path
/// enumeration. Zero-probability words are omitted.
pub fn word_distribution(lmc: &Lmc, pi: &InitialDistribution, max_len: usize) -> BTreeMap<Word, Rational> {
    fn go(
        lmc: &Lmc,
        q: usize,
        mass: Rational,
        prefix: &mut Word,
        max_len: usize,
        out: &mut BTreeMap<Word, Rational>,
    ) {
        let stop = &mass * &lmc.eow()[q];
        if !stop.is_zero() {
            *out.entry(prefix.clone()).or_insert_with(Rational::zero) += stop;
        }
        if prefix.len() == max_len {
            return;
        }
        for (a, m) in lmc.matrices().iter().enumerate() {
            for (r, p) in m.row(q) {
                prefix.push(a);
                go(lmc, *r, &mass * p, prefix, max_len, out);
                prefix.pop();
            }
        }
    }
    let mut out = BTreeMap::new();
    for (q, p) in pi.weights().iter().enumerate() {
        if !p.is_zero() {
            go(lmc, q, p.clone(), &mut Vec::new(), max_len, &mut out);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Probability of one word by summing over all labelled paths.
pub fn path_probability(lmc: &Lmc, pi: &InitialDistribution, w: &[usize]) -> Rational {
    fn go(lmc: &Lmc, q: usize, w: &[usize]) -> Rational {
        match w.split_first() {
            None => lmc.eow()[q].clone(),
            Some((&a, rest)) => lmc
                .matrix(a)
                .row(q)
                .iter()
                .map(|(r, p)| p * go(lmc, *r, rest))
                .sum(),
        }
    }
    pi.weights()
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(q, p)| p * go(lmc, q, w))
        .sum()
}

/// Longest path length in an acyclic chain's transition graph, by
/// exhaustive path search.
pub fn longest_path(lmc: &Lmc) -> usize {
    fn go(lmc: &Lmc, q: usize) -> usize {
        lmc.matrices()
            .iter()
            .flat_map(|m| m.row(q).iter().map(|(r, _)| *r))
            .map(|r| 1 + go(lmc, r))
            .max()
            .unwrap_or(0)
    }
    (0..lmc.num_states()).map(|q| go(lmc, q)).max().unwrap_or(0)
}

/// Half the L1 distance of two finite word distributions.
pub fn half_l1(a: &BTreeMap<Word, Rational>, b: &BTreeMap<Word, Rational>) -> Rational {
    let keys: BTreeSet<&Word> = a.keys().chain(b.keys()).collect();
    let zero = Rational::zero();
    let total: Rational = keys
        .into_iter()
        .map(|w| (a.get(w).unwrap_or(&zero) - b.get(w).unwrap_or(&zero)).abs())
        .sum();
    total / int(2)
}

/// Exact distance of an acyclic chain pair via enumeration of all paths.
pub fn oracle_distance(lmc: &Lmc, pi1: &InitialDistribution, pi2: &InitialDistribution) -> Rational {
    let n = longest_path(lmc);
    half_l1(&word_distribution(lmc, pi1, n), &word_distribution(lmc, pi2, n))
}

/// Every word of length exactly `n` over `k` letters, in lexicographic order.
pub fn all_words(k: usize, n: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..k).map(move |a| {
                    let mut w = w.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out
}

/// Accepting runs of an NFA on `w`, by enumerating every run.
pub fn brute_nacc(nfa: &Nfa, w: &[usize]) -> u64 {
    fn go(nfa: &Nfa, q: usize, w: &[usize]) -> u64 {
        match w.split_first() {
            None => nfa.is_accepting(q) as u64,
            Some((&a, rest)) => nfa.delta(q, a).iter().map(|&r| go(nfa, r, rest)).sum(),
        }
    }
    go(nfa, nfa.initial(), w)
}

/// Number of accepted words of length `n`, by enumerating `Σ^n`.
pub fn brute_count(nfa: &Nfa, n: usize) -> u64 {
    all_words(nfa.alphabet().len(), n)
        .iter()
        .filter(|w| brute_nacc(nfa, w) > 0)
        .count() as u64
}

/// Every NFA with states `{x0, x1}`, alphabet `{a1, a2}`, initial `x0`: all
/// transition relations times all accepting sets (1024 machines).
pub fn all_two_state_nfas() -> Vec<Nfa> {
    let mut out = Vec::new();
    for delta in 0u32..256 {
        for acc in 0u32..4 {
            let accepting: Vec<usize> = (0..2).filter(|q| acc >> q & 1 == 1).collect();
            let mut nfa = Nfa::new(names("x", 2), letters(2), 0, &accepting).unwrap();
            for q in 0..2 {
                for a in 0..2 {
                    let targets = delta >> (2 * (2 * q + a)) & 3;
                    for r in 0..2 {
                        if targets >> r & 1 == 1 {
                            nfa.add_transition(q, a, r);
                        }
                    }
                }
            }
            out.push(nfa);
        }
    }
    out
}

pub fn random_nfa(rng: &mut ChaCha8Rng, states: usize, k: usize) -> Nfa {
    let accepting: Vec<usize> = (0..states).filter(|_| rng.random_bool(0.4)).collect();
    let mut nfa = Nfa::new(names("x", states), letters(k), 0, &accepting).unwrap();
    for q in 0..states {
        for a in 0..k {
            for r in 0..states {
                if rng.random_bool(0.35) {
                    nfa.add_transition(q, a, r);
                }
            }
        }
    }
    nfa
}

pub fn random_pa(rng: &mut ChaCha8Rng, states: usize, k: usize) -> Pa {
    let alpha = normalized(rng, states, 2, 0);
    let accepting: Vec<usize> = (0..states).filter(|_| rng.random_bool(0.5)).collect();
    let mut pa = Pa::new(names("y", states), letters(k), alpha, &accepting).unwrap();
    for a in 0..k {
        for q in 0..states {
            let forced = rng.random_range(0..states);
            for (r, p) in normalized(rng, states, 3, forced).into_iter().enumerate() {
                pa.set_transition(q, a, r, p);
            }
        }
    }
    pa
}

/// `Pr_A(w)` by enumerating runs.
pub fn brute_accept(pa: &Pa, w: &[usize]) -> Rational {
    fn go(pa: &Pa, q: usize, w: &[usize]) -> Rational {
        match w.split_first() {
            None => {
                if pa.accepting().contains(&q) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            Some((&a, rest)) => pa
                .matrix(a)
                .row(q)
                .iter()
                .map(|(r, p)| p * go(pa, *r, rest))
                .sum(),
        }
    }
    pa.initial()
        .weights()
        .iter()
        .enumerate()
        .map(|(q, p)| p * go(pa, q, w))
        .sum()
}

pub fn big(n: u64) -> BigUint {
    BigUint::from(n)
}
