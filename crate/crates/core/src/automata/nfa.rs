use std::collections::{BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::{check_fresh_labels, ReductionKind, ReductionOutput, LABEL_ACC, LABEL_B, LABEL_REJ};
use crate::error::{Error, Result};
use crate::lmc::{InitialDistribution, LmcBuilder};
use crate::rational::{from_biguint, fraction_string, ratio, Rational};

/// Cap on the number of subsets explored by [`count_accepted`].
pub const DEFAULT_SUBSET_CAP: usize = 1 << 20;

/// Nondeterministic finite automaton with a single initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    states: Vec<String>,
    alphabet: Vec<String>,
    delta: Vec<Vec<BTreeSet<usize>>>,
    initial: usize,
    accepting: BTreeSet<usize>,
}

impl Nfa {
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<String>,
        initial: usize,
        accepting: &[usize],
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::input("an NFA needs at least one state"));
        }
        check_unique(&states, "state")?;
        check_unique(&alphabet, "label")?;
        let s = states.len();
        if initial >= s || accepting.iter().any(|&q| q >= s) {
            return Err(Error::input("state index out of range"));
        }
        Ok(Self {
            delta: vec![vec![BTreeSet::new(); alphabet.len()]; s],
            states,
            alphabet,
            initial,
            accepting: accepting.iter().copied().collect(),
        })
    }

    /// Panics on out-of-range indices.
    pub fn add_transition(&mut self, from: usize, label: usize, to: usize) -> &mut Self {
        assert!(to < self.states.len(), "target state out of range");
        self.delta[from][label].insert(to);
        self
    }

    pub fn add_transition_named(&mut self, from: &str, label: &str, to: &str) -> Result<&mut Self> {
        let f = self.state_index(from)?;
        let a = self.label_index(label)?;
        let t = self.state_index(to)?;
        Ok(self.add_transition(f, a, t))
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting.contains(&q)
    }

    pub fn delta(&self, q: usize, label: usize) -> &BTreeSet<usize> {
        &self.delta[q][label]
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

    /// Parses a whitespace- or comma-separated word; `""` and `ε` are empty.
    pub fn parse_word(&self, text: &str) -> Result<Vec<usize>> {
        text.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty() && *t != "ε")
            .map(|t| self.label_index(t))
            .collect()
    }
}

fn check_unique(names: &[String], what: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::input(format!("duplicate {what} name {n:?}")));
        }
    }
    Ok(())
}

/// Number of accepting runs of `nfa` on `w`.
pub fn nacc(nfa: &Nfa, w: &[usize]) -> Result<BigUint> {
    let k = nfa.alphabet.len();
    if let Some(&a) = w.iter().find(|&&a| a >= k) {
        return Err(Error::input(format!("label index {a} outside the alphabet")));
    }
    let mut v = vec![BigUint::zero(); nfa.states.len()];
    v[nfa.initial] = BigUint::one();
    for &a in w {
        let mut next = vec![BigUint::zero(); v.len()];
        for (q, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &r in &nfa.delta[q][a] {
                next[r] += c;
            }
        }
        v = next;
    }
    Ok(nfa.accepting.iter().map(|&q| &v[q]).sum())
}

/// `Σ_{w ∈ Σ^n} nacc(w)`, by a run-count recursion over states.
pub fn run_sum(nfa: &Nfa, n: u32) -> BigUint {
    let mut v = vec![BigUint::zero(); nfa.states.len()];
    v[nfa.initial] = BigUint::one();
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); v.len()];
        for (q, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for targets in &nfa.delta[q] {
                for &r in targets {
                    next[r] += c;
                }
            }
        }
        v = next;
    }
    nfa.accepting.iter().map(|&q| &v[q]).sum()
}

/// `|L(nfa) ∩ Σ^n|`, counting paths of length `n` in the subset automaton.
/// Fails when more than `cap` distinct subsets are reached.
pub fn count_accepted(nfa: &Nfa, n: u32, cap: usize) -> Result<BigUint> {
    let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut intern = |set: Vec<usize>, subsets: &mut Vec<Vec<usize>>| -> Result<usize> {
        if let Some(&id) = ids.get(&set) {
            return Ok(id);
        }
        if subsets.len() >= cap {
            return Err(Error::CapExceeded {
                what: "determinization",
                limit: cap as u64,
                detail: "; enumerate Σ^n with nacc instead when it is small".into(),
            });
        }
        ids.insert(set.clone(), subsets.len());
        subsets.push(set);
        Ok(subsets.len() - 1)
    };

    let start = intern(vec![nfa.initial], &mut subsets)?;
    let mut layer: HashMap<usize, BigUint> = HashMap::from([(start, BigUint::one())]);
    let mut successors: HashMap<(usize, usize), usize> = HashMap::new();
    for _ in 0..n {
        let mut next: HashMap<usize, BigUint> = HashMap::new();
        for (id, count) in layer {
            for a in 0..nfa.alphabet.len() {
                let target = match successors.get(&(id, a)) {
                    Some(&t) => t,
                    None => {
                        let set: BTreeSet<usize> = subsets[id]
                            .iter()
                            .flat_map(|&q| nfa.delta[q][a].iter().copied())
                            .collect();
                        let t = intern(set.into_iter().collect(), &mut subsets)?;
                        successors.insert((id, a), t);
                        t
                    }
                };
                *next.entry(target).or_default() += &count;
            }
        }
        layer = next;
    }
    Ok(layer
        .into_iter()
        .filter(|(id, _)| subsets[*id].iter().any(|q| nfa.is_accepting(*q)))
        .map(|(_, c)| c)
        .sum())
}

/// Builds the acyclic chain pair whose distance encodes `|L(nfa) ∩ Σ^n|`.
///
/// States are the spine `p_0..p_n`, layered copies `q_i^(j)` of the NFA
/// states, overflow states `r_i`, and a sink `q_eow`. The first chain starts
/// in `p_0`, the second in `q_0^(j)` for the initial NFA state `j`.
pub fn reduce_nfa(nfa: &Nfa, n: u32) -> Result<ReductionOutput> {
    if n == 0 {
        return Err(Error::input("word length n must be at least 1"));
    }
    check_fresh_labels(&nfa.alphabet)?;
    let k = nfa.alphabet.len();
    let s = nfa.states.len();
    if k == 0 {
        return Err(Error::input("the NFA alphabet is empty"));
    }
    let nu = n as usize;

    let mut names = Vec::new();
    for i in 0..=nu {
        names.push(format!("p_{i}"));
    }
    names.push("q_eow".to_string());
    for i in 0..=nu {
        for j in 1..=s {
            names.push(format!("q_{i}^({j})"));
        }
    }
    for i in 0..=nu {
        names.push(format!("r_{i}"));
    }
    let p = |i: usize| i;
    let eow = nu + 1;
    let q = |i: usize, j: usize| nu + 2 + i * s + j;
    let r = |i: usize| nu + 2 + (nu + 1) * s + i;

    let mut labels = nfa.alphabet.clone();
    labels.extend([LABEL_B, LABEL_ACC, LABEL_REJ].map(String::from));
    let (lb, lacc, lrej) = (k, k + 1, k + 2);

    let mut b = LmcBuilder::new(names, labels)?;
    let kr = Rational::from_integer(BigInt::from(k));
    let sr = Rational::from_integer(BigInt::from(s));
    let one_over_k = Rational::one() / &kr;
    let one_over_ks = Rational::one() / (&kr * &sr);
    let sn = from_biguint(BigUint::from(s).pow(n));

    for i in 0..nu {
        for a in 0..k {
            b.set_transition(p(i), a, p(i + 1), one_over_k.clone());
            b.set_transition(r(i), a, r(i + 1), one_over_k.clone());
            for j in 0..s {
                let targets = &nfa.delta[j][a];
                for &t in targets {
                    b.set_transition(q(i, j), a, q(i + 1, t), one_over_ks.clone());
                }
                let overflow = &one_over_k * (Rational::one() - ratio(targets.len() as i64, s as i64));
                b.set_transition(q(i, j), a, r(i + 1), overflow);
            }
        }
    }
    let inv_sn = Rational::one() / &sn;
    b.set_transition(p(nu), lb, eow, inv_sn.clone());
    b.set_transition(p(nu), lrej, eow, Rational::one() - inv_sn);
    for j in 0..s {
        let label = if nfa.is_accepting(j) { lacc } else { lrej };
        b.set_transition(q(nu, j), label, eow, Rational::one());
    }
    b.set_transition(r(nu), lrej, eow, Rational::one());
    b.set_eow(eow, Rational::one());
    let lmc = b.build();

    let total = lmc.num_states();
    let runs = run_sum(nfa, n);
    let kn = BigUint::from(k).pow(n);
    // pi1(B) = 1 and pi2(B) = 1 - runs / (k^n s^n).
    let y = from_biguint(runs.clone()) / (from_biguint(kn) * &sn);
    Ok(ReductionOutput {
        pi1: InitialDistribution::dirac(total, p(0)),
        pi2: InitialDistribution::dirac(total, q(0, nfa.initial)),
        lmc,
        kind: ReductionKind::Nfa {
            y,
            run_sum: runs,
            n,
            k: k as u64,
            s: s as u64,
        },
    })
}

/// Recovers `|L(A) ∩ Σ^n|` from an approximation `d_tilde` of the distance of
/// the [`reduce_nfa`] instance, accurate to within `1 / (3 k^n s^n)`.
pub fn extract_count(y: &Rational, d_tilde: &Rational, n: u32, k: u64, s: u64) -> Result<BigUint> {
    let kn = BigInt::from(k).pow(n);
    let scale = &kn * BigInt::from(s).pow(n);
    let scale_r = Rational::from_integer(scale.clone());
    let target = Rational::from_integer(kn.clone()) - &scale_r * (d_tilde - y);
    // Nearest integer, ties upwards.
    let half = ratio(1, 2);
    let u = (target + half).floor().to_integer();
    if u.is_negative() || u > kn {
        return Err(Error::Inconsistent(format!(
            "no word count in [0, {kn}] is consistent with distance {}",
            fraction_string(d_tilde)
        )));
    }
    let implied = y + Rational::from_integer(&kn - &u) / &scale_r;
    let band = Rational::one() / (Rational::from_integer(BigInt::from(3)) * &scale_r);
    if (implied - d_tilde).abs() > band {
        return Err(Error::Inconsistent(format!(
            "distance {} is not within 1/(3 k^n s^n) of any count",
            fraction_string(d_tilde)
        )));
    }
    Ok(u.to_biguint().expect("nonnegative"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{tv_distance_acyclic, DEFAULT_BUDGET};
    use crate::fixtures::suffix_nfa;

    #[test]
    fn runs_on_the_suffix_nfa() {
        let nfa = suffix_nfa();
        assert_eq!(nacc(&nfa, &[1, 1, 1]).unwrap(), BigUint::from(3u32));
        assert_eq!(nacc(&nfa, &[0, 0, 0]).unwrap(), BigUint::zero());
        assert_eq!(nacc(&nfa, &[]).unwrap(), BigUint::zero());
        assert!(nacc(&nfa, &[2]).is_err());
    }

    #[test]
    fn empty_word_accepted_iff_initial_accepting() {
        let names = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let nfa = Nfa::new(names(&["x"]), names(&["a"]), 0, &[0]).unwrap();
        assert_eq!(nacc(&nfa, &[]).unwrap(), BigUint::one());
        assert_eq!(count_accepted(&nfa, 0, 10).unwrap(), BigUint::one());
        assert_eq!(count_accepted(&nfa, 3, 10).unwrap(), BigUint::zero());
    }

    #[test]
    fn counts_words_ending_in_a2() {
        let nfa = suffix_nfa();
        // Oracle: words over {a1, a2} of length n ending in a2.
        for n in 1..8u32 {
            let expected = BigUint::from(1u32) << (n - 1);
            assert_eq!(count_accepted(&nfa, n, DEFAULT_SUBSET_CAP).unwrap(), expected);
        }
        assert!(count_accepted(&nfa, 3, 1).unwrap_err().is_resource_limit());
    }

    #[test]
    fn run_sum_matches_enumeration() {
        let nfa = suffix_nfa();
        let mut total = BigUint::zero();
        for bits in 0..8u32 {
            let w: Vec<usize> = (0..3).map(|i| ((bits >> i) & 1) as usize).collect();
            total += nacc(&nfa, &w).unwrap();
        }
        assert_eq!(total, BigUint::from(7u32));
        assert_eq!(run_sum(&nfa, 3), total);
    }

    #[test]
    fn suffix_nfa_reduction_at_three() {
        let nfa = suffix_nfa();
        let out = reduce_nfa(&nfa, 3).unwrap();
        assert!(out.lmc.validate().is_empty());
        assert!(out.lmc.is_acyclic());
        let ReductionKind::Nfa { y, .. } = &out.kind else { panic!() };
        assert_eq!(*y, ratio(7, 64));
        let d = tv_distance_acyclic(&out.lmc, &out.pi1, &out.pi2, DEFAULT_BUDGET)
            .unwrap()
            .distance;
        assert_eq!(d, ratio(11, 64));
        assert_eq!(out.certified_distance(&BigUint::from(4u32)), Some(d));
        assert!(reduce_nfa(&nfa, 0).is_err());
    }

    #[test]
    fn extraction_band() {
        let y = ratio(7, 64);
        let u = extract_count(&y, &ratio(11, 64), 3, 2, 2).unwrap();
        assert_eq!(u, BigUint::from(4u32));
        let nudge = ratio(1, 4 * 64);
        assert_eq!(extract_count(&y, &(ratio(11, 64) + &nudge), 3, 2, 2).unwrap(), u);
        assert_eq!(extract_count(&y, &(ratio(11, 64) - &nudge), 3, 2, 2).unwrap(), u);
        let off = ratio(11, 64) + ratio(1, 128);
        assert!(matches!(
            extract_count(&y, &off, 3, 2, 2),
            Err(Error::Inconsistent(_))
        ));
    }
}
