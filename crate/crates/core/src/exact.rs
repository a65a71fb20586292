//! Exact distances between the word distributions of two initial
//! distributions on one chain.
//!
//! For acyclic chains every quantity here is a finite sum over the support,
//! computed by a depth-first walk over prefixes that carries both forward
//! vectors `pi_i M(prefix)`. A word `w` belongs to the witness event `W`
//! when `Pr_pi1(w) >= Pr_pi2(w)`; ties go to `W` everywhere in the crate.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::EchelonBasis;
use crate::lmc::{dot, is_zero_vector, InitialDistribution, Lmc, Word};
use crate::rational::{denominator_lcm, Rational};

/// Default cap on enumerated prefixes.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Witness word lists are only materialized below this many words.
pub const WITNESS_LIST_CAP: usize = 10_000;

/// Subset search in [`brute_force_best_event`] is limited to this many words.
pub const BRUTE_FORCE_SUPPORT_CAP: usize = 20;

/// Depth-first walk over all prefixes of length `<= max_len` whose forward
/// vectors are not both zero, in alphabet order, prefix before extensions.
/// `visit` receives the prefix and its two word probabilities. Returns the
/// number of prefixes visited.
pub(crate) fn walk_pair<F>(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
    max_len: usize,
    budget: u64,
    mut visit: F,
) -> Result<u64>
where
    F: FnMut(&[usize], &Rational, &Rational) -> Result<()>,
{
    struct Walk<'a, F> {
        lmc: &'a Lmc,
        max_len: usize,
        budget: u64,
        visited: u64,
        prefix: Word,
        visit: F,
    }

    impl<F> Walk<'_, F>
    where
        F: FnMut(&[usize], &Rational, &Rational) -> Result<()>,
    {
        fn go(&mut self, v1: &[Rational], v2: &[Rational]) -> Result<()> {
            self.visited += 1;
            if self.visited > self.budget {
                return Err(Error::BudgetExceeded {
                    visited: self.visited,
                    budget: self.budget,
                    detail: String::new(),
                });
            }
            let eow = self.lmc.eow();
            (self.visit)(&self.prefix, &dot(v1, eow), &dot(v2, eow))?;
            if self.prefix.len() == self.max_len {
                return Ok(());
            }
            for a in 0..self.lmc.alphabet().len() {
                let m = self.lmc.matrix(a);
                let n1 = m.left_mul(v1);
                let n2 = m.left_mul(v2);
                if is_zero_vector(&n1) && is_zero_vector(&n2) {
                    continue;
                }
                self.prefix.push(a);
                self.go(&n1, &n2)?;
                self.prefix.pop();
            }
            Ok(())
        }
    }

    check_pair(lmc, pi1, pi2)?;
    let mut walk = Walk {
        lmc,
        max_len,
        budget,
        visited: 0,
        prefix: Vec::new(),
        visit: &mut visit,
    };
    walk.go(pi1.weights(), pi2.weights())?;
    Ok(walk.visited)
}

pub(crate) fn check_pair(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
) -> Result<()> {
    for pi in [pi1, pi2] {
        if pi.len() != lmc.num_states() {
            return Err(Error::input(format!(
                "distribution has {} entries but the chain has {} states",
                pi.len(),
                lmc.num_states()
            )));
        }
    }
    Ok(())
}

fn with_budget_detail(e: Error, detail: impl FnOnce() -> String) -> Error {
    match e {
        Error::BudgetExceeded {
            visited, budget, ..
        } => Error::BudgetExceeded {
            visited,
            budget,
            detail: detail(),
        },
        other => other,
    }
}

/// Aggregate description of the witness event `W = {w : pi1(w) >= pi2(w)}`
/// restricted to the support.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSummary {
    /// Support words in `W`.
    pub word_count: usize,
    pub mass1: Rational,
    pub mass2: Rational,
    /// The words themselves, in enumeration order, when fewer than
    /// [`WITNESS_LIST_CAP`].
    pub words: Option<Vec<Word>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceReport {
    pub distance: Rational,
    pub witness: WitnessSummary,
    /// Words with positive probability under either distribution.
    pub enumerated_words: u64,
    pub nodes_visited: u64,
    pub max_len: usize,
}

/// Exact total variation distance of an acyclic chain, with its witness.
pub fn tv_distance_acyclic(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
    budget: u64,
) -> Result<DistanceReport> {
    lmc.require_acyclic()?;
    let n = lmc.max_support_length()?;
    let mut l1 = Rational::zero();
    let mut mass1 = Rational::zero();
    let mut mass2 = Rational::zero();
    let mut support = 0u64;
    let mut word_count = 0usize;
    let mut words = Some(Vec::new());
    let visited = walk_pair(lmc, pi1, pi2, n, budget, |w, p1, p2| {
        if p1.is_zero() && p2.is_zero() {
            return Ok(());
        }
        support += 1;
        l1 += (p1 - p2).abs();
        if p1 >= p2 {
            word_count += 1;
            mass1 += p1;
            mass2 += p2;
            if let Some(list) = words.as_mut() {
                if list.len() + 1 < WITNESS_LIST_CAP {
                    list.push(w.to_vec());
                } else {
                    words = None;
                }
            }
        }
        Ok(())
    })
    .map_err(|e| with_budget_detail(e, || format!(" while enumerating words up to length {n}")))?;

    Ok(DistanceReport {
        distance: l1 / Rational::from_integer(2.into()),
        witness: WitnessSummary {
            word_count,
            mass1,
            mass2,
            words,
        },
        enumerated_words: support,
        nodes_visited: visited,
        max_len: n,
    })
}

/// `sum_w |pi1(w) - pi2(w)|^k` for an acyclic chain.
pub fn lk_distance_acyclic(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
    k: u32,
    budget: u64,
) -> Result<Rational> {
    if k == 0 {
        return Err(Error::input("the exponent k must be positive"));
    }
    lmc.require_acyclic()?;
    let n = lmc.max_support_length()?;
    let mut total = Rational::zero();
    walk_pair(lmc, pi1, pi2, n, budget, |_, p1, p2| {
        if p1 != p2 {
            total += num_traits::pow((p1 - p2).abs(), k as usize);
        }
        Ok(())
    })
    .map_err(|e| with_budget_detail(e, || format!(" while enumerating words up to length {n}")))?;
    Ok(total)
}

/// Integer certificate for a threshold decision on an acyclic chain.
///
/// With `D` a common denominator of all inputs and `n` the longest support
/// length, `lhs = sum_{|w| <= n} D^(n-|w|) |(pi1' - pi2') M'(w) eta'^T|` where
/// primes denote the inputs scaled by `D`, and `rhs = 2 D^(n+2) tau` (plus 1
/// when strict). The distance exceeds (resp. reaches) `tau` iff `lhs >= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdCertificate {
    pub decision: bool,
    pub strict: bool,
    pub tau: Rational,
    pub lhs_integer: BigInt,
    pub rhs_integer: BigInt,
    pub denominator_product: BigInt,
    pub max_len: usize,
}

pub fn threshold_decide_acyclic(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
    tau: &Rational,
    strict: bool,
    budget: u64,
) -> Result<ThresholdCertificate> {
    if tau.is_negative() || *tau > Rational::one() {
        return Err(Error::input("threshold must lie in [0,1]"));
    }
    check_pair(lmc, pi1, pi2)?;
    lmc.require_acyclic()?;
    let n = lmc.max_support_length()?;

    let all_values = pi1
        .weights()
        .iter()
        .chain(pi2.weights())
        .chain(lmc.eow())
        .chain(lmc.matrices().iter().flat_map(|m| m.entries().map(|(_, _, v)| v)))
        .chain([tau]);
    let d = denominator_lcm(all_values);
    let dr = Rational::from_integer(d.clone());
    let scale = |v: &Rational| (v * &dr).to_integer();

    let diff: Vec<BigInt> = pi1
        .weights()
        .iter()
        .zip(pi2.weights())
        .map(|(a, b)| scale(a) - scale(b))
        .collect();
    let eta: Vec<BigInt> = lmc.eow().iter().map(scale).collect();
    let mats: Vec<Vec<Vec<(usize, BigInt)>>> = lmc
        .matrices()
        .iter()
        .map(|m| {
            (0..lmc.num_states())
                .map(|i| m.row(i).iter().map(|(j, v)| (*j, scale(v))).collect())
                .collect()
        })
        .collect();
    let powers: Vec<BigInt> = (0..=n as u32).map(|e| num_traits::pow(d.clone(), e as usize)).collect();

    struct IntWalk<'a> {
        mats: &'a [Vec<Vec<(usize, BigInt)>>],
        eta: &'a [BigInt],
        powers: &'a [BigInt],
        n: usize,
        budget: u64,
        visited: u64,
        lhs: BigInt,
    }

    impl IntWalk<'_> {
        fn go(&mut self, v: &[BigInt], depth: usize) -> Result<()> {
            self.visited += 1;
            if self.visited > self.budget {
                return Err(Error::BudgetExceeded {
                    visited: self.visited,
                    budget: self.budget,
                    detail: format!(" while enumerating words up to length {}", self.n),
                });
            }
            let inner: BigInt = v
                .iter()
                .zip(self.eta)
                .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                .map(|(a, b)| a * b)
                .sum();
            if !inner.is_zero() {
                self.lhs += &self.powers[self.n - depth] * inner.abs();
            }
            if depth == self.n {
                return Ok(());
            }
            for m in self.mats {
                let mut next = vec![BigInt::zero(); v.len()];
                for (i, vi) in v.iter().enumerate() {
                    if vi.is_zero() {
                        continue;
                    }
                    for (j, x) in &m[i] {
                        next[*j] += vi * x;
                    }
                }
                // A zero difference vector contributes nothing below it.
                if next.iter().all(Zero::is_zero) {
                    continue;
                }
                self.go(&next, depth + 1)?;
            }
            Ok(())
        }
    }

    let mut walk = IntWalk {
        mats: &mats,
        eta: &eta,
        powers: &powers,
        n,
        budget,
        visited: 0,
        lhs: BigInt::zero(),
    };
    if !diff.iter().all(Zero::is_zero) {
        walk.go(&diff, 0)?;
    }

    let d_n2 = num_traits::pow(d.clone(), n + 2);
    let mut rhs = (Rational::from_integer(BigInt::from(2) * d_n2) * tau).to_integer();
    if strict {
        rhs += 1;
    }
    Ok(ThresholdCertificate {
        decision: walk.lhs >= rhs,
        strict,
        tau: tau.clone(),
        lhs_integer: walk.lhs,
        rhs_integer: rhs,
        denominator_product: d,
        max_len: n,
    })
}

/// A word on which the two distributions differ, if any. Works on cyclic
/// chains: explores the span of `(pi1 - pi2) M(w)` breadth-first, keeping
/// only words whose vector is independent of those already seen, so at most
/// `|Q|` words are ever expanded.
pub fn distinguishing_word(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
) -> Result<Option<Word>> {
    check_pair(lmc, pi1, pi2)?;
    let start: Vec<Rational> = pi1
        .weights()
        .iter()
        .zip(pi2.weights())
        .map(|(a, b)| a - b)
        .collect();
    let mut basis = EchelonBasis::new();
    let mut queue = VecDeque::new();
    if basis.insert(&start) {
        queue.push_back((Word::new(), start));
    }
    while let Some((w, v)) = queue.pop_front() {
        if !dot(&v, lmc.eow()).is_zero() {
            return Ok(Some(w));
        }
        for a in 0..lmc.alphabet().len() {
            let next = lmc.matrix(a).left_mul(&v);
            if basis.insert(&next) {
                let mut wa = w.clone();
                wa.push(a);
                queue.push_back((wa, next));
            }
        }
    }
    Ok(None)
}

/// Whether `pi1` and `pi2` induce the same distribution on words.
pub fn equivalence(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
) -> Result<bool> {
    Ok(distinguishing_word(lmc, pi1, pi2)?.is_none())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestEvent {
    /// The maximizing subset of the enumerated support, in enumeration order.
    pub words: Vec<Word>,
    pub value: Rational,
    pub support_size: usize,
}

/// Literal maximization of `pi1(W) - pi2(W)` over every subset `W` of the
/// support words of length `<= max_len`. A test oracle: exponential in the
/// support size, capped at [`BRUTE_FORCE_SUPPORT_CAP`] words.
///
/// Among maximizers the largest subset is returned, which is the one that
/// keeps all ties.
pub fn brute_force_best_event(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
    max_len: usize,
) -> Result<BestEvent> {
    let mut support: Vec<(Word, Rational)> = Vec::new();
    let mut too_many = 0usize;
    let result = walk_pair(lmc, pi1, pi2, max_len, DEFAULT_BUDGET, |w, p1, p2| {
        if p1.is_zero() && p2.is_zero() {
            return Ok(());
        }
        if support.len() == BRUTE_FORCE_SUPPORT_CAP {
            too_many = support.len() + 1;
            return Err(Error::OracleInfeasible {
                support: too_many,
                cap: BRUTE_FORCE_SUPPORT_CAP,
            });
        }
        support.push((w.to_vec(), p1 - p2));
        Ok(())
    });
    result?;

    let n = support.len();
    // Gray-code walk: consecutive subsets differ in exactly one word.
    let mut current = Rational::zero();
    let mut mask: u32 = 0;
    let mut best = (Rational::zero(), 0u32);
    for step in 1u32..(1u32 << n) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        if mask & (1 << bit) != 0 {
            current += &support[bit].1;
        } else {
            current -= &support[bit].1;
        }
        if current > best.0 || (current == best.0 && mask.count_ones() > best.1.count_ones()) {
            best = (current.clone(), mask);
        }
    }
    let words = support
        .iter()
        .enumerate()
        .filter(|(i, _)| best.1 & (1 << i) != 0)
        .map(|(_, (w, _))| w.clone())
        .collect();
    Ok(BestEvent {
        words,
        value: best.0,
        support_size: n,
    })
}
