use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::exact::check_pair;
use crate::lmc::{InitialDistribution, Lmc, Word};
use crate::rational::{fraction_string, ln_upper, ratio, Rational};

/// Identifier recorded next to every seed.
pub const RNG_ALGORITHM: &str = "chacha20/seed_from_u64";

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Lazily consumed uniform bits.
struct Bits<'a, R: RngCore> {
    rng: &'a mut R,
    buf: u64,
    left: u32,
}

impl<R: RngCore> Bits<'_, R> {
    fn next(&mut self) -> bool {
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 64;
        }
        self.left -= 1;
        let b = self.buf & 1 == 1;
        self.buf >>= 1;
        b
    }
}

/// Exact categorical choice. Outcome `i` covers `[c_{i-1}, c_i) / den` of
/// the unit interval; a uniform point is refined bit by bit until its dyadic
/// interval sits inside one bucket, so no outcome is biased by truncation.
#[derive(Clone, Debug)]
struct ExactChoice {
    cumulative: Vec<BigUint>,
    den: BigUint,
}

impl ExactChoice {
    fn new(weights: &[Rational]) -> Result<Self> {
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::input("negative probability in sampler"));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::input(format!(
                "sampling weights sum to {}, not 1",
                fraction_string(&total)
            )));
        }
        let den = weights
            .iter()
            .fold(BigUint::one(), |acc, w| acc.lcm(w.denom().magnitude()));
        let mut acc = BigUint::zero();
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w.numer().magnitude() * (&den / w.denom().magnitude());
                acc.clone()
            })
            .collect();
        Ok(Self { cumulative, den })
    }

    fn choose<R: RngCore>(&self, bits: &mut Bits<'_, R>) -> usize {
        let mut x = BigUint::zero();
        let mut j = 0u64;
        loop {
            let lower = &x * &self.den;
            let upper = &lower + &self.den;
            let i = self
                .cumulative
                .iter()
                .position(|c| lower < (c << j))
                .expect("cumulative weights end at 1");
            if upper <= (&self.cumulative[i] << j) {
                return i;
            }
            x <<= 1u32;
            if bits.next() {
                x += 1u32;
            }
            j += 1;
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Step {
    Stop,
    Emit { label: usize, to: usize },
}

/// Draws words with probability exactly `Pr_pi(w)`.
#[derive(Clone, Debug)]
pub struct WordSampler {
    initial: ExactChoice,
    choices: Vec<ExactChoice>,
    steps: Vec<Vec<Step>>,
}

impl WordSampler {
    /// Fails unless every state's outgoing probabilities sum to 1.
    pub fn new(lmc: &Lmc, pi: &InitialDistribution) -> Result<Self> {
        if pi.len() != lmc.num_states() {
            return Err(Error::input("distribution length does not match the chain"));
        }
        let initial = ExactChoice::new(pi.weights())?;
        let mut choices = Vec::with_capacity(lmc.num_states());
        let mut steps = Vec::with_capacity(lmc.num_states());
        for q in 0..lmc.num_states() {
            let mut weights = vec![lmc.eow()[q].clone()];
            let mut outcomes = vec![Step::Stop];
            for a in 0..lmc.alphabet().len() {
                for (to, p) in lmc.matrix(a).row(q) {
                    weights.push(p.clone());
                    outcomes.push(Step::Emit { label: a, to: *to });
                }
            }
            choices.push(ExactChoice::new(&weights).map_err(|e| {
                Error::input(format!("state {}: {e}", lmc.states()[q]))
            })?);
            steps.push(outcomes);
        }
        Ok(Self {
            initial,
            choices,
            steps,
        })
    }

    /// Walks the chain from a random initial state until it stops. Fails when
    /// the word grows past `max_len`.
    pub fn sample<R: RngCore>(&self, rng: &mut R, max_len: usize) -> Result<Word> {
        let mut bits = Bits {
            rng,
            buf: 0,
            left: 0,
        };
        let mut q = self.initial.choose(&mut bits);
        let mut word = Word::new();
        loop {
            match self.steps[q][self.choices[q].choose(&mut bits)] {
                Step::Stop => return Ok(word),
                Step::Emit { label, to } => {
                    if word.len() == max_len {
                        return Err(Error::LengthExceeded { max_len });
                    }
                    word.push(label);
                    q = to;
                }
            }
        }
    }
}

pub fn sample_word<R: RngCore>(
    lmc: &Lmc,
    pi: &InitialDistribution,
    rng: &mut R,
    max_len: usize,
) -> Result<Word> {
    WordSampler::new(lmc, pi)?.sample(rng, max_len)
}

/// Smallest `m >= (2 / eps^2) ln(4 / delta)`, using a certified upper bound
/// on the logarithm so that `m` is never too small.
pub fn sample_count(epsilon: &Rational, delta: &Rational) -> Result<u64> {
    if !epsilon.is_positive() {
        return Err(Error::input("epsilon must be positive"));
    }
    if !delta.is_positive() || *delta >= Rational::one() {
        return Err(Error::input("delta must lie in (0,1)"));
    }
    let ln = ln_upper(&(ratio(4, 1) / delta));
    let m = (Rational::from_integer(2.into()) / (epsilon * epsilon) * ln).ceil();
    m.to_integer()
        .to_u64()
        .ok_or_else(|| Error::input("sample count does not fit in 64 bits"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleEstimate {
    /// `1 - p_hat_1 - p_hat_2`.
    pub estimate: Rational,
    /// Fraction of `pi1` samples with `pi1(w) < pi2(w)`.
    pub p_hat_1: Rational,
    /// Fraction of `pi2` samples with `pi1(w) >= pi2(w)`.
    pub p_hat_2: Rational,
    pub samples_per_side: u64,
    pub epsilon: Rational,
    pub delta: Rational,
    pub seed: u64,
    pub rng: &'static str,
}

/// Monte Carlo estimate of the distance of an acyclic chain: within
/// `epsilon` of the true distance with probability at least `1 - delta`.
///
/// One seeded stream draws all `pi1` samples, then all `pi2` samples.
/// Membership of each sampled word is decided with exact probabilities.
pub fn tv_sample_acyclic(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
    epsilon: &Rational,
    delta: &Rational,
    seed: u64,
) -> Result<SampleEstimate> {
    check_pair(lmc, pi1, pi2)?;
    lmc.require_acyclic()?;
    let m = sample_count(epsilon, delta)?;
    let max_len = lmc.max_support_length()?;
    let s1 = WordSampler::new(lmc, pi1)?;
    let s2 = WordSampler::new(lmc, pi2)?;
    let mut rng = rng_from_seed(seed);

    // Cached membership in {w : pi1(w) >= pi2(w)}.
    let mut in_w2: HashMap<Word, bool> = HashMap::new();
    let mut classify = |w: Word| -> Result<bool> {
        if let Some(&b) = in_w2.get(&w) {
            return Ok(b);
        }
        let b = lmc.word_probability(pi1, &w)? >= lmc.word_probability(pi2, &w)?;
        in_w2.insert(w, b);
        Ok(b)
    };

    let mut hits1 = 0u64;
    for _ in 0..m {
        if !classify(s1.sample(&mut rng, max_len)?)? {
            hits1 += 1;
        }
    }
    let mut hits2 = 0u64;
    for _ in 0..m {
        if classify(s2.sample(&mut rng, max_len)?)? {
            hits2 += 1;
        }
    }
    let frac = |h: u64| Rational::new(h.into(), m.max(1).into());
    let p_hat_1 = frac(hits1);
    let p_hat_2 = frac(hits2);
    Ok(SampleEstimate {
        estimate: Rational::one() - &p_hat_1 - &p_hat_2,
        p_hat_1,
        p_hat_2,
        samples_per_side: m,
        epsilon: epsilon.clone(),
        delta: delta.clone(),
        seed,
        rng: RNG_ALGORITHM,
    })
}
