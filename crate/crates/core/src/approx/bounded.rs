use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::check_pair;
use crate::floatk::{precision_for, FloatK, FloatModel};
use crate::lmc::{dot, is_zero_vector, InitialDistribution, Lmc};
use crate::rational::{ceil_to_natural, int, ln_upper, Rational};

/// Steps of the exact tail-mass recursion tried before falling back to the
/// closed-form bound.
pub const DEFAULT_LENGTH_STEP_CAP: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LengthMethod {
    /// Smallest `n` found by iterating exact tail masses.
    TailRecursion,
    /// `n = k |Q|` with `k >= -ln(lambda) / p_min^|Q|`.
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthBound {
    pub n: u64,
    pub method: LengthMethod,
}

/// Closed-form `n` with `Pr_pi(Σ^{>n}) <= lambda` for every initial
/// distribution: with `p_min` the smallest positive probability of the chain,
/// every state stops within `|Q|` more letters with probability at least
/// `p_min^|Q|`, so `n = k |Q|` works for `k >= -ln(lambda) / p_min^|Q|`.
pub fn length_bound_closed_form(lmc: &Lmc, lambda: &Rational) -> Result<u64> {
    if !lambda.is_positive() {
        return Err(Error::input("lambda must be positive"));
    }
    let q = lmc.num_states() as u64;
    let Some(p_min) = lmc.min_positive_probability() else {
        return Ok(0);
    };
    if p_min.is_one() {
        // Deterministic chain: every word is shorter than |Q|.
        return Ok(q.saturating_sub(1));
    }
    if *lambda >= Rational::one() {
        return Ok(0);
    }
    let neg_ln = ln_upper(&(Rational::one() / lambda));
    let per_block = num_traits::pow(p_min, q as usize);
    let k = ceil_to_natural(&(neg_ln / per_block));
    let k: u64 = k
        .try_into()
        .map_err(|_| Error::input("closed-form length bound does not fit in 64 bits"))?;
    k.checked_mul(q)
        .ok_or_else(|| Error::input("closed-form length bound does not fit in 64 bits"))
}

/// A length `n` with `Pr_pi_i(words longer than n) <= lambda` for both
/// distributions. Prefers the smallest such `n` from the exact tail masses;
/// after `step_cap` steps without success uses the closed form.
pub fn length_bound(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
    lambda: &Rational,
    step_cap: u64,
) -> Result<LengthBound> {
    if !lambda.is_positive() {
        return Err(Error::input("lambda must be positive"));
    }
    check_pair(lmc, pi1, pi2)?;
    let mut t1 = lmc.tail_masses(pi1)?;
    let mut t2 = lmc.tail_masses(pi2)?;
    for n in 0..step_cap {
        let a = t1.next().expect("infinite");
        let b = t2.next().expect("infinite");
        if a <= *lambda && b <= *lambda {
            return Ok(LengthBound {
                n,
                method: LengthMethod::TailRecursion,
            });
        }
    }
    Ok(LengthBound {
        n: length_bound_closed_form(lmc, lambda)?,
        method: LengthMethod::ClosedForm,
    })
}

/// Deterministic approximation of the distance within `epsilon / 2`,
/// for cyclic chains as well.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedEstimate {
    /// `1 - s1 - s2`.
    pub estimate: Rational,
    /// `pi1` mass of words classified `pi~1(w) < pi~2(w)`.
    pub s1: Rational,
    /// `pi2` mass of the remaining words of length `<= n`.
    pub s2: Rational,
    pub epsilon: Rational,
    pub lambda: Rational,
    pub theta: Rational,
    pub n: u64,
    pub length_method: LengthMethod,
    pub k: u32,
    pub budget: u64,
    pub words_enumerated: u64,
    pub nodes_visited: u64,
}

/// One enumerated word with its exact and floating-point probabilities.
#[derive(Debug)]
pub struct ClassifiedWord<'a> {
    pub word: &'a [usize],
    pub p1: &'a Rational,
    pub p2: &'a Rational,
    pub approx1: &'a FloatK,
    pub approx2: &'a FloatK,
    /// `approx1 < approx2`; otherwise the word counts towards `s2`.
    pub in_first: bool,
}

pub fn tv_bounded(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
    epsilon: &Rational,
    budget: u64,
) -> Result<BoundedEstimate> {
    tv_bounded_with(lmc, pi1, pi2, epsilon, budget, |_| {})
}

/// [`tv_bounded`], reporting every enumerated word to `observe`.
///
/// Uses `lambda = epsilon / 4` for the neglected tail and `theta = epsilon / 8`
/// for the relative error of the floating-point word probabilities, so that
/// `|d - estimate| <= epsilon / 2`. Words of length `<= n` are enumerated
/// exhaustively, so the cost grows like `|Σ|^n`.
pub fn tv_bounded_with<F>(
    lmc: &Lmc,
    pi1: &InitialDistribution,
    pi2: &InitialDistribution,
    epsilon: &Rational,
    budget: u64,
    mut observe: F,
) -> Result<BoundedEstimate>
where
    F: FnMut(&ClassifiedWord<'_>),
{
    if !epsilon.is_positive() {
        return Err(Error::input("epsilon must be positive"));
    }
    check_pair(lmc, pi1, pi2)?;
    let lambda = epsilon / int(4);
    let theta = epsilon / int(8);
    let bound = length_bound(lmc, pi1, pi2, &lambda, DEFAULT_LENGTH_STEP_CAP)?;
    let n = bound.n;
    let k = precision_for(n, lmc.num_states() as u64, &theta);
    let model = FloatModel::new(lmc, k);

    struct Walk<'a, F> {
        lmc: &'a Lmc,
        model: &'a FloatModel,
        n: u64,
        budget: u64,
        visited: u64,
        words: u64,
        prefix: Vec<usize>,
        s1: Rational,
        s2: Rational,
        observe: F,
    }

    impl<F: FnMut(&ClassifiedWord<'_>)> Walk<'_, F> {
        fn go(
            &mut self,
            v1: &[Rational],
            v2: &[Rational],
            f1: &[FloatK],
            f2: &[FloatK],
        ) -> Result<()> {
            self.visited += 1;
            if self.visited > self.budget {
                return Err(Error::BudgetExceeded {
                    visited: self.visited,
                    budget: self.budget,
                    detail: format!(
                        "; exhaustive enumeration up to length {} at precision {} exceeds desk scale \
                         (the polynomial-space counting route is not implemented)",
                        self.n, self.model.precision()
                    ),
                });
            }
            let p1 = dot(v1, self.lmc.eow());
            let p2 = dot(v2, self.lmc.eow());
            let a1 = self.model.stop(f1);
            let a2 = self.model.stop(f2);
            let in_first = a1 < a2;
            if in_first {
                self.s1 += &p1;
            } else {
                self.s2 += &p2;
            }
            if !(p1.is_zero() && p2.is_zero()) {
                self.words += 1;
            }
            (self.observe)(&ClassifiedWord {
                word: &self.prefix,
                p1: &p1,
                p2: &p2,
                approx1: &a1,
                approx2: &a2,
                in_first,
            });
            if self.prefix.len() as u64 == self.n {
                return Ok(());
            }
            for a in 0..self.lmc.alphabet().len() {
                let m = self.lmc.matrix(a);
                let n1 = m.left_mul(v1);
                let n2 = m.left_mul(v2);
                if is_zero_vector(&n1) && is_zero_vector(&n2) {
                    continue;
                }
                let g1 = self.model.step(f1, a);
                let g2 = self.model.step(f2, a);
                self.prefix.push(a);
                self.go(&n1, &n2, &g1, &g2)?;
                self.prefix.pop();
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        lmc,
        model: &model,
        n,
        budget,
        visited: 0,
        words: 0,
        prefix: Vec::new(),
        s1: Rational::zero(),
        s2: Rational::zero(),
        observe: &mut observe,
    };
    walk.go(
        pi1.weights(),
        pi2.weights(),
        &model.round_distribution(pi1),
        &model.round_distribution(pi2),
    )?;

    Ok(BoundedEstimate {
        estimate: Rational::one() - &walk.s1 - &walk.s2,
        s1: walk.s1,
        s2: walk.s2,
        epsilon: epsilon.clone(),
        lambda,
        theta,
        n,
        length_method: bound.method,
        k,
        budget,
        words_enumerated: walk.words,
        nodes_visited: walk.visited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{tv_distance_acyclic, DEFAULT_BUDGET};
    use crate::fixtures;
    use crate::lmc::LmcBuilder;
    use crate::rational::ratio;

    /// Two states, each `a`-loop 1/2 and stop 1/2.
    fn halving_pair() -> (Lmc, InitialDistribution, InitialDistribution) {
        let mut b = LmcBuilder::new(vec!["s".into(), "t".into()], vec!["a".into()]).unwrap();
        b.transition("s", "a", "s", ratio(1, 2)).unwrap();
        b.eow("s", ratio(1, 2)).unwrap();
        b.transition("t", "a", "t", ratio(1, 2)).unwrap();
        b.eow("t", ratio(1, 2)).unwrap();
        let lmc = b.build();
        let p1 = lmc.dirac("s").unwrap();
        let p2 = lmc.dirac("t").unwrap();
        (lmc, p1, p2)
    }

    #[test]
    fn closed_form_fixture() {
        let (lmc, p1, p2) = halving_pair();
        let lambda = ratio(1, 4);
        assert_eq!(length_bound_closed_form(&lmc, &lambda).unwrap(), 12);
        let forced = length_bound(&lmc, &p1, &p2, &lambda, 0).unwrap();
        assert_eq!(forced.method, LengthMethod::ClosedForm);
        assert_eq!(forced.n, 12);
        assert!(lmc.tail_mass(&p1, 12).unwrap() <= lambda);
    }

    #[test]
    fn tail_recursion_finds_smallest_length() {
        let (lmc, p1, p2) = halving_pair();
        let lambda = ratio(1, 4);
        let b = length_bound(&lmc, &p1, &p2, &lambda, DEFAULT_LENGTH_STEP_CAP).unwrap();
        assert_eq!(b.method, LengthMethod::TailRecursion);
        // Pr(|w| > n) = 2^-(n+1).
        assert_eq!(b.n, 1);
        assert!(lmc.tail_mass(&p1, 0).unwrap() > lambda);
        assert!(length_bound(&lmc, &p1, &p2, &Rational::zero(), 10).is_err());
    }

    #[test]
    fn acyclic_length_bound_within_support() {
        let (lmc, p1, p2) = fixtures::split_vs_point();
        let n = lmc.max_support_length().unwrap() as u64;
        for lambda in [ratio(1, 2), ratio(1, 1000)] {
            assert!(length_bound(&lmc, &p1, &p2, &lambda, 100).unwrap().n <= n);
        }
    }

    #[test]
    fn identical_distributions() {
        let (lmc, p1, _) = fixtures::looping_pair();
        let eps = ratio(1, 8);
        let est = tv_bounded(&lmc, &p1, &p1, &eps, DEFAULT_BUDGET).unwrap();
        assert!(est.s1.is_zero());
        assert!(est.estimate.abs() <= &eps / int(2));
    }

    #[test]
    fn split_vs_point_within_half_epsilon() {
        let (lmc, p1, p2) = fixtures::split_vs_point();
        let eps = ratio(1, 8);
        let est = tv_bounded(&lmc, &p1, &p2, &eps, DEFAULT_BUDGET).unwrap();
        let d = tv_distance_acyclic(&lmc, &p1, &p2, DEFAULT_BUDGET).unwrap().distance;
        assert!((&est.estimate - d).abs() <= ratio(1, 16));
    }

    #[test]
    fn budget_error_mentions_desk_scale() {
        let (lmc, p1, p2) = fixtures::looping_pair();
        let err = tv_bounded(&lmc, &p1, &p2, &ratio(1, 8), 10).unwrap_err();
        assert!(err.to_string().contains("desk scale"), "{err}");
        assert!(err.is_resource_limit());
    }
}
