//! Exact linear algebra over the rationals.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::rational::{denominator_lcm, Rational};

/// Row-echelon basis of a growing subspace of `Q^n`. Each stored row has a
/// distinct pivot column with entry 1 and zeros at the pivots of all rows
/// inserted before it.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl EchelonBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// `v` minus its projection along the basis pivots; zero iff `v` lies in
    /// the span.
    pub fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let c = v[*p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= &c * r;
                }
            }
        }
        v
    }

    /// Adds `v` if it is independent of the current span. Returns whether
    /// the dimension grew.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = Rational::one() / &r[p];
        for x in r.iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        self.rows.push((p, r));
        true
    }
}

/// Solves the square system `a x = b` exactly with fraction-free (Bareiss)
/// elimination. Returns `None` when `a` is singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    assert_eq!(b.len(), n);
    // Integer augmented matrix: scale each row by its denominator lcm.
    let mut m: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            assert_eq!(row.len(), n);
            let scale = Rational::from_integer(denominator_lcm(row.iter().chain([bi])));
            row.iter()
                .chain([bi])
                .map(|x| (x * &scale).to_integer())
                .collect()
        })
        .collect();

    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, pivot);
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }

    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Rational::from_integer(m[i][n].clone());
        for j in i + 1..n {
            if !m[i][j].is_zero() {
                acc -= Rational::from_integer(m[i][j].clone()) * &x[j];
            }
        }
        x[i] = acc / Rational::from_integer(m[i][i].clone());
    }
    Some(x)
}
