//! Finite distributions with exact rational weights and Shannon measures in
//! bits.
//!
//! Weights are exact; entropies and divergences are floating, generic over
//! [`Real`]. Terms with zero weight contribute nothing.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{log2_rational, Real};
use crate::Rational;

#[derive(Clone, Debug)]
pub struct FiniteDistribution<L> {
    support: Vec<L>,
    probs: Vec<Rational>,
    index: HashMap<L, usize>,
}

impl<L: Clone + Eq + Hash> FiniteDistribution<L> {
    /// Builds a distribution from `(outcome, probability)` pairs. Zero-weight
    /// outcomes are kept in the support list but do not count as support.
    pub fn new(entries: Vec<(L, Rational)>) -> Result<Self> {
        let mut support = Vec::with_capacity(entries.len());
        let mut probs = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        let mut total = Rational::zero();
        for (l, p) in entries {
            if p.is_negative() {
                return Err(Error::Domain("negative probability".into()));
            }
            if index.insert(l.clone(), support.len()).is_some() {
                return Err(Error::Domain("repeated outcome".into()));
            }
            total += &p;
            support.push(l);
            probs.push(p);
        }
        if total != Rational::one() {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        Ok(Self { support, probs, index })
    }

    /// Normalises nonnegative integer weights.
    pub fn from_weights(entries: Vec<(L, u64)>) -> Result<Self> {
        let total: u128 = entries.iter().map(|(_, w)| *w as u128).sum();
        if total == 0 {
            return Err(Error::Domain("all weights are zero".into()));
        }
        let t = BigInt::from(total);
        Self::new(
            entries
                .into_iter()
                .map(|(l, w)| (l, Rational::new(BigInt::from(w), t.clone())))
                .collect(),
        )
    }

    pub fn uniform(outcomes: Vec<L>) -> Result<Self> {
        Self::from_weights(outcomes.into_iter().map(|l| (l, 1)).collect())
    }

    pub fn point_mass(outcome: L) -> Self {
        Self::new(vec![(outcome, Rational::one())]).expect("a point mass is a distribution")
    }

    pub fn prob(&self, outcome: &L) -> Rational {
        self.index
            .get(outcome)
            .map_or_else(Rational::zero, |&i| self.probs[i].clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&L, &Rational)> {
        self.support.iter().zip(&self.probs)
    }

    /// Outcomes of positive probability, in insertion order.
    pub fn support(&self) -> Vec<&L> {
        self.iter().filter(|(_, p)| p.is_positive()).map(|(l, _)| l).collect()
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|p| p.is_positive()).count()
    }

    /// Push-forward under `f`.
    pub fn map<M: Clone + Eq + Hash>(&self, f: impl Fn(&L) -> M) -> FiniteDistribution<M> {
        let mut support: Vec<M> = Vec::new();
        let mut probs: Vec<Rational> = Vec::new();
        let mut index: HashMap<M, usize> = HashMap::new();
        for (l, p) in self.iter() {
            let m = f(l);
            match index.get(&m) {
                Some(&i) => probs[i] += p,
                None => {
                    index.insert(m.clone(), support.len());
                    support.push(m);
                    probs.push(p.clone());
                }
            }
        }
        FiniteDistribution { support, probs, index }
    }

    /// Distribution conditioned on an event, or `None` if it has probability 0.
    pub fn condition(&self, event: impl Fn(&L) -> bool) -> Option<Self> {
        let mass: Rational = self.iter().filter(|(l, _)| event(l)).map(|(_, p)| p.clone()).sum();
        if mass.is_zero() {
            return None;
        }
        let entries = self
            .iter()
            .filter(|(l, p)| event(l) && p.is_positive())
            .map(|(l, p)| (l.clone(), p / &mass))
            .collect();
        Some(Self::new(entries).expect("conditioning preserves normalisation"))
    }

    pub fn entropy<F: Real>(&self) -> F {
        self.probs
            .iter()
            .filter(|p| p.is_positive())
            .fold(F::zero(), |h, p| h - to_f::<F>(p) * log2_rational::<F>(p))
    }
}

fn to_f<F: Real>(q: &Rational) -> F {
    crate::scalar::to_real(q)
}

/// `H(A)` in bits.
pub fn entropy<L: Clone + Eq + Hash>(p: &FiniteDistribution<L>) -> f64 {
    p.entropy::<f64>()
}

/// `H(B | A)` for a distribution over pairs `(a, b)`.
pub fn conditional_entropy<A, B>(p: &FiniteDistribution<(A, B)>) -> f64
where
    A: Clone + Eq + Hash,
    B: Clone + Eq + Hash,
{
    conditional_entropy_in::<f64, A, B>(p)
}

pub fn conditional_entropy_in<F, A, B>(p: &FiniteDistribution<(A, B)>) -> F
where
    F: Real,
    A: Clone + Eq + Hash,
    B: Clone + Eq + Hash,
{
    let pa = p.map(|(a, _)| a.clone());
    p.iter()
        .filter(|(_, q)| q.is_positive())
        .fold(F::zero(), |h, ((a, _), q)| {
            h + to_f::<F>(q) * log2_rational::<F>(&(pa.prob(a) / q))
        })
}

/// `D(p ‖ q)` in bits. Fails unless `q` is positive wherever `p` is.
pub fn kl_divergence<L: Clone + Eq + Hash>(
    p: &FiniteDistribution<L>,
    q: &FiniteDistribution<L>,
) -> Result<f64> {
    kl_divergence_in::<f64, L>(p, q)
}

pub fn kl_divergence_in<F: Real, L: Clone + Eq + Hash>(
    p: &FiniteDistribution<L>,
    q: &FiniteDistribution<L>,
) -> Result<F> {
    let mut d = F::zero();
    for (l, pl) in p.iter().filter(|(_, x)| x.is_positive()) {
        let ql = q.prob(l);
        if !ql.is_positive() {
            return Err(Error::Domain("p is not absolutely continuous w.r.t. q".into()));
        }
        d = d + to_f::<F>(pl) * log2_rational::<F>(&(pl / ql));
    }
    Ok(d)
}

/// Random distribution on `0..size` with integer weights in `0..=max_weight`
/// (at least one positive).
pub fn random_distribution<R: Rng>(rng: &mut R, size: usize, max_weight: u64) -> FiniteDistribution<usize> {
    assert!(size > 0 && max_weight > 0);
    let mut w: Vec<u64> = (0..size).map(|_| rng.gen_range(0..=max_weight)).collect();
    if w.iter().all(|&x| x == 0) {
        let i = rng.gen_range(0..size);
        w[i] = 1;
    }
    FiniteDistribution::from_weights(w.into_iter().enumerate().collect()).expect("positive total")
}

/// Random joint distribution on `(0..na) × (0..nb)`.
pub fn random_joint<R: Rng>(rng: &mut R, na: usize, nb: usize, max_weight: u64) -> FiniteDistribution<(usize, usize)> {
    let flat = random_distribution(rng, na * nb, max_weight);
    flat.map(|&i| (i / nb, i % nb))
}
