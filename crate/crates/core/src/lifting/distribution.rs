//! The product distribution over `X^n × Y^n` that draws each coordinate
//! uniformly from the fiber `g^{-1}(z_i)`.

use num_bigint::BigInt;
use num_traits::{One, Pow};
use serde::Serialize;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::gadget::{undigits, Budget, GadgetMatrix};
use crate::info::FiniteDistribution;
use crate::rectcover::{biased_color, Rectangle};
use crate::Rational;

#[derive(Clone, Debug)]
pub struct LiftedDistribution {
    g: GadgetMatrix,
    z: Vec<bool>,
    fibers: Vec<Vec<(usize, usize)>>,
}

/// Fiber `{(x, y) : g(x, y) = z_i}` for every coordinate, cells in row-major
/// order.
pub fn build_lifted_distribution(g: &GadgetMatrix, z: &[bool]) -> Result<LiftedDistribution> {
    if !g.is_boolean() {
        return Err(Error::Domain("lifted distribution needs a Boolean gadget".into()));
    }
    let cells = |b: bool| -> Vec<(usize, usize)> {
        (0..g.rows())
            .flat_map(|x| (0..g.cols()).map(move |y| (x, y)))
            .filter(|&(x, y)| g.get(x, y) == b as u32)
            .collect()
    };
    let (zeros, ones) = (cells(false), cells(true));
    let mut fibers = Vec::with_capacity(z.len());
    for (i, &b) in z.iter().enumerate() {
        let f = if b { &ones } else { &zeros };
        if f.is_empty() {
            return Err(Error::Unrealizable { coordinate: i, value: b as u8 });
        }
        fibers.push(f.clone());
    }
    Ok(LiftedDistribution {
        g: g.clone(),
        z: z.to_vec(),
        fibers,
    })
}

impl LiftedDistribution {
    pub fn gadget(&self) -> &GadgetMatrix {
        &self.g
    }

    pub fn z(&self) -> &[bool] {
        &self.z
    }

    pub fn arity(&self) -> usize {
        self.z.len()
    }

    pub fn fiber(&self, i: usize) -> &[(usize, usize)] {
        &self.fibers[i]
    }

    /// `∏ |Fiber_i|`; every support point has mass one over this.
    pub fn support_size(&self) -> u128 {
        self.fibers.iter().map(|f| f.len() as u128).product()
    }

    /// Probability of the tuple pair `(x⃗, y⃗)`.
    pub fn prob(&self, xs: &[usize], ys: &[usize]) -> Rational {
        let inside = xs
            .iter()
            .zip(ys)
            .zip(&self.z)
            .all(|((&x, &y), &b)| self.g.get(x, y) == b as u32);
        if inside && xs.len() == self.arity() && ys.len() == self.arity() {
            Rational::new(BigInt::one(), BigInt::from(self.support_size()))
        } else {
            Rational::default()
        }
    }

    /// Mass of the product rectangle `∏ A_i × ∏ B_i`, from per-coordinate
    /// fiber intersection counts.
    pub fn mass_of_product(&self, rows: &[BitSet], cols: &[BitSet]) -> Rational {
        self.fibers
            .iter()
            .zip(rows.iter().zip(cols))
            .map(|(f, (a, b))| {
                let hit = f.iter().filter(|&&(x, y)| a.contains(x) && b.contains(y)).count();
                Rational::new(BigInt::from(hit), BigInt::from(f.len()))
            })
            .product()
    }

    /// Support points as `(x⃗, y⃗)` tuples, first coordinate fastest.
    pub fn support_points(&self, budget: &Budget) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
        budget.check_cells("lifted support points", self.support_size())?;
        let n = self.arity();
        let mut out = Vec::with_capacity(self.support_size() as usize);
        let mut idx = vec![0usize; n];
        loop {
            let (xs, ys) = (0..n).map(|i| self.fibers[i][idx[i]]).unzip();
            out.push((xs, ys));
            let mut i = 0;
            while i < n {
                idx[i] += 1;
                if idx[i] < self.fibers[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == n {
                return Ok(out);
            }
        }
    }

    /// Composed row and column index of a tuple pair.
    pub fn composed_index(&self, xs: &[usize], ys: &[usize]) -> (usize, usize) {
        (undigits(xs, self.g.rows()), undigits(ys, self.g.cols()))
    }

    /// Mass of a rectangle of the composed matrix, by enumerating the support.
    pub fn mass_of(&self, rect: &Rectangle, budget: &Budget) -> Result<Rational> {
        let pts = self.support_points(budget)?;
        let hit = pts
            .iter()
            .filter(|(xs, ys)| {
                let (r, c) = self.composed_index(xs, ys);
                rect.contains(r, c)
            })
            .count();
        Ok(Rational::new(BigInt::from(hit), BigInt::from(pts.len())))
    }

    /// The distribution over composed `(row, col)` indices.
    pub fn materialize(&self, budget: &Budget) -> Result<FiniteDistribution<(usize, usize)>> {
        let pts = self.support_points(budget)?;
        FiniteDistribution::uniform(pts.iter().map(|(xs, ys)| self.composed_index(xs, ys)).collect())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxRatioReport {
    pub pass: bool,
    /// `∏_{i ∈ coords} 1 / Pr[g = z_i]`.
    pub ratio: String,
    /// `(4·rk)^s`.
    pub bound: String,
}

/// Exact check of `max p/u ≤ (4·rk)^s` on the given coordinates. Fails with
/// [`Error::Biased`] when one gadget value fills more than `1 − 1/(4·rk)`.
pub fn max_ratio_check(p: &LiftedDistribution, coords: &[usize], rk: usize) -> Result<MaxRatioReport> {
    if biased_color(&p.g, rk)?.is_some() {
        return Err(Error::Biased);
    }
    let ratio: Rational = coords
        .iter()
        .map(|&i| p.g.symbol_probability(p.z[i] as u32).recip())
        .product();
    let bound = Rational::from_integer(Pow::pow(BigInt::from(4 * rk.max(1)), coords.len()));
    Ok(MaxRatioReport {
        pass: ratio <= bound,
        ratio: ratio.to_string(),
        bound: bound.to_string(),
    })
}
