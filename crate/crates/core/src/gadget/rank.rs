//! Exact rank: fraction-free (Bareiss) elimination over any exact scalar, and
//! bitset row reduction over GF(2).

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::ExactScalar;
use crate::Rational;

/// Result of an elimination: the rank and the pivot column of each pivot row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
}

/// Fraction-free Gaussian elimination. Every intermediate entry is a minor of
/// the input, so divisions are exact and integer inputs stay integral.
pub fn fraction_free_echelon<T: ExactScalar>(mut a: Vec<Vec<T>>) -> Echelon {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut prev = T::one();
    let mut r = 0;
    let mut pivot_cols = Vec::new();
    for col in 0..n {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let pivot = pivot_row[col].clone();
        for row in rest.iter_mut() {
            let lead = row[col].clone();
            for j in col + 1..n {
                let v = pivot.clone() * row[j].clone() - lead.clone() * pivot_row[j].clone();
                row[j] = v / prev.clone();
            }
            row[col] = T::zero();
        }
        prev = pivot;
        pivot_cols.push(col);
        r += 1;
    }
    Echelon {
        rank: r,
        pivot_cols,
    }
}

pub fn fraction_free_rank<T: ExactScalar>(a: Vec<Vec<T>>) -> usize {
    fraction_free_echelon(a).rank
}

/// Largest side for which every minor of a 0/1 matrix fits in `i128`
/// (Hadamard: `|det| ≤ k^{k/2}` and `44^22 < 2^126`).
pub const I128_SAFE_SIDE: usize = 44;

/// Rank over the rationals of a 0/1 matrix given as row slices of symbols.
/// Uses `i128` when the Hadamard bound allows it and big integers otherwise.
pub fn rank_rational_01(rows: &[Vec<u32>]) -> usize {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if m.min(n) <= I128_SAFE_SIDE {
        fraction_free_rank(
            rows.iter()
                .map(|r| r.iter().map(|&v| v as i128).collect())
                .collect(),
        )
    } else {
        fraction_free_rank(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }
}

/// Row-packed GF(2) elimination; returns the echelon data.
pub fn gf2_echelon(rows: &[Vec<u64>], ncols: usize) -> Echelon {
    let mut a: Vec<Vec<u64>> = rows.to_vec();
    let m = a.len();
    let mut r = 0;
    let mut pivot_cols = Vec::new();
    for col in 0..ncols {
        if r == m {
            break;
        }
        let (w, b) = (col / 64, col % 64);
        let Some(p) = (r..m).find(|&i| a[i][w] >> b & 1 == 1) else {
            continue;
        };
        a.swap(r, p);
        let pivot = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[w] >> b & 1 == 1 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        pivot_cols.push(col);
        r += 1;
    }
    Echelon {
        rank: r,
        pivot_cols,
    }
}

pub fn pack_gf2(rows: &[Vec<u32>]) -> Vec<Vec<u64>> {
    rows.iter()
        .map(|r| {
            let mut w = vec![0u64; r.len().div_ceil(64)];
            for (j, &v) in r.iter().enumerate() {
                if v & 1 == 1 {
                    w[j / 64] |= 1 << (j % 64);
                }
            }
            w
        })
        .collect()
}

/// Field over which a rank is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RankField {
    Rational,
    Gf2,
}

impl RankField {
    pub fn rank(self, rows: &[Vec<u32>]) -> usize {
        let n = rows.first().map_or(0, |r| r.len());
        match self {
            RankField::Rational => rank_rational_01(rows),
            RankField::Gf2 => gf2_echelon(&pack_gf2(rows), n).rank,
        }
    }

    /// Greedy maximal linearly independent subset of `rows` (by position,
    /// earliest first).
    pub fn independent_subset(self, rows: &[Vec<u32>]) -> Vec<usize> {
        match self {
            RankField::Rational => {
                let mut basis = RationalBasis::default();
                (0..rows.len())
                    .filter(|&i| {
                        basis.insert(rows[i].iter().map(|&v| Rational::from_integer(v.into())).collect())
                    })
                    .collect()
            }
            RankField::Gf2 => {
                let packed = pack_gf2(rows);
                let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
                let mut chosen = Vec::new();
                for (i, row) in packed.into_iter().enumerate() {
                    let mut v = row;
                    for (col, b) in &basis {
                        if v[col / 64] >> (col % 64) & 1 == 1 {
                            for (x, y) in v.iter_mut().zip(b) {
                                *x ^= y;
                            }
                        }
                    }
                    if let Some(k) = v.iter().position(|&w| w != 0) {
                        let col = k * 64 + v[k].trailing_zeros() as usize;
                        basis.push((col, v));
                        chosen.push(i);
                    }
                }
                chosen
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RankField::Rational => "Q",
            RankField::Gf2 => "F2",
        }
    }
}

/// Incremental row basis over the rationals kept in reduced form.
#[derive(Default)]
struct RationalBasis {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl RationalBasis {
    /// Adds `v` if it is independent of the current rows; reports whether it was.
    fn insert(&mut self, mut v: Vec<Rational>) -> bool {
        for (col, b) in &self.rows {
            if !v[*col].is_zero() {
                let factor = v[*col].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= factor.clone() * y;
                }
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            Some(col) => {
                let inv = Rational::one() / v[col].clone();
                for x in v.iter_mut() {
                    *x *= inv.clone();
                }
                self.rows.push((col, v));
                true
            }
            None => false,
        }
    }
}

/// Dense integer matrix, used for rank arithmetic beyond 0/1 entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: ExactScalar> IntegerMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn rank(&self) -> usize {
        fraction_free_rank(
            (0..self.rows)
                .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
                .collect(),
        )
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::Dimension(format!(
                "{:?} + {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| T::zero() - a.clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SubadditivityReport {
    pub rank_a: usize,
    pub rank_b: usize,
    pub rank_sum: usize,
    pub pass: bool,
}

/// Checks `rk(A + B) ≤ rk(A) + rk(B)` exactly.
pub fn rank_subadditivity_check<T: ExactScalar>(
    a: &IntegerMatrix<T>,
    b: &IntegerMatrix<T>,
) -> Result<SubadditivityReport> {
    let sum = a.checked_add(b)?;
    let (rank_a, rank_b, rank_sum) = (a.rank(), b.rank(), sum.rank());
    Ok(SubadditivityReport {
        rank_a,
        rank_b,
        rank_sum,
        pass: rank_sum <= rank_a + rank_b,
    })
}
