//! Alphabet-valued communication matrices, named gadgets, compositions and
//! exact rank inequalities.

mod compose;
pub mod rank;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{parse_err, Error, Result};
use crate::Rational;

pub use compose::{
    compose, tuple_power, verify_rank_lemma, verify_yang, RankLemmaReport, YangReport,
};
pub use rank::{rank_subadditivity_check, IntegerMatrix, RankField, SubadditivityReport};

/// Environment variable overriding the default cell budget.
pub const BUDGET_CELLS_ENV: &str = "LIFTLAB_BUDGET_CELLS";

/// Desk-scale limits: matrix cells for builders and exact covers, node
/// expansions for exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub cells: u64,
    pub nodes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            cells: 1 << 16,
            nodes: 2_000_000,
        }
    }
}

impl Budget {
    /// Default budget with `LIFTLAB_BUDGET_CELLS` applied when set.
    pub fn from_env() -> Self {
        let mut b = Self::default();
        if let Some(c) = std::env::var(BUDGET_CELLS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
        {
            b.cells = c;
        }
        b
    }

    pub fn check_cells(&self, what: &'static str, cells: u128) -> Result<()> {
        if cells > self.cells as u128 {
            return Err(Error::Budget {
                what,
                needed: cells,
                limit: self.cells as u128,
            });
        }
        Ok(())
    }
}

/// Tuple structure of a composed matrix: row `r` encodes `(x_1..x_n)` with
/// `x_1` as the fastest odometer digit in base `base_rows`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TupleShape {
    pub base_rows: usize,
    pub base_cols: usize,
    pub arity: usize,
}

impl TupleShape {
    pub fn row_tuple(&self, r: usize) -> Vec<usize> {
        digits(r, self.base_rows, self.arity)
    }

    pub fn col_tuple(&self, c: usize) -> Vec<usize> {
        digits(c, self.base_cols, self.arity)
    }
}

pub fn digits(mut v: usize, base: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let d = v % base;
            v /= base;
            d
        })
        .collect()
}

pub fn undigits(ds: &[usize], base: usize) -> usize {
    ds.iter().rev().fold(0, |acc, &d| acc * base + d)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GadgetMatrix {
    rows: usize,
    cols: usize,
    alphabet: u32,
    entries: Vec<u32>,
    shape: Option<TupleShape>,
}

impl GadgetMatrix {
    pub fn new(rows: usize, cols: usize, alphabet: u32, entries: Vec<u32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix sides must be nonempty".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if alphabet == 0 {
            return Err(Error::Domain("alphabet must be nonempty".into()));
        }
        if let Some(&bad) = entries.iter().find(|&&e| e >= alphabet) {
            return Err(Error::Domain(format!(
                "entry {bad} outside alphabet of size {alphabet}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            alphabet,
            entries,
            shape: None,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, alphabet: u32, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let entries = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self::new(rows, cols, alphabet, entries).expect("builder produced an invalid matrix")
    }

    pub fn boolean(rows: &[&[u32]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(r, c, 2, rows.concat())
    }

    pub fn constant(rows: usize, cols: usize, value: u32) -> Self {
        Self::from_fn(rows, cols, 2.max(value + 1), |_, _| value)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, 2, |i, j| (i == j) as u32)
    }

    pub(crate) fn with_shape(mut self, shape: TupleShape) -> Self {
        self.shape = Some(shape);
        self
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn shape(&self) -> Option<TupleShape> {
        self.shape
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.entries[x * self.cols + y]
    }

    pub fn row(&self, x: usize) -> &[u32] {
        &self.entries[x * self.cols..(x + 1) * self.cols]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn is_boolean(&self) -> bool {
        self.alphabet == 2
    }

    fn require_boolean(&self) -> Result<()> {
        if !self.is_boolean() {
            return Err(Error::Domain(format!(
                "operation needs a Boolean matrix, alphabet is {}",
                self.alphabet
            )));
        }
        Ok(())
    }

    pub fn transpose(&self) -> GadgetMatrix {
        GadgetMatrix::from_fn(self.cols, self.rows, self.alphabet, |i, j| self.get(j, i))
    }

    /// The submatrix on the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> GadgetMatrix {
        GadgetMatrix::from_fn(rows.len(), cols.len(), self.alphabet, |i, j| {
            self.get(rows[i], cols[j])
        })
    }

    pub fn map_symbols(&self, alphabet: u32, f: impl Fn(u32) -> u32) -> GadgetMatrix {
        let mut m = GadgetMatrix::from_fn(self.rows, self.cols, alphabet, |i, j| f(self.get(i, j)));
        m.shape = self.shape;
        m
    }

    /// Dense rows restricted to the given index sets.
    pub fn dense_rows(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<u32>> {
        rows.iter()
            .map(|&x| cols.iter().map(|&y| self.get(x, y)).collect())
            .collect()
    }

    fn all_dense(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|x| self.row(x).to_vec()).collect()
    }

    /// Exact rank over the rationals.
    pub fn rank_q(&self) -> Result<usize> {
        self.require_boolean()?;
        Ok(rank::rank_rational_01(&self.all_dense()))
    }

    /// Exact rank over GF(2).
    pub fn rank_f2(&self) -> Result<usize> {
        self.require_boolean()?;
        Ok(RankField::Gf2.rank(&self.all_dense()))
    }

    pub fn rank_in(&self, field: RankField) -> Result<usize> {
        match field {
            RankField::Rational => self.rank_q(),
            RankField::Gf2 => self.rank_f2(),
        }
    }

    /// Distinct symbols present, ascending.
    pub fn colors(&self) -> Vec<u32> {
        let mut seen = vec![false; self.alphabet as usize];
        for &e in &self.entries {
            seen[e as usize] = true;
        }
        (0..self.alphabet).filter(|&c| seen[c as usize]).collect()
    }

    pub fn count_symbol(&self, c: u32) -> usize {
        self.entries.iter().filter(|&&e| e == c).count()
    }

    /// `Pr[M = c]` for a uniformly random cell.
    pub fn symbol_probability(&self, c: u32) -> Rational {
        Rational::new(
            BigInt::from(self.count_symbol(c)),
            BigInt::from(self.cells()),
        )
    }

    /// The common symbol on `rows × cols`, if any.
    pub fn mono_color(&self, rows: &BitSet, cols: &BitSet) -> Option<u32> {
        let mut color = None;
        for x in rows.iter() {
            for y in cols.iter() {
                let v = self.get(x, y);
                match color {
                    None => color = Some(v),
                    Some(c) if c != v => return None,
                    _ => {}
                }
            }
        }
        color
    }

    pub fn distinct_rows(&self) -> usize {
        let mut rows: Vec<&[u32]> = (0..self.rows).map(|x| self.row(x)).collect();
        rows.sort();
        rows.dedup();
        rows.len()
    }

    /// A map `x ↦ x̄` pairing each row with a complementary row, when every
    /// row has one (Boolean matrices only). The first complementary row is
    /// chosen.
    pub fn negation_symmetry(&self) -> Option<Vec<usize>> {
        if !self.is_boolean() {
            return None;
        }
        (0..self.rows)
            .map(|x| {
                (0..self.rows).find(|&xb| {
                    xb != x && (0..self.cols).all(|y| self.get(xb, y) == 1 - self.get(x, y))
                })
            })
            .collect()
    }

    /// Text form: header line then one line of symbols per row.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GadgetMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "rows={} cols={} alphabet={}",
            self.rows, self.cols, self.alphabet
        )?;
        for x in 0..self.rows {
            let line: Vec<String> = self.row(x).iter().map(|v| v.to_string()).collect();
            if self.alphabet > 10 {
                writeln!(f, "{}", line.join(","))?;
            } else {
                writeln!(f, "{}", line.concat())?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GadgetMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GadgetMatrix(\n{self})")
    }
}

impl FromStr for GadgetMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
        let mut rows = None;
        let mut cols = None;
        let mut alphabet = None;
        for tok in header.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| parse_err(1, format!("bad header token `{tok}`")))?;
            let v: usize = val
                .parse()
                .map_err(|_| parse_err(1, format!("bad number `{val}`")))?;
            match key {
                "rows" => rows = Some(v),
                "cols" => cols = Some(v),
                "alphabet" => alphabet = Some(v as u32),
                _ => return Err(parse_err(1, format!("unknown header key `{key}`"))),
            }
        }
        let (rows, cols, alphabet) = match (rows, cols, alphabet) {
            (Some(r), Some(c), Some(k)) => (r, c, k),
            _ => return Err(parse_err(1, "header needs rows=, cols= and alphabet=")),
        };
        let mut entries = Vec::with_capacity(rows * cols);
        let mut seen = 0;
        for (ln, line) in lines {
            let line = line.trim();
            let vals: Vec<u32> = if alphabet > 10 {
                line.split(',')
                    .map(|t| t.trim().parse::<u32>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse_err(ln + 1, e.to_string()))?
            } else {
                line.chars()
                    .map(|c| c.to_digit(10).ok_or_else(|| parse_err(ln + 1, format!("bad symbol `{c}`"))))
                    .collect::<Result<_>>()?
            };
            if vals.len() != cols {
                return Err(parse_err(
                    ln + 1,
                    format!("expected {cols} symbols, got {}", vals.len()),
                ));
            }
            entries.extend(vals);
            seen += 1;
        }
        if seen != rows {
            return Err(parse_err(0, format!("expected {rows} rows, got {seen}")));
        }
        GadgetMatrix::new(rows, cols, alphabet, entries).map_err(|e| parse_err(0, e.to_string()))
    }
}

/// Named gadget families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GadgetSpec {
    /// Inner product on `m` bits: `2^m × 2^m`.
    Ip(usize),
    /// Index: rows `x ∈ [m]`, columns `y ∈ {0,1}^m`, entry `y_x`.
    Ind(usize),
    Xor1,
    And1,
    /// Equality on `k` bits: the `2^k × 2^k` identity.
    Eq(usize),
    /// Index with a flip bit: rows `(a, c)` with `a ∈ [m]`, `c ∈ {0,1}`
    /// (row id `2a + c`), columns `y ∈ {0,1}^m`, entry `y_a ⊕ c`.
    AddrFlip(usize),
    /// Independent Bernoulli(`bias`) entries from a seeded ChaCha8 stream.
    Random {
        seed: u64,
        rows: usize,
        cols: usize,
        bias: f64,
    },
}

impl GadgetSpec {
    pub fn dims(&self) -> (u128, u128) {
        let p = |m: usize| 1u128.checked_shl(m as u32).unwrap_or(u128::MAX);
        match *self {
            GadgetSpec::Ip(m) => (p(m), p(m)),
            GadgetSpec::Ind(m) => (m as u128, p(m)),
            GadgetSpec::Xor1 | GadgetSpec::And1 => (2, 2),
            GadgetSpec::Eq(k) => (p(k), p(k)),
            GadgetSpec::AddrFlip(m) => (2 * m as u128, p(m)),
            GadgetSpec::Random { rows, cols, .. } => (rows as u128, cols as u128),
        }
    }

    pub fn name(&self) -> String {
        match self {
            GadgetSpec::Ip(m) => format!("IP_{m}"),
            GadgetSpec::Ind(m) => format!("Ind_{m}"),
            GadgetSpec::Xor1 => "XOR1".into(),
            GadgetSpec::And1 => "AND1".into(),
            GadgetSpec::Eq(k) => format!("EQ_{k}"),
            GadgetSpec::AddrFlip(m) => format!("ADDRFLIP_{m}"),
            GadgetSpec::Random {
                seed,
                rows,
                cols,
                bias,
            } => format!("random:seed={seed},rows={rows},cols={cols},bias={bias}"),
        }
    }
}

impl FromStr for GadgetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| parse_err(1, format!("bad gadget parameter `{v}`")))
        };
        if let Some(rest) = s.strip_prefix("random:") {
            let mut seed = None;
            let mut rows = None;
            let mut cols = None;
            let mut bias = 0.5;
            for kv in rest.split(',') {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| parse_err(1, format!("bad random parameter `{kv}`")))?;
                match k {
                    "seed" => seed = Some(num(v)? as u64),
                    "rows" => rows = Some(num(v)?),
                    "cols" => cols = Some(num(v)?),
                    "bias" => {
                        bias = v
                            .parse()
                            .map_err(|_| parse_err(1, format!("bad bias `{v}`")))?
                    }
                    _ => return Err(parse_err(1, format!("unknown random parameter `{k}`"))),
                }
            }
            return match (seed, rows, cols) {
                (Some(seed), Some(rows), Some(cols)) => Ok(GadgetSpec::Random {
                    seed,
                    rows,
                    cols,
                    bias,
                }),
                _ => Err(parse_err(1, "random gadget needs seed, rows and cols")),
            };
        }
        match s {
            "XOR1" => return Ok(GadgetSpec::Xor1),
            "AND1" => return Ok(GadgetSpec::And1),
            _ => {}
        }
        let (family, m) = s
            .rsplit_once('_')
            .ok_or_else(|| parse_err(1, format!("unknown gadget `{s}`")))?;
        let m = num(m)?;
        match family {
            "IP" => Ok(GadgetSpec::Ip(m)),
            "Ind" | "IND" => Ok(GadgetSpec::Ind(m)),
            "EQ" => Ok(GadgetSpec::Eq(m)),
            "ADDRFLIP" => Ok(GadgetSpec::AddrFlip(m)),
            _ => Err(parse_err(1, format!("unknown gadget `{s}`"))),
        }
    }
}

/// Builds a named gadget within the cell budget.
pub fn make_gadget(spec: &GadgetSpec, budget: &Budget) -> Result<GadgetMatrix> {
    let (r, c) = spec.dims();
    if r == 0 || c == 0 {
        return Err(Error::Domain(format!("{} has an empty side", spec.name())));
    }
    budget.check_cells("gadget cells", r.saturating_mul(c))?;
    let (r, c) = (r as usize, c as usize);
    let m = match *spec {
        GadgetSpec::Ip(_) => GadgetMatrix::from_fn(r, c, 2, |x, y| (x & y).count_ones() % 2),
        GadgetSpec::Ind(_) => GadgetMatrix::from_fn(r, c, 2, |x, y| (y >> x & 1) as u32),
        GadgetSpec::Xor1 => GadgetMatrix::from_fn(2, 2, 2, |x, y| (x ^ y) as u32),
        GadgetSpec::And1 => GadgetMatrix::from_fn(2, 2, 2, |x, y| (x & y) as u32),
        GadgetSpec::Eq(_) => GadgetMatrix::identity(r),
        GadgetSpec::AddrFlip(_) => {
            GadgetMatrix::from_fn(r, c, 2, |x, y| ((y >> (x / 2) & 1) ^ (x & 1)) as u32)
        }
        GadgetSpec::Random { seed, bias, .. } => {
            if !(0.0..=1.0).contains(&bias) {
                return Err(Error::Domain(format!("bias {bias} outside [0, 1]")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let entries = (0..r * c).map(|_| rng.gen_bool(bias) as u32).collect();
            GadgetMatrix::new(r, c, 2, entries)?
        }
    };
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_gadgets() {
        let b = Budget::default();
        let ind = make_gadget(&GadgetSpec::Ind(2), &b).unwrap();
        assert_eq!((ind.rows(), ind.cols()), (2, 4));
        for x in 0..2 {
            for y in 0..4 {
                assert_eq!(ind.get(x, y), (y >> x & 1) as u32);
            }
        }
        let ip1 = make_gadget(&GadgetSpec::Ip(1), &b).unwrap();
        let and1 = make_gadget(&GadgetSpec::And1, &b).unwrap();
        assert_eq!(ip1.entries(), &[0, 0, 0, 1]);
        assert_eq!(ip1, and1);
        assert_eq!(make_gadget(&GadgetSpec::Eq(1), &b).unwrap(), GadgetMatrix::identity(2));
        let xor = make_gadget(&GadgetSpec::Xor1, &b).unwrap();
        assert_eq!(xor.entries(), &[0, 1, 1, 0]);
    }

    #[test]
    fn random_gadgets_are_reproducible() {
        let b = Budget::default();
        let spec = GadgetSpec::Random { seed: 7, rows: 3, cols: 3, bias: 0.5 };
        assert_eq!(make_gadget(&spec, &b).unwrap(), make_gadget(&spec, &b).unwrap());
        let other = GadgetSpec::Random { seed: 8, rows: 3, cols: 3, bias: 0.5 };
        assert_ne!(make_gadget(&spec, &b).unwrap(), make_gadget(&other, &b).unwrap());
    }

    #[test]
    fn budget_overflow() {
        let b = Budget { cells: 100, nodes: 10 };
        assert!(matches!(make_gadget(&GadgetSpec::Ip(4), &b), Err(Error::Budget { .. })));
        assert!(make_gadget(&GadgetSpec::Ip(3), &b).is_ok());
        assert!(matches!(
            make_gadget(&GadgetSpec::Ip(200), &Budget::default()),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn ranks_of_named_gadgets() {
        let b = Budget::default();
        assert_eq!(GadgetMatrix::constant(3, 3, 1).rank_q().unwrap(), 1);
        assert_eq!(GadgetMatrix::identity(4).rank_q().unwrap(), 4);
        assert_eq!(make_gadget(&GadgetSpec::Xor1, &b).unwrap().rank_q().unwrap(), 2);
        assert_eq!(GadgetMatrix::constant(3, 3, 1).rank_f2().unwrap(), 1);
        assert_eq!(GadgetMatrix::identity(2).rank_f2().unwrap(), 2);
        // IP_2 over GF(2) is the Gram matrix of F_2^2: rank 2 ≤ m.
        let ip2 = make_gadget(&GadgetSpec::Ip(2), &b).unwrap();
        assert_eq!(ip2.rank_f2().unwrap(), 2);
        assert_eq!(ip2.rank_q().unwrap(), 3);
        let tuple = GadgetMatrix::new(2, 2, 4, vec![0, 3, 2, 1]).unwrap();
        assert!(matches!(tuple.rank_q(), Err(Error::Domain(_))));
    }

    #[test]
    fn text_format() {
        let m = GadgetMatrix::boolean(&[&[0, 1, 1], &[1, 0, 0]]).unwrap();
        let t = m.to_text();
        assert_eq!(t, "rows=2 cols=3 alphabet=2\n011\n100\n");
        assert_eq!(t.parse::<GadgetMatrix>().unwrap(), m);
        let wide = GadgetMatrix::from_fn(2, 2, 16, |i, j| (4 * i + 7 * j) as u32);
        assert_eq!(wide.to_text(), "rows=2 cols=2 alphabet=16\n0,7\n4,11\n");
        assert_eq!(wide.to_text().parse::<GadgetMatrix>().unwrap(), wide);
        assert!("rows=2 cols=2 alphabet=2\n01\n".parse::<GadgetMatrix>().is_err());
        assert!("rows=1 cols=2 alphabet=2\n03\n".parse::<GadgetMatrix>().is_err());
        assert!("rows=1 cols=2\n01\n".parse::<GadgetMatrix>().is_err());
    }

    #[test]
    fn spec_names_round_trip() {
        for s in ["IP_2", "Ind_2", "XOR1", "AND1", "EQ_2", "ADDRFLIP_2", "random:seed=3,rows=4,cols=4,bias=0.5"] {
            let spec: GadgetSpec = s.parse().unwrap();
            assert_eq!(spec.name(), s);
        }
        assert!("FOO_2".parse::<GadgetSpec>().is_err());
    }

    #[test]
    fn negation_symmetry_examples() {
        let b = Budget::default();
        let xor = make_gadget(&GadgetSpec::Xor1, &b).unwrap();
        assert_eq!(xor.negation_symmetry(), Some(vec![1, 0]));
        assert_eq!(make_gadget(&GadgetSpec::And1, &b).unwrap().negation_symmetry(), None);
        assert_eq!(make_gadget(&GadgetSpec::Ind(2), &b).unwrap().negation_symmetry(), None);
        let af = make_gadget(&GadgetSpec::AddrFlip(2), &b).unwrap();
        assert_eq!(af.negation_symmetry(), Some(vec![1, 0, 3, 2]));
    }

    #[test]
    fn distinct_rows_bounded_by_two_to_rank() {
        let b = Budget::default();
        for seed in 0..40 {
            let m = make_gadget(&GadgetSpec::Random { seed, rows: 6, cols: 5, bias: 0.4 }, &b).unwrap();
            let r = m.rank_q().unwrap();
            assert!(m.distinct_rows() <= 1 << r);
            assert!(r <= m.rows().min(m.cols()));
        }
    }
}
