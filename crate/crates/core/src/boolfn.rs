//! Truth tables and exact Boolean-function measures.
//!
//! Position `z` of a table of arity `n` holds `f(z)`, where bit `i` of `z`
//! (little-endian) is the input `x_i`. Coordinates are 0-based throughout.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::bitset::BitSet;
use crate::error::{parse_err, Error, Result};

/// Largest supported arity.
pub const MAX_ARITY: usize = 16;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruthTable {
    arity: usize,
    values: BitSet,
}

impl TruthTable {
    /// Builds a table from a predicate on the little-endian input index.
    pub fn from_fn(arity: usize, f: impl Fn(usize) -> bool) -> Self {
        assert!(arity <= MAX_ARITY, "arity {arity} exceeds {MAX_ARITY}");
        let size = 1usize << arity;
        let values = BitSet::from_indices(size, (0..size).filter(|&z| f(z)));
        Self { arity, values }
    }

    pub fn from_values(arity: usize, values: &[bool]) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::Domain(format!("arity {arity} exceeds {MAX_ARITY}")));
        }
        if values.len() != 1 << arity {
            return Err(Error::Dimension(format!(
                "table of arity {arity} needs {} values, got {}",
                1usize << arity,
                values.len()
            )));
        }
        Ok(Self::from_fn(arity, |z| values[z]))
    }

    /// The `index`-th function of the given arity: bit `z` of `index` is `f(z)`.
    /// Only meaningful for arity ≤ 6.
    pub fn from_index(arity: usize, index: u64) -> Self {
        assert!(arity <= 6);
        Self::from_fn(arity, |z| index >> z & 1 == 1)
    }

    /// Every function of the given arity, in index order.
    pub fn all(arity: usize) -> impl Iterator<Item = TruthTable> {
        assert!(arity <= 4, "enumerating all functions is limited to arity 4");
        (0..1u64 << (1u32 << arity)).map(move |i| Self::from_index(arity, i))
    }

    pub fn random<R: Rng + ?Sized>(arity: usize, rng: &mut R) -> Self {
        let size = 1usize << arity;
        let bits: Vec<bool> = (0..size).map(|_| rng.gen()).collect();
        Self::from_fn(arity, |z| bits[z])
    }

    pub fn constant(arity: usize, value: bool) -> Self {
        Self::from_fn(arity, |_| value)
    }

    pub fn parity(arity: usize) -> Self {
        Self::from_fn(arity, |z| z.count_ones() % 2 == 1)
    }

    pub fn and(arity: usize) -> Self {
        Self::from_fn(arity, |z| z == (1 << arity) - 1)
    }

    pub fn or(arity: usize) -> Self {
        Self::from_fn(arity, |z| z != 0)
    }

    pub fn majority(arity: usize) -> Self {
        Self::from_fn(arity, |z| 2 * z.count_ones() as usize > arity)
    }

    /// `f(x) = x_i`.
    pub fn dictator(arity: usize, i: usize) -> Self {
        assert!(i < arity);
        Self::from_fn(arity, |z| z >> i & 1 == 1)
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of table positions, `2^n`.
    #[inline]
    pub fn size(&self) -> usize {
        1 << self.arity
    }

    #[inline]
    pub fn eval(&self, z: usize) -> bool {
        self.values.contains(z)
    }

    /// Evaluates on an explicit bit vector (`bits[i]` is `x_i`).
    pub fn eval_bits(&self, bits: &[bool]) -> bool {
        debug_assert_eq!(bits.len(), self.arity);
        let z = bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | (b as usize) << i);
        self.eval(z)
    }

    pub fn ones(&self) -> usize {
        self.values.count()
    }

    pub fn is_constant(&self) -> bool {
        let c = self.ones();
        c == 0 || c == self.size()
    }

    pub fn is_constant_zero(&self) -> bool {
        self.ones() == 0
    }

    /// Fixes `x_i = b`; the result has arity `n - 1` with the remaining
    /// inputs renumbered in order.
    pub fn restrict(&self, i: usize, b: bool) -> TruthTable {
        assert!(i < self.arity);
        let low = (1usize << i) - 1;
        TruthTable::from_fn(self.arity - 1, |w| {
            let z = (w & low) | ((w & !low) << 1) | (b as usize) << i;
            self.eval(z)
        })
    }

    /// `z ↦ f(z ⊕ mask)`.
    pub fn flip_inputs(&self, mask: usize) -> TruthTable {
        TruthTable::from_fn(self.arity, |z| self.eval(z ^ mask))
    }

    pub fn depends_on(&self, i: usize) -> bool {
        (0..self.size()).any(|z| self.eval(z) != self.eval(z ^ 1 << i))
    }

    fn sensitive_mask_at(&self, z: usize) -> usize {
        let v = self.eval(z);
        (0..self.arity)
            .filter(|&i| self.eval(z ^ 1 << i) != v)
            .fold(0, |m, i| m | 1 << i)
    }

    /// `s(f)`: the largest number of single-bit flips changing `f(z)`.
    pub fn sensitivity(&self) -> usize {
        (0..self.size())
            .map(|z| self.sensitive_mask_at(z).count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// A maximally sensitive point: the smallest `z` attaining `s(f)` and all
    /// of its sensitive coordinates.
    pub fn sensitive_point(&self) -> SensitivityWitness {
        let mut best: Option<(usize, usize)> = None;
        for z in 0..self.size() {
            let m = self.sensitive_mask_at(z);
            if best.is_none_or(|(_, bm)| m.count_ones() > bm.count_ones()) {
                best = Some((z, m));
            }
        }
        let (point, mask) = best.expect("tables are nonempty");
        SensitivityWitness {
            point,
            coords: (0..self.arity).filter(|&i| mask >> i & 1 == 1).collect(),
        }
    }

    /// Exact block sensitivity with a witness point and disjoint blocks.
    pub fn block_sensitivity(&self) -> BlockSensitivity {
        let n = self.arity;
        let size = self.size();
        let mut best = BlockSensitivity {
            value: 0,
            point: 0,
            blocks: Vec::new(),
        };
        let mut sens = vec![false; size];
        let mut has_sub = vec![false; size];
        let mut memo = vec![-1i8; size];
        for z in 0..size {
            // No point can carry more than n disjoint blocks.
            if best.value == n {
                break;
            }
            let v = self.eval(z);
            for (b, s) in sens.iter_mut().enumerate() {
                *s = self.eval(z ^ b) != v;
            }
            for b in 1..size {
                let mut any = false;
                let mut rest = b;
                while rest != 0 {
                    let i = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    let sub = b ^ 1 << i;
                    if sens[sub] || has_sub[sub] {
                        any = true;
                        break;
                    }
                }
                has_sub[b] = any;
            }
            let mut by_min: Vec<Vec<usize>> = vec![Vec::new(); n];
            for b in 1..size {
                if sens[b] && !has_sub[b] {
                    by_min[b.trailing_zeros() as usize].push(b);
                }
            }
            memo.iter_mut().for_each(|m| *m = -1);
            let full = size - 1;
            let value = pack(full, &by_min, &mut memo) as usize;
            if value > best.value {
                // Replay: lowest available coordinate first; use the smallest
                // optimal block containing it, else skip the coordinate.
                let mut blocks = Vec::new();
                let mut avail = full;
                while avail != 0 {
                    let target = pack(avail, &by_min, &mut memo);
                    if target == 0 {
                        break;
                    }
                    let e = avail.trailing_zeros() as usize;
                    let chosen = by_min[e].iter().copied().find(|&b| {
                        b & avail == b && 1 + pack(avail & !b, &by_min, &mut memo) == target
                    });
                    match chosen {
                        Some(b) => {
                            blocks.push((0..n).filter(|&i| b >> i & 1 == 1).collect());
                            avail &= !b;
                        }
                        None => avail &= !(1 << e),
                    }
                }
                best = BlockSensitivity {
                    value,
                    point: z,
                    blocks,
                };
            }
        }
        best
    }

    /// Coefficients `c_S` of the unique multilinear polynomial, indexed by the
    /// subset mask `S`, via the integer Möbius transform.
    pub fn mobius_coefficients(&self) -> Vec<i64> {
        let mut c: Vec<i64> = (0..self.size()).map(|z| self.eval(z) as i64).collect();
        for i in 0..self.arity {
            for s in 0..self.size() {
                if s >> i & 1 == 1 {
                    c[s] -= c[s ^ 1 << i];
                }
            }
        }
        c
    }

    /// `deg(f)`; the constant-0 function has degree 0 by convention.
    pub fn degree(&self) -> usize {
        self.mobius_coefficients()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(s, _)| s.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Exact decision-tree depth by memoized recursion over restrictions.
    pub fn decision_tree_depth(&self) -> usize {
        let mut memo = HashMap::new();
        dt(self, &mut memo)
    }

    /// Evaluates the standard relations among `s`, `bs`, `deg` and `DT`.
    pub fn check_measure_relations(&self) -> RelationReport {
        if self.is_constant() {
            return RelationReport {
                degenerate: true,
                ..Default::default()
            };
        }
        let s = self.sensitivity();
        let bs = self.block_sensitivity().value;
        let deg = self.degree();
        let dt = self.decision_tree_depth();
        let checks = vec![
            ("deg <= DT", deg <= dt),
            ("s <= DT", s <= dt),
            ("sqrt(deg) <= s", deg <= s * s),
            ("s <= 2 deg^2", s <= 2 * deg * deg),
            ("DT <= 2 deg^3", dt <= 2 * deg * deg * deg),
            ("DT <= bs * deg", dt <= bs * deg),
            ("s <= bs", s <= bs),
            ("bs <= DT", bs <= dt),
        ];
        RelationReport {
            degenerate: false,
            s,
            bs,
            deg,
            dt,
            checks: checks
                .into_iter()
                .map(|(n, ok)| RelationCheck {
                    name: n.to_string(),
                    pass: ok,
                })
                .collect(),
        }
    }

    /// Canonical text form `n=<arity> table=<bits>`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Table bits as a `'0'`/`'1'` string in little-endian position order.
    pub fn bit_string(&self) -> String {
        (0..self.size())
            .map(|z| if self.eval(z) { '1' } else { '0' })
            .collect()
    }
}

fn pack(avail: usize, by_min: &[Vec<usize>], memo: &mut [i8]) -> i8 {
    if avail == 0 {
        return 0;
    }
    if memo[avail] >= 0 {
        return memo[avail];
    }
    let e = avail.trailing_zeros() as usize;
    let mut best = pack(avail & !(1 << e), by_min, memo);
    for &b in &by_min[e] {
        if b & avail == b {
            best = best.max(1 + pack(avail & !b, by_min, memo));
        }
    }
    memo[avail] = best;
    best
}

fn dt(f: &TruthTable, memo: &mut HashMap<TruthTable, usize>) -> usize {
    if f.is_constant() {
        return 0;
    }
    if let Some(&d) = memo.get(f) {
        return d;
    }
    let mut best = usize::MAX;
    for i in 0..f.arity() {
        if !f.depends_on(i) {
            continue;
        }
        let d0 = dt(&f.restrict(i, false), memo);
        if d0 + 1 >= best {
            continue;
        }
        let d1 = dt(&f.restrict(i, true), memo);
        best = best.min(1 + d0.max(d1));
    }
    memo.insert(f.clone(), best);
    best
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} table={}", self.arity, self.bit_string())
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({self})")
    }
}

impl FromStr for TruthTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let line = s.trim();
        let mut arity = None;
        let mut table = None;
        for tok in line.split_whitespace() {
            if let Some(v) = tok.strip_prefix("n=") {
                arity = Some(
                    v.parse::<usize>()
                        .map_err(|e| parse_err(1, format!("bad arity: {e}")))?,
                );
            } else if let Some(v) = tok.strip_prefix("table=") {
                table = Some(v);
            } else {
                return Err(parse_err(1, format!("unexpected token `{tok}`")));
            }
        }
        let arity = arity.ok_or_else(|| parse_err(1, "missing n="))?;
        let table = table.ok_or_else(|| parse_err(1, "missing table="))?;
        let values = table
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(parse_err(1, format!("invalid table character `{c}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        TruthTable::from_values(arity, &values).map_err(|e| parse_err(1, e.to_string()))
    }
}

/// A point `z` together with the coordinates whose flip changes `f(z)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SensitivityWitness {
    pub point: usize,
    pub coords: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSensitivity {
    pub value: usize,
    pub point: usize,
    /// Pairwise-disjoint sensitive blocks at `point`.
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    /// Constant input: nothing evaluated.
    pub degenerate: bool,
    pub s: usize,
    pub bs: usize,
    pub deg: usize,
    pub dt: usize,
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}
