//! Protocols for `g` built from a cover of `f∘g` by repeated dense-rectangle
//! extraction and rank-decrement splits.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::extract::{extract_with, Regime};
use crate::bitset::BitSet;
use crate::boolfn::TruthTable;
use crate::error::{Error, Result};
use crate::gadget::{digits, undigits, Budget, GadgetMatrix, RankField};
use crate::protocol::{rebalance, rebalance_depth_bound, verify_protocol, Owner, ProtocolTree};
use crate::rectcover::{RectCover, Rectangle};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Rows,
    Cols,
}

#[derive(Clone, Debug, Serialize)]
pub struct Split {
    pub side: Side,
    pub rank: usize,
    /// Rank of `[R A]`, the rows of `R` with all columns.
    pub rank_rows_side: usize,
    /// Rank of `[R; B]`, the columns of `R` with all rows.
    pub rank_cols_side: usize,
    /// Indices on the chosen side that belong to `R`.
    pub inside: Vec<usize>,
    pub outside: Vec<usize>,
}

impl Split {
    pub fn rank_inside(&self) -> usize {
        match self.side {
            Side::Rows => self.rank_rows_side,
            Side::Cols => self.rank_cols_side,
        }
    }
}

/// Chooses the side of the block form `[R A; B Z]` whose `R`-part has the
/// smaller rank (rows on ties) and checks `2·min ≤ rk + 3`.
pub fn rank_decrement_split(m: &GadgetMatrix, r: &Rectangle, field: RankField) -> Result<Split> {
    if !r.is_monochromatic_in(m) {
        return Err(Error::Domain("split rectangle is not monochromatic".into()));
    }
    let all_rows: Vec<usize> = (0..m.rows()).collect();
    let all_cols: Vec<usize> = (0..m.cols()).collect();
    let rank = m.rank_in(field)?;
    let rank_rows_side = field.rank(&m.dense_rows(&r.rows.to_vec(), &all_cols));
    let rank_cols_side = field.rank(&m.dense_rows(&all_rows, &r.cols.to_vec()));
    if 2 * rank_rows_side.min(rank_cols_side) > rank + 3 {
        return Err(Error::Invariant(format!(
            "rank decrement failed: min({rank_rows_side}, {rank_cols_side}) > ({rank} + 3) / 2"
        )));
    }
    let (side, set) = if rank_rows_side <= rank_cols_side {
        (Side::Rows, &r.rows)
    } else {
        (Side::Cols, &r.cols)
    };
    Ok(Split {
        side,
        rank,
        rank_rows_side,
        rank_cols_side,
        inside: set.to_vec(),
        outside: set.complement().to_vec(),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SynthesisOptions {
    pub field: RankField,
    /// Submatrices of rank at most this are finished directly. Must be at
    /// least 3 so that every split lowers the rank on its `R` side.
    pub finish_rank: usize,
    pub budget: Budget,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            field: RankField::Rational,
            finish_rank: 5,
            budget: Budget::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthesisStep {
    pub depth: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub regime: Regime,
    pub side: Side,
    pub rank_inside: usize,
    /// `2·rank_inside ≤ rank + 3`.
    pub decrement_ok: bool,
    pub density: String,
    pub density_bound_ok: bool,
    /// Fraction of cells the outside branch drops, at least the density.
    pub removed: String,
    pub removed_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FinishRecord {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub depth: usize,
}

impl FinishRecord {
    pub fn within_bound(&self) -> bool {
        self.depth <= self.rank + 1
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SynthesisStats {
    pub steps: Vec<SynthesisStep>,
    pub finishes: Vec<FinishRecord>,
    pub leaves: usize,
    pub depth: usize,
    pub rebalanced_depth: usize,
    pub rebalance_bound: usize,
    /// Largest number of rank-shrink (inside) edges on a root-leaf path.
    pub max_rank_steps: usize,
    /// Largest number of density-shrink (outside) edges on a root-leaf path.
    pub max_density_steps: usize,
}

impl SynthesisStats {
    pub fn all_steps_ok(&self) -> bool {
        self.steps.iter().all(|s| s.decrement_ok && s.density_bound_ok && s.removed_ok)
            && self.finishes.iter().all(FinishRecord::within_bound)
            && self.rebalanced_depth <= self.rebalance_bound
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub tree: ProtocolTree,
    pub rebalanced: ProtocolTree,
    pub stats: SynthesisStats,
}

/// Builds a protocol for `g` from a cover of `f∘g`.
///
/// Each step extracts a dense monochromatic rectangle `R` of the current
/// submatrix from the cover restricted to it (its size stays that of the
/// original cover), and the owner of the lower-rank side of `R` announces
/// whether the input lies in `R`'s rows (bit 1) or not. Submatrices of rank
/// at most `finish_rank` are solved by announcing values on a basis.
pub fn synthesize_protocol(
    f: &TruthTable,
    g: &GadgetMatrix,
    cover: &RectCover,
    opts: &SynthesisOptions,
) -> Result<SynthesisResult> {
    if opts.finish_rank < 3 {
        return Err(Error::Domain("finish rank must be at least 3".into()));
    }
    let mut s = Synth {
        f,
        g,
        cover,
        n_cover: cover.len() as u64,
        opts,
        stats: SynthesisStats::default(),
    };
    let rows: Vec<usize> = (0..g.rows()).collect();
    let cols: Vec<usize> = (0..g.cols()).collect();
    let tree = s.run(&rows, &cols, 0, 0, 0)?;
    if !verify_protocol(&tree, g) {
        return Err(Error::Invariant("synthesized protocol is incorrect".into()));
    }
    let rebalanced = rebalance(&tree, g.rows(), g.cols())?;
    if !verify_protocol(&rebalanced, g) {
        return Err(Error::Invariant("rebalanced protocol is incorrect".into()));
    }
    let mut stats = s.stats;
    stats.leaves = tree.leaf_count();
    stats.depth = tree.depth();
    stats.rebalanced_depth = rebalanced.depth();
    stats.rebalance_bound = rebalance_depth_bound(stats.leaves);
    Ok(SynthesisResult { tree, rebalanced, stats })
}

struct Synth<'a> {
    f: &'a TruthTable,
    g: &'a GadgetMatrix,
    cover: &'a RectCover,
    n_cover: u64,
    opts: &'a SynthesisOptions,
    stats: SynthesisStats,
}

impl Synth<'_> {
    fn run(&mut self, rows: &[usize], cols: &[usize], depth: usize, rank_steps: usize, dens_steps: usize) -> Result<ProtocolTree> {
        let sub = self.g.submatrix(rows, cols);
        let rank = sub.rank_in(self.opts.field)?;
        if sub.mono_color(&BitSet::full(sub.rows()), &BitSet::full(sub.cols())).is_some()
            || rank <= self.opts.finish_rank
        {
            self.stats.max_rank_steps = self.stats.max_rank_steps.max(rank_steps);
            self.stats.max_density_steps = self.stats.max_density_steps.max(dens_steps);
            let t = finish(&sub, rows, cols, self.opts.field)?;
            if !sub.mono_color(&BitSet::full(sub.rows()), &BitSet::full(sub.cols())).is_some() {
                self.stats.finishes.push(FinishRecord { rows: rows.len(), cols: cols.len(), rank, depth: t.depth() });
            }
            return Ok(t);
        }
        let n = self.f.arity();
        let map = |ids: &[usize], base: usize| -> Vec<usize> {
            (0..ids.len().pow(n as u32))
                .map(|v| undigits(&digits(v, ids.len(), n).into_iter().map(|d| ids[d]).collect::<Vec<_>>(), base))
                .collect()
        };
        self.opts
            .budget
            .check_cells("restricted cover cells", (rows.len().pow(n as u32) * cols.len().pow(n as u32)) as u128)?;
        let sub_cover = self.cover.restrict(&map(rows, self.g.rows()), &map(cols, self.g.cols()));
        let (rect, trace) = extract_with(self.f, &sub, &sub_cover, self.n_cover, self.opts.field, &self.opts.budget)?;
        let split = rank_decrement_split(&sub, &rect, self.opts.field)?;
        let density = rect.density();
        let (side_len, inside_len) = match split.side {
            Side::Rows => (sub.rows(), split.inside.len()),
            Side::Cols => (sub.cols(), split.inside.len()),
        };
        let removed = Rational::new(BigInt::from(inside_len), BigInt::from(side_len));
        self.stats.steps.push(SynthesisStep {
            depth,
            rows: rows.len(),
            cols: cols.len(),
            rank,
            regime: trace.regime,
            side: split.side,
            rank_inside: split.rank_inside(),
            decrement_ok: 2 * split.rank_inside() <= rank + 3,
            density: density.to_string(),
            density_bound_ok: trace.bound_holds,
            removed: removed.to_string(),
            removed_ok: removed >= density && !density.is_zero(),
        });
        if split.outside.is_empty() {
            return Err(Error::Invariant("split does not shrink the matrix".into()));
        }
        let ids = |v: &[usize], base: &[usize]| -> Vec<usize> { v.iter().map(|&i| base[i]).collect() };
        Ok(match split.side {
            Side::Rows => {
                let (inn, out) = (ids(&split.inside, rows), ids(&split.outside, rows));
                let c1 = self.run(&inn, cols, depth + 1, rank_steps + 1, dens_steps)?;
                let c0 = self.run(&out, cols, depth + 1, rank_steps, dens_steps + 1)?;
                ProtocolTree::node(Owner::Alice, out, inn, c0, c1)
            }
            Side::Cols => {
                let (inn, out) = (ids(&split.inside, cols), ids(&split.outside, cols));
                let c1 = self.run(rows, &inn, depth + 1, rank_steps + 1, dens_steps)?;
                let c0 = self.run(rows, &out, depth + 1, rank_steps, dens_steps + 1)?;
                ProtocolTree::node(Owner::Bob, out, inn, c0, c1)
            }
        })
    }
}

/// Alice announces her row's values on a column basis (rows agreeing there
/// agree everywhere), then Bob announces the output. Ids are mapped back
/// through `rows` and `cols`.
pub fn finish(sub: &GadgetMatrix, rows: &[usize], cols: &[usize], field: RankField) -> Result<ProtocolTree> {
    let t = sub.transpose();
    let all: Vec<usize> = (0..sub.rows()).collect();
    let basis = field.independent_subset(&t.dense_rows(&(0..sub.cols()).collect::<Vec<_>>(), &all));
    finish_alice(sub, &all, &basis, rows, cols)
}

fn finish_alice(sub: &GadgetMatrix, live: &[usize], basis: &[usize], rows: &[usize], cols: &[usize]) -> Result<ProtocolTree> {
    let Some((&b, rest)) = basis.split_first() else {
        return finish_bob(sub, live, rows, cols);
    };
    let (p0, p1): (Vec<usize>, Vec<usize>) = live.iter().partition(|&&x| sub.get(x, b) == 0);
    if p0.is_empty() || p1.is_empty() {
        return finish_alice(sub, live, rest, rows, cols);
    }
    let c0 = finish_alice(sub, &p0, rest, rows, cols)?;
    let c1 = finish_alice(sub, &p1, rest, rows, cols)?;
    let up = |v: &[usize]| v.iter().map(|&i| rows[i]).collect::<Vec<_>>();
    Ok(ProtocolTree::node(Owner::Alice, up(&p0), up(&p1), c0, c1))
}

fn finish_bob(sub: &GadgetMatrix, live: &[usize], _rows: &[usize], cols: &[usize]) -> Result<ProtocolTree> {
    let x = live[0];
    if live.iter().any(|&r| sub.row(r) != sub.row(x)) {
        return Err(Error::Invariant("basis values do not determine the row".into()));
    }
    let (p0, p1): (Vec<usize>, Vec<usize>) = (0..sub.cols()).partition(|&y| sub.get(x, y) == 0);
    if p0.is_empty() || p1.is_empty() {
        return Ok(ProtocolTree::leaf(sub.get(x, 0)));
    }
    let up = |v: &[usize]| v.iter().map(|&i| cols[i]).collect::<Vec<_>>();
    Ok(ProtocolTree::node(Owner::Bob, up(&p0), up(&p1), ProtocolTree::leaf(0), ProtocolTree::leaf(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::{compose, make_gadget, GadgetSpec};
    use crate::rectcover::{cover_number, CoverMode};

    fn b() -> Budget {
        Budget::default()
    }

    fn cover_of(f: &TruthTable, g: &GadgetMatrix) -> RectCover {
        let m = compose(f, g, &b()).unwrap();
        cover_number(&m, CoverMode::Exact, &b()).unwrap().cover
    }

    #[test]
    fn split_examples() {
        let ones = GadgetMatrix::constant(3, 3, 1);
        let full = Rectangle::new(BitSet::full(3), BitSet::full(3), Some(1));
        let s = rank_decrement_split(&ones, &full, RankField::Rational).unwrap();
        assert_eq!((s.side, s.rank_rows_side, s.rank_cols_side), (Side::Rows, 1, 1));
        let id = GadgetMatrix::identity(4);
        let cell = Rectangle::new(BitSet::from_indices(4, [2]), BitSet::from_indices(4, [2]), Some(1));
        let s = rank_decrement_split(&id, &cell, RankField::Rational).unwrap();
        assert_eq!((s.rank_rows_side, s.rank_cols_side), (1, 1));
        assert_eq!(s.outside, vec![0, 1, 3]);
        let xor = make_gadget(&GadgetSpec::Xor1, &b()).unwrap();
        let zero = Rectangle::new(BitSet::from_indices(2, [0]), BitSet::from_indices(2, [0]), Some(0));
        let s = rank_decrement_split(&xor, &zero, RankField::Rational).unwrap();
        assert!(2 * s.rank_inside() <= s.rank + 3);
        let bad = Rectangle::new(BitSet::full(2), BitSet::full(2), None);
        assert!(rank_decrement_split(&xor, &bad, RankField::Rational).is_err());
    }

    #[test]
    fn split_inequality_on_random_matrices() {
        for seed in 0..40 {
            let m = make_gadget(&GadgetSpec::Random { seed, rows: 6, cols: 5, bias: 0.5 }, &b()).unwrap();
            for r in crate::rectcover::enumerate_maximal_mono_rectangles(&m) {
                for field in [RankField::Rational, RankField::Gf2] {
                    let s = rank_decrement_split(&m, &r, field).unwrap();
                    assert!(2 * s.rank_inside() <= s.rank + 3);
                }
            }
        }
    }

    #[test]
    fn constant_gadget_gives_a_leaf() {
        let g = GadgetMatrix::constant(3, 2, 1);
        let f = TruthTable::dictator(1, 0);
        let r = synthesize_protocol(&f, &g, &cover_of(&f, &g), &SynthesisOptions::default()).unwrap();
        assert_eq!((r.tree.depth(), r.tree.leaf_count()), (0, 1));
    }

    #[test]
    fn equality_from_dictator_cover() {
        let g = make_gadget(&GadgetSpec::Eq(1), &b()).unwrap();
        let f = TruthTable::dictator(1, 0);
        let r = synthesize_protocol(&f, &g, &cover_of(&f, &g), &SynthesisOptions::default()).unwrap();
        assert!(verify_protocol(&r.tree, &g));
        assert!(r.stats.all_steps_ok());
    }

    #[test]
    fn splitting_runs_with_low_finish_rank() {
        let g = make_gadget(&GadgetSpec::Random { seed: 13, rows: 4, cols: 4, bias: 0.5 }, &b()).unwrap();
        let f = TruthTable::parity(2);
        let cover = cover_of(&f, &g);
        for field in [RankField::Rational, RankField::Gf2] {
            let opts = SynthesisOptions { field, finish_rank: 3, ..Default::default() };
            let r = synthesize_protocol(&f, &g, &cover, &opts).unwrap();
            assert!(verify_protocol(&r.tree, &g));
            assert!(verify_protocol(&r.rebalanced, &g));
            assert!(r.stats.all_steps_ok(), "{:?}", r.stats);
            assert!(r.stats.rebalanced_depth <= rebalance_depth_bound(r.stats.leaves));
            if g.rank_in(field).unwrap() > 3 {
                assert!(!r.stats.steps.is_empty());
            }
        }
        let bad = SynthesisOptions { finish_rank: 2, ..Default::default() };
        assert!(synthesize_protocol(&f, &g, &cover, &bad).is_err());
    }

    #[test]
    fn finisher_depth_is_at_most_rank_plus_one() {
        for seed in 0..30 {
            let m = make_gadget(&GadgetSpec::Random { seed, rows: 5, cols: 6, bias: 0.5 }, &b()).unwrap();
            for field in [RankField::Rational, RankField::Gf2] {
                let rows: Vec<usize> = (0..5).collect();
                let cols: Vec<usize> = (0..6).collect();
                let t = finish(&m, &rows, &cols, field).unwrap();
                assert!(verify_protocol(&t, &m));
                assert!(t.depth() <= m.rank_in(field).unwrap() + 1);
            }
        }
    }
}
