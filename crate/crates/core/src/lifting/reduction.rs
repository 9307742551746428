//! Reduction from block sensitivity to sensitivity for gadgets whose rows
//! come in complementary pairs.

use serde::Serialize;

use crate::boolfn::TruthTable;
use crate::error::{Error, Result};
use crate::gadget::{digits, Budget, GadgetMatrix};

/// A map `x ↦ x̄` with `g(x̄, y) = 1 − g(x, y)` for all `y`, if one exists.
pub fn check_negation_symmetry(g: &GadgetMatrix) -> Option<Vec<usize>> {
    g.negation_symmetry()
}

#[derive(Clone, Debug)]
pub struct BsReduction {
    /// `b = bs(f)`.
    pub b: usize,
    /// The point `z̃` where `f` attains block sensitivity `b`.
    pub point: usize,
    pub blocks: Vec<Vec<usize>>,
    /// `f′(z) = f(z̃ ⊕ ⋃_{z_i = 1} S_i)` on `b` bits.
    pub f_prime: TruthTable,
    pub involution: Vec<usize>,
    /// For coordinates outside every block, a gadget cell with value `z̃_j`.
    pub fixed: Vec<Option<(usize, usize)>>,
    block_of: Vec<Option<usize>>,
}

impl BsReduction {
    /// Alice's input for `f∘g` from her input `(x_1..x_b)` for `f′∘g`.
    pub fn translate_alice(&self, xs: &[usize]) -> Vec<usize> {
        (0..self.block_of.len())
            .map(|j| match self.block_of[j] {
                Some(i) if self.point >> j & 1 == 1 => self.involution[xs[i]],
                Some(i) => xs[i],
                None => self.fixed[j].expect("outside coordinates are fixed").0,
            })
            .collect()
    }

    /// Bob's input for `f∘g` from `(y_1..y_b)`.
    pub fn translate_bob(&self, ys: &[usize]) -> Vec<usize> {
        (0..self.block_of.len())
            .map(|j| match self.block_of[j] {
                Some(i) => ys[i],
                None => self.fixed[j].expect("outside coordinates are fixed").1,
            })
            .collect()
    }

    /// Checks `s(f′) = b` and, over all inputs, `f′∘g = (f∘g)∘translate`.
    pub fn verify(&self, f: &TruthTable, g: &GadgetMatrix, budget: &Budget) -> Result<BsReductionReport> {
        let b = self.b;
        let pairs = ((g.rows() * g.cols()) as u128).checked_pow(b as u32).unwrap_or(u128::MAX);
        budget.check_cells("reduction input pairs", pairs)?;
        let (nr, nc) = (g.rows().pow(b as u32), g.cols().pow(b as u32));
        let mut equal = true;
        for r in 0..nr {
            let xs = digits(r, g.rows(), b);
            let tx = self.translate_alice(&xs);
            for c in 0..nc {
                let ys = digits(c, g.cols(), b);
                let ty = self.translate_bob(&ys);
                let direct = (0..b).fold(0usize, |z, i| z | (g.get(xs[i], ys[i]) as usize) << i);
                let lifted = (0..tx.len()).fold(0usize, |z, j| z | (g.get(tx[j], ty[j]) as usize) << j);
                if self.f_prime.eval(direct) != f.eval(lifted) {
                    equal = false;
                }
            }
        }
        let sensitivity = self.f_prime.sensitivity();
        Ok(BsReductionReport {
            b,
            sensitivity_f_prime: sensitivity,
            sensitivity_ok: sensitivity == b,
            pairs_checked: pairs as u64,
            equal,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BsReductionReport {
    pub b: usize,
    pub sensitivity_f_prime: usize,
    pub sensitivity_ok: bool,
    pub pairs_checked: u64,
    pub equal: bool,
}

impl BsReductionReport {
    pub fn pass(&self) -> bool {
        self.sensitivity_ok && self.equal
    }
}

/// Builds `f′` from a block-sensitivity witness of `f` and the input
/// translators that embed `f′∘g` into `f∘g`.
pub fn bs_reduction(f: &TruthTable, g: &GadgetMatrix) -> Result<BsReduction> {
    let involution = check_negation_symmetry(g)
        .ok_or_else(|| Error::Unsupported("gadget rows are not closed under complement".into()))?;
    let w = f.block_sensitivity();
    let n = f.arity();
    let mut block_of = vec![None; n];
    for (i, blk) in w.blocks.iter().enumerate() {
        for &j in blk {
            block_of[j] = Some(i);
        }
    }
    let masks: Vec<usize> = w.blocks.iter().map(|blk| blk.iter().fold(0, |m, &j| m | 1 << j)).collect();
    let point = w.point;
    let f_prime = TruthTable::from_fn(w.value, |z| {
        let flip = (0..masks.len()).filter(|&i| z >> i & 1 == 1).fold(0, |m, i| m | masks[i]);
        f.eval(point ^ flip)
    });
    let mut fixed = vec![None; n];
    for j in (0..n).filter(|&j| block_of[j].is_none()) {
        let want = (point >> j & 1) as u32;
        let cell = (0..g.rows())
            .flat_map(|x| (0..g.cols()).map(move |y| (x, y)))
            .find(|&(x, y)| g.get(x, y) == want)
            .ok_or(Error::Unrealizable { coordinate: j, value: want as u8 })?;
        fixed[j] = Some(cell);
    }
    Ok(BsReduction {
        b: w.value,
        point,
        blocks: w.blocks,
        f_prime,
        involution,
        fixed,
        block_of,
    })
}
