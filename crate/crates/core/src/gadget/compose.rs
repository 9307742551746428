use num_bigint::BigInt;
use num_traits::{One, Pow};
use serde::Serialize;

use super::{digits, Budget, GadgetMatrix, TupleShape};
use crate::boolfn::TruthTable;
use crate::error::{Error, Result};
use crate::CheckStatus;

fn tuple_dims(g: &GadgetMatrix, n: usize, budget: &Budget) -> Result<(usize, usize)> {
    let pow = |b: usize| (b as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    let (r, c) = (pow(g.rows()), pow(g.cols()));
    budget.check_cells("composed cells", r.saturating_mul(c))?;
    Ok((r as usize, c as usize))
}

/// Symbol matrix `(x⃗, y⃗) ↦ Σ_i g(x_i, y_i)·2^i` over `X^n × Y^n`.
fn bit_tuples(g: &GadgetMatrix, n: usize, budget: &Budget) -> Result<(usize, usize, Vec<u32>)> {
    if !g.is_boolean() {
        return Err(Error::Domain("inner gadget must be Boolean".into()));
    }
    let (r, c) = tuple_dims(g, n, budget)?;
    let rt: Vec<Vec<usize>> = (0..r).map(|x| digits(x, g.rows(), n)).collect();
    let ct: Vec<Vec<usize>> = (0..c).map(|y| digits(y, g.cols(), n)).collect();
    let mut out = Vec::with_capacity(r * c);
    for xs in &rt {
        for ys in &ct {
            let z = xs
                .iter()
                .zip(ys)
                .enumerate()
                .fold(0u32, |acc, (i, (&x, &y))| acc | g.get(x, y) << i);
            out.push(z);
        }
    }
    Ok((r, c, out))
}

/// `M_{f∘g}` over `X^n × Y^n`, rows and columns in odometer order with the
/// first coordinate fastest.
pub fn compose(f: &TruthTable, g: &GadgetMatrix, budget: &Budget) -> Result<GadgetMatrix> {
    let n = f.arity();
    let (r, c, z) = bit_tuples(g, n, budget)?;
    let entries = z.into_iter().map(|z| f.eval(z as usize) as u32).collect();
    Ok(GadgetMatrix::new(r, c, 2, entries)?.with_shape(TupleShape {
        base_rows: g.rows(),
        base_cols: g.cols(),
        arity: n,
    }))
}

/// `M_{g^n}` over the alphabet `2^n`, symbol bit `i` holding `g(x_i, y_i)`.
pub fn tuple_power(g: &GadgetMatrix, n: usize, budget: &Budget) -> Result<GadgetMatrix> {
    if n == 0 || n > 31 {
        return Err(Error::Domain(format!("tuple power {n} outside 1..=31")));
    }
    let (r, c, z) = bit_tuples(g, n, budget)?;
    Ok(GadgetMatrix::new(r, c, 1 << n, z)?.with_shape(TupleShape {
        base_rows: g.rows(),
        base_cols: g.cols(),
        arity: n,
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankLemmaReport {
    pub status: CheckStatus,
    pub rank_composed: usize,
    pub rank_gadget: usize,
    pub degree: usize,
    /// `(rk(g) - 1)^deg(f)`, exact.
    pub bound: String,
}

/// Checks `rk(f∘g) ≥ (rk(g) − 1)^{deg(f)}` with big integers. Constant-0 `f`
/// is reported as degenerate.
pub fn verify_rank_lemma(f: &TruthTable, g: &GadgetMatrix, budget: &Budget) -> Result<RankLemmaReport> {
    let rank_gadget = g.rank_q()?;
    let degree = f.degree();
    if f.is_constant_zero() {
        return Ok(RankLemmaReport {
            status: CheckStatus::Degenerate,
            rank_composed: 0,
            rank_gadget,
            degree,
            bound: "-".into(),
        });
    }
    let rank_composed = compose(f, g, budget)?.rank_q()?;
    let bound: BigInt = Pow::pow(BigInt::from(rank_gadget as i64 - 1), degree);
    Ok(RankLemmaReport {
        status: CheckStatus::from_bool(BigInt::from(rank_composed) >= bound),
        rank_composed,
        rank_gadget,
        degree,
        bound: bound.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct YangReport {
    pub status: CheckStatus,
    pub n: usize,
    pub rank_composed: usize,
    pub rank_gadget: usize,
    /// `(rk(g) − 1)^n − 1`, exact.
    pub bound: String,
}

/// Checks `rk(⊕_n ∘ g) ≥ (rk(g) − 1)^n − 1`.
pub fn verify_yang(g: &GadgetMatrix, n: usize, budget: &Budget) -> Result<YangReport> {
    let rank_gadget = g.rank_q()?;
    let rank_composed = compose(&TruthTable::parity(n), g, budget)?.rank_q()?;
    let bound: BigInt = Pow::pow(BigInt::from(rank_gadget as i64 - 1), n) - BigInt::one();
    let status = CheckStatus::from_bool(BigInt::from(rank_composed) >= bound);
    Ok(YangReport {
        status,
        n,
        rank_composed,
        rank_gadget,
        bound: bound.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::{make_gadget, GadgetSpec};

    fn b() -> Budget {
        Budget::default()
    }

    /// Oracle: evaluate `f(g(x_1,y_1),…)` straight from the tuple labels.
    fn direct_entry(f: &TruthTable, g: &GadgetMatrix, n: usize, r: usize, c: usize) -> u32 {
        let xs = digits(r, g.rows(), n);
        let ys = digits(c, g.cols(), n);
        let bits: Vec<bool> = xs.iter().zip(&ys).map(|(&x, &y)| g.get(x, y) == 1).collect();
        f.eval_bits(&bits) as u32
    }

    #[test]
    fn identity_bit_reproduces_gadget() {
        let g = make_gadget(&GadgetSpec::Random { seed: 1, rows: 3, cols: 4, bias: 0.5 }, &b()).unwrap();
        let c = compose(&TruthTable::dictator(1, 0), &g, &b()).unwrap();
        assert_eq!(c.entries(), g.entries());
        let t = tuple_power(&g, 1, &b()).unwrap();
        assert_eq!(t.entries(), g.entries());
    }

    #[test]
    fn constant_outer_gives_constant_matrix() {
        let g = make_gadget(&GadgetSpec::Ip(1), &b()).unwrap();
        let c = compose(&TruthTable::constant(2, true), &g, &b()).unwrap();
        assert_eq!(c.colors(), vec![1]);
        let k = GadgetMatrix::constant(2, 2, 0);
        let t = tuple_power(&k, 3, &b()).unwrap();
        assert_eq!((t.alphabet(), t.colors()), (8, vec![0]));
    }

    #[test]
    fn xor_of_equalities_matches_direct_evaluation() {
        let g = make_gadget(&GadgetSpec::Eq(1), &b()).unwrap();
        let f = TruthTable::parity(2);
        let c = compose(&f, &g, &b()).unwrap();
        assert_eq!((c.rows(), c.cols()), (4, 4));
        for r in 0..4 {
            for col in 0..4 {
                assert_eq!(c.get(r, col), direct_entry(&f, &g, 2, r, col));
            }
        }
        assert_eq!(c.shape().unwrap().row_tuple(2), vec![0, 1]);
    }

    #[test]
    fn tuple_power_of_and() {
        let g = make_gadget(&GadgetSpec::And1, &b()).unwrap();
        let t = tuple_power(&g, 2, &b()).unwrap();
        assert_eq!((t.rows(), t.cols(), t.alphabet()), (4, 4, 4));
        for r in 0..4 {
            for c in 0..4 {
                let xs = digits(r, 2, 2);
                let ys = digits(c, 2, 2);
                let want = (xs[0] & ys[0]) | (xs[1] & ys[1]) << 1;
                assert_eq!(t.get(r, c), want as u32);
            }
        }
    }

    #[test]
    fn compose_equals_tuple_power_then_outer() {
        let g = make_gadget(&GadgetSpec::Random { seed: 5, rows: 3, cols: 2, bias: 0.5 }, &b()).unwrap();
        for f in TruthTable::all(2) {
            let direct = compose(&f, &g, &b()).unwrap();
            let via = tuple_power(&g, 2, &b()).unwrap().map_symbols(2, |s| f.eval(s as usize) as u32);
            assert_eq!(direct.entries(), via.entries());
        }
    }

    #[test]
    fn composition_budget() {
        let g = make_gadget(&GadgetSpec::Eq(2), &b()).unwrap();
        let tight = Budget { cells: 255, nodes: 1 };
        assert!(matches!(compose(&TruthTable::parity(2), &g, &tight), Err(Error::Budget { .. })));
        assert!(compose(&TruthTable::parity(2), &g, &b()).is_ok());
    }

    #[test]
    fn rank_lemma_examples() {
        let eq1 = make_gadget(&GadgetSpec::Eq(1), &b()).unwrap();
        let r = verify_rank_lemma(&TruthTable::dictator(1, 0), &eq1, &b()).unwrap();
        assert_eq!((r.status, r.bound.as_str(), r.rank_composed), (CheckStatus::Pass, "1", 2));
        let r = verify_rank_lemma(&TruthTable::parity(2), &eq1, &b()).unwrap();
        // XOR of two equalities is the 4x4 matrix [[1,0,0,1],[0,1,1,0],...]: rank 2.
        assert_eq!((r.status, r.rank_composed), (CheckStatus::Pass, 2));
        let g = make_gadget(&GadgetSpec::Random { seed: 7, rows: 3, cols: 3, bias: 0.5 }, &b()).unwrap();
        let r = verify_rank_lemma(&TruthTable::and(2), &g, &b()).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);
        let r = verify_rank_lemma(&TruthTable::constant(2, false), &g, &b()).unwrap();
        assert_eq!(r.status, CheckStatus::Degenerate);
    }

    #[test]
    fn yang_examples() {
        let eq1 = make_gadget(&GadgetSpec::Eq(1), &b()).unwrap();
        let r = verify_yang(&eq1, 1, &b()).unwrap();
        assert_eq!((r.status, r.rank_composed), (CheckStatus::Pass, 2));
        let r = verify_yang(&eq1, 2, &b()).unwrap();
        assert_eq!((r.status, r.bound.as_str()), (CheckStatus::Pass, "0"));
        // A full-rank 3x3 instance: bound (3-1)^2 - 1 = 3.
        let full = (0..)
            .map(|seed| make_gadget(&GadgetSpec::Random { seed, rows: 3, cols: 3, bias: 0.5 }, &b()).unwrap())
            .find(|g| g.rank_q().unwrap() == 3)
            .unwrap();
        let r = verify_yang(&full, 2, &b()).unwrap();
        assert_eq!((r.status, r.bound.as_str()), (CheckStatus::Pass, "3"));
    }
}
