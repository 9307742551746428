//! The standard instance corpus: every Boolean function on at most three
//! bits against a fixed list of gadgets.

use serde::Serialize;

use crate::boolfn::TruthTable;
use crate::error::Result;
use crate::gadget::{make_gadget, Budget, GadgetMatrix, GadgetSpec};
use crate::lifting::{regime_of, Regime};

pub const DEFAULT_SEED: u64 = 2024;
pub const MAX_ARITY: usize = 3;
pub const RANDOM_PER_REGIME: usize = 10;

#[derive(Clone, Debug)]
pub struct FunctionEntry {
    /// `f{n}:{index}` with the little-endian truth-table index.
    pub id: String,
    pub table: TruthTable,
}

#[derive(Clone, Debug)]
pub struct GadgetEntry {
    pub id: String,
    pub spec: GadgetSpec,
    pub matrix: GadgetMatrix,
    /// Regime the random generator selected it for.
    pub target: Option<Regime>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusMeta {
    pub generator: &'static str,
    pub seed: u64,
    pub budget_cells: u64,
    pub budget_nodes: u64,
    pub functions: usize,
    pub gadgets: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub seed: u64,
    pub budget: Budget,
    pub functions: Vec<FunctionEntry>,
    pub gadgets: Vec<GadgetEntry>,
}

pub fn function_id(f: &TruthTable) -> String {
    let index = (0..f.size()).filter(|&z| f.eval(z)).fold(0u64, |a, z| a | 1 << z);
    format!("f{}:{index}", f.arity())
}

/// All `2^{2^n}` functions for every `n ≤ max_arity`, ordered by arity then
/// truth-table index.
pub fn all_functions(max_arity: usize) -> Vec<FunctionEntry> {
    (0..=max_arity)
        .flat_map(TruthTable::all)
        .map(|table| FunctionEntry { id: function_id(&table), table })
        .collect()
}

pub fn named_gadgets() -> Vec<GadgetSpec> {
    vec![
        GadgetSpec::Eq(1),
        GadgetSpec::Xor1,
        GadgetSpec::And1,
        GadgetSpec::Ip(2),
        GadgetSpec::Ind(2),
        GadgetSpec::Eq(2),
    ]
}

/// Seeded random 3×3 and 4×4 gadgets, `per_regime` balanced and
/// `per_regime` biased ones, alternating sizes. Constant matrices are
/// skipped.
pub fn random_gadgets(seed: u64, per_regime: usize, budget: &Budget) -> Result<Vec<GadgetEntry>> {
    let mut out = Vec::new();
    let mut next = seed.wrapping_mul(1_000_003);
    for (target, bias) in [(Regime::Balanced, 0.5), (Regime::Biased, 0.93)] {
        let mut found = 0;
        while found < per_regime {
            let n = if found % 2 == 0 { 3 } else { 4 };
            let spec = GadgetSpec::Random { seed: next, rows: n, cols: n, bias };
            next = next.wrapping_add(1);
            let g = make_gadget(&spec, budget)?;
            if g.colors().len() < 2 || regime_of(&g, g.rank_q()?.max(1))? != target {
                continue;
            }
            out.push(GadgetEntry { id: spec.name(), spec, matrix: g, target: Some(target) });
            found += 1;
        }
    }
    Ok(out)
}

impl Corpus {
    pub fn standard(seed: u64, budget: &Budget) -> Result<Corpus> {
        let mut gadgets = Vec::new();
        for spec in named_gadgets() {
            let matrix = make_gadget(&spec, budget)?;
            gadgets.push(GadgetEntry { id: spec.name(), spec, matrix, target: None });
        }
        gadgets.extend(random_gadgets(seed, RANDOM_PER_REGIME, budget)?);
        Ok(Corpus { seed, budget: *budget, functions: all_functions(MAX_ARITY), gadgets })
    }

    /// Functions of arity at most `n`.
    pub fn functions_up_to(&self, n: usize) -> impl Iterator<Item = &FunctionEntry> {
        self.functions.iter().filter(move |f| f.table.arity() <= n)
    }

    pub fn gadget(&self, id: &str) -> Option<&GadgetEntry> {
        self.gadgets.iter().find(|g| g.id == id)
    }

    pub fn meta(&self) -> CorpusMeta {
        CorpusMeta {
            generator: "standard",
            seed: self.seed,
            budget_cells: self.budget.cells,
            budget_nodes: self.budget.nodes,
            functions: self.functions.len(),
            gadgets: self.gadgets.iter().map(|g| g.id.clone()).collect(),
        }
    }
}
