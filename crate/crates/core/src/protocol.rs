//! Deterministic two-party protocol trees.
//!
//! Each internal node belongs to one player and splits that player's current
//! set of inputs (original row or column ids) into a 0-part and a 1-part. A
//! tree is correct for a matrix when every leaf rectangle is monochromatic
//! with the leaf's symbol, so both players know the output at the end.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Pow;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::{join_indices, BitSet};
use crate::error::{parse_err, Error, Result};
use crate::gadget::rank::rank_rational_01;
use crate::gadget::{Budget, GadgetMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Owner {
    Alice,
    Bob,
}

impl Owner {
    fn tag(self) -> char {
        match self {
            Owner::Alice => 'A',
            Owner::Bob => 'B',
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub enum ProtocolTree {
    Leaf {
        symbol: u32,
    },
    Node {
        owner: Owner,
        part0: Vec<usize>,
        part1: Vec<usize>,
        child0: Box<ProtocolTree>,
        child1: Box<ProtocolTree>,
    },
}

impl ProtocolTree {
    pub fn leaf(symbol: u32) -> Self {
        ProtocolTree::Leaf { symbol }
    }

    pub fn node(owner: Owner, part0: Vec<usize>, part1: Vec<usize>, c0: ProtocolTree, c1: ProtocolTree) -> Self {
        let (mut part0, mut part1) = (part0, part1);
        part0.sort_unstable();
        part1.sort_unstable();
        ProtocolTree::Node {
            owner,
            part0,
            part1,
            child0: Box::new(c0),
            child1: Box::new(c1),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            ProtocolTree::Leaf { .. } => 1,
            ProtocolTree::Node { child0, child1, .. } => child0.leaf_count() + child1.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ProtocolTree::Leaf { .. } => 0,
            ProtocolTree::Node { child0, child1, .. } => 1 + child0.depth().max(child1.depth()),
        }
    }

    /// Output on `(x, y)`. Fails if `x` or `y` falls outside both parts of a
    /// node on its path.
    pub fn eval(&self, x: usize, y: usize) -> Result<u32> {
        let mut t = self;
        loop {
            match t {
                ProtocolTree::Leaf { symbol } => return Ok(*symbol),
                ProtocolTree::Node { owner, part0, part1, child0, child1 } => {
                    let v = if *owner == Owner::Alice { x } else { y };
                    t = if part0.binary_search(&v).is_ok() {
                        child0
                    } else if part1.binary_search(&v).is_ok() {
                        child1
                    } else {
                        return Err(Error::MalformedTree(format!(
                            "input {v} missing at a {:?} node",
                            owner
                        )));
                    };
                }
            }
        }
    }

    /// Checks that every node partitions its owner's current set into two
    /// nonempty parts, starting from `0..rows × 0..cols`.
    pub fn check_structure(&self, rows: usize, cols: usize) -> Result<()> {
        self.check_from(&BitSet::full(rows), &BitSet::full(cols))
    }

    fn check_from(&self, rs: &BitSet, cs: &BitSet) -> Result<()> {
        let ProtocolTree::Node { owner, part0, part1, child0, child1 } = self else {
            return Ok(());
        };
        let side = if *owner == Owner::Alice { rs } else { cs };
        if part0.is_empty() || part1.is_empty() {
            return Err(Error::MalformedTree("empty part".into()));
        }
        if let Some(&v) = part0.iter().chain(part1).find(|&&v| v >= side.len()) {
            return Err(Error::MalformedTree(format!("id {v} out of range")));
        }
        let p0 = BitSet::from_indices(side.len(), part0.iter().copied());
        let p1 = BitSet::from_indices(side.len(), part1.iter().copied());
        if p0.count() != part0.len() || p1.count() != part1.len() {
            return Err(Error::MalformedTree("repeated id in a part".into()));
        }
        if p0.intersects(&p1) {
            return Err(Error::MalformedTree("parts overlap".into()));
        }
        let mut u = p0.clone();
        u.union_with(&p1);
        if &u != side {
            return Err(Error::MalformedTree("parts do not cover the current set".into()));
        }
        match owner {
            Owner::Alice => {
                child0.check_from(&p0, cs)?;
                child1.check_from(&p1, cs)
            }
            Owner::Bob => {
                child0.check_from(rs, &p0)?;
                child1.check_from(rs, &p1)
            }
        }
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ProtocolTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolTree::Leaf { symbol } => write!(f, "[sym={symbol}]"),
            ProtocolTree::Node { owner, part0, part1, child0, child1 } => write!(
                f,
                "({} {}|{} {} {})",
                owner.tag(),
                join_indices(part0.iter().copied()),
                join_indices(part1.iter().copied()),
                child0,
                child1
            ),
        }
    }
}

impl fmt::Debug for ProtocolTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ProtocolTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = TreeParser { s: s.as_bytes(), pos: 0 };
        let t = p.tree()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(t)
    }
}

struct TreeParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl TreeParser<'_> {
    fn err(&self, msg: &str) -> Error {
        parse_err(1, format!("{msg} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        self.skip_ws();
        if self.s[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(self.err(&format!("expected `{lit}`")))
        }
    }

    fn number(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("expected a number"))
    }

    fn ids(&mut self) -> Result<Vec<usize>> {
        let mut v = Vec::new();
        if self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            v.push(self.number()?);
            while self.pos < self.s.len() && self.s[self.pos] == b',' {
                self.pos += 1;
                v.push(self.number()?);
            }
        }
        Ok(v)
    }

    fn tree(&mut self) -> Result<ProtocolTree> {
        self.skip_ws();
        match self.s.get(self.pos) {
            Some(b'[') => {
                self.expect("[sym=")?;
                let symbol = self.number()? as u32;
                self.expect("]")?;
                Ok(ProtocolTree::leaf(symbol))
            }
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let owner = match self.s.get(self.pos) {
                    Some(b'A') => Owner::Alice,
                    Some(b'B') => Owner::Bob,
                    _ => return Err(self.err("expected owner A or B")),
                };
                self.pos += 1;
                self.skip_ws();
                let part0 = self.ids()?;
                self.expect("|")?;
                let part1 = self.ids()?;
                let c0 = self.tree()?;
                let c1 = self.tree()?;
                self.expect(")")?;
                Ok(ProtocolTree::node(owner, part0, part1, c0, c1))
            }
            _ => Err(self.err("expected `(` or `[`")),
        }
    }
}

/// True iff the tree is structurally valid for the matrix dimensions and
/// computes every entry.
pub fn verify_protocol(t: &ProtocolTree, m: &GadgetMatrix) -> bool {
    t.check_structure(m.rows(), m.cols()).is_ok()
        && (0..m.rows()).all(|x| (0..m.cols()).all(|y| t.eval(x, y).ok() == Some(m.get(x, y))))
}

pub fn leaf_count(t: &ProtocolTree) -> usize {
    t.leaf_count()
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// `⌈2·log_{3/2} ℓ⌉`, computed exactly as the least `D` with `3^D ≥ ℓ²·2^D`.
pub fn rebalance_depth_bound(leaves: usize) -> usize {
    let l2 = BigInt::from(leaves) * BigInt::from(leaves);
    (0..)
        .find(|&d: &u32| Pow::pow(BigInt::from(3), d) >= &l2 * Pow::pow(BigInt::from(2), d))
        .unwrap() as usize
}

#[derive(Clone, Debug)]
pub struct CcResult {
    /// Exact communication complexity when `exact`, otherwise an upper bound.
    pub value: usize,
    pub lower: usize,
    pub exact: bool,
    /// Correct protocol of depth `value`.
    pub tree: ProtocolTree,
    pub nodes: u64,
}

/// Exact deterministic communication complexity with a witness tree.
pub fn exact_cc(m: &GadgetMatrix, budget: &Budget) -> Result<CcResult> {
    exact_cc_with(m, budget, true)
}

/// As [`exact_cc`]; `merge_duplicates = false` enumerates bipartitions of
/// individual rows and columns instead of classes of identical ones.
pub fn exact_cc_with(m: &GadgetMatrix, budget: &Budget, merge_duplicates: bool) -> Result<CcResult> {
    budget.check_cells("protocol search cells", m.cells() as u128)?;
    let rs = BitSet::full(m.rows());
    let cs = BitSet::full(m.cols());
    let trivial = trivial_tree(m, &rs, &cs);
    let ub = trivial.depth();
    let mut s = CcSearch {
        m,
        merge: merge_duplicates,
        memo: HashMap::new(),
        nodes: 0,
        limit: budget.nodes,
    };
    let lb = s.entry(&rs, &cs).lo;
    for d in lb..ub {
        match s.can(&rs, &cs, d) {
            Some(true) => {
                let tree = s.rebuild(&rs, &cs);
                return Ok(CcResult { value: d, lower: d, exact: true, tree, nodes: s.nodes });
            }
            Some(false) => {}
            None => {
                return Ok(CcResult {
                    value: ub,
                    lower: d,
                    exact: false,
                    tree: trivial,
                    nodes: s.nodes,
                })
            }
        }
    }
    Ok(CcResult { value: ub, lower: ub, exact: true, tree: trivial, nodes: s.nodes })
}

/// Alice announces her row class, Bob then announces the output, each by
/// halving.
fn trivial_tree(m: &GadgetMatrix, rs: &BitSet, cs: &BitSet) -> ProtocolTree {
    if let Some(c) = m.mono_color(rs, cs) {
        return ProtocolTree::leaf(c);
    }
    let rc = classes(m, rs, cs, Owner::Alice);
    let (owner, groups) = if rc.len() >= 2 {
        (Owner::Alice, rc)
    } else {
        // All rows agree: group columns by their common value.
        let x = rs.first().unwrap();
        let mut by_val: Vec<(u32, BitSet)> = Vec::new();
        for y in cs.iter() {
            let v = m.get(x, y);
            match by_val.iter_mut().find(|(w, _)| *w == v) {
                Some((_, s)) => s.insert(y),
                None => by_val.push((v, BitSet::from_indices(cs.len(), [y]))),
            }
        }
        (Owner::Bob, by_val.into_iter().map(|(_, s)| s).collect())
    };
    let half = groups.len() / 2;
    let mut p0 = BitSet::new(groups[0].len());
    let mut p1 = p0.clone();
    for (i, g) in groups.iter().enumerate() {
        if i < groups.len() - half { p0.union_with(g) } else { p1.union_with(g) }
    }
    let (c0, c1) = match owner {
        Owner::Alice => (trivial_tree(m, &p0, cs), trivial_tree(m, &p1, cs)),
        Owner::Bob => (trivial_tree(m, rs, &p0), trivial_tree(m, rs, &p1)),
    };
    ProtocolTree::node(owner, p0.to_vec(), p1.to_vec(), c0, c1)
}

/// Classes of identical rows (Alice) or columns (Bob) of `m[rs, cs]`, ordered
/// by first member.
fn classes(m: &GadgetMatrix, rs: &BitSet, cs: &BitSet, owner: Owner) -> Vec<BitSet> {
    let (side, other) = if owner == Owner::Alice { (rs, cs) } else { (cs, rs) };
    let mut keys: Vec<(Vec<u32>, BitSet)> = Vec::new();
    for v in side.iter() {
        let key: Vec<u32> = other
            .iter()
            .map(|w| if owner == Owner::Alice { m.get(v, w) } else { m.get(w, v) })
            .collect();
        match keys.iter_mut().find(|(k, _)| *k == key) {
            Some((_, s)) => s.insert(v),
            None => keys.push((key, BitSet::from_indices(side.len(), [v]))),
        }
    }
    keys.into_iter().map(|(_, s)| s).collect()
}

struct Entry {
    lo: usize,
    /// Smallest depth known achievable, with the split that achieves it
    /// (`None` at monochromatic rectangles).
    hi: Option<(usize, Option<(Owner, BitSet, BitSet)>)>,
}

struct CcSearch<'a> {
    m: &'a GadgetMatrix,
    merge: bool,
    memo: HashMap<(BitSet, BitSet), Entry>,
    nodes: u64,
    limit: u64,
}

impl CcSearch<'_> {
    fn entry(&mut self, rs: &BitSet, cs: &BitSet) -> &mut Entry {
        let key = (rs.clone(), cs.clone());
        if !self.memo.contains_key(&key) {
            let e = if self.m.mono_color(rs, cs).is_some() {
                Entry { lo: 0, hi: Some((0, None)) }
            } else {
                let dense = self.m.dense_rows(&rs.to_vec(), &cs.to_vec());
                let mut colors: Vec<u32> = dense.iter().flatten().copied().collect();
                colors.sort_unstable();
                colors.dedup();
                let lo = ceil_log2(rank_rational_01(&dense)).max(ceil_log2(colors.len())).max(1);
                Entry { lo, hi: None }
            };
            self.memo.insert(key.clone(), e);
        }
        self.memo.get_mut(&key).unwrap()
    }

    /// Whether `m[rs, cs]` has a protocol of depth at most `d`; `None` once
    /// the node budget is spent.
    fn can(&mut self, rs: &BitSet, cs: &BitSet, d: usize) -> Option<bool> {
        let e = self.entry(rs, cs);
        if e.hi.as_ref().is_some_and(|h| h.0 <= d) {
            return Some(true);
        }
        if e.lo > d {
            return Some(false);
        }
        self.nodes += 1;
        if self.nodes > self.limit {
            return None;
        }
        for owner in [Owner::Alice, Owner::Bob] {
            let groups = if self.merge {
                classes(self.m, rs, cs, owner)
            } else {
                let side = if owner == Owner::Alice { rs } else { cs };
                side.iter().map(|v| BitSet::from_indices(side.len(), [v])).collect()
            };
            let k = groups.len();
            if k < 2 {
                continue;
            }
            for mask in 1u64..1u64 << (k - 1) {
                self.nodes += 1;
                if self.nodes > self.limit {
                    return None;
                }
                let mut p0 = groups[0].clone();
                let mut p1 = BitSet::new(p0.len());
                for (i, g) in groups.iter().enumerate().skip(1) {
                    if mask >> (i - 1) & 1 == 1 { p1.union_with(g) } else { p0.union_with(g) }
                }
                let (a, b) = match owner {
                    Owner::Alice => ((p0.clone(), cs.clone()), (p1.clone(), cs.clone())),
                    Owner::Bob => ((rs.clone(), p0.clone()), (rs.clone(), p1.clone())),
                };
                // Cheap rejection on stored lower bounds before recursing.
                if self.entry(&a.0, &a.1).lo > d - 1 || self.entry(&b.0, &b.1).lo > d - 1 {
                    continue;
                }
                if self.can(&a.0, &a.1, d - 1)? && self.can(&b.0, &b.1, d - 1)? {
                    self.entry(rs, cs).hi = Some((d, Some((owner, p0, p1))));
                    return Some(true);
                }
            }
        }
        self.entry(rs, cs).lo = d + 1;
        Some(false)
    }

    fn rebuild(&mut self, rs: &BitSet, cs: &BitSet) -> ProtocolTree {
        let split = self.entry(rs, cs).hi.clone().expect("solved rectangle").1;
        match split {
            None => ProtocolTree::leaf(self.m.mono_color(rs, cs).unwrap()),
            Some((owner, p0, p1)) => {
                let (c0, c1) = match owner {
                    Owner::Alice => (self.rebuild(&p0, cs), self.rebuild(&p1, cs)),
                    Owner::Bob => (self.rebuild(rs, &p0), self.rebuild(rs, &p1)),
                };
                ProtocolTree::node(owner, p0.to_vec(), p1.to_vec(), c0, c1)
            }
        }
    }
}

/// Restriction of `t` to inputs in `rs × cs`, dropping nodes left with an
/// empty part.
pub fn restrict_tree(t: &ProtocolTree, rs: &BitSet, cs: &BitSet) -> ProtocolTree {
    match t {
        ProtocolTree::Leaf { .. } => t.clone(),
        ProtocolTree::Node { owner, part0, part1, child0, child1 } => {
            let side = if *owner == Owner::Alice { rs } else { cs };
            let p0: Vec<usize> = part0.iter().copied().filter(|&v| side.contains(v)).collect();
            let p1: Vec<usize> = part1.iter().copied().filter(|&v| side.contains(v)).collect();
            let sub = |child: &ProtocolTree, p: &[usize]| {
                let ps = BitSet::from_indices(side.len(), p.iter().copied());
                match owner {
                    Owner::Alice => restrict_tree(child, &ps, cs),
                    Owner::Bob => restrict_tree(child, rs, &ps),
                }
            };
            match (p0.is_empty(), p1.is_empty()) {
                (true, _) => sub(child1, &p1),
                (_, true) => sub(child0, &p0),
                _ => {
                    let c0 = sub(child0, &p0);
                    let c1 = sub(child1, &p1);
                    ProtocolTree::node(*owner, p0, p1, c0, c1)
                }
            }
        }
    }
}

/// A tree computing the same function as `t` on `0..rows × 0..cols` with
/// depth at most [`rebalance_depth_bound`] of its leaf count.
///
/// A node `v` holding between a third and two thirds of the leaves is
/// located; Alice says whether `x` reaches `v`'s rows, then Bob whether `y`
/// reaches its columns. Inside both, the protocol continues at `v`;
/// otherwise it continues in `t` with `v` cut out. Both residual trees are
/// rebalanced recursively.
pub fn rebalance(t: &ProtocolTree, rows: usize, cols: usize) -> Result<ProtocolTree> {
    t.check_structure(rows, cols)?;
    Ok(rebalance_on(t, &BitSet::full(rows), &BitSet::full(cols)))
}

fn rebalance_on(t: &ProtocolTree, rs: &BitSet, cs: &BitSet) -> ProtocolTree {
    let t = restrict_tree(t, rs, cs);
    let l = t.leaf_count();
    if l <= 1 {
        return t;
    }
    let mut best: Option<(usize, Vec<bool>, BitSet, BitSet)> = None;
    find_balanced(&t, l, 0, &mut Vec::new(), rs, cs, &mut best);
    let (_, path, xv, yv) = best.expect("a balanced node exists when l >= 2");
    let inner = subtree(&t, &path);
    let outer = cut(&t, &path);
    let in_rows = rs.intersection(&xv);
    let out_rows = rs.difference(&xv);
    let in_cols = cs.intersection(&yv);
    let out_cols = cs.difference(&yv);

    let bob = if out_cols.is_empty() {
        rebalance_on(inner, &in_rows, cs)
    } else {
        ProtocolTree::node(
            Owner::Bob,
            out_cols.to_vec(),
            in_cols.to_vec(),
            rebalance_on(&outer, &in_rows, &out_cols),
            rebalance_on(inner, &in_rows, &in_cols),
        )
    };
    if out_rows.is_empty() {
        bob
    } else {
        ProtocolTree::node(
            Owner::Alice,
            out_rows.to_vec(),
            in_rows.to_vec(),
            rebalance_on(&outer, &out_rows, cs),
            bob,
        )
    }
}

/// Deepest node with `ℓ/3 ≤ leaves ≤ 2ℓ/3`, leftmost among equals, with its
/// rectangle.
fn find_balanced(
    t: &ProtocolTree,
    l: usize,
    depth: usize,
    path: &mut Vec<bool>,
    rs: &BitSet,
    cs: &BitSet,
    best: &mut Option<(usize, Vec<bool>, BitSet, BitSet)>,
) {
    let lv = t.leaf_count();
    if 3 * lv >= l && 3 * lv <= 2 * l && best.as_ref().is_none_or(|b| depth > b.0) {
        *best = Some((depth, path.clone(), rs.clone(), cs.clone()));
    }
    if let ProtocolTree::Node { owner, part0, part1, child0, child1 } = t {
        for (bit, part, child) in [(false, part0, child0), (true, part1, child1)] {
            path.push(bit);
            match owner {
                Owner::Alice => {
                    let p = BitSet::from_indices(rs.len(), part.iter().copied());
                    find_balanced(child, l, depth + 1, path, &p, cs, best);
                }
                Owner::Bob => {
                    let p = BitSet::from_indices(cs.len(), part.iter().copied());
                    find_balanced(child, l, depth + 1, path, rs, &p, best);
                }
            }
            path.pop();
        }
    }
}

fn subtree<'a>(t: &'a ProtocolTree, path: &[bool]) -> &'a ProtocolTree {
    path.iter().fold(t, |t, &b| match t {
        ProtocolTree::Node { child0, child1, .. } => if b { child1 } else { child0 },
        ProtocolTree::Leaf { .. } => unreachable!("path leaves the tree"),
    })
}

/// `t` with the node at `path` removed and its parent replaced by its sibling.
fn cut(t: &ProtocolTree, path: &[bool]) -> ProtocolTree {
    let ProtocolTree::Node { owner, part0, part1, child0, child1 } = t else {
        unreachable!("path leaves the tree")
    };
    match path {
        [] => unreachable!("cannot cut the root"),
        [b] => if *b { (**child0).clone() } else { (**child1).clone() },
        [b, rest @ ..] => {
            let (c0, c1) = if *b {
                ((**child0).clone(), cut(child1, rest))
            } else {
                (cut(child0, rest), (**child1).clone())
            };
            ProtocolTree::node(*owner, part0.clone(), part1.clone(), c0, c1)
        }
    }
}

/// A random tree with exactly `leaves` leaves on `0..rows × 0..cols` and the
/// matrix it computes. Leaf symbols are uniform bits.
pub fn random_tree<R: Rng>(rng: &mut R, rows: usize, cols: usize, leaves: usize) -> Result<(ProtocolTree, GadgetMatrix)> {
    if leaves == 0 || leaves > rows * cols {
        return Err(Error::Domain(format!("{leaves} leaves do not fit a {rows}x{cols} domain")));
    }
    let t = grow(rng, &(0..rows).collect::<Vec<_>>(), &(0..cols).collect::<Vec<_>>(), leaves);
    let mut err = None;
    let m = GadgetMatrix::from_fn(rows, cols, 2, |x, y| {
        t.eval(x, y).unwrap_or_else(|e| {
            err = Some(e);
            0
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok((t, m)),
    }
}

fn grow<R: Rng>(rng: &mut R, rs: &[usize], cs: &[usize], leaves: usize) -> ProtocolTree {
    if leaves == 1 {
        return ProtocolTree::leaf(rng.gen_range(0..2));
    }
    loop {
        let alice = if rs.len() < 2 { false } else if cs.len() < 2 { true } else { rng.gen_bool(0.5) };
        let (side, other) = if alice { (rs, cs.len()) } else { (cs, rs.len()) };
        let k0 = rng.gen_range(1..side.len());
        let l0 = rng.gen_range(1..leaves);
        if k0 * other < l0 || (side.len() - k0) * other < leaves - l0 {
            continue;
        }
        let mut shuffled = side.to_vec();
        shuffled.shuffle(rng);
        let (p0, p1) = shuffled.split_at(k0);
        let (c0, c1) = if alice {
            (grow(rng, p0, cs, l0), grow(rng, p1, cs, leaves - l0))
        } else {
            (grow(rng, rs, p0, l0), grow(rng, rs, p1, leaves - l0))
        };
        return ProtocolTree::node(if alice { Owner::Alice } else { Owner::Bob }, p0.to_vec(), p1.to_vec(), c0, c1);
    }
}
