//! Monochromatic rectangles and covers.
//!
//! Covers may overlap. Rectangles are ordered canonically by (rows, cols,
//! color) using the [`BitSet`] order, and every search below breaks ties by
//! that order.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::bitset::{join_indices, BitSet};
use crate::error::{parse_err, Error, Result};
use crate::gadget::{Budget, GadgetMatrix, RankField};
use crate::Rational;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rectangle {
    pub rows: BitSet,
    pub cols: BitSet,
    pub color: Option<u32>,
}

impl Rectangle {
    pub fn new(rows: BitSet, cols: BitSet, color: Option<u32>) -> Self {
        Self { rows, cols, color }
    }

    pub fn area(&self) -> usize {
        self.rows.count() * self.cols.count()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.rows.contains(x) && self.cols.contains(y)
    }

    /// `|A|·|B| / (|X|·|Y|)`.
    pub fn density(&self) -> Rational {
        Rational::new(
            BigInt::from(self.area()),
            BigInt::from(self.rows.len() * self.cols.len()),
        )
    }

    /// Checks the rectangle against `m`: nonempty sides and, when a color is
    /// recorded, every entry equal to it.
    pub fn is_monochromatic_in(&self, m: &GadgetMatrix) -> bool {
        if self.rows.len() != m.rows() || self.cols.len() != m.cols() {
            return false;
        }
        if self.rows.is_empty() || self.cols.is_empty() {
            return false;
        }
        match m.mono_color(&self.rows, &self.cols) {
            Some(c) => self.color.is_none_or(|k| k == c),
            None => false,
        }
    }

    pub fn cell_set(&self, cols: usize) -> BitSet {
        let mut s = BitSet::new(self.rows.len() * cols);
        for x in self.rows.iter() {
            for y in self.cols.iter() {
                s.insert(x * cols + y);
            }
        }
        s
    }

    pub fn to_line(&self) -> String {
        let color = self.color.map_or("-".to_string(), |c| c.to_string());
        format!(
            "color={} rows={} cols={}",
            color,
            join_indices(self.rows.iter()),
            join_indices(self.cols.iter())
        )
    }
}

impl fmt::Debug for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// A list of monochromatic rectangles over an `rows × cols` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectCover {
    pub rows: usize,
    pub cols: usize,
    pub rectangles: Vec<Rectangle>,
}

impl RectCover {
    pub fn len(&self) -> usize {
        self.rectangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rectangles.is_empty()
    }

    /// Every rectangle monochromatic and their union the whole matrix.
    pub fn validate(&self, m: &GadgetMatrix) -> Result<()> {
        if (self.rows, self.cols) != (m.rows(), m.cols()) {
            return Err(Error::Dimension(format!(
                "cover is {}x{}, matrix is {}x{}",
                self.rows,
                self.cols,
                m.rows(),
                m.cols()
            )));
        }
        let mut covered = BitSet::new(m.cells());
        for (k, r) in self.rectangles.iter().enumerate() {
            if !r.is_monochromatic_in(m) {
                return Err(Error::Domain(format!("rectangle {k} is not monochromatic")));
            }
            covered.union_with(&r.cell_set(m.cols()));
        }
        if covered.count() != m.cells() {
            return Err(Error::Domain(format!(
                "cover misses {} cells",
                m.cells() - covered.count()
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        self.rectangles
            .iter()
            .map(|r| r.to_line() + "\n")
            .collect()
    }

    /// Parses one rectangle per line over a matrix of the given dimensions.
    pub fn parse(text: &str, rows: usize, cols: usize) -> Result<Self> {
        let mut rectangles = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut color = None;
            let mut rs = None;
            let mut cs = None;
            for tok in line.split_whitespace() {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| parse_err(ln + 1, format!("bad token `{tok}`")))?;
                match k {
                    "color" => {
                        color = if v == "-" {
                            None
                        } else {
                            Some(v.parse().map_err(|_| parse_err(ln + 1, "bad color"))?)
                        }
                    }
                    "rows" => rs = Some(parse_index_list(v, rows, ln + 1)?),
                    "cols" => cs = Some(parse_index_list(v, cols, ln + 1)?),
                    _ => return Err(parse_err(ln + 1, format!("unknown key `{k}`"))),
                }
            }
            match (rs, cs) {
                (Some(r), Some(c)) => rectangles.push(Rectangle::new(r, c, color)),
                _ => return Err(parse_err(ln + 1, "rectangle needs rows= and cols=")),
            }
        }
        Ok(Self {
            rows,
            cols,
            rectangles,
        })
    }

    /// Rectangles intersected with the given rows and columns, re-indexed to
    /// positions within them; empty intersections are dropped.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> RectCover {
        let rectangles = self
            .rectangles
            .iter()
            .filter_map(|r| {
                let rs = BitSet::from_indices(
                    rows.len(),
                    rows.iter().enumerate().filter(|(_, &x)| r.rows.contains(x)).map(|(i, _)| i),
                );
                let cs = BitSet::from_indices(
                    cols.len(),
                    cols.iter().enumerate().filter(|(_, &y)| r.cols.contains(y)).map(|(i, _)| i),
                );
                (!rs.is_empty() && !cs.is_empty()).then(|| Rectangle::new(rs, cs, r.color))
            })
            .collect();
        RectCover {
            rows: rows.len(),
            cols: cols.len(),
            rectangles,
        }
    }
}

pub(crate) fn parse_index_list(v: &str, len: usize, line: usize) -> Result<BitSet> {
    let mut s = BitSet::new(len);
    if v.is_empty() {
        return Ok(s);
    }
    for t in v.split(',') {
        let i: usize = t
            .parse()
            .map_err(|_| parse_err(line, format!("bad index `{t}`")))?;
        if i >= len {
            return Err(parse_err(line, format!("index {i} out of range {len}")));
        }
        s.insert(i);
    }
    Ok(s)
}

/// All inclusion-maximal monochromatic rectangles, sorted canonically.
///
/// For each color the closed column sets are exactly the nonempty
/// intersections of row neighbourhoods; each yields one maximal rectangle.
pub fn enumerate_maximal_mono_rectangles(m: &GadgetMatrix) -> Vec<Rectangle> {
    enumerate_bounded(m, usize::MAX).expect("unbounded enumeration cannot fail")
}

pub(crate) fn enumerate_bounded(m: &GadgetMatrix, limit: usize) -> Result<Vec<Rectangle>> {
    let mut out = Vec::new();
    let mut found = 0;
    for c in m.colors() {
        let nbhd = color_neighbourhoods(m, c);
        let rects = maximal_ones(&nbhd, limit, &mut found).ok_or(Error::Budget {
            what: "maximal rectangles",
            needed: found as u128,
            limit: limit as u128,
        })?;
        out.extend(rects.into_iter().map(|(rs, cs)| Rectangle::new(rs, cs, Some(c))));
    }
    out.sort();
    Ok(out)
}

fn color_neighbourhoods(m: &GadgetMatrix, c: u32) -> Vec<BitSet> {
    (0..m.rows())
        .map(|x| BitSet::from_indices(m.cols(), (0..m.cols()).filter(|&y| m.get(x, y) == c)))
        .collect()
}

/// Maximal all-ones rectangles of the 0/1 matrix with row neighbourhoods
/// `nbhd`, or `None` once `found` passes `limit`.
fn maximal_ones(nbhd: &[BitSet], limit: usize, found: &mut usize) -> Option<Vec<(BitSet, BitSet)>> {
    let mut family: HashSet<BitSet> = HashSet::new();
    let mut order: Vec<BitSet> = Vec::new();
    for n in nbhd.iter().filter(|n| !n.is_empty()) {
        let mut fresh = vec![n.clone()];
        for b in &order {
            let i = b.intersection(n);
            if !i.is_empty() {
                fresh.push(i);
            }
        }
        for s in fresh {
            if family.insert(s.clone()) {
                order.push(s);
                *found += 1;
                if *found > limit {
                    return None;
                }
            }
        }
    }
    let rows = nbhd.len();
    Some(
        order
            .into_iter()
            .map(|b| (BitSet::from_indices(rows, (0..rows).filter(|&x| b.is_subset(&nbhd[x]))), b))
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMode {
    Exact,
    Greedy,
}

#[derive(Clone, Debug)]
pub struct CoverResult {
    pub size: usize,
    pub cover: RectCover,
    /// True when `size` is the cover number; false for greedy mode or an
    /// exhausted search budget, where `size` is only an upper bound.
    pub exact: bool,
    pub lower_bound: usize,
    pub nodes: u64,
}

/// Cover number, or a greedy upper bound.
///
/// The problem splits into one set-cover instance per color. Within a color,
/// rows (then columns) with equal neighbourhoods are merged and the
/// row-column incidence graph is cut into connected components; every
/// monochromatic rectangle lives inside one component, so the pieces are
/// solved independently by branch-and-bound over maximal rectangles.
pub fn cover_number(m: &GadgetMatrix, mode: CoverMode, budget: &Budget) -> Result<CoverResult> {
    if mode == CoverMode::Exact && m.cells() as u64 > budget.cells {
        return Err(Error::Budget {
            what: "exact cover cells (use greedy mode)",
            needed: m.cells() as u128,
            limit: budget.cells as u128,
        });
    }
    let mut state = SearchState {
        nodes: 0,
        limit: budget.nodes,
        rects_found: 0,
        rect_limit: budget.nodes.max(1) as usize,
        aborted: false,
    };
    let mut rectangles = Vec::new();
    let mut lower = 0;
    for c in m.colors() {
        for piece in color_pieces(m, c) {
            let (picked, lb) = solve_piece(&piece.nbhd, mode, &mut state);
            lower += lb;
            for (rs, cs) in picked {
                let rows = BitSet::from_indices(m.rows(), rs.iter().flat_map(|i| piece.rows[i].iter().copied()));
                let cols = BitSet::from_indices(m.cols(), cs.iter().flat_map(|j| piece.cols[j].iter().copied()));
                rectangles.push(Rectangle::new(rows, cols, Some(c)));
            }
        }
    }
    rectangles.sort();
    let exact = mode == CoverMode::Exact && !state.aborted;
    Ok(CoverResult {
        size: rectangles.len(),
        lower_bound: if exact { rectangles.len() } else { lower },
        cover: RectCover {
            rows: m.rows(),
            cols: m.cols(),
            rectangles,
        },
        exact,
        nodes: state.nodes,
    })
}

/// One connected component of the merged incidence graph of a color.
struct Piece {
    /// Original rows of each merged row.
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
    /// Neighbourhood of each merged row over the merged columns.
    nbhd: Vec<BitSet>,
}

fn color_pieces(m: &GadgetMatrix, c: u32) -> Vec<Piece> {
    let nbhd = color_neighbourhoods(m, c);
    let mut row_classes: Vec<(BitSet, Vec<usize>)> = Vec::new();
    let mut seen: HashMap<BitSet, usize> = HashMap::new();
    for (x, n) in nbhd.iter().enumerate().filter(|(_, n)| !n.is_empty()) {
        match seen.get(n) {
            Some(&k) => row_classes[k].1.push(x),
            None => {
                seen.insert(n.clone(), row_classes.len());
                row_classes.push((n.clone(), vec![x]));
            }
        }
    }
    let nr = row_classes.len();
    let mut col_classes: Vec<(BitSet, Vec<usize>)> = Vec::new();
    let mut seen: HashMap<BitSet, usize> = HashMap::new();
    for y in 0..m.cols() {
        let key = BitSet::from_indices(nr, (0..nr).filter(|&i| row_classes[i].0.contains(y)));
        if key.is_empty() {
            continue;
        }
        match seen.get(&key) {
            Some(&k) => col_classes[k].1.push(y),
            None => {
                seen.insert(key.clone(), col_classes.len());
                col_classes.push((key, vec![y]));
            }
        }
    }
    // Components over merged rows 0..nr and merged columns nr.. .
    let nc = col_classes.len();
    let mut parent: Vec<usize> = (0..nr + nc).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    for (j, (key, _)) in col_classes.iter().enumerate() {
        for i in key.iter() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, nr + j));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut pieces: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    for v in 0..nr + nc {
        let r = find(&mut parent, v);
        let k = match pieces.iter().position(|p| p.0 == r) {
            Some(k) => k,
            None => {
                pieces.push((r, Vec::new(), Vec::new()));
                pieces.len() - 1
            }
        };
        if v < nr {
            pieces[k].1.push(v);
        } else {
            pieces[k].2.push(v - nr);
        }
    }
    pieces
        .into_iter()
        .map(|(_, ri, cj)| Piece {
            nbhd: ri
                .iter()
                .map(|&i| BitSet::from_indices(cj.len(), (0..cj.len()).filter(|&l| col_classes[cj[l]].0.contains(i))))
                .collect(),
            rows: ri.iter().map(|&i| row_classes[i].1.clone()).collect(),
            cols: cj.iter().map(|&j| col_classes[j].1.clone()).collect(),
        })
        .collect()
}

struct SearchState {
    nodes: u64,
    limit: u64,
    rects_found: usize,
    rect_limit: usize,
    aborted: bool,
}

/// Cover of the ones of `nbhd` and a lower bound on its size.
fn solve_piece(nbhd: &[BitSet], mode: CoverMode, state: &mut SearchState) -> (Vec<(BitSet, BitSet)>, usize) {
    let (nr, nc) = (nbhd.len(), nbhd[0].len());
    let ones = BitSet::from_indices(nr * nc, (0..nr).flat_map(|i| nbhd[i].iter().map(move |j| i * nc + j)));
    let Some(rects) = maximal_ones(nbhd, state.rect_limit, &mut state.rects_found) else {
        // Too many rectangles: one per merged row, against a fooling set.
        state.aborted = true;
        let rows = nbhd.iter().enumerate().map(|(i, n)| (BitSet::from_indices(nr, [i]), n.clone())).collect();
        return (rows, fooling_set(nbhd, &ones));
    };
    let cells: Vec<BitSet> = rects
        .iter()
        .map(|(rs, cs)| BitSet::from_indices(nr * nc, rs.iter().flat_map(|i| cs.iter().map(move |j| i * nc + j))))
        .collect();
    let mut cell_rects: Vec<Vec<u32>> = vec![Vec::new(); nr * nc];
    for (k, s) in cells.iter().enumerate() {
        for c in s.iter() {
            cell_rects[c].push(k as u32);
        }
    }
    let greedy = greedy_cover(&cells, &ones);
    let none = BitSet::new(cells.len());
    let lb0 = packing_bound(&ones, &cell_rects, &cells, &none);
    let chosen = if mode == CoverMode::Greedy || greedy.len() <= lb0 {
        greedy
    } else if state.aborted {
        return (greedy.iter().map(|&k| rects[k].clone()).collect(), lb0);
    } else {
        let mut search = CoverSearch {
            cells: &cells,
            cell_rects: &cell_rects,
            best: greedy,
            state,
        };
        search.run(&ones, &none, &mut Vec::new());
        if search.state.aborted {
            return (search.best.iter().map(|&k| rects[k].clone()).collect(), lb0);
        }
        search.best
    };
    let lb = if mode == CoverMode::Exact { chosen.len() } else { lb0 };
    (chosen.iter().map(|&k| rects[k].clone()).collect(), lb)
}

/// Greedy set of ones no two of which lie in a common all-ones rectangle.
fn fooling_set(nbhd: &[BitSet], ones: &BitSet) -> usize {
    let nc = nbhd[0].len();
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    for c in ones.iter() {
        let (x, y) = (c / nc, c % nc);
        if chosen.iter().all(|&(a, b)| !(nbhd[x].contains(b) && nbhd[a].contains(y))) {
            chosen.push((x, y));
        }
    }
    chosen.len()
}

fn greedy_cover(cells: &[BitSet], target: &BitSet) -> Vec<usize> {
    let mut uncovered = target.clone();
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let (k, _) = cells
            .iter()
            .enumerate()
            .map(|(k, s)| (k, s.intersection_count(&uncovered)))
            .fold((usize::MAX, 0), |best, cur| if cur.1 > best.1 { cur } else { best });
        uncovered.difference_with(&cells[k]);
        chosen.push(k);
    }
    chosen
}

/// Size of a greedily built set of uncovered cells no two of which share an
/// allowed rectangle; every cover from the allowed ones needs one rectangle
/// per such cell.
fn packing_bound(uncovered: &BitSet, cell_rects: &[Vec<u32>], cells: &[BitSet], banned: &BitSet) -> usize {
    let mut cand = uncovered.clone();
    let mut count = 0;
    while let Some((e, _)) = fewest_rects(&cand, cell_rects, banned) {
        count += 1;
        for &k in cell_rects[e].iter().filter(|&&k| !banned.contains(k as usize)) {
            cand.difference_with(&cells[k as usize]);
        }
    }
    count
}

/// Cell of `set` contained in the fewest allowed rectangles, with that count.
fn fewest_rects(set: &BitSet, cell_rects: &[Vec<u32>], banned: &BitSet) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for c in set.iter() {
        let n = cell_rects[c].iter().filter(|&&k| !banned.contains(k as usize)).count();
        if best.is_none_or(|b| n < b.1) {
            best = Some((c, n));
            if n == 0 {
                break;
            }
        }
    }
    best
}

struct CoverSearch<'a> {
    cells: &'a [BitSet],
    cell_rects: &'a [Vec<u32>],
    best: Vec<usize>,
    state: &'a mut SearchState,
}

impl CoverSearch<'_> {
    /// Branches on the uncovered cell with the fewest allowed rectangles.
    /// After a rectangle's branch is explored it is banned for its siblings.
    fn run(&mut self, uncovered: &BitSet, banned: &BitSet, stack: &mut Vec<usize>) {
        if self.state.aborted {
            return;
        }
        self.state.nodes += 1;
        if self.state.nodes > self.state.limit {
            self.state.aborted = true;
            return;
        }
        let Some((e, n)) = fewest_rects(uncovered, self.cell_rects, banned) else {
            if stack.len() < self.best.len() {
                self.best = stack.clone();
            }
            return;
        };
        if n == 0 {
            return;
        }
        let lb = packing_bound(uncovered, self.cell_rects, self.cells, banned);
        if stack.len() + lb >= self.best.len() {
            return;
        }
        let mut options: Vec<(usize, usize)> = self.cell_rects[e]
            .iter()
            .filter(|&&k| !banned.contains(k as usize))
            .map(|&k| (k as usize, self.cells[k as usize].intersection_count(uncovered)))
            .collect();
        options.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut banned = banned.clone();
        for (k, _) in options {
            stack.push(k);
            self.run(&uncovered.difference(&self.cells[k]), &banned, stack);
            stack.pop();
            if self.state.aborted || stack.len() + lb >= self.best.len() {
                return;
            }
            banned.insert(k);
        }
    }
}

/// A monochromatic rectangle of maximum area, first in canonical order among
/// ties, with its exact density.
pub fn max_density_mono_rectangle(m: &GadgetMatrix) -> (Rectangle, Rational) {
    let rects = enumerate_maximal_mono_rectangles(m);
    let best = rects
        .into_iter()
        .fold(None::<Rectangle>, |best, r| match best {
            Some(b) if b.area() >= r.area() => Some(b),
            _ => Some(r),
        })
        .expect("a nonempty matrix has a monochromatic cell");
    let d = best.density();
    (best, d)
}

/// The biased-regime rectangle `E^c × G` when one color `c` fills more than a
/// `1 − 1/(4·rk)` fraction of `m` (rank over `field`).
pub fn biased_rectangle(m: &GadgetMatrix) -> Result<Rectangle> {
    biased_rectangle_in(m, RankField::Rational)
}

pub fn biased_rectangle_in(m: &GadgetMatrix, field: RankField) -> Result<Rectangle> {
    let rk = m.rank_in(field)?;
    let cells = m.cells();
    let color = biased_color(m, rk)?.ok_or(Error::NotBiased)?;
    // E: rows whose minority share is at least 1/(2 rk).
    let light: Vec<usize> = (0..m.rows())
        .filter(|&x| {
            let minority = m.row(x).iter().filter(|&&v| v != color).count();
            2 * rk.max(1) * minority < m.cols()
        })
        .collect();
    let dense = m.dense_rows(&light, &(0..m.cols()).collect::<Vec<_>>());
    let basis: Vec<usize> = field
        .independent_subset(&dense)
        .into_iter()
        .map(|i| light[i])
        .collect();
    let good = BitSet::from_indices(
        m.cols(),
        (0..m.cols()).filter(|&y| basis.iter().all(|&x| m.get(x, y) == color)),
    );
    let rect = Rectangle::new(BitSet::from_indices(m.rows(), light), good, Some(color));
    if !rect.is_monochromatic_in(m) {
        return Err(Error::Invariant(format!(
            "biased construction produced a non-monochromatic rectangle ({} cells)",
            cells
        )));
    }
    Ok(rect)
}

/// The color `c` with `Pr[M = c] > 1 − 1/(4·rk)`, if any. Boundary equality
/// is not biased.
pub fn biased_color(m: &GadgetMatrix, rk: usize) -> Result<Option<u32>> {
    if !m.is_boolean() {
        return Err(Error::Domain("biased regime needs a Boolean matrix".into()));
    }
    let four_rk = 4 * rk.max(1);
    let cells = m.cells();
    Ok([1u32, 0]
        .into_iter()
        .find(|&c| four_rk * m.count_symbol(c) > (four_rk - 1) * cells))
}

/// Exact test of `density ≥ 2^{−2T/s}·(4·rk)^{−2}` with `2^T = cover_size`,
/// as `density^s · N² · (4·rk)^{2s} ≥ 1`.
pub fn density_bound_holds(density: &Rational, cover_size: u64, s: usize, rk: usize) -> Result<bool> {
    if cover_size == 0 || s == 0 || rk == 0 {
        return Err(Error::Domain(format!(
            "density bound needs positive parameters (N={cover_size}, s={s}, rk={rk})"
        )));
    }
    let lhs: Rational = Pow::pow(density.clone(), s)
        * Rational::from_integer(Pow::pow(BigInt::from(cover_size), 2u32))
        * Rational::from_integer(Pow::pow(BigInt::from(4 * rk), 2 * s));
    Ok(lhs >= Rational::one())
}

/// Lower bound `2^{−2T/s}·(4·rk)^{−2}` as a float, for reports only.
pub fn density_bound_value(cover_size: u64, s: usize, rk: usize) -> f64 {
    (cover_size as f64).powf(-2.0 / s as f64) / (16.0 * (rk * rk) as f64)
}
