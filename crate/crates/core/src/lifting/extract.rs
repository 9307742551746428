//! Dense monochromatic rectangles of `g` from a rectangle cover of `f∘g`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use serde::Serialize;

use super::distribution::build_lifted_distribution;
use crate::bitset::{join_indices, BitSet};
use crate::boolfn::TruthTable;
use crate::error::{parse_err, Error, Result};
use crate::gadget::{Budget, GadgetMatrix, RankField};
use crate::info::{entropy, FiniteDistribution};
use crate::rectcover::{biased_color, biased_rectangle_in, density_bound_holds, RectCover, Rectangle};
use crate::Rational;

/// Slack on entropy comparisons. The chosen rectangle is re-verified exactly,
/// so the slack only affects which candidate is taken.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Biased,
    Balanced,
}

/// One conditioned variable: `x` or `y` at an original coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conditioned {
    pub var: char,
    pub coordinate: usize,
    pub value: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtractionTrace {
    pub regime: Regime,
    pub field: RankField,
    pub rank: usize,
    pub cover_size: u64,
    pub s: usize,
    pub z: Vec<bool>,
    pub sensitive: Vec<usize>,
    /// `order[k]` is the original coordinate placed at position `k`; the
    /// sensitive coordinates come first.
    pub order: Vec<usize>,
    pub rect_index: Option<usize>,
    /// `p(R)` as an exact fraction.
    pub rect_mass: Option<String>,
    pub position: Option<usize>,
    pub coordinate: Option<usize>,
    pub conditioning: Vec<Conditioned>,
    pub entropy_x: Option<f64>,
    pub entropy_y: Option<f64>,
    pub threshold: Option<f64>,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub color: u32,
    pub density: String,
    pub bound_holds: bool,
}

impl ExtractionTrace {
    /// Line-oriented dump, one `key=value` pair per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let bits: String = self.z.iter().map(|&b| if b { '1' } else { '0' }).collect();
        let opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
        let optf = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.12}"));
        let _ = writeln!(s, "regime={:?}", self.regime);
        let _ = writeln!(s, "field={}", self.field.name());
        let _ = writeln!(s, "rank={}", self.rank);
        let _ = writeln!(s, "cover_size={}", self.cover_size);
        let _ = writeln!(s, "s={}", self.s);
        let _ = writeln!(s, "z={bits}");
        let _ = writeln!(s, "sensitive={}", join_indices(self.sensitive.iter().copied()));
        let _ = writeln!(s, "order={}", join_indices(self.order.iter().copied()));
        let _ = writeln!(s, "rect_index={}", opt(self.rect_index));
        let _ = writeln!(s, "rect_mass={}", self.rect_mass.as_deref().unwrap_or("-"));
        let _ = writeln!(s, "position={}", opt(self.position));
        let _ = writeln!(s, "coordinate={}", opt(self.coordinate));
        let cond: Vec<String> = self
            .conditioning
            .iter()
            .map(|c| format!("{}{}:{}", c.var, c.coordinate, c.value))
            .collect();
        let _ = writeln!(s, "conditioning={}", cond.join(","));
        let _ = writeln!(s, "entropy_x={}", optf(self.entropy_x));
        let _ = writeln!(s, "entropy_y={}", optf(self.entropy_y));
        let _ = writeln!(s, "threshold={}", optf(self.threshold));
        let _ = writeln!(s, "rows={}", join_indices(self.rows.iter().copied()));
        let _ = writeln!(s, "cols={}", join_indices(self.cols.iter().copied()));
        let _ = writeln!(s, "color={}", self.color);
        let _ = writeln!(s, "density={}", self.density);
        let _ = writeln!(s, "bound_holds={}", self.bound_holds);
        s
    }

    /// Reads a dump written by [`ExtractionTrace::to_text`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (k, v) = line.split_once('=').ok_or_else(|| parse_err(i + 1, "expected key=value"))?;
            kv.insert(k, (i + 1, v));
        }
        let get = |k: &str| kv.get(k).copied().ok_or_else(|| parse_err(0, format!("missing `{k}`")));
        let num = |k: &str| -> Result<usize> {
            let (l, v) = get(k)?;
            v.parse().map_err(|_| parse_err(l, format!("bad number `{v}`")))
        };
        let opt = |k: &str| -> Result<Option<usize>> {
            let (l, v) = get(k)?;
            if v == "-" { Ok(None) } else { v.parse().map(Some).map_err(|_| parse_err(l, format!("bad number `{v}`"))) }
        };
        let optf = |k: &str| -> Result<Option<f64>> {
            let (l, v) = get(k)?;
            if v == "-" { Ok(None) } else { v.parse().map(Some).map_err(|_| parse_err(l, format!("bad float `{v}`"))) }
        };
        let list = |k: &str| -> Result<Vec<usize>> {
            let (l, v) = get(k)?;
            v.split(',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| parse_err(l, format!("bad index `{t}`"))))
                .collect()
        };
        let flag = |k: &str| -> Result<bool> {
            let (l, v) = get(k)?;
            v.parse().map_err(|_| parse_err(l, format!("bad flag `{v}`")))
        };
        let (l, regime) = get("regime")?;
        let regime = match regime {
            "Biased" => Regime::Biased,
            "Balanced" => Regime::Balanced,
            _ => return Err(parse_err(l, format!("bad regime `{regime}`"))),
        };
        let (l, field) = get("field")?;
        let field = match field {
            "Q" => RankField::Rational,
            "F2" => RankField::Gf2,
            _ => return Err(parse_err(l, format!("bad field `{field}`"))),
        };
        let (l, z) = get("z")?;
        let z = z
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(parse_err(l, format!("bad bit `{c}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let (l, cond) = get("conditioning")?;
        let conditioning = cond
            .split(',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                let bad = || parse_err(l, format!("bad conditioning `{t}`"));
                let var = t.chars().next().filter(|c| matches!(c, 'x' | 'y')).ok_or_else(bad)?;
                let (i, v) = t[1..].split_once(':').ok_or_else(bad)?;
                Ok(Conditioned { var, coordinate: i.parse().map_err(|_| bad())?, value: v.parse().map_err(|_| bad())? })
            })
            .collect::<Result<Vec<_>>>()?;
        let (_, mass) = get("rect_mass")?;
        Ok(ExtractionTrace {
            regime,
            field,
            rank: num("rank")?,
            cover_size: num("cover_size")? as u64,
            s: num("s")?,
            z,
            sensitive: list("sensitive")?,
            order: list("order")?,
            rect_index: opt("rect_index")?,
            rect_mass: (mass != "-").then(|| mass.to_string()),
            position: opt("position")?,
            coordinate: opt("coordinate")?,
            conditioning,
            entropy_x: optf("entropy_x")?,
            entropy_y: optf("entropy_y")?,
            threshold: optf("threshold")?,
            rows: list("rows")?,
            cols: list("cols")?,
            color: num("color")? as u32,
            density: get("density")?.1.to_string(),
            bound_holds: flag("bound_holds")?,
        })
    }
}

/// Regime of `g` for rank `rk`.
pub fn regime_of(g: &GadgetMatrix, rk: usize) -> Result<Regime> {
    Ok(if biased_color(g, rk)?.is_some() { Regime::Biased } else { Regime::Balanced })
}

/// Dense rectangle of `g` from a cover of `f∘g` of size `cover.len()`, with
/// rational rank.
pub fn extract_rectangle_from_cover(
    f: &TruthTable,
    g: &GadgetMatrix,
    cover: &RectCover,
    budget: &Budget,
) -> Result<(Rectangle, ExtractionTrace)> {
    extract_with(f, g, cover, cover.len() as u64, RankField::Rational, budget)
}

/// As [`extract_rectangle_from_cover`], with the rank over `field` and an
/// explicit cover size `n_cover` (covers restricted to a submatrix keep the
/// size of the original).
pub fn extract_with(
    f: &TruthTable,
    g: &GadgetMatrix,
    cover: &RectCover,
    n_cover: u64,
    field: RankField,
    budget: &Budget,
) -> Result<(Rectangle, ExtractionTrace)> {
    let n = f.arity();
    let (cr, cc) = (pow(g.rows(), n), pow(g.cols(), n));
    if (cover.rows as u128, cover.cols as u128) != (cr, cc) {
        return Err(Error::Dimension(format!(
            "cover is {}x{}, composed matrix is {cr}x{cc}",
            cover.rows, cover.cols
        )));
    }
    if n_cover == 0 {
        return Err(Error::Domain("empty cover".into()));
    }
    let rank = g.rank_in(field)?;
    let rk = rank.max(1);
    let sp = f.sensitive_point();
    let s = sp.coords.len();
    let z: Vec<bool> = (0..n).map(|i| sp.point >> i & 1 == 1).collect();
    let mut order = sp.coords.clone();
    order.extend((0..n).filter(|i| !sp.coords.contains(i)));
    let mut trace = ExtractionTrace {
        regime: Regime::Biased,
        field,
        rank,
        cover_size: n_cover,
        s,
        z: z.clone(),
        sensitive: sp.coords.clone(),
        order: order.clone(),
        rect_index: None,
        rect_mass: None,
        position: None,
        coordinate: None,
        conditioning: Vec::new(),
        entropy_x: None,
        entropy_y: None,
        threshold: None,
        rows: Vec::new(),
        cols: Vec::new(),
        color: 0,
        density: String::new(),
        bound_holds: false,
    };
    if s == 0 {
        return Err(Error::Degenerate("f is constant, so it has no sensitive point".into()));
    }

    let rect = if regime_of(g, rk)? == Regime::Biased {
        match biased_rectangle_in(g, field) {
            Ok(r) => r,
            Err(Error::NotBiased) => unreachable!("regime checked above"),
            Err(e) => return Err(e),
        }
    } else {
        trace.regime = Regime::Balanced;
        balanced(g, cover, n_cover, rk, &z, &order, s, &mut trace, budget)?
    };

    if !rect.is_monochromatic_in(g) {
        return Err(Error::Invariant("extracted rectangle is not monochromatic".into()));
    }
    let density = rect.density();
    trace.rows = rect.rows.to_vec();
    trace.cols = rect.cols.to_vec();
    trace.color = rect.color.unwrap_or(0);
    trace.bound_holds = density_bound_holds(&density, n_cover, s, rk)?;
    trace.density = density.to_string();
    Ok((rect, trace))
}

fn pow(b: usize, n: usize) -> u128 {
    (b as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

#[allow(clippy::too_many_arguments)]
fn balanced(
    g: &GadgetMatrix,
    cover: &RectCover,
    n_cover: u64,
    rk: usize,
    z: &[bool],
    order: &[usize],
    s: usize,
    trace: &mut ExtractionTrace,
    budget: &Budget,
) -> Result<Rectangle> {
    let p = build_lifted_distribution(g, z)?;
    let pts = p.support_points(budget)?;
    let total = pts.len();
    let idx: Vec<(usize, usize)> = pts.iter().map(|(xs, ys)| p.composed_index(xs, ys)).collect();

    // First rectangle in canonical order with p(R) ≥ 1/N.
    let mut by_order: Vec<usize> = (0..cover.len()).collect();
    by_order.sort_by(|&a, &b| cover.rectangles[a].cmp(&cover.rectangles[b]));
    let (ri, inside) = by_order
        .into_iter()
        .find_map(|k| {
            let r = &cover.rectangles[k];
            let inside: Vec<usize> = (0..total).filter(|&t| r.contains(idx[t].0, idx[t].1)).collect();
            (inside.len() as u128 * n_cover as u128 >= total as u128).then_some((k, inside))
        })
        .ok_or_else(|| Error::Invariant("no cover rectangle has p-mass at least 1/N".into()))?;
    trace.rect_index = Some(ri);
    trace.rect_mass = Some(Rational::new(BigInt::from(inside.len()), BigInt::from(total)).to_string());

    let threshold = ((g.rows() * g.cols()) as f64).log2()
        - 2.0 * ((4 * rk) as f64).log2()
        - 2.0 * (n_cover as f64).log2() / s as f64;
    trace.threshold = Some(threshold);
    let n = z.len();
    // p(·|R) is uniform on R ∩ supp(p), so each conditional law is uniform
    // on the points sharing the conditioning values.
    for k in 0..s {
        let i = order[k];
        let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for &t in &inside {
            let (xs, ys) = &pts[t];
            let key: Vec<usize> = (0..k)
                .map(|j| xs[order[j]])
                .chain((s..n).map(|j| xs[order[j]]))
                .chain((k + 1..n).map(|j| ys[order[j]]))
                .collect();
            groups.entry(key).or_default().push(t);
        }
        for (key, members) in groups {
            let hx = marginal_entropy(members.iter().map(|&t| pts[t].0[i]));
            let hy = marginal_entropy(members.iter().map(|&t| pts[t].1[i]));
            if hx + hy < threshold - ENTROPY_TOLERANCE {
                continue;
            }
            let a = BitSet::from_indices(g.rows(), members.iter().map(|&t| pts[t].0[i]));
            let b = BitSet::from_indices(g.cols(), members.iter().map(|&t| pts[t].1[i]));
            trace.position = Some(k);
            trace.coordinate = Some(i);
            trace.entropy_x = Some(hx);
            trace.entropy_y = Some(hy);
            let mut vals = key.into_iter();
            trace.conditioning = (0..k)
                .map(|j| ('x', order[j]))
                .chain((s..n).map(|j| ('x', order[j])))
                .chain((k + 1..n).map(|j| ('y', order[j])))
                .map(|(var, coordinate)| Conditioned { var, coordinate, value: vals.next().unwrap() })
                .collect();
            return Ok(Rectangle::new(a, b, Some(z[i] as u32)));
        }
    }
    Err(Error::Invariant(
        "no index and conditioning meet the averaging bound".into(),
    ))
}

fn marginal_entropy(values: impl Iterator<Item = usize>) -> f64 {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    entropy(&FiniteDistribution::from_weights(counts.into_iter().collect()).expect("nonempty group"))
}
