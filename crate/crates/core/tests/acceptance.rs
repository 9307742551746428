//! One line per acceptance criterion. Every derived quantity is recomputed
//! here by a brute-force oracle that shares no code with the library beyond
//! the input types.

use std::collections::HashMap;
use std::str::FromStr;
use std::time::{Duration, Instant};

use liftlab::corpus::Corpus;
use liftlab::gadget::{compose, make_gadget, GadgetSpec, RankField};
use liftlab::info::{conditional_entropy, entropy, kl_divergence, random_distribution, random_joint, FiniteDistribution};
use liftlab::lifting::{bs_reduction, synthesize_protocol, SynthesisOptions};
use liftlab::protocol::{exact_cc, random_tree, rebalance};
use liftlab::rectcover::{cover_number, CoverMode};
use liftlab::suite::{relation_functions, run_suite, Report, SuiteConfig, SuiteName};
use liftlab::{CheckStatus, GadgetMatrix, Rational, TruthTable};
use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RELATIONS_LIMIT: Duration = Duration::from_secs(60);
const LEMMA3_LIMIT: Duration = Duration::from_secs(600);
const INFO_TOLERANCE: f64 = 1e-9;

// ------------------------------------------------------------------ oracles

fn bit(z: usize, i: usize) -> bool {
    z >> i & 1 == 1
}

fn o_sensitivity(f: &TruthTable) -> usize {
    let n = f.arity();
    (0..1usize << n)
        .map(|z| (0..n).filter(|&i| f.eval(z) != f.eval(z ^ 1 << i)).count())
        .max()
        .unwrap_or(0)
}

fn max_disjoint(blocks: &[usize], used: usize) -> usize {
    let mut best = 0;
    for (k, &b) in blocks.iter().enumerate() {
        if b & used == 0 {
            best = best.max(1 + max_disjoint(&blocks[k + 1..], used | b));
        }
    }
    best
}

fn o_block_sensitivity(f: &TruthTable) -> usize {
    let n = f.arity();
    (0..1usize << n)
        .map(|z| {
            let blocks: Vec<usize> = (1..1usize << n).filter(|&b| f.eval(z) != f.eval(z ^ b)).collect();
            max_disjoint(&blocks, 0)
        })
        .max()
        .unwrap_or(0)
}

/// Fourier degree, which equals the real polynomial degree on the cube.
fn o_degree(f: &TruthTable) -> usize {
    let n = f.arity();
    (0..1usize << n)
        .filter(|&s| {
            let sum: i64 = (0..1usize << n)
                .map(|z| {
                    let sign = if (s & z).count_ones() % 2 == 0 { 1 } else { -1 };
                    if f.eval(z) {
                        sign
                    } else {
                        0
                    }
                })
                .sum();
            sum != 0 && s != 0
        })
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn o_dt(f: &TruthTable, fixed: usize, vals: usize) -> usize {
    let n = f.arity();
    let points: Vec<usize> = (0..1usize << n).filter(|z| z & fixed == vals).collect();
    if points.iter().all(|&z| f.eval(z) == f.eval(points[0])) {
        return 0;
    }
    (0..n)
        .filter(|&i| !bit(fixed, i))
        .map(|i| 1 + o_dt(f, fixed | 1 << i, vals).max(o_dt(f, fixed | 1 << i, vals | 1 << i)))
        .min()
        .unwrap()
}

fn o_digits(mut v: usize, base: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let d = v % base;
            v /= base;
            d
        })
        .collect()
}

fn o_compose(f: &TruthTable, g: &GadgetMatrix) -> Vec<Vec<u32>> {
    let n = f.arity();
    let rows = g.rows().pow(n as u32);
    let cols = g.cols().pow(n as u32);
    (0..rows)
        .map(|r| {
            let xs = o_digits(r, g.rows(), n);
            (0..cols)
                .map(|c| {
                    let ys = o_digits(c, g.cols(), n);
                    let z = (0..n).fold(0, |z, i| z | (g.get(xs[i], ys[i]) as usize) << i);
                    u32::from(f.eval(z))
                })
                .collect()
        })
        .collect()
}

fn o_rank(m: &[Vec<u32>]) -> usize {
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .map(|r| r.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect())
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, p);
        let pivot = a[rank][c].clone();
        for r in 0..a.len() {
            if r != rank && !a[r][c].is_zero() {
                let factor = &a[r][c] / &pivot;
                for k in c..cols {
                    let d = &factor * &a[rank][k];
                    a[r][k] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gadget_rows(g: &GadgetMatrix) -> Vec<Vec<u32>> {
    (0..g.rows()).map(|x| (0..g.cols()).map(|y| g.get(x, y)).collect()).collect()
}

fn mono(m: &[Vec<u32>], rows: usize, cols: usize) -> Option<u32> {
    let mut color = None;
    for (_, row) in m.iter().enumerate().filter(|(x, _)| bit(rows, *x)) {
        for (y, &v) in row.iter().enumerate() {
            if bit(cols, y) {
                match color {
                    None => color = Some(v),
                    Some(c) if c != v => return None,
                    _ => {}
                }
            }
        }
    }
    color
}

/// Largest `|A||B|` over monochromatic `A × B`, by brute force.
fn o_max_area(m: &[Vec<u32>]) -> usize {
    let (r, c) = (m.len(), m[0].len());
    let mut best = 0;
    for rows in 1..1usize << r {
        for cols in 1..1usize << c {
            if mono(m, rows, cols).is_some() {
                best = best.max((rows.count_ones() * cols.count_ones()) as usize);
            }
        }
    }
    best
}

/// Minimum monochromatic cover by iterative deepening over maximal
/// rectangles, branching on the first uncovered cell.
fn o_cover(m: &[Vec<u32>]) -> usize {
    let (r, c) = (m.len(), m[0].len());
    let mut rects: Vec<(u128, u128)> = Vec::new();
    for rows in 1..1u128 << r {
        let rows_v: Vec<usize> = (0..r).filter(|&x| rows >> x & 1 == 1).collect();
        for color in [0u32, 1] {
            let cols: u128 = (0..c)
                .filter(|&y| rows_v.iter().all(|&x| m[x][y] == color))
                .fold(0, |s, y| s | 1 << y);
            if cols == 0 {
                continue;
            }
            let closure: u128 = (0..r)
                .filter(|&x| (0..c).filter(|&y| cols >> y & 1 == 1).all(|y| m[x][y] == color))
                .fold(0, |s, x| s | 1 << x);
            if closure == rows {
                rects.push((rows, cols));
            }
        }
    }
    let cells: Vec<(usize, usize)> = (0..r).flat_map(|x| (0..c).map(move |y| (x, y))).collect();
    fn go(k: usize, covered: &mut Vec<bool>, cells: &[(usize, usize)], rects: &[(u128, u128)]) -> bool {
        let Some(i) = covered.iter().position(|&b| !b) else { return true };
        if k == 0 {
            return false;
        }
        let (x, y) = cells[i];
        for &(rs, cs) in rects.iter().filter(|(rs, cs)| rs >> x & 1 == 1 && cs >> y & 1 == 1) {
            let before = covered.clone();
            for (j, &(a, b)) in cells.iter().enumerate() {
                if rs >> a & 1 == 1 && cs >> b & 1 == 1 {
                    covered[j] = true;
                }
            }
            if go(k - 1, covered, cells, rects) {
                return true;
            }
            *covered = before;
        }
        false
    }
    (1..).find(|&k| go(k, &mut vec![false; cells.len()], &cells, &rects)).unwrap()
}

/// Deterministic communication complexity by exhaustive partition search.
fn o_cc(m: &[Vec<u32>]) -> usize {
    fn go(m: &[Vec<u32>], rows: usize, cols: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if mono(m, rows, cols).is_some() {
            return 0;
        }
        if let Some(&v) = memo.get(&(rows, cols)) {
            return v;
        }
        let mut best = usize::MAX;
        let mut sub = (rows - 1) & rows;
        while sub > 0 {
            best = best.min(1 + go(m, sub, cols, memo).max(go(m, rows & !sub, cols, memo)));
            sub = (sub - 1) & rows;
        }
        let mut sub = (cols - 1) & cols;
        while sub > 0 {
            best = best.min(1 + go(m, rows, sub, memo).max(go(m, rows, cols & !sub, memo)));
            sub = (sub - 1) & cols;
        }
        memo.insert((rows, cols), best);
        best
    }
    go(m, (1 << m.len()) - 1, (1 << m[0].len()) - 1, &mut HashMap::new())
}

fn o_ceil_log2(v: usize) -> usize {
    (0..).find(|&k| 1usize << k >= v).unwrap()
}

/// `a^s · N² · (4rk)^{2s} ≥ b^s` for density `a/b`.
fn o_density_bound(density: &Rational, n: u64, s: usize, rk: usize) -> bool {
    let lhs = Pow::pow(density.numer().clone(), s) * BigInt::from(n).pow(2u32) * BigInt::from(4 * rk).pow(2 * s as u32);
    lhs >= Pow::pow(density.denom().clone(), s)
}

/// Smallest `d` with `(3/2)^d ≥ ℓ²`.
fn o_rebalance_bound(leaves: usize) -> usize {
    let l2 = BigInt::from(leaves).pow(2u32);
    (0u32..).find(|&d| BigInt::from(3).pow(d) >= &l2 * BigInt::from(2).pow(d)).unwrap() as usize
}

fn o_log2(q: &Rational) -> f64 {
    q.numer().to_f64().unwrap().log2() - q.denom().to_f64().unwrap().log2()
}

fn o_entropy<L>(p: &FiniteDistribution<L>) -> f64
where
    L: Clone + Eq + std::hash::Hash,
{
    -p.iter().filter(|(_, q)| q.is_positive()).map(|(_, q)| q.to_f64().unwrap() * o_log2(q)).sum::<f64>()
}

// ----------------------------------------------------------------- harness

struct Line {
    ok: bool,
    text: String,
}

fn line(n: usize, ok: bool, text: impl Into<String>) -> Line {
    let text = text.into();
    println!("[{}] criterion {n}: {text}", if ok { "PASS" } else { "FAIL" });
    Line { ok, text }
}

fn cfg() -> SuiteConfig {
    SuiteConfig::default()
}

fn value<'a>(r: &'a liftlab::suite::Record, key: &str) -> &'a str {
    r.values.get(key).unwrap_or_else(|| panic!("{}/{} has no `{key}`", r.instance, r.check))
}

fn num(r: &liftlab::suite::Record, key: &str) -> usize {
    value(r, key).parse().unwrap()
}

fn totals(r: &Report, suite: &str) -> liftlab::suite::Totals {
    r.totals.get(suite).cloned().unwrap_or_default()
}

fn corpus() -> Corpus {
    Corpus::standard(liftlab::corpus::DEFAULT_SEED, &cfg().budget).unwrap()
}

fn functions_up_to(n: usize) -> Vec<TruthTable> {
    (0..=n).flat_map(TruthTable::all).collect()
}

// ---------------------------------------------------------------- criteria

fn criterion_1() -> Line {
    let start = Instant::now();
    let report = run_suite(SuiteName::Relations, &cfg()).unwrap();
    let elapsed = start.elapsed();
    let mut mismatches = 0;
    let mut violations = 0;
    let sample = relation_functions(liftlab::corpus::DEFAULT_SEED);
    let n4 = sample.iter().filter(|(_, f)| f.arity() == 4).count();
    for (_, f) in &sample {
        if f.is_constant() {
            continue;
        }
        let (s, bs, deg, dt) = (o_sensitivity(f), o_block_sensitivity(f), o_degree(f), o_dt(f, 0, 0));
        let lib = f.check_measure_relations();
        if (lib.s, lib.bs, lib.deg, lib.dt) != (s, bs, deg, dt) {
            mismatches += 1;
        }
        let holds = s <= bs && bs <= dt && deg <= dt && dt <= bs * deg && deg <= s * s && s <= 2 * deg * deg && dt <= 2 * deg.pow(3);
        if !holds || !lib.all_pass() {
            violations += 1;
        }
    }
    let t = totals(&report, "relations");
    let ok = mismatches == 0 && violations == 0 && t.fail == 0 && n4 == 200 && elapsed < RELATIONS_LIMIT;
    line(
        1,
        ok,
        format!(
            "{} functions ({} at n=4), oracle mismatches={mismatches}, violations={violations}, suite fail={}, {:.2?} < {:?}",
            sample.len(),
            n4,
            t.fail,
            elapsed,
            RELATIONS_LIMIT
        ),
    )
}

fn criterion_2() -> Line {
    let corpus = corpus();
    let mut checked = 0;
    let mut bad = 0;
    for g in &corpus.gadgets {
        let rk_g = o_rank(&gadget_rows(&g.matrix));
        for f in functions_up_to(2).iter().filter(|f| !f.is_constant_zero()) {
            let rk = o_rank(&o_compose(f, &g.matrix));
            let lib = compose(f, &g.matrix, &cfg().budget).unwrap().rank_q().unwrap();
            let bound = Pow::pow(BigInt::from(rk_g as i64 - 1), o_degree(f));
            checked += 1;
            if lib != rk || BigInt::from(rk) < bound {
                bad += 1;
            }
        }
    }
    let report = run_suite(SuiteName::RankLemma, &cfg()).unwrap();
    let t = totals(&report, "rank-lemma");
    line(
        2,
        bad == 0 && t.fail == 0 && t.pass == checked,
        format!("{checked} pairs, oracle rank and bound failures={bad}, suite pass={} fail={}", t.pass, t.fail),
    )
}

fn criterion_3() -> Line {
    let corpus = corpus();
    let mut checked = 0;
    let mut bad = 0;
    for g in &corpus.gadgets {
        let rk_g = o_rank(&gadget_rows(&g.matrix));
        let max_n = if g.matrix.rows() == 2 && g.matrix.cols() == 2 { 3 } else { 2 };
        for n in 1..=max_n {
            let rk = o_rank(&o_compose(&TruthTable::parity(n), &g.matrix));
            let bound = Pow::pow(BigInt::from(rk_g as i64 - 1), n) - BigInt::one();
            checked += 1;
            if BigInt::from(rk) < bound {
                bad += 1;
            }
        }
    }
    let report = run_suite(SuiteName::Yang, &cfg()).unwrap();
    let t = totals(&report, "yang");
    line(
        3,
        bad == 0 && t.fail == 0 && t.pass == checked,
        format!("{checked} (gadget, n) cases, oracle violations={bad}, suite pass={} fail={}", t.pass, t.fail),
    )
}

fn criterion_4() -> Line {
    let corpus = corpus();
    let start = Instant::now();
    let report = run_suite(SuiteName::Lemma3, &cfg()).unwrap();
    let elapsed = start.elapsed();
    let max_area: HashMap<&str, (usize, usize)> = corpus
        .gadgets
        .iter()
        .map(|g| (g.id.as_str(), (o_max_area(&gadget_rows(&g.matrix)), g.matrix.cells())))
        .collect();
    let rank: HashMap<&str, usize> =
        corpus.gadgets.iter().map(|g| (g.id.as_str(), o_rank(&gadget_rows(&g.matrix)).max(1))).collect();
    let small: HashMap<String, (TruthTable, &GadgetMatrix)> = corpus
        .gadgets
        .iter()
        .flat_map(|g| corpus.functions.iter().map(move |f| (f, g)))
        .filter(|(f, g)| g.matrix.cells().pow(f.table.arity() as u32) <= 16)
        .map(|(f, g)| (format!("{}@{}", f.id, g.id), (f.table.clone(), &g.matrix)))
        .collect();

    let (mut exact, mut certified, mut uncertified, mut bad, mut cover_checked) = (0, 0, 0, 0, 0);
    let records: Vec<_> = report.records_of("lemma3").filter(|r| r.check == "dense-rectangle").collect();
    for r in &records {
        let gid = r.instance.split_once('@').unwrap().1;
        let s = num(r, "s");
        let rk = rank[gid];
        let density = Rational::from_str(value(r, "density")).unwrap();
        let best = Rational::from_str(value(r, "max_density")).unwrap();
        let (area, cells) = max_area[gid];
        let size = num(r, "cover_size") as u64;
        let lower = (num(r, "cover_lower_bound") as u64).max(1);
        let is_exact = value(r, "cover_exact") == "true";
        let mut ok = value(r, "monochromatic") == "true"
            && num(r, "rank") == rk
            && best == Rational::new(BigInt::from(area), BigInt::from(cells))
            && o_density_bound(&best, lower, s, rk)
            && o_density_bound(&density, size, s, rk)
            && density <= best;
        if is_exact {
            ok &= size == lower;
            if let Some((f, g)) = small.get(&r.instance) {
                cover_checked += 1;
                ok &= o_cover(&o_compose(f, g)) as u64 == size;
            }
            exact += 1;
        } else if o_density_bound(&density, lower, s, rk) {
            certified += 1;
        } else {
            uncertified += 1;
        }
        if !ok || r.status == CheckStatus::Fail {
            bad += 1;
        }
    }
    let t = totals(&report, "lemma3");
    let ok = bad == 0 && t.fail == 0 && uncertified == 0 && elapsed < LEMMA3_LIMIT;
    line(
        4,
        ok,
        format!(
            "{} pairs: N exact for {exact} (oracle cover match on {cover_checked}), {certified} with N unknown but the \
             extracted density certified at a proven lower bound on N, {uncertified} undecided, \
             violations={bad}, {:.1?} < {:?}",
            records.len(),
            elapsed,
            LEMMA3_LIMIT
        ),
    )
}

fn criterion_5() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut bad = 0;
    for _ in 0..100 {
        let (rows, cols) = (rng.gen_range(2..=12), rng.gen_range(2..=12));
        let leaves = rng.gen_range(1..=64.min(rows * cols));
        let (t, m) = random_tree(&mut rng, rows, cols, leaves).unwrap();
        let b = rebalance(&t, rows, cols).unwrap();
        let same = (0..rows).all(|x| (0..cols).all(|y| b.eval(x, y).unwrap() == t.eval(x, y).unwrap() && m.get(x, y) == t.eval(x, y).unwrap()));
        if !same || b.depth() > o_rebalance_bound(leaves) {
            bad += 1;
        }
    }
    let report = run_suite(SuiteName::Rebalance, &cfg()).unwrap();
    let suite_bad = report
        .records_of("rebalance")
        .filter(|r| num(r, "depth_after") > o_rebalance_bound(num(r, "leaves")) || value(r, "same_function") != "true")
        .count();
    let t = totals(&report, "rebalance");
    line(
        5,
        bad == 0 && suite_bad == 0 && t.pass == 100,
        format!("100 independent trees: failures={bad}; suite trees pass={} oracle-bound failures={suite_bad}", t.pass),
    )
}

fn criterion_6() -> Line {
    let corpus = corpus();
    let b = cfg().budget;
    let xor = make_gadget(&GadgetSpec::Xor1, &b).unwrap();
    let xor_d = exact_cc(&xor, &b).unwrap();
    let xor_ok = xor_d.exact && xor_d.value == 2 && o_cc(&gadget_rows(&xor)) == 2;
    let constants_ok = [(1, 1), (3, 2), (4, 4)]
        .iter()
        .all(|&(r, c)| [0, 1].iter().all(|&v| exact_cc(&GadgetMatrix::constant(r, c, v), &b).unwrap().value == 0));
    let mut gadget_bad = 0;
    for g in &corpus.gadgets {
        let m = gadget_rows(&g.matrix);
        let d = exact_cc(&g.matrix, &b).unwrap();
        let od = o_cc(&m);
        if !d.exact || d.value != od || od < o_ceil_log2(o_rank(&m)) || od < o_ceil_log2(o_cover(&m)) {
            gadget_bad += 1;
        }
    }
    let report = run_suite(SuiteName::Cc, &cfg()).unwrap();
    let mut suite_bad = 0;
    for r in report.records_of("cc").filter(|r| r.values.get("d_exact").is_some_and(|v| v == "true")) {
        let d = num(r, "d");
        let cover_ok = value(r, "cover_exact") != "true" || d >= o_ceil_log2(num(r, "cover"));
        if d < o_ceil_log2(num(r, "rank_q")) || !cover_ok || value(r, "tree_correct") != "true" {
            suite_bad += 1;
        }
    }
    let t = totals(&report, "cc");
    line(
        6,
        xor_ok && constants_ok && gadget_bad == 0 && suite_bad == 0 && t.fail == 0,
        format!(
            "D(XOR1)={} (oracle 2), constants 0: {constants_ok}, {} gadgets match the exhaustive oracle \
             (mismatches={gadget_bad}); {} matrices completed, {} over budget, bound failures={suite_bad}",
            xor_d.value,
            corpus.gadgets.len(),
            t.pass,
            t.skipped
        ),
    )
}

fn criterion_7() -> Line {
    let corpus = corpus();
    let b = cfg().budget;
    let mut replayed = 0;
    let mut bad = 0;
    for g in &corpus.gadgets {
        let m = gadget_rows(&g.matrix);
        for f in [TruthTable::parity(2), TruthTable::and(2), TruthTable::majority(3)] {
            let composed = compose(&f, &g.matrix, &b).unwrap();
            let c = cover_number(&composed, CoverMode::Exact, &b).unwrap();
            if !c.exact {
                continue;
            }
            for field in [RankField::Rational, RankField::Gf2] {
                let opts = SynthesisOptions { field, finish_rank: 5, budget: b };
                let r = synthesize_protocol(&f, &g.matrix, &c.cover, &opts).unwrap();
                replayed += 1;
                let correct = |t: &liftlab::ProtocolTree| {
                    (0..m.len()).all(|x| (0..m[0].len()).all(|y| t.eval(x, y).unwrap() == m[x][y]))
                };
                let steps_ok = r.stats.steps.iter().all(|s| 2 * s.rank_inside <= s.rank + 3);
                let finishes_ok = r.stats.finishes.iter().all(|f| f.depth <= f.rank + 1);
                if !(correct(&r.tree) && correct(&r.rebalanced) && steps_ok && finishes_ok) {
                    bad += 1;
                }
            }
        }
    }
    let report = run_suite(SuiteName::Synthesis, &cfg()).unwrap();
    let t = totals(&report, "synthesis");
    let note = report.notes.iter().any(|n| n.contains("not asserted"));
    line(
        7,
        bad == 0 && t.fail == 0 && t.pass > 0 && note,
        format!(
            "{replayed} oracle replays (failures={bad}); suite pass={} fail={} skipped (no exact cover)={}; \
             unit-constant composition bound reported, not asserted",
            t.pass, t.fail, t.skipped
        ),
    )
}

fn criterion_8() -> Line {
    let b = cfg().budget;
    let mut checked = 0;
    let mut bad = 0;
    for spec in [GadgetSpec::Xor1, GadgetSpec::AddrFlip(2)] {
        let g = make_gadget(&spec, &b).unwrap();
        for f in functions_up_to(3) {
            let red = bs_reduction(&f, &g).unwrap();
            let k = red.b;
            let mut ok = k == o_block_sensitivity(&f) && o_sensitivity(&red.f_prime) == k;
            let (rows, cols) = (g.rows().pow(k as u32), g.cols().pow(k as u32));
            'outer: for r in 0..rows {
                let xs = o_digits(r, g.rows(), k);
                let tx = red.translate_alice(&xs);
                for c in 0..cols {
                    let ys = o_digits(c, g.cols(), k);
                    let ty = red.translate_bob(&ys);
                    let zp = (0..k).fold(0, |z, j| z | (g.get(xs[j], ys[j]) as usize) << j);
                    let z = (0..f.arity()).fold(0, |z, i| z | (g.get(tx[i], ty[i]) as usize) << i);
                    if red.f_prime.eval(zp) != f.eval(z) {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            checked += 1;
            if !ok {
                bad += 1;
            }
        }
    }
    let report = run_suite(SuiteName::BsReduction, &cfg()).unwrap();
    let t = totals(&report, "bs-reduction");
    line(
        8,
        bad == 0 && t.fail == 0 && t.pass == checked,
        format!("{checked} (f, g) pairs over XOR1 and ADDRFLIP_2, oracle failures={bad}, suite pass={}", t.pass),
    )
}

fn criterion_9() -> Line {
    let corpus = corpus();
    let mut positive = 0;
    for g in &corpus.gadgets {
        let d = o_cc(&gadget_rows(&g.matrix)) as f64;
        let cells = g.matrix.cells() as f64;
        if d.sqrt() - cells.log2().log2() - 1.0 > 0.0 {
            positive += 1;
        }
    }
    let report = run_suite(SuiteName::Fknn, &cfg()).unwrap();
    let t = totals(&report, "fknn");
    let all_nonpositive = report.records_of("fknn").all(|r| value(r, "rhs_nonpositive") == "true");
    let documented = report.notes.iter().any(|n| n.contains("vacuous"));
    line(
        9,
        t.fail == 0 && positive == 0 && all_nonpositive && documented && t.vacuous == 2 * corpus.gadgets.len(),
        format!(
            "{} (gadget, n) cases, fail={}, vacuous={} (oracle: right side positive for {positive} gadgets), documented: {documented}",
            2 * corpus.gadgets.len(),
            t.fail,
            t.vacuous
        ),
    )
}

fn criterion_10() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let mut worst = [0f64; 5];
    for _ in 0..1000 {
        let (na, nb) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let p = random_joint(&mut rng, na, nb, 9);
        let total: Rational = p.iter().map(|(_, q)| q.clone()).sum();
        assert!(total.is_one());
        let pa = p.map(|(a, _)| *a);
        let pb = p.map(|(_, b)| *b);
        let h = o_entropy(&p);
        let mut h_b_given_a = 0.0;
        for a in 0..na {
            let pr = pa.prob(&a);
            if pr.is_positive() {
                let cond = p.condition(|(x, _)| *x == a).unwrap();
                h_b_given_a += pr.to_f64().unwrap() * o_entropy(&cond.map(|(_, b)| *b));
            }
        }
        let size = rng.gen_range(1..=8);
        let q = random_distribution(&mut rng, size, 9);
        let r = FiniteDistribution::from_weights((0..size).map(|i| (i, rng.gen_range(1..=9))).collect()).unwrap();
        let o_kl: f64 = q
            .iter()
            .filter(|(_, w)| w.is_positive())
            .map(|(x, w)| w.to_f64().unwrap() * (o_log2(w) - o_log2(&r.prob(x))))
            .sum();
        let kl = kl_divergence(&q, &r).unwrap();
        let slack = [
            (entropy(&p) - h).abs() + (conditional_entropy(&p) - h_b_given_a).abs() + (kl - o_kl).abs(),
            (h - o_entropy(&pa) - h_b_given_a).abs(),
            h_b_given_a - o_entropy(&pb),
            h - (p.support_size() as f64).log2(),
            -o_kl,
        ];
        for k in 0..5 {
            worst[k] = worst[k].max(slack[k]);
        }
    }
    let report = run_suite(SuiteName::Info, &cfg()).unwrap();
    let t = totals(&report, "info");
    let ok = worst.iter().all(|&w| w <= INFO_TOLERANCE) && t.pass == 4 && t.fail == 0;
    line(
        10,
        ok,
        format!(
            "1000 samples, tolerance {INFO_TOLERANCE:e}: oracle agreement {:.1e}, chain rule {:.1e}, conditioning {:.1e}, \
             support {:.1e}, KL {:.1e}; suite pass={}",
            worst[0], worst[1], worst[2], worst[3], worst[4], t.pass
        ),
    )
}

#[test]
fn acceptance() {
    let lines = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    let failed: Vec<&str> = lines.iter().filter(|l| !l.ok).map(|l| l.text.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:#?}");
}
