use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use liftlab::gadget::Budget;
use liftlab::protocol::exact_cc;
use liftlab::rectcover::{cover_number, CoverMode};
use liftlab::suite::{run_suite, Report, SuiteConfig, SuiteName, SUITE_NODES};
use liftlab::{Error, GadgetMatrix, TruthTable};
use serde_json::json;

const DEFAULT_REPORT: &str = ".liftlab/last-report.json";

#[derive(Parser)]
#[command(name = "liftlab", version, about = "Exact measures and verification suites for composed functions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct BudgetArgs {
    /// Largest matrix (in cells) an exact search accepts.
    #[arg(long, env = "LIFTLAB_BUDGET_CELLS", default_value_t = 1 << 16)]
    budget_cells: u64,
    /// Search-node limit per exact search.
    #[arg(long, default_value_t = SUITE_NODES)]
    budget_nodes: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget { cells: self.budget_cells, nodes: self.budget_nodes }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Measures of a truth table (`n=.. table=..`) or matrix file.
    Measures {
        input: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Runs a verification suite over the standard corpus.
    Suite {
        #[arg(long, value_parser = parse_suite)]
        suite: SuiteName,
        #[arg(long, default_value_t = liftlab::corpus::DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Drops corpus functions of larger arity.
        #[arg(long, default_value_t = liftlab::corpus::MAX_ARITY)]
        max_arity: usize,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Where the JSON report is kept for `export`.
        #[arg(long, default_value = DEFAULT_REPORT)]
        report: PathBuf,
    },
    /// Writes a witness (cover, tree or trace) from a saved report.
    Export {
        id: String,
        #[arg(long, default_value = DEFAULT_REPORT)]
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_suite(s: &str) -> Result<SuiteName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn io(e: std::io::Error, path: &Path) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
            }
            fs::write(p, text).map_err(|e| io(e, p))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn measures(input: &Path, budget: &Budget, format: Option<Format>) -> Result<i32, Failure> {
    let text = fs::read_to_string(input).map_err(|e| io(e, input))?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let value = if first.trim_start().starts_with("n=") {
        let f: TruthTable = text.parse()?;
        let rel = f.check_measure_relations();
        let (s, bs) = (f.sensitivity(), f.block_sensitivity().value);
        json!({ "kind": "function", "n": f.arity(), "s": s, "bs": bs, "deg": f.degree(), "dt": f.decision_tree_depth(),
                "relations_hold": rel.degenerate || rel.all_pass() })
    } else {
        let m: GadgetMatrix = text.parse()?;
        let mode = if m.cells() as u64 <= budget.cells { CoverMode::Exact } else { CoverMode::Greedy };
        let c = cover_number(&m, mode, budget)?;
        let cover_mode = match (mode, c.exact) {
            (_, true) => "exact",
            (CoverMode::Greedy, _) => "greedy-upper",
            _ => "budget-upper",
        };
        let d = exact_cc(&m, budget)?;
        json!({ "kind": "matrix", "rows": m.rows(), "cols": m.cols(), "rank_q": m.rank_q()?, "rank_f2": m.rank_f2()?,
                "cover": c.size, "cover_mode": cover_mode, "cover_lower_bound": c.lower_bound,
                "cc": d.value, "cc_exact": d.exact, "cc_lower_bound": d.lower })
    };
    let text = match format {
        Some(Format::Json) => format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable")),
        Some(Format::Csv) => {
            let obj = value.as_object().expect("object");
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(obj.keys()).map_err(|e| Failure::Other(e.to_string()))?;
            w.write_record(obj.values().map(plain)).map_err(|e| Failure::Other(e.to_string()))?;
            String::from_utf8(w.into_inner().expect("in memory")).expect("utf8")
        }
        None => value
            .as_object()
            .expect("object")
            .iter()
            .map(|(k, v)| format!("{k}={}\n", plain(v)))
            .collect(),
    };
    print!("{text}");
    Ok(0)
}

fn plain(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_text(r: &Report) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::Other(e.to_string());
    w.write_record(["suite", "instance", "check", "status", "witness"]).map_err(err)?;
    for row in r.csv_rows() {
        w.write_record(&row).map_err(err)?;
    }
    Ok(String::from_utf8(w.into_inner().expect("in memory")).expect("utf8"))
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.cmd {
        Cmd::Measures { input, budget, format } => measures(&input, &budget.budget(), format),
        Cmd::Suite { suite, seed, budget, workers, max_arity, out, format, report } => {
            let cfg = SuiteConfig { seed, budget: budget.budget(), workers, max_arity };
            let r = run_suite(suite, &cfg)?;
            let doc = serde_json::to_string_pretty(&r).expect("serializable") + "\n";
            emit(Some(&report), &doc)?;
            let text = match format {
                Format::Json => doc,
                Format::Csv => csv_text(&r)?,
            };
            emit(out.as_deref(), &text)?;
            for (name, t) in &r.totals {
                eprintln!(
                    "{name}: pass={} fail={} vacuous={} degenerate={} skipped={}",
                    t.pass, t.fail, t.vacuous, t.degenerate, t.skipped
                );
            }
            Ok(r.exit_code())
        }
        Cmd::Export { id, report, out } => {
            let text = fs::read_to_string(&report).map_err(|e| io(e, &report))?;
            let r: Report = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", report.display())))?;
            let w = r.witness(&id).ok_or_else(|| Failure::Usage(format!("unknown witness `{id}`")))?;
            emit(out.as_deref(), &w.text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
