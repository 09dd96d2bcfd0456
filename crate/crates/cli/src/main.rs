//! Command-line front end: run verification suites, classify spaces, test
//! equivalence, inspect the catalog and manage the key cache.
//!
//! Spaces are given as generic matrices, e.g. `[a,b,0;0,a+b,c;0,0,1]`: rows are
//! separated by `;`, entries by `,`, and each entry is a sum of `0`, `1` and the
//! letters `a`..`z` (`-` is read as `+`). The serialized forms `span:<hex>|...`
//! and `affine:<base-hex>|<hex>|...` are accepted as well.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use f2rank2::catalog::Catalog;
use f2rank2::classifiers::{
    enumerate_classes, ClassificationReport, ElementFilter, SpacePredicate, Suite, Verifier,
    DEFAULT_SEED,
};
use f2rank2::genmatrix::{format_linear, parse_generic};
use f2rank2::orbits::{affine_equivalent, are_equivalent, are_similar, Action, KeyCache, Witness};
use f2rank2::predicates::{counting_n2_n3, upper_rank};
use f2rank2::{AffineMatrixSpace, Error};

#[derive(Parser)]
#[command(
    name = "f2rank2",
    version,
    about = "Exhaustive checks on spaces of matrices of upper rank 2 over F2"
)]
struct Cli {
    /// Directory of the persistent canonical-key cache (in memory when unset).
    #[arg(long, env = "F2RANK2_CACHE", global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Output::Table, global = true)]
    output: Output,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0, global = true)]
    threads: usize,
    /// Seed of the randomized checks.
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,
    /// Append wall times to reports (makes output run-dependent).
    #[arg(long, global = true)]
    timings: bool,
    /// Catalog file to use instead of the built-in one.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Core,
    Main,
    J3,
    Lld,
    Spectrum,
    Affine,
    Maximal,
    R11,
    All,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::Core => vec![Suite::Core],
            SuiteArg::Main => vec![Suite::Main],
            SuiteArg::J3 => vec![Suite::J3],
            SuiteArg::Lld => vec![Suite::Lld],
            SuiteArg::Spectrum => vec![Suite::Spectrum],
            SuiteArg::Affine => vec![Suite::Affine],
            SuiteArg::Maximal => vec![Suite::Maximal],
            SuiteArg::R11 => vec![Suite::R11],
            SuiteArg::All => Suite::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Equiv,
    Similar,
    Affine,
}

#[derive(Clone, Copy, ValueEnum)]
enum ActionArg {
    Equiv,
    Sim,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite; exits 1 if any check fails.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
    },
    /// Decide whether two spaces are in one orbit and print a witness.
    Equiv {
        a: String,
        b: String,
        #[arg(long, value_enum, default_value_t = Mode::Equiv)]
        mode: Mode,
    },
    /// List the classes of spaces of a given shape and dimension.
    Classify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        dim: usize,
        /// all, urk=K, reduced, semi-primitive, primitive, rank-constant-2,
        /// irreducible, trivial-spectrum, lld, minimal-lld.
        #[arg(long, default_value = "all")]
        predicate: String,
        #[arg(long, value_enum, default_value_t = ActionArg::Equiv)]
        action: ActionArg,
        /// Condition on every member: any, rank<=K, trivial-spectrum, nilpotent.
        #[arg(long, default_value = "rank<=2")]
        filter: String,
    },
    /// Print catalog entries, or re-check their recorded properties.
    Catalog {
        name: Option<String>,
        #[arg(long)]
        check: bool,
    },
    /// Inspect or empty the key cache directory.
    Cache {
        #[command(subcommand)]
        op: CacheOp,
    },
}

#[derive(Subcommand)]
enum CacheOp {
    Stats,
    Clear,
}

/// Collected stdout, printed once at the end.
struct Out {
    json: bool,
    text: String,
}

impl Out {
    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn value(&mut self, v: serde_json::Value) {
        self.line(v.to_string());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut out = Out {
        json: cli.output == Output::Json,
        text: String::new(),
    };
    let result = run(&cli, &mut out);
    print!("{}", out.text);
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn header(cli: &Cli, out: &mut Out) {
    let cache = cli.cache_dir.as_ref().map(|p| p.display().to_string());
    let catalog = cli
        .catalog
        .as_ref()
        .map_or("builtin".to_string(), |p| p.display().to_string());
    let threads = rayon::current_num_threads();
    if out.json {
        out.value(json!({"config": {
            "cache_dir": cache,
            "output": "json",
            "threads": threads,
            "seed": cli.seed,
            "catalog": catalog,
        }}));
    } else {
        out.line(format!(
            "# f2rank2 cache_dir={} output=table threads={threads} seed={} catalog={catalog}",
            cache.as_deref().unwrap_or("none"),
            cli.seed
        ));
    }
}

fn open_cache(cli: &Cli) -> Result<KeyCache, Error> {
    match &cli.cache_dir {
        Some(dir) => KeyCache::open(dir),
        None => Ok(KeyCache::in_memory()),
    }
}

fn load_catalog(cli: &Cli) -> Result<Catalog, Error> {
    match &cli.catalog {
        Some(path) => Catalog::load(path),
        None => Ok(Catalog::builtin().clone()),
    }
}

fn run(cli: &Cli, out: &mut Out) -> Result<bool, Error> {
    match &cli.command {
        Command::Verify { suite } => {
            let catalog = load_catalog(cli)?;
            let cache = Arc::new(open_cache(cli)?);
            header(cli, out);
            let verifier = Verifier::new(&catalog, cache).with_seed(cli.seed);
            let mut ok = true;
            for s in suite.suites() {
                let report = verifier.run(s);
                ok &= report.passed();
                emit_report(out, &report, cli.timings);
            }
            Ok(ok)
        }
        Command::Equiv { a, b, mode } => {
            let (sa, sb) = (parse_space(a)?, parse_space(b)?);
            header(cli, out);
            let (name, found) = match mode {
                Mode::Equiv => ("equiv", are_equivalent(&linear(sa, a)?, &linear(sb, b)?)?),
                Mode::Similar => ("similar", are_similar(&linear(sa, a)?, &linear(sb, b)?)?),
                Mode::Affine => ("affine", affine_equivalent(&sa, &sb)?),
            };
            emit_witness(out, name, found.as_ref());
            Ok(found.is_some())
        }
        Command::Classify {
            n,
            p,
            dim,
            predicate,
            action,
            filter,
        } => {
            let filter: ElementFilter = filter.parse()?;
            let predicate: SpacePredicate = predicate.parse()?;
            let action = match action {
                ActionArg::Equiv => Action::Equivalence,
                ActionArg::Sim => Action::Similarity,
            };
            let cache = Arc::new(open_cache(cli)?);
            let classes = enumerate_classes(*n, *p, *dim, filter, predicate, action, &cache)?;
            header(cli, out);
            if !out.json {
                out.line(format!(
                    "# {n}x{p} dim={dim} filter={filter} predicate={predicate} action={action}"
                ));
                out.line(format!(
                    "{:>4}  {:>3}  {:>3}  {:<16}  {:>3}  generic",
                    "#", "dim", "urk", "ranks", "n2"
                ));
            }
            for (i, c) in classes.iter().enumerate() {
                let v = &c.rep;
                let hist = v.rank_histogram();
                let n2 = counting_n2_n3(v).ok().map(|x| x.0);
                let generic = format_linear(v);
                if out.json {
                    out.value(json!({
                        "class": i + 1,
                        "key": c.key.to_string(),
                        "generic": generic,
                        "dim": v.dim(),
                        "urk": upper_rank(v),
                        "rank_histogram": hist,
                        "n2": n2,
                    }));
                } else {
                    let hist = format!("{hist:?}").replace(' ', "");
                    let n2 = n2.map_or("-".to_string(), |x| x.to_string());
                    out.line(format!(
                        "{:>4}  {:>3}  {:>3}  {:<16}  {:>3}  {generic}",
                        i + 1,
                        v.dim(),
                        upper_rank(v),
                        hist,
                        n2
                    ));
                }
            }
            if out.json {
                out.value(json!({"classes": classes.len()}));
            } else {
                out.line(format!("{} classes", classes.len()));
            }
            Ok(true)
        }
        Command::Catalog { name, check } => {
            let catalog = load_catalog(cli)?;
            let entries: Vec<_> = match name {
                Some(n) => vec![catalog.get(n)?],
                None => catalog.entries().iter().collect(),
            };
            header(cli, out);
            let mut ok = true;
            for e in entries {
                let (rows, cols) = e.space.shape();
                let expect: Vec<String> = e.expect.iter().map(|p| p.to_string()).collect();
                let problems = if *check { e.mismatches() } else { Vec::new() };
                ok &= problems.is_empty();
                if out.json {
                    let mut v = json!({
                        "name": e.name,
                        "shape": format!("{rows}x{cols}"),
                        "dim": e.space.dim(),
                        "generic": e.text,
                        "expect": expect,
                    });
                    if *check {
                        v["status"] = json!(if problems.is_empty() { "pass" } else { "fail" });
                        v["mismatches"] = json!(problems);
                    }
                    out.value(v);
                } else {
                    let status = match (*check, problems.is_empty()) {
                        (false, _) => String::new(),
                        (true, true) => "  PASS".into(),
                        (true, false) => format!("  FAIL {}", problems.join("; ")),
                    };
                    out.line(format!(
                        "{:<10} {rows}x{cols} dim {}  {}  {}{status}",
                        e.name,
                        e.space.dim(),
                        e.text,
                        expect.join(" ")
                    ));
                }
            }
            Ok(ok)
        }
        Command::Cache { op } => {
            let Some(dir) = &cli.cache_dir else {
                return Err(Error::Precondition(
                    "no cache directory; pass --cache-dir or set F2RANK2_CACHE".into(),
                ));
            };
            let cache = KeyCache::open(dir)?;
            header(cli, out);
            match op {
                CacheOp::Stats => {
                    for (file, records) in cache.stats()? {
                        if out.json {
                            out.value(json!({"file": file, "records": records}));
                        } else {
                            out.line(format!("{file:<24} {records}"));
                        }
                    }
                }
                CacheOp::Clear => {
                    let removed = cache.clear()?;
                    if out.json {
                        out.value(json!({"removed": removed}));
                    } else {
                        out.line(format!("removed {removed} cache files"));
                    }
                }
            }
            Ok(true)
        }
    }
}

fn parse_space(text: &str) -> Result<AffineMatrixSpace, Error> {
    let t = text.trim();
    if t.starts_with("span:") || t.starts_with("affine:") {
        t.parse()
    } else {
        parse_generic(t)
    }
}

fn linear(s: AffineMatrixSpace, text: &str) -> Result<f2rank2::MatrixSpace, Error> {
    if !s.is_linear() {
        return Err(Error::Precondition(format!(
            "`{text}` is affine; use --mode affine"
        )));
    }
    Ok(s.into_translation())
}

fn emit_witness(out: &mut Out, mode: &str, w: Option<&Witness>) {
    match (out.json, w) {
        (true, Some(w)) => out.value(json!({"mode": mode, "result": "equivalent", "P": w.p.to_string(), "Q": w.q.to_string()})),
        (true, None) => out.value(json!({"mode": mode, "result": "inequivalent"})),
        (false, Some(w)) => {
            out.line("equivalent");
            out.line(format!("P={}", w.p));
            out.line(format!("Q={}", w.q));
        }
        (false, None) => out.line("inequivalent"),
    }
}

fn emit_report(out: &mut Out, report: &ClassificationReport, timings: bool) {
    if out.json {
        out.text.push_str(&report.to_json_lines(timings));
    } else {
        out.text.push_str(&report.to_table(timings));
    }
}
