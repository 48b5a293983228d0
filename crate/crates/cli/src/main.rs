use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qsync_core::dsl::{eval_str, Bindings};
use qsync_core::gamemaps::{
    channel_props, concurrency_image, game_report, loopslide, nonsignalling_marginals, perfect_residual, sync_status,
};
use qsync_core::graphs::{extract_hom, hom_game, iso_game, QuantumGraph};
use qsync_core::harness::{run_all, run_suite, suite_names, suites, summary_table, SuiteResult};
use qsync_core::io::{read_json, state_from_json, write_json, Entry, GraphJson, MorphismJson, QFuncJson, SetJson};
use qsync_core::qset::{check_axioms, dims, FrobeniusStructure, SetRegistry};
use qsync_core::strategies::{
    combine, normalized_cup, qfunc_report, realize_correlation, CombineKind, CombinedStrategy, QuantumFunction,
};
use qsync_core::tensor::residual;
use qsync_core::{Morphism, QsyncError};

#[derive(Parser)]
#[command(name = "qsync", version, about = "Checks quantum sets, games and strategies")]
struct Cli {
    /// Residual tolerance for every check.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write the report as JSON.
    #[arg(long, global = true, value_name = "PATH")]
    json_out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Frobenius axioms and dimensions of a quantum set.
    CheckSet { file: PathBuf },
    /// Properties of a map between question and answer pairs.
    CheckMap {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "game")]
        props: Vec<Prop>,
        /// Game to test perfection against.
        #[arg(long)]
        game: Option<PathBuf>,
    },
    /// Quantum function equations.
    CheckQfunc { file: PathBuf },
    /// Combine two quantum functions into a strategy.
    Combine {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long = "E")]
        e: PathBuf,
        #[arg(long = "F")]
        f: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Feed a resource state into a strategy.
    Realize {
        #[arg(long)]
        strategy: PathBuf,
        /// JSON list of amplitudes; the normalized cup when omitted.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a diagram expression.
    Eval {
        #[arg(long)]
        expr: String,
        /// NAME=morphism.json
        #[arg(long, value_parser = parse_binding)]
        bind: Vec<(String, PathBuf)>,
        /// NAME=set.json
        #[arg(long, value_parser = parse_binding)]
        set: Vec<(String, PathBuf)>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a graph game.
    Game {
        #[arg(value_enum)]
        kind: GameKind,
        #[arg(long = "G")]
        g: PathBuf,
        #[arg(long = "H")]
        h: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recover a quantum graph homomorphism from a perfect strategy.
    ExtractHom {
        #[arg(long = "G")]
        g: PathBuf,
        #[arg(long = "H")]
        h: PathBuf,
        /// Commuting pair of quantum functions.
        #[arg(long = "E", requires = "f", conflicts_with = "strategy")]
        e: Option<PathBuf>,
        #[arg(long = "F")]
        f: Option<PathBuf>,
        /// A strategy map with no recorded provenance.
        #[arg(long, required_unless_present = "e")]
        strategy: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run named property suites.
    VerifySuite {
        #[arg(long, conflicts_with = "names")]
        all: bool,
        #[arg(long)]
        list: bool,
        names: Vec<String>,
    },
    /// Summarize a saved suite report.
    Report { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Prop {
    Game,
    Cp,
    Channel,
    Ns,
    Sync,
    Concurrent,
    Loopslide,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Commuting,
    Tensor,
    Deterministic,
}

impl From<Kind> for CombineKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Commuting => CombineKind::Commuting,
            Kind::Tensor => CombineKind::Tensor,
            Kind::Deterministic => CombineKind::Deterministic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GameKind {
    Hom,
    Iso,
}

fn parse_binding(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or_else(|| format!("expected NAME=FILE, got `{s}`"))?;
    if name.is_empty() {
        return Err("empty name".into());
    }
    Ok((name.to_string(), PathBuf::from(path)))
}

/// Residual checks for one command; `pass` iff all are within tolerance.
struct Report {
    command: &'static str,
    tol: f64,
    checks: Vec<(String, f64)>,
    info: BTreeMap<String, Value>,
}

impl Report {
    fn new(command: &'static str, tol: f64) -> Self {
        Report {
            command,
            tol,
            checks: Vec::new(),
            info: BTreeMap::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, r: f64) {
        self.checks.push((name.into(), r));
    }

    fn info(&mut self, name: &str, v: impl Into<Value>) {
        self.info.insert(name.to_string(), v.into());
    }

    fn first_failure(&self) -> Option<&(String, f64)> {
        self.checks.iter().find(|(_, r)| !(*r <= self.tol))
    }

    fn to_json(&self) -> Value {
        let checks: serde_json::Map<String, Value> =
            self.checks.iter().map(|(k, r)| (k.clone(), json!(r))).collect();
        json!({
            "schema_version": qsync_core::harness::SCHEMA_VERSION,
            "command": self.command,
            "tol": self.tol,
            "pass": self.first_failure().is_none(),
            "checks": checks,
            "info": self.info,
        })
    }

    fn print(&self) {
        for (k, v) in &self.info {
            println!("{k}: {v}");
        }
        for (name, r) in &self.checks {
            let mark = if *r <= self.tol { "ok" } else { "FAIL" };
            println!("{name:<32} {r:>12.3e}  {mark}");
        }
    }
}

enum Outcome {
    Checks(Report),
    Suites(Vec<SuiteResult>),
    Done,
}

fn is_usage(e: &QsyncError) -> bool {
    !matches!(
        e,
        QsyncError::NotAGame { .. }
            | QsyncError::CommutationFailure { .. }
            | QsyncError::ExtractionFailure(_)
            | QsyncError::InvalidQuantumFunction(_)
            | QsyncError::DiagramMismatch(_)
            | QsyncError::Unsatisfiable(_)
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (tol, seed) = (cli.tol, cli.seed);
    let outcome = match run(cli.cmd, tol, seed) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if is_usage(&e) { 2 } else { 1 });
        }
    };
    let (json, pass) = match &outcome {
        Outcome::Checks(r) => {
            r.print();
            if let Some((name, res)) = r.first_failure() {
                println!("first failure: {name} residual {res:.3e}");
            }
            (Some(r.to_json()), r.first_failure().is_none())
        }
        Outcome::Suites(results) => {
            print!("{}", summary_table(results));
            let failed = results.iter().find_map(|r| r.first_failure().map(|f| (r.suite.clone(), f)));
            if let Some((suite, (inst, check, res))) = &failed {
                println!("first failure: {suite} / {inst} / {check} residual {res:.3e}");
            }
            let value = json!({
                "schema_version": qsync_core::harness::SCHEMA_VERSION,
                "seed": seed,
                "tol": tol,
                "pass": failed.is_none(),
                "suites": results,
            });
            (Some(value), failed.is_none())
        }
        Outcome::Done => (None, true),
    };
    if let (Some(path), Some(value)) = (&cli.json_out, &json) {
        if let Err(e) = write_json(path, value) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn load_graph(path: &Path, tol: f64) -> qsync_core::Result<QuantumGraph> {
    read_json::<GraphJson>(path)?.build(tol)
}

fn load_morphism(path: &Path) -> qsync_core::Result<Morphism> {
    read_json::<MorphismJson>(path)?.build(&SetRegistry::new())
}

fn load_qfunc(path: &Path, tol: f64) -> qsync_core::Result<QuantumFunction> {
    QuantumFunction::new(read_json::<QFuncJson>(path)?.build()?, tol)
}

fn save(output: &Option<PathBuf>, m: &Morphism) -> qsync_core::Result<()> {
    match output {
        Some(path) => write_json(path, &MorphismJson::of(m)),
        None => {
            println!("{}", serde_json::to_string_pretty(&MorphismJson::of(m))?);
            Ok(())
        }
    }
}

fn run(cmd: Cmd, tol: f64, seed: u64) -> qsync_core::Result<Outcome> {
    match cmd {
        Cmd::CheckSet { file } => {
            let set = read_json::<SetJson>(&file)?.build()?;
            let mut r = Report::new("check-set", tol);
            for (name, v) in check_axioms(&set).residuals {
                r.check(name, v);
            }
            for (name, v) in FrobeniusStructure::of_set(&set, true).check_axioms()?.residuals {
                r.check(format!("op {name}"), v);
            }
            let d = dims(&set, tol)?;
            r.info("blocks", json!(set.blocks()));
            r.info("dim", d.dim);
            r.info("classical_dim", d.classical_dim);
            r.info("classical", set.is_classical());
            Ok(Outcome::Checks(r))
        }
        Cmd::CheckMap { map, props, game } => {
            let f = load_morphism(&map)?;
            let mut r = Report::new("check-map", tol);
            r.info("signature", format!("{} -> {}", qsync_core::tensor::signature(f.dom()), qsync_core::tensor::signature(f.cod())));
            for p in props {
                match p {
                    Prop::Game => {
                        let g = game_report(&f)?;
                        r.check("game idempotent", g.idempotent);
                        r.check("game self-conjugate", g.self_conjugate);
                    }
                    Prop::Cp => r.check("cp", channel_props(&f)?.cp),
                    Prop::Channel => {
                        let c = channel_props(&f)?;
                        r.check("cp", c.cp);
                        r.check("counital", c.counital);
                        r.info("unital residual", c.unital);
                    }
                    Prop::Ns => r.check("non-signalling", nonsignalling_marginals(&f, tol)?.residual),
                    Prop::Sync => {
                        let s = sync_status(&f)?;
                        r.check("synchronous", s.synchronous);
                        r.info("cosynchronous residual", s.cosynchronous);
                        r.info("preserves sharing residual", s.preserves_sharing);
                    }
                    Prop::Concurrent => {
                        let (img, cup) = concurrency_image(&f)?;
                        r.check("concurrent", residual(&img, &cup)?);
                    }
                    Prop::Loopslide => {
                        let l = loopslide(&f)?;
                        r.info("loopslide", json!([l.re, l.im]));
                    }
                }
            }
            if let Some(path) = game {
                let lambda = load_morphism(&path)?;
                r.check("perfect", perfect_residual(&f, &lambda)?);
            }
            Ok(Outcome::Checks(r))
        }
        Cmd::CheckQfunc { file } => {
            let m = read_json::<QFuncJson>(&file)?.build()?;
            let q = qfunc_report(&m)?;
            let mut r = Report::new("check-qfunc", tol);
            r.check("comultiplicativity", q.comult);
            r.check("counitality", q.counital);
            r.check("self-conjugacy", q.self_conj);
            Ok(Outcome::Checks(r))
        }
        Cmd::Combine { kind, e, f, output } => {
            let (e, f) = (load_qfunc(&e, tol)?, load_qfunc(&f, tol)?);
            let cs = combine(kind.into(), &e, &f, tol)?;
            save(&output, &cs.map)?;
            Ok(Outcome::Done)
        }
        Cmd::Realize { strategy, state, output } => {
            let phi = load_morphism(&strategy)?;
            let psi = match state {
                Some(path) => state_from_json(&read_json::<Vec<Entry>>(&path)?),
                None => {
                    let d = (phi.dom()[0].dim() as f64).sqrt().round() as usize;
                    if d * d != phi.dom()[0].dim() {
                        return Err(QsyncError::DimMismatch(format!(
                            "resource of dimension {} is not a square; pass --state",
                            phi.dom()[0].dim()
                        )));
                    }
                    normalized_cup(d)
                }
            };
            save(&output, &realize_correlation(&phi, &psi, tol)?)?;
            Ok(Outcome::Done)
        }
        Cmd::Eval { expr, bind, set, output } => {
            let mut b = Bindings::new();
            for (name, path) in set {
                let s = read_json::<SetJson>(&path)?;
                b.bind_set(&qsync_core::QuantumSet::new(name, &s.blocks)?);
            }
            for (name, path) in bind {
                b.bind(name, load_morphism(&path)?);
            }
            save(&output, &eval_str(&expr, &b)?)?;
            Ok(Outcome::Done)
        }
        Cmd::Game { kind, g, h, output } => {
            let (g, h) = (load_graph(&g, tol)?, load_graph(&h, tol)?);
            let lambda = match kind {
                GameKind::Hom => hom_game(&g, &h)?,
                GameKind::Iso => iso_game(&g, &h, tol)?,
            };
            save(&output, &lambda)?;
            Ok(Outcome::Done)
        }
        Cmd::ExtractHom { g, h, e, f, strategy, output } => {
            let (g, h) = (load_graph(&g, tol)?, load_graph(&h, tol)?);
            let phi = match (e, f, strategy) {
                (Some(e), Some(f), _) => combine(CombineKind::Commuting, &load_qfunc(&e, tol)?, &load_qfunc(&f, tol)?, tol)?,
                (_, _, Some(s)) => CombinedStrategy::raw(load_morphism(&s)?)?,
                _ => return Err(QsyncError::Malformed("pass --E and --F, or --strategy".into())),
            };
            let hom = extract_hom(&phi, &g, &h, tol)?;
            let json = QFuncJson::of(&hom)?;
            match output {
                Some(path) => write_json(path, &json)?,
                None => println!("{}", serde_json::to_string_pretty(&json)?),
            }
            Ok(Outcome::Done)
        }
        Cmd::VerifySuite { all, list, names } => {
            if list {
                for s in suites() {
                    println!("{:<28} {}", s.name, s.about);
                }
                return Ok(Outcome::Done);
            }
            if all {
                return Ok(Outcome::Suites(run_all(seed, tol)));
            }
            if names.is_empty() {
                return Err(QsyncError::UnknownSuite(format!(
                    "no suite named; pass --all or one of {}",
                    suite_names().join(", ")
                )));
            }
            let results = names.iter().map(|n| run_suite(n, seed, tol)).collect::<qsync_core::Result<Vec<_>>>()?;
            Ok(Outcome::Suites(results))
        }
        Cmd::Report { file } => {
            let saved: Value = read_json(&file)?;
            let results: Vec<SuiteResult> = serde_json::from_value(saved.get("suites").cloned().unwrap_or(saved))?;
            Ok(Outcome::Suites(results))
        }
    }
}
