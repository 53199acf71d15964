//! `respmech`: analyze, classify, reorder, export and generate mechanisms.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 budget exceeded,
//! 3 brute-force and formula verdicts diverge.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use respmech::classify::{self, Class, ClassificationReport, Method, OrderRow};
use respmech::formula::{parse, Formula, VarSet};
use respmech::mechanism::{BitTuple, Mechanism, DEFAULT_PROFILE_BUDGET};
use respmech::qbf::{self, SolverConfig, SOLVER_ENV};
use respmech::reductions::{self, ReductionInstance, ReductionKind};
use respmech::responsibility::{self, Options};
use respmech::Error;

#[derive(Parser)]
#[command(name = "respmech", version, about = "Responsibility analysis for sequential decision-making mechanisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Brute,
    Qbf,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Brute => Method::Brute,
            MethodArg::Qbf => Method::Qbf,
            MethodArg::Both => Method::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Df,
    Gf,
    Rf,
    Gdf,
}

impl From<ClassArg> for Class {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Df => Class::Df,
            ClassArg::Gf => Class::Gf,
            ClassArg::Rf => Class::Rf,
            ClassArg::Gdf => Class::Gdf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReductionArg {
    Df,
    Gf,
    Gdf,
}

impl From<ReductionArg> for ReductionKind {
    fn from(r: ReductionArg) -> Self {
        match r {
            ReductionArg::Df => ReductionKind::Df,
            ReductionArg::Gf => ReductionKind::Gf,
            ReductionArg::Gdf => ReductionKind::Gdf,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Who is responsible under one action profile
    Analyze {
        file: PathBuf,
        /// Comma-separated actions, one per agent: labels or bit strings
        #[arg(long)]
        profile: String,
        /// Skip the symbolic cross-check
        #[arg(long)]
        no_cross_check: bool,
        #[arg(long, default_value_t = DEFAULT_PROFILE_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Membership in DF, GF, RF and GDF
    Classify {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodArg,
        /// Maximum profile bits enumerated (formula evaluation is charged twice)
        #[arg(long, default_value_t = DEFAULT_PROFILE_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Classify the mechanism under every decision order
    Orders {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "gdf")]
        target: ClassArg,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_PROFILE_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Write a class formula as QDIMACS
    Export {
        file: PathBuf,
        /// df, gf, rf:K, gdf or gdf:K
        #[arg(long)]
        property: String,
        /// Actions of the first K agents, required when K > 0
        #[arg(long)]
        prefix: Option<String>,
        /// Output path [default: <file stem>_<property>.qdimacs]
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Solver command template; `{}` stands for the instance path
        #[arg(long, env = SOLVER_ENV)]
        solver: Option<String>,
        #[arg(long, default_value_t = 60)]
        timeout_secs: u64,
        /// Also decide the instance with the built-in evaluator
        #[arg(long)]
        evaluate: bool,
    },
    /// Build a mechanism from a quantified sentence
    Generate {
        #[arg(long, value_enum)]
        reduction: ReductionArg,
        /// Quantifier-free formula; a random one is drawn from --seed if absent
        #[arg(long)]
        formula: Option<String>,
        /// Outer universal block, comma-separated
        #[arg(long)]
        forall: Option<String>,
        /// Existential block, comma-separated
        #[arg(long)]
        exists: Option<String>,
        /// Inner universal block (gf only), comma-separated
        #[arg(long)]
        forall2: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Variables of a random formula
        #[arg(long, default_value_t = 4)]
        nvars: usize,
        /// Connectives of a random formula
        #[arg(long, default_value_t = 8)]
        size: usize,
        /// Mechanism file [default: <reduction>_instance.json]; the sidecar
        /// goes next to it with extension .expected.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } | Error::TooManyOrders { .. } => 2,
        Error::Divergence { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Analyze {
            file,
            profile,
            no_cross_check,
            budget,
            format,
        } => analyze(&file, &profile, !no_cross_check, budget, format),
        Command::Classify {
            file,
            method,
            budget,
            format,
        } => {
            let m = Mechanism::load(&file)?;
            let report = classify::classify(&m, method.into(), budget)?;
            match format {
                Format::Json => print_json(&report),
                Format::Human => print_report(&file, &m, &report),
            }
            Ok(())
        }
        Command::Orders {
            file,
            target,
            method,
            budget,
            format,
        } => {
            let m = Mechanism::load(&file)?;
            let rows = classify::orders(&m, method.into(), budget)?;
            match format {
                Format::Json => print_json(&rows),
                Format::Human => print_orders(&rows, target.into()),
            }
            Ok(())
        }
        Command::Export {
            file,
            property,
            prefix,
            output,
            solver,
            timeout_secs,
            evaluate,
        } => export(
            &file,
            &property,
            prefix.as_deref(),
            output,
            solver.filter(|s| !s.trim().is_empty()),
            Duration::from_secs(timeout_secs),
            evaluate,
        ),
        Command::Generate {
            reduction,
            formula,
            forall,
            exists,
            forall2,
            seed,
            nvars,
            size,
            out,
        } => generate(reduction.into(), formula, [forall, exists, forall2], seed, nvars, size, out),
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn analyze(file: &Path, spec: &str, cross_check: bool, budget: usize, format: Format) -> CliResult {
    let m = Mechanism::load(file)?;
    let p = m.parse_profile(spec)?;
    let verdict = responsibility::responsible_agents_with(&m, &p, Options { cross_check, budget })?;
    match format {
        Format::Json => print_json(&verdict),
        Format::Human => {
            println!("profile: {}", m.describe_profile(&p).join(", "));
            println!("violates: {}", yes(verdict.violates));
            if verdict.responsible.is_empty() {
                println!("responsible: none");
            } else {
                let who: Vec<String> = verdict
                    .witnesses
                    .iter()
                    .map(|w| {
                        let a = &m.agents()[w.agent];
                        format!("{} (could have chosen {})", a.name, a.describe(&w.tuple))
                    })
                    .collect();
                println!("responsible: {}", who.join(", "));
            }
        }
    }
    Ok(())
}

fn print_report(file: &Path, m: &Mechanism, r: &ClassificationReport) {
    let names: Vec<&str> = m.agents().iter().map(|a| a.name.as_str()).collect();
    println!(
        "mechanism: {} ({} agents: {}; {} bits)",
        file.display(),
        m.n(),
        if names.is_empty() { "none".into() } else { names.join(", ") },
        m.total_bits()
    );
    println!("method: {}", r.method);
    for class in Class::ALL {
        let v = r.verdict(class);
        match &v.witness {
            Some(w) => println!("{:<4} {:<3}  counterexample {}", class.name(), yes(v.member), w.describe(m)),
            None => println!("{:<4} {}", class.name(), yes(v.member)),
        }
    }
}

fn print_orders(rows: &[OrderRow], target: Class) {
    let orders: Vec<String> = rows.iter().map(|r| r.names.join(", ")).collect();
    let width = orders.iter().map(String::len).max().unwrap_or(0).max(5);
    println!("  {:<width$}  DF   GF   RF   GDF", "order");
    let mut hits = Vec::new();
    for (row, order) in rows.iter().zip(&orders) {
        let hit = row.report.member(target);
        if hit {
            hits.push(order.clone());
        }
        let cells: Vec<String> = Class::ALL.iter().map(|&c| format!("{:<4}", yes(row.report.member(c)))).collect();
        println!("{} {:<width$}  {}", if hit { "*" } else { " " }, order, cells.join(" ").trim_end());
    }
    if hits.is_empty() {
        println!("no order achieves {target}");
    } else {
        println!("orders achieving {target}: {}", hits.join("; "));
    }
}

fn parse_property(m: &Mechanism, property: &str) -> CliResult<(Class, usize)> {
    let (name, k) = match property.split_once(':') {
        Some((name, k)) => (
            name,
            Some(k.parse::<usize>().map_err(|_| Failure::Usage(format!("invalid agent count in `{property}`")))?),
        ),
        None => (property, None),
    };
    let class: Class = name.parse().map_err(Failure::Usage)?;
    match (class, k) {
        (Class::Df | Class::Gf, Some(_)) => Err(Failure::Usage(format!("`{name}` takes no agent count"))),
        (Class::Rf, None) => Err(Failure::Usage("rf needs an agent count, e.g. rf:0".into())),
        (_, k) => {
            let k = k.unwrap_or(0);
            if k > m.n() {
                return Err(Error::AgentOutOfRange { index: k, agents: m.n() }.into());
            }
            Ok((class, k))
        }
    }
}

fn export(
    file: &Path,
    property: &str,
    prefix: Option<&str>,
    output: Option<PathBuf>,
    solver: Option<String>,
    timeout: Duration,
    evaluate: bool,
) -> CliResult {
    let m = Mechanism::load(file)?;
    let (class, k) = parse_property(&m, property)?;
    let mut f = match class {
        Class::Df => classify::df_formula(&m),
        Class::Gf => classify::gf_formula(&m),
        Class::Rf => classify::rf_formula(&m, k)?,
        Class::Gdf => classify::gdf_formula(&m, k)?,
    };
    match (k, prefix) {
        (0, Some(_)) => return Err(Failure::Usage("--prefix only applies to rf:K or gdf:K with K > 0".into())),
        (0, None) => {}
        (_, None) => return Err(Failure::Usage(format!("{property} is open; give the first {k} actions with --prefix"))),
        (_, Some(spec)) => {
            let items: Vec<&str> = spec.split(',').collect();
            if items.len() != k {
                return Err(Error::LengthMismatch { expected: k, found: items.len() }.into());
            }
            let bits: Vec<BitTuple> = items
                .iter()
                .enumerate()
                .map(|(i, item)| m.parse_tuple(i, item))
                .collect::<Result<_, _>>()?;
            let vars = m.vars_of(0..k);
            f = f.substitute(&bits.concat(), &vars)?;
        }
    }
    let cnf = qbf::to_cnf(&f)?;
    let text = cnf.to_qdimacs();
    let out = output.unwrap_or_else(|| {
        let stem = file.file_stem().map_or("mechanism".into(), |s| s.to_string_lossy().into_owned());
        PathBuf::from(format!("{stem}_{}.qdimacs", property.replace(':', "")))
    });
    std::fs::write(&out, &text).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    println!(
        "wrote {}: {} variables ({} auxiliary), {} clauses, {} quantifier blocks",
        out.display(),
        cnf.num_vars(),
        cnf.aux.len(),
        cnf.clauses.len(),
        cnf.prefix.len()
    );
    if evaluate {
        println!("built-in evaluator: {}", verdict(cnf.evaluate(qbf::DEFAULT_CNF_BUDGET)?));
    }
    if let Some(cmd) = solver {
        let cfg = SolverConfig::new(cmd).with_timeout(timeout);
        println!("solver: {}", verdict(qbf::run_external(&text, &cfg)?));
    }
    Ok(())
}

fn verdict(b: bool) -> &'static str {
    if b {
        "TRUE"
    } else {
        "FALSE"
    }
}

fn block(text: &str) -> CliResult<VarSet> {
    let names: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    Ok(VarSet::new(names)?)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    reduction: ReductionKind,
    class: Class,
    sentence: &'a Formula,
    formula: &'a Formula,
    blocks: &'a [VarSet],
    fresh: &'a [String],
    expected: bool,
    expected_membership: &'static str,
    mechanism_file: String,
}

fn generate(
    kind: ReductionKind,
    formula: Option<String>,
    blocks: [Option<String>; 3],
    seed: u64,
    nvars: usize,
    size: usize,
    out: Option<PathBuf>,
) -> CliResult {
    let parts = if kind == ReductionKind::Gf { 3 } else { 2 };
    if kind != ReductionKind::Gf && blocks[2].is_some() {
        return Err(Failure::Usage("--forall2 only applies to the gf reduction".into()));
    }
    let phi = match &formula {
        Some(text) => parse(text)?,
        None => reductions::random_formula(seed, nvars, size),
    };
    let given: Vec<&Option<String>> = blocks.iter().take(parts).collect();
    let partition: Vec<VarSet> = if formula.is_none() && given.iter().all(|b| b.is_none()) {
        reductions::random_partition(seed, &reductions::standard_vars(nvars), parts)
    } else {
        given
            .iter()
            .map(|b| block(b.as_deref().unwrap_or("")))
            .collect::<CliResult<_>>()?
    };
    let inst: ReductionInstance = reductions::instance(kind, &phi, &partition)?;

    let out = out.unwrap_or_else(|| PathBuf::from(format!("{kind}_instance.json")));
    let sidecar_path = out.with_extension("expected.json");
    let sidecar = Sidecar {
        reduction: kind,
        class: kind.class(),
        sentence: &inst.sentence,
        formula: &inst.phi,
        blocks: &inst.blocks,
        fresh: &inst.fresh,
        expected: inst.expected,
        expected_membership: if inst.expected { "member" } else { "non-member" },
        mechanism_file: out.file_name().map_or(String::new(), |n| n.to_string_lossy().into_owned()),
    };
    inst.mechanism.save(&out)?;
    let text = serde_json::to_string_pretty(&sidecar).expect("serializable") + "\n";
    std::fs::write(&sidecar_path, text).map_err(|e| Error::Io(format!("{}: {e}", sidecar_path.display())))?;
    println!("sentence: {}", inst.sentence);
    println!("expected: {} of {}", sidecar.expected_membership, kind.class());
    println!("wrote {} and {}", out.display(), sidecar_path.display());
    Ok(())
}
