use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use seesaw_core::closure::{
    closure_poset, counterexample_report, hasse_edges, induced_check, induced_to_dot, poset_to_dot, ClosureOptions,
    ClosurePoset, InducedReport, SearchBudget, SearchGroup, Verdict,
};
use seesaw_core::forms::{gram_matrix, Epsilon};
use seesaw_core::orbits::{enumerate_orbits, enumerate_symmetric_orbits, OrbitRecord};
use seesaw_core::report::{seesaw_report, seesaw_text, tables_report, tables_text, weyl_report, weyl_text};
use seesaw_core::seesaw::{build_m, build_m0, build_n, coefficient_quiver, QuiverRep};

const EXIT_USAGE: u8 = 2;
const EXIT_UNDECIDED: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "seesaw", version, about = "Borel orbits of square-zero matrices, their closures, and the Seesaw quiver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the B-orbits (or, with --epsilon, the symmetric orbits) for one n.
    Orbits {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<Epsilon>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Closure order on the orbits, as JSON or a Hasse diagram.
    Closure {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<Epsilon>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Exit 0 even if some pairs stay undecided.
        #[arg(long)]
        allow_undecided: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Compare the symmetric closure order with the type-A one.
    Induced {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Epsilon,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Succeed only if a violation is found.
        #[arg(long)]
        expect_violation: bool,
        #[arg(long)]
        allow_undecided: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// M_gamma and N_gamma in types A, B, C, D for n = 2l.
    Counterexample {
        #[arg(long)]
        l: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Recompute the stabilizer and orbit dimension tables.
    Tables {
        #[arg(long, default_value_t = 4)]
        l_max: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Affine Weyl group lengths, conjugation identity, Bruhat order and D_l basis.
    Weyl {
        #[arg(long)]
        l: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// The representations M, N, M0 of the Seesaw algebra.
    Seesaw {
        #[arg(long)]
        l: usize,
        /// Defaults to 2l.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true, default_value = "+1")]
        epsilon: Epsilon,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Representation whose coefficient quiver is printed with --format dot.
        #[arg(long, value_enum, default_value_t = RepChoice::M)]
        rep: RepChoice,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct SearchArgs {
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, default_value_t = SearchBudget::default().trials)]
    trials: u64,
    #[arg(long, default_value_t = SearchBudget::default().max_exponent)]
    max_exponent: i64,
    #[arg(long, default_value_t = SearchBudget::default().max_steps)]
    max_steps: usize,
    /// Search for curve certificates in type A too.
    #[arg(long)]
    certify: bool,
    /// Do not accept type-A pairs on the strength of corner ranks alone.
    #[arg(long = "no-assume-typeA-complete")]
    no_assume_type_a_complete: bool,
}

impl SearchArgs {
    fn options(&self) -> ClosureOptions {
        ClosureOptions {
            budget: SearchBudget {
                trials: self.trials,
                max_exponent: self.max_exponent,
                max_steps: self.max_steps,
            },
            seed: self.seed,
            assume_type_a_complete: !self.no_assume_type_a_complete,
            certify: self.certify,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum RepChoice {
    M,
    N,
    M0,
}

/// A finished command: what goes to stdout and the exit code.
struct Outcome {
    stdout: String,
    code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: 0 }
    }
}

/// Errors that end the run with a usage exit code.
#[derive(Debug)]
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn unsupported(format: Format, command: &str) -> UsageError {
    UsageError(format!("--format {format:?} is not available for {command}").to_lowercase())
}

fn orbit_records(n: usize, epsilon: Option<Epsilon>) -> Result<Vec<OrbitRecord>, UsageError> {
    if n == 0 {
        return Err(UsageError("--n must be positive".into()));
    }
    match epsilon {
        None => Ok(enumerate_orbits(n)),
        Some(e) => {
            let sym = enumerate_symmetric_orbits(n, e)?;
            for o in &sym.omitted {
                eprintln!("omitted {}: {:?}", o.pattern, o.reason);
            }
            Ok(sym.records)
        }
    }
}

fn cmd_orbits(n: usize, epsilon: Option<Epsilon>, format: Format) -> Result<Outcome, UsageError> {
    let records = orbit_records(n, epsilon)?;
    let out = match format {
        Format::Json => pretty(&serde_json::to_value(&records)?),
        Format::Text => {
            let mut s = String::new();
            for r in &records {
                let _ = write!(s, "{:<24} dim_orbit={:<3} dim_stab={:<3}", r.pattern.to_string(), r.dim_orbit, r.dim_stab);
                if let Some(sym) = &r.symmetric {
                    let _ = write!(s, " dim_orbit_eps={:<3} dim_stab_eps={}", sym.dim_orbit_eps, sym.dim_stab_eps);
                }
                s.push('\n');
            }
            s
        }
        Format::Dot => return Err(unsupported(format, "orbits")),
    };
    Ok(Outcome::ok(out))
}

fn pattern_pairs(orbits: &[OrbitRecord], pairs: &[(usize, usize)]) -> Value {
    Value::Array(
        pairs
            .iter()
            .map(|&(i, j)| json!([orbits[i].pattern.to_string(), orbits[j].pattern.to_string()]))
            .collect(),
    )
}

fn poset_json(poset: &ClosurePoset) -> Result<Value, UsageError> {
    let mut relations = Vec::new();
    for i in 0..poset.len() {
        for j in 0..poset.len() {
            if i == j {
                continue;
            }
            let mut rel = serde_json::to_value(poset.get(i, j))?;
            rel["from"] = json!(poset.orbits[i].pattern.to_string());
            rel["to"] = json!(poset.orbits[j].pattern.to_string());
            relations.push(rel);
        }
    }
    Ok(json!({
        "group": poset.kind,
        "epsilon": poset.epsilon,
        "assumed_type_a_complete": poset.assumed_type_a_complete,
        "orbits": poset.orbits,
        "hasse": pattern_pairs(&poset.orbits, &hasse_edges(poset)),
        "undecided": pattern_pairs(&poset.orbits, &poset.undecided_pairs()),
        "relations": relations,
    }))
}

fn poset_text(poset: &ClosurePoset) -> String {
    let mut s = String::new();
    for (i, j) in hasse_edges(poset) {
        let _ = writeln!(s, "{} > {}", poset.orbits[i].pattern, poset.orbits[j].pattern);
    }
    for (i, j) in poset.undecided_pairs() {
        let _ = writeln!(s, "UNDECIDED {} -> {}", poset.orbits[i].pattern, poset.orbits[j].pattern);
    }
    s
}

fn cmd_closure(
    n: usize,
    epsilon: Option<Epsilon>,
    format: Format,
    allow_undecided: bool,
    search: SearchArgs,
) -> Result<Outcome, UsageError> {
    let records = orbit_records(n, epsilon)?;
    let group = match epsilon {
        None => SearchGroup::type_a(n),
        Some(e) => SearchGroup::symmetric(gram_matrix(n, e)?),
    };
    let poset = closure_poset(records, &group, &search.options());
    let out = match format {
        Format::Json => pretty(&poset_json(&poset)?),
        Format::Dot => poset_to_dot(&poset),
        Format::Text => poset_text(&poset),
    };
    let undecided = poset.undecided_pairs();
    for &(i, j) in &undecided {
        eprintln!("undecided: {} -> {}", poset.orbits[i].pattern, poset.orbits[j].pattern);
    }
    let code = if !undecided.is_empty() && !allow_undecided { EXIT_UNDECIDED } else { 0 };
    Ok(Outcome { stdout: out, code })
}

fn induced_json(r: &InducedReport) -> Value {
    json!({
        "n": r.n,
        "epsilon": r.epsilon,
        "violations": pattern_pairs(r.orbits(), &r.violations),
        "undecided": pattern_pairs(r.orbits(), &r.undecided),
        "consistent": pattern_pairs(r.orbits(), &r.consistent),
        "induced": r.violations.is_empty() && r.undecided.is_empty(),
    })
}

fn induced_text(r: &InducedReport) -> String {
    let mut s = format!("n={} epsilon={}\n", r.n, r.epsilon);
    for &p in &r.violations {
        let (a, b) = r.pattern_pair(p);
        let _ = writeln!(s, "VIOLATION {a} -> {b}: related in type A, not in the symmetric order");
    }
    for &p in &r.undecided {
        let (a, b) = r.pattern_pair(p);
        let _ = writeln!(s, "UNDECIDED {a} -> {b}");
    }
    let _ = writeln!(
        s,
        "violations={} undecided={} consistent={}",
        r.violations.len(),
        r.undecided.len(),
        r.consistent.len()
    );
    s
}

fn cmd_induced(
    n: usize,
    epsilon: Epsilon,
    format: Format,
    expect_violation: bool,
    allow_undecided: bool,
    search: SearchArgs,
) -> Result<Outcome, UsageError> {
    if n == 0 {
        return Err(UsageError("--n must be positive".into()));
    }
    let report = induced_check(n, epsilon, &search.options())?;
    let out = match format {
        Format::Json => pretty(&induced_json(&report)),
        Format::Dot => induced_to_dot(&report),
        Format::Text => induced_text(&report),
    };
    let found = !report.violations.is_empty();
    let code = if found != expect_violation {
        EXIT_MISMATCH
    } else if !report.undecided.is_empty() && !allow_undecided {
        EXIT_UNDECIDED
    } else {
        0
    };
    Ok(Outcome { stdout: out, code })
}

fn cmd_counterexample(l: usize, format: Format, search: SearchArgs) -> Result<Outcome, UsageError> {
    let r = counterexample_report(l, &search.options())?;
    let out = match format {
        Format::Json => pretty(&serde_json::to_value(&r)?),
        Format::Text => {
            let mut s = format!("l={} n={}\n", r.l, r.n);
            let row = |name: &str, d: &seesaw_core::closure::PairDims| {
                format!(
                    "{name}: M orbit={} stab={}  N orbit={} stab={}\n",
                    d.dim_orbit_m, d.dim_stab_m, d.dim_orbit_n, d.dim_stab_n
                )
            };
            s.push_str(&row("type A", &r.type_a));
            s.push_str(&row("type B", &r.type_b));
            s.push_str(&row("type C", &r.type_c));
            s.push_str(&row("type D", &r.type_d));
            let _ = writeln!(
                s,
                "type A certificate M -> N: {}",
                match &r.type_a_certificate {
                    Some(c) => format!("found ({} steps)", c.steps.len()),
                    None => "not found".into(),
                }
            );
            let _ = writeln!(s, "type D M -> N: {:?}", r.type_d_m_to_n);
            let _ = writeln!(s, "type D N -> M: {:?}", r.type_d_n_to_m);
            let _ = writeln!(s, "verdict: {:?}", r.verdict);
            s
        }
        Format::Dot => return Err(unsupported(format, "counterexample")),
    };
    let code = if r.verdict == Verdict::NotInduced { 0 } else { EXIT_MISMATCH };
    Ok(Outcome { stdout: out, code })
}

fn cmd_tables(l_max: usize, format: Format) -> Result<Outcome, UsageError> {
    let r = tables_report(l_max)?;
    let out = match format {
        Format::Json => pretty(&serde_json::to_value(&r)?),
        Format::Text => tables_text(&r),
        Format::Dot => return Err(unsupported(format, "tables")),
    };
    Ok(Outcome {
        stdout: out,
        code: if r.mismatches == 0 { 0 } else { EXIT_MISMATCH },
    })
}

fn cmd_weyl(l: usize, format: Format) -> Result<Outcome, UsageError> {
    let r = weyl_report(l)?;
    let out = match format {
        Format::Json => pretty(&serde_json::to_value(&r)?),
        Format::Text => weyl_text(&r),
        Format::Dot => return Err(unsupported(format, "weyl")),
    };
    Ok(Outcome {
        stdout: out,
        code: if r.ok { 0 } else { EXIT_MISMATCH },
    })
}

fn cmd_seesaw(l: usize, n: Option<usize>, epsilon: Epsilon, format: Format, rep: RepChoice) -> Result<Outcome, UsageError> {
    let n = n.unwrap_or(2 * l);
    let r = seesaw_report(l, n, epsilon)?;
    let chosen = |c: RepChoice| -> Result<QuiverRep, UsageError> {
        Ok(match c {
            RepChoice::M => build_m(l, n, epsilon)?,
            RepChoice::N => build_n(l, n)?,
            RepChoice::M0 => build_m0(l, n)?,
        })
    };
    let out = match format {
        Format::Json => pretty(&json!({
            "report": r,
            "representations": {
                "M": chosen(RepChoice::M)?,
                "N": chosen(RepChoice::N)?,
                "M0": chosen(RepChoice::M0)?,
            },
        })),
        Format::Dot => {
            let name = match rep {
                RepChoice::M => "M",
                RepChoice::N => "N",
                RepChoice::M0 => "M0",
            };
            coefficient_quiver(&chosen(rep)?).to_dot(name)
        }
        Format::Text => seesaw_text(&r),
    };
    let ok = r.relations_hold && r.m_symmetric && r.n_symmetric && r.m0_symmetric;
    Ok(Outcome {
        stdout: out,
        code: if ok { 0 } else { EXIT_MISMATCH },
    })
}

fn run(cli: Cli) -> Result<Outcome, UsageError> {
    match cli.command {
        Command::Orbits { n, epsilon, format } => cmd_orbits(n, epsilon, format),
        Command::Closure {
            n,
            epsilon,
            format,
            allow_undecided,
            search,
        } => cmd_closure(n, epsilon, format, allow_undecided, search),
        Command::Induced {
            n,
            epsilon,
            format,
            expect_violation,
            allow_undecided,
            search,
        } => cmd_induced(n, epsilon, format, expect_violation, allow_undecided, search),
        Command::Counterexample { l, format, search } => cmd_counterexample(l, format, search),
        Command::Tables { l_max, format } => cmd_tables(l_max, format),
        Command::Weyl { l, format } => cmd_weyl(l, format),
        Command::Seesaw {
            l,
            n,
            epsilon,
            format,
            rep,
        } => cmd_seesaw(l, n, epsilon, format, rep),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(outcome.stdout.as_bytes());
            ExitCode::from(outcome.code)
        }
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
