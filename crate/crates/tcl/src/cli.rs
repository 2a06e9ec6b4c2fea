//! `tcl` command line. Exit codes: 0 success, 1 logical "no" or empty
//! result, 2 usage error, 3 parse or validation error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use tcl_core::revision::RevisionError;
use tcl_core::scenario::parse_bits;
use tcl_core::text::{parse_concept_assertion, parse_facts, parse_typicality_query};
use tcl_core::{
    build_revised_kb, categorization_score, infer_compound, parse_concept, parse_kb, query_probability,
    serialize_kb, Combination, ConceptExpr, KnowledgeBase, Probability, RationalClosure, RevisedKB, ScenarioError,
    ScenarioStatus, SelectionResult,
};

use crate::exec::Parallel;
use crate::output::{combine_json, combine_table, exact};
use crate::{combination_spec, max_inclusions_from_env, MAX_INCLUSIONS_VAR};

pub const DEFAULT_PRIOR: &str = "0.6";

#[derive(Parser, Debug)]
#[command(name = "tcl", version, about = "Typicality-based concept combination over ALC knowledge bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CombineArgs {
    /// Knowledge base file
    kb: PathBuf,
    #[arg(long)]
    head: String,
    #[arg(long = "modifier", required = true)]
    modifiers: Vec<String>,
    /// Keep only selections with exactly this many inclusions
    #[arg(long = "exactly-k")]
    exactly_k: Option<usize>,
    #[arg(long = "max-inclusions", env = MAX_INCLUSIONS_VAR)]
    max_inclusions: Option<usize>,
    /// Conjunction used for the compound (default: head and modifiers)
    #[arg(long)]
    compound: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Consistency of the knowledge base
    Check { kb: PathBuf },
    /// Rational-closure rank of a concept
    Rank {
        kb: PathBuf,
        #[arg(long)]
        concept: String,
    },
    /// Typicality entailment, e.g. "T(Athlete) <= Fit"
    Entails {
        kb: PathBuf,
        #[arg(long)]
        query: String,
    },
    /// Enumerate and select scenarios for a head/modifier combination
    Combine {
        #[command(flatten)]
        args: CombineArgs,
        /// Print every scenario instead of the surviving block
        #[arg(long)]
        all: bool,
        #[arg(long)]
        json: bool,
    },
    /// Write the knowledge base revised with a selected scenario
    Revise {
        #[command(flatten)]
        args: CombineArgs,
        /// Bit string of a selected scenario, or "auto" for a lone survivor
        #[arg(long, default_value = "auto")]
        scenario: String,
        /// Atom defined as the compound
        #[arg(long)]
        name: Option<String>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Probability of an instance query against a revised knowledge base
    Query {
        kb: PathBuf,
        #[arg(long = "assert")]
        assertion: String,
        #[arg(long, default_value = DEFAULT_PRIOR)]
        prior: String,
        #[arg(long)]
        compound: Option<String>,
    },
    /// Categorization score of a candidate concept for an individual
    Score {
        kb: PathBuf,
        #[arg(long)]
        individual: String,
        #[arg(long)]
        candidate: String,
        #[arg(long)]
        facts: PathBuf,
        /// Prior for facts given without one
        #[arg(long, default_value = DEFAULT_PRIOR)]
        prior: String,
        #[arg(long)]
        compound: Option<String>,
    },
    /// Run the HTTP service
    Serve {
        #[arg(long, default_value_t = 7421)]
        port: u16,
        #[arg(long, env = "TCL_WORKSPACE", default_value = "./workspace")]
        workspace: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    No(String),
    Usage(String),
    Invalid(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::No(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Invalid(_) => 3,
        }
    }
}

type Outcome = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {}", path.display(), e)))
}

fn load(path: &Path) -> Result<KnowledgeBase, Failure> {
    parse_kb(&read(path)?).map_err(|e| Failure::Invalid(format!("{}:{}", path.display(), e)))
}

fn concept(s: &str) -> Result<ConceptExpr, Failure> {
    parse_concept(s).map_err(|e| Failure::Invalid(format!("in {:?}: {}", s, e)))
}

fn probability(s: &str) -> Result<Probability, Failure> {
    Probability::parse(s).map_err(|e| Failure::Invalid(format!("prior {}: {}", s, e)))
}

fn scenario_failure(e: ScenarioError) -> Failure {
    match e {
        ScenarioError::SizeLimit { .. } => Failure::Usage(e.to_string()),
        _ => Failure::Invalid(e.to_string()),
    }
}

fn revision_failure(e: RevisionError) -> Failure {
    match e {
        RevisionError::NotSelected => Failure::No(e.to_string()),
        RevisionError::Scenario(s) => scenario_failure(s),
        _ => Failure::Invalid(e.to_string()),
    }
}

fn select(args: &CombineArgs) -> Result<(KnowledgeBase, tcl_core::CombinationSpec, SelectionResult), Failure> {
    let kb = load(&args.kb)?;
    let max = args.max_inclusions.unwrap_or_else(max_inclusions_from_env);
    let spec = combination_spec(&args.head, &args.modifiers, args.exactly_k, max, args.compound.as_deref())
        .map_err(|e| Failure::Invalid(e.to_string()))?;
    let result = Combination::new(&kb, &spec).map_err(scenario_failure)?.select(&Parallel);
    Ok((kb, spec, result))
}

fn revised_from(kb: KnowledgeBase, compound: Option<&str>) -> Result<RevisedKB, Failure> {
    let compound = match compound {
        Some(c) => concept(c)?,
        None => infer_compound(&kb).ok_or_else(|| {
            Failure::Usage("cannot infer the compound concept; pass --compound".into())
        })?,
    };
    Ok(RevisedKB::from_kb(kb, compound))
}

fn execute(cmd: Command, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Check { kb } => {
            let kb = load(&kb)?;
            if RationalClosure::new(&kb).is_consistent() {
                let _ = writeln!(out, "consistent");
                Ok(0)
            } else {
                let _ = writeln!(out, "inconsistent");
                Ok(1)
            }
        }
        Command::Rank { kb, concept: c } => {
            let kb = load(&kb)?;
            let _ = writeln!(out, "{}", RationalClosure::new(&kb).rank(&concept(&c)?));
            Ok(0)
        }
        Command::Entails { kb, query } => {
            let kb = load(&kb)?;
            let (s, p) = parse_typicality_query(&query).map_err(|e| Failure::Invalid(e.to_string()))?;
            let yes = RationalClosure::new(&kb).entails_typicality(&s, &p);
            let _ = writeln!(out, "{}", if yes { "yes" } else { "no" });
            Ok(if yes { 0 } else { 1 })
        }
        Command::Combine { args, all, json } => {
            let (_, _, result) = select(&args)?;
            if json {
                let text = serde_json::to_string_pretty(&combine_json(&result, all)).expect("serializable");
                let _ = writeln!(out, "{}", text);
            } else {
                let _ = write!(out, "{}", combine_table(&result, all));
            }
            Ok(if result.selected.is_empty() { 1 } else { 0 })
        }
        Command::Revise { args, scenario, name, output } => {
            let (kb, spec, result) = select(&args)?;
            let chosen = if scenario == "auto" {
                match result.selected.as_slice() {
                    [one] => one,
                    [] => return Err(Failure::No("no admissible scenario".into())),
                    many => {
                        let bits: Vec<String> = many.iter().map(|r| r.selection.bit_string()).collect();
                        return Err(Failure::Usage(format!(
                            "surviving block has {} scenarios ({}); choose one with --scenario",
                            many.len(),
                            bits.join(", ")
                        )));
                    }
                }
            } else {
                let bits = parse_bits(&scenario)
                    .ok_or_else(|| Failure::Usage(format!("scenario {:?} is not a bit string", scenario)))?;
                result
                    .find(&bits)
                    .filter(|r| r.status == ScenarioStatus::Selected)
                    .ok_or_else(|| Failure::No(format!("scenario {} is not in the surviving block", scenario)))?
            };
            let revised = build_revised_kb(&kb, &spec, chosen, name.as_deref()).map_err(revision_failure)?;
            std::fs::write(&output, serialize_kb(&revised.kb))
                .map_err(|e| Failure::Usage(format!("{}: {}", output.display(), e)))?;
            let _ = writeln!(
                out,
                "wrote {} ({} inclusions for {})",
                output.display(),
                revised.provenance.len(),
                revised.compound
            );
            Ok(0)
        }
        Command::Query { kb, assertion, prior, compound } => {
            let revised = revised_from(load(&kb)?, compound.as_deref())?;
            let (c, a) = parse_concept_assertion(&assertion).map_err(|e| Failure::Invalid(e.to_string()))?;
            let p = query_probability(&revised, &c, &a, &probability(&prior)?).map_err(revision_failure)?;
            let _ = writeln!(out, "{}", exact(p.value()));
            Ok(if p.value() == &BigRational::from_integer(0.into()) { 1 } else { 0 })
        }
        Command::Score { kb, individual, candidate, facts, prior, compound } => {
            let revised = revised_from(load(&kb)?, compound.as_deref())?;
            let default = probability(&prior)?;
            let parsed = parse_facts(&read(&facts)?)
                .map_err(|e| Failure::Invalid(format!("{}:{}", facts.display(), e)))?;
            let mut list = Vec::new();
            for (p, c, a) in parsed {
                if a != individual {
                    return Err(Failure::Invalid(format!("fact about {} does not concern {}", a, individual)));
                }
                list.push((c, p.unwrap_or_else(|| default.clone())));
            }
            let cand = concept(&candidate)?;
            let mut tmp = revised.clone();
            tmp.kb = tmp.kb.with_assertion(tcl_core::Assertion::concept(cand.clone(), &individual));
            for (c, p) in &list {
                let v = query_probability(&tmp, c, &individual, p).map_err(revision_failure)?;
                let _ = writeln!(out, "{:<10} {}", exact(v.value()), tcl_core::text::format_assertion(
                    &tcl_core::Assertion::concept(c.clone(), &individual)
                ));
            }
            let total = categorization_score(&revised, &cand, &individual, &list).map_err(revision_failure)?;
            let _ = writeln!(out, "score {}", exact(&total));
            Ok(0)
        }
        Command::Serve { port, workspace } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Usage(e.to_string()))?;
            let _ = writeln!(out, "listening on 0.0.0.0:{} (workspace {})", port, workspace.display());
            let _ = out.flush();
            rt.block_on(crate::service::serve(port, workspace, max_inclusions_from_env()))
                .map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(0)
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{}", text);
            } else {
                let _ = write!(err, "{}", text);
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let msg = match &f {
                Failure::No(m) | Failure::Usage(m) | Failure::Invalid(m) => m,
            };
            let _ = writeln!(err, "error: {}", msg);
            f.code()
        }
    }
}
