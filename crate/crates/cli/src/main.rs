//! `pebblekit`: command-line front end.
//!
//! Exit codes: 0 success or positive answer, 2 input error, 3 inequivalent,
//! 4 not symmetric, 5 symmetric only up to the bound.

use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Parser, Subcommand};
use pebblekit::equivalence::{decide_equivalence, Verdict};
use pebblekit::forest::{build_forest, Forest};
use pebblekit::format::{morphism_from_json, morphism_to_json, natural_to_json, Machine};
use pebblekit::machines::zoo::{zoo, zoo_morphism, ZooMachine, BIMACHINES, MORPHISMS, TWOWAY};
use pebblekit::machines::{Kind, NestedBimachine};
use pebblekit::membership::{
    check_symmetry, decompose_forest, Bitype, Context, Family, Instantiation, NormalizedMachine, SymmetryOptions,
    SymmetryVerdict, SymmetryWitness, TypeKey,
};
use pebblekit::monoid::{Alphabet, Morphism, Symbol};
use pebblekit::random::random_word;
use pebblekit::sst::{compile_pebble, Sst};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SPOT_CHECKS: usize = 32;
const SPOT_CHECK_LENGTH: usize = 16;

#[derive(Parser)]
#[command(
    name = "pebblekit",
    version,
    about = "Unary-output pebble transducers: evaluation, compilation to SSTs, equivalence and blindness checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Machines are given as `zoo:NAME` or as a path to a JSON file.
#[derive(Subcommand)]
enum Command {
    /// Evaluate a machine on a word.
    Eval { machine: String, word: String },
    /// Compile a bimachine or two-way transducer to an SST.
    Compile {
        machine: String,
        /// Where to write the SST; standard output if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Keep registers that never reach the output.
        #[arg(long)]
        no_trim: bool,
        /// Seed of the random words used for the spot check.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decide whether two machines compute the same function.
    Equiv { left: String, right: String },
    /// Check the symmetry condition of a one-marble bimachine.
    Symmetry {
        machine: String,
        /// Maximal length of the idempotent factors u1 and u2.
        #[arg(long)]
        bound: Option<usize>,
        /// Worker threads for the search.
        #[arg(long)]
        jobs: Option<usize>,
        /// Also print K for every context and pair of factors.
        #[arg(long)]
        k_table: bool,
        /// Also print the production of every pair of types.
        #[arg(long)]
        types: bool,
    },
    /// Build a minimum-height factorization forest.
    Forest {
        /// `zoo-morphism:NAME`, `zoo:NAME`, or a morphism or bimachine file.
        morphism: String,
        word: String,
    },
    /// Split a one-marble function into its D, L and I parts on a word.
    Decompose {
        machine: String,
        word: String,
        /// Use this serialized forest instead of building one.
        #[arg(long)]
        forest: Option<String>,
    },
    /// List the built-in machines, or print one as JSON.
    Zoo { name: Option<String> },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Writes to standard output; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn print(v: &Value) {
    emit(&serde_json::to_string_pretty(v).expect("JSON values always serialize"));
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Eval { machine, word } => {
            let m = load_machine(&machine)?;
            let w = parse_word(m.alphabet(), &word)?;
            emit(&m.eval(&w).to_string());
            Ok(0)
        }
        Command::Compile { machine, output, no_trim, seed } => compile(&machine, output, no_trim, seed),
        Command::Equiv { left, right } => {
            let (a, b) = (to_sst(&load_machine(&left)?)?, to_sst(&load_machine(&right)?)?);
            let r = decide_equivalence(&a, &b)?;
            match (r.verdict, r.witness) {
                (Verdict::Inequivalent, Some(w)) => {
                    print(&json!({
                        "verdict": "Inequivalent",
                        "witness": w.rendered,
                        "lhs": natural_to_json(&w.lhs),
                        "rhs": natural_to_json(&w.rhs),
                    }));
                    Ok(3)
                }
                _ => {
                    print(&json!({"verdict": "Equivalent", "basis_size": r.basis_size}));
                    Ok(0)
                }
            }
        }
        Command::Symmetry { machine, bound, jobs, k_table, types } => symmetry(&machine, bound, jobs, k_table, types),
        Command::Forest { morphism, word } => {
            let mu = load_morphism(&morphism)?;
            let w = parse_word(mu.alphabet(), &word)?;
            let f = build_forest(&mu, &w)?;
            print(&json!({"forest": f.serialize(), "height": f.height(), "word": word}));
            Ok(0)
        }
        Command::Decompose { machine, word, forest } => {
            let t = NormalizedMachine::new(&load_bimachine(&machine)?)?;
            let w = parse_word(t.alphabet(), &word)?;
            let f = match forest {
                Some(s) => {
                    let f = Forest::parse(t.morphism(), &s).context("--forest")?;
                    if f.word() != w.as_slice() {
                        bail!("--forest spells {:?}, not {word:?}", t.alphabet().render_word(f.word()));
                    }
                    f
                }
                None => build_forest(t.morphism(), &w)?,
            };
            let d = decompose_forest(&t, &f);
            print(&json!({
                "f_D": natural_to_json(&d.f_d),
                "f_L": natural_to_json(&d.f_l),
                "f_I": natural_to_json(&d.f_i),
                "total": natural_to_json(&d.total),
            }));
            Ok(0)
        }
        Command::Zoo { name: None } => {
            let bimachines: Vec<Value> = BIMACHINES
                .iter()
                .map(|name| {
                    let Ok(ZooMachine::Bimachine(b)) = zoo(name) else { unreachable!("{name} is a bimachine") };
                    json!({"name": name, "kind": b.kind().name(), "level": b.level(), "alphabet": b.alphabet().to_string()})
                })
                .collect();
            print(&json!({"bimachines": bimachines, "twoway": TWOWAY, "morphisms": MORPHISMS}));
            Ok(0)
        }
        Command::Zoo { name: Some(name) } => {
            if let Ok(m) = zoo(&name) {
                print(&zoo_to_machine(m).to_json());
            } else {
                let mu = zoo_morphism(&name).map_err(|_| anyhow!("no zoo machine or morphism named {name:?}"))?;
                print(&morphism_to_json(&mu));
            }
            Ok(0)
        }
    }
}

fn zoo_to_machine(m: ZooMachine) -> Machine {
    match m {
        ZooMachine::Bimachine(b) => Machine::Bimachine(b),
        ZooMachine::TwoWay(t) => Machine::TwoWay(t),
    }
}

fn load_machine(source: &str) -> Result<Machine> {
    if let Some(name) = source.strip_prefix("zoo:") {
        return Ok(zoo_to_machine(zoo(name)?));
    }
    let text = fs::read_to_string(source).with_context(|| format!("reading {source}"))?;
    Machine::parse(&text).with_context(|| format!("loading {source}"))
}

fn load_bimachine(source: &str) -> Result<NestedBimachine> {
    match load_machine(source)? {
        Machine::Bimachine(b) => Ok(b),
        Machine::TwoWay(t) => Ok(t.to_bimachine()?),
        Machine::Sst(_) => bail!("{source} is an SST, expected a bimachine"),
    }
}

/// The morphism a forest is built over. Marble and blind bimachines use the
/// product of the morphisms of all their levels.
fn load_morphism(source: &str) -> Result<Morphism> {
    if let Some(name) = source.strip_prefix("zoo-morphism:") {
        return Ok(zoo_morphism(name)?);
    }
    let b = if source.starts_with("zoo:") {
        load_bimachine(source)?
    } else {
        let text = fs::read_to_string(source).with_context(|| format!("reading {source}"))?;
        let v: Value = serde_json::from_str(&text).with_context(|| format!("loading {source}"))?;
        if v.get("model").is_none() {
            return morphism_from_json(&v, "morphism").with_context(|| format!("loading {source}"));
        }
        load_bimachine(source)?
    };
    if b.kind() == Kind::Pebble {
        return Ok(b.morphism().clone());
    }
    Ok(b.shared_morphism()?.morphism)
}

fn parse_word(alphabet: &Alphabet, word: &str) -> Result<Vec<Symbol>> {
    alphabet.parse_word(word).with_context(|| format!("word {word:?} is not over {alphabet}"))
}

fn to_sst(m: &Machine) -> Result<Sst> {
    Ok(match m {
        Machine::Bimachine(b) => compile_pebble(b)?.trim(),
        Machine::TwoWay(t) => compile_pebble(&t.to_bimachine()?)?.trim(),
        Machine::Sst(s) => s.clone(),
    })
}

fn compile(source: &str, output: Option<PathBuf>, no_trim: bool, seed: u64) -> Result<u8> {
    let m = load_machine(source)?;
    let b = match &m {
        Machine::Bimachine(b) => b.clone(),
        Machine::TwoWay(t) => t.to_bimachine()?,
        Machine::Sst(_) => bail!("{source} is already an SST"),
    };
    let mut sst = compile_pebble(&b)?;
    if !no_trim {
        sst = sst.trim();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SPOT_CHECKS {
        let w = random_word(&mut rng, b.alphabet(), SPOT_CHECK_LENGTH);
        let (expected, got) = (m.eval(&w), sst.eval(&w));
        if expected != got {
            bail!("compiled SST gives {got} on {:?}, machine gives {expected}", b.alphabet().render_word(&w));
        }
    }
    let text = serde_json::to_string_pretty(&Machine::Sst(sst.clone()).to_json())?;
    match output {
        Some(path) => {
            fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            print(&json!({"output": path.display().to_string(), "registers": sst.dim(), "checked": SPOT_CHECKS}));
        }
        None => emit(&text),
    }
    Ok(0)
}

fn context_json(c: &Context) -> Value {
    json!({"m": c.m, "n": c.n, "m1": c.m1, "n1": c.n1, "m2": c.m2, "n2": c.n2})
}

fn bitype_json(a: &Alphabet, b: &Bitype) -> Value {
    json!({
        "left": b.left,
        "u1": a.render_word(&b.u1),
        "mid": b.mid,
        "u2": a.render_word(&b.u2),
        "right": b.right,
    })
}

fn instantiation_json(a: &Alphabet, i: &Instantiation) -> Value {
    json!({
        "family": match i.family { Family::First => 1, Family::Second => 2 },
        "p": i.p,
        "bitype": bitype_json(a, &i.bitype),
        "production": natural_to_json(&i.production),
    })
}

fn witness_json(a: &Alphabet, w: &SymmetryWitness) -> Value {
    json!({
        "context": context_json(&w.context),
        "u1": a.render_word(&w.u1),
        "u2": a.render_word(&w.u2),
        "first": instantiation_json(a, &w.first),
        "second": instantiation_json(a, &w.second),
    })
}

fn type_json(a: &Alphabet, t: &TypeKey) -> Value {
    json!({"m": t.m, "n": t.n, "e": t.e, "m_inner": t.m_inner, "n_inner": t.n_inner, "u": a.render_word(&t.u)})
}

fn symmetry(source: &str, bound: Option<usize>, jobs: Option<usize>, k_table: bool, types: bool) -> Result<u8> {
    let t = NormalizedMachine::new(&load_bimachine(source)?)?;
    let r = check_symmetry(&t, SymmetryOptions { bound, jobs })?;
    let a = t.alphabet();
    let mut report = json!({
        "verdict": r.verdict.name(),
        "bound": r.bound,
        "full_bound": t.word_bound(),
        "monoid_size": t.monoid().size(),
        "witness": r.witness.as_ref().map(|w| witness_json(a, w)),
    });
    if k_table {
        let rows: Vec<Value> = r
            .k_table
            .iter()
            .map(|(c, u1, u2, k)| {
                json!({"context": context_json(&c), "u1": a.render_word(u1), "u2": a.render_word(u2), "k": natural_to_json(k)})
            })
            .collect();
        report["k_table"] = Value::Array(rows);
    }
    if types {
        let rows: Vec<Value> = r
            .k_table
            .type_table(t.monoid())
            .iter()
            .map(|((x, y), k)| json!({"first": type_json(a, x), "second": type_json(a, y), "production": natural_to_json(k)}))
            .collect();
        report["types"] = Value::Array(rows);
    }
    print(&report);
    Ok(match r.verdict {
        SymmetryVerdict::SymmetricComplete => 0,
        SymmetryVerdict::NotSymmetric => 4,
        SymmetryVerdict::SymmetricUpToBound => 5,
    })
}
