use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use parasymm::emptiness::Limits;
use parasymm::hoare::{
    ashcroft_check, basis_from_json, basis_to_json, deextend, extract_triples, AshcroftInvariant,
    Checker,
};
use parasymm::program::{instantiate, word_to_string, Letter, OracleResult, ProgramSpec};
use parasymm::topology::{eq_classes, parse_topology, sub_k_family, Kind, Structure};
use parasymm::translate::{add_initialization, basis_to_pa, program_to_pa};
use parasymm::verify::{verify, Mode, Options, Verdict};
use parasymm::Error;

#[derive(Parser)]
#[command(
    name = "parasymm",
    version,
    about = "Verify parameterized Boolean programs over symmetric topologies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Maximal,
    Refine,
}

#[derive(Subcommand)]
enum Command {
    /// Decide safety of a program over a limit topology.
    Verify {
        #[arg(long)]
        program: PathBuf,
        /// `star`, `forest:<h>`, or a finite selector such as `ring:3`.
        #[arg(long)]
        topology: String,
        #[arg(long, value_enum, default_value = "maximal")]
        mode: ModeArg,
        /// Starting basis for refine mode.
        #[arg(long)]
        basis: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        #[arg(long, default_value_t = 64)]
        max_rounds: usize,
        /// Disable covering pruning in the emptiness search.
        #[arg(long)]
        no_pruning: bool,
        /// Write the final basis here.
        #[arg(long)]
        emit_basis: Option<PathBuf>,
        /// Write the program and proof automata to `<prefix>.program.json`
        /// and `<prefix>.proof.json`.
        #[arg(long)]
        emit_pa: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Explicit-state safety check of one finite instance.
    Oracle {
        #[arg(long)]
        program: PathBuf,
        /// `star`, `ring`, `forest:<h>`, or a complete finite selector.
        #[arg(long)]
        topology: String,
        /// Instance parameters: threads for stars, size for rings,
        /// `branching,trees` for forests.
        #[arg(long)]
        params: Option<String>,
        #[arg(long, default_value_t = 5_000_000)]
        max_states: usize,
        #[arg(long)]
        json: bool,
    },
    /// List the classes of d-tuples with representatives and formulas.
    Classes {
        #[arg(long)]
        topology: String,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        json: bool,
    },
    /// Check a width-k invariant on the rank-k downward closure of a
    /// finite family and derive a standard basis from it.
    Ashcroft {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        invariant: PathBuf,
        #[arg(long)]
        rank: usize,
        /// Family: `ring`, `star` or `forest:<h>`.
        #[arg(long, default_value = "ring")]
        topology: String,
        /// Largest family parameter sampled before taking the closure.
        #[arg(long, default_value_t = 6)]
        max_size: u32,
        /// Write each member's deextended basis to `<prefix>.<i>.json`.
        #[arg(long)]
        emit_basis: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

/// Exit status and report of a subcommand.
struct Outcome {
    code: u8,
    text: String,
    json: Value,
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<ProgramSpec, Error> {
    ProgramSpec::from_json(&read(path)?)
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn word_json(w: &[Letter]) -> Value {
    json!({
        "text": word_to_string(w),
        "letters": w.iter().map(|l| json!({"command": &*l.command, "node": l.node.to_string()})).collect::<Vec<_>>(),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let json = match &cli.command {
        Command::Verify { json, .. }
        | Command::Oracle { json, .. }
        | Command::Classes { json, .. }
        | Command::Ashcroft { json, .. } => *json,
    };
    match run(cli.command) {
        Ok(out) => {
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&out.json).expect("values serialize")
                );
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            let code = if matches!(e, Error::Limit(_)) { 2 } else { 3 };
            if json {
                println!("{}", json!({"error": e.to_string()}));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(code)
        }
    }
}

fn run(cmd: Command) -> Result<Outcome, Error> {
    match cmd {
        Command::Verify {
            program,
            topology,
            mode,
            basis,
            max_steps,
            max_rounds,
            no_pruning,
            emit_basis,
            emit_pa,
            ..
        } => {
            let spec = load_program(&program)?;
            let s = parse_topology(&topology)?;
            if !s.is_homogeneous() && !s.is_finite() {
                return Err(Error::NotHomogeneous);
            }
            let opts = Options {
                mode: match mode {
                    ModeArg::Maximal => Mode::Maximal,
                    ModeArg::Refine => Mode::Refine,
                },
                limits: Limits {
                    max_steps,
                    pruning: !no_pruning,
                    ..Limits::default()
                },
                basis: match &basis {
                    Some(p) => basis_from_json(&read(p)?)?,
                    None => Vec::new(),
                },
                max_rounds,
            };
            cmd_verify(&spec, &s, &opts, emit_basis.as_deref(), emit_pa.as_deref())
        }
        Command::Oracle {
            program,
            topology,
            params,
            max_states,
            ..
        } => {
            let spec = load_program(&program)?;
            let sel = match params {
                Some(p) => format!("{topology}:{}", p.replace(',', ":")),
                None => topology,
            };
            let s = parse_topology(&sel)?;
            if !s.is_finite() {
                return Err(Error::InfiniteStructure);
            }
            cmd_oracle(&spec, &s, max_states)
        }
        Command::Classes { topology, dim, .. } => {
            if dim == 0 || dim > 4 {
                return Err(Error::Schema(format!(
                    "dimension must be between 1 and 4, got {dim}"
                )));
            }
            cmd_classes(&parse_topology(&topology)?, dim)
        }
        Command::Ashcroft {
            program,
            invariant,
            rank,
            topology,
            max_size,
            emit_basis,
            ..
        } => {
            let spec = load_program(&program)?;
            let inv = AshcroftInvariant::from_json(&read(&invariant)?)?;
            if rank == 0 {
                return Err(Error::Schema("rank must be positive".into()));
            }
            let members = family(&topology, max_size)?;
            cmd_ashcroft(&spec, &inv, &members, rank, emit_basis.as_deref())
        }
    }
}

fn cmd_verify(
    spec: &ProgramSpec,
    s: &Structure,
    opts: &Options,
    emit_basis: Option<&Path>,
    emit_pa: Option<&Path>,
) -> Result<Outcome, Error> {
    let report = verify(spec, s, opts)?;
    if let Some(p) = emit_basis {
        write(p, &basis_to_json(&report.basis)?)?;
    }
    if let Some(prefix) = emit_pa {
        let ap = program_to_pa(spec, s)?;
        let ah = add_initialization(
            &basis_to_pa(&report.basis, s, &spec.alphabet(), spec.domain_size())?.automaton,
        );
        write(&prefix.with_extension("program.json"), &ap.to_json()?)?;
        write(&prefix.with_extension("proof.json"), &ah.to_json()?)?;
    }
    let expansions: usize = report.rounds.iter().map(|r| r.stats.expansions).sum();
    let mode = match opts.mode {
        Mode::Maximal => "maximal",
        Mode::Refine => "refine",
    };
    let mut text = String::new();
    let mut j = json!({
        "topology": s.label(),
        "mode": mode,
        "basis_size": report.basis.len(),
        "expansions": expansions,
        "rounds": report.rounds.iter().map(|r| json!({
            "basis_size": r.basis_size,
            "counterexample": r.counterexample.as_deref().map(word_json),
            "feasible": r.feasible,
            "refuted": r.refuted,
            "stats": r.stats,
        })).collect::<Vec<_>>(),
    });
    match &report.verdict {
        Verdict::Safe => {
            text.push_str("safe\n");
            j["verdict"] = json!("safe");
        }
        Verdict::Unsafe {
            witness,
            instance,
            replay,
        } => {
            text.push_str(&format!("unsafe\nwitness: {}\n", word_to_string(witness)));
            text.push_str(&format!(
                "replayed on {}: {}\n",
                instance.label(),
                word_to_string(replay)
            ));
            j["verdict"] = json!("unsafe");
            j["witness"] = word_json(witness);
            j["instance"] = json!(instance.label());
            j["replay"] = word_json(replay);
        }
        Verdict::Unknown(m) => {
            text.push_str(&format!("unknown: {m}\n"));
            for (i, r) in report.rounds.iter().enumerate() {
                let cex = r
                    .counterexample
                    .as_deref()
                    .map(word_to_string)
                    .unwrap_or_else(|| "-".into());
                text.push_str(&format!("  round {i}: basis {} cex {cex}\n", r.basis_size));
            }
            j["verdict"] = json!("unknown");
            j["reason"] = json!(m);
        }
    }
    text.push_str(&format!(
        "mode {mode}, {} rounds, final basis {} triples, {expansions} expansions\n",
        report.rounds.len(),
        report.basis.len()
    ));
    Ok(Outcome {
        code: report.verdict.exit_code() as u8,
        text,
        json: j,
    })
}

fn cmd_oracle(spec: &ProgramSpec, s: &Structure, max_states: usize) -> Result<Outcome, Error> {
    let inst = instantiate(spec, s)?;
    Ok(match inst.oracle_check(max_states) {
        OracleResult::Safe { states } => Outcome {
            code: 0,
            text: format!("safe ({states} states on {})\n", s.label()),
            json: json!({"verdict": "safe", "instance": s.label(), "states": states}),
        },
        OracleResult::Unsafe(w) => Outcome {
            code: 1,
            text: format!("unsafe on {}\nwitness: {}\n", s.label(), word_to_string(&w)),
            json: json!({"verdict": "unsafe", "instance": s.label(), "witness": word_json(&w)}),
        },
        OracleResult::Unknown { states } => Outcome {
            code: 2,
            text: format!("unknown: state bound reached after {states} states\n"),
            json: json!({"verdict": "unknown", "instance": s.label(), "states": states}),
        },
    })
}

fn cmd_classes(s: &Structure, d: usize) -> Result<Outcome, Error> {
    let classes = eq_classes(s, d)?;
    let mut text = format!("{} classes of {d}-tuples on {}\n", classes.len(), s.label());
    let mut list = Vec::new();
    for c in &classes {
        let rep: Vec<String> = c.representative.iter().map(|n| n.to_string()).collect();
        text.push_str(&format!("  ({})  {}\n", rep.join(", "), c.formula));
        list.push(json!({"representative": rep, "formula": c.formula.to_string()}));
    }
    Ok(Outcome {
        code: 0,
        text,
        json: json!({"topology": s.label(), "dim": d, "classes": list}),
    })
}

/// Finite members sampled from a family, smallest first.
fn family(sel: &str, max_size: u32) -> Result<Vec<Structure>, Error> {
    if sel == "ring" {
        return (2..=max_size.max(2)).map(Structure::ring).collect();
    }
    let s = parse_topology(sel)?;
    if s.is_finite() {
        return Ok(vec![s]);
    }
    match s.kind() {
        Kind::Star => Ok((1..=max_size).map(Structure::star).collect()),
        Kind::Ring { .. } => unreachable!("ring selectors are finite"),
        Kind::Forest { height } => (1..=max_size.min(2))
            .map(|k| Structure::forest(height, k, k))
            .collect(),
    }
}

fn cmd_ashcroft(
    spec: &ProgramSpec,
    inv: &AshcroftInvariant,
    members: &[Structure],
    rank: usize,
    emit_basis: Option<&Path>,
) -> Result<Outcome, Error> {
    let closure = sub_k_family(members, rank)?;
    let mut text = format!("{} members in the rank-{rank} closure\n", closure.len());
    let mut rows = Vec::new();
    let mut all_ok = true;
    let mut standard = 0;
    for (i, m) in closure.iter().enumerate() {
        let report = ashcroft_check(spec, m, inv)?;
        let triples = extract_triples(spec, m, inv)?;
        let mut ch = Checker::new(spec, m);
        let mut invalid = 0;
        for t in &triples {
            if !ch.valid(t)? {
                invalid += 1;
            }
        }
        let plain = deextend(spec, m, &triples)?;
        let mut plain_invalid = 0;
        for t in &plain {
            if !ch.valid(t)? {
                plain_invalid += 1;
            }
        }
        let ok = report.passed() && invalid == 0 && plain_invalid == 0;
        all_ok &= ok;
        text.push_str(&format!(
            "  {} ({} nodes): init {} cont {} safe {}, {} triples ({invalid} invalid), {} deextended ({plain_invalid} invalid)\n",
            m.label(),
            m.size().unwrap_or(0),
            report.init,
            report.cont,
            report.safe,
            triples.len(),
            plain.len(),
        ));
        for f in &report.failures {
            text.push_str(&format!("    {} fails at {}\n", f.condition, f.state));
        }
        rows.push(json!({
            "member": m.label(),
            "size": m.size(),
            "init": report.init,
            "cont": report.cont,
            "safe": report.safe,
            "failures": report.failures.iter().map(|f| json!({"condition": f.condition, "state": f.state})).collect::<Vec<_>>(),
            "triples": triples.len(),
            "invalid_triples": invalid,
            "deextended": plain.len(),
            "invalid_deextended": plain_invalid,
        }));
        standard += plain.len();
        if let Some(p) = emit_basis {
            write(
                &p.with_extension(format!("{i}.json")),
                &basis_to_json(&plain)?,
            )?;
        }
    }
    text.push_str(if all_ok {
        "all checks passed\n"
    } else {
        "some checks failed\n"
    });
    Ok(Outcome {
        code: if all_ok { 0 } else { 1 },
        text,
        json: json!({"passed": all_ok, "rank": rank, "members": rows, "standard_basis_size": standard}),
    })
}
