//! `fusloc`: runs pipeline stages on a permutation group and a prime, and
//! writes one versioned JSON certificate per stage.
//!
//! Exit status: 0 when every stage passed, or only reported unmet
//! hypotheses outside strict mode; 1 when a falsification channel fired;
//! 2 in strict mode when a stage reported or was skipped; 3 on input or
//! usage errors.

mod cache;
mod input;
mod stages;

use clap::Parser;
use input::{load_example, load_file, InputError, Loaded, SylowStrategy, EXAMPLES};
use serde_json::{json, Value};
use stages::{Outcome, Stage, Status};
use std::path::PathBuf;
use std::process::ExitCode;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SCHEMA: &str = include_str!("../schemas/certificate.v1.schema.json");
pub const SCHEMA_FILE: &str = "certificate.v1.schema.json";

#[derive(Parser, Debug)]
#[command(name = "fusloc", version, about = "Certificates for fusion systems, basic localities and perfect localities")]
struct Args {
    /// Group file: {"degree": n, "generators": [[cycles]], "p_generators"?: [[cycles]]}.
    #[arg(long, conflicts_with = "example", required_unless_present_any = ["example", "list_examples"])]
    input: Option<PathBuf>,
    /// Built-in instance instead of a file.
    #[arg(long)]
    example: Option<String>,
    /// Allow the slow built-in instances.
    #[arg(long)]
    slow: bool,
    #[arg(long)]
    list_examples: bool,
    /// The prime; required with --input, checked against the instance with --example.
    #[arg(long, required_unless_present_any = ["example", "list_examples"])]
    prime: Option<u64>,
    #[arg(long, value_enum, default_value = "input")]
    sylow: SylowStrategy,
    /// Stages to run, repeatable; run in dependency order.
    #[arg(long, value_enum, default_value = "verify-all")]
    stage: Vec<Stage>,
    /// Seed for sampled checks and tower choices; recorded in every certificate.
    #[arg(long)]
    seed: Option<u64>,
    /// Treat reported or skipped stages as failures.
    #[arg(long)]
    strict: bool,
    /// Largest group order the closure may reach.
    #[arg(long, default_value_t = 100_000)]
    cap_elements: usize,
    #[arg(long, default_value = "fusloc-out")]
    out: PathBuf,
}

const EXIT_FALSIFIED: u8 = 1;
const EXIT_STRICT: u8 = 2;
const EXIT_INPUT: u8 = 3;

fn load(args: &Args) -> Result<Loaded, InputError> {
    if let Some(name) = &args.example {
        return load_example(name, args.slow, args.prime, args.cap_elements);
    }
    let path = args.input.as_ref().expect("clap requires --input or --example");
    let text = std::fs::read_to_string(path).map_err(|e| InputError::Invalid(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned());
    let p = args.prime.expect("clap requires --prime with --input");
    load_file(name, &text, p, args.sylow, args.cap_elements)
}

fn instance_info(l: &Loaded) -> Value {
    json!({
        "name": l.name,
        "group_order": l.g.order(),
        "p_order": l.p_elems.len(),
        "p_is_sylow": l.sylow,
        "input": l.canonical,
        "input_digest": cache::digest(&serde_json::to_vec(&l.canonical).expect("serializable")),
    })
}

fn certificate(l: &Loaded, stage: Stage, seed: Option<u64>, (status, body): Outcome) -> Vec<u8> {
    let cert = json!({
        "schema": format!("fusloc.certificate.v1/{}", stage.name()),
        "version": VERSION,
        "stage": stage,
        "instance": instance_info(l),
        "seed": seed,
        "status": status,
        "body": body,
    });
    let mut bytes = serde_json::to_vec_pretty(&cert).expect("serializable");
    bytes.push(b'\n');
    bytes
}

fn status_of(bytes: &[u8]) -> Status {
    serde_json::from_slice::<Value>(bytes)
        .ok()
        .and_then(|v| serde_json::from_value(v["status"].clone()).ok())
        .unwrap_or(Status::Falsified)
}

/// Certificates for the requested pipeline stages, in pipeline order.
fn run_stages(l: &Loaded, stages: &[Stage], seed: Option<u64>, cache: &cache::Cache) -> Vec<(Stage, Vec<u8>)> {
    let f = &l.fusion;
    let saturated = f.check_frobenius().passed();
    let key = |st: Stage| cache.key(st.name(), &l.name, &l.canonical, seed);
    let todo: Vec<Stage> = stages.iter().copied().filter(|&st| cache.get(&key(st)).is_none()).collect();
    // each stage builds its own locality: the locality caches through
    // interior mutability and is not shared across threads
    let compute = |st: Stage| -> Outcome {
        if st.needs_saturation() && !saturated {
            return stages::skipped("the fusion system fails the Frobenius axioms");
        }
        match st {
            Stage::Fusion => stages::fusion(f, l.sylow),
            Stage::BasicSet => stages::basic_set(f),
            Stage::Locality => match stages::locality_for(f, 2) {
                Ok(loc) => stages::locality(f, &loc, seed.unwrap_or(0)),
                Err(e) => (Status::Falsified, json!({ "error": e.to_string() })),
            },
            Stage::Cohomology => stages::cohomology(f),
            Stage::Perfect => match stages::locality_for(f, 2) {
                Ok(loc) => stages::perfect(f, &loc, seed),
                Err(e) => (Status::Falsified, json!({ "error": e.to_string() })),
            },
            Stage::VerifyAll => unreachable!("expanded before running"),
        }
    };
    // independent stages run in parallel; output order is fixed afterwards
    let fresh: Vec<(Stage, Vec<u8>)> = std::thread::scope(|s| {
        let handles: Vec<_> =
            todo.iter().map(|&st| (st, s.spawn(move || certificate(l, st, seed, compute(st))))).collect();
        handles.into_iter().map(|(st, h)| (st, h.join().expect("stage thread panicked"))).collect()
    });
    stages
        .iter()
        .map(|&st| match fresh.iter().find(|(s, _)| *s == st) {
            Some((_, bytes)) => {
                cache.put(&key(st), bytes);
                (st, bytes.clone())
            }
            None => (st, cache.get(&key(st)).expect("cached")),
        })
        .collect()
}

fn write(out: &std::path::Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    std::fs::write(out.join(name), bytes)
}

fn run(args: Args) -> ExitCode {
    if args.list_examples {
        for name in EXAMPLES {
            let slow = if input::SLOW_EXAMPLES.contains(name) { " (needs --slow)" } else { "" };
            println!("{name}{slow}");
        }
        return ExitCode::SUCCESS;
    }
    let loaded = match load(&args) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let verify_all = args.stage.contains(&Stage::VerifyAll);
    let mut stages: Vec<Stage> =
        if verify_all { Stage::PIPELINE.to_vec() } else { args.stage.clone() };
    stages.sort();
    stages.dedup();
    let cache = cache::Cache::from_env();
    let results = run_stages(&loaded, &stages, args.seed, &cache);

    let io = (|| -> std::io::Result<()> {
        std::fs::create_dir_all(args.out.join("schemas"))?;
        write(&args.out.join("schemas"), SCHEMA_FILE, SCHEMA.as_bytes())?;
        for (st, bytes) in &results {
            write(&args.out, &format!("{}.json", st.name()), bytes)?;
        }
        if verify_all {
            let summary: serde_json::Map<String, Value> =
                results.iter().map(|(st, b)| (st.name().to_string(), json!(status_of(b)))).collect();
            let worst = results.iter().map(|(_, b)| status_of(b)).max_by_key(|s| severity(*s)).unwrap_or(Status::Pass);
            let outcome = (worst, json!({ "stages": summary }));
            write(&args.out, "verify-all.json", &certificate(&loaded, Stage::VerifyAll, args.seed, outcome))?;
        }
        Ok(())
    })();
    if let Err(e) = io {
        eprintln!("cannot write certificates to {}: {e}", args.out.display());
        return ExitCode::from(EXIT_INPUT);
    }

    let statuses: Vec<Status> = results.iter().map(|(_, b)| status_of(b)).collect();
    for ((st, _), status) in results.iter().zip(&statuses) {
        println!("{:<11} {status:?}", st.name());
    }
    if statuses.contains(&Status::Falsified) {
        ExitCode::from(EXIT_FALSIFIED)
    } else if args.strict && statuses.iter().any(|s| *s != Status::Pass) {
        ExitCode::from(EXIT_STRICT)
    } else {
        ExitCode::SUCCESS
    }
}

fn severity(s: Status) -> u8 {
    match s {
        Status::Pass => 0,
        Status::Report => 1,
        Status::Skipped => 2,
        Status::Falsified => 3,
    }
}

fn main() -> ExitCode {
    match Args::try_parse() {
        Ok(args) => run(args),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            ExitCode::from(code)
        }
    }
}
