use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use kripkekit::category::{cauchy_completion, find_equivalence, FinCategory};
use kripkekit::formula::parse_formula;
use kripkekit::io::{self, Format, PosetFile};
use kripkekit::kripke::{world_names, Evaluator};
use kripkekit::lattice::{FiniteLattice, LatticeFile, UpsetLattice};
use kripkekit::order::Poset;
use kripkekit::profunctor::proofs;
use kripkekit::verify::{run_suite, VerifyOptions, EXPERIMENTAL_SUITES, SUITES};
use kripkekit::Error;

/// Finite-model workbench for intuitionistic modal logic.
#[derive(Parser, Debug)]
#[command(name = "kripkekit", version)]
struct Cli {
    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Largest structure exhaustive enumerators may touch.
    #[arg(long, global = true)]
    size_cap: Option<usize>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Replace the accessibility relation by the least bimodule containing it.
    #[arg(long, global = true)]
    close: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Does the formula hold at a world of a Kripke model?
    Check { model: PathBuf, world: String, formula: String },
    /// Truth set of a formula, computed by both semantics.
    Interp { model: PathBuf, formula: String },
    /// Proof witnesses of a formula at an object of a 2D model.
    Proofs { model: PathBuf, world: String, formula: String },
    /// Karoubi envelope of a category.
    Complete {
        category: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Primes / upper-sets roundtrip for a poset or lattice file.
    Dual { input: PathBuf },
    /// Run a verification suite.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Summary of any input file.
    Info { input: PathBuf },
}

const DEFAULT_CAP: usize = 6;

enum Outcome {
    Yes,
    No,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Yes) => ExitCode::SUCCESS,
        Ok(Outcome::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn emit(cli: &Cli, value: &Value, text: impl FnOnce() -> String) {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
    } else {
        println!("{}", text());
    }
}

fn verdict(b: bool) -> Outcome {
    if b {
        Outcome::Yes
    } else {
        Outcome::No
    }
}

fn run(cli: &Cli) -> kripkekit::Result<Outcome> {
    match &cli.command {
        Command::Check { model, world, formula } => {
            let phi = parse_formula(formula)?;
            let m = io::load_model(model, cli.close)?;
            let w = m.frame().index(world).map_err(|_| Error::UnknownWorld(world.clone()))?;
            let holds = Evaluator::new(&m).check(&phi)? >> w & 1 == 1;
            emit(cli, &json!({ "world": world, "formula": phi.to_string(), "holds": holds }), || {
                holds.to_string()
            });
            Ok(verdict(holds))
        }
        Command::Interp { model, formula } => {
            let phi = parse_formula(formula)?;
            let m = io::load_model(model, cli.close)?;
            let worlds = world_names(m.frame(), Evaluator::new(&m).check(&phi)?);
            emit(cli, &json!({ "formula": phi.to_string(), "worlds": worlds }), || {
                format!("{{{}}}", worlds.join(", "))
            });
            Ok(Outcome::Yes)
        }
        Command::Proofs { model, world, formula } => {
            let phi = parse_formula(formula)?;
            let m = io::load_model2d(model)?;
            let witnesses = proofs(&m, &phi, world)?;
            emit(
                cli,
                &json!({ "world": world, "formula": phi.to_string(), "count": witnesses.len(), "proofs": witnesses }),
                || {
                    let mut out: String = witnesses.iter().map(|w| format!("{w}\n")).collect();
                    out.push_str(&format!("{} proof(s)", witnesses.len()));
                    out
                },
            );
            Ok(verdict(!witnesses.is_empty()))
        }
        Command::Complete { category, output } => complete(category, output.as_deref()),
        Command::Dual { input } => dual(cli, input),
        Command::Verify { suite, count } => {
            let opts = VerifyOptions {
                size_cap: cli.size_cap.unwrap_or(VerifyOptions::default().size_cap),
                seed: cli.seed,
                count: *count,
            };
            let report = run_suite(suite, &opts).map_err(|e| match e {
                Error::UnknownSuite(s) => Error::Invalid(format!(
                    "unknown suite `{s}`; known: {}; experimental: {}",
                    SUITES.join(", "),
                    EXPERIMENTAL_SUITES.join(", ")
                )),
                e => e,
            })?;
            eprintln!("wall time: {:.3}s", report.wall_time.as_secs_f64());
            let value = serde_json::to_value(&report).expect("serializable");
            emit(cli, &value, || {
                let mut s = format!(
                    "{}: {}/{} passed (seed {}, size cap {})",
                    report.suite, report.passed, report.cases, report.seed, report.size_cap
                );
                if let Some(c) = &report.counterexample {
                    s.push_str("\ncounterexample:\n");
                    s.push_str(&serde_json::to_string_pretty(c).expect("serializable"));
                }
                s
            });
            Ok(verdict(report.all_passed()))
        }
        Command::Info { input } => info(cli, input),
    }
}

fn complete(path: &Path, output: Option<&Path>) -> kripkekit::Result<Outcome> {
    let c = Arc::new(io::load_category(path)?);
    if c.is_cauchy_complete() {
        eprintln!("note: input is already Cauchy-complete; the envelope is equivalent to it");
    }
    let k = cauchy_completion(&c).category;
    let text = serde_json::to_string_pretty(&k.to_file()).expect("serializable");
    match output {
        Some(out) => std::fs::write(out, text + "\n").map_err(|e| Error::Io {
            path: out.display().to_string(),
            msg: e.to_string(),
        })?,
        None => println!("{text}"),
    }
    Ok(Outcome::Yes)
}

fn dual(cli: &Cli, path: &Path) -> kripkekit::Result<Outcome> {
    let value = io::read_json(path)?;
    let cap = cli.size_cap.unwrap_or(DEFAULT_CAP);
    let mut frame = None;
    let lattice = match io::sniff(&value) {
        Some(Format::Poset) => {
            let p: PosetFile = io::decode(Format::Poset, value)?;
            let p = Arc::new(p.build()?);
            frame = Some(p.clone());
            UpsetLattice::new(p, cap)?.to_finite_lattice()
        }
        Some(Format::Lattice) => FiniteLattice::from_file(&io::decode::<LatticeFile>(Format::Lattice, value)?)?,
        _ => return Err(Error::Invalid("expected a poset or lattice file".into())),
    };
    match lattice.reconstruct() {
        Ok(r) => {
            let primes = PosetFile::of(r.upsets.base());
            let iso: serde_json::Map<String, Value> = lattice
                .names()
                .iter()
                .zip(&r.iso)
                .map(|(n, &m)| (n.clone(), json!(r.upsets.base().mask_names(m))))
                .collect();
            let back = frame.as_ref().map(|w| match w.isomorphism_to(r.upsets.base()) {
                Some(f) => json!((0..w.len())
                    .map(|i| (w.name(i).to_string(), json!(r.upsets.base().name(f[i]))))
                    .collect::<serde_json::Map<String, Value>>()),
                None => Value::Null,
            });
            let roundtrip_ok = back.as_ref().map_or(true, |b| !b.is_null());
            emit(
                cli,
                &json!({
                    "prime_algebraic": true,
                    "lattice_size": lattice.len(),
                    "primes": primes,
                    "iso": iso,
                    "frame_to_primes": back,
                }),
                || {
                    let mut s = format!(
                        "prime algebraic: {} elements, {} primes\nprimes: {}\n",
                        lattice.len(),
                        primes.elements.len(),
                        serde_json::to_string(&primes).expect("serializable")
                    );
                    for (n, v) in &iso {
                        s.push_str(&format!("{n} -> {v}\n"));
                    }
                    match &back {
                        Some(Value::Object(m)) => {
                            s.push_str("frame to primes:\n");
                            for (n, v) in m {
                                s.push_str(&format!("{n} -> {}\n", v.as_str().unwrap_or_default()));
                            }
                        }
                        Some(_) => s.push_str("frame is NOT isomorphic to its primes\n"),
                        None => {}
                    }
                    s.trim_end().to_string()
                },
            );
            Ok(verdict(roundtrip_ok))
        }
        Err(Error::NotPrimeAlgebraic) => {
            emit(cli, &json!({ "prime_algebraic": false, "lattice_size": lattice.len() }), || {
                "not prime algebraic".into()
            });
            Ok(Outcome::No)
        }
        Err(e) => Err(e),
    }
}

fn category_summary(c: &Arc<FinCategory>) -> Value {
    let completion = cauchy_completion(c).category;
    json!({
        "objects": c.num_objects(),
        "arrows": c.num_arrows(),
        "idempotents": c.idempotents().len(),
        "cauchy_complete": c.is_cauchy_complete(),
        "spacelike": c.is_spacelike(),
        "completion": { "objects": completion.num_objects(), "arrows": completion.num_arrows() },
        "completion_equivalent": find_equivalence(c, &completion, 100_000).witness.is_some(),
    })
}

fn poset_summary(p: &Poset) -> Value {
    json!({ "elements": p.len(), "covers": p.covers().len() })
}

fn info(cli: &Cli, path: &Path) -> kripkekit::Result<Outcome> {
    let value = io::read_json(path)?;
    let format = io::sniff(&value).ok_or_else(|| Error::Invalid("unrecognised file format".into()))?;
    let summary = match format {
        Format::Poset => poset_summary(&io::decode::<PosetFile>(format, value)?.build()?),
        Format::Lattice => {
            let l = FiniteLattice::from_file(&io::decode(format, value)?)?;
            json!({ "elements": l.len(), "primes": l.prime_indices().len(), "prime_algebraic": l.is_prime_algebraic() })
        }
        Format::Model => {
            let m = io::decode::<io::ModelFile>(format, value)?.build(cli.close)?;
            json!({
                "frame": poset_summary(m.frame()),
                "rel_pairs": m.rel().map(|r| r.pairs().len()),
                "variables": m.valuation().keys().collect::<Vec<_>>(),
            })
        }
        Format::Category => category_summary(&Arc::new(FinCategory::from_file(&io::decode(format, value)?)?)),
        Format::Presheaf => {
            let p = io::load_presheaf(path)?;
            json!({ "base": category_summary(p.base()), "sizes": p.sizes(), "total": p.total() })
        }
        Format::Model2d => {
            let m = io::load_model2d(path)?;
            json!({
                "base": category_summary(m.base()),
                "rel_total": m.rel().map(|r| r.as_presheaf().total()),
                "variables": m.valuation().keys().collect::<Vec<_>>(),
            })
        }
    };
    let summary = json!({ "format": format.name(), "summary": summary });
    emit(cli, &summary, || serde_json::to_string_pretty(&summary).expect("serializable"));
    Ok(Outcome::Yes)
}
