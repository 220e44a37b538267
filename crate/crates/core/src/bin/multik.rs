use clap::{Parser, Subcommand};
use multik::compare::{check_e_naturality, k0, phi_object_in, pi0_comparison, PhiIndex};
use multik::report::Report;
use multik::sdot::{enumerate_sdot, Shape};
use multik::segal::enumerate_segal;
use multik::suite::{load_structure, multinat_for, mutate, run_suite_timed, Fixture, REPORT_SCHEMA, VALIDATORS, WINDOW_BUDGET};
use multik::fincat::{iso_classes, Cat};
use multik::wald::{lambda, WaldCat};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exhaustive checks of Waldhausen and Segal K-theory on small fixtures.
///
/// FIXTURE is a fixture file or a built-in name: pointed_sets(N) for
/// 1 <= N <= 4, vect_f2(N) for 1 <= N <= 2 (also written pointed_sets:N).
#[derive(Parser)]
#[command(name = "multik", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the structural validators.
    Validate { fixture: String },
    /// Count S-construction diagrams of a shape.
    Enumerate {
        #[arg(long, value_delimiter = ',', required = true)]
        shape: Vec<usize>,
        fixture: String,
    },
    /// Apply phi to every Segal system over a context and validate the results.
    Phi {
        #[arg(long, value_delimiter = ',', required = true)]
        context: Vec<usize>,
        fixture: String,
    },
    /// Check E-naturality of phi on a window (R, D).
    Naturality {
        #[arg(long, value_delimiter = ',', required = true)]
        window: Vec<usize>,
        fixture: String,
    },
    /// Check multinaturality of phi for a multiexact functor (smash or identity).
    Multinat {
        #[arg(long, default_value = "smash")]
        functor: String,
        fixture: String,
    },
    /// Compare components of the two level-m constructions.
    Pi0 {
        #[arg(long)]
        m: usize,
        fixture: String,
    },
    /// Rank and torsion of K0.
    K0 { fixture: String },
    /// Run checks in dependency order and report every verdict.
    Suite {
        fixture: String,
        /// Comma-separated check names; all checks when absent.
        #[arg(long)]
        checks: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plant one fault in a fixture and print the result.
    Mutate {
        #[arg(long)]
        kind: String,
        fixture: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a fixture as JSON.
    Export {
        fixture: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(v: &Value, out: Option<&PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(v).expect("values serialize") + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn envelope(command: &str, fx: &Fixture, body: Value) -> Value {
    let mut v = json!({ "schema": REPORT_SCHEMA, "command": command, "fixture": fx.name });
    if let (Value::Object(m), Value::Object(b)) = (&mut v, body) {
        m.extend(b);
    }
    v
}

fn verdict_of(r: &Report) -> Value {
    json!({ "verdict": r.verdict(), "report": r })
}

/// Exit 0 when nothing failed, 1 when a check failed, 2 on usage or I/O errors.
fn run(cli: Cli) -> Result<bool, String> {
    let load = |arg: &str| Fixture::load(arg);
    match cli.cmd {
        Cmd::Suite { fixture, checks, out } => {
            let fx = load(&fixture)?;
            let list: Option<Vec<String>> = checks.map(|c| c.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect());
            let (report, timings) = run_suite_timed(&fx, list.as_deref())?;
            for (name, t) in &timings {
                eprintln!("{name:>16} {:>8} ms", t.as_millis());
            }
            match out {
                Some(p) => report.write(&p)?,
                None => print!("{}", report.to_json()),
            }
            Ok(report.ok())
        }
        Cmd::Validate { fixture } => {
            let fx = load(&fixture)?;
            let list: Vec<String> = VALIDATORS.iter().map(|s| s.to_string()).collect();
            let (report, _) = run_suite_timed(&fx, Some(&list))?;
            print!("{}", report.to_json());
            Ok(report.ok())
        }
        Cmd::Mutate { kind, fixture, out } => {
            let m = mutate(&load(&fixture)?, &kind)?;
            match out {
                Some(p) => std::fs::write(&p, m.to_json()).map_err(|e| format!("{}: {e}", p.display()))?,
                None => print!("{}", m.to_json()),
            }
            Ok(true)
        }
        Cmd::Export { fixture, out } => {
            let fx = load(&fixture)?;
            match out {
                Some(p) => std::fs::write(&p, fx.to_json()).map_err(|e| format!("{}: {e}", p.display()))?,
                None => print!("{}", fx.to_json()),
            }
            Ok(true)
        }
        cmd => {
            let fixture = match &cmd {
                Cmd::Enumerate { fixture, .. }
                | Cmd::Phi { fixture, .. }
                | Cmd::Naturality { fixture, .. }
                | Cmd::Multinat { fixture, .. }
                | Cmd::Pi0 { fixture, .. }
                | Cmd::K0 { fixture } => fixture.clone(),
                _ => unreachable!(),
            };
            let fx = load(&fixture)?;
            let (w, om) = match load_structure(&fx) {
                Ok(x) => x,
                Err(r) => {
                    emit(&envelope("load", &fx, verdict_of(&r)), None)?;
                    return Ok(false);
                }
            };
            let s = lambda(&w, om);
            let (name, body, ok) = match cmd {
                Cmd::Enumerate { shape, .. } => {
                    let e = enumerate_sdot(&w, &Shape::new(&shape)).map_err(|e| e.to_string())?;
                    let body = json!({ "shape": shape, "count": e.diagrams.len(), "absent": e.absent, "rejected": e.rejected });
                    ("enumerate", body, true)
                }
                Cmd::Phi { context, .. } => {
                    let e = enumerate_segal(&s, &context).map_err(|e| e.to_string())?;
                    let px = PhiIndex::new(&context);
                    let mut r = Report::new();
                    for sys in &e.systems {
                        r.merge(phi_object_in(&s, &px, sys).report);
                    }
                    let ok = r.is_ok();
                    let mut body = verdict_of(&r);
                    body["context"] = json!(context);
                    body["systems"] = json!(e.systems.len());
                    ("phi", body, ok)
                }
                Cmd::Naturality { window, .. } => {
                    if window.len() != 2 {
                        return Err(format!("--window takes R,D, got {window:?}"));
                    }
                    let r = check_e_naturality(&s, window[0], window[1], WINDOW_BUDGET);
                    let mut body = verdict_of(&r);
                    body["window"] = json!(window);
                    ("naturality", body, r.is_ok())
                }
                Cmd::Multinat { functor, .. } => {
                    let r = multinat_for(&fx, &s, &functor)?;
                    let mut body = verdict_of(&r);
                    body["functor"] = json!(functor);
                    ("multinat", body, r.is_ok())
                }
                Cmd::Pi0 { m, .. } => {
                    let r = pi0_comparison(&s, m);
                    let mut body = verdict_of(&r);
                    body["m"] = json!(m);
                    ("pi0", body, r.is_ok())
                }
                Cmd::K0 { .. } => {
                    let g = k0(&w).map_err(|e| e.to_string())?;
                    ("k0", json!({ "rank": g.rank, "torsion": g.torsion, "iso_classes": iso_classes(&w).len(), "zero": w.obj_name(w.zero()) }), true)
                }
                _ => unreachable!(),
            };
            emit(&envelope(name, &fx, body), None)?;
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("multik: {e}");
            ExitCode::from(2)
        }
    }
}
