//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use multik::compare::{check_e_generator, check_e_naturality, k0, phi_object_in, pi0_comparison, PhiIndex};
use multik::ecat::{e_compose, window_generators, EMor};
use multik::report::{Report, Verdict};
use multik::sdot::{iterated_agreement, wald_k_level};
use multik::segal::{enumerate_segal, segal_k_level};
use multik::simplicial::{all_monotone, check_circle_contravariance, validate_simplicial};
use multik::suite::{
    load_structure, multinat_for, mutate, mutation_target, run_suite, Fixture, MUTATIONS, PHI_CONTEXTS, VALIDATORS,
    WINDOW_BUDGET,
};
use multik::wald::{lambda, WaldStruct, WedgeChoice};
use std::process::ExitCode;
use std::time::Instant;

struct Loaded {
    fx: Fixture,
    w: WaldStruct,
    om: WedgeChoice,
}

fn load(fx: Fixture) -> Loaded {
    let (w, om) = load_structure(&fx).unwrap_or_else(|r| panic!("{} does not load: {r}", fx.name));
    Loaded { fx, w, om }
}

type Outcome = Result<String, String>;

fn clean(what: &str, r: &Report) -> Result<(), String> {
    if r.is_clean() && r.checked > 0 {
        Ok(())
    } else {
        Err(format!("{what}: {:?}, {} checked, failed laws {:?}", r.verdict(), r.checked, r.failed_laws()))
    }
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn axiom_suites(fixtures: &[Loaded]) -> Outcome {
    let checks = strings(&VALIDATORS);
    let mut caught = 0;
    for l in fixtures {
        let r = run_suite(&l.fx, Some(&checks))?;
        if !r.ok() || r.summary.pass != VALIDATORS.len() as u64 {
            return Err(format!("{} validators: {:?}", l.fx.name, r.summary));
        }
        for kind in MUTATIONS {
            let m = mutate(&l.fx, kind)?;
            let r = run_suite(&m, Some(&checks))?;
            let failed: Vec<&str> = r.checks.iter().filter(|c| c.verdict == Verdict::Fail).map(|c| c.name.as_str()).collect();
            if failed != [mutation_target(kind).unwrap()] {
                return Err(format!("{kind} on {}: failing checks {failed:?}", l.fx.name));
            }
            caught += 1;
        }
    }
    Ok(format!("{} validators clean on both fixtures; {caught}/10 mutations caught only by their target", VALIDATORS.len()))
}

fn phi_well_defined(p3: &Loaded) -> Outcome {
    let s = lambda(&p3.w, p3.om.clone());
    let mut counts = Vec::new();
    for dims in PHI_CONTEXTS {
        let px = PhiIndex::new(dims);
        let systems = enumerate_segal(&s, dims).map_err(|e| e.to_string())?.systems;
        for sys in &systems {
            let res = phi_object_in(&s, &px, sys);
            if res.diagram.is_none() || res.report.verdict() != Verdict::Pass {
                return Err(format!("{dims:?}: {:?} {}", res.report.verdict(), res.report));
            }
        }
        counts.push(format!("{dims:?}:{}", systems.len()));
    }
    Ok(format!("every system maps to a valid diagram ({})", counts.join(" ")))
}

/// The named generators of the criterion, each checked on every system of its
/// source context, on top of the full window check.
fn named_generators() -> Vec<EMor> {
    let mut out = Vec::new();
    for b in all_monotone(1, 2).into_iter().chain(all_monotone(2, 1)) {
        out.push(EMor::simplicial(vec![b]));
    }
    out.push(EMor::perm(&[1, 1], &[0, 1]));
    out.push(EMor::perm(&[1, 1], &[1, 0]));
    out.push(EMor::iota(&[1]));
    out.push(e_compose(&EMor::perm(&[1, 1], &[1, 0]), &EMor::iota(&[1])).unwrap());
    out
}

fn e_naturality(fixtures: &[Loaded]) -> Outcome {
    let gens = window_generators(2, 2);
    let named = named_generators();
    for f in named.iter().filter(|f| f.src.len() == f.tgt.len() && !f.is_identity()) {
        if !gens.contains(f) {
            return Err(format!("generator {f:?} missing from the window"));
        }
    }
    let mut notes = Vec::new();
    for l in fixtures {
        let s = lambda(&l.w, l.om.clone());
        let r = check_e_naturality(&s, 2, 2, WINDOW_BUDGET);
        clean(&l.fx.name, &r)?;
        for f in &named {
            for sys in &enumerate_segal(&s, &f.src).map_err(|e| e.to_string())?.systems {
                clean(&format!("{} {f:?}", l.fx.name), &check_e_generator(&s, f, sys))?;
            }
        }
        notes.push(format!("{}: {} checks, {}", l.fx.name, r.checked, r.notes.join("; ")));
    }
    Ok(notes.join(" | "))
}

fn multinaturality(p3: &Loaded) -> Outcome {
    let s = lambda(&p3.w, p3.om.clone());
    let r = multinat_for(&p3.fx, &s, "smash")?;
    clean("smash", &r)?;
    Ok(format!("smash and twist modification: {} checks", r.checked))
}

fn iterated(p3: &Loaded) -> Outcome {
    let mut notes = Vec::new();
    for (m1, m2) in [(1, 1), (2, 1), (1, 2)] {
        let r = iterated_agreement(&p3.w, m1, m2).map_err(|e| e.to_string())?;
        clean(&format!("({m1},{m2})"), &r)?;
        notes.extend(r.notes);
    }
    Ok(notes.join("; "))
}

fn extension(fixtures: &[Loaded]) -> Outcome {
    let checks = strings(&["extension"]);
    let mut total = 0;
    for l in fixtures {
        let r = run_suite(&l.fx, Some(&checks))?;
        let c = r.check("extension").unwrap();
        clean(&l.fx.name, &c.report)?;
        total += c.report.checked;
    }
    Ok(format!("sdot and segal round trips and counts on [1] [2] [1,1]: {total} checks"))
}

fn pi0(fixtures: &[Loaded]) -> Outcome {
    let mut notes = Vec::new();
    for l in fixtures {
        let s = lambda(&l.w, l.om.clone());
        for m in 1..=2 {
            let r = pi0_comparison(&s, m);
            clean(&format!("{} m={m}", l.fx.name), &r)?;
        }
        notes.push(l.fx.name.clone());
    }
    Ok(format!("bijection for m = 1, 2 on {}", notes.join(", ")))
}

fn k0_rank(fixtures: &[Loaded]) -> Outcome {
    let mut notes = Vec::new();
    for l in fixtures {
        let g = k0(&l.w).map_err(|e| e.to_string())?;
        if g.rank != 1 || g.torsion.iter().any(|&t| t > 1) {
            return Err(format!("{}: {g:?}", l.fx.name));
        }
        notes.push(format!("{}: Z", l.fx.name));
    }
    Ok(notes.join(", "))
}

fn simplicial(fixtures: &[Loaded]) -> Outcome {
    let mut checked = 0;
    for l in fixtures {
        let s = lambda(&l.w, l.om.clone());
        let a = validate_simplicial(&wald_k_level(&l.w, 1, 2).map_err(|e| e.to_string())?);
        clean(&format!("{} wald level", l.fx.name), &a)?;
        let b = validate_simplicial(&segal_k_level(&s, 1, 2).map_err(|e| e.to_string())?);
        clean(&format!("{} segal level", l.fx.name), &b)?;
        checked += a.checked + b.checked;
    }
    let c = check_circle_contravariance(3);
    clean("circle", &c)?;
    Ok(format!("both level-1 spaces on both fixtures ({checked} checks), circle maps ({} checks)", c.checked))
}

fn determinism(p3: &Loaded, v: &Loaded) -> Outcome {
    let mut notes = Vec::new();
    let all_but_window: Vec<String> =
        multik::suite::CHECKS.iter().map(|c| c.0.to_string()).filter(|c| c != "e-naturality").collect();
    for (l, checks) in [(v, None), (p3, Some(all_but_window))] {
        let a = run_suite(&l.fx, checks.as_deref())?.to_json();
        let b = run_suite(&l.fx, checks.as_deref())?.to_json();
        if a != b {
            return Err(format!("{}: reports differ", l.fx.name));
        }
        notes.push(format!("{} ({} bytes)", l.fx.name, a.len()));
    }
    Ok(format!("identical reports for {}", notes.join(", ")))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let p3 = load(Fixture::pointed_sets(3));
    let v2 = load(Fixture::vect_f2(2));
    let both = [p3, v2];
    let (p3, v2) = (&both[0], &both[1]);
    let criteria: [(&str, &dyn Fn() -> Outcome); 10] = [
        ("axiom suites and mutations", &|| axiom_suites(&both)),
        ("phi well-defined on P(3)", &|| phi_well_defined(p3)),
        ("E-naturality, window (2, 2)", &|| e_naturality(&both)),
        ("multinaturality of smash", &|| multinaturality(p3)),
        ("iterated agreement on P(3)", &|| iterated(p3)),
        ("extension isomorphisms", &|| extension(&both)),
        ("pi0 comparison", &|| pi0(&both)),
        ("K0", &|| k0_rank(&both)),
        ("simplicial integrity", &|| simplicial(&both)),
        ("determinism", &|| determinism(p3, v2)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of 10 passed in {}s", 10 - failed, start.elapsed().as_secs());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
