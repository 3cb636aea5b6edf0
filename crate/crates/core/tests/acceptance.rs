//! Acceptance criteria 1 to 10, one PASS/FAIL line each. Runtime limits are
//! pinned below; every other comparison is exact.

mod oracles;

use fusloc::basic_set::{check_basic, construct_thick_basic, ConcreteBiset};
use fusloc::cohomology::{stable_cohomology, CategoryKind};
use fusloc::examples;
use fusloc::functor::{check_complement_identities, kernel_functor_from_fusion, kernel_functor_iso, r_functors, NU};
use fusloc::fusion::FusionSystem;
use fusloc::locality::{check_locality_axioms, kernel_action_formula, InG, KernelLayout, Locality};
use fusloc::perfect::{build_perfect, compare_localities, oracle_linking_system};
use fusloc::smith::smith_solve;
use fusloc::Error;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

const FROBENIUS_LIMIT: Duration = Duration::from_secs(10);
const BASIC_SET_LIMIT: Duration = Duration::from_secs(30);
const LOCALITY_LIMIT: Duration = Duration::from_secs(5 * 60);
const VANISHING_LIMIT: Duration = Duration::from_secs(10 * 60);
const UNIQUENESS_LIMIT: Duration = Duration::from_secs(10 * 60);
/// Composable triples sampled on S4/D8.
const SAMPLED_TRIPLES: usize = 10_000;
/// Largest candidate set searched exhaustively by the solver oracle.
const SOLVER_CANDIDATES: u64 = 1 << 8;
const SEED: u64 = 1;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("{what} took {t:?}, limit {limit:?}"))
}

fn locality(f: &FusionSystem, min_mult: u32) -> Locality<'_> {
    let b = construct_thick_basic(f, min_mult).unwrap().biset;
    Locality::new(f, ConcreteBiset::realize(f, &b)).unwrap()
}

fn frobenius() -> Verdict {
    for inst in examples::desk() {
        let start = Instant::now();
        let rep = inst.fusion.check_frobenius();
        ensure(rep.passed(), || format!("{}: {:?}", inst.name, rep.witnesses))?;
        within(start, FROBENIUS_LIMIT, inst.name)?;
    }
    let rep = examples::s4_v4().fusion.check_frobenius();
    ensure(!rep.passed() && !rep.sylow && !rep.witnesses.is_empty(), || "S4/V4 passed the axioms".into())?;
    Ok(format!("6 instances pass; S4/V4 fails with witness {:?}", rep.witnesses[0]))
}

fn basic_sets() -> Verdict {
    for inst in examples::desk() {
        let start = Instant::now();
        let f = &inst.fusion;
        let c = construct_thick_basic(f, 2).map_err(|e| format!("{}: {e}", inst.name))?;
        let rep = check_basic(&ConcreteBiset::realize(f, &c.biset), f);
        ensure(rep.self_dual && rep.p_prime_cardinality, || format!("{}: {rep:?}", inst.name))?;
        ensure(rep.thick_basic(), || format!("{}: {rep:?}", inst.name))?;
        within(start, BASIC_SET_LIMIT, inst.name)?;
    }
    Ok("thick basic on 6 instances".into())
}

fn locality_laws() -> Verdict {
    let start = Instant::now();
    let mut triples = Vec::new();
    for inst in [examples::c2(), examples::c2xc2()] {
        let f = &inst.fusion;
        let loc = locality(f, 2);
        let rep = check_locality_axioms(&loc, &InG, usize::MAX, SEED);
        ensure(rep.passed(), || format!("{}: {:?}", inst.name, rep.witnesses))?;
        // regularity by enumeration, independent of the checker
        for q in 0..f.num_subs() {
            for r in 0..f.num_subs() {
                let kernel = loc.kernel_group(r).size().unwrap() as usize;
                let count = loc.morphisms(q, r).len();
                ensure(count == f.hom[q][r].len() * kernel, || format!("{}: |L({q},{r})| = {count}", inst.name))?;
            }
        }
        triples.push(format!("{} exhaustive {}", inst.name, rep.composable_triples));
    }
    let inst = examples::s4_d8();
    let rep = check_locality_axioms(&locality(&inst.fusion, 2), &InG, SAMPLED_TRIPLES, SEED);
    ensure(rep.passed(), || format!("S4/D8: {:?}", rep.witnesses))?;
    ensure(rep.composable_triples >= SAMPLED_TRIPLES, || format!("S4/D8 checked {}", rep.composable_triples))?;
    triples.push(format!("S4/D8 sampled {}", rep.composable_triples));
    within(start, LOCALITY_LIMIT, "locality suite")?;
    Ok(triples.join(", "))
}

fn kernel_routes() -> Verdict {
    let mut total = 0;
    for inst in examples::desk() {
        let f = &inst.fusion;
        let loc = locality(f, 2);
        for m in 0..f.mors.len() {
            let (q, r) = (f.mors[m].tgt, f.mors[m].src);
            let formula = kernel_action_formula(f, &loc.layouts[q], &loc.layouts[r], m);
            ensure(loc.kernel_action(m) == formula, || format!("{}: morphism {m}", inst.name))?;
        }
        total += f.mors.len();
    }
    Ok(format!("{total} morphisms agree"))
}

fn complements() -> Verdict {
    let mut checked = 0;
    for inst in examples::desk() {
        let f = &inst.fusion;
        for u in f.p_class_reps() {
            let nu = NU::new(f, u);
            for m in 0..2 {
                let rf = r_functors(&nu, m).map_err(|e| format!("{} U={u} m={m}: {e}", inst.name))?;
                let rep = check_complement_identities(f, &rf);
                ensure(rep.passed(), || format!("{} U={u} m={m}: {:?}", inst.name, rep.witnesses))?;
                checked += rep.annihilation + rep.isomorphisms + rep.mackey;
            }
        }
    }
    Ok(format!("{checked} identities hold"))
}

fn vanishing() -> Verdict {
    let start = Instant::now();
    let mut groups = 0;
    for inst in [examples::s4_d8(), examples::a4_v4()] {
        let f = &inst.fusion;
        for u in f.p_class_reps() {
            let nu = NU::new(f, u);
            for m in 0..2 {
                let rf = r_functors(&nu, m).map_err(|e| e.to_string())?;
                for c in stable_cohomology(f, CategoryKind::Exterior, &rf.fixed, "r", 3) {
                    ensure(c.invariant_factors.is_empty(), || format!("{} U={u} m={m}: {c:?}", inst.name))?;
                    groups += 1;
                }
            }
        }
    }
    for inst in examples::desk() {
        let f = &inst.fusion;
        let layouts: Vec<KernelLayout> = (0..f.num_subs()).map(|q| KernelLayout::new(f, q)).collect();
        let kf = kernel_functor_from_fusion(f, &layouts);
        for c in stable_cohomology(f, CategoryKind::ExteriorP, &kf, "kernel", 3) {
            ensure(c.invariant_factors.is_empty(), || format!("{} over F̃_P: {c:?}", inst.name))?;
            groups += 1;
        }
    }
    within(start, VANISHING_LIMIT, "vanishing suite")?;
    Ok(format!("{groups} cohomology groups vanish"))
}

fn pipeline() -> Verdict {
    let mut p_autos = 0;
    for inst in examples::desk() {
        let f = &inst.fusion;
        let pl = build_perfect(&locality(f, 2), Some(SEED)).map_err(|e| format!("{}: {e}", inst.name))?;
        let rep = &pl.report;
        ensure(rep.locality.coherent && rep.locality.divisible, || format!("{}: {:?}", inst.name, rep.locality))?;
        ensure(rep.passed(), || format!("{}: report failed", inst.name))?;
        ensure(pl.locality.objects == f.selfcentralizing_objects(), || format!("{}: objects", inst.name))?;
        ensure(rep.objects.iter().all(|o| o.kernel_is_center), || format!("{}: Ker ≠ Z", inst.name))?;
        for q in &pl.locality.objects {
            for r in &pl.locality.objects {
                let want = f.hom[*q][*r].len() * f.sub_order(f.center(*r));
                let got = rep.homs.iter().find(|h| h.q == *q && h.r == *r).map_or(0, |h| h.count);
                ensure(got == want, || format!("{}: |P({q},{r})| = {got}, want {want}", inst.name))?;
            }
        }
        if inst.name == "S4/D8" {
            p_autos = rep.objects.iter().find(|o| o.object == f.whole()).map_or(0, |o| o.automorphisms);
        }
    }
    ensure(p_autos == 8, || format!("|P^sc(P)| = {p_autos} on S4/D8"))?;
    Ok("6 instances; |P^sc(P)| = 8 on S4/D8".into())
}

fn uniqueness() -> Verdict {
    let start = Instant::now();
    let mut lambdas = Vec::new();
    for inst in examples::desk() {
        let f = &inst.fusion;
        let loc = locality(f, 2);
        let a = build_perfect(&loc, Some(SEED)).map_err(|e| e.to_string())?;
        let b = build_perfect(&loc, Some(SEED + 1)).map_err(|e| e.to_string())?;
        compare_localities(&loc, &a.locality, &b.locality, Some(SEED)).map_err(|e| format!("{} reruns: {e}", inst.name))?;
        let (oracle, _) = oracle_linking_system(f).map_err(|e| e.to_string())?;
        let iso = compare_localities(&loc, &a.locality, &oracle, Some(SEED))
            .map_err(|e| format!("{} vs oracle: {e}", inst.name))?;
        ensure(iso.morphisms_checked > 0, || format!("{}: nothing compared", inst.name))?;
        lambdas.push(format!("{} λ_P = {:?}", inst.name, iso.lambda_p));
    }
    within(start, UNIQUENESS_LIMIT, "uniqueness suite")?;
    Ok(lambdas.join("; "))
}

fn omega_independence() -> Verdict {
    for inst in examples::desk() {
        let f = &inst.fusion;
        let (l2, l3) = (locality(f, 2), locality(f, 3));
        ensure(l2.k() != l3.k(), || format!("{}: basic sets coincide", inst.name))?;
        kernel_functor_iso(&l2, &l3).map_err(|e| format!("{}: {e}", inst.name))?;
    }
    Ok("kernel functors of multiplicity 2 and 3 sets agree on 6 instances".into())
}

/// Every system with entries reduced mod a common modulus `n`, up to two
/// rows and unknowns in `ℤ/n`, with at most `SOLVER_CANDIDATES` candidates.
fn all_small_systems() -> Vec<(Vec<Vec<i64>>, Vec<i64>, Vec<u64>)> {
    let mut out = Vec::new();
    for n in 2u64..=16 {
        for rows in 1..=2usize {
            for cols in 1..=3usize {
                let candidates = n.pow(cols as u32);
                let entries = (rows * (cols + 1)) as u32;
                if candidates > SOLVER_CANDIDATES || n.pow(entries) > 100_000 {
                    continue;
                }
                for code in 0..n.pow(entries) {
                    let mut c = code;
                    let mut digit = || {
                        let d = (c % n) as i64;
                        c /= n;
                        d
                    };
                    let a: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| digit()).collect()).collect();
                    let b: Vec<i64> = (0..rows).map(|_| digit()).collect();
                    out.push((a, b, vec![n; rows]));
                }
            }
        }
    }
    out
}

fn solver_floor() -> Verdict {
    let systems = all_small_systems();
    for (a, b, moduli) in &systems {
        let box_ = vec![moduli[0]; a[0].len()];
        let got = smith_solve(a, b, moduli);
        match oracles::search(a, b, moduli, &box_) {
            Some(x) => ensure(got.as_ref() == Ok(&x), || format!("{a:?} x = {b:?} mod {moduli:?}: {got:?}"))?,
            None => ensure(got == Err(Error::NoSolution), || format!("{a:?} x = {b:?} mod {moduli:?}: {got:?}"))?,
        }
    }
    let pairs = oracles::check_all_pairs(&oracles::d8()) + oracles::check_all_pairs(&oracles::s4());
    Ok(format!("{} systems, {pairs} transfer pairs", systems.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("Frobenius axioms", frobenius),
        ("basic sets", basic_sets),
        ("locality laws", locality_laws),
        ("kernel action routes", kernel_routes),
        ("complement identities", complements),
        ("vanishing", vanishing),
        ("perfect pipeline", pipeline),
        ("uniqueness", uniqueness),
        ("basic set independence", omega_independence),
        ("solver floor", solver_floor),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({t:.1} s): {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL {name} ({t:.1} s): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
