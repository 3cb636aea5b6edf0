//! Stage runners. Each returns a status and a JSON body; bodies use sorted
//! maps and integer data only, so they are byte-deterministic given the
//! input and the seed.

use fusloc::basic_set::{check_basic, construct_thick_basic, ConcreteBiset};
use fusloc::cohomology::{stable_cohomology, CategoryKind};
use fusloc::functor::{check_complement_identities, kernel_functor_from_fusion, kernel_functor_iso, r_functors, NU};
use fusloc::fusion::FusionSystem;
use fusloc::locality::{check_locality_axioms, kernel_action_formula, InG, KernelLayout, Locality};
use fusloc::perfect::{build_perfect, compare_localities, oracle_linking_system};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Fusion,
    BasicSet,
    Locality,
    Cohomology,
    Perfect,
    VerifyAll,
}

impl Stage {
    pub const PIPELINE: [Stage; 5] = [Stage::Fusion, Stage::BasicSet, Stage::Locality, Stage::Cohomology, Stage::Perfect];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Fusion => "fusion",
            Stage::BasicSet => "basic-set",
            Stage::Locality => "locality",
            Stage::Cohomology => "cohomology",
            Stage::Perfect => "perfect",
            Stage::VerifyAll => "verify-all",
        }
    }

    /// Stages after fusion need a saturated fusion system.
    pub fn needs_saturation(self) -> bool {
        !matches!(self, Stage::Fusion | Stage::VerifyAll)
    }
}

/// Outcome of a stage. `Falsified` means a check that must hold for a
/// saturated fusion system failed or a stage errored; `Report` and `Skipped`
/// mean the input does not meet the hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Report,
    Skipped,
    Falsified,
}

pub type Outcome = (Status, Value);

/// Budget of composable triples for the sampled locality check.
pub const LOCALITY_TRIPLES: usize = 10_000;
/// Top degree of the cohomology computed by the cohomology stage.
pub const TOP_DEGREE: usize = 3;

fn failed(e: fusloc::Error) -> Outcome {
    (Status::Falsified, json!({ "error": e.to_string() }))
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Falsified
    }
}

pub fn skipped(reason: &str) -> Outcome {
    (Status::Skipped, json!({ "skipped": reason }))
}

/// The thick basic set of multiplicity `min_mult` and its locality.
pub fn locality_for(f: &FusionSystem, min_mult: u32) -> fusloc::Result<Locality<'_>> {
    let c = construct_thick_basic(f, min_mult)?;
    Locality::new(f, ConcreteBiset::realize(f, &c.biset))
}

pub fn fusion(f: &FusionSystem, sylow: bool) -> Outcome {
    let rep = f.check_frobenius();
    let classes: Vec<Value> = f
        .f_class_reps()
        .into_iter()
        .map(|q| {
            json!({
                "id": q,
                "subgroup": f.describe_sub(q),
                "order": f.sub_order(q),
                "class_size": f.f_class(q).len(),
                "automorphisms": f.aut(q).len(),
                "selfcentralizing": f.is_selfcentralizing(q),
            })
        })
        .collect();
    let status = match (rep.passed(), sylow) {
        (true, _) => Status::Pass,
        (false, false) => Status::Report,
        (false, true) => Status::Falsified,
    };
    let body = json!({
        "frobenius": rep,
        "p_sylow_in_g": sylow,
        "subgroups": f.num_subs(),
        "morphisms": f.mors.len(),
        "f_classes": classes,
        "hyperfocal": f.describe_sub(f.hyperfocal()),
        "hom_counts": f.hom_table(),
    });
    (status, body)
}

pub fn basic_set(f: &FusionSystem) -> Outcome {
    let c = match construct_thick_basic(f, 2) {
        Ok(c) => c,
        Err(e) => return failed(e),
    };
    let omega = ConcreteBiset::realize(f, &c.biset);
    let rep = check_basic(&omega, f);
    let body = json!({
        "orbit_types": c.biset.entries(),
        "blocks": c.biset.blocks(f),
        "minimal": c.minimal,
        "report": rep,
        "thick_basic": rep.thick_basic(),
    });
    (pass_if(rep.thick_basic()), body)
}

pub fn locality(f: &FusionSystem, loc: &Locality, seed: u64) -> Outcome {
    let rep = check_locality_axioms(loc, &InG, LOCALITY_TRIPLES, seed);
    let disagreements: Vec<usize> = (0..f.mors.len())
        .filter(|&m| {
            let (q, r) = (f.mors[m].tgt, f.mors[m].src);
            loc.kernel_action(m) != kernel_action_formula(f, &loc.layouts[q], &loc.layouts[r], m)
        })
        .collect();
    let other = locality_for(f, 3);
    let omega_independent = match &other {
        Ok(l3) => kernel_functor_iso(loc, l3).map(|_| l3.k()).map_err(|e| e.to_string()),
        Err(e) => Err(e.to_string()),
    };
    let ok = rep.passed() && disagreements.is_empty() && omega_independent.is_ok();
    let kernels: Vec<Value> = (0..f.num_subs())
        .map(|q| json!({ "object": q, "invariant_factors": loc.kernel_group(q).orders }))
        .collect();
    let body = json!({
        "blocks": loc.k(),
        "axioms": rep,
        "kernels": kernels,
        "kernel_action_routes": {
            "morphisms": f.mors.len(),
            "disagreements": disagreements,
        },
        "basic_set_independence": match omega_independent {
            Ok(k) => json!({ "other_blocks": k, "isomorphic": true }),
            Err(e) => json!({ "isomorphic": false, "error": e }),
        },
    });
    (pass_if(ok), body)
}

pub fn cohomology(f: &FusionSystem) -> Outcome {
    let mut ok = true;
    let mut entries = Vec::new();
    for u in f.p_class_reps() {
        let nu = NU::new(f, u);
        for m in 0..2 {
            let rf = match r_functors(&nu, m) {
                Ok(rf) => rf,
                Err(e) => return failed(e),
            };
            let comp = check_complement_identities(f, &rf);
            let name = format!("r[U={},m={m}]", f.describe_sub(u));
            let certs = stable_cohomology(f, CategoryKind::Exterior, &rf.fixed, &name, TOP_DEGREE);
            ok &= comp.passed() && certs.iter().all(|c| c.invariant_factors.is_empty());
            entries.push(json!({ "u": u, "m": m, "complement": comp, "cohomology": certs }));
        }
    }
    let layouts: Vec<KernelLayout> = (0..f.num_subs()).map(|q| KernelLayout::new(f, q)).collect();
    let kf = kernel_functor_from_fusion(f, &layouts);
    let exterior_p = stable_cohomology(f, CategoryKind::ExteriorP, &kf, "kernel", TOP_DEGREE);
    ok &= exterior_p.iter().all(|c| c.invariant_factors.is_empty());
    (pass_if(ok), json!({ "r_functors": entries, "exterior_p": exterior_p }))
}

pub const OUT_OF_SCOPE: &str = "the certificate covers the selfcentralizing objects only; \
     extending it to a perfect locality on all subgroups is not computed";

pub fn perfect(f: &FusionSystem, loc: &Locality, seed: Option<u64>) -> Outcome {
    let pl = match build_perfect(loc, seed) {
        Ok(pl) => pl,
        Err(e) => return failed(e),
    };
    let (oracle, orep) = match oracle_linking_system(f) {
        Ok(x) => x,
        Err(e) => return failed(e),
    };
    let iso = compare_localities(loc, &pl.locality, &oracle, seed);
    let ok = pl.report.passed() && orep.passed() && iso.is_ok();
    let objects: Vec<String> = pl.locality.objects.iter().map(|&q| f.describe_sub(q)).collect();
    let body = json!({
        "objects": objects,
        "object_invariants": pl.report.objects,
        "morphism_counts": pl.report.homs,
        "section": pl.report.section,
        "axioms": pl.report.locality,
        "tau_hat": pl.tau_hat,
        "tower": pl.steps,
        "frame": pl.frame,
        "oracle": orep,
        "natural_iso": match iso {
            Ok(w) => json!({ "lambda_p": w.lambda_p, "lambda": w.lambda, "morphisms_checked": w.morphisms_checked }),
            Err(e) => json!({ "error": e.to_string() }),
        },
        "out_of_scope": OUT_OF_SCOPE,
    });
    (pass_if(ok), body)
}
