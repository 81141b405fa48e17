//! Theorem-level verification over declared claims.
//!
//! Every verdict is tied to a hypothesis: when a claim's hypothesis fails
//! the report says so and the conclusion is not examined.

use std::sync::Arc;

use crate::construct::{gauge_fixings, is_coherent, pullback_type_extension};
use crate::error::{Error, Result};
use crate::extension::{ExtensionContext, MorphismConfig};
use crate::instance::{ClaimDecl, Instance, Theorem};
use crate::order::{
    build_preorder, check_maximality, class_e_of_i, coherence_check, density_check, greatest_element,
    incomparable_pair, is_total, iso_poset, terminal_objects, CoherenceMode, EOfIReading, ExtClass,
    MaximalityMode,
};
use crate::report::{Report, Verdict};
use crate::sets::{FinSet, RatFn};

/// Classes with at most this many members get density checked in the weak
/// modes too; larger ones only in the strong modes.
pub const WEAK_DENSITY_LIMIT: usize = 6;

/// Runs every claim of `theorem` declared in the instance.
pub fn verify_theorem(theorem: Theorem, inst: &Instance, cfg: &MorphismConfig, budget: u64, report: &mut Report) {
    let claims: Vec<&ClaimDecl> = inst.claims().into_iter().filter(|c| c.theorem == theorem).collect();
    if claims.is_empty() {
        report.check(format!("theorem {theorem}"), Verdict::Invalid, format!("no claim declares theorem {theorem}"));
        return;
    }
    for claim in claims {
        let outcome = match theorem {
            Theorem::A => theorem_a(claim, inst, cfg, budget, report),
            Theorem::B => theorem_b(claim, inst, cfg, budget, report),
            Theorem::C => theorem_c(claim, inst, cfg, budget, report),
        };
        if let Err(e) = outcome {
            report.error(format!("{}: evaluation", claim.name), &e);
        }
    }
}

fn class_of(inst: &Instance, claim: &ClaimDecl, name: &Option<String>, cfg: &MorphismConfig, budget: u64, role: &str) -> Result<Option<ExtClass>> {
    let Some(n) = name else { return Ok(None) };
    let (ctx, cl) = inst.class(n, cfg, budget)?;
    if ctx != claim.context {
        return Err(Error::Resolution(format!(
            "[claim {}]: {role} `{n}` lives over `{ctx}`, not `{}`",
            claim.name, claim.context
        )));
    }
    Ok(Some(cl))
}

fn index_domains(ctx: &ExtensionContext, claim: &ClaimDecl) -> Result<Vec<FinSet>> {
    claim.index.iter().map(|(_, d)| ctx.omega().subset(d)).collect()
}

fn theorem_a(claim: &ClaimDecl, inst: &Instance, cfg: &MorphismConfig, budget: u64, report: &mut Report) -> Result<()> {
    let tag = &claim.name;
    let e1 = class_of(inst, claim, &claim.e1, cfg, budget, "e1")?
        .ok_or_else(|| Error::Resolution(format!("[claim {tag}]: theorem A needs e1")))?;
    let e0 = class_of(inst, claim, &claim.e0, cfg, budget, "e0")?.unwrap_or_else(|| e1.clone());
    let terminal = terminal_objects(&e1)?;
    let Some(&t) = terminal.first() else {
        report.check(format!("{tag}: terminal object in e1"), Verdict::HypothesisUnmet, format!("no terminal object under cfg {cfg}"));
        return Ok(());
    };
    report.check(
        format!("{tag}: terminal object in e1"),
        Verdict::Confirmed,
        format!("member {t}: {}", e1.members()[t]),
    );
    for mode in MaximalityMode::ALL {
        let v = check_maximality(&e0, &e1, mode)?;
        let detail = match (&v.witness, &v.counterexample) {
            (_, Some(why)) => why.clone(),
            (Some(w), None) => format!("witness {w:?}"),
            (None, None) => String::new(),
        };
        report.check(format!("{tag}: e0 {mode} in e1"), Verdict::from_holds(v.holds), detail);
    }
    let candidate = e1.members()[t].clone();
    for mode in MaximalityMode::ALL {
        let name = format!("{tag}: density ({mode}) with the terminal candidate");
        if mode.is_weak() && e1.len() > WEAK_DENSITY_LIMIT {
            report.check(name, Verdict::Info, format!("skipped: {} members exceed {WEAK_DENSITY_LIMIT}", e1.len()));
            continue;
        }
        let d = density_check(&e1, &candidate, mode, Some(&e0))?;
        let detail = match &d.failing_subset {
            Some(y) => format!("fails on subset {y:?}"),
            None => format!("{} subsets", d.subsets_checked),
        };
        report.check(name, Verdict::from_holds(d.holds), detail);
    }
    Ok(())
}

fn theorem_b(claim: &ClaimDecl, inst: &Instance, cfg: &MorphismConfig, budget: u64, report: &mut Report) -> Result<()> {
    let tag = &claim.name;
    let ctx = inst.context(&claim.context)?.clone();
    let e1 = class_of(inst, claim, &claim.e1, cfg, budget, "e1")?
        .ok_or_else(|| Error::Resolution(format!("[claim {tag}]: theorem B needs e1")))?;
    let e0 = class_of(inst, claim, &claim.e0, cfg, budget, "e0")?.unwrap_or_else(|| e1.clone());
    let index = index_domains(&ctx, claim)?;
    let e_of_i = class_e_of_i(&e1, index.len());
    report.data(
        format!("{tag}: cardinalities"),
        format!("|I| = {}, |E0| = {}, |E1(I)| = {} (logged, not enforced)", index.len(), e0.len(), e_of_i.len()),
    );
    let v = coherence_check(&e1, &index, CoherenceMode::Maximality, EOfIReading::Literal)?;
    report.data(format!("{tag}: initial object (empty family)"), v.initial);
    if !v.empty_index_sets.is_empty() {
        report.deviation(format!("{tag}: index sets without members are vacuous: {:?}", v.empty_index_sets));
    }
    if !v.holds {
        report.check(
            format!("{tag}: I-coherence for maximality"),
            Verdict::HypothesisUnmet,
            v.failure.unwrap_or_default(),
        );
        return Ok(());
    }
    report.check(
        format!("{tag}: I-coherence for maximality"),
        Verdict::Confirmed,
        format!("{} families with coproducts; E(I) totally preordered", v.families.len()),
    );
    let closure = coherence_check(&e1, &index, CoherenceMode::Maximality, EOfIReading::Closure)?;
    report.check(
        format!("{tag}: closure reading of E(I)"),
        Verdict::Info,
        format!("coherent: {}, |E(I)| = {}", closure.holds, closure.e_of_i.len()),
    );
    conclude_greatest(tag, &e_of_i, report)?;
    if e0.is_empty() {
        report.check(format!("{tag}: e0 maximal in E(I)"), Verdict::Info, "e0 is empty");
    } else {
        let m = check_maximality(&e0, &e_of_i, MaximalityMode::Maximal)?;
        report.check(format!("{tag}: e0 maximal in E(I)"), Verdict::from_holds(m.holds), m.counterexample.unwrap_or_default());
    }
    Ok(())
}

fn conclude_greatest(tag: &str, cl: &ExtClass, report: &mut Report) -> Result<Option<usize>> {
    let poset = iso_poset(cl)?;
    match greatest_element(&poset) {
        Some(top) => {
            let m = poset.classes[top][0];
            report.check(format!("{tag}: greatest element"), Verdict::Confirmed, format!("member {m}: {}", cl.members()[m]));
            Ok(Some(m))
        }
        None => {
            report.check(
                format!("{tag}: greatest element"),
                Verdict::Counterexample,
                format!("{} iso-classes and none lies above all others", poset.classes.len()),
            );
            Ok(None)
        }
    }
}

/// Coherent members over each domain, for every gauge fixing.
pub fn coherent_members(ctx: &Arc<ExtensionContext>, domains: &[FinSet], s: &RatFn, cfg: &MorphismConfig, budget: u64) -> Result<ExtClass> {
    let fixings = gauge_fixings(ctx)?;
    let mut members = Vec::new();
    for x in domains {
        let s_x = s.restrict(x)?;
        for sigma in &fixings {
            match pullback_type_extension(ctx, x, &s_x, sigma) {
                Ok((e, _)) if is_coherent(ctx, &e) => members.push(e),
                Ok(_) | Err(Error::NotInjectiveInvariant(_) | Error::ZeroDecomposition(_) | Error::NonMonicPullback(_)) => {}
                Err(other) => return Err(other),
            }
        }
    }
    Ok(ExtClass::dedup(ctx.clone(), members, cfg.clone())?.with_budget(budget))
}

/// Domains meeting only in the mandatory core.
fn overlap_beyond_core(ctx: &ExtensionContext, domains: &[FinSet]) -> Option<(usize, usize, String)> {
    for i in 0..domains.len() {
        for j in i + 1..domains.len() {
            let shared = domains[i].intersection(&domains[j]);
            let outside = shared.iter().find(|x| !ctx.core().contains(x)).map(str::to_string);
            if let Some(x) = outside {
                return Some((i, j, x));
            }
        }
    }
    None
}

fn theorem_c(claim: &ClaimDecl, inst: &Instance, cfg: &MorphismConfig, budget: u64, report: &mut Report) -> Result<()> {
    let tag = &claim.name;
    let ctx = inst.context(&claim.context)?.clone();
    let s = match &claim.functional {
        Some(f) => inst.functional(f)?.clone(),
        None => return Err(Error::Resolution(format!("[claim {tag}]: theorem C needs a functional"))),
    };
    if s.domain() != ctx.omega() {
        return Err(Error::Resolution(format!("[claim {tag}]: the functional must be defined on omega")));
    }
    let index = index_domains(&ctx, claim)?;
    let invariant = index.iter().all(|x| ctx.core().is_subset_of(x) && ctx.gau_hat().is_invariant(x));
    if index.is_empty() || !invariant {
        report.check(
            format!("{tag}: declared extended domains"),
            Verdict::HypothesisUnmet,
            "every index domain must be an invariant superset of conn_hat ∪ {ω₀}, and at least one is needed",
        );
        return Ok(());
    }
    if let Some((i, j, x)) = overlap_beyond_core(&ctx, &index) {
        report.check(
            format!("{tag}: disjoint beyond the core"),
            Verdict::HypothesisUnmet,
            format!("domains {i} and {j} share `{x}`"),
        );
        return Ok(());
    }
    report.check(format!("{tag}: disjoint beyond the core"), Verdict::Confirmed, format!("{} domains", index.len()));
    let cl = coherent_members(&ctx, &index, &s, cfg, budget)?;
    let empty: Vec<usize> = (0..index.len())
        .filter(|&k| !cl.members().iter().any(|e| e.domain() == &index[k]))
        .collect();
    if !empty.is_empty() {
        report.check(
            format!("{tag}: coherent extensions over every domain"),
            Verdict::HypothesisUnmet,
            format!("no coherent extension over domains {empty:?}"),
        );
        return Ok(());
    }
    report.check(
        format!("{tag}: coherent extensions over every domain"),
        Verdict::Confirmed,
        format!("{} members", cl.len()),
    );
    let pre = build_preorder(&cl)?;
    match incomparable_pair(&pre) {
        None => report.check(format!("{tag}: totality"), Verdict::Confirmed, "preorder is total"),
        Some((a, b)) => report.check(
            format!("{tag}: totality"),
            Verdict::Counterexample,
            format!("members {a} and {b} are incomparable: {} | {}", cl.members()[a], cl.members()[b]),
        ),
    };
    let v = coherence_check(&cl, &index, CoherenceMode::Maximality, EOfIReading::Literal)?;
    report.data(format!("{tag}: initial object (empty family)"), v.initial);
    let missing: Vec<String> = v
        .families
        .iter()
        .filter(|f| f.coproduct.is_none())
        .map(|f| format!("{:?}", f.family))
        .collect();
    report.check(
        format!("{tag}: coproduct closure"),
        Verdict::from_holds(missing.is_empty()),
        if missing.is_empty() {
            format!("{} families", v.families.len())
        } else {
            format!("no coproduct for families {}", missing.join(", "))
        },
    );
    if !is_total(&pre) {
        return Ok(());
    }
    conclude_greatest(tag, &cl, report)?;
    let e0 = class_of(inst, claim, &claim.e0, cfg, budget, "e0")?.unwrap_or_else(|| cl.clone());
    if e0.is_empty() {
        report.check(format!("{tag}: e0 maximal in Coh"), Verdict::Info, "e0 is empty");
    } else {
        let m = check_maximality(&e0, &cl, MaximalityMode::Maximal)?;
        report.check(format!("{tag}: e0 maximal in Coh"), Verdict::from_holds(m.holds), m.counterexample.unwrap_or_default());
    }
    Ok(())
}
