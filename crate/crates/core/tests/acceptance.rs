//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Tolerances are exact throughout: rational equality, boolean universal
//! properties, zero failures allowed.

mod common;

use std::collections::BTreeSet;

use common::*;
use extcat::construct::{
    gauge_fixings, injectivize, pullback_type_extension, retract_r_sigma, sigma_independence,
};
use extcat::error::Error;
use extcat::extension::{
    coproduct, find_isomorphism, hom_set, is_morphism, Constraint, Extension, ExtensionContext, MorphismConfig,
    DEFAULT_BUDGET,
};
use extcat::generate::Profile;
use extcat::instance::{Instance, Theorem};
use extcat::order::{
    build_preorder, check_maximality, coherence_check, density_check, greatest_element, is_antisymmetric, is_gaunt,
    is_reflexive, is_total, is_transitive, iso_poset, terminal_objects, unique_morphism_order, CoherenceMode,
    EOfIReading, ExtClass, MaximalityMode,
};
use extcat::rational::Rat;
use extcat::report::{Report, Verdict};
use extcat::sets::{set_pullback, test_objects, verify_universal, FinMap, FinSet, RatFn, UniversalWitness};
use extcat::verify::{coherent_members, verify_theorem};

/// Corpus size for the "generated instances" criteria.
const CORPUS: usize = 50;
/// Largest test object used to probe universal properties.
const TEST_OBJECT_MAX: usize = 2;
/// Density is exhaustive over all subsets up to this class size.
const DENSITY_MAX: usize = 6;
/// Iso and non-iso pairs each for essential injectivity.
const RETRACT_PAIRS: usize = 10;
/// Largest domain for the hom-set oracle.
const HOM_ORACLE_MAX: usize = 4;

fn strict() -> MorphismConfig {
    MorphismConfig::strict()
}

/// Base functional against the orbit functional on conn_hat, as maps into
/// their common value set.
fn pullback_legs(ctx: &ExtensionContext, s: &RatFn) -> (FinMap, FinMap) {
    let orbits = ctx.gau_hat().orbits(ctx.conn_hat()).unwrap();
    let reps = ctx.omega().subset(orbits.iter().map(|o| o.get(0).to_string())).unwrap();
    let sbar = RatFn::from_fn(reps.clone(), |q| s.value_of(reps.get(q)).unwrap());
    let values = RatFn::value_set(&[ctx.base(), &sbar]);
    (ctx.base().as_map(&values).unwrap(), sbar.as_map(&values).unwrap())
}

fn pullback_witness(f: &FinMap, g: &FinMap, apex: FinSet, left: FinMap, right: FinMap) -> UniversalWitness {
    UniversalWitness::Pullback {
        f: f.clone(),
        g: g.clone(),
        apex,
        left,
        right,
        tests: test_objects(TEST_OBJECT_MAX),
    }
}

/// The same extension with every point of one orbit shifted in value.
fn shifted_on_core(ctx: &ExtensionContext, e: &Extension) -> Extension {
    let act = ctx.gau_hat();
    let omega = ctx.omega();
    let target = ctx.core().iter().find(|x| *x != ctx.zero_name());
    match target {
        Some(t) => {
            let orbit: Vec<String> = act
                .orbit_of(omega.index_of(t).unwrap())
                .into_iter()
                .map(|i| omega.get(i).to_string())
                .collect();
            let values: Vec<(String, Rat)> = e
                .functional()
                .pairs()
                .map(|(x, v)| (x.to_string(), if orbit.iter().any(|o| o == x) { v + Rat::int(1) } else { v }))
                .collect();
            Extension::new(
                e.domain().clone(),
                RatFn::from_pairs(e.domain().clone(), &values).unwrap(),
                e.correction_space().clone(),
                e.correction().clone(),
                e.delta().clone(),
            )
            .unwrap()
        }
        // only ω₀ in the core: disagree on its correction instead
        None => Extension::new(
            e.domain().clone(),
            e.functional().clone(),
            e.correction_space().clone(),
            RatFn::constant(e.correction_space().clone(), Rat::int(1)),
            e.delta().clone(),
        )
        .unwrap(),
    }
}

#[test]
fn criterion_1_universal_properties() {
    let mut failures = Vec::new();
    let (mut pullbacks, mut coproducts) = (0, 0);
    for (p, inst) in corpus(CORPUS, 100) {
        let (ctx, s) = ctx_and_s(&inst);
        let (f, g) = pullback_legs(&ctx, &s);
        let pb = set_pullback(&f, &g).unwrap();
        pullbacks += 1;
        if !verify_universal(&pullback_witness(&f, &g, pb.apex.clone(), pb.left.clone(), pb.right.clone())) {
            failures.push(format!("{p}: set pullback is not universal"));
        }
        // planted: drop one pair, or, with nothing to drop, a non-commuting cone
        let planted = if pb.apex.is_empty() {
            let one = FinSet::new(["x"]).unwrap();
            pullback_witness(
                &f,
                &g,
                one.clone(),
                FinMap::constant(one.clone(), f.domain().clone(), 0).unwrap(),
                FinMap::constant(one, g.domain().clone(), 0).unwrap(),
            )
        } else {
            let keep: Vec<usize> = (0..pb.apex.len() - 1).collect();
            let apex = pb.apex.subset_indices(keep.iter().copied());
            pullback_witness(
                &f,
                &g,
                apex.clone(),
                FinMap::new(apex.clone(), f.domain().clone(), keep.iter().map(|&k| pb.left.apply(k)).collect()).unwrap(),
                FinMap::new(apex, g.domain().clone(), keep.iter().map(|&k| pb.right.apply(k)).collect()).unwrap(),
            )
        };
        if verify_universal(&planted) {
            failures.push(format!("{p}: planted non-pullback accepted"));
        }

        // unions of pullback-type extensions over domains meeting in the core
        let sigma = &gauge_fixings(&ctx).unwrap()[0];
        let domains = pullback_domains(&ctx, &s);
        let core = ctx.core();
        let build = |x: &FinSet| pullback_type_extension(&ctx, x, &s.restrict(x).unwrap(), sigma).unwrap().0;
        for a in 0..domains.len() {
            for b in a + 1..domains.len() {
                let (da, db) = (&domains[a], &domains[b]);
                if !da.intersection(db).same_elements(core) {
                    continue;
                }
                let family = [build(da), build(db)];
                let cp = match coproduct(&ctx, &family) {
                    Ok(cp) => cp,
                    Err(e) => {
                        failures.push(format!("{p}: coproduct refused: {e}"));
                        continue;
                    }
                };
                coproducts += 1;
                let union = da.union_in(db, ctx.omega()).unwrap();
                if !cp.extension.domain().same_elements(&union) {
                    failures.push(format!("{p}: union domain differs"));
                }
                if !extcat::extension::validate_extension(&ctx, &cp.extension).is_valid() {
                    failures.push(format!("{p}: union is not a valid extension"));
                }
                for (m, e) in cp.injections.iter().zip(&family) {
                    if !is_morphism(&ctx, e, &cp.extension, m, &strict()) {
                        failures.push(format!("{p}: injection is not a morphism"));
                    }
                }
                // beyond the shared core the union is a coproduct of sets
                let summands = vec![da.difference(core), db.difference(core)];
                let apex = union.difference(core);
                let injections = summands.iter().map(|x| FinMap::inclusion(x, &apex).unwrap()).collect();
                let w = UniversalWitness::Coproduct {
                    summands,
                    apex,
                    injections,
                    tests: test_objects(TEST_OBJECT_MAX),
                };
                if !verify_universal(&w) {
                    failures.push(format!("{p}: union beyond the core is not a coproduct"));
                }
            }
        }
        // planted: a union that disagrees on the core
        let e = bare(&ctx, core, &s);
        match coproduct(&ctx, &[e.clone(), shifted_on_core(&ctx, &e)]) {
            Err(Error::CoreDisagreement(_)) => {}
            other => failures.push(format!("{p}: core-disagreeing union not rejected: {:?}", other.map(|c| c.extension))),
        }
    }
    note(&format!("criterion 1: {pullbacks} pullbacks, {coproducts} coproducts"));
    if coproducts == 0 {
        failures.push("no coproduct was exercised".into());
    }
    verdict("criterion 1 (universal-property oracle)", &failures);
}

#[test]
fn criterion_2_gauge_fixed_decomposition() {
    let mut failures = Vec::new();
    let (mut triples, mut skipped) = (0usize, 0usize);
    for (p, inst) in corpus(CORPUS, 200) {
        let (ctx, s) = ctx_and_s(&inst);
        // filtered product oracle over conn × (orbits of conn_hat)
        let orbits = ctx.gau_hat().orbits(ctx.conn_hat()).unwrap();
        let base_values: BTreeSet<Rat> = ctx.base().values().iter().copied().collect();
        let orbit_values: BTreeSet<Rat> = orbits.iter().map(|o| s.value_of(o.get(0)).unwrap()).collect();
        let pairs = ctx
            .base()
            .values()
            .iter()
            .map(|b| orbits.iter().filter(|o| s.value_of(o.get(0)) == Some(*b)).count())
            .sum::<usize>();
        let intersect = !base_values.is_disjoint(&orbit_values);
        let fixings = gauge_fixings(&ctx).unwrap();
        for x0 in ctx.extended_domains() {
            let s_x = s.restrict(&x0).unwrap();
            for sigma in &fixings {
                let (e, w) = match pullback_type_extension(&ctx, &x0, &s_x, sigma) {
                    Ok(ok) => ok,
                    Err(Error::NotInjectiveInvariant(_) | Error::NonMonicPullback(_)) => {
                        skipped += 1;
                        continue;
                    }
                    Err(other) => {
                        failures.push(format!("{p}: {other}"));
                        continue;
                    }
                };
                triples += 1;
                for k in 0..w.pb.len() {
                    let x = ctx.omega().get(w.embed.apply(k));
                    let lhs = e.functional().value_of(x).unwrap();
                    let rhs = ctx.base().value(w.delta.apply(k));
                    if lhs != rhs {
                        failures.push(format!("{p}: s_hat({x}) = {lhs} but base_s(delta) = {rhs}"));
                    }
                    let c = e.correction_space().require(x).unwrap();
                    if e.delta().apply(c) != w.delta.apply(k) {
                        failures.push(format!("{p}: delta of the extension disagrees at {x}"));
                    }
                }
                if w.image.len() != pairs {
                    failures.push(format!("{p}: |X0| = {} but the filtered product has {pairs}", w.image.len()));
                }
                if intersect && w.image.is_empty() {
                    failures.push(format!("{p}: value ranges meet yet X0 is empty"));
                }
            }
        }
    }
    note(&format!("criterion 2: {triples} (x0, s, sigma) triples, {skipped} refused by precondition"));
    if triples == 0 {
        failures.push("no triple was exercised".into());
    }
    verdict("criterion 2 (gauge-fixed decomposition)", &failures);
}

#[test]
fn criterion_3_sigma_independence() {
    let mut failures = Vec::new();
    let mut pairs = 0usize;
    for (p, inst) in corpus(CORPUS, 300) {
        let (ctx, s) = ctx_and_s(&inst);
        for x0 in pullback_domains(&ctx, &s) {
            let r = sigma_independence(&ctx, &x0, &s.restrict(&x0).unwrap()).unwrap();
            let n = r.fixings;
            if n > 720 || r.pairs.len() != n * (n - 1) / 2 {
                failures.push(format!("{p}: {n} fixings gave {} pairs", r.pairs.len()));
            }
            pairs += r.pairs.len();
            if !r.holds() {
                failures.push(format!("{p}: sizes {:?}, failing pairs {:?}", r.sizes, r.pairs.iter().filter(|q| !q.verified).count()));
            }
        }
    }
    note(&format!("criterion 3: {pairs} gauge-fixing pairs"));
    verdict("criterion 3 (sigma-independence)", &failures);
}

#[test]
fn criterion_4_injectivize() {
    let mut failures = Vec::new();
    let (mut runs, mut refused) = (0usize, 0usize);
    for (p, inst) in corpus(CORPUS, 400) {
        let (ctx, s) = ctx_and_s(&inst);
        let mut inputs: Vec<Extension> = inst.extensions_over("ctx").into_iter().map(|(_, e)| e.clone()).collect();
        inputs.extend(ctx.extended_domains().iter().map(|x| bare(&ctx, x, &s)));
        let mut deviations = 0usize;
        for e in &inputs {
            let out = match injectivize(&ctx, e) {
                Ok(out) => out,
                // the correction at ω₀ is nonzero: outside the construction's hypotheses
                Err(Error::ZeroExcluded(_)) => {
                    refused += 1;
                    continue;
                }
                Err(other) => {
                    failures.push(format!("{p}: {other}"));
                    continue;
                }
            };
            runs += 1;
            deviations += out.deviations.len();
            let x = &out.extension;
            if !x.is_complete() || !x.is_injective(&ctx) {
                failures.push(format!("{p}: output complete {} injective {}", x.is_complete(), x.is_injective(&ctx)));
            }
            if !out.morphism.is_monic() || !is_morphism(&ctx, x, e, &out.morphism, &strict()) {
                failures.push(format!("{p}: output does not embed into the input"));
            }
            if e.is_small(&ctx) && !x.is_small(&ctx) {
                failures.push(format!("{p}: smallness lost"));
            }
        }
        let conflicting = p == Profile::ConflictingOrbits;
        if (deviations > 0) != conflicting {
            failures.push(format!("{p}: {deviations} deviations logged"));
        }
    }
    note(&format!("criterion 4: {runs} injectivizations, {refused} refused (nonzero correction at the zero form)"));
    verdict("criterion 4 (injectivize)", &failures);
}

fn is_iso(ctx: &ExtensionContext, a: &Extension, b: &Extension) -> bool {
    find_isomorphism(ctx, a, b, &strict(), DEFAULT_BUDGET).unwrap().is_some()
}

#[test]
fn criterion_5_retraction() {
    let mut failures = Vec::new();
    let (mut members, mut iso_pairs, mut non_iso_pairs) = (0usize, 0usize, 0usize);
    for (p, inst) in corpus(CORPUS, 500) {
        let (ctx, s) = ctx_and_s(&inst);
        let domains = pullback_domains(&ctx, &s);
        let coh = coherent_members(&ctx, &domains, &s, &strict(), DEFAULT_BUDGET).unwrap();
        let fixings = gauge_fixings(&ctx).unwrap();
        for e in coh.members() {
            members += 1;
            let mut identical = false;
            for sigma in &fixings {
                let r = retract_r_sigma(&ctx, e, sigma).unwrap();
                identical |= &r.extension == e && r.mu == FinMap::identity(e.correction_space());
                if !is_iso(&ctx, &r.extension, e) {
                    failures.push(format!("{p}: retraction is not isomorphic to its pullback-type input"));
                }
            }
            if !identical {
                failures.push(format!("{p}: no gauge fixing retracts {e} onto itself"));
            }
        }
        let r = |e: &Extension| retract_r_sigma(&ctx, e, &fixings[0]).unwrap().extension;
        let mut check = |a: &Extension, b: &Extension, expect: bool| {
            let before = is_iso(&ctx, a, b);
            let after = is_iso(&ctx, &r(a), &r(b));
            if before != expect || before != after {
                failures.push(format!("{p}: iso in {before}, iso out {after}, expected {expect}"));
            }
        };
        for e in coh.members() {
            if iso_pairs >= RETRACT_PAIRS {
                break;
            }
            let g = (1..ctx.gau_hat().group().order()).map(|g| transport(&ctx, e, g)).find(|t| t != e);
            if let Some(t) = g {
                check(e, &t, true);
                iso_pairs += 1;
            }
        }
        let m = coh.members();
        for a in 0..m.len() {
            for b in a + 1..m.len() {
                if non_iso_pairs < RETRACT_PAIRS && !is_iso(&ctx, &m[a], &m[b]) {
                    check(&m[a], &m[b], false);
                    non_iso_pairs += 1;
                }
            }
        }
    }
    note(&format!("criterion 5: {members} coherent members, {iso_pairs} iso pairs, {non_iso_pairs} non-iso pairs"));
    if iso_pairs + non_iso_pairs < 2 * RETRACT_PAIRS {
        failures.push(format!("only {iso_pairs} + {non_iso_pairs} pairs found"));
    }
    verdict("criterion 5 (retraction)", &failures);
}

fn index_of_claim(inst: &Instance, ctx: &ExtensionContext, name: &str) -> Vec<FinSet> {
    let claim = inst.claims().into_iter().find(|c| c.name == name).unwrap();
    claim.index.iter().map(|(_, d)| ctx.omega().subset(d).unwrap()).collect()
}

#[test]
fn criterion_6_disjoint_core() {
    let mut failures = Vec::new();
    for (k, inst) in of_profile(Profile::DisjointCore, 8, 600).into_iter().enumerate() {
        let (_, pb) = inst.class("pb", &strict(), DEFAULT_BUDGET).unwrap();
        let (_, coh) = inst.class("coh", &strict(), DEFAULT_BUDGET).unwrap();
        let ctx = pb.context().clone();
        if !is_total(&build_preorder(&pb).unwrap()) {
            failures.push(format!("instance {k}: Pb preorder is not total"));
        }
        let index = index_of_claim(&inst, &ctx, "coherent");
        let v = coherence_check(&coh, &index, CoherenceMode::Maximality, EOfIReading::Literal).unwrap();
        if !v.holds {
            failures.push(format!("instance {k}: coherence fails: {:?}", v.failure));
        }
        match iso_poset(&pb) {
            Ok(poset) if greatest_element(&poset).is_some() => {}
            other => failures.push(format!("instance {k}: no greatest element ({:?})", other.err())),
        }
        let mut report = Report::new("verify-theorem C");
        verify_theorem(Theorem::C, &inst, &strict(), DEFAULT_BUDGET, &mut report);
        if report.verdict() != Verdict::Confirmed {
            failures.push(format!("instance {k}: theorem C verdict {:?}", report.verdict()));
        }
    }
    let dir = tempfile::tempdir().unwrap();
    for (k, inst) in of_profile(Profile::Incomparable, 4, 650).into_iter().enumerate() {
        let path = write_instance(dir.path(), &format!("inc{k}.inst"), &inst);
        let (code, out) = run(&["verify-theorem", "C", &path]);
        if code != 3 || !out.contains("[counterexample]") || out.contains("verdict: confirmed") {
            failures.push(format!("incomparable {k}: exit {code}"));
        }
    }
    verdict("criterion 6 (coherence over disjoint cores)", &failures);
}

#[test]
fn criterion_7_terminal_density() {
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    for (k, inst) in of_profile(Profile::TerminalNull, 8, 700).into_iter().enumerate() {
        let cfg = MorphismConfig::lax();
        let (_, cl) = inst.class("all", &cfg, DEFAULT_BUDGET).unwrap();
        let terminal = terminal_objects(&cl).unwrap();
        let Some(&t) = terminal.first() else {
            failures.push(format!("instance {k}: no terminal object under lax"));
            continue;
        };
        for mode in MaximalityMode::ALL {
            if !check_maximality(&cl, &cl, mode).unwrap().holds {
                failures.push(format!("instance {k}: {mode} fails"));
            }
            if cl.len() <= DENSITY_MAX {
                let d = density_check(&cl, &cl.members()[t], mode, None).unwrap();
                if !d.holds || d.subsets_checked != 1 << cl.len() {
                    failures.push(format!("instance {k}: density {mode}: {d:?}"));
                }
            }
        }
        let path = write_instance(dir.path(), &format!("t{k}.inst"), &inst);
        let (code, _) = run(&["verify-theorem", "A", &path]);
        if code != 0 {
            failures.push(format!("instance {k}: CLI exit {code} under lax"));
        }
    }
    for (k, inst) in of_profile(Profile::Antichain, 6, 750).into_iter().enumerate() {
        let (_, cl) = inst.class("anti", &strict(), DEFAULT_BUDGET).unwrap();
        if !terminal_objects(&cl).unwrap().is_empty() {
            failures.push(format!("antichain {k}: unexpected terminal object"));
            continue;
        }
        let path = write_instance(dir.path(), &format!("a{k}.inst"), &inst);
        let (code, out) = run(&["verify-theorem", "A", &path, "--cfg", "strict"]);
        if code != 2 || !out.contains("verdict: hypothesis unmet") {
            failures.push(format!("antichain {k}: exit {code}"));
        }
    }
    verdict("criterion 7 (terminal objects and density)", &failures);
}

fn classes_of(inst: &Instance) -> Vec<(String, ExtClass)> {
    let cfg = inst.morphism_config().unwrap();
    inst.class_names()
        .into_iter()
        .map(|n| (n.to_string(), inst.class(n, &cfg, DEFAULT_BUDGET).unwrap().1))
        .collect()
}

#[test]
fn criterion_8_preorder_and_gauntness() {
    let mut failures = Vec::new();
    let mut classes = 0usize;
    for (p, inst) in corpus(CORPUS, 800) {
        for (name, cl) in classes_of(&inst) {
            classes += 1;
            let pre = build_preorder(&cl).unwrap();
            if !is_reflexive(&pre) || !is_transitive(&pre) {
                failures.push(format!("{p} {name}: preorder axioms fail"));
            }
            if !is_gaunt(&cl).unwrap() && !matches!(unique_morphism_order(&cl), Err(Error::NotGaunt(_))) {
                failures.push(format!("{p} {name}: non-gaunt class accepted"));
            }
        }
        // planted non-gaunt: a member next to a distinct isomorphic copy
        let (ctx, _) = ctx_and_s(&inst);
        let pick = inst.extensions_over("ctx").into_iter().map(|(_, e)| e.clone()).find_map(|e| {
            (1..ctx.gau_hat().group().order()).map(|g| transport(&ctx, &e, g)).find(|t| *t != e).map(|t| (e, t))
        });
        if let Some((e, t)) = pick {
            let cl = ExtClass::new(ctx.clone(), vec![e, t], strict()).unwrap();
            if !matches!(unique_morphism_order(&cl), Err(Error::NotGaunt(_))) {
                failures.push(format!("{p}: planted non-gaunt class accepted"));
            }
        }
    }
    note(&format!("criterion 8: {classes} classes"));
    verdict("criterion 8 (preorder axioms, gaunt precondition)", &failures);
}

#[test]
fn criterion_8_iso_poset_antisymmetry() {
    let mut failures = Vec::new();
    for (p, inst) in corpus(CORPUS, 800) {
        for (name, cl) in classes_of(&inst) {
            match iso_poset(&cl) {
                Ok(poset) if is_antisymmetric(&poset.leq) => {}
                Ok(poset) => {
                    let n = poset.leq.len();
                    let (a, b) = (0..n)
                        .flat_map(|a| (0..n).map(move |b| (a, b)))
                        .find(|&(a, b)| a != b && poset.leq[a][b] && poset.leq[b][a])
                        .unwrap();
                    failures.push(format!(
                        "{p} {name}: classes {a} and {b} map both ways without being isomorphic: {} | {}",
                        cl.members()[poset.classes[a][0]],
                        cl.members()[poset.classes[b][0]]
                    ));
                }
                Err(e) => failures.push(format!("{p} {name}: {e}")),
            }
        }
    }
    verdict("criterion 8 (iso-poset antisymmetry)", &failures);
}

/// Every pair of maps between domains and correction spaces, filtered by
/// the constraints written out directly on names.
fn hom_oracle(ctx: &ExtensionContext, a: &Extension, b: &Extension, cfg: &MorphismConfig) -> BTreeSet<(Vec<String>, Vec<String>)> {
    let omega = ctx.omega();
    let act = ctx.gau_hat();
    let all_maps = |n: usize, k: usize| -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out.into_iter().flat_map(|m| (0..k).map(move |v| [m.clone(), vec![v]].concat())).collect();
        }
        out
    };
    let (x, y) = (a.domain(), b.domain());
    let (c, d) = (a.correction_space(), b.correction_space());
    let mut found = BTreeSet::new();
    for f in all_maps(x.len(), y.len()) {
        let f_name = |p: &str| y.get(f[x.index_of(p).unwrap()]).to_string();
        for g in all_maps(c.len(), d.len()) {
            let mut ok = true;
            for con in cfg.constraints() {
                ok &= match con {
                    Constraint::Equivariance => (0..act.group().order()).all(|h| {
                        x.iter().all(|p| {
                            let moved = omega.get(act.act(h, omega.index_of(p).unwrap()));
                            let lhs = f_name(moved);
                            let rhs = omega.get(act.act(h, omega.index_of(&f_name(p)).unwrap()));
                            lhs == rhs
                        })
                    }),
                    Constraint::InclusionSquare => (0..c.len()).all(|k| f_name(c.get(k)) == d.get(g[k])),
                    Constraint::DeltaSquare => (0..c.len()).all(|k| b.delta().apply(g[k]) == a.delta().apply(k)),
                    Constraint::ScalarC => (0..c.len()).all(|k| b.correction().value(g[k]) == a.correction().value(k)),
                    Constraint::ScalarS => x.iter().all(|p| b.functional().value_of(&f_name(p)) == a.functional().value_of(p)),
                };
            }
            if ok {
                found.insert((
                    x.iter().map(f_name).collect(),
                    (0..c.len()).map(|k| d.get(g[k]).to_string()).collect(),
                ));
            }
        }
    }
    found
}

#[test]
fn criterion_9_determinism_and_oracles() {
    let mut failures = Vec::new();
    // hom sets against the filter oracle
    let mut pairs = 0usize;
    for (p, inst) in corpus(CORPUS, 900) {
        let (ctx, _) = ctx_and_s(&inst);
        let mut small: Vec<Extension> = inst
            .extensions_over("ctx")
            .into_iter()
            .map(|(_, e)| e.clone())
            .chain(classes_of(&inst).into_iter().flat_map(|(_, cl)| cl.members().to_vec()))
            .filter(|e| e.domain().len() <= HOM_ORACLE_MAX)
            .collect();
        small.sort_by_key(|e| e.to_string());
        small.dedup();
        small.truncate(6);
        for cfg in [MorphismConfig::strict(), MorphismConfig::lax()] {
            for a in &small {
                for b in &small {
                    pairs += 1;
                    let lib: BTreeSet<(Vec<String>, Vec<String>)> = hom_set(&ctx, a, b, &cfg, DEFAULT_BUDGET)
                        .unwrap()
                        .into_iter()
                        .map(|m| {
                            (
                                m.f.pairs().map(|(_, t)| t.to_string()).collect(),
                                m.g.pairs().map(|(_, t)| t.to_string()).collect(),
                            )
                        })
                        .collect();
                    if lib != hom_oracle(&ctx, a, b, &cfg) {
                        failures.push(format!("{p}: hom set differs from the oracle for {a} -> {b} under {cfg}"));
                    }
                }
            }
        }
    }
    note(&format!("criterion 9: {pairs} hom sets compared"));
    if pairs == 0 {
        failures.push("no hom set compared".into());
    }

    // CLI against library, and byte-identical reruns
    let dir = tempfile::tempdir().unwrap();
    for (k, (p, inst)) in corpus(14, 950).into_iter().enumerate() {
        let path = write_instance(dir.path(), &format!("i{k}.inst"), &inst);
        let cfg = inst.morphism_config().unwrap();
        for theorem in [Theorem::A, Theorem::B, Theorem::C] {
            let t = theorem.to_string();
            let mut lib = Report::new("");
            verify_theorem(theorem, &inst, &cfg, inst.budget(), &mut lib);
            let (code, json) = run(&["verify-theorem", &t, &path, "--format", "structured"]);
            if code != lib.exit_code() {
                failures.push(format!("{p} {t}: CLI exit {code}, library {}", lib.exit_code()));
            }
            let v: serde_json::Value = serde_json::from_str(&json).unwrap();
            let cli_checks: Vec<(String, String)> = v["checks"]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| (c["name"].as_str().unwrap().to_string(), c["verdict"].as_str().unwrap().to_string()))
                .collect();
            let lib_checks: Vec<(String, String)> = lib
                .checks
                .iter()
                .map(|c| (c.name.clone(), serde_json::to_value(c.verdict).unwrap().as_str().unwrap().to_string()))
                .collect();
            if cli_checks != lib_checks {
                failures.push(format!("{p} {t}: CLI checks differ from the library"));
            }
        }
        let mut commands = vec![vec!["verify-theorem", "C", &path], vec!["validate", &path]];
        let class = inst.class_names().first().map(|c| c.to_string());
        if let Some(c) = &class {
            commands.push(vec!["poset", &path, c, "--format", "structured"]);
            commands.push(vec!["terminal", &path, c]);
        }
        for args in commands {
            let (c1, o1) = run(&args);
            let (c2, o2) = run(&args);
            if c1 != c2 || o1 != o2 {
                failures.push(format!("{p}: `{}` is not byte-identical across runs", args.join(" ")));
            }
        }
    }
    verdict("criterion 9 (determinism and oracle equality)", &failures);
}
