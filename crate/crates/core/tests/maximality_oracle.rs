//! Strong maximality and universality against a brute-force search over
//! every object map `mu` and every competitor `nu`.

mod common;

use common::corpus;
use extcat::extension::{hom_count, DEFAULT_BUDGET};
use extcat::order::{check_maximality, ExtClass, MaximalityMode};

/// All maps from `n` points to `k` points.
fn functions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|m| (0..k).map(move |v| [m.clone(), vec![v]].concat())).collect();
    }
    out
}

/// Some `mu` such that every `nu` is dominated pointwise: `nu(s) -> mu(s)`
/// has at least one (maximal) or exactly one (universal) morphism.
fn brute_force(source: usize, target: &ExtClass, unique: bool) -> bool {
    let ctx = target.context();
    let k = target.len();
    let count = |a: usize, b: usize| {
        hom_count(ctx, &target.members()[a], &target.members()[b], target.cfg(), DEFAULT_BUDGET, 2).unwrap()
    };
    let ok = |c: usize| if unique { c == 1 } else { c >= 1 };
    functions(source, k)
        .into_iter()
        .any(|mu| functions(source, k).into_iter().all(|nu| (0..source).all(|s| ok(count(nu[s], mu[s])))))
}

#[test]
fn strong_modes_agree_with_brute_force() {
    let mut compared = 0;
    for (p, inst) in corpus(35, 1200) {
        let cfg = inst.morphism_config().unwrap();
        for n in inst.class_names() {
            let (_, cl) = inst.class(n, &cfg, DEFAULT_BUDGET).unwrap();
            if cl.len() > 4 {
                continue;
            }
            for size in 0..=cl.len().min(3) {
                let source = cl.select(&(0..size).collect::<Vec<_>>());
                for (mode, unique) in [(MaximalityMode::Maximal, false), (MaximalityMode::Universal, true)] {
                    let lib = check_maximality(&source, &cl, mode).unwrap().holds;
                    assert_eq!(lib, brute_force(size, &cl, unique), "{p} {n} |E0| = {size} {mode}");
                    compared += 1;
                }
            }
        }
    }
    assert!(compared > 20, "only {compared} comparisons");
}
