//! Shared fixtures for the integration suites: a seeded corpus of generated
//! instances and small helpers that do not go through the code under test.

#![allow(dead_code)]

use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use extcat::construct::{gauge_fixings, pullback_type_extension};
use extcat::extension::{Extension, ExtensionContext};
use extcat::generate::{generate_instances, Profile};
use extcat::instance::{serialize_instance, Instance};
use extcat::rational::Rat;
use extcat::sets::{FinMap, FinSet, RatFn};

pub const BIN: &str = env!("CARGO_BIN_EXE_extcat");

/// `n` instances cycling through every profile, one seed each.
pub fn corpus(n: usize, base_seed: u64) -> Vec<(Profile, Instance)> {
    (0..n)
        .map(|k| {
            let p = Profile::ALL[k % Profile::ALL.len()];
            let file = generate_instances(base_seed + k as u64, p, 1).remove(0);
            (p, Instance::resolve(file).expect("generated instances resolve"))
        })
        .collect()
}

pub fn of_profile(p: Profile, n: usize, base_seed: u64) -> Vec<Instance> {
    (0..n as u64)
        .map(|k| Instance::resolve(generate_instances(base_seed + k, p, 1).remove(0)).unwrap())
        .collect()
}

pub fn ctx_and_s(inst: &Instance) -> (Arc<ExtensionContext>, RatFn) {
    (inst.context("ctx").unwrap().clone(), inst.functional("s").unwrap().clone())
}

/// Extended domains on which the gauge-fixed pullback can be built.
pub fn pullback_domains(ctx: &ExtensionContext, s: &RatFn) -> Vec<FinSet> {
    let sigma = &gauge_fixings(ctx).unwrap()[0];
    ctx.extended_domains()
        .into_iter()
        .filter(|x| pullback_type_extension(ctx, x, &s.restrict(x).unwrap(), sigma).is_ok())
        .collect()
}

/// Complete extension on `x` with correction space `{ω₀}`.
pub fn bare(ctx: &ExtensionContext, x: &FinSet, s: &RatFn) -> Extension {
    let c1 = FinSet::new([ctx.zero_name()]).unwrap();
    let delta = FinMap::constant(c1.clone(), ctx.conn().clone(), ctx.flat()).unwrap();
    Extension::new(x.clone(), s.restrict(x).unwrap(), c1.clone(), RatFn::zero(c1), delta).unwrap()
}

/// The image of `e` under the gauge element `g`: every point of the domain
/// and of the correction space moves by `g`, values and deltas travel along.
pub fn transport(ctx: &ExtensionContext, e: &Extension, g: usize) -> Extension {
    let omega = ctx.omega();
    let act = ctx.gau_hat();
    let moved = |x: &str| omega.get(act.act(g, omega.index_of(x).unwrap())).to_string();
    let domain = omega.subset(e.domain().iter().map(moved)).unwrap();
    let c1 = omega.subset(e.correction_space().iter().map(moved)).unwrap();
    let values: Vec<(String, Rat)> = e.functional().pairs().map(|(x, v)| (moved(x), v)).collect();
    let corr: Vec<(String, Rat)> = e.correction().pairs().map(|(x, v)| (moved(x), v)).collect();
    let delta: Vec<(String, String)> = e.delta().pairs().map(|(x, d)| (moved(x), d.to_string())).collect();
    Extension::new(
        domain.clone(),
        RatFn::from_pairs(domain, &values).unwrap(),
        c1.clone(),
        RatFn::from_pairs(c1.clone(), &corr).unwrap(),
        FinMap::from_pairs(c1, ctx.conn().clone(), &delta).unwrap(),
    )
    .unwrap()
}

/// Runs the binary; returns exit code and stdout.
pub fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

pub fn write_instance(dir: &Path, name: &str, inst: &Instance) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serialize_instance(inst.file())).unwrap();
    path.to_string_lossy().into_owned()
}

/// A line that survives the test harness's output capture.
pub fn note(line: &str) {
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}

/// One PASS/FAIL line per criterion, then the assertion.
pub fn verdict(criterion: &str, failures: &[String]) {
    if failures.is_empty() {
        note(&format!("PASS {criterion}"));
    } else {
        let mut text = format!("FAIL {criterion}: {} failure(s)", failures.len());
        for f in failures.iter().take(10) {
            text.push_str(&format!("\n  {f}"));
        }
        note(&text);
    }
    assert!(failures.is_empty(), "{criterion}: {failures:?}");
}
