//! Hom sets, isomorphisms and trivial extensions over a small context.

use extcat::extension::{
    classify_trivial, find_isomorphism, hom_set, null_extension, validate_extension, MorphismConfig, DEFAULT_BUDGET,
};
use extcat::samples::{r, swap_context, swap_functional};
use extcat::construct::{gauge_fixings, pullback_type_extension};

fn main() -> extcat::error::Result<()> {
    let ctx = swap_context();
    let s = swap_functional(r(5));
    let sigma = &gauge_fixings(&ctx)?[0];
    let omega = ctx.omega().clone();
    let (big, _) = pullback_type_extension(&ctx, &omega, &s, sigma)?;
    let core = ctx.core().clone();
    let (small, _) = pullback_type_extension(&ctx, &core, &s.restrict(&core)?, sigma)?;
    println!("small: {small}\nbig:   {big}");
    println!("valid: {} {}", validate_extension(&ctx, &small).is_valid(), validate_extension(&ctx, &big).is_valid());

    for cfg in [MorphismConfig::strict(), MorphismConfig::lax()] {
        let homs = hom_set(&ctx, &small, &big, &cfg, DEFAULT_BUDGET)?;
        println!("{cfg}: {} morphisms small -> big", homs.len());
        for m in &homs {
            println!("  {m}");
        }
        let iso = find_isomorphism(&ctx, &small, &big, &cfg, DEFAULT_BUDGET)?;
        println!("  isomorphic: {}", iso.is_some());
    }

    let null = null_extension(&ctx);
    println!("null extension classifies as {:?}", classify_trivial(&ctx, &null).kind);
    Ok(())
}
