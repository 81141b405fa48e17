//! Gauge-fixed pullback extensions: every gauge fixing gives a locus of the
//! same size, and the loci correspond point by point.

use extcat::construct::{gauge_fixings, pullback_type_extension, sigma_independence};
use extcat::samples::{r, swap_context, swap_functional};

fn main() -> extcat::error::Result<()> {
    let ctx = swap_context();
    let s = swap_functional(r(7));
    let omega = ctx.omega().clone();
    for (k, sigma) in gauge_fixings(&ctx)?.iter().enumerate() {
        let (e, w) = pullback_type_extension(&ctx, &omega, &s, sigma)?;
        println!("sigma {k}: locus {} -> {e}", w.image);
    }
    let report = sigma_independence(&ctx, &omega, &s)?;
    println!("locus sizes {:?}, independent: {}", report.sizes, report.holds());
    for pair in &report.pairs {
        println!("  {} vs {}: {:?}", pair.first, pair.second, pair.bijection);
    }
    Ok(())
}
