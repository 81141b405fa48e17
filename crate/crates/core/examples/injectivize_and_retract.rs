//! Shrinking an extension to an injective one, then retracting it onto the
//! pullback-type extension with the same domain.

use extcat::construct::{gauge_fixings, injectivize, retract_r_sigma};
use extcat::extension::Extension;
use extcat::samples::CycleContext;
use extcat::sets::{FinMap, FinSet, RatFn};
use extcat::rational::Rat;

fn main() -> extcat::error::Result<()> {
    let ctx = CycleContext {
        omega: &["w0", "q", "a1", "a2", "p"],
        zero: "w0",
        generators: &[&[&["a1", "a2"]]],
        conn_hat: &["a1", "a2"],
        conn: &[("d0", Rat::int(0)), ("d1", Rat::int(1))],
    }
    .build()?;
    // q repeats the value of the core orbit, so the union is not injective
    let omega = ctx.omega().clone();
    let s = RatFn::new(omega.clone(), [0, 1, 1, 1, 3].map(Rat::int).to_vec())?;
    let c1 = FinSet::new(["w0", "a1"])?;
    let delta = FinMap::from_pairs(c1.clone(), ctx.conn().clone(), &[("w0", "d0"), ("a1", "d1")])?;
    let e = Extension::new(omega, s, c1.clone(), RatFn::zero(c1), delta)?;

    let inj = injectivize(&ctx, &e)?;
    println!("injectivized: {}", inj.extension);
    for d in &inj.deviations {
        println!("  deviation: {d}");
    }
    for sigma in gauge_fixings(&ctx)? {
        let r = retract_r_sigma(&ctx, &inj.extension, &sigma)?;
        println!("retract along {:?}: {}", sigma.sigma(), r.extension);
    }
    Ok(())
}
