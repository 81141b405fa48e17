//! The class of pullback-type extensions over a context, ordered by the
//! existence of morphisms and divided by isomorphism.

use std::sync::Arc;

use extcat::construct::{build_class, ClassKind, FunctionalSource};
use extcat::extension::{MorphismConfig, DEFAULT_BUDGET};
use extcat::order::{greatest_element, is_gaunt, iso_poset, terminal_objects};
use extcat::samples::{r, swap_context};

fn main() -> extcat::error::Result<()> {
    let ctx = Arc::new(swap_context());
    let palette = FunctionalSource::Palette(vec![r(0), r(1), r(2), r(5)]);
    let cl = build_class(ctx, ClassKind::Pb, &palette, MorphismConfig::strict(), DEFAULT_BUDGET)?;
    println!("{} pullback-type extensions", cl.len());
    let poset = iso_poset(&cl)?;
    println!("{} iso-classes, Hasse diagram {:?}", poset.classes.len(), poset.hasse());
    println!("greatest class: {:?}", greatest_element(&poset));
    println!("terminal members: {:?}", terminal_objects(&cl)?);
    println!("gaunt: {}", is_gaunt(&cl)?);
    Ok(())
}
