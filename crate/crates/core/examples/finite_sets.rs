//! Pullbacks and coproducts of finite sets, checked against their universal
//! properties over small test objects.

use extcat::sets::{disjoint_union, set_pullback, test_objects, verify_universal, FinMap, FinSet, UniversalWitness};

fn main() -> extcat::error::Result<()> {
    let colours = FinSet::new(["red", "blue"])?;
    let shapes = FinSet::new(["square", "circle", "star"])?;
    let cards = FinSet::new(["c1", "c2"])?;
    let shape_colour = FinMap::from_pairs(shapes.clone(), colours.clone(), &[("square", "red"), ("circle", "blue"), ("star", "red")])?;
    let card_colour = FinMap::from_pairs(cards.clone(), colours, &[("c1", "red"), ("c2", "red")])?;

    let pb = set_pullback(&shape_colour, &card_colour)?;
    println!("pullback apex: {:?}", pb.apex.elements());
    let universal = verify_universal(&UniversalWitness::Pullback {
        f: shape_colour,
        g: card_colour,
        apex: pb.apex,
        left: pb.left,
        right: pb.right,
        tests: test_objects(2),
    });
    println!("pullback universal over test objects of size <= 2: {universal}");

    let (apex, injections) = disjoint_union(&[shapes.clone(), cards.clone()]);
    println!("disjoint union: {:?}", apex.elements());
    let universal = verify_universal(&UniversalWitness::Coproduct {
        summands: vec![shapes, cards],
        apex,
        injections,
        tests: test_objects(2),
    });
    println!("coproduct universal: {universal}");
    Ok(())
}
