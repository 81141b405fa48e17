//! Orbits, quotients and invariance of a functional under a permutation group.

use extcat::group::FinGroup;
use extcat::rational::Rat;
use extcat::sets::{FinSet, RatFn};

fn main() -> extcat::error::Result<()> {
    let points = FinSet::new(["w0", "a1", "a2", "a3", "b1", "b2"])?;
    // a 3-cycle on the a's and a swap of the b's generate a group of order 6
    let gens = vec![("r".to_string(), vec![0, 2, 3, 1, 4, 5]), ("s".to_string(), vec![0, 1, 2, 3, 5, 4])];
    let (group, action) = FinGroup::from_permutations(&points, &gens)?;
    println!("group order {}", group.order());
    for orbit in action.orbits(&points)? {
        println!("orbit {orbit}");
    }
    let q = action.quotient_map(&points)?;
    println!("quotient: {:?}", q.codomain().elements());

    let f = RatFn::new(points.clone(), [0, 1, 1, 1, 2, 2].map(Rat::int).to_vec())?;
    let report = action.invariance_report(&f, &points);
    println!(
        "invariant subset {}, invariant functional {}, injective on orbits {}",
        report.invariant_subset, report.invariant_fn, report.quotient_injective
    );
    Ok(())
}
