//! Generated instances run through the three theorem checkers.

use extcat::extension::DEFAULT_BUDGET;
use extcat::generate::{generate_instances, Profile};
use extcat::instance::{Instance, Theorem};
use extcat::report::Report;
use extcat::verify::verify_theorem;

fn main() -> extcat::error::Result<()> {
    let cases = [
        (Profile::TerminalNull, Theorem::A),
        (Profile::Antichain, Theorem::A),
        (Profile::DisjointCore, Theorem::B),
        (Profile::DisjointCore, Theorem::C),
        (Profile::Incomparable, Theorem::C),
    ];
    for (profile, theorem) in cases {
        let inst = Instance::resolve(generate_instances(1, profile, 1).remove(0))?;
        let cfg = inst.morphism_config()?;
        let mut report = Report::new(format!("{profile} / theorem {theorem}"));
        verify_theorem(theorem, &inst, &cfg, DEFAULT_BUDGET, &mut report);
        println!("{}", report.to_text());
    }
    Ok(())
}
