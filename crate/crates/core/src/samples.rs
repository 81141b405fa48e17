//! Small ready-made contexts for examples, documentation and tests.

use std::sync::Arc;

use crate::error::Result;
use crate::extension::{ContextParts, ExtensionContext};
use crate::group::{FinGroup, GroupAction, GroupHom};
use crate::rational::Rat;
use crate::sets::{FinSet, RatFn};

/// A context whose gauge group on omega is generated by permutations given
/// in cycle notation; conn carries the trivial action.
pub struct CycleContext<'a> {
    pub omega: &'a [&'a str],
    pub zero: &'a str,
    /// Each generator is a list of cycles over omega names.
    pub generators: &'a [&'a [&'a [&'a str]]],
    pub conn_hat: &'a [&'a str],
    /// `(name, base value)`; the first entry is the basepoint.
    pub conn: &'a [(&'a str, Rat)],
}

impl CycleContext<'_> {
    pub fn build(&self) -> Result<ExtensionContext> {
        let omega = FinSet::new(self.omega.iter().copied())?;
        let gens = self
            .generators
            .iter()
            .enumerate()
            .map(|(k, cycles)| {
                let mut perm: Vec<usize> = (0..omega.len()).collect();
                for cycle in cycles.iter() {
                    for (i, x) in cycle.iter().enumerate() {
                        let next = cycle[(i + 1) % cycle.len()];
                        perm[omega.require(x)?] = omega.require(next)?;
                    }
                }
                Ok((format!("g{k}"), perm))
            })
            .collect::<Result<Vec<_>>>()?;
        let (_, gau_hat) = FinGroup::from_permutations(&omega, &gens)?;
        let conn = FinSet::new(self.conn.iter().map(|(n, _)| *n))?;
        let base = RatFn::new(conn.clone(), self.conn.iter().map(|(_, v)| *v).collect())?;
        let trivial = Arc::new(FinGroup::trivial());
        let gau = GroupAction::trivial(trivial.clone(), conn.clone());
        let xi = GroupHom::trivial(trivial, gau_hat.group().clone());
        ExtensionContext::new(ContextParts {
            conn_hat: omega.subset(self.conn_hat.iter().copied())?,
            omega,
            zero: self.zero.into(),
            gau_hat,
            flat: self.conn[0].0.into(),
            conn,
            gau,
            xi,
            base,
            embedding: None,
        })
    }
}

pub fn r(n: i64) -> Rat {
    Rat::int(n)
}

/// Omega `{w0, a1, a2, b, p}` with one generator swapping `a1, a2`;
/// extended connections `{a1, a2, b}`; conn `{d0, d1, d2}` with base values
/// `0, 1, 2`.
pub fn swap_context() -> ExtensionContext {
    CycleContext {
        omega: &["w0", "a1", "a2", "b", "p"],
        zero: "w0",
        generators: &[&[&["a1", "a2"]]],
        conn_hat: &["a1", "a2", "b"],
        conn: &[("d0", r(0)), ("d1", r(1)), ("d2", r(2))],
    }
    .build()
    .expect("valid sample context")
}

/// On [`swap_context`]: `w0 ↦ 0`, `a1, a2 ↦ 1`, `b ↦ 2`, `p ↦ p_value`.
pub fn swap_functional(p_value: Rat) -> RatFn {
    let ctx = swap_context();
    RatFn::new(ctx.omega().clone(), vec![r(0), r(1), r(1), r(2), p_value]).unwrap()
}

/// The one-point context: omega = conn_hat = `{w0}`, conn = `{d0}`.
pub fn point_context() -> ExtensionContext {
    CycleContext {
        omega: &["w0"],
        zero: "w0",
        generators: &[],
        conn_hat: &["w0"],
        conn: &[("d0", r(0))],
    }
    .build()
    .expect("valid sample context")
}
