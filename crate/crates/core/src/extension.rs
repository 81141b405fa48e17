//! Extension contexts, extensions, and the morphisms between them.
//!
//! An extension over a context is the tuple `(domain, functional,
//! correction_space, correction, delta)` where the domain sits between the
//! extended connections and the full form space, the functional is gauge
//! invariant, the correction space contains the zero form, and on the
//! correction space the functional splits as `base ∘ delta + correction`.
//!
//! Morphisms are pairs `(f, g)` whose commutation constraints are chosen by a
//! [`MorphismConfig`]; the strict configuration demands all five.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupAction, GroupHom};
use crate::rational::Rat;
use crate::sets::{count_maps, FinMap, FinSet, RatFn};

/// Default enumeration budget: large enough for every map between two
/// eight-element sets.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// Raw ingredients of an [`ExtensionContext`].
#[derive(Debug, Clone)]
pub struct ContextParts {
    pub omega: FinSet,
    pub zero: String,
    pub gau_hat: GroupAction,
    pub conn_hat: FinSet,
    pub conn: FinSet,
    pub flat: String,
    pub gau: GroupAction,
    pub xi: GroupHom,
    pub base: RatFn,
    pub embedding: Option<FinMap>,
}

/// The finite stand-in for a gauge theory together with a group extension:
/// the form space with its zero form and gauge action, the extended
/// connections, the original connections with their gauge action and
/// basepoint, the induced gauge homomorphism, and the base functional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionContext {
    omega: FinSet,
    zero: usize,
    gau_hat: GroupAction,
    conn_hat: FinSet,
    conn: FinSet,
    flat: usize,
    gau: GroupAction,
    xi: GroupHom,
    base: RatFn,
    embedding: Option<FinMap>,
    core: FinSet,
}

impl ExtensionContext {
    pub fn new(p: ContextParts) -> Result<Self> {
        let zero = p
            .omega
            .index_of(&p.zero)
            .ok_or_else(|| Error::InvalidContext(format!("zero form `{}` is not in omega", p.zero)))?;
        let flat = p
            .conn
            .index_of(&p.flat)
            .ok_or_else(|| Error::InvalidContext(format!("basepoint `{}` is not in conn", p.flat)))?;
        if p.gau_hat.carrier() != &p.omega {
            return Err(Error::InvalidContext("gau_hat must act on omega".into()));
        }
        if p.gau.carrier() != &p.conn {
            return Err(Error::InvalidContext("gau must act on conn".into()));
        }
        if (0..p.gau_hat.group().order()).any(|g| p.gau_hat.act(g, zero) != zero) {
            return Err(Error::InvalidContext("gau_hat must fix the zero form".into()));
        }
        if !p.conn_hat.is_subset_of(&p.omega) {
            return Err(Error::InvalidContext("conn_hat must be a subset of omega".into()));
        }
        if !p.gau_hat.is_invariant(&p.conn_hat) {
            return Err(Error::InvalidContext("conn_hat must be gau_hat-invariant".into()));
        }
        if p.base.domain() != &p.conn {
            return Err(Error::InvalidContext("base_s must be defined on conn".into()));
        }
        if !p.base.value(flat).is_zero() {
            return Err(Error::InvalidContext(format!(
                "base_s(d0) must be 0, found {}",
                p.base.value(flat)
            )));
        }
        if **p.xi.source() != **p.gau.group() || **p.xi.target() != **p.gau_hat.group() {
            return Err(Error::InvalidContext("xi must map group(gau) to group(gau_hat)".into()));
        }
        if let Some(emb) = &p.embedding {
            if emb.domain() != &p.conn || emb.codomain() != &p.omega || !emb.is_injective() {
                return Err(Error::InvalidContext("embedding must be an injection conn -> omega".into()));
            }
        }
        let mut core_mask = p.conn_hat.mask_in(&p.omega)?;
        core_mask[zero] = true;
        let core = p.omega.subset_mask(&core_mask);
        // conn_hat is only compared structurally; normalise it to omega order
        let conn_hat = p.omega.subset(p.conn_hat.iter())?;
        Ok(ExtensionContext {
            omega: p.omega,
            zero,
            gau_hat: p.gau_hat,
            conn_hat,
            conn: p.conn,
            flat,
            gau: p.gau,
            xi: p.xi,
            base: p.base,
            embedding: p.embedding,
            core,
        })
    }

    pub fn omega(&self) -> &FinSet {
        &self.omega
    }
    pub fn zero(&self) -> usize {
        self.zero
    }
    pub fn zero_name(&self) -> &str {
        self.omega.get(self.zero)
    }
    pub fn gau_hat(&self) -> &GroupAction {
        &self.gau_hat
    }
    pub fn conn_hat(&self) -> &FinSet {
        &self.conn_hat
    }
    pub fn conn(&self) -> &FinSet {
        &self.conn
    }
    pub fn flat(&self) -> usize {
        self.flat
    }
    pub fn flat_name(&self) -> &str {
        self.conn.get(self.flat)
    }
    pub fn gau(&self) -> &GroupAction {
        &self.gau
    }
    pub fn xi(&self) -> &GroupHom {
        &self.xi
    }
    pub fn base(&self) -> &RatFn {
        &self.base
    }
    pub fn embedding(&self) -> Option<&FinMap> {
        self.embedding.as_ref()
    }

    /// The mandatory core `conn_hat ∪ {ω₀}` every extended domain contains.
    pub fn core(&self) -> &FinSet {
        &self.core
    }

    /// Gau-invariant supersets of the core inside omega, smallest first in
    /// the binary order of the non-core orbits they add.
    pub fn extended_domains(&self) -> Vec<FinSet> {
        let core_mask = self.core.mask_in(&self.omega).expect("core in omega");
        let extra: Vec<Vec<usize>> = self
            .gau_hat
            .orbit_indices()
            .into_iter()
            .filter(|o| !core_mask[o[0]])
            .collect();
        (0u64..(1u64 << extra.len()))
            .map(|bits| {
                let mut mask = core_mask.clone();
                for (k, o) in extra.iter().enumerate() {
                    if bits >> k & 1 == 1 {
                        for &x in o {
                            mask[x] = true;
                        }
                    }
                }
                self.omega.subset_mask(&mask)
            })
            .collect()
    }
}

/// An extension `(domain, functional, correction_space, correction, delta)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Extension {
    domain: FinSet,
    functional: RatFn,
    correction_space: FinSet,
    correction: RatFn,
    delta: FinMap,
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "X={} s={:?} C1={} c={:?} delta={:?}",
            self.domain, self.functional, self.correction_space, self.correction, self.delta
        )
    }
}

impl Extension {
    /// Structural checks only: the functional lives on the domain, the
    /// correction and delta live on the correction space. Everything else is
    /// reported by [`validate_extension`].
    pub fn new(domain: FinSet, functional: RatFn, correction_space: FinSet, correction: RatFn, delta: FinMap) -> Result<Self> {
        if functional.domain() != &domain {
            return Err(Error::MalformedExtension("functional must be defined on the domain".into()));
        }
        if correction.domain() != &correction_space {
            return Err(Error::MalformedExtension("correction must be defined on the correction space".into()));
        }
        if delta.domain() != &correction_space {
            return Err(Error::MalformedExtension("delta must be defined on the correction space".into()));
        }
        Ok(Extension {
            domain,
            functional,
            correction_space,
            correction,
            delta,
        })
    }

    pub fn domain(&self) -> &FinSet {
        &self.domain
    }
    pub fn functional(&self) -> &RatFn {
        &self.functional
    }
    pub fn correction_space(&self) -> &FinSet {
        &self.correction_space
    }
    pub fn correction(&self) -> &RatFn {
        &self.correction
    }
    pub fn delta(&self) -> &FinMap {
        &self.delta
    }

    pub fn is_complete(&self) -> bool {
        self.correction.is_zero()
    }

    /// Correction space inside `conn_hat ∪ {ω₀}`.
    pub fn is_small(&self, ctx: &ExtensionContext) -> bool {
        self.correction_space.is_subset_of(ctx.core())
    }

    /// The functional descends injectively to the gauge quotient of the
    /// domain.
    pub fn is_injective(&self, ctx: &ExtensionContext) -> bool {
        ctx.gau_hat().invariance_report(&self.functional, &self.domain).all()
    }

    /// Same extension with elements of omega and conn renamed. Used to build
    /// relabelled copies in other contexts.
    pub fn relabel(&self, omega: &dyn Fn(&str) -> String, conn: &FinSet, conn_name: &dyn Fn(&str) -> String) -> Result<Extension> {
        let domain = FinSet::new(self.domain.iter().map(omega))?;
        let c1 = FinSet::new(self.correction_space.iter().map(omega))?;
        let functional = RatFn::new(domain.clone(), self.functional.values().to_vec())?;
        let correction = RatFn::new(c1.clone(), self.correction.values().to_vec())?;
        let pairs: Vec<(String, String)> = self
            .delta
            .pairs()
            .map(|(a, b)| (omega(a), conn_name(b)))
            .collect();
        let delta = FinMap::from_pairs(c1.clone(), conn.clone(), &pairs)?;
        Extension::new(domain, functional, c1, correction, delta)
    }
}

/// A single violated extension invariant with its witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    DomainOutsideOmega { element: String },
    DomainChain { missing: String },
    DomainNotInvariant { element: String, image: String },
    FunctionalNotInvariant { element: String, image: String },
    CorrectionOutsideDomain { element: String },
    ZeroNotInCorrection,
    DeltaCodomain,
    Decomposition { point: String, functional: Rat, base: Rat, correction: Rat },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DomainOutsideOmega { element } => write!(f, "domain chain: `{element}` is not in omega"),
            Violation::DomainChain { missing } => {
                write!(f, "domain chain: `{missing}` of conn_hat ∪ {{ω₀}} is missing from the domain")
            }
            Violation::DomainNotInvariant { element, image } => {
                write!(f, "domain invariance: `{element}` moves to `{image}` outside the domain")
            }
            Violation::FunctionalNotInvariant { element, image } => {
                write!(f, "functional invariance: s_hat({element}) != s_hat({image})")
            }
            Violation::CorrectionOutsideDomain { element } => {
                write!(f, "correction space: `{element}` is not in the domain")
            }
            Violation::ZeroNotInCorrection => write!(f, "correction space: ω₀ is missing"),
            Violation::DeltaCodomain => write!(f, "delta must land in conn"),
            Violation::Decomposition { point, functional, base, correction } => write!(
                f,
                "decomposition: s_hat({point}) = {functional} but base_s(delta({point})) + c_fn({point}) = {base} + {correction}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_extension(ctx: &ExtensionContext, e: &Extension) -> ValidationReport {
    let mut v = Vec::new();
    let omega = ctx.omega();
    for x in e.domain.iter() {
        if !omega.contains(x) {
            v.push(Violation::DomainOutsideOmega { element: x.to_string() });
        }
    }
    for c in ctx.core().iter() {
        if !e.domain.contains(c) {
            v.push(Violation::DomainChain { missing: c.to_string() });
        }
    }
    let act = ctx.gau_hat();
    for (i, x) in e.domain.iter().enumerate() {
        let Some(xi) = omega.index_of(x) else { continue };
        for g in 0..act.group().order() {
            let y = omega.get(act.act(g, xi));
            match e.domain.index_of(y) {
                None => {
                    v.push(Violation::DomainNotInvariant { element: x.to_string(), image: y.to_string() });
                    break;
                }
                Some(j) if e.functional.value(j) != e.functional.value(i) => {
                    v.push(Violation::FunctionalNotInvariant { element: x.to_string(), image: y.to_string() });
                    break;
                }
                _ => {}
            }
        }
    }
    for c in e.correction_space.iter() {
        if !e.domain.contains(c) {
            v.push(Violation::CorrectionOutsideDomain { element: c.to_string() });
        }
    }
    if !e.correction_space.contains(ctx.zero_name()) {
        v.push(Violation::ZeroNotInCorrection);
    }
    if e.delta.codomain() != ctx.conn() {
        v.push(Violation::DeltaCodomain);
    } else {
        for (k, c) in e.correction_space.iter().enumerate() {
            let Some(s) = e.functional.value_of(c) else { continue };
            let base = ctx.base().value(e.delta.apply(k));
            let corr = e.correction.value(k);
            if s != base + corr {
                v.push(Violation::Decomposition { point: c.to_string(), functional: s, base, correction: corr });
            }
        }
    }
    ValidationReport { violations: v }
}

/// The null extension: the whole form space, correction space `{ω₀}`, and
/// every map null.
pub fn null_extension(ctx: &ExtensionContext) -> Extension {
    let zero_set = FinSet::new([ctx.zero_name()]).unwrap();
    Extension {
        domain: ctx.omega().clone(),
        functional: RatFn::zero(ctx.omega().clone()),
        correction_space: zero_set.clone(),
        correction: RatFn::zero(zero_set.clone()),
        delta: FinMap::constant(zero_set, ctx.conn().clone(), ctx.flat()).unwrap(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrivialKind {
    Null,
    Constant,
    Identity,
    Nontrivial,
}

impl fmt::Display for TrivialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrivialKind::Null => "null-type",
            TrivialKind::Constant => "constant-type",
            TrivialKind::Identity => "identity-type",
            TrivialKind::Nontrivial => "nontrivial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub kind: TrivialKind,
    /// `false` when the context declares no embedding `conn ↪ omega`, in
    /// which case identity-type is not tested.
    pub identity_applicable: bool,
}

/// Null, constant and identity patterns are tested in that order.
pub fn classify_trivial(ctx: &ExtensionContext, e: &Extension) -> Classification {
    let identity_applicable = ctx.embedding().is_some();
    let delta_constant = e.delta.table().windows(2).all(|w| w[0] == w[1]);
    let kind = if e.functional.is_zero() && e.correction.is_zero() && e.delta.table().iter().all(|&d| d == ctx.flat()) {
        TrivialKind::Null
    } else if e.functional.is_constant() && e.correction.is_constant() && delta_constant {
        TrivialKind::Constant
    } else if let Some(emb) = ctx.embedding() {
        let mut hit = false;
        let mut inverse_ok = true;
        for (k, c) in e.correction_space.iter().enumerate() {
            if emb.image().contains(c) {
                hit = true;
                if ctx.omega().get(emb.apply(e.delta.apply(k))) != c {
                    inverse_ok = false;
                }
            }
        }
        if hit && inverse_ok {
            TrivialKind::Identity
        } else {
            TrivialKind::Nontrivial
        }
    } else {
        TrivialKind::Nontrivial
    };
    Classification { kind, identity_applicable }
}

/// One commutation constraint of the morphism diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Constraint {
    Equivariance,
    InclusionSquare,
    DeltaSquare,
    ScalarC,
    ScalarS,
}

impl Constraint {
    pub const ALL: [Constraint; 5] = [
        Constraint::Equivariance,
        Constraint::InclusionSquare,
        Constraint::DeltaSquare,
        Constraint::ScalarC,
        Constraint::ScalarS,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Constraint::Equivariance => "equivariance",
            Constraint::InclusionSquare => "inclusion-square",
            Constraint::DeltaSquare => "delta-square",
            Constraint::ScalarC => "scalar-C",
            Constraint::ScalarS => "scalar-S",
        }
    }
}

/// Which constraints a morphism must satisfy. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MorphismConfig {
    constraints: BTreeSet<Constraint>,
}

impl MorphismConfig {
    pub fn strict() -> Self {
        MorphismConfig {
            constraints: Constraint::ALL.into_iter().collect(),
        }
    }

    /// Equivariance and the inclusion square only.
    pub fn lax() -> Self {
        MorphismConfig::new([Constraint::Equivariance, Constraint::InclusionSquare]).unwrap()
    }

    pub fn new(constraints: impl IntoIterator<Item = Constraint>) -> Result<Self> {
        let constraints: BTreeSet<_> = constraints.into_iter().collect();
        if constraints.is_empty() {
            return Err(Error::InvalidConfig("at least one constraint is required".into()));
        }
        Ok(MorphismConfig { constraints })
    }

    pub fn has(&self, c: Constraint) -> bool {
        self.constraints.contains(&c)
    }

    pub fn constraints(&self) -> impl Iterator<Item = Constraint> + '_ {
        self.constraints.iter().copied()
    }

    pub fn is_strict(&self) -> bool {
        self.constraints.len() == Constraint::ALL.len()
    }
}

impl Default for MorphismConfig {
    fn default() -> Self {
        MorphismConfig::strict()
    }
}

impl fmt::Display for MorphismConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_strict() {
            return f.write_str("strict");
        }
        let names: Vec<&str> = self.constraints.iter().map(Constraint::name).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for MorphismConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "strict" => return Ok(MorphismConfig::strict()),
            "lax" => return Ok(MorphismConfig::lax()),
            _ => {}
        }
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let c = Constraint::ALL
                .into_iter()
                .find(|c| c.name().eq_ignore_ascii_case(part))
                .ok_or_else(|| Error::InvalidConfig(format!("unknown constraint `{part}`")))?;
            out.push(c);
        }
        MorphismConfig::new(out)
    }
}

/// A pair `(f, g)`: `f` between domains, `g` between correction spaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtMorphism {
    pub f: FinMap,
    pub g: FinMap,
}

impl fmt::Display for ExtMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f={:?} g={:?}", self.f, self.g)
    }
}

impl ExtMorphism {
    pub fn identity(e: &Extension) -> Self {
        ExtMorphism {
            f: FinMap::identity(&e.domain),
            g: FinMap::identity(&e.correction_space),
        }
    }

    pub fn inclusion(sub: &Extension, sup: &Extension) -> Result<Self> {
        Ok(ExtMorphism {
            f: FinMap::inclusion(&sub.domain, &sup.domain)?,
            g: FinMap::inclusion(&sub.correction_space, &sup.correction_space)?,
        })
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ExtMorphism) -> Result<Self> {
        Ok(ExtMorphism {
            f: crate::sets::compose(&self.f, &next.f)?,
            g: crate::sets::compose(&self.g, &next.g)?,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.f == FinMap::identity(self.f.domain()) && self.g == FinMap::identity(self.g.domain())
    }

    pub fn is_bijective(&self) -> bool {
        let (pf, pg) = (self.f.properties(), self.g.properties());
        pf.injective && pf.surjective && pg.injective && pg.surjective
    }

    pub fn is_monic(&self) -> bool {
        self.f.is_injective() && self.g.is_injective()
    }

    pub fn inverse(&self) -> Option<Self> {
        Some(ExtMorphism {
            f: self.f.inverse()?,
            g: self.g.inverse()?,
        })
    }
}

/// Constraints of `cfg` that `m` violates, checked pointwise.
pub fn morphism_violations(ctx: &ExtensionContext, e1: &Extension, e2: &Extension, m: &ExtMorphism, cfg: &MorphismConfig) -> Vec<Constraint> {
    let mut bad = Vec::new();
    if m.f.domain() != &e1.domain || m.f.codomain() != &e2.domain || m.g.domain() != &e1.correction_space || m.g.codomain() != &e2.correction_space {
        return Constraint::ALL.to_vec();
    }
    for c in cfg.constraints() {
        let ok = match c {
            Constraint::Equivariance => {
                let a = ctx.gau_hat();
                crate::group::is_equivariant(&m.f, a, a, None)
            }
            Constraint::InclusionSquare => e1.correction_space.iter().enumerate().all(|(k, c)| {
                let via_f = m.f.apply_name(c);
                let via_g = e2.correction_space.get(m.g.apply(k));
                via_f == Some(via_g)
            }),
            Constraint::DeltaSquare => (0..e1.correction_space.len()).all(|k| e2.delta.apply(m.g.apply(k)) == e1.delta.apply(k)),
            Constraint::ScalarC => (0..e1.correction_space.len()).all(|k| e2.correction.value(m.g.apply(k)) == e1.correction.value(k)),
            Constraint::ScalarS => (0..e1.domain.len()).all(|i| e2.functional.value(m.f.apply(i)) == e1.functional.value(i)),
        };
        if !ok {
            bad.push(c);
        }
    }
    bad
}

pub fn is_morphism(ctx: &ExtensionContext, e1: &Extension, e2: &Extension, m: &ExtMorphism, cfg: &MorphismConfig) -> bool {
    morphism_violations(ctx, e1, e2, m, cfg).is_empty()
}

fn check_budget(needed: u128, budget: u64) -> Result<()> {
    if needed > budget as u128 {
        Err(Error::SearchBudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

/// Precomputed index data for the hom search between two extensions.
struct HomSearch<'a> {
    ctx: &'a ExtensionContext,
    e1: &'a Extension,
    e2: &'a Extension,
    cfg: &'a MorphismConfig,
    /// omega index of each domain element of e1
    x1_omega: Vec<usize>,
    /// position in e2's domain of each omega element
    x2_pos: Vec<Option<usize>>,
    x2_omega: Vec<usize>,
    /// position of each e1 domain element inside e1's correction space
    c1_pos: Vec<Option<usize>>,
    /// position of each e2 domain element inside e2's correction space
    c2_pos: Vec<Option<usize>>,
    x1_pos: Vec<Option<usize>>,
}

impl<'a> HomSearch<'a> {
    fn new(ctx: &'a ExtensionContext, e1: &'a Extension, e2: &'a Extension, cfg: &'a MorphismConfig) -> Result<Self> {
        let omega = ctx.omega();
        let x1_omega = e1.domain.indices_in(omega)?;
        let x2_omega = e2.domain.indices_in(omega)?;
        let mut x2_pos = vec![None; omega.len()];
        for (j, &w) in x2_omega.iter().enumerate() {
            x2_pos[w] = Some(j);
        }
        let mut x1_pos = vec![None; omega.len()];
        for (j, &w) in x1_omega.iter().enumerate() {
            x1_pos[w] = Some(j);
        }
        let c1_pos = e1.domain.iter().map(|x| e1.correction_space.index_of(x)).collect();
        let c2_pos = e2.domain.iter().map(|x| e2.correction_space.index_of(x)).collect();
        Ok(HomSearch {
            ctx,
            e1,
            e2,
            cfg,
            x1_omega,
            x2_pos,
            x2_omega,
            c1_pos,
            c2_pos,
            x1_pos,
        })
    }

    /// Unary constraints on `f(i) = j`.
    fn allowed(&self, i: usize, j: usize) -> bool {
        if self.cfg.has(Constraint::ScalarS) && self.e2.functional.value(j) != self.e1.functional.value(i) {
            return false;
        }
        if self.cfg.has(Constraint::InclusionSquare) {
            if let Some(k) = self.c1_pos[i] {
                let Some(k2) = self.c2_pos[j] else { return false };
                if !self.g_allowed(k, k2) {
                    return false;
                }
            }
        }
        true
    }

    /// Unary constraints on `g(k) = k2`.
    fn g_allowed(&self, k: usize, k2: usize) -> bool {
        if self.cfg.has(Constraint::DeltaSquare) && self.e2.delta.apply(k2) != self.e1.delta.apply(k) {
            return false;
        }
        if self.cfg.has(Constraint::ScalarC) && self.e2.correction.value(k2) != self.e1.correction.value(k) {
            return false;
        }
        true
    }

    fn search_f(&self, i: usize, f: &mut Vec<Option<usize>>, emit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>) -> ControlFlow<()> {
        let n = f.len();
        if i == n {
            let table: Vec<usize> = f.iter().map(|v| v.expect("complete")).collect();
            return emit(&table);
        }
        if f[i].is_some() {
            return self.search_f(i + 1, f, emit);
        }
        let act = self.ctx.gau_hat();
        let equivariant = self.cfg.has(Constraint::Equivariance);
        for j in 0..self.e2.domain.len() {
            if !self.allowed(i, j) {
                continue;
            }
            if !equivariant {
                f[i] = Some(j);
                self.search_f(i + 1, f, emit)?;
                f[i] = None;
                continue;
            }
            // propagate along the orbit of element i
            let mut set_here = Vec::new();
            let mut ok = true;
            for g in 0..act.group().order() {
                let Some(ii) = self.x1_pos[act.act(g, self.x1_omega[i])] else {
                    ok = false;
                    break;
                };
                let Some(jj) = self.x2_pos[act.act(g, self.x2_omega[j])] else {
                    ok = false;
                    break;
                };
                match f[ii] {
                    Some(prev) if prev != jj => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        if !self.allowed(ii, jj) {
                            ok = false;
                            break;
                        }
                        f[ii] = Some(jj);
                        set_here.push(ii);
                    }
                }
            }
            if ok {
                self.search_f(i + 1, f, emit)?;
            }
            for ii in set_here {
                f[ii] = None;
            }
        }
        ControlFlow::Continue(())
    }

    fn g_choices(&self) -> Vec<Vec<usize>> {
        (0..self.e1.correction_space.len())
            .map(|k| (0..self.e2.correction_space.len()).filter(|&k2| self.g_allowed(k, k2)).collect())
            .collect()
    }

    fn run(&self, budget: u64, emit: &mut dyn FnMut(ExtMorphism) -> ControlFlow<()>) -> Result<()> {
        check_budget(count_maps(self.e1.domain.len(), self.e2.domain.len()), budget)?;
        let inclusion = self.cfg.has(Constraint::InclusionSquare);
        if !inclusion {
            check_budget(
                count_maps(self.e1.correction_space.len(), self.e2.correction_space.len()),
                budget,
            )?;
        }
        let g_tables = if inclusion {
            Vec::new()
        } else {
            crate::sets::product_of(&self.g_choices())
        };
        let mut f = vec![None; self.e1.domain.len()];
        let mut emitted: u64 = 0;
        let mut over = false;
        let mut on_f = |table: &[usize]| -> ControlFlow<()> {
            let fm = FinMap::new(self.e1.domain.clone(), self.e2.domain.clone(), table.to_vec()).expect("in range");
            let mut push = |g: Vec<usize>| -> ControlFlow<()> {
                emitted += 1;
                if emitted > budget {
                    over = true;
                    return ControlFlow::Break(());
                }
                let gm = FinMap::new(self.e1.correction_space.clone(), self.e2.correction_space.clone(), g).expect("in range");
                emit(ExtMorphism { f: fm.clone(), g: gm })
            };
            if inclusion {
                let g = (0..self.e1.domain.len())
                    .filter_map(|i| self.c1_pos[i].map(|k| (k, i)))
                    .fold(vec![0; self.e1.correction_space.len()], |mut acc, (k, i)| {
                        acc[k] = self.c2_pos[table[i]].expect("checked by allowed");
                        acc
                    });
                push(g)
            } else {
                for g in &g_tables {
                    push(g.clone())?;
                }
                ControlFlow::Continue(())
            }
        };
        let _ = self.search_f(0, &mut f, &mut on_f);
        if over {
            return Err(Error::SearchBudgetExceeded {
                needed: emitted as u128,
                budget,
            });
        }
        Ok(())
    }
}

/// Every morphism `e1 -> e2` satisfying exactly the constraints in `cfg`,
/// in lexicographic order of the `(f, g)` tables.
pub fn hom_set(ctx: &ExtensionContext, e1: &Extension, e2: &Extension, cfg: &MorphismConfig, budget: u64) -> Result<Vec<ExtMorphism>> {
    let search = HomSearch::new(ctx, e1, e2, cfg)?;
    let mut out = Vec::new();
    search.run(budget, &mut |m| {
        out.push(m);
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Number of morphisms, stopping once `cap` is reached.
pub fn hom_count(ctx: &ExtensionContext, e1: &Extension, e2: &Extension, cfg: &MorphismConfig, budget: u64, cap: usize) -> Result<usize> {
    let search = HomSearch::new(ctx, e1, e2, cfg)?;
    let mut n = 0;
    search.run(budget, &mut |_| {
        n += 1;
        if n >= cap {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(n)
}

/// An invertible morphism `e1 -> e2` whose inverse pair is also a morphism.
pub fn find_isomorphism(ctx: &ExtensionContext, e1: &Extension, e2: &Extension, cfg: &MorphismConfig, budget: u64) -> Result<Option<ExtMorphism>> {
    if e1.domain.len() != e2.domain.len() || e1.correction_space.len() != e2.correction_space.len() {
        return Ok(None);
    }
    let search = HomSearch::new(ctx, e1, e2, cfg)?;
    let mut found = None;
    search.run(budget, &mut |m| {
        if let Some(inv) = m.inverse() {
            if is_morphism(ctx, e2, e1, &inv, cfg) {
                found = Some(m);
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })?;
    Ok(found)
}

/// Partition of `class` (by index) into isomorphism classes; blocks are
/// ordered by their first member.
pub fn iso_classes(ctx: &ExtensionContext, class: &[Extension], cfg: &MorphismConfig, budget: u64) -> Result<Vec<Vec<usize>>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    'members: for (i, e) in class.iter().enumerate() {
        for b in blocks.iter_mut() {
            if find_isomorphism(ctx, &class[b[0]], e, cfg, budget)?.is_some() {
                b.push(i);
                continue 'members;
            }
        }
        blocks.push(vec![i]);
    }
    Ok(blocks)
}

/// Keeps the same domain and functional, drops the correction and restricts
/// the correction space to the points where the decomposition already holds
/// without it.
pub fn completion(ctx: &ExtensionContext, e: &Extension) -> Result<Extension> {
    let zero = ctx.zero_name();
    match e.correction.value_of(zero) {
        Some(c) if !c.is_zero() => return Err(Error::ZeroExcluded(c.to_string())),
        None => return Err(Error::ZeroExcluded("undefined".into())),
        _ => {}
    }
    let keep: Vec<bool> = (0..e.correction_space.len())
        .map(|k| {
            let c = e.correction_space.get(k);
            e.functional.value_of(c) == Some(ctx.base().value(e.delta.apply(k)))
        })
        .collect();
    let c1 = e.correction_space.subset_mask(&keep);
    Ok(Extension {
        domain: e.domain.clone(),
        functional: e.functional.clone(),
        correction: RatFn::zero(c1.clone()),
        delta: e.delta.restrict(&c1)?,
        correction_space: c1,
    })
}

/// The union extension of a family whose domains meet only in the core,
/// together with the canonical injections.
#[derive(Debug, Clone)]
pub struct Coproduct {
    pub extension: Extension,
    pub injections: Vec<ExtMorphism>,
}

/// Correction spaces may share points of the core as long as correction and
/// delta agree there.
pub fn coproduct(ctx: &ExtensionContext, family: &[Extension]) -> Result<Coproduct> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let omega = ctx.omega();
    let core = ctx.core();
    for (a, ea) in family.iter().enumerate() {
        for eb in &family[a + 1..] {
            let shared = ea.domain.intersection(&eb.domain);
            if let Some(x) = shared.iter().find(|x| !core.contains(x)) {
                return Err(Error::OverlapViolation(x.to_string()));
            }
            for x in shared.iter() {
                if ea.functional.value_of(x) != eb.functional.value_of(x) {
                    return Err(Error::CoreDisagreement(x.to_string()));
                }
            }
            for c in ea.correction_space.intersection(&eb.correction_space).iter() {
                let (ka, kb) = (ea.correction_space.index_of(c).unwrap(), eb.correction_space.index_of(c).unwrap());
                if ea.correction.value(ka) != eb.correction.value(kb) || ea.delta.apply(ka) != eb.delta.apply(kb) {
                    return Err(Error::CoreDisagreement(c.to_string()));
                }
            }
        }
    }
    let mut dom_mask = vec![false; omega.len()];
    let mut c1_mask = vec![false; omega.len()];
    let mut value = vec![Rat::ZERO; omega.len()];
    let mut corr = vec![Rat::ZERO; omega.len()];
    let mut delta = vec![0usize; omega.len()];
    for e in family {
        for (i, x) in e.domain.iter().enumerate() {
            let w = omega.require(x)?;
            dom_mask[w] = true;
            value[w] = e.functional.value(i);
        }
        for (k, c) in e.correction_space.iter().enumerate() {
            let w = omega.require(c)?;
            c1_mask[w] = true;
            corr[w] = e.correction.value(k);
            delta[w] = e.delta.apply(k);
        }
    }
    let domain = omega.subset_mask(&dom_mask);
    let c1 = omega.subset_mask(&c1_mask);
    let w_of = |s: &FinSet, k: usize| omega.index_of(s.get(k)).unwrap();
    let extension = Extension {
        functional: RatFn::from_fn(domain.clone(), |i| value[w_of(&domain, i)]),
        correction: RatFn::from_fn(c1.clone(), |k| corr[w_of(&c1, k)]),
        delta: FinMap::from_fn(c1.clone(), ctx.conn().clone(), |k| delta[w_of(&c1, k)])?,
        domain,
        correction_space: c1,
    };
    let injections = family
        .iter()
        .map(|e| ExtMorphism::inclusion(e, &extension))
        .collect::<Result<Vec<_>>>()?;
    Ok(Coproduct { extension, injections })
}

/// Convenience for building an extension from name/value pairs.
pub struct ExtensionBuilder<'a> {
    pub ctx: &'a ExtensionContext,
    pub domain: Vec<(&'a str, Rat)>,
    pub correction: Vec<(&'a str, Rat, &'a str)>,
}

impl ExtensionBuilder<'_> {
    /// `domain` gives `(element, functional value)`; `correction` gives
    /// `(element, correction value, delta image)`.
    pub fn build(&self) -> Result<Extension> {
        let omega = self.ctx.omega();
        let domain = omega.subset(self.domain.iter().map(|(x, _)| *x))?;
        let functional = RatFn::from_pairs(domain.clone(), &self.domain)?;
        let c1 = omega.subset(self.correction.iter().map(|(x, _, _)| *x))?;
        let correction = RatFn::from_pairs(c1.clone(), &self.correction.iter().map(|(x, v, _)| (*x, *v)).collect::<Vec<_>>())?;
        let delta = FinMap::from_pairs(c1.clone(), self.ctx.conn().clone(), &self.correction.iter().map(|(x, _, d)| (*x, *d)).collect::<Vec<_>>())?;
        Extension::new(domain, functional, c1, correction, delta)
    }
}

pub type SharedContext = Arc<ExtensionContext>;
