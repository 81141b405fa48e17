//! Gauge fixings, pullback-type extensions, injectivization, the retraction
//! onto pullback type, nested-domain comparison, and class builders.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{completion, is_morphism, ExtMorphism, Extension, ExtensionContext, MorphismConfig};
use crate::order::ExtClass;
use crate::rational::Rat;
use crate::sets::{compose, enumerate_sections, product_of, set_pullback, FinMap, FinSet, RatFn};

/// A section `σ` of the projection of the extended connections onto their
/// gauge orbits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaugeFixing {
    sigma: FinMap,
}

impl GaugeFixing {
    /// Checks `π ∘ σ = id` for the context's projection.
    pub fn new(ctx: &ExtensionContext, sigma: FinMap) -> Result<Self> {
        let pi = ctx.gau_hat().quotient_map(ctx.conn_hat())?;
        if sigma.domain() != pi.codomain() || sigma.codomain() != ctx.conn_hat() {
            return Err(Error::DomainMismatch("gauge fixing must map orbit representatives into conn_hat".into()));
        }
        if compose(&sigma, &pi)? != FinMap::identity(pi.codomain()) {
            return Err(Error::Precondition("gauge fixing is not a section of the orbit projection".into()));
        }
        Ok(GaugeFixing { sigma })
    }

    pub fn sigma(&self) -> &FinMap {
        &self.sigma
    }
}

impl fmt::Display for GaugeFixing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.sigma)
    }
}

/// All gauge fixings, in the order of [`enumerate_sections`].
pub fn gauge_fixings(ctx: &ExtensionContext) -> Result<Vec<GaugeFixing>> {
    if ctx.conn_hat().is_empty() {
        return Err(Error::EmptyConnHat);
    }
    let pi = ctx.gau_hat().quotient_map(ctx.conn_hat())?;
    Ok(enumerate_sections(&pi)?
        .into_iter()
        .map(|sigma| GaugeFixing { sigma })
        .collect())
}

/// The pullback of the base functional against the quotient functional on
/// extended connections, and its embedding into the form space through a
/// gauge fixing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PullbackWitness {
    /// Pairs `(d, [c])` with `base_s(d) = s(c)`.
    pub pb: FinSet,
    pub delta: FinMap,
    /// Orbit coordinate of each pair, into the orbit representatives.
    pub orbit: FinMap,
    /// `σ` applied to the orbit coordinate, into omega; injective.
    pub embed: FinMap,
    /// Range of `embed`.
    pub image: FinSet,
    /// Every gauge transformation of conn preserves the base value of each
    /// pair, so the action lifts to the pullback.
    pub xi_square: bool,
}

/// Builds the complete extension on `x0 ∪ {ω₀}` whose correction space is
/// the embedded pullback locus plus the zero form.
pub fn pullback_type_extension(ctx: &ExtensionContext, x0: &FinSet, s: &RatFn, sigma: &GaugeFixing) -> Result<(Extension, PullbackWitness)> {
    let omega = ctx.omega();
    if !x0.is_subset_of(omega) {
        return Err(Error::NotInjectiveInvariant("x0 is not a subset of omega".into()));
    }
    if !ctx.conn_hat().is_subset_of(x0) {
        return Err(Error::NotInjectiveInvariant("x0 does not contain conn_hat".into()));
    }
    let x = x0.union_in(&FinSet::new([ctx.zero_name()])?, omega)?;
    if let Some(missing) = x.iter().find(|p| s.value_of(p).is_none()) {
        return Err(Error::NotInjectiveInvariant(format!("functional is undefined at `{missing}`")));
    }
    let report = ctx.gau_hat().invariance_report(s, &x);
    if !report.all() {
        return Err(Error::NotInjectiveInvariant(format!(
            "invariant subset {}, invariant functional {}, quotient-injective {}",
            report.invariant_subset, report.invariant_fn, report.quotient_injective
        )));
    }
    let s0 = s.value_of(ctx.zero_name()).unwrap();
    if !s0.is_zero() {
        return Err(Error::ZeroDecomposition(s0.to_string()));
    }
    let s_hat = s.restrict(&x)?;
    let pi = ctx.gau_hat().quotient_map(ctx.conn_hat())?;
    if sigma.sigma.domain() != pi.codomain() {
        return Err(Error::DomainMismatch("gauge fixing belongs to another context".into()));
    }
    let reps = pi.codomain().clone();
    let sbar = RatFn::from_fn(reps.clone(), |q| s.value_of(reps.get(q)).unwrap());
    let values = RatFn::value_set(&[ctx.base(), &sbar]);
    let pb = set_pullback(&ctx.base().as_map(&values)?, &sbar.as_map(&values)?)?;
    let into_omega = FinMap::inclusion(ctx.conn_hat(), omega)?;
    let embed = compose(&compose(&pb.right, &sigma.sigma)?, &into_omega)?;
    if !embed.is_injective() {
        return Err(Error::NonMonicPullback(format!(
            "two pairs share an orbit; base_s is not injective on the matched values ({:?})",
            embed
        )));
    }
    let image = embed.image();
    let xi_square = (0..pb.apex.len()).all(|p| {
        let d = pb.left.apply(p);
        (0..ctx.gau().group().order()).all(|h| ctx.base().value(ctx.gau().act(h, d)) == ctx.base().value(d))
    });

    let mut c1_mask = image.mask_in(omega)?;
    c1_mask[ctx.zero()] = true;
    let c1 = omega.subset_mask(&c1_mask);
    let delta = FinMap::from_fn(c1.clone(), ctx.conn().clone(), |k| {
        let w = omega.index_of(c1.get(k)).unwrap();
        match (0..pb.apex.len()).find(|&p| embed.apply(p) == w) {
            Some(p) => pb.left.apply(p),
            None => ctx.flat(),
        }
    })?;
    let e = Extension::new(x, s_hat, c1.clone(), RatFn::zero(c1), delta)?;
    let witness = PullbackWitness {
        pb: pb.apex,
        delta: pb.left,
        orbit: pb.right,
        embed,
        image,
        xi_square,
    };
    Ok((e, witness))
}

/// Two gauge fixings compared through their common pullback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SigmaPair {
    pub first: usize,
    pub second: usize,
    /// `embed₂ ∘ embed₁⁻¹` on the embedded loci, as `(from, to)` names.
    pub bijection: Vec<(String, String)>,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SigmaReport {
    pub fixings: usize,
    pub sizes: Vec<usize>,
    pub constant: bool,
    pub pairs: Vec<SigmaPair>,
}

impl SigmaReport {
    pub fn holds(&self) -> bool {
        self.constant && self.pairs.iter().all(|p| p.verified)
    }
}

/// Compares the embedded loci of every pair of gauge fixings through their
/// common pullback.
pub fn sigma_independence(ctx: &ExtensionContext, x0: &FinSet, s: &RatFn) -> Result<SigmaReport> {
    let fixings = gauge_fixings(ctx)?;
    let built = fixings
        .iter()
        .map(|f| pullback_type_extension(ctx, x0, s, f))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = built.iter().map(|(_, w)| w.image.len()).collect();
    let constant = sizes.windows(2).all(|w| w[0] == w[1]);
    let pi = ctx.gau_hat().quotient_map(ctx.conn_hat())?;
    let omega = ctx.omega();
    let mut pairs = Vec::new();
    for a in 0..built.len() {
        for b in a + 1..built.len() {
            let (ea, wa) = &built[a];
            let (eb, wb) = &built[b];
            let mut bijection = Vec::new();
            let mut verified = wa.pb == wb.pb;
            for p in 0..wa.pb.len() {
                let from = omega.get(wa.embed.apply(p));
                let to = omega.get(wb.embed.apply(p));
                let same_orbit = pi.apply_name(from) == pi.apply_name(to);
                let same_value = s.value_of(from) == s.value_of(to);
                let ka = ea.correction_space().require(from)?;
                let kb = eb.correction_space().require(to)?;
                let same_delta = ea.delta().apply(ka) == eb.delta().apply(kb);
                verified &= same_orbit && same_value && same_delta;
                bijection.push((from.to_string(), to.to_string()));
            }
            let targets: std::collections::BTreeSet<&String> = bijection.iter().map(|(_, t)| t).collect();
            verified &= targets.len() == bijection.len() && bijection.len() == wb.image.len();
            pairs.push(SigmaPair {
                first: a,
                second: b,
                bijection,
                verified,
            });
        }
    }
    Ok(SigmaReport {
        fixings: fixings.len(),
        sizes,
        constant,
        pairs,
    })
}

#[derive(Debug, Clone)]
pub struct Injectivized {
    pub extension: Extension,
    /// Inclusion of the result into the input.
    pub morphism: ExtMorphism,
    /// One line per orbit dropped because the canonical subset clashed with
    /// the mandatory core.
    pub deviations: Vec<String>,
}

/// The largest complete injective extension under `e` in the canonical
/// greedy order: complete, restrict to an injective invariant domain
/// containing the mandatory core, and restrict the correction data.
pub fn injectivize(ctx: &ExtensionContext, e: &Extension) -> Result<Injectivized> {
    let comp = completion(ctx, e)?;
    let act = ctx.gau_hat();
    let s = comp.functional();
    let core = ctx.core();
    let free = act.maximal_injective_subsets(s, &FinSet::empty());
    let union = free.canonical.union_in(core, ctx.omega())?;
    let mut deviations = Vec::new();
    let kept = if act.invariance_report(s, &union).all() {
        union
    } else {
        let anchored = act.maximal_injective_subsets(s, core);
        if !anchored.core_feasible {
            return Err(Error::BaseNotInjective(format!("{:?}", s.restrict(core)?)));
        }
        for orbit in act.orbits(&union)? {
            if !anchored.canonical.contains(orbit.get(0)) {
                let v = s.value_of(orbit.get(0)).unwrap();
                deviations.push(format!(
                    "orbit {orbit} removed: value {v} is already taken on conn_hat ∪ {{ω₀}}"
                ));
            }
        }
        anchored.canonical
    };
    let c1 = comp.correction_space().intersection(&kept);
    let out = Extension::new(
        kept.clone(),
        s.restrict(&kept)?,
        c1.clone(),
        RatFn::zero(c1.clone()),
        comp.delta().restrict(&c1)?,
    )?;
    let morphism = ExtMorphism::inclusion(&out, e)?;
    Ok(Injectivized {
        extension: out,
        morphism,
        deviations,
    })
}

#[derive(Debug, Clone)]
pub struct Retraction {
    pub extension: Extension,
    pub witness: PullbackWitness,
    /// `c ↦ σ[c]` composed with the pullback's embedding: the input
    /// correction space into the output one.
    pub mu: FinMap,
}

/// Sends an injective, complete, small extension to the pullback-type
/// extension on the same domain and functional.
pub fn retract_r_sigma(ctx: &ExtensionContext, e: &Extension, sigma: &GaugeFixing) -> Result<Retraction> {
    let mut why = Vec::new();
    if !e.is_injective(ctx) {
        why.push("not injective");
    }
    if !e.is_complete() {
        why.push("not complete");
    }
    if !e.is_small(ctx) {
        why.push("not small");
    }
    if !why.is_empty() {
        return Err(Error::NotCoherentInput(why.join(", ")));
    }
    let (out, witness) = pullback_type_extension(ctx, e.domain(), e.functional(), sigma)?;
    let pi = ctx.gau_hat().quotient_map(ctx.conn_hat())?;
    let omega = ctx.omega();
    let c1_out = out.correction_space();
    let mut table = Vec::with_capacity(e.correction_space().len());
    for (k, c) in e.correction_space().iter().enumerate() {
        let target = if ctx.conn_hat().contains(c) {
            let d = e.delta().apply(k);
            let q = pi.codomain().require(pi.apply_name(c).unwrap())?;
            let p = (0..witness.pb.len())
                .find(|&p| witness.delta.apply(p) == d && witness.orbit.apply(p) == q)
                .ok_or_else(|| Error::Precondition(format!("`{c}` has no pullback pair")))?;
            omega.get(witness.embed.apply(p)).to_string()
        } else {
            c.to_string()
        };
        table.push(c1_out.require(&target)?);
    }
    let mu = FinMap::new(e.correction_space().clone(), c1_out.clone(), table)?;
    Ok(Retraction {
        extension: out,
        witness,
        mu,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedVerdict {
    pub contained: bool,
    /// Pullback pair of the smaller domain to the same pair of the larger.
    pub eta: Option<FinMap>,
    pub eta_injective: bool,
    pub commutes: bool,
    /// The inclusion of the smaller pullback-type extension into the larger
    /// is a morphism under the strict configuration.
    pub inclusion_is_morphism: bool,
}

impl NestedVerdict {
    pub fn holds(&self) -> bool {
        self.contained && self.eta_injective && self.commutes && self.inclusion_is_morphism
    }
}

pub fn nested_domain_check(ctx: &ExtensionContext, x0: &FinSet, x1: &FinSet, s: &RatFn, sigma: &GaugeFixing) -> Result<NestedVerdict> {
    if !x0.is_subset_of(x1) {
        return Err(Error::Precondition("x0 is not contained in x1".into()));
    }
    let (e0, w0) = pullback_type_extension(ctx, x0, s, sigma)?;
    let (e1, w1) = pullback_type_extension(ctx, x1, s, sigma)?;
    let contained = w0.image.is_subset_of(&w1.image);
    let eta = (0..w0.pb.len())
        .map(|p| w1.pb.index_of(w0.pb.get(p)))
        .collect::<Option<Vec<usize>>>()
        .map(|t| FinMap::new(w0.pb.clone(), w1.pb.clone(), t))
        .transpose()?;
    let (eta_injective, commutes) = match &eta {
        Some(eta) => (
            eta.is_injective(),
            compose(eta, &w1.delta)? == w0.delta && compose(eta, &w1.embed)? == w0.embed,
        ),
        None => (false, false),
    };
    let inclusion_is_morphism = match ExtMorphism::inclusion(&e0, &e1) {
        Ok(m) => is_morphism(ctx, &e0, &e1, &m, &MorphismConfig::strict()),
        Err(_) => false,
    };
    Ok(NestedVerdict {
        contained,
        eta,
        eta_injective,
        commutes,
        inclusion_is_morphism,
    })
}

/// Complete, and reproduced exactly by the pullback construction on its own
/// domain and functional for some gauge fixing.
pub fn is_pullback_type(ctx: &ExtensionContext, e: &Extension) -> bool {
    if !e.is_complete() {
        return false;
    }
    let Ok(fixings) = gauge_fixings(ctx) else { return false };
    fixings
        .iter()
        .any(|f| matches!(pullback_type_extension(ctx, e.domain(), e.functional(), f), Ok((out, _)) if &out == e))
}

/// Injective and of pullback type.
pub fn is_coherent(ctx: &ExtensionContext, e: &Extension) -> bool {
    e.is_injective(ctx) && is_pullback_type(ctx, e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ClassKind {
    Comp,
    Inj,
    Small,
    Pb,
    Coh,
    SCoh,
}

impl ClassKind {
    pub const ALL: [ClassKind; 6] = [
        ClassKind::Comp,
        ClassKind::Inj,
        ClassKind::Small,
        ClassKind::Pb,
        ClassKind::Coh,
        ClassKind::SCoh,
    ];

    /// Membership predicate applied to enumerated candidates.
    pub fn admits(&self, ctx: &ExtensionContext, e: &Extension) -> bool {
        match self {
            ClassKind::Comp => e.is_complete(),
            ClassKind::Inj => e.is_injective(ctx),
            ClassKind::Small => e.is_small(ctx),
            ClassKind::Pb => is_pullback_type(ctx, e),
            ClassKind::Coh => is_coherent(ctx, e),
            ClassKind::SCoh => is_coherent(ctx, e) && e.is_small(ctx),
        }
    }

    fn complete_only(&self) -> bool {
        !matches!(self, ClassKind::Inj | ClassKind::Small)
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ClassKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ClassKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Usage(format!("unknown class kind `{s}`")))
    }
}

/// Where functionals of a built class come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionalSource {
    /// One fixed functional, at least on every candidate domain.
    Fixed(RatFn),
    /// Every invariant assignment of palette values to orbits.
    Palette(Vec<Rat>),
}

fn functionals_on(ctx: &ExtensionContext, x: &FinSet, source: &FunctionalSource, zero_at_basepoint: bool) -> Result<Vec<RatFn>> {
    match source {
        FunctionalSource::Fixed(s) => Ok(match s.restrict(x) {
            Ok(r) if !zero_at_basepoint || r.value_of(ctx.zero_name()) == Some(Rat::ZERO) => vec![r],
            _ => Vec::new(),
        }),
        FunctionalSource::Palette(pal) => {
            let orbits = ctx.gau_hat().orbits(x)?;
            let choices: Vec<Vec<Rat>> = orbits
                .iter()
                .map(|o| {
                    if zero_at_basepoint && o.contains(ctx.zero_name()) {
                        vec![Rat::ZERO]
                    } else {
                        pal.clone()
                    }
                })
                .collect();
            Ok(product_of(&choices)
                .into_iter()
                .map(|vals| {
                    RatFn::from_fn(x.clone(), |i| {
                        let k = orbits.iter().position(|o| o.contains(x.get(i))).unwrap();
                        vals[k]
                    })
                })
                .collect())
        }
    }
}

fn charge(used: &mut u64, n: u64, budget: u64) -> Result<()> {
    *used = used.saturating_add(n);
    if *used > budget {
        Err(Error::SearchBudgetExceeded {
            needed: *used as u128,
            budget,
        })
    } else {
        Ok(())
    }
}

/// Enumerates the valid extensions of a kind over the context.
///
/// `Pb` runs the pullback construction over every domain, functional and
/// gauge fixing. The other kinds enumerate domains, functionals, correction
/// spaces containing ω₀ and delta maps (only decomposition-exact ones for
/// the complete kinds), fill in the correction, and filter.
pub fn build_class(ctx: Arc<ExtensionContext>, kind: ClassKind, source: &FunctionalSource, cfg: MorphismConfig, budget: u64) -> Result<ExtClass> {
    let mut members: Vec<Extension> = Vec::new();
    let mut used = 0u64;
    let push = |e: Extension, members: &mut Vec<Extension>| {
        if !members.contains(&e) {
            members.push(e);
        }
    };
    if kind == ClassKind::Pb {
        let fixings = gauge_fixings(&ctx)?;
        for x in ctx.extended_domains() {
            for s in functionals_on(&ctx, &x, source, true)? {
                for f in &fixings {
                    charge(&mut used, 1, budget)?;
                    match pullback_type_extension(&ctx, &x, &s, f) {
                        Ok((e, _)) => push(e, &mut members),
                        Err(Error::NotInjectiveInvariant(_) | Error::ZeroDecomposition(_) | Error::NonMonicPullback(_)) => {}
                        Err(other) => return Err(other),
                    }
                }
            }
        }
        return ExtClass::new(ctx, members, cfg).map(|c| c.with_budget(budget));
    }
    let omega = ctx.omega();
    let zero = ctx.zero_name().to_string();
    for x in ctx.extended_domains() {
        let others: Vec<usize> = (0..x.len()).filter(|&i| x.get(i) != zero).collect();
        for s in functionals_on(&ctx, &x, source, false)? {
            for bits in 0u64..(1u64 << others.len()) {
                let mut names = vec![zero.as_str()];
                names.extend(
                    others
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| bits >> k & 1 == 1)
                        .map(|(_, &i)| x.get(i)),
                );
                let c1 = omega.subset(names)?;
                if kind == ClassKind::Small && !c1.is_subset_of(ctx.core()) {
                    continue;
                }
                let delta_choices: Vec<Vec<usize>> = c1
                    .iter()
                    .map(|c| {
                        let sc = s.value_of(c).unwrap();
                        (0..ctx.conn().len())
                            .filter(|&d| !kind.complete_only() || ctx.base().value(d) == sc)
                            .collect()
                    })
                    .collect();
                let count: u128 = delta_choices.iter().map(|c| c.len() as u128).product();
                charge(&mut used, u64::try_from(count).unwrap_or(u64::MAX), budget)?;
                for table in product_of(&delta_choices) {
                    let delta = FinMap::new(c1.clone(), ctx.conn().clone(), table)?;
                    let corr = RatFn::from_fn(c1.clone(), |k| s.value_of(c1.get(k)).unwrap() - ctx.base().value(delta.apply(k)));
                    let e = Extension::new(x.clone(), s.clone(), c1.clone(), corr, delta)?;
                    if kind.admits(&ctx, &e) {
                        push(e, &mut members);
                    }
                }
            }
        }
    }
    ExtClass::new(ctx, members, cfg).map(|c| c.with_budget(budget))
}
