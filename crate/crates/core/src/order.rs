//! Preorders, iso-class posets and categorical checks over finite classes of
//! extensions.
//!
//! A class is read as the full subcategory it spans. Relations are stored as
//! dense boolean matrices indexed by member position.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{
    find_isomorphism, hom_count, hom_set, iso_classes, validate_extension, ExtMorphism, Extension, ExtensionContext,
    MorphismConfig, DEFAULT_BUDGET,
};
use crate::sets::{count_maps, AllMaps, FinSet};

pub type Relation = Vec<Vec<bool>>;

/// A finite class of valid, pairwise distinct extensions over one context.
#[derive(Debug, Clone)]
pub struct ExtClass {
    context: Arc<ExtensionContext>,
    members: Vec<Extension>,
    cfg: MorphismConfig,
    budget: u64,
}

impl ExtClass {
    pub fn new(context: Arc<ExtensionContext>, members: Vec<Extension>, cfg: MorphismConfig) -> Result<Self> {
        for (i, e) in members.iter().enumerate() {
            let report = validate_extension(&context, e);
            if let Some(v) = report.violations.first() {
                return Err(Error::InvalidClass(format!("member {i}: {v}")));
            }
            if members[..i].contains(e) {
                return Err(Error::InvalidClass(format!("member {i} duplicates an earlier member")));
            }
        }
        Ok(ExtClass {
            context,
            members,
            cfg,
            budget: DEFAULT_BUDGET,
        })
    }

    /// Drops structural duplicates instead of rejecting them.
    pub fn dedup(context: Arc<ExtensionContext>, members: Vec<Extension>, cfg: MorphismConfig) -> Result<Self> {
        let mut unique: Vec<Extension> = Vec::new();
        for e in members {
            if !unique.contains(&e) {
                unique.push(e);
            }
        }
        ExtClass::new(context, unique, cfg)
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn context(&self) -> &Arc<ExtensionContext> {
        &self.context
    }
    pub fn members(&self) -> &[Extension] {
        &self.members
    }
    pub fn cfg(&self) -> &MorphismConfig {
        &self.cfg
    }
    pub fn budget(&self) -> u64 {
        self.budget
    }
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Subclass on the given member positions, in the given order.
    pub fn select(&self, idx: &[usize]) -> ExtClass {
        ExtClass {
            context: self.context.clone(),
            members: idx.iter().map(|&i| self.members[i].clone()).collect(),
            cfg: self.cfg.clone(),
            budget: self.budget,
        }
    }

    fn count(&self, i: usize, j: usize, cap: usize) -> Result<usize> {
        hom_count(&self.context, &self.members[i], &self.members[j], &self.cfg, self.budget, cap)
    }
}

/// All hom-sets of a class with a composition lookup.
#[derive(Debug, Clone)]
pub struct ClassCategory {
    homs: Vec<Vec<Vec<ExtMorphism>>>,
    index: Vec<Vec<HashMap<ExtMorphism, usize>>>,
}

impl ClassCategory {
    pub fn build(cl: &ExtClass) -> Result<Self> {
        let n = cl.len();
        let mut homs = vec![vec![Vec::new(); n]; n];
        let mut index = vec![vec![HashMap::new(); n]; n];
        let mut total: u64 = 0;
        for i in 0..n {
            for j in 0..n {
                let h = hom_set(&cl.context, &cl.members[i], &cl.members[j], &cl.cfg, cl.budget)?;
                total += h.len() as u64;
                if total > cl.budget {
                    return Err(Error::SearchBudgetExceeded {
                        needed: total as u128,
                        budget: cl.budget,
                    });
                }
                index[i][j] = h.iter().cloned().enumerate().map(|(k, m)| (m, k)).collect();
                homs[i][j] = h;
            }
        }
        Ok(ClassCategory { homs, index })
    }

    pub fn objects(&self) -> usize {
        self.homs.len()
    }

    pub fn hom(&self, i: usize, j: usize) -> &[ExtMorphism] {
        &self.homs[i][j]
    }

    /// Position of the identity in `hom(i, i)`.
    pub fn id(&self, i: usize) -> usize {
        self.homs[i][i]
            .iter()
            .position(ExtMorphism::is_identity)
            .expect("identity is a morphism under every config")
    }

    /// `b ∘ a` for `a: i -> j`, `b: j -> k`, as a position in `hom(i, k)`.
    pub fn compose(&self, i: usize, j: usize, k: usize, a: usize, b: usize) -> usize {
        let m = self.homs[i][j][a].then(&self.homs[j][k][b]).expect("composable");
        *self.index[i][k].get(&m).expect("hom-sets are closed under composition")
    }
}

/// `matrix[i][j]` iff some morphism `members[i] -> members[j]` exists.
pub fn build_preorder(cl: &ExtClass) -> Result<Relation> {
    let n = cl.len();
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = i == j || cl.count(i, j, 1)? > 0;
        }
    }
    Ok(m)
}

pub fn is_reflexive(r: &Relation) -> bool {
    (0..r.len()).all(|i| r[i][i])
}

pub fn is_transitive(r: &Relation) -> bool {
    let n = r.len();
    (0..n).all(|i| (0..n).all(|j| !r[i][j] || (0..n).all(|k| !r[j][k] || r[i][k])))
}

pub fn is_antisymmetric(r: &Relation) -> bool {
    let n = r.len();
    (0..n).all(|i| (0..n).all(|j| i == j || !(r[i][j] && r[j][i])))
}

pub fn is_total(r: &Relation) -> bool {
    let n = r.len();
    (0..n).all(|i| (0..n).all(|j| r[i][j] || r[j][i]))
}

/// First pair `(i, j)` related in neither direction.
pub fn incomparable_pair(r: &Relation) -> Option<(usize, usize)> {
    let n = r.len();
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).find(|&(i, j)| !r[i][j] && !r[j][i])
}

/// The preorder of a class divided by isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoPoset {
    /// Member positions of each iso-class, ordered by first member.
    pub classes: Vec<Vec<usize>>,
    /// `leq[a][b]` between iso-classes.
    pub leq: Relation,
}

impl IsoPoset {
    pub fn representatives(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c[0]).collect()
    }

    /// Which iso-class a member falls in.
    pub fn class_of(&self, member: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&member))
    }

    /// Covering pairs `(a, b)` with `a < b` and nothing strictly between.
    pub fn hasse(&self) -> Vec<(usize, usize)> {
        let n = self.leq.len();
        let lt = |a: usize, b: usize| a != b && self.leq[a][b];
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if lt(a, b) && !(0..n).any(|c| lt(a, c) && lt(c, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

pub fn iso_poset(cl: &ExtClass) -> Result<IsoPoset> {
    let pre = build_preorder(cl)?;
    let classes = iso_classes(&cl.context, &cl.members, &cl.cfg, cl.budget)?;
    iso_poset_from(&pre, classes)
}

/// Quotients a preorder by a given partition, checking that the relation
/// does not depend on the chosen representatives.
pub fn iso_poset_from(pre: &Relation, classes: Vec<Vec<usize>>) -> Result<IsoPoset> {
    let k = classes.len();
    let mut leq = vec![vec![false; k]; k];
    for a in 0..k {
        for b in 0..k {
            let v = pre[classes[a][0]][classes[b][0]];
            for &x in &classes[a] {
                for &y in &classes[b] {
                    if pre[x][y] != v {
                        return Err(Error::IncompatibleQuotient);
                    }
                }
            }
            leq[a][b] = v;
        }
    }
    Ok(IsoPoset { classes, leq })
}

/// The iso-class above every other one, if any.
pub fn greatest_element(p: &IsoPoset) -> Option<usize> {
    let n = p.leq.len();
    (0..n).find(|&t| (0..n).all(|a| p.leq[a][t]))
}

/// Members receiving exactly one morphism from every member.
pub fn terminal_objects(cl: &ExtClass) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    'cand: for t in 0..cl.len() {
        for m in 0..cl.len() {
            if cl.count(m, t, 2)? != 1 {
                continue 'cand;
            }
        }
        out.push(t);
    }
    Ok(out)
}

/// Members sending exactly one morphism to every member.
pub fn initial_objects(cl: &ExtClass) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    'cand: for s in 0..cl.len() {
        for m in 0..cl.len() {
            if cl.count(s, m, 2)? != 1 {
                continue 'cand;
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// An isomorphism that is not an identity pair, if one exists.
pub fn gaunt_witness(cl: &ExtClass) -> Result<Option<(usize, usize, ExtMorphism)>> {
    for i in 0..cl.len() {
        for j in 0..cl.len() {
            let (a, b) = (&cl.members[i], &cl.members[j]);
            if i != j {
                if let Some(m) = find_isomorphism(&cl.context, a, b, &cl.cfg, cl.budget)? {
                    return Ok(Some((i, j, m)));
                }
                continue;
            }
            // a bijective endomorphism of a finite object has its inverse
            // among its powers, so it is an automorphism
            for m in hom_set(&cl.context, a, a, &cl.cfg, cl.budget)? {
                if m.is_bijective() && !m.is_identity() {
                    return Ok(Some((i, i, m)));
                }
            }
        }
    }
    Ok(None)
}

pub fn is_gaunt(cl: &ExtClass) -> Result<bool> {
    Ok(gaunt_witness(cl)?.is_none())
}

/// `matrix[i][j]` iff exactly one morphism `members[i] -> members[j]`.
pub fn unique_morphism_order(cl: &ExtClass) -> Result<Relation> {
    if let Some((i, j, m)) = gaunt_witness(cl)? {
        return Err(Error::NotGaunt(format!("member {i} -> member {j} via non-identity isomorphism {:?}", m.f)));
    }
    let n = cl.len();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = cl.count(i, j, 2)? == 1;
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MaximalityMode {
    Maximal,
    Universal,
    WeakMaximal,
    WeakUniversal,
}

impl MaximalityMode {
    pub const ALL: [MaximalityMode; 4] = [
        MaximalityMode::Maximal,
        MaximalityMode::Universal,
        MaximalityMode::WeakMaximal,
        MaximalityMode::WeakUniversal,
    ];

    pub fn is_weak(&self) -> bool {
        matches!(self, MaximalityMode::WeakMaximal | MaximalityMode::WeakUniversal)
    }

    fn unique(&self) -> bool {
        matches!(self, MaximalityMode::Universal | MaximalityMode::WeakUniversal)
    }
}

impl fmt::Display for MaximalityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaximalityMode::Maximal => "maximal",
            MaximalityMode::Universal => "universal",
            MaximalityMode::WeakMaximal => "weak-maximal",
            MaximalityMode::WeakUniversal => "weak-universal",
        })
    }
}

impl FromStr for MaximalityMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MaximalityMode::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::Usage(format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaximalityVerdict {
    pub mode: MaximalityMode,
    pub holds: bool,
    /// Object part of the witnessing map: `witness[s]` is the position in
    /// the target class assigned to source member `s`.
    pub witness: Option<Vec<usize>>,
    pub counterexample: Option<String>,
}

/// Hom counts capped at 2 between chosen members of a class.
struct CountTable {
    counts: Vec<Vec<usize>>,
}

impl CountTable {
    fn new(cl: &ExtClass, objs: &[usize]) -> Result<Self> {
        let mut counts = vec![vec![0; objs.len()]; objs.len()];
        for (a, &i) in objs.iter().enumerate() {
            for (b, &j) in objs.iter().enumerate() {
                counts[a][b] = cl.count(i, j, 2)?;
            }
        }
        Ok(CountTable { counts })
    }
}

/// Does `source` map into `target` in the given mode?
///
/// For the strong modes the witness condition decouples per source member:
/// some target member must receive a (unique) morphism from every target
/// member. The weak modes enumerate functors.
pub fn check_maximality(source: &ExtClass, target: &ExtClass, mode: MaximalityMode) -> Result<MaximalityVerdict> {
    if mode.is_weak() {
        let c0 = ClassCategory::build(source)?;
        let c1 = ClassCategory::build(target)?;
        let objs0: Vec<usize> = (0..source.len()).collect();
        let objs1: Vec<usize> = (0..target.len()).collect();
        return weak_maximality(&c0, &objs0, &c1, &objs1, mode, target.budget);
    }
    let objs: Vec<usize> = (0..target.len()).collect();
    let table = CountTable::new(target, &objs)?;
    Ok(strong_maximality(source.len(), &table, mode))
}

fn strong_maximality(n0: usize, t: &CountTable, mode: MaximalityMode) -> MaximalityVerdict {
    let n1 = t.counts.len();
    let ok = |c: usize| if mode.unique() { c == 1 } else { c >= 1 };
    let tops: Vec<usize> = (0..n1).filter(|&b| (0..n1).all(|a| ok(t.counts[a][b]))).collect();
    if n0 == 0 {
        return MaximalityVerdict {
            mode,
            holds: true,
            witness: Some(Vec::new()),
            counterexample: None,
        };
    }
    match tops.first() {
        Some(&top) => MaximalityVerdict {
            mode,
            holds: true,
            witness: Some(vec![top; n0]),
            counterexample: None,
        },
        None => {
            let reason = if n1 == 0 {
                "target class is empty".to_string()
            } else {
                let parts: Vec<String> = (0..n1)
                    .map(|b| {
                        let a = (0..n1).find(|&a| !ok(t.counts[a][b])).unwrap();
                        format!("nu(s) = {a} has {} morphisms into mu(s) = {b}", t.counts[a][b])
                    })
                    .collect();
                parts.join("; ")
            };
            MaximalityVerdict {
                mode,
                holds: false,
                witness: None,
                counterexample: Some(reason),
            }
        }
    }
}

/// A functor between full subcategories: object map plus one morphism
/// position per source morphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Functor {
    pub objects: Vec<usize>,
    /// `morphisms[a][b][k]`: image of the `k`-th morphism `a -> b`.
    pub morphisms: Vec<Vec<Vec<usize>>>,
}

/// Every functor from the subcategory on `objs0` of `c0` to the subcategory
/// on `objs1` of `c1`, objects reported as positions in `objs1`.
pub fn enumerate_functors(c0: &ClassCategory, objs0: &[usize], c1: &ClassCategory, objs1: &[usize], budget: u64) -> Result<Vec<Functor>> {
    let (n0, n1) = (objs0.len(), objs1.len());
    let needed = count_maps(n0, n1);
    if needed > budget as u128 {
        return Err(Error::SearchBudgetExceeded { needed, budget });
    }
    // flat list of source morphisms (a, b, k)
    let mut arrows = Vec::new();
    for a in 0..n0 {
        for b in 0..n0 {
            for k in 0..c0.hom(objs0[a], objs0[b]).len() {
                arrows.push((a, b, k));
            }
        }
    }
    let pos: HashMap<(usize, usize, usize), usize> = arrows.iter().enumerate().map(|(p, &t)| (t, p)).collect();
    // composable triples (first, second, composite) by arrow position; each
    // is checked once the last of the three has an image
    let mut triples_at: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); arrows.len()];
    for &(a, b, k) in &arrows {
        for c in 0..n0 {
            for l in 0..c0.hom(objs0[b], objs0[c]).len() {
                let m = c0.compose(objs0[a], objs0[b], objs0[c], k, l);
                let t = (pos[&(a, b, k)], pos[&(b, c, l)], pos[&(a, c, m)]);
                let last = t.0.max(t.1).max(t.2);
                triples_at[last].push(t);
            }
        }
    }
    let mut out = Vec::new();
    let mut visited: u64 = 0;
    for obj in AllMaps::new(n0, n1) {
        let mut img = vec![usize::MAX; arrows.len()];
        let ctx = FunctorSearch {
            c1,
            objs1,
            obj: &obj,
            arrows: &arrows,
            triples_at: &triples_at,
            identity_of: (0..n0).map(|a| c0.id(objs0[a])).collect(),
        };
        ctx.search(0, &mut img, &mut visited, budget, &mut |img| {
            let mut morphisms = vec![vec![Vec::new(); n0]; n0];
            for (p, &(a, b, _)) in arrows.iter().enumerate() {
                morphisms[a][b].push(img[p]);
            }
            out.push(Functor {
                objects: obj.clone(),
                morphisms,
            });
        })?;
    }
    Ok(out)
}

struct FunctorSearch<'a> {
    c1: &'a ClassCategory,
    objs1: &'a [usize],
    obj: &'a [usize],
    arrows: &'a [(usize, usize, usize)],
    triples_at: &'a [Vec<(usize, usize, usize)>],
    identity_of: Vec<usize>,
}

impl FunctorSearch<'_> {
    fn search(&self, p: usize, img: &mut Vec<usize>, visited: &mut u64, budget: u64, emit: &mut dyn FnMut(&[usize])) -> Result<()> {
        *visited += 1;
        if *visited > budget {
            return Err(Error::SearchBudgetExceeded {
                needed: *visited as u128,
                budget,
            });
        }
        if p == self.arrows.len() {
            emit(img);
            return Ok(());
        }
        let (a, b, k) = self.arrows[p];
        let (fa, fb) = (self.objs1[self.obj[a]], self.objs1[self.obj[b]]);
        let candidates: Vec<usize> = if a == b && k == self.identity_of[a] {
            vec![self.c1.id(fa)]
        } else {
            (0..self.c1.hom(fa, fb).len()).collect()
        };
        for m in candidates {
            img[p] = m;
            let ok = self.triples_at[p].iter().all(|&(x, y, z)| {
                let (xa, xb, _) = self.arrows[x];
                let (_, yc, _) = self.arrows[y];
                let (oa, ob, oc) = (self.objs1[self.obj[xa]], self.objs1[self.obj[xb]], self.objs1[self.obj[yc]]);
                self.c1.compose(oa, ob, oc, img[x], img[y]) == img[z]
            });
            if ok {
                self.search(p + 1, img, visited, budget, emit)?;
            }
        }
        img[p] = usize::MAX;
        Ok(())
    }
}

/// Number of natural transformations `nu => mu`, capped at `cap`.
pub fn natural_transformations(
    c0: &ClassCategory,
    objs0: &[usize],
    c1: &ClassCategory,
    objs1: &[usize],
    nu: &Functor,
    mu: &Functor,
    cap: usize,
) -> usize {
    let n0 = objs0.len();
    let choices: Vec<usize> = (0..n0)
        .map(|a| c1.hom(objs1[nu.objects[a]], objs1[mu.objects[a]]).len())
        .collect();
    let mut alpha = vec![0usize; n0];
    let mut found = 0;
    nat_search(c0, objs0, c1, objs1, nu, mu, &choices, 0, &mut alpha, &mut found, cap);
    found
}

#[allow(clippy::too_many_arguments)]
fn nat_search(
    c0: &ClassCategory,
    objs0: &[usize],
    c1: &ClassCategory,
    objs1: &[usize],
    nu: &Functor,
    mu: &Functor,
    choices: &[usize],
    a: usize,
    alpha: &mut Vec<usize>,
    found: &mut usize,
    cap: usize,
) {
    if *found >= cap {
        return;
    }
    if a == objs0.len() {
        *found += 1;
        return;
    }
    for k in 0..choices[a] {
        alpha[a] = k;
        // naturality on every arrow between already-chosen objects
        let ok = (0..=a).all(|b| {
            [(a, b), (b, a)].into_iter().all(|(x, y)| {
                (0..c0.hom(objs0[x], objs0[y]).len()).all(|h| {
                    let (nx, ny) = (objs1[nu.objects[x]], objs1[nu.objects[y]]);
                    let (mx, my) = (objs1[mu.objects[x]], objs1[mu.objects[y]]);
                    let lhs = c1.compose(nx, mx, my, alpha[x], mu.morphisms[x][y][h]);
                    let rhs = c1.compose(nx, ny, my, nu.morphisms[x][y][h], alpha[y]);
                    lhs == rhs
                })
            })
        });
        if ok {
            nat_search(c0, objs0, c1, objs1, nu, mu, choices, a + 1, alpha, found, cap);
        }
    }
}

fn weak_maximality(
    c0: &ClassCategory,
    objs0: &[usize],
    c1: &ClassCategory,
    objs1: &[usize],
    mode: MaximalityMode,
    budget: u64,
) -> Result<MaximalityVerdict> {
    let functors = enumerate_functors(c0, objs0, c1, objs1, budget)?;
    let ok = |c: usize| if mode.unique() { c == 1 } else { c >= 1 };
    let mut first_failure = None;
    for mu in &functors {
        let bad = functors
            .iter()
            .position(|nu| !ok(natural_transformations(c0, objs0, c1, objs1, nu, mu, 2)));
        match bad {
            None => {
                return Ok(MaximalityVerdict {
                    mode,
                    holds: true,
                    witness: Some(mu.objects.clone()),
                    counterexample: None,
                })
            }
            Some(k) if first_failure.is_none() => {
                first_failure = Some(format!(
                    "functor with objects {:?} has no{} natural transformation into mu with objects {:?}",
                    functors[k].objects,
                    if mode.unique() { " unique" } else { "" },
                    mu.objects
                ));
            }
            _ => {}
        }
    }
    Ok(MaximalityVerdict {
        mode,
        holds: false,
        witness: None,
        counterexample: Some(first_failure.unwrap_or_else(|| format!("no functors among {} candidates", functors.len()))),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityVerdict {
    pub mode: MaximalityMode,
    pub holds: bool,
    pub subsets_checked: usize,
    /// Member positions of the first subset `Y` for which the probe fails to
    /// map into `Y ∪ {candidate}`.
    pub failing_subset: Option<Vec<usize>>,
}

/// Largest class for which density enumerates all subsets.
pub const MAX_DENSITY_MEMBERS: usize = 16;

/// For every subset `Y` of the members, does `probe` (default: the class
/// itself) map into `Y ∪ {candidate}` in the given mode?
pub fn density_check(cl: &ExtClass, candidate: &Extension, mode: MaximalityMode, probe: Option<&ExtClass>) -> Result<DensityVerdict> {
    if cl.len() > MAX_DENSITY_MEMBERS {
        return Err(Error::SearchBudgetExceeded {
            needed: 1u128 << cl.len(),
            budget: 1u64 << MAX_DENSITY_MEMBERS,
        });
    }
    let probe = probe.unwrap_or(cl);
    let mut universe = cl.members.clone();
    let cand = match universe.iter().position(|e| e == candidate) {
        Some(p) => p,
        None => {
            universe.push(candidate.clone());
            universe.len() - 1
        }
    };
    let all = ExtClass::new(cl.context.clone(), universe, cl.cfg.clone())?.with_budget(cl.budget);
    let everyone: Vec<usize> = (0..all.len()).collect();
    let (table, cats) = if mode.is_weak() {
        (None, Some((ClassCategory::build(probe)?, ClassCategory::build(&all)?)))
    } else {
        (Some(CountTable::new(&all, &everyone)?), None)
    };
    let probe_objs: Vec<usize> = (0..probe.len()).collect();
    let n = cl.len();
    for bits in 0u64..(1u64 << n) {
        let mut ys: Vec<usize> = (0..n).filter(|&i| bits >> i & 1 == 1).collect();
        if !ys.contains(&cand) {
            ys.push(cand);
        }
        let holds = match (&table, &cats) {
            (Some(t), _) => {
                let sub = CountTable {
                    counts: ys.iter().map(|&a| ys.iter().map(|&b| t.counts[a][b]).collect()).collect(),
                };
                strong_maximality(probe.len(), &sub, mode).holds
            }
            (_, Some((c0, c1))) => weak_maximality(c0, &probe_objs, c1, &ys, mode, cl.budget)?.holds,
            _ => unreachable!(),
        };
        if !holds {
            return Ok(DensityVerdict {
                mode,
                holds: false,
                subsets_checked: bits as usize + 1,
                failing_subset: Some((0..n).filter(|&i| bits >> i & 1 == 1).collect()),
            });
        }
    }
    Ok(DensityVerdict {
        mode,
        holds: true,
        subsets_checked: 1 << n,
        failing_subset: None,
    })
}

/// Union of all subclasses of cardinality at most `i_card`, read literally:
/// the whole class for `i_card >= 1`, nothing for `i_card = 0`.
pub fn class_e_of_i(cl: &ExtClass, i_card: usize) -> ExtClass {
    if i_card == 0 {
        cl.select(&[])
    } else {
        cl.clone()
    }
}

/// For each `J ⊆ I`, the `J`-indexed families: one member per domain in
/// `J`, in every combination. A domain without members admits no family.
pub fn indexed_families(cl: &ExtClass, index: &[FinSet]) -> Vec<(Vec<usize>, Vec<Vec<usize>>)> {
    let per_domain: Vec<Vec<usize>> = index
        .iter()
        .map(|d| (0..cl.len()).filter(|&i| cl.members[i].domain().same_elements(d)).collect())
        .collect();
    (0u64..(1u64 << index.len()))
        .map(|bits| {
            let j: Vec<usize> = (0..index.len()).filter(|&k| bits >> k & 1 == 1).collect();
            let choices: Vec<Vec<usize>> = j.iter().map(|&k| per_domain[k].clone()).collect();
            (j, crate::sets::product_of(&choices))
        })
        .collect()
}

/// A coproduct inside a class: the apex member and one injection position
/// per family member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassCoproduct {
    pub apex: usize,
    pub injections: Vec<usize>,
}

/// Searches the class for a categorical coproduct of `family` (member
/// positions): an apex with injections through which every cocone factors
/// uniquely. The empty family asks for an initial object.
pub fn find_class_coproduct(cat: &ClassCategory, family: &[usize], budget: u64) -> Result<Option<ClassCoproduct>> {
    let n = cat.objects();
    let mut work: u128 = 0;
    for apex in 0..n {
        let inj_choices: Vec<Vec<usize>> = family.iter().map(|&f| (0..cat.hom(f, apex).len()).collect()).collect();
        let size: u128 = inj_choices.iter().map(|c| c.len() as u128).product();
        work += size;
        if work > budget as u128 {
            return Err(Error::SearchBudgetExceeded { needed: work, budget });
        }
        'inj: for inj in crate::sets::product_of(&inj_choices) {
            for t in 0..n {
                let cocone_choices: Vec<Vec<usize>> = family.iter().map(|&f| (0..cat.hom(f, t).len()).collect()).collect();
                for cocone in crate::sets::product_of(&cocone_choices) {
                    let mediating = (0..cat.hom(apex, t).len())
                        .filter(|&u| {
                            family
                                .iter()
                                .enumerate()
                                .all(|(k, &f)| cat.compose(f, apex, t, inj[k], u) == cocone[k])
                        })
                        .count();
                    if mediating != 1 {
                        continue 'inj;
                    }
                }
            }
            return Ok(Some(ClassCoproduct { apex, injections: inj }));
        }
    }
    Ok(None)
}

/// Members that arise as a class coproduct of some `J`-indexed family,
/// `J ⊆ I`; the empty family contributes the initial objects.
pub fn class_e_of_i_closure(cl: &ExtClass, index: &[FinSet]) -> Result<ExtClass> {
    let cat = ClassCategory::build(cl)?;
    let mut keep = vec![false; cl.len()];
    for (_, families) in indexed_families(cl, index) {
        for fam in families {
            if let Some(c) = find_class_coproduct(&cat, &fam, cl.budget)? {
                keep[c.apex] = true;
            }
        }
    }
    let idx: Vec<usize> = (0..cl.len()).filter(|&i| keep[i]).collect();
    Ok(cl.select(&idx))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoherenceMode {
    Maximality,
    Universality,
}

impl FromStr for CoherenceMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maximality" => Ok(CoherenceMode::Maximality),
            "universality" => Ok(CoherenceMode::Universality),
            _ => Err(Error::Usage(format!("unknown coherence mode `{s}`"))),
        }
    }
}

/// How the class over which totality is tested is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EOfIReading {
    #[default]
    Literal,
    Closure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyOutcome {
    /// Positions in `I` of the domains making up `J`.
    pub j: Vec<usize>,
    pub family: Vec<usize>,
    pub coproduct: Option<ClassCoproduct>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoherenceVerdict {
    pub mode: CoherenceMode,
    pub holds: bool,
    pub families: Vec<FamilyOutcome>,
    /// `J` whose domains have no members, so no family exists.
    pub empty_index_sets: Vec<Vec<usize>>,
    /// Whether the class has an initial object, the coproduct of the empty
    /// family. Reported only; it does not decide `holds`.
    pub initial: bool,
    /// Member positions of the class on which totality was tested.
    pub e_of_i: Vec<usize>,
    pub total: bool,
    pub gaunt: Option<bool>,
    pub unique_total: Option<bool>,
    pub failure: Option<String>,
}

pub fn coherence_check(cl: &ExtClass, index: &[FinSet], mode: CoherenceMode, reading: EOfIReading) -> Result<CoherenceVerdict> {
    let cat = ClassCategory::build(cl)?;
    let mut families = Vec::new();
    let mut empty_index_sets = Vec::new();
    let mut failure = None;
    let mut initial = false;
    for (j, fams) in indexed_families(cl, index) {
        if fams.is_empty() {
            empty_index_sets.push(j);
            continue;
        }
        for fam in fams {
            let coproduct = find_class_coproduct(&cat, &fam, cl.budget)?;
            if fam.is_empty() {
                initial = coproduct.is_some();
                continue;
            }
            if coproduct.is_none() && failure.is_none() {
                failure = Some(format!("no coproduct in the class for the family {fam:?} indexed by {j:?}"));
            }
            families.push(FamilyOutcome {
                j: j.clone(),
                family: fam,
                coproduct,
            });
        }
    }
    let e = match reading {
        EOfIReading::Literal => class_e_of_i(cl, index.len()),
        EOfIReading::Closure => class_e_of_i_closure(cl, index)?,
    };
    let e_of_i: Vec<usize> = e
        .members
        .iter()
        .map(|m| cl.members.iter().position(|x| x == m).unwrap())
        .collect();
    let pre = build_preorder(&e)?;
    let total = is_total(&pre);
    if !total && failure.is_none() {
        let (a, b) = incomparable_pair(&pre).unwrap();
        failure = Some(format!("members {} and {} are incomparable", e_of_i[a], e_of_i[b]));
    }
    let (mut gaunt, mut unique_total) = (None, None);
    if mode == CoherenceMode::Universality {
        let g = is_gaunt(&e)?;
        gaunt = Some(g);
        if !g {
            failure.get_or_insert_with(|| "class restricted to E(I) is not gaunt".into());
        } else {
            let u = is_total(&unique_morphism_order(&e)?);
            unique_total = Some(u);
            if !u {
                failure.get_or_insert_with(|| "unique-morphism order is not total".into());
            }
        }
    }
    Ok(CoherenceVerdict {
        mode,
        holds: failure.is_none(),
        families,
        empty_index_sets,
        initial,
        e_of_i,
        total,
        gaunt,
        unique_total,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_class, gauge_fixings, pullback_type_extension, ClassKind, FunctionalSource};
    use crate::extension::null_extension;
    use crate::rational::Rat;
    use crate::samples::{point_context, r, swap_context, swap_functional};

    fn ctx() -> Arc<ExtensionContext> {
        Arc::new(swap_context())
    }

    fn pb_class(p: Rat) -> ExtClass {
        let ctx = ctx();
        build_class(ctx, ClassKind::Pb, &FunctionalSource::Fixed(swap_functional(p)), MorphismConfig::strict(), DEFAULT_BUDGET).unwrap()
    }

    /// Pullback-type members for the first gauge fixing only.
    fn gaunt_chain() -> ExtClass {
        let ctx = ctx();
        let sigma = gauge_fixings(&ctx).unwrap().remove(0);
        let s = swap_functional(r(3));
        let members = [ctx.core().clone(), ctx.omega().clone()]
            .iter()
            .map(|x| pullback_type_extension(&ctx, x, &s, &sigma).unwrap().0)
            .collect();
        ExtClass::new(ctx, members, MorphismConfig::strict()).unwrap()
    }

    #[test]
    fn preorder_laws_and_quotient() {
        let cl = pb_class(r(3));
        let pre = build_preorder(&cl).unwrap();
        assert!(is_reflexive(&pre) && is_transitive(&pre) && is_total(&pre));
        let poset = iso_poset(&cl).unwrap();
        assert_eq!(poset.classes.len(), 2);
        assert!(is_antisymmetric(&poset.leq));
        let top = greatest_element(&poset).unwrap();
        assert_eq!(cl.members()[poset.classes[top][0]].domain(), cl.context().omega());
        assert_eq!(poset.hasse().len(), 1);
    }

    #[test]
    fn singleton_and_empty_classes() {
        let one = gaunt_chain().select(&[0]);
        assert_eq!(build_preorder(&one).unwrap(), vec![vec![true]]);
        assert_eq!(terminal_objects(&one).unwrap(), vec![0]);
        let none = one.select(&[]);
        assert!(is_gaunt(&none).unwrap());
        assert!(terminal_objects(&none).unwrap().is_empty());
    }

    #[test]
    fn isomorphic_tops_are_both_terminal() {
        let cl = pb_class(r(3));
        let tops = terminal_objects(&cl).unwrap();
        assert_eq!(tops.len(), 2);
        assert!(!is_gaunt(&cl).unwrap());
        assert!(matches!(unique_morphism_order(&cl), Err(Error::NotGaunt(_))));
    }

    #[test]
    fn gaunt_chain_unique_order() {
        let cl = gaunt_chain();
        assert!(is_gaunt(&cl).unwrap());
        let u = unique_morphism_order(&cl).unwrap();
        assert_eq!(u, vec![vec![true, true], vec![false, true]]);
        assert_eq!(initial_objects(&cl).unwrap(), vec![0]);
    }

    #[test]
    fn lax_config_makes_null_receive_maps() {
        let ctx = ctx();
        let sigma = gauge_fixings(&ctx).unwrap().remove(0);
        let (e, _) = pullback_type_extension(&ctx, ctx.core(), &swap_functional(r(3)), &sigma).unwrap();
        let cl = ExtClass::new(ctx.clone(), vec![e, null_extension(&ctx)], MorphismConfig::lax()).unwrap();
        let pre = build_preorder(&cl).unwrap();
        assert!(pre[0][1] && pre[1][1]);
    }

    #[test]
    fn maximality_modes_with_a_terminal_object() {
        let cl = gaunt_chain();
        for mode in MaximalityMode::ALL {
            let v = check_maximality(&cl, &cl, mode).unwrap();
            assert!(v.holds, "{mode}");
            assert_eq!(v.witness, Some(vec![1, 1]));
            let vacuous = check_maximality(&cl.select(&[]), &cl, mode).unwrap();
            assert!(vacuous.holds);
        }
    }

    #[test]
    fn antichain_fails_maximality() {
        let a = pb_class(r(3));
        let b = pb_class(r(4));
        let tops = vec![a.members()[terminal_objects(&a).unwrap()[0]].clone(), b.members()[terminal_objects(&b).unwrap()[0]].clone()];
        let anti = ExtClass::new(a.context().clone(), tops, MorphismConfig::strict()).unwrap();
        let pre = build_preorder(&anti).unwrap();
        assert_eq!(incomparable_pair(&pre), Some((0, 1)));
        for mode in MaximalityMode::ALL {
            let v = check_maximality(&anti, &anti, mode).unwrap();
            assert!(!v.holds, "{mode}");
            assert!(v.counterexample.is_some());
        }
        let d = density_check(&anti.select(&[0]), &anti.members()[1], MaximalityMode::Maximal, None).unwrap();
        assert!(!d.holds);
        assert_eq!(d.failing_subset, Some(vec![0]));
    }

    #[test]
    fn density_with_terminal_candidate() {
        let cl = gaunt_chain();
        let top = cl.members()[1].clone();
        for mode in MaximalityMode::ALL {
            let d = density_check(&cl.select(&[0]), &top, mode, None).unwrap();
            assert!(d.holds, "{mode}");
            assert_eq!(d.subsets_checked, 2);
        }
        let same = density_check(&cl.select(&[1]), &top, MaximalityMode::Universal, None).unwrap();
        assert!(same.holds);
    }

    #[test]
    fn e_of_i_literal_and_closure() {
        let cl = gaunt_chain();
        assert!(class_e_of_i(&cl, 0).is_empty());
        assert_eq!(class_e_of_i(&cl, 1).len(), 2);
        assert_eq!(class_e_of_i(&cl, 2).len(), 2);
        let index = [cl.context().omega().clone()];
        let closure = class_e_of_i_closure(&cl, &index).unwrap();
        assert_eq!(closure.len(), 2);
        let only_empty = class_e_of_i_closure(&cl, &[]).unwrap();
        assert_eq!(only_empty.members(), &cl.members()[..1]);
    }

    #[test]
    fn coherence_on_the_chain() {
        let cl = gaunt_chain();
        let index = [cl.context().omega().clone()];
        let v = coherence_check(&cl, &index, CoherenceMode::Universality, EOfIReading::Literal).unwrap();
        assert!(v.holds, "{:?}", v.failure);
        assert!(v.initial);
        assert_eq!(v.families.len(), 1);
        let empty = coherence_check(&cl, &[], CoherenceMode::Maximality, EOfIReading::Literal).unwrap();
        assert!(empty.holds);
        assert!(empty.e_of_i.is_empty());
    }

    #[test]
    fn functors_between_points() {
        let ctx = Arc::new(point_context());
        let cl = ExtClass::new(ctx.clone(), vec![null_extension(&ctx)], MorphismConfig::strict()).unwrap();
        let cat = ClassCategory::build(&cl).unwrap();
        let fs = enumerate_functors(&cat, &[0], &cat, &[0], DEFAULT_BUDGET).unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(natural_transformations(&cat, &[0], &cat, &[0], &fs[0], &fs[0], 5), 1);
    }
}
