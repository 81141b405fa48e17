//! Finite sets, total maps between them, rational-valued functions, and the
//! universal constructions used everywhere else (sections, pullbacks,
//! disjoint unions) together with an exhaustive universal-property checker.
//!
//! Every set keeps its elements in a fixed order. All enumerations follow
//! that order, so results are reproducible byte for byte.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::Rat;

/// An ordered finite set of opaque identifiers.
#[derive(Clone)]
pub struct FinSet {
    elements: Arc<[String]>,
    index: Arc<HashMap<String, usize>>,
}

impl FinSet {
    pub fn new<I, S>(elements: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let elements: Vec<String> = elements.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(Error::DuplicateElement(e.clone()));
            }
        }
        Ok(FinSet {
            elements: elements.into(),
            index: Arc::new(index),
        })
    }

    pub fn empty() -> Self {
        FinSet::new(Vec::<String>::new()).expect("empty set")
    }

    /// `n` fresh elements named `{prefix}0 .. {prefix}{n-1}`.
    pub fn numbered(prefix: &str, n: usize) -> Self {
        FinSet::new((0..n).map(|i| format!("{prefix}{i}"))).expect("distinct names")
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn get(&self, i: usize) -> &str {
        &self.elements[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.elements.iter().map(String::as_str)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name).ok_or_else(|| Error::UnknownElement {
            element: name.to_string(),
            context: format!("{{{}}}", self.elements.join(",")),
        })
    }

    /// The subset of `self` containing the given names, in `self`'s order.
    pub fn subset<I, S>(&self, names: I) -> Result<FinSet>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut keep = vec![false; self.len()];
        for n in names {
            keep[self.require(n.as_ref())?] = true;
        }
        Ok(self.subset_mask(&keep))
    }

    /// Subset selected by a membership mask indexed like `self`.
    pub fn subset_mask(&self, keep: &[bool]) -> FinSet {
        FinSet::new(
            self.elements
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(e, _)| e.clone()),
        )
        .expect("subset of a set has distinct elements")
    }

    /// Subset by carrier indices.
    pub fn subset_indices(&self, idx: impl IntoIterator<Item = usize>) -> FinSet {
        let mut keep = vec![false; self.len()];
        for i in idx {
            keep[i] = true;
        }
        self.subset_mask(&keep)
    }

    pub fn is_subset_of(&self, other: &FinSet) -> bool {
        self.iter().all(|e| other.contains(e))
    }

    /// Membership mask of `self` inside `carrier`. Fails if `self` is not a
    /// subset.
    pub fn mask_in(&self, carrier: &FinSet) -> Result<Vec<bool>> {
        let mut mask = vec![false; carrier.len()];
        for e in self.iter() {
            mask[carrier.require(e)?] = true;
        }
        Ok(mask)
    }

    /// Carrier indices of the elements of `self`, in `self`'s order.
    pub fn indices_in(&self, carrier: &FinSet) -> Result<Vec<usize>> {
        self.iter().map(|e| carrier.require(e)).collect()
    }

    /// Union of two subsets of `carrier`, in carrier order.
    pub fn union_in(&self, other: &FinSet, carrier: &FinSet) -> Result<FinSet> {
        let mut mask = self.mask_in(carrier)?;
        for (m, o) in mask.iter_mut().zip(other.mask_in(carrier)?) {
            *m |= o;
        }
        Ok(carrier.subset_mask(&mask))
    }

    pub fn intersection(&self, other: &FinSet) -> FinSet {
        FinSet::new(self.iter().filter(|e| other.contains(e)).map(str::to_string))
            .expect("distinct")
    }

    /// Elements of `self` not in `other`, keeping `self`'s order.
    pub fn difference(&self, other: &FinSet) -> FinSet {
        FinSet::new(self.iter().filter(|e| !other.contains(e)).map(str::to_string))
            .expect("distinct")
    }

    /// Same elements regardless of order.
    pub fn same_elements(&self, other: &FinSet) -> bool {
        self.len() == other.len() && self.is_subset_of(other)
    }
}

impl PartialEq for FinSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.elements, &other.elements) || self.elements == other.elements
    }
}

impl Eq for FinSet {}

impl std::hash::Hash for FinSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.elements.hash(state)
    }
}

impl fmt::Debug for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.elements.join(","))
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A total function between finite sets, stored as an index table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinMap {
    domain: FinSet,
    codomain: FinSet,
    table: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapProperties {
    pub injective: bool,
    pub surjective: bool,
}

impl FinMap {
    pub fn new(domain: FinSet, codomain: FinSet, table: Vec<usize>) -> Result<Self> {
        if table.len() != domain.len() {
            return Err(Error::MalformedMap(format!(
                "table has {} entries for a domain of {}",
                table.len(),
                domain.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&t| t >= codomain.len()) {
            return Err(Error::MalformedMap(format!(
                "value index {bad} outside a codomain of {}",
                codomain.len()
            )));
        }
        Ok(FinMap {
            domain,
            codomain,
            table,
        })
    }

    pub fn from_fn(domain: FinSet, codomain: FinSet, f: impl Fn(usize) -> usize) -> Result<Self> {
        let table = (0..domain.len()).map(f).collect();
        FinMap::new(domain, codomain, table)
    }

    /// Build from `(source, target)` name pairs; every domain element must
    /// appear exactly once.
    pub fn from_pairs<S: AsRef<str>>(domain: FinSet, codomain: FinSet, pairs: &[(S, S)]) -> Result<Self> {
        let mut table = vec![usize::MAX; domain.len()];
        for (a, b) in pairs {
            let i = domain.require(a.as_ref())?;
            if table[i] != usize::MAX {
                return Err(Error::MalformedMap(format!("`{}` assigned twice", a.as_ref())));
            }
            table[i] = codomain.require(b.as_ref())?;
        }
        if let Some(i) = table.iter().position(|&t| t == usize::MAX) {
            return Err(Error::MalformedMap(format!("`{}` has no image", domain.get(i))));
        }
        FinMap::new(domain, codomain, table)
    }

    pub fn identity(set: &FinSet) -> Self {
        FinMap {
            domain: set.clone(),
            codomain: set.clone(),
            table: (0..set.len()).collect(),
        }
    }

    pub fn constant(domain: FinSet, codomain: FinSet, value: usize) -> Result<Self> {
        let n = domain.len();
        FinMap::new(domain, codomain, vec![value; n])
    }

    /// The inclusion of `sub` into `sup` by element name.
    pub fn inclusion(sub: &FinSet, sup: &FinSet) -> Result<Self> {
        let table = sub.indices_in(sup)?;
        FinMap::new(sub.clone(), sup.clone(), table)
    }

    pub fn domain(&self) -> &FinSet {
        &self.domain
    }

    pub fn codomain(&self) -> &FinSet {
        &self.codomain
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn apply_name(&self, name: &str) -> Option<&str> {
        self.domain
            .index_of(name)
            .map(|i| self.codomain.get(self.table[i]))
    }

    pub fn properties(&self) -> MapProperties {
        let mut hit = vec![0usize; self.codomain.len()];
        for &t in &self.table {
            hit[t] += 1;
        }
        MapProperties {
            injective: hit.iter().all(|&h| h <= 1),
            surjective: hit.iter().all(|&h| h >= 1),
        }
    }

    pub fn is_injective(&self) -> bool {
        self.properties().injective
    }

    pub fn image(&self) -> FinSet {
        self.codomain.subset_indices(self.table.iter().copied())
    }

    /// Restriction to a subset of the domain.
    pub fn restrict(&self, sub: &FinSet) -> Result<FinMap> {
        let idx = sub.indices_in(&self.domain)?;
        FinMap::new(
            sub.clone(),
            self.codomain.clone(),
            idx.into_iter().map(|i| self.table[i]).collect(),
        )
    }

    /// Same assignment seen with a larger (or re-ordered) codomain.
    pub fn with_codomain(&self, codomain: &FinSet) -> Result<FinMap> {
        let table = self
            .table
            .iter()
            .map(|&t| codomain.require(self.codomain.get(t)))
            .collect::<Result<Vec<_>>>()?;
        FinMap::new(self.domain.clone(), codomain.clone(), table)
    }

    /// Name pairs in domain order.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.table
            .iter()
            .enumerate()
            .map(|(i, &t)| (self.domain.get(i), self.codomain.get(t)))
    }

    /// Inverse of a bijection.
    pub fn inverse(&self) -> Option<FinMap> {
        let p = self.properties();
        if !(p.injective && p.surjective) {
            return None;
        }
        let mut inv = vec![0; self.table.len()];
        for (i, &t) in self.table.iter().enumerate() {
            inv[t] = i;
        }
        Some(FinMap {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            table: inv,
        })
    }
}

impl fmt::Debug for FinMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.pairs().map(|(a, b)| format!("{a}->{b}")).collect();
        write!(f, "[{}]", body.join(" "))
    }
}

/// `compose(f, g)` is `x ↦ g(f(x))`.
pub fn compose(f: &FinMap, g: &FinMap) -> Result<FinMap> {
    if f.codomain != g.domain {
        return Err(Error::DomainMismatch(format!(
            "codomain {:?} is not domain {:?}",
            f.codomain, g.domain
        )));
    }
    Ok(FinMap {
        domain: f.domain.clone(),
        codomain: g.codomain.clone(),
        table: f.table.iter().map(|&t| g.table[t]).collect(),
    })
}

pub fn map_properties(f: &FinMap) -> MapProperties {
    f.properties()
}

/// A rational-valued function on a finite set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFn {
    domain: FinSet,
    values: Vec<Rat>,
}

impl RatFn {
    pub fn new(domain: FinSet, values: Vec<Rat>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::MalformedMap(format!(
                "{} values for a domain of {}",
                values.len(),
                domain.len()
            )));
        }
        Ok(RatFn { domain, values })
    }

    pub fn constant(domain: FinSet, value: Rat) -> Self {
        let values = vec![value; domain.len()];
        RatFn { domain, values }
    }

    pub fn zero(domain: FinSet) -> Self {
        RatFn::constant(domain, Rat::ZERO)
    }

    pub fn from_pairs<S: AsRef<str>>(domain: FinSet, pairs: &[(S, Rat)]) -> Result<Self> {
        let mut values: Vec<Option<Rat>> = vec![None; domain.len()];
        for (a, v) in pairs {
            let i = domain.require(a.as_ref())?;
            if values[i].replace(*v).is_some() {
                return Err(Error::MalformedMap(format!("`{}` assigned twice", a.as_ref())));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::MalformedMap(format!("`{}` has no value", domain.get(i)))))
            .collect::<Result<Vec<_>>>()?;
        Ok(RatFn { domain, values })
    }

    pub fn from_fn(domain: FinSet, f: impl Fn(usize) -> Rat) -> Self {
        let values = (0..domain.len()).map(f).collect();
        RatFn { domain, values }
    }

    pub fn domain(&self) -> &FinSet {
        &self.domain
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn value(&self, i: usize) -> Rat {
        self.values[i]
    }

    pub fn value_of(&self, name: &str) -> Option<Rat> {
        self.domain.index_of(name).map(|i| self.values[i])
    }

    pub fn restrict(&self, sub: &FinSet) -> Result<RatFn> {
        let idx = sub.indices_in(&self.domain)?;
        Ok(RatFn {
            domain: sub.clone(),
            values: idx.into_iter().map(|i| self.values[i]).collect(),
        })
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Rat::is_zero)
    }

    /// Precomposition `self ∘ f`.
    pub fn after(&self, f: &FinMap) -> Result<RatFn> {
        if f.codomain() != &self.domain {
            return Err(Error::DomainMismatch(format!(
                "map lands in {:?}, functional lives on {:?}",
                f.codomain(),
                self.domain
            )));
        }
        Ok(RatFn {
            domain: f.domain().clone(),
            values: f.table().iter().map(|&t| self.values[t]).collect(),
        })
    }

    /// Distinct values in increasing order, as a finite set of their decimal
    /// renderings.
    pub fn value_set(fns: &[&RatFn]) -> FinSet {
        let mut vals: Vec<Rat> = fns.iter().flat_map(|f| f.values.iter().copied()).collect();
        vals.sort();
        vals.dedup();
        FinSet::new(vals.iter().map(Rat::to_string)).expect("distinct rationals render distinctly")
    }

    /// The function seen as a map into a value set produced by
    /// [`RatFn::value_set`].
    pub fn as_map(&self, values: &FinSet) -> Result<FinMap> {
        let table = self
            .values
            .iter()
            .map(|v| values.require(&v.to_string()))
            .collect::<Result<Vec<_>>>()?;
        FinMap::new(self.domain.clone(), values.clone(), table)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, Rat)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.domain.get(i), v))
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.pairs().map(|(a, v)| format!("{a}:{v}")).collect();
        write!(f, "[{}]", body.join(" "))
    }
}

/// Odometer over all functions `[0, n) -> [0, k)` as index tables, last
/// position varying fastest.
pub struct AllMaps {
    n: usize,
    k: usize,
    current: Option<Vec<usize>>,
}

impl AllMaps {
    pub fn new(n: usize, k: usize) -> Self {
        let current = if n == 0 {
            Some(Vec::new())
        } else if k == 0 {
            None
        } else {
            Some(vec![0; n])
        };
        AllMaps { n, k, current }
    }
}

impl Iterator for AllMaps {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        let mut pos = self.n;
        loop {
            if pos == 0 {
                self.current = None;
                break;
            }
            pos -= 1;
            next[pos] += 1;
            if next[pos] < self.k {
                self.current = Some(next);
                break;
            }
            next[pos] = 0;
        }
        Some(out)
    }
}

/// Cartesian product of candidate lists, last list varying fastest.
pub fn product_of<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for item in c {
                let mut p = prefix.clone();
                p.push(item.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// `k^n`, saturating.
pub fn count_maps(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.saturating_mul(k as u128);
    }
    acc
}

/// Every section of a surjection, in deterministic order.
pub fn enumerate_sections(p: &FinMap) -> Result<Vec<FinMap>> {
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); p.codomain().len()];
    for (i, &t) in p.table().iter().enumerate() {
        fibers[t].push(i);
    }
    if let Some(b) = fibers.iter().position(Vec::is_empty) {
        return Err(Error::NotSurjective(p.codomain().get(b).to_string()));
    }
    product_of(&fibers)
        .into_iter()
        .map(|table| FinMap::new(p.codomain().clone(), p.domain().clone(), table))
        .collect()
}

/// A pullback square: `apex` with projections `left: apex -> dom(f)` and
/// `right: apex -> dom(g)` satisfying `f ∘ left = g ∘ right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pullback {
    pub apex: FinSet,
    pub left: FinMap,
    pub right: FinMap,
}

/// Name of the apex element for the pair `(a, b)`.
pub fn pair_name(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

/// The set pullback `{(a, b) : f(a) = g(b)}`, pairs ordered lexicographically.
pub fn set_pullback(f: &FinMap, g: &FinMap) -> Result<Pullback> {
    if f.codomain() != g.codomain() {
        return Err(Error::DomainMismatch(format!(
            "pullback legs land in {:?} and {:?}",
            f.codomain(),
            g.codomain()
        )));
    }
    let mut names = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for a in 0..f.domain().len() {
        for b in 0..g.domain().len() {
            if f.apply(a) == g.apply(b) {
                names.push(pair_name(f.domain().get(a), g.domain().get(b)));
                left.push(a);
                right.push(b);
            }
        }
    }
    let apex = FinSet::new(names)?;
    Ok(Pullback {
        left: FinMap::new(apex.clone(), f.domain().clone(), left)?,
        right: FinMap::new(apex.clone(), g.domain().clone(), right)?,
        apex,
    })
}

/// Disjoint union with tagged elements `{i}.{name}` and its injections.
pub fn disjoint_union(summands: &[FinSet]) -> (FinSet, Vec<FinMap>) {
    let mut names = Vec::new();
    let mut offsets = Vec::new();
    for (i, s) in summands.iter().enumerate() {
        offsets.push(names.len());
        names.extend(s.iter().map(|e| format!("{i}.{e}")));
    }
    let apex = FinSet::new(names).expect("tags keep elements distinct");
    let injections = summands
        .iter()
        .zip(offsets)
        .map(|(s, off)| FinMap::from_fn(s.clone(), apex.clone(), |k| off + k).expect("in range"))
        .collect();
    (apex, injections)
}

/// Test objects `t0..t{n-1}` of every size up to `max_size`.
pub fn test_objects(max_size: usize) -> Vec<FinSet> {
    (0..=max_size).map(|n| FinSet::numbered("t", n)).collect()
}

/// Witness for [`verify_universal`]: the candidate object, its structure maps
/// and the test objects against which every competing cone or cocone is
/// enumerated.
#[derive(Debug, Clone)]
pub enum UniversalWitness {
    Pullback {
        f: FinMap,
        g: FinMap,
        apex: FinSet,
        left: FinMap,
        right: FinMap,
        tests: Vec<FinSet>,
    },
    Coproduct {
        summands: Vec<FinSet>,
        apex: FinSet,
        injections: Vec<FinMap>,
        tests: Vec<FinSet>,
    },
    Terminal {
        apex: FinSet,
        tests: Vec<FinSet>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniversalKind {
    Pullback,
    Coproduct,
    Terminal,
}

impl UniversalWitness {
    pub fn kind(&self) -> UniversalKind {
        match self {
            UniversalWitness::Pullback { .. } => UniversalKind::Pullback,
            UniversalWitness::Coproduct { .. } => UniversalKind::Coproduct,
            UniversalWitness::Terminal { .. } => UniversalKind::Terminal,
        }
    }
}

/// Exhaustively checks that every competing cone (or cocone) over the test
/// objects factors through the candidate in exactly one way.
pub fn verify_universal(witness: &UniversalWitness) -> bool {
    match witness {
        UniversalWitness::Pullback {
            f,
            g,
            apex,
            left,
            right,
            tests,
        } => {
            if f.codomain() != g.codomain()
                || left.domain() != apex
                || right.domain() != apex
                || left.codomain() != f.domain()
                || right.codomain() != g.domain()
            {
                return false;
            }
            // the candidate must itself be a cone
            if (0..apex.len()).any(|p| f.apply(left.apply(p)) != g.apply(right.apply(p))) {
                return false;
            }
            tests.iter().all(|t| {
                AllMaps::new(t.len(), f.domain().len()).all(|a| {
                    AllMaps::new(t.len(), g.domain().len()).all(|b| {
                        let cone = (0..t.len()).all(|x| f.apply(a[x]) == g.apply(b[x]));
                        if !cone {
                            return true;
                        }
                        let mediating = AllMaps::new(t.len(), apex.len())
                            .filter(|m| (0..t.len()).all(|x| left.apply(m[x]) == a[x] && right.apply(m[x]) == b[x]))
                            .take(2)
                            .count();
                        mediating == 1
                    })
                })
            })
        }
        UniversalWitness::Coproduct {
            summands,
            apex,
            injections,
            tests,
        } => {
            if injections.len() != summands.len()
                || injections
                    .iter()
                    .zip(summands)
                    .any(|(i, s)| i.domain() != s || i.codomain() != apex)
            {
                return false;
            }
            tests.iter().all(|t| {
                let leg_spaces: Vec<Vec<Vec<usize>>> =
                    summands.iter().map(|s| AllMaps::new(s.len(), t.len()).collect()).collect();
                product_of(&leg_spaces).into_iter().all(|legs| {
                    let mediating = AllMaps::new(apex.len(), t.len())
                        .filter(|m| {
                            injections
                                .iter()
                                .zip(&legs)
                                .all(|(inj, leg)| (0..leg.len()).all(|x| m[inj.apply(x)] == leg[x]))
                        })
                        .take(2)
                        .count();
                    mediating == 1
                })
            })
        }
        UniversalWitness::Terminal { apex, tests } => tests
            .iter()
            .all(|t| count_maps(t.len(), apex.len()) == 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> FinSet {
        FinSet::new(names.iter().copied()).unwrap()
    }

    #[test]
    fn duplicate_elements_rejected() {
        assert_eq!(
            FinSet::new(["a", "a"]).unwrap_err(),
            Error::DuplicateElement("a".into())
        );
    }

    #[test]
    fn compose_identity_and_chain() {
        let ab = set(&["a", "b"]);
        let cd = set(&["c", "d"]);
        let g = FinMap::from_pairs(ab.clone(), cd.clone(), &[("a", "d"), ("b", "d")]).unwrap();
        assert_eq!(compose(&FinMap::identity(&ab), &g).unwrap(), g);

        let f = FinMap::from_pairs(set(&["a"]), set(&["c"]), &[("a", "c")]).unwrap();
        let h = FinMap::from_pairs(set(&["c"]), set(&["d"]), &[("c", "d")]).unwrap();
        let fh = compose(&f, &h).unwrap();
        assert_eq!(fh.apply_name("a"), Some("d"));
    }

    #[test]
    fn compose_rejects_mismatch() {
        let f = FinMap::identity(&set(&["a"]));
        let g = FinMap::identity(&set(&["b"]));
        assert!(matches!(compose(&f, &g), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn properties_of_identity_and_constant() {
        let abc = set(&["a", "b", "c"]);
        assert_eq!(
            map_properties(&FinMap::identity(&abc)),
            MapProperties { injective: true, surjective: true }
        );
        let k = FinMap::constant(set(&["a", "b"]), set(&["c"]), 0).unwrap();
        assert_eq!(
            map_properties(&k),
            MapProperties { injective: false, surjective: true }
        );
    }

    #[test]
    fn sections_of_small_surjections() {
        let p = FinMap::from_pairs(
            set(&["1", "2", "3"]),
            set(&["a", "b"]),
            &[("1", "a"), ("2", "a"), ("3", "b")],
        )
        .unwrap();
        let secs = enumerate_sections(&p).unwrap();
        assert_eq!(secs.len(), 2);
        for s in &secs {
            assert_eq!(compose(s, &p).unwrap(), FinMap::identity(p.codomain()));
        }

        let bij = FinMap::from_pairs(set(&["x", "y"]), set(&["u", "v"]), &[("x", "v"), ("y", "u")]).unwrap();
        let secs = enumerate_sections(&bij).unwrap();
        assert_eq!(secs, vec![bij.inverse().unwrap()]);
    }

    #[test]
    fn sections_need_surjection() {
        let p = FinMap::constant(set(&["1"]), set(&["a", "b"]), 0).unwrap();
        assert_eq!(enumerate_sections(&p).unwrap_err(), Error::NotSurjective("b".into()));
    }

    #[test]
    fn pullback_of_identities_and_fibers() {
        let a = set(&["a"]);
        let pb = set_pullback(&FinMap::identity(&a), &FinMap::identity(&a)).unwrap();
        assert_eq!(pb.apex, set(&["(a,a)"]));

        let c = set(&["c1", "c2"]);
        let f = FinMap::from_pairs(set(&["a1", "a2"]), c.clone(), &[("a1", "c1"), ("a2", "c2")]).unwrap();
        let g = FinMap::from_pairs(set(&["b1"]), c, &[("b1", "c1")]).unwrap();
        let pb = set_pullback(&f, &g).unwrap();
        assert_eq!(pb.apex, set(&["(a1,b1)"]));
    }

    #[test]
    fn universal_checks() {
        let c = set(&["c1", "c2"]);
        let f = FinMap::from_pairs(set(&["a1", "a2"]), c.clone(), &[("a1", "c1"), ("a2", "c1")]).unwrap();
        let g = FinMap::from_pairs(set(&["b1", "b2"]), c, &[("b1", "c1"), ("b2", "c2")]).unwrap();
        let pb = set_pullback(&f, &g).unwrap();
        let ok = UniversalWitness::Pullback {
            f: f.clone(),
            g: g.clone(),
            apex: pb.apex.clone(),
            left: pb.left.clone(),
            right: pb.right.clone(),
            tests: test_objects(2),
        };
        assert!(verify_universal(&ok));

        // the unfiltered product is not a cone over non-equal maps
        let (prod_names, pl, pr): (Vec<String>, Vec<usize>, Vec<usize>) = {
            let mut n = Vec::new();
            let mut l = Vec::new();
            let mut r = Vec::new();
            for a in 0..2 {
                for b in 0..2 {
                    n.push(format!("{a}{b}"));
                    l.push(a);
                    r.push(b);
                }
            }
            (n, l, r)
        };
        let prod = FinSet::new(prod_names).unwrap();
        let bad = UniversalWitness::Pullback {
            f: f.clone(),
            g: g.clone(),
            apex: prod.clone(),
            left: FinMap::new(prod.clone(), f.domain().clone(), pl).unwrap(),
            right: FinMap::new(prod, g.domain().clone(), pr).unwrap(),
            tests: test_objects(2),
        };
        assert!(!verify_universal(&bad));

        let (apex, injections) = disjoint_union(&[set(&["x", "y"]), set(&["u", "v"])]);
        let cop = UniversalWitness::Coproduct {
            summands: vec![set(&["x", "y"]), set(&["u", "v"])],
            apex,
            injections,
            tests: test_objects(4),
        };
        assert!(verify_universal(&cop));

        assert!(verify_universal(&UniversalWitness::Terminal {
            apex: set(&["*"]),
            tests: test_objects(3)
        }));
        assert!(!verify_universal(&UniversalWitness::Terminal {
            apex: set(&["*", "**"]),
            tests: test_objects(2)
        }));
    }

    #[test]
    fn all_maps_counts() {
        assert_eq!(AllMaps::new(3, 2).count(), 8);
        assert_eq!(AllMaps::new(0, 5).count(), 1);
        assert_eq!(AllMaps::new(2, 0).count(), 0);
        assert_eq!(count_maps(8, 8), 16_777_216);
    }
}
