//! Finite groups, their actions on finite sets, and the invariance and
//! injectivity predicates built on orbits.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::sets::{FinMap, FinSet, RatFn};

/// A finite group given by its full multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinGroup {
    elements: FinSet,
    mult: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FinGroup {
    /// Validates closure, identity, inverses and associativity.
    pub fn from_table(elements: FinSet, mult: Vec<Vec<usize>>) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::InvalidGroup("a group needs at least one element".into()));
        }
        if mult.len() != n || mult.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(Error::InvalidGroup(format!("table must be {n}x{n} over the group")));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| mult[e][g] == g && mult[g][e] == g))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = vec![0; n];
        for g in 0..n {
            inverse[g] = (0..n)
                .find(|&h| mult[g][h] == identity && mult[h][g] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("`{}` has no inverse", elements.get(g))))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mult[mult[a][b]][c] != mult[a][mult[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({}, {}, {})",
                            elements.get(a),
                            elements.get(b),
                            elements.get(c)
                        )));
                    }
                }
            }
        }
        Ok(FinGroup {
            elements,
            mult,
            identity,
            inverse,
        })
    }

    pub fn trivial() -> Self {
        FinGroup::from_table(FinSet::new(["e"]).unwrap(), vec![vec![0]]).unwrap()
    }

    /// Cyclic group `Z/n` with elements `e, r, r2, ...`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0);
        let names = (0..n).map(|k| match k {
            0 => "e".to_string(),
            1 => "r".to_string(),
            k => format!("r{k}"),
        });
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FinGroup::from_table(FinSet::new(names).unwrap(), table).unwrap()
    }

    /// Closes the given permutations of `points` into a group. Elements are
    /// named by their shortest generator word (breadth first, generators in
    /// the given order), the identity is `e`, words are joined with `.`.
    /// Returns the group together with its natural action on `points`.
    pub fn from_permutations(points: &FinSet, gens: &[(String, Vec<usize>)]) -> Result<(FinGroup, GroupAction)> {
        let n = points.len();
        for (name, p) in gens {
            let mut seen = vec![false; n];
            if p.len() != n || p.iter().any(|&x| x >= n || std::mem::replace(&mut seen[x], true)) {
                return Err(Error::InvalidGroup(format!("generator `{name}` is not a permutation")));
            }
        }
        let id: Vec<usize> = (0..n).collect();
        let mut perms: Vec<Vec<usize>> = vec![id.clone()];
        let mut names: Vec<String> = vec!["e".into()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(cur) = queue.pop_front() {
            for (gname, p) in gens {
                // word `cur.g` acts as: apply g first, then cur
                let next: Vec<usize> = (0..n).map(|x| perms[cur][p[x]]).collect();
                if !index.contains_key(&next) {
                    let name = if cur == 0 { gname.clone() } else { format!("{}.{}", names[cur], gname) };
                    index.insert(next.clone(), perms.len());
                    queue.push_back(perms.len());
                    perms.push(next);
                    names.push(name);
                }
            }
        }
        let m = perms.len();
        let table: Vec<Vec<usize>> = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        let ab: Vec<usize> = (0..n).map(|x| perms[a][perms[b][x]]).collect();
                        index[&ab]
                    })
                    .collect()
            })
            .collect();
        let group = Arc::new(FinGroup::from_table(FinSet::new(names)?, table)?);
        let action = GroupAction::new(group.clone(), points.clone(), perms)?;
        Ok(((*group).clone(), action))
    }

    pub fn elements(&self) -> &FinSet {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mult
    }
}

/// A left action `act(g, x)` of a finite group on a finite set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    group: Arc<FinGroup>,
    carrier: FinSet,
    table: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InvarianceReport {
    pub invariant_subset: bool,
    pub invariant_fn: bool,
    pub quotient_injective: bool,
}

impl InvarianceReport {
    pub fn all(&self) -> bool {
        self.invariant_subset && self.invariant_fn && self.quotient_injective
    }
}

/// Result of the maximal injective-invariant subset search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximalSubsets {
    pub canonical: FinSet,
    pub all_maximal: Vec<FinSet>,
    pub core_feasible: bool,
}

impl MaximalSubsets {
    pub fn is_unique(&self) -> bool {
        self.all_maximal.len() == 1
    }
}

impl GroupAction {
    /// `table[g][x]` is the image of carrier element `x` under group element
    /// `g`.
    pub fn new(group: Arc<FinGroup>, carrier: FinSet, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = carrier.len();
        if table.len() != group.order() || table.iter().any(|r| r.len() != n || r.iter().any(|&y| y >= n)) {
            return Err(Error::InvalidAction("table must give one total map per group element".into()));
        }
        let e = group.identity();
        if (0..n).any(|x| table[e][x] != x) {
            return Err(Error::InvalidAction("identity does not act trivially".into()));
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                let gh = group.mul(g, h);
                if let Some(x) = (0..n).find(|&x| table[gh][x] != table[g][table[h][x]]) {
                    return Err(Error::InvalidAction(format!(
                        "act({}{}, {}) differs from act({}, act({}, {}))",
                        group.elements().get(g),
                        group.elements().get(h),
                        carrier.get(x),
                        group.elements().get(g),
                        group.elements().get(h),
                        carrier.get(x)
                    )));
                }
            }
        }
        Ok(GroupAction { group, carrier, table })
    }

    pub fn trivial(group: Arc<FinGroup>, carrier: FinSet) -> Self {
        let table = vec![(0..carrier.len()).collect(); group.order()];
        GroupAction { group, carrier, table }
    }

    pub fn group(&self) -> &Arc<FinGroup> {
        &self.group
    }

    pub fn carrier(&self) -> &FinSet {
        &self.carrier
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn act(&self, g: usize, x: usize) -> usize {
        self.table[g][x]
    }

    /// Orbit of a carrier index, sorted in carrier order.
    pub fn orbit_of(&self, x: usize) -> Vec<usize> {
        let mut o: Vec<usize> = (0..self.group.order()).map(|g| self.table[g][x]).collect();
        o.sort_unstable();
        o.dedup();
        o
    }

    /// Orbits of the whole carrier, ordered by least element, as index lists.
    pub fn orbit_indices(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.carrier.len()];
        let mut out = Vec::new();
        for x in 0..self.carrier.len() {
            if !seen[x] {
                let o = self.orbit_of(x);
                for &y in &o {
                    seen[y] = true;
                }
                out.push(o);
            }
        }
        out
    }

    fn first_escape(&self, mask: &[bool]) -> Option<(usize, usize)> {
        for x in (0..mask.len()).filter(|&x| mask[x]) {
            for g in 0..self.group.order() {
                let y = self.table[g][x];
                if !mask[y] {
                    return Some((x, y));
                }
            }
        }
        None
    }

    pub fn is_invariant(&self, subset: &FinSet) -> bool {
        match subset.mask_in(&self.carrier) {
            Ok(mask) => self.first_escape(&mask).is_none(),
            Err(_) => false,
        }
    }

    fn check_invariant(&self, subset: &FinSet) -> Result<Vec<bool>> {
        let mask = subset.mask_in(&self.carrier)?;
        if let Some((x, y)) = self.first_escape(&mask) {
            return Err(Error::NotInvariant {
                element: self.carrier.get(x).to_string(),
                image: self.carrier.get(y).to_string(),
            });
        }
        Ok(mask)
    }

    /// Orbit partition of an invariant subset, blocks ordered by least
    /// element.
    pub fn orbits(&self, subset: &FinSet) -> Result<Vec<FinSet>> {
        let mask = self.check_invariant(subset)?;
        Ok(self
            .orbit_indices()
            .into_iter()
            .filter(|o| mask[o[0]])
            .map(|o| self.carrier.subset_indices(o))
            .collect())
    }

    /// Projection of an invariant subset onto its orbit representatives (the
    /// least element of each orbit).
    pub fn quotient_map(&self, subset: &FinSet) -> Result<FinMap> {
        let blocks = self.orbits(subset)?;
        let reps = FinSet::new(blocks.iter().map(|b| b.get(0).to_string()))?;
        let mut table = vec![0; subset.len()];
        for (k, b) in blocks.iter().enumerate() {
            for e in b.iter() {
                table[subset.require(e)?] = k;
            }
        }
        FinMap::new(subset.clone(), reps, table)
    }

    /// `f` must be defined on every element of `subset`; elements of the
    /// subset outside the carrier make it non-invariant.
    pub fn invariance_report(&self, f: &RatFn, subset: &FinSet) -> InvarianceReport {
        let mask = match subset.mask_in(&self.carrier) {
            Ok(m) => m,
            Err(_) => {
                return InvarianceReport {
                    invariant_subset: false,
                    invariant_fn: false,
                    quotient_injective: false,
                }
            }
        };
        let invariant_subset = self.first_escape(&mask).is_none();
        let value = |x: usize| f.value_of(self.carrier.get(x));
        let mut invariant_fn = true;
        for x in (0..mask.len()).filter(|&x| mask[x]) {
            for g in 0..self.group.order() {
                let y = self.table[g][x];
                if mask[y] && value(y) != value(x) {
                    invariant_fn = false;
                }
                if value(x).is_none() {
                    invariant_fn = false;
                }
            }
        }
        let mut quotient_injective = invariant_subset && invariant_fn;
        if quotient_injective {
            let mut seen: BTreeMap<Rat, usize> = BTreeMap::new();
            for o in self.orbit_indices().into_iter().filter(|o| mask[o[0]]) {
                let v = value(o[0]).expect("checked above");
                if seen.insert(v, o[0]).is_some() {
                    quotient_injective = false;
                    break;
                }
            }
        }
        InvarianceReport {
            invariant_subset,
            invariant_fn,
            quotient_injective,
        }
    }

    /// All inclusion-maximal invariant subsets containing `required_core`
    /// on which `f` is invariant and descends injectively to the orbit
    /// space, plus the greedy choice in carrier order.
    pub fn maximal_injective_subsets(&self, f: &RatFn, required_core: &FinSet) -> MaximalSubsets {
        let infeasible = MaximalSubsets {
            canonical: FinSet::empty(),
            all_maximal: Vec::new(),
            core_feasible: false,
        };
        let Ok(core_mask) = required_core.mask_in(&self.carrier) else {
            return infeasible;
        };
        if self.first_escape(&core_mask).is_some() {
            return infeasible;
        }
        let orbits = self.orbit_indices();
        let orbit_value = |o: &[usize]| -> Option<Rat> {
            let v = f.value_of(self.carrier.get(o[0]))?;
            o.iter()
                .all(|&x| f.value_of(self.carrier.get(x)) == Some(v))
                .then_some(v)
        };
        let mut taken: BTreeMap<Rat, ()> = BTreeMap::new();
        for o in orbits.iter().filter(|o| core_mask[o[0]]) {
            match orbit_value(o) {
                Some(v) if taken.insert(v, ()).is_none() => {}
                _ => return infeasible,
            }
        }
        // group the remaining usable orbits by value, in order of first
        // appearance; each maximal subset picks one orbit per value
        let mut groups: Vec<(Rat, Vec<usize>)> = Vec::new();
        for (k, o) in orbits.iter().enumerate() {
            if core_mask[o[0]] {
                continue;
            }
            let Some(v) = orbit_value(o) else { continue };
            if taken.contains_key(&v) {
                continue;
            }
            match groups.iter_mut().find(|(gv, _)| *gv == v) {
                Some((_, ks)) => ks.push(k),
                None => groups.push((v, vec![k])),
            }
        }
        let build = |choice: &[usize]| -> FinSet {
            let mut mask = core_mask.clone();
            for &k in choice {
                for &x in &orbits[k] {
                    mask[x] = true;
                }
            }
            self.carrier.subset_mask(&mask)
        };
        let choices: Vec<Vec<usize>> = groups.iter().map(|(_, ks)| ks.clone()).collect();
        let canonical = build(&choices.iter().map(|ks| ks[0]).collect::<Vec<_>>());
        let all_maximal = crate::sets::product_of(&choices)
            .iter()
            .map(|c| build(c))
            .collect();
        MaximalSubsets {
            canonical,
            all_maximal,
            core_feasible: true,
        }
    }
}

/// A group homomorphism given by its table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    source: Arc<FinGroup>,
    target: Arc<FinGroup>,
    table: Vec<usize>,
}

impl GroupHom {
    pub fn new(source: Arc<FinGroup>, target: Arc<FinGroup>, table: Vec<usize>) -> Result<Self> {
        if table.len() != source.order() || table.iter().any(|&t| t >= target.order()) {
            return Err(Error::InvalidHom("table is not a total map between the groups".into()));
        }
        if table[source.identity()] != target.identity() {
            return Err(Error::InvalidHom("identity is not preserved".into()));
        }
        for g in 0..source.order() {
            for h in 0..source.order() {
                if table[source.mul(g, h)] != target.mul(table[g], table[h]) {
                    return Err(Error::InvalidHom(format!(
                        "products not preserved at ({}, {})",
                        source.elements().get(g),
                        source.elements().get(h)
                    )));
                }
            }
        }
        Ok(GroupHom { source, target, table })
    }

    pub fn identity(group: Arc<FinGroup>) -> Self {
        let table = (0..group.order()).collect();
        GroupHom {
            source: group.clone(),
            target: group,
            table,
        }
    }

    /// The homomorphism sending everything to the identity.
    pub fn trivial(source: Arc<FinGroup>, target: Arc<FinGroup>) -> Self {
        let table = vec![target.identity(); source.order()];
        GroupHom { source, target, table }
    }

    pub fn source(&self) -> &Arc<FinGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FinGroup> {
        &self.target
    }

    pub fn apply(&self, g: usize) -> usize {
        self.table[g]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }
}

/// Checks `f(act_a(g, x)) = act_b(hom(g), f(x))` for every `g` and every `x`
/// in the domain of `f`. Without `hom`, both actions must share a group and
/// the identity homomorphism is used.
pub fn is_equivariant(f: &FinMap, a: &GroupAction, b: &GroupAction, hom: Option<&GroupHom>) -> bool {
    let hom_table: Vec<usize> = match hom {
        Some(h) => {
            if **h.source() != **a.group() || **h.target() != **b.group() {
                return false;
            }
            h.table().to_vec()
        }
        None => {
            if **a.group() != **b.group() {
                return false;
            }
            (0..a.group().order()).collect()
        }
    };
    let Ok(dom_idx) = f.domain().indices_in(a.carrier()) else {
        return false;
    };
    let Ok(cod_idx) = f.codomain().indices_in(b.carrier()) else {
        return false;
    };
    for (i, &x) in dom_idx.iter().enumerate() {
        let fx = cod_idx[f.apply(i)];
        for g in 0..a.group().order() {
            let gx = a.act(g, x);
            let Some(j) = f.domain().index_of(a.carrier().get(gx)) else {
                return false;
            };
            if cod_idx[f.apply(j)] != b.act(hom_table[g], fx) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> FinSet {
        FinSet::new(names.iter().copied()).unwrap()
    }

    fn swap_xy() -> GroupAction {
        let xyz = set(&["x", "y", "z"]);
        let (_, a) = FinGroup::from_permutations(&xyz, &[("s".into(), vec![1, 0, 2])]).unwrap();
        a
    }

    #[test]
    fn rejects_non_group_tables() {
        let two = set(&["a", "b"]);
        assert!(FinGroup::from_table(two.clone(), vec![vec![0, 0], vec![0, 0]]).is_err());
        assert!(FinGroup::from_table(two, vec![vec![0, 1], vec![1, 0]]).is_ok());
    }

    #[test]
    fn permutation_closure_names() {
        let pts = FinSet::numbered("p", 3);
        let (g, a) = FinGroup::from_permutations(
            &pts,
            &[("r".into(), vec![1, 2, 0]), ("s".into(), vec![1, 0, 2])],
        )
        .unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.elements().get(0), "e");
        assert_eq!(a.orbit_indices(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn orbits_trivial_and_swap() {
        let xy = set(&["x", "y"]);
        let t = GroupAction::trivial(Arc::new(FinGroup::trivial()), xy.clone());
        assert_eq!(t.orbits(&xy).unwrap(), vec![set(&["x"]), set(&["y"])]);

        let a = swap_xy();
        assert_eq!(
            a.orbits(a.carrier()).unwrap(),
            vec![set(&["x", "y"]), set(&["z"])]
        );
        assert!(matches!(a.orbits(&set(&["x"])), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn s3_left_translation_is_transitive() {
        let pts = FinSet::numbered("p", 3);
        let (g, _) = FinGroup::from_permutations(
            &pts,
            &[("r".into(), vec![1, 2, 0]), ("s".into(), vec![1, 0, 2])],
        )
        .unwrap();
        let g = Arc::new(g);
        let table = (0..6).map(|a| (0..6).map(|b| g.mul(a, b)).collect()).collect();
        let left = GroupAction::new(g.clone(), g.elements().clone(), table).unwrap();
        let orbits = left.orbits(g.elements()).unwrap();
        assert_eq!(orbits.len(), 1);
        assert_eq!(orbits[0].len(), 6);
    }

    #[test]
    fn quotient_representatives_are_least() {
        let a = swap_xy();
        let q = a.quotient_map(a.carrier()).unwrap();
        assert_eq!(q.codomain(), &set(&["x", "z"]));
        assert_eq!(q.apply_name("y"), Some("x"));
        let t = GroupAction::trivial(Arc::new(FinGroup::trivial()), set(&["u", "v"]));
        assert!(t.quotient_map(t.carrier()).unwrap().properties().injective);
    }

    #[test]
    fn invariance_reports() {
        let a = swap_xy();
        let xyz = a.carrier().clone();
        let konst = RatFn::constant(xyz.clone(), Rat::int(1));
        assert_eq!(
            a.invariance_report(&konst, &xyz),
            InvarianceReport { invariant_subset: true, invariant_fn: true, quotient_injective: false }
        );
        let f = RatFn::from_pairs(
            xyz.clone(),
            &[("x", Rat::new(1, 2).unwrap()), ("y", Rat::new(1, 2).unwrap()), ("z", Rat::int(3))],
        )
        .unwrap();
        assert!(a.invariance_report(&f, &xyz).all());
        let broken = RatFn::from_pairs(xyz.clone(), &[("x", Rat::int(1)), ("y", Rat::int(2)), ("z", Rat::int(3))]).unwrap();
        assert!(!a.invariance_report(&broken, &xyz).invariant_fn);
    }

    #[test]
    fn equivariance_of_intertwiners() {
        let (_, a) = FinGroup::from_permutations(&set(&["x", "y"]), &[("s".into(), vec![1, 0])]).unwrap();
        let (_, b) = FinGroup::from_permutations(&set(&["u", "v", "w"]), &[("s".into(), vec![1, 0, 2])]).unwrap();
        let good = FinMap::from_pairs(set(&["x", "y"]), b.carrier().clone(), &[("x", "u"), ("y", "v")]).unwrap();
        let bad = FinMap::from_pairs(set(&["x", "y"]), b.carrier().clone(), &[("x", "u"), ("y", "u")]).unwrap();
        let to_fixed = FinMap::from_pairs(set(&["x", "y"]), b.carrier().clone(), &[("x", "w"), ("y", "w")]).unwrap();
        assert!(is_equivariant(&good, &a, &b, None));
        assert!(!is_equivariant(&bad, &a, &b, None));
        assert!(is_equivariant(&to_fixed, &a, &b, None));
        assert!(is_equivariant(&FinMap::identity(a.carrier()), &a, &a, None));
    }

    #[test]
    fn maximal_subsets_with_equal_fixed_points() {
        let pq = set(&["p", "q"]);
        let a = GroupAction::trivial(Arc::new(FinGroup::trivial()), pq.clone());
        let f = RatFn::constant(pq.clone(), Rat::int(1));
        let m = a.maximal_injective_subsets(&f, &FinSet::empty());
        assert!(m.core_feasible);
        assert_eq!(m.all_maximal, vec![set(&["p"]), set(&["q"])]);
        assert_eq!(m.canonical, set(&["p"]));
        let infeasible = a.maximal_injective_subsets(&f, &pq);
        assert!(!infeasible.core_feasible);
        assert!(infeasible.all_maximal.is_empty());

        let g = RatFn::from_pairs(pq.clone(), &[("p", Rat::int(1)), ("q", Rat::int(2))]).unwrap();
        assert_eq!(a.maximal_injective_subsets(&g, &FinSet::empty()).all_maximal, vec![pq]);
    }

    #[test]
    fn homomorphism_checks() {
        let z2 = Arc::new(FinGroup::cyclic(2));
        let z4 = Arc::new(FinGroup::cyclic(4));
        // r -> r2 is a hom Z2 -> Z4
        assert!(GroupHom::new(z2.clone(), z4.clone(), vec![0, 2]).is_ok());
        assert!(GroupHom::new(z2.clone(), z4.clone(), vec![0, 1]).is_err());
        assert!(GroupHom::new(z4, z2, vec![0, 1, 0, 1]).is_ok());
    }
}
