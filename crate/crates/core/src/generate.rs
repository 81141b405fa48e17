//! Seeded, desk-scale instance families.
//!
//! Bounds: |omega| ≤ 8, gauge group order ≤ 8, palettes of at most four
//! values. Outside the "conflicting-orbits" profile omega lists the zero
//! form, then the core orbits, then everything else, and the functional is
//! injective on core orbits, so injectivization never has to shrink.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{
    extension_decl, ClaimDecl, ClassBody, ConfigDecl, ContextDecl, Decl, ExtensionDecl, GroupBody, Instance,
    InstanceFile, Theorem,
};
use crate::construct::ClassKind;
use crate::extension::MorphismConfig;
use crate::rational::Rat;
use crate::verify::coherent_members;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    /// One non-core orbit with a fresh value: the Pb class is a chain.
    Chain,
    /// Complete extensions over one petal with distinct fresh values.
    Antichain,
    /// Two fixed petals with one shared fresh value.
    DisjointCore,
    /// Two fixed petals with distinct fresh values: incomparable domains.
    Incomparable,
    /// A non-core orbit listed before a core orbit of the same value.
    ConflictingOrbits,
    /// Omega is the zero form alone; under the lax configuration every
    /// member, the null extension included, is terminal.
    TerminalNull,
    /// A random context with random valid extensions, 200 declarations.
    Catalog,
}

impl Profile {
    pub const ALL: [Profile; 7] = [
        Profile::Chain,
        Profile::Antichain,
        Profile::DisjointCore,
        Profile::Incomparable,
        Profile::ConflictingOrbits,
        Profile::TerminalNull,
        Profile::Catalog,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Chain => "chain",
            Profile::Antichain => "antichain",
            Profile::DisjointCore => "disjoint-core",
            Profile::Incomparable => "incomparable",
            Profile::ConflictingOrbits => "conflicting-orbits",
            Profile::TerminalNull => "terminal-null",
            Profile::Catalog => "catalog",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown profile `{s}`")))
    }
}

/// Declarations in a generated catalog instance.
pub const CATALOG_DECLS: usize = 200;

/// Nonzero values used on core orbits; fresh values are disjoint from it.
const CORE_VALUES: [(i64, i64); 4] = [(1, 1), (2, 1), (3, 1), (1, 2)];
const FRESH_VALUES: [(i64, i64); 3] = [(5, 1), (7, 1), (9, 2)];

fn rat((n, d): (i64, i64)) -> Rat {
    Rat::new(n, d).expect("nonzero denominator")
}

/// A context sketch: omega in declaration order with the orbit structure
/// and functional values, plus conn with base values.
#[derive(Debug, Clone)]
struct Sketch {
    /// `(points, value)` per orbit; orbit 0 is the zero form.
    orbits: Vec<(Vec<String>, Rat)>,
    core: Vec<bool>,
    conn: Vec<(String, Rat)>,
}

impl Sketch {
    fn omega(&self) -> Vec<String> {
        self.orbits.iter().flat_map(|(o, _)| o.clone()).collect()
    }

    /// Core orbits other than the zero form; the zero form alone when
    /// nothing else is there, since conn_hat may not be empty.
    fn conn_hat(&self) -> Vec<String> {
        let rest: Vec<String> = self
            .orbits
            .iter()
            .zip(&self.core)
            .skip(1)
            .filter(|(_, &c)| c)
            .flat_map(|((o, _), _)| o.clone())
            .collect();
        if rest.is_empty() {
            self.orbits[0].0.clone()
        } else {
            rest
        }
    }

    fn values(&self) -> Vec<(String, Rat)> {
        self.orbits
            .iter()
            .flat_map(|(o, v)| o.iter().map(move |x| (x.clone(), *v)))
            .collect()
    }

    fn domain_with(&self, extra: &[usize]) -> Vec<String> {
        self.orbits
            .iter()
            .enumerate()
            .filter(|(k, _)| *k == 0 || self.core[*k] || extra.contains(k))
            .flat_map(|(_, (o, _))| o.clone())
            .collect()
    }

    fn decls(&self) -> Vec<Decl> {
        let omega = self.omega();
        let generators: Vec<(String, Vec<Vec<String>>)> = self
            .orbits
            .iter()
            .filter(|(o, _)| o.len() > 1)
            .enumerate()
            .map(|(k, (o, _))| (format!("g{k}"), vec![o.clone()]))
            .collect();
        let s = |x: &str| x.to_string();
        vec![
            Decl::Set {
                name: s("omega"),
                elements: omega,
                basepoint: Some(self.orbits[0].0[0].clone()),
            },
            Decl::Subset {
                name: s("conn_hat"),
                parent: s("omega"),
                elements: self.conn_hat(),
            },
            Decl::Set {
                name: s("conn"),
                elements: self.conn.iter().map(|(d, _)| d.clone()).collect(),
                basepoint: Some(self.conn[0].0.clone()),
            },
            Decl::Group {
                name: s("gauge"),
                body: GroupBody::Permutations {
                    points: s("omega"),
                    generators,
                },
            },
            Decl::Action {
                name: s("gau_hat"),
                group: s("gauge"),
                carrier: s("omega"),
                natural: true,
                images: Vec::new(),
            },
            Decl::Group {
                name: s("one"),
                body: GroupBody::Table {
                    elements: vec![s("e")],
                    identity: s("e"),
                    rows: vec![(s("e"), vec![s("e")])],
                },
            },
            Decl::Action {
                name: s("gau"),
                group: s("one"),
                carrier: s("conn"),
                natural: false,
                images: Vec::new(),
            },
            Decl::Hom {
                name: s("xi"),
                source: s("one"),
                target: s("gauge"),
                images: Vec::new(),
            },
            Decl::Functional {
                name: s("base"),
                domain: s("conn"),
                values: self.conn.clone(),
            },
            Decl::Context(ContextDecl {
                name: s("ctx"),
                omega: s("omega"),
                gau_hat: s("gau_hat"),
                conn_hat: s("conn_hat"),
                conn: s("conn"),
                gau: s("gau"),
                xi: s("xi"),
                base: s("base"),
                embedding: None,
            }),
            Decl::Functional {
                name: s("s"),
                domain: s("omega"),
                values: self.values(),
            },
        ]
    }
}

/// Random core: orbit sizes from {1, 2, 3} with group order ≤ 8, distinct
/// nonzero values per core orbit, and conn values drawn mostly from those.
/// A `rigid` core has only fixed points, so its members have no gauge
/// automorphisms.
fn random_core(rng: &mut ChaCha8Rng, max_points: usize, rigid: bool) -> Sketch {
    let mut orbits = vec![(vec!["w0".to_string()], Rat::ZERO)];
    let mut core = vec![true];
    let n_orbits = rng.gen_range(1..=3usize);
    let mut values: Vec<(i64, i64)> = CORE_VALUES.to_vec();
    values.shuffle(rng);
    let (mut order, mut points) = (1usize, 0usize);
    let mut letter = b'a';
    for k in 0..n_orbits {
        let mut size = *[1usize, 2, 2, 3].choose(rng).unwrap();
        if rigid {
            size = 1;
        }
        while size > 1 && (order * size > 8 || points + size > max_points) {
            size -= 1;
        }
        if points + size > max_points {
            break;
        }
        let names: Vec<String> = if size == 1 {
            vec![format!("{}", letter as char)]
        } else {
            (1..=size).map(|i| format!("{}{i}", letter as char)).collect()
        };
        letter += 1;
        orbits.push((names, rat(values[k])));
        core.push(true);
        order *= size.max(1);
        points += size;
    }
    let core_values: Vec<Rat> = orbits[1..].iter().map(|(_, v)| *v).collect();
    // Distinct base values keep the conn orbits embedding monically.
    let mut conn = vec![("d0".to_string(), Rat::ZERO)];
    let mut pool = core_values.clone();
    pool.shuffle(rng);
    for i in 1..=rng.gen_range(1..=2usize) {
        let v = match pool.get(i - 1) {
            Some(&v) if rng.gen_bool(0.8) => v,
            _ => Rat::int(4),
        };
        if conn.iter().any(|(_, w)| *w == v) {
            break;
        }
        conn.push((format!("d{i}"), v));
    }
    Sketch { orbits, core, conn }
}

fn orbit_points(sk: &Sketch) -> usize {
    sk.orbits.iter().map(|(o, _)| o.len()).sum()
}

fn config(seed: u64, cfg: &str) -> Decl {
    Decl::Config(ConfigDecl {
        cfg: Some(cfg.to_string()),
        budget: None,
        seed: Some(seed),
        palette: Vec::new(),
    })
}

fn built(name: &str, kind: ClassKind) -> Decl {
    Decl::Class {
        name: name.to_string(),
        context: "ctx".into(),
        body: ClassBody::Built {
            kind,
            functional: Some("s".into()),
            palette: Vec::new(),
        },
    }
}

fn members(name: &str, names: Vec<String>) -> Decl {
    Decl::Class {
        name: name.to_string(),
        context: "ctx".into(),
        body: ClassBody::Members(names),
    }
}

fn claim(name: &str, theorem: Theorem, e0: Option<&str>, e1: Option<&str>, index: Vec<(String, Vec<String>)>) -> Decl {
    Decl::Claim(ClaimDecl {
        name: name.to_string(),
        theorem,
        context: "ctx".into(),
        e0: e0.map(str::to_string),
        e1: e1.map(str::to_string),
        index,
        functional: Some("s".into()),
    })
}

/// Complete extension on `domain` with correction space `{ω₀}`.
fn bare(name: &str, sk: &Sketch, domain: Vec<String>, values: &[(String, Rat)]) -> Decl {
    Decl::Extension(ExtensionDecl {
        name: name.to_string(),
        context: "ctx".into(),
        functional: values.iter().filter(|(x, _)| domain.contains(x)).cloned().collect(),
        domain,
        correction_space: vec![sk.orbits[0].0[0].clone()],
        correction: vec![(sk.orbits[0].0[0].clone(), Rat::ZERO)],
        delta: vec![(sk.orbits[0].0[0].clone(), sk.conn[0].0.clone())],
    })
}

/// A random valid extension: invariant domain over the core, the sketch's
/// functional, a random correction space through ω₀, random delta, and the
/// correction that makes the decomposition exact.
fn random_extension(rng: &mut ChaCha8Rng, name: &str, sk: &Sketch) -> Decl {
    let extra: Vec<usize> = (1..sk.orbits.len()).filter(|&k| !sk.core[k] && rng.gen_bool(0.5)).collect();
    let domain = sk.domain_with(&extra);
    let values = sk.values();
    let functional: Vec<(String, Rat)> = values.iter().filter(|(x, _)| domain.contains(x)).cloned().collect();
    let complete = rng.gen_bool(0.5);
    let mut c1 = Vec::new();
    let mut correction = Vec::new();
    let mut delta = Vec::new();
    for (x, v) in &functional {
        let is_zero = *x == sk.orbits[0].0[0];
        if !is_zero && !rng.gen_bool(0.4) {
            continue;
        }
        let (d, b) = if is_zero {
            sk.conn[0].clone()
        } else if complete {
            match sk.conn.iter().find(|(_, b)| b == v) {
                Some(p) => p.clone(),
                None => continue,
            }
        } else {
            sk.conn.choose(rng).unwrap().clone()
        };
        c1.push(x.clone());
        correction.push((x.clone(), *v - b));
        delta.push((x.clone(), d));
    }
    Decl::Extension(ExtensionDecl {
        name: name.to_string(),
        context: "ctx".into(),
        domain,
        functional,
        correction_space: c1,
        correction,
        delta,
    })
}

fn exported_members(file: &mut InstanceFile, class: &str, prefix: &str, index: &[(String, Vec<String>)]) -> Result<()> {
    let inst = Instance::resolve(file.clone())?;
    let ctx = inst.context("ctx")?.clone();
    let s = inst.functional("s")?.clone();
    let domains = index
        .iter()
        .map(|(_, d)| ctx.omega().subset(d))
        .collect::<Result<Vec<_>>>()?;
    let cl = coherent_members(&ctx, &domains, &s, &MorphismConfig::strict(), crate::extension::DEFAULT_BUDGET)?;
    let mut names = Vec::new();
    for (k, e) in cl.members().iter().enumerate() {
        let n = format!("{prefix}{k}");
        file.decls.push(Decl::Extension(extension_decl(&n, "ctx", e)));
        names.push(n);
    }
    file.decls.push(members(class, names));
    Ok(())
}

// Class coproducts of isomorphic members need rigid members: an
// automorphism group of order k > 1 on each of two members leaves k² cocones
// to factor through hom sets of size k.
fn petals(rng: &mut ChaCha8Rng, shared: bool) -> Result<InstanceFile> {
    let mut sk = random_core(rng, 5, true);
    let mut fresh = FRESH_VALUES.to_vec();
    fresh.shuffle(rng);
    let v1 = rat(fresh[0]);
    let v2 = if shared { v1 } else { rat(fresh[1]) };
    sk.orbits.push((vec!["p1".into()], v1));
    sk.orbits.push((vec!["p2".into()], v2));
    sk.core.extend([false, false]);
    let n = sk.orbits.len();
    let index = vec![
        ("p1".to_string(), sk.domain_with(&[n - 2])),
        ("p2".to_string(), sk.domain_with(&[n - 1])),
    ];
    let mut file = InstanceFile { decls: sk.decls() };
    file.decls.push(built("pb", ClassKind::Pb));
    exported_members(&mut file, "coh", "c", &index)?;
    file.decls.push(claim("coherent", Theorem::C, None, None, index.clone()));
    file.decls.push(claim("zorn", Theorem::B, None, Some("coh"), index));
    Ok(file)
}

fn one_instance(rng: &mut ChaCha8Rng, seed: u64, profile: Profile) -> Result<InstanceFile> {
    let mut file = match profile {
        Profile::Chain => {
            let mut sk = random_core(rng, 5, false);
            let size = if orbit_points(&sk) <= 4 && rng.gen_bool(0.5) { 2 } else { 1 };
            let names = if size == 1 {
                vec!["p".to_string()]
            } else {
                vec!["p1".to_string(), "p2".to_string()]
            };
            sk.orbits.push((names, rat(*FRESH_VALUES.choose(rng).unwrap())));
            sk.core.push(false);
            let n = sk.orbits.len();
            let mut file = InstanceFile { decls: sk.decls() };
            file.decls.push(built("pb", ClassKind::Pb));
            file.decls.push(claim("coherent", Theorem::C, None, None, vec![("p".into(), sk.domain_with(&[n - 1]))]));
            file
        }
        Profile::Antichain => {
            let mut sk = random_core(rng, 5, false);
            sk.orbits.push((vec!["p".into()], rat(FRESH_VALUES[0])));
            sk.core.push(false);
            let n = sk.orbits.len();
            let domain = sk.domain_with(&[n - 1]);
            let mut file = InstanceFile { decls: sk.decls() };
            let k = rng.gen_range(2..=3usize);
            let mut names = Vec::new();
            for (i, &v) in FRESH_VALUES.iter().take(k).enumerate() {
                let mut values = sk.values();
                values.iter_mut().find(|(x, _)| x == "p").unwrap().1 = rat(v);
                let name = format!("a{i}");
                file.decls.push(bare(&name, &sk, domain.clone(), &values));
                names.push(name);
            }
            file.decls.push(members("anti", names));
            file.decls.push(claim("dense", Theorem::A, None, Some("anti"), Vec::new()));
            file
        }
        Profile::DisjointCore => petals(rng, true)?,
        Profile::Incomparable => petals(rng, false)?,
        Profile::ConflictingOrbits => {
            let mut sk = random_core(rng, 5, false);
            // q copies the value of the first core orbit and precedes it
            let clash = sk.orbits[1].1;
            sk.orbits.insert(1, (vec!["q".into()], clash));
            sk.core.insert(1, false);
            let mut file = InstanceFile { decls: sk.decls() };
            let all: Vec<usize> = (1..sk.orbits.len()).collect();
            let full = bare("full", &sk, sk.domain_with(&all), &sk.values());
            let same_body = |d: &Decl| match (d, &full) {
                (Decl::Extension(a), Decl::Extension(b)) => ExtensionDecl { name: b.name.clone(), ..a.clone() } == *b,
                _ => false,
            };
            let mut mixed = random_extension(rng, "mixed", &sk);
            while same_body(&mixed) {
                mixed = random_extension(rng, "mixed", &sk);
            }
            file.decls.push(full);
            file.decls.push(mixed);
            file.decls.push(members("given", vec!["full".into(), "mixed".into()]));
            file
        }
        Profile::TerminalNull => {
            let conn_size = rng.gen_range(2..=4usize);
            let mut vals: Vec<Rat> = CORE_VALUES.iter().map(|&v| rat(v)).collect();
            vals.shuffle(rng);
            let mut conn = vec![("d0".to_string(), Rat::ZERO)];
            conn.extend((1..conn_size).map(|i| (format!("d{i}"), vals[i - 1])));
            let sk = Sketch {
                orbits: vec![(vec!["w0".into()], Rat::ZERO)],
                core: vec![true],
                conn,
            };
            let mut file = InstanceFile { decls: sk.decls() };
            let mut names = Vec::new();
            for (k, (d, b)) in sk.conn.iter().enumerate() {
                let name = format!("t{k}");
                file.decls.push(Decl::Extension(ExtensionDecl {
                    name: name.clone(),
                    context: "ctx".into(),
                    domain: vec!["w0".into()],
                    functional: vec![("w0".into(), Rat::ZERO)],
                    correction_space: vec!["w0".into()],
                    correction: vec![("w0".into(), -*b)],
                    delta: vec![("w0".into(), d.clone())],
                }));
                names.push(name);
            }
            file.decls.push(members("all", names));
            file.decls.push(claim("dense", Theorem::A, None, Some("all"), Vec::new()));
            file.decls.push(config(seed, "lax"));
            return Ok(file);
        }
        Profile::Catalog => {
            let mut sk = random_core(rng, 6, false);
            let spare = 7 - orbit_points(&sk);
            for k in 0..spare.min(2) {
                let v = if rng.gen_bool(0.5) {
                    rat(*FRESH_VALUES.choose(rng).unwrap())
                } else {
                    sk.orbits[1].1
                };
                sk.orbits.push((vec![format!("x{k}")], v));
                sk.core.push(false);
            }
            let mut file = InstanceFile { decls: sk.decls() };
            file.decls.push(built("pb", ClassKind::Pb));
            let mut k = 0;
            while file.decls.len() < CATALOG_DECLS - 1 {
                file.decls.push(random_extension(rng, &format!("e{k}"), &sk));
                k += 1;
            }
            file
        }
    };
    file.decls.push(config(seed, "strict"));
    Ok(file)
}

/// `count` instances of `profile`, deterministic in `seed`.
pub fn generate_instances(seed: u64, profile: Profile, count: usize) -> Vec<InstanceFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| one_instance(&mut rng, seed.wrapping_add(i as u64), profile).expect("generated instances are valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::validate_extension;
    use crate::instance::{parse_instance_str, serialize_instance};

    #[test]
    fn every_profile_resolves_and_validates() {
        for p in Profile::ALL {
            for file in generate_instances(3, p, 12) {
                let inst = Instance::resolve(file.clone()).unwrap_or_else(|e| panic!("{p}: {e}"));
                let ctx = inst.context("ctx").unwrap();
                assert!(ctx.omega().len() <= 8 && ctx.gau_hat().group().order() <= 8, "{p}");
                for n in inst.extension_names() {
                    let (_, e) = inst.extension(n).unwrap();
                    assert!(validate_extension(ctx, e).is_valid(), "{p} {n}");
                }
                let cfg = inst.morphism_config().unwrap();
                for n in inst.class_names() {
                    inst.class(n, &cfg, crate::extension::DEFAULT_BUDGET).unwrap_or_else(|e| panic!("{p} {n}: {e}"));
                }
                let text = serialize_instance(&file);
                assert_eq!(parse_instance_str(&text).unwrap(), file);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a: Vec<String> = generate_instances(0, Profile::Chain, 3).iter().map(serialize_instance).collect();
        let b: Vec<String> = generate_instances(0, Profile::Chain, 3).iter().map(serialize_instance).collect();
        assert_eq!(a, b);
        let c: Vec<String> = generate_instances(1, Profile::Chain, 3).iter().map(serialize_instance).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn catalog_has_two_hundred_declarations() {
        for f in generate_instances(9, Profile::Catalog, 2) {
            assert_eq!(f.decls.len(), CATALOG_DECLS);
        }
    }
}
