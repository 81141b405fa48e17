//! The line-oriented instance format: parsing into a typed declaration
//! list, canonical serialization, and resolution into library values.
//!
//! The grammar is documented in `docs/INSTANCE_FORMAT.md`. Declarations
//! keep their file order; `parse(serialize(x)) == x` for every `x`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::construct::{build_class, ClassKind, FunctionalSource};
use crate::error::{Error, Result};
use crate::extension::{ContextParts, Extension, ExtensionContext, MorphismConfig, DEFAULT_BUDGET};
use crate::group::{FinGroup, GroupAction, GroupHom};
use crate::order::ExtClass;
use crate::rational::Rat;
use crate::sets::{FinMap, FinSet, RatFn};

pub type Pairs = Vec<(String, String)>;
pub type Values = Vec<(String, Rat)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupBody {
    /// Cayley table: `rows[k]` lists `elements[k] * h` for every `h` in
    /// element order.
    Table {
        elements: Vec<String>,
        identity: String,
        rows: Vec<(String, Vec<String>)>,
    },
    /// Generated by permutations of a declared set, each in cycle notation.
    Permutations {
        points: String,
        generators: Vec<(String, Vec<Vec<String>>)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassBody {
    Members(Vec<String>),
    Built {
        kind: ClassKind,
        /// Name of a functional on omega; the palette is used otherwise.
        functional: Option<String>,
        palette: Vec<Rat>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Theorem {
    A,
    B,
    C,
}

impl std::str::FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Theorem::A),
            "B" | "b" => Ok(Theorem::B),
            "C" | "c" => Ok(Theorem::C),
            _ => Err(Error::Usage(format!("unknown theorem `{s}`"))),
        }
    }
}

impl std::fmt::Display for Theorem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimDecl {
    pub name: String,
    pub theorem: Theorem,
    pub context: String,
    pub e0: Option<String>,
    pub e1: Option<String>,
    /// Labelled extended domains.
    pub index: Vec<(String, Vec<String>)>,
    pub functional: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigDecl {
    pub cfg: Option<String>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
    pub palette: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionDecl {
    pub name: String,
    pub context: String,
    pub domain: Vec<String>,
    pub functional: Values,
    pub correction_space: Vec<String>,
    pub correction: Values,
    pub delta: Pairs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextDecl {
    pub name: String,
    pub omega: String,
    pub gau_hat: String,
    pub conn_hat: String,
    pub conn: String,
    pub gau: String,
    pub xi: String,
    pub base: String,
    pub embedding: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Set {
        name: String,
        elements: Vec<String>,
        basepoint: Option<String>,
    },
    Subset {
        name: String,
        parent: String,
        elements: Vec<String>,
    },
    Group {
        name: String,
        body: GroupBody,
    },
    Action {
        name: String,
        group: String,
        carrier: String,
        natural: bool,
        /// Per group element, moved points only.
        images: Vec<(String, Pairs)>,
    },
    Hom {
        name: String,
        source: String,
        target: String,
        images: Pairs,
    },
    Functional {
        name: String,
        domain: String,
        values: Values,
    },
    Map {
        name: String,
        domain: String,
        codomain: String,
        images: Pairs,
    },
    Context(ContextDecl),
    Extension(ExtensionDecl),
    Class {
        name: String,
        context: String,
        body: ClassBody,
    },
    Claim(ClaimDecl),
    Config(ConfigDecl),
}

impl Decl {
    pub fn name(&self) -> Option<&str> {
        Some(match self {
            Decl::Set { name, .. }
            | Decl::Subset { name, .. }
            | Decl::Group { name, .. }
            | Decl::Action { name, .. }
            | Decl::Hom { name, .. }
            | Decl::Functional { name, .. }
            | Decl::Map { name, .. }
            | Decl::Class { name, .. } => name,
            Decl::Context(c) => &c.name,
            Decl::Extension(e) => &e.name,
            Decl::Claim(c) => &c.name,
            Decl::Config(_) => return None,
        })
    }
}

/// A parsed instance file: declarations in file order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InstanceFile {
    pub decls: Vec<Decl>,
}

const RESERVED: &[char] = &[',', ':', '=', '#', '[', ']', '(', ')', '|'];

pub fn is_identifier(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || RESERVED.contains(&c))
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    column: usize,
}

struct RawSection {
    kind: String,
    name: Option<String>,
    line: usize,
    entries: Vec<Entry>,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<RawSection>> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap();
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len() + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| perr(line, indent + trimmed.len(), "section header must end with `]`"))?;
            let mut words = inner.split_whitespace();
            let kind = words.next().ok_or_else(|| perr(line, indent + 1, "empty section header"))?;
            let name = words.next().map(str::to_string);
            if words.next().is_some() {
                return Err(perr(line, indent, "section header takes a kind and at most one name"));
            }
            if let Some(n) = &name {
                if !is_identifier(n) {
                    return Err(perr(line, indent, format!("invalid name `{n}`")));
                }
            }
            sections.push(RawSection {
                kind: kind.to_string(),
                name,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(perr(line, indent, "expected `key = value` or a section header"));
        };
        let key = content[..eq].trim();
        if key.is_empty() {
            return Err(perr(line, indent, "missing key"));
        }
        let value_start = eq + 1 + (content[eq + 1..].len() - content[eq + 1..].trim_start().len());
        let section = sections
            .last_mut()
            .ok_or_else(|| perr(line, indent, "entry outside of any section"))?;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(perr(line, indent, format!("duplicate key `{key}`")));
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: content[eq + 1..].trim().to_string(),
            line,
            column: value_start + 1,
        });
    }
    Ok(sections)
}

struct Fields<'a> {
    section: &'a RawSection,
    used: Vec<bool>,
}

impl<'a> Fields<'a> {
    fn new(section: &'a RawSection) -> Self {
        Fields {
            used: vec![false; section.entries.len()],
            section,
        }
    }

    fn opt(&mut self, key: &str) -> Option<&'a Entry> {
        let i = self.section.entries.iter().position(|e| e.key == key)?;
        self.used[i] = true;
        Some(&self.section.entries[i])
    }

    fn req(&mut self, key: &str) -> Result<&'a Entry> {
        self.opt(key).ok_or_else(|| {
            perr(
                self.section.line,
                1,
                format!("[{}] is missing required key `{key}`", self.section.kind),
            )
        })
    }

    /// Entries `prefix.<label>` in file order.
    fn prefixed(&mut self, prefix: &str) -> Vec<(String, &'a Entry)> {
        let mut out = Vec::new();
        for (i, e) in self.section.entries.iter().enumerate() {
            if let Some(label) = e.key.strip_prefix(prefix).and_then(|r| r.strip_prefix('.')) {
                self.used[i] = true;
                out.push((label.to_string(), e));
            }
        }
        out
    }

    fn finish(self) -> Result<()> {
        match self.used.iter().position(|u| !u) {
            Some(i) => {
                let e = &self.section.entries[i];
                Err(perr(e.line, 1, format!("unknown key `{}` in [{}]", e.key, self.section.kind)))
            }
            None => Ok(()),
        }
    }

    fn name(&self) -> Result<String> {
        self.section
            .name
            .clone()
            .ok_or_else(|| perr(self.section.line, 1, format!("[{}] needs a name", self.section.kind)))
    }
}

fn ident(e: &Entry) -> Result<String> {
    if is_identifier(&e.value) {
        Ok(e.value.clone())
    } else {
        Err(perr(e.line, e.column, format!("invalid identifier `{}`", e.value)))
    }
}

fn ident_at(s: &str, e: &Entry) -> Result<String> {
    let t = s.trim();
    if is_identifier(t) {
        Ok(t.to_string())
    } else {
        let col = e.column + e.value.find(t).unwrap_or(0);
        Err(perr(e.line, col, format!("invalid identifier `{t}`")))
    }
}

fn list(e: &Entry) -> Result<Vec<String>> {
    if e.value.is_empty() {
        return Ok(Vec::new());
    }
    e.value.split(',').map(|p| ident_at(p, e)).collect()
}

fn pairs(e: &Entry) -> Result<Pairs> {
    if e.value.is_empty() {
        return Ok(Vec::new());
    }
    e.value
        .split(',')
        .map(|p| {
            let (a, b) = p
                .split_once(':')
                .ok_or_else(|| perr(e.line, e.column, format!("expected `name:name`, found `{}`", p.trim())))?;
            Ok((ident_at(a, e)?, ident_at(b, e)?))
        })
        .collect()
}

fn rat_at(s: &str, e: &Entry) -> Result<Rat> {
    s.trim().parse::<Rat>().map_err(|_| {
        let col = e.column + e.value.find(s.trim()).unwrap_or(0);
        perr(e.line, col, format!("expected a rational `p` or `p/q`, found `{}`", s.trim()))
    })
}

fn values(e: &Entry) -> Result<Values> {
    if e.value.is_empty() {
        return Ok(Vec::new());
    }
    e.value
        .split(',')
        .map(|p| {
            let (a, b) = p
                .split_once(':')
                .ok_or_else(|| perr(e.line, e.column, format!("expected `name:rational`, found `{}`", p.trim())))?;
            Ok((ident_at(a, e)?, rat_at(b, e)?))
        })
        .collect()
}

fn rats(e: &Entry) -> Result<Vec<Rat>> {
    if e.value.is_empty() {
        return Ok(Vec::new());
    }
    e.value.split(',').map(|p| rat_at(p, e)).collect()
}

fn cycles(e: &Entry) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    let mut rest = e.value.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .and_then(|r| r.split_once(')'))
            .ok_or_else(|| perr(e.line, e.column, "expected cycles like `(a b)(c d e)`"))?;
        let cycle: Vec<String> = body.0.split_whitespace().map(|p| ident_at(p, e)).collect::<Result<_>>()?;
        if !cycle.is_empty() {
            out.push(cycle);
        }
        rest = body.1.trim_start();
    }
    Ok(out)
}

fn boolean(e: &Entry) -> Result<bool> {
    match e.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(perr(e.line, e.column, format!("expected `true` or `false`, found `{other}`"))),
    }
}

fn number(e: &Entry) -> Result<u64> {
    e.value
        .parse()
        .map_err(|_| perr(e.line, e.column, format!("expected a non-negative integer, found `{}`", e.value)))
}

fn decl_of(section: &RawSection) -> Result<Decl> {
    let mut f = Fields::new(section);
    let decl = match section.kind.as_str() {
        "set" => Decl::Set {
            name: f.name()?,
            elements: list(f.req("elements")?)?,
            basepoint: f.opt("basepoint").map(ident).transpose()?,
        },
        "subset" => Decl::Subset {
            name: f.name()?,
            parent: ident(f.req("parent")?)?,
            elements: list(f.req("elements")?)?,
        },
        "group" => {
            let name = f.name()?;
            let body = if let Some(points) = f.opt("points") {
                GroupBody::Permutations {
                    points: ident(points)?,
                    generators: f
                        .prefixed("gen")
                        .into_iter()
                        .map(|(l, e)| Ok((l, cycles(e)?)))
                        .collect::<Result<_>>()?,
                }
            } else {
                GroupBody::Table {
                    elements: list(f.req("elements")?)?,
                    identity: ident(f.req("identity")?)?,
                    rows: f
                        .prefixed("row")
                        .into_iter()
                        .map(|(l, e)| Ok((l, list(e)?)))
                        .collect::<Result<_>>()?,
                }
            };
            Decl::Group { name, body }
        }
        "action" => Decl::Action {
            name: f.name()?,
            group: ident(f.req("group")?)?,
            carrier: ident(f.req("carrier")?)?,
            natural: f.opt("natural").map(boolean).transpose()?.unwrap_or(false),
            images: f
                .prefixed("image")
                .into_iter()
                .map(|(l, e)| Ok((l, pairs(e)?)))
                .collect::<Result<_>>()?,
        },
        "hom" => Decl::Hom {
            name: f.name()?,
            source: ident(f.req("source")?)?,
            target: ident(f.req("target")?)?,
            images: pairs(f.req("images")?)?,
        },
        "functional" => Decl::Functional {
            name: f.name()?,
            domain: ident(f.req("domain")?)?,
            values: values(f.req("values")?)?,
        },
        "map" => Decl::Map {
            name: f.name()?,
            domain: ident(f.req("domain")?)?,
            codomain: ident(f.req("codomain")?)?,
            images: pairs(f.req("images")?)?,
        },
        "context" => Decl::Context(ContextDecl {
            name: f.name()?,
            omega: ident(f.req("omega")?)?,
            gau_hat: ident(f.req("gau_hat")?)?,
            conn_hat: ident(f.req("conn_hat")?)?,
            conn: ident(f.req("conn")?)?,
            gau: ident(f.req("gau")?)?,
            xi: ident(f.req("xi")?)?,
            base: ident(f.req("base")?)?,
            embedding: f.opt("embedding").map(ident).transpose()?,
        }),
        "extension" => Decl::Extension(ExtensionDecl {
            name: f.name()?,
            context: ident(f.req("context")?)?,
            domain: list(f.req("domain")?)?,
            functional: values(f.req("functional")?)?,
            correction_space: list(f.req("correction_space")?)?,
            correction: values(f.req("correction")?)?,
            delta: pairs(f.req("delta")?)?,
        }),
        "class" => {
            let name = f.name()?;
            let context = ident(f.req("context")?)?;
            let body = if let Some(m) = f.opt("members") {
                ClassBody::Members(list(m)?)
            } else {
                let k = f.req("kind")?;
                ClassBody::Built {
                    kind: k.value.parse().map_err(|_| perr(k.line, k.column, format!("unknown class kind `{}`", k.value)))?,
                    functional: f.opt("functional").map(ident).transpose()?,
                    palette: f.opt("palette").map(rats).transpose()?.unwrap_or_default(),
                }
            };
            Decl::Class { name, context, body }
        }
        "claim" => {
            let t = f.req("theorem")?;
            Decl::Claim(ClaimDecl {
                name: f.name()?,
                theorem: t.value.parse().map_err(|_| perr(t.line, t.column, format!("unknown theorem `{}`", t.value)))?,
                context: ident(f.req("context")?)?,
                e0: f.opt("e0").map(ident).transpose()?,
                e1: f.opt("e1").map(ident).transpose()?,
                index: f
                    .prefixed("index")
                    .into_iter()
                    .map(|(l, e)| Ok((l, list(e)?)))
                    .collect::<Result<_>>()?,
                functional: f.opt("functional").map(ident).transpose()?,
            })
        }
        "config" => {
            if section.name.is_some() {
                return Err(perr(section.line, 1, "[config] takes no name"));
            }
            Decl::Config(ConfigDecl {
                cfg: f.opt("cfg").map(|e| e.value.clone()),
                budget: f.opt("budget").map(number).transpose()?,
                seed: f.opt("seed").map(number).transpose()?,
                palette: f.opt("palette").map(rats).transpose()?.unwrap_or_default(),
            })
        }
        other => return Err(perr(section.line, 2, format!("unknown section kind `{other}`"))),
    };
    f.finish()?;
    Ok(decl)
}

pub fn parse_instance_str(text: &str) -> Result<InstanceFile> {
    let decls = lex(text)?.iter().map(decl_of).collect::<Result<Vec<_>>>()?;
    let mut seen = std::collections::HashSet::new();
    for d in &decls {
        if let Some(n) = d.name() {
            if !seen.insert(n) {
                return Err(Error::Resolution(format!("name `{n}` is declared twice")));
            }
        }
    }
    if decls.iter().filter(|d| matches!(d, Decl::Config(_))).count() > 1 {
        return Err(Error::Resolution("more than one [config] section".into()));
    }
    Ok(InstanceFile { decls })
}

pub fn parse_instance(path: &Path) -> Result<InstanceFile> {
    parse_instance_str(&std::fs::read_to_string(path)?)
}

fn join(items: &[String]) -> String {
    items.join(", ")
}

fn join_pairs(p: &Pairs) -> String {
    p.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(", ")
}

fn join_values(v: &Values) -> String {
    v.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(", ")
}

fn join_rats(v: &[Rat]) -> String {
    v.iter().map(Rat::to_string).collect::<Vec<_>>().join(", ")
}

/// Canonical text: one section per declaration, keys in fixed order.
pub fn serialize_instance(file: &InstanceFile) -> String {
    file.decls.iter().map(section_text).collect::<Vec<_>>().join("\n")
}

fn section_text(d: &Decl) -> String {
    let mut s = String::new();
    let header = header_of(d);
    let _ = writeln!(s, "{header}");
    let mut kv = |key: &str, value: String| {
        if value.is_empty() {
            let _ = writeln!(s, "{key} =");
        } else {
            let _ = writeln!(s, "{key} = {value}");
        }
    };
    match d {
        Decl::Set { elements, basepoint, .. } => {
            kv("elements", join(elements));
            if let Some(b) = basepoint {
                kv("basepoint", b.clone());
            }
        }
        Decl::Subset { parent, elements, .. } => {
            kv("parent", parent.clone());
            kv("elements", join(elements));
        }
        Decl::Group { body, .. } => match body {
            GroupBody::Table { elements, identity, rows } => {
                kv("elements", join(elements));
                kv("identity", identity.clone());
                for (g, row) in rows {
                    kv(&format!("row.{g}"), join(row));
                }
            }
            GroupBody::Permutations { points, generators } => {
                kv("points", points.clone());
                for (g, cyc) in generators {
                    let text: String = cyc.iter().map(|c| format!("({})", c.join(" "))).collect();
                    kv(&format!("gen.{g}"), text);
                }
            }
        },
        Decl::Action {
            group,
            carrier,
            natural,
            images,
            ..
        } => {
            kv("group", group.clone());
            kv("carrier", carrier.clone());
            if *natural {
                kv("natural", "true".into());
            }
            for (g, p) in images {
                kv(&format!("image.{g}"), join_pairs(p));
            }
        }
        Decl::Hom { source, target, images, .. } => {
            kv("source", source.clone());
            kv("target", target.clone());
            kv("images", join_pairs(images));
        }
        Decl::Functional { domain, values, .. } => {
            kv("domain", domain.clone());
            kv("values", join_values(values));
        }
        Decl::Map {
            domain, codomain, images, ..
        } => {
            kv("domain", domain.clone());
            kv("codomain", codomain.clone());
            kv("images", join_pairs(images));
        }
        Decl::Context(c) => {
            kv("omega", c.omega.clone());
            kv("gau_hat", c.gau_hat.clone());
            kv("conn_hat", c.conn_hat.clone());
            kv("conn", c.conn.clone());
            kv("gau", c.gau.clone());
            kv("xi", c.xi.clone());
            kv("base", c.base.clone());
            if let Some(e) = &c.embedding {
                kv("embedding", e.clone());
            }
        }
        Decl::Extension(e) => {
            kv("context", e.context.clone());
            kv("domain", join(&e.domain));
            kv("functional", join_values(&e.functional));
            kv("correction_space", join(&e.correction_space));
            kv("correction", join_values(&e.correction));
            kv("delta", join_pairs(&e.delta));
        }
        Decl::Class { context, body, .. } => {
            kv("context", context.clone());
            match body {
                ClassBody::Members(m) => kv("members", join(m)),
                ClassBody::Built {
                    kind,
                    functional,
                    palette,
                } => {
                    kv("kind", kind.to_string());
                    if let Some(f) = functional {
                        kv("functional", f.clone());
                    }
                    if !palette.is_empty() {
                        kv("palette", join_rats(palette));
                    }
                }
            }
        }
        Decl::Claim(c) => {
            kv("theorem", c.theorem.to_string());
            kv("context", c.context.clone());
            if let Some(e) = &c.e0 {
                kv("e0", e.clone());
            }
            if let Some(e) = &c.e1 {
                kv("e1", e.clone());
            }
            for (l, d) in &c.index {
                kv(&format!("index.{l}"), join(d));
            }
            if let Some(f) = &c.functional {
                kv("functional", f.clone());
            }
        }
        Decl::Config(c) => {
            if let Some(cfg) = &c.cfg {
                kv("cfg", cfg.clone());
            }
            if let Some(b) = c.budget {
                kv("budget", b.to_string());
            }
            if let Some(sd) = c.seed {
                kv("seed", sd.to_string());
            }
            if !c.palette.is_empty() {
                kv("palette", join_rats(&c.palette));
            }
        }
    }
    s
}

fn header_of(d: &Decl) -> String {
    match d {
        Decl::Set { name, .. } => format!("[set {name}]"),
        Decl::Subset { name, .. } => format!("[subset {name}]"),
        Decl::Group { name, .. } => format!("[group {name}]"),
        Decl::Action { name, .. } => format!("[action {name}]"),
        Decl::Hom { name, .. } => format!("[hom {name}]"),
        Decl::Functional { name, .. } => format!("[functional {name}]"),
        Decl::Map { name, .. } => format!("[map {name}]"),
        Decl::Context(c) => format!("[context {}]", c.name),
        Decl::Extension(e) => format!("[extension {}]", e.name),
        Decl::Class { name, .. } => format!("[class {name}]"),
        Decl::Claim(c) => format!("[claim {}]", c.name),
        Decl::Config(_) => "[config]".to_string(),
    }
}


/// Palette used by built classes when neither the class nor `[config]`
/// names one.
pub const DEFAULT_PALETTE: [i64; 2] = [0, 1];

/// A resolved instance: every declaration turned into a library value.
/// Classes are built on demand because their size depends on the
/// morphism configuration and budget chosen at run time.
#[derive(Debug, Clone, Default)]
pub struct Instance {
    file: InstanceFile,
    sets: HashMap<String, (FinSet, Option<String>)>,
    groups: HashMap<String, Arc<FinGroup>>,
    natural: HashMap<String, GroupAction>,
    actions: HashMap<String, GroupAction>,
    homs: HashMap<String, GroupHom>,
    functionals: HashMap<String, RatFn>,
    maps: HashMap<String, FinMap>,
    contexts: HashMap<String, Arc<ExtensionContext>>,
    extensions: HashMap<String, (String, Extension)>,
    classes: HashMap<String, (String, ClassBody)>,
    config: ConfigDecl,
}

fn res(section: &str, name: &str, e: impl std::fmt::Display) -> Error {
    Error::Resolution(format!("[{section} {name}]: {e}"))
}

fn lookup<'a, T>(table: &'a HashMap<String, T>, what: &str, name: &str) -> Result<&'a T> {
    table
        .get(name)
        .ok_or_else(|| Error::Resolution(format!("unknown {what} `{name}`")))
}

fn permutation(points: &FinSet, cycles: &[Vec<String>]) -> Result<Vec<usize>> {
    let mut perm: Vec<usize> = (0..points.len()).collect();
    for c in cycles {
        for (i, x) in c.iter().enumerate() {
            perm[points.require(x)?] = points.require(&c[(i + 1) % c.len()])?;
        }
    }
    Ok(perm)
}

impl Instance {
    /// Resolves declarations in file order; names must be declared before
    /// they are used.
    pub fn resolve(file: InstanceFile) -> Result<Self> {
        let mut inst = Instance::default();
        for d in &file.decls {
            inst.add(d)?;
        }
        inst.file = file;
        Ok(inst)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Instance::resolve(parse_instance_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Instance::resolve(parse_instance(path)?)
    }

    pub fn file(&self) -> &InstanceFile {
        &self.file
    }

    /// Hex sha256 of the canonical serialization.
    pub fn digest(&self) -> String {
        digest_of(&self.file)
    }

    pub fn config(&self) -> &ConfigDecl {
        &self.config
    }

    pub fn set(&self, name: &str) -> Result<&FinSet> {
        lookup(&self.sets, "set", name).map(|(s, _)| s)
    }

    pub fn functional(&self, name: &str) -> Result<&RatFn> {
        lookup(&self.functionals, "functional", name)
    }

    pub fn context(&self, name: &str) -> Result<&Arc<ExtensionContext>> {
        lookup(&self.contexts, "context", name)
    }

    /// The extension and the name of its context.
    pub fn extension(&self, name: &str) -> Result<(&str, &Extension)> {
        lookup(&self.extensions, "extension", name).map(|(c, e)| (c.as_str(), e))
    }

    pub fn context_names(&self) -> Vec<&str> {
        self.names_of(|d| matches!(d, Decl::Context(_)))
    }

    pub fn extension_names(&self) -> Vec<&str> {
        self.names_of(|d| matches!(d, Decl::Extension(_)))
    }

    pub fn class_names(&self) -> Vec<&str> {
        self.names_of(|d| matches!(d, Decl::Class { .. }))
    }

    /// Extensions over `context`, in file order.
    pub fn extensions_over(&self, context: &str) -> Vec<(&str, &Extension)> {
        self.extension_names()
            .into_iter()
            .filter_map(|n| {
                let (c, e) = &self.extensions[n];
                (c == context).then_some((n, e))
            })
            .collect()
    }

    pub fn claims(&self) -> Vec<&ClaimDecl> {
        self.file
            .decls
            .iter()
            .filter_map(|d| match d {
                Decl::Claim(c) => Some(c),
                _ => None,
            })
            .collect()
    }

    fn names_of(&self, keep: impl Fn(&Decl) -> bool) -> Vec<&str> {
        self.file.decls.iter().filter(|d| keep(d)).filter_map(Decl::name).collect()
    }

    /// Palette for built classes: the class's own, else `[config]`'s, else
    /// [`DEFAULT_PALETTE`].
    pub fn palette_for(&self, own: &[Rat]) -> Vec<Rat> {
        if !own.is_empty() {
            own.to_vec()
        } else if !self.config.palette.is_empty() {
            self.config.palette.clone()
        } else {
            DEFAULT_PALETTE.iter().map(|&v| Rat::int(v)).collect()
        }
    }

    /// The context name of a class and the class itself, built under `cfg`.
    pub fn class(&self, name: &str, cfg: &MorphismConfig, budget: u64) -> Result<(String, ExtClass)> {
        let (ctx_name, body) = lookup(&self.classes, "class", name)?;
        let ctx = self.context(ctx_name)?.clone();
        let class = match body {
            ClassBody::Members(m) => {
                let members = m
                    .iter()
                    .map(|n| {
                        let (c, e) = self.extension(n)?;
                        if c != ctx_name {
                            return Err(res("class", name, format!("member `{n}` lives over `{c}`, not `{ctx_name}`")));
                        }
                        Ok(e.clone())
                    })
                    .collect::<Result<Vec<_>>>()?;
                ExtClass::new(ctx, members, cfg.clone())?.with_budget(budget)
            }
            ClassBody::Built {
                kind,
                functional,
                palette,
            } => {
                let source = match functional {
                    Some(f) => FunctionalSource::Fixed(self.functional(f)?.clone()),
                    None => FunctionalSource::Palette(self.palette_for(palette)),
                };
                build_class(ctx, *kind, &source, cfg.clone(), budget)?
            }
        };
        Ok((ctx_name.clone(), class))
    }

    /// Morphism configuration from `[config]`, or strict.
    pub fn morphism_config(&self) -> Result<MorphismConfig> {
        match &self.config.cfg {
            Some(c) => c.parse(),
            None => Ok(MorphismConfig::strict()),
        }
    }

    pub fn budget(&self) -> u64 {
        self.config.budget.unwrap_or(DEFAULT_BUDGET)
    }

    fn add(&mut self, d: &Decl) -> Result<()> {
        match d {
            Decl::Set {
                name,
                elements,
                basepoint,
            } => {
                let s = FinSet::new(elements.iter().cloned()).map_err(|e| res("set", name, e))?;
                if let Some(b) = basepoint {
                    if !s.contains(b) {
                        return Err(res("set", name, format!("basepoint `{b}` is not an element")));
                    }
                }
                self.sets.insert(name.clone(), (s, basepoint.clone()));
            }
            Decl::Subset { name, parent, elements } => {
                let (p, b) = lookup(&self.sets, "set", parent)?;
                let s = p.subset(elements).map_err(|e| res("subset", name, e))?;
                let b = b.clone().filter(|b| s.contains(b));
                self.sets.insert(name.clone(), (s, b));
            }
            Decl::Group { name, body } => self.add_group(name, body)?,
            Decl::Action {
                name,
                group,
                carrier,
                natural,
                images,
            } => {
                let action = if *natural {
                    if !images.is_empty() {
                        return Err(res("action", name, "a natural action takes no images"));
                    }
                    let a = lookup(&self.natural, "permutation group", group)?;
                    if a.carrier() != self.set(carrier)? {
                        return Err(res("action", name, format!("`{group}` permutes a different set than `{carrier}`")));
                    }
                    a.clone()
                } else {
                    let g = lookup(&self.groups, "group", group)?.clone();
                    let c = self.set(carrier)?.clone();
                    let mut table: Vec<Vec<usize>> = vec![(0..c.len()).collect(); g.order()];
                    for (h, moved) in images {
                        let k = g.elements().require(h).map_err(|e| res("action", name, e))?;
                        for (x, y) in moved {
                            let (x, y) = (c.require(x), c.require(y));
                            let (x, y) = (x.map_err(|e| res("action", name, e))?, y.map_err(|e| res("action", name, e))?);
                            table[k][x] = y;
                        }
                    }
                    GroupAction::new(g, c, table).map_err(|e| res("action", name, e))?
                };
                self.actions.insert(name.clone(), action);
            }
            Decl::Hom {
                name,
                source,
                target,
                images,
            } => {
                let s = lookup(&self.groups, "group", source)?.clone();
                let t = lookup(&self.groups, "group", target)?.clone();
                // omitted elements go to the identity
                let mut table = vec![t.identity(); s.order()];
                for (a, b) in images {
                    let i = s.elements().require(a).map_err(|e| res("hom", name, e))?;
                    table[i] = t.elements().require(b).map_err(|e| res("hom", name, e))?;
                }
                let h = GroupHom::new(s, t, table).map_err(|e| res("hom", name, e))?;
                self.homs.insert(name.clone(), h);
            }
            Decl::Functional { name, domain, values } => {
                let dom = self.set(domain)?.clone();
                let f = RatFn::from_pairs(dom, values).map_err(|e| res("functional", name, e))?;
                self.functionals.insert(name.clone(), f);
            }
            Decl::Map {
                name,
                domain,
                codomain,
                images,
            } => {
                let m = FinMap::from_pairs(self.set(domain)?.clone(), self.set(codomain)?.clone(), images)
                    .map_err(|e| res("map", name, e))?;
                self.maps.insert(name.clone(), m);
            }
            Decl::Context(c) => {
                let ctx = self.build_context(c).map_err(|e| match e {
                    Error::Resolution(_) => e,
                    other => res("context", &c.name, other),
                })?;
                self.contexts.insert(c.name.clone(), Arc::new(ctx));
            }
            Decl::Extension(x) => {
                let ctx = self.context(&x.context)?.clone();
                let e = extension_of(&ctx, x).map_err(|e| res("extension", &x.name, e))?;
                self.extensions.insert(x.name.clone(), (x.context.clone(), e));
            }
            Decl::Class { name, context, body } => {
                self.context(context)?;
                if let ClassBody::Built {
                    functional: Some(f), ..
                } = body
                {
                    self.functional(f)?;
                }
                if let ClassBody::Members(m) = body {
                    for n in m {
                        self.extension(n)?;
                    }
                }
                self.classes.insert(name.clone(), (context.clone(), body.clone()));
            }
            Decl::Claim(c) => {
                let ctx = self.context(&c.context)?.clone();
                for e in c.e0.iter().chain(c.e1.iter()) {
                    if !self.classes.contains_key(e) {
                        return Err(res("claim", &c.name, format!("unknown class `{e}`")));
                    }
                }
                for (label, dom) in &c.index {
                    ctx.omega().subset(dom).map_err(|e| res("claim", &c.name, format!("index.{label}: {e}")))?;
                }
                if let Some(f) = &c.functional {
                    self.functional(f)?;
                }
            }
            Decl::Config(c) => {
                if let Some(cfg) = &c.cfg {
                    cfg.parse::<MorphismConfig>()?;
                }
                self.config = c.clone();
            }
        }
        Ok(())
    }

    fn add_group(&mut self, name: &str, body: &GroupBody) -> Result<()> {
        match body {
            GroupBody::Table {
                elements,
                identity,
                rows,
            } => {
                let els = FinSet::new(elements.iter().cloned()).map_err(|e| res("group", name, e))?;
                if els.index_of(identity) != Some(0) {
                    return Err(res("group", name, "the identity must be listed first"));
                }
                let mut mult = vec![Vec::new(); els.len()];
                for (g, row) in rows {
                    let i = els.require(g).map_err(|e| res("group", name, e))?;
                    mult[i] = row
                        .iter()
                        .map(|h| els.require(h))
                        .collect::<Result<_>>()
                        .map_err(|e| res("group", name, e))?;
                }
                let g = FinGroup::from_table(els, mult).map_err(|e| res("group", name, e))?;
                self.groups.insert(name.to_string(), Arc::new(g));
            }
            GroupBody::Permutations { points, generators } => {
                let pts = self.set(points)?.clone();
                let gens = generators
                    .iter()
                    .map(|(g, cyc)| Ok((g.clone(), permutation(&pts, cyc)?)))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| res("group", name, e))?;
                let (_, action) = FinGroup::from_permutations(&pts, &gens).map_err(|e| res("group", name, e))?;
                self.groups.insert(name.to_string(), action.group().clone());
                self.natural.insert(name.to_string(), action);
            }
        }
        Ok(())
    }

    fn build_context(&self, c: &ContextDecl) -> Result<ExtensionContext> {
        let (omega, zero) = lookup(&self.sets, "set", &c.omega)?;
        let (conn, flat) = lookup(&self.sets, "set", &c.conn)?;
        let zero = zero
            .clone()
            .ok_or_else(|| res("context", &c.name, format!("set `{}` needs a basepoint (the zero form)", c.omega)))?;
        let flat = flat
            .clone()
            .ok_or_else(|| res("context", &c.name, format!("set `{}` needs a basepoint (the flat connection)", c.conn)))?;
        ExtensionContext::new(ContextParts {
            omega: omega.clone(),
            zero,
            gau_hat: lookup(&self.actions, "action", &c.gau_hat)?.clone(),
            conn_hat: self.set(&c.conn_hat)?.clone(),
            conn: conn.clone(),
            flat,
            gau: lookup(&self.actions, "action", &c.gau)?.clone(),
            xi: lookup(&self.homs, "hom", &c.xi)?.clone(),
            base: self.functional(&c.base)?.clone(),
            embedding: c.embedding.as_ref().map(|m| lookup(&self.maps, "map", m).cloned()).transpose()?,
        })
    }
}

fn extension_of(ctx: &ExtensionContext, x: &ExtensionDecl) -> Result<Extension> {
    let domain = ctx.omega().subset(&x.domain)?;
    let functional = RatFn::from_pairs(domain.clone(), &x.functional)?;
    let c1 = ctx.omega().subset(&x.correction_space)?;
    let correction = RatFn::from_pairs(c1.clone(), &x.correction)?;
    let delta = FinMap::from_pairs(c1.clone(), ctx.conn().clone(), &x.delta)?;
    Extension::new(domain, functional, c1, correction, delta)
}

/// The declaration that reproduces `e` over the context named `context`.
pub fn extension_decl(name: &str, context: &str, e: &Extension) -> ExtensionDecl {
    ExtensionDecl {
        name: name.to_string(),
        context: context.to_string(),
        domain: e.domain().elements().to_vec(),
        functional: e.functional().pairs().map(|(a, v)| (a.to_string(), v)).collect(),
        correction_space: e.correction_space().elements().to_vec(),
        correction: e.correction().pairs().map(|(a, v)| (a.to_string(), v)).collect(),
        delta: e.delta().pairs().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
    }
}

pub fn digest_of(file: &InstanceFile) -> String {
    Sha256::digest(serialize_instance(file).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
