//! Command-line front end: every subcommand wraps one library operation
//! and produces a [`Report`].

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::construct::{
    build_class, gauge_fixings, injectivize, is_pullback_type, nested_domain_check, pullback_type_extension,
    retract_r_sigma, sigma_independence, ClassKind, FunctionalSource, GaugeFixing,
};
use crate::error::{Error, Result};
use crate::extension::{
    classify_trivial, completion, coproduct, hom_set, iso_classes, validate_extension, Extension, ExtensionContext,
    MorphismConfig,
};
use crate::generate::{generate_instances, Profile};
use crate::instance::{digest_of, serialize_instance, Instance, Theorem};
use crate::order::{
    build_preorder, coherence_check, density_check, gaunt_witness, greatest_element, incomparable_pair,
    is_antisymmetric, iso_poset, terminal_objects, CoherenceMode, EOfIReading, ExtClass, MaximalityMode,
};
use crate::rational::Rat;
use crate::report::{Format, Report, Verdict};
use crate::sets::{FinSet, RatFn};
use crate::verify::verify_theorem;

#[derive(Debug, Parser)]
#[command(name = "extcat", version, about = "Exhaustive checks on finite categories of extensions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Morphism constraints: `strict`, `lax`, or a comma list of
    /// equivariance, inclusion-square, delta-square, scalar-c, scalar-s.
    #[arg(long, global = true)]
    pub cfg: Option<String>,
    /// Enumeration budget (candidate maps per search).
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report file; for `generate`, the directory receiving instances.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `text` or `structured` (JSON).
    #[arg(long, global = true, default_value = "text")]
    pub format: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every declared extension against the extension invariants.
    Validate { instance: PathBuf },
    /// Enumerate morphisms between two declared extensions.
    Homset { instance: PathBuf, e1: String, e2: String },
    /// Iso-class order of a class, with its Hasse diagram.
    Poset { instance: PathBuf, class: String },
    /// Partition of a class into isomorphism classes.
    Isoclasses { instance: PathBuf, class: String },
    /// Members receiving exactly one morphism from every member.
    Terminal { instance: PathBuf, class: String },
    /// Whether the only isomorphisms in a class are identities.
    Gaunt { instance: PathBuf, class: String },
    /// Null, constant, identity or nontrivial type of an extension.
    TrivialClassify { instance: PathBuf, extension: String },
    /// The complete extension obtained by dropping the correction.
    Completion { instance: PathBuf, extension: String },
    /// Union of extensions whose domains meet only in the core.
    Coproduct {
        instance: PathBuf,
        #[arg(required = true)]
        extensions: Vec<String>,
    },
    /// Every section of the orbit map on extended connections.
    GaugeFixings {
        instance: PathBuf,
        #[arg(long)]
        context: Option<String>,
    },
    /// Gauge-fixed pullback extension on a domain (default: the core).
    PullbackExt {
        instance: PathBuf,
        #[arg(long)]
        context: Option<String>,
        #[arg(long, value_delimiter = ',')]
        domain: Vec<String>,
        #[arg(long, default_value = "s")]
        functional: String,
        /// Position of one gauge fixing; all of them when omitted.
        #[arg(long)]
        sigma: Option<usize>,
    },
    /// Compare the pullback loci of every pair of gauge fixings.
    SigmaIndependence {
        instance: PathBuf,
        #[arg(long)]
        context: Option<String>,
        #[arg(long, value_delimiter = ',')]
        domain: Vec<String>,
        #[arg(long, default_value = "s")]
        functional: String,
    },
    /// Largest complete injective extension under a declared one.
    Injectivize { instance: PathBuf, extension: String },
    /// Pullback-type extension on the domain of a coherent input.
    Retract {
        instance: PathBuf,
        extension: String,
        #[arg(long, default_value_t = 0)]
        sigma: usize,
    },
    /// Pullback loci of two nested domains, and the map between them.
    NestedCheck {
        instance: PathBuf,
        #[arg(long)]
        context: Option<String>,
        #[arg(long, value_delimiter = ',')]
        x0: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        x1: Vec<String>,
        #[arg(long, default_value = "s")]
        functional: String,
        #[arg(long, default_value_t = 0)]
        sigma: usize,
    },
    /// Enumerate all valid extensions of a kind.
    BuildClass {
        instance: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        context: Option<String>,
        /// A functional on omega; the palette is used otherwise.
        #[arg(long)]
        functional: Option<String>,
        #[arg(long, value_delimiter = ',')]
        palette: Vec<String>,
    },
    /// I-coherence of a class; domains come from `--domain` (repeatable,
    /// comma lists) or from a claim's index.
    Coherence {
        instance: PathBuf,
        class: String,
        #[arg(long = "domain")]
        domains: Vec<String>,
        #[arg(long)]
        claim: Option<String>,
        #[arg(long, default_value = "maximality")]
        mode: String,
        #[arg(long, default_value = "literal")]
        reading: String,
    },
    /// Does the class map into every subset joined with a candidate?
    Density {
        instance: PathBuf,
        class: String,
        /// A declared extension.
        #[arg(long)]
        candidate: String,
        #[arg(long, default_value = "maximal")]
        mode: String,
        /// Class mapped into each subset; the class itself by default.
        #[arg(long)]
        probe: Option<String>,
    },
    /// Check the claims of an instance for theorem A, B or C.
    VerifyTheorem { theorem: String, instance: PathBuf },
    /// Write seeded instances of a profile into the `--out` directory.
    Generate {
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

/// Shared state for commands that read an instance.
struct Session {
    inst: Instance,
    cfg: MorphismConfig,
    budget: u64,
}

impl Session {
    fn open(path: &Path, cli: &Cli) -> Result<Self> {
        let inst = Instance::load(path)?;
        let cfg = match &cli.cfg {
            Some(c) => c.parse()?,
            None => inst.morphism_config()?,
        };
        let budget = cli.budget.unwrap_or_else(|| inst.budget());
        Ok(Session { inst, cfg, budget })
    }

    fn context(&self, name: &Option<String>) -> Result<(String, Arc<ExtensionContext>)> {
        let n = match name {
            Some(n) => n.clone(),
            None => {
                let all = self.inst.context_names();
                match all.as_slice() {
                    [one] => one.to_string(),
                    _ => return Err(Error::Usage(format!("{} contexts declared; pass --context", all.len()))),
                }
            }
        };
        Ok((n.clone(), self.inst.context(&n)?.clone()))
    }

    fn extension(&self, name: &str) -> Result<(Arc<ExtensionContext>, &Extension)> {
        let (c, e) = self.inst.extension(name)?;
        Ok((self.inst.context(c)?.clone(), e))
    }

    fn class(&self, name: &str) -> Result<ExtClass> {
        Ok(self.inst.class(name, &self.cfg, self.budget)?.1)
    }

    fn functional(&self, name: &str, ctx: &ExtensionContext) -> Result<RatFn> {
        let f = self.inst.functional(name)?;
        if f.domain() != ctx.omega() {
            return Err(Error::Usage(format!("functional `{name}` is not defined on omega")));
        }
        Ok(f.clone())
    }
}

fn domain_or_core(ctx: &ExtensionContext, names: &[String]) -> Result<FinSet> {
    if names.is_empty() {
        Ok(ctx.core().clone())
    } else {
        ctx.omega().subset(names)
    }
}

fn fixing(ctx: &ExtensionContext, k: usize) -> Result<GaugeFixing> {
    let all = gauge_fixings(ctx)?;
    let n = all.len();
    all.into_iter()
        .nth(k)
        .ok_or_else(|| Error::Usage(format!("gauge fixing {k} out of range ({n} available)")))
}

fn member_lines(cl: &ExtClass) -> Vec<String> {
    cl.members().iter().enumerate().map(|(k, e)| format!("{k}: {e}")).collect()
}

fn matrix_lines(r: &[Vec<bool>]) -> Vec<String> {
    r.iter()
        .map(|row| row.iter().map(|&b| if b { '1' } else { '0' }).collect())
        .collect()
}

/// Text echo of the command line, as passed.
pub fn echo(args: &[String]) -> String {
    let mut parts = vec!["extcat".to_string()];
    parts.extend(args.iter().skip(1).cloned());
    parts.join(" ")
}

/// Parses `args` (program name first) and runs the command.
pub fn run_command(args: &[String]) -> (Report, Option<Cli>) {
    let mut report = Report::new(echo(args));
    match Cli::try_parse_from(args) {
        Ok(cli) => {
            if let Err(e) = dispatch(&cli, &mut report) {
                report.error("command", &e);
            }
            (report, Some(cli))
        }
        Err(e) => {
            report.check("usage", Verdict::Invalid, e.to_string().trim_end().to_string());
            (report, None)
        }
    }
}

/// Full process behaviour; returns the exit code.
pub fn main_with(args: &[String]) -> i32 {
    if let Err(e) = Cli::try_parse_from(args) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            print!("{e}");
            return 0;
        }
    }
    let (report, cli) = run_command(args);
    let format = cli
        .as_ref()
        .and_then(|c| c.format.parse::<Format>().ok())
        .unwrap_or_default();
    let text = report.render(format);
    let out = cli.as_ref().filter(|c| !matches!(c.command, Command::Generate { .. })).and_then(|c| c.out.clone());
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return 5;
            }
        }
        None => print!("{text}"),
    }
    report.exit_code()
}

fn dispatch(cli: &Cli, report: &mut Report) -> Result<()> {
    cli.format.parse::<Format>()?;
    if let Command::Generate { profile, count } = &cli.command {
        return generate(cli, profile, *count, report);
    }
    let path = match &cli.command {
        Command::Validate { instance }
        | Command::Homset { instance, .. }
        | Command::Poset { instance, .. }
        | Command::Isoclasses { instance, .. }
        | Command::Terminal { instance, .. }
        | Command::Gaunt { instance, .. }
        | Command::TrivialClassify { instance, .. }
        | Command::Completion { instance, .. }
        | Command::Coproduct { instance, .. }
        | Command::GaugeFixings { instance, .. }
        | Command::PullbackExt { instance, .. }
        | Command::SigmaIndependence { instance, .. }
        | Command::Injectivize { instance, .. }
        | Command::Retract { instance, .. }
        | Command::NestedCheck { instance, .. }
        | Command::BuildClass { instance, .. }
        | Command::Coherence { instance, .. }
        | Command::Density { instance, .. }
        | Command::VerifyTheorem { instance, .. } => instance,
        Command::Generate { .. } => unreachable!(),
    };
    let session = match Session::open(path, cli) {
        Ok(s) => s,
        Err(e) => {
            report.error("load instance", &e);
            return Ok(());
        }
    };
    report.digest = Some(session.inst.digest());
    report.data("cfg", session.cfg.to_string());
    report.data("budget", session.budget);
    run_on(cli, &session, report)
}

fn run_on(cli: &Cli, s: &Session, report: &mut Report) -> Result<()> {
    match &cli.command {
        Command::Validate { .. } => {
            for name in s.inst.extension_names() {
                let (ctx, e) = s.extension(name)?;
                let v = validate_extension(&ctx, e);
                match v.violations.first() {
                    None => report.check(format!("extension {name}"), Verdict::Confirmed, "valid"),
                    Some(first) => {
                        report.data(
                            format!("violations of {name}"),
                            v.violations.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        );
                        report.check(format!("extension {name}"), Verdict::Invalid, first.to_string())
                    }
                };
            }
            for name in s.inst.class_names() {
                match s.class(name) {
                    Ok(cl) => report.check(format!("class {name}"), Verdict::Confirmed, format!("{} members", cl.len())),
                    Err(e) => report.error(format!("class {name}"), &e),
                };
            }
            if report.checks.is_empty() {
                report.check("instance", Verdict::Confirmed, "resolves; nothing further to validate");
            }
        }
        Command::Homset { e1, e2, .. } => {
            let (ctx, a) = s.extension(e1)?;
            let (ctx2, b) = s.extension(e2)?;
            if ctx != ctx2 {
                return Err(Error::Usage(format!("`{e1}` and `{e2}` live over different contexts")));
            }
            let homs = hom_set(&ctx, a, b, &s.cfg, s.budget)?;
            report.check("hom-set size", Verdict::Info, homs.len().to_string());
            report.data("morphisms", homs.iter().map(|m| m.to_string()).collect::<Vec<_>>());
        }
        Command::Poset { class, .. } => {
            let cl = s.class(class)?;
            let pre = build_preorder(&cl)?;
            let p = iso_poset(&cl)?;
            report.data("members", member_lines(&cl));
            report.data("preorder", matrix_lines(&pre));
            report.data("iso-classes", p.classes.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>());
            report.data("hasse", p.hasse().iter().map(|(a, b)| format!("{a} < {b}")).collect::<Vec<_>>());
            let anti = is_antisymmetric(&p.leq);
            let detail = if anti {
                String::new()
            } else {
                let (a, b) = (0..p.leq.len())
                    .flat_map(|a| (0..p.leq.len()).map(move |b| (a, b)))
                    .find(|&(a, b)| a != b && p.leq[a][b] && p.leq[b][a])
                    .unwrap();
                format!("iso-classes {a} and {b} map into each other without being isomorphic")
            };
            report.check("antisymmetric", Verdict::from_holds(anti), detail);
            report.check(
                "total",
                Verdict::Info,
                match incomparable_pair(&pre) {
                    None => "yes".to_string(),
                    Some((a, b)) => format!("no: members {a} and {b} are incomparable"),
                },
            );
            report.check(
                "greatest element",
                Verdict::Info,
                match greatest_element(&p) {
                    Some(g) => format!("iso-class {g}"),
                    None => "none".to_string(),
                },
            );
        }
        Command::Isoclasses { class, .. } => {
            let cl = s.class(class)?;
            let parts = iso_classes(cl.context(), cl.members(), &s.cfg, s.budget)?;
            report.data("members", member_lines(&cl));
            report.check("iso-classes", Verdict::Info, format!("{parts:?}"));
        }
        Command::Terminal { class, .. } => {
            let cl = s.class(class)?;
            let t = terminal_objects(&cl)?;
            report.data("members", member_lines(&cl));
            report.check("terminal objects", Verdict::Info, format!("{t:?}"));
        }
        Command::Gaunt { class, .. } => {
            let cl = s.class(class)?;
            match gaunt_witness(&cl)? {
                None => report.check("gaunt", Verdict::Confirmed, "every isomorphism is an identity"),
                Some((i, j, m)) => report.check("gaunt", Verdict::Counterexample, format!("member {i} -> member {j}: {m}")),
            };
        }
        Command::TrivialClassify { extension, .. } => {
            let (ctx, e) = s.extension(extension)?;
            let c = classify_trivial(&ctx, e);
            report.check("classification", Verdict::Info, c.kind.to_string());
            if !c.identity_applicable {
                report.deviation("identity-type not tested: the context declares no embedding conn -> omega");
            }
        }
        Command::Completion { extension, .. } => {
            let (ctx, e) = s.extension(extension)?;
            let out = completion(&ctx, e)?;
            report.check("completion", Verdict::Confirmed, out.to_string());
        }
        Command::Coproduct { extensions, .. } => {
            let mut ctx = None;
            let mut family = Vec::new();
            for n in extensions {
                let (c, e) = s.extension(n)?;
                if ctx.get_or_insert_with(|| c.clone()) != &c {
                    return Err(Error::Usage("extensions live over different contexts".into()));
                }
                family.push(e.clone());
            }
            let cp = coproduct(ctx.as_ref().unwrap(), &family)?;
            report.check("coproduct", Verdict::Confirmed, cp.extension.to_string());
            report.data("injections", cp.injections.iter().map(|m| m.to_string()).collect::<Vec<_>>());
        }
        Command::GaugeFixings { context, .. } => {
            let (_, ctx) = s.context(context)?;
            let all = gauge_fixings(&ctx)?;
            report.check("gauge fixings", Verdict::Info, all.len().to_string());
            report.data("fixings", all.iter().map(|g| g.to_string()).collect::<Vec<_>>());
        }
        Command::PullbackExt {
            context,
            domain,
            functional,
            sigma,
            ..
        } => {
            let (_, ctx) = s.context(context)?;
            let x0 = domain_or_core(&ctx, domain)?;
            let f = s.functional(functional, &ctx)?.restrict(&x0.union_in(ctx.core(), ctx.omega())?)?;
            let fixings = match sigma {
                Some(k) => vec![(*k, fixing(&ctx, *k)?)],
                None => gauge_fixings(&ctx)?.into_iter().enumerate().collect(),
            };
            for (k, g) in fixings {
                let (e, w) = pullback_type_extension(&ctx, &x0, &f, &g)?;
                let valid = validate_extension(&ctx, &e);
                report.check(
                    format!("sigma {k}: decomposition"),
                    Verdict::from_holds(valid.is_valid()),
                    valid.violations.first().map(|v| v.to_string()).unwrap_or_default(),
                );
                report.data(format!("sigma {k}"), vec![format!("fixing {g}"), format!("extension {e}"), format!("pullback {}", w.pb)]);
                if !w.xi_square {
                    report.deviation(format!("sigma {k}: invariance not established (xi-square fails)"));
                }
            }
        }
        Command::SigmaIndependence {
            context,
            domain,
            functional,
            ..
        } => {
            let (_, ctx) = s.context(context)?;
            let x0 = domain_or_core(&ctx, domain)?;
            let f = s.functional(functional, &ctx)?.restrict(&x0.union_in(ctx.core(), ctx.omega())?)?;
            let r = sigma_independence(&ctx, &x0, &f)?;
            report.data("sizes", &r.sizes);
            report.check(
                "sigma independence",
                Verdict::from_holds(r.holds()),
                format!("{} fixings, {} pairs, constant size: {}", r.fixings, r.pairs.len(), r.constant),
            );
        }
        Command::Injectivize { extension, .. } => {
            let (ctx, e) = s.extension(extension)?;
            let out = injectivize(&ctx, e)?;
            let x = &out.extension;
            report.check("complete", Verdict::from_holds(x.is_complete()), "");
            report.check("injective", Verdict::from_holds(x.is_injective(&ctx)), "");
            report.check("monomorphism into input", Verdict::from_holds(out.morphism.is_monic()), out.morphism.to_string());
            if e.is_small(&ctx) {
                report.check("small preserved", Verdict::from_holds(x.is_small(&ctx)), "");
            }
            report.data("result", x.to_string());
            for d in out.deviations {
                report.deviation(d);
            }
        }
        Command::Retract { extension, sigma, .. } => {
            let (ctx, e) = s.extension(extension)?;
            let g = fixing(&ctx, *sigma)?;
            let r = retract_r_sigma(&ctx, e, &g)?;
            report.data("result", r.extension.to_string());
            report.data("mu", format!("{:?}", r.mu));
            report.check("result is pullback-type", Verdict::from_holds(is_pullback_type(&ctx, &r.extension)), "");
            if is_pullback_type(&ctx, e) {
                report.check("identity on pullback-type input", Verdict::from_holds(&r.extension == e), "");
            }
        }
        Command::NestedCheck {
            context,
            x0,
            x1,
            functional,
            sigma,
            ..
        } => {
            let (_, ctx) = s.context(context)?;
            let (a, b) = (domain_or_core(&ctx, x0)?, domain_or_core(&ctx, x1)?);
            let f = s.functional(functional, &ctx)?.restrict(&b.union_in(ctx.core(), ctx.omega())?)?;
            let v = nested_domain_check(&ctx, &a, &b, &f, &fixing(&ctx, *sigma)?)?;
            report.check(
                "nested domains",
                Verdict::from_holds(v.holds()),
                format!(
                    "contained: {}, eta injective: {}, commutes: {}, inclusion is a morphism: {}",
                    v.contained, v.eta_injective, v.commutes, v.inclusion_is_morphism
                ),
            );
        }
        Command::BuildClass {
            kind,
            context,
            functional,
            palette,
            ..
        } => {
            let (_, ctx) = s.context(context)?;
            let kind: ClassKind = kind.parse()?;
            let source = match functional {
                Some(f) => FunctionalSource::Fixed(s.functional(f, &ctx)?),
                None => {
                    let own = palette.iter().map(|v| v.parse::<Rat>()).collect::<Result<Vec<_>>>()?;
                    FunctionalSource::Palette(s.inst.palette_for(&own))
                }
            };
            let cl = build_class(ctx, kind, &source, s.cfg.clone(), s.budget)?;
            report.check(format!("{kind} members"), Verdict::Info, cl.len().to_string());
            report.data("members", member_lines(&cl));
        }
        Command::Coherence {
            class,
            domains,
            claim,
            mode,
            reading,
            ..
        } => {
            let cl = s.class(class)?;
            let index: Vec<FinSet> = match claim {
                Some(c) => {
                    let decl = s
                        .inst
                        .claims()
                        .into_iter()
                        .find(|d| &d.name == c)
                        .ok_or_else(|| Error::Usage(format!("unknown claim `{c}`")))?;
                    decl.index.iter().map(|(_, d)| cl.context().omega().subset(d)).collect::<Result<_>>()?
                }
                None => domains
                    .iter()
                    .map(|d| cl.context().omega().subset(d.split(',').map(str::trim).filter(|x| !x.is_empty())))
                    .collect::<Result<_>>()?,
            };
            let reading = match reading.as_str() {
                "literal" => EOfIReading::Literal,
                "closure" => EOfIReading::Closure,
                other => return Err(Error::Usage(format!("unknown reading `{other}`"))),
            };
            let v = coherence_check(&cl, &index, mode.parse::<CoherenceMode>()?, reading)?;
            report.data("E(I)", &v.e_of_i);
            report.data("families", v.families.len());
            report.data("initial object (empty family)", v.initial);
            if !v.empty_index_sets.is_empty() {
                report.deviation(format!("index sets without members are vacuous: {:?}", v.empty_index_sets));
            }
            report.check("coherence", Verdict::from_holds(v.holds), v.failure.unwrap_or_default());
        }
        Command::Density {
            class,
            candidate,
            mode,
            probe,
            ..
        } => {
            let cl = s.class(class)?;
            let (ctx, cand) = s.extension(candidate)?;
            if &ctx != cl.context() {
                return Err(Error::Usage("candidate lives over a different context".into()));
            }
            let probe = probe.as_ref().map(|p| s.class(p)).transpose()?;
            let v = density_check(&cl, cand, mode.parse::<MaximalityMode>()?, probe.as_ref())?;
            report.check(
                format!("density ({})", v.mode),
                Verdict::from_holds(v.holds),
                match &v.failing_subset {
                    Some(y) => format!("fails on subset {y:?}"),
                    None => format!("{} subsets", v.subsets_checked),
                },
            );
        }
        Command::VerifyTheorem { theorem, .. } => {
            let t: Theorem = theorem.parse()?;
            verify_theorem(t, &s.inst, &s.cfg, s.budget, report);
        }
        Command::Generate { .. } => unreachable!(),
    }
    Ok(())
}

fn generate(cli: &Cli, profile: &str, count: usize, report: &mut Report) -> Result<()> {
    let profile: Profile = profile.parse()?;
    let seed = cli.seed.unwrap_or(0);
    let files = generate_instances(seed, profile, count);
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
    }
    for (k, f) in files.iter().enumerate() {
        let name = format!("{profile}-{seed}-{k}.inst");
        let text = serialize_instance(f);
        match &cli.out {
            Some(dir) => {
                std::fs::write(dir.join(&name), &text)?;
                report.check(name, Verdict::Info, format!("sha256:{}", digest_of(f)));
            }
            None => {
                report.check(name.clone(), Verdict::Info, format!("sha256:{}", digest_of(f)));
                report.data(name, text);
            }
        }
    }
    Ok(())
}
