mod checks;
mod render;
mod workspace;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use locperv::convolution::convolve;
use locperv::deformation::{perturb, specialize, Perturbation};
use locperv::fixtures::{fixture, fixture_factors, random_config, random_perv, rng, FIXTURES};
use locperv::scalar::parse_rational;
use locperv::serial::{
    config_to_json, gauss_from_json, gauss_to_json, matrix_to_json, parse, perv_from_json,
    perv_to_json, to_pretty,
};
use locperv::stokes::{ft_monodromy, stokes_data, stokes_operator};
use locperv::transport::{m_alien, transport};
use locperv::{
    gauss, AlienMethod, Frame, GaussRat, PathKind, PathSpec, QMatrix, QPerv, Rational, Sign,
};
use locperv_lefschetz::Lefschetz;

/// Stdout writes that end the process quietly when the reader goes away.
macro_rules! emit {
    ($w:ident, $($t:tt)*) => {{
        use std::io::Write as _;
        if let Err(e) = $w!(std::io::stdout().lock(), $($t)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
        }
    }};
}
macro_rules! out { ($($t:tt)*) => { emit!(write, $($t)*) }; }
macro_rules! outln { ($($t:tt)*) => { emit!(writeln, $($t)*) }; }

use checks::{run_suite, CheckResult, Context};
use workspace::{certificate_from_json, certificate_to_json, Entry, Workspace};

#[derive(Parser)]
#[command(
    name = "locperv",
    version,
    about = "Exact transport calculus for localized perverse sheaves"
)]
struct Cli {
    /// Workspace file holding named objects.
    #[arg(long, global = true, default_value = "locperv.json")]
    workspace: PathBuf,
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized checks and generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Working precision for lefschetz-gen.
    #[arg(long, global = true, default_value_t = 12)]
    precision: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameArg {
    Based,
    Direction,
}

impl From<FrameArg> for Frame {
    fn from(f: FrameArg) -> Self {
        match f {
            FrameArg::Based => Frame::Based,
            FrameArg::Direction => Frame::DirectionStalks,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ecalle,
    Subset,
}

#[derive(Subcommand)]
enum Command {
    /// Create an object from a fixture, a JSON file, random data or a skyscraper.
    New {
        name: String,
        #[arg(long, group = "source")]
        fixture: Option<String>,
        #[arg(long, group = "source")]
        file: Option<PathBuf>,
        /// Number of random points.
        #[arg(long, group = "source")]
        random: Option<usize>,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        /// Probability of placing a point on an existing line.
        #[arg(long, default_value_t = 0.5)]
        line_bias: f64,
        /// Point as "re,im".
        #[arg(long, group = "source")]
        skyscraper: Option<String>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        force: bool,
    },
    /// Names and sizes of stored objects.
    List,
    /// Points, ranks, monodromies and stored transports.
    Show { name: String },
    /// Direct sum of two objects.
    Sum {
        a: String,
        b: String,
        #[arg(long)]
        out: String,
        #[arg(long)]
        force: bool,
    },
    /// Additive convolution of two objects.
    Convolve {
        a: String,
        b: String,
        #[arg(long)]
        out: String,
        #[arg(long)]
        force: bool,
    },
    /// Transport along "i->j:WORD" or "i->j:alien".
    Transport {
        name: String,
        spec: String,
        #[arg(long, value_enum, default_value = "based")]
        frame: FrameArg,
    },
    /// Alien transport between two points.
    Alien {
        name: String,
        i: usize,
        j: usize,
        #[arg(long, value_enum, default_value = "ecalle")]
        method: MethodArg,
        #[arg(long, value_enum, default_value = "based")]
        frame: FrameArg,
    },
    /// Stokes operators at one direction "re,im", or at all of them.
    Stokes {
        name: String,
        #[arg(long)]
        dir: Option<String>,
        #[arg(long, default_value = "-")]
        sign: String,
    },
    /// Monodromy of the generic Fourier stalk.
    Ftmono {
        name: String,
        #[arg(long)]
        base: Option<String>,
    },
    /// Move the points along a displacement, keeping a crossing certificate.
    Perturb {
        name: String,
        /// JSON array of "re,im" displacements, or @FILE.
        #[arg(long)]
        displacement: String,
        #[arg(long)]
        out: String,
        #[arg(long)]
        force: bool,
    },
    /// Undo a perturbation using its certificate.
    Specialize {
        name: String,
        #[arg(long)]
        out: String,
        /// Certificate JSON or @FILE; defaults to the one stored with the object.
        #[arg(long)]
        certificate: Option<String>,
        #[arg(long)]
        force: bool,
    },
    /// Lefschetz object of a polynomial; coefficients from the leading term down to the constant.
    LefschetzGen {
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long)]
        out: String,
        #[arg(long)]
        force: bool,
    },
    /// Run the law checks on one object or on every fixture.
    Check {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        all_fixtures: bool,
    },
    /// Draw the configuration and an optional path as SVG.
    Render {
        name: String,
        out: PathBuf,
        #[arg(long)]
        path: Option<String>,
    },
}

fn inline_or_file(arg: &str) -> Result<Value> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => arg.to_string(),
    };
    Ok(parse(&text)?)
}

fn parse_point(s: &str) -> Result<GaussRat> {
    Ok(GaussRat::from_text(s)?)
}

fn parse_poly(s: &str) -> Result<Vec<Rational>> {
    let mut c = s
        .split(',')
        .map(|x| parse_rational(x.trim()))
        .collect::<locperv::Result<Vec<_>>>()?;
    c.reverse();
    Ok(c)
}

fn print_matrix(cli: &Cli, label: Value, m: &QMatrix) {
    if cli.json {
        outln!(
            "{}",
            to_pretty(&json!({ "input": label, "matrix": matrix_to_json(m) }))
        );
    } else {
        out!("{m}");
    }
}

fn kind(e: &Entry) -> &str {
    e.provenance
        .get("kind")
        .and_then(Value::as_str)
        .unwrap_or("unknown")
}

fn generate_random(n: usize, max_dim: usize, line_bias: f64, seed: u64) -> QPerv {
    let mut r = rng(seed);
    let c = random_config(&mut r, n, line_bias);
    random_perv(&mut r, c, max_dim)
}

fn lefschetz_from(provenance: &Value) -> Result<Lefschetz> {
    let poly = provenance
        .get("poly")
        .and_then(Value::as_str)
        .ok_or_else(|| anyhow!("provenance lacks the polynomial"))?;
    let precision = provenance
        .get("precision")
        .and_then(Value::as_u64)
        .ok_or_else(|| anyhow!("provenance lacks the precision"))?;
    Ok(Lefschetz::generate(&parse_poly(poly)?, precision as u32)?)
}

fn embedded(provenance: &Value, key: &str) -> Result<QPerv> {
    Ok(perv_from_json(
        provenance
            .get(key)
            .ok_or_else(|| anyhow!("provenance lacks {key:?}"))?,
    )?)
}

/// Independent descriptions recovered from an entry's recipe.
fn context_for(e: &Entry) -> Result<Context> {
    let p = &e.provenance;
    let mut ctx = Context::default();
    match kind(e) {
        "fixture" => {
            let name = p.get("name").and_then(Value::as_str).unwrap_or_default();
            ctx.recomputed = fixture(name);
            if let Some((l, r)) = fixture_factors(name) {
                let index = convolve(&l, &r)?.index;
                ctx.factors = Some((l, r, index));
            }
        }
        "random" => {
            let get = |k: &str| {
                p.get(k)
                    .and_then(Value::as_u64)
                    .ok_or_else(|| anyhow!("provenance lacks {k:?}"))
            };
            let bias = p
                .get("line_bias")
                .and_then(Value::as_f64)
                .ok_or_else(|| anyhow!("provenance lacks \"line_bias\""))?;
            ctx.recomputed = Some(generate_random(
                get("points")? as usize,
                get("max_dim")? as usize,
                bias,
                get("seed")?,
            ));
        }
        "skyscraper" => {
            let point = gauss_from_json(
                p.get("point")
                    .ok_or_else(|| anyhow!("provenance lacks \"point\""))?,
            )?;
            let dim = p.get("dim").and_then(Value::as_u64).unwrap_or(1) as usize;
            ctx.recomputed = Some(QPerv::skyscraper(point, dim)?);
        }
        "sum" => ctx.recomputed = Some(embedded(p, "left")?.direct_sum(&embedded(p, "right")?)?),
        "convolve" => {
            let (l, r) = (embedded(p, "left")?, embedded(p, "right")?);
            let c = convolve(&l, &r)?;
            ctx.recomputed = Some(c.perv);
            ctx.factors = Some((l, r, e.index.clone().unwrap_or(c.index)));
        }
        "perturb" => {
            let source = embedded(p, "source")?;
            let (cert, _) = e
                .certificate
                .as_ref()
                .ok_or_else(|| anyhow!("perturbed object lacks its certificate"))?;
            ctx.recomputed =
                Some(perturb(&source, &Perturbation::new(cert.displacement.clone()))?.0);
        }
        "specialize" => {
            let source = embedded(p, "source")?;
            let (cert, target) = certificate_from_json(
                p.get("certificate")
                    .ok_or_else(|| anyhow!("provenance lacks \"certificate\""))?,
            )?;
            ctx.recomputed = Some(specialize(&source, &target, &cert)?);
        }
        "lefschetz" => {
            let l = lefschetz_from(p)?;
            ctx.recomputed = Some(l.perv().clone());
            ctx.lefschetz = Some(l);
        }
        _ => {}
    }
    Ok(ctx)
}

fn report(cli: &Cli, results: &[(String, Vec<CheckResult>)]) -> bool {
    let pass = results
        .iter()
        .all(|(_, rs)| rs.iter().all(CheckResult::passed));
    if cli.json {
        let objects: Vec<Value> = results
            .iter()
            .map(|(name, rs)| json!({ "object": name, "checks": rs.iter().map(CheckResult::to_json).collect::<Vec<_>>() }))
            .collect();
        outln!(
            "{}",
            to_pretty(&json!({ "seed": cli.seed, "objects": objects, "pass": pass }))
        );
    } else {
        for (name, rs) in results {
            for r in rs {
                let status = if r.passed() { "PASS" } else { "FAIL" };
                outln!("{status} {name} {} ({} cases)", r.name, r.cases);
                if let Some(w) = &r.witness {
                    outln!("  witness: {w}");
                }
            }
        }
        outln!(
            "{}",
            if pass {
                "all checks passed"
            } else {
                "some checks failed"
            }
        );
    }
    pass
}

fn default_ft_base(f: &QPerv) -> Result<GaussRat> {
    (1..64)
        .flat_map(|k| {
            [
                gauss(2 * k + 1, 1),
                gauss(1, 2 * k + 1),
                gauss(-(2 * k + 1), 1),
                gauss(1, -(2 * k + 1)),
            ]
        })
        .find(|z| !f.config().is_stokes_direction(z).unwrap_or(true))
        .ok_or_else(|| anyhow!("no base direction found; pass --base"))
}

/// Ok(false) means a check failed.
fn run(cli: &Cli) -> Result<bool> {
    let path = cli.workspace.as_path();
    match &cli.command {
        Command::New {
            name,
            fixture: fx,
            file,
            random,
            max_dim,
            line_bias,
            skyscraper,
            dim,
            force,
        } => {
            let (perv, provenance) = if let Some(fx) = fx {
                (
                    fixture(fx).ok_or_else(|| {
                        anyhow!("unknown fixture {fx:?}; known: {}", FIXTURES.join(", "))
                    })?,
                    json!({ "kind": "fixture", "name": fx }),
                )
            } else if let Some(file) = file {
                let v = parse(
                    &fs::read_to_string(file)
                        .with_context(|| format!("reading {}", file.display()))?,
                )?;
                let v = v.get("perv").cloned().unwrap_or(v);
                (
                    perv_from_json(&v)?,
                    json!({ "kind": "file", "path": file.display().to_string() }),
                )
            } else if let Some(n) = random {
                if *n == 0 {
                    bail!("--random needs at least one point");
                }
                let f = generate_random(*n, *max_dim, *line_bias, cli.seed);
                (
                    f,
                    json!({ "kind": "random", "points": n, "max_dim": max_dim, "line_bias": line_bias, "seed": cli.seed }),
                )
            } else if let Some(p) = skyscraper {
                let point = parse_point(p)?;
                (
                    QPerv::skyscraper(point.clone(), *dim)?,
                    json!({ "kind": "skyscraper", "point": gauss_to_json(&point), "dim": dim }),
                )
            } else {
                bail!("new needs one of --fixture, --file, --random or --skyscraper");
            };
            update(path, name, Entry::new(perv, provenance), *force)
        }
        Command::List => {
            let w = Workspace::load(path)?;
            for (name, e) in &w.entries {
                outln!(
                    "{name}\t{} points\ttotal dim {}\t{}",
                    e.perv.len(),
                    e.perv.total_dim(),
                    kind(e)
                );
            }
            Ok(true)
        }
        Command::Show { name } => {
            let w = Workspace::load(path)?;
            let e = w.get(name)?;
            if cli.json {
                outln!("{}", to_pretty(&perv_to_json(&e.perv)));
            } else {
                let f = &e.perv;
                outln!("{name}: {} points ({})", f.len(), kind(e));
                for i in 0..f.len() {
                    outln!(
                        "point {i} at {} dim {}\nmonodromy\n{}",
                        f.point(i),
                        f.dim(i),
                        f.phi(i).monodromy()
                    );
                }
                for (&(i, j), m) in f.transports() {
                    outln!("m+ {i}->{j}\n{m}");
                }
            }
            Ok(true)
        }
        Command::Sum { a, b, out, force } => {
            let w = Workspace::load(path)?;
            let (fa, fb) = (&w.get(a)?.perv, &w.get(b)?.perv);
            let s = fa.direct_sum(fb)?;
            let prov = json!({ "kind": "sum", "names": [a, b], "left": perv_to_json(fa), "right": perv_to_json(fb) });
            update(path, out, Entry::new(s, prov), *force)
        }
        Command::Convolve { a, b, out, force } => {
            let w = Workspace::load(path)?;
            let (fa, fb) = (&w.get(a)?.perv, &w.get(b)?.perv);
            let c = convolve(fa, fb)?;
            let prov = json!({ "kind": "convolve", "names": [a, b], "left": perv_to_json(fa), "right": perv_to_json(fb) });
            let mut e = Entry::new(c.perv, prov);
            e.index = Some(c.index);
            update(path, out, e, *force)
        }
        Command::Transport { name, spec, frame } => {
            let w = Workspace::load(path)?;
            let parsed: PathSpec = spec.parse()?;
            let m = transport(&w.get(name)?.perv, &parsed, (*frame).into())?;
            print_matrix(cli, json!(spec), &m);
            Ok(true)
        }
        Command::Alien {
            name,
            i,
            j,
            method,
            frame,
        } => {
            let w = Workspace::load(path)?;
            let method = match method {
                MethodArg::Ecalle => AlienMethod::EcalleWeights,
                MethodArg::Subset => AlienMethod::SubsetSum,
            };
            let m = m_alien(&w.get(name)?.perv, *i, *j, method, (*frame).into())?;
            print_matrix(cli, json!(format!("{i}->{j}:alien")), &m);
            Ok(true)
        }
        Command::Stokes { name, dir, sign } => {
            let w = Workspace::load(path)?;
            let f = &w.get(name)?.perv;
            let sign = match sign.as_str() {
                "+" => Sign::Plus,
                "-" => Sign::Minus,
                s => bail!("sign must be + or -, got {s:?}"),
            };
            if let Some(d) = dir {
                let m = stokes_operator(f, &parse_point(d)?, sign)?;
                print_matrix(cli, json!(d), &m);
                return Ok(true);
            }
            let data = stokes_data(f)?;
            if cli.json {
                let v: Vec<Value> = data
                    .iter()
                    .map(|s| {
                        json!({
                            "direction": gauss_to_json(&s.direction),
                            "stokes": matrix_to_json(&s.operator),
                            "log": matrix_to_json(&s.log),
                            "alien": s.deltas.iter().map(|(w, d)| json!({ "difference": gauss_to_json(w), "matrix": matrix_to_json(d) })).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                outln!("{}", to_pretty(&Value::Array(v)));
            } else {
                for s in &data {
                    outln!(
                        "direction {}\nSt\n{}log St\n{}",
                        s.direction,
                        s.operator,
                        s.log
                    );
                    for (w, d) in &s.deltas {
                        outln!("alien derivation at {w}\n{d}");
                    }
                }
            }
            Ok(true)
        }
        Command::Ftmono { name, base } => {
            let w = Workspace::load(path)?;
            let f = &w.get(name)?.perv;
            let base = match base {
                Some(b) => parse_point(b)?,
                None => default_ft_base(f)?,
            };
            let m = ft_monodromy(f, &base)?;
            print_matrix(cli, gauss_to_json(&base), &m);
            Ok(true)
        }
        Command::Perturb {
            name,
            displacement,
            out,
            force,
        } => {
            let w = Workspace::load(path)?;
            let f = &w.get(name)?.perv;
            let v = inline_or_file(displacement)?;
            let d = v
                .as_array()
                .ok_or_else(|| anyhow!("displacement must be a JSON array of \"re,im\" strings"))?
                .iter()
                .map(|x| match x.as_str() {
                    Some(t) => GaussRat::from_text(t),
                    None => gauss_from_json(x),
                })
                .collect::<locperv::Result<Vec<_>>>()?;
            let (g, cert) = perturb(f, &Perturbation::new(d))?;
            outln!("{}", to_pretty(&certificate_to_json(&cert, f.config())));
            let mut e = Entry::new(
                g,
                json!({ "kind": "perturb", "names": [name], "source": perv_to_json(f) }),
            );
            e.certificate = Some((cert, f.config().clone()));
            update(path, out, e, *force)
        }
        Command::Specialize {
            name,
            out,
            certificate,
            force,
        } => {
            let w = Workspace::load(path)?;
            let entry = w.get(name)?;
            let (cert, target) = match certificate {
                Some(c) => certificate_from_json(&inline_or_file(c)?)?,
                None => entry.certificate.clone().ok_or_else(|| {
                    anyhow!("{name:?} has no stored certificate; pass --certificate")
                })?,
            };
            let g = specialize(&entry.perv, &target, &cert)?;
            let prov = json!({
                "kind": "specialize",
                "names": [name],
                "source": perv_to_json(&entry.perv),
                "certificate": certificate_to_json(&cert, &target),
            });
            update(path, out, Entry::new(g, prov), *force)
        }
        Command::LefschetzGen { poly, out, force } => {
            let l = Lefschetz::generate(&parse_poly(poly)?, cli.precision)?;
            let values: Vec<Value> = l
                .critical_values()
                .iter()
                .map(|c| json!([format!("{:.15e}", c.re), format!("{:.15e}", c.im)]))
                .collect();
            let prov = json!({
                "kind": "lefschetz",
                "poly": poly,
                "precision": l.precision(),
                "rotation": gauss_to_json(l.rotation()),
                "critical_values": values,
                "points": config_to_json(l.perv().config()),
            });
            if !cli.json {
                outln!(
                    "{} critical values at precision {}",
                    l.perv().len(),
                    l.precision()
                );
            }
            update(path, out, Entry::new(l.into_perv(), prov), *force)
        }
        Command::Check { name, all_fixtures } => {
            let mut results = Vec::new();
            if *all_fixtures {
                for fx in FIXTURES {
                    let e = Entry::new(
                        fixture(fx).expect("catalogue name"),
                        json!({ "kind": "fixture", "name": fx }),
                    );
                    results.push((
                        fx.to_string(),
                        run_suite(&e.perv, &context_for(&e)?, cli.seed),
                    ));
                }
            } else {
                let w = Workspace::load(path)?;
                let names: Vec<String> = match name {
                    Some(n) => vec![n.clone()],
                    None => w.entries.keys().cloned().collect(),
                };
                for n in names {
                    let e = w.get(&n)?;
                    results.push((n, run_suite(&e.perv, &context_for(e)?, cli.seed)));
                }
            }
            Ok(report(cli, &results))
        }
        Command::Render {
            name,
            out,
            path: spec,
        } => {
            let w = Workspace::load(path)?;
            let f = &w.get(name)?.perv;
            let spec: Option<PathSpec> = spec.as_deref().map(str::parse).transpose()?;
            if let Some(s) = &spec {
                f.check_index(s.from)?;
                f.check_index(s.to)?;
                if s.from == s.to {
                    bail!("path endpoints must differ");
                }
                if let PathKind::Word(w) = &s.kind {
                    let r = f.intermediates(s.from, s.to).len();
                    if w.len() != r {
                        bail!("sign word has length {}, expected {r}", w.len());
                    }
                }
            }
            fs::write(out, render::render(f, spec.as_ref()))
                .with_context(|| format!("writing {}", out.display()))?;
            Ok(true)
        }
    }
}

fn update(path: &Path, name: &str, entry: Entry, force: bool) -> Result<bool> {
    let mut w = Workspace::load(path)?;
    w.insert(name, entry, force)?;
    w.save(path)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
