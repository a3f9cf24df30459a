use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use twinbuild::affine::{self, WcCertificate};
use twinbuild::building::{Building, CheckMode, FULL_DELTA_LIMIT};
use twinbuild::isometry::{self, Isometry};
use twinbuild::paths::{self, PanelGraph, Verdict, WallOptions};
use twinbuild::report::{opposition_dot, RunReport};
use twinbuild::rgd::RgdFamily;
use twinbuild::twin::{Sign, TwinBuilding, TwinChamber};
use twinbuild::{zoo, Error};

const DEFAULT_SEED: u64 = 0x5eed_2024;
const FIXTURES_ENV: &str = "TWINBUILD_FIXTURES";

#[derive(Parser)]
#[command(
    name = "twinbuild",
    version,
    about = "Finite twin buildings, wall-connectedness and root-group checks"
)]
struct Cli {
    /// Write a JSON report to this path.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Built-in buildings and ingested rank-2 geometries.
    Zoo {
        #[command(subcommand)]
        action: ZooCmd,
    },
    /// Building and twin-building axioms.
    Axioms {
        #[command(subcommand)]
        action: AxiomsCmd,
    },
    /// Connectivity of the chambers almost opposite a chamber.
    Opp {
        #[command(subcommand)]
        action: OppCmd,
    },
    /// Wall-connectedness of a self-twin.
    Walls {
        #[command(subcommand)]
        action: WallsCmd,
    },
    /// Isometry extension and rigidity.
    Isom {
        #[command(subcommand)]
        action: IsomCmd,
    },
    /// Root-group families over finite fields.
    Rgd {
        #[command(subcommand)]
        action: RgdCmd,
    },
    /// Condition (wc) certificates for affine rank-3 types.
    Affine {
        #[command(subcommand)]
        action: AffineCmd,
    },
}

#[derive(Subcommand)]
enum ZooCmd {
    /// List the built-in buildings.
    List,
    /// Counts for one building.
    Show {
        name: String,
        /// Print the chamber table.
        #[arg(long)]
        dump: bool,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Validate an incidence file and build its flag building.
    Ingest {
        file: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AxiomsCmd {
    /// Check (Bu1)–(Bu3), or (Tw1)–(Tw3) of the self-twin with `--twin`.
    Check {
        /// A zoo name or an incidence file.
        name: String,
        #[arg(long)]
        twin: bool,
        /// Samples for buildings too large for an exhaustive check.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Plus,
    Minus,
}

impl From<Side> for Sign {
    fn from(s: Side) -> Sign {
        match s {
            Side::Plus => Sign::Plus,
            Side::Minus => Sign::Minus,
        }
    }
}

#[derive(Subcommand)]
enum OppCmd {
    /// Whether `{ d | ℓ*(c, d) ≤ k }` is connected.
    Check {
        name: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        chamber: u32,
        #[arg(long, value_enum, default_value = "plus")]
        side: Side,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum WallsCmd {
    /// Build and verify the graphs Γ_s(c).
    Check {
        name: String,
        /// Restrict to one chamber.
        #[arg(long)]
        chamber: Option<u32>,
        #[arg(long, value_enum, default_value = "plus")]
        side: Side,
        /// Restrict to one generator (1-based).
        #[arg(long)]
        gen: Option<usize>,
        /// Maximum path length searched.
        #[arg(long)]
        bound: Option<usize>,
        /// Every chamber instead of one per automorphism orbit.
        #[arg(long)]
        all: bool,
        /// Write Γ_s(c) as DOT; needs `--chamber` and `--gen`.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum IsomCmd {
    /// Extend a plus-half isometry (or an E_2 germ) with one minus pair.
    Extend {
        name: String,
        #[arg(long)]
        map: PathBuf,
        /// Write the extended map as text.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether fixing E_1(c+) and one opposite chamber forces the identity.
    Rigidity {
        name: String,
        #[arg(long, default_value_t = 0)]
        chamber: u32,
    },
}

#[derive(Subcommand)]
enum RgdCmd {
    /// Validate a built-in family or a family file.
    Check { family: String },
}

#[derive(Subcommand)]
enum AffineCmd {
    /// Generate and verify certificates.
    Cert {
        #[arg(value_name = "TYPE")]
        affine_type: String,
        #[arg(long, default_value_t = affine::DEFAULT_DEPTH)]
        depth: usize,
        /// Only this generator (1-based).
        #[arg(long)]
        gen: Option<usize>,
        /// Write the certificates as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify certificates from a JSON file.
    Verify { path: PathBuf },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(Error::Domain(_) | Error::Unsupported(_)) => 2,
            CliError::Lib(Error::Structural(_)) => 1,
            CliError::Lib(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Looks a relative path up in the fixture directory when it does not exist.
fn resolve(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(FIXTURES_ENV) {
        Some(dir) if Path::new(&dir).join(path).exists() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn load_building(name: &str) -> CliResult<Building> {
    if name.ends_with(".inc") {
        return Ok(zoo::ingest_rank2_geometry(&resolve(Path::new(name)))?);
    }
    Ok(zoo::build(name)?.building)
}

fn load_twin(name: &str) -> CliResult<TwinBuilding> {
    Ok(TwinBuilding::self_twin(Arc::new(load_building(name)?))?)
}

fn generator(gen: Option<usize>, rank: usize) -> CliResult<Option<usize>> {
    match gen {
        None => Ok(None),
        Some(g) if (1..=rank).contains(&g) => Ok(Some(g - 1)),
        Some(g) => Err(CliError::Usage(format!("--gen {g} is not in 1..={rank}"))),
    }
}

fn chamber(c: u32, n: usize) -> CliResult<u32> {
    if (c as usize) < n {
        Ok(c)
    } else {
        Err(CliError::Usage(format!(
            "chamber {c} is out of range 0..{n}"
        )))
    }
}

fn mode(n: usize, samples: usize, seed: u64) -> CheckMode {
    if n <= FULL_DELTA_LIMIT {
        CheckMode::Exhaustive
    } else {
        CheckMode::Sampled { samples, seed }
    }
}

fn run(cli: &Cli, rep: &mut RunReport) -> CliResult<()> {
    rep.config("seed", cli.seed);
    match &cli.cmd {
        Command::Zoo { action } => match action {
            ZooCmd::List => {
                for name in zoo::ZOO_NAMES {
                    let b = zoo::build(name)?.building;
                    let panels: Vec<usize> = (0..b.rank()).map(|s| b.num_panels(s)).collect();
                    println!(
                        "{name:6} type {:3} chambers {:5} panels {panels:?}",
                        b.system().matrix().name().unwrap_or("?"),
                        b.num_chambers()
                    );
                    rep.check(
                        *name,
                        b.is_thick(),
                        json!({"chambers": b.num_chambers(), "panels": panels}),
                    );
                }
            }
            ZooCmd::Show { name, dump, dot } => {
                let b = load_building(name)?;
                let panels: Vec<usize> = (0..b.rank()).map(|s| b.num_panels(s)).collect();
                println!(
                    "{}: {} chambers, panels per type {panels:?}, diameter {:?}",
                    b.name(),
                    b.num_chambers(),
                    b.diameter()
                );
                if *dump {
                    print!("{}", b.dump());
                }
                if let Some(p) = dot {
                    fs::write(p, b.to_dot())?;
                }
                rep.check(
                    "built",
                    true,
                    json!({"chambers": b.num_chambers(), "panels": panels}),
                );
            }
            ZooCmd::Ingest { file, dot } => {
                let b = zoo::ingest_rank2_geometry(&resolve(file))?;
                let ax = b.check_axioms(CheckMode::Exhaustive);
                println!(
                    "{}: type {}, {} chambers, axioms {}",
                    b.name(),
                    b.system().matrix().name().unwrap_or("?"),
                    b.num_chambers(),
                    if ax.passed() { "pass" } else { "FAIL" }
                );
                if let Some(p) = dot {
                    fs::write(p, b.to_dot())?;
                }
                rep.check("axioms", ax.passed(), &ax);
            }
        },
        Command::Axioms {
            action:
                AxiomsCmd::Check {
                    name,
                    twin,
                    samples,
                },
        } => {
            rep.config("samples", samples);
            if *twin {
                let t = load_twin(name)?;
                let ax = t.check_tw_axioms(mode(t.num_chambers(), *samples, cli.seed));
                println!(
                    "{name}: (Tw1)–(Tw3) {} ({} checks)",
                    if ax.passed() { "pass" } else { "FAIL" },
                    ax.checked
                );
                for v in &ax.violations {
                    println!("  {v}");
                }
                rep.check("twin axioms", ax.passed(), &ax);
            } else {
                let b = load_building(name)?;
                let ax = b.check_axioms(mode(b.num_chambers(), *samples, cli.seed));
                println!(
                    "{name}: (Bu1)–(Bu3) {} ({} checks)",
                    if ax.passed() { "pass" } else { "FAIL" },
                    ax.checked
                );
                for v in &ax.violations {
                    println!("  {v}");
                }
                rep.check("building axioms", ax.passed(), &ax);
            }
        }
        Command::Opp {
            action:
                OppCmd::Check {
                    name,
                    k,
                    chamber: c,
                    side,
                    dot,
                },
        } => {
            rep.config("k", k);
            let t = load_twin(name)?;
            let c = TwinChamber {
                sign: (*side).into(),
                id: chamber(*c, t.num_chambers())?,
            };
            let g = t.opposition_graph(c, *k)?;
            let sizes: Vec<usize> = g.components.iter().map(Vec::len).collect();
            println!(
                "{name}: c^op({k}) of {c} has {} chambers in {} component(s) {sizes:?}",
                g.vertices.len(),
                g.components.len()
            );
            if !g.is_connected() {
                for (i, comp) in g.components.iter().enumerate() {
                    println!("  component {i}: {comp:?}");
                }
            }
            if let Some(p) = dot {
                fs::write(p, opposition_dot(&t, &g))?;
            }
            rep.check(
                "connected",
                g.is_connected(),
                json!({"center": c, "vertices": g.vertices.len(), "components": g.components}),
            );
        }
        Command::Walls {
            action:
                WallsCmd::Check {
                    name,
                    chamber: c,
                    side,
                    gen,
                    bound,
                    all,
                    dot,
                },
        } => {
            let t = load_twin(name)?;
            let only_gen = generator(*gen, t.rank())?;
            let only_chamber = match c {
                Some(c) => Some(TwinChamber {
                    sign: (*side).into(),
                    id: chamber(*c, t.num_chambers())?,
                }),
                None => None,
            };
            let opts = WallOptions {
                bound: *bound,
                all: *all,
                only_chamber,
                only_gen,
            };
            let wr = paths::is_wall_connected(&t, &opts)?;
            rep.config("bound", wr.bound);
            rep.config("transversal", wr.transversal);
            for p in &wr.pairs {
                let status = if !p.certificate_violations.is_empty() {
                    "CERTIFICATE FAILURE".to_string()
                } else if p.connected {
                    "connected".to_string()
                } else if p.exhaustive {
                    format!("disconnected ({} components)", p.components)
                } else {
                    format!(
                        "{} components; no edge found (bound {})",
                        p.components, wr.bound
                    )
                };
                println!(
                    "Γ_s{}({}): {} vertices, {} edges, {status}",
                    p.s + 1,
                    p.center,
                    p.vertices,
                    p.edges
                );
            }
            println!("{name}: verdict {:?}", wr.verdict);
            if let Some(path) = dot {
                let (Some(c), Some(s)) = (only_chamber, only_gen) else {
                    return Err(CliError::Usage("--dot needs --chamber and --gen".into()));
                };
                let g = PanelGraph::build(&t, c.sign.flip())?;
                fs::write(path, paths::wall_graph(&g, c, s, wr.bound)?.to_dot())?;
            }
            rep.check("wall-connected", wr.verdict == Verdict::Pass, &wr);
        }
        Command::Isom { action } => match action {
            IsomCmd::Extend { name, map, out } => {
                let t = load_twin(name)?;
                let text = fs::read_to_string(resolve(map))?;
                let given = Isometry::parse(&text, t.num_chambers())?;
                let phi = if given.is_total_on(Sign::Plus) {
                    let minus: Vec<TwinChamber> = given
                        .domain()
                        .iter()
                        .copied()
                        .filter(|x| x.sign == Sign::Minus)
                        .collect();
                    let [cm] = minus.as_slice() else {
                        return Err(CliError::Lib(Error::Validation(
                            "the map needs exactly one minus pair".into(),
                        )));
                    };
                    let cm2 = given.get(*cm).expect("in domain");
                    isometry::extend_to_minus(&t, &t, &given, cm.id, cm2.id)?
                } else {
                    isometry::extend_germ(&t, &t, &given)?
                };
                let violations = isometry::check_isometry(&t, &t, &phi);
                println!(
                    "{name}: extended to {} chambers; isometry check {}",
                    phi.len(),
                    if violations.is_empty() {
                        "pass"
                    } else {
                        "FAIL"
                    }
                );
                if let Some(p) = out {
                    fs::write(p, phi.to_text())?;
                }
                rep.check(
                    "extension is an isometry",
                    violations.is_empty(),
                    json!({"chambers": phi.len(), "violations": violations}),
                );
            }
            IsomCmd::Rigidity { name, chamber: c } => {
                let t = load_twin(name)?;
                let c = chamber(*c, t.num_chambers())?;
                let mut fixed: Vec<TwinChamber> = t
                    .building()
                    .e_k_neighborhood(c, 1)?
                    .into_iter()
                    .map(TwinChamber::plus)
                    .collect();
                let opp = t.opposite(TwinChamber::plus(c))[0];
                fixed.push(TwinChamber::minus(opp));
                let found =
                    isometry::isometry_extensions(&t, &t, &isometry::identity_on(&t, &fixed), 2)?;
                let identity = found.len() == 1
                    && Sign::both().iter().all(|&s| {
                        found[0]
                            .half(s)
                            .is_some_and(|h| h.iter().enumerate().all(|(i, &y)| i as u32 == y))
                    });
                println!(
                    "{name}: isometries fixing E_1(+{c}) and -{opp}: {}{}",
                    found.len(),
                    if identity { " (the identity)" } else { "" }
                );
                rep.check(
                    "rigid",
                    identity,
                    json!({"chamber": c, "opposite": opp, "extensions": found.len()}),
                );
            }
        },
        Command::Rgd {
            action: RgdCmd::Check { family },
        } => {
            let f = match RgdFamily::builtin(family) {
                Ok(f) => f,
                Err(Error::Domain(_)) if Path::new(family).extension().is_some() => {
                    RgdFamily::parse(&fs::read_to_string(resolve(Path::new(family)))?)?
                }
                Err(e) => return Err(e.into()),
            };
            let ax = f.validate()?;
            for c in &ax.checks {
                println!(
                    "{}: {}: {}",
                    c.axiom,
                    if c.passed { "pass" } else { "FAIL" },
                    c.detail
                );
                rep.check(c.axiom.clone(), c.passed, &c.detail);
            }
            let circle = f.circle()?;
            let (two_n, n) = (circle.len(), circle.len() / 2);
            let mut failures = Vec::new();
            let mut count = 0;
            for i in 1..=two_n {
                for k in i + 1..=i + n - 2 {
                    count += 1;
                    match f.commutator_projection(i, k) {
                        Ok(p) if p.as_slice() == f.subgroup(circle[(k - 1) % two_n]) => {}
                        Ok(_) => failures.push(format!("[U_{i}, U_{}]_{k} ≠ U_{k}", i + n - 1)),
                        Err(e) => failures.push(e.to_string()),
                    }
                }
            }
            println!(
                "commutator projections: {count} cases, {} failures",
                failures.len()
            );
            rep.check(
                "commutator projections",
                failures.is_empty(),
                json!({"cases": count, "failures": failures}),
            );
            let mut wc = Vec::new();
            for s in 0..f.system.rank() {
                for side in Sign::both() {
                    wc.push(f.check_wc_generation(s, side)?);
                }
            }
            let wc_ok = wc.iter().all(|r| r.equal);
            println!("(wc): {}", if wc_ok { "pass" } else { "FAIL" });
            rep.check("wc generation", wc_ok, &wc);
            let fb = zoo::build(&f.building)?;
            for side in Sign::both() {
                let tr = f.simply_transitive_check(&fb, side)?;
                println!(
                    "U_{side} on chambers opposite c_{side}: |U| = {}, opposite = {}, {}",
                    tr.group_order,
                    tr.opposite,
                    if tr.passed() {
                        "simply transitive"
                    } else {
                        "NOT simply transitive"
                    }
                );
                rep.check(format!("simply transitive {side}"), tr.passed(), &tr);
            }
        }
        Command::Affine { action } => match action {
            AffineCmd::Cert {
                affine_type,
                depth,
                gen,
                out,
            } => {
                rep.config("depth", depth);
                let gens: Vec<usize> = match generator(*gen, 3)? {
                    Some(s) => vec![s],
                    None => (0..3).collect(),
                };
                let mut certs = Vec::new();
                for s in gens {
                    let o = affine::generate_certificate(affine_type, s, *depth)?;
                    let v = affine::verify_certificate(&o.certificate);
                    let ok = o.failures.is_empty() && v.accepted;
                    println!(
                        "{affine_type} s{}: {} entries, {} failures, verifier {}",
                        s + 1,
                        o.certificate.entries.len(),
                        o.failures.len(),
                        if v.accepted { "accepts" } else { "rejects" }
                    );
                    rep.check(
                        format!("certificate s{}", s + 1),
                        ok,
                        json!({"entries": o.certificate.entries.len(), "failures": o.failures, "problems": v.problems}),
                    );
                    certs.push(o.certificate);
                }
                if let Some(p) = out {
                    fs::write(
                        p,
                        serde_json::to_string_pretty(&certs).expect("serializable"),
                    )?;
                }
            }
            AffineCmd::Verify { path } => {
                let text = fs::read_to_string(resolve(path))?;
                let certs: Vec<WcCertificate> = serde_json::from_str::<Vec<WcCertificate>>(&text)
                    .or_else(|_| serde_json::from_str::<WcCertificate>(&text).map(|c| vec![c]))
                    .map_err(|e| Error::Parse {
                        line: e.line(),
                        msg: e.to_string(),
                    })?;
                for c in &certs {
                    let v = affine::verify_certificate(c);
                    println!(
                        "{} s{} depth {}: {} entries, {}",
                        c.affine_type,
                        c.s + 1,
                        c.depth,
                        v.entries,
                        if v.accepted { "accepted" } else { "REJECTED" }
                    );
                    for p in v.problems.iter().take(10) {
                        println!("  {p}");
                    }
                    rep.check(format!("{} s{}", c.affine_type, c.s + 1), v.accepted, &v);
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut rep = RunReport::new(std::env::args().skip(1).collect());
    let start = Instant::now();
    let result = run(&cli, &mut rep);
    eprintln!("elapsed {:.2?}", start.elapsed());
    let code = match result {
        Ok(()) => u8::from(!rep.passed),
        Err(e) => {
            eprintln!("error: {e}");
            rep.check("run", false, e.to_string());
            e.exit_code()
        }
    };
    if let Some(path) = &cli.json {
        if let Err(e) = fs::write(path, rep.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(3);
        }
    }
    ExitCode::from(code)
}
