//! `spherepack` command-line front end.
//!
//! Exit codes: 0 on success, 1 on a domain error, 2 on a usage error.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spherepack::density::{
    asymptotic_density, density_profile, is_regular_consistent, linear_grid, regularity_defect, AsymptoticEstimate,
    DensityMethod, DensityProfile, DEFAULT_TAIL_FRACTION,
};
use spherepack::format::{packing_to_string, read_packing_file};
use spherepack::marcin::{mdist_with, SymdiffMethod, DEFAULT_SAMPLES};
use spherepack::metrics::{default_radii, hausdorff_window, metric_D_lower, metric_d_lower, pairing, ConeProbe, ProbeBudget};
use spherepack::saturate::{
    m_saturation_check_with, saturate_greedy_with, HoleOptions, HoleStatus, DEFAULT_BUDGET,
    DEFAULT_MAX_DEPTH, DEFAULT_PITCH,
};
use spherepack::splice::{build_splice, select_schedule, verify_splice, DEFAULT_GROWTH};
use spherepack::{gen_lattice, gen_rsa, Lattice, Point, UdSet};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl From<spherepack::Error> for CliError {
    fn from(e: spherepack::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "spherepack", version, about = "Densities, distances, splices and saturation of equal-sphere packings")]
struct Cli {
    /// Write the main output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed of the ChaCha8 generator; required by every randomized path (u64).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum number of worker threads (>= 1; default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// File of `key=value` lines supplying defaults for the subcommand options.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a lattice window or a random sequential adsorption packing.
    Gen(GenArgs),
    /// Density profile and tail estimate of a packing (CSV).
    Density(DensityArgs),
    /// Marcinkiewicz distance profile between two packings (CSV).
    Mdist(MdistArgs),
    /// Outer-shell mass profile `vol(∪B ∩ (tB \ (t-l)B)) / vol(tB)` (CSV).
    Regularity(RegularityArgs),
    /// Splice a sequence of packings listed in a manifest.
    Splice(SpliceArgs),
    /// Lower bounds on the probe metrics d and D.
    Metric(MetricArgs),
    /// Pointwise pairing between two packings around a center (CSV).
    Pair(PairArgs),
    /// Greedily insert balls until no hole is left in a region.
    Saturate(SaturateArgs),
    /// Check local m-saturation (m in 1..=3) in a region.
    Msat(MsatArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Lattice name: Z<n>, hex, fcc or d4. Exclusive with --rsa.
    #[arg(long, conflicts_with = "rsa")]
    lattice: Option<String>,
    /// Random sequential adsorption in dimension --dim (needs --seed).
    #[arg(long)]
    rsa: bool,
    /// Dimension for --rsa (>= 1).
    #[arg(long)]
    dim: Option<usize>,
    /// Window radius R_w (>= 0).
    #[arg(long)]
    window: Option<f64>,
    /// Lattice scale factor (>= 1); the lattice is rescaled to minimum distance 1 first.
    #[arg(long)]
    scale: Option<f64>,
    /// Translation applied after generation, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    shift: Option<String>,
    /// RSA stops after this many consecutive rejected candidates (>= 1).
    #[arg(long)]
    max_failures: Option<usize>,
}

#[derive(Args, Debug)]
struct DensityArgs {
    /// UDPACK file.
    input: PathBuf,
    /// Radii `start:stop:step`, all positive and at most R_w.
    #[arg(long)]
    grid: Option<String>,
    /// counting, volumetric or montecarlo (montecarlo needs --seed).
    #[arg(long)]
    method: Option<String>,
    /// Marcinkiewicz exponent p (>= 1).
    #[arg(long)]
    p: Option<f64>,
    /// Monte Carlo samples per radius (>= 2).
    #[arg(long)]
    samples: Option<usize>,
    /// Fraction of the grid used by the tail estimate, in (0, 1].
    #[arg(long)]
    tail_fraction: Option<f64>,
}

#[derive(Args, Debug)]
struct MdistArgs {
    /// First UDPACK file.
    a: PathBuf,
    /// Second UDPACK file.
    b: PathBuf,
    /// Radii `start:stop:step`, at most min(R_w) - 1/2.
    #[arg(long)]
    grid: Option<String>,
    /// exact, exact-pairing, planar-exact or montecarlo (montecarlo needs --seed).
    #[arg(long)]
    method: Option<String>,
    /// Exponent p (>= 1).
    #[arg(long)]
    p: Option<f64>,
    /// Monte Carlo samples per radius (>= 2).
    #[arg(long)]
    samples: Option<usize>,
    /// Fraction of the grid used by the tail estimate, in (0, 1].
    #[arg(long)]
    tail_fraction: Option<f64>,
    /// Tail convergence tolerance (> 0).
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args, Debug)]
struct RegularityArgs {
    /// UDPACK file.
    input: PathBuf,
    /// Shell width l (> 0).
    #[arg(long)]
    l: Option<f64>,
    /// Radii `start:stop:step`, each >= l and at most R_w - 1/2.
    #[arg(long)]
    grid: Option<String>,
    /// Tail tolerance for the consistency verdict (> 0).
    #[arg(long)]
    tol: Option<f64>,
    /// Fraction of the grid used by the verdict, in (0, 1].
    #[arg(long)]
    tail_fraction: Option<f64>,
}

#[derive(Args, Debug)]
struct SpliceArgs {
    /// Manifest: one UDPACK path per line, in sequence order; relative paths
    /// are resolved against the manifest's directory.
    manifest: PathBuf,
    /// Candidate radii and certificate resolution, `start:stop:step`.
    #[arg(long)]
    grid: Option<String>,
    /// Number of annuli (>= 1).
    #[arg(long)]
    depth: Option<usize>,
    /// Growth factor a (> 1); λ_{i+1} > a·λ_i.
    #[arg(long)]
    growth: Option<f64>,
    /// Exponent p (>= 1).
    #[arg(long)]
    p: Option<f64>,
    /// exact, exact-pairing, planar-exact or montecarlo (montecarlo needs --seed).
    #[arg(long)]
    method: Option<String>,
    /// Monte Carlo samples per radius (>= 2).
    #[arg(long)]
    samples: Option<usize>,
    /// Write the schedule and verification report here (default: stderr).
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricArgs {
    /// First UDPACK file.
    a: PathBuf,
    /// Second UDPACK file.
    b: PathBuf,
    /// d (frame at the origin) or D (supremum over shifts at the points).
    #[arg(long)]
    kind: Option<String>,
    /// Probe radii in (0, 1/2), comma separated.
    #[arg(long)]
    radii: Option<String>,
    /// Only points within this distance of the frame origin serve as α (>= 0).
    #[arg(long)]
    alpha_radius: Option<f64>,
    /// Only shifts within this distance of the origin are tried (>= 0).
    #[arg(long)]
    x_radius: Option<f64>,
    /// Upper limit on α candidates × probe centers per frame.
    #[arg(long)]
    max_work: Option<usize>,
    /// Also report the Hausdorff distance of the points within this radius (>= 0).
    #[arg(long)]
    hausdorff: Option<f64>,
}

#[derive(Args, Debug)]
struct PairArgs {
    /// First UDPACK file.
    a: PathBuf,
    /// Second UDPACK file.
    b: PathBuf,
    /// Center x, comma separated (default: the origin).
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Pairing accuracy ε in (0, 1).
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args, Debug)]
struct HoleArgs {
    /// Top-level cell side, in (0, 1].
    #[arg(long)]
    pitch: Option<f64>,
    /// Maximum number of cell halvings.
    #[arg(long)]
    max_depth: Option<u32>,
    /// Maximum number of clearance evaluations.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args, Debug)]
struct SaturateArgs {
    /// UDPACK file.
    input: PathBuf,
    /// Region radius, at most R_w - 1.
    #[arg(long)]
    region: Option<f64>,
    #[command(flatten)]
    hole: HoleArgs,
}

#[derive(Args, Debug)]
struct MsatArgs {
    /// UDPACK file.
    input: PathBuf,
    /// m in 1..=3.
    #[arg(long)]
    m: Option<usize>,
    /// Region radius, at most R_w - 1.
    #[arg(long)]
    region: Option<f64>,
    /// Removed points lie in a ball of this radius (>= 0).
    #[arg(long)]
    cluster_radius: Option<f64>,
    #[command(flatten)]
    hole: HoleArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Domain(e.to_string()))?;
    }
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let seed = cfg.pick("seed", cli.seed)?;
    let ctx = Ctx { cfg, seed, out: cli.out };
    match cli.command {
        Command::Gen(a) => gen(&ctx, a),
        Command::Density(a) => density(&ctx, a),
        Command::Mdist(a) => mdist_cmd(&ctx, a),
        Command::Regularity(a) => regularity(&ctx, a),
        Command::Splice(a) => splice(&ctx, a),
        Command::Metric(a) => metric(&ctx, a),
        Command::Pair(a) => pair(&ctx, a),
        Command::Saturate(a) => saturate(&ctx, a),
        Command::Msat(a) => msat(&ctx, a),
    }
}

struct Ctx {
    cfg: RunConfig,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

impl Ctx {
    fn keys(&self, allowed: &[&str]) -> CliResult<()> {
        let mut all = vec!["seed"];
        all.extend_from_slice(allowed);
        self.cfg.check_keys(&all)
    }

    fn seed(&self, what: &str) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::Usage(format!("{what} is randomized and requires --seed")))
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        write_to(self.out.as_deref(), text)
    }
}

fn write_to(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read(path: &Path) -> CliResult<UdSet> {
    read_packing_file(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

/// `start:stop:step`, or a single radius.
fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| -> CliResult<f64> {
        t.trim().parse().map_err(|_| CliError::Usage(format!("bad number '{t}' in grid '{s}'")))
    };
    match parts.as_slice() {
        [t] => Ok(vec![num(t)?]),
        [a, b, c] => Ok(linear_grid(num(a)?, num(b)?, num(c)?)?),
        _ => Err(CliError::Usage(format!("grid must be start:stop:step, got '{s}'"))),
    }
}

fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| CliError::Usage(format!("bad number '{t}' in '{s}'"))))
        .collect()
}

fn parse_point(s: &str, dim: usize) -> CliResult<Point> {
    let c = parse_list(s)?;
    if c.len() != dim {
        return Err(CliError::Domain(format!("point '{s}' has {} coordinates, expected {dim}", c.len())));
    }
    Ok(Point::new(c))
}

fn estimate_line(e: &AsymptoticEstimate) -> String {
    format!(
        "# estimate={} tail_lo={} tail_hi={} tail={}..{} converged={}\n",
        e.value, e.tail_lo, e.tail_hi, e.tail_from, e.tail_to, e.converged
    )
}

fn profile_csv(profile: &DensityProfile) -> CliResult<String> {
    let mut buf = Vec::new();
    profile.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii"))
}

fn gen(ctx: &Ctx, a: GenArgs) -> CliResult<()> {
    ctx.keys(&["lattice", "rsa", "dim", "window", "scale", "shift", "max-failures"])?;
    let cfg = &ctx.cfg;
    let window: f64 = cfg.require("window", a.window)?;
    let rsa = cfg.pick_or("rsa", a.rsa.then_some(true), false)?;
    let lattice: Option<String> = cfg.pick("lattice", a.lattice)?;
    let set = match (lattice, rsa) {
        (Some(_), true) => return Err(CliError::Usage("--lattice and --rsa are exclusive".into())),
        (None, false) => return Err(CliError::Usage("one of --lattice or --rsa is required".into())),
        (Some(name), false) => {
            let lattice: Lattice = name.parse()?;
            let scale: f64 = cfg.pick_or("scale", a.scale, 1.0)?;
            if !(scale >= 1.0) || !scale.is_finite() {
                return Err(CliError::Domain(format!("scale must be finite and >= 1, got {scale}")));
            }
            let base = gen_lattice(&lattice.basis(), window / scale)?;
            let pts = base.points().iter().map(|p| p.scale(scale)).collect();
            let tag = if scale == 1.0 { lattice.name() } else { format!("{}*{scale}", lattice.name()) };
            UdSet::validate(pts, base.dim(), window)?.with_tag(tag)
        }
        (None, true) => {
            let dim: usize = cfg.require("dim", a.dim)?;
            let failures = cfg.pick_or("max-failures", a.max_failures, 1000)?;
            gen_rsa(dim, window, ctx.seed("rsa")?, failures)?
        }
    };
    let set = match cfg.pick::<String>("shift", a.shift)? {
        None => set,
        Some(s) => {
            let t = parse_point(&s, set.dim())?;
            let tag = format!("{}+({s})", set.tag().unwrap_or("set"));
            set.translate(&t)?.with_tag(tag)
        }
    };
    ctx.emit(&packing_to_string(&set))
}

fn density_method(name: &str, seed: Option<u64>, samples: usize) -> CliResult<DensityMethod> {
    match name {
        "counting" => Ok(DensityMethod::Counting),
        "volumetric" => Ok(DensityMethod::Volumetric),
        "montecarlo" | "monte-carlo" => Ok(DensityMethod::MonteCarlo {
            seed: seed.ok_or_else(|| CliError::Usage("montecarlo is randomized and requires --seed".into()))?,
            samples,
        }),
        _ => Err(CliError::Usage(format!("unknown density method '{name}' (counting, volumetric, montecarlo)"))),
    }
}

fn symdiff_method(name: &str, seed: Option<u64>, samples: usize) -> CliResult<SymdiffMethod> {
    match name {
        "exact" => Ok(SymdiffMethod::Exact),
        "exact-pairing" => Ok(SymdiffMethod::ExactPairing),
        "planar-exact" => Ok(SymdiffMethod::PlanarExact),
        "montecarlo" | "monte-carlo" => Ok(SymdiffMethod::MonteCarlo {
            seed: seed.ok_or_else(|| CliError::Usage("montecarlo is randomized and requires --seed".into()))?,
            samples,
        }),
        _ => Err(CliError::Usage(format!(
            "unknown method '{name}' (exact, exact-pairing, planar-exact, montecarlo)"
        ))),
    }
}

fn grid_or(cfg: &RunConfig, flag: Option<String>, default: impl FnOnce() -> CliResult<Vec<f64>>) -> CliResult<Vec<f64>> {
    match cfg.pick::<String>("grid", flag)? {
        Some(g) => parse_grid(&g),
        None => default(),
    }
}

fn density(ctx: &Ctx, a: DensityArgs) -> CliResult<()> {
    ctx.keys(&["grid", "method", "p", "samples", "tail-fraction"])?;
    let cfg = &ctx.cfg;
    let set = read(&a.input)?;
    let w = set.window_radius();
    let grid = grid_or(cfg, a.grid, || Ok(linear_grid(1.0_f64.min(w), w, (w / 50.0).max(0.5))?))?;
    let samples = cfg.pick_or("samples", a.samples, 100_000)?;
    let method = density_method(&cfg.pick_or("method", a.method, "counting".to_string())?, ctx.seed, samples)?;
    let p = cfg.pick_or("p", a.p, 1.0)?;
    let frac = cfg.pick_or("tail-fraction", a.tail_fraction, DEFAULT_TAIL_FRACTION)?;
    let profile = density_profile(&set, &grid, method, p)?;
    let est = asymptotic_density(&profile, frac)?;
    let mut out = profile_csv(&profile)?;
    out.push_str(&estimate_line(&est));
    ctx.emit(&out)
}

fn mdist_cmd(ctx: &Ctx, a: MdistArgs) -> CliResult<()> {
    ctx.keys(&["grid", "method", "p", "samples", "tail-fraction", "tolerance"])?;
    let cfg = &ctx.cfg;
    let (sa, sb) = (read(&a.a)?, read(&a.b)?);
    let limit = sa.window_radius().min(sb.window_radius()) - 0.5;
    let grid = grid_or(cfg, a.grid, || Ok(linear_grid(1.0_f64.min(limit), limit, (limit / 40.0).max(0.5))?))?;
    let samples = cfg.pick_or("samples", a.samples, DEFAULT_SAMPLES)?;
    let method = symdiff_method(&cfg.pick_or("method", a.method, "exact".to_string())?, ctx.seed, samples)?;
    let p = cfg.pick_or("p", a.p, 1.0)?;
    let frac = cfg.pick_or("tail-fraction", a.tail_fraction, DEFAULT_TAIL_FRACTION)?;
    let tol = cfg.pick_or("tolerance", a.tolerance, spherepack::density::CONVERGENCE_TOL)?;
    let d = mdist_with(&sa, &sb, p, &grid, method, frac, tol)?;
    let mut out = profile_csv(&d.profile)?;
    out.push_str(&estimate_line(&d.estimate));
    ctx.emit(&out)
}

fn regularity(ctx: &Ctx, a: RegularityArgs) -> CliResult<()> {
    ctx.keys(&["l", "grid", "tol", "tail-fraction"])?;
    let cfg = &ctx.cfg;
    let set = read(&a.input)?;
    let l = cfg.pick_or("l", a.l, 1.0)?;
    let limit = set.window_radius() - 0.5;
    let grid = grid_or(cfg, a.grid, || Ok(linear_grid(l.max(1.0).min(limit), limit, (limit / 40.0).max(0.5))?))?;
    let tol = cfg.pick_or("tol", a.tol, spherepack::density::CONVERGENCE_TOL)?;
    let frac = cfg.pick_or("tail-fraction", a.tail_fraction, DEFAULT_TAIL_FRACTION)?;
    let defect = regularity_defect(&set, l, &grid)?;
    let ok = is_regular_consistent(&defect, frac, tol)?;
    let mut out = profile_csv(&defect)?;
    let _ = writeln!(out, "# l={l} tol={tol} regular_consistent={ok}");
    ctx.emit(&out)
}

fn read_manifest(path: &Path) -> CliResult<Vec<UdSet>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let p = Path::new(l);
            read(&if p.is_absolute() { p.to_path_buf() } else { base.join(p) })
        })
        .collect()
}

fn splice(ctx: &Ctx, a: SpliceArgs) -> CliResult<()> {
    ctx.keys(&["grid", "depth", "growth", "p", "method", "samples", "report"])?;
    let cfg = &ctx.cfg;
    let seq = read_manifest(&a.manifest)?;
    if seq.is_empty() {
        return Err(CliError::Domain("manifest lists no packings".into()));
    }
    let limit = seq.iter().map(UdSet::window_radius).fold(f64::INFINITY, f64::min) - 0.5;
    let grid = grid_or(cfg, a.grid, || Ok(linear_grid(1.0_f64.min(limit), limit, 0.5)?))?;
    let depth = cfg.pick_or("depth", a.depth, seq.len() - 1)?;
    let growth = cfg.pick_or("growth", a.growth, DEFAULT_GROWTH)?;
    let p = cfg.pick_or("p", a.p, 1.0)?;
    let samples = cfg.pick_or("samples", a.samples, DEFAULT_SAMPLES)?;
    let method = symdiff_method(&cfg.pick_or("method", a.method, "exact".to_string())?, ctx.seed, samples)?;
    let report_path: Option<PathBuf> = cfg.pick("report", a.report)?;

    let schedule = select_schedule(&seq, p, &grid, depth, growth, method)?;
    let spliced = build_splice(&seq, &schedule)?;
    let vgrid: Vec<f64> = grid.iter().copied().filter(|&t| t <= spliced.window_radius() - 0.5).collect();
    let report = verify_splice(&spliced, &seq, &schedule, p, &vgrid, method, DensityMethod::Counting)?;

    let mut text = schedule.to_text();
    for (i, m, d) in &report.mdist_to_sources {
        let _ = writeln!(text, "# mdist(splice, source {m}) for annulus {i} = {d}");
    }
    let _ = writeln!(
        text,
        "# density splice={} last_source={} gap={}\n# gaps_empty={} min_cross_annulus_distance={} valid={}",
        report.density_splice,
        report.density_last_source,
        report.density_gap,
        report.gaps_empty,
        report.min_cross_annulus_distance.map_or("-".to_string(), |d| d.to_string()),
        report.is_valid()
    );
    match report_path {
        Some(p) => write_to(Some(&p), &text)?,
        None => eprint!("{text}"),
    }
    ctx.emit(&packing_to_string(&spliced))
}

fn metric(ctx: &Ctx, a: MetricArgs) -> CliResult<()> {
    ctx.keys(&["kind", "radii", "alpha-radius", "x-radius", "max-work", "hausdorff"])?;
    let cfg = &ctx.cfg;
    let (sa, sb) = (read(&a.a)?, read(&a.b)?);
    let radii = match cfg.pick::<String>("radii", a.radii)? {
        Some(r) => parse_list(&r)?,
        None => default_radii(),
    };
    let budget = ProbeBudget {
        radii,
        alpha_radius: cfg.pick("alpha-radius", a.alpha_radius)?,
        x_radius: cfg.pick("x-radius", a.x_radius)?,
        max_work: cfg.pick_or("max-work", a.max_work, ProbeBudget::default().max_work)?,
    };
    let kind = cfg.pick_or("kind", a.kind, "D".to_string())?;
    let bound = match kind.as_str() {
        "d" => metric_d_lower(&sa, &sb, &ConeProbe, &budget)?,
        "D" => metric_D_lower(&sa, &sb, &ConeProbe, &budget)?,
        other => return Err(CliError::Usage(format!("unknown metric kind '{other}' (d or D)"))),
    };
    let coords = |p: &Point| p.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
    let mut out = format!(
        "metric={kind} probe=cone lower_bound={} shift={} alpha={} centers={}\n",
        bound.value,
        coords(&bound.shift),
        coords(&bound.alpha),
        bound.centers.len()
    );
    if let Some(r) = cfg.pick::<f64>("hausdorff", a.hausdorff)? {
        let _ = writeln!(out, "hausdorff_window radius={r} value={}", hausdorff_window(&sa, &sb, r)?);
    }
    ctx.emit(&out)
}

fn pair(ctx: &Ctx, a: PairArgs) -> CliResult<()> {
    ctx.keys(&["x", "eps"])?;
    let cfg = &ctx.cfg;
    let (sa, sb) = (read(&a.a)?, read(&a.b)?);
    let x = match cfg.pick::<String>("x", a.x)? {
        Some(s) => parse_point(&s, sa.dim())?,
        None => Point::origin(sa.dim()),
    };
    let eps = cfg.require("eps", a.eps)?;
    let report = pairing(&sa, &sb, &x, eps)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    let mut out = String::from_utf8(buf).expect("ascii");
    let _ = writeln!(
        out,
        "# matched={} unmatched={} ambiguous={} max_displacement={} bounds_satisfied={}",
        report.matches.len(),
        report.unmatched.len(),
        report.ambiguous.len(),
        report.max_displacement,
        report.all_bounds_satisfied()
    );
    ctx.emit(&out)
}

fn hole_options(cfg: &RunConfig, h: &HoleArgs) -> CliResult<HoleOptions> {
    Ok(HoleOptions {
        pitch: cfg.pick_or("pitch", h.pitch, DEFAULT_PITCH)?,
        max_depth: cfg.pick_or("max-depth", h.max_depth, DEFAULT_MAX_DEPTH)?,
        budget: cfg.pick_or("budget", h.budget, DEFAULT_BUDGET)?,
        ..HoleOptions::default()
    })
}

fn default_region(cfg: &RunConfig, flag: Option<f64>, set: &UdSet) -> CliResult<f64> {
    cfg.pick_or("region", flag, (set.window_radius() - 1.0).max(0.0))
}

fn saturate(ctx: &Ctx, a: SaturateArgs) -> CliResult<()> {
    ctx.keys(&["region", "pitch", "max-depth", "budget"])?;
    let cfg = &ctx.cfg;
    let set = read(&a.input)?;
    let region = default_region(cfg, a.region, &set)?;
    let opts = hole_options(cfg, &a.hole)?;
    let seed = ctx.seed("saturate")?;
    let sat = saturate_greedy_with(&set, region, seed, &opts)?;
    let status = match &sat.last_search.status {
        HoleStatus::Saturated => "saturated".to_string(),
        HoleStatus::Hole(_) => "not-saturated".to_string(),
        HoleStatus::Indeterminate { open_cells } => format!("indeterminate open_cells={open_cells}"),
    };
    eprintln!("inserted={} points={} region={region} pitch={} final={status}", sat.inserted, sat.set.len(), opts.pitch);
    ctx.emit(&packing_to_string(&sat.set))
}

fn msat(ctx: &Ctx, a: MsatArgs) -> CliResult<()> {
    ctx.keys(&["m", "region", "cluster-radius", "pitch", "max-depth", "budget"])?;
    let cfg = &ctx.cfg;
    let set = read(&a.input)?;
    let region = default_region(cfg, a.region, &set)?;
    let opts = hole_options(cfg, &a.hole)?;
    let m = cfg.pick_or("m", a.m, 1)?;
    let cluster = cfg.pick_or("cluster-radius", a.cluster_radius, 1.0)?;
    let verdict = m_saturation_check_with(&set, m, region, cluster, &opts)?;
    ctx.emit(&format!("{verdict}\n"))
}
