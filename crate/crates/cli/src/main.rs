use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use sandsmooth::lattice::{field_to_csv, read_field, write_dump};
use sandsmooth::oracle::{brute_min_superharmonic_step, brute_relax, OracleBudget};
use sandsmooth::patterns::{
    build_node, build_soliton, build_triad, laplacian_mass_check, verify_movable, PatternState, SolitonSpec,
};
use sandsmooth::render::to_ppm;
use sandsmooth::sandpile::{relax, send_wave, territories, RelaxOptions, Scheduler};
use sandsmooth::smoothing::{canonical_smoothing, smooth_n, smooth_once, DeletionOrder, EdgeProfile, SmoothingOptions};
use sandsmooth::{AffineForm, DirectionPair, Error, IntegerField, Lattice, PLMinFunction};

const EXIT_VERIFY: u8 = 2;
const EXIT_WINDOW: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Parser, Debug, Serialize)]
#[command(name = "sandsmooth", version, about = "Canonical smoothings and sandpile solitons on Z^2")]
struct Cli {
    /// Directory for dumps, CSV files and images.
    #[arg(long, global = true, env = "SANDSMOOTH_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// n-smoothing (or canonical smoothing) of a PL min function.
    Smooth(SmoothArgs),
    /// Canonical smoothing of the edge function min(0, px + qy).
    Theta(PqArgs),
    /// Build a soliton on its cylinder.
    Soliton(SolitonArgs),
    /// Build a triad (three solitons meeting at a point).
    Triad(PatternArgs),
    /// Build a node (four solitons meeting at a point).
    Node(PatternArgs),
    /// Relax a state dump.
    Relax(RelaxArgs),
    /// Send waves into a stable state dump.
    Wave(WaveArgs),
    /// List the territories of a stable state dump.
    Territories(InputArgs),
    /// Check that waves move a soliton by one lattice step.
    VerifyMovable(MovableArgs),
    /// Laplacian mass of a soliton over one period.
    MassCheck(PqArgs),
    #[command(hide = true, subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
enum OracleCommand {
    /// Compare one smoothing step with subset search on a dump.
    SmoothOnce(InputArgs),
    /// Compare relaxation with the lexicographic reference.
    Relax(InputArgs),
}

#[derive(Args, Debug, Serialize)]
struct PqArgs {
    #[arg(long, allow_hyphen_values = true)]
    p: i64,
    #[arg(long, allow_hyphen_values = true)]
    q: i64,
    /// Long half-height of the cylinder.
    #[arg(long)]
    half_height: Option<i64>,
}

#[derive(Args, Debug, Serialize)]
struct SolitonArgs {
    #[command(flatten)]
    pq: PqArgs,
    /// Write a PPM image; without a value the name is derived from p and q.
    #[arg(long, num_args = 0..=1, value_name = "PATH")]
    render: Option<Option<PathBuf>>,
}

#[derive(Args, Debug, Serialize)]
struct PatternArgs {
    /// First direction of the pair.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    dir1: Option<(i64, i64)>,
    /// Second direction; det(dir1, dir2) must be 1.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    dir2: Option<(i64, i64)>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    c1: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    c2: i64,
    /// Half side of the box (grown automatically if too small).
    #[arg(long, default_value_t = 20)]
    half: i64,
    #[arg(long, num_args = 0..=1, value_name = "PATH")]
    render: Option<Option<PathBuf>>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OrderArg {
    RowMajor,
    Random,
}

#[derive(Args, Debug, Serialize)]
struct SmoothArgs {
    /// Affine form p,q,c; repeat for each form.
    #[arg(long = "form", value_parser = parse_triple, allow_hyphen_values = true)]
    forms: Vec<(i64, i64, i64)>,
    /// JSON file holding a list of [p,q,c] triples.
    #[arg(long)]
    forms_file: Option<PathBuf>,
    /// Box window x0,x1,y0,y1.
    #[arg(long = "box", value_parser = parse_quad, allow_hyphen_values = true, conflicts_with = "cylinder")]
    window: Option<(i64, i64, i64, i64)>,
    /// Cylinder a,b,lo,hi with period (a,b).
    #[arg(long, value_parser = parse_quad, allow_hyphen_values = true)]
    cylinder: Option<(i64, i64, i64, i64)>,
    #[arg(long, default_value_t = 1)]
    guard: i64,
    /// Number of steps; omitted means run to the fixed point.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum, default_value_t = OrderArg::RowMajor)]
    order: OrderArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Record guard-band violations instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args, Debug, Serialize)]
struct InputArgs {
    /// Field dump to read.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SchedulerArg {
    Fifo,
    Random,
}

#[derive(Args, Debug, Serialize)]
struct RelaxArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = SchedulerArg::Fifo)]
    scheduler: SchedulerArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Toppling budget.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct WaveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Source vertex x,y.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    source: (i64, i64),
    #[arg(long, default_value_t = 1)]
    count: usize,
}

#[derive(Args, Debug, Serialize)]
struct MovableArgs {
    #[command(flatten)]
    pq: PqArgs,
    #[arg(long, default_value_t = 5)]
    waves: usize,
}

fn parse_ints(s: &str, n: usize) -> Result<Vec<i64>, String> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated integers, got {}", parts.len()));
    }
    Ok(parts)
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let v = parse_ints(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_triple(s: &str) -> Result<(i64, i64, i64), String> {
    let v = parse_ints(s, 3)?;
    Ok((v[0], v[1], v[2]))
}

fn parse_quad(s: &str) -> Result<(i64, i64, i64, i64), String> {
    let v = parse_ints(s, 4)?;
    Ok((v[0], v[1], v[2], v[3]))
}

/// Outcome of a command: the report and whether its verifications passed.
struct Report {
    body: Value,
    ok: bool,
}

struct Output<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Output<'_> {
    fn path(&self, name: &Path) -> PathBuf {
        if name.is_absolute() {
            name.to_path_buf()
        } else {
            self.dir.join(name)
        }
    }

    fn write(&mut self, name: impl AsRef<Path>, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
        let path = self.path(name.as_ref());
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.display().to_string());
        Ok(())
    }

    fn dump(&mut self, name: &str, f: &IntegerField) -> anyhow::Result<()> {
        self.write(name, write_dump(f))
    }
}

fn read_input(path: &Path) -> anyhow::Result<IntegerField> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(read_field(&text, None)?)
}

fn load_forms(args: &SmoothArgs) -> anyhow::Result<PLMinFunction> {
    let mut triples = args.forms.clone();
    if let Some(path) = &args.forms_file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let list: Vec<[i64; 3]> =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        triples.extend(list.into_iter().map(|[p, q, c]| (p, q, c)));
    }
    if triples.is_empty() {
        bail!(Error::InvalidFunction("no forms given; use --form or --forms-file".into()));
    }
    Ok(PLMinFunction::new(triples.into_iter().map(|(p, q, c)| AffineForm::new(p, q, c)).collect())?)
}

fn vertex_of(domain: &Lattice, (x, y): (i64, i64)) -> anyhow::Result<usize> {
    match domain.vertex_at(x, y) {
        Some(v) => Ok(v),
        None => bail!(Error::Precondition(format!("({x},{y}) is outside the domain"))),
    }
}

fn coords_json(domain: &Lattice, vs: &[usize]) -> Value {
    json!(vs.iter().map(|&v| domain.coord(v).map(|(x, y)| json!([x, y])).unwrap_or(json!(v))).collect::<Vec<_>>())
}

fn cmd_smooth(args: &SmoothArgs, out: &mut Output) -> anyhow::Result<Report> {
    let f = load_forms(args)?;
    let domain = match (args.window, args.cylinder) {
        (Some((x0, x1, y0, y1)), None) => Lattice::boxed(x0, x1, y0, y1, args.guard)?,
        (None, Some((a, b, lo, hi))) => Lattice::cylinder((a, b), lo, hi, args.guard)?,
        _ => bail!(Error::InvalidDomain("give exactly one of --box or --cylinder".into())),
    };
    let opts = SmoothingOptions {
        strict: !args.lenient,
        max_iters: args.max_iters,
        order: match args.order {
            OrderArg::RowMajor => DeletionOrder::RowMajor,
            OrderArg::Random => DeletionOrder::Random(args.seed),
        },
    };
    let result = match args.n {
        Some(n) => smooth_n(&f, &domain, n, &opts)?,
        None => canonical_smoothing(&f, &domain, &opts)?,
    };
    out.dump("smooth.dump", &result.final_field)?;
    let mut csv = String::from("step,vertex,x,y\n");
    for (step, set) in result.change_sets.iter().enumerate() {
        for &v in set {
            let (x, y) = domain.coord(v).unwrap_or((0, 0));
            csv.push_str(&format!("{},{v},{x},{y}\n", step + 1));
        }
    }
    out.write("smooth_changes.csv", csv)?;
    Ok(Report {
        body: json!({
            "function": f.to_string(),
            "steps": result.steps,
            "stabilized": result.stabilized,
            "change_set_sizes": result.change_sets.iter().map(Vec::len).collect::<Vec<_>>(),
            "guard_violation": result.guard_violation.map(|v| coords_json(&domain, &[v])),
        }),
        ok: true,
    })
}

fn cmd_theta(args: &PqArgs, out: &mut Output) -> anyhow::Result<Report> {
    let opts = SmoothingOptions::default();
    let profile = EdgeProfile::build(args.p, args.q, &opts)?;
    let theta = profile.theta();
    let stem = format!("theta_{}_{}", args.p, args.q);
    out.dump(&format!("{stem}.dump"), theta)?;
    out.dump(&format!("{stem}_laplacian.dump"), &theta.laplacian_field())?;
    Ok(Report { body: json!({ "normal": [args.p, args.q], "steps": profile.steps() }), ok: true })
}

fn write_pattern(
    ps: &PatternState,
    stem: &str,
    render: &Option<Option<PathBuf>>,
    out: &mut Output,
) -> anyhow::Result<()> {
    out.dump(&format!("{stem}_state.dump"), &ps.state)?;
    out.dump(&format!("{stem}_theta.dump"), &ps.theta)?;
    out.write(format!("{stem}_state.csv"), field_to_csv(&ps.state)?)?;
    if let Some(target) = render {
        let path = target.clone().unwrap_or_else(|| PathBuf::from(format!("{stem}.ppm")));
        out.write(path, to_ppm(&ps.state)?)?;
    }
    Ok(())
}

fn soliton_spec(args: &PqArgs) -> anyhow::Result<SolitonSpec> {
    let spec = SolitonSpec::new(args.p, args.q)?;
    Ok(match args.half_height {
        Some(h) => spec.with_half_height(h),
        None => spec,
    })
}

fn cmd_soliton(args: &SolitonArgs, out: &mut Output) -> anyhow::Result<Report> {
    let spec = soliton_spec(&args.pq)?;
    let ps = build_soliton(&spec)?;
    write_pattern(&ps, &format!("soliton_{}_{}", spec.p, spec.q), &args.render, out)?;
    Ok(Report {
        body: json!({
            "p": spec.p,
            "q": spec.q,
            "steps": ps.steps,
            "stable": sandsmooth::sandpile::is_stable(&ps.state),
        }),
        ok: true,
    })
}

fn cmd_pattern(args: &PatternArgs, node: bool, out: &mut Output) -> anyhow::Result<Report> {
    let (default1, default2) = if node { ((1, 0), (0, 1)) } else { ((-1, 0), (-2, -1)) };
    let dirs = DirectionPair::new(args.dir1.unwrap_or(default1), args.dir2.unwrap_or(default2), args.c1, args.c2)?;
    let (ps, name) = if node {
        (build_node(&dirs, args.half)?, "node")
    } else {
        (build_triad(&dirs, args.half)?, "triad")
    };
    write_pattern(&ps, name, &args.render, out)?;
    Ok(Report {
        body: json!({
            "dir1": [dirs.first.0, dirs.first.1],
            "dir2": [dirs.second.0, dirs.second.1],
            "c1": dirs.c1,
            "c2": dirs.c2,
            "steps": ps.steps,
            "stable": sandsmooth::sandpile::is_stable(&ps.state),
        }),
        ok: true,
    })
}

fn cmd_relax(args: &RelaxArgs, out: &mut Output) -> anyhow::Result<Report> {
    let phi = read_input(&args.input.input)?;
    let scheduler = match args.scheduler {
        SchedulerArg::Fifo => Scheduler::Fifo,
        SchedulerArg::Random => Scheduler::Random { seed: args.seed },
    };
    let outcome = relax(&phi, &RelaxOptions { scheduler, budget: args.budget });
    if outcome.exhausted {
        bail!(Error::BudgetExhausted(outcome.topplings));
    }
    out.dump("relaxed.dump", &outcome.final_state)?;
    out.dump("odometer.dump", &outcome.odometer)?;
    Ok(Report {
        body: json!({
            "topplings": outcome.topplings,
            "stable": sandsmooth::sandpile::is_stable(&outcome.final_state),
            "scheduler": format!("{:?}", outcome.scheduler),
            "seed": args.seed,
        }),
        ok: true,
    })
}

fn cmd_wave(args: &WaveArgs, out: &mut Output) -> anyhow::Result<Report> {
    let mut phi = read_input(&args.input.input)?;
    let v = vertex_of(phi.domain(), args.source)?;
    let mut total = IntegerField::constant(phi.domain().clone(), 0);
    let mut sizes = Vec::with_capacity(args.count);
    for _ in 0..args.count {
        let w = send_wave(&phi, v)?;
        sizes.push(w.wave_odometer.values().iter().sum::<i64>());
        total = total.add(&w.wave_odometer)?;
        phi = w.result;
    }
    out.dump("waved.dump", &phi)?;
    out.dump("wave_odometer.dump", &total)?;
    Ok(Report { body: json!({ "source": [args.source.0, args.source.1], "wave_sizes": sizes }), ok: true })
}

fn cmd_territories(args: &InputArgs) -> anyhow::Result<Report> {
    let phi = read_input(&args.input)?;
    let ts = territories(&phi)?;
    let list: Vec<Value> = ts.iter().map(|t| coords_json(phi.domain(), t)).collect();
    Ok(Report { body: json!({ "count": ts.len(), "territories": list }), ok: true })
}

fn cmd_movable(args: &MovableArgs) -> anyhow::Result<Report> {
    let spec = soliton_spec(&args.pq)?;
    let ps = build_soliton(&spec)?;
    let r = verify_movable(&ps, args.waves)?;
    Ok(Report {
        body: json!({
            "p": spec.p,
            "q": spec.q,
            "shift": [r.shift.0, r.shift.1],
            "expected": [r.expected.0, r.expected.1],
            "total_shift": [r.total_shift.0, r.total_shift.1],
            "waves": r.waves,
            "ok": r.ok,
        }),
        ok: r.ok,
    })
}

fn cmd_mass(args: &PqArgs) -> anyhow::Result<Report> {
    let spec = soliton_spec(args)?;
    let mass = laplacian_mass_check(&spec)?;
    let expected = spec.p * spec.p + spec.q * spec.q;
    Ok(Report {
        body: json!({ "p": spec.p, "q": spec.q, "mass": mass, "expected": expected, "ok": mass == expected }),
        ok: mass == expected,
    })
}

fn cmd_oracle(cmd: &OracleCommand) -> anyhow::Result<Report> {
    let budget = OracleBudget::default();
    match cmd {
        OracleCommand::SmoothOnce(args) => {
            let g = read_input(&args.input)?;
            let candidates: Vec<usize> = g.domain().interior_vertices().collect();
            let (fast, _) = smooth_once(&g, DeletionOrder::RowMajor)?;
            let slow = brute_min_superharmonic_step(&g, &candidates, &budget)?;
            let ok = fast == slow;
            Ok(Report { body: json!({ "candidates": candidates.len(), "ok": ok }), ok })
        }
        OracleCommand::Relax(args) => {
            let phi = read_input(&args.input)?;
            let fast = relax(&phi, &RelaxOptions::default());
            let slow = brute_relax(&phi, &budget)?;
            let ok = !fast.exhausted
                && !slow.exhausted
                && fast.final_state == slow.final_state
                && fast.odometer == slow.odometer;
            Ok(Report { body: json!({ "topplings": slow.topplings, "ok": ok }), ok })
        }
    }
}

fn dispatch(cli: &Cli, out: &mut Output) -> anyhow::Result<Report> {
    match &cli.command {
        Command::Smooth(a) => cmd_smooth(a, out),
        Command::Theta(a) => cmd_theta(a, out),
        Command::Soliton(a) => cmd_soliton(a, out),
        Command::Triad(a) => cmd_pattern(a, false, out),
        Command::Node(a) => cmd_pattern(a, true, out),
        Command::Relax(a) => cmd_relax(a, out),
        Command::Wave(a) => cmd_wave(a, out),
        Command::Territories(a) => cmd_territories(a),
        Command::VerifyMovable(a) => cmd_movable(a),
        Command::MassCheck(a) => cmd_mass(a),
        Command::Oracle(c) => cmd_oracle(c),
    }
}

fn error_code(err: &anyhow::Error) -> (u8, &'static str) {
    match err.downcast_ref::<Error>() {
        Some(
            Error::WindowTooSmall { .. }
            | Error::IterationCapExceeded { .. }
            | Error::BudgetExhausted(_)
            | Error::TooLarge(_),
        ) => (EXIT_WINDOW, "window_or_budget"),
        Some(_) => (EXIT_INPUT, "bad_input"),
        None => (EXIT_INPUT, "io"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = serde_json::to_value(&cli).unwrap_or(Value::Null);
    let mut out = Output { dir: &cli.out_dir, written: Vec::new() };
    let (report, code) = match dispatch(&cli, &mut out) {
        Ok(r) => {
            let code = if r.ok { 0 } else { EXIT_VERIFY };
            let mut body = r.body;
            body["outputs"] = json!(out.written);
            (body, code)
        }
        Err(e) => {
            let (code, kind) = error_code(&e);
            (json!({ "error": { "kind": kind, "message": format!("{e:#}") } }), code)
        }
    };
    let full = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "library_version": sandsmooth::VERSION,
        "config": config,
        "exit_code": code,
        "report": report,
    });
    let text = serde_json::to_string_pretty(&full).unwrap_or_default();
    let _ = writeln!(std::io::stdout(), "{text}");
    ExitCode::from(code)
}
