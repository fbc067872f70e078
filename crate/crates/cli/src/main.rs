//! `freeflow` command line tool.
//!
//! Exit codes: 0 success, 2 invalid input or usage, 3 I/O failure,
//! 4 solver did not converge.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use freeflow::bounds::{self, BoundQuery, Topology};
use freeflow::estimator::synth::{write_planted_csv, FleetSpec, GridNetwork, MixtureComponent, TraceSpec};
use freeflow::estimator::{
    deviation_distribution, estimate_all, read_traces, write_estimates_csv, write_traces_csv, EstimatorConfig,
    RoadGraph, SpeedTable,
};
use freeflow::generators::{self, GeneratedInstance, MultilevelParams, ParallelGammaParams};
use freeflow::io::{parse_instance, poa_report_json, solve_report_json, DescribeProfile, Instance};
use freeflow::solver::{self, brute_force::brute_force_poa, Init, Objective, RoutingGame, SolverConfig};
use freeflow::{Error, Extended, Latency};

#[derive(Parser)]
#[command(name = "freeflow", version, about = "Price of Anarchy analysis under bounded free-flow deviation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the PoA bound for polynomial latencies of degrees q..=p.
    ///
    /// Prints JSON {p, q, theta, topology, value, gamma, theta_term,
    /// theta_term_kind, method} with values rounded to 6 decimals.
    Bounds {
        #[arg(short, long)]
        p: u32,
        #[arg(short, long)]
        q: u32,
        /// Free-flow deviation: a nonnegative number, a fraction like 1/2, or "inf".
        #[arg(short, long)]
        theta: Extended<f64>,
        /// general or path-disjoint.
        #[arg(short = 'T', long, default_value = "general")]
        topology: Topology,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write every cell of the degree/θ bound table as CSV
    /// (p,q,theta,general,path_disjoint,method; 4 decimals).
    Table1 {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bound curves over θ in [0, theta_max] as CSV
    /// (theta,general,path_disjoint,gamma_inf).
    Curves {
        #[arg(short, long)]
        p: u32,
        #[arg(short, long)]
        q: u32,
        #[arg(short = 'm', long, default_value_t = 1.0)]
        theta_max: f64,
        #[arg(short, long, default_value_t = 101)]
        steps: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve an instance JSON for its equilibrium or optimum; prints a JSON report.
    Solve {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(short = 'b', long, value_enum, default_value = "equilibrium")]
        objective: ObjectiveArg,
        /// free-flow, uniform or random:SEED.
        #[arg(short = 'I', long, default_value = "free-flow")]
        init: String,
    },
    /// Price of Anarchy of an instance JSON; prints a JSON report.
    Poa {
        #[command(flatten)]
        solve: SolveArgs,
        /// Also run the grid-search oracle at this resolution (small instances only).
        #[arg(short = 'g', long)]
        brute_force: Option<usize>,
    },
    /// Build a worst-case instance; writes the instance JSON and a sidecar with the predicted PoA.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
        /// Instance path; the sidecar goes next to it as STEM.sidecar.json.
        /// Without it both are printed as one JSON object.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Estimate per-trip θ from a road graph and location traces.
    ///
    /// Inputs: nodes CSV id,lat,lon; edges CSV id,from,to,length_m,speed_mps,road_type
    /// (empty speed falls back to the road type); traces CSV trip_id,timestamp,lat,lon.
    /// Output CSV: trip_id,best_ff_s,data_ff_s,deviation,theta_hat,n_small_gaps,n_large_gaps.
    /// The summary JSON (deciles and fractions below 0.25, 0.5, 0.88, 1) goes to
    /// --summary, or to stderr when not given.
    EstimateTheta {
        /// Nodes CSV.
        #[arg(short = 'N', long)]
        nodes: PathBuf,
        /// Edges CSV; every row is a two-way road.
        #[arg(short = 'E', long)]
        edges: PathBuf,
        /// Traces CSV.
        #[arg(short = 'r', long)]
        traces: PathBuf,
        /// Points farther than this (meters) from every edge are ignored.
        #[arg(short, long, default_value_t = 30.0)]
        snap_radius: f64,
        /// Gaps at least this long (meters) are filled with a shortest path.
        #[arg(short = 'g', long, default_value_t = 300.0)]
        small_gap: f64,
        /// Road-type speed override, e.g. arterial=15 (repeatable).
        #[arg(short = 'v', long = "speed", value_parser = parse_speed)]
        speeds: Vec<(String, f64)>,
        /// Worker threads; 0 uses every core.
        #[arg(short = 'j', long, default_value_t = 0)]
        threads: usize,
        /// Summary JSON path.
        #[arg(short = 'S', long)]
        summary: Option<PathBuf>,
        /// Per-trip CSV path; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic grid city with a seeded fleet of traces
    /// (nodes.csv, edges.csv, traces.csv, planted.csv).
    SynthGrid {
        #[arg(short = 'o', long)]
        out_dir: PathBuf,
        #[arg(short = 'R', long, default_value_t = 20)]
        rows: usize,
        #[arg(short = 'C', long, default_value_t = 20)]
        cols: usize,
        /// Block length in meters.
        #[arg(short = 'd', long, default_value_t = 200.0)]
        spacing: f64,
        #[arg(short = 'n', long, default_value_t = 1000)]
        trips: usize,
        /// Planted θ mixture as weight:theta pairs, e.g. 0.5:0,0.3:0.5,0.2:1.5.
        #[arg(short = 'x', long)]
        mixture: Option<String>,
        /// Seconds between trace points.
        #[arg(short = 'i', long, default_value_t = 3.0)]
        interval: f64,
        /// Standard deviation of position noise in meters.
        #[arg(short = 'z', long, default_value_t = 5.0)]
        noise: f64,
        /// Probability of dropping each interior point.
        #[arg(short = 'p', long, default_value_t = 0.05)]
        drop: f64,
        #[arg(short = 's', long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Congestion or network game JSON.
    #[arg(short, long)]
    instance: PathBuf,
    #[arg(short, long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(short = 'n', long, default_value_t = 200_000)]
    max_iters: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Equilibrium,
    Optimum,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Two links 1 and x + c with unit demand.
    Pigou {
        #[arg(short, long)]
        c: f64,
    },
    /// Multi-level load-balancing construction.
    Multilevel {
        #[command(flatten)]
        params: MultilevelArgs,
    },
    /// Two families of parallel links; -p/-q/-d pick loads near the class worst case.
    ParallelGamma {
        #[arg(short, long, requires = "q", conflicts_with_all = ["k1", "l1", "f1", "k2", "l2", "f2", "n"])]
        p: Option<u32>,
        #[arg(short, long)]
        q: Option<u32>,
        #[arg(short, long, default_value_t = 20)]
        denominator: usize,
        #[arg(long, requires_all = ["l1", "f1", "k2", "l2", "f2", "n"])]
        k1: Option<f64>,
        #[arg(long)]
        l1: Option<f64>,
        #[arg(long)]
        f1: Option<Latency>,
        #[arg(long)]
        k2: Option<f64>,
        #[arg(long)]
        l2: Option<f64>,
        #[arg(long)]
        f2: Option<Latency>,
        #[arg(short, long)]
        n: Option<usize>,
    },
    /// Two links θ·f + f(k) and (1+θ)·f(k) with demand k.
    TwolinkEta {
        #[arg(short, long)]
        k: f64,
        #[arg(short, long)]
        l: f64,
        #[arg(short, long)]
        theta: f64,
        /// Homogeneous latency such as x, x^2 or 2*x^3 + x.
        #[arg(short = 'f', long, default_value = "x")]
        latency: Latency,
    },
    /// Single-source network simulating the multi-level construction.
    NetworkExpansion {
        #[command(flatten)]
        params: MultilevelArgs,
        #[arg(short = 'H', long, default_value_t = 1)]
        h: usize,
        #[arg(short, long, default_value_t = 1.0)]
        beta: f64,
    },
}

#[derive(Args)]
struct MultilevelArgs {
    #[arg(short, long)]
    k: f64,
    #[arg(short, long)]
    l: f64,
    #[arg(short, long)]
    theta: f64,
    #[arg(short, long)]
    n: usize,
    #[arg(short, long)]
    m: usize,
    /// Homogeneous latency such as x, x^2 or 2*x^3 + x.
    #[arg(short = 'f', long, default_value = "x")]
    latency: Latency,
}

impl MultilevelArgs {
    fn params(&self) -> MultilevelParams<f64> {
        MultilevelParams { k: self.k, l: self.l, f: self.latency.clone(), theta: self.theta, n: self.n, m: self.m }
    }
}

fn parse_speed(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected TYPE=SPEED")?;
    let v: f64 = value.trim().parse().map_err(|e| format!("bad speed: {e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err("speed must be positive".into());
    }
    Ok((name.trim().to_ascii_lowercase(), v))
}

fn parse_mixture(s: &str) -> Result<Vec<MixtureComponent>, String> {
    s.split(',')
        .map(|part| {
            let (w, t) = part.split_once(':').ok_or("expected WEIGHT:THETA pairs")?;
            Ok(MixtureComponent {
                weight: w.trim().parse().map_err(|e| format!("bad weight: {e}"))?,
                theta: t.trim().parse().map_err(|e| format!("bad theta: {e}"))?,
            })
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 3,
        Error::Csv(c) if c.is_io_error() => 3,
        Error::NotConverged { .. } => 4,
        _ => 2,
    }
}

type CliResult = freeflow::Result<ExitCode>;

fn run(command: Command) -> CliResult {
    match command {
        Command::Bounds { p, q, theta, topology, output } => {
            check_output(&output)?;
            let query = BoundQuery { p, q, theta, topology };
            let r = bounds::poa_bound(&query)?;
            let theta_json = match theta {
                Extended::Finite(t) => json!(round6(t)),
                Extended::Infinite => json!("inf"),
            };
            let out = json!({
                "p": p,
                "q": q,
                "theta": theta_json,
                "topology": topology,
                "value": round6(r.value),
                "gamma": round6(r.gamma),
                "theta_term": round6(r.theta_term),
                "theta_term_kind": r.theta_term_kind,
                "method": r.method,
            });
            emit_json(&output, &out)?;
        }
        Command::Table1 { output } => {
            check_output(&output)?;
            let rows = bounds::table1::<f64>()?;
            with_output(&output, |w| bounds::write_table1_csv(&rows, w))?;
        }
        Command::Curves { p, q, theta_max, steps, output } => {
            check_output(&output)?;
            let rows = bounds::curves::<f64>(p, q, theta_max, steps)?;
            with_output(&output, |w| bounds::write_curve_csv(&rows, true, w))?;
        }
        Command::Solve { solve, objective, init } => {
            check_output(&solve.output)?;
            let instance = load_instance(&solve.instance)?;
            let config = solver_config(&solve)?;
            let objective = match objective {
                ObjectiveArg::Equilibrium => Objective::Equilibrium,
                ObjectiveArg::Optimum => Objective::Optimum,
            };
            let converged = match &instance {
                Instance::Congestion(g) => solve_one(g, objective, &config, &init, &solve.output)?,
                Instance::Network(g) => solve_one(g, objective, &config, &init, &solve.output)?,
            };
            if !converged {
                eprintln!("error: solver did not reach tolerance {}", config.tol);
                return Ok(ExitCode::from(4));
            }
        }
        Command::Poa { solve, brute_force } => {
            check_output(&solve.output)?;
            let instance = load_instance(&solve.instance)?;
            let config = solver_config(&solve)?;
            let mut report = match &instance {
                Instance::Congestion(g) => poa_report_json(g, &solver::price_of_anarchy(g, &config)?),
                Instance::Network(g) => poa_report_json(g, &solver::price_of_anarchy(g, &config)?),
            };
            if let Some(resolution) = brute_force {
                let game = match &instance {
                    Instance::Congestion(g) => g.clone(),
                    Instance::Network(g) => g.to_congestion_game(freeflow::network::DEFAULT_PATH_LIMIT)?,
                };
                let b = brute_force_poa(&game, resolution)?;
                report["brute_force"] = json!({
                    "resolution": resolution,
                    "poa": b.ratio,
                    "eq_cost": b.eq_cost,
                    "opt_cost": b.opt_cost,
                });
            }
            emit_json(&solve.output, &report)?;
        }
        Command::Generate { kind, output } => {
            check_output(&output)?;
            match kind {
                GenerateKind::Pigou { c } => emit_generated(&generators::gen_pigou_like(c)?, &output)?,
                GenerateKind::Multilevel { params } => {
                    emit_generated(&generators::gen_multilevel_lb(&params.params())?, &output)?
                }
                GenerateKind::ParallelGamma { p, q, denominator, k1, l1, f1, k2, l2, f2, n } => {
                    let params = match (p, q, k1, l1, f1, k2, l2, f2, n) {
                        (Some(p), Some(q), ..) => ParallelGammaParams::tight_for_degrees(p, q, denominator)?,
                        (_, _, Some(k1), Some(l1), Some(f1), Some(k2), Some(l2), Some(f2), Some(n)) => {
                            ParallelGammaParams { k1, l1, f1, k2, l2, f2, n }
                        }
                        _ => {
                            return Err(Error::Precondition(
                                "give either -p/-q or all of --k1 --l1 --f1 --k2 --l2 --f2 -n".into(),
                            ))
                        }
                    };
                    emit_generated(&generators::gen_parallel_gamma(&params)?, &output)?
                }
                GenerateKind::TwolinkEta { k, l, theta, latency } => {
                    emit_generated(&generators::gen_twolink_eta(k, l, &latency, theta)?, &output)?
                }
                GenerateKind::NetworkExpansion { params, h, beta } => {
                    emit_generated(&generators::expand_to_network(&params.params(), h, beta)?, &output)?
                }
            }
        }
        Command::EstimateTheta { nodes, edges, traces, snap_radius, small_gap, speeds, threads, summary, output } => {
            check_output(&output)?;
            check_output(&summary)?;
            let (nodes, edges, traces) = (open(&nodes)?, open(&edges)?, open(&traces)?);
            let config = EstimatorConfig { snap_radius_m: snap_radius, small_gap_threshold_m: small_gap, threads };
            config.validate()?;
            let mut table = SpeedTable::default();
            table.0.extend(speeds);
            let graph = RoadGraph::from_csv(nodes, edges, &table)?;
            let traces = read_traces(traces)?;

            let mut estimates = Vec::with_capacity(traces.len());
            let mut failed = Vec::new();
            for (trace, result) in traces.iter().zip(estimate_all(&graph, &traces, &config)) {
                match result {
                    Ok(e) => estimates.push(e),
                    Err(e) => {
                        eprintln!("warning: trip {} skipped: {e}", trace.trip_id());
                        failed.push(trace.trip_id().to_string());
                    }
                }
            }
            with_output(&output, |w| write_estimates_csv(&estimates, w))?;
            let theta: Vec<f64> = estimates.iter().map(|e| e.theta_hat).collect();
            let mut report = serde_json::to_value(deviation_distribution(&theta)?)?;
            report["failed_trips"] = json!(failed);
            let text = serde_json::to_string_pretty(&report)?;
            match &summary {
                Some(path) => write_file(path, |w| Ok(writeln!(w, "{text}")?))?,
                None => eprintln!("{text}"),
            }
        }
        Command::SynthGrid { out_dir, rows, cols, spacing, trips, mixture, interval, noise, drop, seed } => {
            std::fs::create_dir_all(&out_dir)?;
            let grid = GridNetwork::new(rows, cols, spacing)?;
            let spec = FleetSpec {
                trips,
                mixture: match mixture {
                    Some(text) => parse_mixture(&text).map_err(Error::Parse)?,
                    None => FleetSpec::default_mixture(),
                },
                trace: TraceSpec { sample_interval_s: interval, noise_std_m: noise, drop_prob: drop },
                seed,
            };
            let fleet = grid.fleet(&spec)?;
            let traces: Vec<_> = fleet.iter().map(|t| t.trace.clone()).collect();
            write_file(&out_dir.join("nodes.csv"), |w| grid.graph().write_nodes_csv(w))?;
            write_file(&out_dir.join("edges.csv"), |w| grid.graph().write_edges_csv(w, false))?;
            write_file(&out_dir.join("traces.csv"), |w| write_traces_csv(&traces, w))?;
            write_file(&out_dir.join("planted.csv"), |w| write_planted_csv(&fleet, w))?;
            println!("wrote {} trips to {}", fleet.len(), out_dir.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn solver_config(args: &SolveArgs) -> freeflow::Result<SolverConfig<f64>> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    Ok(SolverConfig { tol: args.tol, max_iters: args.max_iters })
}

fn parse_init<P>(s: &str) -> freeflow::Result<Init<P>> {
    match s.trim() {
        "free-flow" => Ok(Init::FreeFlow),
        "uniform" => Ok(Init::Uniform),
        other => match other.strip_prefix("random:").map(str::parse::<u64>) {
            Some(Ok(seed)) => Ok(Init::Random(seed)),
            _ => Err(Error::Parse(format!("unknown init {other:?}, expected free-flow, uniform or random:SEED"))),
        },
    }
}

fn solve_one<G: DescribeProfile>(
    game: &G,
    objective: Objective,
    config: &SolverConfig<f64>,
    init: &str,
    output: &Option<PathBuf>,
) -> freeflow::Result<bool> {
    let report = solver::solve(game, objective, config, parse_init(init)?)?;
    emit_json(output, &solve_report_json(game, objective, &report))?;
    Ok(report.converged)
}

fn emit_generated<G>(inst: &GeneratedInstance<f64, G>, output: &Option<PathBuf>) -> freeflow::Result<()>
where
    G: RoutingGame<f64> + InstanceJson,
{
    let instance = inst.game.instance_json();
    let sidecar = serde_json::to_value(inst.sidecar())?;
    match output {
        Some(path) => {
            let sidecar_path = sidecar_path(path);
            write_file(path, |w| Ok(serde_json::to_writer_pretty(w, &instance)?))?;
            write_file(&sidecar_path, |w| Ok(serde_json::to_writer_pretty(w, &sidecar)?))?;
            println!("{}", serde_json::to_string_pretty(&sidecar)?);
        }
        None => println!("{}", serde_json::to_string_pretty(&json!({ "instance": instance, "sidecar": sidecar }))?),
    }
    Ok(())
}

trait InstanceJson {
    fn instance_json(&self) -> Value;
}

impl InstanceJson for freeflow::Game {
    fn instance_json(&self) -> Value {
        freeflow::io::congestion_to_json(self)
    }
}

impl InstanceJson for freeflow::Network {
    fn instance_json(&self) -> Value {
        freeflow::io::network_to_json(self)
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.sidecar.json"))
}

fn load_instance(path: &Path) -> freeflow::Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| io_context(e, path))?;
    parse_instance(&text)
}

fn open(path: &Path) -> freeflow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| io_context(e, path))?))
}

fn io_context(e: io::Error, path: &Path) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Fails early when an output file could not be created.
fn check_output(output: &Option<PathBuf>) -> freeflow::Result<()> {
    if let Some(path) = output {
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(io_context(io::Error::new(io::ErrorKind::NotFound, "directory does not exist"), parent));
        }
    }
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> freeflow::Result<()>) -> freeflow::Result<()> {
    let file = File::create(path).map_err(|e| io_context(e, path))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn with_output(
    output: &Option<PathBuf>,
    body: impl FnOnce(&mut dyn Write) -> freeflow::Result<()>,
) -> freeflow::Result<()> {
    match output {
        Some(path) => write_file(path, body),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn emit_json(output: &Option<PathBuf>, value: &Value) -> freeflow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    with_output(output, |w| Ok(writeln!(w, "{text}")?))
}
