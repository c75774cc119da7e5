use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use pmac::cs::{build_cs_graph, enumerate_cs_ne, EnumerateOptions, DEFAULT_ENUMERATION_CAP};
use pmac::harness::{run_experiment, trial_rng, ExperimentKind, ExperimentSpec, Format};
use pmac::pa::{solve_pa_ne, PaInit, WaterfillParams};
use pmac::sic::{sic_capacity_at_ne, sic_user_rates, DecodingOrder, Game};
use pmac::two_by_two::{
    classify_cs_2x2, classify_pa_2x2, write_region_map, ChannelQuad, PaEquilibrium, DEFAULT_BOUNDARY_TOL,
};
use pmac::{Error, Instance};

#[derive(Parser)]
#[command(name = "pmac", version, about = "Equilibria of power-allocation and channel-selection games on parallel multiple access channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base seed for random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte-Carlo trials per point.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    /// Largest number of profiles enumerated exhaustively.
    #[arg(long, global = true)]
    cap: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GameArg {
    /// Power allocation.
    A,
    /// Channel selection.
    B,
}

#[derive(Subcommand)]
enum Command {
    /// Power-allocation equilibrium by water-filling best responses.
    SolvePa {
        instance: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long, default_value_t = 100_000)]
        max_rounds: usize,
    },
    /// All channel-selection equilibria by exhaustive search.
    EnumerateCs {
        instance: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tie_tolerance: f64,
        /// Also write the oriented best-response graph as an edge list.
        #[arg(long)]
        edges: Option<PathBuf>,
        /// Also write the vertex table of the graph.
        #[arg(long)]
        vertices: Option<PathBuf>,
    },
    /// Closed-form classification of a two-player two-channel instance.
    #[command(name = "classify-2x2")]
    Classify2x2 {
        /// Instance file with K = S = 2.
        instance: Option<PathBuf>,
        /// Gains g11,g12,g21,g22 (with unit noise) instead of a file.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gains: Option<Vec<f64>>,
        /// Per-channel SNR in dB, used with --gains.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        snr_db: f64,
        /// Write a region map over this many log-spaced ratios in [0.1, 10] instead.
        #[arg(long)]
        map: Option<usize>,
    },
    /// Large-system channel fractions: prediction versus sampled equilibria.
    Fractions {
        #[arg(long, default_value_t = 60)]
        players: usize,
        #[arg(long, value_delimiter = ',')]
        bandwidths: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        snr_db: f64,
    },
    /// Rates under successive interference cancellation at an equilibrium.
    Sic {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = GameArg::A)]
        game: GameArg,
        /// Decoding order as one-based player numbers, e.g. 2,1,3.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
    },
    /// Run an experiment described by a JSON spec.
    Experiment { spec: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::NotConverged { .. } => 2,
                Error::CapExceeded { .. } => 3,
                _ => 1,
            })
        }
    }
}

fn load_instance(path: &Path) -> pmac::Result<Instance> {
    Instance::from_json(&fs::read_to_string(path)?)
}

fn emit(cli: &Cli, text: &str) -> pmac::Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(cli: &Cli, value: &T) -> pmac::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(cli, &text)
}

fn run(cli: &Cli) -> pmac::Result<ExitCode> {
    let cap = cli.cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
    match &cli.command {
        Command::SolvePa {
            instance,
            tolerance,
            max_rounds,
        } => {
            let inst = load_instance(instance)?;
            let params = WaterfillParams {
                br_sweep_tolerance: *tolerance,
                max_rounds: *max_rounds,
                ..Default::default()
            };
            let sol = solve_pa_ne(&inst.gains, &inst.config, &params, PaInit::Uniform)?;
            match cli.format {
                OutputFormat::Json => emit_json(cli, &sol)?,
                OutputFormat::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["player", "channel", "power"])?;
                    for (k, row) in sol.profile.to_rows().iter().enumerate() {
                        for (s, p) in row.iter().enumerate() {
                            w.write_record([(k + 1).to_string(), (s + 1).to_string(), p.to_string()])?;
                        }
                    }
                    emit(cli, &String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).unwrap_or_default())?;
                }
            }
            if !sol.converged {
                eprintln!("error: not converged after {} rounds (residual {:e})", sol.rounds_used, sol.residual);
                return Ok(ExitCode::from(2));
            }
        }
        Command::EnumerateCs {
            instance,
            tie_tolerance,
            edges,
            vertices,
        } => {
            let inst = load_instance(instance)?;
            let options = EnumerateOptions {
                tie_tolerance: *tie_tolerance,
                cap,
            };
            let report = enumerate_cs_ne(&inst.gains, &inst.config, &options)?;
            if edges.is_some() || vertices.is_some() {
                let graph = build_cs_graph(&inst.gains, &inst.config, cap)?;
                if let Some(path) = edges {
                    graph.write_edge_list(io::BufWriter::new(fs::File::create(path)?))?;
                }
                if let Some(path) = vertices {
                    graph.write_vertex_table(io::BufWriter::new(fs::File::create(path)?))?;
                }
            }
            match cli.format {
                OutputFormat::Json => emit_json(cli, &report)?,
                OutputFormat::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["index", "profile", "potential", "nse", "label"])?;
                    for e in &report.equilibria {
                        let profile = e.choices.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
                        w.write_record([
                            e.index.to_string(),
                            profile,
                            e.potential.to_string(),
                            e.nse.to_string(),
                            e.label.clone(),
                        ])?;
                    }
                    emit(cli, &String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).unwrap_or_default())?;
                }
            }
        }
        Command::Classify2x2 {
            instance,
            gains,
            snr_db,
            map,
        } => {
            let snr = 10f64.powf(snr_db / 10.0);
            if let Some(n) = map {
                let n = (*n).max(2);
                let ratios: Vec<f64> = (0..n).map(|i| 10f64.powf(-1.0 + 2.0 * i as f64 / (n - 1) as f64)).collect();
                let mut buf = Vec::new();
                write_region_map(&mut buf, &ratios, snr)?;
                emit(cli, &String::from_utf8(buf).unwrap_or_default())?;
                return Ok(ExitCode::SUCCESS);
            }
            let quad = match (instance, gains) {
                (Some(path), _) => {
                    let inst = load_instance(path)?;
                    ChannelQuad::from_instance(&inst.gains, &inst.config)?
                }
                (None, Some(g)) => {
                    let g: [f64; 4] = g
                        .as_slice()
                        .try_into()
                        .map_err(|_| Error::InvalidConfig("--gains takes exactly four values".into()))?;
                    ChannelQuad::with_snr(g, snr)?
                }
                (None, None) => {
                    return Err(Error::InvalidConfig("give an instance file or --gains".into()));
                }
            };
            let pa = classify_pa_2x2(&quad, DEFAULT_BOUNDARY_TOL)?;
            let cs = classify_cs_2x2(&quad, DEFAULT_BOUNDARY_TOL)?;
            let equilibrium = match &pa.equilibrium {
                PaEquilibrium::Unique(p) => json!({ "profile": p }),
                PaEquilibrium::Continuum(c) => json!({ "continuum": c }),
            };
            let out = json!({
                "snr": quad.snr(),
                "pa": { "region": pa.region.to_string(), "equilibrium": equilibrium, "boundary": pa.boundary },
                "cs": {
                    "regions": cs.regions.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                    "equilibria": cs.equilibria.iter().map(|p| p.one_based()).collect::<Vec<_>>(),
                    "multiple": cs.multiple,
                    "boundary": cs.boundary,
                },
            });
            emit_json(cli, &out)?;
        }
        Command::Fractions {
            players,
            bandwidths,
            snr_db,
        } => {
            let spec = ExperimentSpec {
                num_players: Some(*players),
                snr_grid_db: vec![*snr_db],
                bandwidths: bandwidths.clone(),
                trials: cli.trials.unwrap_or(100),
                seed: cli.seed.unwrap_or(0),
                cap,
                ..ExperimentSpec::new(ExperimentKind::Fractions)
            };
            write_output(cli, &spec)?;
        }
        Command::Sic { instance, game, order } => {
            let inst = load_instance(instance)?;
            let game = match game {
                GameArg::A => Game::PowerAllocation,
                GameArg::B => Game::ChannelSelection,
            };
            let mut rng = trial_rng(cli.seed.unwrap_or(0), 0);
            let mut report = sic_capacity_at_ne(&inst.gains, &inst.config, game, cap, 8, &mut rng)?;
            if let Some(order) = order {
                let zero_based = order
                    .iter()
                    .map(|k| k.checked_sub(1).ok_or_else(|| Error::OutOfRange("players start at 1".into())))
                    .collect::<pmac::Result<Vec<_>>>()?;
                let degraded = report.degraded;
                let profile = match game {
                    Game::PowerAllocation => {
                        solve_pa_ne(&inst.gains, &inst.config, &WaterfillParams::default(), PaInit::Uniform)?.profile
                    }
                    Game::ChannelSelection => {
                        let r = enumerate_cs_ne(&inst.gains, &inst.config, &EnumerateOptions { cap, ..Default::default() })?;
                        let best = r.potential_maximizer().expect("at least one equilibrium");
                        pmac::model::cs_to_power(&best.profile(), &inst.config)?
                    }
                };
                report = sic_user_rates(&profile, &inst.gains, &inst.config, &DecodingOrder::new(zero_based)?)?;
                report.degraded = degraded;
            }
            let out = json!({
                "rates": report.rates,
                "sum_rate": report.sum_rate,
                "order": report.order.iter().map(|k| k + 1).collect::<Vec<_>>(),
                "degraded": report.degraded,
            });
            emit_json(cli, &out)?;
        }
        Command::Experiment { spec } => {
            let mut spec = ExperimentSpec::from_json(&fs::read_to_string(spec)?)?;
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            if let Some(trials) = cli.trials {
                spec.trials = trials;
            }
            if let Some(cap) = cli.cap {
                spec.cap = cap;
            }
            write_output(cli, &spec)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_output(cli: &Cli, spec: &ExperimentSpec) -> pmac::Result<()> {
    let output = run_experiment(spec)?;
    let format = cli.format.into();
    let path = cli.out.clone().or_else(|| spec.output_path.clone().map(PathBuf::from));
    match path {
        Some(p) => output.write_to_path(format, &p),
        None => output.write(format, io::stdout().lock()),
    }
}
