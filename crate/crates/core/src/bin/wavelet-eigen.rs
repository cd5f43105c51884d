use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use wavelet_eigen::estimate::{estimate_hurst_with, estimate_rank_with, regression_weights, RegressionWeights};
use wavelet_eigen::harness::{run_experiment, synthesize_point, ExperimentConfig, ExperimentResult};
use wavelet_eigen::io;
use wavelet_eigen::pyramid::transform_range;
use wavelet_eigen::specmat::{multi_scale_spectrum, WaveletSpectrum};
use wavelet_eigen::{daubechies_filters, figure1_trajectories, Error, Result};

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "wavelet-eigen", version, about = "Wavelet eigenanalysis of high-dimensional fractional series")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "jsonl")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the observed series of one schedule point and replication.
    Synth {
        #[arg(long, default_value_t = 0)]
        point: usize,
        #[arg(long, default_value_t = 0)]
        replication: usize,
    },
    /// Wavelet detail coefficients of a series CSV (rows = components).
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        j1: u32,
        #[arg(long)]
        j2: u32,
        /// Number of vanishing moments (default: config or 2).
        #[arg(long)]
        filter_order: Option<usize>,
    },
    /// Per-octave wavelet eigenvalues of a series CSV.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        j1: u32,
        #[arg(long)]
        j2: u32,
        #[arg(long)]
        filter_order: Option<usize>,
        /// Also write the full wavelet matrices.
        #[arg(long)]
        matrices: bool,
    },
    /// Exponent and rank estimates from spectra JSONL or a series CSV.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        j1: u32,
        #[arg(long)]
        j2: u32,
        /// Number of exponents (default: config r, else the rank estimate).
        #[arg(long)]
        rank: Option<usize>,
        /// Rank threshold (default: config or 0.1).
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        filter_order: Option<usize>,
    },
    /// Run the Monte Carlo experiment described by --config.
    Mc,
}

enum Outcome {
    Ok,
    Partial(usize),
}

fn load_config(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let text = fs::read_to_string(path)?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(Some(cfg))
}

fn require_config(cfg: Option<ExperimentConfig>) -> Result<ExperimentConfig> {
    cfg.ok_or_else(|| Error::InvalidInput("--config is required for this command".into()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn filter_order(flag: Option<usize>, cfg: &Option<ExperimentConfig>) -> usize {
    flag.or(cfg.as_ref().map(|c| c.filter_order)).unwrap_or(2)
}

fn write_spectra(out: &Path, spectra: &[WaveletSpectrum], format: Format) -> Result<PathBuf> {
    match format {
        Format::Jsonl => {
            let path = out.join("spectra.jsonl");
            io::write_spectra_jsonl(&path, spectra)?;
            Ok(path)
        }
        Format::Csv => {
            let path = out.join("spectra.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["j", "n_j", "index", "eigenvalue"])?;
            for s in spectra {
                for (i, v) in s.eigenvalues.iter().enumerate() {
                    w.write_record([s.octave.to_string(), s.n_j.to_string(), (i + 1).to_string(), format!("{v:e}")])?;
                }
            }
            w.flush()?;
            Ok(path)
        }
    }
}

fn write_trajectories(out: &Path, spectra: &[WaveletSpectrum]) -> Result<()> {
    let t = figure1_trajectories(spectra);
    let mut w = csv::Writer::from_path(out.join("trajectories.csv"))?;
    w.write_record(["q", "j", "value"])?;
    for q in 1..=t.values.len() {
        for (k, v) in t.from_top(q).iter().enumerate() {
            if let Some(v) = v {
                w.write_record([q.to_string(), t.octaves[k].to_string(), v.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn load_spectra(input: &Path, j1: u32, j2: u32, order: usize) -> Result<Vec<WaveletSpectrum>> {
    if input.extension().is_some_and(|e| e == "jsonl") {
        io::read_spectra_jsonl(input)
    } else {
        let y = io::read_series_csv(input)?;
        multi_scale_spectrum(&y, j1, j2, &daubechies_filters(order)?)
    }
}

fn write_mc(out: &Path, res: &ExperimentResult, format: Format) -> Result<()> {
    match format {
        Format::Jsonl => {
            let mut w = BufWriter::new(File::create(out.join("records.jsonl"))?);
            for r in &res.records {
                serde_json::to_writer(&mut w, r)?;
                writeln!(w)?;
            }
            w.flush()?;
        }
        Format::Csv => {
            let rank = res.config.rank();
            let mut w = csv::Writer::from_path(out.join("records.csv"))?;
            let mut header: Vec<String> = ["point", "replication", "seed", "r_hat"].map(String::from).to_vec();
            header.extend((1..=rank).map(|q| format!("h_hat_{q}")));
            header.push("error".into());
            w.write_record(&header)?;
            for r in &res.records {
                let mut row = vec![
                    r.point.to_string(),
                    r.replication.to_string(),
                    r.seed.to_string(),
                    r.r_hat.map_or(String::new(), |v| v.to_string()),
                ];
                for q in 0..rank {
                    row.push(r.h_hat.as_ref().map_or(String::new(), |h| h[q].to_string()));
                }
                row.push(r.error.clone().unwrap_or_default());
                w.write_record(&row)?;
            }
            w.flush()?;
        }
    }
    write_json(
        &out.join("aggregate.json"),
        &json!({ "config": res.config, "complete": res.failures() == 0, "points": res.aggregates }),
    )?;
    let mut w = csv::Writer::from_path(out.join("trajectories.csv"))?;
    w.write_record(["point", "q", "j", "value", "log_ratio", "count"])?;
    for t in res.trajectories() {
        w.write_record([
            t.point.to_string(),
            t.q.to_string(),
            t.j.to_string(),
            t.value.to_string(),
            t.log_ratio.to_string(),
            t.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }
    let cfg = load_config(cli)?;
    fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();

    match &cli.command {
        Command::Synth { point, replication } => {
            let cfg = require_config(cfg)?;
            let y = synthesize_point(&cfg, *point, *replication)?;
            match cli.format {
                Format::Csv => io::write_series_csv(&out.join("series.csv"), &y)?,
                Format::Jsonl => {
                    let mut w = BufWriter::new(File::create(out.join("series.jsonl"))?);
                    for row in y.rows() {
                        serde_json::to_writer(&mut w, row)?;
                        writeln!(w)?;
                    }
                    w.flush()?;
                }
            }
            log::info!("wrote {} x {} series", y.p(), y.n());
        }
        Command::Transform { input, j1, j2, filter_order: order } => {
            let y = io::read_series_csv(input)?;
            let f = daubechies_filters(filter_order(*order, &cfg))?;
            let d = transform_range(&y, *j1, *j2, &f)?;
            io::write_detail_set(out, &d)?;
        }
        Command::Analyze { input, j1, j2, filter_order: order, matrices } => {
            let y = io::read_series_csv(input)?;
            let spectra = multi_scale_spectrum(&y, *j1, *j2, &daubechies_filters(filter_order(*order, &cfg))?)?;
            write_spectra(out, &spectra, cli.format)?;
            write_trajectories(out, &spectra)?;
            if *matrices {
                io::write_matrices_csv(out, &spectra)?;
            }
        }
        Command::Estimate { input, j1, j2, rank, tau, filter_order: order } => {
            let spectra = load_spectra(input, *j1, *j2, filter_order(*order, &cfg))?;
            let weights: RegressionWeights = match cfg.as_ref().and_then(|c| c.estimator.weights.clone()) {
                Some(w) => RegressionWeights::new(*j1, *j2, w)?,
                None => regression_weights(*j1, *j2)?,
            };
            let tau = tau.or(cfg.as_ref().map(|c| c.estimator.tau)).unwrap_or(0.1);
            let rank_est = estimate_rank_with(&spectra, &weights, tau)?;
            let r = rank.or(cfg.as_ref().map(|c| c.rank())).unwrap_or(rank_est.r_hat);
            let h = if r == 0 {
                log::warn!("estimated rank is zero; no exponents reported");
                None
            } else {
                Some(estimate_hurst_with(&spectra, &weights, r)?)
            };
            let slopes: Vec<Option<f64>> = rank_est.slopes.iter().map(|s| s.is_finite().then_some(*s)).collect();
            let report = json!({
                "h_hat": h.map(|h| h.h_hat).unwrap_or_default(),
                "r": r,
                "r_hat": rank_est.r_hat,
                "tau": tau,
                "slopes": slopes,
                "weights": weights.weights,
                "octaves": [j1, j2],
            });
            write_json(&out.join("estimate.json"), &report)?;
            println!("{}", serde_json::to_string(&report)?);
        }
        Command::Mc => {
            let cfg = require_config(cfg)?;
            let res = run_experiment(&cfg)?;
            write_mc(out, &res, cli.format)?;
            let failures = res.failures();
            if failures > 0 {
                return Ok(Outcome::Partial(failures));
            }
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(k)) => {
            eprintln!("error: {k} replications failed; see records for details");
            ExitCode::from(EXIT_PARTIAL)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME })
        }
    }
}
