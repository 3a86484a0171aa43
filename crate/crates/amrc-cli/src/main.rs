//! `amrc`: run an adaptive minimax risk classifier over a stream, or emit
//! the synthetic drift stream as CSV.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use amrc_core::datagen::{self, SyntheticConfig};
use amrc_core::harness::{
    emit_results, run_online, DatasetSource, MapChoice, RuleChoice, RunConfig, TrackingMode,
};

#[derive(Parser)]
#[command(name = "amrc", version, about = "Adaptive minimax risk classification for streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the online classifier over a CSV or synthetic stream.
    Run(RunArgs),
    /// Emit the synthetic drift stream as CSV (columns x1,x2,y).
    Synth(SynthArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum MapArg {
    Linear,
    Rff,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Multidim,
    Unidim,
}

#[derive(Copy, Clone, ValueEnum)]
enum RuleArg {
    Randomized,
    Deterministic,
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// CSV path, or "synthetic" for the built-in drift stream.
    #[arg(long)]
    dataset: String,
    /// Zero-based label column for CSV input (default: last column).
    #[arg(long)]
    label_column: Option<usize>,
    /// Stream length when the dataset is synthetic.
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// Angular drift rate of the synthetic stream.
    #[arg(long, default_value_t = 0.1)]
    omega: f64,
    #[arg(long, value_enum, default_value_t = MapArg::Linear)]
    map: MapArg,
    /// Number of random Fourier frequency vectors.
    #[arg(long, default_value_t = 200)]
    rff_dim: usize,
    /// Gaussian scale of the frequency vectors (default: median heuristic).
    #[arg(long)]
    rff_scale: Option<f64>,
    /// Highest tracked derivative order of the kinematic model.
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Sliding-window length for label probabilities.
    #[arg(long, default_value_t = 200)]
    window: usize,
    /// Subgradient-row cache capacity.
    #[arg(long, default_value_t = 100)]
    cache: usize,
    /// Optimizer iterations per step.
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Confidence level of the accumulated-mistake bound.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Multidim)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = RuleArg::Both)]
    rule: RuleArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inflate the confidence vector with the analytic estimation error
    /// (synthetic stream with the linear map only).
    #[arg(long, default_value_t = false)]
    oracle_lambda: bool,
    /// Output CSV path; a JSON summary is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0.1)]
    omega: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    if args.delta <= 0.0 || args.delta >= 1.0 {
        bail!("--delta must lie strictly between 0 and 1");
    }
    let dataset = if args.dataset == "synthetic" {
        let mut scfg = SyntheticConfig::new(args.steps, args.seed);
        scfg.omega = args.omega;
        DatasetSource::Synthetic(scfg)
    } else {
        DatasetSource::Csv(PathBuf::from(&args.dataset), args.label_column)
    };
    let cfg = RunConfig {
        dataset,
        map: match args.map {
            MapArg::Linear => MapChoice::Linear,
            MapArg::Rff => MapChoice::Rff { dim: args.rff_dim, scale: args.rff_scale },
        },
        order: args.order,
        window: args.window,
        cache: args.cache,
        iterations: args.iters,
        delta: args.delta,
        mode: match args.mode {
            ModeArg::Multidim => TrackingMode::Multidim,
            ModeArg::Unidim => TrackingMode::Unidim,
        },
        rule: match args.rule {
            RuleArg::Randomized => RuleChoice::Randomized,
            RuleArg::Deterministic => RuleChoice::Deterministic,
            RuleArg::Both => RuleChoice::Both,
        },
        seed: args.seed,
        max_subset_size: None,
        oracle_lambda: args.oracle_lambda,
    };
    let output = run_online(&cfg).context("online run failed")?;
    emit_results(&output, &args.out)
        .with_context(|| format!("writing results to {}", args.out.display()))?;
    let s = &output.summary;
    println!(
        "steps={} error_rand={:.2}% error_det={:.2}% bound_per_step={:.4}",
        s.steps, s.error_pct_rand, s.error_pct_det, s.final_bound_per_step
    );
    println!("trace: {}", args.out.display());
    Ok(())
}

fn synth(args: SynthArgs) -> anyhow::Result<()> {
    if args.steps == 0 {
        bail!("--steps must be positive");
    }
    let mut scfg = SyntheticConfig::new(args.steps, args.seed);
    scfg.omega = args.omega;
    let stream = datagen::stream(&scfg);
    let mut writer = csv::Writer::from_path(&args.out)
        .with_context(|| format!("opening {}", args.out.display()))?;
    writer.write_record(["x1", "x2", "y"])?;
    for (x, y) in &stream {
        writer.write_record([x[0].to_string(), x[1].to_string(), y.to_string()])?;
    }
    writer.flush()?;
    println!("wrote {} rows to {}", stream.len(), args.out.display());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Synth(args) => synth(args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn synth_then_run_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let stream_path = dir.path().join("stream.csv");
        synth(SynthArgs { omega: 0.1, steps: 30, seed: 1, out: stream_path.clone() }).unwrap();
        let out = dir.path().join("trace.csv");
        run(RunArgs {
            dataset: stream_path.display().to_string(),
            label_column: None,
            steps: 0,
            omega: 0.1,
            map: MapArg::Linear,
            rff_dim: 200,
            rff_scale: None,
            order: 1,
            window: 200,
            cache: 10,
            iters: 50,
            delta: 0.05,
            mode: ModeArg::Multidim,
            rule: RuleArg::Both,
            seed: 1,
            oracle_lambda: false,
            out: out.clone(),
        })
        .unwrap();
        assert!(out.exists());
        assert!(dir.path().join("trace.json").exists());
    }

    #[test]
    fn rejects_bad_delta() {
        let dir = tempfile::tempdir().unwrap();
        let err = run(RunArgs {
            dataset: "synthetic".into(),
            label_column: None,
            steps: 5,
            omega: 0.1,
            map: MapArg::Linear,
            rff_dim: 200,
            rff_scale: None,
            order: 1,
            window: 200,
            cache: 10,
            iters: 10,
            delta: 1.5,
            mode: ModeArg::Multidim,
            rule: RuleArg::Both,
            seed: 0,
            oracle_lambda: false,
            out: dir.path().join("x.csv"),
        })
        .unwrap_err();
        assert!(err.to_string().contains("delta"));
    }
}
