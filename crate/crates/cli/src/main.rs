//! `silif` command-line tool: training, evaluation and analysis pipelines.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use silif::analysis::{
    eventssm_sops, format_millions, spectrum, write_activity, write_eigen_pairs, write_spectrum_summary, RunTrace,
    SopOptions,
};
use silif::config::{defaults_text, parse_config, RunConfig};
use silif::data::{bin_events, gen_synthetic, load_spkt, parse_events, save_spkt, SpikeTensor};
use silif::engine::{finite_difference_check, spread_probes};
use silif::network::{Mode, Network};
use silif::numerics::{streams, Rng};
use silif::training::{append_record, evaluate, load_model, train, Checkpoint, LogRecord};

#[derive(Parser)]
#[command(name = "silif", version, about = "Spiking networks with SSM-parametrised adaptive neurons")]
struct Cli {
    /// Print the default configuration and exit.
    #[arg(long)]
    print_defaults: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a network and keep the best-by-validation checkpoint.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for `log.jsonl` and `best.slck`.
        #[arg(long, default_value = "run")]
        out: PathBuf,
    },
    /// Report accuracy, sparsity and SOPs of a checkpoint.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Data to evaluate on; defaults to the test split of the
        /// checkpoint's own configuration.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 128)]
        batch: usize,
    },
    /// Eigenvalues of every hidden layer's transition matrices.
    AnalyzeEigen {
        /// Trained checkpoint; without it a fresh network is built from `--config`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write `re im` pairs here for plotting.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Per-layer activity, sparsity and synaptic operations.
    ProfileSops {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Count real-valued input features as dense multiply-accumulates.
        #[arg(long)]
        dense_as_macs: bool,
        #[arg(long, default_value_t = 128)]
        batch: usize,
    },
    /// Synaptic operations of the two-block Event-SSM arithmetic.
    SopCalcEventssm {
        #[arg(long)]
        state: u64,
        /// Events reaching the first block.
        #[arg(long)]
        events: u64,
        /// Events reaching the second block.
        #[arg(long)]
        events2: u64,
        /// SSM layers in the second block.
        #[arg(long, default_value_t = 3)]
        ssm: u64,
        /// Dense layers in the second block.
        #[arg(long, default_value_t = 2)]
        dense: u64,
    },
    /// Generate one split of the synthetic spike-pattern task.
    GenSynthetic {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = ["train", "val", "test"], default_value = "train")]
        split: String,
        /// Task parameters from the `[data.synthetic]` section of a config.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Bin a text event stream into a spike tensor file.
    ConvertEvents {
        /// One `time_us,channel` pair per line, samples separated by blank lines.
        #[arg(long)]
        events: PathBuf,
        /// One label per sample.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        channels: usize,
        #[arg(long, default_value_t = 1.0)]
        bin_ms: f64,
        #[arg(long, default_value_t = 1)]
        pool: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-difference check of the reverse pass; fails above `--tol`.
    Gradcheck {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        batch: usize,
        #[arg(long, default_value_t = 20)]
        timesteps: usize,
        #[arg(long, default_value_t = 3)]
        probes_per_tensor: usize,
        #[arg(long, default_value_t = 1e-6)]
        h: f64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}

fn read_config(path: Option<&Path>) -> Result<(RunConfig, String)> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("cannot read config {}", p.display()))?,
        None => String::new(),
    };
    let cfg = parse_config(&text).with_context(|| match path {
        Some(p) => format!("invalid config {}", p.display()),
        None => "invalid default config".to_string(),
    })?;
    Ok((cfg, text))
}

fn config_dir(path: Option<&Path>) -> PathBuf {
    path.and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default()
}

fn load_checkpoint(path: &Path) -> Result<(RunConfig, Network)> {
    let ckpt = Checkpoint::load(path).with_context(|| format!("cannot read checkpoint {}", path.display()))?;
    Ok(load_model(&ckpt)?)
}

fn eval_data(cfg: &RunConfig, data: Option<&Path>) -> Result<SpikeTensor> {
    if let Some(p) = data {
        return load_spkt(p).with_context(|| format!("cannot load {}", p.display()));
    }
    let d = cfg.load_data(Path::new(""))?;
    d.test.context("no --data given and the checkpoint's config names no test set")
}

fn cmd_train(config: Option<&Path>, out: &Path) -> Result<()> {
    let (cfg, text) = read_config(config)?;
    let data = cfg.load_data(&config_dir(config))?;
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let log_path = out.join("log.jsonl");
    let mut log = BufWriter::new(File::create(&log_path)?);
    let outcome = train(&cfg, &text, &data.train, &data.val, &mut |r| append_record(&mut log, r))?;
    if let Some(best) = &outcome.best {
        best.save(&out.join("best.slck"))?;
    }
    if let Some(test) = &data.test {
        let net = match &outcome.best {
            Some(b) => load_model(b)?.1,
            None => outcome.network,
        };
        let opts = SopOptions {
            delays: net.has_delays(),
            dense_as_macs: cfg.eval.dense_as_macs,
        };
        let r = evaluate(&net, test, cfg.batch, opts, cfg.seed)?;
        append_record(
            &mut log,
            &LogRecord {
                epoch: outcome.best_epoch,
                split: "test".into(),
                loss: r.loss,
                accuracy: r.accuracy,
                sparsity: r.sparsity,
                sops: r.sops,
                lr_weights: 0.0,
                lr_delays: 0.0,
            },
        )?;
        println!("test_accuracy={:.6} sparsity={:.6} sops={:.1}", r.accuracy, r.sparsity, r.sops);
    }
    println!(
        "best_epoch={} best_val_accuracy={:.6} log={}",
        outcome.best_epoch,
        outcome.best_accuracy,
        log_path.display()
    );
    Ok(())
}

fn cmd_eval(checkpoint: &Path, data: Option<&Path>, batch: usize) -> Result<()> {
    let (cfg, net) = load_checkpoint(checkpoint)?;
    let data = eval_data(&cfg, data)?;
    let opts = SopOptions {
        delays: net.has_delays(),
        dense_as_macs: cfg.eval.dense_as_macs,
    };
    let r = evaluate(&net, &data, batch, opts, cfg.seed)?;
    println!(
        "samples={} loss={:.6} accuracy={:.6} sparsity={:.6} sops={:.1}",
        r.samples, r.loss, r.accuracy, r.sparsity, r.sops
    );
    Ok(())
}

fn cmd_analyze_eigen(checkpoint: Option<&Path>, config: Option<&Path>, pairs: Option<&Path>) -> Result<()> {
    let net = match checkpoint {
        Some(p) => load_checkpoint(p)?.1,
        None => {
            let (cfg, _) = read_config(config)?;
            let s = &cfg.data.synthetic;
            Network::new(&cfg.network(s.channels, s.classes), cfg.seed)?
        }
    };
    let report = spectrum(&net)?;
    let stdout = std::io::stdout();
    write_spectrum_summary(&mut stdout.lock(), &report)?;
    if let Some(p) = pairs {
        let mut f = BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?);
        write_eigen_pairs(&mut f, &report)?;
        f.flush()?;
    }
    Ok(())
}

fn cmd_profile_sops(checkpoint: &Path, data: Option<&Path>, dense_as_macs: bool, batch: usize) -> Result<()> {
    let (cfg, net) = load_checkpoint(checkpoint)?;
    let data = eval_data(&cfg, data)?;
    let mut trace = RunTrace::default();
    let idx: Vec<usize> = (0..data.samples()).collect();
    let mut rng = Rng::new(cfg.seed, streams::EVAL);
    for chunk in idx.chunks(batch.max(1)) {
        let (x, _) = data.gather(chunk);
        trace.merge(&net.forward(&x, Mode::Eval, &mut rng)?.trace);
    }
    let opts = SopOptions {
        delays: net.has_delays(),
        dense_as_macs: dense_as_macs || cfg.eval.dense_as_macs,
    };
    write_activity(&mut std::io::stdout().lock(), &trace, opts)?;
    Ok(())
}

fn cmd_sop_calc(state: u64, events: u64, events2: u64, ssm: u64, dense: u64) -> Result<()> {
    let r = eventssm_sops(state, events, events2, ssm, dense);
    println!("block1={} ({})", r.block1, format_millions(r.block1 as f64));
    println!("block2={} ({})", r.block2, format_millions(r.block2 as f64));
    println!("total={} ({})", r.total, format_millions(r.total as f64));
    println!("{}", format_millions(r.total as f64));
    Ok(())
}

fn cmd_gen_synthetic(seed: u64, out: &Path, split: &str, config: Option<&Path>) -> Result<()> {
    let (cfg, _) = read_config(config)?;
    let mut spec = cfg.data.synthetic;
    spec.seed = seed;
    let splits = gen_synthetic(&spec)?;
    let t = match split {
        "train" => &splits.train,
        "val" => &splits.val,
        _ => &splits.test,
    };
    save_spkt(out, t).with_context(|| format!("cannot write {}", out.display()))?;
    println!("wrote {} samples ({split}) to {}", t.samples(), out.display());
    Ok(())
}

fn cmd_convert_events(events: &Path, labels: &Path, channels: usize, bin_ms: f64, pool: usize, out: &Path) -> Result<()> {
    let ev = std::fs::read_to_string(events).with_context(|| format!("cannot read {}", events.display()))?;
    let lb = std::fs::read_to_string(labels).with_context(|| format!("cannot read {}", labels.display()))?;
    let streams = parse_events(&ev, &lb)?;
    let t = bin_events(&streams, channels, bin_ms, pool)?;
    save_spkt(out, &t)?;
    println!(
        "wrote {} samples × {} bins × {} channels to {}",
        t.samples(),
        t.timesteps(),
        t.channels(),
        out.display()
    );
    Ok(())
}

fn cmd_gradcheck(
    config: Option<&Path>,
    batch: usize,
    timesteps: usize,
    per_tensor: usize,
    h: f64,
    tol: f64,
) -> Result<bool> {
    let (cfg, _) = read_config(config)?;
    let s = &cfg.data.synthetic;
    let net = Network::new(&cfg.network(s.channels, s.classes), cfg.seed)?;
    let mut rng = Rng::new(cfg.seed, streams::DATA_SAMPLES);
    let x = ndarray::Array3::from_shape_simple_fn((batch.max(1), timesteps.max(1), s.channels), || {
        rng.bernoulli(0.2) as u8 as f64
    });
    let probes = spread_probes(&net, per_tensor);
    let report = finite_difference_check(&net, &x, &probes, h, cfg.seed)?;
    for r in &report.results {
        println!(
            "{}[{}] analytic={:.10e} numeric={:.10e} rel_err={:.3e}",
            r.probe.name, r.probe.index, r.analytic, r.numeric, r.rel_err
        );
    }
    let ok = report.max_rel_err < tol;
    println!(
        "probes={} max_rel_err={:.3e} tol={tol:e} {}",
        report.results.len(),
        report.max_rel_err,
        if ok { "PASS" } else { "FAIL" }
    );
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    let Some(command) = cli.command else {
        bail!("no subcommand given");
    };
    match command {
        Command::Train { config, out } => cmd_train(config.as_deref(), &out)?,
        Command::Eval { checkpoint, data, batch } => cmd_eval(&checkpoint, data.as_deref(), batch)?,
        Command::AnalyzeEigen {
            checkpoint,
            config,
            pairs,
        } => cmd_analyze_eigen(checkpoint.as_deref(), config.as_deref(), pairs.as_deref())?,
        Command::ProfileSops {
            checkpoint,
            data,
            dense_as_macs,
            batch,
        } => cmd_profile_sops(&checkpoint, data.as_deref(), dense_as_macs, batch)?,
        Command::SopCalcEventssm {
            state,
            events,
            events2,
            ssm,
            dense,
        } => cmd_sop_calc(state, events, events2, ssm, dense)?,
        Command::GenSynthetic {
            seed,
            out,
            split,
            config,
        } => cmd_gen_synthetic(seed, &out, &split, config.as_deref())?,
        Command::ConvertEvents {
            events,
            labels,
            channels,
            bin_ms,
            pool,
            out,
        } => cmd_convert_events(&events, &labels, channels, bin_ms, pool, &out)?,
        Command::Gradcheck {
            config,
            batch,
            timesteps,
            probes_per_tensor,
            h,
            tol,
        } => return cmd_gradcheck(config.as_deref(), batch, timesteps, probes_per_tensor, h, tol),
    }
    Ok(true)
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("SILIF_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .with_context(|| format!("SILIF_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        bail!("SILIF_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.print_defaults {
        print!("{}", defaults_text());
        return ExitCode::SUCCESS;
    }
    if cli.command.is_none() {
        eprintln!("error: a subcommand is required\n\nRun `silif --help` for usage.");
        return ExitCode::from(2);
    }
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
