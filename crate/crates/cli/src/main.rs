use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use glad_core::codec::Blob;
use glad_core::datagen::{self, GeneratorConfig, ANNOTATIONS_FILE};
use glad_core::detector::Variant;
use glad_core::eval::{write_report, Harness, SweepAxis, SweepValue};
use glad_core::graph::{build_network, CitationNetwork, CITATIONS_FILE, PAPERS_FILE};
use glad_core::pipeline::{edge_labels, format_predictions, prepare, ModelBundle, PipelineConfig};
use glad_core::purpose::{read_annotations, PurposeModel};

#[derive(Parser)]
#[command(name = "glad", version, about = "Anomalous citation detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic citation-cartel dataset.
    Gen {
        /// Generator settings (TOML); defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the citation purpose classifier on `annotations.jsonl`.
    PurposeTrain {
        #[command(flatten)]
        common: Common,
        /// Model file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify contexts, one per line, from a file or standard input.
    PurposeClassify {
        #[arg(long)]
        model: PathBuf,
        /// Context file; standard input when omitted or `-`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the full pipeline on every labelled citation.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        variant: Option<Variant>,
        /// Model file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score every citation of a dataset with a trained model.
    Detect {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data_dir: PathBuf,
        /// Prediction file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated train/test evaluation of one variant.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        variant: Option<Variant>,
        /// Report directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate all eight variants on identical splits.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one hyperparameter over a list of values.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        variant: Option<Variant>,
        /// batch-size, embedding-dim, learning-rate or ae-arch.
        #[arg(long)]
        axis: SweepAxis,
        /// Values separated by spaces, e.g. `--values 1 4 8` or
        /// `--values 8-6 8-10-20`; the axis defaults when omitted.
        #[arg(long, num_args = 1..)]
        values: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Pipeline settings (TOML); defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory with papers.jsonl, citations.jsonl and annotations.jsonl.
    #[arg(long)]
    data_dir: PathBuf,
    /// Overrides every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn config(&self) -> Result<PipelineConfig> {
        let cfg = match &self.config {
            Some(p) => {
                PipelineConfig::load(p).with_context(|| format!("reading {}", p.display()))?
            }
            None => PipelineConfig::default(),
        };
        Ok(match self.seed {
            Some(s) => cfg.with_seed(s),
            None => cfg,
        })
    }

    fn network(&self) -> Result<CitationNetwork> {
        load_network(&self.data_dir)
    }

    fn annotations(&self) -> Result<Vec<glad_core::purpose::Annotation>> {
        let path = self.data_dir.join(ANNOTATIONS_FILE);
        read_annotations(&path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load_network(dir: &Path) -> Result<CitationNetwork> {
    let net = build_network(&dir.join(PAPERS_FILE), &dir.join(CITATIONS_FILE))
        .with_context(|| format!("loading network from {}", dir.display()))?;
    let report = net.validate();
    if !report.is_clean() {
        log::warn!(
            "{} papers without abstracts, {} without authors, {} references outside the network",
            report.missing_abstracts.len(),
            report.missing_authors.len(),
            report.external_references
        );
    }
    Ok(net)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn write_model(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn with_variant(mut cfg: PipelineConfig, variant: Option<Variant>) -> PipelineConfig {
    if let Some(v) = variant {
        cfg.train.variant = v;
    }
    cfg
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { config, seed, out } => {
            let mut cfg = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p)
                        .with_context(|| format!("reading {}", p.display()))?;
                    toml::from_str::<GeneratorConfig>(&text)
                        .with_context(|| format!("parsing {}", p.display()))?
                }
                None => GeneratorConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let ds = datagen::generate(&cfg)?;
            datagen::export(&ds, &out)?;
            println!(
                "{} papers, {} citations, {} anomalous -> {}",
                ds.manifest.n_papers,
                ds.manifest.n_edges,
                ds.manifest.n_anomalous,
                out.display()
            );
        }
        Command::PurposeTrain { common, out } => {
            let cfg = common.config()?;
            let model = PurposeModel::train(&common.annotations()?, &cfg.purpose)?;
            write_model(&out, &model.to_bytes())?;
        }
        Command::PurposeClassify { model, input, out } => {
            let bytes =
                std::fs::read(&model).with_context(|| format!("reading {}", model.display()))?;
            let model = PurposeModel::from_bytes(&bytes)?;
            let mut text = String::new();
            match input.as_deref() {
                Some(p) if p != Path::new("-") => {
                    text = std::fs::read_to_string(p)
                        .with_context(|| format!("reading {}", p.display()))?
                }
                _ => {
                    std::io::stdin().lock().read_to_string(&mut text)?;
                }
            }
            let mut lines = String::new();
            for context in text.as_bytes().lines() {
                let pred = model.predict(&context?);
                let name = match pred.category {
                    Some(c) => c.name().to_string(),
                    None if pred.clear => "clear".into(),
                    None => "other".into(),
                };
                let values: Vec<String> =
                    pred.decision_values.iter().map(|v| v.to_string()).collect();
                lines.push_str(&format!("{name},{}\n", values.join(",")));
            }
            write_output(out.as_deref(), &lines)?;
        }
        Command::Train {
            common,
            variant,
            out,
        } => {
            let cfg = with_variant(common.config()?, variant);
            let bundle = ModelBundle::train(&common.network()?, &common.annotations()?, &cfg)?;
            let last = bundle.detector.epochs.last();
            log::info!(
                "trained {} for {} epochs, objective {:.6}",
                cfg.train.variant,
                bundle.detector.epochs.len(),
                last.map_or(bundle.detector.initial.total, |e| e.objective.total)
            );
            write_model(&out, &bundle.to_bytes())?;
        }
        Command::Detect {
            model,
            data_dir,
            out,
        } => {
            let bytes =
                std::fs::read(&model).with_context(|| format!("reading {}", model.display()))?;
            let bundle = ModelBundle::from_bytes(&bytes)?;
            let net = load_network(&data_dir)?;
            let preds = bundle.detect(&net)?;
            write_output(out.as_deref(), &format_predictions(&net, &preds))?;
        }
        Command::Eval {
            common,
            variant,
            out,
        } => {
            let cfg = with_variant(common.config()?, variant);
            let (net, annotations) = (common.network()?, common.annotations()?);
            let prep = prepare(&net, &annotations, &cfg)?;
            let mut h = Harness::new(prep.features.inputs(&net), edge_labels(&net))?;
            let run = h.run_splits(cfg.train.variant.name(), &cfg.train, &cfg.split)?;
            let runs = [run];
            write_report(&out, "eval", "variant", &runs)?;
            print!("{}", glad_core::eval::format_table("variant", &runs));
        }
        Command::Ablate { common, out } => {
            let cfg = common.config()?;
            let (net, annotations) = (common.network()?, common.annotations()?);
            let prep = prepare(&net, &annotations, &cfg)?;
            let mut h = Harness::new(prep.features.inputs(&net), edge_labels(&net))?;
            let runs = h.ablate(&cfg.train, &cfg.split)?;
            write_report(&out, "ablation", "variant", &runs)?;
            print!("{}", glad_core::eval::format_table("variant", &runs));
        }
        Command::Sweep {
            common,
            variant,
            axis,
            values,
            out,
        } => {
            let cfg = with_variant(common.config()?, variant);
            let values: Vec<SweepValue> = if values.is_empty() {
                axis.default_values()
            } else {
                values
                    .iter()
                    .map(|v| axis.parse_value(v))
                    .collect::<glad_core::Result<_>>()?
            };
            if values.is_empty() {
                bail!("no sweep values");
            }
            let (net, annotations) = (common.network()?, common.annotations()?);
            let prep = prepare(&net, &annotations, &cfg)?;
            let mut h = Harness::new(prep.features.inputs(&net), edge_labels(&net))?;
            let runs = h.sweep(&cfg.train, axis, &values, &cfg.split)?;
            let stem = format!("sweep_{}", axis.name());
            write_report(&out, &stem, axis.name(), &runs)?;
            print!("{}", glad_core::eval::format_table(axis.name(), &runs));
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
