//! Command-line front end: argument parsing, run configuration, model
//! artifacts and the subcommands.

mod artifact;
mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use artifact::{ModelArtifact, TrainingMetadata, FORMAT_VERSION};
pub use commands::{
    cmd_dump_trees, cmd_eval, cmd_experiment, cmd_explain, cmd_gen, cmd_gridsearch, cmd_predict, cmd_train,
    lstm_grid, GridSummary, LstmDims, Prediction, TrainOutput,
};
pub use config::RunConfig;

use crate::corpus::DEFAULT_MALE_FRACTION;
use crate::error::Result;
use crate::eval_explain::format_table;
use crate::linear_models::Penalty;
use crate::pipeline::{FeatureSpec, Method, Variant};

#[derive(Debug, Parser)]
#[command(name = "namegender", version, about = "Classify gender from personal names")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic labeled corpus as `name,gender` CSV.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_MALE_FRACTION)]
        male_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model on the train split, report held-out metrics, save the artifact.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a hyperparameter grid and write one CSV row per candidate.
    Gridsearch {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a saved model on a labeled CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print P(male), P(female) and the predicted label for a name.
    Predict {
        #[arg(long)]
        model: PathBuf,
        name: String,
    },
    /// Trace P(male) as the name is read one character at a time.
    Explain {
        #[arg(long)]
        model: PathBuf,
        name: String,
        /// CSV output for the trace.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        width: usize,
    },
    /// Print the trees of a boosted model.
    DumpTrees {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run basic and n-gram features against every classical model, plus the char-LSTM.
    Experiment {
        #[command(flatten)]
        run: RunArgs,
        /// Skip the char-LSTM row.
        #[arg(long)]
        no_lstm: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Data path plus overrides on top of the defaults or a JSON config file.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub method: Option<Method>,
    /// basic, ngram:N (N in 2..=5) or chars.
    #[arg(long)]
    pub features: Option<FeatureSpec>,
    #[arg(long)]
    pub embed: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Default 20.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Default 32.
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub penalty: Option<Penalty>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Grid-search logreg/gbt hyperparameters before the final fit.
    #[arg(long)]
    pub tune: bool,
}

impl RunArgs {
    pub fn to_config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field.clone() { c.$target = v; })*
            };
        }
        set!(variant => variant, method => method, features => features, embed => embed,
             hidden => hidden, epochs => epochs, batch => batch, learning_rate => learning_rate,
             seed => seed, test_fraction => test_fraction, top_k => top_k, penalty => penalty, c => c);
        c.tune |= self.tune;
        // A method flag alone picks its natural features.
        if self.method.is_some() && self.features.is_none() {
            c.features = match c.method {
                Method::Lstm => FeatureSpec::Chars,
                _ if c.features == FeatureSpec::Chars => FeatureSpec::Basic,
                _ => c.features,
            };
        }
        crate::pipeline::check_pair(c.method, c.features)?;
        Ok(c)
    }
}

/// Runs one parsed command, printing results to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            n,
            male_fraction,
            seed,
            out,
        } => {
            let corpus = cmd_gen(n, male_fraction, seed, &out)?;
            println!(
                "wrote {} names ({} male) to {}",
                corpus.len(),
                corpus.male_count(),
                out.display()
            );
        }
        Command::Train { run, out } => {
            let config = run.to_config()?;
            let result = cmd_train(&run.data, &config, &out)?;
            print!("{}", format_table(std::slice::from_ref(&result.row)));
            for f in &result.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Gridsearch { run, out } => {
            let config = run.to_config()?;
            let summary = cmd_gridsearch(&run.data, &config, &out)?;
            let best: Vec<String> = summary.best.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!(
                "{} candidates; best #{} ({}) accuracy {:.4}; wrote {}",
                summary.candidates,
                summary.best_index,
                best.join(" "),
                summary.best_score,
                out.display()
            );
        }
        Command::Eval { model, data, out } => {
            let row = cmd_eval(&model, &data, out.as_deref())?;
            print!("{}", format_table(&[row]));
        }
        Command::Predict { model, name } => {
            let p = cmd_predict(&model, &name)?;
            println!("p_male={:.6} p_female={:.6} label={}", p.p_male, p.p_female, p.label);
        }
        Command::Explain {
            model,
            name,
            out,
            width,
        } => {
            let trace = cmd_explain(&model, &name, out.as_deref())?;
            print!("{}", trace.render_bars(width));
        }
        Command::DumpTrees { model, out } => {
            let text = cmd_dump_trees(&model, out.as_deref())?;
            if out.is_none() {
                print!("{text}");
            }
        }
        Command::Experiment { run, no_lstm, out } => {
            let config = run.to_config()?;
            let rows = cmd_experiment(&run.data, &config, !no_lstm, &out)?;
            print!("{}", format_table(&rows));
        }
    }
    Ok(())
}
