use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use kge_core::data::{gen_synthetic, load_triples, write_triples};
use kge_core::equivalence::{convert_model, random_probes, verify_equivalence_with};
use kge_core::eval::{evaluate, Side};
use kge_core::model_file::{load_model, save_model};
use kge_core::train::{train_with, TrainConfig};
use kge_core::{bench, selftest, Execution, ModelKind, Triple};

#[derive(Parser)]
#[command(name = "kge", version, about = "Knowledge-graph embedding training, evaluation and conversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Kv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Subject,
    Object,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a triple file.
    Train {
        #[arg(long, value_parser = parse_kind)]
        model: ModelKind,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 1e-4)]
        lambda: f64,
        #[arg(long, default_value_t = 2)]
        negatives: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        batch_size: usize,
        /// Standard deviation of the initial entries (default 1/sqrt(dim)).
        #[arg(long)]
        init_scale: Option<f64>,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank test triples and report MRR and Hits@k.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Triple files whose positives are filtered from the candidates.
        #[arg(long, num_args = 1..)]
        filter: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 3, 10])]
        ks: Vec<usize>,
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Run on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
    /// Convert a complex model into a holographic one with real vectors, or
    /// re-tag a spectral holographic model as complex.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check that two models score every probe in the expected fixed ratio.
    Verify {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        hole: PathBuf,
        #[arg(long, default_value_t = 1000)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        sequential: bool,
    },
    /// Run the built-in invariant checks.
    Selftest {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
    },
    /// Write the synthetic ring dataset as train.tsv, valid.tsv and test.tsv.
    Gen {
        #[arg(long)]
        entities: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Time scoring along the FFT path against the spectral path.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [64, 256, 1024, 4096])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_kind(s: &str) -> Result<ModelKind, String> {
    s.parse()
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

/// Runs the command; `Ok(false)` means it ran but reported a failed check.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Train {
            model,
            dim,
            epochs,
            lr,
            lambda,
            negatives,
            seed,
            batch_size,
            init_scale,
            train,
            out,
        } => {
            let data = load_triples(&train)?;
            let defaults = TrainConfig::new(model, dim);
            let config = TrainConfig {
                epochs,
                learning_rate: lr,
                lambda,
                negatives_per_positive: negatives,
                seed,
                batch_size,
                init_scale: init_scale.unwrap_or(defaults.init_scale),
                ..defaults
            };
            eprintln!(
                "training {model} dim={dim} on {} examples ({} entities, {} relations)",
                data.len(),
                data.entities.len(),
                data.relations.len()
            );
            let output = train_with(&data, &config, |rec| {
                println!("epoch={} loss={:.6} sec={:.3}", rec.epoch, rec.objective, rec.seconds);
            })?;
            save_model(&output.params, &out).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("saved {}", out.display());
            Ok(true)
        }
        Command::Eval {
            model,
            test,
            filter,
            ks,
            side,
            format,
            sequential,
        } => {
            if ks.contains(&0) {
                bail!("--ks values must be at least 1");
            }
            let params = load_model(&model).with_context(|| format!("loading {}", model.display()))?;
            let (ents, rels) = (params.entity_vocab(), params.relation_vocab());
            let test_set = load_triples(&test)?
                .reindex(ents, rels)
                .with_context(|| format!("{} names something the model does not know", test.display()))?;
            let known = if filter.is_empty() {
                None
            } else {
                let mut known: HashSet<Triple> = HashSet::new();
                for path in &filter {
                    known.extend(load_triples(path)?.known_positives_in(ents, rels));
                }
                Some(known)
            };
            let side = match side {
                SideArg::Subject => Side::Subject,
                SideArg::Object => Side::Object,
                SideArg::Both => Side::Both,
            };
            let result = evaluate(&params, &test_set, known.as_ref(), &ks, side, execution(sequential))?;
            match format {
                Format::Text => println!("{result}"),
                Format::Kv => print!("{}", result.to_key_values()),
            }
            Ok(true)
        }
        Command::Convert { input, out } => {
            let params = load_model(&input).with_context(|| format!("loading {}", input.display()))?;
            let converted = match params.kind() {
                ModelKind::Complex => {
                    let h = convert_model(&params)?;
                    eprintln!(
                        "converted complex dim={} to hole-time dim={} (score ratio 2/{})",
                        params.dim(),
                        h.dim(),
                        h.dim()
                    );
                    h
                }
                ModelKind::HoleSpectral => {
                    let (c, factor) = params.retag_spectral_as_complex()?;
                    eprintln!("re-tagged hole-spectral as complex; scores scale by {factor}");
                    c
                }
                ModelKind::HoleTime => bail!("convert takes a complex or hole-spectral model, got hole-time"),
            };
            save_model(&converted, &out).with_context(|| format!("writing {}", out.display()))?;
            Ok(true)
        }
        Command::Verify {
            complex,
            hole,
            probes,
            seed,
            tol,
            format,
            sequential,
        } => {
            let m_complex = load_model(&complex).with_context(|| format!("loading {}", complex.display()))?;
            let m_hole = load_model(&hole).with_context(|| format!("loading {}", hole.display()))?;
            if m_complex.num_entities() == 0 || m_complex.num_relations() == 0 {
                bail!("model has no entities or relations to probe");
            }
            let probe_set = random_probes(m_complex.num_relations(), m_complex.num_entities(), probes, seed);
            let report = verify_equivalence_with(&m_complex, &m_hole, &probe_set, tol, execution(sequential))?;
            match format {
                Format::Text => println!("{report}"),
                Format::Kv => print!("{}", report.to_key_values()),
            }
            Ok(report.passed)
        }
        Command::Selftest { level } => {
            let level = match level {
                LevelArg::Fast => selftest::Level::Fast,
                LevelArg::Full => selftest::Level::Full,
            };
            let results = selftest::run(level);
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("selftest: {} passed, {failed} failed", results.len() - failed);
            Ok(failed == 0)
        }
        Command::Gen { entities, seed, out_dir } => {
            let splits = gen_synthetic(entities, seed)?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            for (name, set) in [("train", &splits.train), ("valid", &splits.valid), ("test", &splits.test)] {
                let path = out_dir.join(format!("{name}.tsv"));
                write_triples(set, &path).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("{}: {} triples", path.display(), set.len());
            }
            Ok(true)
        }
        Command::Bench { dims, reps, seed } => {
            if reps == 0 || dims.contains(&0) {
                bail!("--reps and every --dims value must be at least 1");
            }
            for row in bench::scoring_bench(&dims, reps, seed) {
                println!("{}", row.to_line());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
