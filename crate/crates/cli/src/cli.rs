//! Command-line front end. Exit status 0 on success, 1 on usage errors,
//! 2 on data or model errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use holab_core::dataset::{load_dataset, normalize, save_dataset, Dataset, Format};
use holab_core::radio::{render_rem, Bounds};
use holab_core::scenario::deployment_radius;
use holab_core::{build_scenario, Scenario, ScenarioConfig};
use holab_models::mlp::DEFAULT_MLP_HIDDEN;
use holab_models::regressor::DEFAULT_LSTM_HIDDEN;
use holab_models::search::{
    cw_grid, lstm_grid, mlp_grid, search_cw, search_lstm, search_mlp, SearchReport,
};
use holab_models::{
    encode_dataset, save_model, train_autoencoder, train_lstm_regressor, train_mlp, AeShape,
    LossCurve, TrainConfig,
};

use crate::config_file::load_config;
use crate::error::{Error, Result};
use crate::eval::{cross_scenario_eval, evaluate, EvalReport, Scorer};
use crate::pipeline::{
    campaign_dataset, load_autoencoder, load_scorers, normalized, AE_FILE, CAMPAIGN_FILE,
    DATASET_FILE, LSTM_FILE, MLP_FILE,
};

#[derive(Parser, Debug)]
#[command(
    name = "holab",
    version,
    about = "Learned handover target selection toolkit"
)]
pub struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Campaign seed for simulations, training seed for `train` and `search`,
    /// obstacle seed for `scenario rem`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; files inside it use fixed names.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// `key = value` file with scenario and training settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scenario inspection.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Simulation campaigns.
    #[command(subcommand)]
    Campaign(CampaignCmd),
    /// Training dataset assembly.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Model training.
    #[command(subcommand)]
    Train(TrainCmd),
    /// Hyperparameter grid search.
    Search {
        #[arg(long, value_enum)]
        model: SearchModel,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Autoencoder checkpoint feeding the MLP search.
        #[arg(long)]
        ae: Option<PathBuf>,
    },
    /// Evaluate trained models on a held-out run.
    Eval(EvalArgs),
    /// Evaluate trained models under a different obstacle placement.
    EvalCross {
        #[arg(long)]
        obstacle_seed: u64,
        #[command(flatten)]
        eval: EvalArgs,
    },
}

#[derive(Subcommand, Debug)]
enum ScenarioCmd {
    /// Render the best-SINR radio environment map.
    Rem {
        /// Pixel edge in meters.
        #[arg(long, default_value_t = 10.0)]
        resolution: f64,
    },
}

#[derive(Subcommand, Debug)]
enum CampaignCmd {
    /// Simulate the forced and benchmark campaigns.
    Run {
        /// Single run id; all configured runs when absent.
        #[arg(long)]
        run: Option<u32>,
        #[arg(long, value_enum, default_value_t = FileFormat::Binary)]
        format: FileFormat,
    },
}

#[derive(Subcommand, Debug)]
enum DatasetCmd {
    /// Keep the forced-campaign sequences of a campaign file.
    Build {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FileFormat::Binary)]
        format: FileFormat,
    },
}

#[derive(Subcommand, Debug)]
enum TrainCmd {
    /// Many-to-one LSTM regressor.
    Lstm {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Comma-separated LSTM widths.
        #[arg(long, value_parser = parse_widths)]
        hidden: Option<Widths>,
    },
    /// Sequence autoencoder.
    Ae {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        cw: usize,
        /// Encoder widths, last one the codeword length; overrides `--cw`.
        #[arg(long, value_parser = parse_widths)]
        encoder: Option<Widths>,
        #[arg(long, value_parser = parse_widths)]
        decoder: Option<Widths>,
    },
    /// MLP on frozen autoencoder codewords.
    Mlp {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        ae: Option<PathBuf>,
        #[arg(long, value_parser = parse_widths)]
        hidden: Option<Widths>,
    },
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Directory holding the checkpoints; defaults to `--out`.
    #[arg(long)]
    models: Option<PathBuf>,
    /// Evaluation run id; defaults to one past the training runs.
    #[arg(long)]
    run: Option<u32>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FileFormat {
    Binary,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SearchModel {
    Lstm,
    Ae,
    Mlp,
}

#[derive(Clone, Debug)]
struct Widths(Vec<usize>);

fn parse_widths(s: &str) -> std::result::Result<Widths, String> {
    let w = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad width {t:?}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if w.is_empty() || w.contains(&0) {
        return Err("widths must be positive".into());
    }
    Ok(Widths(w))
}

impl FileFormat {
    fn format(self) -> Format {
        match self {
            FileFormat::Binary => Format::Binary,
            FileFormat::Csv => Format::Csv,
        }
    }

    fn file_name(self, binary: &str) -> String {
        match self {
            FileFormat::Binary => binary.to_string(),
            FileFormat::Csv => binary.replace(".hods", ".csv"),
        }
    }
}

struct Context {
    common: Common,
    scenario: ScenarioConfig,
    train: TrainConfig,
}

impl Context {
    fn out(&self, name: &str) -> PathBuf {
        self.common.out.join(name)
    }

    fn base_seed(&self) -> u64 {
        self.common.seed.unwrap_or(1)
    }

    fn build_scenario(&self) -> Result<Scenario> {
        Ok(build_scenario(&self.scenario, self.scenario.obstacle_seed)?)
    }

    fn load(&self, path: Option<&PathBuf>, default: &str) -> Result<Dataset> {
        let path = path.cloned().unwrap_or_else(|| self.out(default));
        if !path.is_file() {
            return Err(Error::Eval(format!("dataset {} not found", path.display())));
        }
        Ok(load_dataset(&path, Format::from_path(&path))?)
    }

    /// Forced sequences of a dataset or campaign file.
    fn training_set(&self, path: Option<&PathBuf>) -> Result<Dataset> {
        let d = self.load(path, DATASET_FILE)?.forced_only();
        if d.is_empty() {
            return Err(Error::Eval(
                "dataset holds no forced-campaign sequences".into(),
            ));
        }
        Ok(d)
    }
}

fn write_with(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(Error::io(path))?);
    f(&mut w).and_then(|_| w.flush()).map_err(Error::io(path))
}

fn write_curve(path: &Path, curve: &LossCurve) -> Result<()> {
    write_with(path, |w| curve.write_csv(w))
}

fn report_curve(name: &str, curve: &LossCurve) {
    println!(
        "{name}: {} epochs, final train MSE {:.4e}, mean validation MSE {:.4e}",
        curve.train.len(),
        curve.train.last().copied().unwrap_or(f64::NAN),
        curve.mean_val()
    );
}

fn write_search(ctx: &Context, name: &str, report: &SearchReport) -> Result<()> {
    report
        .write_text(std::io::stdout().lock())
        .map_err(Error::io("<stdout>"))?;
    write_with(&ctx.out(&format!("search_{name}.csv")), |w| {
        report.write_csv(w)
    })
}

fn write_report(ctx: &Context, prefix: &str, report: &EvalReport) -> Result<()> {
    report
        .write_text(std::io::stdout().lock())
        .map_err(Error::io("<stdout>"))?;
    write_with(&ctx.out(&format!("{prefix}report.txt")), |w| {
        report.write_text(w)
    })?;
    write_with(&ctx.out(&format!("{prefix}report.csv")), |w| {
        report.write_csv(w)
    })?;
    for p in report.learned() {
        if report.common_finishers.is_empty() {
            continue;
        }
        let e = report
            .difference_ecdf(&p.name)
            .expect("learned policy exists")?;
        let file = format!("{prefix}ecdf_{}.csv", p.name.replace('+', "_"));
        write_with(&ctx.out(&file), |w| e.write_csv(w))?;
    }
    Ok(())
}

fn run_eval(ctx: &Context, args: &EvalArgs, obstacle_seed: Option<u64>) -> Result<()> {
    let dir = args
        .models
        .clone()
        .unwrap_or_else(|| ctx.common.out.clone());
    let scorers = load_scorers(&dir)?;
    let refs: Vec<(&str, &Scorer)> = scorers.iter().map(|(n, s)| (*n, s)).collect();
    let scenario = ctx.build_scenario()?;
    let run = args.run.unwrap_or(ctx.scenario.num_runs + 1);
    if run <= ctx.scenario.num_runs {
        eprintln!(
            "warning: run {run} is one of the {} training runs",
            ctx.scenario.num_runs
        );
    }
    let (report, prefix) = match obstacle_seed {
        None => (evaluate(&scenario, ctx.base_seed(), run, &refs)?, "eval_"),
        Some(s) => (
            cross_scenario_eval(&scenario, s, ctx.base_seed(), run, &refs)?,
            "cross_",
        ),
    };
    write_report(ctx, prefix, &report)
}

fn execute(ctx: &mut Context, command: Command) -> Result<()> {
    std::fs::create_dir_all(&ctx.common.out).map_err(Error::io(&ctx.common.out))?;
    if let Some(seed) = ctx.common.seed {
        ctx.train.seed = seed;
    }
    match command {
        Command::Scenario(ScenarioCmd::Rem { resolution }) => {
            let seed = ctx.common.seed.unwrap_or(ctx.scenario.obstacle_seed);
            let scenario = build_scenario(&ctx.scenario, seed)?;
            let r = deployment_radius(&ctx.scenario);
            let grid = render_rem(
                &scenario,
                Bounds {
                    x0: -r,
                    y0: -r,
                    x1: r,
                    y1: r,
                },
                resolution,
            )
            .map_err(|e| Error::Usage(e.to_string()))?;
            let path = ctx.out("rem.txt");
            let mut w = BufWriter::new(File::create(&path).map_err(Error::io(&path))?);
            grid.write_to(&mut w)?;
            w.flush().map_err(Error::io(&path))?;
            println!(
                "wrote {} ({} x {} pixels)",
                path.display(),
                grid.nx,
                grid.ny
            );
        }
        Command::Campaign(CampaignCmd::Run { run, format }) => {
            let scenario = ctx.build_scenario()?;
            let runs = match run {
                Some(r) => r..=r,
                None => 1..=ctx.scenario.num_runs,
            };
            let d = campaign_dataset(&scenario, ctx.base_seed(), runs)?;
            let path = ctx.out(&format.file_name(CAMPAIGN_FILE));
            save_dataset(&d, &path, format.format())?;
            println!("wrote {} ({} traces)", path.display(), d.len());
        }
        Command::Dataset(DatasetCmd::Build { input, format }) => {
            let d = ctx.load(input.as_ref(), CAMPAIGN_FILE)?.forced_only();
            let path = ctx.out(&format.file_name(DATASET_FILE));
            save_dataset(&d, &path, format.format())?;
            println!(
                "wrote {} ({} rows of {} x {})",
                path.display(),
                d.len(),
                d.windows,
                holab_core::NUM_FEATURES
            );
        }
        Command::Train(TrainCmd::Lstm { data, hidden }) => {
            let (d, norm) = normalized(&ctx.training_set(data.as_ref())?)?;
            let hidden = hidden.map_or(DEFAULT_LSTM_HIDDEN.to_vec(), |w| w.0);
            let (model, curve) = train_lstm_regressor(&d, &hidden, &ctx.train)?;
            save_model(&model, Some(&norm), &ctx.out(LSTM_FILE))?;
            write_curve(&ctx.out("lstm_loss.csv"), &curve)?;
            report_curve("lstm", &curve);
        }
        Command::Train(TrainCmd::Ae {
            data,
            cw,
            encoder,
            decoder,
        }) => {
            let (d, norm) = normalized(&ctx.training_set(data.as_ref())?)?;
            let encoder = encoder.map_or(vec![cw], |w| w.0);
            let decoder = decoder.map_or_else(|| vec![*encoder.last().unwrap()], |w| w.0);
            let (model, curve) = train_autoencoder(&d, &AeShape { encoder, decoder }, &ctx.train)?;
            save_model(&model, Some(&norm), &ctx.out(AE_FILE))?;
            write_curve(&ctx.out("ae_loss.csv"), &curve)?;
            report_curve("autoencoder", &curve);
        }
        Command::Train(TrainCmd::Mlp { data, ae, hidden }) => {
            let (ae, norm) = load_autoencoder(&ae.unwrap_or_else(|| ctx.out(AE_FILE)))?;
            let d = normalize(&ctx.training_set(data.as_ref())?, &norm);
            let codes = encode_dataset(&ae, &d)?;
            let hidden = hidden.map_or(DEFAULT_MLP_HIDDEN.to_vec(), |w| w.0);
            let (model, curve) = train_mlp(&codes, &d.labels(), &hidden, &ctx.train)?;
            save_model(&model, Some(&norm), &ctx.out(MLP_FILE))?;
            write_curve(&ctx.out("mlp_loss.csv"), &curve)?;
            report_curve("mlp", &curve);
        }
        Command::Search { model, data, ae } => {
            let raw = ctx.training_set(data.as_ref())?;
            match model {
                SearchModel::Lstm => {
                    let (d, _) = normalized(&raw)?;
                    write_search(ctx, "lstm", &search_lstm(&d, &lstm_grid(), &ctx.train)?)?;
                }
                SearchModel::Ae => {
                    let (d, _) = normalized(&raw)?;
                    write_search(ctx, "ae", &search_cw(&d, &cw_grid(), &ctx.train)?)?;
                }
                SearchModel::Mlp => {
                    let (ae, norm) = load_autoencoder(&ae.unwrap_or_else(|| ctx.out(AE_FILE)))?;
                    let d = normalize(&raw, &norm);
                    let codes = encode_dataset(&ae, &d)?;
                    write_search(
                        ctx,
                        "mlp",
                        &search_mlp(&codes, &d.labels(), &mlp_grid(), &ctx.train)?,
                    )?;
                }
            }
        }
        Command::Eval(args) => run_eval(ctx, &args, None)?,
        Command::EvalCross {
            obstacle_seed,
            eval,
        } => run_eval(ctx, &eval, Some(obstacle_seed))?,
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = (|| {
        let (scenario, train) = match &cli.common.config {
            Some(p) => load_config(p)?,
            None => (ScenarioConfig::default(), TrainConfig::default()),
        };
        let mut ctx = Context {
            common: cli.common,
            scenario,
            train,
        };
        execute(&mut ctx, cli.command)
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
