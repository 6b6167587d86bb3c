//! The `smog` command line: one subcommand per pipeline stage.
//!
//! Every subcommand writes a `.manifest` next to its primary output
//! recording the tool version, resolved inputs, parameters, and seed.
//! Outputs are deterministic given identical inputs and seed. An optional
//! `--config` file in flat `key = value` form supplies defaults for the
//! tunable flags; explicit flags win.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use smog_core::dataset::build_table;
use smog_core::eval;
use smog_core::forest::{ForestConfig, MaxFeaturesMode};
use smog_core::geo::{PollutantKind, StationType};
use smog_core::mapping::{
    annual_mean, build_grid_rows, field_raster, monthly_stats, GridAttributes, OverpassPredictions,
};
use smog_core::regrid::{bin_swath, GridField};

use crate::formats;
use crate::manifest::RunManifest;
use crate::model_file;
use crate::parallel;
use crate::sidecar::KvFile;
use crate::synth;
use crate::{ascii_grid, sidecar};

#[derive(Parser, Debug)]
#[command(
    name = "smog",
    version,
    about = "Estimate surface air-pollutant concentrations from satellite column data",
    after_help = "Defaults: qa 0.75 (0.8 for the aerosol index), 0.03 degree cells, k = 10 \
                  folds, 300 trees, max-features sqrt. NO2 models do well with sqrt; ozone \
                  models tend to prefer `all` (alias `auto`)."
)]
pub struct Cli {
    /// Optional flat `key = value` config file; flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bin swath CSVs onto the regular grid with quality filtering.
    Regrid(RegridArgs),
    /// Join stations, fields, weather, and land cover into a feature table.
    BuildDataset(BuildDatasetArgs),
    /// Sweep tree count and feature-subset mode by 3-fold cross-validation.
    Tune(TuneArgs),
    /// Train a forest and persist it.
    Train(TrainArgs),
    /// Evaluate with method a (row k-fold), b (train/test years), or c
    /// (station-blocked k-fold).
    Evaluate(EvaluateArgs),
    /// Fit on a split and report Gini and permutation importances.
    Importance(ImportanceArgs),
    /// Apply a trained model to every covered grid cell per overpass.
    PredictGrid(PredictGridArgs),
    /// Aggregate per-overpass predictions into an annual mean raster and
    /// monthly statistics.
    Aggregate(AggregateArgs),
    /// Generate synthetic tables or a full synthetic input set.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct RegridArgs {
    /// Grid sidecar: full form (lat_min/lon_min/cell_size/n_rows/n_cols) or
    /// an area of interest (lat_min/lon_min/lat_max/lon_max).
    #[arg(long)]
    pub spec: PathBuf,
    /// Cell size in degrees; overrides the spec file.
    #[arg(long)]
    pub cell: Option<f64>,
    /// QA threshold in [0, 1]; defaults to the pollutant's recommendation.
    #[arg(long)]
    pub qa: Option<f64>,
    /// Pollutant (no2, o3, so2, pm10, pm25); sets the variable name and the
    /// default QA threshold.
    #[arg(long)]
    pub pollutant: Option<String>,
    /// Variable name stored in the field sidecars; overrides --pollutant.
    #[arg(long)]
    pub variable: Option<String>,
    /// Output directory for `<swath-stem>_field.csv` (+ sidecar) files.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write each field as an ESRI ASCII grid for visualization.
    #[arg(long)]
    pub asc: bool,
    /// Swath CSV files (lat,lon,value,qa,time_unix), one per overpass.
    #[arg(required = true)]
    pub swaths: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BuildDatasetArgs {
    /// Station metadata CSV.
    #[arg(long)]
    pub stations: PathBuf,
    /// Hourly observation CSV.
    #[arg(long)]
    pub observations: PathBuf,
    /// Directory of regridded field CSVs (from `regrid`).
    #[arg(long)]
    pub fields: PathBuf,
    /// Weather directory (nine variable CSVs plus meteo.spec).
    #[arg(long)]
    pub meteo: PathBuf,
    /// Land-cover raster CSV (+ sidecar).
    #[arg(long)]
    pub landcover: PathBuf,
    /// Pollutant the observations measure.
    #[arg(long)]
    pub pollutant: String,
    /// Widest observation bracket bridged by interpolation, in hours.
    #[arg(long)]
    pub max_gap_hours: Option<f64>,
    /// Output feature-table CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    /// Training feature-table CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output sweep CSV (n_estimators,max_features,mean_mse,seconds).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training feature-table CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of trees.
    #[arg(long)]
    pub trees: Option<usize>,
    /// Per-node feature subset: all (alias auto), sqrt, or log2.
    #[arg(long)]
    pub max_features: Option<String>,
    #[arg(long)]
    pub min_samples_split: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    /// Worker threads; 1 is the bit-exact reference, more never changes
    /// results.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Validation protocol.
    #[arg(long, value_parser = ["a", "b", "c"])]
    pub method: String,
    /// Feature table: the whole dataset for methods a/c, the training year
    /// for method b.
    #[arg(long)]
    pub data: PathBuf,
    /// Held-out year's table (method b only).
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    /// Station metadata CSV (method c only).
    #[arg(long)]
    pub stations: Option<PathBuf>,
    /// Fold count for methods a and c.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub max_features: Option<String>,
    /// Output report CSV (fold,r2,rmse,bias plus a mean row).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ImportanceArgs {
    /// Feature-table CSV; split into train/test internally.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub max_features: Option<String>,
    /// Shuffles per feature for permutation importance.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Fraction of rows used for training (the rest scores permutations).
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Output CSV (feature,gini,permutation_mean,permutation_std).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PredictGridArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Directory of regridded field CSVs.
    #[arg(long)]
    pub fields: PathBuf,
    /// Weather directory.
    #[arg(long)]
    pub meteo: PathBuf,
    /// Land-cover raster CSV.
    #[arg(long)]
    pub landcover: PathBuf,
    /// Elevation raster CSV aligned with the prediction grid.
    #[arg(long)]
    pub elevation: PathBuf,
    /// Station type code assumed for grid cells (1 industrial, 2 traffic,
    /// 3 background).
    #[arg(long)]
    pub station_type: Option<u8>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory for `<field-stem>_pred.csv` files.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AggregateArgs {
    /// Directory of per-overpass prediction CSVs (from `predict-grid`).
    #[arg(long)]
    pub predictions: PathBuf,
    /// Output prefix: writes `<prefix>_annual_mean.asc` and
    /// `<prefix>_monthly.csv`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub what: SynthCommand,
}

#[derive(Subcommand, Debug)]
pub enum SynthCommand {
    /// Write a synthetic feature table.
    Table(SynthTableArgs),
    /// Write a complete synthetic input set (grid, stations, observations,
    /// swaths, weather, land cover, elevation).
    Pipeline(SynthPipelineArgs),
}

#[derive(Args, Debug)]
pub struct SynthTableArgs {
    /// Generator: smooth, noise, linear, or station-effects.
    #[arg(long, value_parser = ["smooth", "noise", "linear", "station-effects"])]
    pub kind: String,
    /// Row count.
    #[arg(long)]
    pub n: Option<usize>,
    /// Station count (station-effects only).
    #[arg(long)]
    pub stations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output table CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the station metadata CSV (station-effects only).
    #[arg(long)]
    pub stations_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthPipelineArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Station count.
    #[arg(long)]
    pub stations: Option<usize>,
    /// Overpass count (every five days from 1 March 2019).
    #[arg(long)]
    pub overpasses: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Flag/config/default resolution: explicit flags win, then the config
/// file, then the built-in default.
struct Settings {
    file: Option<KvFile>,
}

impl Settings {
    fn load(path: &Option<PathBuf>) -> Result<Settings> {
        let file = match path {
            Some(p) => Some(KvFile::read(p)?),
            None => None,
        };
        Ok(Settings { file })
    }

    fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.resolve_opt(flag, key)?.unwrap_or(default))
    }

    fn resolve_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match &self.file {
            Some(kv) => kv.parse_optional(key),
            None => Ok(None),
        }
    }

    /// Resolve the run seed; when neither flag nor config supplies one, a
    /// seed is drawn from the clock and recorded in the manifest.
    fn resolve_seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(seed) = self.resolve_opt(flag, "seed")? {
            return Ok(seed);
        }
        let nanos = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        let seed = smog_core::rng::derive_seed(nanos, std::process::id() as u64);
        eprintln!("note: no --seed given; using generated seed {seed}");
        Ok(seed)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let settings = Settings::load(&cli.config)?;
    match cli.command {
        Command::Regrid(args) => run_regrid(args, &settings),
        Command::BuildDataset(args) => run_build_dataset(args, &settings),
        Command::Tune(args) => run_tune(args, &settings),
        Command::Train(args) => run_train(args, &settings),
        Command::Evaluate(args) => run_evaluate(args, &settings),
        Command::Importance(args) => run_importance(args, &settings),
        Command::PredictGrid(args) => run_predict_grid(args, &settings),
        Command::Aggregate(args) => run_aggregate(args, &settings),
        Command::Synth(args) => run_synth(args, &settings),
    }
}

fn forest_config(
    settings: &Settings,
    seed: u64,
    trees: Option<usize>,
    max_features: Option<String>,
    min_split: Option<usize>,
    min_leaf: Option<usize>,
) -> Result<ForestConfig> {
    let mode_name = settings.resolve(max_features, "max-features", "sqrt".to_string())?;
    let max_features = MaxFeaturesMode::parse(&mode_name).map_err(|e| anyhow!("{e}"))?;
    let config = ForestConfig {
        n_estimators: settings.resolve(trees, "trees", 300)?,
        max_features,
        min_samples_split: settings.resolve(min_split, "min-samples-split", 2)?,
        min_samples_leaf: settings.resolve(min_leaf, "min-samples-leaf", 1)?,
        seed,
    };
    config.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(config)
}

fn run_regrid(args: RegridArgs, settings: &Settings) -> Result<()> {
    let pollutant = match settings.resolve_opt(args.pollutant, "pollutant")? {
        Some(name) => Some(PollutantKind::parse(&name).map_err(|e| anyhow!("{e}"))?),
        None => None,
    };
    let cell = settings.resolve_opt(args.cell, "cell")?;
    let qa = match settings.resolve_opt(args.qa, "qa")? {
        Some(qa) => qa,
        None => pollutant.map(|p| p.default_qa_threshold()).unwrap_or(0.75),
    };
    let variable = match settings.resolve_opt(args.variable, "variable")? {
        Some(v) => v,
        None => pollutant
            .map(|p| p.satellite_variable().to_string())
            .unwrap_or_else(|| "column_value".to_string()),
    };
    let kv = KvFile::read(&args.spec)?;
    // 0.03 degree cells unless the flag or the spec file says otherwise.
    let cell = match (cell, kv.get("cell_size")) {
        (None, None) => Some(0.03),
        (flag, _) => flag,
    };
    let spec = sidecar::spec_from_kv(&kv, cell)?;
    let asc = args.asc || settings.resolve(None, "asc", false)?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create `{}`", args.out.display()))?;
    let mut manifest = RunManifest::start("regrid", 0);
    manifest.input("spec", &args.spec);
    manifest.param("qa", qa);
    manifest.param("variable", &variable);
    manifest.param("cell_size", spec.cell_size);

    let mut written = 0usize;
    for swath_path in &args.swaths {
        let samples = formats::read_swath(swath_path)?;
        let field = bin_swath(&samples, &spec, qa, &variable).map_err(|e| anyhow!("{e}"))?;
        let stem = swath_path
            .file_stem()
            .ok_or_else(|| anyhow!("`{}` has no file name", swath_path.display()))?
            .to_string_lossy();
        let out_path = args.out.join(format!("{stem}_field.csv"));
        formats::write_grid_field(&out_path, &field)?;
        if asc {
            ascii_grid::write_ascii_grid(
                &args.out.join(format!("{stem}_field.asc")),
                &field_raster(&field),
            )?;
        }
        manifest.input("swath", swath_path);
        if field.n_occupied() == 0 {
            eprintln!(
                "warning: `{}` produced an all-empty field (nothing passed qa {qa})",
                swath_path.display()
            );
        }
        written += 1;
    }
    manifest.write(&args.out)?;
    println!(
        "regridded {written} swath file(s) into `{}`",
        args.out.display()
    );
    Ok(())
}

/// All field CSVs in a directory (files with a matching `.spec` sidecar),
/// sorted by name for deterministic processing order.
fn field_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    let entries =
        std::fs::read_dir(dir).with_context(|| format!("cannot read `{}`", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "csv") && formats::sidecar_path(&path).exists() {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        bail!(
            "`{}` holds no field CSVs (need .csv with a .spec sidecar)",
            dir.display()
        );
    }
    Ok(paths)
}

fn run_build_dataset(args: BuildDatasetArgs, settings: &Settings) -> Result<()> {
    let pollutant = PollutantKind::parse(&args.pollutant).map_err(|e| anyhow!("{e}"))?;
    let max_gap_hours = settings.resolve(args.max_gap_hours, "max-gap-hours", 2.0)?;
    if !max_gap_hours.is_finite() || max_gap_hours <= 0.0 {
        bail!("--max-gap-hours must be positive, got {max_gap_hours}");
    }
    let stations = formats::read_station_meta(&args.stations)?;
    let series = formats::read_observations(&args.observations, &stations)?;
    let meteo = formats::read_meteo_dir(&args.meteo)?;
    let landcover = formats::read_landcover(&args.landcover)?;
    let mut fields = Vec::new();
    for path in field_paths(&args.fields)? {
        fields.push(formats::read_grid_field(&path)?);
    }
    fields.sort_by_key(|f: &GridField| f.overpass_time);

    let table = build_table(
        &series,
        &fields,
        &meteo,
        &landcover,
        pollutant,
        (max_gap_hours * 3_600.0) as i64,
    )
    .map_err(|e| anyhow!("{e}"))?;
    if table.n_rows() == 0 {
        eprintln!("warning: no (station, overpass) pair passed the completeness rule");
    }
    formats::write_table(&args.out, &table)?;

    let mut manifest = RunManifest::start("build-dataset", 0);
    for (key, path) in [
        ("stations", &args.stations),
        ("observations", &args.observations),
        ("fields", &args.fields),
        ("meteo", &args.meteo),
        ("landcover", &args.landcover),
    ] {
        manifest.input(key, path);
    }
    manifest.param("pollutant", pollutant.name());
    manifest.param("max_gap_hours", max_gap_hours);
    manifest.param("rows", table.n_rows());
    manifest.write(&args.out)?;
    println!(
        "built `{}`: {} rows x {} features",
        args.out.display(),
        table.n_rows(),
        table.n_features()
    );
    Ok(())
}

fn run_tune(args: TuneArgs, settings: &Settings) -> Result<()> {
    let seed = settings.resolve_seed(args.seed)?;
    let table = formats::read_table(&args.data)?;
    let t0 = Instant::now();
    let entries = eval::hyperparameter_sweep(&table, seed, &mut || t0.elapsed().as_secs_f64())
        .map_err(|e| anyhow!("{e}"))?;
    formats::write_sweep(&args.out, &entries)?;

    let mut manifest = RunManifest::start("tune", seed);
    manifest.input("data", &args.data);
    manifest.param("entries", entries.len());
    manifest.write(&args.out)?;
    let best = entries
        .iter()
        .min_by(|a, b| a.mean_mse.total_cmp(&b.mean_mse))
        .unwrap();
    println!(
        "swept 30 configs into `{}`; best mean MSE {:.4} at {} trees, max_features {}",
        args.out.display(),
        best.mean_mse,
        best.n_estimators,
        best.max_features.name()
    );
    Ok(())
}

fn run_train(args: TrainArgs, settings: &Settings) -> Result<()> {
    let seed = settings.resolve_seed(args.seed)?;
    let threads = settings.resolve(args.threads, "threads", 1)?;
    let config = forest_config(
        settings,
        seed,
        args.trees,
        args.max_features,
        args.min_samples_split,
        args.min_samples_leaf,
    )?;
    let table = formats::read_table(&args.data)?;
    let model = parallel::fit_forest(&table, &config, threads).map_err(|e| anyhow!("{e}"))?;
    model_file::write_model(&args.out, &model)?;

    let mut manifest = RunManifest::start("train", seed);
    manifest.input("data", &args.data);
    manifest.param("trees", config.n_estimators);
    manifest.param("max_features", config.max_features.name());
    manifest.param("min_samples_split", config.min_samples_split);
    manifest.param("min_samples_leaf", config.min_samples_leaf);
    manifest.param("threads", threads);
    manifest.write(&args.out)?;
    println!(
        "trained {} trees on {} rows; model in `{}`",
        config.n_estimators,
        table.n_rows(),
        args.out.display()
    );
    Ok(())
}

fn run_evaluate(args: EvaluateArgs, settings: &Settings) -> Result<()> {
    let seed = settings.resolve_seed(args.seed)?;
    let k = settings.resolve(args.k, "k", 10)?;
    let config = forest_config(settings, seed, args.trees, args.max_features, None, None)?;
    let table = formats::read_table(&args.data)?;

    let mut manifest = RunManifest::start("evaluate", seed);
    manifest.input("data", &args.data);
    manifest.param("method", &args.method);
    manifest.param("trees", config.n_estimators);
    manifest.param("max_features", config.max_features.name());

    match args.method.as_str() {
        "a" => {
            let outcome = eval::run_method_a(&table, &config, k).map_err(|e| anyhow!("{e}"))?;
            warn_outcome(&outcome);
            formats::write_cv_report(&args.out, &outcome)?;
            manifest.param("k", k);
            manifest.write(&args.out)?;
            print_outcome("method a", &outcome, &args.out);
        }
        "b" => {
            let test_path = args
                .test_data
                .ok_or_else(|| anyhow!("--method b needs --test-data <FILE>"))?;
            let test = formats::read_table(&test_path)?;
            let report = eval::run_method_b(&table, &test, &config).map_err(|e| anyhow!("{e}"))?;
            formats::write_single_report(&args.out, &report)?;
            manifest.input("test_data", &test_path);
            manifest.write(&args.out)?;
            println!(
                "method b: r2 {:.4}, rmse {:.4}, bias {:.4} -> `{}`",
                report.r2,
                report.rmse,
                report.bias,
                args.out.display()
            );
        }
        "c" => {
            let stations_path = args
                .stations
                .ok_or_else(|| anyhow!("--method c needs --stations <FILE>"))?;
            let stations = formats::read_station_meta(&stations_path)?;
            let outcome =
                eval::run_method_c(&table, &stations, &config, k).map_err(|e| anyhow!("{e}"))?;
            warn_outcome(&outcome);
            formats::write_cv_report(&args.out, &outcome)?;
            manifest.input("stations", &stations_path);
            manifest.param("k", k);
            manifest.write(&args.out)?;
            print_outcome("method c", &outcome, &args.out);
        }
        _ => unreachable!("clap restricts --method"),
    }
    Ok(())
}

fn warn_outcome(outcome: &eval::CvOutcome) {
    for fold in &outcome.skipped_folds {
        eprintln!("warning: fold {fold} has no test rows; skipped");
    }
    for fold in &outcome.folds {
        if fold.r2.is_none() {
            eprintln!(
                "warning: fold {} test observations have zero variance; excluded from mean r2",
                fold.fold
            );
        }
    }
}

fn print_outcome(label: &str, outcome: &eval::CvOutcome, out: &Path) {
    match outcome.mean_r2() {
        Some(r2) => println!(
            "{label}: mean r2 {:.4}, rmse {:.4}, bias {:.4} over {} fold(s) -> `{}`",
            r2,
            outcome.mean_rmse(),
            outcome.mean_bias(),
            outcome.folds.len(),
            out.display()
        ),
        None => println!(
            "{label}: r2 undefined, rmse {:.4}, bias {:.4} over {} fold(s) -> `{}`",
            outcome.mean_rmse(),
            outcome.mean_bias(),
            outcome.folds.len(),
            out.display()
        ),
    }
}

fn run_importance(args: ImportanceArgs, settings: &Settings) -> Result<()> {
    let seed = settings.resolve_seed(args.seed)?;
    let repeats = settings.resolve(args.repeats, "repeats", 10)?;
    let train_fraction = settings.resolve(args.train_fraction, "train-fraction", 0.8)?;
    if !train_fraction.is_finite() || train_fraction <= 0.0 || train_fraction >= 1.0 {
        bail!("--train-fraction must lie in (0, 1), got {train_fraction}");
    }
    let config = forest_config(settings, seed, args.trees, args.max_features, None, None)?;
    let table = formats::read_table(&args.data)?;
    let n = table.n_rows();
    if n < 2 {
        bail!("need at least two rows to split, got {n}");
    }

    // Seeded shuffle, then an 80/20-style split.
    let mut order: Vec<usize> = (0..n).collect();
    smog_core::rng::Xoshiro256::from_seed(smog_core::rng::derive_seed(seed, 0)).shuffle(&mut order);
    let n_train = ((n as f64 * train_fraction) as usize).clamp(1, n - 1);
    let train = table.subset(&order[..n_train]);
    let test = table.subset(&order[n_train..]);

    let model = smog_core::forest::fit(&train, &config).map_err(|e| anyhow!("{e}"))?;
    let gini = model.gini_importance();
    let permutation = model
        .permutation_importance(&test, repeats, smog_core::rng::derive_seed(seed, 1))
        .map_err(|e| anyhow!("{e}"))?;
    formats::write_importance(&args.out, model.feature_names(), &gini, &permutation)?;

    let mut manifest = RunManifest::start("importance", seed);
    manifest.input("data", &args.data);
    manifest.param("repeats", repeats);
    manifest.param("train_fraction", train_fraction);
    manifest.param("trees", config.n_estimators);
    manifest.write(&args.out)?;
    let mut ranked: Vec<(usize, f64)> = gini.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!(
        "importances -> `{}`; top feature by gini: `{}` ({:.3})",
        args.out.display(),
        model.feature_names()[ranked[0].0],
        ranked[0].1
    );
    Ok(())
}

fn run_predict_grid(args: PredictGridArgs, settings: &Settings) -> Result<()> {
    let threads = settings.resolve(args.threads, "threads", 1)?;
    let type_code = settings.resolve(args.station_type, "station-type", 3)?;
    let station_type = StationType::from_code(type_code).map_err(|e| anyhow!("{e}"))?;
    let model = model_file::read_model(&args.model)?;
    let meteo = formats::read_meteo_dir(&args.meteo)?;
    let landcover = formats::read_landcover(&args.landcover)?;
    let elevation = formats::read_elevation(&args.elevation)?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create `{}`", args.out.display()))?;
    let mut manifest = RunManifest::start("predict-grid", 0);
    manifest.input("model", &args.model);
    manifest.input("fields", &args.fields);
    manifest.param("station_type", type_code);
    manifest.param("threads", threads);

    let mut written = 0usize;
    let mut attributes: Option<GridAttributes> = None;
    for path in field_paths(&args.fields)? {
        let field = formats::read_grid_field(&path)?;
        // Static cell attributes are shared by every overpass.
        if attributes.as_ref().is_none_or(|a| a.spec != field.spec) {
            if attributes.is_some() {
                bail!("`{}` uses a different grid spec", path.display());
            }
            attributes = Some(
                GridAttributes::compute(&field.spec, &landcover, &elevation, station_type)
                    .map_err(|e| anyhow!("{e}"))?,
            );
        }
        let rows = build_grid_rows(&field, &meteo, attributes.as_ref().unwrap())
            .map_err(|e| anyhow!("`{}`: {e}", path.display()))?;
        let spec = field.spec.clone();
        let mut cells: Vec<Option<f64>> = vec![None; spec.n_cells()];
        if rows.table.n_rows() > 0 {
            let values = parallel::predict(&model, &rows.table, threads)
                .map_err(|e| anyhow!("`{}`: {e}", path.display()))?;
            for (&(row, col), value) in rows.cells.iter().zip(values) {
                cells[spec.flat(row, col)] = Some(value);
            }
        } else {
            eprintln!(
                "warning: `{}` has no cells with full coverage",
                path.display()
            );
        }
        let predictions = OverpassPredictions {
            time: field.overpass_time,
            cells,
        };
        let stem = path.file_stem().unwrap().to_string_lossy();
        let out_path = args.out.join(format!("{stem}_pred.csv"));
        formats::write_predictions(&out_path, &spec, &predictions)?;
        written += 1;
    }
    manifest.write(&args.out)?;
    println!(
        "predicted {written} overpass(es) into `{}`",
        args.out.display()
    );
    Ok(())
}

fn run_aggregate(args: AggregateArgs, _settings: &Settings) -> Result<()> {
    let mut spec = None;
    let mut overpasses = Vec::new();
    for path in field_paths(&args.predictions)? {
        let (file_spec, predictions) = formats::read_predictions(&path)?;
        match &spec {
            None => spec = Some(file_spec),
            Some(existing) => {
                if *existing != file_spec {
                    bail!("`{}` uses a different grid spec", path.display());
                }
            }
        }
        overpasses.push(predictions);
    }
    let spec = spec.ok_or_else(|| anyhow!("no prediction files found"))?;
    overpasses.sort_by_key(|o| o.time);

    let raster = annual_mean(&spec, &overpasses).map_err(|e| anyhow!("{e}"))?;
    let stats = monthly_stats(&overpasses);

    let prefix = args.out_prefix.display();
    let asc_path = PathBuf::from(format!("{prefix}_annual_mean.asc"));
    let monthly_path = PathBuf::from(format!("{prefix}_monthly.csv"));
    ascii_grid::write_ascii_grid(&asc_path, &raster)?;
    formats::write_monthly_stats(&monthly_path, &stats)?;

    let mut manifest = RunManifest::start("aggregate", 0);
    manifest.input("predictions", &args.predictions);
    manifest.param("overpasses", overpasses.len());
    manifest.write(&asc_path)?;
    println!(
        "aggregated {} overpass(es) -> `{}`, `{}`",
        overpasses.len(),
        asc_path.display(),
        monthly_path.display()
    );
    Ok(())
}

fn run_synth(args: SynthArgs, settings: &Settings) -> Result<()> {
    match args.what {
        SynthCommand::Table(args) => {
            let seed = settings.resolve_seed(args.seed)?;
            let n = settings.resolve(args.n, "n", 5_000)?;
            let n_stations = settings.resolve(args.stations, "stations", 50)?;
            let table = match args.kind.as_str() {
                "smooth" => synth::smooth_table(n, seed),
                "noise" => synth::noise_table(n, seed),
                "linear" => synth::linear_table(n, seed),
                "station-effects" => {
                    let (table, stations) = synth::station_effects_table(n, n_stations, seed);
                    if let Some(stations_out) = &args.stations_out {
                        formats::write_station_meta(stations_out, &stations)?;
                    }
                    table
                }
                _ => unreachable!("clap restricts --kind"),
            };
            formats::write_table(&args.out, &table)?;
            let mut manifest = RunManifest::start("synth-table", seed);
            manifest.param("kind", &args.kind);
            manifest.param("n", n);
            manifest.write(&args.out)?;
            println!(
                "wrote {} synthetic rows ({}) to `{}`",
                table.n_rows(),
                args.kind,
                args.out.display()
            );
        }
        SynthCommand::Pipeline(args) => {
            let seed = settings.resolve_seed(args.seed)?;
            let n_stations = settings.resolve(args.stations, "stations", 12)?;
            let n_overpasses = settings.resolve(args.overpasses, "overpasses", 24)?;
            let paths = synth::generate_pipeline(&args.out, seed, n_stations, n_overpasses)?;
            let mut manifest = RunManifest::start("synth-pipeline", seed);
            manifest.param("stations", n_stations);
            manifest.param("overpasses", n_overpasses);
            manifest.write(&args.out)?;
            println!(
                "wrote synthetic pipeline inputs ({} swaths, {} stations) under `{}`",
                paths.swaths.len(),
                n_stations,
                args.out.display()
            );
        }
    }
    Ok(())
}
