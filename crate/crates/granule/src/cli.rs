//! Command-line interface.
//!
//! Subcommands: `summarize`, `balls`, `sample`, `noise`, `eval`, `sweep`.
//! Option precedence is command-line flag, then `--config` TOML file, then
//! built-in default. Relative `--input` paths are resolved against
//! `GRANULE_DATA_DIR` when that variable is set. Every run echoes its
//! effective configuration on stdout. Exit codes: 0 success, 2 usage or
//! input problems, 3 internal invariant violations.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::{self, ClassifierKind, EvalConfig, SamplerKind};
use crate::gbabs;
use crate::harness;
use crate::io::{self, CsvSchema, FigureRow, LabelColumn};
use crate::rdgbg;
use crate::rng::RngStream;

pub const DATA_DIR_ENV: &str = "GRANULE_DATA_DIR";

#[derive(Parser)]
#[command(
    name = "granule",
    version,
    about = "Granular-ball borderline sampling toolkit for classification datasets"
)]
struct Cli {
    /// TOML file with default option values (rho, seed, k, folds, repeats,
    /// normalize). Command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputOpts {
    /// Input dataset (CSV). Relative paths are resolved against
    /// GRANULE_DATA_DIR when set.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Treat the first row as data, not column names.
    #[arg(long)]
    no_header: bool,
    /// Label column: "last", a zero-based index, or a header name.
    #[arg(long, default_value = "last", value_name = "COL")]
    label_column: String,
}

fn parse_label_column(spec: &str) -> LabelColumn {
    if spec.eq_ignore_ascii_case("last") {
        LabelColumn::Last
    } else if let Ok(idx) = spec.parse::<usize>() {
        LabelColumn::Index(idx)
    } else {
        LabelColumn::Name(spec.to_string())
    }
}

fn build_schema(delimiter: char, no_header: bool, label_column: &str) -> Result<CsvSchema> {
    if !delimiter.is_ascii() {
        return Err(Error::usage(format!(
            "delimiter must be a single ASCII character, got {delimiter:?}"
        )));
    }
    Ok(CsvSchema {
        delimiter: delimiter as u8,
        has_header: !no_header,
        label_column: parse_label_column(label_column),
    })
}

/// Resolve a dataset path against `GRANULE_DATA_DIR` (relative paths only).
pub fn resolve_input(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var(DATA_DIR_ENV) {
            if !dir.is_empty() {
                return Path::new(&dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

impl InputOpts {
    fn load(&self) -> Result<(Dataset, PathBuf)> {
        let path = resolve_input(&self.input);
        let schema = build_schema(self.delimiter, self.no_header, &self.label_column)?;
        let dataset = io::load_csv(&path, &schema)?;
        Ok((dataset, path))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Gbabs,
    Srs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassifierArg {
    Knn,
    Cart,
}

impl From<ClassifierArg> for ClassifierKind {
    fn from(c: ClassifierArg) -> Self {
        match c {
            ClassifierArg::Knn => ClassifierKind::Knn,
            ClassifierArg::Cart => ClassifierKind::Cart,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplerArg {
    None,
    Gbabs,
    Srs,
}

impl From<SamplerArg> for SamplerKind {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::None => SamplerKind::None,
            SamplerArg::Gbabs => SamplerKind::Gbabs,
            SamplerArg::Srs => SamplerKind::Srs,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print shape and class balance of a dataset.
    Summarize {
        #[command(flatten)]
        input: InputOpts,
        /// Emit the summary as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Granulate a dataset and write the ball set as JSON.
    Balls {
        #[command(flatten)]
        input: InputOpts,
        /// Neighbor-vetting count (>= 2).
        #[arg(long)]
        rho: Option<usize>,
        /// Seed for the deterministic random stream.
        #[arg(long)]
        seed: Option<u64>,
        /// Min-max normalize features before granulating.
        #[arg(long)]
        normalize: bool,
        /// Output JSON path.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Select a training subset and write it as CSV.
    Sample {
        #[command(flatten)]
        input: InputOpts,
        /// Subset selection method.
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Sampling ratio in [0, 1]; required for srs, ignored by gbabs.
        #[arg(long)]
        ratio: Option<f64>,
        /// Neighbor-vetting count (>= 2).
        #[arg(long)]
        rho: Option<usize>,
        /// Seed for the deterministic random stream.
        #[arg(long)]
        seed: Option<u64>,
        /// Min-max normalize features before sampling. Exported rows keep
        /// their original values either way.
        #[arg(long)]
        normalize: bool,
        /// Output CSV path.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Flip a fraction of labels to random other classes and write the
    /// noisy dataset as CSV.
    Noise {
        #[command(flatten)]
        input: InputOpts,
        /// Fraction of samples to flip, in [0, 1).
        #[arg(long)]
        ratio: f64,
        /// Seed for the deterministic random stream.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Cross-validate a classifier, optionally subsampling training folds.
    Eval {
        #[command(flatten)]
        input: InputOpts,
        /// Classifier to cross-validate.
        #[arg(long, value_enum)]
        classifier: ClassifierArg,
        /// Training-fold subsampling method.
        #[arg(long, value_enum, default_value = "none")]
        sampler: SamplerArg,
        /// Neighbor count for knn.
        #[arg(long)]
        k: Option<usize>,
        /// Neighbor-vetting count for gbabs (>= 2).
        #[arg(long)]
        rho: Option<usize>,
        /// Cross-validation folds (>= 2).
        #[arg(long)]
        folds: Option<usize>,
        /// Cross-validation repetitions (>= 1).
        #[arg(long)]
        repeats: Option<usize>,
        /// Seed for the deterministic random stream.
        #[arg(long)]
        seed: Option<u64>,
        /// Inject this fraction of label noise before cross-validation.
        #[arg(long)]
        noise: Option<f64>,
        /// Skip the default min-max normalization.
        #[arg(long)]
        no_normalize: bool,
        /// Write the full fold-by-fold report as JSON.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Run a parameter sweep over several datasets and write tidy figure
    /// data (group,x,y).
    Sweep {
        /// Input dataset; repeat the flag for several datasets.
        #[arg(long = "input", value_name = "PATH", required = true)]
        inputs: Vec<PathBuf>,
        /// Field delimiter.
        #[arg(long, default_value_t = ',')]
        delimiter: char,
        /// Treat the first row as data, not column names.
        #[arg(long)]
        no_header: bool,
        /// Label column: "last", a zero-based index, or a header name.
        #[arg(long, default_value = "last", value_name = "COL")]
        label_column: String,
        /// Sweep rho over these values (comma-separated), x = rho.
        #[arg(long, value_delimiter = ',', value_name = "LIST")]
        rho_list: Option<Vec<usize>>,
        /// Sweep injected label noise over these ratios, x = ratio.
        #[arg(long, value_delimiter = ',', value_name = "LIST")]
        noise_list: Option<Vec<f64>>,
        /// Also cross-validate this classifier (sampler gbabs) at each
        /// sweep point, adding "<group>:<classifier>" accuracy rows.
        #[arg(long, value_enum)]
        classifier: Option<ClassifierArg>,
        /// Neighbor count for knn.
        #[arg(long)]
        k: Option<usize>,
        /// Cross-validation folds (>= 2).
        #[arg(long)]
        folds: Option<usize>,
        /// Cross-validation repetitions (>= 1).
        #[arg(long)]
        repeats: Option<usize>,
        /// Base rho for noise sweeps.
        #[arg(long)]
        rho: Option<usize>,
        /// Seed for the deterministic random stream.
        #[arg(long)]
        seed: Option<u64>,
        /// Min-max normalize features before granulating.
        #[arg(long)]
        normalize: bool,
        /// Output CSV path.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
}

/// Option defaults loadable from a `--config` TOML file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    rho: Option<usize>,
    seed: Option<u64>,
    k: Option<usize>,
    folds: Option<usize>,
    repeats: Option<usize>,
    normalize: Option<bool>,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
    toml::from_str(&text).map_err(|e| {
        Error::usage(format!("config {}: {e}", path.display()))
    })
}

struct Resolved {
    rho: usize,
    seed: u64,
    k: usize,
    folds: usize,
    repeats: usize,
}

impl FileConfig {
    fn resolve(
        &self,
        rho: Option<usize>,
        seed: Option<u64>,
        k: Option<usize>,
        folds: Option<usize>,
        repeats: Option<usize>,
    ) -> Resolved {
        Resolved {
            rho: rho.or(self.rho).unwrap_or(rdgbg::DEFAULT_RHO),
            seed: seed.or(self.seed).unwrap_or(0),
            k: k.or(self.k).unwrap_or(eval::knn::DEFAULT_K),
            folds: folds.or(self.folds).unwrap_or(eval::DEFAULT_FOLDS),
            repeats: repeats.or(self.repeats).unwrap_or(eval::DEFAULT_REPEATS),
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_code<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file_config = load_file_config(cli.config.as_deref())?;
    match cli.command {
        Command::Summarize { input, json } => cmd_summarize(&input, json),
        Command::Balls {
            input,
            rho,
            seed,
            normalize,
            out,
        } => cmd_balls(&input, &file_config, rho, seed, normalize, &out),
        Command::Sample {
            input,
            method,
            ratio,
            rho,
            seed,
            normalize,
            out,
        } => cmd_sample(&input, &file_config, method, ratio, rho, seed, normalize, &out),
        Command::Noise {
            input,
            ratio,
            seed,
            out,
        } => cmd_noise(&input, &file_config, ratio, seed, &out),
        Command::Eval {
            input,
            classifier,
            sampler,
            k,
            rho,
            folds,
            repeats,
            seed,
            noise,
            no_normalize,
            report,
        } => cmd_eval(
            &input,
            &file_config,
            classifier,
            sampler,
            k,
            rho,
            folds,
            repeats,
            seed,
            noise,
            no_normalize,
            report.as_deref(),
        ),
        Command::Sweep {
            inputs,
            delimiter,
            no_header,
            label_column,
            rho_list,
            noise_list,
            classifier,
            k,
            folds,
            repeats,
            rho,
            seed,
            normalize,
            out,
        } => cmd_sweep(SweepSpec {
            inputs,
            schema: build_schema(delimiter, no_header, &label_column)?,
            rho_list,
            noise_list,
            classifier,
            resolved: file_config.resolve(rho, seed, k, folds, repeats),
            normalize,
            out,
        }),
    }
}

fn cmd_summarize(input: &InputOpts, json: bool) -> Result<()> {
    let (dataset, path) = input.load()?;
    println!("config: command=summarize input={}", path.display());
    let s = dataset.summarize();
    if json {
        let value = serde_json::to_value(&s)
            .map_err(|e| Error::internal(format!("serializing summary: {e}")))?;
        println!(
            "{}",
            serde_json::to_string_pretty(&value)
                .map_err(|e| Error::internal(format!("serializing summary: {e}")))?
        );
    } else {
        println!("samples: {}", s.n_samples);
        println!("features: {}", s.n_features);
        let classes: Vec<String> = s
            .class_labels
            .iter()
            .zip(&s.class_counts)
            .map(|(l, c)| format!("{l}={c}"))
            .collect();
        println!("classes: {} ({})", s.n_classes, classes.join(", "));
        println!("imbalance_ratio: {:.4}", s.imbalance_ratio);
    }
    Ok(())
}

fn cmd_balls(
    input: &InputOpts,
    file_config: &FileConfig,
    rho: Option<usize>,
    seed: Option<u64>,
    normalize: bool,
    out: &Path,
) -> Result<()> {
    let (dataset, path) = input.load()?;
    let r = file_config.resolve(rho, seed, None, None, None);
    println!(
        "config: command=balls input={} rho={} seed={} normalize={}",
        path.display(),
        r.rho,
        r.seed,
        normalize
    );
    let working = if normalize { dataset.normalize_min_max() } else { dataset };
    let result = rdgbg::run_rdgbg(&working, r.rho, RngStream::new(r.seed))?;
    println!(
        "balls: total={} regular={} noise={} low_density={} iterations={}",
        result.balls.len(),
        result.n_regular(),
        result.noise_ids.len(),
        result.low_density_ids.len(),
        result.iterations
    );
    io::save_balls_json(&result, out)?;
    println!("wrote {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    input: &InputOpts,
    file_config: &FileConfig,
    method: MethodArg,
    ratio: Option<f64>,
    rho: Option<usize>,
    seed: Option<u64>,
    normalize: bool,
    out: &Path,
) -> Result<()> {
    let (dataset, path) = input.load()?;
    let r = file_config.resolve(rho, seed, None, None, None);
    let working = if normalize {
        dataset.normalize_min_max()
    } else {
        dataset.clone()
    };
    let (ids, ratio_out) = match method {
        MethodArg::Gbabs => {
            println!(
                "config: command=sample method=gbabs input={} rho={} seed={} normalize={}",
                path.display(),
                r.rho,
                r.seed,
                normalize
            );
            let (_, sampled) = gbabs::run_gbabs(&working, r.rho, RngStream::new(r.seed))?;
            (sampled.sample_ids, sampled.ratio)
        }
        MethodArg::Srs => {
            let ratio = ratio
                .ok_or_else(|| Error::usage("srs sampling requires --ratio"))?;
            println!(
                "config: command=sample method=srs input={} ratio={} seed={} normalize={}",
                path.display(),
                ratio,
                r.seed,
                normalize
            );
            let mut rng = RngStream::new(r.seed);
            let ids = harness::srs_sample(&working, ratio, &mut rng)?;
            let real = ids.len() as f64 / working.n_samples() as f64;
            (ids, real)
        }
    };
    println!(
        "sample: selected={} of={} ratio={:.4}",
        ids.len(),
        dataset.n_samples(),
        ratio_out
    );
    // Exported rows keep the original (unnormalized) feature values.
    io::save_subset_csv(&dataset, &ids, out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_noise(
    input: &InputOpts,
    file_config: &FileConfig,
    ratio: f64,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let (dataset, path) = input.load()?;
    let r = file_config.resolve(None, seed, None, None, None);
    println!(
        "config: command=noise input={} ratio={} seed={}",
        path.display(),
        ratio,
        r.seed
    );
    let mut rng = RngStream::new(r.seed);
    let (noisy, spec) = harness::inject_class_noise(&dataset, ratio, &mut rng)?;
    println!("noise: flipped={} of={}", spec.flipped_ids.len(), noisy.n_samples());
    let all: Vec<usize> = (0..noisy.n_samples()).collect();
    io::save_subset_csv(&noisy, &all, out)?;
    println!("wrote {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    input: &InputOpts,
    file_config: &FileConfig,
    classifier: ClassifierArg,
    sampler: SamplerArg,
    k: Option<usize>,
    rho: Option<usize>,
    folds: Option<usize>,
    repeats: Option<usize>,
    seed: Option<u64>,
    noise: Option<f64>,
    no_normalize: bool,
    report_path: Option<&Path>,
) -> Result<()> {
    let (dataset, path) = input.load()?;
    let r = file_config.resolve(rho, seed, k, folds, repeats);
    let normalize = if no_normalize {
        false
    } else {
        file_config.normalize.unwrap_or(true)
    };
    let noise_ratio = noise.unwrap_or(0.0);
    let config = EvalConfig {
        classifier: classifier.into(),
        sampler: sampler.into(),
        k: r.k,
        rho: r.rho,
        folds: r.folds,
        repeats: r.repeats,
        seed: r.seed,
        normalize,
        noise_ratio,
    };
    println!(
        "config: command=eval input={} classifier={} sampler={} k={} rho={} folds={} repeats={} seed={} normalize={} noise={}",
        path.display(),
        config.classifier.name(),
        config.sampler.name(),
        config.k,
        config.rho,
        config.folds,
        config.repeats,
        config.seed,
        config.normalize,
        config.noise_ratio
    );
    let working = if noise_ratio > 0.0 {
        let mut nrng = RngStream::new(config.seed).derive(&[3]);
        let (noisy, spec) = harness::inject_class_noise(&dataset, noise_ratio, &mut nrng)?;
        println!("noise: flipped={} of={}", spec.flipped_ids.len(), noisy.n_samples());
        noisy
    } else {
        dataset
    };
    let report = eval::cross_validate(&working, &config)?;
    println!(
        "folds: {} ok={} failed={} stratified={} leakage_audit={}",
        report.folds.len(),
        report.folds.len() - report.failed_folds,
        report.failed_folds,
        report.stratified,
        if report.leakage_audit_passed { "passed" } else { "FAILED" }
    );
    match (&report.mean, &report.stddev) {
        (Some(mean), Some(sd)) => {
            println!("accuracy: mean={:.4} sd={:.4}", mean.accuracy, sd.accuracy);
            println!("g_mean: mean={:.4} sd={:.4}", mean.g_mean, sd.g_mean);
            println!(
                "sampling_ratio: mean={:.4} sd={:.4}",
                mean.sampling_ratio, sd.sampling_ratio
            );
        }
        _ => println!("no successful folds"),
    }
    if let Some(p) = report_path {
        io::save_report_json(&report, p)?;
        println!("wrote {}", p.display());
    }
    if !report.leakage_audit_passed {
        return Err(Error::internal("leakage audit failed"));
    }
    Ok(())
}

struct SweepSpec {
    inputs: Vec<PathBuf>,
    schema: CsvSchema,
    rho_list: Option<Vec<usize>>,
    noise_list: Option<Vec<f64>>,
    classifier: Option<ClassifierArg>,
    resolved: Resolved,
    normalize: bool,
    out: PathBuf,
}

fn group_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn cmd_sweep(spec: SweepSpec) -> Result<()> {
    let (xs, sweeping_rho): (Vec<f64>, bool) = match (&spec.rho_list, &spec.noise_list) {
        (Some(r), None) if !r.is_empty() => (r.iter().map(|&v| v as f64).collect(), true),
        (None, Some(n)) if !n.is_empty() => (n.clone(), false),
        (Some(_), Some(_)) => {
            return Err(Error::usage("--rho-list and --noise-list are mutually exclusive"))
        }
        _ => {
            return Err(Error::usage(
                "sweep needs a non-empty --rho-list or --noise-list",
            ))
        }
    };
    let r = &spec.resolved;
    println!(
        "config: command=sweep inputs={} axis={} points={} rho={} seed={} normalize={} classifier={}",
        spec.inputs.len(),
        if sweeping_rho { "rho" } else { "noise" },
        xs.len(),
        r.rho,
        r.seed,
        spec.normalize,
        spec.classifier
            .map(|c| ClassifierKind::from(c).name())
            .unwrap_or("none")
    );

    let master = RngStream::new(r.seed);
    let mut ratio_rows: Vec<FigureRow> = Vec::new();
    let mut acc_rows: Vec<FigureRow> = Vec::new();
    for (i, input) in spec.inputs.iter().enumerate() {
        let path = resolve_input(input);
        let dataset = io::load_csv(&path, &spec.schema)?;
        let group = group_name(input);
        for (j, &x) in xs.iter().enumerate() {
            let tags = [if sweeping_rho { 4u64 } else { 5u64 }, i as u64, j as u64];
            let (point_data, rho_here) = if sweeping_rho {
                (dataset.clone(), x as usize)
            } else {
                let noisy = if x > 0.0 {
                    let mut nrng = master.derive(&[5, i as u64, j as u64, 1]);
                    harness::inject_class_noise(&dataset, x, &mut nrng)?.0
                } else {
                    dataset.clone()
                };
                (noisy, r.rho)
            };
            let working = if spec.normalize {
                point_data.normalize_min_max()
            } else {
                point_data.clone()
            };
            let (_, sampled) =
                gbabs::run_gbabs(&working, rho_here, master.derive(&tags))?;
            println!("sweep: group={group} x={x} ratio={:.4}", sampled.ratio);
            ratio_rows.push(FigureRow { group: group.clone(), x, y: sampled.ratio });

            if let Some(classifier) = spec.classifier {
                let config = EvalConfig {
                    classifier: classifier.into(),
                    sampler: SamplerKind::Gbabs,
                    k: r.k,
                    rho: rho_here,
                    folds: r.folds,
                    repeats: r.repeats,
                    seed: master.derive(&[6, i as u64, j as u64]).seed(),
                    normalize: true,
                    noise_ratio: if sweeping_rho { 0.0 } else { x },
                };
                let report = eval::cross_validate(&point_data, &config)?;
                let acc = report.mean.map(|m| m.accuracy).unwrap_or(f64::NAN);
                let cname = ClassifierKind::from(classifier).name();
                println!("sweep: group={group}:{cname} x={x} accuracy={acc:.4}");
                acc_rows.push(FigureRow {
                    group: format!("{group}:{cname}"),
                    x,
                    y: acc,
                });
            }
        }
    }
    ratio_rows.extend(acc_rows);
    io::save_figure_csv(&ratio_rows, &spec.out)?;
    println!("wrote {}", spec.out.display());
    Ok(())
}
