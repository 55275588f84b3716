use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use fairaudit::data::{load_csv, Dataset, GroupSpec};
use fairaudit::experiments::{run_all, run_case, ExperimentConfig, PREDICTION_THRESHOLD};
use fairaudit::gbdt::{predict_proba, train, GbdtModel};
use fairaudit::metrics::{confusion_matrix, fairness_report, performance_metrics};
use fairaudit::report::{canonical_json, canonical_value, render_tables};
use fairaudit::reweighing::{apply_reweighing, fit_reweighing};
use fairaudit::smote::fit_resample;

type CliResult = Result<(), Box<dyn Error>>;

#[derive(Parser)]
#[command(
    name = "fairaudit",
    version,
    about = "Group-fairness auditing: metrics, reweighing, SMOTE, gradient-boosted trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Both,
}

#[derive(Args)]
pub struct ConfigArgs {
    /// Experiment configuration (JSON document)
    #[arg(long)]
    pub config: PathBuf,
    /// Override the configured seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the favourable label
    #[arg(long)]
    pub favourable: Option<u8>,
    /// Override the protected column name
    #[arg(long)]
    pub protected: Option<String>,
    /// Override the privileged group value
    #[arg(long)]
    pub privileged: Option<String>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Fairness and performance report from a CSV of y_true,y_pred,group
    Audit {
        #[arg(long)]
        data: PathBuf,
        /// Privileged group value
        #[arg(long)]
        privileged: String,
        /// Unprivileged group value (default: the other value in the file)
        #[arg(long)]
        unprivileged: Option<String>,
        /// Protected attribute name used in the report
        #[arg(long, default_value = "group")]
        protected: String,
        #[arg(long, default_value_t = 0)]
        favourable: u8,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
    /// Fit a GBDT classifier and save the model as JSON
    Train {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output model path
        #[arg(long)]
        out: PathBuf,
    },
    /// Load a model and emit per-row probabilities as CSV
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Oversample the minority class; emit the transformed dataset as CSV
    Smote {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit reweighing on the dataset; emit reweighed CSV and the weight table
    Reweigh {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output CSV path (a weights JSON is written next to it)
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the five case studies (or one of them)
    #[command(group = clap::ArgGroup::new("scope").required(true))]
    Experiment {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Case to run (1..=5)
        #[arg(long, group = "scope", value_parser = clap::value_parser!(u8).range(1..=5))]
        case: Option<u8>,
        /// Run all five cases
        #[arg(long, group = "scope")]
        all: bool,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
    /// Re-render a saved JSON report as a plain-text table
    Report {
        /// Saved report (JSON)
        #[arg(long)]
        input: PathBuf,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig, Box<dyn Error>> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read config {}: {e}", args.config.display()))?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| format!("invalid config {}: {e}", args.config.display()))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(f) = args.favourable {
        config.group.favourable_label = f;
    }
    if let Some(p) = &args.protected {
        config.group.protected_name = p.clone();
        config.schema.protected_column = p.clone();
    }
    if let Some(p) = &args.privileged {
        config.group.privileged_value = p.clone();
    }
    config.schema.validate()?;
    config.group.validate()?;
    Ok(config)
}

/// Write the canonical JSON (and optionally the rendered table) of a report.
fn emit_report(value: &Value, stem: &Path, format: Format) -> CliResult {
    if let Some(dir) = stem.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    if format != Format::Table {
        let path = stem.with_extension("json");
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text)?;
        println!("{}", path.display());
    }
    if format != Format::Json {
        let path = stem.with_extension("txt");
        fs::write(&path, render_tables(value))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn write_dataset_csv(ds: &Dataset, config: &ExperimentConfig, path: &Path) -> CliResult {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = ds.feature_names().to_vec();
    header.push(config.schema.protected_column.clone());
    header.push(config.schema.label_column.clone());
    header.push("weight".to_string());
    w.write_record(&header)?;
    for i in 0..ds.n_rows() {
        let mut rec: Vec<String> = ds.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(ds.protected()[i].clone());
        rec.push(ds.labels()[i].to_string());
        rec.push(ds.weights()[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn run_audit(
    data: &Path,
    privileged: &str,
    unprivileged: Option<&str>,
    protected: &str,
    favourable: u8,
    out: Option<&Path>,
    format: Format,
) -> CliResult {
    let mut reader = csv::Reader::from_path(data)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize, Box<dyn Error>> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("column {name:?} not found in {}", data.display()).into())
    };
    let (ti, pi, gi) = (col("y_true")?, col("y_pred")?, col("group")?);
    let mut y_true = Vec::new();
    let mut y_pred = Vec::new();
    let mut groups: Vec<String> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<u8, Box<dyn Error>> {
            let cell = rec.get(i).unwrap_or("").trim();
            match cell {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(format!("label cell {other:?} not in {{0,1}}").into()),
            }
        };
        y_true.push(parse(ti)?);
        y_pred.push(parse(pi)?);
        groups.push(rec.get(gi).unwrap_or("").trim().to_string());
    }
    let unprivileged = match unprivileged {
        Some(u) => u.to_string(),
        None => groups
            .iter()
            .find(|g| *g != privileged)
            .cloned()
            .ok_or("cannot infer the unprivileged value: only one group present")?,
    };
    let spec = GroupSpec::new(protected, privileged, unprivileged, favourable)?;
    let cm = confusion_matrix(&y_true, &y_pred)?;
    let performance = performance_metrics(&cm)?;
    let fairness = fairness_report(&y_pred, &groups, &spec, Some(&y_true), None)?;
    let value = canonical_value(&serde_json::json!({
        "confusion_matrix": cm,
        "performance": performance,
        "fairness": fairness,
    }))?;
    match out {
        Some(dir) => emit_report(&value, &dir.join("audit"), format)?,
        None => {
            if format != Format::Table {
                let mut text = serde_json::to_string_pretty(&value)?;
                text.push('\n');
                print!("{text}");
            }
            if format != Format::Json {
                print!("{}", render_tables(&value));
            }
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Audit {
            data,
            privileged,
            unprivileged,
            protected,
            favourable,
            out,
            format,
        } => run_audit(
            &data,
            &privileged,
            unprivileged.as_deref(),
            &protected,
            favourable,
            out.as_deref(),
            format,
        ),
        Command::Train { data, config, out } => {
            let config = load_config(&config)?;
            let ds = load_csv(&data, &config.schema)?;
            let model = train(&ds, &config.gbdt)?;
            if let Some(dir) = out.parent() {
                if !dir.as_os_str().is_empty() {
                    fs::create_dir_all(dir)?;
                }
            }
            fs::write(&out, canonical_json(&model)?)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Predict {
            model,
            data,
            config,
            out,
        } => {
            let config = load_config(&config)?;
            let text = fs::read_to_string(&model)?;
            let model: GbdtModel = serde_json::from_str(&text)?;
            let ds = load_csv(&data, &config.schema)?;
            let probs = predict_proba(&model, ds.features(), ds.n_features())?;
            let labels: Vec<u8> = probs
                .iter()
                .map(|&p| (p >= PREDICTION_THRESHOLD) as u8)
                .collect();
            let mut w = csv::Writer::from_path(&out)?;
            w.write_record(["row", "probability", "label"])?;
            for (i, (p, l)) in probs.iter().zip(&labels).enumerate() {
                w.write_record([i.to_string(), p.to_string(), l.to_string()])?;
            }
            w.flush()?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Smote { data, config, out } => {
            let config = load_config(&config)?;
            let ds = load_csv(&data, &config.schema)?;
            let resampled = fit_resample(&ds, &config.smote)?;
            write_dataset_csv(&resampled, &config, &out)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Reweigh { data, config, out } => {
            let config = load_config(&config)?;
            let ds = load_csv(&data, &config.schema)?;
            let weights = fit_reweighing(&ds, &config.group)?;
            let reweighed = apply_reweighing(&ds, &weights)?;
            write_dataset_csv(&reweighed, &config, &out)?;
            println!("{}", out.display());
            let weights_path = out.with_extension("weights.json");
            fs::write(&weights_path, canonical_json(&weights)?)?;
            println!("{}", weights_path.display());
            Ok(())
        }
        Command::Experiment {
            data,
            config,
            case,
            all,
            out,
            format,
        } => {
            let config = load_config(&config)?;
            let ds = load_csv(&data, &config.schema)?;
            match (case, all) {
                (Some(case_id), false) => {
                    let result = run_case(case_id, &config, &ds)?;
                    let value = canonical_value(&result)?;
                    emit_report(&value, &out.join(format!("case_{case_id}")), format)
                }
                (None, true) => {
                    let summary = run_all(&config, &ds)?;
                    let value = canonical_value(&summary)?;
                    emit_report(&value, &out.join("summary"), format)
                }
                _ => Err("pass exactly one of --case <1..5> or --all".into()),
            }
        }
        Command::Report { input, out } => {
            let text = fs::read_to_string(&input)?;
            let value: Value = serde_json::from_str(&text)?;
            let table = render_tables(&value);
            match out {
                Some(path) => {
                    fs::write(&path, table)?;
                    println!("{}", path.display());
                }
                None => print!("{table}"),
            }
            Ok(())
        }
    }
}
