use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use finsler::classify::classify;
use finsler::config::{MetricConfig, RunConfig};
use finsler::metric::validate;
use finsler::report::{self, Format, PointsReport};
use finsler::verify::run_verification;
use finsler::zoo::catalog;
use finsler::{CurvatureEngine, EngineOptions, FinslerError, MetricSpec64, PointOnTM64, Result};

#[derive(Parser)]
#[command(name = "finsler", version, about = "Finsler curvature engine: reports, classification and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check domain, positivity, homogeneity and strong convexity on samples.
    Validate(Common),
    /// Label the metric (Berwald, Landsberg, ...) from sampled curvature.
    Classify(Common),
    /// Curvature data at given or sampled points.
    Report(Common),
    /// Run the identity verification suite.
    Verify(VerifyArgs),
    /// The built-in metric catalog.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    List {
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "zoo")]
    config: Option<PathBuf>,
    /// Use a catalog metric with default parameters instead of a config file.
    #[arg(long)]
    zoo: Option<String>,
    /// Override the sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Indicatrix node count for the fiber identities.
    #[arg(long)]
    resolution: Option<usize>,
    /// Sphere quadrature resolution of the volume form.
    #[arg(long)]
    volume_resolution: Option<usize>,
    /// CSV file of points with header x1..xn,y1..yn (validate, report).
    #[arg(long)]
    points: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Also write per-node residuals of the fiber identities as CSV.
    #[arg(long)]
    nodal_csv: Option<PathBuf>,
    /// Multiply E inside the engine by this factor (fault injection).
    #[arg(long, default_value_t = 1.0)]
    inject_e_scale: f64,
}

impl Common {
    fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.zoo) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => RunConfig::new(MetricConfig::zoo(name)),
            (None, None) => {
                return Err(FinslerError::Config("one of --config or --zoo is required".into()))
            }
        };
        if let Some(s) = self.seed {
            cfg.samples.seed = s;
        }
        if let Some(r) = self.resolution {
            cfg.fiber_nodes = r;
        }
        if self.volume_resolution.is_some() {
            cfg.volume_resolution = self.volume_resolution;
        }
        Ok(cfg)
    }

    fn points(&self, m: &MetricSpec64, cfg: &RunConfig) -> Result<Vec<PointOnTM64>> {
        match &self.points {
            Some(path) => {
                let src = std::fs::read_to_string(path)
                    .map_err(|e| FinslerError::Io(format!("{}: {e}", path.display())))?;
                report::parse_points_csv(&src, m.dim())
            }
            None => Ok(cfg
                .samples
                .draw(m, &|_| true)?
                .into_iter()
                .flat_map(|f| f.points)
                .collect()),
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        write_out(self.out.as_ref(), text)
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| FinslerError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

/// `Ok(true)` when all checks passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Zoo {
            action: ZooAction::List { format },
        } => {
            let text = match Format::from(format) {
                Format::Json => json(
                    &catalog()
                        .iter()
                        .map(|z| serde_json::json!({"name": z.name, "params": z.params, "summary": z.summary}))
                        .collect::<Vec<_>>(),
                ),
                Format::Csv => {
                    let mut s = String::from("name,params,summary\n");
                    for z in catalog() {
                        s.push_str(&format!("{},\"{}\",\"{}\"\n", z.name, z.params, z.summary));
                    }
                    s
                }
            };
            write_out(None, &text)?;
            Ok(true)
        }
        Command::Validate(c) => {
            let cfg = c.run_config()?;
            let m: MetricSpec64 = cfg.metric.build_unchecked()?;
            let pts = c.points(&m, &cfg)?;
            let v = validate(&m, &pts);
            c.emit(&match c.format.into() {
                Format::Json => json(&v),
                Format::Csv => report::validation_csv(&v),
            })?;
            if let Some(f) = v.first_failure() {
                eprintln!("validation failed at sample {}: {:?}: {}", f.sample, f.kind, f.detail);
            }
            Ok(v.passed)
        }
        Command::Classify(c) => {
            let cfg = c.run_config()?;
            let engine = CurvatureEngine::new(cfg.metric.build()?, cfg.volume_form()?);
            let r = classify(&engine, &cfg.samples, &cfg.tolerances)?;
            c.emit(&match c.format.into() {
                Format::Json => json(&r),
                Format::Csv => report::classification_csv(&r),
            })?;
            Ok(true)
        }
        Command::Report(c) => {
            let cfg = c.run_config()?;
            let engine = CurvatureEngine::new(cfg.metric.build()?, cfg.volume_form()?);
            let pts = c.points(&engine.metric, &cfg)?;
            let points = pts.iter().map(|p| engine.bundle(p)).collect::<Result<_>>()?;
            let r = PointsReport {
                metric: engine.metric.label(),
                volume: engine.volume.label(),
                points,
            };
            c.emit(&match c.format.into() {
                Format::Json => r.to_json(),
                Format::Csv => r.to_csv(),
            })?;
            Ok(true)
        }
        Command::Verify(v) => {
            let cfg = v.common.run_config()?;
            let opts = EngineOptions {
                mean_berwald_scale: v.inject_e_scale,
            };
            let run = run_verification(&cfg, &opts)?;
            v.common.emit(&match v.common.format.into() {
                Format::Json => run.report.to_json(),
                Format::Csv => report::verification_csv(&run.report),
            })?;
            if let Some(p) = &v.nodal_csv {
                write_out(Some(p), &report::nodal_csv(&run.nodal))?;
            }
            for i in run.report.identities.iter().filter(|i| !i.passed()) {
                eprintln!("FAIL {}: max residual {:e} (tolerance {:e})", i.id, i.max_residual, i.tolerance);
            }
            Ok(run.report.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
