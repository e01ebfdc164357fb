//! Command-line front end. `run` returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::complexity::ComplexityWeights;
use crate::geom::DEFAULT_WELD_TOLERANCE;
use crate::registration::IcpOptions;
use crate::report::{self, EvalOptions, OutputFormat, ReportError, TrendEntry, TrendSeries};
use crate::similarity::{DimensionMode, SimilarityWeights};
use crate::stl::{self, StlDocument, StlFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Md,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Z,
}

#[derive(Debug, Parser)]
#[command(name = "cadfidelity", version, about = "Complexity and similarity metrics for 3D models")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: FormatArg,
    /// Aggregate weights: volume,surface,dimension,pca,icp.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    weights_similarity: Option<Vec<f64>>,
    /// Composite weights: feature,surface,topological.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    weights_complexity: Option<Vec<f64>>,
    #[arg(long, global = true, default_value_t = IcpOptions::default().max_iterations)]
    icp_max_iter: usize,
    #[arg(long, global = true, default_value_t = IcpOptions::default().tolerance)]
    icp_tol: f64,
    /// Start ICP from matched centroids.
    #[arg(long, global = true)]
    icp_pre_center: bool,
    /// Vertex weld tolerance for STL input, in mm.
    #[arg(long, global = true, default_value_t = DEFAULT_WELD_TOLERANCE)]
    weld_tol: f64,
    /// Use this many seeded surface samples instead of corner vertices.
    #[arg(long, global = true)]
    surface_samples: Option<usize>,
    /// Score a single bounding-box axis instead of the mean of all three.
    #[arg(long, global = true, value_enum)]
    dimension_axis: Option<AxisArg>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Structural complexity of one model.
    Complexity { model: PathBuf },
    /// Score a generated model against a ground-truth model.
    Compare { generated: PathBuf, truth: PathBuf },
    /// Recompute the reference evaluation table from the bundled models.
    #[command(name = "repro-table1")]
    ReproTable1,
    /// Scores of several labelled models against one truth model.
    Trend {
        truth: PathBuf,
        /// LABEL=PATH, in order.
        #[arg(required = true)]
        entries: Vec<String>,
        /// Also write a line chart.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Convert a box-only OpenSCAD file to STL.
    Scad2stl {
        scad: PathBuf,
        /// Output STL path (or use --out).
        output: Option<PathBuf>,
        #[arg(long)]
        ascii: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Mismatch,
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl Cli {
    fn options(&self) -> Result<EvalOptions, Failure> {
        let similarity_weights = match &self.weights_similarity {
            None => SimilarityWeights::default(),
            Some(w) => SimilarityWeights::from_slice(w)
                .ok_or_else(|| Failure::Input(format!("--weights-similarity needs 5 values, got {}", w.len())))?,
        };
        let complexity_weights = match &self.weights_complexity {
            None => ComplexityWeights::default(),
            Some(w) => ComplexityWeights::from_slice(w)
                .ok_or_else(|| Failure::Input(format!("--weights-complexity needs 3 values, got {}", w.len())))?,
        };
        if !(self.weld_tol >= 0.0) {
            return Err(Failure::Input("--weld-tol must be non-negative".into()));
        }
        if !(self.icp_tol >= 0.0) {
            return Err(Failure::Input("--icp-tol must be non-negative".into()));
        }
        if self.surface_samples == Some(0) {
            return Err(Failure::Input("--surface-samples must be positive".into()));
        }
        Ok(EvalOptions {
            similarity_weights,
            complexity_weights,
            icp: IcpOptions {
                max_iterations: self.icp_max_iter,
                tolerance: self.icp_tol,
                pre_center: self.icp_pre_center,
            },
            dimension_mode: match self.dimension_axis {
                None => DimensionMode::MeanOfAxes,
                Some(AxisArg::X) => DimensionMode::Axis(0),
                Some(AxisArg::Y) => DimensionMode::Axis(1),
                Some(AxisArg::Z) => DimensionMode::Axis(2),
            },
            surface_samples: self.surface_samples,
            weld_tolerance: self.weld_tol,
        })
    }

    fn output_format(&self) -> OutputFormat {
        match self.format {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Md => OutputFormat::Markdown,
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(cli: &Cli, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => write_file(path, text.as_bytes()),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

fn parse_entry(arg: &str) -> Result<(String, PathBuf), Failure> {
    match arg.split_once('=') {
        Some((label, path)) if !label.is_empty() && !path.is_empty() => Ok((label.to_string(), PathBuf::from(path))),
        _ => Err(Failure::Input(format!("trend entry {arg:?} is not LABEL=PATH"))),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let options = cli.options()?;
    if let Some(w) = options.similarity_weights.check() {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let format = cli.output_format();
    match &cli.command {
        Command::Complexity { model } => {
            let m = report::load_model(model, options.weld_tolerance)?;
            emit(cli, &report::complexity_report(&m, &options)?.render(format), stdout)
        }
        Command::Compare { generated, truth } => {
            let g = report::load_model(generated, options.weld_tolerance)?;
            let t = report::load_model(truth, options.weld_tolerance)?;
            emit(cli, &report::compare(&g, &t, &options)?.render(format), stdout)
        }
        Command::ReproTable1 => {
            let repro = report::reproduce_table1(&options)?;
            let text = match format {
                OutputFormat::Json => repro.to_json(),
                OutputFormat::Csv => repro.to_csv(),
                OutputFormat::Markdown => repro.to_markdown(),
            };
            emit(cli, &text, stdout)?;
            if repro.passed() {
                Ok(())
            } else {
                for c in repro.mismatches() {
                    let _ = writeln!(
                        stderr,
                        "mismatch: {} {}: expected {}, got {}",
                        c.row,
                        c.column,
                        report::fmt4(c.expected),
                        c.actual
                    );
                }
                Err(Failure::Mismatch)
            }
        }
        Command::Trend { truth, entries, svg } => {
            let t = report::load_model(truth, options.weld_tolerance)?;
            let parsed = entries.iter().map(|e| parse_entry(e)).collect::<Result<Vec<_>, _>>()?;
            let mut rows = Vec::with_capacity(parsed.len());
            for (label, path) in parsed {
                let g = report::load_model(&path, options.weld_tolerance)?;
                rows.push(TrendEntry {
                    label,
                    path: path.display().to_string(),
                    similarity: report::compare(&g, &t, &options)?.similarity,
                });
            }
            let series = TrendSeries::new(truth.display().to_string(), rows)?;
            if let Some(svg) = svg {
                write_file(svg, series.to_svg().as_bytes())?;
            }
            let text = match format {
                OutputFormat::Json => report::to_json(&series),
                OutputFormat::Csv => series.to_csv(),
                OutputFormat::Markdown => series.to_markdown(),
            };
            emit(cli, &text, stdout)
        }
        Command::Scad2stl { scad, output, ascii } => {
            let target = output
                .as_ref()
                .or(cli.out.as_ref())
                .ok_or_else(|| Failure::Input("scad2stl needs an output path".into()))?;
            if report::ModelFormat::from_path(scad) != Some(report::ModelFormat::Scad) {
                return Err(ReportError::UnsupportedFormat {
                    path: scad.display().to_string(),
                }
                .into());
            }
            let model = report::load_model(scad, options.weld_tolerance)?;
            let name = scad.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let fmt = if *ascii { StlFormat::Ascii } else { StlFormat::Binary };
            write_file(target, &stl::write_stl(&StlDocument::from_mesh(&model.mesh, &name), fmt))
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_INPUT
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Mismatch) => EXIT_MISMATCH,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
    }
}
