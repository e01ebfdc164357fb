//! Model loading, metric reports and their text renderings.

mod table;
mod trend;

pub use table::{reproduce_table1, Check, Table1Expected, Table1Repro, Table1Row, TABLE1};
pub use trend::{TrendEntry, TrendSeries};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::complexity::{self, ComplexityBreakdown, ComplexityError, ComplexityWeights};
use crate::geom::{self, Aabb, GeomError, PointCloud, TriangleMesh, DEFAULT_WELD_TOLERANCE};
use crate::registration::{self, IcpOptions, RegistrationError};
use crate::scad::{self, CsgError, ScadError};
use crate::similarity::{self, DimensionMode, SimilarityComponents, SimilarityError, SimilarityReport, SimilarityWeights};
use crate::stl::{self, StlError};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seed for opt-in surface sampling.
const SAMPLE_SEED: u64 = 0;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: unsupported model format (expected .stl or .scad)")]
    UnsupportedFormat { path: String },
    #[error("{path}: {source}")]
    Stl {
        path: String,
        #[source]
        source: StlError,
    },
    #[error("{path}: {source}")]
    Scad {
        path: String,
        #[source]
        source: ScadError,
    },
    #[error("{path}: {source}")]
    Csg {
        path: String,
        #[source]
        source: CsgError,
    },
    #[error("{path}: {source}")]
    Mesh {
        path: String,
        #[source]
        source: GeomError,
    },
    #[error(transparent)]
    Complexity(#[from] ComplexityError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Registration(#[from] RegistrationError),
    #[error("duplicate trend label {0:?}")]
    DuplicateLabel(String),
    #[error("trend needs at least one entry")]
    EmptyTrend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFormat {
    Stl,
    Scad,
}

impl ModelFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "stl" => Some(ModelFormat::Stl),
            "scad" => Some(ModelFormat::Scad),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputInfo {
    pub path: String,
    pub format: ModelFormat,
    pub sha256: String,
}

/// A model ready for measurement.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub info: InputInfo,
    pub mesh: TriangleMesh,
    pub area: f64,
    pub volume: f64,
    pub bounds: Aabb,
}

impl LoadedModel {
    pub fn from_mesh(info: InputInfo, mesh: TriangleMesh) -> Result<Self, ReportError> {
        let mesh_err = |source| ReportError::Mesh {
            path: info.path.clone(),
            source,
        };
        let volume = geom::mesh_volume(&mesh).map_err(mesh_err)?;
        let bounds = geom::bounding_box(&mesh).map_err(mesh_err)?;
        Ok(LoadedModel {
            area: geom::mesh_surface_area(&mesh),
            volume,
            bounds,
            mesh,
            info,
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Loads a model from memory. `.scad` text is evaluated exactly; STL facets
/// are welded at `weld_tolerance` and re-oriented outward.
pub fn load_model_bytes(path: &str, format: ModelFormat, bytes: &[u8], weld_tolerance: f64) -> Result<LoadedModel, ReportError> {
    let info = InputInfo {
        path: path.to_string(),
        format,
        sha256: sha256_hex(bytes),
    };
    match format {
        ModelFormat::Scad => {
            let scad_err = |source| ReportError::Scad {
                path: path.to_string(),
                source,
            };
            let text = String::from_utf8_lossy(bytes);
            let ast = scad::parse_scad(&text).map_err(scad_err)?;
            let solid = scad::evaluate(&ast).map_err(scad_err)?;
            let mesh = scad::extract_boundary_mesh(&solid).map_err(|source| ReportError::Csg {
                path: path.to_string(),
                source,
            })?;
            let bounds = geom::bounding_box(&mesh).map_err(|source| ReportError::Mesh {
                path: path.to_string(),
                source,
            })?;
            Ok(LoadedModel {
                area: scad::exact_area(&solid),
                volume: scad::exact_volume(&solid),
                bounds,
                mesh,
                info,
            })
        }
        ModelFormat::Stl => {
            let doc = stl::parse_stl(bytes).map_err(|source| ReportError::Stl {
                path: path.to_string(),
                source,
            })?;
            let mesh = geom::orient_outward(&geom::weld_vertices(&doc.to_soup(), weld_tolerance));
            LoadedModel::from_mesh(info, mesh)
        }
    }
}

pub fn load_model(path: &Path, weld_tolerance: f64) -> Result<LoadedModel, ReportError> {
    let shown = path.display().to_string();
    let format = ModelFormat::from_path(path).ok_or_else(|| ReportError::UnsupportedFormat { path: shown.clone() })?;
    let bytes = std::fs::read(path).map_err(|source| ReportError::Io {
        path: shown.clone(),
        source,
    })?;
    load_model_bytes(&shown, format, &bytes, weld_tolerance)
}

/// One of the bundled box models, by file name.
pub fn load_fixture(name: &str) -> Option<LoadedModel> {
    let text = crate::fixtures::by_name(name)?;
    load_model_bytes(name, ModelFormat::Scad, text.as_bytes(), DEFAULT_WELD_TOLERANCE).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub similarity_weights: SimilarityWeights,
    pub complexity_weights: ComplexityWeights,
    pub icp: IcpOptions,
    pub dimension_mode: DimensionMode,
    /// Compare dense surface samples instead of corner vertices.
    pub surface_samples: Option<usize>,
    pub weld_tolerance: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            similarity_weights: SimilarityWeights::default(),
            complexity_weights: ComplexityWeights::default(),
            icp: IcpOptions::default(),
            dimension_mode: DimensionMode::default(),
            surface_samples: None,
            weld_tolerance: DEFAULT_WELD_TOLERANCE,
        }
    }
}

/// Whether a number follows a fixed published definition or depends on a
/// choice made by this tool (a free weight, an unspecified convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricOrigin {
    Reference,
    Convention,
}

fn similarity_origins() -> BTreeMap<String, MetricOrigin> {
    use MetricOrigin::*;
    [
        ("volumetric", Reference),
        ("surface", Reference),
        ("dimensional", Reference),
        ("hausdorff", Reference),
        ("pca_alignment", Convention),
        ("icp_alignment", Convention),
        ("final", Convention),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn complexity_origins() -> BTreeMap<String, MetricOrigin> {
    use MetricOrigin::*;
    [
        ("feature", Reference),
        ("surface", Reference),
        ("topological", Reference),
        ("topological_exact", Convention),
        ("composite", Convention),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Four-decimal presentation; ties round to even on the exact binary value.
pub fn fmt4(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

fn complexity_display(prefix: &str, c: &ComplexityBreakdown, out: &mut BTreeMap<String, String>) {
    for (k, v) in [
        ("feature", c.feature),
        ("surface", c.surface),
        ("topological", c.topological),
        ("topological_exact", c.topological_exact),
        ("composite", c.composite),
    ] {
        out.insert(format!("{prefix}{k}"), fmt4(v));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComplexity {
    pub input: InputInfo,
    #[serde(flatten)]
    pub breakdown: ComplexityBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub model: ModelComplexity,
    pub origins: BTreeMap<String, MetricOrigin>,
    pub display: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

fn composite_note(w: &ComplexityWeights) -> String {
    format!(
        "composite uses weights ({}, {}, {}) and counts faces of this tessellation; it is not comparable across tessellations",
        w.feature, w.surface, w.topological
    )
}

fn model_complexity(model: &LoadedModel, weights: ComplexityWeights) -> Result<ModelComplexity, ReportError> {
    Ok(ModelComplexity {
        input: model.info.clone(),
        breakdown: complexity::analyze(&model.mesh, weights, Some((model.area, model.volume)))?,
    })
}

pub fn complexity_report(model: &LoadedModel, options: &EvalOptions) -> Result<ComplexityReport, ReportError> {
    let m = model_complexity(model, options.complexity_weights)?;
    let mut display = BTreeMap::new();
    complexity_display("", &m.breakdown, &mut display);
    let mut notes = vec![composite_note(&options.complexity_weights)];
    if m.breakdown.topological != m.breakdown.topological_exact {
        notes.push("mesh is not a closed manifold: approximate and exact Euler characteristic differ".into());
    }
    Ok(ComplexityReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        model: m,
        origins: complexity_origins(),
        display,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcpSummary {
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    pub transform: registration::RigidTransform,
    pub options: IcpOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub generated: ModelComplexity,
    pub truth: ModelComplexity,
    pub similarity: SimilarityReport,
    pub icp: IcpSummary,
    /// "corners" or "samples:<n>".
    pub point_clouds: String,
    pub origins: BTreeMap<String, MetricOrigin>,
    pub display: BTreeMap<String, String>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

fn cloud(model: &LoadedModel, samples: Option<usize>) -> Result<PointCloud, ReportError> {
    let mesh_err = |source| ReportError::Mesh {
        path: model.info.path.clone(),
        source,
    };
    match samples {
        None => geom::corner_point_cloud(&model.mesh).map_err(mesh_err),
        Some(n) => geom::sample_surface(&model.mesh, n, SAMPLE_SEED).map_err(mesh_err),
    }
}

/// Scores every similarity metric for `generated` against `truth`.
pub fn compare(generated: &LoadedModel, truth: &LoadedModel, options: &EvalOptions) -> Result<MetricReport, ReportError> {
    let (g, t) = (cloud(generated, options.surface_samples)?, cloud(truth, options.surface_samples)?);
    let icp = registration::icp_register(&g, &t, &options.icp)?;
    let components = SimilarityComponents {
        volumetric: similarity::volumetric_similarity(generated.volume, truth.volume)?,
        surface: similarity::surface_similarity(generated.area, truth.area)?,
        dimensional: similarity::dimensional_accuracy_with(&generated.bounds, &truth.bounds, options.dimension_mode)?,
        pca_alignment: registration::pca_alignment_score(&g, &t)?,
        icp_alignment: registration::icp_alignment_score(&icp, &truth.bounds)?,
    };
    let hausdorff = similarity::hausdorff_distance(&g, &t)?;
    let sim = SimilarityReport::new(components, hausdorff, options.similarity_weights);

    let gen_c = model_complexity(generated, options.complexity_weights)?;
    let truth_c = model_complexity(truth, options.complexity_weights)?;
    let mut display = BTreeMap::new();
    for (k, v) in [
        ("final", sim.final_score),
        ("volumetric", sim.volumetric),
        ("surface", sim.surface),
        ("dimensional", sim.dimensional),
        ("pca_alignment", sim.pca_alignment),
        ("icp_alignment", sim.icp_alignment),
        ("hausdorff", sim.hausdorff),
    ] {
        display.insert(k.to_string(), fmt4(v));
    }
    complexity_display("generated.", &gen_c.breakdown, &mut display);
    complexity_display("truth.", &truth_c.breakdown, &mut display);

    let mut warnings: Vec<String> = options.similarity_weights.check().into_iter().collect();
    if !icp.converged {
        warnings.push(format!("ICP stopped after {} iterations without converging", icp.iterations));
    }
    let mut origins = similarity_origins();
    for (k, v) in complexity_origins() {
        origins.insert(format!("complexity.{k}"), v);
    }
    Ok(MetricReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        generated: gen_c,
        truth: truth_c,
        similarity: sim,
        icp: IcpSummary {
            rmse: icp.rmse,
            iterations: icp.iterations,
            converged: icp.converged,
            transform: icp.transform,
            options: options.icp,
        },
        point_clouds: match options.surface_samples {
            None => "corners".into(),
            Some(n) => format!("samples:{n}"),
        },
        origins,
        display,
        warnings,
        notes: vec![
            "pca_alignment and icp_alignment follow local conventions; icp_alignment = max(0, 1 - rmse / truth bbox diagonal)".into(),
            composite_note(&options.complexity_weights),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Markdown,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub const COMPARE_CSV_HEADER: &str = "generated,truth,final,volumetric,surface,dimensional,pca_alignment,icp_alignment,hausdorff,icp_rmse,generated_composite,truth_composite";

impl MetricReport {
    pub fn to_csv(&self) -> String {
        let s = &self.similarity;
        format!(
            "{COMPARE_CSV_HEADER}\n{},{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_field(&self.generated.input.path),
            csv_field(&self.truth.input.path),
            s.final_score,
            s.volumetric,
            s.surface,
            s.dimensional,
            s.pca_alignment,
            s.icp_alignment,
            s.hausdorff,
            self.icp.rmse,
            self.generated.breakdown.composite,
            self.truth.breakdown.composite,
        )
    }

    pub fn to_markdown(&self) -> String {
        let d = |k: &str| self.display.get(k).cloned().unwrap_or_default();
        let mut out = String::new();
        let _ = writeln!(out, "# {} vs {}\n", self.generated.input.path, self.truth.input.path);
        out.push_str("| Gen. | Vol. | Surf. | Dim. | PCA | ICP | Hausdorff |\n|---|---|---|---|---|---|---|\n");
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |\n",
            d("final"),
            d("volumetric"),
            d("surface"),
            d("dimensional"),
            d("pca_alignment"),
            d("icp_alignment"),
            d("hausdorff")
        );
        out.push_str("| Model | C_f | C_s | C_t | C_t (exact E) | C |\n|---|---|---|---|---|---|\n");
        for (label, prefix) in [(&self.generated.input.path, "generated."), (&self.truth.input.path, "truth.")] {
            let _ = writeln!(
                out,
                "| {label} | {} | {} | {} | {} | {} |",
                d(&format!("{prefix}feature")),
                d(&format!("{prefix}surface")),
                d(&format!("{prefix}topological")),
                d(&format!("{prefix}topological_exact")),
                d(&format!("{prefix}composite"))
            );
        }
        for w in self.warnings.iter().map(|w| format!("warning: {w}")).chain(self.notes.iter().map(|n| format!("note: {n}"))) {
            let _ = write!(out, "\n- {w}");
        }
        out.push('\n');
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Markdown => self.to_markdown(),
        }
    }
}

pub const COMPLEXITY_CSV_HEADER: &str = "model,faces,vertices,edges,feature,surface,topological,topological_exact,composite";

impl ComplexityReport {
    pub fn to_csv(&self) -> String {
        let b = &self.model.breakdown;
        format!(
            "{COMPLEXITY_CSV_HEADER}\n{},{},{},{},{},{},{},{},{}\n",
            csv_field(&self.model.input.path),
            b.counts.faces,
            b.counts.vertices,
            b.counts.edges,
            b.feature,
            b.surface,
            b.topological,
            b.topological_exact,
            b.composite
        )
    }

    pub fn to_markdown(&self) -> String {
        let d = |k: &str| self.display.get(k).cloned().unwrap_or_default();
        let mut out = format!(
            "# {}\n\n| C_f | C_s | C_t | C_t (exact E) | C |\n|---|---|---|---|---|\n| {} | {} | {} | {} | {} |\n",
            self.model.input.path,
            d("feature"),
            d("surface"),
            d("topological"),
            d("topological_exact"),
            d("composite")
        );
        for n in &self.notes {
            let _ = write!(out, "\n- note: {n}");
        }
        out.push('\n');
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Markdown => self.to_markdown(),
        }
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
