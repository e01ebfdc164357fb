//! Pairwise similarity between a generated model and the ground truth.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Aabb, PointCloud};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimilarityError {
    #[error("ground-truth volume must be positive")]
    ZeroTruthVolume,
    #[error("ground-truth surface area must be positive")]
    ZeroTruthArea,
    #[error("ground-truth bounding box has a non-positive extent")]
    DegenerateTruthBox,
    #[error("point cloud is empty")]
    EmptyCloud,
}

/// 1 - |gen - truth| / truth, unclamped.
fn relative_agreement(generated: f64, truth: f64) -> f64 {
    1.0 - (generated - truth).abs() / truth
}

pub fn volumetric_similarity(v_gen: f64, v_truth: f64) -> Result<f64, SimilarityError> {
    if !(v_truth > 0.0) {
        return Err(SimilarityError::ZeroTruthVolume);
    }
    Ok(relative_agreement(v_gen, v_truth))
}

pub fn surface_similarity(a_gen: f64, a_truth: f64) -> Result<f64, SimilarityError> {
    if !(a_truth > 0.0) {
        return Err(SimilarityError::ZeroTruthArea);
    }
    Ok(relative_agreement(a_gen, a_truth))
}

/// Which bounding-box extents enter the dimensional score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionMode {
    /// Mean of the per-axis relative extent deviations.
    #[default]
    MeanOfAxes,
    /// A single axis (0 = x, 1 = y, 2 = z).
    Axis(usize),
}

pub fn dimensional_accuracy(gen: &Aabb, truth: &Aabb) -> Result<f64, SimilarityError> {
    dimensional_accuracy_with(gen, truth, DimensionMode::MeanOfAxes)
}

pub fn dimensional_accuracy_with(
    gen: &Aabb,
    truth: &Aabb,
    mode: DimensionMode,
) -> Result<f64, SimilarityError> {
    let (g, t) = (gen.extents(), truth.extents());
    let axes: Vec<usize> = match mode {
        DimensionMode::MeanOfAxes => vec![0, 1, 2],
        DimensionMode::Axis(k) if k < 3 => vec![k],
        DimensionMode::Axis(_) => return Err(SimilarityError::DegenerateTruthBox),
    };
    if axes.iter().any(|&k| !(t[k] > 0.0)) {
        return Err(SimilarityError::DegenerateTruthBox);
    }
    let deviation: f64 = axes.iter().map(|&k| (g[k] - t[k]).abs() / t[k]).sum::<f64>() / axes.len() as f64;
    Ok(1.0 - deviation)
}

/// Largest nearest-neighbour distance from any point of `from` to `to`.
pub fn directed_hausdorff(from: &PointCloud, to: &PointCloud) -> Result<f64, SimilarityError> {
    if from.is_empty() || to.is_empty() {
        return Err(SimilarityError::EmptyCloud);
    }
    let worst = from
        .points
        .iter()
        .map(|p| {
            to.points
                .iter()
                .map(|q| (p - q).norm_squared())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(worst.sqrt())
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(g: &PointCloud, t: &PointCloud) -> Result<f64, SimilarityError> {
    Ok(directed_hausdorff(g, t)?.max(directed_hausdorff(t, g)?))
}

/// Weights of the aggregate score, in the order volume, surface, dimension, PCA, ICP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityWeights {
    pub volume: f64,
    pub surface: f64,
    pub dimension: f64,
    pub pca: f64,
    pub icp: f64,
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        SimilarityWeights {
            volume: 0.25,
            surface: 0.25,
            dimension: 0.20,
            pca: 0.15,
            icp: 0.15,
        }
    }
}

impl SimilarityWeights {
    pub fn from_slice(w: &[f64]) -> Option<Self> {
        match *w {
            [volume, surface, dimension, pca, icp] => Some(SimilarityWeights {
                volume,
                surface,
                dimension,
                pca,
                icp,
            }),
            _ => None,
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.volume, self.surface, self.dimension, self.pca, self.icp]
    }

    /// A warning when the weights do not sum to one.
    pub fn check(&self) -> Option<String> {
        let sum: f64 = self.as_array().iter().sum();
        ((sum - 1.0).abs() > 1e-9).then(|| format!("similarity weights sum to {sum}, not 1"))
    }
}

/// The five scores that enter the aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityComponents {
    pub volumetric: f64,
    pub surface: f64,
    pub dimensional: f64,
    pub pca_alignment: f64,
    pub icp_alignment: f64,
}

pub fn final_similarity(c: &SimilarityComponents, w: &SimilarityWeights) -> f64 {
    w.volume * c.volumetric
        + w.surface * c.surface
        + w.dimension * c.dimensional
        + w.pca * c.pca_alignment
        + w.icp * c.icp_alignment
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub dimensional: f64,
    pub volumetric: f64,
    pub surface: f64,
    pub hausdorff: f64,
    pub pca_alignment: f64,
    pub icp_alignment: f64,
    #[serde(rename = "final")]
    pub final_score: f64,
    pub weights: SimilarityWeights,
}

impl SimilarityReport {
    pub fn new(c: SimilarityComponents, hausdorff: f64, weights: SimilarityWeights) -> Self {
        SimilarityReport {
            dimensional: c.dimensional,
            volumetric: c.volumetric,
            surface: c.surface,
            hausdorff,
            pca_alignment: c.pca_alignment,
            icp_alignment: c.icp_alignment,
            final_score: final_similarity(&c, &weights),
            weights,
        }
    }

    pub fn components(&self) -> SimilarityComponents {
        SimilarityComponents {
            volumetric: self.volumetric,
            surface: self.surface,
            dimensional: self.dimensional,
            pca_alignment: self.pca_alignment,
            icp_alignment: self.icp_alignment,
        }
    }
}
