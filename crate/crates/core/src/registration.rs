//! Alignment-sensitive metrics: principal-axis comparison and point-to-point ICP.

use nalgebra::{Matrix3, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Aabb, PointCloud, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistrationError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("point cloud spans fewer than three dimensions (rank {0})")]
    DegenerateCloud(usize),
    #[error("ground-truth bounding box has zero diagonal")]
    DegenerateTruthBox,
}

/// Centroid and principal axes of a point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaFrame {
    pub centroid: Vec3,
    /// Unit axes in descending eigenvalue order; each flipped so its
    /// largest-magnitude component is positive.
    pub axes: [Vec3; 3],
    pub eigenvalues: [f64; 3],
    /// Number of eigenvalues that are non-negligible relative to the largest.
    pub rank: usize,
}

impl PcaFrame {
    /// The three eigenvalue-scaled axes stacked into one 9-vector.
    pub fn descriptor(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for (i, (axis, &lambda)) in self.axes.iter().zip(&self.eigenvalues).enumerate() {
            let scaled = axis * lambda.max(0.0).sqrt();
            out[3 * i..3 * i + 3].copy_from_slice(scaled.as_slice());
        }
        out
    }
}

/// Population covariance of the centred cloud.
pub fn covariance(cloud: &PointCloud) -> Result<(Vec3, Matrix3<f64>), RegistrationError> {
    let centroid = cloud.centroid().ok_or(RegistrationError::EmptyCloud)?;
    let cov = cloud
        .points
        .iter()
        .map(|p| {
            let d = p - centroid;
            d * d.transpose()
        })
        .fold(Matrix3::zeros(), |acc, m| acc + m)
        / cloud.len() as f64;
    Ok((centroid, cov))
}

fn canonical_sign(v: Vec3) -> Vec3 {
    let max = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let lead = v
        .iter()
        .position(|c| c.abs() >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    if v[lead] < 0.0 {
        -v
    } else {
        v
    }
}

pub fn pca_frame(cloud: &PointCloud) -> Result<PcaFrame, RegistrationError> {
    let (centroid, cov) = covariance(cloud)?;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.map(|i| eig.eigenvalues[i].max(0.0));
    let axes = order.map(|i| canonical_sign(eig.eigenvectors.column(i).into_owned()));
    let top = eigenvalues[0];
    let rank = if top <= 0.0 {
        0
    } else {
        eigenvalues.iter().filter(|&&l| l > 1e-12 * top).count()
    };
    Ok(PcaFrame {
        centroid,
        axes,
        eigenvalues,
        rank,
    })
}

/// 1 - |C_g - C_t| / |C_t| over the stacked principal-axis descriptors.
pub fn pca_alignment_score(g: &PointCloud, t: &PointCloud) -> Result<f64, RegistrationError> {
    let (fg, ft) = (pca_frame(g)?, pca_frame(t)?);
    for f in [&fg, &ft] {
        if f.rank < 3 {
            return Err(RegistrationError::DegenerateCloud(f.rank));
        }
    }
    let (cg, ct) = (fg.descriptor(), ft.descriptor());
    let diff: f64 = cg.iter().zip(&ct).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = ct.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(1.0 - diff / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * first.rotation,
            translation: self.rotation * first.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform_cloud(&self, cloud: &PointCloud) -> PointCloud {
        cloud.transformed(&self.rotation, &self.translation)
    }

    pub fn rotation_angle(&self) -> f64 {
        ((self.rotation.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }
}

/// Optimal rotation and translation taking `source[i]` onto `target[i]` in the
/// least-squares sense, with reflections excluded.
pub fn kabsch(source: &[Vec3], target: &[Vec3]) -> RigidTransform {
    let n = source.len().min(target.len()).max(1) as f64;
    let cs = source.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let ct = target.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let h = source
        .iter()
        .zip(target)
        .fold(Matrix3::zeros(), |acc, (s, t)| acc + (s - cs) * (t - ct).transpose());
    let svd = SVD::new(h, true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let rotation = v * Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * u.transpose();
    RigidTransform {
        rotation,
        translation: ct - rotation * cs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcpOptions {
    pub max_iterations: usize,
    /// Stop once an iteration improves RMSE by less than this (mm).
    pub tolerance: f64,
    /// Start from the translation that matches the cloud centroids.
    pub pre_center: bool,
}

impl Default for IcpOptions {
    fn default() -> Self {
        IcpOptions {
            max_iterations: 50,
            tolerance: 1e-6,
            pre_center: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcpResult {
    /// Maps the source cloud onto the target cloud.
    pub transform: RigidTransform,
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// RMSE of the initial pose followed by the RMSE after each iteration.
    pub rmse_history: Vec<f64>,
}

/// Nearest target index for every source point; ties go to the lowest index.
fn nearest(source: &[Vec3], target: &[Vec3]) -> (Vec<usize>, f64) {
    let mut total = 0.0;
    let matches = source
        .iter()
        .map(|p| {
            let (mut best, mut best_d) = (0, f64::INFINITY);
            for (j, q) in target.iter().enumerate() {
                let d = (p - q).norm_squared();
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            total += best_d;
            best
        })
        .collect();
    (matches, (total / source.len() as f64).sqrt())
}

/// Point-to-point ICP registering `source` onto `target`.
pub fn icp_register(source: &PointCloud, target: &PointCloud, options: &IcpOptions) -> Result<IcpResult, RegistrationError> {
    if source.is_empty() || target.is_empty() {
        return Err(RegistrationError::EmptyCloud);
    }
    let mut transform = RigidTransform::identity();
    if options.pre_center {
        transform.translation = target.centroid().unwrap() - source.centroid().unwrap();
    }
    let mut moved: Vec<Vec3> = source.points.iter().map(|p| transform.apply(p)).collect();
    let (mut matches, mut rmse) = nearest(&moved, &target.points);
    let mut history = vec![rmse];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let paired: Vec<Vec3> = matches.iter().map(|&j| target.points[j]).collect();
        let step = kabsch(&moved, &paired);
        let candidate: Vec<Vec3> = moved.iter().map(|p| step.apply(p)).collect();
        let (next_matches, next_rmse) = nearest(&candidate, &target.points);
        // Kabsch never increases the paired error and re-matching never increases
        // it either; guard against round-off pushing it up by a hair.
        if next_rmse > rmse {
            history.push(rmse);
            converged = true;
            break;
        }
        transform = step.compose(&transform);
        moved = candidate;
        matches = next_matches;
        let improvement = rmse - next_rmse;
        rmse = next_rmse;
        history.push(rmse);
        if improvement < options.tolerance {
            converged = true;
            break;
        }
    }
    Ok(IcpResult {
        transform,
        rmse,
        iterations,
        converged,
        rmse_history: history,
    })
}

/// max(0, 1 - rmse / diagonal of the truth box).
pub fn icp_alignment_score(result: &IcpResult, truth_bounds: &Aabb) -> Result<f64, RegistrationError> {
    let diagonal = truth_bounds.diagonal();
    if !(diagonal > 0.0) {
        return Err(RegistrationError::DegenerateTruthBox);
    }
    Ok((1.0 - result.rmse / diagonal).max(0.0))
}
