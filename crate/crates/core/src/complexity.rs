//! Structural complexity of a single model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, EulerCounts, GeomError, TriangleMesh};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexityError {
    #[error("mesh encloses zero volume")]
    ZeroVolume,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityWeights {
    pub feature: f64,
    pub surface: f64,
    pub topological: f64,
}

impl Default for ComplexityWeights {
    fn default() -> Self {
        ComplexityWeights {
            feature: 1.0,
            surface: 10.0,
            topological: 5.0,
        }
    }
}

impl ComplexityWeights {
    pub fn from_slice(w: &[f64]) -> Option<Self> {
        match *w {
            [feature, surface, topological] => Some(ComplexityWeights {
                feature,
                surface,
                topological,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityBreakdown {
    /// Triangle count.
    pub feature: f64,
    /// Area over volume, per mm.
    pub surface: f64,
    /// X - 1.5 F + F (edge count approximated from faces).
    pub topological: f64,
    /// X - E + F with edges counted exactly.
    pub topological_exact: f64,
    pub composite: f64,
    pub weights: ComplexityWeights,
    pub counts: EulerCounts,
    pub area: f64,
    pub volume: f64,
}

pub fn feature_complexity(mesh: &TriangleMesh) -> f64 {
    mesh.triangles.len() as f64
}

pub fn surface_ratio(area: f64, volume: f64) -> Result<f64, ComplexityError> {
    if !(volume > 0.0) {
        return Err(ComplexityError::ZeroVolume);
    }
    Ok(area / volume)
}

pub fn surface_complexity(mesh: &TriangleMesh) -> Result<f64, ComplexityError> {
    let volume = geom::mesh_volume(mesh)?;
    surface_ratio(geom::mesh_surface_area(mesh), volume)
}

pub fn topological_complexity(mesh: &TriangleMesh) -> f64 {
    let faces = mesh.triangles.len() as f64;
    mesh.vertices.len() as f64 - 1.5 * faces + faces
}

pub fn exact_euler_characteristic(mesh: &TriangleMesh) -> f64 {
    geom::euler_counts(mesh).characteristic() as f64
}

pub fn composite_complexity(feature: f64, surface: f64, topological: f64, w: &ComplexityWeights) -> f64 {
    w.feature * feature + w.surface * surface + w.topological * topological
}

/// Full breakdown; `measures` overrides (area, volume) when exact values are known.
pub fn analyze(
    mesh: &TriangleMesh,
    weights: ComplexityWeights,
    measures: Option<(f64, f64)>,
) -> Result<ComplexityBreakdown, ComplexityError> {
    let (area, volume) = match measures {
        Some(m) => m,
        None => (geom::mesh_surface_area(mesh), geom::mesh_volume(mesh)?),
    };
    let feature = feature_complexity(mesh);
    let surface = surface_ratio(area, volume)?;
    let topological = topological_complexity(mesh);
    Ok(ComplexityBreakdown {
        feature,
        surface,
        topological,
        topological_exact: exact_euler_characteristic(mesh),
        composite: composite_complexity(feature, surface, topological, &weights),
        weights,
        counts: geom::euler_counts(mesh),
        area,
        volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Aabb, Vec3};
    use proptest::prelude::*;

    fn cube(side: f64) -> TriangleMesh {
        TriangleMesh::cuboid(&Aabb::from_corners(Vec3::zeros(), Vec3::new(side, side, side)))
    }

    #[test]
    fn cube_breakdown() {
        let b = analyze(&cube(1.0), ComplexityWeights::default(), None).unwrap();
        assert_eq!(b.feature, 12.0);
        assert_eq!(b.surface, 6.0);
        assert_eq!(b.topological, 2.0);
        assert_eq!(b.topological_exact, 2.0);
        assert_eq!(b.composite, 12.0 + 60.0 + 10.0);
    }

    #[test]
    fn feature_counts_scale_with_subdivision() {
        let c = cube(1.0);
        assert_eq!(feature_complexity(&c.subdivided()), 4.0 * feature_complexity(&c));
        // Subdivision keeps the surface closed, so the approximation stays exact.
        assert_eq!(topological_complexity(&c.subdivided()), 2.0);
    }

    #[test]
    fn surface_complexity_scaling() {
        let c = cube(1.0);
        assert_eq!(surface_complexity(&c).unwrap(), 6.0);
        let half = surface_complexity(&c.scaled(2.0)).unwrap();
        assert!((half - 3.0).abs() < 1e-12);
        assert_eq!(surface_ratio(1.0, 0.0), Err(ComplexityError::ZeroVolume));
    }

    #[test]
    fn composite_examples() {
        let w = ComplexityWeights::default();
        assert_eq!(composite_complexity(12.0, 6.0, 2.0, &w), 82.0);
        let proj = ComplexityWeights::from_slice(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(composite_complexity(37.0, 4.5, -2.0, &proj), 37.0);
        assert_eq!(composite_complexity(0.0, 0.0, 0.0, &w), 0.0);
    }

    proptest! {
        #[test]
        fn composite_is_linear_in_weights(f in -100.0..100.0f64, s in -10.0..10.0f64, t in -10.0..10.0f64,
                                         w1 in proptest::array::uniform3(-5.0..5.0f64),
                                         w2 in proptest::array::uniform3(-5.0..5.0f64),
                                         alpha in -3.0..3.0f64) {
            let w = |a: [f64; 3]| ComplexityWeights::from_slice(&a).unwrap();
            let mix = [0, 1, 2].map(|k| w1[k] + alpha * w2[k]);
            let lhs = composite_complexity(f, s, t, &w(mix));
            let rhs = composite_complexity(f, s, t, &w(w1)) + alpha * composite_complexity(f, s, t, &w(w2));
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn surface_ratio_halves_when_doubled(side in 0.1..100.0f64) {
            let c = cube(side);
            let a = surface_complexity(&c).unwrap();
            let b = surface_complexity(&c.scaled(2.0)).unwrap();
            prop_assert!((b - a / 2.0).abs() <= 1e-9 * a);
        }
    }
}
