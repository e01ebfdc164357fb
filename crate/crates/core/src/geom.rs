//! Shared geometric types and exact measurements on indexed triangle meshes.

use std::collections::{BTreeMap, HashMap, VecDeque};

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Point or direction in model space. Coordinates are millimeters by convention.
pub type Vec3 = Vector3<f64>;

/// Default vertex-welding tolerance in millimeters.
pub const DEFAULT_WELD_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("mesh has no vertices or triangles")]
    EmptyMesh,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("mesh is not watertight: edge ({0}, {1}) is used by {2} triangle(s)")]
    NonWatertight(usize, usize, usize),
    #[error("triangle {triangle} references vertex {index} but mesh has {len} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        len: usize,
    },
    #[error("triangle {0} repeats a vertex index")]
    DegenerateTriangle(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
}

/// Three vertex indices, counter-clockwise when viewed from outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triangle(pub [usize; 3]);

impl Triangle {
    pub fn new(a: usize, b: usize, c: usize) -> Self {
        Triangle([a, b, c])
    }

    pub fn flipped(self) -> Self {
        let [a, b, c] = self.0;
        Triangle([a, c, b])
    }

    /// Directed edges in winding order.
    pub fn edges(self) -> [(usize, usize); 3] {
        let [a, b, c] = self.0;
        [(a, b), (b, c), (c, a)]
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// Builds a box from two opposite corners in any order.
    pub fn from_corners(a: Vec3, b: Vec3) -> Self {
        Aabb {
            min: a.inf(&b),
            max: a.sup(&b),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = *iter.next()?;
        Some(iter.fold(Aabb { min: first, max: first }, |b, p| Aabb {
            min: b.min.inf(p),
            max: b.max.sup(p),
        }))
    }

    pub fn extents(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn diagonal(&self) -> f64 {
        self.extents().norm()
    }

    pub fn volume(&self) -> f64 {
        let e = self.extents();
        e.x * e.y * e.z
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        Aabb {
            min: self.min + offset,
            max: self.max + offset,
        }
    }

    /// Strict interior membership.
    pub fn contains_interior(&self, p: &Vec3) -> bool {
        (0..3).all(|k| self.min[k] < p[k] && p[k] < self.max[k])
    }
}

/// Ordered list of points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self.points.iter().fold(Vec3::zeros(), |acc, p| acc + p);
        Some(sum / self.points.len() as f64)
    }

    pub fn transformed(&self, rotation: &Matrix3<f64>, translation: &Vec3) -> Self {
        PointCloud {
            points: self
                .points
                .iter()
                .map(|p| rotation * p + translation)
                .collect(),
        }
    }
}

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<Triangle>,
}

impl TriangleMesh {
    /// Validates indices, distinctness and finiteness.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<Triangle>) -> Result<Self, GeomError> {
        if let Some(i) = vertices
            .iter()
            .position(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return Err(GeomError::NonFinite(i));
        }
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.0;
            for index in [a, b, c] {
                if index >= vertices.len() {
                    return Err(GeomError::IndexOutOfRange {
                        triangle: t,
                        index,
                        len: vertices.len(),
                    });
                }
            }
            if a == b || b == c || a == c {
                return Err(GeomError::DegenerateTriangle(t));
            }
        }
        Ok(TriangleMesh {
            vertices,
            triangles,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() || self.triangles.is_empty()
    }

    pub fn corners(&self, tri: Triangle) -> [Vec3; 3] {
        let [a, b, c] = tri.0;
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Triangle soup view, one entry per triangle.
    pub fn to_soup(&self) -> Vec<[Vec3; 3]> {
        self.triangles.iter().map(|&t| self.corners(t)).collect()
    }

    /// Applies `p -> rotation * p + translation` to every vertex.
    pub fn transformed(&self, rotation: &Matrix3<f64>, translation: &Vec3) -> Self {
        TriangleMesh {
            vertices: self
                .vertices
                .iter()
                .map(|p| rotation * p + translation)
                .collect(),
            triangles: self.triangles.clone(),
        }
    }

    pub fn translated(&self, offset: &Vec3) -> Self {
        self.transformed(&Matrix3::identity(), offset)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        TriangleMesh {
            vertices: self.vertices.iter().map(|p| p * factor).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Splits every triangle into four through its edge midpoints.
    pub fn subdivided(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                vertices.push((vertices[a] + vertices[b]) * 0.5);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(self.triangles.len() * 4);
        for tri in &self.triangles {
            let [a, b, c] = tri.0;
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            triangles.extend([
                Triangle::new(a, ab, ca),
                Triangle::new(ab, b, bc),
                Triangle::new(ca, bc, c),
                Triangle::new(ab, bc, ca),
            ]);
        }
        TriangleMesh {
            vertices,
            triangles,
        }
    }

    /// Axis-aligned unit-free box mesh with 8 vertices and 12 outward triangles.
    pub fn cuboid(bounds: &Aabb) -> Self {
        let (lo, hi) = (bounds.min, bounds.max);
        let vertices = (0..8)
            .map(|i| {
                Vec3::new(
                    if i & 1 == 0 { lo.x } else { hi.x },
                    if i & 2 == 0 { lo.y } else { hi.y },
                    if i & 4 == 0 { lo.z } else { hi.z },
                )
            })
            .collect();
        let quads = [
            [0, 2, 3, 1], // -z
            [4, 5, 7, 6], // +z
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
        ];
        let triangles = quads
            .iter()
            .flat_map(|q| [Triangle::new(q[0], q[1], q[2]), Triangle::new(q[0], q[2], q[3])])
            .collect();
        TriangleMesh {
            vertices,
            triangles,
        }
    }
}

fn edge_usage(mesh: &TriangleMesh) -> BTreeMap<(usize, usize), (usize, usize)> {
    // (lo, hi) -> (count lo->hi, count hi->lo)
    let mut usage = BTreeMap::new();
    for tri in &mesh.triangles {
        for (a, b) in tri.edges() {
            let entry = usage.entry((a.min(b), a.max(b))).or_insert((0, 0));
            if a < b {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }
    usage
}

/// Fails unless every undirected edge borders exactly two triangles.
pub fn check_watertight(mesh: &TriangleMesh) -> Result<(), GeomError> {
    if mesh.is_empty() {
        return Err(GeomError::EmptyMesh);
    }
    for (&(a, b), &(fwd, back)) in &edge_usage(mesh) {
        if fwd + back != 2 {
            return Err(GeomError::NonWatertight(a, b, fwd + back));
        }
    }
    Ok(())
}

/// True when every edge is used once in each direction.
pub fn is_consistently_oriented(mesh: &TriangleMesh) -> bool {
    edge_usage(mesh).values().all(|&(f, b)| f == 1 && b == 1)
}

fn signed_volume(mesh: &TriangleMesh) -> f64 {
    mesh.triangles
        .iter()
        .map(|&t| {
            let [a, b, c] = mesh.corners(t);
            a.dot(&b.cross(&c))
        })
        .sum::<f64>()
        / 6.0
}

/// Enclosed volume by the divergence theorem (signed tetrahedra to the origin).
///
/// The magnitude is returned, so an inward-wound closed mesh measures the same
/// as its outward-wound twin.
pub fn mesh_volume(mesh: &TriangleMesh) -> Result<f64, GeomError> {
    check_watertight(mesh)?;
    Ok(signed_volume(mesh).abs())
}

pub fn mesh_surface_area(mesh: &TriangleMesh) -> f64 {
    mesh.triangles
        .iter()
        .map(|&t| {
            let [a, b, c] = mesh.corners(t);
            0.5 * (b - a).cross(&(c - a)).norm()
        })
        .sum()
}

pub fn bounding_box(mesh: &TriangleMesh) -> Result<Aabb, GeomError> {
    Aabb::from_points(&mesh.vertices).ok_or(GeomError::EmptyMesh)
}

pub fn point_cloud_bounds(cloud: &PointCloud) -> Result<Aabb, GeomError> {
    Aabb::from_points(&cloud.points).ok_or(GeomError::EmptyCloud)
}

/// Merges vertices of a triangle soup that lie within `tolerance` of each other.
///
/// Space is hashed into cubic cells of side `tolerance`; a corner merges into
/// the earliest existing vertex found within tolerance in its 27-cell
/// neighbourhood. Triangles that collapse after merging are dropped.
pub fn weld_vertices(soup: &[[Vec3; 3]], tolerance: f64) -> TriangleMesh {
    let tolerance = tolerance.max(0.0);
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles = Vec::with_capacity(soup.len());

    if tolerance == 0.0 {
        let mut exact: HashMap<[u64; 3], usize> = HashMap::new();
        let key = |p: &Vec3| [p.x, p.y, p.z].map(|c| (c + 0.0).to_bits());
        for corners in soup {
            let idx = corners.map(|p| {
                *exact.entry(key(&p)).or_insert_with(|| {
                    vertices.push(p);
                    vertices.len() - 1
                })
            });
            push_if_proper(&mut triangles, idx);
        }
    } else {
        let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        let cell = |p: &Vec3| [p.x, p.y, p.z].map(|c| (c / tolerance).floor() as i64);
        let tol2 = tolerance * tolerance;
        for corners in soup {
            let idx = corners.map(|p| {
                let c = cell(&p);
                let mut best: Option<usize> = None;
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        for dz in -1..=1 {
                            if let Some(bucket) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                                for &i in bucket {
                                    if (vertices[i] - p).norm_squared() <= tol2
                                        && best.is_none_or(|b| i < b)
                                    {
                                        best = Some(i);
                                    }
                                }
                            }
                        }
                    }
                }
                best.unwrap_or_else(|| {
                    vertices.push(p);
                    let i = vertices.len() - 1;
                    grid.entry(c).or_default().push(i);
                    i
                })
            });
            push_if_proper(&mut triangles, idx);
        }
    }
    drop_unused_vertices(vertices, triangles)
}

fn drop_unused_vertices(vertices: Vec<Vec3>, mut triangles: Vec<Triangle>) -> TriangleMesh {
    let mut remap = vec![usize::MAX; vertices.len()];
    for tri in &triangles {
        for &i in &tri.0 {
            remap[i] = 0;
        }
    }
    let mut kept = Vec::with_capacity(vertices.len());
    for (i, v) in vertices.into_iter().enumerate() {
        if remap[i] == 0 {
            remap[i] = kept.len();
            kept.push(v);
        }
    }
    for tri in &mut triangles {
        tri.0 = tri.0.map(|i| remap[i]);
    }
    TriangleMesh {
        vertices: kept,
        triangles,
    }
}

fn push_if_proper(triangles: &mut Vec<Triangle>, [a, b, c]: [usize; 3]) {
    if a != b && b != c && a != c {
        triangles.push(Triangle::new(a, b, c));
    }
}

/// Vertex, edge and face counts; edges are distinct undirected vertex pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct EulerCounts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
}

impl EulerCounts {
    pub fn characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64
    }
}

pub fn euler_counts(mesh: &TriangleMesh) -> EulerCounts {
    EulerCounts {
        vertices: mesh.vertices.len(),
        edges: edge_usage(mesh).len(),
        faces: mesh.triangles.len(),
    }
}

/// The welded vertex set as a point cloud.
pub fn corner_point_cloud(mesh: &TriangleMesh) -> Result<PointCloud, GeomError> {
    if mesh.vertices.is_empty() {
        return Err(GeomError::EmptyMesh);
    }
    Ok(PointCloud::new(mesh.vertices.clone()))
}

/// Area-weighted uniform surface samples, reproducible for a given seed.
pub fn sample_surface(mesh: &TriangleMesh, count: usize, seed: u64) -> Result<PointCloud, GeomError> {
    if mesh.is_empty() {
        return Err(GeomError::EmptyMesh);
    }
    let mut cumulative = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for &t in &mesh.triangles {
        let [a, b, c] = mesh.corners(t);
        total += 0.5 * (b - a).cross(&(c - a)).norm();
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Err(GeomError::EmptyMesh);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..count)
        .map(|_| {
            let pick = rng.random::<f64>() * total;
            let i = cumulative.partition_point(|&c| c <= pick).min(cumulative.len() - 1);
            let [a, b, c] = mesh.corners(mesh.triangles[i]);
            let (mut u, mut v) = (rng.random::<f64>(), rng.random::<f64>());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            a + (b - a) * u + (c - a) * v
        })
        .collect();
    Ok(PointCloud::new(points))
}

/// Makes winding consistent across each edge-connected component, then flips
/// components with negative signed volume so every shell faces outward.
///
/// Edges shared by more than two triangles are ignored while propagating.
pub fn orient_outward(mesh: &TriangleMesh) -> TriangleMesh {
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, tri) in mesh.triangles.iter().enumerate() {
        for (a, b) in tri.edges() {
            by_edge.entry((a.min(b), a.max(b))).or_default().push(i);
        }
    }
    let mut triangles = mesh.triangles.clone();
    let mut component = vec![usize::MAX; triangles.len()];
    let mut components = 0;
    for seed in 0..triangles.len() {
        if component[seed] != usize::MAX {
            continue;
        }
        component[seed] = components;
        let mut queue = VecDeque::from([seed]);
        while let Some(t) = queue.pop_front() {
            for (a, b) in triangles[t].edges() {
                let Some(users) = by_edge.get(&(a.min(b), a.max(b))) else {
                    continue;
                };
                if users.len() != 2 {
                    continue;
                }
                let other = if users[0] == t { users[1] } else { users[0] };
                if component[other] != usize::MAX {
                    continue;
                }
                // A consistent neighbour traverses the shared edge as (b, a).
                if triangles[other].edges().contains(&(a, b)) {
                    triangles[other] = triangles[other].flipped();
                }
                component[other] = components;
                queue.push_back(other);
            }
        }
        components += 1;
    }
    let mut volume = vec![0.0; components];
    for (t, tri) in triangles.iter().enumerate() {
        let [a, b, c] = mesh.corners(*tri);
        volume[component[t]] += a.dot(&b.cross(&c));
    }
    for (t, tri) in triangles.iter_mut().enumerate() {
        if volume[component[t]] < 0.0 {
            *tri = tri.flipped();
        }
    }
    TriangleMesh {
        vertices: mesh.vertices.clone(),
        triangles,
    }
}
