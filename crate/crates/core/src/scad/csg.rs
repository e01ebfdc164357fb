//! Exact evaluation of axis-aligned box CSG.
//!
//! All box faces are collected into per-axis sorted coordinate lists. The
//! resulting slab cells have constant CSG membership, so volume and area are
//! sums over cells and cell faces with no sampling error.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::parser::{ScadAst, ScadError, ScadNode};
use super::triangulate::{triangulate, Pt};
use crate::geom::{Aabb, Triangle, TriangleMesh, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsgError {
    #[error("solid is empty")]
    EmptySolid,
}

/// Box-only CSG tree with translations folded into absolute coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum CsgNode {
    Box(Aabb),
    Union(Vec<CsgNode>),
    /// First child minus the union of the rest.
    Difference(Vec<CsgNode>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxOp {
    Add,
    Subtract,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedBox {
    pub bounds: Aabb,
    pub op: BoxOp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsgSolid {
    root: CsgNode,
}

impl CsgSolid {
    pub fn new(root: CsgNode) -> Self {
        CsgSolid { root }
    }

    /// Sequential form: start empty, then union each `Add` box and carve each
    /// `Subtract` box, in order.
    pub fn from_signed_boxes(boxes: &[SignedBox]) -> Self {
        let root = boxes.iter().fold(CsgNode::Union(vec![]), |acc, b| match b.op {
            BoxOp::Add => CsgNode::Union(vec![acc, CsgNode::Box(b.bounds)]),
            BoxOp::Subtract => CsgNode::Difference(vec![acc, CsgNode::Box(b.bounds)]),
        });
        CsgSolid { root }
    }

    pub fn root(&self) -> &CsgNode {
        &self.root
    }

    /// Boxes in listing order, each marked by whether it sits in an odd number
    /// of subtracted positions.
    pub fn signed_boxes(&self) -> Vec<SignedBox> {
        fn walk(node: &CsgNode, negated: bool, out: &mut Vec<SignedBox>) {
            match node {
                CsgNode::Box(bounds) => out.push(SignedBox {
                    bounds: *bounds,
                    op: if negated { BoxOp::Subtract } else { BoxOp::Add },
                }),
                CsgNode::Union(children) => children.iter().for_each(|c| walk(c, negated, out)),
                CsgNode::Difference(children) => {
                    for (i, c) in children.iter().enumerate() {
                        walk(c, negated ^ (i > 0), out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, false, &mut out);
        out
    }

    pub fn is_empty(&self) -> bool {
        SlabGrid::new(self).occupied_count() == 0
    }
}

/// Expands module calls and folds translations into absolute boxes.
pub fn evaluate(ast: &ScadAst) -> Result<CsgSolid, ScadError> {
    super::parser::validate(ast)?;
    fn lower(ast: &ScadAst, nodes: &[ScadNode], offset: Vec3) -> Vec<CsgNode> {
        nodes
            .iter()
            .map(|node| match node {
                ScadNode::Cube(size) => CsgNode::Box(Aabb::from_corners(offset, offset + size)),
                ScadNode::Translate { offset: t, children } => {
                    union_of(lower(ast, children, offset + t))
                }
                ScadNode::Union(children) => union_of(lower(ast, children, offset)),
                ScadNode::Difference(children) => CsgNode::Difference(lower(ast, children, offset)),
                ScadNode::ModuleCall { name, .. } => union_of(lower(ast, &ast.modules[name], offset)),
            })
            .collect()
    }
    fn union_of(mut nodes: Vec<CsgNode>) -> CsgNode {
        if nodes.len() == 1 {
            nodes.pop().unwrap()
        } else {
            CsgNode::Union(nodes)
        }
    }
    Ok(CsgSolid::new(union_of(lower(ast, &ast.statements, Vec3::zeros()))))
}

/// Cell decomposition induced by every box face coordinate.
#[derive(Debug, Clone)]
pub struct SlabGrid {
    coords: [Vec<f64>; 3],
    occupied: Vec<bool>,
}

impl SlabGrid {
    pub fn new(solid: &CsgSolid) -> Self {
        let boxes = solid.signed_boxes();
        let coords: [Vec<f64>; 3] = std::array::from_fn(|k| {
            let mut c: Vec<f64> = boxes
                .iter()
                .flat_map(|b| [b.bounds.min[k], b.bounds.max[k]])
                .collect();
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        });
        let cells = coords.each_ref().map(|c| c.len().saturating_sub(1));
        let mut grid = SlabGrid {
            coords,
            occupied: Vec::new(),
        };
        grid.occupied = grid.eval(solid.root(), cells);
        grid
    }

    fn eval(&self, node: &CsgNode, cells: [usize; 3]) -> Vec<bool> {
        let total = cells[0] * cells[1] * cells[2];
        match node {
            CsgNode::Box(b) => {
                let mut occ = vec![false; total];
                let range = |k: usize| {
                    let find = |v: f64| self.coords[k].partition_point(|&c| c < v);
                    find(b.min[k])..find(b.max[k])
                };
                let (rx, ry, rz) = (range(0), range(1), range(2));
                for k in rz {
                    for j in ry.clone() {
                        for i in rx.clone() {
                            occ[i + cells[0] * (j + cells[1] * k)] = true;
                        }
                    }
                }
                occ
            }
            CsgNode::Union(children) => {
                let mut occ = vec![false; total];
                for c in children {
                    for (o, v) in occ.iter_mut().zip(self.eval(c, cells)) {
                        *o |= v;
                    }
                }
                occ
            }
            CsgNode::Difference(children) => {
                let Some((first, rest)) = children.split_first() else {
                    return vec![false; total];
                };
                let mut occ = self.eval(first, cells);
                for c in rest {
                    for (o, v) in occ.iter_mut().zip(self.eval(c, cells)) {
                        *o &= !v;
                    }
                }
                occ
            }
        }
    }

    pub fn coords(&self, axis: usize) -> &[f64] {
        &self.coords[axis]
    }

    pub fn cell_counts(&self) -> [usize; 3] {
        self.coords.each_ref().map(|c| c.len().saturating_sub(1))
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    /// Occupancy of cell `c`; anything outside the grid is empty.
    pub fn cell(&self, c: [isize; 3]) -> bool {
        let n = self.cell_counts();
        if (0..3).any(|k| c[k] < 0 || c[k] as usize >= n[k]) {
            return false;
        }
        let [i, j, k] = c.map(|v| v as usize);
        self.occupied[i + n[0] * (j + n[1] * k)]
    }

    fn width(&self, axis: usize, i: usize) -> f64 {
        self.coords[axis][i + 1] - self.coords[axis][i]
    }

    pub fn volume(&self) -> f64 {
        let n = self.cell_counts();
        let mut total = 0.0;
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    if self.cell([i as isize, j as isize, k as isize]) {
                        total += self.width(0, i) * self.width(1, j) * self.width(2, k);
                    }
                }
            }
        }
        total
    }

    /// Sum of cell faces separating occupied from empty space.
    pub fn area(&self) -> f64 {
        let n = self.cell_counts();
        let mut total = 0.0;
        for axis in 0..3 {
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            for p in 0..=n[axis] {
                for b in 0..n[v] {
                    for a in 0..n[u] {
                        let (below, above) = self.sides(axis, p, a, b);
                        if below != above {
                            total += self.width(u, a) * self.width(v, b);
                        }
                    }
                }
            }
        }
        total
    }

    /// Occupancy just below and just above plane `p` of `axis` at in-plane cell (a, b).
    fn sides(&self, axis: usize, p: usize, a: usize, b: usize) -> (bool, bool) {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        let mut c = [0isize; 3];
        c[u] = a as isize;
        c[v] = b as isize;
        c[axis] = p as isize - 1;
        let below = self.cell(c);
        c[axis] = p as isize;
        (below, self.cell(c))
    }

    /// A grid point is a geometric vertex when the occupancy of its eight
    /// surrounding cells is not constant along any axis.
    pub fn is_corner(&self, point: [usize; 3]) -> bool {
        let octant = |d: [usize; 3]| {
            self.cell(std::array::from_fn(|k| point[k] as isize - 1 + d[k] as isize))
        };
        (0..3).all(|axis| {
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            let mut extruded = true;
            for du in 0..2 {
                for dv in 0..2 {
                    let mut lo = [0; 3];
                    lo[u] = du;
                    lo[v] = dv;
                    let mut hi = lo;
                    hi[axis] = 1;
                    extruded &= octant(lo) == octant(hi);
                }
            }
            !extruded
        })
    }

    pub fn point(&self, p: [usize; 3]) -> Vec3 {
        Vec3::new(self.coords[0][p[0]], self.coords[1][p[1]], self.coords[2][p[2]])
    }
}

pub fn exact_volume(solid: &CsgSolid) -> f64 {
    SlabGrid::new(solid).volume()
}

pub fn exact_area(solid: &CsgSolid) -> f64 {
    SlabGrid::new(solid).area()
}

const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Closed boundary loops of a raster region, region on the left of travel.
/// Outer loops come out counter-clockwise, holes clockwise.
fn boundary_loops(region: &[bool], na: usize, nb: usize) -> Vec<Vec<(i64, i64)>> {
    let inside = |a: i64, b: i64| a >= 0 && b >= 0 && (a as usize) < na && (b as usize) < nb && region[a as usize + na * b as usize];
    let mut edges: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    for b in 0..nb as i64 {
        for a in 0..na as i64 {
            if !inside(a, b) {
                continue;
            }
            if !inside(a, b - 1) {
                edges.entry((a, b)).or_default().push(0);
            }
            if !inside(a + 1, b) {
                edges.entry((a + 1, b)).or_default().push(1);
            }
            if !inside(a, b + 1) {
                edges.entry((a + 1, b + 1)).or_default().push(2);
            }
            if !inside(a - 1, b) {
                edges.entry((a, b + 1)).or_default().push(3);
            }
        }
    }
    let mut loops = Vec::new();
    while let Some((&start, dirs)) = edges.iter().find(|(_, d)| !d.is_empty()) {
        let first = dirs[0];
        let mut ring = vec![start];
        let mut at = start;
        let mut dir = first;
        edges.get_mut(&at).unwrap().retain(|&d| d != dir);
        loop {
            at = (at.0 + DIRS[dir].0, at.1 + DIRS[dir].1);
            if at == start {
                let out = edges.get(&at).map(|d| d.as_slice()).unwrap_or(&[]);
                // Close unless a tighter left turn continues through a pinch vertex.
                let prefer = [(dir + 1) % 4, dir, (dir + 3) % 4];
                let next = prefer.iter().find(|d| **d == first || out.contains(d));
                if next == Some(&first) || next.is_none() {
                    break;
                }
            }
            let out = edges.get_mut(&at).expect("boundary is closed");
            let next = [(dir + 1) % 4, dir, (dir + 3) % 4]
                .into_iter()
                .find(|d| out.contains(d))
                .expect("boundary is closed");
            out.retain(|&d| d != next);
            ring.push(at);
            dir = next;
        }
        loops.push(ring);
    }
    loops
}

fn ring_area2(ring: &[(i64, i64)]) -> i64 {
    (0..ring.len())
        .map(|i| {
            let (p, q) = (ring[i], ring[(i + 1) % ring.len()]);
            p.0 * q.1 - q.0 * p.1
        })
        .sum()
}

fn ring_contains(ring: &[(i64, i64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    for i in 0..ring.len() {
        let (p, q) = (ring[i], ring[(i + 1) % ring.len()]);
        let (px, py, qx, qy) = (p.0 as f64, p.1 as f64, q.0 as f64, q.1 as f64);
        if (py > y) != (qy > y) && x < px + (y - py) * (qx - px) / (qy - py) {
            inside = !inside;
        }
    }
    inside
}

/// Watertight, outward-oriented boundary mesh of the solid.
///
/// Coplanar boundary cells are merged into maximal polygons per plane and
/// orientation; only geometric corners become vertices, so the vertex set is
/// exactly the solid's corner set and no T-junctions arise.
pub fn extract_boundary_mesh(solid: &CsgSolid) -> Result<TriangleMesh, CsgError> {
    let grid = SlabGrid::new(solid);
    if grid.occupied_count() == 0 {
        return Err(CsgError::EmptySolid);
    }
    let n = grid.cell_counts();

    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    for x in 0..=n[0] {
        for y in 0..=n[1] {
            for z in 0..=n[2] {
                if grid.is_corner([x, y, z]) {
                    index.insert([x, y, z], vertices.len());
                    vertices.push(grid.point([x, y, z]));
                }
            }
        }
    }

    let mut triangles = Vec::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for p in 0..=n[axis] {
            for outward_positive in [true, false] {
                let mut region = vec![false; n[u] * n[v]];
                let mut any = false;
                for b in 0..n[v] {
                    for a in 0..n[u] {
                        let (below, above) = grid.sides(axis, p, a, b);
                        let face = if outward_positive { below && !above } else { above && !below };
                        region[a + n[u] * b] = face;
                        any |= face;
                    }
                }
                if !any {
                    continue;
                }
                let loops = boundary_loops(&region, n[u], n[v]);
                let to_grid = |(a, b): (i64, i64)| {
                    let mut g = [0usize; 3];
                    g[axis] = p;
                    g[u] = a as usize;
                    g[v] = b as usize;
                    g
                };
                let mut to_pts = |ring: &[(i64, i64)]| -> Vec<Pt> {
                    let len = ring.len();
                    (0..len)
                        .filter_map(|i| {
                            let (prev, cur, next) = (ring[(i + len - 1) % len], ring[i], ring[(i + 1) % len]);
                            let turning = (cur.0 - prev.0, cur.1 - prev.1) != (next.0 - cur.0, next.1 - cur.1);
                            let g = to_grid(cur);
                            let id = match index.get(&g) {
                                Some(&id) => id,
                                None if turning => {
                                    debug_assert!(false, "turning point {g:?} is not a corner");
                                    vertices.push(grid.point(g));
                                    index.insert(g, vertices.len() - 1);
                                    vertices.len() - 1
                                }
                                None => return None,
                            };
                            Some(Pt {
                                x: grid.coords[u][g[u]],
                                y: grid.coords[v][g[v]],
                                id,
                            })
                        })
                        .collect()
                };
                let (outers, holes): (Vec<_>, Vec<_>) = loops.iter().partition(|r| ring_area2(r) > 0);
                let mut assigned: Vec<Vec<&Vec<(i64, i64)>>> = vec![Vec::new(); outers.len()];
                for hole in holes {
                    // Probe just inside the region, beside the hole's first edge.
                    let (p0, p1) = (hole[0], hole[1 % hole.len()]);
                    let (dx, dy) = ((p1.0 - p0.0) as f64, (p1.1 - p0.1) as f64);
                    let (x, y) = (p0.0 as f64 + 0.5 * dx - 0.25 * dy, p0.1 as f64 + 0.5 * dy + 0.25 * dx);
                    let owner = (0..outers.len())
                        .filter(|&o| ring_contains(outers[o], x, y))
                        .min_by_key(|&o| ring_area2(outers[o]));
                    if let Some(o) = owner {
                        assigned[o].push(hole);
                    }
                }
                for (outer, holes) in outers.iter().zip(assigned) {
                    let outer_pts = to_pts(outer);
                    let hole_pts: Vec<Vec<Pt>> = holes.iter().map(|h| to_pts(h)).collect();
                    for [a, b, c] in triangulate(&outer_pts, &hole_pts) {
                        triangles.push(if outward_positive {
                            Triangle::new(a, b, c)
                        } else {
                            Triangle::new(a, c, b)
                        });
                    }
                }
            }
        }
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geom::{self, euler_counts, mesh_surface_area, mesh_volume};
    use crate::scad::parser::parse_scad;

    fn solid(text: &str) -> CsgSolid {
        evaluate(&parse_scad(text).unwrap()).unwrap()
    }

    fn b(min: [f64; 3], max: [f64; 3]) -> Aabb {
        Aabb::from_corners(Vec3::from(min), Vec3::from(max))
    }

    #[test]
    fn listing_d_boxes() {
        let boxes = solid(fixtures::MODEL_D).signed_boxes();
        let expected = [
            (b([0., 0., 0.], [30., 10., 40.]), BoxOp::Add),
            (b([0., 0., 0.], [30., 40., 10.]), BoxOp::Add),
            (b([10., 0., 20.], [20., 10.1, 30.]), BoxOp::Subtract),
            (b([10., 20., 0.], [20., 50., 10.1]), BoxOp::Subtract),
        ];
        assert_eq!(boxes.len(), 4);
        for (got, (bounds, op)) in boxes.iter().zip(expected) {
            assert_eq!(got.op, op);
            assert!((got.bounds.min - bounds.min).norm() < 1e-12);
            assert!((got.bounds.max - bounds.max).norm() < 1e-12);
        }
    }

    #[test]
    fn translate_accumulates() {
        let boxes = solid("translate([1,2,3]) translate([10,0,0]) { cube([1,1,1]); }").signed_boxes();
        assert_eq!(boxes[0].bounds, b([11., 2., 3.], [12., 3., 4.]));
        let single = solid("translate([1,2,3]) cube([4,5,6]);").signed_boxes();
        assert_eq!(single[0].bounds, b([1., 2., 3.], [5., 7., 9.]));
    }

    #[test]
    fn difference_is_ordered() {
        let a = SignedBox { bounds: b([0.; 3], [2., 1., 1.]), op: BoxOp::Add };
        let bb = SignedBox { bounds: b([1., 0., 0.], [3., 1., 1.]), op: BoxOp::Add };
        let ab = CsgSolid::new(CsgNode::Difference(vec![CsgNode::Box(a.bounds), CsgNode::Box(bb.bounds)]));
        let ba = CsgSolid::new(CsgNode::Difference(vec![CsgNode::Box(bb.bounds), CsgNode::Box(a.bounds)]));
        assert_eq!(exact_volume(&ab), 1.0);
        assert_eq!(exact_volume(&ba), 1.0);
        let ab_mesh = extract_boundary_mesh(&ab).unwrap();
        let ba_mesh = extract_boundary_mesh(&ba).unwrap();
        assert_ne!(geom::bounding_box(&ab_mesh).unwrap(), geom::bounding_box(&ba_mesh).unwrap());
    }

    #[test]
    fn subtraction_never_re_adds() {
        // (A - B) - C with C overlapping only B's region leaves A - B.
        let s = CsgSolid::from_signed_boxes(&[
            SignedBox { bounds: b([0.; 3], [4., 1., 1.]), op: BoxOp::Add },
            SignedBox { bounds: b([1., 0., 0.], [2., 1., 1.]), op: BoxOp::Subtract },
            SignedBox { bounds: b([1., 0., 0.], [2., 1., 1.]), op: BoxOp::Subtract },
        ]);
        assert_eq!(exact_volume(&s), 3.0);
        // Nested difference in subtracted position: A - (B - C) keeps C's overlap with A.
        let nested = CsgSolid::new(CsgNode::Difference(vec![
            CsgNode::Box(b([0.; 3], [4., 1., 1.])),
            CsgNode::Difference(vec![CsgNode::Box(b([1., 0., 0.], [3., 1., 1.])), CsgNode::Box(b([2., 0., 0.], [3., 1., 1.]))]),
        ]));
        assert_eq!(exact_volume(&nested), 3.0);
    }

    #[test]
    fn unit_cube_mesh() {
        let mesh = extract_boundary_mesh(&solid("cube([1,1,1]);")).unwrap();
        assert_eq!(mesh.vertices.len(), 8);
        assert_eq!(mesh.triangles.len(), 12);
        assert_eq!(mesh_volume(&mesh).unwrap(), 1.0);
        assert!(geom::is_consistently_oriented(&mesh));
    }

    #[test]
    fn empty_solid() {
        let s = solid("difference() { cube([1,1,1]); cube([2,2,2]); }");
        assert!(s.is_empty());
        assert_eq!(extract_boundary_mesh(&s), Err(CsgError::EmptySolid));
        assert_eq!(exact_volume(&s), 0.0);
    }

    #[test]
    fn fixture_measures() {
        // Euler characteristics from an independent voxel cubical-complex count:
        // model b's base cutout is enclosed by the plate, giving a second handle.
        let expect = [
            (27000.0, 8600.0, 0),
            (23000.0, 8000.0, -2),
            (18000.0, 6400.0, 0),
            (18000.0, 6400.0, 0),
        ];
        for ((name, text), (vol, area, chi)) in fixtures::ALL.iter().zip(expect) {
            let s = solid(text);
            assert!((exact_volume(&s) - vol).abs() < 1e-9 * vol, "{name} volume {}", exact_volume(&s));
            assert!((exact_area(&s) - area).abs() < 1e-9 * area, "{name} area {}", exact_area(&s));
            let mesh = extract_boundary_mesh(&s).unwrap();
            geom::check_watertight(&mesh).unwrap();
            assert!(geom::is_consistently_oriented(&mesh), "{name}");
            assert!((mesh_volume(&mesh).unwrap() - vol).abs() < 1e-9 * vol, "{name}");
            assert!((mesh_surface_area(&mesh) - area).abs() < 1e-9 * area, "{name}");
            let counts = euler_counts(&mesh);
            assert_eq!(counts.characteristic(), chi, "{name}: {counts:?}");
            assert_eq!(2 * counts.edges, 3 * counts.faces);
        }
    }

    #[test]
    fn model_a_extents() {
        let mesh = extract_boundary_mesh(&solid(fixtures::MODEL_A)).unwrap();
        assert_eq!(geom::bounding_box(&mesh).unwrap().extents(), Vec3::new(40., 40., 50.));
    }

    #[test]
    fn staircase_with_collinear_corner_is_watertight() {
        // Two boxes whose shared top edge line carries a convex-to-concave transition.
        let s = solid("cube([2,1,1]); translate([1,-1,0]) cube([1,1,2]);");
        let mesh = extract_boundary_mesh(&s).unwrap();
        geom::check_watertight(&mesh).unwrap();
        assert!(geom::is_consistently_oriented(&mesh));
        assert!((mesh_volume(&mesh).unwrap() - exact_volume(&s)).abs() < 1e-12);
        assert_eq!(euler_counts(&mesh).characteristic(), 2);
    }

    #[test]
    fn loops_orientation() {
        // 3x3 ring with a hole in the middle.
        let mut region = vec![true; 9];
        region[4] = false;
        let loops = boundary_loops(&region, 3, 3);
        assert_eq!(loops.len(), 2);
        let areas: Vec<i64> = loops.iter().map(|l| ring_area2(l)).collect();
        assert!(areas.contains(&18) && areas.contains(&-2), "{areas:?}");
    }
}
