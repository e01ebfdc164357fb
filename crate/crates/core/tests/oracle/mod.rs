//! Brute-force reference computations, independent of the slab-grid evaluator.

#![allow(dead_code)]

use cadfidelity::scad::{CsgNode, CsgSolid};
use cadfidelity::Vec3;

pub fn solid(text: &str) -> CsgSolid {
    cadfidelity::scad::evaluate(&cadfidelity::scad::parse_scad(text).unwrap()).unwrap()
}

/// Pointwise membership of an open-interior CSG tree.
pub fn contains(node: &CsgNode, p: &Vec3) -> bool {
    match node {
        CsgNode::Box(b) => b.contains_interior(p),
        CsgNode::Union(children) => children.iter().any(|c| contains(c, p)),
        CsgNode::Difference(children) => match children.split_first() {
            Some((first, rest)) => contains(first, p) && !rest.iter().any(|c| contains(c, p)),
            None => false,
        },
    }
}

type Intervals = Vec<(f64, f64)>;

fn normalize(mut v: Intervals) -> Intervals {
    v.retain(|(a, b)| b > a);
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Intervals = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn subtract(a: &Intervals, b: &Intervals) -> Intervals {
    let mut out = Vec::new();
    for &(lo, hi) in a {
        let mut start = lo;
        for &(c, d) in b {
            if d <= start || c >= hi {
                continue;
            }
            if c > start {
                out.push((start, c));
            }
            start = start.max(d);
        }
        if start < hi {
            out.push((start, hi));
        }
    }
    out
}

/// The set's intersection with the line through `p` along `axis`, as
/// disjoint sorted open intervals.
fn column(node: &CsgNode, axis: usize, p: &Vec3) -> Intervals {
    match node {
        CsgNode::Box(b) => {
            let inside = (0..3).filter(|&k| k != axis).all(|k| b.min[k] < p[k] && p[k] < b.max[k]);
            if inside {
                vec![(b.min[axis], b.max[axis])]
            } else {
                vec![]
            }
        }
        CsgNode::Union(children) => normalize(children.iter().flat_map(|c| column(c, axis, p)).collect()),
        CsgNode::Difference(children) => match children.split_first() {
            Some((first, rest)) => {
                let cut = normalize(rest.iter().flat_map(|c| column(c, axis, p)).collect());
                subtract(&column(first, axis, p), &cut)
            }
            None => vec![],
        },
    }
}

fn bounds(node: &CsgNode) -> (Vec3, Vec3) {
    match node {
        CsgNode::Box(b) => (b.min, b.max),
        CsgNode::Union(c) | CsgNode::Difference(c) => c.iter().map(bounds).fold(
            (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
            |(lo, hi), (a, b)| (lo.inf(&a), hi.sup(&b)),
        ),
    }
}

/// Occupied voxel runs along one column: (first index, length).
fn runs(iv: &Intervals, origin: f64, h: f64, n: usize) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = Vec::new();
    for &(a, b) in iv {
        // Voxel i is occupied when its centre origin + (i + 0.5) h lies in (a, b).
        let first = ((a - origin) / h - 0.5).floor() as i64 + 1;
        let last = (((b - origin) / h - 0.5).ceil() as i64 - 1).min(n as i64 - 1);
        if last < first {
            continue;
        }
        match out.last_mut() {
            Some(r) if r.0 + r.1 == first => r.1 += last - first + 1,
            _ => out.push((first, last - first + 1)),
        }
    }
    out
}

/// Volume and boundary area of the voxelized solid at spacing `h`, sampling
/// voxel centres. Each axis is swept column by column.
pub fn voxel_measures(solid: &CsgSolid, h: f64) -> (f64, f64) {
    let root = solid.root();
    let (lo, hi) = bounds(root);
    let origin = lo - Vec3::repeat(h);
    let counts: Vec<usize> = (0..3).map(|k| (((hi[k] - origin[k]) / h).ceil() as usize) + 1).collect();
    let mut occupied = 0i64;
    let mut faces = 0i64;
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        let mut voxels = 0i64;
        for i in 0..counts[u] {
            for j in 0..counts[v] {
                let mut p = Vec3::zeros();
                p[u] = origin[u] + (i as f64 + 0.5) * h;
                p[v] = origin[v] + (j as f64 + 0.5) * h;
                let r = runs(&column(root, axis, &p), origin[axis], h, counts[axis]);
                faces += 2 * r.len() as i64;
                voxels += r.iter().map(|x| x.1).sum::<i64>();
            }
        }
        if axis == 0 {
            occupied = voxels;
        } else {
            assert_eq!(voxels, occupied, "sweeps disagree on voxel count");
        }
    }
    (occupied as f64 * h.powi(3), faces as f64 * h * h)
}

/// Grid points of the box-face coordinates where the solid has a corner,
/// decided by probing the eight octants around each point.
pub fn corner_points(solid: &CsgSolid) -> Vec<Vec3> {
    let mut coords: [Vec<f64>; 3] = Default::default();
    fn collect(node: &CsgNode, coords: &mut [Vec<f64>; 3]) {
        match node {
            CsgNode::Box(b) => {
                for k in 0..3 {
                    coords[k].push(b.min[k]);
                    coords[k].push(b.max[k]);
                }
            }
            CsgNode::Union(c) | CsgNode::Difference(c) => c.iter().for_each(|n| collect(n, coords)),
        }
    }
    collect(solid.root(), &mut coords);
    for c in coords.iter_mut() {
        c.sort_by(f64::total_cmp);
        c.dedup();
    }
    let e = 1e-3;
    let mut out = Vec::new();
    for &x in &coords[0] {
        for &y in &coords[1] {
            for &z in &coords[2] {
                let occ = |s: [f64; 3]| contains(solid.root(), &Vec3::new(x + s[0] * e, y + s[1] * e, z + s[2] * e));
                let octants: Vec<[f64; 3]> = (0..8)
                    .map(|m| [0, 1, 2].map(|k| if m >> k & 1 == 1 { 1.0 } else { -1.0 }))
                    .collect();
                let varies_along = |axis: usize| {
                    octants.iter().any(|s| {
                        let mut t = *s;
                        t[axis] = -t[axis];
                        occ(*s) != occ(t)
                    })
                };
                if (0..3).all(varies_along) {
                    out.push(Vec3::new(x, y, z));
                }
            }
        }
    }
    out
}

/// Symmetric Hausdorff distance by scanning every pair.
pub fn hausdorff_all_pairs(a: &[Vec3], b: &[Vec3]) -> f64 {
    let directed = |p: &[Vec3], q: &[Vec3]| {
        p.iter()
            .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}
