//! Ear-clipping triangulation of planar polygons with holes, without Steiner points.
//!
//! Every input vertex is kept, including collinear ones, so neighbouring faces
//! that share a vertex on a straight edge stay conforming.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Pt {
    pub x: f64,
    pub y: f64,
    pub id: usize,
}

impl Pt {
    fn same_pos(&self, o: &Pt) -> bool {
        self.x == o.x && self.y == o.y
    }
}

fn cross(o: &Pt, a: &Pt, b: &Pt) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

struct Tolerance {
    area: f64,
}

impl Tolerance {
    fn for_points<'a>(points: impl Iterator<Item = &'a Pt>) -> Self {
        let scale = points.fold(1.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
        Tolerance {
            area: 1e-12 * scale * scale,
        }
    }

    fn sign(&self, v: f64) -> i8 {
        if v > self.area {
            1
        } else if v < -self.area {
            -1
        } else {
            0
        }
    }
}

fn on_segment(tol: &Tolerance, p: &Pt, a: &Pt, b: &Pt) -> bool {
    tol.sign(cross(a, b, p)) == 0
        && p.x >= a.x.min(b.x) - tol.area.sqrt()
        && p.x <= a.x.max(b.x) + tol.area.sqrt()
        && p.y >= a.y.min(b.y) - tol.area.sqrt()
        && p.y <= a.y.max(b.y) + tol.area.sqrt()
}

fn segments_touch(tol: &Tolerance, p1: &Pt, p2: &Pt, q1: &Pt, q2: &Pt) -> bool {
    let d1 = tol.sign(cross(p1, p2, q1));
    let d2 = tol.sign(cross(p1, p2, q2));
    let d3 = tol.sign(cross(q1, q2, p1));
    let d4 = tol.sign(cross(q1, q2, p2));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(tol, q1, p1, p2))
        || (d2 == 0 && on_segment(tol, q2, p1, p2))
        || (d3 == 0 && on_segment(tol, p1, q1, q2))
        || (d4 == 0 && on_segment(tol, p2, q1, q2))
}

/// Whether direction `target - ring[j]` points into the polygon interior at `ring[j]`.
fn locally_inside(tol: &Tolerance, ring: &[Pt], j: usize, target: &Pt) -> bool {
    let n = ring.len();
    let (prev, cur, next) = (&ring[(j + n - 1) % n], &ring[j], &ring[(j + 1) % n]);
    let turn = tol.sign(cross(prev, cur, next));
    let left_of_out = tol.sign(cross(cur, next, target)) > 0;
    let right_of_in = tol.sign(cross(cur, prev, target)) < 0;
    match turn {
        1 => left_of_out && right_of_in,
        -1 => left_of_out || right_of_in,
        _ => left_of_out,
    }
}

fn bridge_hole(tol: &Tolerance, ring: Vec<Pt>, hole: &[Pt], others: &[&[Pt]]) -> Vec<Pt> {
    let m = (0..hole.len())
        .max_by(|&a, &b| {
            hole[a]
                .x
                .total_cmp(&hole[b].x)
                .then(hole[b].y.total_cmp(&hole[a].y))
                .then(b.cmp(&a))
        })
        .expect("hole has vertices");
    let anchor = hole[m];
    let blocked = |from: &Pt| {
        let edges = |loop_: &[Pt]| {
            (0..loop_.len())
                .map(|i| (loop_[i], loop_[(i + 1) % loop_.len()]))
                .collect::<Vec<_>>()
        };
        let mut all = edges(&ring);
        all.extend(edges(hole));
        for o in others {
            all.extend(edges(o));
        }
        all.iter().any(|(a, b)| {
            if a.same_pos(from) || b.same_pos(from) || a.same_pos(&anchor) || b.same_pos(&anchor) {
                return false;
            }
            segments_touch(tol, from, &anchor, a, b)
        })
    };
    let dist = |p: &Pt| (p.x - anchor.x).powi(2) + (p.y - anchor.y).powi(2);
    let mut order: Vec<usize> = (0..ring.len()).filter(|&j| !ring[j].same_pos(&anchor)).collect();
    order.sort_by(|&a, &b| dist(&ring[a]).total_cmp(&dist(&ring[b])).then(a.cmp(&b)));
    let j = order
        .iter()
        .copied()
        .find(|&j| locally_inside(tol, &ring, j, &anchor) && !blocked(&ring[j]))
        .or_else(|| order.first().copied())
        .expect("outer ring has vertices");

    let mut out = Vec::with_capacity(ring.len() + hole.len() + 2);
    out.extend_from_slice(&ring[..=j]);
    out.extend((0..=hole.len()).map(|k| hole[(m + k) % hole.len()]));
    out.extend_from_slice(&ring[j..]);
    out
}

/// Triangulates a counter-clockwise outer ring with clockwise holes.
/// Returns counter-clockwise triangles as vertex ids.
pub(crate) fn triangulate(outer: &[Pt], holes: &[Vec<Pt>]) -> Vec<[usize; 3]> {
    let tol = Tolerance::for_points(outer.iter().chain(holes.iter().flatten()));
    let mut holes: Vec<&[Pt]> = holes.iter().filter(|h| h.len() >= 3).map(|h| h.as_slice()).collect();
    holes.sort_by(|a, b| {
        let max_x = |h: &[Pt]| h.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        max_x(b).total_cmp(&max_x(a))
    });
    let mut ring = outer.to_vec();
    for (i, hole) in holes.iter().enumerate() {
        ring = bridge_hole(&tol, ring, hole, &holes[i + 1..]);
    }
    ear_clip(&tol, ring)
}

fn ear_clip(tol: &Tolerance, ring: Vec<Pt>) -> Vec<[usize; 3]> {
    let mut idx: Vec<usize> = (0..ring.len()).collect();
    let mut out = Vec::with_capacity(ring.len().saturating_sub(2));
    while idx.len() > 3 {
        let n = idx.len();
        let is_ear = |i: usize| {
            let (p, c, q) = (&ring[idx[(i + n - 1) % n]], &ring[idx[i]], &ring[idx[(i + 1) % n]]);
            if tol.sign(cross(p, c, q)) <= 0 {
                return false;
            }
            !idx.iter().map(|&k| &ring[k]).any(|r| {
                if r.same_pos(p) || r.same_pos(c) || r.same_pos(q) {
                    return false;
                }
                tol.sign(cross(p, c, r)) >= 0 && tol.sign(cross(c, q, r)) >= 0 && tol.sign(cross(q, p, r)) >= 0
            })
        };
        let pick = (0..n).find(|&i| is_ear(i));
        let i = match pick {
            Some(i) => i,
            None => {
                // Degenerate leftovers: drop a zero-area spike if there is one,
                // otherwise clip the most convex vertex.
                let area = |i: usize| {
                    cross(&ring[idx[(i + n - 1) % n]], &ring[idx[i]], &ring[idx[(i + 1) % n]])
                };
                if let Some(s) = (0..n).find(|&i| {
                    ring[idx[(i + n - 1) % n]].same_pos(&ring[idx[(i + 1) % n]]) || tol.sign(area(i)) == 0
                }) {
                    idx.remove(s);
                    continue;
                }
                (0..n).max_by(|&a, &b| area(a).total_cmp(&area(b))).unwrap()
            }
        };
        let (p, c, q) = (idx[(i + n - 1) % n], idx[i], idx[(i + 1) % n]);
        out.push([ring[p].id, ring[c].id, ring[q].id]);
        idx.remove(i);
    }
    if idx.len() == 3 {
        let (p, c, q) = (&ring[idx[0]], &ring[idx[1]], &ring[idx[2]]);
        if tol.sign(cross(p, c, q)) > 0 {
            out.push([p.id, c.id, q.id]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(coords: &[(f64, f64)], first_id: usize) -> Vec<Pt> {
        coords
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Pt { x, y, id: first_id + i })
            .collect()
    }

    fn area(tris: &[[usize; 3]], all: &[Pt]) -> f64 {
        let by_id = |id: usize| all.iter().find(|p| p.id == id).unwrap();
        tris.iter()
            .map(|t| {
                let c = cross(by_id(t[0]), by_id(t[1]), by_id(t[2]));
                assert!(c > 0.0, "triangle {t:?} is not counter-clockwise");
                c / 2.0
            })
            .sum()
    }

    #[test]
    fn square() {
        let sq = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], 0);
        let tris = triangulate(&sq, &[]);
        assert_eq!(tris.len(), 2);
        assert!((area(&tris, &sq) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn l_shape_with_collinear_vertex() {
        let l = pts(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)],
            0,
        );
        let tris = triangulate(&l, &[]);
        assert_eq!(tris.len(), 5);
        assert!((area(&tris, &l) - 3.0).abs() < 1e-12);
        // The collinear vertex is used.
        assert!(tris.iter().any(|t| t.contains(&1)));
    }

    #[test]
    fn square_with_hole() {
        let outer = pts(&[(0.0, 0.0), (30.0, 0.0), (30.0, 40.0), (0.0, 40.0)], 0);
        let hole = pts(&[(10.0, 20.0), (10.0, 30.0), (20.0, 30.0), (20.0, 20.0)], 4);
        let tris = triangulate(&outer, std::slice::from_ref(&hole));
        let all: Vec<Pt> = outer.iter().chain(&hole).copied().collect();
        // n + 2h - 2 triangles for n vertices and h holes.
        assert_eq!(tris.len(), 8 + 2 - 2);
        assert!((area(&tris, &all) - 1100.0).abs() < 1e-9);
    }

    #[test]
    fn two_holes() {
        let outer = pts(&[(0.0, 0.0), (10.0, 0.0), (10.0, 4.0), (0.0, 4.0)], 0);
        let h1 = pts(&[(1.0, 1.0), (1.0, 3.0), (3.0, 3.0), (3.0, 1.0)], 4);
        let h2 = pts(&[(6.0, 1.0), (6.0, 3.0), (8.0, 3.0), (8.0, 1.0)], 8);
        let tris = triangulate(&outer, &[h1.clone(), h2.clone()]);
        let all: Vec<Pt> = outer.iter().chain(&h1).chain(&h2).copied().collect();
        assert_eq!(tris.len(), 12 + 4 - 2);
        assert!((area(&tris, &all) - 32.0).abs() < 1e-9);
    }
}
