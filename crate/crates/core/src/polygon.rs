//! Exact 2-D convex polygon geometry: hulls, areas, intersection, Jaccard
//! similarity and Minkowski-expansion distances.
//!
//! Collinearity is decided with an orientation tolerance of `1e-9 · s²`,
//! where `s` is the larger bounding-box side of the input.

use crate::error::{invalid, Result};
use crate::geometry::Point2;

const ORIENTATION_EPS: f64 = 1e-9;

/// A convex polygon with counter-clockwise vertices and no three consecutive
/// vertices collinear. Fewer than three vertices means the hull degenerated
/// to a point or a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn bbox_scale(points: &[Point2]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for l in 0..2 {
            lo[l] = lo[l].min(p[l]);
            hi[l] = hi[l].max(p[l]);
        }
    }
    (hi[0] - lo[0]).max(hi[1] - lo[1]).max(0.0)
}

fn tolerance(points: &[Point2]) -> f64 {
    let s = bbox_scale(points);
    ORIENTATION_EPS * s * s
}

/// Andrew's monotone chain.
pub fn convex_hull(points: &[Point2]) -> Result<ConvexPolygon> {
    if points.is_empty() {
        return Err(invalid("convex hull of an empty point set"));
    }
    if let Some(p) = points.iter().find(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(invalid(format!("non-finite point {p:?}")));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return Ok(ConvexPolygon { vertices: pts });
    }
    let tol = tolerance(&pts);

    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= tol {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= tol {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    Ok(ConvexPolygon { vertices: hull })
}

impl ConvexPolygon {
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// True for point or segment hulls.
    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Shoelace area; zero for degenerate hulls.
    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point2) -> bool {
        if self.is_degenerate() {
            // Projection onto a segment rounds, so endpoints need slack.
            return self.distance_to(p) <= ORIENTATION_EPS * bbox_scale(&self.vertices);
        }
        let tol = tolerance(&self.vertices);
        self.edges().all(|(a, b)| cross(a, b, p) >= -tol)
    }

    /// Euclidean distance from `p` to the polygon; zero inside.
    pub fn distance_to(&self, p: Point2) -> f64 {
        match self.vertices.len() {
            0 => f64::INFINITY,
            1 => dist(p, self.vertices[0]),
            2 => point_segment_distance(p, self.vertices[0], self.vertices[1]),
            _ => {
                if self.contains(p) {
                    0.0
                } else {
                    self.edges()
                        .map(|(a, b)| point_segment_distance(p, a, b))
                        .fold(f64::INFINITY, f64::min)
                }
            }
        }
    }
}

fn dist(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn shoelace(vertices: &[Point2]) -> f64 {
    if vertices.len() < 3 {
        return 0.0;
    }
    let n = vertices.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    0.5 * twice.abs()
}

/// Sutherland–Hodgman clip of `subject` against the convex `clip`.
fn clip_polygon(subject: &[Point2], clip: &ConvexPolygon) -> Vec<Point2> {
    let mut output = subject.to_vec();
    for (a, b) in clip.edges() {
        if output.is_empty() {
            break;
        }
        let input = std::mem::take(&mut output);
        let inside = |p: Point2| cross(a, b, p) >= 0.0;
        let intersect = |p: Point2, q: Point2| {
            let cp = cross(a, b, p);
            let cq = cross(a, b, q);
            let t = cp / (cp - cq);
            [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
        };
        let mut prev = *input.last().expect("non-empty");
        for &cur in &input {
            match (inside(prev), inside(cur)) {
                (true, true) => output.push(cur),
                (true, false) => output.push(intersect(prev, cur)),
                (false, true) => {
                    output.push(intersect(prev, cur));
                    output.push(cur);
                }
                (false, false) => {}
            }
            prev = cur;
        }
    }
    output
}

/// Area of `a ∩ b`.
pub fn intersection_area(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
    if a.is_degenerate() || b.is_degenerate() {
        return 0.0;
    }
    shoelace(&clip_polygon(&a.vertices, b))
}

/// `μ(a ∩ b) / μ(a ∪ b)`. Degenerate hulls score 0, except two equal
/// degenerate hulls, which score 1.
pub fn jaccard(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
    match (a.is_degenerate(), b.is_degenerate()) {
        (true, true) => return if a == b { 1.0 } else { 0.0 },
        (true, false) | (false, true) => return 0.0,
        (false, false) => {}
    }
    let inter = intersection_area(a, b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Smallest `γ` with `inner ⊆ outer + B_γ`: the largest distance from a
/// vertex of `inner` to `outer`.
pub fn directed_excess(outer: &ConvexPolygon, inner: &ConvexPolygon) -> Result<f64> {
    if outer.is_degenerate() || inner.is_degenerate() {
        return Err(invalid("directed excess needs non-degenerate polygons"));
    }
    Ok(inner.vertices.iter().map(|&v| outer.distance_to(v)).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_square() -> ConvexPolygon {
        convex_hull(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn hull_of_square_with_center() {
        let h = convex_hull(&[[0.0, 0.0], [1.0, 1.0], [0.5, 0.5], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(h.vertices().len(), 4);
        assert!(!h.vertices().contains(&[0.5, 0.5]));
        assert!((h.area() - 1.0).abs() < 1e-15);
        // Counter-clockwise orientation.
        let v = h.vertices();
        for i in 0..v.len() {
            assert!(cross(v[i], v[(i + 1) % v.len()], v[(i + 2) % v.len()]) > 0.0);
        }
    }

    #[test]
    fn degenerate_hulls() {
        assert!(convex_hull(&[]).is_err());
        let single = convex_hull(&[[2.0, 3.0]]).unwrap();
        assert!(single.is_degenerate());
        assert_eq!(single.vertices(), &[[2.0, 3.0]]);
        let line = convex_hull(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        assert!(line.is_degenerate());
        assert_eq!(line.vertices().len(), 2);
        let dup = convex_hull(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(dup.is_degenerate());
        assert_eq!(dup.vertices().len(), 1);
        // Edge midpoints are dropped as collinear.
        let h = convex_hull(&[[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(h.vertices().len(), 4);
    }

    #[test]
    fn segment_hull_contains_its_endpoints() {
        let (a, b) = ([839.5477913531828, 0.0], [200.3708588309549, 0.0]);
        let seg = convex_hull(&[a, b]).unwrap();
        assert!(seg.contains(a) && seg.contains(b));
        assert!(!seg.contains([500.0, 1e-3]));
    }

    #[test]
    fn jaccard_examples() {
        let a = unit_square();
        assert_eq!(jaccard(&a, &a), 1.0);
        let b = convex_hull(&[[0.5, 0.0], [1.5, 0.0], [1.5, 1.0], [0.5, 1.0]]).unwrap();
        assert!((jaccard(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
        assert!((jaccard(&b, &a) - 1.0 / 3.0).abs() < 1e-12);
        let far = convex_hull(&[[5.0, 5.0], [6.0, 5.0], [6.0, 6.0]]).unwrap();
        assert_eq!(jaccard(&a, &far), 0.0);
        let seg = convex_hull(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert_eq!(jaccard(&a, &seg), 0.0);
        assert_eq!(jaccard(&seg, &seg.clone()), 1.0);
        let other_seg = convex_hull(&[[0.0, 0.0], [2.0, 1.0]]).unwrap();
        assert_eq!(jaccard(&seg, &other_seg), 0.0);
    }

    #[test]
    fn jaccard_shrinks_with_intersection() {
        let a = convex_hull(&[[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]]).unwrap();
        let mut last = 1.0;
        for shift in [0.5, 1.0, 2.0, 3.0, 3.9] {
            let b = convex_hull(&[[shift, 0.0], [4.0 + shift, 0.0], [4.0 + shift, 4.0], [shift, 4.0]]).unwrap();
            let j = jaccard(&a, &b);
            assert!(j < last);
            last = j;
        }
    }

    #[test]
    fn point_to_polygon_distance() {
        let sq = unit_square();
        assert_eq!(sq.distance_to([2.0, 0.5]), 1.0);
        assert_eq!(sq.distance_to([0.5, 0.5]), 0.0);
        assert!((sq.distance_to([2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn directed_excess_examples() {
        let outer = convex_hull(&[[-1.0, -1.0], [2.0, -1.0], [2.0, 2.0], [-1.0, 2.0]]).unwrap();
        assert_eq!(directed_excess(&outer, &unit_square()).unwrap(), 0.0);
        assert!(directed_excess(&unit_square(), &outer).unwrap() > 0.0);
        let seg = convex_hull(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(directed_excess(&seg, &outer).is_err());
    }

    #[test]
    fn directed_excess_matches_dense_boundary_sampling() {
        let a = unit_square();
        let b = convex_hull(&[[3.0, 4.0], [4.0, 4.0], [4.0, 5.0], [3.0, 5.0]]).unwrap();
        // Dense sampling of the boundary of b, each sample's distance to a.
        let samples = 10_000;
        let v = b.vertices();
        let mut oracle = 0.0f64;
        for s in 0..samples {
            let t = s as f64 / samples as f64 * v.len() as f64;
            let e = t.floor() as usize;
            let f = t - e as f64;
            let (p, q) = (v[e], v[(e + 1) % v.len()]);
            let pt = [p[0] + f * (q[0] - p[0]), p[1] + f * (q[1] - p[1])];
            let mut d = f64::INFINITY;
            for (c, dd) in a.edges() {
                d = d.min(point_segment_distance(pt, c, dd));
            }
            oracle = oracle.max(d);
        }
        let got = directed_excess(&a, &b).unwrap();
        assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
        // Farthest vertex (4,5) to corner (1,1) is exactly 5.
        assert!((got - 5.0).abs() < 1e-12);
    }

    fn in_triangle(p: Point2, a: Point2, b: Point2, c: Point2) -> bool {
        let d1 = cross(a, b, p);
        let d2 = cross(b, c, p);
        let d3 = cross(c, a, p);
        let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
        let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
        !(neg && pos)
    }

    /// O(n⁴) oracle: a point is a hull vertex iff no triangle of the other
    /// points contains it.
    fn brute_force_hull_vertices(points: &[Point2]) -> Vec<Point2> {
        let mut out = Vec::new();
        for (i, &p) in points.iter().enumerate() {
            let others: Vec<Point2> = points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| *q)
                .collect();
            let mut interior = false;
            'outer: for a in 0..others.len() {
                for b in a + 1..others.len() {
                    for c in b + 1..others.len() {
                        if in_triangle(p, others[a], others[b], others[c]) {
                            interior = true;
                            break 'outer;
                        }
                    }
                }
            }
            if !interior {
                out.push(p);
            }
        }
        out.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn monotone_chain_matches_brute_force(points in prop::collection::vec(prop::array::uniform2(-50.0f64..50.0), 3..=20)) {
            let hull = convex_hull(&points).unwrap();
            let mut got = hull.vertices().to_vec();
            got.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            prop_assert_eq!(got, brute_force_hull_vertices(&points));
        }

        #[test]
        fn hull_is_idempotent(points in prop::collection::vec(prop::array::uniform2(-50.0f64..50.0), 1..40)) {
            let hull = convex_hull(&points).unwrap();
            let again = convex_hull(hull.vertices()).unwrap();
            prop_assert_eq!(hull, again);
        }

        #[test]
        fn jaccard_is_symmetric_and_excess_detects_containment(
            a in prop::collection::vec(prop::array::uniform2(-10.0f64..10.0), 3..15),
            b in prop::collection::vec(prop::array::uniform2(-10.0f64..10.0), 3..15),
        ) {
            let ha = convex_hull(&a).unwrap();
            let hb = convex_hull(&b).unwrap();
            prop_assume!(!ha.is_degenerate() && !hb.is_degenerate());
            let j = jaccard(&ha, &hb);
            prop_assert!((j - jaccard(&hb, &ha)).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&j));
            let excess = directed_excess(&ha, &hb).unwrap();
            let all_inside = hb.vertices().iter().all(|&v| ha.contains(v));
            prop_assert_eq!(excess == 0.0, all_inside);
        }
    }
}
