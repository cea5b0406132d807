//! Point tuples, tuple metrics, and the Lipschitz functionals queried by the
//! mechanisms.
//!
//! Under `dist_inf`, [`max_radius`] and the distance returned by [`min_dist`]
//! are 1-Lipschitz and [`center`] is √2-Lipschitz (for d = 2).

use std::fmt;

use crate::error::{invalid, Error, Result};

/// A point in the plane.
pub type Point2 = [f64; 2];

/// 1-based position of a point within a [`PointTuple`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(usize);

impl PointId {
    /// `None` for 0.
    pub fn new(one_based: usize) -> Option<Self> {
        (one_based > 0).then_some(Self(one_based))
    }

    pub fn from_zero_based(index: usize) -> Self {
        Self(index + 1)
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn zero_based(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// All ids `1..=n` in ascending order.
pub fn all_ids(n: usize) -> Vec<PointId> {
    (1..=n).map(PointId).collect()
}

/// An ordered tuple of `n ≥ 1` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTuple {
    dim: usize,
    coords: Vec<f64>,
}

impl PointTuple {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("point dimension must be at least 1"));
        }
        if coords.is_empty() {
            return Err(invalid("a point tuple needs at least one point"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(invalid(format!("coordinate of point {} is not finite", pos / dim + 1)));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points2(points: &[Point2]) -> Result<Self> {
        Self::new(2, points.iter().flatten().copied().collect())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch(format!(
                "point {} has dimension {}, expected {dim}",
                bad + 1,
                rows[bad].len()
            )));
        }
        Self::new(dim, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false: tuples hold at least one point.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Panics if `id` is out of range.
    pub fn point(&self, id: PointId) -> &[f64] {
        let i = id.zero_based();
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point2(&self, id: PointId) -> Point2 {
        let p = self.point(id);
        [p[0], p[1]]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// The `dn`-vector of all coordinates.
    pub fn flatten(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_points2(&self) -> Result<Vec<Point2>> {
        self.require_planar()?;
        Ok(self.iter().map(|p| [p[0], p[1]]).collect())
    }

    pub fn contains(&self, id: PointId) -> bool {
        id.get() <= self.len()
    }

    /// A copy with `offset` added to the flattened coordinates.
    pub fn shifted(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.coords.len() {
            return Err(Error::ShapeMismatch(format!(
                "offset has {} entries, tuple has {}",
                offset.len(),
                self.coords.len()
            )));
        }
        let coords = self.coords.iter().zip(offset).map(|(a, b)| a + b).collect();
        Self::new(self.dim, coords)
    }

    pub(crate) fn require_planar(&self) -> Result<()> {
        if self.dim == 2 {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "operation requires 2-D points, tuple has dimension {}",
                self.dim
            )))
        }
    }

    fn require_point(&self, q: &[f64]) -> Result<()> {
        if q.len() == self.dim {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "query point has dimension {}, tuple has {}",
                q.len(),
                self.dim
            )))
        }
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn per_point_distances<'a>(x: &'a PointTuple, y: &'a PointTuple) -> Result<impl Iterator<Item = f64> + 'a> {
    if x.dim != y.dim || x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "tuples of shape {}x{} and {}x{}",
            x.len(),
            x.dim,
            y.len(),
            y.dim
        )));
    }
    Ok(x.iter().zip(y.iter()).map(|(a, b)| euclidean(a, b)))
}

/// `max_i ‖x_i − y_i‖`.
pub fn dist_inf(x: &PointTuple, y: &PointTuple) -> Result<f64> {
    Ok(per_point_distances(x, y)?.fold(0.0, f64::max))
}

/// `Σ_i ‖x_i − y_i‖`.
pub fn dist_1(x: &PointTuple, y: &PointTuple) -> Result<f64> {
    Ok(per_point_distances(x, y)?.sum())
}

/// `√(Σ_i ‖x_i − y_i‖²)`.
pub fn dist_2(x: &PointTuple, y: &PointTuple) -> Result<f64> {
    Ok(per_point_distances(x, y)?.map(|d| d * d).sum::<f64>().sqrt())
}

/// Per-coordinate midpoint of the bounding box,
/// `½ (max_i x_{i,l} + min_i x_{i,l})`.
pub fn center(x: &PointTuple) -> Vec<f64> {
    (0..x.dim)
        .map(|l| {
            let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[l]), hi.max(p[l]))
            });
            0.5 * (hi + lo)
        })
        .collect()
}

/// `max_i ‖x_i − q‖`.
pub fn max_radius(x: &PointTuple, q: &[f64]) -> Result<f64> {
    x.require_point(q)?;
    Ok(x.iter().map(|p| euclidean(p, q)).fold(0.0, f64::max))
}

/// The point of `subset` nearest to `q` and its distance. Ties go to the
/// lowest id.
pub fn min_dist(x: &PointTuple, q: &[f64], subset: &[PointId]) -> Result<(PointId, f64)> {
    x.require_point(q)?;
    if subset.is_empty() {
        return Err(invalid("index subset must be non-empty"));
    }
    let mut best: Option<(PointId, f64)> = None;
    for &id in subset {
        if !x.contains(id) {
            return Err(invalid(format!("index {id} is out of range 1..={}", x.len())));
        }
        let d = euclidean(x.point(id), q);
        best = match best {
            Some((bid, bd)) if bd < d || (bd == d && bid < id) => Some((bid, bd)),
            _ => Some((id, d)),
        };
    }
    Ok(best.expect("subset is non-empty"))
}

/// `max_{i,j} ‖x_i − x_j‖` by exhaustive scan.
pub fn diameter(x: &PointTuple) -> f64 {
    let points: Vec<&[f64]> = x.iter().collect();
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(euclidean(a, b));
        }
    }
    best
}
