//! Taxi-trace ingestion: parsing, Mercator projection, sampling and the pool
//! of candidate query points.
//!
//! Trace files follow the cabspotting layout: one record per line with
//! whitespace-separated latitude, longitude, occupancy flag and Unix
//! timestamp. A directory is read as one cab per file, named by file stem.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::geometry::{Point2, PointTuple};
use crate::noise::RandomStream;

/// Spherical earth radius (WGS-84 semi-major axis) in meters.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

/// Largest absolute latitude accepted by [`mercator`].
pub const MAX_LATITUDE: f64 = 85.06;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub latitude: f64,
    pub longitude: f64,
    pub occupied: bool,
    pub timestamp: i64,
}

impl TraceRecord {
    /// Parses one line; `None` for anything malformed or out of range.
    pub fn parse(line: &str) -> Option<Self> {
        let mut fields = line.split_whitespace();
        let latitude: f64 = fields.next()?.parse().ok()?;
        let longitude: f64 = fields.next()?.parse().ok()?;
        let occupied = match fields.next()? {
            "0" => false,
            "1" => true,
            _ => return None,
        };
        let timestamp: i64 = fields.next()?.parse().ok()?;
        if fields.next().is_some() {
            return None;
        }
        let record = Self {
            latitude,
            longitude,
            occupied,
            timestamp,
        };
        record.in_domain().then_some(record)
    }

    fn in_domain(&self) -> bool {
        self.latitude.is_finite()
            && self.longitude.is_finite()
            && self.latitude.abs() < MAX_LATITUDE
            && self.longitude.abs() <= 180.0
    }
}

/// Spherical Mercator projection to meters.
pub fn mercator(lat_deg: f64, lon_deg: f64) -> Result<Point2> {
    if !(lat_deg.is_finite() && lat_deg.abs() < MAX_LATITUDE) {
        return Err(Error::Domain(format!(
            "latitude {lat_deg} outside (-{MAX_LATITUDE}, {MAX_LATITUDE})"
        )));
    }
    if !(lon_deg.is_finite() && lon_deg.abs() <= 180.0) {
        return Err(Error::Domain(format!("longitude {lon_deg} outside [-180, 180]")));
    }
    let x = EARTH_RADIUS_M * lon_deg.to_radians();
    // asinh(tan φ) equals ln tan(π/4 + φ/2) but is exactly odd and zero at 0.
    let y = EARTH_RADIUS_M * lat_deg.to_radians().tan().asinh();
    Ok([x, y])
}

/// Inverse of [`mercator`], returning `(latitude, longitude)` in degrees.
pub fn inverse_mercator(p: Point2) -> (f64, f64) {
    let lon = (p[0] / EARTH_RADIUS_M).to_degrees();
    let lat = (p[1] / EARTH_RADIUS_M).sinh().atan().to_degrees();
    (lat, lon)
}

/// One cab's projected, chronologically ordered trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct CabTrace {
    pub cab_id: String,
    pub points: PointTuple,
    pub timestamps: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTraces {
    /// Cabs with at least one valid record, ordered by id.
    pub traces: Vec<CabTrace>,
    /// Lines that failed to parse or fell outside the projection domain.
    pub skipped_lines: usize,
}

/// Parses the contents of one trace file.
pub fn parse_trace(cab_id: &str, text: &str) -> (Option<CabTrace>, usize) {
    let mut skipped = 0;
    let mut records: Vec<TraceRecord> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        match TraceRecord::parse(line) {
            Some(r) => records.push(r),
            None => skipped += 1,
        }
    }
    if records.is_empty() {
        return (None, skipped);
    }
    // Stable sort keeps file order among equal timestamps.
    records.sort_by_key(|r| r.timestamp);
    let points: Vec<Point2> = records
        .iter()
        .map(|r| mercator(r.latitude, r.longitude).expect("parse() checks the domain"))
        .collect();
    let trace = CabTrace {
        cab_id: cab_id.to_string(),
        points: PointTuple::from_points2(&points).expect("non-empty finite points"),
        timestamps: records.iter().map(|r| r.timestamp).collect(),
    };
    (Some(trace), skipped)
}

/// Loads a single trace file or every regular file in a directory.
pub fn load_traces(path: impl AsRef<Path>) -> Result<LoadedTraces> {
    let path = path.as_ref();
    let mut files = Vec::new();
    if path.is_dir() {
        for entry in fs::read_dir(path)? {
            let entry = entry?;
            if entry.file_type()?.is_file() {
                files.push(entry.path());
            }
        }
        files.sort();
    } else {
        files.push(path.to_path_buf());
    }

    let mut out = LoadedTraces {
        traces: Vec::new(),
        skipped_lines: 0,
    };
    for file in files {
        let bytes = fs::read(&file)?;
        let text = String::from_utf8_lossy(&bytes);
        let stem = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let (trace, skipped) = parse_trace(&stem, &text);
        out.skipped_lines += skipped;
        out.traces.extend(trace);
    }
    out.traces.sort_by(|a, b| a.cab_id.cmp(&b.cab_id));
    Ok(out)
}

/// Uniform sample of `n` points without replacement, kept in trace order.
/// Traces with at most `n` points are returned whole.
pub fn sample_points(trace: &PointTuple, n: usize, rng: &mut RandomStream) -> Result<PointTuple> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let len = trace.len();
    if len <= n {
        return Ok(trace.clone());
    }
    let mut order: Vec<usize> = (0..len).collect();
    for i in 0..n {
        let j = i + rng.index_below(len - i);
        order.swap(i, j);
    }
    let mut chosen = order[..n].to_vec();
    chosen.sort_unstable();
    let dim = trace.dim();
    let flat = trace.flatten();
    let coords = chosen
        .iter()
        .flat_map(|&i| flat[i * dim..(i + 1) * dim].iter().copied())
        .collect();
    PointTuple::new(dim, coords)
}

/// Which grid cells count as visited by a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CellMembership {
    /// Cells containing a recorded point.
    #[default]
    Points,
    /// Cells crossed by the straight segments between consecutive points.
    Segments,
}

fn cell_of(p: &[f64], cell: f64) -> (i64, i64) {
    ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64)
}

/// Grid traversal of the segment `a → b` (Amanatides–Woo).
fn cells_on_segment(a: &[f64], b: &[f64], cell: f64, out: &mut BTreeSet<(i64, i64)>) {
    let (mut ix, mut iy) = cell_of(a, cell);
    let (ex, ey) = cell_of(b, cell);
    out.insert((ix, iy));
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let axis = |d: f64, start: f64, i: i64| -> (i64, f64, f64) {
        if d > 0.0 {
            (1, ((i + 1) as f64 * cell - start) / d, cell / d)
        } else if d < 0.0 {
            (-1, (i as f64 * cell - start) / d, -cell / d)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        }
    };
    let (sx, mut tx, ddx) = axis(dx, a[0], ix);
    let (sy, mut ty, ddy) = axis(dy, a[1], iy);
    let steps = (ex - ix).abs() + (ey - iy).abs();
    for _ in 0..steps {
        if (tx <= ty && ix != ex) || iy == ey {
            ix += sx;
            tx += ddx;
        } else {
            iy += sy;
            ty += ddy;
        }
        out.insert((ix, iy));
    }
}

/// Centers of all `cell × cell` squares visited by some trace, sorted and
/// without duplicates.
pub fn query_point_pool(traces: &[PointTuple], cell: f64, membership: CellMembership) -> Result<Vec<Point2>> {
    ensure_positive("cell size", cell)?;
    if traces.is_empty() {
        return Err(invalid("query pool needs at least one trace"));
    }
    let mut cells = BTreeSet::new();
    for t in traces {
        t.require_planar()?;
        let pts: Vec<&[f64]> = t.iter().collect();
        match membership {
            CellMembership::Points => {
                cells.extend(pts.iter().map(|p| cell_of(p, cell)));
            }
            CellMembership::Segments => {
                cells.insert(cell_of(pts[0], cell));
                for w in pts.windows(2) {
                    cells_on_segment(w[0], w[1], cell, &mut cells);
                }
            }
        }
    }
    Ok(cells
        .into_iter()
        .map(|(i, j)| [(i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell])
        .collect())
}

/// Writes projected traces as `cab_id,idx,x_m,y_m,ts` rows with 1-based
/// `idx`.
pub fn write_traces_csv(mut w: impl Write, traces: &[CabTrace]) -> Result<()> {
    writeln!(w, "cab_id,idx,x_m,y_m,ts")?;
    for t in traces {
        for (i, (p, ts)) in t.points.iter().zip(&t.timestamps).enumerate() {
            writeln!(w, "{},{},{},{},{}", t.cab_id, i + 1, p[0], p[1], ts)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn mercator_examples() {
        assert_eq!(mercator(0.0, 0.0).unwrap(), [0.0, 0.0]);
        let [x, _] = mercator(0.0, 180.0).unwrap();
        assert!((x - 20_037_508.342_789_244).abs() < 1e-6);
        assert!(mercator(85.06, 0.0).is_err());
        assert!(mercator(-85.06, 0.0).is_err());
        assert!(mercator(10.0, 180.5).is_err());
        assert!(mercator(f64::NAN, 0.0).is_err());
        for lat in [1.0, 37.7749, 60.0, 85.0] {
            let north = mercator(lat, 12.0).unwrap()[1];
            let south = mercator(-lat, 12.0).unwrap()[1];
            assert_eq!(north, -south);
        }
    }

    proptest! {
        #[test]
        fn mercator_round_trip(lat in -85.0f64..85.0, lon in -180.0f64..=180.0) {
            let (lat2, lon2) = inverse_mercator(mercator(lat, lon).unwrap());
            prop_assert!((lat - lat2).abs() < 1e-9);
            prop_assert!((lon - lon2).abs() < 1e-9);
        }

        #[test]
        fn pool_matches_hash_grid(points in prop::collection::vec(prop::array::uniform2(-20.0f64..20.0), 1..60)) {
            let t = PointTuple::from_points2(&points).unwrap();
            let pool = query_point_pool(&[t], 1.0, CellMembership::Points).unwrap();
            let oracle: HashSet<(i64, i64)> = points
                .iter()
                .map(|p| (p[0].floor() as i64, p[1].floor() as i64))
                .collect();
            prop_assert_eq!(pool.len(), oracle.len());
            for c in &pool {
                let (i, j) = (c[0] - 0.5, c[1] - 0.5);
                prop_assert!(i == i.round() && j == j.round(), "off-grid center {:?}", c);
                prop_assert!(oracle.contains(&(i as i64, j as i64)));
            }
        }

        #[test]
        fn segment_traversal_covers_dense_samples(
            a in prop::array::uniform2(-30.0f64..30.0),
            b in prop::array::uniform2(-30.0f64..30.0),
        ) {
            let mut cells = BTreeSet::new();
            cells_on_segment(&a, &b, 1.0, &mut cells);
            let (ca, cb) = (cell_of(&a, 1.0), cell_of(&b, 1.0));
            let manhattan = (ca.0 - cb.0).abs() + (ca.1 - cb.1).abs();
            prop_assert_eq!(cells.len() as i64, manhattan + 1);
            prop_assert!(cells.contains(&cb));
            let samples = 20_000;
            for s in 0..=samples {
                let t = s as f64 / samples as f64;
                let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let c = cell_of(&p, 1.0);
                // Allow misses only where the sample sits on a cell boundary.
                let on_edge = (p[0] - p[0].round()).abs() < 1e-6 || (p[1] - p[1].round()).abs() < 1e-6;
                prop_assert!(cells.contains(&c) || on_edge, "missing {:?}", c);
            }
        }
    }

    #[test]
    fn pool_examples() {
        let single = PointTuple::from_points2(&[[0.3, 0.7]]).unwrap();
        assert_eq!(
            query_point_pool(&[single], 1.0, CellMembership::Points).unwrap(),
            vec![[0.5, 0.5]]
        );
        let pair = PointTuple::from_points2(&[[0.3, 0.7], [0.9, 0.1]]).unwrap();
        assert_eq!(query_point_pool(&[pair], 1.0, CellMembership::Points).unwrap().len(), 1);
        let seg = PointTuple::from_points2(&[[0.5, 0.5], [3.5, 0.5]]).unwrap();
        assert_eq!(
            query_point_pool(&[seg.clone()], 1.0, CellMembership::Points)
                .unwrap()
                .len(),
            2
        );
        assert_eq!(
            query_point_pool(&[seg], 1.0, CellMembership::Segments).unwrap(),
            vec![[0.5, 0.5], [1.5, 0.5], [2.5, 0.5], [3.5, 0.5]]
        );
        assert!(query_point_pool(&[], 1.0, CellMembership::Points).is_err());
    }

    #[test]
    fn parse_and_load() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("cab_b.txt"),
            "0.0 0.0 0 20\n37.75 -122.39 1 10\nbad line\n85.06 0.0 0 30\n37.0 -122.0 2 5\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("cab_a.txt"), "").unwrap();
        std::fs::write(dir.path().join("cab_c.txt"), "1.0 2.0 1 7 \n").unwrap();
        let loaded = load_traces(dir.path()).unwrap();
        assert_eq!(loaded.skipped_lines, 3);
        assert_eq!(loaded.traces.len(), 2);
        let b = &loaded.traces[0];
        assert_eq!(b.cab_id, "cab_b");
        assert_eq!(b.timestamps, vec![10, 20]);
        assert_eq!(b.points.flatten()[2..], [0.0, 0.0]);
        assert!(b.points.flatten().iter().all(|v| v.is_finite()));

        let mut buf = Vec::new();
        write_traces_csv(&mut buf, &loaded.traces).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "cab_id,idx,x_m,y_m,ts");
        assert_eq!(lines[2], "cab_b,2,0,0,20");
        assert_eq!(lines.len(), 4);

        let empty = dir.path().join("cab_a.txt");
        assert!(load_traces(&empty).unwrap().traces.is_empty());
        assert!(load_traces(dir.path().join("missing.txt")).is_err());
    }

    #[test]
    fn origin_record_projects_to_origin() {
        let (t, skipped) = parse_trace("x", "0.0 0.0 0 0");
        assert_eq!(skipped, 0);
        assert_eq!(t.unwrap().points.flatten(), &[0.0, 0.0]);
        assert_eq!(TraceRecord::parse("85.06 0.0 0 0"), None);
    }

    #[test]
    fn sampling() {
        let pts: Vec<Point2> = (0..50).map(|i| [i as f64, 0.0]).collect();
        let t = PointTuple::from_points2(&pts).unwrap();
        let mut rng = RandomStream::new(1, 0);
        assert_eq!(sample_points(&t, 50, &mut rng).unwrap(), t);
        assert_eq!(sample_points(&t, 80, &mut rng).unwrap(), t);
        assert_eq!(sample_points(&t, 1, &mut rng).unwrap().len(), 1);
        assert!(sample_points(&t, 0, &mut rng).is_err());
        let a = sample_points(&t, 10, &mut RandomStream::new(5, 5)).unwrap();
        let b = sample_points(&t, 10, &mut RandomStream::new(5, 5)).unwrap();
        assert_eq!(a, b);
        let xs: Vec<f64> = a.iter().map(|p| p[0]).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]), "distinct and in trace order");
    }

    #[test]
    fn sampling_is_uniform() {
        let pts: Vec<Point2> = (0..10).map(|i| [i as f64, 0.0]).collect();
        let t = PointTuple::from_points2(&pts).unwrap();
        let mut rng = RandomStream::new(2, 0);
        let mut counts = [0usize; 10];
        let trials = 20_000;
        for _ in 0..trials {
            for p in sample_points(&t, 3, &mut rng).unwrap().iter() {
                counts[p[0] as usize] += 1;
            }
        }
        // Each point is included with probability 3/10.
        let expect = trials as f64 * 0.3;
        let sd = (trials as f64 * 0.3 * 0.7).sqrt();
        assert!(
            counts.iter().all(|&c| (c as f64 - expect).abs() < 5.0 * sd),
            "{counts:?}"
        );
    }
}
