//! Input collections: synthetic traces or loaded cab traces.

use std::f64::consts::PI;

use geopriv::dataset::load_traces;
use geopriv::{Point2, PointTuple, RandomStream};

use crate::config::{ExperimentConfig, InputSpec, SyntheticKind};
use crate::Result;

/// Stream namespaces, so that data, queries and mechanism noise never share
/// a stream.
pub mod namespace {
    pub const COLLECTION: u64 = 1;
    pub const SAMPLE: u64 = 2;
    pub const QUERY: u64 = 3;
    pub const MECHANISM: u64 = 4;
    pub const SELECT: u64 = 5;
}

/// Mixes a tuple of indices into a stream id (splitmix64 finaliser per
/// part).
pub fn stream_id(parts: &[u64]) -> u64 {
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for &p in parts {
        let mut z = h ^ p.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

/// `len` independent uniform points in `[0, side]²`.
pub fn synthetic_uniform(side: f64, len: usize, rng: &mut RandomStream) -> PointTuple {
    let points: Vec<Point2> = (0..len)
        .map(|_| [side * rng.uniform_open(), side * rng.uniform_open()])
        .collect();
    PointTuple::from_points2(&points).expect("uniform points are finite")
}

/// A walk of `len` points from the square's center, each step of length
/// `step` in a uniform direction, reflected at the square's sides.
pub fn synthetic_walk(side: f64, len: usize, step: f64, rng: &mut RandomStream) -> PointTuple {
    let reflect = |v: f64| {
        let period = 2.0 * side;
        let m = v.rem_euclid(period);
        if m > side {
            period - m
        } else {
            m
        }
    };
    let mut p = [side / 2.0, side / 2.0];
    let mut points = Vec::with_capacity(len);
    for _ in 0..len {
        points.push(p);
        let theta = 2.0 * PI * rng.uniform_open();
        p = [reflect(p[0] + step * theta.cos()), reflect(p[1] + step * theta.sin())];
    }
    PointTuple::from_points2(&points).expect("walk points are finite")
}

/// The `config.collections` traces experiments sample from. Synthetic
/// traces have `trace_len` points. A dataset path that cannot be read falls
/// back to synthetic uniform data with a warning on stderr.
pub fn collections(config: &ExperimentConfig, trace_len: usize) -> Result<Vec<PointTuple>> {
    let synthetic = |kind: SyntheticKind| -> Vec<PointTuple> {
        (0..config.collections)
            .map(|c| {
                let mut rng = RandomStream::new(config.seed, stream_id(&[namespace::COLLECTION, c as u64]));
                match kind {
                    SyntheticKind::Uniform => synthetic_uniform(config.square_side, trace_len, &mut rng),
                    SyntheticKind::Walk => synthetic_walk(config.square_side, trace_len, config.walk_step, &mut rng),
                }
            })
            .collect()
    };
    match &config.input {
        InputSpec::Synthetic(kind) => Ok(synthetic(*kind)),
        InputSpec::Path(path) => {
            let loaded = match load_traces(path) {
                Ok(l) if !l.traces.is_empty() => l,
                Ok(_) => {
                    eprintln!("warning: no traces found in {}; using synthetic data", path.display());
                    return Ok(synthetic(SyntheticKind::Uniform));
                }
                Err(e) => {
                    eprintln!("warning: cannot read {}: {e}; using synthetic data", path.display());
                    return Ok(synthetic(SyntheticKind::Uniform));
                }
            };
            if loaded.skipped_lines > 0 {
                eprintln!("warning: skipped {} malformed trace lines", loaded.skipped_lines);
            }
            let mut traces: Vec<PointTuple> = loaded.traces.into_iter().map(|t| t.points).collect();
            // Partial Fisher–Yates choice of the collections.
            let take = config.collections.min(traces.len());
            let mut rng = RandomStream::new(config.seed, stream_id(&[namespace::SELECT]));
            for i in 0..take {
                let j = i + rng.index_below(traces.len() - i);
                traces.swap(i, j);
            }
            traces.truncate(take);
            Ok(traces)
        }
    }
}
