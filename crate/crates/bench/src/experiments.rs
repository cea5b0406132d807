//! Grid expansion and trial execution for each task.

use rayon::prelude::*;

use geopriv::dataset::{query_point_pool, sample_points};
use geopriv::geometry::euclidean;
use geopriv::mechanisms::{
    identity_cgp_inf, identity_gp_inf, kpnn, kpnn_gp, private_convex_hull, private_convex_hull_gp,
};
use geopriv::polygon::{convex_hull, jaccard};
use geopriv::statcheck::{run_battery, BatteryConfig};
use geopriv::{Point2, PointId, PointTuple, RandomStream};

use crate::config::{ExperimentConfig, Task};
use crate::data::{collections, namespace, stream_id};
use crate::report::{sort_rows, summarize, ResultRow};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mechanism {
    GpBasic,
    CgpBasic,
    GpPnn,
    CgpPnn,
    GpPch,
    CgpPch,
}

impl Mechanism {
    pub fn label(self) -> &'static str {
        match self {
            Mechanism::GpBasic => "GP-Basic",
            Mechanism::CgpBasic => "CGP-Basic",
            Mechanism::GpPnn => "GP-PNN",
            Mechanism::CgpPnn => "CGP-PNN",
            Mechanism::GpPch => "GP-PCH",
            Mechanism::CgpPch => "CGP-PCH",
        }
    }
}

/// Raw per-trial values of one grid cell and metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSamples {
    pub task: Task,
    pub mechanism: Mechanism,
    pub n: usize,
    pub budget: f64,
    pub k: Option<usize>,
    pub metric: &'static str,
    pub values: Vec<f64>,
}

impl CellSamples {
    pub fn mean(&self) -> f64 {
        summarize(&self.values).0
    }

    pub fn median(&self) -> f64 {
        let mut sorted = self.values.clone();
        sorted.sort_by(f64::total_cmp);
        crate::report::percentile(&sorted, 0.5)
    }

    pub fn to_row(&self) -> ResultRow {
        let (mean, p25, p75) = summarize(&self.values);
        ResultRow {
            task: self.task.label().to_string(),
            mechanism: self.mechanism.label().to_string(),
            n: Some(self.n),
            budget: Some(self.budget),
            k: self.k,
            metric: self.metric.to_string(),
            mean,
            p25,
            p75,
            trials: self.values.len(),
        }
    }
}

struct RunInput {
    x: PointTuple,
    query: Option<Point2>,
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    collections: Vec<PointTuple>,
    pool: Option<Vec<Point2>>,
}

impl<'a> Context<'a> {
    fn new(config: &'a ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let max_n = *config.n_grid.iter().max().expect("validated non-empty");
        let collections = collections(config, max_n)?;
        let pool = if config.task == Task::Knn {
            Some(query_point_pool(&collections, 1.0, config.cell_membership)?)
        } else {
            None
        };
        Ok(Self {
            config,
            collections,
            pool,
        })
    }

    /// Sampled tuples (and query points) for every run at one `n`; shared by
    /// all budgets and mechanisms.
    fn inputs(&self, n_idx: usize, n: usize) -> Result<Vec<RunInput>> {
        let seed = self.config.seed;
        (0..self.config.runs())
            .into_par_iter()
            .map(|run| {
                let trace = &self.collections[run % self.collections.len()];
                let mut rng = RandomStream::new(seed, stream_id(&[namespace::SAMPLE, n_idx as u64, run as u64]));
                let x = sample_points(trace, n, &mut rng)?;
                let query = self.pool.as_ref().map(|pool| {
                    let mut rng = RandomStream::new(seed, stream_id(&[namespace::QUERY, n_idx as u64, run as u64]));
                    pool[rng.index_below(pool.len())]
                });
                Ok(RunInput { x, query })
            })
            .collect()
    }

    /// The noise stream of one trial. It does not depend on the budget, so
    /// different budgets see common random numbers.
    fn noise(&self, mechanism: Mechanism, n_idx: usize, k_idx: usize, run: usize) -> RandomStream {
        if self.config.zero_noise {
            RandomStream::zero_noise()
        } else {
            RandomStream::new(
                self.config.seed,
                stream_id(&[
                    namespace::MECHANISM,
                    mechanism as u64,
                    n_idx as u64,
                    k_idx as u64,
                    run as u64,
                ]),
            )
        }
    }
}

fn par_runs<const M: usize>(
    inputs: &[RunInput],
    f: impl Fn(usize, &RunInput) -> geopriv::Result<[f64; M]> + Sync,
) -> Result<Vec<[f64; M]>> {
    let out: geopriv::Result<Vec<[f64; M]>> = inputs
        .par_iter()
        .enumerate()
        .map(|(run, input)| f(run, input))
        .collect();
    Ok(out?)
}

fn split<const M: usize>(
    task: Task,
    mechanism: Mechanism,
    n: usize,
    budget: f64,
    k: Option<usize>,
    metrics: [&'static str; M],
    values: Vec<[f64; M]>,
) -> Vec<CellSamples> {
    metrics
        .iter()
        .enumerate()
        .map(|(m, &metric)| CellSamples {
            task,
            mechanism,
            n,
            budget,
            k,
            metric,
            values: values.iter().map(|v| v[m]).collect(),
        })
        .collect()
}

/// Identity release: maximum per-point error and ℓ₂ error of the whole
/// tuple for GP-Basic and CGP-Basic.
pub fn identity_samples(config: &ExperimentConfig) -> Result<Vec<CellSamples>> {
    let ctx = Context::new(config)?;
    let budgets = config.budgets()?;
    let mut cells = Vec::new();
    for (n_idx, &n) in config.n_grid.iter().enumerate() {
        let inputs = ctx.inputs(n_idx, n)?;
        for b in &budgets {
            for mech in [Mechanism::GpBasic, Mechanism::CgpBasic] {
                let values = par_runs(&inputs, |run, input| {
                    let mut rng = ctx.noise(mech, n_idx, 0, run);
                    let y = match mech {
                        Mechanism::GpBasic => identity_gp_inf(&input.x, b.eps, &mut rng)?,
                        _ => identity_cgp_inf(&input.x, b.rho, &mut rng)?,
                    }
                    .value;
                    Ok([
                        geopriv::geometry::dist_inf(&y, &input.x)?,
                        geopriv::geometry::dist_2(&y, &input.x)?,
                    ])
                })?;
                cells.extend(split(
                    Task::Identity,
                    mech,
                    n,
                    b.value,
                    None,
                    ["max_error", "l2_error"],
                    values,
                ));
            }
        }
    }
    Ok(cells)
}

/// Indices of the `k` points of `x` nearest to `q`, ties to the lower id.
fn nearest(x: &PointTuple, q: &[f64], k: usize) -> Vec<PointId> {
    let mut order: Vec<(f64, usize)> = x.iter().enumerate().map(|(i, p)| (euclidean(p, q), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order[..k].iter().map(|&(_, i)| PointId::from_zero_based(i)).collect()
}

fn distance_sum(x: &PointTuple, q: &[f64], ids: &[PointId]) -> f64 {
    ids.iter().map(|&id| euclidean(x.point(id), q)).sum()
}

/// Private kNN: the sum of distances of the returned neighbours normalised
/// by the true kNN sum, and the mean excess distance per neighbour.
pub fn knn_samples(config: &ExperimentConfig) -> Result<Vec<CellSamples>> {
    let ctx = Context::new(config)?;
    let budgets = config.budgets()?;
    let mut cells = Vec::new();
    for (n_idx, &n) in config.n_grid.iter().enumerate() {
        let inputs = ctx.inputs(n_idx, n)?;
        for (k_idx, &k) in config.k_grid.iter().enumerate() {
            if inputs.iter().any(|i| k > i.x.len()) {
                eprintln!("warning: skipping k={k} for n={n}: not enough points");
                continue;
            }
            for b in &budgets {
                for mech in [
                    Mechanism::GpBasic,
                    Mechanism::CgpBasic,
                    Mechanism::GpPnn,
                    Mechanism::CgpPnn,
                ] {
                    let values = par_runs(&inputs, |run, input| {
                        let (x, q) = (&input.x, input.query.expect("knn inputs carry a query"));
                        let mut rng = ctx.noise(mech, n_idx, k_idx, run);
                        let truth = distance_sum(x, &q, &nearest(x, &q, k));
                        let got = match mech {
                            Mechanism::GpBasic | Mechanism::CgpBasic => {
                                let y = if mech == Mechanism::GpBasic {
                                    identity_gp_inf(x, b.eps, &mut rng)?
                                } else {
                                    identity_cgp_inf(x, b.rho, &mut rng)?
                                }
                                .value;
                                let ids = nearest(&y, &q, k);
                                distance_sum(if config.baseline_true_distances { x } else { &y }, &q, &ids)
                            }
                            Mechanism::GpPnn => distance_sum(x, &q, &kpnn_gp(x, &q, k, b.eps, &mut rng)?.value),
                            _ => distance_sum(x, &q, &kpnn(x, &q, k, b.rho, &mut rng)?.value),
                        };
                        let normalized = if truth > 0.0 {
                            got / truth
                        } else if got == 0.0 {
                            1.0
                        } else {
                            f64::INFINITY
                        };
                        Ok([normalized, (got - truth) / k as f64])
                    })?;
                    cells.extend(split(
                        Task::Knn,
                        mech,
                        n,
                        b.value,
                        Some(k),
                        ["normalized_distance", "excess_distance"],
                        values,
                    ));
                }
            }
        }
    }
    Ok(cells)
}

/// Private convex hull: Jaccard similarity between the hull of the released
/// points and the true hull.
pub fn hull_samples(config: &ExperimentConfig) -> Result<Vec<CellSamples>> {
    let ctx = Context::new(config)?;
    let budgets = config.budgets()?;
    let mut cells = Vec::new();
    for (n_idx, &n) in config.n_grid.iter().enumerate() {
        let inputs = ctx.inputs(n_idx, n)?;
        let true_hulls: Vec<_> = inputs
            .iter()
            .map(|i| convex_hull(&i.x.to_points2()?))
            .collect::<geopriv::Result<_>>()?;
        for b in &budgets {
            for mech in [
                Mechanism::GpBasic,
                Mechanism::CgpBasic,
                Mechanism::GpPch,
                Mechanism::CgpPch,
            ] {
                let values = par_runs(&inputs, |run, input| {
                    let x = &input.x;
                    let mut rng = ctx.noise(mech, n_idx, 0, run);
                    let released = match mech {
                        Mechanism::GpBasic => identity_gp_inf(x, b.eps, &mut rng)?.value.to_points2()?,
                        Mechanism::CgpBasic => identity_cgp_inf(x, b.rho, &mut rng)?.value.to_points2()?,
                        Mechanism::GpPch => private_convex_hull_gp(x, b.eps, config.beta, &mut rng)?.value.points,
                        _ => private_convex_hull(x, b.rho, config.beta, &mut rng)?.value.points,
                    };
                    Ok([jaccard(&convex_hull(&released)?, &true_hulls[run])])
                })?;
                cells.extend(split(Task::Hull, mech, n, b.value, None, ["jaccard"], values));
            }
        }
    }
    Ok(cells)
}

fn rows(cells: &[CellSamples]) -> Vec<ResultRow> {
    let mut rows: Vec<ResultRow> = cells.iter().map(CellSamples::to_row).collect();
    sort_rows(&mut rows);
    rows
}

pub fn run_identity(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(rows(&identity_samples(config)?))
}

pub fn run_knn(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(rows(&knn_samples(config)?))
}

pub fn run_hull(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(rows(&hull_samples(config)?))
}

/// The statistical verification battery: three rows per check (statistic,
/// threshold, and `passed` as 1 or 0).
pub fn run_verify(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let reports = run_battery(&BatteryConfig {
        seed: config.seed,
        samples: config.verify_samples,
        mean_samples: config.verify_mean_samples,
        tamper: config.tamper,
    })?;
    let mut out = Vec::with_capacity(3 * reports.len());
    for r in &reports {
        for (metric, value) in [
            ("statistic", r.statistic),
            ("threshold", r.threshold),
            ("passed", if r.passed { 1.0 } else { 0.0 }),
        ] {
            out.push(ResultRow {
                task: Task::Verify.label().to_string(),
                mechanism: r.name.replace(',', ";"),
                n: Some(r.samples),
                budget: None,
                k: None,
                metric: metric.to_string(),
                mean: value,
                p25: value,
                p75: value,
                trials: 1,
            });
        }
    }
    sort_rows(&mut out);
    Ok(out)
}

/// Every row of a verify run reports a pass.
pub fn all_checks_passed(rows: &[ResultRow]) -> bool {
    rows.iter().filter(|r| r.metric == "passed").all(|r| r.mean == 1.0)
}

pub fn run(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    match config.task {
        Task::Identity => run_identity(config),
        Task::Knn => run_knn(config),
        Task::Hull => run_hull(config),
        Task::Verify => run_verify(config),
    }
}
