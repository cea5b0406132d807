//! Private convex hull: choose anchor points by private nearest-neighbour
//! searches from probes on a circle around the data, then release the
//! anchors with noise. The hull of the released anchors is post-processing.

use std::f64::consts::PI;

use super::{pnn, Audited, PnnParams};
use crate::accounting::BudgetLedger;
use crate::error::{ensure_positive, ensure_probability, invalid, Result};
use crate::geometry::{all_ids, center, max_radius, Point2, PointId, PointTuple};
use crate::noise::{sample_gaussian_vec, sample_laplace, sample_planar_laplace, RandomStream};

pub const DEFAULT_K_CLAMP: (usize, usize) = (16, 128);

/// How many probes (and so anchors) to use.
#[derive(Debug, Clone, Copy)]
pub enum AnchorCount {
    /// Balance the search error against the probe spacing using the
    /// released radius, then round and clamp.
    Auto,
    Fixed(usize),
    /// Custom unclamped rule `(radius, budget, n, beta) -> k`; the result is
    /// rounded and clamped like [`AnchorCount::Auto`].
    Rule(fn(f64, f64, usize, f64) -> f64),
}

#[derive(Debug, Clone, Copy)]
pub struct PchParams {
    pub rho: f64,
    pub beta: f64,
    pub k: AnchorCount,
    pub k_clamp: (usize, usize),
}

impl PchParams {
    pub fn new(rho: f64, beta: f64) -> Self {
        Self {
            rho,
            beta,
            k: AnchorCount::Auto,
            k_clamp: DEFAULT_K_CLAMP,
        }
    }

    pub fn with_k(self, k: AnchorCount) -> Self {
        Self { k, ..self }
    }

    fn validate(&self) -> Result<()> {
        ensure_positive("rho", self.rho)?;
        validate_shared(self.beta, self.k, self.k_clamp)
    }
}

/// Pure-GP counterpart of [`PchParams`].
#[derive(Debug, Clone, Copy)]
pub struct PchGpParams {
    pub eps: f64,
    pub beta: f64,
    pub k: AnchorCount,
    pub k_clamp: (usize, usize),
}

impl PchGpParams {
    pub fn new(eps: f64, beta: f64) -> Self {
        Self {
            eps,
            beta,
            k: AnchorCount::Auto,
            k_clamp: DEFAULT_K_CLAMP,
        }
    }

    pub fn with_k(self, k: AnchorCount) -> Self {
        Self { k, ..self }
    }

    fn validate(&self) -> Result<()> {
        ensure_positive("eps", self.eps)?;
        validate_shared(self.beta, self.k, self.k_clamp)
    }
}

fn validate_shared(beta: f64, k: AnchorCount, k_clamp: (usize, usize)) -> Result<()> {
    ensure_probability("beta", beta)?;
    if let AnchorCount::Fixed(k) = k {
        if k < 3 {
            return Err(invalid(format!("explicit anchor count must be at least 3, got {k}")));
        }
    }
    if k_clamp.0 < 1 || k_clamp.0 > k_clamp.1 {
        return Err(invalid(format!("invalid anchor clamp range {k_clamp:?}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PchOutcome {
    /// One anchor per probe, in probe order; repeats are kept.
    pub anchors: Vec<PointId>,
    pub k: usize,
    /// Released center.
    pub center: Point2,
    /// Released (inflated) radius.
    pub radius: f64,
    pub probes: Vec<Point2>,
}

impl PchOutcome {
    /// Anchors with repeats removed, in first-seen order.
    pub fn distinct_anchors(&self) -> Vec<PointId> {
        let mut seen = Vec::with_capacity(self.anchors.len());
        for &a in &self.anchors {
            if !seen.contains(&a) {
                seen.push(a);
            }
        }
        seen
    }
}

fn resolve_k(choice: AnchorCount, clamp: (usize, usize), auto: f64, rule_args: (f64, f64, usize, f64)) -> usize {
    let raw = match choice {
        AnchorCount::Fixed(k) => return k,
        AnchorCount::Auto => auto,
        AnchorCount::Rule(f) => f(rule_args.0, rule_args.1, rule_args.2, rule_args.3),
    };
    let (lo, hi) = (clamp.0 as f64, clamp.1 as f64);
    let raw = if raw.is_nan() { lo } else { raw };
    raw.clamp(lo, hi).round() as usize
}

fn probes(c: Point2, radius: f64, k: usize) -> Vec<Point2> {
    (0..k)
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / k as f64;
            [c[0] + radius * theta.cos(), c[1] + radius * theta.sin()]
        })
        .collect()
}

fn search_anchors(
    x: &PointTuple,
    probes: &[Point2],
    eps: f64,
    rng: &mut RandomStream,
    ledger: &mut BudgetLedger,
    amount: f64,
) -> Result<Vec<PointId>> {
    let everyone = all_ids(x.len());
    let mut anchors = Vec::with_capacity(probes.len());
    for (j, p) in probes.iter().enumerate() {
        let found = pnn(x, p, &everyone, eps, &PnnParams::default(), rng)?;
        found.ledger.audit_closed()?;
        ledger.charge(format!("anchor search {}", j + 1), amount);
        anchors.push(found.value.index);
    }
    Ok(anchors)
}

/// ρ-CGP anchor selection for a planar tuple.
///
/// A twentieth of the budget, `ρ0`, releases the bounding-box center
/// (`2ρ0/3`) and the radius around it (`ρ0/3`, inflated so that with
/// probability `1 − β/2` it covers every point). The rest is split evenly
/// over `k` nearest-neighbour searches from probes evenly spaced on the
/// released circle.
pub fn pch_anchors(x: &PointTuple, params: &PchParams, rng: &mut RandomStream) -> Result<Audited<PchOutcome>> {
    params.validate()?;
    x.require_planar()?;
    let (rho, beta) = (params.rho, params.beta);
    let n = x.len();
    let rho0 = rho / 20.0;
    let noise_sd = (3.0 / (2.0 * rho0)).sqrt();
    let mut ledger = BudgetLedger::cgp(rho);

    let c = center(x);
    let shift = sample_gaussian_vec(2, noise_sd, rng)?;
    let c_tilde = [c[0] + shift[0], c[1] + shift[1]];
    ledger.charge("center", 2.0 * rho0 / 3.0);

    let inflation = (3.0 * (2.0 / beta).ln() / rho0).sqrt();
    let r_tilde = max_radius(x, &c_tilde)? + inflation + noise_sd * rng.standard_normal();
    ledger.charge("radius", rho0 / 3.0);

    let auto = (r_tilde.max(0.0) * rho.sqrt() / (n as f64 / beta).ln()).powf(2.0 / 3.0);
    let k = resolve_k(params.k, params.k_clamp, auto, (r_tilde, rho, n, beta));
    let rho1 = (rho - rho0) / k as f64;
    let probes = probes(c_tilde, r_tilde, k);
    let anchors = search_anchors(x, &probes, (2.0 * rho1).sqrt(), rng, &mut ledger, rho1)?;

    Ok(Audited {
        value: PchOutcome {
            anchors,
            k,
            center: c_tilde,
            radius: r_tilde,
            probes,
        },
        ledger,
    })
}

/// ε-GP anchor selection under basic composition.
///
/// Mirrors [`pch_anchors`]: `ε0 = ε/20` releases the center with planar
/// Laplace noise (`2ε0/3`; the center is √2-Lipschitz) and the radius with
/// Laplace noise (`ε0/3`), inflated by the `β/2` Laplace quantile. Each of
/// the `k` searches gets `(ε − ε0)/k`. Auto-k is `√(R̃ ε / log(n/β))`.
pub fn pch_anchors_gp(x: &PointTuple, params: &PchGpParams, rng: &mut RandomStream) -> Result<Audited<PchOutcome>> {
    params.validate()?;
    x.require_planar()?;
    let (eps, beta) = (params.eps, params.beta);
    let n = x.len();
    let eps0 = eps / 20.0;
    let mut ledger = BudgetLedger::gp(eps);

    let c = center(x);
    let center_eps = 2.0 * eps0 / 3.0;
    let shift = sample_planar_laplace(2, center_eps / 2f64.sqrt(), rng)?;
    let c_tilde = [c[0] + shift[0], c[1] + shift[1]];
    ledger.charge("center", center_eps);

    let radius_scale = 3.0 / eps0;
    let inflation = radius_scale * (1.0 / beta).ln();
    let r_tilde = max_radius(x, &c_tilde)? + inflation + sample_laplace(radius_scale, rng)?;
    ledger.charge("radius", eps0 / 3.0);

    let auto = (r_tilde.max(0.0) * eps / (n as f64 / beta).ln()).sqrt();
    let k = resolve_k(params.k, params.k_clamp, auto, (r_tilde, eps, n, beta));
    let eps1 = (eps - eps0) / k as f64;
    let probes = probes(c_tilde, r_tilde, k);
    let anchors = search_anchors(x, &probes, eps1, rng, &mut ledger, eps1)?;

    Ok(Audited {
        value: PchOutcome {
            anchors,
            k,
            center: c_tilde,
            radius: r_tilde,
            probes,
        },
        ledger,
    })
}

/// Anchor selection plus the noisy anchor locations. Take the convex hull of
/// `points` to obtain the private hull.
#[derive(Debug, Clone, PartialEq)]
pub struct HullRelease {
    pub selection: PchOutcome,
    /// One released point per anchor, in anchor order.
    pub points: Vec<Point2>,
}

/// ρ-CGP convex hull: [`pch_anchors`] at `(ρ/2, β/2)`, then every anchor
/// released with Gaussian noise of standard deviation `√(k/ρ)` per
/// coordinate.
pub fn private_convex_hull(
    x: &PointTuple,
    rho: f64,
    beta: f64,
    rng: &mut RandomStream,
) -> Result<Audited<HullRelease>> {
    private_convex_hull_with(x, &PchParams::new(rho, beta), rng)
}

/// [`private_convex_hull`] with explicit anchor-count settings; `params`
/// carries the total budget and failure probability.
pub fn private_convex_hull_with(
    x: &PointTuple,
    params: &PchParams,
    rng: &mut RandomStream,
) -> Result<Audited<HullRelease>> {
    params.validate()?;
    let rho = params.rho;
    let half = PchParams {
        rho: rho / 2.0,
        beta: params.beta / 2.0,
        ..*params
    };
    let selection = pch_anchors(x, &half, rng)?;
    selection.ledger.audit_closed()?;
    let mut ledger = BudgetLedger::cgp(rho);
    ledger.charge("anchor selection", rho / 2.0);

    let sel = selection.value;
    let per_anchor = rho / 2.0 / sel.k as f64;
    let sd = (sel.k as f64 / rho).sqrt();
    let mut points = Vec::with_capacity(sel.k);
    for (j, &a) in sel.anchors.iter().enumerate() {
        let p = x.point2(a);
        let noise = sample_gaussian_vec(2, sd, rng)?;
        points.push([p[0] + noise[0], p[1] + noise[1]]);
        ledger.charge(format!("anchor release {}", j + 1), per_anchor);
    }
    Ok(Audited {
        value: HullRelease { selection: sel, points },
        ledger,
    })
}

/// ε-GP convex hull: [`pch_anchors_gp`] at `(ε/2, β/2)`, then every anchor
/// released with planar Laplace noise at rate `(ε/2)/k`.
pub fn private_convex_hull_gp(
    x: &PointTuple,
    eps: f64,
    beta: f64,
    rng: &mut RandomStream,
) -> Result<Audited<HullRelease>> {
    private_convex_hull_gp_with(x, &PchGpParams::new(eps, beta), rng)
}

pub fn private_convex_hull_gp_with(
    x: &PointTuple,
    params: &PchGpParams,
    rng: &mut RandomStream,
) -> Result<Audited<HullRelease>> {
    params.validate()?;
    let eps = params.eps;
    let half = PchGpParams {
        eps: eps / 2.0,
        beta: params.beta / 2.0,
        ..*params
    };
    let selection = pch_anchors_gp(x, &half, rng)?;
    selection.ledger.audit_closed()?;
    let mut ledger = BudgetLedger::gp(eps);
    ledger.charge("anchor selection", eps / 2.0);

    let sel = selection.value;
    let per_anchor = eps / 2.0 / sel.k as f64;
    let mut points = Vec::with_capacity(sel.k);
    for (j, &a) in sel.anchors.iter().enumerate() {
        let p = x.point2(a);
        let noise = sample_planar_laplace(2, per_anchor, rng)?;
        points.push([p[0] + noise[0], p[1] + noise[1]]);
        ledger.charge(format!("anchor release {}", j + 1), per_anchor);
    }
    Ok(Audited {
        value: HullRelease { selection: sel, points },
        ledger,
    })
}
