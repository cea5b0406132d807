//! Monte Carlo and quadrature checks of the distributional facts the
//! mechanisms rely on.
//!
//! Every check returns a [`CheckReport`] whose statistic is normalised so
//! that it passes iff `statistic <= threshold`. Monte Carlo thresholds come
//! from binomial bands or Kolmogorov–Smirnov critical values, not tuning.

mod quadrature;

pub use quadrature::integrate;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{ensure_positive, ensure_probability, invalid, Result};
use crate::noise::{
    cgp_radial_survival, gp_radial_survival, laplace_sum_pdf, laplace_sum_quantile, sample_gaussian_vec,
    sample_laplace, sample_planar_laplace, GenGammaParams, RandomStream,
};

/// Kolmogorov–Smirnov critical value coefficient at significance 0.001.
const KS_COEFF: f64 = 1.95;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
    pub samples: usize,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, samples: usize) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            passed: statistic <= threshold,
            samples,
        }
    }
}

fn ensure_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        Err(invalid("samples must be at least 1"))
    } else {
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest deviation of the empirical survival of `radii` from `survival`,
/// in units of the band `4·√(p(1−p)/N) + 0.002`.
fn survival_statistic(radii: &mut [f64], r_grid: &[f64], survival: impl Fn(f64) -> f64) -> f64 {
    radii.sort_by(f64::total_cmp);
    let n = radii.len() as f64;
    r_grid
        .iter()
        .map(|&r| {
            let above = radii.len() - radii.partition_point(|&x| x <= r);
            let empirical = above as f64 / n;
            let p = survival(r);
            let band = 4.0 * (p * (1.0 - p) / n).sqrt() + 0.002;
            (empirical - p).abs() / band
        })
        .fold(0.0, f64::max)
}

/// Radial survival of the planar Laplace mechanism against
/// `(1 + rε) e^{−rε}`.
pub fn check_gp_radial_tail(eps: f64, r_grid: &[f64], samples: usize, rng: &mut RandomStream) -> Result<CheckReport> {
    check_gp_radial_tail_against(eps, r_grid, samples, rng, gp_radial_survival)
}

/// [`check_gp_radial_tail`] against an arbitrary survival formula.
pub fn check_gp_radial_tail_against(
    eps: f64,
    r_grid: &[f64],
    samples: usize,
    rng: &mut RandomStream,
    survival: fn(f64, f64) -> f64,
) -> Result<CheckReport> {
    ensure_positive("eps", eps)?;
    ensure_samples(samples)?;
    let mut radii = Vec::with_capacity(samples);
    for _ in 0..samples {
        radii.push(norm(&sample_planar_laplace(2, eps, rng)?));
    }
    let stat = survival_statistic(&mut radii, r_grid, |r| survival(r, eps));
    Ok(CheckReport::new(
        format!("gp_radial_tail eps={eps}"),
        stat,
        1.0,
        samples,
    ))
}

/// Radial survival of the planar Gaussian mechanism (per-coordinate
/// variance `1/(2ρ)`) against `e^{−ρr²}`.
pub fn check_cgp_radial_tail(rho: f64, r_grid: &[f64], samples: usize, rng: &mut RandomStream) -> Result<CheckReport> {
    check_cgp_radial_tail_against(rho, r_grid, samples, rng, cgp_radial_survival)
}

pub fn check_cgp_radial_tail_against(
    rho: f64,
    r_grid: &[f64],
    samples: usize,
    rng: &mut RandomStream,
    survival: fn(f64, f64) -> f64,
) -> Result<CheckReport> {
    ensure_positive("rho", rho)?;
    ensure_samples(samples)?;
    let sigma = (1.0 / (2.0 * rho)).sqrt();
    let mut radii = Vec::with_capacity(samples);
    for _ in 0..samples {
        radii.push(norm(&sample_gaussian_vec(2, sigma, rng)?));
    }
    let stat = survival_statistic(&mut radii, r_grid, |r| survival(r, rho));
    Ok(CheckReport::new(
        format!("cgp_radial_tail rho={rho}"),
        stat,
        1.0,
        samples,
    ))
}

/// Mean number of `V ~ Lap(2b)` draws until `V ≤ Y` with `Y = Z + W`,
/// `Z, W ~ Lap(b)`. Passes if the mean is at most `4 + 3·s/√N`.
pub fn check_expected_draws(b: f64, samples: usize, rng: &mut RandomStream) -> Result<CheckReport> {
    check_expected_draws_with(b, samples, None, rng)
}

/// [`check_expected_draws`] with `Y` optionally pinned to a constant.
pub fn check_expected_draws_with(
    b: f64,
    samples: usize,
    fixed_y: Option<f64>,
    rng: &mut RandomStream,
) -> Result<CheckReport> {
    ensure_positive("b", b)?;
    ensure_samples(samples)?;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let y = match fixed_y {
            Some(y) => y,
            None => sample_laplace(b, rng)? + sample_laplace(b, rng)?,
        };
        let mut draws = 1u64;
        while sample_laplace(2.0 * b, rng)? > y {
            draws += 1;
        }
        let d = draws as f64;
        sum += d;
        sum_sq += d * d;
    }
    let n = samples as f64;
    let mean = sum / n;
    let sd = ((sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0)).sqrt();
    let threshold = 4.0 + 3.0 * sd / n.sqrt();
    Ok(CheckReport::new(
        format!("expected_draws b={b}"),
        mean,
        threshold,
        samples,
    ))
}

/// `D_α(N(μ1, σ²) ‖ N(μ2, σ²))` by quadrature of
/// `(1/(α−1)) log ∫ p^α q^{1−α}`.
pub fn renyi_gaussian_quadrature(mu1: f64, mu2: f64, sigma: f64, alpha: f64) -> Result<f64> {
    ensure_positive("sigma", sigma)?;
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must exceed 1, got {alpha}")));
    }
    let log_density = |x: f64, mu: f64| {
        let z = (x - mu) / sigma;
        -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    };
    let integrand = |x: f64| (alpha * log_density(x, mu1) + (1.0 - alpha) * log_density(x, mu2)).exp();
    // The integrand is a scaled Gaussian centred here with standard
    // deviation sigma.
    let c = alpha * mu1 + (1.0 - alpha) * mu2;
    let peak = integrand(c) * sigma;
    let total = integrate(
        integrand,
        c - 12.0 * sigma,
        c + 12.0 * sigma,
        1e-10 * peak.max(f64::MIN_POSITIVE),
    );
    Ok(total.ln() / (alpha - 1.0))
}

/// Largest `|quadrature − α(μ1−μ2)²/(2σ²)|` over `alpha_grid`.
pub fn check_renyi_gaussian(mu1: f64, mu2: f64, sigma: f64, alpha_grid: &[f64]) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for &alpha in alpha_grid {
        let numeric = renyi_gaussian_quadrature(mu1, mu2, sigma, alpha)?;
        let closed = alpha * (mu1 - mu2).powi(2) / (2.0 * sigma * sigma);
        worst = worst.max((numeric - closed).abs());
    }
    Ok(CheckReport::new(
        format!("renyi_gaussian mu1={mu1} mu2={mu2} sigma={sigma}"),
        worst,
        1e-6,
        alpha_grid.len(),
    ))
}

/// The Gaussian mechanism at budget `ρ` on a 1-Lipschitz scalar meets the
/// CGP bound `α ρ d²` with equality; largest deviation over the grids.
pub fn check_gaussian_mech_divergence(rho: f64, dist_grid: &[f64], alpha_grid: &[f64]) -> Result<CheckReport> {
    ensure_positive("rho", rho)?;
    let sigma = (1.0 / (2.0 * rho)).sqrt();
    let mut worst = 0.0f64;
    for &d in dist_grid {
        for &alpha in alpha_grid {
            let numeric = renyi_gaussian_quadrature(0.0, d, sigma, alpha)?;
            worst = worst.max((numeric - alpha * rho * d * d).abs());
        }
    }
    Ok(CheckReport::new(
        format!("gaussian_mech_divergence rho={rho}"),
        worst,
        1e-6,
        dist_grid.len() * alpha_grid.len(),
    ))
}

/// Two-sample-free KS distance between `sorted` and the CDF obtained by
/// integrating `pdf` from `lower`, with integration split at each `kink`.
fn ks_against_pdf(sorted: &[f64], pdf: impl Fn(f64) -> f64, lower: f64, kinks: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut cdf = 0.0;
    let mut at = lower;
    let mut worst = 0.0f64;
    let advance = |to: f64, cdf: &mut f64, at: &mut f64| {
        if to <= *at {
            return;
        }
        let mut from = *at;
        for &k in kinks {
            if k > from && k < to {
                *cdf += integrate(&pdf, from, k, 1e-14);
                from = k;
            }
        }
        *cdf += integrate(&pdf, from, to, 1e-14);
        *at = to;
    };
    for (i, &y) in sorted.iter().enumerate() {
        advance(y, &mut cdf, &mut at);
        let below = i as f64 / n;
        let upto = (i + 1) as f64 / n;
        worst = worst.max((upto - cdf).abs()).max((cdf - below).abs());
    }
    worst
}

/// Kolmogorov–Smirnov distance between samples of `Z + W`
/// (`Z, W ~ Lap(b)`) and the CDF of `(b + |y|) e^{−|y|/b} / (4b²)`.
pub fn check_laplace_sum_pdf(b: f64, samples: usize, rng: &mut RandomStream) -> Result<CheckReport> {
    check_laplace_sum_pdf_against(b, samples, rng, |y, b| laplace_sum_pdf(y, b).unwrap_or(f64::NAN))
}

pub fn check_laplace_sum_pdf_against(
    b: f64,
    samples: usize,
    rng: &mut RandomStream,
    pdf: fn(f64, f64) -> f64,
) -> Result<CheckReport> {
    ensure_positive("b", b)?;
    ensure_samples(samples)?;
    let mut ys = Vec::with_capacity(samples);
    for _ in 0..samples {
        ys.push(sample_laplace(b, rng)? + sample_laplace(b, rng)?);
    }
    ys.sort_by(f64::total_cmp);
    let lower = ys[0].min(-60.0 * b);
    let stat = ks_against_pdf(&ys, |y| pdf(y, b), lower, &[0.0]);
    Ok(CheckReport::new(
        format!("laplace_sum_pdf b={b}"),
        stat,
        KS_COEFF / (samples as f64).sqrt(),
        samples,
    ))
}

/// The tail bound `b(√(2L) + L)`, `L = log(1/β)`, is conservative for
/// `|Z + W|`: the empirical exceedance may not rise above `β` by more than
/// four binomial standard errors.
pub fn check_laplace_sum_quantile(
    b: f64,
    betas: &[f64],
    samples: usize,
    rng: &mut RandomStream,
) -> Result<CheckReport> {
    ensure_positive("b", b)?;
    ensure_samples(samples)?;
    let mut ys = Vec::with_capacity(samples);
    for _ in 0..samples {
        ys.push((sample_laplace(b, rng)? + sample_laplace(b, rng)?).abs());
    }
    let n = samples as f64;
    let mut worst = f64::NEG_INFINITY;
    for &beta in betas {
        ensure_probability("beta", beta)?;
        let bound = laplace_sum_quantile(beta, b)?;
        let exceed = ys.iter().filter(|&&y| y > bound).count() as f64 / n;
        worst = worst.max((exceed - beta) / (4.0 * (beta * (1.0 - beta) / n).sqrt()));
    }
    Ok(CheckReport::new(
        format!("laplace_sum_quantile b={b}"),
        worst,
        1.0,
        samples,
    ))
}

/// Relative error of the mean planar-Laplace radius against `d/ε`; passes
/// within 1%.
pub fn check_planar_laplace_mean_radius(
    d: usize,
    eps: f64,
    samples: usize,
    rng: &mut RandomStream,
) -> Result<CheckReport> {
    ensure_positive("eps", eps)?;
    ensure_samples(samples)?;
    let mut total = 0.0;
    for _ in 0..samples {
        total += norm(&sample_planar_laplace(d, eps, rng)?);
    }
    let mean = total / samples as f64;
    let expected = d as f64 / eps;
    Ok(CheckReport::new(
        format!("planar_laplace_mean_radius d={d} eps={eps}"),
        (mean / expected - 1.0).abs(),
        0.01,
        samples,
    ))
}

/// KS distance between planar-Laplace radii and the generalized gamma CDF
/// with scale `1/ε`, shape `d`, power 1.
pub fn check_planar_laplace_radial_ks(
    d: usize,
    eps: f64,
    samples: usize,
    rng: &mut RandomStream,
) -> Result<CheckReport> {
    ensure_positive("eps", eps)?;
    ensure_samples(samples)?;
    let law = GenGammaParams::new(1.0 / eps, d as f64, 1.0)?;
    let mut radii = Vec::with_capacity(samples);
    for _ in 0..samples {
        radii.push(norm(&sample_planar_laplace(d, eps, rng)?));
    }
    radii.sort_by(f64::total_cmp);
    let n = samples as f64;
    let stat = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let f = law.cdf(r);
            ((i + 1) as f64 / n - f).abs().max((f - i as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    Ok(CheckReport::new(
        format!("planar_laplace_radial_ks d={d} eps={eps}"),
        stat,
        KS_COEFF / n.sqrt(),
        samples,
    ))
}

/// Chi-square statistic of planar-Laplace directions over `bins` equal
/// angular sectors against its 0.999 quantile.
pub fn check_planar_laplace_isotropy(
    eps: f64,
    bins: usize,
    samples: usize,
    rng: &mut RandomStream,
) -> Result<CheckReport> {
    ensure_positive("eps", eps)?;
    ensure_samples(samples)?;
    if bins < 2 {
        return Err(invalid("need at least two bins"));
    }
    let mut counts = vec![0usize; bins];
    let tau = 2.0 * std::f64::consts::PI;
    for _ in 0..samples {
        let v = sample_planar_laplace(2, eps, rng)?;
        let angle = v[1].atan2(v[0]).rem_euclid(tau);
        counts[((angle / tau * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expected = samples as f64 / bins as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let law = ChiSquared::new((bins - 1) as f64).map_err(|e| invalid(e.to_string()))?;
    Ok(CheckReport::new(
        format!("planar_laplace_isotropy bins={bins}"),
        chi2,
        law.inverse_cdf(0.999),
        samples,
    ))
}

/// A deliberately wrong closed form, for exercising failure reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tamper {
    /// Replace the GP radial survival with `e^{−rε}`.
    GpTail,
    /// Replace the CGP radial survival with `e^{−ρr²/2}`.
    CgpTail,
    /// Replace the Laplace-sum density with a single `Lap(2b)` density.
    LaplaceSumPdf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryConfig {
    pub seed: u64,
    /// Sample count of the tail and KS checks.
    pub samples: usize,
    /// Sample count of the draw-count and mean-radius checks.
    pub mean_samples: usize,
    pub tamper: Option<Tamper>,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 1_000_000,
            mean_samples: 100_000,
            tamper: None,
        }
    }
}

fn tampered_gp_tail(r: f64, eps: f64) -> f64 {
    (-r * eps).exp()
}

fn tampered_cgp_tail(r: f64, rho: f64) -> f64 {
    (-rho * r * r / 2.0).exp()
}

fn tampered_laplace_sum_pdf(y: f64, b: f64) -> f64 {
    (-y.abs() / (2.0 * b)).exp() / (4.0 * b)
}

/// The full verification battery. Each check draws from its own stream so
/// results do not depend on execution order.
pub fn run_battery(config: &BatteryConfig) -> Result<Vec<CheckReport>> {
    let mut stream_id = 0u64;
    let mut next = || {
        stream_id += 1;
        RandomStream::new(config.seed, stream_id)
    };
    let (n, m) = (config.samples, config.mean_samples);
    let mut out = Vec::new();

    let gp_tail: fn(f64, f64) -> f64 = match config.tamper {
        Some(Tamper::GpTail) => tampered_gp_tail,
        _ => gp_radial_survival,
    };
    for eps in [0.5, 1.0, 2.0] {
        out.push(check_gp_radial_tail_against(
            eps,
            &[0.0, 1.0, 3.0, 5.0],
            n,
            &mut next(),
            gp_tail,
        )?);
    }
    let cgp_tail: fn(f64, f64) -> f64 = match config.tamper {
        Some(Tamper::CgpTail) => tampered_cgp_tail,
        _ => cgp_radial_survival,
    };
    for rho in [0.25, 1.0, 4.0] {
        out.push(check_cgp_radial_tail_against(
            rho,
            &[0.0, 0.5, 1.0, 2.0],
            n,
            &mut next(),
            cgp_tail,
        )?);
    }
    let pdf: fn(f64, f64) -> f64 = match config.tamper {
        Some(Tamper::LaplaceSumPdf) => tampered_laplace_sum_pdf,
        _ => |y, b| laplace_sum_pdf(y, b).unwrap_or(f64::NAN),
    };
    out.push(check_laplace_sum_pdf_against(1.0, n, &mut next(), pdf)?);
    out.push(check_laplace_sum_quantile(1.0, &[0.1, 0.01], n, &mut next())?);
    for b in [0.5, 1.0, 2.0] {
        out.push(check_expected_draws(b, m, &mut next())?);
    }
    for d in [2, 3, 5] {
        out.push(check_planar_laplace_mean_radius(d, 1.0, m, &mut next())?);
        out.push(check_planar_laplace_radial_ks(d, 0.7, m, &mut next())?);
    }
    out.push(check_planar_laplace_isotropy(1.0, 36, m, &mut next())?);
    for mu2 in [0.5, 1.0, 2.0] {
        for sigma in [0.5, 1.0, 2.0] {
            out.push(check_renyi_gaussian(0.0, mu2, sigma, &[1.5, 2.0, 3.0])?);
        }
    }
    for rho in [0.1, 0.5, 2.0] {
        out.push(check_gaussian_mech_divergence(rho, &[0.0, 1.0, 2.0], &[1.5, 2.0, 3.0])?);
    }
    Ok(out)
}
