//! Seedable noise sources and the closed-form tail and quantile functions
//! that calibrate them.
//!
//! Every sampler draws from an explicitly passed [`RandomStream`]. A stream is
//! either a seeded ChaCha8 generator, addressed by `(seed, stream_id)` so that
//! parallel trials get independent sequences, or the zero-noise stream, which
//! makes every noise draw return the mean of its distribution. The zero-noise
//! stream turns each mechanism into its deterministic, non-private reference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{ensure_positive, ensure_probability, invalid, Result};

/// Deterministic source of randomness passed to every sampler.
#[derive(Debug, Clone)]
pub struct RandomStream {
    source: Source,
}

#[derive(Debug, Clone)]
enum Source {
    Seeded(Box<ChaCha8Rng>),
    ZeroNoise,
}

impl RandomStream {
    /// A ChaCha8 stream. Equal `(seed, stream_id)` pairs give identical
    /// sequences; distinct `stream_id`s under one seed give independent ones.
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            source: Source::Seeded(Box::new(rng)),
        }
    }

    /// The degenerate stream: noise draws return their distribution mean.
    pub fn zero_noise() -> Self {
        Self {
            source: Source::ZeroNoise,
        }
    }

    pub fn is_zero_noise(&self) -> bool {
        matches!(self.source, Source::ZeroNoise)
    }

    /// Uniform draw on the open interval (0, 1). The zero-noise stream
    /// returns 1/2.
    pub fn uniform_open(&mut self) -> f64 {
        match &mut self.source {
            Source::Seeded(rng) => loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    return u;
                }
            },
            Source::ZeroNoise => 0.5,
        }
    }

    /// Standard normal draw; 0 on the zero-noise stream.
    pub fn standard_normal(&mut self) -> f64 {
        match &mut self.source {
            Source::Seeded(rng) => rng.sample(StandardNormal),
            Source::ZeroNoise => 0.0,
        }
    }

    /// Uniform index in `0..n`; the zero-noise stream always returns 0.
    ///
    /// Panics if `n == 0`.
    pub fn index_below(&mut self, n: usize) -> usize {
        assert!(n > 0, "index_below requires a non-empty range");
        match &mut self.source {
            Source::Seeded(rng) => rng.random_range(0..n),
            Source::ZeroNoise => 0,
        }
    }
}

/// Parameters of the generalized gamma distribution with density
/// `(p / λ^k / Γ(k/p)) r^(k-1) exp(-(r/λ)^p)` on `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenGammaParams {
    lambda: f64,
    k: f64,
    p: f64,
}

impl GenGammaParams {
    pub fn new(lambda: f64, k: f64, p: f64) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        ensure_positive("k", k)?;
        ensure_positive("p", p)?;
        Ok(Self { lambda, k, p })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `λ Γ((k+1)/p) / Γ(k/p)`.
    pub fn mean(&self) -> f64 {
        self.lambda * (ln_gamma((self.k + 1.0) / self.p) - ln_gamma(self.k / self.p)).exp()
    }

    /// `Pr[G ≤ r] = γ(k/p, (r/λ)^p) / Γ(k/p)`.
    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        gamma_lr(self.k / self.p, (r / self.lambda).powf(self.p))
    }
}

/// One draw from Laplace(0, b).
pub fn sample_laplace(b: f64, rng: &mut RandomStream) -> Result<f64> {
    ensure_positive("laplace scale", b)?;
    Ok(b * unit_laplace(rng))
}

// Inverse CDF on an open-interval uniform; u = 1/2 maps to exactly 0.
fn unit_laplace(rng: &mut RandomStream) -> f64 {
    let centered = rng.uniform_open() - 0.5;
    if centered == 0.0 {
        return 0.0;
    }
    -centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
}

/// `d` independent draws from Normal(0, sigma²).
pub fn sample_gaussian_vec(d: usize, sigma: f64, rng: &mut RandomStream) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    ensure_positive("gaussian sigma", sigma)?;
    Ok((0..d).map(|_| sigma * rng.standard_normal()).collect())
}

/// Gamma(shape, 1) by Marsaglia and Tsang's squeeze/rejection method. Shapes
/// below one are boosted through `Gamma(shape + 1) · U^(1/shape)`.
fn sample_standard_gamma(shape: f64, rng: &mut RandomStream) -> f64 {
    if shape < 1.0 {
        let boosted = sample_standard_gamma(shape + 1.0, rng);
        return boosted * rng.uniform_open().powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform_open();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// One draw from the generalized gamma distribution, as `λ · Γ(k/p, 1)^(1/p)`.
/// The zero-noise stream returns the distribution mean.
pub fn sample_gen_gamma(params: GenGammaParams, rng: &mut RandomStream) -> f64 {
    if rng.is_zero_noise() {
        return params.mean();
    }
    let g = sample_standard_gamma(params.k / params.p, rng);
    params.lambda * g.powf(1.0 / params.p)
}

/// A uniformly random direction on the unit sphere in `d` dimensions.
fn sample_direction(d: usize, rng: &mut RandomStream) -> Vec<f64> {
    loop {
        let z: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            return z.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// One draw from the `d`-dimensional planar Laplacian with density
/// proportional to `exp(-eps ‖y‖)`: a GenGamma(1/eps, d, 1) radius along a
/// uniform direction. Zero vector on the zero-noise stream.
pub fn sample_planar_laplace(d: usize, eps: f64, rng: &mut RandomStream) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    ensure_positive("planar laplace rate", eps)?;
    if rng.is_zero_noise() {
        return Ok(vec![0.0; d]);
    }
    let radius = sample_gen_gamma(GenGammaParams::new(1.0 / eps, d as f64, 1.0)?, rng);
    let mut dir = sample_direction(d, rng);
    for v in &mut dir {
        *v *= radius;
    }
    Ok(dir)
}

/// Survival of the 2-D planar Laplace radius: `Pr[R > r] = (1 + rε) e^(-rε)`.
pub fn gp_radial_survival(r: f64, eps: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    let t = r * eps;
    (1.0 + t) * (-t).exp()
}

/// Survival of the 2-D Gaussian-mechanism radius at rate rho:
/// `Pr[R > r] = e^(-ρ r²)`.
pub fn cgp_radial_survival(r: f64, rho: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    (-rho * r * r).exp()
}

/// Radius `r` with `Pr[R > r] ≤ beta` for the 2-D planar Laplace at rate
/// `eps`, from the Lambert-W lower bound: `(√(2 log 1/β) + log 1/β) / ε`.
pub fn gp_radius_quantile(beta: f64, eps: f64) -> Result<f64> {
    ensure_probability("beta", beta)?;
    ensure_positive("eps", eps)?;
    let u = (1.0 / beta).ln();
    Ok(((2.0 * u).sqrt() + u) / eps)
}

/// Exact solution of `(1 + rε) e^(-rε) = β` via the lower Lambert-W branch.
pub fn gp_radius_exact(beta: f64, eps: f64) -> Result<f64> {
    ensure_probability("beta", beta)?;
    ensure_positive("eps", eps)?;
    let w = lambert_w_m1(-beta / std::f64::consts::E)?;
    Ok((-1.0 - w) / eps)
}

/// `√(log(1/β) / ρ)`, the exact quantile of the 2-D Gaussian-mechanism radius.
pub fn cgp_radius_quantile(beta: f64, rho: f64) -> Result<f64> {
    ensure_probability("beta", beta)?;
    ensure_positive("rho", rho)?;
    Ok(((1.0 / beta).ln() / rho).sqrt())
}

/// Density of the sum of two independent Laplace(0, b) variables:
/// `(b + |y|) e^(-|y|/b) / (4b²)`.
pub fn laplace_sum_pdf(y: f64, b: f64) -> Result<f64> {
    ensure_positive("laplace scale", b)?;
    let a = y.abs();
    Ok((b + a) * (-a / b).exp() / (4.0 * b * b))
}

/// Bound `b(√(2 log 1/β) + log 1/β)` exceeded by `|Z + W|` with probability at
/// most `beta`.
pub fn laplace_sum_quantile(beta: f64, b: f64) -> Result<f64> {
    ensure_probability("beta", beta)?;
    ensure_positive("laplace scale", b)?;
    let u = (1.0 / beta).ln();
    Ok(b * ((2.0 * u).sqrt() + u))
}

/// Lower branch `W₋₁` of the Lambert W function, defined on `[-1/e, 0)`.
pub fn lambert_w_m1(z: f64) -> Result<f64> {
    let branch_point = -(-1.0f64).exp();
    if !(z >= branch_point && z < 0.0) {
        return Err(invalid(format!("lambert W-1 is defined on [-1/e, 0), got {z}")));
    }
    if z == branch_point {
        return Ok(-1.0);
    }
    // Branch-point series near -1/e, asymptotic expansion elsewhere.
    let mut w = if z < -0.25 {
        let p = -(2.0 * (1.0 + std::f64::consts::E * z)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l1 = (-z).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    // Halley iterations.
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-15 * w.abs() {
            break;
        }
    }
    Ok(w)
}
