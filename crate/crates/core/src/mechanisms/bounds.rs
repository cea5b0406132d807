//! High-probability error bounds of the mechanisms, used to report and test
//! utility.

use crate::error::{ensure_positive, ensure_probability, invalid, Result};

fn ensure_count(name: &str, v: usize) -> Result<f64> {
    if v == 0 {
        Err(invalid(format!("{name} must be at least 1")))
    } else {
        Ok(v as f64)
    }
}

/// With probability `1 − β`, [`identity_gp_inf`](super::identity_gp_inf)
/// moves no point further than this.
pub fn identity_gp_inf_bound(n: usize, eps: f64, beta: f64) -> Result<f64> {
    let nf = ensure_count("n", n)?;
    ensure_positive("eps", eps)?;
    ensure_probability("beta", beta)?;
    let l = (nf / beta).ln();
    Ok(nf / eps * ((2.0 * l).sqrt() + l))
}

/// With probability `1 − β`, [`identity_cgp_inf`](super::identity_cgp_inf)
/// moves no point further than this.
pub fn identity_cgp_inf_bound(n: usize, rho: f64, beta: f64) -> Result<f64> {
    let nf = ensure_count("n", n)?;
    ensure_positive("rho", rho)?;
    ensure_probability("beta", beta)?;
    Ok((nf * (nf / beta).ln() / rho).sqrt())
}

/// Excess distance `γ` of [`pnn`](super::pnn) with `γ0 = 0` over `m`
/// candidates: with probability `1 − β` the returned point is within
/// `min_i ‖x_i − p‖ + γ`.
///
/// Uses the failure split `β1 = β3 = β/(4m+2)`, `β2 = 4mβ/(4m+2)` and
/// `γ = (3/ε)(√(2 log 1/β1) + log 1/β1) + (6/ε) log(4m/(β2 β3))`.
pub fn pnn_gamma(m: usize, eps: f64, beta: f64) -> Result<f64> {
    let mf = ensure_count("m", m)?;
    ensure_positive("eps", eps)?;
    ensure_probability("beta", beta)?;
    let beta1 = beta / (4.0 * mf + 2.0);
    let beta3 = beta1;
    let beta2 = 4.0 * mf * beta / (4.0 * mf + 2.0);
    let l1 = (1.0 / beta1).ln();
    Ok(3.0 / eps * ((2.0 * l1).sqrt() + l1) + 6.0 / eps * (4.0 * mf / (beta2 * beta3)).ln())
}

/// Per-rank excess distance of [`kpnn`](super::kpnn):
/// `(15√k/√(2ρ)) L + (3√k/√ρ) √L` with `L = log((4n+2)/β)`.
pub fn kpnn_gamma(n: usize, k: usize, rho: f64, beta: f64) -> Result<f64> {
    let nf = ensure_count("n", n)?;
    let kf = ensure_count("k", k)?;
    ensure_positive("rho", rho)?;
    ensure_probability("beta", beta)?;
    let l = ((4.0 * nf + 2.0) / beta).ln();
    Ok(15.0 * kf.sqrt() / (2.0 * rho).sqrt() * l + 3.0 * kf.sqrt() / rho.sqrt() * l.sqrt())
}

/// Per-rank excess distance of [`kpnn_gp`](super::kpnn_gp): the
/// [`kpnn_gamma`] form with every round at rate `ε/k`,
/// `(15k/ε) L + (3k/ε) √(2L)`.
pub fn kpnn_gp_gamma(n: usize, k: usize, eps: f64, beta: f64) -> Result<f64> {
    let nf = ensure_count("n", n)?;
    let kf = ensure_count("k", k)?;
    ensure_positive("eps", eps)?;
    ensure_probability("beta", beta)?;
    let l = ((4.0 * nf + 2.0) / beta).ln();
    Ok(15.0 * kf / eps * l + 3.0 * kf / eps * (2.0 * l).sqrt())
}

/// The three terms of the hull sandwich radius for
/// [`private_convex_hull`](super::private_convex_hull) run at total budget
/// `ρ` and failure probability `β`, with `k` anchors and released radius
/// `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullGamma {
    /// Nearest-neighbour error of the anchor searches.
    pub search: f64,
    /// Angular spacing of the probe circle, `2πR̃/k`.
    pub spacing: f64,
    /// Release noise of the anchors.
    pub release: f64,
}

impl HullGamma {
    pub fn total(&self) -> f64 {
        self.search + self.spacing + self.release
    }
}

/// With probability `1 − β`, `CONV(x) ⊆ CONV(x̃_A) + B_γ` for
/// `γ = hull_gamma(..).total()`.
///
/// The anchor search runs at `ρ/2`, of which `ρ/40` goes to the center and
/// radius, leaving `ρ1 = (19ρ/40)/k` per search.
pub fn hull_gamma(n: usize, k: usize, rho: f64, beta: f64, radius: f64) -> Result<HullGamma> {
    let nf = ensure_count("n", n)?;
    let kf = ensure_count("k", k)?;
    ensure_positive("rho", rho)?;
    ensure_probability("beta", beta)?;
    if !(radius.is_finite()) {
        return Err(invalid(format!("radius must be finite, got {radius}")));
    }
    let search_rho = rho / 2.0;
    let rho1 = (search_rho - search_rho / 20.0) / kf;
    let l = (4.0 * (4.0 * nf + 2.0) * kf / beta).ln();
    Ok(HullGamma {
        search: (15.0 * l + 3.0 * (2.0 * l).sqrt()) / rho1.sqrt(),
        spacing: 2.0 * std::f64::consts::PI * radius.max(0.0) / kf,
        release: (2.0 * kf * (2.0 * kf / beta).ln() / rho).sqrt(),
    })
}
