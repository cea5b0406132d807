//! Identity queries: release every point of the tuple with calibrated noise.
//!
//! The `_inf` variants are private under `dist_inf` (one point moves by up to
//! the distance bound) and split the budget over the `n` points; the `_l2`
//! variants treat the flattened tuple as one `dn`-dimensional point and are
//! private under `dist_2`.

use super::Audited;
use crate::accounting::BudgetLedger;
use crate::error::{ensure_positive, Result};
use crate::geometry::PointTuple;
use crate::noise::{sample_gaussian_vec, sample_planar_laplace, RandomStream};

/// Each point gets an independent `d`-dimensional planar-Laplace draw at rate
/// `ε/n`.
pub fn identity_gp_inf(x: &PointTuple, eps: f64, rng: &mut RandomStream) -> Result<Audited<PointTuple>> {
    ensure_positive("eps", eps)?;
    let n = x.len();
    let rate = eps / n as f64;
    let mut coords = Vec::with_capacity(x.flatten().len());
    for p in x.iter() {
        let noise = sample_planar_laplace(x.dim(), rate, rng)?;
        coords.extend(p.iter().zip(&noise).map(|(a, b)| a + b));
    }
    let mut ledger = BudgetLedger::gp(eps);
    ledger.charge(format!("{n} point releases at eps/n"), rate * n as f64);
    Ok(Audited {
        value: PointTuple::new(x.dim(), coords)?,
        ledger,
    })
}

/// Each coordinate gets Gaussian noise with standard deviation `√(n/(2ρ))`.
pub fn identity_cgp_inf(x: &PointTuple, rho: f64, rng: &mut RandomStream) -> Result<Audited<PointTuple>> {
    ensure_positive("rho", rho)?;
    let n = x.len();
    let sigma = (n as f64 / (2.0 * rho)).sqrt();
    let noise = sample_gaussian_vec(x.flatten().len(), sigma, rng)?;
    let mut ledger = BudgetLedger::cgp(rho);
    ledger.charge(format!("{n} point releases at rho/n"), rho / n as f64 * n as f64);
    Ok(Audited {
        value: x.shifted(&noise)?,
        ledger,
    })
}

/// One `dn`-dimensional planar-Laplace draw at rate `ε` added to the
/// flattened tuple.
pub fn identity_gp_l2(x: &PointTuple, eps: f64, rng: &mut RandomStream) -> Result<Audited<PointTuple>> {
    ensure_positive("eps", eps)?;
    let noise = sample_planar_laplace(x.flatten().len(), eps, rng)?;
    let mut ledger = BudgetLedger::gp(eps);
    ledger.charge("flattened tuple release", eps);
    Ok(Audited {
        value: x.shifted(&noise)?,
        ledger,
    })
}

/// Gaussian noise with standard deviation `1/√(2ρ)` on every coordinate.
pub fn identity_cgp_l2(x: &PointTuple, rho: f64, rng: &mut RandomStream) -> Result<Audited<PointTuple>> {
    ensure_positive("rho", rho)?;
    let noise = sample_gaussian_vec(x.flatten().len(), (1.0 / (2.0 * rho)).sqrt(), rng)?;
    let mut ledger = BudgetLedger::cgp(rho);
    ledger.charge("flattened tuple release", rho);
    Ok(Audited {
        value: x.shifted(&noise)?,
        ledger,
    })
}
