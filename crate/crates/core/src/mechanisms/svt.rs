use crate::error::{ensure_positive, invalid, Result};
use crate::geometry::PointTuple;
use crate::noise::{sample_laplace, RandomStream};

/// Result of one sparse-vector scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SvtOutcome {
    pub halted: bool,
    /// Number of queries evaluated.
    pub steps: usize,
    /// 1-based position of the accepted query, present iff `halted`.
    pub index: Option<usize>,
}

impl SvtOutcome {
    /// The released answer sequence: `false` (⊥) for every rejected query,
    /// then a single terminal `true` (⊤) if the scan halted.
    pub fn responses(&self) -> Vec<bool> {
        let mut out = vec![false; self.steps];
        if self.halted {
            if let Some(last) = out.last_mut() {
                *last = true;
            }
        }
        out
    }
}

/// Sparse vector technique with halting test `g_j(x) + V_j ≤ T + W`.
///
/// `queries(x, j)` evaluates the `j`-th (1-based) query; each must be
/// `lipschitz`-Lipschitz in `x`. The budget is split evenly:
/// `W ~ Lap(2K/ε)` once and `V_j ~ Lap(4K/ε)` per step. Reaching
/// `max_steps` without acceptance is reported as a non-halting outcome.
pub fn svt<F>(
    x: &PointTuple,
    eps: f64,
    threshold: f64,
    lipschitz: f64,
    mut queries: F,
    max_steps: usize,
    rng: &mut RandomStream,
) -> Result<SvtOutcome>
where
    F: FnMut(&PointTuple, usize) -> f64,
{
    ensure_positive("eps", eps)?;
    ensure_positive("lipschitz constant", lipschitz)?;
    if max_steps == 0 {
        return Err(invalid("max_steps must be at least 1"));
    }
    if !threshold.is_finite() {
        return Err(invalid(format!("threshold must be finite, got {threshold}")));
    }
    let (eps1, eps2) = (eps / 2.0, eps / 2.0);
    let noisy_threshold = threshold + sample_laplace(lipschitz / eps1, rng)?;
    let query_scale = 2.0 * lipschitz / eps2;
    for j in 1..=max_steps {
        let v = sample_laplace(query_scale, rng)?;
        if queries(x, j) + v <= noisy_threshold {
            return Ok(SvtOutcome {
                halted: true,
                steps: j,
                index: Some(j),
            });
        }
    }
    Ok(SvtOutcome {
        halted: false,
        steps: max_steps,
        index: None,
    })
}
