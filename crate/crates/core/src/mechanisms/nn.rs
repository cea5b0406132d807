//! Private nearest neighbours: a noisy threshold at the true minimum
//! distance followed by a cyclic sparse-vector scan of the candidates.

use super::{svt, Audited};
use crate::accounting::BudgetLedger;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::geometry::{all_ids, euclidean, min_dist, PointId, PointTuple};
use crate::noise::{sample_laplace, RandomStream};

/// Tuning knobs of [`pnn`]; the rate is passed separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnnParams {
    /// Added to the noisy threshold. Larger values trade accuracy for
    /// fewer scan steps; negative values are allowed.
    pub gamma0: f64,
    /// The scan gives up after `max_cycles` passes over the candidates.
    /// With `γ0 = 0` the chance of reaching the default cap of 4096 is
    /// about 1e-6 per call.
    pub max_cycles: usize,
}

impl Default for PnnParams {
    fn default() -> Self {
        Self {
            gamma0: 0.0,
            max_cycles: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PnnOutcome {
    pub index: PointId,
    /// Sparse-vector steps taken before acceptance.
    pub steps: usize,
}

/// ε-GP nearest neighbour of `p` among `subset`.
///
/// A third of the budget perturbs the threshold `min_i ‖x_i − p‖`; the
/// rest drives a sparse-vector scan that cycles through `subset` in order
/// and accepts the first candidate whose noisy distance falls below it.
pub fn pnn(
    x: &PointTuple,
    p: &[f64],
    subset: &[PointId],
    eps: f64,
    params: &PnnParams,
    rng: &mut RandomStream,
) -> Result<Audited<PnnOutcome>> {
    ensure_positive("eps", eps)?;
    if params.max_cycles == 0 {
        return Err(invalid("max_cycles must be at least 1"));
    }
    if !params.gamma0.is_finite() {
        return Err(invalid(format!("gamma0 must be finite, got {}", params.gamma0)));
    }
    let (_, h) = min_dist(x, p, subset)?;
    let mut ledger = BudgetLedger::gp(eps);
    ledger.charge("threshold noise", eps / 3.0);
    ledger.charge("sparse vector scan", 2.0 * eps / 3.0);

    let m = subset.len();
    if m == 1 {
        // The output cannot depend on x.
        return Ok(Audited {
            value: PnnOutcome {
                index: subset[0],
                steps: 0,
            },
            ledger,
        });
    }

    let threshold = h + sample_laplace(3.0 / eps, rng)? + params.gamma0;
    let cycled = |l: usize| subset[(l - 1) % m];
    let out = svt(
        x,
        2.0 * eps / 3.0,
        threshold,
        1.0,
        |x, l| euclidean(x.point(cycled(l)), p),
        params.max_cycles * m,
        rng,
    )?;
    match out.index {
        Some(l) => Ok(Audited {
            value: PnnOutcome {
                index: cycled(l),
                steps: out.steps,
            },
            ledger,
        }),
        None => Err(Error::NonHalt { steps: out.steps }),
    }
}

fn sequential_pnn(
    x: &PointTuple,
    p: &[f64],
    k: usize,
    round_eps: f64,
    rng: &mut RandomStream,
    ledger: &mut BudgetLedger,
    round_amount: f64,
) -> Result<Vec<PointId>> {
    if k == 0 || k > x.len() {
        return Err(invalid(format!("k must lie in 1..={}, got {k}", x.len())));
    }
    let mut remaining = all_ids(x.len());
    let mut found = Vec::with_capacity(k);
    for j in 1..=k {
        let round = pnn(x, p, &remaining, round_eps, &PnnParams::default(), rng)?;
        round.ledger.audit_closed()?;
        ledger.charge(format!("neighbour {j}"), round_amount);
        let t = round.value.index;
        remaining.retain(|&id| id != t);
        found.push(t);
    }
    Ok(found)
}

/// ρ-CGP k nearest neighbours in discovery order: `k` rounds of [`pnn`] at
/// rate `√(2ρ/k)`, each removing its answer from the candidates.
pub fn kpnn(x: &PointTuple, p: &[f64], k: usize, rho: f64, rng: &mut RandomStream) -> Result<Audited<Vec<PointId>>> {
    ensure_positive("rho", rho)?;
    let mut ledger = BudgetLedger::cgp(rho);
    let kf = k.max(1) as f64;
    let round_eps = (2.0 * rho / kf).sqrt();
    let value = sequential_pnn(x, p, k, round_eps, rng, &mut ledger, rho / kf)?;
    Ok(Audited { value, ledger })
}

/// ε-GP k nearest neighbours: `k` rounds of [`pnn`] at rate `ε/k`.
pub fn kpnn_gp(x: &PointTuple, p: &[f64], k: usize, eps: f64, rng: &mut RandomStream) -> Result<Audited<Vec<PointId>>> {
    ensure_positive("eps", eps)?;
    let mut ledger = BudgetLedger::gp(eps);
    let round_eps = eps / k.max(1) as f64;
    let value = sequential_pnn(x, p, k, round_eps, rng, &mut ledger, round_eps)?;
    Ok(Audited { value, ledger })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::bounds::{kpnn_gamma, pnn_gamma};

    fn ids(v: &[usize]) -> Vec<PointId> {
        v.iter().map(|&i| PointId::new(i).unwrap()).collect()
    }

    fn line(dists: &[f64]) -> PointTuple {
        let pts: Vec<[f64; 2]> = dists.iter().map(|&d| [d, 0.0]).collect();
        PointTuple::from_points2(&pts).unwrap()
    }

    fn uniform(n: usize, seed: u64) -> PointTuple {
        let mut rng = RandomStream::new(seed, 99);
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| [1000.0 * rng.uniform_open(), 1000.0 * rng.uniform_open()])
            .collect();
        PointTuple::from_points2(&pts).unwrap()
    }

    #[test]
    fn zero_noise_returns_argmin() {
        let x = line(&[4.0, 1.0, 7.0]);
        let out = pnn(
            &x,
            &[0.0, 0.0],
            &all_ids(3),
            1.0,
            &PnnParams::default(),
            &mut RandomStream::zero_noise(),
        )
        .unwrap();
        assert_eq!(out.value.index, PointId::new(2).unwrap());
        assert_eq!(out.value.steps, 2);
        out.ledger.audit_closed().unwrap();
    }

    #[test]
    fn single_candidate_is_returned() {
        let x = line(&[4.0, 1.0, 7.0]);
        let mut rng = RandomStream::new(3, 3);
        for _ in 0..100 {
            let out = pnn(&x, &[0.0, 0.0], &ids(&[3]), 0.01, &PnnParams::default(), &mut rng).unwrap();
            assert_eq!(out.value.index.get(), 3);
        }
    }

    #[test]
    fn result_is_member_of_subset() {
        let x = uniform(50, 1);
        let subset = ids(&[3, 9, 27, 41]);
        let mut rng = RandomStream::new(4, 0);
        for _ in 0..200 {
            let out = pnn(&x, &[500.0, 500.0], &subset, 0.05, &PnnParams::default(), &mut rng).unwrap();
            assert!(subset.contains(&out.value.index));
        }
    }

    #[test]
    fn very_negative_gamma0_hits_the_cap() {
        let x = line(&[4.0, 1.0, 7.0]);
        let params = PnnParams {
            gamma0: -1e9,
            max_cycles: 5,
        };
        let err = pnn(&x, &[0.0, 0.0], &all_ids(3), 1.0, &params, &mut RandomStream::new(1, 1)).unwrap_err();
        assert!(matches!(err, Error::NonHalt { steps: 15 }));
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = line(&[1.0, 2.0]);
        let mut z = RandomStream::zero_noise();
        let d = PnnParams::default();
        assert!(pnn(&x, &[0.0, 0.0], &[], 1.0, &d, &mut z).is_err());
        assert!(pnn(&x, &[0.0, 0.0], &ids(&[3]), 1.0, &d, &mut z).is_err());
        assert!(pnn(&x, &[0.0], &all_ids(2), 1.0, &d, &mut z).is_err());
        assert!(pnn(&x, &[0.0, 0.0], &all_ids(2), 0.0, &d, &mut z).is_err());
        let no_cycles = PnnParams { max_cycles: 0, ..d };
        assert!(pnn(&x, &[0.0, 0.0], &all_ids(2), 1.0, &no_cycles, &mut z).is_err());
        assert!(kpnn(&x, &[0.0, 0.0], 3, 1.0, &mut z).is_err());
        assert!(kpnn(&x, &[0.0, 0.0], 0, 1.0, &mut z).is_err());
        assert!(kpnn_gp(&x, &[0.0, 0.0], 3, 1.0, &mut z).is_err());
    }

    #[test]
    fn zero_noise_kpnn_ranks() {
        let x = line(&[4.0, 1.0, 7.0, 2.0, 1.0]);
        let mut z = RandomStream::zero_noise();
        let got = kpnn(&x, &[0.0, 0.0], 3, 1.0, &mut z).unwrap();
        assert_eq!(got.value, ids(&[2, 5, 4]));
        got.ledger.audit_closed().unwrap();
        let gp = kpnn_gp(&x, &[0.0, 0.0], 3, 1.0, &mut z).unwrap();
        assert_eq!(gp.value, ids(&[2, 5, 4]));
        gp.ledger.audit_closed().unwrap();
    }

    #[test]
    fn full_k_is_a_permutation() {
        let x = uniform(30, 2);
        let mut rng = RandomStream::new(5, 0);
        let mut got = kpnn(&x, &[500.0, 500.0], 30, 0.5, &mut rng).unwrap().value;
        got.sort();
        assert_eq!(got, all_ids(30));
    }

    #[test]
    fn kpnn_gp_with_one_round_matches_pnn() {
        let x = uniform(40, 3);
        let p = [200.0, 300.0];
        for seed in 0..20 {
            let a = kpnn_gp(&x, &p, 1, 0.3, &mut RandomStream::new(seed, 0)).unwrap().value;
            let b = pnn(
                &x,
                &p,
                &all_ids(40),
                0.3,
                &PnnParams::default(),
                &mut RandomStream::new(seed, 0),
            )
            .unwrap();
            assert_eq!(a, vec![b.value.index]);
        }
    }

    #[test]
    fn pnn_utility_and_running_time() {
        let (m, eps, beta) = (1000usize, 1.0, 0.05);
        let x = uniform(m, 10);
        let p = [480.0, 520.0];
        let (_, h) = min_dist(&x, &p, &all_ids(m)).unwrap();
        let gamma = pnn_gamma(m, eps, beta).unwrap();
        let mut rng = RandomStream::new(21, 0);
        let (mut ok, mut steps) = (0, 0);
        for _ in 0..200 {
            let out = pnn(&x, &p, &all_ids(m), eps, &PnnParams::default(), &mut rng)
                .unwrap()
                .value;
            if euclidean(x.point(out.index), &p) <= h + gamma {
                ok += 1;
            }
            steps += out.steps;
        }
        assert!(ok >= 190, "{ok}/200");
        assert!(steps as f64 / 200.0 <= 4.0 * m as f64);
    }

    #[test]
    fn kpnn_utility() {
        let (n, k, rho, beta) = (1000usize, 10usize, 1.0, 0.05);
        let x = uniform(n, 11);
        let p = [300.0, 700.0];
        let mut true_d: Vec<f64> = x.iter().map(|q| euclidean(q, &p)).collect();
        true_d.sort_by(f64::total_cmp);
        let gamma = kpnn_gamma(n, k, rho, beta).unwrap();
        let mut rng = RandomStream::new(22, 0);
        let ok = (0..200)
            .filter(|_| {
                let got = kpnn(&x, &p, k, rho, &mut rng).unwrap().value;
                got.iter()
                    .enumerate()
                    .all(|(j, &t)| euclidean(x.point(t), &p) <= true_d[j] + gamma)
            })
            .count();
        assert!(ok >= 190, "{ok}/200");
    }
}
