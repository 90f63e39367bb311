//! Independent checks for the optimizer, built deliberately from naive
//! ingredients: plain loops for the quadratic forms and derivative-free
//! search for the optimum. Nothing here reuses the solver's linear-algebra
//! shortcuts, so agreement between the two is meaningful evidence.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ChannelModel, ObservationModel};
use crate::topology::EmbeddedProblem;

/// Outcome of [`sphere_search_max_info`].
#[derive(Debug, Clone)]
pub struct SphereSearchResult {
    /// Best information found; a lower bound on the true optimum.
    pub info: f64,
    /// Weights attaining it, scaled to the full power budget.
    pub weights: DVector<f64>,
}

/// Evaluates the embedded objective at one weight vector using only loops:
/// lift, rescale to the power budget, and read off the information.
struct NaiveObjective<'a> {
    links: &'a [(usize, usize)],
    second_moment: DMatrix<f64>,
    noise_cov: &'a DMatrix<f64>,
    obs_gains: &'a DVector<f64>,
    chan_gains: &'a DVector<f64>,
    mac_noise_var: f64,
    power: f64,
}

impl NaiveObjective<'_> {
    /// Information of `coeffs` rescaled to spend the full budget; the
    /// rescaling factor comes back too so callers can keep iterates on the
    /// power shell.
    fn eval(&self, coeffs: &DVector<f64>) -> (f64, f64) {
        let n = self.obs_gains.len();
        let mut w = DMatrix::zeros(n, n);
        for (ell, &(i, j)) in self.links.iter().enumerate() {
            w[(i, j)] = coeffs[ell];
        }
        let (raw_power, mac) = naive_quadratics(&w, &self.second_moment, self.chan_gains);
        if !(raw_power > 0.0) {
            return (f64::NEG_INFINITY, 0.0);
        }
        let mut signal = 0.0;
        for i in 0..n {
            signal += mac[i] * self.obs_gains[i];
        }
        let mut noise = 0.0;
        for i in 0..n {
            for j in 0..n {
                noise += mac[i] * self.noise_cov[(i, j)] * mac[j];
            }
        }
        let s2 = self.power / raw_power;
        let info = s2 * signal * signal / (s2 * noise + self.mac_noise_var);
        (info, s2.sqrt())
    }
}

/// Derivative-free search for the maximum information under a power budget:
/// `n_directions` seeded random directions followed by `refine_rounds` of
/// coordinate perturbation with a shrinking step. Deterministic in `seed`
/// regardless of thread count.
pub fn sphere_search_max_info(
    ep: &EmbeddedProblem,
    model: &ObservationModel,
    channel: &ChannelModel,
    power: f64,
    n_directions: usize,
    refine_rounds: usize,
    seed: u64,
) -> Result<SphereSearchResult> {
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "power budget must be positive and finite, got {power}"
        )));
    }
    if n_directions == 0 {
        return Err(Error::InvalidParameter(
            "sphere search needs at least one direction".into(),
        ));
    }
    let l = ep.num_weights();
    let objective = NaiveObjective {
        links: ep.topology().links(),
        second_moment: model.second_moment(),
        noise_cov: model.noise_cov(),
        obs_gains: model.gains(),
        chan_gains: channel.gains(),
        mac_noise_var: channel.mac_noise_var(),
        power,
    };

    let direction = |idx: usize| -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(idx as u64);
        DVector::from_fn(l, |_, _| StandardNormal.sample(&mut rng))
    };

    // Ties resolve to the smallest index so parallel reduction order
    // cannot change the winner.
    let (best_info, best_idx) = (0..n_directions)
        .into_par_iter()
        .map(|idx| (objective.eval(&direction(idx)).0, idx))
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );

    let mut best = direction(best_idx);
    let (mut info, scale) = objective.eval(&best);
    debug_assert_eq!(info, best_info);
    best *= scale;

    let mut step = 0.25;
    for _ in 0..refine_rounds {
        let mut improved = false;
        let reach = step * best.norm();
        for ell in 0..l {
            for sign in [1.0, -1.0] {
                let mut candidate = best.clone();
                candidate[ell] += sign * reach;
                let (cand_info, cand_scale) = objective.eval(&candidate);
                if cand_info > info {
                    info = cand_info;
                    candidate *= cand_scale;
                    best = candidate;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
    }

    let mut combined_signal = 0.0;
    for (ell, &(i, j)) in ep.topology().links().iter().enumerate() {
        combined_signal += channel.gains()[i] * best[ell] * model.gains()[j];
    }
    if combined_signal < 0.0 {
        best = -best;
    }
    Ok(SphereSearchResult {
        info,
        weights: best,
    })
}

/// Evaluates both embedded quadratic forms by direct summation: the power
/// form `Tr[W V W']` and the channel combining vector `W' g`.
pub fn naive_quadratics(
    weights: &DMatrix<f64>,
    second_moment: &DMatrix<f64>,
    gains: &DVector<f64>,
) -> (f64, DVector<f64>) {
    let n = weights.nrows();
    assert_eq!(weights.ncols(), n, "weight matrix must be square");
    assert_eq!(second_moment.nrows(), n, "second moment size");
    assert_eq!(gains.len(), n, "gain vector size");
    let mut trace_form = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                trace_form += weights[(i, j)] * second_moment[(j, k)] * weights[(i, k)];
            }
        }
    }
    let mut mac_form = DVector::zeros(n);
    for j in 0..n {
        for i in 0..n {
            mac_form[j] += gains[i] * weights[(i, j)];
        }
    }
    (trace_form, mac_form)
}

/// Margin of the superadditivity of `M -> 1 / (p' M^-1 p)` over positive
/// definite matrices:
/// `1/(p'(A+B)^-1 p) - 1/(p' A^-1 p) - 1/(p' B^-1 p)`,
/// which is nonnegative, with equality exactly when `A^-1 p` and `B^-1 p`
/// are parallel. This inequality is what makes the separation bound valid.
pub fn superadditivity_margin(
    p: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<f64> {
    let n = p.len();
    if a.nrows() != n || a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "superadditivity margin",
            expected: n,
            got: a.nrows().max(a.ncols()).max(b.nrows()).max(b.ncols()),
        });
    }
    if p.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidParameter(
            "superadditivity margin needs a nonzero vector".into(),
        ));
    }
    let quad_inv = |m: &DMatrix<f64>, context: &'static str| -> Result<f64> {
        let chol =
            Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite { context })?;
        Ok(p.dot(&chol.solve(p)))
    };
    let sum_term = 1.0 / quad_inv(&(a + b), "superadditivity sum")?;
    let a_term = 1.0 / quad_inv(a, "superadditivity first matrix")?;
    let b_term = 1.0 / quad_inv(b, "superadditivity second matrix")?;
    Ok(sum_term - a_term - b_term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_info_for_power;
    use crate::topology::{embed, Topology};
    use approx::assert_relative_eq;
    use rand::RngExt;

    fn random_pd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        &m * m.transpose() + DMatrix::identity(n, n) * 0.1
    }

    fn random_problem(
        n: usize,
        seed: u64,
        topo: &Topology,
    ) -> (EmbeddedProblem, ObservationModel, ChannelModel) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = DVector::from_fn(n, |_, _| 0.5 + rng.random::<f64>());
        let cov = random_pd(n, &mut rng);
        let model = ObservationModel::new(0.8 + rng.random::<f64>(), h, cov).unwrap();
        let channel = ChannelModel::new(
            DVector::from_fn(n, |_, _| 0.2 + rng.random::<f64>()),
            0.6 + rng.random::<f64>(),
        )
        .unwrap();
        let ep = embed(topo, &model, &channel).unwrap();
        (ep, model, channel)
    }

    #[test]
    fn naive_quadratics_agree_with_matrix_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..6 {
            let w = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let v = random_pd(n, &mut rng);
            let g = DVector::from_fn(n, |_, _| rng.random::<f64>());
            let (trace_form, mac_form) = naive_quadratics(&w, &v, &g);
            assert_relative_eq!(
                trace_form,
                (&w * &v * w.transpose()).trace(),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                (mac_form - w.transpose() * g).norm(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn margin_is_nonnegative_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = 2 + (rng.random::<f64>() * 4.0) as usize;
            let a = random_pd(n, &mut rng);
            let b = random_pd(n, &mut rng);
            let p = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
            if p.norm() == 0.0 {
                continue;
            }
            let margin = superadditivity_margin(&p, &a, &b).unwrap();
            assert!(margin >= -1e-12, "margin {margin}");
        }
    }

    #[test]
    fn margin_vanishes_for_proportional_scaled_identities() {
        let p = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let a = DMatrix::identity(3, 3) * 0.7;
        let b = DMatrix::identity(3, 3) * 0.7;
        let margin = superadditivity_margin(&p, &a, &b).unwrap();
        assert!(margin.abs() < 1e-14, "margin {margin}");
    }

    #[test]
    fn margin_rejects_degenerate_inputs() {
        let p = DVector::from_vec(vec![1.0, 1.0]);
        let singular = DMatrix::from_fn(2, 2, |_, _| 1.0);
        let pd = DMatrix::identity(2, 2);
        assert!(superadditivity_margin(&p, &singular, &pd).is_err());
        assert!(
            superadditivity_margin(&DVector::zeros(2), &pd, &pd).is_err()
        );
    }

    #[test]
    fn single_weight_search_is_exact() {
        let topo = Topology::distributed(1).unwrap();
        let (ep, model, channel) = random_problem(1, 5, &topo);
        let power = 1.4;
        let exact = solve_info_for_power(&ep, &model, &channel, power).unwrap();
        let found =
            sphere_search_max_info(&ep, &model, &channel, power, 10, 0, 99).unwrap();
        assert_relative_eq!(found.info, exact.info, max_relative = 1e-12);
    }

    #[test]
    fn search_approaches_solver_from_below() {
        let topo = Topology::from_adjacency(3, |i, j| i == j || (i == 0 && j == 1)).unwrap();
        let (ep, model, channel) = random_problem(3, 29, &topo);
        let power = 0.8;
        let exact = solve_info_for_power(&ep, &model, &channel, power).unwrap();
        let found =
            sphere_search_max_info(&ep, &model, &channel, power, 4000, 120, 7).unwrap();
        assert!(found.info <= exact.info + 1e-9, "oracle overshot the solver");
        assert!(
            found.info >= exact.info * (1.0 - 1e-3),
            "oracle fell short: {} vs {}",
            found.info,
            exact.info
        );
    }

    #[test]
    fn search_is_deterministic_for_a_seed() {
        let topo = Topology::cycle(3, 1).unwrap();
        let (ep, model, channel) = random_problem(3, 31, &topo);
        let a = sphere_search_max_info(&ep, &model, &channel, 1.0, 500, 10, 11).unwrap();
        let b = sphere_search_max_info(&ep, &model, &channel, 1.0, 500, 10, 11).unwrap();
        assert_eq!(a.info, b.info);
        assert_eq!(a.weights, b.weights);
    }
}
