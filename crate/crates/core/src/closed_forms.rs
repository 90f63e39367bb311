//! Closed-form tradeoff expressions for special topologies, bounds valid on
//! any topology, and the power-budget asymptotics of the optimal solution.
//!
//! These serve two purposes: fast evaluation where the general solver is
//! unnecessary, and independent cross-checks of the solver itself (each
//! formula here is exact algebra, not iteration).

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{
    centralized_distortion, centralized_info, distortion_from_info, ChannelModel,
    CollaborationMatrix, ObservationModel,
};
use crate::topology::{EmbeddedProblem, Topology};

/// Best information with no collaboration (diagonal weights), valid when
/// the observation noise covariance is diagonal:
/// `J = sum_n h_n^2 / (sigma_n^2 + (sigma_n^2 + eta^2 h_n^2) / (P_xi g_n^2))`.
pub fn info_distributed(
    model: &ObservationModel,
    channel: &ChannelModel,
    power: f64,
) -> Result<f64> {
    check_pair(model, channel)?;
    check_power(power)?;
    let n = model.n_sensors();
    let cov = model.noise_cov();
    for i in 0..n {
        for j in 0..n {
            if i != j && cov[(i, j)] != 0.0 {
                return Err(Error::InvalidParameter(
                    "distributed closed form requires a diagonal noise covariance".into(),
                ));
            }
        }
    }
    let p_xi = power / channel.mac_noise_var();
    let h = model.gains();
    let g = channel.gains();
    let eta2 = model.prior_var();
    let mut total = 0.0;
    for i in 0..n {
        let s2 = cov[(i, i)];
        total += h[i] * h[i] / (s2 + (s2 + eta2 * h[i] * h[i]) / (p_xi * g[i] * g[i]));
    }
    Ok(total)
}

/// Best information when every node sees every observation:
/// `J = [1/J0 + (eta^2 + 1/J0) / (P_xi |g|^2)]^-1`.
pub fn info_fully_connected(
    model: &ObservationModel,
    channel: &ChannelModel,
    power: f64,
) -> Result<f64> {
    check_pair(model, channel)?;
    check_power(power)?;
    let j0 = centralized_info(model)?;
    let p_xi = power / channel.mac_noise_var();
    let g2 = channel.gains().norm_squared();
    Ok(1.0 / (1.0 / j0 + (model.prior_var() + 1.0 / j0) / (p_xi * g2)))
}

/// Weights attaining [`info_fully_connected`]: a rank-one matrix matched to
/// the channel on the left and to the centralized estimator on the right,
/// scaled to spend exactly `power`.
pub fn weights_fully_connected(
    model: &ObservationModel,
    channel: &ChannelModel,
    power: f64,
) -> Result<CollaborationMatrix> {
    check_pair(model, channel)?;
    check_power(power)?;
    let chol = Cholesky::new(model.noise_cov().clone()).ok_or(Error::NotPositiveDefinite {
        context: "observation noise covariance",
    })?;
    let x = chol.solve(model.gains());
    let raw = channel.gains() * x.transpose();
    let raw_power = (&raw * model.second_moment())
        .component_mul(&raw)
        .sum();
    let scale = (power / raw_power).sqrt();
    CollaborationMatrix::new(
        raw * scale,
        Topology::fully_connected(model.n_sensors())?,
    )
}

/// Information-theoretic limit on any strategy that communicates over the
/// same channel: no collaboration scheme can beat the distortion of a
/// source-channel-separated system operating at channel capacity.
#[derive(Debug, Clone, Copy)]
pub struct RateDistortionBound {
    /// Channel capacity in nats per use, `0.5 ln(1 + |g|^2 P_xi)`.
    pub capacity: f64,
    /// Distortion floor `D0 + (eta^2 - D0) exp(-2 capacity)`.
    pub min_distortion: f64,
    /// Information ceiling implied by the distortion floor.
    pub max_info: f64,
}

/// Capacity-based outer bound on the tradeoff; met with equality by the
/// fully connected topology and strictly optimistic for every other one.
pub fn rate_distortion_bound(
    model: &ObservationModel,
    channel: &ChannelModel,
    power: f64,
) -> Result<RateDistortionBound> {
    check_pair(model, channel)?;
    check_power(power)?;
    let p_xi = power / channel.mac_noise_var();
    let snr_total = channel.gains().norm_squared() * p_xi;
    let capacity = 0.5 * (1.0 + snr_total).ln();
    let d0 = centralized_distortion(model)?;
    let min_distortion = d0 + (model.prior_var() - d0) / (1.0 + snr_total);
    let max_info = 1.0 / min_distortion - 1.0 / model.prior_var();
    Ok(RateDistortionBound {
        capacity,
        min_distortion,
        max_info,
    })
}

/// Optimistic bound from charging the measurement noise and the channel
/// noise for information separately.
#[derive(Debug, Clone, Copy)]
pub struct SeparationBound {
    /// Upper bound `[1/J0 + 1/(P_xi h' Gamma^-1 h)]^-1` on information.
    pub info: f64,
    /// Matching lower bound on distortion.
    pub distortion: f64,
}

/// Topology-aware outer bound on achievable information: the harmonic sum
/// of the noiseless-channel ceiling and the noiseless-measurement ceiling.
/// Exact for symmetric cycles at any connectivity.
pub fn separation_bound(
    ep: &EmbeddedProblem,
    model: &ObservationModel,
    channel: &ChannelModel,
    power: f64,
) -> Result<SeparationBound> {
    check_pair(model, channel)?;
    check_power(power)?;
    let j0 = centralized_info(model)?;
    let p_xi = power / channel.mac_noise_var();
    let channel_ceiling = p_xi * model.gains().dot(&(ep.gram() * model.gains()));
    let info = 1.0 / (1.0 / j0 + 1.0 / channel_ceiling);
    Ok(SeparationBound {
        info,
        distortion: distortion_from_info(info, model.prior_var())?,
    })
}

/// Which end of the power range an asymptotic expansion targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrRegime {
    /// Vanishing power budget: information is linear in power and the best
    /// weights align with the matched filter `Omega^-1 G h`.
    Low,
    /// Large power budget: information approaches the centralized ceiling
    /// at rate `1/P` and the best weights align with
    /// `Omega^-1 G Gamma Sigma^-1 h`.
    High,
}

/// First-order expansion of the optimal tradeoff point in one SNR regime.
#[derive(Debug, Clone)]
pub struct AsymptoticPoint {
    pub info: f64,
    pub distortion: f64,
    /// Limiting weight direction (unnormalized); only its direction is
    /// meaningful.
    pub weight_direction: DVector<f64>,
}

pub fn snr_asymptotics(
    ep: &EmbeddedProblem,
    model: &ObservationModel,
    channel: &ChannelModel,
    power: f64,
    regime: SnrRegime,
) -> Result<AsymptoticPoint> {
    check_pair(model, channel)?;
    check_power(power)?;
    let p_xi = power / channel.mac_noise_var();
    let h = model.gains();
    let eta2 = model.prior_var();
    match regime {
        SnrRegime::Low => {
            let channel_slope = h.dot(&(ep.gram() * h));
            let info = p_xi * channel_slope;
            let distortion = eta2 - eta2 * eta2 * info;
            let weight_direction = ep.solve_omega(&ep.channel_expand(h));
            Ok(AsymptoticPoint {
                info,
                distortion,
                weight_direction,
            })
        }
        SnrRegime::High => {
            let j0 = centralized_info(model)?;
            let d0 = distortion_from_info(j0, eta2)?;
            let chol =
                Cholesky::new(model.noise_cov().clone()).ok_or(Error::NotPositiveDefinite {
                    context: "observation noise covariance",
                })?;
            let x = chol.solve(h);
            let t = ep.gamma() * &x;
            let deficit = x.dot(&t) / p_xi;
            let weight_direction = ep.solve_omega(&ep.channel_expand(&t));
            Ok(AsymptoticPoint {
                info: j0 - deficit,
                distortion: d0 + d0 * d0 * deficit,
                weight_direction,
            })
        }
    }
}

/// Symmetric ring network where every quantity of the tradeoff has a closed
/// form: equal observation and channel gains, equicorrelated noise, and
/// cyclic sharing with `k` predecessors.
#[derive(Debug, Clone, Copy)]
pub struct CycleSetup {
    pub n: usize,
    pub k: usize,
    pub h0: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub prior_var: f64,
    pub g0: f64,
    pub mac_noise_var: f64,
}

impl CycleSetup {
    pub fn new(
        n: usize,
        k: usize,
        h0: f64,
        sigma2: f64,
        rho: f64,
        prior_var: f64,
        g0: f64,
        mac_noise_var: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("cycle needs at least one node".into()));
        }
        if k >= n {
            return Err(Error::InvalidParameter(format!(
                "cycle connectivity {k} must be below the network size {n}"
            )));
        }
        if h0 == 0.0 || g0 == 0.0 {
            return Err(Error::InvalidParameter(
                "cycle gains must be nonzero".into(),
            ));
        }
        if !(sigma2 > 0.0) || !(prior_var > 0.0) || !(mac_noise_var > 0.0) {
            return Err(Error::InvalidParameter(
                "cycle variances must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidParameter(format!(
                "equicorrelation must lie in [0, 1), got {rho}"
            )));
        }
        Ok(Self {
            n,
            k,
            h0,
            sigma2,
            rho,
            prior_var,
            g0,
            mac_noise_var,
        })
    }

    pub fn observation_model(&self) -> Result<ObservationModel> {
        let cov = DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                self.sigma2
            } else {
                self.sigma2 * self.rho
            }
        });
        ObservationModel::new(
            self.prior_var,
            DVector::from_element(self.n, self.h0),
            cov,
        )
    }

    pub fn channel_model(&self) -> Result<ChannelModel> {
        ChannelModel::new(
            DVector::from_element(self.n, self.g0),
            self.mac_noise_var,
        )
    }

    pub fn topology(&self) -> Result<Topology> {
        Topology::cycle(self.n, self.k)
    }

    /// Information ceiling `N h0^2 / (sigma^2 (1 - rho + rho N))`.
    pub fn centralized_info(&self) -> f64 {
        let n = self.n as f64;
        n * self.h0 * self.h0 / (self.sigma2 * (1.0 - self.rho + self.rho * n))
    }

    /// Channel cost per unit of inverse SNR in the cycle tradeoff:
    /// `1/J = 1/J0 + factor / P_xi`.
    fn channel_factor(&self) -> f64 {
        let spread = self.rho + (1.0 - self.rho) / (self.k as f64 + 1.0);
        (self.prior_var + self.sigma2 / (self.h0 * self.h0) * spread)
            / (self.n as f64 * self.g0 * self.g0)
    }
}

/// Exact optimal information for a cycle setup at a given power budget.
pub fn info_cycle(setup: &CycleSetup, power: f64) -> Result<f64> {
    check_power(power)?;
    let p_xi = power / setup.mac_noise_var;
    Ok(1.0 / (1.0 / setup.centralized_info() + setup.channel_factor() / p_xi))
}

/// Exact minimum power for a cycle setup to reach a target information.
pub fn power_cycle(setup: &CycleSetup, info: f64) -> Result<f64> {
    if !(info > 0.0) || !info.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "information target must be positive and finite, got {info}"
        )));
    }
    let j0 = setup.centralized_info();
    if info >= j0 {
        return Err(Error::InfeasibleInfo {
            requested: info,
            limit: j0,
            gap: info - j0,
        });
    }
    Ok(setup.mac_noise_var * setup.channel_factor() * info * j0 / (j0 - info))
}

/// Fraction of transmit power saved by cyclic collaboration relative to no
/// collaboration, at any fixed distortion target:
/// `(1 - rho)(1 - 1/(k + 1)) / (1 + eta^2 h0^2 / sigma^2)`.
/// Depends only on connectivity, correlation, and the observation SNR.
pub fn relative_power_savings(setup: &CycleSetup) -> f64 {
    let gamma = setup.prior_var * setup.h0 * setup.h0 / setup.sigma2;
    (1.0 - setup.rho) * (1.0 - 1.0 / (setup.k as f64 + 1.0)) / (1.0 + gamma)
}

fn check_pair(model: &ObservationModel, channel: &ChannelModel) -> Result<()> {
    if model.n_sensors() != channel.n_sensors() {
        return Err(Error::DimensionMismatch {
            context: "closed form model pair",
            expected: model.n_sensors(),
            got: channel.n_sensors(),
        });
    }
    Ok(())
}

fn check_power(power: f64) -> Result<()> {
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "power budget must be positive and finite, got {power}"
        )));
    }
    Ok(())
}
