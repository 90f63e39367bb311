//! Optimal collaboration weights on both sides of the power-distortion
//! tradeoff.
//!
//! For a fixed transmit power budget the best achievable Fisher information
//! has the closed form `J(P) = h' (Sigma + Gamma / P_xi)^-1 h`, with
//! `Gamma` the inverse gram matrix of the embedding and `P_xi = P / xi^2`
//! the channel signal-to-noise budget; the maximizing weights follow
//! directly. The reverse direction, minimum power for a target information,
//! reduces to the scalar secular equation
//! `f(mu) = 1 - mu h' (Gamma + mu J Sigma)^-1 h = 0`,
//! which is strictly decreasing and is solved here by bracketed bisection
//! with a Newton polish.

use nalgebra::{Cholesky, DVector};

use crate::error::{Error, Result};
use crate::model::{distortion_from_info, ChannelModel, ObservationModel};
use crate::topology::EmbeddedProblem;

/// Root-finder controls for [`solve_power_for_info_with`].
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Bisection stops once the bracket width falls below this fraction of
    /// its upper endpoint.
    pub root_rel_width: f64,
    /// Newton iterations run after bisection to polish the root.
    pub newton_steps: usize,
    /// Bound on bracket-expansion doublings before giving up.
    pub max_doublings: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root_rel_width: 1e-12,
            newton_steps: 6,
            max_doublings: 200,
        }
    }
}

/// One point on the power-distortion frontier, together with the weights
/// that attain it (in embedded coefficient order) and the KKT multiplier.
#[derive(Debug, Clone)]
pub struct TradeoffPoint {
    pub power: f64,
    /// Channel signal-to-noise budget `P / xi^2`.
    pub snr: f64,
    pub info: f64,
    pub distortion: f64,
    /// Multiplier `snr / info` of the power constraint; the optimal weights
    /// satisfy `(Omega + multiplier G (info Sigma - h h') G') w = 0`.
    pub multiplier: f64,
    pub weights: DVector<f64>,
}

fn check_problem(
    ep: &EmbeddedProblem,
    model: &ObservationModel,
    channel: &ChannelModel,
) -> Result<()> {
    let n = ep.n_sensors();
    if model.n_sensors() != n {
        return Err(Error::DimensionMismatch {
            context: "solver observation model",
            expected: n,
            got: model.n_sensors(),
        });
    }
    if channel.n_sensors() != n {
        return Err(Error::DimensionMismatch {
            context: "solver channel model",
            expected: n,
            got: channel.n_sensors(),
        });
    }
    Ok(())
}

/// Maximizes Fisher information subject to `w' Omega w <= power`.
pub fn solve_info_for_power(
    ep: &EmbeddedProblem,
    model: &ObservationModel,
    channel: &ChannelModel,
    power: f64,
) -> Result<TradeoffPoint> {
    check_problem(ep, model, channel)?;
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "power budget must be positive and finite, got {power}"
        )));
    }
    point_from_power(ep, model, channel, power)
}

fn point_from_power(
    ep: &EmbeddedProblem,
    model: &ObservationModel,
    channel: &ChannelModel,
    power: f64,
) -> Result<TradeoffPoint> {
    let snr = power / channel.mac_noise_var();
    let effective = model.noise_cov() + ep.gamma() / snr;
    let chol = Cholesky::new(effective).ok_or(Error::NotPositiveDefinite {
        context: "effective covariance",
    })?;
    let y = chol.solve(model.gains());
    let info = model.gains().dot(&y);

    let direction = ep.solve_omega(&ep.channel_expand(&(ep.gamma() * &y)));
    let raw_power = ep.omega_quad(&direction);
    if !(raw_power > 0.0) {
        return Err(Error::RootFinding(
            "optimal weight direction collapsed to zero".into(),
        ));
    }
    let mut scale = (power / raw_power).sqrt();
    if ep.channel_combine(&direction).dot(model.gains()) < 0.0 {
        scale = -scale;
    }

    Ok(TradeoffPoint {
        power,
        snr,
        info,
        distortion: distortion_from_info(info, model.prior_var())?,
        multiplier: snr / info,
        weights: direction * scale,
    })
}

/// Secular function `f(mu) = 1 - mu h' (Gamma + mu info Sigma)^-1 h` whose
/// unique positive root gives the minimum-power multiplier for `info`.
/// Strictly decreasing from `f(0) = 1` with limit `1 - J0 / info`.
pub fn secular_function(
    ep: &EmbeddedProblem,
    model: &ObservationModel,
    info: f64,
    mu: f64,
) -> Result<f64> {
    secular_pair(ep, model, info, mu).map(|(value, _)| value)
}

fn secular_pair(
    ep: &EmbeddedProblem,
    model: &ObservationModel,
    info: f64,
    mu: f64,
) -> Result<(f64, f64)> {
    let m = ep.gamma() + model.noise_cov() * (mu * info);
    let chol = Cholesky::new(m).ok_or(Error::NotPositiveDefinite {
        context: "secular system",
    })?;
    let y = chol.solve(model.gains());
    let value = 1.0 - mu * model.gains().dot(&y);
    let derivative = -y.dot(&(ep.gamma() * &y));
    Ok((value, derivative))
}

/// Minimizes transmit power subject to reaching Fisher information `info`,
/// with default root-finder settings.
pub fn solve_power_for_info(
    ep: &EmbeddedProblem,
    model: &ObservationModel,
    channel: &ChannelModel,
    info: f64,
) -> Result<TradeoffPoint> {
    solve_power_for_info_with(ep, model, channel, info, &Tolerances::default())
}

/// Minimizes transmit power subject to reaching Fisher information `info`.
///
/// Fails with [`Error::InfeasibleInfo`] when `info` is at or above the
/// centralized ceiling `h' Sigma^-1 h`, which no finite power attains.
pub fn solve_power_for_info_with(
    ep: &EmbeddedProblem,
    model: &ObservationModel,
    channel: &ChannelModel,
    info: f64,
    tolerances: &Tolerances,
) -> Result<TradeoffPoint> {
    check_problem(ep, model, channel)?;
    if !(info > 0.0) || !info.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "information target must be positive and finite, got {info}"
        )));
    }
    let limit = crate::model::centralized_info(model)?;
    if info >= limit {
        return Err(Error::InfeasibleInfo {
            requested: info,
            limit,
            gap: info - limit,
        });
    }

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while secular_pair(ep, model, info, hi)?.0 >= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > tolerances.max_doublings {
            return Err(Error::RootFinding(format!(
                "secular function kept its sign after {doublings} bracket doublings"
            )));
        }
    }

    while hi - lo > tolerances.root_rel_width * hi {
        let mid = 0.5 * (lo + hi);
        if secular_pair(ep, model, info, mid)?.0 >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut mu = 0.5 * (lo + hi);
    for _ in 0..tolerances.newton_steps {
        let (value, derivative) = secular_pair(ep, model, info, mu)?;
        if derivative == 0.0 {
            break;
        }
        mu = (mu - value / derivative).clamp(lo, hi);
    }

    let power = info * channel.mac_noise_var() * mu;
    point_from_power(ep, model, channel, power)
}

/// Relative stationarity residual
/// `|Omega w + mu G (info Sigma - h h') G' w| / |Omega w|`
/// of a tradeoff point; near zero for points produced by the solvers.
pub fn kkt_residual(
    point: &TradeoffPoint,
    ep: &EmbeddedProblem,
    model: &ObservationModel,
    channel: &ChannelModel,
) -> Result<f64> {
    check_problem(ep, model, channel)?;
    if point.weights.len() != ep.num_weights() {
        return Err(Error::DimensionMismatch {
            context: "tradeoff point weights",
            expected: ep.num_weights(),
            got: point.weights.len(),
        });
    }
    let q = ep.channel_combine(&point.weights);
    let signal = q.dot(model.gains());
    let z_q = model.noise_cov() * &q * point.info - model.gains() * signal;
    let omega_w = ep.omega_mul(&point.weights);
    let residual = &omega_w + ep.channel_expand(&z_q) * point.multiplier;
    Ok(residual.norm() / omega_w.norm())
}
