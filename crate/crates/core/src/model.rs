//! Statistical model of the estimation task.
//!
//! A network of `N` sensors observes a scalar Gaussian parameter `theta`
//! through `x = h theta + eps`, shares observations over a sparse
//! collaboration topology (`z = W x`), and transmits the collaborated
//! values coherently so the fusion center receives `y = g' z + u`. This
//! module holds the validated model containers and the scalar figures of
//! merit: transmit power, Fisher information, estimation distortion, and
//! collaboration cost.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::topology::Topology;

fn check_symmetric(m: &DMatrix<f64>, context: &'static str) -> Result<()> {
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if (a - b).abs() > 1e-12 * (1.0 + a.abs() + b.abs()) {
                return Err(Error::NotSymmetric { context });
            }
        }
    }
    Ok(())
}

fn check_positive_definite(m: &DMatrix<f64>, context: &'static str) -> Result<()> {
    Cholesky::new(m.clone())
        .map(|_| ())
        .ok_or(Error::NotPositiveDefinite { context })
}

/// Observation side of the model: prior variance of the parameter,
/// per-sensor observation gains `h`, and the noise covariance `Sigma`.
#[derive(Debug, Clone)]
pub struct ObservationModel {
    prior_var: f64,
    gains: DVector<f64>,
    noise_cov: DMatrix<f64>,
}

impl ObservationModel {
    /// Validates dimensions, symmetry, and positive definiteness once so the
    /// evaluators below can stay check-free.
    pub fn new(prior_var: f64, gains: DVector<f64>, noise_cov: DMatrix<f64>) -> Result<Self> {
        let n = gains.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "observation model needs at least one sensor".into(),
            ));
        }
        if !(prior_var > 0.0) || !prior_var.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "prior variance must be positive and finite, got {prior_var}"
            )));
        }
        if !gains.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(
                "observation gains must be finite".into(),
            ));
        }
        if gains.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidParameter(
                "observation gains are all zero; the parameter is unobservable".into(),
            ));
        }
        if noise_cov.nrows() != n || noise_cov.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "observation noise covariance",
                expected: n,
                got: noise_cov.nrows().max(noise_cov.ncols()),
            });
        }
        check_symmetric(&noise_cov, "observation noise covariance")?;
        check_positive_definite(&noise_cov, "observation noise covariance")?;
        Ok(Self {
            prior_var,
            gains,
            noise_cov,
        })
    }

    pub fn n_sensors(&self) -> usize {
        self.gains.len()
    }

    /// Prior variance `eta^2` of the estimated parameter.
    pub fn prior_var(&self) -> f64 {
        self.prior_var
    }

    pub fn gains(&self) -> &DVector<f64> {
        &self.gains
    }

    pub fn noise_cov(&self) -> &DMatrix<f64> {
        &self.noise_cov
    }

    /// Second moment `V = Sigma + eta^2 h h'` of the raw observations.
    /// Transmit power is a quadratic form in this matrix.
    pub fn second_moment(&self) -> DMatrix<f64> {
        let mut v = self.noise_cov.clone();
        let scale = self.prior_var;
        for i in 0..self.gains.len() {
            for j in 0..self.gains.len() {
                v[(i, j)] += scale * self.gains[i] * self.gains[j];
            }
        }
        v
    }
}

/// Channel side of the model: per-sensor channel gains `g` and the variance
/// of the additive noise at the fusion center.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    gains: DVector<f64>,
    mac_noise_var: f64,
}

impl ChannelModel {
    pub fn new(gains: DVector<f64>, mac_noise_var: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::InvalidParameter(
                "channel model needs at least one sensor".into(),
            ));
        }
        if !(mac_noise_var > 0.0) || !mac_noise_var.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "channel noise variance must be positive and finite, got {mac_noise_var}"
            )));
        }
        if !gains.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("channel gains must be finite".into()));
        }
        if gains.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidParameter(
                "channel gains are all zero; nothing reaches the fusion center".into(),
            ));
        }
        Ok(Self {
            gains,
            mac_noise_var,
        })
    }

    pub fn n_sensors(&self) -> usize {
        self.gains.len()
    }

    pub fn gains(&self) -> &DVector<f64> {
        &self.gains
    }

    /// Variance `xi^2` of the noise added on the multiple-access channel.
    pub fn mac_noise_var(&self) -> f64 {
        self.mac_noise_var
    }
}

/// A collaboration weight matrix pinned to its topology. Construction
/// rejects any nonzero weight outside the allowed sparsity pattern.
#[derive(Debug, Clone)]
pub struct CollaborationMatrix {
    weights: DMatrix<f64>,
    topology: Topology,
}

impl CollaborationMatrix {
    pub fn new(weights: DMatrix<f64>, topology: Topology) -> Result<Self> {
        let n = topology.n_sensors();
        if weights.nrows() != n || weights.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "collaboration matrix",
                expected: n,
                got: weights.nrows().max(weights.ncols()),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if weights[(i, j)] != 0.0 && !topology.contains(i, j) {
                    return Err(Error::SparsityViolation { row: i, col: j });
                }
            }
        }
        Ok(Self { weights, topology })
    }

    pub fn zeros(topology: Topology) -> Self {
        let n = topology.n_sensors();
        Self {
            weights: DMatrix::zeros(n, n),
            topology,
        }
    }

    pub fn n_sensors(&self) -> usize {
        self.topology.n_sensors()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }
}

/// Per-link collaboration costs. Diagonal entries must be exactly zero
/// (keeping one's own observation is free); off-diagonal entries are
/// nonnegative and may be `f64::INFINITY` to forbid a link.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    costs: DMatrix<f64>,
}

impl CostMatrix {
    pub fn new(costs: DMatrix<f64>) -> Result<Self> {
        if costs.nrows() != costs.ncols() {
            return Err(Error::DimensionMismatch {
                context: "cost matrix",
                expected: costs.nrows(),
                got: costs.ncols(),
            });
        }
        for i in 0..costs.nrows() {
            if costs[(i, i)] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "cost matrix diagonal must be zero, got {} at ({i}, {i})",
                    costs[(i, i)]
                )));
            }
            for j in 0..costs.ncols() {
                let c = costs[(i, j)];
                if c.is_nan() || c < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "link cost at ({i}, {j}) must be nonnegative, got {c}"
                    )));
                }
            }
        }
        Ok(Self { costs })
    }

    /// Uniform off-diagonal cost, zero on the diagonal.
    pub fn uniform(n: usize, cost: f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { cost }))
    }

    pub fn n_sensors(&self) -> usize {
        self.costs.nrows()
    }

    pub fn costs(&self) -> &DMatrix<f64> {
        &self.costs
    }
}

fn check_same_sensors(n: usize, got: usize, context: &'static str) -> Result<()> {
    if n == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected: n,
            got,
        })
    }
}

/// Expected transmit power `Tr[W V W']` spent by the network when sending
/// the collaborated observations, with `V` the observation second moment.
pub fn transmit_power(w: &CollaborationMatrix, model: &ObservationModel) -> Result<f64> {
    check_same_sensors(model.n_sensors(), w.n_sensors(), "transmit power")?;
    let wv = w.weights() * model.second_moment();
    Ok(wv.component_mul(w.weights()).sum())
}

/// Fisher information about the parameter carried by the fusion-center
/// observation: `(g'Wh)^2 / (g'W Sigma W'g + xi^2)`.
pub fn fisher_info(
    w: &CollaborationMatrix,
    model: &ObservationModel,
    channel: &ChannelModel,
) -> Result<f64> {
    check_same_sensors(model.n_sensors(), w.n_sensors(), "fisher information")?;
    check_same_sensors(model.n_sensors(), channel.n_sensors(), "fisher information")?;
    let q = w.weights().transpose() * channel.gains();
    let num = q.dot(model.gains()).powi(2);
    let den = q.dot(&(model.noise_cov() * &q)) + channel.mac_noise_var();
    Ok(num / den)
}

/// Minimum mean-square error of the Bayesian estimate given Fisher
/// information `info` and prior variance `prior_var`.
pub fn distortion_from_info(info: f64, prior_var: f64) -> Result<f64> {
    if !(prior_var > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "prior variance must be positive, got {prior_var}"
        )));
    }
    if info.is_nan() || info < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "information must be nonnegative, got {info}"
        )));
    }
    Ok(1.0 / (1.0 / prior_var + info))
}

/// Information ceiling `h' Sigma^-1 h` reached when the fusion center sees
/// all observations directly, free of channel noise.
pub fn centralized_info(model: &ObservationModel) -> Result<f64> {
    let chol = Cholesky::new(model.noise_cov().clone()).ok_or(Error::NotPositiveDefinite {
        context: "observation noise covariance",
    })?;
    let y = chol.solve(model.gains());
    Ok(model.gains().dot(&y))
}

/// Distortion floor corresponding to [`centralized_info`].
pub fn centralized_distortion(model: &ObservationModel) -> Result<f64> {
    distortion_from_info(centralized_info(model)?, model.prior_var())
}

/// Total cost of the links enabled by a topology. Infinite link costs
/// propagate to an infinite total; absent links never contribute, so a
/// forbidden (infinite-cost) link outside the topology is free.
pub fn collaboration_cost(topology: &Topology, costs: &CostMatrix) -> Result<f64> {
    check_same_sensors(costs.n_sensors(), topology.n_sensors(), "collaboration cost")?;
    let mut total = 0.0;
    for &(i, j) in topology.links() {
        if i != j {
            total += costs.costs()[(i, j)];
        }
    }
    Ok(total)
}
