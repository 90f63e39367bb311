//! Collaboration topologies and the embedding that turns the sparse weight
//! matrix into an unconstrained coefficient vector.
//!
//! A topology is a 0/1 adjacency pattern `A` with ones on the diagonal;
//! `A[i][j] = 1` means node `i` may use node `j`'s observation. Collecting
//! the allowed entries of `W` column-major into a vector `w` turns the two
//! quadratic forms of the problem into
//!
//! * transmit power: `Tr[W V W'] = w' Omega w`, and
//! * channel combining: `W' g = G' w`,
//!
//! where `Omega` is block diagonal up to a permutation (one block `V[F_k]`
//! per receiving node `k`) and `G` holds channel gains. [`EmbeddedProblem`]
//! stores the per-node blocks in factored form so applying `Omega`, its
//! inverse, and the gram matrix `G' Omega^-1 G` stays cheap even when the
//! dense `Omega` would be large.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ChannelModel, CollaborationMatrix, ObservationModel};

/// Sparsity pattern of the collaboration matrix, with the index tables the
/// embedding needs precomputed.
#[derive(Debug, Clone)]
pub struct Topology {
    n: usize,
    adj: Vec<bool>,
    links: Vec<(usize, usize)>,
    windex: Vec<Option<usize>>,
    recv_sets: Vec<Vec<usize>>,
    send_sets: Vec<Vec<usize>>,
}

impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.adj == other.adj
    }
}

impl Eq for Topology {}

impl Topology {
    /// Builds a topology from an adjacency predicate. The diagonal must be
    /// present: every sensor keeps access to its own observation.
    pub fn from_adjacency(n: usize, allowed: impl Fn(usize, usize) -> bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "topology needs at least one node".into(),
            ));
        }
        let mut adj = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                adj[i * n + j] = allowed(i, j);
            }
            if !adj[i * n + i] {
                return Err(Error::MissingSelfLoop { node: i });
            }
        }

        // Column-major enumeration fixes the coefficient order shared by
        // every consumer of the embedding.
        let mut links = Vec::new();
        let mut windex = vec![None; n * n];
        for j in 0..n {
            for i in 0..n {
                if adj[i * n + j] {
                    windex[i * n + j] = Some(links.len());
                    links.push((i, j));
                }
            }
        }

        let mut recv_sets = vec![Vec::new(); n];
        let mut send_sets = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if adj[i * n + j] {
                    recv_sets[i].push(j);
                    send_sets[j].push(i);
                }
            }
        }

        Ok(Self {
            n,
            adj,
            links,
            windex,
            recv_sets,
            send_sets,
        })
    }

    /// No collaboration: each node scales only its own observation.
    pub fn distributed(n: usize) -> Result<Self> {
        Self::from_adjacency(n, |i, j| i == j)
    }

    /// Every node sees every observation.
    pub fn fully_connected(n: usize) -> Result<Self> {
        Self::from_adjacency(n, |_, _| true)
    }

    /// Cyclic sharing: each node passes its observation to the next `k`
    /// nodes around the ring, so every node receives from itself and its
    /// `k` predecessors. `k = 0` is distributed, `k = n - 1` fully connected.
    pub fn cycle(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "topology needs at least one node".into(),
            ));
        }
        if k >= n {
            return Err(Error::InvalidParameter(format!(
                "cycle connectivity {k} must be below the network size {n}"
            )));
        }
        Self::from_adjacency(n, |i, j| (i + n - j) % n <= k)
    }

    /// Geometric topology: nodes within Euclidean distance `radius` of each
    /// other are linked (in both directions). Positions live in the unit
    /// square. `radius = 0` reduces to the distributed pattern and
    /// `radius >= sqrt(2)` to the fully connected one.
    pub fn random_geometric(positions: &[[f64; 2]], radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "geometric radius must be finite and nonnegative, got {radius}"
            )));
        }
        for (idx, p) in positions.iter().enumerate() {
            let inside = (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]);
            if !inside {
                return Err(Error::PositionOutOfRange {
                    index: idx,
                    x: p[0],
                    y: p[1],
                });
            }
        }
        Self::from_adjacency(positions.len(), |i, j| {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            (dx * dx + dy * dy).sqrt() <= radius
        })
    }

    pub fn n_sensors(&self) -> usize {
        self.n
    }

    /// Number of allowed nonzero weights (length of the embedded vector).
    pub fn num_weights(&self) -> usize {
        self.links.len()
    }

    /// Allowed `(row, col)` entries of `W` in embedding (column-major) order.
    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    /// Position of entry `(i, j)` in the embedded vector, if allowed.
    pub fn weight_index(&self, i: usize, j: usize) -> Option<usize> {
        self.windex[i * self.n + j]
    }

    /// Nodes whose observations node `i` can read (always includes `i`).
    pub fn recv_set(&self, i: usize) -> &[usize] {
        &self.recv_sets[i]
    }

    /// Nodes that read node `j`'s observation (always includes `j`).
    pub fn send_set(&self, j: usize) -> &[usize] {
        &self.send_sets[j]
    }

    /// True when every link of `self` is also a link of `other`.
    pub fn is_subtopology_of(&self, other: &Topology) -> bool {
        self.n == other.n
            && self
                .links
                .iter()
                .all(|&(i, j)| other.contains(i, j))
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if self.adj[i * self.n + j] {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// Scatters an embedded coefficient vector back into a sparse weight matrix.
pub fn lift(coeffs: &DVector<f64>, topology: &Topology) -> Result<CollaborationMatrix> {
    if coeffs.len() != topology.num_weights() {
        return Err(Error::DimensionMismatch {
            context: "embedded coefficient vector",
            expected: topology.num_weights(),
            got: coeffs.len(),
        });
    }
    if !coeffs.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter(
            "embedded coefficients must be finite".into(),
        ));
    }
    let n = topology.n_sensors();
    let mut w = DMatrix::zeros(n, n);
    for (ell, &(i, j)) in topology.links().iter().enumerate() {
        w[(i, j)] = coeffs[ell];
    }
    CollaborationMatrix::new(w, topology.clone())
}

/// Collects the allowed entries of a weight matrix into embedding order.
/// Rejects nonzero entries outside the pattern.
pub fn flatten(weights: &DMatrix<f64>, topology: &Topology) -> Result<DVector<f64>> {
    let n = topology.n_sensors();
    if weights.nrows() != n || weights.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "weight matrix",
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
    let mut coeffs = DVector::zeros(topology.num_weights());
    for (ell, &(i, j)) in topology.links().iter().enumerate() {
        coeffs[ell] = weights[(i, j)];
    }
    Ok(coeffs)
}

/// Per-node factor of `Omega`: the block `V[F_k]` for receiving node `k`,
/// its Cholesky factor, and where its coefficients sit in the embedding.
#[derive(Debug, Clone)]
struct ReceiveBlock {
    windices: Vec<usize>,
    members: Vec<usize>,
    quad: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

/// Keep a dense mirror of `Omega` only while it stays comfortably small;
/// all computational paths go through the per-node blocks either way.
const DENSE_OMEGA_LIMIT: usize = 4096;

/// A topology bound to a concrete model and channel, with the embedding
/// operators in factored form. Immutable after construction.
#[derive(Debug, Clone)]
pub struct EmbeddedProblem {
    topology: Topology,
    second_moment: DMatrix<f64>,
    channel_gains: DVector<f64>,
    blocks: Vec<ReceiveBlock>,
    omega: Option<DMatrix<f64>>,
    gram: DMatrix<f64>,
    gamma: DMatrix<f64>,
}

/// Builds the embedded quadratic forms for `topology` under `model` and
/// `channel`, verifying the two defining identities on a random vector
/// before returning.
pub fn embed(
    topology: &Topology,
    model: &ObservationModel,
    channel: &ChannelModel,
) -> Result<EmbeddedProblem> {
    let n = topology.n_sensors();
    if model.n_sensors() != n {
        return Err(Error::DimensionMismatch {
            context: "embedding observation model",
            expected: n,
            got: model.n_sensors(),
        });
    }
    if channel.n_sensors() != n {
        return Err(Error::DimensionMismatch {
            context: "embedding channel model",
            expected: n,
            got: channel.n_sensors(),
        });
    }

    let v = model.second_moment();
    let mut blocks = Vec::with_capacity(n);
    for k in 0..n {
        let members = topology.recv_set(k).to_vec();
        let m = members.len();
        let quad = DMatrix::from_fn(m, m, |a, b| v[(members[a], members[b])]);
        let chol = Cholesky::new(quad.clone()).ok_or(Error::NotPositiveDefinite {
            context: "embedded power block",
        })?;
        let windices = members
            .iter()
            .map(|&j| topology.weight_index(k, j).expect("member of recv set"))
            .collect();
        blocks.push(ReceiveBlock {
            windices,
            members,
            quad,
            chol,
        });
    }

    let g = channel.gains();
    let mut gram = DMatrix::zeros(n, n);
    for (k, block) in blocks.iter().enumerate() {
        let gk2 = g[k] * g[k];
        if gk2 == 0.0 {
            continue;
        }
        let inv = block.chol.inverse();
        for (a, &ja) in block.members.iter().enumerate() {
            for (b, &jb) in block.members.iter().enumerate() {
                gram[(ja, jb)] += gk2 * inv[(a, b)];
            }
        }
    }

    let gamma = match Cholesky::new(gram.clone()) {
        Some(chol) => chol.inverse(),
        None => {
            let eig = SymmetricEigen::new(gram.clone());
            let mut min_idx = 0;
            for i in 1..n {
                if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
                    min_idx = i;
                }
            }
            return Err(Error::SingularGram {
                null_direction: eig.eigenvectors.column(min_idx).iter().copied().collect(),
            });
        }
    };

    let num_weights = topology.num_weights();
    let omega = (num_weights <= DENSE_OMEGA_LIMIT).then(|| {
        let mut omega = DMatrix::zeros(num_weights, num_weights);
        for block in &blocks {
            for (a, &p) in block.windices.iter().enumerate() {
                for (b, &q) in block.windices.iter().enumerate() {
                    omega[(p, q)] = block.quad[(a, b)];
                }
            }
        }
        omega
    });

    let problem = EmbeddedProblem {
        topology: topology.clone(),
        second_moment: v,
        channel_gains: g.clone(),
        blocks,
        omega,
        gram,
        gamma,
    };
    problem.self_check(model, channel)?;
    Ok(problem)
}

impl EmbeddedProblem {
    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn n_sensors(&self) -> usize {
        self.topology.n_sensors()
    }

    pub fn num_weights(&self) -> usize {
        self.topology.num_weights()
    }

    /// Observation second moment `V` the power form is built from.
    pub fn second_moment(&self) -> &DMatrix<f64> {
        &self.second_moment
    }

    pub fn channel_gains(&self) -> &DVector<f64> {
        &self.channel_gains
    }

    /// Dense `Omega`, present only for small embeddings.
    pub fn omega(&self) -> Option<&DMatrix<f64>> {
        self.omega.as_ref()
    }

    /// Gram matrix `G' Omega^-1 G`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Inverse gram matrix; the effective extra noise covariance the
    /// collaboration topology imposes per unit of channel signal-to-noise.
    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    /// Dense `G` (num_weights x n), built on demand.
    pub fn channel_matrix(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.num_weights(), self.n_sensors());
        for (ell, &(i, j)) in self.topology.links().iter().enumerate() {
            g[(ell, j)] = self.channel_gains[i];
        }
        g
    }

    /// Quadratic form `w' Omega w`, evaluated blockwise.
    pub fn omega_quad(&self, coeffs: &DVector<f64>) -> f64 {
        assert_eq!(coeffs.len(), self.num_weights(), "coefficient length");
        let mut total = 0.0;
        for block in &self.blocks {
            let m = block.windices.len();
            let local = DVector::from_fn(m, |a, _| coeffs[block.windices[a]]);
            total += local.dot(&(&block.quad * &local));
        }
        total
    }

    /// Matrix-vector product `Omega w`, evaluated blockwise.
    pub fn omega_mul(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        assert_eq!(coeffs.len(), self.num_weights(), "coefficient length");
        let mut out = DVector::zeros(self.num_weights());
        for block in &self.blocks {
            let m = block.windices.len();
            let local = DVector::from_fn(m, |a, _| coeffs[block.windices[a]]);
            let prod = &block.quad * local;
            for (a, &p) in block.windices.iter().enumerate() {
                out[p] = prod[a];
            }
        }
        out
    }

    /// Solves `Omega x = rhs` using the per-block Cholesky factors.
    pub fn solve_omega(&self, rhs: &DVector<f64>) -> DVector<f64> {
        assert_eq!(rhs.len(), self.num_weights(), "right-hand side length");
        let mut out = DVector::zeros(self.num_weights());
        for block in &self.blocks {
            let m = block.windices.len();
            let local = DVector::from_fn(m, |a, _| rhs[block.windices[a]]);
            let sol = block.chol.solve(&local);
            for (a, &p) in block.windices.iter().enumerate() {
                out[p] = sol[a];
            }
        }
        out
    }

    /// `G' w`: the effective per-sensor combining vector `W' g` seen by the
    /// channel, computed from embedded coefficients.
    pub fn channel_combine(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        assert_eq!(coeffs.len(), self.num_weights(), "coefficient length");
        let mut out = DVector::zeros(self.n_sensors());
        for (ell, &(i, j)) in self.topology.links().iter().enumerate() {
            out[j] += self.channel_gains[i] * coeffs[ell];
        }
        out
    }

    /// `G x`: adjoint of [`EmbeddedProblem::channel_combine`].
    pub fn channel_expand(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.n_sensors(), "sensor vector length");
        let mut out = DVector::zeros(self.num_weights());
        for (ell, &(i, j)) in self.topology.links().iter().enumerate() {
            out[ell] = self.channel_gains[i] * x[j];
        }
        out
    }

    /// Verifies `w' Omega w = Tr[W V W']` and `G' w = W' g` on one random
    /// vector against straightforward dense evaluation.
    fn self_check(&self, model: &ObservationModel, channel: &ChannelModel) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0e3b_ed01);
        let coeffs =
            DVector::from_fn(self.num_weights(), |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let w = lift(&coeffs, &self.topology)?;

        let quad = self.omega_quad(&coeffs);
        let wv = w.weights() * model.second_moment();
        let trace = wv.component_mul(w.weights()).sum();
        if (quad - trace).abs() > 1e-10 * (1.0 + trace.abs()) {
            return Err(Error::EmbeddingCheck(format!(
                "power form mismatch: blockwise {quad} vs dense {trace}"
            )));
        }

        let combined = self.channel_combine(&coeffs);
        let direct = w.weights().transpose() * channel.gains();
        let diff = (&combined - &direct).norm();
        if diff > 1e-10 * (1.0 + direct.norm()) {
            return Err(Error::EmbeddingCheck(format!(
                "combining mismatch: |G'w - W'g| = {diff}"
            )));
        }
        Ok(())
    }
}
