//! Property tests for the structural invariants: embedding round trips,
//! topology orderings, and the basic monotonicities of the figures of merit.

use cohest_core::instances::gen_equicorrelated_cov;
use cohest_core::model::{
    collaboration_cost, distortion_from_info, fisher_info, transmit_power, ChannelModel,
    CostMatrix, ObservationModel,
};
use cohest_core::solver::solve_info_for_power;
use cohest_core::topology::{embed, flatten, lift, Topology};
use nalgebra::{Cholesky, DMatrix, DVector};
use proptest::prelude::*;

fn arbitrary_topology() -> impl Strategy<Value = Topology> {
    (1usize..6, any::<u64>()).prop_map(|(n, mask)| {
        Topology::from_adjacency(n, |i, j| i == j || (mask >> ((i * n + j) % 64)) & 1 == 1)
            .unwrap()
    })
}

fn topology_with_coeffs() -> impl Strategy<Value = (Topology, Vec<f64>)> {
    arbitrary_topology().prop_flat_map(|topo| {
        let len = topo.num_weights();
        (
            Just(topo),
            proptest::collection::vec(-100.0..100.0f64, len),
        )
    })
}

fn diagonal_model(n: usize) -> (ObservationModel, ChannelModel) {
    let model = ObservationModel::new(
        1.0,
        DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64),
        DMatrix::from_fn(n, n, |i, j| if i == j { 0.5 + 0.05 * i as f64 } else { 0.0 }),
    )
    .unwrap();
    let channel = ChannelModel::new(
        DVector::from_fn(n, |i, _| 0.4 + 0.07 * i as f64),
        0.9,
    )
    .unwrap();
    (model, channel)
}

proptest! {
    #[test]
    fn flatten_inverts_lift((topo, coeffs) in topology_with_coeffs()) {
        let v = DVector::from_vec(coeffs);
        let w = lift(&v, &topo).unwrap();
        let back = flatten(w.weights(), &topo).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn lift_inverts_flatten((topo, coeffs) in topology_with_coeffs()) {
        let v = DVector::from_vec(coeffs);
        let w = lift(&v, &topo).unwrap();
        let again = lift(&flatten(w.weights(), &topo).unwrap(), &topo).unwrap();
        prop_assert_eq!(again.weights(), w.weights());
    }

    #[test]
    fn figures_of_merit_have_their_signs((topo, coeffs) in topology_with_coeffs()) {
        let n = topo.n_sensors();
        let (model, channel) = diagonal_model(n);
        let w = lift(&DVector::from_vec(coeffs), &topo).unwrap();
        let power = transmit_power(&w, &model).unwrap();
        let info = fisher_info(&w, &model, &channel).unwrap();
        prop_assert!(power >= 0.0);
        prop_assert!(info >= 0.0);
        let d = distortion_from_info(info, model.prior_var()).unwrap();
        prop_assert!(d > 0.0 && d <= model.prior_var());
    }

    #[test]
    fn cycles_nest_with_connectivity(n in 2usize..8, k in 0usize..7) {
        let k = k % n;
        let smaller = Topology::cycle(n, k).unwrap();
        for k2 in k..n {
            let larger = Topology::cycle(n, k2).unwrap();
            prop_assert!(smaller.is_subtopology_of(&larger));
        }
    }

    #[test]
    fn geometric_topologies_nest_with_radius(
        seed in 0u64..1000,
        r1 in 0.0..1.5f64,
        r2 in 0.0..1.5f64,
    ) {
        let spec = cohest_core::InstanceSpec { seed, n: 6, ..Default::default() };
        let positions = cohest_core::instances::gen_positions(&spec).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let inner = Topology::random_geometric(&positions, lo).unwrap();
        let outer = Topology::random_geometric(&positions, hi).unwrap();
        prop_assert!(inner.is_subtopology_of(&outer));
    }

    #[test]
    fn collaboration_cost_is_monotone_in_the_topology(
        n in 2usize..6,
        mask in any::<u64>(),
        cost in 0.0..10.0f64,
    ) {
        let sub = Topology::from_adjacency(n, |i, j| {
            i == j || (mask >> ((i * n + j) % 64)) & 1 == 1
        }).unwrap();
        let full = Topology::fully_connected(n).unwrap();
        let costs = CostMatrix::uniform(n, cost).unwrap();
        let c_sub = collaboration_cost(&sub, &costs).unwrap();
        let c_full = collaboration_cost(&full, &costs).unwrap();
        prop_assert!(c_sub >= 0.0);
        prop_assert!(c_sub <= c_full + 1e-12);
    }

    #[test]
    fn equicorrelated_covariance_is_positive_definite(
        n in 1usize..8,
        sigma2 in 0.01..10.0f64,
        rho in 0.0..0.999f64,
    ) {
        let cov = gen_equicorrelated_cov(n, sigma2, rho).unwrap();
        prop_assert!(Cholesky::new(cov).is_some());
    }

    #[test]
    fn optimal_information_is_monotone_in_power(
        seed in 0u64..50,
        base in 0.01..10.0f64,
    ) {
        let spec = cohest_core::InstanceSpec {
            seed,
            n: 3,
            covariance: cohest_core::instances::Covariance::Diagonal { sigma2: 0.6 },
            ..Default::default()
        };
        let inst = cohest_core::realize(&spec).unwrap();
        let topo = Topology::cycle(3, 1).unwrap();
        let ep = embed(&topo, &inst.model, &inst.channel).unwrap();
        let lo = solve_info_for_power(&ep, &inst.model, &inst.channel, base).unwrap();
        let hi = solve_info_for_power(&ep, &inst.model, &inst.channel, base * 4.0).unwrap();
        prop_assert!(hi.info > lo.info);
        let ceiling = cohest_core::centralized_info(&inst.model).unwrap();
        prop_assert!(hi.info < ceiling);
    }
}
