use std::sync::Arc;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use qvac::bogoliubov::{dress_closed, dressed_ops_closed, generator, SqueezeSet};
use qvac::entangle::wn_analytic;
use qvac::fock::{commutator, exp_apply, inner, partial_trace, FockSpace, ModeId, Operator, Sector, StateVector};
use qvac::hopf::{q_number, DoubledSpace, Ladder, QParam};
use qvac::thermo::{bose_einstein, free_energy_closed, stationary_epsilon, ThermoParams};

fn modes(n: usize) -> Vec<ModeId> {
    (0..n as i64).map(|k| ModeId::particle(k, Sector::Plus)).collect()
}

fn random_state(space: &Arc<FockSpace>, seed: &[f64]) -> StateVector {
    let amps = (0..space.dim())
        .map(|i| {
            let x = seed[i % seed.len()] + 0.37 * i as f64;
            C64::new(x.sin(), (1.7 * x).cos())
        })
        .collect();
    StateVector::from_amplitudes(space, amps).unwrap().normalized()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_round_trip(cutoffs in prop::collection::vec(1usize..6, 1..5)) {
        let s = FockSpace::new(modes(cutoffs.len()), cutoffs).unwrap();
        prop_assume!(s.dim() <= 10_000);
        for i in 0..s.dim() {
            prop_assert_eq!(s.index_of(&s.occupations(i)).unwrap(), i);
        }
    }

    #[test]
    fn ccr_holds_below_the_cutoff(cutoffs in prop::collection::vec(1usize..7, 1..4), pick in 0usize..3) {
        let s = FockSpace::new(modes(cutoffs.len()), cutoffs).unwrap();
        let m = s.modes()[pick % s.n_modes()];
        let a = Operator::annihilation(&s, &m).unwrap();
        let ad = Operator::creation(&s, &m).unwrap();
        prop_assert_eq!(&ad, &a.adjoint());
        let mask = s.safe_mask(1, Some(&[m])).unwrap();
        let defect = commutator(&a, &ad).unwrap().max_abs_diff_on(&Operator::identity(&s), &mask).unwrap();
        prop_assert!(defect < 1e-12);
    }

    #[test]
    fn q_number_symmetries(x in -4.0f64..4.0, q in 0.05f64..20.0) {
        let qp = QParam::from_q(q).unwrap();
        let scale = q_number(x, qp).abs().max(1.0);
        prop_assert!((q_number(-x, qp) + q_number(x, qp)).abs() <= 1e-12 * scale);
        prop_assert!((q_number(x, qp.inverse()) - q_number(x, qp)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn deformed_coproduct_homomorphism(eps in -1.0f64..1.0) {
        let base = FockSpace::uniform(modes(1), 6).unwrap();
        let d = DoubledSpace::new(&base).unwrap();
        let q = QParam::from_epsilon(eps).unwrap();
        let m = base.modes()[0];
        let a = d.coproduct_deformed(q, &m, Ladder::Annihilation).unwrap();
        prop_assert_eq!(&d.coproduct_deformed(q, &m, Ladder::Creation).unwrap(), &a.adjoint());
        let mask = d.space().safe_mask(1, None).unwrap();
        let want = Operator::identity(d.space()).scale_real(q_number(2.0, q));
        prop_assert!(commutator(&a, &a.adjoint()).unwrap().max_abs_diff_on(&want, &mask).unwrap() < 1e-10);
    }

    #[test]
    fn unitary_evolution_preserves_norm(eps in -0.8f64..0.8, seed in prop::collection::vec(-3.0f64..3.0, 4)) {
        let set = SqueezeSet::single(0, eps);
        let s = set.space(12).unwrap();
        let g = generator(&s, &set).unwrap();
        let v = random_state(&s, &seed);
        let (w, rep) = exp_apply(&g, &v, 1e-12).unwrap();
        prop_assert!((w.norm() - v.norm()).abs() <= 1e-12 + rep.leaked_norm);
    }

    #[test]
    fn partial_trace_keeps_the_norm(seed in prop::collection::vec(-3.0f64..3.0, 5), keep in 0usize..3) {
        let s = FockSpace::new(modes(3), vec![2, 3, 1]).unwrap();
        let v = random_state(&s, &seed);
        let rho = partial_trace(&v, &[s.modes()[keep]]).unwrap();
        prop_assert!((rho.trace().re - inner(&v, &v).unwrap().re).abs() < 1e-12);
        prop_assert!(rho.trace().im.abs() < 1e-12);
    }

    #[test]
    fn dressing_preserves_ccr_and_composes(e1 in -1.0f64..1.0, e2 in -1.0f64..1.0) {
        let set = SqueezeSet::single(0, e1);
        let s = set.space(8).unwrap();
        let mask = s.safe_mask(2, None).unwrap();
        let ops = &dressed_ops_closed(&s, &set).unwrap()[0];
        let id = Operator::identity(&s);
        prop_assert!(commutator(&ops.d, &ops.d_dag()).unwrap().max_abs_diff_on(&id, &mask).unwrap() < 1e-10);
        let (d2, _) = dress_closed(&ops.d, &ops.dbar(), e2).unwrap();
        let both = &dressed_ops_closed(&s, &set.with_epsilons(|_| e1 + e2).unwrap()).unwrap()[0];
        prop_assert!(d2.max_abs_diff(&both.d).unwrap() < 1e-10);
    }

    #[test]
    fn wn_normalization(eps in 0.01f64..1.5, n in 0usize..30) {
        let t = wn_analytic(&SqueezeSet::single(0, eps), n);
        prop_assert!((t.total() + t.tail_bound - 1.0).abs() < 1e-10);
        let r = eps.tanh().powi(2);
        for w in t.aggregated.windows(2) {
            prop_assert!(w[1] < w[0]);
            prop_assert!((w[1] / w[0] - r).abs() < 1e-12);
        }
    }

    #[test]
    fn stationarity_recovers_bose_einstein(beta in 0.1f64..6.0, omega in 0.2f64..3.0) {
        let tp = ThermoParams::new(beta, omega).unwrap();
        let e = stationary_epsilon(tp).unwrap();
        prop_assert!((e.sinh().powi(2) - bose_einstein(tp).unwrap()).abs() < 1e-8);
        prop_assert_eq!(free_energy_closed(e, tp), free_energy_closed(-e, tp));
    }
}
