use proptest::prelude::*;
use rdars_core::assignment::{assignment_cost, min_cost_assignment};
use rdars_core::channel::{steering_vector, ArrayKind};
use rdars_core::linalg::{CMat, CVec, RMat, C64};
use rdars_core::metrics::{radar_snr, selection_residual, user_sinr};
use rdars_core::optimizer::{align_unit_modulus, smallest_entries, update_auxiliary, update_receive_filter};
use rdars_core::scenario::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm};
use rdars_core::{assemble_composites, derive_geometry, synthesize_channels, RdarsState, SystemConfig};

fn complex() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn cvec(n: usize) -> impl Strategy<Value = CVec> {
    prop::collection::vec(complex(), n).prop_map(CVec::from_vec)
}

fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(complex(), rows * cols).prop_map(move |v| CMat::from_vec(rows, cols, v))
}

fn phases(n: usize) -> impl Strategy<Value = CVec> {
    prop::collection::vec(0.0..std::f64::consts::TAU, n)
        .prop_map(|t| CVec::from_iterator(t.len(), t.into_iter().map(|x| C64::from_polar(1.0, x))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_entries_are_unit_modulus(theta in -3.2..3.2f64, psi in -1.6..1.6f64, n1 in 1usize..6, n2 in 1usize..6, d in 0.1..1.0f64) {
        for kind in [ArrayKind::Ula { elements: n1 * n2 }, ArrayKind::Upa { rows: n1, cols: n2 }] {
            let a = steering_vector(kind, theta, psi, d).unwrap();
            prop_assert!(a.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-12));
        }
    }

    #[test]
    fn db_conversions_invert(x in -120.0..60.0f64) {
        prop_assert!((watts_to_dbm(dbm_to_watts(x)) - x).abs() <= 1e-9);
        prop_assert!((linear_to_db(db_to_linear(x)) - x).abs() <= 1e-9);
    }

    #[test]
    fn sinr_ignores_common_phase(h in cvec(3), f in cmat(3, 2), t in 0.0..6.3f64) {
        let h1 = vec![h.clone(), h.map(|z| z * 0.5)];
        let a = user_sinr(&h1, &f, &[1.0, 1.0]).unwrap();
        let b = user_sinr(&h1, &(&f * C64::from_polar(1.0, t)), &[1.0, 1.0]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x));
        }
    }

    #[test]
    fn radar_snr_is_invariant_to_filter_scale(h2 in cmat(3, 4), f in cmat(4, 2), w in cvec(3), c in 0.1..10.0f64) {
        prop_assume!(w.norm() > 1e-3);
        let a = radar_snr(&w, &h2, &f, 1.0, 1.0);
        let b = radar_snr(&(&w * C64::new(c, 0.0)), &h2, &f, 1.0, 1.0);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
    }

    #[test]
    fn receive_filter_maximizes_snr(h2 in cmat(3, 4), f in cmat(4, 2), w in cvec(3)) {
        prop_assume!(w.norm() > 1e-3 && (h2.adjoint() * &w).norm() > 0.0);
        let Ok(opt) = update_receive_filter(&h2, &f) else { return Ok(()); };
        prop_assert!(radar_snr(&opt, &h2, &f, 1.0, 1.0) >= radar_snr(&w, &h2, &f, 1.0, 1.0) * (1.0 - 1e-10));
    }

    #[test]
    fn aligned_phases_minimize_linear_form(q in cvec(5), other in phases(5)) {
        let phi = align_unit_modulus(&q, &other);
        prop_assert!(phi.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-12));
        prop_assert!(q.dotc(&phi).re <= q.dotc(&other).re + 1e-12);
    }

    #[test]
    fn smallest_entries_picks_count(values in prop::collection::vec(-5.0..5.0f64, 1..12), k in 0usize..12) {
        let k = k.min(values.len());
        let pick = smallest_entries(&values, k);
        prop_assert_eq!(pick.iter().filter(|&&p| p).count(), k);
        let worst_in = values.iter().zip(&pick).filter(|(_, p)| **p).map(|(v, _)| *v).fold(f64::NEG_INFINITY, f64::max);
        let best_out = values.iter().zip(&pick).filter(|(_, p)| !**p).map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
        prop_assert!(worst_in <= best_out);
    }

    #[test]
    fn assignment_beats_identity(cost in prop::collection::vec(-3.0..3.0f64, 2 * 5), ) {
        let m = RMat::from_row_slice(2, 5, &cost);
        let pick = min_cost_assignment(&m);
        prop_assert!(pick[0] != pick[1] && pick.iter().all(|&r| r < 5));
        for a in 0..5 {
            for b in 0..5 {
                if a != b {
                    prop_assert!(assignment_cost(&m, &pick) <= assignment_cost(&m, &[a, b]) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn auxiliary_update_meets_targets(h in cvec(3), g in cvec(3), f in cmat(3, 2), gamma in 0.1..10.0f64) {
        let h1 = vec![h, g];
        let aux = update_auxiliary(&h1, &f, &[gamma, gamma], &[1.0, 1.0]).unwrap();
        for k in 0..2 {
            prop_assert!(aux.mu[k] >= 0.0 && aux.mu[k] < 1.0);
            let interference: f64 = (0..2).filter(|&i| i != k).map(|i| aux.s[(k, i)].norm_sqr()).sum();
            prop_assert!(aux.s[(k, k)].norm_sqr() >= gamma * (interference + 1.0) * (1.0 - 1e-9));
        }
    }

    #[test]
    fn leading_state_is_consistent(n in 1usize..30, a in 0usize..30, phi in phases(30)) {
        let a = a.min(n);
        let st = RdarsState::leading(phi.rows(0, n).into_owned(), a);
        prop_assert!(st.is_consistent());
        prop_assert_eq!(selection_residual(&st), 0.0);
        prop_assert_eq!(st.connected_count(), a);
    }

    #[test]
    fn echo_channel_is_rank_one(seed in 0u64..1000, a in 0usize..4, phi in phases(24)) {
        let cfg = SystemConfig::desk();
        let g = derive_geometry(&cfg, &cfg.placement).unwrap();
        let ch = synthesize_channels(&cfg, &g, seed).unwrap();
        let comp = assemble_composites(&ch, &RdarsState::leading(phi, a)).unwrap();
        let sv = comp.h2.singular_values();
        prop_assert!(sv.len() < 2 || sv[1] <= 1e-10 * sv[0]);
    }
}
