use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use rotorkick::io;
use rotorkick::observables;
use rotorkick::propagator::{self, fbr_dvr_transform, Direction, PropagatorConfig};
use rotorkick::reduced;
use rotorkick::specfun::gauss_legendre;
use rotorkick::sudden;
use rotorkick::wavepacket::{NORM_TOLERANCE, TAIL_THRESHOLD};
use rotorkick::{InitialState, KickStrengths};

fn kicks() -> impl Strategy<Value = KickStrengths> {
    (0.0..10.0f64, 0.0..10.0f64).prop_map(|(a, b)| KickStrengths::new(a, b).unwrap())
}

fn initial_states() -> impl Strategy<Value = InitialState> {
    (0u32..4).prop_flat_map(|j0| (Just(j0), -(j0 as i32)..=j0 as i32)).prop_map(|(j0, m0)| InitialState::new(j0, m0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kicked_packets_are_certified(kick in kicks(), init in initial_states()) {
        let wp = sudden::kick_wavepacket_auto(init, kick).unwrap();
        prop_assert!(wp.certify(NORM_TOLERANCE, TAIL_THRESHOLD).is_ok());
        prop_assert_eq!(wp.m(), init.m0());
    }

    #[test]
    fn series_agrees_with_quadrature(kick in kicks()) {
        let s = sudden::phase_coeffs_series(kick, 40, 120).unwrap();
        let q = sudden::phase_coeffs_quadrature(kick, 40, &gauss_legendre(256).unwrap()).unwrap();
        for (a, b) in s.coeffs().iter().zip(q.coeffs()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn classical_energy_equals_quantum_energy(kick in kicks()) {
        let wp = sudden::kick_wavepacket_auto(InitialState::GROUND, kick).unwrap();
        let quantum = observables::kinetic_energy(&wp);
        let classical = reduced::classical_kick_energy(kick, &gauss_legendre(8).unwrap());
        prop_assert!((classical - quantum).abs() <= 1e-7 * quantum.max(1e-300) + 1e-14);
    }

    #[test]
    fn density_revives_and_stays_normalized(kick in kicks(), tau in 0.0..PI) {
        let wp = sudden::kick_wavepacket_auto(InitialState::GROUND, kick).unwrap();
        let c = observables::carpet_at(&wp, 96, &[tau, tau + PI]).unwrap();
        for row in &c.density {
            prop_assert!((row[0] - row[1]).abs() < 1e-10 * row[0].max(1.0));
        }
        prop_assert!((c.column_norm(0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn propagation_conserves_norm(p_eta in 0.0..3.0f64, p_zeta in 0.0..3.0f64, sigma in 0.05..0.5f64) {
        let kick = KickStrengths::new(p_eta, p_zeta).unwrap();
        let pulse = propagator::pulse_for_kicks(kick, sigma).unwrap();
        let cfg = PropagatorConfig::for_pulse(&pulse, 24).unwrap();
        let res = propagator::propagate(InitialState::GROUND, &pulse, &cfg).unwrap();
        prop_assert!(res.norm_defect_max < 1e-10);
        prop_assert!(res.final_state.norm_defect() < 1e-10);
    }

    #[test]
    fn basis_grid_round_trip(values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 17)) {
        let coeffs: Vec<Complex64> = values.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let rule = gauss_legendre(17).unwrap();
        let grid = fbr_dvr_transform(&coeffs, &rule, 16, Direction::Forward).unwrap();
        let back = fbr_dvr_transform(&grid, &rule, 16, Direction::Backward).unwrap();
        for (a, b) in coeffs.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn wavepacket_csv_is_lossless(kick in kicks(), init in initial_states()) {
        let wp = sudden::kick_wavepacket_auto(init, kick).unwrap();
        let info = io::WavepacketInfo::of(&wp);
        let text = io::wavepacket_table(&wp).as_str().to_owned();
        let back = io::parse_wavepacket(&text, Some(&info)).unwrap();
        prop_assert_eq!(back.coeffs(), wp.coeffs());
        prop_assert_eq!(back.m(), wp.m());
    }
}
