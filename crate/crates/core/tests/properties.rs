use std::f64::consts::PI;

use proptest::prelude::*;
use topophase::frame_transform::{conjugate, frame_unitary_3d, pure_gauge_potential, Angles};
use topophase::gauge_field::{a3d, field_strength, max_field_strength_norm, Point3};
use topophase::holonomy::{berry_phase_from_states, instantaneous_eigenstate, Branch};
use topophase::spin_algebra::{commutator, exp_hermitian, make_spin_operators, OperatorMatrix, SpinQuantum, SpinState};
use topophase::{phase_distance, wrap_angle, C64};

fn hermitian(dim: usize, entries: &[f64]) -> OperatorMatrix {
    let mut m = OperatorMatrix::zeros(dim);
    let mut it = entries.iter().copied().cycle();
    for i in 0..dim {
        m.0[(i, i)] = C64::new(it.next().unwrap(), 0.0);
        for j in i + 1..dim {
            let z = C64::new(it.next().unwrap(), it.next().unwrap());
            m.0[(i, j)] = z;
            m.0[(j, i)] = z.conj();
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn exponential_of_hermitian_is_unitary(
        dim in 1usize..=7,
        entries in prop::collection::vec(-3.0f64..3.0, 49),
        scale in -20.0f64..20.0,
    ) {
        let u = exp_hermitian(&hermitian(dim, &entries), scale).unwrap();
        prop_assert!(u.is_unitary(1e-10));
    }

    #[test]
    fn wrap_lands_in_half_open_interval(x in -1e4f64..1e4) {
        let w = wrap_angle(x);
        prop_assert!(w > -PI && w <= PI);
        prop_assert!(phase_distance(w, x) < 1e-9);
    }

    #[test]
    fn frame_conjugation_preserves_algebra(
        twice in 1u32..=6,
        theta in 0.05f64..3.09,
        phi in -10.0f64..10.0,
    ) {
        let s = make_spin_operators(SpinQuantum::from_twice(twice));
        let frame = frame_unitary_3d(&Angles { theta, phi }, &s);
        let x = conjugate(&s.sx, &frame).unwrap();
        let y = conjugate(&s.sy, &frame).unwrap();
        let z = conjugate(&s.sz, &frame).unwrap();
        let xy = commutator(&x, &y).unwrap();
        prop_assert!(xy.max_abs_diff(&z.scale_complex(C64::i())) < 1e-10);
    }

    #[test]
    fn berry_phase_is_gauge_invariant(
        theta in 0.2f64..2.9,
        phases in prop::collection::vec(-PI..PI, 128),
        minus in any::<bool>(),
    ) {
        let branch = if minus { Branch::Minus } else { Branch::Plus };
        let states: Vec<SpinState> = (0..128)
            .map(|k| instantaneous_eigenstate(2.0 * PI * k as f64 / 128.0, theta, branch, SpinQuantum::HALF).unwrap())
            .collect();
        let regauged: Vec<SpinState> = states.iter().zip(&phases).map(|(s, a)| s.scale_phase(*a)).collect();
        let a = berry_phase_from_states(&states).unwrap();
        let b = berry_phase_from_states(&regauged).unwrap();
        prop_assert!(phase_distance(a.raw, b.raw) < 1e-12);
    }

    #[test]
    fn closed_form_potential_is_pure_gauge(
        twice in 1u32..=3,
        r in 0.5f64..2.0,
        theta in 0.35f64..2.79,
        phi in -PI..PI,
    ) {
        let s = make_spin_operators(SpinQuantum::from_twice(twice));
        let p = Point3::from_spherical(r, theta, phi);
        let f = field_strength(&a3d(&s), &p, 1e-4).unwrap();
        prop_assert!(max_field_strength_norm(&f) < 1e-6);
        let oracle = pure_gauge_potential(|a| frame_unitary_3d(a, &s), &p, 1e-5).unwrap();
        let closed = a3d(&s).eval(&p).unwrap();
        for (o, c) in oracle.iter().zip(&closed) {
            prop_assert!(o.max_abs_diff(c) < 1e-6);
        }
    }
}
