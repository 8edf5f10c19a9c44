use num_complex::Complex64 as C64;
use proptest::prelude::*;

use sagnac_qfim::generators::{Condition, ConditionPreset};
use sagnac_qfim::oracle::{analytic_unitary, unitarity_defect, TruncatedBasis};
use sagnac_qfim::qfim::{assemble_qfim, classify_scaling, commutator_on, prefactors, Scaling};
use sagnac_qfim::states::{InputEnsemble, MotionalState};
use sagnac_qfim::time_integrals::QuadratureConfig;

fn preset() -> impl Strategy<Value = ConditionPreset> {
    (any::<bool>(), 0u32..4, 0.3f64..3.0, 0.01f64..1.0, 0.3f64..1.5).prop_map(|(first, kappa, w0, big, mu)| {
        let which = if first { Condition::I } else { Condition::II };
        ConditionPreset::new(which, kappa.max(first as u32), w0, big, mu).unwrap()
    })
}

fn amplitude() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| C64::new(re, im))
}

fn vector_state() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(amplitude(), 6).prop_filter_map("nonzero", |mut v| {
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-3 {
            return None;
        }
        v.iter_mut().for_each(|c| *c /= norm);
        v.extend([C64::new(0.0, 0.0); 3]);
        Some(v)
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn qfim_is_positive_semidefinite(p in preset(), a in amplitude(), b in amplitude(), n in 1u32..30) {
        let ens = InputEnsemble::new(MotionalState::Coherent(a), MotionalState::Coherent(b), n).unwrap();
        let q = assemble_qfim(&ens, &p.coeffs());
        let scale = q.max_abs();
        prop_assert!(q.f_ww >= -1e-12 * scale);
        prop_assert!(q.f_rr >= -1e-12 * scale);
        prop_assert!(q.det() >= -1e-10 * scale * scale);
    }

    #[test]
    fn relative_branch_phase_is_irrelevant(p in preset(), up in vector_state(), down in vector_state(), chi in 0.0f64..6.3) {
        let c = p.coeffs();
        let rotated: Vec<C64> = down.iter().map(|z| z * C64::from_polar(1.0, chi)).collect();
        let q1 = assemble_qfim(&InputEnsemble::new(MotionalState::Vector(up.clone()), MotionalState::Vector(down), 3).unwrap(), &c);
        let q2 = assemble_qfim(&InputEnsemble::new(MotionalState::Vector(up), MotionalState::Vector(rotated), 3).unwrap(), &c);
        let scale = q1.max_abs();
        prop_assert!((q1.f_ww - q2.f_ww).abs() <= 1e-12 * scale);
        prop_assert!((q1.f_rr - q2.f_rr).abs() <= 1e-12 * scale);
        prop_assert!((q1.f_wr - q2.f_wr).abs() <= 1e-12 * scale);
    }

    #[test]
    fn variance_is_quadratic_in_particle_number(p in preset(), a in amplitude(), n in 1u32..40) {
        let c = p.coeffs();
        let ens = InputEnsemble::new(MotionalState::Coherent(a), MotionalState::Fock(2), n).unwrap();
        let pre = prefactors(&ens, &c);
        let q = assemble_qfim(&ens, &c);
        let nf = n as f64;
        prop_assert!(close(q.f_ww / 4.0, pre.a * nf + pre.b * nf * nf, 1e-11));
        prop_assert!(close(q.f_rr / 4.0, pre.c * nf + pre.d * nf * nf, 1e-11));
        prop_assert!(close(pre.det_combination(nf), q.det() / 16.0, 1e-8) || q.det().abs() < 1e-9 * q.max_abs().powi(2));
    }

    #[test]
    fn commutator_is_imaginary(p in preset(), a in amplitude(), b in amplitude()) {
        let ens = InputEnsemble::new(MotionalState::Coherent(a), MotionalState::Coherent(b), 1).unwrap();
        prop_assert_eq!(commutator_on(&ens, &p.coeffs()).re, 0.0);
    }

    #[test]
    fn never_double_heisenberg(p in preset(), up in vector_state(), down in vector_state()) {
        let ens = InputEnsemble::new(MotionalState::Vector(up), MotionalState::Vector(down), 1).unwrap();
        let scaling = classify_scaling(&prefactors(&ens, &p.coeffs()), 100.0);
        prop_assert_ne!(scaling, (Scaling::HL, Scaling::HL));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn analytic_unitary_is_unitary(p in preset(), w in 0.5f64..1.5, big in 0.0f64..0.5) {
        let basis = TruncatedBasis::new(16, 1).unwrap();
        let u = analytic_unitary(&basis, &p.profile(), w * p.omega0, big, p.mu(), &QuadratureConfig::default()).unwrap();
        prop_assert!(unitarity_defect(&u) < 1e-8);
    }
}
