use std::sync::OnceLock;

use heatctl::lmi::{
    assemble_psi, feasibility_search, max_h, stage1_minimum, CertStage, LmiVariables, MaxH,
    PsiData, SampledCert, SearchOptions, CERT_PD_MARGIN, PSI_TOL,
};
use heatctl::modal::{ModalSystem, PlantParams};
use heatctl::synthesis::synthesize;
use heatctl::{ControllerGains, GainMethod};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn design(q: f64, q_lmi: f64, sigma: f64, n: usize) -> (PsiData, ControllerGains) {
    let report = synthesize(PlantParams::new(q, sigma, 0.0).unwrap(), n, GainMethod::Harmonic)
        .unwrap();
    let gains = report.result.controller().expect("feasible design");
    let reduced = ModalSystem::unchecked(PlantParams::new(q_lmi, sigma, 0.0).unwrap(), n);
    (PsiData::new(&reduced, &gains).unwrap(), gains)
}

fn reported() -> &'static (PsiData, ControllerGains) {
    static CELL: OnceLock<(PsiData, ControllerGains)> = OnceLock::new();
    CELL.get_or_init(|| design(0.1, 0.08, 0.2, 3))
}

fn reported_max_h() -> &'static MaxH {
    static CELL: OnceLock<MaxH> = OnceLock::new();
    CELL.get_or_init(|| {
        let (data, gains) = reported();
        max_h(data, gains.y.as_ref(), 0.3, 1e-3, SearchOptions::default()).unwrap()
    })
}

fn top_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.max()
}

fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &g * g.transpose() + DMatrix::identity(n, n) * 0.1
}

fn random_vars(rng: &mut ChaCha8Rng, n: usize) -> LmiVariables {
    LmiVariables {
        pz: random_pd(rng, n),
        pe: random_pd(rng, n),
        wz: random_pd(rng, n),
        we: random_pd(rng, n),
    }
}

fn combine(a: &LmiVariables, b: &LmiVariables, t: f64) -> LmiVariables {
    LmiVariables {
        pz: &a.pz * t + &b.pz * (1.0 - t),
        pe: &a.pe * t + &b.pe * (1.0 - t),
        wz: &a.wz * t + &b.wz * (1.0 - t),
        we: &a.we * t + &b.we * (1.0 - t),
    }
}

fn revalidate(data: &PsiData, cert: &SampledCert) {
    let psi = assemble_psi(data, cert.h, &cert.vars).unwrap();
    assert!(top_eigenvalue(&psi) <= PSI_TOL);
    for m in [&cert.vars.pz, &cert.vars.pe, &cert.vars.wz, &cert.vars.we] {
        let ev = SymmetricEigen::new(m.clone()).eigenvalues;
        assert!(ev.min() > CERT_PD_MARGIN * ev.amax());
    }
}

#[test]
fn small_h_is_certified() {
    let (data, gains) = reported();
    let cert = feasibility_search(data, gains.y.as_ref(), 0.01, SearchOptions::default())
        .unwrap()
        .expect("certificate at h = 0.01");
    revalidate(data, &cert);
}

#[test]
fn long_sampling_period_has_no_certificate() {
    let (data, gains) = reported();
    let found = feasibility_search(data, gains.y.as_ref(), 10.0, SearchOptions::default()).unwrap();
    assert!(found.is_none());
}

#[test]
fn zero_sigma_warm_start_at_zero_h() {
    let (data, gains) = design(0.1, 0.08, 0.0, 1);
    assert!(!data.has_f_block());
    let cert = feasibility_search(&data, gains.y.as_ref(), 0.0, SearchOptions::default())
        .unwrap()
        .expect("warm start certificate");
    assert_eq!(cert.stage, CertStage::WarmStart);
    revalidate(&data, &cert);
}

#[test]
fn max_eigenvalue_is_convex() {
    let (data, _) = reported();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let v1 = random_vars(&mut rng, 3);
        let v2 = random_vars(&mut rng, 3);
        let t = rng.random_range(0.0..1.0);
        let h = rng.random_range(0.0..0.2);
        let f = |v: &LmiVariables| top_eigenvalue(&assemble_psi(data, h, v).unwrap());
        let mid = f(&combine(&v1, &v2, t));
        assert!(mid <= t * f(&v1) + (1.0 - t) * f(&v2) + 1e-10);
    }
}

#[test]
fn psi_is_symmetric_and_affine() {
    let (data, _) = reported();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let zero = assemble_psi(data, 0.07, &LmiVariables::zeros(3)).unwrap();
    for _ in 0..20 {
        let v1 = random_vars(&mut rng, 3);
        let v2 = random_vars(&mut rng, 3);
        let p1 = assemble_psi(data, 0.07, &v1).unwrap();
        let p2 = assemble_psi(data, 0.07, &v2).unwrap();
        assert_eq!((&p1 - p1.transpose()).norm(), 0.0);
        let scale = p1.norm() + p2.norm();
        // variable-dependent part is linear
        for t in [0.5, 2.0, 3.0] {
            let pt = assemble_psi(data, 0.07, &combine(&v1, &LmiVariables::zeros(3), t)).unwrap();
            assert!(((&pt - &zero) - (&p1 - &zero) * t).norm() <= 1e-12 * scale * t);
        }
        let sum = combine(&combine(&v1, &v2, 0.5), &LmiVariables::zeros(3), 2.0);
        let ps = assemble_psi(data, 0.07, &sum).unwrap();
        assert!(((&ps - &zero) - (&p1 - &zero) - (&p2 - &zero)).norm() <= 1e-12 * scale);
    }
}

#[test]
fn warm_start_minimum_grows_with_h() {
    let (data, gains) = reported();
    let values: Vec<f64> = (0..10)
        .map(|i| stage1_minimum(data, gains.y.as_ref(), 0.02 * i as f64, 60, 1).0)
        .collect();
    for w in values.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "{values:?}");
    }
}

#[test]
fn eliminated_block_matches_vanishing_sigma() {
    // compared where lambda_max > 0; with lambda_max < 0 the full path is
    // capped by the -gamma sigma eigenvalues of the nonlinearity block
    let (data, gains) = reported();
    let mut zero = data.clone();
    zero.sigma = 0.0;
    let mut tiny = data.clone();
    tiny.sigma = 1e-12;
    let eye = DMatrix::<f64>::identity(3, 3);
    let y = gains.y.clone().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for h in [0.0, 0.05, 0.3] {
        for vars in [
            LmiVariables { pz: gains.x.clone(), pe: y.clone(), wz: &eye * 10.0, we: &eye * 10.0 },
            random_vars(&mut rng, 3),
        ] {
            let a = top_eigenvalue(&assemble_psi(&zero, h, &vars).unwrap());
            let b = top_eigenvalue(&assemble_psi(&tiny, h, &vars).unwrap());
            if a > 0.0 {
                assert!((a - b).abs() <= 1e-6, "h={h}: {a} vs {b}");
            } else {
                assert!(b <= 1e-6 && b >= a - 1e-6);
            }
        }
    }
    assert_eq!(assemble_psi(&zero, 0.1, &LmiVariables::zeros(3)).unwrap().nrows(), 19);
}

#[test]
fn max_h_bracket_and_contract() {
    let (data, gains) = reported();
    let res = reported_max_h();
    assert!((0.05..=0.15).contains(&res.h_star), "{}", res.h_star);
    let cert = res.certificate.as_ref().unwrap();
    assert_eq!(cert.h, res.h_star);
    revalidate(data, cert);
    let half = feasibility_search(data, gains.y.as_ref(), res.h_star / 2.0, SearchOptions::default())
        .unwrap();
    assert!(half.is_some());
    let double = feasibility_search(data, gains.y.as_ref(), res.h_star * 2.0, SearchOptions::default())
        .unwrap();
    assert!(double.is_none());
}

#[test]
fn coarse_resolution_stays_within_tolerance() {
    let (data, gains) = reported();
    let coarse = max_h(data, gains.y.as_ref(), 0.3, 0.05, SearchOptions::default()).unwrap();
    assert!((coarse.h_star - reported_max_h().h_star).abs() <= 0.05);
}

#[test]
fn no_certificate_at_resolution_reports_zero() {
    let (data, gains) = reported();
    let opts = SearchOptions { budget: 0, ..Default::default() };
    let res = max_h(data, gains.y.as_ref(), 1.0, 0.5, opts).unwrap();
    assert_eq!(res.h_star, 0.0);
    assert!(res.diagnostic.is_some());
    assert!(max_h(data, gains.y.as_ref(), 0.1, 0.2, opts).is_err());
}
