use heatctl::modal::PlantParams;
use heatctl::synthesis::{
    max_sigma, max_sigma_with, min_feasible_n, sigma_table, stability_constant, synthesize,
    SigmaOptions,
};
use heatctl::GainMethod;
use nalgebra::DMatrix;

fn feasible(q: f64, sigma: f64, n: usize, method: GainMethod) -> bool {
    synthesize(PlantParams::new(q, sigma, 0.0).unwrap(), n, method)
        .map(|r| r.feasible())
        .unwrap_or(false)
}

#[test]
fn too_few_modes_is_infeasible() {
    assert!(!feasible(1.1, 0.0, 6, GainMethod::Harmonic));
    assert!(feasible(1.1, 0.0, 7, GainMethod::Harmonic));
    assert!(!feasible(1.1, 0.0, 19, GainMethod::Sobolev));
    assert!(feasible(1.1, 0.0, 20, GainMethod::Sobolev));
}

#[test]
fn infeasible_design_carries_reason() {
    let r = synthesize(PlantParams::new(0.1, 0.5, 0.0).unwrap(), 1, GainMethod::Harmonic).unwrap();
    assert!(!r.feasible());
    assert!(r.reason().is_some());
    assert!(r.stability_constant().is_none());
}

#[test]
fn feasibility_persists_with_more_modes() {
    let sigmas = [0.0, 0.037, 0.1, 0.193, 0.278, 0.327, 0.36, 0.382];
    for &s in &sigmas {
        for n in 1..=6 {
            if feasible(0.1, s, n, GainMethod::Harmonic) {
                assert!(feasible(0.1, s, n + 1, GainMethod::Harmonic), "sigma={s} N={n}");
            }
        }
    }
}

#[test]
fn harmonic_needs_no_more_modes_than_sobolev() {
    for (q, s) in [(0.1, 0.0), (0.1, 0.2), (1.1, 0.0), (0.5, 0.1), (0.3, 0.05), (0.1, 0.25)] {
        let h = min_feasible_n(q, s, GainMethod::Harmonic).unwrap();
        let so = min_feasible_n(q, s, GainMethod::Sobolev).unwrap_or(usize::MAX);
        assert!(h <= so, "q={q} sigma={s}: {h} > {so}");
    }
    assert_eq!(min_feasible_n(0.1, 0.2, GainMethod::Harmonic).unwrap(), 3);
}

#[test]
fn shifted_reaction_is_folded_exactly() {
    for (q, a, s, n) in [(0.1, 0.05, 0.2, 3), (0.3, 0.7, 0.0, 4), (0.2, 0.9, 0.0, 7)] {
        let folded = synthesize(PlantParams::new(q, s, a).unwrap(), n, GainMethod::Harmonic).unwrap();
        let plain =
            synthesize(PlantParams::new(q + a, s, 0.0).unwrap(), n, GainMethod::Harmonic).unwrap();
        assert_eq!(folded.gain.gamma.to_bits(), plain.gain.gamma.to_bits());
        assert_eq!(folded.feasible(), plain.feasible());
        assert_eq!(folded.result.k, plain.result.k);
        assert_eq!(folded.result.l, plain.result.l);
        assert_eq!(folded.result.x, plain.result.x);
    }
}

#[test]
fn sigma_table_is_monotone() {
    let rows = sigma_table(0.1, 6, 1e-3, 2).unwrap();
    assert_eq!(rows.len(), 6);
    let expected = [0.037, 0.193, 0.278, 0.327, 0.360, 0.382];
    for (row, want) in rows.iter().zip(expected) {
        assert!((row.sigma - want).abs() <= 0.01, "{row:?}");
    }
    for w in rows.windows(2) {
        assert!(w[1].sigma >= w[0].sigma);
        assert!(w[1].gamma < w[0].gamma);
    }
}

#[test]
fn paranoid_search_agrees() {
    let opts = SigmaOptions { paranoid: true, ..Default::default() };
    let p = max_sigma_with(0.1, 3, opts).unwrap();
    assert!(p.diagnostic.is_none(), "{p:?}");
    assert_eq!(p.sigma, max_sigma(0.1, 3, 1e-3).unwrap().sigma);
}

#[test]
fn infeasible_at_resolution_returns_zero() {
    // N=1 with q close to the mode bound leaves no admissible sigma
    let s = max_sigma(0.9, 1, 1e-3).unwrap();
    assert_eq!(s.sigma, 0.0);
    assert!(s.diagnostic.is_some());
}

#[test]
fn stability_constant_bounds() {
    let r = synthesize(PlantParams::new(0.1, 0.2, 0.0).unwrap(), 3, GainMethod::Harmonic).unwrap();
    let m = r.stability_constant().unwrap();
    assert!(m.is_finite() && m >= 2.0);
    let x = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let y = DMatrix::identity(2, 2) * 3.0;
    assert!(stability_constant(&x, &y, 0.5).unwrap() >= 2.0);
}
