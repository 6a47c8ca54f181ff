//! Acceptance criteria, run in sequence so that the reported runtimes are not
//! inflated by each other. Prints one `criterion N` line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use heatctl::linalg::{is_hurwitz, is_positive_definite};
use heatctl::lmi::{assemble_psi, max_h, LmiVariables, PsiData, SearchOptions, PSI_TOL};
use heatctl::modal::{min_modes, ModalSystem, PlantParams};
use heatctl::residue_gain::{
    check_harmonic_condition, gamma_harmonic, gamma_sobolev, harmonic_bound_holds,
};
use heatctl::riccati::{
    care_residual, gramian_solution_linear, solve_care_stabilizing, synthesize_gains,
    unstable_mode_count,
};
use heatctl::sim::{simulate_closed_loop, SimConfig};
use heatctl::synthesis::{max_sigma, min_feasible_n, synthesize};
use heatctl::GainMethod;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIGMA_ROW: [f64; 6] = [0.037, 0.193, 0.278, 0.327, 0.360, 0.382];
const GAMMA_ROW: [f64; 6] = [1.156, 0.427, 0.256, 0.183, 0.142, 0.116];

fn report(id: u32, name: &str, ok: bool, elapsed: Duration, limit: Duration, detail: String) -> bool {
    let ok = ok && elapsed < limit;
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!(
        "criterion {id} [{name}]: {verdict} ({detail}; {:.2} s of {} s)",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

fn top_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.max()
}

fn criterion_1_gamma_table() -> bool {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (i, (&s, &want)) in SIGMA_ROW.iter().zip(&GAMMA_ROW).enumerate() {
        let g = gamma_harmonic(0.1, s, i + 1).unwrap().gamma;
        worst = worst.max((g - want).abs());
    }
    report(
        1,
        "gamma table",
        worst <= 5e-4,
        start.elapsed(),
        Duration::from_secs(1),
        format!("max |gamma - table| = {worst:.2e}"),
    )
}

fn criterion_2_max_sigma() -> bool {
    let start = Instant::now();
    let found: Vec<f64> = (1..=6).map(|n| max_sigma(0.1, n, 1e-3).unwrap().sigma).collect();
    let worst = found
        .iter()
        .zip(&SIGMA_ROW)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let monotone = found.windows(2).all(|w| w[1] >= w[0]);
    report(
        2,
        "max sigma",
        worst <= 0.01 && monotone,
        start.elapsed(),
        Duration::from_secs(30),
        format!("sigma* = {found:.4?}, max err {worst:.2e}, nondecreasing {monotone}"),
    )
}

fn criterion_3_feasibility_thresholds() -> bool {
    let start = Instant::now();
    let harmonic = min_feasible_n(1.1, 0.0, GainMethod::Harmonic).unwrap();
    let sobolev = min_feasible_n(1.1, 0.0, GainMethod::Sobolev).unwrap();
    let ratios: Vec<f64> = (5..=25)
        .map(|n| {
            gamma_sobolev(1.1, 0.0, n).unwrap().gamma / gamma_harmonic(1.1, 0.0, n).unwrap().gamma
        })
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    report(
        3,
        "feasibility thresholds",
        harmonic == 7 && sobolev == 20 && lo >= 2.8 && hi <= 3.5,
        start.elapsed(),
        Duration::from_secs(30),
        format!("N harmonic {harmonic}, N sobolev {sobolev}, ratio in [{lo:.4}, {hi:.4}]"),
    )
}

fn criterion_4_gains() -> bool {
    let start = Instant::now();
    let r = synthesize(PlantParams::new(0.1, 0.2, 0.0).unwrap(), 3, GainMethod::Harmonic).unwrap();
    let elapsed = start.elapsed();
    let gains = r.result.controller().expect("feasible");
    let k: Vec<f64> = gains.k.iter().copied().collect();
    let l: Vec<f64> = gains.l.iter().copied().collect();
    let err_k = k
        .iter()
        .zip([1.33, -0.16, 0.06])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let err_l = l
        .iter()
        .zip([2.82, 0.01, 0.05])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    report(
        4,
        "gains",
        err_k <= 0.02 && err_l <= 0.02,
        elapsed,
        Duration::from_secs(1),
        format!("K = {k:.4?}, L = {l:.4?}"),
    )
}

fn criterion_5_sampling_bound() -> bool {
    let start = Instant::now();
    let r = synthesize(PlantParams::new(0.1, 0.2, 0.0).unwrap(), 3, GainMethod::Harmonic).unwrap();
    let gains = r.result.controller().expect("feasible");
    let reduced = ModalSystem::unchecked(PlantParams::new(0.08, 0.2, 0.0).unwrap(), 3);
    let data = PsiData::new(&reduced, &gains).unwrap();
    let res = max_h(&data, gains.y.as_ref(), 0.3, 1e-3, SearchOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let (lambda, definite) = match &res.certificate {
        Some(cert) => {
            let psi = assemble_psi(&data, cert.h, &cert.vars).unwrap();
            let LmiVariables { pz, pe, wz, we } = &cert.vars;
            let definite = [pz, pe, wz, we].iter().all(|m| is_positive_definite(m));
            (top_eigenvalue(&psi), definite)
        }
        None => (f64::INFINITY, false),
    };
    report(
        5,
        "sampling bound",
        (0.05..=0.15).contains(&res.h_star) && lambda <= PSI_TOL && definite,
        elapsed,
        Duration::from_secs(300),
        format!("h* = {:.5}, lambda_max(Psi) = {lambda:.3e}", res.h_star),
    )
}

fn criterion_6_closed_loop_decay() -> bool {
    let params = PlantParams::new(0.1, 0.2, 0.0).unwrap();
    let sys = ModalSystem::new(params, 3).unwrap();
    let design = synthesize(params, 3, GainMethod::Harmonic).unwrap().result;

    let mut ok = true;
    let mut details = Vec::new();
    let mut slowest = Duration::ZERO;
    for h in [0.0, 0.1] {
        let start = Instant::now();
        let trace = simulate_closed_loop(&sys, &design, &SimConfig { h, ..Default::default() })
            .unwrap();
        slowest = slowest.max(start.elapsed());
        let ratio = trace.state_norm.last().unwrap() / trace.state_norm[0];
        let v = trace.v.as_ref().unwrap();
        ok &= ratio <= 1e-2 && v.last().unwrap() <= &v[0];
        if h == 0.0 {
            let worst = v
                .windows(2)
                .map(|w| (w[1] - w[0]) / (1.0 + w[0]))
                .fold(f64::NEG_INFINITY, f64::max);
            ok &= worst <= 1e-6;
            details.push(format!("h=0: decay {ratio:.3e}, max dV/(1+V) {worst:.2e}"));
        } else {
            details.push(format!("h=0.1: decay {ratio:.3e}"));
        }
    }
    // the transient, recorded at every integrator step
    let early = simulate_closed_loop(
        &sys,
        &design,
        &SimConfig { horizon: 0.2, ..Default::default() },
    )
    .unwrap();
    let v = early.v.as_ref().unwrap();
    let worst = v
        .windows(2)
        .map(|w| (w[1] - w[0]) / (1.0 + w[0]))
        .fold(f64::NEG_INFINITY, f64::max);
    ok &= early.len() == 2001 && worst <= 1e-6;
    details.push(format!("per-step on [0, 0.2]: max dV/(1+V) {worst:.2e}"));
    report(6, "closed-loop decay", ok, slowest, Duration::from_secs(30), details.join(", "))
}

fn fuzz_harmonic_inequality(rng: &mut ChaCha8Rng) -> (usize, bool) {
    let mut violations = 0;
    for i in 0..10_000 {
        let mu: Vec<f64> = if i % 2 == 0 {
            let len = rng.random_range(1..40);
            let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..10.0)).collect();
            let budget = rng.random_range(0.5..1.0) / raw.iter().sum::<f64>();
            raw.iter().map(|r| 1.0 / (r * budget)).collect()
        } else {
            let q = rng.random_range(0.01..3.0);
            let sigma = rng.random_range(0.0..0.5);
            let n = min_modes(&PlantParams::new(q, sigma, 0.0).unwrap()) + rng.random_range(0..4);
            let g = gamma_harmonic(q, sigma, n).unwrap();
            (n..n + rng.random_range(1..60)).map(|k| g.mu(k)).collect()
        };
        assert!(check_harmonic_condition(&mu).unwrap());
        let z: Vec<f64> = mu.iter().map(|_| rng.random_range(-5.0..5.0)).collect();
        if !harmonic_bound_holds(&z, &mu).unwrap() {
            violations += 1;
        }
    }
    let mu = [2.0, 4.0, 5.0, 10.0, 20.0, 20.0];
    let z: Vec<f64> = mu.iter().map(|m| 1.0 / m).collect();
    let witness = !check_harmonic_condition(&mu).unwrap() && !harmonic_bound_holds(&z, &mu).unwrap();
    (violations, witness)
}

fn riccati_instances(rng: &mut ChaCha8Rng) -> (usize, f64, bool) {
    let (mut checked, mut worst, mut hurwitz) = (0, 0.0f64, true);
    while checked < 100 {
        let q = rng.random_range(0.02..3.0);
        let sigma = rng.random_range(0.0..0.4);
        let lo = min_modes(&PlantParams::new(q, sigma, 0.0).unwrap());
        if lo > 6 {
            continue;
        }
        let n = rng.random_range(lo..=6);
        let sys = ModalSystem::new(PlantParams::new(q, sigma, 0.0).unwrap(), n).unwrap();
        let gamma = gamma_harmonic(q, sigma, n).unwrap().gamma;
        let res = synthesize_gains(&sys, sigma, gamma).unwrap();
        if sigma == 0.0 || !res.feasible() {
            continue;
        }
        let eye = DMatrix::<f64>::identity(n, n);
        let rx = &sys.b_mat * sys.b_mat.transpose() - &eye * (gamma * sigma);
        let rz = sys.c_mat.transpose() * &sys.c_mat - &eye * (gamma * sigma);
        let qw = &eye * (sigma / gamma);
        let x = res.x.as_ref().unwrap();
        let z = res.z.as_ref().unwrap();
        let at = sys.a.transpose();
        worst = worst
            .max(care_residual(&sys.a, &rx, &qw, x).norm() / (1.0 + x.norm()))
            .max(care_residual(&at, &rz, &qw, z).norm() / (1.0 + z.norm()));
        hurwitz &= is_hurwitz(&(&sys.a - &rx * x), 0.0) && is_hurwitz(&(&at - &rz * z), 0.0);
        checked += 1;
    }
    (checked, worst, hurwitz)
}

fn gramian_agreement() -> f64 {
    let mut worst: f64 = 0.0;
    for (q, n0) in [(0.5, 1usize), (1.5, 2), (5.0, 3)] {
        assert_eq!(unstable_mode_count(q), n0);
        let (x0, z0) = gramian_solution_linear(q, n0).unwrap();
        let n = n0 + 2;
        let sys = ModalSystem::new(PlantParams::new(q, 0.0, 0.0).unwrap(), n).unwrap();
        let zero = DMatrix::zeros(n, n);
        let x = solve_care_stabilizing(&sys.a, &(&sys.b_mat * sys.b_mat.transpose()), &zero)
            .unwrap();
        let z = solve_care_stabilizing(&sys.a, &(sys.c_mat.transpose() * &sys.c_mat), &zero)
            .unwrap();
        let pad = |m: &DMatrix<f64>| {
            let mut p = DMatrix::zeros(n, n);
            p.view_mut((0, 0), (n0, n0)).copy_from(m);
            p
        };
        worst = worst.max((pad(&x0) - x).norm()).max((pad(&z0) - z).norm());
    }
    worst
}

fn telescoping() -> f64 {
    let mut worst: f64 = 0.0;
    for iq in 0..5 {
        for is in 0..5 {
            for n in 2..=5 {
                let (q, sigma) = (0.05 + 0.7 * iq as f64, 0.08 * is as f64);
                let step = 2.0 / PI / ((n * n) as f64 - q - sigma);
                let cur = gamma_harmonic(q, sigma, n).unwrap().gamma;
                let next = gamma_harmonic(q, sigma, n + 1).unwrap().gamma;
                worst = worst.max((cur - next - step).abs());
            }
        }
    }
    worst
}

fn zero_structure() -> f64 {
    let mut worst: f64 = 0.0;
    for (q, n) in [(0.1, 3usize), (1.1, 7), (0.1, 5), (1.1, 9)] {
        let sys = ModalSystem::new(PlantParams::new(q, 0.0, 0.0).unwrap(), n).unwrap();
        let gamma = gamma_harmonic(q, 0.0, n).unwrap().gamma;
        let res = synthesize_gains(&sys, 0.0, gamma).unwrap();
        let (k, l) = (res.k.unwrap(), res.l.unwrap());
        for i in unstable_mode_count(q)..n {
            worst = worst.max(k[(0, i)].abs()).max(l[(i, 0)].abs());
        }
    }
    worst
}

fn convexity(rng: &mut ChaCha8Rng) -> f64 {
    let r = synthesize(PlantParams::new(0.1, 0.2, 0.0).unwrap(), 3, GainMethod::Harmonic).unwrap();
    let gains = r.result.controller().unwrap();
    let reduced = ModalSystem::unchecked(PlantParams::new(0.08, 0.2, 0.0).unwrap(), 3);
    let data = PsiData::new(&reduced, &gains).unwrap();
    let pd = |rng: &mut ChaCha8Rng| {
        let g = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        &g * g.transpose() + DMatrix::identity(3, 3) * 0.1
    };
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let v1 = LmiVariables { pz: pd(rng), pe: pd(rng), wz: pd(rng), we: pd(rng) };
        let v2 = LmiVariables { pz: pd(rng), pe: pd(rng), wz: pd(rng), we: pd(rng) };
        let t = rng.random_range(0.0..1.0);
        let h = rng.random_range(0.0..0.2);
        let mix = LmiVariables {
            pz: &v1.pz * t + &v2.pz * (1.0 - t),
            pe: &v1.pe * t + &v2.pe * (1.0 - t),
            wz: &v1.wz * t + &v2.wz * (1.0 - t),
            we: &v1.we * t + &v2.we * (1.0 - t),
        };
        let f = |v: &LmiVariables| top_eigenvalue(&assemble_psi(&data, h, v).unwrap());
        worst = worst.max(f(&mix) - t * f(&v1) - (1.0 - t) * f(&v2));
    }
    worst
}

fn criterion_7_property_suites() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (violations, witness) = fuzz_harmonic_inequality(&mut rng);
    let (instances, residual, hurwitz) = riccati_instances(&mut rng);
    let gramian = gramian_agreement();
    let tele = telescoping();
    let zeros = zero_structure();
    let convex = convexity(&mut rng);
    let parts = [
        ("a", violations == 0 && witness, format!("{violations} violations, witness {witness}")),
        ("b", instances == 100 && residual <= 1e-8 && hurwitz, format!("residual {residual:.2e}, hurwitz {hurwitz}")),
        ("c", gramian <= 1e-6, format!("gramian gap {gramian:.2e}")),
        ("d", tele <= 1e-12, format!("telescoping {tele:.2e}")),
        ("e", zeros <= 1e-6, format!("tail gains {zeros:.2e}")),
        ("f", convex <= 1e-10, format!("convexity excess {convex:.2e}")),
    ];
    let ok = parts.iter().all(|p| p.1);
    let detail = parts
        .iter()
        .map(|(id, pass, d)| format!("({id}) {} {d}", if *pass { "ok" } else { "FAILED" }))
        .collect::<Vec<_>>()
        .join(", ");
    report(7, "property suites", ok, start.elapsed(), Duration::from_secs(120), detail)
}

fn main() {
    let criteria: [fn() -> bool; 7] = [
        criterion_1_gamma_table,
        criterion_2_max_sigma,
        criterion_3_feasibility_thresholds,
        criterion_4_gains,
        criterion_5_sampling_bound,
        criterion_6_closed_loop_decay,
        criterion_7_property_suites,
    ];
    let failed = criteria.iter().filter(|c| !c()).count();
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
