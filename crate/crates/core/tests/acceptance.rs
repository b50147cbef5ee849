//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use halfform::algebra::{
    convolve, convolve_quadrature, kernel_trace, matrix_unit, required_quadrature_order,
    AlgebraElement,
};
use halfform::character::{
    character_series, degeneracy_closed_form, direct_trace_character, regularized_character,
};
use halfform::check::{
    random_element, random_point, random_point_in_ball, random_state, random_tangent,
};
use halfform::groupoid::{lambda_eval, lifted_rotation, Arrow, ArrowTangent};
use halfform::phase_space::{build_quadrature, exterior_derivative_check, symplectic_form};
use halfform::polarization::{
    annihilation_residual, annihilation_residual_of, evolve, hamiltonian_apply,
    holomorphic_divergence_fd, PolarizedState,
};
use halfform::{MultiIndex, PhaseSpaceConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_2026;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn space(n: usize, hbar: f64) -> PhaseSpaceConfig {
    PhaseSpaceConfig::new(n, hbar).unwrap()
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let elapsed = start.elapsed();
    v.detail = format!("{}; {:.3}s", v.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed >= limit {
            v.passed = false;
            v.detail = format!("{} exceeds {:.0}s", v.detail, limit.as_secs_f64());
        }
    }
    v
}

fn spectrum_law() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=3 {
        for hbar in [1.0, 0.5] {
            let cfg = space(n, hbar);
            for a in MultiIndex::up_to(n, 5) {
                let expected = hbar * (a.entries().iter().sum::<usize>() as f64 + n as f64 / 2.0);
                let state = PolarizedState::basis(a.clone(), &cfg, 5).unwrap();
                let image = hamiltonian_apply(&state);
                let leak = image
                    .entries()
                    .filter(|(b, _)| **b != a)
                    .map(|(_, v)| v.norm())
                    .fold(0.0, f64::max);
                worst = worst
                    .max((image.get(&a) - c(expected, 0.0)).norm())
                    .max(leak);
                count += 1;
            }
        }
    }
    verdict(
        worst < 1e-12,
        format!("{count} eigenvectors, max error {worst:.3e} (tol 1e-12)"),
    )
}

fn zero_point_scaling() -> Verdict {
    let hbar = 1.0;
    let energies: Vec<(f64, f64)> = (1..=4)
        .map(|n| {
            let cfg = space(n, hbar);
            let vacuum = hamiltonian_apply(&PolarizedState::ground(&cfg, 0));
            (n as f64, vacuum.get(&MultiIndex::zero(n)).re)
        })
        .collect();
    let exact = energies.iter().all(|&(n, e)| e == n * hbar / 2.0);
    let m = energies.len() as f64;
    let (sx, sy) = energies
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y));
    let (sxx, sxy) = energies
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x * x, b + x * y));
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let intercept = (sy - slope * sx) / m;
    let residual = energies
        .iter()
        .map(|&(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    let passed = exact && residual < 1e-12 && (slope - hbar / 2.0).abs() < 1e-12;
    verdict(
        passed,
        format!("exact={exact}, slope {slope}, fit residual {residual:.3e} (tol 1e-12)"),
    )
}

fn divergence_anomaly() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for n in 1..=4 {
        let target = c(0.0, -(n as f64));
        worst = worst.max((holomorphic_divergence_fd(n, 1e-4).unwrap() - target).norm());
        let coarse = (holomorphic_divergence_fd(n, 1e-2).unwrap() - target).norm();
        let fine = (holomorphic_divergence_fd(n, 5e-3).unwrap() - target).norm();
        ratios.push(coarse / fine);
    }
    let second_order = ratios.iter().all(|r| (r - 4.0).abs() < 0.25);
    verdict(
        worst < 1e-6 && second_order,
        format!("max error {worst:.3e} (tol 1e-6), halving ratios {ratios:.3?} (expect 4)"),
    )
}

fn ground_state() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut worst: f64 = 0.0;
    let mut control = f64::INFINITY;
    for n in 1..=2 {
        let cfg = space(n, 1.0);
        for _ in 0..100 {
            let z = random_point_in_ball(&mut rng, n, 2.0);
            assert!(z.norm_sqr().sqrt() <= 2.0);
            worst = worst.max(annihilation_residual(&z, 1e-4, &cfg).unwrap());
        }
        let mut probe = vec![c(0.0, 0.0); n];
        probe[0] = c(1.0, 0.0);
        let probe = halfform::ComplexPoint::new(probe).unwrap();
        let wrong = |w: &halfform::ComplexPoint| c((-w.norm_sqr()).exp(), 0.0);
        control = control.min(annihilation_residual_of(wrong, &probe, 1e-4, &cfg).unwrap());
    }
    verdict(
        worst < 1e-6 && control > 1e-2,
        format!("max residual {worst:.3e} (tol 1e-6), negative control {control:.3e} (> 1e-2)"),
    )
}

fn maslov_phase() -> Verdict {
    let mut phase_err: f64 = 0.0;
    let mut period_err: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    for n in 1..=4 {
        let cfg = space(n, 1.0);
        let ground = PolarizedState::ground(&cfg, 0);
        let zero = MultiIndex::zero(n);
        let ratio = evolve(&ground, 2.0 * PI).get(&zero) / ground.get(&zero);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        phase_err = phase_err.max((ratio - c(sign, 0.0)).norm());
        let state = random_state(&mut rng, &cfg, 4);
        period_err = period_err.max(evolve(&state, 4.0 * PI).max_abs_difference(&state));
    }
    verdict(
        phase_err < 1e-12 && period_err < 1e-12,
        format!("2π phase error {phase_err:.3e}, 4π return error {period_err:.3e} (tol 1e-12)"),
    )
}

fn backend_equivalence() -> Verdict {
    let cfg = space(1, 1.0);
    let cutoff = 6;
    let order = 40;
    assert!(order >= required_quadrature_order(cutoff));
    let grid = build_quadrature(&cfg, order).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let a = random_element(&mut rng, &cfg, cutoff);
        let b = random_element(&mut rng, &cfg, cutoff);
        let matrix = convolve(&a, &b).unwrap();
        let quad = convolve_quadrature(&a, &b, &grid).unwrap();
        worst = worst.max(matrix.max_abs_difference(&quad));
    }
    let zero = MultiIndex::zero(1);
    let p0 = matrix_unit(zero.clone(), zero, &cfg, cutoff).unwrap();
    let idem_matrix = convolve(&p0, &p0).unwrap().max_abs_difference(&p0);
    let idem_quad = convolve_quadrature(&p0, &p0, &grid)
        .unwrap()
        .max_abs_difference(&p0);
    let passed = worst < 1e-8 && idem_matrix < 1e-8 && idem_quad < 1e-8;
    verdict(
        passed,
        format!(
            "backend gap {worst:.3e}, P0*P0 error matrix {idem_matrix:.3e} / quadrature {idem_quad:.3e} (tol 1e-8)"
        ),
    )
}

/// Dense matrix of coefficients over the Fock basis, used as the oracle.
fn dense(a: &AlgebraElement) -> (Vec<MultiIndex>, Vec<Vec<Complex64>>) {
    let basis = MultiIndex::up_to(a.config().n(), a.cutoff());
    let rows = basis
        .iter()
        .map(|p| basis.iter().map(|q| a.get(p, q)).collect())
        .collect();
    (basis, rows)
}

fn dense_product(x: &[Vec<Complex64>], y: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let d = x.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..d).map(|k| x[i][k] * y[k][j]).sum())
                .collect()
        })
        .collect()
}

fn algebra_laws() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut assoc: f64 = 0.0;
    let mut cyclic: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    for k in 0..50 {
        let n = 1 + k % 2;
        let cfg = space(n, if k % 3 == 0 { 0.5 } else { 1.0 });
        let a = random_element(&mut rng, &cfg, 6);
        let b = random_element(&mut rng, &cfg, 6);
        let cc = random_element(&mut rng, &cfg, 6);
        let left = convolve(&convolve(&a, &b).unwrap(), &cc).unwrap();
        let right = convolve(&a, &convolve(&b, &cc).unwrap()).unwrap();
        assoc = assoc.max(left.max_abs_difference(&right));
        let ab = kernel_trace(&convolve(&a, &b).unwrap());
        let ba = kernel_trace(&convolve(&b, &a).unwrap());
        cyclic = cyclic.max((ab - ba).norm());

        let (basis, da) = dense(&a);
        let (_, db) = dense(&b);
        let expected = dense_product(&da, &db);
        let got = convolve(&a, &b).unwrap();
        for (i, p) in basis.iter().enumerate() {
            for (j, q) in basis.iter().enumerate() {
                oracle = oracle.max((got.get(p, q) - expected[i][j]).norm());
            }
        }
    }
    verdict(
        assoc < 1e-12 && cyclic < 1e-12 && oracle < 1e-12,
        format!(
            "associativity {assoc:.3e}, trace cyclicity {cyclic:.3e}, dense-product oracle {oracle:.3e} (tol 1e-12)"
        ),
    )
}

/// Number of `a ∈ N^n` with `|a| = m`, by nested enumeration.
fn brute_force_count(n: usize, m: usize) -> u64 {
    fn go(remaining_dims: usize, remaining: usize) -> u64 {
        if remaining_dims == 1 {
            return 1;
        }
        (0..=remaining)
            .map(|k| go(remaining_dims - 1, remaining - k))
            .sum()
    }
    go(n, m)
}

fn character() -> Verdict {
    let q = c(0.5, 0.0);
    let mut closed_err: f64 = 0.0;
    let mut oracle_err: f64 = 0.0;
    let mut direct_err: f64 = 0.0;
    for n in 1..=3 {
        let r = regularized_character(q, n, 60).unwrap();
        closed_err = closed_err.max(r.abs_error());
        let one_mode = q.sqrt() / (c(1.0, 0.0) - q);
        oracle_err = oracle_err.max((r.closed - one_mode.powu(n as u32)).norm());
        let direct = direct_trace_character(q, 60, &space(n, 1.0)).unwrap();
        direct_err = direct_err.max((direct - r.partial).norm());
    }
    let mut degeneracy_mismatches = 0;
    for n in 1..=4 {
        let series = character_series(n, 10).unwrap();
        for m in 0..=10 {
            let brute = brute_force_count(n, m);
            if series.coeffs()[m] != brute || degeneracy_closed_form(n, m) != Some(brute) {
                degeneracy_mismatches += 1;
            }
        }
    }
    let passed = closed_err < 1e-10
        && oracle_err < 1e-12
        && direct_err < 1e-12
        && degeneracy_mismatches == 0;
    verdict(
        passed,
        format!(
            "|closed-partial| {closed_err:.3e} (tol 1e-10), closed vs product oracle {oracle_err:.3e}, \
             direct vs partial {direct_err:.3e} (tol 1e-12), degeneracy mismatches {degeneracy_mismatches}"
        ),
    )
}

fn lambda_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let mut lambda_err: f64 = 0.0;
    let mut d_alpha_err: f64 = 0.0;
    for k in 0..100 {
        let n = 1 + k % 3;
        let cfg = space(n, 1.0);
        let y = Arrow::new(
            random_point(&mut rng, n, 3.0),
            rng.gen_range(0.0..cfg.h()),
            random_point(&mut rng, n, 3.0),
            &cfg,
        )
        .unwrap();
        let v = ArrowTangent {
            du: random_tangent(&mut rng, n, 2.0),
            ds: rng.gen_range(-1.0..1.0),
            du_prime: random_tangent(&mut rng, n, 2.0),
        };
        let s = rng.gen_range(-PI..PI);
        let before = lambda_eval(&y, &v, &cfg).unwrap();
        let after = lambda_eval(&lifted_rotation(s, &y), &v.rotated(s), &cfg).unwrap();
        lambda_err = lambda_err.max((before - after).abs());

        let z = random_point(&mut rng, n, 3.0);
        let (u, w) = (
            random_tangent(&mut rng, n, 2.0),
            random_tangent(&mut rng, n, 2.0),
        );
        let fd = exterior_derivative_check(&z, &u, &w, 1e-4, &cfg).unwrap();
        d_alpha_err = d_alpha_err.max((fd - symplectic_form(&u, &w, &cfg).unwrap()).abs());
    }
    verdict(
        lambda_err < 1e-9 && d_alpha_err < 1e-6,
        format!("λ rotation error {lambda_err:.3e} (tol 1e-9), dα−ω {d_alpha_err:.3e} (tol 1e-6)"),
    )
}

fn full_check_suite() -> Verdict {
    let output = Command::new(env!("CARGO_BIN_EXE_halfform"))
        .arg("check")
        .output()
        .expect("binary runs");
    let code = output.status.code();
    let report: serde_json::Value = match serde_json::from_slice(&output.stdout) {
        Ok(v) => v,
        Err(e) => return verdict(false, format!("exit {code:?}, unreadable report: {e}")),
    };
    let failed: Vec<String> = report["checks"]
        .as_array()
        .map(|checks| {
            checks
                .iter()
                .filter(|c| c["status"] == "fail")
                .map(|c| c["name"].as_str().unwrap_or("?").to_string())
                .collect()
        })
        .unwrap_or_default();
    let total = report["checks"].as_array().map_or(0, Vec::len);
    verdict(
        code == Some(0) && failed.is_empty(),
        format!("exit {code:?}, {total} checks, failed {failed:?}"),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, Option<Duration>, fn() -> Verdict);
    let criteria: [Criterion; 10] = [
        ("spectrum", Some(Duration::from_secs(1)), spectrum_law),
        ("zero-point scaling", None, zero_point_scaling),
        ("divergence anomaly", None, divergence_anomaly),
        ("ground state", None, ground_state),
        ("maslov phase", None, maslov_phase),
        (
            "backend equivalence",
            Some(Duration::from_secs(20)),
            backend_equivalence,
        ),
        ("algebra laws", None, algebra_laws),
        ("character", None, character),
        ("lambda invariance", None, lambda_invariance),
        (
            "full check suite",
            Some(Duration::from_secs(60)),
            full_check_suite,
        ),
    ];
    let mut failures = 0;
    for (k, (name, limit, run)) in criteria.into_iter().enumerate() {
        let v = panic::catch_unwind(AssertUnwindSafe(|| timed(limit, run)))
            .unwrap_or_else(|_| verdict(false, "panicked".to_string()));
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {}", k + 1, v.detail);
        if !v.passed {
            failures += 1;
        }
    }
    println!("acceptance: {}/10 passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
