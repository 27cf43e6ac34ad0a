//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use hyperagm::agm::{agm_limit, agm_step, MeanVector};
use hyperagm::bits::BitIndex;
use hyperagm::calabi_yau::cy_period;
use hyperagm::genus2::{branch_point_values, closed_form_limit, moduli_from_means, ratio_residual};
use hyperagm::hyperelliptic::{normalized_tau, period_matrices, BranchPoints};
use hyperagm::theta::duplication_residual;
use hyperagm::thomae::{initial_data, t_set, thomae_residual};
use hyperagm::verify::{elliptic_integral_side, sample_branch_points, sample_elliptic_pairs, sample_mean_vectors, sample_quadruples};

const SEED: u64 = 20_240_601;
const REL_TOL: f64 = 1e-10;
const AGM_TOL: f64 = 1e-13;
const THETA_TOL: f64 = 1e-14;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn samples() -> Vec<BranchPoints> {
    (1..=3).flat_map(|g| sample_branch_points(SEED, g, 20)).collect()
}

fn max(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn main_theorem(ps: &[BranchPoints]) -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for p in ps {
        let g = p.genus() as i32;
        let r = (|| {
            let mu = agm_limit(&initial_data(p)?, AGM_TOL)?.limit;
            let det = period_matrices(p, REL_TOL)?.abs_det_a();
            let target = (2.0 * PI).powi(g);
            Ok::<_, hyperagm::error::Error>((mu * det - target).abs() / target)
        })();
        match r {
            Ok(res) => worst = worst.max(res),
            Err(e) => errors.push(format!("{:?}: {e}", p.points())),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        errors.is_empty() && worst < 1e-8 && secs < 60.0,
        format!("max residual {worst:.2e} (tol 1e-8) over {} samples, g=1..3, {secs:.2} s (limit 60 s){}", ps.len(), errs(&errors)),
    )
}

fn errs(errors: &[String]) -> String {
    if errors.is_empty() {
        String::new()
    } else {
        format!("; errors: {errors:?}")
    }
}

fn elliptic() -> Outcome {
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for (a0, a1) in sample_elliptic_pairs(SEED, 20) {
        let r = (|| {
            let mu = agm_limit(&MeanVector::new(1, vec![a0, a1])?, AGM_TOL)?.limit;
            let rhs = elliptic_integral_side(a0, a1, 1e-13)?;
            Ok::<_, hyperagm::error::Error>(((a0 / mu) - rhs).abs() / rhs)
        })();
        match r {
            Ok(res) => worst = worst.max(res),
            Err(e) => errors.push(format!("({a0}, {a1}): {e}")),
        }
    }
    outcome(errors.is_empty() && worst < 1e-10, format!("max residual {worst:.2e} (tol 1e-10) over 20 pairs{}", errs(&errors)))
}

fn duplication(ps: &[BranchPoints]) -> Outcome {
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for p in ps {
        let r = period_matrices(p, REL_TOL)
            .and_then(|pp| normalized_tau(&pp))
            .and_then(|tau| duplication_residual(&tau, THETA_TOL));
        match r {
            Ok(res) => worst = worst.max(res),
            Err(e) => errors.push(format!("{:?}: {e}", p.points())),
        }
    }
    outcome(errors.is_empty() && worst < 1e-12, format!("max |θ(2τ)² − F(θ(τ))| {worst:.2e} (tol 1e-12){}", errs(&errors)))
}

fn thomae(ps: &[BranchPoints]) -> Outcome {
    let mut worst = [0.0f64; 3];
    let mut errors = Vec::new();
    for p in ps {
        match thomae_residual(p, REL_TOL) {
            Ok(r) => worst[p.genus() - 1] = worst[p.genus() - 1].max(r),
            Err(e) => errors.push(format!("{:?}: {e}", p.points())),
        }
    }
    outcome(
        errors.is_empty() && max(worst) < 1e-8,
        format!("max relative residual g1 {:.2e}, g2 {:.2e}, g3 {:.2e} (tol 1e-8){}", worst[0], worst[1], worst[2], errs(&errors)),
    )
}

fn riemann(ps: &[BranchPoints]) -> Outcome {
    let (mut sym, mut re, mut lam, mut sign) = (0.0f64, 0.0f64, f64::INFINITY, f64::INFINITY);
    let mut errors = Vec::new();
    for p in ps {
        match period_matrices(p, REL_TOL).and_then(|pp| Ok((normalized_tau(&pp)?, pp))) {
            Ok((tau, pp)) => {
                sym = sym.max(tau.symmetry_defect());
                re = re.max(tau.real_part_max());
                lam = lam.min(tau.min_imaginary_eigenvalue());
                let g = p.genus();
                let s = if (g * (g + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                sign = sign.min(s * pp.det_a());
            }
            Err(e) => errors.push(format!("{:?}: {e}", p.points())),
        }
    }
    outcome(
        errors.is_empty() && sym < 1e-10 && re < 1e-10 && lam > 0.0 && sign > 0.0,
        format!(
            "‖τ−τᵗ‖ {sym:.2e}, ‖Re τ‖ {re:.2e} (tol 1e-10), min λ(Im τ) {lam:.3e} > 0, min (−1)^(g(g+1)/2)·det A {sign:.3e} > 0{}",
            errs(&errors)
        ),
    )
}

fn calabi_yau(ps: &[BranchPoints]) -> Outcome {
    let mut g1 = 0.0f64;
    let mut errors = Vec::new();
    for p in ps.iter().filter(|p| p.genus() == 1) {
        match cy_period(p, REL_TOL).and_then(|c| Ok((c, period_matrices(p, REL_TOL)?.abs_det_a()))) {
            Ok((c, d)) => g1 = g1.max((c - d).abs() / d),
            Err(e) => errors.push(format!("{:?}: {e}", p.points())),
        }
    }
    let start = Instant::now();
    let mut g2 = 0.0f64;
    for p in sample_branch_points(SEED ^ 0xC0FFEE, 2, 10) {
        match cy_period(&p, REL_TOL).and_then(|c| Ok((c, period_matrices(&p, REL_TOL)?.abs_det_a()))) {
            Ok((c, d)) => g2 = g2.max((2.0 * c - d).abs() / d),
            Err(e) => errors.push(format!("{:?}: {e}", p.points())),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        errors.is_empty() && g1 < 1e-10 && g2 < 1e-4 && secs < 120.0,
        format!("g1 residual {g1:.2e} (tol 1e-10); g2 residual {g2:.2e} (tol 1e-4) over 10 samples in {secs:.2} s (limit 120 s){}", errs(&errors)),
    )
}

fn genus2() -> Outcome {
    let (mut ratio, mut forms, mut vs_mu) = (0.0f64, 0.0f64, 0.0f64);
    let mut counterexamples = Vec::new();
    for a in sample_quadruples(SEED, 20) {
        let ordered = (|| {
            let m = moduli_from_means(&a)?;
            let p = branch_point_values(&a)?;
            Ok::<_, hyperagm::error::Error>(0.0 < m.l2 && m.l2 < m.l1 && m.l1 < 1.0 && p.windows(2).all(|w| w[0] < w[1]))
        })();
        if !matches!(ordered, Ok(true)) {
            counterexamples.push(format!("{a:?}: {ordered:?}"));
            continue;
        }
        let r = (|| {
            let p = hyperagm::genus2::branch_points_from_means(&a)?;
            let cf = closed_form_limit(&a, REL_TOL)?;
            let mu = agm_limit(&a.to_mean_vector(), AGM_TOL)?.limit;
            Ok::<_, hyperagm::error::Error>((
                ratio_residual(&a, &p)?,
                (cf.det_form - cf.expanded_form).abs() / cf.det_form,
                (cf.det_form - mu).abs() / mu,
            ))
        })();
        match r {
            Ok((x, y, z)) => {
                ratio = ratio.max(x);
                forms = forms.max(y);
                vs_mu = vs_mu.max(z);
            }
            Err(e) => counterexamples.push(format!("{a:?}: {e}")),
        }
    }
    outcome(
        counterexamples.is_empty() && ratio < 1e-11 && forms < 1e-12 && vs_mu < 1e-8,
        format!(
            "ratio {ratio:.2e} (tol 1e-11), forms {forms:.2e} (tol 1e-12), vs μ_2 {vs_mu:.2e} (tol 1e-8), 20 quadruples, counterexamples: {}{}",
            counterexamples.len(),
            errs(&counterexamples)
        ),
    )
}

fn convergence() -> Outcome {
    let (mut most_iters, mut worst_c) = (0usize, 0.0f64);
    let mut errors = Vec::new();
    for g in 1..=3 {
        for a in sample_mean_vectors(SEED, g, 50) {
            assert!(a.max() / a.min() <= 2.0);
            let mut cur = a.clone();
            let mut spreads = vec![cur.relative_spread()];
            for _ in 0..12 {
                cur = agm_step(&cur).unwrap();
                spreads.push(cur.relative_spread());
            }
            match spreads.iter().position(|&s| s < 1e-12) {
                Some(k) => most_iters = most_iters.max(k),
                None => errors.push(format!("{:?} never reached 1e-12", a.values())),
            }
            // quadratic regime: small enough to be asymptotic, large enough to be above rounding
            for w in spreads.windows(2) {
                if w[0] < 0.1 && w[1] > 1e-13 {
                    worst_c = worst_c.max(w[1] / (w[0] * w[0]));
                }
            }
        }
    }
    outcome(
        errors.is_empty() && most_iters <= 8 && worst_c < 10.0,
        format!("max iterations to spread 1e-12: {most_iters} (limit 8), fitted C {worst_c:.3} (limit 10), 150 vectors{}", errs(&errors)),
    )
}

/// η_j from its matrix description, as (top row, bottom row) 0/1 vectors.
fn eta(g: usize, j: usize) -> (Vec<u8>, Vec<u8>) {
    let i = j.div_ceil(2);
    let mut top = vec![0u8; g];
    top[i - 1] = 1;
    let ones = if j % 2 == 1 { i - 1 } else { i };
    let bottom = (0..g).map(|c| u8::from(c < ones)).collect();
    (top, bottom)
}

fn combinatorics() -> Outcome {
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for g in 1..=3 {
        for index in BitIndex::all(g).unwrap() {
            let target: Vec<u8> = (1..=g).map(|k| index.bit(k)).collect();
            let mut hits = Vec::new();
            for mask in 0u32..(1 << (2 * g)) {
                let set: BTreeSet<usize> = (1..=2 * g).filter(|j| mask >> (j - 1) & 1 == 1).collect();
                let mut top = vec![0u8; g];
                let mut bottom = vec![0u8; g];
                for &j in &set {
                    let (t, b) = eta(g, j);
                    for c in 0..g {
                        top[c] ^= t[c];
                        bottom[c] ^= b[c];
                    }
                }
                if top.iter().all(|&x| x == 0) && bottom == target {
                    hits.push(set);
                }
            }
            checked += 1;
            if hits != [t_set(index)] {
                mismatches.push(format!("g={g} I={index}: search {hits:?} vs {:?}", t_set(index)));
            }
        }
    }
    outcome(mismatches.is_empty(), format!("{checked} characteristics for g ≤ 3, mismatches: {}{}", mismatches.len(), errs(&mismatches)))
}

fn main() -> ExitCode {
    let ps = samples();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("main theorem μ_g·|det A| = (2π)^g", Box::new(|| main_theorem(&ps))),
        ("classical elliptic identity", Box::new(elliptic)),
        ("theta duplication", Box::new(|| duplication(&ps))),
        ("Thomae formula", Box::new(|| thomae(&ps))),
        ("Riemann relations", Box::new(|| riemann(&ps))),
        ("Calabi-Yau period identity", Box::new(|| calabi_yau(&ps))),
        ("genus-2 pipeline", Box::new(genus2)),
        ("AGM convergence quality", Box::new(convergence)),
        ("t_set exhaustive search", Box::new(combinatorics)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {}: {} {}: {}", k + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
