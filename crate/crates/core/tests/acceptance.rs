//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! The long-horizon GRAPE check is slow and runs only with `--ignored`,
//! `--include-ignored`, or `SPINXFER_SLOW=1`. `SPINXFER_ONLY=<substring>`
//! restricts the run to matching criteria.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinxfer::dynamics::{ControlProblem, PropagationSettings};
use spinxfer::harness::{
    compare_schemes, draw_couplings, median, run_campaign, CampaignOptions, ExperimentConfig, Scheme, TrialRecord,
};
use spinxfer::io;
use spinxfer::optimizers::{
    finite_difference_gradient, grape_cost, grape_gradient, grape_optimize, DcrabConfig, GrapeConfig,
    NelderMeadConfig,
};
use spinxfer::pulses::{solve_polynomial, GaussianParams, PulseSpec};
use spinxfer::spin_model::{
    build_terms, degeneracy_report, diagonalize, odd_gap_report, Breaker, IndexBase, SpinChainSpec,
    SubspaceDefinition,
};

const MASTER_SEED: u64 = 1;

#[derive(Clone, Copy, PartialEq)]
enum Verdict {
    Pass,
    Fail,
    /// Soft criterion missed by the documented margin.
    Review,
    Skip,
}

type Outcome = (Verdict, String);

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn problem(couplings: &[f64], t_f: f64, settings: PropagationSettings) -> ControlProblem<f64> {
    let n = couplings.len();
    let subs = if n >= 4 {
        SubspaceDefinition::standard(n, IndexBase::OneBased).unwrap()
    } else {
        SubspaceDefinition { index_base: IndexBase::OneBased, initial: (1, 2), target: (3, 4) }
    };
    ControlProblem::from_spec(&SpinChainSpec::new(couplings.to_vec()), &subs, t_f, settings).unwrap()
}

fn null_pulse() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in [4usize, 8] {
        let set = draw_couplings(MASTER_SEED, 20, n).unwrap();
        for js in &set.couplings {
            for t_f in [0.1, 1.0, 5.0] {
                let f = problem(js, t_f, PropagationSettings::default()).fidelity(&PulseSpec::zero(t_f)).unwrap();
                worst = worst.max(f);
                cases += 1;
            }
        }
    }
    (verdict(worst <= 1e-10), format!("{cases} cases, max F = {worst:.2e} (limit 1e-10)"))
}

fn f_equals_fs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let set = draw_couplings(MASTER_SEED, 20, 4).unwrap();
    let mut worst = 0.0f64;
    for js in &set.couplings {
        let p = problem(js, 1.0, PropagationSettings::default());
        for _ in 0..10 {
            let pulse =
                PulseSpec::Gaussian(GaussianParams::new(rng.gen_range(-50.0..=50.0), rng.gen_range(0.02..=4.0), 1.0));
            let f = p.fidelity(&pulse).unwrap();
            let fs = p.subspace_fidelity(&pulse).unwrap();
            worst = worst.max((f - fs).abs());
        }
    }
    (verdict(worst <= 1e-12), format!("200 pulses, max |F - F_S| = {worst:.2e} (limit 1e-12)"))
}

/// Classical ring energies −Σ J_i s_i s_{i+1}, computed independently of the library.
fn ising_energies(js: &[f64]) -> Vec<f64> {
    let n = js.len();
    let spin = |c: usize, i: usize| if (c >> i) & 1 == 0 { 1.0 } else { -1.0 };
    let mut e: Vec<f64> =
        (0..1usize << n).map(|c| -(0..n).map(|i| js[i] * spin(c, i) * spin(c, (i + 1) % n)).sum::<f64>()).collect();
    e.sort_by(f64::total_cmp);
    e
}

fn spectral_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for (n, draws) in [(4usize, 20usize), (8, 5)] {
        let set = draw_couplings(MASTER_SEED, draws, n).unwrap();
        for js in &set.couplings {
            let spec = SpinChainSpec::new(js.clone()).with_beta(0.0);
            let spectrum = diagonalize(&build_terms(&spec).unwrap().static_hamiltonian()).unwrap();
            for (a, b) in spectrum.eigenvalues.iter().zip(ising_energies(js)) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    (verdict(worst <= 1e-12), format!("25 draws, max |E - E_ising| = {worst:.2e} (limit 1e-12)"))
}

fn degeneracy_claims() -> Outcome {
    let mut sum_ok = 0;
    let set = draw_couplings(MASTER_SEED, 100, 4).unwrap();
    for js in &set.couplings {
        let spec = SpinChainSpec::new(js.clone()).with_breaker(Breaker::FullSumZ);
        if degeneracy_report(&spec, 1e-9).unwrap().pair_count == 3 {
            sum_ok += 1;
        }
    }
    let mut single = Vec::new();
    for n in [4usize, 5, 6] {
        let set = draw_couplings(MASTER_SEED, 100, n).unwrap();
        let ok = set
            .couplings
            .iter()
            .filter(|js| {
                let r = degeneracy_report(&SpinChainSpec::new(js.to_vec()), 1e-9).unwrap();
                r.pair_count == 0 && r.min_gap > 1e-7
            })
            .count();
        single.push(ok);
    }
    let pass = sum_ok == 100 && single.iter().all(|&k| k == 100);
    (
        verdict(pass),
        format!(
            "sum breaker N=4: 3 pairs in {sum_ok}/100; single-site breaker N=4,5,6: no pairs in {}/100, {}/100, {}/100",
            single[0], single[1], single[2]
        ),
    )
}

fn odd_gap_profile() -> Outcome {
    let set = draw_couplings(MASTER_SEED, 20, 4).unwrap();
    let beta = 1e-3;
    let (mut uniform, mut as_beta, mut as_two_beta) = (0, 0, 0);
    let mut sample = Vec::new();
    for js in &set.couplings {
        let spec = SpinChainSpec::new(js.clone()).with_beta(beta);
        let spectrum = diagonalize(&build_terms(&spec).unwrap().static_hamiltonian()).unwrap();
        let r = odd_gap_report(&spectrum, beta, 1e-9);
        uniform += r.uniform as usize;
        as_beta += r.matches_beta as usize;
        as_two_beta += r.matches_two_beta as usize;
        if sample.is_empty() {
            sample = r.odd_gaps.clone();
        }
    }
    let first: Vec<String> = sample.iter().map(|g| format!("{g:.3e}")).collect();
    (
        verdict(uniform == 20),
        format!(
            "uniform in {uniform}/20 draws; equal to beta in {as_beta}/20, to 2*beta in {as_two_beta}/20 (beta = 1e-3); draw 1: [{}]",
            first.join(", ")
        ),
    )
}

/// Coefficients (in t) of 729 t³(t−T)³/(8T⁷)·[λ1(3t−2T) + λ2(T−3t)].
fn closed_form(l1: f64, l2: f64, tf: f64) -> Vec<f64> {
    let mul = |a: &[f64], b: &[f64]| {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let cube = [-tf.powi(3), 3.0 * tf * tf, -3.0 * tf, 1.0];
    let linear = [-2.0 * tf * l1 + tf * l2, 3.0 * l1 - 3.0 * l2];
    let k = 729.0 / (8.0 * tf.powi(7));
    mul(&mul(&[0.0, 0.0, 0.0, 1.0], &cube), &linear).into_iter().map(|c| c * k).collect()
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(j, x)| j as f64 * x).collect()
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, x| acc * t + x)
}

fn polynomial_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut coef_err = 0.0f64;
    for _ in 0..100 {
        let (l1, l2, tf) = (rng.gen_range(-30.0..=30.0), rng.gen_range(-30.0..=30.0), rng.gen_range(0.1..=10.0));
        let solved = solve_polynomial(&[l1, l2], tf).unwrap();
        let expected = closed_form(l1, l2, tf);
        let scale = expected.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (j, e) in expected.iter().enumerate() {
            let got = solved.coefficients.get(j).copied().unwrap_or(0.0);
            coef_err = coef_err.max((got - e).abs() / scale);
        }
    }
    let mut bc_err = 0.0f64;
    let mut node_err = 0.0f64;
    for n_lambda in [1usize, 2, 4] {
        for _ in 0..30 {
            let tf = rng.gen_range(0.1..=10.0);
            let lambdas: Vec<f64> = (0..n_lambda).map(|_| rng.gen_range(-30.0..=30.0)).collect();
            let p = solve_polynomial(&lambdas, tf).unwrap();
            let gmax = (0..=1000).map(|i| p.value(tf * i as f64 / 1000.0).abs()).fold(0.0, f64::max).max(1e-300);
            // Derivatives in τ = t/t_f. Each residual is relative to the sum of
            // the magnitudes of the terms it cancels, i.e. the scale at which a
            // monomial-form evaluation can resolve zero.
            let scaled: Vec<f64> = p.coefficients.iter().enumerate().map(|(j, c)| c * tf.powi(j as i32)).collect();
            let d1 = derivative(&scaled);
            let d2 = derivative(&d1);
            for c in [&scaled, &d1, &d2] {
                let terms: f64 = c.iter().map(|x| x.abs()).sum::<f64>().max(gmax);
                bc_err = bc_err.max(c[0].abs() / terms);
                bc_err = bc_err.max(horner(c, 1.0).abs() / terms);
            }
            for (k, l) in lambdas.iter().enumerate() {
                let t = (k + 1) as f64 * tf / (n_lambda + 1) as f64;
                node_err = node_err.max((p.value(t) - l).abs() / gmax);
            }
        }
    }
    let pass = coef_err <= 1e-9 && bc_err <= 1e-9 && node_err <= 1e-9;
    (
        verdict(pass),
        format!(
            "coefficients {coef_err:.1e}, boundary conditions {bc_err:.1e}, nodes {node_err:.1e} (relative, limit 1e-9)"
        ),
    )
}

fn grape_gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    let mut coords = 0;
    for n in [2usize, 4] {
        for n_bins in [4usize, 10] {
            for _ in 0..20 {
                let js: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let p = problem(&js, 0.05 * n_bins as f64, PropagationSettings::default());
                let bins: Vec<f64> = (0..n_bins).map(|_| rng.gen_range(-5.0..=5.0)).collect();
                let exact = grape_gradient(&p, &bins);
                let fd = finite_difference_gradient(|u| grape_cost(&p, u), &bins, 1e-6).unwrap();
                for (a, b) in exact.iter().zip(&fd) {
                    if a.abs() > 1e-8 {
                        worst = worst.max((a - b).abs() / a.abs());
                        coords += 1;
                    }
                }
            }
        }
    }
    (verdict(worst <= 1e-5), format!("{coords} coordinates, max relative error {worst:.2e} (limit 1e-5, h = 1e-6)"))
}

fn grape_monotone() -> Outcome {
    let set = draw_couplings(MASTER_SEED + 1, 10, 4).unwrap();
    let cfg = GrapeConfig { n_bins: 10, starts: 1, max_iterations: 60, ..Default::default() };
    let mut worst_rise = f64::NEG_INFINITY;
    let mut steps = 0;
    for (i, js) in set.couplings.iter().enumerate() {
        let run = grape_optimize(&problem(js, 1.0, PropagationSettings::default()), &cfg, i as u64).unwrap();
        for s in &run.starts {
            for w in s.history.windows(2) {
                worst_rise = worst_rise.max(w[1] - w[0]);
                steps += 1;
            }
        }
    }
    (
        verdict(worst_rise <= 1e-12 && steps > 0),
        format!("{steps} accepted steps on 10 instances, largest cost change {worst_rise:.2e} (must be <= 1e-12)"),
    )
}

fn campaign(config: &ExperimentConfig, dir: &Path) -> Vec<TrialRecord> {
    let out =
        run_campaign(config, &CampaignOptions { out_dir: Some(dir.to_path_buf()), record_wall_time: false }).unwrap();
    assert_eq!(out.failures, 0, "campaign cells failed");
    out.records
}

fn best(records: &[TrialRecord], scheme: &str) -> Vec<f64> {
    records.iter().filter(|r| r.scheme == scheme).map(|r| r.best_fidelity.unwrap()).collect()
}

fn short_time_agreement() -> Outcome {
    let config = ExperimentConfig {
        master_seed: MASTER_SEED,
        n_trials: 20,
        n_spins: 4,
        t_f: vec![0.1],
        schemes: vec![
            Scheme::GaussianGrid { resolution: 101 },
            Scheme::Grape(GrapeConfig::default()),
            Scheme::Dcrab(DcrabConfig::default()),
        ],
        ..Default::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let records = campaign(&config, dir.path());
    let cmp = compare_schemes(&records, "dcrab100").unwrap();
    let gauss = cmp.summary.iter().find(|s| s.scheme == "gaussian").unwrap();
    let g = best(&records, "gaussian");
    let grape = best(&records, "grape100");
    let diffs: Vec<f64> = grape.iter().zip(&g).map(|(a, b)| a - b).collect();
    let grape_med = median(&diffs);
    let pass = gauss.median_abs_delta <= 0.05 && grape_med >= -0.05;
    (
        verdict(pass),
        format!(
            "N=4, t_f=0.1, 20 trials: median |F_dcrab100 - F_gauss| = {:.2e} (<= 0.05), median (F_grape100 - F_gauss) = {grape_med:.2e} (>= -0.05); mean F gauss {:.4}",
            gauss.median_abs_delta,
            g.iter().sum::<f64>() / g.len() as f64
        ),
    )
}

fn spin_trend() -> Outcome {
    let mut means = Vec::new();
    for n in [4usize, 8] {
        let config = ExperimentConfig {
            master_seed: MASTER_SEED,
            n_trials: 10,
            n_spins: n,
            t_f: vec![1.0],
            schemes: vec![Scheme::GaussianGrid { resolution: 41 }],
            ..Default::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let f = best(&campaign(&config, dir.path()), "gaussian");
        means.push(f.iter().sum::<f64>() / f.len() as f64);
    }
    (
        verdict(means[1] < means[0]),
        format!("Gaussian 41x41, t_f=1, 10 trials: mean best F N=4 {:.4}, N=8 {:.4}", means[0], means[1]),
    )
}

fn dcrab_advantage() -> Outcome {
    let config = ExperimentConfig {
        master_seed: MASTER_SEED,
        n_trials: 10,
        n_spins: 4,
        t_f: vec![5.0],
        schemes: vec![Scheme::GaussianGrid { resolution: 101 }, Scheme::Dcrab(DcrabConfig::default())],
        ..Default::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let records = campaign(&config, dir.path());
    let g = best(&records, "gaussian");
    let d = best(&records, "dcrab100");
    let wins = d.iter().zip(&g).filter(|(d, g)| d >= g).count();
    let v = match wins {
        6.. => Verdict::Pass,
        5 => Verdict::Review,
        _ => Verdict::Fail,
    };
    let pairs: Vec<String> = d.iter().zip(&g).map(|(d, g)| format!("{d:.3}/{g:.3}")).collect();
    (v, format!("N=4, t_f=5: dCRAB >= Gaussian on {wins}/10 trials (need 6); dcrab/gauss: {}", pairs.join(" ")))
}

fn long_horizon_grape() -> Outcome {
    let set = draw_couplings(MASTER_SEED, 3, 4).unwrap();
    // One start and 200 iterations keep this near a quarter hour on one core.
    let cfg = GrapeConfig { n_bins: 1000, starts: 1, max_iterations: 200, ..Default::default() };
    let mut fs = Vec::new();
    for (i, js) in set.couplings.iter().enumerate() {
        let run = grape_optimize(&problem(js, 1e4, PropagationSettings::default()), &cfg, i as u64).unwrap();
        fs.push(run.result.best_fidelity);
    }
    let hits = fs.iter().filter(|f| **f > 0.9).count();
    (verdict(hits >= 2), format!("N=4, t_f=1e4, 1000 bins: best F {fs:.4?}; > 0.9 in {hits}/3 (need 2)"))
}

fn determinism() -> Outcome {
    let config = ExperimentConfig {
        master_seed: MASTER_SEED,
        n_trials: 3,
        n_spins: 4,
        t_f: vec![0.1, 1.0, 5.0],
        schemes: vec![
            Scheme::GaussianGrid { resolution: 21 },
            Scheme::PolynomialRandom { n_lambda: 2, n_guesses: 100 },
            Scheme::Grape(GrapeConfig { starts: 2, max_iterations: 100, ..Default::default() }),
            Scheme::Dcrab(DcrabConfig {
                restarts: 2,
                super_iterations: 4,
                nelder_mead: NelderMeadConfig { max_evaluations: 500, ..Default::default() },
                ..Default::default()
            }),
        ],
        ..Default::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut files = Vec::new();
    for d in &dirs {
        let records = campaign(&config, d.path());
        let cmp = compare_schemes(&records, "dcrab100").unwrap();
        io::write_comparison(&d.path().join("comparison.csv"), &cmp).unwrap();
        io::write_comparison_summary(&d.path().join("comparison_summary.csv"), &cmp).unwrap();
        let read = |n: &str| std::fs::read(d.path().join(n)).unwrap();
        files.push([read("campaign.csv"), read("manifest.json"), read("comparison.csv"), read("comparison_summary.csv")]);
    }
    let same = files[0] == files[1];
    (
        verdict(same),
        format!(
            "3 trials x 3 t_f x 4 schemes run twice: campaign.csv, manifest.json, comparison CSVs {}",
            if same { "byte-identical" } else { "DIFFER" }
        ),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let slow = args.iter().any(|a| a == "--ignored" || a == "--include-ignored")
        || std::env::var("SPINXFER_SLOW").map_or(false, |v| v == "1");
    // `cargo test -- --list` and filters are not supported by this runner.
    if args.iter().any(|a| a == "--list") {
        return;
    }

    let criteria: Vec<(&str, Option<fn() -> Outcome>)> = vec![
        ("null-pulse orthogonality", Some(null_pulse)),
        ("F = F_S identity", Some(f_equals_fs)),
        ("spectral oracle", Some(spectral_oracle)),
        ("degeneracy counts", Some(degeneracy_claims)),
        ("odd-k gap profile", Some(odd_gap_profile)),
        ("polynomial closed form", Some(polynomial_closed_form)),
        ("GRAPE gradient vs finite differences", Some(grape_gradient_check)),
        ("GRAPE monotonicity", Some(grape_monotone)),
        ("short-time scheme agreement", Some(short_time_agreement)),
        ("spin-number trend", Some(spin_trend)),
        ("dCRAB long-time advantage", Some(dcrab_advantage)),
        ("long-horizon GRAPE [slow]", slow.then_some(long_horizon_grape as fn() -> Outcome)),
        ("determinism", Some(determinism)),
    ];

    // Optional substring filter, e.g. SPINXFER_ONLY=polynomial.
    let only = std::env::var("SPINXFER_ONLY").ok();
    let mut failed = 0;
    for (name, check) in criteria {
        if only.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let start = Instant::now();
        let (v, detail) = match check {
            None => (Verdict::Skip, "optional; run with --ignored or SPINXFER_SLOW=1".to_string()),
            Some(f) => catch_unwind(AssertUnwindSafe(f))
                .unwrap_or_else(|_| (Verdict::Fail, "panicked (see message above)".to_string())),
        };
        let tag = match v {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed += 1;
                "FAIL"
            }
            Verdict::Review => "REVIEW",
            Verdict::Skip => "SKIP",
        };
        println!("{tag:<6} {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria met");
}
