use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinxfer::dynamics::{propagate, ControlProblem, PropagationSettings};
use spinxfer::optimizers::*;
use spinxfer::pulses::{PiecewiseConstantPulse, PulseSpec};
use spinxfer::spin_model::{IndexBase, SpinChainSpec, SubspaceDefinition};

fn random_problem(rng: &mut ChaCha8Rng, n_spins: usize, t_f: f64) -> ControlProblem<f64> {
    let couplings = (0..n_spins).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let spec = SpinChainSpec::new(couplings);
    let subs = if n_spins >= 4 {
        SubspaceDefinition::standard(n_spins, IndexBase::OneBased).unwrap()
    } else {
        SubspaceDefinition { index_base: IndexBase::OneBased, initial: (1, 2), target: (3, 4) }
    };
    ControlProblem::from_spec(&spec, &subs, t_f, PropagationSettings::default()).unwrap()
}

#[test]
fn exact_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for &n_spins in &[2usize, 4] {
        for &n_bins in &[4usize, 10] {
            for _ in 0..5 {
                let p = random_problem(&mut rng, n_spins, 0.05 * n_bins as f64);
                let bins: Vec<f64> = (0..n_bins).map(|_| rng.gen_range(-5.0..=5.0)).collect();
                let exact = grape_gradient(&p, &bins);
                let fd = finite_difference_gradient(|u| grape_cost(&p, u), &bins, 1e-6).unwrap();
                for (a, b) in exact.iter().zip(&fd) {
                    if a.abs() > 1e-8 {
                        worst = worst.max((a - b).abs() / a.abs());
                    }
                }
            }
        }
    }
    assert!(worst <= 1e-5, "worst relative error {worst:e}");
}

#[test]
fn first_order_formula_sign_and_projection() {
    // −2Δt·Im[⟨χ_j|H1|ψ_j⟩⟨ψ_N|ψ_f⟩] agrees with the exact derivative up to O(Δt²) per bin.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for &dt in &[0.02, 0.01, 0.005] {
        let p = random_problem(&mut rng, 4, dt * 10.0);
        let bins: Vec<f64> = (0..10).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        let exact = grape_gradient(&p, &bins);
        let approx = grape_gradient_with(&p, &bins, GradientScheme::FirstOrder);
        let scale = exact.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let err = exact.iter().zip(&approx).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 20.0 * dt * scale, "dt={dt}: err {err:e} vs scale {scale:e}");
    }
}

#[test]
fn cost_is_one_minus_propagated_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let p = random_problem(&mut rng, 4, 1.0);
    let bins: Vec<f64> = (0..10).map(|_| rng.gen_range(-5.0..=5.0)).collect();
    let pulse = PulseSpec::PiecewiseConstant(PiecewiseConstantPulse::new(bins.clone(), 1.0).unwrap());
    let f = propagate(&p.hamiltonian, &p.boundary.psi_i, &p.boundary.psi_f, &pulse, &p.settings).unwrap().fidelity;
    assert!((grape_cost(&p, &bins) + f - 1.0).abs() <= 1e-12);
    assert!((grape_cost(&p, &vec![0.0; 10]) - 1.0).abs() <= 1e-12);
}

#[test]
fn grape_accepted_costs_never_increase() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = random_problem(&mut rng, 4, 1.0);
    let cfg = GrapeConfig { n_bins: 10, starts: 2, max_iterations: 40, ..Default::default() };
    let run = grape_optimize(&p, &cfg, 3).unwrap();
    for s in &run.starts {
        assert!(s.history.windows(2).all(|w| w[1] <= w[0]));
    }
    assert_eq!(run.result.best_params, run.pulse.bins);
    assert!((run.result.best_fidelity - p.bins_fidelity(&run.pulse.bins)).abs() < 1e-12);
    assert_eq!(run, grape_optimize(&p, &cfg, 3).unwrap());
}

#[test]
fn nelder_mead_rosenbrock() {
    let rosen = |x: &[f64]| Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
    let r = nelder_mead(rosen, &[-1.2, 1.0], &NelderMeadConfig::default()).unwrap();
    assert!(r.evaluations <= 2000);
    assert!(r.f <= 1e-6, "{r:?}");
    // Known minimizer (1, 1).
    assert!((r.x[0] - 1.0).abs() < 1e-2 && (r.x[1] - 1.0).abs() < 1e-2);
}

#[test]
fn dcrab_super_iterations_never_lose_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let p = random_problem(&mut rng, 4, 1.0);
    let cfg = DcrabConfig {
        super_iterations: 3,
        restarts: 2,
        nelder_mead: NelderMeadConfig { max_evaluations: 300, ..Default::default() },
        ..Default::default()
    };
    let run = dcrab_optimize(&p, &cfg, 8).unwrap();
    for r in &run.restarts {
        assert!(r.fidelity_history.windows(2).all(|w| w[1] >= w[0]));
    }
    let again = dcrab_optimize(&p, &cfg, 8).unwrap();
    assert_eq!(run.result, again.result);
    assert!(run.result.best_fidelity > 0.0 && run.result.best_fidelity <= 1.0);
}
