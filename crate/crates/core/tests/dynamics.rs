mod support;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use stirred_ring::analytic::{g_ramp_model, tg_gap};
use stirred_ring::dynamics::{
    adiabatic_ratio, evolve_ramp, evolve_state, noon_ramp, EvolveOptions, RampHamiltonian,
    RampParam, RampSpec,
};
use stirred_ring::eigen::lowest_eigenpairs;
use stirred_ring::hamiltonian::{calibrate_coupling, CalibrationTarget};
use stirred_ring::observables::{momentum_distribution, momentum_distribution_complex};
use stirred_ring::spectra::{self, gap_at_crossing};
use stirred_ring::{FockBasis, ModelParams, SolverConfig};
use support::oracle_hamiltonian;

fn setup(n: usize, m: usize) -> (ModelParams, Arc<FockBasis>) {
    let p = ModelParams::new(n, m).unwrap();
    let b = Arc::new(FockBasis::enumerate(&p).unwrap());
    (p, b)
}

fn omega_ramp(duration: f64, steps: usize) -> RampSpec {
    RampSpec {
        param: RampParam::Omega,
        start: 0.0,
        end: PI,
        duration,
        steps,
    }
}

fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

fn real_to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Midpoint-rule propagation with exact dense exponentials of the oracle matrix.
fn dense_propagate(p: &ModelParams, basis: &FockBasis, ramp: &RampSpec) -> Vec<Complex64> {
    let h0 = oracle_hamiltonian(&p.clone().with_omega(ramp.start), basis);
    let eig = h0.symmetric_eigen();
    let ground = eig.eigenvalues.argmin().0;
    let mut psi: DVector<Complex64> = eig.eigenvectors.column(ground).map(|x| Complex64::new(x, 0.0));
    let dt = ramp.duration / ramp.steps as f64;
    for s in 0..ramp.steps {
        let zeta = ramp.value_at((s as f64 + 0.5) * dt);
        let h = oracle_hamiltonian(&p.clone().with_omega(zeta), basis).symmetric_eigen();
        let u: DMatrix<Complex64> = h.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let phases = DMatrix::from_diagonal(
            &h.eigenvalues.map(|e| Complex64::new(0.0, -e * dt).exp()),
        );
        psi = &u * phases * u.adjoint() * psi;
    }
    psi.iter().copied().collect()
}

#[test]
fn ramp_matches_dense_oracle_propagation() {
    let (p, b) = setup(3, 2);
    assert_eq!(b.len(), 20);
    let p = p.with_barrier(0.08).with_coupling(1.0);
    let opts = EvolveOptions::default();
    for ramp in [omega_ramp(2.0, 40), omega_ramp(0.05, 10)] {
        let got = evolve_ramp(&p, &b, &ramp, &opts).unwrap();
        let want = dense_propagate(&p, &b, &ramp);
        let f = overlap(&got.final_state, &want);
        assert!(f > 1.0 - 1e-10, "duration {}: overlap {f}", ramp.duration);
    }
}

#[test]
fn sudden_quench_keeps_initial_momentum_distribution() {
    let (p, b) = setup(3, 2);
    let p = p.with_barrier(0.08).with_coupling(1.0);
    let initial = spectra::solve(&p.clone().with_omega(0.0), &b, 2, &SolverConfig::default(), None)
        .unwrap();
    let before = momentum_distribution(initial.ground_state(), &b).unwrap();
    let after = evolve_ramp(&p, &b, &omega_ramp(1e-3, 10), &EvolveOptions::default()).unwrap();
    let after = momentum_distribution_complex(&after.final_state, &b).unwrap();
    for (k, &pk) in &before.probabilities {
        assert!((after.get(*k) - pk).abs() < 1e-3, "K={k}: {} vs {pk}", after.get(*k));
    }
}

#[test]
fn norm_is_conserved_and_fidelity_bounded() {
    let (p, b) = setup(3, 3);
    let p = p.with_barrier(0.08).with_coupling(5.0);
    let r = evolve_ramp(&p, &b, &omega_ramp(20.0, 400), &EvolveOptions::default()).unwrap();
    assert!(r.samples.len() <= 101);
    for s in &r.samples {
        assert!((s.norm - 1.0).abs() < 1e-8, "t={}: norm {}", s.time, s.norm);
        assert!((0.0..=1.0 + 1e-12).contains(&s.fidelity));
    }
}

#[test]
fn forward_then_reverse_ramp_returns_to_start() {
    let (p, b) = setup(3, 2);
    let p = p.with_barrier(0.1).with_coupling(2.0);
    let opts = EvolveOptions::default();
    let ramp = omega_ramp(8.0, 200);
    let ham = RampHamiltonian::new(&p, &b, RampParam::Omega).unwrap();
    let start = lowest_eigenpairs(&ham.at(0.0), 2, &opts.solver, None).unwrap();
    let psi0 = real_to_complex(start.ground_state());
    let forward = evolve_state(&ham, &b, &ramp, &opts, psi0.clone()).unwrap();
    // H is real, so running the reversed ramp on the conjugated state
    // undoes the forward evolution
    let conj: Vec<Complex64> = forward.final_state.iter().map(|z| z.conj()).collect();
    let back = evolve_state(&ham, &b, &ramp.reversed(), &opts, conj).unwrap();
    let returned: Vec<Complex64> = back.final_state.iter().map(|z| z.conj()).collect();
    let f = overlap(&psi0, &returned);
    assert!(f >= 1.0 - 1e-6, "return fidelity {f}");
}

#[test]
fn halving_the_step_count_leaves_fidelity_unchanged() {
    let (p, b) = setup(3, 3);
    let p = p.with_barrier(0.08).with_coupling(5.0);
    let opts = EvolveOptions::default();
    let fine = evolve_ramp(&p, &b, &omega_ramp(30.0, 4000), &opts).unwrap();
    let coarse = evolve_ramp(&p, &b, &omega_ramp(30.0, 2000), &opts).unwrap();
    let d = (fine.final_sample().fidelity - coarse.final_sample().fidelity).abs();
    assert!(d < 1e-6, "fidelity change {d:e}");
}

#[test]
fn slow_omega_ramp_stays_near_the_first_order_estimate() {
    let (p, b) = setup(3, 3);
    let p = p.with_barrier(0.08).with_coupling(5.0);
    let opts = EvolveOptions::default();
    let grid: Vec<f64> = (0..=40).map(|i| i as f64 * PI / 40.0).collect();
    let ratio = adiabatic_ratio(&p, &b, RampParam::Omega, &grid, &opts.solver).unwrap();
    let excitation = |eps: f64| {
        let rate = eps / ratio;
        evolve_ramp(&p, &b, &omega_ramp(PI / rate, 2000), &opts)
            .unwrap()
            .final_sample()
            .excitation
    };
    let slow = excitation(0.01);
    assert!(slow <= 1.2e-4, "excitation {slow:e} above 1.2 ε²");
    let faster = excitation(0.1);
    let scaling = faster / slow;
    assert!((100.0 / 3.0..=300.0).contains(&scaling), "ratio {scaling}");
}

fn noon_spec(rate: f64, gamma_end: f64) -> RampSpec {
    RampSpec {
        param: RampParam::Coupling,
        start: 5.0,
        end: gamma_end,
        duration: (5.0 - gamma_end) / rate,
        steps: 200,
    }
}

#[test]
fn noon_ramp_examples() {
    let (p, b) = setup(3, 3);
    let p = p.with_barrier(0.08);
    let opts = EvolveOptions::default();
    let gamma_end = 1.0 / 6.0;
    let bound = g_ramp_model(3, gamma_end).max_rate;
    let slow = noon_ramp(&p, &b, &noon_spec(0.1 * bound, gamma_end), true, &opts).unwrap();
    assert!(slow.noon_overlap.unwrap() >= 0.9, "overlap {:?}", slow.noon_overlap);
    let fast = noon_ramp(&p, &b, &noon_spec(10.0 * bound, gamma_end), true, &opts).unwrap();
    let (e_slow, e_fast) = (slow.final_sample().excitation, fast.final_sample().excitation);
    assert!(e_fast >= 10.0 * e_slow, "fast {e_fast:e} slow {e_slow:e}");

    // without the barrier every K weight is frozen
    let first = &slow.samples[0];
    for s in &slow.samples {
        assert!((s.p_k0 - first.p_k0).abs() < 1e-8);
        assert!((s.p_kn - first.p_kn).abs() < 1e-8);
    }
}

#[test]
fn calibration_factor_exceeds_one_at_moderate_coupling() {
    let (p, b) = setup(3, 9);
    let p = p.with_barrier(0.08).with_coupling(5.0);
    let cfg = SolverConfig::default();
    let factor = calibrate_coupling(&b, &p, CalibrationTarget::TonksGirardeauGap, &cfg).unwrap();
    assert!(factor > 1.0);
    let gap = gap_at_crossing(&p.clone().with_coupling_rescale(factor), &b, &cfg).unwrap();
    let tg = tg_gap(3, 0.08).unwrap();
    assert!((gap / tg - 1.0).abs() < 1e-5, "{gap} vs {tg}");
    assert_eq!(
        calibrate_coupling(&b, &p, CalibrationTarget::Identity, &cfg).unwrap(),
        1.0
    );
}

#[test]
fn truncated_gap_converges_to_tonks_girardeau_with_window() {
    let tg = tg_gap(3, 0.08).unwrap();
    let mut last = f64::INFINITY;
    for m in [9, 14, 20] {
        let (p, b) = setup(3, m);
        let p = p.with_barrier(0.08).with_coupling(20.0);
        let gap = gap_at_crossing(&p, &b, &SolverConfig::default()).unwrap();
        let err = (gap / tg - 1.0).abs();
        assert!(err < last, "m={m}: error {err} did not shrink from {last}");
        last = err;
    }
    assert!(last < 0.01);
}
