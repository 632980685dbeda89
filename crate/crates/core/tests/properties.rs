mod support;

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use stirred_ring::analytic::{tg_residual, tg_single_particle, two_level_coefficients};
use stirred_ring::basis::multiset_count;
use stirred_ring::eigen::{lowest_eigenpairs, Method};
use stirred_ring::hamiltonian::{assemble, k_operator};
use stirred_ring::observables::{momentum_distribution, qfi_mixed, qfi_pure, thermal_state};
use stirred_ring::operator::LinearOperator;
use stirred_ring::params::default_window;
use stirred_ring::spectra::{self, spectrum_sweep};
use stirred_ring::units::{
    coupling_from_scattering, stirring_frequency, to_dimensionless, to_si, RingScenario,
    CONFINEMENT_C, LI7_MASS,
};
use stirred_ring::{FockBasis, ModeWindow, ModelParams, SolverConfig};
use support::{enumerate, sorted_eigenvalues};

fn setup(n: usize, m: usize) -> (ModelParams, Arc<FockBasis>) {
    let p = ModelParams::new(n, m).unwrap();
    let b = Arc::new(FockBasis::enumerate(&p).unwrap());
    (p, b)
}

fn dense() -> SolverConfig {
    SolverConfig::default().with_method(Method::Dense)
}

fn unit_vector(seed: &[f64], dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|i| seed[i % seed.len()] + 0.01 * i as f64).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn apply(op: &dyn LinearOperator, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; op.dim()];
    op.apply(x, &mut y);
    y
}

#[test]
fn basis_size_matches_exhaustive_generation() {
    for n in 1..=4usize {
        for m in 2..=6usize {
            let w = ModeWindow::new(0, m as i32 - 1).unwrap();
            let basis = FockBasis::with_capacity(n, w, 10_000).unwrap();
            let modes: Vec<i32> = w.modes().collect();
            assert_eq!(basis.len(), enumerate(n as u32, &modes).len());
            assert_eq!(basis.len() as u128, multiset_count(n, m));
        }
    }
}

#[test]
fn ground_energy_rises_with_coupling() {
    let (p, b) = setup(3, 3);
    let p = p.with_barrier(0.08);
    let mut last = f64::NEG_INFINITY;
    for i in 0..=20 {
        let gamma = 0.25 * i as f64;
        let e = spectra::solve(&p.clone().with_coupling(gamma), &b, 1, &dense(), None)
            .unwrap()
            .eigenvalues[0];
        assert!(e >= last - 1e-12, "γ={gamma}: {e} < {last}");
        last = e;
    }
}

#[test]
fn sweep_is_independent_of_grid_direction() {
    let (p, b) = setup(3, 3);
    let p = p.with_barrier(0.05).with_coupling(2.0);
    let grid: Vec<f64> = (0..9).map(|i| i as f64 * 0.25 * PI).collect();
    let reversed: Vec<f64> = grid.iter().rev().copied().collect();
    let cfg = SolverConfig::default().with_method(Method::Krylov);
    let forward = spectrum_sweep(&p, &b, &grid, 3, &cfg, 1).unwrap();
    let backward = spectrum_sweep(&p, &b, &reversed, 3, &cfg, 1).unwrap();
    for (f, r) in forward.iter().zip(backward.iter().rev()) {
        assert_eq!(f.parameter, r.parameter);
        let ef = &f.outcome.as_ref().unwrap().eigenvalues;
        let er = &r.outcome.as_ref().unwrap().eigenvalues;
        for (x, y) in ef.iter().zip(er) {
            assert!((x - y).abs() < 1e-9, "Ω={}: {x} vs {y}", f.parameter);
        }
    }
}

#[test]
fn thermal_qfi_is_continuous_in_temperature() {
    let (p, b) = setup(3, 3);
    let p = p.with_barrier(0.08).with_coupling(3.0);
    let eig = spectra::solve(&p, &b, 10, &dense(), None).unwrap();
    let k = k_operator(&b);
    let at = |t: f64| qfi_mixed(&thermal_state(&eig, t, 10).unwrap(), &k);
    for t in [0.01, 0.1, 0.5] {
        let mut last = f64::INFINITY;
        let mut delta = 0.05;
        for _ in 0..10 {
            let diff = (at(t + delta) - at(t)).abs();
            assert!(diff <= last * 0.75 + 1e-12, "T={t} δ={delta}: {diff} after {last}");
            last = diff;
            delta *= 0.5;
        }
        assert!(last < 1e-2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn default_window_is_closed_under_reflection(n in 1usize..30, m in 1usize..20) {
        let w = default_window(n, m).unwrap();
        prop_assert_eq!(w.len(), 2 * m);
        for k in w.modes() {
            prop_assert!(w.contains(1 - k));
        }
    }

    #[test]
    fn si_round_trip(
        radius in 5e-6f64..1e-4,
        omega_perp in 1e3f64..5e4,
        a_frac in 0.001f64..0.5,
        beta in 0.0f64..2.0,
        width in 0.0f64..0.05,
        n in 1usize..200,
        t in 0.0f64..1e-8,
    ) {
        let a_perp = (stirred_ring::units::HBAR / (LI7_MASS * omega_perp)).sqrt();
        let mut s = RingScenario {
            mass: LI7_MASS,
            radius,
            omega_perp,
            scattering_length: a_frac * a_perp / CONFINEMENT_C,
            barrier: 0.0,
            barrier_width: width * 2.0 * PI * radius,
            n_atoms: n,
            temperature: t,
        };
        s.barrier = beta * s.circumference() * s.e0();
        let d = to_dimensionless(&s, 3).unwrap();
        let back = to_si(&s, &d).unwrap();
        let again = to_dimensionless(&back, 3).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()) + f64::MIN_POSITIVE;
        prop_assert!(rel(back.scattering_length, s.scattering_length));
        prop_assert!(rel(back.barrier, s.barrier));
        prop_assert!(rel(back.barrier_width, s.barrier_width));
        prop_assert!(rel(back.temperature, s.temperature));
        prop_assert!(rel(again.params.coupling, d.params.coupling));
        prop_assert!(rel(again.params.barrier, d.params.barrier));
        prop_assert_eq!(back.n_atoms, n);
    }

    #[test]
    fn lookup_inverts_enumeration_and_blocks_partition(n in 1usize..6, m in 1usize..4) {
        let (_, b) = setup(n, m);
        for i in 0..b.len() {
            prop_assert_eq!(b.lookup(b.occupations(i)), Some(i));
        }
        let mut seen = vec![0u8; b.len()];
        for (k, idx) in b.momentum_blocks() {
            for i in idx {
                prop_assert_eq!(b.momentum(i), k);
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn hamiltonian_is_exactly_symmetric(
        n in 1usize..5,
        m in 1usize..4,
        omega in 0.0f64..6.3,
        beta in 0.0f64..1.0,
        width in prop_oneof![Just(0.0), 0.0f64..0.2],
        gamma in 0.0f64..5.0,
    ) {
        let (p, b) = setup(n, m);
        let p = p.with_omega(omega).with_barrier(beta).with_barrier_width(width).with_coupling(gamma);
        let h = assemble(&p, &b).unwrap().to_dense();
        prop_assert_eq!((&h - h.transpose()).abs().max(), 0.0);
    }

    #[test]
    fn hamiltonian_is_affine_in_omega_and_coupling(
        omega in 0.0f64..6.3,
        gamma in 0.0f64..5.0,
        s in 0.1f64..0.9,
    ) {
        let (p, b) = setup(3, 2);
        let p = p.with_barrier(0.2).with_barrier_width(0.03);
        let h = |o: f64, g: f64| assemble(&p.clone().with_omega(o).with_coupling(g), &b).unwrap().to_dense();
        let mix_g = h(omega, s * gamma) - (h(omega, 0.0) * (1.0 - s) + h(omega, gamma) * s);
        prop_assert!(mix_g.abs().max() < 1e-11);
        // quadratic in Ω only through an identity shift
        let (o1, o2) = (omega, omega + 1.0);
        let mid = o1 + s;
        let lin = h(o1, gamma) * (1.0 - s) + h(o2, gamma) * s;
        let shift = 3.0 * s * (1.0 - s) / (4.0 * PI * PI);
        let mut diff = h(mid, gamma) - lin;
        for i in 0..b.len() {
            diff[(i, i)] += shift;
        }
        prop_assert!(diff.abs().max() < 1e-11);
    }

    #[test]
    fn hamiltonian_commutes_with_k_without_barrier(
        seed in prop::collection::vec(-1.0f64..1.0, 8),
        omega in 0.0f64..6.3,
        gamma in 0.0f64..5.0,
    ) {
        let (p, b) = setup(4, 3);
        let h = assemble(&p.with_omega(omega).with_coupling(gamma), &b).unwrap();
        let k = k_operator(&b);
        let v = unit_vector(&seed, b.len());
        let hk = apply(&h, &apply(&k, &v));
        let kh = apply(&k, &apply(&h, &v));
        let scale = hk.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (x, y) in hk.iter().zip(&kh) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn spectrum_is_periodic_with_shifted_window(
        omega in 0.0f64..6.3,
        beta in 0.0f64..0.5,
        gamma in 0.0f64..3.0,
        m in 1usize..4,
    ) {
        let p = ModelParams::new(2, m).unwrap().with_barrier(beta).with_coupling(gamma);
        let shifted = p.clone().with_window(p.mode_window.shifted(1)).with_omega(omega + 2.0 * PI);
        let p = p.with_omega(omega);
        let b1 = Arc::new(FockBasis::enumerate(&p).unwrap());
        let b2 = Arc::new(FockBasis::enumerate(&shifted).unwrap());
        let e1 = sorted_eigenvalues(&assemble(&p, &b1).unwrap().to_dense());
        let e2 = sorted_eigenvalues(&assemble(&shifted, &b2).unwrap().to_dense());
        for (x, y) in e1.iter().zip(&e2) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_is_reflection_symmetric_about_pi(
        beta in 0.0f64..0.5,
        gamma in 0.0f64..5.0,
        width in prop_oneof![Just(0.0), 0.0f64..0.1],
    ) {
        let (p, b) = setup(3, 3);
        let p = p.with_barrier(beta).with_barrier_width(width).with_coupling(gamma);
        let e = |o: f64| sorted_eigenvalues(&assemble(&p.clone().with_omega(o), &b).unwrap().to_dense());
        let (lo, hi) = (e(PI - 0.1), e(PI + 0.1));
        for (x, y) in lo.iter().zip(&hi) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn narrow_gaussian_matches_delta_barrier(n in 1usize..4, beta in 0.0f64..1.0) {
        let (p, b) = setup(n, 3);
        let p = p.with_barrier(beta).with_coupling(1.0);
        let delta = assemble(&p, &b).unwrap().to_dense();
        let narrow = assemble(&p.with_barrier_width(1e-8), &b).unwrap().to_dense();
        prop_assert!((delta - narrow).abs().max() < 1e-12);
    }

    #[test]
    fn eigenvalues_ascend_and_distributions_normalize(
        omega in 0.0f64..6.3,
        beta in 0.0f64..0.5,
        gamma in 0.0f64..5.0,
    ) {
        let (p, b) = setup(3, 3);
        let p = p.with_omega(omega).with_barrier(beta).with_coupling(gamma);
        let r = lowest_eigenpairs(&assemble(&p, &b).unwrap(), 8, &SolverConfig::default().with_method(Method::Krylov), None).unwrap();
        for pair in r.eigenvalues.windows(2) {
            prop_assert!(pair[0] <= pair[1]);
        }
        let k = k_operator(&b);
        let bound = b.momenta().iter().map(|&x| 4.0 * (x * x) as f64).fold(0.0, f64::max);
        for v in &r.eigenvectors {
            let dist = momentum_distribution(v, &b).unwrap();
            prop_assert!((dist.total() - 1.0).abs() < 1e-10);
            let f = qfi_pure(v, &k).unwrap();
            prop_assert!((0.0..=bound).contains(&f));
        }
    }

    #[test]
    fn eigenvectors_without_barrier_have_one_momentum(omega in 0.1f64..3.0, gamma in 0.0f64..5.0) {
        let (p, b) = setup(3, 3);
        let p = p.with_omega(omega).with_coupling(gamma);
        let r = lowest_eigenpairs(&assemble(&p, &b).unwrap(), b.len(), &dense(), None).unwrap();
        for (i, v) in r.eigenvectors.iter().enumerate() {
            let e = r.eigenvalues[i];
            let isolated = r.eigenvalues.iter().enumerate().all(|(j, &x)| j == i || (x - e).abs() > 1e-8);
            if !isolated {
                continue;
            }
            let dist = momentum_distribution(v, &b).unwrap();
            let top = dist.probabilities.values().fold(0.0, |a: f64, &x| a.max(x));
            prop_assert!(top > 1.0 - 1e-10);
        }
    }

    #[test]
    fn tg_roots_satisfy_their_equation(beta in 1e-4f64..50.0) {
        let s = tg_single_particle(beta, 9).unwrap();
        for (mu, &alpha) in s.alphas.iter().enumerate() {
            if mu % 2 == 1 {
                let r = tg_residual(alpha, beta);
                let scale = alpha / (PI * beta);
                prop_assert!(r.abs() < 1e-10 * scale.max(1.0), "μ={} residual {}", mu, r);
            } else {
                prop_assert_eq!(alpha, (mu as f64 + 1.0) / 2.0);
            }
        }
    }

    #[test]
    fn two_level_weights_normalize(delta in 1e-6f64..10.0, n in 1usize..50, omega in 0.0f64..6.3) {
        let t = two_level_coefficients(delta, n, omega).unwrap();
        prop_assert!((t.weight_a + t.weight_b - 1.0).abs() < 1e-14);
        prop_assert!(t.weight_a >= 0.0 && t.weight_b >= 0.0);
    }

    #[test]
    fn stirring_frequency_is_linear(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let s = RingScenario::li7_100();
        let sum = stirring_frequency(&s, a + b);
        let parts = stirring_frequency(&s, a) + stirring_frequency(&s, b);
        prop_assert!((sum - parts).abs() <= 1e-12 * sum.abs().max(parts.abs()).max(1e-30));
        prop_assert_eq!(stirring_frequency(&s, 0.0), 0.0);
    }

    #[test]
    fn coupling_grows_with_scattering_length(f1 in 1e-4f64..0.999, f2 in 1e-4f64..0.999) {
        prop_assume!(f1 != f2);
        let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
        let mut s = RingScenario::li7_100();
        let a_perp = s.a_perp();
        s.scattering_length = lo * a_perp / CONFINEMENT_C;
        let g_lo = coupling_from_scattering(&s).unwrap();
        s.scattering_length = hi * a_perp / CONFINEMENT_C;
        let g_hi = coupling_from_scattering(&s).unwrap();
        prop_assert!(g_hi > g_lo);
    }
}
