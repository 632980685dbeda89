//! Reference implementations built from raw ladder operators.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use stirred_ring::{FockBasis, ModelParams};

/// Occupations keyed by mode; empty modes are absent.
pub type Ket = BTreeMap<i32, u32>;

#[derive(Clone, Copy)]
pub enum Ladder {
    Create(i32),
    Destroy(i32),
}

/// Coefficient times a product of ladder operators, applied right to left.
pub struct Term {
    pub coef: f64,
    pub ops: Vec<Ladder>,
}

fn apply_term(term: &Term, ket: &Ket) -> Option<(Ket, f64)> {
    let mut out = ket.clone();
    let mut amp = term.coef;
    for op in term.ops.iter().rev() {
        match *op {
            Ladder::Destroy(k) => {
                let n = out.get(&k).copied().unwrap_or(0);
                if n == 0 {
                    return None;
                }
                amp *= (n as f64).sqrt();
                if n == 1 {
                    out.remove(&k);
                } else {
                    out.insert(k, n - 1);
                }
            }
            Ladder::Create(k) => {
                let n = out.get(&k).copied().unwrap_or(0);
                amp *= (n as f64 + 1.0).sqrt();
                out.insert(k, n + 1);
            }
        }
    }
    Some((out, amp))
}

/// The Hamiltonian as a list of operator strings over the window.
pub fn hamiltonian_terms(p: &ModelParams) -> Vec<Term> {
    use Ladder::*;
    let modes: Vec<i32> = (p.mode_window.lo..=p.mode_window.hi).collect();
    let mut terms = Vec::new();
    for &k in &modes {
        let d = k as f64 - p.omega / (2.0 * PI);
        terms.push(Term {
            coef: d * d,
            ops: vec![Create(k), Destroy(k)],
        });
    }
    for &k1 in &modes {
        for &k2 in &modes {
            let q = (k1 - k2) as f64;
            let f = if p.barrier_width == 0.0 {
                1.0
            } else {
                (-2.0 * PI * PI * p.barrier_width.powi(2) * q * q).exp()
            };
            terms.push(Term {
                coef: p.barrier * f,
                ops: vec![Create(k1), Destroy(k2)],
            });
        }
    }
    let g = p.effective_coupling();
    for &k1 in &modes {
        for &k2 in &modes {
            for &k3 in &modes {
                let k4 = k1 + k2 - k3;
                if modes.contains(&k4) {
                    terms.push(Term {
                        coef: 0.5 * g,
                        ops: vec![Create(k1), Create(k2), Destroy(k3), Destroy(k4)],
                    });
                }
            }
        }
    }
    terms
}

/// All kets with `n` atoms over `modes`, by recursion on the first mode.
pub fn enumerate(n: u32, modes: &[i32]) -> Vec<Ket> {
    match modes {
        [] => {
            if n == 0 {
                vec![Ket::new()]
            } else {
                vec![]
            }
        }
        [first, rest @ ..] => {
            let mut out = Vec::new();
            for here in 0..=n {
                for mut ket in enumerate(n - here, rest) {
                    if here > 0 {
                        ket.insert(*first, here);
                    }
                    out.push(ket);
                }
            }
            out
        }
    }
}

pub fn occupations(ket: &Ket, lo: i32, hi: i32) -> Vec<u8> {
    (lo..=hi).map(|k| ket.get(&k).copied().unwrap_or(0) as u8).collect()
}

/// Dense matrix of `terms` in the ordering of `basis`.
pub fn oracle_matrix(basis: &FockBasis, terms: &[Term]) -> DMatrix<f64> {
    let w = basis.window();
    let modes: Vec<i32> = (w.lo..=w.hi).collect();
    let kets = enumerate(basis.n_atoms() as u32, &modes);
    assert_eq!(kets.len(), basis.len());
    let index = |ket: &Ket| {
        basis
            .lookup(&occupations(ket, w.lo, w.hi))
            .expect("ket inside the basis")
    };
    let mut h = DMatrix::zeros(basis.len(), basis.len());
    for ket in &kets {
        let j = index(ket);
        for term in terms {
            if term.coef == 0.0 {
                continue;
            }
            if let Some((out, amp)) = apply_term(term, ket) {
                h[(index(&out), j)] += amp;
            }
        }
    }
    h
}

pub fn oracle_hamiltonian(p: &ModelParams, basis: &FockBasis) -> DMatrix<f64> {
    oracle_matrix(basis, &hamiltonian_terms(p))
}

/// Lowest eigenvalues of a symmetric matrix, ascending.
pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got}, want {want} (tol {tol})"
    );
}
