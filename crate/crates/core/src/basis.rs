//! Fixed-N bosonic Fock basis over a window of angular momentum modes.
//!
//! States are stored densely as occupation vectors, one `u8` per mode, in
//! descending lexicographic order: for two modes and two atoms the order is
//! (2,0), (1,1), (0,2). The index of a state is recovered from its
//! occupations by combinatorial ranking, so no hash table is kept.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::params::{ModeWindow, ModelParams};

/// Default cap on the number of basis states.
pub const DEFAULT_MAX_STATES: usize = 5_000_000;

/// Occupation numbers n_k, one per mode of the window (lowest k first).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FockState {
    pub occupations: Vec<u8>,
}

impl FockState {
    pub fn new(occupations: Vec<u8>) -> Self {
        Self { occupations }
    }

    pub fn n_atoms(&self) -> usize {
        self.occupations.iter().map(|&n| n as usize).sum()
    }
}

/// Σ_k n_k·k for occupations laid out over `window`.
pub fn total_momentum(occupations: &[u8], window: ModeWindow) -> i64 {
    occupations
        .iter()
        .zip(window.modes())
        .map(|(&n, k)| n as i64 * k as i64)
        .sum()
}

/// Multiset coefficient C(n + m - 1, n): number of ways to place `n`
/// bosons into `m` modes.
pub fn multiset_count(n: usize, m: usize) -> u128 {
    if m == 0 {
        return u128::from(n == 0);
    }
    binomial((n + m - 1) as u128, n as u128)
}

fn binomial(n: u128, k: u128) -> u128 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[derive(Debug, Clone)]
pub struct FockBasis {
    n_atoms: usize,
    window: ModeWindow,
    /// Row-major occupation table, `n_modes` entries per state.
    occupations: Vec<u8>,
    momenta: Vec<i64>,
    /// counts[r][m] = number of compositions of r atoms into m modes.
    counts: Vec<Vec<usize>>,
}

impl FockBasis {
    /// Enumerate every occupation vector with Σ n_k = N over the window.
    pub fn enumerate(params: &ModelParams) -> Result<Self> {
        Self::with_capacity(params.n_atoms, params.mode_window, DEFAULT_MAX_STATES)
    }

    pub fn with_capacity(n_atoms: usize, window: ModeWindow, max_states: usize) -> Result<Self> {
        let m = window.len();
        if m == 0 {
            return Err(Error::InvalidParameter("empty mode window".into()));
        }
        if n_atoms > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "at most {} atoms supported",
                u8::MAX
            )));
        }
        let size = multiset_count(n_atoms, m);
        if size > max_states as u128 {
            return Err(Error::Capacity {
                size,
                max: max_states,
            });
        }
        let size = size as usize;

        let mut counts = vec![vec![0usize; m + 2]; n_atoms + 1];
        for (r, row) in counts.iter_mut().enumerate() {
            for (mm, c) in row.iter_mut().enumerate() {
                *c = multiset_count(r, mm) as usize;
            }
        }

        let mut occupations = Vec::with_capacity(size * m);
        let mut current = vec![0u8; m];
        fill(&mut current, 0, n_atoms, &mut occupations);
        debug_assert_eq!(occupations.len(), size * m);

        let momenta = occupations
            .chunks_exact(m)
            .map(|occ| total_momentum(occ, window))
            .collect();

        Ok(Self {
            n_atoms,
            window,
            occupations,
            momenta,
            counts,
        })
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_modes(&self) -> usize {
        self.window.len()
    }

    pub fn window(&self) -> ModeWindow {
        self.window
    }

    /// Occupations of state `i`.
    pub fn occupations(&self, i: usize) -> &[u8] {
        let m = self.n_modes();
        &self.occupations[i * m..(i + 1) * m]
    }

    pub fn state(&self, i: usize) -> FockState {
        FockState::new(self.occupations(i).to_vec())
    }

    /// Total angular momentum K of state `i`.
    pub fn momentum(&self, i: usize) -> i64 {
        self.momenta[i]
    }

    pub fn momenta(&self) -> &[i64] {
        &self.momenta
    }

    /// Dense index of an occupation vector, or `None` if it does not belong
    /// to this basis.
    pub fn lookup(&self, occupations: &[u8]) -> Option<usize> {
        let m = self.n_modes();
        if occupations.len() != m {
            return None;
        }
        let total: usize = occupations.iter().map(|&n| n as usize).sum();
        if total != self.n_atoms {
            return None;
        }
        Some(self.rank_unchecked(occupations))
    }

    /// Rank of a valid occupation vector in descending lexicographic order.
    pub(crate) fn rank_unchecked(&self, occupations: &[u8]) -> usize {
        let m = self.n_modes();
        let mut remaining = self.n_atoms;
        let mut rank = 0;
        for (i, &n) in occupations.iter().enumerate() {
            let n = n as usize;
            if n < remaining {
                // States sharing the prefix but holding more atoms in mode i.
                rank += self.counts[remaining - n - 1][m - i];
            }
            remaining -= n;
            if remaining == 0 {
                break;
            }
        }
        rank
    }

    /// Partition of state indices by total angular momentum.
    pub fn momentum_blocks(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut blocks: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, &k) in self.momenta.iter().enumerate() {
            blocks.entry(k).or_default().push(i);
        }
        blocks
    }

    /// Index of the state with all atoms in mode `k`.
    pub fn condensate_index(&self, k: i32) -> Option<usize> {
        if !self.window.contains(k) {
            return None;
        }
        let mut occ = vec![0u8; self.n_modes()];
        occ[(k - self.window.lo) as usize] = self.n_atoms as u8;
        self.lookup(&occ)
    }

    /// Debug dump: `index,K,occupations` with occupations space separated.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# fock basis: n_atoms={} modes=[{}, {}]",
            self.n_atoms, self.window.lo, self.window.hi
        )?;
        writeln!(out, "index,K,occupations")?;
        for i in 0..self.len() {
            let occ: Vec<String> = self.occupations(i).iter().map(|n| n.to_string()).collect();
            writeln!(out, "{},{},{}", i, self.momentum(i), occ.join(" "))?;
        }
        Ok(())
    }
}

fn fill(current: &mut [u8], pos: usize, remaining: usize, out: &mut Vec<u8>) {
    let m = current.len();
    if pos == m - 1 {
        current[pos] = remaining as u8;
        out.extend_from_slice(current);
        return;
    }
    for n in (0..=remaining).rev() {
        current[pos] = n as u8;
        fill(current, pos + 1, remaining - n, out);
    }
    current[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize, lo: i32, hi: i32) -> FockBasis {
        FockBasis::with_capacity(n, ModeWindow::new(lo, hi).unwrap(), DEFAULT_MAX_STATES).unwrap()
    }

    #[test]
    fn two_atoms_two_modes() {
        let b = basis(2, 0, 1);
        assert_eq!(b.len(), 3);
        assert_eq!(b.occupations(0), &[2, 0]);
        assert_eq!(b.occupations(1), &[1, 1]);
        assert_eq!(b.occupations(2), &[0, 2]);
        let blocks = b.momentum_blocks();
        assert_eq!(blocks[&0], vec![0]);
        assert_eq!(blocks[&1], vec![1]);
        assert_eq!(blocks[&2], vec![2]);
    }

    #[test]
    fn sizes() {
        assert_eq!(basis(5, -8, 9).len(), 26334);
        assert_eq!(basis(1, -1, 2).len(), 4);
        assert_eq!(multiset_count(5, 18), 26334);
    }

    #[test]
    fn total_momentum_examples() {
        let w = ModeWindow::new(-1, 2).unwrap();
        assert_eq!(total_momentum(&[0, 4, 0, 0], w), 0);
        assert_eq!(total_momentum(&[0, 0, 4, 0], w), 4);
        assert_eq!(total_momentum(&[1, 3, 0, 1], w), 1);
    }

    #[test]
    fn lookup_inverts_enumeration() {
        let b = basis(4, -2, 3);
        for i in 0..b.len() {
            assert_eq!(b.lookup(b.occupations(i)), Some(i));
        }
        assert_eq!(b.lookup(&[1, 0, 0, 0, 0, 0]), None);
        assert_eq!(b.lookup(&[4, 0, 0]), None);
    }

    #[test]
    fn capacity_error() {
        let w = ModeWindow::new(-8, 9).unwrap();
        assert!(matches!(
            FockBasis::with_capacity(5, w, 1000),
            Err(Error::Capacity { size: 26334, .. })
        ));
    }

    #[test]
    fn condensate_index() {
        let b = basis(3, -1, 2);
        let i = b.condensate_index(1).unwrap();
        assert_eq!(b.occupations(i), &[0, 0, 3, 0]);
        assert_eq!(b.momentum(i), 3);
        assert_eq!(b.condensate_index(5), None);
    }

    #[test]
    fn csv_dump() {
        let b = basis(2, 0, 1);
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("index,K,occupations\n0,0,2 0\n1,1,1 1\n2,2,0 2\n"));
    }
}
