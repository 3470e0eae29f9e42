//! Exact diagonalization of small transverse-field Ising models in the
//! quasi-spin language, used as ground truth for the other engines.
//!
//! Basis bit l set means A_l^z = −1. The Hamiltonian is
//! H = −Σ_l A_l^z − λ Σ_⟨l,l′⟩ A_l^x A_l′^x on a periodic chain or patch, and
//! the ground state is taken in the sector ∏_l A_l^z = +1.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fermion::StringFactor;
use crate::lattice::{quasi_spin_edge, BoundaryGeometry, Star};

pub const MAX_CHAIN_SITES: usize = 14;
pub const MAX_PATCH_SITES: usize = 16;
/// Up to this many sites the even sector is diagonalized densely.
pub const DENSE_SITES: usize = 10;

const LANCZOS_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Chain {
        n: usize,
    },
    /// Periodic `rows × cols` patch; site index `row * cols + col`.
    Patch {
        rows: usize,
        cols: usize,
    },
}

impl Layout {
    pub fn sites(&self) -> usize {
        match *self {
            Layout::Chain { n } => n,
            Layout::Patch { rows, cols } => rows * cols,
        }
    }

    /// Ising bonds as site pairs. A period of two yields the same pair twice,
    /// as on the torus.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds = Vec::new();
        let mut add = |a: usize, b: usize| {
            if a != b {
                bonds.push((a, b));
            }
        };
        match *self {
            Layout::Chain { n } => (0..n).for_each(|l| add(l, (l + 1) % n)),
            Layout::Patch { rows, cols } => {
                for r in 0..rows {
                    for c in 0..cols {
                        add(r * cols + c, r * cols + (c + 1) % cols);
                        add(r * cols + c, ((r + 1) % rows) * cols + c);
                    }
                }
            }
        }
        bonds
    }
}

/// Ground state as a full amplitude vector over 2^M basis states.
#[derive(Clone, Debug)]
pub struct DenseGroundState {
    pub layout: Layout,
    pub lambda: f64,
    pub energy: f64,
    pub amplitudes: Vec<f64>,
}

struct Hamiltonian {
    sites: usize,
    lambda: f64,
    bond_masks: Vec<usize>,
}

impl Hamiltonian {
    fn new(layout: Layout, lambda: f64) -> Self {
        let bond_masks = layout
            .bonds()
            .iter()
            .map(|&(a, b)| (1 << a) | (1 << b))
            .collect();
        Self {
            sites: layout.sites(),
            lambda,
            bond_masks,
        }
    }

    fn diagonal(&self, s: usize) -> f64 {
        -(self.sites as f64 - 2.0 * s.count_ones() as f64)
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.par_iter_mut()
            .enumerate()
            .with_min_len(1024)
            .for_each(|(s, o)| {
                let mut acc = self.diagonal(s) * v[s];
                for &m in &self.bond_masks {
                    acc -= self.lambda * v[s ^ m];
                }
                *o = acc;
            });
    }
}

/// Lowest state of the even sector for a chain or patch.
pub fn ed_ground_state(layout: Layout, lambda: f64) -> Result<DenseGroundState> {
    let sites = layout.sites();
    let cap = match layout {
        Layout::Chain { .. } => MAX_CHAIN_SITES,
        Layout::Patch { .. } => MAX_PATCH_SITES,
    };
    if sites > cap {
        return Err(Error::DimensionCap { dim: sites, cap });
    }
    if sites == 0 {
        return Err(Error::InvalidLattice("empty model".into()));
    }
    let h = Hamiltonian::new(layout, lambda);
    let (energy, mut amplitudes) = if sites <= DENSE_SITES {
        dense_even(&h)
    } else {
        lanczos_even(&h)?
    };
    let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
    let flip = if amplitudes[0] < 0.0 { -1.0 } else { 1.0 };
    amplitudes.iter_mut().for_each(|a| *a *= flip / norm);
    Ok(DenseGroundState {
        layout,
        lambda,
        energy,
        amplitudes,
    })
}

fn even_states(sites: usize) -> Vec<usize> {
    (0..1usize << sites)
        .filter(|s| s.count_ones() % 2 == 0)
        .collect()
}

fn dense_even(h: &Hamiltonian) -> (f64, Vec<f64>) {
    let states = even_states(h.sites);
    let index: BTreeMap<usize, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let dim = states.len();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (i, &s) in states.iter().enumerate() {
        m[(i, i)] += h.diagonal(s);
        for &mask in &h.bond_masks {
            m[(index[&(s ^ mask)], i)] -= h.lambda;
        }
    }
    let eig = m.symmetric_eigen();
    let (best, energy) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    let mut full = vec![0.0; 1 << h.sites];
    for (i, &s) in states.iter().enumerate() {
        full[s] = eig.eigenvectors[(i, best)];
    }
    (energy, full)
}

fn lanczos_even(h: &Hamiltonian) -> Result<(f64, Vec<f64>)> {
    let dim = 1usize << h.sites;
    let sector = dim / 2;
    // Deterministic start vector with overlap on every even basis state.
    let mut v: Vec<f64> = (0..dim)
        .map(|s| {
            if s.count_ones() % 2 == 0 {
                1.0 + 0.01 * ((s * 2654435761) % 97) as f64
            } else {
                0.0
            }
        })
        .collect();
    normalize(&mut v);
    let max_steps = sector.min(300);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut w = vec![0.0; dim];
    let mut last_energy = f64::INFINITY;
    for step in 0..max_steps {
        h.apply(&v, &mut w);
        let alpha = dot(&v, &w);
        basis.push(v.clone());
        for b in &basis {
            let c = dot(b, &w);
            axpy(-c, b, &mut w);
        }
        for b in &basis {
            let c = dot(b, &w);
            axpy(-c, b, &mut w);
        }
        alphas.push(alpha);
        let beta = dot(&w, &w).sqrt();
        let (energy, y) = tridiagonal_ground(&alphas, &betas);
        let residual = beta * y[step].abs();
        if residual < LANCZOS_TOL || beta < 1e-14 || step + 1 == max_steps {
            if residual >= 1e-9 && beta >= 1e-14 {
                return Err(Error::NoConvergence(format!(
                    "Lanczos residual {residual:e}"
                )));
            }
            let mut out = vec![0.0; dim];
            for (c, b) in y.iter().zip(&basis) {
                axpy(*c, b, &mut out);
            }
            return Ok((energy, out));
        }
        last_energy = energy;
        betas.push(beta);
        v = w.iter().map(|x| x / beta).collect();
    }
    Err(Error::NoConvergence(format!(
        "Lanczos stalled at energy {last_energy}"
    )))
}

fn tridiagonal_ground(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = t.symmetric_eigen();
    let (best, energy) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    let y: DVector<f64> = eig.eigenvectors.column(best).into_owned();
    (energy, y.iter().copied().collect())
}

// Sequential so that results do not depend on the thread count.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut()
        .zip(x)
        .with_min_len(4096)
        .for_each(|(yi, xi)| *yi += c * xi);
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

impl DenseGroundState {
    /// The even-sector state with every A^x bond satisfied, (|+…+⟩ + |−…−⟩)/√2.
    pub fn polarized_x(layout: Layout) -> Self {
        let sites = layout.sites();
        let amp = (2.0f64).powf(-((sites - 1) as f64) / 2.0);
        let amplitudes = (0..1usize << sites)
            .map(|s| if s.count_ones() % 2 == 0 { amp } else { 0.0 })
            .collect();
        Self {
            layout,
            lambda: f64::INFINITY,
            energy: f64::NAN,
            amplitudes,
        }
    }

    pub fn sites(&self) -> usize {
        self.layout.sites()
    }

    /// ⟨ψ| ∏ factors |ψ⟩, factors applied right to left.
    pub fn expectation(&self, factors: &[StringFactor]) -> f64 {
        let mut v = self.amplitudes.clone();
        for &f in factors.iter().rev() {
            match f {
                StringFactor::Z(l) => apply_z(&mut v, l),
                StringFactor::X(l) => apply_x(&mut v, l),
                StringFactor::XPair(l, lp) => {
                    apply_x(&mut v, lp);
                    apply_x(&mut v, l);
                }
            }
        }
        dot(&self.amplitudes, &v)
    }

    /// ⟨A_l^x A_l′^x⟩ summed over the first-neighbour bond list of the layout.
    pub fn bond_energy(&self) -> f64 {
        let h = Hamiltonian::new(self.layout, self.lambda);
        let mut w = vec![0.0; self.amplitudes.len()];
        h.apply(&self.amplitudes, &mut w);
        dot(&self.amplitudes, &w)
    }

    /// Probabilities of the A^x eigenbasis (x-configurations, bit set = −1).
    pub fn x_basis_probabilities(&self) -> Vec<f64> {
        let mut v = self.amplitudes.clone();
        let n = v.len();
        let mut h = 1;
        while h < n {
            for i in (0..n).step_by(2 * h) {
                for j in i..i + h {
                    let (a, b) = (v[j], v[j + h]);
                    v[j] = a + b;
                    v[j + h] = a - b;
                }
            }
            h *= 2;
        }
        let scale = 1.0 / n as f64;
        v.iter().map(|a| a * a * scale).collect()
    }
}

fn apply_z(v: &mut [f64], l: usize) {
    for (s, a) in v.iter_mut().enumerate() {
        if s >> l & 1 == 1 {
            *a = -*a;
        }
    }
}

fn apply_x(v: &mut [f64], l: usize) {
    let bit = 1 << l;
    for s in 0..v.len() {
        if s & bit == 0 {
            v.swap(s, s | bit);
        }
    }
}

/// Joint distribution of the boundary spin configuration Σ (bit i set means
/// Σ_i = −1, spins in loop order), from the x-basis distribution of the stars.
fn boundary_distribution(
    state: &DenseGroundState,
    geom: &BoundaryGeometry,
) -> Result<BTreeMap<u64, f64>> {
    let stars = geom.boundary_stars();
    let star_index: BTreeMap<Star, usize> =
        stars.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    if stars.len() > 24 {
        return Err(Error::DimensionCap {
            dim: stars.len(),
            cap: 24,
        });
    }
    let spins: Vec<(usize, usize)> = geom
        .loops
        .iter()
        .flat_map(|l| l.edges.iter())
        .map(|&e| {
            let (a, b) = quasi_spin_edge(e, geom.lattice_n);
            (star_index[&a], star_index[&b])
        })
        .collect();

    // Distribution of boundary-star x-values, as map from star bitmask to probability.
    let star_dist = boundary_star_distribution(state, geom, &stars)?;
    let mut out: BTreeMap<u64, f64> = BTreeMap::new();
    for (xmask, p) in star_dist {
        let mut sigma = 0u64;
        for (i, &(a, b)) in spins.iter().enumerate() {
            if (xmask >> a ^ xmask >> b) & 1 == 1 {
                sigma |= 1 << i;
            }
        }
        *out.entry(sigma).or_default() += p;
    }
    Ok(out)
}

fn boundary_star_distribution(
    state: &DenseGroundState,
    geom: &BoundaryGeometry,
    stars: &[Star],
) -> Result<Vec<(u64, f64)>> {
    let px = state.x_basis_probabilities();
    match state.layout {
        Layout::Chain { n } => {
            if n != geom.lattice_n {
                return Err(Error::InvalidConfig(format!(
                    "chain of length {n} on a lattice of size {}",
                    geom.lattice_n
                )));
            }
            // Rows are independent copies of the chain.
            let mut joint = vec![(0u64, 1.0)];
            let mut rows: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
            for (i, s) in stars.iter().enumerate() {
                rows.entry(s.row).or_default().push((i, s.col));
            }
            for members in rows.values() {
                let mut marginal: BTreeMap<u64, f64> = BTreeMap::new();
                for (x, &p) in px.iter().enumerate() {
                    let mut key = 0u64;
                    for &(i, col) in members {
                        if x >> col & 1 == 1 {
                            key |= 1 << i;
                        }
                    }
                    *marginal.entry(key).or_default() += p;
                }
                joint = joint
                    .iter()
                    .flat_map(|&(k, p)| marginal.iter().map(move |(&m, &q)| (k | m, p * q)))
                    .collect();
            }
            Ok(joint)
        }
        Layout::Patch { rows, cols } => {
            if rows != geom.lattice_n || cols != geom.lattice_n {
                return Err(Error::InvalidConfig(
                    "patch does not match the lattice".into(),
                ));
            }
            let mut marginal: BTreeMap<u64, f64> = BTreeMap::new();
            for (x, &p) in px.iter().enumerate() {
                let mut key = 0u64;
                for (i, s) in stars.iter().enumerate() {
                    if x >> (s.row * cols + s.col) & 1 == 1 {
                        key |= 1 << i;
                    }
                }
                *marginal.entry(key).or_default() += p;
            }
            Ok(marginal.into_iter().collect())
        }
    }
}

/// Tr ρ²_∂A by direct summation of the squared configuration probabilities.
pub fn ed_boundary_purity(state: &DenseGroundState, geom: &BoundaryGeometry) -> Result<f64> {
    Ok(boundary_distribution(state, geom)?
        .values()
        .map(|p| p * p)
        .sum())
}

/// Probabilities of all boundary configurations Σ.
pub fn ed_boundary_probabilities(
    state: &DenseGroundState,
    geom: &BoundaryGeometry,
) -> Result<BTreeMap<u64, f64>> {
    boundary_distribution(state, geom)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionEstimate {
    pub rate: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Monte Carlo collision rate of two independently sampled boundary
/// configurations. Deterministic for a fixed seed.
pub fn ed_sample_collision(
    state: &DenseGroundState,
    geom: &BoundaryGeometry,
    samples: u64,
    seed: u64,
) -> Result<CollisionEstimate> {
    let dist: Vec<(u64, f64)> = boundary_distribution(state, geom)?.into_iter().collect();
    let weights = WeightedIndex::new(dist.iter().map(|&(_, p)| p.max(0.0)))
        .map_err(|e| Error::InvalidConfig(format!("sampling weights: {e}")))?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let a = dist[weights.sample(&mut rng)].0;
        let b = dist[weights.sample(&mut rng)].0;
        if a == b {
            hits += 1;
        }
    }
    let rate = hits as f64 / samples as f64;
    Ok(CollisionEstimate {
        rate,
        stderr: (rate * (1.0 - rate) / samples as f64).sqrt(),
        samples,
    })
}
