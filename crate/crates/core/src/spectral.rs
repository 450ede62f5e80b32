//! Eigendecomposition, spectral distance, Green's functions and averaged
//! spectral quantities.
//!
//! Green's functions use the convention `G(y, u; E) = <(H - E)^{-1} δ_u, δ_y>`,
//! so the eigen-expansion carries denominators `E_j - E`. Every threshold
//! downstream compares `|G|`, so the global sign is immaterial there.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MsaError, Result};
use crate::operators::{Basis, HamiltonianMatrix, Site};
use crate::stats::{mean_stderr, ComplexEstimate};
use crate::system::{System, Volume};

/// Relative distance to the spectrum below which a Green's function is
/// refused.
pub const RESONANCE_GUARD: f64 = 1e-12;

/// Sorted eigenvalues and matching orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    basis: Basis,
    norm: f64,
}

impl SpectralData {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Operator norm, `max |E_j|`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Component `ψ_j(i)`.
    pub fn psi(&self, j: usize, i: usize) -> f64 {
        self.eigenvectors[(i, j)]
    }

    fn index(&self, s: &Site) -> Result<usize> {
        self.basis.require(s)
    }

    /// Index of the eigenvalue closest to `e` (lowest index on ties).
    pub fn nearest(&self, e: f64) -> usize {
        let k = self.eigenvalues.partition_point(|&x| x < e);
        match (k.checked_sub(1), self.eigenvalues.get(k)) {
            (Some(lo), Some(&hi)) => {
                if (e - self.eigenvalues[lo]).abs() <= (hi - e).abs() {
                    lo
                } else {
                    k
                }
            }
            (Some(lo), None) => lo,
            (None, _) => 0,
        }
    }
}

/// Full decomposition of a real symmetric matrix. Eigenvalues ascend;
/// each eigenvector is signed so that its largest-magnitude component (first
/// one on ties) is positive, which makes the output deterministic.
pub fn eig_sym(h: &HamiltonianMatrix) -> Result<SpectralData> {
    let m = h.entries();
    for (idx, v) in m.iter().enumerate() {
        if !v.is_finite() {
            let n = m.nrows();
            return Err(MsaError::NonFinite { row: idx % n, col: idx / n });
        }
    }
    let n = m.nrows();
    if n == 0 {
        return Err(MsaError::EmptyWindow("zero-dimensional operator".into()));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let s = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vecs[(i, j)] = s * col[i];
        }
    }
    let norm = eigenvalues.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    Ok(SpectralData { eigenvalues, eigenvectors: vecs, basis: h.basis().clone(), norm })
}

/// `min_j |E_j - E|`.
pub fn spectral_dist(sd: &SpectralData, e: f64) -> f64 {
    (sd.eigenvalues[sd.nearest(e)] - e).abs()
}

fn guard(sd: &SpectralData, e: f64) -> Result<()> {
    let dist = spectral_dist(sd, e);
    if dist < RESONANCE_GUARD * sd.norm.max(1.0) {
        Err(MsaError::ResonantEnergy { energy: e, distance: dist })
    } else {
        Ok(())
    }
}

/// `G(y, u; E) = Σ_j ψ_j(y) ψ_j(u) / (E_j - E)`.
pub fn green(sd: &SpectralData, y: &Site, u: &Site, e: f64) -> Result<f64> {
    guard(sd, e)?;
    let (iy, iu) = (sd.index(y)?, sd.index(u)?);
    Ok(green_at(sd, iy, iu, e))
}

/// Green's function on basis indices, without the resonance guard.
pub fn green_at(sd: &SpectralData, iy: usize, iu: usize, e: f64) -> f64 {
    // Summed in a fixed order with the factors of the smaller index first,
    // so that swapping y and u gives the identical float.
    let (a, b) = if iy <= iu { (iy, iu) } else { (iu, iy) };
    sd.eigenvalues
        .iter()
        .enumerate()
        .map(|(j, ej)| sd.psi(j, a) * sd.psi(j, b) / (ej - e))
        .sum()
}

/// `G(y, ·; E)` on every basis site.
pub fn green_row(sd: &SpectralData, y: &Site, e: f64) -> Result<Vec<f64>> {
    guard(sd, e)?;
    let iy = sd.index(y)?;
    let coef = DVector::from_iterator(
        sd.dim(),
        sd.eigenvalues.iter().enumerate().map(|(j, ej)| sd.psi(j, iy) / (ej - e)),
    );
    Ok((&sd.eigenvectors * coef).iter().copied().collect())
}

/// Green's function from an LU solve of `(H - E) w = δ_u`.
pub fn green_direct(h: &HamiltonianMatrix, y: &Site, u: &Site, e: f64) -> Result<f64> {
    let iy = h.basis().require(y)?;
    let iu = h.basis().require(u)?;
    let n = h.dim();
    let a = h.entries() - DMatrix::identity(n, n) * e;
    let mut rhs = DVector::zeros(n);
    rhs[iu] = 1.0;
    let w = a
        .lu()
        .solve(&rhs)
        .ok_or(MsaError::ResonantEnergy { energy: e, distance: 0.0 })?;
    Ok(w[iy])
}

/// Number of eigenvalues with `|E_j - E| < r`.
pub fn eigen_count_in(sd: &SpectralData, e: f64, r: f64) -> usize {
    sd.eigenvalues.iter().filter(|x| (*x - e).abs() < r).count()
}

/// `<δ_u, e^{itH} δ_u> = Σ_j |ψ_j(u)|² e^{itE_j}`.
pub fn diag_propagator(sd: &SpectralData, iu: usize, t: f64) -> Complex64 {
    sd.eigenvalues
        .iter()
        .enumerate()
        .map(|(j, ej)| sd.psi(j, iu).powi(2) * Complex64::new(0.0, t * ej).exp())
        .sum()
}

/// Disorder average of `<δ_u, e^{itH} δ_u>` over `n` replicates.
pub fn khat_direct(sys: &System, volume: &Volume, t: f64, n: u64, u: &Site) -> Result<ComplexEstimate> {
    if n == 0 {
        return Err(MsaError::NoSamples);
    }
    let samples = (0..n)
        .into_par_iter()
        .map(|rep| {
            let sd = eig_sym(&sys.draw(volume, rep)?)?;
            Ok(diag_propagator(&sd, sd.index(u)?, t))
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexEstimate::from_samples(&samples)
}

/// Histogram estimate of the averaged spectral measure at `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasureEstimate {
    /// Bin edges, increasing.
    pub grid: Vec<f64>,
    /// Mass per unit energy in each bin.
    pub density: Vec<f64>,
    /// Mass per bin.
    pub mass: Vec<f64>,
    /// Standard error of the mass per bin.
    pub mass_stderr: Vec<f64>,
    /// Average mass falling outside the grid.
    pub outside: f64,
    pub n_samples: u64,
}

impl SpectralMeasureEstimate {
    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// Averages `<δ_u, 1_bin(H) δ_u>` over `n` replicates. Bins are half-open
/// `[e_k, e_{k+1})`, the last one closed.
pub fn spectral_measure(
    sys: &System,
    volume: &Volume,
    grid: &[f64],
    n: u64,
    u: &Site,
) -> Result<SpectralMeasureEstimate> {
    if n == 0 {
        return Err(MsaError::NoSamples);
    }
    if grid.len() < 2 || grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(MsaError::InvalidParameter("grid must have at least two increasing edges".into()));
    }
    let nb = grid.len() - 1;
    let per_sample = (0..n)
        .into_par_iter()
        .map(|rep| {
            let sd = eig_sym(&sys.draw(volume, rep)?)?;
            let iu = sd.index(u)?;
            let mut bins = vec![0.0; nb + 1];
            for (j, ej) in sd.eigenvalues.iter().enumerate() {
                let w = sd.psi(j, iu).powi(2);
                let k = grid.partition_point(|&x| x <= *ej);
                let slot = if k == 0 || *ej > grid[nb] {
                    nb
                } else {
                    (k - 1).min(nb - 1)
                };
                bins[slot] += w;
            }
            Ok(bins)
        })
        .collect::<Result<Vec<_>>>()?;
    let column = |k: usize| per_sample.iter().map(|b| b[k]).collect::<Vec<_>>();
    let mut mass = Vec::with_capacity(nb);
    let mut mass_stderr = Vec::with_capacity(nb);
    for k in 0..nb {
        let (m, s) = mean_stderr(&column(k));
        mass.push(m);
        mass_stderr.push(s);
    }
    let density = mass.iter().zip(grid.windows(2)).map(|(m, w)| m / (w[1] - w[0])).collect();
    let outside = mean_stderr(&column(nb)).0;
    Ok(SpectralMeasureEstimate { grid: grid.to_vec(), density, mass, mass_stderr, outside, n_samples: n })
}
