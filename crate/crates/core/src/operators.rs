//! Finite-volume lattice Hamiltonians.
//!
//! Three families are assembled as dense symmetric matrices:
//!
//! * the single-particle operator on a segment, nearest-neighbour hopping of
//!   amplitude 1 plus `g V(x)` on the diagonal;
//! * the interacting two-particle operator on a sub-square of the half-plane
//!   `x1 >= x2`, with potential `U(x) + g V(x1) + g V(x2)` and a statistics
//!   dependent condition on the diagonal `x1 = x2`;
//! * the non-interacting two-particle operator on a full product of segments,
//!   which is the tensor sum `H_a ⊗ I + I ⊗ H_b`.
//!
//! Hops are present only when both endpoints lie in the window (Dirichlet
//! restriction). Fermionic wavefunctions vanish on the diagonal, so diagonal
//! sites are left out of the basis. For bosons the diagonal is kept and the
//! matrix is the restriction of the full-plane operator to exchange-symmetric
//! functions, written in the orthonormal basis `δ_(x,x)` and
//! `(δ_(x1,x2) + δ_(x2,x1)) / √2`: a hop between a diagonal site and an
//! off-diagonal neighbour carries weight `√2`. This matrix is similar, through
//! a diagonal rescaling, to the one-sided stencil `2φ(x1+1, x2) + 2φ(x1, x2-1)`
//! on diagonal rows, so it has the same spectrum, and its hopping part keeps
//! norm at most 4.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::disorder::{potential_energy_2p, InteractionSpec, PotentialSample};
use crate::error::{MsaError, Result};
use crate::geometry::{Segment, Site2, SubSquare};
use crate::spectral::eig_sym;

/// A lattice site of either a segment or a two-particle window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Site {
    Line(i64),
    Plane(Site2),
}

impl Site {
    pub fn plane(x1: i64, x2: i64) -> Self {
        Site::Plane(Site2::new(x1, x2))
    }

    pub fn euclid_dist(&self, other: &Site) -> f64 {
        match (self, other) {
            (Site::Line(a), Site::Line(b)) => (a - b).abs() as f64,
            (Site::Plane(a), Site::Plane(b)) => a.euclid_dist(b),
            _ => f64::INFINITY,
        }
    }

    /// Lattice neighbours in a fixed direction order.
    pub fn neighbors(&self) -> Vec<Site> {
        match self {
            Site::Line(x) => vec![Site::Line(x - 1), Site::Line(x + 1)],
            Site::Plane(s) => s.neighbors().iter().map(|n| Site::Plane(*n)).collect(),
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Line(x) => write!(f, "{x}"),
            Site::Plane(s) => write!(f, "{s}"),
        }
    }
}

/// Ordered basis with reverse lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
}

impl Basis {
    pub fn new(sites: Vec<Site>) -> Self {
        let index = sites.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Self { sites, index }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn index_of(&self, s: &Site) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn require(&self, s: &Site) -> Result<usize> {
        self.index_of(s).ok_or_else(|| MsaError::NotInBasis(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistics {
    Bosonic,
    Fermionic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    SingleParticle,
    Interacting(Statistics),
    NonInteracting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: OperatorKind,
    pub g: f64,
    pub d: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    basis: Basis,
    entries: DMatrix<f64>,
    meta: Provenance,
}

impl HamiltonianMatrix {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn meta(&self) -> Provenance {
        self.meta
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)]).collect()
    }

    /// Number of lattice directions (2 on a segment, 4 in the plane).
    pub fn coordination(&self) -> usize {
        match self.basis.sites.first() {
            Some(Site::Line(_)) => 2,
            _ => 4,
        }
    }

    /// For every basis site, the basis index and hopping amplitude in each
    /// lattice direction, or `None` where the neighbour is outside the basis.
    pub fn hopping_table(&self) -> Vec<Vec<Option<(usize, f64)>>> {
        self.basis
            .sites
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.neighbors()
                    .iter()
                    .map(|n| self.basis.index_of(n).map(|j| (j, self.entries[(i, j)])))
                    .collect()
            })
            .collect()
    }

    /// Returns a copy with `delta` added to the diagonal entry `i`.
    pub fn perturbed(&self, i: usize, delta: f64) -> Self {
        let mut out = self.clone();
        out.entries[(i, i)] += delta;
        out
    }

    /// Plain-text dump: a basis header followed by `i j value` triplets of
    /// the non-zero entries.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# basis {}", self.dim())?;
        for (i, s) in self.basis.sites.iter().enumerate() {
            writeln!(w, "# {i} {s}")?;
        }
        writeln!(w, "# entries")?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let v = self.entries[(i, j)];
                if v != 0.0 {
                    writeln!(w, "{i} {j} {v:e}")?;
                }
            }
        }
        Ok(())
    }
}

fn check_finite_g(g: f64) -> Result<()> {
    if g.is_finite() {
        Ok(())
    } else {
        Err(MsaError::InvalidParameter(format!("amplitude g = {g}")))
    }
}

fn check_covered(window: &Segment, v: &PotentialSample) -> Result<()> {
    if v.window().contains_segment(window) {
        Ok(())
    } else {
        Err(MsaError::OutsideWindow(format!("{window} not covered by sample on {}", v.window())))
    }
}

/// Single-particle operator on a segment.
pub fn build_h1(window: Segment, v: &PotentialSample, g: f64) -> Result<HamiltonianMatrix> {
    check_finite_g(g)?;
    check_covered(&window, v)?;
    let n = window.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, x) in window.iter().enumerate() {
        m[(i, i)] = g * v.value(x)?;
        if i + 1 < n {
            m[(i, i + 1)] = 1.0;
            m[(i + 1, i)] = 1.0;
        }
    }
    Ok(HamiltonianMatrix {
        basis: Basis::new(window.iter().map(Site::Line).collect()),
        entries: m,
        meta: Provenance { kind: OperatorKind::SingleParticle, g, d: None },
    })
}

fn assemble_plane(
    sites: Vec<Site2>,
    diag: impl Fn(Site2) -> Result<f64>,
    hop: impl Fn(Site2, Site2) -> f64,
    meta: Provenance,
) -> Result<HamiltonianMatrix> {
    if sites.is_empty() {
        return Err(MsaError::EmptyWindow("two-particle basis is empty".into()));
    }
    let basis = Basis::new(sites.iter().map(|s| Site::Plane(*s)).collect());
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, s) in sites.iter().enumerate() {
        m[(i, i)] = diag(*s)?;
        // Right and up neighbours only; each hop is written once to both
        // triangles, so the matrix is symmetric by construction.
        for nb in [Site2::new(s.x1 + 1, s.x2), Site2::new(s.x1, s.x2 + 1)] {
            if let Some(j) = basis.index_of(&Site::Plane(nb)) {
                let w = hop(*s, nb);
                m[(i, j)] = w;
                m[(j, i)] = w;
            }
        }
    }
    Ok(HamiltonianMatrix { basis, entries: m, meta })
}

/// Interacting two-particle operator on a sub-square of the half-plane.
pub fn build_h2(
    sq: &SubSquare,
    v: &PotentialSample,
    inter: &InteractionSpec,
    g: f64,
    stat: Statistics,
) -> Result<HamiltonianMatrix> {
    check_finite_g(g)?;
    inter.validate()?;
    if !sq.clip() && sq.hseg().a() < sq.vseg().b() {
        return Err(MsaError::InvalidParameter(format!(
            "window {sq} leaves the half-plane x1 >= x2"
        )));
    }
    check_covered(&sq.potential_hull(), v)?;
    let sites: Vec<Site2> = sq
        .sites()
        .into_iter()
        .filter(|s| stat == Statistics::Bosonic || !s.is_on_diagonal())
        .collect();
    let sqrt2 = std::f64::consts::SQRT_2;
    assemble_plane(
        sites,
        |s| potential_energy_2p(s, v, inter, g),
        |a, b| {
            if a.is_on_diagonal() != b.is_on_diagonal() {
                sqrt2
            } else {
                1.0
            }
        },
        Provenance { kind: OperatorKind::Interacting(stat), g, d: Some(inter.d) },
    )
}

/// Non-interacting two-particle operator on the product `a × b`.
pub fn build_h2_ni(a: Segment, b: Segment, v: &PotentialSample, g: f64) -> Result<HamiltonianMatrix> {
    check_finite_g(g)?;
    check_covered(&a, v)?;
    check_covered(&b, v)?;
    let sites = a
        .iter()
        .flat_map(|x1| b.iter().map(move |x2| Site2::new(x1, x2)))
        .collect();
    assemble_plane(
        sites,
        |s| Ok(g * v.value(s.x1)? + g * v.value(s.x2)?),
        |_, _| 1.0,
        Provenance { kind: OperatorKind::NonInteracting, g, d: None },
    )
}

/// Pairwise sums of two spectra, sorted.
pub fn pairwise_sums(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Whether the spectrum of `h2` equals the pairwise sums of the spectra of
/// `h1a` and `h1b` within `tol`.
pub fn tensor_sum_check(
    h1a: &HamiltonianMatrix,
    h1b: &HamiltonianMatrix,
    h2: &HamiltonianMatrix,
    tol: f64,
) -> Result<bool> {
    Ok(tensor_sum_deviation(h1a, h1b, h2)? < tol)
}

/// Largest deviation between the sorted spectrum of `h2` and the sorted
/// pairwise sums of the spectra of `h1a` and `h1b`.
pub fn tensor_sum_deviation(
    h1a: &HamiltonianMatrix,
    h1b: &HamiltonianMatrix,
    h2: &HamiltonianMatrix,
) -> Result<f64> {
    if h1a.dim() * h1b.dim() != h2.dim() {
        return Err(MsaError::DimensionMismatch(format!(
            "{} x {} factors against a {}-dimensional product",
            h1a.dim(),
            h1b.dim(),
            h2.dim()
        )));
    }
    let sums = pairwise_sums(eig_sym(h1a)?.eigenvalues(), eig_sym(h1b)?.eigenvalues());
    let sd = eig_sym(h2)?;
    Ok(sd
        .eigenvalues()
        .iter()
        .zip(&sums)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}
