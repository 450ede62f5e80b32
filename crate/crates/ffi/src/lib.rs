//! C interface to msalab.
//!
//! Operators and spectra are opaque handles created and freed through this
//! API. Every fallible call returns an `MsalabStatus`; on failure a message
//! is available from `msalab_last_error` on the same thread.

use std::cell::RefCell;
use std::ffi::CString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use msalab::disorder::{DisorderSpec, Distribution, InteractionSpec};
use msalab::estimators::wegner_mc;
use msalab::geometry::{Segment, Site2, SubSquare};
use msalab::msa::{schedule, MsaParams};
use msalab::operators::{HamiltonianMatrix, Site, Statistics};
use msalab::spectral::{eig_sym, green, spectral_dist, SpectralData};
use msalab::stats::Status;
use msalab::system::{System, Volume};
use msalab::MsaError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsalabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EmptyWindow = 3,
    NotInBasis = 4,
    ResonantEnergy = 5,
    NonFinite = 6,
    NoSamples = 7,
    BufferTooSmall = 8,
    ProjectionsOverlap = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsalabLaw {
    Cauchy = 0,
    Gaussian = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsalabStatistics {
    Bosonic = 0,
    Fermionic = 1,
}

/// Outcome of a bound comparison.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MsalabBoundStatus {
    #[default]
    Ok = 0,
    Violated = 1,
    Unresolvable = 2,
}

/// Disorder law `V(x)` and coupling `g`; `width` is the Cauchy scale or the
/// Gaussian standard deviation.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MsalabDisorder {
    pub law: MsalabLaw,
    pub width: f64,
    pub g: f64,
    pub seed: u64,
}

/// Interaction `U(x1 - x2)`, constant on `0 <= x1 - x2 <= d`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MsalabInteraction {
    pub d: u32,
    pub strength: f64,
    pub statistics: MsalabStatistics,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MsalabProbEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound_value: f64,
    pub n: u64,
    pub successes: u64,
    pub status: MsalabBoundStatus,
}

/// Opaque operator handle.
pub struct MsalabHamiltonian(HamiltonianMatrix);

/// Opaque eigendecomposition handle.
pub struct MsalabSpectrum(SpectralData);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code(err: &MsaError) -> MsalabStatus {
    match err {
        MsaError::EmptyWindow(_) => MsalabStatus::EmptyWindow,
        MsaError::NotInBasis(_) | MsaError::OutsideWindow(_) => MsalabStatus::NotInBasis,
        MsaError::ResonantEnergy { .. } => MsalabStatus::ResonantEnergy,
        MsaError::NonFinite { .. } => MsalabStatus::NonFinite,
        MsaError::NoSamples => MsalabStatus::NoSamples,
        MsaError::ProjectionsOverlap(_) => MsalabStatus::ProjectionsOverlap,
        _ => MsalabStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and turning panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), (MsalabStatus, String)>) -> MsalabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MsalabStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MsalabStatus::Internal
        }
    }
}

fn lib<T>(r: msalab::Result<T>) -> Result<T, (MsalabStatus, String)> {
    r.map_err(|e| (code(&e), e.to_string()))
}

fn null<T>(p: *const T, name: &str) -> Result<(), (MsalabStatus, String)> {
    if p.is_null() {
        Err((MsalabStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn disorder_spec(d: &MsalabDisorder) -> msalab::Result<DisorderSpec> {
    let dist = match d.law {
        MsalabLaw::Cauchy => Distribution::Cauchy { scale: d.width },
        MsalabLaw::Gaussian => Distribution::Gaussian { sigma: d.width },
    };
    let spec = DisorderSpec::new(dist, d.g, d.seed);
    spec.validate()?;
    Ok(spec)
}

fn system(d: &MsalabDisorder, i: Option<&MsalabInteraction>) -> msalab::Result<System> {
    let spec = disorder_spec(d)?;
    Ok(match i {
        None => System::free_of_interaction(spec),
        Some(i) => {
            let stat = match i.statistics {
                MsalabStatistics::Bosonic => Statistics::Bosonic,
                MsalabStatistics::Fermionic => Statistics::Fermionic,
            };
            System::new(spec, InteractionSpec::constant(i.d, i.strength), stat)
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn msalab_version() -> *const libc::c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn msalab_last_error() -> *const libc::c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Single-particle operator on `[a, b]` for disorder replicate `replicate`.
///
/// # Safety
/// `disorder` must point to a valid `MsalabDisorder` and `out` to writable
/// storage for a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn msalab_h1_build(
    disorder: *const MsalabDisorder,
    a: i64,
    b: i64,
    replicate: u64,
    out: *mut *mut MsalabHamiltonian,
) -> MsalabStatus {
    guard(|| {
        null(disorder, "disorder")?;
        null(out, "out")?;
        let sys = lib(system(&*disorder, None))?;
        let vol = Volume::Segment { window: lib(Segment::new(a, b))? };
        let h = lib(sys.draw(&vol, replicate))?;
        *out = Box::into_raw(Box::new(MsalabHamiltonian(h)));
        Ok(())
    })
}

/// Interacting two-particle operator on the clipped square of radius
/// `radius` around `(c1, c2)`.
///
/// # Safety
/// `disorder` and `interaction` must point to valid structs and `out` to
/// writable storage for a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn msalab_h2_build(
    disorder: *const MsalabDisorder,
    interaction: *const MsalabInteraction,
    c1: i64,
    c2: i64,
    radius: i64,
    replicate: u64,
    out: *mut *mut MsalabHamiltonian,
) -> MsalabStatus {
    guard(|| {
        null(disorder, "disorder")?;
        null(interaction, "interaction")?;
        null(out, "out")?;
        let sys = lib(system(&*disorder, Some(&*interaction)))?;
        let sq = lib(SubSquare::centered(Site2::new(c1, c2), radius))?;
        let h = lib(sys.draw(&Volume::Square { square: sq }, replicate))?;
        *out = Box::into_raw(Box::new(MsalabHamiltonian(h)));
        Ok(())
    })
}

/// # Safety
/// `h` must be NULL or a handle from a build function, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn msalab_hamiltonian_free(h: *mut MsalabHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn msalab_hamiltonian_dim(h: *const MsalabHamiltonian, out: *mut usize) -> MsalabStatus {
    guard(|| {
        null(h, "h")?;
        null(out, "out")?;
        *out = (*h).0.dim();
        Ok(())
    })
}

/// Copies the matrix in row-major order into `buf`, which must hold
/// `dim * dim` values.
///
/// # Safety
/// `h` must be a live handle and `buf` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn msalab_hamiltonian_entries(
    h: *const MsalabHamiltonian,
    buf: *mut f64,
    len: usize,
) -> MsalabStatus {
    guard(|| {
        null(h, "h")?;
        null(buf, "buf")?;
        let m = (*h).0.entries();
        let n = m.nrows();
        if len < n * n {
            return Err((MsalabStatus::BufferTooSmall, format!("need {} values, got {len}", n * n)));
        }
        let out = std::slice::from_raw_parts_mut(buf, n * n);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = m[(i, j)];
            }
        }
        Ok(())
    })
}

unsafe fn site_index(h: *const MsalabHamiltonian, site: Site, out: *mut usize) -> MsalabStatus {
    guard(|| {
        null(h, "h")?;
        null(out, "out")?;
        *out = lib((*h).0.basis().require(&site))?;
        Ok(())
    })
}

/// Basis index of the one-particle site `x`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn msalab_hamiltonian_index_1p(
    h: *const MsalabHamiltonian,
    x: i64,
    out: *mut usize,
) -> MsalabStatus {
    site_index(h, Site::Line(x), out)
}

/// Basis index of the two-particle site `(x1, x2)`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn msalab_hamiltonian_index_2p(
    h: *const MsalabHamiltonian,
    x1: i64,
    x2: i64,
    out: *mut usize,
) -> MsalabStatus {
    site_index(h, Site::plane(x1, x2), out)
}

/// Diagonalizes `h`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn msalab_spectrum_new(
    h: *const MsalabHamiltonian,
    out: *mut *mut MsalabSpectrum,
) -> MsalabStatus {
    guard(|| {
        null(h, "h")?;
        null(out, "out")?;
        let sd = lib(eig_sym(&(*h).0))?;
        *out = Box::into_raw(Box::new(MsalabSpectrum(sd)));
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle from `msalab_spectrum_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn msalab_spectrum_free(s: *mut MsalabSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Copies the ascending eigenvalues into `buf`.
///
/// # Safety
/// `s` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn msalab_spectrum_eigenvalues(
    s: *const MsalabSpectrum,
    buf: *mut f64,
    len: usize,
) -> MsalabStatus {
    guard(|| {
        null(s, "s")?;
        null(buf, "buf")?;
        let ev = (*s).0.eigenvalues();
        if len < ev.len() {
            return Err((MsalabStatus::BufferTooSmall, format!("need {} values, got {len}", ev.len())));
        }
        std::slice::from_raw_parts_mut(buf, ev.len()).copy_from_slice(ev);
        Ok(())
    })
}

/// Distance from `e` to the spectrum.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn msalab_spectral_dist(s: *const MsalabSpectrum, e: f64, out: *mut f64) -> MsalabStatus {
    guard(|| {
        null(s, "s")?;
        null(out, "out")?;
        *out = spectral_dist(&(*s).0, e);
        Ok(())
    })
}

/// `G(y, u; E) = <δ_y, (H - E)^{-1} δ_u>` between basis indices `iy`, `iu`.
/// Fails with `ResonantEnergy` when `E` is numerically on the spectrum.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn msalab_green(
    s: *const MsalabSpectrum,
    iy: usize,
    iu: usize,
    e: f64,
    out: *mut f64,
) -> MsalabStatus {
    guard(|| {
        null(s, "s")?;
        null(out, "out")?;
        let sd = &(*s).0;
        let sites = sd.basis().sites();
        if iy >= sites.len() || iu >= sites.len() {
            return Err((MsalabStatus::NotInBasis, format!("index out of range 0..{}", sites.len())));
        }
        *out = lib(green(sd, &sites[iy], &sites[iu], e))?;
        Ok(())
    })
}

/// Scale schedule from `l0`, `m0` with growth `alpha` and resonance exponent
/// `beta`. Writes up to `cap` lengths and masses, the number written to
/// `count` and the mass product to `product`.
///
/// # Safety
/// `lengths` and `masses` must be writable for `cap` values; `count` and
/// `product` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn msalab_schedule(
    l0: u64,
    m0: f64,
    alpha: f64,
    beta: f64,
    k_max: usize,
    lengths: *mut u64,
    masses: *mut f64,
    cap: usize,
    count: *mut usize,
    product: *mut f64,
) -> MsalabStatus {
    guard(|| {
        null(lengths, "lengths")?;
        null(masses, "masses")?;
        null(count, "count")?;
        null(product, "product")?;
        let params = MsaParams { alpha, beta, ..MsaParams::default() };
        let s = lib(schedule(l0, m0, &params, k_max))?;
        let k = s.lengths.len().min(cap);
        std::slice::from_raw_parts_mut(lengths, k).copy_from_slice(&s.lengths[..k]);
        let km = s.masses.len().min(cap);
        std::slice::from_raw_parts_mut(masses, km).copy_from_slice(&s.masses[..km]);
        *count = k;
        *product = s.product;
        Ok(())
    })
}

/// Monte Carlo estimate of `P{dist(E, σ(H)) < r}` for the two-particle
/// square of radius `radius` around `(c1, c2)`.
///
/// # Safety
/// `disorder` and `interaction` must point to valid structs and `out` must
/// be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn msalab_wegner_mc(
    disorder: *const MsalabDisorder,
    interaction: *const MsalabInteraction,
    c1: i64,
    c2: i64,
    radius: i64,
    e: f64,
    r: f64,
    n: u64,
    out: *mut MsalabProbEstimate,
) -> MsalabStatus {
    guard(|| {
        null(disorder, "disorder")?;
        null(interaction, "interaction")?;
        null(out, "out")?;
        let sys = lib(system(&*disorder, Some(&*interaction)))?;
        let sq = lib(SubSquare::centered(Site2::new(c1, c2), radius))?;
        let est = lib(wegner_mc(&sys, &Volume::Square { square: sq }, e, r, n))?.estimate;
        *out = MsalabProbEstimate {
            p_hat: est.p_hat,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            bound_value: est.bound_value().unwrap_or(f64::NAN),
            n: est.n,
            successes: est.successes,
            status: match est.status {
                Status::Ok => MsalabBoundStatus::Ok,
                Status::BoundViolated => MsalabBoundStatus::Violated,
                Status::BoundUnresolvable => MsalabBoundStatus::Unresolvable,
            },
        };
        Ok(())
    })
}
