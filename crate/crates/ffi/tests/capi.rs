use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use msalab_ffi::*;

const CAUCHY: MsalabDisorder = MsalabDisorder { law: MsalabLaw::Cauchy, width: 1.0, g: 5.0, seed: 3 };
const FERMIONS: MsalabInteraction = MsalabInteraction { d: 1, strength: 0.5, statistics: MsalabStatistics::Fermionic };

fn last_error() -> String {
    let p = msalab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(msalab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn one_particle_operator_round_trip() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(msalab_h1_build(&CAUCHY, 0, 4, 0, &mut h), MsalabStatus::Ok);
        let mut n = 0usize;
        assert_eq!(msalab_hamiltonian_dim(h, &mut n), MsalabStatus::Ok);
        assert_eq!(n, 5);
        let mut m = vec![0.0; n * n];
        assert_eq!(msalab_hamiltonian_entries(h, m.as_mut_ptr(), m.len()), MsalabStatus::Ok);
        assert_eq!(m[1], 1.0);
        assert_eq!(m[2], 0.0);
        assert_eq!(m[n], 1.0);
        let mut i = 0usize;
        assert_eq!(msalab_hamiltonian_index_1p(h, 3, &mut i), MsalabStatus::Ok);
        assert_eq!(i, 3);
        assert_eq!(msalab_hamiltonian_index_1p(h, 9, &mut i), MsalabStatus::NotInBasis);
        assert!(last_error().contains('9'));
        msalab_hamiltonian_free(h);
    }
}

#[test]
fn small_buffers_are_refused() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(msalab_h1_build(&CAUCHY, 0, 4, 0, &mut h), MsalabStatus::Ok);
        let mut m = vec![0.0; 3];
        assert_eq!(msalab_hamiltonian_entries(h, m.as_mut_ptr(), m.len()), MsalabStatus::BufferTooSmall);
        msalab_hamiltonian_free(h);
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(msalab_h1_build(ptr::null(), 0, 4, 0, &mut h), MsalabStatus::NullPointer);
        assert!(last_error().contains("disorder"));
        assert_eq!(msalab_hamiltonian_dim(ptr::null(), ptr::null_mut()), MsalabStatus::NullPointer);
        msalab_hamiltonian_free(ptr::null_mut());
        msalab_spectrum_free(ptr::null_mut());
    }
}

#[test]
fn invalid_arguments_map_to_codes() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(msalab_h1_build(&CAUCHY, 4, 0, 0, &mut h), MsalabStatus::InvalidArgument);
        let bad = MsalabDisorder { width: -1.0, ..CAUCHY };
        assert_eq!(msalab_h1_build(&bad, 0, 4, 0, &mut h), MsalabStatus::InvalidArgument);
        assert!(h.is_null());
    }
}

#[test]
fn spectrum_and_green_function() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(msalab_h2_build(&CAUCHY, &FERMIONS, 7, 2, 2, 1, &mut h), MsalabStatus::Ok);
        let mut n = 0usize;
        msalab_hamiltonian_dim(h, &mut n);
        assert_eq!(n, 25);
        let mut s = ptr::null_mut();
        assert_eq!(msalab_spectrum_new(h, &mut s), MsalabStatus::Ok);
        let mut ev = vec![0.0; n];
        assert_eq!(msalab_spectrum_eigenvalues(s, ev.as_mut_ptr(), n), MsalabStatus::Ok);
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));

        // Green's matrix times (H - E) is the identity.
        let mut m = vec![0.0; n * n];
        msalab_hamiltonian_entries(h, m.as_mut_ptr(), m.len());
        let e = 0.123;
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                assert_eq!(msalab_green(s, i, j, e, &mut g[i * n + j]), MsalabStatus::Ok);
            }
        }
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n).map(|k| g[i * n + k] * (m[k * n + j] - if k == j { e } else { 0.0 })).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-9, "({i}, {j}): {v}");
            }
        }

        let mut d = 0.0;
        assert_eq!(msalab_spectral_dist(s, ev[3], &mut d), MsalabStatus::Ok);
        assert!(d.abs() < 1e-12);
        let mut out = 0.0;
        assert_eq!(msalab_green(s, 0, 1, ev[3], &mut out), MsalabStatus::ResonantEnergy);
        assert_eq!(msalab_green(s, 0, n, e, &mut out), MsalabStatus::NotInBasis);

        msalab_spectrum_free(s);
        msalab_hamiltonian_free(h);
    }
}

#[test]
fn schedule_through_the_c_abi() {
    let mut lengths = [0u64; 8];
    let mut masses = [0.0f64; 8];
    let (mut count, mut product) = (0usize, 0.0f64);
    let st = unsafe {
        msalab_schedule(256, 4.0, 1.5, 0.5, 3, lengths.as_mut_ptr(), masses.as_mut_ptr(), 8, &mut count, &mut product)
    };
    assert_eq!(st, MsalabStatus::Ok);
    assert!(count >= 3);
    assert_eq!(&lengths[..3], &[256, 4096, 262_144]);
    assert_eq!(masses[1], 2.0);
    let st = unsafe {
        msalab_schedule(256, 4.0, 1.0, 0.5, 3, lengths.as_mut_ptr(), masses.as_mut_ptr(), 8, &mut count, &mut product)
    };
    assert_eq!(st, MsalabStatus::InvalidArgument);
}

#[test]
fn wegner_estimate_through_the_c_abi() {
    let none = MsalabInteraction { d: 0, strength: 0.0, ..FERMIONS };
    let mut est = MsalabProbEstimate::default();
    let st = unsafe { msalab_wegner_mc(&CAUCHY, &none, 30, 5, 3, 0.0, 0.01, 2000, &mut est) };
    assert_eq!(st, MsalabStatus::Ok);
    assert_eq!(est.n, 2000);
    assert!(est.ci_low <= est.p_hat && est.p_hat <= est.ci_high);
    let b = 6.0;
    let want = 2.0 / (std::f64::consts::PI * b) * 49.0 * 0.01;
    assert!((est.bound_value - want).abs() < 1e-12);
    assert_ne!(est.status, MsalabBoundStatus::Violated);
    let mut again = MsalabProbEstimate::default();
    unsafe { msalab_wegner_mc(&CAUCHY, &none, 30, 5, 3, 0.0, 0.01, 2000, &mut again) };
    assert_eq!(again.p_hat, est.p_hat);
    let st = unsafe { msalab_wegner_mc(&CAUCHY, &none, 30, 5, 3, 0.0, 0.01, 0, &mut est) };
    assert_eq!(st, MsalabStatus::NoSamples);
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"msalab.h\"\n\
         int main(void) {\n\
           MsalabDisorder d = { MSALAB_LAW_CAUCHY, 1.0, 5.0, 1 };\n\
           MsalabHamiltonian *h = 0;\n\
           MsalabStatus s = msalab_h1_build(&d, 0, 4, 0, &h);\n\
           msalab_hamiltonian_free(h);\n\
           return s == MSALAB_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let Ok(out) = Command::new(&cc).arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg("-I").arg(&header).arg(&src).output()
    else {
        eprintln!("no C compiler available, skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
