//! Probability that the spectrum comes within `r` of a fixed energy.

use serde::{Deserialize, Serialize};

use super::{count_true, per_replicate};
use crate::disorder::{conditional_resample, decay_rate, sample_potential, PotentialSample};
use crate::error::{MsaError, Result};
use crate::geometry::{Segment, SubSquare};
use crate::rng::absorb;
use crate::spectral::{eig_sym, eigen_count_in, spectral_dist};
use crate::stats::{Bound, ProbEstimate};
use crate::system::{System, Volume};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WegnerEstimate {
    pub r: f64,
    pub estimate: ProbEstimate,
    /// Decay rate `B = 2(a|g| - b - 1)`.
    pub b: f64,
    /// Mean number of eigenvalues in `(E - r, E + r)`.
    pub mean_trace: f64,
    /// Per-sample indicator never exceeded the eigenvalue count.
    pub trace_dominates: bool,
}

/// `(2L1 + 1)(2L2 + 1)` for two-particle volumes.
fn rectangle_size(volume: &Volume) -> Option<f64> {
    match volume {
        Volume::Square { square } => Some((square.hseg().len() * square.vseg().len()) as f64),
        Volume::Product { a, b } => Some((a.len() * b.len()) as f64),
        Volume::Segment { .. } => None,
    }
}

fn wegner_bound(constant: f64, b: f64, volume: &Volume, r: f64) -> Option<f64> {
    let size = rectangle_size(volume)?;
    (b > 0.0).then(|| constant / (std::f64::consts::PI * b) * size * r)
}

/// Estimates `P{dist(E, σ(H)) < r}` for several radii from one set of
/// decompositions. The bound `(2/(πB)) (2L1+1)(2L2+1) r` is attached for
/// two-particle volumes when `B > 0`.
pub fn wegner_mc_multi(sys: &System, volume: &Volume, e: f64, rs: &[f64], n: u64) -> Result<Vec<WegnerEstimate>> {
    if let Some(r) = rs.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(MsaError::InvalidParameter(format!("radius r = {r}")));
    }
    let b = decay_rate(&sys.disorder)?;
    if b <= 0.0 {
        log::warn!("B = {b} is not positive; the bound is omitted");
    }
    let per = per_replicate(n, |rep| {
        let sd = eig_sym(&sys.draw(volume, rep)?)?;
        let dist = spectral_dist(&sd, e);
        Ok(rs.iter().map(|&r| (dist < r, eigen_count_in(&sd, e, r))).collect::<Vec<_>>())
    })?;
    rs.iter()
        .enumerate()
        .map(|(k, &r)| {
            let flags: Vec<bool> = per.iter().map(|v| v[k].0).collect();
            let total: usize = per.iter().map(|v| v[k].1).sum();
            let dominates = per.iter().all(|v| usize::from(v[k].0) <= v[k].1);
            let bound = wegner_bound(2.0, b, volume, r).map(Bound::upper);
            Ok(WegnerEstimate {
                r,
                estimate: ProbEstimate::from_counts(count_true(&flags), n, bound)?,
                b,
                mean_trace: total as f64 / n as f64,
                trace_dominates: dominates,
            })
        })
        .collect()
}

pub fn wegner_mc(sys: &System, volume: &Volume, e: f64, r: f64, n: u64) -> Result<WegnerEstimate> {
    Ok(wegner_mc_multi(sys, volume, e, &[r], n)?.remove(0))
}

/// Energy used in a conditional estimate: fixed, or a function of the
/// conditioned values only.
pub enum ConditionalEnergy<'a> {
    Fixed(f64),
    /// Receives the outer sample with every non-conditioned site set to NaN.
    Measurable(&'a (dyn Fn(&PotentialSample) -> Result<f64> + Sync)),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalWegnerEstimate {
    /// Inner estimate of the outer draw with the largest frequency; a lower
    /// estimate of the supremum over conditioning values.
    pub worst: ProbEstimate,
    pub worst_outer: u64,
    /// Inner frequencies of every outer draw.
    pub per_outer: Vec<f64>,
    pub energies: Vec<f64>,
    pub n_outer: u64,
    pub n_inner: u64,
    pub b: f64,
}

/// Keeps only the values of `sample` on `frozen`.
fn mask(sample: &PotentialSample, frozen: &[Segment]) -> PotentialSample {
    let w = sample.window();
    let values = w
        .iter()
        .zip(sample.values())
        .map(|(x, &v)| if frozen.iter().any(|f| f.contains(x)) { v } else { f64::NAN })
        .collect();
    PotentialSample::from_values(w, values).expect("same window")
}

/// Estimates `sup P{dist(E, σ(H_Λ)) < r | V on frozen}` by a maximum over
/// `n_outer` draws of the frozen values, each with `n_inner` redraws of the
/// rest. Requires some projection of `sq` to be disjoint from the other
/// projection and from every frozen segment. The attached bound is
/// `(4/(πB)) (2L1+1)(2L2+1) r`.
pub fn wegner_conditional_mc(
    sys: &System,
    sq: &SubSquare,
    frozen: &[Segment],
    energy: ConditionalEnergy<'_>,
    r: f64,
    n_outer: u64,
    n_inner: u64,
) -> Result<ConditionalWegnerEstimate> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(MsaError::InvalidParameter(format!("radius r = {r}")));
    }
    if n_outer == 0 || n_inner == 0 {
        return Err(MsaError::NoSamples);
    }
    let (i1, j1) = sq.projections();
    let free = |p: &Segment, other: &Segment| !p.intersects(other) && frozen.iter().all(|f| !p.intersects(f));
    if !(free(&i1, &j1) || free(&j1, &i1)) {
        return Err(MsaError::ProjectionsOverlap(format!(
            "no projection of {sq} is disjoint from the rest of the conditioning"
        )));
    }
    let b = decay_rate(&sys.disorder)?;
    let volume = Volume::Square { square: *sq };
    let window = frozen.iter().fold(sq.potential_hull(), |acc, f| acc.hull(f));
    let mut per_outer = Vec::with_capacity(n_outer as usize);
    let mut energies = Vec::with_capacity(n_outer as usize);
    let mut counts = Vec::with_capacity(n_outer as usize);
    for o in 0..n_outer {
        let outer = sample_potential(&sys.disorder, window, o);
        let e = match &energy {
            ConditionalEnergy::Fixed(e) => *e,
            ConditionalEnergy::Measurable(f) => f(&mask(&outer, frozen))?,
        };
        if !e.is_finite() {
            return Err(MsaError::InvalidParameter(format!("conditional energy {e}")));
        }
        let flags = per_replicate(n_inner, |i| {
            let v = conditional_resample(&sys.disorder, &outer, frozen, absorb(o, i))?;
            let sd = eig_sym(&sys.hamiltonian(&volume, &v)?)?;
            Ok(spectral_dist(&sd, e) < r)
        })?;
        let k = count_true(&flags);
        counts.push(k);
        per_outer.push(k as f64 / n_inner as f64);
        energies.push(e);
    }
    let worst_outer = (0..counts.len()).fold(0, |best, i| if counts[i] > counts[best] { i } else { best });
    let bound = wegner_bound(4.0, b, &volume, r).map(Bound::upper);
    Ok(ConditionalWegnerEstimate {
        worst: ProbEstimate::from_counts(counts[worst_outer], n_inner, bound)?,
        worst_outer: worst_outer as u64,
        per_outer,
        energies,
        n_outer,
        n_inner,
        b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{DisorderSpec, InteractionSpec};
    use crate::geometry::Site2;
    use crate::operators::{build_h1, Statistics};
    use crate::spectral::SpectralData;

    fn system(g: f64, seed: u64) -> System {
        System::new(DisorderSpec::cauchy(1.0, g, seed), InteractionSpec::constant(1, 1.0), Statistics::Fermionic)
    }

    fn off_diag(r: i64) -> SubSquare {
        SubSquare::centered(Site2::new(30, 5), r).unwrap()
    }

    #[test]
    fn printed_bound_values() {
        let sys = system(5.0, 1);
        let vol = Volume::from(off_diag(2));
        let est = wegner_mc(&sys, &vol, 0.0, 0.01, 10).unwrap();
        assert_eq!(est.b, 6.0);
        assert!((est.estimate.bound_value().unwrap() - 0.026_525_8).abs() < 1e-6);
        let c = wegner_conditional_mc(&sys, &off_diag(2), &[], ConditionalEnergy::Fixed(0.0), 0.01, 2, 5).unwrap();
        assert!((c.worst.bound_value().unwrap() - 0.053_051_6).abs() < 1e-6);
    }

    #[test]
    fn zero_radius_never_hits() {
        let sys = system(5.0, 2);
        let est = wegner_mc(&sys, &Volume::from(off_diag(1)), 0.0, 0.0, 50).unwrap();
        assert_eq!(est.estimate.successes, 0);
    }

    #[test]
    fn frequency_grows_with_radius() {
        let sys = system(2.0, 3);
        let rs = [0.01, 0.05, 0.1, 0.5, 1.0];
        let est = wegner_mc_multi(&sys, &Volume::from(off_diag(1)), 0.0, &rs, 300).unwrap();
        assert!(est.windows(2).all(|w| w[0].estimate.p_hat <= w[1].estimate.p_hat));
        assert!(est.iter().all(|e| e.trace_dominates && e.estimate.p_hat <= e.mean_trace));
    }

    #[test]
    fn bound_omitted_when_b_not_positive() {
        let sys = system(1.0, 4);
        let est = wegner_mc(&sys, &Volume::from(off_diag(1)), 0.0, 0.1, 10).unwrap();
        assert!(est.b <= 0.0 && est.estimate.bound.is_none());
    }

    #[test]
    fn overlapping_projections_are_rejected() {
        let sys = system(5.0, 5);
        let diag = SubSquare::centered(Site2::new(5, 5), 2).unwrap();
        let err = wegner_conditional_mc(&sys, &diag, &[], ConditionalEnergy::Fixed(0.0), 0.1, 1, 1);
        assert!(matches!(err, Err(MsaError::ProjectionsOverlap(_))));
        let sq = off_diag(2);
        let both = [sq.hseg(), sq.vseg()];
        let err = wegner_conditional_mc(&sys, &sq, &both, ConditionalEnergy::Fixed(0.0), 0.1, 1, 1);
        assert!(matches!(err, Err(MsaError::ProjectionsOverlap(_))));
    }

    #[test]
    fn conditioning_on_one_projection_freezes_it() {
        let sys = system(5.0, 6);
        let sq = off_diag(2);
        let frozen = [sq.vseg()];
        let seen = std::sync::Mutex::new(Vec::new());
        let f = |s: &PotentialSample| -> Result<f64> {
            let nan = s.window().iter().filter(|x| s.get(*x).unwrap().is_nan()).count();
            seen.lock().unwrap().push(nan);
            // Lowest eigenvalue of the frozen segment.
            let h = build_h1(sq.vseg(), s, 5.0)?;
            let sd: SpectralData = eig_sym(&h)?;
            Ok(sd.eigenvalues()[0])
        };
        let c = wegner_conditional_mc(&sys, &sq, &frozen, ConditionalEnergy::Measurable(&f), 0.5, 3, 40).unwrap();
        assert_eq!(c.energies.len(), 3);
        let expected_nan = sq.potential_hull().len() - sq.vseg().len();
        assert!(seen.lock().unwrap().iter().all(|n| *n == expected_nan));
    }

    #[test]
    fn constant_function_matches_fixed_energy() {
        let sys = system(5.0, 7);
        let sq = off_diag(1);
        let frozen = [sq.vseg()];
        let f = |_: &PotentialSample| -> Result<f64> { Ok(0.3) };
        let a = wegner_conditional_mc(&sys, &sq, &frozen, ConditionalEnergy::Measurable(&f), 0.2, 4, 200).unwrap();
        let b = wegner_conditional_mc(&sys, &sq, &frozen, ConditionalEnergy::Fixed(0.3), 0.2, 4, 200).unwrap();
        assert_eq!(a.per_outer, b.per_outer);
    }
}
