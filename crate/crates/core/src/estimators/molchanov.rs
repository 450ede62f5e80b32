//! Path-integral estimates of `<δ_u, e^{itH} δ_u>`.
//!
//! A continuous-time walk jumps to each lattice neighbour at rate 1 (total
//! rate `z`, the coordination number). Each jump along a bond of amplitude
//! `h` multiplies the weight by `i h`; a jump to a site outside the basis
//! kills the path. For `t >= 0`,
//!
//! ```text
//! <δ_u, e^{itH} δ_u> = e^{z t} E_u[ 1(X_t = u) ∏ (i h) exp(i ∫_0^t W(X_s) ds) ]
//! ```
//!
//! with `W` the diagonal of `H`; negative times use complex conjugation.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::per_replicate;
use crate::disorder::{char_bound_params, decay_rate};
use crate::error::{MsaError, Result};
use crate::operators::{HamiltonianMatrix, Site};
use crate::rng::{absorb, stream_rng};
use crate::stats::ComplexEstimate;
use crate::system::{System, Volume};

const DOMAIN_PATHS: u64 = 0x6d6f_6c63_6861_6e6f;

/// Neighbour structure of a basis: for each site and direction, the target
/// index and bond amplitude.
#[derive(Debug, Clone)]
pub struct PathTable {
    sites: Vec<Site>,
    hops: Vec<Vec<Option<(usize, f64)>>>,
    z: usize,
}

impl PathTable {
    pub fn new(h: &HamiltonianMatrix) -> Self {
        Self { sites: h.basis().sites().to_vec(), hops: h.hopping_table(), z: h.coordination() }
    }

    pub fn coordination(&self) -> usize {
        self.z
    }
}

/// One trajectory of the walk on `[0, |t|]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub jump_times: Vec<f64>,
    /// Visited sites, starting at `u`; one more entry than `jump_times`
    /// unless the path was killed.
    pub sites: Vec<Site>,
    pub jumps: usize,
    pub alive: bool,
    /// Integrand without the `e^{z|t|}` prefactor, zero if killed or not
    /// back at the start.
    pub integrand: Complex64,
}

/// Simulates one path started at basis index `iu`; `w` returns the diagonal
/// value of a basis index.
pub fn sample_path(
    table: &PathTable,
    mut w: impl FnMut(usize) -> f64,
    iu: usize,
    t: f64,
    rng: &mut ChaCha8Rng,
) -> PathSample {
    let horizon = t.abs();
    let z = table.z;
    let hold = Exp::new(z as f64).expect("positive rate");
    let mut cur = iu;
    let mut clock = 0.0;
    let mut phase = 0.0;
    let mut weight = Complex64::new(1.0, 0.0);
    let mut jump_times = Vec::new();
    let mut sites = vec![table.sites[iu]];
    loop {
        let tau: f64 = hold.sample(rng);
        if clock + tau >= horizon {
            phase += w(cur) * (horizon - clock);
            break;
        }
        phase += w(cur) * tau;
        clock += tau;
        jump_times.push(clock);
        let dir = rng.random_range(0..z);
        match table.hops[cur][dir] {
            Some((next, amp)) => {
                weight *= Complex64::new(0.0, amp);
                cur = next;
                sites.push(table.sites[cur]);
            }
            None => {
                let jumps = jump_times.len();
                return PathSample { jump_times, sites, jumps, alive: false, integrand: Complex64::new(0.0, 0.0) };
            }
        }
    }
    let mut integrand = if cur == iu { weight * Complex64::new(0.0, phase).exp() } else { Complex64::new(0.0, 0.0) };
    if t < 0.0 {
        integrand = integrand.conj();
    }
    let jumps = jump_times.len();
    PathSample { jump_times, sites, jumps, alive: true, integrand }
}

fn estimate_from(values: Vec<Complex64>, z: usize, t: f64) -> Result<ComplexEstimate> {
    let pref = (z as f64 * t.abs()).exp();
    let scaled: Vec<Complex64> = values.into_iter().map(|v| v * pref).collect();
    ComplexEstimate::from_samples(&scaled)
}

/// Estimate for a fixed operator; `seed` keys the path streams.
pub fn molchanov_fixed(h: &HamiltonianMatrix, u: &Site, t: f64, n_paths: u64, seed: u64) -> Result<ComplexEstimate> {
    let iu = h.basis().require(u)?;
    if !t.is_finite() {
        return Err(MsaError::InvalidParameter(format!("time t = {t}")));
    }
    let table = PathTable::new(h);
    let diag = h.diagonal();
    let key = absorb(seed, DOMAIN_PATHS);
    let values = per_replicate(n_paths, |i| {
        let mut rng = stream_rng(key, i);
        Ok(sample_path(&table, |k| diag[k], iu, t, &mut rng).integrand)
    })?;
    estimate_from(values, table.z, t)
}

/// Disorder-averaged estimate: path `i` runs in disorder replicate `i`, and
/// the potential is only evaluated on the sites the path visits.
pub fn molchanov_averaged(sys: &System, volume: &Volume, u: &Site, t: f64, n_paths: u64) -> Result<ComplexEstimate> {
    if !t.is_finite() {
        return Err(MsaError::InvalidParameter(format!("time t = {t}")));
    }
    // The hopping structure does not depend on the potential.
    let h0 = sys.draw(volume, 0)?;
    let iu = h0.basis().require(u)?;
    let table = PathTable::new(&h0);
    let key = absorb(sys.disorder.master_seed, DOMAIN_PATHS);
    let g = sys.disorder.g;
    let values = per_replicate(n_paths, |i| {
        let mut rng = stream_rng(key, i);
        let mut cache: HashMap<i64, f64> = HashMap::new();
        let mut v = |x: i64| *cache.entry(x).or_insert_with(|| sys.disorder.site_value(i, x));
        let w = |k: usize| match (&table.sites[k], volume) {
            (Site::Line(x), _) => g * v(*x),
            (Site::Plane(p), Volume::Square { .. }) => sys.interaction.value(*p) + g * v(p.x1) + g * v(p.x2),
            (Site::Plane(p), _) => g * v(p.x1) + g * v(p.x2),
        };
        Ok(sample_path(&table, w, iu, t, &mut rng).integrand)
    })?;
    estimate_from(values, table.z, t)
}

/// The two decay envelopes `e^{-B|t|}`, `B = 2(a|g| - b - 1)`, and
/// `e^{-2|t|(a|g| - b + 1)}` for the averaged characteristic function.
pub fn decay_envelopes(sys: &System, t: f64) -> Result<(f64, f64)> {
    let (a, b) = char_bound_params(&sys.disorder)?;
    let rate = decay_rate(&sys.disorder)?;
    let g = sys.disorder.g.abs();
    Ok(((-rate * t.abs()).exp(), (-2.0 * t.abs() * (a * g - b + 1.0)).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{DisorderSpec, InteractionSpec};
    use crate::geometry::{Segment, Site2, SubSquare};
    use crate::operators::Statistics;
    use crate::spectral::{diag_propagator, eig_sym};

    #[test]
    fn zero_time_is_exactly_one() {
        let sys = System::free_of_interaction(DisorderSpec::cauchy(1.0, 2.0, 1));
        let vol = Volume::from(Segment::new(0, 4).unwrap());
        let h = sys.draw(&vol, 0).unwrap();
        let est = molchanov_fixed(&h, &Site::Line(2), 0.0, 100, 9).unwrap();
        assert_eq!(est.mean(), Complex64::new(1.0, 0.0));
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn paths_are_nearest_neighbour_walks() {
        let sys = System::new(DisorderSpec::cauchy(1.0, 1.0, 2), InteractionSpec::constant(1, 1.0), Statistics::Fermionic);
        let sq = SubSquare::centered(Site2::new(6, 3), 2).unwrap();
        let h = sys.draw(&Volume::from(sq), 0).unwrap();
        let table = PathTable::new(&h);
        let diag = h.diagonal();
        let iu = h.basis().require(&Site::plane(6, 3)).unwrap();
        for i in 0..200 {
            let mut rng = stream_rng(3, i);
            let p = sample_path(&table, |k| diag[k], iu, 1.5, &mut rng);
            assert_eq!(p.jumps, p.jump_times.len());
            assert!(p.jump_times.windows(2).all(|w| w[0] < w[1]));
            assert!(p.jump_times.iter().all(|s| *s < 1.5));
            assert!(p.sites.windows(2).all(|w| w[0].euclid_dist(&w[1]) == 1.0));
            if p.alive {
                assert_eq!(p.sites.len(), p.jumps + 1);
            } else {
                assert_eq!(p.integrand, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn matches_eigen_expansion_on_a_segment() {
        let sys = System::free_of_interaction(DisorderSpec::cauchy(1.0, 1.0, 4));
        let vol = Volume::from(Segment::new(0, 5).unwrap());
        let h = sys.draw(&vol, 0).unwrap();
        let sd = eig_sym(&h).unwrap();
        for t in [0.3, -0.3] {
            let exact = diag_propagator(&sd, 2, t);
            let est = molchanov_fixed(&h, &Site::Line(2), t, 40_000, 5).unwrap();
            assert!((est.mean() - exact).norm() <= 4.0 * est.stderr, "t {t}: {:?} vs {exact}", est.mean());
        }
    }

    #[test]
    fn matches_eigen_expansion_for_bosons() {
        let sys = System::new(DisorderSpec::cauchy(1.0, 1.0, 5), InteractionSpec::constant(1, 0.5), Statistics::Bosonic);
        let sq = SubSquare::centered(Site2::new(3, 3), 1).unwrap();
        let h = sys.draw(&Volume::from(sq), 0).unwrap();
        let sd = eig_sym(&h).unwrap();
        let u = Site::plane(3, 3);
        let iu = h.basis().require(&u).unwrap();
        let exact = diag_propagator(&sd, iu, 0.4);
        let est = molchanov_fixed(&h, &u, 0.4, 40_000, 6).unwrap();
        assert!((est.mean() - exact).norm() <= 4.0 * est.stderr);
    }

    #[test]
    fn averaged_mode_uses_site_keyed_potential() {
        let sys = System::free_of_interaction(DisorderSpec::cauchy(1.0, 1.0, 7));
        let vol = Volume::from(Segment::new(0, 4).unwrap());
        let a = molchanov_averaged(&sys, &vol, &Site::Line(2), 0.2, 2000).unwrap();
        let b = molchanov_averaged(&sys, &vol, &Site::Line(2), 0.2, 2000).unwrap();
        assert_eq!(a, b);
        assert!(a.abs() <= 1.0 + 3.0 * a.stderr);
    }

    #[test]
    fn envelopes() {
        let sys = System::free_of_interaction(DisorderSpec::cauchy(1.0, 5.0, 1));
        let (e1, e2) = decay_envelopes(&sys, 0.5).unwrap();
        assert!((e1 - (-3f64).exp()).abs() < 1e-15);
        assert!((e2 - (-5f64).exp()).abs() < 1e-15);
    }
}
