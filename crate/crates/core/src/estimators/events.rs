//! Resonance, tunneling and pair events.

use serde::{Deserialize, Serialize};

use super::{count_true, per_replicate};
use crate::disorder::sample_potential;
use crate::error::{MsaError, Result};
use crate::geometry::{dist_inf, is_l_distant, projection_disjointness_case, ProjectionCase, Segment, SubSquare};
use crate::msa::{
    boundary_of, center_of, classify_resonant, classify_singular, classify_tunneling, energy_grid,
    MsaParams,
};
use crate::operators::build_h1;
use crate::spectral::{eig_sym, SpectralData};
use crate::stats::{Bound, ProbEstimate};
use crate::system::{System, Volume};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceEstimate {
    pub estimate: ProbEstimate,
    /// `|Λ|² ‖f‖∞ e^{-L^β}` with `|Λ|` the number of sites.
    pub volume_bound: f64,
    /// `L^{-q}`.
    pub power_bound: f64,
}

/// Estimates `P{Λ is E-resonant}`.
pub fn resonance_prob_mc(
    sys: &System,
    sq: &SubSquare,
    e: f64,
    params: &MsaParams,
    n: u64,
) -> Result<ResonanceEstimate> {
    let volume = Volume::Square { square: *sq };
    let (_, l) = center_of(&volume)?;
    let flags = per_replicate(n, |rep| {
        let sd = eig_sym(&sys.draw(&volume, rep)?)?;
        Ok(classify_resonant(&sd, e, l, params.beta).0)
    })?;
    let sites = sq.len() as f64;
    let volume_bound = sites * sites * sys.disorder.distribution.density_sup() * (-(l as f64).powf(params.beta)).exp();
    Ok(ResonanceEstimate {
        estimate: ProbEstimate::from_counts(count_true(&flags), n, Some(Bound::upper(volume_bound)))?,
        volume_bound,
        power_bound: (l as f64).powf(-params.q),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelingEstimate {
    /// Estimate of `P{window is m-non-tunneling}` against `1 - L^{-q}`.
    pub estimate: ProbEstimate,
    pub mean_sum: f64,
}

pub fn tunneling_prob_mc(sys: &System, window: Segment, m: f64, params: &MsaParams, n: u64) -> Result<TunnelingEstimate> {
    let volume = Volume::Segment { window };
    let (_, l) = center_of(&volume)?;
    let per = per_replicate(n, |rep| {
        let sd = eig_sym(&sys.draw(&volume, rep)?)?;
        classify_tunneling(&sd, window, m)
    })?;
    let flags: Vec<bool> = per.iter().map(|(t, _)| !t).collect();
    let mean_sum = per.iter().map(|(_, w)| w.sum).sum::<f64>() / n as f64;
    let bound = Bound::lower(1.0 - (l as f64).powf(-params.q));
    Ok(TunnelingEstimate { estimate: ProbEstimate::from_counts(count_true(&flags), n, Some(bound))?, mean_sum })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    ForallE,
    ExistsE,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairEvent {
    BothSingular,
    BothResonant,
}

/// Energy interval scanned on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
    /// Grid spacing; `None` selects `e^{-L^β} / 10`.
    pub spacing: Option<f64>,
}

impl EnergyWindow {
    pub fn point(e: f64) -> Self {
        Self { lo: e, hi: e, spacing: None }
    }

    pub fn grid(&self, l: u64, beta: f64) -> Result<Vec<f64>> {
        let spacing = self.spacing.unwrap_or_else(|| crate::msa::default_spacing(l, beta));
        energy_grid(self.lo, self.hi, spacing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry {
    pub dist_inf: i64,
    /// Strictly more than `8L` apart, `L` the radius of the first square.
    pub l_distant: bool,
    pub projections: ProjectionCase,
}

impl PairGeometry {
    fn of(a: &SubSquare, b: &SubSquare, l: u64) -> Self {
        Self {
            dist_inf: dist_inf(a, b),
            l_distant: is_l_distant(a, b, l as i64),
            projections: projection_disjointness_case(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub estimate: ProbEstimate,
    pub geometry: PairGeometry,
    pub grid_points: usize,
}

/// Per-square quantities needed to evaluate events at many energies.
struct Prepared {
    volume: Volume,
    h: crate::operators::HamiltonianMatrix,
    sd: SpectralData,
    l: u64,
}

impl Prepared {
    fn new(sys: &System, sq: &SubSquare, v: &crate::disorder::PotentialSample) -> Result<Self> {
        let volume = Volume::Square { square: *sq };
        let (_, l) = center_of(&volume)?;
        let h = sys.hamiltonian(&volume, v)?;
        let sd = eig_sym(&h)?;
        Ok(Self { volume, h, sd, l })
    }

    fn singular(&self, e: f64, m: f64) -> Result<bool> {
        let (center, _) = center_of(&self.volume)?;
        match classify_singular(&self.sd, &center, &boundary_of(&self.volume, &self.h), e, m, self.l) {
            Ok((s, _)) => Ok(s),
            Err(MsaError::ResonantEnergy { .. }) => Ok(true),
            Err(err) => Err(err),
        }
    }

    fn resonant(&self, e: f64, beta: f64) -> bool {
        classify_resonant(&self.sd, e, self.l, beta).0
    }
}

fn pair_window(a: &SubSquare, b: &SubSquare) -> Segment {
    a.potential_hull().hull(&b.potential_hull())
}

/// Frequency of "both squares singular (or resonant)" for all or some energy
/// of the window.
#[allow(clippy::too_many_arguments)]
pub fn pair_event_mc(
    sys: &System,
    a: &SubSquare,
    b: &SubSquare,
    energies: EnergyWindow,
    m: f64,
    params: &MsaParams,
    n: u64,
    quantifier: Quantifier,
    event: PairEvent,
) -> Result<PairEstimate> {
    let (_, l) = center_of(&Volume::Square { square: *a })?;
    let grid = energies.grid(l, params.beta)?;
    let window = pair_window(a, b);
    let flags = per_replicate(n, |rep| {
        let v = sample_potential(&sys.disorder, window, rep);
        let (pa, pb) = (Prepared::new(sys, a, &v)?, Prepared::new(sys, b, &v)?);
        let at = |e: f64| -> Result<bool> {
            Ok(match event {
                PairEvent::BothSingular => pa.singular(e, m)? && pb.singular(e, m)?,
                PairEvent::BothResonant => pa.resonant(e, params.beta) && pb.resonant(e, params.beta),
            })
        };
        let mut hits = 0usize;
        for &e in &grid {
            let hit = at(e)?;
            hits += usize::from(hit);
            match quantifier {
                Quantifier::ExistsE if hit => return Ok(true),
                Quantifier::ForallE if !hit => return Ok(false),
                _ => {}
            }
        }
        Ok(match quantifier {
            Quantifier::ExistsE => hits > 0,
            Quantifier::ForallE => hits == grid.len(),
        })
    })?;
    Ok(PairEstimate {
        estimate: ProbEstimate::from_counts(count_true(&flags), n, None)?,
        geometry: PairGeometry::of(a, b, l),
        grid_points: grid.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectSumEstimate {
    /// Some energy makes both squares singular; compared with `L^{-2p}`.
    pub both_singular: ProbEstimate,
    /// Some energy makes both squares resonant.
    pub both_resonant: ProbEstimate,
    /// Some centred segment of radius `l_segment` inside the union of the
    /// projections is tunneling.
    pub tunneling_segment: ProbEstimate,
    /// Some energy has both singular, not both resonant, and no tunneling
    /// segment.
    pub singular_without_cause: ProbEstimate,
    pub target: f64,
    pub geometry: PairGeometry,
}

/// Centred segments of radius `l` contained in the union of `parts`.
pub fn segments_inside(parts: &[Segment], l: i64) -> Vec<Segment> {
    let lo = parts.iter().map(|s| s.a()).min().unwrap_or(0);
    let hi = parts.iter().map(|s| s.b()).max().unwrap_or(-1);
    let covered = |x: i64| parts.iter().any(|s| s.contains(x));
    (lo + l..=hi - l)
        .filter(|c| (c - l..=c + l).all(covered))
        .filter_map(|c| Segment::centered(c, l).ok())
        .collect()
}

/// Joint frequencies of the events used to bound "both singular" for a pair
/// with at least one off-diagonal square.
#[allow(clippy::too_many_arguments)]
pub fn direct_sum_event_mc(
    sys: &System,
    a: &SubSquare,
    b: &SubSquare,
    energies: EnergyWindow,
    m: f64,
    m_tunnel: f64,
    l_segment: i64,
    l_target: u64,
    params: &MsaParams,
    n: u64,
) -> Result<DirectSumEstimate> {
    if l_segment < 1 {
        return Err(MsaError::InvalidParameter("tunneling segments need radius at least 1".into()));
    }
    let (_, l) = center_of(&Volume::Square { square: *a })?;
    let grid = energies.grid(l, params.beta)?;
    let window = pair_window(a, b);
    let (ia, ja) = a.projections();
    let (ib, jb) = b.projections();
    let segs = segments_inside(&[ia, ja, ib, jb], l_segment);
    let g = sys.disorder.g;
    let per = per_replicate(n, |rep| {
        let v = sample_potential(&sys.disorder, window, rep);
        let (pa, pb) = (Prepared::new(sys, a, &v)?, Prepared::new(sys, b, &v)?);
        let mut t = false;
        for s in &segs {
            if classify_tunneling(&eig_sym(&build_h1(*s, &v, g)?)?, *s, m_tunnel)?.0 {
                t = true;
                break;
            }
        }
        let (mut bs, mut cr, mut uncaused) = (false, false, false);
        for &e in &grid {
            let both_s = pa.singular(e, m)? && pb.singular(e, m)?;
            let both_r = pa.resonant(e, params.beta) && pb.resonant(e, params.beta);
            bs |= both_s;
            cr |= both_r;
            uncaused |= both_s && !both_r && !t;
        }
        Ok([bs, cr, t, uncaused])
    })?;
    let column = |k: usize| count_true(&per.iter().map(|f| f[k]).collect::<Vec<_>>());
    let target = (l_target as f64).powf(-2.0 * params.p);
    Ok(DirectSumEstimate {
        both_singular: ProbEstimate::from_counts(column(0), n, Some(Bound::upper(target)))?,
        both_resonant: ProbEstimate::from_counts(column(1), n, None)?,
        tunneling_segment: ProbEstimate::from_counts(column(2), n, None)?,
        singular_without_cause: ProbEstimate::from_counts(column(3), n, None)?,
        target,
        geometry: PairGeometry::of(a, b, l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{DisorderSpec, InteractionSpec};
    use crate::geometry::Site2;
    use crate::operators::Statistics;
    use crate::stats::Status;

    fn system(g: f64, seed: u64) -> System {
        System::new(DisorderSpec::cauchy(1.0, g, seed), InteractionSpec::constant(1, 1.0), Statistics::Fermionic)
    }

    fn sq(c1: i64, c2: i64, r: i64) -> SubSquare {
        SubSquare::centered(Site2::new(c1, c2), r).unwrap()
    }

    #[test]
    fn resonance_bound_constants() {
        let sys = system(5.0, 1);
        let s = sq(40, 10, 5);
        let est = resonance_prob_mc(&sys, &s, 0.0, &MsaParams::default(), 20).unwrap();
        let expect = 121.0f64.powi(2) / std::f64::consts::PI * (-(5f64).sqrt()).exp();
        assert!((est.volume_bound - expect).abs() < 1e-9 * expect);
        assert!((est.power_bound - 5f64.powi(-24)).abs() < 1e-30);
    }

    #[test]
    fn deterministic_resonance_is_all_or_nothing() {
        let sys = system(0.0, 1);
        let s = sq(40, 10, 1);
        let est = resonance_prob_mc(&sys, &s, 0.0, &MsaParams::default(), 30).unwrap();
        assert!(est.estimate.successes == 0 || est.estimate.successes == 30);
        let sd = eig_sym(&sys.draw(&Volume::from(s), 0).unwrap()).unwrap();
        let direct = classify_resonant(&sd, 0.0, 1, 0.5).0;
        assert_eq!(est.estimate.successes == 30, direct);
    }

    #[test]
    fn tunneling_examples() {
        let w = Segment::centered(0, 5).unwrap();
        let free = System::free_of_interaction(DisorderSpec::cauchy(1.0, 0.0, 1));
        let est = tunneling_prob_mc(&free, w, 1.0, &MsaParams::default(), 10).unwrap();
        assert_eq!(est.estimate.successes, 0);
        assert_eq!(est.estimate.status, Status::BoundViolated);
        assert!(matches!(tunneling_prob_mc(&free, w, 1.0, &MsaParams::default(), 0), Err(MsaError::NoSamples)));
        let strong = System::free_of_interaction(DisorderSpec::cauchy(1.0, 20.0, 1));
        let w = Segment::centered(0, 10).unwrap();
        let est = tunneling_prob_mc(&strong, w, 2.0, &MsaParams::default(), 200).unwrap();
        assert!(est.estimate.p_hat > 0.8, "{est:?}");
    }

    #[test]
    fn degenerate_pair_equals_single_square() {
        let sys = system(2.0, 4);
        let s = sq(20, 5, 2);
        let params = MsaParams::default();
        let pair = pair_event_mc(&sys, &s, &s, EnergyWindow::point(0.1), 0.5, &params, 200, Quantifier::ExistsE, PairEvent::BothSingular).unwrap();
        let vol = Volume::from(s);
        let mut k = 0;
        for rep in 0..200 {
            let v = sys.sample(&vol, rep);
            k += usize::from(Prepared::new(&sys, &s, &v).unwrap().singular(0.1, 0.5).unwrap());
        }
        assert_eq!(pair.estimate.successes, k as u64);
    }

    #[test]
    fn huge_disorder_is_never_jointly_singular() {
        let sys = system(1e9, 5);
        let (a, b) = (sq(20, 5, 1), sq(60, 40, 1));
        let params = MsaParams::default();
        let win = EnergyWindow { lo: -0.5, hi: 0.5, spacing: Some(0.05) };
        let est = pair_event_mc(&sys, &a, &b, win, 1.0, &params, 50, Quantifier::ExistsE, PairEvent::BothSingular).unwrap();
        assert_eq!(est.estimate.successes, 0);
        assert!(est.geometry.l_distant);
    }

    #[test]
    fn quantifiers_are_ordered() {
        let sys = system(1.0, 6);
        let (a, b) = (sq(20, 5, 1), sq(60, 40, 1));
        let params = MsaParams::default();
        let win = EnergyWindow { lo: -1.0, hi: 1.0, spacing: Some(0.1) };
        let all = pair_event_mc(&sys, &a, &b, win, 1.0, &params, 100, Quantifier::ForallE, PairEvent::BothSingular).unwrap();
        let any = pair_event_mc(&sys, &a, &b, win, 1.0, &params, 100, Quantifier::ExistsE, PairEvent::BothSingular).unwrap();
        assert!(all.estimate.successes <= any.estimate.successes);
        assert_eq!(all.grid_points, 21);
    }

    #[test]
    fn independent_pair_factorizes() {
        let sys = system(1.0, 7);
        let (a, b) = (sq(30, 10, 1), sq(70, 50, 1));
        assert_eq!(projection_disjointness_case(&a, &b), ProjectionCase::AllDisjoint);
        let params = MsaParams { beta: 0.05, ..MsaParams::default() };
        let n = 4000;
        let pair = pair_event_mc(&sys, &a, &b, EnergyWindow::point(0.0), 1.0, &params, n, Quantifier::ExistsE, PairEvent::BothResonant).unwrap();
        let pa = resonance_prob_mc(&sys, &a, 0.0, &params, n).unwrap().estimate.p_hat;
        let pb = resonance_prob_mc(&sys, &b, 0.0, &params, n).unwrap().estimate.p_hat;
        let prod = pa * pb;
        let sd = (prod * (1.0 - prod) / n as f64).sqrt();
        assert!((pair.estimate.p_hat - prod).abs() < 4.0 * sd + 0.01, "{} vs {prod}", pair.estimate.p_hat);
    }

    #[test]
    fn direct_sum_examples() {
        let params = MsaParams::default();
        let (a, b) = (sq(20, 5, 2), sq(60, 40, 2));
        let win = EnergyWindow { lo: -0.2, hi: 0.2, spacing: Some(0.05) };
        let huge = system(1e9, 8);
        let est = direct_sum_event_mc(&huge, &a, &b, win, 1.0, 1.0, 2, 16, &params, 30).unwrap();
        assert_eq!(est.both_resonant.successes, 0);
        assert!((est.target - 16f64.powi(-12)).abs() < 1e-27);
        assert_eq!(est.both_singular.status, Status::BoundUnresolvable);
        let free = system(0.0, 8);
        let est = direct_sum_event_mc(&free, &a, &b, win, 1.0, 1.0, 2, 16, &params, 5).unwrap();
        assert_eq!(est.tunneling_segment.successes, 5);
    }

    #[test]
    fn segments_inside_union() {
        let parts = [Segment::new(0, 3).unwrap(), Segment::new(4, 6).unwrap(), Segment::new(10, 14).unwrap()];
        let c: Vec<i64> = segments_inside(&parts, 2).iter().map(|s| s.center_radius().unwrap().0).collect();
        assert_eq!(c, vec![2, 3, 4, 12]);
    }
}
