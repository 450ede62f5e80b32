//! Multiscale-analysis classifiers, length/mass schedules and deterministic
//! implication checks.

use serde::{Deserialize, Serialize};

use crate::disorder::PotentialSample;
use crate::error::{MsaError, Result};
use crate::geometry::{
    boundary_sites, classify_diagonal, dist_inf, DiagonalKind, DiagonalStrip, Segment, Site2,
    SubSquare,
};
use crate::operators::{HamiltonianMatrix, Site, Statistics};
use crate::spectral::{eig_sym, green_at, green_row, spectral_dist, SpectralData};
use crate::system::{System, Volume};

/// Operator norm bound of the two-particle hopping part.
pub const FREE_NORM: f64 = 4.0;

/// Exponents of the induction: probability decay `p`, `q`, scale growth
/// `alpha` and resonance exponent `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MsaParams {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for MsaParams {
    fn default() -> Self {
        Self { p: 6.0, q: 24.0, alpha: 1.5, beta: 0.5 }
    }
}

impl MsaParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q), ("alpha", self.alpha), ("beta", self.beta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MsaError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.alpha <= 1.0 {
            return Err(MsaError::InvalidParameter(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub l0: u64,
    pub m0: f64,
    /// `L_0, L_1, ...`; shorter than `masses` when a length overflowed.
    pub lengths: Vec<u64>,
    /// `m_0, ..., m_{k_max}`.
    pub masses: Vec<f64>,
    /// `∏_{j=1..k_max} (1 - 8 L_0^{-j/2})`.
    pub product: f64,
    /// `m_{k_max}`, the finite-k stand-in for `liminf m_k`.
    pub m_inf_estimate: f64,
    pub truncated: bool,
    pub warnings: Vec<String>,
}

/// Small-denominator rational form `num / den` of `x`, if any.
fn as_rational(x: f64) -> Option<(u32, u32)> {
    (1..=16u32).find_map(|den| {
        let num = x * f64::from(den);
        let r = num.round();
        ((num - r).abs() < 1e-12 && (1.0..64.0).contains(&r)).then_some((r as u32, den))
    })
}

/// Smallest integer `n >= l^alpha`, or `None` beyond `u64`.
pub fn next_length(l: u64, alpha: f64) -> Option<u64> {
    let approx = (l as f64).powf(alpha).ceil();
    if !approx.is_finite() || approx >= u64::MAX as f64 {
        return None;
    }
    let mut n = approx as u64;
    if let Some((num, den)) = as_rational(alpha) {
        // n^den >= l^num decided in exact integer arithmetic when it fits.
        if let Some(target) = (l as u128).checked_pow(num) {
            let ge = |n: u64| (n as u128).checked_pow(den).is_none_or(|v| v >= target);
            while !ge(n) {
                n += 1;
            }
            while n > 1 && ge(n - 1) {
                n -= 1;
            }
        }
    }
    Some(n)
}

pub fn schedule(l0: u64, m0: f64, params: &MsaParams, k_max: usize) -> Result<ScaleSchedule> {
    params.validate()?;
    if l0 < 2 {
        return Err(MsaError::InvalidParameter(format!("L0 must be at least 2, got {l0}")));
    }
    if !(m0.is_finite() && m0 > 0.0) {
        return Err(MsaError::InvalidParameter(format!("m0 must be positive, got {m0}")));
    }
    let mut warnings = Vec::new();
    if l0 < 256 {
        warnings.push(format!("L0 = {l0} is below the admissible 256"));
    }
    if m0 <= 2.0 {
        warnings.push(format!("m0 = {m0} does not exceed 2"));
    }
    let mut lengths = vec![l0];
    let mut truncated = false;
    for _ in 0..k_max {
        match next_length(*lengths.last().expect("non-empty"), params.alpha) {
            Some(n) => lengths.push(n),
            None => {
                truncated = true;
                break;
            }
        }
    }
    let mut masses = vec![m0];
    let mut product = 1.0;
    let lf = l0 as f64;
    for j in 1..=k_max {
        let factor = 1.0 - 8.0 * lf.powf(-(j as f64) / 2.0);
        product *= factor;
        masses.push(m0 * product);
    }
    if masses.iter().any(|m| *m <= 0.0) {
        warnings.push(format!("L0 = {l0} gives non-positive masses"));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let m_inf_estimate = *masses.last().expect("non-empty");
    Ok(ScaleSchedule { l0, m0, lengths, masses, product, m_inf_estimate, truncated, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegradeVariant {
    /// Single particle: `m - L^{-(1-β)}`.
    Lemma31,
    /// Off-diagonal squares: `m - 3 L^{-(1-β)}`.
    Lemma43,
    /// Exact loss from a union over boundary sites: `m - (2 ln(2L+1) + L^β) / L`.
    Eq53,
}

pub fn mass_degrade(m: f64, l: u64, beta: f64, variant: DegradeVariant) -> f64 {
    let lf = l as f64;
    match variant {
        DegradeVariant::Lemma31 => m - lf.powf(-(1.0 - beta)),
        DegradeVariant::Lemma43 => m - 3.0 * lf.powf(-(1.0 - beta)),
        DegradeVariant::Eq53 => m - (2.0 * (2.0 * lf + 1.0).ln() + lf.powf(beta)) / lf,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceWitness {
    pub dist: f64,
    pub threshold: f64,
}

/// Resonant iff `dist(E, σ(H)) < e^{-L^β}`.
pub fn classify_resonant(sd: &SpectralData, e: f64, l: u64, beta: f64) -> (bool, ResonanceWitness) {
    let dist = spectral_dist(sd, e);
    let threshold = (-(l as f64).powf(beta)).exp();
    (dist < threshold, ResonanceWitness { dist, threshold })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularWitness {
    pub max_green: f64,
    pub argmax: Site,
    pub threshold: f64,
}

/// Singular iff `max_{u ∈ boundary} |G(center, u; E)| > e^{-mL}`.
pub fn classify_singular(
    sd: &SpectralData,
    center: &Site,
    boundary: &[Site],
    e: f64,
    m: f64,
    l: u64,
) -> Result<(bool, SingularWitness)> {
    if boundary.is_empty() {
        return Err(MsaError::EmptyWindow("no boundary sites".into()));
    }
    let row = green_row(sd, center, e)?;
    let mut best = (f64::NEG_INFINITY, boundary[0]);
    for u in boundary {
        let g = row[sd.basis().require(u)?].abs();
        if g > best.0 {
            best = (g, *u);
        }
    }
    let threshold = (-m * l as f64).exp();
    Ok((best.0 > threshold, SingularWitness { max_green: best.0, argmax: best.1, threshold }))
}

/// Recomputes `|G(center, argmax; E)|` pointwise.
pub fn singular_witness_value(sd: &SpectralData, center: &Site, w: &SingularWitness, e: f64) -> Result<f64> {
    let ic = sd.basis().require(center)?;
    let iu = sd.basis().require(&w.argmax)?;
    Ok(green_at(sd, ic, iu, e).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunnelingWitness {
    pub sum: f64,
    pub threshold: f64,
}

/// Tunneling iff `Σ_j Σ_{y = x ± L} |ψ_j(x) ψ_j(y)| > e^{-mL}` for the
/// segment `window = [x - L, x + L]`.
pub fn classify_tunneling(sd: &SpectralData, window: Segment, m: f64) -> Result<(bool, TunnelingWitness)> {
    let (x, l) = window
        .center_radius()
        .ok_or(MsaError::NotCentered { a: window.a(), b: window.b() })?;
    if l < 1 {
        return Err(MsaError::InvalidParameter("tunneling needs radius at least 1".into()));
    }
    let ix = sd.basis().require(&Site::Line(x))?;
    let ends = [sd.basis().require(&Site::Line(x - l))?, sd.basis().require(&Site::Line(x + l))?];
    let sum = (0..sd.dim())
        .map(|j| ends.iter().map(|&iy| (sd.psi(j, ix) * sd.psi(j, iy)).abs()).sum::<f64>())
        .sum();
    let threshold = (-m * l as f64).exp();
    Ok((sum > threshold, TunnelingWitness { sum, threshold }))
}

/// Centre and radius of a volume built on centred segments.
pub fn center_of(volume: &Volume) -> Result<(Site, u64)> {
    let cr = |s: Segment| s.center_radius().ok_or(MsaError::NotCentered { a: s.a(), b: s.b() });
    match volume {
        Volume::Segment { window } => {
            let (c, r) = cr(*window)?;
            Ok((Site::Line(c), r as u64))
        }
        Volume::Square { square } => square_center(square).map(|(c, r)| (Site::Plane(c), r)),
        Volume::Product { a, b } => {
            let ((c1, r1), (c2, r2)) = (cr(*a)?, cr(*b)?);
            if r1 != r2 {
                return Err(MsaError::InvalidParameter("product of segments of different radii".into()));
            }
            Ok((Site::plane(c1, c2), r1 as u64))
        }
    }
}

fn square_center(sq: &SubSquare) -> Result<(Site2, u64)> {
    let (h, v) = (sq.hseg(), sq.vseg());
    let (c1, r1) = h.center_radius().ok_or(MsaError::NotCentered { a: h.a(), b: h.b() })?;
    let (c2, r2) = v.center_radius().ok_or(MsaError::NotCentered { a: v.a(), b: v.b() })?;
    if r1 != r2 {
        return Err(MsaError::InvalidParameter(format!("{sq} is not a square")));
    }
    Ok((Site2::new(c1, c2), r1 as u64))
}

/// Boundary sites of a volume that belong to the operator basis.
pub fn boundary_of(volume: &Volume, h: &HamiltonianMatrix) -> Vec<Site> {
    let sites: Vec<Site> = match volume {
        Volume::Segment { window } => {
            let mut v = vec![Site::Line(window.a())];
            if window.b() != window.a() {
                v.push(Site::Line(window.b()));
            }
            v
        }
        Volume::Square { square } => boundary_sites(square).into_iter().map(Site::Plane).collect(),
        Volume::Product { a, b } => {
            let sq = SubSquare::new(*a, *b, false).expect("unclipped windows are never empty");
            boundary_sites(&sq).into_iter().map(Site::Plane).collect()
        }
    };
    sites.into_iter().filter(|s| h.basis().index_of(s).is_some()).collect()
}

/// The three flags of a centred volume at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub resonant: bool,
    pub singular: bool,
    /// Only defined for single-particle segments.
    pub tunneling: Option<bool>,
    pub resonance: ResonanceWitness,
    pub singularity: Option<SingularWitness>,
    pub tunneling_witness: Option<TunnelingWitness>,
}

/// Classifies a centred volume. An energy within the numerical guard of the
/// spectrum is reported singular with no Green's function witness.
pub fn classify_volume(
    h: &HamiltonianMatrix,
    sd: &SpectralData,
    volume: &Volume,
    e: f64,
    m: f64,
    beta: f64,
) -> Result<Classification> {
    let (center, l) = center_of(volume)?;
    let (resonant, resonance) = classify_resonant(sd, e, l, beta);
    let boundary = boundary_of(volume, h);
    let (singular, singularity) = match classify_singular(sd, &center, &boundary, e, m, l) {
        Ok((s, w)) => (s, Some(w)),
        Err(MsaError::ResonantEnergy { .. }) => (true, None),
        Err(err) => return Err(err),
    };
    let (tunneling, tunneling_witness) = match volume {
        Volume::Segment { window } if l >= 1 => {
            let (t, w) = classify_tunneling(sd, *window, m)?;
            (Some(t), Some(w))
        }
        _ => (None, None),
    };
    Ok(Classification { resonant, singular, tunneling, resonance, singularity, tunneling_witness })
}

/// Volume on which a non-resonance + non-tunneling ⇒ non-singularity
/// implication is checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImplicationTarget {
    /// Single-particle segment; requires `m >= 2`.
    Segment { window: Segment },
    /// Off-diagonal two-particle square; both projections are tested for
    /// tunneling.
    OffDiagonalSquare { square: SubSquare },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicationOutcome {
    pub hypotheses_hold: bool,
    pub holds: bool,
    pub energy: f64,
    pub m: f64,
    pub m_prime: f64,
    pub resonance: ResonanceWitness,
    pub tunneling: Vec<TunnelingWitness>,
    pub singularity: Option<SingularWitness>,
}

/// Relative slack for rounding when a conclusion is an exact consequence of
/// the hypotheses.
const IMPLICATION_SLACK: f64 = 1e-12;

pub fn check_implication_nr_nt_ns(
    sys: &System,
    target: &ImplicationTarget,
    sample: &PotentialSample,
    e: f64,
    m: f64,
    params: &MsaParams,
) -> Result<ImplicationOutcome> {
    let g = sys.disorder.g;
    let (volume, segments, variant) = match target {
        ImplicationTarget::Segment { window } => {
            if m < 2.0 {
                return Err(MsaError::InvalidParameter(format!("segment variant needs m >= 2, got {m}")));
            }
            (Volume::Segment { window: *window }, vec![*window], DegradeVariant::Lemma31)
        }
        ImplicationTarget::OffDiagonalSquare { square } => {
            let strip = DiagonalStrip { d: sys.interaction.d };
            if classify_diagonal(square, &strip) != DiagonalKind::OffDiagonal {
                return Err(MsaError::InvalidParameter(format!("{square} is not off-diagonal")));
            }
            (Volume::Square { square: *square }, vec![square.hseg(), square.vseg()], DegradeVariant::Lemma43)
        }
    };
    let (center, l) = center_of(&volume)?;
    let h = sys.hamiltonian(&volume, sample)?;
    let sd = eig_sym(&h)?;
    let (resonant, resonance) = classify_resonant(&sd, e, l, params.beta);
    let mut tunneling = Vec::with_capacity(segments.len());
    let mut any_tunneling = false;
    for s in &segments {
        let h1 = crate::operators::build_h1(*s, sample, g)?;
        let (t, w) = classify_tunneling(&eig_sym(&h1)?, *s, m)?;
        any_tunneling |= t;
        tunneling.push(w);
    }
    let m_prime = mass_degrade(m, l, params.beta, variant);
    let hypotheses_hold = !resonant && !any_tunneling;
    let mut out = ImplicationOutcome {
        hypotheses_hold,
        holds: true,
        energy: e,
        m,
        m_prime,
        resonance,
        tunneling,
        singularity: None,
    };
    if hypotheses_hold {
        let boundary = boundary_of(&volume, &h);
        let (_, w) = classify_singular(&sd, &center, &boundary, e, m_prime, l)?;
        out.holds = w.max_green <= w.threshold * (1.0 + IMPLICATION_SLACK);
        out.singularity = Some(w);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Diagonal sub-squares, pairwise distant.
    DiagonalPairwiseDistant,
    /// Off-diagonal sub-squares, pairwise disjoint.
    OffDiagonalDisjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistantRule {
    /// Max-norm distance strictly above `8 L`.
    #[serde(rename = "8L")]
    EightL,
    /// Max-norm distance at least `6 L + 2 d`.
    #[serde(rename = "6L+2d")]
    SixLPlusTwoD,
}

impl DistantRule {
    pub fn separated(&self, a: &SubSquare, b: &SubSquare, l: i64, d: u32) -> bool {
        let dist = dist_inf(a, b);
        match self {
            DistantRule::EightL => dist > 8 * l,
            DistantRule::SixLPlusTwoD => dist >= 6 * l + 2 * i64::from(d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountOutcome {
    pub count: usize,
    /// Centres of every sub-square of the requested kind that is singular.
    pub singular_centers: Vec<Site2>,
    /// Centres of a packing that attains `count`.
    pub packing: Vec<Site2>,
    pub candidates: usize,
    /// Whether `count` is the exact maximum (otherwise a greedy lower bound).
    pub exact: bool,
}

/// Above this many singular sub-squares the maximum packing falls back to a
/// lexicographic greedy scan.
pub const EXACT_PACKING_LIMIT: usize = 64;

/// Sub-squares of radius `l_small` inside `big`, centred on basis sites.
pub fn sub_squares(big: &SubSquare, l_small: i64, stat: Statistics) -> Vec<SubSquare> {
    let (h, v) = (big.hseg(), big.vseg());
    let mut out = Vec::new();
    for c1 in (h.a() + l_small)..=(h.b() - l_small) {
        for c2 in (v.a() + l_small)..=(v.b() - l_small) {
            let c = Site2::new(c1, c2);
            let in_basis = match stat {
                Statistics::Fermionic => c1 > c2,
                Statistics::Bosonic => c1 >= c2,
            };
            if in_basis && big.contains(c) {
                if let Ok(sq) = SubSquare::centered(c, l_small) {
                    out.push(sq);
                }
            }
        }
    }
    out
}

/// Maximal number of singular sub-squares of radius `l_small` in `big` that
/// are pairwise compatible under `mode`.
#[allow(clippy::too_many_arguments)]
pub fn count_singular_subsquares(
    sys: &System,
    big: &SubSquare,
    sample: &PotentialSample,
    e: f64,
    m: f64,
    l_small: i64,
    mode: CountMode,
    rule: DistantRule,
) -> Result<CountOutcome> {
    let (h, v) = (big.hseg(), big.vseg());
    if 2 * l_small + 1 > (h.len().min(v.len())) as i64 {
        return Err(MsaError::InvalidParameter(format!(
            "sub-square radius {l_small} does not fit in {big}"
        )));
    }
    let strip = DiagonalStrip { d: sys.interaction.d };
    let want = match mode {
        CountMode::DiagonalPairwiseDistant => DiagonalKind::Diagonal,
        CountMode::OffDiagonalDisjoint => DiagonalKind::OffDiagonal,
    };
    let cands: Vec<SubSquare> = sub_squares(big, l_small, sys.statistics)
        .into_iter()
        .filter(|sq| classify_diagonal(sq, &strip) == want)
        .collect();
    let mut singular = Vec::new();
    for sq in &cands {
        let vol = Volume::Square { square: *sq };
        let hm = sys.hamiltonian(&vol, sample)?;
        let sd = eig_sym(&hm)?;
        let (center, l) = center_of(&vol)?;
        let boundary = boundary_of(&vol, &hm);
        let s = match classify_singular(&sd, &center, &boundary, e, m, l) {
            Ok((s, _)) => s,
            Err(MsaError::ResonantEnergy { .. }) => true,
            Err(err) => return Err(err),
        };
        if s {
            singular.push(*sq);
        }
    }
    let compatible = |a: &SubSquare, b: &SubSquare| match mode {
        CountMode::DiagonalPairwiseDistant => rule.separated(a, b, l_small, sys.interaction.d),
        CountMode::OffDiagonalDisjoint => dist_inf(a, b) > 0,
    };
    let (chosen, exact) = max_packing(&singular, compatible);
    let center = |sq: &SubSquare| {
        Site2::new(
            sq.hseg().center_radius().expect("centred").0,
            sq.vseg().center_radius().expect("centred").0,
        )
    };
    Ok(CountOutcome {
        count: chosen.len(),
        singular_centers: singular.iter().map(center).collect(),
        packing: chosen.iter().map(|&i| center(&singular[i])).collect(),
        candidates: cands.len(),
        exact,
    })
}

/// Largest pairwise-compatible subset (indices, ascending). Exact by
/// branch and bound up to [`EXACT_PACKING_LIMIT`] items, greedy above.
fn max_packing<T>(items: &[T], compatible: impl Fn(&T, &T) -> bool) -> (Vec<usize>, bool) {
    let n = items.len();
    if n > EXACT_PACKING_LIMIT {
        let mut chosen: Vec<usize> = Vec::new();
        for i in 0..n {
            if chosen.iter().all(|&j| compatible(&items[i], &items[j])) {
                chosen.push(i);
            }
        }
        return (chosen, false);
    }
    let mut ok = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && compatible(&items[i], &items[j]) {
                ok[i] |= 1 << j;
            }
        }
    }
    fn search(ok: &[u64], cand: u64, cur: u64, best: &mut u64) {
        if cand == 0 {
            if cur.count_ones() > best.count_ones() {
                *best = cur;
            }
            return;
        }
        if cur.count_ones() + cand.count_ones() <= best.count_ones() {
            return;
        }
        let i = cand.trailing_zeros() as usize;
        let bit = 1u64 << i;
        search(ok, cand & ok[i], cur | bit, best);
        search(ok, cand & !bit, cur, best);
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best = 0u64;
    search(&ok, all, 0, &mut best);
    ((0..n).filter(|i| best >> i & 1 == 1).collect(), true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassFit {
    pub m_hat: f64,
    pub r2: f64,
    pub n_points: usize,
    /// Some amplitude underflowed and was floored.
    pub floored: bool,
}

pub const AMPLITUDE_FLOOR: f64 = 1e-300;

/// Index of the eigenvector whose eigenvalue is closest to `e`.
pub fn select_eigenvector(sd: &SpectralData, e: f64) -> usize {
    sd.nearest(e)
}

/// Site where `|ψ_j|` is largest.
pub fn localization_center(sd: &SpectralData, j: usize) -> Site {
    let mut best = 0;
    for i in 1..sd.dim() {
        if sd.psi(j, i).abs() > sd.psi(j, best).abs() {
            best = i;
        }
    }
    sd.basis().sites()[best]
}

/// Decay rate of `ψ_j` away from `center`.
///
/// Sites with `r_min <= |x - center| <= r_max` (Euclidean) are grouped into
/// shells by rounded distance; in each shell the largest `|ψ|` is kept, and
/// `ln |ψ|` is regressed on the distance of that site. The mass is the
/// negated slope.
pub fn estimate_mass(sd: &SpectralData, j: usize, center: &Site, r_min: f64, r_max: f64) -> Result<MassFit> {
    let amps: Vec<(f64, f64)> = sd
        .basis()
        .sites()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.euclid_dist(center), sd.psi(j, i).abs()))
        .collect();
    fit_profile(&amps, r_min, r_max)
}

/// Shell-maximum log-linear fit of `(distance, amplitude)` pairs.
pub fn fit_profile(amps: &[(f64, f64)], r_min: f64, r_max: f64) -> Result<MassFit> {
    if !(r_min >= 0.0 && r_min < r_max) {
        return Err(MsaError::InvalidParameter(format!("fit window [{r_min}, {r_max}]")));
    }
    let mut shells: std::collections::BTreeMap<i64, (f64, f64)> = Default::default();
    for &(r, a) in amps {
        if r < r_min || r > r_max {
            continue;
        }
        let key = r.round() as i64;
        let e = shells.entry(key).or_insert((r, a));
        if a > e.1 {
            *e = (r, a);
        }
    }
    if shells.len() < 2 {
        return Err(MsaError::InvalidParameter("fewer than two shells in the fit window".into()));
    }
    let mut floored = false;
    let pts: Vec<(f64, f64)> = shells
        .values()
        .map(|&(r, a)| {
            if a < AMPLITUDE_FLOOR {
                floored = true;
            }
            (r, a.max(AMPLITUDE_FLOOR).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(MassFit { m_hat: -slope, r2, n_points: pts.len(), floored })
}

/// First basis site whose diagonal entry is within `tau` of `e`; `tau`
/// defaults to `e^{mL} + 4`.
pub fn near_resonant_site(h: &HamiltonianMatrix, e: f64, m: f64, l: u64, tau: Option<f64>) -> Option<Site> {
    let tau = tau.unwrap_or_else(|| (m * l as f64).exp() + FREE_NORM);
    h.diagonal()
        .iter()
        .position(|d| (d - e).abs() < tau)
        .map(|i| h.basis().sites()[i])
}

/// Energies `lo, lo + δ, ...` up to and including `hi`.
pub fn energy_grid(lo: f64, hi: f64, spacing: f64) -> Result<Vec<f64>> {
    if !lo.is_finite() || !hi.is_finite() || lo > hi || spacing.is_nan() || spacing <= 0.0 {
        return Err(MsaError::InvalidParameter(format!("energy grid [{lo}, {hi}] step {spacing}")));
    }
    let steps = ((hi - lo) / spacing).ceil() as usize;
    if steps > 10_000_000 {
        return Err(MsaError::InvalidParameter(format!("energy grid of {steps} points")));
    }
    let mut out: Vec<f64> = (0..steps).map(|k| lo + k as f64 * spacing).filter(|x| *x < hi).collect();
    out.push(hi);
    Ok(out)
}

/// Default energy spacing `e^{-L^β} / 10`.
pub fn default_spacing(l: u64, beta: f64) -> f64 {
    (-(l as f64).powf(beta)).exp() / 10.0
}
