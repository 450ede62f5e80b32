//! IID random potential, finite-range pair interaction, conditional resampling.

use rand_distr::{Cauchy, Distribution as _, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{MsaError, Result};
use crate::geometry::{Segment, Site2};
use crate::rng::{absorb, stream_rng, zigzag};

const DOMAIN_POTENTIAL: u64 = 0x706f_7465_6e74_6961;
const DOMAIN_RESAMPLE: u64 = 0x7265_7361_6d70_6c65;

/// Single-site law of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Distribution {
    /// Cauchy law centred at 0; its characteristic function is `exp(-scale |t|)`.
    Cauchy { scale: f64 },
    Gaussian { sigma: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            Distribution::Cauchy { scale } => ("cauchy scale", scale),
            Distribution::Gaussian { sigma } => ("gaussian sigma", sigma),
        };
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(MsaError::InvalidParameter(format!("{name} must be positive, got {v}")))
        }
    }

    /// Supremum of the probability density.
    pub fn density_sup(&self) -> f64 {
        match *self {
            Distribution::Cauchy { scale } => 1.0 / (std::f64::consts::PI * scale),
            Distribution::Gaussian { sigma } => 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt()),
        }
    }

    /// Characteristic function `E exp(itV)` (real, since both laws are symmetric).
    pub fn characteristic(&self, t: f64) -> f64 {
        match *self {
            Distribution::Cauchy { scale } => (-scale * t.abs()).exp(),
            Distribution::Gaussian { sigma } => (-0.5 * sigma * sigma * t * t).exp(),
        }
    }
}

/// Law, amplitude and seed of the external field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub distribution: Distribution,
    pub g: f64,
    pub master_seed: u64,
    /// Range `|t| <= t_max` on which the Gaussian decay constant is tuned.
    pub t_max: f64,
}

impl DisorderSpec {
    pub fn new(distribution: Distribution, g: f64, master_seed: u64) -> Self {
        Self { distribution, g, master_seed, t_max: 2.0 }
    }

    pub fn cauchy(scale: f64, g: f64, master_seed: u64) -> Self {
        Self::new(Distribution::Cauchy { scale }, g, master_seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if !self.g.is_finite() {
            return Err(MsaError::InvalidParameter(format!("amplitude g = {}", self.g)));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(MsaError::InvalidParameter(format!("t_max = {}", self.t_max)));
        }
        Ok(())
    }

    /// Potential value at site `x` of replicate `replicate`.
    pub fn site_value(&self, replicate: u64, x: i64) -> f64 {
        let key = absorb(absorb(self.master_seed, DOMAIN_POTENTIAL), replicate);
        self.draw(key, x)
    }

    fn resampled_value(&self, replicate: u64, x: i64) -> f64 {
        let key = absorb(absorb(self.master_seed, DOMAIN_RESAMPLE), replicate);
        self.draw(key, x)
    }

    fn draw(&self, key: u64, x: i64) -> f64 {
        let mut rng = stream_rng(key, zigzag(x));
        match self.distribution {
            Distribution::Cauchy { scale } => Cauchy::new(0.0, scale)
                .expect("validated scale")
                .sample(&mut rng),
            Distribution::Gaussian { sigma } => Normal::new(0.0, sigma)
                .expect("validated sigma")
                .sample(&mut rng),
        }
    }
}

/// Constants `(a, b)` with `|E exp(itV)| <= b exp(-a |t|)`.
///
/// Cauchy(γ) satisfies this with `(γ, 1)` for every `t`. For a Gaussian with
/// deviation σ we take `a = σ² t_max / 2` and `b = exp(a² / (2σ²))`, the
/// smallest `b` for that slope; the pair is then valid for all `t`.
pub fn char_bound_params(spec: &DisorderSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    match spec.distribution {
        Distribution::Cauchy { scale } => Ok((scale, 1.0)),
        Distribution::Gaussian { sigma } => {
            let s2 = sigma * sigma;
            let a = s2 * spec.t_max / 2.0;
            Ok((a, (a * a / (2.0 * s2)).exp()))
        }
    }
}

/// `B = 2 (a|g| - b - 1)`, the decay rate of the averaged characteristic function.
pub fn decay_rate(spec: &DisorderSpec) -> Result<f64> {
    let (a, b) = char_bound_params(spec)?;
    Ok(2.0 * (a * spec.g.abs() - b - 1.0))
}

/// Finite-range pair interaction `U(x) = profile[x1 - x2]` for `0 <= x1 - x2 <= d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub d: u32,
    pub profile: Vec<f64>,
}

impl InteractionSpec {
    pub fn new(d: u32, profile: Vec<f64>) -> Result<Self> {
        let s = Self { d, profile };
        s.validate()?;
        Ok(s)
    }

    pub fn none() -> Self {
        Self { d: 0, profile: vec![0.0] }
    }

    /// Range `d` with the same strength at every distance.
    pub fn constant(d: u32, strength: f64) -> Self {
        Self { d, profile: vec![strength; d as usize + 1] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.profile.len() != self.d as usize + 1 {
            return Err(MsaError::InvalidParameter(format!(
                "interaction profile has {} entries, range d = {} needs {}",
                self.profile.len(),
                self.d,
                self.d + 1
            )));
        }
        if let Some(v) = self.profile.iter().find(|v| !v.is_finite()) {
            return Err(MsaError::InvalidParameter(format!("interaction value {v}")));
        }
        Ok(())
    }

    pub fn value(&self, u: Site2) -> f64 {
        let diff = u.x1 - u.x2;
        if diff < 0 || diff > i64::from(self.d) {
            0.0
        } else {
            self.profile[diff as usize]
        }
    }
}

/// Potential values on a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    window: Segment,
    values: Vec<f64>,
}

impl PotentialSample {
    pub fn from_values(window: Segment, values: Vec<f64>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(MsaError::DimensionMismatch(format!(
                "{} values for window {window}",
                values.len()
            )));
        }
        Ok(Self { window, values })
    }

    pub fn window(&self) -> Segment {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: i64) -> Option<f64> {
        self.window
            .contains(x)
            .then(|| self.values[(x - self.window.a()) as usize])
    }

    pub fn value(&self, x: i64) -> Result<f64> {
        self.get(x).ok_or_else(|| MsaError::OutsideWindow(x.to_string()))
    }

    /// Returns a copy with the value at `x` replaced.
    pub fn with_value(&self, x: i64, v: f64) -> Result<Self> {
        let mut out = self.clone();
        let i = (x - self.window.a()) as usize;
        if !self.window.contains(x) {
            return Err(MsaError::OutsideWindow(x.to_string()));
        }
        out.values[i] = v;
        Ok(out)
    }
}

pub fn sample_potential(spec: &DisorderSpec, window: Segment, replicate: u64) -> PotentialSample {
    let values = window.iter().map(|x| spec.site_value(replicate, x)).collect();
    PotentialSample { window, values }
}

/// `U(u) + g V(u1) + g V(u2)`.
pub fn potential_energy_2p(
    u: Site2,
    v: &PotentialSample,
    inter: &InteractionSpec,
    g: f64,
) -> Result<f64> {
    let v1 = v.get(u.x1).ok_or_else(|| MsaError::OutsideWindow(u.to_string()))?;
    let v2 = v.get(u.x2).ok_or_else(|| MsaError::OutsideWindow(u.to_string()))?;
    Ok(inter.value(u) + g * v1 + g * v2)
}

/// Keeps the values on `frozen` and redraws every other site of the window
/// from a resampling stream keyed by `replicate`.
pub fn conditional_resample(
    spec: &DisorderSpec,
    sample: &PotentialSample,
    frozen: &[Segment],
    replicate: u64,
) -> Result<PotentialSample> {
    if let Some(f) = frozen.iter().find(|f| !sample.window.contains_segment(f)) {
        return Err(MsaError::OutsideWindow(format!(
            "frozen segment {f} not contained in {}",
            sample.window
        )));
    }
    let values = sample
        .window
        .iter()
        .zip(&sample.values)
        .map(|(x, &v)| {
            if frozen.iter().any(|f| f.contains(x)) {
                v
            } else {
                spec.resampled_value(replicate, x)
            }
        })
        .collect();
    Ok(PotentialSample { window: sample.window, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn seg(a: i64, b: i64) -> Segment {
        Segment::new(a, b).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_and_site_keyed() {
        let spec = DisorderSpec::cauchy(1.0, 1.0, 99);
        let a = sample_potential(&spec, seg(0, 5), 4);
        let b = sample_potential(&spec, seg(0, 5), 4);
        assert_eq!(a, b);
        let c = sample_potential(&spec, seg(3, 8), 4);
        for x in 3..=5 {
            assert_eq!(a.get(x), c.get(x));
        }
        let other = sample_potential(&spec, seg(0, 5), 5);
        assert_ne!(a, other);
    }

    #[test]
    fn cauchy_median_is_zero() {
        let spec = DisorderSpec::cauchy(1.0, 1.0, 2024);
        let mut v = sample_potential(&spec, seg(0, 99_999), 0).values().to_vec();
        v.sort_by(f64::total_cmp);
        let median = 0.5 * (v[49_999] + v[50_000]);
        assert!(median.abs() < 0.02, "median {median}");
    }

    #[test]
    fn cauchy_characteristic_function_decay() {
        let n = 100_000;
        let spec = DisorderSpec::cauchy(1.0, 1.0, 11);
        let s = sample_potential(&spec, seg(0, n - 1), 0);
        for t in [0.5, 1.0, 2.0] {
            let (re, im) = s
                .values()
                .iter()
                .fold((0.0, 0.0), |(re, im), v| (re + (t * v).cos(), im + (t * v).sin()));
            let modulus = (re * re + im * im).sqrt() / n as f64;
            assert!(modulus <= (-t).exp() + 3.0 / (n as f64).sqrt(), "t={t}: {modulus}");
        }
    }

    /// Characteristic function by trapezoidal quadrature of the density on a
    /// truncated range, with the analytic tail correction dropped.
    fn quadrature_char(scale: f64, t: f64) -> f64 {
        let cut = 4000.0 * scale;
        let steps = 4_000_000;
        let h = 2.0 * cut / steps as f64;
        let mut acc = 0.0;
        for k in 0..=steps {
            let y = -cut + k as f64 * h;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            let f = scale / (std::f64::consts::PI * (scale * scale + y * y));
            acc += w * (t * y).cos() * f;
        }
        acc * h
    }

    #[test]
    fn cauchy_bound_params_match_quadrature() {
        for scale in [1.0, 2.0] {
            let (a, b) = char_bound_params(&DisorderSpec::cauchy(scale, 1.0, 0)).unwrap();
            assert_eq!((a, b), (scale, 1.0));
            for t in [0.25, 0.5, 1.0, 1.5] {
                let q = quadrature_char(scale, t);
                assert!((q - (-a * t).exp()).abs() < 1e-3, "scale {scale} t {t}: {q}");
            }
        }
    }

    #[test]
    fn gaussian_bound_params_hold_on_grid() {
        let spec = DisorderSpec::new(Distribution::Gaussian { sigma: 1.0 }, 1.0, 0);
        let (a, b) = char_bound_params(&spec).unwrap();
        assert_relative_eq!(a, 1.0);
        assert_relative_eq!(b, 0.5f64.exp());
        for k in 0..=20_000 {
            let t = 8.0 * k as f64 / 20_000.0;
            assert!((-t * t / 2.0).exp() <= b * (-a * t).exp() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn invalid_laws_are_rejected() {
        assert!(char_bound_params(&DisorderSpec::cauchy(0.0, 1.0, 0)).is_err());
        let g = DisorderSpec::new(Distribution::Gaussian { sigma: -1.0 }, 1.0, 0);
        assert!(matches!(char_bound_params(&g), Err(MsaError::InvalidParameter(_))));
    }

    #[test]
    fn two_particle_potential_energy() {
        let v = PotentialSample::from_values(seg(0, 5), vec![0.0, 0.0, 1.5, 0.0, 0.0, 0.0]).unwrap();
        let none = InteractionSpec::none();
        assert_eq!(potential_energy_2p(Site2::new(2, 2), &v, &none, 0.0).unwrap(), 0.0);

        let inter = InteractionSpec::new(0, vec![3.0]).unwrap();
        assert_eq!(potential_energy_2p(Site2::new(2, 2), &v, &inter, 2.0).unwrap(), 9.0);

        let ranged = InteractionSpec::constant(2, 7.0);
        assert_eq!(ranged.value(Site2::new(5, 1)), 0.0);
        assert_eq!(ranged.value(Site2::new(3, 1)), 7.0);

        assert!(potential_energy_2p(Site2::new(6, 2), &v, &none, 1.0).is_err());
    }

    #[test]
    fn potential_energy_ignores_other_sites() {
        let spec = DisorderSpec::cauchy(1.0, 3.0, 5);
        let v = sample_potential(&spec, seg(0, 9), 0);
        let inter = InteractionSpec::constant(1, 0.5);
        let u = Site2::new(6, 2);
        let before = potential_energy_2p(u, &v, &inter, 3.0).unwrap();
        let mut w = v.clone();
        for x in [0, 1, 3, 4, 5, 7, 8, 9] {
            w = w.with_value(x, 1e6).unwrap();
        }
        assert_eq!(potential_energy_2p(u, &w, &inter, 3.0).unwrap(), before);
    }

    #[test]
    fn interaction_profile_length_is_checked() {
        assert!(InteractionSpec::new(2, vec![1.0]).is_err());
    }

    #[test]
    fn resample_keeps_frozen_sites() {
        let spec = DisorderSpec::cauchy(1.0, 1.0, 3);
        let base = sample_potential(&spec, seg(0, 5), 0);

        let all = conditional_resample(&spec, &base, &[seg(0, 5)], 1).unwrap();
        assert_eq!(all, base);

        let fresh = conditional_resample(&spec, &base, &[], 1).unwrap();
        assert!(fresh.values().iter().zip(base.values()).all(|(a, b)| a != b));

        let mut v4 = Vec::new();
        for r in 0..1000 {
            let s = conditional_resample(&spec, &base, &[seg(0, 2)], r).unwrap();
            assert_eq!(s.get(1), base.get(1));
            v4.push(s.get(4).unwrap());
        }
        let mean = v4.iter().sum::<f64>() / v4.len() as f64;
        let var = v4.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        assert!(var > 0.0);

        assert!(conditional_resample(&spec, &base, &[seg(4, 7)], 0).is_err());
    }
}
