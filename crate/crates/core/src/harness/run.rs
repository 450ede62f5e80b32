//! Experiment dispatch.

use log::info;
use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use crate::disorder::PotentialSample;
use crate::error::{MsaError, Result};
use crate::estimators::{
    decay_envelopes, direct_sum_event_mc, molchanov_averaged, molchanov_fixed, pair_event_mc, resonance_prob_mc,
    tunneling_prob_mc, wegner_conditional_mc, wegner_mc_multi, ConditionalEnergy,
};
use crate::geometry::SubSquare;
use crate::msa::{
    center_of, check_implication_nr_nt_ns, classify_volume, count_singular_subsquares, estimate_mass,
    localization_center, schedule, select_eigenvector, ImplicationTarget,
};
use crate::rng::{derive_seed, stream_rng};
use crate::spectral::{diag_propagator, eig_sym, green, green_direct, khat_direct, spectral_dist, spectral_measure};
use crate::stats::{mean_stderr, median, Bound, ProbEstimate, Status};
use crate::system::{System, Volume};

use super::config::{EnergyRule, ExperimentConfig, PathMode};
use super::record::{Parameters, ResultRecord};

/// Every experiment family with a one-line description.
pub const EXPERIMENTS: [(&str, &str); 17] = [
    ("build", "Assemble one operator draw and report its dimension and norm; optionally dump the matrix"),
    ("spectrum", "Eigenvalues of one operator draw and their distance to the energy"),
    ("green", "Green's function between two sites by eigen-expansion and by a direct solve"),
    ("classify", "Frequencies of the resonant, singular and tunneling flags of a centred volume"),
    ("schedule", "Length scales L_{k+1} = L_k^alpha and masses of the induction"),
    ("wegner", "Probability of an eigenvalue within r of E against the linear-in-r volume bound"),
    ("wegner-cond", "Wegner probability conditioned on frozen potential values, with measurable energies"),
    ("resonance", "Probability that a square is E-resonant against the volume and power bounds"),
    ("tunneling", "Probability that a segment is m-tunneling against the 1 - L^-q bound"),
    ("pairs", "Probability that two separated squares are both singular or both resonant"),
    ("molchanov", "Path-integral estimate of the diagonal propagator <u, e^{itH} u>"),
    ("mass", "Exponential decay rate fitted to eigenfunction profiles"),
    ("khat", "Disorder-averaged characteristic function of the spectral measure against its decay envelope"),
    ("implication", "Search for counterexamples to: non-resonant and non-tunneling implies non-singular"),
    ("count", "Maximal number of separated singular sub-squares in a large square"),
    ("direct-sum", "Events of a pair of squares with at least one off-diagonal member"),
    ("measure", "Histogram of the disorder-averaged spectral measure at a site"),
];

/// Master seed of an experiment's disorder.
pub fn experiment_seed(cfg: &ExperimentConfig) -> u64 {
    derive_seed(cfg.seed, &cfg.experiment, 0)
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    sys: System,
}

impl Ctx<'_> {
    fn params(&self) -> Parameters {
        let c = self.cfg;
        Parameters {
            l: u64::try_from(c.geometry.radius).ok(),
            l2: c.geometry.center2.and(c.geometry.radius2.or(Some(c.geometry.radius))).and_then(|r| u64::try_from(r).ok()),
            g: c.disorder.g,
            m: None,
            e: Some(c.sampling.energy),
            r: None,
            extra: Value::Null,
        }
    }

    fn record(&self, params: Parameters) -> ResultRecord {
        ResultRecord::new(&self.cfg.experiment, self.cfg.seed, params)
    }

    fn volume(&self) -> Result<Volume> {
        self.cfg.volume()
    }

    fn square(&self) -> Result<SubSquare> {
        match self.volume()? {
            Volume::Square { square } => Ok(square),
            _ => Err(MsaError::Config(format!("experiment `{}` needs geometry.kind = \"square\"", self.cfg.experiment))),
        }
    }

    fn second_square(&self) -> Result<SubSquare> {
        self.cfg
            .second_square()?
            .ok_or_else(|| MsaError::Config(format!("experiment `{}` needs geometry.center2", self.cfg.experiment)))
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Runs the experiment named in `cfg`. The output depends only on `cfg`,
/// apart from record timestamps.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let ctx = Ctx { cfg, sys: cfg.system(experiment_seed(cfg))? };
    info!("running `{}` with seed {}", cfg.experiment, cfg.seed);
    let records = match cfg.experiment.as_str() {
        "build" => run_build(&ctx)?,
        "spectrum" => run_spectrum(&ctx)?,
        "green" => run_green(&ctx)?,
        "classify" => run_classify(&ctx)?,
        "schedule" => run_schedule(&ctx)?,
        "wegner" => run_wegner(&ctx)?,
        "wegner-cond" => run_wegner_cond(&ctx)?,
        "resonance" => run_resonance(&ctx)?,
        "tunneling" => run_tunneling(&ctx)?,
        "pairs" => run_pairs(&ctx)?,
        "molchanov" => run_molchanov(&ctx)?,
        "mass" => run_mass(&ctx)?,
        "khat" => run_khat(&ctx)?,
        "implication" => run_implication(&ctx)?,
        "count" => run_count(&ctx)?,
        "direct-sum" => run_direct_sum(&ctx)?,
        "measure" => run_measure(&ctx)?,
        other => return Err(MsaError::UnknownExperiment(other.to_string())),
    };
    for r in &records {
        r.validate()?;
    }
    Ok(records)
}

fn run_build(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let h = ctx.sys.draw(&ctx.volume()?, 0)?;
    if let Some(path) = &ctx.cfg.output.dump {
        let io = |e: std::io::Error| MsaError::Io { path: path.clone(), message: e.to_string() };
        let file = std::fs::File::create(path).map_err(io)?;
        h.write_dump(std::io::BufWriter::new(file)).map_err(io)?;
    }
    let sd = eig_sym(&h)?;
    let w = json!({
        "dim": h.dim(),
        "meta": to_value(&h.meta()),
        "norm": sd.norm(),
        "trace": h.diagonal().iter().sum::<f64>(),
    });
    Ok(vec![ctx.record(ctx.params()).with_witnesses(w)])
}

fn run_spectrum(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let sd = eig_sym(&ctx.sys.draw(&ctx.volume()?, 0)?)?;
    let e = ctx.cfg.sampling.energy;
    let w = json!({
        "eigenvalues": sd.eigenvalues(),
        "dist": spectral_dist(&sd, e),
        "norm": sd.norm(),
    });
    Ok(vec![ctx.record(ctx.params()).with_witnesses(w)])
}

fn run_green(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let h = ctx.sys.draw(&ctx.volume()?, 0)?;
    let sd = eig_sym(&h)?;
    let (y, u, e) = (ctx.cfg.target()?, ctx.cfg.site()?, ctx.cfg.sampling.energy);
    let expansion = green(&sd, &y, &u, e)?;
    let direct = green_direct(&h, &y, &u, e)?;
    let w = json!({
        "y": to_value(&y),
        "u": to_value(&u),
        "green": expansion,
        "direct": direct,
        "abs_diff": (expansion - direct).abs(),
        "dist": spectral_dist(&sd, e),
    });
    Ok(vec![ctx.record(ctx.params()).with_witnesses(w)])
}

fn run_classify(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let volume = ctx.volume()?;
    let (e, m, beta, n) = (ctx.cfg.sampling.energy, ctx.cfg.msa.m, ctx.cfg.msa.beta, ctx.cfg.sampling.n);
    let per = crate::estimators::per_replicate(n, |rep| {
        let h = ctx.sys.draw(&volume, rep)?;
        let sd = eig_sym(&h)?;
        classify_volume(&h, &sd, &volume, e, m, beta)
    })?;
    let count = |f: &dyn Fn(&crate::msa::Classification) -> bool| per.iter().filter(|c| f(c)).count() as u64;
    let singular = ProbEstimate::from_counts(count(&|c| c.singular), n, None)?;
    let w = json!({
        "resonant": count(&|c| c.resonant),
        "singular": singular.successes,
        "tunneling": count(&|c| c.tunneling == Some(true)),
        "first": to_value(&per[0]),
    });
    let mut p = ctx.params();
    p.m = Some(m);
    Ok(vec![ctx.record(p).with_estimate(&singular).with_witnesses(w)])
}

fn run_schedule(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let c = &ctx.cfg.msa;
    let s = schedule(c.l0, c.m0, &c.params(), c.k_max)?;
    let mut w = to_value(&s);
    if let Value::Object(map) = &mut w {
        for (k, l) in s.lengths.iter().enumerate() {
            map.insert(format!("L{k}"), json!(l));
        }
        for (k, m) in s.masses.iter().enumerate() {
            map.insert(format!("m{k}"), json!(m));
        }
    }
    let mut p = ctx.params();
    p.l = Some(c.l0);
    p.l2 = s.lengths.get(1).copied();
    p.m = Some(c.m0);
    p.e = None;
    Ok(vec![ctx.record(p).with_witnesses(w)])
}

fn run_wegner(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let s = &ctx.cfg.sampling;
    let ests = wegner_mc_multi(&ctx.sys, &ctx.volume()?, s.energy, &s.r, s.n)?;
    Ok(ests
        .iter()
        .map(|est| {
            let mut p = ctx.params();
            p.r = Some(est.r);
            let w = json!({
                "successes": est.estimate.successes,
                "b": est.b,
                "mean_trace": est.mean_trace,
                "trace_dominates": est.trace_dominates,
            });
            ctx.record(p).with_estimate(&est.estimate).with_witnesses(w)
        })
        .collect())
}

fn run_wegner_cond(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let sq = ctx.square()?;
    let frozen = ctx.cfg.frozen()?;
    let s = &ctx.cfg.sampling;
    let mut out = Vec::new();
    for &r in &s.r {
        let est = match s.energy_rule {
            EnergyRule::Fixed => {
                wegner_conditional_mc(&ctx.sys, &sq, &frozen, ConditionalEnergy::Fixed(s.energy), r, s.n_outer, s.n_inner)?
            }
            EnergyRule::FrozenEigenvalue => {
                let other = Volume::Square { square: ctx.second_square()? };
                let sys = &ctx.sys;
                let e0 = s.energy;
                let f = move |v: &PotentialSample| -> Result<f64> {
                    let sd = eig_sym(&sys.hamiltonian(&other, v)?)?;
                    Ok(sd.eigenvalues()[sd.nearest(e0)])
                };
                wegner_conditional_mc(sys, &sq, &frozen, ConditionalEnergy::Measurable(&f), r, s.n_outer, s.n_inner)?
            }
        };
        let mut p = ctx.params();
        p.r = Some(r);
        if s.energy_rule == EnergyRule::FrozenEigenvalue {
            p.e = None;
        }
        let w = json!({
            "worst_outer": est.worst_outer,
            "per_outer": est.per_outer,
            "energies": est.energies,
            "n_outer": est.n_outer,
            "n_inner": est.n_inner,
            "b": est.b,
        });
        out.push(ctx.record(p).with_estimate(&est.worst).with_witnesses(w));
    }
    Ok(out)
}

fn run_resonance(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let c = ctx.cfg;
    let est = resonance_prob_mc(&ctx.sys, &ctx.square()?, c.sampling.energy, &c.msa.params(), c.sampling.n)?;
    let w = json!({
        "successes": est.estimate.successes,
        "volume_bound": est.volume_bound,
        "power_bound": est.power_bound,
    });
    Ok(vec![ctx.record(ctx.params()).with_estimate(&est.estimate).with_witnesses(w)])
}

fn run_tunneling(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let c = ctx.cfg;
    let window = match ctx.volume()? {
        Volume::Segment { window } => window,
        _ => return Err(MsaError::Config("tunneling needs geometry.kind = \"segment\"".into())),
    };
    let est = tunneling_prob_mc(&ctx.sys, window, c.msa.m, &c.msa.params(), c.sampling.n)?;
    let mut p = ctx.params();
    p.m = Some(c.msa.m);
    p.e = None;
    let w = json!({ "successes": est.estimate.successes, "mean_sum": est.mean_sum });
    Ok(vec![ctx.record(p).with_estimate(&est.estimate).with_witnesses(w)])
}

fn run_pairs(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let c = ctx.cfg;
    let s = &c.sampling;
    let (a, b) = (ctx.square()?, ctx.second_square()?);
    let params = c.msa.params();
    let mut est = pair_event_mc(&ctx.sys, &a, &b, s.energy_window(), c.msa.m, &params, s.n, s.quantifier, s.event)?;
    if let Some(lt) = c.msa.l_target {
        let bound = Bound::upper((lt as f64).powf(-2.0 * params.p));
        est.estimate = ProbEstimate::from_counts(est.estimate.successes, est.estimate.n, Some(bound))?;
    }
    let mut p = ctx.params();
    p.m = Some(c.msa.m);
    p.extra = json!({ "quantifier": to_value(&s.quantifier), "event": to_value(&s.event), "e_lo": s.energy_window().lo, "e_hi": s.energy_window().hi });
    let w = json!({
        "successes": est.estimate.successes,
        "geometry": to_value(&est.geometry),
        "grid_points": est.grid_points,
    });
    Ok(vec![ctx.record(p).with_estimate(&est.estimate).with_witnesses(w)])
}

fn run_molchanov(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let s = &ctx.cfg.sampling;
    let volume = ctx.volume()?;
    let u = ctx.cfg.site()?;
    let mut out = Vec::new();
    for &t in &s.t {
        let mut p = ctx.params();
        p.e = None;
        p.extra = json!({ "t": t, "mode": to_value(&s.path_mode) });
        let rec = match s.path_mode {
            PathMode::Fixed => {
                let h = ctx.sys.draw(&volume, 0)?;
                let sd = eig_sym(&h)?;
                let exact = diag_propagator(&sd, h.basis().require(&u)?, t);
                let est = molchanov_fixed(&h, &u, t, s.n_paths, ctx.sys.disorder.master_seed)?;
                let dev = (est.mean() - exact).norm();
                let w = json!({
                    "re": est.re, "im": est.im, "stderr": est.stderr,
                    "exact_re": exact.re, "exact_im": exact.im,
                    "deviation": dev,
                    "within_3_stderr": dev <= 3.0 * est.stderr,
                });
                let mut r = ctx.record(p).with_witnesses(w);
                r.n = Some(est.n);
                r
            }
            PathMode::Averaged => {
                let est = molchanov_averaged(&ctx.sys, &volume, &u, t, s.n_paths)?;
                complex_vs_envelope(ctx, p, est.mean(), est.stderr, est.n, t)?
            }
        };
        out.push(rec);
    }
    Ok(out)
}

/// Record comparing a complex estimate with the decay envelope `e^{-B|t|}`;
/// the bound is violated when `|k| - 3 stderr` exceeds it.
fn complex_vs_envelope(ctx: &Ctx, p: Parameters, k: Complex64, stderr: f64, n: u64, t: f64) -> Result<ResultRecord> {
    let (env, env_alt) = decay_envelopes(&ctx.sys, t)?;
    let status = if k.norm() - 3.0 * stderr > env { Status::BoundViolated } else { Status::Ok };
    let w = json!({
        "re": k.re, "im": k.im, "abs": k.norm(), "stderr": stderr,
        "envelope": env, "envelope_alt": env_alt,
    });
    let mut r = ctx.record(p).with_witnesses(w).with_status(status);
    r.n = Some(n);
    r.bound_value = Some(env);
    Ok(r)
}

fn run_khat(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let s = &ctx.cfg.sampling;
    let volume = ctx.volume()?;
    let u = ctx.cfg.site()?;
    s.t.iter()
        .map(|&t| {
            let est = khat_direct(&ctx.sys, &volume, t, s.n, &u)?;
            let mut p = ctx.params();
            p.e = None;
            p.extra = json!({ "t": t });
            complex_vs_envelope(ctx, p, est.mean(), est.stderr, est.n, t)
        })
        .collect()
}

fn run_mass(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let s = &ctx.cfg.sampling;
    let volume = ctx.volume()?;
    let fits = crate::estimators::per_replicate(s.n, |rep| {
        let sd = eig_sym(&ctx.sys.draw(&volume, rep)?)?;
        let j = select_eigenvector(&sd, s.energy);
        let center = localization_center(&sd, j);
        estimate_mass(&sd, j, &center, s.fit[0], s.fit[1])
    })?;
    let m_hats: Vec<f64> = fits.iter().map(|f| f.m_hat).collect();
    let r2s: Vec<f64> = fits.iter().map(|f| f.r2).collect();
    let (mean, stderr) = mean_stderr(&m_hats);
    let mut p = ctx.params();
    p.extra = json!({ "r_min": s.fit[0], "r_max": s.fit[1] });
    let w = json!({
        "median_m_hat": median(&m_hats),
        "median_r2": median(&r2s),
        "mean_m_hat": mean,
        "stderr_m_hat": stderr,
        "m_hat": m_hats,
        "r2": r2s,
        "floored": fits.iter().filter(|f| f.floored).count(),
    });
    let mut r = ctx.record(p).with_witnesses(w);
    r.n = Some(s.n);
    Ok(vec![r])
}

/// Energy of implication replicate `rep`, uniform on the configured window.
fn implication_energy(key: u64, rep: u64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        stream_rng(key, rep).random_range(lo..hi)
    } else {
        lo
    }
}

fn run_implication(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let c = ctx.cfg;
    let s = &c.sampling;
    let volume = ctx.volume()?;
    let target = match volume {
        Volume::Segment { window } => ImplicationTarget::Segment { window },
        Volume::Square { square } => ImplicationTarget::OffDiagonalSquare { square },
        Volume::Product { .. } => return Err(MsaError::Config("implication needs a segment or a square".into())),
    };
    let params = c.msa.params();
    let win = s.energy_window();
    let key = derive_seed(ctx.sys.disorder.master_seed, "implication-energy", 0);
    let outcomes = crate::estimators::per_replicate(s.n, |rep| {
        let v = ctx.sys.sample(&volume, rep);
        let e = implication_energy(key, rep, win.lo, win.hi);
        check_implication_nr_nt_ns(&ctx.sys, &target, &v, e, c.msa.m, &params)
    })?;
    let cases: Vec<Value> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.hypotheses_hold)
        .map(|(i, o)| json!({ "replicate": i, "outcome": to_value(o) }))
        .collect();
    let counterexamples: Vec<u64> =
        outcomes.iter().enumerate().filter(|(_, o)| !o.holds).map(|(i, _)| i as u64).collect();
    let est = ProbEstimate::from_counts(counterexamples.len() as u64, s.n, None)?;
    let status = if counterexamples.is_empty() { Status::Ok } else { Status::BoundViolated };
    let mut p = ctx.params();
    p.m = Some(c.msa.m);
    p.e = None;
    p.extra = json!({ "e_lo": win.lo, "e_hi": win.hi, "m_prime": outcomes[0].m_prime });
    let w = json!({
        "hypotheses_held": cases.len(),
        "counterexamples": counterexamples,
        "cases": cases,
    });
    Ok(vec![ctx.record(p).with_estimate(&est).with_witnesses(w).with_status(status)])
}

fn run_count(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let c = ctx.cfg;
    let s = &c.sampling;
    let big = ctx.square()?;
    let volume = Volume::Square { square: big };
    let outcomes = crate::estimators::per_replicate(s.n, |rep| {
        let v = ctx.sys.sample(&volume, rep);
        count_singular_subsquares(&ctx.sys, &big, &v, s.energy, c.msa.m, c.msa.l_small, c.msa.count_mode, c.msa.distant_rule)
    })?;
    let counts: Vec<usize> = outcomes.iter().map(|o| o.count).collect();
    let at_least_two = counts.iter().filter(|k| **k >= 2).count() as u64;
    let est = ProbEstimate::from_counts(at_least_two, s.n, None)?;
    let mut p = ctx.params();
    p.m = Some(c.msa.m);
    p.l2 = u64::try_from(c.msa.l_small).ok();
    p.extra = json!({ "mode": to_value(&c.msa.count_mode), "rule": to_value(&c.msa.distant_rule) });
    let w = json!({
        "counts": counts,
        "max": counts.iter().max(),
        "all_exact": outcomes.iter().all(|o| o.exact),
        "first": to_value(&outcomes[0]),
    });
    Ok(vec![ctx.record(p).with_estimate(&est).with_witnesses(w)])
}

fn run_direct_sum(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let c = ctx.cfg;
    let s = &c.sampling;
    let (a, b) = (ctx.square()?, ctx.second_square()?);
    let (_, l) = center_of(&Volume::Square { square: a })?;
    let l_target = c.msa.l_target.unwrap_or(l);
    let est = direct_sum_event_mc(
        &ctx.sys,
        &a,
        &b,
        s.energy_window(),
        c.msa.m,
        c.msa.m_tunnel,
        c.msa.l_small,
        l_target,
        &c.msa.params(),
        s.n,
    )?;
    let events = [
        ("both_singular", &est.both_singular),
        ("both_resonant", &est.both_resonant),
        ("tunneling_segment", &est.tunneling_segment),
        ("singular_without_cause", &est.singular_without_cause),
    ];
    Ok(events
        .iter()
        .map(|(name, e)| {
            let mut p = ctx.params();
            p.m = Some(c.msa.m);
            p.extra = json!({ "event": name, "m_tunnel": c.msa.m_tunnel, "l_segment": c.msa.l_small });
            let w = json!({ "successes": e.successes, "target": est.target, "geometry": to_value(&est.geometry) });
            ctx.record(p).with_estimate(e).with_witnesses(w)
        })
        .collect())
}

fn run_measure(ctx: &Ctx) -> Result<Vec<ResultRecord>> {
    let s = &ctx.cfg.sampling;
    let (lo, hi, bins) = s.bins.unwrap_or((-10.0, 10.0, 40));
    if bins == 0 || lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(MsaError::Config(format!("bins ({lo}, {hi}, {bins})")));
    }
    let grid: Vec<f64> = (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect();
    let est = spectral_measure(&ctx.sys, &ctx.volume()?, &grid, s.n, &ctx.cfg.site()?)?;
    let mut p = ctx.params();
    p.e = None;
    let mut r = ctx.record(p).with_witnesses(to_value(&est));
    r.n = Some(s.n);
    Ok(vec![r])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> ExperimentConfig {
        let base = r#"
seed = 11

[disorder]
law = "cauchy"
scale = 1.0
g = 5.0
"#;
        ExperimentConfig::from_toml(&format!("{extra}\n{base}")).unwrap()
    }

    fn square(experiment: &str, tail: &str) -> ExperimentConfig {
        let mut c = cfg(&format!("experiment = \"{experiment}\""));
        let more: ExperimentConfig = ExperimentConfig::from_toml(&format!(
            "experiment = \"{experiment}\"\nseed = 11\n[disorder]\nlaw = \"cauchy\"\nscale = 1.0\ng = 5.0\n\
             [geometry]\nkind = \"square\"\ncenter = [20, 4]\nradius = 2\n{tail}"
        ))
        .unwrap();
        c.geometry = more.geometry;
        c.sampling = more.sampling;
        c.msa = more.msa;
        c
    }

    #[test]
    fn unknown_experiment_is_an_error() {
        let c = cfg("experiment = \"nope\"");
        assert_eq!(run_experiment(&c), Err(MsaError::UnknownExperiment("nope".into())));
    }

    #[test]
    fn experiment_table_matches_dispatch() {
        for (name, _) in EXPERIMENTS {
            let mut c = square(name, "center2 = [40, 4]\nfrozen = [[38, 42]]\n[sampling]\nn = 4\nn_outer = 2\nn_inner = 4\nn_paths = 50\nbins = [-20.0, 20.0, 4]\n");
            if name == "tunneling" {
                c.geometry.kind = super::super::config::VolumeKind::Segment;
                c.geometry.center = vec![0];
            }
            if name == "count" {
                c.geometry.radius = 4;
            }
            let out = run_experiment(&c);
            assert!(out.is_ok(), "{name}: {out:?}");
        }
    }

    #[test]
    fn schedule_record_reports_first_scales() {
        let c = cfg("experiment = \"schedule\"");
        let r = &run_experiment(&c).unwrap()[0];
        assert_eq!(r.witnesses["L1"], json!(4096));
        assert_eq!(r.witnesses["L2"], json!(262144));
        assert_eq!(r.witnesses["m1"], json!(2.0));
    }

    #[test]
    fn wegner_record_is_fully_populated() {
        let c = square("wegner", "[sampling]\nn = 50\n");
        let recs = run_experiment(&c).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert!(r.n.is_some() && r.p_hat.is_some() && r.ci_low.is_some() && r.ci_high.is_some());
        assert!(r.bound_value.is_some());
        let again = run_experiment(&c).unwrap();
        assert_eq!(again[0].without_timestamp(), r.without_timestamp());
    }

    #[test]
    fn seed_changes_the_disorder() {
        let mut c = square("wegner", "[sampling]\nn = 200\nr = [0.5]\n");
        let a = run_experiment(&c).unwrap();
        c.seed += 1;
        let b = run_experiment(&c).unwrap();
        assert_ne!(a[0].witnesses["mean_trace"], b[0].witnesses["mean_trace"]);
    }
}
