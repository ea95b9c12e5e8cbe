//! Deterministic parallel trial engine: empirical SIR samples, end-to-end
//! BER, rate sweeps, histograms, and KS distances.
//!
//! Determinism contract: trial t (attempt a, after a degenerate rejection)
//! always draws from `trial_rng(master_seed, t, a)`, a counter-derived
//! ChaCha stream, and all reductions are either integer sums or performed
//! over the trial-indexed vector in index order. Results are therefore
//! byte-identical for any worker count.

use crate::analysis;
use crate::channel::{
    complex_standard_normal, coupling_matrix, covariance_factor, sample_finite_channel,
    sample_rich_channel, ChannelRealization, CouplingModel, CovarianceFactor, FasGeometry,
    FiniteScatteringModel, RichScatteringModel,
};
use crate::error::{Error, Result};
use crate::modem::{Constellation, Modulation};
use crate::receiver::{
    aggregate, assign_chains, cuma_weights, digital_combine, instantaneous_sir, puma_weights,
    sfama_select, shortlist_ports, PortPlan, ReceiverConfig, Scheme,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const MAX_ATTEMPTS: u64 = 64;

/// Which fading model the trials draw from.
#[derive(Debug, Clone)]
pub enum ChannelSpec {
    Rich(RichScatteringModel),
    Finite(FiniteScatteringModel),
}

impl ChannelSpec {
    pub fn geometry(&self) -> &FasGeometry {
        match self {
            ChannelSpec::Rich(m) => &m.geometry,
            ChannelSpec::Finite(m) => &m.geometry,
        }
    }

    pub fn sigma_g(&self) -> f64 {
        match self {
            ChannelSpec::Rich(m) => m.sigma_g,
            ChannelSpec::Finite(m) => m.sigma_g,
        }
    }

    pub fn is_rich(&self) -> bool {
        matches!(self, ChannelSpec::Rich(_))
    }
}

/// A complete declarative trial-run description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub channel: ChannelSpec,
    pub coupling: CouplingModel,
    pub receiver: ReceiverConfig,
    pub n_users: usize,
    /// Average per-UE SNR Γ in dB; the port noise power is σ_g²σ_s²/Γ
    /// with σ_s² = 1.
    pub snr_db: f64,
    pub modulation: Modulation,
    pub trials: usize,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_users < 1 {
            return Err(Error::domain("ExperimentSpec: n_users must be >= 1"));
        }
        if self.trials < 1 {
            return Err(Error::domain("ExperimentSpec: trials must be >= 1"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::domain("ExperimentSpec: snr_db must be finite"));
        }
        Ok(())
    }

    /// Noise power per port: σ_g²σ_s²/Γ with σ_s² = 1.
    pub fn sigma_eta_sq(&self) -> f64 {
        let gamma = 10f64.powf(self.snr_db / 10.0);
        self.channel.sigma_g().powi(2) / gamma
    }
}

// SplitMix64 finalizer, used to derive independent per-trial stream keys.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent random stream for (trial, attempt); attempt > 0 replaces a
/// rejected degenerate draw with a fresh derived stream.
pub fn trial_rng(master_seed: u64, trial: u64, attempt: u64) -> ChaCha8Rng {
    let key =
        mix64(mix64(mix64(master_seed) ^ trial) ^ attempt.wrapping_mul(0xA5A5_A5A5_A5A5_A5A5));
    ChaCha8Rng::seed_from_u64(key)
}

/// Run `trials` independent closures on the global worker pool, collecting
/// results in trial order.
pub fn run_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

/// Run `f` inside a dedicated pool of `threads` workers (0 = default pool).
pub fn with_threads<R, F>(threads: usize, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if threads == 0 {
        Ok(f())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::numeric(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

fn draw_channels<R: Rng + ?Sized>(
    channel: &ChannelSpec,
    factor: Option<&CovarianceFactor>,
    n_users: usize,
    rng: &mut R,
) -> ChannelRealization {
    let draw_one = |rng: &mut R| match channel {
        ChannelSpec::Rich(m) => sample_rich_channel(factor.expect("factor"), m.sigma_g, rng),
        ChannelSpec::Finite(m) => sample_finite_channel(m, rng),
    };
    let desired = draw_one(rng);
    let interferers = (1..n_users).map(|_| draw_one(rng)).collect();
    ChannelRealization {
        desired,
        interferers,
    }
}

/// Empirical Z samples from the analysis-regime receiver.
#[derive(Debug, Clone)]
pub struct SirRun {
    pub z_samples: Vec<f64>,
    pub rejected: usize,
    /// σ₂² used for the normalization Z = X·σ₂²/Y.
    pub sigma2_sq: f64,
}

/// Draw Z = X/(Y/σ₂²) per trial in the analysis regime: single-chain full
/// activation (ρ = 0, N_max ≥ N), rich scattering, identity coupling.
pub fn run_sir_samples(spec: &ExperimentSpec) -> Result<SirRun> {
    spec.validate()?;
    let n = spec.channel.geometry().n_ports();
    let rich = match &spec.channel {
        ChannelSpec::Rich(m) => m,
        ChannelSpec::Finite(_) => {
            return Err(Error::domain("run_sir_samples: requires rich scattering"))
        }
    };
    if spec.receiver.scheme != Scheme::Puma
        || spec.receiver.n_rf != 1
        || spec.receiver.rho != 0.0
        || spec.receiver.n_max < n
    {
        return Err(Error::domain(
            "run_sir_samples: requires puma with n_rf=1, rho=0, n_max>=N",
        ));
    }
    if !spec.coupling.is_identity() {
        return Err(Error::domain("run_sir_samples: requires identity coupling"));
    }
    if spec.n_users < 2 {
        return Err(Error::domain("run_sir_samples: need at least 2 users"));
    }

    let moments = analysis::compute_moments(rich)?;
    let factor = covariance_factor(&rich.spatial_covariance())?;

    let results: Vec<(f64, u32)> = run_trials(spec.trials, |t| {
        for attempt in 0..MAX_ATTEMPTS {
            let mut rng = trial_rng(spec.master_seed, t as u64, attempt);
            let ch = draw_channels(&spec.channel, Some(&factor), spec.n_users, &mut rng);
            match instantaneous_sir(&ch, moments.sigma2_sq) {
                Ok(s) if s.z.is_finite() => return (s.z, attempt as u32),
                _ => continue,
            }
        }
        (f64::NAN, MAX_ATTEMPTS as u32)
    });

    let mut z_samples = Vec::with_capacity(spec.trials);
    let mut rejected = 0usize;
    for (z, attempts) in results {
        if z.is_nan() {
            return Err(Error::degenerate(
                "run_sir_samples: a trial exhausted its redraw budget",
            ));
        }
        rejected += attempts as usize;
        z_samples.push(z);
    }
    Ok(SirRun {
        z_samples,
        rejected,
        sigma2_sq: moments.sigma2_sq,
    })
}

/// Monte Carlo BER estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct BerEstimate {
    pub ber: f64,
    pub stderr: f64,
    pub trials: usize,
    pub rejected: usize,
    pub bits: u64,
}

struct TrialContext<'a> {
    spec: &'a ExperimentSpec,
    factor: Option<CovarianceFactor>,
    constellation: Constellation,
    sigma_eta: f64,
    /// Γ_m for the full-activation port set (the common case under ρ = 0).
    gamma_full: DMatrix<Complex64>,
    all_ports: Vec<usize>,
}

impl<'a> TrialContext<'a> {
    fn build(spec: &'a ExperimentSpec) -> Result<Self> {
        let geometry = spec.channel.geometry();
        let n = geometry.n_ports();
        let factor = match &spec.channel {
            ChannelSpec::Rich(m) => Some(covariance_factor(&m.spatial_covariance())?),
            ChannelSpec::Finite(_) => None,
        };
        let all_ports: Vec<usize> = (0..n).collect();
        let gamma_full = coupling_matrix(&spec.coupling, geometry, &all_ports)?;
        Ok(TrialContext {
            spec,
            factor,
            constellation: Constellation::new(spec.modulation)?,
            sigma_eta: spec.sigma_eta_sq().sqrt(),
            gamma_full,
            all_ports,
        })
    }

    fn build_plan<R: Rng + ?Sized>(
        &self,
        ch: &ChannelRealization,
        rng: &mut R,
    ) -> Result<PortPlan> {
        let cfg = &self.spec.receiver;
        match cfg.scheme {
            Scheme::Puma => {
                let shortlist = shortlist_ports(&ch.desired, cfg.rho)?;
                let chains = assign_chains(&shortlist, cfg.n_rf, cfg.n_max, rng);
                Ok(puma_weights(&ch.desired, &chains))
            }
            Scheme::Cuma => cuma_weights(&ch.desired, cfg, rng),
            Scheme::Sfama => Ok(sfama_select(ch, 1.0, self.spec.sigma_eta_sq())),
        }
    }

    fn gamma_for(&self, plan: &PortPlan) -> Result<std::borrow::Cow<'_, DMatrix<Complex64>>> {
        use std::borrow::Cow;
        if self.spec.coupling.is_identity() {
            return Ok(Cow::Borrowed(&self.gamma_full));
        }
        let union = plan.activated_union();
        if union == self.all_ports {
            Ok(Cow::Borrowed(&self.gamma_full))
        } else {
            Ok(Cow::Owned(coupling_matrix(
                &self.spec.coupling,
                self.spec.channel.geometry(),
                &union,
            )?))
        }
    }

    /// One attempt: Ok(Some((bit_errors, bits))) on success, Ok(None) on a
    /// degenerate draw that must be replaced.
    fn run_attempt<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Option<(u32, u32)>> {
        let spec = self.spec;
        let n = spec.channel.geometry().n_ports();
        let ch = draw_channels(&spec.channel, self.factor.as_ref(), spec.n_users, rng);

        let plan = match self.build_plan(&ch, rng) {
            Ok(p) => p,
            Err(Error::Degenerate(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let gamma = self.gamma_for(&plan)?;

        let mut labels = Vec::with_capacity(spec.n_users);
        let mut symbols = Vec::with_capacity(spec.n_users);
        for _ in 0..spec.n_users {
            let (label, point) = self.constellation.draw(rng);
            labels.push(label);
            symbols.push(point);
        }
        let noise = DVector::from_fn(n, |_, _| {
            complex_standard_normal(rng) * Complex64::new(self.sigma_eta, 0.0)
        });

        let y = aggregate(&plan, &gamma, &ch, &symbols, &noise)?;
        let combined = match digital_combine(&plan, &gamma, &ch.desired, &y) {
            Ok(c) => c,
            Err(Error::Degenerate(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let decided = self
            .constellation
            .detect(combined.estimate / Complex64::new(combined.effective_gain, 0.0));
        let bit_errors = (decided ^ labels[0]).count_ones();
        Ok(Some((bit_errors, self.constellation.bits_per_symbol())))
    }
}

/// Full receive-chain Monte Carlo: per trial draw channels, build the port
/// plan, transmit uniform symbols for every stream, aggregate with coupling,
/// combine, detect coherently against the known effective gain, and count
/// bit errors on the desired stream.
pub fn run_ber_trials(spec: &ExperimentSpec) -> Result<BerEstimate> {
    spec.validate()?;
    let ctx = TrialContext::build(spec)?;

    let per_trial: Vec<Result<(u32, u32, u32)>> = run_trials(spec.trials, |t| {
        for attempt in 0..MAX_ATTEMPTS {
            let mut rng = trial_rng(spec.master_seed, t as u64, attempt);
            match ctx.run_attempt(&mut rng) {
                Ok(Some((errs, bits))) => return Ok((errs, bits, attempt as u32)),
                Ok(None) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::degenerate(
            "run_ber_trials: a trial exhausted its redraw budget",
        ))
    });

    // integer reductions keep the estimate identical for any worker count
    let mut err_sum = 0u64;
    let mut err_sq_sum = 0u64;
    let mut bit_sum = 0u64;
    let mut rejected = 0usize;
    let mut bits_per_trial = 0u32;
    for r in per_trial {
        let (errs, bits, attempts) = r?;
        err_sum += errs as u64;
        err_sq_sum += (errs as u64) * (errs as u64);
        bit_sum += bits as u64;
        rejected += attempts as usize;
        bits_per_trial = bits;
    }
    let n = spec.trials as f64;
    let m = bits_per_trial as f64;
    let ber = err_sum as f64 / bit_sum as f64;
    // variance of the per-trial error fraction e_t = errs_t / m
    let mean = ber;
    let var = if spec.trials > 1 {
        ((err_sq_sum as f64 / (m * m)) - n * mean * mean) / (n - 1.0)
    } else {
        0.0
    };
    Ok(BerEstimate {
        ber,
        stderr: (var.max(0.0) / n).sqrt(),
        trials: spec.trials,
        rejected,
        bits: bit_sum,
    })
}

/// One metric estimate at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep: f64,
    pub metric: String,
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Flat (sweep value, metric, estimate, standard error, trials) table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn push(&mut self, sweep: f64, metric: &str, estimate: f64, stderr: f64, trials: usize) {
        self.rows.push(ResultRow {
            sweep,
            metric: metric.to_string(),
            estimate,
            stderr,
            trials,
        });
    }

    pub fn get(&self, sweep: f64, metric: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.sweep == sweep && r.metric == metric)
    }
}

/// Propagated standard error of the BSC rate via a symmetric difference of
/// the entropy map at pe ± stderr.
pub fn rate_stderr(pe: f64, stderr_pe: f64, n_users: usize, bits: u32) -> f64 {
    if stderr_pe == 0.0 {
        return 0.0;
    }
    let lo = (pe - stderr_pe).max(0.0);
    let hi = (pe + stderr_pe).min(1.0);
    let r_lo = analysis::bsc_rate(lo, n_users, bits).unwrap_or(0.0);
    let r_hi = analysis::bsc_rate(hi, n_users, bits).unwrap_or(0.0);
    (r_lo - r_hi).abs() / 2.0
}

/// BER + BSC-rate sweep over a list of user counts. Each sweep point runs
/// `spec.trials` fresh trials with the same master seed.
pub fn rate_sweep(spec: &ExperimentSpec, sweep_users: &[usize]) -> Result<ResultTable> {
    let mut table = ResultTable::default();
    for &u in sweep_users {
        let mut point = spec.clone();
        point.n_users = u;
        let est = run_ber_trials(&point)?;
        let bits = spec.modulation.bits_per_symbol();
        let per_ue = analysis::bsc_rate(est.ber, 1, bits)?;
        let network = analysis::bsc_rate(est.ber, u, bits)?;
        let net_se = rate_stderr(est.ber, est.stderr, u, bits);
        table.push(u as f64, "ber", est.ber, est.stderr, est.trials);
        table.push(
            u as f64,
            "per_ue_rate",
            per_ue,
            rate_stderr(est.ber, est.stderr, 1, bits),
            est.trials,
        );
        table.push(u as f64, "network_rate", network, net_se, est.trials);
        table.push(u as f64, "rejected", est.rejected as f64, 0.0, est.trials);
    }
    Ok(table)
}

/// Density-normalized histogram (the plotted mass integrates to 1 over the
/// covered range; samples outside an explicit range are dropped).
#[derive(Debug, Clone)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

pub fn histogram(samples: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::domain("histogram: empty input"));
    }
    if bins < 1 {
        return Err(Error::domain("histogram: bins must be >= 1"));
    }
    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if !(hi > lo) {
                return Err(Error::domain("histogram: range must satisfy hi > lo"));
            }
            (lo, hi)
        }
        None => {
            let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        }
    };
    let edges: Vec<f64> = (0..=bins)
        .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
        .collect();
    histogram_with_edges(samples, &edges)
}

/// Histogram over arbitrary monotone edges (e.g. a log grid).
pub fn histogram_with_edges(samples: &[f64], edges: &[f64]) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::domain("histogram: empty input"));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(
            "histogram: edges must be strictly increasing",
        ));
    }
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    let mut kept = 0u64;
    for &x in samples {
        if x < edges[0] || x > edges[bins] {
            continue;
        }
        // binary search for the containing bin; right edge goes to the last bin
        let idx = match edges.binary_search_by(|e| e.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(bins - 1),
            Err(i) => i - 1,
        };
        counts[idx.min(bins - 1)] += 1;
        kept += 1;
    }
    if kept == 0 {
        return Err(Error::domain("histogram: no samples inside the range"));
    }
    let density = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 / (kept as f64 * (edges[i + 1] - edges[i])))
        .collect();
    Ok(Histogram {
        edges: edges.to_vec(),
        density,
    })
}

/// Kolmogorov–Smirnov sup-distance between the empirical CDF of `samples`
/// and a reference CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n);
        d = d.max((i + 1) as f64 / n - f);
    }
    d
}
