//! Port selection, analog weight construction, signal aggregation, and
//! digital combining for the three receive schemes.
//!
//! * PUMA — shortlist ports by channel magnitude, randomly cap each RF
//!   chain, co-phase every activated port with a unit-modulus analog weight
//!   e^{j∠g_k}, then aggregate.
//! * CUMA — rotate the channel by the conjugate phase of its strongest
//!   port and activate ports whose rotated real part (chain 1) or imaginary
//!   part (chain 2) is positive; weights are exactly 1.
//! * sFAMA — activate the single port with the best instantaneous SINR.
//!
//! Aggregation follows y = W†·Γ_m·S_K·r and detection uses the matched
//! digital combiner v = h/‖h‖ with h = W†·Γ_m·g.

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

/// Receive scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Puma,
    Cuma,
    Sfama,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Puma => "puma",
            Scheme::Cuma => "cuma",
            Scheme::Sfama => "sfama",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "puma" => Ok(Scheme::Puma),
            "cuma" => Ok(Scheme::Cuma),
            "sfama" => Ok(Scheme::Sfama),
            other => Err(Error::domain(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Scheme plus the port-activation knobs (ρ shortlist scale, per-chain cap).
#[derive(Debug, Clone, Copy)]
pub struct ReceiverConfig {
    pub scheme: Scheme,
    pub n_rf: usize,
    pub rho: f64,
    pub n_max: usize,
}

impl ReceiverConfig {
    pub fn new(scheme: Scheme, n_rf: usize, rho: f64, n_max: usize) -> Result<Self> {
        if n_rf < 1 {
            return Err(Error::domain("ReceiverConfig: n_rf must be >= 1"));
        }
        if scheme == Scheme::Sfama && n_rf != 1 {
            return Err(Error::domain(
                "ReceiverConfig: sfama supports only n_rf = 1",
            ));
        }
        if scheme == Scheme::Cuma && n_rf > 2 {
            return Err(Error::domain("ReceiverConfig: cuma supports n_rf <= 2"));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::domain(format!(
                "ReceiverConfig: rho must be in [0,1], got {rho}"
            )));
        }
        if n_max < 1 {
            return Err(Error::domain("ReceiverConfig: n_max must be >= 1"));
        }
        Ok(ReceiverConfig {
            scheme,
            n_rf,
            rho,
            n_max,
        })
    }
}

/// Activated port sets per RF chain plus the N×n_rf analog weight matrix.
/// Weights have unit modulus exactly on activated ports and are zero
/// elsewhere.
#[derive(Debug, Clone)]
pub struct PortPlan {
    pub chains: Vec<Vec<usize>>,
    pub weights: DMatrix<Complex64>,
}

impl PortPlan {
    pub fn n_rf(&self) -> usize {
        self.chains.len()
    }

    pub fn n_ports(&self) -> usize {
        self.weights.nrows()
    }

    /// Union of the per-chain activation sets, sorted.
    pub fn activated_union(&self) -> Vec<usize> {
        let mut union: Vec<usize> = self.chains.iter().flatten().copied().collect();
        union.sort_unstable();
        union.dedup();
        union
    }
}

fn unit_phase(g: Complex64) -> Complex64 {
    let r = g.norm();
    if r == 0.0 {
        // measure-zero event: the phase of 0 is defined as 0
        Complex64::new(1.0, 0.0)
    } else {
        g / r
    }
}

/// Ports whose magnitude is within a factor ρ of the strongest port:
/// { k : |g_k| ≥ ρ·max_ℓ |g_ℓ| }. Never empty (the argmax qualifies).
pub fn shortlist_ports(g_des: &DVector<Complex64>, rho: f64) -> Result<Vec<usize>> {
    if g_des.is_empty() {
        return Err(Error::domain("shortlist_ports: empty channel"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::domain(format!(
            "shortlist_ports: rho must be in [0,1], got {rho}"
        )));
    }
    let max_mag = g_des.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if max_mag == 0.0 {
        return Err(Error::degenerate("shortlist_ports: all-zero channel"));
    }
    let threshold = rho * max_mag;
    Ok((0..g_des.len())
        .filter(|&k| g_des[k].norm() >= threshold)
        .collect())
}

/// Draw each chain's activation set as an independent uniform random subset
/// of the shortlist of size min(n_max, |shortlist|), without replacement
/// within a chain. Chains may overlap.
pub fn assign_chains<R: Rng + ?Sized>(
    shortlist: &[usize],
    n_rf: usize,
    n_max: usize,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    assert!(!shortlist.is_empty(), "assign_chains: empty shortlist");
    let take = n_max.min(shortlist.len());
    (0..n_rf)
        .map(|_| {
            let mut picked: Vec<usize> = rand::seq::index::sample(rng, shortlist.len(), take)
                .into_iter()
                .map(|i| shortlist[i])
                .collect();
            picked.sort_unstable();
            picked
        })
        .collect()
}

/// Co-phasing weights: w_{i,k} = e^{j∠g_k} for k ∈ K_i, else 0, so that
/// conj(w_{i,k})·g_k = |g_k| on every activated port.
pub fn puma_weights(g_des: &DVector<Complex64>, chains: &[Vec<usize>]) -> PortPlan {
    let n = g_des.len();
    let mut weights = DMatrix::<Complex64>::zeros(n, chains.len());
    for (i, chain) in chains.iter().enumerate() {
        for &k in chain {
            weights[(k, i)] = unit_phase(g_des[k]);
        }
    }
    PortPlan {
        chains: chains.to_vec(),
        weights,
    }
}

/// CUMA activation: rotate the channel by the conjugate phase of its
/// strongest port; chain 1 takes shortlisted ports with positive rotated
/// real part, chain 2 (when n_rf = 2) those with positive rotated imaginary
/// part. Weights are exactly 1 (no phase shifting); the per-chain cap is
/// enforced by uniform random subsampling.
pub fn cuma_weights<R: Rng + ?Sized>(
    g_des: &DVector<Complex64>,
    config: &ReceiverConfig,
    rng: &mut R,
) -> Result<PortPlan> {
    if config.scheme != Scheme::Cuma {
        return Err(Error::domain("cuma_weights: config.scheme must be cuma"));
    }
    let shortlist = shortlist_ports(g_des, config.rho)?;
    let k_star = strongest_port(g_des);
    let rot = unit_phase(g_des[k_star]).conj();

    let mut chains = Vec::with_capacity(config.n_rf);
    for i in 0..config.n_rf {
        let mut chain: Vec<usize> = shortlist
            .iter()
            .copied()
            .filter(|&k| {
                let r = g_des[k] * rot;
                if i == 0 {
                    r.re > 0.0
                } else {
                    r.im > 0.0
                }
            })
            .collect();
        if chain.len() > config.n_max {
            chain = rand::seq::index::sample(rng, chain.len(), config.n_max)
                .into_iter()
                .map(|j| chain[j])
                .collect();
            chain.sort_unstable();
        }
        chains.push(chain);
    }

    let n = g_des.len();
    let mut weights = DMatrix::<Complex64>::zeros(n, config.n_rf);
    for (i, chain) in chains.iter().enumerate() {
        for &k in chain {
            weights[(k, i)] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(PortPlan { chains, weights })
}

fn strongest_port(g: &DVector<Complex64>) -> usize {
    let mut best = 0usize;
    let mut best_mag = -1.0f64;
    for (k, c) in g.iter().enumerate() {
        let m = c.norm();
        if m > best_mag {
            best_mag = m;
            best = k;
        }
    }
    best
}

/// sFAMA: activate the single port maximizing the per-port SINR
/// σ_s²|g_k|² / (σ_s²·Σ_ũ |g'_k|² + σ_η²). Ties break to the lowest index.
pub fn sfama_select(channels: &ChannelRealization, sigma_s2: f64, sigma_eta2: f64) -> PortPlan {
    let n = channels.n_ports();
    let mut best = 0usize;
    let mut best_sinr = -1.0f64;
    for k in 0..n {
        let signal = sigma_s2 * channels.desired[k].norm_sqr();
        let interf: f64 = channels
            .interferers
            .iter()
            .map(|g| g[k].norm_sqr())
            .sum::<f64>()
            * sigma_s2;
        let sinr = signal / (interf + sigma_eta2);
        if sinr > best_sinr {
            best_sinr = sinr;
            best = k;
        }
    }
    let mut weights = DMatrix::<Complex64>::zeros(n, 1);
    weights[(best, 0)] = Complex64::new(1.0, 0.0);
    PortPlan {
        chains: vec![vec![best]],
        weights,
    }
}

/// Analog front end: y = W†·Γ_m·S_K·r with r = Σ_ũ g^{(ũ)}·s_ũ + η.
/// `symbols[0]` is the desired stream's symbol, `symbols[1..]` the
/// interferers', matching `channels.interferers` order.
pub fn aggregate(
    plan: &PortPlan,
    gamma_m: &DMatrix<Complex64>,
    channels: &ChannelRealization,
    symbols: &[Complex64],
    noise: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    let n = channels.n_ports();
    if symbols.len() != channels.n_users() {
        return Err(Error::domain(format!(
            "aggregate: {} symbols for {} streams",
            symbols.len(),
            channels.n_users()
        )));
    }
    if noise.len() != n || plan.n_ports() != n || gamma_m.nrows() != n || gamma_m.ncols() != n {
        return Err(Error::domain("aggregate: dimension mismatch"));
    }

    let mut r = noise.clone();
    r.axpy(symbols[0], &channels.desired, Complex64::new(1.0, 0.0));
    for (g, &s) in channels.interferers.iter().zip(&symbols[1..]) {
        r.axpy(s, g, Complex64::new(1.0, 0.0));
    }

    // S_K: zero the deactivated ports before the coupling matrix
    let union = plan.activated_union();
    let mut selected = DVector::<Complex64>::zeros(n);
    for k in union {
        selected[k] = r[k];
    }
    let coupled = gamma_m * selected;
    Ok(plan.weights.adjoint() * coupled)
}

/// Output of the digital combining stage.
#[derive(Debug, Clone)]
pub struct CombineOutput {
    /// ‖h‖ with h = W†·Γ_m·g_des: the real nonnegative gain multiplying the
    /// desired symbol in the combined estimate.
    pub effective_gain: f64,
    /// Unit-norm digital combiner v = h/‖h‖.
    pub v: DVector<Complex64>,
    /// Combined scalar estimate v†y.
    pub estimate: Complex64,
}

/// Matched digital combiner over the effective channel h = W†·Γ_m·g_des.
pub fn digital_combine(
    plan: &PortPlan,
    gamma_m: &DMatrix<Complex64>,
    g_des: &DVector<Complex64>,
    y: &DVector<Complex64>,
) -> Result<CombineOutput> {
    if y.len() != plan.n_rf() {
        return Err(Error::domain("digital_combine: y length != n_rf"));
    }
    let h = plan.weights.adjoint() * (gamma_m * g_des);
    let norm = h.norm();
    if norm == 0.0 {
        return Err(Error::degenerate("digital_combine: zero effective channel"));
    }
    let v = h / Complex64::new(norm, 0.0);
    let estimate = v.dotc(y);
    Ok(CombineOutput {
        effective_gain: norm,
        v,
        estimate,
    })
}

/// Per-realization link budget after digital combining.
#[derive(Debug, Clone)]
pub struct LinkSample {
    /// v†·W†·Γ_m·g_des = ‖h‖ as a complex scalar (real nonnegative).
    pub effective_gain: Complex64,
    /// σ_s²·Σ_ũ |v†W†Γ_m g̃_ũ|².
    pub interference_power: f64,
    /// σ_η²·‖Γ_m†·W·v‖².
    pub noise_power: f64,
    /// |effective_gain|²σ_s² / (interference + noise power).
    pub sinr: f64,
}

/// Evaluate the deterministic link budget of one realization under a given
/// port plan: combined gain, post-combiner interference and noise powers,
/// and their SINR.
pub fn link_sample(
    plan: &PortPlan,
    gamma_m: &DMatrix<Complex64>,
    channels: &ChannelRealization,
    sigma_s2: f64,
    sigma_eta2: f64,
) -> Result<LinkSample> {
    let h = plan.weights.adjoint() * (gamma_m * &channels.desired);
    let norm = h.norm();
    if norm == 0.0 {
        return Err(Error::degenerate("link_sample: zero effective channel"));
    }
    let v = &h / Complex64::new(norm, 0.0);
    let mut interference_power = 0.0f64;
    for g in &channels.interferers {
        let c = v.dotc(&(plan.weights.adjoint() * (gamma_m * g)));
        interference_power += sigma_s2 * c.norm_sqr();
    }
    // noise reaches the combiner through Γ_m† W v
    let front = gamma_m.adjoint() * (&plan.weights * &v);
    let noise_power = sigma_eta2 * front.norm_squared();
    let denom = interference_power + noise_power;
    let sinr = if denom > 0.0 {
        norm * norm * sigma_s2 / denom
    } else {
        f64::INFINITY
    };
    Ok(LinkSample {
        effective_gain: Complex64::new(norm, 0.0),
        interference_power,
        noise_power,
        sinr,
    })
}

/// The SIR decomposition of the full-activation single-chain receiver.
#[derive(Debug, Clone, Copy)]
pub struct SirSample {
    /// X = (Σ_k |g_k|)²: squared co-phased desired amplitude.
    pub x: f64,
    /// Y = Σ_ũ |S_ũ|²: aggregate interference power.
    pub y: f64,
    /// Z = X·σ₂²/Y: the normalized SIR variable (SIR = Z/σ₂²).
    pub z: f64,
}

impl SirSample {
    pub fn sir(&self) -> f64 {
        self.x / self.y
    }
}

/// Evaluate X, Y and Z = X/(Y/σ₂²) for one realization in the analysis
/// regime (single chain, all ports activated, no coupling). σ₂² is the
/// interference variance from the moment analysis.
pub fn instantaneous_sir(channels: &ChannelRealization, sigma2_sq: f64) -> Result<SirSample> {
    let n = channels.n_ports();
    let mut sqrt_x = 0.0f64;
    let mut phases = Vec::with_capacity(n);
    for k in 0..n {
        let g = channels.desired[k];
        sqrt_x += g.norm();
        phases.push(unit_phase(g).conj());
    }
    let x = sqrt_x * sqrt_x;

    let mut y = 0.0f64;
    for g_int in &channels.interferers {
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..n {
            s += g_int[k] * phases[k];
        }
        y += s.norm_sqr();
    }
    if y == 0.0 && !channels.interferers.is_empty() {
        return Err(Error::degenerate(
            "instantaneous_sir: zero interference power",
        ));
    }
    Ok(SirSample {
        x,
        y,
        z: x * sigma2_sq / y,
    })
}
