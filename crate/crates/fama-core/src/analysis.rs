//! Closed-form SIR statistics and rate formulas for the single-chain,
//! all-ports receiver under rich scattering, plus the quadrature oracles
//! that cross-check them.
//!
//! The desired amplitude √X = Σ|g_k| is asymptotically Gaussian with mean
//! μ₁ = N√π·σ_g/2 and a variance built from pairwise Rayleigh-envelope
//! covariances (a ₂F₁(−½,−½;1;ρ²) law). Each co-phased interferer sum S_ũ
//! is asymptotically complex Gaussian with variance σ₂² built from the
//! phase-exponential covariance (a ρ²·₂F₁(½,½;2;ρ²) law). The normalized
//! SIR Z = X/(Y/σ₂²) then has a closed-form PDF combining a Whittaker M
//! function with a Gamma interference mixture; `pdf_z_oracle` evaluates the
//! same density by direct numerical mixing of f_X against the Gamma weight,
//! independently of the Whittaker path.
//!
//! σ₂² note: the covariance derivation produces a ρ² factor inside the
//! pairwise sum. `sigma2_sq` carries that form; `sigma2_sq_printed` carries
//! the variant without the ρ² factor for side-by-side comparison (the two
//! coincide only for uncorrelated grids). Monte Carlo arbitrates in the
//! tests: the corrected form matches sampling, the printed one does not.

use crate::channel::RichScatteringModel;
use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{
    gauss_2f1, ln_bessel_i_neg_half_raw, ln_gamma_raw, ln_kummer_1f1, q_function,
};
use std::f64::consts::PI;

/// Analytic moment triple (μ₁, σ₁², σ₂²) that parameterizes every
/// closed-form density below.
#[derive(Debug, Clone, Copy)]
pub struct SirMoments {
    /// E[√X] = N√π·σ_g/2.
    pub mu1: f64,
    /// var[√X].
    pub sigma1_sq: f64,
    /// var[S_ũ], derivation-consistent form (pairwise terms carry ρ²).
    pub sigma2_sq: f64,
    /// var[S_ũ] with the ρ² factor dropped from the pairwise sum; kept for
    /// comparison, not used by the densities.
    pub sigma2_sq_printed: f64,
    pub n_ports: usize,
    pub sigma_g: f64,
}

/// Closed-form moments of √X and S_ũ for a rich-scattering port grid.
pub fn compute_moments(model: &RichScatteringModel) -> Result<SirMoments> {
    let sigma = model.spatial_covariance();
    let n = sigma.nrows();
    let sg2 = model.sigma_g * model.sigma_g;

    let mu1 = n as f64 * PI.sqrt() / 2.0 * model.sigma_g;
    let mut s1_pairs = 0.0f64;
    let mut s2_pairs = 0.0f64;
    let mut s2_pairs_printed = 0.0f64;
    for l in 1..n {
        for k in 0..l {
            let rho2 = sigma[(k, l)] * sigma[(k, l)];
            s1_pairs += gauss_2f1(-0.5, -0.5, 1.0, rho2)? - 1.0;
            let f = gauss_2f1(0.5, 0.5, 2.0, rho2)?;
            s2_pairs += rho2 * f;
            s2_pairs_printed += f;
        }
    }
    let sigma1_sq = n as f64 * (1.0 - PI / 4.0) * sg2 + PI * sg2 / 2.0 * s1_pairs;
    let sigma2_sq = n as f64 * sg2 + PI * sg2 / 2.0 * s2_pairs;
    let sigma2_sq_printed = n as f64 * sg2 + PI * sg2 / 2.0 * s2_pairs_printed;
    Ok(SirMoments {
        mu1,
        sigma1_sq,
        sigma2_sq,
        sigma2_sq_printed,
        n_ports: n,
        sigma_g: model.sigma_g,
    })
}

/// ln f_X(x) for x > 0: the folded-square density of √X ~ N(μ₁, σ₁²),
/// (2σ₁²)⁻¹ x^{-1/4} μ₁^{1/2} e^{-(x+μ₁²)/(2σ₁²)} I_{-1/2}(μ₁√x/σ₁²).
pub fn ln_pdf_x(x: f64, m: &SirMoments) -> f64 {
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    if x == 0.0 {
        // integrable x^{-1/2} boundary singularity
        return f64::INFINITY;
    }
    let s2 = m.sigma1_sq;
    let u = m.mu1 * x.sqrt() / s2;
    -(2.0 * s2).ln() - 0.25 * x.ln() + 0.5 * m.mu1.ln() - (x + m.mu1 * m.mu1) / (2.0 * s2)
        + ln_bessel_i_neg_half_raw(u)
}

/// Density of X = (Σ|g_k|)². Diverges integrably at x → 0.
pub fn pdf_x(x: f64, m: &SirMoments) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    ln_pdf_x(x, m).exp()
}

/// Density of the normalized interference Ỹ = Y/σ₂² ~ Gamma(U−1, 1):
/// y^{U−2} e^{−y} / Γ(U−1).
pub fn pdf_y_tilde(y: f64, n_users: usize) -> Result<f64> {
    if n_users < 2 {
        return Err(Error::domain(format!(
            "pdf_y_tilde: need at least 2 users, got {n_users}"
        )));
    }
    if y < 0.0 {
        return Ok(0.0);
    }
    let u = n_users as f64;
    if y == 0.0 {
        return Ok(if n_users == 2 { 1.0 } else { 0.0 });
    }
    Ok(((u - 2.0) * y.ln() - y - ln_gamma_raw(u - 1.0)).exp())
}

/// ln f_Z(z) for z > 0, evaluated fully in log space. Stable for U up to a
/// few hundred and z spanning many decades.
pub fn ln_pdf_z(z: f64, m: &SirMoments, n_users: usize) -> Result<f64> {
    if n_users < 2 {
        return Err(Error::domain(format!(
            "pdf_z: need at least 2 users, got {n_users}"
        )));
    }
    if z < 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if z == 0.0 {
        return Ok(f64::INFINITY);
    }
    let u = n_users as f64;
    let s2 = m.sigma1_sq;
    let mu2 = m.mu1 * m.mu1;
    // Whittaker argument t = μ₁²z / (2σ₁²(2σ₁² + z)), bounded by μ₁²/(2σ₁²)
    let t = mu2 * z / (2.0 * s2 * (2.0 * s2 + z));
    // prefactor Γ(U-1/2) / (Γ(U-1)Γ(1/2)) via ln-Gamma differences
    let ln_pre = ln_gamma_raw(u - 0.5) - ln_gamma_raw(u - 1.0) - ln_gamma_raw(0.5);
    let ln_exp = -mu2 * (4.0 * s2 + z) / (4.0 * s2 * (2.0 * s2 + z));
    let ln_pow = (-u + 0.75) * (z / (2.0 * s2)).ln_1p();
    // ln M_{-U+3/4,-1/4}(t) = -t/2 + (1/4)ln t + ln 1F1(U-1/2; 1/2; t)
    let ln_whit = -t / 2.0 + 0.25 * t.ln() + ln_kummer_1f1(u - 0.5, 0.5, t)?;
    Ok(ln_pre - 0.75 * z.ln() - 0.5 * m.mu1.ln() + ln_exp + ln_pow + ln_whit)
}

/// Closed-form density of the normalized SIR Z = X/Ỹ.
pub fn pdf_z(z: f64, m: &SirMoments, n_users: usize) -> Result<f64> {
    Ok(ln_pdf_z(z, m, n_users)?.exp())
}

/// The same density by direct numerical mixing,
/// f_Z(z) = ∫₀^∞ ỹ·f_X(zỹ)·f_Ỹ(ỹ) dỹ, independent of the Whittaker path.
pub fn pdf_z_oracle(z: f64, m: &SirMoments, n_users: usize) -> Result<f64> {
    if n_users < 2 {
        return Err(Error::domain(format!(
            "pdf_z_oracle: need at least 2 users, got {n_users}"
        )));
    }
    if z < 0.0 {
        return Ok(0.0);
    }
    if z == 0.0 {
        return Ok(f64::INFINITY);
    }
    let u = n_users as f64;
    let ln_gamma_u1 = ln_gamma_raw(u - 1.0);
    let ln_h = |y: f64| -> f64 {
        if y <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (u - 1.0) * y.ln() - y - ln_gamma_u1 + ln_pdf_x(z * y, m)
    };

    // locate the integrand peak on a log grid, then follow the tail out
    let mut y_peak = 1.0;
    let mut ln_peak = f64::NEG_INFINITY;
    let y0 = 1e-6f64;
    let y1 = 4.0 * u + 100.0;
    let scan = 160;
    for i in 0..=scan {
        let y = y0 * (y1 / y0).powf(i as f64 / scan as f64);
        let v = ln_h(y);
        if v > ln_peak {
            ln_peak = v;
            y_peak = y;
        }
    }
    if !ln_peak.is_finite() {
        return Ok(0.0);
    }
    // walk the -60-nat decay points out from the peak so the adaptive rule
    // never faces a bump far narrower than its panel
    let mut y_lo = y_peak;
    while y_lo > 1e-280 && ln_h(y_lo) > ln_peak - 60.0 {
        y_lo *= 0.7;
    }
    let mut y_hi = y_peak;
    while ln_h(y_hi) > ln_peak - 60.0 {
        y_hi *= 1.3;
        if y_hi > 1e12 {
            return Err(Error::accuracy("pdf_z_oracle: tail cut not found", 0));
        }
    }
    let f = |y: f64| (ln_h(y) - ln_peak).exp();
    let head = quad::integrate(&f, 0.0, y_lo, 1e-13, 5e-10)?;
    let left = quad::integrate(&f, y_lo, y_peak, 1e-13, 5e-10)?;
    let right = quad::integrate(&f, y_peak, y_hi, 1e-13, 5e-10)?;
    Ok((head.value + left.value + right.value) * ln_peak.exp())
}

/// Characteristic scale of Z, used to seed integration cutoffs.
fn z_scale(m: &SirMoments, n_users: usize) -> f64 {
    (m.mu1 * m.mu1 + m.sigma1_sq) / (n_users as f64 - 1.0).max(1.0)
}

/// ∫₀^∞ w(z)·f_Z(z) dz by segment doubling with a z^{-U} tail bound. The
/// weight must be nonnegative and at most polylogarithmic at infinity.
fn integrate_weighted_pdf_z<W: Fn(f64) -> f64>(
    m: &SirMoments,
    n_users: usize,
    w: W,
    rel_tol: f64,
) -> Result<f64> {
    let u = n_users as f64;
    let scale = z_scale(m, n_users).max(1e-12);
    // z = t² substitution flattens the z^{-1/2} edge at the origin
    let head = quad::integrate_sqrt_origin(
        |z| w(z) * ln_pdf_z(z, m, n_users).map(f64::exp).unwrap_or(0.0),
        scale,
        1e-300,
        rel_tol,
    )?;
    let mut total = head.value;
    let mut lo = scale;
    for _ in 0..80 {
        let hi = lo * 2.0;
        let seg = quad::integrate(
            |z| w(z) * ln_pdf_z(z, m, n_users).map(f64::exp).unwrap_or(0.0),
            lo,
            hi,
            1e-300,
            rel_tol,
        )?;
        total += seg.value;
        // f_Z ~ z^{-U}: remaining tail ≈ f(hi)·w(hi)·hi/(U-1)
        let tail = ln_pdf_z(hi, m, n_users)?.exp() * w(hi).max(1e-300) * hi / (u - 1.0).max(0.5);
        if seg.value.abs() <= rel_tol * total.abs() && tail <= rel_tol * total.abs() {
            return Ok(total);
        }
        lo = hi;
    }
    Err(Error::accuracy(
        "integrate_weighted_pdf_z: tail did not close",
        80,
    ))
}

/// CDF of Z at q, by the same substitution/segment scheme.
pub fn cdf_z(q: f64, m: &SirMoments, n_users: usize) -> Result<f64> {
    if q <= 0.0 {
        return Ok(0.0);
    }
    let scale = z_scale(m, n_users).max(1e-12);
    let first = q.min(scale);
    let head = quad::integrate_sqrt_origin(
        |z| ln_pdf_z(z, m, n_users).map(f64::exp).unwrap_or(0.0),
        first,
        1e-300,
        1e-10,
    )?;
    let mut total = head.value;
    let mut lo = first;
    while lo < q {
        let hi = (lo * 2.0).min(q);
        let seg = quad::integrate(
            |z| ln_pdf_z(z, m, n_users).map(f64::exp).unwrap_or(0.0),
            lo,
            hi,
            1e-300,
            1e-10,
        )?;
        total += seg.value;
        lo = hi;
    }
    Ok(total.min(1.0))
}

/// Supported modulations for the average-BER integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BerModulation {
    Bpsk,
    /// Square M-QAM, M ∈ {4, 16, 64}.
    Mqam(u32),
}

impl BerModulation {
    pub fn bits_per_symbol(&self) -> u32 {
        match self {
            BerModulation::Bpsk => 1,
            BerModulation::Mqam(m) => m.ilog2(),
        }
    }
}

/// Average bit error rate: the instantaneous Q-function error rate averaged
/// over the SIR density. BPSK uses Q(√(2z/σ₂²)); M-QAM uses
/// (4/m)(1−1/√M)·Q(√(3z/((M−1)σ₂²))).
pub fn avg_ber(modulation: BerModulation, m: &SirMoments, n_users: usize) -> Result<f64> {
    if n_users < 2 {
        return Err(Error::domain("avg_ber: need at least 2 users"));
    }
    let s22 = m.sigma2_sq;
    let (prefactor, arg_scale) = match modulation {
        BerModulation::Bpsk => (1.0, 2.0 / s22),
        BerModulation::Mqam(order) => {
            if !matches!(order, 4 | 16 | 64) {
                return Err(Error::domain(format!(
                    "avg_ber: M-QAM order must be 4, 16 or 64, got {order}"
                )));
            }
            let mf = order as f64;
            let bits = modulation.bits_per_symbol() as f64;
            (
                4.0 / bits * (1.0 - 1.0 / mf.sqrt()),
                3.0 / ((mf - 1.0) * s22),
            )
        }
    };
    let integral = integrate_weighted_pdf_z(
        m,
        n_users,
        |z| q_function((arg_scale * z).sqrt()).unwrap_or(0.0),
        1e-9,
    )?;
    Ok(prefactor * integral)
}

/// Binary-symmetric-channel network rate U·m·(1 − H₂(p_e)) in
/// bits/channel-use, with 0·log₂0 = 0. `bits_per_symbol` = 1 recovers the
/// plain per-symbol form.
pub fn bsc_rate(pe: f64, n_users: usize, bits_per_symbol: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&pe) {
        return Err(Error::domain(format!(
            "bsc_rate: pe must be in [0,1], got {pe}"
        )));
    }
    let xlog = |p: f64| if p == 0.0 { 0.0 } else { p * p.log2() };
    Ok(n_users as f64 * bits_per_symbol as f64 * (1.0 + xlog(pe) + xlog(1.0 - pe)))
}

/// Ergodic rate U·E[log₂(1 + Z/σ₂²)] over the closed-form SIR density.
pub fn ergodic_rate(m: &SirMoments, n_users: usize) -> Result<f64> {
    if n_users < 2 {
        return Err(Error::domain("ergodic_rate: need at least 2 users"));
    }
    let s22 = m.sigma2_sq;
    let integral = integrate_weighted_pdf_z(m, n_users, |z| (z / s22).ln_1p() / 2f64.ln(), 1e-6)?;
    Ok(n_users as f64 * integral)
}

/// ε-outage rate U·log₂(1 + γ_th) where P(Z ≤ σ₂²γ_th) = ε, solved by
/// incremental bisection on the quadrature CDF to 1e−8 in CDF value.
pub fn outage_rate(m: &SirMoments, n_users: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!(
            "outage_rate: epsilon must be in (0,1), got {epsilon}"
        )));
    }
    if n_users < 2 {
        return Err(Error::domain("outage_rate: need at least 2 users"));
    }
    let density = |z: f64| ln_pdf_z(z, m, n_users).map(f64::exp).unwrap_or(0.0);
    // bracket the quantile
    let mut hi = z_scale(m, n_users).max(1e-9);
    let mut f_hi = cdf_z(hi, m, n_users)?;
    let mut guard = 0;
    while f_hi < epsilon {
        hi *= 2.0;
        f_hi = cdf_z(hi, m, n_users)?;
        guard += 1;
        if guard > 200 {
            return Err(Error::accuracy(
                "outage_rate: quantile bracket not found",
                guard,
            ));
        }
    }
    let mut lo = 0.0f64;
    let mut f_lo = 0.0f64;
    // bisection on the CDF value; each step integrates only the half panel
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let seg = if lo == 0.0 {
            quad::integrate_sqrt_origin(&density, mid, 1e-300, 1e-10)?.value
        } else {
            quad::integrate(&density, lo, mid, 1e-300, 1e-10)?.value
        };
        let f_mid = f_lo + seg;
        if (f_mid - epsilon).abs() < 1e-8 {
            let gamma_th = mid / m.sigma2_sq;
            return Ok(n_users as f64 * (1.0 + gamma_th).log2());
        }
        if f_mid < epsilon {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::accuracy(
        "outage_rate: bisection did not converge",
        200,
    ))
}

/// Bundle of the closed-form rate figures at one operating point.
#[derive(Debug, Clone, Copy)]
pub struct RateReport {
    pub per_ue_ber: f64,
    /// Network BSC rate U·m·(1 − H₂(p_e)), bits/channel-use.
    pub bsc_rate: f64,
    pub ergodic_rate: f64,
    pub outage_rate: f64,
    pub epsilon: f64,
}

/// Evaluate BER, BSC, ergodic and ε-outage rates from the moment triple.
pub fn rate_report(
    modulation: BerModulation,
    m: &SirMoments,
    n_users: usize,
    epsilon: f64,
) -> Result<RateReport> {
    let per_ue_ber = avg_ber(modulation, m, n_users)?;
    let bits = modulation.bits_per_symbol();
    Ok(RateReport {
        per_ue_ber,
        bsc_rate: bsc_rate(per_ue_ber, n_users, bits)?,
        ergodic_rate: ergodic_rate(m, n_users)?,
        outage_rate: outage_rate(m, n_users, epsilon)?,
        epsilon,
    })
}

/// Piecewise-linear CDF table of Z on a log grid, for KS tests against
/// empirical samples.
#[derive(Debug, Clone)]
pub struct ZCdf {
    log_z: Vec<f64>,
    cdf: Vec<f64>,
}

impl ZCdf {
    /// Tabulate P(Z ≤ z) on `points` log-spaced nodes covering [z_min, z_max].
    pub fn build(
        m: &SirMoments,
        n_users: usize,
        z_min: f64,
        z_max: f64,
        points: usize,
    ) -> Result<Self> {
        if !(z_min > 0.0 && z_max > z_min) {
            return Err(Error::domain("ZCdf: need 0 < z_min < z_max"));
        }
        if points < 2 {
            return Err(Error::domain("ZCdf: need at least 2 points"));
        }
        let density = |z: f64| ln_pdf_z(z, m, n_users).map(f64::exp).unwrap_or(0.0);
        let mut log_z = Vec::with_capacity(points);
        let mut cdf = Vec::with_capacity(points);
        let l0 = z_min.ln();
        let l1 = z_max.ln();
        let mut acc = quad::integrate_sqrt_origin(&density, z_min, 1e-300, 1e-9)?.value;
        log_z.push(l0);
        cdf.push(acc);
        let mut prev = z_min;
        for i in 1..points {
            let z = (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp();
            let seg = quad::integrate(&density, prev, z, 1e-14, 1e-9)?;
            acc += seg.value;
            log_z.push(z.ln());
            cdf.push(acc.min(1.0));
            prev = z;
        }
        Ok(ZCdf { log_z, cdf })
    }

    /// Interpolated CDF value (clamped to the table ends outside the range).
    pub fn eval(&self, z: f64) -> f64 {
        if z <= 0.0 || !z.is_finite() {
            return if z > 0.0 {
                *self.cdf.last().unwrap()
            } else {
                0.0
            };
        }
        let lz = z.ln();
        if lz <= self.log_z[0] {
            return self.cdf[0];
        }
        let last = self.log_z.len() - 1;
        if lz >= self.log_z[last] {
            return self.cdf[last];
        }
        let mut lo = 0usize;
        let mut hi = last;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.log_z[mid] <= lz {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = (lz - self.log_z[lo]) / (self.log_z[hi] - self.log_z[lo]);
        self.cdf[lo] + t * (self.cdf[hi] - self.cdf[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::FasGeometry;

    fn iid_model(n: usize) -> RichScatteringModel {
        // half-wavelength line: every pair distance is a multiple of λ/2,
        // so j0 vanishes and the ports are exactly uncorrelated
        RichScatteringModel::new(
            FasGeometry::new(n, 1, 0.5 * (n - 1) as f64, 0.0).unwrap(),
            1.0,
        )
        .unwrap()
    }

    fn grid_4x4() -> RichScatteringModel {
        RichScatteringModel::new(FasGeometry::new(4, 4, 3.0, 1.6).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn moments_single_port() {
        let m = compute_moments(
            &RichScatteringModel::new(FasGeometry::new(1, 1, 0.0, 0.0).unwrap(), 1.0).unwrap(),
        )
        .unwrap();
        assert!((m.mu1 - PI.sqrt() / 2.0).abs() < 1e-14);
        assert!((m.sigma1_sq - (1.0 - PI / 4.0)).abs() < 1e-14);
        assert!((m.sigma2_sq - 1.0).abs() < 1e-14);
        assert!((m.sigma2_sq_printed - 1.0).abs() < 1e-14);
    }

    #[test]
    fn moments_iid_line() {
        let m = compute_moments(&iid_model(10)).unwrap();
        assert!((m.mu1 - 5.0 * PI.sqrt()).abs() < 1e-12);
        assert!((m.sigma1_sq - 10.0 * (1.0 - PI / 4.0)).abs() < 1e-12);
        // the rho² factor kills the pairwise sum exactly
        assert!((m.sigma2_sq - 10.0).abs() < 1e-12);
        // while the printed form inflates it by (pi/2)·C(10,2)
        assert!((m.sigma2_sq_printed - (10.0 + PI / 2.0 * 45.0)).abs() < 1e-9);
        assert!(m.sigma2_sq >= m.n_ports as f64 * m.sigma_g * m.sigma_g);
    }

    #[test]
    fn y_tilde_density() {
        // U = 2: plain exponential
        assert!((pdf_y_tilde(0.7, 2).unwrap() - (-0.7f64).exp()).abs() < 1e-14);
        assert!(pdf_y_tilde(1.0, 1).is_err());
        // mean is U-1 by quadrature
        for u in [2usize, 5] {
            let mean =
                quad::integrate(|y| y * pdf_y_tilde(y, u).unwrap(), 0.0, 200.0, 1e-12, 1e-10)
                    .unwrap()
                    .value;
            assert!((mean - (u as f64 - 1.0)).abs() < 1e-8, "U={u}: mean {mean}");
        }
    }

    #[test]
    fn pdf_x_normalizes_and_peaks_near_mu1_sq() {
        let m = compute_moments(&grid_4x4()).unwrap();
        let hi = (m.mu1 + 8.0 * m.sigma1_sq.sqrt()).powi(2);
        let q = quad::integrate_sqrt_origin(|x| pdf_x(x, &m), hi, 1e-12, 1e-9).unwrap();
        assert!((q.value - 1.0).abs() < 1e-6, "mass {}", q.value);
        // mode within [mu1² - 3σ1·mu1, mu1² + 3σ1·mu1]
        let mut best_x = 0.0;
        let mut best = f64::NEG_INFINITY;
        for i in 1..4000 {
            let x = hi * i as f64 / 4000.0;
            let v = pdf_x(x, &m);
            if v > best {
                best = v;
                best_x = x;
            }
        }
        let s1 = m.sigma1_sq.sqrt();
        assert!(
            best_x > m.mu1 * m.mu1 - 3.0 * s1 * m.mu1 && best_x < m.mu1 * m.mu1 + 3.0 * s1 * m.mu1,
            "mode at {best_x}, mu1²={}",
            m.mu1 * m.mu1
        );
    }

    #[test]
    fn pdf_z_normalizes() {
        let m = compute_moments(&grid_4x4()).unwrap();
        for u in [2usize, 5, 10] {
            let mass = integrate_weighted_pdf_z(&m, u, |_| 1.0, 1e-9).unwrap();
            assert!((mass - 1.0).abs() < 1e-5, "U={u}: mass {mass}");
        }
    }

    #[test]
    fn pdf_z_matches_oracle_spot() {
        let m = compute_moments(&grid_4x4()).unwrap();
        for u in [2usize, 5] {
            let scale = z_scale(&m, u);
            for mult in [0.02, 0.3, 1.0, 3.0, 20.0] {
                let z = scale * mult;
                let a = pdf_z(z, &m, u).unwrap();
                let b = pdf_z_oracle(z, &m, u).unwrap();
                let rel = (a - b).abs() / b.max(1e-300);
                assert!(rel < 1e-6, "U={u}, z={z}: {a} vs {b} (rel {rel:.2e})");
            }
        }
    }

    #[test]
    fn ber_bounds_and_monotonicity() {
        let m = compute_moments(&grid_4x4()).unwrap();
        let b10 = avg_ber(BerModulation::Bpsk, &m, 10).unwrap();
        assert!(b10 > 0.0 && b10 < 0.5);
        let b40 = avg_ber(BerModulation::Bpsk, &m, 40).unwrap();
        assert!(b40 > b10, "more users must raise the BER: {b40} vs {b10}");
        assert!(avg_ber(BerModulation::Mqam(8), &m, 10).is_err());
        assert!(avg_ber(BerModulation::Mqam(4), &m, 1).is_err());
    }

    #[test]
    fn bsc_rate_values() {
        assert_eq!(bsc_rate(0.0, 7, 2).unwrap(), 14.0);
        assert!(bsc_rate(0.5, 9, 2).unwrap().abs() < 1e-12);
        // frozen binary-entropy oracle
        assert!((bsc_rate(0.11, 10, 1).unwrap() - 5.000_840_418_354_72).abs() < 1e-12);
        assert!(bsc_rate(1.2, 1, 1).is_err());
    }

    #[test]
    fn outage_rate_monotone_in_epsilon() {
        let m = compute_moments(&grid_4x4()).unwrap();
        let r05 = outage_rate(&m, 5, 0.05).unwrap();
        let r20 = outage_rate(&m, 5, 0.2).unwrap();
        assert!(r20 > r05, "{r20} vs {r05}");
        let tiny = outage_rate(&m, 5, 1e-5).unwrap();
        assert!(tiny < r05 && tiny > 0.0);
        assert!(outage_rate(&m, 5, 0.0).is_err());
    }

    #[test]
    fn rate_report_is_consistent() {
        let m = compute_moments(&grid_4x4()).unwrap();
        let u = 8;
        let r = rate_report(BerModulation::Mqam(4), &m, u, 0.1).unwrap();
        assert!(r.per_ue_ber > 0.0 && r.per_ue_ber < 0.5);
        // network BSC rate is bounded by U·m
        assert!(r.bsc_rate <= (u as f64) * 2.0 + 1e-12);
        assert!((r.bsc_rate - bsc_rate(r.per_ue_ber, u, 2).unwrap()).abs() < 1e-12);
        assert!(r.ergodic_rate > 0.0 && r.outage_rate > 0.0);
    }

    #[test]
    fn cdf_table_matches_direct_cdf() {
        let m = compute_moments(&grid_4x4()).unwrap();
        let u = 5;
        let scale = z_scale(&m, u);
        let table = ZCdf::build(&m, u, scale * 1e-3, scale * 100.0, 600).unwrap();
        for mult in [0.01, 0.1, 1.0, 10.0] {
            let z = scale * mult;
            let direct = cdf_z(z, &m, u).unwrap();
            let interp = table.eval(z);
            assert!(
                (direct - interp).abs() < 5e-4,
                "z={z}: {direct} vs {interp}"
            );
        }
        assert_eq!(table.eval(0.0), 0.0);
        assert!((table.eval(f64::INFINITY) - 1.0).abs() < 1e-3);
    }
}
