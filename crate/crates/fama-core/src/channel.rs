//! Port-grid geometry, spatial covariance, correlated channel sampling, and
//! the dipole mutual-coupling front end.
//!
//! A receiver carries an N₁×N₂ grid of selectable antenna ports inside a
//! W₁λ×W₂λ aperture. Under rich scattering the per-port channels are jointly
//! complex Gaussian with covariance σ_g²Σ, Σ_{kℓ} = j₀(2π·d_{kℓ}/λ); under
//! finite scattering the channel is a Rice-weighted sum of plane waves over
//! N_p scattered paths. Closely spaced dipole ports additionally see the
//! linear front-end distortion Γ_m = Z_T (Z + Z_T I)⁻¹.

use crate::error::{Error, Result};
use crate::specfun::{j0_raw, sine_cosine_integrals, EULER_GAMMA};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use std::path::Path;

/// Impedance of free space, ohms.
pub const VACUUM_IMPEDANCE: f64 = 376.730_313_668;

/// Draw CN(0, 1): real and imaginary parts each N(0, 1/2).
pub fn complex_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// 2D fluid-antenna port grid: n1×n2 ports evenly spread over w1λ×w2λ.
///
/// Ports use 0-based linear indices k = k1·n2 + k2 with k1 ∈ 0..n1,
/// k2 ∈ 0..n2.
#[derive(Debug, Clone, PartialEq)]
pub struct FasGeometry {
    n1: usize,
    n2: usize,
    w1: f64,
    w2: f64,
}

impl FasGeometry {
    pub fn new(n1: usize, n2: usize, w1: f64, w2: f64) -> Result<Self> {
        if n1 < 1 || n2 < 1 {
            return Err(Error::domain(format!(
                "FasGeometry: port counts must be >= 1, got {n1}x{n2}"
            )));
        }
        for (n, w, name) in [(n1, w1, "w1"), (n2, w2, "w2")] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::domain(format!(
                    "FasGeometry: {name} must be >= 0, got {w}"
                )));
            }
            if n > 1 && w <= 0.0 {
                return Err(Error::domain(format!(
                    "FasGeometry: {name} must be > 0 when the dimension has {n} ports"
                )));
            }
        }
        Ok(FasGeometry { n1, n2, w1, w2 })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.n2
    }
    pub fn w1(&self) -> f64 {
        self.w1
    }
    pub fn w2(&self) -> f64 {
        self.w2
    }

    /// Total number of ports N = n1·n2.
    pub fn n_ports(&self) -> usize {
        self.n1 * self.n2
    }

    /// Linear index of grid position (k1, k2), both 0-based.
    pub fn linear_index(&self, k1: usize, k2: usize) -> usize {
        debug_assert!(k1 < self.n1 && k2 < self.n2);
        k1 * self.n2 + k2
    }

    /// Grid position (k1, k2) of linear index k.
    pub fn grid_index(&self, k: usize) -> (usize, usize) {
        assert!(k < self.n_ports(), "port index {k} out of range");
        (k / self.n2, k % self.n2)
    }

    /// Port position in wavelengths; a dimension with a single port sits at 0.
    pub fn port_coordinates(&self, k: usize) -> (f64, f64) {
        let (k1, k2) = self.grid_index(k);
        let x = if self.n1 > 1 {
            k1 as f64 * self.w1 / (self.n1 - 1) as f64
        } else {
            0.0
        };
        let y = if self.n2 > 1 {
            k2 as f64 * self.w2 / (self.n2 - 1) as f64
        } else {
            0.0
        };
        (x, y)
    }

    /// Euclidean distance between two ports, in wavelengths.
    pub fn port_distance(&self, k: usize, l: usize) -> f64 {
        let (xk, yk) = self.port_coordinates(k);
        let (xl, yl) = self.port_coordinates(l);
        ((xk - xl).powi(2) + (yk - yl).powi(2)).sqrt()
    }

    /// Smallest spacing between adjacent ports (∞ for a single port).
    pub fn min_spacing(&self) -> f64 {
        let mut s = f64::INFINITY;
        if self.n1 > 1 {
            s = s.min(self.w1 / (self.n1 - 1) as f64);
        }
        if self.n2 > 1 {
            s = s.min(self.w2 / (self.n2 - 1) as f64);
        }
        s
    }
}

/// Steering vector a(θ, φ): entry k = exp(−j2π·d(k)) with
/// d(k) = x_k·sinθ·cosφ + y_k·cosθ (coordinates in wavelengths).
pub fn steering_vector(geometry: &FasGeometry, theta: f64, phi: f64) -> DVector<Complex64> {
    let dir1 = theta.sin() * phi.cos();
    let dir2 = theta.cos();
    DVector::from_fn(geometry.n_ports(), |k, _| {
        let (x, y) = geometry.port_coordinates(k);
        let phase = -2.0 * PI * (x * dir1 + y * dir2);
        Complex64::new(phase.cos(), phase.sin())
    })
}

// ---------------------------------------------------------------------------
// Rich scattering
// ---------------------------------------------------------------------------

/// Correlated Rayleigh model: g ~ CN(0, σ_g²Σ) with Σ from the port grid.
#[derive(Debug, Clone)]
pub struct RichScatteringModel {
    pub geometry: FasGeometry,
    pub sigma_g: f64,
}

impl RichScatteringModel {
    pub fn new(geometry: FasGeometry, sigma_g: f64) -> Result<Self> {
        if !(sigma_g > 0.0) || !sigma_g.is_finite() {
            return Err(Error::domain(format!(
                "RichScatteringModel: sigma_g must be > 0, got {sigma_g}"
            )));
        }
        Ok(RichScatteringModel { geometry, sigma_g })
    }

    /// Spatial covariance Σ: entry (k, ℓ) = j₀(2π·d_{kℓ}), unit diagonal.
    pub fn spatial_covariance(&self) -> DMatrix<f64> {
        let n = self.geometry.n_ports();
        let mut sigma = DMatrix::identity(n, n);
        for k in 0..n {
            for l in 0..k {
                let rho = j0_raw(2.0 * PI * self.geometry.port_distance(k, l));
                sigma[(k, l)] = rho;
                sigma[(l, k)] = rho;
            }
        }
        sigma
    }
}

/// Factor L with L·Lᵀ ≈ Σ, used to color i.i.d. Gaussian draws.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    /// The factor L (lower-triangular when Cholesky succeeded).
    pub matrix: DMatrix<f64>,
    /// Max-norm reconstruction error ‖LLᵀ − Σ‖_max.
    pub recon_error: f64,
    /// Whether the Cholesky fast path was used.
    pub via_cholesky: bool,
}

/// Factor a symmetric unit-diagonal covariance. Cholesky fast path; falls
/// back to an eigendecomposition with negative eigenvalues clipped to zero,
/// which very compact grids need (Σ goes numerically semidefinite).
pub fn covariance_factor(sigma: &DMatrix<f64>) -> Result<CovarianceFactor> {
    let n = sigma.nrows();
    if sigma.ncols() != n {
        return Err(Error::domain("covariance_factor: matrix not square"));
    }
    let mut asym = 0.0f64;
    for k in 0..n {
        for l in 0..k {
            asym = asym.max((sigma[(k, l)] - sigma[(l, k)]).abs());
        }
    }
    if asym > 1e-10 {
        return Err(Error::domain(format!(
            "covariance_factor: matrix not symmetric (max asymmetry {asym:.3e})"
        )));
    }

    let (l, via_cholesky) = match nalgebra::Cholesky::new(sigma.clone()) {
        Some(chol) => (chol.unpack(), true),
        None => {
            let eig = nalgebra::SymmetricEigen::new(sigma.clone());
            let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
            let mut l = eig.eigenvectors;
            for (j, s) in sqrt_vals.iter().enumerate() {
                l.column_mut(j).scale_mut(*s);
            }
            (l, false)
        }
    };
    let recon_error = (&l * l.transpose() - sigma).abs().max();
    Ok(CovarianceFactor {
        matrix: l,
        recon_error,
        via_cholesky,
    })
}

/// Draw g = σ_g·L·w with w i.i.d. CN(0, 1); marginals are CN(0, σ_g²).
pub fn sample_rich_channel<R: Rng + ?Sized>(
    factor: &CovarianceFactor,
    sigma_g: f64,
    rng: &mut R,
) -> DVector<Complex64> {
    let n = factor.matrix.nrows();
    let mut w_re = DVector::<f64>::zeros(n);
    let mut w_im = DVector::<f64>::zeros(n);
    for i in 0..n {
        let z = complex_standard_normal(rng);
        w_re[i] = z.re;
        w_im[i] = z.im;
    }
    let g_re = &factor.matrix * w_re;
    let g_im = &factor.matrix * w_im;
    DVector::from_fn(n, |i, _| Complex64::new(g_re[i], g_im[i]) * sigma_g)
}

// ---------------------------------------------------------------------------
// Finite scattering
// ---------------------------------------------------------------------------

/// Angle distributions for the scattered paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleLaw {
    /// θ ~ U[0, 2π), φ ~ U[0, π).
    UniformAzimuthElevation,
}

/// Rice-factor plane-wave model with N_p scattered paths.
#[derive(Debug, Clone)]
pub struct FiniteScatteringModel {
    pub geometry: FasGeometry,
    pub sigma_g: f64,
    pub rice_k: f64,
    pub n_paths: usize,
    pub angle_law: AngleLaw,
}

impl FiniteScatteringModel {
    pub fn new(
        geometry: FasGeometry,
        sigma_g: f64,
        rice_k: f64,
        n_paths: usize,
        angle_law: AngleLaw,
    ) -> Result<Self> {
        if !(sigma_g > 0.0) || !sigma_g.is_finite() {
            return Err(Error::domain(format!(
                "FiniteScatteringModel: sigma_g must be > 0, got {sigma_g}"
            )));
        }
        if !rice_k.is_finite() || rice_k < 0.0 {
            return Err(Error::domain(format!(
                "FiniteScatteringModel: rice_k must be finite and >= 0, got {rice_k}"
            )));
        }
        if n_paths < 1 {
            return Err(Error::domain("FiniteScatteringModel: n_paths must be >= 1"));
        }
        Ok(FiniteScatteringModel {
            geometry,
            sigma_g,
            rice_k,
            n_paths,
            angle_law,
        })
    }

    fn draw_angles<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self.angle_law {
            AngleLaw::UniformAzimuthElevation => {
                let theta = rng.gen::<f64>() * 2.0 * PI;
                let phi = rng.gen::<f64>() * PI;
                (theta, phi)
            }
        }
    }
}

/// Draw one finite-scattering channel realization:
/// √(Kσ²/(K+1))·e^{jδ}·a(θ₀,φ₀) + √(σ²/(N_p(K+1)))·Σ_l α_l·a(θ_l,φ_l).
///
/// The LoS draws happen even for K = 0 so the stream layout does not depend
/// on the Rice factor.
pub fn sample_finite_channel<R: Rng + ?Sized>(
    model: &FiniteScatteringModel,
    rng: &mut R,
) -> DVector<Complex64> {
    let k_fac = model.rice_k;
    let sigma2 = model.sigma_g * model.sigma_g;

    let delta = rng.gen::<f64>() * 2.0 * PI;
    let (theta0, phi0) = model.draw_angles(rng);
    let los_amp = (k_fac * sigma2 / (k_fac + 1.0)).sqrt();
    let mut g = steering_vector(&model.geometry, theta0, phi0)
        * (Complex64::new(delta.cos(), delta.sin()) * los_amp);

    let path_amp = (sigma2 / (model.n_paths as f64 * (k_fac + 1.0))).sqrt();
    for _ in 0..model.n_paths {
        let alpha = complex_standard_normal(rng);
        let (theta, phi) = model.draw_angles(rng);
        g += steering_vector(&model.geometry, theta, phi) * (alpha * path_amp);
    }
    g
}

// ---------------------------------------------------------------------------
// Channel realization
// ---------------------------------------------------------------------------

/// Per-trial effective channels: the desired vector plus one vector per
/// interfering stream.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub desired: DVector<Complex64>,
    pub interferers: Vec<DVector<Complex64>>,
}

impl ChannelRealization {
    pub fn new(desired: DVector<Complex64>, interferers: Vec<DVector<Complex64>>) -> Result<Self> {
        let n = desired.len();
        if n == 0 {
            return Err(Error::domain("ChannelRealization: empty desired channel"));
        }
        for (i, g) in interferers.iter().enumerate() {
            if g.len() != n {
                return Err(Error::domain(format!(
                    "ChannelRealization: interferer {i} has length {} != {n}",
                    g.len()
                )));
            }
        }
        for v in std::iter::once(&desired).chain(interferers.iter()) {
            if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::domain("ChannelRealization: non-finite entry"));
            }
        }
        Ok(ChannelRealization {
            desired,
            interferers,
        })
    }

    pub fn n_ports(&self) -> usize {
        self.desired.len()
    }

    /// Number of streams U (desired + interferers).
    pub fn n_users(&self) -> usize {
        1 + self.interferers.len()
    }
}

// ---------------------------------------------------------------------------
// Mutual coupling
// ---------------------------------------------------------------------------

/// How the mutual impedance matrix Z is obtained.
#[derive(Debug, Clone)]
pub enum CouplingKind {
    /// No coupling: Γ_m = I exactly.
    Identity,
    /// Full-grid N×N impedance matrix supplied externally.
    FromMatrix(DMatrix<Complex64>),
    /// Side-by-side parallel dipoles via the induced-EMF formulas.
    DipoleEmf,
}

/// Front-end coupling model; produces Γ_m = Z_T (Z + Z_T I)⁻¹ over the
/// activated ports.
#[derive(Debug, Clone)]
pub struct CouplingModel {
    pub kind: CouplingKind,
    /// Termination impedance Z_T in ohms.
    pub z_termination: f64,
    /// Dipole length in wavelengths (dipole-emf kind).
    pub dipole_length: f64,
    /// Dipole width (diameter) in wavelengths (dipole-emf kind).
    pub dipole_width: f64,
}

impl CouplingModel {
    pub fn identity() -> Self {
        CouplingModel {
            kind: CouplingKind::Identity,
            z_termination: 50.0,
            dipole_length: 0.5,
            dipole_width: 0.005,
        }
    }

    pub fn dipole_emf(z_termination: f64, dipole_length: f64, dipole_width: f64) -> Result<Self> {
        if !(z_termination > 0.0) {
            return Err(Error::domain(format!(
                "CouplingModel: z_termination must be > 0, got {z_termination}"
            )));
        }
        if !(dipole_length > 0.0) || !(dipole_width > 0.0) {
            return Err(Error::domain(
                "CouplingModel: dipole length and width must be > 0",
            ));
        }
        Ok(CouplingModel {
            kind: CouplingKind::DipoleEmf,
            z_termination,
            dipole_length,
            dipole_width,
        })
    }

    pub fn from_matrix(z: DMatrix<Complex64>, z_termination: f64) -> Result<Self> {
        if !(z_termination > 0.0) {
            return Err(Error::domain(format!(
                "CouplingModel: z_termination must be > 0, got {z_termination}"
            )));
        }
        if z.nrows() != z.ncols() {
            return Err(Error::format("CouplingModel: impedance matrix not square"));
        }
        Ok(CouplingModel {
            kind: CouplingKind::FromMatrix(z),
            z_termination,
            dipole_length: 0.5,
            dipole_width: 0.005,
        })
    }

    pub fn from_impedance_file(path: &Path, z_termination: f64) -> Result<Self> {
        let z = load_impedance_file(path)?;
        Self::from_matrix(z, z_termination)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, CouplingKind::Identity)
    }
}

/// Parse an impedance file: first token N, then N×N row-major "re im" pairs
/// in ohms, whitespace-separated.
pub fn load_impedance_file(path: &Path) -> Result<DMatrix<Complex64>> {
    let text = std::fs::read_to_string(path)?;
    parse_impedance_text(&text)
}

pub fn parse_impedance_text(text: &str) -> Result<DMatrix<Complex64>> {
    let mut tokens = text.split_whitespace();
    let n: usize = tokens
        .next()
        .ok_or_else(|| Error::format("impedance file: empty"))?
        .parse()
        .map_err(|e| Error::format(format!("impedance file: bad port count: {e}")))?;
    if n == 0 {
        return Err(Error::format("impedance file: port count must be >= 1"));
    }
    let mut values = Vec::with_capacity(2 * n * n);
    for tok in tokens.by_ref() {
        let v: f64 = tok
            .parse()
            .map_err(|e| Error::format(format!("impedance file: bad entry {tok:?}: {e}")))?;
        values.push(v);
        if values.len() == 2 * n * n {
            break;
        }
    }
    if values.len() != 2 * n * n {
        return Err(Error::format(format!(
            "impedance file: expected {} numbers for N={n}, found {}",
            2 * n * n,
            values.len()
        )));
    }
    if tokens.next().is_some() {
        return Err(Error::format(
            "impedance file: trailing data after N*N entries",
        ));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| {
        let idx = 2 * (r * n + c);
        Complex64::new(values[idx], values[idx + 1])
    }))
}

/// Self impedance of a thin dipole of length `len_wl` and wire radius
/// `radius_wl` (wavelength units), induced-EMF method, referred to the
/// current maximum.
pub fn dipole_self_impedance(len_wl: f64, radius_wl: f64) -> Result<Complex64> {
    if !(len_wl > 0.0) || !(radius_wl > 0.0) {
        return Err(Error::domain(
            "dipole_self_impedance: need positive length and radius",
        ));
    }
    let eta = VACUUM_IMPEDANCE;
    let kl = 2.0 * PI * len_wl;
    let (si_kl, ci_kl) = sine_cosine_integrals(kl)?;
    let (si_2kl, ci_2kl) = sine_cosine_integrals(2.0 * kl)?;
    let (_, ci_a) = sine_cosine_integrals(2.0 * kl * radius_wl * radius_wl / (len_wl * len_wl))?;
    let c = EULER_GAMMA;
    let r = eta / (2.0 * PI)
        * (c + kl.ln() - ci_kl
            + 0.5 * kl.sin() * (si_2kl - 2.0 * si_kl)
            + 0.5 * kl.cos() * (c + (kl / 2.0).ln() + ci_2kl - 2.0 * ci_kl));
    let x = eta / (4.0 * PI)
        * (2.0 * si_kl + kl.cos() * (2.0 * si_kl - si_2kl)
            - kl.sin() * (2.0 * ci_kl - ci_2kl - ci_a));
    Ok(Complex64::new(r, x))
}

/// Mutual impedance of two parallel side-by-side dipoles of length `len_wl`
/// spaced `spacing_wl` apart (wavelength units), induced-EMF method.
///
/// Exact for half-wave elements (the configured case); for other lengths it
/// is the half-wave expression evaluated with the modified geometry terms.
pub fn dipole_mutual_impedance(spacing_wl: f64, len_wl: f64) -> Result<Complex64> {
    if !(spacing_wl > 0.0) {
        return Err(Error::domain(format!(
            "dipole_mutual_impedance: spacing must be > 0, got {spacing_wl}"
        )));
    }
    let eta = VACUUM_IMPEDANCE;
    let k = 2.0 * PI;
    let diag = (spacing_wl * spacing_wl + len_wl * len_wl).sqrt();
    let u0 = k * spacing_wl;
    let u1 = k * (diag + len_wl);
    let u2 = k * (diag - len_wl);
    let (si0, ci0) = sine_cosine_integrals(u0)?;
    let (si1, ci1) = sine_cosine_integrals(u1)?;
    let (si2, ci2) = sine_cosine_integrals(u2)?;
    let r = eta / (4.0 * PI) * (2.0 * ci0 - ci1 - ci2);
    let x = -eta / (4.0 * PI) * (2.0 * si0 - si1 - si2);
    Ok(Complex64::new(r, x))
}

/// Build Γ_m = Z_T (Z + Z_T I)⁻¹ over `activated` ports, identity elsewhere.
pub fn coupling_matrix(
    model: &CouplingModel,
    geometry: &FasGeometry,
    activated: &[usize],
) -> Result<DMatrix<Complex64>> {
    let n = geometry.n_ports();
    for &k in activated {
        if k >= n {
            return Err(Error::domain(format!(
                "coupling_matrix: port {k} out of range"
            )));
        }
    }
    let mut full = DMatrix::<Complex64>::identity(n, n);
    if model.is_identity() || activated.is_empty() {
        return Ok(full);
    }

    let m = activated.len();
    let z_act = match &model.kind {
        CouplingKind::Identity => unreachable!(),
        CouplingKind::FromMatrix(z) => {
            if z.nrows() != n {
                return Err(Error::format(format!(
                    "coupling_matrix: impedance matrix is {}x{}, geometry has {n} ports",
                    z.nrows(),
                    z.ncols()
                )));
            }
            DMatrix::from_fn(m, m, |r, c| z[(activated[r], activated[c])])
        }
        CouplingKind::DipoleEmf => {
            let z_self = dipole_self_impedance(model.dipole_length, model.dipole_width / 2.0)?;
            let mut z = DMatrix::<Complex64>::zeros(m, m);
            for r in 0..m {
                z[(r, r)] = z_self;
                for c in 0..r {
                    let d = geometry.port_distance(activated[r], activated[c]);
                    let zm = dipole_mutual_impedance(d, model.dipole_length)?;
                    z[(r, c)] = zm;
                    z[(c, r)] = zm;
                }
            }
            z
        }
    };

    let zt = Complex64::new(model.z_termination, 0.0);
    let system = &z_act + DMatrix::<Complex64>::identity(m, m) * zt;
    let inv = system
        .try_inverse()
        .ok_or_else(|| Error::numeric("coupling_matrix: Z + Z_T·I is singular"))?;
    let gamma_act = inv * zt;
    for r in 0..m {
        for c in 0..m {
            full[(activated[r], activated[c])] = gamma_act[(r, c)];
        }
    }
    Ok(full)
}
