//! Link-level engine for fluid-antenna multiple access downlinks.
//!
//! The crate models a 2D fluid-antenna port grid at each receiver, samples
//! correlated Rayleigh (rich scattering) or finite-scattering channels,
//! applies one of three receive schemes — PUMA (per-port analog phase
//! shifting before aggregation), CUMA (in-phase analog aggregation), or
//! sFAMA (single best-SINR port) — and evaluates bit error rate and network
//! rate both by Monte Carlo trials and by closed-form SIR analysis backed
//! by hypergeometric/Whittaker special functions.
//!
//! Module map:
//! * [`specfun`] — self-contained special functions with stated accuracies
//! * [`quad`] — adaptive Gauss–Kronrod quadrature
//! * [`channel`] — port geometry, spatial covariance, channel sampling,
//!   dipole mutual-coupling front end
//! * [`receiver`] — port selection, analog weights, aggregation, combining
//! * [`analysis`] — closed-form SIR moments, PDFs, BER and rate formulas
//! * [`modem`] — Gray-mapped BPSK/M-QAM constellations
//! * [`montecarlo`] — deterministic parallel trial engine
//!
//! # Example
//!
//! Draw one correlated channel realization and build the co-phasing port
//! plan for it:
//!
//! ```
//! use fama_core::channel::{
//!     covariance_factor, sample_rich_channel, FasGeometry, RichScatteringModel,
//! };
//! use fama_core::receiver::{puma_weights, shortlist_ports};
//! use rand::SeedableRng;
//!
//! let model = RichScatteringModel::new(FasGeometry::new(4, 4, 3.0, 1.6)?, 1.0)?;
//! let factor = covariance_factor(&model.spatial_covariance())?;
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let g = sample_rich_channel(&factor, 1.0, &mut rng);
//! let plan = puma_weights(&g, &[shortlist_ports(&g, 0.2)?]);
//! assert_eq!(plan.n_rf(), 1);
//! # Ok::<(), fama_core::Error>(())
//! ```

pub mod analysis;
pub mod channel;
pub mod error;
pub mod modem;
pub mod montecarlo;
pub mod quad;
pub mod receiver;
pub mod specfun;

pub use error::{Error, Result};
