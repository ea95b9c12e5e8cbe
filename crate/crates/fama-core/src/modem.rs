//! Gray-mapped BPSK and square M-QAM constellations with unit average
//! symbol energy, plus nearest-point coherent detection.
//!
//! Square QAM splits the symbol label into two independent Gray-coded PAM
//! axes (I takes the high bits), so a nearest-neighbor symbol error flips
//! exactly one bit per erred axis step.

use crate::analysis::BerModulation;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Waveform alphabet selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    /// Square M-QAM, M ∈ {4, 16, 64}. M = 4 is QPSK.
    Mqam(u32),
}

impl Modulation {
    pub fn bits_per_symbol(&self) -> u32 {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Mqam(m) => m.ilog2(),
        }
    }

    pub fn order(&self) -> u32 {
        match self {
            Modulation::Bpsk => 2,
            Modulation::Mqam(m) => *m,
        }
    }

    /// The matching closed-form BER kernel.
    pub fn ber_modulation(&self) -> BerModulation {
        match self {
            Modulation::Bpsk => BerModulation::Bpsk,
            Modulation::Mqam(m) => BerModulation::Mqam(*m),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Modulation::Bpsk => "bpsk".into(),
            Modulation::Mqam(4) => "qpsk".into(),
            Modulation::Mqam(m) => format!("qam{m}"),
        }
    }
}

impl std::str::FromStr for Modulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" | "qam4" | "4qam" => Ok(Modulation::Mqam(4)),
            "qam16" | "16qam" => Ok(Modulation::Mqam(16)),
            "qam64" | "64qam" => Ok(Modulation::Mqam(64)),
            other => Err(Error::domain(format!("unknown modulation {other:?}"))),
        }
    }
}

fn gray_encode(i: u32) -> u32 {
    i ^ (i >> 1)
}

fn gray_decode(mut g: u32) -> u32 {
    let mut i = g;
    while g > 0 {
        g >>= 1;
        i ^= g;
    }
    i
}

/// Unit-energy constellation with Gray labeling.
#[derive(Debug, Clone)]
pub struct Constellation {
    modulation: Modulation,
    /// PAM levels per axis in position order (QAM only).
    levels: Vec<f64>,
    /// Axis scale d: levels are (2i + 1 − L)·d.
    step: f64,
    bits_per_axis: u32,
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Result<Self> {
        match modulation {
            Modulation::Bpsk => Ok(Constellation {
                modulation,
                levels: vec![-1.0, 1.0],
                step: 1.0,
                bits_per_axis: 1,
            }),
            Modulation::Mqam(m) => {
                if !matches!(m, 4 | 16 | 64) {
                    return Err(Error::domain(format!(
                        "Constellation: M-QAM order must be 4, 16 or 64, got {m}"
                    )));
                }
                let bits_per_axis = m.ilog2() / 2;
                let l = 1u32 << bits_per_axis;
                // unit average energy: E = 2(L²−1)/3·d² per symbol
                let step = (3.0 / (2.0 * (m as f64 - 1.0))).sqrt();
                let levels = (0..l)
                    .map(|i| (2.0 * i as f64 + 1.0 - l as f64) * step)
                    .collect();
                Ok(Constellation {
                    modulation,
                    levels,
                    step,
                    bits_per_axis,
                })
            }
        }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn order(&self) -> u32 {
        self.modulation.order()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.modulation.bits_per_symbol()
    }

    /// Constellation point for a symbol label (Gray-coded axes).
    pub fn point(&self, label: u32) -> Complex64 {
        debug_assert!(label < self.order());
        match self.modulation {
            Modulation::Bpsk => {
                // bit 0 -> +1, bit 1 -> -1
                Complex64::new(1.0 - 2.0 * label as f64, 0.0)
            }
            Modulation::Mqam(_) => {
                let mask = (1u32 << self.bits_per_axis) - 1;
                let gi = (label >> self.bits_per_axis) & mask;
                let gq = label & mask;
                Complex64::new(
                    self.levels[gray_decode(gi) as usize],
                    self.levels[gray_decode(gq) as usize],
                )
            }
        }
    }

    /// Uniform random symbol: (label, point).
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, Complex64) {
        let label = rng.gen_range(0..self.order());
        (label, self.point(label))
    }

    fn detect_axis(&self, value: f64) -> u32 {
        let l = self.levels.len() as f64;
        let idx = ((value / self.step + l - 1.0) / 2.0).round();
        let idx = idx.clamp(0.0, l - 1.0) as u32;
        gray_encode(idx)
    }

    /// Nearest-point decision on a unit-gain observation.
    pub fn detect(&self, y: Complex64) -> u32 {
        match self.modulation {
            Modulation::Bpsk => u32::from(y.re < 0.0),
            Modulation::Mqam(_) => {
                (self.detect_axis(y.re) << self.bits_per_axis) | self.detect_axis(y.im)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_average_energy() {
        for m in [
            Modulation::Bpsk,
            Modulation::Mqam(4),
            Modulation::Mqam(16),
            Modulation::Mqam(64),
        ] {
            let c = Constellation::new(m).unwrap();
            let e: f64 =
                (0..c.order()).map(|s| c.point(s).norm_sqr()).sum::<f64>() / c.order() as f64;
            assert!((e - 1.0).abs() < 1e-12, "{m:?}: energy {e}");
        }
    }

    #[test]
    fn detection_round_trip() {
        for m in [
            Modulation::Bpsk,
            Modulation::Mqam(4),
            Modulation::Mqam(16),
            Modulation::Mqam(64),
        ] {
            let c = Constellation::new(m).unwrap();
            for s in 0..c.order() {
                assert_eq!(c.detect(c.point(s)), s, "{m:?} symbol {s}");
            }
        }
    }

    #[test]
    fn gray_neighbors_differ_by_one_bit() {
        let c = Constellation::new(Modulation::Mqam(16)).unwrap();
        // adjacent levels along one axis differ in exactly one bit
        for i in 0..3u32 {
            let a = gray_encode(i);
            let b = gray_encode(i + 1);
            assert_eq!((a ^ b).count_ones(), 1);
        }
        // nearest horizontal neighbors in the constellation differ by 1 bit
        for s in 0..16u32 {
            let p = c.point(s);
            let shifted = Complex64::new(p.re + 2.0 * c.step, p.im);
            let t = c.detect(shifted);
            if t != s {
                let diff = (s ^ t).count_ones();
                assert_eq!(diff, 1, "symbols {s} and {t}");
            }
        }
    }

    #[test]
    fn qpsk_points() {
        let c = Constellation::new(Modulation::Mqam(4)).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for s in 0..4 {
            let p = c.point(s);
            assert!((p.re.abs() - inv_sqrt2).abs() < 1e-15);
            assert!((p.im.abs() - inv_sqrt2).abs() < 1e-15);
        }
    }

    #[test]
    fn draw_is_uniform() {
        let c = Constellation::new(Modulation::Mqam(4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[c.draw(&mut rng).0 as usize] += 1;
        }
        for &n in &counts {
            let f = n as f64 / 40_000.0;
            assert!((f - 0.25).abs() < 0.02, "freq {f}");
        }
    }

    #[test]
    fn rejects_unsupported_order() {
        assert!(Constellation::new(Modulation::Mqam(8)).is_err());
        assert!("qam8".parse::<Modulation>().is_err());
        assert_eq!("qpsk".parse::<Modulation>().unwrap(), Modulation::Mqam(4));
    }
}
