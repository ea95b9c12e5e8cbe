//! Property tests for the algebraic invariants: Q-function symmetry, the
//! Gamma recurrence, the Whittaker/Kummer definitional identity, shortlist
//! membership, unit-modulus weights, and co-phasing.

use fama_core::channel::complex_standard_normal;
use fama_core::receiver::{
    cuma_weights, puma_weights, sfama_select, shortlist_ports, ReceiverConfig, Scheme,
};
use fama_core::specfun::{kummer_1f1, ln_gamma, q_function, whittaker_m};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_channel(seed: u64, n: usize) -> DVector<num_complex::Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| complex_standard_normal(&mut rng))
}

proptest! {
    #[test]
    fn q_function_symmetry(x in -8.0f64..8.0) {
        let s = q_function(x).unwrap() + q_function(-x).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12, "Q(x)+Q(-x) = {s}");
    }

    #[test]
    fn gamma_recurrence(x in 1e-3f64..50.0) {
        let lhs = ln_gamma(x + 1.0).unwrap().exp();
        let rhs = x * ln_gamma(x).unwrap().exp();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn whittaker_definition_identity(
        z in 1e-6f64..10.0,
        mu in -0.45f64..2.0,
        excess in 0.05f64..4.0,
    ) {
        // keep a = mu - kappa + 1/2 positive
        let kappa = mu + 0.5 - excess;
        let a = mu - kappa + 0.5;
        let b = 2.0 * mu + 1.0;
        let direct = whittaker_m(kappa, mu, z).unwrap();
        let composed = (-z / 2.0).exp() * z.powf(mu + 0.5) * kummer_1f1(a, b, z).unwrap();
        prop_assert!(
            (direct - composed).abs() <= 1e-12 * composed.abs().max(1e-300),
            "{direct} vs {composed}"
        );
    }

    #[test]
    fn shortlist_matches_bruteforce(seed in 0u64..5000, rho in 0.0f64..1.0, n in 1usize..24) {
        let g = random_channel(seed, n);
        let got = shortlist_ports(&g, rho).unwrap();
        let max_mag = g.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        let want: Vec<usize> = (0..n).filter(|&k| g[k].norm() >= rho * max_mag).collect();
        prop_assert_eq!(got.clone(), want);
        prop_assert!(!got.is_empty());
    }

    #[test]
    fn weights_unit_modulus_all_schemes(seed in 0u64..3000, n in 2usize..16) {
        let g = random_channel(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);

        let shortlist = shortlist_ports(&g, 0.3).unwrap();
        let plan = puma_weights(&g, &[shortlist.clone()]);
        for k in 0..n {
            let w = plan.weights[(k, 0)];
            if shortlist.contains(&k) {
                prop_assert!((w.norm() - 1.0).abs() < 1e-15);
                // co-phasing: conj(w)·g is real nonnegative
                let r = w.conj() * g[k];
                prop_assert!(r.im.abs() < 1e-12 && r.re >= -1e-15);
            } else {
                prop_assert!(w.norm() == 0.0);
            }
        }

        let cfg = ReceiverConfig::new(Scheme::Cuma, 2, 0.0, n).unwrap();
        let plan = cuma_weights(&g, &cfg, &mut rng).unwrap();
        for i in 0..2 {
            for k in 0..n {
                let w = plan.weights[(k, i)];
                prop_assert!(w.norm() == 0.0 || (w.norm() - 1.0).abs() < 1e-15);
            }
            prop_assert!(plan.chains[i].len() <= cfg.n_max);
        }

        let ch = fama_core::channel::ChannelRealization::new(g.clone(), vec![]).unwrap();
        let plan = sfama_select(&ch, 1.0, 1e-3);
        prop_assert_eq!(plan.chains[0].len(), 1);
        prop_assert!((plan.weights[(plan.chains[0][0], 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn histogram_density_integrates_to_one(
        seed in 0u64..2000,
        n in 1usize..400,
        bins in 1usize..40,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<f64> = (0..n).map(|_| rand::Rng::gen::<f64>(&mut rng) * 10.0 - 3.0).collect();
        let h = fama_core::montecarlo::histogram(&samples, bins, None).unwrap();
        let mass: f64 = h
            .density
            .iter()
            .enumerate()
            .map(|(i, d)| d * (h.edges[i + 1] - h.edges[i]))
            .sum();
        prop_assert!((mass - 1.0).abs() < 1e-9, "mass {mass}");
    }
}
