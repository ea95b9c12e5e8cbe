//! Experiment drivers: each maps a validated `RunConfig` onto trial-engine
//! and analysis calls, collects a `ResultTable`, and renders a stable CSV
//! with a metadata comment header. CSV bodies are byte-identical across
//! reruns and worker counts for a fixed seed.

use crate::config::{Experiment, RunConfig};
use crate::error::{CliError, CliResult};
use fama_core::analysis::{self, compute_moments};
use fama_core::montecarlo::{
    histogram_with_edges, ks_distance, rate_stderr, run_ber_trials, run_sir_samples, with_threads,
    ChannelSpec, ResultTable,
};
use fama_core::receiver::{ReceiverConfig, Scheme};

/// Result of one experiment: the flat metric table plus the rendered CSV.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: ResultTable,
    pub csv: String,
}

// 15-significant-digit float rendering; round-trips through parse.
fn fmt(x: f64) -> String {
    format!("{x:.15e}")
}

fn fnv1a(text: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

fn csv_header(cfg: &RunConfig, columns: &str) -> String {
    format!(
        "# experiment={}\n# seed={}\n# spec_hash={:016x}\n# version={}\n{columns}\n",
        cfg.experiment.name(),
        cfg.seed,
        fnv1a(&cfg.canonical()),
        env!("CARGO_PKG_VERSION"),
    )
}

/// Execute the configured experiment, write its CSV to `cfg.out`, and print
/// a one-line summary per sweep point.
pub fn run_experiment(cfg: &RunConfig) -> CliResult<ExperimentOutput> {
    cfg.validate()?;
    let out = with_threads(cfg.threads, || dispatch(cfg)).map_err(CliError::from)??;
    std::fs::write(&cfg.out, &out.csv)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", cfg.out.display())))?;
    println!("wrote {}", cfg.out.display());
    Ok(out)
}

fn dispatch(cfg: &RunConfig) -> CliResult<ExperimentOutput> {
    match cfg.experiment {
        Experiment::PdfZ => run_pdf_z(cfg),
        Experiment::RateVsUsers => run_rate_vs_users(cfg),
        Experiment::RhoNmaxSweep => run_rho_nmax(cfg),
        Experiment::NrfCompare => run_nrf_compare(cfg),
        Experiment::Custom => run_custom(cfg),
    }
}

fn run_pdf_z(cfg: &RunConfig) -> CliResult<ExperimentOutput> {
    let mut point = cfg.clone();
    // the sampling regime of the closed-form density
    point.scheme = Scheme::Puma;
    point.n_rf = 1;
    point.rho = 0.0;
    point.n_max = 0;
    let spec = point.experiment_spec()?;
    let rich = match &spec.channel {
        ChannelSpec::Rich(m) => m.clone(),
        ChannelSpec::Finite(_) => {
            return Err(CliError::config(
                "pdf-z requires channel.model = rich".to_string(),
            ))
        }
    };
    let run = run_sir_samples(&spec)?;
    let moments = compute_moments(&rich)?;

    let lo = run.z_samples.iter().copied().fold(f64::INFINITY, f64::min) * 0.999;
    let hi = run.z_samples.iter().copied().fold(0.0f64, f64::max) * 1.001;
    let edges: Vec<f64> = (0..=cfg.bins)
        .map(|i| lo * (hi / lo).powf(i as f64 / cfg.bins as f64))
        .collect();
    let hist = histogram_with_edges(&run.z_samples, &edges)?;

    let mut table = ResultTable::default();
    let mut csv = csv_header(cfg, "z,empirical_density,analytic_density");
    for i in 0..cfg.bins {
        let center = (edges[i] * edges[i + 1]).sqrt();
        let analytic = analysis::pdf_z(center, &moments, cfg.n_users)?;
        table.push(
            center,
            "empirical_density",
            hist.density[i],
            0.0,
            cfg.trials,
        );
        table.push(center, "analytic_density", analytic, 0.0, cfg.trials);
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt(center),
            fmt(hist.density[i]),
            fmt(analytic)
        ));
    }

    let cdf = analysis::ZCdf::build(&moments, cfg.n_users, lo, hi, 1500)?;
    let ks = ks_distance(&run.z_samples, |z| cdf.eval(z));
    table.push(0.0, "ks_distance", ks, 0.0, cfg.trials);
    println!(
        "pdf-z: N={} U={} trials={} rejected={} ks={ks:.4}",
        cfg.n_ports(),
        cfg.n_users,
        cfg.trials,
        run.rejected
    );
    Ok(ExperimentOutput { table, csv })
}

/// Scheme set compared by the sweep experiments: PUMA and CUMA at the
/// configured chain count (CUMA capped at 2), sFAMA single-chain.
fn comparison_receivers(cfg: &RunConfig, n_rf: usize) -> CliResult<Vec<ReceiverConfig>> {
    Ok(vec![
        ReceiverConfig::new(Scheme::Puma, n_rf, cfg.rho, cfg.resolved_n_max())?,
        ReceiverConfig::new(Scheme::Cuma, n_rf.min(2), cfg.rho, cfg.resolved_n_max())?,
        ReceiverConfig::new(Scheme::Sfama, 1, cfg.rho, cfg.resolved_n_max())?,
    ])
}

fn run_rate_vs_users(cfg: &RunConfig) -> CliResult<ExperimentOutput> {
    let base = cfg.experiment_spec()?;
    let bits = cfg.modulation.bits_per_symbol();
    let mut table = ResultTable::default();
    let mut csv = csv_header(
        cfg,
        "scheme,n_users,ber,ber_stderr,per_ue_rate,network_rate,network_rate_stderr,trials,rejected",
    );
    for receiver in comparison_receivers(cfg, cfg.n_rf)? {
        for &u in &cfg.u_list {
            let mut spec = base.clone();
            spec.receiver = receiver;
            spec.n_users = u;
            let est = run_ber_trials(&spec)?;
            let per_ue = analysis::bsc_rate(est.ber, 1, bits)?;
            let network = analysis::bsc_rate(est.ber, u, bits)?;
            let net_se = rate_stderr(est.ber, est.stderr, u, bits);
            let name = receiver.scheme.name();
            table.push(
                u as f64,
                &format!("{name}_ber"),
                est.ber,
                est.stderr,
                est.trials,
            );
            table.push(
                u as f64,
                &format!("{name}_network_rate"),
                network,
                net_se,
                est.trials,
            );
            csv.push_str(&format!(
                "{name},{u},{},{},{},{},{},{},{}\n",
                fmt(est.ber),
                fmt(est.stderr),
                fmt(per_ue),
                fmt(network),
                fmt(net_se),
                est.trials,
                est.rejected
            ));
            println!(
                "rate-vs-users: scheme={name} U={u} ber={:.4e} network_rate={network:.4}",
                est.ber
            );
        }
    }
    Ok(ExperimentOutput { table, csv })
}

fn run_rho_nmax(cfg: &RunConfig) -> CliResult<ExperimentOutput> {
    let base = cfg.experiment_spec()?;
    let bits = cfg.modulation.bits_per_symbol();
    let n = cfg.n_ports();
    let nmax_list: Vec<usize> = if cfg.nmax_list.is_empty() {
        let mut v = vec![(n / 4).max(1), (n / 2).max(1), n];
        v.dedup();
        v
    } else {
        cfg.nmax_list.clone()
    };
    let mut table = ResultTable::default();
    let mut csv = csv_header(
        cfg,
        "rho,n_max,n_users,ber,ber_stderr,network_rate,network_rate_stderr,trials",
    );
    for &rho in &cfg.rho_list {
        for &nmax in &nmax_list {
            let mut spec = base.clone();
            spec.receiver = ReceiverConfig::new(Scheme::Puma, cfg.n_rf, rho, nmax)?;
            let est = run_ber_trials(&spec)?;
            let network = analysis::bsc_rate(est.ber, cfg.n_users, bits)?;
            let net_se = rate_stderr(est.ber, est.stderr, cfg.n_users, bits);
            table.push(
                rho,
                &format!("network_rate_nmax{nmax}"),
                network,
                net_se,
                est.trials,
            );
            csv.push_str(&format!(
                "{},{nmax},{},{},{},{},{},{}\n",
                fmt(rho),
                cfg.n_users,
                fmt(est.ber),
                fmt(est.stderr),
                fmt(network),
                fmt(net_se),
                est.trials
            ));
            println!(
                "rho-nmax-sweep: rho={rho} n_max={nmax} U={} network_rate={network:.4}",
                cfg.n_users
            );
        }
    }
    Ok(ExperimentOutput { table, csv })
}

fn run_nrf_compare(cfg: &RunConfig) -> CliResult<ExperimentOutput> {
    let base = cfg.experiment_spec()?;
    let bits = cfg.modulation.bits_per_symbol();
    let mut combos: Vec<ReceiverConfig> = Vec::new();
    for &n_rf in &cfg.nrf_list {
        combos.push(ReceiverConfig::new(
            Scheme::Puma,
            n_rf,
            cfg.rho,
            cfg.resolved_n_max(),
        )?);
    }
    for &n_rf in cfg.nrf_list.iter().filter(|&&n| n <= 2) {
        combos.push(ReceiverConfig::new(
            Scheme::Cuma,
            n_rf,
            cfg.rho,
            cfg.resolved_n_max(),
        )?);
    }
    combos.push(ReceiverConfig::new(
        Scheme::Sfama,
        1,
        cfg.rho,
        cfg.resolved_n_max(),
    )?);

    let mut table = ResultTable::default();
    let mut csv = csv_header(
        cfg,
        "scheme,n_rf,n_users,ber,ber_stderr,network_rate,network_rate_stderr,trials",
    );
    for receiver in combos {
        let mut spec = base.clone();
        spec.receiver = receiver;
        let est = run_ber_trials(&spec)?;
        let network = analysis::bsc_rate(est.ber, cfg.n_users, bits)?;
        let net_se = rate_stderr(est.ber, est.stderr, cfg.n_users, bits);
        let name = receiver.scheme.name();
        table.push(
            receiver.n_rf as f64,
            &format!("{name}_network_rate"),
            network,
            net_se,
            est.trials,
        );
        csv.push_str(&format!(
            "{name},{},{},{},{},{},{},{}\n",
            receiver.n_rf,
            cfg.n_users,
            fmt(est.ber),
            fmt(est.stderr),
            fmt(network),
            fmt(net_se),
            est.trials
        ));
        println!(
            "nrf-compare: scheme={name} n_rf={} U={} network_rate={network:.4}",
            receiver.n_rf, cfg.n_users
        );
    }
    Ok(ExperimentOutput { table, csv })
}

fn run_custom(cfg: &RunConfig) -> CliResult<ExperimentOutput> {
    let spec = cfg.experiment_spec()?;
    let bits = cfg.modulation.bits_per_symbol();
    let est = run_ber_trials(&spec)?;
    let per_ue = analysis::bsc_rate(est.ber, 1, bits)?;
    let network = analysis::bsc_rate(est.ber, cfg.n_users, bits)?;
    let mut table = ResultTable::default();
    table.push(cfg.n_users as f64, "ber", est.ber, est.stderr, est.trials);
    table.push(
        cfg.n_users as f64,
        "network_rate",
        network,
        rate_stderr(est.ber, est.stderr, cfg.n_users, bits),
        est.trials,
    );
    let mut csv = csv_header(
        cfg,
        "scheme,n_rf,n_users,ber,ber_stderr,per_ue_rate,network_rate,trials,rejected",
    );
    csv.push_str(&format!(
        "{},{},{},{},{},{},{},{},{}\n",
        cfg.scheme.name(),
        cfg.n_rf,
        cfg.n_users,
        fmt(est.ber),
        fmt(est.stderr),
        fmt(per_ue),
        fmt(network),
        est.trials,
        est.rejected
    ));
    println!(
        "custom: scheme={} U={} ber={:.4e} network_rate={network:.4}",
        cfg.scheme.name(),
        cfg.n_users,
        est.ber
    );
    Ok(ExperimentOutput { table, csv })
}
