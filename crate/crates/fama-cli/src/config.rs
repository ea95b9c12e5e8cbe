//! Plain-text run configuration: `key = value` lines grouped under
//! `[channel]`, `[receiver]` and `[run]` section headers, `#` comments.
//! Unknown keys and out-of-range values are rejected with the offending
//! line or field named.

use crate::error::{CliError, CliResult};
use fama_core::channel::{
    AngleLaw, CouplingModel, FasGeometry, FiniteScatteringModel, RichScatteringModel,
};
use fama_core::modem::Modulation;
use fama_core::montecarlo::{ChannelSpec, ExperimentSpec};
use fama_core::receiver::{ReceiverConfig, Scheme};
use std::path::{Path, PathBuf};

/// Experiment selector; mirrors the preset names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    PdfZ,
    RateVsUsers,
    RhoNmaxSweep,
    NrfCompare,
    Custom,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::PdfZ => "pdf-z",
            Experiment::RateVsUsers => "rate-vs-users",
            Experiment::RhoNmaxSweep => "rho-nmax-sweep",
            Experiment::NrfCompare => "nrf-compare",
            Experiment::Custom => "custom",
        }
    }

    fn parse(s: &str) -> CliResult<Self> {
        match s {
            "pdf-z" => Ok(Experiment::PdfZ),
            "rate-vs-users" => Ok(Experiment::RateVsUsers),
            "rho-nmax-sweep" => Ok(Experiment::RhoNmaxSweep),
            "nrf-compare" => Ok(Experiment::NrfCompare),
            "custom" => Ok(Experiment::Custom),
            other => Err(CliError::config(format!(
                "run.experiment: unknown experiment {other:?} (expected pdf-z, \
                 rate-vs-users, rho-nmax-sweep, nrf-compare or custom)"
            ))),
        }
    }
}

/// Fully validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    // [channel]
    pub model: String,
    pub n1: usize,
    pub n2: usize,
    pub w1: f64,
    pub w2: f64,
    pub sigma_g: f64,
    pub rice_k: f64,
    pub n_paths: usize,
    pub coupling: String,
    pub z_termination: f64,
    pub dipole_length: f64,
    pub dipole_width: f64,
    pub impedance_file: Option<PathBuf>,
    // [receiver]
    pub scheme: Scheme,
    pub n_rf: usize,
    pub rho: f64,
    /// 0 means "all ports".
    pub n_max: usize,
    // [run]
    pub n_users: usize,
    pub snr_db: f64,
    pub modulation: Modulation,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: usize,
    pub bins: usize,
    pub u_list: Vec<usize>,
    pub rho_list: Vec<f64>,
    pub nmax_list: Vec<usize>,
    pub nrf_list: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: Experiment::Custom,
            model: "rich".into(),
            n1: 4,
            n2: 4,
            w1: 3.0,
            w2: 1.6,
            sigma_g: 1.0,
            rice_k: 0.0,
            n_paths: 50,
            coupling: "identity".into(),
            z_termination: 50.0,
            dipole_length: 0.5,
            dipole_width: 0.005,
            impedance_file: None,
            scheme: Scheme::Puma,
            n_rf: 1,
            rho: 0.0,
            n_max: 0,
            n_users: 5,
            snr_db: 50.0,
            modulation: Modulation::Mqam(4),
            trials: 10_000,
            seed: 1,
            out: PathBuf::from("results.csv"),
            threads: 0,
            bins: 60,
            u_list: vec![4, 8, 12],
            rho_list: vec![0.0, 0.2, 0.4, 0.6],
            nmax_list: vec![],
            nrf_list: vec![1, 2],
        }
    }
}

/// Named experiment presets at desk scale.
pub fn preset(name: &str) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::default();
    match name {
        "pdf-z" => {
            cfg.experiment = Experiment::PdfZ;
            cfg.n_users = 5;
            cfg.trials = 10_000;
            cfg.out = PathBuf::from("pdf_z.csv");
        }
        "rate-vs-users" => {
            cfg.experiment = Experiment::RateVsUsers;
            cfg.u_list = vec![4, 8, 12];
            cfg.trials = 4_000;
            cfg.out = PathBuf::from("rate_vs_users.csv");
        }
        "rho-nmax-sweep" => {
            cfg.experiment = Experiment::RhoNmaxSweep;
            cfg.n1 = 16;
            cfg.n2 = 4;
            cfg.n_users = 8;
            cfg.trials = 4_000;
            cfg.out = PathBuf::from("rho_nmax.csv");
        }
        "nrf-compare" => {
            cfg.experiment = Experiment::NrfCompare;
            cfg.n1 = 16;
            cfg.n2 = 4;
            cfg.n_users = 8;
            cfg.trials = 4_000;
            cfg.out = PathBuf::from("nrf_compare.csv");
        }
        "custom" => {}
        other => {
            return Err(CliError::config(format!(
                "unknown preset {other:?} (expected pdf-z, rate-vs-users, \
                 rho-nmax-sweep, nrf-compare or custom)"
            )))
        }
    }
    Ok(cfg)
}

fn parse_list<T: std::str::FromStr>(field: &str, text: &str) -> CliResult<Vec<T>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(part.parse::<T>().map_err(|_| {
            CliError::config(format!("{field}: cannot parse list element {part:?}"))
        })?);
    }
    Ok(out)
}

impl RunConfig {
    /// Apply the config document `text` on top of `self`.
    pub fn apply_document(&mut self, text: &str) -> CliResult<()> {
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(CliError::config(format!(
                        "line {lineno}: malformed section header {line:?}"
                    )));
                }
                let name = line[1..line.len() - 1].trim();
                if !matches!(name, "channel" | "receiver" | "run") {
                    return Err(CliError::config(format!(
                        "line {lineno}: unknown section [{name}]"
                    )));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!(
                    "line {lineno}: expected `key = value`, got {line:?}"
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if section.is_empty() {
                return Err(CliError::config(format!(
                    "line {lineno}: key {key:?} appears before any [section] header"
                )));
            }
            self.set_key(&section, key, value)
                .map_err(|e| CliError::config(format!("line {lineno}: {e}")))?;
        }
        Ok(())
    }

    /// Apply one `section.key=value` override (the `--set` flag).
    pub fn apply_override(&mut self, kv: &str) -> CliResult<()> {
        let (key, value) = kv.split_once('=').ok_or_else(|| {
            CliError::config(format!("--set expects section.key=value, got {kv:?}"))
        })?;
        let (section, key) = key.trim().split_once('.').ok_or_else(|| {
            CliError::config(format!("--set expects section.key=value, got {kv:?}"))
        })?;
        self.set_key(section, key, value.trim())
    }

    fn set_key(&mut self, section: &str, key: &str, value: &str) -> CliResult<()> {
        fn num<T: std::str::FromStr>(field: &str, v: &str) -> CliResult<T> {
            v.parse::<T>()
                .map_err(|_| CliError::config(format!("{field}: cannot parse {v:?}")))
        }
        match (section, key) {
            ("channel", "model") => {
                if !matches!(value, "rich" | "finite") {
                    return Err(CliError::config(format!(
                        "channel.model must be rich or finite, got {value:?}"
                    )));
                }
                self.model = value.into();
            }
            ("channel", "n1") => self.n1 = num("channel.n1", value)?,
            ("channel", "n2") => self.n2 = num("channel.n2", value)?,
            ("channel", "w1") => self.w1 = num("channel.w1", value)?,
            ("channel", "w2") => self.w2 = num("channel.w2", value)?,
            ("channel", "sigma_g") => self.sigma_g = num("channel.sigma_g", value)?,
            ("channel", "rice_k") => self.rice_k = num("channel.rice_k", value)?,
            ("channel", "n_paths") => self.n_paths = num("channel.n_paths", value)?,
            ("channel", "coupling") => {
                if !matches!(value, "identity" | "dipole-emf" | "from-file") {
                    return Err(CliError::config(format!(
                        "channel.coupling must be identity, dipole-emf or from-file, got {value:?}"
                    )));
                }
                self.coupling = value.into();
            }
            ("channel", "z_termination") => {
                self.z_termination = num("channel.z_termination", value)?
            }
            ("channel", "dipole_length") => {
                self.dipole_length = num("channel.dipole_length", value)?
            }
            ("channel", "dipole_width") => self.dipole_width = num("channel.dipole_width", value)?,
            ("channel", "impedance_file") => {
                self.impedance_file = if value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            ("receiver", "scheme") => {
                self.scheme = value
                    .parse::<Scheme>()
                    .map_err(|e| CliError::config(format!("receiver.scheme: {e}")))?
            }
            ("receiver", "n_rf") => self.n_rf = num("receiver.n_rf", value)?,
            ("receiver", "rho") => self.rho = num("receiver.rho", value)?,
            ("receiver", "n_max") => self.n_max = num("receiver.n_max", value)?,
            ("run", "experiment") => self.experiment = Experiment::parse(value)?,
            ("run", "n_users") => self.n_users = num("run.n_users", value)?,
            ("run", "snr_db") => self.snr_db = num("run.snr_db", value)?,
            ("run", "modulation") => {
                self.modulation = value
                    .parse::<Modulation>()
                    .map_err(|e| CliError::config(format!("run.modulation: {e}")))?
            }
            ("run", "trials") => self.trials = num("run.trials", value)?,
            ("run", "seed") => self.seed = num("run.seed", value)?,
            ("run", "out") => self.out = PathBuf::from(value),
            ("run", "threads") => self.threads = num("run.threads", value)?,
            ("run", "bins") => self.bins = num("run.bins", value)?,
            ("run", "u_list") => self.u_list = parse_list("run.u_list", value)?,
            ("run", "rho_list") => self.rho_list = parse_list("run.rho_list", value)?,
            ("run", "nmax_list") => self.nmax_list = parse_list("run.nmax_list", value)?,
            ("run", "nrf_list") => self.nrf_list = parse_list("run.nrf_list", value)?,
            (s, k) => {
                return Err(CliError::config(format!("unknown key {s}.{k}")));
            }
        }
        Ok(())
    }

    /// Validate every field against its documented constraint.
    pub fn validate(&self) -> CliResult<()> {
        let fail = |msg: String| Err(CliError::config(msg));
        if self.n1 < 1 || self.n2 < 1 {
            return fail(format!(
                "channel.n1/n2 must be >= 1 (got {}x{})",
                self.n1, self.n2
            ));
        }
        for (name, w, n) in [("w1", self.w1, self.n1), ("w2", self.w2, self.n2)] {
            if !w.is_finite() || w < 0.0 || (n > 1 && w <= 0.0) {
                return fail(format!(
                    "channel.{name} must be > 0 when that dimension has more than one port (got {w})"
                ));
            }
        }
        if !(self.sigma_g > 0.0) {
            return fail(format!(
                "channel.sigma_g must be > 0 (got {})",
                self.sigma_g
            ));
        }
        if !(self.rice_k >= 0.0) || !self.rice_k.is_finite() {
            return fail(format!(
                "channel.rice_k must be finite and >= 0 (got {})",
                self.rice_k
            ));
        }
        if self.n_paths < 1 {
            return fail("channel.n_paths must be >= 1".into());
        }
        if !(self.z_termination > 0.0) {
            return fail(format!(
                "channel.z_termination must be > 0 (got {})",
                self.z_termination
            ));
        }
        if self.coupling == "from-file" && self.impedance_file.is_none() {
            return fail("channel.impedance_file is required for from-file coupling".into());
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return fail(format!("receiver.rho must be in [0,1] (got {})", self.rho));
        }
        if self.n_rf < 1 {
            return fail("receiver.n_rf must be >= 1".into());
        }
        if self.scheme == Scheme::Sfama && self.n_rf != 1 {
            return fail("receiver.n_rf must be 1 for sfama".into());
        }
        if self.scheme == Scheme::Cuma && self.n_rf > 2 {
            return fail("receiver.n_rf must be <= 2 for cuma".into());
        }
        if self.n_users < 1 {
            return fail("run.n_users must be >= 1".into());
        }
        if !self.snr_db.is_finite() {
            return fail("run.snr_db must be finite".into());
        }
        if self.trials < 1 {
            return fail("run.trials must be >= 1".into());
        }
        if self.bins < 1 {
            return fail("run.bins must be >= 1".into());
        }
        for (name, list_ok) in [
            ("run.u_list", self.u_list.iter().all(|&u| u >= 1)),
            ("run.nrf_list", self.nrf_list.iter().all(|&n| n >= 1)),
            ("run.nmax_list", self.nmax_list.iter().all(|&n| n >= 1)),
        ] {
            if !list_ok {
                return fail(format!("{name} entries must be >= 1"));
            }
        }
        if !self.rho_list.iter().all(|&r| (0.0..=1.0).contains(&r)) {
            return fail("run.rho_list entries must be in [0,1]".into());
        }
        Ok(())
    }

    /// Number of ports; `n_max = 0` resolves to this.
    pub fn n_ports(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn resolved_n_max(&self) -> usize {
        if self.n_max == 0 {
            self.n_ports()
        } else {
            self.n_max
        }
    }

    fn geometry(&self) -> CliResult<FasGeometry> {
        Ok(FasGeometry::new(self.n1, self.n2, self.w1, self.w2)?)
    }

    fn coupling_model(&self) -> CliResult<CouplingModel> {
        Ok(match self.coupling.as_str() {
            "identity" => CouplingModel::identity(),
            "dipole-emf" => CouplingModel::dipole_emf(
                self.z_termination,
                self.dipole_length,
                self.dipole_width,
            )?,
            "from-file" => {
                let path = self.impedance_file.as_ref().expect("validated");
                CouplingModel::from_impedance_file(path, self.z_termination)?
            }
            other => unreachable!("validated coupling kind {other}"),
        })
    }

    /// Build the trial-engine spec this configuration describes.
    pub fn experiment_spec(&self) -> CliResult<ExperimentSpec> {
        self.validate()?;
        let geometry = self.geometry()?;
        let channel = match self.model.as_str() {
            "rich" => ChannelSpec::Rich(RichScatteringModel::new(geometry, self.sigma_g)?),
            "finite" => ChannelSpec::Finite(FiniteScatteringModel::new(
                geometry,
                self.sigma_g,
                self.rice_k,
                self.n_paths,
                AngleLaw::UniformAzimuthElevation,
            )?),
            other => unreachable!("validated model {other}"),
        };
        let receiver =
            ReceiverConfig::new(self.scheme, self.n_rf, self.rho, self.resolved_n_max())?;
        Ok(ExperimentSpec {
            channel,
            coupling: self.coupling_model()?,
            receiver,
            n_users: self.n_users,
            snr_db: self.snr_db,
            modulation: self.modulation,
            trials: self.trials,
            master_seed: self.seed,
        })
    }

    /// Canonical key=value rendering; feeds the CSV metadata hash and the
    /// round-trip test.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        s.push_str("[channel]\n");
        s.push_str(&format!("model = {}\n", self.model));
        s.push_str(&format!("n1 = {}\n", self.n1));
        s.push_str(&format!("n2 = {}\n", self.n2));
        s.push_str(&format!("w1 = {}\n", self.w1));
        s.push_str(&format!("w2 = {}\n", self.w2));
        s.push_str(&format!("sigma_g = {}\n", self.sigma_g));
        s.push_str(&format!("rice_k = {}\n", self.rice_k));
        s.push_str(&format!("n_paths = {}\n", self.n_paths));
        s.push_str(&format!("coupling = {}\n", self.coupling));
        s.push_str(&format!("z_termination = {}\n", self.z_termination));
        s.push_str(&format!("dipole_length = {}\n", self.dipole_length));
        s.push_str(&format!("dipole_width = {}\n", self.dipole_width));
        if let Some(p) = &self.impedance_file {
            s.push_str(&format!("impedance_file = {}\n", p.display()));
        }
        s.push_str("[receiver]\n");
        s.push_str(&format!("scheme = {}\n", self.scheme.name()));
        s.push_str(&format!("n_rf = {}\n", self.n_rf));
        s.push_str(&format!("rho = {}\n", self.rho));
        s.push_str(&format!("n_max = {}\n", self.n_max));
        s.push_str("[run]\n");
        s.push_str(&format!("experiment = {}\n", self.experiment.name()));
        s.push_str(&format!("n_users = {}\n", self.n_users));
        s.push_str(&format!("snr_db = {}\n", self.snr_db));
        s.push_str(&format!("modulation = {}\n", self.modulation.name()));
        // threads and out are execution details, not part of the run identity
        s.push_str(&format!("trials = {}\n", self.trials));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("bins = {}\n", self.bins));
        let join_us = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        s.push_str(&format!("u_list = {}\n", join_us(&self.u_list)));
        s.push_str(&format!(
            "rho_list = {}\n",
            self.rho_list
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
        s.push_str(&format!("nmax_list = {}\n", join_us(&self.nmax_list)));
        s.push_str(&format!("nrf_list = {}\n", join_us(&self.nrf_list)));
        s
    }
}

/// Parse a config document on top of the defaults and validate.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::default();
    cfg.apply_document(text)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config_file(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let cfg = parse_config("").unwrap();
        let d = RunConfig::default();
        assert_eq!(cfg.canonical(), d.canonical());
    }

    #[test]
    fn rejects_out_of_range_rho() {
        let err = parse_config("[receiver]\nrho = 1.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("rho") && msg.contains("[0,1]"), "{msg}");
    }

    #[test]
    fn rejects_unknown_keys_with_line_numbers() {
        let err = parse_config("[channel]\nbogus = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("bogus"), "{msg}");
        let err = parse_config("n1 = 3\n").unwrap_err();
        assert!(err.to_string().contains("before any [section]"));
        let err = parse_config("[nope]\n").unwrap_err();
        assert!(err.to_string().contains("unknown section"));
        let err = parse_config("[run]\ntrials\n").unwrap_err();
        assert!(err.to_string().contains("key = value"));
    }

    #[test]
    fn document_round_trips_through_canonical_form() {
        let doc = "\
[channel]
model = rich
n1 = 8
n2 = 2
w1 = 2.5
w2 = 0.5
# a comment
[receiver]
scheme = cuma
n_rf = 2
rho = 0.3
[run]
experiment = pdf-z
n_users = 8
trials = 500
seed = 42
";
        let cfg = parse_config(doc).unwrap();
        let reparsed = parse_config(&cfg.canonical()).unwrap();
        assert_eq!(cfg.canonical(), reparsed.canonical());
        assert_eq!(cfg.experiment, Experiment::PdfZ);
        assert_eq!(cfg.n1, 8);
        assert_eq!(cfg.scheme, Scheme::Cuma);
    }

    #[test]
    fn preset_matches_field_for_field_document() {
        // the pdf-z preset equals the explicit document with the same fields
        let p = preset("pdf-z").unwrap();
        let doc = "\
[run]
experiment = pdf-z
n_users = 5
trials = 10000
out = pdf_z.csv
";
        let cfg = parse_config(doc).unwrap();
        assert_eq!(p.canonical(), cfg.canonical());
        assert!(preset("no-such").is_err());
    }

    #[test]
    fn overrides_apply_after_document() {
        let mut cfg = preset("pdf-z").unwrap();
        cfg.apply_override("run.trials=777").unwrap();
        cfg.apply_override("channel.n1 = 6").unwrap();
        assert_eq!(cfg.trials, 777);
        assert_eq!(cfg.n1, 6);
        assert!(cfg.apply_override("bad").is_err());
        assert!(cfg.apply_override("run.widgets=1").is_err());
    }

    #[test]
    fn sfama_multi_chain_rejected() {
        let err = parse_config("[receiver]\nscheme = sfama\nn_rf = 2\n").unwrap_err();
        assert!(err.to_string().contains("sfama"));
    }

    #[test]
    fn experiment_spec_resolves_nmax() {
        let cfg = parse_config("[channel]\nn1 = 3\nn2 = 2\nw1 = 1\nw2 = 1\n").unwrap();
        assert_eq!(cfg.resolved_n_max(), 6);
        let spec = cfg.experiment_spec().unwrap();
        assert_eq!(spec.receiver.n_max, 6);
    }
}
