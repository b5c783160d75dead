//! Experiment configuration: a TOML document with one table per concern.
//!
//! ```toml
//! [potential]
//! family = "v1"
//! omega0 = 1.0
//! k = "3"
//! ka = 1.0
//! kb = 0.4
//!
//! [initial_state]
//! chart = "polar"
//! r = 1.0
//! phi = 0.4
//! pr = 0.3
//! pphi = 0.5
//!
//! [integrator]
//! scheme = "leapfrog"
//! step = 0.0015707963267948967
//! horizon = 314.1592653589793
//! ```
//!
//! Every table except `[potential]` is optional. See `docs/config.md` for
//! the full schema.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use superint_core::bracket::{BracketConfig, Scheme, DEFAULT_FD_STEP, DEFAULT_RANK_TOL};
use superint_core::dynamics::{IntegrateOptions, IntegratorScheme, GUARD_ZONE};
use superint_core::{CartesianState, Canonical, PhaseState, PolarState, PotentialSpec, Rational};

/// Rational index `k`, written as `"p/q"`, an integer, or a decimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KValue(pub Rational);

impl Serialize for KValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for KValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Float(f64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Int(n) => n.to_string(),
            Raw::Float(v) => format!("{v}"),
            Raw::Text(s) => s,
        };
        text.trim()
            .parse::<Rational>()
            .map(KValue)
            .map_err(|e| serde::de::Error::custom(format!("invalid k `{text}`: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialConfig {
    Ho {
        omega1: f64,
        omega2: f64,
    },
    Gensw {
        omega0: f64,
        nx: u32,
        ny: u32,
        k1: f64,
        k2: f64,
    },
    Ttw {
        omega0: f64,
        k: KValue,
        alpha: f64,
        beta: f64,
    },
    V1 {
        omega0: f64,
        k: KValue,
        ka: f64,
        kb: f64,
    },
    V2 {
        omega0: f64,
        k: KValue,
        ka: f64,
        kb: f64,
    },
}

impl PotentialConfig {
    pub fn spec(&self) -> PotentialSpec {
        match *self {
            PotentialConfig::Ho { omega1, omega2 } => PotentialSpec::Ho { omega1, omega2 },
            PotentialConfig::Gensw {
                omega0,
                nx,
                ny,
                k1,
                k2,
            } => PotentialSpec::GenSw {
                omega0,
                nx,
                ny,
                k1,
                k2,
            },
            PotentialConfig::Ttw {
                omega0,
                k,
                alpha,
                beta,
            } => PotentialSpec::Ttw {
                omega0,
                k: k.0,
                alpha,
                beta,
            },
            PotentialConfig::V1 { omega0, k, ka, kb } => PotentialSpec::V1 {
                omega0,
                k: k.0,
                ka,
                kb,
            },
            PotentialConfig::V2 { omega0, k, ka, kb } => PotentialSpec::V2 {
                omega0,
                k: k.0,
                ka,
                kb,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialState {
    Polar { r: f64, phi: f64, pr: f64, pphi: f64 },
    Cartesian { x: f64, y: f64, px: f64, py: f64 },
}

impl InitialState {
    pub fn phase_state(&self) -> PhaseState {
        match *self {
            InitialState::Polar { r, phi, pr, pphi } => PolarState::new(r, phi, pr, pphi).into(),
            InitialState::Cartesian { x, y, px, py } => CartesianState::new(x, y, px, py).into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Leapfrog,
    Rk4,
    Yoshida4,
}

impl From<SchemeName> for IntegratorScheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Leapfrog => IntegratorScheme::Leapfrog,
            SchemeName::Rk4 => IntegratorScheme::Rk4,
            SchemeName::Yoshida4 => IntegratorScheme::Yoshida4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub scheme: SchemeName,
    pub step: f64,
    pub horizon: f64,
    pub decimation: usize,
    /// Relative drift each invariant must stay under for the summary to
    /// flag it as conserved.
    pub drift_threshold: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeName::Leapfrog,
            step: 1e-3,
            horizon: 10.0,
            decimation: 1,
            drift_threshold: 1e-7,
        }
    }
}

impl IntegratorConfig {
    pub fn options(&self) -> IntegrateOptions {
        IntegrateOptions::new(self.step, self.horizon, self.scheme.into()).with_decimation(self.decimation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeScheme {
    CentralFd,
    Dual,
}

mod seed_format {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => u64::try_from(v).map_err(|_| serde::de::Error::custom("seed must be non-negative")),
            Raw::Text(t) => t
                .trim()
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("invalid seed `{t}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerificationConfig {
    pub fd_step: f64,
    pub scheme: DerivativeScheme,
    pub samples: usize,
    /// Written as a TOML integer, or as a decimal string above `i64::MAX`.
    #[serde(with = "seed_format")]
    pub seed: u64,
    pub rank_tol: f64,
    /// FD steps for the informational residual-vs-step sweep.
    pub fd_sweep: Vec<f64>,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            fd_step: DEFAULT_FD_STEP,
            scheme: DerivativeScheme::CentralFd,
            samples: 200,
            seed: 42,
            rank_tol: DEFAULT_RANK_TOL,
            fd_sweep: vec![1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2],
        }
    }
}

impl VerificationConfig {
    pub fn bracket(&self) -> BracketConfig {
        self.bracket_with_step(self.fd_step)
    }

    pub fn bracket_with_step(&self, fd_step: f64) -> BracketConfig {
        BracketConfig {
            fd_step,
            scheme: match self.scheme {
                DerivativeScheme::CentralFd => Scheme::CentralFd,
                DerivativeScheme::Dual => Scheme::Dual,
            },
            rank_tol: self.rank_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosureConfig {
    pub eps: f64,
    /// Longest trajectory the closure search will integrate; a heuristic
    /// horizon beyond it makes the result inconclusive.
    pub max_horizon: f64,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            max_horizon: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub trajectory: String,
    pub summary: String,
    pub report: String,
    pub closure: String,
    pub orbit: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            trajectory: "trajectory.csv".into(),
            summary: "summary.json".into(),
            report: "report.json".into(),
            closure: "closure.json".into(),
            orbit: "orbit.csv".into(),
        }
    }
}

impl OutputConfig {
    pub fn path(&self, file: &str) -> PathBuf {
        self.directory.join(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: PotentialConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub verification: VerificationConfig,
    #[serde(default)]
    pub closure: ClosureConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// What the configuration will be used for; trajectories need stricter
/// checks than the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Simulate,
    Verify,
    Closure,
}

/// A configuration problem, pointing at the offending line when it can
/// be located.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of `key = ...` inside `[section]`, falling back to the
/// section header, or `None` if neither appears.
pub fn locate(doc: &str, section: &str, key: Option<&str>) -> Option<usize> {
    let mut in_section = false;
    let mut header = None;
    for (i, raw) in doc.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let name = line.trim_start_matches('[').split(']').next().unwrap_or("").trim();
            in_section = name == section;
            if in_section && header.is_none() {
                header = Some(i + 1);
            }
            continue;
        }
        if in_section {
            if let Some(key) = key {
                let lhs = line.split('=').next().unwrap_or("").trim().trim_matches('"');
                if line.contains('=') && lhs == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

fn line_of_offset(doc: &str, offset: usize) -> usize {
    doc[..offset.min(doc.len())].matches('\n').count() + 1
}

struct Checker<'a> {
    doc: &'a str,
    errors: Vec<ConfigError>,
}

impl Checker<'_> {
    fn fail(&mut self, section: &str, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line: locate(self.doc, section, Some(key)),
            key: format!("{section}.{key}"),
            message: message.into(),
        });
    }

    fn finite(&mut self, section: &str, key: &str, v: f64) -> bool {
        if !v.is_finite() {
            self.fail(section, key, format!("must be finite (got {v})"));
        }
        v.is_finite()
    }

    fn non_negative(&mut self, section: &str, key: &str, v: f64) {
        if self.finite(section, key, v) && v < 0.0 {
            self.fail(section, key, format!("must be >= 0 (got {v})"));
        }
    }

    fn positive(&mut self, section: &str, key: &str, v: f64) {
        if self.finite(section, key, v) && v <= 0.0 {
            self.fail(section, key, format!("must be > 0 (got {v})"));
        }
    }
}

impl ExperimentConfig {
    /// Parse and validate a TOML document.
    pub fn parse(doc: &str, purpose: Purpose) -> Result<Self, Vec<ConfigError>> {
        let cfg: ExperimentConfig = toml::from_str(doc).map_err(|e| {
            vec![ConfigError {
                line: e.span().map(|s| line_of_offset(doc, s.start)),
                key: "document".into(),
                message: e.message().to_string(),
            }]
        })?;
        cfg.validate(doc, purpose)?;
        Ok(cfg)
    }

    pub fn load(path: &Path, purpose: Purpose) -> Result<Self, Vec<ConfigError>> {
        let doc = std::fs::read_to_string(path).map_err(|e| {
            vec![ConfigError {
                line: None,
                key: path.display().to_string(),
                message: format!("cannot read configuration: {e}"),
            }]
        })?;
        Self::parse(&doc, purpose)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn validate(&self, doc: &str, purpose: Purpose) -> Result<(), Vec<ConfigError>> {
        let mut c = Checker {
            doc,
            errors: Vec::new(),
        };
        let p = "potential";
        match self.potential {
            PotentialConfig::Ho { omega1, omega2 } => {
                c.non_negative(p, "omega1", omega1);
                c.non_negative(p, "omega2", omega2);
            }
            PotentialConfig::Gensw {
                omega0,
                nx,
                ny,
                k1,
                k2,
            } => {
                c.non_negative(p, "omega0", omega0);
                c.finite(p, "k1", k1);
                c.finite(p, "k2", k2);
                if nx == 0 {
                    c.fail(p, "nx", "must be >= 1");
                }
                if ny == 0 {
                    c.fail(p, "ny", "must be >= 1");
                }
            }
            PotentialConfig::Ttw {
                omega0,
                alpha,
                beta,
                ..
            } => {
                c.non_negative(p, "omega0", omega0);
                if purpose == Purpose::Verify {
                    c.finite(p, "alpha", alpha);
                    c.finite(p, "beta", beta);
                } else {
                    c.positive(p, "alpha", alpha);
                    c.positive(p, "beta", beta);
                }
            }
            PotentialConfig::V1 { omega0, ka, kb, .. } | PotentialConfig::V2 { omega0, ka, kb, .. } => {
                c.non_negative(p, "omega0", omega0);
                let ok = c.finite(p, "ka", ka) & c.finite(p, "kb", kb);
                if ok && purpose != Purpose::Verify && ka <= kb.abs() {
                    c.fail(
                        p,
                        "ka",
                        format!("trajectories require k_a > |k_b| so both wedge edges repel (k_a = {ka}, k_b = {kb})"),
                    );
                }
            }
        }

        let pot = self.potential.spec();
        if purpose != Purpose::Verify {
            match self.initial_state {
                None => c.errors.push(ConfigError {
                    line: None,
                    key: "initial_state".into(),
                    message: "an [initial_state] table is required".into(),
                }),
                Some(state) => self.check_state(&mut c, &pot, state),
            }
            let s = "integrator";
            let i = &self.integrator;
            c.positive(s, "step", i.step);
            c.positive(s, "horizon", i.horizon);
            if i.step.is_finite() && i.horizon.is_finite() && i.step > i.horizon && i.horizon > 0.0 {
                c.fail(s, "step", format!("step {} exceeds horizon {}", i.step, i.horizon));
            }
            if i.decimation == 0 {
                c.fail(s, "decimation", "must be >= 1");
            }
            c.positive(s, "drift_threshold", i.drift_threshold);
        }
        if purpose == Purpose::Closure {
            c.positive("closure", "eps", self.closure.eps);
            c.positive("closure", "max_horizon", self.closure.max_horizon);
            if pot.k().is_none() && !matches!(pot, PotentialSpec::Ho { .. } | PotentialSpec::GenSw { .. }) {
                c.fail("potential", "family", "closure needs a potential with a period heuristic");
            }
        }
        if purpose == Purpose::Verify {
            let s = "verification";
            let v = &self.verification;
            if let Err(e) = v.bracket().validate() {
                c.fail(s, "fd_step", format!("{e}; the step must lie in (1e-12, 1e-2]"));
            }
            if v.samples == 0 {
                c.fail(s, "samples", "must be >= 1");
            }
            c.positive(s, "rank_tol", v.rank_tol);
            for h in &v.fd_sweep {
                if v.bracket_with_step(*h).validate().is_err() {
                    c.fail(s, "fd_sweep", format!("entry {h} is outside (1e-12, 1e-2]"));
                }
            }
        }
        if c.errors.is_empty() {
            Ok(())
        } else {
            Err(c.errors)
        }
    }

    fn check_state(&self, c: &mut Checker<'_>, pot: &PotentialSpec, state: InitialState) {
        let s = "initial_state";
        let ok = match state {
            InitialState::Polar { r, phi, pr, pphi } => {
                let all = c.finite(s, "r", r) & c.finite(s, "phi", phi) & c.finite(s, "pr", pr) & c.finite(s, "pphi", pphi);
                if all && r <= 0.0 {
                    c.fail(s, "r", format!("must be > 0 (got {r})"));
                    return;
                }
                all
            }
            InitialState::Cartesian { x, y, px, py } => {
                let all = c.finite(s, "x", x) & c.finite(s, "y", y) & c.finite(s, "px", px) & c.finite(s, "py", py);
                if all && x == 0.0 && y == 0.0 && !matches!(pot, PotentialSpec::Ho { .. }) {
                    c.fail(s, "x", "the origin is singular for this potential");
                    return;
                }
                all
            }
        };
        if !ok {
            return;
        }
        let key = match state {
            InitialState::Polar { .. } => "phi",
            InitialState::Cartesian { .. } => "x",
        };
        let Ok(cart) = state.phase_state().to_cartesian() else {
            c.fail(s, key, "state cannot be converted to Cartesian coordinates");
            return;
        };
        let z = Canonical::new(superint_core::Chart::Cartesian, cart.as_array());
        if let Err(e) = pot.check_state(&z, GUARD_ZONE) {
            c.fail(s, key, format!("state lies in the singularity guard zone: {e}"));
            return;
        }
        if let Some((lo, hi)) = pot.wedge() {
            let phi = cart.y.atan2(cart.x);
            let inside = (-2..=2).any(|n| {
                let a = phi + n as f64 * std::f64::consts::TAU;
                a > lo && a < hi
            });
            if !inside {
                c.fail(s, key, format!("angle {phi:.6} lies outside the wedge ({lo:.6}, {hi:.6})"));
            }
        }
    }
}
