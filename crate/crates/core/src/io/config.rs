use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adjoint::DesignParams;
use crate::design::{BfgsOptions, PhaseInit};
use crate::error::{Error, Result};
use crate::fem::UniformGrid;
use crate::material::Material;
use crate::state::{BeamProblem, PointConstraint, StateInit, DEFAULT_PENALTY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SolveState,
    OptimizeDesign,
    Homogenize,
    Verify,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::SolveState,
        Command::OptimizeDesign,
        Command::Homogenize,
        Command::Verify,
        Command::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::SolveState => "solve-state",
            Command::OptimizeDesign => "optimize-design",
            Command::Homogenize => "homogenize",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::param("command", format!("unknown command `{s}`")))
    }
}

/// Fully resolved settings of one run.
///
/// Keys of the text format (one `key = value` per line, `#` starts a
/// comment; `-` and `_` are interchangeable):
///
/// | key | meaning | default |
/// |---|---|---|
/// | `command` | subcommand | given by caller |
/// | `delta` | load magnitude | 100 |
/// | `K0` | clamp angle | 0 |
/// | `a`, `b` | soft and hard stiffness | 0.5, 1 |
/// | `cl`, `cp` | length and perimeter cost | 1, 1 |
/// | `eps` | interface width | `h` of the fine grid |
/// | `level_coarse`, `level_fine` | grid levels | 3, 9 |
/// | `init` | a state (`simple`, `twisted`, `s-shape`) or phase-field name | |
/// | `state_init` | state branch | `simple` |
/// | `design_init` | `zero`, `all-soft`, `all-hard`, `random`, `random:N` | `zero` |
/// | `constraints` | `(t, x, y); ...` | none |
/// | `penalty` | constraint weight | 1e4 |
/// | `theta`, `periods` | homogenization fraction and laminate periods | 0.5, `8,32,128` |
/// | `sweep` | comma-separated design initializations | `zero,random:1,...,random:4` |
/// | `workers` | sweep threads | 4 |
/// | `max_iter` | optimizer iterations | 3000 |
/// | `seed` | seed for `random` | 0 |
/// | `out` | output directory | `out` |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub delta: f64,
    pub clamp_angle: f64,
    pub soft: f64,
    pub hard: f64,
    pub length_cost: f64,
    pub perimeter_cost: f64,
    /// `None` resolves to the mesh size of the fine grid.
    pub epsilon: Option<f64>,
    pub level_coarse: u32,
    pub level_fine: u32,
    pub state_init: StateInit,
    pub design_init: PhaseInit,
    pub constraints: Vec<PointConstraint>,
    pub penalty: f64,
    pub theta: f64,
    pub periods: Vec<usize>,
    pub sweep: Vec<PhaseInit>,
    pub workers: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            delta: 100.0,
            clamp_angle: 0.0,
            soft: 0.5,
            hard: 1.0,
            length_cost: 1.0,
            perimeter_cost: 1.0,
            epsilon: None,
            level_coarse: 3,
            level_fine: 9,
            state_init: StateInit::Simple,
            design_init: PhaseInit::Undecided,
            constraints: Vec::new(),
            penalty: DEFAULT_PENALTY,
            theta: 0.5,
            periods: vec![8, 32, 128],
            sweep: std::iter::once(PhaseInit::Undecided)
                .chain((1..=4).map(|seed| PhaseInit::Random { seed }))
                .collect(),
            workers: 4,
            max_iter: BfgsOptions::default().max_iter,
            seed: 0,
            out: PathBuf::from("out"),
        }
    }

    /// Defaults, then the key-value file, then `overrides` in order.
    pub fn resolve(command: Command, file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut pairs = Vec::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            pairs = parse_pairs(&text)?;
        }
        pairs.extend(overrides.iter().cloned());
        let mut config = Self::defaults(command);
        config.apply(&pairs)?;
        config.command = command;
        Ok(config)
    }

    /// Parses a key-value text, command included.
    pub fn from_text(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let command = pairs
            .iter()
            .rev()
            .find(|(k, _)| normalize(k) == "command")
            .map(|(_, v)| v.parse())
            .transpose()?
            .ok_or_else(|| Error::param("command", "missing"))?;
        let mut config = Self::defaults(command);
        config.apply(&pairs)?;
        Ok(config)
    }

    fn apply(&mut self, pairs: &[(String, String)]) -> Result<()> {
        // random design seeds depend on `seed`, wherever it appears
        let mut design: Option<String> = None;
        for (key, value) in pairs {
            let key = normalize(key);
            match key.as_str() {
                "init" => {
                    if let Ok(init) = value.parse::<StateInit>() {
                        self.state_init = init;
                    } else {
                        design = Some(value.clone());
                    }
                }
                "design_init" => design = Some(value.clone()),
                _ => self.set(&key, value)?,
            }
        }
        if let Some(name) = design {
            self.design_init = PhaseInit::parse(&name, self.seed)
                .map_err(|_| Error::param("init", format!("unknown initialization `{name}`")))?;
        }
        self.validate()
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "command" => self.command = value.parse()?,
            "delta" => self.delta = number(key, value)?,
            "k0" | "clamp_angle" => self.clamp_angle = number(key, value)?,
            "a" => self.soft = number(key, value)?,
            "b" => self.hard = number(key, value)?,
            "cl" => self.length_cost = number(key, value)?,
            "cp" => self.perimeter_cost = number(key, value)?,
            "eps" => {
                self.epsilon = match value {
                    "auto" => None,
                    v => Some(number(key, v)?),
                }
            }
            "level_coarse" => self.level_coarse = integer(key, value)?,
            "level_fine" => self.level_fine = integer(key, value)?,
            "state_init" => self.state_init = value.parse()?,
            "constraints" => self.constraints = parse_constraints(value)?,
            "penalty" => self.penalty = number(key, value)?,
            "theta" => self.theta = number(key, value)?,
            "periods" => self.periods = list(value).map(|v| integer(key, v)).collect::<Result<_>>()?,
            "sweep" => {
                self.sweep = list(value)
                    .map(|v| {
                        PhaseInit::parse(v, self.seed)
                            .map_err(|_| Error::param("sweep", format!("unknown initialization `{v}`")))
                    })
                    .collect::<Result<_>>()?
            }
            "workers" => self.workers = integer(key, value)?,
            "max_iter" => self.max_iter = integer(key, value)?,
            "seed" => self.seed = integer(key, value)?,
            "out" => self.out = PathBuf::from(value),
            other => return Err(Error::param(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("delta", self.delta),
            ("K0", self.clamp_angle),
            ("a", self.soft),
            ("b", self.hard),
            ("cl", self.length_cost),
            ("cp", self.perimeter_cost),
            ("penalty", self.penalty),
            ("theta", self.theta),
        ];
        for (name, x) in finite {
            if !x.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.delta < 0.0 {
            return Err(Error::param("delta", "must be non-negative"));
        }
        if !(self.soft > 0.0 && self.soft < self.hard) {
            return Err(Error::param(
                "a",
                format!("need 0 < a < b, got a = {} and b = {}", self.soft, self.hard),
            ));
        }
        if !(self.length_cost > 0.0) {
            return Err(Error::param("cl", "must be positive"));
        }
        if self.perimeter_cost < 0.0 {
            return Err(Error::param("cp", "must be non-negative"));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(Error::param("eps", "must be positive"));
            }
        }
        if self.level_coarse < 1 {
            return Err(Error::param("level_coarse", "must be at least 1"));
        }
        if self.level_fine < self.level_coarse {
            return Err(Error::param("level_fine", "must not be below level_coarse"));
        }
        if self.level_fine > crate::fem::MAX_LEVEL {
            return Err(Error::param(
                "level_fine",
                format!("must not exceed {}", crate::fem::MAX_LEVEL),
            ));
        }
        if !(self.penalty > 0.0) {
            return Err(Error::param("penalty", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::param("theta", "must lie in [0, 1]"));
        }
        if self.periods.is_empty() || self.periods.contains(&0) {
            return Err(Error::param("periods", "need at least one positive period count"));
        }
        if self.sweep.is_empty() {
            return Err(Error::param("sweep", "need at least one initialization"));
        }
        if self.workers == 0 {
            return Err(Error::param("workers", "must be positive"));
        }
        for c in &self.constraints {
            if !(c.time > 0.0 && c.time <= 1.0) {
                return Err(Error::param("constraints", format!("time {} outside (0, 1]", c.time)));
            }
            if !c.target.iter().all(|x| x.is_finite()) {
                return Err(Error::param("constraints", "targets must be finite"));
            }
        }
        Ok(())
    }

    pub fn fine_grid(&self) -> Result<UniformGrid> {
        UniformGrid::new(self.level_fine)
    }

    pub fn epsilon_value(&self) -> Result<f64> {
        Ok(match self.epsilon {
            Some(eps) => eps,
            None => self.fine_grid()?.h(),
        })
    }

    pub fn design_params(&self) -> Result<DesignParams> {
        Ok(DesignParams {
            length_cost: self.length_cost,
            perimeter_cost: self.perimeter_cost,
            epsilon: self.epsilon_value()?,
        })
    }

    /// Load, clamp angle, bounds and constraints; the material is the hard
    /// phase throughout until replaced.
    pub fn beam_problem(&self) -> BeamProblem {
        let constraints = self
            .constraints
            .iter()
            .map(|c| PointConstraint {
                weight: self.penalty,
                ..*c
            })
            .collect();
        BeamProblem::homogeneous(self.delta, self.clamp_angle, self.hard)
            .with_material(Material::Homogeneous(self.hard), self.soft, self.hard)
            .with_constraints(constraints)
    }

    pub fn bfgs_options(&self) -> BfgsOptions {
        BfgsOptions {
            max_iter: self.max_iter,
            ..BfgsOptions::default()
        }
    }

    /// The resolved configuration in the key-value format; parsing it back
    /// with [`ExperimentConfig::from_text`] gives the same configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("command", self.command.to_string());
        line("delta", fmt_f64(self.delta));
        line("K0", fmt_f64(self.clamp_angle));
        line("a", fmt_f64(self.soft));
        line("b", fmt_f64(self.hard));
        line("cl", fmt_f64(self.length_cost));
        line("cp", fmt_f64(self.perimeter_cost));
        line("eps", self.epsilon.map_or("auto".into(), fmt_f64));
        line("level_coarse", self.level_coarse.to_string());
        line("level_fine", self.level_fine.to_string());
        line("state_init", self.state_init.name().into());
        line("design_init", self.design_init.name());
        line(
            "constraints",
            self.constraints
                .iter()
                .map(|c| {
                    format!(
                        "({}, {}, {})",
                        fmt_f64(c.time),
                        fmt_f64(c.target[0]),
                        fmt_f64(c.target[1])
                    )
                })
                .collect::<Vec<_>>()
                .join("; "),
        );
        line("penalty", fmt_f64(self.penalty));
        line("theta", fmt_f64(self.theta));
        line("periods", join(self.periods.iter().map(|p| p.to_string())));
        line("sweep", join(self.sweep.iter().map(|p| p.name())));
        line("workers", self.workers.to_string());
        line("max_iter", self.max_iter.to_string());
        line("seed", self.seed.to_string());
        line("out", self.out.display().to_string());
        s
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(",")
}

// shortest representation that parses back to the same value
fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

fn number(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::param(key, format!("`{value}` is not a number")))
}

fn integer<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::param(key, format!("`{value}` is not a non-negative integer")))
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", i + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Parses `(t, x, y); (t, x, y)`; weights take the default penalty.
pub fn parse_constraints(text: &str) -> Result<Vec<PointConstraint>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let inner = item
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| Error::param("constraints", format!("`{item}` is not of the form (t, x, y)")))?;
            let nums: Vec<f64> = inner
                .split(',')
                .map(|x| number("constraints", x))
                .collect::<Result<_>>()?;
            match nums.as_slice() {
                &[t, x, y] => Ok(PointConstraint::new(t, [x, y])),
                _ => Err(Error::param("constraints", format!("`{item}` needs three numbers"))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use super::*;

    fn pair(k: &str, v: &str) -> (String, String) {
        (k.to_string(), v.to_string())
    }

    #[test]
    fn defaults() {
        let c = ExperimentConfig::resolve(Command::SolveState, None, &[]).unwrap();
        assert_eq!((c.delta, c.clamp_angle, c.soft, c.hard), (100.0, 0.0, 0.5, 1.0));
        assert_eq!((c.length_cost, c.perimeter_cost), (1.0, 1.0));
        assert_eq!(c.fine_grid().unwrap().num_nodes(), 513);
        assert_eq!(c.epsilon_value().unwrap(), 1.0 / 512.0);
        assert_eq!(c.level_coarse, 3);
    }

    #[test]
    fn clamp_angle_flag() {
        let c = ExperimentConfig::resolve(Command::SolveState, None, &[pair("K0", "0.7853981633974483")]).unwrap();
        assert_eq!(c.clamp_angle, FRAC_PI_4);
    }

    #[test]
    fn rejects_reversed_bounds() {
        let err =
            ExperimentConfig::resolve(Command::SolveState, None, &[pair("a", "1"), pair("b", "0.5")]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("a < b"), "{msg}");
    }

    #[test]
    fn rejects_bad_values_naming_the_key() {
        let cases = [
            ("eps", "0"),
            ("eps", "-1"),
            ("level_coarse", "0"),
            ("delta", "abc"),
            ("frobnicate", "1"),
        ];
        for (k, v) in cases {
            let err = ExperimentConfig::resolve(Command::Verify, None, &[pair(k, v)]).unwrap_err();
            match err {
                Error::InvalidParameter { name, .. } => assert_eq!(name, k),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# comment\ndelta = 5\nb = 4\ncl = 2 # trailing\n").unwrap();
        let c = ExperimentConfig::resolve(Command::OptimizeDesign, Some(&path), &[pair("delta", "7")]).unwrap();
        assert_eq!((c.delta, c.hard, c.length_cost), (7.0, 4.0, 2.0));
    }

    #[test]
    fn init_selects_state_or_design() {
        let c = ExperimentConfig::resolve(Command::SolveState, None, &[pair("init", "twisted")]).unwrap();
        assert_eq!(c.state_init, StateInit::Twisted);
        let c = ExperimentConfig::resolve(
            Command::OptimizeDesign,
            None,
            &[pair("init", "random"), pair("seed", "11")],
        )
        .unwrap();
        assert_eq!(c.design_init, PhaseInit::Random { seed: 11 });
        assert!(ExperimentConfig::resolve(Command::SolveState, None, &[pair("init", "sideways")]).is_err());
    }

    #[test]
    fn constraints_parse() {
        let c = parse_constraints("(0.5, -0.3, 0); (1, -0.6, 0)").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].time, 1.0);
        assert_eq!(c[0].target, [-0.3, 0.0]);
        assert!(parse_constraints("(0.5, 1)").is_err());
        assert!(parse_constraints("0.5, 1, 2").is_err());
        let bad = ExperimentConfig::resolve(Command::SolveState, None, &[pair("constraints", "(1.5, 0, 0)")]);
        assert!(bad.is_err());
    }

    #[test]
    fn echo_round_trips() {
        let c = ExperimentConfig::resolve(
            Command::Sweep,
            None,
            &[
                pair("K0", "0.7853981633974483"),
                pair("eps", "0.01"),
                pair("constraints", "(0.5, -0.3, 0); (1, -0.6, 0)"),
                pair("sweep", "zero, all-hard, random:3"),
                pair("periods", "4,16"),
            ],
        )
        .unwrap();
        let back = ExperimentConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }
}
