//! Scenario documents.
//!
//! A scenario is a flat TOML document:
//!
//! ```toml
//! label   = "worked"
//! phi     = 1.0
//! gamma   = 2.0
//! upsilon = 1.0
//! dim     = 2
//! p0      = [0.0, 0.0]
//! e_pos0  = [1.0, 0.0]
//! e_vel0  = [0.0, 0.0]
//! grid_n  = 256
//! policy  = "random-admissible"
//! seed    = 42
//! fraction = 1.0
//! outputs = ["report", "trajectory"]
//! ```
//!
//! `direction` belongs to `constant`, `target` to `radial-extremal`, `seed`
//! to `random-admissible`, and `fraction` to `constant` and
//! `random-admissible`. Every GameParams and policy invariant is checked
//! here, so a parsed scenario never fails later during simulation.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use toml::de::{DeTable, DeValue};
use toml::Spanned;

use crate::controls::DEFAULT_GRID_N;
use crate::dynamics::GameParams;
use crate::error::Error;
use crate::policies::{build_policy, PolicyKind, PolicySpec};
use crate::state_space::{StateVector, MAX_DIM};

/// Upper bound on `grid_n` accepted from documents.
pub const MAX_GRID_N: usize = 1 << 22;

const KEYS: [&str; 16] = [
    "label", "phi", "gamma", "upsilon", "dim", "p0", "e_pos0", "e_vel0", "grid_n", "policy",
    "direction", "target", "seed", "fraction", "outputs", "max_dim",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Artifact {
    Report,
    Trajectory,
    Chain,
    Control,
}

impl Artifact {
    pub const ALL: [Artifact; 4] = [Artifact::Report, Artifact::Trajectory, Artifact::Chain, Artifact::Control];

    pub fn name(self) -> &'static str {
        match self {
            Artifact::Report => "report",
            Artifact::Trajectory => "trajectory",
            Artifact::Chain => "chain",
            Artifact::Control => "control",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub params: GameParams,
    pub policy: PolicySpec,
    pub grid_n: usize,
    pub outputs: BTreeSet<Artifact>,
}

/// A rejected document, naming the offending key and its line when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(line), Some(key)) => write!(f, "line {line}: `{key}`: {}", self.message),
            (Some(line), None) => write!(f, "line {line}: {}", self.message),
            (None, Some(key)) => write!(f, "`{key}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

struct Doc<'a> {
    text: &'a str,
    table: DeTable<'a>,
}

type Entry<'t, 'a> = &'t Spanned<DeValue<'a>>;

impl<'a> Doc<'a> {
    fn line_of(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].matches('\n').count() + 1
    }

    fn error(&self, key: &str, span: Range<usize>, message: impl Into<String>) -> ParseError {
        ParseError {
            key: Some(key.to_string()),
            line: Some(self.line_of(span)),
            message: message.into(),
        }
    }

    fn get(&self, key: &str) -> Option<Entry<'_, 'a>> {
        self.table.get(key)
    }

    fn require(&self, key: &str) -> Result<Entry<'_, 'a>, ParseError> {
        self.get(key).ok_or_else(|| ParseError {
            key: Some(key.to_string()),
            line: None,
            message: "missing required key".to_string(),
        })
    }

    fn number(&self, key: &str, value: Entry<'_, 'a>) -> Result<f64, ParseError> {
        number_of(value.get_ref())
            .filter(|x| x.is_finite())
            .ok_or_else(|| self.error(key, value.span(), format!("expected a finite number, found {}", value.get_ref().type_str())))
    }

    fn integer(&self, key: &str, value: Entry<'_, 'a>) -> Result<i64, ParseError> {
        match value.get_ref() {
            DeValue::Integer(i) => i64::from_str_radix(i.as_str(), i.radix())
                .map_err(|_| self.error(key, value.span(), "integer out of range")),
            other => Err(self.error(key, value.span(), format!("expected an integer, found {}", other.type_str()))),
        }
    }

    fn string(&self, key: &str, value: Entry<'_, 'a>) -> Result<String, ParseError> {
        value
            .get_ref()
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| self.error(key, value.span(), format!("expected a string, found {}", value.get_ref().type_str())))
    }

    fn numbers(&self, key: &str, value: Entry<'_, 'a>) -> Result<Vec<f64>, ParseError> {
        let array = value
            .get_ref()
            .as_array()
            .ok_or_else(|| self.error(key, value.span(), format!("expected an array of numbers, found {}", value.get_ref().type_str())))?;
        array.iter().map(|item| self.number(key, item)).collect()
    }

    fn vector(&self, key: &str, dim: usize) -> Result<StateVector, ParseError> {
        let value = self.require(key)?;
        self.vector_at(key, value, dim)
    }

    fn vector_at(&self, key: &str, value: Entry<'_, 'a>, dim: usize) -> Result<StateVector, ParseError> {
        let coords = self.numbers(key, value)?;
        if coords.len() != dim {
            return Err(self.error(key, value.span(), format!("expected {dim} coordinates (dim), found {}", coords.len())));
        }
        StateVector::new(coords).map_err(|e| self.error(key, value.span(), e.to_string()))
    }

    fn positive(&self, key: &str) -> Result<f64, ParseError> {
        let value = self.require(key)?;
        let x = self.number(key, value)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(self.error(key, value.span(), format!("must be > 0, got {x}")))
        }
    }
}

fn number_of(value: &DeValue<'_>) -> Option<f64> {
    match value {
        DeValue::Float(f) => f.as_str().parse().ok(),
        DeValue::Integer(i) => i64::from_str_radix(i.as_str(), i.radix()).ok().map(|x| x as f64),
        _ => None,
    }
}

/// Parses a scenario, labelling it `scenario` when the document has no label.
pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    parse_scenario_with_label(text, "scenario")
}

/// Parses a scenario; `default_label` is used when the document has none.
pub fn parse_scenario_with_label(text: &str, default_label: &str) -> Result<Scenario, ParseError> {
    let table = DeTable::parse(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        ParseError {
            key: None,
            line,
            message: e.message().to_string(),
        }
    })?;
    let doc = Doc {
        text,
        table: table.into_inner(),
    };

    for (key, _) in doc.table.iter() {
        if !KEYS.contains(&key.get_ref().as_ref()) {
            return Err(doc.error(key.get_ref(), key.span(), "unknown key"));
        }
    }

    let label = match doc.get("label") {
        Some(v) => {
            let label = doc.string("label", v)?;
            check_label(&label).map_err(|m| doc.error("label", v.span(), m))?;
            label
        }
        None => default_label.to_string(),
    };

    let max_dim = match doc.get("max_dim") {
        Some(v) => {
            let m = doc.integer("max_dim", v)?;
            if m < 1 || m as usize > MAX_DIM {
                return Err(doc.error("max_dim", v.span(), format!("must lie in [1, {MAX_DIM}]")));
            }
            m as usize
        }
        None => MAX_DIM,
    };

    let phi = doc.positive("phi")?;
    let gamma = doc.positive("gamma")?;
    let upsilon = doc.positive("upsilon")?;

    let dim_value = doc.require("dim")?;
    let dim = doc.integer("dim", dim_value)?;
    if dim < 1 || dim as usize > max_dim {
        return Err(doc.error("dim", dim_value.span(), format!("must lie in [1, {max_dim}], got {dim}")));
    }
    let dim = dim as usize;

    let p0 = doc.vector("p0", dim)?;
    let e_pos0 = doc.vector("e_pos0", dim)?;
    let e_vel0 = doc.vector("e_vel0", dim)?;
    let params = GameParams::new(phi, gamma, upsilon, p0, e_pos0, e_vel0)
        .map_err(|e| doc.error("e_vel0", doc.require("e_vel0").unwrap().span(), e.to_string()))?;

    let grid_n = match doc.get("grid_n") {
        Some(v) => {
            let n = doc.integer("grid_n", v)?;
            if n < 1 || n as usize > MAX_GRID_N {
                return Err(doc.error("grid_n", v.span(), format!("must lie in [1, {MAX_GRID_N}], got {n}")));
            }
            n as usize
        }
        None => DEFAULT_GRID_N,
    };

    let policy_value = doc.require("policy")?;
    let kind: PolicyKind = doc
        .string("policy", policy_value)?
        .parse()
        .map_err(|e: Error| doc.error("policy", policy_value.span(), e.to_string()))?;
    let policy = parse_policy(&doc, kind, dim)?;

    let outputs = match doc.get("outputs") {
        Some(v) => parse_outputs(&doc, v)?,
        None => BTreeSet::from([Artifact::Report]),
    };

    // Building the signal once rejects infeasible targets and degenerate
    // setups at parse time.
    build_policy(&policy, &params, grid_n).map_err(|e| {
        let key = match (&e, kind) {
            (Error::Infeasible(_), PolicyKind::RadialExtremal) => "target",
            _ => "policy",
        };
        let span = doc.get(key).map(|v| v.span()).unwrap_or(policy_value.span());
        doc.error(key, span, e.to_string())
    })?;

    Ok(Scenario {
        label,
        params,
        policy,
        grid_n,
        outputs,
    })
}

fn check_label(label: &str) -> Result<(), String> {
    if label.is_empty() {
        return Err("label must not be empty".to_string());
    }
    if !label.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) || label.starts_with('.') {
        return Err("label may only contain ASCII letters, digits, `-`, `_` and `.`".to_string());
    }
    Ok(())
}

fn parse_policy(doc: &Doc<'_>, kind: PolicyKind, dim: usize) -> Result<PolicySpec, ParseError> {
    let allowed: &[&str] = match kind {
        PolicyKind::Zero | PolicyKind::ZBoundary => &[],
        PolicyKind::Constant => &["direction", "fraction"],
        PolicyKind::RadialExtremal => &["target"],
        PolicyKind::RandomAdmissible => &["seed", "fraction"],
    };
    for key in ["direction", "target", "seed", "fraction"] {
        if let Some(v) = doc.get(key) {
            if !allowed.contains(&key) {
                return Err(doc.error(key, v.span(), format!("does not apply to policy `{kind}`")));
            }
        }
    }
    let fraction = || -> Result<f64, ParseError> {
        match doc.get("fraction") {
            Some(v) => {
                let f = doc.number("fraction", v)?;
                if (0.0..=1.0).contains(&f) {
                    Ok(f)
                } else {
                    Err(doc.error("fraction", v.span(), format!("must lie in [0, 1], got {f}")))
                }
            }
            None => Ok(1.0),
        }
    };
    Ok(match kind {
        PolicyKind::Zero => PolicySpec::Zero,
        PolicyKind::ZBoundary => PolicySpec::ZBoundary,
        PolicyKind::Constant => {
            let value = doc.require("direction")?;
            let direction = doc.vector_at("direction", value, dim)?;
            if direction.is_zero() {
                return Err(doc.error("direction", value.span(), "direction must be non-zero"));
            }
            PolicySpec::Constant {
                direction,
                fraction: fraction()?,
            }
        }
        PolicyKind::RadialExtremal => PolicySpec::RadialExtremal {
            target: doc.vector("target", dim)?,
        },
        PolicyKind::RandomAdmissible => {
            let value = doc.require("seed")?;
            let seed = match value.get_ref() {
                DeValue::Integer(_) => {
                    let s = doc.integer("seed", value)?;
                    u64::try_from(s).map_err(|_| doc.error("seed", value.span(), "seed must be >= 0"))?
                }
                DeValue::String(s) => s
                    .parse::<u64>()
                    .map_err(|_| doc.error("seed", value.span(), "seed string must be a decimal u64"))?,
                other => {
                    return Err(doc.error("seed", value.span(), format!("expected an integer, found {}", other.type_str())))
                }
            };
            PolicySpec::RandomAdmissible {
                seed,
                fraction: fraction()?,
            }
        }
    })
}

fn parse_outputs(doc: &Doc<'_>, value: Entry<'_, '_>) -> Result<BTreeSet<Artifact>, ParseError> {
    let array = value
        .get_ref()
        .as_array()
        .ok_or_else(|| doc.error("outputs", value.span(), "expected an array of strings"))?;
    array
        .iter()
        .map(|item| {
            let name = doc.string("outputs", item)?;
            Artifact::ALL
                .into_iter()
                .find(|a| a.name() == name)
                .ok_or_else(|| doc.error("outputs", item.span(), format!("unknown artifact `{name}`")))
        })
        .collect()
}

fn array(v: &StateVector) -> String {
    let items: Vec<String> = v.coords().iter().map(|c| format!("{c:?}")).collect();
    format!("[{}]", items.join(", "))
}

impl Scenario {
    /// Serialises to a document that parses back to an equal scenario.
    pub fn to_toml(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        line("label", format!("{:?}", self.label));
        line("phi", format!("{:?}", p.phi()));
        line("gamma", format!("{:?}", p.gamma()));
        line("upsilon", format!("{:?}", p.upsilon()));
        line("dim", p.dim().to_string());
        line("p0", array(p.p0()));
        line("e_pos0", array(p.e_pos0()));
        line("e_vel0", array(p.e_vel0()));
        line("grid_n", self.grid_n.to_string());
        line("policy", format!("{:?}", self.policy.kind().name()));
        match &self.policy {
            PolicySpec::Zero | PolicySpec::ZBoundary => {}
            PolicySpec::Constant { direction, fraction } => {
                line("direction", array(direction));
                line("fraction", format!("{fraction:?}"));
            }
            PolicySpec::RadialExtremal { target } => line("target", array(target)),
            PolicySpec::RandomAdmissible { seed, fraction } => {
                let seed = if *seed <= i64::MAX as u64 {
                    seed.to_string()
                } else {
                    format!("\"{seed}\"")
                };
                line("seed", seed);
                line("fraction", format!("{fraction:?}"));
            }
        }
        let outputs: Vec<String> = self.outputs.iter().map(|a| format!("{:?}", a.name())).collect();
        line("outputs", format!("[{}]", outputs.join(", ")));
        out
    }

    /// Applies `--grid-n` / `--seed` overrides and re-validates the policy.
    pub fn with_overrides(mut self, grid_n: Option<usize>, seed: Option<u64>) -> Result<Self, ParseError> {
        if let Some(n) = grid_n {
            if n == 0 || n > MAX_GRID_N {
                return Err(ParseError {
                    key: Some("grid_n".to_string()),
                    line: None,
                    message: format!("override must lie in [1, {MAX_GRID_N}], got {n}"),
                });
            }
            self.grid_n = n;
        }
        if let (Some(s), PolicySpec::RandomAdmissible { seed, .. }) = (seed, &mut self.policy) {
            *seed = s;
        }
        build_policy(&self.policy, &self.params, self.grid_n).map_err(|e| ParseError {
            key: Some("policy".to_string()),
            line: None,
            message: e.to_string(),
        })?;
        Ok(self)
    }
}
