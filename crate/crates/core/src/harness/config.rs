//! JSON experiment configuration. Unknown keys are rejected everywhere and
//! parse errors carry the line and column of the offending value.

use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::harness::convergence::Functional;
use crate::operator::Generator;
use crate::path::StoppingSpec;
use crate::simulators::{FamilyKind, FamilySimulator, Horizon, InitialLaw};
use crate::speed::SpeedFunction;
use crate::state_space::{ClosedInterval, DeltaChart, OpenInterval, StatePoint, StateSpace};

/// Family block: the fields of a [`FamilyKind`] plus the horizon `"T"`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyBlock(pub FamilySimulator);

impl<'de> Deserialize<'de> for FamilyBlock {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mut map = serde_json::Map::deserialize(d)?;
        let t = map.remove("T").ok_or_else(|| D::Error::missing_field("T"))?;
        let t: f64 = serde_json::from_value(t).map_err(D::Error::custom)?;
        let kind: FamilyKind = serde_json::from_value(serde_json::Value::Object(map)).map_err(D::Error::custom)?;
        FamilySimulator::new(kind, Horizon::Fixed(t)).map(FamilyBlock).map_err(D::Error::custom)
    }
}

/// `[lo, hi]`, read as an open or a closed interval depending on context.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub struct Bounds(pub f64, pub f64);

impl Bounds {
    pub fn open(self) -> OpenInterval {
        OpenInterval::new(self.0, self.1)
    }

    pub fn closed(self) -> ClosedInterval {
        ClosedInterval::new(self.0, self.1)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    #[serde(default)]
    pub chart: DeltaChart,
    /// Open interval state space; the real line when absent.
    #[serde(default)]
    pub interval: Option<Bounds>,
}

impl SpaceConfig {
    pub fn build(&self) -> StateSpace {
        let s = match self.interval {
            Some(Bounds(lo, hi)) => StateSpace::bounded_interval(lo, hi),
            None => StateSpace::real_line(),
        };
        s.with_chart(self.chart)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    /// The check is expected to pass.
    #[default]
    Pass,
    /// The check is a control that must detect a discrepancy.
    Reject,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StoppingConfig {
    Time(f64),
    Exit(Bounds),
    Enter(Bounds),
}

impl StoppingConfig {
    pub fn build(&self) -> StoppingSpec {
        match self {
            StoppingConfig::Time(t) => StoppingSpec::Time(*t),
            StoppingConfig::Exit(b) => StoppingSpec::Exit(b.open()),
            StoppingConfig::Enter(b) => StoppingSpec::Enter(b.closed()),
        }
    }
}

fn dirac0() -> InitialLaw {
    InitialLaw::dirac(0.0)
}

fn default_cap() -> f64 {
    1000.0
}

fn default_points() -> usize {
    crate::operator::DEFAULT_PMP_POINTS
}

fn default_pairs() -> usize {
    8
}

/// One experiment, written as `{"<type>": {...fields}}`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// Martingale statistics over pairs × open sets × time windows. With
    /// `scale`, the ensemble is time-changed by that speed and tested
    /// against the scaled operator, with `T` read in the new time.
    MartingaleSuite {
        name: String,
        #[serde(default)]
        expect: Expect,
        family: FamilyBlock,
        #[serde(default = "dirac0")]
        init: InitialLaw,
        n: usize,
        test_functions: Vec<TestFunction>,
        /// Defaults to the family's declared generator.
        #[serde(default)]
        generator: Option<Generator>,
        #[serde(default)]
        scale: Option<SpeedFunction>,
        #[serde(default = "default_cap")]
        cap: f64,
        opens: Vec<Bounds>,
        windows: Vec<(f64, f64)>,
    },
    GeneratorEstimate {
        name: String,
        #[serde(default)]
        expect: Expect,
        family: FamilyBlock,
        start: StatePoint,
        f: TestFunction,
        opens: Vec<Bounds>,
        t_grid: Vec<f64>,
        n: usize,
        /// Expected limit; defaults to the declared generator at `start`.
        #[serde(default)]
        target: Option<f64>,
    },
    Pmp {
        name: String,
        #[serde(default)]
        expect: Expect,
        test_functions: Vec<TestFunction>,
        /// Families whose declared generators are probed.
        #[serde(default)]
        families: Vec<FamilyBlock>,
        #[serde(default)]
        generators: Vec<Generator>,
        #[serde(default = "default_points")]
        points: usize,
    },
    FellerTail {
        name: String,
        #[serde(default)]
        expect: Expect,
        family: FamilyBlock,
        k: Bounds,
        t: f64,
        starts: Vec<f64>,
        n: usize,
    },
    QuasiContinuity {
        name: String,
        #[serde(default)]
        expect: Expect,
        family: FamilyBlock,
        #[serde(default = "dirac0")]
        init: InitialLaw,
        t: f64,
        n: usize,
    },
    Markov {
        name: String,
        #[serde(default)]
        expect: Expect,
        family: FamilyBlock,
        #[serde(default = "dirac0")]
        init: InitialLaw,
        tau: StoppingConfig,
        bin: Bounds,
        f: TestFunction,
        lag: f64,
        n: usize,
    },
    OperatorConvergence {
        name: String,
        #[serde(default)]
        expect: Expect,
        test_functions: Vec<TestFunction>,
        sequence: Vec<Generator>,
        limit: Generator,
        compacts: Vec<Bounds>,
        /// Accepted range for consecutive discrepancy ratios.
        #[serde(default)]
        ratio_range: Option<(f64, f64)>,
    },
    LawConvergence {
        name: String,
        #[serde(default)]
        expect: Expect,
        sequence: Vec<FamilyBlock>,
        limit: FamilyBlock,
        #[serde(default = "dirac0")]
        init: InitialLaw,
        functionals: Vec<Functional>,
        n: usize,
        #[serde(default = "default_pairs")]
        distance_pairs: usize,
    },
    Localisation {
        name: String,
        #[serde(default)]
        expect: Expect,
        family_a: FamilyBlock,
        family_b: FamilyBlock,
        #[serde(default = "dirac0")]
        init: InitialLaw,
        u: Bounds,
        functionals: Vec<Functional>,
        n: usize,
    },
    Tightness {
        name: String,
        #[serde(default)]
        expect: Expect,
        sequence: Vec<FamilyBlock>,
        #[serde(default = "dirac0")]
        init: InitialLaw,
        n: usize,
        epsilon: f64,
        t: f64,
        u: Bounds,
        deltas: Vec<f64>,
        /// Upper bound for the tail maximum at the smallest `δ`.
        #[serde(default)]
        max_limsup: Option<f64>,
    },
    TimechangeDemo {
        name: String,
        #[serde(default)]
        expect: Expect,
        family: FamilyBlock,
        speed: SpeedFunction,
        #[serde(default = "dirac0")]
        init: InitialLaw,
        target: f64,
        #[serde(default = "default_cap")]
        cap: f64,
        test_functions: Vec<TestFunction>,
        opens: Vec<Bounds>,
        windows: Vec<(f64, f64)>,
        n: usize,
        k: Bounds,
        tail_time: f64,
        starts: Vec<f64>,
        tail_n: usize,
    },
}

impl Experiment {
    pub fn name(&self) -> &str {
        use Experiment::*;
        match self {
            MartingaleSuite { name, .. }
            | GeneratorEstimate { name, .. }
            | Pmp { name, .. }
            | FellerTail { name, .. }
            | QuasiContinuity { name, .. }
            | Markov { name, .. }
            | OperatorConvergence { name, .. }
            | LawConvergence { name, .. }
            | Localisation { name, .. }
            | Tightness { name, .. }
            | TimechangeDemo { name, .. } => name,
        }
    }

    pub fn expect(&self) -> Expect {
        use Experiment::*;
        match self {
            MartingaleSuite { expect, .. }
            | GeneratorEstimate { expect, .. }
            | Pmp { expect, .. }
            | FellerTail { expect, .. }
            | QuasiContinuity { expect, .. }
            | Markov { expect, .. }
            | OperatorConvergence { expect, .. }
            | LawConvergence { expect, .. }
            | Localisation { expect, .. }
            | Tightness { expect, .. }
            | TimechangeDemo { expect, .. } => *expect,
        }
    }

    /// The experiment type, as written in the configuration.
    pub fn kind(&self) -> &'static str {
        use Experiment::*;
        match self {
            MartingaleSuite { .. } => "martingale_suite",
            GeneratorEstimate { .. } => "generator_estimate",
            Pmp { .. } => "pmp",
            FellerTail { .. } => "feller_tail",
            QuasiContinuity { .. } => "quasi_continuity",
            Markov { .. } => "markov",
            OperatorConvergence { .. } => "operator_convergence",
            LawConvergence { .. } => "law_convergence",
            Localisation { .. } => "localisation",
            Tightness { .. } => "tightness",
            TimechangeDemo { .. } => "timechange_demo",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub space: SpaceConfig,
    /// Output directory, overridden by `--out`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub experiments: Vec<Experiment>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {}", e.line(), e.column(), strip_position(&e.to_string())))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// serde_json appends " at line L column C"; the position is reported
/// separately.
fn strip_position(msg: &str) -> &str {
    match msg.rfind(" at line ") {
        Some(i) => &msg[..i],
        None => msg,
    }
}
