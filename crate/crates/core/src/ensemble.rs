//! Configuration ensembles for fixed preparation/measurement arrangements.
//!
//! An [`Arrangement`] fixes the macroscopic parameters: the prepared
//! eigenstate and the measured observable(s). Together they determine a
//! finite set of objective configurations and a probability for each. The
//! realized configuration of an individual run is picked by a seeded
//! per-run stream standing in for the microscopic parameters.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bloch::{bell_joint_probability, transition_probability, BlochDirection, Sign};
use crate::error::{Error, Result};
use crate::rng::{inverse_cdf, map_runs, Execution, RunStream};

const PROB_TOL: f64 = 1e-12;

/// A prepared eigenstate `|n̄±⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preparation {
    pub direction: BlochDirection,
    pub sign: Sign,
}

impl Preparation {
    pub fn new(direction: BlochDirection, sign: Sign) -> Self {
        Self { direction, sign }
    }

    /// `|z+⟩`.
    pub fn z_plus() -> Self {
        Self::new(BlochDirection::Z, Sign::Plus)
    }

    /// Direction whose `+` eigenstate is the prepared state.
    pub fn pointing(&self) -> BlochDirection {
        match self.sign {
            Sign::Plus => self.direction,
            Sign::Minus => self.direction.antipode(),
        }
    }
}

impl fmt::Display for Preparation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.direction, self.sign)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrangementKind {
    SingleQubit,
    BellPair,
}

impl ArrangementKind {
    fn name(self) -> &'static str {
        match self {
            ArrangementKind::SingleQubit => "single-qubit",
            ArrangementKind::BellPair => "bell-pair",
        }
    }
}

/// Macroscopic parameters of an experimental arrangement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Arrangement {
    /// One qubit prepared in `preparation`, measured along `observable`.
    SingleQubit {
        preparation: Preparation,
        observable: BlochDirection,
    },
    /// The Bell pair `(|z+z+⟩ + |z−z−⟩)/√2`, each half measured along its own
    /// observable.
    BellPair { observables: [BlochDirection; 2] },
}

impl Arrangement {
    pub fn single(preparation: Preparation, observable: BlochDirection) -> Self {
        Arrangement::SingleQubit {
            preparation,
            observable,
        }
    }

    pub fn bell(first: BlochDirection, second: BlochDirection) -> Self {
        Arrangement::BellPair {
            observables: [first, second],
        }
    }

    pub fn kind(&self) -> ArrangementKind {
        match self {
            Arrangement::SingleQubit { .. } => ArrangementKind::SingleQubit,
            Arrangement::BellPair { .. } => ArrangementKind::BellPair,
        }
    }

    pub fn observables(&self) -> Vec<BlochDirection> {
        match self {
            Arrangement::SingleQubit { observable, .. } => vec![*observable],
            Arrangement::BellPair { observables } => observables.to_vec(),
        }
    }

    /// Configuration labels in canonical order: `+` before `−`, pairs
    /// lexicographic.
    pub fn labels(&self) -> Vec<ConfigurationLabel> {
        match *self {
            Arrangement::SingleQubit {
                preparation,
                observable,
            } => Sign::BOTH
                .iter()
                .map(|&r| ConfigurationLabel::Single {
                    preparation,
                    observable,
                    outcome: r,
                })
                .collect(),
            Arrangement::BellPair { observables } => {
                let mut out = Vec::with_capacity(4);
                for ra in Sign::BOTH {
                    for rb in Sign::BOTH {
                        out.push(ConfigurationLabel::Pair {
                            observables,
                            outcomes: [ra, rb],
                        });
                    }
                }
                out
            }
        }
    }
}

/// One objective configuration: the preparation together with the
/// observable(s) and outcome sign(s). Displays as e.g. `(z+)(x-)` or
/// `psi(z+)(x-)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConfigurationLabel {
    Single {
        preparation: Preparation,
        observable: BlochDirection,
        outcome: Sign,
    },
    Pair {
        observables: [BlochDirection; 2],
        outcomes: [Sign; 2],
    },
}

impl ConfigurationLabel {
    pub fn outcomes(&self) -> Vec<Sign> {
        match self {
            ConfigurationLabel::Single { outcome, .. } => vec![*outcome],
            ConfigurationLabel::Pair { outcomes, .. } => outcomes.to_vec(),
        }
    }
}

impl fmt::Display for ConfigurationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigurationLabel::Single {
                preparation,
                observable,
                outcome,
            } => write!(f, "({preparation})({observable}{outcome})"),
            ConfigurationLabel::Pair {
                observables,
                outcomes,
            } => write!(
                f,
                "psi({}{})({}{})",
                observables[0], outcomes[0], observables[1], outcomes[1]
            ),
        }
    }
}

impl Serialize for ConfigurationLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Probability table over the configurations of one arrangement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigurationDistribution {
    #[serde(skip)]
    arrangement: Arrangement,
    labels: Vec<ConfigurationLabel>,
    probabilities: Vec<f64>,
}

impl ConfigurationDistribution {
    /// Pairs `probabilities` with the arrangement's canonical labels after
    /// checking they form a probability vector of the right length.
    pub fn new(arrangement: Arrangement, probabilities: Vec<f64>) -> Result<Self> {
        let labels = arrangement.labels();
        if probabilities.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} arrangement needs {} probabilities, got {}",
                arrangement.kind().name(),
                labels.len(),
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            arrangement,
            labels,
            probabilities,
        })
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    pub fn labels(&self) -> &[ConfigurationLabel] {
        &self.labels
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Marginal `{P(+), P(−)}` of one side of a Bell-pair distribution.
    pub fn marginal(&self, side: usize) -> Result<[f64; 2]> {
        if self.arrangement.kind() != ArrangementKind::BellPair || side > 1 {
            return Err(Error::InvalidArgument(
                "marginals exist for sides 0 and 1 of a bell-pair distribution".into(),
            ));
        }
        let mut out = [0.0; 2];
        for (label, p) in self.labels.iter().zip(&self.probabilities) {
            let idx = match label.outcomes()[side] {
                Sign::Plus => 0,
                Sign::Minus => 1,
            };
            out[idx] += p;
        }
        Ok(out)
    }
}

/// `{p(prep)(obs+), p(prep)(obs−)}` for a single-qubit arrangement.
pub fn ensemble_single(arr: &Arrangement) -> Result<ConfigurationDistribution> {
    let Arrangement::SingleQubit {
        preparation,
        observable,
    } = *arr
    else {
        return Err(Error::WrongKind {
            expected: ArrangementKind::SingleQubit.name(),
            got: arr.kind().name(),
        });
    };
    let pointing = preparation.pointing();
    let probabilities = Sign::BOTH
        .iter()
        .map(|&r| transition_probability(pointing, observable, r))
        .collect();
    ConfigurationDistribution::new(*arr, probabilities)
}

/// The four Bell-pair configurations `(++, +−, −+, −−)`.
pub fn ensemble_bell(arr: &Arrangement) -> Result<ConfigurationDistribution> {
    let Arrangement::BellPair {
        observables: [a, b],
    } = *arr
    else {
        return Err(Error::WrongKind {
            expected: ArrangementKind::BellPair.name(),
            got: arr.kind().name(),
        });
    };
    let probabilities = arr
        .labels()
        .iter()
        .map(|label| {
            let o = label.outcomes();
            bell_joint_probability(a, b, o[0], o[1])
        })
        .collect();
    ConfigurationDistribution::new(*arr, probabilities)
}

/// Dispatches on the arrangement kind.
pub fn ensemble(arr: &Arrangement) -> Result<ConfigurationDistribution> {
    match arr.kind() {
        ArrangementKind::SingleQubit => ensemble_single(arr),
        ArrangementKind::BellPair => ensemble_bell(arr),
    }
}

/// A prepared state viewed as its family of outcome distributions, one per
/// observable, in caller order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateAsDistributionSet {
    pub preparation: Preparation,
    pub entries: Vec<(BlochDirection, [f64; 2])>,
}

impl StateAsDistributionSet {
    pub fn get(&self, observable: &BlochDirection) -> Option<[f64; 2]> {
        self.entries
            .iter()
            .find(|(d, _)| d == observable)
            .map(|(_, p)| *p)
    }
}

pub fn state_as_distribution_set(
    preparation: Preparation,
    observables: &[BlochDirection],
) -> Result<StateAsDistributionSet> {
    if observables.is_empty() {
        return Err(Error::EmptyObservables);
    }
    let entries = observables
        .iter()
        .map(|&obs| {
            let dist = ensemble_single(&Arrangement::single(preparation, obs))?;
            let p = dist.probabilities();
            Ok((obs, [p[0], p[1]]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StateAsDistributionSet {
        preparation,
        entries,
    })
}

/// One run of an arrangement: `(seed, run_index)` select the realized
/// configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRecord {
    pub arrangement: Arrangement,
    pub seed: u64,
    pub run_index: u64,
    pub configuration: ConfigurationLabel,
    #[serde(skip)]
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub records: Vec<RunRecord>,
    /// Counts per configuration, in label order.
    pub counts: Vec<u64>,
}

/// Draws `n` runs serially.
pub fn sample(dist: &ConfigurationDistribution, seed: u64, n: u64) -> Result<SampleOutcome> {
    sample_with(dist, seed, n, Execution::Serial)
}

/// Draws runs `0..n`. Run `i` uses only its own stream, so the output does
/// not depend on `execution`.
pub fn sample_with(
    dist: &ConfigurationDistribution,
    seed: u64,
    n: u64,
    execution: Execution,
) -> Result<SampleOutcome> {
    sample_range(dist, seed, 0..n, execution)
}

/// Draws the runs with indices in `runs`; concatenating the records of
/// adjacent ranges reproduces the records of their union.
pub fn sample_range(
    dist: &ConfigurationDistribution,
    seed: u64,
    runs: std::ops::Range<u64>,
    execution: Execution,
) -> Result<SampleOutcome> {
    if runs.is_empty() {
        return Err(Error::InvalidArgument(
            "sample needs at least one run".into(),
        ));
    }
    let start = runs.start;
    let records = map_runs(runs.end - start, execution, |offset| {
        let run_index = start + offset;
        let mut stream = RunStream::new(seed, run_index);
        let cell = inverse_cdf(&dist.probabilities, stream.uniform());
        RunRecord {
            arrangement: dist.arrangement,
            seed,
            run_index,
            configuration: dist.labels[cell],
            cell,
        }
    });
    let mut counts = vec![0u64; dist.len()];
    for r in &records {
        counts[r.cell] += 1;
    }
    Ok(SampleOutcome { records, counts })
}

/// Serialized distribution, optionally with sampled counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    pub arrangement: Arrangement,
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
}

impl DistributionReport {
    pub fn new(dist: &ConfigurationDistribution) -> Self {
        Self {
            arrangement: dist.arrangement,
            labels: dist.labels.iter().map(|l| l.to_string()).collect(),
            probabilities: dist.probabilities.clone(),
            counts: None,
            seed: None,
            samples: None,
        }
    }

    pub fn with_sample(mut self, seed: u64, sample: &SampleOutcome) -> Self {
        self.samples = Some(sample.records.len() as u64);
        self.counts = Some(sample.counts.clone());
        self.seed = Some(seed);
        self
    }
}
