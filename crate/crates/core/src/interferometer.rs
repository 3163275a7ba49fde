//! Single-photon beamsplitter experiments.
//!
//! Detector statistics come from composing 2×2 transfer matrices on the
//! two arms. Each simulated photon additionally gets a path configuration
//! (which arm it occupied between the first beamsplitter and detection),
//! drawn from a distribution that depends on the whole arrangement,
//! including where the detectors end up.
//!
//! Conventions: the beamsplitter is `(1/√2)[[1, i], [i, 1]]`; the mirror pair
//! of the interferometer swaps the arms without phase; arm lengths are
//! equal. The photon enters on arm A. D1 sits on output A, D2 on output B.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bloch::C64;
use crate::error::{Error, Result};
use crate::rng::{inverse_cdf, map_runs, Execution, RunStream};

const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// Source straight into one detector.
    Direct,
    /// One 50/50 beamsplitter, a detector on each output.
    SingleBs,
    /// Balanced Mach–Zehnder: two identical beamsplitters.
    DoubleBs,
    /// Mach–Zehnder whose detectors go behind the first or the second
    /// beamsplitter, decided after emission.
    DelayedChoice,
}

impl Layout {
    pub const ALL: [Layout; 4] = [
        Layout::Direct,
        Layout::SingleBs,
        Layout::DoubleBs,
        Layout::DelayedChoice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Layout::Direct => "direct",
            Layout::SingleBs => "single-bs",
            Layout::DoubleBs => "double-bs",
            Layout::DelayedChoice => "delayed-choice",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown layout {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    AfterFirstBs,
    AfterSecondBs,
}

impl Placement {
    pub const BOTH: [Placement; 2] = [Placement::AfterFirstBs, Placement::AfterSecondBs];

    pub fn name(self) -> &'static str {
        match self {
            Placement::AfterFirstBs => "after-first-bs",
            Placement::AfterSecondBs => "after-second-bs",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::BOTH
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown placement {s:?}")))
    }
}

/// A layout plus, for the delayed-choice layout only, the detector placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct OpticalSetup {
    layout: Layout,
    #[serde(skip_serializing_if = "Option::is_none")]
    placement: Option<Placement>,
}

impl OpticalSetup {
    pub fn new(layout: Layout, placement: Option<Placement>) -> Result<Self> {
        match (layout, placement) {
            (Layout::DelayedChoice, None) => Err(Error::InvalidArgument(
                "delayed-choice layout needs a detector placement".into(),
            )),
            (Layout::DelayedChoice, Some(_)) | (_, None) => Ok(Self { layout, placement }),
            (_, Some(_)) => Err(Error::InvalidArgument(format!(
                "placement only applies to the delayed-choice layout, not {}",
                layout.name()
            ))),
        }
    }

    pub fn direct() -> Self {
        Self {
            layout: Layout::Direct,
            placement: None,
        }
    }

    pub fn single_bs() -> Self {
        Self {
            layout: Layout::SingleBs,
            placement: None,
        }
    }

    pub fn double_bs() -> Self {
        Self {
            layout: Layout::DoubleBs,
            placement: None,
        }
    }

    pub fn delayed_choice(placement: Placement) -> Self {
        Self {
            layout: Layout::DelayedChoice,
            placement: Some(placement),
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn placement(&self) -> Option<Placement> {
        self.placement
    }

    /// Number of beamsplitters the photon meets before detection.
    pub fn beamsplitters_before_detection(&self) -> usize {
        match (self.layout, self.placement) {
            (Layout::Direct, _) => 0,
            (Layout::SingleBs, _) | (Layout::DelayedChoice, Some(Placement::AfterFirstBs)) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for OpticalSetup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.placement {
            Some(p) => write!(f, "{}/{}", self.layout.name(), p.name()),
            None => f.write_str(self.layout.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detector {
    D1,
    D2,
}

impl Detector {
    pub fn index(self) -> usize {
        match self {
            Detector::D1 => 0,
            Detector::D2 => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    A,
    B,
}

impl Arm {
    pub fn index(self) -> usize {
        match self {
            Arm::A => 0,
            Arm::B => 1,
        }
    }
}

/// Amplitudes on arms A and B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAmplitudes {
    a: C64,
    b: C64,
}

impl PathAmplitudes {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidArgument(format!(
                "path amplitudes have norm {norm}"
            )));
        }
        Ok(Self { a, b })
    }

    /// Photon on arm A.
    pub fn input() -> Self {
        Self {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
        }
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [self.a, self.b]
    }

    pub fn probabilities(&self) -> [f64; 2] {
        [self.a.norm_sqr(), self.b.norm_sqr()]
    }
}

/// Linear map on `(A, B)` amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix([[C64; 2]; 2]);

impl TransferMatrix {
    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self([[one, zero], [zero, one]])
    }

    /// Symmetric 50/50 beamsplitter: transmission `1/√2`, reflection `i/√2`.
    pub fn beamsplitter() -> Self {
        let t = C64::new(FRAC_1_SQRT_2, 0.0);
        let r = C64::new(0.0, FRAC_1_SQRT_2);
        Self([[t, r], [r, t]])
    }

    /// Mirror pair between the beamsplitters: the arms cross.
    pub fn mirrors() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self([[zero, one], [one, zero]])
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &TransferMatrix) -> Self {
        let (x, y) = (&self.0, &first.0);
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = x[i][0] * y[0][j] + x[i][1] * y[1][j];
            }
        }
        Self(out)
    }

    pub fn apply(&self, v: &PathAmplitudes) -> PathAmplitudes {
        let m = &self.0;
        PathAmplitudes {
            a: m[0][0] * v.a + m[0][1] * v.b,
            b: m[1][0] * v.a + m[1][1] * v.b,
        }
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let m = &self.0;
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let g = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - want).norm());
            }
        }
        worst
    }

    pub fn entries(&self) -> &[[C64; 2]; 2] {
        &self.0
    }
}

/// Source-to-detector transfer matrix of a setup.
pub fn transfer(setup: &OpticalSetup) -> TransferMatrix {
    let bs = TransferMatrix::beamsplitter();
    match setup.beamsplitters_before_detection() {
        0 => TransferMatrix::identity(),
        1 => bs,
        _ => bs.after(&TransferMatrix::mirrors()).after(&bs),
    }
}

/// `{P(D1), P(D2)}`.
pub fn detector_distribution(setup: &OpticalSetup) -> [f64; 2] {
    transfer(setup)
        .apply(&PathAmplitudes::input())
        .probabilities()
}

/// Distribution of the occupied arm given the setup and the clicked
/// detector, as `{P(A), P(B)}`.
///
/// Detecting right behind the first beamsplitter ties the arm to the
/// detector. With both beamsplitters in place the click carries no arm
/// information and the arms are equally likely by symmetry. The direct
/// layout has a single beam, reported as arm A.
pub fn path_distribution(setup: &OpticalSetup, clicked: Detector) -> [f64; 2] {
    match setup.beamsplitters_before_detection() {
        0 => [1.0, 0.0],
        1 => match clicked {
            Detector::D1 => [1.0, 0.0],
            Detector::D2 => [0.0, 1.0],
        },
        _ => [0.5, 0.5],
    }
}

/// One detected photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhotonRun {
    pub run_index: u64,
    pub setup: OpticalSetup,
    pub detector: Detector,
    pub path: Arm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DetectorCounts {
    #[serde(rename = "D1")]
    pub d1: u64,
    #[serde(rename = "D2")]
    pub d2: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PathCounts {
    #[serde(rename = "A")]
    pub a: u64,
    #[serde(rename = "B")]
    pub b: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Tally {
    pub runs: u64,
    pub detector_counts: DetectorCounts,
    pub path_counts: PathCounts,
}

impl Tally {
    pub fn of<'a>(runs: impl IntoIterator<Item = &'a PhotonRun>) -> Self {
        let mut t = Tally::default();
        for r in runs {
            t.runs += 1;
            match r.detector {
                Detector::D1 => t.detector_counts.d1 += 1,
                Detector::D2 => t.detector_counts.d2 += 1,
            }
            match r.path {
                Arm::A => t.path_counts.a += 1,
                Arm::B => t.path_counts.b += 1,
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub runs: Vec<PhotonRun>,
    pub tally: Tally,
}

/// Simulates runs `0..n`. Each run's stream is consumed in schedule order:
/// the emission draw, then `choose` (which may draw the placement), then the
/// path draw. The emission draw fixes the clicked detector through the
/// arrangement `choose` settles on.
pub fn run_schedule<C>(
    seed: u64,
    n: u64,
    execution: Execution,
    choose: C,
) -> Result<ExperimentOutcome>
where
    C: Fn(u64, &mut RunStream) -> OpticalSetup + Sync + Send,
{
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one run".into()));
    }
    let runs = map_runs(n, execution, |run_index| {
        let mut stream = RunStream::new(seed, run_index);
        let emission = stream.uniform();
        let setup = choose(run_index, &mut stream);
        let detector = match inverse_cdf(&detector_distribution(&setup), emission) {
            0 => Detector::D1,
            _ => Detector::D2,
        };
        let path = match inverse_cdf(&path_distribution(&setup, detector), stream.uniform()) {
            0 => Arm::A,
            _ => Arm::B,
        };
        PhotonRun {
            run_index,
            setup,
            detector,
            path,
        }
    });
    let tally = Tally::of(&runs);
    Ok(ExperimentOutcome { runs, tally })
}

pub fn run_experiment(setup: &OpticalSetup, seed: u64, n: u64) -> Result<ExperimentOutcome> {
    run_experiment_with(setup, seed, n, Execution::Serial)
}

pub fn run_experiment_with(
    setup: &OpticalSetup,
    seed: u64,
    n: u64,
    execution: Execution,
) -> Result<ExperimentOutcome> {
    let setup = *setup;
    run_schedule(seed, n, execution, move |_, _| setup)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlacementTally {
    pub placement: Placement,
    #[serde(flatten)]
    pub tally: Tally,
}

/// Run summary as emitted by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub setup: String,
    pub seed: u64,
    pub n: u64,
    pub detector_counts: DetectorCounts,
    pub path_counts: PathCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub by_placement: Option<Vec<PlacementTally>>,
}

impl RunSummary {
    pub fn new(setup: &OpticalSetup, seed: u64, outcome: &ExperimentOutcome) -> Self {
        Self {
            setup: setup.to_string(),
            seed,
            n: outcome.tally.runs,
            detector_counts: outcome.tally.detector_counts,
            path_counts: outcome.tally.path_counts,
            by_placement: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayedChoiceReport {
    pub outcome: ExperimentOutcome,
    /// Indexed like [`Placement::BOTH`].
    pub by_placement: [PlacementTally; 2],
}

impl DelayedChoiceReport {
    pub fn summary(&self, seed: u64) -> RunSummary {
        RunSummary {
            setup: Layout::DelayedChoice.name().into(),
            seed,
            n: self.outcome.tally.runs,
            detector_counts: self.outcome.tally.detector_counts,
            path_counts: self.outcome.tally.path_counts,
            by_placement: Some(self.by_placement.to_vec()),
        }
    }

    pub fn placement(&self, p: Placement) -> &Tally {
        &self.by_placement[p as usize].tally
    }
}

/// Delayed-choice runs with the placement decided by a fair coin drawn after
/// the emission event of each run.
pub fn delayed_choice_report(seed: u64, n: u64) -> Result<DelayedChoiceReport> {
    delayed_choice_report_with(seed, n, Execution::Serial)
}

pub fn delayed_choice_report_with(
    seed: u64,
    n: u64,
    execution: Execution,
) -> Result<DelayedChoiceReport> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "delayed-choice report needs at least two runs".into(),
        ));
    }
    let outcome = run_schedule(seed, n, execution, |_, stream| {
        let placement = if stream.coin() {
            Placement::AfterFirstBs
        } else {
            Placement::AfterSecondBs
        };
        OpticalSetup::delayed_choice(placement)
    })?;
    let by_placement = Placement::BOTH.map(|p| PlacementTally {
        placement: p,
        tally: Tally::of(outcome.runs.iter().filter(|r| r.setup.placement == Some(p))),
    });
    Ok(DelayedChoiceReport {
        outcome,
        by_placement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_setups() -> Vec<OpticalSetup> {
        vec![
            OpticalSetup::direct(),
            OpticalSetup::single_bs(),
            OpticalSetup::double_bs(),
            OpticalSetup::delayed_choice(Placement::AfterFirstBs),
            OpticalSetup::delayed_choice(Placement::AfterSecondBs),
        ]
    }

    #[test]
    fn distributions() {
        assert_eq!(detector_distribution(&OpticalSetup::direct()), [1.0, 0.0]);
        let p = detector_distribution(&OpticalSetup::single_bs());
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let p = detector_distribution(&OpticalSetup::double_bs());
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1] < 1e-30);
        assert_eq!(
            detector_distribution(&OpticalSetup::delayed_choice(Placement::AfterFirstBs)),
            detector_distribution(&OpticalSetup::single_bs())
        );
        for s in all_setups() {
            let p = detector_distribution(&s);
            assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transfer_matrices_are_unitary() {
        assert!(TransferMatrix::beamsplitter().unitarity_defect() < 1e-12);
        assert!(TransferMatrix::mirrors().unitarity_defect() < 1e-12);
        for s in all_setups() {
            assert!(transfer(&s).unitarity_defect() < 1e-12, "{s}");
        }
    }

    #[test]
    fn double_bs_never_clicks_d2() {
        for seed in 0..20 {
            let out = run_experiment(&OpticalSetup::double_bs(), seed, 500).unwrap();
            assert_eq!(out.tally.detector_counts, DetectorCounts { d1: 500, d2: 0 });
        }
    }

    #[test]
    fn single_bs_paths_follow_detectors() {
        let out = run_experiment(&OpticalSetup::single_bs(), 3, 10_000).unwrap();
        assert!((out.tally.detector_counts.d1 as f64 - 5000.0).abs() <= 150.0);
        for r in &out.runs {
            assert_eq!(r.detector.index(), r.path.index());
        }
    }

    #[test]
    fn setup_validation() {
        assert!(OpticalSetup::new(Layout::DelayedChoice, None).is_err());
        assert!(OpticalSetup::new(Layout::SingleBs, Some(Placement::AfterFirstBs)).is_err());
        assert!(OpticalSetup::new(Layout::Direct, None).is_ok());
        assert_eq!(Layout::parse("double-bs").unwrap(), Layout::DoubleBs);
        assert!(Layout::parse("triple-bs").is_err());
        assert_eq!(
            Placement::parse("after-second-bs").unwrap(),
            Placement::AfterSecondBs
        );
        assert!(run_experiment(&OpticalSetup::direct(), 0, 0).is_err());
        assert!(delayed_choice_report(0, 1).is_err());
        assert!(PathAmplitudes::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn alternating_placement() {
        let out = run_schedule(8, 10_000, Execution::Serial, |i, _| {
            OpticalSetup::delayed_choice(Placement::BOTH[(i % 2) as usize])
        })
        .unwrap();
        let first = Tally::of(out.runs.iter().filter(|r| r.run_index % 2 == 0));
        let second = Tally::of(out.runs.iter().filter(|r| r.run_index % 2 == 1));
        assert_eq!(second.detector_counts.d1, second.runs);
        let sigma = (first.runs as f64 * 0.25).sqrt();
        assert!((first.detector_counts.d1 as f64 - first.runs as f64 / 2.0).abs() <= 3.0 * sigma);
    }

    #[test]
    fn summary_json_shape() {
        let r = delayed_choice_report(1, 100).unwrap();
        let v = serde_json::to_value(r.summary(1)).unwrap();
        assert_eq!(v["setup"], "delayed-choice");
        assert_eq!(v["n"], 100);
        assert!(v["detector_counts"]["D1"].is_u64() && v["path_counts"]["A"].is_u64());
        assert_eq!(v["by_placement"].as_array().unwrap().len(), 2);
        let out = run_experiment(&OpticalSetup::double_bs(), 1, 10).unwrap();
        let v = serde_json::to_value(RunSummary::new(&OpticalSetup::double_bs(), 1, &out)).unwrap();
        assert!(v.get("by_placement").is_none());
    }
}
