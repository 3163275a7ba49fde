//! Exact single- and two-qubit mathematics on the Bloch sphere.
//!
//! States follow the convention `|θ,φ⟩ = cos(θ/2)|z+⟩ + e^{iφ} sin(θ/2)|z−⟩`
//! in the σ_z eigenbasis, with right-handed Bloch coordinates. All
//! probabilities are evaluated through explicit complex inner products.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const NORM_TOL: f64 = 1e-12;
const DENSITY_TOL: f64 = 1e-10;
/// Amplitudes below this magnitude are treated as zero when fixing the phase.
const ZERO_AMPLITUDE: f64 = 1e-15;

/// Measurement outcome / eigenvalue sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" => Ok(Sign::Plus),
            "-" | "-1" | "minus" => Ok(Sign::Minus),
            other => Err(Error::InvalidArgument(format!(
                "unrecognized sign {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Unit direction on the Bloch sphere.
///
/// `theta` lies in `[0, π]`, `phi` in `[0, 2π)`. At the poles `phi` is
/// always `0`, so two directions compare equal iff they are the same point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochDirection {
    theta: f64,
    phi: f64,
}

impl BlochDirection {
    /// +z, the north pole.
    pub const Z: BlochDirection = BlochDirection {
        theta: 0.0,
        phi: 0.0,
    };
    /// −z, the south pole.
    pub const MINUS_Z: BlochDirection = BlochDirection {
        theta: PI,
        phi: 0.0,
    };
    /// +x.
    pub const X: BlochDirection = BlochDirection {
        theta: PI / 2.0,
        phi: 0.0,
    };
    /// +y.
    pub const Y: BlochDirection = BlochDirection {
        theta: PI / 2.0,
        phi: PI / 2.0,
    };

    /// Validates `theta` and wraps `phi` into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite angle (theta = {theta}, phi = {phi})"
            )));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "theta = {theta} outside [0, pi]"
            )));
        }
        let mut phi = phi.rem_euclid(TAU);
        // rem_euclid can round up to exactly 2π for tiny negative inputs
        if phi >= TAU {
            phi = 0.0;
        }
        if theta == 0.0 || theta == PI {
            phi = 0.0;
        }
        Ok(Self { theta, phi })
    }

    /// Direction of a Cartesian vector (need not be normalized).
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument("zero or non-finite vector".into()));
        }
        let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]);
        Self::new(theta, phi)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// The opposite point of the sphere, i.e. the `−` eigendirection.
    pub fn antipode(&self) -> Self {
        let theta = PI - self.theta;
        // exact at the poles, so canonicalization in `new` applies
        let theta = if self.theta == 0.0 {
            PI
        } else if self.theta == PI {
            0.0
        } else {
            theta
        };
        Self::new(theta, self.phi + PI).expect("antipode of a valid direction is valid")
    }

    /// Eigenstate of `n·σ` with eigenvalue `sign`.
    pub fn eigenstate(&self, sign: Sign) -> PureQubitState {
        match sign {
            Sign::Plus => state_from_direction(*self),
            Sign::Minus => state_from_direction(self.antipode()),
        }
    }

    /// Angle between two directions, in `[0, π]`.
    pub fn angle_to(&self, other: &BlochDirection) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        dot.clamp(-1.0, 1.0).acos()
    }

    /// Short human-readable label, e.g. `z`, `x`, or `n(1.0472,0)`.
    pub fn label(&self) -> String {
        if *self == Self::Z {
            "z".into()
        } else if *self == Self::MINUS_Z {
            "-z".into()
        } else if *self == Self::X {
            "x".into()
        } else if *self == Self::Y {
            "y".into()
        } else {
            format!("n({},{})", trim_float(self.theta), trim_float(self.phi))
        }
    }
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

impl fmt::Display for BlochDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Normalized qubit state `(a₊, a₋)` in the σ_z basis with canonical global
/// phase: `a₊` real and nonnegative, or `a₋` real and positive when `a₊ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubitState {
    plus: C64,
    minus: C64,
}

impl PureQubitState {
    pub const Z_PLUS: PureQubitState = PureQubitState {
        plus: C64::new(1.0, 0.0),
        minus: C64::new(0.0, 0.0),
    };
    pub const Z_MINUS: PureQubitState = PureQubitState {
        plus: C64::new(0.0, 0.0),
        minus: C64::new(1.0, 0.0),
    };

    /// Builds a state from amplitudes that must already be normalized; the
    /// global phase is removed.
    pub fn new(plus: C64, minus: C64) -> Result<Self> {
        let norm = plus.norm_sqr() + minus.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state norm {norm} differs from 1"
            )));
        }
        Ok(Self::canonical(plus, minus))
    }

    /// Like [`PureQubitState::new`] but rescales any nonzero pair first.
    pub fn normalized(plus: C64, minus: C64) -> Result<Self> {
        let norm = (plus.norm_sqr() + minus.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "zero or non-finite amplitudes".into(),
            ));
        }
        Ok(Self::canonical(plus / norm, minus / norm))
    }

    fn canonical(plus: C64, minus: C64) -> Self {
        if plus.norm() > ZERO_AMPLITUDE {
            let phase = plus.conj() / plus.norm();
            Self {
                plus: C64::new(plus.norm(), 0.0),
                minus: minus * phase,
            }
        } else {
            Self {
                plus: C64::new(0.0, 0.0),
                minus: C64::new(minus.norm(), 0.0),
            }
        }
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [self.plus, self.minus]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureQubitState) -> C64 {
        self.plus.conj() * other.plus + self.minus.conj() * other.minus
    }

    /// Bloch direction of the state (inverse of [`state_from_direction`]).
    pub fn direction(&self) -> BlochDirection {
        let rho = projector(self);
        let [x, y, z] = rho.bloch_vector();
        BlochDirection::from_vector([x, y, z]).expect("pure state has a unit Bloch vector")
    }
}

/// 2×2 density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    entries: [[C64; 2]; 2],
}

impl DensityMatrix {
    /// Validates the density-operator invariants to 1e−10.
    pub fn new(entries: [[C64; 2]; 2]) -> Result<Self> {
        let m = Self { entries };
        if entries
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidDensity("non-finite matrix entry".into()));
        }
        if !m.is_hermitian(DENSITY_TOL) {
            return Err(Error::InvalidDensity("matrix is not Hermitian".into()));
        }
        if (m.trace().re - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "trace {} != 1",
                m.trace().re
            )));
        }
        let [lo, _] = m.eigenvalues();
        if lo < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {lo}")));
        }
        Ok(m)
    }

    /// `½(I + r·σ)` for a Bloch vector with `|r| ≤ 1`.
    pub fn from_bloch_vector(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        Self::new([
            [C64::new(0.5 * (1.0 + z), 0.0), C64::new(0.5 * x, -0.5 * y)],
            [C64::new(0.5 * x, 0.5 * y), C64::new(0.5 * (1.0 - z), 0.0)],
        ])
    }

    pub fn maximally_mixed() -> Self {
        Self {
            entries: [
                [C64::new(0.5, 0.0), C64::new(0.0, 0.0)],
                [C64::new(0.0, 0.0), C64::new(0.5, 0.0)],
            ],
        }
    }

    pub fn entries(&self) -> &[[C64; 2]; 2] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row][col]
    }

    pub fn trace(&self) -> C64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let e = &self.entries;
        e[0][0].im.abs() <= tol
            && e[1][1].im.abs() <= tol
            && (e[0][1] - e[1][0].conj()).norm() <= tol
    }

    /// Eigenvalues in ascending order (Hermitian part).
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        let b = 0.5 * (self.entries[0][1] + self.entries[1][0].conj());
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }

    /// `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)`.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let e = &self.entries;
        [2.0 * e[1][0].re, 2.0 * e[1][0].im, (e[0][0] - e[1][1]).re]
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `ρ|ψ⟩` as a raw amplitude pair.
    pub fn apply(&self, s: &PureQubitState) -> [C64; 2] {
        let [a, b] = s.amplitudes();
        let e = &self.entries;
        [e[0][0] * a + e[0][1] * b, e[1][0] * a + e[1][1] * b]
    }

    /// Row-major `[re, im]` pairs, the order used in serialized reports.
    pub fn to_re_im(&self) -> [[f64; 2]; 4] {
        let e = &self.entries;
        [
            [e[0][0].re, e[0][0].im],
            [e[0][1].re, e[0][1].im],
            [e[1][0].re, e[1][0].im],
            [e[1][1].re, e[1][1].im],
        ]
    }
}

/// Two-qubit pure state in the ordered basis `(++, +−, −+, −−)` of σ_z⊗σ_z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    amplitudes: [C64; 4],
}

impl TwoQubitState {
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "two-qubit state norm {norm} differs from 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// `(|z+⟩|z+⟩ + |z−⟩|z−⟩)/√2`.
    pub fn bell() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let o = C64::new(0.0, 0.0);
        Self {
            amplitudes: [h, o, o, h],
        }
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        self.amplitudes
    }

    /// `(⟨a| ⊗ ⟨b|) |self⟩`.
    pub fn product_overlap(&self, a: &PureQubitState, b: &PureQubitState) -> C64 {
        let [a0, a1] = a.amplitudes();
        let [b0, b1] = b.amplitudes();
        let bra = [
            (a0 * b0).conj(),
            (a0 * b1).conj(),
            (a1 * b0).conj(),
            (a1 * b1).conj(),
        ];
        bra.iter()
            .zip(self.amplitudes.iter())
            .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x * y)
    }
}

/// The `+1` eigenstate of `n·σ`: `cos(θ/2)|z+⟩ + e^{iφ} sin(θ/2)|z−⟩`.
pub fn state_from_direction(n: BlochDirection) -> PureQubitState {
    if n.theta == PI {
        return PureQubitState::Z_MINUS;
    }
    let half = 0.5 * n.theta;
    let plus = C64::new(half.cos(), 0.0);
    let minus = C64::from_polar(half.sin(), n.phi);
    PureQubitState::canonical(plus, minus)
}

/// `|⟨meas, outcome | prep, +⟩|²`.
pub fn transition_probability(prep: BlochDirection, meas: BlochDirection, outcome: Sign) -> f64 {
    let prepared = state_from_direction(prep);
    let measured = meas.eigenstate(outcome);
    measured.inner(&prepared).norm_sqr()
}

/// Born conditional `q(r|θ,φ)`: `cos²(θ/2)` for `+1`, `sin²(θ/2)` for `−1`.
/// Independent of `phi`.
pub fn born_conditional(r: Sign, theta: f64, _phi: f64) -> f64 {
    let c = (0.5 * theta).cos();
    let c2 = c * c;
    match r {
        Sign::Plus => c2,
        Sign::Minus => 1.0 - c2,
    }
}

/// Joint outcome probability for measuring `a` on the first and `b` on the
/// second qubit of the Bell state.
pub fn bell_joint_probability(a: BlochDirection, b: BlochDirection, ra: Sign, rb: Sign) -> f64 {
    TwoQubitState::bell()
        .product_overlap(&a.eigenstate(ra), &b.eigenstate(rb))
        .norm_sqr()
}

/// `|s⟩⟨s|`.
pub fn projector(s: &PureQubitState) -> DensityMatrix {
    let [a, b] = s.amplitudes();
    DensityMatrix {
        entries: [[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]],
    }
}
