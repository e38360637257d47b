//! Two-qubit states, Bloch-vector observables and the Born rule.
//!
//! Conventions: `|H⟩` is the `+1` eigenstate of `σ_z`, `|V⟩` the `-1`
//! eigenstate, and the two-qubit basis is ordered `HH, HV, VH, VV` (Alice
//! first). A linear polarizer/wave-plate projection at angle `φ` onto
//! `cos φ|H⟩ + sin φ|V⟩` is the Bloch vector at angle `2φ` in the x–z plane.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{Behavior, Correlators, Scenario};

pub use nalgebra::Complex;
pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Ket4 = Vector4<C64>;

const STATE_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-12;

#[inline]
fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

/// `σ_x`, `σ_y`, `σ_z`.
pub fn paulis() -> [Mat2; 3] {
    let i = C64::new(0.0, 1.0);
    [
        Mat2::new(c(0.0), c(1.0), c(1.0), c(0.0)),
        Mat2::new(c(0.0), -i, i, c(0.0)),
        Mat2::new(c(1.0), c(0.0), c(0.0), c(-1.0)),
    ]
}

/// `a ⊗ b` with Alice's factor first.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// `Tr_B` of a two-qubit operator.
pub fn partial_trace_b(m: &Mat4) -> Mat2 {
    Mat2::from_fn(|r, col| m[(2 * r, 2 * col)] + m[(2 * r + 1, 2 * col + 1)])
}

/// `Tr_A` of a two-qubit operator.
pub fn partial_trace_a(m: &Mat4) -> Mat2 {
    Mat2::from_fn(|r, col| m[(r, col)] + m[(r + 2, col + 2)])
}

/// Real part of `Tr(m)`.
pub fn trace_re(m: &Mat4) -> f64 {
    (0..4).map(|i| m[(i, i)].re).sum()
}

/// `Tr(ρ · op)` real part, without forming the product.
pub fn expectation(rho: &Mat4, op: &Mat4) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += (rho[(i, j)] * op[(j, i)]).re;
        }
    }
    acc
}

/// `|ψ⟩⟨ψ|` for a normalised ket.
pub fn projector(psi: &Ket4) -> Mat4 {
    psi * psi.adjoint()
}

/// Largest absolute eigenvalue of a Hermitian operator.
pub fn hermitian_norm(m: &Mat4) -> f64 {
    let h = (m + m.adjoint()) * c(0.5);
    SymmetricEigen::new(h).eigenvalues.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Eigenvector of the largest eigenvalue of a Hermitian operator.
pub fn top_eigenvector(m: &Mat4) -> (f64, Ket4) {
    let h = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(h);
    let mut best = 0;
    for i in 1..4 {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let v: Ket4 = eig.eigenvectors.column(best).into();
    (eig.eigenvalues[best], v.normalize())
}

/// `cos θ|HH⟩ + sin θ|VV⟩`.
pub fn psi_theta(theta: f64) -> Ket4 {
    Ket4::new(c(theta.cos()), c(0.0), c(0.0), c(theta.sin()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum TwoQubitState {
    /// `cos θ|HH⟩ + sin θ|VV⟩` with `θ ∈ [0, π/2]`.
    PureAngle(f64),
    Density(Mat4),
}

impl TwoQubitState {
    pub fn pure_angle(theta: f64) -> Result<Self> {
        if !(-STATE_TOL..=FRAC_PI_2 + STATE_TOL).contains(&theta) {
            return Err(Error::InvalidState(format!("theta = {theta} outside [0, pi/2]")));
        }
        Ok(Self::PureAngle(theta))
    }

    pub fn maximally_entangled() -> Self {
        Self::PureAngle(FRAC_PI_4)
    }

    pub fn from_density(rho: Mat4) -> Result<Self> {
        let herm = (rho - rho.adjoint()).iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.2e})")));
        }
        let tr = trace_re(&rho);
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min_eig = SymmetricEigen::new(rho).eigenvalues.min();
        if min_eig < -EIGEN_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self::Density(rho))
    }

    /// Density operator of a pure ket (normalised here).
    pub fn from_ket(psi: &Ket4) -> Result<Self> {
        let norm = psi.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(Self::Density(projector(&(psi / c(norm)))))
    }

    /// Schmidt angle `atan(s_max / s_min) ∈ [π/4, π/2]` of a pure state, i.e.
    /// the `θ` of the locally equivalent `cos θ|HH⟩ + sin θ|VV⟩` with the larger
    /// weight on `|VV⟩`. `None` for mixed states.
    pub fn schmidt_angle(&self) -> Option<f64> {
        let psi = match self {
            Self::PureAngle(t) => psi_theta(*t),
            Self::Density(rho) => {
                let (lambda, v) = top_eigenvector(rho);
                if (lambda - 1.0).abs() > 1e-8 {
                    return None;
                }
                v
            }
        };
        let m = Mat2::new(psi[0], psi[1], psi[2], psi[3]);
        let sv = m.singular_values();
        let (hi, lo) = (sv[0].max(sv[1]), sv[0].min(sv[1]));
        Some(hi.atan2(lo))
    }
}

pub fn density_of(s: &TwoQubitState) -> Mat4 {
    match s {
        TwoQubitState::PureAngle(t) => projector(&psi_theta(*t)),
        TwoQubitState::Density(rho) => *rho,
    }
}

/// A dichotomic observable `a·σ` given by a unit Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochSetting(Vector3<f64>);

impl BlochSetting {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vector3::new(x, y, z);
        if (v.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidSetting(format!("|({x}, {y}, {z})| = {} != 1", v.norm())));
        }
        Ok(Self(v))
    }

    /// Normalise an arbitrary nonzero vector.
    pub fn along(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n > 1e-300) {
            return Err(Error::InvalidSetting("zero vector".into()));
        }
        Ok(Self(v / n))
    }

    /// Unit vector at Bloch angle `phi` in the x–z plane, `(sin φ, 0, cos φ)`.
    pub fn planar(phi: f64) -> Self {
        Self(Vector3::new(phi.sin(), 0.0, phi.cos()))
    }

    /// Projection onto `cos φ|H⟩ + sin φ|V⟩` for a wave-plate angle `φ` in degrees.
    pub fn from_polarization_deg(phi_deg: f64) -> Self {
        Self::planar(2.0 * phi_deg.to_radians())
    }

    pub fn x() -> Self {
        Self(Vector3::x())
    }

    pub fn y() -> Self {
        Self(Vector3::y())
    }

    pub fn z() -> Self {
        Self(Vector3::z())
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self(-self.0)
    }

    pub fn observable(&self) -> Mat2 {
        let [sx, sy, sz] = paulis();
        sx * c(self.0.x) + sy * c(self.0.y) + sz * c(self.0.z)
    }
}

impl TryFrom<[f64; 3]> for BlochSetting {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<BlochSetting> for [f64; 3] {
    fn from(b: BlochSetting) -> Self {
        [b.0.x, b.0.y, b.0.z]
    }
}

/// A state plus one Bloch setting per measurement choice of each party.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub state: TwoQubitState,
    pub settings_a: Vec<BlochSetting>,
    pub settings_b: Vec<BlochSetting>,
}

impl Strategy {
    pub fn new(state: TwoQubitState, settings_a: Vec<BlochSetting>, settings_b: Vec<BlochSetting>) -> Result<Self> {
        if settings_a.is_empty() || settings_b.is_empty() {
            return Err(Error::InvalidSetting("each party needs at least one setting".into()));
        }
        Ok(Self { state, settings_a, settings_b })
    }

    pub fn scenario(&self) -> Scenario {
        Scenario { n_a: self.settings_a.len(), n_b: self.settings_b.len() }
    }
}

/// Local Bloch vectors and correlation matrix of a two-qubit state:
/// `r_i = Tr(ρ σ_i⊗𝟙)`, `s_j = Tr(ρ 𝟙⊗σ_j)`, `T_ij = Tr(ρ σ_i⊗σ_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliExpectations {
    pub r: Vector3<f64>,
    pub s: Vector3<f64>,
    pub t: nalgebra::Matrix3<f64>,
}

impl PauliExpectations {
    pub fn of(rho: &Mat4) -> Self {
        let p = paulis();
        let id = identity2();
        let r = Vector3::from_fn(|i, _| expectation(rho, &kron(&p[i], &id)));
        let s = Vector3::from_fn(|j, _| expectation(rho, &kron(&id, &p[j])));
        let t = nalgebra::Matrix3::from_fn(|i, j| expectation(rho, &kron(&p[i], &p[j])));
        Self { r, s, t }
    }

    #[inline]
    pub fn correlation(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        a.dot(&(self.t * b))
    }

    /// Born-rule behavior for the given settings.
    pub fn behavior(&self, settings_a: &[BlochSetting], settings_b: &[BlochSetting]) -> Behavior {
        let scenario = Scenario { n_a: settings_a.len(), n_b: settings_b.len() };
        let e = settings_a
            .iter()
            .flat_map(|a| settings_b.iter().map(move |b| self.correlation(&a.0, &b.0)))
            .collect();
        let ea = settings_a.iter().map(|a| self.r.dot(&a.0)).collect();
        let eb = settings_b.iter().map(|b| self.s.dot(&b.0)).collect();
        let corr = Correlators::new(scenario, e, ea, eb).expect("shapes match");
        clamped_behavior(&corr)
    }
}

// Born-rule probabilities are nonnegative up to rounding; clamp the rounding.
fn clamped_behavior(c: &Correlators) -> Behavior {
    let s = c.scenario();
    Behavior::from_fn(s, |a, b, x, y| c.reconstructed(a, b, x, y).max(0.0))
        .expect("Born-rule probabilities are valid")
}

/// `p(a,b|x,y) = Tr[ρ (𝟙 + a a_x·σ)/2 ⊗ (𝟙 + b b_y·σ)/2]`.
pub fn behavior_of(st: &Strategy) -> Behavior {
    PauliExpectations::of(&density_of(&st.state)).behavior(&st.settings_a, &st.settings_b)
}

/// Visibility-style noise: `ρ' = Vρ + (1-V)[w 𝟙/4 + (1-w) D(ρ)]`, where `D`
/// dephases in the H/V product basis (removes every off-diagonal element,
/// in particular the `|HH⟩⟨VV|` coherence).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub visibility: f64,
    pub white_fraction: f64,
    /// Standard deviation of the per-setting rotation error of a Bloch vector, radians.
    pub angle_jitter: f64,
}

impl NoiseModel {
    pub fn new(visibility: f64, white_fraction: f64, angle_jitter: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) || !(0.0..=1.0).contains(&white_fraction) {
            return Err(Error::InvalidConfig(format!(
                "visibility {visibility} and white fraction {white_fraction} must lie in [0, 1]"
            )));
        }
        if !(angle_jitter >= 0.0) {
            return Err(Error::InvalidConfig(format!("angle jitter {angle_jitter} must be >= 0")));
        }
        Ok(Self { visibility, white_fraction, angle_jitter })
    }

    pub fn ideal() -> Self {
        Self { visibility: 1.0, white_fraction: 0.0, angle_jitter: 0.0 }
    }
}

impl Default for NoiseModel {
    /// Source visibility 0.997, pure dephasing, 0.1° setting jitter.
    fn default() -> Self {
        Self { visibility: 0.997, white_fraction: 0.0, angle_jitter: 0.1_f64.to_radians() }
    }
}

pub fn apply_noise(s: &TwoQubitState, nm: &NoiseModel) -> TwoQubitState {
    if nm.visibility == 1.0 {
        return s.clone();
    }
    let rho = density_of(s);
    let v = nm.visibility;
    let w = nm.white_fraction;
    let dephased = Mat4::from_fn(|r, col| if r == col { rho[(r, col)] } else { c(0.0) });
    let noisy = rho * c(v) + (Mat4::identity() * c(w / 4.0) + dephased * c(1.0 - w)) * c(1.0 - v);
    TwoQubitState::Density(noisy)
}

/// Settings saturating `S cos θ + S' sin θ ≤ 2√2` on `|ψ_{π/4}⟩`:
/// `A1 = σx`, `A2 = σz`, `B1 = -sin χ σz - cos χ σx`, `B2 = cos χ σz - sin χ σx`, `χ = θ - 3π/4`.
pub fn circle_settings(theta: f64) -> Strategy {
    let chi = theta - 3.0 * FRAC_PI_4;
    let (s, co) = chi.sin_cos();
    let b1 = BlochSetting(Vector3::new(-co, 0.0, -s));
    let b2 = BlochSetting(Vector3::new(-s, 0.0, co));
    Strategy {
        state: TwoQubitState::maximally_entangled(),
        settings_a: vec![BlochSetting::x(), BlochSetting::z()],
        settings_b: vec![b1, b2],
    }
}

/// Chained-inequality settings on `|ψ_{π/4}⟩`, all in the x–z plane.
///
/// Going round the circle in steps of `π/2n` the order is
/// `B1, A1, B2, A2, …, Bn, An`: Bob's setting `y` sits at `(2y-2)·π/2n` and
/// Alice's setting `x` at `(2x-1)·π/2n` (one-based).
pub fn chained_settings(n: usize) -> Result<Strategy> {
    if n < 2 {
        return Err(Error::InvalidN(n));
    }
    let step = std::f64::consts::PI / (2 * n) as f64;
    let settings_a = (0..n).map(|x| BlochSetting::planar((2 * x + 1) as f64 * step)).collect();
    let settings_b = (0..n).map(|y| BlochSetting::planar((2 * y) as f64 * step)).collect();
    Ok(Strategy { state: TwoQubitState::maximally_entangled(), settings_a, settings_b })
}

/// Tetrahedron for Alice and three orthogonal axes for Bob on `|ψ_{π/4}⟩`.
///
/// On `|ψ_{π/4}⟩` the correlation matrix is `diag(1, -1, 1)`, so the printed
/// trine `x, y, z` gives the optimum only once Bob's second axis is `-y`.
pub fn elegant_settings() -> Strategy {
    let k = 1.0 / 3f64.sqrt();
    let a = [[k, k, k], [k, -k, -k], [-k, k, -k], [-k, -k, k]];
    Strategy {
        state: TwoQubitState::maximally_entangled(),
        settings_a: a.iter().map(|v| BlochSetting(Vector3::new(v[0], v[1], v[2]))).collect(),
        settings_b: vec![BlochSetting::x(), BlochSetting::y().neg(), BlochSetting::z()],
    }
}

/// Settings given as polarization projection angles in degrees (one row per party).
pub fn polarization_strategy(theta_deg: f64, alice_deg: &[f64], bob_deg: &[f64]) -> Result<Strategy> {
    Strategy::new(
        TwoQubitState::pure_angle(theta_deg.to_radians())?,
        alice_deg.iter().map(|&d| BlochSetting::from_polarization_deg(d)).collect(),
        bob_deg.iter().map(|&d| BlochSetting::from_polarization_deg(d)).collect(),
    )
}

/// `|Φ+⟩ = (|HH⟩ + |VV⟩)/√2`.
pub fn phi_plus() -> Ket4 {
    Ket4::new(c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2))
}

#[derive(Serialize, Deserialize)]
struct StrategyJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rho: Option<Vec<f64>>,
    #[serde(rename = "A")]
    a: Vec<BlochSetting>,
    #[serde(rename = "B")]
    b: Vec<BlochSetting>,
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (theta, rho) = match &self.state {
            TwoQubitState::PureAngle(t) => (Some(*t), None),
            TwoQubitState::Density(m) => {
                // row-major, re/im interleaved
                let mut flat = Vec::with_capacity(32);
                for r in 0..4 {
                    for col in 0..4 {
                        flat.push(m[(r, col)].re);
                        flat.push(m[(r, col)].im);
                    }
                }
                (None, Some(flat))
            }
        };
        StrategyJson { theta, rho, a: self.settings_a.clone(), b: self.settings_b.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = StrategyJson::deserialize(deserializer)?;
        let state = match (raw.theta, raw.rho) {
            (Some(t), None) => TwoQubitState::pure_angle(t).map_err(D::Error::custom)?,
            (None, Some(flat)) => {
                if flat.len() != 32 {
                    return Err(D::Error::custom("rho needs 32 numbers (4x4 re/im)"));
                }
                let m = Mat4::from_fn(|r, col| C64::new(flat[2 * (4 * r + col)], flat[2 * (4 * r + col) + 1]));
                TwoQubitState::from_density(m).map_err(D::Error::custom)?
            }
            _ => return Err(D::Error::custom("exactly one of `theta` or `rho` is required")),
        };
        Strategy::new(state, raw.a, raw.b).map_err(D::Error::custom)
    }
}
