//! Seesaw search for qubit quantum values of Bell functionals.
//!
//! Each restart alternates exact best responses: Alice's observables for
//! fixed state and Bob, Bob's for fixed state and Alice, then (unless the
//! state is pinned) the top eigenvector of the Bell operator. Every step can
//! only increase the value, so each restart's trace is nondecreasing. The
//! result is a lower bound on the qubit maximum, never a certificate.

use std::f64::consts::SQRT_2;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{chsh, chsh_prime, evaluate, tilted, tilted_local_bound, BellFunctional};
use crate::par;
use crate::quantum::{
    behavior_of, circle_settings, density_of, hermitian_norm, identity2, kron, phi_plus, projector, top_eigenvector,
    BlochSetting, Mat2, Mat4, PauliExpectations, Strategy, TwoQubitState, C64,
};
use crate::scenario::correlators_of;

pub const DEFAULT_RESTARTS: usize = 32;
/// Non-violation claims get a wider search.
pub const MES_RESTARTS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum Restriction {
    None,
    FixedState(TwoQubitState),
    MaximallyEntangled,
    /// Every Bloch vector confined to the x–z plane (real qubit measurements).
    Planar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub restriction: Restriction,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self { restarts: DEFAULT_RESTARTS, max_iters: 5000, tol: 1e-13, seed: 0, restriction: Restriction::None }
    }
}

impl SeesawConfig {
    pub fn with_restriction(mut self, restriction: Restriction) -> Self {
        self.restriction = restriction;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidConfig("seesaw needs restarts >= 1 and max_iters >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("seesaw tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    /// Functional value at the best strategy, in the functional's own orientation.
    pub value: f64,
    pub strategy: Strategy,
    /// Iterations used by the winning restart.
    pub iterations: usize,
    pub converged: bool,
    pub best_restart: usize,
    /// Per restart, the (maximisation-oriented) value after each iteration.
    pub traces: Vec<Vec<f64>>,
}

struct RestartOutcome {
    score: f64,
    strategy: Strategy,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

/// `Σ c_xy A_x⊗B_y + Σ mA_x A_x⊗𝟙 + Σ mB_y 𝟙⊗B_y` (the offset is not included).
pub fn bell_operator(f: &BellFunctional, obs_a: &[Mat2], obs_b: &[Mat2]) -> Mat4 {
    let id = identity2();
    let mut op = Mat4::zeros();
    for (x, a) in obs_a.iter().enumerate() {
        for (y, b) in obs_b.iter().enumerate() {
            let k = f.coef(x, y);
            if k != 0.0 {
                op += kron(a, b) * C64::new(k, 0.0);
            }
        }
        if f.m_a[x] != 0.0 {
            op += kron(a, &id) * C64::new(f.m_a[x], 0.0);
        }
    }
    for (y, b) in obs_b.iter().enumerate() {
        if f.m_b[y] != 0.0 {
            op += kron(&id, b) * C64::new(f.m_b[y], 0.0);
        }
    }
    op
}

fn random_direction(rng: &mut ChaCha8Rng, planar: bool) -> Vector3<f64> {
    if planar {
        let phi = rng.random::<f64>() * std::f64::consts::TAU;
        return Vector3::new(phi.sin(), 0.0, phi.cos());
    }
    loop {
        let v: Vector3<f64> = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

fn best_response(k: Vector3<f64>, planar: bool, current: Vector3<f64>) -> Vector3<f64> {
    let k = if planar { Vector3::new(k.x, 0.0, k.z) } else { k };
    let n = k.norm();
    if n < 1e-14 {
        current
    } else {
        k / n
    }
}

fn score(g: &BellFunctional, ex: &PauliExpectations, a: &[Vector3<f64>], b: &[Vector3<f64>]) -> f64 {
    let ea: Vec<f64> = a.iter().map(|v| ex.r.dot(v)).collect();
    let eb: Vec<f64> = b.iter().map(|v| ex.s.dot(v)).collect();
    g.value_from_parts(|x, y| ex.correlation(&a[x], &b[y]), &ea, &eb)
}

fn observables(vs: &[Vector3<f64>]) -> Vec<Mat2> {
    vs.iter().map(|v| BlochSetting::along(*v).expect("unit vector").observable()).collect()
}

fn run_restart(g: &BellFunctional, cfg: &SeesawConfig, restart: usize) -> RestartOutcome {
    let s = g.scenario;
    let planar = cfg.restriction == Restriction::Planar;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);

    let mut a: Vec<Vector3<f64>> = (0..s.n_a).map(|_| random_direction(&mut rng, planar)).collect();
    let mut b: Vec<Vector3<f64>> = (0..s.n_b).map(|_| random_direction(&mut rng, planar)).collect();

    let pinned = match &cfg.restriction {
        Restriction::FixedState(st) => Some(st.clone()),
        Restriction::MaximallyEntangled => Some(TwoQubitState::maximally_entangled()),
        Restriction::None | Restriction::Planar => None,
    };
    let update_state = |a: &[Vector3<f64>], b: &[Vector3<f64>]| -> Mat4 {
        let op = bell_operator(g, &observables(a), &observables(b));
        projector(&top_eigenvector(&op).1)
    };
    let mut rho = match &pinned {
        Some(st) => density_of(st),
        None => update_state(&a, &b),
    };
    let mut ex = PauliExpectations::of(&rho);
    let mut value = score(g, &ex, &a, &b);
    let mut trace = vec![value];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        for x in 0..s.n_a {
            let mut k = ex.r * g.m_a[x];
            for y in 0..s.n_b {
                k += ex.t * b[y] * g.coef(x, y);
            }
            a[x] = best_response(k, planar, a[x]);
        }
        let tt = ex.t.transpose();
        for y in 0..s.n_b {
            let mut k = ex.s * g.m_b[y];
            for x in 0..s.n_a {
                k += tt * a[x] * g.coef(x, y);
            }
            b[y] = best_response(k, planar, b[y]);
        }
        if pinned.is_none() {
            rho = update_state(&a, &b);
            ex = PauliExpectations::of(&rho);
        }
        let next = score(g, &ex, &a, &b);
        trace.push(next);
        let delta = next - value;
        value = next;
        if delta.abs() < cfg.tol {
            converged = true;
            break;
        }
    }

    let state = match pinned {
        Some(st) => st,
        None => TwoQubitState::Density(rho),
    };
    let to_settings =
        |vs: &[Vector3<f64>]| vs.iter().map(|v| BlochSetting::along(*v).expect("unit vector")).collect::<Vec<_>>();
    let strategy = Strategy { state, settings_a: to_settings(&a), settings_b: to_settings(&b) };
    RestartOutcome { score: value, strategy, iterations, converged, trace }
}

/// Maximise (or minimise, per the functional's direction) over qubit strategies.
pub fn seesaw(f: &BellFunctional, cfg: &SeesawConfig) -> Result<SeesawResult> {
    cfg.validate()?;
    let g = f.as_maximization();
    let outcomes = par::map_indexed(cfg.restarts, |r| run_restart(&g, cfg, r));
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.score > outcomes[best].score {
            best = i;
        }
    }
    let traces = outcomes.iter().map(|o| o.trace.clone()).collect();
    let winner = outcomes.into_iter().nth(best).expect("restarts >= 1");
    let value = evaluate(f, &behavior_of(&winner.strategy))?;
    Ok(SeesawResult {
        value,
        strategy: winner.strategy,
        iterations: winner.iterations,
        converged: winner.converged,
        best_restart: best,
        traces,
    })
}

/// Seesaw with every measurement in the x–z plane.
pub fn seesaw_planar(f: &BellFunctional, cfg: &SeesawConfig) -> Result<SeesawResult> {
    seesaw(f, &cfg.clone().with_restriction(Restriction::Planar))
}

/// Seesaw with the state pinned to `(|HH⟩ + |VV⟩)/√2` (qubit search only).
pub fn seesaw_mes(f: &BellFunctional, cfg: &SeesawConfig) -> Result<SeesawResult> {
    seesaw(f, &cfg.clone().with_restriction(Restriction::MaximallyEntangled))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltedRow {
    pub tau: f64,
    pub s_chsh: f64,
    /// `-E^A_1 - E^B_1`
    pub marginal_sum: f64,
    pub s_tau: f64,
    pub local_bound: f64,
    /// Schmidt angle of the optimal state, degrees.
    pub theta_deg: f64,
}

pub const TILTED_CSV_HEADER: &str = "tau,S_CHSH,-E1-E2,S_tau,Local bound,theta";

impl TiltedRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.tau, self.s_chsh, self.marginal_sum, self.s_tau, self.local_bound, self.theta_deg
        )
    }
}

/// CHSH value and `-E^A_1 - E^B_1` of a strategy.
pub fn tilted_components(st: &Strategy) -> Result<(f64, f64)> {
    let b = behavior_of(st);
    let c = correlators_of(&b);
    Ok((evaluate(&chsh(), &b)?, -c.ea[0] - c.eb[0]))
}

/// Unrestricted seesaw optimum of the tilted expression for each `τ`.
pub fn scan_tilted(taus: &[f64], cfg: &SeesawConfig) -> Result<Vec<TiltedRow>> {
    taus.iter()
        .map(|&tau| {
            let res = seesaw(&tilted(tau)?, cfg)?;
            let (s_chsh, marginal_sum) = tilted_components(&res.strategy)?;
            let theta_deg = res.strategy.state.schmidt_angle().unwrap_or(f64::NAN).to_degrees();
            Ok(TiltedRow {
                tau,
                s_chsh,
                marginal_sum,
                s_tau: res.value,
                local_bound: tilted_local_bound(tau),
                theta_deg,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CirclePoint {
    pub theta: f64,
    pub s: f64,
    pub s_prime: f64,
    pub radius: f64,
}

/// `(S, S')` from the circle-saturating settings at each angle.
pub fn quantum_circle_boundary(thetas: &[f64]) -> Vec<CirclePoint> {
    thetas
        .iter()
        .map(|&theta| {
            let b = behavior_of(&circle_settings(theta));
            let s = evaluate(&chsh(), &b).expect("2x2");
            let s_prime = evaluate(&chsh_prime(), &b).expect("2x2");
            CirclePoint { theta, s, s_prime, radius: s.hypot(s_prime) }
        })
        .collect()
}

/// `n` angles evenly spaced over `[0, 2π)`.
pub fn circle_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect()
}

fn check_dichotomic(m: &Mat2, label: &str) -> Result<()> {
    let herm = (m - m.adjoint()).iter().fold(0.0_f64, |acc, v| acc.max(v.norm()));
    let sq = (m * m - identity2()).iter().fold(0.0_f64, |acc, v| acc.max(v.norm()));
    if herm > 1e-10 || sq > 1e-10 {
        return Err(Error::InvalidObservable(format!(
            "{label}: Hermiticity error {herm:.2e}, |O^2 - 1| = {sq:.2e}"
        )));
    }
    Ok(())
}

/// Norm of `2√2·𝟙 - B(θ) - (1/√2)[sin(π/4+θ)A2 + cos(π/4+θ)A1 - B1]²
/// - (1/√2)[cos(π/4+θ)A2 - sin(π/4+θ)A1 + B2]²`, with
/// `B(θ) = Σ_xy [cos θ (-1)^{(x-1)(y-1)} + sin θ (-1)^{xy}] A_x B_y`.
///
/// `observables` is `[A1, A2, B1, B2]`.
pub fn sos_residual(theta: f64, observables: &[Mat2; 4]) -> Result<f64> {
    for (m, label) in observables.iter().zip(["A1", "A2", "B1", "B2"]) {
        check_dichotomic(m, label)?;
    }
    let id = identity2();
    let a = [kron(&observables[0], &id), kron(&observables[1], &id)];
    let b = [kron(&id, &observables[2]), kron(&id, &observables[3])];
    let r = |v: f64| C64::new(v, 0.0);

    let mut bell = Mat4::zeros();
    for x in 1..=2usize {
        for y in 1..=2usize {
            let k = theta.cos() * sign_pow((x - 1) * (y - 1)) + theta.sin() * sign_pow(x * y);
            bell += a[x - 1] * b[y - 1] * r(k);
        }
    }
    let (s, c) = (std::f64::consts::FRAC_PI_4 + theta).sin_cos();
    let p = a[1] * r(s) + a[0] * r(c) - b[0];
    let q = a[1] * r(c) - a[0] * r(s) + b[1];
    let residual = Mat4::identity() * r(2.0 * SQRT_2) - bell - (p * p + q * q) * r(1.0 / SQRT_2);
    Ok(hermitian_norm(&residual))
}

fn sign_pow(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The `|Φ+⟩` projector, handy for pinned-state searches.
pub fn phi_plus_density() -> Mat4 {
    projector(&phi_plus())
}
