//! Behaviors and correlators for bipartite Bell scenarios with outcomes `±1`.
//!
//! Index convention used everywhere (tables and JSON): outcome index `0` is
//! the `+1` outcome and index `1` is the `-1` outcome. A behavior table is
//! addressed as `p[a][b][x][y]` with zero-based setting indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for logical checks (normalization, no-signaling, feasibility).
pub const LOGICAL_TOL: f64 = 1e-9;
/// Tolerance for arithmetic round trips.
pub const ROUNDTRIP_TOL: f64 = 1e-12;
/// Allowed negativity of a single table entry.
pub const ENTRY_TOL: f64 = 1e-12;

/// Outcome value for outcome index 0 or 1.
#[inline]
pub fn outcome_sign(idx: usize) -> f64 {
    if idx == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(rename = "nA")]
    pub n_a: usize,
    #[serde(rename = "nB")]
    pub n_b: usize,
}

impl Scenario {
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 || n_b == 0 {
            return Err(Error::InvalidConfig(format!(
                "scenario needs at least one setting per party, got {n_a}x{n_b}"
            )));
        }
        Ok(Self { n_a, n_b })
    }

    pub fn pairs(&self) -> usize {
        self.n_a * self.n_b
    }

    pub(crate) fn check_same(&self, other: &Scenario) -> Result<()> {
        if self != other {
            return Err(Error::ScenarioMismatch {
                expected: self.to_string(),
                found: other.to_string(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.n_a, self.n_b)
    }
}

/// A full conditional distribution `p(a,b|x,y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    // layout: ((a * 2 + b) * n_a + x) * n_b + y
    p: Vec<f64>,
}

impl Behavior {
    /// Build from a flat table in `[a][b][x][y]` order.
    pub fn from_flat(scenario: Scenario, p: Vec<f64>) -> Result<Self> {
        if p.len() != 4 * scenario.pairs() {
            return Err(Error::InvalidProbability(format!(
                "table has {} entries, scenario {} needs {}",
                p.len(),
                scenario,
                4 * scenario.pairs()
            )));
        }
        let b = Self { scenario, p };
        b.validate()?;
        Ok(b)
    }

    /// Build from `f(a, b, x, y)` with outcome indices in `{0, 1}`.
    pub fn from_fn(scenario: Scenario, f: impl Fn(usize, usize, usize, usize) -> f64) -> Result<Self> {
        let mut p = vec![0.0; 4 * scenario.pairs()];
        for a in 0..2 {
            for b in 0..2 {
                for x in 0..scenario.n_a {
                    for y in 0..scenario.n_b {
                        p[index(&scenario, a, b, x, y)] = f(a, b, x, y);
                    }
                }
            }
        }
        Self::from_flat(scenario, p)
    }

    fn validate(&self) -> Result<()> {
        for (i, &v) in self.p.iter().enumerate() {
            if !v.is_finite() || v < -ENTRY_TOL || v > 1.0 + ENTRY_TOL {
                return Err(Error::InvalidProbability(format!("entry {i} = {v} outside [0, 1]")));
            }
        }
        for x in 0..self.scenario.n_a {
            for y in 0..self.scenario.n_b {
                let total: f64 = (0..4).map(|ab| self.get(ab / 2, ab % 2, x, y)).sum();
                if (total - 1.0).abs() > LOGICAL_TOL {
                    return Err(Error::InvalidProbability(format!(
                        "p(.,.|{x},{y}) sums to {total}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.p[index(&self.scenario, a, b, x, y)]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.p
    }

    /// Uniformly random outcomes for every setting pair.
    pub fn uniform(scenario: Scenario) -> Self {
        Self { scenario, p: vec![0.25; 4 * scenario.pairs()] }
    }

    /// The PR box: `a·b = (-1)^{x·y}` with uniform marginals (2x2 settings).
    pub fn pr_box() -> Self {
        let s = Scenario { n_a: 2, n_b: 2 };
        Self::from_fn(s, |a, b, x, y| {
            let same = a == b;
            let want_same = x * y == 0;
            if same == want_same {
                0.5
            } else {
                0.0
            }
        })
        .expect("PR box is a valid behavior")
    }

    /// Local deterministic behavior with outcomes `alice[x]`, `bob[y]` in `{+1, -1}`.
    pub fn deterministic(alice: &[i8], bob: &[i8]) -> Result<Self> {
        let s = Scenario::new(alice.len(), bob.len())?;
        Self::from_fn(s, |a, b, x, y| {
            let hit_a = outcome_sign(a) == f64::from(alice[x]);
            let hit_b = outcome_sign(b) == f64::from(bob[y]);
            if hit_a && hit_b {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Behavior, lambda: f64) -> Result<Self> {
        self.scenario.check_same(&other.scenario)?;
        let p = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(u, v)| lambda * u + (1.0 - lambda) * v)
            .collect();
        Self::from_flat(self.scenario, p)
    }

    /// `p_A(a|x, y)`: Alice's marginal when Bob uses setting `y`.
    pub fn marginal_a(&self, a: usize, x: usize, y: usize) -> f64 {
        self.get(a, 0, x, y) + self.get(a, 1, x, y)
    }

    pub fn marginal_b(&self, b: usize, x: usize, y: usize) -> f64 {
        self.get(0, b, x, y) + self.get(1, b, x, y)
    }

    /// Largest dependence of either party's marginal on the other party's setting.
    pub fn signaling_deviation(&self) -> f64 {
        let s = self.scenario;
        let mut dev: f64 = 0.0;
        for x in 0..s.n_a {
            for y in 1..s.n_b {
                dev = dev.max((self.marginal_a(0, x, y) - self.marginal_a(0, x, 0)).abs());
            }
        }
        for y in 0..s.n_b {
            for x in 1..s.n_a {
                dev = dev.max((self.marginal_b(0, x, y) - self.marginal_b(0, 0, y)).abs());
            }
        }
        dev
    }
}

#[inline]
fn index(s: &Scenario, a: usize, b: usize, x: usize, y: usize) -> usize {
    ((a * 2 + b) * s.n_a + x) * s.n_b + y
}

/// Validate a table given as nested `p[a][b][x][y]`.
pub fn behavior_from_table(scenario: Scenario, table: &[Vec<Vec<Vec<f64>>>]) -> Result<Behavior> {
    let shape_err = || {
        Error::InvalidProbability(format!("table shape must be 2 x 2 x {} x {}", scenario.n_a, scenario.n_b))
    };
    if table.len() != 2 {
        return Err(shape_err());
    }
    let mut flat = Vec::with_capacity(4 * scenario.pairs());
    for row_a in table {
        if row_a.len() != 2 {
            return Err(shape_err());
        }
        for row_b in row_a {
            if row_b.len() != scenario.n_a {
                return Err(shape_err());
            }
            for row_x in row_b {
                if row_x.len() != scenario.n_b {
                    return Err(shape_err());
                }
                flat.extend_from_slice(row_x);
            }
        }
    }
    Behavior::from_flat(scenario, flat)
}

/// Check `p` for no-signaling within `tol`.
pub fn is_no_signaling(b: &Behavior, tol: f64) -> bool {
    b.signaling_deviation() <= tol
}

/// Correlators `E_xy` and single-party marginals `E^A_x`, `E^B_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlators {
    scenario: Scenario,
    /// Row-major `n_a x n_b`.
    pub e: Vec<f64>,
    pub ea: Vec<f64>,
    pub eb: Vec<f64>,
}

impl Correlators {
    pub fn new(scenario: Scenario, e: Vec<f64>, ea: Vec<f64>, eb: Vec<f64>) -> Result<Self> {
        if e.len() != scenario.pairs() || ea.len() != scenario.n_a || eb.len() != scenario.n_b {
            return Err(Error::InvalidConfig(format!(
                "correlator tables do not match scenario {scenario}"
            )));
        }
        Ok(Self { scenario, e, ea, eb })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    #[inline]
    pub fn e(&self, x: usize, y: usize) -> f64 {
        self.e[x * self.scenario.n_b + y]
    }

    /// `(1 + a E^A_x + b E^B_y + a b E_xy) / 4`.
    #[inline]
    pub fn reconstructed(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        let (sa, sb) = (outcome_sign(a), outcome_sign(b));
        (1.0 + sa * self.ea[x] + sb * self.eb[y] + sa * sb * self.e(x, y)) / 4.0
    }
}

/// Correlators with marginals averaged over the other party's settings.
pub fn correlators_of(b: &Behavior) -> Correlators {
    let s = b.scenario;
    let mut e = vec![0.0; s.pairs()];
    let mut ea = vec![0.0; s.n_a];
    let mut eb = vec![0.0; s.n_b];
    for x in 0..s.n_a {
        for y in 0..s.n_b {
            let (pp, pm, mp, mm) = (b.get(0, 0, x, y), b.get(0, 1, x, y), b.get(1, 0, x, y), b.get(1, 1, x, y));
            e[x * s.n_b + y] = pp - pm - mp + mm;
            ea[x] += (pp + pm - mp - mm) / s.n_b as f64;
            eb[y] += (pp - pm + mp - mm) / s.n_a as f64;
        }
    }
    Correlators { scenario: s, e, ea, eb }
}

/// Like [`correlators_of`] but rejects behaviors whose marginals differ by more than `tol`.
pub fn correlators_of_strict(b: &Behavior, tol: f64) -> Result<Correlators> {
    let deviation = b.signaling_deviation();
    if deviation > tol {
        return Err(Error::SignalingDetected { deviation, tol });
    }
    Ok(correlators_of(b))
}

/// The unique binary-outcome behavior with the given correlators.
pub fn behavior_from_correlators(c: &Correlators) -> Result<Behavior> {
    let s = c.scenario;
    let mut p = vec![0.0; 4 * s.pairs()];
    let mut min_probability = f64::INFINITY;
    for a in 0..2 {
        for b in 0..2 {
            for x in 0..s.n_a {
                for y in 0..s.n_b {
                    let v = c.reconstructed(a, b, x, y);
                    min_probability = min_probability.min(v);
                    p[index(&s, a, b, x, y)] = v.max(0.0);
                }
            }
        }
    }
    if min_probability < -LOGICAL_TOL {
        return Err(Error::InfeasibleCorrelators { min_probability });
    }
    Behavior::from_flat(s, p)
}

#[derive(Serialize, Deserialize)]
struct BehaviorJson {
    #[serde(rename = "nA")]
    n_a: usize,
    #[serde(rename = "nB")]
    n_b: usize,
    p: Vec<Vec<Vec<Vec<f64>>>>,
}

impl Serialize for Behavior {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let s = self.scenario;
        let p = (0..2)
            .map(|a| {
                (0..2)
                    .map(|b| (0..s.n_a).map(|x| (0..s.n_b).map(|y| self.get(a, b, x, y)).collect()).collect())
                    .collect()
            })
            .collect();
        BehaviorJson { n_a: s.n_a, n_b: s.n_b, p }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Behavior {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = BehaviorJson::deserialize(deserializer)?;
        let scenario = Scenario::new(raw.n_a, raw.n_b).map_err(serde::de::Error::custom)?;
        behavior_from_table(scenario, &raw.p).map_err(serde::de::Error::custom)
    }
}
