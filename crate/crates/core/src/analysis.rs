//! Local content, chained nonlocal content, predictability bounds and count-based errors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{evaluate, BellFunctional};
use crate::lp;
use crate::scenario::{outcome_sign, Behavior, Scenario};
use crate::simulate::{estimate_behavior, CountRecord};

/// Largest scenario (per party) accepted by [`epr2_local_content`].
pub const MAX_EPR2_SETTINGS: usize = 8;
pub const NS_INPUT_TOL: f64 = 1e-8;
const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalWeight {
    pub weight: f64,
    pub alice: Vec<i8>,
    pub bob: Vec<i8>,
}

/// Split `p = (1 - q_min) p_L + q_min p_NS` with the smallest possible `q_min`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Epr2Result {
    pub q_min: f64,
    /// Unnormalised weights of the deterministic vertices; they sum to `1 - q_min`.
    pub local_weights: Vec<LocalWeight>,
    /// `p_L`, absent when `q_min = 1`.
    pub local_part: Option<Behavior>,
    /// `p_NS`, absent when `q_min = 0`.
    pub nonlocal_part: Option<Behavior>,
    pub status: LpStatus,
    pub pivots: usize,
}

impl Epr2Result {
    /// `(1 - q_min) p_L + q_min p_NS` as a flat table.
    pub fn reconstruct(&self, scenario: Scenario) -> Vec<f64> {
        let mut out = vec![0.0; 4 * scenario.pairs()];
        for (part, w) in [(&self.local_part, 1.0 - self.q_min), (&self.nonlocal_part, self.q_min)] {
            if let Some(b) = part {
                for (o, v) in out.iter_mut().zip(b.as_flat()) {
                    *o += w * v;
                }
            }
        }
        out
    }
}

fn vertex_signs(bits: usize, n: usize) -> Vec<i8> {
    (0..n).map(|k| if bits >> k & 1 == 0 { 1 } else { -1 }).collect()
}

fn normalized(s: Scenario, r: &[f64]) -> Result<Behavior> {
    Behavior::from_fn(s, |a, b, x, y| {
        let at = |a: usize, b: usize| r[((a * 2 + b) * s.n_a + x) * s.n_b + y].max(0.0);
        let total: f64 = (0..4).map(|k| at(k / 2, k % 2)).sum();
        at(a, b) / total
    })
}

/// Largest local weight in a local/no-signaling split, by linear programming over
/// all `2^(nA+nB)` deterministic vertices.
pub fn epr2_local_content(b: &Behavior) -> Result<Epr2Result> {
    let s = b.scenario();
    if s.n_a > MAX_EPR2_SETTINGS || s.n_b > MAX_EPR2_SETTINGS {
        return Err(Error::TooManySettings(format!(
            "local content LP supports at most {MAX_EPR2_SETTINGS} settings per party, got {s}"
        )));
    }
    let dev = b.signaling_deviation();
    if dev > NS_INPUT_TOL {
        return Err(Error::SignalingInput(dev));
    }

    let nv = 1usize << (s.n_a + s.n_b);
    let rows = 4 * s.pairs();
    let mut a = vec![vec![0.0; nv]; rows];
    for v in 0..nv {
        let (al, bo) = (v & ((1 << s.n_a) - 1), v >> s.n_a);
        for x in 0..s.n_a {
            for y in 0..s.n_b {
                let (oa, ob) = (al >> x & 1, bo >> y & 1);
                a[((oa * 2 + ob) * s.n_a + x) * s.n_b + y][v] = 1.0;
            }
        }
    }
    let sol = lp::maximize(&vec![1.0; nv], &a, b.as_flat())?;

    let local_mass = sol.objective.clamp(0.0, 1.0);
    let mut q_min = 1.0 - local_mass;
    if q_min < ZERO_TOL {
        q_min = 0.0;
    }
    let mut local_weights = Vec::new();
    let mut local = vec![0.0; rows];
    for (v, &w) in sol.x.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        for (r, row) in a.iter().enumerate() {
            local[r] += w * row[v];
        }
        local_weights.push(LocalWeight {
            weight: w,
            alice: vertex_signs(v & ((1 << s.n_a) - 1), s.n_a),
            bob: vertex_signs(v >> s.n_a, s.n_b),
        });
    }
    let local_part = if local_mass > ZERO_TOL { Some(normalized(s, &local)?) } else { None };
    let nonlocal_part = if q_min > 0.0 {
        let rem: Vec<f64> = b.as_flat().iter().zip(&local).map(|(p, l)| p - l).collect();
        Some(normalized(s, &rem)?)
    } else {
        None
    };
    Ok(Epr2Result { q_min, local_weights, local_part, nonlocal_part, status: LpStatus::Optimal, pivots: sol.pivots })
}

/// Lower bound `1 - I_n` on the nonlocal content, clamped to `[0, 1]`.
pub fn chained_nonlocal_content(i_n: f64) -> f64 {
    (1.0 - i_n).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Predictability {
    /// `1/2 + I_n/2`
    pub baseline: f64,
    /// Baseline plus the bias correction.
    pub corrected: f64,
}

/// Bound on the probability of guessing an outcome, from a chained value and the
/// largest observed marginal bias. The correction is additive.
pub fn predictability_bound(i_n: f64, bias: f64) -> Predictability {
    predictability_bound_with(i_n, bias, |b| b)
}

/// As [`predictability_bound`] with a custom bias correction term.
pub fn predictability_bound_with(i_n: f64, bias: f64, correction: impl Fn(f64) -> f64) -> Predictability {
    let baseline = 0.5 + i_n / 2.0;
    Predictability { baseline, corrected: baseline + correction(bias) }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub value: f64,
    pub std_error: f64,
    /// Standard error of each estimated correlator, row-major `[x][y]`.
    pub correlator_errors: Vec<f64>,
}

/// Value of `f` on counted data, with multinomial errors per setting pair added in quadrature.
pub fn functional_error(f: &BellFunctional, counts: &CountRecord) -> Result<UncertaintyReport> {
    let s = f.scenario;
    s.check_same(&counts.scenario)?;
    let est = estimate_behavior(counts)?;
    let p = &est.behavior;
    let value = evaluate(f, p)?;
    let mut var = 0.0;
    let mut correlator_errors = Vec::with_capacity(s.pairs());
    for x in 0..s.n_a {
        for y in 0..s.n_b {
            let n = est.totals[x * s.n_b + y] as f64;
            // the averaged marginals spread each marginal coefficient over the other party's settings
            let w = |a: usize, b: usize| {
                let (sa, sb) = (outcome_sign(a), outcome_sign(b));
                f.coef(x, y) * sa * sb + f.m_a[x] * sa / s.n_b as f64 + f.m_b[y] * sb / s.n_a as f64
            };
            let (mut m1, mut m2, mut e1, mut e2) = (0.0, 0.0, 0.0, 0.0);
            for k in 0..4 {
                let (a, b) = (k / 2, k % 2);
                let pk = p.get(a, b, x, y);
                let wk = w(a, b);
                m1 += wk * pk;
                m2 += wk * wk * pk;
                let sk = outcome_sign(a) * outcome_sign(b);
                e1 += sk * pk;
                e2 += pk;
            }
            var += ((m2 - m1 * m1) / n).max(0.0);
            correlator_errors.push(((e2 - e1 * e1) / n).max(0.0).sqrt());
        }
    }
    Ok(UncertaintyReport { value, std_error: var.sqrt(), correlator_errors })
}
