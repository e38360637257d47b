//! Bell expressions in correlator form and their exact classical bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::scenario::{behavior_from_correlators, correlators_of, Behavior, Correlators, Scenario};

/// Largest Alice setting count accepted by [`local_bound`].
pub const MAX_LOCAL_SETTINGS: usize = 26;
/// Largest `8^nA * 8^nB` accepted by [`lplus1pr_bound`].
pub const MAX_WIRING_COMBINATIONS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// `+1` for maximisation, `-1` for minimisation.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Maximize => 1.0,
            Direction::Minimize => -1.0,
        }
    }
}

/// `offset + Σ c_xy E_xy + Σ mA_x E^A_x + Σ mB_y E^B_y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionalJson", into = "FunctionalJson")]
pub struct BellFunctional {
    pub name: String,
    pub scenario: Scenario,
    /// Row-major `n_a x n_b`.
    pub c: Vec<f64>,
    pub m_a: Vec<f64>,
    pub m_b: Vec<f64>,
    pub offset: f64,
    pub direction: Direction,
}

impl BellFunctional {
    pub fn new(
        name: impl Into<String>,
        scenario: Scenario,
        c: Vec<f64>,
        m_a: Vec<f64>,
        m_b: Vec<f64>,
        offset: f64,
        direction: Direction,
    ) -> Result<Self> {
        if c.len() != scenario.pairs() || m_a.len() != scenario.n_a || m_b.len() != scenario.n_b {
            return Err(Error::InvalidConfig(format!(
                "coefficient tables do not match scenario {scenario}"
            )));
        }
        Ok(Self { name: name.into(), scenario, c, m_a, m_b, offset, direction })
    }

    fn from_rows(name: &str, rows: &[&[f64]], m_a: &[f64], m_b: &[f64], offset: f64, direction: Direction) -> Self {
        let scenario = Scenario { n_a: rows.len(), n_b: rows[0].len() };
        let c = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(name, scenario, c, m_a.to_vec(), m_b.to_vec(), offset, direction)
            .expect("built-in functional is well formed")
    }

    #[inline]
    pub fn coef(&self, x: usize, y: usize) -> f64 {
        self.c[x * self.scenario.n_b + y]
    }

    pub fn value_of_correlators(&self, c: &Correlators) -> Result<f64> {
        self.scenario.check_same(&c.scenario())?;
        let mut v = self.offset;
        v += self.c.iter().zip(&c.e).map(|(k, e)| k * e).sum::<f64>();
        v += self.m_a.iter().zip(&c.ea).map(|(k, e)| k * e).sum::<f64>();
        v += self.m_b.iter().zip(&c.eb).map(|(k, e)| k * e).sum::<f64>();
        Ok(v)
    }

    /// Value with correlators supplied by `e(x, y)`.
    pub(crate) fn value_from_parts(&self, e: impl Fn(usize, usize) -> f64, ea: &[f64], eb: &[f64]) -> f64 {
        let s = self.scenario;
        let mut v = self.offset;
        for x in 0..s.n_a {
            for y in 0..s.n_b {
                v += self.coef(x, y) * e(x, y);
            }
            v += self.m_a[x] * ea[x];
        }
        for y in 0..s.n_b {
            v += self.m_b[y] * eb[y];
        }
        v
    }

    /// Same expression with every coefficient and the offset negated, always maximised.
    pub(crate) fn as_maximization(&self) -> BellFunctional {
        match self.direction {
            Direction::Maximize => self.clone(),
            Direction::Minimize => BellFunctional {
                name: self.name.clone(),
                scenario: self.scenario,
                c: self.c.iter().map(|v| -v).collect(),
                m_a: self.m_a.iter().map(|v| -v).collect(),
                m_b: self.m_b.iter().map(|v| -v).collect(),
                offset: -self.offset,
                direction: Direction::Maximize,
            },
        }
    }
}

pub fn evaluate(f: &BellFunctional, b: &Behavior) -> Result<f64> {
    f.scenario.check_same(&b.scenario())?;
    f.value_of_correlators(&correlators_of(b))
}

/// `E11 + E12 + E21 - E22`.
pub fn chsh() -> BellFunctional {
    BellFunctional::from_rows("chsh", &[&[1.0, 1.0], &[1.0, -1.0]], &[0.0; 2], &[0.0; 2], 0.0, Direction::Maximize)
}

/// `-E11 + E12 + E21 + E22`.
pub fn chsh_prime() -> BellFunctional {
    BellFunctional::from_rows(
        "chsh_prime",
        &[&[-1.0, 1.0], &[1.0, 1.0]],
        &[0.0; 2],
        &[0.0; 2],
        0.0,
        Direction::Maximize,
    )
}

/// `S cos θ + S' sin θ`, the linearised CHSH circle.
pub fn chsh_rotated(theta: f64) -> BellFunctional {
    let (s, c) = theta.sin_cos();
    BellFunctional::from_rows(
        "chsh_rotated",
        &[&[c - s, c + s], &[c + s, s - c]],
        &[0.0; 2],
        &[0.0; 2],
        0.0,
        Direction::Maximize,
    )
}

/// CHSH tilted by `2(1-τ)(E^A_1 + E^B_1)`, `1 ≤ τ ≤ 3/2`.
pub fn tilted(tau: f64) -> Result<BellFunctional> {
    if !(1.0..=1.5).contains(&tau) {
        return Err(Error::OutOfRangeTau(tau));
    }
    let m = 2.0 * (1.0 - tau);
    Ok(BellFunctional::from_rows(
        &format!("tilted(tau={tau})"),
        &[&[1.0, 1.0], &[1.0, -1.0]],
        &[m, 0.0],
        &[m, 0.0],
        0.0,
        Direction::Maximize,
    ))
}

/// Local bound of the tilted expression, `2(2τ - 1)`.
pub fn tilted_local_bound(tau: f64) -> f64 {
    2.0 * (2.0 * tau - 1.0)
}

/// Chained inequality `I_n ≥ 1`, built from its probability form:
/// `p(a=b|n,1) + p(a≠b|n,n) + Σ_{x<n} [p(a≠b|x,x) + p(a≠b|x,x+1)]`
/// with `p(a≠b) = (1 - E)/2` and `p(a=b) = (1 + E)/2`.
pub fn chained(n: usize) -> Result<BellFunctional> {
    if n < 2 {
        return Err(Error::InvalidN(n));
    }
    let scenario = Scenario { n_a: n, n_b: n };
    let mut c = vec![0.0; n * n];
    let mut offset = 0.0;
    // each term contributes 1/2 to the offset and ±1/2 to a correlator
    let mut differ = |x: usize, y: usize| {
        offset += 0.5;
        c[x * n + y] -= 0.5;
    };
    for x in 0..n - 1 {
        differ(x, x);
        differ(x, x + 1);
    }
    differ(n - 1, n - 1);
    offset += 0.5;
    c[(n - 1) * n] += 0.5;
    BellFunctional::new(format!("chained(n={n})"), scenario, c, vec![0.0; n], vec![0.0; n], offset, Direction::Minimize)
}

/// Qubit optimum of the chained expression on a maximally entangled state.
pub fn chained_quantum_value(n: usize) -> f64 {
    let n = n as f64;
    n * (1.0 - (std::f64::consts::PI / (2.0 * n)).cos())
}

/// 3x3 inequality that a single PR box cannot violate (`≤ 6`).
pub fn m3322() -> BellFunctional {
    BellFunctional::from_rows(
        "m3322",
        &[&[1.0, 1.0, 1.0], &[1.0, 1.0, -1.0], &[1.0, -1.0, 0.0]],
        &[-1.0, -1.0, 0.0],
        &[-1.0, 1.0, 0.0],
        0.0,
        Direction::Maximize,
    )
}

/// 4x3 inequality that a single PR box cannot violate (`≤ 7`).
///
/// Alice holds the four settings. The published form indexes Alice's settings
/// second, so printed `E_yx` terms land in `c[x][y]` here and the printed
/// single-party marks swap parties.
pub fn m4322() -> BellFunctional {
    BellFunctional::from_rows(
        "m4322",
        &[&[1.0, 1.0, 1.0], &[1.0, 0.0, -1.0], &[1.0, -1.0, 0.0], &[0.0, 1.0, -1.0]],
        &[-1.0, 0.0, 0.0, 0.0],
        &[-1.0, -1.0, -1.0],
        0.0,
        Direction::Maximize,
    )
}

/// 4x3 correlator inequality whose qubit optimum needs non-planar measurements.
pub fn elegant() -> BellFunctional {
    BellFunctional::from_rows(
        "elegant",
        &[&[1.0, 1.0, 1.0], &[1.0, -1.0, -1.0], &[-1.0, 1.0, -1.0], &[-1.0, -1.0, 1.0]],
        &[0.0; 4],
        &[0.0; 3],
        0.0,
        Direction::Maximize,
    )
}

/// Look up a built-in functional by name. `tau` and `n` parameterise `tilted`
/// and `chained`.
pub fn named(name: &str, tau: Option<f64>, n: Option<usize>) -> Result<BellFunctional> {
    match name.to_ascii_lowercase().as_str() {
        "chsh" => Ok(chsh()),
        "chsh_prime" | "chsh-prime" | "chshprime" => Ok(chsh_prime()),
        "tilted" => tilted(tau.ok_or_else(|| Error::InvalidConfig("tilted needs tau".into()))?),
        "chained" => chained(n.ok_or_else(|| Error::InvalidConfig("chained needs n".into()))?),
        "m3322" => Ok(m3322()),
        "m4322" => Ok(m4322()),
        "elegant" => Ok(elegant()),
        other => Err(Error::UnknownFunctional(other.to_string())),
    }
}

/// Output rule of one wired setting: what a party outputs given its PR-box bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputRule {
    Plus,
    Minus,
    Copy,
    Flip,
}

/// For one setting: which bit goes into the shared PR box and how its output is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wiring {
    pub input: u8,
    pub output: OutputRule,
}

impl Wiring {
    fn from_code(code: u64) -> Self {
        let output = match code % 4 {
            0 => OutputRule::Plus,
            1 => OutputRule::Minus,
            2 => OutputRule::Copy,
            _ => OutputRule::Flip,
        };
        Self { input: (code / 4) as u8, output }
    }

    /// Expected output value.
    fn marginal(self) -> f64 {
        match self.output {
            OutputRule::Plus => 1.0,
            OutputRule::Minus => -1.0,
            OutputRule::Copy | OutputRule::Flip => 0.0,
        }
    }

    fn polarity(self) -> f64 {
        match self.output {
            OutputRule::Flip | OutputRule::Minus => -1.0,
            _ => 1.0,
        }
    }

    fn is_constant(self) -> bool {
        matches!(self.output, OutputRule::Plus | OutputRule::Minus)
    }

    /// `E[a·b]` for two wired parties sharing a PR box with `α ⊕ β = g·h`.
    fn correlation(alice: Wiring, bob: Wiring) -> f64 {
        match (alice.is_constant(), bob.is_constant()) {
            (true, true) => alice.marginal() * bob.marginal(),
            (false, false) => {
                let parity = if alice.input & bob.input == 1 { -1.0 } else { 1.0 };
                alice.polarity() * bob.polarity() * parity
            }
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    /// Outcomes in `{+1, -1}` per setting.
    Deterministic { alice: Vec<i8>, bob: Vec<i8> },
    Wired { alice: Vec<Wiring>, bob: Vec<Wiring> },
}

impl Witness {
    /// The behavior this strategy produces.
    pub fn behavior(&self) -> Result<Behavior> {
        match self {
            Witness::Deterministic { alice, bob } => Behavior::deterministic(alice, bob),
            Witness::Wired { alice, bob } => {
                let s = Scenario::new(alice.len(), bob.len())?;
                let e = alice
                    .iter()
                    .flat_map(|&wa| bob.iter().map(move |&wb| Wiring::correlation(wa, wb)))
                    .collect();
                let ea = alice.iter().map(|w| w.marginal()).collect();
                let eb = bob.iter().map(|w| w.marginal()).collect();
                behavior_from_correlators(&Correlators::new(s, e, ea, eb)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub witness: Witness,
}

/// Assignment index → per-setting digits, first setting most significant.
fn digits(mut idx: u64, base: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = idx % base;
        idx /= base;
    }
    out
}

/// Exact optimum over local deterministic strategies.
///
/// Alice's `2^nA` sign patterns are enumerated; for each, Bob's signs are
/// chosen independently per setting. Among optimal strategies the
/// lexicographically smallest (with `+1 < -1`, Alice before Bob) is returned.
pub fn local_bound(f: &BellFunctional) -> Result<BoundResult> {
    let s = f.scenario;
    if s.n_a > MAX_LOCAL_SETTINGS {
        return Err(Error::TooManySettings(format!(
            "local bound enumerates 2^{} Alice strategies (limit 2^{MAX_LOCAL_SETTINGS})",
            s.n_a
        )));
    }
    let g = f.as_maximization();
    let (score, _, (alice, bob)) = par::argmax(1u64 << s.n_a, |mask| {
        let alice: Vec<i8> = digits(mask, 2, s.n_a).into_iter().map(|d| if d == 0 { 1 } else { -1 }).collect();
        let mut score = g.offset;
        for x in 0..s.n_a {
            score += g.m_a[x] * f64::from(alice[x]);
        }
        let mut bob = Vec::with_capacity(s.n_b);
        for y in 0..s.n_b {
            let mut field = g.m_b[y];
            for x in 0..s.n_a {
                field += g.coef(x, y) * f64::from(alice[x]);
            }
            // ties go to +1
            if field >= -par::TIE_TOL {
                bob.push(1);
                score += field;
            } else {
                bob.push(-1);
                score -= field;
            }
        }
        (score, (alice, bob))
    })
    .expect("at least one strategy");
    Ok(BoundResult { value: f.direction.sign() * score, witness: Witness::Deterministic { alice, bob } })
}

/// Exact optimum over local strategies wired into one shared PR box.
pub fn lplus1pr_bound(f: &BellFunctional) -> Result<BoundResult> {
    let s = f.scenario;
    let combos = 8f64.powi(s.n_a as i32) * 8f64.powi(s.n_b as i32);
    if combos > MAX_WIRING_COMBINATIONS {
        return Err(Error::TooManySettings(format!(
            "8^{} * 8^{} wirings exceed the enumeration limit",
            s.n_a, s.n_b
        )));
    }
    let g = f.as_maximization();
    let bob_options: Vec<Wiring> = (0..8).map(Wiring::from_code).collect();
    let (score, _, (alice, bob)) = par::argmax(8u64.pow(s.n_a as u32), |idx| {
        let alice: Vec<Wiring> = digits(idx, 8, s.n_a).into_iter().map(Wiring::from_code).collect();
        let mut score = g.offset;
        for x in 0..s.n_a {
            score += g.m_a[x] * alice[x].marginal();
        }
        let mut bob = Vec::with_capacity(s.n_b);
        for y in 0..s.n_b {
            let mut best: Option<(f64, Wiring)> = None;
            for &wb in &bob_options {
                let mut v = g.m_b[y] * wb.marginal();
                for x in 0..s.n_a {
                    v += g.coef(x, y) * Wiring::correlation(alice[x], wb);
                }
                if best.is_none_or(|(b, _)| v > b + par::TIE_TOL) {
                    best = Some((v, wb));
                }
            }
            let (v, wb) = best.expect("eight options");
            score += v;
            bob.push(wb);
        }
        (score, (alice, bob))
    })
    .expect("at least one strategy");
    Ok(BoundResult { value: f.direction.sign() * score, witness: Witness::Wired { alice, bob } })
}

/// Extremum over tables that are only normalized and nonnegative per setting
/// pair (no-signaling not imposed). Marginal terms are spread evenly over the
/// other party's settings, matching [`correlators_of`].
pub fn algebraic_bound(f: &BellFunctional) -> f64 {
    let s = f.scenario;
    let g = f.as_maximization();
    let mut score = g.offset;
    for x in 0..s.n_a {
        for y in 0..s.n_b {
            let c = g.coef(x, y);
            let ma = g.m_a[x] / s.n_b as f64;
            let mb = g.m_b[y] / s.n_a as f64;
            let best = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
                .iter()
                .map(|&(a, b)| c * a * b + ma * a + mb * b)
                .fold(f64::NEG_INFINITY, f64::max);
            score += best;
        }
    }
    f.direction.sign() * score
}

#[derive(Serialize, Deserialize)]
struct FunctionalJson {
    name: String,
    #[serde(rename = "nA")]
    n_a: usize,
    #[serde(rename = "nB")]
    n_b: usize,
    c: Vec<Vec<f64>>,
    #[serde(rename = "mA")]
    m_a: Vec<f64>,
    #[serde(rename = "mB")]
    m_b: Vec<f64>,
    offset: f64,
    direction: Direction,
}

impl From<BellFunctional> for FunctionalJson {
    fn from(f: BellFunctional) -> Self {
        let c = f.c.chunks(f.scenario.n_b).map(|r| r.to_vec()).collect();
        Self {
            name: f.name,
            n_a: f.scenario.n_a,
            n_b: f.scenario.n_b,
            c,
            m_a: f.m_a,
            m_b: f.m_b,
            offset: f.offset,
            direction: f.direction,
        }
    }
}

impl TryFrom<FunctionalJson> for BellFunctional {
    type Error = Error;

    fn try_from(j: FunctionalJson) -> Result<Self> {
        let scenario = Scenario::new(j.n_a, j.n_b)?;
        if j.c.len() != j.n_a || j.c.iter().any(|r| r.len() != j.n_b) {
            return Err(Error::InvalidConfig(format!("c must be {} x {}", j.n_a, j.n_b)));
        }
        let c = j.c.into_iter().flatten().collect();
        BellFunctional::new(j.name, scenario, c, j.m_a, j.m_b, j.offset, j.direction)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chsh_and_prime_coefficients() {
        assert_eq!(chsh().c, vec![1.0, 1.0, 1.0, -1.0]);
        assert_eq!(chsh_prime().c, vec![-1.0, 1.0, 1.0, 1.0]);
        assert_eq!(local_bound(&chsh()).unwrap().value, 2.0);
        assert_eq!(local_bound(&chsh_prime()).unwrap().value, 2.0);
    }

    #[test]
    fn chsh_on_pr_box_and_uniform() {
        assert_eq!(evaluate(&chsh(), &Behavior::pr_box()).unwrap(), 4.0);
        let u = Behavior::uniform(Scenario { n_a: 2, n_b: 2 });
        assert_eq!(evaluate(&chsh(), &u).unwrap(), 0.0);
    }

    #[test]
    fn scenario_mismatch() {
        let u = Behavior::uniform(Scenario { n_a: 3, n_b: 3 });
        assert!(matches!(evaluate(&chsh(), &u), Err(Error::ScenarioMismatch { .. })));
    }

    #[test]
    fn tilted_reduces_to_chsh() {
        let t = tilted(1.0).unwrap();
        assert_eq!(t.c, chsh().c);
        assert!(t.m_a.iter().chain(&t.m_b).all(|v| *v == 0.0));
        assert!(matches!(tilted(0.99), Err(Error::OutOfRangeTau(_))));
        assert!(matches!(tilted(1.51), Err(Error::OutOfRangeTau(_))));
    }

    #[test]
    fn tilted_local_bounds() {
        assert!((local_bound(&tilted(1.3).unwrap()).unwrap().value - 3.2).abs() < 1e-12);
        assert!((local_bound(&tilted(1.449).unwrap()).unwrap().value - 3.796).abs() < 1e-12);
        assert!((local_bound(&tilted(1.25).unwrap()).unwrap().value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn chained_structure() {
        assert!(matches!(chained(1), Err(Error::InvalidN(1))));
        let f = chained(3).unwrap();
        assert_eq!(f.direction, Direction::Minimize);
        assert_eq!(f.offset, 3.0);
        // six terms, all ±1/2
        assert_eq!(f.c.iter().filter(|v| **v != 0.0).count(), 6);
        assert_eq!(f.coef(2, 0), 0.5);
        assert_eq!(local_bound(&chained(7).unwrap()).unwrap().value, 1.0);
        assert_eq!(local_bound(&chained(5).unwrap()).unwrap().value, 1.0);
    }

    #[test]
    fn chained_two_is_affine_chsh() {
        // I_2 = (4 - S'') / 2 with S'' = E11 + E12 - E21 + E22
        let f = chained(2).unwrap();
        let pr = Correlators::new(Scenario { n_a: 2, n_b: 2 }, vec![1.0, 1.0, -1.0, 1.0], vec![0.0; 2], vec![0.0; 2])
            .unwrap();
        let b = behavior_from_correlators(&pr).unwrap();
        assert_eq!(evaluate(&f, &b).unwrap(), 0.0);
    }

    #[test]
    fn chained_probability_form_matches_direct_sum() {
        // direct evaluation of the probability form on a random-ish behavior
        let n = 4;
        let s = Scenario { n_a: n, n_b: n };
        let b = Behavior::from_fn(s, |a, bb, x, y| {
            let e = ((x * 7 + y * 3) % 5) as f64 / 5.0 - 0.4;
            let sign = if a == bb { 1.0 } else { -1.0 };
            (1.0 + sign * e) / 4.0
        })
        .unwrap();
        let p_eq = |x: usize, y: usize| b.get(0, 0, x, y) + b.get(1, 1, x, y);
        let p_ne = |x: usize, y: usize| 1.0 - p_eq(x, y);
        let mut direct = p_eq(n - 1, 0) + p_ne(n - 1, n - 1);
        for x in 0..n - 1 {
            direct += p_ne(x, x) + p_ne(x, x + 1);
        }
        let v = evaluate(&chained(n).unwrap(), &b).unwrap();
        assert!((v - direct).abs() < 1e-12);
    }

    #[test]
    fn m_family_bounds() {
        assert_eq!(local_bound(&m3322()).unwrap().value, 6.0);
        assert_eq!(local_bound(&m4322()).unwrap().value, 7.0);
        assert_eq!(lplus1pr_bound(&m3322()).unwrap().value, 6.0);
        let u = Behavior::uniform(Scenario { n_a: 3, n_b: 3 });
        assert_eq!(evaluate(&m3322(), &u).unwrap(), 0.0);
    }

    #[test]
    fn elegant_bounds() {
        assert_eq!(local_bound(&elegant()).unwrap().value, 6.0);
        assert_eq!(algebraic_bound(&elegant()), 12.0);
        let u = Behavior::uniform(Scenario { n_a: 4, n_b: 3 });
        assert_eq!(evaluate(&elegant(), &u).unwrap(), 0.0);
    }

    #[test]
    fn algebraic_bounds() {
        assert_eq!(algebraic_bound(&chsh()), 4.0);
        for n in 2..12 {
            assert!(algebraic_bound(&chained(n).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn pr_box_is_a_wiring() {
        let r = lplus1pr_bound(&chsh()).unwrap();
        assert_eq!(r.value, 4.0);
        assert_eq!(evaluate(&chsh(), &r.witness.behavior().unwrap()).unwrap(), 4.0);
    }

    #[test]
    fn witnesses_reevaluate() {
        for f in [chsh(), tilted(1.2).unwrap(), chained(4).unwrap(), m3322(), m4322(), elegant()] {
            let lb = local_bound(&f).unwrap();
            let v = evaluate(&f, &lb.witness.behavior().unwrap()).unwrap();
            assert!((v - lb.value).abs() < 1e-12, "{}", f.name);
        }
    }

    #[test]
    fn lexicographic_tie_break() {
        // every strategy scores 0; the all-plus assignment must win
        let f = BellFunctional::new(
            "zero",
            Scenario { n_a: 2, n_b: 2 },
            vec![0.0; 4],
            vec![0.0; 2],
            vec![0.0; 2],
            0.0,
            Direction::Maximize,
        )
        .unwrap();
        let lb = local_bound(&f).unwrap();
        assert_eq!(lb.witness, Witness::Deterministic { alice: vec![1, 1], bob: vec![1, 1] });
    }

    #[test]
    fn guards() {
        let big = Scenario { n_a: 27, n_b: 1 };
        let f = BellFunctional::new("big", big, vec![0.0; 27], vec![0.0; 27], vec![0.0], 0.0, Direction::Maximize)
            .unwrap();
        assert!(matches!(local_bound(&f), Err(Error::TooManySettings(_))));
        assert!(matches!(lplus1pr_bound(&chained(5).unwrap()), Err(Error::TooManySettings(_))));
    }

    #[test]
    fn json_round_trip() {
        let f = m4322();
        let s = serde_json::to_string(&f).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["nA"], 4);
        assert_eq!(v["c"][3][2], -1.0);
        assert_eq!(v["direction"], "maximize");
        let back: BellFunctional = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn named_lookup() {
        assert_eq!(named("CHSH", None, None).unwrap(), chsh());
        assert!(named("tilted", None, None).is_err());
        assert!(matches!(named("nope", None, None), Err(Error::UnknownFunctional(_))));
    }
}
