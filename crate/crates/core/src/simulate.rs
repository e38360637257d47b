//! Monte Carlo coincidence counts for a noisy two-photon Bell test.
//!
//! Randomness comes from ChaCha8 streams keyed by the run seed: setting pair
//! `(x, y)` of replication `r` draws from stream `r << 40 | x << 20 | y`, and
//! the acquisition order from stream `1 << 63 | r`. Results therefore do not
//! depend on how pairs or replications are scheduled.

use nalgebra::Vector3;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analysis::{chained_nonlocal_content, functional_error, predictability_bound};
use crate::error::{Error, Result};
use crate::functionals::{chained, chsh, chsh_prime, elegant, m3322, m4322, tilted, tilted_local_bound, BellFunctional};
use crate::optimize::{seesaw, Restriction, SeesawConfig};
use crate::par;
use crate::quantum::{
    apply_noise, chained_settings, circle_settings, density_of, elegant_settings, polarization_strategy, NoiseModel, PauliExpectations, Strategy, TwoQubitState,
};
use crate::scenario::{correlators_of, Behavior, Scenario};

/// Coincidences per second used when a plan does not say otherwise.
pub const DEFAULT_RATE: f64 = 1.0e5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub strategy: Strategy,
    pub noise: NoiseModel,
    /// Expected coincidences per second.
    pub rate: f64,
    /// Acquisition time per setting pair, seconds.
    pub duration_s: f64,
    pub randomize_order: bool,
    pub seed: u64,
}

impl RunPlan {
    pub fn new(strategy: Strategy, noise: NoiseModel, rate: f64, duration_s: f64, seed: u64) -> Result<Self> {
        let plan = Self { strategy, noise, rate, duration_s, randomize_order: true, seed };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate.is_finite()) || !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "rate ({}) and duration ({}) must be positive",
                self.rate, self.duration_s
            )));
        }
        NoiseModel::new(self.noise.visibility, self.noise.white_fraction, self.noise.angle_jitter)?;
        Ok(())
    }
}

/// Counts for one setting pair, ordered `[++, +-, -+, --]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub x: usize,
    pub y: usize,
    pub counts: [u64; 4],
    pub duration_s: OrderedSeconds,
}

/// Seconds stored as a float; equality is bitwise so records can be compared exactly.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderedSeconds(pub f64);

impl PartialEq for OrderedSeconds {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}
impl Eq for OrderedSeconds {}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Raw coincidence counts of one run, in acquisition order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub scenario: Scenario,
    pub entries: Vec<PairCounts>,
    pub seed: u64,
    pub replication: u64,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    x: usize,
    y: usize,
    n_pp: u64,
    n_pm: u64,
    n_mp: u64,
    n_mm: u64,
    duration_s: f64,
}

impl CountRecord {
    pub fn get(&self, x: usize, y: usize) -> Option<&PairCounts> {
        self.entries.iter().find(|e| e.x == x && e.y == y)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            let [n_pp, n_pm, n_mp, n_mm] = e.counts;
            w.serialize(CsvRow { x: e.x, y: e.y, n_pp, n_pm, n_mp, n_mm, duration_s: e.duration_s.0 })
                .map_err(|err| Error::InvalidConfig(format!("csv: {err}")))?;
        }
        let bytes = w.into_inner().map_err(|err| Error::InvalidConfig(format!("csv: {err}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(scenario: Scenario, seed: u64, replication: u64, text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for row in r.deserialize::<CsvRow>() {
            let row = row.map_err(|err| Error::InvalidConfig(format!("csv: {err}")))?;
            if row.x >= scenario.n_a || row.y >= scenario.n_b {
                return Err(Error::InvalidSetting(format!("pair ({}, {}) outside {scenario}", row.x, row.y)));
            }
            entries.push(PairCounts {
                x: row.x,
                y: row.y,
                counts: [row.n_pp, row.n_pm, row.n_mp, row.n_mm],
                duration_s: OrderedSeconds(row.duration_s),
            });
        }
        Ok(Self { scenario, entries, seed, replication })
    }
}

/// JSON sidecar written next to a record's CSV.
pub fn sidecar_json(plan: &RunPlan, rec: &CountRecord) -> Result<String> {
    #[derive(Serialize)]
    struct Sidecar<'a> {
        plan: &'a RunPlan,
        seed: u64,
        replication: u64,
        scenario: Scenario,
    }
    Ok(serde_json::to_string_pretty(&Sidecar {
        plan,
        seed: rec.seed,
        replication: rec.replication,
        scenario: rec.scenario,
    })?)
}

fn pair_stream(replication: u64, x: usize, y: usize) -> u64 {
    (replication << 40) | ((x as u64) << 20) | y as u64
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn jitter(v: &Vector3<f64>, sigma: f64, rng: &mut ChaCha8Rng) -> Vector3<f64> {
    if sigma == 0.0 {
        return *v;
    }
    let angle = sigma * rng.sample::<f64, _>(StandardNormal);
    let tangent = loop {
        let g: Vector3<f64> = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let t = g - v * g.dot(v);
        let n = t.norm();
        if n > 1e-9 {
            break t / n;
        }
    };
    (v * angle.cos() + tangent * angle.sin()).normalize()
}

fn pair_probabilities(ex: &PauliExpectations, a: &Vector3<f64>, b: &Vector3<f64>) -> [f64; 4] {
    let ea = ex.r.dot(a);
    let eb = ex.s.dot(b);
    let e = ex.correlation(a, b);
    let mut p = [0.0; 4];
    for (k, slot) in p.iter_mut().enumerate() {
        let sa = if k / 2 == 0 { 1.0 } else { -1.0 };
        let sb = if k % 2 == 0 { 1.0 } else { -1.0 };
        *slot = ((1.0 + sa * ea + sb * eb + sa * sb * e) / 4.0).max(0.0);
    }
    let total: f64 = p.iter().sum();
    p.map(|v| v / total)
}

fn multinomial(n: u64, p: &[f64; 4], rng: &mut ChaCha8Rng) -> [u64; 4] {
    let mut out = [0; 4];
    let mut left = n;
    let mut mass = 1.0;
    for k in 0..3 {
        if left == 0 {
            break;
        }
        let q = if mass > 0.0 { (p[k] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(left, q).expect("probability in [0, 1]").sample(rng);
        out[k] = draw;
        left -= draw;
        mass -= p[k];
    }
    out[3] = left;
    out
}

/// One run of the plan (replication 0).
pub fn simulate_counts(plan: &RunPlan) -> Result<CountRecord> {
    simulate_replica(plan, 0)
}

/// An independent run of the same plan; distinct replications use disjoint streams.
pub fn simulate_replica(plan: &RunPlan, replication: u64) -> Result<CountRecord> {
    plan.validate()?;
    let s = plan.strategy.scenario();
    let ex = PauliExpectations::of(&density_of(&apply_noise(&plan.strategy.state, &plan.noise)));
    let mean = plan.rate * plan.duration_s;
    let poisson = Poisson::new(mean).map_err(|e| Error::InvalidConfig(format!("poisson mean {mean}: {e}")))?;

    let mut order: Vec<(usize, usize)> = (0..s.n_a).flat_map(|x| (0..s.n_b).map(move |y| (x, y))).collect();
    if plan.randomize_order {
        order.shuffle(&mut rng_for(plan.seed, (1 << 63) | replication));
    }
    let entries = order
        .into_iter()
        .map(|(x, y)| {
            let mut rng = rng_for(plan.seed, pair_stream(replication, x, y));
            let sigma = plan.noise.angle_jitter;
            let a = jitter(plan.strategy.settings_a[x].vector(), sigma, &mut rng);
            let b = jitter(plan.strategy.settings_b[y].vector(), sigma, &mut rng);
            let n = poisson.sample(&mut rng) as u64;
            let counts = multinomial(n, &pair_probabilities(&ex, &a, &b), &mut rng);
            PairCounts { x, y, counts, duration_s: OrderedSeconds(plan.duration_s) }
        })
        .collect();
    Ok(CountRecord { scenario: s, entries, seed: plan.seed, replication })
}

/// Relative-frequency estimate with per-entry binomial standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub behavior: Behavior,
    /// Same `[a][b][x][y]` layout as the behavior.
    pub std_errors: Vec<f64>,
    /// Total coincidences per pair, row-major `[x][y]`.
    pub totals: Vec<u64>,
}

pub fn estimate_behavior(rec: &CountRecord) -> Result<Estimate> {
    let s = rec.scenario;
    let mut totals = vec![0u64; s.pairs()];
    let mut found = vec![false; s.pairs()];
    for e in &rec.entries {
        found[e.x * s.n_b + e.y] = true;
        totals[e.x * s.n_b + e.y] = e.total();
    }
    for x in 0..s.n_a {
        for y in 0..s.n_b {
            if !found[x * s.n_b + y] {
                return Err(Error::MissingSettings { x, y });
            }
            if totals[x * s.n_b + y] == 0 {
                return Err(Error::EmptySettingPair { x, y });
            }
        }
    }
    let freq = |a: usize, b: usize, x: usize, y: usize| {
        let e = rec.get(x, y).expect("checked above");
        e.counts[a * 2 + b] as f64 / e.total() as f64
    };
    let behavior = Behavior::from_fn(s, freq)?;
    let mut std_errors = Vec::with_capacity(4 * s.pairs());
    for a in 0..2 {
        for b in 0..2 {
            for x in 0..s.n_a {
                for y in 0..s.n_b {
                    let p = behavior.get(a, b, x, y);
                    std_errors.push((p * (1.0 - p) / totals[x * s.n_b + y] as f64).sqrt());
                }
            }
        }
    }
    Ok(Estimate { behavior, std_errors, totals })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    ChshCircle { points: usize },
    ChainedScan { n_max: usize },
    /// State angles in degrees; when absent each row uses the unrestricted optimum.
    TiltedScan { taus: Vec<f64>, thetas_deg: Option<Vec<f64>> },
    M3322,
    M4322,
    Elegant,
}

impl Experiment {
    /// Acquisition time per setting pair used by the original runs.
    pub fn default_duration(&self, n: usize) -> f64 {
        match self {
            Experiment::ChshCircle { .. } => 1.0,
            Experiment::ChainedScan { .. } if (18..=21).contains(&n) => 20.0,
            Experiment::ChainedScan { .. } => 5.0,
            Experiment::TiltedScan { .. } => 15.0,
            Experiment::M3322 | Experiment::M4322 => 1200.0,
            Experiment::Elegant => 20.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub noise: Option<NoiseModel>,
    pub rate: Option<f64>,
    pub duration_s: Option<f64>,
    pub seed: Option<u64>,
    pub randomize_order: Option<bool>,
    /// Seesaw restarts for experiments that optimise settings first.
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceTable {
    pub experiment: Experiment,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    #[serde(skip)]
    pub plans: Vec<RunPlan>,
    #[serde(skip)]
    pub records: Vec<CountRecord>,
}

impl ReproduceTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::InvalidConfig(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

struct Point {
    row: Vec<f64>,
    plan: RunPlan,
    record: CountRecord,
}

fn plan_for(strategy: Strategy, duration: f64, ov: &Overrides) -> Result<RunPlan> {
    let mut plan = RunPlan::new(
        strategy,
        ov.noise.unwrap_or_default(),
        ov.rate.unwrap_or(DEFAULT_RATE),
        ov.duration_s.unwrap_or(duration),
        ov.seed.unwrap_or(0),
    )?;
    plan.randomize_order = ov.randomize_order.unwrap_or(true);
    Ok(plan)
}

fn measure(f: &BellFunctional, plan: RunPlan, replication: u64) -> Result<(f64, f64, Point)> {
    let record = simulate_replica(&plan, replication)?;
    let rep = functional_error(f, &record)?;
    Ok((rep.value, rep.std_error, Point { row: Vec::new(), plan, record }))
}

fn collect(experiment: Experiment, columns: &[&str], points: Vec<Result<Point>>) -> Result<ReproduceTable> {
    let mut rows = Vec::new();
    let mut plans = Vec::new();
    let mut records = Vec::new();
    for p in points {
        let p = p?;
        rows.push(p.row);
        plans.push(p.plan);
        records.push(p.record);
    }
    Ok(ReproduceTable { experiment, columns: columns.iter().map(|c| c.to_string()).collect(), rows, plans, records })
}

/// Largest `|p(+|x) - p(-|x)|` over both parties' settings.
pub fn max_bias(b: &Behavior) -> f64 {
    let c = correlators_of(b);
    c.ea.iter().chain(&c.eb).fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Simulate one of the reference experiments end to end.
pub fn reproduce(experiment: &Experiment, ov: &Overrides) -> Result<ReproduceTable> {
    let restarts = ov.restarts.unwrap_or(crate::optimize::DEFAULT_RESTARTS);
    let exp = experiment.clone();
    match experiment {
        Experiment::ChshCircle { points } => {
            let thetas = crate::optimize::circle_angles(*points);
            let pts = par::map_indexed(*points, |k| -> Result<Point> {
                let plan = plan_for(circle_settings(thetas[k]), exp.default_duration(0), ov)?;
                let record = simulate_replica(&plan, k as u64)?;
                let s = functional_error(&chsh(), &record)?;
                let sp = functional_error(&chsh_prime(), &record)?;
                let row = vec![thetas[k], s.value, sp.value, s.value.hypot(sp.value), s.std_error, sp.std_error];
                Ok(Point { row, plan, record })
            });
            collect(exp.clone(), &["theta", "S", "S_prime", "radius", "dS", "dS_prime"], pts)
        }
        Experiment::ChainedScan { n_max } => {
            if *n_max < 2 {
                return Err(Error::InvalidN(*n_max));
            }
            let ns: Vec<usize> = (2..=*n_max).collect();
            let pts = par::map_indexed(ns.len(), |k| -> Result<Point> {
                let n = ns[k];
                let plan = plan_for(chained_settings(n)?, exp.default_duration(n), ov)?;
                let (value, err, mut p) = measure(&chained(n)?, plan, n as u64)?;
                let nu = max_bias(&estimate_behavior(&p.record)?.behavior);
                let delta = predictability_bound(value, nu).corrected;
                p.row = vec![n as f64, value, err, nu, delta, chained_nonlocal_content(value)];
                Ok(p)
            });
            collect(exp.clone(), &["n", "I_n", "dI_n", "nu_n", "delta_n", "q_min"], pts)
        }
        Experiment::TiltedScan { taus, thetas_deg } => {
            if let Some(th) = thetas_deg {
                if th.len() != taus.len() {
                    return Err(Error::InvalidConfig(format!("{} taus but {} thetas", taus.len(), th.len())));
                }
            }
            let pts = (0..taus.len())
                .map(|k| -> Result<Point> {
                    let tau = taus[k];
                    let f = tilted(tau)?;
                    let mut cfg = SeesawConfig { restarts, seed: ov.seed.unwrap_or(0), ..SeesawConfig::default() };
                    if let Some(th) = thetas_deg {
                        cfg.restriction = Restriction::FixedState(TwoQubitState::pure_angle(th[k].to_radians())?);
                    }
                    let opt = seesaw(&f, &cfg)?;
                    let theta = opt.strategy.state.schmidt_angle().unwrap_or(f64::NAN).to_degrees();
                    let plan = plan_for(opt.strategy, exp.default_duration(0), ov)?;
                    let (value, err, mut p) = measure(&f, plan, k as u64)?;
                    let est = estimate_behavior(&p.record)?.behavior;
                    let (s_chsh, marg) = estimated_tilted_parts(&est)?;
                    p.row = vec![tau, s_chsh, marg, value, err, tilted_local_bound(tau), theta];
                    Ok(p)
                })
                .collect();
            collect(exp.clone(), &["tau", "S_CHSH", "-E1-E2", "S_tau", "dS_tau", "Local bound", "theta"], pts)
        }
        Experiment::M3322 => {
            // the tabulated a-angles drive the functional's second party
            let st = polarization_strategy(77.2, &[-0.7, 9.2, -20.3], &[-1.2, 27.2, -35.2])?;
            single(exp.clone(), &m3322(), st, 6.0, ov)
        }
        Experiment::M4322 => {
            let st = polarization_strategy(76.6, &[0.0, 61.0, 45.0, 119.0], &[15.6, 164.3, 0.0])?;
            single(exp.clone(), &m4322(), st, 7.0, ov)
        }
        Experiment::Elegant => single(exp.clone(), &elegant(), elegant_settings(), 6.0, ov),
    }
}

fn estimated_tilted_parts(b: &Behavior) -> Result<(f64, f64)> {
    let c = correlators_of(b);
    Ok((crate::functionals::evaluate(&chsh(), b)?, -c.ea[0] - c.eb[0]))
}

fn single(exp: Experiment, f: &BellFunctional, st: Strategy, bound: f64, ov: &Overrides) -> Result<ReproduceTable> {
    let plan = plan_for(st, exp.default_duration(0), ov)?;
    let (value, err, mut p) = measure(f, plan, 0)?;
    p.row = vec![value, err, bound];
    collect(exp, &["value", "std_error", "bound"], vec![Ok(p)])
}
