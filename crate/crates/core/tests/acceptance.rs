//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use bellkit::analysis::{chained_nonlocal_content, epr2_local_content, predictability_bound};
use bellkit::fixtures::{table2, table3};
use bellkit::functionals::{
    algebraic_bound, chained, chained_quantum_value, chsh, elegant, evaluate, local_bound, lplus1pr_bound, m3322,
    m4322, tilted, BellFunctional, Direction,
};
use bellkit::optimize::{
    quantum_circle_boundary, circle_angles, seesaw, seesaw_mes, seesaw_planar, sos_residual, SeesawConfig,
    MES_RESTARTS,
};
use bellkit::quantum::{
    behavior_of, circle_settings, identity2, BlochSetting, Mat2, NoiseModel, Strategy, TwoQubitState,
};
use bellkit::scenario::{behavior_from_correlators, correlators_of, is_no_signaling, Behavior, Scenario};
use bellkit::simulate::{reproduce, Experiment, Overrides};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    failures: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { failures: Vec::new() }
    }

    fn that(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn close(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.that((got - want).abs() <= tol, || format!("{label}: got {got}, want {want} ± {tol:e}"));
    }

    fn within_time(&mut self, start: Instant, limit: Duration) {
        let t = start.elapsed();
        self.that(t <= limit, || format!("took {t:?}, limit {limit:?}"));
    }
}

fn criterion(no: u32, title: &str, body: impl FnOnce(&mut Check)) -> bool {
    let start = Instant::now();
    let mut c = Check::new();
    body(&mut c);
    let ok = c.failures.is_empty();
    println!("criterion {no} {title}: {} ({:.2?})", if ok { "PASS" } else { "FAIL" }, start.elapsed());
    for f in &c.failures {
        println!("    {f}");
    }
    ok
}

fn tsirelson() -> f64 {
    2.0 * SQRT_2
}

fn local_bounds(c: &mut Check) {
    let start = Instant::now();
    c.close("chsh", local_bound(&chsh()).unwrap().value, 2.0, 0.0);
    for tau in table2().column("tau").unwrap() {
        let got = local_bound(&tilted(tau).unwrap()).unwrap().value;
        c.close(&format!("tilted({tau})"), got, 2.0 * (2.0 * tau - 1.0), 1e-12);
    }
    for n in 2..=10 {
        c.close(&format!("chained({n})"), local_bound(&chained(n).unwrap()).unwrap().value, 1.0, 1e-12);
    }
    c.close("m3322", local_bound(&m3322()).unwrap().value, 6.0, 0.0);
    c.close("m4322", local_bound(&m4322()).unwrap().value, 7.0, 0.0);
    c.close("elegant", local_bound(&elegant()).unwrap().value, 6.0, 0.0);
    c.within_time(start, Duration::from_secs(1));
}

fn lplus1pr_bounds(c: &mut Check) {
    let start = Instant::now();
    c.close("m3322", lplus1pr_bound(&m3322()).unwrap().value, 6.0, 0.0);
    c.close("m4322", lplus1pr_bound(&m4322()).unwrap().value, 7.0, 0.0);
    c.close("chsh", lplus1pr_bound(&chsh()).unwrap().value, 4.0, 0.0);
    c.within_time(start, Duration::from_secs(60));
}

fn quantum_maxima(c: &mut Check) {
    let start = Instant::now();
    let cfg = SeesawConfig::default();
    c.close("chsh", seesaw(&chsh(), &cfg).unwrap().value, tsirelson(), 1e-7);
    c.close("elegant", seesaw(&elegant(), &cfg).unwrap().value, 4.0 * 3f64.sqrt(), 1e-6);
    c.close("planar elegant", seesaw_planar(&elegant(), &cfg).unwrap().value, 2.0 + 2.0 * 5f64.sqrt(), 1e-5);
    c.close("m3322", seesaw(&m3322(), &cfg).unwrap().value, 6.024, 0.005);
    c.close("m4322", seesaw(&m4322(), &cfg).unwrap().value, 7.041, 0.005);
    for n in 2..=10 {
        let v = seesaw(&chained(n).unwrap(), &cfg).unwrap().value;
        c.close(&format!("chained({n})"), v, chained_quantum_value(n), 1e-6);
    }
    let t = seesaw(&tilted(1.3).unwrap(), &cfg).unwrap().value;
    c.that(t >= 3.258, || format!("tilted(1.3): {t} < 3.258"));
    c.within_time(start, Duration::from_secs(120));
}

fn mes_non_violation(c: &mut Check) {
    let start = Instant::now();
    let cfg = SeesawConfig { restarts: MES_RESTARTS, ..SeesawConfig::default() };
    let tau_cr = 0.5 + 1.0 / SQRT_2;
    for tau in [tau_cr, 1.25, 1.30, 1.45] {
        let v = seesaw_mes(&tilted(tau).unwrap(), &cfg).unwrap().value;
        let bound = 2.0 * (2.0 * tau - 1.0);
        c.that(v <= bound + 1e-6, || format!("MES tilted({tau}): {v} > {bound}"));
        println!("    MES tilted tau={tau:.4}: best {v:.6} vs local {bound:.6} (d=2 search)");
    }
    for (name, f, bound) in [("m3322", m3322(), 6.0), ("m4322", m4322(), 7.0)] {
        let v = seesaw_mes(&f, &cfg).unwrap().value;
        c.that(v <= bound + 1e-6, || format!("MES {name}: {v} > {bound}"));
        println!("    MES {name}: best {v:.6} vs {bound} (d=2 search)");
    }
    // the printed 1.2071 sits just below the critical value
    let literal = seesaw_mes(&tilted(1.2071).unwrap(), &cfg).unwrap().value;
    println!(
        "    note: literal tau=1.2071 gives {literal:.7} vs local {:.7} (gap {:.1e}, tau_Cr = {tau_cr:.7})",
        2.0 * (2.0 * 1.2071 - 1.0),
        literal - 2.0 * (2.0 * 1.2071 - 1.0)
    );
    c.within_time(start, Duration::from_secs(300));
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_dichotomic(rng: &mut ChaCha8Rng) -> Mat2 {
    match rng.random_range(0..10) {
        0 => identity2(),
        1 => -identity2(),
        _ => BlochSetting::along(random_unit(rng)).unwrap().observable(),
    }
}

fn quantum_circle(c: &mut Check) {
    for p in quantum_circle_boundary(&circle_angles(180)) {
        c.close(&format!("radius at {}", p.theta), p.radius, tsirelson(), 1e-9);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let theta = rng.random_range(0.0..2.0 * PI);
        let obs = [random_dichotomic(&mut rng), random_dichotomic(&mut rng), random_dichotomic(&mut rng), random_dichotomic(&mut rng)];
        let r = sos_residual(theta, &obs).unwrap();
        c.that(r <= 1e-9, || format!("sos residual {r:e} at theta {theta}"));
    }
}

fn epr2(c: &mut Check) {
    let q = epr2_local_content(&behavior_of(&circle_settings(0.0))).unwrap().q_min;
    c.close("Tsirelson behavior", q, SQRT_2 - 1.0, 1e-6);
    c.close("PR box", epr2_local_content(&Behavior::pr_box()).unwrap().q_min, 1.0, 1e-9);
    for alice in [[1i8, 1], [1, -1], [-1, 1], [-1, -1]] {
        for bob in [[1i8, 1], [1, -1], [-1, 1], [-1, -1]] {
            let b = Behavior::deterministic(&alice, &bob).unwrap();
            c.close(&format!("vertex {alice:?} {bob:?}"), epr2_local_content(&b).unwrap().q_min, 0.0, 1e-9);
        }
    }
}

fn content_and_predictability(c: &mut Check) {
    c.close("nonlocal content at 0.126", chained_nonlocal_content(0.126), 0.874, 1e-12);
    let t = table3();
    let (i_n, nu, delta) = (t.column("I_n").unwrap(), t.column("nu_n").unwrap(), t.column("delta_n").unwrap());
    c.that(i_n.len() == 44, || format!("table3 has {} rows", i_n.len()));
    for k in 0..i_n.len() {
        let got = predictability_bound(i_n[k], nu[k]).corrected;
        c.close(&format!("delta row n={}", k + 2), got, delta[k], 2.0 * nu[k]);
    }
}

fn simulator(c: &mut Check) {
    let start = Instant::now();
    let noise = NoiseModel::new(0.997, 1.0, 0.1f64.to_radians()).unwrap();
    let ov = Overrides { noise: Some(noise), seed: Some(2015), ..Overrides::default() };

    let circle = reproduce(&Experiment::ChshCircle { points: 180 }, &ov).unwrap();
    let radii = circle.column("radius").unwrap();
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    c.that((2.805..=2.825).contains(&mean), || format!("mean radius {mean}"));

    let scan = reproduce(&Experiment::ChainedScan { n_max: 45 }, &ov).unwrap();
    let ns = scan.column("n").unwrap();
    let values = scan.column("I_n").unwrap();
    let (k, min) = values.iter().enumerate().fold((0, f64::INFINITY), |b, (k, &v)| if v < b.1 { (k, v) } else { b });
    let argmin = ns[k];
    c.that((14.0..=24.0).contains(&argmin), || format!("argmin n = {argmin}"));
    c.that((0.11..=0.14).contains(&min), || format!("min I_n = {min}"));

    let s_e = reproduce(&Experiment::Elegant, &ov).unwrap().rows[0][0];
    c.that((6.85..=6.93).contains(&s_e), || format!("S_E = {s_e}"));
    println!("    mean radius {mean:.4}, chained min I_{argmin} = {min:.4}, S_E = {s_e:.4}");
    c.within_time(start, Duration::from_secs(600));
}

fn random_behavior_correlators(rng: &mut ChaCha8Rng, s: Scenario) -> Behavior {
    // mixtures of deterministic vertices are valid, no-signaling and dense
    let mut p = vec![0.0; 4 * s.pairs()];
    let k = rng.random_range(1..6);
    let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let alice: Vec<i8> = (0..s.n_a).map(|_| if rng.random() { 1 } else { -1 }).collect();
        let bob: Vec<i8> = (0..s.n_b).map(|_| if rng.random() { 1 } else { -1 }).collect();
        let d = Behavior::deterministic(&alice, &bob).unwrap();
        for (pi, di) in p.iter_mut().zip(d.as_flat()) {
            *pi += w / total * di;
        }
    }
    let u = Behavior::uniform(s);
    let b = Behavior::from_flat(s, p).unwrap();
    b.mix(&u, rng.random()).unwrap()
}

fn brute_force_local(f: &BellFunctional) -> f64 {
    let s = f.scenario;
    let mut best = f64::NEG_INFINITY;
    for al in 0..1usize << s.n_a {
        for bo in 0..1usize << s.n_b {
            let alice: Vec<i8> = (0..s.n_a).map(|x| if al >> x & 1 == 0 { 1 } else { -1 }).collect();
            let bob: Vec<i8> = (0..s.n_b).map(|y| if bo >> y & 1 == 0 { 1 } else { -1 }).collect();
            let v = f.direction.sign() * evaluate(f, &Behavior::deterministic(&alice, &bob).unwrap()).unwrap();
            best = best.max(v);
        }
    }
    f.direction.sign() * best
}

fn random_functional(rng: &mut ChaCha8Rng, s: Scenario) -> BellFunctional {
    let mut int = |k: i32| f64::from(rng.random_range(-k..=k));
    let c = (0..s.pairs()).map(|_| int(3)).collect();
    let m_a = (0..s.n_a).map(|_| int(2)).collect();
    let m_b = (0..s.n_b).map(|_| int(2)).collect();
    let offset = int(2);
    let direction = if rng.random() { Direction::Maximize } else { Direction::Minimize };
    BellFunctional::new("random", s, c, m_a, m_b, offset, direction).unwrap()
}

fn random_strategy(rng: &mut ChaCha8Rng, s: Scenario) -> Strategy {
    let state = if rng.random() {
        TwoQubitState::pure_angle(rng.random_range(0.0..PI / 2.0)).unwrap()
    } else {
        let noise = NoiseModel::new(rng.random(), rng.random(), 0.0).unwrap();
        bellkit::quantum::apply_noise(&TwoQubitState::pure_angle(rng.random_range(0.0..PI / 2.0)).unwrap(), &noise)
    };
    let a = (0..s.n_a).map(|_| BlochSetting::along(random_unit(rng)).unwrap()).collect();
    let b = (0..s.n_b).map(|_| BlochSetting::along(random_unit(rng)).unwrap()).collect();
    Strategy::new(state, a, b).unwrap()
}

fn properties(c: &mut Check) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let scen = |rng: &mut ChaCha8Rng| Scenario::new(rng.random_range(1..5), rng.random_range(1..5)).unwrap();

    for _ in 0..1000 {
        let s = scen(&mut rng);
        let b = random_behavior_correlators(&mut rng, s);
        let back = behavior_from_correlators(&correlators_of(&b)).unwrap();
        let err = b.as_flat().iter().zip(back.as_flat()).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        c.that(err <= 1e-12, || format!("round trip error {err:e} in {s}"));
    }

    for _ in 0..1000 {
        let s = scen(&mut rng);
        let st = random_strategy(&mut rng, s);
        let b = behavior_of(&st);
        c.that(is_no_signaling(&b, 1e-12), || format!("quantum behavior signals by {:e}", b.signaling_deviation()));
    }

    for _ in 0..200 {
        let s = Scenario::new(rng.random_range(1..4), rng.random_range(1..4)).unwrap();
        let f = random_functional(&mut rng, s);
        let got = local_bound(&f).unwrap().value;
        let want = brute_force_local(&f);
        c.that(got == want, || format!("local bound {got} vs brute force {want} for {f:?}"));
    }

    let cfg = SeesawConfig { restarts: 8, ..SeesawConfig::default() };
    for k in 0..20 {
        let s = Scenario::new(2 + k % 3, 2 + (k / 3) % 3).unwrap();
        let f = random_functional(&mut rng, s);
        let r = seesaw(&f, &cfg).unwrap();
        for t in &r.traces {
            let worst = t.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
            c.that(worst <= 1e-12, || format!("trace drops by {worst:e}"));
        }
        let q = f.direction.sign() * r.value;
        let l = f.direction.sign() * local_bound(&f).unwrap().value;
        c.that(q >= l - 1e-9, || format!("seesaw {q} below local {l}"));
        let alg = algebraic_bound(&f);
        let alg = f.direction.sign() * alg;
        c.that(q <= alg + 1e-9, || format!("seesaw {q} above algebraic {alg}"));
    }
}

fn main() {
    let results = [
        criterion(1, "local bounds", local_bounds),
        criterion(2, "L+1PR bounds", lplus1pr_bounds),
        criterion(3, "quantum maxima via seesaw", quantum_maxima),
        criterion(4, "MES non-violation evidence (d=2 search)", mes_non_violation),
        criterion(5, "quantum circle and SOS identity", quantum_circle),
        criterion(6, "EPR2 local content", epr2),
        criterion(7, "nonlocal content and predictability", content_and_predictability),
        criterion(8, "simulator regression", simulator),
        criterion(9, "property suites", properties),
    ];
    let passed = results.iter().filter(|ok| **ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
