use std::path::PathBuf;

use bellkit::analysis::{chained_nonlocal_content, epr2_local_content, predictability_bound};
use bellkit::fixtures;
use bellkit::functionals::{
    algebraic_bound, chained_quantum_value, local_bound, lplus1pr_bound, named, BellFunctional, Witness,
};
use bellkit::optimize::{seesaw, Restriction, SeesawConfig, DEFAULT_RESTARTS, MES_RESTARTS};
use bellkit::quantum::{behavior_of, chained_settings, NoiseModel, TwoQubitState};
use bellkit::scenario::{Behavior, Scenario};
use bellkit::simulate::{reproduce, sidecar_json, Experiment, Overrides};
use serde_json::json;

use crate::output::Printer;
use crate::{BoundKind, CliError, CliResult, ExperimentArg, FunctionalArgs, Preset, RestrictionArg, Settings, SimulateArgs};

fn read(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn functional(args: &FunctionalArgs) -> CliResult<BellFunctional> {
    match (&args.name, &args.file) {
        (Some(name), None) => Ok(named(name, args.tau, args.n)?),
        (None, Some(file)) => serde_json::from_str(&read(file)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", file.display()))),
        _ => Err(CliError::Usage("give exactly one of --name or --file".into())),
    }
}

fn signs(v: &[i8]) -> String {
    let parts: Vec<_> = v.iter().map(|s| if *s > 0 { "+1" } else { "-1" }).collect();
    format!("[{}]", parts.join(", "))
}

fn witness_text(w: &Witness) -> CliResult<String> {
    Ok(match w {
        Witness::Deterministic { alice, bob } => format!("deterministic alice {} bob {}", signs(alice), signs(bob)),
        Witness::Wired { alice, bob } => {
            format!("wired alice {} bob {}", serde_json::to_string(alice)?, serde_json::to_string(bob)?)
        }
    })
}

pub fn bound(_s: &Settings, p: &mut Printer, args: &FunctionalArgs, kind: BoundKind) -> CliResult<()> {
    let f = functional(args)?;
    let (label, value, witness) = match kind {
        BoundKind::Local => {
            let r = local_bound(&f)?;
            ("local", r.value, Some(r.witness))
        }
        BoundKind::Lplus1pr => {
            let r = lplus1pr_bound(&f)?;
            ("lplus1pr", r.value, Some(r.witness))
        }
        BoundKind::Algebraic => ("algebraic", algebraic_bound(&f), None),
    };
    p.line(format!("{label} bound of {}: {}", f.name, p.num(value)));
    if let Some(w) = &witness {
        p.line(format!("witness: {}", witness_text(w)?));
    }
    p.set_json(&json!({ "functional": f.name, "kind": label, "value": value, "witness": witness }))
}

pub fn qmax(
    s: &Settings,
    p: &mut Printer,
    args: &FunctionalArgs,
    restriction: RestrictionArg,
    restarts: Option<usize>,
    max_iters: Option<usize>,
    theta_deg: Option<f64>,
) -> CliResult<()> {
    let f = functional(args)?;
    let restriction = match (restriction, theta_deg) {
        (RestrictionArg::None, Some(t)) => Restriction::FixedState(TwoQubitState::pure_angle(t.to_radians())?),
        (_, Some(_)) => return Err(CliError::Usage("--theta only combines with --restriction none".into())),
        (RestrictionArg::None, None) => Restriction::None,
        (RestrictionArg::Planar, None) => Restriction::Planar,
        (RestrictionArg::Mes, None) => Restriction::MaximallyEntangled,
    };
    let default_restarts = if restriction == Restriction::MaximallyEntangled { MES_RESTARTS } else { DEFAULT_RESTARTS };
    let base = SeesawConfig::default();
    let cfg = SeesawConfig {
        restarts: restarts.unwrap_or(default_restarts),
        max_iters: max_iters.unwrap_or(base.max_iters),
        tol: s.tol,
        seed: s.seed,
        restriction,
    };
    let r = seesaw(&f, &cfg)?;
    let local = local_bound(&f)?.value;
    let theta = r.strategy.state.schmidt_angle().map(f64::to_degrees);
    p.line(format!("qubit value of {}: {}", f.name, p.num(r.value)));
    p.line(format!("local bound: {}", p.num(local)));
    p.line(format!("algebraic bound: {}", p.num(algebraic_bound(&f))));
    if let Some(t) = theta {
        p.line(format!("state angle: {} deg", p.num(t)));
    }
    p.line(format!(
        "restarts: {} (best {}), iterations: {}, converged: {}",
        cfg.restarts, r.best_restart, r.iterations, r.converged
    ));
    p.set_json(&json!({
        "functional": f.name,
        "value": r.value,
        "local_bound": local,
        "algebraic_bound": algebraic_bound(&f),
        "theta_deg": theta,
        "strategy": r.strategy,
        "iterations": r.iterations,
        "converged": r.converged,
        "best_restart": r.best_restart,
        "restarts": cfg.restarts,
        "seed": cfg.seed,
    }))
}

pub fn epr2(p: &mut Printer, behavior: Option<PathBuf>, preset: Option<Preset>, n: Option<usize>) -> CliResult<()> {
    let b: Behavior = match (behavior, preset) {
        (Some(path), None) => {
            serde_json::from_str(&read(&path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(Preset::Tsirelson)) => behavior_of(&chained_settings(2)?),
        (None, Some(Preset::PrBox)) => Behavior::pr_box(),
        (None, Some(Preset::Uniform)) => Behavior::uniform(Scenario::new(2, 2)?),
        (None, Some(Preset::Chained)) => behavior_of(&chained_settings(n.unwrap_or(2))?),
        _ => return Err(CliError::Usage("give exactly one of --behavior or --preset".into())),
    };
    let r = epr2_local_content(&b)?;
    p.line(format!("scenario: {}", b.scenario()));
    p.line(format!("q_min: {}", p.num(r.q_min)));
    p.line(format!("local vertices used: {}", r.local_weights.len()));
    for w in &r.local_weights {
        p.line(format!("  {}  alice {} bob {}", p.num(w.weight), signs(&w.alice), signs(&w.bob)));
    }
    p.line(format!("pivots: {}", r.pivots));
    p.set_json(&r)
}

pub fn chained(p: &mut Printer, value: Option<f64>, bias: f64, n: Option<usize>, table: bool) -> CliResult<()> {
    if !(0.0..=1.0).contains(&bias) {
        return Err(CliError::Usage(format!("--bias must lie in [0, 1], got {bias}")));
    }
    if table {
        let t = fixtures::table3();
        let col = |c: &str| t.column(c).map_err(CliError::from);
        let (ns, i_n, nu, delta) = (col("n")?, col("I_n")?, col("nu_n")?, col("delta_n")?);
        p.line("n,I_n,nu_n,delta_n,delta_computed,q_min");
        let mut rows = Vec::new();
        for k in 0..ns.len() {
            let got = predictability_bound(i_n[k], nu[k]).corrected;
            let q = chained_nonlocal_content(i_n[k]);
            p.line(format!("{},{},{},{},{},{}", ns[k], i_n[k], nu[k], delta[k], p.num(got), p.num(q)));
            rows.push(json!({ "n": ns[k], "I_n": i_n[k], "nu_n": nu[k], "delta_n": delta[k], "delta_computed": got, "q_min": q }));
        }
        return p.set_json(&rows);
    }
    let i_n = match (value, n) {
        (Some(v), _) => v,
        (None, Some(n)) => {
            if n < 2 {
                return Err(bellkit::Error::InvalidN(n).into());
            }
            chained_quantum_value(n)
        }
        (None, None) => return Err(CliError::Usage("give --value, --n or --table".into())),
    };
    if !(i_n >= 0.0) {
        return Err(CliError::Usage(format!("chained value must be >= 0, got {i_n}")));
    }
    let q = chained_nonlocal_content(i_n);
    let pred = predictability_bound(i_n, bias);
    p.line(format!("I_n: {}", p.num(i_n)));
    p.line(format!("nonlocal content >= {}", p.num(q)));
    p.line(format!("predictability <= {} (baseline {})", p.num(pred.corrected), p.num(pred.baseline)));
    p.set_json(&json!({ "I_n": i_n, "bias": bias, "q_min": q, "predictability": pred }))
}

fn experiment(args: &SimulateArgs) -> CliResult<Experiment> {
    Ok(match args.experiment {
        ExperimentArg::Circle => Experiment::ChshCircle { points: args.points },
        ExperimentArg::Chained => Experiment::ChainedScan { n_max: args.nmax },
        ExperimentArg::Tilted => match args.from_fixture.as_deref() {
            Some("table2") => {
                let t = fixtures::table2();
                Experiment::TiltedScan { taus: t.column("tau")?, thetas_deg: Some(t.column("theta")?) }
            }
            Some(other) => return Err(CliError::Usage(format!("no tilted fixture {other:?}; use table2"))),
            None if args.taus.is_empty() => return Err(CliError::Usage("tilted needs --taus or --from-fixture".into())),
            None => Experiment::TiltedScan { taus: args.taus.clone(), thetas_deg: None },
        },
        ExperimentArg::M3322 => Experiment::M3322,
        ExperimentArg::M4322 => Experiment::M4322,
        ExperimentArg::Elegant => Experiment::Elegant,
    })
}

fn stem(e: &Experiment) -> &'static str {
    match e {
        Experiment::ChshCircle { .. } => "circle",
        Experiment::ChainedScan { .. } => "chained",
        Experiment::TiltedScan { .. } => "tilted",
        Experiment::M3322 => "m3322",
        Experiment::M4322 => "m4322",
        Experiment::Elegant => "elegant",
    }
}

pub fn simulate(s: &Settings, p: &mut Printer, args: &SimulateArgs) -> CliResult<()> {
    let exp = experiment(args)?;
    let base = NoiseModel::default();
    let noise = NoiseModel::new(
        args.visibility.unwrap_or(base.visibility),
        args.white.unwrap_or(base.white_fraction),
        args.jitter_deg.map_or(base.angle_jitter, f64::to_radians),
    )?;
    let ov = Overrides {
        noise: Some(noise),
        rate: args.rate,
        duration_s: args.duration,
        seed: Some(s.seed),
        randomize_order: Some(!args.no_randomize),
        restarts: args.restarts,
    };
    let table = reproduce(&exp, &ov)?;
    let name = stem(&exp);
    let csv = table.to_csv()?;
    if let Some(dir) = s.out.clone() {
        p.write_file(&dir, &format!("{name}.csv"), &csv)?;
        for (k, (plan, rec)) in table.plans.iter().zip(&table.records).enumerate() {
            p.write_file(&dir, &format!("{name}_{k:03}_counts.csv"), &rec.to_csv()?)?;
            p.write_file(&dir, &format!("{name}_{k:03}.json"), &sidecar_json(plan, rec)?)?;
        }
    }
    for row in csv.lines() {
        p.line(row);
    }
    p.set_json(&table)
}
