//! Markdown comparison against the bundled reference tables.

use bellkit::analysis::{chained_nonlocal_content, predictability_bound};
use bellkit::fixtures::{headline_value, table2, table3};
use bellkit::functionals::{elegant, local_bound, m3322, m4322, tilted, tilted_local_bound};
use bellkit::optimize::{scan_tilted, seesaw, seesaw_mes, seesaw_planar, SeesawConfig, DEFAULT_RESTARTS};
use bellkit::quantum::NoiseModel;
use bellkit::simulate::{reproduce, Experiment, Overrides};
use serde::Serialize;

use crate::output::Printer;
use crate::{CliResult, Settings};

const MES_TAU: f64 = 1.25;

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    computed: f64,
    reference: f64,
    pass: bool,
}

struct Report<'a> {
    p: &'a mut Printer,
    checks: Vec<Check>,
}

impl Report<'_> {
    fn mark(pass: bool) -> &'static str {
        if pass {
            "✓"
        } else {
            "✗"
        }
    }

    fn check(&mut self, name: &str, computed: f64, reference: f64, pass: bool, line: String) {
        self.p.line(format!("- {} {line}", Self::mark(pass)));
        self.checks.push(Check { name: name.into(), computed, reference, pass });
    }
}

pub fn run(s: &Settings, p: &mut Printer, restarts: Option<usize>) -> CliResult<()> {
    let restarts = restarts.unwrap_or(DEFAULT_RESTARTS);
    let cfg = SeesawConfig { restarts, tol: s.tol, seed: s.seed, ..SeesawConfig::default() };
    let noise = NoiseModel::new(0.997, 1.0, 0.1f64.to_radians())?;
    let ov = Overrides { noise: Some(noise), seed: Some(s.seed), restarts: Some(restarts), ..Overrides::default() };
    let mut r = Report { p, checks: Vec::new() };

    r.p.line("# bellkit report");
    r.p.line("");
    r.p.line(format!(
        "Seed {}, {restarts} seesaw restarts ({} for MES searches), simulated visibility 0.997 with white noise and 0.1 deg jitter.",
        s.seed,
        8 * restarts
    ));

    r.p.line("");
    r.p.line("## CHSH circle");
    r.p.line("");
    let circle = reproduce(&Experiment::ChshCircle { points: 180 }, &ov)?;
    let radii = circle.column("radius").expect("radius column");
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    let sd = (radii.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (radii.len() - 1) as f64).sqrt();
    let want = headline_value("circle_radius_mean")?;
    let line = format!("simulated radius {} ± {} vs 2.817 (180 points)", r.p.num(mean), r.p.num(sd));
    r.check("circle_radius", mean, want, (mean - want).abs() <= 0.01, line);

    r.p.line("");
    r.p.line("## Tilted inequality (table II)");
    r.p.line("");
    let t2 = table2();
    let (taus, measured, err, theta) =
        (t2.column("tau")?, t2.column("S_tau")?, t2.column("dS_tau")?, t2.column("theta")?);
    let rows = scan_tilted(&taus, &cfg)?;
    r.p.line("| tau | S_tau measured | S_tau qubit optimum | theta table | theta optimum | |");
    r.p.line("|---|---|---|---|---|---|");
    let mut all = true;
    for (k, row) in rows.iter().enumerate() {
        let ok = row.s_tau >= measured[k] - err[k];
        all &= ok;
        r.p.line(format!(
            "| {} | {} ± {} | {} | {} | {} | {} |",
            taus[k],
            measured[k],
            err[k],
            r.p.num(row.s_tau),
            theta[k],
            r.p.num(row.theta_deg),
            Report::mark(ok)
        ));
    }
    r.p.line("");
    let line = "every measured S_tau is within its error of the qubit optimum or below it".to_string();
    r.check("table2_rows", rows.len() as f64, taus.len() as f64, all, line);
    let at13 = seesaw(&tilted(1.3)?, &cfg)?.value;
    let want = headline_value("s_tau_1_3")?;
    let line = format!("tau=1.3 optimum {} vs measured {want} (local bound {})", r.p.num(at13), tilted_local_bound(1.3));
    r.check("s_tau_1_3", at13, want, at13 >= want, line);
    let mes = seesaw_mes(&tilted(MES_TAU)?, &SeesawConfig { restarts: 8 * restarts, ..cfg.clone() })?.value;
    let bound = tilted_local_bound(MES_TAU);
    let ok = mes <= bound + 1e-9;
    let line = if ok {
        format!("MES tilted τ={MES_TAU}: no violation found (d=2 search), best {} ≤ {bound}", r.p.num(mes))
    } else {
        format!("MES tilted τ={MES_TAU}: violation {} > {bound}", r.p.num(mes))
    };
    r.check("mes_tilted", mes, bound, ok, line);

    r.p.line("");
    r.p.line("## Chained inequalities (table III)");
    r.p.line("");
    let t3 = table3();
    let (ns, i_table, nu, delta) = (t3.column("n")?, t3.column("I_n")?, t3.column("nu_n")?, t3.column("delta_n")?);
    let scan = reproduce(&Experiment::ChainedScan { n_max: 45 }, &ov)?;
    let i_sim = scan.column("I_n").expect("I_n column");
    let di_sim = scan.column("dI_n").expect("dI_n column");
    r.p.line("| n | I_n table | I_n simulated | delta_n table | delta_n from table row | |");
    r.p.line("|---|---|---|---|---|---|");
    let mut all = true;
    for k in 0..ns.len() {
        let d = predictability_bound(i_table[k], nu[k]).corrected;
        let ok = (d - delta[k]).abs() <= 2.0 * nu[k] + 1e-12;
        all &= ok;
        r.p.line(format!(
            "| {} | {} | {} ± {} | {} | {} | {} |",
            ns[k],
            i_table[k],
            r.p.num(i_sim[k]),
            r.p.num(di_sim[k]),
            delta[k],
            r.p.num(d),
            Report::mark(ok)
        ));
    }
    r.p.line("");
    r.check("table3_delta", ns.len() as f64, 44.0, all, "recomputed predictability matches every row".into());
    let (k, min) = i_sim.iter().enumerate().fold((0, f64::INFINITY), |b, (k, &v)| if v < b.1 { (k, v) } else { b });
    let line = format!("simulated minimum I_{} = {} (table minimum 0.126 near n=18)", ns[k], r.p.num(min));
    r.check("chained_min", min, 0.126, (0.11..=0.14).contains(&min), line);
    let q18 = chained_nonlocal_content(headline_value("i_18")?);
    let want = headline_value("q_min_18")?;
    let line = format!("q_min(n=18) computed ≥ {want}: {} from I_18 = 0.126", r.p.num(q18));
    r.check("q_min_18", q18, want, q18 >= want - 1e-12, line);

    r.p.line("");
    r.p.line("## Larger inequalities");
    r.p.line("");
    for (key, f) in [("m3322", m3322()), ("m4322", m4322())] {
        let q = seesaw(&f, &cfg)?.value;
        let want = headline_value(&format!("{key}_qubit_max"))?;
        let local = local_bound(&f)?.value;
        let line = format!("{key} qubit optimum {} vs {want} (local bound {local})", r.p.num(q));
        r.check(key, q, want, (q - want).abs() <= 1e-3, line);
        let sim = reproduce(&if key == "m3322" { Experiment::M3322 } else { Experiment::M4322 }, &ov)?;
        let (v, e) = (sim.rows[0][0], sim.rows[0][1]);
        let measured = headline_value(&format!("{key}_measured"))?;
        let line = format!("{key} simulated {} ± {} vs measured {measured}", r.p.num(v), r.p.num(e));
        r.check(&format!("{key}_simulated"), v, measured, v > local, line);
    }
    let e = elegant();
    let q = seesaw(&e, &cfg)?.value;
    let planar = seesaw_planar(&e, &cfg)?.value;
    let want = headline_value("s_elegant_quantum")?;
    let want_planar = headline_value("s_elegant_planar")?;
    let line = format!("elegant optimum {} vs {want}, planar {} vs {want_planar}", r.p.num(q), r.p.num(planar));
    r.check("elegant", q, want, (q - want).abs() <= 1e-3 && (planar - want_planar).abs() <= 1e-3, line);
    let sim = reproduce(&Experiment::Elegant, &ov)?.rows[0][0];
    let measured = headline_value("s_elegant")?;
    let line = format!("elegant simulated {} vs measured {measured}, above planar {}", r.p.num(sim), r.p.num(planar));
    r.check("elegant_simulated", sim, measured, sim > planar, line);

    let passed = r.checks.iter().filter(|c| c.pass).count();
    r.p.line("");
    r.p.line(format!("**{passed}/{} checks passed**", r.checks.len()));
    let checks = std::mem::take(&mut r.checks);
    r.p.set_json(&serde_json::json!({ "seed": s.seed, "restarts": restarts, "passed": passed, "checks": checks }))
}
