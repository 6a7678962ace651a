//! The subcommands. Each writes `<command>.json` plus its tables and figures.

use std::collections::BTreeMap;
use std::fs;

use gamow::energy::{ComponentList, CutOptions, CutOutcome, EnergyModel, Shape};
use gamow::kernel::{
    check_decreasing, check_pd_fourier, check_pd_inequality, default_decreasing_grid, strip_family,
    CheckReport, Integral, PairSource, PdOptions, RadialProfile, RandomRasterPairs, Witness,
};
use gamow::lens::{
    lens_derivatives, lens_inequality_slack, lens_inequality_slack_with, lens_state, lens_svg,
    offset_bound,
};
use gamow::minimize::{
    ball_minimality_test, minimize_generalized, minimize_single, random_start, shapes_svg,
    sweep_svg, RowStatus, SweepRow, SweepRunner,
};
use gamow::shapes::fixtures;
use gamow::{Kernel, Raster, Star, Trace};
use serde_json::{json, Value};

use crate::config::{CheckKind, Loaded, MinimizeMode, RunConfig, StartKind};
use crate::output::Output;
use crate::{CliError, Status};

fn kernel(cfg: &RunConfig) -> Result<Kernel, CliError> {
    cfg.kernel
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs `kernel`".into()))?
        .build()
}

fn epsilon(cfg: &RunConfig) -> Result<f64, CliError> {
    cfg.epsilon
        .ok_or_else(|| CliError::Config("this command needs `epsilon`".into()))
}

/// `epsilons`, or the single `epsilon` as a one-element list.
fn epsilon_list(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    match (&cfg.epsilons, cfg.epsilon) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "give `epsilon` or `epsilons`, not both".into(),
        )),
        (Some(list), None) if !list.is_empty() => Ok(list.clone()),
        (None, Some(e)) => Ok(vec![e]),
        _ => Err(CliError::Config(
            "this command needs `epsilon` or `epsilons`".into(),
        )),
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::CheckFailed => "check_failed",
        Status::Partial => "partial",
    }
}

fn with_status(mut body: Value, s: Status) -> Value {
    body["status"] = json!(status_name(s));
    body
}

fn integral_report(value: gamow::Result<Integral<f64>>) -> gamow::Result<CheckReport> {
    let mut report = CheckReport {
        samples_used: 1,
        ..CheckReport::default()
    };
    match value? {
        Integral::Finite(v) => {
            report.passed = true;
            report.extremal_ratio = v;
            report.metrics.insert("integral".into(), v);
        }
        Integral::Divergent => report.witnesses.push(Witness {
            label: "DIVERGENT".into(),
            values: Vec::new(),
        }),
    }
    Ok(report)
}

fn failed_report(e: gamow::Error) -> CheckReport {
    CheckReport {
        warnings: vec![e.to_string()],
        ..CheckReport::default()
    }
}

/// Pair `index` of a deterministic source.
fn replay(mut source: Box<dyn PairSource<f64>>, index: usize) -> Option<(Raster, Raster)> {
    for _ in 0..index {
        source.next_pair()?;
    }
    source.next_pair()
}

pub fn kernel_check(cfg: &RunConfig, out: &Output) -> Result<Status, CliError> {
    let k = kernel(cfg)?;
    let c = &cfg.checks;
    if c.run.is_empty() {
        return Err(CliError::Config("checks.run is empty".into()));
    }
    let opts = PdOptions {
        tolerance: c.pd_tolerance,
    };
    let mut checks = BTreeMap::new();
    let mut witness_files = Vec::new();
    for kind in &c.run {
        let entries: Vec<(
            &str,
            gamow::Result<CheckReport>,
            Option<Box<dyn PairSource<f64>>>,
        )> = match kind {
            CheckKind::Admissibility => vec![(
                "admissibility",
                integral_report(k.admissibility_integral()),
                None,
            )],
            CheckKind::Lipschitz => {
                vec![("lipschitz", integral_report(k.lipschitz_integral()), None)]
            }
            CheckKind::Decreasing => vec![(
                "decreasing",
                check_decreasing(&k, &default_decreasing_grid()),
                None,
            )],
            CheckKind::Fourier => vec![("fourier", check_pd_fourier(&k, c.fourier), None)],
            CheckKind::Pd => {
                let fresh = || RandomRasterPairs::new(c.pd_pitch, c.pd_cells, cfg.seed);
                let random =
                    fresh().and_then(|mut src| check_pd_inequality(&k, &mut src, c.pd_pairs, opts));
                let replay_random = fresh()
                    .ok()
                    .map(|s| Box::new(s) as Box<dyn PairSource<f64>>);
                let pitch = c.strip_pitch * k.length_scale();
                let strips = strip_family(&k, pitch).and_then(|mut fam| {
                    let n = fam.offsets.len();
                    check_pd_inequality(&k, &mut fam, n, opts)
                });
                let replay_strips = strip_family(&k, pitch)
                    .ok()
                    .map(|s| Box::new(s) as Box<dyn PairSource<f64>>);
                vec![
                    ("pd_random_pairs", random, replay_random),
                    ("pd_strips", strips, replay_strips),
                ]
            }
        };
        for (name, report, source) in entries {
            let report = report.unwrap_or_else(failed_report);
            if let (Some(w), Some(src), true) =
                (report.witnesses.first(), source, witness_files.is_empty())
            {
                let index = w.values.first().copied().unwrap_or(0.0) as usize;
                if let Some((f, g)) = replay(src, index) {
                    out.pgm("pd_witness_f.pgm", &f.to_pgm())?;
                    out.pgm("pd_witness_g.pgm", &g.to_pgm())?;
                    witness_files = vec!["pd_witness_f.pgm", "pd_witness_g.pgm"];
                }
            }
            checks.insert(name.to_string(), report);
        }
    }
    let passed = checks.values().all(|r| r.passed);
    let status = Status::from_pass(passed);
    let body = json!({
        "kernel": k.to_string(),
        "passed": passed,
        "checks": checks,
        "witness_files": witness_files,
    });
    out.json("kernel_check.json", &with_status(body, status))?;
    Ok(status)
}

fn load_components(cfg: &RunConfig) -> Result<Vec<Loaded>, CliError> {
    if cfg.components.is_empty() {
        return Err(CliError::Config("this command needs `components`".into()));
    }
    cfg.components.iter().map(|c| c.load()).collect()
}

fn stars_of(shapes: &[Loaded]) -> Option<Vec<Star>> {
    shapes
        .iter()
        .map(|s| match s {
            Loaded::Star(s) => Some(s.clone()),
            Loaded::Raster(_) => None,
        })
        .collect()
}

pub fn energy(cfg: &RunConfig, out: &Output) -> Result<Status, CliError> {
    let k = kernel(cfg)?;
    let eps = epsilon_list(cfg)?;
    let loaded = load_components(cfg)?;
    let shapes: Vec<Shape<f64>> = loaded
        .iter()
        .map(|l| match l {
            Loaded::Star(s) => Shape::Star(s.clone()),
            Loaded::Raster(r) => Shape::Raster(r.clone()),
        })
        .collect();
    let model = EnergyModel::new(&k, cfg.quadrature)?;
    let list = ComponentList::new(shapes.clone())?;
    let mut breakdowns = Vec::with_capacity(eps.len());
    for &e in &eps {
        let b = if shapes.len() == 1 {
            model.energy(e, &shapes[0])?
        } else if cfg.energy.union {
            model.union(e, &list)?
        } else {
            model.generalized(e, &list)?
        };
        breakdowns.push(b);
    }
    let rows: Vec<Vec<String>> = breakdowns
        .iter()
        .map(|b| {
            let r = b.row();
            vec![
                r.epsilon.to_string(),
                r.perimeter.to_string(),
                r.riesz.to_string(),
                r.total.to_string(),
                r.n_components.to_string(),
            ]
        })
        .collect();
    out.csv(
        "energy.csv",
        &["epsilon", "perimeter", "riesz", "total", "n_components"],
        &rows,
    )?;
    if let Some(stars) = stars_of(&loaded) {
        out.svg("shapes.svg", &shapes_svg(&stars))?;
    }
    let body = json!({
        "kernel": k.to_string(),
        "components": shapes.len(),
        "union": cfg.energy.union && shapes.len() > 1,
        "energies": breakdowns,
    });
    out.json("energy.json", &with_status(body, Status::Pass))?;
    Ok(Status::Pass)
}

/// The trace without its wall time, which goes to the timing log.
fn trace_value(t: &Trace) -> Value {
    let mut v = serde_json::to_value(t).expect("trace serializes");
    if let Some(map) = v.as_object_mut() {
        map.remove("wall_time");
    }
    v
}

pub fn minimize(cfg: &RunConfig, out: &Output) -> Result<Status, CliError> {
    let k = kernel(cfg)?;
    let eps = epsilon(cfg)?;
    let opt = &cfg.optimizer;
    let m = &cfg.minimize;
    let (status, body) = match m.mode {
        MinimizeMode::BallTest => {
            let report = ball_minimality_test(&k, eps, m.perturbations, opt)?;
            let status = Status::from_pass(report.passed);
            (
                status,
                json!({ "mode": "ball_test", "passed": report.passed, "report": report }),
            )
        }
        MinimizeMode::Single | MinimizeMode::Generalized => {
            let trace = if m.mode == MinimizeMode::Single {
                let start = match m.start {
                    StartKind::Disk => Star::unit_disk(),
                    StartKind::Random => {
                        random_start(cfg.seed, opt.n_modes, opt.perturbation_amplitude)?
                    }
                    StartKind::Component => match load_components(cfg)?.into_iter().next() {
                        Some(Loaded::Star(s)) => s,
                        _ => {
                            return Err(CliError::Config(
                                "start = \"component\" needs a star component".into(),
                            ))
                        }
                    },
                };
                minimize_single(&k, eps, &start, opt)?
            } else {
                minimize_generalized(&k, eps, m.max_components, opt)?.1
            };
            let passed = trace.converged && trace.locally_optimal;
            out.svg("shapes.svg", &shapes_svg(&trace.shapes))?;
            let mode = if m.mode == MinimizeMode::Single {
                "single"
            } else {
                "generalized"
            };
            let body = json!({
                "mode": mode,
                "passed": passed,
                "n_components": trace.shapes.len(),
                "max_asymmetry": trace.max_asymmetry(),
                "trace": trace_value(&trace),
            });
            (Status::from_pass(passed), body)
        }
    };
    let mut body = body;
    body["kernel"] = json!(k.to_string());
    body["epsilon"] = json!(eps);
    out.json("minimize.json", &with_status(body, status))?;
    Ok(status)
}

const SWEEP_HEADER: [&str; 10] = [
    "epsilon",
    "best_single_energy",
    "best_split_energy",
    "best_multi_energy",
    "n_components_chosen",
    "asymmetry",
    "fractions",
    "status",
    "message",
    "warm_start",
];

/// `cx cy r0 k:a:b ...`; shortest round-trip decimals, so decoding is exact.
fn encode_star(s: &Star) -> String {
    let mut parts = vec![
        s.center()[0].to_string(),
        s.center()[1].to_string(),
        s.r0().to_string(),
    ];
    parts.extend(s.modes().iter().map(|(k, a, b)| format!("{k}:{a}:{b}")));
    parts.join(" ")
}

fn decode_star(text: &str) -> Option<Star> {
    let mut it = text.split_whitespace();
    let mut num = || it.next()?.parse::<f64>().ok();
    let (cx, cy, r0) = (num()?, num()?, num()?);
    let modes = text
        .split_whitespace()
        .skip(3)
        .map(|m| {
            let mut f = m.split(':');
            Some((
                f.next()?.parse().ok()?,
                f.next()?.parse().ok()?,
                f.next()?.parse().ok()?,
            ))
        })
        .collect::<Option<Vec<_>>>()?;
    Star::new([cx, cy], r0, modes).ok()
}

fn sweep_record(row: &SweepRow, warm: &Star) -> Vec<String> {
    let (status, message) = match &row.status {
        RowStatus::Ok => ("ok", String::new()),
        RowStatus::Failed(m) => ("failed", m.clone()),
    };
    vec![
        row.epsilon.to_string(),
        row.best_single_energy.to_string(),
        row.best_split_energy.to_string(),
        row.best_multi_energy
            .map(|m| m.to_string())
            .unwrap_or_default(),
        row.n_components_chosen.to_string(),
        row.asymmetry.to_string(),
        row.fractions
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(";"),
        status.into(),
        message,
        encode_star(warm),
    ]
}

fn parse_sweep_record(r: &csv::StringRecord) -> Option<(SweepRow, Star)> {
    if r.len() != SWEEP_HEADER.len() {
        return None;
    }
    let f = |i: usize| r[i].parse::<f64>().ok();
    let fractions = if r[6].is_empty() {
        Vec::new()
    } else {
        r[6].split(';')
            .map(|x| x.parse().ok())
            .collect::<Option<Vec<f64>>>()?
    };
    let status = match &r[7] {
        "ok" => RowStatus::Ok,
        "failed" => RowStatus::Failed(r[8].to_string()),
        _ => return None,
    };
    let row = SweepRow {
        epsilon: f(0)?,
        best_single_energy: f(1)?,
        best_split_energy: f(2)?,
        best_multi_energy: if r[3].is_empty() { None } else { Some(f(3)?) },
        n_components_chosen: r[4].parse().ok()?,
        asymmetry: f(5)?,
        fractions,
        status,
    };
    Some((row, decode_star(&r[9])?))
}

/// Rows of an earlier run with the same config, and the warm start after them.
fn read_checkpoint(out: &Output, eps: &[f64]) -> Result<Option<(Vec<SweepRow>, Star)>, CliError> {
    let path = out.dir().join("sweep.csv");
    let Ok(text) = fs::read_to_string(&path) else {
        return Ok(None);
    };
    let bad = |m: &str| CliError::Config(format!("cannot resume from {}: {m}", path.display()));
    let (first, body) = text.split_once('\n').ok_or_else(|| bad("empty file"))?;
    if first != format!("# {}", out.stamp()) {
        return Err(bad("written by a different config or version"));
    }
    let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let mut rows = Vec::new();
    let mut warm = None;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(&e.to_string()))?;
        let (row, w) =
            parse_sweep_record(&rec).ok_or_else(|| bad(&format!("malformed row {}", i + 1)))?;
        if eps.get(i) != Some(&row.epsilon) {
            return Err(bad(&format!(
                "row {} does not match the epsilon list",
                i + 1
            )));
        }
        rows.push(row);
        warm = Some(w);
    }
    Ok(warm.map(|w| (rows, w)))
}

pub fn sweep(cfg: &RunConfig, out: &Output, resume: bool) -> Result<Status, CliError> {
    let k = kernel(cfg)?;
    let eps = epsilon_list(cfg)?;
    if eps.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CliError::Config(
            "epsilons must be strictly increasing".into(),
        ));
    }
    let checkpoint = if resume {
        read_checkpoint(out, &eps)?
    } else {
        None
    };
    let mut runner = match checkpoint {
        Some((rows, warm)) => SweepRunner::resume(&k, &cfg.optimizer, rows, warm)?,
        None => SweepRunner::new(&k, &cfg.optimizer)?,
    };
    let done = runner.rows().len();
    let mut lines = if done > 0 {
        existing_lines(out)?
    } else {
        Vec::new()
    };
    for &e in &eps[done..] {
        let row = runner.step(e)?.clone();
        lines.push(sweep_record(&row, runner.warm_start()));
        out.csv("sweep.csv", &SWEEP_HEADER, &lines)?;
    }
    let result = runner.finish();
    let failed = result
        .rows
        .iter()
        .filter(|r| r.status != RowStatus::Ok)
        .count();
    let status = if failed > 0 {
        Status::Partial
    } else {
        Status::Pass
    };
    out.svg("sweep.svg", &sweep_svg(&result))?;
    let body = json!({
        "kernel": k.to_string(),
        "rows": result.rows,
        "fission_threshold": result.fission_threshold,
        "fission_bracket": result.fission_bracket,
        "failed_rows": failed,
    });
    out.json("sweep.json", &with_status(body, status))?;
    Ok(status)
}

/// The CSV records already checkpointed, verbatim.
fn existing_lines(out: &Output) -> Result<Vec<Vec<String>>, CliError> {
    let path = out.dir().join("sweep.csv");
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    reader
        .records()
        .map(|r| {
            r.map(|r| r.iter().map(str::to_string).collect())
                .map_err(|e| CliError::Failed(e.to_string()))
        })
        .collect()
}

fn opt_string(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn lens_verify(cfg: &RunConfig, out: &Output) -> Result<Status, CliError> {
    let l = &cfg.lens;
    if l.angles == 0 || l.offsets == 0 || !(l.offset_factor > 0.0) || !(l.tolerance >= 0.0) {
        return Err(CliError::Config(
            "lens needs angles >= 1, offsets >= 1, offset_factor > 0, tolerance >= 0".into(),
        ));
    }
    let mut rows = Vec::with_capacity(l.angles * l.offsets);
    let (mut in_domain, mut min_slack, mut min_strong) = (0usize, f64::INFINITY, f64::INFINITY);
    let mut max_residual = 0.0f64;
    for i in 0..l.angles {
        let theta = std::f64::consts::FRAC_PI_2 * (i as f64 + 0.5) / l.angles as f64;
        let span = l.offset_factor * offset_bound::<f64>(theta);
        for j in 0..l.offsets {
            let delta = -span + 2.0 * span * (j as f64 + 0.5) / l.offsets as f64;
            let mut row = vec![theta.to_string(), delta.to_string()];
            match lens_state(theta, delta) {
                Ok(st) => {
                    in_domain += 1;
                    let slack = lens_inequality_slack(theta, delta)?;
                    let strong = if delta > 0.0 {
                        Some(lens_inequality_slack_with(theta, delta, 0.25)?)
                    } else {
                        None
                    };
                    let d = lens_derivatives(theta, delta)?;
                    let apex = (st.center_abscissa + st.radius - 1.0 - delta).abs();
                    let chord = (st.radius * st.half_opening.sin() - theta.sin()).abs();
                    min_slack = min_slack.min(slack);
                    min_strong = strong.map_or(min_strong, |s| min_strong.min(s));
                    max_residual = max_residual.max(apex).max(chord);
                    row.extend([
                        "true".to_string(),
                        slack.to_string(),
                        opt_string(strong),
                        d.radius.to_string(),
                        d.half_opening.to_string(),
                        d.arc_length.to_string(),
                        d.enclosed_area.to_string(),
                        apex.to_string(),
                        chord.to_string(),
                    ]);
                }
                Err(gamow::Error::Domain(_)) => {
                    row.push("false".into());
                    row.extend(std::iter::repeat(String::new()).take(8));
                }
                Err(e) => return Err(e.into()),
            }
            rows.push(row);
        }
    }
    out.csv(
        "lens_grid.csv",
        &[
            "theta_bar",
            "delta",
            "in_domain",
            "slack",
            "strong_slack",
            "d_radius",
            "d_half_opening",
            "d_arc_length",
            "d_area",
            "apex_residual",
            "chord_residual",
        ],
        &rows,
    )?;
    let figure = lens_state(l.figure_angle, 0.5 * offset_bound::<f64>(l.figure_angle))?;
    out.svg("lens.svg", &lens_svg(&figure))?;
    let passed = in_domain > 0 && min_slack >= -l.tolerance;
    let status = Status::from_pass(passed);
    let finite = |x: f64| if x.is_finite() { Some(x) } else { None };
    let body = json!({
        "passed": passed,
        "rows": rows.len(),
        "in_domain": in_domain,
        "out_of_domain": rows.len() - in_domain,
        "min_slack": finite(min_slack),
        "min_strong_slack": finite(min_strong),
        "max_identity_residual": max_residual,
        "tolerance": l.tolerance,
    });
    out.json("lens_verify.json", &with_status(body, status))?;
    Ok(status)
}

pub fn cut_paste(cfg: &RunConfig, out: &Output) -> Result<Status, CliError> {
    let k = kernel(cfg)?;
    let eps = epsilon(cfg)?;
    let c = &cfg.cut;
    let raster = match &c.raster {
        Some(path) => match crate::config::load_shape_file(path)? {
            Loaded::Raster(r) => r,
            Loaded::Star(_) => {
                return Err(CliError::Config("cut.raster must be a .pgm raster".into()))
            }
        },
        None => fixtures::dumbbell(c.pitch)?,
    };
    let profile = RadialProfile::new(&k)?;
    let outcome = gamow::energy::cut_and_paste(
        &profile,
        eps,
        &raster,
        c.band[0],
        c.band[1],
        c.mass_budget,
        CutOptions { window: c.window },
    )?;
    let (status, body) = match outcome {
        CutOutcome::Cut(r) => {
            out.pgm("cut.pgm", &r.set.to_pgm())?;
            let status = Status::from_pass(r.guarantee_holds);
            let body = json!({
                "outcome": "cut",
                "passed": r.guarantee_holds,
                "a_plus": r.a_plus,
                "b_minus": r.b_minus,
                "sigma_a": r.sigma_a,
                "sigma_b": r.sigma_b,
                "m1": r.m1,
                "m2": r.m2,
                "removed_mass": r.removed_mass,
                "delta_perimeter": r.delta_perimeter,
                "delta_riesz": r.delta_riesz,
                "energy_change": r.energy_change,
                "guaranteed_decrease": r.guaranteed_decrease,
                "guarantee_holds": r.guarantee_holds,
            });
            (status, body)
        }
        CutOutcome::NoCut(n) => (
            Status::Pass,
            json!({
                "outcome": "no_cut",
                "passed": true,
                "side": n.side,
                "best_ratio_left": n.best_ratio_left,
                "best_ratio_right": n.best_ratio_right,
            }),
        ),
    };
    let mut body = body;
    body["kernel"] = json!(k.to_string());
    body["epsilon"] = json!(eps);
    body["band"] = json!(c.band);
    out.json("cut_paste.json", &with_status(body, status))?;
    Ok(status)
}

/// Result files in the order they appear in the report.
const RESULTS: [(&str, &str, &[&str]); 6] = [
    ("kernel-check", "kernel_check.json", &["kernel", "passed"]),
    ("energy", "energy.json", &["kernel", "components"]),
    (
        "minimize",
        "minimize.json",
        &["kernel", "epsilon", "mode", "passed", "max_asymmetry"],
    ),
    (
        "sweep",
        "sweep.json",
        &[
            "kernel",
            "fission_threshold",
            "fission_bracket",
            "failed_rows",
        ],
    ),
    (
        "lens-verify",
        "lens_verify.json",
        &["passed", "rows", "in_domain", "min_slack"],
    ),
    (
        "cut-paste",
        "cut_paste.json",
        &[
            "kernel",
            "epsilon",
            "outcome",
            "energy_change",
            "guaranteed_decrease",
        ],
    ),
];

const FIGURES: [&str; 3] = ["shapes.svg", "sweep.svg", "lens.svg"];

pub fn report(out: &Output) -> Result<Status, CliError> {
    let mut md = String::from("# gamow run report\n\n");
    let mut found = 0;
    for (command, file, keys) in RESULTS {
        let path = out.dir().join(file);
        let Ok(text) = fs::read_to_string(&path) else {
            continue;
        };
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
        found += 1;
        md.push_str(&format!("## {command}\n\n| field | value |\n|---|---|\n"));
        md.push_str(&format!(
            "| status | {} |\n",
            v["status"].as_str().unwrap_or("?")
        ));
        md.push_str(&format!(
            "| config | `{}` |\n",
            v["meta"]["config_hash"].as_str().unwrap_or("?")
        ));
        for key in keys.iter() {
            if let Some(x) = v.get(*key) {
                md.push_str(&format!("| {key} | {x} |\n"));
            }
        }
        md.push('\n');
    }
    if found == 0 {
        return Err(CliError::Config(format!(
            "no results in {}",
            out.dir().display()
        )));
    }
    let figures: Vec<&str> = FIGURES
        .iter()
        .copied()
        .filter(|f| out.dir().join(f).exists())
        .collect();
    if !figures.is_empty() {
        md.push_str("## figures\n\n");
        for f in figures {
            md.push_str(&format!("![{f}]({f})\n\n"));
        }
    }
    out.text("report.md", &md)?;
    Ok(Status::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn warm_start_encoding_round_trips(
            cx in -5.0f64..5.0,
            cy in -5.0f64..5.0,
            r0 in 0.1f64..3.0,
            coeffs in proptest::collection::vec((-0.05f64..0.05, -0.05f64..0.05), 0..6),
        ) {
            let modes = coeffs.iter().enumerate().map(|(i, &(a, b))| (i as u32 + 1, a, b)).collect();
            let s = Star::new([cx, cy], r0, modes).unwrap();
            prop_assert_eq!(decode_star(&encode_star(&s)), Some(s));
        }
    }

    #[test]
    fn sweep_records_round_trip() {
        let row = SweepRow {
            epsilon: 0.1,
            best_single_energy: 7.0,
            best_split_energy: 7.0,
            best_multi_energy: None,
            n_components_chosen: 1,
            asymmetry: f64::NAN,
            fractions: vec![0.625, 0.375],
            status: RowStatus::Failed("tolerance, not met".into()),
        };
        let warm = Star::unit_disk();
        let rec = csv::StringRecord::from(sweep_record(&row, &warm));
        let (back, w) = parse_sweep_record(&rec).unwrap();
        assert_eq!(w, warm);
        assert_eq!(back.fractions, row.fractions);
        assert_eq!(back.status, row.status);
        assert!(back.asymmetry.is_nan() && back.best_multi_energy.is_none());
    }
}
