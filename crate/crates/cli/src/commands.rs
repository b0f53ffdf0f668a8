use anyhow::{bail, Result};
use serde::Serialize;

use eastlab_core::constants::{condition_report, ConstantsReport, Provenance};
use eastlab_core::dynamics::{SimOptions, Simulator, StopRule};
use eastlab_core::fpp::{exp_moment_diagnostic, fpp_times, passage_rows};
use eastlab_core::mixing::{
    build_generator_capped, coalescence_summary, estimate_rho, front_profile, t_mix_of, tv_curve_of,
};
use eastlab_core::percolation::{crossing_curve, extinction_profile, scan_pc};
use eastlab_core::replicas::try_map_replicas;
use eastlab_core::{Configuration, Flavor, ModelParams, RandomSource, TrajectoryStats, Vertex};

use crate::acceptance;
use crate::args::*;
use crate::output::{num, RunSpec, Sink, Table};

fn run_spec<P: Serialize>(name: &str, params: &P, common: &Common) -> RunSpec {
    RunSpec::new(name, params, common.seed, common.out.clone())
}

fn model_params(m: &Model) -> Result<ModelParams> {
    Ok(ModelParams::new(m.d, m.flavor.into(), m.p, m.side)?)
}

pub fn simulate(a: &SimulateArgs) -> Result<i32> {
    let sink = Sink::open(a.common.out.as_deref())?;
    let params = model_params(&a.model)?;
    let lattice = params.lattice();
    let tracked: Vec<Vertex> = if a.track_all {
        lattice.vertices().collect()
    } else {
        a.track.clone().unwrap_or_else(|| vec![lattice.corner()])
    };
    let tracked_idx = tracked
        .iter()
        .map(|x| lattice.encode_checked(x))
        .collect::<eastlab_core::Result<Vec<_>>>()?;
    if let Some(w) = a.window {
        if w == 0 || w > a.model.side + 1 {
            bail!("window {w} is out of range [1, L+1] = [1, {}]", a.model.side + 1);
        }
    }
    let source = RandomSource::new(a.common.seed);
    let runs: Vec<TrajectoryStats> = try_map_replicas(&source, a.reps as usize, |_, src| {
        let init = match a.init {
            InitArg::Healthy => Configuration::all_healthy(lattice.len()),
            InitArg::Infected => Configuration::all_infected(lattice.len()),
            InitArg::Product => Configuration::sample_product(lattice.len(), params.p, &mut src.aux(1)),
        };
        let options = SimOptions {
            tracked: tracked_idx.clone(),
            good_set_window: a.window,
            ..SimOptions::default()
        };
        let mut sim = Simulator::new(&params, &init, &src, options)?;
        sim.run(a.horizon, StopRule::Horizon);
        Ok::<_, eastlab_core::Error>(sim.into_stats())
    })?;
    let mut cols: Vec<String> = vec!["replica".into()];
    cols.extend((1..=params.dim).map(|i| format!("x{i}")));
    cols.extend(["tau", "occupation", "end_time", "good_set_time", "updates"].map(String::from));
    let mut table = Table::new(&cols);
    for (r, s) in runs.iter().enumerate() {
        for (k, x) in tracked.iter().enumerate() {
            let mut row = vec![r.to_string()];
            row.extend(x.iter().map(|c| c.to_string()));
            row.push(num(s.infection_times[k]));
            row.push(num(s.occupation_times[k]));
            row.push(num(s.end_time));
            row.push(s.good_set_time.map(num).unwrap_or_default());
            row.push(s.updates.to_string());
            table.push(row);
        }
    }
    sink.csv(&run_spec("simulate", a, &a.common), &table)?;
    Ok(0)
}

pub fn fpp(a: &FppArgs) -> Result<i32> {
    let sink = Sink::open(a.common.out.as_deref())?;
    let source = RandomSource::new(a.common.seed);
    let flavor: Flavor = a.flavor.into();
    let run = run_spec("fpp", a, &a.common);
    if a.moment {
        let diag = exp_moment_diagnostic(
            a.d,
            a.side.max(1),
            flavor,
            a.reps as usize,
            &source,
            a.threshold.map(|t| (t, a.epsilon)),
        )?;
        sink.json(&run, &diag)?;
        return Ok(0);
    }
    let params = ModelParams::new(a.d, flavor, 0.0, a.side)?;
    let times = fpp_times(&params, &source)?;
    let mut cols: Vec<String> = (1..=a.d).map(|i| format!("x{i}")).collect();
    cols.push("tau".into());
    let mut table = Table::new(&cols);
    for (x, t) in passage_rows(&times) {
        let mut row: Vec<String> = x.iter().map(|c| c.to_string()).collect();
        row.push(num(t));
        table.push(row);
    }
    sink.csv(&run, &table)?;
    Ok(0)
}

pub fn perc_crossing(a: &PercCrossingArgs) -> Result<i32> {
    let sink = Sink::open(a.common.out.as_deref())?;
    let source = RandomSource::new(a.common.seed);
    let curve = crossing_curve(a.d, a.flavor.into(), &a.ps, a.n, a.delta, a.reps as usize, &source)?;
    let mut table = Table::new(&["p", "n", "delta", "crossing", "stderr", "reps"]);
    for (p, e) in a.ps.iter().zip(&curve) {
        table.push(vec![
            num(*p),
            a.n.to_string(),
            num(a.delta),
            num(e.estimate),
            num(e.stderr),
            e.reps.to_string(),
        ]);
    }
    sink.csv(&run_spec("perc-crossing", a, &a.common), &table)?;
    Ok(0)
}

pub fn perc_pc(a: &PercPcArgs) -> Result<i32> {
    let sink = Sink::open(a.common.out.as_deref())?;
    let source = RandomSource::new(a.common.seed);
    let scan = scan_pc(a.d, a.flavor.into(), &a.scales, a.reps as usize, a.tol, &source)?;
    sink.json(&run_spec("perc-pc", a, &a.common), &scan)?;
    Ok(0)
}

pub fn perc_survival(a: &PercSurvivalArgs) -> Result<i32> {
    let sink = Sink::open(a.common.out.as_deref())?;
    let source = RandomSource::new(a.common.seed);
    let profile = extinction_profile(
        a.d,
        a.flavor.into(),
        a.p,
        &a.sizes,
        a.generations,
        a.reps as usize,
        &source,
    )?;
    let mut table = Table::new(&["seed_size", "generations", "extinction", "stderr", "reps"]);
    for (k, e) in profile.sizes.iter().zip(&profile.extinction) {
        table.push(vec![
            k.to_string(),
            a.generations.to_string(),
            num(e.estimate),
            num(e.stderr),
            e.reps.to_string(),
        ]);
    }
    sink.csv(&run_spec("perc-survival", a, &a.common), &table)?;
    Ok(0)
}

fn constants_table(r: &ConstantsReport) -> String {
    let mut rows: Vec<(&str, String)> = vec![
        ("d", r.dim.to_string()),
        ("p_c", format!("{:.6} ({:?})", r.p_c, r.p_c_provenance).to_lowercase()),
        ("T_c", format!("{:.6}", r.t_c)),
        ("beta_c", format!("{:.6}", r.beta_c)),
        ("d beta_c", format!("{:.6}", r.d_beta_c)),
        (
            "d beta_c < 1",
            format!("{} (margin {:.6})", r.condition_holds, r.condition_margin),
        ),
    ];
    let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
    if r.threshold_t.is_some() {
        rows.push(("T", opt(r.threshold_t)));
        rows.push(("beta_T", opt(r.beta_t)));
        rows.push(("d beta_T", opt(r.d_beta_t)));
        rows.push(("lambda", opt(r.lambda)));
        if let Some(note) = &r.lambda_note {
            rows.push(("note", note.clone()));
        }
    }
    if let Some(l) = r.side {
        rows.push(("L", l.to_string()));
        rows.push(("L^(2/3)", opt(r.cutoff_window)));
        rows.push(("rho", opt(r.rho)));
        rows.push(("T_L", opt(r.cutoff_location)));
    }
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

pub fn constants(a: &ConstantsArgs) -> Result<i32> {
    let sink = Sink::open(a.common.out.as_deref())?;
    let provenance = if a.estimated {
        Provenance::Estimated
    } else {
        Provenance::User
    };
    let report = condition_report(a.d, a.pc, provenance, a.threshold, a.rho, a.side)?;
    let run = run_spec("constants", a, &a.common);
    match a.format {
        Format::Json => sink.json(&run, &report)?,
        Format::Table => sink.text(&run, &constants_table(&report))?,
    }
    Ok(0)
}

pub fn mix_exact(a: &MixExactArgs) -> Result<i32> {
    let sink = Sink::open(a.common.out.as_deref())?;
    let params = ModelParams::new(a.d, a.flavor.into(), a.p, a.side)?;
    let g = build_generator_capped(&params, a.cap_log2 as usize)?;
    let run = run_spec("mix-exact", a, &a.common);
    if a.tmix {
        let m = t_mix_of(&g, a.threshold)?;
        sink.json(&run, &m)?;
        return Ok(0);
    }
    let n = a.points as usize;
    let times: Vec<f64> = (0..n).map(|i| a.t_max * i as f64 / (n - 1) as f64).collect();
    let curve = tv_curve_of(&g, &times)?;
    let mut table = Table::new(&["t", "distance", "exhaustive", "truncation_error"]);
    for (t, v) in curve.times.iter().zip(&curve.values) {
        table.push(vec![
            num(*t),
            num(*v),
            curve.exhaustive.to_string(),
            num(curve.truncation_error),
        ]);
    }
    sink.csv(&run, &table)?;
    Ok(0)
}

pub fn mix_couple(a: &MixCoupleArgs) -> Result<i32> {
    let sink = Sink::open(a.common.out.as_deref())?;
    let params = model_params(&a.model)?;
    let source = RandomSource::new(a.common.seed);
    let summary = coalescence_summary(&params, a.horizon, a.reps as usize, &source)?;
    let mut table = Table::new(&["replica", "time", "censored", "exact"]);
    for (r, t) in summary.times.iter().enumerate() {
        let censored = t.is_infinite();
        table.push(vec![
            r.to_string(),
            num(if censored { a.horizon } else { *t }),
            censored.to_string(),
            summary.exact.to_string(),
        ]);
    }
    sink.csv(&run_spec("mix-couple", a, &a.common), &table)?;
    Ok(0)
}

pub fn rho(a: &RhoArgs) -> Result<i32> {
    let sink = Sink::open(a.common.out.as_deref())?;
    let source = RandomSource::new(a.common.seed);
    let est = estimate_rho(a.p, &a.scales, a.reps as usize, &source)?;
    sink.json(&run_spec("rho", a, &a.common), &est)?;
    Ok(0)
}

pub fn front(a: &FrontArgs) -> Result<i32> {
    let sink = Sink::open(a.common.out.as_deref())?;
    let params = ModelParams::new(a.d, a.flavor.into(), a.p, a.n)?;
    let source = RandomSource::new(a.common.seed);
    let profile = front_profile(&params, a.n, a.reps as usize, &source, a.rho)?;
    let mut table = Table::new(&["quantity", "estimate", "stderr", "reps", "censored"]);
    for row in &profile.rows {
        table.push(vec![
            format!("{}_speed", row.direction),
            num(row.speed.estimate),
            num(row.speed.stderr),
            row.speed.reps.to_string(),
            row.censored.to_string(),
        ]);
    }
    table.push(vec![
        "separation".into(),
        num(profile.separation),
        String::new(),
        a.reps.to_string(),
        String::new(),
    ]);
    if let Some(late) = profile.late_frequency {
        table.push(vec![
            "late_frequency".into(),
            num(late.estimate),
            num(late.stderr),
            late.reps.to_string(),
            String::new(),
        ]);
    }
    sink.csv(&run_spec("front", a, &a.common), &table)?;
    Ok(0)
}

pub fn accept(a: &AcceptArgs) -> Result<i32> {
    let sink = Sink::open(a.common.out.as_deref())?;
    let selected = a.only.clone().unwrap_or_else(|| (1..=13).collect());
    let outcomes = acceptance::run_selected(&selected, a.common.seed, |o| {
        eprintln!("{}", o.line());
    });
    let body: String = outcomes.iter().map(|o| o.line() + "\n").collect();
    sink.text(&run_spec("accept", a, &a.common), &body)?;
    Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { 1 })
}
