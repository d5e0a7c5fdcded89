use std::io::Write;

use anyhow::{bail, Context, Result};
use optwave::fitting::{
    default_grid, fit_nls_to_bs, fit_packet_to_bs, locate_kink, nls_start_list, packet_curve,
    reproduce_paper_fit, rmse, FitResult, KinkReport, NlsFitConfig, NlsModel, NlsObjective,
    Objective, PacketObjective, Target,
};
use optwave::io::{write_curves_csv, write_field_csv, write_field_json, write_path_csv};
use optwave::nls::psi_soliton;
use optwave::propagator::max_drift;
use optwave::quantum::published::{self, PublishedPacketFit};
use optwave::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::*;
use crate::output::Outputs;

pub fn bs_curve(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let grid = cfg.grid.unwrap_or_else(default_grid);
    let p = cfg.option;
    let s = grid.nodes();
    let put = optwave::bs_curve(&grid, &p, OptionKind::Put)?;
    let call = optwave::bs_curve(&grid, &p, OptionKind::Call)?;
    let greeks = |kind| {
        s.iter()
            .map(|&x| bs_greeks(x, &p, kind))
            .collect::<optwave::Result<Vec<_>>>()
    };
    let (call_greeks, put_greeks) = (greeks(OptionKind::Call)?, greeks(OptionKind::Put)?);
    let spot = cfg.bs_curve.spot.unwrap_or(p.strike);
    let path = simulate_gbm(
        spot,
        p.rate - p.dividend_yield,
        p.volatility,
        p.maturity,
        cfg.bs_curve.gbm_steps,
        cfg.seed,
    )?;
    let parity = s
        .iter()
        .map(|&x| parity_gap(x, &p).map(f64::abs))
        .try_fold(0.0f64, |m, g| g.map(|g| m.max(g)))?;

    match out.format {
        Format::Csv => {
            out.write("curves.csv", |w| {
                Ok(write_curves_csv(&s, &[("put", &put), ("call", &call)], w)?)
            })?;
            out.write("greeks.csv", |w| {
                writeln!(w, "kind,s,delta,gamma,vega,theta,rho")?;
                for (kind, rows) in [("call", &call_greeks), ("put", &put_greeks)] {
                    for (x, g) in s.iter().zip(rows) {
                        writeln!(
                            w,
                            "{kind},{x},{},{},{},{},{}",
                            g.delta, g.gamma, g.vega, g.theta, g.rho
                        )?;
                    }
                }
                Ok(())
            })?;
            out.write("gbm_path.csv", |w| Ok(write_path_csv(&path, w)?))?;
        }
        Format::Json => {
            out.json(
                "bs_curve.json",
                &json!({
                    "option": p,
                    "s": s,
                    "put": put,
                    "call": call,
                    "greeks": { "call": call_greeks, "put": put_greeks },
                    "gbm_path": path,
                }),
            )?;
        }
    }
    Ok(json!({ "n_points": s.len(), "max_parity_gap": parity }))
}

pub fn greeks(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let g = &cfg.greeks;
    match g.model {
        GreeksModel::BlackScholes => {
            let grid = cfg.grid.unwrap_or_else(default_grid);
            let mut rows = Vec::new();
            for &t in &g.times {
                let p = OptionParams {
                    maturity: t,
                    ..cfg.option
                };
                for s in grid.nodes() {
                    rows.push((t, s, bs_greeks(s, &p, g.kind)?));
                }
            }
            match out.format {
                Format::Csv => out.write("greeks.csv", |w| {
                    writeln!(w, "t,s,delta,gamma,vega,theta,rho")?;
                    for (t, s, r) in &rows {
                        writeln!(
                            w,
                            "{t},{s},{},{},{},{},{}",
                            r.delta, r.gamma, r.vega, r.theta, r.rho
                        )?;
                    }
                    Ok(())
                })?,
                Format::Json => out.json("greeks.json", &lattice_json(&rows))?,
            }
            Ok(json!({ "model": g.model_name(), "kind": g.kind, "rows": rows.len() }))
        }
        GreeksModel::Packet => {
            let (basis, _) = packet_basis(&cfg.packet)?;
            let grid = cfg.grid.unwrap_or_else(default_grid);
            let mut rows = Vec::new();
            let mut identity_gap: f64 = 0.0;
            for &t in &g.times {
                for s in grid.nodes() {
                    let q = quantum_greeks(&basis, s, t);
                    identity_gap = identity_gap.max((t * q.theta - basis.sigma() * q.vega).abs());
                    rows.push((t, s, q));
                }
            }
            match out.format {
                Format::Csv => out.write("greeks.csv", |w| {
                    writeln!(w, "t,s,delta,gamma,vega,theta")?;
                    for (t, s, q) in &rows {
                        writeln!(w, "{t},{s},{},{},{},{}", q.delta, q.gamma, q.vega, q.theta)?;
                    }
                    Ok(())
                })?,
                Format::Json => out.json("greeks.json", &lattice_json(&rows))?,
            }
            Ok(
                json!({ "model": g.model_name(), "rows": rows.len(), "max_theta_vega_gap": identity_gap }),
            )
        }
    }
}

impl GreeksConfig {
    fn model_name(&self) -> &'static str {
        match self.model {
            GreeksModel::BlackScholes => "black_scholes",
            GreeksModel::Packet => "packet",
        }
    }
}

fn lattice_json<G: Serialize>(rows: &[(f64, f64, G)]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|(t, s, g)| json!({ "t": t, "s": s, "greeks": g }))
        .collect();
    json!({ "rows": rows })
}

pub fn nls_eval(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let n = &cfg.nls;
    let grid = match cfg.grid {
        Some(g) => g,
        None => SpatialGrid::new(-20.0, 20.0, 401)?,
    };
    let p = NlsParams::new(n.sigma, n.wave_number, n.modulus, n.beta.clone())?
        .with_branch(n.branch)
        .with_radicand(n.radicand);
    let field = WaveField::try_from_fn(grid, n.t, |s| n.solution.eval(s, n.t, &p))?;
    write_field(out, "nls_field", &field)?;
    Ok(json!({ "solution": n.solution, "t": n.t, "norm": field.norm_sqr() }))
}

/// Basis from the configured waves, or from a published set.
fn packet_basis(cfg: &PacketConfig) -> Result<(PlaneWaveBasis<f64>, f64)> {
    if !cfg.waves.is_empty() {
        let Some(sigma) = cfg.sigma else {
            bail!("packet.sigma is required with explicit packet.waves");
        };
        return Ok((
            PlaneWaveBasis::new(sigma, cfg.waves.clone())?,
            cfg.t.unwrap_or(0.0),
        ));
    }
    let p = published_set(cfg.published);
    let waves =
        p.k.iter()
            .zip(p.c)
            .map(|(&k, &c)| PlaneWave { k, c })
            .collect();
    let basis = PlaneWaveBasis::fitted(cfg.sigma.unwrap_or(p.sigma_star), waves)?;
    Ok((basis, cfg.t.unwrap_or(p.t_star)))
}

fn published_set(set: PublishedSet) -> &'static PublishedPacketFit {
    match set {
        PublishedSet::PutN7 => &published::PUT_N7,
        PublishedSet::CallN3 => &published::CALL_N3,
    }
}

pub fn packet_eval(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let (basis, t) = packet_basis(&cfg.packet)?;
    let grid = cfg.grid.unwrap_or_else(default_grid);
    let field = WaveField::from_fn(grid, t, |s| wave_packet(s, t, &basis))?;
    write_field(out, "packet_field", &field)?;
    Ok(json!({ "waves": basis.len(), "sigma": basis.sigma(), "t": t }))
}

fn write_field(out: &mut Outputs, stem: &str, field: &WaveField<f64>) -> Result<()> {
    match out.format {
        Format::Csv => out.write(&format!("{stem}.csv"), |w| Ok(write_field_csv(field, w)?)),
        Format::Json => out.write(&format!("{stem}.json"), |w| Ok(write_field_json(field, w)?)),
    }
}

fn write_fit_curve(
    out: &mut Outputs,
    stem: &str,
    s: &[f64],
    target: &[f64],
    model: &[f64],
) -> Result<()> {
    match out.format {
        Format::Csv => out.write(&format!("{stem}.csv"), |w| {
            Ok(write_curves_csv(
                s,
                &[("target", target), ("model", model)],
                w,
            )?)
        }),
        Format::Json => out.json(
            &format!("{stem}.json"),
            &json!({ "s": s, "target": target, "model": model }),
        ),
    }
}

#[derive(Serialize)]
struct FitReport<'a> {
    model: FitModel,
    kind: OptionKind,
    option: OptionParams<f64>,
    theta0: &'a [f64],
    start_rmse: f64,
    fit: &'a FitResult<f64>,
    kink: Option<KinkReport>,
}

pub fn fit(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let f = &cfg.fit;
    if let Some(case) = f.case {
        let report = reproduce_paper_fit(case, &f.lm)?;
        out.json("fit_report.json", &report)?;
        write_fit_curve(out, "fit_curve", &report.s, &report.target, &report.model)?;
        return Ok(case_summary(&report));
    }

    let grid = cfg.grid.unwrap_or_else(default_grid);
    let target = Target::black_scholes(&grid, &cfg.option, f.kind)?;
    let (theta0, fit, start_rmse, model) = match f.model {
        FitModel::Packet => {
            let theta0 = match &f.theta0 {
                Some(t) => t.clone(),
                None => match f.kind {
                    OptionKind::Put => published::PUT_N7.theta(),
                    OptionKind::Call => published::CALL_N3.theta(),
                },
            };
            if theta0.len() < 4 || theta0.len() % 2 != 0 {
                bail!(
                    "packet theta0 must be [sigma, t, k_1..k_n, c_1..c_n], got {} values",
                    theta0.len()
                );
            }
            let n = (theta0.len() - 2) / 2;
            let start_rmse = rmse(&PacketObjective::new(&target, n, false)?.residuals(&theta0)?);
            let fit = fit_packet_to_bs(&target, n, &theta0, &f.lm)?;
            let model = packet_curve(&target.s, &fit.theta)?;
            (theta0, fit, start_rmse, model)
        }
        FitModel::NlsShock | FitModel::NlsBlend => {
            let model = if f.model == FitModel::NlsShock {
                NlsModel::Shock
            } else {
                NlsModel::Blend
            };
            let nls = NlsFitConfig {
                model,
                n_rows: f.n_rows,
                rate: f.rate,
                normalize: f.normalize,
            };
            let theta0 = match &f.theta0 {
                Some(t) => t.clone(),
                None => {
                    if f.n_rows != optwave::fitting::NLS_ROWS {
                        bail!("fit.theta0 is required when fit.n_rows differs from the default start list");
                    }
                    let mut t = nls_start_list(f.kind)[0].clone();
                    if model == NlsModel::Blend {
                        t.extend([1.0, 0.0]);
                    }
                    t
                }
            };
            let start_rmse = rmse(&NlsObjective::new(&target, nls)?.residuals(&theta0)?);
            let fit = fit_nls_to_bs(&target, nls, &theta0, &f.lm)?;
            let curve = nls.curve(&target.s, &fit.theta)?;
            (theta0, fit, start_rmse, curve)
        }
    };
    let kink = locate_kink(&target.s, &model, &target.values, cfg.option.strike);
    let report = FitReport {
        model: f.model,
        kind: f.kind,
        option: cfg.option,
        theta0: &theta0,
        start_rmse,
        fit: &fit,
        kink,
    };
    out.json("fit_report.json", &report)?;
    write_fit_curve(out, "fit_curve", &target.s, &target.values, &model)?;
    Ok(json!({
        "start_rmse": start_rmse,
        "rmse": fit.rmse,
        "iterations": fit.iterations,
        "termination": fit.termination,
    }))
}

fn case_summary(r: &optwave::fitting::ReproReport) -> Value {
    json!({
        "case": r.case,
        "start_rmse": r.start_rmse,
        "rmse": r.fit.rmse,
        "iterations": r.fit.iterations,
        "termination": r.fit.termination,
        "kink": r.kink,
    })
}

pub fn reproduce(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let mut summaries = Vec::new();
    for &case in &cfg.reproduce.cases {
        let report = reproduce_paper_fit(case, &cfg.reproduce.lm)
            .with_context(|| format!("case {case:?}"))?;
        let name = serde_json::to_value(case)?
            .as_str()
            .unwrap_or_default()
            .to_string();
        out.json(&format!("report_{name}.json"), &report)?;
        write_fit_curve(
            out,
            &format!("curve_{name}"),
            &report.s,
            &report.target,
            &report.model,
        )?;
        summaries.push(case_summary(&report));
    }
    Ok(json!({ "cases": summaries }))
}

pub fn evolve(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let e = &cfg.evolve;
    let mut summary = serde_json::Map::new();
    let (initial, equation, dt, t_final, record, boundary): (EvolutionState<f64>, _, _, _, _, _) =
        match e.preset {
            Preset::Gaussian => {
                let sigma = e.sigma.unwrap_or(0.5);
                let beta = e.beta.unwrap_or(0.0);
                let grid = cfg
                    .grid
                    .map_or_else(|| SpatialGrid::periodic(-64.0, 128.0, 1024), Ok)?;
                let spec = GaussianPacketSpec::new(1.0, 0.0, 1.0)?;
                let psi = WaveField::from_fn(grid, 0.0, |s| gaussian_packet(s, 0.0, &spec, sigma))?;
                let eq = EquationKind::Nls {
                    sigma,
                    beta: BetaProfile::Constant(beta),
                };
                (psi.into(), eq, 2e-3, 2.0, 50, BoundaryPolicy::RequireDecay)
            }
            Preset::Soliton => {
                let sigma = e.sigma.unwrap_or(1.0);
                let beta = e.beta.unwrap_or(1.0);
                let grid = cfg
                    .grid
                    .map_or_else(|| SpatialGrid::periodic(-64.0, 128.0, 1024), Ok)?;
                let p = NlsParams::new(sigma, 1.0, 1.0, BetaSource::Constant(beta))?;
                let psi = WaveField::try_from_fn(grid, 0.0, |s| psi_soliton(s, 0.0, &p))?;
                let eq = EquationKind::Nls {
                    sigma,
                    beta: BetaProfile::Constant(beta),
                };
                (psi.into(), eq, 1e-3, 1.0, 100, BoundaryPolicy::RequireDecay)
            }
            Preset::ManakovSoliton => {
                let beta = e.beta.unwrap_or(1.0);
                let grid = cfg
                    .grid
                    .map_or_else(|| SpatialGrid::periodic(-64.0, 128.0, 1024), Ok)?;
                let r = std::f64::consts::FRAC_1_SQRT_2;
                let spec = SolitonSpec::with_real_polarization(0.25, 0.5, r, r)?;
                let state = ManakovSystem::new(beta)?.state(grid, 0.0, &spec)?;
                (
                    state.into(),
                    EquationKind::Manakov {
                        beta: BetaProfile::Constant(beta),
                    },
                    1e-3,
                    1.0,
                    100,
                    BoundaryPolicy::RequireDecay,
                )
            }
            Preset::Collision => {
                let mut scenario = CollisionScenario::<f64>::standard();
                if let Some(beta) = e.beta {
                    scenario.beta = beta;
                }
                if let Some(g) = cfg.grid {
                    scenario.s_min = g.s_min();
                    scenario.period = g.period();
                    scenario.n_points = g.n_points();
                }
                let eq = EquationKind::Manakov {
                    beta: BetaProfile::Constant(scenario.beta),
                };
                let state = scenario.initial_state()?;
                (
                    state.into(),
                    eq,
                    scenario.dt,
                    scenario.t_final,
                    100,
                    BoundaryPolicy::Periodic,
                )
            }
        };
    let spec = EvolutionSpec::new(
        equation.clone(),
        e.dt.unwrap_or(dt),
        e.t_final.unwrap_or(t_final),
    )
    .record_every(e.record_every.unwrap_or(record))
    .boundary(boundary);
    let frames = split_step_evolve(initial.clone(), &spec)?;
    let conserved = conserved_quantities(&frames, &equation)?;
    let last = frames.last().expect("at least the initial frame");

    summary.insert("preset".into(), serde_json::to_value(e.preset)?);
    summary.insert("frames".into(), frames.len().into());
    summary.insert("final_time".into(), last.time().into());
    summary.insert(
        "max_norm_drift".into(),
        max_drift(&conserved, |r| r.norm_drift).into(),
    );
    summary.insert(
        "max_energy_drift".into(),
        max_drift(&conserved, |r| r.energy_drift).into(),
    );
    summary.insert(
        "final_equals_initial".into(),
        (last.state == initial).into(),
    );
    if let Some(err) = closed_form_error(cfg, e.preset, &last.state)? {
        summary.insert("closed_form_error".into(), err.into());
    }
    if e.preset == Preset::Collision {
        let peaks: Vec<usize> = frames
            .iter()
            .map(|f| count_separated_peaks(&f.state.density(), 0.5))
            .collect();
        let merged = peaks.iter().position(|&p| p == 1);
        let reemerged = peaks[0] == 2
            && merged.is_some_and(|i| peaks[i..].contains(&2))
            && peaks.last() == Some(&2);
        summary.insert("two_peak_reemergence".into(), reemerged.into());
        summary.insert("peaks".into(), serde_json::to_value(peaks)?);
    }
    summary.insert("conserved".into(), serde_json::to_value(&conserved)?);

    match out.format {
        Format::Csv => out.write("frames.csv", |w| write_frames_csv(&frames, w))?,
        Format::Json => out.json("frames.json", &frames_json(&frames))?,
    }
    Ok(Value::Object(summary))
}

/// Max deviation of the final state from the preset's closed form, when
/// one exists.
fn closed_form_error(
    cfg: &RunConfig,
    preset: Preset,
    state: &EvolutionState<f64>,
) -> Result<Option<f64>> {
    let e = &cfg.evolve;
    let t = state.time();
    let grid = *state.grid();
    let exact: EvolutionState<f64> = match preset {
        Preset::Gaussian if e.beta.unwrap_or(0.0) == 0.0 => {
            let spec = GaussianPacketSpec::new(1.0, 0.0, 1.0)?;
            WaveField::from_fn(grid, t, |s| {
                gaussian_packet(s, t, &spec, e.sigma.unwrap_or(0.5))
            })?
            .into()
        }
        Preset::Soliton => {
            let p = NlsParams::new(
                e.sigma.unwrap_or(1.0),
                1.0,
                1.0,
                BetaSource::Constant(e.beta.unwrap_or(1.0)),
            )?;
            WaveField::try_from_fn(grid, t, |s| psi_soliton(s, t, &p))?.into()
        }
        Preset::ManakovSoliton => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let spec = SolitonSpec::with_real_polarization(0.25, 0.5, r, r)?;
            ManakovSystem::new(e.beta.unwrap_or(1.0))?
                .state(grid, t, &spec)?
                .into()
        }
        _ => return Ok(None),
    };
    Ok(Some(state.max_abs_diff(&exact)))
}

fn write_frames_csv(frames: &[Frame<f64>], w: &mut dyn Write) -> Result<()> {
    let coupled = frames[0].state.as_coupled().is_some();
    if coupled {
        writeln!(w, "step,t,s,sigma_re,sigma_im,psi_re,psi_im")?;
    } else {
        writeln!(w, "step,t,s,re,im")?;
    }
    for f in frames {
        let t = f.time();
        let comps = f.state.components();
        for (i, s) in f.state.grid().nodes().iter().enumerate() {
            write!(w, "{},{t},{s}", f.step)?;
            for c in &comps {
                let v = c.values()[i];
                write!(w, ",{},{}", v.re, v.im)?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

fn frames_json(frames: &[Frame<f64>]) -> Value {
    let list: Vec<Value> = frames
        .iter()
        .map(|f| {
            let comps: Vec<Vec<[f64; 2]>> = f
                .state
                .components()
                .iter()
                .map(|c| c.values().iter().map(|v| [v.re, v.im]).collect())
                .collect();
            json!({ "step": f.step, "t": f.time(), "components": comps })
        })
        .collect();
    json!({ "grid": frames[0].state.grid(), "frames": list })
}
