use std::f64::consts::TAU;
use std::io::Write;
use std::path::Path;

use tubeint::ermakov::{build_driver, integrate_ermakov, lewis_drift, lewis_invariant, LogisticDriver};
use tubeint::invariant::{drift_experiment, exact_drift, tube_surface_samples, DriftReport};
use tubeint::perturb::{rho1, rho2, PerturbativeAlpha2};
use tubeint::resonance::{predicted_s1, predicted_secular_slope, project_values, secular_slope, third_harmonic_check};
use tubeint::{integrate_y, IntegrationConfig, RawParams, SystemParams};

use crate::config::Resolver;
use crate::output::{fmt_float, CsvWriter};
use crate::{
    plot, CliError, Command, DriftArgs, DriftMode, ErmakovArgs, FourierArgs, GplotArgs, OutputFlags, SimulateArgs,
    StepFlags, SystemFlags, TubeArgs,
};

pub fn dispatch(command: Command, mut r: Resolver) -> Result<(), CliError> {
    match command {
        Command::SimulateY(a) => simulate_y(a, &mut r),
        Command::InvariantDrift(a) => invariant_drift(a, &mut r),
        Command::Fourier(a) => fourier(a, &mut r),
        Command::Ermakov(a) => ermakov(a, &mut r),
        Command::Tube(a) => tube(a, &mut r),
        Command::Gplot(a) => gplot(a, &mut r),
    }
}

/// Rejects config entries none of the command's flags consumed.
fn finish(r: &mut Resolver) -> Result<(), CliError> {
    std::mem::take(r).finish()
}

fn system(r: &mut Resolver, f: &SystemFlags) -> Result<SystemParams, CliError> {
    let c1 = r.opt("c1", f.c1)?;
    let c2 = r.opt("c2", f.c2)?;
    let mut epsilon = r.opt("eps", f.eps)?;
    if epsilon.is_none() && c1.is_none() && c2.is_none() {
        epsilon = Some(0.1);
    }
    let raw = RawParams {
        omega: r.get("omega", f.omega, 1.0)?,
        c1,
        c2,
        epsilon,
        y0: r.get("y0", f.y0, 1.0)?,
        yp0: r.get("yp0", f.yp0, 0.0)?,
        ypp0: r.get("ypp0", f.ypp0, 0.0)?,
    };
    Ok(raw.validate()?)
}

fn step(r: &mut Resolver, f: &StepFlags, t_end: f64) -> Result<IntegrationConfig, CliError> {
    let config = IntegrationConfig {
        h: r.get("h", f.h, 1e-3)?,
        t_end,
        escape_z: r.get("escape-z", f.escape_z, 1e6)?,
        record_every: r.get("record-every", f.record_every, 100)?,
    };
    config.steps()?;
    Ok(config)
}

fn output(r: &mut Resolver, f: &OutputFlags) -> Result<OutputFlags, CliError> {
    let out = r.opt::<String>("out", f.out.as_ref().map(|p| p.display().to_string()))?;
    let plot = r.get("plot", if f.plot { Some(true) } else { None }, false)?;
    if plot && out.is_none() {
        return Err(CliError::Usage("--plot needs --out".into()));
    }
    Ok(OutputFlags {
        out: out.map(Into::into),
        plot,
    })
}

fn header(w: &mut CsvWriter<Vec<u8>>, command: &str) -> std::io::Result<()> {
    w.meta("tubeint", env!("CARGO_PKG_VERSION"))?;
    w.meta("command", command)
}

fn system_meta(w: &mut CsvWriter<Vec<u8>>, p: &SystemParams) -> std::io::Result<()> {
    for (k, v) in [
        ("omega", p.omega()),
        ("c1", p.c1()),
        ("c2", p.c2()),
        ("eps", p.epsilon()),
        ("y0", p.y0()),
        ("yp0", p.yp0()),
        ("ypp0", p.ypp0()),
    ] {
        w.meta(k, fmt_float(v))?;
    }
    Ok(())
}

fn step_meta(w: &mut CsvWriter<Vec<u8>>, c: &IntegrationConfig) -> std::io::Result<()> {
    w.meta("h", fmt_float(c.h))?;
    w.meta("t_end", fmt_float(c.t_end))?;
    w.meta("record_every", c.record_every)
}

fn drift_summary(w: &mut CsvWriter<Vec<u8>>, d: &DriftReport) -> std::io::Result<()> {
    w.meta(
        "summary",
        format!(
            "initial={} max_drift_pct={} final_drift_pct={} absolute={}",
            fmt_float(d.initial),
            fmt_float(d.max_drift_pct),
            fmt_float(d.final_drift_pct),
            d.absolute
        ),
    )
}

fn emit(out: &OutputFlags, bytes: Vec<u8>) -> Result<(), CliError> {
    match &out.out {
        None => {
            std::io::stdout().lock().write_all(&bytes)?;
        }
        Some(path) => {
            write_file(path, &bytes)?;
            if out.plot {
                let text = String::from_utf8_lossy(&bytes);
                let script = plot::script(&text, path)?;
                write_file(&path.with_extension("gp"), script.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn simulate_y(a: SimulateArgs, r: &mut Resolver) -> Result<(), CliError> {
    let p = system(r, &a.system)?;
    let tau_max = r.get("tau-max", a.tau_max, 500.0)?;
    let cfg = step(r, &a.step, tau_max)?;
    let out = output(r, &a.output)?;
    finish(r)?;

    let series = (1..=3u8)
        .map(|n| PerturbativeAlpha2::new(&p, n))
        .collect::<Result<Vec<_>, _>>()?;
    let traj = integrate_y(&p, &cfg)?;

    let mut w = CsvWriter::new(Vec::new());
    header(&mut w, "simulate-y")?;
    system_meta(&mut w, &p)?;
    step_meta(&mut w, &cfg)?;
    w.header(&[
        "tau",
        "y_numeric",
        "y_series_o1",
        "y_series_o2",
        "y_series_o3",
        "abs_err_o3",
        "rel_err_o3",
    ])?;
    for s in traj.samples() {
        let ys: Vec<f64> = series.iter().map(|a| a.y(s.tau)).collect();
        let err = (s.y - ys[2]).abs();
        w.row(&[s.tau, s.y, ys[0], ys[1], ys[2], err, err / s.y.abs()])?;
    }
    emit(&out, w.finish()?)
}

fn invariant_drift(a: DriftArgs, r: &mut Resolver) -> Result<(), CliError> {
    let p = system(r, &a.system)?;
    let mode = r.get("mode", a.mode, DriftMode::Perturbative)?;
    let z0 = r.get("z0", a.z0, 0.2)?;
    let p0 = r.get("p0", a.p0, 0.0)?;
    let t_end = r.get("t-end", a.t_end, 500.0)?;
    let order = r.get("order", a.order, 3)?;
    let cfg = step(r, &a.step, t_end)?;
    let out = output(r, &a.output)?;
    finish(r)?;

    let report = match mode {
        DriftMode::Perturbative => drift_experiment(&p, z0, p0, &cfg, order)?,
        DriftMode::Exact => exact_drift(&p, z0, p0, &cfg)?,
    };

    let mut w = CsvWriter::new(Vec::new());
    header(&mut w, "invariant-drift")?;
    w.meta(
        "mode",
        match mode {
            DriftMode::Exact => "exact",
            DriftMode::Perturbative => "perturbative",
        },
    )?;
    if mode == DriftMode::Perturbative {
        w.meta("order", order)?;
    }
    system_meta(&mut w, &p)?;
    w.meta("z0", fmt_float(z0))?;
    w.meta("p0", fmt_float(p0))?;
    step_meta(&mut w, &cfg)?;
    w.header(&["t", "I_value", "drift_pct"])?;
    for s in report.samples.samples() {
        w.row(&[s.t, s.value, s.drift_pct])?;
    }
    drift_summary(&mut w, &report)?;
    emit(&out, w.finish()?)
}

fn fourier(a: FourierArgs, r: &mut Resolver) -> Result<(), CliError> {
    let p = system(r, &a.system)?;
    let tau_max = r.get("tau-max", a.tau_max, 300.0)?;
    let n = r.get("harmonics", a.harmonics, 3)?;
    let ppw = r.get("points-per-window", a.points_per_window, 2000)?;
    let out = output(r, &a.output)?;
    finish(r)?;

    if p.c2() != 0.0 {
        return Err(tubeint::Error::UnsupportedForcing(p.c2()).into());
    }
    if !(1..=8).contains(&n) {
        return Err(CliError::Usage(format!("--harmonics must be 1 to 8, got {n}")));
    }
    let windows = (tau_max / TAU).floor() as usize;
    if windows == 0 {
        return Err(CliError::Usage(format!("--tau-max {tau_max} is shorter than one window")));
    }
    let cfg = IntegrationConfig::new(TAU / ppw as f64, windows as f64 * TAU);
    let traj = integrate_y(&p, &cfg)?;
    let fit = secular_slope(&traj, &p, 2, windows)?;
    let third = third_harmonic_check(&p, &traj)?;

    let (eps, y0) = (p.epsilon(), p.y0());
    let ys: Vec<f64> = traj.samples().iter().map(|s| s.y).collect();
    let secular: Vec<f64> = traj
        .samples()
        .iter()
        .map(|s| s.y - y0 - eps * y0 * rho1(s.tau, y0))
        .collect();
    let detrended: Vec<f64> = traj
        .samples()
        .iter()
        .map(|s| {
            let r1 = rho1(s.tau, y0);
            s.y - y0 * (1.0 + eps * r1 + eps * eps * (rho2(s.tau, y0) + 0.5 * r1 * r1))
        })
        .collect();

    let mut w = CsvWriter::new(Vec::new());
    header(&mut w, "fourier")?;
    system_meta(&mut w, &p)?;
    w.meta("h", fmt_float(cfg.h))?;
    w.meta("windows", windows)?;
    let mut names: Vec<String> = vec!["window".into(), "tau_center".into()];
    names.extend((0..=n).map(|k| format!("c{k}")));
    names.extend((1..=n).map(|k| format!("s{k}")));
    names.extend(["s2_secular".into(), "s3_detrended".into(), "s3_predicted".into()]);
    w.header(&names.iter().map(String::as_str).collect::<Vec<_>>())?;
    for k in 0..windows {
        let full = project_values(traj.t0(), traj.h(), &ys, k, n)?;
        let sec = project_values(traj.t0(), traj.h(), &secular, k, 2)?;
        let det = project_values(traj.t0(), traj.h(), &detrended, k, 3)?;
        let mut row = vec![k as f64, full.center()];
        row.extend(&full.c);
        row.extend(&full.s);
        row.extend([sec.sin(2), det.sin(3), third.predicted]);
        w.row(&row)?;
    }
    w.meta(
        "summary",
        format!(
            "s1_predicted={} secular_slope={} secular_predicted={} secular_r2={} s3_measured={} s3_predicted={}",
            fmt_float(predicted_s1(&p)),
            fmt_float(fit.slope),
            fmt_float(predicted_secular_slope(&p)),
            fmt_float(fit.r2),
            fmt_float(third.measured),
            fmt_float(third.predicted)
        ),
    )?;
    emit(&out, w.finish()?)
}

fn ermakov(a: ErmakovArgs, r: &mut Resolver) -> Result<(), CliError> {
    let d = LogisticDriver::default();
    let driver = LogisticDriver {
        l0: r.get("l0", a.l0, d.l0)?,
        ts: r.get("ts", a.ts, d.ts)?,
        f0: r.get("f0", a.f0, d.f0)?,
        df: r.get("df", a.df, d.df)?,
    };
    let z0 = r.get("z0", a.z0, 0.2)?;
    let p0 = r.get("p0", a.p0, 0.0)?;
    let w0 = r.opt("w0", a.w0)?;
    let dw0 = r.get("dw0", a.dw0, 0.0)?;
    let t_end = r.get("t-end", a.t_end, 200.0)?;
    let cfg = step(r, &a.step, t_end)?;
    let out = output(r, &a.output)?;
    finish(r)?;

    let f = build_driver(&driver, t_end)?;
    let w0 = w0.unwrap_or_else(|| f.eval(0.0).powf(-0.25));
    let traj = integrate_ermakov(|t| f.eval(t), z0, p0, w0, dw0, &cfg)?;
    let report = lewis_drift(&traj)?;

    let mut w = CsvWriter::new(Vec::new());
    header(&mut w, "ermakov")?;
    for (k, v) in [
        ("l0", driver.l0),
        ("ts", driver.ts),
        ("f0", driver.f0),
        ("df", driver.df),
        ("z0", z0),
        ("p0", p0),
        ("w0", w0),
        ("dw0", dw0),
    ] {
        w.meta(k, fmt_float(v))?;
    }
    step_meta(&mut w, &cfg)?;
    w.header(&["t", "f", "z", "p", "w", "I", "drift_pct"])?;
    for (s, d) in traj.samples().iter().zip(report.samples.samples()) {
        let i = lewis_invariant(s.z, s.p, s.w, s.dw)?;
        w.row(&[s.t, f.eval(s.t), s.z, s.p, s.w, i, d.drift_pct])?;
    }
    drift_summary(&mut w, &report)?;
    emit(&out, w.finish()?)
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad grid value `{v}`: {e}")))
        })
        .collect()
}

fn tube(a: TubeArgs, r: &mut Resolver) -> Result<(), CliError> {
    let p = system(r, &a.system)?;
    let z_grid = parse_grid(&r.get("z0-grid", a.z0_grid, "0.1,0.2,0.3".into())?)?;
    let p_grid = parse_grid(&r.get("p0-grid", a.p0_grid, "0".into())?)?;
    let t_end = r.get("t-end", a.t_end, 50.0)?;
    let cfg = step(r, &a.step, t_end)?;
    let out = output(r, &a.output)?;
    finish(r)?;

    let tubes = tube_surface_samples(&p, &z_grid, &p_grid, &cfg)?;
    let mut w = CsvWriter::new(Vec::new());
    header(&mut w, "tube")?;
    system_meta(&mut w, &p)?;
    step_meta(&mut w, &cfg)?;
    w.header(&["filament", "z0", "p0", "K", "t", "z", "p"])?;
    for (i, f) in tubes.iter().enumerate() {
        for q in &f.points {
            w.row(&[i as f64, f.z0, f.p0, f.k, q.t, q.z, q.p])?;
        }
    }
    for (i, f) in tubes.iter().enumerate() {
        w.meta(
            "summary",
            format!("filament={i} K={} max_drift_pct={}", fmt_float(f.k), fmt_float(f.max_drift_pct)),
        )?;
    }
    emit(&out, w.finish()?)
}

fn gplot(a: GplotArgs, r: &mut Resolver) -> Result<(), CliError> {
    let input = r.opt::<String>("input", a.input.map(|p| p.display().to_string()))?;
    let out = r.opt::<String>("out", a.out.map(|p| p.display().to_string()))?;
    finish(r)?;
    let input = input.ok_or_else(|| CliError::MissingInput("--input is required".into()))?;
    let path = Path::new(&input);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::MissingInput(format!("{input}: {e}")))?;
    let script = plot::script(&text, path)?;
    match out {
        None => std::io::stdout().lock().write_all(script.as_bytes())?,
        Some(o) => write_file(Path::new(&o), script.as_bytes())?,
    }
    Ok(())
}
