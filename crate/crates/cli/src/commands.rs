use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bjj_core::export::num;
use bjj_core::semiclassics::z_difference;
use bjj_core::{
    assisted_tunneling, build_hamiltonian, classify_regime, ground_state, integrate,
    locate_crossover, phase_diagram, self_consistent_alpha, small_oscillation_frequency,
    steady_photon_amplitude, sweep_indicators, write_records_csv, Error, IndicatorRecord,
    ModelKind, OutputGrid, PhaseAxis, PhotonState, RegimeReport, SemiclassicalState,
    SystemParams, Trajectory,
};
use serde::Serialize;

use crate::config::{
    Command, DynamicsOptions, FrequencyOptions, GroundStateMode, GroundStateOptions, ModelChoice,
    PhaseDiagramOptions, RunConfig, SecondAxis, SweepOptions,
};
use crate::CliError;

pub fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    match &cfg.command {
        Command::Dynamics(o) => dynamics(&cfg.params, o, out),
        Command::PhaseDiagram(o) => phase(&cfg.params, o, out),
        Command::GroundState(o) => ground_states(&cfg.params, o, out),
        Command::Sweep(o) => sweep(cfg, o, out),
        Command::Frequency(o) => frequency(&cfg.params, o, out),
    }
}

fn write_file(
    path: PathBuf,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let wrap = |source| CliError::Output {
        path: path.clone(),
        source,
    };
    let mut w = BufWriter::new(File::create(&path).map_err(wrap)?);
    body(&mut w).map_err(wrap)?;
    w.flush().map_err(wrap)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<(), CliError> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

#[derive(Serialize)]
struct ModelReport {
    #[serde(flatten)]
    regime: RegimeReport,
    photon_number: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_drift: Option<f64>,
    accepted_steps: usize,
    rejected_steps: usize,
}

#[derive(Serialize)]
struct DynamicsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    reduced: Option<ModelReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    full: Option<ModelReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_abs_dz: Option<f64>,
}

fn dynamics(p: &SystemParams, o: &DynamicsOptions, out: &Path) -> Result<(), CliError> {
    let steady = || -> Result<PhotonState, CliError> {
        if p.eta == 0.0 {
            Ok(PhotonState::new(0.0, 0.0))
        } else {
            Ok(steady_photon_amplitude(p, o.z0, o.theta0, o.photon_mode)?)
        }
    };
    let grid = OutputGrid::Uniform { dt: o.dt };
    let tol = o.tolerances();

    let reduced = if matches!(o.model_kind, ModelChoice::Reduced | ModelChoice::Both) {
        let photon_number = match o.photon_number {
            Some(n) => n,
            None => steady()?.number(),
        };
        log::info!("reduced model at photon number {photon_number}");
        let traj = integrate(
            &SemiclassicalState::atoms(o.z0, o.theta0),
            p,
            ModelKind::Reduced { photon_number },
            o.t_end,
            &grid,
            tol,
        )?;
        write_file(out.join("trajectory_reduced.csv"), |w| traj.write_csv(w))?;
        Some(traj)
    } else {
        None
    };

    let full = if matches!(o.model_kind, ModelChoice::Full | ModelChoice::Both) {
        let photons = match (o.xi0, o.phi0) {
            (Some(xi), Some(phi)) => PhotonState::new(xi, phi),
            (xi, phi) => {
                let s = steady()?;
                PhotonState::new(xi.unwrap_or(s.xi), phi.unwrap_or(s.phi))
            }
        };
        let traj = integrate(
            &SemiclassicalState::with_photons(o.z0, o.theta0, photons),
            p,
            ModelKind::Full,
            o.t_end,
            &grid,
            tol,
        )?;
        write_file(out.join("trajectory_full.csv"), |w| traj.write_csv(w))?;
        Some(traj)
    } else {
        None
    };

    let max_abs_dz = match (&reduced, &full) {
        (Some(a), Some(b)) => {
            let diff = z_difference(b, a)?;
            write_file(out.join("z_difference.csv"), |w| {
                writeln!(w, "t,abs_dz")?;
                for (t, d) in &diff {
                    writeln!(w, "{},{}", num(*t), num(*d))?;
                }
                Ok(())
            })?;
            Some(diff.iter().fold(0.0f64, |m, (_, d)| m.max(*d)))
        }
        _ => None,
    };

    let summarize = |t: &Trajectory| -> Result<ModelReport, CliError> {
        Ok(ModelReport {
            regime: classify_regime(t)?,
            photon_number: t.initial_photon_number(),
            energy_drift: t.energy_drift,
            accepted_steps: t.stats.accepted_steps,
            rejected_steps: t.stats.rejected_steps,
        })
    };
    let report = DynamicsReport {
        reduced: reduced.as_ref().map(summarize).transpose()?,
        full: full.as_ref().map(summarize).transpose()?,
        max_abs_dz,
    };
    write_json(out.join("regime_report.json"), &report)
}

#[derive(Serialize)]
struct PhaseSummary {
    trapped_fraction: f64,
    trapped_points: usize,
    grid_points: usize,
    photon_number: f64,
    jtilde: f64,
}

fn phase(p: &SystemParams, o: &PhaseDiagramOptions, out: &Path) -> Result<(), CliError> {
    let axis = match &o.axis2 {
        SecondAxis::U(g) => PhaseAxis::U(g.values()),
        SecondAxis::Theta(g) => PhaseAxis::Theta(g.values()),
    };
    let d = phase_diagram(p, o.photon_number, &o.z0.values(), axis, o.fixed)?;
    write_file(out.join("phase_diagram.csv"), |w| d.write_csv(w))?;
    let summary = PhaseSummary {
        trapped_fraction: d.trapped_fraction(),
        trapped_points: d.trapped.iter().filter(|t| **t).count(),
        grid_points: d.trapped.len(),
        photon_number: o.photon_number,
        jtilde: assisted_tunneling(p, o.photon_number),
    };
    write_json(out.join("summary.json"), &summary)
}

#[derive(Serialize)]
struct GroundStateSidecar {
    #[serde(flatten)]
    metadata: bjj_core::spectra::GroundStateMetadata,
    mode: GroundStateMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_photon_number: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
}

fn ground_states(p: &SystemParams, o: &GroundStateOptions, out: &Path) -> Result<(), CliError> {
    for (i, u) in o.u.values().into_iter().enumerate() {
        let pu = p.with_u(u);
        for (j, &n_ph) in o.photon_numbers.iter().enumerate() {
            let (gs, sidecar_extra) = match o.mode {
                GroundStateMode::Fixed => (ground_state(&build_hamiltonian(&pu, n_ph))?, None),
                GroundStateMode::SelfConsistent => {
                    let sc = self_consistent_alpha(&pu, n_ph)?;
                    (sc.ground_state, Some(sc.iterations))
                }
            };
            let stem = format!("ground_state_{i}_{j}");
            write_file(out.join(format!("{stem}.csv")), |w| gs.write_csv(w))?;
            let sidecar = GroundStateSidecar {
                metadata: gs.metadata(),
                mode: o.mode,
                initial_photon_number: sidecar_extra.map(|_| n_ph),
                iterations: sidecar_extra,
            };
            write_json(out.join(format!("{stem}.json")), &sidecar)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CrossoverEntry {
    label: String,
    photon_number: f64,
    jtilde: f64,
    #[serde(rename = "U_star", skip_serializing_if = "Option::is_none")]
    u_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct CrossoverReport {
    configurations: Vec<CrossoverEntry>,
    /// Labels with a located crossover, by increasing `|U_star|`.
    ordering: Vec<String>,
}

#[derive(Serialize)]
struct Failure {
    label: String,
    #[serde(rename = "U")]
    u: Option<f64>,
    error: String,
}

fn sweep(cfg: &RunConfig, o: &SweepOptions, out: &Path) -> Result<(), CliError> {
    let grid = o.u.values();
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    let mut analysis_error = None;

    for c in &o.configurations {
        let p = cfg.sweep_params(c);
        let jtilde = assisted_tunneling(&p, c.photon_number);
        let records = match sweep_indicators(&p, c.photon_number, &grid) {
            Ok(r) => r,
            Err(e) => {
                // keep every point that did solve
                let mut partial: Vec<IndicatorRecord> = Vec::new();
                for &u in &grid {
                    match sweep_indicators(&p, c.photon_number, &[u]) {
                        Ok(mut r) => partial.append(&mut r),
                        Err(err) => failures.push(Failure {
                            label: c.label.clone(),
                            u: matches!(err, Error::AtInteraction { .. }).then_some(u),
                            error: err.to_string(),
                        }),
                    }
                }
                log::warn!("sweep {} failed: {e}", c.label);
                write_file(out.join(format!("sweep_{}.csv", c.label)), |w| {
                    write_records_csv(&partial, w)
                })?;
                entries.push(CrossoverEntry {
                    label: c.label.clone(),
                    photon_number: c.photon_number,
                    jtilde,
                    u_star: None,
                    error: Some(e.to_string()),
                });
                continue;
            }
        };
        write_file(out.join(format!("sweep_{}.csv", c.label)), |w| {
            write_records_csv(&records, w)
        })?;
        let (u_star, error) = match locate_crossover(&records) {
            Ok(u) => (Some(u), None),
            Err(e) => {
                let msg = e.to_string();
                analysis_error.get_or_insert(e);
                (None, Some(msg))
            }
        };
        entries.push(CrossoverEntry {
            label: c.label.clone(),
            photon_number: c.photon_number,
            jtilde,
            u_star,
            error,
        });
    }

    let mut located: Vec<(&str, f64)> = entries
        .iter()
        .filter_map(|e| e.u_star.map(|u| (e.label.as_str(), u.abs())))
        .collect();
    located.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(b.0)));
    let report = CrossoverReport {
        ordering: located.iter().map(|(l, _)| l.to_string()).collect(),
        configurations: entries,
    };
    write_json(out.join("crossover.json"), &report)?;

    if !failures.is_empty() {
        let manifest = out.join("failures.json");
        let by_label: BTreeMap<&str, Vec<&Failure>> =
            failures.iter().fold(BTreeMap::new(), |mut m, f| {
                m.entry(f.label.as_str()).or_default().push(f);
                m
            });
        write_json(manifest.clone(), &by_label)?;
        return Err(CliError::PartialSweep {
            failed: failures.len(),
            total: grid.len() * o.configurations.len(),
            manifest,
        });
    }
    match analysis_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn frequency(p: &SystemParams, o: &FrequencyOptions, out: &Path) -> Result<(), CliError> {
    let rows: Vec<(f64, Option<f64>)> = o
        .xi_sq
        .values()
        .into_iter()
        .map(|x| match small_oscillation_frequency(p, x) {
            Ok(w) => Ok((x, Some(w))),
            Err(Error::NoSmallOscillations { .. }) => Ok((x, None)),
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;
    write_file(out.join("frequency.csv"), |w| {
        writeln!(w, "xi_sq,omega,in_window")?;
        for (x, omega) in &rows {
            match omega {
                Some(v) => writeln!(w, "{},{},true", num(*x), num(*v))?,
                None => writeln!(w, "{},,false", num(*x))?,
            }
        }
        Ok(())
    })?;
    if rows.iter().all(|(_, w)| w.is_none()) {
        return Err(CliError::config(
            "xi_sq",
            "no grid point lies inside the small-oscillation window",
        ));
    }
    Ok(())
}
