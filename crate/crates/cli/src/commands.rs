//! One function per command. Each reads its typed configuration, writes its
//! files through [`Run`] and fills in the manifest results.

use std::path::PathBuf;

use exterior_wave_core::family_construct::{
    construct_alpha, construct_primary, AlphaConfig, BaseSolution, IterationControl, PrimaryConfig, DEFAULT_MAX_ITER,
    DEFAULT_SMALLNESS,
};
use exterior_wave_core::field_core::{
    conserved_energy, conserved_energy_w_form, exterior_energy_sq, RadialGrid, RadialState, Trajectory,
};
use exterior_wave_core::io::{self, fmt_f64, write_table, BranchSummary};
use exterior_wave_core::linear_radiation::{
    data_energy_sq, data_from_profile_on, linear_evolve, natural_grid, profile_energy, profile_from_data,
    RadiationProfile,
};
use exterior_wave_core::nonlinear_evolve::{evolve_exterior_with, evolve_with, EvolveOptions, InteriorFill, DEFAULT_CFL};
use exterior_wave_core::nonlinearity::PowerWeight;
use exterior_wave_core::nonradiative_ode::{
    nonradiative_branch, static_evolution_check, BranchConfig, InwardConfig, StaticCheckConfig, TailConfig,
};
use exterior_wave_core::scatter_analysis::{
    characteristic_number, companion_linear_data_profile, extract_profile_with, scattering_verdict, ProbeConfig,
    ProfileDirection, ScatterConfig,
};
use exterior_wave_core::spacetime_norms::{dyadic_channel_norms, source_l1l2_norm, y_norm, RegionSpec};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{default_bumps, nonlinearity, one_or_many, profile_source, Bump, CliError, CliResult};
use crate::run::Run;

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn grid_meta(grid: &RadialGrid) -> serde_json::Value {
    json!({"n": grid.n(), "r_min": grid.r_min(), "r_max": grid.r_max(), "h": grid.h()})
}

fn traj_meta(traj: &Trajectory) -> serde_json::Value {
    let step = traj.scheme.as_ref().map(|s| s.step);
    json!({
        "grid": grid_meta(&traj.grid()),
        "dt": step,
        "frame_dt": traj.dt,
        "frames": traj.states.len(),
        "t_start": traj.first().t,
        "t_end": traj.last().t,
        "cone_origin": traj.cone_origin,
    })
}

fn load_traj(path: &std::path::Path) -> CliResult<Trajectory> {
    io::load_trajectory(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn load_state(path: &std::path::Path) -> CliResult<RadialState> {
    io::load_state(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn positive(name: &str, x: f64) -> CliResult<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("`{name}` must be positive and finite, got {x}")))
    }
}

/// Initial data on `grid`: a state file (resampled) or the data of a profile.
fn initial_data(
    state_csv: Option<&PathBuf>,
    profile_csv: Option<&PathBuf>,
    bumps: &[Bump],
    extent: f64,
    n: usize,
    grid: &RadialGrid,
) -> CliResult<(RadialState, Option<RadiationProfile>)> {
    if state_csv.is_some() && profile_csv.is_some() {
        return Err(CliError::Config("give at most one of `state_csv` and `profile_csv`".into()));
    }
    if let Some(p) = state_csv {
        let s = load_state(p)?;
        return Ok((s.resampled(*grid), None));
    }
    let g = profile_source(profile_csv.map(|p| p.as_path()), bumps, extent, n)?;
    Ok((data_from_profile_on(&g, grid), Some(g)))
}

// evolve

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub out_dir: PathBuf,
    #[serde(rename = "F")]
    pub f: String,
    pub weight: Option<PowerWeight>,
    pub state_csv: Option<PathBuf>,
    pub profile_csv: Option<PathBuf>,
    pub bumps: Vec<Bump>,
    pub profile_extent: f64,
    pub profile_n: usize,
    pub r_max: f64,
    pub n: usize,
    pub duration: f64,
    /// Defaults to `cfl·h`.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub save_every: usize,
    /// Exterior run on `r > |t| + R` when set.
    pub exterior_radius: Option<f64>,
    pub fill: InteriorFill,
    pub expect_blowup: bool,
    pub write_frames: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            out_dir: default_out(),
            f: "zero".into(),
            weight: None,
            state_csv: None,
            profile_csv: None,
            bumps: default_bumps(),
            profile_extent: 8.0,
            profile_n: 3201,
            r_max: 40.0,
            n: 4001,
            duration: 10.0,
            dt: None,
            cfl: DEFAULT_CFL,
            save_every: 10,
            exterior_radius: None,
            fill: InteriorFill::Clamp,
            expect_blowup: false,
            write_frames: true,
        }
    }
}

pub fn evolve(cfg: &EvolveConfig, run: &mut Run) -> CliResult<()> {
    let f = nonlinearity(&cfg.f, cfg.weight)?;
    let grid = RadialGrid::new(0.0, cfg.r_max, cfg.n)?;
    let (data, profile) = initial_data(
        cfg.state_csv.as_ref(),
        cfg.profile_csv.as_ref(),
        &cfg.bumps,
        cfg.profile_extent,
        cfg.profile_n,
        &grid,
    )?;
    let dt = cfg.dt.unwrap_or(cfg.cfl * grid.h());
    let opts = EvolveOptions {
        cfl: cfg.cfl,
        save_every: cfg.save_every,
        ..EvolveOptions::default()
    };
    let traj = match cfg.exterior_radius {
        Some(radius) => evolve_exterior_with(&data, &f, radius, cfg.duration, dt, cfg.fill, &opts)?,
        None => evolve_with(&data, &f, cfg.duration, dt, &opts)?,
    };
    let meta = traj_meta(&traj);
    if cfg.write_frames {
        io::save_trajectory(&run.out, "trajectory", &traj)?;
        run.record("trajectory.json", "trajectory checkpoint manifest; frames in trajectory_NNNNN.csv", meta.clone());
    }

    // energies: conserved functional (whole space only) and exterior norm
    let whole = cfg.exterior_radius.is_none() && f.has_potential();
    let radius = cfg.exterior_radius.unwrap_or(0.0);
    let mut rows = Vec::new();
    let mut e0 = None;
    let mut drift: f64 = 0.0;
    for s in &traj.states {
        let from = (s.t.abs() + radius).min(grid.r_max());
        let ext = exterior_energy_sq(s, from)?;
        let (e, ew) = if whole {
            (Some(conserved_energy(s, &f)?), Some(conserved_energy_w_form(s, &f)?))
        } else {
            (None, None)
        };
        if let Some(e) = e {
            let first = *e0.get_or_insert(e);
            drift = drift.max((e - first).abs() / first.abs().max(f64::MIN_POSITIVE));
        }
        rows.push(vec![fmt_f64(s.t), e.map(fmt_f64).unwrap_or_default(), ew.map(fmt_f64).unwrap_or_default(), fmt_f64(ext)]);
    }
    run.emit("energy.csv", "conserved energy (two quadratures) and exterior Ḣ¹×L² norm squared", meta.clone(), |w| {
        write_table(w, "energy", &[("n", rows.len().to_string())], &["t", "energy", "energy_w_form", "exterior_norm_sq"], rows)
    })?;
    if whole {
        run.result("energy_relative_drift", drift);
    }

    // closed-form comparison for free waves synthesised from a profile
    if let (true, Some(g), None) = (f.is_zero(), &profile, cfg.exterior_radius) {
        let mut rows = Vec::new();
        let mut worst: f64 = 0.0;
        for s in &traj.states {
            let exact = linear_evolve(g, s.t, &grid);
            let err = s.u.iter().zip(&exact.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = exact.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            worst = worst.max(err);
            rows.push(vec![fmt_f64(s.t), fmt_f64(err), fmt_f64(if scale > 0.0 { err / scale } else { err })]);
        }
        run.emit("comparison.csv", "sup-norm error against the closed-form propagator", meta.clone(), |w| {
            write_table(w, "comparison", &[("n", rows.len().to_string())], &["t", "max_abs_error", "relative_error"], rows)
        })?;
        run.result("max_abs_error_vs_closed_form", worst);
    }
    run.result("termination", traj.termination);
    run.result("resolution", meta);
    if let Some(b) = traj.blowup() {
        if !cfg.expect_blowup {
            return Err(CliError::Numerical(format!(
                "blow-up in the authoritative region at t = {}, r = {}",
                b.time, b.radius
            )));
        }
    }
    Ok(())
}

// profile extract / synthesize

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractConfig {
    pub out_dir: PathBuf,
    /// Trajectory manifest: nonlinear extraction from late-time probes.
    pub trajectory: Option<PathBuf>,
    /// State file: linear inversion of the data.
    pub state_csv: Option<PathBuf>,
    pub direction: ProfileDirection,
    pub restrict: Option<f64>,
    pub probes: usize,
    pub tolerance: f64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        let p = ProbeConfig::default();
        ExtractConfig {
            out_dir: default_out(),
            trajectory: None,
            state_csv: None,
            direction: ProfileDirection::Plus,
            restrict: None,
            probes: p.probes,
            tolerance: p.tolerance,
        }
    }
}

pub fn profile_extract(cfg: &ExtractConfig, run: &mut Run) -> CliResult<()> {
    match (&cfg.trajectory, &cfg.state_csv) {
        (Some(t), None) => {
            let traj = load_traj(t)?;
            let probe = ProbeConfig {
                probes: cfg.probes,
                tolerance: cfg.tolerance,
            };
            let est = extract_profile_with(&traj, cfg.direction, cfg.restrict, &probe)?;
            let meta = json!({"trajectory": traj_meta(&traj), "probe_times": est.probe_times});
            run.emit("profile.csv", "extracted radiation profile", meta, |w| io::write_profile(w, &est.g))?;
            run.result("probe_times", &est.probe_times);
            run.result("discrepancies", &est.discrepancies);
            run.result("changes", &est.changes);
            run.result("converged", est.converged);
        }
        (None, Some(s)) => {
            let state = load_state(s)?;
            let g = profile_from_data(&state)?;
            let meta = grid_meta(&state.grid);
            run.emit("profile.csv", "radiation profile of the data", meta, |w| io::write_profile(w, &g))?;
            run.result("profile_energy", profile_energy(&g));
            run.result("data_energy", data_energy_sq(&state));
        }
        _ => return Err(CliError::Config("give exactly one of `trajectory` and `state_csv`".into())),
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesizeConfig {
    pub out_dir: PathBuf,
    pub profile_csv: Option<PathBuf>,
    pub bumps: Vec<Bump>,
    pub profile_extent: f64,
    pub profile_n: usize,
    /// Grid defaults to `[0, reach]` at the profile spacing.
    pub r_max: Option<f64>,
    pub n: Option<usize>,
    pub time: f64,
}

impl Default for SynthesizeConfig {
    fn default() -> Self {
        SynthesizeConfig {
            out_dir: default_out(),
            profile_csv: None,
            bumps: default_bumps(),
            profile_extent: 8.0,
            profile_n: 3201,
            r_max: None,
            n: None,
            time: 0.0,
        }
    }
}

pub fn profile_synthesize(cfg: &SynthesizeConfig, run: &mut Run) -> CliResult<()> {
    let g = profile_source(cfg.profile_csv.as_deref(), &cfg.bumps, cfg.profile_extent, cfg.profile_n)?;
    let grid = match (cfg.r_max, cfg.n) {
        (None, None) => natural_grid(&g),
        (Some(r), Some(n)) => RadialGrid::new(0.0, r, n)?,
        _ => return Err(CliError::Config("give both `r_max` and `n`, or neither".into())),
    };
    let state = linear_evolve(&g, cfg.time, &grid);
    let meta = json!({"grid": grid_meta(&grid), "profile_n": g.len(), "time": cfg.time});
    run.emit("state.csv", "free wave with the given profile", meta, |w| io::write_state(w, &state))?;
    let e = profile_energy(&g);
    let d = data_energy_sq(&state);
    run.result("profile_energy", e);
    run.result("data_energy", d);
    run.result("isometry_relative_gap", if e > 0.0 { (e - d).abs() / e } else { d });
    Ok(())
}

// norms

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    pub out_dir: PathBuf,
    pub trajectory: Option<PathBuf>,
    pub regions: Vec<RegionSpec>,
    /// Source norms `‖χF(u)‖_{L¹L²}` are added when set.
    #[serde(rename = "F")]
    pub f: Option<String>,
    pub weight: Option<PowerWeight>,
    pub k_min: Option<i32>,
    pub k_max: Option<i32>,
}

impl Default for NormsConfig {
    fn default() -> Self {
        NormsConfig {
            out_dir: default_out(),
            trajectory: None,
            regions: vec![RegionSpec::Full],
            f: None,
            weight: None,
            k_min: None,
            k_max: None,
        }
    }
}

fn region_label(region: &RegionSpec) -> String {
    match *region {
        RegionSpec::Full => "full".into(),
        RegionSpec::Exterior { radius } => format!("exterior(radius={radius})"),
        RegionSpec::Annulus { inner, outer } => format!("annulus(inner={inner} outer={outer})"),
        RegionSpec::Channel { radius } => format!("channel(radius={radius})"),
    }
}

pub fn norms(cfg: &NormsConfig, run: &mut Run) -> CliResult<()> {
    let path = cfg
        .trajectory
        .as_ref()
        .ok_or_else(|| CliError::Config("`trajectory` is required".into()))?;
    let traj = load_traj(path)?;
    let f = cfg.f.as_deref().map(|name| nonlinearity(name, cfg.weight)).transpose()?;
    let meta = traj_meta(&traj);
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for region in &cfg.regions {
        let y = y_norm(&traj, *region)?;
        let src = f.as_ref().map(|f| source_l1l2_norm(&traj, f, *region)).transpose()?;
        let label = region_label(region);
        rows.push(vec![label, fmt_f64(y), src.map(fmt_f64).unwrap_or_default()]);
        values.push(json!({"region": region, "y_norm": y, "source_l1l2": src}));
    }
    run.emit("norms.csv", "Y = L⁵L¹⁰ norms and source norms per region", meta.clone(), |w| {
        write_table(w, "norms", &[("n", rows.len().to_string())], &["region", "y_norm", "source_l1l2"], rows)
    })?;
    run.result("norms", values);
    match (cfg.k_min, cfg.k_max) {
        (Some(a), Some(b)) => {
            let c = dyadic_channel_norms(&traj, a, b)?;
            run.emit("channels.csv", "dyadic channel norms b_k", meta, |w| io::write_channels(w, &c))?;
            run.result("channel_sum_sq", c.sum_sq);
        }
        (None, None) => {}
        _ => return Err(CliError::Config("give both `k_min` and `k_max`, or neither".into())),
    }
    Ok(())
}

// nonradiative

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonradiativeConfig {
    pub out_dir: PathBuf,
    #[serde(rename = "F")]
    pub f: String,
    pub weight: Option<PowerWeight>,
    #[serde(deserialize_with = "one_or_many")]
    pub alpha: Vec<f64>,
    pub r_start: Option<f64>,
    pub tail_tol: f64,
    pub far_factor: f64,
    pub tail_nodes: usize,
    pub rtol: f64,
    pub cap: f64,
    pub r_end: f64,
    /// Radii per branch in the tail-law table.
    pub tail_samples: usize,
    pub static_check: bool,
}

impl Default for NonradiativeConfig {
    fn default() -> Self {
        let b = BranchConfig::default();
        NonradiativeConfig {
            out_dir: default_out(),
            f: "defocusing_quintic".into(),
            weight: None,
            alpha: vec![1.0],
            r_start: None,
            tail_tol: b.tail_tol,
            far_factor: b.tail.far_factor,
            tail_nodes: b.tail.nodes,
            rtol: b.inward.rtol,
            cap: b.inward.cap,
            r_end: b.inward.r_end,
            tail_samples: 25,
            static_check: false,
        }
    }
}

pub fn nonradiative(cfg: &NonradiativeConfig, run: &mut Run) -> CliResult<()> {
    let f = nonlinearity(&cfg.f, cfg.weight)?;
    if cfg.alpha.is_empty() {
        return Err(CliError::Config("`alpha` list is empty".into()));
    }
    let bc = BranchConfig {
        r_start: cfg.r_start,
        tail_tol: cfg.tail_tol,
        tail: TailConfig {
            far_factor: cfg.far_factor,
            nodes: cfg.tail_nodes,
            ..TailConfig::default()
        },
        inward: InwardConfig {
            rtol: cfg.rtol,
            cap: cfg.cap,
            r_end: cfg.r_end,
            ..InwardConfig::default()
        },
    };
    let gamma = f.gamma();
    let mut table = Vec::new();
    let mut summaries = Vec::new();
    for (i, &alpha) in cfg.alpha.iter().enumerate() {
        let b = nonradiative_branch(&f, alpha, &bc)?;
        let meta = json!({"samples": b.r.len(), "r_start": b.r_start, "r_far": b.r_far, "rtol": cfg.rtol, "tail_nodes": cfg.tail_nodes});
        run.emit(&format!("branch_{i:02}.csv"), &format!("branch samples for alpha = {alpha}"), meta.clone(), |w| {
            io::write_branch(w, &b)
        })?;
        let summary = BranchSummary::from(&b);
        run.emit_json(&format!("branch_{i:02}.json"), &format!("branch summary for alpha = {alpha}"), meta, &summary)?;
        // tail law on R ≥ 4(1 + √γ)α², inside the trust region
        let lo = (4.0 * (1.0 + gamma.sqrt()) * alpha * alpha).max(b.trust_radius).max(b.r_alpha);
        if alpha != 0.0 && lo < b.r_far {
            let m = cfg.tail_samples.max(2);
            for k in 0..m {
                let r = lo * (b.r_far / lo).powf(k as f64 / (m - 1) as f64);
                let e = b.tail_energy(r)?;
                table.push(vec![fmt_f64(alpha), fmt_f64(r), fmt_f64(e), fmt_f64(e * r.sqrt() / alpha.abs())]);
            }
        }
        let mut s = serde_json::to_value(&summary).unwrap_or_default();
        if cfg.static_check {
            let rep = static_evolution_check(&b, &f, &StaticCheckConfig::for_branch(&b))?;
            s["static_drift"] = json!(rep.max_relative_deviation);
            s["static_check"] = json!(rep.config);
        }
        summaries.push(s);
    }
    let rows = table.len();
    run.emit("tail_law.csv", "tail energy and tail_energy·R^{1/2}/|alpha| per branch", json!({"samples_per_branch": cfg.tail_samples}), |w| {
        write_table(w, "tail_law", &[("n", rows.to_string())], &["alpha", "R", "tail_energy", "ratio"], table)
    })?;
    run.result("branches", summaries);
    Ok(())
}

// charnum

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CharnumConfig {
    pub out_dir: PathBuf,
    pub u_state: Option<PathBuf>,
    /// Zero when absent.
    pub v_state: Option<PathBuf>,
    pub window: Option<(f64, f64)>,
}

impl Default for CharnumConfig {
    fn default() -> Self {
        CharnumConfig {
            out_dir: default_out(),
            u_state: None,
            v_state: None,
            window: None,
        }
    }
}

pub fn charnum(cfg: &CharnumConfig, run: &mut Run) -> CliResult<()> {
    let u = load_state(cfg.u_state.as_ref().ok_or_else(|| CliError::Config("`u_state` is required".into()))?)?;
    let v = match &cfg.v_state {
        Some(p) => load_state(p)?,
        None => RadialState::zeros(u.grid, u.t),
    };
    let cn = characteristic_number(&u, &v, cfg.window)?;
    run.emit_json("charnum.json", "characteristic number estimates", grid_meta(&u.grid), &cn)?;
    run.result("alpha", cn.best());
    run.result("estimates", &cn);
    Ok(())
}

// construct primary / alpha

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrimaryCommandConfig {
    pub out_dir: PathBuf,
    #[serde(rename = "F")]
    pub f: String,
    pub weight: Option<PowerWeight>,
    pub profile_csv: Option<PathBuf>,
    pub bumps: Vec<Bump>,
    pub profile_extent: f64,
    pub profile_n: usize,
    /// Multiplies the profile.
    pub amplitude: f64,
    pub radius: f64,
    pub smallness: f64,
    pub enforce_smallness: bool,
    pub h: Option<f64>,
    pub probe_time: Option<f64>,
    pub extent: Option<f64>,
    pub cfl: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for PrimaryCommandConfig {
    fn default() -> Self {
        PrimaryCommandConfig {
            out_dir: default_out(),
            f: "focusing_quintic".into(),
            weight: None,
            profile_csv: None,
            bumps: default_bumps(),
            profile_extent: 4.0,
            profile_n: 801,
            amplitude: 0.1,
            radius: 1.0,
            smallness: DEFAULT_SMALLNESS,
            enforce_smallness: true,
            h: None,
            probe_time: None,
            extent: None,
            cfl: DEFAULT_CFL,
            tol: 1e-10,
            max_iter: DEFAULT_MAX_ITER,
            damping: 1.0,
        }
    }
}

fn write_history(run: &mut Run, history: &[exterior_wave_core::family_construct::IterationRecord], meta: serde_json::Value) -> CliResult<()> {
    run.emit("history.csv", "fixed-point iteration history", meta, |w| io::write_history(w, history))
}

pub fn construct_primary_cmd(cfg: &PrimaryCommandConfig, run: &mut Run) -> CliResult<()> {
    let f = nonlinearity(&cfg.f, cfg.weight)?;
    let g0 = profile_source(cfg.profile_csv.as_deref(), &cfg.bumps, cfg.profile_extent, cfg.profile_n)?.scaled(cfg.amplitude);
    let pc = PrimaryConfig {
        control: IterationControl {
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            damping: cfg.damping,
        },
        smallness: cfg.smallness,
        enforce_smallness: cfg.enforce_smallness,
        h: cfg.h,
        probe_time: cfg.probe_time,
        extent: cfg.extent,
        cfl: cfg.cfl,
        ..PrimaryConfig::default()
    };
    let c = construct_primary(&g0, &f, cfg.radius, &pc)?;
    let meta = json!({"grid": grid_meta(&c.setup.grid), "dt": c.setup.dt, "probe_time": c.setup.probe_time, "extent": c.setup.extent});
    run.emit("state.csv", "data of the constructed exterior solution at t = 0", meta.clone(), |w| io::write_state(w, &c.state))?;
    run.emit("profile.csv", "free-wave profile G0 + H", meta.clone(), |w| io::write_profile(w, &c.profile))?;
    run.emit("correction.csv", "correction profile H", meta.clone(), |w| io::write_profile(w, &c.correction))?;
    write_history(run, &c.history, meta)?;
    run.result("y_norm", c.y_norm);
    run.result("data_correction_norm", c.data_correction_norm);
    run.result("iterations", c.history.len());
    run.result("last_ratio", c.history.last().and_then(|h| h.ratio));
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlphaCommandConfig {
    pub out_dir: PathBuf,
    #[serde(rename = "F")]
    pub f: String,
    pub weight: Option<PowerWeight>,
    pub alpha: f64,
    /// Base solution `v` as a trajectory manifest with a frame at t = 0;
    /// `v = 0` when absent.
    pub base_trajectory: Option<PathBuf>,
    pub k_min: i32,
    pub k_max: i32,
    pub exponent: Option<i32>,
    pub radius_factor: f64,
    pub channel_constant: f64,
    pub channel_threshold: f64,
    pub h: Option<f64>,
    pub probe_time: Option<f64>,
    pub extent: Option<f64>,
    pub cfl: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for AlphaCommandConfig {
    fn default() -> Self {
        let a = AlphaConfig::default();
        AlphaCommandConfig {
            out_dir: default_out(),
            f: "defocusing_quintic".into(),
            weight: None,
            alpha: 1.0,
            base_trajectory: None,
            k_min: -4,
            k_max: 8,
            exponent: None,
            radius_factor: a.radius_factor,
            channel_constant: a.channel_constant,
            channel_threshold: a.channel_threshold,
            h: None,
            probe_time: None,
            extent: None,
            cfl: DEFAULT_CFL,
            tol: 1e-10,
            max_iter: DEFAULT_MAX_ITER,
            damping: 1.0,
        }
    }
}

pub fn construct_alpha_cmd(cfg: &AlphaCommandConfig, run: &mut Run) -> CliResult<()> {
    let f = nonlinearity(&cfg.f, cfg.weight)?;
    let base = match &cfg.base_trajectory {
        Some(p) => BaseSolution::from_trajectory(&load_traj(p)?, &f, cfg.k_min, cfg.k_max)?,
        None => BaseSolution::zero(&f),
    };
    let ac = AlphaConfig {
        control: IterationControl {
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            damping: cfg.damping,
        },
        channel_constant: cfg.channel_constant,
        channel_threshold: cfg.channel_threshold,
        radius_factor: cfg.radius_factor,
        exponent: cfg.exponent,
        h: cfg.h,
        probe_time: cfg.probe_time,
        extent: cfg.extent,
        cfl: cfg.cfl,
        initial: None,
    };
    let c = construct_alpha(&base, &f, cfg.alpha, &ac)?;
    let meta = json!({"grid": grid_meta(&c.setup.grid), "dt": c.setup.dt, "probe_time": c.setup.probe_time, "extent": c.setup.extent});
    run.emit("state.csv", "data of the constructed solution at t = 0", meta.clone(), |w| io::write_state(w, &c.state))?;
    run.emit("base.csv", "data of the base solution on the same grid", meta.clone(), |w| io::write_state(w, &c.base))?;
    run.emit("correction.csv", "correction profile H", meta.clone(), |w| io::write_profile(w, &c.correction))?;
    write_history(run, &c.history, meta)?;
    let cn = characteristic_number(&c.state, &c.base, None)?;
    run.result("radius", c.radius);
    run.result("exponent", c.exponent);
    run.result("channel_tail_sum", c.channel_tail_sum);
    run.result("difference_energy", c.difference_energy(c.radius)?);
    run.result("characteristic_number", cn.best());
    run.result("iterations", c.history.len());
    Ok(())
}

// scatter-experiment

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterCommandConfig {
    pub out_dir: PathBuf,
    #[serde(rename = "F")]
    pub f: String,
    pub weight: Option<PowerWeight>,
    pub state_csv: Option<PathBuf>,
    pub profile_csv: Option<PathBuf>,
    pub bumps: Vec<Bump>,
    pub profile_extent: f64,
    pub profile_n: usize,
    pub r_max: f64,
    pub n: usize,
    pub duration: f64,
    pub dt: Option<f64>,
    pub cfl: f64,
    pub save_every: usize,
    /// Verdict region `r > |t| + radius`.
    pub radius: f64,
    pub windows: usize,
    pub window_tolerance: f64,
    pub residual_tolerance: f64,
    pub probes: usize,
    pub probe_tolerance: f64,
    pub expect_blowup: bool,
    pub write_frames: bool,
}

impl Default for ScatterCommandConfig {
    fn default() -> Self {
        let s = ScatterConfig::default();
        ScatterCommandConfig {
            out_dir: default_out(),
            f: "defocusing_quintic".into(),
            weight: None,
            state_csv: None,
            profile_csv: None,
            bumps: default_bumps(),
            profile_extent: 8.0,
            profile_n: 3201,
            r_max: 100.0,
            n: 10001,
            duration: 40.0,
            dt: None,
            cfl: DEFAULT_CFL,
            save_every: 8,
            radius: 0.0,
            windows: s.windows,
            window_tolerance: s.window_tolerance,
            residual_tolerance: s.residual_tolerance,
            probes: s.probe.probes,
            probe_tolerance: s.probe.tolerance,
            expect_blowup: false,
            write_frames: false,
        }
    }
}

#[derive(Debug, Serialize)]
struct ScatterJson {
    verdict: exterior_wave_core::scatter_analysis::Verdict,
    reason: String,
    alpha_fit: Option<f64>,
    alpha_int: Option<f64>,
    agreement: Option<f64>,
    residual_curve: Vec<(f64, f64)>,
    initial_energy: f64,
    y_norm: f64,
    windows: Vec<(f64, f64, f64)>,
    profile_csv_path: Option<String>,
}

pub fn scatter_experiment(cfg: &ScatterCommandConfig, run: &mut Run) -> CliResult<()> {
    let f = nonlinearity(&cfg.f, cfg.weight)?;
    positive("duration", cfg.duration)?;
    let grid = RadialGrid::new(0.0, cfg.r_max, cfg.n)?;
    let (data, _) = initial_data(
        cfg.state_csv.as_ref(),
        cfg.profile_csv.as_ref(),
        &cfg.bumps,
        cfg.profile_extent,
        cfg.profile_n,
        &grid,
    )?;
    let dt = cfg.dt.unwrap_or(cfg.cfl * grid.h());
    let opts = EvolveOptions {
        cfl: cfg.cfl,
        save_every: cfg.save_every,
        ..EvolveOptions::default()
    };
    let traj = evolve_with(&data, &f, cfg.duration, dt, &opts)?;
    let meta = traj_meta(&traj);
    if cfg.write_frames {
        io::save_trajectory(&run.out, "trajectory", &traj)?;
        run.record("trajectory.json", "trajectory checkpoint manifest", meta.clone());
    }
    let sc = ScatterConfig {
        window_tolerance: cfg.window_tolerance,
        residual_tolerance: cfg.residual_tolerance,
        windows: cfg.windows,
        probe: ProbeConfig {
            probes: cfg.probes,
            tolerance: cfg.probe_tolerance,
        },
    };
    let rep = scattering_verdict(&traj, cfg.radius, &sc)?;
    let residual_rows: Vec<Vec<String>> = rep
        .residual
        .times
        .iter()
        .zip(&rep.residual.values)
        .map(|(t, v)| vec![fmt_f64(*t), fmt_f64(*v)])
        .collect();
    let nrows = residual_rows.len();
    run.emit("residual.csv", "equivalence residual against the extracted free wave", meta.clone(), |w| {
        write_table(w, "residual", &[("n", nrows.to_string())], &["t", "residual"], residual_rows)
    })?;
    let mut cn = None;
    let mut profile_path = None;
    if let Some(est) = &rep.profile {
        let pmeta = json!({"trajectory": meta.clone(), "probe_times": est.probe_times});
        run.emit("profile.csv", "extracted t → +∞ radiation profile", pmeta, |w| io::write_profile(w, &est.g))?;
        profile_path = Some("profile.csv".to_string());
        // α̂ of u against the companion free wave at the final time
        let last = traj.last();
        let lin = linear_evolve(&companion_linear_data_profile(&est.g), last.t, &grid);
        cn = characteristic_number(last, &lin, None).ok();
    }
    let report = ScatterJson {
        verdict: rep.verdict,
        reason: rep.reason.clone(),
        alpha_fit: cn.as_ref().map(|c| c.alpha_fit),
        alpha_int: cn.as_ref().and_then(|c| c.alpha_int),
        agreement: cn.as_ref().and_then(|c| c.agreement),
        residual_curve: rep.residual.times.iter().copied().zip(rep.residual.values.iter().copied()).collect(),
        initial_energy: rep.initial_energy,
        y_norm: rep.y_norm,
        windows: rep.windows.clone(),
        profile_csv_path: profile_path,
    };
    run.emit_json("report.json", "scattering verdict report", meta, &report)?;
    run.result("verdict", rep.verdict);
    run.result("reason", &rep.reason);
    if rep.verdict == exterior_wave_core::scatter_analysis::Verdict::Blowup && !cfg.expect_blowup {
        return Err(CliError::Numerical(rep.reason));
    }
    Ok(())
}
