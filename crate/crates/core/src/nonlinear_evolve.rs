//! Leapfrog evolution of `w_tt = w_rr + r·F(r, t, w/r)`, `w(0, t) = 0`,
//! for whole-space, exterior and prescribed-source problems.
//!
//! The scheme is kick–drift–kick (velocity Verlet), which is the leapfrog
//! scheme with velocities available at integer steps. The outer node is held
//! at its initial value; grids are expected to extend past the data support
//! by the run duration so that it is never reached.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field_core::{BlowupReport, RadialGrid, RadialState, SchemeInfo, Termination, Trajectory};
use crate::nonlinearity::Nonlinearity;

pub const DEFAULT_CFL: f64 = 0.5;
pub const BLOWUP_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Refuse steps with `dt > cfl·h`; must lie in `(0, 1]`.
    pub cfl: f64,
    /// Stop when `|w|` exceeds this in the authoritative region.
    pub cap: f64,
    /// Store every `save_every`-th step (the final step is always stored).
    pub save_every: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            cfl: DEFAULT_CFL,
            cap: BLOWUP_CAP,
            save_every: 1,
        }
    }
}

/// How an exterior run fills `r < R` before the first step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteriorFill {
    /// `(u(R), 0)` inside.
    Clamp,
    /// Keep whatever the state holds.
    AsGiven,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

struct Plan {
    grid: RadialGrid,
    t0: f64,
    sign: f64,
    nsteps: usize,
    step: f64,
    save_every: usize,
    cap: f64,
    cone: Option<f64>,
}

impl Plan {
    fn new(
        grid: RadialGrid,
        t0: f64,
        direction: Direction,
        duration: f64,
        dt: f64,
        opts: &EvolveOptions,
        cone: Option<f64>,
    ) -> Result<Plan> {
        if !grid.touches_origin() {
            return Err(LabError::Contract(
                "evolution needs a grid starting at r = 0 (w(0) = 0 is the inner boundary)".into(),
            ));
        }
        if grid.n() < 3 {
            return Err(LabError::Contract("evolution needs at least three nodes".into()));
        }
        if !(opts.cfl > 0.0 && opts.cfl <= 1.0) {
            return Err(LabError::Contract(format!("CFL number {} outside (0, 1]", opts.cfl)));
        }
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(LabError::Contract(format!("duration {duration} must be finite and ≥ 0")));
        }
        let limit = opts.cfl * grid.h();
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(LabError::Cfl {
                dt,
                limit,
                cfl: opts.cfl,
            });
        }
        let save_every = opts.save_every.max(1);
        let mut nsteps = (duration / dt - 1e-9).ceil().max(0.0) as usize;
        nsteps = nsteps.div_ceil(save_every) * save_every;
        let step = if nsteps == 0 { dt } else { duration / nsteps as f64 };
        Ok(Plan {
            grid,
            t0,
            sign: direction.sign(),
            nsteps,
            step,
            save_every,
            cap: opts.cap,
            cone,
        })
    }

    fn time(&self, k: usize) -> f64 {
        self.t0 + self.sign * (k as f64 * self.step)
    }

    fn frame_dt(&self) -> f64 {
        self.step * self.save_every as f64
    }

    fn authoritative(&self, r: f64, t: f64) -> bool {
        self.cone.is_none_or(|c| r > t.abs() + c)
    }
}

/// `(w, dw/dτ)` with `τ` the integration variable, `t = t0 ± τ`.
fn to_w(state: &RadialState, sign: f64) -> (Vec<f64>, Vec<f64>) {
    let w = state.w();
    let v = state.wt().into_iter().map(|x| sign * x).collect();
    (w, v)
}

fn to_state(grid: &RadialGrid, w: &[f64], v: &[f64], sign: f64, t: f64) -> RadialState {
    let n = grid.n();
    let h = grid.h();
    let mut u = vec![0.0; n];
    let mut ut = vec![0.0; n];
    for i in 1..n {
        let r = grid.r(i);
        u[i] = w[i] / r;
        ut[i] = sign * v[i] / r;
    }
    u[0] = (8.0 * w[1] - w[2]) / (6.0 * h);
    ut[0] = sign * (8.0 * v[1] - v[2]) / (6.0 * h);
    RadialState {
        grid: *grid,
        u,
        ut,
        t,
    }
}

struct Outcome {
    frames: Vec<Vec<RadialState>>,
    termination: Termination,
    masked_excess: Option<BlowupReport>,
}

/// Integrates several fields in lockstep. `source(t, w, out)` writes the
/// `r·F` terms (already zeroed) for every field.
fn drive(
    plan: &Plan,
    init: Vec<(Vec<f64>, Vec<f64>)>,
    mut source: impl FnMut(f64, &[Vec<f64>], &mut [Vec<f64>]),
) -> Outcome {
    let grid = plan.grid;
    let n = grid.n();
    let h = grid.h();
    let inv_h2 = 1.0 / (h * h);
    let dt = plan.step;
    let nf = init.len();
    let (mut w, mut v): (Vec<Vec<f64>>, Vec<Vec<f64>>) = init.into_iter().unzip();
    for f in 0..nf {
        w[f][0] = 0.0;
        v[f][0] = 0.0;
        v[f][n - 1] = 0.0;
    }
    let mut acc = vec![vec![0.0; n]; nf];

    let accel = |t: f64, w: &[Vec<f64>], acc: &mut [Vec<f64>], source: &mut dyn FnMut(f64, &[Vec<f64>], &mut [Vec<f64>])| {
        for a in acc.iter_mut() {
            a.fill(0.0);
        }
        source(t, w, acc);
        for f in 0..w.len() {
            let (wf, af) = (&w[f], &mut acc[f]);
            af[0] = 0.0;
            for i in 1..n - 1 {
                af[i] += (wf[i + 1] - 2.0 * wf[i] + wf[i - 1]) * inv_h2;
            }
            af[n - 1] = 0.0;
        }
    };

    let mut frames: Vec<Vec<RadialState>> = vec![Vec::new(); nf];
    let save = |frames: &mut Vec<Vec<RadialState>>, w: &[Vec<f64>], v: &[Vec<f64>], t: f64| {
        for f in 0..nf {
            frames[f].push(to_state(&grid, &w[f], &v[f], plan.sign, t));
        }
    };
    save(&mut frames, &w, &v, plan.time(0));
    accel(plan.time(0), &w, &mut acc, &mut source);

    let mut masked_excess = None;
    for k in 1..=plan.nsteps {
        for f in 0..nf {
            let (wf, vf, af) = (&mut w[f], &mut v[f], &acc[f]);
            for i in 1..n - 1 {
                vf[i] += 0.5 * dt * af[i];
                wf[i] += dt * vf[i];
            }
        }
        let t = plan.time(k);
        accel(t, &w, &mut acc, &mut source);
        for f in 0..nf {
            let (vf, af) = (&mut v[f], &acc[f]);
            for i in 1..n - 1 {
                vf[i] += 0.5 * dt * af[i];
            }
        }

        let mut worst: Option<(usize, f64)> = None;
        for wf in &w {
            for (i, &x) in wf.iter().enumerate() {
                let bad = !x.is_finite() || x.abs() > plan.cap;
                if bad && worst.is_none_or(|(_, m)| !(x.abs() <= m)) {
                    worst = Some((i, x.abs()));
                }
            }
        }
        if let Some((i, value)) = worst {
            let r = grid.r(i);
            let report = BlowupReport {
                time: t,
                radius: r,
                value,
                authoritative: plan.authoritative(r, t),
            };
            if report.authoritative {
                return Outcome {
                    frames,
                    termination: Termination::Blowup(report),
                    masked_excess,
                };
            }
            if masked_excess.is_none() {
                log::warn!("|w| exceeded the cap at t = {t}, r = {r} inside the masked region");
                masked_excess = Some(report);
            }
        }
        if k % plan.save_every == 0 {
            save(&mut frames, &w, &v, t);
        }
    }
    Outcome {
        frames,
        termination: Termination::Completed,
        masked_excess,
    }
}

fn assemble(
    plan: &Plan,
    mut frames: Vec<RadialState>,
    termination: Termination,
    f: Option<&Nonlinearity>,
    name: &str,
    cfl: f64,
) -> Result<Trajectory> {
    if plan.sign < 0.0 {
        frames.reverse();
    }
    let mut traj = Trajectory::new(frames, plan.frame_dt(), plan.cone)?;
    traj.termination = termination;
    traj.scheme = Some(SchemeInfo {
        name: name.into(),
        step: plan.step,
        cfl,
        save_every: plan.save_every,
        nonlinearity: f.map_or(serde_json::json!({"name": "prescribed source"}), |f| f.descriptor()),
    });
    Ok(traj)
}

const SCHEME: &str = "leapfrog (velocity Verlet) in w = r·u";

#[inline]
fn add_nonlinear(
    out: &mut [f64],
    w: &[f64],
    grid: &RadialGrid,
    f: &Nonlinearity,
    t: f64,
    cone: Option<f64>,
) {
    if f.is_zero() {
        return;
    }
    let n = grid.n();
    let start = match cone {
        Some(c) => {
            let edge = t.abs() + c;
            (((edge - grid.r_min()) / grid.h()).floor().max(0.0) as usize).max(1)
        }
        None => 1,
    };
    for i in start..n - 1 {
        let r = grid.r(i);
        if cone.is_none_or(|c| r > t.abs() + c) {
            out[i] += r * f.eval(r, t, w[i] / r);
        }
    }
}

/// Whole-space evolution over `[t0, t0 + duration]` with default options.
pub fn evolve(state: &RadialState, f: &Nonlinearity, duration: f64, dt: f64) -> Result<Trajectory> {
    evolve_with(state, f, duration, dt, &EvolveOptions::default())
}

pub fn evolve_with(
    state: &RadialState,
    f: &Nonlinearity,
    duration: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    evolve_directed(state, f, None, duration, dt, Direction::Forward, opts)
}

/// Evolution in either time direction with an optional exterior mask
/// (source active only for `r > |t| + cone`). No interior fill is applied.
pub fn evolve_directed(
    state: &RadialState,
    f: &Nonlinearity,
    cone: Option<f64>,
    duration: f64,
    dt: f64,
    direction: Direction,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let plan = Plan::new(state.grid, state.t, direction, duration, dt, opts, cone)?;
    let grid = state.grid;
    let out = drive(&plan, vec![to_w(state, plan.sign)], |t, w, acc| {
        add_nonlinear(&mut acc[0], &w[0], &grid, f, t, cone);
    });
    let frames = out.frames.into_iter().next().expect("one field");
    let mut traj = assemble(&plan, frames, out.termination, Some(f), SCHEME, opts.cfl)?;
    if let Some(m) = out.masked_excess {
        log::warn!("run finished with a masked-region excess at t = {}", m.time);
    }
    if cone.is_some() {
        traj.cone_origin = cone;
    }
    Ok(traj)
}

/// Replaces the data inside `r < radius` by `(u(radius), 0)`.
pub fn clamp_interior(state: &RadialState, radius: f64) -> RadialState {
    let edge = state.u_at(radius);
    let mut out = state.clone();
    for i in 0..state.grid.n() {
        if state.grid.r(i) < radius {
            out.u[i] = edge;
            out.ut[i] = 0.0;
        }
    }
    out
}

/// Exterior evolution: the source acts only on `r > |t| + radius`, and the
/// data inside `radius` is clamped.
pub fn evolve_exterior(
    state: &RadialState,
    f: &Nonlinearity,
    radius: f64,
    duration: f64,
    dt: f64,
) -> Result<Trajectory> {
    evolve_exterior_with(state, f, radius, duration, dt, InteriorFill::Clamp, &EvolveOptions::default())
}

pub fn evolve_exterior_with(
    state: &RadialState,
    f: &Nonlinearity,
    radius: f64,
    duration: f64,
    dt: f64,
    fill: InteriorFill,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !(radius >= 0.0) || radius >= state.grid.r_max() {
        return Err(LabError::OutsideGrid {
            radius,
            r_min: state.grid.r_min(),
            r_max: state.grid.r_max(),
            note: "cone radius must lie inside the grid".into(),
        });
    }
    let data = match fill {
        InteriorFill::Clamp => clamp_interior(state, radius),
        InteriorFill::AsGiven => state.clone(),
    };
    evolve_directed(&data, f, Some(radius), duration, dt, Direction::Forward, opts)
}

/// Runs backward over `duration` and forward over `duration` from `state.t`
/// and joins the two into one trajectory.
pub fn evolve_bidirectional(
    state: &RadialState,
    f: &Nonlinearity,
    cone: Option<f64>,
    duration: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let back = evolve_directed(state, &f.time_reversed(), cone, duration, dt, Direction::Backward, opts)?;
    let fwd = evolve_directed(state, f, cone, duration, dt, Direction::Forward, opts)?;
    let back_blowup = back.termination;
    let mut joined = back.concat(fwd)?;
    if matches!(joined.termination, Termination::Completed) {
        joined.termination = back_blowup;
    }
    Ok(joined)
}

/// Linear wave with a prescribed source, `u_tt - Δu = s(r, t)`.
pub fn duhamel_linear(
    state: &RadialState,
    source: &(dyn Fn(f64, f64) -> f64 + Sync),
    duration: f64,
    dt: f64,
) -> Result<Trajectory> {
    duhamel_linear_with(state, source, duration, dt, &EvolveOptions::default())
}

pub fn duhamel_linear_with(
    state: &RadialState,
    source: &(dyn Fn(f64, f64) -> f64 + Sync),
    duration: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let plan = Plan::new(state.grid, state.t, Direction::Forward, duration, dt, opts, None)?;
    let grid = state.grid;
    let n = grid.n();
    let out = drive(&plan, vec![to_w(state, 1.0)], |t, _w, acc| {
        for i in 1..n - 1 {
            let r = grid.r(i);
            acc[0][i] += r * source(r, t);
        }
    });
    let frames = out.frames.into_iter().next().expect("one field");
    assemble(&plan, frames, out.termination, None, SCHEME, opts.cfl)
}

/// A base solution plus a perturbation evolved as (free part) + (correction).
///
/// With `u = v + w_L + z`, the base `v` solves the equation with source
/// `χ_base·F(v)`, the linear part `w_L` is free, and the correction `z` starts
/// from zero data with source `χ_cone·(F(v + w_L + z) - F(v))`. Keeping the
/// three parts separate preserves the relative accuracy of a small `z`.
pub struct SplitProblem<'a> {
    pub base: &'a RadialState,
    pub base_f: &'a Nonlinearity,
    pub base_cone: Option<f64>,
    pub perturbation: &'a RadialState,
    pub f: &'a Nonlinearity,
    pub cone: f64,
}

#[derive(Debug, Clone)]
pub struct SplitRun {
    pub base: Trajectory,
    pub linear: Trajectory,
    pub correction: Trajectory,
}

pub fn evolve_split(
    problem: &SplitProblem<'_>,
    duration: f64,
    dt: f64,
    direction: Direction,
    opts: &EvolveOptions,
) -> Result<SplitRun> {
    let grid = problem.base.grid;
    if problem.perturbation.grid != grid {
        return Err(LabError::Contract("base and perturbation must share a grid".into()));
    }
    let plan = Plan::new(grid, problem.base.t, direction, duration, dt, opts, Some(problem.cone))?;
    let (base_f, f) = match direction {
        Direction::Forward => (problem.base_f.clone(), problem.f.clone()),
        Direction::Backward => (problem.base_f.time_reversed(), problem.f.time_reversed()),
    };
    let zero = RadialState::zeros(grid, problem.base.t);
    let init = vec![
        to_w(problem.base, plan.sign),
        to_w(problem.perturbation, plan.sign),
        to_w(&zero, plan.sign),
    ];
    let n = grid.n();
    let cone = problem.cone;
    let base_cone = problem.base_cone;
    let out = drive(&plan, init, |t, w, acc| {
        add_nonlinear(&mut acc[0], &w[0], &grid, &base_f, t, base_cone);
        if f.is_zero() {
            return;
        }
        let edge = t.abs() + cone;
        let start = (((edge - grid.r_min()) / grid.h()).floor().max(0.0) as usize).max(1);
        for i in start..n - 1 {
            let r = grid.r(i);
            if r > edge {
                let v = w[0][i] / r;
                let full = (w[0][i] + w[1][i] + w[2][i]) / r;
                acc[2][i] += r * (f.eval(r, t, full) - f.eval(r, t, v));
            }
        }
    });
    let mut it = out.frames.into_iter();
    let mut next = |name: &str, nl: Option<&Nonlinearity>, cone: Option<f64>| -> Result<Trajectory> {
        let mut tr = assemble(&plan, it.next().expect("three fields"), out.termination, nl, name, opts.cfl)?;
        tr.cone_origin = cone;
        Ok(tr)
    };
    Ok(SplitRun {
        base: next(SCHEME, Some(&base_f), base_cone)?,
        linear: next(SCHEME, None, Some(cone))?,
        correction: next(SCHEME, Some(&f), Some(cone))?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceVerdict {
    Pass,
    Inconclusive,
    /// Errors were not finite.
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub order: f64,
    /// Successive differences (or errors against a reference).
    pub errors: Vec<f64>,
    pub resolutions: Vec<usize>,
    pub verdict: ConvergenceVerdict,
}

pub const PASS_ORDER: f64 = 1.8;

impl ConvergenceReport {
    /// Order from two errors at a refinement ratio of 2.
    pub fn from_errors(e_coarse: f64, e_fine: f64, resolutions: Vec<usize>, scale: f64) -> Self {
        let floor = 1e-13 * scale.abs().max(1e-300);
        let (order, verdict) = if !(e_coarse.is_finite() && e_fine.is_finite()) {
            (f64::NAN, ConvergenceVerdict::Fail)
        } else if e_coarse <= floor && e_fine <= floor {
            (f64::INFINITY, ConvergenceVerdict::Pass)
        } else if e_fine >= e_coarse {
            ((e_coarse / e_fine).log2(), ConvergenceVerdict::Inconclusive)
        } else {
            let p = (e_coarse / e_fine).log2();
            let v = if p >= PASS_ORDER {
                ConvergenceVerdict::Pass
            } else {
                ConvergenceVerdict::Inconclusive
            };
            (p, v)
        };
        ConvergenceReport {
            order,
            errors: vec![e_coarse, e_fine],
            resolutions,
            verdict,
        }
    }
}

/// `(h Σ_i (a_i - b_i)²)^{1/2}` over the nodes of `coarse`, reading `fine`
/// at every `stride`-th node.
fn nodal_l2(coarse: &[f64], fine: &[f64], stride: usize, h: f64) -> f64 {
    coarse
        .iter()
        .enumerate()
        .map(|(i, a)| (a - fine[i * stride]).powi(2))
        .sum::<f64>()
        .sqrt()
        * h.sqrt()
}

/// Runs at `h`, `h/2`, `h/4` with `dt = cfl·h` and estimates the order from
/// the successive differences of `w` at the final time on the coarse nodes.
pub fn self_convergence(
    data: &dyn Fn(&RadialGrid) -> Result<RadialState>,
    f: &Nonlinearity,
    duration: f64,
    grid: RadialGrid,
    cfl: f64,
) -> Result<ConvergenceReport> {
    let mut finals = Vec::with_capacity(3);
    let mut resolutions = Vec::with_capacity(3);
    for k in 0..3 {
        let g = grid.refined(1 << k);
        let st = data(&g)?;
        let dt = cfl * g.h();
        // store only the first and last frames
        let steps = (duration / dt - 1e-9).ceil().max(1.0) as usize;
        let opts = EvolveOptions {
            cfl,
            save_every: steps,
            ..EvolveOptions::default()
        };
        let traj = evolve_with(&st, f, duration, dt, &opts)?;
        if let Some(b) = traj.blowup() {
            return Err(LabError::Numerical(format!(
                "refinement run blew up at t = {}, r = {}",
                b.time, b.radius
            )));
        }
        finals.push(traj.last().w());
        resolutions.push(g.n());
    }
    let h = grid.h();
    let e1 = nodal_l2(&finals[0], &finals[1], 2, h);
    let mid: Vec<f64> = finals[1].iter().step_by(2).copied().collect();
    let e2 = nodal_l2(&mid, &finals[2], 4, h);
    let scale = finals[2].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(ConvergenceReport::from_errors(e1, e2, resolutions, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::{conserved_energy, exterior_energy};
    use crate::linear_radiation::{bump, data_from_profile_on, linear_evolve, RadiationProfile};

    fn smooth_profile() -> RadiationProfile {
        RadiationProfile::symmetric(30.0, 12001, |s| bump((s - 0.5) / 1.5) - 0.7 * bump((s + 1.0) / 1.2)).unwrap()
    }

    #[test]
    fn cfl_violation_is_refused() {
        let g = RadialGrid::new(0.0, 10.0, 101).unwrap();
        let s = RadialState::zeros(g, 0.0);
        assert!(matches!(
            evolve(&s, &Nonlinearity::zero(), 1.0, 0.06),
            Err(LabError::Cfl { .. })
        ));
        assert!(evolve(&s, &Nonlinearity::zero(), 1.0, 0.05).is_ok());
    }

    #[test]
    fn trajectory_length_and_times() {
        let g = RadialGrid::new(0.0, 10.0, 101).unwrap();
        let s = RadialState::zeros(g, 1.0);
        let tr = evolve(&s, &Nonlinearity::zero(), 1.0, 0.05).unwrap();
        assert_eq!(tr.states.len(), 21);
        assert!((tr.last().t - 2.0).abs() < 1e-12);
        let tr = evolve(&s, &Nonlinearity::zero(), 1.0, 0.03).unwrap();
        assert_eq!(tr.states.len(), 35);
    }

    #[test]
    fn free_evolution_matches_propagator() {
        let g = smooth_profile();
        let grid = RadialGrid::new(0.0, 20.0, 2001).unwrap();
        let data = data_from_profile_on(&g, &grid);
        let tr = evolve(&data, &Nonlinearity::zero(), 5.0, 0.005).unwrap();
        let exact = linear_evolve(&g, 5.0, &grid);
        let err = tr.last().u.iter().zip(&exact.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = exact.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(err < 1e-3 * scale, "{err} {scale}");
    }

    #[test]
    fn time_reversal() {
        let grid = RadialGrid::new(0.0, 20.0, 1001).unwrap();
        let data = RadialState::from_fn(grid, 0.0, |r| (0.8 * bump((r - 2.0) / 1.5), 0.0)).unwrap();
        let f = Nonlinearity::defocusing_quintic();
        let fwd = evolve(&data, &f, 4.0, 0.01).unwrap();
        let mut rev = fwd.last().clone();
        rev.ut.iter_mut().for_each(|x| *x = -*x);
        let back = evolve(&rev, &f, 4.0, 0.01).unwrap();
        let end = back.last();
        let err = end.u.iter().zip(&data.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn bidirectional_matches_direct_backward() {
        let grid = RadialGrid::new(0.0, 20.0, 801).unwrap();
        let data = RadialState::from_fn(grid, 0.0, |r| (0.2 * bump((r - 3.0) / 1.5), 0.1 * bump((r - 3.0) / 1.0))).unwrap();
        let f = Nonlinearity::focusing_quintic();
        let tr = evolve_bidirectional(&data, &f, None, 3.0, 0.0125, &EvolveOptions::default()).unwrap();
        assert!((tr.first().t + 3.0).abs() < 1e-12 && (tr.last().t - 3.0).abs() < 1e-12, "{} {} {}", tr.first().t, tr.last().t, tr.states.len());
        let mid = tr.state_at(0.0).unwrap();
        assert_eq!(mid.u, evolve(&data, &f, 0.0, 0.0125).unwrap().first().u);
        // reversing time is the same as flipping the velocity
        let mut flipped = data.clone();
        flipped.ut.iter_mut().for_each(|x| *x = -*x);
        let alt = evolve(&flipped, &f, 3.0, 0.0125).unwrap();
        let early = tr.first();
        let err = early.u.iter().zip(&alt.last().u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn energy_conserved_defocusing() {
        let grid = RadialGrid::new(0.0, 30.0, 3001).unwrap();
        let data = RadialState::from_fn(grid, 0.0, |r| (bump((r - 3.0) / 2.0), 0.0)).unwrap();
        let f = Nonlinearity::defocusing_quintic();
        let tr = evolve(&data, &f, 10.0, 0.005).unwrap();
        let e0 = conserved_energy(&data, &f).unwrap();
        let drift = tr
            .states
            .iter()
            .step_by(100)
            .map(|s| ((conserved_energy(s, &f).unwrap() - e0) / e0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 5e-3, "{drift}");
    }

    #[test]
    fn blowup_is_reported() {
        let grid = RadialGrid::new(0.0, 10.0, 501).unwrap();
        let data = RadialState::from_fn(grid, 0.0, |r| (3.0 * (1.0 / 3.0 + r * r).powf(-0.5), 0.0)).unwrap();
        let tr = evolve(&data, &Nonlinearity::focusing_quintic(), 5.0, 0.005).unwrap();
        let b = tr.blowup().expect("focusing data above the ground state blows up");
        assert!(b.authoritative && b.time < 5.0 && b.radius < 1.0, "{b:?}");
    }

    #[test]
    fn zero_data_stays_zero_and_f0_exterior_is_plain() {
        let grid = RadialGrid::new(0.0, 10.0, 201).unwrap();
        let z = RadialState::zeros(grid, 0.0);
        let tr = evolve_exterior(&z, &Nonlinearity::focusing_quintic(), 1.0, 2.0, 0.02).unwrap();
        assert!(tr.states.iter().all(|s| s.u.iter().all(|x| *x == 0.0)));
        let data = RadialState::from_fn(grid, 0.0, |r| (bump((r - 4.0) / 1.5), 0.0)).unwrap();
        let a = evolve_exterior_with(&data, &Nonlinearity::zero(), 1.0, 2.0, 0.02, InteriorFill::AsGiven, &EvolveOptions::default()).unwrap();
        let b = evolve(&data, &Nonlinearity::zero(), 2.0, 0.02).unwrap();
        assert_eq!(a.last().u, b.last().u);
        assert_eq!(a.cone_origin, Some(1.0));
    }

    #[test]
    fn duhamel_superposition() {
        let grid = RadialGrid::new(0.0, 20.0, 801).unwrap();
        let data = RadialState::from_fn(grid, 0.0, |r| (bump((r - 3.0) / 1.0), 0.0)).unwrap();
        let zero = RadialState::zeros(grid, 0.0);
        let s1 = |r: f64, t: f64| bump((r - 5.0) / 1.0) * (t * 2.0).sin();
        let s2 = |r: f64, t: f64| bump((r - 8.0 + t) / 2.0) * 0.3;
        let s12 = |r: f64, t: f64| s1(r, t) + s2(r, t);
        let a = duhamel_linear(&data, &s12, 3.0, 0.0125).unwrap();
        let b = duhamel_linear(&data, &s1, 3.0, 0.0125).unwrap();
        let c = duhamel_linear(&zero, &s2, 3.0, 0.0125).unwrap();
        let diff = a.last().sub(&b.last().add(c.last()).unwrap()).unwrap();
        assert!(diff.u.iter().all(|x| x.abs() < 1e-10));
        let plain = evolve(&data, &Nonlinearity::zero(), 3.0, 0.0125).unwrap();
        assert_eq!(duhamel_linear(&data, &|_, _| 0.0, 3.0, 0.0125).unwrap().last().u, plain.last().u);
    }

    #[test]
    fn split_run_sums_to_full_run() {
        let grid = RadialGrid::new(0.0, 20.0, 801).unwrap();
        let base = RadialState::from_fn(grid, 0.0, |r| (0.6 * bump((r - 4.0) / 1.5), 0.0)).unwrap();
        let pert = RadialState::from_fn(grid, 0.0, |r| (0.2 * bump((r - 5.0) / 1.0), 0.0)).unwrap();
        let f = Nonlinearity::focusing_quintic();
        let p = SplitProblem {
            base: &base,
            base_f: &f,
            base_cone: Some(1.0),
            perturbation: &pert,
            f: &f,
            cone: 1.0,
        };
        let run = evolve_split(&p, 2.0, 0.0125, Direction::Forward, &EvolveOptions::default()).unwrap();
        let full = evolve_exterior_with(&base.add(&pert).unwrap(), &f, 1.0, 2.0, 0.0125, InteriorFill::AsGiven, &EvolveOptions::default()).unwrap();
        let sum = run.base.last().add(run.linear.last()).unwrap().add(run.correction.last()).unwrap();
        let diff = sum.sub(full.last()).unwrap();
        assert!(exterior_energy(&diff, 3.5).unwrap() < 1e-10);
    }

    #[test]
    fn convergence_orders() {
        let grid = RadialGrid::new(0.0, 16.0, 321).unwrap();
        let smooth = |g: &RadialGrid| RadialState::from_fn(*g, 0.0, |r| (0.3 * bump((r - 4.0) / 2.0), 0.0));
        let lin = self_convergence(&smooth, &Nonlinearity::zero(), 4.0, grid, 0.5).unwrap();
        assert!((lin.order - 2.0).abs() < 0.2, "{lin:?}");
        assert_eq!(lin.verdict, ConvergenceVerdict::Pass);
        let nl = self_convergence(&smooth, &Nonlinearity::defocusing_quintic(), 4.0, grid, 0.5).unwrap();
        assert!(nl.order >= 1.8, "{nl:?}");
        let rough = |g: &RadialGrid| RadialState::from_fn(*g, 0.0, |r| (if (r - 4.0).abs() < 1.0 { 0.3 } else { 0.0 }, 0.0));
        let rc = self_convergence(&rough, &Nonlinearity::zero(), 4.0, grid, 0.5).unwrap();
        assert_eq!(rc.verdict, ConvergenceVerdict::Inconclusive, "{rc:?}");
        assert!(rc.order < 1.0, "{rc:?}");
    }
}
