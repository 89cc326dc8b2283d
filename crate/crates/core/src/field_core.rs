//! Radial grids, sampled fields, quadrature and energy functionals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, LabError, Result};
use crate::nonlinearity::Nonlinearity;

pub const FOUR_PI: f64 = 4.0 * PI;

/// Uniform grid `r_i = r_min + i·h`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec")]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    n: usize,
    #[serde(skip_serializing)]
    h: f64,
}

#[derive(Deserialize)]
struct GridSpec {
    r_min: f64,
    r_max: f64,
    n: usize,
}

impl TryFrom<GridSpec> for RadialGrid {
    type Error = LabError;
    fn try_from(s: GridSpec) -> Result<Self> {
        RadialGrid::new(s.r_min, s.r_max, s.n)
    }
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min >= 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(LabError::Contract(format!(
                "grid needs 0 ≤ r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if n < 2 {
            return Err(LabError::Contract(format!("grid needs n ≥ 2, got {n}")));
        }
        Ok(RadialGrid {
            r_min,
            r_max,
            n,
            h: (r_max - r_min) / (n - 1) as f64,
        })
    }

    /// Grid from `r_min` with spacing exactly `h` reaching at least `r_reach`.
    pub fn with_spacing(r_min: f64, r_reach: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(LabError::Contract(format!("spacing must be positive, got {h}")));
        }
        let cells = ((r_reach - r_min) / h - 1e-9).ceil().max(1.0) as usize;
        RadialGrid::new(r_min, r_min + cells as f64 * h, cells + 1)
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.r_max
        } else {
            self.r_min + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.r(i)).collect()
    }

    pub fn touches_origin(&self) -> bool {
        self.r_min == 0.0
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min - 1e-12 * self.h && r <= self.r_max + 1e-12 * self.h
    }

    /// Same range with each cell split into `factor` cells.
    pub fn refined(&self, factor: usize) -> RadialGrid {
        RadialGrid::new(self.r_min, self.r_max, (self.n - 1) * factor + 1)
            .expect("refinement of a valid grid")
    }

    /// Every other node, when `n` is odd.
    pub fn coarsened(&self) -> Option<RadialGrid> {
        if self.n % 2 == 1 && self.n >= 3 {
            RadialGrid::new(self.r_min, self.r_max, (self.n - 1) / 2 + 1).ok()
        } else {
            None
        }
    }
}

/// Linear interpolation of nodal values; clamps outside the grid.
pub fn interpolate(grid: &RadialGrid, values: &[f64], r: f64) -> f64 {
    let x = ((r - grid.r_min) / grid.h).max(0.0);
    let i = (x.floor() as usize).min(grid.n - 2);
    let f = (x - i as f64).min(1.0);
    values[i] * (1.0 - f) + values[i + 1] * f
}

/// `∫_a^b` of the piecewise-linear interpolant of `values`, with `[a, b]`
/// clipped to the grid.
pub fn integrate_interval(grid: &RadialGrid, values: &[f64], a: f64, b: f64) -> f64 {
    let a = a.max(grid.r_min);
    let b = b.min(grid.r_max);
    if !(b > a) {
        return 0.0;
    }
    let h = grid.h;
    let n = grid.n;
    let ia = (((a - grid.r_min) / h).floor() as usize).min(n - 2);
    let ib = (((b - grid.r_min) / h).ceil() as usize).clamp(ia + 1, n - 1);
    let fa = interpolate(grid, values, a);
    let fb = interpolate(grid, values, b);
    if ib == ia + 1 {
        return 0.5 * (b - a) * (fa + fb);
    }
    let mut sum = 0.5 * (grid.r(ia + 1) - a) * (fa + values[ia + 1]);
    for i in ia + 1..ib - 1 {
        sum += 0.5 * h * (values[i] + values[i + 1]);
    }
    sum + 0.5 * (b - grid.r(ib - 1)) * (values[ib - 1] + fb)
}

/// A value with an error bound estimated from a half-resolution evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub error_bound: f64,
}

/// Radial pair `(u, u_t)` sampled at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    pub grid: RadialGrid,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
    pub t: f64,
}

impl RadialState {
    pub fn new(grid: RadialGrid, u: Vec<f64>, ut: Vec<f64>, t: f64) -> Result<Self> {
        check_len(grid.n, u.len())?;
        check_len(grid.n, ut.len())?;
        if let Some(i) = u.iter().chain(ut.iter()).position(|v| !v.is_finite()) {
            return Err(LabError::Contract(format!(
                "state contains a non-finite sample at index {}",
                i % grid.n
            )));
        }
        if !t.is_finite() {
            return Err(LabError::Contract(format!("state time {t} is not finite")));
        }
        Ok(RadialState { grid, u, ut, t })
    }

    pub fn zeros(grid: RadialGrid, t: f64) -> Self {
        RadialState {
            grid,
            u: vec![0.0; grid.n],
            ut: vec![0.0; grid.n],
            t,
        }
    }

    /// Samples `f(r) = (u, u_t)` at the nodes.
    pub fn from_fn(grid: RadialGrid, t: f64, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let (u, ut) = grid.nodes().into_iter().map(f).unzip();
        RadialState::new(grid, u, ut, t)
    }

    /// `w = r·u`.
    pub fn w(&self) -> Vec<f64> {
        (0..self.grid.n).map(|i| self.grid.r(i) * self.u[i]).collect()
    }

    pub fn wt(&self) -> Vec<f64> {
        (0..self.grid.n).map(|i| self.grid.r(i) * self.ut[i]).collect()
    }

    pub fn u_at(&self, r: f64) -> f64 {
        interpolate(&self.grid, &self.u, r)
    }

    pub fn ut_at(&self, r: f64) -> f64 {
        interpolate(&self.grid, &self.ut, r)
    }

    /// Resamples onto another grid by linear interpolation.
    pub fn resampled(&self, grid: RadialGrid) -> RadialState {
        let u = grid.nodes().iter().map(|&r| self.u_at(r)).collect();
        let ut = grid.nodes().iter().map(|&r| self.ut_at(r)).collect();
        RadialState {
            grid,
            u,
            ut,
            t: self.t,
        }
    }

    /// Pointwise combination `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: f64, other: &RadialState, b: f64) -> Result<RadialState> {
        if self.grid != other.grid {
            return Err(LabError::Contract("states live on different grids".into()));
        }
        let u = self.u.iter().zip(&other.u).map(|(x, y)| a * x + b * y).collect();
        let ut = self.ut.iter().zip(&other.ut).map(|(x, y)| a * x + b * y).collect();
        Ok(RadialState {
            grid: self.grid,
            u,
            ut,
            t: self.t,
        })
    }

    pub fn sub(&self, other: &RadialState) -> Result<RadialState> {
        self.combine(1.0, other, -1.0)
    }

    pub fn add(&self, other: &RadialState) -> Result<RadialState> {
        self.combine(1.0, other, 1.0)
    }

    pub fn scaled(&self, a: f64) -> RadialState {
        RadialState {
            grid: self.grid,
            u: self.u.iter().map(|x| a * x).collect(),
            ut: self.ut.iter().map(|x| a * x).collect(),
            t: self.t,
        }
    }

    /// Every other sample (requires odd `n`).
    pub fn coarsened(&self) -> Option<RadialState> {
        let grid = self.grid.coarsened()?;
        Some(RadialState {
            grid,
            u: self.u.iter().step_by(2).copied().collect(),
            ut: self.ut.iter().step_by(2).copied().collect(),
            t: self.t,
        })
    }
}

/// Where a run stopped early because `|w|` exceeded the cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub time: f64,
    pub radius: f64,
    pub value: f64,
    /// Whether the excess occurred where the run is authoritative.
    pub authoritative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    Completed,
    Blowup(BlowupReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeInfo {
    pub name: String,
    /// Integrator step (stored frames are `save_every` steps apart).
    pub step: f64,
    pub cfl: f64,
    pub save_every: usize,
    pub nonlinearity: serde_json::Value,
}

/// Time-ordered states on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<RadialState>,
    pub dt: f64,
    /// `Some(R)`: only `r > |t| + R` is authoritative.
    pub cone_origin: Option<f64>,
    pub termination: Termination,
    pub scheme: Option<SchemeInfo>,
}

impl Trajectory {
    pub fn new(states: Vec<RadialState>, dt: f64, cone_origin: Option<f64>) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| LabError::Contract("trajectory needs at least one state".into()))?;
        for pair in states.windows(2) {
            if pair[1].grid != first.grid {
                return Err(LabError::Contract("trajectory states use different grids".into()));
            }
            let step = pair[1].t - pair[0].t;
            if !(step > 0.0) || (step - dt).abs() > 1e-6 * dt.max(1e-300) {
                return Err(LabError::Contract(format!(
                    "trajectory times must increase uniformly by {dt}, found step {step}"
                )));
            }
        }
        Ok(Trajectory {
            states,
            dt,
            cone_origin,
            termination: Termination::Completed,
            scheme: None,
        })
    }

    pub fn grid(&self) -> RadialGrid {
        self.states[0].grid
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> &RadialState {
        &self.states[0]
    }

    pub fn last(&self) -> &RadialState {
        self.states.last().expect("non-empty trajectory")
    }

    /// Stored state whose time is within half a frame spacing of `t`.
    pub fn state_at(&self, t: f64) -> Option<&RadialState> {
        let t0 = self.states[0].t;
        let k = ((t - t0) / self.dt).round();
        if k < 0.0 {
            return None;
        }
        let s = self.states.get(k as usize)?;
        ((s.t - t).abs() <= 0.5 * self.dt).then_some(s)
    }

    pub fn blowup(&self) -> Option<BlowupReport> {
        match self.termination {
            Termination::Blowup(b) => Some(b),
            Termination::Completed => None,
        }
    }

    /// Inner radius of the authoritative region at time `t`.
    pub fn authoritative_from(&self, t: f64) -> f64 {
        match self.cone_origin {
            Some(r0) => t.abs() + r0,
            None => self.grid().r_min(),
        }
    }

    /// Appends the states of `later`, which must continue this trajectory.
    pub fn concat(mut self, later: Trajectory) -> Result<Trajectory> {
        let skip = usize::from(
            later
                .states
                .first()
                .is_some_and(|s| (s.t - self.last().t).abs() <= 1e-9 * self.dt),
        );
        let mut states = std::mem::take(&mut self.states);
        states.extend(later.states.into_iter().skip(skip));
        let mut out = Trajectory::new(states, self.dt, self.cone_origin)?;
        out.scheme = self.scheme;
        out.termination = later.termination;
        Ok(out)
    }
}

/// Centered differences inside, second-order one-sided at the ends.
pub fn radial_derivative(f: &[f64], grid: &RadialGrid) -> Result<Vec<f64>> {
    check_len(grid.n, f.len())?;
    let n = grid.n;
    let h = grid.h;
    let mut d = vec![0.0; n];
    if n == 2 {
        let s = (f[1] - f[0]) / h;
        return Ok(vec![s, s]);
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    Ok(d)
}

/// Trapezoid value of `∫ f(r)·4πr² dr` over the grid.
pub fn quad_radial(f: &[f64], grid: &RadialGrid) -> Result<f64> {
    check_len(grid.n, f.len())?;
    let weighted: Vec<f64> = (0..grid.n)
        .map(|i| {
            let r = grid.r(i);
            f[i] * FOUR_PI * r * r
        })
        .collect();
    Ok(integrate_interval(grid, &weighted, grid.r_min, grid.r_max))
}

/// [`quad_radial`] with a half-resolution error estimate.
pub fn quad_radial_measured(f: &[f64], grid: &RadialGrid) -> Result<Measured> {
    let value = quad_radial(f, grid)?;
    let error_bound = match grid.coarsened() {
        Some(coarse) => {
            let fc: Vec<f64> = f.iter().step_by(2).copied().collect();
            (value - quad_radial(&fc, &coarse)?).abs() / 3.0
        }
        None => f64::NAN,
    };
    Ok(Measured { value, error_bound })
}

fn energy_density(state: &RadialState) -> Vec<f64> {
    let ur = radial_derivative(&state.u, &state.grid).expect("state lengths are checked");
    (0..state.grid.n)
        .map(|i| {
            let r = state.grid.r(i);
            FOUR_PI * r * r * (ur[i] * ur[i] + state.ut[i] * state.ut[i])
        })
        .collect()
}

fn check_radius(grid: &RadialGrid, radius: f64) -> Result<()> {
    if grid.contains(radius) {
        Ok(())
    } else {
        Err(LabError::OutsideGrid {
            radius,
            r_min: grid.r_min,
            r_max: grid.r_max,
            note: "the exterior integral is truncated at r_max; choose R inside the grid".into(),
        })
    }
}

/// `∫_{r>R} (u_r² + u_t²) dx` over the grid (no tail completion).
pub fn exterior_energy_sq(state: &RadialState, radius: f64) -> Result<f64> {
    check_radius(&state.grid, radius)?;
    let e = energy_density(state);
    Ok(integrate_interval(&state.grid, &e, radius, state.grid.r_max))
}

/// `‖(u, u_t)‖` in `Ḣ¹ × L²(|x| > R)`, truncated at `r_max`.
pub fn exterior_energy(state: &RadialState, radius: f64) -> Result<f64> {
    Ok(exterior_energy_sq(state, radius)?.sqrt())
}

/// [`exterior_energy`] with a half-resolution error estimate.
pub fn exterior_energy_measured(state: &RadialState, radius: f64) -> Result<Measured> {
    let value = exterior_energy(state, radius)?;
    let error_bound = match state.coarsened() {
        Some(c) => (value - exterior_energy(&c, radius)?).abs() / 3.0,
        None => f64::NAN,
    };
    Ok(Measured { value, error_bound })
}

/// Energy beyond `r_max` if the field continues as `u(r_max)·r_max/r` at rest.
pub fn coulomb_tail_energy_sq(state: &RadialState) -> f64 {
    let n = state.grid.n;
    let u = state.u[n - 1];
    FOUR_PI * state.grid.r_max * u * u
}

/// `E = ∫ (½u_r² + ½u_t² + V(r, u)) dx` over the grid.
pub fn conserved_energy(state: &RadialState, f: &Nonlinearity) -> Result<f64> {
    if !f.has_potential() {
        return Err(LabError::Unsupported(format!(
            "nonlinearity '{}' does not supply a potential",
            f.name()
        )));
    }
    let e = energy_density(state);
    let dens: Vec<f64> = (0..state.grid.n)
        .map(|i| {
            let r = state.grid.r(i);
            let v = f.potential(r, state.u[i]).expect("potential checked above");
            0.5 * e[i] + FOUR_PI * r * r * v
        })
        .collect();
    Ok(integrate_interval(&state.grid, &dens, state.grid.r_min, state.grid.r_max))
}

/// Same functional evaluated on `w = r·u` on a grid from the origin:
/// `4π ∫ (½w_r² + ½w_t² + r²V(r, w/r)) dr - 2π w(r_max)²/r_max`.
pub fn conserved_energy_w_form(state: &RadialState, f: &Nonlinearity) -> Result<f64> {
    if !state.grid.touches_origin() {
        return Err(LabError::Contract("w-form energy needs a grid starting at r = 0".into()));
    }
    if !f.has_potential() {
        return Err(LabError::Unsupported(format!(
            "nonlinearity '{}' does not supply a potential",
            f.name()
        )));
    }
    let w = state.w();
    let wt = state.wt();
    let wr = radial_derivative(&w, &state.grid)?;
    let g = &state.grid;
    let dens: Vec<f64> = (0..g.n)
        .map(|i| {
            let r = g.r(i);
            let v = if i == 0 {
                0.0
            } else {
                r * r * f.potential(r, w[i] / r).expect("potential checked above")
            };
            FOUR_PI * (0.5 * wr[i] * wr[i] + 0.5 * wt[i] * wt[i] + v)
        })
        .collect();
    let wn = w[g.n - 1];
    Ok(integrate_interval(g, &dens, 0.0, g.r_max) - 2.0 * PI * wn * wn / g.r_max)
}
