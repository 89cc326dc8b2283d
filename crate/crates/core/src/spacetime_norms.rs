//! `Y = L⁵_t L¹⁰_x` norms over light-cone regions, dyadic channel sequences
//! and `L¹_t L²_x` source norms.
//!
//! Two routes are provided: over a stored [`Trajectory`] (trapezoid in time
//! over the frames) and over the explicit free wave of a [`RadiationProfile`]
//! (adaptive sampling in time, analytic `M/r` tail in space).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field_core::{integrate_interval, RadialGrid, Trajectory, FOUR_PI};
use crate::linear_radiation::RadiationProfile;
use crate::nonlinearity::Nonlinearity;

/// Space-time region, described at each time by a radial interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionSpec {
    /// All of space at every time.
    Full,
    /// `|x| > |t| + radius`.
    Exterior { radius: f64 },
    /// `|t| + inner < |x| < |t| + outer`.
    Annulus { inner: f64, outer: f64 },
    /// `|t| + radius < |x| < |t| + 2·radius`.
    Channel { radius: f64 },
}

impl RegionSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            RegionSpec::Full => true,
            RegionSpec::Exterior { radius } => radius >= 0.0 && radius.is_finite(),
            RegionSpec::Annulus { inner, outer } => inner >= 0.0 && outer > inner && outer.is_finite(),
            RegionSpec::Channel { radius } => radius > 0.0 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(LabError::Contract(format!("invalid region {self:?}")))
        }
    }

    /// Radial interval `(a, b)` at time `t`; `b` may be infinite.
    pub fn interval(&self, t: f64) -> (f64, f64) {
        let at = t.abs();
        match *self {
            RegionSpec::Full => (0.0, f64::INFINITY),
            RegionSpec::Exterior { radius } => (at + radius, f64::INFINITY),
            RegionSpec::Annulus { inner, outer } => (at + inner, at + outer),
            RegionSpec::Channel { radius } => (at + radius, at + 2.0 * radius),
        }
    }
}

/// A norm value with diagnostics about grid clipping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    /// Some slice of the region extended past `r_max`.
    pub clipped: bool,
    /// Estimate of the missing `Y⁵` mass, assuming the field continues as
    /// `u(r_max)·r_max/r` beyond the grid.
    pub clipped_mass: f64,
}

fn slice_inputs(traj: &Trajectory, region: &RegionSpec) -> Result<RadialGrid> {
    region.validate()?;
    let grid = traj.grid();
    for s in &traj.states {
        let (a, _) = region.interval(s.t);
        if a < grid.r_min() - 1e-12 {
            return Err(LabError::Uncovered(format!(
                "{region:?} at t = {} starts at r = {a}, below the grid's r_min = {}",
                s.t,
                grid.r_min()
            )));
        }
    }
    Ok(grid)
}

fn time_trapezoid(times: &[f64], vals: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(vals.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// `∫ |u|^p 4πr² dr` over `[a, b] ∩ grid` plus the Coulomb-tail estimate of
/// what lies beyond `r_max`.
fn radial_power(grid: &RadialGrid, u: &[f64], p: i32, a: f64, b: f64) -> (f64, f64) {
    let dens: Vec<f64> = (0..grid.n())
        .map(|i| {
            let r = grid.r(i);
            u[i].abs().powi(p) * FOUR_PI * r * r
        })
        .collect();
    let inside = integrate_interval(grid, &dens, a, b);
    let rm = grid.r_max();
    let beyond = if b > rm {
        let m = u[grid.n() - 1].abs() * rm;
        let lo = a.max(rm);
        let q = (p - 3) as f64;
        let tail = |x: f64| if x.is_finite() { x.powf(-q) } else { 0.0 };
        FOUR_PI * m.powi(p) * (tail(lo) - tail(b)) / q
    } else {
        0.0
    };
    (inside, beyond)
}

pub fn y_norm(traj: &Trajectory, region: RegionSpec) -> Result<f64> {
    Ok(y_norm_report(traj, region)?.value)
}

/// `‖χ u‖_{L⁵_t L¹⁰_x}` over the trajectory's span.
pub fn y_norm_report(traj: &Trajectory, region: RegionSpec) -> Result<NormReport> {
    let grid = slice_inputs(traj, &region)?;
    let mut clipped = false;
    let (slices, missing): (Vec<f64>, Vec<f64>) = traj
        .states
        .iter()
        .map(|s| {
            let (a, b) = region.interval(s.t);
            if b > grid.r_max() && a < f64::INFINITY {
                clipped = true;
            }
            let (inside, beyond) = radial_power(&grid, &s.u, 10, a, b);
            (inside.sqrt(), (inside + beyond).sqrt() - inside.sqrt())
        })
        .unzip();
    let times = traj.times();
    let y5 = time_trapezoid(&times, &slices);
    Ok(NormReport {
        value: y5.max(0.0).powf(0.2),
        clipped,
        clipped_mass: time_trapezoid(&times, &missing),
    })
}

/// Per-frame `‖χ u(t)‖_{L¹⁰}⁵`, the integrand of `Y⁵` in time. Nothing is
/// added for the part of the region beyond the grid.
pub fn y_slices(traj: &Trajectory, region: RegionSpec) -> Result<Vec<f64>> {
    let grid = slice_inputs(traj, &region)?;
    Ok(traj
        .states
        .iter()
        .map(|s| {
            let (a, b) = region.interval(s.t);
            radial_power(&grid, &s.u, 10, a, b.min(grid.r_max())).0.sqrt()
        })
        .collect())
}

/// Trapezoid in time of per-frame values over the frames with `t ∈ [t0, t1]`.
pub fn windowed_integral(times: &[f64], vals: &[f64], t0: f64, t1: f64) -> f64 {
    let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= t0 && times[i] <= t1).collect();
    let t: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
    let v: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
    time_trapezoid(&t, &v)
}

/// Channel norms `b_k = ‖χ̃_{2^k} u‖_Y` for `k_min ≤ k ≤ k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelNorms {
    pub ks: Vec<i32>,
    pub b: Vec<f64>,
    pub sum_sq: f64,
    pub clipped: Vec<bool>,
}

impl ChannelNorms {
    fn from_parts(ks: Vec<i32>, parts: Vec<(f64, bool)>) -> Self {
        let (b, clipped): (Vec<f64>, Vec<bool>) = parts.into_iter().unzip();
        let sum_sq = b.iter().map(|x| x * x).sum();
        ChannelNorms {
            ks,
            b,
            sum_sq,
            clipped,
        }
    }

    /// `Σ_{k ≥ k0} b_k⁴` over the computed range.
    pub fn tail_sum_pow4(&self, k0: i32) -> f64 {
        self.ks
            .iter()
            .zip(&self.b)
            .filter(|(k, _)| **k >= k0)
            .map(|(_, b)| b.powi(4))
            .sum()
    }
}

pub fn dyadic_channel_norms(traj: &Trajectory, k_min: i32, k_max: i32) -> Result<ChannelNorms> {
    if k_max < k_min {
        return Err(LabError::Contract(format!("empty channel range {k_min}..={k_max}")));
    }
    let ks: Vec<i32> = (k_min..=k_max).collect();
    let parts = ks
        .par_iter()
        .map(|&k| {
            y_norm_report(traj, RegionSpec::Channel { radius: 2f64.powi(k) }).map(|r| (r.value, r.clipped))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelNorms::from_parts(ks, parts))
}

/// `‖χ F(r, t, u)‖_{L¹_t L²_x}` over the trajectory's span.
pub fn source_l1l2_norm(traj: &Trajectory, f: &Nonlinearity, region: RegionSpec) -> Result<f64> {
    let grid = slice_inputs(traj, &region)?;
    let slices: Vec<f64> = traj
        .states
        .iter()
        .map(|s| {
            let (a, b) = region.interval(s.t);
            let dens: Vec<f64> = (0..grid.n())
                .map(|i| {
                    let r = grid.r(i);
                    let v = f.eval(r, s.t, s.u[i]);
                    v * v * FOUR_PI * r * r
                })
                .collect();
            integrate_interval(&grid, &dens, a, b).sqrt()
        })
        .collect();
    Ok(time_trapezoid(&traj.times(), &slices))
}

/// `‖χ s‖_{L¹_t L²_x}` for a prescribed source sampled at `times` on `grid`.
pub fn prescribed_source_l1l2(
    grid: &RadialGrid,
    times: &[f64],
    source: &dyn Fn(f64, f64) -> f64,
    region: RegionSpec,
) -> Result<f64> {
    region.validate()?;
    let slices: Vec<f64> = times
        .iter()
        .map(|&t| {
            let (a, b) = region.interval(t);
            let dens: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&r| {
                    let v = source(r, t);
                    v * v * FOUR_PI * r * r
                })
                .collect();
            integrate_interval(grid, &dens, a, b).sqrt()
        })
        .collect();
    Ok(time_trapezoid(times, &slices))
}

/// Sampling of the explicit free wave for the profile route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeWaveSampling {
    /// Time integrals run over `[-extent, extent]` (or `[0, extent]`).
    pub time_extent: f64,
    /// Odd number of Simpson nodes in the mapped time variable.
    pub time_samples: usize,
    /// Odd number of Simpson nodes per radial slice.
    pub radial_samples: usize,
    /// Times are spaced as `scale·sinh(x)` with `x` uniform.
    pub time_scale: f64,
    /// Only `t ≥ 0` when set.
    pub forward_only: bool,
}

impl Default for FreeWaveSampling {
    fn default() -> Self {
        FreeWaveSampling {
            time_extent: 400.0,
            time_samples: 2001,
            radial_samples: 129,
            time_scale: 1.0,
            forward_only: false,
        }
    }
}

fn simpson_weights(n: usize) -> Vec<f64> {
    let n = if n.is_multiple_of(2) { n + 1 } else { n.max(3) };
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        })
        .map(|w| w / 3.0)
        .collect()
}

#[inline]
fn free_u(g: &RadiationProfile, r: f64, t: f64) -> f64 {
    if r == 0.0 {
        2.0 * g.value_at(t)
    } else {
        g.integral(t - r, t + r) / r
    }
}

fn free_slice(g: &RadiationProfile, region: &RegionSpec, t: f64, weights: &[f64], reach: f64, mass: f64) -> f64 {
    let (a, b) = region.interval(t);
    // beyond |t| + reach the wave is exactly mass/r
    let c = t.abs() + reach;
    let num_end = b.min(c.max(a));
    let mut acc = 0.0;
    if num_end > a {
        let m = weights.len() - 1;
        let step = (num_end - a) / m as f64;
        for (i, w) in weights.iter().enumerate() {
            let r = a + i as f64 * step;
            let u = free_u(g, r, t);
            acc += w * u.abs().powi(10) * FOUR_PI * r * r;
        }
        acc *= step;
    }
    let lo = a.max(c);
    if b > lo && mass != 0.0 {
        let tail = |x: f64| if x.is_finite() { x.powi(-7) } else { 0.0 };
        acc += FOUR_PI * mass.abs().powi(10) * (tail(lo) - tail(b)) / 7.0;
    }
    acc.sqrt()
}

/// `‖χ u_L‖_Y` for the free wave with profile `G`, sampled directly from the
/// propagator.
pub fn free_wave_y_norm(g: &RadiationProfile, region: RegionSpec, sampling: &FreeWaveSampling) -> Result<f64> {
    region.validate()?;
    let weights_r = simpson_weights(sampling.radial_samples);
    let weights_t = simpson_weights(sampling.time_samples);
    let reach = g.s_min().abs().max(g.s_max().abs());
    let mass = g.total_integral();
    let tau = sampling.time_scale;
    let x_max = (sampling.time_extent / tau).asinh();
    let x_min = if sampling.forward_only { 0.0 } else { -x_max };
    let m = weights_t.len() - 1;
    let dx = (x_max - x_min) / m as f64;
    let y5: f64 = weights_t
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let x = x_min + i as f64 * dx;
            let t = tau * x.sinh();
            w * tau * x.cosh() * free_slice(g, &region, t, &weights_r, reach, mass)
        })
        .sum::<f64>()
        * dx;
    Ok(y5.max(0.0).powf(0.2))
}

/// Channel norms of the free wave from the propagator.
pub fn free_wave_channel_norms(
    g: &RadiationProfile,
    k_min: i32,
    k_max: i32,
    sampling: &FreeWaveSampling,
) -> Result<ChannelNorms> {
    if k_max < k_min {
        return Err(LabError::Contract(format!("empty channel range {k_min}..={k_max}")));
    }
    let ks: Vec<i32> = (k_min..=k_max).collect();
    let parts = ks
        .par_iter()
        .map(|&k| {
            free_wave_y_norm(g, RegionSpec::Channel { radius: 2f64.powi(k) }, sampling).map(|v| (v, false))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelNorms::from_parts(ks, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::RadialState;
    use crate::linear_radiation::{bump, data_from_profile_on, linear_evolve};
    use crate::nonlinear_evolve::evolve;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn static_traj(grid: RadialGrid, t0: f64, t1: f64, frames: usize, f: impl Fn(f64) -> f64) -> Trajectory {
        let dt = (t1 - t0) / (frames - 1) as f64;
        let states = (0..frames)
            .map(|k| RadialState::from_fn(grid, t0 + k as f64 * dt, |r| (f(r), 0.0)).unwrap())
            .collect();
        Trajectory::new(states, dt, None).unwrap()
    }

    #[test]
    fn zero_trajectory_has_zero_norms() {
        let grid = RadialGrid::new(0.0, 10.0, 101).unwrap();
        let tr = static_traj(grid, 0.0, 1.0, 11, |_| 0.0);
        assert_eq!(y_norm(&tr, RegionSpec::Full).unwrap(), 0.0);
        let ch = dyadic_channel_norms(&tr, -2, 1).unwrap();
        assert!(ch.b.iter().all(|b| *b == 0.0));
        assert_eq!(source_l1l2_norm(&tr, &Nonlinearity::defocusing_quintic(), RegionSpec::Full).unwrap(), 0.0);
    }

    #[test]
    fn shell_indicator_closed_form() {
        let grid = RadialGrid::new(0.0, 3.0, 30_001).unwrap();
        let tr = static_traj(grid, 0.0, 1.0, 3, |r| if (1.0..=2.0).contains(&r) { 1.0 } else { 0.0 });
        let y = y_norm(&tr, RegionSpec::Full).unwrap();
        let expect = (FOUR_PI * 7.0 / 3.0).powf(0.1);
        assert!((expect - 1.402).abs() < 1e-3);
        assert!((y - expect).abs() < 0.01 * expect, "{y}");
    }

    fn coulomb_cap_exterior_closed_form() -> f64 {
        // slice (4π/(7(1+|t|)⁷))^{1/2}, integrated over ℝ
        (2.0 * (FOUR_PI / 7.0).sqrt() / 2.5).powf(0.2)
    }

    #[test]
    fn static_coulomb_cap_exterior() {
        let grid = RadialGrid::new(0.0, 200.0, 20_001).unwrap();
        let tr = static_traj(grid, -60.0, 60.0, 2401, |r| 1.0f64.min(1.0 / r));
        let rep = y_norm_report(&tr, RegionSpec::Exterior { radius: 1.0 }).unwrap();
        assert!(rep.clipped && rep.clipped_mass > 0.0);
        let exact = coulomb_cap_exterior_closed_form();
        assert!((rep.value - exact).abs() < 0.01 * exact, "{} {exact}", rep.value);

        // Monte-Carlo over (t, r) with 10⁶ samples, r-density ∝ (r - a)... uniform on a box
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = 1_000_000;
        let t_max = 60.0;
        let mut acc = 0.0;
        for _ in 0..samples {
            // t uniform, then inner integral by importance sampling r = a + e with e ~ Exp(1)·scale
            let t: f64 = rng.gen_range(-t_max..t_max);
            let a = t.abs() + 1.0;
            let x: f64 = rng.gen_range(0.0..1.0);
            // r = a / x^{1/7} samples density 7 a⁷ r⁻⁸ on (a, ∞)
            let r = a / x.powf(1.0 / 7.0);
            let dens = 7.0 * a.powi(7) * r.powi(-8);
            let slice_sq = FOUR_PI * r.powi(-8) / dens;
            acc += slice_sq.sqrt() * 2.0 * t_max;
        }
        let mc = (acc / samples as f64).powf(0.2);
        assert!((rep.value - mc).abs() < 0.05 * mc, "{} {mc}", rep.value);
    }

    #[test]
    fn quintic_source_is_y_norm_to_the_fifth() {
        let grid = RadialGrid::new(0.0, 40.0, 4001).unwrap();
        let tr = static_traj(grid, 0.0, 1.0, 51, |r| 1.0f64.min(1.0 / r));
        let f = Nonlinearity::defocusing_quintic();
        for region in [RegionSpec::Full, RegionSpec::Exterior { radius: 0.5 }, RegionSpec::Channel { radius: 2.0 }] {
            let s = source_l1l2_norm(&tr, &f, region).unwrap();
            let y = y_norm(&tr, region).unwrap();
            assert!((s - y.powi(5)).abs() <= 0.02 * y.powi(5), "{region:?} {s} {}", y.powi(5));
        }
    }

    fn wave(seed: u64) -> Trajectory {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: f64 = rng.gen_range(-1.0..1.0);
        let g = RadiationProfile::symmetric(30.0, 6001, |s| 0.5 * bump((s - c) / 1.5) - 0.3 * bump((s + c) / 0.7)).unwrap();
        let grid = RadialGrid::new(0.0, 20.0, 801).unwrap();
        let data = data_from_profile_on(&g, &grid);
        evolve(&data, &Nonlinearity::focusing_quintic(), 8.0, 0.0125).unwrap()
    }

    #[test]
    fn region_additivity_and_monotonicity() {
        for seed in 0..3 {
            let tr = wave(seed);
            let (r, big) = (0.5, 2.0);
            let y_in = y_norm(&tr, RegionSpec::Exterior { radius: r }).unwrap().powi(5);
            let y_ann = y_norm(&tr, RegionSpec::Annulus { inner: r, outer: big }).unwrap().powi(5);
            let y_out = y_norm(&tr, RegionSpec::Exterior { radius: big }).unwrap().powi(5);
            assert!(y_ann + y_out >= y_in * (1.0 - 1e-9));
            assert!(y_in >= y_ann.max(y_out) * (1.0 - 1e-9));
            assert!(y_norm(&tr, RegionSpec::Full).unwrap().powi(5) >= y_in * (1.0 - 1e-9));
        }
    }

    #[test]
    fn channels_tile_the_exterior() {
        let tr = wave(4);
        let ch = dyadic_channel_norms(&tr, -3, 3).unwrap();
        let cover: f64 = ch.b.iter().map(|b| b.powi(5)).sum();
        let ext = y_norm(&tr, RegionSpec::Exterior { radius: 0.125 }).unwrap().powi(5);
        // the largest channel stops at 16 + |t|, beyond which the wave has left
        assert!(cover >= ext * 0.98, "{cover} {ext}");
    }

    #[test]
    fn quintic_source_identity_on_waves() {
        let tr = wave(5);
        let f = Nonlinearity::focusing_quintic();
        for region in [RegionSpec::Full, RegionSpec::Exterior { radius: 1.0 }] {
            let s = source_l1l2_norm(&tr, &f, region).unwrap();
            let y = y_norm(&tr, region).unwrap().powi(5);
            assert!(s <= y * 1.02 && s >= y * 0.98, "{s} {y}");
        }
    }

    #[test]
    fn uncovered_region_is_an_error() {
        let grid = RadialGrid::new(1.0, 10.0, 91).unwrap();
        let tr = static_traj(grid, 0.0, 1.0, 3, |_| 1.0);
        assert!(matches!(y_norm(&tr, RegionSpec::Full), Err(LabError::Uncovered(_))));
        assert!(y_norm(&tr, RegionSpec::Exterior { radius: 1.0 }).is_ok());
    }

    #[test]
    fn profile_route_matches_trajectory_route() {
        let g = RadiationProfile::symmetric(10.0, 4001, |s| bump((s - 1.5) / 0.5)).unwrap();
        let grid = RadialGrid::new(0.0, 40.0, 8001).unwrap();
        let dt = 0.02;
        let states: Vec<RadialState> = (0..=1000).map(|k| linear_evolve(&g, k as f64 * dt, &grid)).collect();
        let tr = Trajectory::new(states, dt, None).unwrap();
        let sampling = FreeWaveSampling {
            time_extent: 20.0,
            forward_only: true,
            ..FreeWaveSampling::default()
        };
        for region in [RegionSpec::Channel { radius: 0.25 }, RegionSpec::Exterior { radius: 1.0 }] {
            let a = y_norm(&tr, region).unwrap();
            let b = free_wave_y_norm(&g, region, &sampling).unwrap();
            assert!((a - b).abs() < 0.01 * b, "{region:?} {a} {b}");
        }
    }

    #[test]
    fn free_wave_norm_stabilises_in_span() {
        let g = RadiationProfile::symmetric(10.0, 4001, |s| bump((s - 1.0) / 0.8) + 0.5 * bump((s + 2.0) / 1.0)).unwrap();
        let region = RegionSpec::Exterior { radius: 0.5 };
        let s1 = FreeWaveSampling {
            time_extent: 200.0,
            ..FreeWaveSampling::default()
        };
        let s2 = FreeWaveSampling {
            time_extent: 400.0,
            ..FreeWaveSampling::default()
        };
        let a = free_wave_y_norm(&g, region, &s1).unwrap();
        let b = free_wave_y_norm(&g, region, &s2).unwrap();
        assert!((a - b).abs() < 0.01 * b, "{a} {b}");
    }
}
