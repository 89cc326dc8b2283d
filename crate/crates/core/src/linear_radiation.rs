//! Radiation profiles and the explicit radial free propagator
//! `u(r, t) = (1/r)∫_{t-r}^{t+r} G(s) ds`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field_core::{
    coulomb_tail_energy_sq, exterior_energy_sq, radial_derivative, RadialGrid, RadialState,
};

/// Relative round-trip residual above which [`profile_from_data`] warns.
pub const ROUND_TRIP_WARNING: f64 = 1e-2;

/// `G(s)` sampled on a uniform grid over `[s_min, s_max]`, zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct RadiationProfile {
    s_min: f64,
    s_max: f64,
    values: Vec<f64>,
    h: f64,
    // cumulative trapezoid integral from s_min
    cum: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProfileSpec {
    s_min: f64,
    s_max: f64,
    values: Vec<f64>,
}

impl TryFrom<ProfileSpec> for RadiationProfile {
    type Error = LabError;
    fn try_from(p: ProfileSpec) -> Result<Self> {
        RadiationProfile::new(p.s_min, p.s_max, p.values)
    }
}

impl From<RadiationProfile> for ProfileSpec {
    fn from(p: RadiationProfile) -> Self {
        ProfileSpec {
            s_min: p.s_min,
            s_max: p.s_max,
            values: p.values,
        }
    }
}

impl RadiationProfile {
    pub fn new(s_min: f64, s_max: f64, values: Vec<f64>) -> Result<Self> {
        if !(s_max > s_min) || !s_min.is_finite() || !s_max.is_finite() {
            return Err(LabError::Contract(format!(
                "profile range [{s_min}, {s_max}] is empty or infinite"
            )));
        }
        if values.len() < 2 {
            return Err(LabError::Contract("profile needs at least two samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Contract("profile contains non-finite samples".into()));
        }
        let h = (s_max - s_min) / (values.len() - 1) as f64;
        let mut cum = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for pair in values.windows(2) {
            acc += 0.5 * h * (pair[0] + pair[1]);
            cum.push(acc);
        }
        Ok(RadiationProfile {
            s_min,
            s_max,
            values,
            h,
            cum,
        })
    }

    pub fn from_fn(s_min: f64, s_max: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(LabError::Contract("profile needs at least two samples".into()));
        }
        let h = (s_max - s_min) / (n - 1) as f64;
        let values = (0..n).map(|i| f(s_min + i as f64 * h)).collect();
        RadiationProfile::new(s_min, s_max, values)
    }

    /// Profile on `[-extent, extent]`.
    pub fn symmetric(extent: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        RadiationProfile::from_fn(-extent, extent, n, f)
    }

    pub fn zeros(s_min: f64, s_max: f64, n: usize) -> Result<Self> {
        RadiationProfile::new(s_min, s_max, vec![0.0; n])
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn s(&self, i: usize) -> f64 {
        if i + 1 == self.values.len() {
            self.s_max
        } else {
            self.s_min + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.s(i)).collect()
    }

    #[inline]
    fn locate(&self, s: f64) -> (usize, f64) {
        let x = (s - self.s_min) / self.h;
        let i = (x.floor().max(0.0) as usize).min(self.len() - 2);
        (i, x - i as f64)
    }

    /// Linear interpolation, zero outside the declared range.
    #[inline]
    pub fn value_at(&self, s: f64) -> f64 {
        if s < self.s_min || s > self.s_max {
            return 0.0;
        }
        let (i, f) = self.locate(s);
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    #[inline]
    fn antiderivative(&self, s: f64) -> f64 {
        if s <= self.s_min {
            return 0.0;
        }
        if s >= self.s_max {
            return *self.cum.last().expect("non-empty");
        }
        let (i, f) = self.locate(s);
        let d = f * self.h;
        let slope = (self.values[i + 1] - self.values[i]) / self.h;
        self.cum[i] + d * self.values[i] + 0.5 * slope * d * d
    }

    /// `∫_a^b G` of the interpolant.
    #[inline]
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.antiderivative(b) - self.antiderivative(a)
    }

    pub fn total_integral(&self) -> f64 {
        *self.cum.last().expect("non-empty")
    }

    /// Trapezoid value of `∫ G²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_norm_sq_on(self.s_min, self.s_max)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Trapezoid value of `∫_a^b G²` (partial cells interpolated).
    pub fn l2_norm_sq_on(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.s_min);
        let b = b.min(self.s_max);
        if !(b > a) {
            return 0.0;
        }
        let sq = |s: f64| {
            let v = self.value_at(s);
            v * v
        };
        let n = self.len();
        let ia = (((a - self.s_min) / self.h).floor() as usize).min(n - 2);
        let ib = (((b - self.s_min) / self.h).ceil() as usize).clamp(ia + 1, n - 1);
        if ib == ia + 1 {
            return 0.5 * (b - a) * (sq(a) + sq(b));
        }
        let v2 = |i: usize| self.values[i] * self.values[i];
        let mut acc = 0.5 * (self.s(ia + 1) - a) * (sq(a) + v2(ia + 1));
        for i in ia + 1..ib - 1 {
            acc += 0.5 * self.h * (v2(i) + v2(i + 1));
        }
        acc + 0.5 * (b - self.s(ib - 1)) * (v2(ib - 1) + sq(b))
    }

    /// `∫_a^b |G|` by the trapezoid rule on the nodes inside `[a, b]`.
    pub fn l1_norm_on(&self, a: f64, b: f64) -> f64 {
        let abs: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        RadiationProfile::new(self.s_min, self.s_max, abs)
            .map(|p| p.integral(a, b))
            .unwrap_or(0.0)
    }

    /// `L²` mass outside `[a, b]`, i.e. what an operation restricted to that
    /// window cannot see.
    pub fn unseen_mass(&self, a: f64, b: f64) -> f64 {
        (self.l2_norm_sq() - self.l2_norm_sq_on(a, b)).max(0.0)
    }

    /// Samples at nodes outside `[a, b]` set to zero.
    pub fn restricted(&self, a: f64, b: f64) -> RadiationProfile {
        let values = (0..self.len())
            .map(|i| {
                let s = self.s(i);
                if s >= a && s <= b {
                    self.values[i]
                } else {
                    0.0
                }
            })
            .collect();
        RadiationProfile::new(self.s_min, self.s_max, values).expect("same shape")
    }

    /// Interpolated onto another uniform grid.
    pub fn resampled(&self, s_min: f64, s_max: f64, n: usize) -> Result<RadiationProfile> {
        RadiationProfile::from_fn(s_min, s_max, n, |s| self.value_at(s))
    }

    pub fn same_grid(&self, other: &RadiationProfile) -> bool {
        self.len() == other.len() && self.s_min == other.s_min && self.s_max == other.s_max
    }

    /// `a·self + b·other`; `other` is interpolated if the grids differ.
    pub fn combine(&self, a: f64, other: &RadiationProfile, b: f64) -> RadiationProfile {
        let values = if self.same_grid(other) {
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect()
        } else {
            (0..self.len())
                .map(|i| a * self.values[i] + b * other.value_at(self.s(i)))
                .collect()
        };
        RadiationProfile::new(self.s_min, self.s_max, values).expect("finite combination")
    }

    pub fn scaled(&self, a: f64) -> RadiationProfile {
        let values = self.values.iter().map(|v| a * v).collect();
        RadiationProfile::new(self.s_min, self.s_max, values).expect("finite scaling")
    }

    /// `s ↦ G(-s)` on the mirrored grid.
    pub fn reflected(&self) -> RadiationProfile {
        let values = self.values.iter().rev().copied().collect();
        RadiationProfile::new(-self.s_max, -self.s_min, values).expect("same shape")
    }

    /// `L²` distance, evaluated on `self`'s nodes.
    pub fn l2_distance(&self, other: &RadiationProfile) -> f64 {
        self.combine(1.0, other, -1.0).l2_norm()
    }

    pub fn l2_distance_on(&self, other: &RadiationProfile, a: f64, b: f64) -> f64 {
        self.combine(1.0, other, -1.0).l2_norm_sq_on(a, b).sqrt()
    }
}

/// Free wave with profile `G` at time `t`, sampled on `grid`.
pub fn linear_evolve(g: &RadiationProfile, t: f64, grid: &RadialGrid) -> RadialState {
    let hs = g.spacing();
    let (u, ut) = grid
        .nodes()
        .into_iter()
        .map(|r| {
            if r == 0.0 {
                (
                    2.0 * g.value_at(t),
                    (g.value_at(t + hs) - g.value_at(t - hs)) / hs,
                )
            } else {
                (
                    g.integral(t - r, t + r) / r,
                    (g.value_at(t + r) - g.value_at(t - r)) / r,
                )
            }
        })
        .unzip();
    RadialState {
        grid: *grid,
        u,
        ut,
        t,
    }
}

/// Radial grid from the origin covering the profile range at its spacing.
pub fn natural_grid(g: &RadiationProfile) -> RadialGrid {
    let reach = g.s_min().abs().max(g.s_max().abs());
    RadialGrid::with_spacing(0.0, reach, g.spacing()).expect("profile spacing is positive")
}

/// Initial data `(u₀, u₁)` with radiation profile `G`:
/// `u₀ = (1/r)∫_{-r}^{r} G`, `u₁ = (G(r) - G(-r))/r`.
pub fn data_from_profile(g: &RadiationProfile) -> RadialState {
    linear_evolve(g, 0.0, &natural_grid(g))
}

pub fn data_from_profile_on(g: &RadiationProfile, grid: &RadialGrid) -> RadialState {
    linear_evolve(g, 0.0, grid)
}

fn invert(state: &RadialState) -> Result<RadiationProfile> {
    let grid = state.grid;
    if !grid.touches_origin() {
        return Err(LabError::Contract(
            "profile inversion needs data on a grid starting at r = 0".into(),
        ));
    }
    let n = grid.n();
    let w = state.w();
    let wr = radial_derivative(&w, &grid)?;
    let mut values = vec![0.0; 2 * n - 1];
    for i in 0..n {
        let rut = grid.r(i) * state.ut[i];
        values[n - 1 + i] = 0.5 * (wr[i] + rut);
        values[n - 1 - i] = 0.5 * (wr[i] - rut);
    }
    RadiationProfile::new(-grid.r_max(), grid.r_max(), values)
}

/// Relative `Ḣ¹ × L²` distance between the data and its re-synthesis.
pub fn round_trip_residual(state: &RadialState) -> Result<f64> {
    let g = invert(state)?;
    let back = data_from_profile_on(&g, &state.grid);
    let diff = back.sub(state)?;
    let num = exterior_energy_sq(&diff, state.grid.r_min())?;
    let den = exterior_energy_sq(state, state.grid.r_min())?;
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

/// `G(r) = ½[(r u₀)' + r u₁]`, `G(-r) = ½[(r u₀)' - r u₁]` on `[-r_max, r_max]`.
pub fn profile_from_data(state: &RadialState) -> Result<RadiationProfile> {
    let g = invert(state)?;
    let residual = round_trip_residual(state)?;
    if residual > ROUND_TRIP_WARNING {
        log::warn!(
            "profile round-trip residual {residual:.3e} exceeds {ROUND_TRIP_WARNING}: grid too coarse for the data"
        );
    }
    Ok(g)
}

/// `G₊(s) = -G₋(-s)`.
pub fn plus_profile(gm: &RadiationProfile) -> RadiationProfile {
    gm.reflected().scaled(-1.0)
}

/// `8π‖G‖²`, the squared `Ḣ¹ × L²` norm of the data the profile generates.
pub fn profile_energy(g: &RadiationProfile) -> f64 {
    8.0 * PI * g.l2_norm_sq()
}

/// `‖(u₀, u₁)‖²` on the grid plus the Coulomb completion beyond `r_max`.
pub fn data_energy_sq(state: &RadialState) -> f64 {
    exterior_energy_sq(state, state.grid.r_min()).expect("r_min is on the grid")
        + coulomb_tail_energy_sq(state)
}

/// `(1 - x²)⁴` on `|x| < 1`.
pub fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        let y = 1.0 - x * x;
        let y2 = y * y;
        y2 * y2
    } else {
        0.0
    }
}

/// Recipe for seeded random smooth profiles: a sum of polynomial bumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpRecipe {
    /// Bump centres and supports stay inside this interval.
    pub support: (f64, f64),
    pub bumps: usize,
    /// Range of bump half-widths.
    pub half_width: (f64, f64),
}

impl Default for BumpRecipe {
    fn default() -> Self {
        BumpRecipe {
            support: (-4.0, 4.0),
            bumps: 3,
            half_width: (0.5, 1.5),
        }
    }
}

/// Random profile on `[-extent, extent]` with `n` samples, normalised so that
/// `profile_energy = energy` when `energy` is given.
pub fn random_bump_profile(
    seed: u64,
    recipe: &BumpRecipe,
    extent: f64,
    n: usize,
    energy: Option<f64>,
) -> Result<RadiationProfile> {
    let (lo, hi) = recipe.support;
    let (wmin, wmax) = recipe.half_width;
    if !(hi > lo) || !(wmax >= wmin) || !(wmin > 0.0) || 2.0 * wmin > hi - lo {
        return Err(LabError::Contract(format!("invalid bump recipe {recipe:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = Vec::with_capacity(recipe.bumps);
    for _ in 0..recipe.bumps {
        let w = rng.gen_range(wmin..=wmax).min(0.5 * (hi - lo));
        let c = rng.gen_range(lo + w..=hi - w);
        let a = rng.gen_range(0.3..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        parts.push((a, c, w));
    }
    let g = RadiationProfile::symmetric(extent, n, |s| {
        parts.iter().map(|&(a, c, w)| a * bump((s - c) / w)).sum()
    })?;
    Ok(match energy {
        Some(e) => {
            let e0 = profile_energy(&g);
            if e0 > 0.0 {
                g.scaled((e / e0).sqrt())
            } else {
                g
            }
        }
        None => g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::FOUR_PI;
    use proptest::prelude::*;

    fn half_indicator(n: usize) -> RadiationProfile {
        // nodes land on ±1
        RadiationProfile::symmetric(4.0, n, |s| if s.abs() <= 1.0 { 0.5 } else { 0.0 }).unwrap()
    }

    #[test]
    fn zero_profile_gives_zero_data() {
        let g = RadiationProfile::zeros(-3.0, 3.0, 61).unwrap();
        let d = data_from_profile(&g);
        assert!(d.u.iter().chain(&d.ut).all(|v| *v == 0.0));
        let back = profile_from_data(&d).unwrap();
        assert!(back.values().iter().all(|v| *v == 0.0));
        assert_eq!(profile_energy(&g), 0.0);
        assert!(plus_profile(&g).values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn half_indicator_data() {
        let g = half_indicator(801);
        let d = data_from_profile(&g);
        for (i, r) in d.grid.nodes().into_iter().enumerate() {
            // the interpolant ramps over one cell at |s| = 1
            // the jump at |s| = 1 adds h/4 on each side
            assert!((d.u[i] - 1.0f64.min(1.0 / r.max(1e-300))).abs() <= 0.5 * g.spacing() / r.max(1.0) + 1e-12, "r={r}");
            if (r - 1.0).abs() > 2.0 * g.spacing() {
                assert!(d.ut[i].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn odd_profile_data() {
        let g = RadiationProfile::symmetric(3.0, 601, |s| if s.abs() <= 1.0 { s } else { 0.0 }).unwrap();
        let d = data_from_profile(&g);
        for (i, r) in d.grid.nodes().into_iter().enumerate() {
            assert!(d.u[i].abs() < 1e-12);
            if (r - 1.0).abs() > 2.0 * g.spacing() {
                let expect = if r < 1.0 { 2.0 } else { 0.0 };
                assert!((d.ut[i] - expect).abs() < 1e-10, "r={r} {}", d.ut[i]);
            }
        }
    }

    #[test]
    fn inversion_of_coulomb_cap() {
        let grid = RadialGrid::new(0.0, 4.0, 401).unwrap();
        let d = RadialState::from_fn(grid, 0.0, |r| (1.0f64.min(1.0 / r), 0.0)).unwrap();
        let g = profile_from_data(&d).unwrap();
        for (i, s) in g.nodes().into_iter().enumerate() {
            if (s.abs() - 1.0).abs() > 2.0 * g.spacing() {
                let expect = if s.abs() < 1.0 { 0.5 } else { 0.0 };
                assert!((g.values()[i] - expect).abs() < 1e-12, "s={s}");
            }
        }
    }

    #[test]
    fn inversion_of_odd_velocity() {
        let grid = RadialGrid::new(0.0, 4.0, 401).unwrap();
        let d = RadialState::from_fn(grid, 0.0, |r| (0.0, if r < 1.0 { 2.0 } else { 0.0 })).unwrap();
        let g = profile_from_data(&d).unwrap();
        for (i, s) in g.nodes().into_iter().enumerate() {
            if (s.abs() - 1.0).abs() > 2.0 * g.spacing() {
                let expect = if s.abs() < 1.0 { s } else { 0.0 };
                assert!((g.values()[i] - expect).abs() < 1e-12, "s={s}");
            }
        }
    }

    #[test]
    fn propagator_arithmetic() {
        let g = half_indicator(8001);
        let grid = RadialGrid::new(0.0, 20.0, 2001).unwrap();
        let s = linear_evolve(&g, 10.0, &grid);
        assert!((s.u_at(10.0) - 0.05).abs() < g.spacing() / 10.0);
        let d0 = data_from_profile_on(&g, &grid);
        assert_eq!(linear_evolve(&g, 0.0, &grid), d0);
    }

    #[test]
    fn isometry_constant_closed_form() {
        // (min(1, 1/r), 0) has energy 4π and profile ½·1[-1,1]
        let g = half_indicator(8001);
        assert!((profile_energy(&g) - FOUR_PI).abs() < 1e-2);
        let grid = RadialGrid::new(0.0, 4.0, 40_001).unwrap();
        let d = RadialState::from_fn(grid, 0.0, |r| (1.0f64.min(1.0 / r), 0.0)).unwrap();
        assert!((data_energy_sq(&d) - FOUR_PI).abs() < 1e-2 * FOUR_PI);
    }

    #[test]
    fn plus_profile_symmetries() {
        let even = RadiationProfile::symmetric(2.0, 41, |s| (-s * s).exp()).unwrap();
        let p = plus_profile(&even);
        for (a, b) in p.values().iter().zip(even.values()) {
            assert!((a + b).abs() < 1e-15);
        }
        let odd = RadiationProfile::symmetric(2.0, 41, |s| if s.abs() <= 1.0 { s } else { 0.0 }).unwrap();
        for (a, b) in plus_profile(&odd).values().iter().zip(odd.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn integral_matches_trapezoid_at_nodes() {
        let g = RadiationProfile::symmetric(2.0, 41, |s| s.cos()).unwrap();
        let whole = g.integral(-2.0, 2.0);
        assert!((whole - g.total_integral()).abs() < 1e-14);
        assert!((g.integral(-10.0, 10.0) - whole).abs() < 1e-14);
        assert!((whole - 2.0 * 2.0f64.sin()).abs() < 1e-2);
    }

    #[test]
    fn generator_is_seeded_and_normalised() {
        let r = BumpRecipe::default();
        let a = random_bump_profile(3, &r, 6.0, 1201, Some(1.0)).unwrap();
        let b = random_bump_profile(3, &r, 6.0, 1201, Some(1.0)).unwrap();
        assert_eq!(a, b);
        assert!((profile_energy(&a) - 1.0).abs() < 1e-12);
        assert!(a.unseen_mass(-4.0, 4.0) < 1e-20);
    }

    fn smooth(seed: u64) -> RadiationProfile {
        random_bump_profile(seed, &BumpRecipe::default(), 5.0, 1001, None).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn plus_profile_is_an_involution(seed in 0u64..1000) {
            let g = smooth(seed);
            prop_assert_eq!(plus_profile(&plus_profile(&g)), g);
        }

        #[test]
        fn group_law(seed in 0u64..1000, t1 in -2.0f64..2.0, t2 in -2.0f64..2.0) {
            // evolving by t1 then re-expanding and evolving by t2 equals evolving by t1 + t2
            let g = RadiationProfile::symmetric(12.0, 4801, |s| smooth(seed).value_at(s)).unwrap();
            let grid = RadialGrid::new(0.0, 6.0, 601).unwrap();
            let direct = linear_evolve(&g, t1 + t2, &grid);
            let big = RadialGrid::new(0.0, 12.0, 4801).unwrap();
            let mid = linear_evolve(&g, t1, &big);
            let shifted = profile_from_data(&mid).unwrap();
            let via = linear_evolve(&shifted, t2, &grid);
            let err = direct.sub(&via).unwrap();
            let scale = exterior_energy_sq(&direct, 0.0).unwrap().sqrt().max(1e-12);
            prop_assert!(exterior_energy_sq(&err, 0.0).unwrap().sqrt() < 1e-2 * scale);
        }

        #[test]
        fn free_energy_constant_in_time(seed in 0u64..1000, t in 0.0f64..6.0) {
            let g = smooth(seed);
            let grid = RadialGrid::new(0.0, 12.0, 2401).unwrap();
            let e0 = data_energy_sq(&linear_evolve(&g, 0.0, &grid));
            let et = data_energy_sq(&linear_evolve(&g, t, &grid));
            prop_assert!((e0 - et).abs() < 1e-2 * e0);
        }

        #[test]
        fn isometry_holds_for_random_profiles(seed in 0u64..1000) {
            let g = random_bump_profile(seed, &BumpRecipe::default(), 5.0, 4097, None).unwrap();
            let pe = profile_energy(&g);
            let de = data_energy_sq(&data_from_profile(&g));
            prop_assert!((pe - de).abs() <= 1e-2 * pe);
        }
    }

    #[test]
    fn far_field_flux_decreases() {
        // ∫_{r>t+R} |G₊(r - t) - r·u_t|² dr = ∫_{s>2t+R} |G|², which vanishes once 2t + R passes the support
        let g = RadiationProfile::symmetric(20.0, 8001, |s| bump((s - 0.5) / 1.5) - 0.5 * bump((s + 1.0) / 0.7)).unwrap();
        let gp = plus_profile(&g);
        let grid = RadialGrid::new(0.0, 20.0, 8001).unwrap();
        let radius = 0.25;
        let flux = |t: f64| {
            let st = linear_evolve(&g, t, &grid);
            let vals: Vec<f64> = grid
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, &r)| if r > t + radius { (gp.value_at(r - t) - r * st.ut[i]).powi(2) } else { 0.0 })
                .collect();
            vals.iter().sum::<f64>() * grid.h()
        };
        let f: Vec<f64> = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|&t| flux(t)).collect();
        assert!(f[0] > 0.0);
        let floor = 1e-20 * f[0];
        assert!(f.windows(2).all(|p| p[1] <= p[0].max(floor)), "{f:?}");
        assert!(f[0] > f[1] && f[1] > f[2], "{f:?}");
        assert!(f[5] < floor, "{f:?}");
    }
}
