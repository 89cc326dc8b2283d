//! Property suites behind `verify`: seeded random profiles, one table row per
//! checked quantity, exit 4 when any row fails.

use std::path::PathBuf;

use exterior_wave_core::field_core::{conserved_energy, RadialGrid};
use exterior_wave_core::io::{fmt_f64, write_table};
use exterior_wave_core::linear_radiation::{
    data_energy_sq, data_from_profile, data_from_profile_on, profile_energy, random_bump_profile, round_trip_residual,
    BumpRecipe, ROUND_TRIP_WARNING,
};
use exterior_wave_core::nonlinear_evolve::{evolve_with, EvolveOptions, DEFAULT_CFL};
use exterior_wave_core::nonlinearity::Nonlinearity;
use exterior_wave_core::spacetime_norms::{free_wave_channel_norms, FreeWaveSampling};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{CliError, CliResult};
use crate::run::Run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Decay,
    Isometry,
    Conservation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub out_dir: PathBuf,
    /// Seeds `seed..seed + cases` feed the profile generator.
    pub seed: u64,
    pub cases: u64,
    pub isometry_tolerance: f64,
    /// Allowed relative drift of the conserved energy over `conservation_time`.
    pub conservation_tolerance: f64,
    pub conservation_time: f64,
    /// Profiles are scaled to this energy before a defocusing run.
    pub conservation_energy: f64,
    pub conservation_n: usize,
    /// Allowed deviation of the fine-scale channel exponent from 1/10.
    pub exponent_tolerance: f64,
    /// Half width of the relative band for `Σ b_k² / E`.
    pub l2_band: f64,
    pub sampling: FreeWaveSampling,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            out_dir: PathBuf::from("out"),
            seed: 0,
            cases: 4,
            isometry_tolerance: 1e-2,
            conservation_tolerance: 5e-3,
            conservation_time: 10.0,
            conservation_energy: 1.0,
            conservation_n: 2001,
            exponent_tolerance: 1e-2,
            l2_band: 0.5,
            sampling: FreeWaveSampling::default(),
        }
    }
}

struct Row {
    suite: &'static str,
    case: String,
    quantity: &'static str,
    value: f64,
    tolerance: String,
    pass: bool,
}

impl Row {
    fn cells(&self) -> Vec<String> {
        vec![
            self.suite.to_string(),
            self.case.clone(),
            self.quantity.to_string(),
            fmt_f64(self.value),
            self.tolerance.clone(),
            self.pass.to_string(),
        ]
    }
}

fn seeds(cfg: &VerifyConfig) -> Vec<u64> {
    (cfg.seed..cfg.seed + cfg.cases).collect()
}

fn isometry(cfg: &VerifyConfig) -> CliResult<Vec<Row>> {
    let per_case: Vec<CliResult<Vec<Row>>> = seeds(cfg)
        .par_iter()
        .map(|&seed| {
            let g = random_bump_profile(seed, &BumpRecipe::default(), 8.0, 8192, None)?;
            let data = data_from_profile(&g);
            let e = profile_energy(&g);
            let gap = (data_energy_sq(&data) - e).abs() / e;
            let back = round_trip_residual(&data)?;
            Ok(vec![
                Row {
                    suite: "isometry",
                    case: format!("seed={seed}"),
                    quantity: "relative_energy_gap",
                    value: gap,
                    tolerance: format!("<= {}", cfg.isometry_tolerance),
                    pass: gap <= cfg.isometry_tolerance,
                },
                Row {
                    suite: "isometry",
                    case: format!("seed={seed}"),
                    quantity: "round_trip_residual",
                    value: back,
                    tolerance: format!("<= {ROUND_TRIP_WARNING}"),
                    pass: back <= ROUND_TRIP_WARNING,
                },
            ])
        })
        .collect();
    flatten(per_case)
}

fn conservation(cfg: &VerifyConfig) -> CliResult<Vec<Row>> {
    let f = Nonlinearity::defocusing_quintic();
    let per_case: Vec<CliResult<Vec<Row>>> = seeds(cfg)
        .par_iter()
        .map(|&seed| {
            let g = random_bump_profile(seed, &BumpRecipe::default(), 8.0, 3201, Some(cfg.conservation_energy))?;
            // the wave stays inside the grid for the whole run
            let grid = RadialGrid::new(0.0, 8.0 + cfg.conservation_time + 2.0, cfg.conservation_n)?;
            let data = data_from_profile_on(&g, &grid);
            let dt = DEFAULT_CFL * grid.h();
            let opts = EvolveOptions {
                save_every: 1 + (1.0 / dt) as usize,
                ..EvolveOptions::default()
            };
            let traj = evolve_with(&data, &f, cfg.conservation_time, dt, &opts)?;
            let e0 = conserved_energy(traj.first(), &f)?;
            let mut drift: f64 = 0.0;
            for s in &traj.states {
                drift = drift.max((conserved_energy(s, &f)? - e0).abs() / e0.abs());
            }
            Ok(vec![Row {
                suite: "conservation",
                case: format!("seed={seed}"),
                quantity: "relative_energy_drift",
                value: drift,
                tolerance: format!("<= {}", cfg.conservation_tolerance),
                pass: drift <= cfg.conservation_tolerance,
            }])
        })
        .collect();
    flatten(per_case)
}

/// `Σ b_k²` over `ks` plus the geometric completion of both ends.
fn completed_sum(b: &[f64], sum_sq: f64) -> f64 {
    let n = b.len();
    let small = (b[1] / b[0]).powi(-2);
    let large = (b[n - 1] / b[n - 2]).powi(2);
    let mut sum = sum_sq;
    sum += if small < 1.0 { b[0] * b[0] * small / (1.0 - small) } else { f64::INFINITY };
    sum += if large < 1.0 { b[n - 1] * b[n - 1] * large / (1.0 - large) } else { f64::INFINITY };
    sum
}

/// Seed, support radius, fine-scale exponent and `(R₁/R, b/‖G‖)` pairs.
type ShapeSample = (u64, f64, f64, Vec<(f64, f64)>);

fn decay(cfg: &VerifyConfig) -> CliResult<Vec<Row>> {
    let sampling = cfg.sampling;
    // fine-scale shape for profiles supported in [R, 2R], R alternating 1, 4
    let shape: Vec<CliResult<ShapeSample>> = seeds(cfg)
        .par_iter()
        .map(|&seed| {
            let radius = if seed % 2 == 0 { 1.0 } else { 4.0 };
            let recipe = BumpRecipe {
                support: (radius, 2.0 * radius),
                bumps: 2,
                half_width: (0.1 * radius, 0.4 * radius),
            };
            let g = random_bump_profile(seed, &recipe, 2.0 * radius, 801, None)?;
            let k0 = radius.log2().round() as i32;
            let c = free_wave_channel_norms(&g, k0 - 14, k0 - 1, &sampling)?;
            let norm = g.l2_norm();
            let q: Vec<(f64, f64)> = c.ks.iter().zip(&c.b).map(|(k, b)| (2f64.powi(*k) / radius, b / norm)).collect();
            let p = (q[3].1 / q[0].1).ln() / (q[3].0 / q[0].0).ln();
            Ok((seed, radius, p, q))
        })
        .collect();
    let mut rows = Vec::new();
    let mut sweep = Vec::new();
    let mut c_fit: f64 = 0.0;
    for item in shape {
        let (seed, radius, p, q) = item?;
        rows.push(Row {
            suite: "decay",
            case: format!("seed={seed} R={radius}"),
            quantity: "fine_scale_exponent",
            value: p,
            tolerance: format!("0.1 +- {}", cfg.exponent_tolerance),
            pass: (p - 0.1).abs() <= cfg.exponent_tolerance,
        });
        c_fit = c_fit.max(q[0].1 / q[0].0.powf(0.1));
        sweep.push((seed, radius, q));
    }
    // one constant fitted at the finest scale has to cover every scale
    for (seed, radius, q) in &sweep {
        let worst = q.iter().map(|(x, b)| b / (c_fit * x.powf(0.1))).fold(0.0, f64::max);
        rows.push(Row {
            suite: "decay",
            case: format!("seed={seed} R={radius}"),
            quantity: "bound_ratio_with_fitted_constant",
            value: worst,
            tolerance: format!("<= 1.001 (C = {c_fit:.6})"),
            pass: worst <= 1.001,
        });
    }
    // l² sum over all channels against the energy, unit-energy profiles
    let sums: Vec<CliResult<(u64, f64)>> = seeds(cfg)
        .par_iter()
        .map(|&seed| {
            let g = random_bump_profile(seed, &BumpRecipe::default(), 4.0, 801, Some(1.0))?;
            let c = free_wave_channel_norms(&g, -12, 12, &sampling)?;
            Ok((seed, completed_sum(&c.b, c.sum_sq) / profile_energy(&g)))
        })
        .collect();
    let sums = sums.into_iter().collect::<CliResult<Vec<_>>>()?;
    let (lo, hi) = sums.iter().fold((f64::INFINITY, 0.0f64), |(a, b), (_, r)| (a.min(*r), b.max(*r)));
    let centre = (lo * hi).sqrt();
    for (seed, r) in sums {
        rows.push(Row {
            suite: "decay",
            case: format!("seed={seed}"),
            quantity: "channel_l2_sum_over_energy",
            value: r,
            tolerance: format!("finite, within {} of {centre:.6}", cfg.l2_band),
            pass: r.is_finite() && (r / centre - 1.0).abs() <= cfg.l2_band,
        });
    }
    Ok(rows)
}

fn flatten(parts: Vec<CliResult<Vec<Row>>>) -> CliResult<Vec<Row>> {
    let mut rows = Vec::new();
    for p in parts {
        rows.extend(p?);
    }
    Ok(rows)
}

pub fn verify(suites: &[Suite], cfg: &VerifyConfig, run: &mut Run) -> CliResult<()> {
    if cfg.cases == 0 {
        return Err(CliError::Config("`cases` must be at least 1".into()));
    }
    if suites.contains(&Suite::Decay) && cfg.cases < 2 {
        return Err(CliError::Config("the decay suite needs `cases` ≥ 2".into()));
    }
    let mut rows = Vec::new();
    for suite in suites {
        rows.extend(match suite {
            Suite::Isometry => isometry(cfg)?,
            Suite::Conservation => conservation(cfg)?,
            Suite::Decay => decay(cfg)?,
        });
    }
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} {} {}", r.suite, r.case, r.quantity))
        .collect();
    for r in &rows {
        println!(
            "[{}] {} {} {}: {:.3e} ({})",
            if r.pass { "PASS" } else { "FAIL" },
            r.suite,
            r.case,
            r.quantity,
            r.value,
            r.tolerance
        );
    }
    let meta = json!({"seed": cfg.seed, "cases": cfg.cases, "sampling": cfg.sampling, "conservation_n": cfg.conservation_n});
    let cells: Vec<Vec<String>> = rows.iter().map(Row::cells).collect();
    run.emit("verify.csv", "pass/fail table of the property suites", meta, |w| {
        write_table(
            w,
            "verify",
            &[("seed", cfg.seed.to_string()), ("cases", cfg.cases.to_string())],
            &["suite", "case", "quantity", "value", "tolerance", "pass"],
            cells,
        )
    })?;
    run.result("rows", rows.len());
    run.result("failed", &failed);
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("{} failing row(s): {}", failed.len(), failed.join("; "))))
    }
}
