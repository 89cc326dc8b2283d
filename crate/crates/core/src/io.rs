//! CSV and JSON interchange.
//!
//! Every CSV starts with one `#` line of `key=value` metadata followed by a
//! column header. Numbers are written with 17 significant digits, so reading
//! a file back reproduces the samples bit for bit. Lines end in LF.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::family_construct::IterationRecord;
use crate::field_core::{RadialGrid, RadialState, SchemeInfo, Termination, Trajectory};
use crate::linear_radiation::RadiationProfile;
use crate::nonradiative_ode::{BlowupReason, Classification, NonradiativeBranch};
use crate::spacetime_norms::ChannelNorms;

/// Full-precision, locale-free float formatting.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn meta_line(kind: &str, meta: &[(&str, String)]) -> String {
    let mut line = format!("# {kind}");
    for (k, v) in meta {
        line.push_str(&format!(" {k}={v}"));
    }
    line.push('\n');
    line
}

/// A parsed CSV: metadata from the `#` line, header and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: String,
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        let v = self
            .meta
            .get(key)
            .ok_or_else(|| LabError::Parse(format!("metadata key `{key}` missing")))?;
        v.parse()
            .map_err(|_| LabError::Parse(format!("metadata `{key}={v}` is not a number")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LabError::Parse(format!("column `{name}` missing")))?;
        Ok(self.rows.iter().map(|row| row[j]).collect())
    }

    fn expect_kind(self, kind: &str) -> Result<Table> {
        if self.kind == kind {
            Ok(self)
        } else {
            Err(LabError::Parse(format!("expected a {kind} file, found `{}`", self.kind)))
        }
    }
}

/// Writes a numeric table with a metadata line.
pub fn write_table(
    out: &mut impl Write,
    kind: &str,
    meta: &[(&str, String)],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut s = meta_line(kind, meta);
    s.push_str(&header.join(","));
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// Reads a table written by [`write_table`]. Empty cells become NaN.
pub fn read_table(input: impl Read) -> Result<Table> {
    let mut text = String::new();
    let mut input = input;
    input.read_to_string(&mut text)?;
    let first = text.lines().next().unwrap_or("");
    let mut words = first
        .strip_prefix('#')
        .ok_or_else(|| LabError::Parse("missing `#` metadata line".into()))?
        .split_whitespace();
    let kind = words.next().unwrap_or("").to_string();
    let mut meta = BTreeMap::new();
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| LabError::Parse(format!("bad metadata entry `{w}`")))?;
        meta.insert(k.to_string(), v.to_string());
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| LabError::Parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| LabError::Parse(e.to_string()))?;
        let row = record
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    Ok(f64::NAN)
                } else {
                    cell.parse::<f64>()
                        .map_err(|_| LabError::Parse(format!("row {}: `{cell}` is not a number", line + 1)))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table {
        kind,
        meta,
        header,
        rows,
    })
}

pub fn write_profile(out: &mut impl Write, g: &RadiationProfile) -> Result<()> {
    let meta = [
        ("n", g.len().to_string()),
        ("s_min", fmt_f64(g.s_min())),
        ("s_max", fmt_f64(g.s_max())),
    ];
    let rows = g
        .nodes()
        .into_iter()
        .zip(g.values())
        .map(|(s, v)| vec![fmt_f64(s), fmt_f64(*v)]);
    write_table(out, "profile", &meta, &["s", "G"], rows)
}

pub fn read_profile(input: impl Read) -> Result<RadiationProfile> {
    let t = read_table(input)?.expect_kind("profile")?;
    let s = t.column("s")?;
    let values = t.column("G")?;
    if s.len() < 2 {
        return Err(LabError::Parse("profile needs at least two samples".into()));
    }
    let g = RadiationProfile::new(s[0], s[s.len() - 1], values)?;
    // reject non-uniform sampling rather than silently regridding
    let h = g.spacing();
    for (i, si) in s.iter().enumerate() {
        if (si - g.s(i)).abs() > 1e-9 * h.max(si.abs()) {
            return Err(LabError::Parse(format!("profile samples are not uniform at row {}", i + 1)));
        }
    }
    Ok(g)
}

pub fn write_state(out: &mut impl Write, state: &RadialState) -> Result<()> {
    let g = &state.grid;
    let meta = [
        ("n", g.n().to_string()),
        ("r_min", fmt_f64(g.r_min())),
        ("r_max", fmt_f64(g.r_max())),
        ("t", fmt_f64(state.t)),
    ];
    let rows = (0..g.n()).map(|i| vec![fmt_f64(g.r(i)), fmt_f64(state.u[i]), fmt_f64(state.ut[i])]);
    write_table(out, "state", &meta, &["r", "u", "ut"], rows)
}

pub fn read_state(input: impl Read) -> Result<RadialState> {
    let t = read_table(input)?.expect_kind("state")?;
    let r = t.column("r")?;
    if r.len() < 2 {
        return Err(LabError::Parse("state needs at least two samples".into()));
    }
    let grid = RadialGrid::new(r[0], r[r.len() - 1], r.len())?;
    for (i, ri) in r.iter().enumerate() {
        if (ri - grid.r(i)).abs() > 1e-9 * grid.h().max(ri.abs()) {
            return Err(LabError::Parse(format!("state radii are not uniform at row {}", i + 1)));
        }
    }
    let time = t.meta_f64("t")?;
    RadialState::new(grid, t.column("u")?, t.column("ut")?, time)
}

pub fn save_profile(path: &Path, g: &RadiationProfile) -> Result<()> {
    let mut f = fs::File::create(path)?;
    write_profile(&mut f, g)
}

pub fn load_profile(path: &Path) -> Result<RadiationProfile> {
    read_profile(fs::File::open(path)?)
}

pub fn save_state(path: &Path, state: &RadialState) -> Result<()> {
    let mut f = fs::File::create(path)?;
    write_state(&mut f, state)
}

pub fn load_state(path: &Path) -> Result<RadialState> {
    read_state(fs::File::open(path)?)
}

/// JSON manifest of a trajectory checkpoint; frames are state CSVs next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryManifest {
    pub grid: RadialGrid,
    pub dt: f64,
    pub cone_origin: Option<f64>,
    pub termination: Termination,
    pub scheme: Option<SchemeInfo>,
    pub times: Vec<f64>,
    pub frames: Vec<String>,
}

/// Writes `<stem>_NNNNN.csv` per frame and `<stem>.json` into `dir`.
pub fn save_trajectory(dir: &Path, stem: &str, traj: &Trajectory) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut frames = Vec::with_capacity(traj.states.len());
    for (k, state) in traj.states.iter().enumerate() {
        let name = format!("{stem}_{k:05}.csv");
        save_state(&dir.join(&name), state)?;
        frames.push(name);
    }
    let manifest = TrajectoryManifest {
        grid: traj.grid(),
        dt: traj.dt,
        cone_origin: traj.cone_origin,
        termination: traj.termination,
        scheme: traj.scheme.clone(),
        times: traj.times(),
        frames,
    };
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &manifest)?;
    Ok(path)
}

pub fn load_trajectory(manifest_path: &Path) -> Result<Trajectory> {
    let manifest: TrajectoryManifest = read_json(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let states = manifest
        .frames
        .iter()
        .map(|name| load_state(&dir.join(name)))
        .collect::<Result<Vec<_>>>()?;
    for s in &states {
        if s.grid != manifest.grid {
            return Err(LabError::Parse("frame grid differs from the manifest grid".into()));
        }
    }
    let mut traj = Trajectory::new(states, manifest.dt, manifest.cone_origin)?;
    traj.termination = manifest.termination;
    traj.scheme = manifest.scheme;
    Ok(traj)
}

/// Branch samples as `(r, w, w_r, u, u_r)`, in increasing `r`.
pub fn write_branch(out: &mut impl Write, b: &NonradiativeBranch) -> Result<()> {
    let meta = [
        ("n", b.r.len().to_string()),
        ("alpha", fmt_f64(b.alpha)),
        ("r_start", fmt_f64(b.r_start)),
    ];
    let rows = (0..b.r.len()).rev().map(|i| {
        let (r, w, wr) = (b.r[i], b.w[i], b.w_r[i]);
        vec![fmt_f64(r), fmt_f64(w), fmt_f64(wr), fmt_f64(w / r), fmt_f64(wr / r - w / (r * r))]
    });
    write_table(out, "branch", &meta, &["r", "w", "w_r", "u", "u_r"], rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSummary {
    pub alpha: f64,
    pub r_alpha: f64,
    pub classification: Classification,
    pub reason: Option<BlowupReason>,
    pub kappa: Option<f64>,
    pub r_start: f64,
    pub r_far: f64,
    pub trust_radius: f64,
    pub tail_residual: f64,
    pub tail_max_ratio: f64,
}

impl From<&NonradiativeBranch> for BranchSummary {
    fn from(b: &NonradiativeBranch) -> Self {
        BranchSummary {
            alpha: b.alpha,
            r_alpha: b.r_alpha,
            classification: b.classification,
            reason: b.reason,
            kappa: b.central_slope,
            r_start: b.r_start,
            r_far: b.r_far,
            trust_radius: b.trust_radius,
            tail_residual: b.tail_residual,
            tail_max_ratio: b.tail_ratios.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// Iteration history as `(iteration, change, relative_change, ratio, discrepancy)`.
pub fn write_history(out: &mut impl Write, history: &[IterationRecord]) -> Result<()> {
    let rows = history.iter().map(|h| {
        vec![
            h.iteration.to_string(),
            fmt_f64(h.change),
            fmt_f64(h.relative_change),
            fmt_opt(h.ratio),
            fmt_f64(h.discrepancy),
        ]
    });
    write_table(
        out,
        "history",
        &[("n", history.len().to_string())],
        &["iteration", "change", "relative_change", "ratio", "discrepancy"],
        rows,
    )
}

/// Dyadic channel norms as `(k, b_k, clipped)`.
pub fn write_channels(out: &mut impl Write, c: &ChannelNorms) -> Result<()> {
    let rows = c
        .ks
        .iter()
        .zip(&c.b)
        .zip(&c.clipped)
        .map(|((k, b), clip)| vec![k.to_string(), fmt_f64(*b), u8::from(*clip).to_string()]);
    write_table(
        out,
        "channels",
        &[("n", c.ks.len().to_string()), ("sum_sq", fmt_f64(c.sum_sq))],
        &["k", "b", "clipped"],
        rows,
    )
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| LabError::Parse(e.to_string()))?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| LabError::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_radiation::data_from_profile;
    use proptest::prelude::*;

    fn sample_profile() -> RadiationProfile {
        RadiationProfile::from_fn(-2.0, 3.0, 101, |s| (s * 1.3).sin() / 7.0).unwrap()
    }

    #[test]
    fn profile_round_trip_is_exact() {
        let g = sample_profile();
        let mut buf = Vec::new();
        write_profile(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# profile n=101 "));
        assert!(!text.contains('\r'));
        assert_eq!(read_profile(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn state_round_trip_is_exact() {
        let mut s = data_from_profile(&sample_profile());
        s.t = 0.375;
        let mut buf = Vec::new();
        write_state(&mut buf, &s).unwrap();
        let back = read_state(buf.as_slice()).unwrap();
        assert_eq!(back.u, s.u);
        assert_eq!(back.ut, s.ut);
        assert_eq!(back.t, s.t);
        assert_eq!(back.grid, s.grid);
    }

    #[test]
    fn wrong_kind_and_garbage_are_rejected() {
        let mut buf = Vec::new();
        write_profile(&mut buf, &sample_profile()).unwrap();
        assert!(matches!(read_state(buf.as_slice()), Err(LabError::Parse(_))));
        assert!(read_profile("s,G\n0,1\n1,2\n".as_bytes()).is_err());
        assert!(read_profile("# profile\ns,G\n0,x\n1,2\n".as_bytes()).is_err());
        assert!(read_profile("# profile\ns,G\n0,1\n0.3,2\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn trajectory_checkpoint_round_trips() {
        let g = sample_profile();
        let grid = RadialGrid::new(0.0, 4.0, 41).unwrap();
        let states = (0..3)
            .map(|k| crate::linear_radiation::linear_evolve(&g, 0.5 * k as f64, &grid))
            .collect();
        let traj = Trajectory::new(states, 0.5, Some(1.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = save_trajectory(dir.path(), "run", &traj).unwrap();
        let back = load_trajectory(&path).unwrap();
        assert_eq!(back, traj);
    }

    proptest! {
        #[test]
        fn floats_survive_formatting(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
