//! Grid sweep over line parameters.

use chromaharmony::generate::{generate_line_palette, GenSpec};
use chromaharmony::{evaluate_hue_harmony, evaluate_tone_harmony, HarmonyParams, HuePattern, TonePattern};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

use crate::{Failure, SweepArgs, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub phi_deg: f64,
    pub success_rate: f64,
    /// Empty when no trial succeeded.
    pub round_trip_pass_rate: Option<f64>,
    #[serde(skip)]
    pub successes: usize,
    #[serde(skip)]
    pub passes: usize,
}

/// Parses `x`, `a,b,c` or `start:end:step` (end inclusive).
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| -> Result<f64, String> {
        let v: f64 = t.trim().parse().map_err(|_| format!("{t:?} is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{t:?} is not finite"))
        }
    };
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [list] => list
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>, _>>()?,
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step <= 0.0 {
                return Err(format!("step must be positive in {s:?}"));
            }
            let n = ((b - a) / step + 1e-9).floor();
            if n < 0.0 {
                Vec::new()
            } else {
                (0..=n as usize).map(|i| a + i as f64 * step).collect()
            }
        }
        _ => return Err(format!("bad range {s:?}; use x, a,b,c or start:end:step")),
    };
    if values.is_empty() {
        return Err(format!("range {s:?} is empty"));
    }
    Ok(values)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent seed per (row, trial).
pub fn trial_seed(seed: u64, row: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ row as u64) ^ trial as u64)
}

pub fn sweep_row(
    r: f64,
    phi: f64,
    row: usize,
    k: usize,
    trials: usize,
    seed: u64,
    p: &HarmonyParams,
) -> chromaharmony::Result<SweepRow> {
    let (mut successes, mut passes) = (0, 0);
    for t in 0..trials {
        let spec = GenSpec {
            r,
            phi,
            k,
            seed: trial_seed(seed, row, t),
            pattern_override: None,
        };
        let res = generate_line_palette(&spec, p)?;
        if !res.is_success() {
            continue;
        }
        successes += 1;
        let tone = evaluate_tone_harmony(&res.colors, p)?;
        let hue = evaluate_hue_harmony(&res.colors, p)?;
        if tone == TonePattern::Line && hue != HuePattern::NoHarmony {
            passes += 1;
        }
    }
    Ok(SweepRow {
        r,
        phi_deg: phi,
        success_rate: successes as f64 / trials as f64,
        round_trip_pass_rate: (successes > 0).then(|| passes as f64 / successes as f64),
        successes,
        passes,
    })
}

pub fn sweep(
    rs: &[f64],
    phis: &[f64],
    k: usize,
    trials: usize,
    seed: u64,
    p: &HarmonyParams,
) -> chromaharmony::Result<Vec<SweepRow>> {
    let grid: Vec<(f64, f64)> = rs.iter().flat_map(|&r| phis.iter().map(move |&phi| (r, phi))).collect();
    grid.par_iter()
        .enumerate()
        .map(|(row, &(r, phi))| sweep_row(r, phi, row, k, trials, seed, p))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub(crate) fn run_sweep(
    a: &SweepArgs,
    p: &HarmonyParams,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let rs = parse_range(&a.r).map_err(Failure)?;
    let phis = parse_range(&a.phi).map_err(Failure)?;
    if a.trials == 0 {
        return Err(Failure("trials must be at least 1".into()));
    }
    if a.k < 2 {
        return Err(Failure(format!("k must be at least 2, got {}", a.k)));
    }
    let rows = sweep(&rs, &phis, a.k, a.trials, a.seed, p)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    match &a.output {
        Some(path) => {
            std::fs::write(path, &buf).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))?
        }
        None => out.write_all(&buf)?,
    }
    let succ: usize = rows.iter().map(|r| r.successes).sum();
    let pass: usize = rows.iter().map(|r| r.passes).sum();
    let total = rows.len() * a.trials;
    write!(err, "{succ}/{total} generations succeeded")?;
    if succ > 0 {
        write!(err, ", round trip {pass}/{succ} ({:.3})", pass as f64 / succ as f64)?;
    }
    writeln!(err)?;
    Ok(EXIT_OK)
}
