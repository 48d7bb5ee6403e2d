//! Plot-ready CSV emission. No plotting happens in-process; these files are
//! meant to be drawn by external tooling.

use crate::distributions::{BrfQuantile, DgbdParams};
use crate::error::{Error, Result};
use crate::fitting::RankedSample;
use chrono::{Datelike, NaiveDate};
use std::io::Write as _;
use std::path::Path;

/// Histogram of `ln x` with equal-width bins: `z_lo,z_hi,count`.
pub fn emit_log_histogram(values: &[f64], bins: usize, path: &Path) -> Result<()> {
    if bins == 0 {
        return Err(Error::usage("histogram needs at least one bin"));
    }
    let logs: Vec<f64> = values.iter().filter(|v| **v > 0.0).map(|v| v.ln()).collect();
    if logs.is_empty() {
        return Err(Error::usage("no positive values to bin"));
    }
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };

    let mut counts = vec![0u64; bins];
    for z in &logs {
        let mut idx = ((z - lo) / width) as usize;
        if idx >= bins {
            idx = bins - 1; // right edge belongs to the last bin
        }
        counts[idx] += 1;
    }

    let mut f = create(path)?;
    writeln!(f, "z_lo,z_hi,count")?;
    for (i, count) in counts.iter().enumerate() {
        let z_lo = lo + i as f64 * width;
        writeln!(f, "{},{},{}", z_lo, z_lo + width, count)?;
    }
    Ok(())
}

/// Fitted log-density curve over `points` grid positions spanning the given
/// z-range, with the mode position repeated as a marker column:
/// `z,density,mode_z`.
pub fn emit_log_density_curve(
    dist: &BrfQuantile,
    z_range: (f64, f64),
    points: usize,
    path: &Path,
) -> Result<()> {
    if points < 2 {
        return Err(Error::usage("density curve needs at least two points"));
    }
    let (_, mode_z) = dist.log_mode()?;
    let (lo, hi) = z_range;
    let step = (hi - lo) / (points - 1) as f64;
    let mut f = create(path)?;
    writeln!(f, "z,density,mode_z")?;
    for i in 0..points {
        let z = lo + i as f64 * step;
        writeln!(f, "{},{},{}", z, dist.log_density(z)?, mode_z)?;
    }
    Ok(())
}

/// Rank-size points next to the fitted curves:
/// `rank,value,fitted_brf[,fitted_power_law]`.
pub fn emit_rank_size(
    sample: &RankedSample,
    brf: &DgbdParams,
    power_law: Option<&DgbdParams>,
    path: &Path,
) -> Result<()> {
    let mut f = create(path)?;
    if power_law.is_some() {
        writeln!(f, "rank,value,fitted_brf,fitted_power_law")?;
    } else {
        writeln!(f, "rank,value,fitted_brf")?;
    }
    for (i, value) in sample.values().iter().enumerate() {
        let rank = i as u32 + 1;
        let fitted = brf.eval(rank)?;
        match power_law {
            Some(pl) => writeln!(f, "{rank},{value},{fitted},{}", pl.eval(rank)?)?,
            None => writeln!(f, "{rank},{value},{fitted}")?,
        }
    }
    Ok(())
}

/// Q-Q pairs: `theoretical_normal_quantile,empirical_log_quantile`.
pub fn emit_qq(pairs: &[(f64, f64)], path: &Path) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "theoretical_normal_quantile,empirical_log_quantile")?;
    for (theo, emp) in pairs {
        writeln!(f, "{theo},{emp}")?;
    }
    Ok(())
}

/// Fitted (a, b) trajectory with month labels: `date,month,a,b`.
pub fn emit_trajectory(rows: &[(NaiveDate, f64, f64)], path: &Path) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "date,month,a,b")?;
    for (date, a, b) in rows {
        writeln!(f, "{date},{}-{:02},{a},{b}", date.year(), date.month())?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}
