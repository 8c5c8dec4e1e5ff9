use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiments::run::{ExperimentKind, ExperimentRecord};

/// Writes every file the record's experiment kind produces and returns their paths.
pub fn write_outputs(record: &ExperimentRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&mut dyn Write) -> Result<()>| -> Result<()> {
        let path = dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        f(&mut out)?;
        out.flush()?;
        written.push(path);
        Ok(())
    };
    match record.kind {
        ExperimentKind::Sweep | ExperimentKind::Hysteron => {
            emit("trajectory.csv", &|w| write_trajectory(record, w))?;
            emit("loop.csv", &|w| write_loop(record, w))?;
        }
        ExperimentKind::Compensate => {
            emit("trajectory.csv", &|w| write_trajectory(record, w))?;
            emit("loop.csv", &|w| write_loop(record, w))?;
            emit("inverse_map.csv", &|w| write_inverse_map(record, w))?;
            emit("error_spectrum.csv", &|w| write_error_spectrum(record, w))?;
        }
        ExperimentKind::Frf => {
            emit("frf.csv", &|w| write_frf(record, w))?;
        }
    }
    emit("summary.txt", &|w| write_summary(record, w))?;
    Ok(written)
}

pub fn write_trajectory(record: &ExperimentRecord, out: &mut dyn Write) -> Result<()> {
    let tr = &record.trajectory;
    writeln!(out, "t,r,u,y,ystar,e")?;
    for k in 0..tr.len() {
        writeln!(out, "{},{},{},{},{},{}", tr.t[k], tr.r[k], tr.u[k], tr.y[k], tr.ystar[k], tr.e[k])?;
    }
    Ok(())
}

pub fn write_loop(record: &ExperimentRecord, out: &mut dyn Write) -> Result<()> {
    let tr = &record.trajectory;
    writeln!(out, "u,y")?;
    for k in 0..tr.len() {
        writeln!(out, "{},{}", tr.u[k], tr.y[k])?;
    }
    Ok(())
}

pub fn write_inverse_map(record: &ExperimentRecord, out: &mut dyn Write) -> Result<()> {
    let tr = &record.trajectory;
    writeln!(out, "r,u")?;
    for k in 0..tr.len() {
        writeln!(out, "{},{}", tr.r[k], tr.u[k])?;
    }
    Ok(())
}

pub fn write_error_spectrum(record: &ExperimentRecord, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "nu_hz,eps,eps_db")?;
    for c in &record.cycles {
        writeln!(out, "{},{},{}", c.nu_hz, c.eps, 20.0 * c.eps.log10())?;
    }
    Ok(())
}

/// One row per curve and frequency; `curve` names the family member.
pub fn write_frf(record: &ExperimentRecord, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "curve,omega,mag_db,phase_deg")?;
    for curve in &record.frf {
        for p in &curve.points {
            writeln!(out, "{},{},{},{}", curve.label, p.omega, p.magnitude_db(), p.phase_deg())?;
        }
    }
    Ok(())
}

pub fn write_summary(record: &ExperimentRecord, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "experiment = {}", record.kind.name())?;
    writeln!(out, "[metrics]")?;
    for (name, value) in &record.metrics {
        writeln!(out, "{name} = {value}")?;
    }
    writeln!(out)?;
    writeln!(out, "[config]")?;
    write!(out, "{}", record.config.to_toml_string())?;
    Ok(())
}
