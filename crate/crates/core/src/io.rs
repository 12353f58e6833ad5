//! CSV and key-value exports.
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::solver::RunResult;

/// Full double precision, locale independent.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn frame_file_name(t: f64) -> String {
    format!("frame_t{t}.csv")
}

/// Write `frame_t<t>.csv` (header `x,u`) for every frame, `deviation.csv`
/// (header `t,sup_deviation,u_h`) and `diagnostics.txt`.
pub fn write_run(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for frame in &result.frames {
        let path = dir.join(frame_file_name(frame.t));
        let mut out = String::with_capacity(48 * frame.values.len());
        out.push_str("x,u\n");
        for (x, u) in result.grid.iter().zip(&frame.values) {
            out.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*u)));
        }
        fs::write(&path, out)?;
        written.push(path);
    }
    let path = dir.join("deviation.csv");
    let mut out = String::from("t,sup_deviation,u_h\n");
    for d in &result.deviation {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(d.t),
            fmt_f64(d.sup_deviation),
            fmt_f64(d.u_h)
        ));
    }
    fs::write(&path, out)?;
    written.push(path);

    let path = dir.join("diagnostics.txt");
    let d = &result.diagnostics;
    let mut f = fs::File::create(&path)?;
    writeln!(f, "p = {}", fmt_f64(result.p))?;
    writeln!(f, "half_width = {}", fmt_f64(d.half_width))?;
    writeln!(
        f,
        "required_half_width = {}",
        fmt_f64(d.required_half_width)
    )?;
    writeln!(f, "nx = {}", d.nx)?;
    writeln!(f, "dx = {}", fmt_f64(d.dx))?;
    writeln!(f, "dt = {}", fmt_f64(d.dt))?;
    writeln!(f, "steps = {}", d.steps)?;
    writeln!(f, "boundary_mode = {}", d.boundary_mode)?;
    writeln!(f, "boundary_influence = {}", fmt_f64(d.boundary_influence))?;
    written.push(path);
    Ok(written)
}

/// Write rows of `x,t,value`.
pub fn write_xt_table(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut out = String::from("x,t,value\n");
    for (x, t, v) in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(*x),
            fmt_f64(*t),
            fmt_f64(*v)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}
