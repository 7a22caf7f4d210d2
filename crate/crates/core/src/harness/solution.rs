//! Defect solutions on disk: raw little-endian `f64` values plus a JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::defect_bvp::{SpaceTimeGrid, TruncatedDefect};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSidecar {
    pub l: f64,
    pub n_x: usize,
    pub n_tau: usize,
    pub dim: usize,
    /// Stored as the value's bit pattern so reload is exact.
    pub omega_bits: u64,
    pub omega: f64,
    pub residual_norm: f64,
    pub newton_iters: usize,
    pub sigma_min: f64,
    pub layout: String,
}

pub fn solution_stem(l: f64) -> String {
    format!("defect_L{}", l.to_string().replace('.', "p"))
}

pub fn write_solution(dir: &Path, d: &TruncatedDefect) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let stem = solution_stem(d.grid.l);
    let bin = dir.join(format!("{stem}.bin"));
    let side = dir.join(format!("{stem}.json"));
    let bytes: Vec<u8> = d.u.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&bin, bytes)?;
    let meta = SolutionSidecar {
        l: d.grid.l,
        n_x: d.grid.n_x,
        n_tau: d.grid.n_tau,
        dim: d.dim,
        omega_bits: d.omega.to_bits(),
        omega: d.omega,
        residual_norm: d.residual_norm,
        newton_iters: d.newton_iters,
        sigma_min: d.sigma_min,
        layout: "u[(i*n_tau + j)*dim + c], f64 little-endian".into(),
    };
    fs::write(&side, serde_json::to_string_pretty(&meta)?)?;
    Ok((bin, side))
}

/// Reads a solution written by [`write_solution`]; `stem_path` is the path without extension.
pub fn read_solution(stem_path: &Path) -> Result<TruncatedDefect> {
    let meta: SolutionSidecar = serde_json::from_str(&fs::read_to_string(stem_path.with_extension("json"))?)?;
    let bytes = fs::read(stem_path.with_extension("bin"))?;
    let expected = meta.n_x * meta.n_tau * meta.dim * 8;
    if bytes.len() != expected {
        return Err(Error::ShapeMismatch(format!(
            "{}: {} bytes, sidecar implies {expected}",
            stem_path.display(),
            bytes.len()
        )));
    }
    let u = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(TruncatedDefect {
        grid: SpaceTimeGrid::new(meta.l, meta.n_x, meta.n_tau)?,
        dim: meta.dim,
        u,
        omega: f64::from_bits(meta.omega_bits),
        residual_norm: meta.residual_norm,
        newton_iters: meta.newton_iters,
        residual_history: Vec::new(),
        sigma_min: meta.sigma_min,
    })
}

/// All solutions in `dir`, sorted by `L`.
pub fn read_family(dir: &Path) -> Result<Vec<TruncatedDefect>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let is_solution = path.extension().is_some_and(|e| e == "bin")
            && path.file_stem().and_then(|s| s.to_str()).is_some_and(|s| s.starts_with("defect_L"));
        if is_solution {
            out.push(read_solution(&path.with_extension(""))?);
        }
    }
    out.sort_by(|a, b| a.grid.l.total_cmp(&b.grid.l));
    Ok(out)
}
