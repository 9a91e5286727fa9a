//! Cell-centred grid functions on axis-aligned boxes.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weight::eval_weight;

const MAGIC: &[u8; 8] = b"IWGRID01";

/// Box and spacing of a cell-centred grid; node `j` on axis `d` sits at
/// `lo[d] + (j + 1/2) spacing[d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, dims: Vec<usize>, spacing: Vec<f64>) -> Result<Self> {
        if lo.len() != dims.len() || lo.len() != spacing.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: dims.len().max(spacing.len()),
            });
        }
        if lo.is_empty() || dims.iter().any(|d| *d < 3) {
            return Err(Error::InvalidParameter("grid needs >= 3 cells per axis".into()));
        }
        if spacing.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::InvalidParameter("grid spacing must be positive".into()));
        }
        Ok(Self { lo, dims, spacing })
    }

    /// Uniform grid with spacing `h` whose cell faces include every multiple of
    /// `h` and which covers `[lo - margin, hi + margin]`.
    pub fn covering(lo: &[f64], hi: &[f64], margin: f64, h: f64) -> Result<Self> {
        // snap ratios within round-off of an integer before rounding outward
        let snap = |r: f64| if (r - r.round()).abs() < 1e-9 { r.round() } else { r };
        let start: Vec<f64> = lo.iter().map(|l| snap((l - margin) / h).floor() * h).collect();
        let dims: Vec<usize> = hi
            .iter()
            .zip(&start)
            .map(|(u, s)| snap(((u + margin) - s) / h).ceil() as usize)
            .collect();
        Self::new(start, dims, vec![h; lo.len()])
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hi(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.dims)
            .zip(&self.spacing)
            .map(|((l, n), h)| l + *n as f64 * h)
            .collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.ndim()];
        for d in (0..self.ndim().saturating_sub(1)).rev() {
            s[d] = s[d + 1] * self.dims[d + 1];
        }
        s
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.ndim()];
        for d in (0..self.ndim()).rev() {
            idx[d] = flat % self.dims[d];
            flat /= self.dims[d];
        }
        idx
    }

    pub fn node(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.lo)
            .zip(&self.spacing)
            .map(|((j, l), h)| l + (*j as f64 + 0.5) * h)
            .collect()
    }

    pub fn node_flat(&self, flat: usize) -> Vec<f64> {
        self.node(&self.multi_index(flat))
    }
}

/// Values of a function at the nodes of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// True when every value in the outermost layer of cells is zero.
    pub compact_support: bool,
}

/// JSON sidecar written next to the binary payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub format: String,
    pub layout: String,
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub compact_support: bool,
    pub payload: String,
}

impl GridFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let compact_support = boundary_is_zero(&grid, &values);
        Ok(Self {
            grid,
            values,
            compact_support,
        })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| f(&grid.node_flat(k)))
            .collect();
        Self::new(grid, values)
    }

    pub fn ndim(&self) -> usize {
        self.grid.ndim()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Gradient at node `flat`: centred differences inside, one-sided at the edges.
    pub fn gradient_at(&self, flat: usize) -> Vec<f64> {
        let idx = self.grid.multi_index(flat);
        let strides = self.grid.strides();
        (0..self.ndim())
            .map(|d| {
                let (n, s, h) = (self.grid.dims[d], strides[d], self.grid.spacing[d]);
                let j = idx[d];
                if j == 0 {
                    (self.values[flat + s] - self.values[flat]) / h
                } else if j + 1 == n {
                    (self.values[flat] - self.values[flat - s]) / h
                } else {
                    (self.values[flat + s] - self.values[flat - s]) / (2.0 * h)
                }
            })
            .collect()
    }

    /// `int f(x, u(x), |grad u(x)|) dx` by the midpoint rule.
    fn integrate_with(&self, f: impl Fn(&[f64], f64, f64) -> f64 + Sync) -> f64 {
        let vol = self.grid.cell_volume();
        let s: f64 = (0..self.values.len())
            .into_par_iter()
            .map(|k| {
                let x = self.grid.node_flat(k);
                let g = self.gradient_at(k);
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                f(&x, self.values[k], norm)
            })
            .sum();
        vol * s
    }

    /// `int |u| x^E dx`
    pub fn weighted_mass(&self, e: &[f64]) -> f64 {
        self.integrate_with(|x, u, _| u.abs() * eval_weight(x, e))
    }

    /// `int |u|^p x^E dx`
    pub fn weighted_lp(&self, p: f64, e: &[f64]) -> f64 {
        self.integrate_with(|x, u, _| u.abs().powf(p) * eval_weight(x, e))
    }

    /// `int |grad u| x^E dx`
    pub fn weighted_total_variation(&self, e: &[f64]) -> f64 {
        self.integrate_with(|x, _, g| g * eval_weight(x, e))
    }

    /// Writes the binary payload to `path` and the JSON sidecar to `path.json`.
    ///
    /// Layout: 8-byte magic, `u32` rank, then `u64` dims, `f64` spacing,
    /// `f64` lo, a `u8` compact-support flag and the row-major `f64` values,
    /// all little-endian.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(64 + 8 * self.values.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.ndim() as u32).to_le_bytes());
        for d in &self.grid.dims {
            buf.extend_from_slice(&(*d as u64).to_le_bytes());
        }
        for v in self.grid.spacing.iter().chain(&self.grid.lo) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.push(u8::from(self.compact_support));
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        fs::File::create(path)?.write_all(&buf)?;
        let sidecar = GridSidecar {
            format: "isoweight-grid".into(),
            layout: "row-major f64 little-endian, last axis fastest".into(),
            dims: self.grid.dims.clone(),
            spacing: self.grid.spacing.clone(),
            lo: self.grid.lo.clone(),
            hi: self.grid.hi(),
            compact_support: self.compact_support,
            payload: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
        };
        let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(sidecar_path(path), json)?;
        Ok(())
    }

    /// Reads a payload written by [`GridFunction::write`].
    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cur = Cursor { bytes: &bytes, pos: 0 };
        if cur.take(8)? != MAGIC {
            return Err(Error::Parse("not an isoweight grid file".into()));
        }
        let rank = u32::from_le_bytes(cur.take(4)?.try_into().expect("4 bytes")) as usize;
        if rank == 0 || rank > 16 {
            return Err(Error::Parse(format!("implausible grid rank {rank}")));
        }
        let dims = (0..rank)
            .map(|_| Ok(u64::from_le_bytes(cur.take(8)?.try_into().expect("8 bytes")) as usize))
            .collect::<Result<Vec<_>>>()?;
        let spacing = cur.f64s(rank)?;
        let lo = cur.f64s(rank)?;
        let _flag = cur.take(1)?;
        let count: usize = dims.iter().product();
        let values = cur.f64s(count)?;
        if cur.pos != bytes.len() {
            return Err(Error::Parse("trailing bytes after grid payload".into()));
        }
        Self::new(GridSpec::new(lo, dims, spacing)?, values)
    }
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let out = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Parse("grid file truncated".into()))?;
        self.pos = end;
        Ok(out)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|_| Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"))))
            .collect()
    }
}

fn boundary_is_zero(grid: &GridSpec, values: &[f64]) -> bool {
    (0..values.len()).all(|k| {
        let idx = grid.multi_index(k);
        let on_edge = idx.iter().zip(&grid.dims).any(|(j, n)| *j == 0 || j + 1 == *n);
        !on_edge || values[k] == 0.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn indexing() {
        let g = GridSpec::new(vec![0.0, 0.0], vec![4, 5], vec![0.25, 0.2]).unwrap();
        assert_eq!(g.strides(), vec![5, 1]);
        assert_eq!(g.multi_index(7), vec![1, 2]);
        assert_eq!(g.node(&[1, 2]), vec![0.375, 0.5]);
        assert_eq!(g.hi(), vec![1.0, 1.0]);
        let c = GridSpec::covering(&[0.0, 0.0], &[1.0, 1.0], 0.1, 0.05).unwrap();
        assert_relative_eq!(c.lo[0], -0.1, epsilon = 1e-15);
        assert_eq!(c.dims, vec![24, 24]);
    }

    #[test]
    fn integrals_of_a_tent() {
        // u = (1 - |x|_inf)_+ on [-1.5, 1.5]^2: grad norm 1 on the support
        let g = GridSpec::covering(&[-1.0, -1.0], &[1.0, 1.0], 0.5, 0.01).unwrap();
        let u = GridFunction::from_fn(g, |x| (1.0 - x[0].abs().max(x[1].abs())).max(0.0)).unwrap();
        assert!(u.compact_support);
        assert_relative_eq!(u.weighted_mass(&[0.0, 0.0]), 4.0 / 3.0, max_relative = 1e-3);
        assert_relative_eq!(u.weighted_total_variation(&[0.0, 0.0]), 4.0, max_relative = 1e-2);
    }

    #[test]
    fn binary_roundtrip() {
        let dir = std::env::temp_dir().join(format!("isoweight-grid-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("u.bin");
        let g = GridSpec::new(vec![-1.0, 0.5, 0.0], vec![3, 4, 5], vec![0.5, 0.25, 0.125]).unwrap();
        let u = GridFunction::from_fn(g, |x| x[0] * x[1] - x[2]).unwrap();
        u.write(&path).unwrap();
        let back = GridFunction::read(&path).unwrap();
        assert_eq!(back, u);
        let side: GridSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(side.dims, vec![3, 4, 5]);
        assert_eq!(side.payload, "u.bin");
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(GridFunction::read(&path).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }
}
