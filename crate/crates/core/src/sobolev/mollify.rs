//! Mollified indicators `rho_eps * chi_Omega` on a grid.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::integrate::gauss::cached_rule;
use crate::integrate::{weighted_surface, weighted_volume, QuadratureSpec};
use crate::limits::{fit_power_law_xy, PowerLawFit};
use crate::shapes::ShapeFamily;
use crate::sobolev::grid::{GridFunction, GridSpec};
use crate::weight::ExponentVector;

/// Bump kernel `exp(-1/(1-|x|^2))` on the unit ball, scaled to radius `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub epsilon: f64,
}

impl MollifierSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    /// `rho_eps(z) = eps^{-N} rho(z / eps)`, with `rho` normalised to unit mass.
    pub fn kernel(&self, z: &[f64]) -> f64 {
        let n = z.len();
        let r2 = z.iter().map(|v| v * v).sum::<f64>() / (self.epsilon * self.epsilon);
        bump_profile(r2) / (bump_mass(n) * self.epsilon.powi(n as i32))
    }
}

/// `exp(-1/(1-r^2))` for `r^2 < 1`, else 0.
fn bump_profile(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// `int_{|x|<1} exp(-1/(1-|x|^2)) dx` in `R^n`.
pub fn bump_mass(n: usize) -> f64 {
    let sphere = 2.0 * PI.powf(0.5 * n as f64) / gamma(0.5 * n as f64);
    // the radial profile is flat at r = 1, so a plain r^{n-1} rule converges fast
    let rule = cached_rule(96, (n - 1) as f64).expect("valid rule");
    let radial: f64 = rule
        .pairs()
        .map(|(r, w)| w * (-1.0 / (1.0 - r * r)).exp())
        .sum();
    sphere * radial
}

/// Subsamples per axis used for cells cut by the boundary.
fn subsamples(n: usize) -> usize {
    match n {
        0..=2 => 16,
        3 => 6,
        _ => 3,
    }
}

/// Fraction of each cell inside the shape. Cells whose corners and centre all
/// agree are taken as full or empty; the rest are supersampled.
pub fn coverage_fractions(shape: &ShapeFamily, grid: &GridSpec) -> Vec<f64> {
    let n = grid.ndim();
    let s = subsamples(n);
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let idx = grid.multi_index(k);
            let lo: Vec<f64> = idx
                .iter()
                .zip(&grid.lo)
                .zip(&grid.spacing)
                .map(|((j, l), h)| l + *j as f64 * h)
                .collect();
            let centre_in = shape.contains(&grid.node(&idx));
            let mixed = (0..1usize << n).any(|mask| {
                let corner: Vec<f64> = (0..n)
                    .map(|d| lo[d] + if mask >> d & 1 == 1 { grid.spacing[d] } else { 0.0 })
                    .collect();
                shape.contains(&corner) != centre_in
            });
            if !mixed {
                return if centre_in { 1.0 } else { 0.0 };
            }
            let total = s.pow(n as u32);
            let mut inside = 0usize;
            let mut p = vec![0.0; n];
            for m in 0..total {
                let mut rem = m;
                for d in 0..n {
                    let j = rem % s;
                    rem /= s;
                    p[d] = lo[d] + (j as f64 + 0.5) / s as f64 * grid.spacing[d];
                }
                if shape.contains(&p) {
                    inside += 1;
                }
            }
            inside as f64 / total as f64
        })
        .collect()
}

/// Discrete kernel: offsets in cells and weights summing to one.
fn stencil(m: &MollifierSpec, grid: &GridSpec) -> (Vec<Vec<isize>>, Vec<f64>) {
    let n = grid.ndim();
    let reach: Vec<isize> = grid.spacing.iter().map(|h| (m.epsilon / h).ceil() as isize).collect();
    let mut offsets = Vec::new();
    let mut weights = Vec::new();
    let mut o: Vec<isize> = reach.iter().map(|r| -r).collect();
    loop {
        let r2: f64 = o
            .iter()
            .zip(&grid.spacing)
            .map(|(j, h)| (*j as f64 * h / m.epsilon).powi(2))
            .sum();
        let w = bump_profile(r2);
        if w > 0.0 {
            offsets.push(o.clone());
            weights.push(w);
        }
        // odometer increment
        let mut d = 0;
        loop {
            if d == n {
                let total: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= total);
                return (offsets, weights);
            }
            o[d] += 1;
            if o[d] <= reach[d] {
                break;
            }
            o[d] = -reach[d];
            d += 1;
        }
    }
}

/// `u_eps = rho_eps * chi_shape` at the grid nodes, using cell coverage
/// fractions for the indicator and a discretely normalised kernel.
pub fn mollified_indicator(shape: &ShapeFamily, m: &MollifierSpec, grid: &GridSpec) -> Result<GridFunction> {
    if shape.dim() != grid.ndim() {
        return Err(Error::DimensionMismatch {
            expected: shape.dim(),
            got: grid.ndim(),
        });
    }
    let (blo, bhi) = shape.bounding_box();
    let ghi = grid.hi();
    let fits = (0..grid.ndim()).all(|d| blo[d] - m.epsilon >= grid.lo[d] && bhi[d] + m.epsilon <= ghi[d]);
    if !fits {
        return Err(Error::Precondition(format!(
            "grid must contain the shape with a margin of at least epsilon = {}",
            m.epsilon
        )));
    }
    let cover = coverage_fractions(shape, grid);
    let (offsets, weights) = stencil(m, grid);
    let n = grid.ndim();
    let reach: Vec<usize> = (0..n)
        .map(|d| offsets.iter().map(|o| o[d].unsigned_abs()).max().unwrap_or(0))
        .collect();
    // zero-padded copy so every stencil offset is a valid flat shift
    let padded_dims: Vec<usize> = grid.dims.iter().zip(&reach).map(|(d, r)| d + 2 * r).collect();
    let mut pstrides = vec![1usize; n];
    for d in (0..n - 1).rev() {
        pstrides[d] = pstrides[d + 1] * padded_dims[d + 1];
    }
    let mut padded = vec![0.0; padded_dims.iter().product()];
    for (k, c) in cover.iter().enumerate() {
        if *c != 0.0 {
            let idx = grid.multi_index(k);
            let flat: usize = (0..n).map(|d| (idx[d] + reach[d]) * pstrides[d]).sum();
            padded[flat] = *c;
        }
    }
    let shifts: Vec<isize> = offsets
        .iter()
        .map(|o| (0..n).map(|d| o[d] * pstrides[d] as isize).sum())
        .collect();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let idx = grid.multi_index(k);
            let base: usize = (0..n).map(|d| (idx[d] + reach[d]) * pstrides[d]).sum();
            let v: f64 = shifts
                .iter()
                .zip(&weights)
                .map(|(s, w)| w * padded[(base as isize - s) as usize])
                .sum();
            v.clamp(0.0, 1.0)
        })
        .collect();
    GridFunction::new(grid.clone(), values)
}

/// Grid of spacing `h` around `shape` with a margin of `epsilon` plus two cells.
pub fn grid_for(shape: &ShapeFamily, m: &MollifierSpec, h: f64) -> Result<GridSpec> {
    let (lo, hi) = shape.bounding_box();
    GridSpec::covering(&lo, &hi, m.epsilon + 2.0 * h, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollificationRow {
    pub epsilon: f64,
    pub spacing: f64,
    /// `int u_eps x^gamma`
    pub volume: f64,
    pub volume_error: f64,
    /// `int |grad u_eps| x^omega`
    pub perimeter: f64,
    pub perimeter_error: f64,
}

/// Errors of `u_eps` against `m_gamma(shape)` and `P_omega(shape)` over a list
/// of `epsilon`, with fitted rates and the constants `K = max err / eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollificationStudy {
    pub exact_volume: f64,
    pub exact_perimeter: f64,
    pub rows: Vec<MollificationRow>,
    pub volume_rate: PowerLawFit,
    pub perimeter_rate: PowerLawFit,
    pub volume_k: f64,
    pub perimeter_k: f64,
}

/// Runs the study with grid spacing `epsilon / cells_per_eps`.
pub fn mollification_study(
    shape: &ShapeFamily,
    gamma: &ExponentVector,
    omega: &ExponentVector,
    epsilons: &[f64],
    cells_per_eps: f64,
    q: &QuadratureSpec,
) -> Result<MollificationStudy> {
    if epsilons.len() < 2 {
        return Err(Error::InvalidParameter("need at least two epsilon values".into()));
    }
    if !(cells_per_eps >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "need at least two cells per epsilon, got {cells_per_eps}"
        )));
    }
    let exact_volume = weighted_volume(shape, gamma, q)?.value;
    let exact_perimeter = weighted_surface(shape, omega, q)?.value;
    let mut rows = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        let m = MollifierSpec::new(epsilon)?;
        let spacing = epsilon / cells_per_eps;
        let u = mollified_indicator(shape, &m, &grid_for(shape, &m, spacing)?)?;
        let volume = u.weighted_mass(gamma.as_slice());
        let perimeter = u.weighted_total_variation(omega.as_slice());
        rows.push(MollificationRow {
            epsilon,
            spacing,
            volume,
            volume_error: (volume - exact_volume).abs(),
            perimeter,
            perimeter_error: (perimeter - exact_perimeter).abs(),
        });
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let fit = |err: Vec<f64>| -> Result<(PowerLawFit, f64)> {
        let k = err.iter().zip(&eps).map(|(e, x)| e / x).fold(0.0, f64::max);
        Ok((fit_power_law_xy(&eps, &err)?, k))
    };
    let (volume_rate, volume_k) = fit(rows.iter().map(|r| r.volume_error).collect())?;
    let (perimeter_rate, perimeter_k) = fit(rows.iter().map(|r| r.perimeter_error).collect())?;
    Ok(MollificationStudy {
        exact_volume,
        exact_perimeter,
        rows,
        volume_rate,
        perimeter_rate,
        volume_k,
        perimeter_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_has_unit_mass() {
        for n in [1usize, 2, 3] {
            let m = MollifierSpec::new(0.5).unwrap();
            let h = 0.5 / 200.0;
            let grid = GridSpec::covering(&vec![0.0; n], &vec![0.0; n], 0.5 + h, if n == 3 { 0.5 / 60.0 } else { h }).unwrap();
            let vol = grid.cell_volume();
            let mass: f64 = (0..grid.len()).map(|k| m.kernel(&grid.node_flat(k)) * vol).sum();
            assert_relative_eq!(mass, 1.0, max_relative = 1e-8);
        }
        // mpmath: 2 pi int_0^1 r exp(-1/(1-r^2)) dr
        assert_relative_eq!(bump_mass(2), 0.466_512_393_178_330_07, max_relative = 1e-12);
    }

    #[test]
    fn box_volume_preserved() {
        let shape = ShapeFamily::boxed(vec![0.25, 0.25], vec![1.0, 0.75]).unwrap();
        let m = MollifierSpec::new(0.1).unwrap();
        let grid = grid_for(&shape, &m, 0.0125).unwrap();
        let u = mollified_indicator(&shape, &m, &grid).unwrap();
        assert!(u.compact_support);
        assert!(u.values.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_relative_eq!(u.weighted_mass(&[0.0, 0.0]), 0.375, max_relative = 1e-12);
    }

    #[test]
    fn margin_enforced() {
        let shape = ShapeFamily::orthant_ball(2, 1.0).unwrap();
        let m = MollifierSpec::new(0.1).unwrap();
        let tight = GridSpec::covering(&[0.0, 0.0], &[1.0, 1.0], 0.05, 0.01).unwrap();
        assert!(matches!(mollified_indicator(&shape, &m, &tight), Err(Error::Precondition(_))));
    }
}
