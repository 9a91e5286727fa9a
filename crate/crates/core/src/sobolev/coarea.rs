//! Coarea check on planar grid functions.
//!
//! For levels `t_j` the superlevel sets `{u > t_j}` are extracted by marching
//! squares. Their weighted perimeters give the coarea sum, which should match
//! `int |grad u| x^A`; their weighted volumes give the lower bound
//! `C_hat * int m_B({u > t})^sigma dt` with `C_hat` the smallest level-set quotient.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sobolev::grid::GridFunction;
use crate::weight::{eval_weight, WeightPair};

/// Bilinear subsamples per axis in each lattice square for superlevel volumes.
const VOLUME_SUBSAMPLES: usize = 4;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
const SEGMENT_RULE: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub level: f64,
    pub perimeter: f64,
    pub volume: f64,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoareaCheck {
    /// `int |grad u| x^A dx`
    pub lhs: f64,
    /// `sum_j dt P_A({u > t_j})`
    pub coarea_sum: f64,
    pub coarea_rel_gap: f64,
    /// Smallest level-set quotient.
    pub c_hat: f64,
    /// `C_hat * sum_j dt m_B({u > t_j})^sigma`
    pub minkowski_rhs: f64,
    pub tolerance: f64,
    pub holds: bool,
    pub levels: Vec<LevelSet>,
}

/// Weighted perimeter and volume of `{u > t}` on a planar grid.
pub fn superlevel_set(u: &GridFunction, t: f64, a: &[f64], b: &[f64]) -> (f64, f64) {
    let g = &u.grid;
    let (nx, ny) = (g.dims[0], g.dims[1]);
    let (hx, hy) = (g.spacing[0], g.spacing[1]);
    let x0 = g.lo[0] + 0.5 * hx;
    let y0 = g.lo[1] + 0.5 * hy;
    let val = |i: usize, j: usize| u.values[i * ny + j];
    let s = VOLUME_SUBSAMPLES;
    let sub_area = hx * hy / (s * s) as f64;
    (0..nx - 1)
        .into_par_iter()
        .map(|i| {
            let mut per = 0.0;
            let mut vol = 0.0;
            for j in 0..ny - 1 {
                let v = [val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)];
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi <= t {
                    continue;
                }
                let (xa, ya) = (x0 + i as f64 * hx, y0 + j as f64 * hy);
                for p in 0..s {
                    let fx = (p as f64 + 0.5) / s as f64;
                    for q in 0..s {
                        let fy = (q as f64 + 0.5) / s as f64;
                        let w = v[0] * (1.0 - fx) * (1.0 - fy)
                            + v[1] * fx * (1.0 - fy)
                            + v[2] * fx * fy
                            + v[3] * (1.0 - fx) * fy;
                        if w > t {
                            vol += eval_weight(&[xa + fx * hx, ya + fy * hy], b) * sub_area;
                        }
                    }
                }
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                if lo > t {
                    continue;
                }
                for (p0, p1) in contour_segments(&v, t) {
                    let a0 = [xa + p0[0] * hx, ya + p0[1] * hy];
                    let a1 = [xa + p1[0] * hx, ya + p1[1] * hy];
                    let len = ((a1[0] - a0[0]).powi(2) + (a1[1] - a0[1]).powi(2)).sqrt();
                    let w: f64 = SEGMENT_RULE
                        .iter()
                        .map(|(r, wt)| {
                            wt * eval_weight(&[a0[0] + r * (a1[0] - a0[0]), a0[1] + r * (a1[1] - a0[1])], a)
                        })
                        .sum();
                    per += len * w;
                }
            }
            (per, vol)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1))
}

/// Contour segments of `{w = t}` in the unit square with corner values
/// `v = [v(0,0), v(1,0), v(1,1), v(0,1)]`, in local coordinates.
fn contour_segments(v: &[f64; 4], t: f64) -> Vec<([f64; 2], [f64; 2])> {
    const CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    // edge k joins corner k and corner k+1
    let crossing = |k: usize| -> Option<[f64; 2]> {
        let (va, vb) = (v[k], v[(k + 1) % 4]);
        if (va > t) == (vb > t) {
            return None;
        }
        let f = (t - va) / (vb - va);
        let (ca, cb) = (CORNERS[k], CORNERS[(k + 1) % 4]);
        Some([ca[0] + f * (cb[0] - ca[0]), ca[1] + f * (cb[1] - ca[1])])
    };
    let hits: Vec<(usize, [f64; 2])> = (0..4).filter_map(|k| crossing(k).map(|p| (k, p))).collect();
    match hits.len() {
        2 => vec![(hits[0].1, hits[1].1)],
        4 => {
            let centre_in = v.iter().sum::<f64>() / 4.0 > t;
            let p: Vec<[f64; 2]> = hits.iter().map(|h| h.1).collect();
            // pair edges so that the segments isolate the corners on the
            // opposite side from the centre
            let corner0_in = v[0] > t;
            if corner0_in == centre_in {
                // corners 1 and 3 are cut off: edges (0,1) and (2,3)
                vec![(p[0], p[1]), (p[2], p[3])]
            } else {
                // corners 0 and 2 are cut off: edges (3,0) and (1,2)
                vec![(p[3], p[0]), (p[1], p[2])]
            }
        }
        _ => Vec::new(),
    }
}

/// Checks `int |grad u| x^A >= C_hat int_0^inf m_B({u > t})^sigma dt` at
/// `level_count` midpoint levels in `(0, max u)`.
///
/// The tolerance is the relative gap between `int |grad u| x^A` and its
/// coarea sum plus `1e-3`. Planar grids only.
pub fn coarea_lower_bound_check(u: &GridFunction, pair: &WeightPair, level_count: usize) -> Result<CoareaCheck> {
    if pair.a - pair.b > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!(
            "coarea bound needs a - b <= 1, got {}",
            pair.a - pair.b
        )));
    }
    if u.ndim() != 2 || pair.n != 2 {
        return Err(Error::InvalidParameter("the coarea check runs on planar grids only".into()));
    }
    if level_count == 0 {
        return Err(Error::InvalidParameter("need at least one level".into()));
    }
    if u.values.iter().any(|v| *v < 0.0) {
        return Err(Error::Precondition("u must be nonnegative".into()));
    }
    let top = u.max_value();
    if !(top > 0.0) {
        return Err(Error::DegenerateShape("u vanishes identically".into()));
    }
    let (a, b) = (pair.a_vec.as_slice(), pair.b_vec.as_slice());
    let lhs = u.weighted_total_variation(a);
    let dt = top / level_count as f64;
    let levels: Vec<LevelSet> = (0..level_count)
        .map(|j| {
            let level = (j as f64 + 0.5) * dt;
            let (perimeter, volume) = superlevel_set(u, level, a, b);
            let quotient = if volume > 0.0 {
                perimeter / volume.powf(pair.sigma)
            } else {
                f64::INFINITY
            };
            LevelSet {
                level,
                perimeter,
                volume,
                quotient,
            }
        })
        .collect();
    let coarea_sum: f64 = levels.iter().map(|l| dt * l.perimeter).sum();
    let c_hat = levels.iter().map(|l| l.quotient).fold(f64::INFINITY, f64::min);
    let minkowski_rhs = c_hat * levels.iter().map(|l| dt * l.volume.powf(pair.sigma)).sum::<f64>();
    let coarea_rel_gap = (lhs - coarea_sum).abs() / lhs;
    let tolerance = coarea_rel_gap + 1e-3;
    Ok(CoareaCheck {
        lhs,
        coarea_sum,
        coarea_rel_gap,
        c_hat,
        minkowski_rhs,
        tolerance,
        holds: lhs >= minkowski_rhs * (1.0 - tolerance),
        levels,
    })
}
