//! Shape integrals assembled from the one-dimensional reductions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::reduce::{pow0, Quad};
use crate::integrate::{IntegralEstimate, QuadratureSpec};
use crate::shapes::{cone_knee, drop_coord, rim_angle, BoundaryPiece, Height, PieceKind, Region, ShapeFamily};
use crate::weight::ExponentVector;

use std::f64::consts::FRAC_PI_2;

/// Relative roundoff floor applied to every error estimate.
const ROUNDOFF_FLOOR: f64 = 100.0 * f64::EPSILON;

/// Runs `f` at `n, 2n, 4n, ...` nodes until consecutive values agree to `rel_tol`.
pub(crate) fn refine(spec: &QuadratureSpec, f: impl Fn(&Quad) -> Result<f64>) -> Result<IntegralEstimate> {
    spec.validate()?;
    let mut n = spec.nodes_per_axis;
    let first = Quad::new(n);
    let mut prev = f(&first)?;
    let mut evaluations = first.evaluations();
    let mut last_diff = f64::INFINITY;
    for _ in 0..=spec.max_refinement_depth {
        n *= 2;
        let q = Quad::new(n);
        let cur = f(&q)?;
        evaluations += q.evaluations();
        if !cur.is_finite() {
            return Err(Error::Quadrature(format!("non-finite quadrature value at n = {n}")));
        }
        last_diff = (cur - prev).abs();
        prev = cur;
        if last_diff <= spec.rel_tol * cur.abs() || (cur == 0.0 && last_diff == 0.0) {
            return Ok(IntegralEstimate {
                value: cur,
                abs_error_est: last_diff.max(ROUNDOFF_FLOOR * cur.abs()),
                evaluations,
                converged: true,
            });
        }
    }
    Ok(IntegralEstimate {
        value: prev,
        abs_error_est: last_diff.max(ROUNDOFF_FLOOR * prev.abs()),
        evaluations,
        converged: false,
    })
}

fn check_len(shape: &ShapeFamily, e: &ExponentVector) -> Result<()> {
    if shape.dim() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: shape.dim(),
            got: e.len(),
        });
    }
    Ok(())
}

/// `int_shape x^B dx`.
pub fn weighted_volume(shape: &ShapeFamily, b: &ExponentVector, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    check_len(shape, b)?;
    let c = b.as_slice();
    refine(spec, |q| volume_at(q, shape, c))
}

fn volume_at(q: &Quad, shape: &ShapeFamily, c: &[f64]) -> Result<f64> {
    match shape {
        ShapeFamily::OrthantBall { dim, radius } => region_moment(
            q,
            &Region::OrthantShell {
                dim: *dim,
                inner: 0.0,
                outer: *radius,
            },
            c,
        ),
        ShapeFamily::Box { lo, hi } => region_moment(
            q,
            &Region::Box {
                lo: lo.clone(),
                hi: hi.clone(),
            },
            c,
        ),
        ShapeFamily::ConeSlab {
            dim,
            axis,
            aperture,
            radius,
        } => cone_slab_moment(q, *dim, *axis, *aperture, *radius, c),
        ShapeFamily::TranslatedBall {
            dim,
            axis,
            offset,
            radius,
        } => {
            // slice at x_axis = t + y is an (N-1)-ball of radius sqrt(r^2 - y^2)
            let cbar = drop_coord(c, *axis);
            let ci = c[*axis];
            let n1 = (*dim - 1) as f64;
            let s = 0.5 * (n1 + cbar.iter().sum::<f64>());
            let slices = 2f64.powi(*dim as i32 - 1) * q.orthant_ball_moment(&cbar)?;
            let t = *offset;
            let along = q.endpoint_weighted(-radius, *radius, s, s, |nd| {
                // (r^2 - y^2)^s = (y + r)^s (r - y)^s, both factors in the rule
                pow0((t + nd.x).abs(), ci)
            })?;
            Ok(slices * along)
        }
    }
}

/// `int_region prod |u_j|^{c_j} du` over a piece parameter region.
fn region_moment(q: &Quad, region: &Region, c: &[f64]) -> Result<f64> {
    match region {
        Region::OrthantShell { dim, inner, outer } => {
            if *dim == 0 {
                return Ok(1.0);
            }
            let p = (*dim - 1) as f64 + c.iter().sum::<f64>();
            Ok(q.sphere_moment(c)? * q.radial_plain(p, *inner, *outer, |_| 1.0)?)
        }
        Region::Ball { dim, radius } => {
            if *dim == 0 {
                return Ok(1.0);
            }
            let p = (*dim - 1) as f64 + c.iter().sum::<f64>();
            Ok(2f64.powi(*dim as i32) * q.sphere_moment(c)? * q.radial_plain(p, 0.0, *radius, |_| 1.0)?)
        }
        Region::Box { lo, hi } => {
            let mut prod = 1.0;
            for ((l, h), cj) in lo.iter().zip(hi).zip(c) {
                prod *= if *l == 0.0 {
                    q.endpoint_weighted(0.0, *h, *cj, 0.0, |_| 1.0)?
                } else {
                    q.endpoint_weighted(*l, *h, 0.0, 0.0, |nd| pow0(nd.x, *cj))?
                };
            }
            Ok(prod)
        }
        Region::ConeSlab {
            dim,
            axis,
            aperture,
            radius,
        } => cone_slab_moment(q, *dim, *axis, *aperture, *radius, c),
    }
}

/// `int prod u^C` over `{u >= 0, |u| < R, u_axis < eps |u without axis|}` in `R^dim`.
fn cone_slab_moment(q: &Quad, dim: usize, axis: usize, eps: f64, r: f64, c: &[f64]) -> Result<f64> {
    if dim <= 1 {
        return Ok(0.0);
    }
    let cbar = drop_coord(c, axis);
    let ci = c[axis];
    let p = (dim - 2) as f64 + cbar.iter().sum::<f64>();
    let knee = cone_knee(eps, r);
    let angular = q.sphere_moment(&cbar)?;
    // below the knee the cone caps the axis coordinate at eps*rho
    let inner = q.radial_plain(p + ci + 1.0, 0.0, knee, |_| eps.powf(ci + 1.0) / (ci + 1.0))?;
    // beyond it the sphere does: int_0^{gap} s^ci ds = gap^{ci+1}/(ci+1)
    let phi_knee = eps.recip().atan();
    let outer = q.radial_rim(p, r, 0.5 * (ci + 1.0), phi_knee, FRAC_PI_2, |_, _| 1.0 / (ci + 1.0))?;
    Ok(angular * (inner + outer))
}

/// Weighted area of one boundary piece.
fn piece_at(q: &Quad, piece: &BoundaryPiece, a: &[f64]) -> Result<f64> {
    let k = piece.axis();
    let abar = drop_coord(a, k);
    let ak = a[k];
    match &piece.kind {
        PieceKind::Flat { value, region, .. } => {
            let w = pow0(value.abs(), ak);
            if w == 0.0 {
                return Ok(0.0);
            }
            Ok(w * region_moment(q, region, &abar)?)
        }
        PieceKind::Graph { height, region, .. } => {
            let (copies, inner, outer, dim) = match region {
                Region::OrthantShell { dim, inner, outer } => (1.0, *inner, *outer, *dim),
                Region::Ball { dim, radius } => (2f64.powi(*dim as i32), 0.0, *radius, *dim),
                other => {
                    return Err(Error::Quadrature(format!(
                        "graph pieces over {other:?} are not supported"
                    )))
                }
            };
            let p = dim as f64 - 1.0 + abar.iter().sum::<f64>();
            let angular = q.sphere_moment(&abar)?;
            let radial = match height {
                Height::Cone { aperture } => {
                    // (eps rho)^{a_k} folded into the radial power
                    let factor = pow0(*aperture, ak) * aperture.hypot(1.0);
                    q.radial_plain(p + ak, inner, outer, |_| factor)?
                }
                Height::Sphere {
                    center,
                    radius,
                    upper,
                } => {
                    let phi_lo = if inner == 0.0 { 0.0 } else { rim_angle(inner, *radius) };
                    let phi_hi = rim_angle(outer, *radius);
                    if *center == 0.0 {
                        // |x_k|^{a_k} = gap^{a_k}: merged with the area element's gap^{-1}
                        q.radial_rim(p, *radius, 0.5 * (ak - 1.0), phi_lo, phi_hi, |_, _| *radius)?
                    } else {
                        let sign = if *upper { 1.0 } else { -1.0 };
                        q.radial_rim(p, *radius, -0.5, phi_lo, phi_hi, |_, gap| {
                            pow0((center + sign * gap).abs(), ak) * radius
                        })?
                    }
                }
            };
            Ok(copies * angular * radial)
        }
    }
}

/// Per-piece surface estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceEstimate {
    pub label: String,
    pub vanishing_weight: bool,
    pub estimate: IntegralEstimate,
}

/// Surface integrals of `x^A` over every boundary piece.
pub fn weighted_surface_pieces(
    shape: &ShapeFamily,
    a: &ExponentVector,
    spec: &QuadratureSpec,
) -> Result<Vec<PieceEstimate>> {
    check_len(shape, a)?;
    shape
        .boundary_pieces()
        .into_par_iter()
        .map(|piece| {
            let vanishing = piece.vanishing_weight(a);
            let estimate = if vanishing {
                IntegralEstimate::exact_zero()
            } else {
                refine(spec, |q| piece_at(q, &piece, a.as_slice()))?
            };
            Ok(PieceEstimate {
                label: piece.label,
                vanishing_weight: vanishing,
                estimate,
            })
        })
        .collect()
}

/// `int_{boundary} x^A dH^{N-1}`.
pub fn weighted_surface(shape: &ShapeFamily, a: &ExponentVector, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    let pieces = weighted_surface_pieces(shape, a, spec)?;
    Ok(IntegralEstimate::sum(pieces.iter().map(|p| &p.estimate)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ev(v: &[f64]) -> ExponentVector {
        ExponentVector::new(v.to_vec()).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn volume_examples() {
        let ob = ShapeFamily::orthant_ball(2, 1.0).unwrap();
        let v = weighted_volume(&ob, &ev(&[0.0, 0.0]), &spec()).unwrap();
        assert_relative_eq!(v.value, PI / 4.0, max_relative = 1e-12);
        assert!(v.converged && v.abs_error_est >= 0.0);
        let v = weighted_volume(&ob, &ev(&[1.0, 1.0]), &spec()).unwrap();
        assert_relative_eq!(v.value, 0.125, max_relative = 1e-12);
        let bx = ShapeFamily::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let v = weighted_volume(&bx, &ev(&[2.0, 3.0]), &spec()).unwrap();
        assert_relative_eq!(v.value, 1.0 / 12.0, max_relative = 1e-12);
        assert!(weighted_volume(&bx, &ev(&[1.0, 1.0, 1.0]), &spec()).is_err());
    }

    #[test]
    fn surface_examples() {
        let ob = ShapeFamily::orthant_ball(2, 1.0).unwrap();
        let s = weighted_surface(&ob, &ev(&[1.0, 1.0]), &spec()).unwrap();
        assert_relative_eq!(s.value, 0.5, max_relative = 1e-12);
        let s = weighted_surface(&ob, &ev(&[0.0, 0.0]), &spec()).unwrap();
        assert_relative_eq!(s.value, PI / 2.0 + 2.0, max_relative = 1e-12);
        let bx = ShapeFamily::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let s = weighted_surface(&bx, &ev(&[1.0, 0.0]), &spec()).unwrap();
        assert_relative_eq!(s.value, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn translated_ball_unweighted() {
        // plain disk of radius 1: area pi, perimeter 2 pi
        let tb = ShapeFamily::translated_ball(2, 0, 3.0, 1.0).unwrap();
        let z = ev(&[0.0, 0.0]);
        assert_relative_eq!(weighted_volume(&tb, &z, &spec()).unwrap().value, PI, max_relative = 1e-12);
        assert_relative_eq!(weighted_surface(&tb, &z, &spec()).unwrap().value, 2.0 * PI, max_relative = 1e-12);
        // first moment of the disk centred at 3: 3 pi
        let v = weighted_volume(&tb, &ev(&[1.0, 0.0]), &spec()).unwrap();
        assert_relative_eq!(v.value, 3.0 * PI, max_relative = 1e-12);
        // unit ball in R^3 centred at 5 e_2
        let tb3 = ShapeFamily::translated_ball(3, 1, 5.0, 1.0).unwrap();
        let z3 = ev(&[0.0, 0.0, 0.0]);
        assert_relative_eq!(weighted_volume(&tb3, &z3, &spec()).unwrap().value, 4.0 * PI / 3.0, max_relative = 1e-12);
        assert_relative_eq!(weighted_surface(&tb3, &z3, &spec()).unwrap().value, 4.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn cone_slab_unweighted_planar() {
        // N = 2, axis 0: sector of angle atan(eps) in the unit disk
        let eps: f64 = 0.3;
        let cs = ShapeFamily::cone_slab(2, 0, eps, 1.0).unwrap();
        let z = ev(&[0.0, 0.0]);
        let theta = eps.atan();
        assert_relative_eq!(weighted_volume(&cs, &z, &spec()).unwrap().value, 0.5 * theta, max_relative = 1e-12);
        // ray, arc, base segment on {x1 = 0}, and the facet on {x2 = 0} which is only the origin
        let pieces = weighted_surface_pieces(&cs, &z, &spec()).unwrap();
        let vals: Vec<f64> = pieces.iter().map(|p| p.estimate.value).collect();
        assert_relative_eq!(vals[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(vals[1], theta, max_relative = 1e-12);
        assert_relative_eq!(vals[2], 1.0, max_relative = 1e-12);
        assert_eq!(vals[3], 0.0);
    }
}
