//! Parametric domain families and their boundary-piece decompositions.
//!
//! Every family is defined so that its weighted integrals reduce to products
//! of one-dimensional integrals (see [`crate::integrate`]). The pieces carry
//! enough geometry (`map`, `area_element`, region membership) to be sampled
//! pointwise, which is what the Monte Carlo oracle does.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;
use crate::weight::ExponentVector;

/// A parametric domain in `R^N`. Axes are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ShapeFamily {
    /// Ball of radius `radius` centred at `offset * e_axis`.
    TranslatedBall {
        dim: usize,
        axis: usize,
        offset: f64,
        radius: f64,
    },
    /// `{|x| < radius, x > 0, x_axis < aperture * |x without axis|}`.
    ConeSlab {
        dim: usize,
        axis: usize,
        aperture: f64,
        radius: f64,
    },
    /// Ball of radius `radius` intersected with the open positive orthant.
    OrthantBall { dim: usize, radius: f64 },
    /// Axis-aligned box `[lo, hi]` inside the closed positive orthant.
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidShape(format!("dimension must be >= 2, got {dim}")));
    }
    Ok(())
}

fn check_axis(axis: usize, dim: usize) -> Result<()> {
    if axis >= dim {
        return Err(Error::IndexOutOfRange { index: axis, dim });
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidShape(format!("{name} must be finite and > 0, got {v}")));
    }
    Ok(())
}

impl ShapeFamily {
    pub fn translated_ball(dim: usize, axis: usize, offset: f64, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        check_axis(axis, dim)?;
        positive("radius", radius)?;
        if !(offset.is_finite() && offset > 2.0 * radius) {
            return Err(Error::InvalidShape(format!(
                "translated ball needs offset > 2 * radius, got t = {offset}, r = {radius}"
            )));
        }
        Ok(Self::TranslatedBall {
            dim,
            axis,
            offset,
            radius,
        })
    }

    pub fn cone_slab(dim: usize, axis: usize, aperture: f64, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        check_axis(axis, dim)?;
        positive("aperture", aperture)?;
        positive("radius", radius)?;
        Ok(Self::ConeSlab {
            dim,
            axis,
            aperture,
            radius,
        })
    }

    pub fn orthant_ball(dim: usize, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        positive("radius", radius)?;
        Ok(Self::OrthantBall { dim, radius })
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        check_dim(lo.len())?;
        for (l, h) in lo.iter().zip(&hi) {
            if !(l.is_finite() && h.is_finite() && *l >= 0.0 && l < h) {
                return Err(Error::InvalidShape(format!(
                    "box needs 0 <= lo < hi componentwise, got [{l}, {h}]"
                )));
            }
        }
        Ok(Self::Box { lo, hi })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::TranslatedBall { dim, .. }
            | Self::ConeSlab { dim, .. }
            | Self::OrthantBall { dim, .. } => *dim,
            Self::Box { lo, .. } => lo.len(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::TranslatedBall { .. } => "tball",
            Self::ConeSlab { .. } => "cone-slab",
            Self::OrthantBall { .. } => "orthant-ball",
            Self::Box { .. } => "box",
        }
    }

    /// Image under `x -> lambda x`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        positive("dilation factor", lambda)?;
        Ok(match self.clone() {
            Self::TranslatedBall {
                dim,
                axis,
                offset,
                radius,
            } => Self::TranslatedBall {
                dim,
                axis,
                offset: lambda * offset,
                radius: lambda * radius,
            },
            Self::ConeSlab {
                dim,
                axis,
                aperture,
                radius,
            } => Self::ConeSlab {
                dim,
                axis,
                aperture,
                radius: lambda * radius,
            },
            Self::OrthantBall { dim, radius } => Self::OrthantBall {
                dim,
                radius: lambda * radius,
            },
            Self::Box { lo, hi } => Self::Box {
                lo: lo.iter().map(|v| lambda * v).collect(),
                hi: hi.iter().map(|v| lambda * v).collect(),
            },
        })
    }

    /// Point membership in the open set (boundary counts as outside).
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::TranslatedBall {
                axis,
                offset,
                radius,
                ..
            } => {
                let r2: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(j, v)| if j == *axis { (v - offset).powi(2) } else { v * v })
                    .sum();
                r2 < radius * radius
            }
            Self::ConeSlab {
                axis,
                aperture,
                radius,
                dim,
            } => Region::ConeSlab {
                dim: *dim,
                axis: *axis,
                aperture: *aperture,
                radius: *radius,
            }
            .contains_open(x),
            Self::OrthantBall { radius, .. } => {
                x.iter().all(|v| *v > 0.0) && norm2(x) < radius * radius
            }
            Self::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| v > l && v < h),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::TranslatedBall {
                dim,
                axis,
                offset,
                radius,
            } => {
                let mut lo = vec![-radius; *dim];
                let mut hi = vec![*radius; *dim];
                lo[*axis] = offset - radius;
                hi[*axis] = offset + radius;
                (lo, hi)
            }
            Self::ConeSlab {
                dim,
                axis,
                aperture,
                radius,
            } => Region::ConeSlab {
                dim: *dim,
                axis: *axis,
                aperture: *aperture,
                radius: *radius,
            }
            .bounding_box(),
            Self::OrthantBall { dim, radius } => (vec![0.0; *dim], vec![*radius; *dim]),
            Self::Box { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    /// True when the shape lies in the closed positive orthant.
    pub fn in_positive_orthant(&self) -> bool {
        !matches!(self, Self::TranslatedBall { .. })
    }

    /// Boundary decomposition into parametrised pieces.
    pub fn boundary_pieces(&self) -> Vec<BoundaryPiece> {
        match self {
            Self::OrthantBall { dim, radius } => {
                let n = *dim;
                let mut pieces = vec![BoundaryPiece {
                    label: "sphere".into(),
                    kind: PieceKind::Graph {
                        axis: n - 1,
                        height: Height::Sphere {
                            center: 0.0,
                            radius: *radius,
                            upper: true,
                        },
                        region: Region::OrthantShell {
                            dim: n - 1,
                            inner: 0.0,
                            outer: *radius,
                        },
                    },
                }];
                pieces.extend((0..n).map(|k| BoundaryPiece {
                    label: format!("facet x{}=0", k + 1),
                    kind: PieceKind::Flat {
                        axis: k,
                        value: 0.0,
                        region: Region::OrthantShell {
                            dim: n - 1,
                            inner: 0.0,
                            outer: *radius,
                        },
                    },
                }));
                pieces
            }
            Self::Box { lo, hi } => {
                let n = lo.len();
                let mut pieces = Vec::with_capacity(2 * n);
                for k in 0..n {
                    let region = Region::Box {
                        lo: drop_coord(lo, k),
                        hi: drop_coord(hi, k),
                    };
                    for (side, value) in [("lo", lo[k]), ("hi", hi[k])] {
                        pieces.push(BoundaryPiece {
                            label: format!("face x{}={} ({side})", k + 1, value),
                            kind: PieceKind::Flat {
                                axis: k,
                                value,
                                region: region.clone(),
                            },
                        });
                    }
                }
                pieces
            }
            Self::TranslatedBall {
                dim,
                axis,
                offset,
                radius,
            } => [true, false]
                .into_iter()
                .map(|upper| BoundaryPiece {
                    label: if upper { "upper hemisphere" } else { "lower hemisphere" }.into(),
                    kind: PieceKind::Graph {
                        axis: *axis,
                        height: Height::Sphere {
                            center: *offset,
                            radius: *radius,
                            upper,
                        },
                        region: Region::Ball {
                            dim: dim - 1,
                            radius: *radius,
                        },
                    },
                })
                .collect(),
            Self::ConeSlab {
                dim,
                axis,
                aperture,
                radius,
            } => {
                let n = *dim;
                let i = *axis;
                let knee = cone_knee(*aperture, *radius);
                let mut pieces = vec![
                    BoundaryPiece {
                        label: "A1 lateral cone".into(),
                        kind: PieceKind::Graph {
                            axis: i,
                            height: Height::Cone {
                                aperture: *aperture,
                            },
                            region: Region::OrthantShell {
                                dim: n - 1,
                                inner: 0.0,
                                outer: knee,
                            },
                        },
                    },
                    BoundaryPiece {
                        label: "A2 spherical band".into(),
                        kind: PieceKind::Graph {
                            axis: i,
                            height: Height::Sphere {
                                center: 0.0,
                                radius: *radius,
                                upper: true,
                            },
                            region: Region::OrthantShell {
                                dim: n - 1,
                                inner: knee,
                                outer: *radius,
                            },
                        },
                    },
                    BoundaryPiece {
                        label: "A3 base".into(),
                        kind: PieceKind::Flat {
                            axis: i,
                            value: 0.0,
                            region: Region::OrthantShell {
                                dim: n - 1,
                                inner: 0.0,
                                outer: *radius,
                            },
                        },
                    },
                ];
                for k in (0..n).filter(|k| *k != i) {
                    pieces.push(BoundaryPiece {
                        label: format!("C{} facet x{}=0", k + 1, k + 1),
                        kind: PieceKind::Flat {
                            axis: k,
                            value: 0.0,
                            region: Region::ConeSlab {
                                dim: n - 1,
                                axis: if k < i { i - 1 } else { i },
                                aperture: *aperture,
                                radius: *radius,
                            },
                        },
                    });
                }
                pieces
            }
        }
    }
}

/// Radius `R / sqrt(1 + eps^2)` where the lateral cone meets the sphere.
pub fn cone_knee(aperture: f64, radius: f64) -> f64 {
    radius / aperture.hypot(1.0)
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub(crate) fn drop_coord(x: &[f64], k: usize) -> Vec<f64> {
    x.iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, v)| *v)
        .collect()
}

fn insert_coord(u: &[f64], k: usize, v: f64) -> Vec<f64> {
    let mut x = Vec::with_capacity(u.len() + 1);
    x.extend_from_slice(&u[..k]);
    x.push(v);
    x.extend_from_slice(&u[k..]);
    x
}

/// Parameter region of a boundary piece (coordinates with the piece axis removed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "kebab-case")]
pub enum Region {
    /// `{u >= 0, inner <= |u| <= outer}`
    OrthantShell { dim: usize, inner: f64, outer: f64 },
    /// `{|u| <= radius}`
    Ball { dim: usize, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Lower-dimensional cone slab: `{u >= 0, |u| <= radius, u_axis <= aperture |u without axis|}`.
    ConeSlab {
        dim: usize,
        axis: usize,
        aperture: f64,
        radius: f64,
    },
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Self::OrthantShell { dim, .. } | Self::Ball { dim, .. } | Self::ConeSlab { dim, .. } => {
                *dim
            }
            Self::Box { lo, .. } => lo.len(),
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, u: &[f64]) -> bool {
        match self {
            Self::OrthantShell { inner, outer, .. } => {
                let r2 = norm2(u);
                u.iter().all(|v| *v >= 0.0) && r2 >= inner * inner && r2 <= outer * outer
            }
            Self::Ball { radius, .. } => norm2(u) <= radius * radius,
            Self::Box { lo, hi } => u
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| v >= l && v <= h),
            Self::ConeSlab {
                axis,
                aperture,
                radius,
                ..
            } => {
                u.iter().all(|v| *v >= 0.0)
                    && norm2(u) <= radius * radius
                    && u[*axis] <= aperture * norm2(&drop_coord(u, *axis)).sqrt()
            }
        }
    }

    fn contains_open(&self, u: &[f64]) -> bool {
        match self {
            Self::ConeSlab {
                axis,
                aperture,
                radius,
                ..
            } => {
                u.iter().all(|v| *v > 0.0)
                    && norm2(u) < radius * radius
                    && u[*axis] < aperture * norm2(&drop_coord(u, *axis)).sqrt()
            }
            _ => self.contains(u),
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::OrthantShell { dim, outer, .. } => (vec![0.0; *dim], vec![*outer; *dim]),
            Self::Ball { dim, radius } => (vec![-radius; *dim], vec![*radius; *dim]),
            Self::Box { lo, hi } => (lo.clone(), hi.clone()),
            Self::ConeSlab {
                dim,
                axis,
                aperture,
                radius,
            } => {
                let mut hi = vec![*radius; *dim];
                hi[*axis] = if *dim == 1 {
                    0.0
                } else {
                    radius.min(aperture * radius)
                };
                (vec![0.0; *dim], hi)
            }
        }
    }
}

/// Height function of a graph piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "height", rename_all = "kebab-case")]
pub enum Height {
    /// `x_axis = aperture * |u|`
    Cone { aperture: f64 },
    /// `x_axis = center +/- sqrt(radius^2 - |u|^2)`
    Sphere { center: f64, radius: f64, upper: bool },
}

impl Height {
    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            Self::Cone { aperture } => aperture * norm2(u).sqrt(),
            Self::Sphere {
                center,
                radius,
                upper,
            } => {
                let gap = (radius * radius - norm2(u)).max(0.0).sqrt();
                if *upper {
                    center + gap
                } else {
                    center - gap
                }
            }
        }
    }

    pub fn area_element(&self, u: &[f64]) -> f64 {
        match self {
            Self::Cone { aperture } => aperture.hypot(1.0),
            Self::Sphere { radius, .. } => radius / (radius * radius - norm2(u)).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PieceKind {
    /// Flat piece `x_axis = value`.
    Flat { axis: usize, value: f64, region: Region },
    /// Graph `x_axis = height(u)`.
    Graph {
        axis: usize,
        height: Height,
        region: Region,
    },
}

/// One parametrised piece of a shape boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPiece {
    pub label: String,
    pub kind: PieceKind,
}

impl BoundaryPiece {
    /// Normal axis: the coordinate expressed as a function of the others.
    pub fn axis(&self) -> usize {
        match &self.kind {
            PieceKind::Flat { axis, .. } | PieceKind::Graph { axis, .. } => *axis,
        }
    }

    /// Parameter region (the reference domain).
    pub fn reference_domain(&self) -> &Region {
        match &self.kind {
            PieceKind::Flat { region, .. } | PieceKind::Graph { region, .. } => region,
        }
    }

    /// Lifts parameters `u` (length `N - 1`) to the boundary point in `R^N`.
    pub fn map(&self, u: &[f64]) -> Vec<f64> {
        match &self.kind {
            PieceKind::Flat { axis, value, .. } => insert_coord(u, *axis, *value),
            PieceKind::Graph { axis, height, .. } => insert_coord(u, *axis, height.eval(u)),
        }
    }

    pub fn area_element(&self, u: &[f64]) -> f64 {
        match &self.kind {
            PieceKind::Flat { .. } => 1.0,
            PieceKind::Graph { height, .. } => height.area_element(u),
        }
    }

    /// The coordinate hyperplane `{x_k = 0}` containing this piece, if any.
    pub fn coordinate_plane(&self) -> Option<usize> {
        match &self.kind {
            PieceKind::Flat { axis, value, .. } if *value == 0.0 => Some(*axis),
            _ => None,
        }
    }

    /// True when the piece lies in `{x_k = 0}` with `a_k > 0`, so its weighted area is zero.
    pub fn vanishing_weight(&self, a: &ExponentVector) -> bool {
        self.coordinate_plane()
            .is_some_and(|k| a.as_slice().get(k).is_some_and(|ak| *ak > 0.0))
    }

    /// Whether `x` lies on this piece, up to `tol` in the normal coordinate.
    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        let k = self.axis();
        let u = drop_coord(x, k);
        if !self.reference_domain().contains(&u) {
            return false;
        }
        let target = match &self.kind {
            PieceKind::Flat { value, .. } => *value,
            PieceKind::Graph { height, .. } => height.eval(&u),
        };
        (x[k] - target).abs() <= tol
    }
}

/// Full-positive-orthant weighted mass of the ball of radius `r`:
/// `r^{N+a} prod Gamma((a_j+1)/2) / (2^N Gamma(1 + (N+a)/2))`.
///
/// Multiply by `2^{N-k}` for the mass of the ball restricted to the cone where
/// only the `k` coordinates with positive exponent are constrained.
pub fn closed_form_orthant_ball_mass(a: &ExponentVector, r: f64) -> f64 {
    let n = a.len() as f64;
    let d = n + a.sum();
    let log_num: f64 = a.as_slice().iter().map(|aj| ln_gamma(0.5 * (aj + 1.0))).sum();
    let log_mass = log_num - n * std::f64::consts::LN_2 - ln_gamma(1.0 + 0.5 * d);
    r.powf(d) * log_mass.exp()
}

/// Parses the shape grammar, e.g. `cone-slab --axis 1 --eps 1e-3 --R 1`,
/// `tball --axis 1 --t 100 --r 1`, `orthant-ball --R 1`,
/// `box --lo 0,0 --hi 1,1`. Axis numbers are one-based.
pub fn parse_shape(spec: &str, dim: usize) -> Result<ShapeFamily> {
    let tokens: Vec<&str> = spec.split_whitespace().collect();
    parse_shape_tokens(&tokens, dim)
}

pub fn parse_shape_tokens<S: AsRef<str>>(tokens: &[S], dim: usize) -> Result<ShapeFamily> {
    let (family, rest) = tokens
        .split_first()
        .ok_or_else(|| Error::Parse("empty shape specification".into()))?;
    if rest.len() % 2 != 0 {
        return Err(Error::Parse("shape flags must come in --flag value pairs".into()));
    }
    let mut flags = std::collections::BTreeMap::new();
    for pair in rest.chunks(2) {
        let key = pair[0]
            .as_ref()
            .strip_prefix("--")
            .ok_or_else(|| Error::Parse(format!("expected a --flag, got {:?}", pair[0].as_ref())))?;
        flags.insert(key.to_string(), pair[1].as_ref().to_string());
    }
    let num = |key: &str| -> Result<f64> {
        let raw = flags
            .get(key)
            .ok_or_else(|| Error::Parse(format!("missing --{key}")))?;
        raw.parse::<f64>()
            .map_err(|_| Error::Parse(format!("--{key}: not a number: {raw:?}")))
    };
    let axis = || -> Result<usize> {
        let a = num("axis")?;
        if a < 1.0 || a.fract() != 0.0 {
            return Err(Error::Parse(format!("--axis must be a positive integer, got {a}")));
        }
        Ok(a as usize - 1)
    };
    let vector = |key: &str| -> Result<Vec<f64>> {
        let raw = flags
            .get(key)
            .ok_or_else(|| Error::Parse(format!("missing --{key}")))?;
        raw.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("--{key}: not a number: {t:?}")))
            })
            .collect()
    };
    let allowed: &[&str] = match family.as_ref() {
        "cone-slab" => &["axis", "eps", "R"],
        "tball" => &["axis", "t", "r"],
        "orthant-ball" => &["R"],
        "box" => &["lo", "hi"],
        other => return Err(Error::Parse(format!("unknown shape family {other:?}"))),
    };
    if let Some(bad) = flags.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown flag --{bad} for {}", family.as_ref())));
    }
    let shape = match family.as_ref() {
        "cone-slab" => ShapeFamily::cone_slab(dim, axis()?, num("eps")?, num("R")?)?,
        "tball" => ShapeFamily::translated_ball(dim, axis()?, num("t")?, num("r")?)?,
        "orthant-ball" => ShapeFamily::orthant_ball(dim, num("R")?)?,
        _ => ShapeFamily::boxed(vector("lo")?, vector("hi")?)?,
    };
    if shape.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: shape.dim(),
        });
    }
    Ok(shape)
}

/// A fixed set of shapes in `R^dim` covering every family at a few sizes and
/// aspect ratios. `dim >= 2`.
pub fn corpus(dim: usize) -> Vec<ShapeFamily> {
    let last = dim - 1;
    let stretched: Vec<f64> = (0..dim).map(|k| 0.7 + 0.5 * k as f64).collect();
    let shifted_lo: Vec<f64> = (0..dim).map(|k| 0.2 + 0.3 * k as f64).collect();
    let shifted_hi: Vec<f64> = shifted_lo.iter().enumerate().map(|(k, l)| l + 1.0 - 0.2 * k as f64).collect();
    [
        ShapeFamily::orthant_ball(dim, 1.0),
        ShapeFamily::orthant_ball(dim, 2.5),
        ShapeFamily::boxed(vec![0.0; dim], vec![1.0; dim]),
        ShapeFamily::boxed(vec![0.0; dim], stretched),
        ShapeFamily::boxed(shifted_lo, shifted_hi),
        ShapeFamily::cone_slab(dim, 0, 0.5, 1.0),
        ShapeFamily::cone_slab(dim, 0, 0.1, 1.0),
        ShapeFamily::cone_slab(dim, last, 0.3, 2.0),
        ShapeFamily::translated_ball(dim, 0, 3.0, 1.0),
        ShapeFamily::translated_ball(dim, last, 5.0, 2.0),
    ]
    .into_iter()
    .map(|s| s.expect("corpus shapes are valid"))
    .collect()
}

/// Angle `phi` with `sin(phi) = rho / r`, computed without cancellation near `r`.
pub(crate) fn rim_angle(rho: f64, r: f64) -> f64 {
    if rho >= r {
        return FRAC_PI_2;
    }
    rho.atan2(((r - rho) * (r + rho)).sqrt())
}
