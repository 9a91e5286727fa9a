//! Monte Carlo oracle for weighted volumes and surfaces.
//!
//! Volumes draw each coordinate from the density proportional to `|x_j|^{b_j}`
//! on the bounding box, so the estimator is `Z * 1_shape(x)` with an elementary
//! normalising constant `Z`. Flat boundary pieces reuse the volume sampler in
//! their parameter region. Spherical pieces sample directions uniformly on the
//! sphere, which avoids the unbounded area element of a graph parametrisation.
//!
//! Work is split into fixed-size batches, each with its own ChaCha stream, and
//! reduced in batch order, so results do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::quadrature::PieceEstimate;
use crate::integrate::reduce::pow0;
use crate::integrate::{IntegralEstimate, McSpec};
use crate::shapes::{drop_coord, norm2, BoundaryPiece, Height, PieceKind, Region, ShapeFamily};
use statrs::function::gamma::gamma;
use crate::weight::{eval_weight, ExponentVector};

const BATCH: u64 = 1 << 15;

/// Samples one coordinate from the density proportional to `|x|^e` on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
struct PowerSampler {
    lo: f64,
    hi: f64,
    e1: f64,
    neg_mass: f64,
    pos_mass: f64,
}

impl PowerSampler {
    fn new(lo: f64, hi: f64, e: f64) -> Self {
        let e1 = e + 1.0;
        let (neg_mass, pos_mass) = if lo >= 0.0 {
            (0.0, (hi.powf(e1) - lo.powf(e1)) / e1)
        } else if hi <= 0.0 {
            ((lo.abs().powf(e1) - hi.abs().powf(e1)) / e1, 0.0)
        } else {
            (lo.abs().powf(e1) / e1, hi.powf(e1) / e1)
        };
        Self {
            lo,
            hi,
            e1,
            neg_mass,
            pos_mass,
        }
    }

    /// `int_lo^hi |x|^e dx`
    fn norm(&self) -> f64 {
        self.neg_mass + self.pos_mass
    }

    /// Inverse CDF of the magnitude on `[m0, m1]` with `0 <= m0 <= m1`.
    fn magnitude(&self, m0: f64, m1: f64, u: f64) -> f64 {
        let p0 = m0.powf(self.e1);
        let p1 = m1.powf(self.e1);
        (p0 + u * (p1 - p0)).powf(1.0 / self.e1).clamp(m0, m1)
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        if self.lo >= 0.0 {
            self.magnitude(self.lo, self.hi, u)
        } else if self.hi <= 0.0 {
            -self.magnitude(-self.hi, -self.lo, u)
        } else if rng.gen::<f64>() * self.norm() < self.neg_mass {
            -self.magnitude(0.0, -self.lo, u)
        } else {
            self.magnitude(0.0, self.hi, u)
        }
    }
}

/// Mean and standard error of `f` over `count` draws, batched over ChaCha streams.
fn batched_mean<F>(count: u64, seed: u64, stream_base: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let batches = count.div_ceil(BATCH);
    let sums: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + b);
            let len = BATCH.min(count - b * BATCH);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..len {
                let v = f(&mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums
        .into_iter()
        .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let n = count as f64;
    let mean = s / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

fn estimate(mean: f64, se: f64, count: u64) -> IntegralEstimate {
    IntegralEstimate {
        value: mean,
        abs_error_est: se,
        evaluations: count,
        converged: true,
    }
}

/// Importance-sampled `int_{set} x^C` for a set given by its bounding box and membership test.
fn box_sampled(
    lo: &[f64],
    hi: &[f64],
    c: &[f64],
    mc: &McSpec,
    stream_base: u64,
    inside: impl Fn(&[f64]) -> bool + Sync,
) -> IntegralEstimate {
    let samplers: Vec<PowerSampler> = lo
        .iter()
        .zip(hi)
        .zip(c)
        .map(|((l, h), e)| PowerSampler::new(*l, *h, *e))
        .collect();
    let z: f64 = samplers.iter().map(PowerSampler::norm).product();
    if z == 0.0 || lo.is_empty() {
        return IntegralEstimate::exact_zero();
    }
    let (mean, se) = batched_mean(mc.sample_count, mc.seed, stream_base, |rng| {
        let x: Vec<f64> = samplers.iter().map(|s| s.sample(rng)).collect();
        if inside(&x) {
            z
        } else {
            0.0
        }
    });
    estimate(mean, se, mc.sample_count)
}

fn check(shape: &ShapeFamily, e: &ExponentVector, mc: &McSpec) -> Result<()> {
    if shape.dim() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: shape.dim(),
            got: e.len(),
        });
    }
    if mc.sample_count < 1000 {
        return Err(Error::InvalidParameter(format!(
            "sample_count must be >= 1000, got {}",
            mc.sample_count
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of `int_shape x^B dx` with its standard error.
pub fn mc_volume(shape: &ShapeFamily, b: &ExponentVector, mc: &McSpec) -> Result<IntegralEstimate> {
    check(shape, b, mc)?;
    let (lo, hi) = shape.bounding_box();
    Ok(box_sampled(&lo, &hi, b.as_slice(), mc, 0, |x| shape.contains(x)))
}

/// `|S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)`
fn sphere_area(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(0.5 * n as f64) / gamma(0.5 * n as f64)
}

fn uniform_direction<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let r = norm2(&g).sqrt();
        if r > 0.0 {
            return g.into_iter().map(|v| v / r).collect();
        }
    }
}

fn piece_estimate(piece: &BoundaryPiece, a: &ExponentVector, mc: &McSpec, stream_base: u64) -> Result<IntegralEstimate> {
    let k = piece.axis();
    let a_all = a.as_slice();
    let abar = drop_coord(a_all, k);
    let ak = a_all[k];
    match &piece.kind {
        PieceKind::Flat { value, region, .. } => {
            let w = pow0(value.abs(), ak);
            if w == 0.0 {
                return Ok(IntegralEstimate::exact_zero());
            }
            let (lo, hi) = region.bounding_box();
            let est = box_sampled(&lo, &hi, &abar, mc, stream_base, |u| region.contains(u));
            Ok(IntegralEstimate {
                value: w * est.value,
                abs_error_est: w * est.abs_error_est,
                ..est
            })
        }
        PieceKind::Graph {
            height: Height::Cone { aperture },
            region,
            ..
        } => {
            // the weight of the lifted point, times the constant area element
            let (lo, hi) = region.bounding_box();
            let jac = aperture.hypot(1.0);
            let samplers: Vec<PowerSampler> = lo
                .iter()
                .zip(&hi)
                .zip(&abar)
                .map(|((l, h), e)| PowerSampler::new(*l, *h, *e))
                .collect();
            let z: f64 = samplers.iter().map(PowerSampler::norm).product();
            let (mean, se) = batched_mean(mc.sample_count, mc.seed, stream_base, |rng| {
                let u: Vec<f64> = samplers.iter().map(|s| s.sample(rng)).collect();
                if region.contains(&u) {
                    z * pow0(aperture * norm2(&u).sqrt(), ak) * jac
                } else {
                    0.0
                }
            });
            Ok(estimate(mean, se, mc.sample_count))
        }
        PieceKind::Graph {
            height:
                Height::Sphere {
                    center,
                    radius,
                    upper,
                },
            region,
            ..
        } => {
            let n = a.len();
            let (folded, inner, outer) = match region {
                Region::OrthantShell { inner, outer, .. } => {
                    if !*upper {
                        return Err(Error::Quadrature(
                            "orthant spherical patch must be an upper graph".into(),
                        ));
                    }
                    (true, *inner, *outer)
                }
                Region::Ball { radius: rb, .. } => (false, 0.0, *rb),
                other => {
                    return Err(Error::Quadrature(format!(
                        "spherical graph over {other:?} is not supported"
                    )))
                }
            };
            // folding every coordinate to be nonnegative maps S^{n-1} onto 2^n copies of the patch
            let area = sphere_area(n) * radius.powi(n as i32 - 1)
                / if folded { 2f64.powi(n as i32) } else { 1.0 };
            let sign = if *upper { 1.0 } else { -1.0 };
            let (mean, se) = batched_mean(mc.sample_count, mc.seed, stream_base, |rng| {
                let mut w = uniform_direction(rng, n);
                if folded {
                    w.iter_mut().for_each(|v| *v = v.abs());
                } else if w[k] * sign < 0.0 {
                    return 0.0;
                }
                let mut x: Vec<f64> = w.iter().map(|v| radius * v).collect();
                let rho = norm2(&drop_coord(&x, k)).sqrt();
                if rho < inner || rho > outer {
                    return 0.0;
                }
                x[k] += center;
                area * eval_weight(&x, a_all)
            });
            Ok(estimate(mean, se, mc.sample_count))
        }
    }
}

/// Per-piece Monte Carlo surface estimates, each with its own stream range.
pub fn mc_surface_pieces(shape: &ShapeFamily, a: &ExponentVector, mc: &McSpec) -> Result<Vec<PieceEstimate>> {
    check(shape, a, mc)?;
    shape
        .boundary_pieces()
        .into_iter()
        .enumerate()
        .map(|(idx, piece)| {
            let vanishing = piece.vanishing_weight(a);
            let estimate = if vanishing {
                IntegralEstimate::exact_zero()
            } else {
                piece_estimate(&piece, a, mc, (idx as u64 + 1) << 32)?
            };
            Ok(PieceEstimate {
                label: piece.label,
                vanishing_weight: vanishing,
                estimate,
            })
        })
        .collect()
}

/// Monte Carlo estimate of `int_{boundary} x^A dH^{N-1}`; standard errors add in quadrature.
pub fn mc_surface(shape: &ShapeFamily, a: &ExponentVector, mc: &McSpec) -> Result<IntegralEstimate> {
    let pieces = mc_surface_pieces(shape, a, mc)?;
    let value = pieces.iter().map(|p| p.estimate.value).sum();
    let var: f64 = pieces.iter().map(|p| p.estimate.abs_error_est.powi(2)).sum();
    Ok(IntegralEstimate {
        value,
        abs_error_est: var.sqrt(),
        evaluations: pieces.iter().map(|p| p.estimate.evaluations).sum(),
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ev(v: &[f64]) -> ExponentVector {
        ExponentVector::new(v.to_vec()).unwrap()
    }

    fn within(est: IntegralEstimate, exact: f64, k: f64) -> bool {
        (est.value - exact).abs() <= k * est.abs_error_est
    }

    #[test]
    fn volume_examples() {
        let mc = McSpec::new(1_000_000, 7).unwrap();
        let ob = ShapeFamily::orthant_ball(2, 1.0).unwrap();
        let v = mc_volume(&ob, &ev(&[0.0, 0.0]), &mc).unwrap();
        assert!(within(v, PI / 4.0, 3.0), "{v:?}");
        let v = mc_volume(&ob, &ev(&[1.0, 1.0]), &mc).unwrap();
        assert!(within(v, 0.125, 3.0), "{v:?}");
        let bx = ShapeFamily::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let v = mc_volume(&bx, &ev(&[2.0, 3.0]), &mc).unwrap();
        // the box is its own bounding box: only samples landing on the boundary miss
        assert!((v.value - 1.0 / 12.0).abs() < 1e-5, "{v:?}");
    }

    #[test]
    fn surface_sphere_sampling() {
        let mc = McSpec::new(200_000, 3).unwrap();
        let ob = ShapeFamily::orthant_ball(2, 1.0).unwrap();
        let s = mc_surface(&ob, &ev(&[0.0, 0.0]), &mc).unwrap();
        assert!(within(s, PI / 2.0 + 2.0, 4.0), "{s:?}");
        let tb = ShapeFamily::translated_ball(3, 0, 4.0, 1.0).unwrap();
        let s = mc_surface(&tb, &ev(&[0.0, 0.0, 0.0]), &mc).unwrap();
        assert!(within(s, 4.0 * PI, 4.0), "{s:?}");
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let mc = McSpec::new(100_000, 11).unwrap();
        let cs = ShapeFamily::cone_slab(3, 0, 0.2, 1.0).unwrap();
        let a = ev(&[0.5, 1.0, 0.0]);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| mc_surface(&cs, &a, &mc).unwrap());
        let many = mc_surface(&cs, &a, &mc).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn rejects_small_budget() {
        let ob = ShapeFamily::orthant_ball(2, 1.0).unwrap();
        let mc = McSpec {
            sample_count: 10,
            seed: 0,
        };
        assert!(mc_volume(&ob, &ev(&[0.0, 0.0]), &mc).is_err());
    }
}
