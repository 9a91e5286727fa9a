//! One-dimensional building blocks and the dimension-recursive ball moments.

use std::cell::Cell;
use std::f64::consts::FRAC_PI_2;

use crate::error::Result;
use crate::integrate::gauss::cached_rule;

/// A quadrature node on `[lo, hi]` with both endpoint distances computed directly.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub x: f64,
    pub from_lo: f64,
    pub to_hi: f64,
}

/// Fixed-order quadrature context; counts integrand evaluations.
pub(crate) struct Quad {
    n: usize,
    evals: Cell<u64>,
}

impl Quad {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            evals: Cell::new(0),
        }
    }

    pub fn evaluations(&self) -> u64 {
        self.evals.get()
    }

    fn tick(&self, k: usize) {
        self.evals.set(self.evals.get() + k as u64);
    }

    /// `int_lo^hi (x - lo)^al (hi - x)^ar g(x) dx` with both singular factors in the rule.
    pub fn endpoint_weighted(
        &self,
        lo: f64,
        hi: f64,
        al: f64,
        ar: f64,
        g: impl Fn(Node) -> f64,
    ) -> Result<f64> {
        let len = hi - lo;
        if len <= 0.0 {
            return Ok(0.0);
        }
        if ar == 0.0 {
            let rule = cached_rule(self.n, al)?;
            self.tick(rule.len());
            let s: f64 = rule
                .pairs()
                .map(|(u, w)| {
                    let from_lo = len * u;
                    w * g(Node {
                        x: lo + from_lo,
                        from_lo,
                        to_hi: len * (1.0 - u),
                    })
                })
                .sum();
            return Ok(len.powf(al + 1.0) * s);
        }
        if al == 0.0 {
            let rule = cached_rule(self.n, ar)?;
            self.tick(rule.len());
            let s: f64 = rule
                .pairs()
                .map(|(u, w)| {
                    let to_hi = len * u;
                    w * g(Node {
                        x: hi - to_hi,
                        from_lo: len * (1.0 - u),
                        to_hi,
                    })
                })
                .sum();
            return Ok(len.powf(ar + 1.0) * s);
        }
        // Both ends singular: split at the midpoint.
        let h = 0.5 * len;
        let left_rule = cached_rule(self.n, al)?;
        let right_rule = cached_rule(self.n, ar)?;
        self.tick(left_rule.len() + right_rule.len());
        let left: f64 = left_rule
            .pairs()
            .map(|(u, w)| {
                let from_lo = h * u;
                let to_hi = len - from_lo;
                w * to_hi.powf(ar)
                    * g(Node {
                        x: lo + from_lo,
                        from_lo,
                        to_hi,
                    })
            })
            .sum();
        let right: f64 = right_rule
            .pairs()
            .map(|(u, w)| {
                let to_hi = h * u;
                let from_lo = len - to_hi;
                w * from_lo.powf(al)
                    * g(Node {
                        x: hi - to_hi,
                        from_lo,
                        to_hi,
                    })
            })
            .sum();
        Ok(h.powf(al + 1.0) * left + h.powf(ar + 1.0) * right)
    }

    /// `int_0^1 x^c dx` evaluated by the rule (exact up to roundoff).
    fn unit_power(&self, c: f64) -> Result<f64> {
        self.endpoint_weighted(0.0, 1.0, c, 0.0, |_| 1.0)
    }

    /// `M+_d(C) = int over the unit ball in the positive orthant of R^d of prod u_j^{c_j}`.
    ///
    /// Peeling one coordinate at a time,
    /// `M+_d(C) = int_0^1 x^{c_0} (1 - x^2)^{(d - 1 + sum C')/2} dx * M+_{d-1}(C')`.
    pub fn orthant_ball_moment(&self, c: &[f64]) -> Result<f64> {
        match c.len() {
            0 => Ok(1.0),
            1 => self.unit_power(c[0]),
            d => {
                let rest = &c[1..];
                let q = 0.5 * ((d - 1) as f64 + rest.iter().sum::<f64>());
                // (1 - x^2)^q = (1 - x)^q (1 + x)^q
                let first =
                    self.endpoint_weighted(0.0, 1.0, c[0], q, |nd| (1.0 + nd.x).powf(q))?;
                Ok(first * self.orthant_ball_moment(rest)?)
            }
        }
    }

    /// Angular moment `int over S^{d-1} cap positive orthant of prod theta_j^{c_j}`,
    /// obtained as `(d + sum C) M+_d(C)`. For `d = 1` this is `1` (a single point).
    pub fn sphere_moment(&self, c: &[f64]) -> Result<f64> {
        if c.len() <= 1 {
            return Ok(1.0);
        }
        let d = c.len() as f64 + c.iter().sum::<f64>();
        Ok(d * self.orthant_ball_moment(c)?)
    }

    /// `int_lo^hi rho^p g(rho) drho`, absorbing `rho^p` when `lo = 0`.
    pub fn radial_plain(&self, p: f64, lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
        if lo == 0.0 {
            self.endpoint_weighted(0.0, hi, p, 0.0, |nd| g(nd.x))
        } else {
            self.endpoint_weighted(lo, hi, 0.0, 0.0, |nd| nd.x.powf(p) * g(nd.x))
        }
    }

    /// `int rho^p (r^2 - rho^2)^power g(rho, gap) drho` over `rho = r sin(phi)`,
    /// `phi in [phi_lo, phi_hi]`, where `gap = sqrt(r^2 - rho^2) = r cos(phi)`.
    ///
    /// The factors `sin^p` at `phi = 0` and `cos^{2 power + 1}` at `phi = pi/2`
    /// are absorbed into the rule; `power >= -1/2` is required.
    pub fn radial_rim(
        &self,
        p: f64,
        r: f64,
        power: f64,
        phi_lo: f64,
        phi_hi: f64,
        g: impl Fn(f64, f64) -> f64,
    ) -> Result<f64> {
        let cos_pow = 2.0 * power + 1.0;
        debug_assert!(cos_pow >= 0.0);
        let at_origin = phi_lo == 0.0;
        let at_rim = phi_hi >= FRAC_PI_2;
        let phi_hi = phi_hi.min(FRAC_PI_2);
        let al = if at_origin { p } else { 0.0 };
        let ar = if at_rim { cos_pow } else { 0.0 };
        let scale = r.powf(p + 2.0 * power + 1.0);
        let s = self.endpoint_weighted(phi_lo, phi_hi, al, ar, |nd| {
            let sin = if at_origin { nd.from_lo.sin() } else { nd.x.sin() };
            let cos = if at_rim { nd.to_hi.sin() } else { nd.x.cos() };
            let f_lo = if at_origin {
                sinc(nd.from_lo).powf(p)
            } else {
                pow0(sin, p)
            };
            let f_hi = if at_rim {
                sinc(nd.to_hi).powf(cos_pow)
            } else {
                pow0(cos, cos_pow)
            };
            f_lo * f_hi * g(r * sin, r * cos)
        })?;
        Ok(scale * s)
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `x^e` with `0^0 = 1`.
pub(crate) fn pow0(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}
