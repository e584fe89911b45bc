//! `PSL(2,Z)` acting on the upper half-plane and its circle boundary:
//! Möbius action, hyperbolic distance, norm-ball enumeration, Poisson
//! kernels and Radon-Nikodym derivatives.
//!
//! The base point is `o = i`.  Matrices are stored with the sign
//! normalization that the first nonzero entry of `(a, b, c, d)` is positive,
//! so equality is equality in `PSL(2,Z)`.

use num_rational::Rational64;
use rand::Rng;

use crate::{EcgError, Result};

/// Hard cap for `enumerate_ball`; keeps entries small and the search fast.
pub const BALL_RADIUS_CAP: f64 = 10.0;

/// An element of `PSL(2,Z)`: an integer matrix with determinant 1, modulo
/// sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnimodularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl UnimodularMatrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a * d - b * c;
        if det != 1 {
            return Err(EcgError::NotUnimodular(det));
        }
        Ok(Self { a, b, c, d }.normalized())
    }

    fn normalized(self) -> Self {
        for v in [self.a, self.b, self.c, self.d] {
            if v != 0 {
                return if v > 0 {
                    self
                } else {
                    UnimodularMatrix {
                        a: -self.a,
                        b: -self.b,
                        c: -self.c,
                        d: -self.d,
                    }
                };
            }
        }
        self
    }

    pub fn identity() -> Self {
        UnimodularMatrix {
            a: 1,
            b: 0,
            c: 0,
            d: 1,
        }
    }

    /// The translation `z -> z + 1`.
    pub fn t() -> Self {
        UnimodularMatrix {
            a: 1,
            b: 1,
            c: 0,
            d: 1,
        }
    }

    /// The inversion `z -> -1/z`; stabilizes `i`.
    pub fn s() -> Self {
        UnimodularMatrix {
            a: 0,
            b: -1,
            c: 1,
            d: 0,
        }
        .normalized()
    }

    pub fn mul(&self, other: &Self) -> Self {
        UnimodularMatrix {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
        .normalized()
    }

    pub fn inverse(&self) -> Self {
        UnimodularMatrix {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
        .normalized()
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    /// Squared Frobenius norm `a^2 + b^2 + c^2 + d^2 = 2 cosh d(i, g.i)`.
    pub fn norm_sq(&self) -> i64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    /// `d(i, g.i)` in the hyperbolic metric.
    pub fn dist_to_base(&self) -> f64 {
        (self.norm_sq() as f64 / 2.0).acosh()
    }

    /// `g.i` with exact rational coordinates:
    /// `(ac + bd)/(c^2 + d^2) + i/(c^2 + d^2)`.
    pub fn orbit_point_exact(&self) -> (Rational64, Rational64) {
        let den = self.c * self.c + self.d * self.d;
        (
            Rational64::new(self.a * self.c + self.b * self.d, den),
            Rational64::new(1, den),
        )
    }

    pub fn apply(&self, z: UpperHalfPoint) -> UpperHalfPoint {
        // (az+b)(conj(cz+d)) / |cz+d|^2
        let (a, b, c, d) = (self.a as f64, self.b as f64, self.c as f64, self.d as f64);
        let den = (c * z.re + d) * (c * z.re + d) + c * c * z.im * z.im;
        let re = ((a * z.re + b) * (c * z.re + d) + a * c * z.im * z.im) / den;
        let im = z.im / den; // det = 1
        UpperHalfPoint { re, im }
    }

    pub fn apply_boundary(&self, xi: CirclePoint) -> CirclePoint {
        let (a, b, c, d) = (self.a as f64, self.b as f64, self.c as f64, self.d as f64);
        match xi {
            CirclePoint::Infinity => {
                if self.c == 0 {
                    CirclePoint::Infinity
                } else {
                    CirclePoint::Finite(a / c)
                }
            }
            CirclePoint::Finite(x) => {
                let den = c * x + d;
                if den == 0.0 {
                    CirclePoint::Infinity
                } else {
                    CirclePoint::Finite((a * x + b) / den)
                }
            }
        }
    }
}

impl std::fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

/// A point of the upper half-plane model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperHalfPoint {
    pub re: f64,
    pub im: f64,
}

impl UpperHalfPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if im.is_nan() || im <= 0.0 {
            return Err(EcgError::InvalidParameter(format!(
                "upper half-plane point needs im > 0, got {im}"
            )));
        }
        Ok(UpperHalfPoint { re, im })
    }

    /// The base point `o = i`.
    pub fn base() -> Self {
        UpperHalfPoint { re: 0.0, im: 1.0 }
    }
}

/// A boundary point of the hyperbolic plane: an extended real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CirclePoint {
    Finite(f64),
    Infinity,
}

impl CirclePoint {
    pub fn finite(self) -> Result<f64> {
        match self {
            CirclePoint::Finite(x) => Ok(x),
            CirclePoint::Infinity => Err(EcgError::InfinityNotSupported),
        }
    }
}

/// Hyperbolic distance `arcosh(1 + |z-w|^2 / (2 Im z Im w))`.
pub fn hyperbolic_distance(z: UpperHalfPoint, w: UpperHalfPoint) -> f64 {
    let dr = z.re - w.re;
    let di = z.im - w.im;
    (1.0 + (dr * dr + di * di) / (2.0 * z.im * w.im)).acosh()
}

/// All elements of `PSL(2,Z)` moving the base point at most `n`:
/// integer matrices with `a^2+b^2+c^2+d^2 <= 2 cosh n`, determinant 1,
/// modulo sign.
///
/// Enumerates first columns `(a, c)` with `a^2 + c^2` within the bound;
/// for each coprime column the solutions of `ad - bc = 1` form the line
/// `(b0 + t a, d0 + t c)`, which is walked while the norm bound admits it.
pub fn enumerate_ball(n: f64) -> Result<Vec<UnimodularMatrix>> {
    if n.is_nan() || n < 0.0 {
        return Err(EcgError::InvalidParameter(format!(
            "ball radius must be >= 0, got {n}"
        )));
    }
    if n > BALL_RADIUS_CAP {
        return Err(EcgError::CapExceeded(format!(
            "matrix ball radius capped at {BALL_RADIUS_CAP}, got {n}"
        )));
    }
    let bound = 2.0 * n.cosh() + 1e-9;
    let lim = bound.sqrt().floor() as i64;
    let mut out = Vec::new();
    for a in -lim..=lim {
        for c in -lim..=lim {
            let col = a * a + c * c;
            if col == 0 || col as f64 > bound {
                continue;
            }
            if gcd(a.unsigned_abs(), c.unsigned_abs()) != 1 {
                continue;
            }
            // particular solution of a*d - c*b = 1
            let (x, y) = bezout(a, c); // a*x + c*y = 1
            let (b0, d0) = (-y, x);
            // remaining budget for b^2 + d^2
            let rem = bound - col as f64;
            // walk (b0 + t a, d0 + t c) over the admissible t-window
            let tt = -((b0 * a + d0 * c) as f64) / col as f64;
            let half = (rem / col as f64).sqrt();
            let t_lo = (tt - half).floor() as i64 - 1;
            let t_hi = (tt + half).ceil() as i64 + 1;
            for t in t_lo..=t_hi {
                let b = b0 + t * a;
                let d = d0 + t * c;
                if (col + b * b + d * d) as f64 <= bound {
                    out.push(UnimodularMatrix { a, b, c, d }.normalized());
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Returns `(x, y)` with `a x + c y = gcd(a, c)`.
fn bezout(a: i64, c: i64) -> (i64, i64) {
    if c == 0 {
        return (a.signum(), 0);
    }
    let (x1, y1) = bezout(c, a % c);
    (y1, x1 - (a / c) * y1)
}

/// Distinct orbit points `g.i` (exact rationals) of a matrix set.
pub fn orbit_points(mats: &[UnimodularMatrix]) -> Vec<(Rational64, Rational64)> {
    let mut pts: Vec<_> = mats.iter().map(|g| g.orbit_point_exact()).collect();
    pts.sort();
    pts.dedup();
    pts
}

/// Radon-Nikodym derivative of the boundary action with respect to Lebesgue
/// measure: `1/(c xi + d)^2` — the worked-example form; it is a function of
/// the matrix, not of the orbit point.
pub fn rn_lebesgue(g: &UnimodularMatrix, xi: CirclePoint) -> Result<f64> {
    let x = xi.finite()?;
    let den = g.c as f64 * x + g.d as f64;
    if den == 0.0 {
        return Err(EcgError::RnPole);
    }
    Ok(1.0 / (den * den))
}

/// Poisson kernel `P(z, xi) = Im z / |z - xi|^2`.
fn poisson_kernel(z: UpperHalfPoint, xi: f64) -> f64 {
    let dr = z.re - xi;
    z.im / (dr * dr + z.im * z.im)
}

/// `dμ_{g.o}/dμ_o` for the harmonic (Cauchy) density based at `i`:
/// `P(g.i, xi) / P(i, xi) = Im(g.i) (1 + xi^2) / |g.i - xi|^2`.
///
/// Depends only on the orbit point `g.i`, so stabilizer cosets give equal
/// values.
pub fn poisson_ratio(g: &UnimodularMatrix, xi: CirclePoint) -> Result<f64> {
    let x = xi.finite()?;
    let z = g.apply(UpperHalfPoint::base());
    Ok(poisson_kernel(z, x) * (1.0 + x * x))
}

/// Busemann cocycle `β_ξ(o, z) = log(P(z, ξ)/P(o, ξ))`; `exp(v β)` with
/// `v = 1` recovers `poisson_ratio` for `z = g.i`.
pub fn busemann_circle(xi: CirclePoint, z: UpperHalfPoint) -> Result<f64> {
    let x = xi.finite()?;
    Ok((poisson_kernel(z, x) * (1.0 + x * x)).ln())
}

/// One draw from harmonic measure from `i`: standard Cauchy,
/// `xi = tan(pi (U - 1/2))`.
pub fn sample_harmonic<R: Rng + ?Sized>(rng: &mut R) -> CirclePoint {
    let u: f64 = rng.gen::<f64>();
    CirclePoint::Finite((std::f64::consts::PI * (u - 0.5)).tan())
}
