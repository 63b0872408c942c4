//! Points on the lifted annulus and 2x2 differentials.

use crate::error::{Error, Result};

/// Fractional part in [0, 1). Exact for finite doubles.
#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    // x.floor() == x gives f == 0; negative epsilon rounding can produce 1.0
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// A point of the universal cover R x R of the annulus. `x` is the lifted
/// angle, `r` the fiber coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftPoint {
    pub x: f64,
    pub r: f64,
}

impl LiftPoint {
    pub fn new(x: f64, r: f64) -> Self {
        Self { x, r }
    }

    /// Projection to the annulus T x R.
    pub fn project(self) -> AnnulusPoint {
        AnnulusPoint {
            theta: frac(self.x),
            r: self.r,
        }
    }
}

/// A point of the annulus T x R with angle reduced to [0, 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusPoint {
    pub theta: f64,
    pub r: f64,
}

impl AnnulusPoint {
    pub fn new(theta: f64, r: f64) -> Self {
        Self {
            theta: frac(theta),
            r,
        }
    }

    /// The lift whose angle lies in [sheet, sheet + 1).
    pub fn lift(self, sheet: i64) -> LiftPoint {
        LiftPoint {
            x: self.theta + sheet as f64,
            r: self.r,
        }
    }
}

/// Row-major 2x2 matrix [[a, b], [c, d]], used for map differentials. The
/// upper-right entry `b` is the torsion slot: it measures how the image angle
/// responds to the fiber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobian2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Jacobian2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product self * rhs (apply rhs first).
    pub fn mul(&self, rhs: &Jacobian2) -> Jacobian2 {
        Jacobian2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn inverse(&self) -> Result<Jacobian2> {
        let det = self.det();
        if det.abs() < 1e-14 {
            return Err(Error::NearSingular { det });
        }
        Ok(Jacobian2 {
            a: self.d / det,
            b: -self.b / det,
            c: -self.c / det,
            d: self.a / det,
        })
    }

    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        (self.a * v.0 + self.b * v.1, self.c * v.0 + self.d * v.1)
    }

    /// Solve self * w = v without forming the inverse.
    pub fn solve(&self, v: (f64, f64)) -> Result<(f64, f64)> {
        let det = self.det();
        if det.abs() < 1e-14 {
            return Err(Error::NearSingular { det });
        }
        Ok((
            (self.d * v.0 - self.b * v.1) / det,
            (-self.c * v.0 + self.a * v.1) / det,
        ))
    }

    /// Entrywise max absolute difference.
    pub fn dist_inf(&self, other: &Jacobian2) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_is_exact_on_integers_and_negatives() {
        assert_eq!(frac(3.0), 0.0);
        assert_eq!(frac(-2.0), 0.0);
        assert_eq!(frac(-0.25), 0.75);
        assert_eq!(frac(7.25), 0.25);
        assert!(frac(-1e-300) < 1.0);
    }

    #[test]
    fn jacobian_inverse_and_solve_agree() {
        let j = Jacobian2::new(2.0, 1.0, 0.5, 1.0);
        let inv = j.inverse().unwrap();
        assert!(j.mul(&inv).dist_inf(&Jacobian2::identity()) < 1e-15);
        let v = (0.3, -1.2);
        let w = j.solve(v).unwrap();
        let w2 = inv.apply(v);
        assert!((w.0 - w2.0).abs() < 1e-15 && (w.1 - w2.1).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_reports() {
        let j = Jacobian2::new(1.0, 2.0, 0.5, 1.0);
        assert!(matches!(j.inverse(), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn project_and_lift_round_trip() {
        let p = LiftPoint::new(4.75, -0.5);
        let a = p.project();
        assert_eq!(a.theta, 0.75);
        assert_eq!(a.lift(4).x, 4.75);
    }
}
