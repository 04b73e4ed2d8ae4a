//! Smooth radial cut-off used to truncate the Oseen vortex near the origin.

use crate::error::{Error, Result};

/// Radially symmetric, nondecreasing blend from 0 (for `r <= r_inner`) to 1
/// (for `r >= r_outer`).
///
/// With `θ = (r - r_inner) / (r_outer - r_inner)` and `g(θ) = exp(-1/θ)` for
/// `θ > 0` (zero otherwise) the profile is `χ = g(θ) / (g(θ) + g(1 - θ))`.
/// It is C^∞, all derivatives vanish at both ends of the transition, and
/// `χ' = χ'' = 0` outside the open annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCutoff {
    r_inner: f64,
    r_outer: f64,
}

/// `(χ, χ', χ'')` at one radius, derivatives taken with respect to `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffValue {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl CutoffValue {
    const ZERO: Self = Self {
        value: 0.0,
        d1: 0.0,
        d2: 0.0,
    };
    const ONE: Self = Self {
        value: 1.0,
        d1: 0.0,
        d2: 0.0,
    };
}

impl Default for RadialCutoff {
    fn default() -> Self {
        Self {
            r_inner: 1.0,
            r_outer: 2.0,
        }
    }
}

impl RadialCutoff {
    pub fn new(r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(r_inner.is_finite() && r_outer.is_finite() && 0.0 < r_inner && r_inner < r_outer) {
            return Err(Error::InvalidCutoff { r_inner, r_outer });
        }
        Ok(Self { r_inner, r_outer })
    }

    pub fn r_inner(&self) -> f64 {
        self.r_inner
    }

    pub fn r_outer(&self) -> f64 {
        self.r_outer
    }

    pub fn width(&self) -> f64 {
        self.r_outer - self.r_inner
    }

    /// True on the closed annulus where `∇χ` may be nonzero.
    pub fn in_transition(&self, r: f64) -> bool {
        r >= self.r_inner && r <= self.r_outer
    }

    pub fn eval(&self, r: f64) -> CutoffValue {
        let w = self.width();
        let theta = (r - self.r_inner) / w;
        if theta <= 0.0 {
            return CutoffValue::ZERO;
        }
        if theta >= 1.0 {
            return CutoffValue::ONE;
        }
        let one_minus = 1.0 - theta;
        // χ = 1 / (1 + e^φ) with φ = 1/θ - 1/(1-θ).
        let phi = 1.0 / theta - 1.0 / one_minus;
        let e = (-phi.abs()).exp();
        let (chi, sigma) = if phi >= 0.0 {
            (e / (1.0 + e), e / ((1.0 + e) * (1.0 + e)))
        } else {
            (1.0 / (1.0 + e), e / ((1.0 + e) * (1.0 + e)))
        };
        if sigma == 0.0 {
            return CutoffValue {
                value: chi,
                d1: 0.0,
                d2: 0.0,
            };
        }
        let dphi = -1.0 / (theta * theta) - 1.0 / (one_minus * one_minus);
        let d2phi = 2.0 / (theta * theta * theta) - 2.0 / (one_minus * one_minus * one_minus);
        // σ = χ(1-χ), dχ/dθ = -σ φ', d²χ/dθ² = -(1-2χ) χ_θ φ' - σ φ''.
        let d1_theta = -sigma * dphi;
        let d2_theta = -(1.0 - 2.0 * chi) * d1_theta * dphi - sigma * d2phi;
        CutoffValue {
            value: chi,
            d1: d1_theta / w,
            d2: d2_theta / (w * w),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_regions() {
        let c = RadialCutoff::default();
        for r in [0.0, 0.3, 1.0] {
            assert_eq!(c.eval(r), CutoffValue::ZERO);
        }
        for r in [2.0, 2.5, 1e6] {
            assert_eq!(c.eval(r), CutoffValue::ONE);
        }
    }

    #[test]
    fn midpoint_is_one_half() {
        let c = RadialCutoff::new(0.7, 3.1).unwrap();
        assert!((c.value(0.5 * (0.7 + 3.1)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(RadialCutoff::new(2.0, 1.0).is_err());
        assert!(RadialCutoff::new(0.0, 1.0).is_err());
        assert!(RadialCutoff::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = RadialCutoff::new(1.0, 2.5).unwrap();
        let h = 1e-4;
        let mut r = 1.01;
        while r < 2.49 {
            let v = c.eval(r);
            let fd1 = (c.value(r + h) - c.value(r - h)) / (2.0 * h);
            let fd2 = (c.value(r + h) - 2.0 * c.value(r) + c.value(r - h)) / (h * h);
            assert!((v.d1 - fd1).abs() < 1e-6 * (1.0 + v.d1.abs()), "r={r}");
            assert!((v.d2 - fd2).abs() < 1e-4 * (1.0 + v.d2.abs()), "r={r}");
            r += 0.0123;
        }
    }

    #[test]
    fn monotone_and_bounded() {
        let c = RadialCutoff::default();
        let mut prev = 0.0;
        for i in 0..=3000 {
            let r = i as f64 * 1e-3;
            let v = c.eval(r);
            assert!(v.value >= prev && (0.0..=1.0).contains(&v.value));
            assert!(v.d1 >= 0.0);
            prev = v.value;
        }
    }
}
