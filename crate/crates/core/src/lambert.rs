//! Principal-branch Lambert W and the maps from an eigenvalue `ζ` of the
//! regularized symbol to a growth rate `μ` of the delayed relation
//! `μ e^{δμ} = ζ e^{δζ}`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `1/e`.
const INV_E: f64 = 0.367_879_441_171_442_33;

// e split into a head that multiplies exactly and a correction, so that
// `e·z + 1` keeps its low bits near the branch point.
const E_HI: f64 = std::f64::consts::E;
const E_LO: f64 = 1.445_646_891_729_250_2e-16;

/// Time shift and regularization scale of a reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayParams {
    pub delta: f64,
    pub epsilon: f64,
}

impl Default for DelayParams {
    fn default() -> Self {
        DelayParams {
            delta: 0.1,
            epsilon: 0.05,
        }
    }
}

impl DelayParams {
    pub fn new(delta: f64, epsilon: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("delta must be positive, got {delta}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(DelayParams { delta, epsilon })
    }
}

/// Principal branch `W₀(z)` for real `z ≥ −1/e`.
pub fn w0(z: f64) -> Result<f64> {
    if z.is_nan() {
        return Err(Error::Domain("w0 of NaN".into()));
    }
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    // Distance to the branch point, computed without cancellation.
    let ez1 = z.mul_add(E_HI, 1.0) + z * E_LO;
    if ez1 < 0.0 {
        // Allow the rounding of −1/e itself.
        if ez1 > -4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(Error::Domain(format!("w0 requires z >= -1/e, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }

    let p = (2.0 * ez1).sqrt();
    if p < 1e-3 {
        return Ok(branch_series(p));
    }
    let mut w = if z < -0.25 {
        branch_series(p)
    } else if z < 3.0 {
        // Padé-like start, good on the middle range.
        z * (1.0 + 4.0 / 3.0 * z) / (1.0 + 7.0 / 3.0 * z + 5.0 / 6.0 * z * z)
    } else {
        let l = z.ln();
        l - l.ln()
    };

    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(1e-300) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

/// Series of `W₀` about the branch point in `p = √(2(ez + 1))`.
fn branch_series(p: f64) -> f64 {
    const C: [f64; 8] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
        -221.0 / 8505.0,
        680_863.0 / 43_545_600.0,
    ];
    C.iter().rev().fold(0.0, |acc, c| acc * p + c)
}

/// Largest real root `μ` of `μ e^{δμ} = ζ e^{δζ}` for real `ζ`.
///
/// Equals `ζ` whenever `δζ ≥ −1`; below that the principal branch pulls the
/// root back to `(1/δ) W₀(δζe^{δζ}) ≥ −1/δ`. `delta` must be positive.
pub fn m_max(zeta: f64, delta: f64) -> f64 {
    let x = delta * zeta;
    if x >= -1.0 {
        return zeta;
    }
    let arg = x * x.exp();
    // x e^x ≥ −1/e for every real x, so the only failure is rounding below it.
    w0(arg.max(-INV_E)).unwrap_or(-1.0) / delta
}

/// The rough map `ζ e^{δζ}`.
pub fn m_star(zeta: f64, delta: f64) -> f64 {
    zeta * (delta * zeta).exp()
}

/// Complex form of [`m_star`].
pub fn m_star_complex(zeta: Complex64, delta: f64) -> Complex64 {
    let (a, b) = (zeta.re, zeta.im);
    let g = (delta * a).exp();
    let (s, c) = (delta * b).sin_cos();
    Complex64::new(g * (a * c - b * s), g * (b * c + a * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Bisection on `w e^w = z` over `[lo, hi]`, independent of Halley.
    fn bisect(z: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn fixed_values() {
        assert_eq!(w0(0.0).unwrap(), 0.0);
        assert!((w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-12);
        assert!((w0(-INV_E).unwrap() + 1.0).abs() < 1e-12);
        assert!((w0(-(-1.0f64).exp()).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_below_branch_point() {
        assert!(w0(-0.37).is_err());
        assert!(w0(f64::NAN).is_err());
    }

    #[test]
    fn matches_bisection() {
        for &z in &[-0.3678, -0.3, -0.1, 1e-8, 0.5, 2.0, 10.0, 1e3, 1e10] {
            let want = bisect(z, -1.0, 30.0);
            let got = w0(z).unwrap();
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "{z}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn near_branch_point() {
        for k in 1..=40 {
            let z = -INV_E + 10f64.powi(-k / 2 - 2) * (k as f64);
            let w = w0(z).unwrap();
            assert!((w * w.exp() - z).abs() <= 1e-15, "z = {z}");
        }
    }

    #[test]
    fn m_max_examples() {
        assert_eq!(m_max(2.0, 0.1), 2.0);
        assert_eq!(m_max(-10.0, 0.1), -10.0);
        let want = bisect(-2.0 * (-2.0f64).exp(), -1.0, 0.0) / 0.1;
        assert!((m_max(-20.0, 0.1) - want).abs() < 1e-10);
        assert!((m_max(-20.0, 0.1) + 4.0637).abs() < 1e-4);
    }

    #[test]
    fn m_max_continuous_at_threshold() {
        let below = m_max(-10.0 - 1e-7, 0.1);
        assert!((below + 10.0).abs() < 1e-2, "{below}");
        let below = m_max(-10.0 - 1e-12, 0.1);
        assert!((below + 10.0).abs() < 1e-4, "{below}");
    }

    #[test]
    fn m_star_examples() {
        assert_eq!(m_star(0.0, 0.1), 0.0);
        assert!((m_star(1.0, 0.1) - 1.105_170_918_075_647_6).abs() < 1e-15);
        let z = Complex64::new(-0.7, 2.3);
        let direct = z * (0.1 * z).exp();
        assert!((m_star_complex(z, 0.1) - direct).norm() < 1e-14);
    }

    #[test]
    fn w0_monotone_on_dense_grid() {
        let mut prev = -1.0 - 1e-9;
        for i in 0..=20_000 {
            let z = -INV_E + (10.0 + INV_E) * (i as f64) / 20_000.0;
            let w = w0(z).unwrap();
            assert!(w > prev, "not increasing at {z}");
            prev = w;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn defining_identity(z in -INV_E..10.0f64) {
            let w = w0(z).unwrap();
            prop_assert!(w >= -1.0);
            prop_assert!((w * w.exp() - z).abs() <= 1e-12 * z.abs().max(1.0));
        }

        #[test]
        fn m_max_fixed_point(zeta in -9.999..100.0f64, delta in 0.01..1.0f64) {
            let z = zeta / (10.0 * delta);
            prop_assert!((m_max(z, delta) - z).abs() <= 1e-12 * z.abs().max(1.0));
        }

        #[test]
        fn m_max_bounded_below(zeta in -1e3..1e3f64, delta in 0.01..1.0f64) {
            let m = m_max(zeta, delta);
            prop_assert!(m >= -1.0 / delta - 1e-12 / delta);
            if zeta < -1.0 / delta {
                prop_assert!(m <= 0.0);
            }
        }

        // The two maps differ by exactly |ζ||e^{δζ} − 1| on the fixed-point
        // range, so 1% agreement holds for |ζ| ≤ ln(1.01)/δ.
        #[test]
        fn m_star_vs_m_max(t in -1.0..1.0f64) {
            let delta = 0.1;
            let zeta = t * 1.01f64.ln() / delta;
            let diff = (m_star(zeta, delta) - m_max(zeta, delta)).abs();
            prop_assert!(diff <= 0.01 * zeta.abs() + 1e-15);
            let exact = zeta.abs() * ((delta * zeta).exp() - 1.0).abs();
            prop_assert!((diff - exact).abs() <= 1e-14);
        }
    }
}
