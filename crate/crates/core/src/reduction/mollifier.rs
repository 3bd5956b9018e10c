//! Triangle mollifier `J_ε(x) = (1/ε)(1 − |x|/ε)₊`.
//!
//! Compactly supported, nonnegative, unit mass, and its transform
//! `sinc²(εs/2)` is nonnegative everywhere.

/// Triangle mollifier of half-width `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    pub epsilon: f64,
}

impl Mollifier {
    pub fn new(epsilon: f64) -> Self {
        Mollifier { epsilon }
    }

    /// Width whose transform matches `e^{−εs²}` to second order in `s`.
    pub fn matching_gaussian(epsilon: f64) -> Self {
        Mollifier {
            epsilon: (12.0 * epsilon).sqrt(),
        }
    }

    /// `γ₀ = ∫J`.
    pub fn mass(&self) -> f64 {
        1.0
    }

    /// `γ₁` in `J_ε*u = γ₀u + ε²γ₁u″ + O(ε⁴)`.
    pub fn second_moment(&self) -> f64 {
        1.0 / 12.0
    }

    pub fn transform_nonneg(&self) -> bool {
        true
    }

    pub fn value(&self, x: f64) -> f64 {
        let e = self.epsilon;
        (1.0 - x.abs() / e).max(0.0) / e
    }

    pub fn transform(&self, s: f64) -> f64 {
        let h = 0.5 * self.epsilon * s;
        if h.abs() < 1e-4 {
            let h2 = h * h;
            let sinc = 1.0 - h2 / 6.0 + h2 * h2 / 120.0;
            sinc * sinc
        } else {
            let sinc = h.sin() / h;
            sinc * sinc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson on `[a, b]` with `n` (even) intervals.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut sum = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(a + i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn moments_by_quadrature() {
        let j = Mollifier::new(0.3);
        let e = j.epsilon;
        let m0 = simpson(|x| j.value(x), -e, 0.0, 200) + simpson(|x| j.value(x), 0.0, e, 200);
        let m2 = simpson(|x| x * x * j.value(x), -e, 0.0, 200) + simpson(|x| x * x * j.value(x), 0.0, e, 200);
        assert!((m0 - j.mass()).abs() < 1e-12);
        assert!((0.5 * m2 / (e * e) - j.second_moment()).abs() < 1e-12);
    }

    #[test]
    fn transform_matches_quadrature_and_is_nonneg() {
        let j = Mollifier::new(0.7);
        for k in 0..200 {
            let s = 0.37 * k as f64;
            let q = 2.0 * simpson(|x| j.value(x) * (s * x).cos(), 0.0, j.epsilon, 2000);
            assert!((q - j.transform(s)).abs() < 1e-10, "{s}");
            assert!(j.transform(s) >= 0.0);
        }
    }

    #[test]
    fn expansion_error_is_fourth_order() {
        // u = exp(sin x); u″ = (cos²x − sin x) exp(sin x).
        let u = |x: f64| x.sin().exp();
        let upp = |x: f64| (x.cos().powi(2) - x.sin()) * x.sin().exp();
        let xs: Vec<f64> = (0..64).map(|i| i as f64 * 0.1).collect();
        let err = |eps: f64| {
            let j = Mollifier::new(eps);
            xs.iter()
                .map(|&x| {
                    let conv = simpson(|y| j.value(y) * u(x - y), -eps, 0.0, 400)
                        + simpson(|y| j.value(y) * u(x - y), 0.0, eps, 400);
                    (conv - j.mass() * u(x) - eps * eps * j.second_moment() * upp(x)).abs()
                })
                .fold(0.0, f64::max)
        };
        let es = [0.1, 0.05, 0.025];
        let errs: Vec<f64> = es.iter().map(|&e| err(e)).collect();
        // Least-squares slope of log err against log eps.
        let lx: Vec<f64> = es.iter().map(|e| e.ln()).collect();
        let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let (mx, my) = (lx.iter().sum::<f64>() / 3.0, ly.iter().sum::<f64>() / 3.0);
        let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!(slope >= 3.5, "slope {slope}, errors {errs:?}");
    }

    #[test]
    fn matching_width_agrees_to_second_order() {
        let eps = 0.05;
        let j = Mollifier::matching_gaussian(eps);
        for s in [1e-3, 1e-2, 5e-2] {
            let g = (-eps * s * s).exp();
            assert!((j.transform(s) - g).abs() < 10.0 * (eps * s * s).powi(2), "{s}");
        }
    }
}
