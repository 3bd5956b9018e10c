//! Eigenvalue branches of a matrix family over a wavenumber grid.
//!
//! Branches are continued from `s = 0`, where they are ordered by descending
//! real part. Between samples each branch is extended to the eigenvalue
//! nearest its linear extrapolation, with the pairing chosen to minimize
//! the total distance.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::symbol::SpectralSymbol;

/// Uniform grid `0 = s₀ < … < s_{n−1} = s_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavenumberGrid {
    pub s_max: f64,
    pub n: usize,
}

impl Default for WavenumberGrid {
    fn default() -> Self {
        WavenumberGrid { s_max: 40.0, n: 4096 }
    }
}

impl WavenumberGrid {
    pub fn new(s_max: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::Grid(format!("at least 16 samples are required, got {n}")));
        }
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(Error::Grid(format!("s_max must be positive, got {s_max}")));
        }
        Ok(WavenumberGrid { s_max, n })
    }

    pub fn spacing(&self) -> f64 {
        self.s_max / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.s_max
        } else {
            i as f64 * self.spacing()
        }
    }

    pub fn samples(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

/// Window where the leading pair of branches is a complex-conjugate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionData {
    /// Boundary between the real and complex parts of the grid. When the
    /// window reaches `s = 0` this is its upper end; otherwise its lower end.
    /// Zero when the window covers the whole grid.
    pub xi_c: f64,
    pub window_start: f64,
    pub window_end: f64,
    /// Per-sample flag: leading pair complex.
    pub complex: Vec<bool>,
    /// Common real part of the pair on the window, mean of the two real
    /// branches elsewhere.
    pub a: Vec<f64>,
    /// Positive imaginary part on the window, zero elsewhere.
    pub b: Vec<f64>,
}

impl CollisionData {
    /// Whether the window touches `s = 0`.
    pub fn starts_at_origin(&self) -> bool {
        self.window_start == 0.0
    }
}

/// Tracked eigenvalue curves, `branches[j][i]` at grid point `i`.
#[derive(Debug, Clone)]
pub struct EigenBranches {
    pub grid: WavenumberGrid,
    pub branches: Vec<Vec<Complex64>>,
    pub lambda_max: Vec<f64>,
    /// Scale of the matrix at each sample (largest eigenvalue modulus,
    /// at least the smallest positive normal), used for relative tests.
    pub scale: Vec<f64>,
    pub collision: Option<CollisionData>,
}

impl EigenBranches {
    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// Eigenvalues at grid point `i` by descending real part, the upper
    /// member of a conjugate pair first.
    pub fn sorted_at(&self, i: usize) -> Vec<Complex64> {
        order_at_origin(&self.at(i))
    }

    /// Eigenvalues at grid point `i`, in branch order.
    pub fn at(&self, i: usize) -> Vec<Complex64> {
        self.branches.iter().map(|b| b[i]).collect()
    }

    /// Grid index and value of the largest `λ_max`.
    pub fn argmax(&self) -> (usize, f64) {
        self.lambda_max.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, v)| if v > best.1 { (i, v) } else { best },
        )
    }

    /// Whether any branch has a non-negligible imaginary part anywhere.
    pub fn has_complex(&self) -> bool {
        (0..self.grid.n).any(|i| self.branches.iter().any(|b| is_complex(b[i], self.scale[i])))
    }

    /// CSV with columns `s, re_1..re_N, im_1..im_N, lambda_max`.
    pub fn to_csv(&self) -> String {
        let n = self.len();
        let mut out = String::from("s");
        for j in 1..=n {
            out.push_str(&format!(",re_{j}"));
        }
        for j in 1..=n {
            out.push_str(&format!(",im_{j}"));
        }
        out.push_str(",lambda_max\n");
        for i in 0..self.grid.n {
            out.push_str(&format!("{:?}", self.grid.point(i)));
            for b in &self.branches {
                out.push_str(&format!(",{:?}", b[i].re));
            }
            for b in &self.branches {
                out.push_str(&format!(",{:?}", b[i].im));
            }
            out.push_str(&format!(",{:?}\n", self.lambda_max[i]));
        }
        out
    }
}

/// Relative size of an imaginary part below which an eigenvalue counts as
/// real. Defective double roots split by about `√ε` of the matrix scale.
pub const COMPLEX_TOLERANCE: f64 = 1e-6;

fn is_complex(z: Complex64, scale: f64) -> bool {
    z.im.abs() > COMPLEX_TOLERANCE * scale
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex64>> {
    let n = m.nrows();
    if n == 1 {
        return Some(vec![Complex64::new(m[(0, 0)], 0.0)]);
    }
    let (_, t) = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000)?.unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 == n || t[(i + 1, i)] == 0.0 {
            out.push(Complex64::new(t[(i, i)], 0.0));
            i += 1;
            continue;
        }
        let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
        let mid = 0.5 * (a + d);
        let half = 0.5 * (a - d);
        let disc = half * half + b * c;
        if disc >= 0.0 {
            let r = disc.sqrt();
            // Larger root first, smaller from the product to avoid cancellation.
            let big = if mid >= 0.0 { mid + r } else { mid - r };
            let det = a * d - b * c;
            let small = if big != 0.0 { det / big } else { mid - r };
            out.push(Complex64::new(big, 0.0));
            out.push(Complex64::new(small, 0.0));
        } else {
            let r = (-disc).sqrt();
            out.push(Complex64::new(mid, r));
            out.push(Complex64::new(mid, -r));
        }
        i += 2;
    }
    out.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(out)
}

/// Samples and tracks the eigenvalues of `symbol` on `grid`.
pub fn sample_eigenvalues(symbol: &SpectralSymbol, grid: WavenumberGrid) -> Result<EigenBranches> {
    sample_family(|s| symbol.evaluate(s), grid)
}

/// Samples and tracks the eigenvalues of an arbitrary matrix family.
///
/// Samples are computed in parallel and tracked serially; the result does
/// not depend on the number of threads.
pub fn sample_family<F>(family: F, grid: WavenumberGrid) -> Result<EigenBranches>
where
    F: Fn(f64) -> DMatrix<f64> + Sync,
{
    let raw: Vec<Result<Vec<Complex64>>> = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            let s = grid.point(i);
            eigenvalues(&family(s)).ok_or(Error::EigenFailure { s })
        })
        .collect();
    let raw: Vec<Vec<Complex64>> = raw.into_iter().collect::<Result<_>>()?;
    let mut branches = track(&raw);
    let n = branches.len();
    let scale: Vec<f64> = (0..grid.n)
        .map(|i| raw[i].iter().fold(f64::MIN_POSITIVE, |m, z| m.max(z.norm())))
        .collect();

    // Real samples are reported with zero imaginary part.
    for b in branches.iter_mut() {
        for (i, z) in b.iter_mut().enumerate() {
            if !is_complex(*z, scale[i]) {
                z.im = 0.0;
            }
        }
    }
    let lambda_max = (0..grid.n)
        .map(|i| (0..n).map(|j| branches[j][i].re).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut out = EigenBranches {
        grid,
        branches,
        lambda_max,
        scale,
        collision: None,
    };
    out.collision = detect_collision(&out, &family)?;
    Ok(out)
}

fn order_at_origin(vals: &[Complex64]) -> Vec<Complex64> {
    let mut v = vals.to_vec();
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    v
}

fn track(raw: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = raw[0].len();
    let mut branches: Vec<Vec<Complex64>> = vec![Vec::with_capacity(raw.len()); n];
    for (j, z) in order_at_origin(&raw[0]).into_iter().enumerate() {
        branches[j].push(z);
    }
    for i in 1..raw.len() {
        let predicted: Vec<Complex64> = (0..n)
            .map(|j| {
                let last = branches[j][i - 1];
                if i >= 2 {
                    2.0 * last - branches[j][i - 2]
                } else {
                    last
                }
            })
            .collect();
        let assignment = assign(&predicted, &raw[i]);
        for j in 0..n {
            branches[j].push(raw[i][assignment[j]]);
        }
    }
    branches
}

/// For each prediction, the index of its matched candidate.
fn assign(predicted: &[Complex64], candidates: &[Complex64]) -> Vec<usize> {
    let n = predicted.len();
    if n <= 6 {
        let mut best = (f64::INFINITY, Vec::new());
        let mut perm: Vec<usize> = (0..n).collect();
        permutations(&mut perm, 0, &mut |p| {
            let cost: f64 = p
                .iter()
                .enumerate()
                .map(|(j, &k)| (predicted[j] - candidates[k]).norm())
                .sum();
            if cost < best.0 {
                best = (cost, p.to_vec());
            }
        });
        best.1
    } else {
        let mut used = vec![false; n];
        let mut out = vec![0; n];
        let mut pairs: Vec<(f64, usize, usize)> = (0..n)
            .flat_map(|j| (0..n).map(move |k| (j, k)))
            .map(|(j, k)| ((predicted[j] - candidates[k]).norm(), j, k))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut done = vec![false; n];
        for (_, j, k) in pairs {
            if !done[j] && !used[k] {
                done[j] = true;
                used[k] = true;
                out[j] = k;
            }
        }
        out
    }
}

fn permutations(p: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// Leading asymptotic term of `λ_max`: zero, or `coefficient · s²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaH {
    pub degree: u32,
    pub coefficient: f64,
}

impl LambdaH {
    pub const ZERO: LambdaH = LambdaH {
        degree: 0,
        coefficient: 0.0,
    };

    pub fn quadratic(coefficient: f64) -> Self {
        LambdaH { degree: 2, coefficient }
    }

    pub fn evaluate(&self, s: f64) -> f64 {
        match self.degree {
            2 => self.coefficient * s * s,
            _ => 0.0,
        }
    }
}

/// Fits `λ_max(s) ≈ α s² + β` over the top `fit_window` fraction of the
/// grid and keeps the quadratic term when it dominates `β` tenfold at
/// `s_max`.
pub fn fit_lambda_h(branches: &EigenBranches, fit_window: f64) -> Result<LambdaH> {
    if !(fit_window > 0.0 && fit_window <= 1.0) {
        return Err(Error::Domain(format!(
            "fit window must lie in (0, 1], got {fit_window}"
        )));
    }
    let grid = branches.grid;
    let first = (((1.0 - fit_window) * (grid.n - 1) as f64).floor() as usize).min(grid.n - 3);
    let pts: Vec<(f64, f64)> = (first..grid.n)
        .map(|i| {
            let s = grid.point(i);
            (s * s, branches.lambda_max[i])
        })
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (x - mx), b + (x - mx) * (y - my))
    });
    let alpha = sxy / sxx;
    let beta = my - alpha * mx;

    let spread = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let rms = (pts.iter().map(|(x, y)| (y - alpha * x - beta).powi(2)).sum::<f64>() / m).sqrt();
    let quadratic = alpha.abs() * grid.s_max * grid.s_max;

    // A roundoff-level slope over a λ_max that itself tends to zero.
    if quadratic <= 1e-9 * spread.max(1.0) {
        return Ok(LambdaH::ZERO);
    }
    if quadratic >= 10.0 * beta.abs() {
        if rms > 1e-2 * spread {
            return Err(Error::AmbiguousAsymptote(format!(
                "quadratic fit residual {rms:.3e} is large against |λ_max| up to {spread:.3e}"
            )));
        }
        if alpha >= 0.0 {
            return Err(Error::AmbiguousAsymptote(format!(
                "λ_max grows like +{alpha:.3e} s²; no stable leading transport"
            )));
        }
        return Ok(LambdaH::quadratic(alpha));
    }
    if quadratic > 1.0 * beta.abs() && quadratic > 1e-3 * spread.max(1.0) {
        return Err(Error::AmbiguousAsymptote(format!(
            "neither constant nor quadratic: α s_max² = {quadratic:.3e}, β = {beta:.3e}; extend the grid"
        )));
    }
    Ok(LambdaH::ZERO)
}

/// Snaps a quadratic `λ_h` onto the nearest `−d` among `diffusivities`
/// when the fit lies within 1% of it.
///
/// The leading eigenvalue of `−diag(d)s² + O(1)` grows like one of the
/// `−d s²` exactly, so the fit only has to identify which one.
pub fn snap_lambda_h(lambda_h: LambdaH, diffusivities: &[f64]) -> LambdaH {
    if lambda_h.degree != 2 {
        return lambda_h;
    }
    let a = lambda_h.coefficient;
    diffusivities
        .iter()
        .filter(|d| **d > 0.0 && (a + **d).abs() <= 1e-2 * **d)
        .min_by(|x, y| (a + **x).abs().total_cmp(&(a + **y).abs()))
        .map_or(lambda_h, |d| LambdaH::quadratic(-d))
}

/// [`fit_lambda_h`] followed by [`snap_lambda_h`] on the symbol's
/// diffusivities.
pub fn lambda_h_for(symbol: &SpectralSymbol, branches: &EigenBranches, fit_window: f64) -> Result<LambdaH> {
    fit_lambda_h(branches, fit_window).map(|lh| snap_lambda_h(lh, symbol.diffusivities()))
}

/// Finds the window where the two eigenvalues with largest real part form
/// a conjugate pair.
///
/// The leading pair is taken per sample by real part, so the pair always
/// carries `λ_max`. Returns `None` when the leading eigenvalue stays real.
/// More than one window, or a window with a real/complex boundary on both
/// sides, is reported as unsupported.
pub fn detect_collision<F>(branches: &EigenBranches, family: &F) -> Result<Option<CollisionData>>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    if branches.len() < 2 {
        return Ok(None);
    }
    let grid = branches.grid;
    let lead: Vec<(Complex64, Complex64)> = (0..grid.n)
        .map(|i| {
            let v = order_at_origin(&branches.at(i));
            (v[0], v[1])
        })
        .collect();
    let complex: Vec<bool> = lead.iter().map(|(z0, _)| z0.im != 0.0).collect();

    let mut runs = Vec::new();
    let mut i = 0;
    while i < grid.n {
        if complex[i] {
            let start = i;
            while i < grid.n && complex[i] {
                i += 1;
            }
            runs.push((start, i - 1));
        } else {
            i += 1;
        }
    }
    if runs.is_empty() {
        return Ok(None);
    }
    if runs.len() > 1 {
        let list: Vec<String> = runs
            .iter()
            .map(|(a, b)| format!("[{:.4}, {:.4}]", grid.point(*a), grid.point(*b)))
            .collect();
        return Err(Error::Unsupported(format!(
            "multiple complex windows {}",
            list.join(", ")
        )));
    }
    let (lo, hi) = runs[0];
    if lo > 0 && hi + 1 < grid.n {
        return Err(Error::Unsupported(format!(
            "complex window [{:.4}, {:.4}] is interior; a single real/complex boundary is required",
            grid.point(lo),
            grid.point(hi)
        )));
    }

    let window_start = if lo == 0 {
        0.0
    } else {
        refine(family, grid.point(lo - 1), grid.point(lo), true)
    };
    let window_end = if hi + 1 == grid.n {
        grid.s_max
    } else {
        refine(family, grid.point(hi), grid.point(hi + 1), false)
    };
    let xi_c = match (lo == 0, hi + 1 == grid.n) {
        (true, true) => 0.0,
        (true, false) => window_end,
        _ => window_start,
    };
    let a = lead.iter().map(|(z0, z1)| 0.5 * (z0.re + z1.re)).collect();
    let b = lead.iter().map(|(z0, _)| z0.im.abs()).collect();
    Ok(Some(CollisionData {
        xi_c,
        window_start,
        window_end,
        complex,
        a,
        b,
    }))
}

/// Squared gap of the two eigenvalues with largest real part: positive
/// for a real pair, negative for a conjugate pair.
fn pair_discriminant(m: &DMatrix<f64>) -> f64 {
    let Some(vals) = eigenvalues(m) else {
        return f64::NAN;
    };
    let v = order_at_origin(&vals);
    let d = v[0] - v[1];
    let scale = vals.iter().fold(f64::MIN_POSITIVE, |s, z| s.max(z.norm()));
    if d.im.abs() <= COMPLEX_TOLERANCE * scale {
        d.re * d.re
    } else {
        (d * d).re
    }
}

/// Bisects on the sign of the pair discriminant between `lo` and `hi`;
/// `lo_real` says which side of the boundary `lo` lies on. A double root
/// counts as real.
fn refine<F: Fn(f64) -> DMatrix<f64>>(family: &F, mut lo: f64, mut hi: f64, lo_real: bool) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (pair_discriminant(&family(mid)) >= 0.0) == lo_real {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netspec::{builtin_preset, Dimension};
    use crate::symbol::assemble_symbol;

    fn constant(m: DMatrix<f64>) -> impl Fn(f64) -> DMatrix<f64> + Sync {
        move |_| m.clone()
    }

    fn small_grid() -> WavenumberGrid {
        WavenumberGrid::new(10.0, 201).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(WavenumberGrid::new(1.0, 15).is_err());
        assert!(WavenumberGrid::new(0.0, 100).is_err());
        let g = WavenumberGrid::new(2.0, 21).unwrap();
        assert_eq!(g.point(20), 2.0);
        assert!((g.spacing() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn activator_inhibitor_double_root_at_origin() {
        let sym = assemble_symbol(&builtin_preset("activator_inhibitor").unwrap(), Dimension::One).unwrap();
        let br = sample_eigenvalues(&sym, small_grid()).unwrap();
        for z in br.at(0) {
            assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-7, "{z}");
        }
        assert!(br.collision.is_none());
    }

    #[test]
    fn diagonal_constant_branches() {
        let m = DMatrix::from_diagonal(&nalgebra::dvector![-5.0, 2.0]);
        let br = sample_family(constant(m), small_grid()).unwrap();
        assert!(br.branches[0].iter().all(|z| *z == Complex64::new(2.0, 0.0)));
        assert!(br.branches[1].iter().all(|z| *z == Complex64::new(-5.0, 0.0)));
        assert!(br.collision.is_none());
    }

    #[test]
    fn rotation_is_complex_everywhere() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let br = sample_family(constant(m), small_grid()).unwrap();
        let c = br.collision.unwrap();
        assert_eq!(c.xi_c, 0.0);
        assert_eq!(c.window_start, 0.0);
        assert!(c.b.iter().all(|b| (b - 1.0).abs() < 1e-12));
    }

    #[test]
    fn triangular_stays_real() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        assert!(sample_family(constant(m), small_grid()).unwrap().collision.is_none());
    }

    #[test]
    fn collision_located_by_discriminant() {
        // Eigenvalues −s ± √(1 − s²): real below s = 1, complex above.
        let fam = |s: f64| DMatrix::from_row_slice(2, 2, &[-s, 1.0, 1.0 - s * s, -s]);
        let br = sample_family(fam, WavenumberGrid::new(3.0, 301).unwrap()).unwrap();
        let c = br.collision.unwrap();
        assert!((c.xi_c - 1.0).abs() < 1e-10, "{}", c.xi_c);
        assert_eq!(c.window_end, 3.0);
        let i = 250; // s = 2.5
        assert!((c.b[i] - (2.5f64 * 2.5 - 1.0).sqrt()).abs() < 1e-12);
        assert!((c.a[i] + 2.5).abs() < 1e-12);
        assert_eq!(c.b[50], 0.0);
    }

    #[test]
    fn two_windows_unsupported() {
        // Discriminant 1 − (s − 2)² ... sign changes twice inside the grid.
        let fam = |s: f64| {
            let g = (s - 1.0) * (s - 2.0);
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, g, 0.0])
        };
        let err = sample_family(fam, WavenumberGrid::new(3.0, 301).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)), "{err:?}");
    }

    #[test]
    fn trace_and_determinant_hold() {
        for name in crate::netspec::PRESET_NAMES {
            let spec = builtin_preset(name).unwrap();
            let sym = assemble_symbol(&spec, spec.dimension).unwrap();
            let grid = WavenumberGrid::new(20.0, 400).unwrap();
            let Ok(br) = sample_eigenvalues(&sym, grid) else {
                continue;
            };
            for i in (0..grid.n).step_by(7) {
                let b = sym.evaluate(grid.point(i));
                let zs = br.at(i);
                let sum: Complex64 = zs.iter().sum();
                assert!((sum.re - b.trace()).abs() < 1e-9 && sum.im.abs() < 1e-9, "{name} trace");
                let det = b.determinant();
                let prod: Complex64 = zs.iter().product();
                if det.abs() > 1e-12 {
                    assert!(
                        (prod.re / det - 1.0).abs() < 1e-6 && prod.im.abs() < 1e-6 * det.abs(),
                        "{name} det"
                    );
                }
            }
        }
    }

    #[test]
    fn conjugate_pairs() {
        let spec = builtin_preset("proneural_salt_pepper").unwrap();
        let sym = assemble_symbol(&spec, Dimension::Two).unwrap();
        let br = sample_eigenvalues(&sym, WavenumberGrid::new(10.0, 500).unwrap()).unwrap();
        for i in 0..500 {
            let zs = br.at(i);
            for z in &zs {
                if z.im != 0.0 {
                    assert!(zs.iter().any(|w| (w - z.conj()).norm() < 1e-9));
                }
            }
        }
        assert!(br.collision.is_some());
    }

    #[test]
    fn pairing_stable_under_refinement() {
        let spec = builtin_preset("three_node").unwrap();
        let sym = assemble_symbol(&spec, Dimension::One).unwrap();
        let coarse = sample_eigenvalues(&sym, WavenumberGrid::new(10.0, 201).unwrap()).unwrap();
        let fine = sample_eigenvalues(&sym, WavenumberGrid::new(10.0, 401).unwrap()).unwrap();
        for j in 0..3 {
            for i in 0..201 {
                assert!((coarse.branches[j][i] - fine.branches[j][2 * i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn continuity() {
        let spec = builtin_preset("activator_inhibitor").unwrap();
        let sym = assemble_symbol(&spec, Dimension::One).unwrap();
        let br = sample_eigenvalues(&sym, small_grid()).unwrap();
        for i in 1..br.grid.n {
            let zs = br.at(i);
            let spacing = zs
                .iter()
                .enumerate()
                .flat_map(|(a, x)| zs[a + 1..].iter().map(move |y| (x - y).norm()))
                .fold(f64::INFINITY, f64::min);
            for b in &br.branches {
                let jump = (b[i] - b[i - 1]).norm();
                assert!(jump <= 10.0 * spacing.max(1e-3), "jump {jump} at {i}");
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let sym = assemble_symbol(&builtin_preset("pigment").unwrap(), Dimension::Two).unwrap();
        let grid = WavenumberGrid::new(5.0, 300).unwrap();
        let par = sample_eigenvalues(&sym, grid).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let ser = pool.install(|| sample_eigenvalues(&sym, grid).unwrap());
        assert_eq!(par.branches, ser.branches);
        assert_eq!(par.lambda_max, ser.lambda_max);
    }

    #[test]
    fn lambda_h_examples() {
        let grid = WavenumberGrid::default();
        let ai = assemble_symbol(&builtin_preset("activator_inhibitor").unwrap(), Dimension::One).unwrap();
        let h = fit_lambda_h(&sample_eigenvalues(&ai, grid).unwrap(), 0.25).unwrap();
        assert_eq!(h.degree, 2);
        assert!((h.coefficient + 0.05).abs() < 0.01 * 0.05, "{h:?}");

        let tn = assemble_symbol(&builtin_preset("three_node").unwrap(), Dimension::One).unwrap();
        let h = fit_lambda_h(&sample_eigenvalues(&tn, grid).unwrap(), 0.25).unwrap();
        assert_eq!(h, LambdaH::ZERO);

        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, -4.0]);
        let br = sample_family(constant(m), WavenumberGrid::new(40.0, 400).unwrap()).unwrap();
        assert_eq!(fit_lambda_h(&br, 0.25).unwrap(), LambdaH::ZERO);
    }

    #[test]
    fn nearly_degenerate_block_stays_finite() {
        let s: f64 = 18.871794871794872;
        let e = (-0.05 * s * s).exp();
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 0.5, 0.0, 1.0, -1.0, -1.0, 1.0, 0.0, -1.0]) * e;
        let m = DMatrix::from_diagonal(&nalgebra::dvector![0.0, -0.02 * s * s, -0.02 * s * s]) + a;
        let mut vals = eigenvalues(&m).unwrap();
        vals.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!(vals.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        assert!((vals[0].re + 0.02 * s * s).abs() < 1e-6);
        assert!(vals[2].re.abs() < 1e-12);
        let tr: f64 = vals.iter().map(|z| z.re).sum();
        assert!((tr - m.trace()).abs() < 1e-12);
    }

    #[test]
    fn snapping_picks_the_matching_diffusivity() {
        let d = [0.0, 0.02, 3.0];
        assert_eq!(
            snap_lambda_h(LambdaH::quadratic(-0.020001), &d),
            LambdaH::quadratic(-0.02)
        );
        assert_eq!(
            snap_lambda_h(LambdaH::quadratic(-0.025), &d),
            LambdaH::quadratic(-0.025)
        );
        assert_eq!(snap_lambda_h(LambdaH::ZERO, &d), LambdaH::ZERO);

        let pig = assemble_symbol(&builtin_preset("pigment").unwrap(), Dimension::Two).unwrap();
        let br = sample_eigenvalues(&pig, WavenumberGrid::default()).unwrap();
        let h = lambda_h_for(&pig, &br, 0.25).unwrap();
        assert!(pig.diffusivities().contains(&-h.coefficient), "{h:?}");
    }

    #[test]
    fn two_diffusion_recovers_smaller_coefficient() {
        for (d1, d2) in [(0.3, 1.2), (2.0, 0.5), (0.05, 0.5)] {
            let fam = move |s: f64| DMatrix::from_row_slice(2, 2, &[-d1 * s * s + 0.5, 1.0, 2.0, -d2 * s * s - 1.0]);
            let br = sample_family(fam, WavenumberGrid::new(40.0, 1000).unwrap()).unwrap();
            let h = fit_lambda_h(&br, 0.25).unwrap();
            let want = -f64::min(d1, d2);
            assert!((h.coefficient - want).abs() < 0.01 * want.abs(), "{h:?} vs {want}");
        }
    }

    #[test]
    fn undamped_immobile_component_gives_zero_asymptote() {
        // v is immobile with no decay, so λ_max tends to exactly zero.
        let fam = |s: f64| DMatrix::from_row_slice(2, 2, &[-0.05 * s * s, -1.0, 0.0, 0.0]);
        let br = sample_family(fam, WavenumberGrid::new(40.0, 1000).unwrap()).unwrap();
        assert_eq!(fit_lambda_h(&br, 0.25).unwrap(), LambdaH::ZERO);
    }
}
