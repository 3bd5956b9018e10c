//! Dense matrix exponential by scaling and squaring with a diagonal Padé
//! approximant of degree 6.

use nalgebra::DMatrix;

const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15_840.0,
    1.0 / 665_280.0,
];

/// `exp(a)` for a square real matrix.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    if norm == 0.0 {
        return DMatrix::identity(n, n);
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = a * 2f64.powi(-squarings);

    let mut even = DMatrix::identity(n, n) * PADE6[0];
    let mut odd = DMatrix::zeros(n, n);
    let mut power = DMatrix::identity(n, n);
    for (k, c) in PADE6.iter().enumerate().skip(1) {
        power = &power * &x;
        if k % 2 == 0 {
            even += &power * *c;
        } else {
            odd += &power * *c;
        }
    }
    let numer = &even + &odd;
    let denom = &even - &odd;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular for ‖x‖ ≤ 1/2");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
