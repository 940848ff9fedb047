//! Small dense polynomial helpers. Coefficients are stored highest degree first.

use num_complex::Complex64;

/// Horner evaluation at a complex point.
pub fn eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// `sum |c_i| |z|^i`, the natural scale for a residual at `z`.
pub fn eval_abs(coeffs: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs.iter().fold(0.0, |acc, &c| acc * r + c.abs())
}

/// Residual of `coeffs` at `z` relative to [`eval_abs`] taken at
/// `max(|z|, 1)`, so that roots near zero are not judged against a vanishing
/// constant term.
pub fn relative_residual(coeffs: &[f64], z: Complex64) -> f64 {
    let scale = eval_abs(coeffs, Complex64::new(z.norm().max(1.0), 0.0));
    if scale == 0.0 {
        0.0
    } else {
        eval(coeffs, z).norm() / scale
    }
}

pub fn multiply(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Roots of `x^2 + b x + c`, larger real part first.
pub fn monic_quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // avoid cancellation: q = -(b + sign(b) sqrt(disc)) / 2
        let q = -0.5 * (b + b.signum() * sq);
        let (x1, x2) = if q == 0.0 { (0.0, 0.0) } else { (q, c / q) };
        let (hi, lo) = if x1 >= x2 { (x1, x2) } else { (x2, x1) };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}
