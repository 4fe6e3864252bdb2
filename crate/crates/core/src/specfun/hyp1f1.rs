use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest |p| accepted by [`hyp1f1_imag`].
pub const HYP1F1_MAX_ARG: f64 = 50.0;
pub const HYP1F1_MAX_TERMS: usize = 500;

/// Kummer function ₁F₁(a; b; i·p) on the imaginary axis, summed as a
/// Maclaurin series with the term ratio `(a+k)/(b+k) · ip/(k+1)`.
pub fn hyp1f1_imag(a: f64, b: f64, p: f64) -> Result<Complex64> {
    if b <= 0.0 && b.fract() == 0.0 {
        return Err(Error::Domain(format!("b = {b} is a non-positive integer")));
    }
    if !(p.abs() <= HYP1F1_MAX_ARG) {
        return Err(Error::Domain(format!(
            "|p| = {} outside the working range {HYP1F1_MAX_ARG}",
            p.abs()
        )));
    }
    let z = Complex64::new(0.0, p);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..HYP1F1_MAX_TERMS {
        let kf = k as f64;
        term *= z * ((a + kf) / ((b + kf) * (kf + 1.0)));
        sum += term;
        if term.norm() < 1e-18 * sum.norm() || term == Complex64::new(0.0, 0.0) {
            return Ok(sum);
        }
    }
    Err(Error::Convergence(format!(
        "1F1({a}; {b}; {p}i) not converged after {HYP1F1_MAX_TERMS} terms"
    )))
}
