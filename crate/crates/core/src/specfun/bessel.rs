/// Spherical Bessel function of the first kind j_n(x), x ≥ 0.
pub fn sph_bessel_j(n: u32, x: f64) -> f64 {
    sph_bessel_j_all(n, x)[n as usize]
}

/// j_0(x) ..= j_n_max(x).
///
/// Upward recurrence is stable while n ≤ x; beyond that the values are
/// generated by Miller's downward recurrence and normalized against the
/// closed forms of j_0 or j_1.
pub fn sph_bessel_j_all(n_max: u32, x: f64) -> Vec<f64> {
    let len = n_max as usize + 1;
    let mut out = vec![0.0; len];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;

    if (n_max as f64) <= x {
        out[0] = j0;
        if len > 1 {
            out[1] = j1;
        }
        for n in 1..len.saturating_sub(1) {
            out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        }
        return out;
    }

    let scale = (n_max as f64).max(x);
    let start = n_max as usize + 20 + (40.0 * scale).sqrt() as usize;
    let mut f_next = 0.0;
    let mut f = 1e-300;
    for n in (1..=start).rev() {
        let f_prev = (2 * n + 1) as f64 / x * f - f_next;
        f_next = f;
        f = f_prev;
        if n - 1 < len {
            out[n - 1] = f;
        }
        if n < len {
            out[n] = f_next;
        }
        if f.abs() > 1e250 {
            f *= 1e-250;
            f_next *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // Normalize on whichever closed form is better conditioned.
    let norm = if j0.abs() >= j1.abs() || len < 2 {
        j0 / out[0]
    } else {
        j1 / out[1]
    };
    for v in &mut out {
        *v *= norm;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let x = 1.5f64;
        assert!((sph_bessel_j(0, x) - x.sin() / x).abs() < 1e-15);
        assert!((sph_bessel_j(0, x) - 0.664997).abs() < 1e-6);
        let j1 = x.sin() / (x * x) - x.cos() / x;
        assert!((sph_bessel_j(1, x) - j1).abs() < 1e-15);
        assert!((sph_bessel_j(1, x) - 0.396172).abs() < 1e-6);
        // j_2 = (3/x² − 1) sin x / x − 3 cos x / x²
        let j2 = (3.0 / (x * x) - 1.0) * x.sin() / x - 3.0 * x.cos() / (x * x);
        assert!((sph_bessel_j(2, x) - j2).abs() < 1e-15);
    }

    #[test]
    fn origin() {
        assert_eq!(sph_bessel_j(0, 0.0), 1.0);
        for n in 1..10 {
            assert_eq!(sph_bessel_j(n, 0.0), 0.0);
        }
    }

    #[test]
    fn small_argument_asymptotics() {
        // j_n(x) ≈ x^n / (2n+1)!! for x → 0
        let x = 1e-3f64;
        let mut dfact = 1.0;
        for n in 0..12u32 {
            if n > 0 {
                dfact *= (2 * n + 1) as f64;
            }
            let approx = x.powi(n as i32) / dfact;
            let v = sph_bessel_j(n, x);
            assert!(((v - approx) / approx).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn three_term_recurrence() {
        for x in [0.5, 1.5, 8.0, 20.0] {
            let v = sph_bessel_j_all(41, x);
            for n in 1..=40 {
                let lhs = v[n - 1] + v[n + 1];
                let rhs = (2 * n + 1) as f64 * v[n] / x;
                assert!(
                    ((lhs - rhs) / rhs).abs() < 1e-10,
                    "x={x} n={n}: {lhs} vs {rhs}"
                );
            }
            // single-value path agrees with the batch
            for n in [0u32, 3, 9, 25, 40] {
                let single = sph_bessel_j(n, x);
                assert!(((single - v[n as usize]) / v[n as usize]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn addition_theorem() {
        // Σ (2n+1) j_n(x)² = 1
        for x in [0.1, 1.5, 8.0, 30.0] {
            let v = sph_bessel_j_all(120, x);
            let s: f64 = v.iter().enumerate().map(|(n, j)| (2 * n + 1) as f64 * j * j).sum();
            assert!((s - 1.0).abs() < 1e-13, "x={x}: {s}");
        }
    }
}
