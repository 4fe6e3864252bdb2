use serde::{Deserialize, Serialize};

use super::ln_factorial;

/// Quantum numbers of ⟨j1 m1, j2 m2 | j3 m3⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CGKey {
    pub j1: i32,
    pub m1: i32,
    pub j2: i32,
    pub m2: i32,
    pub j3: i32,
    pub m3: i32,
}

impl CGKey {
    pub fn new(j1: i32, m1: i32, j2: i32, m2: i32, j3: i32, m3: i32) -> Self {
        Self { j1, m1, j2, m2, j3, m3 }
    }

    fn is_allowed(&self) -> bool {
        let Self { j1, m1, j2, m2, j3, m3 } = *self;
        j1 >= 0
            && j2 >= 0
            && j3 >= 0
            && m1.abs() <= j1
            && m2.abs() <= j2
            && m3.abs() <= j3
            && m1 + m2 == m3
            && (j1 - j2).abs() <= j3
            && j3 <= j1 + j2
    }
}

fn lf(n: i32) -> f64 {
    ln_factorial(n as u32)
}

/// Clebsch–Gordan coefficient from Racah's closed-form sum, each term
/// evaluated in log-factorial space. Forbidden couplings give exactly 0.
pub fn clebsch_gordan(key: CGKey) -> f64 {
    if !key.is_allowed() {
        return 0.0;
    }
    let CGKey { j1, m1, j2, m2, j3, m3 } = key;

    let ln_pref = 0.5
        * (((2 * j3 + 1) as f64).ln() + lf(j3 + j1 - j2) + lf(j3 - j1 + j2) + lf(j1 + j2 - j3)
            - lf(j1 + j2 + j3 + 1)
            + lf(j3 + m3)
            + lf(j3 - m3)
            + lf(j1 - m1)
            + lf(j1 + m1)
            + lf(j2 - m2)
            + lf(j2 + m2));

    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let ln_den = lf(k)
            + lf(j1 + j2 - j3 - k)
            + lf(j1 - m1 - k)
            + lf(j2 + m2 - k)
            + lf(j3 - j2 + m1 + k)
            + lf(j3 - j1 - m2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (ln_pref - ln_den).exp();
    }
    sum
}
