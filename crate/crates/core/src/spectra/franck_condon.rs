//! Overlaps of displaced, frequency-mismatched harmonic oscillators.
//!
//! With `r = √(ω_e/ω_g)`, the excited-state ladder operator is
//! `a_e = A a_g + B a_g† − √S_e` where `A = (r + 1/r)/2`, `B = (r − 1/r)/2`.
//! Taking matrix elements of that identity and its inverse gives two-term
//! recursions in each index seeded by the analytic `⟨0|0⟩`.

use crate::error::{require_positive, DapError, Result};

use super::huang_rhys;

/// Largest vibrational quantum number the tables will hold.
pub const MAX_LEVEL: usize = 200;

/// `⟨χ_e,m | χ_g,n⟩` for `m ≤ max_m`, `n ≤ max_n`.
#[derive(Debug, Clone)]
pub struct FranckCondonTable {
    max_m: usize,
    max_n: usize,
    values: Vec<f64>,
}

impl FranckCondonTable {
    /// `delta_q` is the excited minimum measured from the ground minimum and may be negative.
    pub fn new(omega_e: f64, omega_g: f64, delta_q: f64, max_m: usize, max_n: usize) -> Result<Self> {
        require_positive("omega_e", omega_e)?;
        require_positive("omega_g", omega_g)?;
        if !delta_q.is_finite() {
            return Err(DapError::domain("delta_Q must be finite"));
        }
        if max_m > MAX_LEVEL || max_n > MAX_LEVEL {
            return Err(DapError::Resource(format!(
                "vibrational level {} exceeds the cap of {MAX_LEVEL}",
                max_m.max(max_n)
            )));
        }
        let sign = if delta_q < 0.0 { -1.0 } else { 1.0 };
        let se = sign * huang_rhys(delta_q.abs(), omega_e)?.sqrt();
        let sg = sign * huang_rhys(delta_q.abs(), omega_g)?.sqrt();
        let r = (omega_e / omega_g).sqrt();
        let a = 0.5 * (r + 1.0 / r);
        let b = 0.5 * (r - 1.0 / r);

        let cols = max_n + 1;
        let mut v = vec![0.0; (max_m + 1) * cols];
        let idx = |m: usize, n: usize| m * cols + n;
        v[0] = (2.0 * r / (1.0 + r * r)).sqrt() * (-se * se / (1.0 + r * r)).exp();

        // n = 0 column from ⟨m| a_g |0_g⟩ = 0
        for m in 0..max_m {
            let prev = if m > 0 { b * (m as f64).sqrt() * v[idx(m - 1, 0)] } else { 0.0 };
            v[idx(m + 1, 0)] = (prev - sg * v[idx(m, 0)]) / (a * ((m + 1) as f64).sqrt());
        }
        // rows from ⟨m| a_e† |n⟩ = √m ⟨m−1|n⟩
        for m in 0..=max_m {
            for n in 0..max_n {
                let mut acc = se * v[idx(m, n)];
                if m > 0 {
                    acc += (m as f64).sqrt() * v[idx(m - 1, n)];
                }
                if n > 0 {
                    acc -= b * (n as f64).sqrt() * v[idx(m, n - 1)];
                }
                v[idx(m, n + 1)] = acc / (a * ((n + 1) as f64).sqrt());
            }
        }
        Ok(Self { max_m, max_n, values: v })
    }

    pub fn max_m(&self) -> usize {
        self.max_m
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        assert!(m <= self.max_m && n <= self.max_n, "({m}, {n}) outside the table");
        self.values[m * (self.max_n + 1) + n]
    }

    /// Row `m` as a slice over `n`.
    pub fn row(&self, m: usize) -> &[f64] {
        let cols = self.max_n + 1;
        &self.values[m * cols..(m + 1) * cols]
    }
}

/// Single overlap amplitude `⟨χ_e,m | χ_g,n⟩`.
pub fn fc_overlap(m: usize, n: usize, omega_e: f64, omega_g: f64, delta_q: f64) -> Result<f64> {
    Ok(FranckCondonTable::new(omega_e, omega_g, delta_q, m, n)?.get(m, n))
}
