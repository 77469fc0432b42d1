//! Oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use dapkit::constants::HBAR2_PER_AMU_ANGSTROM2_MEV;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Normalized oscillator eigenfunctions ψ_0..ψ_nmax at `x` for `α = ω/ħ`.
pub fn hermite_functions(alpha: f64, x: f64, nmax: usize) -> Vec<f64> {
    let xi = alpha.sqrt() * x;
    let mut psi = vec![0.0; nmax + 1];
    psi[0] = (alpha / std::f64::consts::PI).powf(0.25) * (-0.5 * xi * xi).exp();
    if nmax >= 1 {
        psi[1] = 2f64.sqrt() * xi * psi[0];
    }
    for n in 1..nmax {
        psi[n + 1] = (2.0 / (n + 1) as f64).sqrt() * xi * psi[n] - (n as f64 / (n + 1) as f64).sqrt() * psi[n - 1];
    }
    psi
}

/// `⟨χ_e,m | χ_g,n⟩` by trapezoid quadrature on a wide uniform grid.
pub fn quadrature_overlaps(omega_e: f64, omega_g: f64, dq: f64, nmax: usize) -> Vec<Vec<f64>> {
    let ae = omega_e / HBAR2_PER_AMU_ANGSTROM2_MEV;
    let ag = omega_g / HBAR2_PER_AMU_ANGSTROM2_MEV;
    let reach = ((2 * nmax + 1) as f64).sqrt() + 9.0;
    let half = reach / ae.min(ag).sqrt();
    let (lo, hi) = (dq.min(0.0) - half, dq.max(0.0) + half);
    let points = 20_001;
    let h = (hi - lo) / (points - 1) as f64;
    let mut s = vec![vec![0.0; nmax + 1]; nmax + 1];
    for i in 0..points {
        let x = lo + i as f64 * h;
        let w = if i == 0 || i == points - 1 { 0.5 * h } else { h };
        let pe = hermite_functions(ae, x - dq, nmax);
        let pg = hermite_functions(ag, x, nmax);
        for m in 0..=nmax {
            for n in 0..=nmax {
                s[m][n] += w * pe[m] * pg[n];
            }
        }
    }
    s
}

/// Draws a point from the hydrogenic 1s density of radius `a`.
fn sample_1s(rng: &mut ChaCha8Rng, a: f64) -> [f64; 3] {
    // radial density r² e^{−2r/a} is Gamma(3, a/2)
    let u = (1.0 - rng.random::<f64>()) * (1.0 - rng.random::<f64>()) * (1.0 - rng.random::<f64>());
    let r = -0.5 * a * u.ln();
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    [r * s * phi.cos(), r * s * phi.sin(), r * z]
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Monte Carlo estimate of the overlap bracket (1/Å) and its standard error.
pub fn j_bracket_monte_carlo(r: f64, a_d: f64, a_a: f64, samples: usize, seed: u64) -> (f64, f64) {
    let chunks = 32;
    let per = samples / chunks;
    let big_r = [0.0, 0.0, r];
    let (sum, sum2) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(c as u64));
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..per {
                let e = sample_1s(&mut rng, a_d);
                let h = sample_1s(&mut rng, a_a);
                let hole = [big_r[0] + h[0], big_r[1] + h[1], big_r[2] + h[2]];
                let v = 1.0 / dist(e, big_r) + 1.0 / dist(hole, [0.0; 3]) - 1.0 / dist(e, hole) - 1.0 / r;
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = (per * chunks) as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Number of ordered signed representations of `n` as a sum of three squares.
pub fn r3(n: i64) -> usize {
    let lim = (n as f64).sqrt() as i64 + 1;
    let mut count = 0;
    for x in -lim..=lim {
        for y in -lim..=lim {
            let rest = n - x * x - y * y;
            if rest < 0 {
                continue;
            }
            let z = (rest as f64).sqrt().round() as i64;
            if z * z == rest {
                count += if z == 0 { 1 } else { 2 };
            }
        }
    }
    count
}

