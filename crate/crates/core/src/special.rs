//! Riemann zeta and gamma for the boundary-interaction and kernel constants.

pub use statrs::function::gamma::gamma;

/// Riemann zeta function for real `s > 1` by Euler-Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta(s) diverges for s <= 1");
    const N: usize = 16;
    // B_2j / (2j)!
    const BERNOULLI_OVER_FACT: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) times N^{-s-2j+1}
    let mut rising = s;
    let mut power = nf.powf(-s - 1.0);
    for (j, b) in BERNOULLI_OVER_FACT.iter().enumerate() {
        sum += b * rising * power;
        let base = s + 2.0 * j as f64 + 1.0;
        rising *= base * (base + 1.0);
        power /= nf * nf;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partial_sum_oracle(s: f64) -> f64 {
        // direct summation plus the integral tail bound
        let n = 2_000_000usize;
        let head: f64 = (1..=n).rev().map(|k| (k as f64).powf(-s)).sum();
        head + (n as f64).powf(1.0 - s) / (s - 1.0) - 0.5 * (n as f64).powf(-s)
    }

    #[test]
    fn zeta_two_is_pi_squared_over_six() {
        let expected = std::f64::consts::PI.powi(2) / 6.0;
        assert!((zeta(2.0) - expected).abs() < 1e-13);
        assert!((partial_sum_oracle(2.0) - expected).abs() < 1e-6);
    }

    #[test]
    fn zeta_matches_partial_sums() {
        for s in [1.5, 2.0, 2.5, 3.0, 4.0] {
            assert!((zeta(s) - partial_sum_oracle(s)).abs() < 1e-6, "s={s}");
        }
        assert!((zeta(4.0) - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-14);
    }
}
