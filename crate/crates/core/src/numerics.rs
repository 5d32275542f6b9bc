/// `ln(e^a + e^b)` without overflow.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `Σ_{j≥j0} (a + j)^k r^j` for `k ∈ {0, 1, 2}`, `0 ≤ r < 1`, `j0 ∈ {0, 1}`.
pub(crate) fn poly_geometric(a: f64, r: f64, power: u8, j0: u8) -> f64 {
    debug_assert!((0.0..1.0).contains(&r));
    let s0 = 1.0 / (1.0 - r);
    let s1 = r * s0 * s0;
    let s2 = r * (1.0 + r) * s0 * s0 * s0;
    let full = match power {
        0 => s0,
        1 => a * s0 + s1,
        2 => a * a * s0 + 2.0 * a * s1 + s2,
        _ => unreachable!("only powers up to 2 are used"),
    };
    if j0 == 0 {
        full
    } else {
        full - a.powi(power as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_exp_matches_direct() {
        let v = log_add_exp(1.0_f64.ln(), 2.0_f64.ln());
        assert!((v - 3.0_f64.ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 0.5), 0.5);
        let big = log_add_exp(1000.0, 1000.0);
        assert!((big - (1000.0 + 2.0_f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn poly_geometric_against_partial_sums() {
        for &(a, r) in &[(0.0_f64, 0.3_f64), (5.0, 0.9), (12.5, 0.01)] {
            for power in 0..=2u8 {
                for j0 in 0..=1u8 {
                    let direct: f64 = (j0 as i32..4000)
                        .map(|j| (a + j as f64).powi(power as i32) * r.powi(j))
                        .sum();
                    let closed = poly_geometric(a, r, power, j0);
                    assert!(
                        (direct - closed).abs() <= 1e-10 * closed.abs().max(1.0),
                        "a={a} r={r} k={power} j0={j0}: {direct} vs {closed}"
                    );
                }
            }
        }
    }
}
