/// Coefficients (ascending powers) of the Laguerre polynomial `L_n`, from
/// `(k+1) L_{k+1} = (2k+1−ξ) L_k − k L_{k−1}`.
pub fn laguerre_coeffs(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![1.0, -1.0];
    for k in 1..n {
        let kf = k as f64;
        let mut next = vec![0.0; k + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i] += (2.0 * kf + 1.0) * c;
            next[i + 1] -= c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= kf * c;
        }
        for v in next.iter_mut() {
            *v /= kf + 1.0;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_n(ξ)` by the same recurrence.
pub fn laguerre(n: usize, xi: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - xi);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - xi) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Explicit sum `Σ_k (−1)^k C(n,k) ξ^k / k!`.
    fn explicit(n: usize) -> Vec<f64> {
        let fact = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
        (0..=n)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * fact(n) / (fact(k) * fact(n - k)) / fact(k)
            })
            .collect()
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for n in 0..=12 {
            let a = laguerre_coeffs(n);
            let b = explicit(n);
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "n={n}");
            }
        }
    }

    #[test]
    fn pointwise_matches_coefficients() {
        for n in 0..=8 {
            let c = laguerre_coeffs(n);
            for &xi in &[0.0f64, 0.3, 2.5, 7.0] {
                let v: f64 = c.iter().enumerate().map(|(k, a)| a * xi.powi(k as i32)).sum();
                assert!((v - laguerre(n, xi)).abs() < 1e-10 * v.abs().max(1.0));
            }
        }
    }
}
