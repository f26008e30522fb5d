//! Composite Gauss–Legendre quadrature.

use std::sync::OnceLock;

use crate::error::Result;

/// Nodes per panel.
pub const PANEL_NODES: usize = 20;
/// Largest panel width used by [`integrate`].
pub const MAX_PANEL: f64 = 0.25;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_NODES))
}

/// `∫_a^b f`, with `b < a` allowed. Errors from `f` are passed through.
pub fn integrate<F>(mut f: F, a: f64, b: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let (nodes, weights) = panel_rule();
    let panels = ((b - a).abs() / MAX_PANEL).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        let mut s = 0.0;
        for (z, w) in nodes.iter().zip(weights) {
            s += w * f(mid + half * z)?;
        }
        total += s * half;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let (_, w) = gauss_legendre(PANEL_NODES);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_and_exponential() {
        let v = integrate(|x| Ok(x.powi(7) - 3.0 * x), -1.0, 2.0).unwrap();
        assert!((v - (2f64.powi(8) / 8.0 - 1.0 / 8.0 - 1.5 * 3.0)).abs() < 1e-12);
        let e = integrate(|x| Ok(x.exp()), 1.0, 0.0).unwrap();
        assert!((e + (1f64.exp() - 1.0)).abs() < 1e-14);
    }
}
