use std::f64::consts::PI;

use super::Observable;
use crate::error::{domain, Error, Result};
use crate::unitmath::CompensatedSum;

/// Maximum number of panels after breakpoint refinement.
pub const PANEL_BUDGET: usize = 1 << 20;
const NODE_BUDGET: usize = 1 << 24;
pub const MAX_FACTORS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            panels: 4096,
            nodes_per_panel: 8,
        }
    }
}

impl QuadratureSpec {
    pub fn new(panels: usize, nodes_per_panel: usize) -> Result<Self> {
        if panels == 0 || nodes_per_panel == 0 {
            return domain("quadrature needs at least one panel and one node");
        }
        if panels.saturating_mul(nodes_per_panel) > NODE_BUDGET {
            return domain(format!(
                "{panels} panels x {nodes_per_panel} nodes exceeds the 2^24 node budget"
            ));
        }
        Ok(QuadratureSpec {
            panels,
            nodes_per_panel,
        })
    }
}

/// Gauss-Legendre abscissae and weights on `[-1, 1]`, by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let prev = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Panel edges on `[0, 1]`: a uniform grid with every breakpoint and kink
/// of every factor spliced in, so no panel straddles a discontinuity.
fn panel_edges(fs: &[Observable], panels: usize) -> Vec<f64> {
    let mut edges: Vec<f64> = (0..=panels).map(|i| i as f64 / panels as f64).collect();
    for f in fs {
        edges.extend(
            f.quadrature_nodes()
                .into_iter()
                .filter(|x| (0.0..=1.0).contains(x)),
        );
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
}

/// `int_0^1 prod_i f_i(x) dx` by panel Gauss-Legendre quadrature.
pub fn integrate(fs: &[Observable], q: &QuadratureSpec) -> Result<f64> {
    if fs.is_empty() {
        return domain("integrate needs at least one observable");
    }
    if fs.len() > MAX_FACTORS {
        return domain(format!(
            "integrate accepts at most {MAX_FACTORS} factors, got {}",
            fs.len()
        ));
    }
    let edges = panel_edges(fs, q.panels);
    if edges.len() - 1 > PANEL_BUDGET {
        return Err(Error::Resource(format!(
            "{} panels after breakpoint refinement exceeds 2^20",
            edges.len() - 1
        )));
    }
    let (nodes, weights) = gauss_legendre(q.nodes_per_panel);
    let mut acc = CompensatedSum::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut panel = CompensatedSum::new();
        for (t, wt) in nodes.iter().zip(&weights) {
            let x = mid + half * t;
            let v: f64 = fs.iter().map(|f| f.evaluate_at(x)).product();
            panel.add(wt * v);
        }
        acc.add(half * panel.value());
    }
    acc.try_value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14, "n={n}");
            for deg in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!(
                    (got - want).abs() < 1e-13,
                    "n={n} deg={deg}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn spec_budget() {
        assert!(QuadratureSpec::new(1 << 22, 8).is_err());
        assert!(QuadratureSpec::new(0, 8).is_err());
        assert!(QuadratureSpec::new(1 << 21, 8).is_ok());
    }

    #[test]
    fn panel_budget_is_enforced() {
        let q = QuadratureSpec::new(1 << 21, 4).unwrap();
        let r = integrate(&[Observable::frac_part()], &q);
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn factor_count_is_checked() {
        let q = QuadratureSpec::default();
        assert!(integrate(&[], &q).is_err());
        assert!(integrate(&vec![Observable::frac_part(); 9], &q).is_err());
    }
}
