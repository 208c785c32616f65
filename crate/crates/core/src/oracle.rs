//! Brute-force backward induction for the exploratory problem.
//!
//! Each layer takes the next-period value in quadratic form
//! `q (x' - c)^2 + k`, averages it over the excess return using only the
//! first two return moments, and minimizes the entropy-regularized one-step
//! objective over control densities. The minimizer is `exp(-G(u)/lambda)/Z`
//! for the quadratic `G`; it is integrated numerically on a Gauss-Hermite rule
//! and cross-checked against trapezoid rules on two window widths. The layer's
//! grid values are then least-squares fitted back to a quadratic, which feeds
//! the layer below. Nothing here calls the closed forms in [`crate::analytic`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{MarketModel, ProblemSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub x_points: usize,
    /// Gauss-Hermite node count.
    pub hermite_nodes: usize,
    /// Trapezoid points on the primary window.
    pub trapezoid_points: usize,
    /// Half-width of the primary trapezoid window, in minimizer std devs.
    pub window_stds: f64,
    /// Half-width of the widened check window.
    pub wide_window_stds: f64,
    /// Relative disagreement between quadrature routes that counts as failure.
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 2.0,
            x_points: 21,
            hermite_nodes: 40,
            trapezoid_points: 2001,
            window_stds: 8.0,
            wide_window_stds: 10.0,
            tolerance: 1e-9,
        }
    }
}

impl OracleConfig {
    pub fn with_range(x_min: f64, x_max: f64, x_points: usize) -> Self {
        Self {
            x_min,
            x_max,
            x_points,
            ..Self::default()
        }
    }

    pub fn x_grid(&self) -> Vec<f64> {
        let n = self.x_points;
        (0..n)
            .map(|i| self.x_min + (self.x_max - self.x_min) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.x_points < 3 {
            return Err(Error::invalid("x_points", "need at least 3 grid points"));
        }
        if !(self.x_max > self.x_min) {
            return Err(Error::invalid(
                "x_max",
                "wealth grid must be strictly increasing",
            ));
        }
        if self.hermite_nodes < 2 || self.trapezoid_points < 3 {
            return Err(Error::invalid("quadrature", "too few quadrature nodes"));
        }
        if !(self.wide_window_stds > self.window_stds && self.window_stds > 0.0) {
            return Err(Error::invalid(
                "window_stds",
                "wide window must exceed primary window",
            ));
        }
        Ok(())
    }
}

/// `q (x - c)^2 + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticLayer {
    pub curvature: f64,
    pub center: f64,
    pub constant: f64,
}

impl QuadraticLayer {
    pub fn eval(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.curvature * d * d + self.constant
    }

    /// Least-squares fit of a quadratic through `(xs, ys)`.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let n = xs.len() as f64;
        let mid = xs.iter().sum::<f64>() / n;
        let scale = xs.iter().map(|x| (x - mid).abs()).fold(0.0, f64::max);
        if !(scale > 0.0) {
            return Err(Error::invalid("x_values", "degenerate grid"));
        }
        // normal equations in s = (x - mid)/scale for y = p0 + p1 s + p2 s^2
        let mut moments = [0.0; 5];
        let mut rhs = [0.0; 3];
        for (&x, &y) in xs.iter().zip(ys) {
            let s = (x - mid) / scale;
            let mut p = 1.0;
            for (j, m) in moments.iter_mut().enumerate() {
                *m += p;
                if j < 3 {
                    rhs[j] += p * y;
                }
                p *= s;
            }
        }
        let mat = [
            [moments[0], moments[1], moments[2]],
            [moments[1], moments[2], moments[3]],
            [moments[2], moments[3], moments[4]],
        ];
        let [p0, p1, p2] = solve3(mat, rhs)?;
        if !(p2 > 0.0) {
            return Err(Error::Contract(format!(
                "fitted layer is not convex (leading coefficient {p2})"
            )));
        }
        let curvature = p2 / (scale * scale);
        let center = mid - p1 * scale / (2.0 * p2);
        let constant = p0 - p1 * p1 / (4.0 * p2);
        Ok(Self {
            curvature,
            center,
            constant,
        })
    }
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Result<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::Contract("singular quadratic fit".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// One layer of the backward induction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueGrid {
    pub t: usize,
    pub x_values: Vec<f64>,
    pub j_values: Vec<f64>,
    /// Center of the control integration window at each wealth point.
    pub u_centers: Vec<f64>,
    /// Std dev of the minimizing density (state independent); zero at `t = T`.
    pub u_scale: f64,
    pub u_half_width: f64,
    pub u_spacing: f64,
    pub layer: QuadraticLayer,
}

/// Gauss-Hermite nodes and weights for `\int e^{-z^2} f(z) dz`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Newton iteration on the orthonormal Hermite recurrence.
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    let h = (hi - lo) / (points - 1) as f64;
    let mut acc = 0.5 * (f(lo) + f(hi));
    for i in 1..points - 1 {
        acc += f(lo + h * i as f64);
    }
    acc * h
}

struct StepResult {
    value: f64,
    center: f64,
    scale: f64,
}

/// Minimize `\int (G(u) + lambda ln pi(u)) pi(u) du` over densities, where
/// `G(u) = curv u^2 + lin u + base` with `curv > 0`.
fn minimize_step(
    curv: f64,
    lin: f64,
    base: f64,
    lambda: f64,
    hermite: &(Vec<f64>, Vec<f64>),
    cfg: &OracleConfig,
    t: usize,
    x: f64,
) -> Result<StepResult> {
    // completing the square: G(u) = curv (u - center)^2 + g_min
    let center = -lin / (2.0 * curv);
    let g = |u: f64| curv * u * u + lin * u + base;
    let g_min = g(center);
    let scale = (lambda / (2.0 * curv)).sqrt();
    let shifted = |u: f64| (-(g(u) - g_min) / lambda).exp();

    // Gauss-Hermite route for Z' = \int exp(-(G - g_min)/lambda) du
    let (nodes, weights) = hermite;
    let root2s = std::f64::consts::SQRT_2 * scale;
    let z_hermite: f64 = nodes
        .iter()
        .zip(weights)
        .map(|(&z, &wt)| {
            let u = center + root2s * z;
            wt * shifted(u) * (z * z).exp()
        })
        .sum::<f64>()
        * root2s;
    let value_hermite = g_min - lambda * z_hermite.ln();

    // trapezoid route evaluating the objective at the normalized minimizer
    let objective = |half: f64| {
        let (lo, hi) = (center - half * scale, center + half * scale);
        let z = trapezoid(shifted, lo, hi, cfg.trapezoid_points);
        let integrand = |u: f64| {
            let density = shifted(u) / z;
            let log_density = -(g(u) - g_min) / lambda - z.ln();
            (g(u) + lambda * log_density) * density
        };
        trapezoid(integrand, lo, hi, cfg.trapezoid_points)
    };
    let value_trap = objective(cfg.window_stds);
    let value_wide = objective(cfg.wide_window_stds);

    let denom = 1.0 + value_hermite.abs();
    let widen = (value_wide - value_trap).abs() / denom;
    let routes = (value_hermite - value_trap).abs() / denom;
    if !(widen <= cfg.tolerance && routes <= cfg.tolerance) {
        return Err(Error::Quadrature {
            t,
            x,
            detail: format!(
                "hermite {value_hermite}, trapezoid {value_trap}, widened {value_wide}"
            ),
        });
    }
    Ok(StepResult {
        value: value_hermite,
        center,
        scale,
    })
}

/// Backward induction from `t = T` down to `t = 0`; element `i` of the result
/// is the layer for `t = T - i`.
pub fn dp_oracle(
    m: &MarketModel,
    spec: &ProblemSpec,
    w: f64,
    cfg: &OracleConfig,
) -> Result<Vec<ValueGrid>> {
    spec.validate()?;
    cfg.validate()?;
    let xs = cfg.x_grid();
    let hermite = gauss_hermite(cfg.hermite_nodes);
    let (a, second, r_f, lambda) = (m.a(), m.second_moment(), m.r_f(), spec.lambda);

    let terminal = QuadraticLayer {
        curvature: 1.0,
        center: w,
        constant: -(w - spec.b).powi(2),
    };
    let mut layers = vec![ValueGrid {
        t: spec.horizon,
        j_values: xs.iter().map(|&x| terminal.eval(x)).collect(),
        u_centers: vec![0.0; xs.len()],
        x_values: xs.clone(),
        u_scale: 0.0,
        u_half_width: 0.0,
        u_spacing: 0.0,
        layer: terminal,
    }];

    let mut next = terminal;
    for t in (0..spec.horizon).rev() {
        let steps: Vec<StepResult> = xs
            .par_iter()
            .map(|&x| {
                // E_r[q (r_f x + r u - c)^2 + k] as a quadratic in u
                let d = r_f * x - next.center;
                let curv = next.curvature * second;
                let lin = 2.0 * next.curvature * a * d;
                let base = next.curvature * d * d + next.constant;
                minimize_step(curv, lin, base, lambda, &hermite, cfg, t, x)
            })
            .collect::<Result<_>>()?;
        let j_values: Vec<f64> = steps.iter().map(|s| s.value).collect();
        let layer = QuadraticLayer::fit(&xs, &j_values)?;
        let scale = steps[0].scale;
        layers.push(ValueGrid {
            t,
            x_values: xs.clone(),
            j_values,
            u_centers: steps.iter().map(|s| s.center).collect(),
            u_scale: scale,
            u_half_width: cfg.window_stds * scale,
            u_spacing: 2.0 * cfg.window_stds * scale / (cfg.trapezoid_points - 1) as f64,
            layer,
        });
        next = layer;
    }
    Ok(layers)
}
