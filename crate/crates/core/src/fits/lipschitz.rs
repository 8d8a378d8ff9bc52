//! Least-squares fit with bounded slopes.
//!
//! The fit is parametrized by its first value `u[0]` and the increments
//! `u[m] = h[m] - h[m-1]`, each confined to `[-L dt, L dt]`. With `C` the
//! lower-triangular ones matrix, `h = C u` and the problem is
//! `min |C u - y|^2` over a box, solved by projected gradient steps with
//! exact line search interleaved with Newton steps on the free variables.

use nalgebra::{DMatrix, DVector};

use crate::error::{AdpError, Result};

pub const LIPSCHITZ_MAX_ITER: usize = 10_000;
const REL_DECREASE_TOL: f64 = 1e-12;
const GRADIENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzSolution {
    pub hs: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
}

struct Problem<'a> {
    ys: &'a [f64],
    bound: f64,
}

impl Problem<'_> {
    fn lower(&self, m: usize) -> f64 {
        if m == 0 {
            f64::NEG_INFINITY
        } else {
            -self.bound
        }
    }

    fn upper(&self, m: usize) -> f64 {
        if m == 0 {
            f64::INFINITY
        } else {
            self.bound
        }
    }

    fn values(&self, u: &[f64]) -> Vec<f64> {
        let mut acc = 0.0;
        u.iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect()
    }

    fn objective(&self, u: &[f64]) -> f64 {
        self.values(u).iter().zip(self.ys).map(|(h, y)| (h - y) * (h - y)).sum()
    }

    /// `2 C^T (C u - y)` by a reversed cumulative sum.
    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let hs = self.values(u);
        let mut g = vec![0.0; u.len()];
        let mut acc = 0.0;
        for i in (0..u.len()).rev() {
            acc += hs[i] - self.ys[i];
            g[i] = 2.0 * acc;
        }
        g
    }

    /// `d^T (2 C^T C) d`.
    fn curvature(&self, d: &[f64]) -> f64 {
        2.0 * self.values(d).iter().map(|x| x * x).sum::<f64>()
    }

    /// Gradient components that can still move the iterate downhill.
    fn projected_gradient(&self, u: &[f64], g: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(g)
            .enumerate()
            .map(|(m, (&x, &gm))| {
                if (x <= self.lower(m) && gm > 0.0) || (x >= self.upper(m) && gm < 0.0) {
                    0.0
                } else {
                    gm
                }
            })
            .collect()
    }

    /// Largest step along `d` that keeps `u + beta d` in the box, capped at `cap`.
    fn max_step(&self, u: &[f64], d: &[f64], cap: f64) -> (f64, Option<usize>) {
        let mut best = (cap, None);
        for (m, (&x, &dm)) in u.iter().zip(d).enumerate() {
            let limit = if dm > 0.0 {
                (self.upper(m) - x) / dm
            } else if dm < 0.0 {
                (self.lower(m) - x) / dm
            } else {
                continue;
            };
            if limit < best.0 {
                best = (limit.max(0.0), Some(m));
            }
        }
        best
    }

    fn step_along(&self, u: &mut [f64], d: &[f64], cap: f64) {
        let (beta, blocking) = self.max_step(u, d, cap);
        for (x, dm) in u.iter_mut().zip(d) {
            *x += beta * dm;
        }
        for (m, x) in u.iter_mut().enumerate() {
            *x = x.clamp(self.lower(m), self.upper(m));
        }
        if let Some(m) = blocking {
            u[m] = if d[m] > 0.0 { self.upper(m) } else { self.lower(m) };
        }
    }

    /// Newton step on the variables strictly inside their bounds.
    fn subspace_direction(&self, u: &[f64], g: &[f64]) -> Option<Vec<f64>> {
        let k = u.len();
        let free: Vec<usize> =
            (0..k).filter(|&m| u[m] > self.lower(m) && u[m] < self.upper(m)).collect();
        if free.is_empty() {
            return None;
        }
        let n = free.len();
        let h = DMatrix::from_fn(n, n, |a, b| 2.0 * (k - free[a].max(free[b])) as f64);
        let rhs = DVector::from_iterator(n, free.iter().map(|&m| -g[m]));
        let s = h.cholesky()?.solve(&rhs);
        let mut d = vec![0.0; k];
        for (idx, &m) in free.iter().enumerate() {
            d[m] = s[idx];
        }
        Some(d)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimizes `sum (h[i] - ys[i])^2` subject to `|h[i+1] - h[i]| <= l * dt`.
pub fn lipschitz_least_squares(ys: &[f64], dt: f64, l: f64) -> Result<LipschitzSolution> {
    if ys.len() < 2 {
        return Err(AdpError::InvalidArgument("a Lipschitz fit needs at least 2 points".into()));
    }
    if !(l > 0.0) || !(dt > 0.0) {
        return Err(AdpError::InvalidArgument(format!("invalid slope bound {l} or spacing {dt}")));
    }
    let p = Problem { ys, bound: l * dt };
    let mut u: Vec<f64> = Vec::with_capacity(ys.len());
    u.push(ys[0]);
    let mut clamped = false;
    for w in ys.windows(2) {
        let inc = w[1] - w[0];
        let c = inc.clamp(-p.bound, p.bound);
        clamped |= c != inc;
        u.push(c);
    }
    if !clamped {
        return Ok(LipschitzSolution { hs: ys.to_vec(), iterations: 0, gradient_norm: 0.0 });
    }

    let scale = norm(&p.gradient(&vec![0.0; ys.len()])).max(1.0);
    let mut obj = p.objective(&u);
    let mut iterations = 0;
    let mut pg_norm;
    loop {
        let g = p.gradient(&u);
        let pg = p.projected_gradient(&u, &g);
        pg_norm = norm(&pg);
        if pg_norm <= 1e-14 * scale || iterations >= LIPSCHITZ_MAX_ITER {
            break;
        }
        iterations += 1;

        let d: Vec<f64> = pg.iter().map(|x| -x).collect();
        let curv = p.curvature(&d);
        if curv > 0.0 {
            let alpha = pg_norm * pg_norm / curv;
            let mut trial: Vec<f64> =
                u.iter().zip(&d).enumerate().map(|(m, (x, dm))| (x + alpha * dm).clamp(p.lower(m), p.upper(m))).collect();
            if p.objective(&trial) > obj {
                trial = u.clone();
                p.step_along(&mut trial, &d, alpha);
            }
            u = trial;
        }

        let g = p.gradient(&u);
        if let Some(s) = p.subspace_direction(&u, &g) {
            let mut trial = u.clone();
            p.step_along(&mut trial, &s, 1.0);
            if p.objective(&trial) <= p.objective(&u) {
                u = trial;
            }
        }

        let next = p.objective(&u);
        let decrease = obj - next;
        obj = next;
        if decrease <= REL_DECREASE_TOL * obj.max(f64::MIN_POSITIVE) {
            pg_norm = norm(&p.projected_gradient(&u, &p.gradient(&u)));
            break;
        }
    }
    if pg_norm > GRADIENT_TOL * scale {
        return Err(AdpError::NonConvergence { gradient_norm: pg_norm });
    }
    Ok(LipschitzSolution { hs: p.values(&u), iterations, gradient_norm: pg_norm })
}
