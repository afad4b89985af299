//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! One call to [`lbfgs`] runs `steps` outer steps of up to `max_iter` inner
//! iterations each, so `steps = 2` means two optimiser steps rather than two
//! quasi-Newton updates.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LbfgsConfig {
    pub max_iter: usize,
    pub history: usize,
    pub tolerance_grad: f64,
    pub tolerance_change: f64,
    pub max_line_search: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self { max_iter: 20, history: 10, tolerance_grad: 1e-7, tolerance_change: 1e-9, max_line_search: 25 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub initial_value: f64,
    pub evaluations: usize,
    /// Line searches that ended without a strong-Wolfe point.
    pub line_search_failures: usize,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimiser of the cubic through two points with slopes, clamped to `[lo, hi]`.
fn cubic_min(x1: f64, f1: f64, g1: f64, x2: f64, f2: f64, g2: f64, lo: f64, hi: f64) -> f64 {
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
    let d2_sq = d1 * d1 - g1 * g2;
    if d2_sq >= 0.0 {
        let d2 = d2_sq.sqrt();
        let t = if x1 <= x2 {
            x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
        } else {
            x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
        };
        if t.is_finite() {
            return t.clamp(lo, hi);
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone)]
struct Sample {
    t: f64,
    f: f64,
    d: f64,
    g: Vec<f64>,
}

struct Problem<'a, F> {
    f: &'a mut F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>> Problem<'_, F> {
    fn at(&mut self, x: &[f64], dir: &[f64], t: f64) -> Result<Sample> {
        let y: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        let (f, g) = (self.f)(&y)?;
        self.evals += 1;
        let d = dot(&g, dir);
        Ok(Sample { t, f, d, g })
    }
}

/// Strong-Wolfe search along `dir`. Returns `None` if no point with
/// sufficient decrease was found.
fn line_search<F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>>(
    p: &mut Problem<'_, F>,
    x: &[f64],
    dir: &[f64],
    start: &Sample,
    t0: f64,
    max_evals: usize,
) -> Result<(Option<Sample>, bool)> {
    let (f0, d0) = (start.f, start.d);
    let armijo = |s: &Sample| s.f <= f0 + C1 * s.t * d0;
    let curvature = |s: &Sample| s.d.abs() <= -C2 * d0;
    let mut prev = start.clone();
    let mut t = t0;
    let mut evals = 0;
    let (mut lo, mut hi);
    loop {
        let cur = p.at(x, dir, t)?;
        evals += 1;
        if !cur.f.is_finite() {
            // treat as overshoot and shrink toward the last good point
            lo = prev;
            hi = cur;
            hi.f = f64::INFINITY;
            break;
        }
        if !armijo(&cur) || (evals > 1 && cur.f >= prev.f) {
            lo = prev;
            hi = cur;
            break;
        }
        if curvature(&cur) {
            return Ok((Some(cur), true));
        }
        if cur.d >= 0.0 {
            lo = cur;
            hi = prev;
            break;
        }
        if evals >= max_evals {
            return Ok((Some(cur), false));
        }
        let next = cubic_min(prev.t, prev.f, prev.d, cur.t, cur.f, cur.d, cur.t + 0.01 * (cur.t - prev.t), 10.0 * cur.t);
        prev = cur;
        t = next;
    }
    while evals < max_evals {
        let (a, b) = (lo.t.min(hi.t), lo.t.max(hi.t));
        if (b - a) * dir.iter().map(|d| d.abs()).fold(0.0, f64::max) < 1e-12 {
            break;
        }
        let mut t = if hi.f.is_finite() { cubic_min(lo.t, lo.f, lo.d, hi.t, hi.f, hi.d, a, b) } else { 0.5 * (a + b) };
        // keep away from the bracket ends
        let eps = 0.1 * (b - a);
        if t - a < eps || b - t < eps {
            t = 0.5 * (a + b);
        }
        let cur = p.at(x, dir, t)?;
        evals += 1;
        if !cur.f.is_finite() || !armijo(&cur) || cur.f >= lo.f {
            hi = cur;
            if !hi.f.is_finite() {
                hi.f = f64::INFINITY;
            }
        } else {
            if curvature(&cur) {
                return Ok((Some(cur), true));
            }
            if cur.d * (hi.t - lo.t) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    Ok((if lo.t > 0.0 { Some(lo) } else { None }, false))
}

/// Minimises `f` from `x0`; `f` returns value and gradient.
pub fn lbfgs<F>(mut f: F, x0: &[f64], steps: usize, cfg: &LbfgsConfig) -> Result<LbfgsReport>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut p = Problem { f: &mut f, evals: 0 };
    let mut x = x0.to_vec();
    let (mut fx, mut g) = (p.f)(&x)?;
    p.evals += 1;
    let initial_value = fx;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut failures = 0;
    let mut first = true;
    'outer: for _ in 0..steps {
        for _ in 0..cfg.max_iter {
            if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= cfg.tolerance_grad {
                break 'outer;
            }
            // two-loop recursion
            let mut q = g.clone();
            let mut alphas = Vec::with_capacity(history.len());
            for (s, y, rho) in history.iter().rev() {
                let a = rho * dot(s, &q);
                q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
                alphas.push(a);
            }
            if let Some((s, y, _)) = history.back() {
                let gamma = dot(s, y) / dot(y, y);
                q.iter_mut().for_each(|v| *v *= gamma);
            }
            for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
                let b = rho * dot(y, &q);
                q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
            }
            let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
            let mut dd = dot(&g, &dir);
            if !(dd < 0.0) {
                history.clear();
                dir = g.iter().map(|v| -v).collect();
                dd = dot(&g, &dir);
            }
            if dd.abs() <= cfg.tolerance_change {
                break 'outer;
            }
            let t0 = if first { (1.0 / g.iter().map(|v| v.abs()).sum::<f64>()).min(1.0) } else { 1.0 };
            first = false;
            let start = Sample { t: 0.0, f: fx, d: dd, g: g.clone() };
            let (found, wolfe) = line_search(&mut p, &x, &dir, &start, t0, cfg.max_line_search)?;
            let found = match found {
                Some(s) => s,
                None => {
                    failures += 1;
                    match gradient_fallback(&mut p, &x, &g, fx)? {
                        Some(s) => {
                            history.clear();
                            s
                        }
                        None => break 'outer,
                    }
                }
            };
            if !wolfe {
                failures += 1;
            }
            let step: Vec<f64> = dir.iter().map(|d| d * found.t).collect();
            let y: Vec<f64> = found.g.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&step, &y);
            if sy > 1e-10 {
                if history.len() == cfg.history {
                    history.pop_front();
                }
                history.push_back((step.clone(), y, 1.0 / sy));
            }
            let change = fx - found.f;
            x.iter_mut().zip(&step).for_each(|(a, s)| *a += s);
            fx = found.f;
            g = found.g;
            if change.abs() < cfg.tolerance_change || step.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= cfg.tolerance_change {
                break;
            }
        }
    }
    Ok(LbfgsReport { x, value: fx, initial_value, evaluations: p.evals, line_search_failures: failures })
}

/// Backtracking steepest descent used when the line search finds nothing.
fn gradient_fallback<F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>>(
    p: &mut Problem<'_, F>,
    x: &[f64],
    g: &[f64],
    fx: f64,
) -> Result<Option<Sample>> {
    let dir: Vec<f64> = g.iter().map(|v| -v).collect();
    let gg = dot(g, g);
    if gg == 0.0 {
        return Ok(None);
    }
    let mut t = 1.0 / gg.sqrt();
    for _ in 0..30 {
        let s = p.at(x, &dir, t)?;
        if s.f.is_finite() && s.f < fx {
            return Ok(Some(s));
        }
        t *= 0.5;
    }
    Ok(None)
}
