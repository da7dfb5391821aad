//! Emotion-specific centroid search.
//!
//! The centroid of an emotion class is the point of the VAD cube that
//! maximizes
//!
//! ```text
//!     mean_{e in targets} |m - e|  /  (mean_{e in neutrals} |m - e| + eps)
//! ```
//!
//! i.e. it sits far from the target class while staying close to the neutral
//! class. The objective is non-convex but low dimensional, so we run a
//! box-projected Nelder-Mead simplex from a fixed set of starts and keep the
//! best. [`grid_search_centroid`] evaluates the same objective exhaustively
//! on a lattice and is used to check the solver.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{neutral_center, Centroid, CentroidMode, VadPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub simplex_tolerance: f64,
    pub random_starts: usize,
    pub seed: u64,
    pub denominator_epsilon: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            simplex_tolerance: 1e-6,
            random_starts: 8,
            seed: 42,
            denominator_epsilon: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        if !(self.simplex_tolerance > 0.0) {
            return Err(Error::InvalidArgument("simplex_tolerance must be > 0".into()));
        }
        if !(self.denominator_epsilon > 0.0) {
            return Err(Error::InvalidArgument("denominator_epsilon must be > 0".into()));
        }
        Ok(())
    }
}

fn mean_distance(m: [f64; 3], points: &[VadPoint]) -> f64 {
    let sum: f64 = points
        .iter()
        .map(|p| {
            let [v, a, d] = p.to_array();
            let (dv, da, dd) = (m[0] - v, m[1] - a, m[2] - d);
            (dv * dv + da * da + dd * dd).sqrt()
        })
        .sum();
    sum / points.len() as f64
}

/// Mean distance to the targets over mean distance to the neutrals (+ `eps`).
pub fn objective(m: [f64; 3], targets: &[VadPoint], neutrals: &[VadPoint], eps: f64) -> Result<f64> {
    check_inputs(targets, neutrals)?;
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument("eps must be >= 0".into()));
    }
    Ok(ratio(m, targets, neutrals, eps))
}

fn check_inputs(targets: &[VadPoint], neutrals: &[VadPoint]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::EmptyInput("target points"));
    }
    if neutrals.is_empty() {
        return Err(Error::EmptyInput("neutral points"));
    }
    Ok(())
}

#[inline]
fn ratio(m: [f64; 3], targets: &[VadPoint], neutrals: &[VadPoint], eps: f64) -> f64 {
    let num = mean_distance(m, targets);
    let den = mean_distance(m, neutrals) + eps;
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::MAX
    } else {
        0.0
    }
}

fn project(x: [f64; 3]) -> [f64; 3] {
    x.map(|c| c.clamp(0.0, 1.0))
}

/// Better objective first; ties go to the lexicographically smaller point.
fn better(a: (f64, [f64; 3]), b: (f64, [f64; 3])) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| lex_cmp(&a.1, &b.1))
}

fn lex_cmp(a: &[f64; 3], b: &[f64; 3]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Initial points: neutral mean, target mean, cube corners, then seeded
/// uniform draws.
fn starting_points(targets: &[VadPoint], neutrals: &[VadPoint], cfg: &SolverConfig) -> Vec<[f64; 3]> {
    let mut starts = Vec::with_capacity(10 + cfg.random_starts);
    // Both inputs are non-empty here.
    starts.push(neutral_center(neutrals).map(|c| c.point).unwrap_or([0.5; 3]));
    starts.push(neutral_center(targets).map(|c| c.point).unwrap_or([0.5; 3]));
    for corner in 0..8u8 {
        starts.push([0, 1, 2].map(|bit| f64::from((corner >> bit) & 1)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_starts {
        starts.push([rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()]);
    }
    starts
}

struct Simplex {
    vertices: [[f64; 3]; 4],
    values: [f64; 4],
}

/// Box-projected Nelder-Mead, minimizing `f`.
fn nelder_mead<F>(f: &F, start: [f64; 3], step: f64, cfg: &SolverConfig) -> ([f64; 3], f64, usize)
where
    F: Fn([f64; 3]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let mut vertices = [start; 4];
    for i in 0..3 {
        let mut v = start;
        v[i] = if start[i] + step <= 1.0 {
            start[i] + step
        } else {
            start[i] - step
        };
        vertices[i + 1] = v;
    }
    let mut s = Simplex {
        vertices,
        values: vertices.map(f),
    };

    let mut iter = 0;
    while iter < cfg.max_iterations {
        iter += 1;
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&i, &j| {
            s.values[i]
                .total_cmp(&s.values[j])
                .then_with(|| lex_cmp(&s.vertices[i], &s.vertices[j]))
        });
        s.vertices = order.map(|i| s.vertices[i]);
        s.values = order.map(|i| s.values[i]);

        let best = s.values[0];
        let spread = (s.values[3] - best).abs();
        let diameter = s.vertices[1..]
            .iter()
            .map(|v| dist(v, &s.vertices[0]))
            .fold(0.0, f64::max);
        if spread <= cfg.simplex_tolerance * (1.0 + best.abs()) && diameter <= cfg.simplex_tolerance {
            break;
        }

        let mut centroid = [0.0; 3];
        for v in &s.vertices[..3] {
            for k in 0..3 {
                centroid[k] += v[k] / 3.0;
            }
        }
        let along = |t: f64| project([0, 1, 2].map(|k| centroid[k] + t * (s.vertices[3][k] - centroid[k])));

        let xr = along(-REFLECT);
        let fr = f(xr);
        if fr < s.values[0] {
            let xe = along(-EXPAND);
            let fe = f(xe);
            if fe < fr {
                s.vertices[3] = xe;
                s.values[3] = fe;
            } else {
                s.vertices[3] = xr;
                s.values[3] = fr;
            }
            continue;
        }
        if fr < s.values[2] {
            s.vertices[3] = xr;
            s.values[3] = fr;
            continue;
        }
        let (xc, fc) = if fr < s.values[3] {
            let xc = along(-CONTRACT);
            (xc, f(xc))
        } else {
            let xc = along(CONTRACT);
            (xc, f(xc))
        };
        if fc < s.values[3].min(fr) {
            s.vertices[3] = xc;
            s.values[3] = fc;
            continue;
        }
        let x0 = s.vertices[0];
        for i in 1..4 {
            let v = project([0, 1, 2].map(|k| x0[k] + SHRINK * (s.vertices[i][k] - x0[k])));
            s.vertices[i] = v;
            s.values[i] = f(v);
        }
    }

    let (mut bi, mut bv) = (0, s.values[0]);
    for i in 1..4 {
        if s.values[i] < bv || (s.values[i] == bv && lex_cmp(&s.vertices[i], &s.vertices[bi]).is_lt()) {
            bi = i;
            bv = s.values[i];
        }
    }
    (s.vertices[bi], bv, iter)
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Runs the multi-start search; the emotion label is left unset.
pub fn solve_centroid(targets: &[VadPoint], neutrals: &[VadPoint], cfg: &SolverConfig) -> Result<Centroid> {
    check_inputs(targets, neutrals)?;
    cfg.validate()?;
    let eps = cfg.denominator_epsilon;
    let neg = |m: [f64; 3]| -ratio(m, targets, neutrals, eps);

    let starts = starting_points(targets, neutrals, cfg);
    let results: Vec<(f64, [f64; 3])> = starts
        .par_iter()
        .map(|&start| {
            let f_start = ratio(start, targets, neutrals, eps);
            let mut best = (f_start, start);
            let mut step = 0.1;
            // Restart from the incumbent until a restart stops paying off;
            // a collapsed simplex otherwise stalls on ridges.
            for _ in 0..4 {
                let (x, fx, _) = nelder_mead(&neg, best.1, step, cfg);
                let cand = (-fx, x);
                if better(cand, best).is_lt() && cand.0 > best.0 {
                    let gain = cand.0 - best.0;
                    best = cand;
                    if gain <= cfg.simplex_tolerance * (1.0 + best.0.abs()) {
                        break;
                    }
                } else {
                    break;
                }
                step *= 0.5;
            }
            best
        })
        .collect();

    // Sequential reduction keeps the result independent of thread count.
    let (objective, point) = results
        .into_iter()
        .min_by(|a, b| better(*a, *b))
        .expect("at least one start");
    log::debug!("centroid {point:?} objective {objective}");
    Ok(Centroid {
        point,
        mode: CentroidMode::EmotionAdaptive,
        emotion: None,
        objective: Some(objective),
    })
}

/// Exhaustive maximization over `{0, step, 2 step, ..., 1}^3`.
///
/// The lattice always includes 1.0 even when `step` does not divide it.
pub fn grid_search_centroid(
    targets: &[VadPoint],
    neutrals: &[VadPoint],
    step: f64,
    eps: f64,
) -> Result<Centroid> {
    check_inputs(targets, neutrals)?;
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::InvalidArgument(format!("grid step {step} not in (0, 0.5]")));
    }
    let axis = lattice_axis(step);
    let best = axis
        .par_iter()
        .map(|&v| {
            let mut best: Option<(f64, [f64; 3])> = None;
            for &a in &axis {
                for &d in &axis {
                    let m = [v, a, d];
                    let cand = (ratio(m, targets, neutrals, eps), m);
                    if best.is_none_or(|b| better(cand, b).is_lt()) {
                        best = Some(cand);
                    }
                }
            }
            best.expect("non-empty axis")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .min_by(|a, b| better(*a, *b))
        .expect("non-empty axis");
    Ok(Centroid {
        point: best.1,
        mode: CentroidMode::EmotionAdaptive,
        emotion: None,
        objective: Some(best.0),
    })
}

fn lattice_axis(step: f64) -> Vec<f64> {
    let n = (1.0 / step + 1e-9).floor() as usize;
    let mut axis: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(1.0)).collect();
    if *axis.last().expect("n >= 2") < 1.0 {
        axis.push(1.0);
    }
    axis
}
