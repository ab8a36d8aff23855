//! Derivative-free minimization with the Nelder–Mead simplex method.
//!
//! The step logic follows the Lagarias, Reeds, Wright & Wright formulation:
//! vertices are kept ordered by objective value, a trial point is reflected
//! through the centroid of the best `n` vertices, and the simplex is expanded,
//! contracted (outside or inside) or shrunk toward the best vertex depending
//! on where the reflected value falls.

use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("starting point must have at least one coordinate")]
    EmptyStart,
    #[error("objective is not finite at initial simplex vertex {vertex} (value {value})")]
    NonFiniteObjective { vertex: usize, value: f64 },
    #[error("initial simplex must have n + 1 vertices of dimension n (got {vertices} vertices, dimension {dim})")]
    BadSimplex { vertices: usize, dim: usize },
    #[error("invalid simplex configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Tolerances, iteration cap and step coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexConfig {
    /// Threshold on the largest infinity-norm distance from any vertex to the best vertex.
    pub tol_x: f64,
    /// Threshold on the largest objective difference between any vertex and the best vertex.
    pub tol_f: f64,
    /// Iteration cap. `None` means `200 * n`.
    pub max_iter: Option<usize>,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self {
            tol_x: 1e-8,
            tol_f: 1e-8,
            max_iter: None,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

impl SimplexConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        if !(self.tol_x > 0.0 && self.tol_x.is_finite()) {
            return Err(OptimizeError::InvalidConfig("tol_x must be positive"));
        }
        if !(self.tol_f > 0.0 && self.tol_f.is_finite()) {
            return Err(OptimizeError::InvalidConfig("tol_f must be positive"));
        }
        if self.max_iter == Some(0) {
            return Err(OptimizeError::InvalidConfig("max_iter must be positive"));
        }
        if !(self.reflection > 0.0) {
            return Err(OptimizeError::InvalidConfig("reflection must be > 0"));
        }
        if !(self.expansion > 1.0 && self.expansion > self.reflection) {
            return Err(OptimizeError::InvalidConfig(
                "expansion must exceed 1 and the reflection coefficient",
            ));
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(OptimizeError::InvalidConfig("contraction must lie in (0, 1)"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(OptimizeError::InvalidConfig("shrink must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn iteration_cap(&self, dim: usize) -> usize {
        self.max_iter.unwrap_or(200 * dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub x_min: Vec<f64>,
    pub f_min: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Total number of objective evaluations, initial simplex included.
    pub evaluations: usize,
}

/// Which move an iteration ended with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Reflect,
    Expand,
    ContractOutside,
    ContractInside,
    Shrink,
}

/// Snapshot handed to an observer after every completed iteration.
#[derive(Debug)]
pub struct IterationState<'a> {
    pub iteration: usize,
    pub step: Step,
    /// Vertices ordered best first.
    pub vertices: &'a [Vec<f64>],
    pub values: &'a [f64],
    pub evaluations: usize,
}

/// Minimize `objective` starting from `x0` with the default axis-aligned initial simplex.
pub fn nelder_mead<F>(
    objective: F,
    x0: &[f64],
    config: &SimplexConfig,
) -> Result<MinimizeResult, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
{
    nelder_mead_observed(objective, x0, config, |_| {})
}

/// Like [`nelder_mead`], calling `observer` after every iteration.
pub fn nelder_mead_observed<F, O>(
    objective: F,
    x0: &[f64],
    config: &SimplexConfig,
    observer: O,
) -> Result<MinimizeResult, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
    O: FnMut(&IterationState<'_>),
{
    if x0.is_empty() {
        return Err(OptimizeError::EmptyStart);
    }
    minimize_from_simplex(objective, initial_simplex(x0), config, observer)
}

/// `x0` plus `x0 + h_i e_i`, with `h_i = 0.05 |x0_i|`, or `0.00025` where `x0_i == 0`.
pub fn initial_simplex(x0: &[f64]) -> Vec<Vec<f64>> {
    let mut simplex = Vec::with_capacity(x0.len() + 1);
    simplex.push(x0.to_vec());
    for i in 0..x0.len() {
        let mut v = x0.to_vec();
        v[i] = if x0[i] != 0.0 { 1.05 * x0[i] } else { 0.00025 };
        simplex.push(v);
    }
    simplex
}

fn order_value(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn cmp_values(a: f64, b: f64) -> Ordering {
    order_value(a)
        .partial_cmp(&order_value(b))
        .unwrap_or(Ordering::Equal)
}

/// Runs the search from an explicit initial simplex of `n + 1` points in `R^n`.
pub fn minimize_from_simplex<F, O>(
    mut objective: F,
    simplex: Vec<Vec<f64>>,
    config: &SimplexConfig,
    mut observer: O,
) -> Result<MinimizeResult, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
    O: FnMut(&IterationState<'_>),
{
    config.validate()?;
    let dim = simplex.first().map_or(0, Vec::len);
    if dim == 0 {
        return Err(OptimizeError::EmptyStart);
    }
    if simplex.len() != dim + 1 || simplex.iter().any(|v| v.len() != dim) {
        return Err(OptimizeError::BadSimplex {
            vertices: simplex.len(),
            dim,
        });
    }

    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut values = Vec::with_capacity(dim + 1);
    for (i, v) in simplex.iter().enumerate() {
        let f = eval(v, &mut evaluations);
        if !f.is_finite() {
            return Err(OptimizeError::NonFiniteObjective {
                vertex: i,
                value: f,
            });
        }
        values.push(f);
    }

    // Vertices and values are kept sorted best-first; ties keep insertion order.
    let mut vertices = simplex;
    sort_simplex(&mut vertices, &mut values);

    let cap = config.iteration_cap(dim);
    let n = dim as f64;
    let mut iterations = 0usize;
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut trial2 = vec![0.0; dim];

    let converged = loop {
        if has_converged(&vertices, &values, config) {
            break true;
        }
        if iterations >= cap {
            break false;
        }
        iterations += 1;
        let best_before = values[0];

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for v in &vertices[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n);

        let worst = dim;
        let f_best = values[0];
        let f_second_worst = values[dim - 1];
        let f_worst = values[worst];

        affine(&centroid, &vertices[worst], config.reflection, &mut trial);
        let f_r = eval(&trial, &mut evaluations);

        let step = if f_r < f_best {
            affine(
                &centroid,
                &vertices[worst],
                config.reflection * config.expansion,
                &mut trial2,
            );
            let f_e = eval(&trial2, &mut evaluations);
            if f_e < f_r {
                replace_worst(&mut vertices, &mut values, &trial2, f_e);
                Step::Expand
            } else {
                replace_worst(&mut vertices, &mut values, &trial, f_r);
                Step::Reflect
            }
        } else if f_r < f_second_worst {
            replace_worst(&mut vertices, &mut values, &trial, f_r);
            Step::Reflect
        } else if f_r < f_worst {
            affine(
                &centroid,
                &vertices[worst],
                config.reflection * config.contraction,
                &mut trial2,
            );
            let f_c = eval(&trial2, &mut evaluations);
            if f_c <= f_r {
                replace_worst(&mut vertices, &mut values, &trial2, f_c);
                Step::ContractOutside
            } else {
                shrink(&mut vertices, &mut values, config.shrink, &mut |x| {
                    eval(x, &mut evaluations)
                });
                Step::Shrink
            }
        } else {
            affine(&centroid, &vertices[worst], -config.contraction, &mut trial2);
            let f_cc = eval(&trial2, &mut evaluations);
            if f_cc < f_worst {
                replace_worst(&mut vertices, &mut values, &trial2, f_cc);
                Step::ContractInside
            } else {
                shrink(&mut vertices, &mut values, config.shrink, &mut |x| {
                    eval(x, &mut evaluations)
                });
                Step::Shrink
            }
        };

        debug_assert!(
            !(cmp_values(values[0], best_before) == Ordering::Greater),
            "best simplex value increased from {best_before} to {}",
            values[0]
        );

        observer(&IterationState {
            iteration: iterations,
            step,
            vertices: &vertices,
            values: &values,
            evaluations,
        });
    };

    Ok(MinimizeResult {
        x_min: vertices[0].clone(),
        f_min: values[0],
        iterations,
        converged,
        evaluations,
    })
}

/// `out = centroid + coef * (centroid - worst)`.
fn affine(centroid: &[f64], worst: &[f64], coef: f64, out: &mut [f64]) {
    for ((o, c), w) in out.iter_mut().zip(centroid).zip(worst) {
        *o = c + coef * (c - w);
    }
}

fn replace_worst(vertices: &mut [Vec<f64>], values: &mut [f64], point: &[f64], value: f64) {
    let last = vertices.len() - 1;
    vertices[last].copy_from_slice(point);
    values[last] = value;
    // Insert the new vertex after every vertex with an equal or better value.
    let mut i = last;
    while i > 0 && cmp_values(values[i - 1], values[i]) == Ordering::Greater {
        vertices.swap(i - 1, i);
        values.swap(i - 1, i);
        i -= 1;
    }
}

fn shrink(
    vertices: &mut [Vec<f64>],
    values: &mut [f64],
    coef: f64,
    eval: &mut dyn FnMut(&[f64]) -> f64,
) {
    let (best, rest) = vertices.split_first_mut().expect("non-empty simplex");
    for (v, f) in rest.iter_mut().zip(values.iter_mut().skip(1)) {
        for (x, b) in v.iter_mut().zip(best.iter()) {
            *x = b + coef * (*x - b);
        }
        *f = eval(v);
    }
    sort_simplex(vertices, values);
}

fn sort_simplex(vertices: &mut [Vec<f64>], values: &mut [f64]) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| cmp_values(values[a], values[b]));
    let sorted_v: Vec<Vec<f64>> = order.iter().map(|&i| vertices[i].clone()).collect();
    let sorted_f: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    vertices.clone_from_slice(&sorted_v);
    values.copy_from_slice(&sorted_f);
}

fn has_converged(vertices: &[Vec<f64>], values: &[f64], config: &SimplexConfig) -> bool {
    let best = &vertices[0];
    let x_spread = vertices[1..]
        .iter()
        .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0f64, f64::max);
    let f_spread = values[1..]
        .iter()
        .map(|f| (f - values[0]).abs())
        .fold(0.0f64, f64::max);
    x_spread < config.tol_x && f_spread < config.tol_f
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(p: &[f64]) -> f64 {
        (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2)
    }

    #[test]
    fn quadratic_1d() {
        let r = nelder_mead(|x| (x[0] - 3.0).powi(2), &[0.0], &SimplexConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.x_min[0] - 3.0).abs() < 1e-6, "{:?}", r);
    }

    #[test]
    fn rosenbrock_from_standard_start() {
        let r = nelder_mead(rosenbrock, &[-1.2, 1.0], &SimplexConfig::default()).unwrap();
        assert!(r.iterations <= 400);
        assert!(r.f_min < 1e-8, "{:?}", r);
        assert!((r.x_min[0] - 1.0).abs() < 1e-4 && (r.x_min[1] - 1.0).abs() < 1e-4);
        assert_eq!(r.f_min, rosenbrock(&r.x_min));
    }

    #[test]
    fn iteration_cap_returns_best_vertex() {
        let cfg = SimplexConfig {
            max_iter: Some(3),
            ..Default::default()
        };
        let f = |x: &[f64]| x[0] * x[0] + x[1] * x[1];
        let r = nelder_mead(f, &[1.0, 1.0], &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
        assert!(r.f_min < 2.0);
        assert_eq!(r.f_min, f(&r.x_min));
    }

    #[test]
    fn non_finite_at_start_is_an_error() {
        let err = nelder_mead(|_| f64::NAN, &[1.0], &SimplexConfig::default()).unwrap_err();
        assert!(matches!(err, OptimizeError::NonFiniteObjective { vertex: 0, .. }));
        let err = nelder_mead(
            |x| if x[0] > 1.01 { f64::INFINITY } else { x[0] },
            &[1.0],
            &SimplexConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, OptimizeError::NonFiniteObjective { vertex: 1, .. }));
    }

    #[test]
    fn nan_mid_run_is_treated_as_worst() {
        // NaN region x < 0.5 lies between the start and nothing useful; minimum at 2.
        let f = |x: &[f64]| if x[0] < 0.5 { f64::NAN } else { (x[0] - 2.0).powi(2) };
        let r = nelder_mead(f, &[4.0], &SimplexConfig::default()).unwrap();
        assert!((r.x_min[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn empty_start_and_bad_config() {
        assert_eq!(
            nelder_mead(|_| 0.0, &[], &SimplexConfig::default()).unwrap_err(),
            OptimizeError::EmptyStart
        );
        let cfg = SimplexConfig {
            contraction: 1.5,
            ..Default::default()
        };
        assert!(matches!(
            nelder_mead(|x| x[0], &[1.0], &cfg),
            Err(OptimizeError::InvalidConfig(_))
        ));
    }

    #[test]
    fn initial_simplex_construction() {
        let s = initial_simplex(&[2.0, 0.0, -4.0]);
        assert_eq!(s.len(), 4);
        assert_eq!(s[1], vec![2.1, 0.0, -4.0]);
        assert_eq!(s[2], vec![2.0, 0.00025, -4.0]);
        assert_eq!(s[3], vec![2.0, 0.0, -4.2]);
    }

    #[test]
    fn evaluation_budget() {
        let dim = 3;
        let mut prev = dim + 1;
        let mut first = true;
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 1.0).powi(2)).sum();
        let r = nelder_mead_observed(f, &[0.3, -2.0, 5.0], &SimplexConfig::default(), |s| {
            if first {
                assert!(s.evaluations - (dim + 1) <= 2 + dim + 1);
                first = false;
            } else {
                assert!(s.evaluations - prev <= 2 + dim + 1, "step {:?}", s.step);
            }
            prev = s.evaluations;
        })
        .unwrap();
        assert!(r.converged);
    }
}
