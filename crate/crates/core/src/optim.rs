//! Derivative-free Nelder–Mead simplex minimization.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexSettings {
    pub max_iters: usize,
    /// Convergence requires every vertex within `x_tol` (max-norm) of the best one...
    pub x_tol: f64,
    /// ...and every vertex value within `f_tol` of the best value.
    pub f_tol: f64,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        Self { max_iters: 2_000, x_tol: 1e-6, f_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` starting from `x0`; the initial simplex steps `step[i]`
/// along coordinate `i`. Non-finite objective values are treated as `+inf`.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], settings: &SimplexSettings) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    assert_eq!(x0.len(), step.len(), "step must match the dimension of x0");
    let dim = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += if step[i] != 0.0 { step[i] } else { 0.05 };
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if has_converged(&simplex, settings) {
            converged = true;
            break;
        }
        if iterations >= settings.max_iters {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect()
        };

        let reflected = along(REFLECT);
        let f_reflected = eval(&reflected);
        let best = simplex[0].1;
        let second_worst = simplex[dim - 1].1;

        if f_reflected < best {
            let expanded = along(EXPAND);
            let f_expanded = eval(&expanded);
            simplex[dim] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < second_worst {
            simplex[dim] = (reflected, f_reflected);
            continue;
        }
        // Contraction: outside if the reflection improved on the worst point.
        let (candidate, f_candidate) = if f_reflected < worst.1 {
            let c = along(CONTRACT);
            let v = eval(&c);
            (c, v)
        } else {
            let c = along(-CONTRACT);
            let v = eval(&c);
            (c, v)
        };
        if f_candidate < worst.1.min(f_reflected) {
            simplex[dim] = (candidate, f_candidate);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = anchor.iter().zip(&vertex.0).map(|(a, v)| a + SHRINK * (v - a)).collect();
            let value = eval(&x);
            *vertex = (x, value);
        }
    }

    let (x, value) = simplex.swap_remove(0);
    SimplexResult { x, value, iterations, evaluations, converged }
}

fn has_converged(simplex: &[(Vec<f64>, f64)], settings: &SimplexSettings) -> bool {
    let (best_x, best_f) = (&simplex[0].0, simplex[0].1);
    if !best_f.is_finite() {
        return false;
    }
    simplex[1..].iter().all(|(x, v)| {
        (v - best_f).abs() <= settings.f_tol
            && x.iter().zip(best_x).all(|(a, b)| (a - b).abs() <= settings.x_tol)
    })
}
