//! Minimal Nelder–Mead simplex minimizer.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) struct Settings {
    pub max_evals: usize,
    /// Stop once every vertex is within this (sup-norm) distance of the best.
    pub xtol: f64,
    /// Stop once the simplex values agree to this relative spread.
    pub ftol: f64,
    pub initial_step: f64,
}

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

pub(crate) fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], cfg: &Settings) -> Outcome {
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += cfg.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();
    let mut order: Vec<usize> = (0..=dim).collect();
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut trial2 = vec![0.0; dim];
    let mut converged = false;

    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, worst, second) = (order[0], order[dim], order[dim - 1]);

        let diameter = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| libm::fabs(a - b)))
            .fold(0.0, f64::max);
        let spread = values[worst] - values[best];
        if diameter < cfg.xtol
            || (values[best].is_finite() && spread <= cfg.ftol * (1.0 + libm::fabs(values[best])))
        {
            converged = true;
            break;
        }
        if evals >= cfg.max_evals {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..dim] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / dim as f64;
            }
        }
        let point = |coef: f64, out: &mut Vec<f64>, from: &[f64]| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(from) {
                *o = c + coef * (c - w);
            }
        };

        point(REFLECT, &mut trial, &simplex[worst]);
        let fr = eval(&trial, &mut evals);
        if fr < values[best] {
            point(EXPAND, &mut trial2, &simplex[worst]);
            let fe = eval(&trial2, &mut evals);
            if fe < fr {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = fe;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = fr;
            continue;
        }
        // contraction: outside if the reflection helped at all, inside otherwise
        let outside = fr < values[worst];
        let coef = if outside { CONTRACT * REFLECT } else { -CONTRACT };
        point(coef, &mut trial2, &simplex[worst]);
        let fc = eval(&trial2, &mut evals);
        if (outside && fc <= fr) || (!outside && fc < values[worst]) {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                *x = a + SHRINK * (*x - a);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Outcome {
        x: simplex.swap_remove(best),
        f: values[best],
        evals,
        converged,
    }
}
