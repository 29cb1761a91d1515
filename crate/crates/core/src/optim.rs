//! Derivative-free local minimization (Nelder–Mead with dimension-adaptive
//! coefficients).

#[derive(Debug, Clone, Copy)]
pub(crate) struct NelderMeadOptions {
    pub initial_step: f64,
    pub max_evaluations: usize,
    /// Stop when the spread of function values across the simplex drops below this.
    pub f_tolerance: f64,
    /// ... and the simplex diameter drops below this.
    pub x_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            max_evaluations: 20_000,
            f_tolerance: 1e-12,
            x_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

pub(crate) fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let f0 = eval(x0);
    if dim == 0 {
        return NelderMeadOutcome {
            x: Vec::new(),
            f: f0,
            evaluations: 1,
            converged: true,
        };
    }

    let d = dim as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / d, 0.75 - 0.5 / d, 1.0 - 1.0 / d);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let fx = eval(&x);
        simplex.push((x, fx));
    }

    let mut converged = false;
    let mut spent = dim + 1;
    while spent < opts.max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (worst - best).abs() <= opts.f_tolerance && diameter <= opts.x_tolerance {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / d;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(alpha);
        let fr = eval(&reflected);
        spent += 1;
        if fr < simplex[0].1 {
            let expanded = along(alpha * beta);
            let fe = eval(&expanded);
            spent += 1;
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[dim].1 {
            let x = along(alpha * gamma);
            let fx = eval(&x);
            (x, fx)
        } else {
            let x = along(-gamma);
            let fx = eval(&x);
            (x, fx)
        };
        spent += 1;
        if fc < fr.min(simplex[dim].1) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for (x, fx) in simplex.iter_mut().skip(1) {
            for (xi, a) in x.iter_mut().zip(&anchor) {
                *xi = a + delta * (*xi - a);
            }
            *fx = eval(x);
        }
        spent += dim;
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    NelderMeadOutcome {
        x,
        f,
        evaluations,
        converged,
    }
}
