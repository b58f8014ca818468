//! Nelder-Mead simplex minimization on the unit box [0, 1]ⁿ.
//!
//! Trial points are clamped to the box. Convergence is declared when the
//! simplex diameter (largest vertex-to-vertex distance) drops below the
//! tolerance.

use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Simplex diameter at which the search stops.
    pub tolerance: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 300,
            tolerance: 1e-4,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub n_evals: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn clamp(x: &mut [f64]) {
    for v in x {
        *v = v.clamp(0.0, 1.0);
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in simplex.iter().enumerate() {
        for b in &simplex[i + 1..] {
            let dist = a.0.iter().zip(&b.0).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            d = d.max(dist);
        }
    }
    d
}

/// Minimizes `f` starting from `start` (clamped into the box).
pub fn minimize<F>(mut f: F, start: &[f64], options: &NelderMeadOptions) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        f(x)
    };

    let mut x0 = start.to_vec();
    clamp(&mut x0);
    let f0 = eval(&x0, &mut evals)?;
    if n == 0 {
        return Ok(NelderMeadResult {
            x: x0,
            value: f0,
            n_evals: evals,
            converged: true,
        });
    }

    let mut simplex = vec![(x0.clone(), f0)];
    for i in 0..n {
        let mut v = x0.clone();
        // step towards the interior
        v[i] += if v[i] + options.initial_step <= 1.0 {
            options.initial_step
        } else {
            -options.initial_step
        };
        clamp(&mut v);
        let fv = eval(&v, &mut evals)?;
        simplex.push((v, fv));
    }

    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&simplex) < options.tolerance {
            converged = true;
            break;
        }
        if evals >= options.max_evals {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v.0[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp(&mut p);
            p
        };

        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals)?;
        if fr < simplex[0].1 {
            let xe = along(EXPAND);
            let fe = eval(&xe, &mut evals)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(CONTRACT);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let mut p: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + SHRINK * (v - b))
                .collect();
            clamp(&mut p);
            let fp = eval(&p, &mut evals)?;
            *vertex = (p, fp);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Ok(NelderMeadResult {
        x,
        value,
        n_evals: evals,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_quadratic_minimum() {
        let r = minimize(
            |x| Ok((x[0] - 0.3).powi(2) + 10.0 * (x[1] - 0.7).powi(2)),
            &[0.9, 0.1],
            &NelderMeadOptions::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 0.3).abs() < 1e-4);
        assert!((r.x[1] - 0.7).abs() < 1e-4);
    }

    #[test]
    fn minimum_on_the_boundary() {
        let r = minimize(
            |x| Ok((x[0] + 0.5).powi(2) + (x[1] - 0.5).powi(2)),
            &[0.5, 0.5],
            &NelderMeadOptions::default(),
        )
        .unwrap();
        assert!(r.x[0] < 1e-4);
        assert!((r.x[1] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn rosenbrock_in_the_box() {
        let rosen = |x: &[f64]| {
            let (a, b) = (2.0 * x[0] - 0.5, 2.0 * x[1] - 0.5);
            Ok((1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2))
        };
        let r = minimize(
            rosen,
            &[0.1, 0.9],
            &NelderMeadOptions {
                max_evals: 2000,
                tolerance: 1e-7,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 0.75).abs() < 1e-4 && (r.x[1] - 0.75).abs() < 1e-4);
    }

    #[test]
    fn budget_exhaustion_is_not_an_error() {
        let r = minimize(
            |x| Ok((x[0] - 0.3).powi(2)),
            &[0.9],
            &NelderMeadOptions {
                max_evals: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!r.converged);
        assert!(r.value < 0.36);
    }

    #[test]
    fn zero_dimensional_problem() {
        let r = minimize(|_| Ok(4.0), &[], &NelderMeadOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.value, 4.0);
        assert_eq!(r.n_evals, 1);
    }
}
