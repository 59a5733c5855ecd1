//! Derivative-free local minimization (adaptive Nelder–Mead with restarts).

use alloc::vec;
use alloc::vec::Vec;

/// Simplex diameter (max-norm) below which a search counts as converged.
pub const DIAMETER_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub max_evals: usize,
    /// Initial simplex edge along each coordinate; a single entry is broadcast.
    pub step: Vec<f64>,
    /// Stop once the best value is below this and strictly below the initial value.
    pub floor: Option<f64>,
    /// Stop as soon as the best value drops below this.
    pub target: Option<f64>,
    /// Simplex rebuilds around the incumbent after convergence.
    pub restarts: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { max_evals: 2000, step: vec![0.1], floor: None, target: None, restarts: 2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Simplex diameter fell below [`DIAMETER_TOL`].
    Converged,
    EvalCap,
    BelowFloor,
    TargetReached,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub point: Vec<f64>,
    /// `+inf` only if every evaluated point, including the initial one, was rejected.
    pub value: f64,
    pub evaluations: usize,
    pub termination: Termination,
}

struct Counter<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> Option<f64>> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        match (self.f)(x) {
            Some(v) if !v.is_nan() => v,
            _ => f64::INFINITY,
        }
    }
}

/// Minimizes `objective` from `init`. `None` (or NaN) marks a rejected point, treated
/// as `+∞`. The returned value never exceeds the value at `init`.
pub fn local_search<F>(objective: F, init: &[f64], opts: &SearchOptions) -> SearchOutcome
where
    F: FnMut(&[f64]) -> Option<f64>,
{
    let mut ctr = Counter { f: objective, evals: 0 };
    let init_value = ctr.eval(init);
    let mut best = (init.to_vec(), init_value);
    let n = init.len();
    if n == 0 {
        return SearchOutcome {
            point: best.0,
            value: best.1,
            evaluations: ctr.evals,
            termination: Termination::Converged,
        };
    }
    let step: Vec<f64> = (0..n).map(|i| *opts.step.get(i).or(opts.step.last()).unwrap_or(&0.1)).collect();
    let mut termination = Termination::EvalCap;
    for round in 0..=opts.restarts {
        let before = best.1;
        let (point, value, t) = nelder_mead(&mut ctr, &best.0, best.1, &step, init_value, opts);
        if value < best.1 {
            best = (point, value);
        }
        termination = t;
        if t != Termination::Converged || (round > 0 && !(best.1 < before)) {
            break;
        }
    }
    SearchOutcome { point: best.0, value: best.1, evaluations: ctr.evals, termination }
}

fn nelder_mead<F: FnMut(&[f64]) -> Option<f64>>(
    ctr: &mut Counter<F>,
    x0: &[f64],
    f0: f64,
    step: &[f64],
    init_value: f64,
    opts: &SearchOptions,
) -> (Vec<f64>, f64, Termination) {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        if ctr.evals >= opts.max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step[i];
        let fx = ctr.eval(&x);
        simplex.push((x, fx));
    }
    if simplex.len() < n + 1 {
        return best_of(simplex, Termination::EvalCap);
    }

    let stop = |best: f64| -> Option<Termination> {
        if opts.target.is_some_and(|t| best < t) {
            return Some(Termination::TargetReached);
        }
        if opts.floor.is_some_and(|fl| best < fl && best < init_value) {
            return Some(Termination::BelowFloor);
        }
        None
    };

    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    loop {
        // Stable sort keeps the older vertex first among ties.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if let Some(t) = stop(simplex[0].1) {
            return best_of(simplex, t);
        }
        if diameter(&simplex) < DIAMETER_TOL {
            return best_of(simplex, Termination::Converged);
        }
        if ctr.evals >= opts.max_evals {
            return best_of(simplex, Termination::EvalCap);
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / nf;
            }
        }
        let worst = simplex[n].1;
        let second = simplex[n - 1].1;
        let best = simplex[0].1;

        let along = |t: f64, out: &mut Vec<f64>, w: &[f64]| {
            for ((o, c), wi) in out.iter_mut().zip(&centroid).zip(w) {
                *o = c + t * (c - wi);
            }
        };

        along(alpha, &mut trial, &simplex[n].0);
        let fr = ctr.eval(&trial);
        if fr < best {
            let reflected = trial.clone();
            along(alpha * beta, &mut trial, &simplex[n].0);
            let fe = ctr.eval(&trial);
            simplex[n] = if fe < fr { (trial.clone(), fe) } else { (reflected, fr) };
            continue;
        }
        if fr < second {
            simplex[n] = (trial.clone(), fr);
            continue;
        }
        if fr < worst {
            let reflected = trial.clone();
            along(alpha * gamma, &mut trial, &simplex[n].0);
            let fc = ctr.eval(&trial);
            if fc <= fr {
                simplex[n] = (trial.clone(), fc);
                continue;
            }
            simplex[n] = (reflected, fr);
            continue;
        }
        along(-gamma, &mut trial, &simplex[n].0);
        let fc = ctr.eval(&trial);
        if fc < worst {
            simplex[n] = (trial.clone(), fc);
            continue;
        }
        // shrink toward the best vertex
        let (head, tail) = simplex.split_at_mut(1);
        let x_best = &head[0].0;
        for v in tail.iter_mut() {
            for (vi, bi) in v.0.iter_mut().zip(x_best) {
                *vi = bi + delta * (*vi - bi);
            }
            v.1 = ctr.eval(&v.0);
            if ctr.evals >= opts.max_evals {
                break;
            }
        }
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let x0 = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(x, _)| x.iter().zip(x0).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

fn best_of(mut simplex: Vec<(Vec<f64>, f64)>, t: Termination) -> (Vec<f64>, f64, Termination) {
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, v, t)
}
