use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::{
    evaluate, kkt_residual, support, FunctionId, HyperDual, NlpProblem, OuterRecord, Scalar,
    SolverConfig, SolverResult, SolverStatus,
};
use crate::error::Result;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
const MAX_ACTIVE_SET_ROUNDS: usize = 5;

/// Solve `problem` with the augmented-Lagrangian method.
///
/// Inequalities become `g_j(x) + s_j = 0` with `s_j >= 0`; the bound
/// constrained subproblem in `(x, s)` is minimized with a projected Newton
/// method on the exact Hessian. Multipliers are updated only when the
/// constraint violation has fallen below the current target and below every
/// previously accepted violation, otherwise the penalty grows.
pub fn solve<P: NlpProblem>(problem: &P, config: &SolverConfig) -> Result<SolverResult> {
    config.validate()?;
    let start = Instant::now();
    let al = Augmented::new(problem);
    let n = al.n;

    let mut x = problem.initial_point();
    for (i, xi) in x.iter_mut().enumerate().take(n) {
        *xi = xi.clamp(al.lower[i], al.upper[i]);
    }
    let mut z = x.clone();
    match al.values(&x) {
        Ok(v) => z.extend(v.g.iter().map(|g| (-g).max(0.0))),
        Err(id) => return Ok(al.failure(z, id, 0, 0, Vec::new(), start)),
    }

    let m = al.me + al.mi;
    let mut lambda = vec![0.0; m];
    let mut mu = config.initial_penalty;
    let mut omega = (1.0 / mu).max(0.1 * config.kkt_tolerance);
    let mut eta = 1.0 / mu.powf(0.1);
    let mut best_accepted = f64::INFINITY;
    let mut history: Vec<OuterRecord> = Vec::new();
    let mut inner_total = 0;

    for outer in 1..=config.max_outer_iterations {
        let inner = match al.minimize(&mut z, &lambda, mu, omega, config.max_inner_iterations) {
            Ok(it) => it,
            Err((id, it)) => {
                return Ok(al.failure(z, id, outer, inner_total + it, history, start));
            }
        };
        inner_total += inner;

        let residual = match al.residuals(&z) {
            Ok(r) => r,
            Err(id) => return Ok(al.failure(z, id, outer, inner_total, history, start)),
        };
        let violation = residual.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let estimate: Vec<f64> = lambda
            .iter()
            .zip(&residual)
            .map(|(l, r)| l + mu * r)
            .collect();
        let (eq_mult, ineq_mult) = al.split_multipliers(&estimate);
        let kkt = kkt_residual(problem, &z[..n], &eq_mult, &ineq_mult);

        let converged = violation <= config.eq_tolerance
            && kkt.equality <= config.eq_tolerance
            && kkt.inequality <= config.eq_tolerance
            && kkt.stationarity <= config.kkt_tolerance
            && kkt.complementarity <= config.kkt_tolerance;
        let accept = violation <= eta.max(config.eq_tolerance) && violation <= best_accepted;
        history.push(OuterRecord {
            penalty: mu,
            violation,
            inner_iterations: inner,
            accepted: accept,
        });

        if converged {
            return Ok(al.finish(
                SolverStatus::Converged,
                z,
                eq_mult,
                ineq_mult,
                kkt,
                outer,
                inner_total,
                history,
                start,
                None,
            ));
        }

        if accept {
            lambda = estimate;
            best_accepted = violation;
            eta = (eta / mu.powf(0.9)).max(0.1 * config.eq_tolerance);
            omega = (omega / mu).max(0.1 * config.kkt_tolerance);
        } else {
            if mu >= config.max_penalty && stalled(&history) {
                let message = format!(
                    "constraint violation {violation:.3e} stalled at the maximum penalty {mu:.1e}"
                );
                return Ok(al.finish(
                    SolverStatus::Infeasible,
                    z,
                    eq_mult,
                    ineq_mult,
                    kkt,
                    outer,
                    inner_total,
                    history,
                    start,
                    Some(message),
                ));
            }
            mu = (mu * config.penalty_growth).min(config.max_penalty);
            eta = (1.0 / mu.powf(0.1)).max(0.1 * config.eq_tolerance);
            omega = (1.0 / mu).max(0.1 * config.kkt_tolerance);
        }
    }

    let residual = al.residuals(&z).unwrap_or_else(|_| vec![f64::NAN; m]);
    let estimate: Vec<f64> = lambda
        .iter()
        .zip(&residual)
        .map(|(l, r)| l + mu * r)
        .collect();
    let (eq_mult, ineq_mult) = al.split_multipliers(&estimate);
    let kkt = kkt_residual(problem, &z[..n], &eq_mult, &ineq_mult);
    Ok(al.finish(
        SolverStatus::IterationLimit,
        z,
        eq_mult,
        ineq_mult,
        kkt,
        config.max_outer_iterations,
        inner_total,
        history,
        start,
        Some("outer iteration limit reached".into()),
    ))
}

/// True when the last three rejected outer iterations made no real progress.
fn stalled(history: &[OuterRecord]) -> bool {
    if history.len() < 4 {
        return false;
    }
    let tail = &history[history.len() - 4..];
    tail.iter().all(|r| !r.accepted) && tail[3].violation > 0.9 * tail[0].violation
}

struct Values {
    f: f64,
    h: Vec<f64>,
    g: Vec<f64>,
}

/// The bound-constrained augmented Lagrangian in `z = (x, s)`.
struct Augmented<'a, P: NlpProblem> {
    problem: &'a P,
    n: usize,
    me: usize,
    mi: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective_support: Vec<usize>,
    eq_supports: Vec<Vec<usize>>,
    ineq_supports: Vec<Vec<usize>>,
}

impl<'a, P: NlpProblem> Augmented<'a, P> {
    fn new(problem: &'a P) -> Self {
        let n = problem.num_vars();
        let me = problem.num_eq();
        let mi = problem.num_ineq();
        let mut lower = problem.lower_bounds();
        let mut upper = problem.upper_bounds();
        lower.extend(std::iter::repeat_n(0.0, mi));
        upper.extend(std::iter::repeat_n(f64::INFINITY, mi));
        Augmented {
            problem,
            n,
            me,
            mi,
            lower,
            upper,
            objective_support: support(problem, FunctionId::Objective),
            eq_supports: (0..me).map(|j| support(problem, FunctionId::Equality(j))).collect(),
            ineq_supports: (0..mi)
                .map(|j| support(problem, FunctionId::Inequality(j)))
                .collect(),
        }
    }

    fn values(&self, x: &[f64]) -> std::result::Result<Values, FunctionId> {
        let check = |id: FunctionId, v: f64| if v.is_finite() { Ok(v) } else { Err(id) };
        let f = check(FunctionId::Objective, self.problem.objective(x))?;
        let h = (0..self.me)
            .map(|j| check(FunctionId::Equality(j), self.problem.equality(j, x)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let g = (0..self.mi)
            .map(|j| check(FunctionId::Inequality(j), self.problem.inequality(j, x)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Values { f, h, g })
    }

    fn residuals(&self, z: &[f64]) -> std::result::Result<Vec<f64>, FunctionId> {
        let v = self.values(&z[..self.n])?;
        let mut r = v.h;
        r.extend(v.g.iter().zip(&z[self.n..]).map(|(g, s)| g + s));
        Ok(r)
    }

    fn merit(&self, z: &[f64], lambda: &[f64], mu: f64) -> Option<f64> {
        let v = self.values(&z[..self.n]).ok()?;
        let mut phi = v.f;
        let slack = &z[self.n..];
        let rows = v.h.iter().copied().chain(v.g.iter().zip(slack).map(|(g, s)| g + s));
        for (r, l) in rows.zip(lambda) {
            phi += l * r + 0.5 * mu * r * r;
        }
        phi.is_finite().then_some(phi)
    }

    /// Value, gradient and Hessian of one function over its support.
    fn second_order(
        &self,
        id: FunctionId,
        support: &[usize],
        scratch: &mut [HyperDual],
    ) -> (f64, Vec<f64>, Vec<f64>) {
        let k = support.len();
        let mut grad = vec![0.0; k];
        let mut hess = vec![0.0; k * k];
        if k == 0 {
            return (evaluate(self.problem, id, scratch).re, grad, hess);
        }
        let mut value = 0.0;
        for a in 0..k {
            for b in a..k {
                scratch[support[a]].e1 = 1.0;
                scratch[support[b]].e2 = 1.0;
                let v = evaluate(self.problem, id, scratch);
                scratch[support[a]].e1 = 0.0;
                scratch[support[b]].e2 = 0.0;
                hess[a * k + b] = v.e12;
                hess[b * k + a] = v.e12;
                if a == b {
                    grad[a] = v.e1;
                    value = v.re;
                }
            }
        }
        (value, grad, hess)
    }

    /// Quadratic model of the augmented Lagrangian at `z`.
    fn model(
        &self,
        z: &[f64],
        lambda: &[f64],
        mu: f64,
    ) -> std::result::Result<(f64, DVector<f64>, DMatrix<f64>), FunctionId> {
        let n = self.n;
        let dim = n + self.mi;
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        let mut scratch: Vec<HyperDual> = z[..n].iter().map(|&v| HyperDual::constant(v)).collect();

        let (f, gf, hf) = self.second_order(FunctionId::Objective, &self.objective_support, &mut scratch);
        if !f.is_finite() {
            return Err(FunctionId::Objective);
        }
        let sup = &self.objective_support;
        for (a, &ia) in sup.iter().enumerate() {
            grad[ia] += gf[a];
            for (b, &ib) in sup.iter().enumerate() {
                hess[(ia, ib)] += hf[a * sup.len() + b];
            }
        }
        let mut phi = f;

        for j in 0..self.me + self.mi {
            let (id, sup, slack) = if j < self.me {
                (FunctionId::Equality(j), &self.eq_supports[j], None)
            } else {
                let i = j - self.me;
                (FunctionId::Inequality(i), &self.ineq_supports[i], Some(n + i))
            };
            let (c, gc, hc) = self.second_order(id, sup, &mut scratch);
            if !c.is_finite() {
                return Err(id);
            }
            let r = c + slack.map_or(0.0, |s| z[s]);
            let w = lambda[j] + mu * r;
            phi += lambda[j] * r + 0.5 * mu * r * r;
            let k = sup.len();
            for (a, &ia) in sup.iter().enumerate() {
                grad[ia] += w * gc[a];
                for (b, &ib) in sup.iter().enumerate() {
                    hess[(ia, ib)] += w * hc[a * k + b] + mu * gc[a] * gc[b];
                }
            }
            if let Some(s) = slack {
                grad[s] += w;
                hess[(s, s)] += mu;
                for (a, &ia) in sup.iter().enumerate() {
                    hess[(ia, s)] += mu * gc[a];
                    hess[(s, ia)] += mu * gc[a];
                }
            }
        }
        Ok((phi, grad, hess))
    }

    fn project(&self, z: &mut [f64]) {
        for (i, v) in z.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    /// Projected Newton iterations on the subproblem until the projected
    /// gradient drops below `omega`. Returns the iteration count.
    fn minimize(
        &self,
        z: &mut Vec<f64>,
        lambda: &[f64],
        mu: f64,
        omega: f64,
        max_iter: usize,
    ) -> std::result::Result<usize, (FunctionId, usize)> {
        let dim = z.len();
        for it in 0..max_iter {
            let (phi, grad, hess) = self.model(z, lambda, mu).map_err(|id| (id, it))?;
            let mut trial = z.clone();
            let mut pg = 0.0f64;
            for i in 0..dim {
                trial[i] = (z[i] - grad[i]).clamp(self.lower[i], self.upper[i]);
                pg = pg.max((z[i] - trial[i]).abs());
            }
            if pg <= omega {
                return Ok(it);
            }

            let band = pg.min(1e-3);
            let near_lower = |i: usize| z[i] <= self.lower[i] + band;
            let near_upper = |i: usize| z[i] >= self.upper[i] - band;
            let mut free: Vec<usize> = (0..dim)
                .filter(|&i| {
                    self.lower[i] < self.upper[i]
                        && !((near_lower(i) && grad[i] > 0.0) || (near_upper(i) && grad[i] < 0.0))
                })
                .collect();

            // Variables held at a bound go straight to it.
            let mut direction = vec![0.0; dim];
            for i in 0..dim {
                if near_lower(i) && grad[i] > 0.0 {
                    direction[i] = self.lower[i] - z[i];
                } else if near_upper(i) && grad[i] < 0.0 {
                    direction[i] = self.upper[i] - z[i];
                }
            }
            // Variables next to a bound that the Newton step would push
            // through it are held in place and the step is recomputed;
            // otherwise the projection truncates the step and progress stalls.
            for _ in 0..MAX_ACTIVE_SET_ROUNDS {
                let Some(step) = newton_step(&hess, &grad, &free) else {
                    break;
                };
                let blocked: Vec<usize> = free
                    .iter()
                    .zip(&step)
                    .filter(|&(&i, &d)| (near_lower(i) && d < 0.0) || (near_upper(i) && d > 0.0))
                    .map(|(&i, _)| i)
                    .collect();
                for (k, &i) in free.iter().enumerate() {
                    direction[i] = step[k];
                }
                if blocked.is_empty() {
                    break;
                }
                for &i in &blocked {
                    direction[i] = 0.0;
                }
                free.retain(|i| !blocked.contains(i));
            }

            let accepted = self
                .line_search(z, phi, &grad, &direction, lambda, mu)
                .or_else(|| {
                    let scale = (0..dim).map(|i| hess[(i, i)].abs()).fold(1.0, f64::max);
                    let steepest: Vec<f64> = grad.iter().map(|g| -g / scale).collect();
                    self.line_search(z, phi, &grad, &steepest, lambda, mu)
                });
            match accepted {
                Some(next) => {
                    let moved = next
                        .iter()
                        .zip(z.iter())
                        .fold(0.0f64, |a, (p, q)| a.max((p - q).abs() / (1.0 + q.abs())));
                    *z = next;
                    if moved < 1e-16 {
                        return Ok(it + 1);
                    }
                }
                None => return Ok(it + 1),
            }
        }
        Ok(max_iter)
    }

    fn line_search(
        &self,
        z: &[f64],
        phi: f64,
        grad: &DVector<f64>,
        direction: &[f64],
        lambda: &[f64],
        mu: f64,
    ) -> Option<Vec<f64>> {
        let mut alpha = 1.0;
        let mut trial = vec![0.0; z.len()];
        for _ in 0..MAX_BACKTRACKS {
            for i in 0..z.len() {
                trial[i] = z[i] + alpha * direction[i];
            }
            self.project(&mut trial);
            let decrease: f64 = (0..z.len()).map(|i| grad[i] * (z[i] - trial[i])).sum();
            if decrease > 0.0 {
                if let Some(value) = self.merit(&trial, lambda, mu) {
                    if value <= phi - ARMIJO * decrease {
                        return Some(trial);
                    }
                }
            }
            alpha *= 0.5;
        }
        None
    }

    fn split_multipliers(&self, estimate: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let eq = estimate[..self.me].to_vec();
        let ineq = estimate[self.me..].iter().map(|v| v.max(0.0)).collect();
        (eq, ineq)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        status: SolverStatus,
        z: Vec<f64>,
        eq_multipliers: Vec<f64>,
        ineq_multipliers: Vec<f64>,
        residuals: super::KktResiduals,
        outer: usize,
        inner: usize,
        history: Vec<OuterRecord>,
        start: Instant,
        message: Option<String>,
    ) -> SolverResult {
        let x = z[..self.n].to_vec();
        SolverResult {
            status,
            objective: self.problem.objective(&x),
            x,
            eq_multipliers,
            ineq_multipliers,
            residuals,
            outer_iterations: outer,
            inner_iterations: inner,
            history,
            wall_time: start.elapsed(),
            message,
        }
    }

    fn failure(
        &self,
        z: Vec<f64>,
        id: FunctionId,
        outer: usize,
        inner: usize,
        history: Vec<OuterRecord>,
        start: Instant,
    ) -> SolverResult {
        let x: Vec<f64> = z[..self.n].to_vec();
        let message = format!("non-finite value in {id} at x = {x:?}");
        SolverResult {
            status: SolverStatus::Infeasible,
            objective: f64::NAN,
            x,
            eq_multipliers: vec![0.0; self.me],
            ineq_multipliers: vec![0.0; self.mi],
            residuals: super::KktResiduals {
                stationarity: f64::NAN,
                equality: f64::NAN,
                inequality: f64::NAN,
                complementarity: f64::NAN,
            },
            outer_iterations: outer,
            inner_iterations: inner,
            history,
            wall_time: start.elapsed(),
            message: Some(message),
        }
    }
}

/// Newton direction on the free variables, shifting the reduced Hessian
/// until its Cholesky factorization exists.
fn newton_step(hess: &DMatrix<f64>, grad: &DVector<f64>, free: &[usize]) -> Option<Vec<f64>> {
    let k = free.len();
    if k == 0 {
        return Some(Vec::new());
    }
    let reduced = DMatrix::from_fn(k, k, |a, b| hess[(free[a], free[b])]);
    let rhs = DVector::from_iterator(k, free.iter().map(|&i| -grad[i]));
    let scale = (0..k).map(|a| reduced[(a, a)].abs()).fold(1.0, f64::max);
    let mut shift = 1e-12 * scale;
    for _ in 0..30 {
        let mut shifted = reduced.clone();
        for a in 0..k {
            shifted[(a, a)] += shift;
        }
        if let Some(chol) = shifted.cholesky() {
            let step = chol.solve(&rhs);
            if step.iter().all(|v| v.is_finite()) {
                return Some(step.iter().copied().collect());
            }
        }
        shift = (shift * 10.0).max(1e-8 * scale);
    }
    None
}
