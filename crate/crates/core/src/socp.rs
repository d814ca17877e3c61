//! Dense log-barrier interior-point solver for linear objectives over second-order cones.
//!
//! Solves `min cᵀx  s.t.  a_iᵀx + b_i ≥ ‖U_i x + d_i‖` for every cone `i`. A phase-I
//! problem finds a strictly feasible start when the supplied one is not.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Cholesky, LU};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{RMat, RVec};

/// `t_coefᵀx + t_const ≥ ‖u_coef x + u_const‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    pub t_coef: RVec,
    pub t_const: f64,
    pub u_coef: RMat,
    pub u_const: RVec,
}

impl Cone {
    /// The Euclidean ball `‖x‖ ≤ radius`.
    pub fn ball(dim: usize, radius: f64) -> Self {
        Self { t_coef: RVec::zeros(dim), t_const: radius, u_coef: RMat::identity(dim, dim), u_const: RVec::zeros(dim) }
    }

    pub fn eval(&self, x: &RVec) -> (f64, RVec) {
        (self.t_coef.dot(x) + self.t_const, &self.u_coef * x + &self.u_const)
    }

    /// `t − ‖u‖`; positive strictly inside.
    pub fn margin(&self, x: &RVec) -> f64 {
        let (t, u) = self.eval(x);
        t - u.norm()
    }

    fn extended(&self) -> Self {
        let n = self.t_coef.len();
        let mut t_coef = self.t_coef.clone().resize_vertically(n + 1, 0.0);
        t_coef[n] = 1.0;
        let u_coef = self.u_coef.clone().resize_horizontally(n + 1, 0.0);
        Self { t_coef, t_const: self.t_const, u_coef, u_const: self.u_const.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Socp {
    /// Minimized objective `c`.
    pub objective: RVec,
    pub cones: Vec<Cone>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SocpOptions {
    /// Stop when the duality gap is below `gap_tol · (1 + |cᵀx|)`.
    pub gap_tol: f64,
    pub barrier_growth: f64,
    pub max_newton: usize,
    /// Warm start; used as the phase-I seed when it is not strictly feasible.
    pub start: Option<RVec>,
}

impl Default for SocpOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-10, barrier_growth: 20.0, max_newton: 200, start: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SocpSolution {
    pub x: RVec,
    pub objective: f64,
    /// Barrier duality gap `Σ_i (λ_i t_i + z_iᵀu_i)`.
    pub gap: f64,
    /// `‖c − Σ_i (λ_i a_i + U_iᵀz_i)‖`.
    pub stationarity: f64,
    /// Cone multipliers `(λ_i, z_i)`, each inside its (self-dual) cone.
    pub duals: Vec<(f64, RVec)>,
    pub newton_steps: usize,
}

struct Prepared<'a> {
    cones: &'a [Cone],
    utu: Vec<RMat>,
}

impl<'a> Prepared<'a> {
    fn new(cones: &'a [Cone]) -> Self {
        let utu = cones
            .iter()
            .map(|c| {
                let aat = &c.t_coef * c.t_coef.transpose();
                (aat - c.u_coef.transpose() * &c.u_coef).scale(2.0)
            })
            .collect();
        Self { cones, utu }
    }

    fn degree(&self) -> f64 {
        2.0 * self.cones.len() as f64
    }

    fn value(&self, x: &RVec) -> Option<f64> {
        let mut v = 0.0;
        for c in self.cones {
            let (t, u) = c.eval(x);
            let s = t * t - u.norm_squared();
            if t <= 0.0 || s <= 0.0 {
                return None;
            }
            v -= Float::ln(s);
        }
        Some(v)
    }

    fn derivatives(&self, x: &RVec) -> Option<(RVec, RMat)> {
        let n = x.len();
        let mut g = RVec::zeros(n);
        let mut h = RMat::zeros(n, n);
        for (c, hess_s) in self.cones.iter().zip(&self.utu) {
            let (t, u) = c.eval(x);
            let s = t * t - u.norm_squared();
            if t <= 0.0 || s <= 0.0 {
                return None;
            }
            let gs = c.t_coef.scale(2.0 * t) - c.u_coef.tr_mul(&u).scale(2.0);
            g.axpy(-1.0 / s, &gs, 1.0);
            h.ger(1.0 / (s * s), &gs, &gs, 1.0);
            h -= hess_s.unscale(s);
        }
        Some((g, h))
    }
}

fn newton_direction(h: &RMat, g: &RVec) -> Result<RVec> {
    // Jacobi equilibration, then one round of iterative refinement.
    let n = h.nrows();
    let d = RVec::from_fn(n, |i, _| {
        let v = h[(i, i)];
        if v > 0.0 {
            1.0 / Float::sqrt(v)
        } else {
            1.0
        }
    });
    let scaled = RMat::from_fn(n, n, |i, j| d[i] * h[(i, j)] * d[j]);
    let rhs = -g.component_mul(&d);
    let solve = |m: &RMat, b: &RVec| -> Option<RVec> {
        if let Some(ch) = Cholesky::new(m.clone()) {
            return Some(ch.solve(b));
        }
        let mut reg = m.clone();
        for i in 0..n {
            reg[(i, i)] += 1e-13;
        }
        if let Some(ch) = Cholesky::new(reg.clone()) {
            return Some(ch.solve(b));
        }
        LU::new(reg).solve(b)
    };
    let mut y = solve(&scaled, &rhs).ok_or_else(|| Error::Numerical("singular barrier Hessian".into()))?;
    if let Some(dy) = solve(&scaled, &(&rhs - &scaled * &y)) {
        y += dy;
    }
    Ok(y.component_mul(&d))
}

/// Minimizes `t cᵀx + barrier(x)` from a strictly feasible `x`.
///
/// Stops early when `exit(x)` holds after a Newton step.
fn center(
    prep: &Prepared,
    c: &RVec,
    t: f64,
    x: &mut RVec,
    max_newton: usize,
    exit: &dyn Fn(&RVec) -> bool,
) -> Result<usize> {
    let merit = |x: &RVec| prep.value(x).map(|b| t * c.dot(x) + b);
    let mut steps = 0;
    let mut fx = merit(x).ok_or_else(|| Error::Numerical("centering started outside the cones".into()))?;
    let grad_tol = 1e-10 * t * (1.0 + c.norm());
    let mut best_grad = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..max_newton {
        let (gb, h) = prep.derivatives(x).expect("iterate stays interior");
        let g = c.scale(t) + gb;
        let dx = newton_direction(&h, &g)?;
        let slope = g.dot(&dx);
        let decrement = -slope / 2.0;
        let gn = g.norm();
        if gn < best_grad * 0.99 {
            best_grad = gn;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 8 {
                break;
            }
        }
        if decrement <= 1e-24 || (decrement <= 1e-12 && g.norm() <= grad_tol) {
            break;
        }
        steps += 1;
        // Self-concordance: a full step is safe and contracting once the decrement is small,
        // where merit differences are lost to rounding.
        if decrement < 0.03 {
            let trial = &*x + &dx;
            if let Some(ft) = merit(&trial) {
                *x = trial;
                fx = ft;
                if exit(x) {
                    break;
                }
                continue;
            }
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..80 {
            let trial = &*x + dx.scale(step);
            if let Some(ft) = merit(&trial) {
                if ft <= fx + 0.25 * step * slope {
                    *x = trial;
                    fx = ft;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        if x.norm() > 1e12 {
            return Err(Error::Unbounded);
        }
        if exit(x) {
            break;
        }
    }
    Ok(steps)
}

fn strictly_feasible(cones: &[Cone], x: &RVec) -> bool {
    cones.iter().all(|c| {
        let (t, u) = c.eval(x);
        t > 0.0 && t * t - u.norm_squared() > 0.0
    })
}

/// Finds a strictly feasible point, or proves that none exists.
fn phase_one(problem: &Socp, seed: RVec, options: &SocpOptions) -> Result<(RVec, usize)> {
    let n = seed.len();
    let cones: Vec<Cone> = problem.cones.iter().map(Cone::extended).collect();
    let worst = problem.cones.iter().map(|c| -c.margin(&seed)).fold(0.0, f64::max);
    let mut y = seed.resize_vertically(n + 1, 0.0);
    y[n] = worst + 1.0 + worst.abs();
    let mut c = RVec::zeros(n + 1);
    c[n] = 1.0;
    let prep = Prepared::new(&cones);
    let exit = |y: &RVec| y[n] < 0.0;
    let mut t = 1.0;
    let mut steps = 0;
    loop {
        steps += match center(&prep, &c, t, &mut y, options.max_newton, &exit) {
            Err(Error::Unbounded) if y[n] < 0.0 => 0,
            Err(e) => return Err(e),
            Ok(s) => s,
        };
        if y[n] < 0.0 {
            let x = y.rows(0, n).into_owned();
            if strictly_feasible(&problem.cones, &x) {
                return Ok((x, steps));
            }
        }
        let gap = prep.degree() / t;
        if y[n] - gap > 0.0 || gap < 1e-14 * (1.0 + y[n].abs()) {
            return Err(Error::Infeasible);
        }
        t *= options.barrier_growth;
    }
}

pub fn solve_linear_socp(problem: &Socp, options: &SocpOptions) -> Result<SocpSolution> {
    let n = problem.objective.len();
    for c in &problem.cones {
        if c.t_coef.len() != n || c.u_coef.ncols() != n || c.u_coef.nrows() != c.u_const.len() {
            return Err(Error::DimensionMismatch(format!("cone does not match {n} variables")));
        }
    }
    let start = options.start.clone().unwrap_or_else(|| RVec::zeros(n));
    if start.len() != n {
        return Err(Error::DimensionMismatch(format!("start has {} entries, expected {n}", start.len())));
    }
    let (mut x, mut steps) = if strictly_feasible(&problem.cones, &start) {
        (start, 0)
    } else {
        phase_one(problem, start, options)?
    };
    let c = &problem.objective;
    let prep = Prepared::new(&problem.cones);
    let never = |_: &RVec| false;
    let mut t = 1.0 / (1.0 + c.norm());
    loop {
        steps += center(&prep, c, t, &mut x, options.max_newton, &never)?;
        let gap = prep.degree() / t;
        if gap <= options.gap_tol * (1.0 + c.dot(&x).abs()) {
            break;
        }
        if t > 1e18 {
            return Err(Error::Numerical(format!("barrier parameter diverged with gap {gap:e}")));
        }
        t *= options.barrier_growth;
    }

    let (duals, stationarity) = polish_duals(problem, &x, t);
    let gap = problem
        .cones
        .iter()
        .zip(&duals)
        .map(|(cone, (lambda, z))| {
            let (tc, u) = cone.eval(&x);
            lambda * tc + z.dot(&u)
        })
        .sum();
    Ok(SocpSolution { objective: c.dot(&x), x, gap, stationarity, duals, newton_steps: steps })
}

fn stationarity_residual(problem: &Socp, duals: &[(f64, RVec)]) -> f64 {
    let mut residual = problem.objective.clone();
    for (cone, (lambda, z)) in problem.cones.iter().zip(duals) {
        residual.axpy(-lambda, &cone.t_coef, 1.0);
        residual -= cone.u_coef.tr_mul(z);
    }
    residual.norm()
}

/// Barrier duals, replaced by a least-squares fit over the nearly active cones when
/// that fits the stationarity condition better.
fn polish_duals(problem: &Socp, x: &RVec, t: f64) -> (Vec<(f64, RVec)>, f64) {
    let barrier: Vec<(f64, RVec)> = problem
        .cones
        .iter()
        .map(|cone| {
            let (tc, u) = cone.eval(x);
            let s = tc * tc - u.norm_squared();
            (2.0 * tc / (t * s), u.scale(-2.0 / (t * s)))
        })
        .collect();
    let base = stationarity_residual(problem, &barrier);
    let top = barrier.iter().map(|d| d.0).fold(0.0, f64::max);
    let active: Vec<usize> = (0..barrier.len()).filter(|&i| barrier[i].0 > 1e-6 * top).collect();
    let n = x.len();
    let mut normals = RMat::zeros(n, active.len());
    let mut dirs = Vec::with_capacity(active.len());
    for (col, &i) in active.iter().enumerate() {
        let cone = &problem.cones[i];
        let (_, u) = cone.eval(x);
        let un = u.norm();
        let dir = if un > 0.0 { u.unscale(un) } else { RVec::zeros(u.len()) };
        let normal = &cone.t_coef - cone.u_coef.tr_mul(&dir);
        normals.set_column(col, &normal);
        dirs.push(dir);
    }
    let lambdas = match normals.clone().svd(true, true).solve(&problem.objective, 1e-14) {
        Ok(l) => l,
        Err(_) => return (barrier, base),
    };
    if lambdas.iter().any(|&l| l < 0.0) {
        return (barrier, base);
    }
    let mut polished: Vec<(f64, RVec)> = problem.cones.iter().map(|c| (0.0, RVec::zeros(c.u_const.len()))).collect();
    for ((&i, &l), dir) in active.iter().zip(lambdas.iter()).zip(&dirs) {
        polished[i] = (l, dir.scale(-l));
    }
    let refined = stationarity_residual(problem, &polished);
    if refined < base {
        (polished, refined)
    } else {
        (barrier, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ball_closed_form() {
        let c = RVec::from_vec(alloc::vec![3.0, -4.0, 1.0]);
        let p = Socp { objective: c.clone(), cones: alloc::vec![Cone::ball(3, 2.0)] };
        let sol = solve_linear_socp(&p, &SocpOptions::default()).unwrap();
        let expect = c.scale(-2.0 / c.norm());
        assert!((sol.x - expect).norm() < 1e-8);
        assert!(sol.gap <= 1e-7 * (1.0 + sol.objective.abs()));
    }

    #[test]
    fn detects_infeasible() {
        // x ≥ 1 and ‖x‖ ≤ 0.5 in one dimension.
        let lower = Cone {
            t_coef: RVec::from_vec(alloc::vec![1.0]),
            t_const: -1.0,
            u_coef: RMat::zeros(0, 1),
            u_const: RVec::zeros(0),
        };
        let p = Socp { objective: RVec::from_vec(alloc::vec![1.0]), cones: alloc::vec![lower, Cone::ball(1, 0.5)] };
        assert!(matches!(solve_linear_socp(&p, &SocpOptions::default()), Err(Error::Infeasible)));
    }

    #[test]
    fn detects_unbounded() {
        let half = Cone {
            t_coef: RVec::from_vec(alloc::vec![1.0, 0.0]),
            t_const: 0.0,
            u_coef: RMat::zeros(0, 2),
            u_const: RVec::zeros(0),
        };
        let p = Socp { objective: RVec::from_vec(alloc::vec![-1.0, 0.0]), cones: alloc::vec![half, Cone::ball(2, 1e15)] };
        let r = solve_linear_socp(&p, &SocpOptions::default());
        assert!(r.is_err() || r.unwrap().objective < -1e14);
        let half = Cone {
            t_coef: RVec::from_vec(alloc::vec![1.0]),
            t_const: 0.0,
            u_coef: RMat::zeros(0, 1),
            u_const: RVec::zeros(0),
        };
        let p = Socp { objective: RVec::from_vec(alloc::vec![-1.0]), cones: alloc::vec![half] };
        assert!(matches!(solve_linear_socp(&p, &SocpOptions::default()), Err(Error::Unbounded)));
    }

    #[test]
    fn random_problems_meet_gap_contract() {
        // Degenerate instances (several cones active at once) are included; the contract is the gap.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(2..6);
            let mut cones = alloc::vec![Cone::ball(n, 1.0)];
            for _ in 0..3 {
                let rows = rng.gen_range(1..4);
                cones.push(Cone {
                    t_coef: RVec::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
                    t_const: 1.0,
                    u_coef: RMat::from_fn(rows, n, |_, _| rng.gen_range(-1.0..1.0)),
                    u_const: RVec::from_fn(rows, |_, _| rng.gen_range(-0.3..0.3)),
                });
            }
            let p = Socp { objective: RVec::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)), cones };
            let sol = solve_linear_socp(&p, &SocpOptions::default()).unwrap();
            let scale = 1.0 + sol.objective.abs();
            assert!(sol.gap <= 1e-7 * scale);
            assert!(sol.stationarity <= 1e-4 * scale, "stationarity {}", sol.stationarity);
            for (cone, (lambda, z)) in p.cones.iter().zip(&sol.duals) {
                assert!(cone.margin(&sol.x) > 0.0);
                assert!(*lambda >= z.norm() * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn single_active_cone_kkt() {
        // maximize x0 + x1 inside the unit ball with x0 ≤ 0.2 + 0.1·‖(x1)‖ style cut: t = 0.5 − x0, u = 0.5·x1
        let cut = Cone {
            t_coef: RVec::from_vec(alloc::vec![-1.0, 0.0]),
            t_const: 0.5,
            u_coef: RMat::from_row_slice(1, 2, &[0.0, 0.5]),
            u_const: RVec::zeros(1),
        };
        let p = Socp { objective: RVec::from_vec(alloc::vec![-1.0, -1.0]), cones: alloc::vec![cut, Cone::ball(2, 1.0)] };
        let sol = solve_linear_socp(&p, &SocpOptions::default()).unwrap();
        let scale = 1.0 + sol.objective.abs();
        assert!(sol.stationarity <= 1e-6 * scale, "stationarity {}", sol.stationarity);
        assert!(sol.gap.abs() <= 1e-6 * scale);
    }

    #[test]
    fn min_norm_beats_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 3;
        // ‖x‖ ≤ τ and a half-space-like cone t = x0 + x1 − 1 ≥ ‖0.2·x2‖
        let mut ball = Cone::ball(n + 1, 0.0);
        ball.t_coef = RVec::zeros(n + 1);
        ball.t_coef[n] = 1.0;
        ball.t_const = 0.0;
        ball.u_coef = RMat::identity(n, n).resize_horizontally(n + 1, 0.0);
        ball.u_const = RVec::zeros(n);
        let cut = Cone {
            t_coef: RVec::from_vec(alloc::vec![1.0, 1.0, 0.0, 0.0]),
            t_const: -1.0,
            u_coef: RMat::from_row_slice(1, n + 1, &[0.0, 0.0, 0.2, 0.0]),
            u_const: RVec::zeros(1),
        };
        let mut objective = RVec::zeros(n + 1);
        objective[n] = 1.0;
        let p = Socp { objective, cones: alloc::vec![ball, cut.clone()] };
        let sol = solve_linear_socp(&p, &SocpOptions::default()).unwrap();
        let best = sol.x.rows(0, n).norm();
        assert!((best - 0.5f64.sqrt()).abs() < 1e-7);
        let mut found = 0;
        while found < 1000 {
            let x = RVec::from_fn(n + 1, |i, _| if i < n { rng.gen_range(-2.0..2.0) } else { 0.0 });
            if cut.margin(&x) >= 0.0 {
                found += 1;
                assert!(best <= x.rows(0, n).norm() + 1e-9);
            }
        }
    }
}
