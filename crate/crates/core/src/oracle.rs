//! Independent ground truth at desk scale: exact 1-D search and seeded
//! multistart local search. Values are upper bounds on the true minimum,
//! exact only where flagged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::asqp::{to_ecqp, AsqpInstance};
use crate::linalg::{cholesky, cholesky_solve, dot, norm, solve_linear, sym_eig, Matrix, SymMatrix};
use crate::model::{EcqpInstance, Ellipsoid};
use crate::rounding::max_step;

pub const GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Grid1d,
    Multistart,
    VertexEnum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub best_value: f64,
    pub best_point: Vec<f64>,
    pub method: OracleMethod,
    /// Objective evaluations spent.
    pub samples: usize,
    pub is_exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub starts: usize,
    pub iters: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            starts: 200,
            iters: 500,
        }
    }
}

/// Feasible interval of a 1-D instance; `None` bounds are unbounded.
fn feasible_interval(ellipsoids: &[Ellipsoid]) -> (Option<f64>, Option<f64>) {
    let hi = max_step(&[1.0], ellipsoids);
    let lo = max_step(&[-1.0], ellipsoids);
    (lo.is_finite().then_some(-lo), hi.is_finite().then_some(hi))
}

/// Minimizes `a x² + 2 b x` over `[lo, hi]` on a dense grid plus the
/// endpoints and the stationary point, which makes the result exact.
fn grid_minimize(a: f64, b: f64, lo: f64, hi: f64) -> (f64, f64, usize) {
    let f = |x: f64| a * x * x + 2.0 * b * x;
    let mut best = (lo, f(lo));
    let mut consider = |x: f64| {
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    };
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    for i in 1..GRID_POINTS - 1 {
        consider(lo + step * i as f64);
    }
    consider(hi);
    if a > 0.0 {
        let s = -b / a;
        if (lo..=hi).contains(&s) {
            consider(s);
        }
    }
    (best.0, best.1, GRID_POINTS + 1)
}

fn grid_1d(inst: &EcqpInstance) -> OracleEstimate {
    let (lo, hi) = feasible_interval(&inst.ellipsoids);
    // an unbounded side is truncated, which forfeits exactness
    let cap = 1e6;
    let exact = lo.is_some() && hi.is_some();
    let (x, v, samples) = grid_minimize(
        inst.a.get(0, 0),
        inst.b[0],
        lo.unwrap_or(-cap),
        hi.unwrap_or(cap),
    );
    OracleEstimate {
        best_value: v,
        best_point: vec![x],
        method: OracleMethod::Grid1d,
        samples,
        is_exact: exact,
    }
}

/// Pulls `y` back toward the (interior) origin until it is feasible.
fn retract(y: Vec<f64>, ellipsoids: &[Ellipsoid]) -> Vec<f64> {
    let s = max_step(&y, ellipsoids);
    if s >= 1.0 {
        y
    } else {
        y.into_iter().map(|v| v * s).collect()
    }
}

/// Pulls a start strictly inside so the barrier is finite there.
const INTERIOR_SHRINK: f64 = 1e-3;
/// Barrier weights run from `MU_START·(1 + |f(x₀)|)` down by `MU_FACTOR`
/// until below `MU_END`. A small start keeps each run near its own start
/// instead of collapsing every start onto one central path.
const MU_START: f64 = 1e-3;
const MU_FACTOR: f64 = 0.1;
const MU_END: f64 = 1e-13;
/// Stages at or below this (scaled) weight end with a KKT polish.
const POLISH_MU: f64 = 1e-7;
/// A step may shrink each slack `1 − ‖Fᵏx+gᵏ‖²` by at most this factor.
/// Without it an early overshoot pins the iterate against a wall, where the
/// barrier curvature explodes and progress along the wall stalls.
const SLACK_KEEP: f64 = 0.01;
/// Gauss–Newton iterations of a second-order correction.
const SOC_ITERS: usize = 4;
/// Multiplier estimates stay within this factor of `μ/s`.
const DUAL_SPREAD: f64 = 1e10;
/// Iterates beyond this norm count as escaping along an unbounded direction.
const ESCAPE_NORM: f64 = 1e8;

/// Slack `1 − ‖Fᵏx+gᵏ‖²` and the gradient of `‖Fᵏx+gᵏ‖²` at an iterate.
type Constraint = (f64, Vec<f64>);

/// Local minimizer: primal-dual log-barrier path following with damped,
/// regularized Newton steps and negative-curvature escapes from saddles.
/// Every iterate stays strictly feasible; the barrier keeps the method off
/// corners where several ellipsoids meet, which is where plain
/// feasible-direction descent stalls. Separate multiplier estimates keep the
/// constraint curvature at its true size near a wall, where the primal
/// weight `μ/s` would blow it up and freeze motion along the wall.
struct Descent<'a> {
    inst: &'a EcqpInstance,
    /// `FᵏᵀFᵏ` per constraint.
    grams: Vec<SymMatrix>,
    /// Multiplier estimate per constraint.
    z: Vec<f64>,
    evals: usize,
}

impl<'a> Descent<'a> {
    fn new(inst: &'a EcqpInstance) -> Self {
        Self {
            inst,
            grams: inst.ellipsoids.iter().map(|e| e.f.gram()).collect(),
            z: Vec::new(),
            evals: 0,
        }
    }

    /// `f(x) − μ Σ ln(1 − ‖Fᵏx+gᵏ‖²)`, `+∞` outside the interior.
    fn barrier(&mut self, x: &[f64], mu: f64) -> f64 {
        self.evals += 1;
        let mut v = self.inst.objective(x);
        for e in &self.inst.ellipsoids {
            let s = 1.0 - e.value(x);
            if !(s > 0.0) {
                return f64::INFINITY;
            }
            v -= mu * s.ln();
        }
        v
    }

    /// Barrier gradient, primal-dual Hessian, and per constraint the slack
    /// `sᵏ` and the gradient of `‖Fᵏx+gᵏ‖²`.
    fn derivatives(&self, x: &[f64], mu: f64) -> (Vec<f64>, SymMatrix, Vec<Constraint>) {
        let n = x.len();
        let mut g = self.inst.a.mul_vec(x);
        g.iter_mut().zip(&self.inst.b).for_each(|(gi, bi)| *gi = 2.0 * (*gi + bi));
        let mut h = self.inst.a.scaled(2.0);
        let mut cons = Vec::with_capacity(self.grams.len());
        for ((e, ftf), &z) in self.inst.ellipsoids.iter().zip(&self.grams).zip(&self.z) {
            let r = e.affine(x);
            let s = 1.0 - dot(&r, &r);
            let dc: Vec<f64> = e.f.tr_mul_vec(&r).iter().map(|v| 2.0 * v).collect();
            g.iter_mut().zip(&dc).for_each(|(gi, d)| *gi += mu * d / s);
            for i in 0..n {
                for j in i..n {
                    let v = h.get(i, j) + 2.0 * z * ftf.get(i, j) + z * dc[i] * dc[j] / s;
                    h.set(i, j, v);
                }
            }
            cons.push((s, dc));
        }
        (g, h, cons)
    }

    /// Resets every multiplier estimate to its central value `μ/s`.
    fn center_duals(&mut self, x: &[f64], mu: f64) {
        self.z = self.inst.ellipsoids.iter().map(|e| mu / (1.0 - e.value(x))).collect();
    }

    /// Newton direction on `H + δI`, with `δ` raised until the Cholesky
    /// factorization succeeds; the flag reports whether a shift was needed.
    fn direction(h: &SymMatrix, g: &[f64]) -> Option<(Vec<f64>, bool)> {
        let scale = 1.0 + h.frobenius();
        let mut delta = 0.0;
        for _ in 0..40 {
            let mut shifted = h.clone();
            for i in 0..h.dim() {
                shifted.set(i, i, h.get(i, i) + delta);
            }
            if let Ok(l) = cholesky(&shifted) {
                let d = cholesky_solve(&l, g).into_iter().map(|v| -v).collect();
                return Some((d, delta > 0.0));
            }
            delta = if delta == 0.0 { 1e-10 * scale } else { delta * 10.0 };
        }
        None
    }

    /// Unit eigenvector of the most negative eigenvalue, oriented downhill.
    fn negative_curvature(h: &SymMatrix, g: &[f64]) -> Option<(Vec<f64>, f64)> {
        let eig = sym_eig(h).ok()?;
        let k = (0..eig.values.len()).min_by(|&a, &b| eig.values[a].total_cmp(&eig.values[b]))?;
        let lambda = eig.values[k];
        if lambda >= 0.0 {
            return None;
        }
        let mut v = eig.vector(k);
        if dot(&v, g) > 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        Some((v, lambda))
    }

    /// Moves a trial point that lost too much slack back onto the slack
    /// levels of the current iterate, by minimum-norm Gauss–Newton steps on
    /// the offending constraints. Straight steps along a strongly curved wall
    /// leave the set almost at once; corrected ones slide along it.
    fn second_order_correction(&self, y: &mut [f64], cons: &[Constraint]) {
        let ells = &self.inst.ellipsoids;
        let tight: Vec<usize> = (0..ells.len())
            .filter(|&k| 1.0 - ells[k].value(y) < SLACK_KEEP * cons[k].0)
            .collect();
        for _ in 0..SOC_ITERS {
            let rows: Vec<Vec<f64>> = tight
                .iter()
                .map(|&k| ells[k].f.tr_mul_vec(&ells[k].affine(y)).iter().map(|v| 2.0 * v).collect())
                .collect();
            // slack shortfall per constraint; the step solves J·Δ = shortfall
            let short: Vec<f64> = tight.iter().map(|&k| (1.0 - ells[k].value(y)) - cons[k].0).collect();
            if short.iter().all(|v| *v >= 0.0) {
                return;
            }
            let jjt = Matrix::from_fn(tight.len(), tight.len(), |i, j| dot(&rows[i], &rows[j]));
            let Ok(w) = solve_linear(&jjt, &short) else {
                return;
            };
            for (row, wi) in rows.iter().zip(&w) {
                y.iter_mut().zip(row).for_each(|(yi, r)| *yi += wi * r);
            }
        }
    }

    /// One damped step at weight `mu`; `false` once no progress is possible.
    fn step(&mut self, x: &mut Vec<f64>, mu: f64) -> bool {
        let (g, h, cons) = self.derivatives(x, mu);
        let Some((mut d, shifted)) = Self::direction(&h, &g) else {
            return false;
        };
        let phi = self.barrier(x, mu);
        let tiny = 1e-14 * (1.0 + phi.abs());
        let mut slope = dot(&g, &d);
        // predicted decrease for Armijo: first order, or second order along
        // a direction of negative curvature
        let mut curvature = 0.0;
        if -slope <= tiny {
            if !shifted {
                return false;
            }
            let Some((v, lambda)) = Self::negative_curvature(&h, &g) else {
                return false;
            };
            let reach = (1.0 + norm(x)).min(ESCAPE_NORM);
            d = v.iter().map(|c| c * reach).collect();
            slope = dot(&g, &d);
            curvature = 0.5 * lambda * reach * reach;
        }
        let keeps_slack = |y: &[f64]| {
            self.inst
                .ellipsoids
                .iter()
                .zip(&cons)
                .all(|(e, (s, _))| 1.0 - e.value(y) >= SLACK_KEEP * s)
        };
        let mut t = 1.0;
        for _ in 0..60 {
            let mut y: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            if !keeps_slack(&y) {
                self.second_order_correction(&mut y, &cons);
            }
            let predicted = t * slope + t * t * curvature;
            if predicted < 0.0 && keeps_slack(&y) && self.barrier(&y, mu) <= phi + 1e-4 * predicted {
                if curvature < 0.0 {
                    self.center_duals(&y, mu);
                } else {
                    // linearized complementarity `zᵏ sᵏ = μ`, then safeguarded
                    for (k, (e, (s, dc))) in self.inst.ellipsoids.iter().zip(&cons).enumerate() {
                        let z = self.z[k];
                        let dz = mu / s - z + z / s * dot(dc, &d);
                        let central = mu / (1.0 - e.value(&y));
                        self.z[k] = (z + t * dz).clamp(central / DUAL_SPREAD, central * DUAL_SPREAD);
                    }
                }
                *x = y;
                return norm(x) <= ESCAPE_NORM;
            }
            t *= 0.5;
        }
        false
    }

    /// Best feasible value met along the barrier path from `x0`, including a
    /// KKT polish at the end of every completed barrier stage. Iterates are a
    /// prefix of the same trajectory for every `iters`, so a larger budget
    /// can only improve the result.
    fn run(&mut self, x0: Vec<f64>, iters: usize) -> (Vec<f64>, f64) {
        let inst = self.inst;
        let shrink = 1.0 - INTERIOR_SHRINK;
        let mut x: Vec<f64> = retract(x0, &inst.ellipsoids).into_iter().map(|v| v * shrink).collect();
        let mut best = (x.clone(), inst.objective(&x));
        let consider = |p: &[f64], v: f64, best: &mut (Vec<f64>, f64)| {
            if v < best.1 {
                *best = (p.to_vec(), v);
            }
        };
        let mu_scale = 1.0 + best.1.abs();
        let mut mu = MU_START * mu_scale;
        self.center_duals(&x, mu);
        let mut steps = 0;
        while mu >= MU_END {
            let mut stage_done = false;
            while steps < iters {
                steps += 1;
                let moved = self.step(&mut x, mu);
                self.evals += 1;
                consider(&x, inst.objective(&x), &mut best);
                if !moved {
                    stage_done = true;
                    break;
                }
            }
            if !stage_done {
                break;
            }
            if mu <= POLISH_MU * mu_scale {
                if let Some((p, v)) = kkt_polish(inst, &self.grams, &x, inst.objective(&x)) {
                    consider(&p, v, &mut best);
                }
            }
            if norm(&x) > ESCAPE_NORM {
                break;
            }
            mu *= MU_FACTOR;
        }
        best
    }
}

/// Constraints whose squared norm is within this of 1 seed the active set.
const ACTIVE_TOL: f64 = 1e-4;

/// Newton's method on the KKT system of `min f` subject to
/// `‖Fᵏx + gᵏ‖² = 1` for the near-active constraints at `x0`. Descent alone
/// crawls along curved boundaries; this finishes the job to machine
/// precision. Any multiplier that turns negative drops its constraint and
/// the solve restarts. Only feasible improvements are returned.
fn kkt_polish(inst: &EcqpInstance, grams: &[SymMatrix], x0: &[f64], f0: f64) -> Option<(Vec<f64>, f64)> {
    let n = inst.n();
    let ells = &inst.ellipsoids;
    let mut active: Vec<usize> = (0..ells.len())
        .filter(|&k| ells[k].value(x0) >= 1.0 - ACTIVE_TOL)
        .collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    loop {
        let p = active.len();
        let mut x = x0.to_vec();
        let mut lambda: Option<Vec<f64>> = None;
        let mut ok = true;
        for _ in 0..30 {
            let mut grad = inst.a.mul_vec(&x);
            grad.iter_mut().zip(&inst.b).for_each(|(g, b)| *g = 2.0 * (*g + b));
            let rows: Vec<Vec<f64>> = active
                .iter()
                .map(|&k| ells[k].f.tr_mul_vec(&ells[k].affine(&x)).iter().map(|v| 2.0 * v).collect())
                .collect();
            let lam = match lambda.take() {
                Some(l) => l,
                None => {
                    // least-squares multipliers: (J Jᵀ) λ = −J ∇f
                    let jjt = Matrix::from_fn(p, p, |i, j| dot(&rows[i], &rows[j]));
                    let rhs: Vec<f64> = rows.iter().map(|r| -dot(r, &grad)).collect();
                    match solve_linear(&jjt, &rhs) {
                        Ok(l) => l,
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                }
            };
            let mut kkt = Matrix::zeros(n + p, n + p);
            let mut rhs = vec![0.0; n + p];
            for i in 0..n {
                for j in 0..n {
                    let mut h = 2.0 * inst.a.get(i, j);
                    for (q, &k) in active.iter().enumerate() {
                        h += 2.0 * lam[q] * grams[k].get(i, j);
                    }
                    kkt.set(i, j, h);
                }
                rhs[i] = -(grad[i] + rows.iter().zip(&lam).map(|(r, l)| l * r[i]).sum::<f64>());
            }
            for (q, &k) in active.iter().enumerate() {
                for i in 0..n {
                    kkt.set(n + q, i, rows[q][i]);
                    kkt.set(i, n + q, rows[q][i]);
                }
                rhs[n + q] = 1.0 - ells[k].value(&x);
            }
            let Ok(step) = solve_linear(&kkt, &rhs) else {
                ok = false;
                break;
            };
            x.iter_mut().zip(&step).for_each(|(xi, d)| *xi += d);
            let lam: Vec<f64> = lam.iter().zip(&step[n..]).map(|(l, d)| l + d).collect();
            let done = norm(&step[..n]) <= 1e-15 * (1.0 + norm(&x));
            lambda = Some(lam);
            if !x.iter().all(|v| v.is_finite()) {
                ok = false;
                break;
            }
            if done {
                break;
            }
        }
        if ok {
            let x = retract(x, ells);
            let v = inst.objective(&x);
            let feasible = ells.iter().all(|e| e.value(&x) <= 1.0);
            if feasible && v < best.as_ref().map_or(f0, |b| b.1) {
                best = Some((x, v));
            }
        }
        // drop the most negative multiplier and retry
        let drop = lambda
            .as_ref()
            .and_then(|l| (0..p).filter(|&q| l[q] < 0.0).min_by(|&a, &b| l[a].total_cmp(&l[b])));
        match drop {
            Some(q) if ok => {
                active.remove(q);
            }
            _ => return best,
        }
    }
}

/// A point drawn from the feasible set: a random direction scaled to a
/// random fraction of its boundary distance.
fn random_feasible(rng: &mut ChaCha8Rng, inst: &EcqpInstance) -> Vec<f64> {
    let n = inst.n();
    let d: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let reach = max_step(&d, &inst.ellipsoids).min(1e6);
    let frac: f64 = if rng.gen_bool(0.5) { 1.0 } else { rng.gen::<f64>() };
    d.into_iter().map(|v| v * reach * frac).collect()
}

fn multistart(inst: &EcqpInstance, seed: u64, budget: Budget, extra: &[Vec<f64>]) -> OracleEstimate {
    let n = inst.n();
    let mut descent = Descent::new(inst);
    let mut best = (vec![0.0; n], f64::INFINITY);
    let consider = |(x, v): (Vec<f64>, f64), best: &mut (Vec<f64>, f64)| {
        if v < best.1 {
            *best = (x, v);
        }
    };
    // deterministic starts first, then one independent stream per random start
    for s in std::iter::once(vec![0.0; n]).chain(extra.iter().cloned()) {
        let r = descent.run(s, budget.iters);
        consider(r, &mut best);
    }
    for k in 0..budget.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64 + 1);
        let s = random_feasible(&mut rng, inst);
        let r = descent.run(s, budget.iters);
        consider(r, &mut best);
    }
    OracleEstimate {
        best_value: best.1,
        best_point: best.0,
        method: OracleMethod::Multistart,
        samples: descent.evals,
        is_exact: false,
    }
}

/// Best feasible point found for `inst` (offset excluded). Exact for `n = 1`.
pub fn best_feasible_search(inst: &EcqpInstance, seed: u64, budget: Budget) -> OracleEstimate {
    best_feasible_search_from(inst, seed, budget, &[])
}

/// As [`best_feasible_search`] with additional deterministic starting points
/// (retracted into the feasible set first).
pub fn best_feasible_search_from(
    inst: &EcqpInstance,
    seed: u64,
    budget: Budget,
    starts: &[Vec<f64>],
) -> OracleEstimate {
    if inst.n() == 1 {
        let mut est = grid_1d(inst);
        // extra starts cannot beat an exact search but keep the contract
        for s in starts {
            let x = retract(s.clone(), &inst.ellipsoids);
            let v = inst.objective(&x);
            if v < est.best_value {
                est.best_value = v;
                est.best_point = x;
            }
        }
        return est;
    }
    multistart(inst, seed, budget, starts)
}

/// Estimates of `min` and `max` of the assignment objective over the
/// doubly stochastic matrices; points are flattened row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeExtrema {
    pub lower: OracleEstimate,
    pub upper: OracleEstimate,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn permutation_matrix(p: &[usize]) -> Vec<f64> {
    let n = p.len();
    let mut x = vec![0.0; n * n];
    for (i, &j) in p.iter().enumerate() {
        x[i * n + j] = 1.0;
    }
    x
}

/// Vertices used as starts are capped at this many permutations.
const MAX_VERTEX_STARTS: usize = 720;

pub fn polytope_extrema(a: &AsqpInstance, seed: u64, budget: Budget) -> PolytopeExtrema {
    let n = a.n;
    if n == 2 {
        // the polytope is the segment x(t) = t·P₁ + (1 − t)·P₂
        let p1 = permutation_matrix(&[0, 1]);
        let p2 = permutation_matrix(&[1, 0]);
        let d: Vec<f64> = p1.iter().zip(&p2).map(|(x, y)| x - y).collect();
        // f(P₂ + t d) = t²·dᵀAd + 2t·(Ad·P₂ + bᵀd) + f(P₂)
        let qa = a.a.quad_form(&d);
        let qb = a.a.bilinear(&d, &p2) + dot(&a.b, &d);
        let base = a.objective(&p2);
        let at = |t: f64| -> Vec<f64> { p2.iter().zip(&d).map(|(x, y)| x + t * y).collect() };
        let (tl, vl, samples) = grid_minimize(qa, qb, 0.0, 1.0);
        let (tu, vu, _) = grid_minimize(-qa, -qb, 0.0, 1.0);
        let est = |t: f64, v: f64| OracleEstimate {
            best_value: v,
            best_point: at(t),
            method: OracleMethod::Grid1d,
            samples,
            is_exact: true,
        };
        return PolytopeExtrema {
            lower: est(tl, base + vl),
            upper: est(tu, base - vu),
        };
    }

    let red = to_ecqp(a);
    let verts: Vec<Vec<f64>> = permutations(n)
        .into_iter()
        .take(MAX_VERTEX_STARTS)
        .map(|p| red.basis.coordinates(&permutation_matrix(&p)))
        .collect();
    let mut neg = red.instance.clone();
    neg.a = neg.a.scaled(-1.0);
    neg.b.iter_mut().for_each(|v| *v = -*v);
    let lo = multistart(&red.instance, seed, budget, &verts);
    let hi = multistart(&neg, seed, budget, &verts);
    let lift = |e: OracleEstimate, sign: f64| OracleEstimate {
        best_value: red.offset + sign * e.best_value,
        best_point: red.basis.lift(&e.best_point),
        ..e
    };
    PolytopeExtrema {
        lower: lift(lo, 1.0),
        upper: lift(hi, -1.0),
    }
}
