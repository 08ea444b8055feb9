//! The bid-combination master problem.
//!
//! Given the extreme points collected so far (one aggregate bid per
//! round), choose convex-combination weights minimizing production
//! cost minus reported benefit:
//!
//! ```text
//! min_w  a·Σ_h (Σ_k w_k d_{k,h})² − Σ_k w_k b_k   s.t.  w ≥ 0, Σ w = 1
//! ```
//!
//! Solved by projected gradient on the probability simplex with a
//! fixed 1/L step, Nesterov momentum, and function-value restarts.
//! With at most a few dozen bids this is cheap and certifiable via the
//! KKT residual.

pub use crate::bid::Bid;
use crate::error::{Error, Result};
use crate::hourly::{DemandVector, PriceVector};
use crate::supply::SupplyModel;

/// Bids whose convex combinations the master may choose from, in
/// arrival order.
#[derive(Debug, Clone)]
pub struct ExtremePointSet {
    horizon: usize,
    bids: Vec<Bid>,
}

/// Two bids closer than this in L∞ are considered the same extreme
/// point; appending a duplicate is refused since it cannot enlarge the
/// feasible set.
pub const DUPLICATE_TOL: f64 = 1e-9;

impl ExtremePointSet {
    pub fn new(horizon: usize) -> Self {
        Self { horizon, bids: Vec::new() }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    pub fn bids(&self) -> &[Bid] {
        &self.bids
    }

    /// Index of an existing bid within [`DUPLICATE_TOL`] of `bid`.
    pub fn find_duplicate(&self, bid: &Bid) -> Result<Option<usize>> {
        for (k, existing) in self.bids.iter().enumerate() {
            if existing.linf_distance(bid)? <= DUPLICATE_TOL {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// Appends a new extreme point; rejects horizon mismatches and
    /// near-duplicates.
    pub fn push(&mut self, bid: Bid) -> Result<()> {
        if bid.horizon() != self.horizon {
            return Err(Error::LengthMismatch { expected: self.horizon, got: bid.horizon() });
        }
        if self.find_duplicate(&bid)?.is_some() {
            return Err(Error::Domain("duplicate extreme point".into()));
        }
        self.bids.push(bid);
        Ok(())
    }
}

/// Outcome of one master solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterSolution {
    /// Simplex weights over the extreme points, `w_k ≥ 0`, `Σ w = 1`.
    pub weights: Vec<f64>,
    /// Constructed demand `D = Σ_k w_k d_k`.
    pub constructed_demand: DemandVector,
    /// Marginal prices at the constructed demand, `p = 2aD`.
    pub prices: PriceVector,
    /// Objective value `C(D) − B'(D)`, the best known net cost.
    pub objective: f64,
    /// Reduced-form benefit `B'(D) = Σ_k w_k b_k`.
    pub b_prime: f64,
}

impl MasterSolution {
    /// Production cost of the constructed demand, recovered from the
    /// stored objective and benefit.
    pub fn generation_cost(&self) -> f64 {
        self.objective + self.b_prime
    }
}

const MAX_INNER_ITERS: usize = 10_000;

/// Exact Euclidean projection onto `{w : w ≥ 0, Σ w = 1}` via the
/// sort-based algorithm.
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (i as f64 + 1.0);
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

struct MasterProblem<'a> {
    bids: &'a [Bid],
    horizon: usize,
    a: f64,
}

impl MasterProblem<'_> {
    fn demand(&self, w: &[f64]) -> DemandVector {
        let mut d = DemandVector::zeros(self.horizon);
        for (wk, bid) in w.iter().zip(self.bids) {
            d.add_scaled_assign(*wk, &bid.demand).expect("horizon checked on push");
        }
        d
    }

    fn objective(&self, w: &[f64]) -> f64 {
        let d = self.demand(w);
        let cost: f64 = d.iter().map(|x| self.a * x * x).sum();
        let benefit: f64 = w.iter().zip(self.bids).map(|(wk, b)| wk * b.benefit).sum();
        cost - benefit
    }

    /// ∇f(w)_k = 2a·(D·d_k) − b_k = p·d_k − b_k with p = 2aD.
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let d = self.demand(w);
        self.bids
            .iter()
            .map(|bid| {
                let dot = d.dot(&bid.demand).expect("horizon checked on push");
                2.0 * self.a * dot - bid.benefit
            })
            .collect()
    }
}

/// Solves the master problem from a uniform starting point.
pub fn solve_master(set: &ExtremePointSet, supply: &SupplyModel) -> Result<MasterSolution> {
    let k = set.len();
    solve_master_warm(set, supply, &vec![1.0 / k.max(1) as f64; k])
}

/// Solves the master problem starting from `warm` (a point on the
/// simplex, typically the previous round's weights padded with a zero).
/// The inner method never increases the objective, so the returned
/// objective is at most `f(warm)`.
pub fn solve_master_warm(
    set: &ExtremePointSet,
    supply: &SupplyModel,
    warm: &[f64],
) -> Result<MasterSolution> {
    let k = set.len();
    if k == 0 {
        return Err(Error::Domain("master problem needs at least one bid".into()));
    }
    if warm.len() != k {
        return Err(Error::LengthMismatch { expected: k, got: warm.len() });
    }
    let problem = MasterProblem {
        bids: set.bids(),
        horizon: set.horizon(),
        a: supply.quadratic_coefficient(),
    };

    if k == 1 {
        return finish(&problem, supply, vec![1.0]);
    }

    // Frobenius norm bounds the top singular value, so 2a·‖Dmat‖_F² is
    // a safe Lipschitz constant for the gradient.
    let frob2: f64 = set.bids().iter().map(|b| b.demand.dot(&b.demand).unwrap()).sum();
    if frob2 == 0.0 {
        // All-zero demand: the objective is linear in w, so put all
        // weight on the largest benefit (lowest index on ties).
        let best = (0..k)
            .max_by(|&i, &j| {
                problem.bids[i]
                    .benefit
                    .total_cmp(&problem.bids[j].benefit)
                    .then(j.cmp(&i))
            })
            .unwrap();
        let mut w = vec![0.0; k];
        w[best] = 1.0;
        return finish(&problem, supply, w);
    }
    let lip = 2.0 * problem.a * frob2;

    let mut x = project_onto_simplex(warm);
    let mut fx = problem.objective(&x);
    let mut x_prev = x.clone();
    let mut y = x.clone();
    let mut t = 1.0f64;

    let step = |point: &[f64], grad: &[f64]| -> Vec<f64> {
        let moved: Vec<f64> =
            point.iter().zip(grad).map(|(p, g)| p - g / lip).collect();
        project_onto_simplex(&moved)
    };
    let residual_at = |point: &[f64], probe: &[f64]| -> f64 {
        lip * point
            .iter()
            .zip(probe)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };

    let mut last_residual = f64::INFINITY;
    for it in 0..MAX_INNER_ITERS {
        let gx = problem.gradient(&x);
        let x_plus = step(&x, &gx);
        last_residual = residual_at(&x, &x_plus);
        if last_residual <= 1e-8 * (1.0 + fx.abs()) {
            return finish(&problem, supply, x);
        }

        // The momentum iteration identifies the optimal support fast
        // but crawls on ill-conditioned bid sets; once the support
        // looks settled, an exact equality-constrained solve on it
        // finishes the job. Several support cutoffs are tried because
        // near-converged iterates carry noise-level weights.
        if it % 100 == 99 {
            let mut adopted = false;
            for cutoff in [1e-6, 1e-8, 1e-10] {
                if let Some(w) = polish_support(&problem, &x, cutoff) {
                    let fw = problem.objective(&w);
                    if fw <= fx + 1e-12 * (1.0 + fx.abs()) {
                        let probe = step(&w, &problem.gradient(&w));
                        if residual_at(&w, &probe) <= 1e-8 * (1.0 + fw.abs()) {
                            return finish(&problem, supply, w);
                        }
                        if fw < fx {
                            x = w.clone();
                            fx = fw;
                            x_prev = w.clone();
                            y = w;
                            t = 1.0;
                            adopted = true;
                            break;
                        }
                    }
                }
            }
            if adopted {
                continue;
            }
        }

        let gy = problem.gradient(&y);
        let mut z = step(&y, &gy);
        let mut fz = problem.objective(&z);
        if fz > fx {
            // Momentum overshot: restart from the plain descent step,
            // which cannot increase the objective.
            z = x_plus;
            fz = problem.objective(&z);
            t = 1.0;
            if fz > fx {
                z = x.clone();
                fz = fx;
            }
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = z
            .iter()
            .zip(&x_prev)
            .map(|(zi, xi)| zi + beta * (zi - xi))
            .collect();
        t = t_next;
        x_prev = x;
        x = z;
        fx = fz;
    }

    Err(Error::SolverFailure(format!(
        "master projected gradient stalled after {MAX_INNER_ITERS} iterations, residual {last_residual:e}"
    )))
}

/// Solves the equality-constrained optimum on the current support
/// (`w_k = 0` held fixed elsewhere): the KKT system
/// `H w − λ·1 = b, Σ w = 1` over coordinates above `cutoff`. Returns
/// None when the support is wrong (negative weights) or the system is
/// inconsistent. Rank-deficient systems are fine: near-parallel bids
/// make the optimal face flat, and any point on it will do.
fn polish_support(problem: &MasterProblem<'_>, x: &[f64], cutoff: f64) -> Option<Vec<f64>> {
    let support: Vec<usize> = (0..x.len()).filter(|&k| x[k] > cutoff).collect();
    let s = support.len();
    if s == 0 {
        return None;
    }
    let mut m = vec![vec![0.0; s + 1]; s + 1];
    let mut rhs = vec![0.0; s + 1];
    for (i, &ki) in support.iter().enumerate() {
        for (j, &kj) in support.iter().enumerate() {
            let dot = problem.bids[ki]
                .demand
                .dot(&problem.bids[kj].demand)
                .expect("horizon checked on push");
            m[i][j] = 2.0 * problem.a * dot;
        }
        m[i][s] = -1.0;
        rhs[i] = problem.bids[ki].benefit;
    }
    for j in 0..s {
        m[s][j] = 1.0;
    }
    rhs[s] = 1.0;

    let sol = gauss_solve_rank(m, rhs)?;
    let mut w = vec![0.0; x.len()];
    for (i, &ki) in support.iter().enumerate() {
        let v = sol[i];
        if !v.is_finite() || v < -1e-9 {
            return None;
        }
        w[ki] = v.max(0.0);
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-7 {
        return None;
    }
    for v in w.iter_mut() {
        *v /= total;
    }
    Some(w)
}

/// Gaussian elimination with complete pivoting and rank detection.
/// Free variables of a rank-deficient (but consistent) system are set
/// to zero; None when the system is inconsistent.
fn gauss_solve_rank(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut col_of: Vec<usize> = (0..n).collect();
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    let mut rank = n;
    for step in 0..n {
        let mut best = (step, step, 0.0f64);
        for i in step..n {
            for j in step..n {
                let v = m[i][j].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 < 1e-13 * scale {
            rank = step;
            break;
        }
        let (pi, pj, _) = best;
        m.swap(step, pi);
        rhs.swap(step, pi);
        if pj != step {
            for row in m.iter_mut() {
                row.swap(step, pj);
            }
            col_of.swap(step, pj);
        }
        for row in (step + 1)..n {
            let f = m[row][step] / m[step][step];
            if f != 0.0 {
                for k in step..n {
                    m[row][k] -= f * m[step][k];
                }
                rhs[row] -= f * rhs[step];
            }
        }
    }
    // Rows beyond the rank must have vanished for the system to be
    // consistent.
    for row in rank..n {
        if rhs[row].abs() > 1e-8 * (1.0 + scale) {
            return None;
        }
    }
    let mut y = vec![0.0; n];
    for row in (0..rank).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[row][k] * y[k];
        }
        y[row] = acc / m[row][row];
    }
    let mut x = vec![0.0; n];
    for (pos, &orig) in col_of.iter().enumerate() {
        x[orig] = y[pos];
    }
    Some(x)
}

fn finish(
    problem: &MasterProblem<'_>,
    supply: &SupplyModel,
    weights: Vec<f64>,
) -> Result<MasterSolution> {
    let constructed_demand = problem.demand(&weights);
    let prices = supply.marginal_prices(&constructed_demand)?;
    let b_prime: f64 = weights
        .iter()
        .zip(problem.bids)
        .map(|(wk, b)| wk * b.benefit)
        .sum();
    let objective = supply.generation_cost(&constructed_demand)? - b_prime;
    Ok(MasterSolution { weights, constructed_demand, prices, objective, b_prime })
}

/// KKT residual of a solution: how far the gradient is from being
/// constant on the support and no smaller off it.
pub fn kkt_residual(
    set: &ExtremePointSet,
    supply: &SupplyModel,
    solution: &MasterSolution,
) -> Result<f64> {
    if solution.weights.len() != set.len() {
        return Err(Error::LengthMismatch { expected: set.len(), got: solution.weights.len() });
    }
    let problem = MasterProblem {
        bids: set.bids(),
        horizon: set.horizon(),
        a: supply.quadratic_coefficient(),
    };
    let g = problem.gradient(&solution.weights);
    let lambda: f64 = solution.weights.iter().zip(&g).map(|(w, gk)| w * gk).sum();
    let mut res = 0.0f64;
    for (wk, gk) in solution.weights.iter().zip(&g) {
        if *wk > 1e-10 {
            res = res.max((gk - lambda).abs());
        } else {
            res = res.max((lambda - gk).max(0.0));
        }
    }
    Ok(res)
}

/// Per-round optimality gap: how much better the freshly elicited bid
/// is at the prior prices than the prior constructed point,
///
/// ```text
/// gap = (b_new − p·d_new) − (B' − p·D)
/// ```
///
/// Nonnegative whenever the bid is a true best response at `p`; zero
/// at convergence.
pub fn optimality_gap(new_bid: &Bid, prior: &MasterSolution) -> Result<f64> {
    let p_dot_new = prior.prices.dot(&new_bid.demand)?;
    let p_dot_prior = prior.prices.dot(&prior.constructed_demand)?;
    Ok((new_bid.benefit - p_dot_new) - (prior.b_prime - p_dot_prior))
}

/// Lower bound on the net cost achievable by any consumption plan,
/// derived from the prior master solution and the bid elicited at its
/// prices: `S_best = C(D) − p·D − b_new + p·d_new`.
pub fn lower_bound(new_bid: &Bid, prior: &MasterSolution) -> Result<f64> {
    let p_dot_new = prior.prices.dot(&new_bid.demand)?;
    let p_dot_prior = prior.prices.dot(&prior.constructed_demand)?;
    Ok(prior.generation_cost() - p_dot_prior - new_bid.benefit + p_dot_new)
}
