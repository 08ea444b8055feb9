//! A small dense linear-program solver.
//!
//! Two-phase primal simplex on a dense tableau with Bland's
//! anti-cycling rule. Problem sizes in this crate stay around a hundred
//! variables, where dense storage is simple and fast enough; there is
//! no sparse storage, integer support, or warm starting.
//!
//! Degenerate optima are resolved deterministically by Bland's rule,
//! but callers must only rely on the objective value and feasibility,
//! never on which optimal vertex is returned.

use crate::error::{Error, Result};

/// Pivot elements smaller than this are treated as zero.
pub const PIVOT_TOL: f64 = 1e-9;
/// Per-row feasibility tolerance for accepting a solution.
pub const FEASIBILITY_TOL: f64 = 1e-7;

const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
struct LpRow {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `min c·x  s.t.  A x {≤,=,≥} b,  lo ≤ x ≤ hi`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<LpRow>,
    bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve. `x` and `objective` are only meaningful when
/// `status == Optimal`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        Self { x: Vec::new(), objective: f64::NAN, status }
    }
}

impl LinearProgram {
    /// New program with the given minimization objective; variables
    /// default to `x ≥ 0` with no upper bound.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { objective, rows: Vec::new(), bounds: vec![(0.0, f64::INFINITY); n] }
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(LpRow { coeffs, relation, rhs });
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        assert!(var < self.bounds.len(), "variable index {var} out of range");
        self.bounds[var] = (lo, hi);
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if let Some(c) = self.objective.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite objective coefficient {c}")));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: row.coeffs.len() });
            }
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.rhs.is_finite() {
                return Err(Error::Domain(format!("non-finite coefficient in row {i}")));
            }
        }
        for (i, (lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || *lo == f64::INFINITY || *hi == f64::NEG_INFINITY {
                return Err(Error::Domain(format!("invalid bounds ({lo}, {hi}) on variable {i}")));
            }
        }
        Ok(())
    }
}

/// How an original variable maps into the nonnegative standard-form
/// columns.
#[derive(Debug, Clone, Copy)]
enum ColMap {
    /// `x = lo + y[col]`
    Shifted { col: usize, lo: f64 },
    /// `x = y[pos] - y[neg]` (free variable)
    Split { pos: usize, neg: usize },
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // Empty box ⇒ infeasible without touching the tableau.
    if lp.bounds.iter().any(|(lo, hi)| lo > hi) {
        return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
    }

    // Map variables onto nonnegative columns; finite upper bounds
    // become explicit ≤ rows on the mapped columns.
    let mut colmap = Vec::with_capacity(n);
    let mut n_cols = 0usize;
    for &(lo, _) in &lp.bounds {
        if lo.is_finite() {
            colmap.push(ColMap::Shifted { col: n_cols, lo });
            n_cols += 1;
        } else {
            colmap.push(ColMap::Split { pos: n_cols, neg: n_cols + 1 });
            n_cols += 2;
        }
    }

    struct StdRow {
        coeffs: Vec<f64>,
        relation: Relation,
        rhs: f64,
    }

    let expand = |coeffs: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; n_cols];
        let mut adj = rhs;
        for (i, &c) in coeffs.iter().enumerate() {
            match colmap[i] {
                ColMap::Shifted { col, lo } => {
                    out[col] += c;
                    adj -= c * lo;
                }
                ColMap::Split { pos, neg } => {
                    out[pos] += c;
                    out[neg] -= c;
                }
            }
        }
        (out, adj)
    };

    let mut rows: Vec<StdRow> = Vec::with_capacity(lp.rows.len() + n);
    for row in &lp.rows {
        let (coeffs, rhs) = expand(&row.coeffs, row.rhs);
        rows.push(StdRow { coeffs, relation: row.relation, rhs });
    }
    for (i, &(_, hi)) in lp.bounds.iter().enumerate() {
        if hi.is_finite() {
            let mut unit = vec![0.0; n];
            unit[i] = 1.0;
            let (coeffs, rhs) = expand(&unit, hi);
            rows.push(StdRow { coeffs, relation: Relation::Le, rhs });
        }
    }

    // Normalize to rhs ≥ 0.
    for row in &mut rows {
        if row.rhs < 0.0 {
            for c in &mut row.coeffs {
                *c = -*c;
            }
            row.rhs = -row.rhs;
            row.relation = match row.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows
        .iter()
        .filter(|r| matches!(r.relation, Relation::Le | Relation::Ge))
        .count();
    let n_art = rows
        .iter()
        .filter(|r| matches!(r.relation, Relation::Eq | Relation::Ge))
        .count();
    let total = n_cols + n_slack + n_art;

    let mut a: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut b: Vec<f64> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut slack_at = n_cols;
    let mut art_at = n_cols + n_slack;
    for row in &rows {
        let mut full = vec![0.0; total];
        full[..n_cols].copy_from_slice(&row.coeffs);
        match row.relation {
            Relation::Le => {
                full[slack_at] = 1.0;
                basis.push(slack_at);
                slack_at += 1;
            }
            Relation::Ge => {
                full[slack_at] = -1.0;
                slack_at += 1;
                full[art_at] = 1.0;
                basis.push(art_at);
                art_at += 1;
            }
            Relation::Eq => {
                full[art_at] = 1.0;
                basis.push(art_at);
                art_at += 1;
            }
        }
        a.push(full);
        b.push(row.rhs);
    }

    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let mut cost1 = vec![0.0; total];
        for c in cost1.iter_mut().skip(n_cols + n_slack) {
            *c = 1.0;
        }
        let mut z = reduced_costs(&a, &basis, &cost1);
        match simplex(&mut a, &mut b, &mut basis, &mut z, total)? {
            SimplexOutcome::Optimal => {}
            SimplexOutcome::Unbounded => {
                return Err(Error::SolverFailure(
                    "phase-1 problem reported unbounded".into(),
                ));
            }
        }
        let phase1_obj: f64 = basis
            .iter()
            .zip(&b)
            .map(|(&v, &bv)| cost1[v] * bv)
            .sum();
        if phase1_obj > FEASIBILITY_TOL * scale {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
        }

        // Pivot leftover artificials out of the basis; rows that carry
        // no structural coefficient are redundant and get dropped.
        let mut r = 0;
        while r < a.len() {
            if basis[r] >= n_cols + n_slack {
                b[r] = 0.0; // basic artificial at tolerance-level value
                let piv = (0..n_cols + n_slack)
                    .filter(|&j| a[r][j].abs() > PIVOT_TOL)
                    .max_by(|&x, &y| a[r][x].abs().total_cmp(&a[r][y].abs()));
                match piv {
                    Some(j) => {
                        pivot(&mut a, &mut b, &mut basis, &mut vec![0.0; total], r, j);
                        r += 1;
                    }
                    None => {
                        a.remove(r);
                        b.remove(r);
                        basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }

        // Drop the artificial block (it is the trailing column range).
        for row in &mut a {
            row.truncate(n_cols + n_slack);
        }
    }

    // Phase 2 on the real objective, expressed over the mapped columns.
    let width = n_cols + n_slack;
    let mut cost2 = vec![0.0; width];
    for (i, &c) in lp.objective.iter().enumerate() {
        match colmap[i] {
            ColMap::Shifted { col, .. } => cost2[col] += c,
            ColMap::Split { pos, neg } => {
                cost2[pos] += c;
                cost2[neg] -= c;
            }
        }
    }
    let mut z = reduced_costs(&a, &basis, &cost2);
    match simplex(&mut a, &mut b, &mut basis, &mut z, width)? {
        SimplexOutcome::Optimal => {}
        SimplexOutcome::Unbounded => {
            return Ok(LpSolution::non_optimal(LpStatus::Unbounded));
        }
    }

    // Read the solution back through the column mapping.
    let mut y = vec![0.0; width];
    for (i, &v) in basis.iter().enumerate() {
        y[v] = b[i];
    }
    let mut x = vec![0.0; n];
    for (i, map) in colmap.iter().enumerate() {
        x[i] = match *map {
            ColMap::Shifted { col, lo } => lo + y[col],
            ColMap::Split { pos, neg } => y[pos] - y[neg],
        };
    }
    let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    verify_feasible(lp, &x, scale)?;
    Ok(LpSolution { x, objective, status: LpStatus::Optimal })
}

fn verify_feasible(lp: &LinearProgram, x: &[f64], scale: f64) -> Result<()> {
    let tol = FEASIBILITY_TOL * scale;
    for (i, row) in lp.rows.iter().enumerate() {
        let lhs: f64 = row.coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
        let ok = match row.relation {
            Relation::Le => lhs <= row.rhs + tol,
            Relation::Ge => lhs >= row.rhs - tol,
            Relation::Eq => (lhs - row.rhs).abs() <= tol,
        };
        if !ok {
            return Err(Error::SolverFailure(format!(
                "solution violates row {i}: lhs {lhs}, rhs {rhs}",
                rhs = row.rhs
            )));
        }
    }
    for (i, (&(lo, hi), &v)) in lp.bounds.iter().zip(x).enumerate() {
        if v < lo - tol || v > hi + tol {
            return Err(Error::SolverFailure(format!(
                "solution violates bounds on variable {i}: {v} not in [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}

fn reduced_costs(a: &[Vec<f64>], basis: &[usize], cost: &[f64]) -> Vec<f64> {
    let mut z = cost.to_vec();
    for (i, &v) in basis.iter().enumerate() {
        let cb = cost[v];
        if cb != 0.0 {
            for (zj, aj) in z.iter_mut().zip(&a[i]) {
                *zj -= cb * aj;
            }
        }
    }
    z
}

enum SimplexOutcome {
    Optimal,
    Unbounded,
}

/// How many consecutive degenerate pivots before Bland's rule takes
/// over the entering choice.
const DEGENERATE_STREAK: usize = 30;

/// Primal simplex iterations. Pricing is Dantzig's most-negative
/// reduced cost; Bland's anti-cycling rule (lowest-index entering
/// column) engages whenever a run of degenerate pivots suggests a
/// cycle, and the leaving row always breaks ratio ties by the lowest
/// basic-variable index.
fn simplex(
    a: &mut Vec<Vec<f64>>,
    b: &mut Vec<f64>,
    basis: &mut Vec<usize>,
    z: &mut Vec<f64>,
    width: usize,
) -> Result<SimplexOutcome> {
    let mut degenerate_streak = 0usize;
    for _ in 0..MAX_PIVOTS {
        let entering = if degenerate_streak >= DEGENERATE_STREAK {
            (0..width).find(|&j| z[j] < -PIVOT_TOL)
        } else {
            let mut best: Option<usize> = None;
            for j in 0..width {
                if z[j] < -PIVOT_TOL && best.map(|bj| z[j] < z[bj]).unwrap_or(true) {
                    best = Some(j);
                }
            }
            best
        };
        let Some(j) = entering else {
            return Ok(SimplexOutcome::Optimal);
        };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..a.len() {
            if a[i][j] > PIVOT_TOL {
                let ratio = b[i] / a[i][j];
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - PIVOT_TOL
                            || ((ratio - lr).abs() <= PIVOT_TOL && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, ratio)) = leave else {
            return Ok(SimplexOutcome::Unbounded);
        };
        if ratio.abs() <= PIVOT_TOL {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
        pivot(a, b, basis, z, r, j);
    }
    Err(Error::SolverFailure(format!(
        "simplex did not terminate within {MAX_PIVOTS} pivots"
    )))
}

fn pivot(
    a: &mut [Vec<f64>],
    b: &mut [f64],
    basis: &mut [usize],
    z: &mut [f64],
    r: usize,
    j: usize,
) {
    let piv = a[r][j];
    for v in a[r].iter_mut() {
        *v /= piv;
    }
    b[r] /= piv;
    a[r][j] = 1.0;

    let pr = a[r].clone();
    let br = b[r];
    for i in 0..a.len() {
        if i == r {
            continue;
        }
        let factor = a[i][j];
        if factor != 0.0 {
            for (av, pv) in a[i].iter_mut().zip(&pr) {
                *av -= factor * pv;
            }
            a[i][j] = 0.0;
            b[i] -= factor * br;
            if b[i] < 0.0 && b[i] > -PIVOT_TOL {
                b[i] = 0.0;
            }
        }
    }
    let zf = z[j];
    if zf != 0.0 {
        for (zv, pv) in z.iter_mut().zip(&pr) {
            *zv -= zf * pv;
        }
        z[j] = 0.0;
    }
    basis[r] = j;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_active_bound() {
        // min x s.t. 3 ≤ x ≤ 10
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.set_bounds(0, 3.0, 10.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 3.0).abs() < 1e-9);
        assert!((sol.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn simplex_face_objective() {
        // min -x - y s.t. x + y ≤ 1, x,y ≥ 0: any point on the face
        // x + y = 1 is optimal; only the objective is pinned.
        let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
        lp.add_row(vec![1.0, 1.0], Relation::Le, 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-9);
        assert!((sol.x[0] + sol.x[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn detects_infeasible() {
        // x ≥ 2 and x ≤ 1 cannot both hold.
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_row(vec![1.0], Relation::Ge, 2.0);
        lp.add_row(vec![1.0], Relation::Le, 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        // min -x with x ≥ 0 and no cap.
        let lp = LinearProgram::new(vec![-1.0]);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn handles_free_variables() {
        // min x, x free, x ≥ -5 as a row.
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row(vec![1.0], Relation::Ge, -5.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] + 5.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_row(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn deterministic_across_repeat_solves() {
        let (lp, _) = random_bounded_lp(7);
        let s1 = solve_lp(&lp).unwrap();
        let s2 = solve_lp(&lp).unwrap();
        assert_eq!(s1.x, s2.x);
        assert_eq!(s1.objective.to_bits(), s2.objective.to_bits());
    }

    // --- vertex-enumeration oracle -----------------------------------

    /// Solves an n×n system by Gaussian elimination with partial
    /// pivoting; None when (numerically) singular.
    fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
        let n = rhs.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
            if m[piv][col].abs() < 1e-10 {
                return None;
            }
            m.swap(col, piv);
            rhs.swap(col, piv);
            for row in (col + 1)..n {
                let f = m[row][col] / m[col][col];
                if f != 0.0 {
                    for k in col..n {
                        m[row][k] -= f * m[col][k];
                    }
                    rhs[row] -= f * rhs[col];
                }
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = rhs[row];
            for k in (row + 1)..n {
                acc -= m[row][k] * x[k];
            }
            x[row] = acc / m[row][row];
        }
        Some(x)
    }

    fn is_feasible(lp: &LinearProgram, x: &[f64], tol: f64) -> bool {
        for row in &lp.rows {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
            let ok = match row.relation {
                Relation::Le => lhs <= row.rhs + tol,
                Relation::Ge => lhs >= row.rhs - tol,
                Relation::Eq => (lhs - row.rhs).abs() <= tol,
            };
            if !ok {
                return false;
            }
        }
        lp.bounds
            .iter()
            .zip(x)
            .all(|(&(lo, hi), &v)| v >= lo - tol && v <= hi + tol)
    }

    /// Exhaustively enumerates basic solutions (every choice of n
    /// hyperplanes from rows and active bounds), keeping the best
    /// feasible one. Independent of the simplex path.
    fn enumerate_optimum(lp: &LinearProgram) -> Option<f64> {
        let n = lp.num_vars();
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for row in &lp.rows {
            planes.push((row.coeffs.clone(), row.rhs));
        }
        for (i, &(lo, hi)) in lp.bounds.iter().enumerate() {
            let mut unit = vec![0.0; n];
            unit[i] = 1.0;
            if lo.is_finite() {
                planes.push((unit.clone(), lo));
            }
            if hi.is_finite() {
                planes.push((unit, hi));
            }
        }

        let mut best: Option<f64> = None;
        let mut choice: Vec<usize> = (0..n).collect();
        if planes.len() < n {
            return None;
        }
        loop {
            let m: Vec<Vec<f64>> = choice.iter().map(|&i| planes[i].0.clone()).collect();
            let rhs: Vec<f64> = choice.iter().map(|&i| planes[i].1).collect();
            if let Some(x) = solve_square(m, rhs) {
                if is_feasible(lp, &x, 1e-7) {
                    let obj: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                    best = Some(match best {
                        None => obj,
                        Some(b) => b.min(obj),
                    });
                }
            }
            // next combination in lexicographic order
            let mut i = n;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if choice[i] != i + planes.len() - n {
                    choice[i] += 1;
                    for k in (i + 1)..n {
                        choice[k] = choice[k - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Random feasible bounded LP: a known interior point sets the rhs
    /// so feasibility is guaranteed, and box bounds keep it bounded.
    fn random_bounded_lp(seed: u64) -> (LinearProgram, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=4usize);
        let m = rng.gen_range(1..=4usize);
        let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut lp = LinearProgram::new(objective);
        let mut x0 = Vec::with_capacity(n);
        for i in 0..n {
            let hi = rng.gen_range(0.5..3.0);
            lp.set_bounds(i, 0.0, hi);
            x0.push(rng.gen_range(0.0..hi));
        }
        for _ in 0..m {
            let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let at_x0: f64 = coeffs.iter().zip(&x0).map(|(c, v)| c * v).sum();
            match rng.gen_range(0..3) {
                0 => lp.add_row(coeffs, Relation::Le, at_x0 + rng.gen_range(0.0..1.0)),
                1 => lp.add_row(coeffs, Relation::Ge, at_x0 - rng.gen_range(0.0..1.0)),
                _ => lp.add_row(coeffs, Relation::Eq, at_x0),
            }
        }
        (lp, x0)
    }

    #[test]
    fn matches_vertex_enumeration_on_random_instances() {
        for seed in 0..20u64 {
            let (lp, _) = random_bounded_lp(seed);
            let sol = solve_lp(&lp).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal, "seed {seed}");
            let oracle = enumerate_optimum(&lp).expect("oracle found no vertex");
            assert!(
                (sol.objective - oracle).abs() < 1e-6,
                "seed {seed}: simplex {} vs enumeration {oracle}",
                sol.objective
            );
        }
    }

    #[test]
    fn weak_duality_spot_check() {
        // No random feasible point may beat the reported optimum.
        let mut lp = LinearProgram::new(vec![-0.7, 0.3, -0.2]);
        for i in 0..3 {
            lp.set_bounds(i, 0.0, 2.0);
        }
        lp.add_row(vec![1.0, 1.0, 1.0], Relation::Le, 4.0);
        lp.add_row(vec![1.0, -1.0, 0.5], Relation::Le, 1.5);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        for _ in 0..20_000 {
            if checked >= 1000 {
                break;
            }
            let x: Vec<f64> = lp
                .bounds
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();
            if is_feasible(&lp, &x, 0.0) {
                checked += 1;
                let obj: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                assert!(obj >= sol.objective - 1e-7);
            }
        }
        assert!(checked >= 1000, "sampler rarely hit the feasible region");
    }
}
