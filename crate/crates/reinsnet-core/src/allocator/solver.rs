//! Derivative-free solver for the finite-dimensional layer problems.
//!
//! The reduced objective is piecewise linear in each coordinate with kinks at
//! scenario values (and, for order-weighted premiums, at reorder points), so
//! gradient-free search is the robust choice: multi-start projected
//! coordinate descent over a per-coordinate grid that merges column order
//! statistics with a uniform fill, followed by golden-section refinement
//! inside the best grid cell.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{self, PremiumPrinciple};
use crate::rng::StreamRng;

use super::{capital_requirement, AllocationSolution, NetworkProblem, TraceEntry};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Uniform grid resolution per coordinate (order statistics are merged in
    /// on top, capped at the same count).
    pub grid_points: usize,
    /// Extra randomized starting points beyond the deterministic ones.
    pub random_starts: usize,
    /// Evaluation budget for the coarse product-grid start.
    pub product_scan_cap: usize,
    pub max_sweeps: usize,
    pub golden_iters: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid_points: 101,
            random_starts: 3,
            product_scan_cap: 20_000,
            max_sweeps: 30,
            golden_iters: 60,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        SolverConfig {
            seed,
            ..Self::default()
        }
    }
}

/// Relative scale below which two objective values count as equal.
const NOISE_RTOL: f64 = 1e-12;

/// Solve the all-VaR layer problem (deductibles only; bounds are pinned to
/// `VaR_alpha - a`). Errors when any insurer carries `beta > 0`.
pub fn solve_var_case(
    problem: &NetworkProblem,
    config: &SolverConfig,
) -> Result<AllocationSolution> {
    if !problem.all_var() {
        return Err(Error::invalid(
            "problem has insurers with beta > 0; use solve_rvar_case",
        ));
    }
    solve(problem, config)
}

/// Solve the general layer problem with deductible and bound variables for
/// every RVaR insurer. Collapses to the VaR case when all `beta = 0`.
pub fn solve_rvar_case(
    problem: &NetworkProblem,
    config: &SolverConfig,
) -> Result<AllocationSolution> {
    solve(problem, config)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Coord {
    Deductible(usize),
    Bound(usize),
}

impl Coord {
    fn label(&self) -> String {
        match self {
            Coord::Deductible(i) => format!("a{}", i + 1),
            Coord::Bound(i) => format!("b{}", i + 1),
        }
    }
}

struct Engine<'a> {
    problem: &'a NetworkProblem,
    sorted_cols: Vec<Vec<f64>>,
    /// `VaR_{alpha_i + beta_i}`: deductible box and the floor of `a + b`.
    v_hi: Vec<f64>,
    /// `VaR_{alpha_i}`: bound box (sample maximum stands in for the essential
    /// supremum when `alpha_i = 0`).
    v_lo: Vec<f64>,
    coords: Vec<Coord>,
    grids: Vec<Vec<f64>>,
}

/// Search point: deductibles for everyone, bounds only meaningful for RVaR
/// insurers (VaR insurers' bounds are derived as `v_lo - a`).
#[derive(Debug, Clone, PartialEq)]
struct Point {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl<'a> Engine<'a> {
    fn new(problem: &'a NetworkProblem, config: &SolverConfig) -> Result<Self> {
        let n = problem.n();
        let sorted_cols: Vec<Vec<f64>> =
            (0..n).map(|j| problem.scenarios.sorted_column(j)).collect();
        let mut v_hi = Vec::with_capacity(n);
        let mut v_lo = Vec::with_capacity(n);
        for i in 0..n {
            let spec = &problem.specs[i];
            v_hi.push(measures::var(&sorted_cols[i], spec.alpha + spec.beta)?);
            v_lo.push(measures::var(&sorted_cols[i], spec.alpha)?);
        }
        let mut coords = Vec::new();
        for i in 0..n {
            coords.push(Coord::Deductible(i));
            if !problem.specs[i].is_var() {
                coords.push(Coord::Bound(i));
            }
        }
        let grids = coords
            .iter()
            .map(|c| match *c {
                Coord::Deductible(i) => {
                    candidate_grid(&sorted_cols[i], v_hi[i], config.grid_points)
                }
                Coord::Bound(i) => candidate_grid(&sorted_cols[i], v_lo[i], config.grid_points),
            })
            .collect();
        Ok(Engine {
            problem,
            sorted_cols,
            v_hi,
            v_lo,
            coords,
            grids,
        })
    }

    /// Reduced objective: `sum a_i` plus the RVaR of the excess above each
    /// RVaR insurer's layer plus the premium on the pathwise total ceded.
    fn objective(&self, p: &Point) -> f64 {
        let n = self.problem.n();
        let m = self.problem.scenarios.m();
        let mut total: f64 = p.a.iter().sum();
        let mut ceded = vec![0.0; m];
        for i in 0..n {
            let cap = self.cap(p, i);
            let a = p.a[i];
            if !self.problem.specs[i].is_var() {
                total += measures::rvar_transformed(
                    &self.sorted_cols[i],
                    &self.problem.specs[i],
                    |x| (x - a - cap).max(0.0),
                )
                .expect("sorted column is valid");
            }
            for (acc, &x) in ceded.iter_mut().zip(self.problem.scenarios.column(i)) {
                *acc += (x - a).max(0.0).min(cap);
            }
        }
        total
            + measures::premium(&self.problem.principle, &ceded)
                .expect("ceded sample is valid")
    }

    fn cap(&self, p: &Point, i: usize) -> f64 {
        if self.problem.specs[i].is_var() {
            (self.v_lo[i] - p.a[i]).max(0.0)
        } else {
            p.b[i]
        }
    }

    /// Feasible interval of one coordinate given the others.
    fn range(&self, p: &Point, coord: Coord) -> (f64, f64) {
        match coord {
            Coord::Deductible(i) => {
                if self.problem.specs[i].is_var() {
                    (0.0, self.v_hi[i])
                } else {
                    ((self.v_hi[i] - p.b[i]).max(0.0), self.v_hi[i])
                }
            }
            Coord::Bound(i) => ((self.v_hi[i] - p.a[i]).max(0.0), self.v_lo[i]),
        }
    }

    fn set(&self, p: &mut Point, coord: Coord, value: f64) {
        match coord {
            Coord::Deductible(i) => p.a[i] = value,
            Coord::Bound(i) => p.b[i] = value,
        }
    }

    fn get(&self, p: &Point, coord: Coord) -> f64 {
        match coord {
            Coord::Deductible(i) => p.a[i],
            Coord::Bound(i) => p.b[i],
        }
    }

    /// Candidate values for a coordinate clipped to its current feasible
    /// range, endpoints always included.
    fn clipped_candidates(&self, k: usize, lo: f64, hi: f64) -> Vec<f64> {
        let mut vals: Vec<f64> = self.grids[k]
            .iter()
            .copied()
            .filter(|&v| v >= lo && v <= hi)
            .collect();
        vals.push(lo);
        vals.push(hi);
        vals.sort_unstable_by(f64::total_cmp);
        vals.dedup();
        vals
    }

    /// One full coordinate-descent pass from a starting point.
    fn descend(
        &self,
        mut point: Point,
        config: &SolverConfig,
        trace: &mut Vec<TraceEntry>,
    ) -> (Point, f64) {
        let mut current = self.objective(&point);
        trace.push(TraceEntry {
            sweep: 0,
            coordinate: "start".into(),
            value: f64::NAN,
            objective: current,
        });
        for sweep in 1..=config.max_sweeps {
            let mut moved = false;
            for (k, &coord) in self.coords.iter().enumerate() {
                let (lo, hi) = self.range(&point, coord);
                let cands = self.clipped_candidates(k, lo, hi);
                let evals: Vec<f64> = cands
                    .par_iter()
                    .map(|&v| {
                        let mut q = point.clone();
                        self.set(&mut q, coord, v);
                        self.objective(&q)
                    })
                    .collect();
                let best_val = evals.iter().copied().fold(f64::INFINITY, f64::min);
                // The empirical objective is exactly flat over whole
                // candidate stretches (e.g. translation-invariant premiums
                // below the smallest loss), where summation noise of order
                // 1e-15 would otherwise pick an arbitrary interior point.
                // Treat values within noise of the minimum as ties and take
                // the smallest candidate, which keeps solutions
                // lexicographically minimal.
                let eps = NOISE_RTOL * (1.0 + best_val.abs());
                let best_idx = evals
                    .iter()
                    .position(|&v| v <= best_val + eps)
                    .expect("minimum exists");
                let picked_val = evals[best_idx];
                let cur_coord = self.get(&point, coord);
                let strict = picked_val < current - eps;
                let tie_toward_zero = picked_val <= current + eps && cands[best_idx] < cur_coord;
                if strict || tie_toward_zero {
                    self.set(&mut point, coord, cands[best_idx]);
                    current = current.min(picked_val);
                    moved = true;
                    if strict {
                        trace.push(TraceEntry {
                            sweep,
                            coordinate: coord.label(),
                            value: cands[best_idx],
                            objective: current,
                        });
                    }
                }
                // Golden-section polish inside the bracketing cell.
                let cell_lo = if best_idx > 0 { cands[best_idx - 1] } else { lo };
                let cell_hi = if best_idx + 1 < cands.len() {
                    cands[best_idx + 1]
                } else {
                    hi
                };
                if cell_hi > cell_lo {
                    let (v, val) = golden_section(
                        |v| {
                            let mut q = point.clone();
                            self.set(&mut q, coord, v);
                            self.objective(&q)
                        },
                        cell_lo,
                        cell_hi,
                        config.golden_iters,
                    );
                    if val < current - eps {
                        self.set(&mut point, coord, v);
                        current = val;
                        moved = true;
                        trace.push(TraceEntry {
                            sweep,
                            coordinate: format!("{}*", coord.label()),
                            value: v,
                            objective: current,
                        });
                    }
                }
            }
            if !moved {
                break;
            }
        }
        (point, current)
    }

    fn starts(&self, config: &SolverConfig) -> Vec<Point> {
        let n = self.problem.n();
        let full = Point {
            a: vec![0.0; n],
            b: self.v_lo.clone(),
        };
        let none = Point {
            a: self.v_hi.clone(),
            b: (0..n)
                .map(|i| {
                    // a = v_hi keeps a + b >= v_hi for any b >= 0.
                    if self.problem.specs[i].is_var() {
                        0.0
                    } else {
                        0.0
                    }
                })
                .collect(),
        };
        let mut starts = vec![full, none];
        if let Some(p) = self.product_scan_start(config) {
            starts.push(p);
        }
        let rng = StreamRng::new(config.seed);
        for s in 0..config.random_starts {
            let mut stream = rng.substream(s as u64, u64::MAX - 1);
            let a: Vec<f64> = (0..n).map(|i| stream.uniform() * self.v_hi[i]).collect();
            let b: Vec<f64> = (0..n)
                .map(|i| {
                    let lo = (self.v_hi[i] - a[i]).max(0.0);
                    lo + stream.uniform() * (self.v_lo[i] - lo).max(0.0)
                })
                .collect();
            starts.push(Point { a, b });
        }
        starts
    }

    /// Coarse exhaustive scan over the product of subsampled grids; the best
    /// cell seeds one descent, which protects coordinate descent from bad
    /// basins when coordinates couple through the premium.
    fn product_scan_start(&self, config: &SolverConfig) -> Option<Point> {
        let dims = self.coords.len();
        if dims == 0 || config.product_scan_cap == 0 {
            return None;
        }
        let per_coord = (config.product_scan_cap as f64)
            .powf(1.0 / dims as f64)
            .floor() as usize;
        let per_coord = per_coord.max(2);
        let axes: Vec<Vec<f64>> = self
            .grids
            .iter()
            .map(|g| subsample(g, per_coord))
            .collect();
        let total: usize = axes.iter().map(|a| a.len()).product();
        if total > config.product_scan_cap * 2 {
            return None;
        }
        let points: Vec<Point> = multi_index(&axes)
            .into_iter()
            .map(|combo| {
                let n = self.problem.n();
                let mut p = Point {
                    a: vec![0.0; n],
                    b: self.v_lo.clone(),
                };
                for (k, &coord) in self.coords.iter().enumerate() {
                    self.set(&mut p, coord, combo[k]);
                }
                self.project(&mut p);
                p
            })
            .collect();
        let evals: Vec<f64> = points.par_iter().map(|p| self.objective(p)).collect();
        let mut best = 0usize;
        for (idx, &v) in evals.iter().enumerate().skip(1) {
            if v < evals[best] {
                best = idx;
            }
        }
        Some(points[best].clone())
    }

    /// Pull a point onto the constraint set (raises bounds up to the
    /// `a + b >= v_hi` floor).
    fn project(&self, p: &mut Point) {
        for i in 0..self.problem.n() {
            p.a[i] = p.a[i].clamp(0.0, self.v_hi[i]);
            if !self.problem.specs[i].is_var() {
                let lo = (self.v_hi[i] - p.a[i]).max(0.0);
                p.b[i] = p.b[i].clamp(lo, self.v_lo[i]);
            }
        }
    }
}

fn subsample(grid: &[f64], k: usize) -> Vec<f64> {
    if grid.len() <= k {
        return grid.to_vec();
    }
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let idx = j * (grid.len() - 1) / (k - 1);
        out.push(grid[idx]);
    }
    out.dedup();
    out
}

fn multi_index(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut combos = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(combos.len() * axis.len());
        for combo in &combos {
            for &v in axis {
                let mut c = combo.clone();
                c.push(v);
                next.push(c);
            }
        }
        combos = next;
    }
    combos
}

/// Candidate values on `[0, upper]`: the column's distinct order statistics
/// (where the empirical objective has kinks) subsampled to the grid budget,
/// merged with a uniform fill, endpoints always present.
pub(crate) fn candidate_grid(sorted_col: &[f64], upper: f64, grid_points: usize) -> Vec<f64> {
    let mut stats: Vec<f64> = sorted_col
        .iter()
        .copied()
        .filter(|&x| x > 0.0 && x < upper)
        .collect();
    stats.dedup();
    let stats = subsample(&stats, grid_points);
    let mut grid = Vec::with_capacity(grid_points + stats.len() + 2);
    if grid_points >= 2 && upper > 0.0 {
        for j in 0..grid_points {
            grid.push(upper * j as f64 / (grid_points - 1) as f64);
        }
    }
    grid.extend(stats);
    grid.push(0.0);
    grid.push(upper);
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    grid
}

pub(crate) fn golden_section<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    iters: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn solve(problem: &NetworkProblem, config: &SolverConfig) -> Result<AllocationSolution> {
    validate_principle(&problem.principle)?;
    let engine = Engine::new(problem, config)?;
    let mut best: Option<(Point, f64, Vec<TraceEntry>)> = None;
    for start in engine.starts(config) {
        let mut trace = Vec::new();
        let (point, value) = engine.descend(start, config, &mut trace);
        let better = match &best {
            None => true,
            Some((bp, bv, _)) => {
                let eps = NOISE_RTOL * (1.0 + bv.abs());
                value < *bv - eps || (value <= *bv + eps && lex_less(&point, bp))
            }
        };
        if better {
            let value = best.as_ref().map_or(value, |(_, bv, _)| value.min(*bv));
            best = Some((point, value, trace));
        }
    }
    let (point, value, trace) = best.expect("at least one start");

    let n = problem.n();
    let deductibles = point.a.clone();
    let bounds: Vec<f64> = (0..n).map(|i| engine.cap(&point, i)).collect();
    let treaties: Vec<crate::treaties::LayerTreaty> = deductibles
        .iter()
        .zip(&bounds)
        .map(|(&a, &b)| crate::treaties::LayerTreaty {
            deductible: a,
            bound: b,
        })
        .collect();
    let per_insurer_capital = capital_requirement(problem, &treaties)?;
    let solution = AllocationSolution {
        deductibles,
        bounds,
        objective: value,
        per_insurer_capital,
        trace,
    };
    solution.validate_feasible(problem)?;
    Ok(solution)
}

fn lex_less(p: &Point, q: &Point) -> bool {
    for (a, b) in p.a.iter().zip(&q.a).chain(p.b.iter().zip(&q.b)) {
        if a < b {
            return true;
        }
        if a > b {
            return false;
        }
    }
    false
}

fn validate_principle(principle: &PremiumPrinciple) -> Result<()> {
    match principle {
        PremiumPrinciple::Wang { distortion, .. } => distortion.validate(),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DistortionFunction, RiskMeasureSpec};
    use crate::scenarios::{sample_scenarios, CopulaSpec, Marginal, ScenarioMatrix};

    fn lognormal_matrix(n: usize, m: usize, seed: u64) -> ScenarioMatrix {
        let marginals = vec![Marginal::LogNormal { mu: 0.0, sigma: 0.6 }; n];
        sample_scenarios(&marginals, &CopulaSpec::Independent, m, seed).unwrap()
    }

    #[test]
    fn var_case_rejects_rvar_specs() {
        let problem = NetworkProblem::new(
            lognormal_matrix(1, 50, 1),
            vec![RiskMeasureSpec::new(0.1, 0.2).unwrap()],
            PremiumPrinciple::expected_value(0.3).unwrap(),
        )
        .unwrap();
        let err = solve_var_case(&problem, &SolverConfig::default()).unwrap_err();
        assert!(err.to_string().contains("solve_rvar_case"), "{err}");
    }

    #[test]
    fn translation_invariant_premium_gives_zero_deductibles() {
        // Monotone + translation invariant (Wang, theta = 0) premium: full
        // layers up to VaR are optimal, deductibles exactly zero.
        let problem = NetworkProblem::new(
            lognormal_matrix(2, 400, 2),
            vec![
                RiskMeasureSpec::var(0.1).unwrap(),
                RiskMeasureSpec::var(0.05).unwrap(),
            ],
            PremiumPrinciple::wang(DistortionFunction::sqrt(), 0.0).unwrap(),
        )
        .unwrap();
        let sol = solve_var_case(&problem, &SolverConfig::with_seed(3)).unwrap();
        assert_eq!(sol.deductibles, vec![0.0, 0.0]);
        for i in 0..2 {
            let v = measures::var(&problem.scenarios.sorted_column(i), problem.specs[i].alpha)
                .unwrap();
            assert!((sol.bounds[i] - v).abs() < 1e-12);
        }
    }

    #[test]
    fn expensive_premium_kills_cession() {
        // Loading so high that ceding never pays: every layer collapses to
        // zero width (a at the VaR box edge), found by the 1-D separable
        // structure of the expected-value premium.
        let problem = NetworkProblem::new(
            lognormal_matrix(2, 300, 4),
            vec![
                RiskMeasureSpec::var(0.2).unwrap(),
                RiskMeasureSpec::var(0.2).unwrap(),
            ],
            PremiumPrinciple::expected_value(50.0).unwrap(),
        )
        .unwrap();
        let sol = solve_var_case(&problem, &SolverConfig::with_seed(5)).unwrap();
        for i in 0..2 {
            let v = measures::var(&problem.scenarios.sorted_column(i), 0.2).unwrap();
            assert!(
                (sol.deductibles[i] - v).abs() <= 1e-9 * (1.0 + v),
                "insurer {i}: a = {} vs VaR = {v}",
                sol.deductibles[i]
            );
        }
    }

    #[test]
    fn single_insurer_var_matches_exhaustive_grid_scan() {
        let problem = NetworkProblem::new(
            lognormal_matrix(1, 500, 6),
            vec![RiskMeasureSpec::var(0.1).unwrap()],
            PremiumPrinciple::expected_value(0.4).unwrap(),
        )
        .unwrap();
        let sol = solve_var_case(&problem, &SolverConfig::with_seed(7)).unwrap();

        // Brute-force oracle: scan a dense deductible grid directly against
        // the generic objective.
        let sorted = problem.scenarios.sorted_column(0);
        let v = measures::var(&sorted, 0.1).unwrap();
        let mut best = f64::INFINITY;
        for j in 0..=2000 {
            let a = v * j as f64 / 2000.0;
            let layer = crate::treaties::LayerTreaty {
                deductible: a,
                bound: v - a,
            };
            let val = super::super::objective(&problem, &[layer]).unwrap();
            best = best.min(val);
        }
        assert!(
            sol.objective <= best + 1e-6 * (1.0 + best.abs()),
            "solver {} vs scan {best}",
            sol.objective
        );
    }

    #[test]
    fn single_es_insurer_matches_two_dim_grid_scan() {
        let problem = NetworkProblem::new(
            lognormal_matrix(1, 300, 8),
            vec![RiskMeasureSpec::expected_shortfall(0.1).unwrap()],
            PremiumPrinciple::expected_value(0.25).unwrap(),
        )
        .unwrap();
        let sol = solve_rvar_case(&problem, &SolverConfig::with_seed(9)).unwrap();

        // Exhaustive 201x201 oracle over the (a, b) box of the reduced
        // problem, constraint a + b >= v_hi projected.
        let sorted = problem.scenarios.sorted_column(0);
        let spec = problem.specs[0];
        let v_hi = measures::var(&sorted, spec.alpha + spec.beta).unwrap();
        let v_lo = measures::var(&sorted, spec.alpha).unwrap();
        let mut best = f64::INFINITY;
        for ja in 0..=200 {
            let a = v_hi * ja as f64 / 200.0;
            for jb in 0..=200 {
                let b_floor = (v_hi - a).max(0.0);
                let b = b_floor + (v_lo - b_floor) * jb as f64 / 200.0;
                let mut val = a
                    + measures::rvar_transformed(&sorted, &spec, |x| (x - a - b).max(0.0))
                        .unwrap();
                let ceded: Vec<f64> = problem
                    .scenarios
                    .column(0)
                    .iter()
                    .map(|&x| (x - a).max(0.0).min(b))
                    .collect();
                val += measures::premium(&problem.principle, &ceded).unwrap();
                best = best.min(val);
            }
        }
        assert!(
            sol.objective <= best + 1e-6 * (1.0 + best.abs()),
            "solver {} vs oracle {best}",
            sol.objective
        );
        sol.validate_feasible(&problem).unwrap();
    }

    #[test]
    fn rvar_solver_on_all_var_specs_matches_var_solver() {
        let problem = NetworkProblem::new(
            lognormal_matrix(2, 250, 10),
            vec![
                RiskMeasureSpec::var(0.15).unwrap(),
                RiskMeasureSpec::var(0.05).unwrap(),
            ],
            PremiumPrinciple::expected_value(0.35).unwrap(),
        )
        .unwrap();
        let cfg = SolverConfig::with_seed(11);
        let a = solve_var_case(&problem, &cfg).unwrap();
        let b = solve_rvar_case(&problem, &cfg).unwrap();
        assert_eq!(a.deductibles, b.deductibles);
        assert_eq!(a.bounds, b.bounds);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn trace_is_monotone_and_solver_deterministic() {
        let problem = NetworkProblem::new(
            lognormal_matrix(2, 300, 12),
            vec![
                RiskMeasureSpec::new(0.05, 0.1).unwrap(),
                RiskMeasureSpec::var(0.1).unwrap(),
            ],
            PremiumPrinciple::wang(DistortionFunction::sqrt(), 0.15).unwrap(),
        )
        .unwrap();
        let cfg = SolverConfig::with_seed(13);
        let sol1 = solve_rvar_case(&problem, &cfg).unwrap();
        let sol2 = solve_rvar_case(&problem, &cfg).unwrap();
        assert_eq!(sol1.deductibles, sol2.deductibles);
        assert_eq!(sol1.bounds, sol2.bounds);
        assert_eq!(sol1.objective, sol2.objective);
        for w in sol1.trace.windows(2) {
            assert!(
                w[1].objective <= w[0].objective,
                "trace must be non-increasing"
            );
        }
        sol1.validate_feasible(&problem).unwrap();
    }

    #[test]
    fn reduced_objective_agrees_with_generic_objective_at_layers() {
        // The solver works on the reduced form (sum of deductibles + RVaR of
        // the excess + premium); at feasible layer treaties it must coincide
        // with the generic network objective.
        let problem = NetworkProblem::new(
            lognormal_matrix(2, 350, 16),
            vec![
                RiskMeasureSpec::new(0.1, 0.2).unwrap(),
                RiskMeasureSpec::var(0.15).unwrap(),
            ],
            PremiumPrinciple::wang(DistortionFunction::sqrt(), 0.3).unwrap(),
        )
        .unwrap();
        let config = SolverConfig::with_seed(17);
        let engine = Engine::new(&problem, &config).unwrap();
        let rng = crate::rng::StreamRng::new(99);
        for trial in 0..25u64 {
            let mut stream = rng.substream(trial, 0);
            let a: Vec<f64> = (0..2).map(|i| stream.uniform() * engine.v_hi[i]).collect();
            let mut b = vec![0.0; 2];
            let lo = (engine.v_hi[0] - a[0]).max(0.0);
            b[0] = lo + stream.uniform() * (engine.v_lo[0] - lo);
            let point = Point { a: a.clone(), b };
            let reduced = engine.objective(&point);
            let treaties: Vec<crate::treaties::LayerTreaty> = (0..2)
                .map(|i| crate::treaties::LayerTreaty {
                    deductible: point.a[i],
                    bound: engine.cap(&point, i),
                })
                .collect();
            let generic = super::super::objective(&problem, &treaties).unwrap();
            assert!(
                (reduced - generic).abs() <= 1e-9 * (1.0 + generic.abs()),
                "trial {trial}: reduced {reduced} vs generic {generic}"
            );
        }
    }

    #[test]
    fn boundary_constraint_becomes_active_when_premium_is_cheap() {
        // Zero loading on the expected-value premium makes ceding free at the
        // margin; the floor a + b >= v_hi binds at the optimum.
        let problem = NetworkProblem::new(
            lognormal_matrix(1, 400, 14),
            vec![RiskMeasureSpec::new(0.1, 0.15).unwrap()],
            PremiumPrinciple::expected_value(0.0).unwrap(),
        )
        .unwrap();
        let sol = solve_rvar_case(&problem, &SolverConfig::with_seed(15)).unwrap();
        sol.validate_feasible(&problem).unwrap();
        let spec = problem.specs[0];
        let sorted = problem.scenarios.sorted_column(0);
        let v_hi = measures::var(&sorted, spec.alpha + spec.beta).unwrap();
        // With theta = 0 full cession is weakly optimal; the solver must not
        // leave the feasible floor and the objective must not exceed the
        // no-cession value.
        assert!(sol.deductibles[0] + sol.bounds[0] >= v_hi - 1e-9);
        let no_cession = measures::rvar(&sorted, &spec).unwrap();
        assert!(sol.objective <= no_cession + 1e-9 * (1.0 + no_cession));
    }
}
