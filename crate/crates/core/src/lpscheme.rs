//! LP scheme over the independence system polytope.
//!
//! The robust problem with linear objectives equals
//! `max { ν : ν <= w_k·x ∀k, x ∈ P(I) }`. The polytope is handled by cutting
//! planes, and the optimal point is written as a convex combination of
//! independent sets by column generation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{ElementSet, MixedStrategy, Objective, ProblemInstance, TOLERANCE};
use crate::lpsolver::{solve_lp, Direction, LinearProgram, LpOutcome, LpSolution, Sense};
use crate::subroutines::greedy_linear;
use crate::systems::{FlowNetwork, IndependenceSystem, Separation};

/// Cuts violated by at most this much are ignored.
pub const SEPARATION_TOL: f64 = 1e-8;
/// Accuracy required of a decomposition.
pub const DECOMPOSE_TOL: f64 = 1e-7;
const PRICING_TOL: f64 = 1e-9;

/// A point of `[0,1]^E`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FractionalPoint(Vec<f64>);

impl FractionalPoint {
    /// Coordinates within `1e-9` of the box are clamped into it.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        let mut x = x;
        for (e, v) in x.iter_mut().enumerate() {
            if !v.is_finite() || *v < -TOLERANCE || *v > 1.0 + TOLERANCE {
                return Err(Error::Precondition(format!("x[{e}] = {v} is outside [0,1]")));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(FractionalPoint(x))
    }

    pub fn marginals_of(p: &MixedStrategy, size: usize) -> Self {
        FractionalPoint(p.marginals(size).into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for FractionalPoint {
    type Error = Error;
    fn try_from(x: Vec<f64>) -> Result<Self> {
        FractionalPoint::new(x)
    }
}

impl From<FractionalPoint> for Vec<f64> {
    fn from(p: FractionalPoint) -> Self {
        p.0
    }
}

/// The inequality `coeffs·x <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Cut {
    pub fn violation(&self, x: &[f64]) -> f64 {
        dot(&self.coeffs, x) - self.rhs
    }

    fn into_error(self, x: &[f64]) -> Error {
        let violation = self.violation(x);
        Error::OutsidePolytope {
            coeffs: self.coeffs,
            rhs: self.rhs,
            violation,
        }
    }
}

/// A polytope in `[0,1]^E` whose vertices are characteristic vectors.
pub trait PolytopeOracle {
    fn dimension(&self) -> usize;

    /// A most violated inequality, or `None` when `x` lies in the polytope
    /// within [`SEPARATION_TOL`].
    fn separate(&self, x: &[f64]) -> Result<Option<Cut>>;

    /// A vertex set maximizing `y·χ(X)`.
    fn best_vertex(&self, y: &[f64]) -> Result<ElementSet>;
}

/// Rank inequalities of a single matroid.
#[derive(Clone, Copy, Debug)]
pub struct MatroidPolytope<'a> {
    system: &'a IndependenceSystem,
}

impl<'a> MatroidPolytope<'a> {
    pub fn new(system: &'a IndependenceSystem) -> Result<Self> {
        if !system.is_matroid() || matches!(system, IndependenceSystem::Intersection(_)) {
            return Err(Error::Unsupported(format!(
                "rank separation needs a single matroid, got `{}`",
                system.kind_name()
            )));
        }
        Ok(MatroidPolytope { system })
    }
}

fn rank_cut(system: &IndependenceSystem, x: &[f64]) -> Result<Option<Cut>> {
    let clamped: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    match system.separate_matroid_polytope(&clamped)? {
        Separation::Member => Ok(None),
        Separation::Violated(c) => {
            let cut = Cut {
                coeffs: c.set.indicator(x.len()),
                rhs: c.rank as f64,
            };
            Ok((cut.violation(x) > SEPARATION_TOL).then_some(cut))
        }
    }
}

impl PolytopeOracle for MatroidPolytope<'_> {
    fn dimension(&self) -> usize {
        self.system.ground_size()
    }

    fn separate(&self, x: &[f64]) -> Result<Option<Cut>> {
        rank_cut(self.system, x)
    }

    fn best_vertex(&self, y: &[f64]) -> Result<ElementSet> {
        greedy_linear(self.system, y)
    }
}

/// `P(I_1) ∩ ... ∩ P(I_μ)` for a matroid intersection. Exact for two
/// matroids; a `1/μ`-relaxation of `P(I)` in general.
#[derive(Clone, Debug)]
pub struct IntersectionPolytope<'a> {
    system: &'a IndependenceSystem,
    members: Vec<&'a IndependenceSystem>,
    vertices: Vec<ElementSet>,
}

impl<'a> IntersectionPolytope<'a> {
    pub fn new(system: &'a IndependenceSystem) -> Result<Self> {
        let members = match system {
            IndependenceSystem::Intersection(_) => system
                .matroid_members()
                .ok_or_else(|| Error::Unsupported("intersection members must be matroids".into()))?,
            _ => {
                return Err(Error::Unsupported(format!(
                    "expected a matroid intersection, got `{}`",
                    system.kind_name()
                )))
            }
        };
        Ok(IntersectionPolytope {
            system,
            members,
            vertices: system.enumerate_independent()?,
        })
    }

    pub fn mu(&self) -> usize {
        self.members.len()
    }

    pub fn system(&self) -> &IndependenceSystem {
        self.system
    }
}

impl PolytopeOracle for IntersectionPolytope<'_> {
    fn dimension(&self) -> usize {
        self.system.ground_size()
    }

    fn separate(&self, x: &[f64]) -> Result<Option<Cut>> {
        let mut best: Option<Cut> = None;
        for m in &self.members {
            if let Some(c) = rank_cut(m, x)? {
                if best.as_ref().is_none_or(|b| c.violation(x) > b.violation(x)) {
                    best = Some(c);
                }
            }
        }
        Ok(best)
    }

    fn best_vertex(&self, y: &[f64]) -> Result<ElementSet> {
        Ok(best_of(&self.vertices, y))
    }
}

/// Convex hull of an explicit list of sets, separated by an LP over
/// normalized inequalities `a·x <= b` with `a ∈ [-1,1]^E`.
#[derive(Clone, Debug)]
pub struct HullPolytope {
    dim: usize,
    vertices: Vec<ElementSet>,
}

impl HullPolytope {
    pub fn new(dim: usize, vertices: Vec<ElementSet>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInstance("hull of no sets".into()));
        }
        for v in &vertices {
            v.check_range(dim)?;
        }
        Ok(HullPolytope { dim, vertices })
    }

    /// Hull of all independent sets.
    pub fn of_system(system: &IndependenceSystem) -> Result<Self> {
        if system.is_path_system() {
            return Err(Error::Unsupported("s-t path systems use robust_shortest_path".into()));
        }
        HullPolytope::new(system.ground_size(), system.enumerate_independent()?)
    }

    pub fn vertices(&self) -> &[ElementSet] {
        &self.vertices
    }
}

impl PolytopeOracle for HullPolytope {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn separate(&self, x: &[f64]) -> Result<Option<Cut>> {
        let n = self.dim;
        // variables a_0..a_{n-1}, b
        let mut objective = x.to_vec();
        objective.push(-1.0);
        let mut lp = LinearProgram::new(Direction::Maximize, objective);
        for e in 0..n {
            lp.set_bounds(e, -1.0, 1.0);
        }
        lp.set_bounds(n, f64::NEG_INFINITY, f64::INFINITY);
        for v in &self.vertices {
            let mut row = v.indicator(n);
            row.push(-1.0);
            lp.add_constraint(row, Sense::Le, 0.0);
        }
        let sol = solve_lp(&lp)?.optimal()?;
        if sol.value <= SEPARATION_TOL {
            return Ok(None);
        }
        let cut = Cut {
            coeffs: sol.x[..n].to_vec(),
            rhs: sol.x[n],
        };
        Ok((cut.violation(x) > SEPARATION_TOL).then_some(cut))
    }

    fn best_vertex(&self, y: &[f64]) -> Result<ElementSet> {
        Ok(best_of(&self.vertices, y))
    }
}

fn best_of(sets: &[ElementSet], y: &[f64]) -> ElementSet {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, s) in sets.iter().enumerate() {
        let v: f64 = s.iter().map(|e| y[e]).sum();
        if v > best.0 {
            best = (v, i);
        }
    }
    sets[best.1].clone()
}

/// An exact oracle for `P(I)`: rank cuts for matroids, the members' rank
/// cuts for two-matroid intersections, and the explicit hull otherwise.
pub fn oracle_for(system: &IndependenceSystem) -> Result<Box<dyn PolytopeOracle + '_>> {
    match system {
        IndependenceSystem::StPath(_) => Err(Error::Unsupported("s-t path systems use robust_shortest_path".into())),
        IndependenceSystem::Intersection(_) if system.matroid_count() == Some(2) => {
            Ok(Box::new(IntersectionPolytope::new(system)?))
        }
        IndependenceSystem::Intersection(_) => Ok(Box::new(HullPolytope::of_system(system)?)),
        _ if system.is_matroid() => Ok(Box::new(MatroidPolytope::new(system)?)),
        _ => Ok(Box::new(HullPolytope::of_system(system)?)),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cuts added by a cutting-plane run, with the violation each had when it
/// was added.
#[derive(Clone, Debug, Default)]
pub struct CutLog {
    pub cuts: Vec<Cut>,
    pub violations: Vec<f64>,
}

/// Repeatedly solves `lp` and adds the cut returned by `separate` on the
/// first `dim` variables until none is violated.
fn cutting_plane(
    mut lp: LinearProgram,
    dim: usize,
    separate: &dyn Fn(&[f64]) -> Result<Option<Cut>>,
) -> Result<(LpSolution, CutLog)> {
    let cap = 50 * dim.max(1) * dim.max(1);
    let extra = lp.var_count() - dim;
    let mut log = CutLog::default();
    for _ in 0..=cap {
        let sol = match solve_lp(&lp)? {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Infeasible => return Err(Error::Infeasible("cutting-plane LP is infeasible".into())),
            LpOutcome::Unbounded => return Err(Error::InvalidInstance("cutting-plane LP is unbounded".into())),
        };
        let x = &sol.x[..dim];
        match separate(x)? {
            Some(cut) if cut.violation(x) > SEPARATION_TOL => {
                log.violations.push(cut.violation(x));
                let mut row = cut.coeffs.clone();
                row.extend(std::iter::repeat_n(0.0, extra));
                lp.add_constraint(row, Sense::Le, cut.rhs);
                log.cuts.push(cut);
            }
            _ => return Ok((sol, log)),
        }
    }
    Err(Error::SolverFailure(format!(
        "cutting-plane loop exceeded {cap} rounds"
    )))
}

#[derive(Clone, Debug)]
pub struct LpSchemeSolution {
    pub value: f64,
    pub point: FractionalPoint,
    pub cuts: CutLog,
}

fn weight_matrix(inst: &ProblemInstance) -> Result<Vec<Vec<f64>>> {
    inst.linear_weight_matrix()
        .ok_or_else(|| Error::Unsupported("the LP scheme needs linear objectives".into()))
}

/// `max { ν : ν <= w_k·x ∀k, x ∈ P }` by cutting planes.
pub fn solve_lp_scheme(inst: &ProblemInstance, oracle: &dyn PolytopeOracle) -> Result<LpSchemeSolution> {
    let weights = weight_matrix(inst)?;
    let dim = inst.ground_size();
    if oracle.dimension() != dim {
        return Err(Error::Precondition(format!(
            "oracle dimension {} differs from ground size {dim}",
            oracle.dimension()
        )));
    }
    let mut objective = vec![0.0; dim + 1];
    objective[dim] = 1.0;
    let mut lp = LinearProgram::new(Direction::Maximize, objective);
    for e in 0..dim {
        lp.set_bounds(e, 0.0, 1.0);
    }
    lp.set_bounds(dim, f64::NEG_INFINITY, f64::INFINITY);
    for w in &weights {
        let mut row: Vec<f64> = w.iter().map(|v| -v).collect();
        row.push(1.0);
        lp.add_constraint(row, Sense::Le, 0.0);
    }
    let (sol, cuts) = cutting_plane(lp, dim, &|x| oracle.separate(x))?;
    Ok(LpSchemeSolution {
        value: sol.value,
        point: FractionalPoint::new(sol.x[..dim].to_vec())?,
        cuts,
    })
}

/// Robust value and an optimal strategy for linear objectives, using
/// [`oracle_for`] on the instance's system.
pub fn solve_linear(inst: &ProblemInstance) -> Result<(LpSchemeSolution, MixedStrategy)> {
    let oracle = oracle_for(inst.system())?;
    let sol = solve_lp_scheme(inst, oracle.as_ref())?;
    let strategy = decompose_with(&sol.point, oracle.as_ref())?;
    Ok((sol, strategy))
}

/// Writes `x` as a convex combination of independent sets of `system`.
pub fn decompose(x: &FractionalPoint, system: &IndependenceSystem) -> Result<MixedStrategy> {
    let oracle = oracle_for(system)?;
    decompose_with(x, oracle.as_ref())
}

/// Column generation on `min sum_e (u_e + v_e)` subject to
/// `sum_X λ_X χ(X) + u - v = x`, `sum_X λ_X = 1`; columns are priced by
/// [`PolytopeOracle::best_vertex`] on the row duals.
pub fn decompose_with(x: &FractionalPoint, oracle: &dyn PolytopeOracle) -> Result<MixedStrategy> {
    let n = oracle.dimension();
    let x = x.as_slice();
    if x.len() != n {
        return Err(Error::Precondition(format!(
            "point has {} coordinates, polytope dimension is {n}",
            x.len()
        )));
    }
    if let Some(cut) = oracle.separate(x)? {
        if cut.violation(x) > DECOMPOSE_TOL {
            return Err(cut.into_error(x));
        }
    }
    let mut columns = vec![oracle.best_vertex(x)?];
    let cap = 1000 + 50 * n * n;
    let mut sol;
    let mut rounds = 0;
    loop {
        sol = solve_master(x, &columns)?;
        let (y, pi) = (&sol.duals[..n], sol.duals[n]);
        let candidate = oracle.best_vertex(y)?;
        let price: f64 = candidate.iter().map(|e| y[e]).sum::<f64>() + pi;
        if price <= PRICING_TOL || columns.contains(&candidate) {
            break;
        }
        columns.push(candidate);
        rounds += 1;
        if rounds > cap {
            return Err(Error::SolverFailure(format!("column generation exceeded {cap} rounds")));
        }
    }
    if sol.value > DECOMPOSE_TOL {
        return Err(Error::Infeasible(format!(
            "point is not a convex combination of vertices (residual {:.3e})",
            sol.value
        )));
    }
    let weights: Vec<(ElementSet, f64)> = columns
        .into_iter()
        .zip(sol.x.iter().copied())
        .filter(|(_, l)| *l > 1e-12)
        .collect();
    let p = MixedStrategy::from_weights(weights)?;
    let error = p
        .marginals(n)
        .iter()
        .zip(x)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if error > DECOMPOSE_TOL {
        return Err(Error::SolverFailure(format!(
            "decomposition reconstructs x only within {error:.3e}"
        )));
    }
    Ok(p)
}

fn solve_master(x: &[f64], columns: &[ElementSet]) -> Result<LpSolution> {
    let n = x.len();
    let m = columns.len();
    // variables: λ_1..λ_m, u_1..u_n, v_1..v_n
    let mut objective = vec![0.0; m];
    objective.extend(std::iter::repeat_n(1.0, 2 * n));
    let mut lp = LinearProgram::new(Direction::Minimize, objective);
    for (e, &xe) in x.iter().enumerate() {
        let mut row: Vec<f64> = columns.iter().map(|c| f64::from(u8::from(c.contains(e)))).collect();
        row.extend((0..n).map(|j| if j == e { 1.0 } else { 0.0 }));
        row.extend((0..n).map(|j| if j == e { -1.0 } else { 0.0 }));
        lp.add_constraint(row, Sense::Eq, xe);
    }
    let mut total = vec![1.0; m];
    total.extend(std::iter::repeat_n(0.0, 2 * n));
    lp.add_constraint(total, Sense::Eq, 1.0);
    solve_lp(&lp)?.optimal()
}

/// Value over a relaxation `P̂` with `α P̂ ⊆ P ⊆ P̂`.
#[derive(Clone, Debug)]
pub struct RelaxedSolution {
    pub value: f64,
    pub point: FractionalPoint,
    pub alpha: f64,
    /// `α ν̂ <= ν*`.
    pub lower: f64,
    /// `ν* <= ν̂`.
    pub upper: f64,
}

pub fn solve_relaxed(inst: &ProblemInstance, relaxation: &dyn PolytopeOracle, alpha: f64) -> Result<RelaxedSolution> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("relaxation ratio {alpha} outside (0,1]")));
    }
    let sol = solve_lp_scheme(inst, relaxation)?;
    Ok(RelaxedSolution {
        value: sol.value,
        point: sol.point,
        alpha,
        lower: alpha * sol.value,
        upper: sol.value,
    })
}

/// Relaxes a `μ`-matroid intersection to the intersection of the member
/// polytopes, with `α = 1/μ`.
pub fn solve_intersection_relaxation(inst: &ProblemInstance) -> Result<RelaxedSolution> {
    let relaxation = IntersectionPolytope::new(inst.system())?;
    let alpha = 1.0 / relaxation.mu() as f64;
    solve_relaxed(inst, &relaxation, alpha)
}

#[derive(Clone, Debug)]
pub struct PathSolution {
    /// `max_k` expected length of the returned strategy.
    pub value: f64,
    /// Optimum of the LP over the dominant of the path polytope.
    pub lp_value: f64,
    pub point: FractionalPoint,
    pub strategy: MixedStrategy,
    pub cuts: CutLog,
}

/// Minimizes `max_k ℓ_k·x` over the dominant of the s–t path polytope
/// intersected with the unit box, then splits a unit flow below `x` into
/// paths.
pub fn robust_shortest_path(system: &IndependenceSystem, lengths: &[Vec<f64>]) -> Result<PathSolution> {
    let IndependenceSystem::StPath(g) = system else {
        return Err(Error::Unsupported(format!(
            "shortest paths on a `{}` system",
            system.kind_name()
        )));
    };
    let dim = g.arcs().len();
    if lengths.is_empty() || lengths.iter().any(|l| l.len() != dim) {
        return Err(Error::Precondition("one length per arc and scenario required".into()));
    }
    if lengths.iter().flatten().any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::InvalidInstance("arc lengths must be positive".into()));
    }
    if g.find_path(|_| true).is_none() {
        return Err(Error::Infeasible("no s-t path".into()));
    }
    let mut objective = vec![0.0; dim + 1];
    objective[dim] = 1.0;
    let mut lp = LinearProgram::new(Direction::Minimize, objective);
    for e in 0..dim {
        lp.set_bounds(e, 0.0, 1.0);
    }
    lp.set_bounds(dim, f64::NEG_INFINITY, f64::INFINITY);
    for l in lengths {
        let mut row: Vec<f64> = l.iter().map(|v| -v).collect();
        row.push(1.0);
        lp.add_constraint(row, Sense::Ge, 0.0);
    }
    let separate = |x: &[f64]| -> Result<Option<Cut>> {
        let cut = system.min_st_cut(x)?;
        if cut.value < 1.0 - SEPARATION_TOL {
            let coeffs = cut.arcs.indicator(dim).into_iter().map(|v| -v).collect();
            Ok(Some(Cut { coeffs, rhs: -1.0 }))
        } else {
            Ok(None)
        }
    };
    let (sol, cuts) = cutting_plane(lp, dim, &separate)?;
    let point = FractionalPoint::new(sol.x[..dim].to_vec())?;

    let mut net = FlowNetwork::new(g.node_count());
    for (&(u, v), &cap) in g.arcs().iter().zip(point.as_slice()) {
        net.add_arc(u, v, cap);
    }
    let total = net.max_flow(g.source(), g.sink());
    if total < 1.0 - 1e-6 {
        return Err(Error::SolverFailure(format!(
            "LP point carries only {total} units of s-t flow"
        )));
    }
    let mut flow: Vec<f64> = (0..dim).map(|a| net.arc_flow(a) / total).collect();
    let mut remaining = 1.0;
    let mut weights = Vec::new();
    while remaining > 1e-9 {
        let Some(path) = g.find_path(|a| flow[a] > 1e-12) else {
            break;
        };
        let bottleneck = path.iter().map(|&a| flow[a]).fold(f64::INFINITY, f64::min);
        for &a in &path {
            flow[a] -= bottleneck;
        }
        remaining -= bottleneck;
        weights.push((ElementSet::new(path), bottleneck));
    }
    let strategy = MixedStrategy::from_weights(weights)?;
    let value = lengths
        .iter()
        .map(|l| {
            strategy
                .support()
                .iter()
                .map(|(s, p)| p * s.iter().map(|a| l[a]).sum::<f64>())
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PathSolution {
        value,
        lp_value: sol.value,
        point,
        strategy,
        cuts,
    })
}

/// Weight polytope `F = { w >= 0 : ∃ψ >= 0, A w + B ψ <= c }`; the adversary
/// picks `w ∈ F` and the value of `X` is `w(X)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionPolytopeDoc", into = "FunctionPolytopeDoc")]
pub struct FunctionPolytope {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    c: Vec<f64>,
    dim: usize,
    aux: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FunctionPolytopeDoc {
    a: Vec<Vec<f64>>,
    #[serde(default)]
    b: Vec<Vec<f64>>,
    c: Vec<f64>,
}

impl TryFrom<FunctionPolytopeDoc> for FunctionPolytope {
    type Error = Error;
    fn try_from(d: FunctionPolytopeDoc) -> Result<Self> {
        let b = if d.b.is_empty() {
            vec![Vec::new(); d.a.len()]
        } else {
            d.b
        };
        FunctionPolytope::new(d.a, b, d.c)
    }
}

impl From<FunctionPolytope> for FunctionPolytopeDoc {
    fn from(f: FunctionPolytope) -> Self {
        FunctionPolytopeDoc { a: f.a, b: f.b, c: f.c }
    }
}

impl FunctionPolytope {
    /// `a` is `m × |E|`, `b` is `m × d`, `c` has `m` entries. Rejects an
    /// empty `F`.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, c: Vec<f64>) -> Result<Self> {
        let m = c.len();
        if m == 0 || a.len() != m || b.len() != m {
            return Err(Error::InvalidInstance(format!(
                "A has {} rows, B has {}, c has {m}",
                a.len(),
                b.len()
            )));
        }
        let dim = a[0].len();
        let aux = b[0].len();
        if dim == 0 || a.iter().any(|r| r.len() != dim) || b.iter().any(|r| r.len() != aux) {
            return Err(Error::InvalidInstance("ragged constraint matrix".into()));
        }
        if a.iter().chain(&b).flatten().chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("non-finite polytope data".into()));
        }
        let f = FunctionPolytope { a, b, c, dim, aux };
        let mut lp = LinearProgram::new(Direction::Maximize, vec![0.0; dim + aux]);
        for i in 0..m {
            let mut row = f.a[i].clone();
            row.extend(&f.b[i]);
            lp.add_constraint(row, Sense::Le, f.c[i]);
        }
        if solve_lp(&lp)? == LpOutcome::Infeasible {
            return Err(Error::InvalidInstance("the weight polytope is empty".into()));
        }
        Ok(f)
    }

    /// The convex hull of the weight vectors `w_k`.
    pub fn simplex_hull(weights: &[Vec<f64>]) -> Result<Self> {
        let n = weights.len();
        let Some(dim) = weights.first().map(Vec::len) else {
            return Err(Error::InvalidInstance("no weight vectors".into()));
        };
        if weights.iter().any(|w| w.len() != dim) {
            return Err(Error::InvalidInstance("weight vectors differ in length".into()));
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut c = Vec::new();
        for sign in [1.0, -1.0] {
            for e in 0..dim {
                a.push((0..dim).map(|j| if j == e { sign } else { 0.0 }).collect());
                b.push(weights.iter().map(|w| -sign * w[e]).collect());
                c.push(0.0);
            }
        }
        for sign in [1.0, -1.0] {
            a.push(vec![0.0; dim]);
            b.push(vec![sign; n]);
            c.push(sign);
        }
        FunctionPolytope::new(a, b, c)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.c.len()
    }

    /// `min_{w ∈ F} x·w`.
    pub fn inner_min(&self, x: &[f64]) -> Result<f64> {
        let mut objective = x.to_vec();
        objective.extend(std::iter::repeat_n(0.0, self.aux));
        let mut lp = LinearProgram::new(Direction::Minimize, objective);
        for i in 0..self.rows() {
            let mut row = self.a[i].clone();
            row.extend(&self.b[i]);
            lp.add_constraint(row, Sense::Le, self.c[i]);
        }
        Ok(solve_lp(&lp)?.optimal()?.value)
    }

    /// Whether `w` lies in `F`, found by an LP over `ψ`.
    pub fn contains(&self, w: &[f64]) -> Result<bool> {
        if w.len() != self.dim || w.iter().any(|&v| v < -TOLERANCE) {
            return Ok(false);
        }
        let mut lp = LinearProgram::new(Direction::Maximize, vec![0.0; self.aux]);
        for i in 0..self.rows() {
            lp.add_constraint(self.b[i].clone(), Sense::Le, self.c[i] - dot(&self.a[i], w) + TOLERANCE);
        }
        Ok(solve_lp(&lp)? != LpOutcome::Infeasible)
    }
}

#[derive(Clone, Debug)]
pub struct FunctionPolytopeSolution {
    pub value: f64,
    pub point: FractionalPoint,
    pub strategy: MixedStrategy,
}

/// `max_{x ∈ P} min_{w ∈ F} x·w`, solved as the single LP
/// `max -c·λ  s.t.  A^T λ + x >= 0, B^T λ >= 0, λ >= 0, x ∈ P`.
pub fn solve_function_polytope(oracle: &dyn PolytopeOracle, f: &FunctionPolytope) -> Result<FunctionPolytopeSolution> {
    let dim = oracle.dimension();
    if f.dim != dim {
        return Err(Error::Precondition(format!(
            "weight polytope has dimension {}, ground set has {dim}",
            f.dim
        )));
    }
    let m = f.rows();
    // variables: x_0..x_{dim-1}, λ_1..λ_m
    let mut objective = vec![0.0; dim];
    objective.extend(f.c.iter().map(|v| -v));
    let mut lp = LinearProgram::new(Direction::Maximize, objective);
    for e in 0..dim {
        lp.set_bounds(e, 0.0, 1.0);
        let mut row: Vec<f64> = (0..dim).map(|j| if j == e { 1.0 } else { 0.0 }).collect();
        row.extend(f.a.iter().map(|r| r[e]));
        lp.add_constraint(row, Sense::Ge, 0.0);
    }
    for j in 0..f.aux {
        let mut row = vec![0.0; dim];
        row.extend(f.b.iter().map(|r| r[j]));
        lp.add_constraint(row, Sense::Ge, 0.0);
    }
    debug_assert_eq!(lp.var_count(), dim + m);
    let (sol, _) = cutting_plane(lp, dim, &|x| oracle.separate(x))?;
    let point = FractionalPoint::new(sol.x[..dim].to_vec())?;
    let strategy = decompose_with(&point, oracle)?;
    Ok(FunctionPolytopeSolution {
        value: sol.value,
        point,
        strategy,
    })
}

/// Modular upper bound `ĝ(X) = sum_{e ∈ X} g({e})` of a monotone submodular
/// `g`, with `(1 - c) ĝ <= g <= ĝ` for the curvature `c`.
#[derive(Clone, Debug)]
pub struct Linearization {
    pub linear: Objective,
    pub curvature: f64,
}

impl Linearization {
    pub fn factor(&self) -> f64 {
        1.0 - self.curvature
    }
}

/// Curvature `c = 1 - min_e (g(E) - g(E - e)) / g({e})`, skipping elements
/// with `g({e}) = 0`.
pub fn curvature_linearize(g: &Objective) -> Result<Linearization> {
    if !g.is_monotone() {
        return Err(Error::Precondition("curvature needs a monotone function".into()));
    }
    let n = g.ground_size();
    let full = ElementSet::new(0..n);
    let top = g.eval(&full);
    let base = g.eval(&ElementSet::empty());
    let singles: Vec<f64> = (0..n).map(|e| g.eval(&ElementSet::singleton(e)) - base).collect();
    let mut ratio = f64::INFINITY;
    for (e, &single) in singles.iter().enumerate() {
        if single > TOLERANCE {
            ratio = ratio.min((top - g.eval(&full.without(e))) / single);
        }
    }
    if !ratio.is_finite() {
        return Err(Error::Precondition("every singleton value is zero".into()));
    }
    Ok(Linearization {
        linear: Objective::linear(singles.into_iter().map(|v| v.max(0.0)).collect())?,
        curvature: (1.0 - ratio).clamp(0.0, 1.0),
    })
}

/// LP scheme on the linearized objectives. `lower` is the worst case of the
/// returned strategy under the true objectives, `upper` the linearized value.
#[derive(Clone, Debug)]
pub struct CurvatureSolution {
    pub strategy: MixedStrategy,
    pub lower: f64,
    pub upper: f64,
    /// Largest curvature among the objectives.
    pub curvature: f64,
}

pub fn solve_linearized(inst: &ProblemInstance) -> Result<CurvatureSolution> {
    let mut objectives = Vec::with_capacity(inst.scenario_count());
    let mut curvature = 0.0f64;
    for f in inst.objectives() {
        let lin = curvature_linearize(f)?;
        curvature = curvature.max(lin.curvature);
        objectives.push(lin.linear);
    }
    let surrogate = ProblemInstance::new(inst.ground().clone(), objectives, inst.system().clone())?;
    let (sol, strategy) = solve_linear(&surrogate)?;
    let lower = strategy.expected_values(inst).into_iter().fold(f64::INFINITY, f64::min);
    Ok(CurvatureSolution {
        strategy,
        lower,
        upper: sol.value,
        curvature,
    })
}
