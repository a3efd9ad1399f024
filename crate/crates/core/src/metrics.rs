//! Probe-based metrics between packings, windowed Hausdorff distance and
//! pointwise pairings.
//!
//! A probe collection is a family of balls `B(c_q, ε_q)` with centers at
//! least 1 apart and radii in `(0, 1/2)`. For a packing `Λ` each ball
//! contributes `φ_q(Λ) = Σ_λ ε_q f((λ - c_q)/ε_q)`, and the probe distance
//! between `Λ` and `Λ'` seen from `α` is
//!
//! ```text
//! |Σ_q φ_q(Λ) - φ_q(Λ')| / (1/2 + |α| + Σ_q |α - c_q|)
//! ```
//!
//! maximized over sub-collections of a candidate pool. Every `*_lower`
//! function returns a lower bound of a supremum over infinitely many
//! collections.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::geom::Point;
use crate::udset::{UdSet, TOL_MIN};

/// A probe function supported in the unit ball.
pub trait Probe: Sync {
    fn name(&self) -> &str;
    fn eval(&self, t: &Point) -> f64;
}

/// `f(t) = 1 - 2|t|` on `B(0, 1/2)`, zero outside.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConeProbe;

impl Probe for ConeProbe {
    fn name(&self) -> &str {
        "cone"
    }

    fn eval(&self, t: &Point) -> f64 {
        (1.0 - 2.0 * t.norm()).max(0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeCollection {
    centers: Vec<Point>,
    radii: Vec<f64>,
}

impl ProbeCollection {
    pub fn new(centers: Vec<Point>, radii: Vec<f64>) -> Result<Self> {
        if centers.len() != radii.len() {
            return domain(format!("{} centers but {} radii", centers.len(), radii.len()));
        }
        if let Some(dim) = centers.first().map(Point::dim) {
            if let Some(bad) = centers.iter().find(|c| c.dim() != dim) {
                return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
            }
        }
        if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0 && r < 0.5)) {
            return domain(format!("probe radius {r} outside (0, 1/2)"));
        }
        check_separated(&centers)?;
        Ok(ProbeCollection { centers, radii })
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

fn check_separated(centers: &[Point]) -> Result<()> {
    if centers.is_empty() {
        return Ok(());
    }
    // Validation as a packing reports the offending pair.
    let window = centers.iter().map(Point::norm).fold(0.0, f64::max);
    UdSet::validate(centers.to_vec(), centers[0].dim(), window).map(|_| ())
}

/// Contribution of the probe `B(c, ε)` to `φ(Λ)`.
fn phi_ball(set: &UdSet, c: &Point, eps: f64, f: &dyn Probe) -> f64 {
    let mut acc = 0.0;
    let mut hits = 0;
    set.grid()
        .for_each_within(c, eps, |i, _| {
            hits += 1;
            acc += eps * f.eval(&set.points()[i].sub(c).scale(1.0 / eps));
        })
        .expect("dimension checked by caller");
    debug_assert!(hits <= 1, "two points of a packing inside a probe ball of radius < 1/2");
    acc
}

/// `φ_{B}(Λ) = Σ_q Σ_λ ε_q f((λ - c_q)/ε_q)`; zero for the empty set.
pub fn phi(set: &UdSet, collection: &ProbeCollection, f: &dyn Probe) -> Result<f64> {
    check_dims(set, collection.centers())?;
    Ok(collection.centers.iter().zip(&collection.radii).map(|(c, &e)| phi_ball(set, c, e, f)).sum())
}

fn check_dims(set: &UdSet, centers: &[Point]) -> Result<()> {
    match centers.iter().find(|c| c.dim() != set.dim()) {
        Some(c) => Err(Error::DimensionMismatch { expected: set.dim(), found: c.dim() }),
        None => Ok(()),
    }
}

/// Maximum of `|Σ_{q∈S} a_q| / (base + Σ_{q∈S} w_q)` over non-empty `S`,
/// with the maximizing set in increasing index order. Zero when no `a_q` is
/// non-zero.
pub fn max_ratio(a: &[f64], w: &[f64], base: f64) -> (f64, Vec<usize>) {
    assert_eq!(a.len(), w.len());
    let mut best = (0.0, Vec::new());
    for sign in [1.0, -1.0] {
        let mut class: Vec<usize> = (0..a.len()).filter(|&q| sign * a[q] > 0.0).collect();
        let key = |q: usize| if w[q] > 0.0 { sign * a[q] / w[q] } else { f64::INFINITY };
        class.sort_by(|&x, &y| key(y).total_cmp(&key(x)).then(x.cmp(&y)));
        let (mut num, mut den) = (0.0, base);
        let mut chosen = Vec::new();
        for q in class {
            let (n2, d2) = (num + sign * a[q], den + w[q]);
            if chosen.is_empty() || n2 * den > num * d2 {
                num = n2;
                den = d2;
                chosen.push(q);
            } else {
                break;
            }
        }
        chosen.sort_unstable();
        let value = ratio_of(a, w, base, &chosen);
        if value > best.0 {
            best = (value, chosen);
        }
    }
    best
}

/// `|Σ a_q| / (base + Σ w_q)` summed in the order of `set`.
pub fn ratio_of(a: &[f64], w: &[f64], base: f64, set: &[usize]) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let num: f64 = set.iter().map(|&q| a[q]).sum();
    let den: f64 = base + set.iter().map(|&q| w[q]).sum::<f64>();
    num.abs() / den
}

/// Exact maximum of the probe ratio over all sub-collections of `pool`.
pub fn probe_pseudometric(a: &UdSet, b: &UdSet, alpha: &Point, pool: &ProbeCollection, f: &dyn Probe) -> Result<f64> {
    if a.dim() != b.dim() || alpha.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: if a.dim() != b.dim() { b.dim() } else { alpha.dim() } });
    }
    check_dims(a, pool.centers())?;
    let diff: Vec<f64> = pool
        .centers
        .iter()
        .zip(&pool.radii)
        .map(|(c, &e)| phi_ball(a, c, e, f) - phi_ball(b, c, e, f))
        .collect();
    let w: Vec<f64> = pool.centers.iter().map(|c| alpha.dist(c)).collect();
    Ok(max_ratio(&diff, &w, 0.5 + alpha.norm()).0)
}

/// Candidate generation limits for the lower-bound estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeBudget {
    /// Probe radii tried at every center.
    pub radii: Vec<f64>,
    /// Only points within this distance of the frame origin serve as `α`.
    pub alpha_radius: Option<f64>,
    /// Only points within this distance of the origin serve as shifts `x`.
    pub x_radius: Option<f64>,
    /// Upper limit on `#α × #centers` per frame.
    pub max_work: usize,
}

impl Default for ProbeBudget {
    fn default() -> Self {
        ProbeBudget { radii: default_radii(), alpha_radius: None, x_radius: None, max_work: 50_000_000 }
    }
}

/// `0.49, 0.49/2, ...` down to 0.05.
pub fn default_radii() -> Vec<f64> {
    std::iter::successors(Some(0.49), |r| Some(r / 2.0)).take_while(|&r| r >= 0.05).collect()
}

/// Witness of a lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricBound {
    pub value: f64,
    /// Frame origin `x` (the origin for `d`).
    pub shift: Point,
    pub alpha: Point,
    /// Centers of the maximizing collection.
    pub centers: Vec<Point>,
}

/// Probe centers: each set's own points, and midpoints of close cross pairs
/// that are at least 1 from every other such midpoint. Each pool is
/// separated on its own.
fn center_pools(a: &UdSet, b: &UdSet) -> Result<Vec<Vec<Point>>> {
    let mut mids = Vec::new();
    for pa in a.points() {
        b.grid().for_each_within(pa, 1.0, |j, d2| {
            if d2 < 1.0 {
                mids.push(pa.midpoint(&b.points()[j]));
            }
        })?;
    }
    let keep: Vec<Point> = if mids.is_empty() {
        mids
    } else {
        let grid = crate::geom::SpatialGrid::build(a.dim(), &mids, 1.0)?;
        mids.iter()
            .enumerate()
            .filter(|(i, m)| {
                let mut alone = true;
                grid.for_each_within(m, 1.0, |j, d2| alone &= j == *i || d2 >= 1.0 - TOL_MIN)
                    .expect("dimension checked");
                alone
            })
            .map(|(_, m)| m.clone())
            .collect()
    };
    Ok(vec![a.points().to_vec(), b.points().to_vec(), keep])
}

/// Per-center best `a_q` for each sign over the radius grid.
struct Pool {
    centers: Vec<Point>,
    pos: Vec<f64>,
    neg: Vec<f64>,
}

fn score_pool(a: &UdSet, b: &UdSet, centers: Vec<Point>, radii: &[f64], f: &dyn Probe) -> Pool {
    let (mut pos, mut neg) = (Vec::with_capacity(centers.len()), Vec::with_capacity(centers.len()));
    for c in &centers {
        let (mut hi, mut lo) = (0.0f64, 0.0f64);
        for &e in radii {
            let v = phi_ball(a, c, e, f) - phi_ball(b, c, e, f);
            hi = hi.max(v);
            lo = lo.min(v);
        }
        pos.push(hi);
        neg.push(lo);
    }
    Pool { centers, pos, neg }
}

fn check_budget(budget: &ProbeBudget) -> Result<()> {
    if budget.radii.is_empty() {
        return domain("probe radius grid is empty");
    }
    if let Some(&r) = budget.radii.iter().find(|&&r| !(r > 0.0 && r < 0.5)) {
        return domain(format!("probe radius {r} outside (0, 1/2)"));
    }
    Ok(())
}

/// Best bound over `α` candidates for the frame centered at `x`.
fn best_in_frame(pools: &[Pool], alphas: &[Point], x: &Point) -> MetricBound {
    let mut best = MetricBound { value: 0.0, shift: x.clone(), alpha: x.clone(), centers: Vec::new() };
    for alpha in alphas {
        let base = 0.5 + alpha.dist(x);
        for pool in pools {
            let w: Vec<f64> = pool.centers.iter().map(|c| alpha.dist(c)).collect();
            for a in [&pool.pos, &pool.neg] {
                let (v, set) = max_ratio(a, &w, base);
                if v > best.value {
                    best = MetricBound {
                        value: v,
                        shift: x.clone(),
                        alpha: alpha.clone(),
                        centers: set.iter().map(|&q| pool.centers[q].clone()).collect(),
                    };
                }
            }
        }
    }
    best.value = best.value.clamp(0.0, 1.0);
    best
}

fn alpha_candidates(a: &UdSet, b: &UdSet, x: &Point, radius: Option<f64>) -> Vec<Point> {
    std::iter::once(x.clone())
        .chain(a.points().iter().chain(b.points()).filter(|p| radius.map_or(true, |r| p.dist(x) <= r)).cloned())
        .collect()
}

fn prepare(a: &UdSet, b: &UdSet, f: &dyn Probe, budget: &ProbeBudget) -> Result<Vec<Pool>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    check_budget(budget)?;
    Ok(center_pools(a, b)?.into_iter().map(|c| score_pool(a, b, c, &budget.radii, f)).collect())
}

fn work_check(alphas: usize, pools: &[Pool], budget: &ProbeBudget) -> Result<()> {
    let work = alphas * pools.iter().map(|p| p.centers.len()).sum::<usize>();
    if work > budget.max_work {
        return Err(Error::BudgetExceeded(format!("{alphas} α candidates × probe centers = {work} > {}", budget.max_work)));
    }
    Ok(())
}

/// Lower bound on `d(Λ, Λ')`, in `[0, 1]`.
pub fn metric_d_lower(a: &UdSet, b: &UdSet, f: &dyn Probe, budget: &ProbeBudget) -> Result<MetricBound> {
    let pools = prepare(a, b, f, budget)?;
    let origin = Point::origin(a.dim());
    let alphas = alpha_candidates(a, b, &origin, budget.alpha_radius);
    work_check(alphas.len(), &pools, budget)?;
    Ok(best_in_frame(&pools, &alphas, &origin))
}

/// Lower bound on `D(Λ, Λ') = sup_x d(Λ - x, Λ' - x)` over shifts `x` at the
/// points of both sets.
#[allow(non_snake_case)]
pub fn metric_D_lower(a: &UdSet, b: &UdSet, f: &dyn Probe, budget: &ProbeBudget) -> Result<MetricBound> {
    let pools = prepare(a, b, f, budget)?;
    let shifts: Vec<&Point> = a.points().iter().chain(b.points()).collect();
    let frames: Vec<(Point, Vec<Point>)> = shifts
        .iter()
        .map(|&x| (x.clone(), alpha_candidates(a, b, x, budget.alpha_radius)))
        .collect();
    for (_, alphas) in &frames {
        work_check(alphas.len(), &pools, budget)?;
    }
    let bounds: Vec<MetricBound> = frames
        .par_iter()
        .filter(|(x, _)| budget.x_radius.map_or(true, |r| x.norm() <= r))
        .map(|(x, alphas)| best_in_frame(&pools, alphas, x))
        .collect();
    Ok(bounds.into_iter().reduce(|p, q| if q.value > p.value { q } else { p }).unwrap_or(MetricBound {
        value: 0.0,
        shift: Point::origin(a.dim()),
        alpha: Point::origin(a.dim()),
        centers: Vec::new(),
    }))
}

/// `max(sup_{λ∈Λ_R} dist(λ, Λ'), sup_{λ'∈Λ'_R} dist(λ', Λ))`, where `Λ_R`
/// are the points with norm at most `window_radius`.
pub fn hausdorff_window(a: &UdSet, b: &UdSet, window_radius: f64) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let directed = |from: &UdSet, to: &UdSet, name: &str| -> Result<f64> {
        let inside: Vec<&Point> = from.points().iter().filter(|p| p.norm() <= window_radius).collect();
        if inside.is_empty() || to.is_empty() {
            return Err(Error::EmptySet(format!("{name} has no point within radius {window_radius}")));
        }
        let mut worst = 0.0f64;
        for p in inside {
            let (_, d) = to.grid().nearest(p)?.expect("non-empty");
            worst = worst.max(d);
        }
        Ok(worst)
    };
    let ab = directed(a, b, "first set")?;
    let ba = directed(b, a, "second set")?;
    Ok(ab.max(ba))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairMatch {
    pub lambda: Point,
    pub lambda_prime: Point,
    pub displacement: f64,
    /// `(1/2 + |λ - x|)·ε`.
    pub bound: f64,
    pub bound_satisfied: bool,
    /// `displacement < ε/2`.
    pub within_half_eps: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairingReport {
    pub x: Point,
    pub eps: f64,
    pub matches: Vec<PairMatch>,
    pub unmatched: Vec<Point>,
    /// Points with several partners, impossible for packings.
    pub ambiguous: Vec<Point>,
    pub max_displacement: f64,
}

impl PairingReport {
    pub fn all_bounds_satisfied(&self) -> bool {
        self.matches.iter().all(|m| m.bound_satisfied)
    }

    /// CSV with header `lambda_coords,lambda_prime_coords,displacement,bound,satisfied`;
    /// coordinates are space separated.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let coords = |p: &Point| p.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(w, "lambda_coords,lambda_prime_coords,displacement,bound,satisfied")?;
        for m in &self.matches {
            writeln!(
                w,
                "{},{},{},{},{}",
                coords(&m.lambda),
                coords(&m.lambda_prime),
                m.displacement,
                m.bound,
                m.bound_satisfied
            )?;
        }
        for p in &self.unmatched {
            writeln!(w, "{},,,,false", coords(p))?;
        }
        Ok(())
    }
}

/// Partners in `Λ'` strictly within 1/2 of every `λ` with
/// `|λ - x| < (1 - ε)/(2ε)`.
pub fn pairing(a: &UdSet, b: &UdSet, x: &Point, eps: f64) -> Result<PairingReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("ε must be in (0, 1), got {eps}"));
    }
    if a.dim() != b.dim() || x.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: if a.dim() != b.dim() { b.dim() } else { x.dim() } });
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("pairing needs two non-empty sets".into()));
    }
    let reach = (1.0 - eps) / (2.0 * eps);
    let mut report = PairingReport {
        x: x.clone(),
        eps,
        matches: Vec::new(),
        unmatched: Vec::new(),
        ambiguous: Vec::new(),
        max_displacement: 0.0,
    };
    for l in a.points().iter().filter(|l| l.dist(x) < reach) {
        let mut partners = Vec::new();
        b.grid().for_each_within(l, 0.5, |j, d2| {
            if d2 < 0.25 {
                partners.push(j);
            }
        })?;
        match partners.as_slice() {
            [] => report.unmatched.push(l.clone()),
            [j] => {
                let lp = b.points()[*j].clone();
                let displacement = l.dist(&lp);
                let bound = (0.5 + l.dist(x)) * eps;
                report.max_displacement = report.max_displacement.max(displacement);
                report.matches.push(PairMatch {
                    lambda: l.clone(),
                    lambda_prime: lp,
                    displacement,
                    bound,
                    bound_satisfied: displacement <= bound,
                    within_half_eps: displacement < eps / 2.0,
                });
            }
            _ => report.ambiguous.push(l.clone()),
        }
    }
    debug_assert!(report.ambiguous.is_empty(), "packing point with two partners closer than 1/2");
    Ok(report)
}
