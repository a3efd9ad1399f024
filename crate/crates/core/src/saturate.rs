//! Saturation of packings: hole search, greedy saturation and local
//! m-saturation checks.
//!
//! A hole is a point at distance at least 1 from every center, so that one
//! more ball fits. Holes are searched inside `B(0, region_radius)` on cubic
//! cells of side `pitch` centered at `pitch·Z^n`. A cell whose center has
//! clearance `c` cannot contain a hole when `c + pitch·√n/2 < 1`; other cells
//! are split in `2^n` halves, and cells still open at the depth limit are
//! refined by a pattern search on the clearance.
//!
//! Clearances are capped at 2: a reported clearance of 2 means "at least 2".

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::geom::{Point, SpatialGrid, GEOM_TOL};
use crate::udset::{UdSet, TOL_MIN};

pub const DEFAULT_PITCH: f64 = 0.25;
pub const DEFAULT_MAX_DEPTH: u32 = 8;
pub const DEFAULT_BUDGET: usize = 50_000_000;
const CLEARANCE_CAP: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub struct HoleOptions {
    pub pitch: f64,
    pub max_depth: u32,
    /// Maximum number of clearance evaluations.
    pub budget: usize,
    /// A point is a hole when its clearance is at least `1 - tol`.
    pub tol: f64,
}

impl Default for HoleOptions {
    fn default() -> Self {
        HoleOptions { pitch: DEFAULT_PITCH, max_depth: DEFAULT_MAX_DEPTH, budget: DEFAULT_BUDGET, tol: TOL_MIN }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoleWitness {
    pub location: Point,
    /// Distance to the nearest center, capped at 2; infinite for the empty
    /// set.
    pub clearance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HoleStatus {
    Hole(HoleWitness),
    /// Every cell was certified hole-free.
    Saturated,
    /// Some cells could not be resolved within the depth limit or budget.
    Indeterminate { open_cells: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoleSearch {
    pub status: HoleStatus,
    pub pitch: f64,
    pub region_radius: f64,
    /// Largest clearance seen at any evaluated point.
    pub max_clearance: f64,
    pub evaluations: usize,
}

impl HoleSearch {
    pub fn witness(&self) -> Option<&HoleWitness> {
        match &self.status {
            HoleStatus::Hole(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_saturated(&self) -> bool {
        self.status == HoleStatus::Saturated
    }
}

fn check_region(set: &UdSet, region: f64, opts: &HoleOptions) -> Result<()> {
    if !(region >= 0.0) || !region.is_finite() {
        return domain(format!("region radius must be finite and >= 0, got {region}"));
    }
    let limit = set.window_radius() - 1.0;
    if region > limit + GEOM_TOL {
        return domain(format!("region radius {region} exceeds window radius - 1 = {limit}"));
    }
    if !(opts.pitch > 0.0 && opts.pitch <= 1.0) {
        return domain(format!("pitch must be in (0, 1], got {}", opts.pitch));
    }
    if !(opts.tol >= 0.0 && opts.tol < 0.5) {
        return domain(format!("tolerance must be in [0, 1/2), got {}", opts.tol));
    }
    Ok(())
}

/// Distance from the origin to the cube of side `side` centered at `c`.
fn cube_distance(c: &Point, side: f64) -> f64 {
    c.coords().iter().map(|&x| (x.abs() - side / 2.0).max(0.0).powi(2)).sum::<f64>().sqrt()
}

/// Centers of the top-level cells meeting `B(0, region)`.
fn top_cells(dim: usize, region: f64, pitch: f64, budget: usize) -> Result<Vec<Point>> {
    let k = ((region + pitch) / pitch).ceil() as i64;
    let side = (2 * k + 1) as f64;
    if side.powi(dim as i32) > budget as f64 {
        return Err(Error::BudgetExceeded(format!("{}^{dim} grid cells exceed the budget {budget}", 2 * k + 1)));
    }
    let mut out = Vec::new();
    let mut idx = vec![-k; dim];
    loop {
        let c = Point::new(idx.iter().map(|&i| i as f64 * pitch).collect());
        if cube_distance(&c, pitch) <= region {
            out.push(c);
        }
        let mut d = 0;
        while d < dim {
            idx[d] += 1;
            if idx[d] <= k {
                break;
            }
            idx[d] = -k;
            d += 1;
        }
        if d == dim {
            return Ok(out);
        }
    }
}

/// Clearance of `x` with respect to the indexed points, skipping `skip`.
fn clearance(grid: &SpatialGrid, x: &Point, skip: &[usize]) -> f64 {
    if skip.is_empty() {
        return grid.clearance(x, CLEARANCE_CAP).expect("dimension checked");
    }
    let mut best = CLEARANCE_CAP * CLEARANCE_CAP;
    grid.for_each_within(x, CLEARANCE_CAP, |i, d2| {
        if !skip.contains(&i) {
            best = best.min(d2);
        }
    })
    .expect("dimension checked");
    best.sqrt()
}

/// Coordinate pattern search for a local maximum of the clearance inside
/// `B(0, region)`.
fn refine(grid: &SpatialGrid, start: &Point, step: f64, region: f64, skip: &[usize]) -> (Point, f64) {
    let mut x = start.clone();
    let mut best = clearance(grid, &x, skip);
    let mut step = step;
    let mut iterations = 0;
    while step > 1e-10 && iterations < 20_000 && best < CLEARANCE_CAP {
        iterations += 1;
        let mut improved = false;
        for d in 0..x.dim() {
            for sign in [1.0, -1.0] {
                let mut coords = x.coords().to_vec();
                coords[d] += sign * step;
                let y = Point::new(coords);
                if y.norm() > region {
                    continue;
                }
                let c = clearance(grid, &y, skip);
                if c > best {
                    best = c;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (x, best)
}

/// Larger clearance first, then lexicographically smaller location.
fn better(a: &(Point, f64), b: &(Point, f64)) -> bool {
    a.1 > b.1 || (a.1 == b.1 && a.0.lex_cmp(&b.0) == std::cmp::Ordering::Less)
}

fn scan(grid: &SpatialGrid, cells: &[Point]) -> Vec<f64> {
    cells.par_iter().map(|c| clearance(grid, c, &[])).collect()
}

/// Hole search given the clearances of the top-level cells, with the best
/// hole of every subdivided cell.
fn search(
    grid: &SpatialGrid,
    cells: &[Point],
    clear: &[f64],
    region: f64,
    opts: &HoleOptions,
) -> (HoleSearch, Vec<(Point, f64)>) {
    let threshold = 1.0 - opts.tol;
    let n = grid.dim() as f64;
    let max_clearance = clear.iter().copied().fold(0.0, f64::max);
    let mut evaluations = cells.len();

    let mut best: Option<(Point, f64)> = None;
    for (c, &cl) in cells.iter().zip(clear) {
        if cl >= threshold && c.norm() <= region && best.as_ref().map_or(true, |b| better(&(c.clone(), cl), b)) {
            best = Some((c.clone(), cl));
        }
    }
    if let Some((c, cl)) = best {
        let (x, r) = refine(grid, &c, opts.pitch / 2.0, region, &[]);
        let (x, r) = if r > cl { (x, r) } else { (c, cl) };
        let found = vec![(x.clone(), r)];
        let result = HoleSearch {
            status: HoleStatus::Hole(HoleWitness { location: x, clearance: r }),
            pitch: opts.pitch,
            region_radius: region,
            max_clearance: max_clearance.max(r),
            evaluations,
        };
        return (result, found);
    }

    // Subdivide every cell that the Lipschitz bound does not clear.
    let open: Vec<&Point> = cells
        .iter()
        .zip(clear)
        .filter(|(_, &cl)| cl + opts.pitch * n.sqrt() / 2.0 >= threshold)
        .map(|(c, _)| c)
        .collect();
    let counter = AtomicUsize::new(evaluations);
    let results: Vec<(Option<(Point, f64)>, usize, f64)> = open
        .par_iter()
        .map(|&c| subdivide(grid, c, region, opts, &counter))
        .collect();
    evaluations = counter.load(AtomicOrdering::Relaxed);
    let mut unresolved = 0;
    let mut seen = max_clearance;
    let mut all = Vec::new();
    for (found, open_cells, max_seen) in results {
        unresolved += open_cells;
        seen = seen.max(max_seen);
        if let Some(f) = found {
            if best.as_ref().map_or(true, |b| better(&f, b)) {
                best = Some(f.clone());
            }
            all.push(f);
        }
    }
    let status = match best {
        Some((location, clearance)) => HoleStatus::Hole(HoleWitness { location, clearance }),
        None if unresolved == 0 => HoleStatus::Saturated,
        None => HoleStatus::Indeterminate { open_cells: unresolved },
    };
    (HoleSearch { status, pitch: opts.pitch, region_radius: region, max_clearance: seen, evaluations }, all)
}

/// Depth-first refinement of one top-level cell. Returns the best hole found,
/// the number of cells left open and the largest clearance seen.
fn subdivide(
    grid: &SpatialGrid,
    top: &Point,
    region: f64,
    opts: &HoleOptions,
    counter: &AtomicUsize,
) -> (Option<(Point, f64)>, usize, f64) {
    let dim = grid.dim();
    let threshold = 1.0 - opts.tol;
    let half_diag = (dim as f64).sqrt() / 2.0;
    let mut best: Option<(Point, f64)> = None;
    let mut open = 0usize;
    let mut seen = 0.0f64;
    let mut stack = vec![(top.clone(), opts.pitch, 0u32)];
    while let Some((c, side, depth)) = stack.pop() {
        let children = side / 2.0;
        if depth >= opts.max_depth || counter.load(AtomicOrdering::Relaxed) >= opts.budget {
            let (x, cl) = refine(grid, &c, side / 2.0, region, &[]);
            seen = seen.max(cl);
            if cl >= threshold && x.norm() <= region {
                let f = (x, cl);
                if best.as_ref().map_or(true, |b| better(&f, b)) {
                    best = Some(f);
                }
            } else {
                open += 1;
            }
            continue;
        }
        for mask in 0..(1u32 << dim) {
            let coords: Vec<f64> = (0..dim)
                .map(|d| c[d] + if mask >> d & 1 == 1 { children / 2.0 } else { -children / 2.0 })
                .collect();
            let child = Point::new(coords);
            if cube_distance(&child, children) > region {
                continue;
            }
            counter.fetch_add(1, AtomicOrdering::Relaxed);
            let cl = clearance(grid, &child, &[]);
            seen = seen.max(cl);
            if cl >= threshold && child.norm() <= region {
                let f = (child, cl);
                if best.as_ref().map_or(true, |b| better(&f, b)) {
                    best = Some(f);
                }
            } else if cl + children * half_diag >= threshold {
                stack.push((child, children, depth + 1));
            }
        }
    }
    (best, open, seen)
}

pub fn find_hole(set: &UdSet, region_radius: f64) -> Result<HoleSearch> {
    find_hole_with(set, region_radius, &HoleOptions::default())
}

pub fn find_hole_with(set: &UdSet, region_radius: f64, opts: &HoleOptions) -> Result<HoleSearch> {
    check_region(set, region_radius, opts)?;
    if set.is_empty() {
        return Ok(HoleSearch {
            status: HoleStatus::Hole(HoleWitness { location: Point::origin(set.dim()), clearance: f64::INFINITY }),
            pitch: opts.pitch,
            region_radius,
            max_clearance: f64::INFINITY,
            evaluations: 0,
        });
    }
    let cells = top_cells(set.dim(), region_radius, opts.pitch, opts.budget)?;
    let clear = scan(set.grid(), &cells);
    Ok(search(set.grid(), &cells, &clear, region_radius, opts).0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Saturation {
    pub set: UdSet,
    pub inserted: usize,
    /// Outcome of the final hole search.
    pub last_search: HoleSearch,
}

/// Inserts holes until the hole search finds none. Grid holes of each round
/// are inserted in a seeded random order, deepest first.
pub fn saturate_greedy(set: &UdSet, region_radius: f64, seed: u64) -> Result<Saturation> {
    saturate_greedy_with(set, region_radius, seed, &HoleOptions::default())
}

pub fn saturate_greedy_with(set: &UdSet, region_radius: f64, seed: u64, opts: &HoleOptions) -> Result<Saturation> {
    check_region(set, region_radius, opts)?;
    let dim = set.dim();
    let threshold = 1.0 - opts.tol;
    let cells = top_cells(dim, region_radius, opts.pitch, opts.budget)?;
    let mut grid = SpatialGrid::build(dim, set.points(), SpatialGrid::DEFAULT_CELL)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inserted = 0usize;
    let last_search = loop {
        let clear = scan(&grid, &cells);
        let mut candidates: Vec<(usize, f64)> = clear
            .iter()
            .enumerate()
            .filter(|&(i, &cl)| cl >= threshold && cells[i].norm() <= region_radius)
            .map(|(i, &cl)| (i, cl))
            .collect();
        if candidates.is_empty() {
            let (result, mut found) = search(&grid, &cells, &clear, region_radius, opts);
            if found.is_empty() {
                break result;
            }
            found.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.lex_cmp(&b.0)));
            for (x, _) in found {
                if clearance(&grid, &x, &[]) >= threshold {
                    grid.insert(x)?;
                    inserted += 1;
                }
            }
            continue;
        }
        candidates.shuffle(&mut rng);
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1));
        for (i, _) in candidates {
            if clearance(&grid, &cells[i], &[]) >= threshold {
                grid.insert(cells[i].clone())?;
                inserted += 1;
            }
        }
    };
    let points = grid.points().to_vec();
    let mut out = UdSet::validate(points, dim, set.window_radius())?;
    if let Some(tag) = set.tag() {
        out = out.with_tag(format!("{tag}+saturated(seed={seed})"));
    } else {
        out = out.with_tag(format!("saturated(seed={seed})"));
    }
    Ok(Saturation { set: out, inserted, last_search })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SatStatus {
    Saturated,
    NotSaturated,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MSatVerdict {
    pub status: SatStatus,
    pub m: usize,
    pub pitch: f64,
    /// Points removed by the witness (empty when a plain hole suffices).
    pub removed: Vec<Point>,
    pub inserted: Vec<Point>,
}

impl fmt::Display for MSatVerdict {
    /// `saturated|not-saturated|indeterminate m=<m> pitch=<p> witness=<coords>`,
    /// inserted points separated by `;`, followed by `removed=<coords>` when
    /// points were removed.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            SatStatus::Saturated => "saturated",
            SatStatus::NotSaturated => "not-saturated",
            SatStatus::Indeterminate => "indeterminate",
        };
        let list = |pts: &[Point]| -> String {
            if pts.is_empty() {
                return "-".into();
            }
            pts.iter()
                .map(|p| p.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
                .collect::<Vec<_>>()
                .join(";")
        };
        write!(f, "{status} m={} pitch={} witness={}", self.m, self.pitch, list(&self.inserted))?;
        if !self.removed.is_empty() {
            write!(f, " removed={}", list(&self.removed))?;
        }
        Ok(())
    }
}

/// Local m-saturation: can some `m - 1` points inside the region, all within
/// a ball of radius `cluster_radius`, be replaced by `m` points? Candidate
/// positions are the pitch grid near the removed points, the removed points
/// themselves and pattern-search refinements of nearly free grid points.
pub fn m_saturation_check(set: &UdSet, m: usize, region_radius: f64, cluster_radius: f64) -> Result<MSatVerdict> {
    m_saturation_check_with(set, m, region_radius, cluster_radius, &HoleOptions::default())
}

pub fn m_saturation_check_with(
    set: &UdSet,
    m: usize,
    region_radius: f64,
    cluster_radius: f64,
    opts: &HoleOptions,
) -> Result<MSatVerdict> {
    if !(1..=3).contains(&m) {
        return domain(format!("m must be 1, 2 or 3, got {m}"));
    }
    if !(cluster_radius >= 0.0) {
        return domain(format!("cluster radius must be >= 0, got {cluster_radius}"));
    }
    let verdict = |status, removed, inserted| MSatVerdict { status, m, pitch: opts.pitch, removed, inserted };
    let holes = find_hole_with(set, region_radius, opts)?;
    match holes.status {
        HoleStatus::Hole(w) => return Ok(verdict(SatStatus::NotSaturated, vec![], vec![w.location])),
        HoleStatus::Indeterminate { .. } => return Ok(verdict(SatStatus::Indeterminate, vec![], vec![])),
        HoleStatus::Saturated if m == 1 => return Ok(verdict(SatStatus::Saturated, vec![], vec![])),
        HoleStatus::Saturated => {}
    }

    let grid = set.grid();
    let pts = set.points();
    let inside: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].norm() <= region_radius).collect();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    if m == 2 {
        subsets.extend(inside.iter().map(|&i| vec![i]));
    } else {
        for (k, &i) in inside.iter().enumerate() {
            for &j in &inside[k + 1..] {
                if pts[i].dist(&pts[j]) <= 2.0 * cluster_radius {
                    subsets.push(vec![i, j]);
                }
            }
        }
    }

    let work = AtomicUsize::new(0);
    let outcome: Vec<Option<(Vec<usize>, Vec<Point>)>> = subsets
        .par_iter()
        .map(|s| {
            if work.load(AtomicOrdering::Relaxed) >= opts.budget {
                return None;
            }
            let cands = replacement_candidates(grid, set.dim(), s, region_radius, opts, &work);
            clique(&cands, m, 1.0 - opts.tol, &work, opts.budget).map(|c| (s.clone(), c))
        })
        .collect();
    if let Some((s, inserted)) = outcome.into_iter().flatten().next() {
        let removed = s.iter().map(|&i| pts[i].clone()).collect();
        return Ok(verdict(SatStatus::NotSaturated, removed, inserted));
    }
    if work.load(AtomicOrdering::Relaxed) >= opts.budget {
        return Ok(verdict(SatStatus::Indeterminate, vec![], vec![]));
    }
    Ok(verdict(SatStatus::Saturated, vec![], vec![]))
}

/// Positions inside the region at clearance `>= 1 - tol` from the set
/// without `removed`. Any such position lies within distance 1 of a removed
/// point, since the full set has no hole.
fn replacement_candidates(
    grid: &SpatialGrid,
    dim: usize,
    removed: &[usize],
    region: f64,
    opts: &HoleOptions,
    work: &AtomicUsize,
) -> Vec<Point> {
    let threshold = 1.0 - opts.tol;
    let slack = opts.pitch * (dim as f64).sqrt() / 2.0;
    let mut out: Vec<Point> = removed.iter().map(|&i| grid.points()[i].clone()).filter(|p| p.norm() <= region).collect();
    let mut seen = std::collections::HashSet::new();
    for &i in removed {
        let s = &grid.points()[i];
        let lo: Vec<i64> = s.coords().iter().map(|&x| ((x - 1.0) / opts.pitch).floor() as i64).collect();
        let hi: Vec<i64> = s.coords().iter().map(|&x| ((x + 1.0) / opts.pitch).ceil() as i64).collect();
        let mut idx = lo.clone();
        loop {
            if seen.insert(idx.clone()) {
                let x = Point::new(idx.iter().map(|&k| k as f64 * opts.pitch).collect());
                if x.dist(s) < 1.0 && x.norm() <= region {
                    work.fetch_add(1, AtomicOrdering::Relaxed);
                    let cl = clearance(grid, &x, removed);
                    if cl >= threshold {
                        out.push(x);
                    } else if cl + slack >= threshold {
                        let (y, r) = refine(grid, &x, opts.pitch / 2.0, region, removed);
                        if r >= threshold && out.iter().all(|p| p.dist(&y) > 1e-7) {
                            out.push(y);
                        }
                    }
                }
            }
            let mut d = 0;
            while d < dim {
                idx[d] += 1;
                if idx[d] <= hi[d] {
                    break;
                }
                idx[d] = lo[d];
                d += 1;
            }
            if d == dim {
                break;
            }
        }
    }
    out
}

/// First set of `m` candidates pairwise at least `threshold` apart, in
/// index order.
fn clique(cands: &[Point], m: usize, threshold: f64, work: &AtomicUsize, budget: usize) -> Option<Vec<Point>> {
    fn extend(
        cands: &[Point],
        m: usize,
        threshold: f64,
        chosen: &mut Vec<usize>,
        from: usize,
        work: &AtomicUsize,
        budget: usize,
    ) -> bool {
        if chosen.len() == m {
            return true;
        }
        for k in from..cands.len() {
            if work.fetch_add(1, AtomicOrdering::Relaxed) >= budget {
                return false;
            }
            if chosen.iter().all(|&c| cands[c].dist(&cands[k]) >= threshold) {
                chosen.push(k);
                if extend(cands, m, threshold, chosen, k + 1, work, budget) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    extend(cands, m, threshold, &mut chosen, 0, work, budget).then(|| chosen.iter().map(|&k| cands[k].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::udset::{gen_lattice, gen_rsa, Lattice};

    fn p2(x: f64, y: f64) -> Point {
        Point::new(vec![x, y])
    }

    #[test]
    fn z2_is_saturated() {
        let z2 = gen_lattice(&Lattice::Cubic(2).basis(), 6.0).unwrap();
        let r = find_hole(&z2, 5.0).unwrap();
        assert!(r.is_saturated(), "{r:?}");
        assert!((r.max_clearance - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_set_has_hole_at_origin() {
        let r = find_hole(&UdSet::empty(3, 3.0), 2.0).unwrap();
        let w = r.witness().unwrap();
        assert_eq!(w.location, Point::origin(3));
        assert_eq!(w.clearance, f64::INFINITY);
    }

    #[test]
    fn region_margin_is_enforced() {
        let z2 = gen_lattice(&Lattice::Cubic(2).basis(), 6.0).unwrap();
        assert!(find_hole(&z2, 5.5).is_err());
    }

    #[test]
    fn planted_holes_are_found() {
        // Hexagonal packing scaled so that its deep holes clear 1 by 1e-3.
        let s = (1.0 + 1e-3) * 3f64.sqrt();
        let hex = gen_lattice(&Lattice::Hexagonal.basis(), 8.0 / s).unwrap();
        for shift in [(0.0, 0.0), (0.13, 0.31), (-0.4, 0.27)] {
            let pts: Vec<Point> = hex.points().iter().map(|p| p2(p[0] * s + shift.0, p[1] * s + shift.1)).collect();
            let pts: Vec<Point> = pts.into_iter().filter(|p| p.norm() <= 7.0).collect();
            let set = UdSet::validate(pts, 2, 7.0).unwrap();
            let r = find_hole(&set, 4.0).unwrap();
            let w = r.witness().unwrap_or_else(|| panic!("{r:?}"));
            assert!(w.clearance >= 1.0 - 1e-9);
            assert!(set.grid().clearance(&w.location, 2.0).unwrap() >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn greedy_on_saturated_set_is_identity() {
        let z2 = gen_lattice(&Lattice::Cubic(2).basis(), 6.0).unwrap();
        let out = saturate_greedy(&z2, 5.0, 1).unwrap();
        assert_eq!(out.inserted, 0);
        assert_eq!(out.set.points(), z2.points());
    }

    #[test]
    fn greedy_from_empty_is_maximal_and_idempotent() {
        let out = saturate_greedy(&UdSet::empty(2, 6.0), 5.0, 3).unwrap();
        assert!(out.inserted > 20);
        assert!(out.last_search.is_saturated());
        assert!(find_hole(&out.set, 5.0).unwrap().is_saturated());
        let again = saturate_greedy(&out.set, 5.0, 3).unwrap();
        assert_eq!(again.set.points(), out.set.points());
        let other = saturate_greedy(&UdSet::empty(2, 6.0), 5.0, 3).unwrap();
        assert_eq!(other.set, out.set);
    }

    #[test]
    fn greedy_keeps_the_input() {
        let rsa = gen_rsa(2, 6.0, 9, 30).unwrap();
        let out = saturate_greedy(&rsa, 5.0, 2).unwrap();
        assert!(rsa.is_subset_of(&out.set));
    }

    #[test]
    fn m_saturation_of_hexagonal_packing() {
        let hex = gen_lattice(&Lattice::Hexagonal.basis(), 5.0).unwrap();
        let v = m_saturation_check(&hex, 2, 3.0, 1.0).unwrap();
        assert_eq!(v.status, SatStatus::Saturated);
        assert_eq!(v.to_string(), "saturated m=2 pitch=0.25 witness=-");
        let v3 = m_saturation_check(&hex, 3, 2.0, 0.5).unwrap();
        assert_eq!(v3.status, SatStatus::Saturated);
    }

    #[test]
    fn m1_reports_hole() {
        let z4 = gen_lattice(&Lattice::Cubic(4).basis(), 3.0).unwrap();
        let v = m_saturation_check(&z4, 1, 2.0, 1.0).unwrap();
        assert_eq!(v.status, SatStatus::NotSaturated);
        assert!(v.inserted[0].coords().iter().all(|c| (c.abs() % 1.0 - 0.5).abs() < 1e-12));
        assert!(v.to_string().starts_with("not-saturated m=1 pitch=0.25 witness="));
        assert!(m_saturation_check(&z4, 4, 2.0, 1.0).is_err());
    }
}
