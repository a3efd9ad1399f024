//! Volumetric primitives (balls, caps, lenses), annuli, orthogonal maps and a
//! uniform-grid spatial index.
//!
//! Cap volumes use the hyperspherical-cap reduction to the regularized
//! incomplete beta function, so every ball/ball intersection below is exact
//! up to floating point.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::Index;

use rand::Rng;
use smallvec::SmallVec;
use statrs::function::beta::beta_reg;

use crate::error::{domain, Error, Result};

/// Largest ambient dimension accepted by the volume routines.
pub const MAX_DIM: usize = 100;

/// Default absolute tolerance for geometric predicates.
pub const GEOM_TOL: f64 = 1e-9;

/// A point of R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist2(&self.0, &other.0).sqrt()
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        dist2(&self.0, &other.0)
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| 0.5 * (a + b)).collect())
    }

    /// Lexicographic total order on coordinates.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return domain(format!("dimension must be in 1..={MAX_DIM}, got {n}"));
    }
    Ok(())
}

/// Volume of the unit ball, via v_n = (2π/n) v_{n-2}.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    check_dim(n)?;
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    Ok(v)
}

/// Volume of an n-ball of radius `r`.
pub fn ball_volume(n: usize, r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return domain(format!("radius must be finite and >= 0, got {r}"));
    }
    Ok(unit_ball_volume(n)? * r.powi(n as i32))
}

/// Volume of the cap of height `h` cut from an n-ball of radius `r`.
pub fn cap_volume(n: usize, r: f64, h: f64) -> Result<f64> {
    let full = ball_volume(n, r)?;
    if !(0.0..=2.0 * r).contains(&h) {
        return domain(format!("cap height {h} outside [0, {}]", 2.0 * r));
    }
    Ok(cap_unchecked(n, r, h, full))
}

fn cap_unchecked(n: usize, r: f64, h: f64, full: f64) -> f64 {
    if h <= 0.0 || r == 0.0 {
        return 0.0;
    }
    if h >= 2.0 * r {
        return full;
    }
    if h > r {
        return full - cap_unchecked(n, r, 2.0 * r - h, full);
    }
    match n {
        1 => return h,
        2 => {
            let c = r - h;
            return r * r * (c / r).clamp(-1.0, 1.0).acos() - c * (h * (2.0 * r - h)).max(0.0).sqrt();
        }
        _ => {}
    }
    let x = (h * (2.0 * r - h) / (r * r)).clamp(0.0, 1.0);
    0.5 * full * beta_reg((n as f64 + 1.0) / 2.0, 0.5, x)
}

/// Volume of the intersection of two n-balls with radii `r1`, `r2` whose
/// centers are `d` apart.
pub fn lens_volume(n: usize, r1: f64, r2: f64, d: f64) -> Result<f64> {
    if !(r1 > 0.0 && r2 > 0.0 && d >= 0.0) {
        return domain(format!("lens needs r1, r2 > 0 and d >= 0 (r1={r1}, r2={r2}, d={d})"));
    }
    check_dim(n)?;
    Ok(lens_unchecked(n, r1, r2, d))
}

pub(crate) fn lens_unchecked(n: usize, r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    let vn = unit_ball_volume(n).expect("dimension checked by caller");
    if d <= (r1 - r2).abs() {
        return vn * r1.min(r2).powi(n as i32);
    }
    // Signed distance from the first center to the radical hyperplane.
    let x1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let h1 = (r1 - x1).clamp(0.0, 2.0 * r1);
    let h2 = (r2 - (d - x1)).clamp(0.0, 2.0 * r2);
    cap_unchecked(n, r1, h1, vn * r1.powi(n as i32)) + cap_unchecked(n, r2, h2, vn * r2.powi(n as i32))
}

/// Closed annulus C(lo, hi) = {x : lo <= |x| <= hi}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Annulus {
    lo: f64,
    hi: f64,
}

impl Annulus {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi >= lo) {
            return domain(format!("annulus needs 0 <= lo <= hi (lo={lo}, hi={hi})"));
        }
        Ok(Annulus { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains_norm(&self, r: f64) -> bool {
        self.lo <= r && r <= self.hi
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.contains_norm(x.norm())
    }
}

/// An orthogonal n×n matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl RotationMatrix {
    pub const ORTHOGONALITY_TOL: f64 = 1e-12;

    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return domain(format!("rotation needs {} entries, got {}", n * n, entries.len()));
        }
        let m = RotationMatrix { n, entries };
        let defect = m.orthogonality_defect();
        if !(defect <= Self::ORTHOGONALITY_TOL) {
            return domain(format!("matrix is not orthogonal (max |MᵀM - I| = {defect:e})"));
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        RotationMatrix { n, entries }
    }

    /// Rotation by `angle` in the (i, j) coordinate plane.
    pub fn plane(n: usize, i: usize, j: usize, angle: f64) -> Result<Self> {
        if i >= n || j >= n || i == j {
            return domain(format!("invalid rotation plane ({i}, {j}) in dimension {n}"));
        }
        let mut m = Self::identity(n);
        let (s, c) = angle.sin_cos();
        m.entries[i * n + i] = c;
        m.entries[i * n + j] = -s;
        m.entries[j * n + i] = s;
        m.entries[j * n + j] = c;
        Ok(m)
    }

    /// A random orthogonal matrix: Gram-Schmidt on uniform entries. Not
    /// Haar-distributed, which is fine for invariance checks.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
            let mut ok = true;
            for _ in 0..n {
                let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                // Two passes keep the result orthogonal to machine precision.
                for _ in 0..2 {
                    for u in &rows {
                        let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                        for (a, b) in v.iter_mut().zip(u) {
                            *a -= dot * b;
                        }
                    }
                }
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if norm < 1e-6 {
                    ok = false;
                    break;
                }
                v.iter_mut().for_each(|a| *a /= norm);
                rows.push(v);
            }
            if ok {
                return RotationMatrix { n, entries: rows.concat() };
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| self.entries[k * n + i] * self.entries[k * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        if worst.is_nan() {
            f64::INFINITY
        } else {
            worst
        }
    }

    pub fn apply(&self, x: &Point) -> Point {
        let n = self.n;
        Point::new(
            (0..n)
                .map(|i| (0..n).map(|k| self.entries[i * n + k] * x[k]).sum())
                .collect(),
        )
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &RotationMatrix) -> RotationMatrix {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = (0..n).map(|k| self.entries[i * n + k] * other.entries[k * n + j]).sum();
            }
        }
        RotationMatrix { n, entries }
    }

    pub fn transpose(&self) -> RotationMatrix {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        RotationMatrix { n, entries }
    }
}

type CellKey = SmallVec<[i64; 6]>;

/// Uniform grid over a fixed point set. Every stored point lives in the cell
/// `floor(coord / cell)`.
#[derive(Clone, Debug)]
pub struct SpatialGrid {
    dim: usize,
    cell: f64,
    points: Vec<Point>,
    cells: HashMap<CellKey, Vec<u32>>,
}

impl SpatialGrid {
    pub const DEFAULT_CELL: f64 = 1.0;

    pub fn new(dim: usize, cell: f64) -> Result<Self> {
        if dim == 0 {
            return domain("grid dimension must be >= 1");
        }
        if !(cell > 0.0) || !cell.is_finite() {
            return domain(format!("grid cell size must be positive, got {cell}"));
        }
        Ok(SpatialGrid { dim, cell, points: Vec::new(), cells: HashMap::new() })
    }

    pub fn build(dim: usize, points: &[Point], cell: f64) -> Result<Self> {
        let mut grid = Self::new(dim, cell)?;
        for p in points {
            grid.insert(p.clone())?;
        }
        Ok(grid)
    }

    pub(crate) fn insert(&mut self, p: Point) -> Result<usize> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: p.dim() });
        }
        let idx = self.points.len();
        let key = self.key(&p);
        self.cells.entry(key).or_default().push(idx as u32);
        self.points.push(p);
        Ok(idx)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    fn key(&self, p: &Point) -> CellKey {
        p.coords().iter().map(|c| (c / self.cell).floor() as i64).collect()
    }

    /// Indices of stored points at distance <= `radius` from `x`.
    pub fn neighbors_within(&self, x: &Point, radius: f64) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each_within(x, radius, |i, _| out.push(i))?;
        out.sort_unstable();
        Ok(out)
    }

    /// True when some stored point lies within `radius` of `x`.
    pub fn any_within(&self, x: &Point, radius: f64) -> Result<bool> {
        let mut found = false;
        self.for_each_within(x, radius, |_, _| found = true)?;
        Ok(found)
    }

    /// Calls `f(index, squared_distance)` for each stored point within
    /// `radius` of `x`, in no particular order.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, x: &Point, radius: f64, mut f: F) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        if !(radius >= 0.0) {
            return domain(format!("query radius must be >= 0, got {radius}"));
        }
        if self.points.is_empty() {
            return Ok(());
        }
        let r2 = radius * radius;
        let xc = x.coords();
        let lo: CellKey = xc.iter().map(|c| ((c - radius) / self.cell).floor() as i64).collect();
        let hi: CellKey = xc.iter().map(|c| ((c + radius) / self.cell).floor() as i64).collect();
        let span: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as f64).product();

        let mut visit = |key: &[i64], members: &Vec<u32>| {
            if self.cell_min_dist2(xc, key) > r2 {
                return;
            }
            for &i in members {
                let d2 = dist2(xc, self.points[i as usize].coords());
                if d2 <= r2 {
                    f(i as usize, d2);
                }
            }
        };

        if span > self.cells.len() as f64 {
            for (key, members) in &self.cells {
                if key.iter().zip(lo.iter().zip(&hi)).all(|(k, (a, b))| a <= k && k <= b) {
                    visit(key, members);
                }
            }
            return Ok(());
        }

        let mut cur = lo.clone();
        loop {
            if let Some(members) = self.cells.get(&cur[..]) {
                visit(&cur, members);
            }
            // odometer increment
            let mut k = 0;
            loop {
                if k == self.dim {
                    return Ok(());
                }
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
                k += 1;
            }
        }
    }

    fn cell_min_dist2(&self, x: &[f64], key: &[i64]) -> f64 {
        let mut s = 0.0;
        for (c, &k) in x.iter().zip(key) {
            let a = k as f64 * self.cell;
            let b = a + self.cell;
            let d = if *c < a {
                a - c
            } else if *c > b {
                c - b
            } else {
                0.0
            };
            s += d * d;
        }
        s
    }

    /// Nearest stored point and its distance; `None` on an empty grid.
    pub fn nearest(&self, x: &Point) -> Result<Option<(usize, f64)>> {
        if self.points.is_empty() {
            if x.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: x.dim() });
            }
            return Ok(None);
        }
        let mut radius = self.cell;
        loop {
            let mut best: Option<(usize, f64)> = None;
            self.for_each_within(x, radius, |i, d2| {
                if best.map_or(true, |(bi, bd)| d2 < bd || (d2 == bd && i < bi)) {
                    best = Some((i, d2));
                }
            })?;
            if let Some((i, d2)) = best {
                return Ok(Some((i, d2.sqrt())));
            }
            radius *= 2.0;
        }
    }

    /// Distance from `x` to the stored set, capped at `cap` (returned when
    /// nothing lies within `cap`).
    pub fn clearance(&self, x: &Point, cap: f64) -> Result<f64> {
        // a hit within r is the nearest point, so widen only on a miss
        let mut r = self.cell.min(cap);
        loop {
            let mut best = f64::INFINITY;
            self.for_each_within(x, r, |_, d2| best = best.min(d2))?;
            if best.is_finite() {
                return Ok(best.sqrt());
            }
            if r >= cap {
                return Ok(cap);
            }
            r = (2.0 * r).min(cap);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn ball_volume_examples() {
        assert!((ball_volume(2, 1.0).unwrap() - PI).abs() < 1e-14);
        assert!((ball_volume(1, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((ball_volume(3, 0.5).unwrap() - PI / 6.0).abs() < 1e-14);
        assert!((unit_ball_volume(4).unwrap() - PI * PI / 2.0).abs() < 1e-13);
        assert!(ball_volume(0, 1.0).is_err());
        assert!(ball_volume(2, -1.0).is_err());
        assert!(ball_volume(101, 1.0).is_err());
    }

    #[test]
    fn cap_volume_examples() {
        for n in 1..=6 {
            assert_eq!(cap_volume(n, 1.3, 0.0).unwrap(), 0.0);
            let half = cap_volume(n, 1.3, 1.3).unwrap();
            assert!((half - ball_volume(n, 1.3).unwrap() / 2.0).abs() < 1e-12);
            let full = cap_volume(n, 1.3, 2.6).unwrap();
            assert!((full - ball_volume(n, 1.3).unwrap()).abs() < 1e-12);
        }
        // classical n = 3 formula π h² (3r − h) / 3
        let oracle = PI * 0.25 * (3.0 - 0.5) / 3.0;
        assert!((cap_volume(3, 1.0, 0.5).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 0.65449847).abs() < 1e-8);
        assert!(cap_volume(3, 1.0, 2.5).is_err());
        assert!(cap_volume(3, 1.0, -0.1).is_err());
    }

    #[test]
    fn cap_matches_circular_segment_in_2d() {
        // segment area r² acos((r-h)/r) - (r-h) sqrt(2rh - h²)
        let r: f64 = 0.7;
        for &h in &[0.05, 0.3, 0.7, 1.1, 1.35] {
            let oracle = r * r * ((r - h) / r).acos() - (r - h) * (2.0 * r * h - h * h).sqrt();
            assert!((cap_volume(2, r, h).unwrap() - oracle).abs() < 1e-12, "h = {h}");
        }
    }

    #[test]
    fn cap_complementarity() {
        for n in 1..=7 {
            for k in 0..=20 {
                let h = 2.0 * k as f64 / 20.0;
                let s = cap_volume(n, 1.0, h).unwrap() + cap_volume(n, 1.0, 2.0 - h).unwrap();
                assert!((s - ball_volume(n, 1.0).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lens_examples() {
        assert_eq!(lens_volume(2, 0.5, 0.5, 1.0).unwrap(), 0.0);
        assert!((lens_volume(2, 0.5, 0.5, 0.0).unwrap() - PI / 4.0).abs() < 1e-14);
        // closed 2-D lens: 2r² acos(d/2r) - (d/2) sqrt(4r² - d²)
        let oracle = 2.0 * 0.25 * (0.5f64).acos() - 0.25 * (1.0f64 - 0.25).sqrt();
        let v = lens_volume(2, 0.5, 0.5, 0.5).unwrap();
        assert!((v - oracle).abs() < 1e-13);
        assert!((v - 0.30709242).abs() < 1e-8);
        assert!(lens_volume(2, -0.5, 0.5, 0.5).is_err());
        assert!(lens_volume(2, 0.5, 0.5, -0.1).is_err());
    }

    #[test]
    fn lens_unequal_radii_contained() {
        let v = lens_volume(3, 2.0, 0.5, 1.0).unwrap();
        assert!((v - ball_volume(3, 0.5).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn lens_symmetric_and_monotone() {
        for n in 1..=5 {
            let (r1, r2) = (0.8, 0.5);
            let mut prev = f64::INFINITY;
            for k in 0..=40 {
                let d = (r1 - r2) + k as f64 * (r1 + r2 - (r1 - r2)) / 40.0;
                let a = lens_volume(n, r1, r2, d).unwrap();
                let b = lens_volume(n, r2, r1, d).unwrap();
                assert!((a - b).abs() < 1e-12 * a.max(1e-300) + 1e-15, "n={n} d={d} {a} {b}");
                assert!(a <= prev + 1e-14);
                prev = a;
            }
        }
    }

    #[test]
    fn grid_neighbor_examples() {
        let mut pts = Vec::new();
        for i in -3..=3 {
            for j in -3..=3 {
                pts.push(Point::new(vec![i as f64, j as f64]));
            }
        }
        let grid = SpatialGrid::build(2, &pts, 1.0).unwrap();
        let hits = grid.neighbors_within(&Point::new(vec![0.0, 0.0]), 1.0).unwrap();
        let mut found: Vec<_> = hits.iter().map(|&i| pts[i].clone().into_coords()).collect();
        found.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            found,
            vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        assert!(grid.neighbors_within(&Point::new(vec![0.3, 0.3]), 0.0).unwrap().is_empty());

        let two = vec![Point::new(vec![0.0, 0.0]), Point::new(vec![3.0, 0.0])];
        let g2 = SpatialGrid::build(2, &two, 1.0).unwrap();
        assert_eq!(g2.neighbors_within(&Point::new(vec![1.0, 0.0]), 1.5).unwrap(), vec![0]);
        assert!(g2.neighbors_within(&Point::new(vec![1.0]), 1.5).is_err());
    }

    #[test]
    fn grid_nearest_and_clearance() {
        let pts = vec![Point::new(vec![0.0, 0.0]), Point::new(vec![10.0, 0.0])];
        let g = SpatialGrid::build(2, &pts, 1.0).unwrap();
        let (i, d) = g.nearest(&Point::new(vec![7.0, 1.0])).unwrap().unwrap();
        assert_eq!(i, 1);
        assert!((d - 10f64.sqrt()).abs() < 1e-14);
        assert_eq!(g.clearance(&Point::new(vec![5.0, 0.0]), 1.0).unwrap(), 1.0);
        let empty = SpatialGrid::new(2, 1.0).unwrap();
        assert!(empty.nearest(&Point::origin(2)).unwrap().is_none());
    }

    #[test]
    fn rotation_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=5 {
            let r = RotationMatrix::random(n, &mut rng);
            assert!(r.orthogonality_defect() < 1e-13);
            assert!(RotationMatrix::new(n, r.entries().to_vec()).is_ok());
        }
        assert!(RotationMatrix::new(2, vec![1.0, 0.1, 0.0, 1.0]).is_err());
        let q = RotationMatrix::plane(2, 0, 1, std::f64::consts::FRAC_PI_2).unwrap();
        let y = q.apply(&Point::new(vec![1.0, 0.0]));
        assert!(y[0].abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lens_matches_monte_carlo() {
        // 2-D lens r1 = r2 = 0.5, d = 0.5 by sampling the bounding box.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = 2_000_000;
        let mut hits = 0u64;
        for _ in 0..samples {
            let x: f64 = rng.gen_range(-0.5..1.0);
            let y: f64 = rng.gen_range(-0.5..0.5);
            if x * x + y * y <= 0.25 && (x - 0.5) * (x - 0.5) + y * y <= 0.25 {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        let est = p * 1.5;
        let se = 1.5 * (p * (1.0 - p) / samples as f64).sqrt();
        let exact = lens_volume(2, 0.5, 0.5, 0.5).unwrap();
        assert!((est - exact).abs() < 4.0 * se, "est {est} exact {exact} se {se}");
    }
}
