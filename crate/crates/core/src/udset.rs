//! Finite-window uniformly discrete sets of constant 1.
//!
//! A [`UdSet`] stands for the intersection of a (conceptually infinite)
//! packing of balls of radius 1/2 with the window `B(0, R_w)`. Points are
//! kept sorted lexicographically so equality is canonical.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::geom::{Annulus, Point, RotationMatrix, SpatialGrid, GEOM_TOL};

/// Slack allowed below the packing constant 1 when validating.
pub const TOL_MIN: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct UdSet {
    dim: usize,
    window: f64,
    points: Vec<Point>,
    tag: Option<String>,
    grid: OnceLock<SpatialGrid>,
}

impl PartialEq for UdSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.window == other.window && self.points == other.points
    }
}

impl UdSet {
    /// Validates `points` as a packing (pairwise distance >= 1 - TOL_MIN)
    /// inside `B(0, window)`.
    pub fn validate(points: Vec<Point>, dim: usize, window: f64) -> Result<Self> {
        Self::validate_with_tol(points, dim, window, TOL_MIN)
    }

    pub fn validate_with_tol(points: Vec<Point>, dim: usize, window: f64, tol_min: f64) -> Result<Self> {
        if dim == 0 {
            return domain("dimension must be >= 1");
        }
        if !(window >= 0.0) || !window.is_finite() {
            return domain(format!("window radius must be finite and >= 0, got {window}"));
        }
        for (index, p) in points.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
            if !p.is_finite() {
                return domain(format!("point #{index} has non-finite coordinates"));
            }
            let norm = p.norm();
            if norm > window + GEOM_TOL {
                return Err(Error::OutOfWindow { index, point: p.clone(), norm, window });
            }
        }
        if let Some((i, j, d)) = closest_violation(&points, dim, 1.0 - tol_min)? {
            return Err(Error::MinDistanceViolation {
                first: i,
                second: j,
                a: points[i].clone(),
                b: points[j].clone(),
                distance: d,
            });
        }
        Ok(Self::from_valid(points, dim, window, None))
    }

    /// The empty packing.
    pub fn empty(dim: usize, window: f64) -> Self {
        Self::from_valid(Vec::new(), dim, window, None)
    }

    pub(crate) fn from_valid(mut points: Vec<Point>, dim: usize, window: f64, tag: Option<String>) -> Self {
        points.sort_by(|a, b| a.lex_cmp(b));
        UdSet { dim, window, points, tag, grid: OnceLock::new() }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }

    pub fn tag(&self) -> Option<&str> {
        self.tag.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window_radius(&self) -> f64 {
        self.window
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Spatial index (cell size 1) over the points, built on first use.
    pub fn grid(&self) -> &SpatialGrid {
        self.grid.get_or_init(|| {
            SpatialGrid::build(self.dim, &self.points, SpatialGrid::DEFAULT_CELL).expect("validated points")
        })
    }

    /// Norms of all points, ascending.
    pub fn sorted_norms(&self) -> Vec<f64> {
        let mut norms: Vec<f64> = self.points.iter().map(Point::norm).collect();
        norms.sort_by(f64::total_cmp);
        norms
    }

    /// Smallest pairwise distance, if at least two points exist.
    pub fn min_distance(&self) -> Option<f64> {
        let grid = self.grid();
        let mut best = f64::INFINITY;
        let mut radius = 1.5;
        while best.is_infinite() && self.points.len() >= 2 {
            for (i, p) in self.points.iter().enumerate() {
                grid.for_each_within(p, radius, |j, d2| {
                    if j != i {
                        best = best.min(d2);
                    }
                })
                .expect("dimension checked");
            }
            radius *= 4.0;
        }
        best.is_finite().then(|| best.sqrt())
    }

    /// Whether the packing constant 1 is attained by some pair (within
    /// `GEOM_TOL`). Reported, never enforced.
    pub fn attains_constant(&self) -> bool {
        let grid = self.grid();
        self.points.iter().enumerate().any(|(i, p)| {
            let mut hit = false;
            grid.for_each_within(p, 1.0 + GEOM_TOL, |j, d2| {
                if j != i && d2.sqrt() >= 1.0 - GEOM_TOL {
                    hit = true;
                }
            })
            .expect("dimension checked");
            hit
        })
    }

    /// Index of a stored point within `tol` of `x`.
    pub fn find_point(&self, x: &Point, tol: f64) -> Option<usize> {
        let mut found = None;
        self.grid()
            .for_each_within(x, tol, |i, _| {
                found.get_or_insert(i);
            })
            .ok()?;
        found
    }

    /// Partial order of packings: `self ⊂ other` (point-wise within `GEOM_TOL`).
    pub fn is_subset_of(&self, other: &UdSet) -> bool {
        self.dim == other.dim && self.points.iter().all(|p| other.find_point(p, GEOM_TOL).is_some())
    }

    /// Rigid motion `ρ(Λ) + t`; the window grows to `R_w + |t|`.
    pub fn transform(&self, motion: &RigidMotion) -> Result<UdSet> {
        if motion.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: motion.dim() });
        }
        let defect = motion.rotation.orthogonality_defect();
        if !(defect <= RotationMatrix::ORTHOGONALITY_TOL) {
            return domain(format!("rotation is not orthogonal (defect {defect:e})"));
        }
        let points = self.points.iter().map(|p| motion.apply(p)).collect();
        Ok(Self::from_valid(points, self.dim, self.window + motion.translation.norm(), self.tag.clone()))
    }

    /// Translation by `t` (a rigid motion with identity rotation).
    pub fn translate(&self, t: &Point) -> Result<UdSet> {
        self.transform(&RigidMotion::translation(t.clone()))
    }

    /// Points with `lo <= |x| <= hi`.
    pub fn restrict_annulus(&self, annulus: &Annulus) -> UdSet {
        let points = self.points.iter().filter(|p| annulus.contains(p)).cloned().collect();
        Self::from_valid(points, self.dim, self.window, self.tag.clone())
    }

    /// Points with `|x| <= radius`, keeping the window radius.
    pub fn restrict_ball(&self, radius: f64) -> UdSet {
        let points = self.points.iter().filter(|p| p.norm() <= radius).cloned().collect();
        Self::from_valid(points, self.dim, self.window, self.tag.clone())
    }

    /// Same set with a smaller or equal window; points beyond it are dropped.
    pub fn with_window(&self, window: f64) -> UdSet {
        let points = self.points.iter().filter(|p| p.norm() <= window + GEOM_TOL).cloned().collect();
        Self::from_valid(points, self.dim, window, self.tag.clone())
    }

    /// Set without the point at `index` (in sorted order).
    pub fn without(&self, index: usize) -> UdSet {
        let mut points = self.points.clone();
        points.remove(index);
        Self::from_valid(points, self.dim, self.window, self.tag.clone())
    }

    /// Union of two packings. Points closer than `TOL_MIN` are merged.
    pub fn union_checked(&self, other: &UdSet) -> Result<UdSet> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut points = self.points.clone();
        for p in &other.points {
            if self.find_point(p, TOL_MIN).is_none() {
                points.push(p.clone());
            }
        }
        let window = self.window.max(other.window);
        let mut out = Self::validate(points, self.dim, window)?;
        out.tag = match (&self.tag, &other.tag) {
            (Some(a), Some(b)) => Some(format!("{a}+{b}")),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        Ok(out)
    }
}

/// First (lowest-index) pair closer than `threshold`, with its distance.
fn closest_violation(points: &[Point], dim: usize, threshold: f64) -> Result<Option<(usize, usize, f64)>> {
    if points.len() < 2 {
        return Ok(None);
    }
    let grid = SpatialGrid::build(dim, points, SpatialGrid::DEFAULT_CELL)?;
    let t2 = threshold * threshold;
    for (i, p) in points.iter().enumerate() {
        let mut worst: Option<(usize, f64)> = None;
        grid.for_each_within(p, threshold, |j, d2| {
            if j > i && d2 < t2 && worst.map_or(true, |(wj, _)| j < wj) {
                worst = Some((j, d2));
            }
        })?;
        if let Some((j, d2)) = worst {
            return Ok(Some((i, j, d2.sqrt())));
        }
    }
    Ok(None)
}

/// Euclidean displacement `x ↦ ρ(x) + t`.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidMotion {
    pub rotation: RotationMatrix,
    pub translation: Point,
}

impl RigidMotion {
    pub fn new(rotation: RotationMatrix, translation: Point) -> Result<Self> {
        if rotation.dim() != translation.dim() {
            return Err(Error::DimensionMismatch { expected: rotation.dim(), found: translation.dim() });
        }
        Ok(RigidMotion { rotation, translation })
    }

    pub fn identity(dim: usize) -> Self {
        RigidMotion { rotation: RotationMatrix::identity(dim), translation: Point::origin(dim) }
    }

    pub fn translation(t: Point) -> Self {
        RigidMotion { rotation: RotationMatrix::identity(t.dim()), translation: t }
    }

    pub fn dim(&self) -> usize {
        self.rotation.dim()
    }

    pub fn apply(&self, x: &Point) -> Point {
        self.rotation.apply(x).add(&self.translation)
    }

    /// `(ρ, t)(ρ', t') = (ρρ', ρ(t') + t)`.
    pub fn compose(&self, other: &RigidMotion) -> RigidMotion {
        RigidMotion {
            rotation: self.rotation.compose(&other.rotation),
            translation: self.rotation.apply(&other.translation).add(&self.translation),
        }
    }
}

/// Named lattices understood by [`gen_lattice`] callers.
#[derive(Clone, Debug, PartialEq)]
pub enum Lattice {
    /// The integer lattice Z^n.
    Cubic(usize),
    /// The planar hexagonal lattice A2.
    Hexagonal,
    /// Face-centred cubic (D3).
    Fcc,
    /// The checkerboard lattice D4.
    D4,
    /// Rows of the matrix are basis vectors.
    Custom(Vec<Vec<f64>>),
}

impl Lattice {
    pub fn basis(&self) -> Vec<Vec<f64>> {
        match self {
            Lattice::Cubic(n) => (0..*n)
                .map(|i| (0..*n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            Lattice::Hexagonal => vec![vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]],
            Lattice::Fcc => vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]],
            Lattice::D4 => vec![
                vec![1.0, 1.0, 0.0, 0.0],
                vec![1.0, -1.0, 0.0, 0.0],
                vec![0.0, 1.0, -1.0, 0.0],
                vec![0.0, 0.0, 1.0, -1.0],
            ],
            Lattice::Custom(b) => b.clone(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Lattice::Cubic(n) => format!("Z{n}"),
            Lattice::Hexagonal => "hex".into(),
            Lattice::Fcc => "fcc".into(),
            Lattice::D4 => "d4".into(),
            Lattice::Custom(_) => "custom".into(),
        }
    }
}

impl std::str::FromStr for Lattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "hex" | "hexagonal" | "a2" => Ok(Lattice::Hexagonal),
            "fcc" | "d3" => Ok(Lattice::Fcc),
            "d4" => Ok(Lattice::D4),
            _ => match lower.strip_prefix('z').map(str::parse::<usize>) {
                Some(Ok(n)) if n >= 1 => Ok(Lattice::Cubic(n)),
                _ => domain(format!("unknown lattice '{s}' (expected Z<n>, hex, fcc or d4)")),
            },
        }
    }
}

/// Default cap on the number of coefficient vectors examined by
/// [`gen_lattice`].
pub const LATTICE_BUDGET: u64 = 200_000_000;

/// All points of the lattice spanned by the rows of `basis`, rescaled so its
/// shortest nonzero vector has length 1, with norm <= `window`.
pub fn gen_lattice(basis: &[Vec<f64>], window: f64) -> Result<UdSet> {
    gen_lattice_with_budget(basis, window, LATTICE_BUDGET)
}

pub fn gen_lattice_with_budget(basis: &[Vec<f64>], window: f64, budget: u64) -> Result<UdSet> {
    let n = basis.len();
    if n == 0 || basis.iter().any(|row| row.len() != n) {
        return domain("basis must be a non-empty square matrix");
    }
    if !(window >= 0.0) || !window.is_finite() {
        return domain(format!("window radius must be finite and >= 0, got {window}"));
    }
    let inv = invert(basis).ok_or_else(|| Error::Domain("basis is singular".into()))?;
    // |c_i| <= |v| · |column i of B⁻¹| for v = c·B.
    let col_norms: Vec<f64> = (0..n).map(|i| (0..n).map(|k| inv[k][i] * inv[k][i]).sum::<f64>().sqrt()).collect();

    let shortest_basis = basis.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(f64::INFINITY, f64::min);
    let bounds: Vec<i64> = col_norms.iter().map(|c| (shortest_basis * c + 1e-9).floor() as i64).collect();
    let mut shortest2 = f64::INFINITY;
    enumerate_box(basis, &bounds, budget, "shortest-vector search", |v| {
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 0.0 && n2 < shortest2 {
            shortest2 = n2;
        }
    })?;
    let scale = 1.0 / shortest2.sqrt();
    let scaled: Vec<Vec<f64>> = basis.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();

    let bounds: Vec<i64> = col_norms.iter().map(|c| (window * c / scale + 1e-9).floor() as i64).collect();
    let mut points = Vec::new();
    enumerate_box(&scaled, &bounds, budget, "window enumeration", |v| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= window + GEOM_TOL {
            points.push(Point::new(v.to_vec()));
        }
    })?;
    Ok(UdSet::from_valid(points, n, window, None))
}

/// Calls `f` with `c·B` for every integer vector `c` with `|c_i| <= bounds[i]`.
fn enumerate_box<F: FnMut(&[f64])>(basis: &[Vec<f64>], bounds: &[i64], budget: u64, what: &str, mut f: F) -> Result<()> {
    let n = basis.len();
    let total: f64 = bounds.iter().map(|b| (2 * b + 1) as f64).product();
    if total > budget as f64 {
        return Err(Error::BudgetExceeded(format!("{what} needs {total:.3e} candidates (budget {budget})")));
    }
    let mut c: Vec<i64> = bounds.iter().map(|b| -b).collect();
    let mut v = vec![0.0; n];
    loop {
        for (j, vj) in v.iter_mut().enumerate() {
            *vj = (0..n).map(|i| c[i] as f64 * basis[i][j]).sum();
        }
        f(&v);
        let mut k = 0;
        loop {
            if k == n {
                return Ok(());
            }
            if c[k] < bounds[k] {
                c[k] += 1;
                break;
            }
            c[k] = -bounds[k];
            k += 1;
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting; `None` when singular.
fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        let p = a[col][col];
        a[col].iter_mut().for_each(|x| *x /= p);
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                if factor != 0.0 {
                    for k in 0..2 * n {
                        a[r][k] -= factor * a[col][k];
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Random sequential adsorption in `B(0, window)`: uniform candidates are
/// accepted when at distance >= 1 from everything accepted so far, until
/// `max_failures` consecutive rejections.
pub fn gen_rsa(dim: usize, window: f64, seed: u64, max_failures: usize) -> Result<UdSet> {
    if dim == 0 {
        return domain("dimension must be >= 1");
    }
    if max_failures == 0 {
        return domain("max_failures must be >= 1");
    }
    if !(window >= 0.0) || !window.is_finite() {
        return domain(format!("window radius must be finite and >= 0, got {window}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = SpatialGrid::new(dim, SpatialGrid::DEFAULT_CELL)?;
    let mut failures = 0;
    while failures < max_failures {
        let x = sample_in_ball(&mut rng, dim, window);
        let mut blocked = false;
        grid.for_each_within(&x, 1.0, |_, d2| blocked |= d2 < 1.0)?;
        if blocked {
            failures += 1;
        } else {
            grid.insert(x)?;
            failures = 0;
        }
    }
    Ok(UdSet::from_valid(grid.points().to_vec(), dim, window, Some(format!("rsa(seed={seed})"))))
}

/// Uniform point in `B(0, radius)` by rejection from the bounding cube.
pub(crate) fn sample_in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Point {
    if radius == 0.0 {
        return Point::origin(dim);
    }
    let r2 = radius * radius;
    loop {
        let coords: Vec<f64> = (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect();
        if coords.iter().map(|c| c * c).sum::<f64>() <= r2 {
            return Point::new(coords);
        }
    }
}
