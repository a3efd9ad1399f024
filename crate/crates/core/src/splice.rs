//! Annular splicing of a Cauchy sequence of packings.
//!
//! From a sequence `Λ_0, Λ_1, ...` a subsequence `m_1 < m_2 < ...` and radii
//! `λ_1 < λ_2 < ...` are chosen so that consecutive chosen packings are close
//! in the Marcinkiewicz distance, both globally and outside `λ_i`. The splice
//! keeps `Λ_{m_i}` on `C(λ_i + 1/2, λ_{i+1} - 1/2)`, leaving empty gaps of
//! width 1 around every sphere of radius `λ_i`.
//!
//! Steps `i` are numbered from 1; source indices `m_i` are positions in the
//! input slice, from 0.

use std::fmt::Write as _;

use crate::density::{asymptotic_density, check_grid, density_profile, tail_sup_r, DensityMethod, DEFAULT_TAIL_FRACTION};
use crate::error::{domain, Error, Result};
use crate::geom::{Annulus, Point};
use crate::marcin::{mdist, SymdiffMethod};
use crate::udset::UdSet;

/// Default growth factor `a` in `λ_{i+1} > a·λ_i`.
pub const DEFAULT_GROWTH: f64 = 2.0;

/// Relative margin in `λ_{i+1} >= a·λ_i·(1 + margin)`.
pub const GROWTH_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleEntry {
    /// Step number, from 1.
    pub i: usize,
    /// Index of the source packing.
    pub m: usize,
    pub lambda: f64,
    /// Certified `mdist(Λ_{m_i}, Λ_{m_{i+1}})`; absent on the closing entry.
    pub mdist_cert: Option<f64>,
    /// Certified `R_{λ_i}` of the same difference; absent on the closing entry.
    pub r_cert: Option<f64>,
}

/// `K + 1` entries describe `K` annuli; the last entry only closes the
/// outermost annulus.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusSchedule {
    growth: f64,
    entries: Vec<ScheduleEntry>,
    /// Radii at which the certificates were evaluated, if any.
    resolution: Option<Vec<f64>>,
}

impl AnnulusSchedule {
    /// A schedule from explicit `(m_i, λ_i)` pairs, without certificates.
    pub fn from_radii(growth: f64, entries: &[(usize, f64)]) -> Result<Self> {
        let entries = entries
            .iter()
            .enumerate()
            .map(|(k, &(m, lambda))| ScheduleEntry { i: k + 1, m, lambda, mdist_cert: None, r_cert: None })
            .collect();
        let s = AnnulusSchedule { growth, entries, resolution: None };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<()> {
        if !(self.growth > 1.0) || !self.growth.is_finite() {
            return domain(format!("growth factor must be > 1, got {}", self.growth));
        }
        if self.entries.len() < 2 {
            return domain("a schedule needs at least two entries (one annulus)");
        }
        if !(self.entries[0].lambda >= 1.0) {
            return domain(format!("λ_1 must be >= 1, got {}", self.entries[0].lambda));
        }
        for w in self.entries.windows(2) {
            if !(w[1].lambda > self.growth * w[0].lambda) {
                return domain(format!(
                    "λ_{} = {} is not > {}·λ_{} = {}",
                    w[1].i,
                    w[1].lambda,
                    self.growth,
                    w[0].i,
                    self.growth * w[0].lambda
                ));
            }
            if w[1].m <= w[0].m {
                return domain(format!("source indices must increase (m_{} = {}, m_{} = {})", w[0].i, w[0].m, w[1].i, w[1].m));
            }
        }
        Ok(())
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    /// Number of annuli.
    pub fn depth(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn resolution(&self) -> Option<&[f64]> {
        self.resolution.as_deref()
    }

    /// Annulus `C(λ_i + 1/2, λ_{i+1} - 1/2)` for `i` in `1..=depth`.
    pub fn annulus(&self, i: usize) -> Annulus {
        let (lo, hi) = (self.entries[i - 1].lambda + 0.5, self.entries[i].lambda - 0.5);
        Annulus::new(lo, hi).expect("λ_{i+1} > 2λ_i >= λ_i + 1 keeps the annulus non-empty")
    }

    pub fn outer_radius(&self) -> f64 {
        self.entries.last().expect("checked").lambda
    }

    /// One line per entry: `i m_i lambda_i mdist_cert R_cert`, `-` for a
    /// missing certificate.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let cert = |c: Option<f64>| c.map_or("-".to_string(), |v| v.to_string());
        if let Some(grid) = &self.resolution {
            let _ = writeln!(
                out,
                "# growth={} resolution={}..{} ({} radii)",
                self.growth,
                grid[0],
                grid[grid.len() - 1],
                grid.len()
            );
        } else {
            let _ = writeln!(out, "# growth={}", self.growth);
        }
        for e in &self.entries {
            let _ = writeln!(out, "{} {} {} {} {}", e.i, e.m, e.lambda, cert(e.mdist_cert), cert(e.r_cert));
        }
        out
    }
}

fn dims_agree(seq: &[UdSet]) -> Result<usize> {
    let dim = seq.first().ok_or_else(|| Error::EmptySet("sequence of packings is empty".into()))?.dim();
    for s in seq {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
        }
    }
    Ok(dim)
}

/// Greedy schedule of `depth` annuli. `grid` serves both as the candidate
/// radii for `λ_i` and as the resolution of every certificate.
pub fn select_schedule(
    seq: &[UdSet],
    p: f64,
    grid: &[f64],
    depth: usize,
    growth: f64,
    method: SymdiffMethod,
) -> Result<AnnulusSchedule> {
    dims_agree(seq)?;
    if depth == 0 {
        return domain("depth must be >= 1");
    }
    if !(growth > 1.0) {
        return domain(format!("growth factor must be > 1, got {growth}"));
    }
    let limit = seq.iter().map(UdSet::window_radius).fold(f64::INFINITY, f64::min) - 0.5;
    check_grid(grid, limit)?;

    let mut entries: Vec<ScheduleEntry> = Vec::with_capacity(depth + 1);
    let mut m = 0usize;
    let mut prev_lambda: Option<f64> = None;
    for i in 1..=depth {
        let threshold = 0.5f64.powi(i as i32 + 1);
        let next = (m + 1..seq.len())
            .map(|j| mdist(&seq[m], &seq[j], p, grid, method).map(|d| (j, d)))
            .find(|r| r.as_ref().map_or(true, |(_, d)| d.estimate.value <= threshold))
            .transpose()?;
        let (next_m, dist) = next.ok_or_else(|| Error::ScheduleExhausted {
            step: i,
            reason: format!("no source after index {m} within Marcinkiewicz distance {threshold}"),
        })?;

        let profile = &dist.profile;
        let r_threshold = 0.5f64.powi(i as i32);
        let floor = prev_lambda.map_or(1.0, |l| (growth * l * (1.0 + GROWTH_MARGIN)).max(1.0));
        let chosen = grid.iter().filter(|&&t| t >= floor).find_map(|&lambda| match tail_sup_r(profile, lambda) {
            Ok(r) if r.value <= r_threshold => Some((lambda, r.value)),
            _ => None,
        });
        let (lambda, r_value) = chosen.ok_or_else(|| Error::ScheduleExhausted {
            step: i,
            reason: format!("no grid radius >= {floor} has tail supremum <= {r_threshold}"),
        })?;
        entries.push(ScheduleEntry { i, m, lambda, mdist_cert: Some(dist.estimate.value), r_cert: Some(r_value) });
        prev_lambda = Some(lambda);
        m = next_m;
    }

    let floor = growth * prev_lambda.expect("depth >= 1") * (1.0 + GROWTH_MARGIN);
    let closing = grid.iter().copied().find(|&t| t >= floor).ok_or_else(|| Error::ScheduleExhausted {
        step: depth + 1,
        reason: format!("grid ends before the closing radius {floor}"),
    })?;
    entries.push(ScheduleEntry { i: depth + 1, m, lambda: closing, mdist_cert: None, r_cert: None });

    let schedule = AnnulusSchedule { growth, entries, resolution: Some(grid.to_vec()) };
    schedule.check()?;
    Ok(schedule)
}

/// Union over `i = 1..=K` of `Λ_{m_i} ∩ C(λ_i + 1/2, λ_{i+1} - 1/2)`, with
/// window `λ_{K+1} + 1/2`.
pub fn build_splice(seq: &[UdSet], schedule: &AnnulusSchedule) -> Result<UdSet> {
    let dim = dims_agree(seq)?;
    schedule.check()?;
    let mut points: Vec<Point> = Vec::new();
    for i in 1..=schedule.depth() {
        let m = schedule.entries[i - 1].m;
        let source = seq.get(m).ok_or_else(|| Error::Domain(format!("schedule refers to source {m}, sequence has {}", seq.len())))?;
        let annulus = schedule.annulus(i);
        if source.window_radius() < annulus.hi() {
            return domain(format!("source {m} has window {} < annulus radius {}", source.window_radius(), annulus.hi()));
        }
        points.extend(source.restrict_annulus(&annulus).points().iter().cloned());
    }
    let set = UdSet::validate(points, dim, schedule.outer_radius() + 0.5)
        .unwrap_or_else(|e| panic!("splice of a conforming schedule must be uniformly discrete: {e}"));
    Ok(set.with_tag(format!("splice(depth={})", schedule.depth())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpliceReport {
    /// `(i, m_i, mdist(splice, Λ_{m_i}))` for every annulus.
    pub mdist_to_sources: Vec<(usize, usize, f64)>,
    /// Whether the distances above never increase by more than `slack`.
    pub mdist_non_increasing: bool,
    pub slack: f64,
    pub density_splice: f64,
    pub density_last_source: f64,
    pub density_gap: f64,
    /// Smallest distance between points of different annuli, when below 2.
    pub min_cross_annulus_distance: Option<f64>,
    /// No point lies outside the annuli.
    pub gaps_empty: bool,
    pub resolution: Vec<f64>,
}

impl SpliceReport {
    pub fn is_valid(&self) -> bool {
        self.gaps_empty && self.min_cross_annulus_distance.map_or(true, |d| d >= 1.0)
    }
}

pub fn verify_splice(
    splice: &UdSet,
    seq: &[UdSet],
    schedule: &AnnulusSchedule,
    p: f64,
    grid: &[f64],
    method: SymdiffMethod,
    density_method: DensityMethod,
) -> Result<SpliceReport> {
    dims_agree(seq)?;
    let k = schedule.depth();
    let mut mdist_to_sources = Vec::with_capacity(k);
    let mut slack: f64 = 1e-9;
    for i in 1..=k {
        let m = schedule.entries[i - 1].m;
        let d = mdist(splice, &seq[m], p, grid, method)?;
        if let Some(se) = d.profile.samples().iter().filter_map(|s| s.stderr).reduce(f64::max) {
            slack = slack.max(3.0 * se);
        }
        mdist_to_sources.push((i, m, d.estimate.value));
    }
    let mdist_non_increasing = mdist_to_sources.windows(2).all(|w| w[1].2 <= w[0].2 + slack);

    let last = &seq[schedule.entries[k - 1].m];
    let density = |s: &UdSet| -> Result<f64> {
        Ok(asymptotic_density(&density_profile(s, grid, density_method, 1.0)?, DEFAULT_TAIL_FRACTION)?.value)
    };
    let density_splice = density(splice)?;
    let density_last_source = density(last)?;

    let annulus_of = |x: &Point| -> Option<usize> { (1..=k).find(|&i| schedule.annulus(i).contains(x)) };
    let labels: Vec<Option<usize>> = splice.points().iter().map(annulus_of).collect();
    let gaps_empty = labels.iter().all(Option::is_some);
    let mut min_cross: Option<f64> = None;
    let index = splice.grid();
    for (ia, pa) in splice.points().iter().enumerate() {
        index.for_each_within(pa, 2.0, |ib, d2| {
            if ib > ia && labels[ia] != labels[ib] {
                let d = d2.sqrt();
                min_cross = Some(min_cross.map_or(d, |m: f64| m.min(d)));
            }
        })?;
    }

    Ok(SpliceReport {
        mdist_to_sources,
        mdist_non_increasing,
        slack,
        density_splice,
        density_last_source,
        density_gap: (density_splice - density_last_source).abs(),
        min_cross_annulus_distance: min_cross,
        gaps_empty,
        resolution: grid.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::linear_grid;
    use crate::marcin::symdiff_volume;
    use crate::geom::unit_ball_volume;
    use crate::udset::{gen_lattice, gen_rsa, Lattice};

    fn constant(set: &UdSet, len: usize) -> Vec<UdSet> {
        vec![set.clone(); len]
    }

    #[test]
    fn constant_sequence_schedule() {
        let hex = gen_lattice(&Lattice::Hexagonal.basis(), 40.0).unwrap();
        let grid = linear_grid(1.0, 39.0, 0.5).unwrap();
        let s = select_schedule(&constant(&hex, 6), 1.0, &grid, 4, 2.0, SymdiffMethod::Exact).unwrap();
        let ms: Vec<usize> = s.entries().iter().map(|e| e.m).collect();
        let lambdas: Vec<f64> = s.entries().iter().map(|e| e.lambda).collect();
        assert_eq!(ms, vec![0, 1, 2, 3, 4]);
        assert_eq!(lambdas, vec![1.0, 2.5, 5.5, 11.5, 23.5]);
        for e in &s.entries()[..4] {
            assert_eq!((e.mdist_cert, e.r_cert), (Some(0.0), Some(0.0)));
        }
        assert!(s.to_text().lines().nth(1).unwrap().starts_with("1 0 1 0 0"));
        assert!(s.to_text().lines().last().unwrap().ends_with("- -"));
    }

    #[test]
    fn far_apart_sequence_is_exhausted_at_first_step() {
        let seq: Vec<UdSet> = (0..4).map(|s| gen_rsa(2, 12.0, s, 200).unwrap()).collect();
        let grid = linear_grid(2.0, 11.0, 1.0).unwrap();
        match select_schedule(&seq, 1.0, &grid, 3, 2.0, SymdiffMethod::Exact) {
            Err(Error::ScheduleExhausted { step: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schedule_checks() {
        assert!(AnnulusSchedule::from_radii(2.0, &[(0, 1.0), (1, 2.0)]).is_err());
        assert!(AnnulusSchedule::from_radii(2.0, &[(0, 0.5), (1, 2.5)]).is_err());
        assert!(AnnulusSchedule::from_radii(2.0, &[(1, 1.0), (1, 2.5)]).is_err());
        assert!(AnnulusSchedule::from_radii(1.0, &[(0, 1.0), (1, 2.5)]).is_err());
        assert!(AnnulusSchedule::from_radii(2.0, &[(0, 1.0)]).is_err());
        assert!(AnnulusSchedule::from_radii(2.0, &[(0, 1.0), (1, 2.5), (2, 6.0)]).is_ok());
    }

    #[test]
    fn depth_one_splice_is_single_annulus() {
        let z2 = gen_lattice(&Lattice::Cubic(2).basis(), 20.0).unwrap();
        let s = AnnulusSchedule::from_radii(2.0, &[(0, 2.0), (1, 9.0)]).unwrap();
        let spliced = build_splice(&constant(&z2, 2), &s).unwrap();
        let expect = z2.restrict_annulus(&Annulus::new(2.5, 8.5).unwrap());
        assert_eq!(spliced.points(), expect.points());
        assert_eq!(spliced.window_radius(), 9.5);
    }

    #[test]
    fn single_annulus_mdist_is_missing_volume() {
        let z2 = gen_lattice(&Lattice::Cubic(2).basis(), 20.0).unwrap();
        let s = AnnulusSchedule::from_radii(2.0, &[(0, 2.0), (1, 12.0)]).unwrap();
        let seq = constant(&z2, 2);
        let spliced = build_splice(&seq, &s).unwrap();
        let t = 12.0;
        let removed = z2.points().iter().filter(|p| !s.annulus(1).contains(p));
        let brute: f64 = removed.map(|p| crate::geom::lens_volume(2, 0.5, t, p.norm()).unwrap()).sum();
        let v = symdiff_volume(&spliced, &z2.with_window(20.0), t, SymdiffMethod::Exact).unwrap().volume;
        assert!((v - brute).abs() < 1e-10);
        let report = verify_splice(&spliced, &seq, &s, 1.0, &[t], SymdiffMethod::Exact, DensityMethod::Volumetric).unwrap();
        let vol = unit_ball_volume(2).unwrap() * t * t;
        assert!((report.mdist_to_sources[0].2 - brute / vol).abs() < 1e-12);
        assert!(report.is_valid());
    }

    #[test]
    fn constant_hex_splice_report() {
        let hex = gen_lattice(&Lattice::Hexagonal.basis(), 50.0).unwrap();
        let seq = constant(&hex, 6);
        let grid = linear_grid(1.0, 47.5, 0.5).unwrap();
        let s = select_schedule(&seq, 1.0, &grid, 4, 2.0, SymdiffMethod::Exact).unwrap();
        let spliced = build_splice(&seq, &s).unwrap();
        let verify_grid = linear_grid(2.0, s.outer_radius(), 0.5).unwrap();
        let r = verify_splice(&spliced, &seq, &s, 1.0, &verify_grid, SymdiffMethod::Exact, DensityMethod::Counting).unwrap();
        assert!(r.is_valid());
        assert!(r.min_cross_annulus_distance.unwrap() >= 1.0);
        let first = r.mdist_to_sources[0].2;
        assert!(r.mdist_to_sources.iter().all(|x| x.2 == first));
        assert!(r.mdist_non_increasing);
    }
}
