//! Marcinkiewicz distance between two packings: the seminorm of
//! `χ_A − χ_B`, where `χ` is the indicator of the union of balls of radius
//! 1/2.
//!
//! The exact engines rely on the fact that balls of one packing have disjoint
//! interiors, so
//!
//! ```text
//! vol((A Δ B) ∩ tB) = Σ_a vol(a ∩ tB) + Σ_b vol(b ∩ tB) − 2 Σ_{a,b} vol(a ∩ b ∩ tB)
//! ```
//!
//! where the last sum only runs over overlapping pairs. The triple
//! intersection is integrated slice by slice along the axis of the pair.

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::density::{
    asymptotic_density_with_tol, check_grid, check_p, power_sample, AsymptoticEstimate, DensityProfile,
    ProfileSample, CONVERGENCE_TOL, DEFAULT_TAIL_FRACTION,
};
use crate::error::{domain, Error, Result};
use crate::geom::{lens_unchecked, unit_ball_volume, Point};
use crate::udset::{sample_in_ball, UdSet};

/// Default Monte Carlo sample count per radius.
pub const DEFAULT_SAMPLES: usize = 1_000_000;

const QUAD_TOL: f64 = 1e-12;
const QUAD_DEPTH: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SymdiffMethod {
    /// Pairwise inclusion-exclusion, valid for any two packings.
    Exact,
    /// Same engine, but refuses unless every ball meets at most one foreign
    /// ball.
    ExactPairing,
    /// Planar only, overlap components of at most three balls.
    PlanarExact,
    MonteCarlo { seed: u64, samples: usize },
}

impl SymdiffMethod {
    pub fn label(&self) -> &'static str {
        match self {
            SymdiffMethod::Exact => "exact",
            SymdiffMethod::ExactPairing => "exact-pairing",
            SymdiffMethod::PlanarExact => "planar-exact",
            SymdiffMethod::MonteCarlo { .. } => "montecarlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymdiffVolume {
    pub volume: f64,
    pub stderr: Option<f64>,
}

/// `vol(B(c1, 1/2) ∩ B(c2, 1/2) ∩ B(0, t))`.
pub fn ball_pair_in_ball(c1: &Point, c2: &Point, t: f64) -> Result<f64> {
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch { expected: c1.dim(), found: c2.dim() });
    }
    unit_ball_volume(c1.dim())?;
    if !(t >= 0.0) {
        return domain(format!("radius must be >= 0, got {t}"));
    }
    Ok(pair_in_ball(c1, c2, c1.dist(c2), t))
}

fn pair_in_ball(c1: &Point, c2: &Point, d: f64, t: f64) -> f64 {
    let n = c1.dim();
    let (r1, r2) = (c1.norm(), c2.norm());
    if d >= 1.0 || t <= 0.0 || r1 >= t + 0.5 || r2 >= t + 0.5 {
        return 0.0;
    }
    if r1 + 0.5 <= t && r2 + 0.5 <= t {
        return lens_unchecked(n, 0.5, 0.5, d);
    }
    if d == 0.0 {
        return lens_unchecked(n, 0.5, t, r1);
    }
    if n == 1 {
        let (a, b) = (c1[0], c2[0]);
        let lo = (a - 0.5).max(b - 0.5).max(-t);
        let hi = (a + 0.5).min(b + 0.5).min(t);
        return (hi - lo).max(0.0);
    }

    // Coordinates along e = (c2 - c1)/d, measured from c1.
    let e: Vec<f64> = c2.coords().iter().zip(c1.coords()).map(|(b, a)| (b - a) / d).collect();
    let along: f64 = c1.coords().iter().zip(&e).map(|(a, b)| a * b).sum();
    let perp = (c1.norm2() - along * along).max(0.0).sqrt();
    let slice = |s: f64| -> f64 {
        let rho2 = (0.25 - s * s).min(0.25 - (s - d) * (s - d));
        let big2 = t * t - (s + along) * (s + along);
        if rho2 <= 0.0 || big2 <= 0.0 {
            return 0.0;
        }
        lens_unchecked(n - 1, rho2.sqrt(), big2.sqrt(), perp)
    };

    // s = lo + u² and s = hi - u² remove the square-root behaviour at both ends.
    let (lo, mid, hi) = (d - 0.5, d / 2.0, 0.5);
    let left = adaptive_simpson(&|u: f64| 2.0 * u * slice(lo + u * u), 0.0, (mid - lo).sqrt());
    let right = adaptive_simpson(&|u: f64| 2.0 * u * slice(hi - u * u), 0.0, (hi - mid).sqrt());
    left + right
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f((a + b) / 2.0));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, QUAD_TOL, QUAD_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = (a + b) / 2.0;
    let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

struct OverlapPair {
    a: usize,
    b: usize,
    d: f64,
    lo_norm: f64,
    hi_norm: f64,
}

/// Precomputed data for evaluating `vol((A Δ B) ∩ tB)` at many radii up to
/// `t_max`.
pub struct SymdiffEngine<'a> {
    a: &'a UdSet,
    b: &'a UdSet,
    method: SymdiffMethod,
    identical: bool,
    norms_a: Vec<f64>,
    norms_b: Vec<f64>,
    /// Sorted by `hi_norm`.
    pairs: Vec<OverlapPair>,
    /// Prefix sums of full lens volumes in `pairs` order.
    lens_prefix: Vec<f64>,
}

impl<'a> SymdiffEngine<'a> {
    pub fn new(a: &'a UdSet, b: &'a UdSet, method: SymdiffMethod, t_max: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
        }
        let limit = a.window_radius().min(b.window_radius()) - 0.5;
        check_grid(&[t_max], limit)?;
        // Canonical order makes the result exactly symmetric in (a, b).
        let (a, b) = match cmp_sets(a, b) {
            Ordering::Greater => (b, a),
            _ => (a, b),
        };
        let identical = a.points() == b.points();
        let mut engine = SymdiffEngine {
            a,
            b,
            method,
            identical,
            norms_a: a.sorted_norms(),
            norms_b: b.sorted_norms(),
            pairs: Vec::new(),
            lens_prefix: vec![0.0],
        };
        if identical {
            return Ok(engine);
        }
        match method {
            SymdiffMethod::MonteCarlo { samples, .. } => {
                if samples == 0 {
                    return domain("Monte Carlo needs at least one sample");
                }
                return Ok(engine);
            }
            SymdiffMethod::PlanarExact if a.dim() != 2 => {
                return Err(Error::MethodInapplicable {
                    method: "planar-exact",
                    reason: format!("needs dimension 2, got {}", a.dim()),
                })
            }
            _ => {}
        }
        engine.collect_pairs(t_max)?;
        Ok(engine)
    }

    fn collect_pairs(&mut self, t_max: f64) -> Result<()> {
        let reach = t_max + 0.5;
        let grid_b = self.b.grid();
        let mut deg_b = vec![0usize; self.b.len()];
        let mut first_b = vec![usize::MAX; self.b.len()];
        for (ia, pa) in self.a.points().iter().enumerate() {
            let na = pa.norm();
            if na >= reach + 1.0 {
                continue;
            }
            let mut found = Vec::new();
            grid_b.for_each_within(pa, 1.0, |ib, d2| {
                if d2 < 1.0 {
                    found.push((ib, d2.sqrt()));
                }
            })?;
            found.sort_by_key(|&(ib, _)| ib);
            let relevant_a = na < reach;
            if self.method == SymdiffMethod::ExactPairing && relevant_a && found.len() > 1 {
                return Err(self.witness("exact-pairing", pa, found.iter().map(|&(ib, _)| &self.b.points()[ib])));
            }
            for (ib, d) in found {
                let nb = self.b.points()[ib].norm();
                if nb < reach {
                    deg_b[ib] += 1;
                    if deg_b[ib] == 1 {
                        first_b[ib] = ia;
                    } else if self.method == SymdiffMethod::ExactPairing {
                        let pb = &self.b.points()[ib];
                        let others = [&self.a.points()[first_b[ib]], pa];
                        return Err(self.witness("exact-pairing", pb, others.into_iter()));
                    }
                }
                self.pairs.push(OverlapPair { a: ia, b: ib, d, lo_norm: na.min(nb), hi_norm: na.max(nb) });
            }
        }
        if self.method == SymdiffMethod::PlanarExact {
            self.check_components(reach)?;
        }
        self.pairs.sort_by(|x, y| x.hi_norm.total_cmp(&y.hi_norm).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));
        let n = self.a.dim();
        let mut acc = 0.0;
        self.lens_prefix = std::iter::once(0.0)
            .chain(self.pairs.iter().map(|p| {
                acc += lens_unchecked(n, 0.5, 0.5, p.d);
                acc
            }))
            .collect();
        Ok(())
    }

    fn witness<'p>(&self, method: &'static str, ball: &Point, foreign: impl Iterator<Item = &'p Point>) -> Error {
        let list: Vec<String> = foreign.map(|p| p.to_string()).collect();
        Error::MethodInapplicable {
            method,
            reason: format!("ball at {ball} overlaps {} foreign balls: {}", list.len(), list.join(", ")),
        }
    }

    /// Union-find over the overlap graph of relevant pairs.
    fn check_components(&self, reach: f64) -> Result<()> {
        let na = self.a.len();
        let mut parent: Vec<usize> = (0..na + self.b.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for p in self.pairs.iter().filter(|p| p.lo_norm < reach) {
            let (x, y) = (find(&mut parent, p.a), find(&mut parent, na + p.b));
            if x != y {
                parent[x] = y;
            }
        }
        let mut size = std::collections::HashMap::new();
        for p in self.pairs.iter().filter(|p| p.lo_norm < reach) {
            let root = find(&mut parent, p.a);
            size.entry(root).or_insert_with(std::collections::BTreeSet::new).extend([p.a, na + p.b]);
        }
        if let Some(big) = size.values().find(|s| s.len() > 3) {
            let members: Vec<String> = big
                .iter()
                .map(|&k| if k < na { self.a.points()[k].to_string() } else { self.b.points()[k - na].to_string() })
                .collect();
            return Err(Error::MethodInapplicable {
                method: "planar-exact",
                reason: format!("overlap component of {} balls: {}", members.len(), members.join(", ")),
            });
        }
        Ok(())
    }

    pub fn method(&self) -> SymdiffMethod {
        self.method
    }

    /// Symmetric-difference volume inside `B(0, t)`. `stream` selects the
    /// random stream for sampled methods.
    pub fn volume(&self, t: f64, stream: u64) -> SymdiffVolume {
        if self.identical {
            return SymdiffVolume { volume: 0.0, stderr: self.method_is_sampled().then_some(0.0) };
        }
        match self.method {
            SymdiffMethod::MonteCarlo { seed, samples } => self.sampled(t, seed, stream, samples),
            _ => SymdiffVolume { volume: self.exact(t), stderr: None },
        }
    }

    fn method_is_sampled(&self) -> bool {
        matches!(self.method, SymdiffMethod::MonteCarlo { .. })
    }

    fn exact(&self, t: f64) -> f64 {
        let n = self.a.dim();
        let small = unit_ball_volume(n).expect("checked") * 0.5f64.powi(n as i32);
        let singles = |norms: &[f64]| -> f64 {
            let inside = norms.partition_point(|&r| r + 0.5 <= t);
            let upper = norms.partition_point(|&r| r < t + 0.5);
            inside as f64 * small + norms[inside..upper].iter().map(|&r| lens_unchecked(n, 0.5, t, r)).sum::<f64>()
        };
        let full = self.pairs.partition_point(|p| p.hi_norm + 0.5 <= t);
        let boundary: f64 = self.pairs[full..]
            .iter()
            .filter(|p| p.lo_norm < t + 0.5)
            .map(|p| pair_in_ball(&self.a.points()[p.a], &self.b.points()[p.b], p.d, t))
            .sum();
        let overlap = self.lens_prefix[full] + boundary;
        (singles(&self.norms_a) + singles(&self.norms_b) - 2.0 * overlap).max(0.0)
    }

    fn sampled(&self, t: f64, seed: u64, stream: u64, samples: usize) -> SymdiffVolume {
        let n = self.a.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let (ga, gb) = (self.a.grid(), self.b.grid());
        let mut hits = 0usize;
        for _ in 0..samples {
            let x = sample_in_ball(&mut rng, n, t);
            let ia = ga.any_within(&x, 0.5).expect("dimension checked");
            let ib = gb.any_within(&x, 0.5).expect("dimension checked");
            hits += (ia != ib) as usize;
        }
        let f = hits as f64 / samples as f64;
        let vol = unit_ball_volume(n).expect("checked") * t.powi(n as i32);
        SymdiffVolume { volume: f * vol, stderr: Some(vol * (f * (1.0 - f) / samples as f64).sqrt()) }
    }
}

fn cmp_sets(a: &UdSet, b: &UdSet) -> Ordering {
    a.len()
        .cmp(&b.len())
        .then_with(|| {
            for (p, q) in a.points().iter().zip(b.points()) {
                let c = p.lex_cmp(q);
                if c != Ordering::Equal {
                    return c;
                }
            }
            Ordering::Equal
        })
        .then(a.window_radius().total_cmp(&b.window_radius()))
}

/// `vol((B(A) Δ B(B)) ∩ tB)`.
pub fn symdiff_volume(a: &UdSet, b: &UdSet, t: f64, method: SymdiffMethod) -> Result<SymdiffVolume> {
    Ok(SymdiffEngine::new(a, b, method, t)?.volume(t, 0))
}

/// Profile `t ↦ (vol((A Δ B) ∩ tB) / vol(tB))^{1/p}`.
pub fn mdist_profile(a: &UdSet, b: &UdSet, p: f64, grid: &[f64], method: SymdiffMethod) -> Result<DensityProfile> {
    check_p(p)?;
    let limit = a.window_radius().min(b.window_radius()) - 0.5;
    check_grid(grid, limit)?;
    let engine = SymdiffEngine::new(a, b, method, *grid.last().expect("grid checked"))?;
    let vn = unit_ball_volume(a.dim())?;
    let samples: Vec<ProfileSample> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let v = engine.volume(t, k as u64);
            let vol = vn * t.powi(a.dim() as i32);
            power_sample(t, v.volume / vol, v.stderr.map(|s| s / vol), p)
        })
        .collect();
    DensityProfile::new(p, method.label(), samples)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mdist {
    pub profile: DensityProfile,
    pub estimate: AsymptoticEstimate,
}

pub fn mdist(a: &UdSet, b: &UdSet, p: f64, grid: &[f64], method: SymdiffMethod) -> Result<Mdist> {
    mdist_with(a, b, p, grid, method, DEFAULT_TAIL_FRACTION, CONVERGENCE_TOL)
}

pub fn mdist_with(
    a: &UdSet,
    b: &UdSet,
    p: f64,
    grid: &[f64],
    method: SymdiffMethod,
    tail_fraction: f64,
    tolerance: f64,
) -> Result<Mdist> {
    let profile = mdist_profile(a, b, p, grid, method)?;
    let estimate = asymptotic_density_with_tol(&profile, tail_fraction, tolerance)?;
    Ok(Mdist { profile, estimate })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    NotEquivalent,
    /// The tail has not settled, or straddles the tolerance.
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceCertificate {
    pub verdict: Equivalence,
    pub tol: f64,
    pub distance: Mdist,
}

pub fn equivalent(
    a: &UdSet,
    b: &UdSet,
    p: f64,
    grid: &[f64],
    method: SymdiffMethod,
    tol: f64,
) -> Result<EquivalenceCertificate> {
    if !(tol >= 0.0) {
        return domain(format!("tolerance must be >= 0, got {tol}"));
    }
    let distance = mdist(a, b, p, grid, method)?;
    let est = &distance.estimate;
    let verdict = if est.value <= tol && est.converged {
        Equivalence::Equivalent
    } else if est.tail_lo > tol {
        Equivalence::NotEquivalent
    } else {
        Equivalence::Indeterminate
    };
    Ok(EquivalenceCertificate { verdict, tol, distance })
}
