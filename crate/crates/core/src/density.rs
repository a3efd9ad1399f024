//! Density profiles `t ↦ |χ|_{p,t}` of a packing indicator, the tail-maximum
//! surrogate for the limsup, regularity defects on thin outer shells and the
//! tail supremum `R_λ`.
//!
//! All profiles are anchored at the origin. A profile is only computed for
//! radii `t <= R_w - 1/2`, so that every ball meeting `B(0, t)` is inside the
//! window.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::geom::{lens_unchecked, unit_ball_volume, Point, GEOM_TOL};
use crate::udset::{sample_in_ball, UdSet};

/// Default band width below which a tail is declared converged.
pub const CONVERGENCE_TOL: f64 = 0.02;

/// Default fraction of the largest grid radii used as the tail.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DensityMethod {
    /// `#{λ : |λ| <= t} · (1/(2t))^n`.
    Counting,
    /// Exact `vol(∪ balls ∩ tB) / vol(tB)`.
    Volumetric,
    /// Uniform sampling of `tB`, one seeded stream per grid point.
    MonteCarlo { seed: u64, samples: usize },
}

impl DensityMethod {
    pub fn label(&self) -> &'static str {
        match self {
            DensityMethod::Counting => "counting",
            DensityMethod::Volumetric => "volumetric",
            DensityMethod::MonteCarlo { .. } => "montecarlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileSample {
    pub t: f64,
    pub value: f64,
    /// Standard error, for sampled profiles.
    pub stderr: Option<f64>,
}

/// A sampled map `t ↦ |f|_{p,t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    p: f64,
    method: String,
    samples: Vec<ProfileSample>,
}

impl DensityProfile {
    pub fn new(p: f64, method: impl Into<String>, samples: Vec<ProfileSample>) -> Result<Self> {
        check_p(p)?;
        for w in samples.windows(2) {
            if !(w[1].t > w[0].t) {
                return domain(format!("profile radii must increase strictly ({} then {})", w[0].t, w[1].t));
            }
        }
        Ok(DensityProfile { p, method: method.into(), samples })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    pub fn radii(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    pub fn last(&self) -> Option<&ProfileSample> {
        self.samples.last()
    }

    /// Largest value over the whole grid (the `sup_{t>0}` variant).
    pub fn full_sup(&self) -> f64 {
        self.samples.iter().map(|s| s.value).fold(0.0, f64::max)
    }

    /// CSV with header `t,value,method,p`, plus `stderr` when sampled.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let with_err = self.samples.iter().any(|s| s.stderr.is_some());
        if with_err {
            writeln!(w, "t,value,method,p,stderr")?;
        } else {
            writeln!(w, "t,value,method,p")?;
        }
        for s in &self.samples {
            write!(w, "{},{},{},{}", s.t, s.value, self.method, self.p)?;
            if with_err {
                write!(w, ",{}", s.stderr.unwrap_or(0.0))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("exponent p must be finite and >= 1, got {p}"));
    }
    Ok(())
}

/// Checks that `grid` is a non-empty, strictly increasing list of positive
/// radii, all at most `limit`.
pub(crate) fn check_grid(grid: &[f64], limit: f64) -> Result<()> {
    if grid.is_empty() {
        return domain("radius grid is empty");
    }
    for (i, &t) in grid.iter().enumerate() {
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("grid radius must be positive and finite, got {t}"));
        }
        if i > 0 && !(t > grid[i - 1]) {
            return domain(format!("grid must increase strictly ({} then {t})", grid[i - 1]));
        }
        if t > limit + GEOM_TOL {
            return Err(Error::GridBeyondWindow { t, limit });
        }
    }
    Ok(())
}

/// Evenly spaced radii `start, start+step, ..., <= stop`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return domain(format!("bad grid {start}:{stop}:{step}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// `vol(B(c, 1/2) ∩ B(0, s))` for a center at distance `norm` from the origin.
pub(crate) fn ball_in_ball(n: usize, norm: f64, s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        lens_unchecked(n, 0.5, s, norm)
    }
}

/// 1 when `x` is within distance 1/2 of some point (closed balls), else 0.
pub fn indicator(set: &UdSet, x: &Point) -> Result<u8> {
    if x.dim() != set.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), found: x.dim() });
    }
    Ok(set.grid().any_within(x, 0.5)? as u8)
}

pub fn density_profile(set: &UdSet, grid: &[f64], method: DensityMethod, p: f64) -> Result<DensityProfile> {
    check_p(p)?;
    check_grid(grid, set.window_radius() - 0.5)?;
    let n = set.dim();
    let vn = unit_ball_volume(n)?;
    let norms = set.sorted_norms();
    let count_le = |x: f64| norms.partition_point(|&r| r <= x);

    let raw: Vec<(f64, Option<f64>)> = match method {
        DensityMethod::Counting => grid
            .iter()
            .map(|&t| (count_le(t) as f64 * (0.5 / t).powi(n as i32), None))
            .collect(),
        DensityMethod::Volumetric => {
            let small = vn * 0.5f64.powi(n as i32);
            grid.iter()
                .map(|&t| {
                    let inside = count_le(t - 0.5);
                    let upper = norms.partition_point(|&r| r < t + 0.5);
                    let partial: f64 = norms[inside..upper].iter().map(|&r| ball_in_ball(n, r, t)).sum();
                    ((inside as f64 * small + partial) / (vn * t.powi(n as i32)), None)
                })
                .collect()
        }
        DensityMethod::MonteCarlo { seed, samples } => {
            if samples == 0 {
                return domain("Monte Carlo needs at least one sample");
            }
            let index = set.grid();
            grid.par_iter()
                .enumerate()
                .map(|(k, &t)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(k as u64);
                    let mut hits = 0usize;
                    for _ in 0..samples {
                        let x = sample_in_ball(&mut rng, n, t);
                        if index.any_within(&x, 0.5).expect("dimension checked") {
                            hits += 1;
                        }
                    }
                    let f = hits as f64 / samples as f64;
                    (f, Some((f * (1.0 - f) / samples as f64).sqrt()))
                })
                .collect()
        }
    };

    let samples = grid
        .iter()
        .zip(raw)
        .map(|(&t, (v, se))| power_sample(t, v, se, p))
        .collect();
    DensityProfile::new(p, method.label(), samples)
}

/// `|χ|_{p,t} = (|χ|_{1,t})^{1/p}`; standard errors follow the delta method.
pub(crate) fn power_sample(t: f64, v: f64, se: Option<f64>, p: f64) -> ProfileSample {
    let v = v.max(0.0);
    if p == 1.0 {
        return ProfileSample { t, value: v, stderr: se };
    }
    let value = v.powf(1.0 / p);
    let stderr = se.map(|s| if v > 0.0 { s * value / (p * v) } else { s.powf(1.0 / p) });
    ProfileSample { t, value, stderr }
}

/// Tail-maximum surrogate of `limsup_{t→∞} |f|_{p,t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticEstimate {
    pub value: f64,
    pub tail_lo: f64,
    pub tail_hi: f64,
    pub tail_fraction: f64,
    /// Radii covered by the tail.
    pub tail_from: f64,
    pub tail_to: f64,
    pub converged: bool,
    pub tolerance: f64,
}

pub fn asymptotic_density(profile: &DensityProfile, tail_fraction: f64) -> Result<AsymptoticEstimate> {
    asymptotic_density_with_tol(profile, tail_fraction, CONVERGENCE_TOL)
}

pub fn asymptotic_density_with_tol(
    profile: &DensityProfile,
    tail_fraction: f64,
    tolerance: f64,
) -> Result<AsymptoticEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return domain(format!("tail fraction must be in (0, 1], got {tail_fraction}"));
    }
    let samples = profile.samples();
    if samples.is_empty() {
        return domain("profile is empty");
    }
    let len = ((samples.len() as f64 * tail_fraction).ceil() as usize).clamp(1, samples.len());
    let tail = &samples[samples.len() - len..];
    let tail_lo = tail.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    let tail_hi = tail.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
    Ok(AsymptoticEstimate {
        value: tail_hi,
        tail_lo,
        tail_hi,
        tail_fraction,
        tail_from: tail[0].t,
        tail_to: tail[len - 1].t,
        converged: tail_hi - tail_lo <= tolerance,
        tolerance,
    })
}

/// Per grid radius `t`: `vol(balls ∩ (tB \ (t-l)B)) / vol(tB)`.
pub fn regularity_defect(set: &UdSet, l: f64, grid: &[f64]) -> Result<DensityProfile> {
    if !(l > 0.0) || !l.is_finite() {
        return domain(format!("shell thickness l must be positive, got {l}"));
    }
    check_grid(grid, set.window_radius() - 0.5)?;
    let n = set.dim();
    let vn = unit_ball_volume(n)?;
    let norms = set.sorted_norms();
    let samples = grid
        .iter()
        .map(|&t| {
            let lo = norms.partition_point(|&r| r <= t - l - 0.5);
            let hi = norms.partition_point(|&r| r < t + 0.5);
            let shell: f64 = norms[lo..hi]
                .iter()
                .map(|&r| (ball_in_ball(n, r, t) - ball_in_ball(n, r, t - l)).max(0.0))
                .sum();
            ProfileSample { t, value: shell / (vn * t.powi(n as i32)), stderr: None }
        })
        .collect();
    DensityProfile::new(1.0, "volumetric", samples)
}

/// Whether a regularity-defect profile has vanished over its tail: every tail
/// value is at most `tol`.
pub fn is_regular_consistent(defect: &DensityProfile, tail_fraction: f64, tol: f64) -> Result<bool> {
    Ok(asymptotic_density(defect, tail_fraction)?.value <= tol)
}

/// Grid surrogate of `R_λ(f) = sup_{t >= λ + 1/2} |f|_{p,t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailSup {
    pub value: f64,
    /// First and last grid radius used.
    pub from_t: f64,
    pub to_t: f64,
    pub points_used: usize,
}

pub fn tail_sup_r(profile: &DensityProfile, lambda: f64) -> Result<TailSup> {
    let start = lambda + 0.5;
    let tail: Vec<&ProfileSample> = profile.samples().iter().filter(|s| s.t >= start - 1e-12).collect();
    let (first, last) = match (tail.first(), tail.last()) {
        (Some(f), Some(l)) => (f.t, l.t),
        _ => return domain(format!("no grid radius >= λ + 1/2 = {start}")),
    };
    Ok(TailSup {
        value: tail.iter().map(|s| s.value).fold(0.0, f64::max),
        from_t: first,
        to_t: last,
        points_used: tail.len(),
    })
}

/// Reference packing densities (external mathematical facts, not computed
/// here).
pub mod constants {
    use std::f64::consts::PI;

    /// Packing constant δ_n, known for n <= 3.
    pub fn packing_constant(n: usize) -> Option<f64> {
        match n {
            1 => Some(1.0),
            2 => Some(PI / 12f64.sqrt()),
            3 => Some(PI / 18f64.sqrt()),
            _ => None,
        }
    }

    /// Densest known lattice packing for 1 <= n <= 8.
    pub fn best_lattice_density(n: usize) -> Option<f64> {
        match n {
            1..=3 => packing_constant(n),
            4 => Some(PI * PI / 16.0),
            5 => Some(PI * PI * 2f64.sqrt() / 30.0),
            6 => Some(PI.powi(3) * 3f64.sqrt() / 144.0),
            7 => Some(PI.powi(3) / 105.0),
            8 => Some(PI.powi(4) / 384.0),
            _ => None,
        }
    }
}
