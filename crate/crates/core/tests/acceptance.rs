//! End-to-end acceptance checks. Every criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spherepack::density::{asymptotic_density, density_profile, linear_grid, DensityMethod, DensityProfile};
use spherepack::marcin::{mdist, SymdiffMethod};
use spherepack::metrics::{max_ratio, metric_D_lower, pairing, probe_pseudometric, ConeProbe, ProbeBudget, ProbeCollection};
use spherepack::saturate::{find_hole, saturate_greedy, HoleStatus};
use spherepack::splice::{build_splice, select_schedule, verify_splice};
use spherepack::{gen_lattice, gen_rsa, Annulus, Lattice, Point, RigidMotion, RotationMatrix, UdSet};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn lattice(l: Lattice, window: f64) -> UdSet {
    gen_lattice(&l.basis(), window).unwrap()
}

fn scaled(set: &UdSet, s: f64, shift: &[f64], window: f64) -> UdSet {
    let t = Point::new(shift.to_vec());
    let pts = set.points().iter().map(|p| p.scale(s).add(&t)).filter(|p| p.norm() <= window).collect();
    UdSet::validate(pts, set.dim(), window).unwrap()
}

fn random_in_ball(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Point {
    loop {
        let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-r..=r)).collect();
        let p = Point::new(c);
        if p.norm() <= r {
            return p;
        }
    }
}

fn counting(set: &UdSet, grid: &[f64]) -> DensityProfile {
    density_profile(set, grid, DensityMethod::Counting, 1.0).unwrap()
}

struct Case {
    name: &'static str,
    set: UdSet,
    t_max: f64,
    target: f64,
    tol: f64,
}

fn lattice_cases() -> Vec<Case> {
    vec![
        Case { name: "Z2", set: lattice(Lattice::Cubic(2), 60.0), t_max: 50.0, target: PI / 4.0, tol: 0.03 },
        Case { name: "hex", set: lattice(Lattice::Hexagonal, 60.0), t_max: 50.0, target: PI / 12f64.sqrt(), tol: 0.03 },
        Case { name: "fcc", set: lattice(Lattice::Fcc, 36.0), t_max: 30.0, target: PI / 18f64.sqrt(), tol: 0.05 },
    ]
}

fn grid_to(t_max: f64) -> Vec<f64> {
    linear_grid(1.0, t_max, 0.5).unwrap()
}

fn c1_lattice_densities() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for c in lattice_cases() {
        let start = Instant::now();
        let est = asymptotic_density(&counting(&c.set, &grid_to(c.t_max)), 0.25).unwrap();
        let el = start.elapsed();
        let pass = (est.value - c.target).abs() <= c.tol && el < Duration::from_secs(10);
        ok &= pass;
        lines.push(format!("{} {:.5} (target {:.5} ± {}) in {:.2?}", c.name, est.value, c.target, c.tol, el));
    }
    check(ok, lines.join("; "))
}

fn c2_estimator_agreement() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for c in lattice_cases() {
        let grid: Vec<f64> = grid_to(c.t_max).into_iter().filter(|&t| t >= 5.0).collect();
        let cnt = counting(&c.set, &grid);
        let vol = density_profile(&c.set, &grid, DensityMethod::Volumetric, 1.0).unwrap();
        let worst = cnt
            .samples()
            .iter()
            .zip(vol.samples())
            .map(|(a, b)| (a.value - b.value).abs() * a.t / 3.0)
            .fold(0.0, f64::max);
        ok &= worst <= 1.0;
        lines.push(format!("{} max |Δ|·t/3 = {worst:.4}", c.name));
    }
    check(ok, lines.join("; "))
}

fn c3_rigid_motion_invariance() -> Outcome {
    let cases = lattice_cases();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let c = &cases[k % cases.len()];
        let n = c.set.dim();
        let shift = random_in_ball(&mut rng, n, 2.0);
        let motion = RigidMotion::new(RotationMatrix::random(n, &mut rng), shift.clone()).unwrap();
        let moved = c.set.transform(&motion).unwrap();
        let grid = grid_to(c.t_max);
        let d0 = asymptotic_density(&counting(&c.set, &grid), 0.25).unwrap().value;
        let d1 = asymptotic_density(&counting(&moved, &grid), 0.25).unwrap().value;
        let bound = 2.0 * (shift.norm() + 1.0) / c.t_max;
        worst = worst.max((d0 - d1).abs() / bound);
    }
    check(worst <= 1.0, format!("20 motions, max |Δ|/bound = {worst:.4}"))
}

fn c4_mdist_oracle() -> Outcome {
    let start = Instant::now();
    let z2 = lattice(Lattice::Cubic(2), 32.0);
    let a = scaled(&z2, 2.0, &[0.0, 0.0], 60.0);
    let b = scaled(&z2, 2.0, &[0.5, 0.0], 60.0);
    let grid = linear_grid(45.0, 59.0, 2.0).unwrap();
    let exact = mdist(&a, &b, 1.0, &grid, SymdiffMethod::ExactPairing).unwrap();
    let mc = mdist(&a, &b, 1.0, &grid, SymdiffMethod::MonteCarlo { seed: 7, samples: 1_000_000 }).unwrap();
    let el = start.elapsed();
    let per_point = exact
        .profile
        .samples()
        .iter()
        .zip(mc.profile.samples())
        .map(|(e, m)| (e.value - m.value).abs() / m.stderr.unwrap())
        .fold(0.0, f64::max);
    let ev = exact.estimate.value;
    let pass = (ev - 0.23915).abs() <= 0.002 && per_point <= 3.0 && el < Duration::from_secs(60);
    check(
        pass,
        format!(
            "exact-pairing {ev:.6}, montecarlo {:.6}, max |Δ|/SE over grid = {per_point:.2}, {el:.2?}",
            mc.estimate.value
        ),
    )
}

fn c5_annuli_vanish() -> Outcome {
    let hex = lattice(Lattice::Hexagonal, 129.0);
    let pts: Vec<Point> = hex
        .points()
        .iter()
        .filter(|p| (0..=7).any(|i| Annulus::new(2f64.powi(i) - 0.5, 2f64.powi(i) + 0.5).unwrap().contains(p)))
        .cloned()
        .collect();
    let set = UdSet::validate(pts, 2, 129.0).unwrap();
    let grid = linear_grid(32.0, 128.0, 0.5).unwrap();
    let prof = counting(&set, &grid);
    let at = |t: f64| prof.samples().iter().find(|s| s.t == t).unwrap().value;
    let dyadic = [at(32.0), at(64.0), at(128.0)];
    let octave_max = |lo: f64, hi: f64| {
        prof.samples().iter().filter(|s| s.t >= lo && s.t < hi).map(|s| s.value).fold(0.0, f64::max)
    };
    let octaves = [octave_max(32.0, 64.0), octave_max(64.0, 128.0), at(128.0)];
    let gaps_decrease = [(32.5, 63.5), (64.5, 127.5)].iter().all(|&(lo, hi)| {
        let vals: Vec<f64> = prof.samples().iter().filter(|s| s.t >= lo && s.t <= hi).map(|s| s.value).collect();
        vals.windows(2).all(|w| w[1] < w[0])
    });
    let strictly = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let pass = at(128.0) <= 0.07 && strictly(&dyadic) && strictly(&octaves) && gaps_decrease;
    check(
        pass,
        format!(
            "value(128) = {:.4}; at 32/64/128: {:.4} {:.4} {:.4}; octave maxima {:.4} {:.4}; decreasing across gaps: {gaps_decrease}",
            at(128.0),
            dyadic[0],
            dyadic[1],
            dyadic[2],
            octaves[0],
            octaves[1]
        ),
    )
}

fn c6_constant_splice() -> Outcome {
    let start = Instant::now();
    let hex = lattice(Lattice::Hexagonal, 133.0);
    let seq = vec![hex.clone(); 7];
    let grid = linear_grid(2.0, 132.0, 0.05).unwrap();
    let schedule = select_schedule(&seq, 1.0, &grid, 6, 2.0, SymdiffMethod::Exact).unwrap();
    let splice = build_splice(&seq, &schedule).unwrap();
    let vgrid = linear_grid(4.0, splice.window_radius() - 0.5, 0.5).unwrap();
    let report = verify_splice(&splice, &seq, &schedule, 1.0, &vgrid, SymdiffMethod::Exact, DensityMethod::Counting).unwrap();
    let el = start.elapsed();
    let target = PI / 12f64.sqrt();
    let lambdas: Vec<f64> = schedule.entries().iter().map(|e| e.lambda).collect();
    let pass = (report.density_splice - target).abs() <= 0.03 && report.is_valid() && el < Duration::from_secs(120);
    check(
        pass,
        format!(
            "λ = {lambdas:?}; density {:.5} (target {target:.5} ± 0.03); gaps empty {}, cross-annulus min distance {:?}; {el:.2?}",
            report.density_splice, report.gaps_empty, report.min_cross_annulus_distance
        ),
    )
}

/// Exhaustive optimum of `|Σ_S a| / (base + Σ_S w)` over every non-empty
/// subset, both sums taken in index order.
fn exhaustive(a: &[f64], w: &[f64], base: f64) -> f64 {
    let n = a.len();
    let mut best = 0.0;
    for mask in 1u32..(1 << n) {
        let (mut num, mut wsum) = (0.0, 0.0);
        for q in (0..n).filter(|q| mask >> q & 1 == 1) {
            num += a[q];
            wsum += w[q];
        }
        let r = f64::abs(num) / (base + wsum);
        if r > best {
            best = r;
        }
    }
    best
}

fn c7_greedy_vs_exhaustive() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=15);
        let a: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect();
        let w: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.05) { 0.0 } else { rng.gen_range(0.0..4.0) }).collect();
        let base = 0.5 + rng.gen_range(0.0..3.0);
        if max_ratio(&a, &w, base).0 != exhaustive(&a, &w, base) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("200 instances, {mismatches} mismatches"))
}

fn rsa_pair(seed: u64, window: f64) -> (UdSet, UdSet) {
    (gen_rsa(2, window, seed, 200).unwrap(), gen_rsa(2, window, seed + 1000, 200).unwrap())
}

fn c8_probe_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (a, b) = rsa_pair(8, 4.0);
    let pool_centers: Vec<Point> = a.points().iter().take(12).cloned().collect();
    let radii: Vec<f64> = (0..pool_centers.len()).map(|k| [0.45, 0.3, 0.2][k % 3]).collect();
    let pool = ProbeCollection::new(pool_centers.clone(), radii.clone()).unwrap();
    let alpha = Point::new(vec![0.7, -0.4]);
    let d0 = probe_pseudometric(&a, &b, &alpha, &pool, &ConeProbe).unwrap();
    let budget = ProbeBudget::default();
    let big0 = metric_D_lower(&a, &b, &ConeProbe, &budget).unwrap().value;

    let (mut worst_d, mut worst_big): (f64, f64) = (0.0, 0.0);
    for k in 0..20 {
        let mut rot = RotationMatrix::random(2, &mut rng);
        if k % 2 == 1 {
            rot = rot.compose(&RotationMatrix::new(2, vec![1.0, 0.0, 0.0, -1.0]).unwrap());
        }
        let orth = RigidMotion::new(rot.clone(), Point::origin(2)).unwrap();
        let moved_pool =
            ProbeCollection::new(pool_centers.iter().map(|c| orth.apply(c)).collect(), radii.clone()).unwrap();
        let d1 = probe_pseudometric(
            &a.transform(&orth).unwrap(),
            &b.transform(&orth).unwrap(),
            &orth.apply(&alpha),
            &moved_pool,
            &ConeProbe,
        )
        .unwrap();
        worst_d = worst_d.max((d1 - d0).abs());

        let motion = RigidMotion::new(rot, random_in_ball(&mut rng, 2, 3.0)).unwrap();
        let big1 =
            metric_D_lower(&a.transform(&motion).unwrap(), &b.transform(&motion).unwrap(), &ConeProbe, &budget).unwrap();
        worst_big = worst_big.max((big1.value - big0).abs());
    }
    check(
        worst_d <= 1e-12 && worst_big <= 1e-12 && d0 > 0.0 && big0 > 0.0,
        format!("d = {d0:.6} max drift {worst_d:.1e} (orthogonal maps); D ≥ {big0:.6} max drift {worst_big:.1e} (rigid motions)"),
    )
}

fn c9_pairing() -> Outcome {
    let hex = lattice(Lattice::Hexagonal, 8.0);
    let shift = [0.006, 0.008];
    let moved = hex.translate(&Point::new(shift.to_vec())).unwrap();
    let x = Point::origin(2);
    let r = pairing(&hex, &moved, &x, 0.1).unwrap();
    let eligible = hex.points().iter().filter(|p| p.norm() < 0.9 / 0.2).count();
    let exact = r.matches.iter().all(|m| (m.displacement - 0.01).abs() <= 1e-15);
    let first = pairing(&hex, &moved, &x, 0.1).unwrap();
    let victim = moved.find_point(&first.matches[0].lambda_prime, 1e-12).unwrap();
    let deleted = pairing(&hex, &moved.without(victim), &x, 0.1).unwrap();
    let pass = r.matches.len() == eligible
        && r.unmatched.is_empty()
        && exact
        && r.all_bounds_satisfied()
        && deleted.unmatched.len() == 1
        && deleted.matches.len() == eligible - 1;
    check(
        pass,
        format!(
            "{} of {eligible} eligible matched, displacement 0.01 exact: {exact}, bounds: {}; after deletion {} unmatched",
            r.matches.len(),
            r.all_bounds_satisfied(),
            deleted.unmatched.len()
        ),
    )
}

fn c10_saturation() -> Outcome {
    let start = Instant::now();
    let z2 = find_hole(&lattice(Lattice::Cubic(2), 8.0), 7.0).unwrap();
    let z3 = find_hole(&lattice(Lattice::Cubic(3), 5.0), 4.0).unwrap();
    let z4 = lattice(Lattice::Cubic(4), 5.0);
    let z4_hole = find_hole(&z4, 4.0).unwrap();
    let before = counting(&z4, &[4.0]).last().unwrap().value;
    let sat = saturate_greedy(&z4, 4.0, 10).unwrap();
    let after = counting(&sat.set, &[4.0]).last().unwrap().value;
    let el = start.elapsed();
    let target = PI * PI / 16.0;
    let hole = matches!(z4_hole.status, HoleStatus::Hole(_));
    let pass = z2.is_saturated()
        && z3.is_saturated()
        && hole
        && (after - target).abs() <= 0.05
        && sat.last_search.is_saturated()
        && el < Duration::from_secs(120);
    check(
        pass,
        format!(
            "Z2 saturated {}, Z3 saturated {}, Z4 hole {:?}; Z4 density at t=4 {before:.4} -> {after:.4} (target {target:.4} ± 0.05, {} inserted); {el:.2?}",
            z2.is_saturated(),
            z3.is_saturated(),
            z4_hole.witness().map(|w| &w.location),
            sat.inserted
        ),
    )
}

fn c11_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let window = 8.0;
    let z2 = lattice(Lattice::Cubic(2), window + 3.0);
    let hex = lattice(Lattice::Hexagonal, window + 3.0);
    let random_set = |rng: &mut ChaCha8Rng| -> UdSet {
        match rng.gen_range(0..4) {
            0 => gen_rsa(2, window, rng.gen(), 100).unwrap(),
            1 => scaled(&z2, 1.0, &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], window),
            2 => scaled(&hex, 1.0, &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], window),
            _ => {
                let m = RigidMotion::new(RotationMatrix::random(2, rng), Point::origin(2)).unwrap();
                hex.transform(&m).unwrap().with_window(window)
            }
        }
    };
    let grid = linear_grid(2.0, 7.5, 0.5).unwrap();
    let centers: Vec<Point> =
        (-3..=3).flat_map(|i| (-3..=3).map(move |j| Point::new(vec![i as f64 * 1.1, j as f64 * 1.1]))).collect();
    let radii: Vec<f64> = (0..centers.len()).map(|k| 0.1 + 0.35 * ((k * 7) % 11) as f64 / 10.0).collect();
    let pool = ProbeCollection::new(centers, radii).unwrap();
    let alpha = Point::new(vec![0.3, 0.2]);

    let (mut asym, mut tri_m, mut tri_p): (usize, f64, f64) = (0, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..50 {
        let (a, b, c) = (random_set(&mut rng), random_set(&mut rng), random_set(&mut rng));
        let m = |x: &UdSet, y: &UdSet| mdist(x, y, 1.0, &grid, SymdiffMethod::Exact).unwrap().estimate.value;
        let p = |x: &UdSet, y: &UdSet| probe_pseudometric(x, y, &alpha, &pool, &ConeProbe).unwrap();
        let (mab, mba, mbc, mac) = (m(&a, &b), m(&b, &a), m(&b, &c), m(&a, &c));
        let (pab, pba, pbc, pac) = (p(&a, &b), p(&b, &a), p(&b, &c), p(&a, &c));
        asym += usize::from(mab != mba) + usize::from(pab != pba);
        tri_m = tri_m.max(mac - mab - mbc);
        tri_p = tri_p.max(pac - pab - pbc);
    }
    check(
        asym == 0 && tri_m <= 1e-9 && tri_p <= 1e-12,
        format!("50 triples: asymmetric pairs {asym}; worst triangle excess mdist {tri_m:.2e}, probe {tri_p:.2e}"),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 lattice densities", c1_lattice_densities),
        ("2 counting vs volumetric", c2_estimator_agreement),
        ("3 rigid-motion invariance", c3_rigid_motion_invariance),
        ("4 mdist oracle", c4_mdist_oracle),
        ("5 annuli have density zero", c5_annuli_vanish),
        ("6 constant splice", c6_constant_splice),
        ("7 greedy ratio = exhaustive", c7_greedy_vs_exhaustive),
        ("8 probe metric invariance", c8_probe_invariance),
        ("9 pairing", c9_pairing),
        ("10 saturation", c10_saturation),
        ("11 pseudo-metric axioms", c11_axioms),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(msg) => println!("PASS [{name}] {msg}"),
            Err(msg) => {
                println!("FAIL [{name}] {msg}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
