//! Geometry checks against exact disk/half-plane formulas and dense sampling.

use std::f64::consts::PI;

use bpatch::geometry::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Exact `|R_r|` for a disk of radius `rho` centered at the origin, `x` inside.
fn disk_rr(x: [f64; 2], r: f64, rho: f64) -> f64 {
    let dd = x[0].hypot(x[1]);
    let q: f64 = (rho * rho - dd * dd - r * r) / (2.0 * dd * r);
    2.0 * q.clamp(-1.0, 1.0).asin().abs()
}

/// Convex polygon (vertices on the unit circle), resampled uniformly along
/// its perimeter.
fn convex_polygon(rng: &mut ChaCha8Rng, n: usize) -> Contour {
    let k = rng.gen_range(4..9);
    let mut ang: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    ang.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let v: Vec<[f64; 2]> = ang.iter().map(|a| [a.cos(), a.sin()]).collect();
    let lens: Vec<f64> = (0..k).map(|i| dist(v[i], v[(i + 1) % k])).collect();
    let per: f64 = lens.iter().sum();
    let nodes = (0..n)
        .map(|m| {
            let mut s = per * m as f64 / n as f64;
            let mut i = 0;
            while s > lens[i] {
                s -= lens[i];
                i += 1;
            }
            let (a, b) = (v[i], v[(i + 1) % k]);
            let t = s / lens[i];
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
        })
        .collect();
    Contour::new(nodes).unwrap()
}

#[test]
fn distance_matches_dense_sampling_on_convex_polygons() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let c = convex_polygon(&mut rng, 128);
        let q = ContourQuery::new(&c);
        let samples: Vec<[f64; 2]> = (0..1_000_000).map(|i| q.spline.eval(i as f64 / 1e6).0).collect();
        let mut checked = 0;
        while checked < 12 {
            let x = [rng.gen_range(-1.6..1.6), rng.gen_range(-1.6..1.6)];
            let brute = samples.iter().map(|p| dist(*p, x)).fold(f64::INFINITY, f64::min);
            if brute < 1e-3 {
                continue;
            }
            let p = q.distance_probe(x);
            assert!((p.d - brute).abs() < 1e-6, "{} vs {brute}", p.d);
            assert!((dist(p.nearest, x) - p.d).abs() < 1e-14);
            assert!((p.inward_normal[0].hypot(p.inward_normal[1]) - 1.0).abs() < 1e-14);
            checked += 1;
        }
    }
}

#[test]
fn inside_test_matches_exact_disk() {
    let c = Contour::circle([0.0, 0.0], 1.0, 256).unwrap();
    let q = ContourQuery::new(&c);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut agree = 0;
    let mut total = 0;
    for _ in 0..10_000 {
        let x: [f64; 2] = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
        let r = x[0].hypot(x[1]);
        if (r - 1.0).abs() < 1e-10 {
            continue;
        }
        total += 1;
        if q.contains(x) == (r < 1.0) {
            agree += 1;
        }
    }
    assert_eq!(agree, total);
}

#[test]
fn curvature_converges_spectrally() {
    let err = |n| {
        let c = Contour::ellipse_polar([0.0, 0.0], 2.0, 1.0, n).unwrap();
        let k = tangents_and_curvature(&c).unwrap().iter().map(|v| v.1.abs()).fold(0.0, f64::max);
        (k - 2.0).abs()
    };
    let (e64, e128) = (err(64), err(128));
    assert!(e64 >= 4.0 * e128, "{e64} {e128}");
}

#[test]
fn holder_seminorm_refinement() {
    let h: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&n| {
            let c = Contour::ellipse([0.0, 0.0], 2.0, 1.0, n).unwrap();
            regularity_stats(&c, 0.5).unwrap().holder_seminorm
        })
        .collect();
    assert!(h[0] <= h[1] && h[1] <= h[2], "{h:?}");
    assert!((h[2] - h[0]) / h[2] < 0.02, "{h:?}");
}

#[test]
fn resampling_properties() {
    let warped = Contour::from_fn(128, |t| {
        let s = t + 0.3 * t.sin();
        [s.cos(), s.sin()]
    })
    .unwrap();
    let r = resample_arclength(&warped, 128).unwrap();
    let n = r.len();
    let gaps: Vec<f64> = (0..n).map(|m| dist(r.nodes()[m], r.nodes()[(m + 1) % n])).collect();
    let (lo, hi) = gaps.iter().fold((f64::INFINITY, 0.0f64), |(a, b), g| (a.min(*g), b.max(*g)));
    assert!(hi - lo < 1e-8, "{}", hi - lo);

    let e = Contour::ellipse([0.5, 0.0], 2.0, 1.0, 128).unwrap();
    let r1 = resample_arclength(&e, 128).unwrap();
    let r2 = resample_arclength(&r1, 128).unwrap();
    let moved = r1.nodes().iter().zip(r2.nodes()).map(|(a, b)| dist(*a, *b)).fold(0.0, f64::max);
    assert!(moved < 1e-10, "{moved}");
    assert!(((r1.area() - e.area()) / e.area()).abs() < 1e-10);
}

#[test]
fn half_plane_limit() {
    let rho = 1.0e4;
    let c = Contour::circle([0.0, 0.0], rho, 16384).unwrap();
    let q = ContourQuery::new(&c);
    for (d, r) in [(0.5, 1.0), (0.1, 0.3), (0.2, 0.2), (0.05, 1.0)] {
        let x = [rho - d, 0.0];
        let m = rr_measure_with(&q, x, r, 0.5, 1.0);
        let exact = disk_rr(x, r, rho);
        assert!((m.measure - exact).abs() <= 2.0 * PI / 4096.0, "d={d} r={r}: {} vs {exact}", m.measure);
        assert!((exact - 2.0 * (d / r).asin()).abs() < 1e-4);
    }
    let m = rr_measure_with(&q, [rho - 0.5, 0.0], 1.0, 0.5, 1.0);
    assert!((m.measure - PI / 3.0).abs() <= 2.0 * PI / 4096.0);
}

#[test]
fn disk_oracle_and_lemma_bound() {
    // At r = d the circle touches the boundary at one angle; keep that angle
    // off the sample midpoints so the spline's ~1e-11 radius error cannot
    // flip a whole cell.
    let c = Contour::circle([0.0, 0.0], 1.0, 1024).unwrap();
    let q = ContourQuery::new(&c);
    let dir = [1.0f64.cos(), 1.0f64.sin()];
    for gamma in [0.25, 0.5, 0.75] {
        let delta = regularity_stats(&c, gamma).unwrap().delta;
        for i in 0..10 {
            let d = delta * (0.02 + 0.98 * i as f64 / 9.0);
            for j in 0..10 {
                let r = d + (delta - d) * j as f64 / 9.0;
                let x = [(1.0 - d) * dir[0], (1.0 - d) * dir[1]];
                let m = rr_measure_with(&q, x, r, gamma, delta);
                let exact = disk_rr(x, r, 1.0);
                assert!((m.measure - exact).abs() <= 2.0 * PI / 4096.0, "γ={gamma} d={d} r={r} {} {exact}", m.measure);
                assert!(exact <= m.bound && m.measure <= m.bound, "γ={gamma} d={d} r={r}");
            }
        }
        let full = rr_measure([0.0, 1.0 - 0.5 * delta], 0.7 * delta, &c, gamma).unwrap();
        assert_eq!(full.gamma, gamma);
        assert!((full.delta - delta).abs() < 1e-15);
    }
}

fn star(r0: f64, amp: f64, lobes: u32) -> Contour {
    Contour::star([0.0, 0.0], r0, amp, lobes, 128).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distance_is_one_lipschitz(
        amp in 0.0..0.25f64, lobes in 2u32..6,
        x1 in prop::array::uniform2(-2.0..2.0f64), x2 in prop::array::uniform2(-2.0..2.0f64),
    ) {
        let q = ContourQuery::new(&star(1.0, amp, lobes));
        let d1 = q.distance_probe(x1).d;
        let d2 = q.distance_probe(x2).d;
        prop_assert!((d1 - d2).abs() <= dist(x1, x2) + 1e-12);
    }

    #[test]
    fn reversal_is_normalized_away(amp in 0.0..0.25f64, lobes in 2u32..6, x in prop::array::uniform2(-2.0..2.0f64)) {
        let c = star(1.0, amp, lobes);
        let back = Contour::new(c.reversed_nodes()).unwrap();
        prop_assert_eq!(&back, &c);
        let a = distance_probe(x, &c);
        let b = distance_probe(x, &back);
        prop_assert_eq!(a, b);
        // the clockwise traversal would see the opposite left normal
        let q = ContourQuery::new(&c);
        let (_, t) = q.spline.eval(a.alpha);
        let l = t[0].hypot(t[1]);
        let right = [t[1] / l, -t[0] / l];
        prop_assert!((right[0] + a.inward_normal[0]).abs() < 1e-15 && (right[1] + a.inward_normal[1]).abs() < 1e-15);
    }

    #[test]
    fn area_preserved_by_resampling(amp in 0.0..0.2f64, lobes in 2u32..5) {
        let c = star(1.0, amp, lobes);
        let r = resample_arclength(&c, 128).unwrap();
        prop_assert!(((r.area() - c.area()) / c.area()).abs() < 1e-10);
    }
}
