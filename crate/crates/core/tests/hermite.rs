mod common;

use bhgof_core::hermite::*;
use bhgof_core::rng_from_seed;
use bhgof_core::statistic::epgf_eval;
use common::{convolution_pmf, fd_moments, null_grid, table_chi_square};
use proptest::prelude::*;

fn grid5() -> Vec<(f64, f64)> {
    let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
    ts.iter().flat_map(|&a| ts.iter().map(move |&b| (a, b))).collect()
}

#[test]
fn gauge_preserves_pgf_on_grid() {
    for raw in [[1.0, 0.8, 0.5, 0.5, 0.0], [2.0, 0.5, 0.4, 0.4, 0.1], [1.5, 1.0, 0.5, 0.75, 0.0]] {
        let p = validate_params(raw).unwrap();
        let g = gauge_normalize(&p).unwrap();
        assert_eq!(g.sigma2(), 1.0);
        for t in grid5() {
            assert!((pgf_eval(&p, t) - pgf_eval(&g, t)).abs() < 1e-12, "{raw:?} at {t:?}");
        }
    }
    let p = BHParams::new(2.0, 0.5, 0.4, 0.4, 0.1).unwrap();
    let g = gauge_normalize(&p).unwrap();
    let c = 0.5f64.sqrt();
    assert!((g.mu() - 2.0 / c).abs() < 1e-14);
    assert!((g.lambda3() - 0.1 * c).abs() < 1e-14);
}

#[test]
fn decomposition_reproduces_exponent() {
    for p in null_grid().into_iter().chain([BHParams::new(2.0, 0.5, 0.4, 0.4, 0.1).unwrap()]) {
        let d = poisson_decomposition(&p);
        assert!(((-d.total_rate()).exp() - pgf_eval(&p, (0.0, 0.0))).abs() < 1e-12);
        for t in grid5() {
            let expanded: f64 = PACKETS
                .iter()
                .zip(d.coefficients())
                .map(|(&(j, k), c)| c * (t.0.powi(j as i32) * t.1.powi(k as i32) - 1.0))
                .sum();
            assert!((expanded - p.log_pgf(t.0, t.1)).abs() < 1e-13);
        }
    }
}

#[test]
fn null_grid_is_representable() {
    let grid = null_grid();
    assert!(!grid.is_empty());
    for p in grid {
        assert!(poisson_decomposition(&p).is_representable(), "{p:?}");
    }
}

#[test]
fn pmf_matches_convolution_oracle() {
    let mut points = null_grid();
    points.push(BHParams::new(2.0, 0.5, 0.4, 0.4, 0.1).unwrap());
    points.push(BHParams::new(1.3, 0.0, 0.5, 0.4, 0.2).unwrap());
    for p in points {
        let table = pmf_table(&p, 12, 12);
        let oracle = convolution_pmf(&p, 13);
        for (r, row) in oracle.iter().enumerate() {
            for (s, &want) in row.iter().enumerate() {
                let got = table.prob(r, s);
                assert!((got - want).abs() < 1e-9, "{p:?} at ({r},{s}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn pmf_reference_values_by_convolution() {
    let p = BHParams::new(1.0, 0.8, 0.5, 0.5, 0.0).unwrap();
    let oracle = convolution_pmf(&p, 4);
    assert!((oracle[0][0] - 0.548_811_6).abs() < 1e-7);
    assert!((oracle[1][0] - 0.054_881_2).abs() < 1e-7);
    assert!((oracle[1][1] - 0.115_250_4).abs() < 1e-7);
}

#[test]
fn pmf_normalization_and_origin() {
    for p in null_grid() {
        let t = pmf_table(&p, 60, 60);
        let total: f64 = t.series().sum();
        assert!((1.0 - 1e-8..=1.0 + 1e-10).contains(&total), "{p:?}: {total}");
        assert!(t.cells().all(|(_, v)| (0.0..=1.0).contains(&v)));
        let g = p.gamma();
        let origin = (p.mu() * g + 0.5 * p.sigma2() * g * g).exp();
        assert!((t.prob(0, 0) - origin).abs() < 1e-12);
        // generating-function identity at (0.5, 0.5), up to the tail
        let gf = t.series().eval(0.5, 0.5);
        assert!((gf - pgf_eval(&p, (0.5, 0.5))).abs() <= t.tail_mass() + 1e-12);
    }
}

#[test]
fn auto_table_tail_below_default() {
    for p in null_grid() {
        let t = pmf_table_auto(&p, 1e-10).unwrap();
        assert!(t.tail_mass() <= 1e-10);
        assert!(t.tail_mass() + t.series().sum() - 1.0 < 1e-10);
    }
}

#[test]
fn moments_match_finite_differences() {
    let mut points = null_grid();
    points.push(BHParams::new(2.0, 0.5, 0.4, 0.4, 0.1).unwrap());
    for p in points {
        let (a, b) = (moments(&p), fd_moments(&p));
        for (x, y, what) in [
            (a.mean1, b.mean1, "mean1"),
            (a.mean2, b.mean2, "mean2"),
            (a.var1, b.var1, "var1"),
            (a.var2, b.var2, "var2"),
            (a.cov, b.cov, "cov"),
        ] {
            assert!((x - y).abs() < 1e-6, "{p:?} {what}: {x} vs {y}");
        }
    }
    let p = BHParams::new(1.0, 0.8, 0.3, 0.6, 0.0).unwrap();
    let fd = fd_moments(&p);
    assert!((fd.cov - 0.8 * 0.3 * 0.6).abs() < 1e-6);
}

#[test]
fn sampler_passes_chi_square() {
    for (raw, seed) in [([1.0, 0.8, 0.5, 0.5, 0.0], 5u64), ([2.0, 1.0, 0.75, 0.25, 0.0], 6), ([2.0, 0.5, 0.4, 0.4, 0.1], 7)] {
        let p = validate_params(raw).unwrap();
        let s = sample_bhd(&p, 100_000, &mut rng_from_seed(seed)).unwrap();
        let pv = table_chi_square(&s, &pmf_table(&p, 15, 15));
        assert!(pv > 0.001, "{raw:?}: chi-square p {pv}");
    }
}

#[test]
fn epgf_converges_to_pgf() {
    let p = BHParams::new(1.0, 0.8, 0.5, 0.5, 0.0).unwrap();
    let ts: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let sup_dist = |n: usize, seed: u64| {
        let s = sample_bhd(&p, n, &mut rng_from_seed(seed)).unwrap();
        let mut sup: f64 = 0.0;
        for &a in &ts {
            for &b in &ts {
                sup = sup.max((epgf_eval(&s, (a, b)) - pgf_eval(&p, (a, b))).abs());
            }
        }
        sup
    };
    let median = |n: usize| {
        let mut v: Vec<f64> = (0..20).map(|seed| sup_dist(n, 1000 + seed)).collect();
        v.sort_by(f64::total_cmp);
        (v[9] + v[10]) / 2.0
    };
    let (small, large) = (median(100), median(10_000));
    assert!(large < small, "median sup distance {large} (n=1e4) vs {small} (n=100)");
}

fn valid_params() -> impl Strategy<Value = BHParams> {
    (0.0f64..0.5, 0.01f64..1.0, 0.01f64..1.0, 0.0f64..2.0, 0.1f64..1.5).prop_filter_map(
        "inside the parameter space",
        |(l3, d1, d2, extra, s2)| {
            let (l1, l2) = (l3 + d1, l3 + d2);
            let mu = s2 * (l1 + l2 + l3) + extra + 0.01;
            BHParams::new(mu, s2, l1, l2, l3).ok()
        },
    )
}

proptest! {
    #[test]
    fn pgf_is_one_at_unit_point(p in valid_params()) {
        prop_assert!((pgf_eval(&p, (1.0, 1.0)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pgf_gauge_invariant(p in valid_params(), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let g = gauge_normalize(&p).unwrap();
        prop_assert!((pgf_eval(&p, (t1, t2)) - pgf_eval(&g, (t1, t2))).abs() < 1e-12);
    }

    #[test]
    fn pmf_entries_are_probabilities(p in valid_params()) {
        let t = pmf_table(&p, 20, 20);
        prop_assert!(t.cells().all(|(_, v)| (0.0..=1.0).contains(&v)));
        prop_assert!(t.series().sum() <= 1.0 + 1e-10);
    }
}
