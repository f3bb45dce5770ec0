use proptest::prelude::*;

use pfreq::bounds::{
    buser_bounds, endpoint_bounds, mazya_constant_with_mu, mu_ball_lower_bound, mu_lower_bound,
    scaling_exponent, theta_from_mazya, theta_lower_bound, BoundRow, Exponents, RowInputs, Sense,
};
use pfreq::experiments::seeded_domains;
use pfreq::geometry::{
    build_domain, inradius, inradius_center, projection_length, taylor_fatness_check,
    taylor_square_side, topology_order, DomainKind, DomainSpec, Grid, GridDomain, ObstacleSet,
};
use pfreq::solvers::{capacity, linf_frequency, principal_frequency, SolveOptions};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Planar exponents with `p ≤ q`, admissible for the inradius bound.
fn planar_exponents() -> impl Strategy<Value = Exponents> {
    (1.0f64..6.0, 0.0f64..1.0, any::<bool>()).prop_filter_map("inadmissible", |(p, s, inf)| {
        let q = if inf && p > 2.0 {
            f64::INFINITY
        } else if p < 2.0 {
            let crit = 2.0 * p / (2.0 - p);
            p + s * (crit - p) * 0.999
        } else {
            p + s * 10.0
        };
        let e = Exponents::new(2, p, q).ok()?;
        e.check_planar_theta().ok()?;
        Some(e)
    })
}

fn unit_disk(h: f64) -> GridDomain {
    build_domain(&DomainSpec::new(DomainKind::Disk { r: 1.0 }, h)).unwrap()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn bound_evaluators_are_homogeneous(e in planar_exponents(), k in 1usize..50, r in 0.1f64..5.0, t in 0.2f64..5.0) {
        let s = scaling_exponent(&e);
        let a = theta_lower_bound(&e, k, r).unwrap();
        let b = theta_lower_bound(&e, k, t * r).unwrap();
        prop_assert!(rel_close(b, a * t.powf(-s), 1e-12));
        if e.q() < f64::INFINITY {
            let (vol, diam) = (std::f64::consts::PI * r * r, 2.0 * r);
            let m0 = mu_lower_bound(&e, vol, diam).unwrap();
            let m1 = mu_lower_bound(&e, t * t * vol, t * diam).unwrap();
            prop_assert!(rel_close(m1, m0 * t.powf(-s), 1e-12));
        }
        if e.p() > 2.0 {
            let e0 = endpoint_bounds(&e, r, 3.0, 0.4).unwrap();
            let e1 = endpoint_bounds(&e, t * r, 3.0, 0.4).unwrap();
            prop_assert!(rel_close(e1.interpolated, e0.interpolated * t.powf(-s), 1e-12));
            prop_assert!(rel_close(e1.lambda_inf, e0.lambda_inf * t.powf(2.0 - e.p()), 1e-12));
            prop_assert!(rel_close(e1.lambda_p, e0.lambda_p * t.powf(-e.p()), 1e-12));
        }
    }

    #[test]
    fn buser_bounds_scale_with_length(k in 1usize..500, h in 0.01f64..10.0, r in 0.01f64..10.0, t in 0.2f64..5.0) {
        let a = buser_bounds(k, h, r).unwrap();
        let b = buser_bounds(k, h / t, t * r).unwrap();
        prop_assert!(rel_close(b.cheeger_lower, a.cheeger_lower / t, 1e-12));
        prop_assert!(rel_close(b.buser_upper, a.buser_upper / (t * t), 1e-12));
        prop_assert!(rel_close(b.lambda_lower, a.lambda_lower / (t * t), 1e-12));
    }

    #[test]
    fn inradius_bound_is_non_increasing(e in planar_exponents(), k in 1usize..100, r in 0.05f64..5.0, dk in 0usize..50, dr in 0.0f64..3.0) {
        let base = theta_lower_bound(&e, k, r).unwrap();
        prop_assert!(theta_lower_bound(&e, k + dk, r).unwrap() <= base);
        prop_assert!(theta_lower_bound(&e, k, r + dr).unwrap() <= base);
    }

    #[test]
    fn row_pass_matches_margin(bound in -10.0f64..10.0, target in -10.0f64..10.0, tol in 0.0f64..1.0, lower in any::<bool>()) {
        let sense = if lower { Sense::Lower } else { Sense::Upper };
        let row = BoundRow::new("x", RowInputs::default(), sense, bound, target, tol);
        let margin = if lower { target - bound } else { bound - target };
        prop_assert_eq!(row.margin, margin);
        prop_assert_eq!(row.pass, margin >= -tol);
        prop_assert_eq!(row.clean_violation(), !row.pass);
    }

    #[test]
    fn projection_is_bounded_by_the_extent(nodes in prop::collection::vec((0usize..30, 0usize..30), 1..40)) {
        let g = Grid::new(2, [30, 30], 0.1, [0.0, 0.0]).unwrap();
        let obs = ObstacleSet::new(g, nodes.iter().map(|&(i, j)| g.index(i, j)).collect()).unwrap();
        for axis in [1usize, 2] {
            let coord = |&(i, j): &(usize, usize)| if axis == 1 { j } else { i };
            let lo = nodes.iter().map(coord).min().unwrap();
            let hi = nodes.iter().map(coord).max().unwrap();
            let extent = (hi - lo) as f64 * g.h;
            prop_assert!(projection_length(&obs, axis).unwrap() <= extent + g.h + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn inradius_scales_with_integer_dilation(seed in any::<u64>(), t in 1u32..5) {
        let spec = seeded_domains(seed, 1)[0];
        let d = build_domain(&spec).unwrap();
        let t = t as f64;
        prop_assert!(rel_close(inradius(&d.scaled(t).unwrap()), t * inradius(&d), 1e-12));
    }

    #[test]
    fn topology_order_survives_refinement(family in 0usize..5, a in 0.0f64..1.0, b in 0.0f64..1.0, k in 2usize..10) {
        let kind = match family {
            0 => DomainKind::Disk { r: 0.5 + a },
            1 => DomainKind::Square { side: 1.0 + a },
            2 => DomainKind::Annulus { r_in: 0.3 + 0.3 * b, r_out: 1.0 + a },
            3 => DomainKind::Strip { height: 0.5 + 0.5 * a, length: 2.0 + 2.0 * b },
            _ => DomainKind::Perforated { k, beta: 0.6 + 0.4 * a },
        };
        let coarse = build_domain(&DomainSpec::new(kind, 1.0 / 32.0));
        prop_assume!(coarse.is_ok());
        let fine = build_domain(&DomainSpec::new(kind, 1.0 / 64.0)).unwrap();
        prop_assert_eq!(topology_order(&coarse.unwrap()).unwrap(), topology_order(&fine).unwrap());
    }

    #[test]
    fn fatness_holds_for_every_square_placement(seed in any::<u64>(), dx in -1.0f64..1.0, dy in -1.0f64..1.0) {
        let spec = seeded_domains(seed, 1)[0];
        prop_assume!(matches!(spec.kind, DomainKind::Annulus { .. } | DomainKind::Perforated { .. }));
        let d = build_domain(&spec).unwrap();
        let k = topology_order(&d).unwrap();
        let r = inradius(&d);
        let side = taylor_square_side(k, r);
        let padded = d.padded((side / d.h()).ceil() as usize + 2);
        let (c, _) = inradius_center(&d);
        let c = d.grid().position(c);
        let center = [c[0] + 0.5 * side * dx, c[1] + 0.5 * side * dy];
        let w = taylor_fatness_check(&padded, center, side).unwrap();
        prop_assert!(w.pass, "margin {}", w.margin);
    }

    #[test]
    fn frequency_is_monotone_under_inclusion(cut in -0.3f64..0.9, which in 0usize..3) {
        let (p, q) = [(2.0, 2.0), (2.0, 1.0), (3.0, 3.0)][which];
        let e = Exponents::new(2, p, q).unwrap();
        let big = unit_disk(1.0 / 12.0);
        let g = *big.grid();
        let small = big.restrict(|k| g.position(k)[0] < cut).unwrap();
        let opts = SolveOptions::default();
        let lb = principal_frequency(&big, &e, &opts).unwrap();
        let ls = principal_frequency(&small, &e, &opts).unwrap();
        prop_assert!(ls.value >= lb.value * (1.0 - 1e-6), "{} < {}", ls.value, lb.value);
    }

    #[test]
    fn capacity_is_monotone(a in 0.05f64..0.4, grow in 0.0f64..0.3, shrink in 0.0f64..0.3, p in 1.5f64..4.0) {
        let container = unit_disk(1.0 / 16.0);
        let g = *container.grid();
        let disk = |r: f64| ObstacleSet::from_predicate(g, move |x| x[0].hypot(x[1]) <= r).unwrap();
        let opts = SolveOptions::default();
        let base = capacity(&container, &disk(a), p, &opts).unwrap().value;
        let larger = capacity(&container, &disk(a + grow), p, &opts).unwrap().value;
        let smaller_container = container.restrict(|k| g.position(k)[0].hypot(g.position(k)[1]) < 1.0 - shrink).unwrap();
        let tighter = capacity(&smaller_container, &disk(a), p, &opts).unwrap().value;
        prop_assert!(larger >= base * (1.0 - 1e-6));
        prop_assert!(tighter >= base * (1.0 - 1e-6));
    }

    #[test]
    fn holder_interpolation_holds_on_rectangles(w in 0.5f64..1.5, hgt in 0.5f64..1.5, p in 2.5f64..4.0) {
        let spec = DomainSpec::new(DomainKind::Strip { height: hgt, length: w }, 1.0 / 16.0);
        let d = build_domain(&spec).unwrap();
        let opts = SolveOptions::default();
        let lp = principal_frequency(&d, &Exponents::new(2, p, p).unwrap(), &opts).unwrap().value;
        let l2p = principal_frequency(&d, &Exponents::new(2, p, 2.0 * p).unwrap(), &opts).unwrap().value;
        let linf = linf_frequency(&d, p, &opts).unwrap().value;
        prop_assert!(l2p >= (lp * linf).sqrt() * (1.0 - 1e-3));
    }
}

// The closed-form lower bound for mu(B_1) vanishes at q = p*, so the
// bracket is checked with mu held at a fixed positive value.
#[test]
fn theta_stays_bracketed_toward_the_critical_exponent() {
    for p in [1.2, 1.5, 1.8] {
        let crit = 2.0 * p / (2.0 - p);
        let mu = mu_ball_lower_bound(&Exponents::new(2, p, 0.5 * (p + crit)).unwrap()).unwrap();
        let vals: Vec<f64> = (1..=6)
            .map(|j| {
                let e = Exponents::new(2, p, crit * (1.0 - 10f64.powi(-j))).unwrap();
                theta_from_mazya(&e, mazya_constant_with_mu(&e, 0.5, mu).unwrap())
            })
            .collect();
        let end = *vals.last().unwrap();
        for v in &vals {
            assert!(*v >= 0.5 * end && *v <= 2.0 * end, "p = {p}: {vals:?}");
        }
    }
}
