//! Cross-checks between independent estimators and against closed forms.

use std::f64::consts::PI;

use isoweight::integrate::{mc_surface, mc_volume, weighted_surface, weighted_volume};
use isoweight::isoperimetry::{ball_constant, comparison_tolerance, quotient, theorem2_constant};
use isoweight::limits::exact_constant_limit;
use isoweight::shapes::corpus;
use isoweight::sobolev::{
    best_constant_p1, coarea_lower_bound_check, functional_quotient, grid_for, mollified_indicator, GridFunction,
    GridSpec, MollifierSpec,
};
use isoweight::{ExponentVector, McSpec, QuadratureSpec, ShapeFamily, WeightPair};

fn pair(a: &[f64], b: &[f64]) -> WeightPair {
    WeightPair::from_slices(a, b).unwrap()
}

fn mollify(shape: &ShapeFamily, eps: f64, cells: f64) -> GridFunction {
    let m = MollifierSpec::new(eps).unwrap();
    mollified_indicator(shape, &m, &grid_for(shape, &m, eps / cells).unwrap()).unwrap()
}

#[test]
fn monte_carlo_agrees_with_quadrature() {
    let q = QuadratureSpec::default();
    let mc = McSpec::new(200_000, 11).unwrap();
    let cases = [
        (ShapeFamily::orthant_ball(2, 1.5).unwrap(), vec![0.5, 2.0]),
        (ShapeFamily::cone_slab(3, 1, 0.3, 1.0).unwrap(), vec![1.0, 0.5, 0.0]),
        (ShapeFamily::translated_ball(2, 0, 4.0, 1.0).unwrap(), vec![0.0, 1.5]),
        (ShapeFamily::boxed(vec![0.2, 0.0, 0.5], vec![1.0, 2.0, 0.9]).unwrap(), vec![2.0, 0.0, 1.0]),
    ];
    for (shape, e) in cases {
        let e = ExponentVector::new(e).unwrap();
        for (exact, sampled) in [
            (weighted_volume(&shape, &e, &q).unwrap(), mc_volume(&shape, &e, &mc).unwrap()),
            (weighted_surface(&shape, &e, &q).unwrap(), mc_surface(&shape, &e, &mc).unwrap()),
        ] {
            let se = sampled.abs_error_est.max(1e-12 * exact.value);
            assert!(
                (exact.value - sampled.value).abs() <= 4.0 * se,
                "{shape:?} {e}: quadrature {} vs mc {} +- {se}",
                exact.value,
                sampled.value
            );
        }
    }
}

#[test]
fn corpus_never_beats_the_ball_constant() {
    let q = QuadratureSpec::default();
    for a in [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 2.0], vec![1.0, 1.0, 0.0], vec![0.3, 0.0, 1.7]] {
        let av = ExponentVector::new(a).unwrap();
        let p = WeightPair::equal(av.clone()).unwrap();
        let c1 = ball_constant(&av);
        assert!((best_constant_p1(&av) - c1).abs() <= 1e-10 * c1);
        for shape in corpus(p.n) {
            let r = quotient(&shape, &p, &q).unwrap();
            assert!(
                r.quotient >= c1 * (1.0 - r.tolerance()),
                "{shape:?} {av}: {} < {c1}",
                r.quotient
            );
        }
    }
}

#[test]
fn orthant_ball_attains_the_constant_when_all_weights_are_active() {
    let q = QuadratureSpec::default();
    for a in [vec![1.0, 1.0], vec![0.5, 2.0], vec![1.0, 0.2, 3.0]] {
        let av = ExponentVector::new(a).unwrap();
        let p = WeightPair::equal(av.clone()).unwrap();
        let r = quotient(&ShapeFamily::orthant_ball(p.n, 1.7).unwrap(), &p, &q).unwrap();
        let c1 = ball_constant(&av);
        assert!((r.quotient - c1).abs() <= comparison_tolerance(r.combined_rel_error) * c1);
    }
}

#[test]
fn exact_constant_limit_in_three_dimensions() {
    let p = pair(&[2.0, 1.0, 0.0], &[1.0, 1.0, 0.0]);
    let c = exact_constant_limit(&p, 0, 1e-3, 0.01, &QuadratureSpec::default()).unwrap();
    assert!(c.within_tolerance, "{c:?}");
    assert_eq!(c.expected, 2.0);
    // the ratio approaches its limit from above, linearly in eps
    assert!(c.ratio_at_2eps > c.ratio_at_eps && c.ratio_at_eps > c.extrapolated);
}

#[test]
fn functional_quotient_tends_to_the_shape_quotient() {
    // quarter disk, unweighted: (pi/2 + 2) / sqrt(pi/4)
    let shape = ShapeFamily::orthant_ball(2, 1.0).unwrap();
    let p = pair(&[0.0, 0.0], &[0.0, 0.0]);
    let target = (PI / 2.0 + 2.0) / (PI / 4.0).sqrt();
    let shape_q = quotient(&shape, &p, &QuadratureSpec::default()).unwrap().quotient;
    assert!((shape_q - target).abs() < 1e-12);
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&e| (functional_quotient(&mollify(&shape, e, 8.0), &p).unwrap() - target).abs())
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < 0.6 * w[0]), "{errs:?}");
    assert!(errs[2] / target < 0.01);
}

#[test]
fn functional_quotient_respects_lower_bounds() {
    // equal weights: Q(u) >= C_1; exact-constant pairs: Q(u) >= a_i
    let unweighted = pair(&[0.0, 0.0], &[0.0, 0.0]);
    let boundary = pair(&[1.0, 0.0], &[0.0, 0.0]);
    let c1 = ball_constant(&unweighted.a_vec);
    let ai = theorem2_constant(&boundary, 0).unwrap();
    for shape in corpus(2) {
        let u = mollify(&shape, 0.05, 6.0);
        let q0 = functional_quotient(&u, &unweighted).unwrap();
        let q1 = functional_quotient(&u, &boundary).unwrap();
        assert!(q0 >= c1 * (1.0 - 1e-3), "{shape:?}: {q0} < {c1}");
        assert!(q1 >= ai * (1.0 - 1e-3), "{shape:?}: {q1} < {ai}");
    }
}

#[test]
fn coarea_chain_on_two_bumps() {
    let g = GridSpec::covering(&[-2.0, -1.0], &[2.0, 1.0], 0.1, 0.01).unwrap();
    let u = GridFunction::from_fn(g, |x| {
        let bump = |cx: f64, r: f64| {
            let d2 = ((x[0] - cx).powi(2) + x[1] * x[1]) / (r * r);
            if d2 < 1.0 {
                (1.0 - d2).powi(2)
            } else {
                0.0
            }
        };
        bump(-1.0, 0.8) + 0.5 * bump(1.0, 0.6)
    })
    .unwrap();
    for p in [pair(&[0.0, 0.0], &[0.0, 0.0]), pair(&[0.0, 1.0], &[0.0, 1.0])] {
        let c = coarea_lower_bound_check(&u, &p, 40).unwrap();
        assert!(c.holds, "{c:?}");
        assert!(c.coarea_rel_gap < 1e-2);
    }
}

#[test]
fn coarea_chain_on_mollified_orthant_ball() {
    let shape = ShapeFamily::orthant_ball(2, 1.0).unwrap();
    let u = mollify(&shape, 0.05, 8.0);
    let c = coarea_lower_bound_check(&u, &pair(&[0.0, 0.0], &[0.0, 0.0]), 32).unwrap();
    assert!(c.holds, "{c:?}");
}

#[test]
fn single_level_reduces_to_the_shape_quotient() {
    let bx = ShapeFamily::boxed(vec![0.5, 0.5], vec![1.5, 1.0]).unwrap();
    let p = pair(&[0.0, 0.0], &[0.0, 0.0]);
    let u = mollify(&bx, 0.02, 8.0);
    let c = coarea_lower_bound_check(&u, &p, 1).unwrap();
    let box_q = quotient(&bx, &p, &QuadratureSpec::default()).unwrap().quotient;
    assert_eq!(c.levels.len(), 1);
    assert!((c.c_hat - box_q).abs() / box_q < 0.015, "{} vs {box_q}", c.c_hat);
    assert!((c.minkowski_rhs - c.c_hat * c.levels[0].volume.sqrt() * u.max_value()).abs() < 1e-12);
}
