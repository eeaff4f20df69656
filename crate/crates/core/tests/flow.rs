use std::f64::consts::PI;

use proptest::prelude::*;
use rfk_core::fem::{build_mesh, solve_eigen, EigenOptions, EigenResult, Mesh};
use rfk_core::flow::{
    cut_neumann_residual, decompose, restricted_rayleigh, trace_flow, Basin, Direction, FemField, FlowOptions,
    GradientField, RadialField, Termination,
};
use rfk_core::radial::sigma_of;
use rfk_core::{lambda1_radial, DomainSpec, Point, RadialOptions, RadialProblem, RobinPair, RobinParam};

fn solve(d: &DomainSpec, robin: &RobinPair, nt: usize, nr: usize) -> (Mesh, EigenResult) {
    let mesh = build_mesh(d, nt, nr).unwrap();
    let eig = solve_eigen(&mesh, robin, &EigenOptions::default()).unwrap();
    (mesh, eig)
}

fn polar(c: Point, rho: f64, th: f64) -> Point {
    c + Point::new(th.cos(), th.sin()) * rho
}

#[test]
fn seed_on_the_stationary_circle_is_critical() {
    let p = RadialProblem::new(1.0, 2.0, RobinParam::Finite(1.0), RobinParam::Finite(1.0)).unwrap();
    let eig = lambda1_radial(&p, &RadialOptions::default()).unwrap();
    let sigma = sigma_of(&eig, &p).unwrap();
    let d = DomainSpec::annulus(1.0, 2.0).unwrap();
    let field = RadialField::new(Point::new(0.0, 0.0), &eig);
    let line = trace_flow(&field, &d, polar(Point::new(0.0, 0.0), sigma, 0.4), Direction::Forward, &FlowOptions::default()).unwrap();
    match line.termination {
        Termination::CriticalPoint(q) => assert!((q.norm() - sigma).abs() < 1e-2, "{q:?}"),
        t => panic!("expected a critical point, got {t:?}"),
    }
    // on either side the flow goes to the boundary on that side
    let opts = FlowOptions::default();
    let a = trace_flow(&field, &d, polar(Point::new(0.0, 0.0), sigma - 0.1, 1.0), Direction::Forward, &opts).unwrap();
    let b = trace_flow(&field, &d, polar(Point::new(0.0, 0.0), sigma + 0.1, 1.0), Direction::Forward, &opts).unwrap();
    assert_eq!(a.termination, Termination::ReachedInner);
    assert_eq!(b.termination, Termination::ReachedOuter);
}

#[test]
fn dirichlet_flow_from_near_a_boundary_reaches_it() {
    let d = DomainSpec::eccentric_annulus(1.0, 2.0, Point::new(0.4, 0.0)).unwrap();
    let robin = RobinPair::new(RobinParam::Dirichlet, RobinParam::Dirichlet);
    let (mesh, eig) = solve(&d, &robin, 128, 32);
    let field = FemField::new(&mesh, &eig);
    let opts = FlowOptions::default();
    for k in 0..16 {
        let th = 2.0 * PI * k as f64 / 16.0;
        let near_in = polar(Point::new(0.4, 0.0), 1.03, th);
        let near_out = polar(Point::new(0.0, 0.0), 1.97, th);
        let a = trace_flow(&field, &d, near_in, Direction::Forward, &opts).unwrap();
        let b = trace_flow(&field, &d, near_out, Direction::Forward, &opts).unwrap();
        assert_eq!(a.termination, Termination::ReachedInner, "theta {th}");
        assert_eq!(b.termination, Termination::ReachedOuter, "theta {th}");
        let range = field.value_range();
        assert!(a.max_reversal <= 1e-6 * range && b.max_reversal <= 1e-6 * range);
    }
}

#[test]
fn seeds_outside_the_domain_are_rejected() {
    let d = DomainSpec::annulus(1.0, 2.0).unwrap();
    let p = RadialProblem::new(1.0, 2.0, RobinParam::Dirichlet, RobinParam::Dirichlet).unwrap();
    let eig = lambda1_radial(&p, &RadialOptions::default()).unwrap();
    let field = RadialField::new(Point::new(0.0, 0.0), &eig);
    for seed in [Point::new(0.5, 0.0), Point::new(0.0, 2.5)] {
        assert!(trace_flow(&field, &d, seed, Direction::Forward, &FlowOptions::default()).is_err());
    }
}

#[test]
fn pure_neumann_field_cannot_be_decomposed() {
    let d = DomainSpec::annulus(1.0, 2.0).unwrap();
    let (mesh, eig) = solve(&d, &RobinPair::new(RobinParam::NEUMANN, RobinParam::NEUMANN), 64, 16);
    let field = FemField::new(&mesh, &eig);
    assert!(decompose(&field, &d, &mesh, eig.lambda1, 64, &FlowOptions::default()).is_err());
}

#[test]
fn annulus_basins_are_split_at_the_stationary_circle() {
    let d = DomainSpec::annulus(1.0, 2.0).unwrap();
    for h in [1.0, -1.0] {
        let robin = RobinPair::from_f64(h, h).unwrap();
        let p = RadialProblem::new(1.0, 2.0, robin.h_in, robin.h_out).unwrap();
        let rad = lambda1_radial(&p, &RadialOptions::default()).unwrap();
        let sigma = sigma_of(&rad, &p).unwrap();
        let (mesh, eig) = solve(&d, &robin, 256, 64);
        let field = FemField::new(&mesh, &eig);
        let dec = decompose(&field, &d, &mesh, eig.lambda1, 128, &FlowOptions::default()).unwrap();
        assert_eq!(dec.cut_components(), 1);
        assert!(dec.cut_deviation_from_circle(Point::new(0.0, 0.0), sigma) <= 2.0 * dec.grid.step, "h = {h}");
        let exact_in = PI * (sigma * sigma - 1.0);
        assert!((dec.area_in - exact_in).abs() / exact_in < 2e-2, "h = {h}");
        assert!(((dec.area_in + dec.area_out) - dec.domain_area).abs() / dec.domain_area < 1e-2);
        // thin rings along each boundary belong to that boundary's basin
        for k in 0..64 {
            let th = 2.0 * PI * (k as f64 + 0.5) / 64.0;
            assert!(dec.mask_at(polar(Point::new(0.0, 0.0), 1.05, th), true));
            assert!(dec.mask_at(polar(Point::new(0.0, 0.0), 1.95, th), false));
        }
        let (s1, s2) = dec.interface_radii(&d);
        assert!((s1 - s2).abs() < 2e-2 && (s1 - sigma).abs() < 2e-2, "{s1} {s2} {sigma}");
        for basin in [Basin::In, Basin::Out] {
            let q = restricted_rayleigh(&mesh, &eig, &dec, basin, &robin).unwrap();
            assert!((q - eig.lambda1).abs() / eig.lambda1.abs() < 2e-2, "h = {h}, {basin:?}: {q}");
        }
    }
}

#[test]
fn cut_residual_shrinks_under_refinement() {
    let d = DomainSpec::eccentric_annulus(1.0, 2.0, Point::new(0.3, 0.0)).unwrap();
    let robin = RobinPair::new(RobinParam::Dirichlet, RobinParam::Dirichlet);
    let residual = |nt, nr, grid| {
        let (mesh, eig) = solve(&d, &robin, nt, nr);
        let field = FemField::new(&mesh, &eig);
        let dec = decompose(&field, &d, &mesh, eig.lambda1, grid, &FlowOptions::default()).unwrap();
        assert_eq!(dec.cut_components(), 1);
        for basin in [Basin::In, Basin::Out] {
            let q = restricted_rayleigh(&mesh, &eig, &dec, basin, &robin).unwrap();
            assert!((q - eig.lambda1).abs() / eig.lambda1 < 3e-2, "{basin:?}: {q} vs {}", eig.lambda1);
        }
        cut_neumann_residual(&field, &dec.cut)
    };
    let coarse = residual(128, 32, 64);
    let fine = residual(256, 64, 128);
    assert!(fine < 5e-2, "{fine}");
    assert!(fine < coarse, "{fine} >= {coarse}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    // flow lines stay in the closed domain and only approach boundaries within eps_bd
    #[test]
    fn flow_lines_stay_in_the_domain(rho in 1.02f64..1.98, th in 0.0f64..(2.0 * PI), h in prop::sample::select(vec![1.0, -1.0, 3.0])) {
        let p = RadialProblem::new(1.0, 2.0, RobinParam::Finite(h), RobinParam::Finite(h)).unwrap();
        let eig = lambda1_radial(&p, &RadialOptions::default()).unwrap();
        let d = DomainSpec::annulus(1.0, 2.0).unwrap();
        let field = RadialField::new(Point::new(0.0, 0.0), &eig);
        let opts = FlowOptions::default();
        let line = trace_flow(&field, &d, polar(Point::new(0.0, 0.0), rho, th), Direction::toward_boundary(eig.lambda1), &opts).unwrap();
        for q in &line.points {
            let r = q.norm();
            prop_assert!(r >= 1.0 - opts.eps_bd && r <= 2.0 + opts.eps_bd, "{}", r);
        }
        prop_assert!(line.termination != Termination::Budget);
    }
}
