use logobs::blowup::{blowup_profile, decay_fit, rescale};
use logobs::fields::{Analytic, DiffField, InterpOrder, Point, Profile};
use logobs::oracle1d::OracleSolution1D;
use logobs::weiss::{wbar_scan, WeissConfig};

fn profile(o: &OracleSolution1D, dim: usize) -> impl Profile + '_ {
    Analytic::new(
        dim,
        move |p: Point| if p[0] > 0.0 { o.value(p[0]).unwrap() } else { 0.0 },
        move |p: Point| if p[0] > 0.0 { [o.interpolate(p[0]).unwrap().1, 0.0] } else { [0.0, 0.0] },
    )
}

#[test]
fn one_dimensional_blowup_approaches_half_space() {
    let o = OracleSolution1D::logarithmic().unwrap();
    let u = profile(&o, 1);
    let field = DiffField::new(rescale(&u, [0.0, 0.0], 1e-3).unwrap(), InterpOrder::Bilinear).unwrap();
    let at_one = field.value([1.0, 0.0]).unwrap();
    assert!((at_one - 0.5).abs() <= 0.1, "{at_one}");
    assert_eq!(field.value([-1.0, 0.0]).unwrap(), 0.0);
}

#[test]
fn planar_profile_decay_and_uniqueness_proxy() {
    let o = OracleSolution1D::logarithmic().unwrap();
    let u = profile(&o, 2);
    let cfg = WeissConfig::default();
    let radii = [0.2, 0.1, 0.05, 0.025];
    let scan = wbar_scan(&u, [0.0, 0.0], &radii, &cfg).unwrap();
    let profiles: Vec<_> = radii.iter().map(|&r| blowup_profile(&u, [0.0, 0.0], r, &cfg).unwrap()).collect();
    for p in &profiles {
        assert!((p.best_nu[0] - 1.0).abs() < 1e-6, "{:?}", p.best_nu);
    }
    let fit = decay_fit(&scan, &profiles).unwrap();
    assert!(fit.delta_hat > 0.0 && !fit.no_decay);
    assert!((fit.beta_hat - fit.beta_from_eta).abs() <= 1e-12);
    let d = &fit.trace_distances;
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    let slope = fit.trace_slope.unwrap();
    assert!(slope >= fit.delta_hat / 2.0 - 0.1, "trace slope {slope}, energy slope {}", fit.delta_hat);
}
