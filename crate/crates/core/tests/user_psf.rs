use std::io::Write;

use irtr_core::{
    build_state_model, direct_imaging_fim, gaussian_overlap_integrals, incompatibility,
    irtr_residual, overlap_integrals, qfim, regret_report, verify_sld, Error, PointSpreadFunction,
    PsfKind, QuadratureSpec, SourceGeometry, TradeoffPoint,
};

fn sampled_gaussian(sigma: f64, step: f64) -> (Vec<f64>, Vec<f64>) {
    let n = (14.0 * sigma / step).round() as i64;
    let xs: Vec<f64> = (-n..=n).map(|i| i as f64 * step).collect();
    let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
    let ys = xs
        .iter()
        .map(|x| norm * (-x * x / (4.0 * sigma * sigma)).exp())
        .collect();
    (xs, ys)
}

/// Normalized raised-cosine amplitude on [-w, w], zero outside.
fn raised_cosine(w: f64, x: f64) -> f64 {
    if x.abs() >= w {
        0.0
    } else {
        let c = (std::f64::consts::PI * x / (2.0 * w)).cos();
        c * c * (4.0 / (3.0 * w)).sqrt()
    }
}

#[test]
fn tabulated_gaussian_reproduces_closed_forms() {
    let (xs, ys) = sampled_gaussian(1.0, 0.01);
    let psf = PointSpreadFunction::from_samples(1.0, &xs, &ys, None).unwrap();
    assert_eq!(psf.kind(), PsfKind::UserDefined);
    let quad = QuadratureSpec::default();
    for t in [0.3, 1.0, 2.5, 5.0] {
        let o = overlap_integrals(&psf, &SourceGeometry::new(0.4, t).unwrap(), &quad).unwrap();
        let c = gaussian_overlap_integrals(1.0, t).unwrap();
        assert!((o.kappa - c.kappa).abs() < 1e-6);
        assert!((o.gamma - c.gamma).abs() < 1e-6);
        assert!((o.beta - c.beta).abs() < 1e-6);
        assert!((o.delta - c.delta).abs() < 1e-8);
    }
}

#[test]
fn table_file_round_trip() {
    let (xs, ys) = sampled_gaussian(1.0, 0.02);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# x amplitude").unwrap();
    for (x, y) in xs.iter().zip(&ys) {
        writeln!(file, "{x:.17e} {y:.17e}").unwrap();
    }
    file.flush().unwrap();
    let psf = PointSpreadFunction::from_file(1.0, file.path()).unwrap();
    for x in [-2.0, -0.37, 0.0, 1.11] {
        let exact = (2.0 * std::f64::consts::PI).powf(-0.25) * (-x * x / 4.0_f64).exp();
        assert!((psf.eval(x) - exact).abs() < 1e-8);
    }
}

#[test]
fn compact_real_psf_satisfies_every_bound() {
    let w = 2.0_f64;
    let step = 1e-3_f64;
    let n = (w / step).round() as i64 + 10;
    let xs: Vec<f64> = (-n..=n).map(|i| i as f64 * step).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| raised_cosine(w, x)).collect();
    let psf = PointSpreadFunction::from_samples(1.0, &xs, &ys, None).unwrap();
    let quad = QuadratureSpec::default();
    for t in [0.5, 1.0, 1.5] {
        let g = SourceGeometry::new(0.0, t).unwrap();
        let o = overlap_integrals(&psf, &g, &quad).unwrap();
        let inc = incompatibility(&o).unwrap();
        assert!(inc.c.abs() < 1e-12);
        assert!((0.0..=1.0).contains(&inc.c_tilde));
        let model = build_state_model(&o).unwrap();
        assert!(model.eta3 >= 0.0 && model.eta4 >= 0.0);
        let f = direct_imaging_fim(&psf, &g, &quad).unwrap();
        let r = regret_report(&f, &qfim(&o)).unwrap();
        assert!(r.min_regret_eigenvalue >= -1e-9);
        let p = TradeoffPoint::new(r.delta1, r.delta2).unwrap();
        assert!(irtr_residual(&p, inc.c_tilde) >= -1e-9);
    }
}

#[test]
fn sld_check_far_from_gaussian_regime() {
    let psf = PointSpreadFunction::gaussian(1.0).unwrap();
    let quad = QuadratureSpec::default();
    let residual = verify_sld(&psf, &SourceGeometry::new(0.0, 4.0).unwrap(), &quad, 1e-5).unwrap();
    assert!(residual <= 1e-6, "residual {residual}");
}

#[test]
fn unnormalized_table_is_rejected() {
    let (xs, ys) = sampled_gaussian(1.0, 0.02);
    let doubled: Vec<f64> = ys.iter().map(|y| 2.0 * y).collect();
    let psf = PointSpreadFunction::from_samples(1.0, &xs, &doubled, None).unwrap();
    let err = overlap_integrals(
        &psf,
        &SourceGeometry::new(0.0, 1.0).unwrap(),
        &QuadratureSpec::default(),
    );
    assert!(matches!(err, Err(Error::Normalization { .. })));
}
