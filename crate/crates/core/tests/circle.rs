use num_complex::Complex;
use wglab::arith::integer_kth_root;
use wglab::circle::{
    fourier_coefficient, recover_representation_counts, verify_basic_identity_on, QuadratureGrid,
    TripleSetup, DEFAULT_EPS_TRUNC,
};
use wglab::counting::{interval_sums, representation_count, ExponentTriple};

#[test]
fn fourier_consistency_up_to_2000() {
    let t = ExponentTriple::<f64>::new(2, 2, 2).unwrap();
    let setup = TripleSetup::new(500, &t, DEFAULT_EPS_TRUNC, integer_kth_root(2000, 2).unwrap()).unwrap();
    let rec = recover_representation_counts(&setup, 2000).unwrap();
    assert_eq!(rec.len(), 2001);
    for (n, v) in rec.iter().enumerate() {
        let want = representation_count(n as u64, &t, setup.table()).unwrap();
        assert!((v - want).abs() <= 1e-8, "n={n}: {v} vs {want}");
    }
}

#[test]
fn single_coefficients_agree_with_batch() {
    let t = ExponentTriple::<f64>::new(2, 2, 3).unwrap();
    let setup = TripleSetup::new(200, &t, DEFAULT_EPS_TRUNC, 40).unwrap();
    let grid = QuadratureGrid::new(setup.product_bandwidth() + 300).unwrap();
    let product = setup.product_samples(&grid);
    for n in [0u64, 12, 17, 150, 299] {
        let c: Complex<f64> = fourier_coefficient(&grid, &product, n as i64).unwrap();
        let r = c.re * (n as f64 / 200.0).exp();
        let want = representation_count(n, &t, setup.table()).unwrap();
        assert!((r - want).abs() <= 1e-8, "n={n}");
        assert!(c.im.abs() <= 1e-10);
    }
}

#[test]
fn identity_error_drops_with_grid_size() {
    let t = ExponentTriple::<f64>::new(2, 2, 2).unwrap();
    let (n, h) = (500u64, 20u64);
    let setup = TripleSetup::new(n, &t, DEFAULT_EPS_TRUNC, integer_kth_root(n + h, 2).unwrap()).unwrap();
    let lhs = interval_sums(n, h, &t, setup.table(), false, 1).unwrap().sum_weighted;

    let need = setup.product_bandwidth() + n + h;
    let coarse_bw = need / 8;
    let coarse = QuadratureGrid::with_samples(2 * coarse_bw as usize + 5, coarse_bw).unwrap();
    let aliased = coarse
        .mean_of_product(&setup.product_samples(&coarse), &coarse.sample_interval_kernel(n, h))
        .unwrap();
    let coarse_diff = (aliased.re - lhs).abs();

    let fine = QuadratureGrid::new(need).unwrap();
    let exact = verify_basic_identity_on(&setup, h, &fine, 1e-6).unwrap();
    assert!(exact.passed);
    assert!(exact.diff < 1e-3 * coarse_diff, "fine {} coarse {coarse_diff}", exact.diff);
}
