//! Fredholm determinants at the grid chosen by `settled_grid` agree with the
//! doubled grid to 1e-4 relative on windows the experiments use.

use dpp_core::renewal::vacuum_closed_form;
use dpp_core::stats::{settled_grid, vacuum_probability};
use dpp_core::{KernelSpec, Window};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn check(spec: &KernelSpec, len: f64) -> (usize, f64) {
    let w = Window::interval(0.0, len).unwrap();
    let n0 = ((16.0 * len).ceil() as usize).max(16);
    let n = settled_grid(spec, &w, n0, 1e-4).unwrap();
    assert!(n >= n0);
    let coarse = vacuum_probability(spec, &w, n).unwrap();
    let fine = vacuum_probability(spec, &w, 2 * n).unwrap();
    assert!(rel(coarse, fine) < 1e-4, "L = {len}, n = {n}: {coarse} vs {fine}");
    (n, fine)
}

#[test]
fn renewal_grid_is_cauchy() {
    let spec = KernelSpec::renewal(0.25, 1.0).unwrap();
    let forms = *spec.renewal_forms().unwrap();
    for len in [1.0, 4.0, 10.0] {
        let (_, fine) = check(&spec, len);
        assert!(rel(fine, vacuum_closed_form(&forms, len)) < 1e-4, "L = {len}");
    }
}

#[test]
fn finite_range_grid_is_cauchy() {
    let spec = KernelSpec::finite_range_gaussian(1, 1.0, 0.5).unwrap();
    for len in [1.0, 4.0] {
        check(&spec, len);
    }
    check(&KernelSpec::finite_range_gaussian(1, 0.5, 0.5).unwrap(), 1.0);
}

#[test]
fn settled_grid_keeps_a_grid_that_is_already_fine() {
    let spec = KernelSpec::renewal(0.25, 1.0).unwrap();
    let w = Window::interval(0.0, 1.0).unwrap();
    assert_eq!(settled_grid(&spec, &w, 128, 1e-4).unwrap(), 128);
}
