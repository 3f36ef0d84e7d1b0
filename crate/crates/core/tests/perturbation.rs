mod common;

use std::sync::Arc;

use common::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use spinchain::hamiltonian::{eig_modes, EigenSystem, SpinHamiltonian};
use spinchain::kme::{compute_kme, make_grid};
use spinchain::linalg::{hermitian_eigenvalues, ComplexMatrix};
use spinchain::pauli::build_basis;
use spinchain::perturb::*;

fn spin_pair(seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    let basis = Arc::new(build_basis(4, 3).unwrap());
    let mut r = rng(seed);
    let w = random_unit(basis.len(), &mut r);
    let h = SpinHamiltonian::assemble(&w, basis).unwrap().dense();
    let hp = common::random_hermitian(16, &mut r);
    let hp = hp.scaled(C::new(h.frobenius_norm() / hp.frobenius_norm(), 0.0));
    (h, hp)
}

fn isolated(es: &EigenSystem, n: usize, gap: f64) -> bool {
    let e = &es.energies;
    (n == 0 || e[n] - e[n - 1] > gap) && (n + 1 == e.len() || e[n + 1] - e[n] > gap)
}

#[test]
fn first_order_error_is_quadratic() {
    for seed in 0..5 {
        let (h, hp) = spin_pair(seed);
        let es = eig_modes(&h).unwrap();
        let modes: Vec<usize> = (0..es.len()).filter(|&n| isolated(&es, n, 1e-3)).take(5).collect();
        assert_eq!(modes.len(), 5);
        let err = |eps: f64| -> Vec<f64> {
            let exact = hermitian_eigenvalues(&h.add(&hp.scaled(C::new(eps, 0.0))).unwrap()).unwrap();
            let mc = first_order(&es, &hp.scaled(C::new(eps, 0.0))).unwrap();
            modes.iter().map(|&n| (exact[n] - es.energies[n] - mc.e1[n]).abs()).collect()
        };
        let (a, b) = (err(2e-3), err(1e-3));
        for (x, y) in a.iter().zip(&b) {
            let ratio = x / y;
            assert!((3.5..=4.5).contains(&ratio), "seed {seed}: ratio {ratio}");
        }
    }
}

#[test]
fn commuting_perturbation_only_shifts_energies() {
    let (h, _) = spin_pair(3);
    let es = eig_modes(&h).unwrap();
    let count = (0..es.len()).take_while(|&n| isolated(&es, n, 1e-6)).count().max(1);
    let mc = first_order_lowest(&es, &h, count, DegeneratePolicy::Error).unwrap();
    for n in 0..count {
        assert!((mc.e1[n] - es.energies[n]).abs() < 1e-12);
        let m = es.mode(n);
        assert!(mc.corrected[n].iter().zip(&m).all(|(a, b)| (a - b).norm() < 1e-10));
    }
}

#[test]
fn corrected_mode_tracks_exact_ground_state() {
    let (h, hp) = spin_pair(8);
    let es = eig_modes(&h).unwrap();
    assert!(isolated(&es, 0, 1e-3));
    let eps = 1e-4;
    let small = hp.scaled(C::new(eps, 0.0));
    let mc = first_order(&es, &small).unwrap();
    let exact = eig_modes(&h.add(&small).unwrap()).unwrap().mode(0);
    let approx = &mc.corrected[0];
    let norm = approx.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let overlap = exact.iter().zip(approx).map(|(a, b)| a.conj() * b).sum::<C>().norm() / norm;
    assert!(1.0 - overlap < 1e-6, "overlap {overlap}");
}

#[test]
fn degenerate_levels_are_reported_or_skipped() {
    let h = ComplexMatrix::from_diag(&[C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)]);
    let mut hp = ComplexMatrix::zeros(3, 3);
    hp[(0, 1)] = C::new(0.1, 0.0);
    hp[(1, 0)] = C::new(0.1, 0.0);
    let es = eig_modes(&h).unwrap();
    match first_order(&es, &hp) {
        Err(spinchain::Error::Degeneracy { first, second, .. }) => assert_eq!((first, second), (0, 1)),
        other => panic!("expected a degeneracy error, got {other:?}"),
    }
    let mc = first_order_lowest(&es, &hp, 2, DegeneratePolicy::Skip).unwrap();
    assert_eq!(mc.skipped_couplings, 2);
}

#[test]
fn gaussian_bump_uncertainty_grows_outward() {
    let grid = make_grid(-4.0, 4.0, 64).unwrap();
    let s = 1.0;
    let g: Vec<f64> = grid.points().iter().map(|x| (-x * x / (2.0 * s * s)).exp()).collect();
    let (v, bias) = uncertainty_curve(&g, &grid, 1.0, DEFAULT_FLOOR).unwrap();
    let mid = 32;
    for i in mid..62 {
        assert!(v[i + 1] >= v[i] - 1e-9, "not increasing at {i}");
    }
    assert!(v.iter().cloned().fold(f64::INFINITY, f64::min).abs() < 1e-10);
    // interior ratio ∇²g/g = x²/s⁴ − 1/s², so the minimum sits near x = 0 at about −½
    assert!((bias - 0.5).abs() < 0.01, "bias {bias}");
}

#[test]
fn window_uq_constant_curves() {
    let grid = make_grid(-2.0, 2.0, 8).unwrap();
    let psi = compute_kme(&[0.1, -0.3, 0.7], &grid, 0.5).unwrap();
    let v = ModeUncertainty { curves: vec![vec![2.5; 8]; 3], bias: vec![0.0; 3] };
    assert!((window_uq(&v, &psi, 3).unwrap() - 2.5).abs() < 1e-12);
    let zero = ModeUncertainty { curves: vec![vec![0.0; 8]; 3], bias: vec![0.0; 3] };
    assert_eq!(window_uq(&zero, &psi, 2).unwrap(), 0.0);
    assert!(window_uq(&v, &psi, 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn curves_have_zero_minimum(seed in any::<u64>(), sigma in 0.05f64..3.0) {
        let basis = Arc::new(build_basis(3, 3).unwrap());
        let grid = make_grid(-3.0, 3.0, 8).unwrap();
        let mut r = rng(seed);
        let h = SpinHamiltonian::assemble(&random_unit(basis.len(), &mut r), basis).unwrap().dense();
        let centers: Vec<f64> = (0..20).map(|_| normal(&mut r)).collect();
        let psi = compute_kme(&centers, &grid, sigma).unwrap();
        let hp = build_perturbation(&PerturbationSpec::default(), &h, &psi).unwrap();
        prop_assert!((hp.frobenius_norm() - DEFAULT_STRENGTH * h.frobenius_norm()).abs() < 1e-12 * h.frobenius_norm());
        let es = eig_modes(&h).unwrap();
        let mc = first_order_lowest(&es, &hp, 8, DegeneratePolicy::Skip).unwrap();
        let mu = mode_uncertainty(&mc, &grid, sigma, DEFAULT_FLOOR).unwrap();
        for c in &mu.curves {
            let min = c.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(min.abs() <= 1e-10);
            prop_assert!(c.iter().all(|&v| v >= -1e-10));
        }
        prop_assert!(window_uq(&mu, &psi, 8).unwrap() >= 0.0);
    }

    #[test]
    fn corrections_are_gauge_stable(seed in any::<u64>(), phases in proptest::collection::vec(0.0f64..std::f64::consts::TAU, 16)) {
        let (h, hp) = spin_pair(seed);
        let es = eig_modes(&h).unwrap();
        let mut rephased = es.clone();
        for (n, &t) in phases.iter().enumerate() {
            let col: Vec<C> = es.mode(n).iter().map(|z| z * C::from_polar(1.0, t)).collect();
            rephased.modes.set_column(n, &col);
        }
        let count = (0..es.len()).take_while(|&n| isolated(&es, n, 1e-6)).count();
        prop_assume!(count > 0);
        let small = hp.scaled(C::new(1e-3, 0.0));
        let a = first_order_lowest(&es, &small, count, DegeneratePolicy::Error).unwrap();
        let b = first_order_lowest(&rephased, &small, count, DegeneratePolicy::Error).unwrap();
        for (x, y) in a.psi1.iter().zip(&b.psi1) {
            prop_assert!(max_diff(x, y) < 1e-12);
        }
    }
}
