use nalgebra::{DVector, Matrix2, Vector2};
use num_complex::Complex64;
use polardeg::gaussian::{
    gaussian_to_fock, product_fock, quadrature_moments, spec_to_gaussian, xi_state, GaussianState,
};
use polardeg::polarimetry::{analyse, decompose, degree_p1, degree_p1sc, p1sc_from_decomposition, su2_rotate};
use polardeg::{ModeSpec, StateSpec, TruncatedFockSpace, TwoModeDensityMatrix};
use proptest::prelude::*;

fn space(d: usize) -> TruncatedFockSpace {
    TruncatedFockSpace::two_mode(d).unwrap()
}

fn complex(max: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max, 0.0..std::f64::consts::TAU).prop_map(|(r, phi)| Complex64::from_polar(r, phi))
}

fn mode(alpha_max: f64, r_max: f64, n_th_max: f64) -> impl Strategy<Value = ModeSpec> {
    (
        complex(alpha_max),
        0.0..r_max,
        0.0..std::f64::consts::TAU,
        0.0..n_th_max,
    )
        .prop_map(|(a, r, t, n)| ModeSpec::new(a, r, t, n).unwrap())
}

fn axis() -> impl Strategy<Value = [f64; 3]> {
    (-1.0f64..1.0, 0.0..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let s = (1.0 - z * z).sqrt();
        [s * phi.cos(), s * phi.sin(), z]
    })
}

/// Random pure state on manifolds `0..=top` of a `top + 1` cutoff.
fn fock_state(top: usize) -> impl Strategy<Value = TwoModeDensityMatrix> {
    let d = top + 1;
    prop::collection::vec(complex(1.0), d * d).prop_filter_map("null vector", move |amps| {
        let sp = space(d);
        let mut psi = DVector::zeros(d * d);
        for m in 0..d {
            for n in 0..d - m {
                psi[sp.index(m, n)] = amps[m * d + n];
            }
        }
        let norm = psi.norm();
        (norm > 1e-3).then(|| TwoModeDensityMatrix::pure(sp, psi / Complex64::from(norm)).unwrap())
    })
}

/// Vacuum probability of a single-mode Gaussian, `2/√det(V+I) exp(-½ δᵀ(V+I)⁻¹δ)`
/// with `δ = √2 × mean` in shot-noise units.
fn vacuum_overlap(mean: Vector2<f64>, cov: Matrix2<f64>) -> f64 {
    let s = cov + Matrix2::identity();
    let delta = mean * 2f64.sqrt();
    let q = delta.dot(&(s.try_inverse().unwrap() * delta));
    2.0 / s.determinant().sqrt() * (-0.5 * q).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn su2_rotations_leave_both_degrees_unchanged(rho in fock_state(5), n in axis(), angle in -6.3f64..6.3) {
        let rotated = su2_rotate(&rho, n, angle).unwrap();
        let a = analyse(&rho, 5).unwrap();
        let b = analyse(&rotated, 5).unwrap();
        prop_assert!((a.p1 - b.p1).abs() < 1e-10);
        prop_assert!((a.p1sc - b.p1sc).abs() < 1e-10);
    }

    #[test]
    fn su2_invariance_for_gaussian_products(h in mode(1.0, 0.4, 0.3), v in mode(1.0, 0.4, 0.3), n in axis(), angle in -6.3f64..6.3) {
        let rho = product_fock(&StateSpec::new(h, v), space(44)).unwrap();
        let rotated = su2_rotate(&rho, n, angle).unwrap();
        let a = analyse(&rho, 43).unwrap();
        let b = analyse(&rotated, 43).unwrap();
        prop_assert!((a.p1 - b.p1).abs() < 1e-8, "{} vs {}", a.p1, b.p1);
        prop_assert!((a.p1sc - b.p1sc).abs() < 1e-8, "{} vs {}", a.p1sc, b.p1sc);
    }

    #[test]
    fn block_sum_matches_full_p1sc(h in mode(1.2, 0.5, 0.5), v in mode(1.2, 0.5, 0.5)) {
        let rho = product_fock(&StateSpec::new(h, v), space(24)).unwrap();
        let dec = decompose(&rho, 46).unwrap();
        let gap = (degree_p1sc(&rho) - p1sc_from_decomposition(&dec)).abs();
        prop_assert!(gap <= degree_p1(&dec).tail_bound + 1e-12, "gap {gap}");
    }

    #[test]
    fn single_manifold_states_have_equal_degrees(n in 1usize..7, amps in prop::collection::vec(complex(1.0), 7)) {
        let sp = space(n + 1);
        let triples: Vec<_> = (0..=n).map(|m| (m, n - m, amps[m])).collect();
        let norm: f64 = triples.iter().map(|t| t.2.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let triples: Vec<_> = triples.into_iter().map(|(a, b, c)| (a, b, c / norm)).collect();
        let rho = TwoModeDensityMatrix::from_fock_amplitudes(sp, &triples).unwrap();
        let r = analyse(&rho, n).unwrap();
        prop_assert!((r.p1 - r.p1sc).abs() < 1e-12);
    }

    #[test]
    fn xi_family_is_always_hidden(phi in -6.3f64..6.3) {
        let r = analyse(&xi_state(phi, space(3)).unwrap(), 2).unwrap();
        prop_assert!(r.p1sc < 1e-12);
        prop_assert!((r.p1 - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn one_mode_against_vacuum_gives_one_minus_vacuum_weight(h in mode(2.0, 0.8, 0.5)) {
        let spec = StateSpec::new(h, ModeSpec::vacuum());
        let g = spec_to_gaussian(&spec);
        let rho = product_fock(&spec, space(64)).unwrap();
        let r = analyse(&rho, 63).unwrap();
        let p0 = vacuum_overlap(g.moments().mode_mean(polardeg::Mode::H), g.moments().mode_cov(polardeg::Mode::H));
        prop_assert!((r.p1 - (1.0 - p0)).abs() < 1e-8 + r.tail_bound, "{} vs {}", r.p1, 1.0 - p0);
    }

    #[test]
    fn fock_conversion_reproduces_moments(h in mode(3.1, 0.5, 0.3), v in mode(3.1, 0.5, 0.3)) {
        let spec = StateSpec::new(h, v);
        prop_assume!(spec.mean_photons() <= 20.0);
        let g = spec_to_gaussian(&spec);
        let rho = product_fock(&spec, space(96)).unwrap();
        let back = quadrature_moments(&rho).unwrap();
        prop_assert!((back.mean - g.mean()).amax() < 1e-6);
        prop_assert!((back.cov - g.cov()).amax() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn correlated_conversion_reproduces_moments(h in mode(0.6, 0.4, 0.2), v in mode(0.6, 0.4, 0.2), t in 0.0f64..1.5) {
        let g = spec_to_gaussian(&StateSpec::new(h, v));
        let (c, s) = (t.cos(), t.sin());
        let mut bs = nalgebra::Matrix4::identity() * c;
        for k in 0..2 {
            bs[(k, k + 2)] = s;
            bs[(k + 2, k)] = -s;
        }
        let mixed = GaussianState::new(bs * g.mean(), bs * g.cov() * bs.transpose()).unwrap();
        let rho = gaussian_to_fock(&mixed, space(40)).unwrap();
        let back = quadrature_moments(&rho).unwrap();
        prop_assert!((back.mean - mixed.mean()).amax() < 1e-6);
        prop_assert!((back.cov - mixed.cov()).amax() < 1e-6);
    }
}
