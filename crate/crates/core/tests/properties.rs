use proptest::prelude::*;

use stokes_green_core::heat::{duhamel_scalar, inverse_laplacian};
use stokes_green_core::stokes::{pressure, Forcing};
use stokes_green_core::transform::{forward_sine, inverse_sine, spectral_laplacian};
use stokes_green_core::{
    BoxDomain, Kernels, SpatialGrid, SpectralField, TimeGrid, TruncationPolicy,
};

fn domain() -> impl Strategy<Value = BoxDomain> {
    (0.5..2.0f64, 0.5..2.0f64, 0.5..2.0f64, 0.2..3.0f64)
        .prop_map(|(a, b, c, rho)| BoxDomain::new([a, b, c], rho).unwrap())
}

fn coefficients(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * n * n)
}

fn point(d: BoxDomain) -> impl Strategy<Value = [f64; 3]> {
    let l = d.lengths();
    (0.0..=l[0], 0.0..=l[1], 0.0..=l[2]).prop_map(|(a, b, c)| [a, b, c])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sine_transform_round_trips(d in domain(), c in coefficients(4)) {
        let coeffs = SpectralField::from_coeffs(d, 4, c).unwrap();
        let grid = SpatialGrid::new(d, 9).unwrap();
        let back = forward_sine(&inverse_sine(&coeffs, &grid).unwrap(), 4).unwrap();
        for (a, b) in coeffs.coeffs().iter().zip(back.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn inverse_laplacian_is_a_negative_right_inverse(d in domain(), c in coefficients(4)) {
        let grid = SpatialGrid::new(d, 8).unwrap();
        let f = inverse_sine(&SpectralField::from_coeffs(d, 4, c).unwrap(), &grid).unwrap();
        let inv = inverse_laplacian(&f);
        let scale = f.max_abs().max(f64::MIN_POSITIVE);
        prop_assert!(spectral_laplacian(&inv).max_abs_diff(&f) <= 1e-12 * scale);
        let pairing: f64 = f.values().iter().zip(inv.values()).map(|(a, b)| a * b).sum();
        prop_assert!(pairing <= 0.0);
    }

    #[test]
    fn duhamel_is_exact_for_piecewise_linear_forcing(rate in 1e-8..400.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        // h' = a + b t - rate h, h(0) = 0
        let k = 16;
        let dt = 0.5 / k as f64;
        let g: Vec<f64> = (0..=k).map(|j| a + b * j as f64 * dt).collect();
        let mut h = vec![0.0; k + 1];
        duhamel_scalar(&g, rate, dt, &mut h);
        for (j, hj) in h.iter().enumerate() {
            let t = j as f64 * dt;
            let e = (-rate * t).exp();
            let exact = if rate * t < 1e-3 {
                // series form avoids the cancellation of the closed form
                a * t + (b - a * rate) * t * t / 2.0 - b * rate * t * t * t / 6.0
            } else {
                a * (1.0 - e) / rate + b * (t / rate - (1.0 - e) / (rate * rate))
            };
            prop_assert!((hj - exact).abs() <= 1e-12 * (1.0 + exact.abs()), "{} {}", hj, exact);
        }
    }

    #[test]
    fn green_function_is_symmetric_and_vanishes_on_faces(
        (d, x, xi) in domain().prop_flat_map(|d| (Just(d), point(d), point(d))),
        s in 0.02..0.5f64,
        face in 0usize..6,
    ) {
        let k = Kernels::new(d, TruncationPolicy::for_horizon(1.0)).unwrap();
        let a = k.g_spectral(x, s, xi, 0.0).unwrap();
        let b = k.g_spectral(xi, s, x, 0.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        let mut on_face = xi;
        on_face[face % 3] = if face < 3 { 0.0 } else { d.lengths()[face % 3] };
        prop_assert_eq!(k.g_spectral(x, s, on_face, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn free_kernel_gradients_are_antisymmetric(
        (d, x, xi) in domain().prop_flat_map(|d| (Just(d), point(d), point(d))),
        s in 0.001..1.0f64,
    ) {
        let k = Kernels::new(d, TruncationPolicy::for_horizon(1.0)).unwrap();
        let gx = k.grad_x_z(x, s, xi, 0.0).unwrap();
        let gxi = k.grad_xi_z(x, s, xi, 0.0).unwrap();
        for a in 0..3 {
            prop_assert_eq!(gx[a] + gxi[a], 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn pressure_is_linear(seed in 0u64..1000, alpha in -2.0..2.0f64, beta in -2.0..2.0f64) {
        let d = BoxDomain::unit_cube();
        let time = TimeGrid::new(0.25, 6).unwrap();
        let w1 = Forcing::random(d, time, 3, 2, seed).unwrap();
        let w2 = Forcing::random(d, time, 3, 2, seed + 1).unwrap();
        let p = pressure(&w1.combine(alpha, beta, &w2), 6).unwrap();
        let p1 = pressure(&w1, 6).unwrap();
        let p2 = pressure(&w2, 6).unwrap();
        let lin = p1.pressure().map(|s| s.scaled(alpha)).plus(beta, p2.pressure());
        let err = p.pressure().plus(-1.0, &lin).l2_norm();
        prop_assert!(err <= 1e-12 * p.pressure().l2_norm().max(1e-300));
    }
}
