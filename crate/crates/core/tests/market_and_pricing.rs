mod support;

use optwave::*;
use support::*;

#[test]
fn grid_spacing_and_nodes() {
    let g = SpatialGrid64::new(75.0, 140.0, 128).unwrap();
    assert!((g.spacing() - 65.0 / 127.0).abs() < 1e-15);
    let g = SpatialGrid64::new(0.0, 200.0, 256).unwrap();
    assert!((g.node(128) - 200.0 * 128.0 / 255.0).abs() < 1e-12);
    for n in 0..3 {
        assert!(matches!(
            SpatialGrid64::new(0.0, 1.0, n),
            Err(Error::InvalidGrid(_))
        ));
    }
}

#[test]
fn gbm_degenerate_paths() {
    let path = simulate_gbm(100.0, 0.05, 0.0, 1.0, 50, 7).unwrap();
    assert!((path.prices.last().unwrap() - 100.0 * 0.05f64.exp()).abs() < 1e-10);
    let flat = simulate_gbm(100.0f64, 0.0, 0.0, 1.0, 50, 7).unwrap();
    assert!(flat.prices.iter().all(|&p| (p - 100.0).abs() < 1e-12));
}

#[test]
fn gbm_mean_matches_exponential_growth() {
    let n = 100_000;
    let s = sample_terminal_prices(100.0, 0.05, 0.2, 1.0, n, 11).unwrap();
    assert!(s.iter().all(|&x| x > 0.0));
    let mean = s.iter().sum::<f64>() / n as f64;
    let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!((mean - 100.0 * 0.05f64.exp()).abs() < 3.0 * se);
    // discounted under mu = r
    let disc = (-0.05f64).exp() * mean;
    assert!((disc - 100.0).abs() < 3.0 * se * (-0.05f64).exp());
}

#[test]
fn gbm_is_deterministic_per_seed() {
    let a = simulate_gbm(100.0, 0.05, 0.3, 2.0, 500, 42).unwrap();
    let b = simulate_gbm(100.0, 0.05, 0.3, 2.0, 500, 42).unwrap();
    let c = simulate_gbm(100.0, 0.05, 0.3, 2.0, 500, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.prices, c.prices);
    assert!(a.prices.iter().all(|&p| p > 0.0));
}

#[test]
fn erf_and_normal_cdf_against_quadrature() {
    let q = Quadrature::new(20, 0.1);
    assert_eq!(erf(0.0f64), 0.0);
    assert!((erf(6.0f64) - 1.0).abs() < 1e-15);
    assert!((erf(1.0f64) - erf_by_quadrature(&q, 1.0)).abs() < 1e-14);
    assert!((erf(1.0f64) - 0.8427007929497149).abs() < 1e-15);
    assert_eq!(std_normal_cdf(0.0f64), 0.5);
    assert!((std_normal_cdf(2.0f64) + std_normal_cdf(-2.0) - 1.0).abs() < 1e-15);
    let n1 = 0.5 + 0.5 * erf_by_quadrature(&q, std::f64::consts::FRAC_1_SQRT_2);
    assert!((std_normal_cdf(1.0) - n1).abs() < 1e-14);
}

#[test]
fn jacobi_functions_against_amplitude_inversion() {
    let q = Quadrature::new(20, 0.1);
    let m = EllipticModulus::<f64>::new(0.5).unwrap();
    let phi = jacobi_amplitude(&q, 0.7, 0.5);
    assert!((jacobi_sn(0.7, m) - phi.sin()).abs() < 1e-13);
    assert!((jacobi_cn(0.7, m) - phi.cos()).abs() < 1e-13);
    for mv in [0.0, 0.3, 1.0] {
        let m = EllipticModulus::<f64>::new(mv).unwrap();
        assert_eq!(jacobi_sn(0.0, m), 0.0);
        assert_eq!(jacobi_cn(0.0, m), 1.0);
    }
}

#[test]
fn jacobi_limits_and_period() {
    let zero = EllipticModulus::<f64>::new(0.0).unwrap();
    let one = EllipticModulus::<f64>::new(1.0).unwrap();
    for i in 0..=2000 {
        let u = -10.0 + 20.0 * i as f64 / 2000.0;
        assert!((jacobi_sn(u, zero) - u.sin()).abs() <= 1e-10);
        assert!((jacobi_sn(u, one) - u.tanh()).abs() <= 1e-10);
    }
    for mv in [0.1, 0.5, 0.9, 0.99] {
        let m = EllipticModulus::<f64>::new(mv).unwrap();
        let period = 4.0 * elliptic_k(m);
        for &u in &[-1.3, 0.2, 0.9, 2.5] {
            assert!((jacobi_sn(u + period, m) - jacobi_sn(u, m)).abs() <= 1e-9);
        }
    }
}

#[test]
fn d1_d2_reference_values() {
    let p = OptionParams64::reference();
    let (d1, d2) = d1_d2(100.0, &p).unwrap();
    assert!((d1 - 0.35).abs() < 1e-14 && (d2 - 0.15).abs() < 1e-14);
    let at_rate = OptionParams { rate: 0.0, ..p };
    let (d1, d2) = d1_d2(100.0, &at_rate).unwrap();
    assert!((d1 - 0.1).abs() < 1e-15 && (d2 + 0.1).abs() < 1e-15);
}

#[test]
fn price_limits() {
    let p = OptionParams {
        dividend_yield: 0.02,
        ..OptionParams64::reference()
    };
    let deep = bs_price(1e6, &p, OptionKind::Call).unwrap();
    let intrinsic = 1e6 * (-0.02f64).exp() - 100.0 * (-0.05f64).exp();
    assert!((deep - intrinsic).abs() / intrinsic < 1e-14);
    let expiring = OptionParams {
        maturity: 1e-12,
        ..OptionParams64::reference()
    };
    assert!((bs_price(120.0, &expiring, OptionKind::Call).unwrap() - 20.0).abs() < 1e-8);
    let p = OptionParams64::reference();
    assert!((bs_price(1e-8, &p, OptionKind::Put).unwrap() - 100.0 * (-0.05f64).exp()).abs() < 1e-7);
}

#[test]
fn reference_call_against_monte_carlo() {
    let p = OptionParams64::reference();
    let (mc, se) = monte_carlo_price(100.0, &p, OptionKind::Call, 1_000_000, 5);
    let closed = bs_price(100.0, &p, OptionKind::Call).unwrap();
    assert!((closed - 10.450583572185567).abs() < 1e-12);
    assert!((closed - mc).abs() < 3.0 * se);
}

#[test]
fn greek_identities() {
    let p = OptionParams {
        dividend_yield: 0.03,
        ..OptionParams64::reference()
    };
    for &s in &[60.0, 100.0, 170.0] {
        let c = bs_greeks(s, &p, OptionKind::Call).unwrap();
        let q = bs_greeks(s, &p, OptionKind::Put).unwrap();
        assert!((c.delta - q.delta - (-0.03f64).exp()).abs() < 1e-14);
        assert!((c.gamma - q.gamma).abs() < 1e-15);
        assert!((c.vega - q.vega).abs() < 1e-12);
    }
    assert!((bs_greeks(1e5, &p, OptionKind::Call).unwrap().delta - (-0.03f64).exp()).abs() < 1e-14);
}

#[test]
fn reference_greeks_against_differences() {
    let p = OptionParams64::reference();
    let s = 100.0;
    for kind in [OptionKind::Call, OptionKind::Put] {
        let g = bs_greeks(s, &p, kind).unwrap();
        let price = |p: OptionParams<f64>, s: f64| bs_price(s, &p, kind).unwrap();
        assert!(relative_gap(g.delta, derivative(|x| price(p, x), s, 1.0)) <= 1e-5);
        assert!(relative_gap(g.gamma, second_derivative(|x| price(p, x), s, 1.0)) <= 1e-5);
        assert!(
            relative_gap(
                g.vega,
                derivative(|x| price(OptionParams { volatility: x, ..p }, s), 0.2, 0.05)
            ) <= 1e-5
        );
        assert!(
            relative_gap(
                g.rho,
                derivative(|x| price(OptionParams { rate: x, ..p }, s), 0.05, 0.02)
            ) <= 1e-5
        );
        assert!(
            relative_gap(
                g.theta,
                -derivative(|x| price(OptionParams { maturity: x, ..p }, s), 1.0, 0.1)
            ) <= 1e-5
        );
    }
}

#[test]
fn curves_are_monotone_and_match_pointwise_prices() {
    let p = OptionParams64::reference();
    let grid = SpatialGrid64::new(0.0, 200.0, 256).unwrap();
    let call = bs_curve(&grid, &p, OptionKind::Call).unwrap();
    assert!(call.windows(2).all(|w| w[1] >= w[0]));
    let put = bs_curve(&grid, &p, OptionKind::Put).unwrap();
    assert!((put[0] - 100.0 * (-0.05f64).exp()).abs() < 1e-12);
    let grid = SpatialGrid64::new(75.0, 140.0, 128).unwrap();
    let curve = bs_curve(&grid, &p, OptionKind::Put).unwrap();
    for (i, v) in curve.iter().enumerate() {
        assert_eq!(*v, bs_price(grid.node(i), &p, OptionKind::Put).unwrap());
    }
}

#[test]
fn parity_on_a_lattice() {
    for &s in &[50.0, 90.0, 100.0, 130.0, 250.0] {
        for &vol in &[0.05, 0.2, 0.6] {
            for &rate in &[-0.01, 0.0, 0.05, 0.1] {
                for &maturity in &[0.01, 0.5, 1.0, 5.0] {
                    let p = OptionParams64 {
                        strike: 100.0,
                        rate,
                        volatility: vol,
                        maturity,
                        dividend_yield: 0.01,
                    };
                    assert!(parity_gap(s, &p).unwrap().abs() <= 1e-10);
                }
            }
        }
    }
}

#[test]
fn black_scholes_surface_residual_shrinks_with_refinement() {
    let p = OptionParams64::reference();
    let residual = |n_s: usize, n_t: usize| {
        let grid = SpatialGrid64::new(80.0, 130.0, n_s).unwrap();
        let surf = sample_surface(grid, 0.0, 0.4 / (n_t - 1) as f64, n_t, |s, t| {
            let q = OptionParams {
                maturity: 1.0 - t,
                ..p
            };
            num_complex::Complex64::new(bs_price(s, &q, OptionKind::Put).unwrap(), 0.0)
        })
        .unwrap();
        pde_residual(
            &[&surf],
            ResidualEquation::BlackScholes {
                sigma: 0.2,
                rate: 0.05,
            },
        )
        .unwrap()
        .linf
    };
    let coarse = residual(51, 21);
    let fine = residual(101, 41);
    assert!((coarse / fine).log2() > 1.8);
}

#[test]
fn invalid_parameters_are_rejected() {
    let p = OptionParams {
        volatility: 0.0,
        ..OptionParams64::reference()
    };
    assert!(bs_price(100.0, &p, OptionKind::Call).is_err());
    let p = OptionParams64::reference();
    assert!(bs_price(-1.0, &p, OptionKind::Call).is_err());
    assert!(simulate_gbm(-1.0, 0.0, 0.2, 1.0, 10, 0).is_err());
}
