#![allow(clippy::excessive_precision)]

use hardedge::exactseries::{finite_n_gap_series, gap_a1_exact, gap_a1_finite_n};
use hardedge::fredholm::fredholm_det_auto;
use hardedge::kernels::{EnsembleParams, FiniteLaguerreKernel, KernelFn};
use hardedge::quadrature::QuadratureRule;
use hardedge::recurrence::*;
use hardedge::Error;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Γ(a+1, u)/Γ(a+1) for integer a.
fn upper_gamma_ratio(a: u32, u: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=a {
        term *= u / k as f64;
        sum += term;
    }
    (-u).exp() * sum
}

#[test]
fn coefficients_follow_closed_forms() {
    let p = RecurrenceParams { n: 7, lambda: 1.5, lambda1: 0.5, alpha: 2 };
    for q in 0..7 {
        let (pf, nf) = (q as f64, 7.0);
        assert_eq!(p.b(q), (pf - nf) * (0.5 + 2.0 + 1.5 * (nf - pf - 1.0)));
        assert_eq!(p.d(q), pf * (1.5 * (nf - pf) + 2.0));
    }
}

#[test]
fn one_variable_moment() {
    // ∫ (x − t) e^{−λt} dt / ∫ e^{−λt} dt = x − 1/λ
    for &beta in &[1.0f64, 2.0, 5.0] {
        let p = char_moment(1, beta, 1, 0.0, 128).unwrap();
        assert_eq!(p.degree(), 1);
        let w = ln_selberg_laguerre(0.0, beta, 1);
        assert!((w - (2.0 / beta).ln()).abs() < 1e-14);
        for &x in &[0.0f64, 0.3, 4.0] {
            let (sign, ln) = p.eval_log(x);
            let expect = x - 2.0 / beta;
            assert_eq!(sign, expect.signum());
            assert!(rel(sign * (ln - w).exp(), expect) < 1e-13);
        }
    }
}

#[test]
fn two_variable_unitary_moment() {
    // β = 2: ⟨(x − x₁)(x − x₂)⟩ is the monic Laguerre polynomial x² − 4x + 2
    let p = char_moment(2, 2.0, 1, 0.0, 128).unwrap();
    assert_eq!(p.degree(), 2);
    let w = ln_selberg_laguerre(0.0, 2.0, 2);
    // W = ∫∫ e^{−x−y}(x − y)² = 2
    assert!((w - 2f64.ln()).abs() < 1e-14);
    for &x in &[0.0f64, 1.0, 2.5, 7.0] {
        let (sign, ln) = p.eval_log(x);
        assert!((sign * (ln - w).exp() - (x * x - 4.0 * x + 2.0)).abs() < 1e-12);
    }
}

#[test]
fn mean_trace_from_linear_coefficient() {
    // ⟨Σx_l⟩ = N(λ₁ + 1 + β(N−1)/2)(2/β)
    for &(n, beta, l1) in &[(3usize, 1.0f64, 0.0f64), (5, 4.0, 1.5), (8, 2.5, 0.0)] {
        let p = char_moment(n, beta, 1, l1, 128).unwrap();
        let lead = p.coeffs[n].to_f64();
        let next = p.coeffs[n - 1].to_f64();
        let nf = n as f64;
        let mean = nf * (l1 + 1.0 + beta * (nf - 1.0) / 2.0) * 2.0 / beta;
        assert!(rel(-next / lead, mean) < 1e-12, "n={n} beta={beta}: {} vs {mean}", -next / lead);
    }
}

#[test]
fn constant_term_sign() {
    for &(n, k) in &[(3usize, 1u32), (4, 1), (3, 2), (5, 3)] {
        let p = char_moment(n, 3.0, k, 0.0, 128).unwrap();
        let (sign, _) = p.eval_log(0.0);
        assert_eq!(sign, if (k as usize * n).is_multiple_of(2) { 1.0 } else { -1.0 });
        assert_eq!(p.degree(), k as usize * n);
    }
}

#[test]
fn char_moment_rejects_bad_input() {
    assert!(matches!(char_moment(3, 2.0, 0, 0.0, 128), Err(Error::InvalidParams(_))));
    assert!(matches!(char_moment(3, 2.0, 9, 0.0, 128), Err(Error::InvalidParams(_))));
    assert!(char_moment(3, -1.0, 1, 0.0, 128).is_err());
}

#[test]
fn one_variable_gap_is_incomplete_gamma() {
    for &(beta, a) in &[(2.0f64, 1u32), (1.0, 3), (6.0, 2), (3.0, 6)] {
        for &t in &[0.1f64, 1.0, 3.0] {
            let e = gap_recurrence(1, beta, a, t).unwrap();
            assert!(rel(e, upper_gamma_ratio(a, beta * t / 2.0)) < 1e-13);
        }
    }
    assert_eq!(gap_recurrence(12, 3.0, 0, 0.4).unwrap(), (-3.0f64 * 12.0 * 0.4 / 2.0).exp());
    assert!(matches!(GapRecurrence::new(5, 2.0, 7, 256), Err(Error::Unsupported(_))));
    assert!(gap_recurrence(5, 2.0, 1, -1.0).is_err());
}

#[test]
fn unitary_gap_matches_finite_kernel_fredholm() {
    for &(n, a, t) in &[(5usize, 1u32, 1.0f64), (12, 2, 0.3), (30, 3, 0.2), (20, 4, 0.5)] {
        let p = EnsembleParams::unitary(n, a as f64).unwrap();
        let k = FiniteLaguerreKernel::new(&p).unwrap();
        let f = fredholm_det_auto(&k, t, 1.0).unwrap().value;
        let r = gap_recurrence(n, 2.0, a, t).unwrap();
        assert!((r - f).abs() < 1e-7, "N={n} a={a}: {r} vs {f}");
    }
}

#[test]
fn route_agreement_with_series() {
    for &(n, beta, a) in &[(20usize, 4.0f64, 2u32), (50, 6.0, 2), (30, 3.0, 1)] {
        let g = GapRecurrence::new(n, beta, a, DEFAULT_PRECISION_BITS).unwrap();
        for &s in &[2.0f64, 8.0, 20.0] {
            let t = optimal_scale(n, beta, a as f64) * s;
            let r = g.eval(t).unwrap();
            let other = if a == 1 {
                gap_a1_finite_n(beta, n, t).unwrap()
            } else {
                finite_n_gap_series(beta, a as usize, n, t).unwrap()
            };
            assert!((r - other).abs() < 1e-6, "({n},{beta},{a}) s={s}: {r} vs {other}");
            assert!(rel(r, other) < 1e-11);
        }
    }
    let t = 8.0 / (4.0 * (50.0 + 2.0 / 6.0));
    assert!(rel(gap_recurrence(50, 6.0, 2, t).unwrap(), 0.1526893720501516235556956293290675556805) < 1e-12);
}

#[test]
fn precision_doubling_is_stable() {
    let lo = GapRecurrence::new(60, 6.0, 2, 256).unwrap();
    let hi = GapRecurrence::new(60, 6.0, 2, 512).unwrap();
    for &s in &[1.0f64, 8.0, 30.0] {
        assert!((lo.eval_scaled(s).unwrap() - hi.eval_scaled(s).unwrap()).abs() < 1e-10);
    }
    let lo = DensityRecurrence::new(30, 4, 0.5, 256).unwrap();
    let hi = DensityRecurrence::new(30, 4, 0.5, 512).unwrap();
    for &s in &[1.0f64, 8.0] {
        assert!(rel(lo.eval_scaled(s).unwrap(), hi.eval_scaled(s).unwrap()) < 1e-10);
    }
}

#[test]
fn low_precision_is_reported() {
    assert!(matches!(GapRecurrence::new(10, 2.0, 1, 32), Err(Error::InvalidParams(_))));
}

#[test]
fn normalization_integrals_are_consistent() {
    for &(n, beta, a) in &[(10usize, 2.0f64, 2u32), (30, 6.0, 2), (50, 3.0, 1), (25, 0.5, 4)] {
        let g = GapRecurrence::new(n, beta, a, DEFAULT_PRECISION_BITS).unwrap();
        assert!(g.normalization_defect().abs() < 1e-11, "({n},{beta},{a}): {}", g.normalization_defect());
    }
    for &(n, beta, a) in &[(12usize, 2u32, 1.0f64), (8, 4, 0.5), (6, 6, 2.0)] {
        let d = DensityRecurrence::new(n, beta, a, DEFAULT_PRECISION_BITS).unwrap();
        assert!(d.duality_defect().abs() < 1e-11);
    }
}

#[test]
fn sigma_pv_holds_on_recurrence_data() {
    for &(n, a) in &[(6usize, 1u32), (10, 2), (15, 3)] {
        let g = GapRecurrence::new(n, 2.0, a, DEFAULT_PRECISION_BITS).unwrap();
        for &x in &[0.05f64, 0.5, 2.0] {
            let r = sigma_pv_residual(&g, x).unwrap();
            assert!(r < 1e-10, "N={n} a={a} x={x}: {r}");
        }
    }
    let g = GapRecurrence::new(6, 3.0, 1, 128).unwrap();
    assert!(matches!(sigma_pv_residual(&g, 0.5), Err(Error::Unsupported(_))));
}

#[test]
fn unitary_density_matches_kernel_diagonal() {
    let d = DensityRecurrence::new(20, 2, 1.0, DEFAULT_PRECISION_BITS).unwrap();
    let p = EnsembleParams::unitary(20, 1.0).unwrap();
    let k = FiniteLaguerreKernel::new(&p).unwrap();
    for &s in &[0.05f64, 1.0, 7.5, 30.0, 70.0] {
        let r = d.eval(s).unwrap();
        assert!(rel(r, k.diag(s)) < 1e-8, "s={s}: {r} vs {}", k.diag(s));
    }
    let d = DensityRecurrence::new(1, 2, 1.5, DEFAULT_PRECISION_BITS).unwrap();
    // one variable: s^a e^{−s}/Γ(a+1)
    let s = 2.2f64;
    assert!(rel(d.eval(s).unwrap(), s.powf(1.5) * (-s).exp() / 1.329340388179137) < 1e-12);
}

#[test]
fn density_integrates_to_n() {
    for &(beta, a) in &[(2u32, 0.0f64), (4, 0.5), (6, 1.0)] {
        let n = 10usize;
        let d = DensityRecurrence::new(n, beta, a, DEFAULT_PRECISION_BITS).unwrap();
        // s = u², composite Gauss–Legendre in u up to well past the soft edge
        let u_max = (8.0 * n as f64).sqrt() * 1.5;
        let panels = 40;
        let mut total = 0.0;
        for i in 0..panels {
            let (lo, hi) = (u_max * i as f64 / panels as f64, u_max * (i + 1) as f64 / panels as f64);
            let q = QuadratureRule::gauss_legendre(16, lo, hi).unwrap();
            total += q.integrate(|u: f64| 2.0 * u * d.eval(u * u).unwrap());
        }
        assert!((total - n as f64).abs() < 1e-4 * n as f64, "beta={beta} a={a}: {total}");
    }
}

#[test]
fn density_edge_behaviour() {
    let d = DensityRecurrence::new(15, 4, 1.5, DEFAULT_PRECISION_BITS).unwrap();
    let (s1, s2) = (1e-6f64, 2e-6f64);
    let ratio = d.eval(s2).unwrap() / d.eval(s1).unwrap();
    assert!(rel(ratio, 2f64.powf(1.5)) < 1e-4);
    assert!(matches!(DensityRecurrence::new(10, 3, 1.0, 256), Err(Error::Unsupported(_))));
    assert!(d.eval(0.0).is_err());
}

#[test]
fn limit_curve_vanishes_without_charge() {
    let grid: Vec<f64> = (1..=10).map(|i| 3.0 * i as f64).collect();
    let c = limit_difference_curve(10, 200, 6.0, 0, &grid, LimitQuantity::Gap, 128).unwrap();
    assert!(c.iter().all(|&v| v.abs() < 1e-12));
    assert!(matches!(
        limit_difference_curve(10, 100, 6.0, 1, &grid, LimitQuantity::Gap, 128),
        Err(Error::InvalidParams(_))
    ));
}

#[test]
fn limit_curve_tracks_a1_correction() {
    let grid: Vec<f64> = (1..=60).map(|i| 0.5 * i as f64).collect();
    let g = GapRecurrence::new(50, 6.0, 1, DEFAULT_PRECISION_BITS).unwrap();
    let g0 = GapRecurrence::new(2000, 6.0, 1, DEFAULT_PRECISION_BITS).unwrap();
    let curve = gap_limit_difference(&g, &g0, &grid).unwrap();
    let c2: Vec<f64> = grid.iter().map(|&s| gap_a1_exact(6.0, s).unwrap().1).collect();
    let sup = c2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dev = curve.iter().zip(&c2).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(dev < 0.02 * sup, "sup deviation {dev} vs sup {sup}");
}

#[test]
fn density_limit_curve_is_finite() {
    let grid = [1.0f64, 4.0, 9.0];
    let c = limit_difference_curve(10, 200, 2.0, 1, &grid, LimitQuantity::Density, 256).unwrap();
    // β = 2 uses the 4(N + a/2) = 4N + 2a scaling, so the curve is close to ρ̂₂
    for (&s, &v) in grid.iter().zip(&c) {
        let expect = hardedge::kernels::rho_hat2(1.0, s);
        assert!((v - expect).abs() < 0.1 * expect.abs().max(1e-3), "s={s}: {v} vs {expect}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gap_is_a_survival_function(n in 1usize..25, beta in 0.5f64..6.0, a in 1u32..4, t1 in 0.0f64..2.0, dt in 0.001f64..1.0) {
        let g = GapRecurrence::new(n, beta, a, 128).unwrap();
        prop_assert_eq!(g.eval(0.0).unwrap(), 1.0);
        let (e1, e2) = (g.eval(t1).unwrap(), g.eval(t1 + dt).unwrap());
        prop_assert!(e1 <= 1.0 + 1e-15 && e2 >= 0.0);
        prop_assert!(e2 <= e1 * (1.0 + 1e-13));
    }

    #[test]
    fn degree_is_target_times_n(n in 1usize..12, k in 1u32..5, beta in 0.5f64..5.0) {
        let p = char_moment(n, beta, k, 0.0, 96).unwrap();
        prop_assert_eq!(p.degree(), k as usize * n);
        let top = p.coeffs.iter().fold(0.0f64, |m, c| m.max(c.to_f64().abs()));
        prop_assert!((1e-8..=1e8).contains(&top));
    }
}
