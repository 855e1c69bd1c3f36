use super::*;
use crate::constants::Constants;
use crate::gaussian::GaussianState;
use crate::moments::collective_dispersions;

fn spec2(m: usize, ext: f64) -> GridSpec {
    GridSpec::new(2, m, -ext, ext).unwrap()
}

/// Brute-force C_Q(1,2) of exp(−(x₁²+x₂²)/2 − b·x₁x₂) by a plain Riemann
/// sum on a 512² lattice over [−12, 12]², independent of the grid engine.
fn quadrature_cq12(b: f64) -> f64 {
    let m = 512;
    let h = 24.0 / m as f64;
    let (mut z, mut s1, mut s2, mut s12) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..m {
        let x1 = -12.0 + (i as f64 + 0.5) * h;
        for j in 0..m {
            let x2 = -12.0 + (j as f64 + 0.5) * h;
            let w = (-(x1 * x1 + x2 * x2) - 2.0 * b * x1 * x2).exp();
            z += w;
            s1 += w * x1;
            s2 += w * x2;
            s12 += w * x1 * x2;
        }
    }
    s12 / z - (s1 / z) * (s2 / z)
}

#[test]
fn spec_validation() {
    assert!(GridSpec::new(0, 64, -1.0, 1.0).is_err());
    assert!(GridSpec::new(4, 16, -1.0, 1.0).is_err());
    assert!(GridSpec::new(1, 8, -1.0, 1.0).is_err());
    assert!(GridSpec::new(1, 48, -1.0, 1.0).is_err());
    assert!(GridSpec::new(1, 64, 1.0, 1.0).is_err());
    assert!(GridSpec::new(3, 512, -1.0, 1.0).is_err(), "512^3 exceeds the default cap");
    assert!(GridSpec::new(3, 256, -1.0, 1.0).is_ok());
    assert!(GridSpec::with_memory_cap(2, 64, -1.0, 1.0, 1000).is_err());
}

#[test]
fn momentum_convention() {
    let s = GridSpec::new(1, 16, -4.0, 4.0).unwrap();
    assert_eq!(s.dx(), 0.5);
    let p = s.momenta(2.0);
    let dp = 2.0 * 2.0 * std::f64::consts::PI / 8.0;
    assert!((p[1] - dp).abs() < 1e-15);
    assert!((p[8] + 8.0 * dp).abs() < 1e-15);
    assert!((p[15] + dp).abs() < 1e-15);
}

#[test]
fn vacuum_one_particle_moments() {
    let spec = GridSpec::new(1, 256, -10.0, 10.0).unwrap();
    let s = GridState::from_function(spec, |x: &[f64]| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0))
        .unwrap();
    let m = s.moments(1.0).unwrap();
    assert!(m.mean_q()[0].abs() < 1e-8);
    assert!((m.var_q(0) - 0.5).abs() < 1e-8);
    assert!((m.var_p(0) - 0.5).abs() < 1e-8);
    assert_eq!(s.symmetry(), Symmetry::None);
}

#[test]
fn factorizable_gaussian_has_zero_qcf() {
    let s = GridState::from_function(spec2(128, 10.0), wavefunctions::correlated_gaussian(1.0, 0.0, 1.0)).unwrap();
    let m = s.moments(1.0).unwrap();
    assert!(m.cov_q()[(0, 1)].abs() < 1e-8);
    assert!(m.cov_p()[(0, 1)].abs() < 1e-8);
}

#[test]
fn correlated_gaussian_matches_quadrature_oracle() {
    let oracle = quadrature_cq12(0.5);
    // Analytic value for comparison: off-diagonal of (2A)⁻¹, A = [[1, .5], [.5, 1]].
    assert!((oracle + 1.0 / 3.0).abs() < 1e-10);
    const FROZEN_CQ12: f64 = -0.333_333_333_333;
    let s = GridState::from_function(spec2(256, 12.0), wavefunctions::correlated_gaussian(1.0, 0.5, 1.0)).unwrap();
    let m = s.moments(1.0).unwrap();
    assert!((m.cov_q()[(0, 1)] - FROZEN_CQ12).abs() < 1e-9);
    assert!((m.cov_p()[(0, 1)] - 0.25).abs() < 1e-9);
}

#[test]
fn vacuum_pair_matches_gaussian_engine() {
    let s = GridState::from_function(spec2(128, 10.0), wavefunctions::vacuum(1.0)).unwrap();
    let grid = s.moments(1.0).unwrap();
    let exact = GaussianState::product_vacuum(2, &Constants::natural()).unwrap().moments().unwrap();
    assert!((grid.cov_q() - exact.cov_q()).amax() < 1e-8);
    assert!((grid.cov_p() - exact.cov_p()).amax() < 1e-8);
}

#[test]
fn two_mode_squeezed_matches_gaussian_engine() {
    let hbar = 1.0;
    let s = GridState::from_function(spec2(256, 12.0), wavefunctions::two_mode_squeezed(0.5, hbar)).unwrap();
    let grid = s.moments(hbar).unwrap();
    let exact = GaussianState::two_mode_squeezed(0.5, &Constants::natural()).unwrap().moments().unwrap();
    assert!((grid.cov_q() - exact.cov_q()).amax() < 1e-6);
    assert!((grid.cov_p() - exact.cov_p()).amax() < 1e-6);
    for i in 0..2 {
        assert!(grid.mean_q()[i].abs() < 1e-6 && grid.mean_p()[i].abs() < 1e-6);
    }
}

#[test]
fn sampled_gaussian_wavefunction_matches_at_other_hbar() {
    let c = Constants::new(2.0).unwrap();
    let g = GaussianState::random(2, 5, 0.4, &c).unwrap().displaced(&[0.3, -0.2, 0.5, 1.0]).unwrap();
    let wf = g.wavefunction().unwrap();
    let s = GridState::from_function(spec2(256, 14.0), |x: &[f64]| wf.eval(x)).unwrap();
    let grid = s.moments(2.0).unwrap();
    let exact = g.moments().unwrap();
    assert!((grid.cov_q() - exact.cov_q()).amax() < 1e-6);
    assert!((grid.cov_p() - exact.cov_p()).amax() < 1e-6);
    for i in 0..2 {
        assert!((grid.mean_q()[i] - exact.mean_q()[i]).abs() < 1e-6);
        assert!((grid.mean_p()[i] - exact.mean_p()[i]).abs() < 1e-6);
    }
}

#[test]
fn plane_phase_shifts_mean_momentum_only() {
    let s = GridState::from_function(spec2(128, 10.0), wavefunctions::correlated_gaussian(1.0, 0.3, 1.0)).unwrap();
    let boosted = s.boosted(0, 0.7, 1.0).unwrap();
    let (m0, m1) = (s.moments(1.0).unwrap(), boosted.moments(1.0).unwrap());
    assert!((m1.mean_p()[0] - m0.mean_p()[0] - 0.7).abs() < 1e-8);
    assert!((m1.mean_p()[1] - m0.mean_p()[1]).abs() < 1e-8);
    assert!((m1.cov_p() - m0.cov_p()).amax() < 1e-8);
}

#[test]
fn collective_variance_agrees_with_qcf_sum() {
    for (r, tol) in [(0.0, 1e-8), (1.0, 1e-6)] {
        let s = GridState::from_function(spec2(256, 12.0), wavefunctions::two_mode_squeezed(r, 1.0)).unwrap();
        let vq = s.collective_operator_variance(Quadrature::Q, 1.0).unwrap();
        let vp = s.collective_operator_variance(Quadrature::P, 1.0).unwrap();
        assert!((vq - (2.0 * r).exp()).abs() < tol, "r={r}: {vq}");
        assert!((vp - (-2.0 * r).exp()).abs() < tol);
        let (dq2, dp2) = collective_dispersions(&s.moments(1.0).unwrap());
        assert!((dq2 - vq).abs() <= 1e-8 * vq);
        assert!((dp2 - vp).abs() <= 1e-8 * vp);
    }
}

#[test]
fn collective_variance_single_particle_is_the_variance() {
    let spec = GridSpec::new(1, 128, -10.0, 10.0).unwrap();
    let s = GridState::from_function(spec, |x: &[f64]| {
        Complex64::from_polar((-(x[0] - 0.5).powi(2) / 1.5).exp(), 0.3 * x[0])
    })
    .unwrap();
    let m = s.moments(1.0).unwrap();
    let v = s.collective_operator_variance(Quadrature::Q, 1.0).unwrap();
    assert!((v - m.var_q(0)).abs() < 1e-12);
}

#[test]
fn symmetrize_is_idempotent_and_tags() {
    let g = |x: f64| (-(x - 1.0).powi(2)).exp();
    let h = |x: f64| (-(x + 0.5).powi(2) / 2.0).exp() * (1.0 + 0.3 * x);
    let s = GridState::from_function(spec2(64, 8.0), move |x: &[f64]| Complex64::new(g(x[0]) * h(x[1]), 0.0))
        .unwrap();
    for kind in [Symmetry::Bosonic, Symmetry::Fermionic] {
        let once = s.symmetrize(kind).unwrap();
        let twice = once.symmetrize(kind).unwrap();
        assert_eq!(once.symmetry(), kind);
        let diff = once.amps().iter().zip(twice.amps()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }
    // Fermionic result is the normalized Slater combination g⊗h − h⊗g.
    let slater = GridState::from_function(spec2(64, 8.0), move |x: &[f64]| {
        Complex64::new(g(x[0]) * h(x[1]) - h(x[0]) * g(x[1]), 0.0)
    })
    .unwrap();
    let f = s.symmetrize(Symmetry::Fermionic).unwrap();
    let diff = f.amps().iter().zip(slater.amps()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-12);
    assert!(s.symmetrize(Symmetry::None).is_err());
}

#[test]
fn already_symmetric_is_fixed_by_bosonic_projection() {
    let s = GridState::from_function(spec2(64, 10.0), wavefunctions::two_mode_squeezed(0.3, 1.0)).unwrap();
    let b = s.symmetrize(Symmetry::Bosonic).unwrap();
    let diff = s.amps().iter().zip(b.amps()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-12);
}

#[test]
fn pauli_exclusion_is_degenerate() {
    let s = GridState::from_function(spec2(64, 8.0), |x: &[f64]| {
        Complex64::new((-(x[0] - 1.0).powi(2)).exp() * (-(x[1] - 1.0).powi(2)).exp(), 0.0)
    })
    .unwrap();
    assert!(matches!(s.symmetrize(Symmetry::Fermionic), Err(Error::DegenerateProjection(_))));
}

#[test]
fn three_particle_symmetrization() {
    let spec = GridSpec::new(3, 32, -7.0, 7.0).unwrap();
    let s = GridState::from_function(spec, |x: &[f64]| {
        let f = |v: f64, c: f64| (-(v - c).powi(2) / 2.0).exp();
        Complex64::new(f(x[0], -1.0) * f(x[1], 0.0) * f(x[2], 1.2), 0.0)
    })
    .unwrap();
    let fer = s.symmetrize(Symmetry::Fermionic).unwrap();
    let bos = s.symmetrize(Symmetry::Bosonic).unwrap();
    // from_parts re-checks the sign under every transposition.
    assert!(GridState::from_parts(*fer.spec(), fer.amps().to_vec(), Symmetry::Fermionic).is_ok());
    assert!(GridState::from_parts(*bos.spec(), bos.amps().to_vec(), Symmetry::Bosonic).is_ok());
    assert!(GridState::from_parts(*bos.spec(), bos.amps().to_vec(), Symmetry::Fermionic).is_err());
}

#[test]
fn permutation_residuals() {
    let s = GridState::from_function(spec2(128, 10.0), wavefunctions::correlated_gaussian(1.0, 0.5, 1.0)).unwrap();
    let rep = s.permutation_commutation_check(1.0).unwrap();
    assert!(rep.residual("Q") <= 1e-10);
    assert!(rep.residual("P") <= 1e-8);
    // Analytic control: ‖(x₁−x₂)ψ‖/‖x₁ψ‖ = √3 for this state.
    assert!((rep.residual("Q1") - 3f64.sqrt()).abs() < 1e-6);

    let asym = GridState::from_function(spec2(64, 8.0), |x: &[f64]| {
        Complex64::from_polar((-(x[0] - 1.0).powi(2) - (x[1] + 0.5).powi(2) / 2.0).exp(), 0.2 * x[1])
    })
    .unwrap();
    let rep = asym.permutation_commutation_check(1.0).unwrap();
    assert!(rep.max_collective() <= 1e-8);
    assert!(rep.residual("Q1") > 0.1);

    let one = GridState::from_function(GridSpec::new(1, 32, -8.0, 8.0).unwrap(), wavefunctions::vacuum(1.0)).unwrap();
    assert!(one.permutation_commutation_check(1.0).is_err());
}

#[test]
fn parseval_per_axis() {
    let s = GridState::from_function(spec2(64, 8.0), wavefunctions::correlated_gaussian(1.2, -0.4, 1.0)).unwrap();
    let base: f64 = s.amps().iter().map(|a| a.norm_sqr()).sum();
    for axis in 0..2 {
        let mut t = s.amps().to_vec();
        fft_axes(&mut t, 64, 2, &[axis], false);
        let transformed: f64 = t.iter().map(|a| a.norm_sqr()).sum::<f64>() / 64.0;
        assert!((transformed - base).abs() <= 1e-10 * base);
    }
}

#[test]
fn resolution_convergence() {
    // Two-mode squeezed r = 0.5 on [−9, 9]²: the 16-point grid is under-resolved
    // in momentum, 32 points already much better.
    let exact = GaussianState::two_mode_squeezed(0.5, &Constants::natural()).unwrap().moments().unwrap();
    let err = |m: usize| {
        let s = GridState::from_function(spec2(m, 9.0), wavefunctions::two_mode_squeezed(0.5, 1.0)).unwrap();
        let g = s.moments(1.0).unwrap();
        (g.cov_q() - exact.cov_q()).amax().max((g.cov_p() - exact.cov_p()).amax())
    };
    let (coarse, fine) = (err(16), err(32));
    assert!(coarse > 1e-9, "coarse error {coarse:e} is already at round-off");
    assert!(fine * 4.0 <= coarse, "coarse {coarse:e}, fine {fine:e}");
}

#[test]
fn boundary_decay_rejected() {
    let wide = GridState::from_function(spec2(64, 3.0), wavefunctions::vacuum(1.0));
    assert!(matches!(wide, Err(Error::BoundaryDecay { .. })));
    let zero = GridState::from_function(spec2(16, 3.0), |_: &[f64]| Complex64::new(0.0, 0.0));
    assert!(matches!(zero, Err(Error::InvalidArgument(_))));
    let nan = GridState::from_function(spec2(16, 3.0), |_: &[f64]| Complex64::new(f64::NAN, 0.0));
    assert!(nan.is_err());
}

#[test]
fn binary_container_round_trip() {
    let s = GridState::from_function(spec2(32, 8.0), |x: &[f64]| {
        Complex64::from_polar((-(x[0] * x[0] + 2.0 * x[1] * x[1]) / 2.0).exp(), x[0] - 0.4 * x[1])
    })
    .unwrap()
    .symmetrize(Symmetry::Fermionic)
    .unwrap();
    let bytes = s.to_bytes();
    assert_eq!(&bytes[0..4], b"GURG");
    assert_eq!(bytes.len(), HEADER_LEN + 16 * 32 * 32);
    let back = GridState::from_bytes(&bytes).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.to_bytes(), bytes);

    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(GridState::from_bytes(&bad).is_err());
    let mut bad = bytes.clone();
    bad[4] = 9;
    assert!(GridState::from_bytes(&bad).is_err());
    let mut bad = bytes.clone();
    bad[7] = 7;
    assert!(GridState::from_bytes(&bad).is_err());
    assert!(GridState::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    let mut bad = bytes;
    bad[7] = 1; // claims bosonic, data is fermionic
    assert!(GridState::from_bytes(&bad).is_err());
}
