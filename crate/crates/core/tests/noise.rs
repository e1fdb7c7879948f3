use std::sync::Arc;

use skspec_core::noise::*;
use skspec_core::propagators::{dhat, ModeSymbolQuery};
use skspec_core::quadrature::integrate;
use skspec_core::FrequencyLattice;

fn lat() -> FrequencyLattice {
    FrequencyLattice::new(16).unwrap()
}

#[test]
fn increment_variance_matches_step() {
    let path = sample_path(11, lat(), 1.0, 100_000).unwrap();
    let h = path.dt();
    let re: Vec<f64> = (0..100_000)
        .map(|j| path.increment((2, 1), j).unwrap().re)
        .collect();
    let sq: Vec<f64> = re.iter().map(|x| x * x).collect();
    let est = McEstimate::from_samples(&sq);
    assert!(est.within(h / 2.0, 5.0), "{est:?}");
    let zero: Vec<f64> = (0..100_000)
        .map(|j| path.increment((0, 0), j).unwrap().re.powi(2))
        .collect();
    assert!(McEstimate::from_samples(&zero).within(h, 5.0));
    // distinct modes are uncorrelated
    let cross: Vec<f64> = (0..100_000)
        .map(|j| path.increment((2, 1), j).unwrap().re * path.increment((1, 0), j).unwrap().re / h)
        .collect();
    assert!(McEstimate::from_samples(&cross).within(0.0, 5.0));
}

fn run(seed: u64, eps: f64, cutoff: f64, t: f64, k: usize) -> ConvolutionState {
    let path = sample_path(seed, lat(), t, k).unwrap();
    let mut st = [ConvolutionState::new(eps, cutoff, &path).unwrap()];
    for j in 0..k {
        advance_convolutions(&mut st, &path, j).unwrap();
    }
    st.into_iter().next().unwrap()
}

#[test]
fn heat_zero_mode_variance() {
    let xs: Vec<f64> = (0..10_000)
        .map(|s| run(s, 0.0, 1.0, 1.0, 4).mode((0, 0)).re.powi(2))
        .collect();
    let est = McEstimate::from_samples(&xs);
    let want = (1.0 - (-2.0f64).exp()) / 2.0;
    assert!(est.within(want, 5.0), "{est:?} vs {want}");
}

fn wave_variance(eps: f64, k2: f64, t: f64) -> f64 {
    integrate(
        |s| (dhat(ModeSymbolQuery::from_bracket_sq(eps, k2, s)).unwrap() / (eps * eps)).powi(2),
        0.0,
        t,
        1e-13,
    )
    .unwrap()
}

#[test]
fn wave_mode_variance_is_step_size_independent() {
    let (eps, t) = (0.2, 0.7);
    for &n in &[(0i64, 0i64), (1, 1)] {
        let k2 = (1 + n.0 * n.0 + n.1 * n.1) as f64;
        let want = wave_variance(eps, k2, t);
        for &k in &[4usize, 64] {
            let xs: Vec<f64> = (0..4000)
                .map(|s| run(1000 + s, eps, 1.0, t, k).mode(n).norm_sqr())
                .collect();
            let est = McEstimate::from_samples(&xs);
            assert!(est.within(want, 5.0), "n {n:?} K {k}: {est:?} vs {want}");
        }
    }
}

#[test]
fn long_run_variance_is_stationary_value() {
    // eps = 0.5, n = 0: stationary variance 1/2
    let xs: Vec<f64> = (0..4000)
        .map(|s| run(s, 0.5, 1.0, 50.0, 1).mode((0, 0)).re.powi(2))
        .collect();
    assert!(McEstimate::from_samples(&xs).within(0.5, 5.0));
}

#[test]
fn zero_time_and_zero_data() {
    let est = sigma_from_state_mc(0.1, 4.0, 0.0, 100, 0).unwrap();
    assert_eq!(est.mean, 0.0);
    let path = sample_path(0, lat(), 1.0, 2).unwrap();
    let st = ConvolutionState::new(0.3, 2.0, &path).unwrap();
    assert!(st.coefficients().iter().all(|c| c.norm() == 0.0));
    assert!(sigma_from_state_mc(0.1, 4.0, 1.0, 10, 0).is_err());
}

#[test]
fn point_variance_is_spatially_stationary() {
    let (eps, cutoff, t) = (0.0, 3.0, 0.5);
    let modes = Arc::new(SupportModes::new(cutoff).unwrap());
    let points = [(0.0, 0.0), (1.0, 2.0), (3.0, 0.5), (5.5, 5.5), (0.3, 4.1)];
    let mut acc = vec![Vec::new(); points.len()];
    for s in 0..4000u64 {
        let path = sample_path(s, lat(), t, 1).unwrap();
        let mut st = [ConvolutionState::with_modes(eps, modes.clone(), &path).unwrap()];
        advance_convolutions(&mut st, &path, 0).unwrap();
        for (i, &x) in points.iter().enumerate() {
            acc[i].push(st[0].value_at(x).powi(2));
        }
    }
    let ests: Vec<McEstimate> = acc.iter().map(|v| McEstimate::from_samples(v)).collect();
    for e in &ests[1..] {
        let diff = e.mean - ests[0].mean;
        assert!(diff.abs() <= 5.0 * (e.stderr.powi(2) + ests[0].stderr.powi(2)).sqrt());
    }
}

#[test]
fn shared_noise_is_continuous_in_eps() {
    let l = FrequencyLattice::new(32).unwrap();
    let path = sample_path(42, l, 0.5, 50).unwrap();
    let eps = [0.2, 0.21, 0.201, 0.2001];
    let mut st: Vec<ConvolutionState> = eps
        .iter()
        .map(|&e| ConvolutionState::new(e, 6.0, &path).unwrap())
        .collect();
    for j in 0..50 {
        advance_convolutions(&mut st, &path, j).unwrap();
    }
    let base = st[0].field(l).unwrap();
    let d: Vec<f64> = st[1..]
        .iter()
        .map(|s| s.field(l).unwrap().sub(&base).unwrap().sobolev_norm(-0.5))
        .collect();
    assert!(d[0] > d[1] && d[1] > d[2] && d[2] < 2e-2 * d[0], "{d:?}");
}

#[test]
fn small_mass_paths_approach_heat_path() {
    let l = FrequencyLattice::new(32).unwrap();
    let path = sample_path(9, l, 0.5, 1).unwrap();
    let eps = [0.0, 0.2, 0.1, 0.05, 0.025];
    let mut st: Vec<ConvolutionState> = eps
        .iter()
        .map(|&e| ConvolutionState::new(e, 4.0, &path).unwrap())
        .collect();
    advance_convolutions(&mut st, &path, 0).unwrap();
    let heat = st[0].field(l).unwrap();
    let d: Vec<f64> = st[1..]
        .iter()
        .map(|s| s.field(l).unwrap().sub(&heat).unwrap().sobolev_norm(-0.5))
        .collect();
    for w in d.windows(2) {
        assert!(w[1] < w[0], "{d:?}");
    }
}

#[test]
fn point_variance_grows_logarithmically() {
    let t = 1.0;
    let est: Vec<f64> = [8.0, 16.0, 32.0]
        .iter()
        .map(|&n| sigma_from_state_mc(0.0, n, t, 400, 77).unwrap().mean)
        .collect();
    let inc1 = est[1] - est[0];
    let inc2 = est[2] - est[1];
    // each doubling adds about log(2)/(4 pi) = 0.055
    for inc in [inc1, inc2] {
        assert!(inc > 0.02 && inc < 0.1, "{est:?}");
    }
}

#[test]
fn heat_residual_resolved_for_stiff_modes() {
    // Closed form (1 - e^{-2hk}) / 2k - w^2 / h of the centred residual.
    for &(k2, h) in &[(65537.0f64, 1.0f64), (4097.0, 0.25), (2.0, 1e-3)] {
        let c = step_coeffs(0.0, k2, h).unwrap();
        let w = -(-h * k2).exp_m1() / k2;
        let want = -(-2.0 * h * k2).exp_m1() / (2.0 * k2) - w * w / h;
        let got = c.l[0][0].powi(2);
        assert!(
            (got - want).abs() <= 1e-8 * want,
            "k2 {k2} h {h}: {got} vs {want}"
        );
    }
}
