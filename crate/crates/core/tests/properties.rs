mod common;

use common::*;
use enkf_lab::dynamics::{integrate_rk4, lorenz_drift, Lorenz63Params};
use enkf_lab::enkf::{enkf_analyze, init_ensemble, Ensemble, EnkfOptions, EnsembleStats, Perturbations};
use enkf_lab::kalman::{analyze, joseph_covariance, kalman_gain, GaussianState, ObservationModel};
use enkf_lab::linalg::{psd_factor, sample_covariance, sample_mean, solve_spd, woodbury_inverse, Matrix, Vector};
use enkf_lab::randomness::{GaussianSpec, RngStream};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |d| Matrix::new(rows, cols, d).unwrap())
}

fn vector(n: usize, scale: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-scale..scale, n).prop_map(|d| Vector::new(d).unwrap())
}

fn spd(n: usize, floor: f64) -> impl Strategy<Value = Matrix> {
    matrix(n, n).prop_map(move |b| b.matmul(&b.transpose()).unwrap().add_diagonal(floor).symmetrize().unwrap())
}

/// `(Ĉ, H, Γ)` with `n` state and `m` observed components.
fn linear_problem(n: usize, m: usize) -> impl Strategy<Value = (Matrix, ObservationModel)> {
    (spd(n, 0.1), matrix(m, n), spd(m, 0.1))
        .prop_map(|(c, h, g)| (c, ObservationModel::new(h, g).unwrap()))
}

fn sizes() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4, 1usize..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn woodbury_agrees_with_direct_inverse(
        (a, u, c, v) in (1usize..=6, 1usize..=3).prop_flat_map(|(n, k)| (spd(n, 0.5), matrix(n, k), spd(k, 0.5), matrix(k, n)))
    ) {
        let n = a.rows();
        let a_inv = solve_spd(&a, &Matrix::identity(n)).unwrap();
        let w = woodbury_inverse(&a_inv, &u, &c, &v).unwrap();
        let full = to_nalgebra(&a) + to_nalgebra(&u) * to_nalgebra(&c) * to_nalgebra(&v);
        let direct = from_nalgebra(&full.try_inverse().unwrap());
        prop_assert!(relative_diff(&w, &direct) < 1e-9);
    }

    #[test]
    fn solve_spd_agrees_with_nalgebra(a in (1usize..=8).prop_flat_map(|n| spd(n, 0.1)), seed in any::<u64>()) {
        let n = a.rows();
        let b = random_matrix(&mut RngStream::new(seed), n, 2);
        let x = solve_spd(&a, &b).unwrap();
        let oracle = to_nalgebra(&a).cholesky().unwrap().solve(&to_nalgebra(&b));
        prop_assert!(relative_diff(&x, &from_nalgebra(&oracle)) < 1e-10);
    }

    #[test]
    fn analysis_covariance_is_symmetric_and_shrinks(
        (cov, obs) in sizes().prop_flat_map(|(n, m)| linear_problem(n, m)),
        seed in any::<u64>(),
    ) {
        let n = cov.rows();
        let prior = GaussianState::new(random_vector(&mut RngStream::new(seed), n, 1.0), cov.clone()).unwrap();
        let y = random_vector(&mut RngStream::new(seed ^ 1), obs.obs_dim(), 1.0);
        let post = analyze(&prior, &y, &obs).unwrap().state;
        prop_assert!(post.covariance().is_symmetric(0.0));
        prop_assert!(post.covariance().trace().unwrap() <= cov.trace().unwrap() + 1e-12);
        let eig = to_nalgebra(post.covariance()).symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|&l| l > -1e-10));
    }

    #[test]
    fn analysis_covariance_ignores_the_observation(
        (cov, obs) in sizes().prop_flat_map(|(n, m)| linear_problem(n, m)),
        seed in any::<u64>(),
    ) {
        let mut rng = RngStream::new(seed);
        let prior = GaussianState::new(random_vector(&mut rng, cov.rows(), 1.0), cov).unwrap();
        let y1 = random_vector(&mut rng, obs.obs_dim(), 5.0);
        let y2 = random_vector(&mut rng, obs.obs_dim(), 5.0);
        let a = analyze(&prior, &y1, &obs).unwrap().state;
        let b = analyze(&prior, &y2, &obs).unwrap().state;
        prop_assert_eq!(a.covariance(), b.covariance());
    }

    #[test]
    fn joseph_form_at_optimal_gain_matches_short_form(
        (cov, obs) in sizes().prop_flat_map(|(n, m)| linear_problem(n, m)),
    ) {
        let k = kalman_gain(&cov, &obs).unwrap();
        let joseph = joseph_covariance(&cov, &k, &obs).unwrap();
        let short = Matrix::identity(cov.rows()).sub(&k.matmul(obs.operator()).unwrap()).unwrap().matmul(&cov).unwrap();
        prop_assert!(max_abs_diff(&joseph, &short) < 1e-10 * (1.0 + cov.max_abs()));
    }

    #[test]
    fn perturbed_update_mean_identity(
        (members, obs, y, etas) in (1usize..=4, 1usize..=3, 2usize..=8).prop_flat_map(|(n, m, size)| (
            prop::collection::vec(vector(n, 3.0), size),
            (matrix(m, n), spd(m, 0.2)).prop_map(|(h, g)| ObservationModel::new(h, g).unwrap()),
            vector(m, 3.0),
            prop::collection::vec(vector(m, 1.0), size),
        ))
    ) {
        let ensemble = Ensemble::new(members).unwrap();
        let out = enkf_analyze(&ensemble, &y, &obs, Perturbations::Given(&etas), &EnkfOptions::default()).unwrap();
        // Analysis mean = forecast mean update + K* times the mean perturbation.
        let eta_bar = sample_mean(&etas).unwrap();
        let expected = out.mean_update.add(&out.gain.mul_vec(&eta_bar).unwrap()).unwrap();
        let err = out.stats.mean.sub(&expected).unwrap().max_abs();
        prop_assert!(err < 1e-10, "mean identity off by {}", err);
    }

    #[test]
    fn analysis_is_equivariant_under_member_reordering(
        (members, obs, y) in (1usize..=4, 1usize..=3, 2usize..=8).prop_flat_map(|(n, m, size)| (
            prop::collection::vec(vector(n, 3.0), size),
            (matrix(m, n), spd(m, 0.2)).prop_map(|(h, g)| ObservationModel::new(h, g).unwrap()),
            vector(m, 3.0),
        )),
        seed in any::<u64>(),
    ) {
        let size = members.len();
        let etas: Vec<Vector> = {
            let s = GaussianSpec::centered(obs.noise().clone()).unwrap().sampler().unwrap();
            (0..size).map(|i| s.sample(&mut RngStream::new(seed).derive(i as u64))).collect()
        };
        let forward = Ensemble::new(members.clone()).unwrap();
        let reversed = Ensemble::new(members.iter().rev().cloned().collect()).unwrap();
        let rev_etas: Vec<Vector> = etas.iter().rev().cloned().collect();
        let opts = EnkfOptions::default();
        let a = enkf_analyze(&forward, &y, &obs, Perturbations::Given(&etas), &opts).unwrap();
        let b = enkf_analyze(&reversed, &y, &obs, Perturbations::Given(&rev_etas), &opts).unwrap();
        for (x, z) in a.ensemble.members().iter().zip(b.ensemble.members().iter().rev()) {
            prop_assert!(x.sub(z).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn regularized_gain_bounds_expected_spread(
        (members, obs) in (1usize..=4, 1usize..=3, 2usize..=8).prop_flat_map(|(n, m, size)| (
            prop::collection::vec(vector(n, 0.1), size),
            (matrix(m, n), spd(m, 0.05)).prop_map(|(h, g)| ObservationModel::new(h, g).unwrap()),
        )),
        q in 0.0f64..0.01,
    ) {
        // Expected perturbed-observation analysis covariance never exceeds the
        // regularized forecast covariance it was built from.
        let ensemble = Ensemble::new(members).unwrap();
        let stats = ensemble.stats();
        let b = stats.covariance.add_diagonal(q);
        let k = kalman_gain(&b, &obs).unwrap();
        let expected = joseph_covariance(&stats.covariance, &k, &obs).unwrap();
        prop_assert!(expected.trace().unwrap() <= b.trace().unwrap() + 1e-12);
    }

    #[test]
    fn psd_factor_reproduces_semidefinite_covariances(
        (basis, n) in (1usize..=5).prop_flat_map(|n| (1usize..=n).prop_flat_map(move |r| (matrix(n, r), Just(n))))
    ) {
        // Rank-deficient `B Bᵀ`.
        let a = basis.matmul(&basis.transpose()).unwrap().symmetrize().unwrap();
        let l = psd_factor(&a).unwrap();
        prop_assert_eq!(l.shape(), (n, n));
        prop_assert!(max_abs_diff(&l.matmul(&l.transpose()).unwrap(), &a) < 1e-9);
    }

    #[test]
    fn lorenz_drift_respects_z_axis_symmetry(s in vector(3, 30.0)) {
        let p = Lorenz63Params::default();
        let f = lorenz_drift(&s, &p).unwrap();
        let mirrored = Vector::from_slice(&[-s[0], -s[1], s[2]]).unwrap();
        let g = lorenz_drift(&mirrored, &p).unwrap();
        prop_assert_eq!(g.as_slice(), &[-f[0], -f[1], f[2]]);
    }
}

#[test]
fn lorenz_orbits_stay_bounded() {
    let p = Lorenz63Params::default();
    let mut rng = RngStream::new(3);
    for _ in 0..5 {
        let mut state = random_vector(&mut rng, 3, 20.0);
        for _ in 0..300 {
            state = integrate_rk4(&p, &state, 0.1, 10).unwrap();
            assert!(state.max_abs() < 100.0, "escaped to {state}");
        }
    }
}

#[test]
fn sampled_moments_match_target() {
    let cov = Matrix::from_rows(&[&[2.0, 0.6, 0.0], &[0.6, 1.0, -0.3], &[0.0, -0.3, 0.5]]).unwrap();
    let mean = Vector::from_slice(&[1.0, -2.0, 0.5]).unwrap();
    let spec = GaussianSpec::new(mean.clone(), cov.clone()).unwrap();
    let sampler = spec.sampler().unwrap();
    let mut rng = RngStream::new(99);
    let draws: Vec<Vector> = (0..200_000).map(|_| sampler.sample(&mut rng)).collect();
    let m = sample_mean(&draws).unwrap();
    let c = sample_covariance(&draws, &m).unwrap();
    assert!(m.sub(&mean).unwrap().max_abs() < 0.015);
    assert!(relative_diff(&c, &cov) < 0.02);
}

#[test]
fn derived_streams_are_uncorrelated() {
    let base = RngStream::new(5);
    let (mut a, mut b) = (base.derive(0), base.derive(1));
    let n = 100_000;
    let xs = a.standard_normal(n);
    let ys = b.standard_normal(n);
    let corr = xs.dot(&ys).unwrap() / (xs.norm() * ys.norm());
    // Five standard errors.
    assert!(corr.abs() < 5.0 / (n as f64).sqrt(), "correlation {corr}");
}

#[test]
fn degenerate_covariance_samples_stay_in_column_space() {
    // Rank one along (1, 1, 0).
    let cov = Matrix::from_rows(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 0.0]]).unwrap();
    let sampler = GaussianSpec::centered(cov).unwrap().sampler().unwrap();
    let mut rng = RngStream::new(8);
    for _ in 0..1000 {
        let x = sampler.sample(&mut rng);
        assert!((x[0] - x[1]).abs() < 1e-12 && x[2] == 0.0, "{x}");
    }
}

#[test]
fn init_ensemble_moments() {
    let center = Vector::from_slice(&[-11.0, -12.0, 10.0]).unwrap();
    let ensemble = init_ensemble(&center, 0.1, 10_000, &RngStream::new(4)).unwrap();
    let EnsembleStats { mean, covariance } = ensemble.stats();
    assert!(mean.sub(&center).unwrap().max_abs() < 5.0 * 0.1 / (10_000f64).sqrt());
    assert!(relative_diff(&covariance, &Matrix::scaled_identity(3, 0.01)) < 0.05);
}
