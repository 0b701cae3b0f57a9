//! Vector fields, the fixed-step RK4 integrator, and the scalar iterated
//! maps used to reason about filter error contraction.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Parameters of the Lorenz 63 system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lorenz63Params {
    pub sigma: f64,
    pub r: f64,
    pub b: f64,
}

impl Default for Lorenz63Params {
    fn default() -> Self {
        Self { sigma: 10.0, r: 28.0, b: 8.0 / 3.0 }
    }
}

/// A time-autonomous vector field `x ↦ dx/dt`. Evaluation must be pure.
pub trait Drift {
    fn dim(&self) -> usize;
    fn eval(&self, state: &[f64], out: &mut [f64]);
}

impl Drift for Lorenz63Params {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, s: &[f64], out: &mut [f64]) {
        let (x, y, z) = (s[0], s[1], s[2]);
        out[0] = self.sigma * (y - x);
        out[1] = self.r * x - x * z - y;
        out[2] = x * y - self.b * z;
    }
}

impl<D: Drift + ?Sized> Drift for &D {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, state: &[f64], out: &mut [f64]) {
        (**self).eval(state, out)
    }
}

/// Drift backed by a closure writing the derivative into its second argument.
pub struct FnDrift<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnDrift<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> Drift for FnDrift<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, state: &[f64], out: &mut [f64]) {
        (self.f)(state, out)
    }
}

/// Lorenz 63 right-hand side at `state`.
pub fn lorenz_drift(state: &Vector, params: &Lorenz63Params) -> Result<Vector> {
    if state.dim() != 3 {
        return Err(Error::dims("lorenz_drift", format!("state has dim {}, expected 3", state.dim())));
    }
    let mut out = Vector::zeros(3);
    params.eval(state.as_slice(), out.as_mut_slice());
    Ok(out)
}

struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    fn new(n: usize) -> Self {
        Self { k1: vec![0.0; n], k2: vec![0.0; n], k3: vec![0.0; n], k4: vec![0.0; n], tmp: vec![0.0; n] }
    }

    #[allow(clippy::needless_range_loop)]
    fn step<D: Drift + ?Sized>(&mut self, drift: &D, x: &mut [f64], h: f64) {
        let n = x.len();
        drift.eval(x, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        drift.eval(&self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        drift.eval(&self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        drift.eval(&self.tmp, &mut self.k4);
        for i in 0..n {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

fn check_integration_args<D: Drift + ?Sized>(drift: &D, state: &Vector, dt: f64, substeps: usize) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("time step must be positive and finite, got {dt}")));
    }
    if substeps == 0 {
        return Err(Error::InvalidInput("substeps must be at least 1".into()));
    }
    if state.dim() != drift.dim() {
        return Err(Error::dims("integrate_rk4", format!("state dim {} for drift dim {}", state.dim(), drift.dim())));
    }
    Ok(())
}

/// Advances `state` by `dt` using `substeps` classical RK4 steps of size
/// `dt / substeps`.
///
/// Fails with [`Error::Divergence`] naming the first substep that produced a
/// non-finite component.
pub fn integrate_rk4<D: Drift + ?Sized>(drift: &D, state: &Vector, dt: f64, substeps: usize) -> Result<Vector> {
    check_integration_args(drift, state, dt, substeps)?;
    let h = dt / substeps as f64;
    let mut x = state.as_slice().to_vec();
    let mut ws = Rk4Workspace::new(x.len());
    for substep in 0..substeps {
        ws.step(drift, &mut x, h);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { substep });
        }
    }
    Ok(Vector::from_vec_unchecked(x))
}

/// Every RK4 state from `state` over `steps` steps of size `h`, starting
/// with `state` itself (`steps + 1` entries).
pub fn rk4_path<D: Drift + ?Sized>(drift: &D, state: &Vector, h: f64, steps: usize) -> Result<Vec<Vector>> {
    check_integration_args(drift, state, h, 1)?;
    let mut x = state.as_slice().to_vec();
    let mut ws = Rk4Workspace::new(x.len());
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.clone());
    for substep in 0..steps {
        ws.step(drift, &mut x, h);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { substep });
        }
        out.push(Vector::from_vec_unchecked(x.clone()));
    }
    Ok(out)
}

/// A discrete transition `v_{j+1} = Ψ(v_j)`.
pub trait Transition {
    fn apply(&self, state: &Vector) -> Result<Vector>;
}

/// Ψ as one assimilation interval of RK4 integration.
#[derive(Clone, Debug)]
pub struct Rk4Flow<D> {
    pub drift: D,
    pub dt: f64,
    pub substeps: usize,
}

impl<D: Drift> Rk4Flow<D> {
    pub fn new(drift: D, dt: f64, substeps: usize) -> Self {
        Self { drift, dt, substeps }
    }
}

impl<D: Drift> Transition for Rk4Flow<D> {
    fn apply(&self, state: &Vector) -> Result<Vector> {
        integrate_rk4(&self.drift, state, self.dt, self.substeps)
    }
}

/// Linear transition `v ↦ M v`.
impl Transition for Matrix {
    fn apply(&self, state: &Vector) -> Result<Vector> {
        self.mul_vec(state)
    }
}

impl<F: Fn(&Vector) -> Result<Vector>> Transition for F {
    fn apply(&self, state: &Vector) -> Result<Vector> {
        self(state)
    }
}

/// Scalar affine map `v ↦ λ v + a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMapParams {
    pub lambda: f64,
    pub a: f64,
}

impl AffineMapParams {
    pub fn step(&self, v: f64) -> f64 {
        self.lambda * v + self.a
    }

    /// Limit of the iteration when `|λ| < 1`.
    pub fn fixed_point(&self) -> Option<f64> {
        (self.lambda.abs() < 1.0).then(|| self.a / (1.0 - self.lambda))
    }
}

/// `j`-th iterate from `v0`, in closed form.
pub fn iterate_affine(params: &AffineMapParams, v0: f64, j: u32) -> f64 {
    let AffineMapParams { lambda, a } = *params;
    if lambda == 1.0 {
        return v0 + j as f64 * a;
    }
    let lj = lambda.powi(j as i32);
    lj * v0 + a * (1.0 - lj) / (1.0 - lambda)
}

/// Scalar system `v ↦ λ v` driven toward a reference trajectory by the
/// feedback `K (y − v)`, where `y` is the reference state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlledScalarMap {
    pub lambda: f64,
    pub gain: f64,
}

impl ControlledScalarMap {
    /// Contraction factor `λ − K` of the tracking error.
    pub fn error_factor(&self) -> f64 {
        self.lambda - self.gain
    }

    /// Runs the controlled state from `v0` and the reference from `reference0`
    /// and returns the tracking errors `e_j = v_j − v̂_j` for `j = 0..=steps`.
    pub fn tracking_errors(&self, v0: f64, reference0: f64, steps: usize) -> Vec<f64> {
        let (mut v, mut reference) = (v0, reference0);
        let mut errors = Vec::with_capacity(steps + 1);
        errors.push(v - reference);
        for _ in 0..steps {
            let y = reference;
            v = self.lambda * v + self.gain * (y - v);
            reference *= self.lambda;
            errors.push(v - reference);
        }
        errors
    }
}
