//! Discrete k-energies, their first and second variations, and gradient flow.
//!
//! `E_1 = 1/2 int |gamma'|^2`, `E_{2l} = 1/2 int |Delta^(l-1) tau|^2` and
//! `E_{2l+1} = 1/2 int |nabla Delta^(l-1) tau|^2`. The first variation is
//! `-int <tau_k, V>`, so the L2 gradient is `-tau_k`.

mod flow;
mod hessian;

pub use flow::{run_flow, Descent, FlowConfig, FlowOutcome, FlowResult, TraceRow};
pub use hessian::{
    hessian_spectrum, second_variation, Expansion, SecondVariation, SpectrumOptions, SpectrumReport, DEFAULT_HESSIAN_CAP,
};

use crate::error::{Error, Result};
use crate::geometry::{Calculus, Domain, SampledCurve, Scheme, TangentField};
use crate::residuals::{iterated_tension, tau_k_with};
use crate::scalar::Real;

fn require_periodic<T: Real>(curve: &SampledCurve<T>) -> Result<()> {
    match curve.domain() {
        Domain::Periodic { .. } => Ok(()),
        Domain::Interval { .. } => Err(Error::UnsupportedDomain(
            "energies need a closed (periodic) domain".into(),
        )),
    }
}

/// Energy density field whose half-integral is `E_k`.
fn energy_integrand<T: Real>(calc: &Calculus<'_, T>, k: usize) -> Result<TangentField<T>> {
    match k {
        0 => Err(Error::UnsupportedK(0)),
        1 => Ok(calc.velocity().clone()),
        // `iterated_tension(calc, j)` is `Delta^(j-2) tau`.
        _ if k % 2 == 0 => iterated_tension(calc, k / 2 + 1),
        _ => calc.nabla(&iterated_tension(calc, (k - 1) / 2 + 1)?),
    }
}

pub fn energy_with<T: Real>(calc: &Calculus<'_, T>, k: usize) -> Result<T> {
    require_periodic(calc.curve())?;
    let f = energy_integrand(calc, k)?;
    Ok(calc.l2_inner(&f, &f) / T::from_f64(2.0))
}

pub fn energy_k<T: Real>(curve: &SampledCurve<T>, k: usize, scheme: Scheme) -> Result<T> {
    energy_with(&Calculus::new(curve, scheme)?, k)
}

/// L2 gradient `-tau_k`; the flow descends along `+tau_k`.
pub fn gradient<T: Real>(curve: &SampledCurve<T>, k: usize, scheme: Scheme) -> Result<TangentField<T>> {
    require_periodic(curve)?;
    Ok(tau_k_with(&Calculus::new(curve, scheme)?, k)?.scale(-T::one()))
}

/// `G(X, Y) = 2R(nabla X, Y) gamma' + R(X, Y) tau - nabla(R(X, Y) gamma')`,
/// the field with `int <[nabla_t, Delta] X, Y> = int <V, G(X, Y)>` along a variation `V`.
fn commutator_adjoint<T: Real>(
    calc: &Calculus<'_, T>,
    tau: &TangentField<T>,
    x: &TangentField<T>,
    y: &TangentField<T>,
) -> Result<TangentField<T>> {
    let vel = calc.velocity();
    let xy_vel = calc.riemann(x, y, vel);
    Ok(calc
        .riemann(&calc.nabla(x)?, y, vel)
        .scale(T::from_f64(2.0))
        .add(&calc.riemann(x, y, tau))
        .sub(&calc.nabla(&xy_vel)?))
}

/// Negative L2 gradient of `E_k` at a constant-curvature target, with every
/// commutator of the variation past the rough Laplacians kept.
///
/// `tau_k` is its leading part; the two coincide for `k <= 2`. For `k >= 3`
/// the remainder is a sum of curvature terms quadratic in `Delta^j tau`, which
/// vanishes for geodesics but not for general `tau_k = 0` curves.
pub fn euler_lagrange_with<T: Real>(calc: &Calculus<'_, T>, k: usize) -> Result<TangentField<T>> {
    let mut out = tau_k_with(calc, k)?;
    if k <= 2 {
        return Ok(out);
    }
    let tau = calc.tension()?;
    let mut powers = vec![tau.clone()];
    for _ in 0..k - 2 {
        let next = calc.rough_laplacian(powers.last().expect("non-empty"))?;
        powers.push(next);
    }
    // E_k = 1/2 |A|^2 with A = Delta^m tau (k even) or nabla Delta^m tau (k odd).
    let m = (k - 2) / 2;
    let paired = k - 3; // total Laplacian count in each commutator pairing
    for j in 0..m {
        out = out.sub(&commutator_adjoint(calc, &tau, &powers[j], &powers[paired - j])?);
    }
    if k % 2 == 1 {
        let z = &powers[m];
        out = out.add(&calc.riemann(z, &calc.nabla(z)?, calc.velocity()));
    }
    Ok(out)
}

pub fn euler_lagrange<T: Real>(curve: &SampledCurve<T>, k: usize, scheme: Scheme) -> Result<TangentField<T>> {
    require_periodic(curve)?;
    euler_lagrange_with(&Calculus::new(curve, scheme)?, k)
}

pub fn l2_inner<T: Real>(curve: &SampledCurve<T>, a: &TangentField<T>, b: &TangentField<T>, scheme: Scheme) -> Result<T> {
    Ok(Calculus::new(curve, scheme)?.l2_inner(a, b))
}

/// Central difference of `E_k(exp(t V))` at `t = 0`.
pub fn energy_first_difference<T: Real>(
    curve: &SampledCurve<T>,
    v: &TangentField<T>,
    k: usize,
    step: T,
    scheme: Scheme,
) -> Result<T> {
    let plus = energy_k(&curve.exp(v, step)?, k, scheme)?;
    let minus = energy_k(&curve.exp(v, -step)?, k, scheme)?;
    Ok((plus - minus) / (step + step))
}

/// Second central difference of `E_k(exp(t V))` at `t = 0`.
pub fn energy_second_difference<T: Real>(
    curve: &SampledCurve<T>,
    v: &TangentField<T>,
    k: usize,
    step: T,
    scheme: Scheme,
) -> Result<T> {
    let plus = energy_k(&curve.exp(v, step)?, k, scheme)?;
    let minus = energy_k(&curve.exp(v, -step)?, k, scheme)?;
    let mid = energy_k(curve, k, scheme)?;
    Ok((plus - mid - mid + minus) / (step * step))
}
