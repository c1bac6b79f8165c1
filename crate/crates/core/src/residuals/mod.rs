//! Euler-Lagrange residuals of the k-energies.
//!
//! Three independent evaluations of the same operator are provided:
//!
//! * intrinsic: nested covariant derivatives `(nabla nabla)^j` of the tension;
//! * ambient: a closed-form ODE in the Euclidean derivatives of the curve and
//!   their Gram table (unit-speed curves on a unit sphere);
//! * Frenet: scalar equations in the geodesic curvature and its derivatives
//!   (unit-speed curves on `S^2`).
//!
//! The intrinsic and ambient forms both equal `(-1)^(k-1) tau_k`; every
//! report records that sign so all formulations can be compared against
//! `tau_k` itself.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Calculus, Curvature, Field, SampledCurve, Scheme, TangentField, TargetSpace};
use crate::scalar::Real;

pub mod ambient;
pub mod frenet;

pub use ambient::{ambient_residual, gram_identities_check, GramIdentities, GramTable};
pub use frenet::{frenet_residual, geodesic_curvature, FrenetData};

/// Largest `| |gamma'| - 1 |` accepted by the unit-speed formulations.
pub const UNIT_SPEED_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// `tau_k` itself, assembled with the rough Laplacian and curvature operator.
    Tension,
    Intrinsic,
    Ambient,
    Frenet,
}

impl Formulation {
    pub const ALL: [Formulation; 4] =
        [Formulation::Tension, Formulation::Intrinsic, Formulation::Ambient, Formulation::Frenet];
}

#[derive(Clone, Debug)]
pub struct ResidualReport<T> {
    pub formulation: Formulation,
    pub k: usize,
    /// The residual as its formulation writes it: ambient vectors, or
    /// `(normal, tangent)` coefficient pairs for Frenet.
    pub values: Field<T>,
    /// `sign * values`, mapped to ambient vectors, estimates `tau_k`.
    pub sign: i32,
    pub normalized: TangentField<T>,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub valid: Range<usize>,
}

impl<T: Real> ResidualReport<T> {
    pub(crate) fn new(
        formulation: Formulation,
        k: usize,
        values: Field<T>,
        sign: i32,
        normalized: TangentField<T>,
        spacing: T,
    ) -> Self {
        let valid = values.valid();
        let mut sup = 0.0f64;
        let mut sq = 0.0f64;
        for i in valid.clone() {
            let n2: f64 = values.node(i).iter().map(|v| v.to_f64() * v.to_f64()).sum();
            sup = sup.max(n2.sqrt());
            sq += n2;
        }
        Self {
            formulation,
            k,
            values,
            sign,
            normalized,
            sup_norm: sup,
            l2_norm: (sq * spacing.to_f64()).sqrt(),
            valid,
        }
    }

    /// Node-wise `sup |self - other|` of the `tau_k` estimates on the common window.
    pub fn discrepancy(&self, other: &Self) -> f64 {
        self.normalized.sub(&other.normalized).sup_norm()
    }
}

/// `(-1)^j` as a scalar.
pub(crate) fn parity<T: Real>(j: usize) -> T {
    if j % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

pub(crate) fn require_unit_sphere<T: Real>(curve: &SampledCurve<T>) -> Result<TargetSpace> {
    match curve.target().as_space() {
        Some(s) if s.curvature() == Curvature::Spherical => Ok(s),
        _ => Err(Error::UnsupportedTarget("this formulation needs a single unit sphere target".into())),
    }
}

pub(crate) fn require_unit_speed<T: Real>(calc: &Calculus<'_, T>) -> Result<()> {
    let v = calc.velocity();
    let mut worst = (0, 0.0f64);
    for i in v.valid() {
        let s: f64 = v.node(i).iter().map(|x| x.to_f64() * x.to_f64()).sum::<f64>().sqrt();
        let d = (s - 1.0).abs();
        if d > worst.1 {
            worst = (i, d);
        }
    }
    if worst.1 > UNIT_SPEED_TOL {
        return Err(Error::NotUnitSpeed { node: worst.0, deviation: worst.1 });
    }
    Ok(())
}

/// `Delta^(k-2) tau` (the tension itself for `k <= 2`).
pub fn iterated_tension<T: Real>(calc: &Calculus<'_, T>, k: usize) -> Result<TangentField<T>> {
    let tau = calc.tension()?;
    calc.rough_laplacian_iter(&tau, k.saturating_sub(2))
}

/// `tau_k = Delta U - R(U)` with `U = Delta^(k-2) tau`; `tau_1 = tau`.
pub fn tau_k_with<T: Real>(calc: &Calculus<'_, T>, k: usize) -> Result<TangentField<T>> {
    if k == 0 {
        return Err(Error::UnsupportedK(0));
    }
    if k == 1 {
        return calc.tension();
    }
    let u = iterated_tension(calc, k)?;
    Ok(calc.rough_laplacian(&u)?.sub(&calc.curvature_op(&u)))
}

pub fn tau_k<T: Real>(curve: &SampledCurve<T>, k: usize, scheme: Scheme) -> Result<TangentField<T>> {
    tau_k_with(&Calculus::new(curve, scheme)?, k)
}

pub fn tension_residual<T: Real>(curve: &SampledCurve<T>, k: usize, scheme: Scheme) -> Result<ResidualReport<T>> {
    let t = tau_k(curve, k, scheme)?;
    Ok(ResidualReport::new(Formulation::Tension, k, t.clone(), 1, t, curve.spacing()))
}

/// `(nabla nabla)^(k-1) tau + (nabla nabla)^(k-2) tau - <(nabla nabla)^(k-2) tau, gamma'> gamma'`
/// for unit-speed curves on a unit sphere.
pub fn intrinsic_curve_residual<T: Real>(
    curve: &SampledCurve<T>,
    k: usize,
    scheme: Scheme,
) -> Result<ResidualReport<T>> {
    if k < 2 {
        return Err(Error::UnsupportedK(k));
    }
    require_unit_sphere(curve)?;
    let calc = Calculus::new(curve, scheme)?;
    require_unit_speed(&calc)?;
    let vel = calc.velocity();
    let mut lower = calc.tension()?;
    for _ in 0..k - 2 {
        lower = calc.nabla(&calc.nabla(&lower)?)?;
    }
    let upper = calc.nabla(&calc.nabla(&lower)?)?;
    let along = calc.inner(&lower, vel);
    let tangential = along.zip_map(vel, vel.dim(), |_, a, v, o| {
        for (oi, vi) in o.iter_mut().zip(v) {
            *oi = a[0] * *vi;
        }
    });
    let raw = upper.add(&lower).sub(&tangential);
    let sign = if (k - 1) % 2 == 0 { 1 } else { -1 };
    let normalized = raw.scale(parity(k - 1));
    Ok(ResidualReport::new(Formulation::Intrinsic, k, raw, sign, normalized, curve.spacing()))
}

/// Per-node `<Delta^(k-2) tau, gamma'>`; `<tau, gamma'>` for `k = 1`.
pub fn conservation_check<T: Real>(curve: &SampledCurve<T>, k: usize, scheme: Scheme) -> Result<Field<T>> {
    let calc = Calculus::new(curve, scheme)?;
    let u = iterated_tension(&calc, k)?;
    Ok(calc.inner(&u, calc.velocity()))
}

/// `(-1)^(k-2) kappa^(2k-3) (kappa^2 - 1)`: minus the normal coefficient of
/// the nested-derivative (Frenet) residual of a latitude circle with
/// geodesic curvature `kappa`, i.e. `(-1)^k <tau_k, N>`.
pub fn constant_kappa_law(kappa: f64, k: usize) -> f64 {
    assert!(k >= 2, "the law is stated for k >= 2");
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * kappa.powi(2 * k as i32 - 3) * (kappa * kappa - 1.0)
}

/// Pass threshold `max(1e-8, 10 h^order |gamma^(2k)|_inf)`.
pub fn pass_threshold<T: Real>(curve: &SampledCurve<T>, k: usize, scheme: Scheme) -> Result<f64> {
    let calc = Calculus::new(curve, scheme)?;
    let top = calc.derivative((2 * k).min(crate::geometry::stencil::MAX_DERIVATIVE))?;
    let h = curve.spacing().to_f64();
    Ok((10.0 * h.powi(scheme.order() as i32) * top.sup_norm()).max(1e-8))
}
