//! Constant-curvature targets and covariant calculus along sampled curves.

pub mod curve;
pub mod ops;
pub mod stencil;
pub mod target;

pub use curve::{Domain, Field, SampledCurve, TangentField};
pub use ops::Calculus;
pub use stencil::{BoundaryPolicy, Scheme};
pub use target::{exp_map, project_tangent, Curvature, Signature, Target, TargetSpace};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance for pointwise tangency of returned fields.
pub const TANGENCY_TOL: f64 = 1e-10;

pub fn derivative<T: Real>(curve: &SampledCurve<T>, j: usize, scheme: Scheme) -> Result<Field<T>> {
    if j > stencil::MAX_DERIVATIVE {
        return Err(Error::UnsupportedOrder(j));
    }
    Calculus::new(curve, scheme)?.derivative(j)
}

pub fn covariant_derivative<T: Real>(
    curve: &SampledCurve<T>,
    v: &TangentField<T>,
    scheme: Scheme,
) -> Result<TangentField<T>> {
    Calculus::new(curve, scheme)?.nabla(v)
}

pub fn tension<T: Real>(curve: &SampledCurve<T>, scheme: Scheme) -> Result<TangentField<T>> {
    Calculus::new(curve, scheme)?.tension()
}

pub fn rough_laplacian_iter<T: Real>(
    curve: &SampledCurve<T>,
    v: &TangentField<T>,
    j: usize,
    scheme: Scheme,
) -> Result<TangentField<T>> {
    Calculus::new(curve, scheme)?.rough_laplacian_iter(v, j)
}

pub fn curvature_operator<T: Real>(
    curve: &SampledCurve<T>,
    v: &TangentField<T>,
    scheme: Scheme,
) -> Result<TangentField<T>> {
    Ok(Calculus::new(curve, scheme)?.curvature_op(v))
}

/// Largest `|<V_i, gamma_i>|` over the valid nodes (zero for flat factors).
pub fn tangency_defect<T: Real>(curve: &SampledCurve<T>, v: &Field<T>) -> f64 {
    let target = curve.target();
    let mut worst = 0.0f64;
    for i in v.valid() {
        for (f, r) in target.blocks() {
            if f.curvature() == Curvature::Flat {
                continue;
            }
            let d = f.inner(&v.node(i)[r.clone()], &curve.point(i)[r]).to_f64().abs();
            worst = worst.max(d);
        }
    }
    worst
}
