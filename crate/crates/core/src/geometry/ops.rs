//! Covariant calculus along a sampled curve.

use crate::error::{Error, Result};
use crate::geometry::curve::{Field, SampledCurve};
use crate::geometry::stencil::{Differentiator, Scheme, MAX_DERIVATIVE};
use crate::scalar::Real;

/// Differentiation context bound to one curve: stencil weights scaled by the
/// grid spacing and the cached velocity `D(gamma)`.
pub struct Calculus<'a, T: Real> {
    curve: &'a SampledCurve<T>,
    scheme: Scheme,
    diff: Differentiator<T>,
    velocity: Field<T>,
}

impl<'a, T: Real> Calculus<'a, T> {
    pub fn new(curve: &'a SampledCurve<T>, scheme: Scheme) -> Result<Self> {
        let needed = scheme.order() + 2;
        if curve.nodes() < needed {
            return Err(Error::GridTooSmall { nodes: curve.nodes(), needed });
        }
        let diff = Differentiator::new(scheme, &curve.domain(), curve.nodes());
        let mut calc = Self { curve, scheme, diff, velocity: Field::zeros(0, 0) };
        calc.velocity = calc.d(curve.points())?;
        Ok(calc)
    }

    pub fn curve(&self) -> &SampledCurve<T> {
        self.curve
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn velocity(&self) -> &Field<T> {
        &self.velocity
    }

    /// One application of the first-derivative stencil.
    pub fn d(&self, f: &Field<T>) -> Result<Field<T>> {
        self.diff.apply(f)
    }

    pub fn differentiator(&self) -> &Differentiator<T> {
        &self.diff
    }

    /// `j`-th parameter derivative of the curve.
    pub fn derivative(&self, j: usize) -> Result<Field<T>> {
        Ok(self.derivatives(j)?.pop().expect("non-empty"))
    }

    /// Derivatives `0..=jmax` of the curve.
    pub fn derivatives(&self, jmax: usize) -> Result<Vec<Field<T>>> {
        if jmax > MAX_DERIVATIVE {
            return Err(Error::UnsupportedOrder(jmax));
        }
        let needed = self.scheme.order() + jmax + 1;
        if self.curve.nodes() < needed {
            return Err(Error::GridTooSmall { nodes: self.curve.nodes(), needed });
        }
        let mut out = vec![self.curve.points().clone()];
        if jmax >= 1 {
            out.push(self.velocity.clone());
        }
        for _ in 2..=jmax {
            let next = self.d(out.last().expect("non-empty"))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Pointwise tangential projection at the curve's nodes.
    pub fn project(&self, w: &Field<T>) -> Field<T> {
        let target = self.curve.target();
        w.map(w.dim(), |i, wi, o| target.project(self.curve.point(i), wi, o))
    }

    /// `nabla_d V = P(dV/dt)`.
    pub fn nabla(&self, v: &Field<T>) -> Result<Field<T>> {
        Ok(self.project(&self.d(v)?))
    }

    /// `tau = nabla_d gamma'`.
    pub fn tension(&self) -> Result<Field<T>> {
        self.nabla(&self.velocity)
    }

    /// Rough Laplacian on a flat curve domain, `-nabla nabla V`.
    pub fn rough_laplacian(&self, v: &Field<T>) -> Result<Field<T>> {
        Ok(self.nabla(&self.nabla(v)?)?.scale(-T::one()))
    }

    pub fn rough_laplacian_iter(&self, v: &Field<T>, j: usize) -> Result<Field<T>> {
        let mut out = v.clone();
        for _ in 0..j {
            out = self.rough_laplacian(&out)?;
        }
        Ok(out)
    }

    /// `R(V, gamma') gamma'` per node.
    pub fn curvature_op(&self, v: &Field<T>) -> Field<T> {
        let target = self.curve.target();
        v.zip_map(&self.velocity, v.dim(), |_, vi, ui, o| target.curvature_op(vi, ui, o))
    }

    /// `R(X, Y) Z` per node.
    pub fn riemann(&self, x: &Field<T>, y: &Field<T>, z: &Field<T>) -> Field<T> {
        let target = self.curve.target();
        let xy = x.zip_map(y, x.dim() * 2, |_, a, b, o| {
            let m = a.len();
            o[..m].copy_from_slice(a);
            o[m..].copy_from_slice(b);
        });
        xy.zip_map(z, z.dim(), |_, ab, c, o| {
            let m = c.len();
            target.riemann(&ab[..m], &ab[m..], c, o)
        })
    }

    /// Pointwise target inner product, as a one-component field.
    pub fn inner(&self, a: &Field<T>, b: &Field<T>) -> Field<T> {
        let target = self.curve.target();
        a.zip_map(b, 1, |_, x, y, o| o[0] = target.inner(x, y))
    }

    /// Pointwise target norm, as plain numbers over the valid window.
    pub fn norms(&self, a: &Field<T>) -> Vec<f64> {
        let target = self.curve.target();
        a.valid().map(|i| target.inner(a.node(i), a.node(i)).to_f64().max(0.0).sqrt()).collect()
    }

    /// Uniform-grid quadrature `h * sum` of a scalar field over its valid window.
    pub fn integrate(&self, f: &Field<T>) -> T {
        let mut s = T::zero();
        for i in f.valid() {
            s += f.node(i)[0];
        }
        s * self.curve.spacing()
    }

    /// `<a, b>_{L^2}` with the target inner product.
    pub fn l2_inner(&self, a: &Field<T>, b: &Field<T>) -> T {
        self.integrate(&self.inner(a, b))
    }
}
