//! Sampled curves and per-node vector fields.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::stencil::BoundaryPolicy;
use crate::geometry::target::{Target, CONSTRUCTION_TOL};
use crate::scalar::Real;

/// Smallest grid accepted for a sampled curve.
pub const MIN_NODES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain<T> {
    /// Circle of length `period`; node `i` sits at `i * period / n`.
    Periodic { period: T },
    /// Closed interval; node `i` sits at `start + i * (end - start) / (n - 1)`.
    Interval { start: T, end: T },
}

impl<T: Real> Domain<T> {
    pub fn periodic(period: T) -> Result<Self> {
        if !(period.to_f64() > 0.0) {
            return Err(Error::UnsupportedDomain(format!("period must be positive, got {period}")));
        }
        Ok(Domain::Periodic { period })
    }

    pub fn interval(start: T, end: T) -> Result<Self> {
        if !(end > start) {
            return Err(Error::UnsupportedDomain(format!("interval [{start}, {end}] is empty")));
        }
        Ok(Domain::Interval { start, end })
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Domain::Periodic { .. })
    }

    pub fn boundary_policy(&self) -> BoundaryPolicy {
        match self {
            Domain::Periodic { .. } => BoundaryPolicy::Wrap,
            Domain::Interval { .. } => BoundaryPolicy::InteriorOnly,
        }
    }

    pub fn spacing(&self, nodes: usize) -> T {
        match *self {
            Domain::Periodic { period } => period / T::from_usize(nodes),
            Domain::Interval { start, end } => (end - start) / T::from_usize(nodes - 1),
        }
    }

    pub fn parameter(&self, i: usize, nodes: usize) -> T {
        let h = self.spacing(nodes);
        match *self {
            Domain::Periodic { .. } => h * T::from_usize(i),
            Domain::Interval { start, .. } => start + h * T::from_usize(i),
        }
    }

    pub fn convert<U: Real>(&self) -> Domain<U> {
        match *self {
            Domain::Periodic { period } => Domain::Periodic { period: U::from_f64(period.to_f64()) },
            Domain::Interval { start, end } => Domain::Interval {
                start: U::from_f64(start.to_f64()),
                end: U::from_f64(end.to_f64()),
            },
        }
    }
}

/// Values at the nodes of a grid, `dim` scalars per node.
///
/// Only nodes in `valid` carry meaningful data; interval-domain derivatives
/// shrink the window, and binary operations intersect windows.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    dim: usize,
    data: Vec<T>,
    valid: Range<usize>,
}

/// Vector field along a curve, pointwise tangent to the target.
pub type TangentField<T> = Field<T>;

impl<T: Real> Field<T> {
    pub fn zeros(nodes: usize, dim: usize) -> Self {
        Self { dim, data: vec![T::zero(); nodes * dim], valid: 0..nodes }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data, valid: 0..rows.len() })
    }

    pub fn from_fn(nodes: usize, dim: usize, mut f: impl FnMut(usize, &mut [T])) -> Self {
        let mut out = Self::zeros(nodes, dim);
        for i in 0..nodes {
            f(i, out.node_mut(i));
        }
        out
    }

    pub fn nodes(&self) -> usize {
        self.data.len() / self.dim.max(1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valid(&self) -> Range<usize> {
        self.valid.clone()
    }

    pub fn with_valid(mut self, valid: Range<usize>) -> Self {
        self.valid = valid;
        self
    }

    pub fn node(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn node_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.nodes()).map(|i| self.node(i).to_vec()).collect()
    }

    fn intersect(&self, other: &Self) -> Range<usize> {
        self.valid.start.max(other.valid.start)..self.valid.end.min(other.valid.end)
    }

    /// Pointwise binary map over the common valid window.
    pub fn zip_map(&self, other: &Self, dim: usize, mut f: impl FnMut(usize, &[T], &[T], &mut [T])) -> Self {
        let valid = self.intersect(other);
        let mut out = Self::zeros(self.nodes(), dim).with_valid(valid.clone());
        for i in valid {
            f(i, self.node(i), other.node(i), out.node_mut(i));
        }
        out
    }

    /// Pointwise unary map over the valid window.
    pub fn map(&self, dim: usize, mut f: impl FnMut(usize, &[T], &mut [T])) -> Self {
        let mut out = Self::zeros(self.nodes(), dim).with_valid(self.valid());
        for i in self.valid() {
            f(i, self.node(i), out.node_mut(i));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, self.dim, |_, a, b, o| {
            for k in 0..o.len() {
                o[k] = a[k] + b[k];
            }
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, self.dim, |_, a, b, o| {
            for k in 0..o.len() {
                o[k] = a[k] - b[k];
            }
        })
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(self.dim, |_, a, o| {
            for k in 0..o.len() {
                o[k] = c * a[k];
            }
        })
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: T, other: &Self) -> Self {
        self.zip_map(other, self.dim, |_, a, b, o| {
            for k in 0..o.len() {
                o[k] = a[k] + c * b[k];
            }
        })
    }

    /// Largest Euclidean node norm over the valid window.
    pub fn sup_norm(&self) -> f64 {
        self.valid()
            .map(|i| self.node(i).iter().map(|v| v.to_f64() * v.to_f64()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn convert<U: Real>(&self) -> Field<U> {
        Field {
            dim: self.dim,
            data: self.data.iter().map(|v| U::from_f64(v.to_f64())).collect(),
            valid: self.valid(),
        }
    }
}

/// A map from a circle or interval into a target, sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve<T> {
    target: Target,
    domain: Domain<T>,
    points: Field<T>,
}

impl<T: Real> SampledCurve<T> {
    pub fn new(target: Target, domain: Domain<T>, rows: &[Vec<T>]) -> Result<Self> {
        Self::from_field(target, domain, Field::from_rows(rows)?)
    }

    pub fn from_field(target: Target, domain: Domain<T>, points: Field<T>) -> Result<Self> {
        Self::with_tolerance(target, domain, points, CONSTRUCTION_TOL)
    }

    pub fn with_tolerance(target: Target, domain: Domain<T>, points: Field<T>, tol: f64) -> Result<Self> {
        let n = points.nodes();
        if n < MIN_NODES {
            return Err(Error::GridTooSmall { nodes: n, needed: MIN_NODES });
        }
        if points.dim() != target.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: target.ambient_dim(), found: points.dim() });
        }
        for i in 0..n {
            if points.node(i).iter().any(|v| !v.is_finite()) {
                return Err(Error::ConstraintViolation { node: i, deviation: f64::NAN });
            }
            target.check_point(points.node(i), tol, i)?;
        }
        Ok(Self { target, domain, points: points.with_valid(0..n) })
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn domain(&self) -> Domain<T> {
        self.domain
    }

    pub fn points(&self) -> &Field<T> {
        &self.points
    }

    pub fn nodes(&self) -> usize {
        self.points.nodes()
    }

    pub fn spacing(&self) -> T {
        self.domain.spacing(self.nodes())
    }

    pub fn point(&self, i: usize) -> &[T] {
        self.points.node(i)
    }

    /// Same domain and target, new points.
    pub fn with_points(&self, points: Field<T>) -> Result<Self> {
        Self::from_field(self.target.clone(), self.domain, points)
    }

    /// Pointwise `exp(V)`, the geodesic variation at parameter 1.
    pub fn exp(&self, v: &Field<T>, t: T) -> Result<Self> {
        let m = self.target.ambient_dim();
        let mut tv = vec![T::zero(); m];
        let moved = self.points.map(m, |i, x, out| {
            for (k, slot) in tv.iter_mut().enumerate() {
                *slot = t * v.node(i)[k];
            }
            self.target.exp(x, &tv, out);
        });
        self.with_points(moved)
    }

    pub fn convert<U: Real>(&self) -> Result<SampledCurve<U>> {
        let points = self.points.convert::<U>();
        let mut rows = points.rows();
        // Re-impose the constraint in the new precision.
        for r in rows.iter_mut() {
            self.target.retract(r);
        }
        SampledCurve::new(self.target.clone(), self.domain.convert(), &rows)
    }
}
