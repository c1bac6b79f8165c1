//! Constant-curvature model spaces and their products.
//!
//! Every factor is embedded in a flat ambient space: the unit sphere in
//! Euclidean space, the upper sheet of the hyperboloid in Minkowski space, or
//! Euclidean space itself. A [`Target`] is a product of such factors; all
//! pointwise operations act block by block, which is what makes the product
//! embedding computation an honest second route for product curves.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance on the embedding constraint for freshly constructed points.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance on the embedding constraint for operation inputs.
pub const INPUT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Curvature {
    Hyperbolic,
    Flat,
    Spherical,
}

impl Curvature {
    pub fn sign(self) -> i32 {
        match self {
            Curvature::Hyperbolic => -1,
            Curvature::Flat => 0,
            Curvature::Spherical => 1,
        }
    }

    pub fn from_sign(k: i64) -> Result<Self> {
        match k {
            -1 => Ok(Curvature::Hyperbolic),
            0 => Ok(Curvature::Flat),
            1 => Ok(Curvature::Spherical),
            _ => Err(Error::UnsupportedTarget(format!(
                "sectional curvature must be -1, 0 or 1, got {k}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signature {
    Euclidean,
    /// One negative axis, stored as the last coordinate.
    Minkowski,
}

/// A simply connected space form of intrinsic dimension `dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TargetSpace {
    curvature: Curvature,
    dim: usize,
}

impl TargetSpace {
    pub fn new(curvature: Curvature, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedTarget("intrinsic dimension must be at least 1".into()));
        }
        Ok(Self { curvature, dim })
    }

    /// Unit sphere `S^n` in `R^{n+1}`.
    pub fn sphere(n: usize) -> Self {
        Self::new(Curvature::Spherical, n).expect("n >= 1")
    }

    /// Hyperboloid model of `H^n` in Minkowski `R^{n,1}`.
    pub fn hyperbolic(n: usize) -> Self {
        Self::new(Curvature::Hyperbolic, n).expect("n >= 1")
    }

    pub fn euclidean(n: usize) -> Self {
        Self::new(Curvature::Flat, n).expect("n >= 1")
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        match self.curvature {
            Curvature::Flat => self.dim,
            _ => self.dim + 1,
        }
    }

    pub fn signature(&self) -> Signature {
        match self.curvature {
            Curvature::Hyperbolic => Signature::Minkowski,
            _ => Signature::Euclidean,
        }
    }

    fn k<T: Real>(&self) -> T {
        T::from_f64(self.curvature.sign() as f64)
    }

    pub fn inner<T: Real>(&self, a: &[T], b: &[T]) -> T {
        let n = a.len();
        let mut s = T::zero();
        for i in 0..n {
            s += a[i] * b[i];
        }
        if self.signature() == Signature::Minkowski {
            s -= T::from_f64(2.0) * a[n - 1] * b[n - 1];
        }
        s
    }

    /// Distance of `x` from the embedding constraint; infinite on the wrong
    /// hyperboloid sheet.
    pub fn constraint_deviation<T: Real>(&self, x: &[T]) -> f64 {
        match self.curvature {
            Curvature::Flat => 0.0,
            Curvature::Spherical => (self.inner(x, x) - T::one()).to_f64().abs(),
            Curvature::Hyperbolic => {
                if x[x.len() - 1].to_f64() <= 0.0 {
                    f64::INFINITY
                } else {
                    (self.inner(x, x) + T::one()).to_f64().abs()
                }
            }
        }
    }

    /// `w - K<w,x>x`; the tangential part of `w` at `x`.
    pub fn project<T: Real>(&self, x: &[T], w: &[T], out: &mut [T]) {
        out.copy_from_slice(w);
        if self.curvature == Curvature::Flat {
            return;
        }
        let c = self.k::<T>() * self.inner(w, x);
        for (o, xi) in out.iter_mut().zip(x) {
            *o -= c * *xi;
        }
    }

    /// `R(v, vel) vel = K(<vel,vel> v - <v,vel> vel)`.
    pub fn curvature_op<T: Real>(&self, v: &[T], vel: &[T], out: &mut [T]) {
        if self.curvature == Curvature::Flat {
            out.iter_mut().for_each(|o| *o = T::zero());
            return;
        }
        let k = self.k::<T>();
        let a = k * self.inner(vel, vel);
        let b = k * self.inner(v, vel);
        for i in 0..out.len() {
            out[i] = a * v[i] - b * vel[i];
        }
    }

    /// `R(x, y) z = K(<y,z> x - <x,z> y)`.
    pub fn riemann<T: Real>(&self, x: &[T], y: &[T], z: &[T], out: &mut [T]) {
        if self.curvature == Curvature::Flat {
            out.iter_mut().for_each(|o| *o = T::zero());
            return;
        }
        let k = self.k::<T>();
        let a = k * self.inner(y, z);
        let b = k * self.inner(x, z);
        for i in 0..out.len() {
            out[i] = a * x[i] - b * y[i];
        }
    }

    pub fn exp<T: Real>(&self, x: &[T], v: &[T], out: &mut [T]) {
        match self.curvature {
            Curvature::Flat => {
                for i in 0..out.len() {
                    out[i] = x[i] + v[i];
                }
            }
            Curvature::Spherical | Curvature::Hyperbolic => {
                // Tangent vectors are spacelike on the hyperboloid, so the norm is real.
                let nn = self.inner(v, v);
                let norm = if nn.to_f64() > 0.0 { nn.sqrt() } else { T::zero() };
                if norm.to_f64() == 0.0 {
                    out.copy_from_slice(x);
                    return;
                }
                let (c, s) = if self.curvature == Curvature::Spherical {
                    let (s, c) = norm.sin_cos();
                    (c, s)
                } else {
                    (norm.cosh(), norm.sinh())
                };
                let s = s / norm;
                for i in 0..out.len() {
                    out[i] = c * x[i] + s * v[i];
                }
            }
        }
    }

    /// Nearest-point style retraction back onto the model.
    pub fn retract<T: Real>(&self, y: &mut [T]) {
        match self.curvature {
            Curvature::Flat => {}
            Curvature::Spherical => {
                let r = self.inner(y, y).sqrt();
                y.iter_mut().for_each(|v| *v /= r);
            }
            Curvature::Hyperbolic => {
                let n = y.len();
                let mut spatial = T::zero();
                for v in &y[..n - 1] {
                    spatial += *v * *v;
                }
                // Lift onto the upper sheet by solving for the time coordinate.
                y[n - 1] = (T::one() + spatial).sqrt();
            }
        }
    }

    /// Orthonormal basis of the tangent space at `x` (target inner product).
    pub fn tangent_frame<T: Real>(&self, x: &[T]) -> Vec<Vec<T>> {
        let m = self.ambient_dim();
        let mut candidates: Vec<usize> = (0..m).collect();
        match self.curvature {
            Curvature::Flat => {}
            Curvature::Spherical => {
                candidates.sort_by(|&a, &b| x[a].to_f64().abs().total_cmp(&x[b].to_f64().abs()));
            }
            // Projected spatial axes are always independent on the hyperboloid.
            Curvature::Hyperbolic => candidates.truncate(m - 1),
        }
        let mut frame: Vec<Vec<T>> = Vec::with_capacity(self.dim);
        let mut e = vec![T::zero(); m];
        let mut w = vec![T::zero(); m];
        for j in candidates {
            if frame.len() == self.dim {
                break;
            }
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            self.project(x, &e, &mut w);
            for f in &frame {
                let c = self.inner(&w, f);
                for i in 0..m {
                    w[i] -= c * f[i];
                }
            }
            let nn = self.inner(&w, &w);
            if nn.to_f64() < 1e-6 {
                continue;
            }
            let r = nn.sqrt();
            frame.push(w.iter().map(|v| *v / r).collect());
        }
        debug_assert_eq!(frame.len(), self.dim);
        frame
    }

    /// The distinguished base point: last axis for curved models, origin for flat.
    pub fn base_point<T: Real>(&self) -> Vec<T> {
        let mut p = vec![T::zero(); self.ambient_dim()];
        if self.curvature != Curvature::Flat {
            p[self.ambient_dim() - 1] = T::one();
        }
        p
    }
}

/// Product of space forms with block-diagonal metric and curvature.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Target {
    factors: Vec<TargetSpace>,
    offsets: Vec<usize>,
}

impl From<TargetSpace> for Target {
    fn from(space: TargetSpace) -> Self {
        Self::product(vec![space])
    }
}

impl Target {
    pub fn product(factors: Vec<TargetSpace>) -> Self {
        assert!(!factors.is_empty(), "a target needs at least one factor");
        let mut offsets = Vec::with_capacity(factors.len() + 1);
        let mut o = 0;
        offsets.push(0);
        for f in &factors {
            o += f.ambient_dim();
            offsets.push(o);
        }
        Self { factors, offsets }
    }

    pub fn factors(&self) -> &[TargetSpace] {
        &self.factors
    }

    /// Single-factor view, if the target is not a genuine product.
    pub fn as_space(&self) -> Option<TargetSpace> {
        (self.factors.len() == 1).then(|| self.factors[0])
    }

    pub fn ambient_dim(&self) -> usize {
        self.offsets[self.factors.len()]
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.factors.iter().map(|f| f.intrinsic_dim()).sum()
    }

    pub fn blocks(&self) -> impl Iterator<Item = (TargetSpace, Range<usize>)> + '_ {
        self.factors
            .iter()
            .enumerate()
            .map(move |(i, f)| (*f, self.offsets[i]..self.offsets[i + 1]))
    }

    pub fn inner<T: Real>(&self, a: &[T], b: &[T]) -> T {
        let mut s = T::zero();
        for (f, r) in self.blocks() {
            s += f.inner(&a[r.clone()], &b[r]);
        }
        s
    }

    pub fn constraint_deviation<T: Real>(&self, x: &[T]) -> f64 {
        self.blocks()
            .map(|(f, r)| f.constraint_deviation(&x[r]))
            .fold(0.0, f64::max)
    }

    pub fn check_point<T: Real>(&self, x: &[T], tol: f64, node: usize) -> Result<()> {
        let deviation = self.constraint_deviation(x);
        if deviation > tol {
            return Err(Error::ConstraintViolation { node, deviation });
        }
        Ok(())
    }

    pub fn project<T: Real>(&self, x: &[T], w: &[T], out: &mut [T]) {
        for (f, r) in self.blocks() {
            f.project(&x[r.clone()], &w[r.clone()], &mut out[r]);
        }
    }

    pub fn curvature_op<T: Real>(&self, v: &[T], vel: &[T], out: &mut [T]) {
        for (f, r) in self.blocks() {
            f.curvature_op(&v[r.clone()], &vel[r.clone()], &mut out[r]);
        }
    }

    pub fn riemann<T: Real>(&self, x: &[T], y: &[T], z: &[T], out: &mut [T]) {
        for (f, r) in self.blocks() {
            f.riemann(&x[r.clone()], &y[r.clone()], &z[r.clone()], &mut out[r]);
        }
    }

    pub fn exp<T: Real>(&self, x: &[T], v: &[T], out: &mut [T]) {
        for (f, r) in self.blocks() {
            f.exp(&x[r.clone()], &v[r.clone()], &mut out[r]);
        }
    }

    pub fn retract<T: Real>(&self, y: &mut [T]) {
        for (f, r) in self.blocks() {
            f.retract(&mut y[r]);
        }
    }

    pub fn tangent_frame<T: Real>(&self, x: &[T]) -> Vec<Vec<T>> {
        let m = self.ambient_dim();
        let mut frame = Vec::with_capacity(self.intrinsic_dim());
        for (f, r) in self.blocks() {
            for v in f.tangent_frame(&x[r.clone()]) {
                let mut full = vec![T::zero(); m];
                full[r.clone()].copy_from_slice(&v);
                frame.push(full);
            }
        }
        frame
    }
}

/// Free-standing tangent projection with an input constraint check.
pub fn project_tangent<T: Real>(x: &[T], w: &[T], target: &Target) -> Result<Vec<T>> {
    if x.len() != target.ambient_dim() || w.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: target.ambient_dim(), found: x.len().max(w.len()) });
    }
    target.check_point(x, INPUT_TOL, 0)?;
    let mut out = vec![T::zero(); x.len()];
    target.project(x, w, &mut out);
    Ok(out)
}

/// Free-standing exponential map.
pub fn exp_map<T: Real>(x: &[T], v: &[T], target: &Target) -> Result<Vec<T>> {
    if x.len() != target.ambient_dim() || v.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: target.ambient_dim(), found: x.len().max(v.len()) });
    }
    target.check_point(x, INPUT_TOL, 0)?;
    let mut out = vec![T::zero(); x.len()];
    target.exp(x, v, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s2() -> Target {
        TargetSpace::sphere(2).into()
    }

    #[test]
    fn projection_of_basis_vectors() {
        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        assert_eq!(project_tangent(&e1, &e1, &s2()).unwrap(), vec![0.0; 3]);
        assert_eq!(project_tangent(&e1, &e2, &s2()).unwrap(), e2.to_vec());
    }

    #[test]
    fn projection_rejects_off_sphere_points() {
        let err = project_tangent(&[1.1, 0.0, 0.0], &[0.0, 1.0, 0.0], &s2()).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation { .. }));
    }

    #[test]
    fn quarter_great_circle() {
        let q = std::f64::consts::FRAC_PI_2;
        let y = exp_map(&[1.0, 0.0, 0.0], &[0.0, q, 0.0], &s2()).unwrap();
        assert!((y[0]).abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
        let y0 = exp_map(&[1.0, 0.0, 0.0], &[0.0; 3], &s2()).unwrap();
        assert_eq!(y0, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn curvature_operator_cases() {
        let s = TargetSpace::sphere(2);
        let vel = [0.0, 1.0, 0.0];
        let mut out = [0.0; 3];
        s.curvature_op(&vel, &vel, &mut out);
        assert_eq!(out, [0.0; 3]);
        s.curvature_op(&[0.0, 0.0, 0.7], &vel, &mut out);
        assert_eq!(out, [0.0, 0.0, 0.7]);
        TargetSpace::euclidean(3).curvature_op(&[1.0, 2.0, 3.0], &vel, &mut out);
        assert_eq!(out, [0.0; 3]);
    }

    #[test]
    fn hyperboloid_base_point_and_sheet() {
        let h = TargetSpace::hyperbolic(2);
        let p: Vec<f64> = h.base_point();
        assert_eq!(h.constraint_deviation(&p), 0.0);
        assert_eq!(h.constraint_deviation(&[0.0, 0.0, -1.0]), f64::INFINITY);
    }

    fn unit(v: [f64; 3]) -> Option<[f64; 3]> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        (r > 1e-3).then(|| [v[0] / r, v[1] / r, v[2] / r])
    }

    fn hyper_point(a: f64, b: f64) -> [f64; 3] {
        [a, b, (1.0 + a * a + b * b).sqrt()]
    }

    proptest! {
        #[test]
        fn projection_is_tangent(x in prop::array::uniform3(-1.0..1.0f64), w in prop::array::uniform3(-3.0..3.0f64)) {
            if let Some(x) = unit(x) {
                let r = project_tangent(&x, &w, &s2()).unwrap();
                let d = r[0] * x[0] + r[1] * x[1] + r[2] * x[2];
                prop_assert!(d.abs() <= 1e-12);
            }
        }

        #[test]
        fn sphere_exp_moves_by_norm(x in prop::array::uniform3(-1.0..1.0f64), w in prop::array::uniform3(-1.0..1.0f64)) {
            if let Some(x) = unit(x) {
                let v = project_tangent(&x, &w, &s2()).unwrap();
                let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                let y = exp_map(&x, &v, &s2()).unwrap();
                prop_assert!(s2().constraint_deviation(&y) <= 1e-12);
                let c = (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]).clamp(-1.0, 1.0);
                prop_assert!((c.acos() - len).abs() <= 1e-7);
            }
        }

        #[test]
        fn hyperbolic_exp_stays_on_sheet(a in -1.0..1.0f64, b in -1.0..1.0f64, w in prop::array::uniform3(-1.0..1.0f64)) {
            let h: Target = TargetSpace::hyperbolic(2).into();
            let x = hyper_point(a, b);
            let v = project_tangent(&x, &w, &h).unwrap();
            prop_assert!(h.inner(&v, &x).abs() <= 1e-12);
            let y = exp_map(&x, &v, &h).unwrap();
            prop_assert!(h.constraint_deviation(&y) <= 1e-11);
            // cosh of the distance is -<x,y>_M.
            let dist = (-h.inner(&x, &y)).max(1.0).acosh();
            let len = h.inner(&v, &v).sqrt();
            prop_assert!((dist - len).abs() <= 1e-7 * (1.0 + len));
        }

        #[test]
        fn frames_are_orthonormal_and_tangent(x in prop::array::uniform3(-1.0..1.0f64), a in -2.0..2.0f64, b in -2.0..2.0f64) {
            let h: Target = TargetSpace::hyperbolic(2).into();
            let p = hyper_point(a, b);
            let mut cases = vec![(h, p.to_vec())];
            if let Some(x) = unit(x) {
                cases.push((s2(), x.to_vec()));
            }
            for (t, x) in cases {
                let f = t.tangent_frame(&x);
                prop_assert_eq!(f.len(), 2);
                for i in 0..2 {
                    prop_assert!(t.inner(&f[i], &x).abs() <= 1e-12);
                    for j in 0..2 {
                        let want = if i == j { 1.0 } else { 0.0 };
                        prop_assert!((t.inner(&f[i], &f[j]) - want).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}
