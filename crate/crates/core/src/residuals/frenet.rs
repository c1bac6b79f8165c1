//! Frenet form of the k-harmonic equation for unit-speed curves on `S^2`.
//!
//! With `T = gamma'`, `N = gamma x T` and signed geodesic curvature `kappa`,
//! `nabla T = kappa N` and `nabla N = -kappa T`, so the nested-derivative
//! residual reduces to a pair of scalar polynomials in `kappa^(j)`.

use crate::error::{Error, Result};
use crate::geometry::stencil::Differentiator;
use crate::geometry::{Calculus, Field, SampledCurve, Scheme, TangentField};
use crate::residuals::{parity, require_unit_speed, require_unit_sphere, Formulation, ResidualReport};
use crate::scalar::{dot, Real};

#[derive(Clone, Debug)]
pub struct FrenetData<T> {
    /// Signed geodesic curvature, one component per node.
    pub kappa: Field<T>,
    pub tangent: TangentField<T>,
    pub normal: TangentField<T>,
    diff: Differentiator<T>,
    spacing: T,
}

fn cross<T: Real>(a: &[T], b: &[T], out: &mut [T]) {
    out[0] = a[1] * b[2] - a[2] * b[1];
    out[1] = a[2] * b[0] - a[0] * b[2];
    out[2] = a[0] * b[1] - a[1] * b[0];
}

/// `kappa = <nabla T, N>` with `T = gamma'` and `N = gamma x T`.
pub fn geodesic_curvature<T: Real>(curve: &SampledCurve<T>, scheme: Scheme) -> Result<FrenetData<T>> {
    let space = require_unit_sphere(curve)?;
    if space.ambient_dim() != 3 {
        return Err(Error::UnsupportedTarget(format!(
            "Frenet frames need S^2, got S^{}",
            space.intrinsic_dim()
        )));
    }
    let calc = Calculus::new(curve, scheme)?;
    require_unit_speed(&calc)?;
    let tangent = calc.velocity().clone();
    let normal = curve.points().zip_map(&tangent, 3, |_, x, t, o| cross(x, t, o));
    let accel = calc.nabla(&tangent)?;
    let kappa = accel.zip_map(&normal, 1, |_, a, nn, o| o[0] = dot(a, nn));
    Ok(FrenetData {
        kappa,
        tangent,
        normal,
        diff: calc.differentiator().clone(),
        spacing: curve.spacing(),
    })
}

impl<T: Real> FrenetData<T> {
    /// `kappa, kappa', ..., kappa^(jmax)`.
    pub fn kappa_derivatives(&self, jmax: usize) -> Result<Vec<Field<T>>> {
        let mut out = vec![self.kappa.clone()];
        for _ in 0..jmax {
            let next = self.diff.apply(out.last().expect("non-empty"))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Largest deviation from orthonormality of `(T, N)` and their tangency to `gamma`.
    pub fn frame_defect(&self, curve: &SampledCurve<T>) -> f64 {
        let mut worst = 0.0f64;
        for i in self.kappa.valid() {
            let (t, n, x) = (self.tangent.node(i), self.normal.node(i), curve.point(i));
            for v in [dot(t, t) - T::one(), dot(n, n) - T::one(), dot(t, n), dot(t, x), dot(n, x)] {
                worst = worst.max(v.to_f64().abs());
            }
        }
        worst
    }
}

/// `(normal, tangent)` components of the nested-derivative residual.
fn components<T: Real>(k: usize, d: &[T]) -> (T, T) {
    let c = |v: f64| T::from_f64(v);
    let kp = d[0];
    let k2 = kp * kp;
    match k {
        2 => (d[2] - k2 * kp + kp, c(-3.0) * kp * d[1]),
        3 => {
            let normal = d[4] - c(15.0) * kp * d[1] * d[1] - c(10.0) * k2 * d[2] + k2 * k2 * kp + d[2] - k2 * kp;
            let tangent = c(-5.0) * (kp * d[3] - c(2.0) * k2 * kp * d[1] + c(2.0) * d[1] * d[2]);
            (normal, tangent)
        }
        4 => {
            let normal = d[6] - c(21.0) * k2 * d[4] - c(105.0) * kp * d[1] * d[3] - c(70.0) * kp * d[2] * d[2]
                - c(105.0) * d[1] * d[1] * d[2]
                + c(105.0) * k2 * kp * d[1] * d[1]
                + c(35.0) * k2 * k2 * d[2]
                - k2 * k2 * k2 * kp
                + d[4]
                - c(15.0) * kp * d[1] * d[1]
                - c(10.0) * k2 * d[2]
                + k2 * k2 * kp;
            let tangent = c(-7.0) * kp * d[5] - c(21.0) * d[1] * d[4] - c(35.0) * d[2] * d[3]
                + c(35.0) * k2 * kp * d[3]
                + c(210.0) * k2 * d[1] * d[2]
                + c(105.0) * kp * d[1] * d[1] * d[1]
                - c(21.0) * k2 * k2 * kp * d[1];
            (normal, tangent)
        }
        _ => unreachable!("checked by the caller"),
    }
}

/// Frenet residual for `k` in 2..=4; `values` holds `(normal, tangent)` per node.
///
/// `k = 3`: normal `kappa'''' - 15 kappa kappa'^2 - 10 kappa^2 kappa'' + kappa^5 + kappa'' - kappa^3`,
/// tangent `-5 (kappa kappa''' - 2 kappa^3 kappa' + 2 kappa' kappa'')`.
///
/// `k = 4`: normal `kappa^(6) - 21 kappa^2 kappa'''' - 105 kappa kappa' kappa''' - 70 kappa kappa''^2
/// - 105 kappa'^2 kappa'' + 105 kappa^3 kappa'^2 + 35 kappa^4 kappa'' - kappa^7` plus the `k = 3`
/// normal part without `kappa'' - kappa^3`; tangent `-7 kappa kappa^(5) - 21 kappa' kappa''''
/// - 35 kappa'' kappa''' + 35 kappa^3 kappa''' + 210 kappa^2 kappa' kappa'' + 105 kappa kappa'^3
/// - 21 kappa^5 kappa'`.
pub fn frenet_residual<T: Real>(fd: &FrenetData<T>, k: usize) -> Result<ResidualReport<T>> {
    if !(2..=4).contains(&k) {
        return Err(Error::UnsupportedK(k));
    }
    let derivs = fd.kappa_derivatives(2 * k - 2)?;
    let valid = derivs.last().expect("non-empty").valid();
    let n = fd.kappa.nodes();
    let mut values = Field::zeros(n, 2).with_valid(valid.clone());
    let mut normalized = Field::zeros(n, 3).with_valid(valid.clone());
    let s = parity::<T>(k - 1);
    let mut d = vec![T::zero(); 2 * k - 1];
    for i in valid {
        for (j, f) in derivs.iter().enumerate() {
            d[j] = f.node(i)[0];
        }
        let (nc, tc) = components(k, &d);
        values.node_mut(i).copy_from_slice(&[nc, tc]);
        let (nv, tv) = (fd.normal.node(i), fd.tangent.node(i));
        let out = normalized.node_mut(i);
        for m in 0..3 {
            out[m] = s * (nc * nv[m] + tc * tv[m]);
        }
    }
    let sign = if (k - 1) % 2 == 0 { 1 } else { -1 };
    Ok(ResidualReport::new(Formulation::Frenet, k, values, sign, normalized, fd.spacing))
}

pub fn frenet3_residual<T: Real>(fd: &FrenetData<T>) -> Result<ResidualReport<T>> {
    frenet_residual(fd, 3)
}

pub fn frenet4_residual<T: Real>(fd: &FrenetData<T>) -> Result<ResidualReport<T>> {
    frenet_residual(fd, 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;
    use crate::parametric::{Hemisphere, ParametricCurve};

    fn constant(kappa: f64, k: usize) -> (f64, f64) {
        let mut d = vec![0.0; 2 * k - 1];
        d[0] = kappa;
        components(k, &d)
    }

    #[test]
    fn constant_curvature_substitution() {
        for k in 2..=4 {
            assert_eq!(constant(0.0, k), (0.0, 0.0));
            assert_eq!(constant(1.0, k), (0.0, 0.0));
        }
        assert_eq!(constant(2.0, 3), (24.0, 0.0));
        assert_eq!(constant(2.0, 4), (-96.0, 0.0));
        for k in 2..=4 {
            // Frenet normal coefficient is minus the constant-curvature law.
            let law = crate::residuals::constant_kappa_law(2.0, k);
            assert_eq!(constant(2.0, k).0, -law);
        }
    }

    #[test]
    fn curvature_of_model_circles() {
        let s = Scheme::default();
        let gc = ParametricCurve::<Dd>::great_circle(3).unwrap().sample(64, 1).unwrap();
        assert!(geodesic_curvature(&gc, s).unwrap().kappa.sup_norm() < 1e-25);
        let eg1 = ParametricCurve::<Dd>::biharmonic_circle(3).unwrap().sample(128, 1).unwrap();
        let fd = geodesic_curvature(&eg1, s).unwrap();
        for i in fd.kappa.valid() {
            assert!((fd.kappa.node(i)[0].to_f64().abs() - 1.0).abs() < 1e-12);
        }
        assert!(fd.frame_defect(&eg1) < 1e-12);
        let two = ParametricCurve::<Dd>::constant_kappa_circle(Dd::from_f64(2.0), Hemisphere::South)
            .unwrap()
            .sample(256, 1)
            .unwrap();
        let fd = geodesic_curvature(&two, s).unwrap();
        for i in fd.kappa.valid() {
            assert!((fd.kappa.node(i)[0].to_f64() + 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn needs_s2() {
        let c = ParametricCurve::<f64>::clifford_torus_curve().unwrap().sample(64, 1).unwrap();
        assert!(matches!(geodesic_curvature(&c, Scheme::default()), Err(Error::UnsupportedTarget(_))));
    }
}
