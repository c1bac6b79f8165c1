//! Seeded random curves and tangent fields for property tests and flows.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Curvature, Domain, Field, SampledCurve, Target, TargetSpace, TangentField};
use crate::scalar::{dot, Real};

/// Low-order Fourier loop `sum_{m=1}^{modes} a_m cos(m u) + b_m sin(m u)` in `R^dim`;
/// random coefficients of mode `m` are bounded by `amplitude / m`.
#[derive(Clone, Debug)]
pub struct FourierLoop<T> {
    constant: Vec<T>,
    cos: Vec<Vec<T>>,
    sin: Vec<Vec<T>>,
}

impl<T: Real> FourierLoop<T> {
    pub fn random(dim: usize, modes: usize, amplitude: f64, rng: &mut impl Rng) -> Self {
        let mut coeff = |m: usize| -> Vec<T> {
            (0..dim).map(|_| T::from_f64(amplitude / m as f64 * rng.gen_range(-1.0..1.0))).collect()
        };
        let mut cos = Vec::with_capacity(modes);
        let mut sin = Vec::with_capacity(modes);
        for m in 1..=modes {
            cos.push(coeff(m));
            sin.push(coeff(m));
        }
        Self { constant: vec![T::zero(); dim], cos, sin }
    }

    pub fn with_constant(mut self, c: Vec<T>) -> Self {
        self.constant = c;
        self
    }

    /// Adds `cos(u) e_a + sin(u) e_b`.
    pub fn with_circle(mut self, a: usize, b: usize) -> Self {
        if self.cos.is_empty() {
            let dim = self.constant.len();
            self.cos.push(vec![T::zero(); dim]);
            self.sin.push(vec![T::zero(); dim]);
        }
        self.cos[0][a] += T::one();
        self.sin[0][b] += T::one();
        self
    }

    pub fn dim(&self) -> usize {
        self.constant.len()
    }

    /// Value and first derivative at `u`.
    pub fn eval(&self, u: T) -> (Vec<T>, Vec<T>) {
        let mut p = self.constant.clone();
        let mut dp = vec![T::zero(); p.len()];
        for (m, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let mm = T::from_usize(m + 1);
            let (s, c) = (mm * u).sin_cos();
            for k in 0..p.len() {
                p[k] += c * a[k] + s * b[k];
                dp[k] += mm * (c * b[k] - s * a[k]);
            }
        }
        (p, dp)
    }
}

fn two_pi<T: Real>() -> T {
    T::from_f64(2.0) * T::pi()
}

/// Random smooth closed curve on `[0, period)` into `space`.
///
/// Spheres: a great circle plus a random loop, radially projected.
/// Flat: a random loop around the origin.
/// Hyperboloid: the exponential image of a random loop in the tangent space at the base point.
pub fn random_closed_curve<T: Real>(
    space: TargetSpace,
    nodes: usize,
    period: T,
    modes: usize,
    amplitude: f64,
    rng: &mut impl Rng,
) -> Result<SampledCurve<T>> {
    let m = space.ambient_dim();
    let domain = Domain::periodic(period)?;
    let scale = two_pi::<T>() / period;
    let rows: Vec<Vec<T>> = match space.curvature() {
        Curvature::Spherical => {
            if m < 2 {
                return Err(Error::UnsupportedTarget("needs ambient dimension >= 2".into()));
            }
            let loop_ = FourierLoop::random(m, modes, amplitude, rng).with_circle(0, 1);
            (0..nodes)
                .map(|i| {
                    let (mut p, _) = loop_.eval(scale * domain.parameter(i, nodes));
                    space.retract(&mut p);
                    p
                })
                .collect()
        }
        Curvature::Flat => {
            let loop_ = FourierLoop::random(m, modes.max(1), amplitude, rng);
            (0..nodes).map(|i| loop_.eval(scale * domain.parameter(i, nodes)).0).collect()
        }
        Curvature::Hyperbolic => {
            let base = space.base_point::<T>();
            let loop_ = FourierLoop::random(m - 1, modes.max(1), amplitude, rng);
            (0..nodes)
                .map(|i| {
                    let (mut v, _) = loop_.eval(scale * domain.parameter(i, nodes));
                    v.push(T::zero());
                    let mut out = vec![T::zero(); m];
                    space.exp(&base, &v, &mut out);
                    out
                })
                .collect()
        }
    };
    SampledCurve::new(space.into(), domain, &rows)
}

/// Random smooth closed curve on `S^2`, reparametrized by arc length.
///
/// The speed of the radially projected loop is expanded in a Fourier series
/// from `quadrature` samples; the series integrates in closed form, and each
/// grid node is located by Newton's method on the arc-length function.
pub fn random_unit_speed_s2<T: Real>(
    nodes: usize,
    modes: usize,
    amplitude: f64,
    quadrature: usize,
    rng: &mut impl Rng,
) -> Result<SampledCurve<T>> {
    let loop_ = FourierLoop::<T>::random(3, modes, amplitude, rng).with_circle(0, 1);
    let point = |u: T| -> (Vec<T>, T) {
        let (p, dp) = loop_.eval(u);
        let r = dot(&p, &p).sqrt();
        let c: Vec<T> = p.iter().map(|v| *v / r).collect();
        let radial = dot(&dp, &c);
        let v: Vec<T> = dp.iter().zip(&c).map(|(d, ci)| (*d - radial * *ci) / r).collect();
        (c, dot(&v, &v).sqrt())
    };

    let q = quadrature;
    let table: Vec<(T, T)> = (0..q).map(|j| (two_pi::<T>() * T::from_usize(j) / T::from_usize(q)).sin_cos()).collect();
    let speeds: Vec<T> = (0..q).map(|j| point(two_pi::<T>() * T::from_usize(j) / T::from_usize(q)).1).collect();
    let harmonics = q / 2 - 1;
    let mut a = vec![T::zero(); harmonics + 1];
    let mut b = vec![T::zero(); harmonics + 1];
    for m in 0..=harmonics {
        for (j, s) in speeds.iter().enumerate() {
            let (sn, cs) = table[(m * j) % q];
            a[m] += *s * cs;
            b[m] += *s * sn;
        }
        let w = if m == 0 { T::from_usize(q) } else { T::from_usize(q) / T::from_f64(2.0) };
        a[m] /= w;
        b[m] /= w;
    }
    // S(u) = a0 u + sum (a_m sin(mu) + b_m (1 - cos(mu))) / m, S'(u) = speed series.
    let arc = |u: T| -> (T, T) {
        let (s1, c1) = u.sin_cos();
        let (mut sm, mut cm) = (T::zero(), T::one());
        let mut value = a[0] * u;
        let mut deriv = a[0];
        for m in 1..=harmonics {
            let next = (sm * c1 + cm * s1, cm * c1 - sm * s1);
            sm = next.0;
            cm = next.1;
            let mm = T::from_usize(m);
            value += (a[m] * sm + b[m] * (T::one() - cm)) / mm;
            deriv += a[m] * cm + b[m] * sm;
        }
        (value, deriv)
    };
    let length = two_pi::<T>() * a[0];
    let domain = Domain::periodic(length)?;
    let mut rows = Vec::with_capacity(nodes);
    let mut u = T::zero();
    for i in 0..nodes {
        let s = domain.parameter(i, nodes);
        if i > 0 {
            u += (length / T::from_usize(nodes)) / a[0];
        }
        for _ in 0..60 {
            let (value, deriv) = arc(u);
            let step = (value - s) / deriv;
            u -= step;
            if step.to_f64().abs() < 1e-30 {
                break;
            }
        }
        rows.push(point(u).0);
    }
    SampledCurve::new(TargetSpace::sphere(2).into(), domain, &rows)
}

/// Smooth random tangent field: a low-mode ambient loop, projected node by node.
pub fn random_tangent_field<T: Real>(
    curve: &SampledCurve<T>,
    modes: usize,
    amplitude: f64,
    rng: &mut impl Rng,
) -> TangentField<T> {
    let target: &Target = curve.target();
    let m = target.ambient_dim();
    let loop_ = FourierLoop::<T>::random(m, modes, amplitude, rng)
        .with_constant((0..m).map(|_| T::from_f64(amplitude * rng.gen_range(-1.0..1.0))).collect());
    let n = curve.nodes();
    let scale = match curve.domain() {
        Domain::Periodic { period } => two_pi::<T>() / period,
        Domain::Interval { start, end } => two_pi::<T>() / (end - start),
    };
    let mut out = Field::zeros(n, m);
    for i in 0..n {
        let (w, _) = loop_.eval(scale * curve.domain().parameter(i, n));
        target.project(curve.point(i), &w, out.node_mut(i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;
    use crate::geometry::{Calculus, Scheme};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_speed_curves_have_unit_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = random_unit_speed_s2::<Dd>(512, 3, 0.03, 512, &mut rng).unwrap();
        let calc = Calculus::new(&c, Scheme::default()).unwrap();
        for n in calc.norms(calc.velocity()) {
            assert!((n - 1.0).abs() < 1e-9, "{n}");
        }
    }

    #[test]
    fn closed_curves_respect_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for space in [TargetSpace::sphere(2), TargetSpace::euclidean(3), TargetSpace::hyperbolic(2)] {
            let c = random_closed_curve::<f64>(space, 64, 1.0, 3, 0.3, &mut rng).unwrap();
            let v = random_tangent_field(&c, 3, 1.0, &mut rng);
            assert!(crate::geometry::tangency_defect(&c, &v) < 1e-12);
        }
    }

    #[test]
    fn seeds_are_deterministic() {
        let a = random_closed_curve::<f64>(TargetSpace::sphere(2), 32, 1.0, 3, 0.3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = random_closed_curve::<f64>(TargetSpace::sphere(2), 32, 1.0, 3, 0.3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
    }
}
