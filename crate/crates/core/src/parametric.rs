//! Closed-form trigonometric curves with exact derivatives.
//!
//! Every family is a constant vector plus a sum of rotating pairs
//! `cos(w t) p + sin(w t) q`, so derivatives of any order are exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, SampledCurve, Target, TargetSpace};
use crate::scalar::Real;

/// Tolerance on the family invariants (orthogonality, squared norms, frequency sum).
pub const FAMILY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hemisphere {
    North,
    South,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveKind<T> {
    GreatCircle,
    SingleFrequency { freq: T, c1: Vec<T>, c2: Vec<T>, c4: Vec<T> },
    DoubleFrequency { freqs: (T, T), c: [Vec<T>; 4] },
    ConstantKappa { kappa: T, hemisphere: Hemisphere },
}

#[derive(Clone, Debug, PartialEq)]
struct Rotor<T> {
    freq: T,
    cos_axis: Vec<T>,
    sin_axis: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParametricCurve<T> {
    kind: CurveKind<T>,
    ambient_dim: usize,
    offset: Vec<T>,
    rotors: Vec<Rotor<T>>,
}

fn basis<T: Real>(dim: usize, i: usize, scale: T) -> Vec<T> {
    let mut v = vec![T::zero(); dim];
    v[i] = scale;
    v
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    crate::scalar::dot(a, b)
}

fn check_frame<T: Real>(names: &[&str], vs: &[&Vec<T>]) -> Result<()> {
    let dim = vs[0].len();
    let half = T::ratio(1, 2);
    for (i, v) in vs.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
        }
        let d = (dot(v, v) - half).to_f64().abs();
        if d > FAMILY_TOL {
            return Err(Error::InvalidFamily(format!(
                "|{}|^2 must equal 1/2 (off by {d:e})",
                names[i]
            )));
        }
        for j in 0..i {
            let d = dot(v, vs[j]).to_f64().abs();
            if d > FAMILY_TOL {
                return Err(Error::InvalidFamily(format!(
                    "{} and {} must be orthogonal (inner product {d:e})",
                    names[j], names[i]
                )));
            }
        }
    }
    Ok(())
}

impl<T: Real> ParametricCurve<T> {
    /// `cos t e1 + sin t e2` in `R^dim`.
    pub fn great_circle(ambient_dim: usize) -> Result<Self> {
        if ambient_dim < 2 {
            return Err(Error::InvalidFamily("a great circle needs ambient dimension >= 2".into()));
        }
        Ok(Self {
            kind: CurveKind::GreatCircle,
            ambient_dim,
            offset: vec![T::zero(); ambient_dim],
            rotors: vec![Rotor {
                freq: T::one(),
                cos_axis: basis(ambient_dim, 0, T::one()),
                sin_axis: basis(ambient_dim, 1, T::one()),
            }],
        })
    }

    /// `cos(a t) c1 + sin(a t) c2 + c4`; unit speed exactly when `a = sqrt 2`.
    pub fn single_frequency(freq: T, c1: Vec<T>, c2: Vec<T>, c4: Vec<T>) -> Result<Self> {
        if !(freq.to_f64() > 0.0) {
            return Err(Error::InvalidFamily(format!("frequency must be positive, got {freq}")));
        }
        check_frame(&["c1", "c2", "c4"], &[&c1, &c2, &c4])?;
        Ok(Self {
            ambient_dim: c1.len(),
            offset: c4.clone(),
            rotors: vec![Rotor { freq, cos_axis: c1.clone(), sin_axis: c2.clone() }],
            kind: CurveKind::SingleFrequency { freq, c1, c2, c4 },
        })
    }

    /// `cos(a t) c1 + sin(a t) c2 + cos(b t) c3 + sin(b t) c4` with `a^2 + b^2 = 2`, `a != b`.
    pub fn double_frequency(a: T, b: T, c: [Vec<T>; 4]) -> Result<Self> {
        if !(a.to_f64() > 0.0 && b.to_f64() > 0.0) {
            return Err(Error::InvalidFamily("frequencies must be positive".into()));
        }
        let sum = (a * a + b * b - T::from_f64(2.0)).to_f64().abs();
        if sum > FAMILY_TOL {
            return Err(Error::InvalidFamily(format!("a^2 + b^2 must equal 2 (off by {sum:e})")));
        }
        if ((a * a - b * b).to_f64()).abs() <= FAMILY_TOL {
            return Err(Error::InvalidFamily("a^2 and b^2 must differ".into()));
        }
        check_frame(&["c1", "c2", "c3", "c4"], &[&c[0], &c[1], &c[2], &c[3]])?;
        Ok(Self {
            ambient_dim: c[0].len(),
            offset: vec![T::zero(); c[0].len()],
            rotors: vec![
                Rotor { freq: a, cos_axis: c[0].clone(), sin_axis: c[1].clone() },
                Rotor { freq: b, cos_axis: c[2].clone(), sin_axis: c[3].clone() },
            ],
            kind: CurveKind::DoubleFrequency { freqs: (a, b), c },
        })
    }

    /// Unit-speed latitude circle on `S^2` with geodesic curvature `kappa`
    /// (positive in the northern hemisphere under `N = gamma x T`).
    pub fn constant_kappa_circle(kappa: T, hemisphere: Hemisphere) -> Result<Self> {
        if !(kappa.to_f64() >= 0.0) {
            return Err(Error::InvalidFamily(format!("kappa must be non-negative, got {kappa}")));
        }
        // cot r = kappa, so sin r = 1/sqrt(1+kappa^2) and cos r = kappa sin r.
        let sin_r = T::one() / (T::one() + kappa * kappa).sqrt();
        let cos_r = kappa * sin_r;
        let height = match hemisphere {
            Hemisphere::North => cos_r,
            Hemisphere::South => -cos_r,
        };
        Ok(Self {
            kind: CurveKind::ConstantKappa { kappa, hemisphere },
            ambient_dim: 3,
            offset: basis(3, 2, height),
            rotors: vec![Rotor {
                freq: T::one() / sin_r,
                cos_axis: basis(3, 0, sin_r),
                sin_axis: basis(3, 1, sin_r),
            }],
        })
    }

    /// The proper biharmonic circle of radius `1/sqrt 2` in `S^{dim-1}`,
    /// with `c1, c2, c4` along the first three axes.
    pub fn biharmonic_circle(ambient_dim: usize) -> Result<Self> {
        if ambient_dim < 3 {
            return Err(Error::InvalidFamily("needs ambient dimension >= 3".into()));
        }
        let s = T::ratio(1, 2).sqrt();
        Self::single_frequency(
            T::from_f64(2.0).sqrt(),
            basis(ambient_dim, 0, s),
            basis(ambient_dim, 1, s),
            basis(ambient_dim, 2, s),
        )
    }

    /// Curve on the Clifford torus in `S^3` with `a = 2 b`, `b = sqrt(2/5)`.
    pub fn clifford_torus_curve() -> Result<Self> {
        let b = T::ratio(2, 5).sqrt();
        let a = T::ratio(8, 5).sqrt();
        let s = T::ratio(1, 2).sqrt();
        Self::double_frequency(a, b, [basis(4, 0, s), basis(4, 1, s), basis(4, 2, s), basis(4, 3, s)])
    }

    pub fn kind(&self) -> &CurveKind<T> {
        &self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn target(&self) -> Target {
        TargetSpace::sphere(self.ambient_dim - 1).into()
    }

    /// Same curve traversed `factor` times faster.
    pub fn time_scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        for r in out.rotors.iter_mut() {
            r.freq *= factor;
        }
        out
    }

    pub fn eval(&self, t: T) -> Vec<T> {
        self.exact_derivative(t, 0)
    }

    /// `j`-th derivative in closed form.
    pub fn exact_derivative(&self, t: T, j: usize) -> Vec<T> {
        let mut out = if j == 0 { self.offset.clone() } else { vec![T::zero(); self.ambient_dim] };
        for r in &self.rotors {
            let (s, c) = (r.freq * t).sin_cos();
            // Differentiating j times advances the phase by j quarter turns.
            let (cc, ss) = match j % 4 {
                0 => (c, s),
                1 => (-s, c),
                2 => (-c, -s),
                _ => (s, -c),
            };
            let amp = r.freq.powi(j as i32);
            for k in 0..self.ambient_dim {
                out[k] += amp * (cc * r.cos_axis[k] + ss * r.sin_axis[k]);
            }
        }
        out
    }

    /// Smallest positive period.
    pub fn period(&self) -> Result<T> {
        let two_pi = T::from_f64(2.0) * T::pi();
        match self.rotors.as_slice() {
            [r] => Ok(two_pi / r.freq),
            [r1, r2] => {
                let (p, _) = rational_ratio(r1.freq.to_f64() / r2.freq.to_f64()).ok_or(
                    Error::IncommensurateFrequencies { a: r1.freq.to_f64(), b: r2.freq.to_f64() },
                )?;
                Ok(two_pi * T::from_f64(p as f64) / r1.freq)
            }
            _ => unreachable!("families have one or two rotors"),
        }
    }

    /// Periodic sampling over `periods` minimal periods.
    pub fn sample(&self, nodes: usize, periods: usize) -> Result<SampledCurve<T>> {
        if periods == 0 {
            return Err(Error::InvalidFamily("periods must be positive".into()));
        }
        let domain = Domain::periodic(self.period()? * T::from_usize(periods))?;
        self.sample_on(domain, nodes)
    }

    /// Sampling on an arbitrary domain; an interval need not cover a period.
    pub fn sample_on(&self, domain: Domain<T>, nodes: usize) -> Result<SampledCurve<T>> {
        let rows: Vec<Vec<T>> = (0..nodes).map(|i| self.eval(domain.parameter(i, nodes))).collect();
        SampledCurve::new(self.target(), domain, &rows)
    }

    /// Exact `j`-th derivative at the grid nodes of `domain`.
    pub fn sample_derivative(&self, domain: Domain<T>, nodes: usize, j: usize) -> Vec<Vec<T>> {
        (0..nodes).map(|i| self.exact_derivative(domain.parameter(i, nodes), j)).collect()
    }
}

/// `x = p / q` in lowest terms with `q <= 1000`, if one exists to 1e-12.
pub fn rational_ratio(x: f64) -> Option<(u64, u64)> {
    if !(x.is_finite() && x > 0.0) {
        return None;
    }
    for q in 1..=1000u64 {
        let p = (x * q as f64).round();
        if p >= 1.0 && (p / q as f64 - x).abs() <= 1e-12 * x {
            let p = p as u64;
            let g = gcd(p, q);
            return Some((p / g, q / g));
        }
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;
    use proptest::prelude::*;

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn biharmonic_circle_start_and_period() {
        let c = ParametricCurve::<f64>::biharmonic_circle(3).unwrap();
        let s = 0.5f64.sqrt();
        let start = c.eval(0.0);
        assert!((start[0] - s).abs() < 1e-15 && (start[2] - s).abs() < 1e-15);
        let l = c.period().unwrap();
        assert!((l - std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-14);
        let end = c.eval(l);
        for k in 0..3 {
            assert!((end[k] - start[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn biharmonic_circle_second_derivative_is_scaled_oscillation() {
        let c = ParametricCurve::<f64>::biharmonic_circle(3).unwrap();
        let t = 0.83;
        let acc = c.exact_derivative(t, 2);
        let mut osc = c.eval(t);
        osc[2] = 0.0;
        for k in 0..3 {
            assert!((acc[k] + 2.0 * osc[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn clifford_curve_start_period_and_speed() {
        let c = ParametricCurve::<Dd>::clifford_torus_curve().unwrap();
        let start: Vec<f64> = c.eval(Dd::ZERO).iter().map(|v| v.to_f64()).collect();
        let s = 0.5f64.sqrt();
        assert!((start[0] - s).abs() < 1e-15 && (start[2] - s).abs() < 1e-15);
        assert!((norm(&start) - 1.0).abs() < 1e-15);
        let b = (2.0f64 / 5.0).sqrt();
        let l = c.period().unwrap().to_f64();
        assert!((l - 2.0 * std::f64::consts::PI / b).abs() < 1e-12);
        let v: Vec<f64> = c.exact_derivative(Dd::from_f64(0.4), 1).iter().map(|v| v.to_f64()).collect();
        assert!((norm(&v) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampling_periods() {
        let g = ParametricCurve::<f64>::great_circle(3).unwrap().sample(64, 1).unwrap();
        match g.domain() {
            Domain::Periodic { period } => assert!((period - 2.0 * std::f64::consts::PI).abs() < 1e-15),
            _ => panic!("expected periodic"),
        }
        let e = ParametricCurve::<f64>::biharmonic_circle(3).unwrap().sample(128, 1).unwrap();
        assert_eq!(e.nodes(), 128);
    }

    #[test]
    fn incommensurate_frequencies_are_rejected() {
        let a = 1.2f64;
        let b = (2.0 - a * a).sqrt();
        let s = 0.5f64.sqrt();
        let c = |i| basis(4, i, s);
        let curve = ParametricCurve::double_frequency(a, b, [c(0), c(1), c(2), c(3)]).unwrap();
        assert!(matches!(curve.sample(64, 1), Err(Error::IncommensurateFrequencies { .. })));
    }

    #[test]
    fn family_invariants_are_enforced() {
        let s = 0.5f64.sqrt();
        let bad = ParametricCurve::single_frequency(2f64.sqrt(), basis(3, 0, s), basis(3, 0, s), basis(3, 2, s));
        assert!(matches!(bad, Err(Error::InvalidFamily(m)) if m.contains("orthogonal")));
        let short = ParametricCurve::single_frequency(2f64.sqrt(), basis(3, 0, 0.5), basis(3, 1, s), basis(3, 2, s));
        assert!(matches!(short, Err(Error::InvalidFamily(m)) if m.contains("|c1|^2")));
        let equal = ParametricCurve::double_frequency(1.0, 1.0, [basis(4, 0, s), basis(4, 1, s), basis(4, 2, s), basis(4, 3, s)]);
        assert!(equal.is_err());
    }

    #[test]
    fn kappa_one_circle_matches_biharmonic_circle() {
        let k = ParametricCurve::<f64>::constant_kappa_circle(1.0, Hemisphere::North).unwrap();
        let e = ParametricCurve::<f64>::biharmonic_circle(3).unwrap();
        for t in [0.0, 0.3, 1.7] {
            let (a, b) = (k.eval(t), e.eval(t));
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-15);
            }
        }
        let z = ParametricCurve::<f64>::constant_kappa_circle(0.0, Hemisphere::North).unwrap();
        assert!(z.eval(0.4)[2].abs() < 1e-15);
    }

    #[test]
    fn rational_detection() {
        assert_eq!(rational_ratio(2.0), Some((2, 1)));
        assert_eq!(rational_ratio(0.75), Some((3, 4)));
        assert_eq!(rational_ratio(2f64.sqrt()), None);
    }

    proptest! {
        #[test]
        fn families_stay_on_the_sphere_with_unit_speed(t in -20.0..20.0f64, kappa in 0.0..5.0f64) {
            let curves = [
                ParametricCurve::<f64>::great_circle(3).unwrap(),
                ParametricCurve::biharmonic_circle(4).unwrap(),
                ParametricCurve::clifford_torus_curve().unwrap(),
                ParametricCurve::constant_kappa_circle(kappa, Hemisphere::South).unwrap(),
            ];
            for c in &curves {
                prop_assert!((norm(&c.eval(t)) - 1.0).abs() <= 1e-14);
                prop_assert!((norm(&c.exact_derivative(t, 1)) - 1.0).abs() <= 1e-14);
            }
        }

        #[test]
        fn derivatives_chain(t in -5.0..5.0f64, j in 0usize..8) {
            // Central difference of the j-th derivative approximates the (j+1)-th.
            let c = ParametricCurve::<Dd>::clifford_torus_curve().unwrap();
            let h = Dd::from_f64(1e-6);
            let tt = Dd::from_f64(t);
            let fwd = c.exact_derivative(tt + h, j);
            let back = c.exact_derivative(tt - h, j);
            let next = c.exact_derivative(tt, j + 1);
            for k in 0..4 {
                let fd = (fwd[k] - back[k]) / (h + h);
                prop_assert!((fd - next[k]).to_f64().abs() <= 1e-11);
            }
        }
    }
}
