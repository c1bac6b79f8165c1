//! Second variation at constant-curvature targets and its dense spectrum.
//!
//! With `U = Delta^(k-2) tau` and `J(V) = Delta V - R(V, gamma') gamma'`,
//!
//! ```text
//! Q_k(V) = int <J V, Delta^(k-2) J V>
//!        - int <V, Delta^(k-2){R(tau,V)tau + R(gamma',nabla V)tau + 2R(gamma',V)nabla tau}
//!                  + R(nabla V, gamma') U - 2 R(U, gamma') nabla V>.
//! ```
//!
//! For `k = 2` this is the Hessian of `E_2` at a critical curve. For `k >= 3`
//! it is neither the Hessian of `E_k` nor the linearization of `tau_k`: it
//! keeps one of the `k - 1` commutators of the variation with the rough
//! Laplacians. [`Expansion::TensionLinearization`] keeps all of them, and the
//! Hessian of `E_k` itself further differs by the linearization of the
//! curvature remainder in [`super::euler_lagrange`].
//!
//! Away from a critical curve the value depends on how the variation is
//! extended and is reported as such.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Calculus, Field, SampledCurve, Scheme, TangentField};
use crate::residuals::{pass_threshold, tau_k_with};
use crate::scalar::Real;
use crate::variational::require_periodic;

/// Largest tangent-space dimension assembled by default.
pub const DEFAULT_HESSIAN_CAP: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondVariation {
    pub value: f64,
    /// Set when the curve failed the criticality test and the caller asked
    /// for the value anyway.
    pub extension_dependent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues below `-eps0`.
    pub negative_count: usize,
    pub eps0: f64,
    /// `|B - B^T|_inf / |B|_inf` of the bilinear form before symmetrization.
    pub asymmetry: f64,
    /// `|H|_inf` (largest absolute row sum).
    pub norm: f64,
    pub dim: usize,
    pub extension_dependent: bool,
}

impl SpectrumReport {
    /// Eigenvalues with `|lambda| <= tol_rel * |H|`.
    pub fn near_zero(&self, tol_rel: f64) -> usize {
        self.eigenvalues.iter().filter(|l| l.abs() <= tol_rel * self.norm).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// `eps0 = eps_rel * |H|`.
    pub eps_rel: f64,
    pub cap: usize,
    pub allow_noncritical: bool,
    pub expansion: Expansion,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { eps_rel: 1e-6, cap: DEFAULT_HESSIAN_CAP, allow_noncritical: false, expansion: Expansion::default() }
    }
}

/// Which terms the quadratic form keeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expansion {
    /// The closed form in the module docs: only the commutator
    /// `[nabla_t, Delta]` with the innermost Laplacian, wrapped in `Delta^(k-2)`.
    #[default]
    SingleCommutator,
    /// `-int <nabla_t tau_k, V>`: every commutator produced while
    /// differentiating `Delta^(k-1) tau`, i.e. the exact linearization of `tau_k`.
    TensionLinearization,
}

/// Curve data shared by every application of the form.
struct Form<'a, T: Real> {
    calc: Calculus<'a, T>,
    k: usize,
    expansion: Expansion,
    tau: TangentField<T>,
    /// `Delta^j tau` for `j = 0..=k-2`, with covariant derivatives.
    powers: Vec<TangentField<T>>,
    nabla_powers: Vec<TangentField<T>>,
}

impl<'a, T: Real> Form<'a, T> {
    fn new(curve: &'a SampledCurve<T>, k: usize, scheme: Scheme, expansion: Expansion) -> Result<Self> {
        if !(2..=4).contains(&k) {
            return Err(Error::UnsupportedK(k));
        }
        require_periodic(curve)?;
        let calc = Calculus::new(curve, scheme)?;
        let tau = calc.tension()?;
        let mut powers = vec![tau.clone()];
        for _ in 2..k {
            let next = calc.rough_laplacian(powers.last().expect("non-empty"))?;
            powers.push(next);
        }
        let nabla_powers = powers.iter().map(|p| calc.nabla(p)).collect::<Result<Vec<_>>>()?;
        Ok(Self { calc, k, expansion, tau, powers, nabla_powers })
    }

    fn u(&self) -> &TangentField<T> {
        &self.powers[self.k - 2]
    }

    fn jacobi(&self, v: &TangentField<T>) -> Result<TangentField<T>> {
        Ok(self.calc.rough_laplacian(v)?.sub(&self.calc.curvature_op(v)))
    }

    /// `[nabla_t, Delta] Delta^j tau` along `W`:
    /// `2R(gamma',W) nabla X + R(gamma', nabla W) X + R(tau, W) X` with `X = Delta^j tau`.
    fn commutator(&self, w: &TangentField<T>, nw: &TangentField<T>, j: usize) -> TangentField<T> {
        let c = &self.calc;
        let vel = c.velocity();
        let x = &self.powers[j];
        c.riemann(vel, w, &self.nabla_powers[j])
            .scale(T::from_f64(2.0))
            .add(&c.riemann(vel, nw, x))
            .add(&c.riemann(&self.tau, w, x))
    }

    /// The field paired with `J(V)`.
    fn left_image(&self, w: &TangentField<T>, jw: &TangentField<T>) -> Result<TangentField<T>> {
        let c = &self.calc;
        let mut out = c.rough_laplacian_iter(jw, self.k - 2)?;
        if self.expansion == Expansion::TensionLinearization && self.k >= 3 {
            let nw = c.nabla(w)?;
            for j in 0..=self.k - 3 {
                let term = c.rough_laplacian_iter(&self.commutator(w, &nw, j), self.k - 3 - j)?;
                out = out.sub(&term);
            }
        }
        Ok(out)
    }

    /// The field paired with `V`.
    fn curvature_image(&self, w: &TangentField<T>) -> Result<TangentField<T>> {
        let c = &self.calc;
        let vel = c.velocity();
        let nw = c.nabla(w)?;
        let u = self.u();
        let reparam = c.riemann(&nw, vel, u).axpy(T::from_f64(-2.0), &c.riemann(u, vel, &nw));
        match self.expansion {
            Expansion::SingleCommutator => {
                Ok(c.rough_laplacian_iter(&self.commutator(w, &nw, 0), self.k - 2)?.add(&reparam))
            }
            Expansion::TensionLinearization => {
                // `C_W(U) - R(U, nabla W) gamma' - R(U, gamma') nabla W`.
                Ok(self
                    .commutator(w, &nw, self.k - 2)
                    .sub(&c.riemann(u, &nw, vel))
                    .sub(&c.riemann(u, vel, &nw)))
            }
        }
    }

    /// `B(V, W)` with `Q(V) = B(V, V)`; symmetric only at critical curves.
    fn bilinear(&self, v: &TangentField<T>, w: &TangentField<T>) -> Result<T> {
        let jv = self.jacobi(v)?;
        let jw = self.jacobi(w)?;
        let first = self.calc.l2_inner(&jv, &self.left_image(w, &jw)?);
        let second = self.calc.l2_inner(v, &self.curvature_image(w)?);
        Ok(first - second)
    }
}

fn check_critical<T: Real>(curve: &SampledCurve<T>, k: usize, scheme: Scheme, allow: bool) -> Result<bool> {
    let calc = Calculus::new(curve, scheme)?;
    let residual = tau_k_with(&calc, k)?.sup_norm();
    let threshold = pass_threshold(curve, k, scheme)?;
    if residual <= threshold {
        Ok(false)
    } else if allow {
        Ok(true)
    } else {
        Err(Error::NotCritical { k, residual, threshold })
    }
}

/// `Q_k(V)` by quadrature; requires a critical curve unless `allow_noncritical`.
pub fn second_variation<T: Real>(
    curve: &SampledCurve<T>,
    v: &TangentField<T>,
    k: usize,
    scheme: Scheme,
    expansion: Expansion,
    allow_noncritical: bool,
) -> Result<SecondVariation> {
    let form = Form::new(curve, k, scheme, expansion)?;
    let extension_dependent = check_critical(curve, k, scheme, allow_noncritical)?;
    Ok(SecondVariation { value: form.bilinear(v, v)?.to_f64(), extension_dependent })
}

/// Column-major `(nodes * ambient) x cols` copy of per-column fields,
/// with the target's inner-product signs folded in when `signed`.
fn stack<T: Real>(cols: &[Field<T>], signs: &[f64]) -> DMatrix<f64> {
    let rows = cols[0].data().len();
    let m = signs.len();
    DMatrix::from_fn(rows, cols.len(), |r, c| cols[c].data()[r].to_f64() * signs[r % m])
}

/// Dense Hessian in the L2-orthonormal basis built from per-node tangent
/// frames, and its eigenvalues.
pub fn hessian_spectrum<T: Real>(
    curve: &SampledCurve<T>,
    k: usize,
    scheme: Scheme,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport> {
    let form = Form::new(curve, k, scheme, opts.expansion)?;
    let target = curve.target();
    let n = curve.nodes();
    let m = target.ambient_dim();
    let dim = n * target.intrinsic_dim();
    if dim > opts.cap {
        return Err(Error::TooLarge { dim, cap: opts.cap });
    }
    let extension_dependent = check_critical(curve, k, scheme, opts.allow_noncritical)?;

    // Inner-product sign of each ambient coordinate (Minkowski blocks flip the last).
    let mut signs = vec![0.0; m];
    for (j, s) in signs.iter_mut().enumerate() {
        let mut e = vec![T::zero(); m];
        e[j] = T::one();
        *s = target.inner(&e, &e).to_f64();
    }

    let mut basis = Vec::with_capacity(dim);
    for i in 0..n {
        for e in target.tangent_frame(curve.point(i)) {
            let mut f = Field::zeros(n, m);
            f.node_mut(i).copy_from_slice(&e);
            basis.push(f);
        }
    }
    let mut jac = Vec::with_capacity(dim);
    let mut left = Vec::with_capacity(dim);
    let mut curv = Vec::with_capacity(dim);
    for b in &basis {
        let j = form.jacobi(b)?;
        left.push(form.left_image(b, &j)?);
        curv.push(form.curvature_image(b)?);
        jac.push(j);
    }
    let ones = vec![1.0; m];
    // Quadrature weight h, then rescaling to the L2-orthonormal basis e / sqrt(h).
    let b = stack(&jac, &signs).transpose() * stack(&left, &ones) - stack(&basis, &signs).transpose() * stack(&curv, &ones);

    let inf_norm = |a: &DMatrix<f64>| a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let bt = b.transpose();
    let raw_norm = inf_norm(&b);
    let asymmetry = if raw_norm > 0.0 { inf_norm(&(&b - &bt)) / raw_norm } else { 0.0 };
    let hess = (&b + &bt) * 0.5;
    let norm = inf_norm(&hess);
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(hess).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let eps0 = opts.eps_rel * norm;
    let negative_count = eigenvalues.iter().filter(|&&l| l < -eps0).count();
    Ok(SpectrumReport { eigenvalues, negative_count, eps0, asymmetry, norm, dim, extension_dependent })
}
