//! Curves into products of space forms, `x -> (phi(x), psi(x))`.
//!
//! The product metric and curvature are block-diagonal, so `tau_k` of the
//! combined curve is the concatenation of the factor values. The direct
//! evaluation on the product embedding is kept as an independent check of
//! that block structure.

use crate::error::{Error, Result};
use crate::geometry::{Domain, Field, SampledCurve, Scheme, Target, TangentField, TargetSpace};
use crate::residuals::{pass_threshold, tau_k};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct ProductCurve<T> {
    factor_a: SampledCurve<T>,
    factor_b: SampledCurve<T>,
}

/// Per-node concatenation `(a, b)`, valid where both are.
fn concat<T: Real>(a: &Field<T>, b: &Field<T>) -> Field<T> {
    let da = a.dim();
    a.zip_map(b, da + b.dim(), |_, x, y, o| {
        o[..da].copy_from_slice(x);
        o[da..].copy_from_slice(y);
    })
}

impl<T: Real> ProductCurve<T> {
    pub fn new(factor_a: SampledCurve<T>, factor_b: SampledCurve<T>) -> Result<Self> {
        if factor_a.domain() != factor_b.domain() || factor_a.nodes() != factor_b.nodes() {
            return Err(Error::DomainMismatch(format!(
                "{:?} with {} nodes vs {:?} with {} nodes",
                factor_a.domain(),
                factor_a.nodes(),
                factor_b.domain(),
                factor_b.nodes()
            )));
        }
        Ok(Self { factor_a, factor_b })
    }

    pub fn factor_a(&self) -> &SampledCurve<T> {
        &self.factor_a
    }

    pub fn factor_b(&self) -> &SampledCurve<T> {
        &self.factor_b
    }

    pub fn target(&self) -> Target {
        let mut factors = self.factor_a.target().factors().to_vec();
        factors.extend_from_slice(self.factor_b.target().factors());
        Target::product(factors)
    }

    /// The product embedding as a single sampled curve.
    pub fn combined(&self) -> Result<SampledCurve<T>> {
        let points = concat(self.factor_a.points(), self.factor_b.points());
        SampledCurve::from_field(self.target(), self.factor_a.domain(), points)
    }
}

#[derive(Clone, Debug)]
pub struct ProductTension<T> {
    pub factor_a: TangentField<T>,
    pub factor_b: TangentField<T>,
    /// `(tau_k(a), tau_k(b))`.
    pub blockwise: TangentField<T>,
    /// `tau_k` evaluated on the product embedding.
    pub direct: TangentField<T>,
}

impl<T: Real> ProductTension<T> {
    /// `sup |blockwise - direct|` on the common valid window.
    pub fn agreement(&self) -> f64 {
        self.blockwise.sub(&self.direct).sup_norm()
    }
}

pub fn product_tau_k<T: Real>(p: &ProductCurve<T>, k: usize, scheme: Scheme) -> Result<ProductTension<T>> {
    let factor_a = tau_k(&p.factor_a, k, scheme)?;
    let factor_b = tau_k(&p.factor_b, k, scheme)?;
    let blockwise = concat(&factor_a, &factor_b);
    let direct = tau_k(&p.combined()?, k, scheme)?;
    Ok(ProductTension { factor_a, factor_b, blockwise, direct })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductClass {
    pub factor_a_k_harmonic: bool,
    pub factor_b_k_harmonic: bool,
    /// Both factors pass: the blocks are independent, so a vanishing product
    /// `tau_k` forces each block to vanish and conversely.
    pub k_harmonic: bool,
    /// `k_harmonic` with non-vanishing tension.
    pub proper: bool,
}

pub fn classify<T: Real>(p: &ProductCurve<T>, k: usize, scheme: Scheme) -> Result<ProductClass> {
    let passes = |c: &SampledCurve<T>, j: usize| -> Result<bool> {
        Ok(tau_k(c, j, scheme)?.sup_norm() <= pass_threshold(c, j, scheme)?)
    };
    let a = passes(&p.factor_a, k)?;
    let b = passes(&p.factor_b, k)?;
    let harmonic = passes(&p.factor_a, 1)? && passes(&p.factor_b, 1)?;
    Ok(ProductClass { factor_a_k_harmonic: a, factor_b_k_harmonic: b, k_harmonic: a && b, proper: a && b && !harmonic })
}

/// The identity map of the parameter interval into `R`.
pub fn line_factor<T: Real>(domain: Domain<T>, nodes: usize) -> Result<SampledCurve<T>> {
    let points = Field::from_fn(nodes, 1, |i, o| o[0] = domain.parameter(i, nodes));
    SampledCurve::from_field(TargetSpace::euclidean(1).into(), domain, points)
}

/// The graph `x -> (x, psi(x))`.
///
/// The identity of the parameter is not periodic, so a closed `psi` is read on
/// the interval spanned by its nodes and evaluated on interior nodes only.
pub fn graph_curve<T: Real>(psi: &SampledCurve<T>) -> Result<ProductCurve<T>> {
    let n = psi.nodes();
    let domain = match psi.domain() {
        Domain::Periodic { .. } => Domain::interval(T::zero(), psi.spacing() * T::from_usize(n - 1))?,
        d => d,
    };
    let psi = SampledCurve::from_field(psi.target().clone(), domain, psi.points().clone())?;
    ProductCurve::new(line_factor(domain, n)?, psi)
}
