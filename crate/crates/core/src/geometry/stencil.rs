//! Central finite-difference stencils.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::curve::{Domain, Field};
use crate::scalar::Real;

/// Highest parameter derivative any operation needs.
pub const MAX_DERIVATIVE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryPolicy {
    Wrap,
    /// Drop `order / 2` nodes per end for every first derivative taken.
    InteriorOnly,
}

/// Accuracy order of the first-derivative stencil.
///
/// Higher derivatives are powers of that stencil, so a `j`-th derivative on
/// an interval loses `order / 2 * j` nodes at each end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scheme {
    order: usize,
}

impl Default for Scheme {
    fn default() -> Self {
        Self { order: 8 }
    }
}

impl Scheme {
    pub fn new(order: usize) -> Result<Self> {
        if ![2, 4, 6, 8].contains(&order) {
            return Err(Error::InvalidScheme(format!("order must be 2, 4, 6 or 8, got {order}")));
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn half_width(&self) -> usize {
        self.order / 2
    }

    /// Weights `w[-m..=m]` (stored from index 0) for `f'(0)` with unit spacing.
    pub fn first_derivative_weights<T: Real>(&self) -> Vec<T> {
        let m = self.half_width() as i64;
        let nodes: Vec<T> = (-m..=m).map(|i| T::from_f64(i as f64)).collect();
        fornberg(T::zero(), &nodes, 1).pop().expect("derivative row")
    }
}

/// First-derivative operator on a uniform grid.
#[derive(Clone, Debug)]
pub struct Differentiator<T> {
    /// `weights[s - 1]` multiplies `f[i + s] - f[i - s]`; already divided by the spacing.
    weights: Vec<T>,
    policy: BoundaryPolicy,
}

impl<T: Real> Differentiator<T> {
    pub fn new(scheme: Scheme, domain: &Domain<T>, nodes: usize) -> Self {
        let h = domain.spacing(nodes);
        let full = scheme.first_derivative_weights::<T>();
        let m = scheme.half_width();
        let weights = (1..=m).map(|s| full[m + s] / h).collect();
        Self { weights, policy: domain.boundary_policy() }
    }

    pub fn apply(&self, f: &Field<T>) -> Result<Field<T>> {
        let n = f.nodes();
        let dim = f.dim();
        let m = self.weights.len();
        let mut out = Field::zeros(n, dim);
        match self.policy {
            BoundaryPolicy::Wrap => {
                for i in 0..n {
                    let o = out.node_mut(i);
                    for (s, w) in (1..=m).zip(&self.weights) {
                        let fwd = f.node((i + s) % n);
                        let back = f.node((i + n - s) % n);
                        for k in 0..dim {
                            o[k] += *w * (fwd[k] - back[k]);
                        }
                    }
                }
                Ok(out)
            }
            BoundaryPolicy::InteriorOnly => {
                let v = f.valid();
                if v.end < v.start + 2 * m + 1 {
                    return Err(Error::EmptyWindow { operation: "differentiation" });
                }
                let valid = v.start + m..v.end - m;
                for i in valid.clone() {
                    let o = out.node_mut(i);
                    for (s, w) in (1..=m).zip(&self.weights) {
                        let fwd = f.node(i + s);
                        let back = f.node(i - s);
                        for k in 0..dim {
                            o[k] += *w * (fwd[k] - back[k]);
                        }
                    }
                }
                Ok(out.with_valid(valid))
            }
        }
    }

    /// `j` successive applications.
    pub fn apply_n(&self, f: &Field<T>, j: usize) -> Result<Field<T>> {
        let mut out = f.clone();
        for _ in 0..j {
            out = self.apply(&out)?;
        }
        Ok(out)
    }
}

/// Fornberg's recursion: row `d` holds weights of the `d`-th derivative at `z`.
pub fn fornberg<T: Real>(z: T, nodes: &[T], max_deriv: usize) -> Vec<Vec<T>> {
    let n = nodes.len();
    let mut c = vec![vec![T::zero(); n]; max_deriv + 1];
    c[0][0] = T::one();
    let mut c1 = T::one();
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    let kk = T::from_usize(k);
                    c[k][i] = c1 * (kk * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                let kk = T::from_usize(k);
                c[k][j] = (c4 * c[k][j] - kk * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
