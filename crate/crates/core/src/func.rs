//! Shared, cheaply clonable function values on `R^d`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

type ValueFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;
type PartialFn = dyn Fn(&[f64], usize) -> Complex64 + Send + Sync;

/// A complex-valued function on `R^d`, optionally carrying its exact
/// partial derivatives.
#[derive(Clone)]
pub struct Func {
    value: Arc<ValueFn>,
    partial: Option<Arc<PartialFn>>,
}

impl Func {
    pub fn new(f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(f),
            partial: None,
        }
    }

    /// Real-valued convenience constructor.
    pub fn real(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(move |x| Complex64::new(f(x), 0.0))
    }

    /// A function together with its exact partial derivatives `∂_j f`.
    pub fn with_partial(
        f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
        df: impl Fn(&[f64], usize) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(f),
            partial: Some(Arc::new(df)),
        }
    }

    pub fn zero() -> Self {
        Self::with_partial(
            |_| Complex64::new(0.0, 0.0),
            |_, _| Complex64::new(0.0, 0.0),
        )
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        (self.value)(x)
    }

    /// Exact `∂_j f(x)` when known.
    pub fn exact_partial(&self, x: &[f64], j: usize) -> Option<Complex64> {
        self.partial.as_ref().map(|d| d(x, j))
    }

    pub fn has_exact_partial(&self) -> bool {
        self.partial.is_some()
    }
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Func")
            .field("exact_partial", &self.partial.is_some())
            .finish()
    }
}
