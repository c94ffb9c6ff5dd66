//! Floating scalar abstraction for the geometry / flow / estimate layers.
//!
//! Everything metric is generic over [`Real`] so the solver can be
//! instantiated at `f32` or `f64`; the lattice layer is exact rational and
//! does not use this trait. Concrete `f64` aliases live at the crate root.

use num_traits::{Float, FromPrimitive};

pub trait Real:
    Float + FromPrimitive + core::fmt::Debug + core::fmt::Display + core::iter::Sum + Send + Sync + 'static
{
    /// Conversion from an `f64` literal; panics only on non-finite input.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    fn to_f64c(self) -> f64;
}

impl Real for f32 {
    fn to_f64c(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64c(self) -> f64 {
        self
    }
}
