//! Scalar abstraction over `f32`/`f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps};

/// Element type of every image, tensor, and loss in the crate.
///
/// The trait pins the handful of capabilities the numeric core needs on
/// top of [`num_traits::Float`], plus a matrix-multiply hook so generic
/// convolution code dispatches to an optimized kernel per concrete type.
pub trait Scalar:
    Float + FromPrimitive + NumAssignOps + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; the workhorse for constants.
    fn from_f64_c(v: f64) -> Self;

    /// Widening conversion to `f64` for logging and metrics.
    fn to_f64_c(self) -> f64;

    /// `c[m x n] = alpha * a[m x k] . b[k x n] + beta * c`, with explicit
    /// row/column strides (in elements) so callers can multiply by a
    /// transposed operand without materializing it.
    ///
    /// # Safety
    /// Every `(row, col)` index reachable through the given strides must
    /// lie inside the corresponding slice; use [`gemm`] unless strides are
    /// anything other than plain row-major.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_strided(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );
}

impl Scalar for f32 {
    fn from_f64_c(v: f64) -> Self {
        v as f32
    }

    fn to_f64_c(self) -> f64 {
        self as f64
    }

    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_strided(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
    }
}

impl Scalar for f64 {
    fn from_f64_c(v: f64) -> Self {
        v
    }

    fn to_f64_c(self) -> f64 {
        self
    }

    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_strided(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
    }
}

/// Row-major `c[m x n] = alpha * a[m x k] . b[k x n] + beta * c`.
pub fn gemm<S: Scalar>(
    m: usize,
    k: usize,
    n: usize,
    alpha: S,
    a: &[S],
    b: &[S],
    beta: S,
    c: &mut [S],
) {
    assert_eq!(a.len(), m * k, "gemm: lhs length");
    assert_eq!(b.len(), k * n, "gemm: rhs length");
    assert_eq!(c.len(), m * n, "gemm: out length");
    unsafe {
        S::gemm_strided(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            n as isize,
            1,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
