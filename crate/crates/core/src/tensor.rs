//! Dense NCHW activation/parameter tensor.

use crate::scalar::Scalar;

/// Four-dimensional tensor in `(batch, channels, height, width)` layout,
/// row-major with `width` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4<S> {
    pub n: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
    data: Vec<S>,
}

impl<S: Scalar> Tensor4<S> {
    pub fn new(n: usize, c: usize, h: usize, w: usize, data: Vec<S>) -> Self {
        assert!(n >= 1 && c >= 1 && h >= 1 && w >= 1, "tensor dims must be >= 1");
        assert_eq!(data.len(), n * c * h * w, "tensor data length mismatch");
        Self { n, c, h, w, data }
    }

    pub fn zeros(n: usize, c: usize, h: usize, w: usize) -> Self {
        Self::new(n, c, h, w, vec![S::zero(); n * c * h * w])
    }

    pub fn filled(n: usize, c: usize, h: usize, w: usize, v: S) -> Self {
        Self::new(n, c, h, w, vec![v; n * c * h * w])
    }

    /// Scalar tensor `(1,1,1,1)`, the shape of every loss node.
    pub fn scalar(v: S) -> Self {
        Self::new(1, 1, 1, 1, vec![v])
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.n, self.c, self.h, self.w)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    #[inline]
    pub fn idx(&self, n: usize, c: usize, y: usize, x: usize) -> usize {
        debug_assert!(n < self.n && c < self.c && y < self.h && x < self.w);
        ((n * self.c + c) * self.h + y) * self.w + x
    }

    #[inline]
    pub fn at(&self, n: usize, c: usize, y: usize, x: usize) -> S {
        self.data[self.idx(n, c, y, x)]
    }

    #[inline]
    pub fn at_mut(&mut self, n: usize, c: usize, y: usize, x: usize) -> &mut S {
        let i = self.idx(n, c, y, x);
        &mut self.data[i]
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    /// Contiguous slice of one batch item.
    pub fn item(&self, n: usize) -> &[S] {
        let len = self.c * self.h * self.w;
        &self.data[n * len..(n + 1) * len]
    }

    pub fn item_mut(&mut self, n: usize) -> &mut [S] {
        let len = self.c * self.h * self.w;
        &mut self.data[n * len..(n + 1) * len]
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self {
            n: self.n,
            c: self.c,
            h: self.h,
            w: self.w,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scalar_value(&self) -> S {
        assert_eq!(self.numel(), 1, "not a scalar tensor");
        self.data[0]
    }

    /// Widening copy, used to move fixtures between precisions in tests
    /// and to store checkpoints in their fixed on-disk element type.
    pub fn cast<T: Scalar>(&self) -> Tensor4<T> {
        Tensor4::new(
            self.n,
            self.c,
            self.h,
            self.w,
            self.data.iter().map(|v| T::from_f64_c(v.to_f64_c())).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major_width_fastest() {
        let t = Tensor4::<f32>::new(1, 2, 2, 3, (0..12).map(|v| v as f32).collect());
        assert_eq!(t.at(0, 0, 0, 1), 1.0);
        assert_eq!(t.at(0, 0, 1, 0), 3.0);
        assert_eq!(t.at(0, 1, 0, 0), 6.0);
    }

    #[test]
    #[should_panic(expected = "length mismatch")]
    fn length_mismatch_panics() {
        let _ = Tensor4::<f32>::new(1, 1, 2, 2, vec![0.0; 3]);
    }
}
