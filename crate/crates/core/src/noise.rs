//! Perlin noise fields and binary anomaly masks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::tensor::Tensor4;

/// Lattice cell counts allowed per axis.
pub const GRID_CHOICES: [usize; 6] = [1, 2, 4, 8, 16, 32];

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("grid count {0} is not a power of two in {{1,2,4,8,16,32}}")]
    BadGrid(usize),
    #[error("grid count {grid} exceeds image side {side}")]
    GridTooLarge { grid: usize, side: usize },
    #[error("threshold {0} outside [0,1]")]
    BadThreshold(f64),
}

/// A min-max normalized Perlin noise field.
///
/// `values` lie in `[0,1]` with an exact 0 minimum and 1 maximum, except
/// for a constant raw field which normalizes to all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct PerlinField<S> {
    pub height: usize,
    pub width: usize,
    pub grid_x: usize,
    pub grid_y: usize,
    pub values: Vec<S>,
}

/// H x W binary map; bit 1 marks an anomalous pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub height: usize,
    pub width: usize,
    bits: Vec<u8>,
}

impl Mask {
    pub fn new(height: usize, width: usize, bits: Vec<u8>) -> Self {
        assert_eq!(bits.len(), height * width, "mask length mismatch");
        assert!(bits.iter().all(|&b| b <= 1), "mask bits must be 0 or 1");
        Self {
            height,
            width,
            bits,
        }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::new(height, width, vec![0; height * width])
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize) -> u8 {
        self.bits[y * self.width + x]
    }

    /// Number of set pixels.
    pub fn area(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    /// Nearest-neighbor resample (corner-aligned), preserving binarity.
    pub fn resize_nearest(&self, out_h: usize, out_w: usize) -> Self {
        let sy = axis_scale(self.height, out_h);
        let sx = axis_scale(self.width, out_w);
        let mut bits = vec![0u8; out_h * out_w];
        for oy in 0..out_h {
            let iy = ((oy as f64 * sy).round() as usize).min(self.height - 1);
            for ox in 0..out_w {
                let ix = ((ox as f64 * sx).round() as usize).min(self.width - 1);
                bits[oy * out_w + ox] = self.bits[iy * self.width + ix];
            }
        }
        Self {
            height: out_h,
            width: out_w,
            bits,
        }
    }

    /// Mask bits as a single-channel NCHW tensor of `{0,1}` values.
    pub fn to_tensor<S: Scalar>(&self) -> Tensor4<S> {
        let data = self
            .bits
            .iter()
            .map(|&b| if b > 0 { S::one() } else { S::zero() })
            .collect();
        Tensor4::new(1, 1, self.height, self.width, data)
    }
}

fn axis_scale(input: usize, output: usize) -> f64 {
    if output <= 1 {
        0.0
    } else {
        (input as f64 - 1.0) / (output as f64 - 1.0)
    }
}

/// Unit gradient vectors at the `(grid_y + 1) x (grid_x + 1)` lattice
/// nodes, row-major (y outer, x inner). The draw order — one uniform
/// angle in `[0, 2pi)` per node — is part of the determinism contract.
pub fn gradient_lattice<S: Scalar>(
    grid_x: usize,
    grid_y: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(S, S)> {
    let mut grads = Vec::with_capacity((grid_y + 1) * (grid_x + 1));
    for _ in 0..(grid_y + 1) * (grid_x + 1) {
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        grads.push((S::from_f64_c(angle.cos()), S::from_f64_c(angle.sin())));
    }
    grads
}

fn check_grid(grid: usize, side: usize) -> Result<(), NoiseError> {
    if !GRID_CHOICES.contains(&grid) {
        return Err(NoiseError::BadGrid(grid));
    }
    if grid > side {
        return Err(NoiseError::GridTooLarge { grid, side });
    }
    Ok(())
}

/// Quintic fade `6t^5 - 15t^4 + 10t^3`.
#[inline]
fn fade<S: Scalar>(t: S) -> S {
    let (c6, c15, c10) = (
        S::from_f64_c(6.0),
        S::from_f64_c(15.0),
        S::from_f64_c(10.0),
    );
    t * t * t * (t * (t * c6 - c15) + c10)
}

#[inline]
fn lerp<S: Scalar>(a: S, b: S, t: S) -> S {
    a + t * (b - a)
}

/// Raw (un-normalized) lattice-gradient Perlin values, row-major.
///
/// Pixel `(i, j)` samples lattice coordinate `(i * grid_y / height,
/// j * grid_x / width)`; at integer lattice nodes the value is exactly 0.
pub fn perlin_raw<S: Scalar>(
    height: usize,
    width: usize,
    grid_x: usize,
    grid_y: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<S>, NoiseError> {
    check_grid(grid_x, width)?;
    check_grid(grid_y, height)?;
    let grads = gradient_lattice::<S>(grid_x, grid_y, rng);
    let nodes_x = grid_x + 1;
    let grad_at = |ix: usize, iy: usize| grads[iy * nodes_x + ix];

    let mut values = Vec::with_capacity(height * width);
    for i in 0..height {
        let y = S::from_f64_c(i as f64 * grid_y as f64 / height as f64);
        let y0 = y.floor().to_f64_c() as usize;
        let ty = y - S::from_f64_c(y0 as f64);
        let v = fade(ty);
        for j in 0..width {
            let x = S::from_f64_c(j as f64 * grid_x as f64 / width as f64);
            let x0 = x.floor().to_f64_c() as usize;
            let tx = x - S::from_f64_c(x0 as f64);
            let u = fade(tx);

            let dot = |ix: usize, iy: usize| {
                let (gx, gy) = grad_at(ix, iy);
                let dx = x - S::from_f64_c(ix as f64);
                let dy = y - S::from_f64_c(iy as f64);
                gx * dx + gy * dy
            };
            let n00 = dot(x0, y0);
            let n10 = dot(x0 + 1, y0);
            let n01 = dot(x0, y0 + 1);
            let n11 = dot(x0 + 1, y0 + 1);
            values.push(lerp(lerp(n00, n10, u), lerp(n01, n11, u), v));
        }
    }
    Ok(values)
}

/// Classic gradient-lattice Perlin noise, min-max normalized to `[0,1]`.
pub fn perlin_noise<S: Scalar>(
    height: usize,
    width: usize,
    grid_x: usize,
    grid_y: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PerlinField<S>, NoiseError> {
    let mut values = perlin_raw::<S>(height, width, grid_x, grid_y, rng)?;
    normalize_min_max(&mut values);
    Ok(PerlinField {
        height,
        width,
        grid_x,
        grid_y,
        values,
    })
}

/// In-place min-max normalization; a constant field becomes all zeros.
pub fn normalize_min_max<S: Scalar>(values: &mut [S]) {
    let mut lo = S::infinity();
    let mut hi = S::neg_infinity();
    for &v in values.iter() {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    let span = hi - lo;
    if span <= S::from_f64_c(1e-12) {
        values.iter_mut().for_each(|v| *v = S::zero());
    } else {
        values.iter_mut().for_each(|v| *v = (*v - lo) / span);
    }
}

/// Bit 1 where the field value strictly exceeds `threshold`.
pub fn binarize_mask<S: Scalar>(field: &PerlinField<S>, threshold: S) -> Result<Mask, NoiseError> {
    if !(threshold >= S::zero() && threshold <= S::one()) {
        return Err(NoiseError::BadThreshold(threshold.to_f64_c()));
    }
    let bits = field
        .values
        .iter()
        .map(|&v| u8::from(v > threshold))
        .collect();
    Ok(Mask::new(field.height, field.width, bits))
}

/// Axis-aligned rectangle in pixel coordinates, inclusive of `y0..y0+h`.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub y0: usize,
    pub x0: usize,
    pub h: usize,
    pub w: usize,
}

/// Union of explicit rectangles; `rectangle_mask` draws through here.
pub fn draw_rects(height: usize, width: usize, rects: &[Rect]) -> Mask {
    let mut bits = vec![0u8; height * width];
    for r in rects {
        assert!(r.y0 + r.h <= height && r.x0 + r.w <= width, "rect out of bounds");
        for y in r.y0..r.y0 + r.h {
            for x in r.x0..r.x0 + r.w {
                bits[y * width + x] = 1;
            }
        }
    }
    Mask::new(height, width, bits)
}

/// Union of 1..=3 random axis-aligned rectangles, each side drawn
/// uniformly from 10%..40% of the corresponding image side (rounded up,
/// so the area is always at least 1% of the image), placed fully inside.
pub fn rectangle_mask(height: usize, width: usize, rng: &mut ChaCha8Rng) -> Mask {
    let k = rng.random_range(1..=3usize);
    let mut rects = Vec::with_capacity(k);
    for _ in 0..k {
        let fh: f64 = rng.random_range(0.1..0.4);
        let fw: f64 = rng.random_range(0.1..0.4);
        let h = ((fh * height as f64).ceil() as usize).min(height);
        let w = ((fw * width as f64).ceil() as usize).min(width);
        let y0 = rng.random_range(0..=height - h);
        let x0 = rng.random_range(0..=width - w);
        rects.push(Rect { y0, x0, h, w });
    }
    draw_rects(height, width, &rects)
}
