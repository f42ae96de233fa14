//! Surface anomaly detection on anomaly-free training data.
//!
//! The pipeline simulates anomalies on clean images (Perlin-noise masks,
//! augmented texture sources, opacity blending), jointly trains a
//! reconstructive encoder-decoder and a discriminative U-Net on the
//! simulated triplets, and scores test images with a smoothed per-pixel
//! anomaly map plus image-level AUROC / pixel-level AUROC and AP metrics.
//!
//! All numeric code is generic over the scalar type (`f32` for the
//! production pipeline, `f64` for high-precision gradient verification);
//! see the type aliases at the crate root.

pub mod augment;
pub mod checkpoint;
pub mod config;
pub mod dataset;
pub mod image_io;
pub mod infer;
pub mod losses;
pub mod metrics;
pub mod nn;
pub mod noise;
pub mod optim;
pub mod rng;
pub mod scalar;
pub mod scoring;
pub mod simulate;
pub mod tape;
pub mod tensor;
pub mod train;

pub use scalar::Scalar;

/// Production pipeline element type.
pub type Elem = f32;
/// Image buffer in the production element type.
pub type Image = image_io::ImageBuffer<Elem>;
/// Activation/parameter tensor in the production element type.
pub type Tensor = tensor::Tensor4<Elem>;
/// Anomaly score map in the production element type.
pub type Map = scoring::AnomalyMap<Elem>;
