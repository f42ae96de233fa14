//! Run configuration: TOML file parsing, overrides, validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid override '{0}' (expected key=value)")]
    BadOverride(String),
    #[error("config invariant violated: {0}")]
    Invalid(String),
}

/// Where anomaly textures come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalySourceKind {
    /// Directory of texture images sampled uniformly.
    TextureDir(PathBuf),
    /// Homogeneous regions of a randomly sampled color.
    SolidColor,
}

/// Which anomaly-shape generator drives the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskGeneratorKind {
    Perlin,
    Rectangles,
}

/// All run-level knobs. Every field has a default, unknown keys are
/// rejected, and command-line overrides take precedence over the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Square working resolution in pixels.
    pub image_size: usize,
    /// Weight of the structural-similarity term in the reconstruction loss.
    pub lambda_ssim: f64,
    /// Focusing exponent of the segmentation loss.
    pub focal_gamma: f64,
    /// Opacity interval for blending anomalies.
    pub beta_range: [f64; 2],
    /// Probability that a simulated training sample carries an anomaly.
    pub p_anomaly: f64,
    /// Mean-filter side (odd) for the image-level score; 0 selects the
    /// resolution-scaled default.
    pub smoothing_size: usize,
    pub epochs: usize,
    pub lr: f64,
    /// Epochs at which the learning rate is multiplied by 0.1; empty
    /// selects the default 4/7 and 6/7 points of the schedule.
    pub lr_milestones: Vec<usize>,
    pub seed: u64,
    pub anomaly_source: AnomalySourceKind,
    pub mask_generator: MaskGeneratorKind,
    /// Apply the random augmentation chain to texture sources.
    pub augment_enabled: bool,
    /// Draw opacity uniformly from `beta_range`; otherwise use its midpoint.
    pub beta_randomized: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            image_size: 64,
            lambda_ssim: 1.0,
            focal_gamma: 2.0,
            beta_range: [0.1, 1.0],
            p_anomaly: 0.5,
            smoothing_size: 0,
            epochs: 700,
            lr: 1e-4,
            lr_milestones: Vec::new(),
            seed: 0,
            anomaly_source: AnomalySourceKind::SolidColor,
            mask_generator: MaskGeneratorKind::Perlin,
            augment_enabled: true,
            beta_randomized: true,
        }
    }
}

/// Nearest odd to `21 * (size / 256)`, floored at 3.
pub fn default_smoothing_size(image_size: usize) -> usize {
    let v = 21.0 * image_size as f64 / 256.0;
    let odd = 2 * ((v - 1.0) / 2.0).round() as i64 + 1;
    odd.max(3) as usize
}

impl RunConfig {
    /// Parse a TOML config file and apply `key=value` overrides on top.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text, overrides)
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for ov in overrides {
            let (key, value) = ov
                .split_once('=')
                .ok_or_else(|| ConfigError::BadOverride(ov.clone()))?;
            let parsed: toml::Value = toml::from_str(&format!("v = {value}"))
                .map(|mut t: toml::Table| t.remove("v").expect("inserted above"))
                .or_else(|_| {
                    // Bare words (paths, enum tags) read as strings.
                    toml::from_str::<toml::Table>(&format!("v = \"{value}\""))
                        .map(|mut t| t.remove("v").expect("inserted above"))
                })
                .map_err(|e| ConfigError::Parse(format!("override '{ov}': {e}")))?;
            table.insert(key.trim().to_string(), parsed);
        }
        let mut cfg: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.finalize()?;
        Ok(cfg)
    }

    /// Resolve derived defaults and check invariants.
    pub fn finalize(&mut self) -> Result<(), ConfigError> {
        if self.smoothing_size == 0 {
            self.smoothing_size = default_smoothing_size(self.image_size);
        }
        if self.lr_milestones.is_empty() {
            self.lr_milestones = vec![self.epochs * 4 / 7, self.epochs * 6 / 7];
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Invalid(msg));
        if self.image_size < 8 {
            return fail(format!("image_size {} < 8", self.image_size));
        }
        if self.lambda_ssim < 0.0 {
            return fail(format!("lambda_ssim {} < 0", self.lambda_ssim));
        }
        if self.focal_gamma < 0.0 {
            return fail(format!("focal_gamma {} < 0", self.focal_gamma));
        }
        let [lo, hi] = self.beta_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return fail(format!("beta_range [{lo}, {hi}] not an interval in [0,1]"));
        }
        if !(0.0..=1.0).contains(&self.p_anomaly) {
            return fail(format!("p_anomaly {} outside [0,1]", self.p_anomaly));
        }
        if self.smoothing_size < 3 || self.smoothing_size % 2 == 0 {
            return fail(format!(
                "smoothing_size {} must be odd and >= 3",
                self.smoothing_size
            ));
        }
        if self.epochs == 0 {
            return fail("epochs must be >= 1".into());
        }
        if self.lr <= 0.0 {
            return fail(format!("lr {} must be > 0", self.lr));
        }
        for w in self.lr_milestones.windows(2) {
            if w[0] >= w[1] {
                return fail(format!("lr_milestones not strictly increasing: {w:?}"));
            }
        }
        if let Some(&last) = self.lr_milestones.last() {
            if last >= self.epochs {
                return fail(format!(
                    "lr milestone {last} must be < epochs {}",
                    self.epochs
                ));
            }
        }
        Ok(())
    }

    /// Midpoint of the opacity interval, used when randomization is off.
    pub fn beta_midpoint(&self) -> f64 {
        (self.beta_range[0] + self.beta_range[1]) / 2.0
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_finalize_cleanly() {
        let mut cfg = RunConfig::default();
        cfg.finalize().unwrap();
        assert_eq!(cfg.smoothing_size, 5, "64px default smoothing");
        assert_eq!(cfg.lr_milestones, vec![400, 600]);
    }

    #[test]
    fn smoothing_default_scales_with_resolution() {
        assert_eq!(default_smoothing_size(256), 21);
        assert_eq!(default_smoothing_size(64), 5);
        assert_eq!(default_smoothing_size(16), 3);
    }

    #[test]
    fn parses_full_file() {
        let text = r#"
image_size = 32
lambda_ssim = 0.5
focal_gamma = 1.0
beta_range = [0.2, 0.9]
p_anomaly = 0.4
smoothing_size = 7
epochs = 14
lr = 2e-4
lr_milestones = [8, 12]
seed = 99
anomaly_source = { texture_dir = "/tmp/tex" }
mask_generator = "rectangles"
augment_enabled = false
beta_randomized = false
"#;
        let cfg = RunConfig::from_toml(text, &[]).unwrap();
        assert_eq!(cfg.image_size, 32);
        assert_eq!(
            cfg.anomaly_source,
            AnomalySourceKind::TextureDir(PathBuf::from("/tmp/tex"))
        );
        assert_eq!(cfg.mask_generator, MaskGeneratorKind::Rectangles);
        assert_eq!(cfg.beta_midpoint(), 0.55);
    }

    #[test]
    fn unknown_keys_rejected() {
        let r = RunConfig::from_toml("image_size = 64\nbogus_key = 1\n", &[]);
        assert!(matches!(r, Err(ConfigError::Parse(_))), "{r:?}");
    }

    #[test]
    fn overrides_take_precedence() {
        let cfg = RunConfig::from_toml(
            "p_anomaly = 0.5\nseed = 1\n",
            &["p_anomaly=0.25".into(), "mask_generator=rectangles".into()],
        )
        .unwrap();
        assert_eq!(cfg.p_anomaly, 0.25);
        assert_eq!(cfg.mask_generator, MaskGeneratorKind::Rectangles);
    }

    #[test]
    fn invariants_enforced() {
        assert!(RunConfig::from_toml("beta_range = [0.9, 0.1]", &[]).is_err());
        assert!(RunConfig::from_toml("smoothing_size = 4", &[]).is_err());
        assert!(RunConfig::from_toml("epochs = 10\nlr_milestones = [4, 12]", &[]).is_err());
        assert!(RunConfig::from_toml("epochs = 10\nlr_milestones = [6, 6]", &[]).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.finalize().unwrap();
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text, &[]).unwrap();
        assert_eq!(cfg, back);
    }
}
