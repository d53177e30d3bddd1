//! Classifier and pipeline configuration, including the flat `key = value`
//! config-file format used by the command-line tools.

use crate::error::{Error, Result};
use crate::preprocess::{StretchParams, StretchVariant};

use serde::{Deserialize, Serialize};

/// Every tunable of the pipeline and the six classifiers.
///
/// Defaults target 256x256 trimmed tiles: corner zones, edge bands and the
/// blob/spot windows are non-degenerate and non-overlapping at that size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Corner-zone side length, pixels.
    pub c_range: usize,
    /// Edge-band width excluded from the pinhole scan, pixels.
    pub e_range: usize,
    /// Crack-length threshold, pixels.
    pub c_length: usize,
    /// Blob window side, odd pixels.
    pub blob_matx: usize,
    /// Spot window side, odd pixels; strictly smaller than `blob_matx`.
    pub spot_matx: usize,
    /// Binarization fraction of the maximum gradient magnitude.
    pub tau: f64,
    /// Median filter window, odd pixels.
    pub median_window: usize,
    /// Which contrast stretch the pipeline applies.
    pub stretch_variant: StretchVariant,
    pub stretch: StretchParams,
    /// Detection tolerance: defective iff n1 > n2 + detect_margin.
    pub detect_margin: usize,
    /// Dilation steps applied to the reference mask before printed-mode
    /// subtraction; 0 subtracts exact coordinates.
    pub ref_dilate: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            c_range: 10,
            e_range: 3,
            c_length: 60,
            blob_matx: 7,
            spot_matx: 3,
            tau: 0.25,
            median_window: 3,
            stretch_variant: StretchVariant::Sigmoid,
            stretch: StretchParams::default(),
            detect_margin: 0,
            ref_dilate: 0,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_range < 1 {
            return Err(Error::Config("c_range must be at least 1".to_string()));
        }
        if self.e_range < 1 {
            return Err(Error::Config("e_range must be at least 1".to_string()));
        }
        if self.c_length < 1 {
            return Err(Error::Config("c_length must be at least 1".to_string()));
        }
        for (name, v) in [("blob_matx", self.blob_matx), ("spot_matx", self.spot_matx)] {
            if v < 3 || v % 2 == 0 {
                return Err(Error::Config(format!(
                    "{name} must be odd and >= 3, got {v}"
                )));
            }
        }
        if self.spot_matx >= self.blob_matx {
            return Err(Error::Config(format!(
                "spot_matx ({}) must be smaller than blob_matx ({})",
                self.spot_matx, self.blob_matx
            )));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::Config(format!(
                "tau must lie in (0, 1], got {}",
                self.tau
            )));
        }
        if self.median_window < 3 || self.median_window % 2 == 0 {
            return Err(Error::Config(format!(
                "median_window must be odd and >= 3, got {}",
                self.median_window
            )));
        }
        self.stretch.validate().map_err(|e| match e {
            Error::Param(msg) => Error::Config(msg),
            other => other,
        })
    }

    /// Check the corner-zone constraint against a concrete matrix shape:
    /// zones of side `c_range` must not overlap.
    pub fn validate_for_shape(&self, rows: usize, cols: usize) -> Result<()> {
        self.validate()?;
        if 2 * self.c_range >= rows.min(cols) {
            return Err(Error::Config(format!(
                "corner zones of side {} overlap on a {rows}x{cols} matrix",
                self.c_range
            )));
        }
        Ok(())
    }

    /// Parse a flat `key = value` config file body. `#` starts a comment;
    /// blank lines are ignored; unknown keys are an error.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = ClassifierConfig::default();
        cfg.apply_kv_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply `key = value` lines on top of the current values.
    pub fn apply_kv_str(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            self.set_key(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Set a single field from its config-file key.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value `{value}` for {key}")))
        }
        match key {
            "c_range" => self.c_range = parse(key, value)?,
            "e_range" => self.e_range = parse(key, value)?,
            "c_length" => self.c_length = parse(key, value)?,
            "blob_matx" => self.blob_matx = parse(key, value)?,
            "spot_matx" => self.spot_matx = parse(key, value)?,
            "tau" => self.tau = parse(key, value)?,
            "median_window" => self.median_window = parse(key, value)?,
            "detect_margin" => self.detect_margin = parse(key, value)?,
            "ref_dilate" => self.ref_dilate = parse(key, value)?,
            "stretch_variant" => {
                self.stretch_variant = match value {
                    "linear" => StretchVariant::Linear,
                    "sigmoid" => StretchVariant::Sigmoid,
                    other => {
                        return Err(Error::Config(format!(
                            "stretch_variant must be `linear` or `sigmoid`, got `{other}`"
                        )))
                    }
                }
            }
            "stretch_m" => {
                self.stretch.midpoint = if value == "auto" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "stretch_e" => self.stretch.exponent = parse(key, value)?,
            "stretch_n_levels" => self.stretch.n_levels = parse(key, value)?,
            "stretch_initial_level" => self.stretch.initial_level = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// The configuration as config-file `key = value` pairs, in a stable
    /// order. Feeding these back through [`ClassifierConfig::from_kv_str`]
    /// reproduces the configuration.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        vec![
            ("c_range".into(), self.c_range.to_string()),
            ("e_range".into(), self.e_range.to_string()),
            ("c_length".into(), self.c_length.to_string()),
            ("blob_matx".into(), self.blob_matx.to_string()),
            ("spot_matx".into(), self.spot_matx.to_string()),
            ("tau".into(), format!("{:?}", self.tau)),
            ("median_window".into(), self.median_window.to_string()),
            (
                "stretch_variant".into(),
                match self.stretch_variant {
                    StretchVariant::Linear => "linear".into(),
                    StretchVariant::Sigmoid => "sigmoid".into(),
                },
            ),
            (
                "stretch_m".into(),
                match self.stretch.midpoint {
                    Some(m) => format!("{m:?}"),
                    None => "auto".into(),
                },
            ),
            ("stretch_e".into(), format!("{:?}", self.stretch.exponent)),
            ("stretch_n_levels".into(), self.stretch.n_levels.to_string()),
            (
                "stretch_initial_level".into(),
                self.stretch.initial_level.to_string(),
            ),
            ("detect_margin".into(), self.detect_margin.to_string()),
            ("ref_dilate".into(), self.ref_dilate.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ClassifierConfig::default().validate().unwrap();
        ClassifierConfig::default()
            .validate_for_shape(256, 256)
            .unwrap();
    }

    #[test]
    fn overlap_check_catches_small_matrices() {
        let cfg = ClassifierConfig::default();
        assert!(cfg.validate_for_shape(20, 64).is_err());
        assert!(cfg.validate_for_shape(21, 64).is_ok());
    }

    #[test]
    fn rejects_bad_field_values() {
        let mut cfg = ClassifierConfig::default();
        cfg.spot_matx = 7;
        assert!(cfg.validate().is_err());

        let mut cfg = ClassifierConfig::default();
        cfg.blob_matx = 8;
        assert!(cfg.validate().is_err());

        let mut cfg = ClassifierConfig::default();
        cfg.tau = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = ClassifierConfig::default();
        cfg.median_window = 4;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn kv_file_overrides_defaults() {
        let text = "# inspection profile\n\
                    tau = 0.4\n\
                    c_range = 8   # tighter corners\n\
                    stretch_variant = linear\n\
                    stretch_m = 0.5\n";
        let cfg = ClassifierConfig::from_kv_str(text).unwrap();
        assert_eq!(cfg.tau, 0.4);
        assert_eq!(cfg.c_range, 8);
        assert_eq!(cfg.stretch_variant, StretchVariant::Linear);
        assert_eq!(cfg.stretch.midpoint, Some(0.5));
        assert_eq!(cfg.c_length, ClassifierConfig::default().c_length);
    }

    #[test]
    fn kv_rejects_unknown_keys_and_bad_lines() {
        assert!(ClassifierConfig::from_kv_str("bogus_key = 3\n").is_err());
        assert!(ClassifierConfig::from_kv_str("tau 0.3\n").is_err());
        assert!(ClassifierConfig::from_kv_str("tau = huge\n").is_err());
    }

    #[test]
    fn kv_round_trip_preserves_config() {
        let mut cfg = ClassifierConfig::default();
        cfg.tau = 0.375;
        cfg.stretch.midpoint = Some(0.625);
        cfg.c_length = 44;
        let text = cfg
            .to_key_values()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect::<String>();
        assert_eq!(ClassifierConfig::from_kv_str(&text).unwrap(), cfg);
    }
}
