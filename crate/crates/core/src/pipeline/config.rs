use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forge::SplitMode;
use crate::lidc::DEFAULT_CLUSTER_THRESHOLD_MM;
use crate::roi::Window;

pub const ANNOTATION_ROOT_ENV: &str = "NODULE_VQA_ANNOTATION_ROOT";
pub const DICOM_ROOT_ENV: &str = "NODULE_VQA_DICOM_ROOT";

pub const DEFAULT_SEED: u64 = 42;

/// Run configuration, read from TOML. Relative paths resolve against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub annotation_root: PathBuf,
    pub dicom_root: PathBuf,
    /// Dataset directory written by `forge`.
    pub output_dir: PathBuf,
    /// Lexicon file; the bundled lexicon when absent.
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default = "default_threshold")]
    pub cluster_threshold_mm: f64,
    #[serde(default = "default_min_readers")]
    pub min_readers: usize,
    #[serde(default)]
    pub window: Window,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub split_mode: SplitMode,
}

fn default_threshold() -> f64 {
    DEFAULT_CLUSTER_THRESHOLD_MM
}

fn default_min_readers() -> usize {
    1
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Config {
    /// Parses `text`; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Config> {
        let mut config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base
                    .join(&*p)
                    .components()
                    .filter(|c| *c != std::path::Component::CurDir)
                    .collect();
            }
        };
        resolve(&mut config.annotation_root);
        resolve(&mut config.dicom_root);
        resolve(&mut config.output_dir);
        if let Some(p) = config.lexicon.as_mut() {
            resolve(p);
        }
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file, then applies the root overrides from the environment.
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut config = Config::parse(&text, base)?;
        if let Some(v) = std::env::var_os(ANNOTATION_ROOT_ENV) {
            config.annotation_root = v.into();
        }
        if let Some(v) = std::env::var_os(DICOM_ROOT_ENV) {
            config.dicom_root = v.into();
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cluster_threshold_mm.is_nan() || self.cluster_threshold_mm <= 0.0 {
            return Err(Error::Config("cluster_threshold_mm must be positive".into()));
        }
        if !(1..=4).contains(&self.min_readers) {
            return Err(Error::Config("min_readers must be between 1 and 4".into()));
        }
        if self.window.width.is_nan() || self.window.width <= 0.0 {
            return Err(Error::Config("window.width must be positive".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_relative_paths() {
        let c = Config::parse(
            "annotation_root = \"xml\"\ndicom_root = \"/abs/dcm\"\noutput_dir = \"out\"\n",
            Path::new("/cfg"),
        )
        .unwrap();
        assert_eq!(c.annotation_root, Path::new("/cfg/xml"));
        assert_eq!(c.dicom_root, Path::new("/abs/dcm"));
        assert_eq!(c.cluster_threshold_mm, 5.0);
        assert_eq!(c.min_readers, 1);
        assert_eq!(c.window, Window::default());
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.split_mode, SplitMode::ImageLevel);
    }

    #[test]
    fn full_config() {
        let text = r#"
            annotation_root = "a"
            dicom_root = "d"
            output_dir = "o"
            lexicon = "my.lexicon"
            cluster_threshold_mm = 3.5
            min_readers = 3
            seed = 7
            split_mode = "patient-level"
            [window]
            level = -500.0
            width = 1200.0
        "#;
        let c = Config::parse(text, Path::new("/b")).unwrap();
        assert_eq!(c.lexicon.as_deref(), Some(Path::new("/b/my.lexicon")));
        assert_eq!(c.split_mode, SplitMode::PatientLevel);
        assert_eq!(c.window.width, 1200.0);
        let again = Config::parse(&c.to_toml(), Path::new("/elsewhere")).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_values() {
        let base = "annotation_root = \"a\"\ndicom_root = \"d\"\noutput_dir = \"o\"\n";
        for extra in ["min_readers = 0", "cluster_threshold_mm = -1.0", "bogus = 1", "split_mode = \"sideways\""] {
            let err = Config::parse(&format!("{base}{extra}\n"), Path::new("/")).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{extra}: {err}");
        }
    }
}
