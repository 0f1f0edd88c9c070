//! JSON run configs. Every field is optional; command-line flags win.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use wnl_core::verify::Suite;

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub command: Option<String>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub grid: Option<[usize; 2]>,
    #[serde(rename = "box")]
    pub bounds: Option<[f64; 4]>,
    pub certify: Option<bool>,
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatSweepConfig {
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub re_beta: Option<Vec<f64>>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSweepConfig {
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub m: Option<usize>,
    pub d: Option<Vec<f64>>,
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleRadialConfig {
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub m: Option<usize>,
    pub d: Option<f64>,
    pub delta: Option<f64>,
    pub samples: Option<usize>,
    /// radii spread over [0, r_max] instead of the validity window
    pub r_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub suites: Option<Vec<Suite>>,
}

pub trait Named {
    fn command(&self) -> Option<&str>;
    fn rebase(&mut self, dir: &Path);
}

fn rebase(p: &mut Option<PathBuf>, dir: &Path) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = dir.join(&*path);
        }
    }
}

macro_rules! named {
    ($t:ty $(, $field:ident)*) => {
        impl Named for $t {
            fn command(&self) -> Option<&str> {
                self.command.as_deref()
            }
            fn rebase(&mut self, dir: &Path) {
                $(rebase(&mut self.$field, dir);)*
            }
        }
    };
}

named!(GridConfig, input, out);
named!(CatSweepConfig, out);
named!(CircleSweepConfig, out);
named!(CircleRadialConfig, out);
named!(VerifyConfig, out);

/// Loads `path` (if any) and resolves relative paths against its directory.
pub fn load<T: DeserializeOwned + Default + Named>(path: Option<&Path>, command: &str) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let mut cfg: T =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("config {}: {e}", path.display())))?;
    if let Some(c) = cfg.command() {
        if c != command {
            return Err(Failure::Input(format!(
                "config {} is for `{c}`, not `{command}`",
                path.display()
            )));
        }
    }
    cfg.rebase(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}
