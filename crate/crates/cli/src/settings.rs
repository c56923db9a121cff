//! Configuration resolution: flags over the TOML file over defaults.

use std::path::Path;

use bivarfun::config::Config;
use bivarfun::matfun::QuadratureSpec;
use clap::Args;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadratureFile {
    nodes_per_contour: Option<usize>,
    adaptive: Option<bool>,
    rel_tol: Option<f64>,
    max_nodes: Option<usize>,
}

impl QuadratureFile {
    fn apply(&self, q: &mut QuadratureSpec) {
        if let Some(v) = self.nodes_per_contour {
            q.nodes_per_contour = v;
        }
        if let Some(v) = self.adaptive {
            q.adaptive = v;
        }
        if let Some(v) = self.rel_tol {
            q.rel_tol = v;
        }
        if let Some(v) = self.max_nodes {
            q.max_nodes = v;
        }
    }
}

/// Every key is optional; absent keys keep their defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    tol_eig: Option<f64>,
    tol_solve: Option<f64>,
    tol_norm: Option<f64>,
    tol_cert: Option<f64>,
    max_kron_dim: Option<usize>,
    n_angles: Option<usize>,
    cert_angles: Option<usize>,
    margin: Option<f64>,
    eps_dd: Option<f64>,
    quadrature: Option<QuadratureFile>,
    quadrature_multi: Option<QuadratureFile>,
}

/// Flags overriding the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigFlags {
    /// TOML configuration file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<std::path::PathBuf>,
    /// Initial quadrature nodes per contour (power of two, at least 16)
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Node cap for adaptive quadrature
    #[arg(long, global = true)]
    pub max_nodes: Option<usize>,
    /// Relative tolerance between successive quadrature levels
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Disable adaptive node doubling
    #[arg(long, global = true)]
    pub fixed_nodes: bool,
    /// Contour margin around the numerical range
    #[arg(long, global = true)]
    pub margin: Option<f64>,
    /// Angles for numerical range sweeps
    #[arg(long, global = true)]
    pub angles: Option<usize>,
    /// Angles for certification sweeps
    #[arg(long, global = true)]
    pub cert_angles: Option<usize>,
    /// Slack on certification ratios
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol_cert: Option<f64>,
    /// Largest explicit Kronecker operator dimension
    #[arg(long, global = true)]
    pub max_kron_dim: Option<usize>,
    /// Divided-difference switch threshold
    #[arg(long, global = true)]
    pub eps_dd: Option<f64>,
}

fn apply_file(cfg: &mut Config, file: &ConfigFile) {
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = file.$field { cfg.$field = v; })*
        };
    }
    set!(tol_eig, tol_solve, tol_norm, tol_cert, max_kron_dim, n_angles, cert_angles, eps_dd);
    if file.margin.is_some() {
        cfg.margin = file.margin;
    }
    if let Some(q) = &file.quadrature {
        q.apply(&mut cfg.quadrature);
    }
    if let Some(q) = &file.quadrature_multi {
        q.apply(&mut cfg.quadrature_multi);
    }
}

fn read_file(path: &Path) -> CliResult<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

impl ConfigFlags {
    pub fn resolve(&self) -> CliResult<Config> {
        let mut cfg = Config::default();
        if let Some(path) = &self.config {
            apply_file(&mut cfg, &read_file(path)?);
        }
        let q = &mut cfg.quadrature;
        if let Some(v) = self.nodes {
            q.nodes_per_contour = v;
            q.max_nodes = q.max_nodes.max(v);
        }
        if let Some(v) = self.max_nodes {
            q.max_nodes = v;
        }
        if let Some(v) = self.rel_tol {
            q.rel_tol = v;
        }
        if self.fixed_nodes {
            q.adaptive = false;
        }
        if self.margin.is_some() {
            cfg.margin = self.margin;
        }
        if let Some(v) = self.angles {
            cfg.n_angles = v;
        }
        if let Some(v) = self.cert_angles {
            cfg.cert_angles = v;
        }
        if let Some(v) = self.tol_cert {
            cfg.tol_cert = v;
        }
        if let Some(v) = self.max_kron_dim {
            cfg.max_kron_dim = v;
        }
        if let Some(v) = self.eps_dd {
            cfg.eps_dd = v;
        }
        for q in [&cfg.quadrature, &cfg.quadrature_multi] {
            q.validate().map_err(|e| CliError::Parse(e.to_string()))?;
        }
        Ok(cfg)
    }
}
