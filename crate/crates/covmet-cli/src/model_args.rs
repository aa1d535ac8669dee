//! Shared `--model` flags.

use clap::{Args, ValueEnum};
use covmet::models::{Model, SlParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    /// Shabani–Lidar post-Markovian model
    Sl,
    /// Time-independent rates
    Semigroup,
    /// Gaussian dephasing, η⊥ = e^{−(at)²}
    Zeno,
    /// Gaussian unital decay, η⊥ = η∥ = e^{−(at)²}
    ZenoUnital,
    Noiseless,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Memory rate γ (sl)
    #[arg(long, default_value_t = 0.2)]
    pub gamma: f64,
    /// Dissipation constant γ₀ (sl)
    #[arg(long, default_value_t = 0.1)]
    pub gamma0: f64,
    /// Mean bath excitation number (sl)
    #[arg(long, default_value_t = 10.0)]
    pub n_bath: f64,
    /// Absorption rate γ₊ (semigroup)
    #[arg(long, default_value_t = 0.0)]
    pub g_plus: f64,
    /// Emission rate γ₋ (semigroup)
    #[arg(long, default_value_t = 0.0)]
    pub g_minus: f64,
    /// Dephasing rate γ_z (semigroup)
    #[arg(long, default_value_t = 0.5)]
    pub g_z: f64,
    /// Zeno time scale a
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
}

impl ModelArgs {
    pub fn model(&self) -> Option<Result<Model, covmet::Error>> {
        self.model.map(|name| {
            Ok(match name {
                ModelName::Sl => Model::ShabaniLidar(SlParams::new(self.gamma, self.gamma0, self.n_bath)?),
                ModelName::Semigroup => Model::Semigroup {
                    g_plus: self.g_plus,
                    g_minus: self.g_minus,
                    g_z: self.g_z,
                },
                ModelName::Zeno => Model::ZenoDephasing { a: self.a },
                ModelName::ZenoUnital => Model::ZenoUnital { a: self.a },
                ModelName::Noiseless => Model::Noiseless,
            })
        })
    }
}
