use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use schmlab::channels::QuantumChannel;
use schmlab::constructions::{self, DEFAULT_DECAY};
use schmlab::io::StateRecord;
use schmlab::{DensityMatrix, Ensemble, PureState, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Recipe {
    Rotation,
    Snk,
    Isotropic,
    Maxent,
}

/// Builder parameters; each recipe reads the ones it needs.
#[derive(Debug, Clone, Args)]
pub struct RecipeArgs {
    /// Fourier mode cutoff (dimension 2m+1).
    #[arg(long)]
    pub m: Option<usize>,
    /// Decay of the coefficient profile a^|q|.
    #[arg(long, default_value_t = DEFAULT_DECAY)]
    pub a: f64,
    /// Number of terms of the snk state.
    #[arg(long)]
    pub k: Option<usize>,
    /// Arc divisor of the snk grid (the arc is 2π/n).
    #[arg(long)]
    pub n: Option<usize>,
    /// Grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Local dimension (isotropic, maxent).
    #[arg(long)]
    pub d: Option<usize>,
    /// Fidelity with the maximally entangled state (isotropic).
    #[arg(long = "F", visible_alias = "fidelity")]
    pub fidelity: Option<f64>,
}

pub struct Built {
    pub state: DensityMatrix,
    pub pure: Option<PureState>,
    pub ensemble: Option<Ensemble>,
    pub parameters: serde_json::Value,
}

impl Built {
    pub fn record(&self, recipe: Recipe, seed: u64) -> StateRecord {
        let record = match &self.pure {
            Some(p) => StateRecord::from_pure(p),
            None => StateRecord::from_mixed(&self.state),
        };
        let record = record.with_provenance(json!({
            "tool": crate::report::TOOL,
            "version": crate::report::VERSION,
            "recipe": recipe,
            "parameters": self.parameters,
            "seed": seed,
        }));
        match &self.ensemble {
            Some(e) => record.with_ensemble(e),
            None => record,
        }
    }
}

pub fn build(recipe: Recipe, args: &RecipeArgs) -> Result<Built> {
    match recipe {
        Recipe::Rotation => {
            let m = args.m.unwrap_or(3);
            let grid = args.grid.unwrap_or(16);
            let c = constructions::default_rotation_state(m, args.a, grid)?;
            Ok(Built {
                state: c.state,
                pure: None,
                ensemble: Some(c.ensemble),
                parameters: json!({ "m": m, "a": args.a, "grid": grid }),
            })
        }
        Recipe::Snk => {
            let (k, m, n, grid) = (args.k.unwrap_or(2), args.m.unwrap_or(2), args.n.unwrap_or(16), args.grid.unwrap_or(8));
            let c = constructions::default_sn_k_state(k, m, n, grid)?;
            Ok(Built {
                state: c.state,
                pure: None,
                ensemble: Some(c.ensemble),
                parameters: json!({ "k": k, "m": m, "n": n, "grid": grid, "a": DEFAULT_DECAY }),
            })
        }
        Recipe::Isotropic => {
            let d = args.d.unwrap_or(3);
            let f = args.fidelity.unwrap_or(1.0);
            Ok(Built {
                state: constructions::isotropic_state(d, f)?,
                pure: None,
                ensemble: None,
                parameters: json!({ "d": d, "F": f }),
            })
        }
        Recipe::Maxent => {
            let d = args.d.unwrap_or(3);
            let psi = PureState::maximally_entangled(d)?;
            Ok(Built {
                state: psi.density(),
                ensemble: Some(Ensemble::singleton(psi.clone())),
                pure: Some(psi),
                parameters: json!({ "d": d }),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Identity,
    Depolarizing,
    Weyl,
}

pub fn build_channel(kind: ChannelKind, d: usize) -> Result<QuantumChannel> {
    match kind {
        ChannelKind::Identity => QuantumChannel::identity(d),
        ChannelKind::Depolarizing => QuantumChannel::depolarizing(d),
        ChannelKind::Weyl => QuantumChannel::weyl_depolarizing(d),
    }
}
