use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use schmlab::constructions::{self, DEFAULT_DECAY};
use schmlab::schmidt::{certify, CertifyOptions, SchmidtCertificate};
use schmlab::seed;
use schmlab::DensityMatrix;
use schmlab::Ensemble;

use super::{CliResult, Context, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepRecipe {
    /// Rotation state over the grid size N; scalar: erosion level.
    Rotation,
    /// Isotropic state over the fidelity F; scalar: Λ-map eigenvalue.
    Isotropic,
    /// k-term state over the arc divisor n; scalar: Λ-map eigenvalue.
    Snk,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    recipe: SweepRecipe,
    /// Parameter values, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 0.., conflicts_with_all = ["from", "to", "step"])]
    values: Option<Vec<f64>>,
    /// Range start (with --to and --step).
    #[arg(long, requires_all = ["to", "step"])]
    from: Option<f64>,
    /// Range end, included when reached.
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_DECAY)]
    a: f64,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Grid points of the snk state.
    #[arg(long, default_value_t = 8)]
    grid: usize,
    /// Restarts of the product-state search behind the erosion level.
    #[arg(long, default_value_t = 200)]
    restarts: usize,
}

#[derive(Serialize)]
struct Scalar {
    name: &'static str,
    value: Option<f64>,
}

#[derive(Serialize)]
struct Row {
    parameter: f64,
    lower: usize,
    upper: usize,
    upper_method: schmlab::schmidt::UpperMethod,
    scalar: Scalar,
}

#[derive(Serialize)]
struct SweepBody {
    table: Vec<Row>,
    /// Isotropic: bisected fidelities where the lower bound steps up.
    /// Snk: first divisor at which the lower bound reaches k.
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<serde_json::Value>,
}

fn values(args: &SweepArgs) -> CliResult<Vec<f64>> {
    let v = match (&args.values, args.from, args.to, args.step) {
        (Some(v), ..) => v.clone(),
        (None, Some(from), Some(to), Some(step)) => {
            if !(step > 0.0) || !from.is_finite() || !to.is_finite() {
                return Err(Failure::Usage(format!("range needs finite ends and a positive step, got step {step}")));
            }
            let count = ((to - from) / step + 1e-9).floor();
            if count < 0.0 {
                Vec::new()
            } else {
                (0..=count as usize).map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12).collect()
            }
        }
        _ => return Err(Failure::Usage("give --values or --from/--to/--step".into())),
    };
    let up = v.windows(2).all(|w| w[0] <= w[1]);
    let down = v.windows(2).all(|w| w[0] >= w[1]);
    if !(up || down) {
        return Err(Failure::Usage("sweep values must be monotone".into()));
    }
    Ok(v)
}

fn as_count(x: f64, what: &str) -> CliResult<usize> {
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(Failure::Usage(format!("{what} must be a positive integer, got {x}")))
    }
}

fn certify_with(ctx: &Context, state: &DensityMatrix, hint: Option<Ensemble>) -> CliResult<SchmidtCertificate> {
    let mut opts = CertifyOptions::new(ctx.search);
    if let Some(h) = hint {
        opts = opts.with_hint(h);
    }
    Ok(certify(state, &opts)?)
}

fn row(parameter: f64, c: &SchmidtCertificate, scalar: Scalar) -> Row {
    Row { parameter, lower: c.lower, upper: c.upper, upper_method: c.upper_method, scalar }
}

pub fn run(ctx: &Context, args: &SweepArgs) -> CliResult<()> {
    let vals = values(args)?;
    let mut table = Vec::with_capacity(vals.len());
    let mut summary = None;
    let input = match args.recipe {
        SweepRecipe::Rotation => {
            let stream = seed::derive(ctx.search.seed, "sweep-erosion");
            for &x in &vals {
                let n = as_count(x, "grid size")?;
                let c = constructions::default_rotation_state(args.m, args.a, n)?;
                let level = constructions::erosion_level(&c.state, args.restarts, stream, ctx.search.exec)?;
                let cert = certify_with(ctx, &c.state, Some(c.ensemble))?;
                table.push(row(x, &cert, Scalar { name: "max_subtraction", value: Some(level) }));
            }
            json!({ "recipe": "rotation", "m": args.m, "a": args.a, "restarts": args.restarts, "values": vals })
        }
        SweepRecipe::Isotropic => {
            for &f in &vals {
                let state = constructions::isotropic_state(args.d, f)?;
                let cert = certify_with(ctx, &state, None)?;
                let value = cert.lower_evidence.as_ref().map(|e| e.eigenvalue);
                table.push(row(f, &cert, Scalar { name: "lambda_eigenvalue", value }));
            }
            let transitions = (1..args.d)
                .map(|k| constructions::isotropic_transition(args.d, k, 1e-3, ctx.tol()))
                .collect::<schmlab::Result<Vec<_>>>()?;
            summary = Some(json!({ "transitions": transitions }));
            json!({ "recipe": "isotropic", "d": args.d, "values": vals })
        }
        SweepRecipe::Snk => {
            let mut onset = None;
            for &x in &vals {
                let n = as_count(x, "arc divisor")?;
                let c = constructions::default_sn_k_state(args.k, args.m, n, args.grid)?;
                let cert = certify_with(ctx, &c.state, Some(c.ensemble))?;
                if onset.is_none() && cert.lower >= args.k {
                    onset = Some(n);
                }
                let value = cert.lower_evidence.as_ref().map(|e| e.eigenvalue);
                table.push(row(x, &cert, Scalar { name: "lambda_eigenvalue", value }));
            }
            summary = Some(json!({ "onset": onset }));
            json!({ "recipe": "snk", "k": args.k, "m": args.m, "grid": args.grid, "values": vals })
        }
    };
    println!("{:>12} {:>6} {:>6}  scalar", "parameter", "lower", "upper");
    for r in &table {
        let s = r.scalar.value.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        println!("{:>12} {:>6} {:>6}  {} = {s}", r.parameter, r.lower, r.upper, r.scalar.name);
    }
    if let Some(s) = &summary {
        println!("{s}");
    }
    ctx.emit(&ctx.report("sweep", input, SweepBody { table, summary }))
}
