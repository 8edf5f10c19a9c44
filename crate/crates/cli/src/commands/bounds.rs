use anyhow::{anyhow, bail, Result};
use clap::Args;

use sagnac_qfim::generators::ConditionPreset;
use sagnac_qfim::scenarios::{
    cond1_coherent, cond1_fock, cond2_bzero, cond2_dzero, fock_pair_for_budget, CoherentInput, Family, GapMode,
    ScenarioResult,
};

use crate::config::Resolver;
use crate::output::{Cell, Report, Table};

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// cond1-fock | cond1-coherent | cond2-bzero | cond2-dzero
    #[arg(long)]
    pub family: Option<String>,
    /// Composite mass/radius scale; sets the unit mu^-2 of frequency
    #[arg(long)]
    pub mu: Option<f64>,
    /// True trap frequency
    #[arg(long)]
    pub omega0: Option<f64>,
    /// True rotation frequency
    #[arg(long = "Omega0")]
    pub rotation0: Option<f64>,
    #[arg(long)]
    pub kappa: Option<u32>,
    /// Particle number
    #[arg(long = "N")]
    pub particles: Option<u32>,
    /// Repetitions of the measurement
    #[arg(long)]
    pub repetitions: Option<u32>,
    /// Fock: n1 + n2; coherent and D = 0: |alpha1|² + |alpha2|²
    #[arg(long)]
    pub budget: Option<f64>,
    /// Fock level of the spin-up branch
    #[arg(long)]
    pub n1: Option<u64>,
    /// Fock level of the spin-down branch
    #[arg(long)]
    pub n2: Option<u64>,
    /// Fock gap enforcement: strict | nearest
    #[arg(long)]
    pub gap_mode: Option<String>,
    /// Signed coherent amplitude r1 (alpha1 = -i r1)
    #[arg(long, allow_hyphen_values = true)]
    pub r1: Option<f64>,
    /// Re alpha1 for the condition II B = 0 family
    #[arg(long, allow_hyphen_values = true)]
    pub x1: Option<f64>,
    /// Im alpha1 for the condition II B = 0 family
    #[arg(long, allow_hyphen_values = true)]
    pub y1: Option<f64>,
}

fn evaluate(args: &BoundsArgs, res: &mut Resolver) -> Result<ScenarioResult> {
    let family_name: String = res.required("family", args.family.clone())?;
    let family = Family::parse(&family_name).ok_or_else(|| anyhow!("unknown family `{family_name}`"))?;
    let mu = res.or_default("mu", args.mu, 1.0)?;
    let omega0 = res.required("omega0", args.omega0)?;
    let rotation0 = res.required("Omega0", args.rotation0)?;
    let kappa = res.or_default("kappa", args.kappa, 1)?;
    let particles = res.or_default("N", args.particles, 1)?;
    let preset = ConditionPreset::new(family.condition(), kappa, omega0, rotation0, mu)?;
    let result = match family {
        Family::CondIFock => {
            let mode = match res.or_default("gap_mode", args.gap_mode.clone(), "strict".to_string())?.as_str() {
                "strict" => GapMode::Strict,
                "nearest" => GapMode::NearestInteger,
                other => bail!("unknown gap mode `{other}` (expected strict or nearest)"),
            };
            let (n1, n2) = match res.optional("budget", args.budget)? {
                Some(budget) => {
                    if budget < 0.0 || budget.fract() != 0.0 {
                        bail!("a Fock budget must be a non-negative integer, got {budget}");
                    }
                    fock_pair_for_budget(&preset, budget as u64)?
                }
                None => (res.required("n1", args.n1)?, res.required("n2", args.n2)?),
            };
            cond1_fock(&preset, n1, n2, particles, mode)?
        }
        Family::CondICoherent => {
            let input = match res.optional("r1", args.r1)? {
                Some(r1) => CoherentInput::Amplitude(r1),
                None => CoherentInput::Budget(res.required("budget", args.budget)?),
            };
            cond1_coherent(&preset, input, particles)?
        }
        Family::CondIIBzero => {
            let x1 = res.required("x1", args.x1)?;
            let y1 = res.required("y1", args.y1)?;
            cond2_bzero(&preset, x1, y1, particles)?
        }
        Family::CondIIDzero => cond2_dzero(&preset, res.required("budget", args.budget)?, particles)?,
    };
    Ok(result)
}

pub fn run(args: &BoundsArgs, res: &mut Resolver) -> Result<Report> {
    let r = evaluate(args, res)?;
    let nu = res.or_default("repetitions", args.repetitions, 1)?;
    if nu == 0 {
        bail!("repetitions must be >= 1");
    }
    let (closed, pipeline, leading) =
        (r.closed_form.over_repetitions(nu), r.pipeline.over_repetitions(nu), r.leading_order.over_repetitions(nu));
    let tag = |s: Option<sagnac_qfim::qfim::Scaling>| Cell::from(s.map_or("none", |s| s.as_str()));
    let p = &r.prefactors;
    let mut rows: Vec<(String, Cell)> = vec![
        ("family".into(), r.family.as_str().into()),
        ("branch".into(), r.branch.as_deref().unwrap_or("none").into()),
        ("var_omega_rel".into(), closed.var_omega_rel.into()),
        ("var_Omega_rel".into(), closed.var_rotation_rel.into()),
        ("pipeline_var_omega_rel".into(), pipeline.var_omega_rel.into()),
        ("pipeline_var_Omega_rel".into(), pipeline.var_rotation_rel.into()),
        ("leading_var_omega_rel".into(), leading.var_omega_rel.into()),
        ("leading_var_Omega_rel".into(), leading.var_rotation_rel.into()),
        ("saturable".into(), Cell::Flag(pipeline.saturable)),
        ("scaling_omega".into(), tag(pipeline.scaling_omega)),
        ("scaling_Omega".into(), tag(pipeline.scaling_rotation)),
        ("A".into(), p.a.into()),
        ("B".into(), p.b.into()),
        ("C".into(), p.c.into()),
        ("D".into(), p.d.into()),
        ("E".into(), p.e.into()),
        ("F".into(), p.f.into()),
        ("G".into(), p.g.into()),
        ("H".into(), p.h.into()),
        ("b_residual".into(), r.b_residual.into()),
        ("d_residual".into(), r.d_residual.into()),
        ("commutator".into(), r.commutator.into()),
    ];
    // Scenario intermediates; prefixed so that e.g. their `A` cannot be confused with the prefactor row.
    rows.extend(r.details.iter().map(|(k, v)| (format!("detail_{k}"), Cell::Num(*v))));
    Ok(Report {
        command: "bounds",
        config: std::mem::take(&mut res.resolved),
        table: Table { columns: vec!["quantity", "value"], rows: rows.into_iter().map(|(k, v)| vec![Cell::Text(k), v]).collect() },
    })
}
