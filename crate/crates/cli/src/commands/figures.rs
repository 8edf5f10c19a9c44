use anyhow::{bail, Result};
use clap::Args;

use sagnac_qfim::scenarios::{fig2_grid, fig3_curves, Fig3Config, Fig3Sweep};

use crate::config::Resolver;
use crate::output::{Cell, Report, Table};

#[derive(Debug, Args)]
pub struct Fig2Args {
    #[arg(long)]
    pub mu: Option<f64>,
    /// True rotation frequency of the panel (required)
    #[arg(long = "Omega0")]
    pub rotation0: Option<f64>,
    /// Total energy level n1 + n2 = |alpha1|² + |alpha2|²
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub omega_min: Option<f64>,
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long)]
    pub omega_points: Option<usize>,
    #[arg(long)]
    pub kappa_min: Option<u32>,
    #[arg(long)]
    pub kappa_max: Option<u32>,
}

/// `points` values from `min` to `max` inclusive.
fn linspace(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || !(min.is_finite() && max.is_finite()) || (points > 1 && max <= min) {
        bail!("invalid range [{min}, {max}] with {points} points");
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    Ok((0..points).map(|i| min + (max - min) * i as f64 / (points - 1) as f64).collect())
}

pub fn run_fig2(args: &Fig2Args, res: &mut Resolver) -> Result<Report> {
    let mu = res.or_default("mu", args.mu, 1.0)?;
    let rotation0 = res.required("Omega0", args.rotation0)?;
    let budget = res.or_default("budget", args.budget, 100)?;
    let omegas = linspace(
        res.or_default("omega_min", args.omega_min, 0.25)?,
        res.or_default("omega_max", args.omega_max, 60.0)?,
        res.or_default("omega_points", args.omega_points, 120)?,
    )?;
    let (k_min, k_max) = (res.or_default("kappa_min", args.kappa_min, 1)?, res.or_default("kappa_max", args.kappa_max, 20)?);
    if k_min == 0 || k_max < k_min {
        bail!("invalid kappa range {k_min}..={k_max}");
    }
    let kappas: Vec<u32> = (k_min..=k_max).collect();
    let cells = fig2_grid(mu, rotation0, budget, &omegas, &kappas)?;
    let rows = cells
        .iter()
        .map(|c| vec![Cell::Num(c.omega0), Cell::Int(c.kappa as i64), Cell::Num(c.log10_ratio), Cell::Flag(c.valid)])
        .collect();
    Ok(Report {
        command: "fig2",
        config: std::mem::take(&mut res.resolved),
        table: Table { columns: vec!["omega0", "kappa", "log10_ratio", "valid_flag"], rows },
    })
}

#[derive(Debug, Args)]
pub struct Fig3Args {
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub kappa: Option<u32>,
    /// Im alpha1 of the condition II input
    #[arg(long, allow_hyphen_values = true)]
    pub y1: Option<f64>,
    /// Comma-separated Re alpha1 values, one curve each
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x1: Option<Vec<f64>>,
    /// Swept true value: Omega0 | omega0
    #[arg(long)]
    pub sweep: Option<String>,
    /// Fixed trap frequency when sweeping Omega0
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Fixed rotation frequency when sweeping omega0
    #[arg(long = "Omega0")]
    pub rotation0: Option<f64>,
    #[arg(long)]
    pub sweep_min: Option<f64>,
    #[arg(long)]
    pub sweep_max: Option<f64>,
    #[arg(long)]
    pub sweep_points: Option<usize>,
    #[arg(long = "N")]
    pub particles: Option<u32>,
}

pub fn run_fig3(args: &Fig3Args, res: &mut Resolver) -> Result<Report> {
    let mu = res.or_default("mu", args.mu, 1.0)?;
    let kappa = res.or_default("kappa", args.kappa, 10)?;
    let y1 = res.or_default("y1", args.y1, 10.0)?;
    let x1s = res.list("x1", args.x1.clone(), vec![-1.0, -3.0, -5.0])?;
    let sweep_name = res.or_default("sweep", args.sweep.clone(), "Omega0".to_string())?;
    let values = linspace(
        res.or_default("sweep_min", args.sweep_min, 0.05)?,
        res.or_default("sweep_max", args.sweep_max, 3.0)?,
        res.or_default("sweep_points", args.sweep_points, 60)?,
    )?;
    let sweep = match sweep_name.as_str() {
        "Omega0" => Fig3Sweep::Rotation { omega0: res.or_default("omega0", args.omega0, 1.0)?, values },
        "omega0" => Fig3Sweep::Trap { rotation0: res.or_default("Omega0", args.rotation0, 0.1)?, values },
        other => bail!("unknown sweep variable `{other}` (expected Omega0 or omega0)"),
    };
    let particles = res.or_default("N", args.particles, 1)?;
    let points = fig3_curves(&Fig3Config { mu, kappa, y1, x1s, sweep, particles })?;
    let rows = points
        .iter()
        .map(|p| vec![Cell::Num(p.sweep_value), Cell::Num(p.x1), Cell::Num(p.ratio_omega), Cell::Num(p.ratio_rotation)])
        .collect();
    Ok(Report {
        command: "fig3",
        config: std::mem::take(&mut res.resolved),
        table: Table { columns: vec!["sweep_value", "x1", "ratio_omega", "ratio_Omega"], rows },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let v = linspace(1.0, 2.0, 5).unwrap();
        assert_eq!(v.first(), Some(&1.0));
        assert_eq!(v.last(), Some(&2.0));
        assert!(linspace(2.0, 1.0, 3).is_err());
    }
}
