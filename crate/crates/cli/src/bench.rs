use std::io::Write;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use qutedb_core::calibration::{calibrate_on_simulator, measure_grover};
use qutedb_core::optimizer::{crossover_analysis, crossover_csv, OpKind};
use qutedb_core::{Config, NoiseModel};

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Cost-model sweep of classical vs quantum expected runtime over N.
    Crossover(CrossoverArgs),
    /// Measured vs analytic Grover success on the simulator.
    Grover(GroverArgs),
}

#[derive(Debug, Args)]
pub struct CrossoverArgs {
    /// Smallest N, as `2^k` or a power of two.
    #[arg(long, value_parser = parse_pow2)]
    n_min: Option<u32>,
    /// Largest N, as `2^k` or a power of two.
    #[arg(long, value_parser = parse_pow2)]
    n_max: Option<u32>,
    /// Operator kind, e.g. equality_filter or "Grover search".
    #[arg(long)]
    kind: Option<String>,
    /// Fit layer time, shot overhead and per-tuple cost on simulator runs first.
    #[arg(long)]
    calibrate: bool,
    /// Largest calibration size.
    #[arg(long, value_parser = parse_pow2, default_value = "2^10")]
    calibrate_max: u32,
}

#[derive(Debug, Args)]
pub struct GroverArgs {
    #[arg(long, value_parser = parse_pow2, default_value = "2^2")]
    n_min: u32,
    #[arg(long, value_parser = parse_pow2, default_value = "2^10")]
    n_max: u32,
    /// Fraction of marked rows; at least one row is marked.
    #[arg(long, default_value_t = 0.02)]
    selectivity: f64,
    /// Sample with the device's noise.
    #[arg(long)]
    noisy: bool,
}

/// Parses `2^k` or a power of two into `k`.
pub fn parse_pow2(s: &str) -> Result<u32, String> {
    let s = s.trim();
    if let Some(e) = s.strip_prefix("2^") {
        return e.parse::<u32>().map_err(|e| e.to_string()).and_then(|k| {
            if k <= 60 {
                Ok(k)
            } else {
                Err("exponent above 60".into())
            }
        });
    }
    let n: u64 = s
        .parse()
        .map_err(|_| format!("expected 2^k or a power of two, got {s}"))?;
    if n.is_power_of_two() {
        Ok(n.trailing_zeros())
    } else {
        Err(format!("{n} is not a power of two"))
    }
}

fn crossover(args: &CrossoverArgs, cfg: &Config, out: &mut dyn Write) -> Result<()> {
    let mut c = cfg.crossover.clone();
    if let Some(k) = &args.kind {
        c.kind = OpKind::parse(k)?;
    }
    if let Some(e) = args.n_min {
        c.log2_n_min = e;
    }
    if let Some(e) = args.n_max {
        c.log2_n_max = e;
    }
    if c.log2_n_min > c.log2_n_max {
        bail!("--n-min exceeds --n-max");
    }
    if args.calibrate {
        let device = cfg.resolve_device()?;
        let cal = calibrate_on_simulator(4, args.calibrate_max.max(5), &device, &c.depth, cfg.seed)
            .context("calibration")?;
        eprintln!(
            "calibrated: c_tuple={:.3}ns layer={:.3}ns overhead={:.1}ns max_rel_error classical={:.3} quantum={:.3}",
            cal.c_tuple_ns, cal.layer_ns, cal.shot_overhead_ns, cal.max_rel_error_classical, cal.max_rel_error_quantum
        );
        c.classical = cal.classical();
        c.quantum = cal.apply(&c.quantum);
    }
    let report = crossover_analysis(&c)?;
    out.write_all(crossover_csv(&report).as_bytes())?;
    match report.n_star {
        Some(n) => eprintln!("N* = 2^{}", n.log2().round()),
        None => eprintln!("no crossover in the sweep"),
    }
    Ok(())
}

fn grover(args: &GroverArgs, cfg: &Config, out: &mut dyn Write) -> Result<()> {
    if args.n_min > args.n_max || args.n_max > 16 {
        bail!("grover sweep needs n_min <= n_max <= 2^16");
    }
    if !(0.0..=1.0).contains(&args.selectivity) {
        bail!("selectivity must be in [0, 1]");
    }
    let device = cfg.resolve_device()?;
    writeln!(
        out,
        "N,M,k,shots,analytic_success,empirical_success,deviation,shot_ns,model_depth"
    )?;
    for e in args.n_min.max(1)..=args.n_max {
        let n = 1usize << e;
        let m = ((args.selectivity * n as f64).round() as usize).clamp(1, n);
        let seed = cfg.seed.wrapping_add(e as u64);
        let noise = if args.noisy || cfg.noisy {
            NoiseModel::from_device(&device, seed)
        } else {
            NoiseModel::noiseless(seed)
        };
        let g = measure_grover(e, m, cfg.shots, &noise, &device, &cfg.crossover.depth)?;
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.1},{:.1}",
            g.n,
            g.m,
            g.k,
            g.shots,
            g.analytic_success,
            g.empirical_success,
            g.empirical_success - g.analytic_success,
            g.shot_ns,
            g.model_depth
        )?;
    }
    Ok(())
}

pub fn run(cmd: &BenchCommand, cfg: &Config, out: &mut dyn Write) -> Result<()> {
    match cmd {
        BenchCommand::Crossover(a) => crossover(a, cfg, out),
        BenchCommand::Grover(a) => grover(a, cfg, out),
    }
}
