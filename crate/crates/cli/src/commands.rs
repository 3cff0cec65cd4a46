use std::fmt::Write as _;

use anytime_core::config::RawConfig;
use anytime_core::de_engine::erasure_curve;
use anytime_core::exponent::{
    fit_exponent, theoretical_exponent, threshold, SearchSettings, ThresholdResult,
};
use anytime_core::mc_sim::{simulate_relay_stream, CheckAssignment, EmpiricalCurve, SimSettings};
use anytime_core::{BilayerConfig, DeSettings, ErasureCurve, LayerParams};

use crate::args::{
    CommonArgs, CompareArgs, DeArgs, ExponentArgs, FamilyArg, SimArgs, SimulateArgs, ThresholdArgs,
};
use crate::run_spec::RunSpec;
use crate::CliError;

/// Text to write plus whether every density-evolution solve converged.
pub struct Outcome {
    pub text: String,
    pub converged: bool,
    /// Lines for stderr.
    pub notes: Vec<String>,
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

pub fn resolve_config(common: &CommonArgs) -> Result<BilayerConfig, CliError> {
    let file = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::File {
                path: path.clone(),
                source,
            })?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    Ok(file.merge(&common.code.raw()).resolve()?)
}

fn de_settings(common: &CommonArgs) -> Result<DeSettings, CliError> {
    let d = DeSettings::default();
    let s = DeSettings {
        tol: common.tol.unwrap_or(d.tol),
        max_iters: common.max_iters.unwrap_or(d.max_iters),
        ..d
    };
    s.validate()?;
    Ok(s)
}

fn stamp_de(spec: &mut RunSpec, s: &DeSettings) {
    spec.set("tol", num(s.tol))
        .set("max_iters", s.max_iters)
        .set("warm_start", s.warm_start)
        .set("pe_floor", num(s.pe_floor));
}

fn check_messages(messages: &[usize]) -> Result<(), CliError> {
    if messages.is_empty() || messages.contains(&0) {
        return Err(CliError::Usage("message indices must be at least 1".into()));
    }
    Ok(())
}

pub fn de(common: &CommonArgs, args: &DeArgs) -> Result<Outcome, CliError> {
    let cfg = resolve_config(common)?;
    check_messages(&args.messages)?;
    let settings = DeSettings {
        warm_start: !args.cold_start,
        pe_floor: args.pe_floor,
        ..de_settings(common)?
    };
    settings.validate()?;
    let curves: Vec<ErasureCurve> = args
        .messages
        .iter()
        .map(|&i| erasure_curve(&cfg, i, args.dmax, &settings))
        .collect();
    let converged = curves.iter().all(ErasureCurve::all_converged);

    let mut spec = RunSpec::new("de", cfg);
    stamp_de(&mut spec, &settings);
    spec.set("messages", join(&args.messages))
        .set("dmax", args.dmax);
    let mut out = spec.stamp();
    out.push_str("message_index,delay,decoding_time,pe");
    out.push_str(if converged { "\n" } else { ",flag\n" });
    for c in &curves {
        for (d, pe) in c.iter() {
            let _ = write!(
                out,
                "{},{},{},{}",
                c.message_index(),
                d,
                c.decoding_time(d),
                num(pe)
            );
            if !converged {
                out.push_str(if c.converged()[d] {
                    ",ok"
                } else {
                    ",nonconverged"
                });
            }
            out.push('\n');
        }
    }
    Ok(Outcome {
        text: out,
        converged,
        notes: Vec::new(),
    })
}

struct Family {
    case: &'static str,
    dv1: usize,
    dc1: usize,
    dv2: usize,
    dc2: usize,
    lambda2: f64,
}

const FAMILIES: [Family; 4] = [
    Family {
        case: "i",
        dv1: 3,
        dc1: 6,
        dv2: 2,
        dc2: 8,
        lambda2: 0.1,
    },
    Family {
        case: "ii",
        dv1: 3,
        dc1: 6,
        dv2: 3,
        dc2: 8,
        lambda2: 0.1,
    },
    Family {
        case: "iii",
        dv1: 3,
        dc1: 6,
        dv2: 2,
        dc2: 8,
        lambda2: 0.2,
    },
    Family {
        case: "iv",
        dv1: 4,
        dc1: 6,
        dv2: 2,
        dc2: 8,
        lambda2: 0.1,
    },
];

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let grid = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad lambda1 value `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if grid.is_empty() {
        return Err(CliError::Usage("lambda1 grid is empty".into()));
    }
    Ok(grid)
}

pub fn exponent(common: &CommonArgs, args: &ExponentArgs) -> Result<Outcome, CliError> {
    let base = resolve_config(common)?;
    let grid = parse_grid(&args.lambda1_grid)?;
    check_messages(&[args.message])?;
    let settings = de_settings(common)?;
    let custom = Family {
        case: "custom",
        dv1: base.layer1.dv(),
        dc1: base.layer1.dc(),
        dv2: base.layer2.dv(),
        dc2: base.layer2.dc(),
        lambda2: base.layer2.lambda(),
    };
    let families: Vec<&Family> = match args.family {
        FamilyArg::All => FAMILIES.iter().collect(),
        FamilyArg::I => vec![&FAMILIES[0]],
        FamilyArg::Ii => vec![&FAMILIES[1]],
        FamilyArg::Iii => vec![&FAMILIES[2]],
        FamilyArg::Iv => vec![&FAMILIES[3]],
        FamilyArg::Custom => vec![&custom],
    };

    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut converged = true;
    for f in &families {
        for &lambda1 in &grid {
            let layer2 = if f.dv2 == 0 {
                LayerParams::inactive(f.dc2, f.lambda2)?
            } else {
                LayerParams::new(f.dv2, f.dc2, f.lambda2)?
            };
            let cfg = BilayerConfig::with_relay_links(
                LayerParams::new(f.dv1, f.dc1, lambda1)?,
                layer2,
                base.eps_sd,
                base.eps_sr,
                base.eps_rd,
            )?;
            let theory = theoretical_exponent(&cfg);
            let curve = erasure_curve(&cfg, args.message, args.dmax, &settings);
            converged &= curve.all_converged();
            let fit = match fit_exponent(&curve, None, None) {
                Ok(fit) => fit.alpha_hat,
                Err(e) => {
                    notes.push(format!("case {} lambda1={lambda1}: {e}", f.case));
                    f64::NAN
                }
            };
            rows.push(format!(
                "{},{},{},{},{},{},{},{}",
                f.case,
                lambda1,
                f.dv1,
                f.lambda2,
                f.dv2,
                num(theory),
                num(fit),
                num((fit - theory).abs() / theory)
            ));
        }
    }

    let mut spec = RunSpec::new("exponent", base);
    stamp_de(&mut spec, &settings);
    spec.set("family", format!("{:?}", args.family).to_lowercase())
        .set("lambda1_grid", join(&grid))
        .set("message", args.message)
        .set("dmax", args.dmax);
    let mut out = spec.stamp();
    out.push_str("case,lambda1,dv1,lambda2,dv2,alpha_theory,alpha_fit,rel_err\n");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(Outcome {
        text: out,
        converged,
        notes,
    })
}

fn write_result(out: &mut String, prefix: &str, r: &ThresholdResult) {
    let _ = writeln!(out, "{prefix}eps_bar={}", num(r.eps_bar));
    let _ = writeln!(out, "{prefix}objective={}", num(r.objective));
    let _ = writeln!(out, "{prefix}beta_star={}", num(r.beta_star));
    let _ = writeln!(out, "{prefix}d_star={}", r.d_star);
    let _ = writeln!(out, "{prefix}variant={}", r.variant);
}

fn boundary_warning(r: &ThresholdResult) -> Option<String> {
    let which = match (r.beta_at_boundary, r.d_at_boundary) {
        (true, true) => "beta and d",
        (true, false) => "beta",
        (false, true) => "d",
        (false, false) => return None,
    };
    Some(format!(
        "optimum for {} at the edge of the {which} grid; widen the search",
        r.variant
    ))
}

pub fn threshold_report(common: &CommonArgs, args: &ThresholdArgs) -> Result<Outcome, CliError> {
    let cfg = resolve_config(common)?;
    let search = SearchSettings {
        beta_min: args.beta_min,
        beta_max: args.beta_max,
        beta_points: args.beta_points,
        d_max: args.d_max,
        strict: args.strict,
    };
    let report = threshold(&cfg, &search)?;

    let mut spec = RunSpec::new("threshold", cfg);
    spec.set("beta_min", num(search.beta_min))
        .set("beta_max", num(search.beta_max))
        .set("beta_points", search.beta_points)
        .set("d_max", search.d_max)
        .set("strict", search.strict);
    let mut out = spec.stamp();
    write_result(&mut out, "", &report.nominal);
    let mut warnings: Vec<String> = boundary_warning(&report.nominal).into_iter().collect();
    if let Some(strict) = &report.strict {
        write_result(&mut out, "strict_", strict);
        for v in &report.variants {
            let _ = writeln!(
                out,
                "eps_bar_{}_{}={}",
                v.variant.q1,
                v.variant.q2,
                num(v.eps_bar)
            );
            warnings.extend(boundary_warning(v).filter(|w| !warnings.contains(w)));
        }
    }
    for w in &warnings {
        let _ = writeln!(out, "warning={w}");
    }
    Ok(Outcome {
        text: out,
        converged: true,
        notes: warnings,
    })
}

fn sim_settings(common: &CommonArgs, args: &SimArgs) -> Result<SimSettings, CliError> {
    check_messages(&args.messages)?;
    let d = SimSettings::default();
    Ok(SimSettings {
        m: args.m,
        positions: args.positions,
        known_prefix: args.known_prefix,
        trials: args.trials,
        seed: common.seed.unwrap_or(d.seed),
        messages: args.messages.clone(),
        d_max: args.dmax,
        assignment: args.assignment.into(),
    })
}

fn stamp_sim(spec: &mut RunSpec, s: &SimSettings) {
    spec.set("M", s.m)
        .set("trials", s.trials)
        .set("seed", s.seed)
        .set("messages", join(&s.messages))
        .set("dmax", s.d_max)
        .set(
            "positions",
            s.positions.map_or("auto".into(), |p| p.to_string()),
        )
        .set(
            "known_prefix",
            s.known_prefix.map_or("auto".into(), |p| p.to_string()),
        )
        .set(
            "assignment",
            match s.assignment {
                CheckAssignment::Balanced => "balanced",
                CheckAssignment::Uniform => "uniform",
            },
        );
}

fn de_overlay(
    cfg: &BilayerConfig,
    curves: &[EmpiricalCurve],
    settings: &DeSettings,
) -> Vec<ErasureCurve> {
    curves
        .iter()
        .map(|c| erasure_curve(cfg, c.message_index, c.d_max(), settings))
        .collect()
}

const SIM_HEADER: &str = "message_index,delay,trials,errors,pe_hat,ci_halfwidth";

fn sim_row(c: &EmpiricalCurve, d: usize) -> String {
    format!(
        "{},{},{},{},{},{}",
        c.message_index,
        d,
        c.trials,
        c.errors[d],
        num(c.pe_hat[d]),
        num(c.ci_halfwidth[d])
    )
}

pub fn simulate(common: &CommonArgs, args: &SimulateArgs) -> Result<Outcome, CliError> {
    let cfg = resolve_config(common)?;
    let settings = sim_settings(common, &args.sim)?;
    let curves = simulate_relay_stream(&cfg, &settings)?;
    let mut spec = RunSpec::new("simulate", cfg);
    stamp_sim(&mut spec, &settings);
    let mut converged = true;
    let overlay = if args.overlay {
        let de = de_settings(common)?;
        stamp_de(&mut spec, &de);
        let o = de_overlay(&cfg, &curves, &de);
        converged = o.iter().all(ErasureCurve::all_converged);
        Some(o)
    } else {
        None
    };
    spec.set("overlay", args.overlay);

    let mut out = spec.stamp();
    out.push_str(SIM_HEADER);
    out.push_str(if args.overlay { ",pe_de\n" } else { "\n" });
    for (k, c) in curves.iter().enumerate() {
        for d in 0..=c.d_max() {
            out.push_str(&sim_row(c, d));
            if let Some(o) = &overlay {
                let _ = write!(out, ",{}", num(o[k].pe()[d]));
            }
            out.push('\n');
        }
    }
    Ok(Outcome {
        text: out,
        converged,
        notes: Vec::new(),
    })
}

pub fn compare(common: &CommonArgs, args: &CompareArgs) -> Result<Outcome, CliError> {
    let cfg = resolve_config(common)?;
    let settings = sim_settings(common, &args.sim)?;
    let de = de_settings(common)?;
    let curves = simulate_relay_stream(&cfg, &settings)?;
    let overlay = de_overlay(&cfg, &curves, &de);

    let mut spec = RunSpec::new("compare", cfg);
    stamp_sim(&mut spec, &settings);
    stamp_de(&mut spec, &de);
    spec.set("min_pe", num(args.min_pe));
    let mut out = spec.stamp();
    out.push_str(SIM_HEADER);
    out.push_str(",pe_de,deviation_hw\n");
    let mut worst = 0.0f64;
    for (c, o) in curves.iter().zip(&overlay) {
        for d in 0..=c.d_max() {
            let diff = c.pe_hat[d] - o.pe()[d];
            let dev = match c.ci_halfwidth[d] {
                hw if hw > 0.0 => diff / hw,
                _ if diff == 0.0 => 0.0,
                _ => diff.signum() * f64::INFINITY,
            };
            if o.pe()[d] > args.min_pe {
                worst = worst.max(dev.abs());
            }
            let _ = writeln!(out, "{},{},{}", sim_row(c, d), num(o.pe()[d]), num(dev));
        }
    }
    Ok(Outcome {
        text: out,
        converged: overlay.iter().all(ErasureCurve::all_converged),
        notes: vec![format!(
            "largest |deviation| where pe_de > {}: {worst:.3} half-widths",
            args.min_pe
        )],
    })
}
