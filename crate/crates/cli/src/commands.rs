use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use comstab::adrc::{eso_gains, sef_gains};
use comstab::fuzzy::{BASIS_RULES, PID_RULES, SCALING_RULES};
use comstab::gait::{joint_trajectories, GaitPlanner};
use comstab::grader::{kmeans, models_to_text, ClusterModel, StabilitySample, LEVELS};
use comstab::harness::{
    generate_grader_dataset, reduction_percent, steering_comparison, walking_comparison,
    SteeringController, WalkingController,
};
use comstab::kinematics::ChainConfig;
use comstab::mechanism::Axis;
use comstab::vehicle::yaw_rate_gain;
use comstab::Exec;

use crate::config::RunConfig;
use crate::{
    AxisPreset, Cli, Command, ExportArgs, ExportWhat, GainsArgs, Outcome, SteerArgs, TrainArgs,
    WalkArgs,
};

struct Ctx {
    config: RunConfig,
    out: PathBuf,
    exec: Exec,
}

impl Ctx {
    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("cannot create output directory {}", self.out.display()))?;
        let path = self.out.join(name);
        write_file(&path, contents)?;
        Ok(path)
    }

    fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().context("flushing CSV")?;
        self.write(name, &String::from_utf8(bytes)?)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    let mut config = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    let ctx = Ctx {
        config,
        out: g.out.clone(),
        exec: if g.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        },
    };
    match &cli.command {
        Command::Steer(a) => steer(ctx, a),
        Command::Walk(a) => walk(ctx, a),
        Command::TrainGrader(a) => train_grader(ctx, a),
        Command::Gains(a) => gains(&ctx, a),
        Command::Export(a) => export(&ctx, a),
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(String::new, |x| format!("{x:.digits$}"))
}

fn steer(mut ctx: Ctx, args: &SteerArgs) -> Result<Outcome> {
    if let Some(d) = args.duration {
        ctx.config.steering.duration = d;
    }
    let names = if args.controller.is_empty() {
        ctx.config.steering.controllers.clone()
    } else {
        args.controller.clone()
    };
    if names.is_empty() {
        bail!("no steering controller selected");
    }
    let base = ctx.config.steering()?;
    let controllers: Vec<SteeringController> = names.iter().map(|&n| n.into()).collect();
    let runs = steering_comparison(&base, &controllers, ctx.exec)?;
    let mut rows = Vec::new();
    let mut outcome = Outcome::Ok;
    println!(
        "{:<10} {:>10} {:>9} {:>10} {:>8} {:>10} {:>10}",
        "controller", "overshoot%", "rise_s", "settle_s", "sse%", "final_K", "slider_m"
    );
    for run in &runs {
        let name = run.controller.name();
        let slug = name.to_lowercase();
        ctx.write(
            &format!("steering_{slug}.csv"),
            &run.trace.to_csv(base.target_k),
        )?;
        let final_k = *run.trace.k.last().expect("non-empty trace");
        let m = run.metrics;
        println!(
            "{:<10} {:>10} {:>9} {:>10} {:>8} {:>10.6} {:>10.4}",
            name,
            opt(m.map(|m| m.overshoot), 3),
            opt(m.and_then(|m| m.rise_time), 3),
            opt(m.and_then(|m| m.settling_time), 3),
            opt(m.map(|m| m.steady_state_error), 3),
            final_k,
            run.final_displacement
        );
        rows.push(vec![
            name.to_string(),
            opt(m.map(|m| m.overshoot), 6),
            opt(m.and_then(|m| m.rise_time), 6),
            opt(m.and_then(|m| m.settling_time), 6),
            opt(m.map(|m| m.steady_state_error), 6),
            format!("{final_k:.8}"),
            format!("{:.6}", run.final_displacement),
            run.saturated.to_string(),
        ]);
        let unstable = !final_k.is_finite() || run.trace.y.iter().any(|y| !y.is_finite());
        if run.controller != SteeringController::None && (run.saturated || unstable) {
            eprintln!("{name}: slider reached its travel stop");
            outcome = Outcome::PhysicalLimit;
        }
    }
    let path = ctx.csv(
        "steering_metrics.csv",
        &[
            "controller",
            "overshoot_pct",
            "rise_time_s",
            "settling_time_s",
            "steady_state_error_pct",
            "final_k",
            "final_slider_m",
            "saturated",
        ],
        &rows,
    )?;
    println!("target K = {}; results in {}", base.target_k, path.display());
    Ok(outcome)
}

fn walk(mut ctx: Ctx, args: &WalkArgs) -> Result<Outcome> {
    let w = &mut ctx.config.walking;
    if let Some(d) = args.duration {
        w.duration = d;
    }
    if let Some(m) = &args.model {
        w.model = Some(m.clone());
    }
    if let Some(s) = args.disturbance_scale {
        w.disturbance_scale = s;
    }
    let names = if args.controller.is_empty() {
        w.controllers.clone()
    } else {
        args.controller.clone()
    };
    if names.is_empty() {
        bail!("no walking controller selected");
    }
    let base = ctx.config.walking()?;
    let controllers: Vec<WalkingController> = names.iter().map(|&n| n.into()).collect();
    let runs = walking_comparison(&base, &controllers, ctx.exec)?;
    let mut rows = Vec::new();
    let mut outcome = Outcome::Ok;
    println!(
        "{:<18} {:>4} {:>9} {:>9} {:>9} {:>9} {:>7}",
        "controller", "axis", "max_err", "switch", "steady", "rms", "<=L3%"
    );
    for run in &runs {
        let name = run.controller.name();
        let slug = name.to_lowercase().replace('+', "-");
        ctx.write(&format!("walking_{slug}.csv"), &run.trace.to_csv())?;
        for (a, axis) in ["x", "y"].iter().enumerate() {
            let m = &run.metrics[a];
            println!(
                "{:<18} {:>4} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>7.2}",
                name,
                axis,
                m.max_tracking_error,
                m.switch_overshoot,
                m.steady_state_error,
                m.rms_error,
                100.0 * m.share_at_most(3)
            );
            rows.push(vec![
                name.to_string(),
                axis.to_string(),
                format!("{:.8}", m.max_tracking_error),
                format!("{:.8}", m.switch_overshoot),
                format!("{:.8}", m.steady_state_error),
                format!("{:.8}", m.rms_error),
                format!("{:.6}", m.share_at_most(3)),
                opt(run.tipped_at, 4),
            ]);
        }
        if let Some(t) = run.tipped_at {
            eprintln!("{name}: ZMP left the support polygon at t = {t:.3} s");
            outcome = Outcome::PhysicalLimit;
        }
    }
    let find = |c| runs.iter().find(|r| r.controller == c);
    if let (Some(plain), Some(graded)) = (
        find(WalkingController::VufcAdrc),
        find(WalkingController::VufcAdrcGraded),
    ) {
        for (a, axis) in ["x", "y"].iter().enumerate() {
            println!(
                "grading on {axis}: switch overshoot reduced {:.2} %, steady-state error reduced {:.2} %",
                reduction_percent(
                    plain.metrics[a].switch_overshoot,
                    graded.metrics[a].switch_overshoot
                ),
                reduction_percent(
                    plain.metrics[a].steady_state_error,
                    graded.metrics[a].steady_state_error
                )
            );
        }
    }
    let path = ctx.csv(
        "walking_metrics.csv",
        &[
            "controller",
            "axis",
            "max_tracking_error_m",
            "switch_overshoot_m",
            "steady_state_error_m",
            "rms_error_m",
            "share_at_most_l3",
            "tipped_at_s",
        ],
        &rows,
    )?;
    println!("results in {}", path.display());
    Ok(outcome)
}

/// Keeps `n` samples spread evenly over `v`.
fn spread<T: Copy>(v: &[T], n: usize) -> Vec<T> {
    if v.len() <= n {
        return v.to_vec();
    }
    (0..n).map(|i| v[i * v.len() / n]).collect()
}

fn train_grader(mut ctx: Ctx, args: &TrainArgs) -> Result<Outcome> {
    let gr = &mut ctx.config.grader;
    if let Some(n) = args.samples {
        gr.samples = n;
    }
    if let Some(n) = args.runs {
        gr.runs = n;
    }
    let gr = ctx.config.grader.clone();
    if gr.samples < LEVELS {
        bail!(
            "grader.samples must be at least {LEVELS}, got {}",
            gr.samples
        );
    }
    if gr.runs == 0 {
        bail!("grader.runs must be positive");
    }
    let base = ctx.config.walking()?;
    let seeds: Vec<u64> = (0..gr.runs as u64)
        .map(|i| ctx.config.seed.wrapping_add(i))
        .collect();
    let data = generate_grader_dataset(&base, &seeds, gr.stride, ctx.exec)?;
    let mut models = Vec::new();
    let mut rows = Vec::new();
    for axis in Axis::BOTH {
        let samples: Vec<StabilitySample> = data.iter().filter(|s| s.axis == axis).copied().collect();
        let samples = spread(&samples, gr.samples);
        if samples.len() < LEVELS {
            bail!(
                "only {} samples on axis {}; increase grader.runs",
                samples.len(),
                axis.name()
            );
        }
        let points: Vec<[f64; 2]> = samples.iter().map(StabilitySample::magnitude).collect();
        let fit = kmeans(&points, LEVELS, gr.max_iter, ctx.config.seed, ctx.exec)?;
        log::info!(
            "axis {}: {} samples, {} iterations, inertia {:.6e}",
            axis.name(),
            points.len(),
            fit.iterations,
            fit.inertia()
        );
        for s in &samples {
            rows.push(vec![
                axis.name().to_string(),
                format!("{:.9}", s.zmpe),
                format!("{:.9}", s.zmpec),
            ]);
        }
        let model = fit.into_model(axis)?;
        let reference = ClusterModel::pretrained(axis);
        println!(
            "axis {} ({} samples)     trained |e|, |ec|        built-in |e|, |ec|",
            axis.name(),
            points.len()
        );
        for (i, (c, r)) in model.centers.iter().zip(&reference.centers).enumerate() {
            println!(
                "  L{}   {:>12.6} {:>12.6}    {:>10.5} {:>10.5}",
                i + 1,
                c[0],
                c[1],
                r[0],
                r[1]
            );
        }
        models.push(model);
    }
    let text = models_to_text(&models);
    let path = match &args.model_out {
        Some(p) => {
            write_file(p, &text)?;
            p.clone()
        }
        None => ctx.write("grader_model.txt", &text)?,
    };
    ctx.csv("grader_samples.csv", &["axis", "zmpe", "zmpec"], &rows)?;
    println!("model written to {}", path.display());
    Ok(Outcome::Ok)
}

fn gains(ctx: &Ctx, args: &GainsArgs) -> Result<Outcome> {
    let (wo, wc) = match args.axis {
        Some(AxisPreset::X) => (ctx.config.adrc.x.wo, ctx.config.adrc.x.wc),
        Some(AxisPreset::Y) => (ctx.config.adrc.y.wo, ctx.config.adrc.y.wc),
        None => (
            args.wo.unwrap_or(ctx.config.adrc.x.wo),
            args.wc.unwrap_or(ctx.config.adrc.x.wc),
        ),
    };
    let (l1, l2, l3) = eso_gains(wo)?;
    let s = sef_gains(wc)?;
    println!("wo = {wo}, wc = {wc}");
    println!("phi1 = {l1}");
    println!("phi2 = {l2}");
    println!("phi3 = {l3}");
    println!("kp = {}", s.kp);
    println!("kd = {}", s.kd);
    Ok(Outcome::Ok)
}

fn export(ctx: &Ctx, args: &ExportArgs) -> Result<Outcome> {
    let path = match args.what {
        ExportWhat::Gait => {
            if !(args.duration > 0.0) {
                bail!("--duration must be positive");
            }
            let params = ctx.config.gait();
            let planner = GaitPlanner::new(params)?;
            let samples = planner.plan(args.duration);
            let chain = ChainConfig {
                l1: params.l1,
                l2: params.l2,
                ..ChainConfig::default()
            };
            let joints = joint_trajectories(&samples, &chain)?;
            let rows: Vec<Vec<String>> = samples
                .iter()
                .zip(&joints)
                .map(|(s, q)| {
                    let mut r = vec![
                        format!("{:.4}", s.t),
                        format!("{:.6}", s.hip_x),
                        format!("{:.6}", s.hip_z),
                        format!("{:.6}", s.sway_y),
                        format!("{:.6}", s.right_ankle.0),
                        format!("{:.6}", s.right_ankle.1),
                        format!("{:.6}", s.left_ankle.0),
                        format!("{:.6}", s.left_ankle.1),
                    ];
                    r.extend(q.iter().map(|a| format!("{a:.6}")));
                    r.push(format!("{:.6}", s.zmpd_x));
                    r.push(format!("{:.6}", s.zmpd_y));
                    r
                })
                .collect();
            ctx.csv(
                "gait.csv",
                &[
                    "t", "hip_x", "hip_z", "sway_y", "right_ankle_x", "right_ankle_z",
                    "left_ankle_x", "left_ankle_z", "theta1", "theta2", "theta3", "theta4",
                    "theta5", "theta6", "zmpd_x", "zmpd_y",
                ],
                &rows,
            )?
        }
        ExportWhat::Tables => {
            let text = format!(
                "# gain corrections dkp/dki/dkd; rows Kec NB..PB, columns Ke NB..PB\n{PID_RULES}\n\
                 # basis output; rows ZMPe NB..PB, columns ZMPec NB..PB\n{BASIS_RULES}\n\
                 # scaling factors; rows zeta, xi, gamma; columns L1..L5\n{SCALING_RULES}"
            );
            ctx.write("rule_tables.txt", &text)?
        }
        ExportWhat::Config => {
            let text = ctx.config.to_toml();
            print!("{text}");
            ctx.write("config.toml", &text)?
        }
        ExportWhat::YawGain => {
            let v = ctx.config.vehicle()?;
            let k0 = v.stability_factor_at(0.0)?;
            let k1 = v.stability_factor_at(ctx.config.vehicle.excursion)?;
            let mut rows = Vec::new();
            for i in 1..=80 {
                let ux = 0.5 * i as f64;
                rows.push(vec![
                    format!("{ux:.2}"),
                    format!("{:.6}", yaw_rate_gain(ux, k0, v.wheelbase)?),
                    format!("{:.6}", yaw_rate_gain(ux, k1, v.wheelbase)?),
                    format!("{:.6}", ux / v.wheelbase),
                ]);
            }
            println!("K(centred) = {k0:.6}, K(excursion) = {k1:.6}");
            ctx.csv(
                "yaw_gain.csv",
                &["ux", "gain_centred", "gain_excursion", "gain_neutral"],
                &rows,
            )?
        }
    };
    println!("wrote {}", path.display());
    Ok(Outcome::Ok)
}
