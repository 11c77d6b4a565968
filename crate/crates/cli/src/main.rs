//! Two-frame projective analysis from the command line.
//!
//! Subcommands: locate-focal, predict-line, match, dof, simulate, ambiguity.
//! Exit codes: 0 success, 2 input/parse error, 3 degenerate configuration,
//! 4 no valid solution.

mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rigidview::dof::{
    degrees_of_freedom, min_frames, min_points, verdict, DofScenario, Regime, Threshold,
};
use rigidview::epipolar::{line_residual, predict_line, TransferBasis};
use rigidview::focal::{locate_projected_focal, scan_table, FocalSolution, LocatorOptions};
use rigidview::geometry::Point2;
use rigidview::matching::{match_identities, MatchOptions, MatchProblem};
use rigidview::scene::{
    ambiguity_family, project, random_rigid_scene, shape_signature, true_projected_focal,
};
use rigidview::{Error, LabeledFrame};

#[derive(Parser)]
#[command(
    name = "rigidview",
    version,
    about = "Two-frame rigid-body projective analysis"
)]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Orthogonal,
    PerspectiveUnknownVarying,
    PerspectiveKnown,
    PerspectiveUnknownFixed,
    PerspectiveAutofocus,
}

impl From<RegimeArg> for Regime {
    fn from(value: RegimeArg) -> Regime {
        match value {
            RegimeArg::Orthogonal => Regime::Orthogonal,
            RegimeArg::PerspectiveUnknownVarying => Regime::PerspectiveUnknownVarying,
            RegimeArg::PerspectiveKnown => Regime::PerspectiveKnown,
            RegimeArg::PerspectiveUnknownFixed => Regime::PerspectiveUnknownFixed,
            RegimeArg::PerspectiveAutofocus => Regime::PerspectiveAutofocus,
        }
    }
}

#[derive(clap::Args)]
struct ScanArgs {
    /// Lower end of the u scan interval.
    #[arg(long, default_value_t = -50.0)]
    scan_min: f64,
    /// Upper end of the u scan interval.
    #[arg(long, default_value_t = 50.0)]
    scan_max: f64,
    /// Scan step for u.
    #[arg(long, default_value_t = 1e-3)]
    scan_step: f64,
    /// Step for the reciprocal sweep covering |u| > 1; 0 disables it.
    #[arg(long, default_value_t = 1e-3)]
    reciprocal_step: f64,
    /// Relative concurrency residual gate for accepting a root.
    #[arg(long, default_value_t = 1e-6)]
    residual_gate: f64,
}

impl ScanArgs {
    fn locator_options(&self) -> LocatorOptions {
        LocatorOptions {
            scan_min: self.scan_min,
            scan_max: self.scan_max,
            scan_step: self.scan_step,
            reciprocal_step: self.reciprocal_step,
            residual_gate: self.residual_gate,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Locate the projection of frame 1's focal point onto frame 2 from the
    /// seven labeled correspondences R, Q, P, A, C, E, G.
    LocateFocal {
        frame1: PathBuf,
        frame2: PathBuf,
        #[command(flatten)]
        scan: ScanArgs,
        /// Also tabulate the final polynomial over a u window.
        #[arg(long)]
        scan_table: bool,
        #[arg(long, default_value_t = 1.33)]
        table_min: f64,
        #[arg(long, default_value_t = 1.53)]
        table_max: f64,
        #[arg(long, default_value_t = 0.02)]
        table_step: f64,
    },
    /// Predict the frame-2 constraint line for a labeled frame-1 point.
    PredictLine {
        frame1: PathBuf,
        frame2: PathBuf,
        /// Label of the point whose line to construct.
        #[arg(long)]
        z_label: String,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Recover point identities between two unlabeled point sets.
    Match {
        set1: PathBuf,
        set2: PathBuf,
        /// Abort if the combination count n!/(n-8)! exceeds this.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        /// Worker threads; results are identical for any value.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Scan step of the per-selection focal solve.
        #[arg(long, default_value_t = 0.1)]
        scan_step: f64,
        /// Reciprocal sweep step of the per-selection focal solve.
        #[arg(long, default_value_t = 4e-3)]
        reciprocal_step: f64,
    },
    /// Degrees-of-freedom versus information accounting.
    Dof {
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
        #[arg(long)]
        points: Option<u32>,
        #[arg(long)]
        frames: Option<u32>,
        /// Print the reference balance table instead of one verdict.
        #[arg(long)]
        table: bool,
    },
    /// Generate an exact random scene and its two frames.
    Simulate {
        /// Number of rigid-body points (>= 7).
        #[arg(long, default_value_t = 8)]
        points: usize,
        /// Generator seed; RIGIDVIEW_SEED overrides the default.
        #[arg(long)]
        seed: Option<u64>,
        /// Standard deviation of isotropic Gaussian image noise.
        #[arg(long)]
        noise: Option<f64>,
        /// Directory for scene.json, frame1.json, frame2.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Slide camera 1's focal point along the baseline and rebuild the scene
    /// that reproduces both frames.
    Ambiguity {
        #[arg(long)]
        scene: PathBuf,
        /// Affine position along the baseline (0 = original, 1 excluded).
        #[arg(long)]
        t: f64,
        /// Optional path for the displaced scene.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print_report(&report, cli.format);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::MissingLabel { .. } | Error::InvalidInput(_) => 2,
        Error::NoValidRoot
        | Error::NoRootInInterval { .. }
        | Error::NoValidAssignment
        | Error::BudgetExceeded { .. } => 4,
        _ => 3,
    }
}

struct Report {
    document: Value,
    /// Rows for csv output: header plus records.
    table: Option<(Vec<String>, Vec<Vec<String>>)>,
    text: String,
}

fn print_report(report: &Report, format: Format) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report.document).unwrap()
        ),
        Format::Text => println!("{}", report.text),
        Format::Csv => {
            if let Some((header, rows)) = &report.table {
                println!("{}", header.join(","));
                for row in rows {
                    println!("{}", row.join(","));
                }
            } else {
                println!("{}", serde_json::to_string(&report.document).unwrap());
            }
        }
    }
}

fn point_json(p: Point2, frame: &str) -> Value {
    json!({"x": p.x, "y": p.y, "coordinate_frame": frame})
}

fn solution_json(sol: &FocalSolution) -> Value {
    json!({
        "f1pp": point_json(sol.f1pp, "frame2-original"),
        "aux": {
            "B": point_json(sol.aux_b, "frame2-original"),
            "D": point_json(sol.aux_d, "frame2-original"),
            "F": point_json(sol.aux_f, "frame2-original"),
            "H": point_json(sol.aux_h, "frame2-original"),
        },
        "u_root": sol.u_root,
        "v_root": sol.v_root,
        "coordinate_frame_of_roots": "frame2-canonical trace reciprocals",
        "concurrency_residual": sol.concurrency_residual,
    })
}

fn roots_json(sol: &FocalSolution) -> Value {
    Value::Array(
        sol.all_roots
            .iter()
            .map(|c| {
                json!({
                    "u": c.u,
                    "v": if c.v.is_finite() { json!(c.v) } else { Value::Null },
                    "residual": if c.residual.is_finite() { json!(c.residual) } else { Value::Null },
                    "accepted": c.accepted,
                })
            })
            .collect(),
    )
}

fn run(cli: &Cli) -> Result<Report, Error> {
    match &cli.command {
        Command::LocateFocal {
            frame1,
            frame2,
            scan,
            scan_table: with_table,
            table_min,
            table_max,
            table_step,
        } => {
            let f1 = files::read_frame(frame1)?;
            let f2 = files::read_frame(frame2)?;
            let options = scan.locator_options();
            let sol = locate_projected_focal(&f1, &f2, &options)?;
            let mut table_rows = None;
            let mut table_json = Value::Null;
            if *with_table {
                let rows = scan_table(&f1, &f2, *table_min, *table_max, *table_step)?;
                table_json = Value::Array(
                    rows.iter()
                        .map(|(u, p)| json!({"u": u, "polynomial": p}))
                        .collect(),
                );
                table_rows = Some((
                    vec!["u".to_string(), "polynomial".to_string()],
                    rows.iter()
                        .map(|(u, p)| vec![format!("{u}"), format!("{p}")])
                        .collect(),
                ));
            }
            let text = format!(
                "F1'' = ({:.6}, {:.6})  u = {:.9}  v = {:.9}  residual = {:.3e}  candidates = {}",
                sol.f1pp.x,
                sol.f1pp.y,
                sol.u_root,
                sol.v_root,
                sol.concurrency_residual,
                sol.all_roots.len()
            );
            Ok(Report {
                document: json!({
                    "command": "locate-focal",
                    "inputs": {"frame1": f1.id, "frame2": f2.id},
                    "result": solution_json(&sol),
                    "diagnostics": {
                        "residuals": {"concurrency": sol.concurrency_residual},
                        "roots": roots_json(&sol),
                        "evaluated": Value::Null,
                        "scan_table": table_json,
                    },
                }),
                table: table_rows,
                text,
            })
        }
        Command::PredictLine {
            frame1,
            frame2,
            z_label,
            scan,
        } => {
            let f1 = files::read_frame(frame1)?;
            let f2 = files::read_frame(frame2)?;
            let z1 = f1.require(z_label)?;
            let options = scan.locator_options();
            let sol = locate_projected_focal(&f1, &f2, &options)?;
            let line = predict_line(z1, &f1, &f2, &sol)?;
            let observed = f2.get(z_label);
            let residual = observed.map(|z2| line_residual(z2, &line));
            let text = match residual {
                Some(r) => format!(
                    "line z'': {:.9}*x + {:.9}*y + {:.9} = 0  observed residual = {r:.3e}",
                    line.line.a, line.line.b, line.line.c
                ),
                None => format!(
                    "line z'': {:.9}*x + {:.9}*y + {:.9} = 0",
                    line.line.a, line.line.b, line.line.c
                ),
            };
            Ok(Report {
                document: json!({
                    "command": "predict-line",
                    "inputs": {"frame1": f1.id, "frame2": f2.id, "z_label": z_label},
                    "result": {
                        "line": {"a": line.line.a, "b": line.line.b, "c": line.line.c,
                                  "coordinate_frame": "frame2-original"},
                        "via": point_json(line.via, "frame2-original"),
                        "anchor": point_json(line.anchor, "frame2-original"),
                        "transfer_basis": match line.basis_used {
                            TransferBasis::AuxiliaryB => "A'/B''",
                            TransferBasis::AuxiliaryD => "C'/D''",
                        },
                        "observed_residual": residual,
                    },
                    "diagnostics": {
                        "residuals": {"concurrency": sol.concurrency_residual,
                                       "observed": residual},
                        "roots": roots_json(&sol),
                        "evaluated": Value::Null,
                    },
                }),
                table: None,
                text,
            })
        }
        Command::Match {
            set1,
            set2,
            budget,
            threads,
            scan_step,
            reciprocal_step,
        } => {
            let f1 = files::read_frame(set1)?;
            let f2 = files::read_frame(set2)?;
            let labels1: Vec<String> = f1.labels().map(str::to_string).collect();
            let labels2: Vec<String> = f2.labels().map(str::to_string).collect();
            let options = MatchOptions {
                locator: LocatorOptions {
                    scan_step: *scan_step,
                    reciprocal_step: *reciprocal_step,
                    ..LocatorOptions::default()
                },
                budget: *budget,
                threads: *threads,
            };
            let problem = MatchProblem::new(f1.positions(), f2.positions(), options)?;
            let result = match_identities(&problem)?;
            let pairs: Vec<Value> = result
                .assignment
                .iter()
                .enumerate()
                .map(|(i, &j)| json!({"set1": labels1[i], "set2": labels2[j]}))
                .collect();
            let rows = result
                .assignment
                .iter()
                .enumerate()
                .map(|(i, &j)| vec![labels1[i].clone(), labels2[j].clone()])
                .collect();
            let text = format!(
                "assignment: {:?}\nbadness = {:.3e}  runner-up = {:.3e}  evaluated = {}",
                result.assignment, result.badness, result.runner_up_badness, result.evaluated
            );
            Ok(Report {
                document: json!({
                    "command": "match",
                    "inputs": {"set1": f1.id, "set2": f2.id, "budget": budget, "threads": threads},
                    "result": {
                        "assignment": result.assignment,
                        "pairs": pairs,
                        "badness": result.badness,
                        "runner_up_badness": if result.runner_up_badness.is_finite() {
                            json!(result.runner_up_badness)
                        } else {
                            Value::Null
                        },
                    },
                    "diagnostics": {
                        "residuals": {"badness": result.badness},
                        "roots": Value::Null,
                        "evaluated": result.evaluated,
                    },
                }),
                table: Some((vec!["set1".to_string(), "set2".to_string()], rows)),
                text,
            })
        }
        Command::Dof {
            regime,
            points,
            frames,
            table,
        } => run_dof(*regime, *points, *frames, *table),
        Command::Simulate {
            points,
            seed,
            noise,
            out_dir,
        } => {
            let seed = seed
                .or_else(|| {
                    std::env::var("RIGIDVIEW_SEED")
                        .ok()
                        .and_then(|s| s.parse().ok())
                })
                .unwrap_or(0);
            let (scene, cam1, cam2) = random_rigid_scene(*points, seed)?;
            let mut frame1 = project(&scene, &cam1)?;
            let mut frame2 = project(&scene, &cam2)?;
            frame1.id = "frame1".to_string();
            frame2.id = "frame2".to_string();
            if let Some(sigma) = noise {
                let mut rng: rand::rngs::StdRng =
                    rand::SeedableRng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
                frame1 = perturb(&frame1, *sigma, &mut rng)?;
                frame2 = perturb(&frame2, *sigma, &mut rng)?;
            }
            std::fs::create_dir_all(out_dir)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", out_dir.display())))?;
            files::write_scene(&out_dir.join("scene.json"), &scene, &cam1, &cam2)?;
            files::write_frame(&out_dir.join("frame1.json"), &frame1)?;
            files::write_frame(&out_dir.join("frame2.json"), &frame2)?;
            let truth = true_projected_focal(&cam1, &cam2)?;
            let text = format!(
                "wrote scene.json, frame1.json, frame2.json to {} (seed {seed})",
                out_dir.display()
            );
            Ok(Report {
                document: json!({
                    "command": "simulate",
                    "inputs": {"points": points, "seed": seed, "noise": noise},
                    "result": {
                        "out_dir": out_dir.display().to_string(),
                        "true_f1pp": point_json(truth, "frame2-original"),
                        "certificate": {
                            "no_four_coplanar": scene.certificate.no_four_coplanar,
                            "projections_nondegenerate": scene.certificate.projections_nondegenerate,
                            "constructions_nondegenerate": scene.certificate.constructions_nondegenerate,
                            "locator_well_posed": scene.certificate.locator_well_posed,
                        },
                    },
                    "diagnostics": {"residuals": Value::Null, "roots": Value::Null, "evaluated": Value::Null},
                }),
                table: None,
                text,
            })
        }
        Command::Ambiguity { scene, t, out } => {
            let (original, cam1, cam2) = files::read_scene(scene)?;
            let (displaced, moved_cam) = ambiguity_family(&original, &cam1, &cam2, *t)?;
            // reprojection residuals against the original frames
            let f1 = project(&original, &cam1)?;
            let f2 = project(&original, &cam2)?;
            let g1 = project(&displaced, &moved_cam)?;
            let g2 = project(&displaced, &cam2)?;
            let extent = |f: &LabeledFrame| {
                f.iter()
                    .map(|(_, p)| p.x.abs().max(p.y.abs()))
                    .fold(1e-12_f64, f64::max)
            };
            let mut reproj = 0.0_f64;
            for (label, p) in f1.iter() {
                reproj = reproj.max(g1.require(label)?.distance(p) / extent(&f1));
            }
            for (label, p) in f2.iter() {
                reproj = reproj.max(g2.require(label)?.distance(p) / extent(&f2));
            }
            let divergence = shape_signature(&original).divergence(&shape_signature(&displaced))?;
            if let Some(path) = out {
                files::write_scene(path, &displaced, &moved_cam, &cam2)?;
            }
            let text = format!(
                "t = {t}: reprojection residual = {reproj:.3e} (relative), shape divergence = {divergence:.3e}"
            );
            Ok(Report {
                document: json!({
                    "command": "ambiguity",
                    "inputs": {"scene": scene.display().to_string(), "t": t},
                    "result": {
                        "reprojection_residual": reproj,
                        "shape_divergence": divergence,
                        "moved_focal": {"x": moved_cam.focal_point.x, "y": moved_cam.focal_point.y,
                                         "z": moved_cam.focal_point.z},
                        "out": out.as_ref().map(|p| p.display().to_string()),
                    },
                    "diagnostics": {"residuals": {"reprojection": reproj},
                                     "roots": Value::Null, "evaluated": Value::Null},
                }),
                table: None,
                text,
            })
        }
    }
}

fn perturb(
    frame: &LabeledFrame,
    sigma: f64,
    rng: &mut rand::rngs::StdRng,
) -> Result<LabeledFrame, Error> {
    use rand::Rng;
    let mut gauss = || -> f64 {
        // Box-Muller
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    LabeledFrame::from_points(
        frame.id.clone(),
        frame
            .iter()
            .map(|(label, p)| {
                (
                    label.to_string(),
                    Point2::new(p.x + sigma * gauss(), p.y + sigma * gauss()),
                )
            })
            .collect::<Vec<_>>(),
    )
}

fn run_dof(
    regime: Option<RegimeArg>,
    points: Option<u32>,
    frames: Option<u32>,
    table: bool,
) -> Result<Report, Error> {
    if table {
        // the reference balance combinations for the unknown-varying regime,
        // plus the known-geometry anchor case
        let rows: Vec<(Regime, u32, u32)> = vec![
            (Regime::PerspectiveUnknownVarying, 10, 2),
            (Regime::PerspectiveUnknownVarying, 11, 2),
            (Regime::PerspectiveUnknownVarying, 7, 2),
            (Regime::PerspectiveUnknownVarying, 7, 3),
            (Regime::PerspectiveUnknownVarying, 6, 3),
            (Regime::PerspectiveUnknownVarying, 6, 4),
            (Regime::PerspectiveUnknownVarying, 5, 8),
            (Regime::PerspectiveKnown, 5, 2),
        ];
        let mut json_rows = Vec::new();
        let mut csv_rows = Vec::new();
        let mut lines = Vec::new();
        for (regime, p, k) in rows {
            let v = verdict(DofScenario {
                regime,
                points: p,
                frames: k,
            });
            let relation = match v.margin {
                m if m > 0 => "<",
                0 => "=",
                _ => ">",
            };
            json_rows.push(json!({
                "regime": regime.name(), "points": p, "frames": k,
                "dof": v.dof, "info": v.info, "relation_dof_info": relation,
                "balanced": v.balanced, "redundancy_caveat": v.redundancy_caveat,
            }));
            csv_rows.push(vec![
                regime.name().to_string(),
                p.to_string(),
                k.to_string(),
                v.dof.to_string(),
                relation.to_string(),
                v.info.to_string(),
                v.balanced.to_string(),
            ]);
            lines.push(format!(
                "{:<28} p={p:<3} k={k:<2} dof={:<3} {relation} info={:<3} balanced={}",
                regime.name(),
                v.dof,
                v.info,
                v.balanced
            ));
        }
        let thresholds = json!({
            "min_points_at_two_frames": {
                "perspective-unknown-varying": threshold_json(min_points(Regime::PerspectiveUnknownVarying, 2)),
                "perspective-unknown-fixed": threshold_json(min_points(Regime::PerspectiveUnknownFixed, 2)),
                "perspective-autofocus": threshold_json(min_points(Regime::PerspectiveAutofocus, 2)),
            },
            "min_frames_at_four_points": {
                "perspective-unknown-varying": threshold_json(min_frames(Regime::PerspectiveUnknownVarying, 4)),
            },
        });
        return Ok(Report {
            document: json!({
                "command": "dof",
                "inputs": {"table": true},
                "result": {"rows": json_rows, "thresholds": thresholds},
                "diagnostics": {"residuals": Value::Null, "roots": Value::Null, "evaluated": Value::Null},
            }),
            table: Some((
                [
                    "regime", "points", "frames", "dof", "relation", "info", "balanced",
                ]
                .iter()
                .map(|s| s.to_string())
                .collect(),
                csv_rows,
            )),
            text: lines.join("\n"),
        });
    }
    let (Some(regime), Some(points), Some(frames)) = (regime, points, frames) else {
        return Err(Error::InvalidInput(
            "dof needs --regime, --points and --frames (or --table)".into(),
        ));
    };
    if points < 1 || frames < 1 {
        return Err(Error::InvalidInput(
            "points and frames must be at least 1".into(),
        ));
    }
    let regime: Regime = regime.into();
    let scenario = DofScenario {
        regime,
        points,
        frames,
    };
    let v = verdict(scenario);
    let text = format!(
        "{}: p={points} k={frames}: dof={} info={} margin={} balanced={}{}",
        regime.name(),
        v.dof,
        v.info,
        v.margin,
        v.balanced,
        if v.redundancy_caveat {
            " (redundancy caveat: balance misleads at k=2)"
        } else {
            ""
        }
    );
    Ok(Report {
        document: json!({
            "command": "dof",
            "inputs": {"regime": regime.name(), "points": points, "frames": frames},
            "result": {
                "dof": degrees_of_freedom(scenario),
                "info": v.info,
                "margin": v.margin,
                "balanced": v.balanced,
                "redundancy_caveat": v.redundancy_caveat,
                "min_points_at_k": threshold_json(min_points(regime, frames)),
                "min_frames_at_p": threshold_json(min_frames(regime, points)),
            },
            "diagnostics": {"residuals": Value::Null, "roots": Value::Null, "evaluated": Value::Null},
        }),
        table: None,
        text,
    })
}

fn threshold_json(t: Threshold) -> Value {
    match t {
        Threshold::At(n) => json!(n),
        Threshold::Never => json!("never"),
    }
}
