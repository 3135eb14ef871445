use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use pointline_client::Client;
use pointline_core::eval::{
    ablate, evaluate_dataset, load_sample, make_phantom, map_ordered, DiceMode, EvalOptions, PhantomKind,
    PhantomParams,
};
use pointline_core::imaging::{write_gray, write_mask};
use pointline_core::weaklabel::{serialize_weak_labels, Manifest, ManifestEntry};
use pointline_core::generate_pseudo_label;
use pointline_service::ServiceOptions;

use crate::args::{jobs_or_default, mask_name};
use crate::{Command, KindArg, ReportArgs};

pub fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Generate { manifest, out, jobs, grow } => {
            let cfg = grow.resolve()?;
            generate(&manifest, &out, jobs_or_default(jobs)?, &cfg)
        }
        Command::Evaluate { report, grow } => {
            let cfg = grow.resolve()?;
            evaluate(&report, &cfg)
        }
        Command::Ablate { report, grow } => {
            let cfg = grow.resolve()?;
            ablation(&report, &cfg)
        }
        Command::Phantom { out, seed, count, kind, noise, blur, plain } => {
            phantoms(&out, seed, count, kind, noise, blur, !plain)
        }
        Command::Serve { port, host, cors_origins } => {
            let options = ServiceOptions { cors_origins: (!cors_origins.is_empty()).then_some(cors_origins) };
            runtime()?.block_on(async {
                let listener = tokio::net::TcpListener::bind((host, port))
                    .await
                    .with_context(|| format!("cannot bind {host}:{port}"))?;
                eprintln!("serving on http://{}", listener.local_addr()?);
                pointline_service::serve(listener, options, async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await?;
                Ok(ExitCode::SUCCESS)
            })
        }
        Command::Preview { url, image, labels, reference, out, grow } => {
            let patch = grow.resolve()?;
            let image_bytes = std::fs::read(&image).with_context(|| image.display().to_string())?;
            let text = std::fs::read_to_string(&labels).with_context(|| labels.display().to_string())?;
            let mut req = pointline_api::PreviewRequest::new(&image_bytes, serde_json::from_str(&text)?);
            req.config = Some(pointline_api::GrowConfigPatch::from(&patch));
            if let Some(r) = reference {
                req.reference = Some(pointline_api::encode(&std::fs::read(&r).with_context(|| r.display().to_string())?));
            }
            let resp = runtime()?.block_on(Client::new(url).preview(&req))?;
            std::fs::write(&out, pointline_api::decode(&resp.mask)?).with_context(|| out.display().to_string())?;
            let mut summary = serde_json::to_value(&resp)?;
            summary.as_object_mut().map(|o| o.remove("mask"));
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Health { url } => {
            let health = runtime()?.block_on(Client::new(url).health())?;
            println!("{}", serde_json::to_string_pretty(&health)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn runtime() -> anyhow::Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

fn load_manifest(path: &Path) -> anyhow::Result<Manifest> {
    Manifest::load(path).with_context(|| format!("cannot read manifest {}", path.display()))
}

fn generate(manifest: &Path, out: &Path, jobs: usize, cfg: &pointline_core::GrowConfig) -> anyhow::Result<ExitCode> {
    let start = Instant::now();
    let manifest = load_manifest(manifest)?;
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let results = map_ordered(&manifest.entries, jobs, |entry| -> Result<(), String> {
        let sample = load_sample(&manifest, entry)?;
        let mask = generate_pseudo_label(&sample.image, &sample.labels, cfg).map_err(|e| e.to_string())?;
        let path = out.join(mask_name(&entry.image));
        write_mask(&mask, &path).map_err(|e| e.to_string())
    });
    let mut failed = 0;
    for (entry, result) in manifest.entries.iter().zip(&results) {
        if let Err(e) = result {
            failed += 1;
            tracing::error!(image = %entry.image.display(), "{e}");
            eprintln!("failed: {}: {e}", entry.image.display());
        }
    }
    println!(
        "generated {} of {} masks in {:.2}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(if failed > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn report_options(args: &ReportArgs) -> anyhow::Result<EvalOptions> {
    Ok(EvalOptions {
        jobs: jobs_or_default(args.jobs)?,
        dice_mode: if args.jaccard_style { DiceMode::UnionDenominator } else { DiceMode::Standard },
    })
}

fn require_ground_truth(manifest: &Manifest) -> anyhow::Result<()> {
    if !manifest.entries.is_empty() && manifest.entries.iter().all(|e| e.ground_truth.is_none()) {
        anyhow::bail!("manifest has no ground_truth entries; nothing to score against");
    }
    Ok(())
}

fn emit(args: &ReportArgs, text: String, json: String) -> anyhow::Result<()> {
    print!("{}", if args.json { &json } else { &text });
    if let Some(path) = &args.out {
        let body = if path.extension().is_some_and(|e| e == "json") { json } else { text };
        std::fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn evaluate(args: &ReportArgs, cfg: &pointline_core::GrowConfig) -> anyhow::Result<ExitCode> {
    let manifest = load_manifest(&args.manifest)?;
    require_ground_truth(&manifest)?;
    let report = evaluate_dataset(&manifest, cfg, report_options(args)?);
    emit(args, report.to_text(), report.to_json())?;
    Ok(if report.failed > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn ablation(args: &ReportArgs, cfg: &pointline_core::GrowConfig) -> anyhow::Result<ExitCode> {
    let manifest = load_manifest(&args.manifest)?;
    require_ground_truth(&manifest)?;
    let report = ablate(&manifest, cfg, report_options(args)?);
    emit(args, report.to_text(), report.to_json())?;
    Ok(if report.failed > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn phantoms(
    out: &Path,
    seed: u64,
    count: usize,
    kind: KindArg,
    noise: f64,
    blur: usize,
    confounders: bool,
) -> anyhow::Result<ExitCode> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut entries = Vec::with_capacity(count);
    for i in 0..count {
        let k = match kind {
            KindArg::Horn => PhantomKind::Horn,
            KindArg::Body => PhantomKind::Body,
            KindArg::Mixed if i % 2 == 0 => PhantomKind::Horn,
            KindArg::Mixed => PhantomKind::Body,
        };
        let params = PhantomParams {
            noise_sigma: noise,
            blur_radius: blur,
            confounders,
            ..PhantomParams::new(k, seed + i as u64)
        };
        let mut ph = make_phantom(&params)?;
        let stem = format!("phantom_{i:04}");
        ph.labels.image = format!("{stem}.png");
        write_gray(&ph.image, &out.join(format!("{stem}.png")))?;
        write_mask(&ph.truth, &out.join(format!("{stem}_truth.png")))?;
        std::fs::write(out.join(format!("{stem}.json")), serialize_weak_labels(&ph.labels))?;
        entries.push(ManifestEntry {
            image: format!("{stem}.png").into(),
            labels: format!("{stem}.json").into(),
            ground_truth: Some(format!("{stem}_truth.png").into()),
        });
    }
    let manifest = Manifest { base_dir: out.to_path_buf(), entries };
    std::fs::write(out.join("manifest.json"), manifest.to_json())?;
    println!("wrote {count} phantoms to {}", out.display());
    Ok(ExitCode::SUCCESS)
}
