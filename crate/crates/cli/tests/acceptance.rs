//! Acceptance gate: one PASS/FAIL line per criterion; exits non-zero on any FAIL.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use pointline_client::api::PreviewRequest;
use pointline_client::{Client, ClientError};
use pointline_core::eval::{
    ablate_samples, bce_dice_loss, dice, evaluate_samples, make_phantom, phantom_suite, sample_loss, BceForm,
    EvalOptions, PhantomKind, PhantomParams, ProbabilityMap, Sample,
};
use pointline_core::imaging::{encode_png, rasterize_bezier_with_control, write_gray, BinaryMask, GrayImage, PixelPoint};
use pointline_core::pseudolabel::{
    bezier_control, region_grow, run_pipeline, Backbone, Connectivity, ConstraintRegion, GrowConfig,
};
use pointline_core::weaklabel::{serialize_weak_labels, Manifest, ManifestEntry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_IMAGES: usize = 200;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const SUITE_SIZE: usize = 50;
const SUITE_SEED: u64 = 20_000;
const CLEAN_DICE_MIN: f64 = 0.90;
const NOISY_SIGMA: f64 = 8.0;
const NOISY_DICE_MIN: f64 = 0.85;
const SUITE_BUDGET: Duration = Duration::from_secs(30);
const LOSS_PERFECT_TOL: f64 = 1e-9;
const LOSS_SINGLE_PIXEL: f64 = 0.67990;
const LOSS_SINGLE_PIXEL_TOL: f64 = 1e-4;
const DETERMINISM_SLICES: usize = 100;
const PIPELINE_MEDIAN_MAX: Duration = Duration::from_millis(100);
const BEZIER_OFFSET: f64 = 3.0;
const BEZIER_DEVIATION: f64 = 1.5;
const BEZIER_TOL: f64 = 0.5;
const PREVIEW_MEDIAN_MAX: Duration = Duration::from_millis(300);

struct Gate {
    failures: usize,
}

impl Gate {
    fn check(&mut self, name: &str, result: Result<String, String>) {
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
}

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

/// Fixpoint by repeated full sweeps: add any allowed, similar pixel that
/// touches an accepted one, until a sweep changes nothing.
fn sweep_oracle(img: &GrayImage, seeds: &[PixelPoint], mean: f64, allowed: &BinaryMask, eps: f64, conn: Connectivity) -> BinaryMask {
    let (h, w) = img.dims();
    let mut acc = BinaryMask::empty(h, w);
    for &s in seeds {
        acc.insert(s);
    }
    let offsets: Vec<(i32, i32)> = match conn {
        Connectivity::Four => vec![(-1, 0), (1, 0), (0, -1), (0, 1)],
        Connectivity::Eight => (-1..=1).flat_map(|a| (-1..=1).map(move |b| (a, b))).filter(|&d| d != (0, 0)).collect(),
    };
    loop {
        let mut changed = false;
        for r in 0..h as i32 {
            for c in 0..w as i32 {
                let p = PixelPoint::new(r, c);
                if acc.contains(p) || !allowed.contains(p) {
                    continue;
                }
                if (img.at(p) as f64 - mean).abs() > eps {
                    continue;
                }
                if offsets.iter().any(|&(dr, dc)| acc.contains(PixelPoint::new(r + dr, c + dc))) {
                    acc.insert(p);
                    changed = true;
                }
            }
        }
        if !changed {
            return acc;
        }
    }
}

fn oracle_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (h, w) = (32, 32);
    let mut runs = 0;
    for i in 0..ORACLE_IMAGES {
        // alternate between high-contrast noise and low-contrast blobs
        let px: Vec<u8> = if i % 2 == 0 {
            (0..h * w).map(|_| rng.random()).collect()
        } else {
            let base: i32 = rng.random_range(60..200);
            (0..h * w).map(|_| (base + rng.random_range(-40..=40)).clamp(0, 255) as u8).collect()
        };
        let img = GrayImage::new(h, w, px).unwrap();
        let eps = [0.0, 10.0, 30.0, 60.0][rng.random_range(0..4)];
        let seeds: Vec<PixelPoint> = (0..rng.random_range(1..5))
            .map(|_| PixelPoint::new(rng.random_range(0..h as i32), rng.random_range(0..w as i32)))
            .collect();
        let backbone = Backbone::measure(seeds.iter().copied(), &img).unwrap();
        let density: f64 = rng.random_range(0.5..1.0);
        let mut allowed = BinaryMask::from_bits(h, w, (0..h * w).map(|_| rng.random_bool(density)).collect()).unwrap();
        for &s in &seeds {
            allowed.insert(s);
        }
        let constraint = ConstraintRegion { allowed: allowed.clone() };
        for conn in [Connectivity::Four, Connectivity::Eight] {
            let got = region_grow(&img, &backbone, &BinaryMask::empty(h, w), &constraint, eps, conn).unwrap();
            let want = sweep_oracle(&img, &backbone.pixels, backbone.mean_intensity, &allowed, eps, conn);
            if got != want {
                return Err(format!("image {i}, eps {eps}, {conn:?}: {} vs oracle {} pixels", got.count(), want.count()));
            }
            runs += 1;
        }
    }
    let took = start.elapsed();
    ensure(took < ORACLE_BUDGET, format!("{runs} runs on {ORACLE_IMAGES} images identical to the sweep oracle in {took:.2?} (budget {ORACLE_BUDGET:?})"))
}

fn samples(sigma: f64) -> Vec<Sample> {
    phantom_suite(SUITE_SIZE, SUITE_SEED, sigma)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, p)| Sample { name: format!("phantom_{i:02}"), image: p.image, labels: p.labels, truth: Some(p.truth) })
        .collect()
}

fn phantom_quality() -> Result<String, String> {
    let start = Instant::now();
    let cfg = GrowConfig::default();
    let clean = evaluate_samples(&samples(0.0), &cfg, EvalOptions::with_jobs(4));
    let noisy = evaluate_samples(&samples(NOISY_SIGMA), &cfg, EvalOptions::with_jobs(4));
    let took = start.elapsed();
    let (c, n) = (clean.mean.unwrap_or(0.0), noisy.mean.unwrap_or(0.0));
    let horns = samples(0.0).iter().filter(|s| s.labels.regions[0].kind.is_horn()).count();
    ensure(
        c >= CLEAN_DICE_MIN && n >= NOISY_DICE_MIN && took < SUITE_BUDGET && horns == SUITE_SIZE / 2,
        format!(
            "{horns} horn + {} body phantoms; mean dice {c:.4} noise-free (min {CLEAN_DICE_MIN}), {n:.4} at sigma {NOISY_SIGMA} (min {NOISY_DICE_MIN}); {took:.2?} (budget {SUITE_BUDGET:?})",
            SUITE_SIZE - horns
        ),
    )
}

fn ablation_ordering() -> Result<String, String> {
    let report = ablate_samples(&samples(0.0), &GrowConfig::default(), EvalOptions::with_jobs(4));
    let m: Vec<f64> = report.rows.iter().map(|r| r.mean.unwrap_or(f64::NAN)).collect();
    let detail = report.rows.iter().map(|r| format!("{} {:.4}", r.name, r.mean.unwrap_or(f64::NAN))).collect::<Vec<_>>().join(" | ");
    ensure(m.len() == 4 && m[0] < m[1] && m[1] < m[2] && m[2] <= m[3], detail)
}

fn metric_exactness() -> Result<String, String> {
    let a = BinaryMask::from_ascii("##..\n##..");
    let disjoint = BinaryMask::from_ascii("..##\n..##");
    let half = BinaryMask::from_ascii(".##.\n.##.");
    let d = (dice(&a, &a).unwrap(), dice(&a, &disjoint).unwrap(), dice(&a, &half).unwrap());
    let target = BinaryMask::from_ascii("#.#\n.##");
    let perfect = bce_dice_loss(&[ProbabilityMap::from_mask(&target)], &[target], BceForm::PositiveOnly).unwrap();
    let single = sample_loss(&ProbabilityMap::new(1, 1, vec![0.5]).unwrap(), &BinaryMask::full(1, 1), BceForm::PositiveOnly).unwrap();
    ensure(
        d == (1.0, 0.0, 0.5) && perfect.abs() < LOSS_PERFECT_TOL && (single - LOSS_SINGLE_PIXEL).abs() < LOSS_SINGLE_PIXEL_TOL,
        format!("dice {:?}; perfect loss {perfect:e} (tol {LOSS_PERFECT_TOL:e}); single pixel {single:.6} (want {LOSS_SINGLE_PIXEL} +/- {LOSS_SINGLE_PIXEL_TOL:e})", d),
    )
}

fn epsilon_boundary() -> Result<String, String> {
    let img = GrayImage::new(1, 3, vec![130, 100, 131]).unwrap();
    let bb = Backbone { pixels: vec![PixelPoint::new(0, 1)], mean_intensity: 100.0 };
    let cons = ConstraintRegion { allowed: BinaryMask::full(1, 3) };
    let out = region_grow(&img, &bb, &BinaryMask::empty(1, 3), &cons, 30.0, Connectivity::Eight).unwrap();
    ensure(
        out.get(0, 0) && !out.get(0, 2),
        format!("difference 30 accepted: {}, difference 31 accepted: {}", out.get(0, 0), out.get(0, 2)),
    )
}

fn write_phantom_manifest(dir: &Path, count: usize) -> std::path::PathBuf {
    let mut entries = Vec::new();
    for i in 0..count {
        let kind = if i % 2 == 0 { PhantomKind::Horn } else { PhantomKind::Body };
        let ph = make_phantom(&PhantomParams { noise_sigma: 4.0, confounders: true, ..PhantomParams::new(kind, 500 + i as u64) }).unwrap();
        let stem = format!("slice_{i:03}");
        write_gray(&ph.image, &dir.join(format!("{stem}.png"))).unwrap();
        std::fs::write(dir.join(format!("{stem}.json")), serialize_weak_labels(&ph.labels)).unwrap();
        entries.push(ManifestEntry { image: format!("{stem}.png").into(), labels: format!("{stem}.json").into(), ground_truth: None });
    }
    let path = dir.join("manifest.json");
    std::fs::write(&path, Manifest { base_dir: dir.into(), entries }.to_json()).unwrap();
    path
}

fn determinism_and_speed() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = write_phantom_manifest(tmp.path(), DETERMINISM_SLICES);
    let mut outputs = Vec::new();
    for jobs in ["1", "4"] {
        let out_dir = tmp.path().join(format!("jobs{jobs}"));
        let status = Command::new(env!("CARGO_BIN_EXE_pointline"))
            .args(["generate", "--manifest", manifest.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--jobs", jobs])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("generate --jobs {jobs} exited {:?}", status.status.code()));
        }
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    let identical = outputs[0] == outputs[1] && outputs[0].len() == DETERMINISM_SLICES;

    let ph = make_phantom(&PhantomParams { noise_sigma: 8.0, confounders: true, ..PhantomParams::new(PhantomKind::Body, 77) }).unwrap();
    let cfg = GrowConfig::default();
    let times: Vec<Duration> = (0..21)
        .map(|_| {
            let t = Instant::now();
            run_pipeline(&ph.image, &ph.labels, &cfg).unwrap();
            t.elapsed()
        })
        .collect();
    let med = median(times);
    ensure(
        identical && med < PIPELINE_MEDIAN_MAX,
        format!(
            "{} masks byte-identical for jobs 1 and 4: {identical}; 224x224 pipeline median {med:.2?} (max {PIPELINE_MEDIAN_MAX:?})",
            outputs[0].len()
        ),
    )
}

fn bezier_geometry() -> Result<String, String> {
    let chords = [((0, 0), (0, 20)), ((10, 5), (40, 25)), ((50, 50), (20, 62)), ((0, 0), (16, 12)), ((5, 30), (30, 5))];
    let mut worst: f64 = 0.0;
    for &((ar, ac), (br, bc)) in &chords {
        let (a, b) = (PixelPoint::new(ar, ac), PixelPoint::new(br, bc));
        // centre on one side; control point goes to the other
        let centre = PixelPoint::new((ar + br) / 2 + (bc - ac).signum() * 5, (ac + bc) / 2 - (br - ar).signum() * 5);
        let ctrl = bezier_control(a, b, centre, BEZIER_OFFSET);
        let px = rasterize_bezier_with_control(a, ctrl, b);
        if px.first() != Some(&a) || px.last() != Some(&b) {
            return Err(format!("chord {a:?}->{b:?}: endpoints {:?} / {:?}", px.first(), px.last()));
        }
        let (dr, dc) = ((br - ar) as f64, (bc - ac) as f64);
        let len = (dr * dr + dc * dc).sqrt();
        let perp = |r: f64, c: f64| ((r - ar as f64) * dc - (c - ac as f64) * dr).abs() / len;
        let pixel_dev = px.iter().map(|q| perp(q.row as f64, q.col as f64)).fold(0.0, f64::max);
        let dense_dev = (0..=10_000)
            .map(|i| {
                let t = i as f64 / 10_000.0;
                let (u, v, w) = ((1.0 - t) * (1.0 - t), 2.0 * t * (1.0 - t), t * t);
                perp(u * ar as f64 + v * ctrl.0 + w * br as f64, u * ac as f64 + v * ctrl.1 + w * bc as f64)
            })
            .fold(0.0, f64::max);
        if (dense_dev - BEZIER_DEVIATION).abs() > 1e-6 || (pixel_dev - BEZIER_DEVIATION).abs() > BEZIER_TOL {
            return Err(format!("chord {a:?}->{b:?}: curve deviation {dense_dev:.4}, pixel deviation {pixel_dev:.3}"));
        }
        worst = worst.max((pixel_dev - BEZIER_DEVIATION).abs());
    }
    Ok(format!(
        "{} chords: endpoints exact, curve peak {BEZIER_DEVIATION} px, pixel peak within {worst:.3} px of it (tol {BEZIER_TOL})",
        chords.len()
    ))
}

fn service_contract() -> Result<String, String> {
    let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
        let base = format!("http://{}", listener.local_addr().unwrap());
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        tokio::spawn(pointline_service::serve(listener, Default::default(), async {
            let _ = rx.await;
        }));
        let client = Client::new(base);

        let ph = make_phantom(&PhantomParams { noise_sigma: 8.0, confounders: true, ..PhantomParams::new(PhantomKind::Horn, 31) }).unwrap();
        let labels: serde_json::Value = serde_json::from_str(&serialize_weak_labels(&ph.labels)).unwrap();
        let req = PreviewRequest::new(&encode_png(&ph.image).unwrap(), labels);
        let mut times = Vec::new();
        for _ in 0..21 {
            let t = Instant::now();
            let resp = client.preview(&req).await.map_err(|e| e.to_string())?;
            times.push(t.elapsed());
            if resp.empty {
                return Err("preview returned an empty mask".into());
            }
        }
        let med = median(times);

        let mut bad = req.clone();
        bad.labels = serde_json::json!({
            "image": "x.png", "height": 224, "width": 224,
            "regions": [{"kind": "body", "points": [[100, 100]],
                         "lines": [[[90, 80], [110, 80]], [[90, 120], [110, 120]]]}]
        });
        let rejection = match client.preview(&bad).await {
            Err(ClientError::Status { status, body }) => format!("{} {}", status.as_u16(), body.error),
            other => format!("unexpected {other:?}"),
        };
        let _ = tx.send(());
        ensure(
            med < PREVIEW_MEDIAN_MAX && rejection.starts_with("400") && rejection.contains("body requires 2 points"),
            format!("preview median {med:.2?} (max {PREVIEW_MEDIAN_MAX:?}); one-point body -> {rejection}"),
        )
    })
}

fn main() -> ExitCode {
    let mut gate = Gate { failures: 0 };
    gate.check("region growing equals brute-force oracle", oracle_equivalence());
    gate.check("phantom full-pipeline dice", phantom_quality());
    gate.check("ablation ordering", ablation_ordering());
    gate.check("metric exactness", metric_exactness());
    gate.check("tolerance boundary is inclusive", epsilon_boundary());
    gate.check("determinism and speed", determinism_and_speed());
    gate.check("bezier geometry", bezier_geometry());
    gate.check("service contract", service_contract());
    if gate.failures == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", gate.failures);
        ExitCode::FAILURE
    }
}
