//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints a PASS/FAIL line; the process fails if any criterion fails.

mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::Instant;

use cadfidelity::complexity::{self, ComplexityWeights};
use cadfidelity::registration::{self, IcpOptions, RigidTransform};
use cadfidelity::report::{self, fmt4, EvalOptions, LoadedModel, TrendSeries, TABLE1};
use cadfidelity::similarity::{self, final_similarity, SimilarityComponents};
use cadfidelity::stl::{self, StlDocument, StlFormat};
use cadfidelity::{fixtures, geom, scad, Aabb, PointCloud, TriangleMesh, Vec3};
use nalgebra::{Rotation3, Unit};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VOXEL: f64 = 0.05;
const NAMES: [&str; 4] = ["model_a.scad", "model_b.scad", "model_c.scad", "model_d.scad"];

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn models() -> Vec<LoadedModel> {
    NAMES.iter().map(|n| report::load_fixture(n).expect("fixture loads")).collect()
}

fn reports() -> Vec<report::MetricReport> {
    let m = models();
    m.iter()
        .map(|g| report::compare(g, &m[3], &EvalOptions::default()).expect("compare"))
        .collect()
}

fn column_at_four_decimals(
    name: &str,
    expected: [&str; 4],
    pick: impl Fn(&similarity::SimilarityReport) -> f64,
) -> Result<Vec<String>, String> {
    let got: Vec<String> = reports().iter().map(|r| fmt4(pick(&r.similarity))).collect();
    ensure(got == expected, || format!("{name} column {got:?}, expected {expected:?}"))?;
    Ok(got)
}

fn voxel_oracle() -> &'static [(f64, f64)] {
    static CACHE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CACHE.get_or_init(|| {
        fixtures::ALL
            .iter()
            .map(|(_, text)| oracle::voxel_measures(&oracle::solid(text), VOXEL))
            .collect()
    })
}

/// Exact measure vs voxel oracle; one voxel layer is area × spacing.
fn oracle_check(measure: &str, exact: [f64; 4]) -> Result<String, String> {
    let mut notes = Vec::new();
    for (i, (name, text)) in fixtures::ALL.iter().enumerate() {
        let s = oracle::solid(text);
        let (v_vox, a_vox) = voxel_oracle()[i];
        let (v, a) = (scad::exact_volume(&s), scad::exact_area(&s));
        let layer = a * VOXEL;
        let (got, vox, want) = if measure == "volume" { (v, v_vox, exact[i]) } else { (a, a_vox, exact[i]) };
        ensure(got == want, || format!("{name}: exact {measure} {got}, expected {want}"))?;
        ensure((got - vox).abs() <= layer, || {
            format!("{name}: {measure} {got} vs voxel oracle {vox} exceeds one layer ({layer})")
        })?;
        notes.push(format!("{got}~{vox:.1}"));
    }
    Ok(notes.join(", "))
}

fn criterion_1() -> Outcome {
    let col = column_at_four_decimals("Vol.", ["0.5000", "0.7222", "1.0000", "1.0000"], |s| s.volumetric)?;
    let v = oracle_check("volume", [27000.0, 23000.0, 18000.0, 18000.0])?;
    Ok(format!("{col:?}; volumes {v}"))
}

fn criterion_2() -> Outcome {
    let col = column_at_four_decimals("Surf.", ["0.6562", "0.7500", "1.0000", "1.0000"], |s| s.surface)?;
    let a = oracle_check("area", [8600.0, 8000.0, 6400.0, 6400.0])?;
    Ok(format!("{col:?}; areas {a}"))
}

fn criterion_3() -> Outcome {
    let col = column_at_four_decimals("Dim.", ["0.8056", "0.8889", "1.0000", "1.0000"], |s| s.dimensional)?;
    Ok(format!("{col:?}"))
}

fn criterion_4() -> Outcome {
    let expected = [33.1662, 14.1421, 22.3607, 0.0];
    let clouds: Vec<Vec<Vec3>> = fixtures::ALL.iter().map(|(_, t)| oracle::corner_points(&oracle::solid(t))).collect();
    let mut got = Vec::new();
    for (i, (m, r)) in models().iter().zip(reports()).enumerate() {
        let mut mesh_pts = m.mesh.vertices.clone();
        let mut probe_pts = clouds[i].clone();
        let key = |p: &Vec3| (p.x.to_bits(), p.y.to_bits(), p.z.to_bits());
        mesh_pts.sort_by_key(key);
        probe_pts.sort_by_key(key);
        ensure(mesh_pts == probe_pts, || format!("{}: mesh corners differ from probed corners", NAMES[i]))?;
        let brute = oracle::hausdorff_all_pairs(&clouds[i], &clouds[3]);
        let h = r.similarity.hausdorff;
        ensure((h - expected[i]).abs() <= 1e-4, || format!("{}: Hausdorff {h}, expected {}", NAMES[i], expected[i]))?;
        ensure((brute - h).abs() <= 1e-12, || format!("{}: brute force {brute} vs {h}", NAMES[i]))?;
        got.push(format!("{h:.6}"));
    }
    Ok(got.join(", "))
}

fn criterion_5() -> Outcome {
    let w = EvalOptions::default().similarity_weights;
    ensure(w.as_array() == [0.25, 0.25, 0.20, 0.15, 0.15], || format!("default weights {w:?}"))?;
    let mut got = Vec::new();
    for row in TABLE1 {
        let e = row.expected;
        let c = SimilarityComponents {
            volumetric: e.vol,
            surface: e.surf,
            dimensional: e.dim,
            pca_alignment: e.pca,
            icp_alignment: e.icp,
        };
        let s = final_similarity(&c, &w);
        ensure((s - e.gen).abs() <= 5e-4, || format!("{}: aggregate {s}, printed {}", row.label, e.gen))?;
        got.push(format!("{s:.5}"));
    }
    Ok(got.join(", "))
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> PointCloud {
    PointCloud::new(
        (0..n)
            .map(|_| Vec3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()) * scale)
            .collect(),
    )
}

fn criterion_6() -> Outcome {
    let m = models();
    let clouds: Vec<PointCloud> = m.iter().map(|x| geom::corner_point_cloud(&x.mesh).unwrap()).collect();
    let opts = IcpOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();

    // Self-alignment.
    for (c, name) in clouds.iter().zip(NAMES) {
        let sp = registration::pca_alignment_score(c, c).map_err(|e| e.to_string())?;
        ensure(sp == 1.0, || format!("{name}: S_p(x, x) = {sp}"))?;
    }
    for _ in 0..50 {
        let c = random_cloud(&mut rng, 20, 10.0);
        let sp = registration::pca_alignment_score(&c, &c).map_err(|e| e.to_string())?;
        ensure((sp - 1.0).abs() < 1e-15, || format!("random cloud S_p(x, x) = {sp}"))?;
    }

    // Score range and the rmse = 0 equivalence.
    let mut seen_zero = 0;
    for trial in 0..1000 {
        let n = rng.random_range(3..30);
        let scale = rng.random_range(0.1..50.0);
        let a = random_cloud(&mut rng, n, scale);
        let b = if trial % 10 == 0 {
            a.clone()
        } else {
            let (m, scale) = (rng.random_range(3..30), rng.random_range(0.1..50.0));
            random_cloud(&mut rng, m, scale)
        };
        let bounds = geom::point_cloud_bounds(&b).unwrap();
        let r = registration::icp_register(&a, &b, &opts).map_err(|e| e.to_string())?;
        let si = registration::icp_alignment_score(&r, &bounds).map_err(|e| e.to_string())?;
        ensure((0.0..=1.0).contains(&si), || format!("trial {trial}: S_i = {si}"))?;
        ensure((si == 1.0) == (r.rmse == 0.0), || format!("trial {trial}: S_i = {si} with rmse {}", r.rmse))?;
        ensure(r.rmse_history.windows(2).all(|w| w[1] <= w[0]), || format!("trial {trial}: rmse increased"))?;
        seen_zero += (r.rmse == 0.0) as usize;
    }
    ensure(seen_zero >= 100, || format!("only {seen_zero} exact self-matches"))?;

    // Recovery of known rigid motions, rotations up to 30 degrees.
    let mut recovered = 0;
    let mut total = 0;
    for (c, name) in clouds.iter().zip(NAMES) {
        let centre = c.centroid().unwrap();
        let mut failed = 0;
        for deg in [5.0f64, 10.0, 15.0, 20.0, 25.0, 30.0] {
            for _ in 0..8 {
                let axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), deg.to_radians());
                let shift = Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let known = RigidTransform {
                    rotation: *rot.matrix(),
                    translation: centre - rot * centre + shift,
                };
                let target = known.transform_cloud(c);
                let r = registration::icp_register(c, &target, &opts).map_err(|e| e.to_string())?;
                ensure(r.rmse_history.windows(2).all(|w| w[1] <= w[0]), || format!("{name}: rmse increased"))?;
                total += 1;
                if r.rmse < 1e-6 {
                    recovered += 1;
                } else {
                    failed += 1;
                }
            }
        }
        if failed > 0 {
            failures.push(format!("{name}: {failed}/48 motions not recovered"));
        }
    }
    if failures.is_empty() {
        Ok(format!("{recovered}/{total} rigid motions recovered; S_i range and rmse monotonicity hold over 1000 trials"))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_7() -> Outcome {
    let m = models();
    let mut problems = Vec::new();
    let approx: Vec<f64> = m.iter().map(|x| complexity::topological_complexity(&x.mesh)).collect();
    for (v, name) in approx.iter().zip(NAMES) {
        if *v != 0.0 {
            problems.push(format!("{name}: C_t = {v}"));
        }
    }
    let cube = TriangleMesh::cuboid(&Aabb::from_corners(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0)));
    ensure(complexity::topological_complexity(&cube) == 2.0, || "cube C_t != 2".into())?;
    let cs = complexity::surface_complexity(&m[3].mesh).map_err(|e| e.to_string())?;
    ensure((cs - 0.355556).abs() <= 1e-6, || format!("C_s(model d) = {cs}"))?;
    for (x, name) in m.iter().zip(NAMES) {
        let a = complexity::surface_complexity(&x.mesh).map_err(|e| e.to_string())?;
        let b = complexity::surface_complexity(&x.mesh.scaled(2.0)).map_err(|e| e.to_string())?;
        ensure((b - a / 2.0).abs() <= 1e-9 * a, || format!("{name}: C_s {a} -> {b} under x2 scaling"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let f = [rng.random_range(0.0..100.0), rng.random_range(0.0..5.0), rng.random_range(-4.0..4.0)];
        let w1: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..10.0)).collect();
        let w2: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..10.0)).collect();
        let t = rng.random_range(-3.0..3.0);
        let mix: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + t * b).collect();
        let c = |w: &[f64]| complexity::composite_complexity(f[0], f[1], f[2], &ComplexityWeights::from_slice(w).unwrap());
        let (lhs, rhs) = (c(&mix), c(&w1) + t * c(&w2));
        ensure((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()), || format!("composite not linear: {lhs} vs {rhs}"))?;
    }
    let summary = format!("C_t = {approx:?}, cube 2, C_s(d) = {cs:.6}");
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", problems.join("; ")))
    }
}

fn mutate(rng: &mut ChaCha8Rng, seeds: &[Vec<u8>]) -> Vec<u8> {
    match rng.random_range(0..5) {
        0 => {
            let mut b = vec![0u8; rng.random_range(0..400)];
            rng.fill_bytes(&mut b);
            if rng.random_bool(0.3) && b.len() >= 5 {
                b[..5].copy_from_slice(b"solid");
            }
            b
        }
        1 => {
            let s = &seeds[rng.random_range(0..seeds.len())];
            s[..rng.random_range(0..=s.len())].to_vec()
        }
        2 => {
            let mut s = seeds[rng.random_range(0..seeds.len())].clone();
            for _ in 0..rng.random_range(1..20) {
                let i = rng.random_range(0..s.len());
                s[i] = rng.random();
            }
            s
        }
        3 => {
            let mut s = seeds[rng.random_range(0..seeds.len())].clone();
            if s.len() >= 84 && !s.starts_with(b"solid") {
                let count: u32 = rng.random();
                s[80..84].copy_from_slice(&count.to_le_bytes());
            } else {
                let cut = rng.random_range(0..s.len());
                s.splice(cut..cut, b" facet vertex 1e999 nan endloop ".iter().copied());
            }
            s
        }
        _ => {
            let mut s = seeds[rng.random_range(0..seeds.len())].clone();
            let i = rng.random_range(0..s.len());
            let j = rng.random_range(i..s.len());
            s.drain(i..j);
            s
        }
    }
}

fn criterion_8() -> Outcome {
    let mut seeds = Vec::new();
    for (x, name) in models().iter().zip(NAMES) {
        let doc = StlDocument::from_mesh(&x.mesh, name);
        for format in [StlFormat::Binary, StlFormat::Ascii] {
            let bytes = stl::write_stl(&doc, format);
            let back = stl::parse_stl(&bytes).map_err(|e| format!("{name} {format:?}: {e}"))?;
            ensure(back.facets == doc.facets, || format!("{name} {format:?}: facets changed"))?;
            let mesh = geom::weld_vertices(&back.to_soup(), geom::DEFAULT_WELD_TOLERANCE);
            let v = geom::mesh_volume(&mesh).map_err(|e| e.to_string())?;
            ensure((v - x.volume).abs() <= 0.01, || format!("{name} {format:?}: volume {v} vs {}", x.volume))?;
            seeds.push(bytes);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cases = 10_000;
    let (mut ok, mut errs) = (0, 0);
    for i in 0..cases {
        let input = mutate(&mut rng, &seeds);
        match catch_unwind(|| stl::parse_stl(&input)) {
            Ok(Ok(_)) => ok += 1,
            Ok(Err(_)) => errs += 1,
            Err(_) => return Err(format!("parser panicked on fuzz case {i}")),
        }
    }
    Ok(format!("8 round trips exact; {cases} fuzz cases: {ok} parsed, {errs} structured errors"))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut args = vec!["cadfidelity".to_string(), "trend".to_string()];
    let mut paths = Vec::new();
    for (name, text) in fixtures::ALL {
        let p = dir.path().join(name);
        std::fs::write(&p, text).map_err(|e| e.to_string())?;
        paths.push(p);
    }
    args.push(paths[3].display().to_string());
    for (label, p) in ["a", "b", "c", "d"].iter().zip(&paths) {
        args.push(format!("{label}={}", p.display()));
    }
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cadfidelity::cli::run(&args, &mut out, &mut err);
    ensure(code == 0, || format!("trend exited {code}: {}", String::from_utf8_lossy(&err)))?;
    let series: TrendSeries = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    for metric in ["volumetric", "surface", "dimensional"] {
        let s = series.series(metric);
        ensure(s.windows(2).all(|w| w[1] >= w[0]), || format!("{metric} not nondecreasing: {s:?}"))?;
    }
    let h = series.series("hausdorff");
    let expected = [33.1662, 14.1421, 22.3607, 0.0];
    ensure(h.iter().zip(expected).all(|(a, b)| (a - b).abs() <= 1e-4), || format!("Hausdorff sequence {h:?}"))?;
    Ok(format!("Vol/Surf/Dim nondecreasing; Hausdorff {:?}", h.iter().map(|x| fmt4(*x)).collect::<Vec<_>>()))
}

fn criterion_10() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_cadfidelity"))
        .args(["--format", "md", "repro-table1"])
        .current_dir(std::env::temp_dir())
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.code() == Some(0), || {
        format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    let summary = stdout.lines().find(|l| l.contains("checks passed")).unwrap_or("").to_string();
    Ok(format!("exit 0, {summary}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("volume scores and exact volumes", criterion_1),
        ("surface scores and exact areas", criterion_2),
        ("dimension scores", criterion_3),
        ("Hausdorff distances", criterion_4),
        ("aggregate score with default weights", criterion_5),
        ("PCA and ICP properties", criterion_6),
        ("complexity properties", criterion_7),
        ("STL round trip and fuzzing", criterion_8),
        ("trend series", criterion_9),
        ("repro-table1 end to end", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{ms} ms]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{ms} ms]: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.2} s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
