//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits non-zero when the set of failing criteria differs from
//! [`KNOWN_FAILING`]. Set `SSMDS_ACCEPTANCE_FULL=1` to include the long
//! MDS sweep in criterion 11.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{rngs::StdRng, Rng, RngCore, SeedableRng};
use ssmds_core::codec::{bandwidth_formula, encode, plan_repair, repair_with_plan, taps_for};
use ssmds_core::codes::{
    assemble, build_c1, build_c3, build_c3_with_generator, build_c4_r2, build_c5, build_custom, build_from_config,
    build_iyb2, build_long_c4p, build_yb2, transform, Assignment, CodeConfig, ConstructedCode, Projection,
    SearchOptions,
};
use ssmds_core::gf::{Fe, Field};
use ssmds_core::linalg::{Mat, SparseMat};
use ssmds_core::verify::{
    audit_bandwidth, check_assignment, check_lemma1, check_mds, check_mds_decomposed, check_optimal_update,
    check_reconstruction, check_repair, VerifyReport, Witness,
};

/// Criteria that fail by construction; see the README.
const KNOWN_FAILING: &[usize] = &[8];

const FULL_ENV: &str = "SSMDS_ACCEPTANCE_FULL";

type Outcome = Result<String, String>;
type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(label: &str, start: Instant, limit: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent <= limit, || format!("{label} took {spent:.2?}, limit {limit:?}"))
}

fn first_witness(r: &VerifyReport) -> String {
    r.witnesses.first().map_or_else(|| "none".into(), |w| serde_json::to_string(w).unwrap_or_default())
}

fn yb1() -> ConstructedCode {
    let cfg: CodeConfig = serde_json::from_str(r#"{"family":"YB1","r":2,"n_prime":3}"#).unwrap();
    build_from_config(&cfg).unwrap()
}

fn example1() -> ConstructedCode {
    build_c1(3, 2, 12, None).unwrap()
}

fn example2() -> ConstructedCode {
    build_c5(3, 2, 12, None).unwrap()
}

fn dual_oracle_instances() -> Vec<(&'static str, ConstructedCode)> {
    vec![
        ("C1(3,2,12)", example1()),
        ("C5(3,2,12)", example2()),
        ("C3(4,2,8)", build_c3(4, 2, 8, None).unwrap()),
        ("C4(m=2,n=12)", build_c4_r2(2, 12, None).unwrap()),
    ]
}

// diagonal exponent of c per node, plus the rows scaled by c^6
const C1_DISPLAY: [(i64, [usize; 4]); 12] = [
    (0, [4, 5, 6, 7]),
    (1, [2, 3, 6, 7]),
    (2, [1, 3, 5, 7]),
    (0, [0, 1, 2, 3]),
    (1, [0, 1, 4, 5]),
    (2, [0, 2, 4, 6]),
    (3, [4, 5, 6, 7]),
    (4, [2, 3, 6, 7]),
    (5, [1, 3, 5, 7]),
    (3, [0, 1, 2, 3]),
    (4, [0, 1, 4, 5]),
    (5, [0, 2, 4, 6]),
];

const C5_DISPLAY: [[i64; 8]; 12] = [
    [0, 0, 0, 0, 1, 1, 1, 1],
    [2, 2, 3, 3, 2, 2, 3, 3],
    [4, 5, 4, 5, 4, 5, 4, 5],
    [1, 1, 1, 1, 0, 0, 0, 0],
    [3, 3, 2, 2, 3, 3, 2, 2],
    [5, 4, 5, 4, 5, 4, 5, 4],
    [6, 6, 6, 6, 7, 7, 7, 7],
    [8, 8, 9, 9, 8, 8, 9, 9],
    [10, 11, 10, 11, 10, 11, 10, 11],
    [7, 7, 7, 7, 6, 6, 6, 6],
    [9, 9, 8, 8, 9, 9, 8, 8],
    [11, 10, 11, 10, 11, 10, 11, 10],
];

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let code = example1();
    let f = code.field().clone();
    ensure(f.order() == 13 && code.assignment().generator == Fe(2), || "expected GF(13) with c = 2".into())?;
    let delta = f.pow(Fe(2), 6).unwrap();
    for (i, (e, rows)) in C1_DISPLAY.iter().enumerate() {
        let base = f.pow(Fe(2), *e).unwrap();
        let diag: Vec<Fe> = (0..8).map(|a| if rows.contains(&a) { f.mul(delta, base) } else { base }).collect();
        ensure(code.generator(i) == SparseMat::diag(&diag), || format!("A_{i} differs"))?;
    }
    let sums: Vec<Vec<u32>> = (0..4).map(|k| (0..8).map(|a| u32::from(a == k || a == k + 4)).collect()).collect();
    let pair_sum = Mat::from_rows(&f, &sums).unwrap();
    for j in 1..12 {
        let ok = match code.repair_matrix(0, j) {
            Projection::Identity(8) => [3, 6, 9].contains(&j),
            other => ![3, 6, 9].contains(&j) && other.to_dense(&f) == pair_sum,
        };
        ensure(ok, || format!("R_(0,{j}) differs"))?;
    }
    for t in 0..2 {
        ensure(code.select_matrix(0, t).to_dense(&f) == pair_sum, || format!("S_(0,{t}) differs"))?;
    }
    within("example 1", start, Duration::from_millis(100))?;
    Ok(format!("12 diagonal generators and node 0 R/S match ({:.1?})", start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let code = example2();
    let f = code.field().clone();
    for (i, row) in C5_DISPLAY.iter().enumerate() {
        let diag: Vec<Fe> = row.iter().map(|&e| f.pow(Fe(2), e).unwrap()).collect();
        ensure(code.generator(i) == SparseMat::diag(&diag), || format!("A_{i} differs"))?;
    }
    within("example 2", start, Duration::from_millis(100))?;
    Ok(format!("A_0..A_11 match over GF({}) ({:.1?})", f.order(), start.elapsed()))
}

fn criterion_3() -> Outcome {
    let mut parts = Vec::new();
    let expected_q = [13, 13, 3, 9];
    for ((name, code), q) in dual_oracle_instances().into_iter().zip(expected_q) {
        let start = Instant::now();
        ensure(code.field().order() == q, || format!("{name}: q = {}, expected {q}", code.field().order()))?;
        let det = check_mds(&code).map_err(|e| format!("{name}: {e}"))?;
        let rec = check_reconstruction(&code, 0xacce).map_err(|e| format!("{name}: {e}"))?;
        ensure(det.passed, || format!("{name}: singular sub-block {}", first_witness(&det)))?;
        ensure(rec.passed, || format!("{name}: reconstruction failed {}", first_witness(&rec)))?;
        within(name, start, Duration::from_secs(5))?;
        parts.push(format!("{name} {}+{} subsets", det.checked, rec.checked));
    }
    Ok(parts.join(", "))
}

fn criterion_4() -> Outcome {
    let checks: [(&str, ConstructedCode, usize, &str); 4] = [
        ("C1(3,2,12)", example1(), 56, "14/11"),
        ("C5(3,2,12)", example2(), 56, "14/11"),
        ("C4(m=2,n=12)", build_c4_r2(2, 12, None).unwrap(), 24, "12/11"),
        ("C3(4,2,8)", build_c3(4, 2, 8, None).unwrap(), 32, "8/7"),
    ];
    for (name, code, gamma, ratio) in &checks {
        for i in 0..code.n() {
            let plan = plan_repair(code, i).map_err(|e| format!("{name} node {i}: {e}"))?;
            let bw = bandwidth_formula(code.spec(), i);
            ensure(plan.gamma == *gamma && bw.gamma == *gamma, || {
                format!("{name} node {i}: plan {} formula {}, expected {gamma}", plan.gamma, bw.gamma)
            })?;
            ensure(bw.ratio.to_string() == *ratio, || format!("{name} node {i}: ratio {}", bw.ratio))?;
        }
        let audit = audit_bandwidth(code);
        ensure(audit.passed, || format!("{name}: audit {}", first_witness(&audit)))?;
    }
    Ok("C1/C5 download 56 = (1+3/11)*44, C4 24 per node (ratio 12/11), C3 32 per node".into())
}

fn criterion_5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut total = 0;
    for (name, code) in dual_oracle_instances() {
        let start = Instant::now();
        let q = code.field().order();
        let data: Vec<Vec<Fe>> = (0..code.k())
            .map(|_| (0..code.sub_packetization()).map(|_| Fe(rng.gen_range(0..q) as u16)).collect())
            .collect();
        let word = encode(&code, &data).map_err(|e| format!("{name}: {e}"))?;
        for i in 0..code.n() {
            let plan = plan_repair(&code, i).map_err(|e| format!("{name} node {i}: {e}"))?;
            let taps = taps_for(&code, &plan, &word);
            let fixed = repair_with_plan(&code, &plan, &taps).map_err(|e| format!("{name} node {i}: {e}"))?;
            ensure(fixed == word.columns[i], || format!("{name} node {i}: wrong column"))?;
            for ((j, beta), tap) in plan.betas().into_iter().zip(&taps) {
                ensure(tap.helper == j && tap.symbols_read() == beta, || {
                    format!("{name} node {i}: helper {j} read {} of declared {beta}", tap.symbols_read())
                })?;
            }
            total += 1;
        }
        within(name, start, Duration::from_secs(5))?;
    }
    Ok(format!("{total} node repairs exact, access counts equal declared beta"))
}

fn criterion_6() -> Outcome {
    let bases = [
        ("YB1(3,2)", yb1()),
        ("iYB2(4,2)", build_iyb2(4, 2, Some(Field::new(3).unwrap())).unwrap()),
        ("C'4(r=2,m=2)", build_long_c4p(2, 2, None, None, None).unwrap()),
    ];
    for (name, code) in &bases {
        let report = check_repair(code);
        ensure(report.passed, || format!("{name}: {}", first_witness(&report)))?;
        for i in 0..code.n() {
            let bw = bandwidth_formula(code.spec(), i);
            let plan = plan_repair(code, i).map_err(|e| format!("{name} node {i}: {e}"))?;
            ensure(plan.gamma == bw.gamma_star && bw.gamma == bw.gamma_star, || {
                format!("{name} node {i}: gamma {} vs optimum {}", plan.gamma, bw.gamma_star)
            })?;
        }
    }
    Ok("all nodes repair at the cut-set optimum".into())
}

fn criterion_7() -> Outcome {
    for (name, code) in [("C1", example1()), ("C5", example2())] {
        let r = check_optimal_update(&code);
        ensure(r.passed, || format!("{name}: {}", first_witness(&r)))?;
    }
    let c3 = check_optimal_update(&build_c3(4, 2, 8, None).unwrap());
    ensure(!c3.passed, || "C3 unexpectedly has diagonal blocks".into())?;
    let witness = c3.witnesses.first().ok_or("C3 failed without a witness")?;
    ensure(matches!(witness, Witness::OffDiagonal { .. }), || format!("C3 witness {witness:?}"))?;
    Ok(format!("C1, C5 pass; C3 rejected with {}", first_witness(&c3)))
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut passes = Vec::new();
    for (name, code) in [("C1", example1()), ("C3", build_c3(4, 2, 8, None).unwrap()), ("C5", example2())] {
        let r = check_lemma1(&code);
        if r.passed {
            passes.push(name);
        } else {
            failures.push(format!("{name} ({} failures, first {})", r.total_failures, first_witness(&r)));
        }
    }
    if failures.is_empty() {
        Ok("C1, C3, C5 commute with nonsingular differences".into())
    } else {
        Err(format!("passed: {}; failed: {}", passes.join(", "), failures.join("; ")))
    }
}

fn criterion_9() -> Outcome {
    let bases = [
        ("YB1", yb1()),
        ("YB2", build_yb2(4, 2, None).unwrap()),
        ("iYB2", build_iyb2(4, 2, None).unwrap()),
        ("C'4", build_long_c4p(2, 2, None, None, None).unwrap()),
    ];
    for (name, base) in &bases {
        let (r, n) = (base.r(), base.n());
        let ext = transform(base, n, &Assignment::ones(r, n)).map_err(|e| format!("{name}: {e}"))?;
        for t in 0..r {
            for i in 0..n {
                ensure(ext.block_dense(t, i) == base.block_dense(t, i), || format!("{name}: block ({t},{i})"))?;
            }
        }
    }
    Ok("YB1, YB2, iYB2, C'4 reproduced entrywise".into())
}

fn criterion_10(tmp: &Path) -> Outcome {
    let start = Instant::now();
    let opts = SearchOptions { budget: 100_000, seed: 2024 };
    let code = build_custom(3, 2, 6, None, opts).map_err(|e| e.to_string())?;
    ensure(code.field().order() == 43, || format!("q = {}", code.field().order()))?;
    let record = code.assignment().search.clone().ok_or("no search record")?;
    let mds = check_mds(&code).map_err(|e| e.to_string())?;
    ensure(mds.passed, || format!("found code is not MDS: {}", first_witness(&mds)))?;

    let path = tmp.join("assignment.json");
    fs::write(&path, serde_json::to_string_pretty(code.assignment()).unwrap()).map_err(|e| e.to_string())?;
    let stored: Assignment = serde_json::from_str(&fs::read_to_string(&path).unwrap()).map_err(|e| e.to_string())?;
    let again = assemble(code.spec().clone(), code.field().clone(), stored).map_err(|e| e.to_string())?;
    ensure(again.blocks() == code.blocks(), || "reloaded blocks differ".into())?;
    ensure(check_mds(&again).map_err(|e| e.to_string())?.passed, || "reloaded code is not MDS".into())?;
    let rerun = build_custom(3, 2, 6, None, opts).map_err(|e| e.to_string())?;
    ensure(rerun.assignment() == code.assignment(), || "search is not deterministic".into())?;
    within("search", start, Duration::from_secs(60))?;
    Ok(format!("q = 43, seed {} found in {} trials, reloaded and re-verified", record.seed, record.trials))
}

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let auto = build_c3(12, 3, 24, None).map_err(|e| e.to_string())?;
    ensure(auto.field().order() == 7, || format!("auto-selected q = {}", auto.field().order()))?;
    let code = build_c3_with_generator(12, 3, 24, None, 2).map_err(|e| e.to_string())?;
    ensure(code.assignment().generator == Fe(2), || "generator is not 2".into())?;
    let assignment = check_assignment(&code);
    ensure(assignment.passed, || format!("assignment: {}", first_witness(&assignment)))?;
    let repair = check_repair(&code);
    ensure(repair.passed, || format!("repair: {}", first_witness(&repair)))?;
    let mut note = format!("q = 7, c = 2, N = {}, repair and assignment pass", code.sub_packetization());
    if std::env::var_os(FULL_ENV).is_some() {
        let mds = check_mds_decomposed(&code).map_err(|e| e.to_string())?;
        ensure(mds.passed, || format!("mds: {}", first_witness(&mds)))?;
        note += &format!(", all {} sub-blocks nonsingular", mds.checked);
    } else {
        note += &format!(", full MDS sweep skipped (set {FULL_ENV}=1)");
    }
    Ok(format!("{note} ({:.1?})", start.elapsed()))
}

fn ssmds(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ssmds")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!("ssmds {}: {}", args[0], String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn criterion_12(tmp: &Path) -> Outcome {
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let (bundle, shards, input, output) =
        (tmp.join("bundle"), tmp.join("shards"), tmp.join("input.bin"), tmp.join("output.bin"));
    let mut rng = StdRng::seed_from_u64(12);
    let mut original = vec![0u8; 1 << 20];
    rng.fill_bytes(&mut original);
    fs::write(&input, &original).map_err(|e| e.to_string())?;

    ssmds(&["build", "--config", r#"{"family":"C1","n":12,"r":2,"n_prime":3}"#, "--out", &s(&bundle)])?;
    ssmds(&["encode", "--bundle", &s(&bundle), "--in", &s(&input), "--out", &s(&shards)])?;
    for node in 0..12 {
        let shard = shards.join(format!("node_{node:03}.shard"));
        let before = fs::read(&shard).map_err(|e| e.to_string())?;
        ssmds(&["kill", "--shards", &s(&shards), "--node", &node.to_string()])?;
        let report = ssmds(&[
            "repair",
            "--bundle",
            &s(&bundle),
            "--shards",
            &s(&shards),
            "--node",
            &node.to_string(),
            "--report",
            "json",
        ])?;
        let report: serde_json::Value = serde_json::from_str(&report).map_err(|e| e.to_string())?;
        ensure(report["downloaded_per_stripe"] == 56, || format!("node {node}: report {report}"))?;
        ensure(fs::read(&shard).map_err(|e| e.to_string())? == before, || format!("node {node}: shard differs"))?;
    }
    let victim = rng.gen_range(0..12).to_string();
    ssmds(&["kill", "--shards", &s(&shards), "--node", &victim])?;
    ssmds(&["repair", "--bundle", &s(&bundle), "--shards", &s(&shards), "--node", &victim])?;
    ssmds(&["decode", "--bundle", &s(&bundle), "--shards", &s(&shards), "--out", &s(&output)])?;
    ensure(fs::read(&output).map_err(|e| e.to_string())? == original, || "decoded file differs".into())?;
    Ok("1 MiB: every node killed and repaired bit-exactly at 56 symbols per stripe, decode identical".into())
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temp dir");
    let (t10, t12) = (tmp.path().join("c10"), tmp.path().join("c12"));
    fs::create_dir_all(&t10).unwrap();
    fs::create_dir_all(&t12).unwrap();
    let criteria: Vec<Criterion> = vec![
        ("worked example, C1 over GF(13)", Box::new(criterion_1)),
        ("worked example, C5 over GF(13)", Box::new(criterion_2)),
        ("MDS by determinants and by reconstruction", Box::new(criterion_3)),
        ("repair bandwidth", Box::new(criterion_4)),
        ("repair from taps with access audit", Box::new(criterion_5)),
        ("optimal repair of the base codes", Box::new(criterion_6)),
        ("optimal update", Box::new(criterion_7)),
        ("commuting generators with nonsingular differences", Box::new(criterion_8)),
        ("all-ones transformation is the identity", Box::new(criterion_9)),
        ("seeded coefficient search", Box::new(move || criterion_10(&t10))),
        ("C3(12,3,24) over GF(7)", Box::new(criterion_11)),
        ("CLI round trip", Box::new(move || criterion_12(&t12))),
    ];
    let mut failed = Vec::new();
    for (idx, (title, run)) in criteria.iter().enumerate() {
        let n = idx + 1;
        match run() {
            Ok(detail) => println!("PASS {n:>2} {title}: {detail}"),
            Err(detail) => {
                let note = if KNOWN_FAILING.contains(&n) { " [known]" } else { "" };
                println!("FAIL {n:>2} {title}{note}: {detail}");
                failed.push(n);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if failed == KNOWN_FAILING {
        ExitCode::SUCCESS
    } else {
        println!("failing set {failed:?} differs from the known set {KNOWN_FAILING:?}");
        ExitCode::FAILURE
    }
}
