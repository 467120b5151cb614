//! Acceptance gate: runs every criterion and prints one PASS/FAIL line each.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stabkit_cli::Report;
use stabkit_core::cy2::{build_support_q, check_p0_membership, compute_c, enumerate_roots_near, CKind, MembershipReport};
use stabkit_core::deformation::{charge_at, continuity_check, find_walls, jordan_holder, lift_path, Status, Wall};
use stabkit_core::hn::{hn_filtration, is_semistable};
use stabkit_core::lattice::{kernel, negative_definite_witness, signature};
use stabkit_core::oracle::{box_classes, certified_form, check_polygon_bounds, greedy_hn};
use stabkit_core::quadform_ext::{compose, radical, reduce_and_lift};
use stabkit_core::quiver::{FpMatrix, Quiver, DEFAULT_BUDGET};
use stabkit_core::rational::{rat, ratio};
use stabkit_core::slicing::{make_prestability, phase};
use stabkit_core::{
    CentralCharge, Class, DeformationPath, KernelData, LiftReport, MukaiLattice, QComplex, QMatrix, QuadraticForm,
    Rational, Representation, ShiftedObject,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

// ------------------------------------------------------------------ fixtures

fn a2_objects() -> (Representation, Representation, Representation) {
    let q = Quiver::linear_a(2);
    let s1 = Representation::simple(q.clone(), 2, 0);
    let s2 = Representation::simple(q.clone(), 2, 1);
    let p1 = Representation::new(q, 2, vec![1, 1], vec![FpMatrix::identity(2, 1)]).unwrap();
    (s1, s2, p1)
}

fn a2_path() -> DeformationPath {
    let z0 = CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::new(rat(-1), ratio(1, 2))]);
    let w = QMatrix::from_i64(&[&[0, 0], &[0, 1]]);
    DeformationPath::affine(z0, w).unwrap()
}

fn xy() -> QuadraticForm {
    QuadraticForm::hyperbolic_xy()
}

// ---------------------------------------------------------------- criteria

fn oracle_sweep() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut n = 0;
    for (name, corpus) in common::corpora() {
        for r in corpus.iter().filter(|r| !r.is_zero()) {
            for _ in 0..5 {
                let z = common::random_charge(&mut rng, r.dims().len());
                let f = hn_filtration(r, &z, DEFAULT_BUDGET).map_err(e)?.factor_classes();
                let g = greedy_hn(r, &z, DEFAULT_BUDGET).map_err(e)?;
                ensure(f == g, || format!("{name} {:?}: polygon {f:?} vs oracle {g:?}", r.dims()))?;
                n += 1;
            }
        }
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("{n} comparisons in {:.2?}", start.elapsed()))
}

fn bounds_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pool: Vec<_> = common::corpora().into_iter().flat_map(|(_, c)| c).filter(|r| !r.is_zero()).collect();
    let instances = 1000;
    for i in 0..instances {
        let r = pool.choose(&mut rng).unwrap();
        let n = r.dims().len();
        let z = common::random_charge(&mut rng, n);
        let q = certified_form(&z, &box_classes(n, 2)).map_err(e)?;
        let kd = KernelData::new(&q, &z).map_err(e)?;
        let rep = check_polygon_bounds(r, &z, &kd, DEFAULT_BUDGET, 1e-9).map_err(e)?;
        ensure(rep.all(), || format!("instance {i}: {}", rep.detail.clone().unwrap_or_default()))?;
    }
    Ok(format!("{instances} instances, 0 violations"))
}

fn a2_wall() -> Outcome {
    let start = Instant::now();
    let (s1, s2, p1) = a2_objects();
    let path = a2_path();
    let q = xy();

    let walls = find_walls(&p1, &path, DEFAULT_BUDGET).map_err(e)?;
    ensure(walls.len() == 1, || format!("{} walls", walls.len()))?;
    let w = &walls[0];
    ensure(w.is_exact() && w.t_value == ratio(1, 2), || format!("wall at {}", w.t_value))?;
    ensure(w.destabilizer_class == Class(vec![0, 1]), || format!("destabilizer {}", w.destabilizer_class))?;
    ensure(
        w.before == Some(Status::Unstable) && w.at == Status::StrictlySemistable && w.after == Some(Status::Stable),
        || format!("statuses {:?} / {:?} / {:?}", w.before, w.at, w.after),
    )?;
    let semi = |t: Rational| is_semistable(&p1, &charge_at(&path, &t).unwrap(), DEFAULT_BUDGET).unwrap();
    ensure(!semi(ratio(1, 4)) && semi(ratio(1, 2)) && semi(ratio(3, 4)), || "brute-force status disagrees".into())?;

    let jh = jordan_holder(&p1, &charge_at(&path, &ratio(1, 2)).map_err(e)?, DEFAULT_BUDGET).map_err(e)?;
    ensure(jh.factor_classes == vec![Class(vec![0, 1]), Class(vec![1, 0])], || format!("JH {:?}", jh.factor_classes))?;

    let corpus = vec![s1, s2, p1];
    let sigma0 = make_prestability(&path.z0, &corpus, DEFAULT_BUDGET).map_err(e)?;
    let lift = lift_path(&sigma0, &q, &path, 8, DEFAULT_BUDGET).map_err(e)?;
    ensure(lift.ok && lift.support_preserved, || "lift reports a failure".into())?;
    // independent support check on every sampled parameter, walls included
    let mut ts: Vec<Rational> = (0..=8).map(|k| ratio(k, 8)).collect();
    ts.push(ratio(1, 2));
    for t in &ts {
        let zt = charge_at(&path, t).map_err(e)?;
        for r in &corpus {
            if is_semistable(r, &zt, DEFAULT_BUDGET).map_err(e)? {
                let v = q.value_class(&r.dimension_vector());
                ensure(v >= rat(0), || format!("Q({}) = {v} at t = {t}", r.dimension_vector()))?;
            }
        }
    }
    ensure(lift.grid.iter().any(|p| p.t == ratio(1, 2)), || "wall missing from the lift grid".into())?;

    let kb = kernel(&charge_at(&path, &ratio(1, 2)).map_err(e)?);
    ensure(kb.len() == 1 && kb[0][0] == -kb[0][1].clone() && kb[0][0] != rat(0), || format!("Ker Z_1/2 = {kb:?}"))?;
    let qk = q.value_class(&Class(vec![1, -1]));
    ensure(qk == rat(-1), || format!("Q(1,-1) = {qk}"))?;
    within(Duration::from_secs(5), start)?;
    Ok(format!("wall t = 1/2, JH {{(1,0),(0,1)}}, Q(1,-1) = -1, {:.2?}", start.elapsed()))
}

/// `d′` from the greedy oracle's factor phases.
fn oracle_dprime(z0: &CentralCharge, zt: &CentralCharge, sample: &[Representation]) -> f64 {
    let mut d: f64 = 0.0;
    for r in sample {
        let ve = r.dimension_vector();
        if !is_semistable(r, z0, DEFAULT_BUDGET).unwrap() {
            continue;
        }
        let phi = phase(z0, &ve).unwrap().value();
        let psi: Vec<f64> =
            greedy_hn(r, zt, DEFAULT_BUDGET).unwrap().iter().map(|c| phase(zt, c).unwrap().value()).collect();
        let hi = psi.iter().cloned().fold(f64::MIN, f64::max);
        let lo = psi.iter().cloned().fold(f64::MAX, f64::min);
        d = d.max(hi - phi).max(phi - lo);
    }
    d
}

fn continuity() -> Outcome {
    let (s1, s2, p1) = a2_objects();
    let path = a2_path();
    let q = xy();
    let sample_reps = vec![s1, s2, p1];
    let sample: Vec<ShiftedObject> = sample_reps.iter().cloned().map(ShiftedObject::new).collect();
    let sigma0 = make_prestability(&path.z0, &sample_reps, DEFAULT_BUDGET).map_err(e)?;
    let mut parts = Vec::new();
    for k in 1..=3 {
        let t = ratio(k, 8);
        let rep = continuity_check(&sigma0, &path, &t, &sample, Some(&q), DEFAULT_BUDGET).map_err(e)?;
        let tf = k as f64 / 8.0;
        let bound = tf.asin() / std::f64::consts::PI;
        let oracle = oracle_dprime(&path.z0, &charge_at(&path, &t).map_err(e)?, &sample_reps);
        ensure((rep.d_prime - oracle).abs() < 1e-12, || format!("t = {t}: d′ {} vs oracle {oracle}", rep.d_prime))?;
        ensure(rep.d_prime <= bound + 1e-9, || format!("t = {t}: d′ {} > {bound}", rep.d_prime))?;
        let linear = tf / std::f64::consts::PI;
        let flag = if rep.d_prime > linear { " flagged" } else { "" };
        ensure(rep.flagged == (rep.d_prime > linear), || format!("t = {t}: flag mismatch"))?;
        parts.push(format!("t={t}: {:.4} ≤ {bound:.4}{flag}", rep.d_prime));
    }
    Ok(parts.join(", "))
}

fn reductions() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let null = rng.gen_range(0..=2);
        let pos = rng.gen_range(0..=(2 - null).min(1));
        let m = rng.gen_range((null + pos).max(2)..=6);
        let (q, z) = common::random_pair(&mut rng, m, null, pos);
        ensure(radical(&q).len() == null, || format!("case {case}: radical"))?;
        let steps = reduce_and_lift(&q, &z).map_err(e)?;
        let (mut cq, mut cz) = (q.clone(), z.clone());
        for s in &steps {
            ensure(s.restricts_to(&cq, &cz), || format!("case {case}: step restriction"))?;
            let definite = negative_definite_witness(&s.q_bar, &kernel(&s.z_bar)).map_err(e)?.is_none();
            ensure(definite, || format!("case {case}: kernel not negative definite"))?;
            cq = s.q_bar.clone();
            cz = s.z_bar.clone();
        }
        let ext = compose(&q, &z, &steps);
        let rk = ext.target_rank();
        ensure(ext.restricts_to(&q, &z), || format!("case {case}: composite restriction"))?;
        ensure(signature(&ext.q_bar).as_tuple() == (2, rk - 2, 0), || format!("case {case}: signature"))?;
        ensure(radical(&ext.q_bar).is_empty(), || format!("case {case}: radical remains"))?;
        let definite = negative_definite_witness(&ext.q_bar, &kernel(&ext.z_bar)).map_err(e)?.is_none();
        ensure(definite, || format!("case {case}: final kernel"))?;
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("100 forms in {:.2?}", start.elapsed()))
}

fn cy2() -> Outcome {
    let start = Instant::now();
    let l = MukaiLattice::new(QMatrix::from_i64(&[&[0, 1], &[1, 0]])).map_err(e)?;
    let z = CentralCharge::from_values(&[QComplex::from_ints(0, 1), QComplex::from_ints(-1, 0)]);
    let half = z.scale(&ratio(1, 2));
    let mut parts = Vec::new();
    for (label, z, kind, c2) in [("sentinel", &z, CKind::Sentinel, rat(1)), ("attained", &half, CKind::Attained, ratio(1, 2))] {
        let c = compute_c(&l, z).map_err(e)?;
        ensure(c.kind == kind && c.c_squared == c2, || format!("{label}: C² = {}", c.c_squared))?;
        let cert = build_support_q(&l, z).map_err(e)?;
        let roots = enumerate_roots_near(&l, z, &rat(2)).map_err(e)?;
        ensure(roots.roots.len() == 2, || format!("{label}: {} roots", roots.roots.len()))?;
        for r in &roots.roots {
            let v = cert.q.value_class(r);
            ensure(v >= rat(0), || format!("{label}: Q({r}) = {v}"))?;
        }
        ensure(negative_definite_witness(&cert.q, &kernel(z)).map_err(e)?.is_none(), || format!("{label}: kernel"))?;
        parts.push(format!("{label} C = {}", c.exact()));
    }
    let zk = CentralCharge::from_values(&[QComplex::from_ints(1, 0), QComplex::from_ints(1, 0)]);
    let m = check_p0_membership(&l, &zk).map_err(e)?;
    let want = Some(vec![rat(1), rat(-1)]);
    ensure(!m.member && m.witness == want, || format!("kernel-root charge: member {} witness {:?}", m.member, m.witness))?;
    within(Duration::from_secs(5), start)?;
    parts.push("kernel root (1,-1) rejected".into());
    Ok(parts.join(", "))
}

// ------------------------------------------------------------- CLI runs

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

fn fixtures(dir: &Path) {
    let s = |d: &str, maps: &str| format!(r#"{{"field":2,"vertices":2,"arrows":[[0,1]],"dims":{d}{maps}}}"#);
    let p1 = s("[1,1]", r#","maps":{"0":[[1]]}"#);
    let sample = format!("[{},{},{}]", s("[1,0]", ""), s("[0,1]", ""), p1);
    write(dir, "p1.json", &p1);
    write(dir, "sample.json", &sample);
    write(dir, "z0.json", r#"[[-1,-1],[1,"1/2"]]"#);
    write(dir, "q.json", r#"[[0,"1/2"],["1/2",0]]"#);
    write(dir, "path.json", r#"{"Z0":[[-1,-1],[1,"1/2"]],"W":[[0,0],[0,1]]}"#);
    write(dir, "sigma.json", &format!(r#"{{"Z":[[-1,-1],[1,"1/2"]],"generators":{sample}}}"#));
    write(dir, "sigma2.json", &format!(r#"{{"Z":[[-1,-1],[1,"3/4"]],"generators":{sample}}}"#));
    write(dir, "mukai.json", r#"{"gram":[[0,1],[1,0]]}"#);
    write(dir, "zc.json", "[[0,-1],[1,0]]");
    write(dir, "lat.json", r#"{"rank":2,"Z":[[-1,-1],[1,"1/2"]],"Q":[[0,"1/2"],["1/2",0]]}"#);
}

fn run_cli(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_stabkit")).current_dir(dir).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn without_timing(s: &str) -> String {
    s.lines().filter(|l| !l.trim_start().starts_with("\"timing_ms\"")).collect::<Vec<_>>().join("\n")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    fixtures(dir.path());
    let commands: Vec<Vec<&str>> = vec![
        vec!["validate", "--input", "lat.json"],
        vec!["hn", "--input", "p1.json", "--charge", "z0.json"],
        vec!["walls", "--object", "p1.json", "--path", "path.json"],
        vec!["deform", "--sigma", "sigma.json", "--q", "q.json", "--path", "path.json", "--steps", "8"],
        vec!["dist", "--sigma1", "sigma.json", "--sigma2", "sigma2.json", "--sample", "sample.json"],
        vec!["qext", "--q", "q.json", "--z", "z0.json"],
        vec!["cy2", "--lattice", "mukai.json", "--z", "zc.json"],
    ];
    for args in &commands {
        let (c1, a) = run_cli(dir.path(), args);
        let (c2, b) = run_cli(dir.path(), args);
        ensure(c1 == 0 && c2 == 0, || format!("{}: exit {c1}/{c2}", args[0]))?;
        ensure(without_timing(&a) == without_timing(&b), || format!("{}: outputs differ", args[0]))?;
        let rep: Report = serde_json::from_str(&a).map_err(|x| format!("{}: {x}", args[0]))?;
        ensure(rep.to_json() == a, || format!("{}: report does not re-serialize identically", args[0]))?;
        match args[0] {
            "deform" => {
                let lift: LiftReport = serde_json::from_value(rep.result["lift"].clone()).map_err(e)?;
                ensure(serde_json::to_value(&lift).map_err(e)? == rep.result["lift"], || "lift report lossy".into())?;
                let t = &rep.result["wall_list"][0]["t"];
                ensure(t == "1/2", || format!("deform wall at {t}"))?;
            }
            "walls" => {
                let walls: Vec<Wall> = serde_json::from_value(rep.result["walls"].clone()).map_err(e)?;
                ensure(walls.len() == 1 && walls[0].t_value == ratio(1, 2), || "walls lossy".into())?;
            }
            "cy2" => {
                let m: MembershipReport = serde_json::from_value(rep.result["membership"].clone()).map_err(e)?;
                ensure(serde_json::to_value(&m).map_err(e)? == rep.result["membership"], || "membership lossy".into())?;
            }
            _ => {}
        }
    }
    Ok(format!("{} subcommands byte-stable and round-tripped", commands.len()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("HN oracle equivalence", oracle_sweep),
        ("polygon bounds suite", bounds_suite),
        ("A2 wall-crossing", a2_wall),
        ("continuity bound", continuity),
        ("reductions", reductions),
        ("CY2 certificate", cy2),
        ("CLI determinism and round-trip", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
