use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use stabkit_core::cy2::{build_support_q, check_p0_membership};
use stabkit_core::deformation::{find_walls, lift_path, Wall};
use stabkit_core::hn::{check_heart, check_simples, hn_filtration, is_stable};
use stabkit_core::io::{ChargeInput, FormInput, LatticeDoc, MukaiDoc, PathDoc, SampleDoc, SigmaDoc};
use stabkit_core::lattice::{kernel, negative_definite_witness, signature};
use stabkit_core::quadform_ext::{compose, radical, reduce_and_lift};
use stabkit_core::rational::{format_rational, rat, to_f64};
use stabkit_core::slicing::distance_dprime;
use stabkit_core::{CentralCharge, Class, QComplex, QMatrix, QuadraticForm, Rational, Representation};

use crate::report::{failure_check, Check, Report, Table};
use crate::svg::render_svg;
use crate::{Cli, Command, GlobalOpts};

pub struct Outcome {
    pub report: Report,
    pub table: Option<Table>,
    pub svg: Option<(PathBuf, String)>,
}

#[derive(Default)]
struct Parts {
    checks: Vec<Check>,
    result: Value,
    table: Option<Table>,
    svg: Option<(PathBuf, String)>,
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_charge(path: &Path) -> Result<CentralCharge> {
    load::<ChargeInput>(path)?.into_charge().with_context(|| format!("charge in {}", path.display()))
}

fn load_form(path: &Path) -> Result<QuadraticForm> {
    load::<FormInput>(path)?.into_form().with_context(|| format!("form in {}", path.display()))
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn class_str(c: &Class) -> String {
    serde_json::to_string(c).expect("class serializes")
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// A failed mathematical check becomes a failing `Check`; anything else is
/// an input error.
fn math<T>(name: &str, r: stabkit_core::Result<T>) -> Result<std::result::Result<T, Check>> {
    match r {
        Ok(t) => Ok(Ok(t)),
        Err(e) => match failure_check(&e) {
            Some(mut c) => {
                c.name = name.into();
                Ok(Err(c))
            }
            None => Err(e.into()),
        },
    }
}

fn kernel_check(name: &str, q: &QuadraticForm, z: &CentralCharge) -> Result<Check> {
    if q.rank() != z.rank() {
        bail!("form has rank {} but charge has rank {}", q.rank(), z.rank());
    }
    let basis = kernel(z);
    Ok(match negative_definite_witness(q, &basis)? {
        None => Check::new(
            name,
            true,
            Some(json!({ "kernel_basis": basis.iter().map(|b| strings(b)).collect::<Vec<_>>() })),
        ),
        Some(w) => Check::new(name, false, Some(json!({ "vector": strings(&w), "Q": format_rational(&q.value(&w)) }))),
    })
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    if g.tol.is_nan() || g.tol <= 0.0 {
        bail!("--tol must be positive");
    }
    let (name, inputs, parts) = match &cli.command {
        Command::Validate(a) => {
            let mut inputs = json!({ "input": a.input.iter().map(|p| path_str(p)).collect::<Vec<_>>() });
            if let Some(p) = &a.charge {
                inputs["charge"] = json!(path_str(p));
            }
            if let Some(p) = &a.q {
                inputs["q"] = json!(path_str(p));
            }
            ("validate", inputs, guarded(validate(a, g)))
        }
        Command::Hn(a) => ("hn", json!({ "input": path_str(&a.input), "charge": path_str(&a.charge) }), guarded(hn(a, g))),
        Command::Walls(a) => {
            let mut inputs = json!({ "object": path_str(&a.object), "path": path_str(&a.path) });
            if let Some(p) = &a.q {
                inputs["q"] = json!(path_str(p));
            }
            ("walls", inputs, guarded(walls(a, g)))
        }
        Command::Deform(a) => (
            "deform",
            json!({ "sigma": path_str(&a.sigma), "q": path_str(&a.q), "path": path_str(&a.path) }),
            guarded(deform(a, g)),
        ),
        Command::Dist(a) => (
            "dist",
            json!({ "sigma1": path_str(&a.sigma1), "sigma2": path_str(&a.sigma2), "sample": path_str(&a.sample) }),
            guarded(dist(a, g)),
        ),
        Command::Qext(a) => ("qext", json!({ "q": path_str(&a.q), "z": path_str(&a.z) }), guarded(qext(a))),
        Command::Cy2(a) => ("cy2", json!({ "lattice": path_str(&a.lattice), "z": path_str(&a.z) }), guarded(cy2(a))),
    };
    let parts = parts?;
    let mut config = json!({ "budget": g.budget, "tol": g.tol, "inputs": inputs });
    if let Command::Deform(a) = &cli.command {
        config["steps"] = json!(a.steps);
    }
    Ok(Outcome { report: Report::new(name, config, parts.checks, parts.result), table: parts.table, svg: parts.svg })
}

/// Turns a mathematical failure raised deep inside a command into a report.
fn guarded(r: Result<Parts>) -> Result<Parts> {
    match r {
        Ok(p) => Ok(p),
        Err(e) => {
            let check = e.downcast_ref::<stabkit_core::Error>().and_then(failure_check);
            match check {
                Some(c) => Ok(Parts { checks: vec![c], result: json!({ "error": format!("{e:#}") }), ..Parts::default() }),
                None => Err(e),
            }
        }
    }
}

// ------------------------------------------------------------------ validate

fn validate(a: &crate::ValidateArgs, g: &GlobalOpts) -> Result<Parts> {
    let z = a.charge.as_deref().map(load_charge).transpose()?;
    let q = a.q.as_deref().map(load_form).transpose()?;
    let mut checks = Vec::new();
    let mut docs = Vec::new();
    let mut table = Table::new(&["document", "kind", "check", "pass"]);
    if let (Some(z), Some(q)) = (&z, &q) {
        checks.push(kernel_check("kernel_negative_definite", q, z)?);
    }
    for p in &a.input {
        let v: Value = load(p)?;
        let (kind, doc_checks) = validate_value(&v, z.as_ref(), q.as_ref(), g.budget)
            .with_context(|| format!("validating {}", p.display()))?;
        for c in &doc_checks {
            table.push(vec![path_str(p), kind.into(), c.name.clone(), c.pass.to_string()]);
        }
        docs.push(json!({ "path": path_str(p), "kind": kind, "checks": doc_checks }));
        checks.extend(doc_checks.into_iter().map(|mut c| {
            c.name = format!("{}: {}", path_str(p), c.name);
            c
        }));
    }
    Ok(Parts { checks, result: json!({ "documents": docs }), table: Some(table), svg: None })
}

fn validate_value(v: &Value, z: Option<&CentralCharge>, q: Option<&QuadraticForm>, budget: u64) -> Result<(&'static str, Vec<Check>)> {
    let has = |k: &str| v.get(k).is_some();
    let mut checks = Vec::new();
    if has("field") {
        let r: Representation = serde_json::from_value(v.clone())?;
        checks.push(Check::new("representation", true, Some(json!({ "dims": r.dims() }))));
        if let Some(z) = z {
            let classes = r.subobject_classes(budget)?;
            checks.push(match math("heart", check_simples(z).and_then(|_| check_heart(&classes, z)))? {
                Ok(()) => Check::new("heart", true, Some(json!({ "subobject_classes": classes.len() }))),
                Err(c) => c,
            });
        }
        return Ok(("representation", checks));
    }
    if has("Z0") {
        let d: PathDoc = serde_json::from_value(v.clone())?;
        let path = d.resolve(q)?;
        checks.push(Check::new("path", true, Some(json!({ "W": path.w }))));
        if let Some(q) = q {
            checks.push(kernel_check("kernel_negative_definite_at_0", q, &path.z0)?);
            checks.push(kernel_check("kernel_negative_definite_at_1", q, &path.end())?);
        }
        return Ok(("path", checks));
    }
    if has("gram") || has("pairing") {
        let d: MukaiDoc = serde_json::from_value(v.clone())?;
        let l = d.lattice()?;
        checks.push(Check::new("nondegenerate_pairing", true, Some(json!({ "rank": l.rank() }))));
        if let Some(z) = z.or(d.z.as_ref()) {
            let m = check_p0_membership(&l, z)?;
            let witness = m.witness.as_ref().map(|w| json!(strings(w)));
            let mut c = Check::new("p0_membership", m.member, witness);
            if let Some(r) = &m.reason {
                c = c.with_detail(r.clone());
            }
            checks.push(c);
        }
        return Ok(("mukai_lattice", checks));
    }
    if has("Z") && (has("generators") || has("objects")) {
        let d: SigmaDoc = serde_json::from_value(v.clone())?;
        checks.push(match math("prestability", d.build(budget))? {
            Ok(s) => Check::new("prestability", true, Some(json!({ "Z": s.z }))),
            Err(c) => c,
        });
        return Ok(("prestability", checks));
    }
    if has("rank") {
        let d: LatticeDoc = serde_json::from_value(v.clone())?;
        d.validate()?;
        checks.push(Check::new("dimensions", true, Some(json!({ "rank": d.rank }))));
        if let Some(form) = &d.q {
            let s = signature(form);
            checks.push(Check::new("signature", true, Some(json!([s.positive, s.negative, s.null]))));
        }
        let dz = d.z.as_ref().or(z);
        let dq = d.q.as_ref().or(q);
        if let (Some(dz), Some(dq)) = (dz, dq) {
            checks.push(kernel_check("kernel_negative_definite", dq, dz)?);
        }
        return Ok(("lattice", checks));
    }
    if v.is_array() {
        let m: QMatrix = serde_json::from_value(v.clone())?;
        let as_charge = m.rows() == 2;
        let as_form = m.is_square() && m.is_symmetric();
        if !as_charge && !as_form {
            bail!("matrix is neither a 2-row charge nor a symmetric Gram matrix");
        }
        checks.push(Check::new("matrix", true, Some(json!({ "charge": as_charge, "form": as_form }))));
        if as_form {
            let s = signature(&QuadraticForm::new(m.clone())?);
            checks.push(Check::new("signature", true, Some(json!([s.positive, s.negative, s.null]))));
        }
        return Ok(("matrix", checks));
    }
    bail!("unrecognized document")
}

// ------------------------------------------------------------------------ hn

fn hn(a: &crate::HnArgs, g: &GlobalOpts) -> Result<Parts> {
    let r: Representation = load(&a.input)?;
    let z = load_charge(&a.charge)?;
    if r.is_zero() {
        bail!("object is zero");
    }
    if z.rank() != r.dims().len() {
        bail!("charge has rank {} but the quiver has {} vertices", z.rank(), r.dims().len());
    }
    check_simples(&z)?;
    let classes = r.subobject_classes(g.budget)?;
    let f = hn_filtration(&r, &z, g.budget)?;
    let stable = is_stable(&r, &z, g.budget)?;
    let ve = r.dimension_vector();
    let subs: Vec<(Class, QComplex)> =
        classes.iter().map(|c| Ok((c.clone(), z.evaluate(c)?))).collect::<stabkit_core::Result<_>>()?;

    let total = f.factor_classes().iter().fold(Class::zero(ve.rank()), |acc, c| acc.add(c));
    let outside = subs.iter().find(|(_, w)| !f.polygon.weakly_right_of_boundary(w));
    let checks = vec![
        Check::new("factor_sum", total == ve, Some(json!({ "factors": f.factor_classes(), "sum": total }))),
        match outside {
            None => Check::new("subobjects_right_of_boundary", true, Some(json!({ "vertices": f.polygon.vertices }))),
            Some((c, _)) => Check::new("subobjects_right_of_boundary", false, Some(json!({ "class": c }))),
        },
    ];

    let charges: Vec<QComplex> = subs.iter().map(|(_, w)| w.clone()).collect();
    let mut result = json!({
        "class": ve,
        "charge": z.evaluate(&ve)?,
        "semistable": f.factors.len() == 1,
        "stable": stable,
        "polygon": f.polygon,
        "factors": f.factors,
        "phases": f.factors.iter().map(|x| x.phase.value()).collect::<Vec<_>>(),
        "filtration": f.steps.iter().map(|s| s.class.clone()).collect::<Vec<_>>(),
        "mass": f.polygon.mass(),
        "subobjects": subs.iter().map(|(c, w)| json!({ "class": c, "charge": w })).collect::<Vec<_>>(),
    });
    if a.truncated {
        result["truncated"] = json!(f.polygon.truncated().vertices);
    }
    let mut table = Table::new(&["index", "class", "charge_re", "charge_im", "phase"]);
    for (i, x) in f.factors.iter().enumerate() {
        let w = z.evaluate(&x.class)?;
        table.push(vec![
            i.to_string(),
            class_str(&x.class),
            format_rational(&w.re),
            format_rational(&w.im),
            x.phase.value().to_string(),
        ]);
    }
    let svg = a.svg.as_ref().map(|p| (p.clone(), render_svg(&f.polygon, &charges, a.truncated)));
    Ok(Parts { checks, result, table: Some(table), svg })
}

// --------------------------------------------------------------- walls, deform

fn wall_entry(w: &Wall, object: Option<usize>) -> Value {
    let mut e = json!({
        "t": format_rational(&w.t_value),
        "destabilizer": w.destabilizer_class,
        "object_class": w.object_class,
        "exact": w.is_exact(),
    });
    if let Some(i) = object {
        e["object"] = json!(i);
    }
    if let Some((lo, hi)) = &w.isolating_interval {
        e["isolating_interval"] = json!([format_rational(lo), format_rational(hi)]);
    }
    e
}

fn status_str<T: serde::Serialize>(s: &T) -> String {
    match serde_json::to_value(s).expect("status serializes") {
        Value::String(s) => s,
        Value::Null => String::new(),
        v => v.to_string(),
    }
}

fn wall_table(rows: &[(Option<usize>, &Wall)]) -> Table {
    let mut table = Table::new(&["object", "t", "t_approx", "exact", "destabilizer", "before", "at", "after"]);
    for (i, w) in rows {
        table.push(vec![
            i.map(|i| i.to_string()).unwrap_or_default(),
            format_rational(&w.t_value),
            to_f64(&w.t_value).to_string(),
            w.is_exact().to_string(),
            class_str(&w.destabilizer_class),
            status_str(&w.before),
            status_str(&w.at),
            status_str(&w.after),
        ]);
    }
    table
}

fn walls(a: &crate::WallsArgs, g: &GlobalOpts) -> Result<Parts> {
    let r: Representation = load(&a.object)?;
    let q = a.q.as_deref().map(load_form).transpose()?;
    let path = load::<PathDoc>(&a.path)?.resolve(q.as_ref())?;
    if path.rank() != r.dims().len() {
        bail!("path has rank {} but the quiver has {} vertices", path.rank(), r.dims().len());
    }
    let found = find_walls(&r, &path, g.budget)?;
    let unresolved: Vec<&Wall> = found.iter().filter(|w| w.before.is_none() && w.after.is_none()).collect();
    let checks = vec![Check::new(
        "walls_located",
        unresolved.is_empty(),
        Some(json!(found.iter().map(|w| format_rational(&w.t_value)).collect::<Vec<_>>())),
    )];
    let result = json!({
        "object_class": r.dimension_vector(),
        "wall_list": found.iter().map(|w| wall_entry(w, None)).collect::<Vec<_>>(),
        "walls": found,
    });
    let rows: Vec<(Option<usize>, &Wall)> = found.iter().map(|w| (None, w)).collect();
    Ok(Parts { checks, result, table: Some(wall_table(&rows)), svg: None })
}

fn deform(a: &crate::DeformArgs, g: &GlobalOpts) -> Result<Parts> {
    let sigma = load::<SigmaDoc>(&a.sigma)?.build(g.budget)?;
    let q = load_form(&a.q)?;
    let path = load::<PathDoc>(&a.path)?.resolve(Some(&q))?;
    let steps = usize::try_from(a.steps).context("--steps too large")?;
    let rep = lift_path(&sigma, &q, &path, steps, g.budget)?;

    let mut checks = Vec::new();
    let mismatch = rep.grid.iter().find(|p| !p.hn_mismatch.is_empty());
    checks.push(Check::new(
        "hn_from_bounded_set",
        mismatch.is_none(),
        mismatch.map(|p| json!({ "t": format_rational(&p.t), "objects": p.hn_mismatch })),
    ));
    let violation = rep.grid.iter().find_map(|p| {
        p.support_violations.first().map(|i| {
            let o = p.objects.iter().find(|o| o.index == *i).expect("violating object is listed");
            json!({ "t": format_rational(&p.t), "object": i, "class": o.class, "Q": format_rational(&o.q) })
        })
    });
    checks.push(Check::new("q_nonnegative_on_semistable", violation.is_none(), violation));
    let bad_wall = rep.grid.iter().find_map(|p| {
        p.walls
            .iter()
            .find(|w| !(w.factors_nonnegative && w.total_nonnegative))
            .map(|w| json!({ "t": format_rational(&p.t), "class": w.object_class, "factor_Q": strings(&w.factor_q) }))
    });
    checks.push(Check::new("q_at_walls", bad_wall.is_none(), bad_wall));
    let over = rep.continuity.iter().find(|c| c.d_prime > c.bound + g.tol);
    let flagged: Vec<String> = rep.continuity.iter().filter(|c| c.flagged).map(|c| format_rational(&c.t)).collect();
    let mut c = Check::new(
        "continuity_bound",
        over.is_none(),
        over.map(|c| json!({ "t": format_rational(&c.t), "d_prime": c.d_prime, "bound": c.bound, "object": c.witness })),
    );
    if !flagged.is_empty() {
        c = c.with_detail(format!("above the linear bound at t = {}", flagged.join(", ")));
    }
    checks.push(c);

    let wall_list: Vec<Value> = rep.walls.iter().map(|w| wall_entry(&w.wall, Some(w.index))).collect();
    let mut table = Table::new(&["t", "kinds", "object", "class", "status", "Q"]);
    for p in &rep.grid {
        let kinds: Vec<String> = p.kinds.iter().map(status_str).collect();
        for o in &p.objects {
            table.push(vec![
                format_rational(&p.t),
                kinds.join("+"),
                o.index.to_string(),
                class_str(&o.class),
                status_str(&o.status),
                format_rational(&o.q),
            ]);
        }
    }
    Ok(Parts { checks, result: json!({ "wall_list": wall_list, "lift": rep }), table: Some(table), svg: None })
}

// ---------------------------------------------------------------------- dist

fn dist(a: &crate::DistArgs, g: &GlobalOpts) -> Result<Parts> {
    let s1 = load::<SigmaDoc>(&a.sigma1)?.build(g.budget)?;
    let s2 = load::<SigmaDoc>(&a.sigma2)?.build(g.budget)?;
    let sample = load::<SampleDoc>(&a.sample)?.into_objects();
    let rep = distance_dprime(&s1, &s2, &sample, g.budget)?;
    let checks = vec![Check::new(
        "d_prime_finite",
        rep.d_prime.is_finite() && rep.d_prime >= 0.0,
        Some(json!({ "evaluated": rep.rows.len(), "skipped": rep.skipped })),
    )];
    let mut table = Table::new(&["index", "class", "shift", "phase", "psi_minus", "psi_plus", "contribution"]);
    for r in &rep.rows {
        table.push(vec![
            r.index.to_string(),
            class_str(&r.class),
            r.shift.to_string(),
            r.phase.to_string(),
            r.psi_minus.to_string(),
            r.psi_plus.to_string(),
            r.contribution.to_string(),
        ]);
    }
    let result = json!({
        "label": "d′ lower bound (sample)",
        "d_prime": rep.d_prime,
        "per_object": rep.rows,
        "skipped": rep.skipped,
    });
    Ok(Parts { checks, result, table: Some(table), svg: None })
}

// ---------------------------------------------------------------------- qext

fn qext(a: &crate::QextArgs) -> Result<Parts> {
    let q = load_form(&a.q)?;
    let z = load_charge(&a.z)?;
    if q.rank() != z.rank() {
        bail!("form has rank {} but charge has rank {}", q.rank(), z.rank());
    }
    let steps = reduce_and_lift(&q, &z)?;
    let ext = compose(&q, &z, &steps);
    let sig = signature(&ext.q_bar);
    let rank = ext.q_bar.rank();
    let rad = radical(&ext.q_bar);
    let checks = vec![
        Check::new(
            "signature",
            sig.as_tuple() == (2, rank.saturating_sub(2), 0),
            Some(json!([sig.positive, sig.negative, sig.null])),
        ),
        Check::new("radical_zero", rad.is_empty(), Some(json!(rad.iter().map(|r| strings(r)).collect::<Vec<_>>()))),
        Check::new("restriction", ext.restricts_to(&q, &z), Some(json!({ "embed": ext.embed, "rotation": ext.rotation }))),
        kernel_check("kernel_negative_definite", &ext.q_bar, &ext.z_bar)?,
    ];
    let mut table = Table::new(&["step", "source_rank", "target_rank", "new_coordinates"]);
    for (i, s) in steps.iter().enumerate() {
        let kinds: Vec<String> = s.new_coords.iter().map(|c| json!(c)["kind"].as_str().unwrap_or("").to_string()).collect();
        table.push(vec![i.to_string(), s.source_rank().to_string(), s.target_rank().to_string(), kinds.join("+")]);
    }
    let result = json!({ "chain": steps, "composite": ext, "signature": sig });
    Ok(Parts { checks, result, table: Some(table), svg: None })
}

// ----------------------------------------------------------------------- cy2

fn cy2(a: &crate::Cy2Args) -> Result<Parts> {
    let l = load::<MukaiDoc>(&a.lattice)?.lattice()?;
    let z = load_charge(&a.z)?;
    let m = check_p0_membership(&l, &z)?;
    let mut c = Check::new("p0_membership", m.member, m.witness.as_ref().map(|w| json!(strings(w))));
    if let Some(r) = &m.reason {
        c = c.with_detail(r.clone());
    }
    let mut checks = vec![c];
    let mut result = json!({ "membership": m });
    let mut table = Table::new(&["root", "charge_norm_sq", "Q"]);
    if m.member {
        let cert = build_support_q(&l, &z)?;
        checks.push(Check::new("kernel_negative_definite", cert.kernel_negative_definite, Some(json!({ "Q": cert.q }))));
        let neg = cert.roots.iter().find(|r| r.q < rat(0));
        checks.push(Check::new(
            "roots_nonnegative",
            cert.roots_nonnegative,
            Some(match neg {
                Some(r) => json!({ "root": r.root }),
                None => json!({ "roots": cert.roots.len() }),
            }),
        ));
        for r in &cert.roots {
            table.push(vec![class_str(&r.root), format_rational(&r.charge_norm_sq), format_rational(&r.q)]);
        }
        result["C"] = json!({
            "exact": cert.c.exact(),
            "value": cert.c.value(),
            "kind": cert.c.kind,
            "witness": cert.c.witness,
        });
        result["certificate"] = json!(cert);
    }
    Ok(Parts { checks, result, table: Some(table), svg: None })
}
