//! Acceptance suite. Runs without the libtest harness and prints one
//! `PASS`/`FAIL` line per criterion; exits nonzero if any fails.

mod common;

use std::time::Instant;

use morin_core::classify::{equivalence_fuzz, morin_classify, morin_classify_normalized, Verdict};
use morin_core::forms::{isotopy_form, normal_form, FormSpec};
use morin_core::germ::is_adapted;
use morin_core::isotopy::{d_invariant, isotopy_classify, isotopy_reduce, isotopy_witness, InvariantLabel};
use morin_core::parse::{parse_framed, parse_germ};
use morin_core::report::{isotopy_table, Document, Report, RulingReport, WitnessReport, SCHEMA, TOOL_VERSION};
use morin_core::ruling::{random_framed_curve, rotation_frame, ruling_morin1_check, striction, FramedCurve};
use morin_core::{Jet, MapJet, Rat, RatMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// `(r, a, extra)` with `m = r(a+1) + extra <= 8`, `r <= 4`, `a <= 3`.
fn budget() -> Vec<FormSpec> {
    let mut out = Vec::new();
    for r in 1..=4 {
        for a in 1..=3 {
            let base = r * (a + 1);
            for extra in 0..=8usize.saturating_sub(base) {
                if base <= 8 {
                    out.push(FormSpec::new(r, a, extra));
                }
            }
        }
    }
    out
}

const SIGNS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn normal_forms() -> Outcome {
    let specs = budget();
    for s in &specs {
        let f = normal_form(s, s.r as u32 + 2).map_err(|e| e.to_string())?;
        let v = morin_classify(&f, s.r).map_err(|e| e.to_string())?.verdict;
        ensure(v == Verdict::Morin { r: s.r }, || format!("{s:?}: {v}"))?;
    }
    Ok(format!("{} normal forms classified exactly", specs.len()))
}

fn invariance_fuzz() -> Outcome {
    let specs = budget();
    let mut trials = 0;
    for (i, s) in specs.iter().enumerate() {
        let f = normal_form(s, s.r as u32 + 2).map_err(|e| e.to_string())?;
        let runs = equivalence_fuzz(&f, 25, 3, 1000 + i as u64).map_err(|e| e.to_string())?;
        for (t, run) in runs.iter().enumerate() {
            ensure(run.verdict == Verdict::Morin { r: s.r }, || format!("{s:?} trial {t}: {}", run.verdict))?;
        }
        trials += runs.len();
    }
    Ok(format!("{trials} conjugations, 0 failures"))
}

/// Germs `(x_1, ..., x_{m-1}, f_m, ..., f_n)`, mixing perturbed normal forms
/// with unstructured polynomials.
fn random_normalized(rng: &mut ChaCha8Rng, i: usize) -> MapJet {
    const SHAPES: [(usize, usize); 6] = [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1)];
    let (r, a) = SHAPES[rng.gen_range(0..SHAPES.len())];
    let extra = if r * (a + 1) < 6 { rng.gen_range(0..=1) } else { 0 };
    let spec = FormSpec::new(r, a, extra);
    let (m, order) = (spec.m(), 5);
    let base = normal_form(&spec, order).unwrap();
    let mut comps: Vec<Jet> = base.components().to_vec();
    for c in comps[m - 1..].iter_mut() {
        *c = match i % 5 {
            0 | 1 => &*c + &common::sparse_jet(rng, m, order, r as u32 + 2, order, 3),
            2 => &*c + &common::sparse_jet(rng, m, order, 2, order, 2),
            3 => common::sparse_jet(rng, m, order, 2, order, 5),
            _ => &*c + &common::sparse_jet(rng, m, order, 1, 2, 1),
        };
    }
    MapJet::new(m, comps).unwrap()
}

fn normalized_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut tally = std::collections::BTreeMap::<String, usize>::new();
    for i in 0..50 {
        let f = random_normalized(&mut rng, i);
        let coord = morin_classify(&f, 3).map_err(|e| e.to_string())?;
        let normalized = morin_classify_normalized(&f, 3).map_err(|e| e.to_string())?;
        ensure(coord.verdict == normalized.verdict, || {
            format!("germ {i}: {} vs {}", coord.verdict, normalized.verdict)
        })?;
        if let (Verdict::Morin { r }, Some(chain)) = (&coord.verdict, &coord.evidence) {
            ensure(chain.chain_ranks[..*r] == normalized.ranks[..*r], || {
                format!("germ {i}: ranks {:?} vs {:?}", chain.chain_ranks, normalized.ranks)
            })?;
        }
        let key = match coord.verdict {
            Verdict::Morin { r } => format!("morin{r}"),
            Verdict::DegenerateRank { .. } => "degenerate".into(),
            Verdict::FlatToOrder { .. } => "flat".into(),
            Verdict::Regular => "regular".into(),
            other => other.to_string(),
        };
        *tally.entry(key).or_default() += 1;
    }
    Ok(format!("50 germs agree, verdicts {tally:?}"))
}

fn d_formula() -> Outcome {
    let mut count = 0;
    for s in budget().into_iter().filter(|s| !s.is_suspension()) {
        for (e1, e2) in SIGNS {
            let f = isotopy_form(&s.with_signs(e1, e2), s.r as u32 + 2).map_err(|e| e.to_string())?;
            let d = d_invariant(&f, s.r).map_err(|e| format!("{s:?} ({e1},{e2}): {e}"))?;
            let expected = e1.pow(((s.a + 1) * s.r + 1) as u32) * e2.pow(s.r as u32);
            ensure(d == expected, || format!("r={} a={} ({e1},{e2}): D = {d}, expected {expected}", s.r, s.a))?;
            count += 1;
        }
    }
    Ok(format!("{count} forms match"))
}

/// Table of class counts and invariants, rows `r mod 4 = 0, 1, 2, 3`,
/// columns `a` odd, `a` even.
const TABLE: [[(usize, InvariantLabel); 2]; 4] = [
    [(2, InvariantLabel::Eps1), (2, InvariantLabel::Eps1)],
    [(1, InvariantLabel::None), (2, InvariantLabel::Eps2)],
    [(2, InvariantLabel::Eps1), (1, InvariantLabel::None)],
    [(1, InvariantLabel::None), (1, InvariantLabel::None)],
];

fn table() -> Outcome {
    for r in 1..=8 {
        for a in 1..=4 {
            let rep = isotopy_classify(r, a, false).map_err(|e| e.to_string())?;
            let (count, label) = TABLE[r % 4][1 - a % 2];
            ensure(rep.class_count == count && rep.invariant_label == label, || {
                format!("r={r} a={a}: {} {:?}, expected {count} {label:?}", rep.class_count, rep.invariant_label)
            })?;
            let susp = isotopy_classify(r, a, true).map_err(|e| e.to_string())?;
            ensure(susp.class_count == 1 && susp.invariant_label == InvariantLabel::None, || {
                format!("suspension r={r} a={a}: {} classes", susp.class_count)
            })?;
        }
    }
    Ok("32 cells and 32 suspension cells match".into())
}

fn witnesses() -> Outcome {
    let mut steps = 0;
    let mut count = 0;
    for s in budget() {
        let class = isotopy_classify(s.r, s.a, s.is_suspension()).map_err(|e| e.to_string())?;
        for (e1, e2) in SIGNS {
            let spec = s.with_signs(e1, e2);
            let w = isotopy_reduce(&spec).map_err(|e| e.to_string())?;
            let claimed = match class.invariant_label {
                InvariantLabel::None => (1, 1),
                InvariantLabel::Eps1 => (e1, 1),
                InvariantLabel::Eps2 => (1, e2),
            };
            ensure(w.to == claimed, || format!("{spec:?}: reached {:?}, claimed {claimed:?}", w.to))?;
            ensure(w.verify().unwrap_or(false), || format!("{spec:?}: jets differ"))?;
            for step in &w.steps {
                let det = step.rotation.matrix().det().map_err(|e| e.to_string())?;
                ensure(step.rotation.indices.len() % 2 == 0 && det == Rat::one(), || {
                    format!("{spec:?}: bad rotation {:?}", step.rotation.indices)
                })?;
            }
            ensure(isotopy_witness(&spec).is_ok() == (claimed == (1, 1)), || format!("{spec:?}: witness mismatch"))?;
            steps += w.steps.len();
            count += 1;
        }
    }
    Ok(format!("{count} reductions verified, {steps} rotations"))
}

/// Target diffeomorphism with `dΦ_0 = [[M1, M2], [0, M4]]` plus quadratic terms.
fn block_diffeo(rng: &mut ChaCha8Rng, m: usize, n: usize, order: u32) -> (MapJet, RatMatrix, RatMatrix) {
    let m1 = common::invertible(rng, m - 1);
    let m4 = common::invertible(rng, n - m + 1);
    let mut lin = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            lin[(i, j)] = if i < m - 1 && j < m - 1 {
                m1[(i, j)].clone()
            } else if i >= m - 1 && j >= m - 1 {
                m4[(i + 1 - m, j + 1 - m)].clone()
            } else if i < m - 1 {
                Rat::from_int(rng.gen_range(-2..=2))
            } else {
                Rat::zero()
            };
        }
    }
    let linear = MapJet::linear(&lin, order);
    let comps = linear
        .components()
        .iter()
        .map(|c| c + &common::sparse_jet(rng, n, order, 2, 2, 2))
        .collect();
    (MapJet::new(n, comps).unwrap(), m1, m4)
}

fn transformation_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut nondegenerate = 0;
    for trial in 0..25 {
        let m = rng.gen_range(2..=5);
        let a = rng.gen_range(1..=2);
        let n = m + a;
        let order = 3;
        let mut comps: Vec<Jet> = (0..m - 1).map(|k| Jet::var(m, order, k).unwrap()).collect();
        comps.extend((0..=a).map(|_| common::sparse_jet(&mut rng, m, order, 2, 3, 10)));
        let f = MapJet::new(m, comps).unwrap();
        ensure(is_adapted(&f), || format!("trial {trial}: germ not adapted"))?;
        let (phi, m1, m4) = block_diffeo(&mut rng, m, n, order);
        let g = phi.compose(&f).map_err(|e| e.to_string())?;
        let head: Vec<usize> = (0..m - 1).collect();
        let dl = |h: &MapJet, i: usize| {
            let mut rows = head.clone();
            rows.push(m - 1 + i);
            common::gradient_det(h, &rows).differential()
        };
        let before: Vec<Vec<Rat>> = (0..=a).map(|i| dl(&f, i)).collect();
        let after: Vec<Vec<Rat>> = (0..=a).map(|i| dl(&g, i)).collect();
        let rows: Vec<Vec<Rat>> = before.clone();
        nondegenerate += usize::from(RatMatrix::from_rows(rows).map_err(|e| e.to_string())?.rank() == a + 1);
        let det1 = m1.det().map_err(|e| e.to_string())?;
        for i in 0..=a {
            for k in 0..m {
                let rhs: Rat = (0..=a).map(|j| &m4[(i, j)] * &before[j][k]).sum();
                ensure(after[i][k] == &det1 * &rhs, || format!("trial {trial}: component {i}, x{}", k + 1))?;
            }
        }
    }
    Ok(format!("25 germs exact, {nondegenerate} with rank dΛ_0 = n - m + 1"))
}

fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    a.iter().zip(b).map(|(x, y)| x * y).reduce(|x, y| &x + &y).unwrap()
}

fn ruling_frame(fc: &FramedCurve, label: &str, expect_morin1: Option<bool>) -> Result<(), String> {
    let st = striction(fc).map_err(|e| format!("{label}: {e}"))?;
    let sp: Vec<Jet> = st.sigma.iter().map(|c| c.derive(0).unwrap()).collect();
    for (i, d) in fc.delta().iter().enumerate() {
        let dp: Vec<Jet> = d.iter().map(|c| c.derive(0).unwrap()).collect();
        ensure(dot(&sp, &dp).is_zero(), || format!("{label}: sigma'.delta{}' != 0", i + 1))?;
    }
    let c = ruling_morin1_check(fc).map_err(|e| format!("{label}: {e}"))?;
    ensure(c.identity_holds, || format!("{label}: {:?} vs predicted {:?}", c.eta_lambda, c.predicted))?;
    ensure(c.agree, || format!("{label}: classifier {} vs striction {}", c.verdict, c.alpha_morin1))?;
    if let Some(want) = expect_morin1 {
        ensure(c.classifier_morin1 == want, || format!("{label}: expected 1-Morin = {want}"))?;
    }
    Ok(())
}

fn ruling() -> Outcome {
    ruling_frame(&rotation_frame(4), "rotation frame", Some(true))?;
    let still = rotation_frame(4).with_gamma(vec![Jet::zero(1, 4); 4]).map_err(|e| e.to_string())?;
    ruling_frame(&still, "gamma = 0", Some(false))?;
    for seed in 0..20u64 {
        let stationary = seed % 10 >= 7;
        let fc = random_framed_curve(2, 4, 500 + seed, stationary);
        ruling_frame(&fc, &format!("frame {seed}"), Some(!stationary))?;
    }
    Ok("rotation frame, gamma = 0, 14 generic and 6 stationary frames".into())
}

fn validate(schema: &jsonschema::JSONSchema, doc: &Document, what: &str) -> Result<(), String> {
    let value: Value = serde_json::from_str(&doc.to_json()).map_err(|e| e.to_string())?;
    let errors: Vec<String> = match schema.validate(&value) {
        Ok(()) => Vec::new(),
        Err(errs) => errs.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    ensure(errors.is_empty(), || format!("{what}: {errors:?}"))?;
    let back: Document = serde_json::from_value(value).map_err(|e| format!("{what}: {e}"))?;
    ensure(&back == doc, || format!("{what}: report does not round-trip"))
}

fn round_trips() -> Outcome {
    let schema_value: Value = serde_json::from_str(SCHEMA).map_err(|e| e.to_string())?;
    let schema = jsonschema::JSONSchema::compile(&schema_value).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut reports = 0;
    for i in 0..200 {
        let src = common::random_germ_source(&mut rng);
        let text = src.to_string();
        let parsed = parse_germ(&text).map_err(|e| format!("file {i}: {e}\n{text}"))?;
        ensure(parsed == src, || format!("file {i}: tree changed\n{text}"))?;
        ensure(parsed.to_string() == text, || format!("file {i}: printing is not stable"))?;
        if src.m < src.n {
            let r_max = (src.order as usize).saturating_sub(2).max(1);
            let report = Report::classify("classify", &src, r_max).map_err(|e| format!("file {i}: {e}"))?;
            validate(&schema, &Document::Germ(report), &format!("report {i}"))?;
            reports += 1;
        }
    }
    validate(&schema, &Document::Table(isotopy_table(8, 4).map_err(|e| e.to_string())?), "table")?;
    let w = isotopy_witness(&FormSpec::new(3, 1, 0).with_signs(1, -1)).map_err(|e| e.to_string())?;
    validate(&schema, &Document::Witness(WitnessReport::new(&w, true)), "witness")?;
    let framed = parse_framed(
        "ruling 2 order 4\n\
         gamma: [t - 1/6*t^3, 1/2*t^2 - 1/24*t^4, 0, 0]\n\
         delta1: [1 - 1/2*t^2 + 1/24*t^4, t - 1/6*t^3, 0, 0]\n\
         delta2: [0, 0, 1 - 1/2*t^2 + 1/24*t^4, t - 1/6*t^3]\n",
    )
    .map_err(|e| e.to_string())?;
    let check = ruling_morin1_check(&FramedCurve::from_source(&framed).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let ruling = RulingReport { tool_version: TOOL_VERSION.into(), input: framed.to_string(), check, timing: Default::default() };
    validate(&schema, &Document::Ruling(ruling), "ruling")?;
    let mut bad: Value = serde_json::from_str(&Document::Table(isotopy_table(1, 1).unwrap()).to_json()).unwrap();
    bad["unexpected"] = Value::Bool(true);
    ensure(!schema.is_valid(&bad), || "schema accepts unknown fields".into())?;
    Ok(format!("200 files round-trip, {} reports valid", reports + 3))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("normal-form recovery", normal_forms),
        ("invariance under conjugation", invariance_fuzz),
        ("normalized-form cross-check", normalized_cross_check),
        ("sign invariant formula", d_formula),
        ("isotopy class table", table),
        ("rotation witnesses", witnesses),
        ("transformation law", transformation_law),
        ("ruling identities", ruling),
        ("parser and report round-trips", round_trips),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
