//! The acceptance checks, shared by `pushfwd selftest` and the test suite.
//! Every check is an exact computation; a result either matches or it does
//! not.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::blowup::{kernel_local_freeness, resolve_check, BlowupSpec, Freeness};
use crate::cohomology::{euler_char_multi, ext1, h_multi, MultiDegree};
use crate::exactalg::syzygy::generated_degree_dims;
use crate::exactalg::{monomial_syzygies, truncated_kernel_dim, Monomial, Polynomial, DEFAULT_DEGREE_BOUND};
use crate::extension::{check_cocycle, extend_all, Section, Status, Trivialization, TwistSpec};
use crate::family::{
    kernel_table, pushforward, r1_model, splitting_steps, sweep_with_table, BaseMode, Direction, FamilyConfig,
    FamilyError, TailSpec, Verdict,
};
use crate::nodalcurve::{euler_char, h0_h1, BundleOnCurve, Component, CurveGraph, Node, NodeEnd, PointLabel};

const SEED: u64 = 0x5eed_f9e1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {}. {}: {}", self.id, self.name, self.detail)
    }
}

fn result(id: u32, name: &'static str, outcome: Result<String, String>) -> CriterionResult {
    match outcome {
        Ok(detail) => CriterionResult { id, name, passed: true, detail },
        Err(detail) => CriterionResult { id, name, passed: false, detail },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Chain shapes (one chain of ghost parameters per tail, core first) used
/// by the family-level checks. Tails are `t1..tr`.
pub fn shape_catalog() -> Vec<Vec<Vec<&'static str>>> {
    vec![
        vec![vec![]],
        vec![vec!["a"]],
        vec![vec!["a", "b"]],
        vec![vec![], vec![]],
        vec![vec!["a"], vec!["a"]],
        vec![vec!["a"], vec![]],
        vec![vec!["a"], vec!["b"]],
        vec![vec!["a", "b"], vec!["a"]],
        vec![vec!["a", "b"], vec!["a", "c"]],
        vec![vec![], vec![], vec![]],
        vec![vec!["a"], vec!["a"], vec!["a"]],
        vec![vec!["a"], vec!["a"], vec![]],
        vec![vec!["a", "b"], vec!["a"], vec!["c"]],
        vec![vec![], vec![], vec![], vec![]],
        vec![vec!["a"], vec!["a"], vec!["b"], vec!["b"]],
        vec![vec!["a", "b"], vec!["a", "b"], vec!["a"], vec![]],
        vec![vec!["a"], vec![], vec![], vec![]],
    ]
}

pub fn shape_config(shape: &[Vec<&str>], m: &[i64], mode: BaseMode) -> Result<FamilyConfig, FamilyError> {
    let tails = shape.iter().zip(m).enumerate().map(|(i, (c, &mi))| TailSpec::new(&format!("t{}", i + 1), mi).with_chain(c)).collect();
    FamilyConfig::new(tails, mode, Direction::Independent)
}

fn shape_label(shape: &[Vec<&str>]) -> String {
    let tails: Vec<String> = shape.iter().map(|c| format!("[{}]", c.join(","))).collect();
    tails.join("")
}

/// Every vector in `{1..=max}^r`, lexicographically.
fn multiplicity_vectors(r: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..r {
        out = out.into_iter().flat_map(|v| (1..=max).map(move |k| [v.clone(), vec![k]].concat())).collect();
    }
    out
}

pub fn one_tail_direct_image() -> CriterionResult {
    let run = || -> Result<String, String> {
        for m in 1..=6 {
            let cfg = FamilyConfig::plain(&[m], BaseMode::Multiprojective);
            let model = pushforward(&cfg);
            let u = model.universe();
            let mut summands: Vec<i64> =
                model.v_m0.iter().map(|t| t.multidegree(&u).map(|d| d.degrees()[0])).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            summands.sort_unstable_by(|a, b| b.cmp(a));
            let want: Vec<i64> = std::iter::once(0).chain((2..=m).map(|k| -k)).collect();
            ensure(summands == want, || format!("m = {m}: summands {summands:?}, expected {want:?}"))?;
            let v1: Vec<i64> = model.v1.iter().map(|t| t.multidegree(&u).unwrap().degrees()[0]).collect();
            ensure(v1 == [-1] && model.beta.to_string() == "(t1)", || format!("m = {m}: β on {v1:?}, β = {}", model.beta))?;
            ensure(model.kernel_generators.is_empty(), || format!("m = {m}: β has a kernel"))?;
            let r1 = r1_model(&cfg);
            let p: BTreeSet<String> = ["t1".to_string()].into();
            ensure(r1.support == [p], || format!("m = {m}: R¹ supported on {:?}", r1.support))?;
        }
        Ok("m = 1..6: summands O, O(-2), ..., O(-m); β = (t1) on O(-1); R¹ = k(p)".into())
    };
    result(1, "one-tail direct image", run())
}

pub fn splitting_certificates() -> CriterionResult {
    let run = || -> Result<String, String> {
        let witness = ext1(&MultiDegree::zero(1), &MultiDegree::new(vec![-2]).unwrap()).map_err(|e| e.to_string())?;
        ensure(witness == 1, || format!("Ext¹(O, O(-2)) = {witness}, expected 1"))?;
        let (mut steps, mut nonzero) = (0usize, 0usize);
        let mut first: Option<String> = None;
        for shape in shape_catalog() {
            let cfg = shape_config(&shape, &vec![3; shape.len()], BaseMode::Multiprojective).map_err(|e| e.to_string())?;
            for s in splitting_steps(&cfg).map_err(|e| e.to_string())? {
                steps += 1;
                if s.obstruction != 0 {
                    nonzero += 1;
                    first.get_or_insert_with(|| {
                        format!(
                            "{} from m' = {:?} adding tail t{}: quotient {} has obstruction {}",
                            shape_label(&shape),
                            s.from,
                            s.tail + 1,
                            s.quotient,
                            s.obstruction
                        )
                    });
                }
            }
        }
        match first {
            None => Ok(format!("{steps} inductive steps all split; Ext¹(O, O(-2)) = 1")),
            Some(f) => Err(format!("{nonzero} of {steps} inductive steps have nonzero Ext¹; first: {f}")),
        }
    };
    result(2, "splitting certificates", run())
}

pub fn base_change_table() -> CriterionResult {
    let run = || -> Result<String, String> {
        let (mut configs, mut rows) = (0usize, 0usize);
        for shape in shape_catalog() {
            let r = shape.len();
            let base = shape_config(&shape, &vec![1; r], BaseMode::Local).map_err(|e| e.to_string())?;
            let table = kernel_table(&base, DEFAULT_DEGREE_BOUND).map_err(|e| e.to_string())?;
            for m in multiplicity_vectors(r, 3) {
                let cfg = base.with_m(&m).map_err(|e| e.to_string())?;
                let total: i64 = m.iter().sum();
                let reports = sweep_with_table(&cfg, &table).map_err(|e| e.to_string())?;
                let here = || format!("{} m = {m:?}", shape_label(&shape));
                let universe = cfg.universe();
                for rep in &reports {
                    let at = || format!("{} at {{{}}}", here(), rep.stratum.iter().cloned().collect::<Vec<_>>().join(","));
                    ensure(rep.generic_rank as i64 == total, || format!("{}: generic rank {}", here(), rep.generic_rank))?;
                    ensure(rep.chi == total, || format!("{}: χ = {}", at(), rep.chi))?;
                    ensure(rep.verdict != Verdict::Violation, || {
                        format!("{}: module fiber {} vs h⁰ = {}, h¹ = {}", at(), rep.module_fiber, rep.h0, rep.h1)
                    })?;
                    ensure(rep.r1_fiber == rep.h1, || format!("{}: R¹ fiber {} vs h¹ = {}", at(), rep.r1_fiber, rep.h1))?;
                    if rep.stratum.len() == universe.len() {
                        ensure(rep.h0 as i64 == total + 1 && rep.h1 == 1, || {
                            format!("{}: deepest stratum h⁰ = {}, h¹ = {}", here(), rep.h0, rep.h1)
                        })?;
                    }
                    for other in &reports {
                        if rep.stratum.is_subset(&other.stratum) {
                            ensure(rep.module_fiber <= other.module_fiber && rep.h0 <= other.h0, || {
                                format!("{}: rank drops towards a smaller stratum", at())
                            })?;
                        }
                    }
                    rows += 1;
                }
                configs += 1;
            }
        }
        Ok(format!("{configs} configurations, {rows} strata checked"))
    };
    result(3, "fiber ranks and base change", run())
}

fn random_row(rng: &mut Pcg64, vars: &[String]) -> Vec<Monomial> {
    let len = rng.gen_range(1..=5);
    let nvars = rng.gen_range(1..=vars.len());
    (0..len)
        .map(|_| {
            let deg = rng.gen_range(1..=3);
            let mut m = Monomial::one();
            for _ in 0..deg {
                m = m.mul(&Monomial::var(&vars[rng.gen_range(0..nvars)]));
            }
            m
        })
        .collect()
}

pub fn syzygy_oracle() -> CriterionResult {
    let run = || -> Result<String, String> {
        let vars: Vec<String> = (1..=8).map(|i| format!("x{i}")).collect();
        let mut rng = Pcg64::seed_from_u64(SEED);
        let mut rows: Vec<Vec<Monomial>> = shape_catalog()
            .iter()
            .map(|s| pushforward(&shape_config(s, &vec![1; s.len()], BaseMode::Local).unwrap()).beta.entries)
            .collect();
        rows.extend((0..60).map(|_| random_row(&mut rng, &vars)));
        for row in &rows {
            let polys: Vec<Polynomial> = row.iter().cloned().map(Polynomial::from).collect();
            let brute = truncated_kernel_dim(&polys, 6).map_err(|e| e.to_string())?;
            let spanned = generated_degree_dims(&polys, &monomial_syzygies(row), 6).map_err(|e| e.to_string())?;
            ensure(brute == spanned, || format!("row {row:?}: kernel {brute:?}, generated {spanned:?}"))?;
        }
        Ok(format!("{} rows agree in every degree ≤ 6", rows.len()))
    };
    result(4, "syzygy oracle", run())
}

pub fn blowup_resolution() -> CriterionResult {
    let run = || -> Result<String, String> {
        let mut out = Vec::new();
        for (r, want) in [(3usize, (3, 2)), (4, (6, 3))] {
            let cfg = FamilyConfig::plain(&vec![1; r], BaseMode::Local);
            let row = pushforward(&cfg).beta.entries;
            let before = kernel_local_freeness(&row, DEFAULT_DEGREE_BOUND).map_err(|e| e.to_string())?;
            let expected = Freeness::NotFree { origin: want.0, generic: want.1 };
            ensure(before == expected, || format!("r = {r}: {before} before blowup, expected {expected}"))?;
            let center = cfg.universe();
            let report = resolve_check(&cfg, &[BlowupSpec::new(&center).map_err(|e| e.to_string())?], DEFAULT_DEGREE_BOUND)
                .map_err(|e| e.to_string())?;
            ensure(report.resolved(), || {
                let bad: Vec<String> =
                    report.leaves.iter().filter(|l| !l.verdict.is_free()).map(|l| format!("{:?} {}", l.path, l.verdict)).collect();
                format!("r = {r}: charts not free after blowup: {}", bad.join("; "))
            })?;
            out.push(format!("r = {r}: {before}, {} charts free", report.leaves.len()));
        }
        Ok(out.join("; "))
    };
    result(5, "blowup resolution", run())
}

pub fn section_extension() -> CriterionResult {
    let run = || -> Result<String, String> {
        for m in 1..=5i64 {
            let mu = m as u32;
            let rep = extend_all(m, TwistSpec::None, 5).map_err(|e| e.to_string())?;
            let want: Vec<Section> = (0..=mu).filter(|&i| i != 1).map(|i| Section { m: mu, i }).collect();
            let first = &rep.levels[0];
            let obstructed: Vec<Section> =
                first.statuses.iter().filter(|(_, s)| *s == Status::Obstructed).map(|(x, _)| *x).collect();
            ensure(obstructed == [Section { m: mu, i: 1 }], || format!("m = {m}: level 1 obstructs {obstructed:?}"))?;
            ensure(rep.surviving() == want, || format!("m = {m}: surviving {:?}", rep.surviving()))?;
            ensure(rep.levels.iter().all(|l| l.obstruction == 0), || format!("m = {m}: nonzero obstruction space"))?;
            let tw = extend_all(m, TwistSpec::D0MinusD1, 5).map_err(|e| e.to_string())?;
            let full: Vec<Section> = (1..=mu).map(|i| Section { m: mu, i }).collect();
            ensure(tw.central == full && tw.surviving() == full, || format!("m = {m}, twisted: surviving {:?}", tw.surviving()))?;
            ensure(tw.levels.iter().all(|l| l.obstruction == 0), || format!("m = {m}, twisted: nonzero obstruction space"))?;
        }
        Ok("m = 1..5 through level 5: codimension-one survivors untwisted, everything twisted".into())
    };
    result(6, "section extension", run())
}

pub fn cocycle() -> CriterionResult {
    let run = || -> Result<String, String> {
        let mut mutations = 0;
        for m in 0..=5 {
            let t = Trivialization::standard(m);
            let c = check_cocycle(&t);
            ensure(c.ok, || format!("m = {m}: {}", c.failure.unwrap_or_default()))?;
            for (what, mutated) in t.single_exponent_mutations() {
                ensure(!check_cocycle(&mutated).ok, || format!("m = {m}: mutation {what} still passes"))?;
                mutations += 1;
            }
        }
        Ok(format!("m = 0..5 glue; {mutations} single-exponent mutations all rejected"))
    };
    result(7, "cocycle", run())
}

fn random_multidegree(rng: &mut Pcg64, r: usize) -> MultiDegree {
    MultiDegree::new((0..r).map(|_| rng.gen_range(-6..=6)).collect()).unwrap()
}

/// A random connected genus-one curve: an elliptic core or a cycle of
/// rational curves, with trees of rational curves attached.
fn random_curve(rng: &mut Pcg64) -> (CurveGraph, BundleOnCurve) {
    let mut comps = Vec::new();
    let mut nodes = Vec::new();
    let cycle = rng.gen_range(0..=3);
    if cycle == 0 {
        comps.push(Component::elliptic("e"));
    } else {
        for i in 0..cycle {
            comps.push(Component::rational(&format!("r{i}")));
        }
        for i in 0..cycle {
            let next = format!("r{}", (i + 1) % cycle);
            nodes.push(Node(NodeEnd::new(&format!("r{i}"), PointLabel::Infinity), NodeEnd::new(&next, PointLabel::Zero)));
        }
    }
    for i in 0..rng.gen_range(0..=4) {
        let parent = comps[rng.gen_range(0..comps.len())].id.clone();
        let id = format!("c{i}");
        nodes.push(Node(NodeEnd::new(&parent, PointLabel::Generic(format!("p{i}"))), NodeEnd::new(&id, PointLabel::Zero)));
        comps.push(Component::rational(&id));
    }
    let mut bundle = BundleOnCurve::new(&comps.iter().map(|c| (c.id.clone(), rng.gen_range(-2..=3))).collect::<Vec<_>>());
    if cycle == 0 {
        match bundle.degrees["e"] {
            0 if rng.gen_bool(0.5) => bundle = bundle.with_trivial("e"),
            1 => {
                if let Some(end) = nodes.iter().map(|n| &n.0).find(|e| e.component == "e") {
                    if rng.gen_bool(0.5) {
                        bundle = bundle.with_divisor_at(end.clone());
                    }
                }
            }
            _ => {}
        }
    }
    (CurveGraph::new(comps, nodes).expect("valid curve"), bundle)
}

pub fn property_suites() -> CriterionResult {
    let run = || -> Result<String, String> {
        let mut rng = Pcg64::seed_from_u64(SEED);
        for _ in 0..500 {
            let r = rng.gen_range(1..=4);
            let a = random_multidegree(&mut rng, r);
            let h = h_multi(&a);
            let dual = MultiDegree::new(a.degrees().iter().map(|d| -d - 2).collect()).unwrap();
            let hd = h_multi(&dual);
            ensure((0..=r).all(|i| h[i] == hd[r - i]), || format!("Serre duality fails for {a}"))?;
            let alt: i64 = h.iter().enumerate().map(|(i, &x)| if i % 2 == 0 { x as i64 } else { -(x as i64) }).sum();
            ensure(alt == euler_char_multi(&a), || format!("χ mismatch for {a}"))?;
            if r >= 2 {
                let (x, y) = a.degrees().split_at(rng.gen_range(1..r));
                let chi = |d: &[i64]| euler_char_multi(&MultiDegree::new(d.to_vec()).unwrap());
                ensure(chi(x) * chi(y) == euler_char_multi(&a), || format!("χ not multiplicative for {a}"))?;
            }
        }
        for _ in 0..100 {
            let (graph, bundle) = random_curve(&mut rng);
            let (h0, h1) = h0_h1(&graph, &bundle).map_err(|e| e.to_string())?;
            let chi = euler_char(&graph, &bundle).map_err(|e| e.to_string())?;
            ensure(h0 as i64 - h1 as i64 == chi, || format!("h⁰ − h¹ ≠ χ on {graph:?} with {bundle:?}"))?;
        }
        let vars: Vec<String> = (1..=4).map(|i| format!("x{i}")).collect();
        for _ in 0..50 {
            let mut row = random_row(&mut rng, &vars);
            row.truncate(4);
            let g = random_row(&mut rng, &vars)[0].clone();
            let scaled: Vec<Monomial> = row.iter().map(|m| m.mul(&g)).collect();
            let a = kernel_local_freeness(&row, DEFAULT_DEGREE_BOUND).map_err(|e| e.to_string())?;
            let b = kernel_local_freeness(&scaled, DEFAULT_DEGREE_BOUND).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("{row:?}: {a} but {b} after multiplying by {g}"))?;
        }
        Ok("500 multidegrees, 100 nodal curves, 50 rows".into())
    };
    result(8, "property suites", run())
}

pub fn run_all() -> Vec<CriterionResult> {
    vec![
        one_tail_direct_image(),
        splitting_certificates(),
        base_change_table(),
        syzygy_oracle(),
        blowup_resolution(),
        section_extension(),
        cocycle(),
        property_suites(),
    ]
}
