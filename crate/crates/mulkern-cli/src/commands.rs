//! One function per command; each fills a [`Recorder`].

use std::collections::BTreeMap;
use std::path::Path;

use mulkern::birat::{
    self, aux_fixed_default, auxiliary_point_check, default_map_points, elliptic_map_check, elliptic_points_check, root_variant_probe,
    solve_ybar_perturbative, taylor_in_gap, IdentitySpec, KernelKind, SolverStatus,
};
use mulkern::closed::{
    check_heun_equations, check_multipoint, check_third_order_equations, compare_kernels, oracle_first_order, oracle_heun_algebraic,
    oracle_heun_hypergeometric, oracle_third_order,
};
use mulkern::exact::Rat;
use mulkern::kernel::{
    boundary_check, build_gen_kernel, build_kernel, kernel_diffeq_check, negative_powers_check, symmetry_check, KernelSeries,
};
use mulkern::ode::{expand_solution, substitution_residual, DiffOp, Family};
use mulkern::sc::{
    check_basis, evaluate_gen_product_identity, evaluate_product_identity, gen_structure_constants, structure_constants, GenSCTable,
    SCTable,
};
use mulkern::{assoc, verlinde};
use serde_json::json;

use crate::cache::{cache_roundtrip, Cache, CachedTable};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::ops::{operator, operator_with};
use crate::report::{Outcome, Recorder};

pub mod anchor {
    pub const SOLUTION: &str = "normalized analytic solution";
    pub const STRUCTURE: &str = "structure constants";
    pub const GEN_STRUCTURE: &str = "generalized structure constants";
    pub const KERNEL: &str = "kernel characterization";
    pub const FIRST_ORDER: &str = "first-order kernel";
    pub const HEUN_HYPERGEOMETRIC: &str = "four-point kernel, hypergeometric form";
    pub const HEUN_ALGEBRAIC: &str = "four-point kernel, algebraic form";
    pub const HEUN_EQUATIONS: &str = "four-point kernel equations";
    pub const THIRD_ORDER: &str = "third-order kernel";
    pub const MULTIPOINT: &str = "multi-point kernel";
    pub const ASSOC: &str = "associativity";
    pub const PRODUCT: &str = "product identity";
    pub const BASIS: &str = "product basis";
    pub const BIRATIONAL: &str = "birational kernel";
    pub const CURVE: &str = "curve-point kernel";
    pub const SOLVER: &str = "perturbative change of variables";
    pub const VERLINDE: &str = "tetrahedron kernel";
    pub const CACHE: &str = "artifact cache";
}

pub const ORACLES: [&str; 8] = [
    "basis",
    "first_order",
    "heun_algebraic",
    "heun_equations",
    "heun_hypergeometric",
    "multipoint",
    "third_order",
    "third_order_equations",
];

pub const BIRAT_EXTRAS: [&str; 5] = ["auxiliary_point", "curve_map", "curve_points", "root_variant", "solver"];

pub(crate) fn sc_table(cache: Option<&Cache>, op: &DiffOp, n: usize) -> Result<SCTable> {
    let compute = || Ok(structure_constants(&expand_solution(op, 2 * n)?, n)?);
    match cache {
        Some(c) => Ok(c.get_or_compute(op, n, compute)?.0),
        None => compute(),
    }
}

pub(crate) fn gen_table(cache: Option<&Cache>, op: &DiffOp, n: usize) -> Result<GenSCTable> {
    let compute = || Ok(gen_structure_constants(&expand_solution(op, n)?, n)?);
    match cache {
        Some(c) => Ok(c.get_or_compute(op, n, compute)?.0),
        None => compute(),
    }
}

pub(crate) fn kernel_of(cache: Option<&Cache>, op: &DiffOp, n: usize) -> Result<KernelSeries> {
    Ok(if op.g() == 1 { build_kernel(&sc_table(cache, op, n)?) } else { build_gen_kernel(&gen_table(cache, op, n)?) })
}

fn n_or(cfg: &RunConfig, default: usize) -> usize {
    cfg.n.unwrap_or(default)
}

fn need_g1(op: &DiffOp, cmd: &str) -> Result<()> {
    if op.g() != 1 {
        return Err(CliError::Config(format!("{cmd} needs a one-variable operator; use the generalized command for g = {}", op.g())));
    }
    Ok(())
}

fn cache(cfg: &RunConfig) -> Cache {
    Cache::resolve(cfg.cache.as_deref())
}

pub fn expand(cfg: &RunConfig, rec: &mut Recorder) -> Result<()> {
    let op = operator(cfg)?;
    let n = n_or(cfg, 6);
    let sol = expand_solution(&op, n)?;
    rec.output("solution", sol.polys().iter().map(|p| p.to_string()).collect::<Vec<_>>())?;
    rec.record("expand.normalized", anchor::SOLUTION, || Outcome::new(sol.p(0).to_string() == "1", sol.p(0).to_string()))?;
    rec.record("expand.residual", anchor::SOLUTION, || {
        let res = substitution_residual(&op, &sol)?;
        let shown: Vec<(u32, String)> = res.iter().take(3).map(|(k, p)| (*k, p.to_string())).collect();
        Outcome::new(res.is_empty(), json!({ "nonzero_orders": shown }))
    })
}

fn table_output<T: CachedTable>(rec: &mut Recorder, t: &T) -> Result<()> {
    rec.output("table", t.to_entries())
}

pub fn sctable(cfg: &RunConfig, rec: &mut Recorder) -> Result<()> {
    let op = operator(cfg)?;
    need_g1(&op, "sctable")?;
    let n = n_or(cfg, 6);
    let c = cache(cfg);
    let t = sc_table(Some(&c), &op, n)?;
    table_output(rec, &t)?;
    rec.record("sctable.symmetric", anchor::STRUCTURE, || {
        let a = t.asymmetry();
        Outcome::new(a.is_none(), json!({ "first_asymmetric": a }))
    })?;
    rec.record("sctable.triangular", anchor::STRUCTURE, || {
        let v = t.triangular_violation();
        Outcome::new(v.is_none(), json!({ "first_violation": v }))
    })?;
    rec.record("sctable.product_identity", anchor::PRODUCT, || {
        let sol = expand_solution(&op, t.max_k().max(n))?;
        let r = evaluate_product_identity(&t, &sol, cfg.samples.unwrap_or(10), cfg.seed)?;
        Outcome::new(r.pass, r)
    })?;
    rec.record("sctable.cache_roundtrip", anchor::CACHE, || Outcome::new(cache_roundtrip(&c, &op, n, &t)?, json!({ "depth": n })))
}

pub fn gensctable(cfg: &RunConfig, rec: &mut Recorder) -> Result<()> {
    let op = operator(cfg)?;
    let n = n_or(cfg, 4);
    let c = cache(cfg);
    let t = gen_table(Some(&c), &op, n)?;
    table_output(rec, &t)?;
    rec.record("gensctable.support", anchor::GEN_STRUCTURE, || {
        let excess = t.support_excess();
        Outcome::new(excess == 0, json!({ "support_bound": t.support_bound(), "excess": excess }))
    })?;
    rec.record("gensctable.product_identity", anchor::PRODUCT, || {
        let sol = expand_solution(&op, n)?;
        let r = evaluate_gen_product_identity(&t, &sol, cfg.samples.unwrap_or(10), cfg.seed)?;
        Outcome::new(r.pass, r)
    })?;
    rec.record("gensctable.cache_roundtrip", anchor::CACHE, || Outcome::new(cache_roundtrip(&c, &op, n, &t)?, json!({ "depth": n })))
}

fn oracle_for(op: &DiffOp, n: u32, m: u32) -> Result<Option<KernelSeries>> {
    Ok(match op.family() {
        Family::FirstOrderG => Some(oracle_first_order(op.g(), n, m)?),
        Family::Heun4 => Some(oracle_heun_hypergeometric(op, n, m)?),
        Family::ThirdOrder3 => Some(oracle_third_order(op, n, m)?),
        _ => None,
    })
}

pub fn kernel(cfg: &RunConfig, rec: &mut Recorder) -> Result<()> {
    let op = operator(cfg)?;
    let n = n_or(cfg, 6);
    let k = kernel_of(Some(&cache(cfg)), &op, n)?;
    rec.output("kernel", k.to_export())?;
    rec.record("kernel.negative_powers", anchor::KERNEL, || {
        let c = negative_powers_check(&k);
        Outcome::new(c.pass, c)
    })?;
    rec.record("kernel.boundary", anchor::KERNEL, || {
        let c = boundary_check(&k);
        Outcome::new(c.pass, c)
    })?;
    rec.record("kernel.symmetry", anchor::KERNEL, || {
        let c = symmetry_check(&k);
        Outcome::new(c.pass, c)
    })?;
    let de = kernel_diffeq_check(&k, &op);
    rec.record("kernel.differential_equation", anchor::KERNEL, || {
        let d = de.clone()?;
        Outcome::new(d.symmetric.pass, json!({ "window": d.window, "check": d.symmetric }))
    })?;
    rec.record("kernel.adjoint_regular", anchor::KERNEL, || match de?.regular {
        Some(c) => Outcome::new(c.pass, c),
        None => Outcome::skipped("defined for one-variable kernels"),
    })?;
    let oracle_anchor = match op.family() {
        Family::Heun4 => anchor::HEUN_HYPERGEOMETRIC,
        Family::ThirdOrder3 => anchor::THIRD_ORDER,
        _ => anchor::FIRST_ORDER,
    };
    rec.record("kernel.oracle", oracle_anchor, || {
        let m = cfg.m.unwrap_or(n as u32 + 2);
        match oracle_for(&op, n as u32, m)? {
            Some(o) => {
                let r = compare_kernels(&o, &k, n as u32);
                Outcome::new(r.pass, r)
            }
            None => Outcome::skipped("no closed form for this family"),
        }
    })
}

pub fn assoc_cmd(cfg: &RunConfig, rec: &mut Recorder) -> Result<()> {
    let op = operator(cfg)?;
    need_g1(&op, "assoc")?;
    let n = n_or(cfg, 5);
    let t = sc_table(Some(&cache(cfg)), &op, 2 * n)?;
    rec.record("assoc.associativity", anchor::ASSOC, || {
        let r = assoc::assoc_check(&t, n)?;
        Outcome::new(r.pass, r)
    })
}

pub fn genassoc(cfg: &RunConfig, rec: &mut Recorder) -> Result<()> {
    let op = operator(cfg)?;
    let n = n_or(cfg, 4);
    let t = gen_table(Some(&cache(cfg)), &op, n)?;
    rec.record("genassoc.associativity", anchor::ASSOC, || {
        let r = assoc::gen_assoc_check(&t, n)?;
        Outcome::new(r.pass, r)
    })
}

pub(crate) fn product_check(cache: Option<&Cache>, op: &DiffOp, n: usize) -> Result<assoc::ProductReport> {
    let sol = expand_solution(op, if op.g() == 1 { 2 * n } else { n })?;
    let k = kernel_of(cache, op, n)?;
    Ok(assoc::product_identity_check(&k, &sol, n as u32)?)
}

pub fn productcheck(cfg: &RunConfig, rec: &mut Recorder) -> Result<()> {
    let op = operator(cfg)?;
    let n = n_or(cfg, if op.g() == 1 { 6 } else { 4 });
    let c = cache(cfg);
    rec.record("productcheck.residue_pairing", anchor::PRODUCT, || {
        let r = product_check(Some(&c), &op, n)?;
        Outcome::new(r.pass, r)
    })
}

fn implied_family(cfg: &RunConfig, want: Family) -> Result<()> {
    match cfg.family {
        Some(f) if f != want => Err(CliError::Config(format!("this oracle needs family {}, got {}", want.name(), f.name()))),
        _ => Ok(()),
    }
}

fn implied_op(cfg: &RunConfig, want: Family, base: &[(&str, Rat)]) -> Result<DiffOp> {
    implied_family(cfg, want)?;
    let base: BTreeMap<String, Rat> = base.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    operator_with(cfg, want, &base)
}

pub(crate) fn oracle_compare(oracle: &KernelSeries, op: &DiffOp, n: u32) -> Result<Outcome> {
    let r = compare_kernels(oracle, &kernel_of(None, op, n as usize)?, n);
    Outcome::new(r.pass, r)
}

pub fn oracle(cfg: &RunConfig, rec: &mut Recorder) -> Result<()> {
    let id = cfg.target()?;
    let name = format!("oracle.{id}");
    match id {
        "first_order" => {
            let op = implied_op(cfg, Family::FirstOrderG, &[])?;
            let n = n_or(cfg, if op.g() == 1 { 8 } else { 6 }) as u32;
            let m = cfg.m.unwrap_or(n + 2);
            rec.record(&name, anchor::FIRST_ORDER, || oracle_compare(&oracle_first_order(op.g(), n, m)?, &op, n))
        }
        "heun_hypergeometric" => {
            let op = implied_op(cfg, Family::Heun4, &[])?;
            let n = n_or(cfg, 6) as u32;
            let m = cfg.m.unwrap_or(n + 2);
            rec.record(&name, anchor::HEUN_HYPERGEOMETRIC, || oracle_compare(&oracle_heun_hypergeometric(&op, n, m)?, &op, n))
        }
        "heun_algebraic" => {
            let op = implied_op(cfg, Family::Heun4, &[("s1", Rat::one()), ("r1", Rat::one())])?;
            let n = n_or(cfg, 6) as u32;
            rec.record(&name, anchor::HEUN_ALGEBRAIC, || oracle_compare(&oracle_heun_algebraic(&op, n)?, &op, n))
        }
        "heun_equations" => {
            let op = implied_op(cfg, Family::Heun4, &[])?;
            let n = n_or(cfg, 8);
            rec.record(&name, anchor::HEUN_EQUATIONS, || {
                let r = check_heun_equations(&kernel_of(None, &op, n)?, &op)?;
                Outcome::new(r.pass, r)
            })
        }
        "third_order" => {
            let op = implied_op(cfg, Family::ThirdOrder3, &[])?;
            let n = n_or(cfg, 6) as u32;
            let m = cfg.m.unwrap_or(n + 2);
            rec.record(&name, anchor::THIRD_ORDER, || oracle_compare(&oracle_third_order(&op, n, m)?, &op, n))
        }
        "third_order_equations" => {
            let op = implied_op(cfg, Family::ThirdOrder3, &[])?;
            let n = n_or(cfg, 6);
            rec.record(&name, anchor::THIRD_ORDER, || {
                let r = check_third_order_equations(&kernel_of(None, &op, n)?, &op)?;
                Outcome::new(r.pass, r)
            })
        }
        "multipoint" => {
            let op = implied_op(cfg, Family::HeunN, &[])?;
            let n = n_or(cfg, 4) as u32;
            let d = cfg.degree.unwrap_or(10);
            rec.record(&name, anchor::MULTIPOINT, || {
                let r = check_multipoint(&op, n, d)?;
                Outcome::new(r.pass, r)
            })
        }
        "basis" => {
            let family = cfg.family.unwrap_or(Family::FirstOrderG);
            let mut c = cfg.clone();
            c.g = Some(cfg.g.unwrap_or(2));
            let op = operator_with(&c, family, &BTreeMap::new())?;
            let w = n_or(cfg, 4);
            rec.record(&name, anchor::BASIS, || {
                let r = check_basis(&expand_solution(&op, w)?, w)?;
                Outcome::new(r.independent && r.spanning, r)
            })
        }
        other => Err(CliError::Config(format!("unknown oracle {other:?}; expected one of {}", ORACLES.join(", ")))),
    }
}

pub(crate) fn solver_outcome(order: u32) -> Result<Outcome> {
    let fx = birat::fixture("exp_linear")?;
    let phi = fx.phi.clone();
    let psi = fx.psi.clone();
    let out = solve_ybar_perturbative(KernelKind::Exponential, &phi, &psi, order)?;
    let taylor = taylor_in_gap(&map_expr(&fx)?, order)?;
    let matched =
        out.status == SolverStatus::Solved && out.q.iter().zip(&taylor[1..]).all(|(a, b)| a == b) && out.q.len() == order as usize;
    Outcome::new(
        matched && out.measure_failure.is_none(),
        json!({
            "status": out.status,
            "q": out.q.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
            "taylor": taylor[1..].iter().map(|q| q.to_string()).collect::<Vec<_>>(),
            "measure_failure": out.measure_failure,
        }),
    )
}

/// The fixture's map for the single derived slot, over `x1, x2, x3, y, z`.
fn map_expr(fx: &IdentitySpec) -> Result<String> {
    fx.map.first().map(|(_, e)| e.clone()).ok_or_else(|| CliError::Config(format!("fixture {} has no map", fx.name)))
}

pub fn birat_cmd(cfg: &RunConfig, rec: &mut Recorder) -> Result<()> {
    let target = cfg.target()?;
    let samples = cfg.samples.unwrap_or(20);
    let name = format!("birat.{target}");
    match target {
        "curve_points" => rec.record(&name, anchor::CURVE, || {
            let r = elliptic_points_check(samples, cfg.seed)?;
            Outcome::new(r.pass, r)
        }),
        "auxiliary_point" => rec.record(&name, anchor::CURVE, || {
            let r = auxiliary_point_check(&aux_fixed_default(), samples, cfg.seed)?;
            Outcome::new(r.pass, r)
        }),
        "curve_map" => rec.record(&name, anchor::CURVE, || {
            let r = elliptic_map_check(&default_map_points(), cfg.precision, 200, -150)?;
            Outcome::new(r.pass, r)
        }),
        "root_variant" => rec.record(&name, anchor::BIRATIONAL, || {
            let r = root_variant_probe(cfg.samples.unwrap_or(5), cfg.seed, cfg.precision)?;
            let threshold = -(cfg.precision as i64) * 3 / 4;
            Outcome::new(r.unchanged_fails && r.rooted_log2.is_none_or(|l| l < threshold), r)
        }),
        "solver" => rec.record(&name, anchor::SOLVER, || solver_outcome(cfg.n.map_or(2, |n| n as u32))),
        fixture if birat::FIXTURES.contains(&fixture) => {
            let spec = birat::fixture(fixture)?;
            rec.record(&name, anchor::BIRATIONAL, || {
                let r = birat::verify_identity(&spec, samples, cfg.seed)?;
                Outcome::new(r.pass, r)
            })
        }
        path => {
            let p = Path::new(path);
            if !p.is_file() {
                return Err(CliError::Config(format!(
                    "{path:?} is neither a fixture ({}, {}) nor a file",
                    birat::FIXTURES.join(", "),
                    BIRAT_EXTRAS.join(", ")
                )));
            }
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let spec: IdentitySpec = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            let name = format!("birat.{}", spec.name);
            rec.record(&name, anchor::BIRATIONAL, || {
                let r = birat::verify_identity(&spec, samples, cfg.seed)?;
                Outcome::new(r.pass, r)
            })
        }
    }
}

pub(crate) fn verlinde_assoc(levels: impl Iterator<Item = usize>) -> Result<Outcome> {
    let mut outcomes = Vec::new();
    for n in levels {
        let o = verlinde::assoc_test(n)?;
        let pass = o.pass;
        outcomes.push(o);
        if !pass {
            break;
        }
    }
    let pass = outcomes.iter().all(|o| o.pass);
    let triples: usize = outcomes.iter().map(|o| o.triples).sum();
    let failure = outcomes.iter().find(|o| !o.pass).cloned();
    Outcome::new(pass, json!({ "levels": outcomes.len(), "triples": triples, "failure": failure }))
}

pub fn verlinde_cmd(cfg: &RunConfig, rec: &mut Recorder) -> Result<()> {
    if cfg.assoc {
        let max = match (cfg.max_n, cfg.target.as_deref()) {
            (Some(m), _) => m,
            (None, Some(t)) => t.parse().map_err(|_| CliError::Config(format!("verlinde --assoc expects a level, got {t:?}")))?,
            (None, None) => 20,
        };
        if max == 0 {
            return Err(CliError::Config("max level must be at least 1".into()));
        }
        return rec.record("verlinde.assoc", anchor::VERLINDE, || verlinde_assoc(1..=max));
    }
    match cfg.target()? {
        "fibers" => {
            rec.record("verlinde.fibers_sampled", anchor::VERLINDE, || {
                let r = verlinde::fiber_samples(cfg.samples.unwrap_or(500), cfg.seed, 60)?;
                Outcome::new(r.pass, r)
            })?;
            rec.record("verlinde.fibers_grid", anchor::VERLINDE, || {
                let r = verlinde::fiber_grid(n_or(cfg, 6))?;
                Outcome::new(r.pass, r)
            })
        }
        t => {
            let n: usize = t.parse().map_err(|_| CliError::Config(format!("verlinde expects a level or \"fibers\", got {t:?}")))?;
            let alg = verlinde::build_algebra(n).map_err(|e| CliError::Config(e.to_string()))?;
            let products: Vec<(usize, usize, Vec<usize>)> = (0..alg.dim())
                .flat_map(|i| (i..alg.dim()).map(move |j| (i, j)))
                .map(|(i, j)| (i, j, alg.product(i, j).iter().enumerate().filter(|(_, &c)| c != 0).map(|(k, _)| k).collect()))
                .collect();
            rec.output("products", products)?;
            rec.record("verlinde.assoc", anchor::VERLINDE, || {
                let o = verlinde::assoc_test_algebra(&alg);
                Outcome::new(o.pass, o)
            })?;
            rec.record("verlinde.commutative", anchor::VERLINDE, || Outcome::new(alg.is_commutative(), json!({ "level": n })))
        }
    }
}
