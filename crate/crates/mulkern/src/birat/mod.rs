//! Birational kernel identities checked exactly at seeded rational points.

mod elliptic;
mod solver;

pub use elliptic::{
    aux_fixed_default, aux_point, auxiliary_point_check, default_map_points, elliptic_map_check, elliptic_points_check, root_variant_probe,
    AuxParams, AuxPointReport, MapPoint, MapPointResult, MapReport, PointsReport, RootVariantReport,
};
pub use solver::{solve_ybar_perturbative, taylor_in_gap, SolverOutcome, SolverStatus};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{parse_ratfunc, Assignment, Poly, Rat, RatFunc, Ring, Sampler};

/// Coordinate height bound for sampled rationals.
pub const HEIGHT: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `K = exp(c φ) ψ`; the φ-identity is additive.
    Exponential,
    /// `K = φ^c ψ`; the φ-identity is multiplicative.
    Power,
}

/// A square root carried as an extra kernel slot with `root² = square`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootSpec {
    pub square: String,
}

/// `K(L1) K(L2) dy = K(R1) K(R2) dỹ` for a kernel `φ^c ψ` or `exp(cφ) ψ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySpec {
    pub name: String,
    pub kind: KernelKind,
    /// Kernel argument names; with a root, the last slot is the root.
    pub slots: Vec<String>,
    pub phi: String,
    pub psi: String,
    #[serde(default)]
    pub root: Option<RootSpec>,
    /// Sampled variables.
    pub free: Vec<String>,
    /// Coordinates computed from earlier ones, in order.
    #[serde(default)]
    pub derived: Vec<(String, String)>,
    /// Tilde coordinates as functions of the others.
    pub map: Vec<(String, String)>,
    pub lhs: [Vec<String>; 2],
    pub rhs: [Vec<String>; 2],
    /// Integration variable and its image.
    pub measure: (String, String),
}

/// Schwartz–Zippel style bound for one identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SzBound {
    pub degree: u32,
    pub trials: usize,
    /// Largest probability of any single sampled coordinate value.
    pub point_mass: Rat,
    pub per_trial: Rat,
    /// `per_trial · trials`.
    pub summed: Rat,
    /// `per_trial^trials`: all trials vanish on a nonzero difference.
    pub all_trials: Rat,
}

impl SzBound {
    pub fn new(degree: u32, trials: usize, height: u64) -> Self {
        let point_mass = Rat::new(1, height as i64);
        let per_trial = (&point_mass * Rat::int(degree as i64)).min_one();
        SzBound {
            degree,
            trials,
            summed: (&per_trial * Rat::int(trials as i64)).min_one(),
            all_trials: per_trial.pow(trials as i32),
            per_trial,
            point_mass,
        }
    }
}

trait MinOne {
    fn min_one(self) -> Rat;
}

impl MinOne for Rat {
    fn min_one(self) -> Rat {
        if self > Rat::one() {
            Rat::one()
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
    pub bound: SzBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub check: String,
    pub point: BTreeMap<String, Rat>,
    pub lhs: Rat,
    pub rhs: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub fixture: String,
    pub pass: bool,
    pub points: usize,
    pub seed: u64,
    pub checks: Vec<IdentityCheck>,
    pub failure: Option<Witness>,
}

/// Upper bounds on numerator and denominator total degree.
#[derive(Debug, Clone, PartialEq)]
struct Deg {
    num: u32,
    den: u32,
}

impl Ring for Deg {
    fn plus(&self, o: &Self) -> Self {
        Deg { num: (self.num + o.den).max(o.num + self.den), den: self.den + o.den }
    }
    fn minus(&self, o: &Self) -> Self {
        self.plus(o)
    }
    fn times(&self, o: &Self) -> Self {
        Deg { num: self.num + o.num, den: self.den + o.den }
    }
    fn negate(&self) -> Self {
        self.clone()
    }
    fn scale(&self, _: &Rat) -> Self {
        self.clone()
    }
    fn is_exact_zero(&self) -> bool {
        false
    }
    fn const_like(&self, _: &Rat) -> Self {
        Deg { num: 0, den: 0 }
    }
    fn try_inv(&self) -> Option<Self> {
        Some(Deg { num: self.den, den: self.num })
    }
}

/// Parsed identity over the full coordinate list.
struct Compiled {
    spec: IdentitySpec,
    derived: Vec<(String, RatFunc)>,
    map: Vec<(String, RatFunc)>,
    /// `(name, lhs, rhs)` in the coordinates.
    identities: Vec<(String, RatFunc, RatFunc)>,
}

fn parse_in(s: &str, vars: &[String]) -> Result<RatFunc> {
    let vs: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
    parse_ratfunc(s, &vs)
}

fn var(name: &str, coords: &[String]) -> RatFunc {
    RatFunc::from_poly(Poly::var_in(coords.to_vec(), name))
}

/// `f(args)` with `args` naming coordinates.
fn instance(f: &RatFunc, args: &[String], coords: &[String]) -> Result<RatFunc> {
    let a: Vec<RatFunc> = args.iter().map(|n| var(n, coords)).collect();
    let proto = RatFunc::constant_in(coords.to_vec(), Rat::zero());
    f.eval_in(&a, &proto)
}

fn combine(kind: KernelKind, a: RatFunc, b: RatFunc) -> RatFunc {
    match kind {
        KernelKind::Exponential => a.add(&b),
        KernelKind::Power => a.mul(&b),
    }
}

impl Compiled {
    fn new(spec: &IdentitySpec) -> Result<Self> {
        let mut coords = spec.free.clone();
        coords.extend(spec.derived.iter().map(|(n, _)| n.clone()));
        coords.extend(spec.map.iter().map(|(n, _)| n.clone()));
        for side in spec.lhs.iter().chain(&spec.rhs) {
            if side.len() != spec.slots.len() {
                return Err(Error::Invalid(format!("{}: arity {} vs {} slots", spec.name, side.len(), spec.slots.len())));
            }
            if let Some(v) = side.iter().find(|v| !coords.contains(v)) {
                return Err(Error::Invalid(format!("{}: unknown coordinate {v}", spec.name)));
            }
        }
        let (y, yt) = &spec.measure;
        if !coords.contains(y) || !spec.map.iter().any(|(n, _)| n == yt) {
            return Err(Error::Invalid(format!("{}: measure pair ({y}, {yt}) not declared", spec.name)));
        }
        let derived = spec.derived.iter().map(|(n, e)| Ok((n.clone(), parse_in(e, &coords)?))).collect::<Result<Vec<_>>>()?;
        let map = spec.map.iter().map(|(n, e)| Ok((n.clone(), parse_in(e, &coords)?))).collect::<Result<Vec<_>>>()?;
        let phi = parse_in(&spec.phi, &spec.slots)?;
        let psi = parse_in(&spec.psi, &spec.slots)?;
        let inst = |f: &RatFunc, s: &[Vec<String>; 2]| -> Result<(RatFunc, RatFunc)> {
            Ok((instance(f, &s[0], &coords)?, instance(f, &s[1], &coords)?))
        };
        let (pl1, pl2) = inst(&phi, &spec.lhs)?;
        let (pr1, pr2) = inst(&phi, &spec.rhs)?;
        let (sl1, sl2) = inst(&psi, &spec.lhs)?;
        let (sr1, sr2) = inst(&psi, &spec.rhs)?;
        let mut identities = vec![("phi".to_string(), combine(spec.kind, pl1, pl2), combine(spec.kind, pr1, pr2))];

        let ytf = &map.iter().find(|(n, _)| n == yt).expect("checked").1;
        let mut dyt = ytf.deriv_var(y);
        let mut roots = Vec::new();
        if let Some(r) = &spec.root {
            let sq = parse_in(&r.square, &spec.slots[..spec.slots.len() - 1])?;
            let k = spec.slots.len() - 1;
            for (side, args) in [("lhs", &spec.lhs[0]), ("lhs", &spec.lhs[1]), ("rhs", &spec.rhs[0]), ("rhs", &spec.rhs[1])] {
                let s = instance(&sq, &args[..k], &coords)?;
                let w = var(&args[k], &coords);
                if side == "lhs" {
                    // dw/dy = (∂square/∂y) / 2w
                    let dw = s.deriv_var(y).div(&w.scale(&Rat::int(2)))?;
                    dyt = dyt.add(&ytf.deriv_var(&args[k]).mul(&dw));
                }
                roots.push((format!("root {}", args[k]), w.mul(&w), s));
            }
        }
        identities.push(("measure".to_string(), sl1.mul(&sl2), sr1.mul(&sr2).mul(&dyt)));
        identities.extend(roots);
        Ok(Compiled { spec: spec.clone(), derived, map, identities })
    }

    /// Full coordinate assignment from free values; `None` on a pole.
    fn extend(&self, free: &Assignment) -> Option<Assignment> {
        let mut at = free.clone();
        for (n, f) in self.derived.iter().chain(&self.map) {
            let v = f.eval_named(&at).ok()?;
            at.insert(n.clone(), v);
        }
        Some(at)
    }

    /// Degree bound of each identity in the free variables.
    fn degrees(&self) -> Result<Vec<u32>> {
        let mut env: BTreeMap<String, Deg> = self.spec.free.iter().map(|n| (n.clone(), Deg { num: 1, den: 0 })).collect();
        let eval = |f: &RatFunc, env: &BTreeMap<String, Deg>| -> Result<Deg> {
            let args: Vec<Deg> = f.vars().iter().map(|v| env.get(v).cloned().unwrap_or(Deg { num: 0, den: 0 })).collect();
            f.eval_in(&args, &Deg { num: 0, den: 0 })
        };
        for (n, f) in self.derived.iter().chain(&self.map) {
            let d = eval(f, &env)?;
            env.insert(n.clone(), d);
        }
        self.identities
            .iter()
            .map(|(_, a, b)| {
                let (da, db) = (eval(a, &env)?, eval(b, &env)?);
                Ok((da.num + db.den).max(db.num + da.den))
            })
            .collect()
    }
}

fn any_pole(c: &Compiled, at: &Assignment) -> bool {
    c.identities
        .iter()
        .any(|(_, a, b)| a.den().eval_named(at).map_or(true, |v| v.is_zero()) || b.den().eval_named(at).map_or(true, |v| v.is_zero()))
}

/// Exact check at `samples` seeded points drawn by `draw`.
fn run(spec: &IdentitySpec, samples: usize, seed: u64) -> Result<IdentityReport> {
    let c = Compiled::new(spec)?;
    let degrees = c.degrees()?;
    let mut sampler = Sampler::new(seed, HEIGHT)?;
    let mut failure = None;
    let mut passed = vec![true; c.identities.len()];
    for _ in 0..samples {
        let at = sampler.retry(|s| {
            let free: Assignment = spec.free.iter().map(|n| (n.clone(), s.signed_rat())).collect();
            c.extend(&free).filter(|at| !any_pole(&c, at))
        })?;
        for (k, (name, a, b)) in c.identities.iter().enumerate() {
            let (va, vb) = (a.eval_named(&at)?, b.eval_named(&at)?);
            if va != vb {
                passed[k] = false;
                if failure.is_none() {
                    failure = Some(Witness { check: name.clone(), point: at.clone(), lhs: va, rhs: vb });
                }
            }
        }
    }
    let checks: Vec<IdentityCheck> = c
        .identities
        .iter()
        .zip(degrees)
        .zip(passed)
        .map(|(((name, _, _), d), pass)| IdentityCheck { name: name.clone(), pass, bound: SzBound::new(d, samples, HEIGHT) })
        .collect();
    Ok(IdentityReport { fixture: spec.name.clone(), pass: failure.is_none(), points: samples, seed, checks, failure })
}

/// Additive φ-identity and measure identity for exponential kernels.
pub fn verify_exponent_identity(spec: &IdentitySpec, samples: usize, seed: u64) -> Result<IdentityReport> {
    if spec.kind != KernelKind::Exponential {
        return Err(Error::Invalid(format!("{} is not exponential", spec.name)));
    }
    run(spec, samples, seed)
}

/// Multiplicative φ-identity, measure identity and root relations.
pub fn verify_power_identity(spec: &IdentitySpec, samples: usize, seed: u64) -> Result<IdentityReport> {
    if spec.kind != KernelKind::Power {
        return Err(Error::Invalid(format!("{} is not a power kernel", spec.name)));
    }
    run(spec, samples, seed)
}

pub fn verify_identity(spec: &IdentitySpec, samples: usize, seed: u64) -> Result<IdentityReport> {
    run(spec, samples, seed)
}

/// Tilde coordinates evaluated at one point.
pub fn map_at(spec: &IdentitySpec, free: &Assignment) -> Result<Assignment> {
    Compiled::new(spec)?.extend(free).ok_or(Error::DivisionByZero)
}

fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
    v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

pub const FIXTURES: [&str; 5] = ["exp_linear", "exp_laurent", "exp_laurent_root", "exp_linear_3", "root_curve_3"];

/// Built-in identities by name.
pub fn fixture(name: &str) -> Result<IdentitySpec> {
    let two = |phi: &str, psi: &str, map: &str| IdentitySpec {
        name: name.to_string(),
        kind: KernelKind::Exponential,
        slots: names(&["a", "b", "y"]),
        phi: phi.into(),
        psi: psi.into(),
        root: None,
        free: names(&["x1", "x2", "x3", "y", "z"]),
        derived: vec![],
        map: pairs(&[("yt", map)]),
        lhs: [names(&["x1", "x2", "y"]), names(&["y", "x3", "z"])],
        rhs: [names(&["x1", "x3", "yt"]), names(&["yt", "x2", "z"])],
        measure: ("y".into(), "yt".into()),
    };
    let laurent = "a*b*y + a/(b*y) + b/(a*y) + y/(a*b)";
    Ok(match name {
        "exp_linear" => two("a*b*y + y", "1/y", "(x1*x2 + x3*z + 1)/(x1*x3 + x2*z + 1)*y"),
        "exp_laurent" => two(laurent, "1/y", "(x1*x2 + x3*z)/(x1*x3 + x2*z)*y"),
        // coordinates are square roots of the original ones; dy/y = 2 dY/Y
        "exp_laurent_root" => two(laurent, "2/y", "(x1*x2 + x3*z)/(x1*x3 + x2*z)*y"),
        "exp_linear_3" => IdentitySpec {
            name: name.to_string(),
            kind: KernelKind::Exponential,
            slots: names(&["a", "b", "c", "y"]),
            phi: "a*b*c*y + y".into(),
            psi: "1/y".into(),
            root: None,
            free: names(&["x1", "x2", "x3", "x4", "x5", "y", "z"]),
            derived: vec![],
            map: pairs(&[("yt", "(x1*x2*x3 + x4*x5*z + 1)/(x1*x2*x4 + x3*x5*z + 1)*y")]),
            lhs: [names(&["x1", "x2", "x3", "y"]), names(&["y", "x4", "x5", "z"])],
            rhs: [names(&["x1", "x2", "x4", "yt"]), names(&["yt", "x3", "x5", "z"])],
            measure: ("y".into(), "yt".into()),
        },
        "root_curve_3" => IdentitySpec {
            name: name.to_string(),
            kind: KernelKind::Power,
            slots: names(&["a", "b", "c", "y", "w"]),
            phi: "(1 + w)/y".into(),
            psi: "1/w".into(),
            root: Some(RootSpec { square: "1 + a*b*c*y".into() }),
            free: names(&["x1", "x2", "x3", "x4", "x5", "w123", "w45"]),
            derived: pairs(&[("y", "(w123^2 - 1)/(x1*x2*x3)"), ("z", "(w45^2 - 1)/(y*x4*x5)")]),
            map: pairs(&[
                ("w124", "((x1*x2 - x5*z)*x4*w123 + (x3 - x4)*x1*x2*w45)/(x1*x2*x3 - x4*x5*z)"),
                ("w35", "((x3 - x4)*x5*z*w123 + (x1*x2 - x5*z)*x3*w45)/(x1*x2*x3 - x4*x5*z)"),
                (
                    "yt",
                    "(2*(x3 - x4)*(x1*x2 - x5*z)*(w123*w45 - 1) + x3*x4*(x1*x2 - x5*z)^2*y + x1*x2*x5*z*(x3 - x4)^2*y)\
                     /(x1*x2*x3 - x4*x5*z)^2",
                ),
            ]),
            lhs: [names(&["x1", "x2", "x3", "y", "w123"]), names(&["y", "x4", "x5", "z", "w45"])],
            rhs: [names(&["x1", "x2", "x4", "yt", "w124"]), names(&["yt", "x3", "x5", "z", "w35"])],
            measure: ("y".into(), "yt".into()),
        },
        other => return Err(Error::Invalid(format!("unknown fixture {other}; known: {}", FIXTURES.join(", ")))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(v: &[(&str, i64)]) -> Assignment {
        v.iter().map(|(n, k)| (n.to_string(), Rat::int(*k))).collect()
    }

    #[test]
    fn exp_linear_stated_point() {
        let s = fixture("exp_linear").unwrap();
        let m = map_at(&s, &at(&[("x1", 1), ("x2", 2), ("x3", 3), ("z", 4), ("y", 5)])).unwrap();
        assert_eq!(m["yt"], Rat::new(25, 4));
        let m = map_at(&s, &at(&[("x1", 1), ("x2", 3), ("x3", 3), ("z", 4), ("y", 5)])).unwrap();
        assert_eq!(m["yt"], Rat::int(5));
    }

    #[test]
    fn exponential_fixtures_pass() {
        for name in ["exp_linear", "exp_laurent", "exp_laurent_root", "exp_linear_3"] {
            let r = verify_exponent_identity(&fixture(name).unwrap(), 20, 7).unwrap();
            assert!(r.pass, "{name}: {:?}", r.failure);
            assert_eq!(r.checks.len(), 2);
            assert!(r.checks.iter().all(|c| c.bound.degree > 0 && c.bound.all_trials < Rat::new(1, 1 << 30)));
        }
    }

    #[test]
    fn wrong_map_is_caught() {
        let mut s = fixture("exp_linear").unwrap();
        s.map[0].1 = "(x1*x2 + x3*z)/(x1*x3 + x2*z)*y".into();
        let r = verify_exponent_identity(&s, 20, 1).unwrap();
        assert!(!r.pass);
        assert_eq!(r.failure.unwrap().check, "phi");
        assert!(verify_power_identity(&fixture("exp_linear").unwrap(), 1, 1).is_err());
    }

    #[test]
    fn root_curve_passes() {
        let s = fixture("root_curve_3").unwrap();
        let r = verify_power_identity(&s, 20, 3).unwrap();
        assert!(r.pass, "{:?}", r.failure);
        let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"root w124") && names.contains(&"root w35"));
    }

    #[test]
    fn root_curve_collapses_when_x3_equals_x4() {
        let s = fixture("root_curve_3").unwrap();
        let free = at(&[("x1", 2), ("x2", 3), ("x3", 5), ("x4", 5), ("x5", 7), ("w123", 11), ("w45", 13)]);
        let m = map_at(&s, &free).unwrap();
        assert_eq!(m["w124"], m["w123"]);
        assert_eq!(m["w35"], m["w45"]);
        assert_eq!(m["yt"], m["y"]);
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let s = fixture("root_curve_3").unwrap();
        let j = serde_json::to_string(&s).unwrap();
        let back: IdentitySpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<IdentitySpec>(&j.replace("\"kind\"", "\"kinds\"")).is_err());
    }
}
