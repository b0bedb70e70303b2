//! Elliptic-curve kernel: stated rational points, the map at high precision,
//! and the auxiliary-integration curve with its fixed point.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{parse_poly, BigF, Poly, Rat, Sampler};

const FT: &str = "(a*b + b*c + c*a - t)^2 + 4*a*b*c*(1 + t - (a + b + c))";

fn f_t(t: &Rat, a: &Rat, b: &Rat, c: &Rat) -> Rat {
    let s = a * b + b * c + c * a - t;
    &s * &s + Rat::int(4) * a * b * c * (Rat::one() + t - (a + b + c))
}

/// `(y, w_ab, w_cd)` on the curve over the pairs `(a, b)` and `(c, d)`.
fn stated_points(t: &Rat, a: &Rat, b: &Rat, c: &Rat, d: &Rat) -> [[Rat; 3]; 3] {
    let one = Rat::one();
    [
        [Rat::zero(), a * b - t, c * d - t],
        [one.clone(), a * b - a - b + t, c * d - c - d + t],
        [t.clone(), a * b - t * a - t * b + t, c * d - t * c - t * d + t],
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointsReport {
    pub pass: bool,
    /// Polynomial identities in `x1..x4, t`, one per stated point and curve.
    pub symbolic: Vec<(String, bool)>,
    pub draws: usize,
    pub failure: Option<String>,
}

/// Membership of the three stated points on both curves, as polynomial
/// identities and at seeded draws.
pub fn elliptic_points_check(draws: usize, seed: u64) -> Result<PointsReport> {
    let vars = ["x1", "x2", "x3", "x4", "t"];
    let f = parse_poly(FT, &["a", "b", "c", "t"])?;
    let v = |n: &str| Poly::var(&vars, n);
    let c = |k: i64| Poly::constant(&vars, Rat::int(k));
    let mut symbolic = Vec::new();
    for (curve, pairs) in [("source", [("x1", "x2"), ("x3", "x4")]), ("target", [("x1", "x3"), ("x2", "x4")])] {
        for (label, y) in [("0", c(0)), ("1", c(1)), ("t", v("t"))] {
            for (a, b) in pairs {
                let (pa, pb) = (v(a), v(b));
                let w = match label {
                    "0" => pa.mul(&pb).sub(&v("t")),
                    _ => pa.mul(&pb).sub(&y.mul(&pa)).sub(&y.mul(&pb)).add(&v("t")),
                };
                let lhs = f.compose(&[pa, pb, y.clone(), v("t")]);
                symbolic.push((format!("{curve} y={label} w_{a}{b}"), lhs == w.mul(&w)));
            }
        }
    }
    let mut failure = symbolic.iter().find(|(_, ok)| !ok).map(|(n, _)| n.clone());
    let mut s = Sampler::new(seed, super::HEIGHT)?;
    for _ in 0..draws {
        let t = s.signed_rat();
        let x: Vec<Rat> = (0..4).map(|_| s.signed_rat()).collect();
        for (a, b, cc, d) in [(0, 1, 2, 3), (0, 2, 1, 3)] {
            for p in stated_points(&t, &x[a], &x[b], &x[cc], &x[d]) {
                let ok = f_t(&t, &x[a], &x[b], &p[0]) == &p[1] * &p[1] && f_t(&t, &p[0], &x[cc], &x[d]) == &p[2] * &p[2];
                if !ok && failure.is_none() {
                    failure = Some(format!("draw t={t} x={x:?} point {p:?}"));
                }
            }
        }
    }
    Ok(PointsReport { pass: failure.is_none(), symbolic, draws, failure })
}

/// Parameters of the five-coordinate curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxParams {
    pub t: Rat,
    pub x: [Rat; 3],
    pub z: Rat,
    pub c: [Rat; 4],
}

fn aux_residuals(p: &AuxParams, x: &[Rat; 3], pt: &[Rat; 5]) -> Result<[Rat; 4]> {
    let AuxParams { t, z, c, .. } = p;
    let one = Rat::one();
    let [y, q1, q2, q3, q4] = pt;
    let pm1: Rat = x.iter().map(|v| v - &one).fold(one.clone(), |a, b| a * b);
    let pmt: Rat = x.iter().map(|v| v - t).fold(one.clone(), |a, b| a * b);
    let px: Rat = x.iter().fold(one.clone(), |a, b| a * b);
    let tt = t * (t - &one) * (t - &one);
    let t1 = (t - &one) * (t - &one);
    let a = q1 * q2
        + ((&x[0] - t) * (&x[1] - t) * (y - t)).checked_div(&tt)? * q1
        + ((&x[0] - &one) * (&x[1] - &one) * (y - &one)).checked_div(&t1)? * q2;
    let b = q3 * q4
        + ((y - t) * (&x[2] - t) * (z - t)).checked_div(&tt)? * q3
        + ((y - &one) * (&x[2] - &one) * (z - &one)).checked_div(&t1)? * q4;
    Ok([
        (&one - q1 - q2) * (&one - q3 - q4) - y * &c[0] * &px,
        q1 * q3 - (y - &one) * &c[1] * &pm1,
        q2 * q4 - (y - t) * &c[2] * &pmt,
        a * b - y * (y - &one) * (y - t) * &c[0] * &c[1] * &c[2] * &c[3] * &px * &pm1 * &pmt,
    ])
}

/// The displayed fixed point; with `rescaled`, `C2` and `C3` are multiplied
/// by `Π(x_a - 1)` and `Π(x_a - t)`.
pub fn aux_point(p: &AuxParams, rescaled: bool) -> Result<[Rat; 5]> {
    let one = Rat::one();
    let AuxParams { t, z, c, x } = p;
    let (k2, k3) = if rescaled {
        (x.iter().map(|v| v - &one).fold(one.clone(), |a, b| a * b), x.iter().map(|v| v - t).fold(one.clone(), |a, b| a * b))
    } else {
        (one.clone(), one.clone())
    };
    Ok([
        Rat::zero(),
        (-(&c[1] * &k2) * (t - &one)).checked_div(&(z - &one))?,
        (&c[2] * &k3 * t * (t - &one)).checked_div(&(z - t))?,
        (z - &one).checked_div(&(t - &one))?,
        (-(z - t)).checked_div(&(t - &one))?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxPointReport {
    pub pass: bool,
    /// Point as printed, constants taken literally, at the fixed parameters.
    pub literal_pass: bool,
    pub literal_residuals: [Rat; 4],
    pub draws: usize,
    pub failure: Option<String>,
}

/// Checks the fixed point on both curves (the second with `x2 ↔ x3`) at
/// `fixed` and at seeded draws.
pub fn auxiliary_point_check(fixed: &AuxParams, draws: usize, seed: u64) -> Result<AuxPointReport> {
    let check = |p: &AuxParams| -> Result<Option<String>> {
        let pt = aux_point(p, true)?;
        let swapped = [p.x[0].clone(), p.x[2].clone(), p.x[1].clone()];
        for (name, x) in [("source", &p.x), ("target", &swapped)] {
            let r = aux_residuals(p, x, &pt)?;
            if let Some(k) = r.iter().position(|v| !v.is_zero()) {
                return Ok(Some(format!("{name} equation {} residual {} at {p:?}", k + 1, r[k])));
            }
        }
        Ok(None)
    };
    let mut failure = check(fixed)?;
    let mut s = Sampler::new(seed, super::HEIGHT)?;
    let mut done = 0;
    while done < draws {
        let p = s.retry(|s| {
            let p = AuxParams {
                t: s.signed_rat(),
                x: [s.signed_rat(), s.signed_rat(), s.signed_rat()],
                z: s.signed_rat(),
                c: [s.signed_rat(), s.signed_rat(), s.signed_rat(), s.signed_rat()],
            };
            let one = Rat::one();
            (!p.t.is_zero() && p.t != one && p.z != one && p.z != p.t).then_some(p)
        })?;
        if failure.is_none() {
            failure = check(&p)?;
        }
        done += 1;
    }
    let literal_residuals = aux_residuals(fixed, &fixed.x, &aux_point(fixed, false)?)?;
    Ok(AuxPointReport {
        pass: failure.is_none(),
        literal_pass: literal_residuals.iter().all(|r| r.is_zero()),
        literal_residuals,
        draws,
        failure,
    })
}

pub fn aux_fixed_default() -> AuxParams {
    AuxParams {
        t: Rat::int(2),
        x: [Rat::int(3), Rat::int(5), Rat::int(7)],
        z: Rat::int(11),
        c: [Rat::one(), Rat::one(), Rat::one(), Rat::one()],
    }
}

/// One evaluation point: parameters and the target `y`, reached from `y = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapPoint {
    pub t: Rat,
    pub x: [Rat; 4],
    pub y: Rat,
}

pub fn default_map_points() -> Vec<MapPoint> {
    let r = |p, q| Rat::new(p, q);
    let pt = |t: Rat, x: [Rat; 4], y: Rat| MapPoint { t, x, y };
    vec![
        pt(r(3, 1), [r(1, 5), r(2, 7), r(3, 11), r(5, 13)], r(17, 10)),
        pt(r(5, 2), [r(1, 3), r(1, 7), r(2, 9), r(3, 10)], r(3, 2)),
        pt(r(4, 1), [r(1, 4), r(3, 8), r(1, 6), r(2, 5)], r(13, 10)),
        pt(r(7, 2), [r(2, 11), r(1, 9), r(4, 13), r(1, 5)], r(8, 5)),
        pt(r(3, 1), [r(1, 6), r(3, 7), r(1, 8), r(2, 9)], r(1, 2)),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapPointResult {
    pub point: MapPoint,
    /// Hex float at the working precision.
    pub y_tilde: String,
    pub y_tilde_approx: f64,
    /// `floor(log2)` of the largest residual among the two base identities
    /// and the measure identity; `None` when every residual is exactly zero.
    pub residual_log2: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapReport {
    pub pass: bool,
    pub precision: usize,
    pub steps: usize,
    pub threshold_log2: i64,
    pub points: Vec<MapPointResult>,
}

struct Num {
    prec: usize,
    t: BigF,
    x: [BigF; 4],
}

impl Num {
    fn c(&self, k: i64) -> BigF {
        BigF::from_i64(k, self.prec)
    }

    fn f(&self, a: &BigF, b: &BigF, c: &BigF) -> BigF {
        let s = a.mul(b).add(&b.mul(c)).add(&c.mul(a)).sub(&self.t);
        let inner = self.c(1).add(&self.t).sub(&a.add(b).add(c));
        s.mul(&s).add(&self.c(4).mul(a).mul(b).mul(c).mul(&inner))
    }

    /// ∂f/∂c.
    fn df(&self, a: &BigF, b: &BigF, c: &BigF) -> BigF {
        let s = a.mul(b).add(&b.mul(c)).add(&c.mul(a)).sub(&self.t);
        let inner = self.c(1).add(&self.t).sub(&a.add(b).add(c));
        let ab = a.mul(b);
        self.c(2).mul(&s).mul(&a.add(b)).add(&self.c(4).mul(&ab).mul(&inner)).sub(&self.c(4).mul(&ab).mul(c))
    }

    fn phi1(&self, a: &BigF, b: &BigF, c: &BigF, w: &BigF) -> Result<BigF> {
        let one = self.c(1);
        let n = a.mul(b).mul(&self.c(2).mul(c).sub(&one)).sub(&a.add(b).mul(c)).add(&self.t).add(w);
        n.div(&a.sub(&one).mul(&b.sub(&one)).mul(c))
    }

    fn phi2(&self, a: &BigF, b: &BigF, c: &BigF, w: &BigF) -> Result<BigF> {
        let t = &self.t;
        let n = a.mul(b).mul(&self.c(2).mul(c).sub(t)).sub(&t.mul(&a.add(b)).mul(c)).add(&t.mul(t)).add(&t.mul(w));
        n.div(&a.sub(t).mul(&b.sub(t)).mul(c))
    }

    /// Curve equations for the image and the stated linear relation.
    fn system(&self, z: &[BigF; 3], w12: &BigF, w34: &BigF) -> [BigF; 3] {
        let [x1, x2, x3, x4] = &self.x;
        let [yt, w13, w24] = z;
        [
            w13.mul(w13).sub(&self.f(x1, x3, yt)),
            w24.mul(w24).sub(&self.f(yt, x2, x4)),
            x2.sub(x4).mul(w13).sub(&x1.sub(x3).mul(w24)).sub(&x3.sub(x4).mul(w12).sub(&x1.sub(x2).mul(w34))),
        ]
    }

    fn jacobian(&self, z: &[BigF; 3]) -> [[BigF; 3]; 3] {
        let [x1, x2, x3, x4] = &self.x;
        let [yt, w13, w24] = z;
        let zero = self.c(0);
        [
            [self.df(x1, x3, yt).neg(), self.c(2).mul(w13), zero.clone()],
            [self.df(x2, x4, yt).neg(), zero.clone(), self.c(2).mul(w24)],
            [zero, x2.sub(x4), x1.sub(x3).neg()],
        ]
    }
}

fn det3(m: &[[BigF; 3]; 3]) -> BigF {
    let t = |a: usize, b: usize, c: usize| m[0][a].mul(&m[1][b]).mul(&m[2][c]);
    t(0, 1, 2).add(&t(1, 2, 0)).add(&t(2, 0, 1)).sub(&t(2, 1, 0)).sub(&t(0, 2, 1)).sub(&t(1, 0, 2))
}

/// Cramer's rule.
fn solve3(m: &[[BigF; 3]; 3], r: &[BigF; 3]) -> Result<[BigF; 3]> {
    let d = det3(m);
    let col = |k: usize| {
        let mut mm = m.clone();
        for i in 0..3 {
            mm[i][k] = r[i].clone();
        }
        det3(&mm).div(&d)
    };
    Ok([col(0)?, col(1)?, col(2)?])
}

fn signed_sqrt(v: &BigF, reference: &BigF) -> Result<BigF> {
    let s = v.sqrt()?;
    Ok(if s.mul(reference).is_negative() { s.neg() } else { s })
}

fn newton(n: &Num, mut z: [BigF; 3], w12: &BigF, w34: &BigF) -> Result<[BigF; 3]> {
    let tol = -(n.prec as i64) + 10;
    for _ in 0..100 {
        let r = n.system(&z, w12, w34);
        if r.iter().all(|v| v.below_pow2(tol)) {
            return Ok(z);
        }
        let dz = solve3(&n.jacobian(&z), &r)?;
        z = [z[0].sub(&dz[0]), z[1].sub(&dz[1]), z[2].sub(&dz[2])];
    }
    Err(Error::NoConvergence("Newton iteration for the image point".into()))
}

fn map_point(p: &MapPoint, prec: usize, steps: usize) -> Result<MapPointResult> {
    let b = |r: &Rat| BigF::from_rat(r, prec);
    let n = Num { prec, t: b(&p.t), x: [b(&p.x[0]), b(&p.x[1]), b(&p.x[2]), b(&p.x[3])] };
    let [x1, x2, x3, x4] = &n.x;
    let one = n.c(1);
    let [_, base, _] = stated_points(&p.t, &p.x[0], &p.x[1], &p.x[2], &p.x[3]);
    let [_, img, _] = stated_points(&p.t, &p.x[0], &p.x[2], &p.x[1], &p.x[3]);
    let (mut w12, mut w34) = (b(&base[1]), b(&base[2]));
    let mut z = [one.clone(), b(&img[1]), b(&img[2])];
    let (y0, y1) = (Rat::one(), p.y.clone());
    for k in 1..=steps {
        let y = b(&(&y0 + (&y1 - &y0) * Rat::new(k as i64, steps as i64)));
        let (f12, f34) = (n.f(x1, x2, &y), n.f(&y, x3, x4));
        if f12.is_negative() || f34.is_negative() {
            return Err(Error::NoConvergence(format!("path leaves the real locus at step {k}")));
        }
        w12 = signed_sqrt(&f12, &w12)?;
        w34 = signed_sqrt(&f34, &w34)?;
        z = newton(&n, z, &w12, &w34)?;
    }
    let y = b(&y1);
    let [yt, w13, w24] = &z;
    let r1 = n.phi1(x1, x2, &y, &w12)?.mul(&n.phi1(&y, x3, x4, &w34)?).sub(&n.phi1(x1, x3, yt, w13)?.mul(&n.phi1(yt, x2, x4, w24)?));
    let r2 = n.phi2(x1, x2, &y, &w12)?.mul(&n.phi2(&y, x3, x4, &w34)?).sub(&n.phi2(x1, x3, yt, w13)?.mul(&n.phi2(yt, x2, x4, w24)?));
    // dỹ/dy by implicit differentiation of the system
    let two = n.c(2);
    let dw12 = n.df(x1, x2, &y).div(&two.mul(&w12))?;
    let dw34 = n.df(x3, x4, &y).div(&two.mul(&w34))?;
    let rhs = [n.c(0), n.c(0), x3.sub(x4).mul(&dw12).sub(&x1.sub(x2).mul(&dw34))];
    let dz = solve3(&n.jacobian(&z), &rhs)?;
    let r3 = dz[0].div(&w13.mul(w24))?.sub(&one.div(&w12.mul(&w34))?);
    let residual_log2 = [r1, r2, r3].iter().filter_map(|r| r.log2_abs()).max();
    Ok(MapPointResult { point: p.clone(), y_tilde: yt.to_hex(), y_tilde_approx: yt.to_f64(), residual_log2 })
}

/// Tracks the map by continuation from `y = 1` and checks both base
/// identities and the measure identity at each target.
pub fn elliptic_map_check(points: &[MapPoint], prec: usize, steps: usize, threshold_log2: i64) -> Result<MapReport> {
    let points = points.iter().map(|p| map_point(p, prec, steps)).collect::<Result<Vec<_>>>()?;
    let pass = points.iter().all(|r| r.residual_log2.is_none_or(|l| l < threshold_log2));
    Ok(MapReport { pass, precision: prec, steps, threshold_log2, points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootVariantReport {
    pub points: usize,
    /// Largest residual exponent with the map in square-root coordinates.
    pub rooted_log2: Option<i64>,
    /// Smallest residual exponent with the rational map used unchanged.
    pub unchanged_log2: Option<i64>,
    pub unchanged_fails: bool,
}

/// Exponent identity of the square-root kernel at high precision, with the
/// map applied in square-root coordinates and unchanged.
pub fn root_variant_probe(samples: usize, seed: u64, prec: usize) -> Result<RootVariantReport> {
    let mut s = Sampler::new(seed, 100)?;
    let mut rooted: Option<i64> = None;
    let mut unchanged: Option<i64> = None;
    let e = |a: &BigF, b: &BigF, c: &BigF| -> Result<BigF> {
        let abc = a.mul(b).mul(c);
        abc.add(a).add(b).add(c).div(&abc.sqrt()?)
    };
    for _ in 0..samples {
        let r: Vec<Rat> = (0..5).map(|_| s.rat()).collect();
        let big: Vec<BigF> = r.iter().map(|v| BigF::from_rat(v, prec)).collect();
        let sq: Vec<BigF> = big.iter().map(|v| v.mul(v)).collect();
        let [x1, x2, x3, y, z] = [&sq[0], &sq[1], &sq[2], &sq[3], &sq[4]];
        let lhs = e(x1, x2, y)?.add(&e(y, x3, z)?);
        let ratio = |a: &BigF, b: &BigF, c: &BigF, d: &BigF| a.mul(b).add(&c.mul(d)).div(&a.mul(c).add(&b.mul(d)));
        let yt_plain = ratio(x1, x2, x3, z)?.mul(y);
        let big_yt = ratio(&big[0], &big[1], &big[2], &big[4])?.mul(&big[3]);
        let yt_root = big_yt.mul(&big_yt);
        let res = |yt: &BigF| -> Result<Option<i64>> { Ok(lhs.sub(&e(x1, x3, yt)?.add(&e(yt, x2, z)?)).log2_abs()) };
        if let Some(l) = res(&yt_root)? {
            rooted = Some(rooted.map_or(l, |m| m.max(l)));
        }
        let u = res(&yt_plain)?.unwrap_or(i64::MIN);
        unchanged = Some(unchanged.map_or(u, |m| m.min(u)));
    }
    let unchanged_fails = unchanged.is_some_and(|u| u > -(prec as i64) / 2);
    Ok(RootVariantReport { points: samples, rooted_log2: rooted, unchanged_log2: unchanged, unchanged_fails })
}
