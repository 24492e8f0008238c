//! Model manifolds with computable curvature, the concentration functional Φ
//! and its critical points.
//!
//! Points on the rotationally symmetric models are addressed by the meridian
//! parameter t (geodesic distance from the north pole); peaks are only ever
//! placed on one meridian, where distances are |Δt|.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::DimensionalConstants;
use crate::error::{Error, Result};
use crate::quadrature::fornberg_weights;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePoint {
    pub s: f64,
    pub lap_s: f64,
    /// Σ of squared Ricci eigenvalues.
    pub ric2: f64,
    /// R_ijkl R^ijkl; 2n(n−1) on the unit round S^n.
    pub riem2: f64,
}

impl CurvaturePoint {
    pub const ZERO: CurvaturePoint = CurvaturePoint {
        s: 0.0,
        lap_s: 0.0,
        ric2: 0.0,
        riem2: 0.0,
    };
}

pub fn curvature_round_sphere(n: usize, radius: f64) -> CurvaturePoint {
    assert!(n >= 2 && radius > 0.0, "round sphere needs n >= 2 and radius > 0");
    let nf = n as f64;
    let k = 1.0 / (radius * radius);
    CurvaturePoint {
        s: nf * (nf - 1.0) * k,
        lap_s: 0.0,
        ric2: nf * (nf - 1.0).powi(2) * k * k,
        riem2: 2.0 * nf * (nf - 1.0) * k * k,
    }
}

/// Truncated Taylor series c₀ + c₁h + … + c₄h⁴ about a point.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Jet([f64; 5]);

impl Jet {
    fn constant(c: f64) -> Self {
        Jet([c, 0.0, 0.0, 0.0, 0.0])
    }

    fn variable(t: f64) -> Self {
        Jet([t, 1.0, 0.0, 0.0, 0.0])
    }

    fn add(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }

    fn scale(self, a: f64) -> Jet {
        Jet(std::array::from_fn(|k| a * self.0[k]))
    }

    fn mul(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| (0..=k).map(|j| self.0[j] * o.0[k - j]).sum()))
    }

    fn div(self, o: Jet) -> Jet {
        let mut q = [0.0; 5];
        for k in 0..5 {
            let acc: f64 = (1..=k).map(|j| o.0[j] * q[k - j]).sum();
            q[k] = (self.0[k] - acc) / o.0[0];
        }
        Jet(q)
    }

    /// (sin u, cos u) from k s_k = Σ j u_j c_{k−j}, k c_k = −Σ j u_j s_{k−j}.
    fn sin_cos(self) -> (Jet, Jet) {
        let u = self.0;
        let mut s = [0.0; 5];
        let mut c = [0.0; 5];
        s[0] = u[0].sin();
        c[0] = u[0].cos();
        for k in 1..5 {
            let (mut ss, mut cc) = (0.0, 0.0);
            for j in 1..=k {
                ss += j as f64 * u[j] * c[k - j];
                cc -= j as f64 * u[j] * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = cc / k as f64;
        }
        (Jet(s), Jet(c))
    }

    /// d/dh; the top coefficient becomes zero (only low orders are used).
    fn deriv(self) -> Jet {
        Jet(std::array::from_fn(|k| if k < 4 { (k + 1) as f64 * self.0[k + 1] } else { 0.0 }))
    }
}

/// Warp function f of a rotationally symmetric sphere dt² + f(t)² g_{S^{n−1}}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WarpProfile {
    /// f(t) = scale · (sin u + Σ_j coeffs[j−2] sin^j u), u = t/scale, j ≥ 2.
    /// Closes smoothly-enough at both ends: f(0) = f(L) = 0, f'(0) = 1, f'(L) = −1.
    SinePolynomial { coeffs: Vec<f64>, scale: f64 },
    /// Tabulated (t, f) pairs; derivatives by local finite differences.
    Table { t: Vec<f64>, f: Vec<f64> },
}

const TABLE_STENCIL: usize = 9;

impl WarpProfile {
    pub fn sine(coeffs: Vec<f64>) -> Self {
        WarpProfile::SinePolynomial { coeffs, scale: 1.0 }
    }

    pub fn length(&self) -> f64 {
        match self {
            WarpProfile::SinePolynomial { scale, .. } => std::f64::consts::PI * scale,
            WarpProfile::Table { t, .. } => *t.last().unwrap(),
        }
    }

    /// Parses `t,f` rows (an optional non-numeric header is skipped).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let (mut ts, mut fs) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::InvalidInput(format!("profile csv: {e}")))?;
            if rec.len() < 2 {
                return Err(Error::InvalidInput(format!("profile row {} needs two columns", i + 1)));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(t), Ok(f)) => {
                    ts.push(t);
                    fs.push(f);
                }
                _ if i == 0 => continue,
                _ => return Err(Error::InvalidInput(format!("profile row {} is not numeric", i + 1))),
            }
        }
        Self::from_table(ts, fs)
    }

    pub fn from_table(t: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if t.len() < 2 * TABLE_STENCIL || t.len() != f.len() {
            return Err(Error::InvalidInput(format!(
                "profile needs at least {} matching (t, f) rows",
                2 * TABLE_STENCIL
            )));
        }
        if t[0] != 0.0 || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("profile t must start at 0 and increase".into()));
        }
        let prof = WarpProfile::Table { t, f };
        let l = prof.length();
        let (f0, d0) = prof.low_derivatives(0.0);
        let (fl, dl) = prof.low_derivatives(l);
        let tol = 1e-3;
        if f0.abs() > tol || fl.abs() > tol || (d0 - 1.0).abs() > tol || (dl + 1.0).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "profile must close at the poles: f(0)={f0}, f(L)={fl}, f'(0)={d0}, f'(L)={dl}"
            )));
        }
        Ok(prof)
    }

    fn low_derivatives(&self, t: f64) -> (f64, f64) {
        let j = self.jet(t);
        (j.0[0], j.0[1])
    }

    /// Taylor jet of f about t.
    fn jet(&self, t: f64) -> Jet {
        match self {
            WarpProfile::SinePolynomial { coeffs, scale } => {
                let u = Jet::variable(t).scale(1.0 / scale);
                let (s, _) = u.sin_cos();
                let mut acc = s;
                let mut pow = s;
                for c in coeffs {
                    pow = pow.mul(s);
                    acc = acc.add(pow.scale(*c));
                }
                acc.scale(*scale)
            }
            WarpProfile::Table { t: ts, f } => {
                let n = ts.len();
                let idx = ts.partition_point(|&x| x < t);
                let start = idx.saturating_sub(TABLE_STENCIL / 2).min(n - TABLE_STENCIL);
                let xs = &ts[start..start + TABLE_STENCIL];
                let w = fornberg_weights(t, xs, 4);
                let mut c = [0.0; 5];
                let mut fact = 1.0;
                for (k, ck) in c.iter_mut().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    *ck = w[k].iter().zip(&f[start..start + TABLE_STENCIL]).map(|(a, b)| a * b).sum::<f64>() / fact;
                }
                Jet(c)
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t).0[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ManifoldModel {
    /// Euclidean R^n (zero curvature, no injectivity limit).
    Flat { n: usize },
    RoundSphere { n: usize, radius: f64 },
    WarpedSphere { n: usize, profile: WarpProfile },
    /// Curvature tabulated along a one-parameter chart, interpolated locally.
    Tabulated { n: usize, t: Vec<f64>, points: Vec<CurvaturePoint> },
}

/// Relative distance from a pole below which warped curvature is refused.
pub const POLE_TOL: f64 = 1e-6;

impl ManifoldModel {
    pub fn dim(&self) -> usize {
        match self {
            ManifoldModel::Flat { n }
            | ManifoldModel::RoundSphere { n, .. }
            | ManifoldModel::WarpedSphere { n, .. }
            | ManifoldModel::Tabulated { n, .. } => *n,
        }
    }

    /// Parameter interval of the meridian chart.
    pub fn parameter_range(&self) -> Option<(f64, f64)> {
        match self {
            ManifoldModel::Flat { .. } => None,
            ManifoldModel::RoundSphere { radius, .. } => Some((0.0, std::f64::consts::PI * radius)),
            ManifoldModel::WarpedSphere { profile, .. } => Some((0.0, profile.length())),
            ManifoldModel::Tabulated { t, .. } => Some((t[0], *t.last().unwrap())),
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self {
            ManifoldModel::RoundSphere { radius, .. } => std::f64::consts::PI * radius,
            _ => f64::INFINITY,
        }
    }

    pub fn curvature_at(&self, t: f64) -> Result<CurvaturePoint> {
        match self {
            ManifoldModel::Flat { .. } => Ok(CurvaturePoint::ZERO),
            ManifoldModel::RoundSphere { n, radius } => Ok(curvature_round_sphere(*n, *radius)),
            ManifoldModel::WarpedSphere { n, profile } => curvature_warped_sphere(*n, profile, t),
            ManifoldModel::Tabulated { t: ts, points, .. } => Ok(interpolate_chart(ts, points, t)),
        }
    }

    /// Distance between two points of the meridian chart.
    pub fn distance(&self, t1: f64, t2: f64) -> f64 {
        (t1 - t2).abs()
    }
}

fn interpolate_chart(ts: &[f64], pts: &[CurvaturePoint], t: f64) -> CurvaturePoint {
    let n = ts.len();
    let width = 4.min(n);
    let idx = ts.partition_point(|&x| x < t);
    let start = idx.saturating_sub(width / 2).min(n - width);
    let w = &fornberg_weights(t, &ts[start..start + width], 0)[0];
    let pick = |g: fn(&CurvaturePoint) -> f64| -> f64 { (0..width).map(|k| w[k] * g(&pts[start + k])).sum() };
    CurvaturePoint {
        s: pick(|c| c.s),
        lap_s: pick(|c| c.lap_s),
        ric2: pick(|c| c.ric2),
        riem2: pick(|c| c.riem2),
    }
}

/// Curvature of dt² + f(t)² g_{S^{n−1}} at parameter t.
pub fn curvature_warped_sphere(n: usize, profile: &WarpProfile, t: f64) -> Result<CurvaturePoint> {
    let l = profile.length();
    if !(t > POLE_TOL * l && t < l * (1.0 - POLE_TOL)) {
        return Err(Error::PoleSingularity { t });
    }
    let nf = n as f64;
    let f = profile.jet(t);
    let f1 = f.deriv();
    let f2 = f1.deriv();
    // sectional curvatures of radial (a) and tangential (b) planes, as jets in t
    let a = f2.div(f).scale(-1.0);
    let b = Jet::constant(1.0).add(f1.mul(f1).scale(-1.0)).div(f.mul(f));
    let s = a.scale(2.0 * (nf - 1.0)).add(b.scale((nf - 1.0) * (nf - 2.0)));
    let (a0, b0) = (a.0[0], b.0[0]);
    let ds = s.0[1];
    let dds = 2.0 * s.0[2];
    Ok(CurvaturePoint {
        s: s.0[0],
        lap_s: dds + (nf - 1.0) * f.0[1] / f.0[0] * ds,
        ric2: ((nf - 1.0) * a0).powi(2) + (nf - 1.0) * (a0 + (nf - 2.0) * b0).powi(2),
        riem2: 4.0 * (nf - 1.0) * a0 * a0 + 2.0 * (nf - 1.0) * (nf - 2.0) * b0 * b0,
    })
}

/// Φ = (−c8 Δs + c6 ‖Ric‖² − 3c1 ‖R‖²)/(120(n+2)) + c7 s² + c9 s.
pub fn phi(cp: &CurvaturePoint, dc: &DimensionalConstants) -> f64 {
    let nf = dc.n as f64;
    (-dc.c8 * cp.lap_s + dc.c6 * cp.ric2 - 3.0 * dc.c1 * cp.riem2) / (120.0 * (nf + 2.0))
        + dc.c7 * cp.s * cp.s
        + dc.c9 * cp.s
}

/// Φ at a model point, checking that the constants belong to the model's dimension.
pub fn phi_at(model: &ManifoldModel, t: f64, dc: &DimensionalConstants) -> Result<f64> {
    if model.dim() != dc.n {
        return Err(Error::InvalidInput(format!(
            "constants are for n = {}, manifold has dimension {}",
            dc.n,
            model.dim()
        )));
    }
    Ok(phi(&model.curvature_at(t)?, dc))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiSample {
    pub t: f64,
    pub s: f64,
    pub lap_s: f64,
    pub ric2: f64,
    pub riem2: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Max,
    Min,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub t: f64,
    pub phi: f64,
    pub kind: CriticalKind,
    /// Second difference of the scan at the bracketing sample, per unit t².
    pub second_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiScan {
    pub samples: Vec<PhiSample>,
    pub critical: Vec<CriticalPoint>,
}

/// Fraction of the parameter interval excluded at each end of a warped
/// sphere scan (curvature of a non-smooth warp blows up at the poles).
pub const SCAN_MARGIN: f64 = 0.02;

/// Φ sampled at `resolution + 1` equally spaced parameters.
pub fn phi_samples(model: &ManifoldModel, dc: &DimensionalConstants, resolution: usize) -> Result<Vec<PhiSample>> {
    let (lo, hi) = scan_interval(model)?;
    if resolution < 4 {
        return Err(Error::InvalidInput("scan resolution must be at least 4".into()));
    }
    (0..=resolution)
        .into_par_iter()
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / resolution as f64;
            let c = model.curvature_at(t)?;
            Ok(PhiSample {
                t,
                s: c.s,
                lap_s: c.lap_s,
                ric2: c.ric2,
                riem2: c.riem2,
                phi: phi_at(model, t, dc)?,
            })
        })
        .collect()
}

fn scan_interval(model: &ManifoldModel) -> Result<(f64, f64)> {
    let (lo, hi) = model
        .parameter_range()
        .ok_or_else(|| Error::InvalidInput("model has no one-parameter chart to scan".into()))?;
    Ok(match model {
        ManifoldModel::WarpedSphere { .. } => {
            let m = SCAN_MARGIN * (hi - lo);
            (lo + m, hi - m)
        }
        _ => (lo, hi),
    })
}

/// Samples Φ and reports isolated interior extrema, each refined by
/// golden-section search to 1e−8 in t.
pub fn scan_phi(model: &ManifoldModel, dc: &DimensionalConstants, resolution: usize) -> Result<PhiScan> {
    let samples = phi_samples(model, dc, resolution)?;
    let critical = locate_critical(model, dc, &samples)?;
    if critical.is_empty() {
        return Err(Error::NoInteriorCritical(
            "every extremum of the scan lies on the boundary or Φ is constant".into(),
        ));
    }
    Ok(PhiScan { samples, critical })
}

pub fn locate_critical(model: &ManifoldModel, dc: &DimensionalConstants, samples: &[PhiSample]) -> Result<Vec<CriticalPoint>> {
    let phis: Vec<f64> = samples.iter().map(|s| s.phi).collect();
    let max = phis.iter().cloned().fold(f64::MIN, f64::max);
    let min = phis.iter().cloned().fold(f64::MAX, f64::min);
    let scale = max.abs().max(min.abs()).max(1e-300);
    if max - min <= 1e-12 * scale {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for i in 1..samples.len() - 1 {
        let (l, c, r) = (phis[i - 1], phis[i], phis[i + 1]);
        let is_max = c > l && c >= r;
        let is_min = c < l && c <= r;
        if !(is_max || is_min) {
            continue;
        }
        let h = samples[i + 1].t - samples[i].t;
        let d2 = (l - 2.0 * c + r) / (h * h);
        let kind = if d2.abs() <= 1e-9 * scale {
            CriticalKind::Degenerate
        } else if is_max {
            CriticalKind::Max
        } else {
            CriticalKind::Min
        };
        let sign = if is_max { -1.0 } else { 1.0 };
        let t = golden_section(samples[i - 1].t, samples[i + 1].t, 1e-8, |t| {
            sign * phi_at(model, t, dc).unwrap_or(f64::INFINITY)
        });
        out.push(CriticalPoint {
            t,
            phi: phi_at(model, t, dc)?,
            kind,
            second_difference: d2,
        });
    }
    Ok(out)
}

/// Minimizer of a unimodal f on [a, b] to the given bracket width.
pub fn golden_section<F: Fn(f64) -> f64>(mut a: f64, mut b: f64, tol: f64, f: F) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn scan_csv(samples: &[PhiSample]) -> String {
    let mut s = String::from("t,s,lap_s,ric2,riem2,phi\n");
    for p in samples {
        s.push_str(&format!("{:e},{:e},{:e},{:e},{:e},{:e}\n", p.t, p.s, p.lap_s, p.ric2, p.riem2, p.phi));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub distance: f64,
    /// exp_{ξ₁}^{−1}(ξ₂) as a vector in the ambient space, tangent at ξ₁.
    pub log: Vec<f64>,
}

/// Great-circle distance and logarithm map between unit vectors on a sphere
/// of the given radius (points are scaled to that radius).
pub fn sphere_geodesics(radius: f64, x1: &[f64], x2: &[f64]) -> Result<Geodesic> {
    if x1.len() != x2.len() {
        return Err(Error::InvalidInput("points live in different dimensions".into()));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: Vec<f64> = x1.iter().map(|x| x / norm(x1)).collect();
    let v: Vec<f64> = x2.iter().map(|x| x / norm(x2)).collect();
    let diff: Vec<f64> = u.iter().zip(&v).map(|(a, b)| b - a).collect();
    let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
    let (nd, ns) = (norm(&diff), norm(&sum));
    if ns < 1e-9 {
        return Err(Error::AntipodalPair);
    }
    let angle = 2.0 * nd.atan2(ns);
    let cos = angle.cos();
    let tangent: Vec<f64> = v.iter().zip(&u).map(|(b, a)| b - cos * a).collect();
    let tn = norm(&tangent);
    let log = if tn == 0.0 {
        vec![0.0; u.len()]
    } else {
        tangent.iter().map(|x| x / tn * angle * radius).collect()
    };
    Ok(Geodesic {
        distance: angle * radius,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_closed_forms() {
        let c = curvature_round_sphere(3, 1.0);
        assert_eq!(c, CurvaturePoint { s: 6.0, lap_s: 0.0, ric2: 12.0, riem2: 12.0 });
        let c2 = curvature_round_sphere(3, 2.0);
        assert!((c2.s - 6.0 / 4.0).abs() < 1e-15 && (c2.riem2 - 12.0 / 16.0).abs() < 1e-15);
        assert!((c.ric2 - c.s * c.s / 3.0).abs() < 1e-14);
    }

    #[test]
    fn sine_warp_is_round() {
        let prof = WarpProfile::sine(vec![]);
        for &t in &[0.1, 0.7, 1.5, 2.9] {
            for n in 3..6 {
                let c = curvature_warped_sphere(n, &prof, t).unwrap();
                let r = curvature_round_sphere(n, 1.0);
                assert!((c.s - r.s).abs() < 1e-12, "{c:?}");
                assert!(c.lap_s.abs() < 1e-10, "{c:?}");
                assert!((c.ric2 - r.ric2).abs() < 1e-11 && (c.riem2 - r.riem2).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn jets_match_closed_form_derivatives() {
        let prof = WarpProfile::sine(vec![0.0, 0.2]);
        let t: f64 = 0.8;
        let j = prof.jet(t);
        let (s, c) = (t.sin(), t.cos());
        // f = s + 0.2 s^3, f'''' computed by hand
        let d1 = c + 0.6 * s * s * c;
        assert!((j.0[1] - d1).abs() < 1e-14);
        let d2 = -s + 0.2 * (6.0 * s * c * c - 3.0 * s.powi(3));
        assert!((2.0 * j.0[2] - d2).abs() < 1e-14);
    }

    #[test]
    fn poles_are_refused() {
        let prof = WarpProfile::sine(vec![0.05]);
        assert!(matches!(curvature_warped_sphere(3, &prof, 0.0), Err(Error::PoleSingularity { .. })));
        assert!(matches!(
            curvature_warped_sphere(3, &prof, std::f64::consts::PI),
            Err(Error::PoleSingularity { .. })
        ));
    }

    #[test]
    fn tabulated_profile_matches_analytic() {
        let prof = WarpProfile::sine(vec![0.0, 0.05]);
        let n = 401;
        let l = prof.length();
        let ts: Vec<f64> = (0..n).map(|i| l * i as f64 / (n - 1) as f64).collect();
        let fs: Vec<f64> = ts.iter().map(|&t| prof.value(t)).collect();
        let tab = WarpProfile::from_table(ts, fs).unwrap();
        let a = curvature_warped_sphere(3, &prof, 1.1).unwrap();
        let b = curvature_warped_sphere(3, &tab, 1.1).unwrap();
        assert!((a.s - b.s).abs() < 1e-7 && (a.lap_s - b.lap_s).abs() < 1e-4, "{a:?} {b:?}");
    }

    #[test]
    fn table_must_close() {
        let ts: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let fs = ts.iter().map(|t| t + 1.0).collect();
        assert!(matches!(WarpProfile::from_table(ts, fs), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn csv_profile_with_header() {
        let prof = WarpProfile::sine(vec![]);
        let mut text = String::from("t,f\n");
        for i in 0..=200 {
            let t = std::f64::consts::PI * i as f64 / 200.0;
            text.push_str(&format!("{t},{}\n", prof.value(t)));
        }
        let tab = WarpProfile::from_csv(&text).unwrap();
        assert!((tab.length() - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn geodesics() {
        let g = sphere_geodesics(1.0, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!((g.distance - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((g.log[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let z = sphere_geodesics(1.0, &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(z.distance, 0.0);
        assert_eq!(sphere_geodesics(1.0, &[1.0, 0.0], &[-1.0, 0.0]), Err(Error::AntipodalPair));
    }

    #[test]
    fn golden_section_finds_minimum() {
        let x = golden_section(0.0, 3.0, 1e-10, |x| (x - 1.234567).powi(2));
        assert!((x - 1.234567).abs() < 1e-9);
    }
}
