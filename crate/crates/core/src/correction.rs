//! Second-order correction profiles built on a ground state.
//!
//! The linearized operator is L₀v = −Δv + v − (p−1)U^{p−2}v. For a radial
//! profile φ and a trace-free quadratic form q(z) = Σ q_kl z_k z_l,
//! Δ(φ q) = (φ'' + (n+3)φ'/r) q, so L₀(φ q) = q · L₀^{(4)}φ where L₀^{(k)} is
//! the radial operator with the first-order coefficient (n−1+k)/r.

use serde::{Deserialize, Serialize};

use crate::constants::{moment_reduce, MomentWeight};
use crate::error::{Error, Result};
use crate::groundstate::GroundState;
use crate::radial::{RadialFunction, RadialGrid};

/// Residual tolerance on the discrete linear system.
pub const SYSTEM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionProfiles {
    /// Radial factor of V₁ = (1/3) R_kl ψ z_k z_l.
    pub psi: RadialFunction,
    /// ½U'r − U/(2−p); V₂ = 𝐜 s_g · v2base.
    pub v2base: RadialFunction,
    /// Radial solution of L₀ω = r U' (the trace sector of the Ricci term).
    pub trace: RadialFunction,
    /// Max residual of the discrete ψ system.
    pub psi_residual: f64,
}

impl CorrectionProfiles {
    pub fn build(gs: &GroundState) -> Result<Self> {
        let (psi, psi_residual) = solve_psi_with_residual(gs)?;
        let (trace, _) = solve_radial_l0(gs, 0, |r, (_, du, _)| r * du)?;
        Ok(Self {
            psi,
            v2base: build_v2base(gs),
            trace,
            psi_residual,
        })
    }
}

/// U''' from differentiating the radial ODE.
pub fn third_derivative(gs: &GroundState, r: f64) -> f64 {
    let (u, du, ddu) = gs.eval(r);
    if r == 0.0 {
        return 0.0;
    }
    let nm1 = gs.n as f64 - 1.0;
    -nm1 * (ddu / r - du / (r * r)) + du - (gs.p - 1.0) * u.max(0.0).powf(gs.p - 2.0) * du
}

/// Solves −φ'' − (n−1+k)φ'/r + φ − (p−1)U^{p−2}φ = rhs(r) on the ground-state
/// grid with φ'(0) = 0 and φ(r_max) = 0, by second-order centered differences
/// and a direct tridiagonal solve. Returns the profile and the max residual
/// of the discrete system.
pub fn solve_radial_l0<F>(gs: &GroundState, extra_dim: usize, rhs: F) -> Result<(RadialFunction, f64)>
where
    F: Fn(f64, (f64, f64, f64)) -> f64,
{
    let grid = gs.profile.grid().clone();
    let x = grid.nodes();
    let m = x.len();
    let drift = gs.n as f64 - 1.0 + extra_dim as f64;
    let pm1 = gs.p - 1.0;
    let pot = |i: usize| 1.0 - pm1 * gs.profile.values()[i].max(0.0).powf(gs.p - 2.0);

    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    let mut b = vec![0.0; m];

    // r = 0: φ'' + drift φ'/r → (1 + drift) φ''(0), φ''(0) ≈ 2(φ₁ − φ₀)/h².
    let h1 = x[1];
    let c0 = (1.0 + drift) * 2.0 / (h1 * h1);
    diag[0] = c0 + pot(0);
    sup[0] = -c0;
    // rhs at the origin is the limit value supplied by the caller
    b[0] = rhs(0.0, gs.eval(0.0));
    for i in 1..m - 1 {
        let hm = x[i] - x[i - 1];
        let hp = x[i + 1] - x[i];
        let s = hm + hp;
        let (a2m, a2c, a2p) = (2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s));
        let (a1m, a1c, a1p) = (-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s));
        let d = drift / x[i];
        sub[i] = -(a2m + d * a1m);
        diag[i] = -(a2c + d * a1c) + pot(i);
        sup[i] = -(a2p + d * a1p);
        b[i] = rhs(x[i], gs.profile.eval_cell(i, x[i]));
    }
    diag[m - 1] = 1.0;
    b[m - 1] = 0.0;

    let sol = thomas(&sub, &diag, &sup, &b)?;
    let mut residual: f64 = 0.0;
    for i in 0..m {
        let mut ax = diag[i] * sol[i];
        if i > 0 {
            ax += sub[i] * sol[i - 1];
        }
        if i + 1 < m {
            ax += sup[i] * sol[i + 1];
        }
        residual = residual.max((ax - b[i]).abs());
    }
    Ok((RadialFunction::from_values(grid, sol), residual))
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let scale = diag.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut pivot = diag[0];
    if pivot.abs() <= 1e-14 * scale {
        return Err(Error::SingularSystem { row: 0 });
    }
    c[0] = sup[0] / pivot;
    d[0] = b[0] / pivot;
    for i in 1..m {
        pivot = diag[i] - sub[i] * c[i - 1];
        if pivot.abs() <= 1e-14 * scale {
            return Err(Error::SingularSystem { row: i });
        }
        c[i] = if i + 1 < m { sup[i] / pivot } else { 0.0 };
        d[i] = (b[i] - sub[i] * d[i - 1]) / pivot;
    }
    let mut out = vec![0.0; m];
    out[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
    Ok(out)
}

fn solve_psi_with_residual(gs: &GroundState) -> Result<(RadialFunction, f64)> {
    // U'/r → U''(0) at the origin
    let (psi, residual) = solve_radial_l0(gs, 4, |r, (_, du, ddu)| if r == 0.0 { ddu } else { du / r })?;
    let scale = psi.values().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    if residual > SYSTEM_TOL * scale {
        return Err(Error::SingularSystem { row: usize::MAX });
    }
    Ok((psi, residual))
}

/// ψ with −ψ'' − (n+3)ψ'/r + ψ − (p−1)U^{p−2}ψ = U'/r, ψ'(0) = 0, ψ(r_max) = 0.
pub fn solve_psi(gs: &GroundState) -> Result<RadialFunction> {
    solve_psi_with_residual(gs).map(|(psi, _)| psi)
}

/// ½U'(r) r − U(r)/(2−p) with analytic first and second derivatives.
pub fn build_v2base(gs: &GroundState) -> RadialFunction {
    let grid = gs.profile.grid().clone();
    let k = 1.0 / (2.0 - gs.p);
    let mut vals = Vec::with_capacity(grid.len());
    let mut d1 = Vec::with_capacity(grid.len());
    let mut d2 = Vec::with_capacity(grid.len());
    for &r in grid.nodes() {
        let (u, du, ddu) = gs.eval(r);
        let dddu = third_derivative(gs, r);
        vals.push(0.5 * du * r - k * u);
        d1.push(0.5 * (ddu * r + du) - k * du);
        d2.push(0.5 * (dddu * r + 2.0 * ddu) - k * ddu);
    }
    RadialFunction::from_hermite(grid, vals, d1, d2)
}

/// Radial L₀ applied to a profile (extra_dim = 0 for radial functions).
pub fn apply_radial_l0(gs: &GroundState, f: (f64, f64, f64), r: f64, u: f64, extra_dim: usize) -> f64 {
    let drift = gs.n as f64 - 1.0 + extra_dim as f64;
    let lap = if r == 0.0 { (1.0 + drift) * f.2 } else { f.2 + drift * f.1 / r };
    -lap + f.0 - (gs.p - 1.0) * u.max(0.0).powf(gs.p - 2.0) * f.0
}

/// Relative residuals of L₀(U'r) = −2ΔU and L₀U = (2−p)U^{p−1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L0Identities {
    pub e1: f64,
    pub e2: f64,
}

/// Both identities are checked with derivatives recovered by finite
/// differences from node values only, on nodes away from r_max.
pub fn verify_l0_identities(gs: &GroundState) -> L0Identities {
    let grid = gs.profile.grid();
    let nodes = grid.nodes();
    let u_vals = gs.profile.values().to_vec();
    let u_fd = RadialFunction::from_values(grid.clone(), u_vals.clone());
    let w = RadialFunction::from_values(
        grid.clone(),
        nodes.iter().zip(gs.profile.d1()).map(|(&r, &du)| du * r).collect(),
    );
    let nm1 = gs.n as f64 - 1.0;
    let interior = interior_range(grid);
    let (mut r1, mut s1, mut r2, mut s2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in interior {
        let r = nodes[i];
        let u = u_vals[i];
        let wi = (w.values()[i], w.d1()[i], w.d2()[i]);
        let l0w = apply_radial_l0(gs, wi, r, u, 0);
        let (_, du, ddu) = (u, gs.profile.d1()[i], gs.profile.d2()[i]);
        let lap_u = if r == 0.0 { gs.n as f64 * ddu } else { ddu + nm1 * du / r };
        r1 = r1.max((l0w + 2.0 * lap_u).abs());
        s1 = s1.max((2.0 * lap_u).abs());

        let ui = (u, u_fd.d1()[i], u_fd.d2()[i]);
        let l0u = apply_radial_l0(gs, ui, r, u, 0);
        let target = (2.0 - gs.p) * u.max(0.0).powf(gs.p - 1.0);
        r2 = r2.max((l0u - target).abs());
        s2 = s2.max(target.abs());
    }
    L0Identities { e1: r1 / s1, e2: r2 / s2 }
}

fn interior_range(grid: &RadialGrid) -> std::ops::Range<usize> {
    let r_max = grid.r_max();
    let end = grid.nodes().partition_point(|&r| r < r_max - 2.0).max(2);
    1..end
}

/// ∫ (U'/r) z₁z₂ · ∂₁U dz = ∫ (U'/r)² z₁² z₂ dz via moment reduction; the
/// monomial is odd in z₂ so the result vanishes.
pub fn kernel_orthogonality(gs: &GroundState) -> f64 {
    let mut alpha = vec![0u32; gs.n];
    alpha[0] = 2;
    alpha[1] = 1;
    let f = gs.profile.map_values(|r, _| {
        let (_, du, ddu) = gs.eval(r);
        let q = if r == 0.0 { ddu } else { du / r };
        q * q
    });
    moment_reduce(&f, gs.n, &MomentWeight::Monomial(alpha))
}

/// Exponential decay rate of |ψ| fitted by least squares of ln|ψ| against r
/// over [r_max/3, r_max − 5].
pub fn psi_decay_rate(psi: &RadialFunction) -> f64 {
    let r_max = psi.r_max();
    let pts: Vec<(f64, f64)> = psi
        .grid()
        .nodes()
        .iter()
        .zip(psi.values())
        .filter(|(&r, v)| r >= r_max / 3.0 && r <= r_max - 5.0 && v.abs() > 0.0)
        .map(|(&r, v)| (r, v.abs().ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -sxy / sxx
}
