use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use yamabe_core::correction::*;
use yamabe_core::groundstate::{product_exponent, solve_ground_state, GroundState};

/// Second-order (2n+1)-point finite-difference L₀ = −Δ + 1 − (p−1)U^{p−2}
/// applied to a field on R^n at z.
fn fd_l0(gs: &GroundState, field: &dyn Fn(&[f64]) -> f64, z: &[f64], h: f64) -> f64 {
    let f0 = field(z);
    let mut lap = 0.0;
    let mut y = z.to_vec();
    for i in 0..z.len() {
        y[i] = z[i] + h;
        let fp = field(&y);
        y[i] = z[i] - h;
        let fm = field(&y);
        y[i] = z[i];
        lap += (fp - 2.0 * f0 + fm) / (h * h);
    }
    let r = norm(z);
    let u = gs.eval(r).0;
    -lap + f0 - (gs.p - 1.0) * u.powf(gs.p - 2.0) * f0
}

fn norm(z: &[f64]) -> f64 {
    z.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// max |L₀F − G| / max |G| over random points of the box [−a, a]^n.
fn box_check(
    gs: &GroundState,
    field: &dyn Fn(&[f64]) -> f64,
    target: &dyn Fn(&[f64]) -> f64,
    a: f64,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for _ in 0..300 {
        let z: Vec<f64> = (0..gs.n).map(|_| rng.gen_range(-a..a)).collect();
        let g = target(&z);
        err = err.max((fd_l0(gs, field, &z, 1e-2) - g).abs());
        scale = scale.max(g.abs());
    }
    err / scale
}

#[test]
fn psi_full_dimension_oracle() {
    for (n, p) in [(3, 3.0), (4, 8.0 / 3.0)] {
        let gs = solve_ground_state(n, p, 1e-12).unwrap();
        let psi = solve_psi(&gs).unwrap();
        let field = |z: &[f64]| psi.value(norm(z)) * z[0] * z[1];
        let target = |z: &[f64]| {
            let r = norm(z);
            gs.eval(r).1 / r * z[0] * z[1]
        };
        let e = box_check(&gs, &field, &target, 3.0, 1);
        assert!(e < 1e-3, "n={n}: {e}");
    }
}

#[test]
fn trace_and_v2base_full_dimension_oracle() {
    let gs = solve_ground_state(3, 3.0, 1e-12).unwrap();
    let cp = CorrectionProfiles::build(&gs).unwrap();
    // L₀ω = r U'
    let field = |z: &[f64]| cp.trace.value(norm(z));
    let target = |z: &[f64]| {
        let r = norm(z);
        r * gs.eval(r).1
    };
    assert!(box_check(&gs, &field, &target, 3.0, 2) < 1e-3);
    // L₀ v2base = −U
    let field = |z: &[f64]| cp.v2base.value(norm(z));
    let target = |z: &[f64]| -gs.eval(norm(z)).0;
    assert!(box_check(&gs, &field, &target, 3.0, 3) < 1e-3);
}

#[test]
fn psi_regularity_and_decay() {
    for (n, p) in [(3, 3.0), (4, 8.0 / 3.0)] {
        let gs = solve_ground_state(n, p, 1e-12).unwrap();
        let cp = CorrectionProfiles::build(&gs).unwrap();
        assert!(cp.psi_residual < 1e-8, "{}", cp.psi_residual);
        let d = cp.psi.eval(1e-9).1;
        assert!(d.abs() < 1e-8, "ψ'(0) ≈ {d}");
        let rate = psi_decay_rate(&cp.psi);
        assert!((0.8..=1.2).contains(&rate), "n={n}: rate {rate}");
    }
}

#[test]
fn v2base_pointwise() {
    for (n, m) in [(3, 3), (4, 4)] {
        let gs = solve_ground_state(n, product_exponent(n, m), 1e-12).unwrap();
        let v = build_v2base(&gs);
        for (&r, &val) in v.grid().nodes().iter().zip(v.values()) {
            let (u, du, _) = gs.eval(r);
            let direct = 0.5 * du * r - u / (2.0 - gs.p);
            assert!((val - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        }
        assert!((v.value(0.0) - gs.u0 / (gs.p - 2.0)).abs() < 1e-12 * gs.u0);
        assert!(v.value(0.0) > 0.0);
    }
}

#[test]
fn l0_identities_on_the_matrix() {
    // (5, 8/3) is n = 5 with N = 8
    for (n, p) in [(3, 3.0), (4, 8.0 / 3.0), (5, 8.0 / 3.0), (5, 2.5)] {
        let gs = solve_ground_state(n, p, 1e-12).unwrap();
        let id = verify_l0_identities(&gs);
        assert!(id.e1 < 1e-6 && id.e2 < 1e-6, "n={n} p={p}: {id:?}");
    }
    let gs = solve_ground_state(5, 2.5, 1e-12).unwrap();
    let bad = verify_l0_identities(&gs.scaled(1.01));
    assert!(bad.e2 > 1e-3, "{bad:?}");
}

#[test]
fn kernel_orthogonality_by_parity() {
    for (n, p) in [(3, 3.0), (6, 2.4)] {
        let gs = solve_ground_state(n, p, 1e-12).unwrap();
        assert!(kernel_orthogonality(&gs).abs() < 1e-10);
    }
}
