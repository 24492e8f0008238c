mod common;

use common::{rel_err, FdCurvature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use yamabe_core::geometry::{curvature_round_sphere, curvature_warped_sphere, WarpProfile};

#[test]
fn oracle_reproduces_round_sphere() {
    let f = |t: f64| t.sin();
    for n in 3..=4 {
        let (s, lap, ric2, riem2) = FdCurvature::new(n, &f).at(1.2);
        let c = curvature_round_sphere(n, 1.0);
        assert!(rel_err(s, c.s, 1.0) < 1e-7, "{s}");
        assert!(lap.abs() < 1e-5, "{lap}");
        assert!(rel_err(ric2, c.ric2, 1.0) < 1e-7 && rel_err(riem2, c.riem2, 1.0) < 1e-7);
    }
}

#[test]
fn warped_formulas_match_fd_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let n = rng.gen_range(3..=5);
        let coeffs = vec![rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)];
        let t = rng.gen_range(0.4..std::f64::consts::PI - 0.4);
        let prof = WarpProfile::sine(coeffs.clone());
        let f = |x: f64| prof.value(x);
        let (s, lap, ric2, riem2) = FdCurvature::new(n, &f).at(t);
        let c = curvature_warped_sphere(n, &prof, t).unwrap();
        for (name, a, b) in [("s", c.s, s), ("lap_s", c.lap_s, lap), ("ric2", c.ric2, ric2), ("riem2", c.riem2, riem2)] {
            assert!(rel_err(a, b, 1.0) < 1e-5, "{name}: {a} vs oracle {b} (n={n}, t={t}, {coeffs:?})");
        }
    }
}
