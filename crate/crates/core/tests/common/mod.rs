//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// Curvature of dt² + f(t)² g_{S^{n−1}} from the explicit metric tensor in
/// coordinates (t, θ₁, …, θ_{n−1}): Christoffel symbols from finite
/// differences of g, Riemann from Γ and finite differences of Γ, and the
/// Laplacian of s by finite differences of s itself. Returns
/// (s, Δs, |Ric|², |R|²).
pub struct FdCurvature<'a> {
    pub n: usize,
    pub f: &'a dyn Fn(f64) -> f64,
    /// step for derivatives of g and of Γ
    pub h: f64,
    /// step for derivatives of s
    pub h_s: f64,
}

type Mat = Vec<Vec<f64>>;

/// Sixth-order central first-derivative stencil (offsets, weights·h).
fn d1_weights(h: f64) -> [(f64, f64); 6] {
    [
        (-3.0 * h, -1.0 / 60.0),
        (-2.0 * h, 9.0 / 60.0),
        (-h, -45.0 / 60.0),
        (h, 45.0 / 60.0),
        (2.0 * h, -9.0 / 60.0),
        (3.0 * h, 1.0 / 60.0),
    ]
}

impl<'a> FdCurvature<'a> {
    pub fn new(n: usize, f: &'a dyn Fn(f64) -> f64) -> Self {
        Self { n, f, h: 2e-3, h_s: 0.02 }
    }

    fn metric(&self, x: &[f64]) -> Mat {
        let n = self.n;
        let mut g = vec![vec![0.0; n]; n];
        g[0][0] = 1.0;
        let mut w = (self.f)(x[0]).powi(2);
        for k in 1..n {
            g[k][k] = w;
            w *= x[k].sin().powi(2);
        }
        g
    }

    fn inverse(&self, g: &Mat) -> Mat {
        // Gauss–Jordan; the metric is small and well conditioned here
        let n = g.len();
        let mut a = g.clone();
        let mut inv: Mat = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            inv.swap(c, p);
            let d = a[c][c];
            for j in 0..n {
                a[c][j] /= d;
                inv[c][j] /= d;
            }
            for r in 0..n {
                if r != c {
                    let k = a[r][c];
                    for j in 0..n {
                        a[r][j] -= k * a[c][j];
                        inv[r][j] -= k * inv[c][j];
                    }
                }
            }
        }
        inv
    }

    fn shifted(x: &[f64], k: usize, d: f64) -> Vec<f64> {
        let mut y = x.to_vec();
        y[k] += d;
        y
    }

    /// Γ^a_{bc} at x.
    fn christoffel(&self, x: &[f64]) -> Vec<Mat> {
        let n = self.n;
        let mut dg = vec![vec![vec![0.0; n]; n]; n]; // dg[k][i][j] = ∂_k g_ij
        for k in 0..n {
            for (d, w) in d1_weights(self.h) {
                let g = self.metric(&Self::shifted(x, k, d));
                for i in 0..n {
                    for j in 0..n {
                        dg[k][i][j] += w * g[i][j] / self.h;
                    }
                }
            }
        }
        let ginv = self.inverse(&self.metric(x));
        let mut gam = vec![vec![vec![0.0; n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    gam[a][b][c] = (0..n)
                        .map(|d| 0.5 * ginv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]))
                        .sum();
                }
            }
        }
        gam
    }

    /// (s, Ric_ab, R_abcd) at x.
    fn tensors(&self, x: &[f64]) -> (f64, Mat, Vec<Vec<Mat>>, Mat) {
        let n = self.n;
        let gam = self.christoffel(x);
        // dgam[e][a][b][c] = ∂_e Γ^a_{bc}
        let mut dgam = vec![vec![vec![vec![0.0; n]; n]; n]; n];
        for e in 0..n {
            for (d, w) in d1_weights(self.h) {
                let gs = self.christoffel(&Self::shifted(x, e, d));
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            dgam[e][a][b][c] += w * gs[a][b][c] / self.h;
                        }
                    }
                }
            }
        }
        // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}
        let mut riem_up = vec![vec![vec![vec![0.0; n]; n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut v = dgam[c][a][d][b] - dgam[d][a][c][b];
                        for e in 0..n {
                            v += gam[a][c][e] * gam[e][d][b] - gam[a][d][e] * gam[e][c][b];
                        }
                        riem_up[a][b][c][d] = v;
                    }
                }
            }
        }
        let g = self.metric(x);
        let ginv = self.inverse(&g);
        let mut ric = vec![vec![0.0; n]; n];
        for b in 0..n {
            for d in 0..n {
                ric[b][d] = (0..n).map(|a| riem_up[a][b][a][d]).sum();
            }
        }
        let s = (0..n).flat_map(|b| (0..n).map(move |d| (b, d))).map(|(b, d)| ginv[b][d] * ric[b][d]).sum();
        let mut riem = vec![vec![vec![vec![0.0; n]; n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        riem[a][b][c][d] = (0..n).map(|e| g[a][e] * riem_up[e][b][c][d]).sum();
                    }
                }
            }
        }
        (s, ric, riem, ginv)
    }

    pub fn scalar(&self, x: &[f64]) -> f64 {
        self.tensors(x).0
    }

    pub fn at(&self, t: f64) -> (f64, f64, f64, f64) {
        let n = self.n;
        // a generic angular position away from coordinate singularities
        let mut x = vec![t];
        x.extend((1..n).map(|k| 1.0 + 0.1 * k as f64));
        let (s, ric, riem, ginv) = self.tensors(&x);
        let mut ric2 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        ric2 += ric[a][b] * ric[c][d] * ginv[a][c] * ginv[b][d];
                    }
                }
            }
        }
        // the metric is diagonal, so raising indices is a product of diagonal entries
        let mut riem2 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        riem2 += riem[a][b][c][d].powi(2) * ginv[a][a] * ginv[b][b] * ginv[c][c] * ginv[d][d];
                    }
                }
            }
        }
        // Δs = g^{ij}(∂_ij s − Γ^k_ij ∂_k s)
        let h = self.h_s;
        let gam = self.christoffel(&x);
        let mut grad = vec![0.0; n];
        for (k, gk) in grad.iter_mut().enumerate() {
            for (d, w) in d1_weights(h) {
                *gk += w * self.scalar(&Self::shifted(&x, k, d)) / h;
            }
        }
        let mut lap = 0.0;
        for i in 0..n {
            for j in 0..n {
                if ginv[i][j] == 0.0 {
                    continue;
                }
                let mut dij = 0.0;
                for (di, wi) in d1_weights(h) {
                    for (dj, wj) in d1_weights(h) {
                        let y = Self::shifted(&Self::shifted(&x, i, di), j, dj);
                        dij += wi * wj * self.scalar(&y) / (h * h);
                    }
                }
                let conn: f64 = (0..n).map(|k| gam[k][i][j] * grad[k]).sum();
                lap += ginv[i][j] * (dij - conn);
            }
        }
        (s, lap, ric2, riem2)
    }
}

/// |a − b| relative to max(|b|, floor).
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}
