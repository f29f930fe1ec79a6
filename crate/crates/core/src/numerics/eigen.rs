//! Lowest eigenvalues of symmetric band matrices by Sturm-count bisection.

/// Symmetric tridiagonal matrix: `diag[i] = A[i][i]`, `off[i] = A[i][i+1]`.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length");
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `mu` (Sturm sequence).
    pub fn count_below(&self, mu: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - mu - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + mu.abs() + f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` lowest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        bisect_eigenvalues(k.min(self.dim()), lo, hi, |mu| self.count_below(mu))
    }
}

/// `k` lowest eigenvalues of a symmetric tridiagonal matrix.
pub fn tridiagonal_eigenvalues(matrix: &SymTridiagonal, k: usize) -> Vec<f64> {
    matrix.lowest_eigenvalues(k)
}

fn bisect_eigenvalues(k: usize, lo: f64, hi: f64, count: impl Fn(f64) -> usize) -> Vec<f64> {
    let pad = 1e-12 * (lo.abs() + hi.abs()) + 1e-300;
    let (lo, hi) = (lo - pad, hi + pad);
    (0..k)
        .map(|j| {
            // find mu with count(mu) <= j < count(mu')
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if count(m) > j {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Symmetric band matrix with half-bandwidth `p`; `bands[k][i] = A[i][i+k]`.
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    bands: Vec<Vec<f64>>,
}

impl SymBand {
    pub fn new(n: usize, p: usize) -> Self {
        Self {
            n,
            bands: (0..=p).map(|k| vec![0.0; n.saturating_sub(k)]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    /// Sets `A[i][j] = A[j][i] = v` for `|i - j| <= p`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.bands[c - r][r] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        let k = c - r;
        if k < self.bands.len() {
            self.bands[k][r]
        } else {
            0.0
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let p = self.half_bandwidth();
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(p);
                let hi = (i + p).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// LDLᵀ factorization of `A - mu I` without pivoting.
    pub fn ldlt(&self, mu: f64) -> BandLdlt {
        let n = self.n;
        let p = self.half_bandwidth();
        // l[k][j] = L[j+k][j]
        let mut l: Vec<Vec<f64>> = (0..=p).map(|k| vec![0.0; n.saturating_sub(k)]).collect();
        let mut d = vec![0.0; n];
        let scale = self.bands[0].iter().map(|v| v.abs()).fold(mu.abs(), f64::max).max(1.0);
        for j in 0..n {
            let mut dj = self.bands[0][j] - mu;
            for k in 1..=p.min(j) {
                let c = j - k;
                dj -= l[k][c] * l[k][c] * d[c];
            }
            if dj == 0.0 {
                dj = -f64::EPSILON * scale;
            }
            d[j] = dj;
            for k in 1..=p {
                let i = j + k;
                if i >= n {
                    break;
                }
                let mut a = self.bands[k][j];
                // sum over c < j with both (i, c) and (j, c) inside the band
                for m in (k + 1)..=p {
                    let c = match i.checked_sub(m) {
                        Some(c) => c,
                        None => break,
                    };
                    a -= l[m][c] * l[m - k][c] * d[c];
                }
                l[k][j] = a / dj;
            }
        }
        BandLdlt { l, d }
    }

    /// Number of eigenvalues strictly below `mu` (Sylvester inertia).
    pub fn count_below(&self, mu: f64) -> usize {
        self.ldlt(mu).d.iter().filter(|&&v| v < 0.0).count()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let p = self.half_bandwidth();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let a = i.saturating_sub(p);
            let b = (i + p).min(self.n - 1);
            let r: f64 = (a..=b).filter(|&j| j != i).map(|j| self.get(i, j).abs()).sum();
            lo = lo.min(self.get(i, i) - r);
            hi = hi.max(self.get(i, i) + r);
        }
        (lo, hi)
    }

    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        bisect_eigenvalues(k.min(self.n), lo, hi, |mu| self.count_below(mu))
    }

    /// Eigenvector for the eigenvalue nearest `shift` by inverse iteration,
    /// normalized to unit Euclidean length with a positive first entry.
    pub fn eigenvector_near(&self, shift: f64, iterations: usize) -> Vec<f64> {
        let f = self.ldlt(shift);
        let mut x = vec![1.0; self.n];
        for _ in 0..iterations.max(1) {
            x = f.solve(&x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        if x[0] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        x
    }
}

#[derive(Debug, Clone)]
pub struct BandLdlt {
    l: Vec<Vec<f64>>,
    pub d: Vec<f64>,
}

impl BandLdlt {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let p = self.l.len() - 1;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 1..=p.min(i) {
                y[i] -= self.l[k][i - k] * y[i - k];
            }
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            for k in 1..=p {
                if i + k >= n {
                    break;
                }
                y[i] -= self.l[k][i] * y[i + k];
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_gives_sorted_entries() {
        let m = SymTridiagonal::new(vec![3.0, -1.0, 7.0, 0.5], vec![0.0; 3]);
        let ev = tridiagonal_eigenvalues(&m, 4);
        for (a, b) in ev.iter().zip([-1.0, 0.5, 3.0, 7.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn free_neumann_operator_has_near_zero_ground_state() {
        // -d²/dx² on [0, 40], Neumann at 0 (symmetrized ghost row), Dirichlet far end
        let dx = 0.05;
        let n = (40.0 / dx) as usize;
        let c = 1.0 / (dx * dx);
        let diag = vec![2.0 * c; n];
        let mut off = vec![-c; n - 1];
        off[0] = -c * 2f64.sqrt();
        let m = SymTridiagonal::new(diag, off);
        let ev = m.lowest_eigenvalues(2);
        let k = std::f64::consts::PI / (2.0 * 40.0);
        assert!(ev[0] > 0.0 && (ev[0] - k * k).abs() < 1e-3, "{ev:?}");
        assert!(ev[1] > ev[0]);
    }

    #[test]
    fn band_matches_tridiagonal_and_dense_known_spectrum() {
        let n = 30;
        let mut b = SymBand::new(n, 2);
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for i in 0..n {
            diag[i] = 2.0 + 0.1 * i as f64;
            b.set(i, i, diag[i]);
            if i + 1 < n {
                off[i] = -1.0;
                b.set(i, i + 1, -1.0);
            }
        }
        let t = SymTridiagonal::new(diag, off);
        let e1 = t.lowest_eigenvalues(5);
        let e2 = b.lowest_eigenvalues(5);
        for (x, y) in e1.iter().zip(&e2) {
            assert!((x - y).abs() < 1e-11);
        }
        // Toeplitz -1,2,-1 has eigenvalues 2 - 2cos(kπ/(n+1))
        let mut toe = SymBand::new(n, 2);
        for i in 0..n {
            toe.set(i, i, 2.0);
            if i + 1 < n {
                toe.set(i, i + 1, -1.0);
            }
        }
        let ev = toe.lowest_eigenvalues(3);
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn pentadiagonal_inverse_iteration() {
        let n = 40;
        let mut b = SymBand::new(n, 2);
        for i in 0..n {
            b.set(i, i, 6.0 + (i as f64).sin());
            if i + 1 < n {
                b.set(i, i + 1, -4.0);
            }
            if i + 2 < n {
                b.set(i, i + 2, 1.0);
            }
        }
        let lam = b.lowest_eigenvalues(1)[0];
        let v = b.eigenvector_near(lam - 1e-3, 8);
        let av = b.mul_vec(&v);
        let res = av.iter().zip(&v).map(|(a, x)| (a - lam * x).abs()).fold(0.0, f64::max);
        assert!(res < 1e-9, "residual {res}");
    }
}
