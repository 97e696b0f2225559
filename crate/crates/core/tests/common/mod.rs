//! Brute-force reference: full dense operators on the joint space, built
//! from scratch, with their own matrix exponential.
#![allow(dead_code)]

use num_complex::Complex64;

pub const LEVELS: usize = 3;
const E: usize = 0;
const G: usize = 1;
const I: usize = 2;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, Debug)]
pub struct Mat {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl Mat {
    pub fn zero(n: usize) -> Self {
        Mat { n, a: vec![c(0.0, 0.0); n * n] }
    }

    pub fn eye(n: usize) -> Self {
        let mut m = Self::zero(n);
        for k in 0..n {
            m.a[k * n + k] = c(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let n = self.n;
        let mut r = Mat::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = c(0.0, 0.0);
                for k in 0..n {
                    s += self.a[i * n + k] * o.a[k * n + j];
                }
                r.a[i * n + j] = s;
            }
        }
        r
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|k| self.a[i * self.n + k] * v[k]).sum())
            .collect()
    }

    fn one_norm(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// exp(self): halve until the 1-norm is below 1/8, sum 30 Taylor terms
    /// with Horner's scheme, square back.
    pub fn exp(&self) -> Mat {
        let mut halvings = 0;
        let mut norm = self.one_norm();
        while norm > 0.125 {
            norm *= 0.5;
            halvings += 1;
        }
        let s = 0.5f64.powi(halvings);
        let x = Mat { n: self.n, a: self.a.iter().map(|v| v * s).collect() };
        let mut r = Mat::eye(self.n);
        for k in (1..=30).rev() {
            let mut t = x.mul(&r);
            for v in &mut t.a {
                *v /= k as f64;
            }
            for d in 0..self.n {
                t.a[d * self.n + d] += c(1.0, 0.0);
            }
            r = t;
        }
        for _ in 0..halvings {
            r = r.mul(&r);
        }
        r
    }
}

/// Joint-space helper for truncation `n_max`.
pub struct Space {
    pub n_max: usize,
}

impl Space {
    pub fn dim(&self) -> usize {
        LEVELS * (self.n_max + 1)
    }

    pub fn idx(&self, level: usize, n: usize) -> usize {
        level * (self.n_max + 1) + n
    }

    pub fn ket(&self, level: usize, n: usize) -> Vec<Complex64> {
        let mut v = vec![c(0.0, 0.0); self.dim()];
        v[self.idx(level, n)] = c(1.0, 0.0);
        v
    }

    /// Generator `(Ω/2)(a† σ- − a σ+)` of the resonant coupling.
    pub fn jc_generator(&self, omega: f64) -> Mat {
        let mut m = Mat::zero(self.dim());
        for n in 0..self.n_max {
            let k = 0.5 * omega * ((n + 1) as f64).sqrt();
            let (e, g) = (self.idx(E, n), self.idx(G, n + 1));
            m.set(g, e, c(k, 0.0));
            m.set(e, g, c(-k, 0.0));
        }
        m
    }

    pub fn resonant(&self, omega: f64, t: f64) -> Mat {
        let mut a = self.jc_generator(omega);
        for v in &mut a.a {
            *v *= t;
        }
        a.exp()
    }

    /// Ramsey zone on levels `(a, b)` in every photon sector.
    pub fn ramsey(&self, a: usize, b: usize, phi: f64) -> Mat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = Mat::eye(self.dim());
        for n in 0..=self.n_max {
            let (ia, ib) = (self.idx(a, n), self.idx(b, n));
            m.set(ia, ia, c(s, 0.0));
            m.set(ib, ib, c(s, 0.0));
            m.set(ib, ia, Complex64::from_polar(s, phi));
            m.set(ia, ib, -Complex64::from_polar(s, -phi));
        }
        m
    }

    pub fn ramsey_eg(&self, phi: f64) -> Mat {
        self.ramsey(E, G, phi)
    }

    pub fn ramsey_gi(&self, phi: f64) -> Mat {
        self.ramsey(G, I, phi)
    }

    pub fn dispersive(&self, eps: f64) -> Mat {
        let mut m = Mat::eye(self.dim());
        for n in 0..=self.n_max {
            m.set(self.idx(E, n), self.idx(E, n), Complex64::from_polar(1.0, (n + 1) as f64 * eps));
            m.set(self.idx(G, n), self.idx(G, n), Complex64::from_polar(1.0, -(n as f64) * eps));
        }
        m
    }

    pub fn level_prob(&self, v: &[Complex64], level: usize) -> f64 {
        (0..=self.n_max).map(|n| v[self.idx(level, n)].norm_sqr()).sum()
    }

    /// Field amplitudes conditioned on `level`, renormalized.
    pub fn conditional_field(&self, v: &[Complex64], level: usize) -> Vec<Complex64> {
        let f: Vec<Complex64> = (0..=self.n_max).map(|n| v[self.idx(level, n)]).collect();
        normalize(f)
    }

    pub fn product(&self, atom: [Complex64; 3], field: &[Complex64]) -> Vec<Complex64> {
        let mut v = vec![c(0.0, 0.0); self.dim()];
        for (l, a) in atom.iter().enumerate() {
            for (n, f) in field.iter().enumerate() {
                v[self.idx(l, n)] = a * f;
            }
        }
        v
    }
}

pub fn normalize(v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

/// Generalized Laguerre polynomial `L_k^(a)(x)` by the three-term recurrence.
fn laguerre(k: usize, a: f64, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 + a - x);
    if k == 0 {
        return l0;
    }
    for j in 1..k {
        let j = j as f64;
        let l2 = ((2.0 * j + 1.0 + a - x) * l1 - (j + a) * l0) / (j + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Closed-form matrix element `<m|D(β)|n>` of the untruncated displacement.
pub fn displacement_element(m: usize, n: usize, beta: Complex64) -> Complex64 {
    let x = beta.norm_sqr();
    let pref = (-0.5 * x).exp();
    if m >= n {
        let r = (0.5 * (ln_factorial(n) - ln_factorial(m))).exp();
        beta.powu((m - n) as u32) * (pref * r * laguerre(n, (m - n) as f64, x))
    } else {
        let r = (0.5 * (ln_factorial(m) - ln_factorial(n))).exp();
        (-beta.conj()).powu((n - m) as u32) * (pref * r * laguerre(m, (n - m) as f64, x))
    }
}

/// Displaced field, restricted to `0..=n_max` and renormalized.
pub fn displace(field: &[Complex64], beta: Complex64) -> Vec<Complex64> {
    let n_max = field.len() - 1;
    let out = (0..=n_max)
        .map(|m| (0..=n_max).map(|n| displacement_element(m, n, beta) * field[n]).sum())
        .collect();
    normalize(out)
}
