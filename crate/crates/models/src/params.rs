//! Named parameter tensors, gradient buffers and the Adam optimizer.
//!
//! Values are held as f64 but always rounded to the nearest f32, so that the
//! 32-bit checkpoint format stores them without loss.

use rand::Rng;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    tensors: Vec<Tensor>,
    by_name: HashMap<String, ParamId>,
}

pub(crate) fn to_f32_grid(x: f64) -> f64 {
    x as f32 as f64
}

impl ParamStore {
    /// Registers a `rows x cols` tensor drawn from U(−1/√fan_in, 1/√fan_in).
    pub fn add<R: Rng + ?Sized>(
        &mut self,
        name: &str,
        rows: usize,
        cols: usize,
        fan_in: usize,
        rng: &mut R,
    ) -> ParamId {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| to_f32_grid(rng.random_range(-bound..bound)))
            .collect();
        self.insert(Tensor {
            name: name.to_string(),
            rows,
            cols,
            data,
        })
    }

    pub fn insert(&mut self, mut t: Tensor) -> ParamId {
        assert_eq!(t.data.len(), t.rows * t.cols, "tensor {} has wrong length", t.name);
        assert!(!self.by_name.contains_key(&t.name), "duplicate tensor {}", t.name);
        for x in &mut t.data {
            *x = to_f32_grid(*x);
        }
        let id = ParamId(self.tensors.len());
        self.by_name.insert(t.name.clone(), id);
        self.tensors.push(t);
        id
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensor(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn data(&self, id: ParamId) -> &[f64] {
        &self.tensors[id.0].data
    }

    /// Raw mutable access; values written here are not re-rounded.
    pub fn data_mut(&mut self, id: ParamId) -> &mut [f64] {
        &mut self.tensors[id.0].data
    }

    pub fn row(&self, id: ParamId, r: usize) -> &[f64] {
        let t = &self.tensors[id.0];
        assert!(r < t.rows, "row {r} out of range for {}", t.name);
        &t.data[r * t.cols..(r + 1) * t.cols]
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn zero_grads(&self) -> Grads {
        Grads {
            bufs: self.tensors.iter().map(|t| vec![0.0; t.data.len()]).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.data.iter().all(|x| x.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    bufs: Vec<Vec<f64>>,
}

impl Grads {
    pub fn get(&self, id: ParamId) -> &[f64] {
        &self.bufs[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut [f64] {
        &mut self.bufs[id.0]
    }

    pub fn scale(&mut self, s: f64) {
        for b in &mut self.bufs {
            for x in b {
                *x *= s;
            }
        }
    }

    pub fn clear(&mut self) {
        for b in &mut self.bufs {
            b.fill(0.0);
        }
    }

    pub fn norm(&self) -> f64 {
        self.bufs.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(store: &ParamStore, lr: f64) -> Self {
        let zeros: Vec<Vec<f64>> = store.tensors.iter().map(|t| vec![0.0; t.data.len()]).collect();
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn step(&mut self, store: &mut ParamStore, grads: &Grads) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for (i, t) in store.tensors.iter_mut().enumerate() {
            let (m, v, g) = (&mut self.m[i], &mut self.v[i], &grads.bufs[i]);
            for k in 0..t.data.len() {
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k];
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] * g[k];
                let step = self.lr * (m[k] / c1) / ((v[k] / c2).sqrt() + self.eps);
                t.data[k] = to_f32_grid(t.data[k] - step);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn init_is_bounded_seeded_and_f32_exact() {
        let mk = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = ParamStore::default();
            s.add("w", 8, 16, 16, &mut rng);
            s
        };
        let a = mk(1);
        assert_eq!(a, mk(1));
        assert_ne!(a, mk(2));
        for &x in a.data(a.id("w").unwrap()) {
            assert!(x.abs() <= 0.25);
            assert_eq!(x, x as f32 as f64);
        }
    }

    #[test]
    fn adam_minimizes_a_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = ParamStore::default();
        let id = s.add("x", 1, 3, 1, &mut rng);
        let mut opt = Adam::new(&s, 0.05);
        for _ in 0..500 {
            let mut g = s.zero_grads();
            for (gk, xk) in g.get_mut(id).iter_mut().zip(s.data(id)) {
                *gk = 2.0 * (xk - 0.3);
            }
            opt.step(&mut s, &g);
        }
        assert!(s.data(id).iter().all(|x| (x - 0.3).abs() < 1e-2));
    }
}
