//! Reverse-mode differentiation over small dense f64 vectors.
//!
//! Every node holds a vector value. Parameters enter through [`Tape::param`],
//! [`Tape::row`] and [`Tape::affine`]; their gradients land in a [`Grads`]
//! buffer when [`Tape::backward`] runs.

use crate::params::{Grads, ParamId, ParamStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Const,
    Param(ParamId),
    Row(ParamId, usize),
    Affine {
        w: ParamId,
        b: Option<ParamId>,
        x: Var,
    },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Exp(Var),
    Slice(Var, usize),
    Concat(Vec<Var>),
    Sum(Vec<Var>),
    Dot(Var, Var),
    // gates r, u and candidate n are cached for the backward pass
    Gru {
        gi: Var,
        gh: Var,
        h: Var,
        cache: Vec<f64>,
    },
    Nll {
        logits: Var,
        probs: Vec<f64>,
        target: usize,
    },
    Kld {
        mu: Var,
        logvar: Var,
    },
}

pub struct Tape<'p> {
    params: &'p ParamStore,
    ops: Vec<Op>,
    vals: Vec<Vec<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Self {
            params,
            ops: Vec::with_capacity(256),
            vals: Vec::with_capacity(256),
        }
    }

    pub fn params(&self) -> &'p ParamStore {
        self.params
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn push(&mut self, op: Op, val: Vec<f64>) -> Var {
        self.ops.push(op);
        self.vals.push(val);
        Var(self.ops.len() - 1)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.vals[v.0]
    }

    /// Value of a length-1 node.
    pub fn scalar(&self, v: Var) -> f64 {
        debug_assert_eq!(self.vals[v.0].len(), 1);
        self.vals[v.0][0]
    }

    pub fn constant(&mut self, val: Vec<f64>) -> Var {
        self.push(Op::Const, val)
    }

    pub fn zeros(&mut self, len: usize) -> Var {
        self.constant(vec![0.0; len])
    }

    /// The whole tensor, flattened row-major.
    pub fn param(&mut self, id: ParamId) -> Var {
        let val = self.params.data(id).to_vec();
        self.push(Op::Param(id), val)
    }

    /// One row of a matrix parameter, as used for embedding lookups.
    pub fn row(&mut self, id: ParamId, r: usize) -> Var {
        let val = self.params.row(id, r).to_vec();
        self.push(Op::Row(id, r), val)
    }

    /// `W x + b`.
    pub fn affine(&mut self, w: ParamId, b: Option<ParamId>, x: Var) -> Var {
        let t = self.params.tensor(w);
        let (rows, cols) = (t.rows, t.cols);
        let xv = &self.vals[x.0];
        assert_eq!(xv.len(), cols, "affine: {} expects {} inputs", t.name, cols);
        let mut y = match b {
            Some(b) => self.params.data(b).to_vec(),
            None => vec![0.0; rows],
        };
        debug_assert_eq!(y.len(), rows);
        let wd = &t.data;
        for (r, yr) in y.iter_mut().enumerate() {
            let row = &wd[r * cols..(r + 1) * cols];
            *yr += row.iter().zip(xv).map(|(a, b)| a * b).sum::<f64>();
        }
        self.push(Op::Affine { w, b, x }, y)
    }

    pub fn matvec(&mut self, w: ParamId, x: Var) -> Var {
        self.affine(w, None, x)
    }

    fn zip_with(&self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let (av, bv) = (&self.vals[a.0], &self.vals[b.0]);
        assert_eq!(av.len(), bv.len(), "length mismatch");
        av.iter().zip(bv).map(|(&x, &y)| f(x, y)).collect()
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.zip_with(a, b, |x, y| x + y);
        self.push(Op::Add(a, b), v)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.zip_with(a, b, |x, y| x - y);
        self.push(Op::Sub(a, b), v)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.zip_with(a, b, |x, y| x * y);
        self.push(Op::Mul(a, b), v)
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let v = self.vals[a.0].iter().map(|x| x * s).collect();
        self.push(Op::Scale(a, s), v)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.vals[a.0].iter().map(|&x| sigmoid(x)).collect();
        self.push(Op::Sigmoid(a), v)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.vals[a.0].iter().map(|x| x.tanh()).collect();
        self.push(Op::Tanh(a), v)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let v = self.vals[a.0].iter().map(|x| x.exp()).collect();
        self.push(Op::Exp(a), v)
    }

    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Var {
        let v = self.vals[a.0][start..start + len].to_vec();
        self.push(Op::Slice(a, start), v)
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let mut v = Vec::new();
        for p in parts {
            v.extend_from_slice(&self.vals[p.0]);
        }
        self.push(Op::Concat(parts.to_vec()), v)
    }

    /// Elementwise sum, accumulated in the given order. `parts` must be non-empty.
    pub fn sum(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty(), "sum of no vectors");
        if parts.len() == 1 {
            return parts[0];
        }
        let mut v = self.vals[parts[0].0].clone();
        for p in &parts[1..] {
            for (acc, x) in v.iter_mut().zip(&self.vals[p.0]) {
                *acc += x;
            }
        }
        self.push(Op::Sum(parts.to_vec()), v)
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Var {
        let s = self.zip_with(a, b, |x, y| x * y).iter().sum();
        self.push(Op::Dot(a, b), vec![s])
    }

    /// GRU update from precomputed input and hidden projections (each of
    /// length 3H, laid out as reset, update, candidate).
    pub fn gru(&mut self, gi: Var, gh: Var, h: Var) -> Var {
        let hv = &self.vals[h.0];
        let n_h = hv.len();
        let (giv, ghv) = (&self.vals[gi.0], &self.vals[gh.0]);
        assert_eq!(giv.len(), 3 * n_h);
        assert_eq!(ghv.len(), 3 * n_h);
        let mut cache = vec![0.0; 3 * n_h];
        let mut out = vec![0.0; n_h];
        for k in 0..n_h {
            let r = sigmoid(giv[k] + ghv[k]);
            let u = sigmoid(giv[n_h + k] + ghv[n_h + k]);
            let n = (giv[2 * n_h + k] + r * ghv[2 * n_h + k]).tanh();
            cache[k] = r;
            cache[n_h + k] = u;
            cache[2 * n_h + k] = n;
            out[k] = (1.0 - u) * n + u * hv[k];
        }
        self.push(Op::Gru { gi, gh, h, cache }, out)
    }

    /// Negative log-likelihood of `target` under a softmax restricted to the
    /// entries where `allowed` is true.
    pub fn nll(&mut self, logits: Var, allowed: &[bool], target: usize) -> Var {
        let lv = &self.vals[logits.0];
        assert_eq!(lv.len(), allowed.len());
        assert!(allowed[target], "target {target} is masked");
        let probs = masked_softmax(lv, allowed, 1.0);
        let loss = -probs[target].ln();
        self.push(
            Op::Nll {
                logits,
                probs,
                target,
            },
            vec![loss],
        )
    }

    /// `0.5 Σ (exp(logvar) + mu² − 1 − logvar)`.
    pub fn kld(&mut self, mu: Var, logvar: Var) -> Var {
        let v = kld_value(&self.vals[mu.0], &self.vals[logvar.0]);
        self.push(Op::Kld { mu, logvar }, vec![v])
    }

    /// Accumulates d(root)/d(param) into `grads`. `root` must be a scalar.
    pub fn backward(&self, root: Var, grads: &mut Grads) {
        assert_eq!(self.vals[root.0].len(), 1, "backward from a non-scalar");
        let mut g: Vec<Option<Vec<f64>>> = vec![None; root.0 + 1];
        g[root.0] = Some(vec![1.0]);
        for i in (0..=root.0).rev() {
            let Some(gy) = g[i].take() else { continue };
            match &self.ops[i] {
                Op::Const => {}
                Op::Param(id) => {
                    for (a, b) in grads.get_mut(*id).iter_mut().zip(&gy) {
                        *a += b;
                    }
                }
                Op::Row(id, r) => {
                    let cols = self.params.tensor(*id).cols;
                    let gw = &mut grads.get_mut(*id)[r * cols..(r + 1) * cols];
                    for (a, b) in gw.iter_mut().zip(&gy) {
                        *a += b;
                    }
                }
                Op::Affine { w, b, x } => {
                    let t = self.params.tensor(*w);
                    let cols = t.cols;
                    let xv = &self.vals[x.0];
                    {
                        let gw = grads.get_mut(*w);
                        for (r, &gr) in gy.iter().enumerate() {
                            if gr == 0.0 {
                                continue;
                            }
                            let row = &mut gw[r * cols..(r + 1) * cols];
                            for (a, &xc) in row.iter_mut().zip(xv) {
                                *a += gr * xc;
                            }
                        }
                    }
                    if let Some(b) = b {
                        for (a, v) in grads.get_mut(*b).iter_mut().zip(&gy) {
                            *a += v;
                        }
                    }
                    if !matches!(self.ops[x.0], Op::Const) {
                        let gx = slot(&mut g, *x, cols);
                        for (r, &gr) in gy.iter().enumerate() {
                            if gr == 0.0 {
                                continue;
                            }
                            let row = &t.data[r * cols..(r + 1) * cols];
                            for (a, &wc) in gx.iter_mut().zip(row) {
                                *a += gr * wc;
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    acc(&mut g, *a, &gy, 1.0);
                    acc(&mut g, *b, &gy, 1.0);
                }
                Op::Sub(a, b) => {
                    acc(&mut g, *a, &gy, 1.0);
                    acc(&mut g, *b, &gy, -1.0);
                }
                Op::Mul(a, b) => {
                    let ga: Vec<f64> = gy.iter().zip(&self.vals[b.0]).map(|(x, y)| x * y).collect();
                    let gb: Vec<f64> = gy.iter().zip(&self.vals[a.0]).map(|(x, y)| x * y).collect();
                    acc(&mut g, *a, &ga, 1.0);
                    acc(&mut g, *b, &gb, 1.0);
                }
                Op::Scale(a, s) => acc(&mut g, *a, &gy, *s),
                Op::Sigmoid(a) => {
                    let d: Vec<f64> = gy.iter().zip(&self.vals[i]).map(|(x, y)| x * y * (1.0 - y)).collect();
                    acc(&mut g, *a, &d, 1.0);
                }
                Op::Tanh(a) => {
                    let d: Vec<f64> = gy.iter().zip(&self.vals[i]).map(|(x, y)| x * (1.0 - y * y)).collect();
                    acc(&mut g, *a, &d, 1.0);
                }
                Op::Exp(a) => {
                    let d: Vec<f64> = gy.iter().zip(&self.vals[i]).map(|(x, y)| x * y).collect();
                    acc(&mut g, *a, &d, 1.0);
                }
                Op::Slice(a, start) => {
                    let len = self.vals[a.0].len();
                    let ga = slot(&mut g, *a, len);
                    for (k, v) in gy.iter().enumerate() {
                        ga[start + k] += v;
                    }
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let len = self.vals[p.0].len();
                        acc(&mut g, *p, &gy[off..off + len], 1.0);
                        off += len;
                    }
                }
                Op::Sum(parts) => {
                    for p in parts {
                        acc(&mut g, *p, &gy, 1.0);
                    }
                }
                Op::Dot(a, b) => {
                    let s = gy[0];
                    let ga: Vec<f64> = self.vals[b.0].iter().map(|y| s * y).collect();
                    let gb: Vec<f64> = self.vals[a.0].iter().map(|x| s * x).collect();
                    acc(&mut g, *a, &ga, 1.0);
                    acc(&mut g, *b, &gb, 1.0);
                }
                Op::Gru { gi, gh, h, cache } => {
                    let n_h = gy.len();
                    let hv = &self.vals[h.0];
                    let ghv = &self.vals[gh.0];
                    let mut d_gi = vec![0.0; 3 * n_h];
                    let mut d_gh = vec![0.0; 3 * n_h];
                    let mut d_h = vec![0.0; n_h];
                    for k in 0..n_h {
                        let (r, u, n) = (cache[k], cache[n_h + k], cache[2 * n_h + k]);
                        let dy = gy[k];
                        d_h[k] = dy * u;
                        let dn = dy * (1.0 - u) * (1.0 - n * n);
                        let du = dy * (hv[k] - n) * u * (1.0 - u);
                        let dr = dn * ghv[2 * n_h + k] * r * (1.0 - r);
                        d_gi[2 * n_h + k] = dn;
                        d_gh[2 * n_h + k] = dn * r;
                        d_gi[n_h + k] = du;
                        d_gh[n_h + k] = du;
                        d_gi[k] = dr;
                        d_gh[k] = dr;
                    }
                    acc(&mut g, *gi, &d_gi, 1.0);
                    acc(&mut g, *gh, &d_gh, 1.0);
                    acc(&mut g, *h, &d_h, 1.0);
                }
                Op::Nll {
                    logits,
                    probs,
                    target,
                } => {
                    let s = gy[0];
                    let mut d: Vec<f64> = probs.iter().map(|p| s * p).collect();
                    d[*target] -= s;
                    acc(&mut g, *logits, &d, 1.0);
                }
                Op::Kld { mu, logvar } => {
                    let s = gy[0];
                    let gm: Vec<f64> = self.vals[mu.0].iter().map(|m| s * m).collect();
                    let gl: Vec<f64> = self.vals[logvar.0]
                        .iter()
                        .map(|l| s * 0.5 * (l.exp() - 1.0))
                        .collect();
                    acc(&mut g, *mu, &gm, 1.0);
                    acc(&mut g, *logvar, &gl, 1.0);
                }
            }
        }
    }
}

fn slot(g: &mut [Option<Vec<f64>>], v: Var, len: usize) -> &mut Vec<f64> {
    g[v.0].get_or_insert_with(|| vec![0.0; len])
}

fn acc(g: &mut [Option<Vec<f64>>], v: Var, d: &[f64], s: f64) {
    let buf = slot(g, v, d.len());
    for (a, x) in buf.iter_mut().zip(d) {
        *a += s * x;
    }
}

/// Softmax of `logits / temperature` over the allowed entries; masked
/// entries get probability zero.
pub fn masked_softmax(logits: &[f64], allowed: &[bool], temperature: f64) -> Vec<f64> {
    let max = logits
        .iter()
        .zip(allowed)
        .filter(|(_, &a)| a)
        .map(|(&l, _)| l / temperature)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(max.is_finite(), "no allowed entry");
    let mut p: Vec<f64> = logits
        .iter()
        .zip(allowed)
        .map(|(&l, &a)| if a { (l / temperature - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = p.iter().sum();
    for x in &mut p {
        *x /= z;
    }
    p
}

pub fn kld_value(mu: &[f64], logvar: &[f64]) -> f64 {
    0.5 * mu
        .iter()
        .zip(logvar)
        .map(|(m, l)| l.exp() + m * m - 1.0 - l)
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn numeric<F: Fn(&ParamStore) -> f64>(store: &ParamStore, f: F) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for id in store.ids() {
            let mut g = Vec::new();
            for k in 0..store.data(id).len() {
                let mut p = store.clone();
                let h = 1e-6;
                p.data_mut(id)[k] += h;
                let up = f(&p);
                p.data_mut(id)[k] -= 2.0 * h;
                let down = f(&p);
                g.push((up - down) / (2.0 * h));
            }
            out.push(g);
        }
        out
    }

    fn check<F: Fn(&ParamStore) -> (f64, Grads)>(store: &ParamStore, f: F) {
        let (_, analytic) = f(store);
        let num = numeric(store, |p| f(p).0);
        for id in store.ids() {
            for (k, (a, n)) in analytic.get(id).iter().zip(&num[id.index()]).enumerate() {
                let scale = a.abs().max(n.abs()).max(1e-4);
                assert!((a - n).abs() / scale < 1e-5, "{} [{k}]: {a} vs {n}", store.tensor(id).name);
            }
        }
    }

    #[test]
    fn elementwise_ops_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut store = ParamStore::default();
        let w = store.add("w", 4, 3, 3, &mut rng);
        let b = store.add("b", 4, 1, 3, &mut rng);
        let e = store.add("e", 5, 3, 1, &mut rng);
        let v = store.add("v", 1, 4, 4, &mut rng);
        check(&store, |p| {
            let mut t = Tape::new(p);
            let x = t.row(e, 2);
            let y = t.affine(w, Some(b), x);
            let s = t.sigmoid(y);
            let th = t.tanh(y);
            let m = t.mul(s, th);
            let ex = t.exp(m);
            let d = t.sub(ex, s);
            let sc = t.scale(d, 0.7);
            let c = t.concat(&[sc, x]);
            let sl = t.slice(c, 2, 4);
            let vv = t.param(v);
            let sum = t.sum(&[sl, vv, sl]);
            let out = t.dot(sum, vv);
            let mut g = p.zero_grads();
            t.backward(out, &mut g);
            (t.scalar(out), g)
        });
    }

    #[test]
    fn gru_nll_and_kld_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut store = ParamStore::default();
        let wi = store.add("wi", 9, 2, 2, &mut rng);
        let wh = store.add("wh", 9, 3, 3, &mut rng);
        let bh = store.add("bh", 9, 1, 3, &mut rng);
        let x0 = store.add("x0", 1, 2, 1, &mut rng);
        let h0 = store.add("h0", 1, 3, 1, &mut rng);
        let out_w = store.add("out", 4, 3, 3, &mut rng);
        check(&store, |p| {
            let mut t = Tape::new(p);
            let x = t.param(x0);
            let h = t.param(h0);
            let gi = t.matvec(wi, x);
            let gh = t.affine(wh, Some(bh), h);
            let h1 = t.gru(gi, gh, h);
            let gh2 = t.affine(wh, Some(bh), h1);
            let h2 = t.gru(gi, gh2, h1);
            let logits = t.matvec(out_w, h2);
            let nll = t.nll(logits, &[true, false, true, true], 3);
            let mu = t.slice(h2, 0, 2);
            let lv = t.slice(h1, 1, 2);
            let k = t.kld(mu, lv);
            let total = t.sum(&[nll, k]);
            let mut g = p.zero_grads();
            t.backward(total, &mut g);
            (t.scalar(total), g)
        });
    }

    #[test]
    fn masked_softmax_ignores_masked_entries() {
        let p = masked_softmax(&[1.0, 100.0, 1.0], &[true, false, true], 1.0);
        assert_eq!(p, vec![0.5, 0.0, 0.5]);
        assert_eq!(kld_value(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert!((kld_value(&[1.0, 1.0], &[0.0, 0.0]) - 1.0).abs() < 1e-15);
    }
}
