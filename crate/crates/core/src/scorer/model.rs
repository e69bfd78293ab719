//! Parameter layout, forward pass and hand-written backward pass of the
//! scoring network.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::clause_graph::{ClauseGraphInput, FEATURE_DIM, SPECTRAL_DIM};

use super::ScorerConfig;

const LN_EPS: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Eq)]
struct LayerOffsets {
    ln1_g: usize,
    ln1_b: usize,
    wq: usize,
    bq: usize,
    wk: usize,
    bk: usize,
    wv: usize,
    bv: usize,
    wo: usize,
    bo: usize,
    ln2_g: usize,
    ln2_b: usize,
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
}

/// Offsets of every tensor inside the flat parameter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Layout {
    embed: usize,
    width: usize,
    ff: usize,
    heads: usize,
    w_feat: usize,
    b_feat: usize,
    w_up: usize,
    w_spec: usize,
    b_in: usize,
    layers: Vec<LayerOffsets>,
    lnf_g: usize,
    lnf_b: usize,
    w_out: usize,
    b_out: usize,
    pub len: usize,
}

impl Layout {
    pub fn new(cfg: &ScorerConfig) -> Self {
        let (e, d, f) = (cfg.embed, cfg.width, cfg.ff_width);
        let mut next = 0;
        let mut take = |n: usize| {
            let off = next;
            next += n;
            off
        };
        let w_feat = take(FEATURE_DIM * e);
        let b_feat = take(e);
        let w_up = take(e * d);
        let w_spec = take(SPECTRAL_DIM * d);
        let b_in = take(d);
        let layers = (0..cfg.layers)
            .map(|_| LayerOffsets {
                ln1_g: take(d),
                ln1_b: take(d),
                wq: take(d * d),
                bq: take(d),
                wk: take(d * d),
                bk: take(d),
                wv: take(d * d),
                bv: take(d),
                wo: take(d * d),
                bo: take(d),
                ln2_g: take(d),
                ln2_b: take(d),
                w1: take(d * f),
                b1: take(f),
                w2: take(f * d),
                b2: take(d),
            })
            .collect();
        let lnf_g = take(d);
        let lnf_b = take(d);
        let w_out = take(d);
        let b_out = take(1);
        Layout {
            embed: e,
            width: d,
            ff: f,
            heads: cfg.heads,
            w_feat,
            b_feat,
            w_up,
            w_spec,
            b_in,
            layers,
            lnf_g,
            lnf_b,
            w_out,
            b_out,
            len: next,
        }
    }

    /// Random initial parameters: weights ~ N(0, 1/fan_in), zero biases,
    /// unit layer-norm gains.
    pub fn init(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut p = vec![0.0; self.len];
        let mut fill = |p: &mut [f64], off: usize, rows: usize, cols: usize| {
            let normal = Normal::new(0.0, (1.0 / rows as f64).sqrt()).expect("positive std");
            for x in &mut p[off..off + rows * cols] {
                *x = normal.sample(rng);
            }
        };
        let (e, d, f) = (self.embed, self.width, self.ff);
        fill(&mut p, self.w_feat, FEATURE_DIM, e);
        fill(&mut p, self.w_up, e, d);
        fill(&mut p, self.w_spec, SPECTRAL_DIM, d);
        for l in &self.layers {
            for w in [l.wq, l.wk, l.wv, l.wo] {
                fill(&mut p, w, d, d);
            }
            fill(&mut p, l.w1, d, f);
            fill(&mut p, l.w2, f, d);
        }
        // A small readout keeps untrained predictions near chance.
        fill(&mut p, self.w_out, d, 1);
        for x in &mut p[self.w_out..self.w_out + d] {
            *x *= 0.1;
        }
        for l in &self.layers {
            p[l.ln1_g..l.ln1_g + d].fill(1.0);
            p[l.ln2_g..l.ln2_g + d].fill(1.0);
        }
        p[self.lnf_g..self.lnf_g + d].fill(1.0);
        p
    }
}

fn m<'a>(p: &'a [f64], off: usize, rows: usize, cols: usize) -> ArrayView2<'a, f64> {
    ArrayView2::from_shape((rows, cols), &p[off..off + rows * cols]).expect("layout fits")
}

fn v<'a>(p: &'a [f64], off: usize, n: usize) -> ArrayView1<'a, f64> {
    ArrayView1::from(&p[off..off + n])
}

fn acc<'a>(g: &mut [f64], off: usize, x: impl IntoIterator<Item = &'a f64>) {
    for (slot, x) in g[off..].iter_mut().zip(x) {
        *slot += x;
    }
}

struct LnCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
}

fn ln_forward(x: &Array2<f64>, g: ArrayView1<f64>, b: ArrayView1<f64>) -> (Array2<f64>, LnCache) {
    let d = x.ncols() as f64;
    let mean = x.sum_axis(Axis(1)) / d;
    let centered = x - &mean.view().insert_axis(Axis(1));
    let var = centered.mapv(|c| c * c).sum_axis(Axis(1)) / d;
    let inv_std = var.mapv(|v| 1.0 / (v + LN_EPS).sqrt());
    let xhat = &centered * &inv_std.view().insert_axis(Axis(1));
    let y = &xhat * &g + &b;
    (y, LnCache { xhat, inv_std })
}

/// Returns dx and accumulates dg, db.
fn ln_backward(dy: &Array2<f64>, c: &LnCache, g: ArrayView1<f64>, grads: &mut [f64], g_off: usize, b_off: usize) -> Array2<f64> {
    acc(grads, g_off, (dy * &c.xhat).sum_axis(Axis(0)).iter());
    acc(grads, b_off, dy.sum_axis(Axis(0)).iter());
    let d = dy.ncols() as f64;
    let dxhat = dy * &g;
    let sum_dxhat = dxhat.sum_axis(Axis(1)).insert_axis(Axis(1));
    let sum_dxhat_xhat = (&dxhat * &c.xhat).sum_axis(Axis(1)).insert_axis(Axis(1));
    let inner = &dxhat * d - &sum_dxhat - &c.xhat * &sum_dxhat_xhat;
    inner * &(c.inv_std.view().insert_axis(Axis(1)).mapv(|s| s / d))
}

fn linear(x: &Array2<f64>, w: ArrayView2<f64>, b: ArrayView1<f64>) -> Array2<f64> {
    x.dot(&w) + &b
}

/// Accumulates dW and db of `y = x W + b` and returns dx.
fn linear_backward(x: &Array2<f64>, dy: &Array2<f64>, w: ArrayView2<f64>, grads: &mut [f64], w_off: usize, b_off: Option<usize>) -> Array2<f64> {
    acc(grads, w_off, x.t().dot(dy).iter());
    if let Some(b_off) = b_off {
        acc(grads, b_off, dy.sum_axis(Axis(0)).iter());
    }
    dy.dot(&w.t())
}

fn softmax_rows(x: &mut Array2<f64>) {
    for mut row in x.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

struct LayerCache {
    a: Array2<f64>,
    ln1: LnCache,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    probs: Vec<Array2<f64>>,
    o: Array2<f64>,
    mask1: Option<Array2<f64>>,
    a2: Array2<f64>,
    ln2: LnCache,
    z: Array2<f64>,
    r: Array2<f64>,
    mask2: Option<Array2<f64>>,
}

pub(crate) struct Cache {
    embedded: Array2<f64>,
    layers: Vec<LayerCache>,
    final_ln: LnCache,
    final_out: Array2<f64>,
}

fn dropout_mask(shape: (usize, usize), rate: f64, rng: &mut impl Rng) -> Array2<f64> {
    let keep = 1.0 - rate;
    Array2::from_shape_fn(shape, |_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
}

impl Layout {
    /// Logit of one input. Dropout is applied when `dropout` is given.
    pub fn forward<R: Rng>(&self, p: &[f64], input: &ClauseGraphInput, mut dropout: Option<(f64, &mut R)>) -> (f64, Cache) {
        let (e, d, f) = (self.embed, self.width, self.ff);
        let n = input.num_nodes();
        let features = input.features.slice(s![..n, ..]).to_owned();
        let embedded = linear(&features, m(p, self.w_feat, FEATURE_DIM, e), v(p, self.b_feat, e));
        let mut h = embedded.dot(&m(p, self.w_up, e, d)) + input.spectral.slice(s![..n, ..]).dot(&m(p, self.w_spec, SPECTRAL_DIM, d)) + &v(p, self.b_in, d);
        let dh = d / self.heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let mut layers = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let (a, ln1) = ln_forward(&h, v(p, l.ln1_g, d), v(p, l.ln1_b, d));
            let q = linear(&a, m(p, l.wq, d, d), v(p, l.bq, d));
            let k = linear(&a, m(p, l.wk, d, d), v(p, l.bk, d));
            let vv = linear(&a, m(p, l.wv, d, d), v(p, l.bv, d));
            let mut o = Array2::zeros((n, d));
            let mut probs = Vec::with_capacity(self.heads);
            for hd in 0..self.heads {
                let cols = s![.., hd * dh..(hd + 1) * dh];
                let mut sc = q.slice(cols).dot(&k.slice(cols).t()) * scale;
                softmax_rows(&mut sc);
                o.slice_mut(cols).assign(&sc.dot(&vv.slice(cols)));
                probs.push(sc);
            }
            let mut att = linear(&o, m(p, l.wo, d, d), v(p, l.bo, d));
            let mask1 = dropout.as_mut().map(|(rate, rng)| dropout_mask((n, d), *rate, *rng));
            if let Some(mask) = &mask1 {
                att *= mask;
            }
            let h_mid = &h + &att;
            let (a2, ln2) = ln_forward(&h_mid, v(p, l.ln2_g, d), v(p, l.ln2_b, d));
            let z = linear(&a2, m(p, l.w1, d, f), v(p, l.b1, f));
            let r = z.mapv(|x| x.max(0.0));
            let mut ffo = linear(&r, m(p, l.w2, f, d), v(p, l.b2, d));
            let mask2 = dropout.as_mut().map(|(rate, rng)| dropout_mask((n, d), *rate, *rng));
            if let Some(mask) = &mask2 {
                ffo *= mask;
            }
            h = h_mid + ffo;
            layers.push(LayerCache {
                a,
                ln1,
                q,
                k,
                v: vv,
                probs,
                o,
                mask1,
                a2,
                ln2,
                z,
                r,
                mask2,
            });
        }
        let root = h.slice(s![input.root..input.root + 1, ..]).to_owned();
        let (final_out, final_ln) = ln_forward(&root, v(p, self.lnf_g, d), v(p, self.lnf_b, d));
        let logit = final_out.row(0).dot(&v(p, self.w_out, d)) + p[self.b_out];
        (
            logit,
            Cache {
                embedded,
                layers,
                final_ln,
                final_out,
            },
        )
    }

    /// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(logit).
    pub fn backward(&self, p: &[f64], input: &ClauseGraphInput, cache: &Cache, dlogit: f64, grads: &mut [f64]) {
        let (e, d, f) = (self.embed, self.width, self.ff);
        let n = input.num_nodes();
        acc(grads, self.w_out, cache.final_out.row(0).mapv(|y| y * dlogit).iter());
        grads[self.b_out] += dlogit;
        let dy = (v(p, self.w_out, d).to_owned() * dlogit).insert_axis(Axis(0));
        let droot = ln_backward(&dy, &cache.final_ln, v(p, self.lnf_g, d), grads, self.lnf_g, self.lnf_b);
        let mut dh = Array2::<f64>::zeros((n, d));
        dh.slice_mut(s![input.root..input.root + 1, ..]).assign(&droot);

        let dhd = d / self.heads;
        let scale = 1.0 / (dhd as f64).sqrt();
        for (l, c) in self.layers.iter().zip(&cache.layers).rev() {
            // Feed-forward block.
            let mut dffo = dh.clone();
            if let Some(mask) = &c.mask2 {
                dffo *= mask;
            }
            let dr = linear_backward(&c.r, &dffo, m(p, l.w2, f, d), grads, l.w2, Some(l.b2));
            let dz = dr * &c.z.mapv(|x| if x > 0.0 { 1.0 } else { 0.0 });
            let da2 = linear_backward(&c.a2, &dz, m(p, l.w1, d, f), grads, l.w1, Some(l.b1));
            let dh_mid = dh + ln_backward(&da2, &c.ln2, v(p, l.ln2_g, d), grads, l.ln2_g, l.ln2_b);

            // Attention block.
            let mut datt = dh_mid.clone();
            if let Some(mask) = &c.mask1 {
                datt *= mask;
            }
            let d_o = linear_backward(&c.o, &datt, m(p, l.wo, d, d), grads, l.wo, Some(l.bo));
            let mut dq = Array2::<f64>::zeros((n, d));
            let mut dk = Array2::<f64>::zeros((n, d));
            let mut dv = Array2::<f64>::zeros((n, d));
            for (hd, prob) in c.probs.iter().enumerate() {
                let cols = s![.., hd * dhd..(hd + 1) * dhd];
                let doh = d_o.slice(cols);
                dv.slice_mut(cols).assign(&prob.t().dot(&doh));
                let dp = doh.dot(&c.v.slice(cols).t());
                let row_dot = (&dp * prob).sum_axis(Axis(1)).insert_axis(Axis(1));
                let ds = (dp - &row_dot) * prob * scale;
                dq.slice_mut(cols).assign(&ds.dot(&c.k.slice(cols)));
                dk.slice_mut(cols).assign(&ds.t().dot(&c.q.slice(cols)));
            }
            let da = linear_backward(&c.a, &dq, m(p, l.wq, d, d), grads, l.wq, Some(l.bq))
                + linear_backward(&c.a, &dk, m(p, l.wk, d, d), grads, l.wk, Some(l.bk))
                + linear_backward(&c.a, &dv, m(p, l.wv, d, d), grads, l.wv, Some(l.bv));
            dh = dh_mid + ln_backward(&da, &c.ln1, v(p, l.ln1_g, d), grads, l.ln1_g, l.ln1_b);
        }

        acc(grads, self.w_up, cache.embedded.t().dot(&dh).iter());
        acc(grads, self.w_spec, input.spectral.slice(s![..n, ..]).t().dot(&dh).iter());
        acc(grads, self.b_in, dh.sum_axis(Axis(0)).iter());
        let de = dh.dot(&m(p, self.w_up, e, d).t());
        linear_backward(&input.features.slice(s![..n, ..]).to_owned(), &de, m(p, self.w_feat, FEATURE_DIM, e), grads, self.w_feat, Some(self.b_feat));
    }
}
