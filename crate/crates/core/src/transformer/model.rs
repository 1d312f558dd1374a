//! Encoder-decoder forward pass, token cross-entropy and exact reverse-mode
//! gradients.
//!
//! Layers are post-norm: every sublayer output (after dropout) is added to
//! its input and the sum is layer-normalised. Token embeddings are scaled
//! by `sqrt(d_model)` and summed with fixed sinusoidal position encodings.
//! The decoder's self-attention is strictly causal.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::attention::{mha_backward, mha_forward, AttnCache, AttnGrads, AttnWeights};
use super::config::ModelConfig;
use super::params::Parameters;
use super::tensor::{linear, linear_backward, Mat, Tensor};
use crate::error::{Error, Result};
use crate::subword::PAD;

const NORM_EPS: f64 = 1e-6;

/// Whether dropout is active. Training mode carries the generator that
/// draws the dropout masks.
pub enum Mode<'a> {
    Eval,
    Train(&'a mut ChaCha8Rng),
}

impl Mode<'_> {
    fn rng(&mut self) -> Option<&mut ChaCha8Rng> {
        match self {
            Mode::Eval => None,
            Mode::Train(rng) => Some(rng),
        }
    }
}

/// A padded batch for teacher-forced training. `tgt_out` is `tgt_in`
/// shifted left by one; masks are `true` on real tokens and padding only
/// ever trails.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub src_ids: Vec<Vec<u32>>,
    pub tgt_in_ids: Vec<Vec<u32>>,
    pub tgt_out_ids: Vec<Vec<u32>>,
    pub src_mask: Vec<Vec<bool>>,
    pub tgt_mask: Vec<Vec<bool>>,
}

fn pad_rows(rows: &[&[u32]]) -> (Vec<Vec<u32>>, Vec<Vec<bool>>) {
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    rows.iter()
        .map(|r| {
            let mut ids = r.to_vec();
            ids.resize(width, PAD);
            let mask = (0..width).map(|i| i < r.len()).collect();
            (ids, mask)
        })
        .unzip()
}

impl Batch {
    /// Builds a batch from `(source, framed target)` id pairs, where each
    /// target runs `BOS … EOS`.
    pub fn from_pairs(pairs: &[(&[u32], &[u32])]) -> Result<Batch> {
        if pairs.is_empty() {
            return Err(Error::Input("empty batch".into()));
        }
        let mut srcs = Vec::with_capacity(pairs.len());
        let mut tins = Vec::with_capacity(pairs.len());
        let mut touts = Vec::with_capacity(pairs.len());
        for &(src, tgt) in pairs {
            if src.is_empty() {
                return Err(Error::Input("empty source sequence".into()));
            }
            if tgt.len() < 2 {
                return Err(Error::Input("target needs at least BOS and EOS".into()));
            }
            srcs.push(src);
            tins.push(&tgt[..tgt.len() - 1]);
            touts.push(&tgt[1..]);
        }
        let (src_ids, src_mask) = pad_rows(&srcs);
        let (tgt_in_ids, tgt_mask) = pad_rows(&tins);
        let (tgt_out_ids, _) = pad_rows(&touts);
        Ok(Batch {
            src_ids,
            tgt_in_ids,
            tgt_out_ids,
            src_mask,
            tgt_mask,
        })
    }

    pub fn len(&self) -> usize {
        self.src_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src_ids.is_empty()
    }

    /// Number of target positions that count toward the loss.
    pub fn num_tokens(&self) -> usize {
        self.tgt_mask.iter().flatten().filter(|&&m| m).count()
    }

    fn validate(&self, config: &ModelConfig) -> Result<()> {
        let b = self.len();
        if self.tgt_in_ids.len() != b
            || self.tgt_out_ids.len() != b
            || self.src_mask.len() != b
            || self.tgt_mask.len() != b
        {
            return Err(Error::Shape("batch fields disagree on batch size".into()));
        }
        for i in 0..b {
            let (s, sm) = (&self.src_ids[i], &self.src_mask[i]);
            let (ti, to, tm) = (&self.tgt_in_ids[i], &self.tgt_out_ids[i], &self.tgt_mask[i]);
            if s.len() != sm.len() || ti.len() != tm.len() || to.len() != tm.len() {
                return Err(Error::Shape(format!("row {i}: ids and masks differ in length")));
            }
            if s.len() > config.max_seq_len || ti.len() > config.max_seq_len {
                return Err(Error::Input(format!(
                    "row {i}: sequence longer than max_seq_len {}",
                    config.max_seq_len
                )));
            }
            for mask in [sm, tm] {
                if mask.windows(2).any(|w| !w[0] && w[1]) {
                    return Err(Error::Input(format!("row {i}: padding must trail")));
                }
            }
            if let Some(&id) = s.iter().find(|&&id| id as usize >= config.src_vocab_size) {
                return Err(Error::Input(format!("row {i}: source id {id} out of range")));
            }
            if let Some(&id) = ti.iter().chain(to).find(|&&id| id as usize >= config.tgt_vocab_size) {
                return Err(Error::Input(format!("row {i}: target id {id} out of range")));
            }
        }
        Ok(())
    }

    fn row(&self, i: usize) -> RowView<'_> {
        let ns = self.src_mask[i].iter().filter(|&&m| m).count();
        let nt = self.tgt_mask[i].iter().filter(|&&m| m).count();
        RowView {
            src: &self.src_ids[i][..ns],
            tgt_in: &self.tgt_in_ids[i][..nt],
            tgt_out: &self.tgt_out_ids[i][..nt],
        }
    }
}

struct RowView<'a> {
    src: &'a [u32],
    tgt_in: &'a [u32],
    tgt_out: &'a [u32],
}

/// Sinusoidal encoding: `sin(pos / 10000^(2i/d))` on even columns, `cos`
/// on odd ones.
pub fn positional_encoding(pos: usize, d_model: usize) -> Vec<f64> {
    (0..d_model)
        .map(|c| {
            let i = (c / 2) as f64;
            let angle = pos as f64 / 10000f64.powf(2.0 * i / d_model as f64);
            if c % 2 == 0 {
                angle.sin()
            } else {
                angle.cos()
            }
        })
        .collect()
}

fn embed(table: &[f64], ids: &[u32], d: usize) -> Mat {
    let scale = (d as f64).sqrt();
    let mut x = Mat::zeros(ids.len(), d);
    for (t, &id) in ids.iter().enumerate() {
        let row = &table[id as usize * d..(id as usize + 1) * d];
        let pe = positional_encoding(t, d);
        for ((o, &e), p) in x.row_mut(t).iter_mut().zip(row).zip(pe) {
            *o = e * scale + p;
        }
    }
    x
}

fn embed_backward(ids: &[u32], dx: &Mat, grad: &mut [f64]) {
    let d = dx.cols;
    let scale = (d as f64).sqrt();
    for (t, &id) in ids.iter().enumerate() {
        let g = &mut grad[id as usize * d..(id as usize + 1) * d];
        for (a, &b) in g.iter_mut().zip(dx.row(t)) {
            *a += b * scale;
        }
    }
}

fn dropout(x: &mut Mat, rate: f64, rng: Option<&mut ChaCha8Rng>) -> Option<Vec<f64>> {
    let rng = rng?;
    if rate == 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - rate);
    let mask: Vec<f64> = (0..x.data.len())
        .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
        .collect();
    for (v, m) in x.data.iter_mut().zip(&mask) {
        *v *= m;
    }
    Some(mask)
}

fn dropout_backward(dy: &Mat, mask: &Option<Vec<f64>>) -> Mat {
    match mask {
        None => dy.clone(),
        Some(mask) => {
            let mut out = dy.clone();
            for (v, m) in out.data.iter_mut().zip(mask) {
                *v *= m;
            }
            out
        }
    }
}

struct NormCache {
    xhat: Mat,
    inv_std: Vec<f64>,
}

fn layer_norm(x: &Mat, gain: &[f64], bias: &[f64]) -> (Mat, NormCache) {
    let d = x.cols as f64;
    let mut xhat = Mat::zeros(x.rows, x.cols);
    let mut out = Mat::zeros(x.rows, x.cols);
    let mut inv_std = Vec::with_capacity(x.rows);
    for r in 0..x.rows {
        let row = x.row(r);
        let mean = row.iter().sum::<f64>() / d;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d;
        let is = 1.0 / (var + NORM_EPS).sqrt();
        inv_std.push(is);
        for (c, &v) in row.iter().enumerate() {
            let h = (v - mean) * is;
            xhat.data[r * x.cols + c] = h;
            out.data[r * x.cols + c] = h * gain[c] + bias[c];
        }
    }
    (out, NormCache { xhat, inv_std })
}

fn layer_norm_backward(cache: &NormCache, gain: &[f64], dy: &Mat, dgain: &mut [f64], dbias: &mut [f64]) -> Mat {
    let n = dy.cols;
    let d = n as f64;
    let mut dx = Mat::zeros(dy.rows, n);
    let mut dxhat = vec![0.0; n];
    for r in 0..dy.rows {
        let g = dy.row(r);
        let h = cache.xhat.row(r);
        for c in 0..n {
            dgain[c] += g[c] * h[c];
            dbias[c] += g[c];
            dxhat[c] = g[c] * gain[c];
        }
        let mean_d = dxhat.iter().sum::<f64>() / d;
        let mean_dh = dxhat.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() / d;
        let is = cache.inv_std[r];
        for c in 0..n {
            dx.data[r * n + c] = is * (dxhat[c] - mean_d - h[c] * mean_dh);
        }
    }
    dx
}

struct FfnCache {
    x: Mat,
    hidden: Mat,
}

fn ffn_forward(x: &Mat, w1: &[f64], b1: &[f64], w2: &[f64], b2: &[f64]) -> (Mat, FfnCache) {
    let mut hidden = linear(x, w1, b1);
    for v in hidden.data.iter_mut() {
        *v = v.max(0.0);
    }
    let out = linear(&hidden, w2, b2);
    (out, FfnCache { x: x.clone(), hidden })
}

/// Names of one layer's tensors.
struct LayerNames {
    prefix: String,
}

impl LayerNames {
    fn encoder(i: usize) -> Self {
        LayerNames {
            prefix: format!("encoder.layer{i}"),
        }
    }

    fn decoder(i: usize) -> Self {
        LayerNames {
            prefix: format!("decoder.layer{i}"),
        }
    }

    fn name(&self, part: &str) -> String {
        format!("{}.{part}", self.prefix)
    }
}

fn attn_weights<'a>(p: &'a Parameters, prefix: &str) -> AttnWeights<'a> {
    let s = |n: &str| p.slice(&format!("{prefix}.{n}"));
    AttnWeights {
        wq: s("wq"),
        wk: s("wk"),
        wv: s("wv"),
        wo: s("wo"),
        bq: s("bq"),
        bk: s("bk"),
        bv: s("bv"),
        bo: s("bo"),
    }
}

/// Runs `f` with mutable access to several gradient tensors at once.
fn with_grads<const N: usize, R>(
    grads: &mut Parameters,
    names: [String; N],
    f: impl FnOnce([&mut [f64]; N]) -> R,
) -> R {
    let mut taken: Vec<Tensor> = names.iter().map(|n| grads.take(n)).collect();
    let result = {
        let mut iter = taken.iter_mut();
        let slices: [&mut [f64]; N] = std::array::from_fn(|_| iter.next().unwrap().data_mut());
        f(slices)
    };
    for (n, t) in names.into_iter().zip(taken) {
        grads.put(n, t);
    }
    result
}

fn attn_backward_into(
    grads: &mut Parameters,
    params: &Parameters,
    prefix: &str,
    heads: usize,
    cache: &AttnCache,
    dy: &Mat,
) -> (Mat, Mat) {
    let names = ["wq", "wk", "wv", "wo", "bq", "bk", "bv", "bo"].map(|n| format!("{prefix}.{n}"));
    let w = attn_weights(params, prefix);
    with_grads(grads, names, |[wq, wk, wv, wo, bq, bk, bv, bo]| {
        mha_backward(
            cache,
            w,
            heads,
            dy,
            AttnGrads {
                wq,
                wk,
                wv,
                wo,
                bq,
                bk,
                bv,
                bo,
            },
        )
    })
}

fn norm_backward_into(grads: &mut Parameters, params: &Parameters, prefix: &str, cache: &NormCache, dy: &Mat) -> Mat {
    let gain = params.slice(&format!("{prefix}.gain"));
    with_grads(
        grads,
        [format!("{prefix}.gain"), format!("{prefix}.bias")],
        |[dg, db]| layer_norm_backward(cache, gain, dy, dg, db),
    )
}

fn ffn_backward_into(grads: &mut Parameters, params: &Parameters, prefix: &str, cache: &FfnCache, dy: &Mat) -> Mat {
    let w1 = params.slice(&format!("{prefix}.w1"));
    let w2 = params.slice(&format!("{prefix}.w2"));
    let names = ["w1", "b1", "w2", "b2"].map(|n| format!("{prefix}.{n}"));
    with_grads(grads, names, |[dw1, db1, dw2, db2]| {
        let mut dh = linear_backward(&cache.hidden, w2, dy, dw2, db2);
        for (g, &h) in dh.data.iter_mut().zip(&cache.hidden.data) {
            if h <= 0.0 {
                *g = 0.0;
            }
        }
        linear_backward(&cache.x, w1, &dh, dw1, db1)
    })
}

fn key_mask(rows: usize, valid: &[bool], causal: bool) -> Mat {
    let cols = valid.len();
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for (j, &ok) in valid.iter().enumerate() {
            if !ok || (causal && j > i) {
                m.data[i * cols + j] = f64::NEG_INFINITY;
            }
        }
    }
    m
}

struct EncLayerCache {
    attn: AttnCache,
    drop1: Option<Vec<f64>>,
    norm1: NormCache,
    ffn: FfnCache,
    drop2: Option<Vec<f64>>,
    norm2: NormCache,
}

struct DecLayerCache {
    self_attn: AttnCache,
    drop1: Option<Vec<f64>>,
    norm1: NormCache,
    cross: AttnCache,
    drop2: Option<Vec<f64>>,
    norm2: NormCache,
    ffn: FfnCache,
    drop3: Option<Vec<f64>>,
    norm3: NormCache,
}

/// Encoder states for one source sequence, reused across decoding steps.
pub struct EncodedSource {
    states: Mat,
    valid: Vec<bool>,
    ids: Vec<u32>,
    embed_drop: Option<Vec<f64>>,
    layers: Vec<EncLayerCache>,
}

impl EncodedSource {
    pub fn len(&self) -> usize {
        self.states.rows
    }

    pub fn is_empty(&self) -> bool {
        self.states.rows == 0
    }
}

struct Model<'a> {
    params: &'a Parameters,
    config: &'a ModelConfig,
}

impl<'a> Model<'a> {
    fn sublayer_norm(&self, x: &Mat, sub: Mat, norm: &str, mode: &mut Mode<'_>) -> (Mat, Option<Vec<f64>>, NormCache) {
        let mut sub = sub;
        let drop = dropout(&mut sub, self.config.dropout_rate, mode.rng());
        let (y, cache) = layer_norm(
            &x.add(&sub),
            self.params.slice(&format!("{norm}.gain")),
            self.params.slice(&format!("{norm}.bias")),
        );
        (y, drop, cache)
    }

    fn encode(&self, src: &[u32], valid: &[bool], mode: &mut Mode<'_>) -> EncodedSource {
        let d = self.config.d_model;
        let heads = self.config.num_heads;
        let mut x = embed(self.params.slice("src_embed"), src, d);
        let embed_drop = dropout(&mut x, self.config.dropout_rate, mode.rng());
        let mask = key_mask(src.len(), valid, false);
        let mut layers = Vec::with_capacity(self.config.num_layers);
        for i in 0..self.config.num_layers {
            let n = LayerNames::encoder(i);
            let (a, attn) = mha_forward(&x, &x, attn_weights(self.params, &n.name("self_attn")), heads, &mask);
            let (h, drop1, norm1) = self.sublayer_norm(&x, a, &n.name("norm1"), mode);
            let (f, ffn) = ffn_forward(
                &h,
                self.params.slice(&n.name("ffn.w1")),
                self.params.slice(&n.name("ffn.b1")),
                self.params.slice(&n.name("ffn.w2")),
                self.params.slice(&n.name("ffn.b2")),
            );
            let (y, drop2, norm2) = self.sublayer_norm(&h, f, &n.name("norm2"), mode);
            layers.push(EncLayerCache {
                attn,
                drop1,
                norm1,
                ffn,
                drop2,
                norm2,
            });
            x = y;
        }
        EncodedSource {
            states: x,
            valid: valid.to_vec(),
            ids: src.to_vec(),
            embed_drop,
            layers,
        }
    }

    fn decode(&self, enc: &EncodedSource, tgt_in: &[u32], valid: &[bool], mode: &mut Mode<'_>) -> DecodeOutput {
        let d = self.config.d_model;
        let heads = self.config.num_heads;
        let mut x = embed(self.params.slice("tgt_embed"), tgt_in, d);
        let embed_drop = dropout(&mut x, self.config.dropout_rate, mode.rng());
        let self_mask = key_mask(tgt_in.len(), valid, true);
        let cross_mask = key_mask(tgt_in.len(), &enc.valid, false);
        let mut layers = Vec::with_capacity(self.config.num_layers);
        for i in 0..self.config.num_layers {
            let n = LayerNames::decoder(i);
            let (a, self_attn) = mha_forward(
                &x,
                &x,
                attn_weights(self.params, &n.name("self_attn")),
                heads,
                &self_mask,
            );
            let (h1, drop1, norm1) = self.sublayer_norm(&x, a, &n.name("norm1"), mode);
            let (c, cross) = mha_forward(
                &h1,
                &enc.states,
                attn_weights(self.params, &n.name("cross_attn")),
                heads,
                &cross_mask,
            );
            let (h2, drop2, norm2) = self.sublayer_norm(&h1, c, &n.name("norm2"), mode);
            let (f, ffn) = ffn_forward(
                &h2,
                self.params.slice(&n.name("ffn.w1")),
                self.params.slice(&n.name("ffn.b1")),
                self.params.slice(&n.name("ffn.w2")),
                self.params.slice(&n.name("ffn.b2")),
            );
            let (y, drop3, norm3) = self.sublayer_norm(&h2, f, &n.name("norm3"), mode);
            layers.push(DecLayerCache {
                self_attn,
                drop1,
                norm1,
                cross,
                drop2,
                norm2,
                ffn,
                drop3,
                norm3,
            });
            x = y;
        }
        let logits = linear(&x, self.params.slice("output.weight"), self.params.slice("output.bias"));
        DecodeOutput {
            ids: tgt_in.to_vec(),
            embed_drop,
            layers,
            states: x,
            logits,
        }
    }

    fn backward(&self, enc: &EncodedSource, dec: &DecodeOutput, dlogits: &Mat, grads: &mut Parameters) {
        let heads = self.config.num_heads;
        let mut dx = with_grads(
            grads,
            ["output.weight".to_owned(), "output.bias".to_owned()],
            |[dw, db]| linear_backward(&dec.states, self.params.slice("output.weight"), dlogits, dw, db),
        );
        let mut denc = Mat::zeros(enc.states.rows, enc.states.cols);
        for (i, c) in dec.layers.iter().enumerate().rev() {
            let n = LayerNames::decoder(i);
            let ds = norm_backward_into(grads, self.params, &n.name("norm3"), &c.norm3, &dx);
            let df = dropout_backward(&ds, &c.drop3);
            let mut dh2 = ffn_backward_into(grads, self.params, &n.name("ffn"), &c.ffn, &df);
            dh2.add_assign(&ds);
            let ds = norm_backward_into(grads, self.params, &n.name("norm2"), &c.norm2, &dh2);
            let dc = dropout_backward(&ds, &c.drop2);
            let (mut dh1, de) = attn_backward_into(grads, self.params, &n.name("cross_attn"), heads, &c.cross, &dc);
            denc.add_assign(&de);
            dh1.add_assign(&ds);
            let ds = norm_backward_into(grads, self.params, &n.name("norm1"), &c.norm1, &dh1);
            let da = dropout_backward(&ds, &c.drop1);
            let (dq, dkv) = attn_backward_into(grads, self.params, &n.name("self_attn"), heads, &c.self_attn, &da);
            dx = ds;
            dx.add_assign(&dq);
            dx.add_assign(&dkv);
        }
        let dx = dropout_backward(&dx, &dec.embed_drop);
        embed_backward(&dec.ids, &dx, grads.slice_mut("tgt_embed"));

        let mut dx = denc;
        for (i, c) in enc.layers.iter().enumerate().rev() {
            let n = LayerNames::encoder(i);
            let ds = norm_backward_into(grads, self.params, &n.name("norm2"), &c.norm2, &dx);
            let df = dropout_backward(&ds, &c.drop2);
            let mut dh = ffn_backward_into(grads, self.params, &n.name("ffn"), &c.ffn, &df);
            dh.add_assign(&ds);
            let ds = norm_backward_into(grads, self.params, &n.name("norm1"), &c.norm1, &dh);
            let da = dropout_backward(&ds, &c.drop1);
            let (dq, dkv) = attn_backward_into(grads, self.params, &n.name("self_attn"), heads, &c.attn, &da);
            dx = ds;
            dx.add_assign(&dq);
            dx.add_assign(&dkv);
        }
        let dx = dropout_backward(&dx, &enc.embed_drop);
        embed_backward(&enc.ids, &dx, grads.slice_mut("src_embed"));
    }
}

struct DecodeOutput {
    ids: Vec<u32>,
    embed_drop: Option<Vec<f64>>,
    layers: Vec<DecLayerCache>,
    states: Mat,
    logits: Mat,
}

fn log_softmax(row: &[f64]) -> Vec<f64> {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    row.iter().map(|v| v - lse).collect()
}

/// Summed negative log-likelihood of `targets` and, when `scale` is given,
/// the gradient of `scale · nll` with respect to the logits.
fn nll_and_grad(logits: &Mat, targets: &[u32], scale: Option<f64>) -> (f64, Option<Mat>) {
    let mut total = 0.0;
    let mut grad = scale.map(|_| Mat::zeros(logits.rows, logits.cols));
    for (t, &y) in targets.iter().enumerate() {
        let lp = log_softmax(logits.row(t));
        total -= lp[y as usize];
        if let (Some(g), Some(s)) = (grad.as_mut(), scale) {
            for (gv, l) in g.row_mut(t).iter_mut().zip(&lp) {
                *gv = s * l.exp();
            }
            g.row_mut(t)[y as usize] -= s;
        }
    }
    (total, grad)
}

/// Logits `[batch, tgt_time, tgt_vocab]` for a padded batch.
pub fn forward(batch: &Batch, params: &Parameters, config: &ModelConfig, mut mode: Mode<'_>) -> Result<Tensor> {
    batch.validate(config)?;
    params.check_against(config)?;
    let model = Model { params, config };
    let b = batch.len();
    let t = batch.tgt_in_ids.first().map_or(0, Vec::len);
    let v = config.tgt_vocab_size;
    let mut data = Vec::with_capacity(b * t * v);
    for i in 0..b {
        let enc = model.encode(&batch.src_ids[i], &batch.src_mask[i], &mut mode);
        let dec = model.decode(&enc, &batch.tgt_in_ids[i], &batch.tgt_mask[i], &mut mode);
        data.extend(dec.logits.data);
    }
    Tensor::new(vec![b, t, v], data)
}

/// Mean negative log-likelihood over the non-pad positions of
/// `logits: [batch, time, vocab]`.
pub fn loss(logits: &Tensor, tgt_out_ids: &[Vec<u32>], pad_mask: &[Vec<bool>]) -> Result<f64> {
    let [b, t, v] = logits.shape() else {
        return Err(Error::Shape(format!("logits must be rank 3, got {:?}", logits.shape())));
    };
    let (b, t, v) = (*b, *t, *v);
    if tgt_out_ids.len() != b || pad_mask.len() != b {
        return Err(Error::Shape("targets and logits disagree on batch size".into()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..b {
        if tgt_out_ids[i].len() != t || pad_mask[i].len() != t {
            return Err(Error::Shape(format!("row {i}: targets and logits disagree on length")));
        }
        for j in 0..t {
            if !pad_mask[i][j] {
                continue;
            }
            let y = tgt_out_ids[i][j] as usize;
            if y >= v {
                return Err(Error::Input(format!("target id {y} out of range")));
            }
            let off = (i * t + j) * v;
            total -= log_softmax(&logits.data()[off..off + v])[y];
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Input("no unpadded target positions".into()));
    }
    Ok(total / count as f64)
}

/// Loss and parameter gradients for one batch.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub loss: f64,
    pub grads: Parameters,
}

/// Exact gradients of the mean token loss, without dropout.
pub fn backward(batch: &Batch, params: &Parameters, config: &ModelConfig) -> Result<Gradients> {
    backward_with(batch, params, config, Mode::Eval, 1.0)
}

/// Gradients of `loss_scale · loss`. Each row is evaluated at its unpadded
/// length, which leaves every unpadded logit unchanged.
pub fn backward_with(
    batch: &Batch,
    params: &Parameters,
    config: &ModelConfig,
    mut mode: Mode<'_>,
    loss_scale: f64,
) -> Result<Gradients> {
    batch.validate(config)?;
    params.check_against(config)?;
    let tokens = batch.num_tokens();
    if tokens == 0 {
        return Err(Error::Input("no unpadded target positions".into()));
    }
    let model = Model { params, config };
    let mut grads = params.zeros_like();
    let scale = loss_scale / tokens as f64;
    let mut total = 0.0;
    for i in 0..batch.len() {
        let row = batch.row(i);
        let enc = model.encode(row.src, &vec![true; row.src.len()], &mut mode);
        let dec = model.decode(&enc, row.tgt_in, &vec![true; row.tgt_in.len()], &mut mode);
        let (nll, dlogits) = nll_and_grad(&dec.logits, row.tgt_out, Some(scale));
        total += nll;
        model.backward(&enc, &dec, &dlogits.expect("gradient requested"), &mut grads);
    }
    Ok(Gradients {
        loss: total / tokens as f64,
        grads,
    })
}

/// Mean loss of a batch without gradients.
pub fn batch_loss(batch: &Batch, params: &Parameters, config: &ModelConfig) -> Result<f64> {
    batch.validate(config)?;
    let model = Model { params, config };
    let mut total = 0.0;
    for i in 0..batch.len() {
        let row = batch.row(i);
        let enc = model.encode(row.src, &vec![true; row.src.len()], &mut Mode::Eval);
        let dec = model.decode(&enc, row.tgt_in, &vec![true; row.tgt_in.len()], &mut Mode::Eval);
        total += nll_and_grad(&dec.logits, row.tgt_out, None).0;
    }
    Ok(total / batch.num_tokens().max(1) as f64)
}

/// Runs the encoder once over a source sequence.
pub fn encode_source(src: &[u32], params: &Parameters, config: &ModelConfig) -> Result<EncodedSource> {
    if src.len() > config.max_seq_len {
        return Err(Error::Input(format!(
            "source longer than max_seq_len {}",
            config.max_seq_len
        )));
    }
    if let Some(&id) = src.iter().find(|&&id| id as usize >= config.src_vocab_size) {
        return Err(Error::Input(format!("source id {id} out of range")));
    }
    let model = Model { params, config };
    Ok(model.encode(src, &vec![true; src.len()], &mut Mode::Eval))
}

/// Log-probabilities of the next target token after `prefix` (which
/// starts with BOS).
pub fn next_token_log_probs(
    enc: &EncodedSource,
    prefix: &[u32],
    params: &Parameters,
    config: &ModelConfig,
) -> Vec<f64> {
    let model = Model { params, config };
    let dec = model.decode(enc, prefix, &vec![true; prefix.len()], &mut Mode::Eval);
    log_softmax(dec.logits.row(prefix.len() - 1))
}

/// Attention weights of every head in every layer for one example, used
/// to check the softmax invariants: `(encoder self, decoder self, decoder
/// cross)`, each flattened over layers then heads as `[Tq × Tk]` row-major.
pub fn attention_maps(
    src: &[u32],
    src_valid: &[bool],
    tgt_in: &[u32],
    tgt_valid: &[bool],
    params: &Parameters,
    config: &ModelConfig,
) -> (Vec<Tensor>, Vec<Tensor>, Vec<Tensor>) {
    let model = Model { params, config };
    let enc = model.encode(src, src_valid, &mut Mode::Eval);
    let dec = model.decode(&enc, tgt_in, tgt_valid, &mut Mode::Eval);
    let to_tensors = |caches: Vec<&AttnCache>| -> Vec<Tensor> {
        caches
            .into_iter()
            .flat_map(|c| c.probs().iter())
            .map(|m| Tensor::new(vec![m.rows, m.cols], m.data.clone()).expect("consistent shape"))
            .collect()
    };
    (
        to_tensors(enc.layers.iter().map(|l| &l.attn).collect()),
        to_tensors(dec.layers.iter().map(|l| &l.self_attn).collect()),
        to_tensors(dec.layers.iter().map(|l| &l.cross).collect()),
    )
}
