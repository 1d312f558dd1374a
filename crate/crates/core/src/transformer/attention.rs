//! Scaled dot-product attention and its multi-head wrapper.
//!
//! Masks are additive: each entry is added to the raw score before the
//! softmax. An entry of `-inf` removes the key outright, and its weight is
//! exactly zero; a row with every key removed yields all-zero weights and
//! a zero output.

use super::tensor::{linear, linear_backward, Mat, Tensor};
use crate::error::{Error, Result};

/// Softmax of one score row under an additive mask.
fn masked_softmax_row(scores: &[f64], mask: &[f64], out: &mut [f64]) {
    let mut max = f64::NEG_INFINITY;
    for (&s, &m) in scores.iter().zip(mask) {
        if m != f64::NEG_INFINITY {
            max = max.max(s + m);
        }
    }
    if max == f64::NEG_INFINITY {
        out.fill(0.0);
        return;
    }
    let mut sum = 0.0;
    for ((o, &s), &m) in out.iter_mut().zip(scores).zip(mask) {
        *o = if m == f64::NEG_INFINITY {
            0.0
        } else {
            (s + m - max).exp()
        };
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Attention for one head whose query/key/value columns start at `off`
/// and span `dh` columns. Returns the `[Tq × Tk]` weights and writes the
/// head output into the same columns of `out`.
fn head_forward(q: &Mat, k: &Mat, v: &Mat, off: usize, dh: usize, mask: &Mat, out: &mut Mat) -> Mat {
    let scale = 1.0 / (dh as f64).sqrt();
    let (tq, tk) = (q.rows, k.rows);
    let mut probs = Mat::zeros(tq, tk);
    let mut scores = vec![0.0; tk];
    for i in 0..tq {
        let qi = &q.row(i)[off..off + dh];
        for (j, s) in scores.iter_mut().enumerate() {
            let kj = &k.row(j)[off..off + dh];
            *s = qi.iter().zip(kj).map(|(a, b)| a * b).sum::<f64>() * scale;
        }
        masked_softmax_row(&scores, mask.row(i), probs.row_mut(i));
        let oi = &mut out.row_mut(i)[off..off + dh];
        for (j, &p) in probs.row(i).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let vj = &v.row(j)[off..off + dh];
            for (o, &x) in oi.iter_mut().zip(vj) {
                *o += p * x;
            }
        }
    }
    probs
}

/// Backward of [`head_forward`]; accumulates into the head's columns of
/// `dq`, `dk`, `dv`.
#[allow(clippy::too_many_arguments)]
fn head_backward(
    q: &Mat,
    k: &Mat,
    v: &Mat,
    probs: &Mat,
    dout: &Mat,
    off: usize,
    dh: usize,
    dq: &mut Mat,
    dk: &mut Mat,
    dv: &mut Mat,
) {
    let scale = 1.0 / (dh as f64).sqrt();
    let (tq, tk) = (q.rows, k.rows);
    let mut dp = vec![0.0; tk];
    for i in 0..tq {
        let p = probs.row(i);
        let g = &dout.row(i)[off..off + dh];
        let mut dot = 0.0;
        for j in 0..tk {
            if p[j] == 0.0 {
                dp[j] = 0.0;
                continue;
            }
            let vj = &v.row(j)[off..off + dh];
            dp[j] = g.iter().zip(vj).map(|(a, b)| a * b).sum();
            dot += dp[j] * p[j];
            let dvj = &mut dv.row_mut(j)[off..off + dh];
            for (d, &x) in dvj.iter_mut().zip(g) {
                *d += p[j] * x;
            }
        }
        for j in 0..tk {
            if p[j] == 0.0 {
                continue;
            }
            let ds = p[j] * (dp[j] - dot) * scale;
            let kj = &k.row(j)[off..off + dh];
            let dqi = &mut dq.row_mut(i)[off..off + dh];
            for (d, &x) in dqi.iter_mut().zip(kj) {
                *d += ds * x;
            }
            let qi = &q.row(i)[off..off + dh];
            let dkj = &mut dk.row_mut(j)[off..off + dh];
            for (d, &x) in dkj.iter_mut().zip(qi) {
                *d += ds * x;
            }
        }
    }
}

/// Borrowed projection weights of one attention block.
#[derive(Clone, Copy)]
pub(crate) struct AttnWeights<'a> {
    pub wq: &'a [f64],
    pub wk: &'a [f64],
    pub wv: &'a [f64],
    pub wo: &'a [f64],
    pub bq: &'a [f64],
    pub bk: &'a [f64],
    pub bv: &'a [f64],
    pub bo: &'a [f64],
}

pub(crate) struct AttnGrads<'a> {
    pub wq: &'a mut [f64],
    pub wk: &'a mut [f64],
    pub wv: &'a mut [f64],
    pub wo: &'a mut [f64],
    pub bq: &'a mut [f64],
    pub bk: &'a mut [f64],
    pub bv: &'a mut [f64],
    pub bo: &'a mut [f64],
}

pub(crate) struct AttnCache {
    xq: Mat,
    xkv: Mat,
    q: Mat,
    k: Mat,
    v: Mat,
    probs: Vec<Mat>,
    concat: Mat,
}

impl AttnCache {
    pub fn probs(&self) -> &[Mat] {
        &self.probs
    }
}

pub(crate) fn mha_forward(xq: &Mat, xkv: &Mat, w: AttnWeights<'_>, heads: usize, mask: &Mat) -> (Mat, AttnCache) {
    let d = w.bq.len();
    let dh = d / heads;
    let q = linear(xq, w.wq, w.bq);
    let k = linear(xkv, w.wk, w.bk);
    let v = linear(xkv, w.wv, w.bv);
    let mut concat = Mat::zeros(xq.rows, d);
    let probs = (0..heads)
        .map(|h| head_forward(&q, &k, &v, h * dh, dh, mask, &mut concat))
        .collect();
    let out = linear(&concat, w.wo, w.bo);
    let cache = AttnCache {
        xq: xq.clone(),
        xkv: xkv.clone(),
        q,
        k,
        v,
        probs,
        concat,
    };
    (out, cache)
}

/// Returns the gradients with respect to the query input and the
/// key/value input.
pub(crate) fn mha_backward(
    cache: &AttnCache,
    w: AttnWeights<'_>,
    heads: usize,
    dy: &Mat,
    g: AttnGrads<'_>,
) -> (Mat, Mat) {
    let d = w.bq.len();
    let dh = d / heads;
    let dconcat = linear_backward(&cache.concat, w.wo, dy, g.wo, g.bo);
    let mut dq = Mat::zeros(cache.q.rows, d);
    let mut dk = Mat::zeros(cache.k.rows, d);
    let mut dv = Mat::zeros(cache.v.rows, d);
    for (h, probs) in cache.probs.iter().enumerate() {
        head_backward(
            &cache.q,
            &cache.k,
            &cache.v,
            probs,
            &dconcat,
            h * dh,
            dh,
            &mut dq,
            &mut dk,
            &mut dv,
        );
    }
    let dxq = linear_backward(&cache.xq, w.wq, &dq, g.wq, g.bq);
    let mut dxkv = linear_backward(&cache.xkv, w.wk, &dk, g.wk, g.bk);
    dxkv.add_assign(&linear_backward(&cache.xkv, w.wv, &dv, g.wv, g.bv));
    (dxq, dxkv)
}

fn split_leading(t: &Tensor, what: &str) -> Result<(usize, usize, usize)> {
    if t.rank() < 2 {
        return Err(Error::Shape(format!("{what} must have rank ≥ 2, got {:?}", t.shape())));
    }
    let r = t.rank();
    let batch = t.shape()[..r - 2].iter().product();
    Ok((batch, t.shape()[r - 2], t.shape()[r - 1]))
}

fn check_qkv(q: &Tensor, k: &Tensor, v: Option<&Tensor>, mask: &Tensor) -> Result<(usize, usize, usize, bool)> {
    let (bq, tq, dq) = split_leading(q, "Q")?;
    let (_, tk, dk) = split_leading(k, "K")?;
    let lead = &q.shape()[..q.rank() - 2];
    if &k.shape()[..k.rank() - 2] != lead {
        return Err(Error::Shape(format!(
            "Q {:?} and K {:?} disagree on batch dims",
            q.shape(),
            k.shape()
        )));
    }
    if dq != dk {
        return Err(Error::Shape(format!("Q key dim {dq} ≠ K key dim {dk}")));
    }
    if let Some(v) = v {
        let (_, tv, _) = split_leading(v, "V")?;
        if &v.shape()[..v.rank() - 2] != lead || tv != tk {
            return Err(Error::Shape(format!(
                "V {:?} does not match K {:?}",
                v.shape(),
                k.shape()
            )));
        }
    }
    let per_batch = if mask.shape() == [tq, tk] {
        false
    } else {
        let mut full = lead.to_vec();
        full.extend([tq, tk]);
        if mask.shape() != full.as_slice() {
            return Err(Error::Shape(format!(
                "mask {:?} broadcasts to neither [{tq}, {tk}] nor {full:?}",
                mask.shape()
            )));
        }
        true
    };
    Ok((bq, tq, tk, per_batch))
}

fn batch_mat(t: &Tensor, b: usize) -> Mat {
    let r = t.rank();
    let (rows, cols) = (t.shape()[r - 2], t.shape()[r - 1]);
    let n = rows * cols;
    Mat::from_vec(rows, cols, t.data()[b * n..(b + 1) * n].to_vec())
}

/// Attention weights `softmax(QKᵀ/√d_k + mask)` for tensors shaped
/// `[..., T, d]`; the mask is `[Tq, Tk]` or carries the same leading dims.
pub fn attention_weights(q: &Tensor, k: &Tensor, mask: &Tensor) -> Result<Tensor> {
    let (batch, tq, tk, per_batch) = check_qkv(q, k, None, mask)?;
    let dk = q.shape()[q.rank() - 1];
    let mut data = Vec::with_capacity(batch * tq * tk);
    for b in 0..batch {
        let qm = batch_mat(q, b);
        let km = batch_mat(k, b);
        let mm = batch_mat(mask, if per_batch { b } else { 0 });
        let vm = Mat::zeros(tk, dk);
        let mut sink = Mat::zeros(tq, dk);
        data.extend(head_forward(&qm, &km, &vm, 0, dk, &mm, &mut sink).data);
    }
    let mut shape = q.shape()[..q.rank() - 1].to_vec();
    shape.push(tk);
    Tensor::new(shape, data)
}

/// `softmax(QKᵀ/√d_k + mask) · V` for tensors shaped `[..., T, d]`.
pub fn scaled_dot_attention(q: &Tensor, k: &Tensor, v: &Tensor, mask: &Tensor) -> Result<Tensor> {
    let (batch, tq, _, per_batch) = check_qkv(q, k, Some(v), mask)?;
    let dk = q.shape()[q.rank() - 1];
    let dv = v.shape()[v.rank() - 1];
    let mut data = Vec::with_capacity(batch * tq * dv);
    for b in 0..batch {
        let qm = batch_mat(q, b);
        let km = batch_mat(k, b);
        let vm = batch_mat(v, b);
        let mm = batch_mat(mask, if per_batch { b } else { 0 });
        let mut out = Mat::zeros(tq, dv);
        if dk == dv {
            head_forward(&qm, &km, &vm, 0, dk, &mm, &mut out);
        } else {
            // key and value widths differ: compute weights, then mix V rows
            let mut sink = Mat::zeros(tq, dk);
            let probs = head_forward(&qm, &km, &Mat::zeros(km.rows, dk), 0, dk, &mm, &mut sink);
            for i in 0..tq {
                for (j, &p) in probs.row(i).iter().enumerate() {
                    for (o, &x) in out.row_mut(i).iter_mut().zip(vm.row(j)) {
                        *o += p * x;
                    }
                }
            }
        }
        data.extend(out.data);
    }
    let mut shape = q.shape()[..q.rank() - 1].to_vec();
    shape.push(dv);
    Tensor::new(shape, data)
}

/// Owned projection weights for [`multi_head_attention`].
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    pub wq: Tensor,
    pub wk: Tensor,
    pub wv: Tensor,
    pub wo: Tensor,
    pub bq: Tensor,
    pub bk: Tensor,
    pub bv: Tensor,
    pub bo: Tensor,
}

impl AttentionParams {
    /// Copies the block at `prefix` (e.g. `encoder.layer0.self_attn`).
    pub fn from_parameters(params: &super::Parameters, prefix: &str) -> Result<Self> {
        let get = |n: &str| {
            params
                .get(&format!("{prefix}.{n}"))
                .cloned()
                .ok_or_else(|| Error::Shape(format!("no attention parameter {prefix}.{n}")))
        };
        Ok(AttentionParams {
            wq: get("wq")?,
            wk: get("wk")?,
            wv: get("wv")?,
            wo: get("wo")?,
            bq: get("bq")?,
            bk: get("bk")?,
            bv: get("bv")?,
            bo: get("bo")?,
        })
    }

    fn weights(&self) -> AttnWeights<'_> {
        AttnWeights {
            wq: self.wq.data(),
            wk: self.wk.data(),
            wv: self.wv.data(),
            wo: self.wo.data(),
            bq: self.bq.data(),
            bk: self.bk.data(),
            bv: self.bv.data(),
            bo: self.bo.data(),
        }
    }

    fn d_model(&self) -> Result<usize> {
        let d = self.bq.len();
        for (name, t, want) in [
            ("wq", &self.wq, vec![d, d]),
            ("wk", &self.wk, vec![d, d]),
            ("wv", &self.wv, vec![d, d]),
            ("wo", &self.wo, vec![d, d]),
            ("bk", &self.bk, vec![d]),
            ("bv", &self.bv, vec![d]),
            ("bo", &self.bo, vec![d]),
        ] {
            if t.shape() != want.as_slice() {
                return Err(Error::Shape(format!(
                    "{name} has shape {:?}, expected {want:?}",
                    t.shape()
                )));
            }
        }
        Ok(d)
    }
}

/// Multi-head attention of `x_q: [Tq, d]` over `x_kv: [Tk, d]` with an
/// additive `[Tq, Tk]` mask. Self-attention is the `x_q == x_kv` case.
pub fn multi_head_attention(
    x_q: &Tensor,
    x_kv: &Tensor,
    params: &AttentionParams,
    num_heads: usize,
    mask: &Tensor,
) -> Result<Tensor> {
    let d = params.d_model()?;
    if num_heads == 0 || d % num_heads != 0 {
        return Err(Error::Shape(format!("d_model {d} not divisible by {num_heads} heads")));
    }
    if x_q.rank() != 2 || x_kv.rank() != 2 || x_q.shape()[1] != d || x_kv.shape()[1] != d {
        return Err(Error::Shape(format!(
            "inputs {:?} / {:?} must be [T, {d}]",
            x_q.shape(),
            x_kv.shape()
        )));
    }
    let (tq, tk) = (x_q.shape()[0], x_kv.shape()[0]);
    if mask.shape() != [tq, tk] {
        return Err(Error::Shape(format!("mask {:?} must be [{tq}, {tk}]", mask.shape())));
    }
    let xq = Mat::from_vec(tq, d, x_q.data().to_vec());
    let xkv = Mat::from_vec(tk, d, x_kv.data().to_vec());
    let m = Mat::from_vec(tq, tk, mask.data().to_vec());
    let (out, _) = mha_forward(&xq, &xkv, params.weights(), num_heads, &m);
    Tensor::new(vec![tq, d], out.data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor {
        let n = shape.iter().product();
        Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    /// Naive per-row softmax-weighted sum, written independently of the
    /// implementation above.
    fn naive_attention(q: &[Vec<f64>], k: &[Vec<f64>], v: &[Vec<f64>], mask: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let dk = q[0].len() as f64;
        q.iter()
            .enumerate()
            .map(|(i, qi)| {
                let s: Vec<f64> = k
                    .iter()
                    .enumerate()
                    .map(|(j, kj)| qi.iter().zip(kj).map(|(a, b)| a * b).sum::<f64>() / dk.sqrt() + mask[i][j])
                    .collect();
                let z: f64 = s.iter().map(|x| x.exp()).sum();
                let mut out = vec![0.0; v[0].len()];
                for (j, vj) in v.iter().enumerate() {
                    for (o, x) in out.iter_mut().zip(vj) {
                        *o += s[j].exp() / z * x;
                    }
                }
                out
            })
            .collect()
    }

    fn rows(t: &Tensor, b: usize) -> Vec<Vec<f64>> {
        let r = t.rank();
        let (n, c) = (t.shape()[r - 2], t.shape()[r - 1]);
        (0..n)
            .map(|i| t.data()[b * n * c + i * c..b * n * c + (i + 1) * c].to_vec())
            .collect()
    }

    #[test]
    fn matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random(&mut rng, vec![2, 3, 4]);
        let k = random(&mut rng, vec![2, 3, 4]);
        let v = random(&mut rng, vec![2, 3, 4]);
        let mask = Tensor::new(vec![3, 3], vec![0.0, -0.5, 0.0, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0]).unwrap();
        let out = scaled_dot_attention(&q, &k, &v, &mask).unwrap();
        assert_eq!(out.shape(), [2, 3, 4]);
        for b in 0..2 {
            let expected = naive_attention(&rows(&q, b), &rows(&k, b), &rows(&v, b), &rows(&mask, 0));
            for (got, want) in rows(&out, b).iter().zip(&expected) {
                for (g, w) in got.iter().zip(want) {
                    assert!((g - w).abs() < 1e-12, "{g} vs {w}");
                }
            }
        }
    }

    #[test]
    fn single_visible_key_returns_its_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = random(&mut rng, vec![2, 4]);
        let k = random(&mut rng, vec![3, 4]);
        let v = random(&mut rng, vec![3, 5]);
        let inf = f64::NEG_INFINITY;
        let mask = Tensor::new(vec![2, 3], vec![inf, 0.0, inf, inf, inf, 0.0]).unwrap();
        let out = scaled_dot_attention(&q, &k, &v, &mask).unwrap();
        assert_eq!(rows(&out, 0)[0], rows(&v, 0)[1]);
        assert_eq!(rows(&out, 0)[1], rows(&v, 0)[2]);
        let w = attention_weights(&q, &k, &mask).unwrap();
        assert_eq!(w.data(), [0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn saturated_scores_pick_matching_row() {
        let q = Tensor::new(vec![1, 2], vec![100.0, 0.0]).unwrap();
        let k = Tensor::new(vec![2, 2], vec![100.0, 0.0, 0.0, 100.0]).unwrap();
        let v = Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = scaled_dot_attention(&q, &k, &v, &Tensor::zeros(vec![1, 2])).unwrap();
        assert!((out.data()[0] - 1.0).abs() < 1e-12);
        assert!((out.data()[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fully_masked_row_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q = random(&mut rng, vec![1, 4]);
        let k = random(&mut rng, vec![2, 4]);
        let v = random(&mut rng, vec![2, 4]);
        let mask = Tensor::filled(vec![1, 2], f64::NEG_INFINITY);
        let out = scaled_dot_attention(&q, &k, &v, &mask).unwrap();
        assert!(out.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn shape_errors() {
        let a = Tensor::zeros(vec![2, 3, 4]);
        let b = Tensor::zeros(vec![2, 3, 5]);
        let m = Tensor::zeros(vec![3, 3]);
        assert!(matches!(scaled_dot_attention(&a, &b, &a, &m), Err(Error::Shape(_))));
        assert!(matches!(
            scaled_dot_attention(&a, &a, &a, &Tensor::zeros(vec![2, 2])),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            scaled_dot_attention(&a, &a, &Tensor::zeros(vec![2, 2, 4]), &m),
            Err(Error::Shape(_))
        ));
        assert!(scaled_dot_attention(&a, &a, &b, &m).is_ok());
    }

    fn identity(d: usize) -> Tensor {
        let mut t = Tensor::zeros(vec![d, d]);
        for i in 0..d {
            t.data_mut()[i * d + i] = 1.0;
        }
        t
    }

    fn random_params(rng: &mut ChaCha8Rng, d: usize) -> AttentionParams {
        AttentionParams {
            wq: random(rng, vec![d, d]),
            wk: random(rng, vec![d, d]),
            wv: random(rng, vec![d, d]),
            wo: random(rng, vec![d, d]),
            bq: random(rng, vec![d]),
            bk: random(rng, vec![d]),
            bv: random(rng, vec![d]),
            bo: random(rng, vec![d]),
        }
    }

    #[test]
    fn one_head_identity_projections_equal_plain_attention() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = 4;
        let params = AttentionParams {
            wq: identity(d),
            wk: identity(d),
            wv: identity(d),
            wo: identity(d),
            bq: Tensor::zeros(vec![d]),
            bk: Tensor::zeros(vec![d]),
            bv: Tensor::zeros(vec![d]),
            bo: Tensor::zeros(vec![d]),
        };
        let x = random(&mut rng, vec![3, d]);
        let mask = Tensor::zeros(vec![3, 3]);
        let mha = multi_head_attention(&x, &x, &params, 1, &mask).unwrap();
        let plain = scaled_dot_attention(&x, &x, &x, &mask).unwrap();
        for (a, b) in mha.data().iter().zip(plain.data()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    fn project(x: &[Vec<f64>], w: &Tensor, b: &Tensor, cols: std::ops::Range<usize>) -> Vec<Vec<f64>> {
        let d = b.len();
        x.iter()
            .map(|row| {
                cols.clone()
                    .map(|j| {
                        row.iter()
                            .enumerate()
                            .map(|(i, xi)| xi * w.data()[i * d + j])
                            .sum::<f64>()
                            + b.data()[j]
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn two_heads_equal_concatenated_single_heads() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = 6;
        let params = random_params(&mut rng, d);
        let xq = random(&mut rng, vec![3, d]);
        let xkv = random(&mut rng, vec![4, d]);
        let inf = f64::NEG_INFINITY;
        let mask = Tensor::new(
            vec![3, 4],
            vec![0.0, 0.0, 0.0, inf, 0.0, inf, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        let got = multi_head_attention(&xq, &xkv, &params, 2, &mask).unwrap();

        let xq_rows = rows(&xq, 0);
        let xkv_rows = rows(&xkv, 0);
        let mask_rows = rows(&mask, 0);
        let mut concat = vec![Vec::new(); 3];
        for h in 0..2 {
            let cols = h * 3..(h + 1) * 3;
            let q = project(&xq_rows, &params.wq, &params.bq, cols.clone());
            let k = project(&xkv_rows, &params.wk, &params.bk, cols.clone());
            let v = project(&xkv_rows, &params.wv, &params.bv, cols);
            for (c, o) in concat.iter_mut().zip(naive_attention(&q, &k, &v, &mask_rows)) {
                c.extend(o);
            }
        }
        let expected = project(&concat, &params.wo, &params.bo, 0..d);
        for (g, w) in rows(&got, 0).iter().flatten().zip(expected.iter().flatten()) {
            assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        }
        assert_eq!(got.shape(), xq.shape());
    }

    #[test]
    fn mha_rejects_bad_heads() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = random_params(&mut rng, 6);
        let x = random(&mut rng, vec![2, 6]);
        assert!(multi_head_attention(&x, &x, &params, 4, &Tensor::zeros(vec![2, 2])).is_err());
        assert!(multi_head_attention(&x, &x, &params, 2, &Tensor::zeros(vec![2, 3])).is_err());
    }
}
