//! Character-level bidirectional LSTM encoder `φ`, bilinear scorer
//! `φ(p)ᵀ W φ(s)`, value head, and the losses that train them.
//!
//! The encoder embeds bytes, runs stacked bidirectional layers, joins the
//! final hidden state of each top-layer direction, and passes the result
//! through a two-layer tanh MLP of the same width.

use std::collections::HashMap;

use ndarray::{concatenate, s, Array1, Array2, Array3, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lstm::{dir_backward, dir_forward, DirCache, LstmDir};
use super::{real, sigmoid, NnError, Real};
use crate::search::{log_softmax, Policy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScorerConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub layers: usize,
    pub init_seed: u64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            vocab_size: 256,
            embed_dim: 64,
            hidden_dim: 256,
            layers: 2,
            init_seed: 0,
        }
    }
}

impl ScorerConfig {
    /// Width of `φ(s)`.
    pub fn output_dim(&self) -> usize {
        2 * self.hidden_dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    /// `[vocab, embed]`.
    pub embed: Array2<T>,
    /// Forward then backward direction of each layer, bottom first.
    pub lstm: Vec<LstmDir<T>>,
    pub w1: Array2<T>,
    pub b1: Array2<T>,
    pub w2: Array2<T>,
    pub b2: Array2<T>,
    /// `W` in `φ(p)ᵀ W φ(s)`.
    pub bilinear: Array2<T>,
    pub value_w: Array2<T>,
    pub value_b: Array2<T>,
}

impl<T: Real> Params<T> {
    pub fn zeros(c: &ScorerConfig) -> Self {
        let d = c.output_dim();
        let mut lstm = Vec::new();
        for layer in 0..c.layers {
            let input = if layer == 0 { c.embed_dim } else { d };
            lstm.push(LstmDir::zeros(input, c.hidden_dim));
            lstm.push(LstmDir::zeros(input, c.hidden_dim));
        }
        Params {
            embed: Array2::zeros((c.vocab_size, c.embed_dim)),
            lstm,
            w1: Array2::zeros((d, d)),
            b1: Array2::zeros((1, d)),
            w2: Array2::zeros((d, d)),
            b2: Array2::zeros((1, d)),
            bilinear: Array2::zeros((d, d)),
            value_w: Array2::zeros((d, 1)),
            value_b: Array2::zeros((1, 1)),
        }
    }

    pub fn init(c: &ScorerConfig) -> Self {
        let mut p = Self::zeros(c);
        let mut rng = ChaCha8Rng::seed_from_u64(c.init_seed);
        let mut fill = |a: &mut Array2<T>, bound: f64| {
            a.mapv_inplace(|_| real(rng.random_range(-bound..=bound)));
        };
        fill(&mut p.embed, 3f64.sqrt());
        let hb = 1.0 / (c.hidden_dim as f64).sqrt();
        for dir in &mut p.lstm {
            fill(&mut dir.wih, hb);
            fill(&mut dir.whh, hb);
            fill(&mut dir.b, hb);
            let h = c.hidden_dim;
            dir.b.slice_mut(s![.., h..2 * h]).fill(T::one());
        }
        let db = 1.0 / (c.output_dim() as f64).sqrt();
        fill(&mut p.w1, db);
        fill(&mut p.b1, db);
        fill(&mut p.w2, db);
        fill(&mut p.b2, db);
        fill(&mut p.bilinear, db);
        fill(&mut p.value_w, db);
        p
    }

    pub fn names(&self) -> Vec<String> {
        let mut n = vec!["embed".to_string()];
        for (i, _) in self.lstm.iter().enumerate() {
            let dir = if i % 2 == 0 { "fwd" } else { "bwd" };
            for w in ["wih", "whh", "b"] {
                n.push(format!("lstm.{}.{dir}.{w}", i / 2));
            }
        }
        for w in ["head.w1", "head.b1", "head.w2", "head.b2", "bilinear", "value.w", "value.b"] {
            n.push(w.to_string());
        }
        n
    }

    pub fn tensors(&self) -> Vec<&Array2<T>> {
        let mut t = vec![&self.embed];
        for d in &self.lstm {
            t.extend([&d.wih, &d.whh, &d.b]);
        }
        t.extend([
            &self.w1,
            &self.b1,
            &self.w2,
            &self.b2,
            &self.bilinear,
            &self.value_w,
            &self.value_b,
        ]);
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<T>> {
        let mut t = vec![&mut self.embed];
        for d in &mut self.lstm {
            t.extend([&mut d.wih, &mut d.whh, &mut d.b]);
        }
        t.extend([
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.bilinear,
            &mut self.value_w,
            &mut self.value_b,
        ]);
        t
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn scale(&mut self, k: T) {
        for t in self.tensors_mut() {
            t.mapv_inplace(|v| v * k);
        }
    }

    /// Converts between float widths.
    pub fn cast<U: Real>(&self) -> Params<U> {
        let c = |a: &Array2<T>| a.mapv(|v| U::from_f64(v.to_f64().unwrap_or(0.0)).unwrap_or(U::zero()));
        Params {
            embed: c(&self.embed),
            lstm: self
                .lstm
                .iter()
                .map(|d| LstmDir {
                    wih: c(&d.wih),
                    whh: c(&d.whh),
                    b: c(&d.b),
                })
                .collect(),
            w1: c(&self.w1),
            b1: c(&self.b1),
            w2: c(&self.w2),
            b2: c(&self.b2),
            bilinear: c(&self.bilinear),
            value_w: c(&self.value_w),
            value_b: c(&self.value_b),
        }
    }
}

/// One InfoNCE term: `positive` is the state that followed `anchor` on a
/// solution path, `negatives` are other states seen at the same step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContrastiveExample {
    pub anchor: String,
    pub positive: String,
    pub negatives: Vec<String>,
}

struct EncodeCache<T> {
    bytes: Vec<Vec<u8>>,
    lens: Vec<usize>,
    dirs: Vec<DirCache<T>>,
    joined: Array2<T>,
    z1: Array2<T>,
}

#[derive(Debug, Clone)]
pub struct Scorer<T> {
    pub config: ScorerConfig,
    pub params: Params<T>,
}

/// Maps each distinct string to a row.
fn dedup<'a>(items: impl IntoIterator<Item = &'a str>) -> (Vec<&'a str>, HashMap<&'a str, usize>) {
    let mut rows = Vec::new();
    let mut index = HashMap::new();
    for s in items {
        index.entry(s).or_insert_with(|| {
            rows.push(s);
            rows.len() - 1
        });
    }
    (rows, index)
}

const INFERENCE_CHUNK: usize = 256;

impl<T: Real> Scorer<T> {
    pub fn new(config: ScorerConfig) -> Self {
        let params = Params::init(&config);
        Scorer { config, params }
    }

    fn forward(&self, states: &[&str]) -> Result<(Array2<T>, EncodeCache<T>), NnError> {
        let p = &self.params;
        let mut bytes = Vec::with_capacity(states.len());
        for s in states {
            if s.is_empty() {
                return Err(NnError::EmptyState);
            }
            if let Some(pos) = s.bytes().position(|b| b as usize >= self.config.vocab_size) {
                return Err(NnError::UnknownCharacter {
                    state: s.to_string(),
                    pos,
                    byte: s.as_bytes()[pos],
                });
            }
            bytes.push(s.as_bytes().to_vec());
        }
        let lens: Vec<usize> = bytes.iter().map(Vec::len).collect();
        let t_max = lens.iter().copied().max().unwrap_or(0);
        let batch = states.len();
        let mut x = Array3::<T>::zeros((t_max, batch, self.config.embed_dim));
        for (b, seq) in bytes.iter().enumerate() {
            for (t, &ch) in seq.iter().enumerate() {
                x.slice_mut(s![t, b, ..]).assign(&p.embed.row(ch as usize));
            }
        }
        let mut dirs = Vec::with_capacity(p.lstm.len());
        let mut finals = (Array2::zeros((0, 0)), Array2::zeros((0, 0)));
        for layer in 0..self.config.layers {
            let (out_f, hf, cf) = dir_forward(&p.lstm[2 * layer], &x, &lens, false);
            let (out_b, hb, cb) = dir_forward(&p.lstm[2 * layer + 1], &x, &lens, true);
            dirs.push(cf);
            dirs.push(cb);
            x = concatenate(Axis(2), &[out_f.view(), out_b.view()]).expect("same shape");
            finals = (hf, hb);
        }
        let joined = concatenate(Axis(1), &[finals.0.view(), finals.1.view()]).expect("same rows");
        let z1 = (joined.dot(&p.w1) + &p.b1).mapv(|v| v.tanh());
        let phi = z1.dot(&p.w2) + &p.b2;
        Ok((
            phi,
            EncodeCache {
                bytes,
                lens,
                dirs,
                joined,
                z1,
            },
        ))
    }

    fn backward(&self, cache: &EncodeCache<T>, d_phi: &Array2<T>, g: &mut Params<T>) {
        let p = &self.params;
        let one = T::one();
        let h = self.config.hidden_dim;
        g.w2 += &cache.z1.t().dot(d_phi);
        g.b2 += &d_phi.sum_axis(Axis(0)).insert_axis(Axis(0));
        let da1 = d_phi.dot(&p.w2.t()) * cache.z1.mapv(|v| one - v * v);
        g.w1 += &cache.joined.t().dot(&da1);
        g.b1 += &da1.sum_axis(Axis(0)).insert_axis(Axis(0));
        let d_joined = da1.dot(&p.w1.t());

        let batch = cache.lens.len();
        let mut d_final_f = d_joined.slice(s![.., 0..h]).to_owned();
        let mut d_final_b = d_joined.slice(s![.., h..2 * h]).to_owned();
        let mut d_out: Option<Array3<T>> = None;
        for layer in (0..self.config.layers).rev() {
            let (df, db) = match &d_out {
                Some(d) => (
                    Some(d.slice(s![.., .., 0..h]).to_owned()),
                    Some(d.slice(s![.., .., h..2 * h]).to_owned()),
                ),
                None => (None, None),
            };
            let (gf, gb) = {
                let (lo, hi) = g.lstm.split_at_mut(2 * layer + 1);
                (&mut lo[2 * layer], &mut hi[0])
            };
            let dx_f = dir_backward(
                &p.lstm[2 * layer],
                &cache.dirs[2 * layer],
                &cache.lens,
                df.as_ref(),
                &d_final_f,
                gf,
            );
            let dx_b = dir_backward(
                &p.lstm[2 * layer + 1],
                &cache.dirs[2 * layer + 1],
                &cache.lens,
                db.as_ref(),
                &d_final_b,
                gb,
            );
            d_out = Some(dx_f + dx_b);
            d_final_f = Array2::zeros((batch, h));
            d_final_b = Array2::zeros((batch, h));
        }
        let dx = d_out.expect("at least one layer");
        for (b, seq) in cache.bytes.iter().enumerate() {
            for (t, &ch) in seq.iter().enumerate() {
                let mut row = g.embed.row_mut(ch as usize);
                row += &dx.slice(s![t, b, ..]);
            }
        }
    }

    /// `φ(s)` for every state, one row each.
    pub fn encode(&self, states: &[&str]) -> Result<Array2<T>, NnError> {
        let d = self.config.output_dim();
        let mut out = Array2::zeros((states.len(), d));
        for (i, chunk) in states.chunks(INFERENCE_CHUNK).enumerate() {
            let (phi, _) = self.forward(chunk)?;
            out.slice_mut(s![i * INFERENCE_CHUNK..i * INFERENCE_CHUNK + chunk.len(), ..])
                .assign(&phi);
        }
        Ok(out)
    }

    fn logits(&self, phi_state: ArrayView1<T>, phi_cands: &[ArrayView1<T>]) -> Vec<T> {
        let wa = self.params.bilinear.dot(&phi_state);
        phi_cands.iter().map(|c| c.dot(&wa)).collect()
    }

    /// Softmax over `φ(cᵢ)ᵀ W φ(state)`.
    pub fn policy_probs(&self, state: &str, candidates: &[&str]) -> Result<Vec<f64>, NnError> {
        let mut all = vec![state];
        all.extend_from_slice(candidates);
        let (rows, index) = dedup(all.iter().copied());
        let phi = self.encode(&rows)?;
        let cands: Vec<_> = candidates.iter().map(|c| phi.row(index[c])).collect();
        let logits: Vec<f64> = self
            .logits(phi.row(index[state]), &cands)
            .into_iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect();
        Ok(log_softmax(&logits).into_iter().map(f64::exp).collect())
    }

    /// Estimated probability of eventually solving each state.
    pub fn value(&self, states: &[&str]) -> Result<Vec<f64>, NnError> {
        let phi = self.encode(states)?;
        let z = phi.dot(&self.params.value_w) + &self.params.value_b;
        Ok(z.column(0).iter().map(|&v| sigmoid(v).to_f64().unwrap_or(f64::NAN)).collect())
    }

    /// Mean InfoNCE loss over `examples` and its gradient. Examples without
    /// negatives contribute zero.
    pub fn infonce_loss_grad(
        &self,
        examples: &[ContrastiveExample],
    ) -> Result<(f64, Params<T>), NnError> {
        let mut grads = Params::zeros(&self.config);
        if examples.is_empty() {
            return Ok((0.0, grads));
        }
        let (rows, index) = dedup(examples.iter().flat_map(|e| {
            std::iter::once(e.anchor.as_str())
                .chain(std::iter::once(e.positive.as_str()))
                .chain(e.negatives.iter().map(String::as_str))
        }));
        let (phi, cache) = self.forward(&rows)?;
        let mut d_phi = Array2::<T>::zeros(phi.raw_dim());
        let n = real::<T>(examples.len() as f64);
        let mut total = 0.0;
        let w = &self.params.bilinear;
        for e in examples {
            if e.negatives.is_empty() {
                continue;
            }
            let a = index[e.anchor.as_str()];
            let cand_rows: Vec<usize> = std::iter::once(index[e.positive.as_str()])
                .chain(e.negatives.iter().map(|s| index[s.as_str()]))
                .collect();
            let phi_a = phi.row(a);
            let wa = w.dot(&phi_a);
            let logits: Vec<T> = cand_rows.iter().map(|&r| phi.row(r).dot(&wa)).collect();
            let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
            let exps: Vec<T> = logits.iter().map(|&l| (l - max).exp()).collect();
            let z = exps.iter().copied().fold(T::zero(), |x, y| x + y);
            total += (z.ln() + max - logits[0]).to_f64().unwrap_or(f64::NAN);
            let mut dwa = Array1::<T>::zeros(wa.len());
            for (j, &r) in cand_rows.iter().enumerate() {
                let mut dl = exps[j] / z;
                if j == 0 {
                    dl = dl - T::one();
                }
                let dl = dl / n;
                d_phi.row_mut(r).scaled_add(dl, &wa);
                dwa.scaled_add(dl, &phi.row(r));
            }
            let outer = dwa
                .view()
                .insert_axis(Axis(1))
                .dot(&phi_a.insert_axis(Axis(0)));
            grads.bilinear += &outer;
            let back = w.t().dot(&dwa);
            d_phi.row_mut(a).scaled_add(T::one(), &back);
        }
        self.backward(&cache, &d_phi, &mut grads);
        Ok((total / examples.len() as f64, grads))
    }

    pub fn infonce_loss(&self, examples: &[ContrastiveExample]) -> Result<f64, NnError> {
        Ok(self.infonce_loss_grad(examples)?.0)
    }

    /// Mean binary cross-entropy of the value head against `targets` in [0, 1].
    pub fn value_loss_grad(&self, pairs: &[(String, f64)]) -> Result<(f64, Params<T>), NnError> {
        let mut grads = Params::zeros(&self.config);
        if pairs.is_empty() {
            return Ok((0.0, grads));
        }
        let (rows, index) = dedup(pairs.iter().map(|(s, _)| s.as_str()));
        let (phi, cache) = self.forward(&rows)?;
        let z = phi.dot(&self.params.value_w) + &self.params.value_b;
        let mut dz = Array2::<T>::zeros((rows.len(), 1));
        let n = pairs.len() as f64;
        let mut total = 0.0;
        for (s, y) in pairs {
            let r = index[s.as_str()];
            let zf = z[[r, 0]].to_f64().unwrap_or(f64::NAN);
            // log(1 + e^z) - y z, computed stably.
            total += zf.max(0.0) + (-zf.abs()).exp().ln_1p() - y * zf;
            let p = sigmoid(z[[r, 0]]);
            dz[[r, 0]] = dz[[r, 0]] + (p - real(*y)) / real(n);
        }
        grads.value_w += &phi.t().dot(&dz);
        grads.value_b += &dz.sum_axis(Axis(0)).insert_axis(Axis(0));
        let d_phi = dz.dot(&self.params.value_w.t());
        self.backward(&cache, &d_phi, &mut grads);
        Ok((total / n, grads))
    }

    pub fn value_loss(&self, pairs: &[(String, f64)]) -> Result<f64, NnError> {
        Ok(self.value_loss_grad(pairs)?.0)
    }

    fn batch_log_probs(&self, queries: &[(&str, &[String])]) -> Result<Vec<Vec<f64>>, NnError> {
        let (rows, index) = dedup(
            queries
                .iter()
                .flat_map(|(s, c)| std::iter::once(*s).chain(c.iter().map(String::as_str))),
        );
        let phi = self.encode(&rows)?;
        Ok(queries
            .iter()
            .map(|(s, cands)| {
                let views: Vec<_> = cands.iter().map(|c| phi.row(index[c.as_str()])).collect();
                let logits: Vec<f64> = self
                    .logits(phi.row(index[s]), &views)
                    .into_iter()
                    .map(|v| v.to_f64().unwrap_or(f64::NAN))
                    .collect();
                log_softmax(&logits)
            })
            .collect())
    }
}

impl<T: Real> Policy for Scorer<T> {
    /// Falls back to uniform log-probabilities for queries the encoder
    /// cannot read.
    fn log_probs_batch(&self, queries: &[(&str, &[String])]) -> Vec<Vec<f64>> {
        match self.batch_log_probs(queries) {
            Ok(v) => v,
            Err(err) => {
                log::warn!("scoring failed, using uniform policy: {err}");
                crate::search::UniformPolicy.log_probs_batch(queries)
            }
        }
    }
}

/// Ranks candidates by the value head instead of the bilinear scorer.
pub struct ValuePolicy<'a, T>(pub &'a Scorer<T>);

impl<T: Real> Policy for ValuePolicy<'_, T> {
    fn log_probs_batch(&self, queries: &[(&str, &[String])]) -> Vec<Vec<f64>> {
        let (rows, index) = dedup(queries.iter().flat_map(|(_, c)| c.iter().map(String::as_str)));
        let values = match self.0.value(&rows) {
            Ok(v) => v,
            Err(err) => {
                log::warn!("value head failed, using uniform policy: {err}");
                return crate::search::UniformPolicy.log_probs_batch(queries);
            }
        };
        queries
            .iter()
            .map(|(_, cands)| {
                let v: Vec<f64> = cands.iter().map(|c| values[index[c.as_str()]]).collect();
                let total: f64 = v.iter().sum();
                if total <= 0.0 {
                    vec![-(cands.len() as f64).ln(); cands.len()]
                } else {
                    v.iter().map(|x| (x / total).ln()).collect()
                }
            })
            .collect()
    }
}
