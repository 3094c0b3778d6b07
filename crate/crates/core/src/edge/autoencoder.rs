use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::codec::{Blob, BlobKind, Reader, Writer};
use crate::error::{GladError, Result};
use crate::math::{all_finite, frobenius_sq, norm_sq, seeded, sigmoid, uniform_fan_in, Adam};

/// Fully connected layer applied to row vectors: `x W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    fn new(rng: &mut crate::math::Rng64, inp: usize, out: usize) -> Self {
        let w = uniform_fan_in(rng, inp, out, inp);
        let bound = 1.0 / (inp.max(1) as f64).sqrt();
        let b = uniform_fan_in(rng, 1, out, inp).row(0).to_owned();
        debug_assert!(b.iter().all(|v| v.abs() <= bound));
        Dense { w, b }
    }

    fn affine(&self, x: ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }
}

/// Sigmoid encoder stack with a mirrored decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    pub encoder: Vec<Dense>,
    pub decoder: Vec<Dense>,
    /// Identity instead of sigmoid on the reconstruction layer.
    pub linear_output: bool,
}

#[derive(Debug, Clone)]
pub struct AeCache {
    /// `acts[0]` is the input, `acts[k]` the code, last the reconstruction.
    pub acts: Vec<Array2<f64>>,
}

impl AeCache {
    pub fn code(&self, k: usize) -> &Array2<f64> {
        &self.acts[k]
    }

    pub fn output(&self) -> &Array2<f64> {
        self.acts.last().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeGradients {
    pub encoder: Vec<Dense>,
    pub decoder: Vec<Dense>,
}

impl AeGradients {
    pub fn zeros_like(ae: &Autoencoder) -> Self {
        let z = |l: &Dense| Dense {
            w: Array2::zeros(l.w.raw_dim()),
            b: Array1::zeros(l.b.len()),
        };
        AeGradients {
            encoder: ae.encoder.iter().map(z).collect(),
            decoder: ae.decoder.iter().map(z).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &AeGradients, s: f64) {
        for (a, b) in self
            .encoder
            .iter_mut()
            .zip(&other.encoder)
            .chain(self.decoder.iter_mut().zip(&other.decoder))
        {
            a.w.scaled_add(s, &b.w);
            a.b.scaled_add(s, &b.b);
        }
    }
}

impl Autoencoder {
    /// `arch` lists the input width followed by the encoder widths; the decoder mirrors it.
    pub fn new(arch: &[usize], linear_output: bool, seed: u64) -> Result<Self> {
        if arch.len() < 2 || arch.contains(&0) {
            return Err(GladError::Config(format!(
                "autoencoder needs input and at least one positive hidden width, got {arch:?}"
            )));
        }
        let mut rng = seeded(seed);
        let encoder = arch
            .windows(2)
            .map(|w| Dense::new(&mut rng, w[0], w[1]))
            .collect();
        let decoder = arch
            .windows(2)
            .rev()
            .map(|w| Dense::new(&mut rng, w[1], w[0]))
            .collect();
        Ok(Autoencoder {
            encoder,
            decoder,
            linear_output,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder[0].w.nrows()
    }

    pub fn code_dim(&self) -> usize {
        self.encoder.last().unwrap().w.ncols()
    }

    pub fn n_encoder_layers(&self) -> usize {
        self.encoder.len()
    }

    fn check(&self, z: ArrayView2<f64>) -> Result<()> {
        if z.ncols() != self.input_dim() {
            return Err(GladError::Dimension(format!(
                "autoencoder expects width {}, got {}",
                self.input_dim(),
                z.ncols()
            )));
        }
        Ok(())
    }

    /// Code-layer output for every row.
    pub fn encode(&self, z: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(z)?;
        let mut h = z.to_owned();
        for l in &self.encoder {
            h = l.affine(h.view()).mapv(sigmoid);
        }
        Ok(h)
    }

    pub fn forward(&self, z: ArrayView2<f64>) -> Result<AeCache> {
        self.check(z)?;
        let mut acts = vec![z.to_owned()];
        for l in &self.encoder {
            let h = l.affine(acts.last().unwrap().view()).mapv(sigmoid);
            acts.push(h);
        }
        let last = self.decoder.len() - 1;
        for (i, l) in self.decoder.iter().enumerate() {
            let a = l.affine(acts.last().unwrap().view());
            acts.push(if i == last && self.linear_output {
                a
            } else {
                a.mapv(sigmoid)
            });
        }
        Ok(AeCache { acts })
    }

    /// Back-propagates a gradient on the reconstruction and, optionally, an
    /// extra gradient arriving directly at the code layer.
    pub fn backward(
        &self,
        cache: &AeCache,
        d_out: &Array2<f64>,
        d_code: Option<&Array2<f64>>,
    ) -> AeGradients {
        let k = self.encoder.len();
        let n_layers = 2 * k;
        let mut grads = AeGradients::zeros_like(self);
        let mut delta = d_out.clone();
        for layer in (0..n_layers).rev() {
            let out = &cache.acts[layer + 1];
            let linear = layer == n_layers - 1 && self.linear_output;
            if layer == k - 1 {
                if let Some(dc) = d_code {
                    delta += dc;
                }
            }
            let dz = if linear {
                delta
            } else {
                &delta * &out.mapv(|s| s * (1.0 - s))
            };
            let input = &cache.acts[layer];
            let (w, g) = if layer < k {
                (&self.encoder[layer].w, &mut grads.encoder[layer])
            } else {
                (&self.decoder[layer - k].w, &mut grads.decoder[layer - k])
            };
            g.w = input.t().dot(&dz);
            g.b = dz.sum_axis(Axis(0));
            delta = dz.dot(&w.t());
        }
        grads
    }

    /// `‖Z − Ẑ‖²_F`, its gradients, and the forward cache.
    pub fn reconstruction_loss(&self, z: ArrayView2<f64>) -> Result<(f64, AeGradients, AeCache)> {
        let cache = self.forward(z)?;
        let diff = cache.output() - &z;
        let loss = frobenius_sq(&diff);
        let grads = self.backward(&cache, &(diff * 2.0), None);
        Ok((loss, grads, cache))
    }

    /// Squared norms of encoder weights and biases.
    pub fn encoder_norm_sq(&self) -> f64 {
        self.encoder
            .iter()
            .map(|l| frobenius_sq(&l.w) + norm_sq(&l.b))
            .sum()
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut Dense> {
        self.encoder.iter_mut().chain(self.decoder.iter_mut())
    }

    /// One Adam step; uses two slots per layer starting at `slot0`.
    pub fn adam_step(&mut self, adam: &mut Adam, slot0: usize, grads: &AeGradients) {
        let g: Vec<&Dense> = grads.encoder.iter().chain(&grads.decoder).collect();
        for (i, (p, gi)) in self.params_mut().zip(g).enumerate() {
            adam.update_matrix(slot0 + 2 * i, &mut p.w, &gi.w);
            adam.update_vector(slot0 + 2 * i + 1, &mut p.b, &gi.b);
        }
    }

    pub fn n_slots(&self) -> usize {
        2 * (self.encoder.len() + self.decoder.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AeConfig {
    /// Encoder widths after the input layer.
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for AeConfig {
    fn default() -> Self {
        AeConfig {
            hidden: vec![8, 10],
            lr: 0.01,
            epochs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedAutoencoder {
    pub model: Autoencoder,
    pub code: Array2<f64>,
    pub loss_trace: Vec<f64>,
}

impl Autoencoder {
    /// Full-batch Adam on the reconstruction loss.
    pub fn fit(&mut self, z: ArrayView2<f64>, lr: f64, epochs: usize) -> Result<Vec<f64>> {
        let mut adam = Adam::new(lr);
        let mut trace = Vec::with_capacity(epochs);
        for epoch in 0..epochs {
            let (loss, grads, _) = self.reconstruction_loss(z)?;
            if !loss.is_finite() {
                return Err(GladError::Divergence { epoch, loss });
            }
            trace.push(loss);
            adam.tick();
            self.adam_step(&mut adam, 0, &grads);
        }
        Ok(trace)
    }
}

pub fn train_autoencoder(
    z: ArrayView2<f64>,
    cfg: &AeConfig,
    linear_output: bool,
) -> Result<TrainedAutoencoder> {
    let mut arch = vec![z.ncols()];
    arch.extend(&cfg.hidden);
    let mut model = Autoencoder::new(&arch, linear_output, cfg.seed)?;
    let loss_trace = model.fit(z, cfg.lr, cfg.epochs)?;
    let code = model.encode(z)?;
    if !all_finite(code.iter()) {
        return Err(GladError::Divergence {
            epoch: cfg.epochs,
            loss: f64::NAN,
        });
    }
    Ok(TrainedAutoencoder {
        model,
        code,
        loss_trace,
    })
}

impl Blob for Autoencoder {
    const KIND: BlobKind = BlobKind::Autoencoder;

    fn write_body(&self, w: &mut Writer) {
        w.u8(self.linear_output as u8);
        w.usize(self.encoder.len());
        for l in self.encoder.iter().chain(&self.decoder) {
            w.matrix(&l.w);
            w.vector(&l.b);
        }
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let linear_output = r.u8()? != 0;
        let k = r.usize()?;
        if k == 0 {
            return Err(GladError::Format("autoencoder without layers".into()));
        }
        let mut layers = Vec::with_capacity(2 * k);
        for _ in 0..2 * k {
            let w = r.matrix()?;
            let b = r.vector()?;
            if b.len() != w.ncols() {
                return Err(GladError::Format("bias width mismatch".into()));
            }
            layers.push(Dense { w, b });
        }
        if layers.windows(2).any(|p| p[0].w.ncols() != p[1].w.nrows()) {
            return Err(GladError::Format("inconsistent autoencoder layers".into()));
        }
        let decoder = layers.split_off(k);
        Ok(Autoencoder {
            encoder: layers,
            decoder,
            linear_output,
        })
    }
}
