use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{GladError, Result};
use crate::graph::Adjacency;
use crate::math::{glorot, Rng64};

/// `D^-1/2 (A + I) D^-1/2` with `D` the row sums of `A + I`, stored in
/// compressed-row form together with its transpose.
#[derive(Debug, Clone)]
pub struct NormAdj {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    rows_t: Vec<Vec<(usize, f64)>>,
}

impl NormAdj {
    pub fn new(adj: &Adjacency) -> Self {
        let n = adj.n();
        // self-loop guarantees every degree is at least 1
        let deg: Vec<f64> = (0..n).map(|i| (adj.out_degree(i) + 1) as f64).collect();
        let mut rows = Vec::with_capacity(n);
        let mut rows_t: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, di) in deg.iter().enumerate() {
            let mut r: Vec<(usize, f64)> = Vec::with_capacity(adj.out_degree(i) + 1);
            let mut self_done = false;
            for &j in adj.row(i) {
                if !self_done && j > i {
                    r.push((i, 1.0 / di));
                    self_done = true;
                }
                r.push((j, 1.0 / (di * deg[j]).sqrt()));
            }
            if !self_done {
                r.push((i, 1.0 / di));
            }
            for &(j, v) in &r {
                rows_t[j].push((i, v));
            }
            rows.push(r);
        }
        NormAdj { n, rows, rows_t }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn mul(rows: &[Vec<(usize, f64)>], m: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((rows.len(), m.ncols()));
        for (i, r) in rows.iter().enumerate() {
            let mut o = out.row_mut(i);
            for &(j, v) in r {
                o.scaled_add(v, &m.row(j));
            }
        }
        out
    }

    /// `Â_norm · m`
    pub fn apply(&self, m: &Array2<f64>) -> Array2<f64> {
        Self::mul(&self.rows, m)
    }

    /// `Â_normᵀ · m`
    pub fn apply_t(&self, m: &Array2<f64>) -> Array2<f64> {
        Self::mul(&self.rows_t, m)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.n, self.n));
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                d[[i, j]] = v;
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Identity => 1,
        }
    }

    pub(crate) fn from_tag(t: u8) -> Result<Self> {
        match t {
            0 => Ok(Activation::Relu),
            1 => Ok(Activation::Identity),
            _ => Err(GladError::Format(format!("unknown activation tag {t}"))),
        }
    }
}

/// Stack of `H_{l+1} = act(Â_norm H_l W_l)` layers without bias.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnEncoder {
    pub weights: Vec<Array2<f64>>,
    pub activation: Activation,
}

/// Intermediates of a forward pass: `props[l] = Â_norm H_l`,
/// `pre[l] = props[l] W_l`.
#[derive(Debug, Clone)]
pub struct GcnCache {
    pub props: Vec<Array2<f64>>,
    pub pre: Vec<Array2<f64>>,
    pub out: Array2<f64>,
}

impl GcnEncoder {
    pub fn new(dims: &[usize], activation: Activation, rng: &mut Rng64) -> Self {
        let weights = dims.windows(2).map(|w| glorot(rng, w[0], w[1])).collect();
        GcnEncoder {
            weights,
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().unwrap().ncols()
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn check(&self, adj: &NormAdj, x: &Array2<f64>) -> Result<()> {
        if x.nrows() != adj.n() {
            return Err(GladError::Dimension(format!(
                "{} feature rows for {} nodes",
                x.nrows(),
                adj.n()
            )));
        }
        if x.ncols() != self.input_dim() {
            return Err(GladError::Dimension(format!(
                "feature width {} but encoder expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        for w in self.weights.windows(2) {
            if w[0].ncols() != w[1].nrows() {
                return Err(GladError::Dimension("inconsistent layer chain".into()));
            }
        }
        Ok(())
    }

    /// Patch representations `H^n`.
    pub fn encode(&self, adj: &NormAdj, x: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward(adj, x)?.out)
    }

    pub fn forward(&self, adj: &NormAdj, x: &Array2<f64>) -> Result<GcnCache> {
        self.check(adj, x)?;
        Ok(self.forward_propagated(adj, adj.apply(x)))
    }

    /// Forward pass from an already propagated input `Â_norm X`.
    pub fn forward_propagated(&self, adj: &NormAdj, first: Array2<f64>) -> GcnCache {
        let mut props = Vec::with_capacity(self.n_layers());
        let mut pre = Vec::with_capacity(self.n_layers());
        let mut prop = first;
        let mut out = Array2::zeros((0, 0));
        for (l, w) in self.weights.iter().enumerate() {
            let z = prop.dot(w);
            out = z.mapv(|v| self.activation.apply(v));
            props.push(prop);
            pre.push(z);
            if l + 1 < self.n_layers() {
                prop = adj.apply(&out);
            } else {
                prop = Array2::zeros((0, 0));
            }
        }
        drop(prop);
        GcnCache { props, pre, out }
    }

    /// Weight gradients given `dL/dH_out`.
    pub fn backward(
        &self,
        adj: &NormAdj,
        cache: &GcnCache,
        d_out: &Array2<f64>,
    ) -> Vec<Array2<f64>> {
        let mut grads = vec![Array2::zeros((0, 0)); self.n_layers()];
        let mut d_h = d_out.clone();
        for l in (0..self.n_layers()).rev() {
            let mut d_z = d_h;
            d_z.zip_mut_with(&cache.pre[l], |g, &z| *g *= self.activation.derivative(z));
            grads[l] = cache.props[l].t().dot(&d_z);
            if l > 0 {
                let d_prop = d_z.dot(&self.weights[l].t());
                d_h = adj.apply_t(&d_prop);
            } else {
                d_h = Array2::zeros((0, 0));
            }
        }
        grads
    }

    /// Single-layer fast path: outputs for selected rows given `Â_norm X`.
    pub fn encode_rows(&self, first: &Array2<f64>, rows: &[usize]) -> (Array2<f64>, Array2<f64>) {
        debug_assert_eq!(self.n_layers(), 1);
        let p = first.select(Axis(0), rows);
        let z = p.dot(&self.weights[0]);
        let h = z.mapv(|v| self.activation.apply(v));
        (z, h)
    }

    /// Single-layer fast path: weight gradient from selected rows.
    pub fn backward_rows(
        &self,
        first: &Array2<f64>,
        rows: &[usize],
        pre: &Array2<f64>,
        d_out: &Array2<f64>,
    ) -> Array2<f64> {
        let mut d_z = d_out.clone();
        d_z.zip_mut_with(pre, |g, &z| *g *= self.activation.derivative(z));
        let p = first.select(Axis(0), rows);
        p.t().dot(&d_z)
    }

    pub fn weight_norm_sq(&self) -> f64 {
        self.weights.iter().map(crate::math::frobenius_sq).sum()
    }
}

/// Mean of rows, used by tests and the readout.
pub(crate) fn column_mean(h: &Array2<f64>) -> Array1<f64> {
    h.sum_axis(Axis(0)) / h.nrows() as f64
}
