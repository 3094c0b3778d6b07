use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::smo::{self, SmoParams};
use super::PurposeCategory;
use crate::codec::{Reader, Writer};
use crate::error::{GladError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub kernel: Kernel,
    /// Box bound on every dual coefficient.
    pub r: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Scale the bound per sample by `N / (2 n_class)` inside each binary problem.
    pub balanced: bool,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            kernel: Kernel::Linear,
            r: 1.0,
            tol: 1e-3,
            max_iter: 100_000,
            balanced: false,
        }
    }
}

/// One signed-label binary machine over the shared training inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub alpha: Vec<f64>,
    pub y: Vec<f64>,
    pub bias: f64,
    /// Per-sample box bound used during training.
    pub upper: Vec<f64>,
    /// Indices with `α > 0`, ascending.
    pub support: Vec<usize>,
    pub iterations: usize,
    pub gap: f64,
    pub objective: Vec<f64>,
}

impl BinarySvm {
    fn fit(gram: &Array2<f64>, y: Vec<f64>, cfg: &SvmConfig, trace: bool) -> Result<Self> {
        let n = y.len();
        let upper = if cfg.balanced {
            let pos = y.iter().filter(|&&v| v > 0.0).count();
            let neg = n - pos;
            y.iter()
                .map(|&v| {
                    let size = if v > 0.0 { pos } else { neg };
                    cfg.r * n as f64 / (2.0 * size as f64)
                })
                .collect()
        } else {
            vec![cfg.r; n]
        };
        let params = SmoParams {
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            trace,
        };
        let sol = smo::solve(gram, &y, &upper, &params)?;
        let support = (0..n).filter(|&i| sol.alpha[i] > 0.0).collect();
        Ok(BinarySvm {
            alpha: sol.alpha,
            y,
            bias: sol.bias,
            upper,
            support,
            iterations: sol.iterations,
            gap: sol.gap,
            objective: sol.objective,
        })
    }

    pub fn decision(&self, kernel: &Kernel, x: &Array2<f64>, c: ArrayView1<f64>) -> f64 {
        let mut acc = 0.0;
        for &i in &self.support {
            acc += self.y[i] * self.alpha[i] * kernel.eval(x.row(i), c);
        }
        acc + self.bias
    }

    /// Largest violation of the signed-margin KKT conditions on the training set.
    pub fn kkt_violation(&self, kernel: &Kernel, x: &Array2<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.y.len() {
            let m = self.y[i] * self.decision(kernel, x, x.row(i));
            let v = if self.alpha[i] <= 0.0 {
                (1.0 - m).max(0.0)
            } else if self.alpha[i] >= self.upper[i] {
                (m - 1.0).max(0.0)
            } else {
                (m - 1.0).abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    fn write(&self, w: &mut Writer) {
        w.f64s(&self.alpha);
        w.f64s(&self.y);
        w.f64(self.bias);
        w.f64s(&self.upper);
        w.usize(self.iterations);
        w.f64(self.gap);
    }

    fn read(r: &mut Reader<'_>, n: usize) -> Result<Self> {
        let alpha = r.f64s()?;
        let y = r.f64s()?;
        let bias = r.f64()?;
        let upper = r.f64s()?;
        if alpha.len() != n || y.len() != n || upper.len() != n {
            return Err(GladError::Format("svm coefficient length mismatch".into()));
        }
        let support = (0..n).filter(|&i| alpha[i] > 0.0).collect();
        Ok(BinarySvm {
            alpha,
            y,
            bias,
            upper,
            support,
            iterations: r.usize()?,
            gap: r.f64()?,
            objective: Vec::new(),
        })
    }
}

fn check_inputs(x: &Array2<f64>, n_labels: usize, cfg: &SvmConfig) -> Result<()> {
    cfg.kernel.validate()?;
    if !(cfg.r > 0.0) {
        return Err(GladError::Config(format!(
            "regularization must be positive, got {}",
            cfg.r
        )));
    }
    if x.nrows() != n_labels {
        return Err(GladError::Dimension(format!(
            "{} inputs but {} labels",
            x.nrows(),
            n_labels
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(GladError::Dimension("non-finite context embedding".into()));
    }
    Ok(())
}

/// One-vs-rest machine over the six purpose categories.
#[derive(Debug, Clone, PartialEq)]
pub struct OvrSvm {
    pub kernel: Kernel,
    pub r: f64,
    pub x: Array2<f64>,
    pub labels: Vec<PurposeCategory>,
    /// Indexed by `category.index() - 1`.
    pub classes: Vec<BinarySvm>,
}

impl OvrSvm {
    pub fn train(x: &Array2<f64>, labels: &[PurposeCategory], cfg: &SvmConfig) -> Result<Self> {
        Self::train_traced(x, labels, cfg, false)
    }

    /// Like `train`, also keeping each solver's dual objective per iteration.
    pub fn train_traced(
        x: &Array2<f64>,
        labels: &[PurposeCategory],
        cfg: &SvmConfig,
        trace: bool,
    ) -> Result<Self> {
        check_inputs(x, labels.len(), cfg)?;
        let mut present: Vec<_> = labels.to_vec();
        present.sort();
        present.dedup();
        if labels.len() < 2 || present.len() < 2 {
            return Err(GladError::SingleClass(present.len()));
        }
        let gram = cfg.kernel.gram(x);
        let classes = PurposeCategory::ALL
            .iter()
            .map(|&cat| {
                let y = labels
                    .iter()
                    .map(|&l| if l == cat { 1.0 } else { -1.0 })
                    .collect();
                BinarySvm::fit(&gram, y, cfg, trace)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OvrSvm {
            kernel: cfg.kernel,
            r: cfg.r,
            x: x.clone(),
            labels: labels.to_vec(),
            classes,
        })
    }

    pub fn decision_value(&self, cat: PurposeCategory, c: ArrayView1<f64>) -> f64 {
        self.classes[cat.index() - 1].decision(&self.kernel, &self.x, c)
    }

    pub fn decision_values(&self, c: ArrayView1<f64>) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (o, m) in out.iter_mut().zip(&self.classes) {
            *o = m.decision(&self.kernel, &self.x, c);
        }
        out
    }

    pub fn classify(&self, c: ArrayView1<f64>) -> PurposeCategory {
        argmax_category(&self.decision_values(c))
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        let (tag, param) = self.kernel.tag();
        w.u8(tag);
        w.f64(param);
        w.f64(self.r);
        w.matrix(&self.x);
        w.bytes(
            &self
                .labels
                .iter()
                .map(|c| c.index() as u8)
                .collect::<Vec<_>>(),
        );
        for m in &self.classes {
            m.write(w);
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let kernel = Kernel::from_tag(r.u8()?, r.f64()?)?;
        let reg = r.f64()?;
        let x = r.matrix()?;
        let labels = r
            .bytes()?
            .into_iter()
            .map(|b| PurposeCategory::from_index(b as usize))
            .collect::<Result<Vec<_>>>()?;
        if labels.len() != x.nrows() {
            return Err(GladError::Format("label count mismatch".into()));
        }
        let classes = (0..6)
            .map(|_| BinarySvm::read(r, x.nrows()))
            .collect::<Result<Vec<_>>>()?;
        Ok(OvrSvm {
            kernel,
            r: reg,
            x,
            labels,
            classes,
        })
    }
}

/// Highest decision value wins; exact ties go to the lowest index.
pub fn argmax_category(values: &[f64; 6]) -> PurposeCategory {
    let mut best = 0;
    for j in 1..6 {
        if values[j] > values[best] {
            best = j;
        }
    }
    PurposeCategory::ALL[best]
}

/// Single clear-purpose versus Other machine.
#[derive(Debug, Clone, PartialEq)]
pub struct ClearPurposeSvm {
    pub kernel: Kernel,
    pub r: f64,
    pub x: Array2<f64>,
    pub svm: BinarySvm,
}

impl ClearPurposeSvm {
    pub fn train(x: &Array2<f64>, labels: &[PurposeCategory], cfg: &SvmConfig) -> Result<Self> {
        check_inputs(x, labels.len(), cfg)?;
        let y: Vec<f64> = labels
            .iter()
            .map(|l| if l.is_clear() { 1.0 } else { -1.0 })
            .collect();
        let pos = y.iter().filter(|&&v| v > 0.0).count();
        if labels.len() < 2 || pos == 0 || pos == y.len() {
            return Err(GladError::SingleClass(1));
        }
        let gram = cfg.kernel.gram(x);
        Ok(ClearPurposeSvm {
            kernel: cfg.kernel,
            r: cfg.r,
            x: x.clone(),
            svm: BinarySvm::fit(&gram, y, cfg, false)?,
        })
    }

    pub fn decision_value(&self, c: ArrayView1<f64>) -> f64 {
        self.svm.decision(&self.kernel, &self.x, c)
    }

    pub fn is_clear(&self, c: ArrayView1<f64>) -> bool {
        self.decision_value(c) > 0.0
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        let (tag, param) = self.kernel.tag();
        w.u8(tag);
        w.f64(param);
        w.f64(self.r);
        w.matrix(&self.x);
        self.svm.write(w);
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let kernel = Kernel::from_tag(r.u8()?, r.f64()?)?;
        let reg = r.f64()?;
        let x = r.matrix()?;
        let svm = BinarySvm::read(r, x.nrows())?;
        Ok(ClearPurposeSvm {
            kernel,
            r: reg,
            x,
            svm,
        })
    }
}
