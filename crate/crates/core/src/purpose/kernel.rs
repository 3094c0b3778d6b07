use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{GladError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::Linear
    }
}

impl Kernel {
    pub fn eval(&self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
        match *self {
            Kernel::Linear => a.dot(&b),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }

    /// Full symmetric Gram matrix over the rows of `x`.
    pub fn gram(&self, x: &Array2<f64>) -> Array2<f64> {
        let n = x.nrows();
        let mut k = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = self.eval(x.row(i), x.row(j));
                k[[i, j]] = v;
                k[[j, i]] = v;
            }
        }
        k
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Linear => Ok(()),
            Kernel::Rbf { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            Kernel::Rbf { gamma } => Err(GladError::Config(format!(
                "rbf gamma must be positive, got {gamma}"
            ))),
        }
    }

    pub(crate) fn tag(&self) -> (u8, f64) {
        match *self {
            Kernel::Linear => (0, 0.0),
            Kernel::Rbf { gamma } => (1, gamma),
        }
    }

    pub(crate) fn from_tag(tag: u8, param: f64) -> Result<Self> {
        match tag {
            0 => Ok(Kernel::Linear),
            1 => Ok(Kernel::Rbf { gamma: param }),
            t => Err(GladError::Format(format!("unknown kernel tag {t}"))),
        }
    }
}
