//! Central finite differences against the analytic gradients of every
//! trained objective.

use glad_core::detector::{LrHead, LrLoss};
use glad_core::edge::Autoencoder;
use glad_core::graph::Adjacency;
use glad_core::math::seeded;
use glad_core::node::{dgi_objective, Activation, Discriminator, GcnEncoder, NormAdj};
use glad_core::text::{tokenize, train_pvdm, PvDmConfig, Vocabulary};
use ndarray::{Array1, Array2};
use rand::Rng;

pub const TOLERANCE: f64 = 1e-4;
const H: f64 = 1e-5;

/// Norm-wise relative error between analytic and numeric gradients.
pub fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).powi(2))
        .sum::<f64>()
        .sqrt();
    let a: f64 = analytic.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n: f64 = numeric.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / a.max(n).max(1e-12)
}

/// Numeric gradient of `f` over every entry reachable through `get`.
pub fn numeric<T: Clone>(
    base: &T,
    len: usize,
    get: impl Fn(&mut T) -> &mut [f64],
    f: impl Fn(&T) -> f64,
) -> Vec<f64> {
    (0..len)
        .map(|k| {
            let mut plus = base.clone();
            get(&mut plus)[k] += H;
            let mut minus = base.clone();
            get(&mut minus)[k] -= H;
            (f(&plus) - f(&minus)) / (2.0 * H)
        })
        .collect()
}

fn random_matrix(rng: &mut impl Rng, r: usize, c: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((r, c), || rng.random_range(-scale..scale))
}

/// Errors for every GCN layer and the discriminator, both activations.
pub fn infomax_errors() -> Vec<(String, f64)> {
    let mut out = Vec::new();
    let mut rng = seeded(11);
    let n = 8;
    let pairs: Vec<(usize, usize)> = (0..14)
        .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
        .filter(|(a, b)| a != b)
        .collect();
    let mut pairs = pairs;
    pairs.sort_unstable();
    pairs.dedup();
    let adj = NormAdj::new(&Adjacency::from_pairs(n, &pairs));
    let x = random_matrix(&mut rng, n, 5, 1.0);
    let xt = random_matrix(&mut rng, n, 5, 1.0);
    for act in [Activation::Relu, Activation::Identity] {
        let enc = GcnEncoder::new(&[5, 4, 3], act, &mut rng);
        let disc = Discriminator {
            w: random_matrix(&mut rng, 3, 3, 0.5),
        };
        let (_, g) = dgi_objective(&enc, &disc, &adj, &x, &xt).unwrap();
        let loss =
            |e: &GcnEncoder, d: &Discriminator| dgi_objective(e, d, &adj, &x, &xt).unwrap().0;
        for layer in 0..enc.weights.len() {
            let len = enc.weights[layer].len();
            let num = numeric(
                &enc,
                len,
                |e| e.weights[layer].as_slice_mut().unwrap(),
                |e| loss(e, &disc),
            );
            out.push((
                format!("infomax {act:?} layer {layer}"),
                rel_err(g.encoder[layer].as_slice().unwrap(), &num),
            ));
        }
        let num = numeric(&disc, 9, |d| d.w.as_slice_mut().unwrap(), |d| loss(&enc, d));
        out.push((
            format!("infomax {act:?} discriminator"),
            rel_err(g.disc.as_slice().unwrap(), &num),
        ));
    }
    out
}

fn layer_mut(a: &mut Autoencoder, k: usize) -> &mut glad_core::edge::Dense {
    let n_enc = a.encoder.len();
    if k < n_enc {
        &mut a.encoder[k]
    } else {
        &mut a.decoder[k - n_enc]
    }
}

/// Errors for weights and biases of every autoencoder layer.
pub fn reconstruction_errors() -> Vec<(String, f64)> {
    let mut out = Vec::new();
    let mut rng = seeded(12);
    let z = Array2::from_shape_simple_fn((10, 8), || rng.random_range(0.0..1.0));
    for linear in [false, true] {
        let ae = Autoencoder::new(&[8, 6, 3], linear, 5).unwrap();
        let (_, g, _) = ae.reconstruction_loss(z.view()).unwrap();
        let loss = |a: &Autoencoder| a.reconstruction_loss(z.view()).unwrap().0;
        let layers = ae.encoder.len() + ae.decoder.len();
        for k in 0..layers {
            let gl = if k < ae.encoder.len() {
                &g.encoder[k]
            } else {
                &g.decoder[k - ae.encoder.len()]
            };
            let num = numeric(
                &ae,
                gl.w.len(),
                |a| layer_mut(a, k).w.as_slice_mut().unwrap(),
                loss,
            );
            out.push((
                format!("reconstruction linear={linear} layer {k} weights"),
                rel_err(gl.w.as_slice().unwrap(), &num),
            ));
            let len = gl.b.len();
            let num = numeric(
                &ae,
                len,
                |a| layer_mut(a, k).b.as_slice_mut().unwrap(),
                loss,
            );
            out.push((
                format!("reconstruction linear={linear} layer {k} bias"),
                rel_err(gl.b.as_slice().unwrap(), &num),
            ));
        }
    }
    out
}

/// Errors for the head weights, bias and its input rows.
pub fn logistic_errors() -> Vec<(String, f64)> {
    let mut rng = seeded(13);
    let h = random_matrix(&mut rng, 10, 6, 1.0);
    let labels: Vec<f64> = (0..10)
        .map(|i| if i % 3 == 0 { 1.0 } else { 0.0 })
        .collect();
    let head = LrHead {
        w: Array1::from_shape_simple_fn(6, || rng.random_range(-1.0..1.0)),
        b: 0.3,
    };
    let (_, g) = head.loss(h.view(), &labels, LrLoss::Bce).unwrap();
    let loss = |hd: &LrHead, x: &Array2<f64>| hd.loss(x.view(), &labels, LrLoss::Bce).unwrap().0;
    let num = numeric(
        &head,
        6,
        |hd| hd.w.as_slice_mut().unwrap(),
        |hd| loss(hd, &h),
    );
    let mut out = vec![(
        "logistic w".to_string(),
        rel_err(g.w.as_slice().unwrap(), &num),
    )];
    let num_b = numeric(
        &head,
        1,
        |hd| std::slice::from_mut(&mut hd.b),
        |hd| loss(hd, &h),
    );
    out.push(("logistic b".into(), rel_err(&[g.b], &num_b)));
    let num_h = numeric(&h, 60, |x| x.as_slice_mut().unwrap(), |x| loss(&head, x));
    out.push((
        "logistic inputs".into(),
        rel_err(&g.h.iter().copied().collect::<Vec<_>>(), &num_h),
    ));
    out
}

/// Errors for every parameter block of the document model.
pub fn document_model_errors() -> Vec<(String, f64)> {
    let mut out = Vec::new();
    let texts = [
        "graph neural networks learn node embeddings from structure",
        "citation context reveals the purpose behind each reference",
        "anomalous citations inflate impact of selected journals",
    ];
    let docs: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t)).collect();
    let vocab = Vocabulary::build(&docs, 1).unwrap();
    let ids = (0..docs.len()).map(|i| format!("d{i}")).collect();
    let model = train_pvdm(
        &docs,
        ids,
        vocab,
        &PvDmConfig {
            dim: 4,
            window: 2,
            epochs: 2,
            ..PvDmConfig::default()
        },
    )
    .unwrap();
    let encoded: Vec<Vec<usize>> = docs.iter().map(|d| model.vocab().encode(d)).collect();
    let (_, g) = model.objective_and_gradient(&encoded);
    let f = |m: &glad_core::text::PvDmModel| m.objective_and_gradient(&encoded).0;
    let checks: [(
        &str,
        &Array2<f64>,
        fn(&mut glad_core::text::PvDmModel) -> &mut [f64],
    ); 3] = [
        ("docs", &g.docs, |m| m.docs.as_slice_mut().unwrap()),
        ("words", &g.words, |m| m.words.as_slice_mut().unwrap()),
        ("out_w", &g.out_w, |m| m.out_w.as_slice_mut().unwrap()),
    ];
    for (name, analytic, get) in checks {
        let num = numeric(&model, analytic.len(), get, f);
        out.push((
            format!("document model {name}"),
            rel_err(analytic.as_slice().unwrap(), &num),
        ));
    }
    let num = numeric(
        &model,
        g.out_b.len(),
        |m| m.out_b.as_slice_mut().unwrap(),
        f,
    );
    out.push((
        "document model out_b".into(),
        rel_err(g.out_b.as_slice().unwrap(), &num),
    ));
    out
}
