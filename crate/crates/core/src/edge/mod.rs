//! Edge representations: hand-crafted relation features and an autoencoder over them.

mod autoencoder;
mod features;

pub use autoencoder::{
    train_autoencoder, AeCache, AeConfig, AeGradients, Autoencoder, Dense, TrainedAutoencoder,
};
pub use features::{
    compute_edge_features, edge_features_from_cp, EdgeFeatures, AC, CB, CP, EDGE_FEATURE_NAMES, JF,
    N_EDGE_FEATURES, SF, SI, SJ, SR,
};
