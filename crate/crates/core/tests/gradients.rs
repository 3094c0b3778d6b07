mod common;

use common::gradcheck::{self, TOLERANCE};

fn assert_all_close(errors: Vec<(String, f64)>) {
    assert!(!errors.is_empty());
    for (name, err) in errors {
        assert!(err < TOLERANCE, "{name}: relative error {err}");
    }
}

#[test]
fn infomax_loss_gradient() {
    assert_all_close(gradcheck::infomax_errors());
}

#[test]
fn reconstruction_loss_gradient() {
    assert_all_close(gradcheck::reconstruction_errors());
}

#[test]
fn logistic_cross_entropy_gradient() {
    assert_all_close(gradcheck::logistic_errors());
}

#[test]
fn document_model_log_likelihood_gradient() {
    assert_all_close(gradcheck::document_model_errors());
}
