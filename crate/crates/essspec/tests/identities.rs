//! Algebraic identities of the Schur coefficients on random models.

mod common;

use common::identity::identity_suite;

#[test]
fn identities_hold_on_random_triples() {
    let e = identity_suite(1000, 0x5eed);
    println!("{e:?}");
    assert!(e.determinant <= 1e-9, "determinant identity: {e:?}");
    assert!(e.cross <= 1e-9, "cross identity: {e:?}");
    assert!(e.nevanlinna <= 1e-10 && e.negative_imaginary == 0, "Nevanlinna positivity: {e:?}");
    assert!(e.sigma_sum <= 1e-10 && e.negative_weights == 0, "sigma sum: {e:?}");
}

#[test]
fn identities_hold_for_another_seed() {
    let e = identity_suite(300, 42);
    assert!(e.determinant <= 1e-9 && e.cross <= 1e-9, "{e:?}");
    assert!(e.nevanlinna <= 1e-10 && e.sigma_sum <= 1e-10, "{e:?}");
}
