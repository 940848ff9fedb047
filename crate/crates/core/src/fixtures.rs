//! Reference parameter sets.
//!
//! Sets for the infected-do-not-migrate scenario carry `n12 = n21 = 0` and a
//! placeholder `B = 1`, which that variant never reads.

use crate::model::ParameterSet;

/// Symmetric set for which the general model settles at the endemic state
/// `(1.5, 1.5, 1.5, 1.5)`.
pub fn general_reference() -> ParameterSet {
    ParameterSet {
        r1: 1.0,
        r2: 1.0,
        gamma1: 1.0,
        gamma2: 1.0,
        delta1: 0.5,
        delta2: 0.5,
        mu1: 1.0,
        mu2: 1.0,
        m12: 1.0,
        m21: 1.0,
        n12: 1.0,
        n21: 1.0,
        a: 1.0,
        b: 10.0,
    }
}

/// [`general_reference`] with the backward corridor closed.
pub fn unidirectional_reference() -> ParameterSet {
    ParameterSet {
        m12: 0.0,
        n12: 0.0,
        ..general_reference()
    }
}

/// Set with a stable equilibrium where patch 2 is disease-free.
pub fn z1_reference() -> ParameterSet {
    ParameterSet {
        r1: 1.0,
        r2: 0.8,
        gamma1: 0.5,
        gamma2: 1.0,
        delta1: 1.0,
        delta2: 4.0,
        mu1: 1.0,
        mu2: 2.0,
        m12: 10.0,
        m21: 2.0,
        n12: 0.0,
        n21: 0.0,
        a: 5.0,
        b: 1.0,
    }
}

/// Set with a stable equilibrium where patch 1 is disease-free.
pub fn z2_reference() -> ParameterSet {
    ParameterSet {
        r1: 0.8,
        r2: 1.0,
        gamma1: 1.0,
        gamma2: 0.5,
        delta1: 4.0,
        delta2: 1.0,
        mu1: 2.0,
        mu2: 1.0,
        m12: 2.0,
        m21: 9.0,
        n12: 0.0,
        n21: 0.0,
        a: 5.0,
        b: 1.0,
    }
}

/// Set whose endemic coexistence point without infected migration is `(1.5, 1.5, 1.5, 1.5)`.
pub fn no_migrate_coexistence() -> ParameterSet {
    ParameterSet {
        n12: 0.0,
        n21: 0.0,
        b: 1.0,
        ..general_reference()
    }
}

/// Unidirectional set whose patch-1 block trace changes sign near
/// `delta1 = 1.38` while the determinant stays positive: a Hopf crossing.
pub fn unidirectional_hopf() -> ParameterSet {
    ParameterSet {
        r1: 0.5,
        r2: 1.0,
        gamma1: 1.0,
        gamma2: 1.0,
        delta1: 1.0,
        delta2: 0.5,
        mu1: 4.0,
        mu2: 1.0,
        m12: 0.0,
        m21: 1.0,
        n12: 0.0,
        n21: 0.5,
        a: 1.0,
        b: 0.1,
    }
}
