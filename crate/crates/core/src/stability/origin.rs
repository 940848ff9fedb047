//! Linearization at the origin.
//!
//! At the origin the infected rows no longer see the susceptibles, so the
//! characteristic polynomial splits into a susceptible factor `H` and an
//! infected factor `K`.

use num_complex::Complex64;
use serde::Serialize;

use crate::model::{Model, ParameterSet, Variant};
use crate::poly;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OriginFactorization {
    /// `[1, h1, h0]`
    pub h: [f64; 3],
    /// `[1, k1, k0]`
    pub k: [f64; 3],
    /// `-delta_k - mu_k` when infected do not migrate (the roots of `K`).
    pub explicit_eigenvalues: Option<[f64; 2]>,
}

impl OriginFactorization {
    pub fn h_roots(&self) -> [Complex64; 2] {
        poly::monic_quadratic_roots(self.h[1], self.h[2])
    }

    pub fn k_roots(&self) -> [Complex64; 2] {
        match self.explicit_eigenvalues {
            Some([a, b]) => {
                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
            }
            None => poly::monic_quadratic_roots(self.k[1], self.k[2]),
        }
    }

    pub fn roots(&self) -> [Complex64; 4] {
        let [a, b] = self.h_roots();
        let [c, d] = self.k_roots();
        [a, b, c, d]
    }

    /// Expanded `H * K`.
    pub fn product(&self) -> [f64; 5] {
        let v = poly::multiply(&self.h, &self.k);
        [v[0], v[1], v[2], v[3], v[4]]
    }

    /// Routh-Hurwitz conditions on `H`: `h1 > 0` and `h0 > 0`.
    pub fn h_is_hurwitz(&self) -> bool {
        self.h[1] > 0.0 && self.h[2] > 0.0
    }
}

pub fn origin_factorization(model: &Model) -> OriginFactorization {
    let p = model.params();
    let (m12a, m21a) = (p.m12 / p.a, p.m21 / p.a);
    let h = [1.0, m12a + m21a - p.r1 - p.r2, -m12a * p.r1 - m21a * p.r2 + p.r1 * p.r2];
    let (n12b, n21b) = if model.variant().allows_infected_migration() {
        (p.n12 / p.b, p.n21 / p.b)
    } else {
        (0.0, 0.0)
    };
    let k = [
        1.0,
        p.delta1 + p.delta2 + p.mu1 + p.mu2 + n12b + n21b,
        (p.delta2 + p.mu2) * (p.delta1 + p.mu1 + n21b) + (p.delta1 + p.mu1) * n12b,
    ];
    let explicit_eigenvalues = match model.variant() {
        Variant::NoInfectedMigration => Some([-p.delta1 - p.mu1, -p.delta2 - p.mu2]),
        _ => None,
    };
    OriginFactorization {
        h,
        k,
        explicit_eigenvalues,
    }
}

/// The parabola obtained by forcing a zero trace on `H` and asking for a
/// positive constant term; a Hopf point at the origin needs it positive
/// somewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiCheck {
    pub vertex_r1: f64,
    pub vertex_value: f64,
    pub excluded: bool,
}

/// `Psi(r1) = -r1^2 + 2 m21 r1 / A - (m21/A)(m12/A + m21/A)`.
pub fn psi(params: &ParameterSet, r1: f64) -> f64 {
    let (m12a, m21a) = (params.m12 / params.a, params.m21 / params.a);
    -r1 * r1 + 2.0 * m21a * r1 - m21a * (m12a + m21a)
}

pub fn origin_hopf_excluded(params: &ParameterSet) -> PsiCheck {
    let vertex_r1 = params.m21 / params.a;
    let vertex_value = -params.m21 * params.m12 / (params.a * params.a);
    let excluded = vertex_value < 0.0 || (params.m12 == 0.0 && vertex_value <= 0.0);
    PsiCheck {
        vertex_r1,
        vertex_value,
        excluded,
    }
}
