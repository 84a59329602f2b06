//! Exact coefficient tables and the neutrino cosmological constant.

use clifford_dirac::clifford_fiber::Signature;
use clifford_dirac::dirac_ops::DymSetup;
use clifford_dirac::lagrangians::{
    lambda_a, lambda_dm, lambda_dm_block_closed_form, lambda_dm_formula, pi_coefficients, stm_coefficients, Coefficients,
};
use clifford_dirac::linalg::Mat;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientRow {
    pub n: i64,
    pub epsilon: i64,
    pub identity: &'static str,
    /// `signed`: as they enter `lhs = Σ c_i term_i`; `display`: the
    /// customary magnitudes, with the Pauli-map tail written as `-(…)`.
    pub convention: &'static str,
    pub yang_mills: String,
    pub higgs_kinetic: String,
    pub quartic: String,
    pub quadratic: String,
}

fn row(n: i64, epsilon: i64, identity: &'static str, convention: &'static str, c: &Coefficients) -> CoefficientRow {
    CoefficientRow {
        n,
        epsilon,
        identity,
        convention,
        yang_mills: c.yang_mills.to_string(),
        higgs_kinetic: c.higgs_kinetic.to_string(),
        quartic: c.quartic.to_string(),
        quadratic: c.quadratic.to_string(),
    }
}

/// All even `n` in `2..=n_max`, both `ε`.
pub fn coefficient_table(n_max: i64) -> Vec<CoefficientRow> {
    let mut rows = Vec::new();
    for n in (2..=n_max).step_by(2) {
        for eps in [1, -1] {
            let stm = stm_coefficients(n, eps);
            rows.push(row(n, eps, "pauli", "signed", &stm));
            let display = Coefficients {
                yang_mills: stm.yang_mills,
                higgs_kinetic: -stm.higgs_kinetic,
                quartic: -stm.quartic,
                quadratic: -stm.quadratic,
            };
            rows.push(row(n, eps, "pauli", "display", &display));
            let pi = pi_coefficients(n, eps);
            rows.push(row(n, eps, "pi", "signed", &pi));
            rows.push(row(n, eps, "pi", "display", &pi));
        }
    }
    rows
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaTerms {
    pub n: usize,
    pub a: String,
    pub a_tr_md4: f64,
    pub a_tr_mm4: f64,
    pub minus_tr_md2: f64,
    pub minus_tr_mm2: f64,
    pub cross: f64,
    pub lambda: f64,
    /// Assembled from `μ_YM` on a neutrino-only module; absent when the
    /// signature `(n-1, 1)` admits no such module.
    pub block_trace: Option<f64>,
    pub block_closed_form: f64,
    pub route_residual: Option<f64>,
    /// `2a tr({m_D, m_M}²)`, the predicted block-minus-formula gap.
    pub anticommutator_term: f64,
}

pub fn lambda_terms(m_d: &Mat, m_m: &Mat, n: usize) -> LambdaTerms {
    let a = lambda_a(n as i64);
    let af = *a.numer() as f64 / *a.denom() as f64;
    let tr = |m: &Mat| m.trace().re;
    let (d2, mm2, dm) = (m_d * m_d, m_m * m_m, m_d * m_m);
    let ac = &dm + m_m * m_d;
    let lambda = lambda_dm_formula(m_d, m_m, n as i64);
    let block_trace = Signature::new(n - 1, 1, 1)
        .and_then(|sig| DymSetup::new(sig, &vec![1.0; m_d.nrows()], &[]))
        .and_then(|setup| lambda_dm(&setup, m_d, m_m))
        .ok()
        .map(|r| r.block_trace);
    LambdaTerms {
        n,
        a: a.to_string(),
        a_tr_md4: af * tr(&(&d2 * &d2)),
        a_tr_mm4: af * tr(&(&mm2 * &mm2)),
        minus_tr_md2: -tr(&d2),
        minus_tr_mm2: -tr(&mm2),
        cross: -2.0 * af * tr(&(&dm * &dm)),
        lambda,
        block_trace,
        block_closed_form: lambda_dm_block_closed_form(m_d, m_m, n as i64),
        route_residual: block_trace.map(|b| (b - lambda).abs()),
        anticommutator_term: 2.0 * af * tr(&(&ac * &ac)),
    }
}
