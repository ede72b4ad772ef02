//! Two-qubit concurrence and entanglement of formation (Wootters).

use crate::error::{Error, Result};
use crate::qcore::linalg::{hermitian_eigenvalues, psd_sqrt, real, CMatrix, ZERO};
use crate::qcore::{binary_entropy, DensityOperator};

fn sigma_yy() -> CMatrix {
    let mut m = CMatrix::from_element(4, 4, ZERO);
    m[(0, 3)] = real(-1.0);
    m[(1, 2)] = real(1.0);
    m[(2, 1)] = real(1.0);
    m[(3, 0)] = real(-1.0);
    m
}

fn check_two_qubits(rho: &DensityOperator) -> Result<()> {
    if rho.layout().dims() != [2, 2] {
        return Err(Error::Unsupported(format!(
            "Wootters formula needs a two-qubit state, got dims {:?}",
            rho.layout().dims()
        )));
    }
    Ok(())
}

/// `max{0, λ₁−λ₂−λ₃−λ₄}` with `λ_i` the descending eigenvalues of
/// `√(√ρ ρ̃ √ρ)`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn concurrence(rho: &DensityOperator) -> Result<f64> {
    check_two_qubits(rho)?;
    let yy = sigma_yy();
    let tilde = &yy * rho.matrix().conjugate() * &yy;
    let s = psd_sqrt(rho.matrix());
    let r = &s * tilde * &s;
    let lam: Vec<f64> = hermitian_eigenvalues(&r)
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).clamp(0.0, 1.0))
}

/// `H₂((1 + √(1 − C²))/2)`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let x = (1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0;
    binary_entropy(x.clamp(0.0, 1.0)).expect("in range")
}

pub fn eof_2qubit(rho: &DensityOperator) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

/// Concurrence of a two-qubit pure state, `2|ad − bc|`.
pub fn pure_concurrence(amps: &[crate::qcore::C64]) -> f64 {
    2.0 * (amps[0] * amps[3] - amps[1] * amps[2]).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::Layout;
    use crate::states::{make_epr, make_upsilon, make_w};

    #[test]
    fn bell_and_mixed() {
        let bell = make_epr(2).unwrap().density();
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-7);
        assert!((eof_2qubit(&bell).unwrap() - 1.0).abs() < 1e-7);
        let mm = DensityOperator::maximally_mixed(Layout::from_pairs(&[("A", 2), ("B", 2)]).unwrap());
        assert_eq!(concurrence(&mm).unwrap(), 0.0);
        assert_eq!(eof_2qubit(&mm).unwrap(), 0.0);
    }

    #[test]
    fn w_marginal() {
        let rho = make_w().reduced(&["A", "B"]).unwrap();
        assert!((concurrence(&rho).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        let expect = binary_entropy((1.0 - (5.0f64 / 9.0).sqrt()) / 2.0).unwrap();
        assert!((eof_2qubit(&rho).unwrap() - expect).abs() < 1e-9);
    }

    #[test]
    fn upsilon_bc_matches_closed_form() {
        for k in 0..=10 {
            let a2 = 0.05 * k as f64;
            let (a, b) = (a2.sqrt(), (1.0 - a2).sqrt());
            let rho = make_upsilon(a2).unwrap().reduced(&["B", "C"]).unwrap();
            let expect = binary_entropy((0.5 - a * b).max(0.0)).unwrap();
            assert!((eof_2qubit(&rho).unwrap() - expect).abs() < 1e-6, "α²={a2}");
        }
    }

    #[test]
    fn wrong_dims_rejected() {
        let rho = DensityOperator::maximally_mixed(Layout::from_pairs(&[("A", 3), ("B", 2)]).unwrap());
        assert!(concurrence(&rho).is_err());
    }
}
