//! One-parameter families of second-order low-storage schemes.

use num_traits::Zero;

use super::{expand_low_storage, LowStorageParams};
use crate::conditions::order_lhs;
use crate::error::{Error, Result};
use crate::rational::{self, int, one, ratio, Rational};

fn nonzero(value: Rational, what: &str) -> Result<Rational> {
    if value.is_zero() {
        Err(Error::SingularParameter(format!("{what} vanishes")))
    } else {
        Ok(value)
    }
}

/// Two stages: λ₁ = (2ω₁−1)/(2ω₁), γ₁ = (−2ω₁²+2ω₁−1)/(2(ω₁−1)),
/// ω₂ = λ₂ = 1−ω₁. The diagonal entry λ₁ vanishes at ω₁ = 1/2; that is left
/// to scheme validation.
pub fn family_s2(omega1: &Rational) -> Result<LowStorageParams> {
    let w1 = omega1.clone();
    let two = int(2);
    let d1 = nonzero(&two * &w1, "omega1")?;
    let d2 = nonzero(&two * (&w1 - one()), "omega1 - 1")?;
    let lambda1 = (&two * &w1 - one()) / d1;
    let gamma1 = (-&two * &w1 * &w1 + &two * &w1 - one()) / d2;
    let w2 = one() - &w1;
    LowStorageParams::new(vec![w1, w2.clone()], vec![gamma1], vec![lambda1, w2])
}

/// Three stages with λ₁ = λ₂ = ω₁ and λ₃ = ω₃, the remaining parameters
/// fixed by second order and the two linear-model cancellations.
pub fn family_s3(omega1: &Rational) -> Result<LowStorageParams> {
    let w = omega1.clone();
    let w2p = &w * &w;
    let w3p = &w2p * &w;
    let w4p = &w3p * &w;
    let d_omega2 = nonzero(int(2) * (int(2) * &w - one()), "2 omega1 - 1")?;
    let d_gamma2 = nonzero(
        int(2) * (int(4) * &w3p - int(10) * &w2p + int(6) * &w - one()),
        "4 omega1^3 - 10 omega1^2 + 6 omega1 - 1",
    )?;
    let d_gamma1 = nonzero(int(2) * &w2p - int(2) * &w + one(), "2 omega1^2 - 2 omega1 + 1")?;

    let omega2 = (int(-2) * &w2p + int(2) * &w - one()) / d_omega2;
    let gamma2 = (int(4) * &w4p + int(4) * &w3p - int(12) * &w2p + int(6) * &w - one()) / d_gamma2;
    let gamma1 = int(-2) * (int(2) * &w3p - &w2p) / d_gamma1;
    let omega3 = one() - &w - &omega2;
    LowStorageParams::new(
        vec![w.clone(), omega2, omega3.clone()],
        vec![gamma1, gamma2],
        vec![w.clone(), w, omega3],
    )
}

/// Size of the leading truncation error: the Euclidean norm of the six
/// third-order residuals (ωᵗℬ²e − 1/6, …, ωᵗ𝒞ℬe − 1/6).
///
/// The residuals are already weighted by the tree densities through their
/// right-hand sides. Among the plain sum, the max and the Euclidean norm,
/// only the last puts the minimizer of the three-stage family at
/// ω₁ ≈ 0.15478, the value from which ω₁ = 3/20 was rounded.
pub fn leading_error_objective(params: &LowStorageParams) -> f64 {
    let (b, c) = expand_low_storage(params);
    let lhs = order_lhs(&b, &c, &params.omega);
    let rhs = [
        ratio(1, 6),
        ratio(1, 3),
        ratio(1, 6),
        ratio(1, 3),
        ratio(1, 6),
        ratio(1, 6),
    ];
    let sum_sq: Rational = lhs[3..]
        .iter()
        .zip(&rhs)
        .map(|(l, r)| {
            let d = l - r;
            &d * &d
        })
        .sum();
    rational::to_f64(&sum_sq).sqrt()
}
