//! Normal tail, Mills ratio, gamma function and the inverse normal CDF.

use std::f64::consts::{PI, SQRT_2};

/// `ln(sqrt(2*pi))`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Above this level the upper tail is evaluated through the Mills ratio
/// instead of `erfc`.
const MILLS_SWITCH: f64 = 8.0;

/// Standard normal upper tail `P(N > u)`.
pub fn psi(u: f64) -> f64 {
    if u > MILLS_SWITCH {
        ln_psi(u).exp()
    } else {
        0.5 * libm::erfc(u / SQRT_2)
    }
}

/// Natural logarithm of [`psi`], finite for every finite `u`.
pub fn ln_psi(u: f64) -> f64 {
    if u > MILLS_SWITCH {
        ln_phi(u) + mills_ratio(u).ln()
    } else {
        (0.5 * libm::erfc(u / SQRT_2)).ln()
    }
}

/// Leading-order tail `exp(-u^2/2) / (sqrt(2 pi) u)`; only meaningful for `u > 0`.
pub fn psi_asymptotic(u: f64) -> f64 {
    (-0.5 * u * u - LN_SQRT_2PI - u.ln()).exp()
}

/// Standard normal CDF.
pub fn phi_cdf(u: f64) -> f64 {
    psi(-u)
}

/// Log of the standard normal density.
pub fn ln_phi(u: f64) -> f64 {
    -0.5 * u * u - LN_SQRT_2PI
}

/// Mills ratio `Psi(u) / phi(u)` for `u > 0`, by backward evaluation of the
/// continued fraction `1/(u + 1/(u + 2/(u + 3/(u + ...))))`.
///
/// Accurate to machine precision for `u >= 5`; below that prefer [`psi`].
pub fn mills_ratio(u: f64) -> f64 {
    let mut tail = u;
    for k in (1..=120).rev() {
        tail = u + k as f64 / tail;
    }
    1.0 / tail
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Inverse standard normal CDF (Wichura's AS 241, about 1e-16 relative accuracy).
///
/// `p` must lie in the open interval (0, 1).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0, "p = {p}");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(&CENTRAL_NUM, r) / horner(&CENTRAL_DEN, r);
    }
    let tail_p = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail_p.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        horner(&NEAR_NUM, r) / horner(&NEAR_DEN, r)
    } else {
        let r = r - 5.0;
        horner(&FAR_NUM, r) / horner(&FAR_DEN, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Polynomial with coefficients in increasing degree.
fn horner(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const CENTRAL_NUM: [f64; 8] = [
    3.387_132_872_796_366_5,
    133.141_667_891_784_38,
    1971.590_950_306_551_4,
    13731.693_765_509_46,
    45921.953_931_549_87,
    67265.770_927_008_7,
    33430.575_583_588_13,
    2509.080_928_730_122_7,
];
const CENTRAL_DEN: [f64; 8] = [
    1.0,
    42.313_330_701_600_91,
    687.187_007_492_057_9,
    5394.196_021_424_751,
    21213.794_301_586_597,
    39307.895_800_092_71,
    28729.085_735_721_943,
    5226.495_278_852_546,
];
const NEAR_NUM: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_545,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    0.241_780_725_177_450_6,
    0.022_723_844_989_269_184,
    7.745_450_142_783_414e-4,
];
const NEAR_DEN: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_8,
    1.676_384_830_183_803_8,
    0.689_767_334_985_100_1,
    0.148_103_976_427_480_07,
    0.015_198_666_563_616_457,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_8e-9,
];
const FAR_NUM: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    0.296_560_571_828_504_9,
    0.026_532_189_526_576_124,
    0.001_242_660_947_388_078_4,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const FAR_DEN: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_9,
    0.136_929_880_922_735_8,
    0.014_875_361_290_850_615,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

/// `sqrt(2 pi)`
pub fn sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt()
}
