//! Thin wrappers over `libm` plus a few geometric helpers shared by the
//! numerical modules.

pub(crate) use libm::{exp, log as ln, sqrt};

pub(crate) const PI: f64 = core::f64::consts::PI;

#[inline]
pub(crate) fn powf(base: f64, exponent: f64) -> f64 {
    libm::pow(base, exponent)
}

/// `|u|^p` with a fast path for small integer exponents, which dominate the
/// solver's inner loop.
#[inline]
pub(crate) fn abs_pow(u: f64, p: f64) -> f64 {
    let a = u.abs();
    if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else {
        powf(a, p)
    }
}

/// Japanese bracket `<r> = sqrt(1 + r^2)`.
#[inline]
pub(crate) fn bracket(r: f64) -> f64 {
    sqrt(1.0 + r * r)
}

/// Surface measure of the unit sphere in `R^n`: `ω_{n-1} = 2 π^{n/2} / Γ(n/2)`.
///
/// For radial integrands, `∫_{R^n} f(|x|) dx = ω_{n-1} ∫_0^∞ f(r) r^{n-1} dr`.
pub(crate) fn sphere_area(n: u32) -> f64 {
    let half = 0.5 * n as f64;
    2.0 * powf(PI, half) / libm::tgamma(half)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas_match_closed_forms() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn abs_pow_matches_generic_pow() {
        for &u in &[-2.5_f64, -1.0, 0.0, 0.3, 4.0] {
            for &p in &[1.5_f64, 2.0, 3.0, 4.25] {
                let want = powf(u.abs(), p);
                assert!((abs_pow(u, p) - want).abs() <= 1e-15 * want.max(1.0));
            }
        }
    }
}
