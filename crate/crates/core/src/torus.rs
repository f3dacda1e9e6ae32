//! Exact arithmetic on the circle R/Z and the flat torus T² = R²/Z².
//!
//! A [`Phase`] stores an element of R/Z as a 128-bit binary fraction. Integer
//! linear maps and translations act on phases by wrapping integer arithmetic,
//! so orbits of affine fiber maps are computed without drift and differences
//! of two orbits evolve by the linear part alone.

use std::fmt;

const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

/// Reduces `x` into `[0, 1)`.
///
/// Rounds to the nearest integer first, then corrects, so the result never
/// escapes the interval by an ulp.
pub fn wrap(x: f64) -> f64 {
    let mut r = x - x.round();
    if r < 0.0 {
        r += 1.0;
    }
    if r >= 1.0 {
        r -= 1.0;
    }
    r
}

/// Fractional part of `k * alpha` with the product error compensated.
pub fn frac_mul(k: i64, alpha: f64) -> f64 {
    let kf = k as f64;
    let p = kf * alpha;
    let err = kf.mul_add(alpha, -p);
    wrap(wrap(p) + err)
}

/// Arc distance on R/Z.
pub fn circle_distance(x: f64, y: f64) -> f64 {
    let d = wrap(x - y);
    d.min(1.0 - d)
}

/// An element of R/Z with resolution 2^-128.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Phase(pub u128);

impl Phase {
    pub const ZERO: Phase = Phase(0);

    /// Converts a real number, reducing mod 1. Exact for every `f64` in
    /// `[2^-75, 1)`.
    pub fn from_f64(x: f64) -> Phase {
        let r = wrap(x);
        Phase((r * TWO_POW_128) as u128)
    }

    /// The representative in `[0, 1)`, rounded to the nearest `f64`.
    pub fn to_f64(self) -> f64 {
        let v = (self.0 as f64) / TWO_POW_128;
        if v >= 1.0 {
            0.0
        } else {
            v
        }
    }

    /// The representative in `[-1/2, 1/2)`.
    pub fn signed(self) -> f64 {
        (self.0 as i128 as f64) / TWO_POW_128
    }

    /// The exact rational `num / den` reduced mod 1, truncated to 128 bits.
    pub fn from_ratio(num: i64, den: u64) -> Phase {
        assert!(den > 0, "zero denominator");
        let n = num.rem_euclid(den as i64) as u128;
        let d = den as u128;
        // 2^128 * n / d computed as q*2^64 + r-part in two 64-bit limbs.
        let hi = (n << 64) / d;
        let rem = (n << 64) % d;
        let lo = (rem << 64) / d;
        Phase((hi << 64) | lo)
    }

    pub fn add(self, o: Phase) -> Phase {
        Phase(self.0.wrapping_add(o.0))
    }

    pub fn sub(self, o: Phase) -> Phase {
        Phase(self.0.wrapping_sub(o.0))
    }

    pub fn mul_int(self, k: i64) -> Phase {
        Phase(self.0.wrapping_mul(k as i128 as u128))
    }

    /// Leading binary digit: 1 when the phase lies in `[1/2, 1)`.
    pub fn first_digit(self) -> u8 {
        (self.0 >> 127) as u8
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phase({})", self.to_f64())
    }
}

/// Integer 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct IntMat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMat2 {
    pub const IDENTITY: IntMat2 = IntMat2 { a: 1, b: 0, c: 0, d: 1 };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> IntMat2 {
        IntMat2 { a, b, c, d }
    }

    pub fn from_rows(rows: [[i64; 2]; 2]) -> IntMat2 {
        IntMat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn mul(&self, o: &IntMat2) -> IntMat2 {
        IntMat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn pow(&self, k: u32) -> IntMat2 {
        (0..k).fold(IntMat2::IDENTITY, |acc, _| acc.mul(self))
    }

    /// Exact inverse. Requires `|det| = 1`.
    pub fn inverse(&self) -> IntMat2 {
        let det = self.det();
        assert!(det == 1 || det == -1, "matrix is not unimodular");
        IntMat2 {
            a: self.d * det,
            b: -self.b * det,
            c: -self.c * det,
            d: self.a * det,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.a > 0 && self.b > 0 && self.c > 0 && self.d > 0
    }

    pub fn apply_phase(&self, x: [Phase; 2]) -> [Phase; 2] {
        [
            x[0].mul_int(self.a).add(x[1].mul_int(self.b)),
            x[0].mul_int(self.c).add(x[1].mul_int(self.d)),
        ]
    }

    pub fn apply_f64(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a as f64 * v[0] + self.b as f64 * v[1],
            self.c as f64 * v[0] + self.d as f64 * v[1],
        ]
    }

    /// Action on the lattice `Z²/kZ²`, returning residues in `[0, k)`.
    pub fn apply_mod(&self, v: [i64; 2], k: i64) -> [i64; 2] {
        [
            (self.a * v[0] + self.b * v[1]).rem_euclid(k),
            (self.c * v[0] + self.d * v[1]).rem_euclid(k),
        ]
    }

    /// Spectral (Euclidean operator) norm.
    pub fn op_norm(&self) -> f64 {
        let (a, b, c, d) = (self.a as f64, self.b as f64, self.c as f64, self.d as f64);
        let s = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
        ((s + disc) / 2.0).sqrt()
    }
}

/// Euclidean distance on T² minimized over lattice translates.
pub fn torus_distance(x: [Phase; 2], y: [Phase; 2]) -> f64 {
    let d0 = x[0].sub(y[0]).signed();
    let d1 = x[1].sub(y[1]).signed();
    d0.hypot(d1)
}

/// Signed representative of `v mod k` in `(-k/2, k/2]`.
pub fn centered(v: i64, k: i64) -> i64 {
    let r = v.rem_euclid(k);
    if 2 * r > k {
        r - k
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_stays_in_unit_interval() {
        for x in [-1e-17, -0.0, 0.0, 1.0, 1.0 - 1e-17, 3.5, -2.25, 1e10 + 0.5] {
            let r = wrap(x);
            assert!((0.0..1.0).contains(&r), "{x} -> {r}");
        }
        assert_eq!(wrap(-0.25), 0.75);
    }

    #[test]
    fn phase_round_trip_is_exact_for_typical_values() {
        for x in [0.5, 0.1, 0.314214, 1e-9, 0.999_999_999_999] {
            assert_eq!(Phase::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn ratio_phase_matches_float() {
        let p = Phase::from_ratio(1, 3);
        assert!((p.to_f64() - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(Phase::from_ratio(-1, 4), Phase::from_f64(0.75));
    }

    #[test]
    fn signed_representative() {
        assert_eq!(Phase::from_f64(0.75).signed(), -0.25);
        assert_eq!(Phase::from_f64(0.25).signed(), 0.25);
    }

    #[test]
    fn inverse_is_exact() {
        let t = IntMat2::new(2, 1, 1, 1);
        assert_eq!(t.mul(&t.inverse()), IntMat2::IDENTITY);
        let r = IntMat2::new(1, 2, 1, 1);
        assert_eq!(r.det(), -1);
        assert_eq!(r.inverse().mul(&r), IntMat2::IDENTITY);
    }

    #[test]
    fn cat_map_norm() {
        let t = IntMat2::new(2, 1, 1, 1);
        assert!((t.op_norm() - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn torus_distance_uses_nearest_translate() {
        let x = [Phase::from_f64(0.05), Phase::from_f64(0.95)];
        let y = [Phase::from_f64(0.95), Phase::from_f64(0.05)];
        assert!((torus_distance(x, y) - (0.02f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn centered_residue() {
        assert_eq!(centered(7, 10), -3);
        assert_eq!(centered(5, 10), 5);
        assert_eq!(centered(-12, 10), -2);
    }
}
