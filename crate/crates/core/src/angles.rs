//! Exact y-axis rotation angles.
//!
//! A [`RationalAngle`] is `p/q·π` with `p/q` in lowest terms. Equality is taken
//! modulo a full turn (2π), which is the granularity at which two rotations act
//! identically on states up to global phase. The stored representative is kept
//! modulo 4π, the true period of `R_y`, so [`RyGate::matrix`] is exact and
//! composition is a group homomorphism on matrices, not just on rays.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use nalgebra::Matrix2;
use thiserror::Error;

/// Largest reduced denominator an angle may carry.
pub const MAX_DENOMINATOR: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AngleError {
    #[error("angle denominator is zero")]
    ZeroDenominator,
    #[error("reduced denominator {0} exceeds the supported limit of {MAX_DENOMINATOR}")]
    CapacityExceeded(i128),
    #[error("cannot parse angle {0:?}")]
    Parse(String),
}

/// A rotation angle `numerator/denominator · π`.
#[derive(Debug, Clone, Copy)]
pub struct RationalAngle {
    num: i64,
    den: i64,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl RationalAngle {
    pub const ZERO: RationalAngle = RationalAngle { num: 0, den: 1 };
    pub const PI: RationalAngle = RationalAngle { num: 1, den: 1 };

    /// Builds `num/den · π`, reducing the fraction and wrapping it into `(-2, 2]`.
    pub fn new(num: i64, den: i64) -> Result<Self, AngleError> {
        Self::from_wide(num as i128, den as i128)
    }

    fn from_wide(num: i128, den: i128) -> Result<Self, AngleError> {
        if den == 0 {
            return Err(AngleError::ZeroDenominator);
        }
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(num, den);
        num /= g;
        den /= g;
        if den > MAX_DENOMINATOR as i128 {
            return Err(AngleError::CapacityExceeded(den));
        }
        // representative in (-2, 2] turns of π, i.e. modulo 4π
        let period = 4 * den;
        let mut r = num.rem_euclid(period);
        if r > 2 * den {
            r -= period;
        }
        Ok(RationalAngle {
            num: r as i64,
            den: den as i64,
        })
    }

    /// `π/k`, the argument of `U_k`.
    pub fn pi_over(k: i64) -> Result<Self, AngleError> {
        Self::new(1, k)
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    /// Sum of two angles (rotation composition).
    pub fn compose(self, other: RationalAngle) -> Result<Self, AngleError> {
        let num = self.num as i128 * other.den as i128 + other.num as i128 * self.den as i128;
        let den = self.den as i128 * other.den as i128;
        Self::from_wide(num, den)
    }

    /// Angle of the adjoint rotation.
    pub fn invert(self) -> Self {
        Self::from_wide(-(self.num as i128), self.den as i128)
            .expect("negation never grows the denominator")
    }

    /// `m`-fold composition; negative `m` is the adjoint power.
    ///
    /// Scaling cannot enlarge a reduced denominator, so the capacity limit that
    /// guards [`compose`](Self::compose) never triggers here.
    pub fn scale(self, m: i64) -> Self {
        let num = (self.num as i128 * m as i128).rem_euclid(4 * self.den as i128);
        Self::from_wide(num, self.den as i128).expect("scaling never grows the denominator")
    }

    /// If the angle is an integer multiple `m·π`, returns `m mod 2`, i.e. which
    /// computational basis state `R_y(angle)|0⟩` lands on.
    pub fn classify_pole(&self) -> Option<bool> {
        (self.den == 1).then(|| self.num.rem_euclid(2) == 1)
    }

    pub fn is_zero(&self) -> bool {
        self.num.rem_euclid(2 * self.den) == 0
    }

    /// True when the representatives agree modulo 4π, i.e. the rotation
    /// matrices are identical rather than equal up to sign.
    pub fn same_unitary(&self, other: &RationalAngle) -> bool {
        self.num == other.num && self.den == other.den
    }

    pub fn radians(&self) -> f64 {
        std::f64::consts::PI * self.num as f64 / self.den as f64
    }

    /// Numerator reduced into `[0, 2·den)`: the canonical key modulo 2π.
    fn turn_class(&self) -> i64 {
        self.num.rem_euclid(2 * self.den)
    }

    /// Renders the angle as an OpenQASM 2.0 expression (`pi/2`, `-3*pi/4`, `0`).
    pub fn to_qasm(&self) -> String {
        let sign = if self.num < 0 { "-" } else { "" };
        let p = self.num.unsigned_abs();
        match (p, self.den) {
            (0, _) => "0".to_string(),
            (1, 1) => format!("{sign}pi"),
            (p, 1) => format!("{sign}{p}*pi"),
            (1, q) => format!("{sign}pi/{q}"),
            (p, q) => format!("{sign}{p}*pi/{q}"),
        }
    }

    /// Parses the expressions produced by [`to_qasm`](Self::to_qasm).
    pub fn from_qasm(text: &str) -> Result<Self, AngleError> {
        let err = || AngleError::Parse(text.to_string());
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "0" {
            return Ok(Self::ZERO);
        }
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.as_str()),
        };
        let (head, den) = match body.split_once('/') {
            Some((h, d)) => (h, d.parse::<i64>().map_err(|_| err())?),
            None => (body, 1),
        };
        let num = if head == "pi" {
            1
        } else {
            head.strip_suffix("*pi")
                .ok_or_else(err)?
                .parse::<i64>()
                .map_err(|_| err())?
        };
        Self::new(if neg { -num } else { num }, den)
    }
}

impl PartialEq for RationalAngle {
    fn eq(&self, other: &Self) -> bool {
        self.den == other.den && self.turn_class() == other.turn_class()
    }
}

impl Eq for RationalAngle {}

impl Hash for RationalAngle {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.den.hash(state);
        self.turn_class().hash(state);
    }
}

impl Default for RationalAngle {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}·π", self.num)
        } else {
            write!(f, "{}/{}·π", self.num, self.den)
        }
    }
}

impl FromStr for RationalAngle {
    type Err = AngleError;

    /// Accepts `p/q·π`, `p·π`, the ASCII spellings `p/q*pi` / `p*pi`, and `0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || AngleError::Parse(s.to_string());
        let t = s.trim();
        if t == "0" {
            return Ok(Self::ZERO);
        }
        let frac = ["·π", "*π", "*pi", "π", "pi"]
            .iter()
            .find_map(|suffix| t.strip_suffix(suffix))
            .ok_or_else(err)?
            .trim();
        let (num, den) = match frac.split_once('/') {
            Some((p, q)) => (
                p.trim().parse::<i64>().map_err(|_| err())?,
                q.trim().parse::<i64>().map_err(|_| err())?,
            ),
            None if frac.is_empty() => (1, 1),
            None if frac == "-" => (-1, 1),
            None => (frac.parse::<i64>().map_err(|_| err())?, 1),
        };
        Self::new(num, den)
    }
}

/// A rotation `R_y(angle)` about the y axis of the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RyGate {
    angle: RationalAngle,
}

impl RyGate {
    pub fn new(angle: RationalAngle) -> Self {
        RyGate { angle }
    }

    /// `U_k = R_y(π/k)`.
    pub fn u(k: i64) -> Result<Self, AngleError> {
        Ok(Self::new(RationalAngle::pi_over(k)?))
    }

    /// `V = R_y(π)`.
    pub fn v() -> Self {
        Self::new(RationalAngle::PI)
    }

    pub fn angle(&self) -> RationalAngle {
        self.angle
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.angle.invert())
    }

    /// `[[cos(θ/2), −sin(θ/2)], [sin(θ/2), cos(θ/2)]]`.
    pub fn matrix(&self) -> Matrix2<f64> {
        let (s, c) = (self.angle.radians() / 2.0).sin_cos();
        Matrix2::new(c, -s, s, c)
    }
}

impl fmt::Display for RyGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R_y({})", self.angle)
    }
}
