use core::iter::Sum;
use core::ops::{Add, AddAssign, Div, Mul, Sub};

/// Decimal gigabyte. Bandwidths and corpus sizes use decimal units.
pub const GB: u64 = 1_000_000_000;
/// Binary gibibyte, used for DRAM densities.
pub const GIB: u64 = 1 << 30;

/// A simulated duration in nanoseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Nanos(pub f64);

impl Nanos {
    pub const ZERO: Nanos = Nanos(0.0);

    pub fn from_us(us: f64) -> Self {
        Nanos(us * 1e3)
    }

    pub fn from_ms(ms: f64) -> Self {
        Nanos(ms * 1e6)
    }

    pub fn from_secs(s: f64) -> Self {
        Nanos(s * 1e9)
    }

    /// Time to move `bytes` at `bytes_per_sec`.
    pub fn for_bytes(bytes: f64, bytes_per_sec: f64) -> Self {
        Nanos(bytes / bytes_per_sec * 1e9)
    }

    pub fn as_ns(self) -> f64 {
        self.0
    }

    pub fn as_us(self) -> f64 {
        self.0 / 1e3
    }

    pub fn as_ms(self) -> f64 {
        self.0 / 1e6
    }

    pub fn as_secs(self) -> f64 {
        self.0 / 1e9
    }

    pub fn max(self, other: Nanos) -> Nanos {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }
}

impl Add for Nanos {
    type Output = Nanos;
    fn add(self, rhs: Nanos) -> Nanos {
        Nanos(self.0 + rhs.0)
    }
}

impl AddAssign for Nanos {
    fn add_assign(&mut self, rhs: Nanos) {
        self.0 += rhs.0;
    }
}

impl Sub for Nanos {
    type Output = Nanos;
    fn sub(self, rhs: Nanos) -> Nanos {
        Nanos(self.0 - rhs.0)
    }
}

impl Mul<f64> for Nanos {
    type Output = Nanos;
    fn mul(self, rhs: f64) -> Nanos {
        Nanos(self.0 * rhs)
    }
}

impl Div<f64> for Nanos {
    type Output = Nanos;
    fn div(self, rhs: f64) -> Nanos {
        Nanos(self.0 / rhs)
    }
}

impl Sum for Nanos {
    fn sum<I: Iterator<Item = Nanos>>(iter: I) -> Nanos {
        iter.fold(Nanos::ZERO, Add::add)
    }
}
