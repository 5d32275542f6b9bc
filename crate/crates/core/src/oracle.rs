//! Brute-force reference sums in double-double arithmetic.
//!
//! Nothing in here shares code with [`crate::qcore`] or [`crate::states`]:
//! q-numbers are summed term by term as `Σ_{k<n} q^k`, amplitudes follow the
//! linear recursion `c_n = c_{n-1} z / √[n]_q`, and normalization happens in
//! the linear domain. A fixed number of terms is summed, with no tail
//! estimate, so callers pick inputs where that count is ample.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`, about 32 significant digits.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        // one Newton step on the f64 estimate
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let residual = ((self.hi - p) - e) + self.lo;
        let (hi, lo) = quick_two_sum(x, residual / (2.0 * x));
        Self { hi, lo }
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Self::new(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Self::new(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::new(q3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct ComplexDd {
    re: DoubleDouble,
    im: DoubleDouble,
}

impl ComplexDd {
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    fn scale(self, s: DoubleDouble) -> Self {
        Self {
            re: self.re * s,
            im: self.im * s,
        }
    }

    /// `conj(self) · o`
    fn conj_mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re + self.im * o.im,
            im: self.re * o.im - self.im * o.re,
        }
    }

    fn norm_sqr(self) -> DoubleDouble {
        self.re * self.re + self.im * self.im
    }

    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

/// Number of Fock terms the oracle sums.
pub const ORACLE_TERMS: usize = 200;

/// Reference moments of the coherent state at `(q, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMoments {
    pub normalization: f64,
    pub p0: f64,
    pub mean_n: f64,
    pub var_n: f64,
    pub mean_b: (f64, f64),
    pub mean_b2: (f64, f64),
    pub mean_x: f64,
    pub var_x: f64,
    pub snr: f64,
}

/// `[n]_q` as the explicit sum `1 + q + … + q^{n-1}`.
fn bracket_by_sum(q: DoubleDouble, n: usize) -> DoubleDouble {
    let mut acc = DoubleDouble::ZERO;
    let mut power = DoubleDouble::ONE;
    for _ in 0..n {
        acc = acc + power;
        power = power * q;
    }
    acc
}

/// Sum of `tⁿ/[n]_q!` over the first `terms` indices.
pub fn q_exponential_sum(q: f64, t: f64, terms: usize) -> f64 {
    let q = DoubleDouble::new(q);
    let t = DoubleDouble::new(t);
    let mut term = DoubleDouble::ONE;
    let mut acc = DoubleDouble::ONE;
    for n in 1..terms {
        term = term * t / bracket_by_sum(q, n);
        acc = acc + term;
    }
    acc.to_f64()
}

/// Sum of `tⁿ/[n]_q!` over indices `from..from+count`, relative to the sum
/// over `0..from`.
pub fn relative_tail_sum(q: f64, t: f64, from: usize, count: usize) -> f64 {
    let qd = DoubleDouble::new(q);
    let td = DoubleDouble::new(t);
    let mut term = DoubleDouble::ONE;
    let mut head = DoubleDouble::ONE;
    let mut tail = DoubleDouble::ZERO;
    for n in 1..from + count {
        term = term * td / bracket_by_sum(qd, n);
        if n < from {
            head = head + term;
        } else {
            tail = tail + term;
        }
    }
    (tail / head).to_f64()
}

/// Brute-force moments over [`ORACLE_TERMS`] Fock states.
pub fn moments(q: f64, z: (f64, f64)) -> OracleMoments {
    moments_with_terms(q, z, ORACLE_TERMS)
}

pub fn moments_with_terms(q: f64, z: (f64, f64), terms: usize) -> OracleMoments {
    let qd = DoubleDouble::new(q);
    let zd = ComplexDd {
        re: DoubleDouble::new(z.0),
        im: DoubleDouble::new(z.1),
    };
    let mut amps = Vec::with_capacity(terms);
    amps.push(ComplexDd {
        re: DoubleDouble::ONE,
        im: DoubleDouble::ZERO,
    });
    for n in 1..terms {
        let prev = amps[n - 1];
        amps.push(prev.mul(zd).scale(DoubleDouble::ONE / bracket_by_sum(qd, n).sqrt()));
    }

    let norm = amps
        .iter()
        .fold(DoubleDouble::ZERO, |acc, c| acc + c.norm_sqr());
    let probs: Vec<DoubleDouble> = amps.iter().map(|c| c.norm_sqr() / norm).collect();

    let mut mean = DoubleDouble::ZERO;
    let mut second = DoubleDouble::ZERO;
    for (n, p) in probs.iter().enumerate() {
        let nd = DoubleDouble::new(n as f64);
        mean = mean + nd * *p;
        second = second + nd * nd * *p;
    }
    let var_n = second - mean * mean;

    let mut b = ComplexDd::default();
    let mut b2 = ComplexDd::default();
    for n in 0..terms {
        if n + 1 < terms {
            let w = DoubleDouble::new((n + 1) as f64).sqrt();
            b = b.add(amps[n].conj_mul(amps[n + 1]).scale(w));
        }
        if n + 2 < terms {
            let w = DoubleDouble::new(((n + 1) * (n + 2)) as f64).sqrt();
            b2 = b2.add(amps[n].conj_mul(amps[n + 2]).scale(w));
        }
    }
    let b = b.scale(DoubleDouble::ONE / norm);
    let b2 = b2.scale(DoubleDouble::ONE / norm);

    let half = DoubleDouble::new(0.5);
    let two = DoubleDouble::new(2.0);
    let var_x = half + mean + b2.re - two * b.re * b.re;
    let mean_x = two.sqrt() * b.re;
    OracleMoments {
        normalization: norm.to_f64(),
        p0: probs[0].to_f64(),
        mean_n: mean.to_f64(),
        var_n: var_n.to_f64(),
        mean_b: (b.re.to_f64(), b.im.to_f64()),
        mean_b2: (b2.re.to_f64(), b2.im.to_f64()),
        mean_x: mean_x.to_f64(),
        var_x: var_x.to_f64(),
        snr: (mean_x * mean_x / var_x).to_f64(),
    }
}

/// Norm of `(a - z)ψ` for the truncated, normalized state, with the deformed
/// ladder `a|n⟩ = √[n]_q |n-1⟩`.
pub fn annihilator_residual(q: f64, z: (f64, f64), terms: usize) -> f64 {
    let qd = DoubleDouble::new(q);
    let zd = ComplexDd {
        re: DoubleDouble::new(z.0),
        im: DoubleDouble::new(z.1),
    };
    let mut amps = vec![ComplexDd {
        re: DoubleDouble::ONE,
        im: DoubleDouble::ZERO,
    }];
    for n in 1..terms {
        let prev = amps[n - 1];
        amps.push(prev.mul(zd).scale(DoubleDouble::ONE / bracket_by_sum(qd, n).sqrt()));
    }
    let norm = amps
        .iter()
        .fold(DoubleDouble::ZERO, |acc, c| acc + c.norm_sqr())
        .sqrt();
    let mut acc = DoubleDouble::ZERO;
    for n in 0..terms {
        let lowered = if n + 1 < terms {
            amps[n + 1].scale(bracket_by_sum(qd, n + 1).sqrt())
        } else {
            ComplexDd::default()
        };
        let shifted = amps[n].mul(zd);
        let diff = ComplexDd {
            re: lowered.re - shifted.re,
            im: lowered.im - shifted.im,
        };
        acc = acc + diff.norm_sqr();
    }
    (acc.sqrt() / norm).to_f64()
}
