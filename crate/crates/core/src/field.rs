//! GF(2^m) arithmetic with log/antilog tables, and polynomials over GF(2).

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Conventional primitive polynomial for each `m` in `2..=16`, bit `i` holding
/// the coefficient of `x^i`.
pub fn default_primitive_polynomial(m: u32) -> Option<u32> {
    Some(match m {
        2 => 0x7,
        3 => 0xB,
        4 => 0x13,
        5 => 0x25,
        6 => 0x43,
        7 => 0x89,
        8 => 0x11D,
        9 => 0x211,
        10 => 0x409,
        11 => 0x805,
        12 => 0x1053,
        13 => 0x201B,
        14 => 0x4443,
        15 => 0x8003,
        16 => 0x1100B,
        _ => return None,
    })
}

/// The field GF(2^m) generated by a root `α` of a primitive polynomial.
///
/// Elements are `u32` values whose bit `j` is the coefficient of `α^j` in the
/// polynomial basis.
#[derive(Clone, Debug)]
pub struct BinaryField {
    m: u32,
    poly: u32,
    order: usize,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl BinaryField {
    /// GF(2^m) with the default primitive polynomial.
    pub fn new(m: u32) -> Result<Self> {
        let poly = default_primitive_polynomial(m)
            .ok_or_else(|| Error::Field(format!("no default primitive polynomial for m = {m}")))?;
        Self::with_polynomial(m, poly)
    }

    /// GF(2^m) defined by `poly`, which must be primitive of degree `m`.
    pub fn with_polynomial(m: u32, poly: u32) -> Result<Self> {
        if !(2..=MAX_DEGREE).contains(&m) {
            return Err(Error::Field(format!("m = {m} outside 2..={MAX_DEGREE}")));
        }
        if poly >> m != 1 {
            return Err(Error::Field(format!("polynomial {poly:#x} does not have degree {m}")));
        }
        let order = (1usize << m) - 1;
        let mut exp = vec![0u32; 2 * order];
        let mut log = vec![u32::MAX; order + 1];
        let mut x = 1u32;
        for i in 0..order {
            if log[x as usize] != u32::MAX {
                return Err(Error::Field(format!(
                    "polynomial {poly:#x} is not primitive: alpha has order {i}"
                )));
            }
            exp[i] = x;
            log[x as usize] = i as u32;
            x <<= 1;
            if x >> m & 1 == 1 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::Field(format!("polynomial {poly:#x} is not primitive")));
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self {
            m,
            poly,
            order,
            exp,
            log,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn primitive_polynomial(&self) -> u32 {
        self.poly
    }

    /// Multiplicative order `2^m - 1`, which is also the BCH code length.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `α^i` for any integer exponent.
    #[inline]
    pub fn alpha_pow(&self, i: i64) -> u32 {
        self.exp[i.rem_euclid(self.order as i64) as usize]
    }

    /// Discrete logarithm base `α`; `None` for zero.
    #[inline]
    pub fn log(&self, x: u32) -> Option<usize> {
        if x == 0 {
            None
        } else {
            Some(self.log[x as usize] as usize)
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "zero has no inverse");
        self.exp[(self.order - self.log[a as usize] as usize) % self.order]
    }

    #[inline]
    pub fn div(&self, a: u32, b: u32) -> u32 {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = self.log[a as usize] as u64;
        self.exp[((l * (e % self.order as u64)) % self.order as u64) as usize]
    }

    /// The cyclotomic coset `{i, 2i, 4i, ...}` mod `2^m - 1`, in generation order.
    pub fn cyclotomic_coset(&self, i: usize) -> Vec<usize> {
        let mut coset = vec![i % self.order];
        let mut j = (2 * i) % self.order;
        while j != coset[0] {
            coset.push(j);
            j = (2 * j) % self.order;
        }
        coset
    }

    /// Minimal polynomial of `a` over GF(2).
    pub fn minimal_polynomial(&self, a: u32) -> Gf2Poly {
        let Some(l) = self.log(a) else {
            return Gf2Poly::x();
        };
        // multiply out prod (x + α^j) over the conjugates of a
        let mut coeffs: Vec<u32> = vec![1];
        for j in self.cyclotomic_coset(l) {
            let root = self.exp[j];
            let mut next = vec![0u32; coeffs.len() + 1];
            for (d, &c) in coeffs.iter().enumerate() {
                next[d + 1] ^= c;
                next[d] ^= self.mul(c, root);
            }
            coeffs = next;
        }
        let mut p = Gf2Poly::zero();
        for (d, &c) in coeffs.iter().enumerate() {
            debug_assert!(c <= 1, "minimal polynomial coefficient outside GF(2)");
            if c == 1 {
                p.set_coeff(d, true);
            }
        }
        p
    }
}

/// A polynomial over GF(2), bit `i` holding the coefficient of `x^i`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly {
    words: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_u64(1)
    }

    pub fn x() -> Self {
        Self::from_u64(2)
    }

    pub fn from_u64(bits: u64) -> Self {
        let mut p = Self { words: vec![bits] };
        p.trim();
        p
    }

    /// Builds a polynomial from its coefficients, lowest degree first.
    pub fn from_coeffs(coeffs: &[bool]) -> Self {
        let mut p = Self::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            if c {
                p.set_coeff(i, true);
            }
        }
        p
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.words
            .last()
            .map(|&w| (self.words.len() - 1) * 64 + 63 - w.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    pub fn set_coeff(&mut self, i: usize, value: bool) {
        if i / 64 >= self.words.len() {
            if !value {
                return;
            }
            self.words.resize(i / 64 + 1, 0);
        }
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
            self.trim();
        }
    }

    /// Coefficients `0..=degree`, lowest first.
    pub fn coeffs(&self) -> Vec<bool> {
        match self.degree() {
            None => Vec::new(),
            Some(d) => (0..=d).map(|i| self.coeff(i)).collect(),
        }
    }

    pub fn add(&self, other: &Gf2Poly) -> Gf2Poly {
        let mut words = vec![0; self.words.len().max(other.words.len())];
        for (i, w) in words.iter_mut().enumerate() {
            *w = self.words.get(i).copied().unwrap_or(0) ^ other.words.get(i).copied().unwrap_or(0);
        }
        let mut p = Gf2Poly { words };
        p.trim();
        p
    }

    pub fn mul(&self, other: &Gf2Poly) -> Gf2Poly {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return Gf2Poly::zero();
        };
        let mut out = Gf2Poly {
            words: vec![0; (da + db) / 64 + 1],
        };
        for i in 0..=da {
            if self.coeff(i) {
                out.xor_shifted(other, i);
            }
        }
        out.trim();
        out
    }

    fn xor_shifted(&mut self, other: &Gf2Poly, shift: usize) {
        let need = other.degree().map_or(0, |d| (d + shift) / 64 + 1);
        if self.words.len() < need {
            self.words.resize(need, 0);
        }
        let (ws, bs) = (shift / 64, shift % 64);
        for (i, &w) in other.words.iter().enumerate() {
            self.words[i + ws] ^= w << bs;
            if bs != 0 && i + ws + 1 < self.words.len() {
                self.words[i + ws + 1] ^= w >> (64 - bs);
            }
        }
    }

    /// Quotient and remainder; panics when dividing by zero.
    pub fn divrem(&self, divisor: &Gf2Poly) -> (Gf2Poly, Gf2Poly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let mut rem = self.clone();
        let mut quo = Gf2Poly::zero();
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            quo.set_coeff(dr - dd, true);
            rem.xor_shifted(divisor, dr - dd);
            rem.trim();
        }
        (quo, rem)
    }

    pub fn rem(&self, divisor: &Gf2Poly) -> Gf2Poly {
        self.divrem(divisor).1
    }

    pub fn gcd(&self, other: &Gf2Poly) -> Gf2Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    pub fn lcm(&self, other: &Gf2Poly) -> Gf2Poly {
        if self.is_zero() || other.is_zero() {
            return Gf2Poly::zero();
        }
        self.divrem(&self.gcd(other)).0.mul(other)
    }

    /// Evaluates the polynomial at a field element by Horner's rule.
    pub fn eval(&self, field: &BinaryField, x: u32) -> u32 {
        let Some(d) = self.degree() else {
            return 0;
        };
        let mut acc = 0u32;
        for i in (0..=d).rev() {
            acc = field.mul(acc, x) ^ u32::from(self.coeff(i));
        }
        acc
    }
}

/// Least common multiple of a list of polynomials (`1` for an empty list).
pub fn poly_lcm(polys: &[Gf2Poly]) -> Gf2Poly {
    polys.iter().fold(Gf2Poly::one(), |acc, p| acc.lcm(p))
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(d) = self.degree() else {
            return f.write_str("0");
        };
        let mut first = true;
        for i in (0..=d).rev().filter(|&i| self.coeff(i)) {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match i {
                0 => f.write_str("1")?,
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}
