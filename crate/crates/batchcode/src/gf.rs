//! Prime fields GF(p) and quadratic extensions GF(p²).
//!
//! An extension element is a pair `(a, b)` standing for `a + b·α` where
//! `α² = n0` and `n0` is the least quadratic nonresidue mod p. Elements carry
//! their field; arithmetic between elements of different fields panics rather
//! than coercing.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("quadratic extension requires an odd prime, got {0}")]
    EvenExtension(u64),
    #[error("prime {0} too large for a quadratic extension")]
    ExtensionTooLarge(u64),
    #[error("frobenius is defined only on quadratic-extension elements")]
    NotExtension,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// Deterministic Miller-Rabin, exact for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Least quadratic nonresidue mod an odd prime p, via Euler's criterion.
fn least_nonresidue(p: u64) -> u64 {
    (2..p)
        .find(|&a| pow_mod(a, (p - 1) / 2, p) == p - 1)
        .expect("every odd prime has a nonresidue")
}

/// Least quadratic nonresidue mod an odd prime, for callers building
/// irreducible quadratic forms.
pub fn least_nonresidue_of(p: u64) -> u64 {
    assert!(is_prime(p) && p != 2, "expects an odd prime");
    least_nonresidue(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Prime,
    QuadraticExtension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Field {
    kind: FieldKind,
    p: u64,
    /// α² = nonresidue; 0 in prime fields.
    nonresidue: u64,
}

impl Field {
    /// Build GF(p) or, with `extension`, GF(p²) over an odd prime.
    pub fn new(p: u64, extension: bool) -> Result<Field, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if !extension {
            return Ok(Field {
                kind: FieldKind::Prime,
                p,
                nonresidue: 0,
            });
        }
        if p == 2 {
            return Err(GfError::EvenExtension(p));
        }
        if p.checked_mul(p).is_none() {
            return Err(GfError::ExtensionTooLarge(p));
        }
        Ok(Field {
            kind: FieldKind::QuadraticExtension,
            p,
            nonresidue: least_nonresidue(p),
        })
    }

    pub fn prime(p: u64) -> Result<Field, GfError> {
        Field::new(p, false)
    }

    pub fn quadratic(p: u64) -> Result<Field, GfError> {
        Field::new(p, true)
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn is_extension(&self) -> bool {
        self.kind == FieldKind::QuadraticExtension
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    /// Number of elements: p or p².
    pub fn order(&self) -> u64 {
        match self.kind {
            FieldKind::Prime => self.p,
            FieldKind::QuadraticExtension => self.p * self.p,
        }
    }

    pub fn nonresidue(&self) -> Option<u64> {
        match self.kind {
            FieldKind::Prime => None,
            FieldKind::QuadraticExtension => Some(self.nonresidue),
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: *self,
            a: 0,
            b: 0,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            field: *self,
            a: 1 % self.p,
            b: 0,
        }
    }

    /// Element from a base-field residue (the α coordinate stays 0).
    pub fn elem(&self, a: u64) -> FieldElement {
        FieldElement {
            field: *self,
            a: a % self.p,
            b: 0,
        }
    }

    /// Extension element a + b·α. Panics on a prime field when b ≠ 0.
    pub fn elem2(&self, a: u64, b: u64) -> FieldElement {
        assert!(
            self.is_extension() || b.is_multiple_of(self.p),
            "α coordinate on a prime field"
        );
        FieldElement {
            field: *self,
            a: a % self.p,
            b: b % self.p,
        }
    }

    /// Lift a prime-field element into this quadratic extension of the same
    /// characteristic. The only sanctioned cross-field conversion.
    pub fn embed(&self, x: FieldElement) -> FieldElement {
        assert!(
            self.is_extension() && x.field.kind == FieldKind::Prime && x.field.p == self.p,
            "embed expects a base-field element of matching characteristic"
        );
        FieldElement {
            field: *self,
            a: x.a,
            b: 0,
        }
    }

    /// The i-th element in (a, b)-lexicographic order; prime fields are
    /// enumerated as 0, 1, ..., p-1.
    pub fn element_at(&self, index: u64) -> FieldElement {
        assert!(index < self.order(), "element index out of range");
        match self.kind {
            FieldKind::Prime => self.elem(index),
            FieldKind::QuadraticExtension => self.elem2(index / self.p, index % self.p),
        }
    }

    /// Inverse of [`Field::element_at`].
    pub fn index_of(&self, x: FieldElement) -> u64 {
        assert_eq!(*self, x.field, "element of a different field");
        match self.kind {
            FieldKind::Prime => x.a,
            FieldKind::QuadraticExtension => x.a * self.p + x.b,
        }
    }

    /// All elements in (a, b)-lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |i| self.element_at(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: Field,
    a: u64,
    b: u64,
}

impl FieldElement {
    pub fn field(&self) -> Field {
        self.field
    }

    /// Canonical coordinates (a, b) with the element equal to a + b·α.
    pub fn coords(&self) -> (u64, u64) {
        (self.a, self.b)
    }

    /// The base coordinate; for Frobenius-fixed extension elements this is
    /// the value as a base-field residue.
    pub fn base_coord(&self) -> u64 {
        self.a
    }

    /// True when the α coordinate vanishes, i.e. the element lies in the
    /// base field.
    pub fn in_base_field(&self) -> bool {
        self.b == 0
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn pow(&self, mut exp: u64) -> FieldElement {
        let mut acc = self.field.one();
        let mut base = *self;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, via x^(order-2).
    pub fn inv(&self) -> Result<FieldElement, GfError> {
        if self.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        Ok(self.pow(self.field.order() - 2))
    }

    /// The involutive automorphism x ↦ x^p of GF(p²), fixing exactly GF(p).
    /// Computed as conjugation a + b·α ↦ a - b·α.
    pub fn frobenius(&self) -> Result<FieldElement, GfError> {
        if !self.field.is_extension() {
            return Err(GfError::NotExtension);
        }
        let p = self.field.p;
        Ok(FieldElement {
            field: self.field,
            a: self.a,
            b: (p - self.b) % p,
        })
    }

    fn assert_same_field(&self, other: &FieldElement) {
        assert_eq!(
            self.field, other.field,
            "arithmetic between different fields"
        );
    }
}

impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(&rhs);
        let p = self.field.p;
        FieldElement {
            field: self.field,
            a: (self.a + rhs.a) % p,
            b: (self.b + rhs.b) % p,
        }
    }
}

impl std::ops::Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(&rhs);
        let p = self.field.p;
        FieldElement {
            field: self.field,
            a: (self.a + p - rhs.a) % p,
            b: (self.b + p - rhs.b) % p,
        }
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.field.zero() - self
    }
}

impl std::ops::Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(&rhs);
        let p = self.field.p;
        match self.field.kind {
            FieldKind::Prime => FieldElement {
                field: self.field,
                a: mul_mod(self.a, rhs.a, p),
                b: 0,
            },
            FieldKind::QuadraticExtension => {
                // (a + bα)(c + dα) = ac + n0·bd + (ad + bc)α
                let n0 = self.field.nonresidue;
                let ac = mul_mod(self.a, rhs.a, p);
                let bd = mul_mod(self.b, rhs.b, p);
                let ad = mul_mod(self.a, rhs.b, p);
                let bc = mul_mod(self.b, rhs.a, p);
                FieldElement {
                    field: self.field,
                    a: (ac + mul_mod(n0, bd, p)) % p,
                    b: (ad + bc) % p,
                }
            }
        }
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.field.is_extension() {
            write!(f, "({},{})", self.a, self.b)
        } else {
            write!(f, "{}", self.a)
        }
    }
}
