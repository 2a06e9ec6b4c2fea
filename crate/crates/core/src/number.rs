use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Degree of belief attached to a typicality inclusion, in (1/2, 1].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Degree(BigRational);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NumberError {
    Degree,
    Probability,
    Syntax,
}

impl fmt::Display for NumberError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumberError::Degree => f.write_str("degree must be in (0.5,1]"),
            NumberError::Probability => f.write_str("probability must be in [0,1]"),
            NumberError::Syntax => f.write_str("malformed number"),
        }
    }
}

impl Degree {
    pub fn new(value: BigRational) -> Result<Self, NumberError> {
        let half = BigRational::new(1.into(), 2.into());
        if value > half && value <= BigRational::one() {
            Ok(Degree(value))
        } else {
            Err(NumberError::Degree)
        }
    }

    pub fn parse(text: &str) -> Result<Self, NumberError> {
        Degree::new(parse_number(text)?)
    }

    /// Skips the range check; [`crate::kb::validate`] reports out-of-range values.
    pub fn new_unchecked(value: BigRational) -> Self {
        Degree(value)
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn complement(&self) -> BigRational {
        BigRational::one() - &self.0
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&literal(&self.0))
    }
}

/// Probability in [0, 1].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Probability(BigRational);

impl Probability {
    pub fn new(value: BigRational) -> Result<Self, NumberError> {
        if !value.is_negative() && value <= BigRational::one() {
            Ok(Probability(value))
        } else {
            Err(NumberError::Probability)
        }
    }

    pub fn parse(text: &str) -> Result<Self, NumberError> {
        Probability::new(parse_number(text)?)
    }

    pub fn one() -> Self {
        Probability(BigRational::one())
    }

    pub fn zero() -> Self {
        Probability(BigRational::zero())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&literal(&self.0))
    }
}

/// Parses `123`, `0.95` or `2/3` exactly. Signs, exponents and bare dots are rejected.
pub fn parse_number(text: &str) -> Result<BigRational, NumberError> {
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if let Some((n, d)) = text.split_once('/') {
        if !digits(n) || !digits(d) {
            return Err(NumberError::Syntax);
        }
        let den: BigInt = d.parse().map_err(|_| NumberError::Syntax)?;
        if den.is_zero() {
            return Err(NumberError::Syntax);
        }
        let num: BigInt = n.parse().map_err(|_| NumberError::Syntax)?;
        return Ok(BigRational::new(num, den));
    }
    let (int, frac) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if !digits(int) || (text.contains('.') && !digits(frac)) {
        return Err(NumberError::Syntax);
    }
    let mut all = String::from(int);
    all.push_str(frac);
    let num: BigInt = all.parse().map_err(|_| NumberError::Syntax)?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Ok(BigRational::new(num, den))
}

/// Exact decimal expansion when the denominator has only factors 2 and 5.
pub fn exact_decimal(r: &BigRational) -> Option<String> {
    let mut den = r.denom().clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let scale = twos.max(fives);
    let scaled = r * BigRational::from_integer(num_traits::pow(BigInt::from(10), scale));
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let mut s = n.abs().to_string();
    if scale > 0 {
        while s.len() <= scale {
            s.insert(0, '0');
        }
        s.insert(s.len() - scale, '.');
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if neg {
        s.insert(0, '-');
    }
    Some(s)
}

/// Text literal accepted back by [`parse_number`].
pub fn literal(r: &BigRational) -> String {
    exact_decimal(r).unwrap_or_else(|| alloc::format!("{}/{}", r.numer(), r.denom()))
}

/// Decimal expansion truncated to `sig` significant digits (non-negative input).
pub fn truncated_decimal(r: &BigRational, sig: usize) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let ten = BigInt::from(10);
    let int = r.to_integer();
    let int_digits = if int.is_zero() { 0 } else { int.to_string().len() };
    let frac_places = if int_digits >= sig {
        0
    } else if int_digits > 0 {
        sig - int_digits
    } else {
        // leading zeros after the point
        let mut zeros = 0usize;
        while r * BigRational::from_integer(num_traits::pow(ten.clone(), zeros + 1))
            < BigRational::one()
        {
            zeros += 1;
        }
        zeros + sig
    };
    let scaled = r * BigRational::from_integer(num_traits::pow(ten, frac_places));
    let n = scaled.to_integer();
    let digits_str = n.to_string();
    let mut s = if frac_places == 0 {
        digits_str
    } else {
        let mut d: Vec<u8> = digits_str.into_bytes();
        while d.len() <= frac_places {
            d.insert(0, b'0');
        }
        let split = d.len() - frac_places;
        let mut out = String::from_utf8(d[..split].to_vec()).unwrap_or_default();
        out.push('.');
        out.push_str(core::str::from_utf8(&d[split..]).unwrap_or_default());
        out
    };
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}
