//! Floer-theoretic bookkeeping for symmetric periodic orbits.
//!
//! Orbit types and their covers give Conley-Zehnder parities and the
//! good/bad distinction, hence the SFT Euler characteristic. Symmetric
//! chords carry a Hörmander index computed from Chebyshev polynomials in the
//! `A` block; together with the parity it gives a unit Gaussian integer whose
//! sum is the real Euler characteristic.

use std::fmt;
use std::ops::{Add, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::symplectic::{classify_region, git_point_from_multipliers, GitPoint, InvolutionBlocks, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> i64 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Whether `t` is a nondegenerate simple-orbit type in dimension `dim`.
pub fn is_orbit_type(t: Region, dim: u32) -> bool {
    match dim {
        4 => matches!(t, Region::Elliptic | Region::PosHyp | Region::NegHyp),
        6 => matches!(
            t,
            Region::E2 | Region::EHplus | Region::EHminus | Region::Hpp | Region::Hmm | Region::Hmp | Region::N
        ),
        _ => false,
    }
}

/// Type of the `k`-fold cover of an orbit of type `t`, from the sign rules
/// `(-1)^k` on negative real multipliers.
///
/// Elliptic types keep their label; whether a particular cover is degenerate
/// depends on the rotation angle and needs [`cover_type`].
pub fn symbolic_cover_type(t: Region, k: u32) -> Region {
    if k % 2 == 1 {
        return t;
    }
    match t {
        Region::NegHyp => Region::PosHyp,
        Region::EHminus => Region::EHplus,
        Region::Hmm | Region::Hmp => Region::Hpp,
        other => other,
    }
}

/// Classifies the `k`-th powers of the reduced multipliers of a simple orbit.
///
/// Two multipliers give a planar type, four give a spatial one. Returns
/// `Region::Degenerate` if some `λ^k` lies within `boundary_tol` of 1.
pub fn cover_type(simple_multipliers: &[Complex64], k: u32, boundary_tol: f64) -> Result<Region> {
    if k == 0 {
        return Err(Error::InvalidConfig("cover index must be positive".into()));
    }
    let powers: Vec<Complex64> = simple_multipliers.iter().map(|z| z.powu(k)).collect();
    if powers.iter().any(|z| (z - 1.0).norm() <= boundary_tol) {
        return Ok(Region::Degenerate);
    }
    match powers.len() {
        2 => {
            let trace = (powers[0] + powers[1]).re;
            Ok(classify_region(GitPoint::new(trace, 0.0), 1, boundary_tol)?.region)
        }
        4 => {
            let p = git_point_from_multipliers(&powers)?;
            Ok(classify_region(p, 2, boundary_tol)?.region)
        }
        _ => Err(Error::NotReciprocalPairs),
    }
}

/// Conley-Zehnder parity of a nondegenerate orbit type.
pub fn cz_parity(t: Region) -> Result<Parity> {
    match t {
        Region::Elliptic | Region::NegHyp => Ok(Parity::Odd),
        Region::PosHyp => Ok(Parity::Even),
        Region::Hmm | Region::EHminus | Region::E2 | Region::Hpp | Region::N => Ok(Parity::Even),
        Region::Hmp | Region::EHplus => Ok(Parity::Odd),
        _ => Err(Error::DegenerateType),
    }
}

/// A (possibly multiply covered) periodic orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTypeEntry {
    pub dim: u32,
    pub simple_type: Region,
    #[serde(default = "one")]
    pub k: u32,
    /// Reduced multipliers of the simple orbit as `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simple_multipliers: Option<Vec<[f64; 2]>>,
}

fn one() -> u32 {
    1
}

impl OrbitTypeEntry {
    pub fn new(dim: u32, simple_type: Region, k: u32) -> Self {
        Self {
            dim,
            simple_type,
            k,
            simple_multipliers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !is_orbit_type(self.simple_type, self.dim) {
            return Err(Error::InvalidConfig(format!(
                "{} is not a simple orbit type in dimension {}",
                self.simple_type, self.dim
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("cover index must be positive".into()));
        }
        Ok(())
    }

    pub fn cover_type(&self, boundary_tol: f64) -> Result<Region> {
        self.validate()?;
        match &self.simple_multipliers {
            Some(ms) => {
                let ms: Vec<Complex64> = ms.iter().map(|z| Complex64::new(z[0], z[1])).collect();
                cover_type(&ms, self.k, boundary_tol)
            }
            None => Ok(symbolic_cover_type(self.simple_type, self.k)),
        }
    }

    pub fn cz_parity(&self, boundary_tol: f64) -> Result<Parity> {
        cz_parity(self.cover_type(boundary_tol)?)
    }

    pub fn is_good(&self, boundary_tol: f64) -> Result<bool> {
        let cover = self.cover_type(boundary_tol)?;
        Ok(is_good(self.dim, self.simple_type, self.k, cover))
    }
}

/// Even covers of negative hyperbolic directions whose cover gains a
/// positive hyperbolic pair are bad; everything else is good.
pub fn is_good(dim: u32, simple_type: Region, k: u32, cover: Region) -> bool {
    if k % 2 == 1 {
        return true;
    }
    let bad = match dim {
        4 => simple_type == Region::NegHyp && cover == Region::PosHyp,
        6 => {
            (simple_type == Region::EHminus && cover == Region::EHplus)
                || (simple_type == Region::Hmp && cover == Region::Hpp)
        }
        _ => false,
    };
    !bad
}

/// A symmetric chord with its Conley-Zehnder parity and Hörmander index `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordEntry {
    pub cz_parity: Parity,
    pub s: f64,
}

impl ChordEntry {
    pub fn maslov_unit(&self) -> Result<GaussianInt> {
        chord_sign(self.cz_parity, self.s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LedgerEntry {
    Orbit(OrbitTypeEntry),
    Chord(ChordEntry),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OrbitLedger {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub entries: Vec<LedgerEntry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LedgerFile {
    List(Vec<LedgerEntry>),
    Labelled(OrbitLedger),
}

impl OrbitLedger {
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: LedgerFile = serde_json::from_str(text)?;
        Ok(match parsed {
            LedgerFile::List(entries) => OrbitLedger { label: None, entries },
            LedgerFile::Labelled(l) => l,
        })
    }

    pub fn orbits(&self) -> impl Iterator<Item = &OrbitTypeEntry> {
        self.entries.iter().filter_map(|e| match e {
            LedgerEntry::Orbit(o) => Some(o),
            LedgerEntry::Chord(_) => None,
        })
    }

    pub fn chords(&self) -> impl Iterator<Item = &ChordEntry> {
        self.entries.iter().filter_map(|e| match e {
            LedgerEntry::Chord(c) => Some(c),
            LedgerEntry::Orbit(_) => None,
        })
    }
}

/// `#(good, even) - #(good, odd)` over the orbit entries.
pub fn chi_sft(ledger: &OrbitLedger, boundary_tol: f64) -> Result<i64> {
    let mut total = 0;
    for (i, entry) in ledger.entries.iter().enumerate() {
        let LedgerEntry::Orbit(o) = entry else {
            return Err(Error::InvalidConfig(format!("entry {i} is a chord, not an orbit")));
        };
        let cover = o.cover_type(boundary_tol)?;
        let parity = cz_parity(cover).map_err(|_| Error::DegenerateEntry(i))?;
        if is_good(o.dim, o.simple_type, o.k, cover) {
            total += parity.sign();
        }
    }
    Ok(total)
}

/// A Gaussian integer `re + i im`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GaussianInt {
    pub re: i64,
    pub im: i64,
}

impl GaussianInt {
    pub const ONE: GaussianInt = GaussianInt { re: 1, im: 0 };
    pub const I: GaussianInt = GaussianInt { re: 0, im: 1 };

    pub fn new(re: i64, im: i64) -> Self {
        Self { re, im }
    }

    /// `i^m` for any integer `m`.
    pub fn i_pow(m: i64) -> Self {
        match m.rem_euclid(4) {
            0 => GaussianInt::new(1, 0),
            1 => GaussianInt::new(0, 1),
            2 => GaussianInt::new(-1, 0),
            _ => GaussianInt::new(0, -1),
        }
    }
}

impl Mul for GaussianInt {
    type Output = GaussianInt;
    fn mul(self, o: GaussianInt) -> GaussianInt {
        GaussianInt::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Add for GaussianInt {
    type Output = GaussianInt;
    fn add(self, o: GaussianInt) -> GaussianInt {
        GaussianInt::new(self.re + o.re, self.im + o.im)
    }
}

impl std::iter::Sum for GaussianInt {
    fn sum<I: Iterator<Item = GaussianInt>>(iter: I) -> Self {
        iter.fold(GaussianInt::default(), |a, b| a + b)
    }
}

impl fmt::Display for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re, self.im) {
            (r, 0) => write!(f, "{r}"),
            (0, i) => write!(f, "{i}i"),
            (r, i) if i < 0 => write!(f, "{r}-{}i", -i),
            (r, i) => write!(f, "{r}+{i}i"),
        }
    }
}

/// `2s` as an integer, if `s` is a multiple of one half.
pub fn twice_half_integer(s: f64) -> Result<i64> {
    let t = 2.0 * s;
    if !t.is_finite() || (t - t.round()).abs() > 1e-9 {
        return Err(Error::InvalidHalfInteger(s));
    }
    Ok(t.round() as i64)
}

/// `(-1)^{parity} i^{-2s}`.
pub fn chord_sign(parity: Parity, s: f64) -> Result<GaussianInt> {
    let unit = GaussianInt::i_pow(-twice_half_integer(s)?);
    Ok(match parity {
        Parity::Even => unit,
        Parity::Odd => unit * GaussianInt::new(-1, 0),
    })
}

pub fn chi_real<'a, I: IntoIterator<Item = &'a ChordEntry>>(chords: I) -> Result<GaussianInt> {
    chords.into_iter().map(|c| c.maslov_unit()).sum::<Result<GaussianInt>>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChebyshevKind {
    First,
    Second,
}

/// `T_k(A)` or `U_k(A)` by the three-term recursion `P_{k+1} = 2A P_k - P_{k-1}`.
pub fn chebyshev_matrix(kind: ChebyshevKind, k: u32, a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut prev = id.clone();
    if k == 0 {
        return prev;
    }
    let mut cur = match kind {
        ChebyshevKind::First => a.clone(),
        ChebyshevKind::Second => a * 2.0,
    };
    for _ in 1..k {
        let next = a * &cur * 2.0 - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

const INVERSE_CONDITION_LIMIT: f64 = 1e12;
const SIGNATURE_ZERO_TOL: f64 = 1e-10;

fn guarded_inverse(m: &DMatrix<f64>, err: Error) -> Result<DMatrix<f64>> {
    let cond = linalg::condition_number(m);
    if !cond.is_finite() || cond > INVERSE_CONDITION_LIMIT {
        return Err(err);
    }
    m.clone().try_inverse().ok_or(err)
}

/// Hörmander index `½ sign((I - T_k(A)) U_{k-1}(A)^{-1} C^{-1})` of the
/// `k`-th iterate of a symmetric orbit with blocks `(A, B, C)`.
pub fn hormander_index(blocks: &InvolutionBlocks, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidConfig("iterate must be positive".into()));
    }
    linalg::ensure_finite(&blocks.a)?;
    linalg::ensure_finite(&blocks.c)?;
    let n = blocks.n();
    let c_inv = guarded_inverse(&blocks.c, Error::SingularC)?;
    let u = chebyshev_matrix(ChebyshevKind::Second, k - 1, &blocks.a);
    let u_inv = guarded_inverse(&u, Error::SingularU { k })?;
    let t = chebyshev_matrix(ChebyshevKind::First, k, &blocks.a);
    let form = (DMatrix::<f64>::identity(n, n) - t) * u_inv * c_inv;
    let sig = linalg::signature(&form, SIGNATURE_ZERO_TOL).ok_or(Error::DegenerateIterate { k })?;
    Ok(sig as f64 / 2.0)
}
