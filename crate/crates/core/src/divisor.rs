//! Divisors on the Riemann sphere and the Coulomb gas quantities built on them.
//!
//! A divisor assigns a charge to finitely many points of the sphere. Growth
//! points carry the implicit charge `+1` and sit on the boundary of the
//! physical domain; marked points carry arbitrary charges and may sit anywhere,
//! including at infinity. All scalar outputs are absolute values evaluated in
//! log space, since the correlation itself is multivalued.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Two points closer than this are considered the same point.
pub const DISTINCT_TOL: f64 = 1e-12;
/// Tolerance for reflection symmetry and boundary membership.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Tolerance on the total charge.
pub const NEUTRALITY_TOL: f64 = 1e-9;
/// Required total charge of an admissible divisor.
pub const NEUTRAL_CHARGE: f64 = -2.0;

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn real(x: f64) -> Self {
        SpherePoint::Finite(Complex64::new(x, 0.0))
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    /// Reflection across the real line.
    pub fn conj(&self) -> Self {
        match *self {
            SpherePoint::Finite(z) => SpherePoint::Finite(z.conj()),
            SpherePoint::Infinity => SpherePoint::Infinity,
        }
    }

    /// Reflection across the unit circle, `z ↦ 1/z̄`, with `0 ↔ ∞`.
    pub fn invert(&self) -> Self {
        match *self {
            SpherePoint::Finite(z) if z.norm() == 0.0 => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::Finite(z / z.norm_sqr()),
            SpherePoint::Infinity => SpherePoint::Finite(Complex64::new(0.0, 0.0)),
        }
    }

    /// Reflection that fixes the boundary of `domain`.
    pub fn reflect(&self, domain: Domain) -> Self {
        match domain {
            Domain::HalfPlane => self.conj(),
            Domain::Disk => self.invert(),
        }
    }

    /// Equality up to `tol`, scaled by the modulus for large points.
    pub fn approx_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        match (self, other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => true,
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
                (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
            }
            _ => false,
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::Finite(z)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(z) => f.write_str(&format_complex(*z)),
            SpherePoint::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for SpherePoint {
    type Err = String;

    /// `inf` (or `∞`) or a complex literal.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(SpherePoint::Infinity),
            t => parse_complex(t)
                .filter(|z| z.is_finite())
                .map(SpherePoint::Finite)
                .ok_or_else(|| format!("malformed complex literal {s:?}")),
        }
    }
}

/// Formats `z` as `a+bi` with round-trip precision.
pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i` (with optional exponents).
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // Find the sign that separates the real and imaginary parts, skipping
    // signs that belong to an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse::<f64>().ok(),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().ok()?;
            let im = imag(&body[k..])?;
            Some(Complex64::new(re, im))
        }
        None => imag(body).map(|im| Complex64::new(0.0, im)),
    }
}

/// A charge `σ`. Half-integers are stored exactly; other reals only feed the
/// Loewner flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Charge {
    Rational { numerator: i64, denominator: u8 },
    Real(f64),
}

impl Charge {
    pub fn integer(n: i64) -> Self {
        Charge::Rational {
            numerator: n,
            denominator: 1,
        }
    }

    /// The charge `twice / 2`, in canonical form.
    pub fn half_integer(twice: i64) -> Self {
        if twice % 2 == 0 {
            Charge::integer(twice / 2)
        } else {
            Charge::Rational {
                numerator: twice,
                denominator: 2,
            }
        }
    }

    /// A real charge; snaps to the exact form when `2σ` is an integer.
    pub fn real(value: f64) -> Self {
        let twice = 2.0 * value;
        if (twice - twice.round()).abs() <= 1e-12 && twice.abs() < 1e15 {
            Charge::half_integer(twice.round() as i64)
        } else {
            Charge::Real(value)
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Charge::Rational {
                numerator,
                denominator,
            } => numerator as f64 / denominator as f64,
            Charge::Real(v) => v,
        }
    }

    /// `2σ` when it is an integer.
    pub fn twice(&self) -> Option<i64> {
        match *self {
            Charge::Rational {
                numerator,
                denominator,
            } => Some(numerator * (2 / denominator as i64)),
            Charge::Real(_) => None,
        }
    }

    pub fn is_half_integer(&self) -> bool {
        self.twice().is_some()
    }

    pub fn conformal_dimension(&self) -> f64 {
        conformal_dimension(self.value())
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Charge::Rational {
                numerator,
                denominator: 1,
            } => write!(f, "{numerator}"),
            Charge::Rational {
                numerator,
                denominator,
            } => write!(f, "{numerator}/{denominator}"),
            Charge::Real(v) => write!(f, "{v:?}"),
        }
    }
}

impl FromStr for Charge {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let q: i64 = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            if q == 0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            if (2 * p) % q == 0 {
                return Ok(Charge::half_integer(2 * p / q));
            }
            return Ok(Charge::Real(p as f64 / q as f64));
        }
        if let Ok(n) = s.parse::<i64>() {
            return Ok(Charge::integer(n));
        }
        s.parse::<f64>()
            .map(Charge::real)
            .map_err(|_| format!("bad charge {s:?}"))
    }
}

/// Conformal dimension `λ(σ) = σ² + 2σ` of a charge.
pub fn conformal_dimension(sigma: f64) -> f64 {
    sigma * sigma + 2.0 * sigma
}

/// The physical domain whose boundary carries the growth points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    HalfPlane,
    Disk,
}

impl Domain {
    pub fn on_boundary(&self, p: &SpherePoint) -> bool {
        match (self, p) {
            (_, SpherePoint::Infinity) => false,
            (Domain::HalfPlane, SpherePoint::Finite(z)) => z.im.abs() <= SYMMETRY_TOL * z.norm().max(1.0),
            (Domain::Disk, SpherePoint::Finite(z)) => (z.norm() - 1.0).abs() <= SYMMETRY_TOL,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::HalfPlane => "half_plane",
            Domain::Disk => "disk",
        }
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "half_plane" | "half-plane" | "H" => Ok(Domain::HalfPlane),
            "disk" | "D" => Ok(Domain::Disk),
            _ => Err(format!("unknown domain {s:?} (expected half_plane or disk)")),
        }
    }
}

/// One reason a divisor is not admissible.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoGrowthPoints,
    Neutrality { total: f64 },
    Distinctness { first: SpherePoint, second: SpherePoint },
    GrowthOffBoundary { point: SpherePoint },
    Symmetry { point: SpherePoint, charge: Charge },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoGrowthPoints => write!(f, "at least one growth point is required"),
            Violation::Neutrality { total } => {
                write!(f, "total charge is {total}, neutrality requires -2")
            }
            Violation::Distinctness { first, second } => {
                write!(f, "points {first} and {second} coincide")
            }
            Violation::GrowthOffBoundary { point } => {
                write!(f, "growth point {point} is not on the domain boundary")
            }
            Violation::Symmetry { point, charge } => {
                write!(f, "marked point {point} (charge {charge}) has no mirror partner")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// A divisor on the sphere with real charges and no symmetry constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereDivisor {
    pub points: Vec<(SpherePoint, f64)>,
}

impl SphereDivisor {
    pub fn total_charge(&self) -> f64 {
        self.points.iter().map(|(_, s)| s).sum()
    }

    fn check_distinct(&self) -> Result<()> {
        for (i, (a, _)) in self.points.iter().enumerate() {
            for (b, _) in &self.points[i + 1..] {
                if a.approx_eq(b, DISTINCT_TOL) {
                    return Err(Error::Degenerate(format!("points {a} and {b} coincide")));
                }
            }
        }
        Ok(())
    }

    /// Image under a Möbius map; charges are carried along unchanged.
    pub fn pushforward(&self, map: &MoebiusMap) -> Result<SphereDivisor> {
        let image = SphereDivisor {
            points: self.points.iter().map(|&(p, s)| (map.apply(p), s)).collect(),
        };
        image.check_distinct()?;
        Ok(image)
    }

    /// `log |C[σ]|` over the finite points.
    pub fn log_coulomb_correlation_abs(&self) -> Result<f64> {
        self.check_distinct()?;
        let finite: Vec<(Complex64, f64)> = self
            .points
            .iter()
            .filter_map(|&(p, s)| p.finite().map(|z| (z, s)))
            .collect();
        let mut acc = 0.0;
        for (j, &(zj, sj)) in finite.iter().enumerate() {
            for &(zk, sk) in &finite[j + 1..] {
                acc += 2.0 * sj * sk * (zj - zk).norm().ln();
            }
        }
        Ok(acc)
    }

    /// `|C[σ]| = ∏_{j<k} |z_j − z_k|^{2σ_jσ_k}` over the finite points.
    pub fn coulomb_correlation_abs(&self) -> Result<f64> {
        self.log_coulomb_correlation_abs().map(f64::exp)
    }

    /// Relative defect of `|C[φσ]| ∏ |φ'(z_j)|^{λ_j} = |C[σ]|`. Needs a
    /// neutral divisor whose points and images are all finite.
    pub fn invariance_defect(&self, map: &MoebiusMap) -> Result<f64> {
        if (self.total_charge() - NEUTRAL_CHARGE).abs() > NEUTRALITY_TOL {
            return Err(Error::InvalidDivisor(format!(
                "total charge {} is not neutral",
                self.total_charge()
            )));
        }
        let image = self.pushforward(map)?;
        let mut log_jacobian = 0.0;
        for ((p, s), (q, _)) in self.points.iter().zip(&image.points) {
            match (p, q) {
                (SpherePoint::Finite(z), SpherePoint::Finite(_)) => {
                    log_jacobian += conformal_dimension(*s) * map.derivative(*z).norm().ln();
                }
                _ => {
                    return Err(Error::Degenerate(
                        "invariance check needs finite points and images".into(),
                    ))
                }
            }
        }
        let diff = image.log_coulomb_correlation_abs()? + log_jacobian - self.log_coulomb_correlation_abs()?;
        Ok(diff.exp_m1().abs())
    }
}

/// A divisor `Σ x_k + Σ σ_j·q_j` that is symmetric under the reflection of
/// its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricDivisor {
    pub domain: Domain,
    pub growth: Vec<SpherePoint>,
    pub marked: Vec<(SpherePoint, Charge)>,
}

impl SymmetricDivisor {
    /// Builds and validates a divisor.
    pub fn new(
        domain: Domain,
        growth: Vec<SpherePoint>,
        marked: Vec<(SpherePoint, Charge)>,
    ) -> Result<Self> {
        let divisor = SymmetricDivisor {
            domain,
            growth,
            marked,
        };
        let report = divisor.validate();
        if report.is_admissible() {
            Ok(divisor)
        } else {
            Err(Error::InvalidDivisor(report.to_string()))
        }
    }

    pub fn total_charge(&self) -> f64 {
        self.growth.len() as f64 + self.marked.iter().map(|(_, c)| c.value()).sum::<f64>()
    }

    /// Lists every violated invariant; empty iff the divisor is admissible.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.growth.is_empty() {
            violations.push(Violation::NoGrowthPoints);
        }
        let total = self.total_charge();
        if (total - NEUTRAL_CHARGE).abs() > NEUTRALITY_TOL {
            violations.push(Violation::Neutrality { total });
        }
        let all: Vec<SpherePoint> = self
            .growth
            .iter()
            .copied()
            .chain(self.marked.iter().map(|(p, _)| *p))
            .collect();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if a.approx_eq(b, DISTINCT_TOL) {
                    violations.push(Violation::Distinctness {
                        first: *a,
                        second: *b,
                    });
                }
            }
        }
        for g in &self.growth {
            if !self.domain.on_boundary(g) {
                violations.push(Violation::GrowthOffBoundary { point: *g });
            }
        }
        for &(p, charge) in &self.marked {
            let mirror = p.reflect(self.domain);
            let paired = self.marked.iter().any(|(q, c)| {
                q.approx_eq(&mirror, SYMMETRY_TOL) && (c.value() - charge.value()).abs() <= NEUTRALITY_TOL
            });
            if !paired {
                violations.push(Violation::Symmetry { point: p, charge });
            }
        }
        ValidationReport { violations }
    }

    /// Every point with its charge, growth points first.
    pub fn to_sphere(&self) -> SphereDivisor {
        SphereDivisor {
            points: self
                .growth
                .iter()
                .map(|&g| (g, 1.0))
                .chain(self.marked.iter().map(|&(p, c)| (p, c.value())))
                .collect(),
        }
    }

    pub fn coulomb_correlation_abs(&self) -> Result<f64> {
        self.to_sphere().coulomb_correlation_abs()
    }

    /// Pushes the divisor forward by `map` and revalidates it as a symmetric
    /// divisor of `target`.
    pub fn pushforward(&self, map: &MoebiusMap, target: Domain) -> Result<SymmetricDivisor> {
        self.to_sphere().pushforward(map)?;
        let growth = self.growth.iter().map(|&g| map.apply(g)).collect();
        let marked = self.marked.iter().map(|&(p, c)| (map.apply(p), c)).collect();
        SymmetricDivisor::new(target, growth, marked)
    }

    /// Whether every marked charge has `2σ ∈ ℤ`.
    pub fn is_half_integer(&self) -> bool {
        self.marked.iter().all(|(_, c)| c.is_half_integer())
    }
}

fn finite_marked(marked: &[(SpherePoint, Charge)]) -> impl Iterator<Item = (Complex64, f64)> + '_ {
    marked
        .iter()
        .filter_map(|&(p, c)| p.finite().map(|z| (z, c.value())))
}

/// `log |𝒵(x, q)|`; factors involving ∞ are dropped.
pub fn log_partition_z_abs(x: &[Complex64], marked: &[(SpherePoint, Charge)]) -> Result<f64> {
    let q: Vec<(Complex64, f64)> = finite_marked(marked).collect();
    let mut acc = 0.0;
    let mut term = |d: Complex64, exponent: f64| -> Result<()> {
        let r = d.norm();
        if r <= DISTINCT_TOL {
            return Err(Error::Degenerate("coincident points in partition function".into()));
        }
        acc += exponent * r.ln();
        Ok(())
    };
    for (i, &xi) in x.iter().enumerate() {
        for &xj in &x[i + 1..] {
            term(xi - xj, 2.0)?;
        }
        for &(qj, sj) in &q {
            term(xi - qj, 2.0 * sj)?;
        }
    }
    for (i, &(qi, si)) in q.iter().enumerate() {
        for &(qj, sj) in &q[i + 1..] {
            term(qi - qj, 2.0 * si * sj)?;
        }
    }
    Ok(acc)
}

/// `|𝒵(x, q)| = ∏|x_i−x_j|² ∏|q_i−q_j|^{2σ_iσ_j} ∏|x_i−q_j|^{2σ_j}`.
pub fn partition_z_abs(x: &[Complex64], marked: &[(SpherePoint, Charge)]) -> Result<f64> {
    log_partition_z_abs(x, marked).map(f64::exp)
}

/// `∂ log 𝒵 / ∂x_j` without the reality check; `marked` yields finite points.
pub(crate) fn dlog_z_raw(
    x: &[f64],
    marked: impl Iterator<Item = (Complex64, f64)>,
    j: usize,
) -> Complex64 {
    let xj = x[j];
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &xk) in x.iter().enumerate() {
        if k != j {
            acc += 2.0 / (xj - xk);
        }
    }
    for (q, s) in marked {
        acc += 2.0 * s / (xj - q);
    }
    acc
}

/// Logarithmic derivative of `𝒵` in the real growth coordinate `x_j`:
/// `Σ_{k≠j} 2/(x_j−x_k) + Σ_l 2σ_l/(x_j−q_l)`.
///
/// Conjugate pairs of marked points make the result real; an imaginary
/// residue above `1e-10` (relative) means the marked set is not closed.
pub fn dlog_z(x: &[f64], marked: &[(SpherePoint, Charge)], j: usize) -> Result<f64> {
    if j >= x.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: x.len(),
        });
    }
    for (k, &xk) in x.iter().enumerate() {
        if k != j && (x[j] - xk).abs() <= DISTINCT_TOL {
            return Err(Error::Degenerate(format!("growth points {j} and {k} coincide")));
        }
    }
    for (q, _) in finite_marked(marked) {
        if (Complex64::new(x[j], 0.0) - q).norm() <= DISTINCT_TOL {
            return Err(Error::Degenerate(format!("growth point {j} meets marked point {q}")));
        }
    }
    let value = dlog_z_raw(x, finite_marked(marked), j);
    if value.im.abs() > SYMMETRY_TOL * value.re.abs().max(1.0) {
        return Err(Error::SymmetryViolation(value.im));
    }
    Ok(value.re)
}

/// `z ↦ (az + b)/(cz + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MoebiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() <= 1e-12 {
            return Err(Error::SingularMap(det.norm()));
        }
        Ok(MoebiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        MoebiusMap {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    /// Cayley map `z ↦ (z − i)/(z + i)` from ℍ onto 𝔻.
    pub fn cayley() -> Self {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        MoebiusMap {
            a: one,
            b: -i,
            c: one,
            d: i,
        }
    }

    /// Rotation `z ↦ e^{iθ} z`.
    pub fn rotation(theta: f64) -> Self {
        MoebiusMap {
            a: Complex64::from_polar(1.0, theta),
            ..MoebiusMap::identity()
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        MoebiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MoebiusMap) -> Self {
        MoebiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// The finite point sent to ∞, if any.
    pub fn pole(&self) -> Option<Complex64> {
        (self.c.norm() > 0.0).then(|| -self.d / self.c)
    }

    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        match p {
            SpherePoint::Infinity => {
                if self.c.norm() == 0.0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a / self.c)
                }
            }
            SpherePoint::Finite(z) => {
                let den = self.c * z + self.d;
                let scale = (self.c * z).norm().max(self.d.norm());
                if den.norm() <= 1e-15 * scale.max(f64::MIN_POSITIVE) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Image of a finite point; errors at the pole.
    pub fn apply_finite(&self, z: Complex64) -> Result<Complex64> {
        self.apply(SpherePoint::Finite(z))
            .finite()
            .ok_or(Error::Pole(z))
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = self.c * z + self.d;
        self.determinant() / (den * den)
    }
}
