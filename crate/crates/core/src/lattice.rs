//! Exact intersection-lattice bookkeeping for surfaces.
//!
//! A [`SurfaceLattice`] is the Neron-Severi lattice of a smooth projective
//! surface presented by an integer intersection matrix on a chosen basis,
//! together with the canonical class and a declared bank of irreducible
//! curve classes generating the cone of curves. Against that data the module
//! computes nef thresholds `sup { t : L + t K nef }`, extracts the curves
//! contracted at the threshold, blows them down, and iterates to a full
//! surgery schedule. All arithmetic is exact rational; nothing here touches
//! floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Rat = BigRational;

fn rat_int(k: i64) -> Rat {
    Rat::from_integer(BigInt::from(k))
}

#[derive(Debug, thiserror::Error)]
pub enum LatticeError {
    #[error("class has {got} coefficients, lattice rank is {rank}")]
    RankMismatch { got: usize, rank: usize },
    #[error("intersection matrix is {rows}x{cols}, not square of rank {rank}")]
    BadMatrix { rows: usize, cols: usize, rank: usize },
    #[error("intersection matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("class {class} pairs nonpositively ({pairing}) with bank curve {label}: not ample against the bank")]
    NotAmple { class: String, label: String, pairing: Rat },
    #[error("curve {label} hits the nef threshold but has C.C = {self_int}, K.C = {k_c}; expected a (-1)-curve")]
    NotMinusOneCurve { label: String, self_int: Rat, k_c: Rat },
    #[error("threshold curves {a} and {b} meet ({pairing} != 0); simultaneous contraction needs disjoint curves")]
    NotDisjoint { a: String, b: String, pairing: Rat },
    #[error("(L + T K)^2 = {value} < 0 at the nef threshold; the declared curve bank misses a curve")]
    NegativeSquareAtThreshold { value: Rat },
    #[error("blow-down of {label} needs a standard-form lattice with {label} a basis exceptional class")]
    UnsupportedPresentation { label: String },
    #[error("terminal classification needs M.M = 0, got {mm}")]
    BigTerminalClass { mm: Rat },
}

/// Rational divisor class in the coordinates of a fixed lattice basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorClass {
    pub coeffs: Vec<Rat>,
}

impl DivisorClass {
    pub fn new(coeffs: Vec<Rat>) -> Self {
        DivisorClass { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        DivisorClass {
            coeffs: coeffs.iter().map(|&k| rat_int(k)).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn plus(&self, other: &DivisorClass) -> DivisorClass {
        assert_eq!(self.rank(), other.rank());
        DivisorClass {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scaled(&self, t: &Rat) -> DivisorClass {
        DivisorClass {
            coeffs: self.coeffs.iter().map(|c| c * t).collect(),
        }
    }

    /// Smallest positive multiple with integer coefficients.
    pub fn primitive_integer_multiple(&self) -> DivisorClass {
        let mut scale = BigInt::one();
        for c in &self.coeffs {
            let d = c.denom();
            scale = num_integer::lcm(scale, d.clone());
        }
        self.scaled(&Rat::from_integer(scale))
    }

    /// Human-readable form in a given basis, e.g. `2H - E1 - E2`.
    pub fn display(&self, basis: &[String]) -> String {
        let mut out = String::new();
        for (c, name) in self.coeffs.iter().zip(basis) {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(sign);
            }
            if mag.is_one() {
                out.push_str(name);
            } else {
                out.push_str(&format!("{}{}", mag, name));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Declared irreducible curve class with a label for reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveClass {
    pub label: String,
    pub class: DivisorClass,
}

impl CurveClass {
    pub fn new(label: &str, coeffs: &[i64]) -> Self {
        CurveClass {
            label: label.to_string(),
            class: DivisorClass::from_ints(coeffs),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceLattice {
    pub basis_labels: Vec<String>,
    /// Symmetric integer Gram matrix of the basis.
    pub intersection_matrix: Vec<Vec<i64>>,
    pub canonical: DivisorClass,
    /// Irreducible curves generating the cone of curves.
    pub curve_bank: Vec<CurveClass>,
}

impl SurfaceLattice {
    pub fn rank(&self) -> usize {
        self.basis_labels.len()
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        let r = self.rank();
        if self.intersection_matrix.len() != r
            || self.intersection_matrix.iter().any(|row| row.len() != r)
        {
            return Err(LatticeError::BadMatrix {
                rows: self.intersection_matrix.len(),
                cols: self.intersection_matrix.first().map_or(0, |row| row.len()),
                rank: r,
            });
        }
        for i in 0..r {
            for j in 0..i {
                if self.intersection_matrix[i][j] != self.intersection_matrix[j][i] {
                    return Err(LatticeError::NotSymmetric { i, j });
                }
            }
        }
        self.check_rank(&self.canonical)?;
        for c in &self.curve_bank {
            self.check_rank(&c.class)?;
        }
        Ok(())
    }

    fn check_rank(&self, class: &DivisorClass) -> Result<(), LatticeError> {
        if class.rank() != self.rank() {
            return Err(LatticeError::RankMismatch {
                got: class.rank(),
                rank: self.rank(),
            });
        }
        Ok(())
    }

    /// Intersection pairing `a . b` through the Gram matrix.
    pub fn intersect(&self, a: &DivisorClass, b: &DivisorClass) -> Result<Rat, LatticeError> {
        self.check_rank(a)?;
        self.check_rank(b)?;
        let mut acc = Rat::zero();
        for (i, ai) in a.coeffs.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                let q = self.intersection_matrix[i][j];
                if q == 0 || bj.is_zero() {
                    continue;
                }
                acc += ai * bj * rat_int(q);
            }
        }
        Ok(acc)
    }

    /// Standard form: basis `H, E1, ..., Ek` with Gram matrix
    /// `diag(1, -1, ..., -1)`. Blow-downs are only supported here.
    pub fn is_standard_form(&self) -> bool {
        let r = self.rank();
        if r == 0 || self.basis_labels[0] != "H" {
            return false;
        }
        for i in 0..r {
            for j in 0..r {
                let want = if i != j {
                    0
                } else if i == 0 {
                    1
                } else {
                    -1
                };
                if self.intersection_matrix[i][j] != want {
                    return false;
                }
            }
        }
        true
    }
}

/// `sup { t >= 0 : L + t K is nef }` measured against the curve bank;
/// `None` when no bank curve has negative canonical degree.
///
/// Requires `L` strictly positive against every bank curve.
pub fn nef_threshold(l: &DivisorClass, lat: &SurfaceLattice) -> Result<Option<Rat>, LatticeError> {
    lat.validate()?;
    let mut best: Option<Rat> = None;
    for curve in &lat.curve_bank {
        let lc = lat.intersect(l, &curve.class)?;
        if !lc.is_positive() {
            return Err(LatticeError::NotAmple {
                class: l.display(&lat.basis_labels),
                label: curve.label.clone(),
                pairing: lc,
            });
        }
        let kc = lat.intersect(&lat.canonical, &curve.class)?;
        if kc.is_negative() {
            let t = lc / -kc;
            best = Some(match best {
                Some(b) if b <= t => b,
                _ => t,
            });
        }
    }
    Ok(best)
}

/// What happens at the nef threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractionOutcome {
    /// `M = r (L + T K)` is big and nef; the listed bank curves are the
    /// (-1)-curves it contracts.
    Contract {
        big_class: DivisorClass,
        contracted: Vec<CurveClass>,
    },
    /// `M.M = 0`: the class volume collapses, no divisorial contraction.
    Collapse { class: DivisorClass },
}

/// Scale `L + T K` to a primitive integer class `M`, check `M.M >= 0`, and
/// classify the threshold: either a list of disjoint (-1)-curves to contract
/// or a volume collapse.
pub fn contraction_data(
    l: &DivisorClass,
    t: &Rat,
    lat: &SurfaceLattice,
) -> Result<ContractionOutcome, LatticeError> {
    lat.validate()?;
    lat.check_rank(l)?;
    let m = l
        .plus(&lat.canonical.scaled(t))
        .primitive_integer_multiple();
    let mm = lat.intersect(&m, &m)?;
    if mm.is_negative() {
        return Err(LatticeError::NegativeSquareAtThreshold { value: mm });
    }
    if mm.is_zero() {
        return Ok(ContractionOutcome::Collapse { class: m });
    }
    let mut contracted = Vec::new();
    for curve in &lat.curve_bank {
        let mc = lat.intersect(&m, &curve.class)?;
        if !mc.is_zero() {
            continue;
        }
        let cc = lat.intersect(&curve.class, &curve.class)?;
        let kc = lat.intersect(&lat.canonical, &curve.class)?;
        if cc != rat_int(-1) || kc != rat_int(-1) {
            return Err(LatticeError::NotMinusOneCurve {
                label: curve.label.clone(),
                self_int: cc,
                k_c: kc,
            });
        }
        contracted.push(curve.clone());
    }
    for i in 0..contracted.len() {
        for j in 0..i {
            let p = lat.intersect(&contracted[i].class, &contracted[j].class)?;
            if !p.is_zero() {
                return Err(LatticeError::NotDisjoint {
                    a: contracted[j].label.clone(),
                    b: contracted[i].label.clone(),
                    pairing: p,
                });
            }
        }
    }
    Ok(ContractionOutcome::Contract {
        big_class: m,
        contracted,
    })
}

/// Blow down a set of disjoint basis exceptional classes on a standard-form
/// lattice. Returns the new lattice and the index map sending new basis
/// columns to old ones.
///
/// The new curve bank is the pushforward of the old one with collapsed
/// (zero) classes removed, deduplicated, and relabeled by its coordinates.
pub fn blow_down(
    lat: &SurfaceLattice,
    contracted: &[CurveClass],
) -> Result<(SurfaceLattice, Vec<usize>), LatticeError> {
    lat.validate()?;
    if !lat.is_standard_form() {
        return Err(LatticeError::UnsupportedPresentation {
            label: contracted
                .first()
                .map_or_else(|| "?".to_string(), |c| c.label.clone()),
        });
    }
    let mut dropped = vec![false; lat.rank()];
    for curve in contracted {
        lat.check_rank(&curve.class)?;
        let mut unit_col = None;
        for (i, c) in curve.class.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if i == 0 || !c.is_one() || unit_col.is_some() {
                unit_col = None;
                break;
            }
            unit_col = Some(i);
        }
        match unit_col {
            Some(i) if !dropped[i] => dropped[i] = true,
            _ => {
                return Err(LatticeError::UnsupportedPresentation {
                    label: curve.label.clone(),
                })
            }
        }
    }
    let keep: Vec<usize> = (0..lat.rank()).filter(|&i| !dropped[i]).collect();
    let project = |class: &DivisorClass| -> DivisorClass {
        DivisorClass {
            coeffs: keep.iter().map(|&i| class.coeffs[i].clone()).collect(),
        }
    };
    let basis_labels: Vec<String> = keep.iter().map(|&i| lat.basis_labels[i].clone()).collect();
    let intersection_matrix: Vec<Vec<i64>> = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| lat.intersection_matrix[i][j]).collect())
        .collect();
    let mut curve_bank: Vec<CurveClass> = Vec::new();
    for curve in &lat.curve_bank {
        let image = project(&curve.class);
        if image.is_zero() || curve_bank.iter().any(|c| c.class == image) {
            continue;
        }
        let label = image.display(&basis_labels);
        curve_bank.push(CurveClass {
            label,
            class: image,
        });
    }
    let new_lat = SurfaceLattice {
        basis_labels,
        intersection_matrix,
        canonical: project(&lat.canonical),
        curve_bank,
    };
    new_lat.validate()?;
    Ok((new_lat, keep))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Terminal {
    /// Canonical class nef against the final bank; the schedule stops.
    MinimalModel,
    /// Volume collapse with `M` numerically trivial: Fano collapse to a
    /// point.
    CollapseFano,
    /// Volume collapse with `M` nontrivial of null square: collapse along a
    /// ruling to a curve.
    CollapseRuled,
}

impl Terminal {
    pub fn as_str(&self) -> &'static str {
        match self {
            Terminal::MinimalModel => "minimal_model",
            Terminal::CollapseFano => "collapse_fano",
            Terminal::CollapseRuled => "collapse_ruled",
        }
    }
}

/// Classify a null collapse class: trivial means the whole surface shrinks
/// to a point, nontrivial means fibers of a ruling shrink.
pub fn classify_terminal(m: &DivisorClass, lat: &SurfaceLattice) -> Result<Terminal, LatticeError> {
    lat.validate()?;
    lat.check_rank(m)?;
    let mm = lat.intersect(m, m)?;
    if !mm.is_zero() {
        return Err(LatticeError::BigTerminalClass { mm });
    }
    if m.is_zero() {
        Ok(Terminal::CollapseFano)
    } else {
        Ok(Terminal::CollapseRuled)
    }
}

/// One divisorial surgery: the absolute threshold time, the big nef class
/// there, the contracted curves, and the blown-down lattice with the column
/// index map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurgeryStep {
    pub threshold: Rat,
    pub big_class: DivisorClass,
    pub contracted: Vec<CurveClass>,
    pub pushforward: Vec<usize>,
    pub next_lattice: SurfaceLattice,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurgerySchedule {
    pub steps: Vec<SurgeryStep>,
    pub terminal: Terminal,
    /// Absolute collapse time; `None` when the schedule ends at a minimal
    /// model (threshold infinite).
    pub terminal_time: Option<Rat>,
    /// Final `M` class on the last lattice for a collapse, final `L` for a
    /// minimal model.
    pub final_class: DivisorClass,
}

/// Iterate nef threshold / contraction / blow-down from an ample start
/// class until collapse or a minimal model.
///
/// Between surgeries the class flows as `L(t) = L + t K`; the class handed
/// to the next lattice is the unscaled pushforward of `L + T K`, so
/// absolute threshold times add across steps.
pub fn run_schedule(
    l0: &DivisorClass,
    lat0: &SurfaceLattice,
) -> Result<SurgerySchedule, LatticeError> {
    let mut lat = lat0.clone();
    let mut l = l0.clone();
    let mut elapsed = Rat::zero();
    let mut steps: Vec<SurgeryStep> = Vec::new();
    loop {
        // Each step drops at least one basis column, so this terminates
        // within the initial rank.
        let t_rel = match nef_threshold(&l, &lat)? {
            None => {
                return Ok(SurgerySchedule {
                    steps,
                    terminal: Terminal::MinimalModel,
                    terminal_time: None,
                    final_class: l,
                });
            }
            Some(t) => t,
        };
        elapsed += &t_rel;
        match contraction_data(&l, &t_rel, &lat)? {
            ContractionOutcome::Collapse { class } => {
                let terminal = classify_terminal(&class, &lat)?;
                return Ok(SurgerySchedule {
                    steps,
                    terminal,
                    terminal_time: Some(elapsed),
                    final_class: class,
                });
            }
            ContractionOutcome::Contract {
                big_class,
                contracted,
            } => {
                let moved = l.plus(&lat.canonical.scaled(&t_rel));
                let (next_lat, pushforward) = blow_down(&lat, &contracted)?;
                l = DivisorClass {
                    coeffs: pushforward
                        .iter()
                        .map(|&i| moved.coeffs[i].clone())
                        .collect(),
                };
                steps.push(SurgeryStep {
                    threshold: elapsed.clone(),
                    big_class,
                    contracted,
                    pushforward,
                    next_lattice: next_lat.clone(),
                });
                lat = next_lat;
            }
        }
    }
}

/// Stock lattices with their cone-of-curves banks.
pub mod presets {
    use super::*;

    /// P^2: basis `H`, `H.H = 1`, `K = -3H`, bank the line.
    pub fn p2() -> SurfaceLattice {
        SurfaceLattice {
            basis_labels: vec!["H".into()],
            intersection_matrix: vec![vec![1]],
            canonical: DivisorClass::from_ints(&[-3]),
            curve_bank: vec![CurveClass::new("H", &[1])],
        }
    }

    /// Blow-up of P^2 in `k <= 3` general points: basis `H, E1, ..., Ek`,
    /// Gram `diag(1, -1, ..., -1)`, `K = -3H + sum Ei`, bank the exceptional
    /// curves and the lines through pairs of points.
    pub fn bl_p2(k: usize) -> SurfaceLattice {
        assert!((1..=3).contains(&k), "presets cover 1 to 3 blown-up points");
        let rank = k + 1;
        let mut basis_labels = vec!["H".to_string()];
        let mut canonical = vec![-3i64];
        for i in 1..=k {
            basis_labels.push(format!("E{}", i));
            canonical.push(1);
        }
        let intersection_matrix: Vec<Vec<i64>> = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| {
                        if i != j {
                            0
                        } else if i == 0 {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect()
            })
            .collect();
        let mut curve_bank = Vec::new();
        for i in 1..=k {
            let mut c = vec![0i64; rank];
            c[i] = 1;
            curve_bank.push(CurveClass::new(&format!("E{}", i), &c));
        }
        if k == 1 {
            // One point: the cone needs the strict transform of lines
            // through it.
            curve_bank.push(CurveClass::new("H-E1", &[1, -1]));
        }
        for i in 1..=k {
            for j in (i + 1)..=k {
                let mut c = vec![0i64; rank];
                c[0] = 1;
                c[i] = -1;
                c[j] = -1;
                curve_bank.push(CurveClass::new(&format!("H-E{}-E{}", i, j), &c));
            }
        }
        let lat = SurfaceLattice {
            basis_labels,
            intersection_matrix,
            canonical: DivisorClass::from_ints(&canonical),
            curve_bank,
        };
        debug_assert!(lat.validate().is_ok());
        lat
    }

    /// P^1 x P^1: fiber classes `F1, F2`, hyperbolic Gram matrix,
    /// `K = -2F1 - 2F2`, bank the two rulings. Not standard form, so
    /// schedules on it can only end in a collapse or minimal model.
    pub fn p1xp1() -> SurfaceLattice {
        SurfaceLattice {
            basis_labels: vec!["F1".into(), "F2".into()],
            intersection_matrix: vec![vec![0, 1], vec![1, 0]],
            canonical: DivisorClass::from_ints(&[-2, -2]),
            curve_bank: vec![CurveClass::new("F1", &[1, 0]), CurveClass::new("F2", &[0, 1])],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;

    fn rat(p: i64, q: i64) -> Rat {
        Rat::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn intersection_is_symmetric_bilinear() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let lat = bl_p2(3);
        for _ in 0..200 {
            let rnd = |rng: &mut rand_chacha::ChaCha8Rng| {
                DivisorClass::from_ints(&std::array::from_fn::<i64, 4, _>(|_| {
                    rng.gen_range(-5..=5)
                }))
            };
            let a = rnd(&mut rng);
            let b = rnd(&mut rng);
            let c = rnd(&mut rng);
            let t = rat(rng.gen_range(-9..=9), rng.gen_range(1..=9));
            assert_eq!(
                lat.intersect(&a, &b).unwrap(),
                lat.intersect(&b, &a).unwrap()
            );
            assert_eq!(
                lat.intersect(&a.plus(&b.scaled(&t)), &c).unwrap(),
                lat.intersect(&a, &c).unwrap() + t.clone() * lat.intersect(&b, &c).unwrap()
            );
        }
    }

    #[test]
    fn rank_mismatch_is_rejected() {
        let lat = bl_p2(1);
        let bad = DivisorClass::from_ints(&[1, 2, 3]);
        let good = DivisorClass::from_ints(&[1, 0]);
        assert!(matches!(
            lat.intersect(&bad, &good),
            Err(LatticeError::RankMismatch { got: 3, rank: 2 })
        ));
    }

    #[test]
    fn standard_form_detection() {
        assert!(p2().is_standard_form());
        assert!(bl_p2(2).is_standard_form());
        assert!(!p1xp1().is_standard_form());
    }

    #[test]
    fn canonical_classes_match_presets() {
        // Standard-form rational surfaces carry K = -3H + sum Ei.
        for k in 1..=3 {
            let lat = bl_p2(k);
            let mut want = vec![-3i64];
            want.extend(std::iter::repeat(1).take(k));
            assert_eq!(lat.canonical, DivisorClass::from_ints(&want));
        }
    }

    #[test]
    fn threshold_satisfies_defining_inequalities() {
        let lat = bl_p2(2);
        let l = DivisorClass::from_ints(&[5, -2, -1]);
        let t = nef_threshold(&l, &lat).unwrap().unwrap();
        let m = l.plus(&lat.canonical.scaled(&t));
        let mut some_zero = false;
        for c in &lat.curve_bank {
            let p = lat.intersect(&m, &c.class).unwrap();
            assert!(!p.is_negative(), "nef fails against {}", c.label);
            some_zero |= p.is_zero();
        }
        assert!(some_zero, "threshold must be achieved by a bank curve");
    }

    #[test]
    fn non_ample_start_class_is_rejected() {
        let lat = bl_p2(1);
        // Pairs to zero with E1.
        let l = DivisorClass::from_ints(&[1, 0]);
        assert!(matches!(
            nef_threshold(&l, &lat),
            Err(LatticeError::NotAmple { .. })
        ));
    }

    #[test]
    fn canonical_nef_gives_no_threshold() {
        // Rank-1 lattice with K ample: every schedule is already minimal.
        let lat = SurfaceLattice {
            basis_labels: vec!["A".into()],
            intersection_matrix: vec![vec![1]],
            canonical: DivisorClass::from_ints(&[2]),
            curve_bank: vec![CurveClass::new("A", &[1])],
        };
        let l = DivisorClass::from_ints(&[1]);
        assert_eq!(nef_threshold(&l, &lat).unwrap(), None);
        let schedule = run_schedule(&l, &lat).unwrap();
        assert_eq!(schedule.terminal, Terminal::MinimalModel);
        assert_eq!(schedule.terminal_time, None);
        assert!(schedule.steps.is_empty());
    }

    #[test]
    fn first_contraction_then_fano_collapse() {
        // Start (4, -1) on the one-point blow-up: contract E1 at time 1,
        // then collapse the image plane at absolute time 4/3.
        let lat = bl_p2(1);
        let l = DivisorClass::from_ints(&[4, -1]);
        let schedule = run_schedule(&l, &lat).unwrap();
        assert_eq!(schedule.steps.len(), 1);
        let step = &schedule.steps[0];
        assert_eq!(step.threshold, rat(1, 1));
        assert_eq!(step.big_class, DivisorClass::from_ints(&[1, 0]));
        assert_eq!(step.contracted.len(), 1);
        assert_eq!(step.contracted[0].label, "E1");
        assert_eq!(step.pushforward, vec![0]);
        assert_eq!(step.next_lattice, p2());
        assert_eq!(schedule.terminal, Terminal::CollapseFano);
        assert_eq!(schedule.terminal_time, Some(rat(4, 3)));
        assert!(schedule.final_class.is_zero());
    }

    #[test]
    fn immediate_ruled_collapse() {
        // (4, -1, -2) on the two-point blow-up collapses at time 1 along
        // the pencil of lines through the second point; no surgery happens.
        let lat = bl_p2(2);
        let l = DivisorClass::from_ints(&[4, -1, -2]);
        let schedule = run_schedule(&l, &lat).unwrap();
        assert!(schedule.steps.is_empty());
        assert_eq!(schedule.terminal, Terminal::CollapseRuled);
        assert_eq!(schedule.terminal_time, Some(rat(1, 1)));
        assert_eq!(schedule.final_class, DivisorClass::from_ints(&[1, 0, -1]));
        let mm = lat
            .intersect(&schedule.final_class, &schedule.final_class)
            .unwrap();
        assert!(mm.is_zero());
    }

    #[test]
    fn two_step_schedule_with_fractional_second_threshold() {
        // (5, -2, -1) on the two-point blow-up: contract E2 at time 1
        // (M = 2H - E1, M.M = 3), then on the image the class 2H - E1
        // reaches its threshold after another 1/2 and collapses along
        // H - E1 at absolute time 3/2.
        let lat = bl_p2(2);
        let l = DivisorClass::from_ints(&[5, -2, -1]);
        let schedule = run_schedule(&l, &lat).unwrap();
        assert_eq!(schedule.steps.len(), 1);
        let step = &schedule.steps[0];
        assert_eq!(step.threshold, rat(1, 1));
        assert_eq!(step.big_class, DivisorClass::from_ints(&[2, -1, 0]));
        assert_eq!(step.contracted.len(), 1);
        assert_eq!(step.contracted[0].label, "E2");
        assert_eq!(step.pushforward, vec![0, 1]);
        assert_eq!(step.next_lattice, bl_p2(1));
        assert_eq!(schedule.terminal, Terminal::CollapseRuled);
        assert_eq!(schedule.terminal_time, Some(rat(3, 2)));
        // M1 = (1/2)(H - E1) scaled primitive: H - E1.
        assert_eq!(schedule.final_class, DivisorClass::from_ints(&[1, -1]));
    }

    #[test]
    fn contraction_checks_minus_one_curves() {
        // A bank whose threshold curve is not a (-1)-curve must be refused.
        let mut lat = bl_p2(1);
        lat.curve_bank = vec![CurveClass::new("2E1", &[0, 2])];
        let l = DivisorClass::from_ints(&[4, -1]);
        let t = nef_threshold(&l, &lat).unwrap().unwrap();
        assert!(matches!(
            contraction_data(&l, &t, &lat),
            Err(LatticeError::NotMinusOneCurve { .. })
        ));
    }

    #[test]
    fn meeting_threshold_curves_are_refused() {
        // On a genuine surface lattice (signature (1, r-1)) the Hodge index
        // theorem rules this case out, but input lattices are not verified
        // to have surface signature; the disjointness check guards that
        // gap. Gram diag(1, 1, -1) admits two meeting (-1)-curves
        // orthogonal to a big class.
        let lat = SurfaceLattice {
            basis_labels: vec!["A".into(), "B".into(), "C".into()],
            intersection_matrix: vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -1]],
            canonical: DivisorClass::from_ints(&[1, 0, 1]),
            curve_bank: vec![
                CurveClass::new("C1", &[0, 0, 1]),
                CurveClass::new("C2", &[2, 2, 3]),
            ],
        };
        // Both curves have self-intersection -1 and canonical degree -1;
        // they meet with pairing -3. L reaches its threshold at t = 1 with
        // M = (2, -2, 0), M.M = 8 > 0.
        let l = DivisorClass::from_ints(&[1, -2, -1]);
        let t = nef_threshold(&l, &lat).unwrap().unwrap();
        assert_eq!(t, rat(1, 1));
        assert!(matches!(
            contraction_data(&l, &t, &lat),
            Err(LatticeError::NotDisjoint { .. })
        ));
    }

    #[test]
    fn blow_down_requires_standard_form() {
        let lat = p1xp1();
        let c = CurveClass::new("F1", &[1, 0]);
        assert!(matches!(
            blow_down(&lat, &[c]),
            Err(LatticeError::UnsupportedPresentation { .. })
        ));
    }

    #[test]
    fn blow_down_drops_columns_and_relabels_bank() {
        let lat = bl_p2(2);
        let (down, keep) = blow_down(&lat, &[CurveClass::new("E2", &[0, 0, 1])]).unwrap();
        assert_eq!(keep, vec![0, 1]);
        assert_eq!(down.basis_labels, vec!["H".to_string(), "E1".to_string()]);
        assert_eq!(down, bl_p2(1));
    }

    #[test]
    fn three_point_blow_down_of_two_curves() {
        let lat = bl_p2(3);
        let contracted = vec![
            CurveClass::new("E1", &[0, 1, 0, 0]),
            CurveClass::new("E3", &[0, 0, 0, 1]),
        ];
        let (down, keep) = blow_down(&lat, &contracted).unwrap();
        assert_eq!(keep, vec![0, 2]);
        assert_eq!(down.basis_labels, vec!["H".to_string(), "E2".to_string()]);
        // Pushed bank: E2, lines H-E2 (from H-E1-E2 and H-E2-E3, deduped),
        // and the line H (from H-E1-E3).
        assert_eq!(down.curve_bank.len(), 3);
        assert!(down.curve_bank.iter().any(|c| c.label == "E2"));
        assert!(down.curve_bank.iter().any(|c| c.label == "H-E2"));
        assert!(down.curve_bank.iter().any(|c| c.label == "H"));
    }

    #[test]
    fn p1xp1_collapses_along_a_ruling() {
        // L = 2F1 + 3F2 has degrees 3 and 2 against the rulings and
        // K.Fi = -2, so the threshold is 1 at F2 with M = L + K = F2,
        // M.M = 0: ruled collapse.
        let lat = p1xp1();
        let l = DivisorClass::from_ints(&[2, 3]);
        let schedule = run_schedule(&l, &lat).unwrap();
        assert!(schedule.steps.is_empty());
        assert_eq!(schedule.terminal, Terminal::CollapseRuled);
        assert_eq!(schedule.terminal_time, Some(rat(1, 1)));
        assert_eq!(schedule.final_class, DivisorClass::from_ints(&[0, 1]));
    }

    #[test]
    fn classify_terminal_rejects_big_classes() {
        let lat = p2();
        let m = DivisorClass::from_ints(&[1]);
        assert!(matches!(
            classify_terminal(&m, &lat),
            Err(LatticeError::BigTerminalClass { .. })
        ));
    }

    #[test]
    fn display_formats_classes() {
        let lat = bl_p2(2);
        let l = DivisorClass::from_ints(&[5, -2, -1]);
        assert_eq!(l.display(&lat.basis_labels), "5H-2E1-E2");
        assert_eq!(DivisorClass::from_ints(&[0, 0, 0]).display(&lat.basis_labels), "0");
    }
}
