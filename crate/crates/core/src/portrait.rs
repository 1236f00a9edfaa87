//! Two-qubit portraits of two-mode tomograms.
//!
//! A product partition `A1 x A2` of the photon-number pairs gives four cells
//! `A1 x A2`, `A1 x !A2`, `!A1 x A2`, `!A1 x !A2`; summing the tomogram over
//! each cell yields the portrait `(w++, w+-, w-+, w--)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::Complex;
use crate::states::{
    clamp_probability, ln_cosh, CatState, DisplacementPair, State, TomogramSource,
    TomogramTable, CLOSED_FORM_NEG_TOL,
};

/// Default bound on the probability mass lost to truncation.
pub const DEFAULT_TAIL_EPS: f64 = 1e-4;
/// Negativity tolerance for the even-odd closed form.
pub const EVEN_ODD_NEG_TOL: f64 = 1e-9;
const MASS_TOL: f64 = 1e-9;

/// Membership rule for the `+` outcome of one mode.
#[derive(Clone)]
pub enum ModeSet {
    /// `{0}`
    Zero,
    Even,
    Odd,
    /// `{n : n < t}`
    Below(usize),
    Custom(Arc<dyn Fn(usize) -> bool + Send + Sync>),
}

impl ModeSet {
    pub fn contains(&self, n: usize) -> bool {
        match self {
            ModeSet::Zero => n == 0,
            ModeSet::Even => n % 2 == 0,
            ModeSet::Odd => n % 2 == 1,
            ModeSet::Below(t) => n < *t,
            ModeSet::Custom(f) => f(n),
        }
    }
}

impl fmt::Debug for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeSet::Zero => write!(f, "Zero"),
            ModeSet::Even => write!(f, "Even"),
            ModeSet::Odd => write!(f, "Odd"),
            ModeSet::Below(t) => write!(f, "Below({t})"),
            ModeSet::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Product partition `A1 x A2`. Non-product cell assignments cannot be
/// expressed: they do not yield a two-qubit distribution.
#[derive(Clone, Debug)]
pub struct PartitionScheme {
    pub mode1: ModeSet,
    pub mode2: ModeSet,
}

impl PartitionScheme {
    pub fn new(mode1: ModeSet, mode2: ModeSet) -> Self {
        PartitionScheme { mode1, mode2 }
    }

    pub fn zero_nonzero() -> Self {
        Self::new(ModeSet::Zero, ModeSet::Zero)
    }

    pub fn even_odd() -> Self {
        Self::new(ModeSet::Even, ModeSet::Even)
    }

    /// Cell index 0..4 in `(++, +-, -+, --)` order.
    pub fn cell(&self, n1: usize, n2: usize) -> usize {
        let a = usize::from(!self.mode1.contains(n1));
        let b = usize::from(!self.mode2.contains(n2));
        2 * a + b
    }

    /// The canonical kind, when both modes use the same canonical rule.
    pub fn canonical(&self) -> Option<CanonicalPartition> {
        match (&self.mode1, &self.mode2) {
            (ModeSet::Zero, ModeSet::Zero) => Some(CanonicalPartition::ZeroNonzero),
            (ModeSet::Even, ModeSet::Even) => Some(CanonicalPartition::EvenOdd),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CanonicalPartition {
    ZeroNonzero,
    EvenOdd,
}

impl CanonicalPartition {
    pub fn scheme(self) -> PartitionScheme {
        match self {
            CanonicalPartition::ZeroNonzero => PartitionScheme::zero_nonzero(),
            CanonicalPartition::EvenOdd => PartitionScheme::even_odd(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CanonicalPartition::ZeroNonzero => "zero-nonzero",
            CanonicalPartition::EvenOdd => "even-odd",
        }
    }
}

impl FromStr for CanonicalPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero-nonzero" => Ok(CanonicalPartition::ZeroNonzero),
            "even-odd" => Ok(CanonicalPartition::EvenOdd),
            other => Err(Error::InvalidConfig(format!(
                "unknown partition '{other}' (expected zero-nonzero or even-odd)"
            ))),
        }
    }
}

/// Parses `zero-nonzero`, `even-odd` or `threshold:T` (`+` means `n < T`).
impl FromStr for PartitionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(t) = s.strip_prefix("threshold:") {
            let t: usize = t
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad threshold in '{s}'")))?;
            if t == 0 {
                return Err(Error::InvalidConfig("threshold must be at least 1".into()));
            }
            return Ok(Self::new(ModeSet::Below(t), ModeSet::Below(t)));
        }
        Ok(s.parse::<CanonicalPartition>()?.scheme())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortraitVector {
    /// `(w++, w+-, w-+, w--)`
    pub w: [f64; 4],
    /// `1 - sum(w)`: mass not captured by truncation.
    pub tail_deficit: f64,
}

impl PortraitVector {
    pub fn exact(w: [f64; 4]) -> Self {
        PortraitVector { w, tail_deficit: 0.0 }
    }

    pub fn w_pp(&self) -> f64 {
        self.w[0]
    }

    pub fn w_pm(&self) -> f64 {
        self.w[1]
    }

    pub fn w_mp(&self) -> f64 {
        self.w[2]
    }

    pub fn w_mm(&self) -> f64 {
        self.w[3]
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Marginal `+` probabilities of mode 1 and mode 2.
    pub fn marginals(&self) -> (f64, f64) {
        (self.w[0] + self.w[1], self.w[0] + self.w[2])
    }

    /// Largest deviation from the outer product of the two marginals,
    /// computed on the normalized vector.
    pub fn factorization_error(&self) -> f64 {
        let t = self.total();
        let w = self.w.map(|x| x / t);
        let p = [w[0] + w[1], w[2] + w[3]];
        let q = [w[0] + w[2], w[1] + w[3]];
        (0..4)
            .map(|c| (w[c] - p[c / 2] * q[c % 2]).abs())
            .fold(0.0, f64::max)
    }

    /// `E = w++ - w+- - w-+ + w--`
    pub fn correlation(&self) -> f64 {
        self.w[0] - self.w[1] - self.w[2] + self.w[3]
    }
}

/// Cell sums of a truncated table; the deficit is reported, never renormalized.
pub fn portrait_from_table(
    table: &TomogramTable,
    p: &PartitionScheme,
    tail_eps: f64,
) -> Result<PortraitVector> {
    let mut w = [0.0; 4];
    let side = table.n_max() + 1;
    for n1 in 0..side {
        for n2 in 0..side {
            w[p.cell(n1, n2)] += table.get(n1, n2);
        }
    }
    let deficit = 1.0 - w.iter().sum::<f64>();
    if deficit > tail_eps {
        return Err(Error::TailTooLarge { deficit, eps: tail_eps });
    }
    if deficit < -MASS_TOL {
        return Err(Error::InvalidProbability(format!(
            "portrait mass exceeds 1 by {:e}",
            -deficit
        )));
    }
    Ok(PortraitVector { w, tail_deficit: deficit.max(0.0) })
}

pub fn portrait_truncated<S: TomogramSource + ?Sized>(
    src: &S,
    p: &PartitionScheme,
    alpha: DisplacementPair,
    n_max: usize,
    tail_eps: f64,
) -> Result<PortraitVector> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("nMax must be at least 1".into()));
    }
    if !(tail_eps > 0.0) {
        return Err(Error::InvalidParameter("tail tolerance must be positive".into()));
    }
    portrait_from_table(&src.table(alpha, n_max)?, p, tail_eps)
}

/// `g_A(c) = sum_{n in A} c^n / n!` scaled by `e^{-|Re c|}`.
#[derive(Clone, Copy)]
enum SeriesKind {
    Zero,
    NonZero,
    Even,
    Odd,
}

impl SeriesKind {
    fn scaled(self, c: Complex) -> Complex {
        let (a, b) = (c.re, c.im);
        let s = a.abs();
        let phase = Complex::new(b.cos(), b.sin());
        match self {
            SeriesKind::Zero => Complex::new((-s).exp(), 0.0),
            SeriesKind::NonZero => {
                if s <= 1.0 {
                    // e^c - 1 = expm1(a) e^{ib} + (cos b - 1) + i sin b
                    let half = (0.5 * b).sin();
                    let em1 = phase * a.exp_m1() + Complex::new(-2.0 * half * half, b.sin());
                    em1 * (-s).exp()
                } else {
                    phase * (a - s).exp() - (-s).exp()
                }
            }
            SeriesKind::Even | SeriesKind::Odd => {
                let sign = if matches!(self, SeriesKind::Even) { 1.0 } else { -1.0 };
                (phase * (a - s).exp() + phase.conj() * (-a - s).exp() * sign) * 0.5
            }
        }
    }
}

/// Closed-form cell sum of the cat tomogram over `A1 x A2`:
///
/// ```text
/// w = C [ e^{-2 Re z} g1(|u1|^2) g2(|u2|^2) + e^{2 Re z} g1(|v1|^2) g2(|v2|^2)
///         + 2 Re( e^{-2i Im z} g1(u1 conj(v1)) g2(u2 conj(v2)) ) ]
/// ```
///
/// with `C = e^{-|a|^2} / (4 cosh s)`, `u = a + g`, `v = a - g`,
/// `z = conj(a1) g1 + conj(a2) g2`. Every `g` is evaluated scaled by
/// `e^{-|Re arg|}` with the scale folded into a bounded log prefactor, so no
/// intermediate overflows for any amplitude.
fn cat_cell(s: &CatState, alpha: DisplacementPair, k1: SeriesKind, k2: SeriesKind) -> f64 {
    let (a1, a2) = (alpha.alpha1, alpha.alpha2);
    let (g1, g2) = (s.gamma1, s.gamma2);
    let z = a1.conj() * g1 + a2.conj() * g2;
    let (u1, u2, v1, v2) = (a1 + g1, a2 + g2, a1 - g1, a2 - g2);
    let (c1, c2) = (u1 * v1.conj(), u2 * v2.conj());
    let ln_c = -(a1.norm_sqr() + a2.norm_sqr()) - 4f64.ln() - ln_cosh(s.total_intensity());

    let real = |x: f64| Complex::new(x, 0.0);
    let (n_u1, n_u2, n_v1, n_v2) = (u1.norm_sqr(), u2.norm_sqr(), v1.norm_sqr(), v2.norm_sqr());
    let t1 = (ln_c - 2.0 * z.re + n_u1 + n_u2).exp() * (k1.scaled(real(n_u1)) * k2.scaled(real(n_u2))).re;
    let t2 = (ln_c + 2.0 * z.re + n_v1 + n_v2).exp() * (k1.scaled(real(n_v1)) * k2.scaled(real(n_v2))).re;
    let rot = Complex::new(0.0, -2.0 * z.im).exp();
    let t3 = 2.0
        * (ln_c + c1.re.abs() + c2.re.abs()).exp()
        * (rot * k1.scaled(c1) * k2.scaled(c2)).re;
    t1 + t2 + t3
}

/// Zero-nonzero portrait of the cat state in closed form, `w--` taken as the
/// complement of the other three cells.
pub fn cat_portrait_zero_nonzero(s: &CatState, alpha: DisplacementPair) -> Result<PortraitVector> {
    use SeriesKind::{NonZero, Zero};
    let pp = clamp_probability(cat_cell(s, alpha, Zero, Zero), CLOSED_FORM_NEG_TOL)?;
    let pm = clamp_probability(cat_cell(s, alpha, Zero, NonZero), CLOSED_FORM_NEG_TOL)?;
    let mp = clamp_probability(cat_cell(s, alpha, NonZero, Zero), CLOSED_FORM_NEG_TOL)?;
    let mm = clamp_probability(1.0 - pp - pm - mp, CLOSED_FORM_NEG_TOL)?;
    Ok(PortraitVector::exact([pp, pm, mp, mm]))
}

/// Even-odd portrait of the cat state in closed form.
pub fn cat_portrait_even_odd(s: &CatState, alpha: DisplacementPair) -> Result<PortraitVector> {
    use SeriesKind::{Even, Odd};
    let cells = [(Even, Even), (Even, Odd), (Odd, Even), (Odd, Odd)];
    let mut w = [0.0; 4];
    for (slot, (k1, k2)) in w.iter_mut().zip(cells) {
        *slot = clamp_probability(cat_cell(s, alpha, k1, k2), EVEN_ODD_NEG_TOL)?;
    }
    Ok(PortraitVector::exact(w))
}

/// Anything that maps a displacement pair to a portrait.
pub trait PortraitSource: Send + Sync {
    fn portrait(&self, alpha: DisplacementPair) -> Result<PortraitVector>;
}

impl<F> PortraitSource for F
where
    F: Fn(DisplacementPair) -> Result<PortraitVector> + Send + Sync,
{
    fn portrait(&self, alpha: DisplacementPair) -> Result<PortraitVector> {
        self(alpha)
    }
}

/// Portraits by summing a truncated tomogram table.
pub struct TruncatedPortrait<S> {
    pub source: S,
    pub partition: PartitionScheme,
    pub n_max: usize,
    pub tail_eps: f64,
}

impl<S: TomogramSource> TruncatedPortrait<S> {
    pub fn new(source: S, partition: PartitionScheme, n_max: usize, tail_eps: f64) -> Self {
        TruncatedPortrait { source, partition, n_max, tail_eps }
    }
}

impl<S: TomogramSource> PortraitSource for TruncatedPortrait<S> {
    fn portrait(&self, alpha: DisplacementPair) -> Result<PortraitVector> {
        portrait_truncated(&self.source, &self.partition, alpha, self.n_max, self.tail_eps)
    }
}

/// Closed-form cat portraits for the two canonical partitions.
#[derive(Clone, Copy, Debug)]
pub struct CatClosedForm {
    pub state: CatState,
    pub partition: CanonicalPartition,
}

impl PortraitSource for CatClosedForm {
    fn portrait(&self, alpha: DisplacementPair) -> Result<PortraitVector> {
        match self.partition {
            CanonicalPartition::ZeroNonzero => cat_portrait_zero_nonzero(&self.state, alpha),
            CanonicalPartition::EvenOdd => cat_portrait_even_odd(&self.state, alpha),
        }
    }
}

/// Portrait source for a parsed state: cat closed forms for the canonical
/// partitions, truncated tomogram sums otherwise.
pub fn state_portraits(
    state: State,
    partition: PartitionScheme,
    n_max: usize,
    tail_eps: f64,
) -> Box<dyn PortraitSource> {
    match (state, partition.canonical()) {
        (State::Cat(state), Some(partition)) => Box::new(CatClosedForm { state, partition }),
        (state, _) => Box::new(TruncatedPortrait::new(state, partition, n_max, tail_eps)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{indicator_map, stochastic_reduce};
    use crate::states::{CoherentProduct, GaussianSpec, GaussianState, QuadratureConvention};
    use crate::numerics::{Mat4, Vec4};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn pair(a1: Complex, a2: Complex) -> DisplacementPair {
        DisplacementPair::new(a1, a2)
    }

    fn max_diff(a: &PortraitVector, b: &PortraitVector) -> f64 {
        a.w.iter().zip(&b.w).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn vacuum_portraits() {
        let vac = CoherentProduct::new(c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        let p = portrait_truncated(&vac, &PartitionScheme::zero_nonzero(), DisplacementPair::zero(), 10, 1e-4).unwrap();
        assert_eq!(p.w, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.tail_deficit, 0.0);

        let cat = CatState::new(c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        for p in [
            cat_portrait_zero_nonzero(&cat, DisplacementPair::zero()).unwrap(),
            cat_portrait_even_odd(&cat, DisplacementPair::zero()).unwrap(),
        ] {
            assert!(max_diff(&p, &PortraitVector::exact([1.0, 0.0, 0.0, 0.0])) < 1e-15, "{p:?}");
        }
    }

    #[test]
    fn coherent_zero_nonzero_closed_form() {
        let s = CoherentProduct::new(c(0.7, -0.3), c(-0.2, 0.5)).unwrap();
        let alpha = pair(c(0.4, 0.1), c(0.3, -0.6));
        let l1 = (alpha.alpha1 + s.gamma1).norm_sqr();
        let l2 = (alpha.alpha2 + s.gamma2).norm_sqr();
        let (e1, e2) = ((-l1).exp(), (-l2).exp());
        let expect = PortraitVector::exact([e1 * e2, e1 * (1.0 - e2), (1.0 - e1) * e2, (1.0 - e1) * (1.0 - e2)]);
        let got = portrait_truncated(&s, &PartitionScheme::zero_nonzero(), alpha, 60, 1e-4).unwrap();
        assert!(max_diff(&got, &expect) < 1e-10);
    }

    #[test]
    fn tail_too_large_is_reported() {
        let s = CoherentProduct::new(c(3.0, 0.0), c(0.0, 0.0)).unwrap();
        let r = portrait_truncated(&s, &PartitionScheme::even_odd(), DisplacementPair::zero(), 5, 1e-4);
        assert!(matches!(r, Err(Error::TailTooLarge { .. })));
    }

    #[test]
    fn printed_gaussian_column() {
        let a = 35f64.sqrt() / 2.0;
        let b = 3f64.sqrt() / 2.0;
        let m = Mat4([[3.0, a, 0.0, 0.0], [a, 3.0, 0.0, 0.0], [0.0, 0.0, 1.0, b], [0.0, 0.0, b, 1.0]]);
        let g = GaussianState::new(
            GaussianSpec::with_convention(m, Vec4::zero(), QuadratureConvention::Swapped).unwrap(),
        )
        .unwrap();
        let p = portrait_truncated(&g, &PartitionScheme::even_odd(), pair(c(0.0, -0.12), c(0.0, 0.04)), 30, 1e-4).unwrap();
        let expect = [0.6199, 0.0222, 0.0241, 0.3335];
        for (x, y) in p.w.iter().zip(expect) {
            assert!((x - y).abs() <= 5e-3, "{p:?}");
        }
    }

    #[test]
    fn cat_zero_nonzero_matches_truncation() {
        let cat = CatState::new(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let alpha = pair(c(0.3, 0.1), c(0.0, -0.2));
        let closed = cat_portrait_zero_nonzero(&cat, alpha).unwrap();
        let sum = portrait_truncated(&cat, &PartitionScheme::zero_nonzero(), alpha, 50, 1e-4).unwrap();
        assert!(max_diff(&closed, &sum) < 1e-9, "{closed:?} {sum:?}");
        assert!((closed.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cat_even_odd_matches_truncation() {
        let cat = CatState::new(c(0.8, 0.0), c(0.8, 0.0)).unwrap();
        let alpha = pair(c(0.0, 0.1), c(-0.2, 0.0));
        let closed = cat_portrait_even_odd(&cat, alpha).unwrap();
        let sum = portrait_truncated(&cat, &PartitionScheme::even_odd(), alpha, 50, 1e-4).unwrap();
        assert!(max_diff(&closed, &sum) < 1e-8);
    }

    #[test]
    fn cat_with_vacuum_mode_is_even_in_mode_two() {
        let cat = CatState::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let p = cat_portrait_even_odd(&cat, DisplacementPair::zero()).unwrap();
        assert!(p.w_mp().abs() < 1e-15 && p.w_mm().abs() < 1e-15);
        assert!((p.w_pp() + p.w_pm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_cat_closed_forms_stay_normalized() {
        for g in [10.0, 50.0] {
            let cat = CatState::new(c(g, 0.0), c(g, 0.0)).unwrap();
            for alpha in [DisplacementPair::zero(), pair(c(0.02, 0.01), c(-0.03, 0.0)), pair(c(1.5, -2.0), c(0.3, 0.7))] {
                for p in [cat_portrait_even_odd(&cat, alpha).unwrap(), cat_portrait_zero_nonzero(&cat, alpha).unwrap()] {
                    assert!(p.w.iter().all(|x| x.is_finite()));
                    assert!((p.total() - 1.0).abs() < 1e-9, "{g} {alpha:?} {p:?}");
                }
            }
        }
    }

    #[test]
    fn non_product_cells_do_not_factorize() {
        // a diagonal split {n1 + n2 even} x ... is not of product form: even for
        // a product state the four cell masses are not an outer product
        let s = CoherentProduct::new(c(0.8, 0.0), c(0.6, 0.0)).unwrap();
        let table = s.table(DisplacementPair::zero(), 40).unwrap();
        let cell = |n1: usize, n2: usize| match (n1 == 0, (n1 + n2) % 2 == 0) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        let mut w = [0.0; 4];
        for n1 in 0..=40 {
            for n2 in 0..=40 {
                w[cell(n1, n2)] += table.get(n1, n2);
            }
        }
        assert!(PortraitVector::exact(w).factorization_error() > 1e-3);
        let product = portrait_truncated(&s, &PartitionScheme::zero_nonzero(), DisplacementPair::zero(), 40, 1e-4).unwrap();
        assert!(product.factorization_error() < 1e-12);
    }

    #[test]
    fn partition_names() {
        assert!(matches!("even-odd".parse::<PartitionScheme>().unwrap().canonical(), Some(CanonicalPartition::EvenOdd)));
        assert!(matches!("zero-nonzero".parse::<PartitionScheme>().unwrap().canonical(), Some(CanonicalPartition::ZeroNonzero)));
        let t: PartitionScheme = "threshold:3".parse().unwrap();
        assert_eq!(t.cell(2, 3), 1);
        assert!("odd-even".parse::<PartitionScheme>().is_err());
        assert!("threshold:0".parse::<PartitionScheme>().is_err());
    }

    fn complex_in(r: f64) -> impl Strategy<Value = Complex> {
        (-r..r, -r..r).prop_map(|(a, b)| Complex::new(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn closed_forms_match_truncation(
            g1 in complex_in(1.4), g2 in complex_in(1.4), a1 in complex_in(1.4), a2 in complex_in(1.4),
        ) {
            let cat = CatState::new(g1, g2).unwrap();
            let alpha = pair(a1, a2);
            let zn = portrait_truncated(&cat, &PartitionScheme::zero_nonzero(), alpha, 60, 1e-4).unwrap();
            let eo = portrait_truncated(&cat, &PartitionScheme::even_odd(), alpha, 60, 1e-4).unwrap();
            prop_assert!(max_diff(&zn, &cat_portrait_zero_nonzero(&cat, alpha).unwrap()) < 1e-8);
            prop_assert!(max_diff(&eo, &cat_portrait_even_odd(&cat, alpha).unwrap()) < 1e-8);
        }

        #[test]
        fn coherent_portraits_factorize(
            g1 in complex_in(1.4), g2 in complex_in(1.4), a1 in complex_in(1.4), a2 in complex_in(1.4),
            even in any::<bool>(),
        ) {
            let s = CoherentProduct::new(g1, g2).unwrap();
            let p = if even { PartitionScheme::even_odd() } else { PartitionScheme::zero_nonzero() };
            let v = portrait_truncated(&s, &p, pair(a1, a2), 60, 1e-4).unwrap();
            prop_assert!(v.factorization_error() < 1e-9);
        }

        #[test]
        fn tail_deficit_non_increasing(g in complex_in(2.0), a in complex_in(2.0)) {
            let s = CatState::new(g, g * 0.5).unwrap();
            let mut last = f64::INFINITY;
            for n in [5usize, 10, 20, 40] {
                let v = portrait_truncated(&s, &PartitionScheme::even_odd(), pair(a, a), n, 1.0).unwrap();
                prop_assert!(v.tail_deficit <= last + 1e-15);
                last = v.tail_deficit;
            }
        }

        #[test]
        fn stochastic_reduce_agrees(g1 in complex_in(0.8), g2 in complex_in(0.8), even in any::<bool>()) {
            let s = CoherentProduct::new(g1, g2).unwrap();
            let p = if even { PartitionScheme::even_odd() } else { PartitionScheme::zero_nonzero() };
            let table = s.table(DisplacementPair::zero(), 60).unwrap();
            let v = portrait_from_table(&table, &p, 1e-4).unwrap();
            let rows = indicator_map(61, |n| p.mode1.contains(n));
            let cols = indicator_map(61, |n| p.mode2.contains(n));
            let r = stochastic_reduce(&table.to_array2(), &rows, &cols).unwrap();
            let flat = [r[0][0], r[0][1], r[1][0], r[1][1]];
            for (x, y) in flat.iter().zip(v.w) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn state_portraits_use_closed_form_for_cats() {
        let cat = CatState::new(c(0.8, 0.0), c(0.0, 0.6)).unwrap();
        let alpha = pair(c(0.1, -0.2), c(0.3, 0.0));
        let closed = state_portraits(State::Cat(cat), PartitionScheme::even_odd(), 2, 1e-4);
        // n_max = 2 would leave a visible tail if the table were summed
        assert_eq!(closed.portrait(alpha).unwrap().tail_deficit, 0.0);
        let summed = state_portraits(State::Cat(cat), PartitionScheme::new(ModeSet::Below(1), ModeSet::Below(1)), 40, 1e-12);
        let zn = cat_portrait_zero_nonzero(&cat, alpha).unwrap();
        let w = summed.portrait(alpha).unwrap();
        for j in 0..4 {
            assert!((w.w[j] - zn.w[j]).abs() < 1e-12);
        }
    }
}
