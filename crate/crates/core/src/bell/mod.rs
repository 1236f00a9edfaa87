//! Bell-CHSH functional on portrait matrices and its maximization over
//! displacement settings.

mod simplex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Complex;
use crate::portrait::{PortraitSource, PortraitVector, DEFAULT_TAIL_EPS};
use crate::states::DisplacementPair;

use simplex::{minimize, SimplexOptions};

/// `2 sqrt(2)`
pub const CIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;
/// Slack above the Cirelson bound before a value is rejected.
pub const CIRELSON_TOL: f64 = 1e-6;
const COLUMN_TOL: f64 = 1e-9;

/// CHSH sign matrix: rows one to three are `(1, -1, -1, 1)`, row four is
/// `(-1, 1, 1, -1)`.
pub const I_MATRIX: [[f64; 4]; 4] = [
    [1.0, -1.0, -1.0, 1.0],
    [1.0, -1.0, -1.0, 1.0],
    [1.0, -1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0, -1.0],
];

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BellSettings {
    pub alpha1: Complex,
    pub alpha2: Complex,
    pub beta1: Complex,
    pub beta2: Complex,
}

impl BellSettings {
    pub fn new(alpha1: Complex, alpha2: Complex, beta1: Complex, beta2: Complex) -> Self {
        BellSettings { alpha1, alpha2, beta1, beta2 }
    }

    /// Displacements for the four columns: `(a1,a2)`, `(a1,b2)`, `(b1,a2)`, `(b1,b2)`.
    pub fn pairs(&self) -> [DisplacementPair; 4] {
        [
            DisplacementPair::new(self.alpha1, self.alpha2),
            DisplacementPair::new(self.alpha1, self.beta2),
            DisplacementPair::new(self.beta1, self.alpha2),
            DisplacementPair::new(self.beta1, self.beta2),
        ]
    }

    /// `[Re a1, Im a1, Re a2, Im a2, Re b1, Im b1, Re b2, Im b2]`
    pub fn to_reals(&self) -> [f64; 8] {
        let [a1, a2, b1, b2] = [self.alpha1, self.alpha2, self.beta1, self.beta2];
        [a1.re, a1.im, a2.re, a2.im, b1.re, b1.im, b2.re, b2.im]
    }

    pub fn from_reals(x: &[f64]) -> Self {
        let c = |i: usize| Complex::new(x[2 * i], x[2 * i + 1]);
        BellSettings::new(c(0), c(1), c(2), c(3))
    }

    pub fn is_finite(&self) -> bool {
        self.to_reals().iter().all(|v| v.is_finite())
    }

    /// Largest `|Re|` or `|Im|` over the four settings.
    pub fn max_component(&self) -> f64 {
        self.to_reals().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Column `j` holds the portrait at the `j`-th settings pair; rows are in
/// `(++, +-, -+, --)` order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellMatrix {
    pub m: [[f64; 4]; 4],
    /// Truncation deficit of each column.
    pub deficits: [f64; 4],
}

impl BellMatrix {
    /// Checks that each column plus its deficit sums to one with entries in
    /// `[-1e-9, 1]`.
    pub fn from_columns(cols: [PortraitVector; 4]) -> Result<Self> {
        let mut m = [[0.0; 4]; 4];
        for (j, col) in cols.iter().enumerate() {
            let sum = col.total() + col.tail_deficit;
            if (sum - 1.0).abs() > COLUMN_TOL
                || col.w.iter().any(|&v| !(-COLUMN_TOL..=1.0 + COLUMN_TOL).contains(&v))
            {
                return Err(Error::InvalidStochasticMatrix(format!(
                    "column {j} is not a probability vector: {:?}",
                    col.w
                )));
            }
            for i in 0..4 {
                m[i][j] = col.w[i];
            }
        }
        Ok(BellMatrix { m, deficits: cols.map(|c| c.tail_deficit) })
    }

    pub fn column(&self, j: usize) -> [f64; 4] {
        std::array::from_fn(|i| self.m[i][j])
    }

    /// Correlations `E_j = w++ - w+- - w-+ + w--` per column.
    pub fn correlations(&self) -> [f64; 4] {
        std::array::from_fn(|j| {
            let c = self.column(j);
            c[0] - c[1] - c[2] + c[3]
        })
    }
}

pub fn bell_matrix<P: PortraitSource + ?Sized>(portraits: &P, s: &BellSettings) -> Result<BellMatrix> {
    let pairs = s.pairs();
    let cols = [
        portraits.portrait(pairs[0])?,
        portraits.portrait(pairs[1])?,
        portraits.portrait(pairs[2])?,
        portraits.portrait(pairs[3])?,
    ];
    BellMatrix::from_columns(cols)
}

/// `B = |Tr(M I)|`, which equals `|E1 + E2 + E3 - E4|`.
pub fn bell_number(m: &BellMatrix) -> f64 {
    let mut trace = 0.0;
    for (i, row) in m.m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            trace += v * I_MATRIX[j][i];
        }
    }
    trace.abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    SeparableConsistent,
    EntangledWitnessed { margin: f64 },
}

/// Classifies a Bell number against the classical bound 2.
pub fn chsh_check(b: f64) -> Result<Verdict> {
    if !b.is_finite() || !(0.0..=CIRELSON_BOUND + CIRELSON_TOL).contains(&b) {
        return Err(Error::InvalidBellNumber(b));
    }
    Ok(if b > 2.0 {
        Verdict::EntangledWitnessed { margin: b - 2.0 }
    } else {
        Verdict::SeparableConsistent
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximizeConfig {
    /// Half-width of the box for the real and imaginary part of each setting.
    pub box_half_width: f64,
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub xtol: f64,
    pub ftol: f64,
    /// Truncation for tomogram-sum portraits.
    pub n_max: usize,
    pub tail_eps: f64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    pub start_distribution: StartDistribution,
}

/// How start points are drawn inside the box.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartDistribution {
    /// Uniform over the box.
    #[default]
    Uniform,
    /// Even-indexed starts are uniform; odd-indexed ones are a uniform box
    /// point shrunk towards the origin by `10^{-decades r}`, `r` uniform in
    /// `[0, 1]`. Reaches optima whose scale is far below the box size, such
    /// as the `1/|g|` structure of large cat states.
    MultiScale { decades: f64 },
}

impl Default for MaximizeConfig {
    fn default() -> Self {
        MaximizeConfig {
            box_half_width: 2.0,
            starts: 64,
            seed: 42,
            max_iters: 2000,
            xtol: 1e-8,
            ftol: 1e-9,
            n_max: 30,
            tail_eps: DEFAULT_TAIL_EPS,
            jobs: None,
            start_distribution: StartDistribution::Uniform,
        }
    }
}

impl MaximizeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.box_half_width > 0.0 && self.box_half_width.is_finite()) {
            return bad("box half-width must be positive");
        }
        if self.starts < 1 {
            return bad("at least one start is required");
        }
        if self.max_iters < 1 {
            return bad("maxIters must be at least 1");
        }
        if !(self.xtol > 0.0 && self.ftol > 0.0) {
            return bad("xtol and ftol must be positive");
        }
        if self.n_max < 1 {
            return bad("nMax must be at least 1");
        }
        if !(self.tail_eps > 0.0) {
            return bad("tail tolerance must be positive");
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1");
        }
        if let StartDistribution::MultiScale { decades } = self.start_distribution {
            if !(decades >= 0.0 && decades.is_finite()) {
                return bad("multi-scale decades must be non-negative");
            }
        }
        Ok(())
    }

    /// Start points, drawn in sequence so a smaller run's starts are a prefix
    /// of a larger run's.
    pub fn start_points(&self) -> Vec<[f64; 8]> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let b = self.box_half_width;
        (0..self.starts)
            .map(|i| {
                let x: [f64; 8] = std::array::from_fn(|_| rng.gen_range(-b..=b));
                match self.start_distribution {
                    StartDistribution::Uniform => x,
                    StartDistribution::MultiScale { .. } if i % 2 == 0 => x,
                    StartDistribution::MultiScale { decades } => {
                        let scale = 10f64.powf(-decades * rng.gen::<f64>());
                        x.map(|v| v * scale)
                    }
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximizeResult {
    pub f: f64,
    pub argmax: BellSettings,
    pub evaluations: usize,
    /// Best value per start; `None` when the start point could not be evaluated.
    pub per_start_best: Vec<Option<f64>>,
    /// Index of the start that produced `f`.
    pub best_start: usize,
}

struct StartOutcome {
    best: Option<(f64, [f64; 8])>,
    evaluations: usize,
    error: Option<Error>,
}

/// Multi-start box-projected simplex ascent of `B`.
///
/// Settings where a portrait cannot be evaluated (tail too large, negative
/// tomogram, ...) count as infeasible. A start whose initial point is
/// infeasible is reported as failed; only when every start fails is an error
/// returned. The result is a lower bound on the true maximum.
pub fn maximize_bell<P: PortraitSource + ?Sized>(
    portraits: &P,
    cfg: &MaximizeConfig,
) -> Result<MaximizeResult> {
    cfg.validate()?;
    let starts = cfg.start_points();
    let opts = SimplexOptions {
        lower: -cfg.box_half_width,
        upper: cfg.box_half_width,
        step: 0.25 * cfg.box_half_width,
        max_iters: cfg.max_iters,
        xtol: cfg.xtol,
        ftol: cfg.ftol,
        restarts: 6,
        chunk: 400,
    };

    let run_one = |x0: &[f64; 8]| -> StartOutcome {
        let mut first_error = None;
        let objective = |x: &[f64]| match bell_matrix(portraits, &BellSettings::from_reals(x)) {
            Ok(m) => Some(-bell_number(&m)),
            Err(e) => {
                if first_error.is_none() {
                    first_error = Some(e);
                }
                None
            }
        };
        match minimize(objective, *x0, &opts) {
            Some(r) => StartOutcome { best: Some((-r.f, r.x)), evaluations: r.evaluations, error: None },
            None => StartOutcome { best: None, evaluations: 1, error: first_error },
        }
    };

    let outcomes: Vec<StartOutcome> = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(|| starts.par_iter().map(run_one).collect()),
        None => starts.par_iter().map(run_one).collect(),
    };

    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let per_start_best: Vec<Option<f64>> = outcomes.iter().map(|o| o.best.map(|b| b.0)).collect();
    for (i, o) in outcomes.iter().enumerate() {
        if let Some(e) = &o.error {
            log::debug!("start {i} failed: {e}");
        }
    }
    // strict comparison keeps the lowest index among ties
    let mut best: Option<(usize, f64, [f64; 8])> = None;
    for (i, o) in outcomes.iter().enumerate() {
        if let Some((f, x)) = o.best {
            if best.is_none_or(|(_, bf, _)| f > bf) {
                best = Some((i, f, x));
            }
        }
    }
    match best {
        Some((i, f, x)) => Ok(MaximizeResult {
            f,
            argmax: BellSettings::from_reals(&x),
            evaluations,
            per_start_best,
            best_start: i,
        }),
        None => {
            let first = outcomes
                .into_iter()
                .find_map(|o| o.error)
                .unwrap_or(Error::InvalidConfig("no start could be evaluated".into()));
            Err(Error::AllStartsFailed { starts: cfg.starts, first: Box::new(first) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portrait::{
        portrait_truncated, CanonicalPartition, CatClosedForm, PartitionScheme, TruncatedPortrait,
    };
    use crate::states::{CatState, CoherentProduct};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    /// Bell matrix printed for the squeezed example at (-0.12i, 0.04i, 0.22i, -0.32i).
    const PRINTED_MG: [[f64; 4]; 4] = [
        [0.6199, 0.5907, 0.6083, 0.4678],
        [0.0222, 0.0515, 0.0291, 0.1696],
        [0.0241, 0.0395, 0.0357, 0.1624],
        [0.3335, 0.3181, 0.3266, 0.2000],
    ];

    #[test]
    fn constant_portrait_gives_constant_columns() {
        let src = |_: DisplacementPair| Ok(PortraitVector::exact([1.0, 0.0, 0.0, 0.0]));
        let m = bell_matrix(&src, &BellSettings::default()).unwrap();
        for j in 0..4 {
            assert_eq!(m.column(j), [1.0, 0.0, 0.0, 0.0]);
        }
        assert_eq!(bell_number(&m), 2.0);
    }

    #[test]
    fn uniform_columns_give_zero() {
        let m = BellMatrix::from_columns([PortraitVector::exact([0.25; 4]); 4]).unwrap();
        assert_eq!(bell_number(&m), 0.0);
    }

    #[test]
    fn trace_convention_on_printed_matrix() {
        let m = BellMatrix { m: PRINTED_MG, deficits: [0.0; 4] };
        let b = bell_number(&m);
        assert!((b - 2.26).abs() < 0.02, "{b}");
        let e = m.correlations();
        assert!((b - (e[0] + e[1] + e[2] - e[3])).abs() < 1e-12);
        // the elementwise pairing sum(M_ij I_ij) is not the functional
        let elementwise: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| PRINTED_MG[i][j] * I_MATRIX[i][j]).sum();
        assert!((elementwise.abs() - 2.26).abs() > 0.1);
    }

    #[test]
    fn swapping_settings_permutes_columns() {
        let cat = CatClosedForm {
            state: CatState::new(c(0.7, 0.1), c(0.5, -0.3)).unwrap(),
            partition: CanonicalPartition::EvenOdd,
        };
        let s = BellSettings::new(c(0.1, 0.2), c(-0.3, 0.0), c(0.0, 0.4), c(0.2, -0.1));
        let t = BellSettings::new(s.beta1, s.beta2, s.alpha1, s.alpha2);
        let (a, b) = (bell_matrix(&cat, &s).unwrap(), bell_matrix(&cat, &t).unwrap());
        for (j, k) in [(0, 3), (1, 2), (2, 1), (3, 0)] {
            assert_eq!(a.column(j), b.column(k));
        }
    }

    #[test]
    fn rejects_non_stochastic_columns() {
        let bad = PortraitVector::exact([0.5, 0.5, 0.5, 0.0]);
        let ok = PortraitVector::exact([0.25; 4]);
        assert!(matches!(BellMatrix::from_columns([ok, bad, ok, ok]), Err(Error::InvalidStochasticMatrix(_))));
        let with_tail = PortraitVector { w: [0.2, 0.3, 0.2, 0.29], tail_deficit: 0.01 };
        assert!(BellMatrix::from_columns([with_tail; 4]).is_ok());
    }

    #[test]
    fn chsh_verdicts() {
        assert_eq!(chsh_check(1.9).unwrap(), Verdict::SeparableConsistent);
        assert_eq!(chsh_check(2.0).unwrap(), Verdict::SeparableConsistent);
        match chsh_check(2.26).unwrap() {
            Verdict::EntangledWitnessed { margin } => assert!((margin - 0.26).abs() < 1e-12),
            v => panic!("{v:?}"),
        }
        assert!(matches!(chsh_check(CIRELSON_BOUND + 0.01), Err(Error::InvalidBellNumber(_))));
        assert!(chsh_check(CIRELSON_BOUND + 1e-7).is_ok());
        assert!(matches!(chsh_check(-0.1), Err(Error::InvalidBellNumber(_))));
    }

    #[test]
    fn settings_round_trip() {
        let s = BellSettings::new(c(0.1, 0.2), c(0.3, 0.4), c(0.5, 0.6), c(0.7, 0.8));
        assert_eq!(BellSettings::from_reals(&s.to_reals()), s);
        assert_eq!(s.max_component(), 0.8);
    }

    #[test]
    fn config_validation() {
        assert!(MaximizeConfig::default().validate().is_ok());
        for cfg in [
            MaximizeConfig { box_half_width: 0.0, ..Default::default() },
            MaximizeConfig { starts: 0, ..Default::default() },
            MaximizeConfig { tail_eps: 0.0, ..Default::default() },
            MaximizeConfig { jobs: Some(0), ..Default::default() },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn start_points_are_prefix_stable() {
        let small = MaximizeConfig { starts: 4, seed: 9, ..Default::default() }.start_points();
        let large = MaximizeConfig { starts: 8, seed: 9, ..Default::default() }.start_points();
        assert_eq!(small[..], large[..4]);
        assert!(large.iter().flatten().all(|v| v.abs() <= 2.0));

        let ms = |starts| MaximizeConfig {
            starts,
            seed: 9,
            start_distribution: StartDistribution::MultiScale { decades: 3.0 },
            ..Default::default()
        };
        let (small, large) = (ms(4).start_points(), ms(8).start_points());
        assert_eq!(small[..], large[..4]);
        assert!(large.iter().flatten().all(|v| v.abs() <= 2.0));
    }

    fn quick(starts: usize, seed: u64) -> MaximizeConfig {
        MaximizeConfig { starts, seed, max_iters: 400, ..Default::default() }
    }

    #[test]
    fn coherent_product_stays_classical() {
        let s = CoherentProduct::new(c(0.5, 0.0), c(0.5, 0.0)).unwrap();
        for p in [PartitionScheme::zero_nonzero(), PartitionScheme::even_odd()] {
            let src = TruncatedPortrait::new(s, p, 40, 1e-4);
            let r = maximize_bell(&src, &quick(4, 1)).unwrap();
            assert!(r.f <= 2.0 + 1e-6, "{}", r.f);
        }
    }

    #[test]
    fn cat_violates_chsh() {
        let cat = CatClosedForm {
            state: CatState::new(c(1.0, 0.0), c(1.0, 0.0)).unwrap(),
            partition: CanonicalPartition::EvenOdd,
        };
        let r = maximize_bell(&cat, &quick(8, 42)).unwrap();
        assert!(r.f > 2.0 && r.f <= CIRELSON_BOUND + CIRELSON_TOL, "{}", r.f);
        let again = bell_number(&bell_matrix(&cat, &r.argmax).unwrap());
        assert!((again - r.f).abs() <= 1e-12);
        assert!(r.argmax.max_component() <= 2.0);
    }

    #[test]
    fn deterministic_and_monotone_in_starts() {
        let cat = CatClosedForm {
            state: CatState::new(c(0.8, 0.0), c(0.6, 0.0)).unwrap(),
            partition: CanonicalPartition::ZeroNonzero,
        };
        let a = maximize_bell(&cat, &quick(3, 5)).unwrap();
        let b = maximize_bell(&cat, &quick(3, 5)).unwrap();
        assert_eq!(a.f.to_bits(), b.f.to_bits());
        assert_eq!(a.argmax, b.argmax);
        let more = maximize_bell(&cat, &quick(6, 5)).unwrap();
        assert!(more.f >= a.f);
        assert_eq!(more.per_start_best[..3], a.per_start_best[..]);
        let pinned = maximize_bell(&cat, &MaximizeConfig { jobs: Some(1), ..quick(3, 5) }).unwrap();
        assert_eq!(pinned.f.to_bits(), a.f.to_bits());
    }

    #[test]
    fn all_starts_failing_is_an_error() {
        let src = |_: DisplacementPair| -> Result<PortraitVector> {
            Err(Error::TailTooLarge { deficit: 0.5, eps: 1e-4 })
        };
        match maximize_bell(&src, &quick(3, 1)) {
            Err(Error::AllStartsFailed { starts: 3, first }) => {
                assert!(matches!(*first, Error::TailTooLarge { .. }))
            }
            other => panic!("{other:?}"),
        }
    }

    fn complex_in(r: f64) -> impl Strategy<Value = Complex> {
        (-r..r, -r..r).prop_map(|(a, b)| Complex::new(a, b))
    }

    fn settings_in(r: f64) -> impl Strategy<Value = BellSettings> {
        (complex_in(r), complex_in(r), complex_in(r), complex_in(r))
            .prop_map(|(a, b, c, d)| BellSettings::new(a, b, c, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn separable_states_never_violate(
            g1 in complex_in(1.5), g2 in complex_in(1.5), s in settings_in(1.5), even in any::<bool>(),
        ) {
            let st = CoherentProduct::new(g1, g2).unwrap();
            let p = if even { PartitionScheme::even_odd() } else { PartitionScheme::zero_nonzero() };
            let src = |a: DisplacementPair| portrait_truncated(&st, &p, a, 60, 1e-4);
            let b = bell_number(&bell_matrix(&src, &s).unwrap());
            prop_assert!(b <= 2.0 + 1e-9, "{}", b);
        }

        #[test]
        fn cat_bell_numbers_respect_cirelson(
            g1 in complex_in(3.0), g2 in complex_in(3.0), s in settings_in(2.0), even in any::<bool>(),
        ) {
            let partition = if even { CanonicalPartition::EvenOdd } else { CanonicalPartition::ZeroNonzero };
            let cat = CatClosedForm { state: CatState::new(g1, g2).unwrap(), partition };
            let b = bell_number(&bell_matrix(&cat, &s).unwrap());
            prop_assert!(b <= CIRELSON_BOUND + CIRELSON_TOL);
        }
    }
}
