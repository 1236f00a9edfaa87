//! Four-dimensional Hermite polynomials
//! `H^R_k(x) = (-1)^|k| exp(x R x / 2) d^k/dx^k exp(-x R x / 2)`.
//!
//! Values are built with the three-term recursion
//! `H_{k+e_i} = (R x)_i H_k - sum_j R_ij k_j H_{k-e_j}`.
//! Which coordinate gets lowered at each step is fixed by [`reduction_axis`];
//! every evaluator in this module uses it, so they all perform the same
//! floating-point operations in the same order.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::numerics::{Complex, Mat4C, Vec4C};

/// Default bound on the total order `|k|`.
pub const DEFAULT_MAX_ORDER: usize = 128;

/// Highest total order accepted by [`hermite_oracle`].
pub const ORACLE_MAX_ORDER: usize = 8;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HermiteIndex(pub [usize; 4]);

impl HermiteIndex {
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    /// Index `(n1, n2, n1, n2)` used by the two-mode photon distribution.
    pub fn diagonal(n1: usize, n2: usize) -> Self {
        HermiteIndex([n1, n2, n1, n2])
    }
}

/// Matrix `R` (complex symmetric) and argument `x`, with `R x` cached.
#[derive(Clone, Debug)]
pub struct HermiteParams {
    r: Mat4C,
    x: Vec4C,
    rx: Vec4C,
}

impl HermiteParams {
    pub fn new(r: Mat4C, x: Vec4C) -> Result<Self> {
        let asym = r.asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::AsymmetricR(asym));
        }
        let rx = r.mul_vec(&x);
        Ok(HermiteParams { r, x, rx })
    }

    pub fn r(&self) -> &Mat4C {
        &self.r
    }

    pub fn x(&self) -> &Vec4C {
        &self.x
    }
}

/// Coordinate lowered when computing `H_k` from smaller indices.
///
/// Coordinates are paired as (1,3) and (2,4). The larger member of the more
/// unbalanced pair is lowered (ties go to pair (1,3) and to its first
/// member). Starting from diagonal indices `(a, b, a, b)`, every index reached
/// through the recursion then satisfies `|k1 - k3| <= 2` and `|k2 - k4| <= 2`,
/// which is what makes [`DiagonalHermite`] cheap.
pub fn reduction_axis(k: [usize; 4]) -> usize {
    let d1 = k[0] as i64 - k[2] as i64;
    let d2 = k[1] as i64 - k[3] as i64;
    let pair1_live = k[0] + k[2] > 0;
    if pair1_live && (d1.abs() >= d2.abs() || k[1] + k[3] == 0) {
        if d1 >= 0 {
            0
        } else {
            2
        }
    } else if d2 >= 0 {
        1
    } else {
        3
    }
}

/// One application of the recursion: `H_k` given a lookup for smaller indices.
#[inline]
fn recursion_step(
    params: &HermiteParams,
    k: [usize; 4],
    mut lookup: impl FnMut([usize; 4]) -> Complex,
) -> Complex {
    let i = reduction_axis(k);
    let mut km = k;
    km[i] -= 1;
    let mut value = params.rx.0[i] * lookup(km);
    for j in 0..4 {
        if km[j] > 0 {
            let mut kk = km;
            kk[j] -= 1;
            value -= params.r.0[i][j] * (km[j] as f64) * lookup(kk);
        }
    }
    value
}

fn check_order(k: HermiteIndex, max_order: usize) -> Result<()> {
    if k.order() > max_order {
        return Err(Error::OrderOverflow {
            order: k.order(),
            max: max_order,
        });
    }
    Ok(())
}

/// Evaluates `H^R_k(x)` with a dense memo over the box `0..=k`.
pub fn hermite_eval(params: &HermiteParams, k: HermiteIndex) -> Result<Complex> {
    hermite_eval_with_max(params, k, DEFAULT_MAX_ORDER)
}

pub fn hermite_eval_with_max(
    params: &HermiteParams,
    k: HermiteIndex,
    max_order: usize,
) -> Result<Complex> {
    check_order(k, max_order)?;
    let dims = k.0.map(|n| n + 1);
    let slot = |idx: [usize; 4]| ((idx[0] * dims[1] + idx[1]) * dims[2] + idx[2]) * dims[3] + idx[3];
    let mut memo = vec![Complex::new(0.0, 0.0); dims.iter().product()];
    memo[0] = Complex::new(1.0, 0.0);
    // lexicographic order visits every lowered index before the index itself
    for a in 0..dims[0] {
        for b in 0..dims[1] {
            for c in 0..dims[2] {
                for d in 0..dims[3] {
                    let idx = [a, b, c, d];
                    if idx == [0; 4] {
                        continue;
                    }
                    let v = recursion_step(params, idx, |q| memo[slot(q)]);
                    memo[slot(idx)] = v;
                }
            }
        }
    }
    Ok(memo[slot(k.0)])
}

/// Plain recursive evaluation without a memo. Exponential in `|k|`.
pub fn hermite_eval_recursive(params: &HermiteParams, k: HermiteIndex) -> Complex {
    fn go(params: &HermiteParams, k: [usize; 4]) -> Complex {
        if k == [0; 4] {
            return Complex::new(1.0, 0.0);
        }
        recursion_step(params, k, |q| go(params, q))
    }
    go(params, k.0)
}

/// Independent oracle: differentiates `exp(-x R x / 2)` symbolically over
/// multivariate monomials and evaluates the resulting polynomial at `x`.
pub fn hermite_oracle(params: &HermiteParams, k: HermiteIndex) -> Result<Complex> {
    check_order(k, ORACLE_MAX_ORDER)?;
    // P such that d^k G = P * G with G = exp(-x R x / 2)
    let mut poly: BTreeMap<[u8; 4], Complex> = BTreeMap::new();
    poly.insert([0; 4], Complex::new(1.0, 0.0));
    for (axis, &times) in k.0.iter().enumerate() {
        for _ in 0..times {
            let mut next: BTreeMap<[u8; 4], Complex> = BTreeMap::new();
            for (mono, &coef) in &poly {
                // d/dx_axis of the polynomial part
                if mono[axis] > 0 {
                    let mut m = *mono;
                    m[axis] -= 1;
                    *next.entry(m).or_default() += coef * mono[axis] as f64;
                }
                // - (R x)_axis * P from differentiating G
                for j in 0..4 {
                    let rij = params.r.0[axis][j];
                    if rij == Complex::new(0.0, 0.0) {
                        continue;
                    }
                    let mut m = *mono;
                    m[j] += 1;
                    *next.entry(m).or_default() -= coef * rij;
                }
            }
            poly = next;
        }
    }
    let x = params.x.0;
    let value = poly.iter().fold(Complex::new(0.0, 0.0), |acc, (mono, &coef)| {
        let term = (0..4).fold(coef, |t, j| t * x[j].powu(mono[j] as u32));
        acc + term
    });
    Ok(if k.order() % 2 == 1 { -value } else { value })
}

#[derive(Clone, Copy, Debug)]
struct PlanStep {
    /// Value index of `k - e_axis`.
    prev: u32,
    axis: u8,
    lower_len: u8,
    /// Packed `64 j + (k_j - [j == axis])` for each lower term.
    jm: [u8; 4],
    /// Value indices of `k - e_axis - e_j`.
    lower: [u32; 4],
}

/// Packing stride for `jm`; multiplicities are at most `n_max`.
const JM_STRIDE: usize = 64;

const BAND: i64 = 2;
const BAND_WIDTH: usize = (2 * BAND + 1) as usize;

/// Bit `4 i + j` set for every entry `R_ij` that may be nonzero.
pub type SparsityMask = u16;

/// Mask allowing any `R`.
pub const DENSE_MASK: SparsityMask = u16::MAX;

/// Mask of the nonzero entries of `r`.
pub fn sparsity_mask(r: &Mat4C) -> SparsityMask {
    let mut mask = 0;
    for i in 0..4 {
        for j in 0..4 {
            if r.0[i][j] != Complex::new(0.0, 0.0) {
                mask |= 1 << (4 * i + j);
            }
        }
    }
    mask
}

fn in_mask(mask: SparsityMask, i: usize, j: usize) -> bool {
    mask & (1 << (4 * i + j)) != 0
}

/// Evaluation schedule for every diagonal index `(a, b, a, b)` with
/// `a, b <= n_max`.
///
/// The schedule does not depend on `x`, and depends on `R` only through its
/// sparsity mask: recursion terms with `R_ij = 0` are dropped, together with
/// every index reachable only through them. Dropped terms are exact zeros,
/// so values do not change.
#[derive(Debug)]
pub struct DiagonalPlan {
    n_max: usize,
    mask: SparsityMask,
    /// Step `t` writes value index `t + 1`; index 0 holds `H_0 = 1`.
    steps: Vec<PlanStep>,
    /// Value index of `(a, b, a, b)` at `a * (n_max + 1) + b`.
    diagonal: Vec<u32>,
}

impl DiagonalPlan {
    pub fn new(n_max: usize, max_order: usize) -> Result<Arc<Self>> {
        Self::with_mask(n_max, max_order, DENSE_MASK)
    }

    pub fn with_mask(n_max: usize, max_order: usize, mask: SparsityMask) -> Result<Arc<Self>> {
        check_order(HermiteIndex::diagonal(n_max, n_max), max_order)?;
        if n_max >= JM_STRIDE {
            return Err(Error::InvalidParameter(format!(
                "nMax {n_max} exceeds the largest supported value {}",
                JM_STRIDE - 1
            )));
        }
        let side = n_max + 1;
        let len = side * side * BAND_WIDTH * BAND_WIDTH;
        let slot = |k: [usize; 4]| band_slot(side, k);

        // everything reachable from the targets through the recursion
        let mut needed = vec![false; len];
        let mut stack: Vec<[usize; 4]> = (0..side)
            .flat_map(|a| (0..side).map(move |b| [a, b, a, b]))
            .collect();
        while let Some(k) = stack.pop() {
            let s = slot(k);
            if needed[s] {
                continue;
            }
            needed[s] = true;
            if k != [0; 4] {
                let (i, km, lower) = lowered(k);
                stack.push(km);
                stack.extend(
                    lower
                        .iter()
                        .flatten()
                        .filter(|&&(j, _)| in_mask(mask, i, j))
                        .map(|&(_, kk)| kk),
                );
            }
        }

        let mut order: Vec<[usize; 4]> = (0..len)
            .filter(|&s| needed[s])
            .map(|s| band_index(side, s))
            .filter(|k| *k != [0; 4])
            .collect();
        // lowered indices have smaller total order
        order.sort_by_key(|k| (k.iter().sum::<usize>(), *k));

        // values are stored in step order
        let mut index = vec![u32::MAX; len];
        index[slot([0; 4])] = 0;
        for (t, k) in order.iter().enumerate() {
            index[slot(*k)] = t as u32 + 1;
        }
        let steps = order
            .iter()
            .map(|&k| {
                let (axis, km, lower) = lowered(k);
                let mut step = PlanStep {
                    prev: index[slot(km)],
                    axis: axis as u8,
                    lower_len: 0,
                    jm: [0; 4],
                    lower: [0; 4],
                };
                for &(j, kk) in lower.iter().flatten().filter(|&&(j, _)| in_mask(mask, axis, j)) {
                    let t = usize::from(step.lower_len);
                    step.jm[t] = (JM_STRIDE * j + km[j]) as u8;
                    step.lower[t] = index[slot(kk)];
                    step.lower_len += 1;
                }
                step
            })
            .collect();
        let diagonal = (0..side)
            .flat_map(|a| (0..side).map(move |b| [a, b, a, b]))
            .map(|k| index[slot(k)])
            .collect();
        Ok(Arc::new(DiagonalPlan { n_max, mask, steps, diagonal }))
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn mask(&self) -> SparsityMask {
        self.mask
    }

    /// Number of lattice entries computed per evaluation.
    pub fn work(&self) -> usize {
        self.steps.len()
    }

}

/// Shared plan for `(n_max, mask)`, built once per process.
pub fn diagonal_plan(
    n_max: usize,
    max_order: usize,
    mask: SparsityMask,
) -> Result<Arc<DiagonalPlan>> {
    type Cache = Mutex<HashMap<(usize, SparsityMask), Arc<DiagonalPlan>>>;
    static PLANS: OnceLock<Cache> = OnceLock::new();
    check_order(HermiteIndex::diagonal(n_max, n_max), max_order)?;
    let cache = PLANS.get_or_init(Default::default);
    let key = (n_max, mask);
    if let Some(plan) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(plan.clone());
    }
    let plan = DiagonalPlan::with_mask(n_max, max_order, mask)?;
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    Ok(guard.entry(key).or_insert(plan).clone())
}

fn band_slot(side: usize, k: [usize; 4]) -> usize {
    let d1 = k[0] as i64 - k[2] as i64;
    let d2 = k[1] as i64 - k[3] as i64;
    assert!(
        d1.abs() <= BAND && d2.abs() <= BAND,
        "Hermite index {k:?} outside the diagonal band"
    );
    ((k[0] * side + k[1]) * BAND_WIDTH + (d1 + BAND) as usize) * BAND_WIDTH + (d2 + BAND) as usize
}

fn band_index(side: usize, s: usize) -> [usize; 4] {
    let d2 = (s % BAND_WIDTH) as i64 - BAND;
    let d1 = ((s / BAND_WIDTH) % BAND_WIDTH) as i64 - BAND;
    let rest = s / (BAND_WIDTH * BAND_WIDTH);
    let (k1, k2) = (rest / side, rest % side);
    [k1, k2, (k1 as i64 - d1).max(0) as usize, (k2 as i64 - d2).max(0) as usize]
}

type Lowered = (usize, [usize; 4], [Option<(usize, [usize; 4])>; 4]);

fn lowered(k: [usize; 4]) -> Lowered {
    let i = reduction_axis(k);
    let mut km = k;
    km[i] -= 1;
    let mut lower = [None; 4];
    let mut n = 0;
    for j in 0..4 {
        if km[j] > 0 {
            let mut kk = km;
            kk[j] -= 1;
            lower[n] = Some((j, kk));
            n += 1;
        }
    }
    (i, km, lower)
}

/// All diagonal values `H^R_{a,b,a,b}(x)` for `a, b <= n_max`.
#[derive(Debug, Clone)]
pub struct DiagonalHermite {
    plan: Arc<DiagonalPlan>,
    values: Vec<Complex>,
}

impl DiagonalHermite {
    /// Panics if `R` has a nonzero entry outside the plan's mask.
    pub fn compute(plan: Arc<DiagonalPlan>, params: &HermiteParams) -> Self {
        let needed = sparsity_mask(&params.r);
        assert!(
            needed & !plan.mask == 0,
            "R has nonzero entries outside the plan's sparsity mask"
        );
        let mut values = vec![Complex::new(0.0, 0.0); plan.steps.len() + 1];
        values[0] = Complex::new(1.0, 0.0);
        let rx = &params.rx.0;
        let split = |c: u8| (usize::from(c) / JM_STRIDE, f64::from(c % JM_STRIDE as u8));
        if params.r.0.iter().flatten().all(|v| v.im == 0.0) {
            // real R: real-times-complex products, same values as the complex kernel
            let r = params.r.0.map(|row| row.map(|v| v.re));
            for (t, step) in plan.steps.iter().enumerate() {
                let i = usize::from(step.axis);
                let mut v = rx[i] * values[step.prev as usize];
                for u in 0..usize::from(step.lower_len) {
                    let (j, mult) = split(step.jm[u]);
                    v -= values[step.lower[u] as usize] * (r[i][j] * mult);
                }
                values[t + 1] = v;
            }
        } else {
            let r = &params.r.0;
            for (t, step) in plan.steps.iter().enumerate() {
                let i = usize::from(step.axis);
                let mut v = rx[i] * values[step.prev as usize];
                for u in 0..usize::from(step.lower_len) {
                    let (j, mult) = split(step.jm[u]);
                    v -= r[i][j] * mult * values[step.lower[u] as usize];
                }
                values[t + 1] = v;
            }
        }
        DiagonalHermite { plan, values }
    }

    pub fn n_max(&self) -> usize {
        self.plan.n_max
    }

    /// `H_{a,b,a,b}`; panics if `a` or `b` exceeds `n_max`.
    pub fn get(&self, a: usize, b: usize) -> Complex {
        assert!(a <= self.plan.n_max && b <= self.plan.n_max);
        self.values[self.plan.diagonal[a * (self.plan.n_max + 1) + b] as usize]
    }
}
