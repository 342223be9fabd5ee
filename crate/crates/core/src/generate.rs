//! Seeded random generation of terminal varieties, stratified by dimension
//! and deduplicated.
//!
//! Every draw has its own random stream derived from `(seed, dim, index)`,
//! and survivors are accepted strictly in index order, so the output does
//! not depend on how candidate evaluation is batched or parallelized.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::periods::Family;
use crate::terminality::{
    fan_invariant, rank2_fan, rank2_is_fano, rank2_is_simplicial, rank2_is_terminal, rank2_normal_form_key, wps_bound_check,
    wps_is_terminal, FanData, FanInvariant, NormalFormKey,
};
use crate::varieties::{WeightMatrix, WeightVector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightBound {
    /// Weights at most `k * N` (WPS) or entries at most `k * N` (rank two).
    Scaled(u64),
    /// Weights, or matrix entries, at most this value.
    Fixed(u64),
}

impl WeightBound {
    pub fn max_for(&self, n: usize) -> u64 {
        match *self {
            WeightBound::Scaled(k) => k * n as u64,
            WeightBound::Fixed(b) => b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub family: Family,
    /// Total number of varieties, split evenly over the dimensions.
    pub count: usize,
    pub dim_min: usize,
    pub dim_max: usize,
    pub bound: WeightBound,
    pub seed: u64,
    /// Draws per dimension before giving up.
    pub budget_per_stratum: u64,
}

pub const DEFAULT_BUDGET: u64 = 1_000_000;

impl GenConfig {
    /// Weights uniform in `[1, 10N]`.
    pub fn wps(count: usize, dim_min: usize, dim_max: usize, seed: u64) -> Self {
        GenConfig {
            family: Family::Wps,
            count,
            dim_min,
            dim_max,
            bound: WeightBound::Scaled(10),
            seed,
            budget_per_stratum: DEFAULT_BUDGET,
        }
    }

    /// Matrix entries uniform in `[0, 5]`.
    pub fn rank2(count: usize, dim_min: usize, dim_max: usize, seed: u64) -> Self {
        GenConfig {
            family: Family::Rank2,
            count,
            dim_min,
            dim_max,
            bound: WeightBound::Fixed(5),
            seed,
            budget_per_stratum: DEFAULT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bound_ok = match self.bound {
            WeightBound::Scaled(k) | WeightBound::Fixed(k) => k > 0,
        };
        if self.count == 0 || !bound_ok || self.dim_min < 2 || self.dim_min > self.dim_max {
            return Err(Error::InvalidArgument(
                "need count >= 1, a positive bound and 2 <= dim_min <= dim_max".into(),
            ));
        }
        Ok(())
    }

    pub fn dims(&self) -> core::ops::RangeInclusive<usize> {
        self.dim_min..=self.dim_max
    }
}

/// Quota for the next stratum: what is still missing, split evenly over
/// the strata left, remainder first. Scarce low dimensions therefore pass
/// their deficit on to the higher ones.
pub fn next_quota(missing: usize, strata_left: usize) -> usize {
    if strata_left == 0 {
        return 0;
    }
    missing / strata_left + usize::from(!missing.is_multiple_of(strata_left))
}

/// Seed of the random stream for one draw.
pub fn draw_seed(seed: u64, dim: usize, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add((dim as u64).wrapping_mul(0xd1b5_4a32_d192_ed03))
        .wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draw `index` of stratum `dim`, if it survives the terminality filters.
pub fn wps_candidate(cfg: &GenConfig, dim: usize, index: u64) -> Option<WeightVector> {
    let n = dim + 1;
    let hi = cfg.bound.max_for(n) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(draw_seed(cfg.seed, dim, index));
    // uniform over non-decreasing tuples: n distinct values from
    // 1..=hi+n-1, sorted, minus their position
    let mut raw: Vec<i64> =
        rand::seq::index::sample(&mut rng, hi as usize + n - 1, n).iter().map(|v| v as i64 + 1).collect();
    raw.sort_unstable();
    for (i, x) in raw.iter_mut().enumerate() {
        *x -= i as i64;
    }
    let w = WeightVector::validate_wps(&raw).ok()?;
    (wps_bound_check(&w) && wps_is_terminal(&w).ok()?).then_some(w)
}

#[derive(Clone, Debug)]
pub struct Rank2Candidate {
    pub matrix: WeightMatrix,
    pub fan: FanData,
    pub invariant: FanInvariant,
}

/// Draw `index` of stratum `dim`, if its fan has `N` rays, is simplicial,
/// is the face fan of its rays and is terminal.
pub fn rank2_candidate(cfg: &GenConfig, dim: usize, index: u64) -> Option<Rank2Candidate> {
    let n = dim + 2;
    let hi = cfg.bound.max_for(n) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(draw_seed(cfg.seed, dim, index));
    let top: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=hi)).collect();
    let bottom: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=hi)).collect();
    let matrix = WeightMatrix::validate_rank2(&top, &bottom).ok()?;
    let fan = rank2_fan(&matrix).ok()?;
    if !rank2_is_simplicial(&fan) || !rank2_is_fano(&fan).ok()? || !rank2_is_terminal(&fan).ok()? {
        return None;
    }
    let invariant = fan_invariant(&fan).ok()?;
    Some(Rank2Candidate { matrix, fan, invariant })
}

/// Accepts or rejects candidates, in draw order.
pub trait Collector {
    type Candidate;
    fn offer(&mut self, candidate: Self::Candidate) -> bool;
}

/// Deduplicates weighted projective spaces by their sorted weights.
#[derive(Default)]
pub struct WpsCollector {
    seen: BTreeSet<WeightVector>,
    pub items: Vec<WeightVector>,
}

impl Collector for WpsCollector {
    type Candidate = WeightVector;

    fn offer(&mut self, w: WeightVector) -> bool {
        if self.seen.insert(w.clone()) {
            self.items.push(w);
            true
        } else {
            false
        }
    }
}

struct Stored {
    matrix: WeightMatrix,
    fan: FanData,
    key: Option<NormalFormKey>,
}

/// Deduplicates rank-two varieties by fan isomorphism: a cheap invariant
/// first, the normal-form key only when invariants collide.
#[derive(Default)]
pub struct Rank2Collector {
    buckets: BTreeMap<FanInvariant, Vec<Stored>>,
    pub items: Vec<WeightMatrix>,
}

impl Collector for Rank2Collector {
    type Candidate = Rank2Candidate;

    fn offer(&mut self, c: Rank2Candidate) -> bool {
        let bucket = self.buckets.entry(c.invariant).or_default();
        let mut key = None;
        if !bucket.is_empty() {
            let Ok(k) = rank2_normal_form_key(&c.matrix, &c.fan) else { return false };
            for s in bucket.iter_mut() {
                if s.key.is_none() {
                    s.key = rank2_normal_form_key(&s.matrix, &s.fan).ok();
                }
                if s.key.as_ref() == Some(&k) {
                    return false;
                }
            }
            key = Some(k);
        }
        bucket.push(Stored { matrix: c.matrix.clone(), fan: c.fan, key });
        self.items.push(c.matrix);
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumReport {
    pub dim: usize,
    pub wanted: usize,
    pub found: usize,
    pub draws: u64,
}

/// Runs every stratum. `eval` evaluates a contiguous range of draw indices
/// for one dimension and must return one entry per index, in order; it may
/// do so in parallel.
pub fn drive<K: Collector>(
    cfg: &GenConfig,
    collector: &mut K,
    mut eval: impl FnMut(usize, Range<u64>) -> Vec<Option<K::Candidate>>,
) -> Result<Vec<StratumReport>> {
    cfg.validate()?;
    let mut reports = Vec::new();
    let mut total = 0;
    let dims: Vec<usize> = cfg.dims().collect();
    for (j, &dim) in dims.iter().enumerate() {
        let wanted = next_quota(cfg.count - total, dims.len() - j);
        let mut found = 0;
        let mut draws = 0u64;
        let mut chunk = 64u64;
        'stratum: while found < wanted && draws < cfg.budget_per_stratum {
            let end = (draws + chunk).min(cfg.budget_per_stratum);
            let results = eval(dim, draws..end);
            for r in results {
                draws += 1;
                if let Some(c) = r {
                    if collector.offer(c) {
                        found += 1;
                        if found == wanted {
                            break 'stratum;
                        }
                    }
                }
            }
            chunk = (chunk * 2).min(8192);
        }
        total += found;
        reports.push(StratumReport { dim, wanted, found, draws });
    }
    Ok(reports)
}

fn shortfall(cfg: &GenConfig, reports: &[StratumReport]) -> Result<()> {
    let found = reports.iter().map(|r| r.found).sum();
    if found < cfg.count {
        let draws = reports.iter().map(|r| r.draws).sum();
        return Err(Error::TargetUnreachable { found, wanted: cfg.count, draws });
    }
    Ok(())
}

/// Survivors found within the budget, without failing on a shortfall.
pub fn gen_wps_report(cfg: &GenConfig) -> Result<(Vec<WeightVector>, Vec<StratumReport>)> {
    let mut c = WpsCollector::default();
    let reports = drive(cfg, &mut c, |dim, r| r.map(|i| wps_candidate(cfg, dim, i)).collect())?;
    Ok((c.items, reports))
}

pub fn gen_wps(cfg: &GenConfig) -> Result<Vec<WeightVector>> {
    let (items, reports) = gen_wps_report(cfg)?;
    shortfall(cfg, &reports)?;
    Ok(items)
}

pub fn gen_rank2_report(cfg: &GenConfig) -> Result<(Vec<WeightMatrix>, Vec<StratumReport>)> {
    let mut c = Rank2Collector::default();
    let reports = drive(cfg, &mut c, |dim, r| r.map(|i| rank2_candidate(cfg, dim, i)).collect())?;
    Ok((c.items, reports))
}

pub fn gen_rank2(cfg: &GenConfig) -> Result<Vec<WeightMatrix>> {
    let (items, reports) = gen_rank2_report(cfg)?;
    shortfall(cfg, &reports)?;
    Ok(items)
}

/// Every terminal weighted projective space of dimension `dim` with largest
/// weight at most `max_weight`, in lexicographic order.
pub fn enumerate_wps(dim: usize, max_weight: u64) -> Result<Vec<WeightVector>> {
    if dim < 2 || max_weight == 0 {
        return Err(Error::InvalidArgument("need dim >= 2 and max_weight >= 1".into()));
    }
    let n = dim + 1;
    let mut out = Vec::new();
    let mut cur = alloc::vec![1i64; n];
    loop {
        if let Ok(w) = WeightVector::validate_wps(&cur) {
            if wps_bound_check(&w) && wps_is_terminal(&w)? {
                out.push(w);
            }
        }
        // next non-decreasing tuple
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if (cur[i] as u64) < max_weight {
                break;
            }
        }
        let v = cur[i] + 1;
        for x in &mut cur[i..] {
            *x = v;
        }
    }
}
