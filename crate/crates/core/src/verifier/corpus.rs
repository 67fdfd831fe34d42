//! Deterministic enumeration of every instance within small size bounds,
//! quotiented by asset/action renaming.
//!
//! The enumeration is boundary-valued: counts come from {1, max_count},
//! deadlines and interval durations from {1, max_deadline}, top-level
//! constraints cover every combination of constraint kinds, and permission
//! constraints stay `true` (per-permission residue is exercised by the
//! property suites instead — enumerating it would explode the corpus
//! without adding chooser-visible behavior). Licenses are drawn from this
//! pool as multisets of size 1..=max_licenses.
//!
//! Two instances that differ only by a bijective renaming of assets or
//! actions behave identically, so the corpus keeps one representative per
//! renaming orbit: the least form under renaming, with permissions and
//! licenses sorted and ids reassigned L1, L2, ... The quotient shrinks the
//! corpus, never the behaviors covered.

use super::{Instance, VerifyError};
use crate::license::{
    ActionKind, AssetId, Constraint, License, LicenseId, Permission, Right, Tick,
};
use std::collections::{BTreeMap, BTreeSet};

/// Size bounds for corpus enumeration. The cap bounds the number of
/// candidate instances *before* the renaming quotient, because that is the
/// work the enumeration has to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusBounds {
    pub max_licenses: u32,
    pub max_assets: u32,
    pub max_actions: u32,
    pub max_count: u32,
    pub max_deadline: u64,
    pub horizon: u64,
    pub cap: u64,
}

pub const DEFAULT_CAP: u64 = 100_000;

impl Default for CorpusBounds {
    fn default() -> Self {
        CorpusBounds {
            max_licenses: 2,
            max_assets: 2,
            max_actions: 1,
            max_count: 2,
            max_deadline: 2,
            horizon: 4,
            cap: DEFAULT_CAP,
        }
    }
}

impl CorpusBounds {
    pub fn new(
        max_licenses: u32,
        max_assets: u32,
        max_actions: u32,
        max_count: u32,
        max_deadline: u64,
        horizon: u64,
    ) -> Result<Self, VerifyError> {
        let bounds = CorpusBounds {
            max_licenses,
            max_assets,
            max_actions,
            max_count,
            max_deadline,
            horizon,
            cap: DEFAULT_CAP,
        };
        bounds.validate()?;
        Ok(bounds)
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    fn validate(&self) -> Result<(), VerifyError> {
        let fail = |message: &str| Err(VerifyError::InvalidBounds(message.into()));
        if self.max_licenses == 0
            || self.max_assets == 0
            || self.max_actions == 0
            || self.max_count == 0
            || self.max_deadline == 0
            || self.horizon == 0
            || self.cap == 0
        {
            return fail("every bound must be at least 1");
        }
        if self.max_assets > 26 {
            return fail("at most 26 assets (one letter each)");
        }
        if self.max_actions as usize > ActionKind::ALL.len() {
            return fail("at most 4 actions");
        }
        Ok(())
    }

    /// Parses comma-separated `key=value` pairs; unspecified keys keep their
    /// defaults. Keys: max_licenses, max_assets, max_actions, max_count,
    /// max_deadline, horizon, cap.
    pub fn parse(spec: &str) -> Result<Self, VerifyError> {
        let mut bounds = CorpusBounds::default();
        for pair in spec.split(',') {
            let pair = pair.trim();
            if pair.is_empty() {
                continue;
            }
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                VerifyError::InvalidBounds(format!("expected key=value, got {pair:?}"))
            })?;
            match key {
                "max_licenses" => bounds.max_licenses = parse_num(key, value)?,
                "max_assets" => bounds.max_assets = parse_num(key, value)?,
                "max_actions" => bounds.max_actions = parse_num(key, value)?,
                "max_count" => bounds.max_count = parse_num(key, value)?,
                "max_deadline" => bounds.max_deadline = parse_num(key, value)?,
                "horizon" => bounds.horizon = parse_num(key, value)?,
                "cap" => bounds.cap = parse_num(key, value)?,
                other => {
                    return Err(VerifyError::InvalidBounds(format!(
                        "unknown bounds key {other:?}"
                    )))
                }
            }
        }
        bounds.validate()?;
        Ok(bounds)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, VerifyError> {
    value.parse().map_err(|_| {
        VerifyError::InvalidBounds(format!("{key} expects a non-negative number, got {value:?}"))
    })
}

pub(crate) fn asset_universe(n: u32) -> Vec<AssetId> {
    (0..n)
        .map(|i| AssetId::new(((b'A' + i as u8) as char).to_string()))
        .collect()
}

pub(crate) fn action_universe(n: u32) -> Vec<ActionKind> {
    ActionKind::ALL[..n as usize].to_vec()
}

fn menu(max: u64) -> Vec<u64> {
    if max == 1 {
        vec![1]
    } else {
        vec![1, max]
    }
}

/// Top-level constraints: `true` plus every non-empty combination of
/// constraint kinds over the boundary values.
fn top_menu(bounds: &CorpusBounds) -> Vec<Constraint> {
    let kinds: [Vec<Constraint>; 3] = [
        menu(bounds.max_count as u64)
            .into_iter()
            .map(|n| Constraint::Count(n as u32))
            .collect(),
        menu(bounds.max_deadline)
            .into_iter()
            .map(|d| Constraint::Until(Tick::new(d)))
            .collect(),
        menu(bounds.max_deadline)
            .into_iter()
            .map(Constraint::Interval)
            .collect(),
    ];
    let mut tops = vec![Constraint::True];
    for mask in 1u8..8 {
        let mut combos: Vec<Vec<Constraint>> = vec![Vec::new()];
        for (bit, list) in kinds.iter().enumerate() {
            if mask & (1 << bit) == 0 {
                continue;
            }
            let mut grown = Vec::new();
            for combo in &combos {
                for node in list {
                    let mut next = combo.clone();
                    next.push(node.clone());
                    grown.push(next);
                }
            }
            combos = grown;
        }
        for combo in combos {
            tops.push(if combo.len() == 1 {
                combo.into_iter().next().expect("combo is non-empty")
            } else {
                Constraint::And(combo)
            });
        }
    }
    tops
}

/// A license minus its id, the unit of pool enumeration and renaming.
type Shape = (BTreeSet<AssetId>, Constraint, Vec<Permission>);

fn shape_pool(bounds: &CorpusBounds) -> Vec<Shape> {
    let assets = asset_universe(bounds.max_assets);
    let actions = action_universe(bounds.max_actions);
    let universe: BTreeSet<Right> = assets
        .iter()
        .flat_map(|a| actions.iter().map(|&act| Right::new(a.as_str(), act)))
        .collect();
    let universe: Vec<Right> = universe.into_iter().collect();
    let tops = top_menu(bounds);
    let mut pool = Vec::new();
    for mask in 1u128..(1u128 << universe.len()) {
        let rights: Vec<&Right> = universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, r)| r)
            .collect();
        let about: BTreeSet<AssetId> = rights.iter().map(|r| r.asset.clone()).collect();
        let permissions: Vec<Permission> = rights
            .iter()
            .map(|r| Permission::new(Constraint::True, (*r).clone()))
            .collect();
        for top in &tops {
            pool.push((about.clone(), top.clone(), permissions.clone()));
        }
    }
    pool.sort();
    pool
}

/// Number of candidate instances the bounds describe, before the renaming
/// quotient. Saturates instead of overflowing; anything near saturation is
/// far over any realistic cap anyway.
fn count_candidates(bounds: &CorpusBounds) -> u128 {
    let universe = (bounds.max_assets as u128) * (bounds.max_actions as u128);
    let subsets = if universe >= 127 {
        u128::MAX
    } else {
        (1u128 << universe) - 1
    };
    let per_kind = |max: u64| 1 + menu(max).len() as u128;
    let tops = per_kind(bounds.max_count as u64)
        * per_kind(bounds.max_deadline)
        * per_kind(bounds.max_deadline);
    let pool = subsets.saturating_mul(tops);
    let mut total: u128 = 0;
    for k in 1..=bounds.max_licenses as u128 {
        total = total.saturating_add(multichoose(pool, k));
    }
    total
}

/// C(n + k - 1, k): multisets of size k over n shapes. Exact at every
/// partial step; saturating on overflow.
fn multichoose(n: u128, k: u128) -> u128 {
    let mut result: u128 = 1;
    for i in 1..=k {
        result = result.saturating_mul(n.saturating_add(i - 1)) / i;
    }
    result
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn grow(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                current.push(i);
                grow(n, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    grow(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Applies one asset/action bijection to a shape and re-sorts its
/// permissions. `asset_perm[i]` sends `assets[i]` to `assets[asset_perm[i]]`;
/// likewise for actions.
fn rename_shape(
    shape: &Shape,
    assets: &[AssetId],
    asset_perm: &[usize],
    actions: &[ActionKind],
    action_perm: &[usize],
) -> Shape {
    let asset_map: BTreeMap<&AssetId, &AssetId> = assets
        .iter()
        .enumerate()
        .map(|(i, a)| (a, &assets[asset_perm[i]]))
        .collect();
    let action_map: BTreeMap<ActionKind, ActionKind> = actions
        .iter()
        .enumerate()
        .map(|(i, &a)| (a, actions[action_perm[i]]))
        .collect();
    let (about, top, permissions) = shape;
    let about: BTreeSet<AssetId> = about.iter().map(|a| asset_map[a].clone()).collect();
    let mut permissions: Vec<Permission> = permissions
        .iter()
        .map(|p| {
            Permission::new(
                p.constraint.clone(),
                Right::new(asset_map[&p.right.asset].as_str(), action_map[&p.right.action]),
            )
        })
        .collect();
    permissions.sort();
    (about, top.clone(), permissions)
}

/// The canonical representative of an instance under bijective renaming of
/// assets and actions: assets map onto 'A', 'B', ...; actions map onto the
/// front of the action list; each license's permissions are sorted; licenses
/// are sorted and re-identified L1, L2, ...; of all such forms, the least.
/// Two instances have equal canonical forms exactly when one is a renaming
/// of the other (after the same sorting), so corpus membership of any
/// instance is decided by canonicalizing it first.
pub fn canonical_instance_form(instance: &Instance) -> Instance {
    Instance {
        licenses: canonical_licenses(&instance.licenses),
        horizon: instance.horizon,
    }
}

fn canonical_licenses(licenses: &[License]) -> Vec<License> {
    let present_assets: Vec<AssetId> = licenses
        .iter()
        .flat_map(|l| l.about.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let present_actions: Vec<ActionKind> = licenses
        .iter()
        .flat_map(|l| l.permissions.iter().map(|p| p.right.action))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assert!(present_assets.len() <= 26, "at most 26 distinct assets");
    let asset_targets = asset_universe(present_assets.len() as u32);
    let action_targets = action_universe(present_actions.len() as u32);

    let mut best: Option<Vec<Shape>> = None;
    for asset_perm in permutations(present_assets.len()) {
        for action_perm in permutations(present_actions.len()) {
            let asset_map: BTreeMap<&AssetId, &AssetId> = present_assets
                .iter()
                .enumerate()
                .map(|(i, a)| (a, &asset_targets[asset_perm[i]]))
                .collect();
            let action_map: BTreeMap<ActionKind, ActionKind> = present_actions
                .iter()
                .enumerate()
                .map(|(i, &a)| (a, action_targets[action_perm[i]]))
                .collect();
            let mut shapes: Vec<Shape> = licenses
                .iter()
                .map(|l| {
                    let about: BTreeSet<AssetId> =
                        l.about.iter().map(|a| asset_map[a].clone()).collect();
                    let mut permissions: Vec<Permission> = l
                        .permissions
                        .iter()
                        .map(|p| {
                            Permission::new(
                                p.constraint.clone(),
                                Right::new(
                                    asset_map[&p.right.asset].as_str(),
                                    action_map[&p.right.action],
                                ),
                            )
                        })
                        .collect();
                    permissions.sort();
                    (about, l.top.clone(), permissions)
                })
                .collect();
            shapes.sort();
            if best.as_ref().map_or(true, |b| shapes < *b) {
                best = Some(shapes);
            }
        }
    }
    best.expect("the identity arrangement always exists")
        .into_iter()
        .enumerate()
        .map(|(i, (about, top, permissions))| {
            License::new(
                LicenseId::new(format!("L{}", i + 1)),
                about,
                top,
                permissions,
            )
            .expect("renaming preserves license validity")
        })
        .collect()
}

/// Every instance within the bounds, one per renaming orbit, in a fixed
/// enumeration order. Fails fast when the bounds describe more candidates
/// than the cap allows.
pub fn generate_corpus(bounds: &CorpusBounds) -> Result<Vec<Instance>, VerifyError> {
    bounds.validate()?;
    let candidates = count_candidates(bounds);
    if candidates > bounds.cap as u128 {
        return Err(VerifyError::BoundsTooLarge {
            candidates,
            cap: bounds.cap,
        });
    }

    let pool = shape_pool(bounds);
    let assets = asset_universe(bounds.max_assets);
    let actions = action_universe(bounds.max_actions);
    let index_of: BTreeMap<&Shape, usize> = pool.iter().enumerate().map(|(i, s)| (s, i)).collect();
    // Every renaming, tabulated as a pool-index map: the pool is closed
    // under renaming, and pool order mirrors shape order, so the quotient
    // can compare index vectors instead of license lists.
    let mut tables: Vec<Vec<usize>> = Vec::new();
    for asset_perm in &permutations(assets.len()) {
        for action_perm in &permutations(actions.len()) {
            tables.push(
                pool.iter()
                    .map(|shape| {
                        let renamed = rename_shape(shape, &assets, asset_perm, &actions, action_perm);
                        *index_of.get(&renamed).expect("pool is closed under renaming")
                    })
                    .collect(),
            );
        }
    }

    let mut instances = Vec::new();
    let mut combo: Vec<usize> = Vec::new();
    for size in 1..=bounds.max_licenses as usize {
        enumerate_multisets(pool.len(), size, 0, &mut combo, &mut |combo| {
            if !is_least_under_renaming(combo, &tables) {
                return;
            }
            let licenses: Vec<License> = combo
                .iter()
                .enumerate()
                .map(|(i, &pi)| {
                    let (about, top, permissions) = &pool[pi];
                    License::new(
                        LicenseId::new(format!("L{}", i + 1)),
                        about.clone(),
                        top.clone(),
                        permissions.clone(),
                    )
                    .expect("pool shapes are valid")
                })
                .collect();
            instances.push(Instance {
                licenses,
                horizon: Tick::new(bounds.horizon),
            });
        });
    }
    Ok(instances)
}

fn enumerate_multisets(
    pool_len: usize,
    size: usize,
    start: usize,
    combo: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if combo.len() == size {
        visit(combo);
        return;
    }
    for i in start..pool_len {
        combo.push(i);
        enumerate_multisets(pool_len, size, i, combo, visit);
        combo.pop();
    }
}

fn is_least_under_renaming(combo: &[usize], tables: &[Vec<usize>]) -> bool {
    let mut mapped = Vec::with_capacity(combo.len());
    for table in tables {
        mapped.clear();
        mapped.extend(combo.iter().map(|&i| table[i]));
        mapped.sort_unstable();
        if mapped.as_slice() < combo {
            return false;
        }
    }
    true
}
