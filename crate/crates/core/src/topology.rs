//! Base-station layout and user placement for a single macro cell.
//!
//! The macro base station sits at the origin. Small cells are placed either on
//! deterministic concentric rings (the default) or uniformly at random with a
//! minimum separation, and users are drawn from a Poisson point process on the
//! macro disc.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::LayoutError;

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        Self {
            x: radius * angle.cos(),
            y: radius * angle.sin(),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn distance(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Base-station tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BsKind {
    /// Macro base station, grid powered.
    Mbs,
    /// Conventional small cell, grid powered.
    Csbs,
    /// Renewable small cell, harvested energy only.
    Rsbs,
    /// Hybrid small cell, harvested energy first and grid as top-up.
    Hsbs,
}

impl BsKind {
    pub const ALL: [BsKind; 4] = [BsKind::Mbs, BsKind::Csbs, BsKind::Rsbs, BsKind::Hsbs];

    pub fn is_small(self) -> bool {
        self != BsKind::Mbs
    }

    pub fn harvests_energy(self) -> bool {
        matches!(self, BsKind::Rsbs | BsKind::Hsbs)
    }

    pub fn label(self) -> &'static str {
        match self {
            BsKind::Mbs => "MBS",
            BsKind::Csbs => "CSBS",
            BsKind::Rsbs => "RSBS",
            BsKind::Hsbs => "HSBS",
        }
    }
}

impl fmt::Display for BsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How small cells are positioned inside the macro cell.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Placement {
    /// Equally spaced concentric rings, fully deterministic.
    #[default]
    Rings,
    /// Uniform on the macro disc with rejection on `min_separation`.
    UniformRandom { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub macro_radius: f64,
    pub small_cell_radius: f64,
    pub n_csbs: usize,
    pub n_rsbs: usize,
    pub n_hsbs: usize,
    pub min_separation: f64,
    pub placement: Placement,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            macro_radius: 1730.0,
            small_cell_radius: 350.0,
            n_csbs: 24,
            n_rsbs: 16,
            n_hsbs: 9,
            min_separation: 100.0,
            placement: Placement::Rings,
        }
    }
}

/// Ring radii as fractions of the macro radius.
pub const CSBS_INNER_RING: f64 = 0.35;
pub const CSBS_OUTER_RING: f64 = 0.70;
pub const HSBS_RING: f64 = 0.20;
pub const RSBS_RING: f64 = 0.52;

/// One placed base station. The index in [`NetworkLayout::sites`] is its id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub kind: BsKind,
    pub position: Position,
    pub nominal_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TierCounts {
    pub mbs: usize,
    pub csbs: usize,
    pub rsbs: usize,
    pub hsbs: usize,
}

impl TierCounts {
    pub fn total(&self) -> usize {
        self.mbs + self.csbs + self.rsbs + self.hsbs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub macro_radius: f64,
    /// Site 0 is always the MBS, followed by CSBSs, RSBSs and HSBSs.
    pub sites: Vec<Site>,
    pub counts: TierCounts,
}

impl NetworkLayout {
    pub fn mbs_id(&self) -> usize {
        0
    }

    pub fn ids_of(&self, kind: BsKind) -> impl Iterator<Item = usize> + '_ {
        self.sites
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.kind == kind)
            .map(|(i, _)| i)
    }
}

fn ring(count: usize, radius: f64, phase: f64) -> impl Iterator<Item = Position> {
    let step = if count == 0 { 0.0 } else { 2.0 * PI / count as f64 };
    (0..count).map(move |i| Position::polar(radius, phase + step * i as f64))
}

fn ring_positions(cfg: &LayoutConfig) -> Vec<(BsKind, Position)> {
    let r = cfg.macro_radius;
    let inner = cfg.n_csbs / 3;
    let outer = cfg.n_csbs - inner;
    // RSBSs sit half a step off the inner CSBS ring.
    let rsbs_phase = if cfg.n_rsbs == 0 {
        0.0
    } else {
        PI / cfg.n_rsbs as f64
    };

    let mut out = Vec::with_capacity(cfg.n_csbs + cfg.n_rsbs + cfg.n_hsbs);
    out.extend(ring(inner, CSBS_INNER_RING * r, 0.0).map(|p| (BsKind::Csbs, p)));
    out.extend(ring(outer, CSBS_OUTER_RING * r, 0.0).map(|p| (BsKind::Csbs, p)));
    out.extend(ring(cfg.n_rsbs, RSBS_RING * r, rsbs_phase).map(|p| (BsKind::Rsbs, p)));
    out.extend(ring(cfg.n_hsbs, HSBS_RING * r, 0.0).map(|p| (BsKind::Hsbs, p)));
    out
}

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

fn random_positions(cfg: &LayoutConfig, seed: u64) -> Result<Vec<(BsKind, Position)>, LayoutError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = std::iter::repeat_n(BsKind::Csbs, cfg.n_csbs)
        .chain(std::iter::repeat_n(BsKind::Rsbs, cfg.n_rsbs))
        .chain(std::iter::repeat_n(BsKind::Hsbs, cfg.n_hsbs));
    let mut placed: Vec<(BsKind, Position)> = Vec::new();
    for kind in kinds {
        let mut attempts = 0;
        loop {
            let p = uniform_on_disc(cfg.macro_radius, &mut rng);
            let clear = p.norm() >= cfg.min_separation
                && placed
                    .iter()
                    .all(|(_, q)| p.distance(q) >= cfg.min_separation);
            if clear {
                placed.push((kind, p));
                break;
            }
            attempts += 1;
            if attempts >= MAX_PLACEMENT_ATTEMPTS {
                return Err(LayoutError::PlacementExhausted {
                    kind,
                    placed: placed.len(),
                });
            }
        }
    }
    Ok(placed)
}

/// Places the MBS at the origin and every small cell according to
/// `cfg.placement`. The result is a pure function of `cfg`.
pub fn build_layout(cfg: &LayoutConfig) -> Result<NetworkLayout, LayoutError> {
    if !(cfg.macro_radius.is_finite() && cfg.macro_radius > 0.0) {
        return Err(LayoutError::InvalidRadius {
            field: "macro_radius",
            value: cfg.macro_radius,
        });
    }
    if !(cfg.small_cell_radius.is_finite() && cfg.small_cell_radius > 0.0) {
        return Err(LayoutError::InvalidRadius {
            field: "small_cell_radius",
            value: cfg.small_cell_radius,
        });
    }
    if !(cfg.min_separation.is_finite() && cfg.min_separation >= 0.0) {
        return Err(LayoutError::InvalidRadius {
            field: "min_separation",
            value: cfg.min_separation,
        });
    }

    let small = match cfg.placement {
        Placement::Rings => ring_positions(cfg),
        Placement::UniformRandom { seed } => random_positions(cfg, seed)?,
    };

    let mut sites = Vec::with_capacity(small.len() + 1);
    sites.push(Site {
        kind: BsKind::Mbs,
        position: Position::ORIGIN,
        nominal_radius: cfg.macro_radius,
    });
    sites.extend(small.into_iter().map(|(kind, position)| Site {
        kind,
        position,
        nominal_radius: cfg.small_cell_radius,
    }));

    for (i, a) in sites.iter().enumerate() {
        if a.position.norm() > cfg.macro_radius {
            return Err(LayoutError::OutsideMacroCell {
                id: i,
                kind: a.kind,
                norm: a.position.norm(),
            });
        }
        for (j, b) in sites.iter().enumerate().skip(i + 1) {
            let d = a.position.distance(&b.position);
            if d < cfg.min_separation {
                return Err(LayoutError::TooClose {
                    first: (i, a.kind),
                    second: (j, b.kind),
                    distance: d,
                    min_separation: cfg.min_separation,
                });
            }
        }
    }

    Ok(NetworkLayout {
        macro_radius: cfg.macro_radius,
        sites,
        counts: TierCounts {
            mbs: 1,
            csbs: cfg.n_csbs,
            rsbs: cfg.n_rsbs,
            hsbs: cfg.n_hsbs,
        },
    })
}

pub fn uniform_on_disc<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Position {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Position::polar(r, theta)
}

/// Draws a Poisson number of users with mean `density`, placed i.i.d.
/// uniformly on the macro disc.
pub fn sample_users<R: Rng + ?Sized>(density: f64, macro_radius: f64, rng: &mut R) -> Vec<Position> {
    if density <= 0.0 || !density.is_finite() {
        return Vec::new();
    }
    let count = Poisson::new(density)
        .map(|d| d.sample(rng) as usize)
        .unwrap_or(0);
    (0..count).map(|_| uniform_on_disc(macro_radius, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout_has_fifty_stations() {
        let layout = build_layout(&LayoutConfig::default()).unwrap();
        assert_eq!(layout.sites.len(), 50);
        assert_eq!(layout.counts.total(), 50);
        assert_eq!(layout.ids_of(BsKind::Csbs).count(), 24);
        assert_eq!(layout.ids_of(BsKind::Rsbs).count(), 16);
        assert_eq!(layout.ids_of(BsKind::Hsbs).count(), 9);
        assert_eq!(layout.sites[0].kind, BsKind::Mbs);
        assert_eq!(layout.sites[0].position, Position::ORIGIN);
    }

    #[test]
    fn empty_tiers_leave_only_the_macro() {
        let cfg = LayoutConfig {
            n_csbs: 0,
            n_rsbs: 0,
            n_hsbs: 0,
            ..LayoutConfig::default()
        };
        let layout = build_layout(&cfg).unwrap();
        assert_eq!(layout.sites.len(), 1);
        assert_eq!(layout.sites[0].kind, BsKind::Mbs);
    }

    #[test]
    fn small_cells_lie_inside_macro_disc() {
        let layout = build_layout(&LayoutConfig::default()).unwrap();
        for s in &layout.sites {
            assert!(s.position.norm() <= 1730.0);
        }
        for s in layout.sites.iter().skip(1) {
            assert_eq!(s.nominal_radius, 350.0);
        }
    }

    #[test]
    fn ring_radii_and_inner_outer_split() {
        let layout = build_layout(&LayoutConfig::default()).unwrap();
        let csbs: Vec<f64> = layout
            .ids_of(BsKind::Csbs)
            .map(|i| layout.sites[i].position.norm())
            .collect();
        let inner = csbs.iter().filter(|r| (*r - 0.35 * 1730.0).abs() < 1e-9).count();
        let outer = csbs.iter().filter(|r| (*r - 0.70 * 1730.0).abs() < 1e-9).count();
        assert_eq!((inner, outer), (8, 16));
    }

    #[test]
    fn layout_is_bit_identical_across_calls() {
        let a = build_layout(&LayoutConfig::default()).unwrap();
        let b = build_layout(&LayoutConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn crowded_layout_names_colliding_pair() {
        let cfg = LayoutConfig {
            n_hsbs: 40,
            ..LayoutConfig::default()
        };
        match build_layout(&cfg) {
            Err(LayoutError::TooClose { first, second, .. }) => {
                assert_eq!(first.1, BsKind::Hsbs);
                assert_eq!(second.1, BsKind::Hsbs);
            }
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn random_placement_respects_separation() {
        let cfg = LayoutConfig {
            placement: Placement::UniformRandom { seed: 11 },
            ..LayoutConfig::default()
        };
        let layout = build_layout(&cfg).unwrap();
        assert_eq!(layout.sites.len(), 50);
        assert_eq!(layout, build_layout(&cfg).unwrap());
    }

    #[test]
    fn zero_density_gives_no_users() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_users(0.0, 1730.0, &mut rng).is_empty());
    }

    #[test]
    fn users_stay_on_the_disc_and_replay() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        let ua = sample_users(300.0, 1730.0, &mut a);
        let ub = sample_users(300.0, 1730.0, &mut b);
        assert_eq!(ua, ub);
        assert!(ua.iter().all(|p| p.norm() <= 1730.0));
    }

    #[test]
    fn mean_user_count_tracks_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 10_000;
        let total: usize = (0..draws)
            .map(|_| sample_users(300.0, 1730.0, &mut rng).len())
            .sum();
        let mean = total as f64 / draws as f64;
        assert!((mean - 300.0).abs() / 300.0 < 0.01, "mean {mean}");
    }

    #[test]
    fn user_counts_pass_chi_square_against_poisson() {
        // Mean 4 keeps the bins well populated; bins 0..=9 plus a tail bin.
        let lambda: f64 = 4.0;
        let draws = 5_000;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut observed = [0usize; 11];
        for _ in 0..draws {
            let n = sample_users(lambda, 100.0, &mut rng).len();
            observed[n.min(10)] += 1;
        }
        let mut pmf = Vec::new();
        let mut p = (-lambda).exp();
        for k in 0..10 {
            pmf.push(p);
            p *= lambda / (k + 1) as f64;
        }
        pmf.push(1.0 - pmf.iter().sum::<f64>());
        let chi2: f64 = observed
            .iter()
            .zip(&pmf)
            .map(|(&o, &p)| {
                let e = p * draws as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        // 10 degrees of freedom, 99.9th percentile.
        assert!(chi2 < 29.59, "chi2 {chi2}");
    }
}
