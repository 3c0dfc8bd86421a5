//! Brute-force reference implementations checked against the association
//! and channel code on small random instances.
//!
//! The oracles share no code with the modules they check beyond the plain
//! data types: distances use `hypot`, coverage and path loss use `powf`,
//! and server choice enumerates every capacity-feasible assignment and keeps
//! the lexicographically best one in user-id order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::association::{associate_user, run_nearest_bs, AlgoParams};
use crate::channel::{sir, SIR_CAP};
use crate::energy::{BsMode, PowerModel};
use crate::state::NetworkState;
use crate::topology::{BsKind, NetworkLayout, Position, Site, TierCounts};

/// Outcome of one oracle family.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: &'static str,
    pub cases: usize,
    pub mismatches: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn dist(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

fn radius(state: &NetworkState, bs: usize) -> f64 {
    let b = &state.stations[bs];
    if b.kind == BsKind::Mbs {
        return f64::INFINITY;
    }
    b.nominal_radius * (b.p_tx / b.model.p_tx).powf(1.0 / state.path_loss_exponent)
}

fn tier(kind: BsKind) -> u8 {
    match kind {
        BsKind::Rsbs => 0,
        BsKind::Hsbs => 1,
        BsKind::Csbs => 2,
        BsKind::Mbs => 3,
    }
}

/// Sort key of a feasible server; smaller is better.
type Rank = (u8, f64, usize);

type RankVector = Vec<Option<Rank>>;

/// Exhaustive search: every user picks one feasible option or none, loads
/// must respect `room`, and the winner minimises the rank vector taken in
/// user-id order (a missing server ranks last).
fn best_assignment(options: &[Vec<(usize, Rank)>], room: &[usize]) -> Vec<Option<usize>> {
    let n = options.len();
    let mut choice = vec![0usize; n];
    let mut best: Option<(RankVector, Vec<Option<usize>>)> = None;
    loop {
        let mut load = vec![0usize; room.len()];
        let mut ok = true;
        let mut ranks = Vec::with_capacity(n);
        let mut servers = Vec::with_capacity(n);
        for u in 0..n {
            match options[u].get(choice[u]) {
                Some(&(bs, rank)) => {
                    load[bs] += 1;
                    if load[bs] > room[bs] {
                        ok = false;
                    }
                    ranks.push(Some(rank));
                    servers.push(Some(bs));
                }
                None => {
                    ranks.push(None);
                    servers.push(None);
                }
            }
        }
        if ok {
            let better = match &best {
                None => true,
                Some((b, _)) => rank_vector_less(&ranks, b),
            };
            if better {
                best = Some((ranks, servers));
            }
        }
        // Odometer over choice[u] in 0..=options[u].len(), last = none.
        let mut u = n;
        loop {
            if u == 0 {
                return best.map(|b| b.1).unwrap_or_else(|| vec![None; n]);
            }
            u -= 1;
            choice[u] += 1;
            if choice[u] <= options[u].len() {
                break;
            }
            choice[u] = 0;
        }
    }
}

fn rank_vector_less(a: &[Option<Rank>], b: &[Option<Rank>]) -> bool {
    for (x, y) in a.iter().zip(b) {
        let ord = match (x, y) {
            (Some(x), Some(y)) => x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.cmp(&y.2)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        };
        match ord {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Tier-priority server for one user given current loads.
pub fn oracle_associate_user(state: &NetworkState, user: usize) -> Option<usize> {
    let pos = state.users[user].position;
    let mut best: Option<(Rank, usize)> = None;
    for b in &state.stations {
        if b.mode != BsMode::Active || b.users >= b.admission_limit {
            continue;
        }
        let d = dist(pos, b.position);
        if d > radius(state, b.id) {
            continue;
        }
        let rank = (tier(b.kind), if b.kind == BsKind::Mbs { 0.0 } else { d }, b.id);
        let better = match &best {
            None => true,
            Some((r, _)) => rank_vector_less(&[Some(rank)], &[Some(*r)]),
        };
        if better {
            best = Some((rank, b.id));
        }
    }
    best.map(|(_, id)| id)
}

/// Expected servers of the nearest-cell baseline, recomputed from scratch.
pub fn oracle_nearest(state: &NetworkState, params: &AlgoParams) -> Vec<Option<usize>> {
    let mut active = Vec::new();
    let mut room = Vec::new();
    for b in &state.stations {
        let capacity = b.capacity;
        if b.kind == BsKind::Rsbs {
            let idle = if params.rf_only_ledger { 0.0 } else { b.model.p_const };
            let budget = b.harvested - idle;
            let p = b.model.p_tx.clamp(b.model.p_tx_min, b.model.p_tx_max);
            let per_user = b.model.beta * (b.user_bandwidth / b.model.total_bandwidth) * p;
            if budget < 0.0 {
                active.push(false);
                room.push(0);
            } else if per_user <= 0.0 {
                active.push(true);
                room.push(capacity);
            } else {
                active.push(true);
                room.push(((budget / per_user).floor() as usize).min(capacity));
            }
        } else {
            active.push(true);
            room.push(capacity);
        }
    }
    let options: Vec<Vec<(usize, Rank)>> = state
        .users
        .iter()
        .map(|u| {
            state
                .stations
                .iter()
                .filter(|b| active[b.id])
                .filter_map(|b| {
                    let d = dist(u.position, b.position);
                    if b.kind == BsKind::Mbs {
                        Some((b.id, (1, 0.0, b.id)))
                    } else if d <= b.nominal_radius {
                        Some((b.id, (0, d, b.id)))
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    best_assignment(&options, &room)
}

/// Independent re-summation of the signal-to-interference ratio.
pub fn oracle_sir(state: &NetworkState, user: usize, server: usize) -> f64 {
    let pos = state.users[user].position;
    let alpha = state.path_loss_exponent;
    let rx = |b: usize| {
        let s = &state.stations[b];
        s.p_tx * state.fading(user, b) * dist(pos, s.position).powf(-alpha)
    };
    let signal = rx(server);
    let mut interference = 0.0;
    for b in &state.stations {
        if b.id != server && b.mode == BsMode::Active {
            interference += rx(b.id);
        }
    }
    if interference == 0.0 {
        SIR_CAP
    } else {
        (signal / interference).min(SIR_CAP)
    }
}

fn legal_modes(kind: BsKind) -> &'static [BsMode] {
    match kind {
        BsKind::Mbs | BsKind::Hsbs => &[BsMode::Active],
        BsKind::Csbs => &[BsMode::Active, BsMode::Sleep],
        BsKind::Rsbs => &[BsMode::Active, BsMode::Off],
    }
}

/// A random instance with at most `max_sbs` small cells and `max_users`
/// users, unit fading, and small sub-carrier budgets so capacity binds.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, max_sbs: usize, max_users: usize) -> NetworkState {
    let n_sbs = rng.random_range(0..=max_sbs);
    let mut sites = vec![Site {
        kind: BsKind::Mbs,
        position: Position::ORIGIN,
        nominal_radius: 350.0,
    }];
    for _ in 0..n_sbs {
        let kind = [BsKind::Csbs, BsKind::Rsbs, BsKind::Hsbs][rng.random_range(0..3)];
        let r = 600.0 * rng.random::<f64>().sqrt();
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        sites.push(Site {
            kind,
            position: Position::polar(r, t),
            nominal_radius: 350.0,
        });
    }
    let layout = NetworkLayout {
        macro_radius: 1000.0,
        sites,
        counts: TierCounts::default(),
    };
    let mut macro_model = PowerModel::macro_default();
    macro_model.n_subcarriers = rng.random_range(1..=8);
    macro_model.total_bandwidth = 10e3 * macro_model.n_subcarriers as f64;
    let mut small = PowerModel::small_default();
    small.n_subcarriers = rng.random_range(1..=8);
    small.total_bandwidth = 10e3 * small.n_subcarriers as f64;

    let n_users = rng.random_range(0..=max_users);
    let users: Vec<Position> = (0..n_users)
        .map(|_| {
            let r = 800.0 * rng.random::<f64>().sqrt() + 1.0;
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            Position::polar(r, t)
        })
        .collect();
    let mut state = NetworkState::new(&layout, macro_model, small, 3.5, 1, users);
    for b in &mut state.stations {
        if b.kind.harvests_energy() {
            b.harvested = rng.random_range(30.0..45.0);
        }
    }
    state
}

/// Randomises modes, powers and loads of an instance in place.
fn perturb<R: Rng + ?Sized>(state: &mut NetworkState, rng: &mut R) {
    for b in &mut state.stations {
        let modes = legal_modes(b.kind);
        b.mode = modes[rng.random_range(0..modes.len())];
        if b.kind.is_small() {
            b.p_tx = rng.random_range(b.model.p_tx_min..=b.model.p_tx_max);
        }
        b.admission_limit = rng.random_range(0..=b.capacity);
        b.users = rng.random_range(0..=b.admission_limit);
    }
}

/// `associate_user` against the single-user oracle on perturbed states.
pub fn check_associate_user(cases: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    for case in 0..cases {
        let mut state = random_instance(&mut rng, 3, 6);
        perturb(&mut state, &mut rng);
        for u in 0..state.users.len() {
            let got = associate_user(&state, u);
            let want = oracle_associate_user(&state, u);
            if got != want {
                mismatches.push(format!("case {case} user {u}: got {got:?}, oracle {want:?}"));
            }
        }
    }
    OracleReport {
        name: "associate_user",
        cases,
        mismatches,
    }
}

/// `run_nearest_bs` against the exhaustive nearest-cell oracle.
pub fn check_nearest_bs(cases: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = AlgoParams::default();
    let mut mismatches = Vec::new();
    for case in 0..cases {
        let mut state = random_instance(&mut rng, 3, 6);
        let want = oracle_nearest(&state, &params);
        run_nearest_bs(&mut state, &params);
        for (u, expected) in want.iter().enumerate() {
            let got = state.users[u].server;
            if got != *expected {
                mismatches.push(format!("case {case} user {u}: got {got:?}, oracle {expected:?}"));
            }
        }
    }
    OracleReport {
        name: "run_nearest_bs",
        cases,
        mismatches,
    }
}

/// Full tier-priority association of every user against the exhaustive
/// oracle, loads starting from zero.
pub fn check_associate_all(cases: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    for case in 0..cases {
        let mut state = random_instance(&mut rng, 3, 6);
        perturb(&mut state, &mut rng);
        let options: Vec<Vec<(usize, Rank)>> = (0..state.users.len())
            .map(|u| {
                let pos = state.users[u].position;
                state
                    .stations
                    .iter()
                    .filter(|b| b.mode == BsMode::Active)
                    .filter_map(|b| {
                        let d = dist(pos, b.position);
                        (d <= radius(&state, b.id))
                            .then_some((b.id, (tier(b.kind), if b.kind == BsKind::Mbs { 0.0 } else { d }, b.id)))
                    })
                    .collect()
            })
            .collect();
        let room: Vec<usize> = state.stations.iter().map(|b| b.admission_limit).collect();
        let want = best_assignment(&options, &room);
        crate::association::associate_all(&mut state, crate::association::Rule::TierPriority);
        for (u, expected) in want.iter().enumerate() {
            let got = state.users[u].server;
            if got != *expected {
                mismatches.push(format!("case {case} user {u}: got {got:?}, oracle {expected:?}"));
            }
        }
    }
    OracleReport {
        name: "associate_all",
        cases,
        mismatches,
    }
}

/// Relative SIR error against the re-summation oracle on 3-station
/// instances with unit fading.
pub fn check_sir(cases: usize, seed: u64, tolerance: f64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    for case in 0..cases {
        let mut state = loop {
            let s = random_instance(&mut rng, 2, 3);
            if s.stations.len() == 3 && !s.users.is_empty() {
                break s;
            }
        };
        for b in &mut state.stations {
            b.mode = BsMode::Active;
            b.p_tx = rng.random_range(0.5..50.0);
        }
        for u in 0..state.users.len() {
            for server in 0..3 {
                let got = sir(&state, u, server).expect("positive distances");
                let want = oracle_sir(&state, u, server);
                let rel = ((got - want) / want).abs();
                if !(rel <= tolerance) {
                    mismatches.push(format!("case {case} user {u} server {server}: {got} vs {want} (rel {rel:e})"));
                }
            }
        }
    }
    OracleReport {
        name: "sir",
        cases,
        mismatches,
    }
}

/// Every oracle family with `cases` instances each.
pub fn run_suite(cases: usize, seed: u64) -> Vec<OracleReport> {
    vec![
        check_associate_user(cases, seed),
        check_associate_all(cases, seed.wrapping_add(1)),
        check_nearest_bs(cases, seed.wrapping_add(2)),
        check_sir(cases, seed.wrapping_add(3), 1e-12),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_search_prefers_earlier_users() {
        // Both users want station 0, which has room for one.
        let options = vec![vec![(0, (0, 10.0, 0)), (1, (3, 0.0, 1))], vec![(0, (0, 5.0, 0)), (1, (3, 0.0, 1))]];
        assert_eq!(best_assignment(&options, &[1, 5]), vec![Some(0), Some(1)]);
        assert_eq!(best_assignment(&options, &[0, 1]), vec![Some(1), None]);
    }

    #[test]
    fn suite_passes() {
        for report in run_suite(200, 11) {
            assert!(report.passed(), "{}: {:?}", report.name, &report.mismatches[..report.mismatches.len().min(5)]);
        }
    }
}
