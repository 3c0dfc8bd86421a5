//! Runtime view of one Monte Carlo sample: stations with their current mode,
//! power and load, users with their server, and the per-link fading gains.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::association::{coverage_radius, UserClass};
use crate::energy::{mode_transition, BsMode, PowerModel};
use crate::error::EnergyError;
use crate::topology::{BsKind, NetworkLayout, Position, Site};

pub type BsId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct BaseStation {
    pub id: BsId,
    pub kind: BsKind,
    pub position: Position,
    pub nominal_radius: f64,
    pub model: PowerModel,
    pub mode: BsMode,
    /// Current transmit power, watts.
    pub p_tx: f64,
    /// Energy harvested this slot, joules. Zero for grid-only stations.
    pub harvested: f64,
    /// Bandwidth in use, hertz.
    pub used_bandwidth: f64,
    pub users: usize,
    /// Bandwidth handed to each associated user, hertz.
    pub user_bandwidth: f64,
    /// Sub-carrier limit on the number of users.
    pub capacity: usize,
    /// Admission cap, at most `capacity`.
    pub admission_limit: usize,
}

impl BaseStation {
    /// An active station at nominal power with no users.
    pub fn new(id: BsId, site: &Site, model: PowerModel, subcarriers_per_user: usize) -> Self {
        let spu = subcarriers_per_user.max(1);
        let capacity = model.n_subcarriers / spu;
        Self {
            id,
            kind: site.kind,
            position: site.position,
            nominal_radius: site.nominal_radius,
            model,
            mode: BsMode::Active,
            p_tx: model.p_tx,
            harvested: 0.0,
            used_bandwidth: 0.0,
            users: 0,
            user_bandwidth: model.subcarrier_bandwidth() * spu as f64,
            capacity,
            admission_limit: capacity,
        }
    }

    pub fn is_active(&self) -> bool {
        self.mode == BsMode::Active
    }

    pub fn has_room(&self) -> bool {
        self.users < self.admission_limit
    }

    /// Current coverage radius. The macro cell covers the whole disc.
    pub fn coverage_radius(&self, path_loss_exponent: f64) -> f64 {
        if self.kind == BsKind::Mbs {
            return f64::INFINITY;
        }
        coverage_radius(self.p_tx, self.nominal_radius, self.model.p_tx, path_loss_exponent)
    }

    /// Largest radius this station can reach at `p_tx_max`.
    pub fn max_reach(&self, path_loss_exponent: f64) -> f64 {
        if self.kind == BsKind::Mbs {
            return f64::INFINITY;
        }
        let p = self.model.p_tx_max.max(self.model.p_tx);
        coverage_radius(p, self.nominal_radius, self.model.p_tx, path_loss_exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTerminal {
    pub id: usize,
    pub position: Position,
    pub server: Option<BsId>,
    pub class: UserClass,
    /// Allocated bandwidth, hertz. Zero while unserved.
    pub bandwidth: f64,
}

/// A small cell within reach of a user, kept sorted by `(distance, id)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub bs: BsId,
    pub distance: f64,
}

/// Stations, users and link gains of one sample.
#[derive(Debug, Clone)]
pub struct NetworkState {
    pub macro_radius: f64,
    pub path_loss_exponent: f64,
    pub stations: Vec<BaseStation>,
    pub users: Vec<UserTerminal>,
    fading: Vec<f64>,
    candidates: Vec<Vec<Candidate>>,
    /// Per station, the users it could ever cover, by user id.
    reachable: Vec<Vec<(usize, f64)>>,
}

impl NetworkState {
    /// All stations active at nominal power, users unassigned, unit fading.
    pub fn new(
        layout: &NetworkLayout,
        macro_model: PowerModel,
        small_model: PowerModel,
        path_loss_exponent: f64,
        subcarriers_per_user: usize,
        users: Vec<Position>,
    ) -> Self {
        let stations: Vec<BaseStation> = layout
            .sites
            .iter()
            .enumerate()
            .map(|(id, site)| {
                let model = if site.kind == BsKind::Mbs {
                    macro_model
                } else {
                    small_model
                };
                BaseStation::new(id, site, model, subcarriers_per_user)
            })
            .collect();

        let reach: Vec<f64> = stations
            .iter()
            .map(|b| b.max_reach(path_loss_exponent))
            .collect();
        let candidates: Vec<Vec<Candidate>> = users
            .iter()
            .map(|u| {
                let mut c: Vec<Candidate> = stations
                    .iter()
                    .filter(|b| b.kind.is_small())
                    .filter_map(|b| {
                        let d = u.distance(&b.position);
                        (d <= reach[b.id]).then_some(Candidate { bs: b.id, distance: d })
                    })
                    .collect();
                c.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.bs.cmp(&b.bs)));
                c
            })
            .collect();

        let mut reachable = vec![Vec::new(); stations.len()];
        for (u, list) in candidates.iter().enumerate() {
            for c in list {
                reachable[c.bs].push((u, c.distance));
            }
        }

        let users: Vec<UserTerminal> = users
            .into_iter()
            .enumerate()
            .map(|(id, position)| UserTerminal {
                id,
                position,
                server: None,
                class: UserClass::Mmu,
                bandwidth: 0.0,
            })
            .collect();
        let fading = vec![1.0; users.len() * stations.len()];

        Self {
            macro_radius: layout.macro_radius,
            path_loss_exponent,
            stations,
            users,
            fading,
            candidates,
            reachable,
        }
    }

    /// Draws i.i.d. unit-mean exponential power gains for every link, user
    /// by user in station order.
    pub fn draw_rayleigh_fading<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for h in &mut self.fading {
            *h = Exp1.sample(rng);
        }
    }

    pub fn set_fading(&mut self, user: usize, bs: BsId, gain: f64) {
        let n = self.stations.len();
        self.fading[user * n + bs] = gain;
    }

    pub fn fading(&self, user: usize, bs: BsId) -> f64 {
        self.fading[user * self.stations.len() + bs]
    }

    pub fn mbs_id(&self) -> BsId {
        0
    }

    pub fn distance(&self, user: usize, bs: BsId) -> f64 {
        self.users[user].position.distance(&self.stations[bs].position)
    }

    /// Small cells that could ever cover `user`, nearest first.
    pub fn candidates(&self, user: usize) -> &[Candidate] {
        &self.candidates[user]
    }

    /// Users within reach of small cell `bs` with their distances, by user id.
    pub fn reachable(&self, bs: BsId) -> &[(usize, f64)] {
        &self.reachable[bs]
    }

    pub fn ids_of(&self, kind: BsKind) -> impl Iterator<Item = BsId> + '_ {
        self.stations
            .iter()
            .filter(move |b| b.kind == kind)
            .map(|b| b.id)
    }

    /// Drops every association and zeroes the bandwidth ledgers.
    pub fn clear_association(&mut self) {
        for u in &mut self.users {
            u.server = None;
            u.bandwidth = 0.0;
        }
        for b in &mut self.stations {
            b.users = 0;
            b.used_bandwidth = 0.0;
        }
    }

    pub fn assign(&mut self, user: usize, bs: BsId) {
        debug_assert!(self.users[user].server.is_none());
        let station = &mut self.stations[bs];
        station.users += 1;
        station.used_bandwidth += station.user_bandwidth;
        self.users[user].server = Some(bs);
        self.users[user].bandwidth = station.user_bandwidth;
    }

    /// Applies a mode change, detaching any users the station sheds.
    pub fn set_mode(&mut self, bs: BsId, target: BsMode) -> Result<(), EnergyError> {
        let updated = mode_transition(self.stations[bs].clone(), target)?;
        self.stations[bs] = updated;
        if target != BsMode::Active {
            for u in &mut self.users {
                if u.server == Some(bs) {
                    u.server = None;
                    u.bandwidth = 0.0;
                }
            }
        }
        Ok(())
    }

    pub fn served_users(&self) -> usize {
        self.users.iter().filter(|u| u.server.is_some()).count()
    }
}
