use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::authlink::{AuthLink, Credentialer};
use super::keys::{replenish_pool, KeyStore, PresharedRegistry};
use super::plan::SessionPlan;
use super::topology::{Route, SwitchLedger, Topology};
use super::NetsimError;
use crate::auth::AuthMode;
use crate::qkd::{DriftState, LinkModel, ParamsFile};
use crate::rng::stream_rng;

/// Pools are topped up when they fall below this many bits.
pub const POOL_LOW_WATER: u64 = 4_096;
pub const POOL_REFILL_BITS: u64 = 16_384;

pub const REPORT_HEADER: &str = "connection,length_km,loss_db,key_rate_kbps,qber_percent";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub connection: String,
    /// The planned user pair this hop belongs to.
    pub pair: String,
    pub length_km: f64,
    pub loss_db: f64,
    pub key_rate_kbps: f64,
    pub qber_percent: f64,
    pub key_bits: u64,
    pub feedback_cycles: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledSession {
    pub pair: String,
    pub start_s: f64,
    pub duration_s: f64,
    pub switches: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub name: String,
    pub mode: AuthMode,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub schedule: Vec<ScheduledSession>,
    /// Nodes other than the two endpoints that saw plaintext key material.
    pub trusted_observers: BTreeSet<String>,
    /// End-to-end key per pair after relay composition.
    pub end_to_end_bits: Vec<(String, u64)>,
    pub auth_cycles: u64,
    pub auth_failures: u64,
    pub certificates_issued: usize,
    pub preshared_pools: usize,
    pub preshared_refill_bits: u64,
}

impl ScenarioReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(REPORT_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.2},{:.2},{:.3}",
                r.connection, r.length_km, r.loss_db, r.key_rate_kbps, r.qber_percent
            );
        }
        s
    }
}

fn hop_params(base: &ParamsFile, route: &Route, h: usize, pair: &super::plan::PlanPair) -> Result<LinkModel, NetsimError> {
    let hop = &route.hops[h];
    let mut link = base.link.with_length(hop.length_km);
    let loss = pair.loss_db.get(h).copied().unwrap_or(hop.loss_db);
    if hop.length_km > 0.0 {
        link.attenuation_db_per_km = loss / hop.length_km;
    }
    if let Some(&m) = pair.misalignment.get(h) {
        link.misalignment = m;
    }
    Ok(LinkModel::new(link, base.drift)?)
}

/// Runs every planned pair. Pairs sharing a switch run one after another in
/// plan order; others start as soon as their switches are free.
pub fn run_scenario(topology: &Topology, plan: &SessionPlan, seed: u64) -> Result<ScenarioReport, NetsimError> {
    plan.validate()?;
    let base = ParamsFile::load(&plan.params)?;
    let mut creds = Credentialer::new(plan.mode, plan.signature.params(), seed)?;
    let mut registry = PresharedRegistry::new();
    let mut store = KeyStore::new();
    let mut ledger = SwitchLedger::new();
    let mut report = ScenarioReport {
        name: plan.name.clone(),
        mode: plan.mode,
        seed,
        rows: Vec::new(),
        schedule: Vec::new(),
        trusted_observers: BTreeSet::new(),
        end_to_end_bits: Vec::new(),
        auth_cycles: 0,
        auth_failures: 0,
        certificates_issued: 0,
        preshared_pools: 0,
        preshared_refill_bits: 0,
    };

    for (pi, pair) in plan.pairs.iter().enumerate() {
        let route = topology.path_resolve(&pair.a, &pair.b)?;
        for (what, n) in [("loss_db", pair.loss_db.len()), ("misalignment", pair.misalignment.len())] {
            if n != 0 && n != route.hops.len() {
                return Err(NetsimError::Config(format!(
                    "{}-{}: {what} lists {n} values for {} hops",
                    pair.a,
                    pair.b,
                    route.hops.len()
                )));
            }
        }
        let duration = pair.duration_s.unwrap_or(plan.duration_s);
        let start = ledger.earliest_start(&route, 0.0);
        ledger.acquire(&route, start, duration)?;
        let label = format!("{}-{}", pair.a, pair.b);
        report.schedule.push(ScheduledSession {
            pair: label.clone(),
            start_s: start,
            duration_s: duration,
            switches: route.switches(),
        });
        report.trusted_observers.extend(route.relays());

        let cycles = duration.round() as u64;
        for (h, hop) in route.hops.iter().enumerate() {
            let mut model = hop_params(&base, &route, h, pair)?;
            model.drift.start_hour = (model.drift.start_hour + start / 3600.0).rem_euclid(24.0);
            let stream = (pi as u64) << 8 | h as u64;
            let mut qkd_rng = stream_rng(seed, "qkd", stream);
            let mut key_rng = stream_rng(seed, "key", stream);
            let mut link = AuthLink::establish(&hop.a, &hop.b, creds.pair(&hop.a, &hop.b, &mut registry)?, seed, stream)?;

            let mut d = DriftState::default();
            let (mut bits, mut qsum, mut qn, mut fb) = (0u64, 0.0, 0u64, 0u64);
            for c in 0..cycles {
                let pass = if c % plan.auth_every == 0 { link.run_cycle() } else { true };
                let (r, next) = model.simulate_cycle(&d, c, pass, &mut qkd_rng);
                d = next;
                if r.feedback {
                    fb += 1;
                } else {
                    qsum += r.qber;
                    qn += 1;
                }
                bits += r.key_bits;
                store.deposit_random(&hop.a, &hop.b, r.key_bits, &mut key_rng);
                if link.pool_remaining().is_some_and(|rem| rem < POOL_LOW_WATER)
                    && store.balance(&hop.a, &hop.b) >= POOL_REFILL_BITS
                {
                    let moved = replenish_pool(&mut registry, &mut store, &hop.a, &hop.b, POOL_REFILL_BITS)?;
                    link.extend_pools(&moved);
                    report.preshared_refill_bits += POOL_REFILL_BITS;
                }
            }
            report.auth_cycles += link.cycles();
            report.auth_failures += link.failures();
            report.rows.push(ReportRow {
                connection: hop.label(),
                pair: label.clone(),
                length_km: hop.length_km,
                loss_db: model.params.loss_db(),
                key_rate_kbps: bits as f64 / cycles as f64 / 1e3,
                qber_percent: if qn > 0 { 100.0 * qsum / qn as f64 } else { 0.0 },
                key_bits: bits,
                feedback_cycles: fb,
            });
        }

        if route.hops.len() > 1 {
            let mut path: Vec<&str> = vec![route.hops[0].a.as_str()];
            path.extend(route.hops.iter().map(|h| h.b.as_str()));
            let composed = store.compose_along(&path, None)?;
            debug_assert_eq!(composed.alice, composed.bob);
            report.end_to_end_bits.push((label, composed.consumed_per_hop));
        } else {
            report.end_to_end_bits.push((label, store.balance(&pair.a, &pair.b)));
        }
    }
    report.certificates_issued = creds.certificates_issued();
    report.preshared_pools = registry.len();
    Ok(report)
}
