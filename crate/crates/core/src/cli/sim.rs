use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use rand::RngCore;

use super::{resolve_out, write_output, CliError, Output};
use crate::auth::mitm::{run_mitm, Edit, Field, MitmFixture, MitmOutcome, Mutation};
use crate::auth::{AuthError, AuthMode, Direction, MessageClass};
use crate::crypto::SigParams;
use crate::netsim::{run_scenario, AuthLink, Credentialer, PresharedRegistry, SessionPlan, Topology};
use crate::qkd::link::LinkRun;
use crate::qkd::{run_link, simulate_intercept_resend, DriftState, LinkModel, ParamsFile, WINDOW_SECONDS};
use crate::rng::stream_rng;

pub const SWEEP_HEADER: &str = "length_km,key_rate_kbps,qber_percent,stddev_kbps";
pub const ATTACK_HEADER: &str =
    "connection,mode,mitm,attack_fraction,auth_verdict,qber_percent,key_rate_kbps,key_bits,mc_qber_percent";
pub const STABILITY_HEADER: &str = "window_start_s,hour_of_day,key_rate_kbps,qber_percent,feedback_cycles,feedback_events";

/// `10,20,30`, `10:100:10` (inclusive) or empty.
pub fn parse_lengths(s: &str) -> Result<Vec<f64>, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| CliError::Config(format!("bad length `{t}`")))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts[..] else {
            return Err(CliError::Config(format!("range `{s}` must be start:end:step")));
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if step <= 0.0 || b < a {
            return Err(CliError::Config(format!("empty or endless range `{s}`")));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + i as f64 * step).collect());
    }
    s.split(',').map(num).collect()
}

pub fn sweep(
    params: &str,
    lengths: &str,
    seed: u64,
    windows: u32,
    output: &Output,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let file = ParamsFile::load(params)?;
    let lengths = parse_lengths(lengths)?;
    if windows == 0 {
        return Err(CliError::Config("need at least one window".into()));
    }
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for (i, &l) in lengths.iter().enumerate() {
        let model = LinkModel::new(file.link.with_length(l), file.drift)?;
        let mut rng = stream_rng(seed, "sweep", i as u64);
        let run = run_link(&model, windows as u64 * WINDOW_SECONDS as u64, &mut rng, |_| true);
        let s = run.summary(&model);
        let _ = writeln!(csv, "{},{:.3},{:.4},{:.3}", l, s.mean_kbps, s.mean_qber * 100.0, s.kbps_stddev);
    }
    write_output(resolve_out(output, "sweep.csv").as_ref(), &csv, stdout)
}

pub fn scenario(
    plan: &str,
    topology: Option<&str>,
    seed: Option<u64>,
    mode: Option<AuthMode>,
    output: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let mut plan = SessionPlan::load(plan)?;
    if let Some(m) = mode {
        plan.mode = m;
    }
    let seed = seed
        .or(plan.seed)
        .ok_or_else(|| CliError::Config("no seed given and the plan has none".into()))?;
    let topo = Topology::load(topology.unwrap_or(&plan.topology))?;
    let report = run_scenario(&topo, &plan, seed)?;
    write_output(resolve_out(output, &format!("{}.csv", plan.name)).as_ref(), &report.to_csv(), stdout)?;
    let _ = writeln!(
        stderr,
        "scenario {} mode={} seed={} auth_cycles={} auth_failures={} certificates={} preshared_pools={}",
        report.name,
        report.mode,
        seed,
        report.auth_cycles,
        report.auth_failures,
        report.certificates_issued,
        report.preshared_pools
    );
    let observers: Vec<&str> = report.trusted_observers.iter().map(String::as_str).collect();
    let _ = writeln!(stderr, "trusted nodes seeing key: [{}]", observers.join(", "));
    for (pair, bits) in &report.end_to_end_bits {
        let _ = writeln!(stderr, "end-to-end {pair}: {bits} bits");
    }
    Ok(())
}

pub struct AttackArgs {
    pub topology: String,
    pub pair: String,
    pub attack_fraction: f64,
    pub mitm: bool,
    pub mode: AuthMode,
    pub seed: u64,
    pub duration: u64,
    pub params: String,
    pub check: bool,
}

fn mitm_mutations(mode: AuthMode) -> Vec<Mutation> {
    let both = [Direction::AToB, Direction::BToA];
    let mut v: Vec<Mutation> =
        both.iter().map(|&direction| Mutation { field: Field::Nonce, direction, edit: Edit::Substitute }).collect();
    match mode {
        AuthMode::Pqc => v.extend(
            both.iter().map(|&direction| Mutation { field: Field::Certificate, direction, edit: Edit::Substitute }),
        ),
        AuthMode::PresharedKey => {
            for direction in both {
                for class in MessageClass::ALL {
                    v.push(Mutation { field: Field::Tag(class), direction, edit: Edit::Substitute });
                }
            }
        }
    }
    v
}

fn outcome_label(o: &MitmOutcome) -> String {
    match o {
        MitmOutcome::Accepted => "pass".into(),
        MitmOutcome::Phase1Failed(AuthError::CertInvalid(_)) => "failed(cert-invalid)".into(),
        MitmOutcome::Phase1Failed(AuthError::PeerMismatch { .. }) => "failed(peer-mismatch)".into(),
        MitmOutcome::Phase1Failed(_) => "failed(phase1)".into(),
        MitmOutcome::Rejected { reason, .. } => format!("failed({reason})"),
    }
}

pub fn attack(a: &AttackArgs, output: &Output, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.attack_fraction) {
        return Err(CliError::Config(format!("attack fraction {} outside [0, 1]", a.attack_fraction)));
    }
    if a.duration == 0 {
        return Err(CliError::Config("duration must be positive".into()));
    }
    let (x, y) = a
        .pair
        .split_once('-')
        .ok_or_else(|| CliError::Config(format!("pair `{}` is not of the form A-B", a.pair)))?;
    let topo = Topology::load(&a.topology)?;
    let route = topo.path_resolve(x, y)?;
    let file = ParamsFile::load(&a.params)?;
    let sig = SigParams::REFERENCE;

    let mut csv = String::from(ATTACK_HEADER);
    csv.push('\n');
    let mut any_failed = false;
    let mut creds = Credentialer::new(a.mode, sig, a.seed)?;
    let mut registry = PresharedRegistry::new();
    for (h, hop) in route.hops.iter().enumerate() {
        let mut link_params = file.link.with_length(hop.length_km);
        if hop.length_km > 0.0 {
            link_params.attenuation_db_per_km = hop.loss_db / hop.length_km;
        }
        let model = LinkModel::new(link_params, file.drift)?.with_attack(a.attack_fraction)?;
        let stream = h as u64;

        let (verdict, run) = if a.mitm {
            let fx = match a.mode {
                AuthMode::Pqc => MitmFixture::pqc(&sig, a.seed).map_err(|e| CliError::Simulation(e.to_string()))?,
                AuthMode::PresharedKey => MitmFixture::preshared(a.seed),
            };
            let outcome =
                run_mitm(&fx, &mitm_mutations(a.mode), a.seed).map_err(|e| CliError::Simulation(e.to_string()))?;
            let pass = !outcome.is_rejected();
            let run = run_link(&model, a.duration, &mut stream_rng(a.seed, "qkd", stream), |_| pass);
            (outcome_label(&outcome), run)
        } else {
            let mut link = AuthLink::establish(&hop.a, &hop.b, creds.pair(&hop.a, &hop.b, &mut registry)?, a.seed, stream)
                .map_err(|e| CliError::Simulation(e.to_string()))?;
            let run = run_link(&model, a.duration, &mut stream_rng(a.seed, "qkd", stream), |c| {
                if c % 10 == 0 {
                    link.run_cycle()
                } else {
                    true
                }
            });
            let v = if link.failures() == 0 { "pass".to_string() } else { "failed(bad-tag)".to_string() };
            (v, run)
        };
        any_failed |= verdict != "pass";
        let s = run.summary(&model);
        let mc = simulate_intercept_resend(1_000_000, a.attack_fraction, 0.0, &mut stream_rng(a.seed, "mc", stream))?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{:.4},{:.3},{},{:.4}",
            hop.label(),
            a.mode,
            a.mitm as u8,
            a.attack_fraction,
            verdict,
            s.mean_qber * 100.0,
            s.mean_kbps,
            run.total_key_bits(),
            mc.qber() * 100.0
        );
    }
    write_output(resolve_out(output, "attack.csv").as_ref(), &csv, stdout)?;
    if a.check && any_failed {
        let _ = writeln!(stderr, "authentication verdict: failed");
        return Err(CliError::AuthFailure(format!("pair {}", a.pair)));
    }
    Ok(())
}

pub struct StabilityArgs {
    pub params: String,
    pub hours: f64,
    pub seed: u64,
    pub length: Option<f64>,
    pub mode: AuthMode,
    pub auth_every: u64,
    pub trace: Option<PathBuf>,
}

/// Runs the link for `cycles` seconds with sampled two-way authentication,
/// topping up the pre-shared pool from distilled key when needed.
pub fn stability_run(
    model: &LinkModel,
    cycles: u64,
    mode: AuthMode,
    auth_every: u64,
    seed: u64,
) -> Result<(LinkRun, u64), CliError> {
    let mut creds = Credentialer::new(mode, SigParams::REFERENCE, seed)?;
    let mut registry = PresharedRegistry::new();
    let mut link = AuthLink::establish("A", "B", creds.pair("A", "B", &mut registry)?, seed, 0)
        .map_err(|e| CliError::Simulation(e.to_string()))?;
    let mut qkd_rng = stream_rng(seed, "qkd", 0);
    let mut key_rng = stream_rng(seed, "key", 0);
    let mut d = DriftState::default();
    let mut out = Vec::with_capacity(cycles as usize);
    let mut unspent_key = 0u64;
    for c in 0..cycles {
        let pass = if c % auth_every.max(1) == 0 { link.run_cycle() } else { true };
        let (r, next) = model.simulate_cycle(&d, c, pass, &mut qkd_rng);
        d = next;
        unspent_key += r.key_bits;
        out.push(r);
        let refill = crate::netsim::scenario::POOL_REFILL_BITS;
        if link.pool_remaining().is_some_and(|rem| rem < crate::netsim::scenario::POOL_LOW_WATER) && unspent_key >= refill {
            let mut bytes = vec![0u8; (refill / 8) as usize];
            key_rng.fill_bytes(&mut bytes);
            link.extend_pools(bitvec::slice::BitSlice::from_slice(&bytes));
            unspent_key -= refill;
        }
    }
    Ok((LinkRun { cycles: out, final_state: d }, link.failures()))
}

pub fn stability(
    a: &StabilityArgs,
    output: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    if !(a.hours > 0.0 && a.hours.is_finite()) {
        return Err(CliError::Config(format!("hours must be positive, got {}", a.hours)));
    }
    let file = ParamsFile::load(&a.params)?;
    let mut link = file.link;
    if let Some(l) = a.length {
        link.length_km = l;
    }
    let model = LinkModel::new(link, file.drift)?;
    let cycles = ((a.hours * 3600.0).round() as u64).max(1);
    let (run, failures) = stability_run(&model, cycles, a.mode, a.auth_every, a.seed)?;
    let s = run.summary(&model);

    let mut csv = String::from(STABILITY_HEADER);
    csv.push('\n');
    let per = WINDOW_SECONDS as usize;
    for (w, chunk) in s.windows.iter().zip(run.cycles.chunks(per)) {
        let events = chunk.iter().filter(|c| c.trigger.is_some()).count();
        let _ = writeln!(
            csv,
            "{:.0},{:.3},{:.3},{:.4},{},{}",
            w.start_s,
            model.drift.hour_of_day(w.start_s),
            w.key_rate_kbps,
            w.mean_qber * 100.0,
            w.feedback_cycles,
            events
        );
    }
    let out_path = resolve_out(output, "stability.csv");
    write_output(out_path.as_ref(), &csv, stdout)?;

    let trace_path = a.trace.clone().or_else(|| {
        out_path.as_ref().map(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "stability".into());
            p.with_file_name(format!("{stem}-trace.csv"))
        })
    });
    if let Some(tp) = trace_path {
        let f = std::fs::File::create(&tp).map_err(|e| CliError::Config(format!("{}: {e}", tp.display())))?;
        run.write_trace(std::io::BufWriter::new(f))?;
    }

    let _ = writeln!(
        stderr,
        "mean_kbps={:.2} mean_qber_percent={:.4} windows={} feedback_qber={} feedback_timer={} feedback_day={} feedback_night={} auth_failures={}",
        s.mean_kbps,
        s.mean_qber * 100.0,
        s.windows.len(),
        s.qber_triggers,
        s.timer_triggers,
        s.day_triggers,
        s.night_triggers,
        failures
    );
    if let Some((lo, hi)) = run.quiet_window() {
        let q: Vec<f64> = run.cycles[lo..hi].iter().filter(|c| !c.feedback).map(|c| c.qber).collect();
        let mean = q.iter().sum::<f64>() / q.len().max(1) as f64;
        let _ = writeln!(stderr, "quiet window {lo}..{hi} s: mean_qber_percent={:.4}", mean * 100.0);
    }
    Ok(())
}
