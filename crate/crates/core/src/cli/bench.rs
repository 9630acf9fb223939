use std::fmt::Write as _;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{resolve_out, write_output, CliError, Output};
use crate::auth::AuthMode;
use crate::crypto::{mac_tag, mac_verify, sig_keygen, sig_sign, sig_verify, ParamsId, PresharedKeyPool};
use crate::netsim::{AuthLink, Credentialer, PresharedRegistry};

pub const BENCH_HEADER: &str = "mode,sig_params,op,iterations,mean_us,median_us,signature_bytes,key_bits_per_op";

struct Row {
    op: &'static str,
    times: Vec<Duration>,
    size: usize,
    key_bits: f64,
}

fn stats(times: &[Duration]) -> (f64, f64) {
    let mut us: Vec<f64> = times.iter().map(|d| d.as_secs_f64() * 1e6).collect();
    us.sort_by(f64::total_cmp);
    let mean = us.iter().sum::<f64>() / us.len().max(1) as f64;
    let median = match us.len() {
        0 => 0.0,
        n if n % 2 == 1 => us[n / 2],
        n => 0.5 * (us[n / 2 - 1] + us[n / 2]),
    };
    (mean, median)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn sim(e: impl std::fmt::Display) -> CliError {
    CliError::Simulation(e.to_string())
}

fn cycles(mode: AuthMode, params: ParamsId, n: u32) -> Result<Row, CliError> {
    let mut creds = Credentialer::new(mode, params.params(), 1)?;
    let mut reg = PresharedRegistry::new();
    let c = creds.pair("A", "B", &mut reg)?;
    let mut link = AuthLink::establish("A", "B", c, 1, 0).map_err(sim)?;
    if mode == AuthMode::PresharedKey {
        let more = vec![0x5au8; n as usize * 160];
        link.extend_pools(bitvec::slice::BitSlice::from_slice(&more));
    }
    let start_remaining = link.pool_remaining();
    let mut times = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let (ok, t) = timed(|| link.run_cycle());
        if !ok {
            return Err(CliError::Simulation("benchmark cycle failed".into()));
        }
        times.push(t);
    }
    let used = match (start_remaining, link.pool_remaining()) {
        (Some(a), Some(b)) => (a - b) as f64 / n.max(1) as f64,
        _ => 0.0,
    };
    Ok(Row { op: "cycle", times, size: 0, key_bits: used })
}

pub fn authbench(
    mode: AuthMode,
    iterations: u32,
    params: ParamsId,
    output: &Output,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    if iterations == 0 {
        return Err(CliError::Config("iterations must be positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut msgs = vec![[0u8; 64]; iterations as usize];
    for m in &mut msgs {
        rng.fill_bytes(m);
    }
    let mut rows = Vec::new();
    match mode {
        AuthMode::Pqc => {
            let p = params.params();
            let mut kg = Vec::new();
            let mut kp = None;
            for i in 0..iterations {
                let seed = [i as u8; 32];
                let (k, t) = timed(|| sig_keygen(&p, &seed));
                kg.push(t);
                kp.get_or_insert(k.map_err(sim)?);
            }
            let kp = kp.expect("iterations > 0");
            rows.push(Row { op: "keygen", times: kg, size: 0, key_bits: 0.0 });
            let mut sigs = Vec::new();
            let mut st = Vec::new();
            for m in &msgs {
                let (s, t) = timed(|| sig_sign(kp.secret(), m, &mut rng));
                st.push(t);
                sigs.push(s.map_err(sim)?);
            }
            let sizes: Vec<usize> = sigs.iter().map(|s| s.to_bytes().len()).collect();
            if sizes.iter().any(|&s| s != sizes[0]) {
                return Err(CliError::Simulation("signature size varied".into()));
            }
            rows.push(Row { op: "sign", times: st, size: sizes[0], key_bits: 0.0 });
            let mut vt = Vec::new();
            for (m, s) in msgs.iter().zip(&sigs) {
                let (ok, t) = timed(|| sig_verify(kp.public(), m, s));
                if !ok {
                    return Err(CliError::Simulation("benchmark signature did not verify".into()));
                }
                vt.push(t);
            }
            rows.push(Row { op: "verify", times: vt, size: sizes[0], key_bits: 0.0 });
        }
        AuthMode::PresharedKey => {
            let mut key = vec![0u8; iterations as usize * 16 + 64];
            rng.fill_bytes(&mut key);
            let mut tx = PresharedKeyPool::from_bytes("A", "B", &key);
            let mut rx = tx.clone();
            let mut tags = Vec::new();
            let mut tt = Vec::new();
            for m in &msgs {
                let (tag, t) = timed(|| mac_tag(&mut tx, m));
                tt.push(t);
                tags.push(tag.map_err(sim)?);
            }
            let per_tag = tx.cursor() as f64 / iterations as f64;
            let size = tags[0].to_bytes().len();
            rows.push(Row { op: "tag", times: tt, size, key_bits: per_tag });
            let mut vt = Vec::new();
            for (m, tag) in msgs.iter().zip(&tags) {
                let (ok, t) = timed(|| mac_verify(&mut rx, m, tag));
                if ok != Ok(true) {
                    return Err(CliError::Simulation("benchmark tag did not verify".into()));
                }
                vt.push(t);
            }
            rows.push(Row { op: "verify", times: vt, size, key_bits: per_tag });
        }
    }
    rows.push(cycles(mode, params, iterations)?);

    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for r in &rows {
        let (mean, median) = stats(&r.times);
        let _ = writeln!(
            csv,
            "{},{},{},{},{:.1},{:.1},{},{:.1}",
            mode,
            params,
            r.op,
            r.times.len(),
            mean,
            median,
            r.size,
            r.key_bits
        );
    }
    write_output(resolve_out(output, "authbench.csv").as_ref(), &csv, stdout)
}
