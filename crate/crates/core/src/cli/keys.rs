use std::io::Write;
use std::path::{Path, PathBuf};

use rand::rngs::OsRng;
use rand::{RngCore, SeedableRng, TryRngCore};
use rand_chacha::ChaCha20Rng;

use super::CliError;
use crate::crypto::keyfile::{unwrap, wrap, FileKind};
use crate::crypto::{sig_keygen, ParamsId, PublicKey, SecretKey, SigKeypair};
use crate::pki::{verify_certificate, Certificate, CertificateAuthority, TrustStore, Validity};

fn read(p: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
}

fn write(p: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(p, bytes).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
}

fn bad(p: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {e}", p.display()))
}

fn rng_for(seed: Option<u64>) -> Result<ChaCha20Rng, CliError> {
    match seed {
        Some(s) => Ok(ChaCha20Rng::seed_from_u64(s)),
        None => {
            let mut k = [0u8; 32];
            OsRng.try_fill_bytes(&mut k).map_err(|e| CliError::Simulation(format!("os rng: {e}")))?;
            Ok(ChaCha20Rng::from_seed(k))
        }
    }
}

pub fn read_public(p: &Path) -> Result<PublicKey, CliError> {
    let bytes = read(p)?;
    let (id, body) = unwrap(FileKind::PublicKey, &bytes).map_err(|e| bad(p, e))?;
    PublicKey::from_bytes(&id.params(), body).map_err(|e| bad(p, e))
}

pub fn read_secret(p: &Path) -> Result<SigKeypair, CliError> {
    let bytes = read(p)?;
    let (id, body) = unwrap(FileKind::SecretKey, &bytes).map_err(|e| bad(p, e))?;
    Ok(SigKeypair::from_secret(SecretKey::from_bytes(&id.params(), body).map_err(|e| bad(p, e))?))
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

pub fn keygen(params: ParamsId, seed: Option<u64>, prefix: &Path, stderr: &mut dyn Write) -> Result<(), CliError> {
    let mut k = [0u8; 32];
    rng_for(seed)?.fill_bytes(&mut k);
    let kp = sig_keygen(&params.params(), &k).map_err(|e| CliError::Simulation(e.to_string()))?;
    let (pubp, secp) = (with_ext(prefix, ".pub"), with_ext(prefix, ".sec"));
    write(&pubp, &wrap(FileKind::PublicKey, params, &kp.public().to_bytes()))?;
    write(&secp, &wrap(FileKind::SecretKey, params, &kp.secret().to_bytes()))?;
    let _ = writeln!(stderr, "wrote {} and {}", pubp.display(), secp.display());
    Ok(())
}

pub struct IssueArgs {
    pub ca_key: PathBuf,
    pub ca_name: String,
    pub subject: String,
    pub subject_key: PathBuf,
    pub not_before: u64,
    pub not_after: u64,
    pub last_serial: u64,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

pub fn issue(a: &IssueArgs, stderr: &mut dyn Write) -> Result<(), CliError> {
    let ca_kp = read_secret(&a.ca_key)?;
    let ca_params = ca_kp.params().id;
    let subject = read_public(&a.subject_key)?;
    let mut ca = CertificateAuthority::new(a.ca_name.clone(), ca_kp)
        .map_err(|e| CliError::Config(e.to_string()))?
        .with_last_serial(a.last_serial);
    let mut rng = rng_for(a.seed)?;
    let cert = ca
        .issue_for(&a.subject, &subject, Validity::new(a.not_before, a.not_after), &mut rng)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let bytes = cert.to_file(ca_params).map_err(|e| CliError::Config(e.to_string()))?;
    write(&a.out, &bytes)?;
    let _ = writeln!(stderr, "issued serial {} for {} -> {}", cert.serial(), a.subject, a.out.display());
    Ok(())
}

pub fn verify_cert(ca_pub: &Path, ca_name: &str, cert: &Path, now: u64, stdout: &mut dyn Write) -> Result<(), CliError> {
    let pk = read_public(ca_pub)?;
    let bytes = read(cert)?;
    let (_, c) = Certificate::from_file(&bytes).map_err(|e| bad(cert, e))?;
    let mut store = TrustStore::new();
    store.add(ca_name, pk);
    match verify_certificate(&store, &c, now) {
        Ok(()) => {
            let _ = writeln!(stdout, "valid subject={} serial={}", c.subject(), c.serial());
            Ok(())
        }
        Err(r) => {
            let _ = writeln!(stdout, "rejected({r})");
            Err(CliError::AuthFailure(format!("certificate rejected: {r}")))
        }
    }
}
