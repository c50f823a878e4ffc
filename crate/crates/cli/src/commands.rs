use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context};
use gps_core::costmodel::{
    check_table2, coupon_storage_note, render_table2, render_table3, reproduce_table2, reproduce_table3, OutputFormat,
};
use gps_core::datapath::{Architecture, Engine, KcmConfig, SerialConfig};
use gps_core::params::{
    keygen as make_keypair, make_coupons, make_profile, parse_coupon_file, parse_key_file, write_coupon_file,
    write_key_file, CouponSeed, KeyFile,
};
use gps_core::protocol::{
    run_prover, CouponSource, ProtocolError, ProverDirectory, ProverSession, TcpTransport, VerifierService,
};
use rand::rngs::OsRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::{AuthArgs, CmdResult, CouponsArgs, Failure, KeygenArgs, ReportArgs, ServeArgs};

/// Returns the given seed, or draws one from the OS and echoes it so the
/// run can be repeated.
pub(crate) fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = OsRng.next_u64();
        println!("seed={s}");
        s
    })
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::Usage)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(Failure::Usage)
}

fn load_key(path: &Path) -> Result<KeyFile, Failure> {
    parse_key_file(&read_text(path)?)
        .with_context(|| format!("parsing key file {}", path.display()))
        .map_err(Failure::Usage)
}

pub(crate) fn keygen(args: KeygenArgs) -> CmdResult {
    let seed = resolve_seed(args.seed);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let prime_bits = args.prime_bits.unwrap_or(args.profile.default_prime_bits());
    let profile = make_profile(args.profile.name(), prime_bits, &mut rng).map_err(|e| Failure::Usage(e.into()))?;
    let keypair = make_keypair(&profile, &mut rng).context("key generation")?;
    write_text(&args.out, &write_key_file(&profile, &keypair))?;
    println!("id={}", keypair.id_hex());
    println!("profile={} n_bits={}", profile.name, profile.n.bits());
    Ok(())
}

pub(crate) fn coupons(args: CouponsArgs) -> CmdResult {
    if args.count == 0 {
        return Err(Failure::Usage(anyhow!("--count must be at least 1")));
    }
    let key = load_key(&args.key)?;
    let seed = resolve_seed(args.seed);
    let coupons =
        make_coupons(&key.profile, &CouponSeed::from_u64(seed, args.count), args.count).context("coupon generation")?;
    write_text(&args.out, &write_coupon_file(&key.profile, &coupons))?;
    println!("coupons={} id={}", coupons.len(), key.keypair.id_hex());
    Ok(())
}

pub(crate) fn serve(args: ServeArgs) -> CmdResult {
    let mut profile = None;
    let mut provers = ProverDirectory::new();
    for path in &args.keys {
        let key = load_key(path)?;
        match &profile {
            None => profile = Some(key.profile.clone()),
            Some(p) if *p != key.profile => {
                return Err(Failure::Usage(anyhow!("{} uses a different profile", path.display())));
            }
            Some(_) => {}
        }
        if let Some(prev) = provers.insert(key.keypair.id_p, key.keypair.i_pub.clone()) {
            if prev != key.keypair.i_pub {
                return Err(Failure::Usage(anyhow!("two keys share id {}", key.keypair.id_hex())));
            }
        }
    }
    let profile = profile.expect("clap requires at least one key");
    let seed = resolve_seed(args.seed);

    let listener = std::net::TcpListener::bind((args.host.as_str(), args.port))
        .with_context(|| format!("binding {}:{}", args.host, args.port))
        .map_err(Failure::Transport)?;
    let addr = listener.local_addr().context("local address")?;
    let mut service = VerifierService::new(profile, provers);
    service.timeout = Duration::from_millis(args.timeout_ms);
    println!("listening={addr}");

    service
        .serve(&listener, seed, args.rounds, |k, result| match result {
            Ok(o) => println!("round={k} verdict={}", verdict(o.accepted)),
            Err(e) => println!("round={k} error={e}"),
        })
        .context("accepting connections")
        .map_err(Failure::Transport)
}

fn verdict(accepted: bool) -> &'static str {
    if accepted {
        "accept"
    } else {
        "reject"
    }
}

fn engine_for(args: &AuthArgs) -> Result<Engine, Failure> {
    let usage = |e: gps_core::datapath::DatapathError| Failure::Usage(e.into());
    match args.arch {
        Architecture::Serial => {
            if args.lut_bits.is_some() {
                return Err(Failure::Usage(anyhow!("--lut-bits does not apply to the serial unit")));
            }
            Ok(Engine::Serial(SerialConfig::new(args.word_bits.unwrap_or(16)).map_err(usage)?))
        }
        Architecture::Parallel => {
            if args.word_bits.is_some() {
                return Err(Failure::Usage(anyhow!("--word-bits does not apply to the parallel unit")));
            }
            Ok(Engine::Parallel(KcmConfig::new(args.lut_bits.unwrap_or(4)).map_err(usage)?))
        }
        Architecture::Hybrid => {
            let mut cfg = KcmConfig::new(args.lut_bits.unwrap_or(4)).map_err(usage)?;
            if let Some(w) = args.word_bits {
                cfg = cfg.with_chunked_final_add(w).map_err(usage)?;
            }
            Ok(Engine::Hybrid(cfg))
        }
    }
}

fn sidecar(coupons: &Path) -> PathBuf {
    let mut name = coupons.as_os_str().to_owned();
    name.push(".used");
    PathBuf::from(name)
}

fn read_sidecar(path: &Path) -> Result<u64, Failure> {
    match fs::read_to_string(path) {
        Ok(text) => {
            text.trim().parse().map_err(|_| Failure::Usage(anyhow!("{} does not hold a coupon index", path.display())))
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(0),
        Err(e) => Err(Failure::Usage(anyhow::Error::new(e).context(format!("reading {}", path.display())))),
    }
}

pub(crate) fn auth(args: AuthArgs, format: OutputFormat) -> CmdResult {
    let engine = engine_for(&args)?;
    let key = load_key(&args.key)?;
    let (coupon_profile, coupons) = parse_coupon_file(&read_text(&args.coupons)?)
        .with_context(|| format!("parsing coupon file {}", args.coupons.display()))
        .map_err(Failure::Usage)?;
    if coupon_profile != key.profile {
        return Err(Failure::Usage(anyhow!("coupon file and key file use different profiles")));
    }
    let used = sidecar(&args.coupons);
    let slot = match args.index {
        Some(i) => i,
        None => read_sidecar(&used)?,
    };
    let s_bits = key.profile.s_bits;
    let mut prover = ProverSession::new(key.profile, key.keypair, CouponSource::List(coupons), engine)
        .map_err(|e| Failure::Usage(e.into()))?;
    prover.skip_coupons(slot);
    if prover.coupons_left() == 0 {
        return Err(Failure::Usage(anyhow!("no unused coupons left (slot {slot})")));
    }

    let mut transport = TcpTransport::connect(args.connect.as_str(), Duration::from_millis(args.timeout_ms))
        .with_context(|| format!("connecting to {}", args.connect))
        .map_err(Failure::Transport)?;
    // the commitment is about to leave: never offer this coupon again
    if args.index.is_none() {
        write_text(&used, &format!("{}\n", slot + 1))?;
    }
    let outcome = run_prover(&mut prover, &mut transport).map_err(|e| match e {
        ProtocolError::Transport(t) => Failure::Transport(t.into()),
        other => Failure::Internal(other.into()),
    })?;

    let dp = prover.last_datapath();
    if let (Some(path), Some(dp)) = (&args.trace, dp) {
        write_text(path, &dp.dump_trace())?;
    }
    let arch = args.arch.tag();
    match format {
        OutputFormat::Text => {
            println!("verdict: {}", verdict(outcome.accepted));
            println!("coupon: {slot}");
            match dp {
                Some(dp) => {
                    println!("{arch}: {} cycles ({} datapath steps + {} control)", dp.cycles, dp.steps, dp.overhead())
                }
                None => println!("{arch}: no response computed"),
            }
        }
        OutputFormat::Kv => {
            println!("arch={arch} s_bits={s_bits} metric=accepted value={}", u8::from(outcome.accepted));
            println!("arch={arch} s_bits={s_bits} metric=coupon_index value={slot}");
            if let Some(dp) = dp {
                println!("arch={arch} s_bits={s_bits} metric=steps value={}", dp.steps);
                println!("arch={arch} s_bits={s_bits} metric=cycles value={}", dp.cycles);
            }
        }
    }
    if outcome.accepted {
        Ok(())
    } else {
        Err(Failure::Reject)
    }
}

pub(crate) fn report(args: ReportArgs, format: OutputFormat) -> CmdResult {
    if args.challenge_bits == 0 {
        return Err(Failure::Usage(anyhow!("--challenge-bits must be positive")));
    }
    SerialConfig::new(args.word_bits).map_err(|e| Failure::Usage(e.into()))?;
    KcmConfig::new(args.lut_bits).map_err(|e| Failure::Usage(e.into()))?;

    let table2 = reproduce_table2(&[128, 256, 512], args.challenge_bits, args.word_bits, args.lut_bits);
    let table3 = reproduce_table3(args.challenge_bits);
    let note = coupon_storage_note(args.coupons);
    let mut out = render_table2(&table2, format);
    match format {
        OutputFormat::Text => {
            out.push('\n');
            out.push_str(&render_table3(&table3, format));
            out.push('\n');
            out.push_str(&format!("{note}\n"));
        }
        OutputFormat::Kv => {
            out.push_str(&render_table3(&table3, format));
            for (metric, value) in
                [("coupon_nand", note.coupon_nand), ("prng_nand", note.prng_nand), ("core_cells", note.core_cells)]
            {
                out.push_str(&format!("arch=coupons-{} s_bits=0 metric={metric} value={value:.0}\n", note.count));
            }
        }
    }
    match &args.out {
        Some(path) => write_text(path, &out)?,
        None => print!("{out}"),
    }

    if args.check {
        let drifts = check_table2(&table2);
        for d in &drifts {
            eprintln!("drift: {}/{} {} expected {} got {}", d.arch, d.s_bits, d.metric, d.expected, d.got);
        }
        if !drifts.is_empty() {
            return Err(Failure::Internal(anyhow!("{} reproduced values drifted", drifts.len())));
        }
        eprintln!("check: all reproduced values match");
    }
    Ok(())
}
