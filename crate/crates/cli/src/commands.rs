//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use hnn_core::arch::{build_network, infer_profile, infer_variant, Profile, Variant};
use hnn_core::network::{load_checkpoint_into, read_descriptors, save_checkpoint, Network};
use hnn_core::radar_sim::{generate_dataset, load_dataset, save_dataset, Dataset};
use hnn_core::trainer::{self, snr_sweep, SgdOptions, TrainConfig};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_snr, resolve, resolve_opt, resolve_threads, FileConfig};
use crate::manifest::RunManifest;
use crate::{CliError, EvalArgs, GenerateArgs, SweepSnrArgs, TrainArgs};

const DEFAULT_SNR_DB: f64 = 20.0;
const DEFAULT_VAL_N: usize = 300;
const DEFAULT_SWEEP_N: usize = 300;
const DEFAULT_SWEEP_SNRS: &str = "-10,-5,0,5,10,15,20,25,30,35,40";
/// Seed offset for auto-generated validation sets.
const VAL_SEED_OFFSET: u64 = 0x5641_4C53;

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

fn require_out(out: &Option<PathBuf>, file: &FileConfig) -> Result<PathBuf, CliError> {
    let out = match out {
        Some(p) => p.clone(),
        None => match file.get("out") {
            Some(raw) => PathBuf::from(raw),
            None => return Err(CliError::usage("missing --out directory".into())),
        },
    };
    fs::create_dir_all(&out)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", out.display())))?;
    Ok(out)
}

fn require_dir(
    flag: &Option<PathBuf>,
    file: &FileConfig,
    key: &str,
) -> Result<PathBuf, CliError> {
    match flag {
        Some(p) => Ok(p.clone()),
        None => match file.get(key) {
            Some(raw) => Ok(PathBuf::from(raw)),
            None => Err(CliError::usage(format!("missing --{key}"))),
        },
    }
}

fn dataset_file(dir: &Path) -> PathBuf {
    dir.join("dataset.hrd1")
}

fn load_dataset_checked(dir: &Path) -> Result<(Dataset, f64), CliError> {
    let path = dataset_file(dir);
    let (ds, manifest) = load_dataset(&path)?;
    Ok((ds, manifest.snr_db))
}

pub fn run_generate(args: GenerateArgs) -> Result<(), CliError> {
    let file = load_file_config(&args.common.config)?;
    let n = resolve(args.n, &file, "n", 300)?;
    if n < 1 {
        return Err(CliError::usage("--n must be at least 1".into()));
    }
    let snr_raw = resolve(args.snr, &file, "snr", DEFAULT_SNR_DB.to_string())?;
    let snr_db = parse_snr(&snr_raw)?;
    let profile_name = resolve(args.profile, &file, "profile", "desk".to_string())?;
    let profile = Profile::from_name(&profile_name)?;
    let seed = resolve(args.seed, &file, "seed", 0u64)?;
    let out = require_out(&args.common.out, &file)?;

    let mut manifest = RunManifest::new("generate");
    manifest.set("n", n);
    manifest.set("snr_db", snr_db);
    manifest.set("profile", &profile_name);
    manifest.set("seed", seed);
    manifest.set("layout.dataset", "dataset.hrd1");
    manifest.set("layout.dataset_manifest", "dataset.manifest.txt");
    manifest.write(&out.join("run_manifest.txt"))?;

    let ds = generate_dataset(n, &profile.params, snr_db, seed)?;
    let data_path = dataset_file(&out);
    save_dataset(&data_path, &ds, snr_db)?;
    RunManifest::append_outputs(
        &out.join("run_manifest.txt"),
        &[("dataset", data_path.as_path())],
    )?;

    let counts = ds.samples.iter().fold([0usize; 3], |mut acc, s| {
        acc[s.label] += 1;
        acc
    });
    println!(
        "wrote {} samples ({}x{}, classes {counts:?}) to {}",
        n,
        profile.params.raw_size,
        profile.params.raw_size,
        data_path.display()
    );
    Ok(())
}

pub fn run_train(args: TrainArgs) -> Result<(), CliError> {
    let file = load_file_config(&args.common.config)?;
    let variant_name = resolve(args.variant, &file, "variant", "hybrid".to_string())?;
    let variant = Variant::from_name(&variant_name)?;
    let profile_name = resolve(args.profile, &file, "profile", "desk".to_string())?;
    let profile = Profile::from_name(&profile_name)?;
    let data_dir = require_dir(&args.data, &file, "data")?;
    let val_dir = resolve_opt(args.val_data, &file, "val_data")?;
    let epochs = resolve(args.epochs, &file, "epochs", 5usize)?;
    let batch = resolve(args.batch, &file, "batch", 50usize)?;
    let lr_main = resolve(args.lr_main, &file, "lr_main", trainer::DEFAULT_LR_MAIN)?;
    let lr_sp = resolve(args.lr_sp, &file, "lr_sp", trainer::DEFAULT_LR_SP)?;
    let seed = resolve(args.seed, &file, "seed", 0u64)?;
    let threads = resolve_threads(args.common.threads, &file)?;
    let val_n = resolve(None, &file, "val_n", DEFAULT_VAL_N)?;
    let out = require_out(&args.common.out, &file)?;
    if epochs < 1 {
        return Err(CliError::usage("--epochs must be at least 1".into()));
    }
    if batch < 1 {
        return Err(CliError::usage("--batch must be at least 1".into()));
    }

    let mut manifest = RunManifest::new("train");
    manifest.set("variant", &variant_name);
    manifest.set("profile", &profile_name);
    manifest.set("data", data_dir.display());
    manifest.set("epochs", epochs);
    manifest.set("batch", batch);
    manifest.set("lr_main", lr_main);
    manifest.set("lr_sp", lr_sp);
    manifest.set("seed", seed);
    manifest.set("threads", threads);
    manifest.set("timings", args.timings);
    manifest.set("layout.checkpoint", "checkpoint.hnn");
    manifest.set("layout.metrics", "metrics.csv");
    manifest.hash_input("train_dataset", &dataset_file(&data_dir))?;

    let (train_set, train_snr) = load_dataset_checked(&data_dir)?;
    let val_set = match &val_dir {
        Some(dir) => {
            manifest.set("val_data", dir.display());
            manifest.hash_input("val_dataset", &dataset_file(dir))?;
            load_dataset_checked(dir)?.0
        }
        None => {
            let val_seed = seed.wrapping_add(VAL_SEED_OFFSET);
            manifest.set("val_generated.n", val_n);
            manifest.set("val_generated.seed", val_seed);
            manifest.set("val_generated.snr_db", train_snr);
            generate_dataset(val_n, &train_set.params, train_snr, val_seed)?
        }
    };
    manifest.write(&out.join("run_manifest.txt"))?;

    let mut config = TrainConfig::new(variant, profile);
    config.sgd = SgdOptions {
        batch_size: batch,
        epochs,
        lr_main,
        lr_sp,
        seed,
        threads,
        record_seconds: args.timings,
    };
    config.train_path = Some(data_dir.display().to_string());
    config.val_path = val_dir.as_ref().map(|d| d.display().to_string());

    let mut last_epoch_ckpt: Option<PathBuf> = None;
    let result = trainer::train(&config, &train_set, &val_set, |epoch, net| {
        let path = out.join(format!("checkpoint_epoch_{epoch}.hnn"));
        save_checkpoint(&path, net)?;
        last_epoch_ckpt = Some(path);
        Ok(())
    });
    let (net, metrics) = match result {
        Ok(pair) => pair,
        Err(hnn_core::Error::Numeric(msg)) => {
            let hint = match &last_epoch_ckpt {
                Some(p) => format!("last good checkpoint: {}", p.display()),
                None => "no checkpoint was written".to_string(),
            };
            return Err(CliError::numeric(format!("{msg}; {hint}")));
        }
        Err(other) => return Err(other.into()),
    };

    let ckpt_path = out.join("checkpoint.hnn");
    save_checkpoint(&ckpt_path, &net)?;
    let metrics_path = out.join("metrics.csv");
    fs::write(&metrics_path, metrics.to_csv())
        .map_err(|e| CliError::data(format!("cannot write metrics: {e}")))?;

    let mut timing = String::from("epoch,seconds\n");
    for (i, s) in metrics.epoch_seconds.iter().enumerate() {
        timing.push_str(&format!("{},{s}\n", i + 1));
    }
    fs::write(out.join("timings.txt"), timing)
        .map_err(|e| CliError::data(format!("cannot write timings: {e}")))?;

    RunManifest::append_outputs(
        &out.join("run_manifest.txt"),
        &[
            ("checkpoint", ckpt_path.as_path()),
            ("metrics", metrics_path.as_path()),
        ],
    )?;

    println!(
        "trained {} ({} epochs, {} iterations): final train accuracy {:.4}, val accuracy {:.4}",
        variant_name,
        epochs,
        metrics.iteration_count(),
        metrics.final_train_accuracy().unwrap_or(f64::NAN),
        metrics.final_val_accuracy().unwrap_or(f64::NAN),
    );
    if let Some((rho_r, rho_a)) = metrics.final_rho {
        println!("matched-filter scales: rho_r={rho_r:.6} rho_a={rho_a:.6}");
    }
    Ok(())
}

/// Rebuild the architecture a checkpoint was saved from, validating any
/// explicitly requested profile/variant against it.
fn network_from_checkpoint(
    ckpt: &Path,
    profile_flag: &Option<String>,
    variant_flag: &Option<String>,
) -> Result<(Network, Profile, Variant), CliError> {
    let descriptors = read_descriptors(ckpt)?;
    let inferred_profile = infer_profile(&descriptors)
        .ok_or_else(|| CliError::data("checkpoint has no recognizable filter layer".into()))?;
    let inferred_variant = infer_variant(&descriptors)
        .ok_or_else(|| CliError::data("checkpoint has no recognizable first layer".into()))?;
    if let Some(name) = profile_flag {
        let requested = Profile::from_name(name)?;
        if requested.name != inferred_profile.name {
            return Err(CliError::data(format!(
                "checkpoint profile mismatch: expected {} ({}x{} raw, {}x{} filter), found {}",
                name,
                requested.params.raw_size,
                requested.params.raw_size,
                requested.filter_size,
                requested.filter_size,
                inferred_profile.name
            )));
        }
    }
    if let Some(name) = variant_flag {
        let requested = Variant::from_name(name)?;
        if requested != inferred_variant {
            return Err(CliError::data(format!(
                "checkpoint variant mismatch: expected {name}, found {}",
                inferred_variant.name()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut net = build_network(&inferred_profile, inferred_variant, &mut rng)?;
    load_checkpoint_into(ckpt, &mut net)?;
    Ok((net, inferred_profile, inferred_variant))
}

pub fn run_eval(args: EvalArgs) -> Result<(), CliError> {
    let file = load_file_config(&args.common.config)?;
    let ckpt = require_dir(&args.ckpt, &file, "ckpt")?;
    let data_dir = require_dir(&args.data, &file, "data")?;
    let threads = resolve_threads(args.common.threads, &file)?;
    let out = require_out(&args.common.out, &file)?;

    let mut manifest = RunManifest::new("eval");
    manifest.set("ckpt", ckpt.display());
    manifest.set("data", data_dir.display());
    manifest.set("threads", threads);
    manifest.set("layout.report", "eval.csv");
    manifest.hash_input("checkpoint", &ckpt)?;
    manifest.hash_input("dataset", &dataset_file(&data_dir))?;
    manifest.write(&out.join("run_manifest.txt"))?;

    let (net, _, variant) = network_from_checkpoint(&ckpt, &args.profile, &args.variant)?;
    let (ds, _) = load_dataset_checked(&data_dir)?;
    let accuracy = trainer::evaluate(&net, &ds, threads)?;
    let correct = (accuracy * ds.samples.len() as f64).round() as usize;

    let report_path = out.join("eval.csv");
    fs::write(
        &report_path,
        format!("n,correct,accuracy\r\n{},{},{}\r\n", ds.samples.len(), correct, accuracy),
    )
    .map_err(|e| CliError::data(format!("cannot write report: {e}")))?;
    RunManifest::append_outputs(
        &out.join("run_manifest.txt"),
        &[("report", report_path.as_path())],
    )?;

    println!(
        "{} accuracy {:.6} ({}/{})",
        variant.name(),
        accuracy,
        correct,
        ds.samples.len()
    );
    Ok(())
}

pub fn run_sweep_snr(args: SweepSnrArgs) -> Result<(), CliError> {
    let file = load_file_config(&args.common.config)?;
    let ckpt = require_dir(&args.ckpt, &file, "ckpt")?;
    let threads = resolve_threads(args.common.threads, &file)?;
    let seed = resolve(args.seed, &file, "seed", 0u64)?;
    let n_per_point = resolve(args.n_per_point, &file, "n_per_point", DEFAULT_SWEEP_N)?;
    let snr_raw = resolve(args.snr, &file, "snr", DEFAULT_SWEEP_SNRS.to_string())?;
    let out = require_out(&args.common.out, &file)?;
    if n_per_point < 1 {
        return Err(CliError::usage("--n-per-point must be at least 1".into()));
    }
    let snr_list: Vec<f64> = snr_raw
        .split(',')
        .map(|s| parse_snr(s.trim()))
        .collect::<Result<_, _>>()?;
    if snr_list.is_empty() {
        return Err(CliError::usage("--snr list is empty".into()));
    }

    let mut manifest = RunManifest::new("sweep-snr");
    manifest.set("ckpt", ckpt.display());
    manifest.set("snr", &snr_raw);
    manifest.set("n_per_point", n_per_point);
    manifest.set("seed", seed);
    manifest.set("threads", threads);
    manifest.set("layout.report", "sweep.csv");
    manifest.hash_input("checkpoint", &ckpt)?;
    manifest.write(&out.join("run_manifest.txt"))?;

    let (net, profile, _) = network_from_checkpoint(&ckpt, &None, &None)?;
    let results = snr_sweep(&net, &snr_list, n_per_point, &profile.params, seed, threads)?;

    let mut csv = String::from("snr_db,accuracy,n\r\n");
    for (snr_db, accuracy) in &results {
        csv.push_str(&format!("{snr_db},{accuracy},{n_per_point}\r\n"));
        println!("snr {snr_db:>6} dB: accuracy {accuracy:.4}");
    }
    let report_path = out.join("sweep.csv");
    fs::write(&report_path, csv)
        .map_err(|e| CliError::data(format!("cannot write report: {e}")))?;
    RunManifest::append_outputs(
        &out.join("run_manifest.txt"),
        &[("report", report_path.as_path())],
    )?;
    Ok(())
}
