//! Target-recognition network architectures.
//!
//! Both variants share the same trunk: the compressed magnitude image is
//! multilook-averaged by a 4× pooling stem, then passes three same-size
//! convolution blocks (5×5×8, 5×5×8, 4×4×8 with ReLU, pooled between
//! blocks), a 64-unit dense layer with ReLU, and a 3-class softmax head.
//! Pool factors are chosen per profile so both scales land on the same
//! final 8×8×8 feature map: 512 → 128 → 32 → 8 at full scale and
//! 128 → 32 → 16 → 8 at desk scale.
//!
//! The variants differ only in the first trainable layer:
//!
//! - hybrid: the matched-filter layer (two trainable scale parameters)
//! - baseline: a free-form complex convolution of the same kernel size
//!   followed by a modulus activation

use rand::Rng;

use crate::error::{Error, Result};
use crate::network::{
    AgcLayer, AvgPoolLayer, ComplexConvLayer, Conv2dLayer, DenseLayer, FlattenLayer,
    InputScaleLayer, Layer, LayerDescriptor, LayerKind, LogCompressLayer, ModulusActivation,
    Network, ReluLayer, StandardizeLayer,
};
use crate::radar_sim::RadarParams;
use crate::sp_layer::MfLayer;

pub const CLASSES: usize = 3;

/// First-layer choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Hybrid,
    Baseline,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Hybrid => "hybrid",
            Variant::Baseline => "baseline",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "hybrid" => Ok(Variant::Hybrid),
            "baseline" => Ok(Variant::Baseline),
            other => Err(Error::Parameter(format!(
                "unknown variant '{other}' (expected hybrid or baseline)"
            ))),
        }
    }
}

/// Scale profile: radar parameters plus the matched-filter footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub name: &'static str,
    pub params: RadarParams,
    pub filter_size: usize,
    /// Multilook pooling factor applied to the magnitude image before
    /// the convolutional trunk.
    pub stem_pool: usize,
    /// Pooling factor after each convolution block.
    pub pool_factors: [usize; 3],
}

impl Profile {
    /// 128×128 raw data, 16×16 filter.
    pub fn desk() -> Self {
        Profile {
            name: "desk",
            params: RadarParams::desk(),
            filter_size: 16,
            stem_pool: 4,
            pool_factors: [2, 2, 1],
        }
    }

    /// 512×512 raw data, 64×64 filter, full parameter table.
    pub fn full() -> Self {
        Profile {
            name: "full",
            params: RadarParams::full(),
            filter_size: 64,
            stem_pool: 4,
            pool_factors: [4, 4, 1],
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "full" => Ok(Self::full()),
            other => Err(Error::Parameter(format!(
                "unknown profile '{other}' (expected desk or full)"
            ))),
        }
    }
}

/// Initial bounds for the matched-filter scale parameters.
pub const RHO_INIT_RANGE: std::ops::Range<f64> = 0.8..1.2;

/// Post-modulus normalization choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    None,
    CenterOnly,
    Full,
}

/// Conditioning stages around the signal-processing front end.
#[derive(Debug, Clone, Copy)]
pub struct ArchOpts {
    /// Per-sample AGC on the complex input (target RMS 1/filter_size)
    /// instead of the fixed 1/filter_size² gain.
    pub agc: bool,
    pub log_compress: bool,
    pub norm: Norm,
}

impl Default for ArchOpts {
    fn default() -> Self {
        ArchOpts {
            agc: false,
            log_compress: true,
            norm: Norm::Full,
        }
    }
}

/// Build a fresh network. Weight initialization and the matched-filter
/// scale perturbation are drawn from `rng` in a fixed order, so the
/// result is deterministic for a given RNG state.
pub fn build_network(profile: &Profile, variant: Variant, rng: &mut impl Rng) -> Result<Network> {
    build_network_opts(profile, variant, rng, ArchOpts::default())
}

pub fn build_network_opts(
    profile: &Profile,
    variant: Variant,
    rng: &mut impl Rng,
    opts: ArchOpts,
) -> Result<Network> {
    let raw = profile.params.raw_size;
    let pool_total: usize =
        profile.stem_pool * profile.pool_factors.iter().product::<usize>();
    if raw % pool_total != 0 {
        return Err(Error::Parameter(format!(
            "raw size {raw} does not support pooling by {}x then {:?}",
            profile.stem_pool, profile.pool_factors
        )));
    }
    let (k_r, k_a) = profile.params.derive_rates()?;

    let mut layers: Vec<Box<dyn Layer>> = Vec::new();
    // Condition the raw input scale: either per-sample receiver AGC or a
    // fixed gain dividing out the filter's coherent processing gain.
    if opts.agc {
        layers.push(Box::new(AgcLayer::new(1.0 / profile.filter_size as f64)));
    } else {
        let gain = 1.0 / (profile.filter_size * profile.filter_size) as f64;
        layers.push(Box::new(InputScaleLayer::new(gain)));
    }
    match variant {
        Variant::Hybrid => {
            let mut mf = MfLayer::new(
                profile.filter_size,
                k_r,
                k_a,
                profile.params.f_sr,
                profile.params.prf,
            )?;
            mf.set_rho(
                rng.gen_range(RHO_INIT_RANGE),
                rng.gen_range(RHO_INIT_RANGE),
            )?;
            layers.push(Box::new(mf));
        }
        Variant::Baseline => {
            let mut cc = ComplexConvLayer::new(profile.filter_size);
            cc.init_fan_in(rng);
            layers.push(Box::new(cc));
            layers.push(Box::new(ModulusActivation::new()));
        }
    }
    // Compress the magnitude image's dynamic range, multilook it down to
    // the trunk's working resolution, and normalize the background level
    // and scale per sample.
    if opts.log_compress {
        layers.push(Box::new(LogCompressLayer::new()));
    }
    layers.push(Box::new(AvgPoolLayer::new(profile.stem_pool)));
    match opts.norm {
        Norm::None => {}
        Norm::CenterOnly => layers.push(Box::new(StandardizeLayer::center_only())),
        Norm::Full => layers.push(Box::new(StandardizeLayer::new())),
    }

    for (i, &(kh, kw)) in [(5usize, 5usize), (5, 5), (4, 4)].iter().enumerate() {
        let in_ch = if i == 0 { 1 } else { 8 };
        let mut conv = Conv2dLayer::new(in_ch, 8, kh, kw, true);
        conv.init_fan_in(rng);
        layers.push(Box::new(conv));
        layers.push(Box::new(ReluLayer::new()));
        if profile.pool_factors[i] > 1 {
            layers.push(Box::new(AvgPoolLayer::new(profile.pool_factors[i])));
        }
    }

    layers.push(Box::new(FlattenLayer::new()));

    let spatial = raw / pool_total;
    let features = 8 * spatial * spatial;
    let mut fc1 = DenseLayer::new(features, 64);
    fc1.init_fan_in(rng);
    layers.push(Box::new(fc1));
    layers.push(Box::new(ReluLayer::new()));

    let mut fc2 = DenseLayer::new(64, CLASSES);
    fc2.init_fan_in(rng);
    layers.push(Box::new(fc2));

    Ok(Network::new(layers, CLASSES))
}

/// Infer the variant from a checkpoint's leading signal-processing layer.
pub fn infer_variant(descriptors: &[LayerDescriptor]) -> Option<Variant> {
    descriptors.iter().find_map(|d| match d.kind {
        LayerKind::MatchedFilter => Some(Variant::Hybrid),
        LayerKind::ComplexConv => Some(Variant::Baseline),
        _ => None,
    })
}

/// Infer the profile from a checkpoint's filter footprint.
pub fn infer_profile(descriptors: &[LayerDescriptor]) -> Option<Profile> {
    let sp = descriptors
        .iter()
        .find(|d| matches!(d.kind, LayerKind::MatchedFilter | LayerKind::ComplexConv))?;
    let size = *sp.dims.first()? as usize;
    if size == Profile::desk().filter_size {
        Some(Profile::desk())
    } else if size == Profile::full().filter_size {
        Some(Profile::full())
    } else {
        None
    }
}
