use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use scis_core::descriptor::descriptors_csv;
use scis_core::render::{boundary_overlay, segmentation_overlay};
use scis_core::{
    describe_all, felzenszwalb_segment, oversegmentation_error, run_benchmark, slic_segment,
    BenchParams, Error, FhParams, LabelMap, RasterImage, Session, SlicParams, SvmParams,
};

use crate::server::{self, Config};

#[derive(Debug, Parser)]
#[command(
    name = "scis",
    version,
    about = "Interactive segmentation by superpixel classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP session service.
    Serve(ServeArgs),
    /// Segment an image from a seed mask in one shot.
    Segment(SegmentArgs),
    /// Over-segment an image and export the superpixels.
    Superpixels(SuperpixelArgs),
    /// Score one-shot segmentations over a dataset.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct FhArgs {
    /// Merge threshold scale.
    #[arg(long, default_value_t = 24.0)]
    pub k: f64,
    /// Smallest superpixel, in pixels.
    #[arg(long, default_value_t = 20)]
    pub min_size: usize,
    /// Gaussian pre-smoothing; 0 disables it.
    #[arg(long, default_value_t = 0.8)]
    pub sigma: f64,
}

impl FhArgs {
    fn params(&self) -> FhParams {
        FhParams {
            k: self.k,
            min_size: self.min_size,
            smoothing_sigma: self.sigma,
        }
    }
}

#[derive(Debug, Args)]
pub struct SvmArgs {
    /// SVM box constraint.
    #[arg(long, default_value_t = 4.0)]
    pub c: f64,
    /// RBF kernel width.
    #[arg(long, default_value_t = 4.0)]
    pub gamma: f64,
}

impl SvmArgs {
    fn params(&self) -> SvmParams {
        SvmParams {
            c: self.c,
            gamma: self.gamma,
            ..SvmParams::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "SCIS_HOST", default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, env = "SCIS_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "SCIS_MAX_WIDTH", default_value_t = 4096)]
    pub max_width: u32,
    #[arg(long, env = "SCIS_MAX_HEIGHT", default_value_t = 4096)]
    pub max_height: u32,
    /// Seconds before an untouched session is dropped.
    #[arg(long, env = "SCIS_IDLE_TIMEOUT", default_value_t = 1800)]
    pub idle_timeout: u64,
    /// Request body limit in MiB.
    #[arg(long, env = "SCIS_MAX_BODY_MB", default_value_t = 256)]
    pub max_body_mb: usize,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub image: PathBuf,
    /// Seed mask: 8-bit gray, value = class id, 0 = unlabeled.
    #[arg(long)]
    pub seeds: PathBuf,
    /// Output label map.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a color overlay PNG.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    /// Also write the trained classifier as JSON.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub fh: FhArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Fh,
    Slic,
}

#[derive(Debug, Args)]
pub struct SuperpixelArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Fh)]
    pub algo: Algo,
    #[command(flatten)]
    pub fh: FhArgs,
    /// SLIC target superpixel size, in pixels.
    #[arg(long, default_value_t = 100)]
    pub avg_size: usize,
    /// SLIC color/space trade-off.
    #[arg(long, default_value_t = 10.0)]
    pub compactness: f64,
    /// Superpixel id raster (8-bit, or 16-bit past 256 superpixels).
    #[arg(long)]
    pub out: PathBuf,
    /// Boundary overlay PNG.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    /// Descriptor CSV.
    #[arg(long)]
    pub descriptors: Option<PathBuf>,
    /// Ground truth for reporting the over-segmentation error.
    #[arg(long)]
    pub gt: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory holding `images/` and `gt/`.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Directory holding `<id>_<g>.png` seed masks.
    #[arg(long)]
    pub seeds: PathBuf,
    /// Fuzzy border radius for boundary accuracy.
    #[arg(long, default_value_t = 4)]
    pub radius: u32,
    #[arg(long)]
    pub out: PathBuf,
    /// Report the printed Dice sum instead of the class-averaged score.
    #[arg(long, visible_alias = "literal-eq9")]
    pub literal_dice: bool,
    /// Object class for object accuracy on binary ground truths.
    #[arg(long, default_value_t = 1)]
    pub object_class: u8,
    #[command(flatten)]
    pub fh: FhArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
}

/// Runs a parsed command line. Exit status is 2 when fewer than two classes
/// were seeded and 1 on any other error.
pub fn run(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Serve(args) => serve(args),
        Command::Segment(args) => segment(args),
        Command::Superpixels(args) => superpixels(args),
        Command::Bench(args) => bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::TooFewClasses) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let config = Config {
        max_width: args.max_width,
        max_height: args.max_height,
        idle_timeout: Duration::from_secs(args.idle_timeout),
        body_limit: args.max_body_mb << 20,
    };
    let addr = SocketAddr::new(args.host, args.port);
    tokio::runtime::Runtime::new()?.block_on(server::serve(addr, config))
}

fn segment(args: SegmentArgs) -> anyhow::Result<()> {
    let image = RasterImage::load(&args.image)?;
    let seeds = LabelMap::load(&args.seeds)?;
    let mut session = Session::new(image, args.fh.params(), args.svm.params())?;
    session.set_seed_mask(&seeds)?;
    let labels = session.segment()?.clone();
    labels
        .save(&args.out, None)
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.overlay {
        segmentation_overlay(session.image(), &labels, Some(session.superpixels()), 0.5)?
            .save_png(path)?;
    }
    if let Some(path) = &args.model {
        session
            .model()
            .expect("segment trains a model")
            .save(path)?;
    }
    println!(
        "{} superpixels, classes {:?}, {} seed pixels",
        session.superpixels().count(),
        session.classes(),
        session.seeds().seed_pixel_count()
    );
    Ok(())
}

fn superpixels(args: SuperpixelArgs) -> anyhow::Result<()> {
    let image = RasterImage::load(&args.image)?;
    let sp = match args.algo {
        Algo::Fh => felzenszwalb_segment(&image, &args.fh.params())?,
        Algo::Slic => slic_segment(
            &image,
            &SlicParams {
                avg_size: args.avg_size,
                compactness: args.compactness,
            },
        )?,
    };
    fs::write(&args.out, sp.encode_id_png()?)
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.overlay {
        boundary_overlay(&image, &sp)?.save_png(path)?;
    }
    if let Some(path) = &args.descriptors {
        fs::write(path, descriptors_csv(&describe_all(&sp, &image)?))?;
    }
    print!("{} superpixels", sp.count());
    if let Some(path) = &args.gt {
        let gt = LabelMap::load(path)?;
        print!(
            ", over-segmentation error {:.4}%",
            oversegmentation_error(&sp, &gt)?
        );
    }
    println!();
    Ok(())
}

fn bench(args: BenchArgs) -> anyhow::Result<()> {
    let params = BenchParams {
        fh: args.fh.params(),
        svm: args.svm.params(),
        radius: args.radius,
        object_class: args.object_class,
        literal_dice: args.literal_dice,
    };
    let report = run_benchmark(&args.dataset, &args.seeds, &params)?;
    fs::write(&args.out, report.to_csv())
        .with_context(|| format!("writing {}", args.out.display()))?;
    for (name, reason) in &report.failures {
        eprintln!("skipped {name}: {reason}");
    }
    match report.means() {
        Some(m) => println!(
            "{} rows, {} skipped; mean acc {:.2}, boundary {:.2}, dice {:.2}",
            report.rows.len(),
            report.failures.len(),
            m.acc,
            m.boundary,
            m.dice
        ),
        None => println!("no rows, {} skipped", report.failures.len()),
    }
    Ok(())
}
