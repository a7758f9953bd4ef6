use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::Context;
use chrono::NaiveDate;
use clap::Parser;

use routeplanner_server::{load_planner, router, AppState};

#[derive(Debug, Parser)]
#[command(version, about = "Multi-modal route planning service")]
struct Args {
    /// OSM XML extract with the road network.
    #[arg(long, env = "ROUTEPLANNER_OSM")]
    osm: PathBuf,
    /// Directory holding a GTFS feed. Road-only planning when absent.
    #[arg(long, env = "ROUTEPLANNER_GTFS")]
    gtfs: Option<PathBuf>,
    #[arg(long, env = "ROUTEPLANNER_PORT", default_value_t = 8080)]
    port: u16,
    /// Service day (YYYY-MM-DD). All trips are loaded when unset.
    #[arg(long, env = "ROUTEPLANNER_DATE")]
    date: Option<NaiveDate>,
    /// Directory with the web front end.
    #[arg(long, env = "ROUTEPLANNER_STATIC_DIR")]
    static_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();

    let (osm, gtfs, date) = (args.osm.clone(), args.gtfs.clone(), args.date);
    let planner = tokio::task::spawn_blocking(move || load_planner(&osm, gtfs.as_deref(), date)).await??;
    let app = router(AppState::new(planner), args.static_dir.as_deref());

    let addr = SocketAddr::from(([0, 0, 0, 0], args.port));
    let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    log::info!("listening on {addr}");
    axum::serve(listener, app).await?;
    Ok(())
}
