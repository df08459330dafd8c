//! Saves network parameters to the binary checkpoint format, reloads them and
//! confirms the round trip is exact.

use ditherlab::checkpoint;
use ditherlab::nn::init_params;

fn main() -> ditherlab::Result<()> {
    let params = init_params(42);
    let dir = std::env::temp_dir().join("ditherlab-checkpoint-example");
    std::fs::create_dir_all(&dir).map_err(|e| ditherlab::Error::io(&dir, e))?;
    let path = dir.join("init_seed42.bin");
    checkpoint::save(&params, &path)?;
    let bytes = std::fs::metadata(&path).map_err(|e| ditherlab::Error::io(&path, e))?.len();
    let back = checkpoint::load(&path)?;
    println!(
        "{} parameters, {bytes} bytes at {}; exact round trip: {}",
        params.layout().num_params(),
        path.display(),
        back == params
    );
    Ok(())
}
