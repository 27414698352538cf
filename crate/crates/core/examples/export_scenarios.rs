//! Write the built-in scenarios as JSON files, ready for `ionfridge simulate`
//! or editing.
//!
//!     cargo run --example export_scenarios -- scenarios

use ionfridge::experiments::presets;

fn main() -> ionfridge::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "scenarios".into());
    std::fs::create_dir_all(&dir)?;
    for name in presets::PRESET_NAMES {
        let s = presets::by_name(name).expect("preset exists");
        let path = std::path::Path::new(&dir).join(format!("{name}.json"));
        std::fs::write(&path, s.to_json() + "\n")?;
        println!("{}", path.display());
    }
    Ok(())
}
